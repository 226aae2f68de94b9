//! Step-kernel tables `p_k(x,y)` in free, box-killed and torus geometry.
//!
//! The free kernel is stored on canonical offset classes: `p_k(0,z)` only
//! depends on the multiset `{|z_i|}`, so offsets are sorted by absolute value
//! and packed into a `u128` key. A table truncated at ℓ1 radius `R` is exact
//! for `p_j(0,z)` whenever `(j + |z|_1)/2 ≤ R`, since no such walk gets
//! further than that from the origin.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::lattice::{BoxSpec, Norm};

pub const MAX_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelMode {
    Free,
    BoxKilled,
    Torus,
}

impl KernelMode {
    pub fn code(self) -> u8 {
        match self {
            KernelMode::Free => 0,
            KernelMode::BoxKilled => 1,
            KernelMode::Torus => 2,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(KernelMode::Free),
            1 => Some(KernelMode::BoxKilled),
            2 => Some(KernelMode::Torus),
            _ => None,
        }
    }
}

/// Canonical key of an offset: absolute values sorted descending, 16 bits each.
#[inline]
pub fn class_key(z: &[i64]) -> Option<u128> {
    if z.len() > MAX_DIM {
        return None;
    }
    let mut a = [0u64; MAX_DIM];
    for (dst, &c) in a.iter_mut().zip(z) {
        let v = c.unsigned_abs();
        if v > u16::MAX as u64 {
            return None;
        }
        *dst = v;
    }
    a[..z.len()].sort_unstable_by(|x, y| y.cmp(x));
    let mut key = 0u128;
    for &v in &a[..z.len()] {
        key = (key << 16) | v as u128;
    }
    Some(key)
}

/// All offset classes of ℓ1 norm at most `r` in `d` dimensions.
#[derive(Clone, Debug)]
pub struct OffsetClasses {
    d: usize,
    radius: usize,
    reps: Vec<Vec<i64>>,
    index: FxHashMap<u128, u32>,
    // class of each of the 2d neighbors of the representative, or NONE
    nbrs: Vec<u32>,
    sizes: Vec<u64>,
}

const NONE: u32 = u32::MAX;

impl OffsetClasses {
    pub fn new(d: usize, radius: usize) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::param("d", format!("kernel tables support 1 <= d <= {MAX_DIM}")));
        }
        if radius > u16::MAX as usize - 1 {
            return Err(Error::param("radius", "offset radius too large"));
        }
        let mut reps = Vec::new();
        let mut cur = Vec::with_capacity(d);
        enumerate(d, radius as i64, radius as i64, &mut cur, &mut reps);
        reps.sort_by_key(|r| (Norm::L1.length(r), r.clone()));
        let mut index = FxHashMap::default();
        for (i, r) in reps.iter().enumerate() {
            index.insert(class_key(r).expect("small offsets"), i as u32);
        }
        let mut nbrs = Vec::with_capacity(reps.len() * 2 * d);
        let mut z = vec![0i64; d];
        for r in &reps {
            for dir in 0..2 * d {
                z.copy_from_slice(r);
                z[dir / 2] += if dir % 2 == 0 { -1 } else { 1 };
                let c = if Norm::L1.length(&z) as usize <= radius {
                    index[&class_key(&z).unwrap()]
                } else {
                    NONE
                };
                nbrs.push(c);
            }
        }
        let sizes = reps.iter().map(|r| class_size(r)).collect();
        Ok(Self { d, radius, reps, index, nbrs, sizes })
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn representative(&self, c: usize) -> &[i64] {
        &self.reps[c]
    }

    /// Number of lattice offsets in class `c`.
    pub fn size(&self, c: usize) -> u64 {
        self.sizes[c]
    }

    pub fn class_of(&self, z: &[i64]) -> Option<usize> {
        debug_assert_eq!(z.len(), self.d);
        class_key(z).and_then(|k| self.index.get(&k)).map(|&c| c as usize)
    }

    /// One step of `f ↦ P f` on class-indexed functions, with `f` treated as
    /// zero beyond the truncation radius.
    fn step<T: Copy + Default + std::ops::Add<Output = T>>(&self, f: &[T], out: &mut [T]) {
        let w = 2 * self.d;
        for (c, o) in out.iter_mut().enumerate() {
            let mut s = T::default();
            for &n in &self.nbrs[c * w..(c + 1) * w] {
                if n != NONE {
                    s = s + f[n as usize];
                }
            }
            *o = s;
        }
    }
}

fn enumerate(d: usize, budget: i64, cap: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if cur.len() == d {
        out.push(cur.clone());
        return;
    }
    for v in 0..=budget.min(cap) {
        cur.push(v);
        enumerate(d, budget - v, v, cur, out);
        cur.pop();
    }
}

/// Signed permutations of a sorted offset: `d!/Π mult! · 2^{#nonzero}`.
fn class_size(rep: &[i64]) -> u64 {
    let d = rep.len() as u64;
    let mut size: u64 = (1..=d).product();
    let mut i = 0;
    while i < rep.len() {
        let mut j = i;
        while j < rep.len() && rep[j] == rep[i] {
            j += 1;
        }
        size /= (1..=(j - i) as u64).product::<u64>();
        i = j;
    }
    size << rep.iter().filter(|&&v| v != 0).count()
}

/// Number of closed walks of length `k` on Z^d, by exact integer dynamic
/// programming over offset classes inside ℓ1 radius `⌈k/2⌉`.
pub fn closed_walk_count(d: usize, k: usize) -> Result<u128> {
    let classes = OffsetClasses::new(d, k.div_ceil(2))?;
    let counts = walk_counts(&classes, k);
    Ok(counts[0])
}

/// Walk counts `N_k(0 → z)` per class for a fixed length `k`.
pub fn walk_counts(classes: &OffsetClasses, k: usize) -> Vec<u128> {
    let mut cur = vec![0u128; classes.len()];
    cur[0] = 1;
    let mut next = vec![0u128; classes.len()];
    for _ in 0..k {
        classes.step(&cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// `p_k(0,0)` from the integer walk count.
pub fn return_prob_dp(d: usize, k: usize) -> Result<f64> {
    let n = closed_walk_count(d, k)?;
    Ok(n as f64 / ((2 * d) as f64).powi(k as i32))
}

/// Free-space kernel `p_j(0,z)` for `j ≤ kmax` on offsets of ℓ1 norm at most
/// `⌈kmax/2⌉`: exactly what bridge sampling of loops up to length `kmax`
/// needs.
#[derive(Clone, Debug)]
pub struct FreeKernel {
    d: usize,
    kmax: usize,
    classes: OffsetClasses,
    // (kmax+1) rows of class-indexed probabilities
    p: Vec<f64>,
}

impl FreeKernel {
    pub fn new(d: usize, kmax: usize) -> Result<Self> {
        let classes = OffsetClasses::new(d, kmax.div_ceil(2).max(1))?;
        let n = classes.len();
        let mut p = vec![0.0; (kmax + 1) * n];
        p[0] = 1.0;
        let inv = 1.0 / (2 * d) as f64;
        let mut buf = vec![0.0; n];
        for j in 1..=kmax {
            let (prev, rest) = p.split_at_mut(j * n);
            classes.step(&prev[(j - 1) * n..], &mut buf);
            for (dst, s) in rest[..n].iter_mut().zip(&buf) {
                *dst = s * inv;
            }
        }
        Ok(Self { d, kmax, classes, p })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn classes(&self) -> &OffsetClasses {
        &self.classes
    }

    /// `p_j(0,z)`. Returns 0 for offsets outside the table.
    #[inline]
    pub fn p(&self, j: usize, z: &[i64]) -> f64 {
        match self.classes.class_of(z) {
            Some(c) => self.p[j * self.classes.len() + c],
            None => 0.0,
        }
    }

    /// Whether `p(j, z)` is exact rather than truncated.
    pub fn is_exact(&self, j: usize, z: &[i64]) -> bool {
        j <= self.kmax && (j + Norm::L1.length(z) as usize).div_ceil(2) <= self.classes.radius()
    }

    pub fn return_prob(&self, k: usize) -> f64 {
        self.p[k * self.classes.len()]
    }

    pub fn return_probs(&self) -> Vec<f64> {
        (0..=self.kmax).map(|k| self.return_prob(k)).collect()
    }
}

/// Kernel of the walk killed on leaving a box, by repeated sparse
/// matrix-vector products. Stores the diagonal `p^B_k(x,x)` for all `x`.
#[derive(Clone, Debug)]
pub struct BoxKernel {
    bx: BoxSpec,
    kmax: usize,
    // diag[k * |B| + x]
    diag: Vec<f64>,
}

/// Largest box for which box-killed tables are built.
pub const BOX_KERNEL_MAX_SITES: u64 = 40_000;

impl BoxKernel {
    pub fn new(bx: &BoxSpec, kmax: usize) -> Result<Self> {
        if bx.len() > BOX_KERNEL_MAX_SITES {
            return Err(Error::MemoryBudget {
                required: bx.len() * bx.len() * 8,
                budget: BOX_KERNEL_MAX_SITES * BOX_KERNEL_MAX_SITES * 8,
            });
        }
        use rayon::prelude::*;
        let n = bx.len() as usize;
        let cols: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|x| {
                let rows = propagate_killed(bx, x as u64, kmax);
                rows.iter().map(|r| r[x]).collect()
            })
            .collect();
        let mut diag = vec![0.0; (kmax + 1) * n];
        for (x, col) in cols.iter().enumerate() {
            for (k, v) in col.iter().enumerate() {
                diag[k * n + x] = *v;
            }
        }
        Ok(Self { bx: bx.clone(), kmax, diag })
    }

    pub fn box_spec(&self) -> &BoxSpec {
        &self.bx
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn diag(&self, k: usize, x: u64) -> f64 {
        self.diag[k * self.bx.len() as usize + x as usize]
    }

    /// `tr(P_B^k)`.
    pub fn trace(&self, k: usize) -> f64 {
        let n = self.bx.len() as usize;
        self.diag[k * n..(k + 1) * n].iter().sum()
    }
}

/// Rows `p^B_j(x, ·)` for `j ≤ kmax`.
pub fn propagate_killed(bx: &BoxSpec, x: u64, kmax: usize) -> Vec<Vec<f64>> {
    let n = bx.len() as usize;
    let d = bx.d();
    let inv = 1.0 / (2 * d) as f64;
    let mut rows = Vec::with_capacity(kmax + 1);
    let mut cur = vec![0.0; n];
    cur[x as usize] = 1.0;
    rows.push(cur.clone());
    for _ in 0..kmax {
        let mut next = vec![0.0; n];
        for (i, nx) in next.iter_mut().enumerate() {
            let mut s = 0.0;
            for dir in 0..2 * d {
                let j = bx.neighbor(i as u64, dir);
                if j != crate::lattice::OUTSIDE {
                    s += cur[j as usize];
                }
            }
            *nx = s * inv;
        }
        cur = next;
        rows.push(cur.clone());
    }
    rows
}

/// Kernel on the discrete torus `(Z/nZ)^d` with `n` the box side, indexed by
/// offset from the box center.
#[derive(Clone, Debug)]
pub struct TorusKernel {
    bx: BoxSpec,
    kmax: usize,
    p: Vec<f64>,
}

impl TorusKernel {
    pub fn new(bx: &BoxSpec, kmax: usize) -> Result<Self> {
        let n = bx.len() as usize;
        if (n as u64).saturating_mul(kmax as u64 + 1) > 1 << 28 {
            return Err(Error::MemoryBudget {
                required: n as u64 * (kmax as u64 + 1) * 8,
                budget: (1 << 28) * 8,
            });
        }
        let d = bx.d();
        let inv = 1.0 / (2 * d) as f64;
        let origin = bx.index(&bx.center().0);
        let mut p = vec![0.0; (kmax + 1) * n];
        p[origin as usize] = 1.0;
        for j in 1..=kmax {
            let (prev, rest) = p.split_at_mut(j * n);
            let prev = &prev[(j - 1) * n..];
            for (i, dst) in rest[..n].iter_mut().enumerate() {
                let mut s = 0.0;
                for dir in 0..2 * d {
                    s += prev[bx.torus_neighbor(i as u64, dir) as usize];
                }
                *dst = s * inv;
            }
        }
        Ok(Self { bx: bx.clone(), kmax, p })
    }

    pub fn box_spec(&self) -> &BoxSpec {
        &self.bx
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    /// `p^T_j(x, y)` for box indices `x`, `y`.
    pub fn p(&self, j: usize, x: u64, y: u64) -> f64 {
        let off = self.offset_index(x, y);
        self.p[j * self.bx.len() as usize + off]
    }

    fn offset_index(&self, x: u64, y: u64) -> usize {
        let side = self.bx.side();
        let r = self.bx.radius() as u64;
        let mut idx = 0u64;
        for axis in 0..self.bx.d() {
            let a = self.bx.axis_offset(x, axis);
            let b = self.bx.axis_offset(y, axis);
            let o = (b + side - a + r) % side;
            idx += o * self.bx.strides()[axis];
        }
        idx as usize
    }

    pub fn return_prob(&self, k: usize) -> f64 {
        let o = self.bx.index(&self.bx.center().0);
        self.p[k * self.bx.len() as usize + o as usize]
    }
}

/// A kernel table in one of the three geometries.
#[derive(Clone, Debug)]
pub enum KernelTable {
    Free(FreeKernel),
    BoxKilled(BoxKernel),
    Torus(TorusKernel),
}

impl KernelTable {
    pub fn mode(&self) -> KernelMode {
        match self {
            KernelTable::Free(_) => KernelMode::Free,
            KernelTable::BoxKilled(_) => KernelMode::BoxKilled,
            KernelTable::Torus(_) => KernelMode::Torus,
        }
    }

    pub fn kmax(&self) -> usize {
        match self {
            KernelTable::Free(k) => k.kmax(),
            KernelTable::BoxKilled(k) => k.kmax(),
            KernelTable::Torus(k) => k.kmax(),
        }
    }
}
