//! Geometry of Z^d: vertices, norms, ℓ∞ boxes with dense row-major indexing.
//!
//! Adjacency is always ℓ1 distance one. Box membership and the `|x|` used by
//! estimators are ℓ∞. Every distance function takes an explicit [`Norm`].

use std::fmt;

use crate::error::{Error, Result};

/// Index returned for vertices that fall outside a box.
pub const OUTSIDE: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeParams {
    pub d: usize,
}

impl LatticeParams {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("d", "dimension must be at least 1"));
        }
        Ok(Self { d })
    }

    /// Models that need a transient walk call this on top of `new`.
    pub fn require_transient(&self) -> Result<()> {
        if self.d < 3 {
            return Err(Error::Recurrent(self.d));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    L1,
    LInf,
}

impl Norm {
    pub fn distance(self, a: &[i64], b: &[i64]) -> u64 {
        debug_assert_eq!(a.len(), b.len());
        let it = a.iter().zip(b).map(|(x, y)| x.abs_diff(*y));
        match self {
            Norm::L1 => it.sum(),
            Norm::LInf => it.max().unwrap_or(0),
        }
    }

    pub fn length(self, a: &[i64]) -> u64 {
        let it = a.iter().map(|x| x.unsigned_abs());
        match self {
            Norm::L1 => it.sum(),
            Norm::LInf => it.max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(pub Vec<i64>);

impl Vertex {
    pub fn origin(d: usize) -> Self {
        Vertex(vec![0; d])
    }

    /// The unit vector along `axis`.
    pub fn unit(d: usize, axis: usize) -> Self {
        let mut v = vec![0; d];
        v[axis] = 1;
        Vertex(v)
    }

    pub fn along_axis(d: usize, axis: usize, t: i64) -> Self {
        let mut v = vec![0; d];
        v[axis] = t;
        Vertex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_adjacent(&self, other: &Vertex) -> bool {
        self.dim() == other.dim() && Norm::L1.distance(&self.0, &other.0) == 1
    }

    /// The 2d lattice neighbors, ordered by axis then direction (− before +).
    pub fn neighbors(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..2 * self.dim()).map(move |dir| {
            let mut v = self.0.clone();
            v[dir / 2] += if dir % 2 == 0 { -1 } else { 1 };
            Vertex(v)
        })
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<i64>> for Vertex {
    fn from(v: Vec<i64>) -> Self {
        Vertex(v)
    }
}

/// The ℓ∞ box `B(center, radius)` with a row-major bijection onto
/// `[0, (2r+1)^d)`. The last coordinate varies fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxSpec {
    d: usize,
    center: Vertex,
    radius: u32,
    side: u64,
    len: u64,
    strides: Vec<u64>,
}

impl BoxSpec {
    pub fn new(center: Vertex, radius: u32) -> Result<Self> {
        let d = center.dim();
        LatticeParams::new(d)?;
        let side = 2 * radius as u64 + 1;
        let mut strides = vec![0u64; d];
        let mut len: u64 = 1;
        for axis in (0..d).rev() {
            strides[axis] = len;
            len = len
                .checked_mul(side)
                .filter(|&l| l < OUTSIDE)
                .ok_or_else(|| Error::param("radius", format!("(2*{radius}+1)^{d} overflows the index space")))?;
        }
        Ok(Self { d, center, radius, side, len, strides })
    }

    pub fn centered(d: usize, radius: u32) -> Result<Self> {
        LatticeParams::new(d)?;
        Self::new(Vertex::origin(d), radius)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn center(&self) -> &Vertex {
        &self.center
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn side(&self) -> u64 {
        self.side
    }

    /// `(2r+1)^d`.
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn strides(&self) -> &[u64] {
        &self.strides
    }

    /// The same box grown by `pad` in every direction.
    pub fn padded(&self, pad: u32) -> Result<Self> {
        Self::new(self.center.clone(), self.radius + pad)
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.d && Norm::LInf.distance(x, &self.center.0) <= self.radius as u64
    }

    /// Whether `inner` lies entirely inside this box.
    pub fn contains_box(&self, inner: &BoxSpec) -> bool {
        inner.d == self.d
            && Norm::LInf.distance(&inner.center.0, &self.center.0) + inner.radius as u64
                <= self.radius as u64
    }

    /// Dense index of `x`, or [`OUTSIDE`].
    pub fn index(&self, x: &[i64]) -> u64 {
        if x.len() != self.d {
            return OUTSIDE;
        }
        let r = self.radius as i64;
        let mut idx = 0u64;
        for axis in 0..self.d {
            let off = x[axis] - self.center.0[axis] + r;
            if off < 0 || off as u64 >= self.side {
                return OUTSIDE;
            }
            idx += off as u64 * self.strides[axis];
        }
        idx
    }

    pub fn index_of(&self, v: &Vertex) -> Result<u64> {
        match self.index(&v.0) {
            OUTSIDE => Err(Error::OutOfRegion(v.to_string())),
            i => Ok(i),
        }
    }

    /// Writes the coordinates of index `i` into `out`.
    pub fn coords_into(&self, mut i: u64, out: &mut [i64]) {
        debug_assert!(i < self.len);
        let r = self.radius as i64;
        for axis in 0..self.d {
            let q = i / self.strides[axis];
            i -= q * self.strides[axis];
            out[axis] = q as i64 - r + self.center.0[axis];
        }
    }

    pub fn vertex(&self, i: u64) -> Vertex {
        let mut v = vec![0; self.d];
        self.coords_into(i, &mut v);
        Vertex(v)
    }

    /// Offset of coordinate `axis` of index `i` from the low face, in `[0, side)`.
    #[inline]
    pub fn axis_offset(&self, i: u64, axis: usize) -> u64 {
        (i / self.strides[axis]) % self.side
    }

    /// Neighbor of index `i` in direction `dir` (axis `dir/2`, − for even),
    /// or [`OUTSIDE`] when it leaves the box.
    #[inline]
    pub fn neighbor(&self, i: u64, dir: usize) -> u64 {
        let axis = dir / 2;
        let off = self.axis_offset(i, axis);
        if dir % 2 == 0 {
            if off == 0 {
                OUTSIDE
            } else {
                i - self.strides[axis]
            }
        } else if off + 1 == self.side {
            OUTSIDE
        } else {
            i + self.strides[axis]
        }
    }

    /// Neighbor with periodic wrap: the box viewed as a discrete torus.
    #[inline]
    pub fn torus_neighbor(&self, i: u64, dir: usize) -> u64 {
        let axis = dir / 2;
        let off = self.axis_offset(i, axis);
        let s = self.strides[axis];
        if dir % 2 == 0 {
            if off == 0 {
                i + (self.side - 1) * s
            } else {
                i - s
            }
        } else if off + 1 == self.side {
            i - (self.side - 1) * s
        } else {
            i + s
        }
    }

    /// ℓ∞ distance of index `i` from the center.
    pub fn linf_from_center(&self, i: u64) -> u64 {
        let r = self.radius as u64;
        (0..self.d)
            .map(|a| self.axis_offset(i, a).abs_diff(r))
            .max()
            .unwrap_or(0)
    }

    pub fn is_boundary_index(&self, i: u64) -> bool {
        self.linf_from_center(i) == self.radius as u64
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.len).map(move |i| self.vertex(i))
    }
}

/// Vertices of the box that have a lattice neighbor outside it.
pub fn box_boundary(b: &BoxSpec) -> Vec<Vertex> {
    (0..b.len())
        .filter(|&i| b.is_boundary_index(i))
        .map(|i| b.vertex(i))
        .collect()
}

/// `min_{a∈A, b∈B} |a − b|_∞`.
pub fn ext_distance(a: &[Vertex], b: &[Vertex]) -> Result<u64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidQuery("ext_distance needs two nonempty sets".into()));
    }
    let mut best = u64::MAX;
    for x in a {
        for y in b {
            if x.dim() != y.dim() {
                return Err(Error::InvalidQuery(format!("dimension mismatch between {x} and {y}")));
            }
            best = best.min(Norm::LInf.distance(&x.0, &y.0));
        }
    }
    Ok(best)
}

/// The `v ∼ A` predicate: ℓ∞ distance at most one.
pub fn is_near(v: &Vertex, set: &[Vertex]) -> Result<bool> {
    Ok(ext_distance(std::slice::from_ref(v), set)? <= 1)
}
