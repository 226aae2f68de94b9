//! Green's functions `G(x,y) = Σ_k p_k(x,y)`.
//!
//! Free space (d ≥ 3) uses the continuous-time representation
//! `G(0,x) = d ∫_0^∞ Π_i e^{−s} I_{|x_i|}(s) ds`, which is the Fourier
//! integral with the θ-integrals done one axis at a time. The box-killed
//! Green's function solves `(I − P_B) G = I` with a banded Cholesky factor.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::{BoxSpec, Vertex, OUTSIDE};
use crate::linalg::BandedCholesky;

use super::quadrature::{gauss_legendre, return_probs};

/// `e^{−s} I_n(s)` by the periodic trapezoid rule on
/// `(1/π) ∫_0^π e^{−s(1−cos θ)} cos(nθ) dθ`, which converges geometrically.
pub fn scaled_bessel_i(n: u64, s: f64) -> f64 {
    if s == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let m = (2 * n + 40) as f64 + 8.0 * s.sqrt();
    let m = m.ceil() as usize;
    let h = PI / m as f64;
    let f = |t: f64| (-s * (1.0 - t.cos())).exp() * (n as f64 * t).cos();
    let mut acc = 0.5 * (f(0.0) + f(PI));
    for j in 1..m {
        acc += f(j as f64 * h);
    }
    acc / m as f64
}

fn integrand(orders: &[u64], s: f64) -> f64 {
    orders.iter().map(|&n| scaled_bessel_i(n, s)).product()
}

/// Coefficients `c_j` of `Π_i (1 + Σ_j a_{ij} s^{−j})` from the large-s
/// expansion of `√(2πs) e^{−s} I_n(s)`, up to `s^{−4}`.
fn asymptotic_coeffs(orders: &[u64]) -> [f64; 5] {
    let mut poly = [1.0, 0.0, 0.0, 0.0, 0.0];
    for &n in orders {
        let mu = 4.0 * (n as f64).powi(2);
        let mut a = [1.0, 0.0, 0.0, 0.0, 0.0];
        let mut term = 1.0;
        for j in 1..5 {
            let odd = (2 * j - 1) as f64;
            term *= -(mu - odd * odd) / (j as f64 * 8.0);
            a[j] = term;
        }
        let mut next = [0.0; 5];
        for i in 0..5 {
            for j in 0..5 - i {
                next[i + j] += poly[i] * a[j];
            }
        }
        poly = next;
    }
    poly
}

/// Free Green's function `G(0, x)` for `d ≥ 3`.
pub fn free_green(x: &[i64]) -> Result<f64> {
    let d = x.len();
    if d < 3 {
        return Err(Error::Recurrent(d));
    }
    let orders: Vec<u64> = x.iter().map(|c| c.unsigned_abs()).collect();
    let nmax = orders.iter().copied().max().unwrap_or(0) as f64;
    let cutoff = (400.0 * nmax * nmax).max(4000.0);
    let (gx, gw) = gauss_legendre(32);
    let mut total = 0.0;
    let mut a = 0.0;
    let mut b: f64 = 0.5;
    while a < cutoff {
        let b_ = b.min(cutoff);
        let half = 0.5 * (b_ - a);
        let mid = 0.5 * (b_ + a);
        for (xi, wi) in gx.iter().zip(&gw) {
            total += half * wi * integrand(&orders, mid + half * xi);
        }
        a = b_;
        b = 2.0 * b_;
    }
    let c = asymptotic_coeffs(&orders);
    let hd = d as f64 / 2.0;
    let pref = (2.0 * PI).powf(-hd);
    let mut tail = 0.0;
    for (j, cj) in c.iter().enumerate() {
        let e = hd + j as f64 - 1.0;
        tail += cj * cutoff.powf(-e) / e;
    }
    Ok(d as f64 * (total + pref * tail))
}

/// Hurwitz zeta `Σ_{n≥0} (q+n)^{−s}` by Euler–Maclaurin, for `s > 1`.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    const N: usize = 16;
    const B2K: [f64; 6] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0];
    let mut sum = 0.0;
    for n in 0..N {
        sum += (q + n as f64).powf(-s);
    }
    let a = q + N as f64;
    sum += a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // Σ B_2k/(2k)! · s(s+1)…(s+2k−2) · a^{−s−2k+1}
    let mut rising = s;
    let mut fact = 2.0;
    for (k, b) in B2K.iter().enumerate() {
        let k = k + 1;
        sum += b / fact * rising * a.powf(-s - 2.0 * k as f64 + 1.0);
        rising *= (s + 2.0 * k as f64 - 1.0) * (s + 2.0 * k as f64);
        fact *= (2 * k + 1) as f64 * (2 * k + 2) as f64;
    }
    sum
}

/// Cross-check of `G(0,0)` by the series `Σ_{k ≤ K} p_k(0,0)` plus a tail
/// fitted to `p_{2m} ≈ m^{−d/2} Σ_{j<4} a_j m^{−j}`. Returns
/// `(partial sum, tail estimate)`.
pub fn green_origin_series(d: usize, kmax: usize) -> Result<(f64, f64)> {
    if d < 3 {
        return Err(Error::Recurrent(d));
    }
    let kmax = kmax - kmax % 2;
    let p = return_probs(d, kmax);
    let partial: f64 = p.iter().sum();
    let coef = even_tail_coefficients(&p, d as f64 / 2.0);
    let tail = even_tail_sum(&coef, d as f64 / 2.0, kmax / 2, 0);
    Ok((partial, tail))
}

/// Fit `p_{2m} ≈ m^{−h} Σ_{j<4} a_j m^{−j}` through four points near the end
/// of the table.
pub(crate) fn even_tail_coefficients(p: &[f64], h: f64) -> [f64; 4] {
    let mmax = (p.len() - 1) / 2;
    let spacing = (mmax / 8).max(1);
    let mut a = [[0.0f64; 4]; 4];
    let mut rhs = [0.0f64; 4];
    for r in 0..4 {
        let m = mmax - r * spacing;
        let mf = m as f64;
        for (c, coef) in a[r].iter_mut().enumerate() {
            *coef = mf.powf(-(c as f64));
        }
        rhs[r] = p[2 * m] * mf.powf(h);
    }
    solve4(a, rhs)
}

/// `Σ_{m > mmax} (2m)^i m^{−h} Σ_j a_j m^{−j}`.
pub(crate) fn even_tail_sum(coef: &[f64; 4], h: f64, mmax: usize, i: u32) -> f64 {
    let scale = 2f64.powi(i as i32);
    coef.iter()
        .enumerate()
        .map(|(j, a)| scale * a * hurwitz_zeta(h + j as f64 - i as f64, (mmax + 1) as f64))
        .sum()
}

fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> [f64; 4] {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut s = b[row];
        for k in row + 1..4 {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x
}

/// Precision matrix `I − P_B` of a box, banded Cholesky factored.
#[derive(Clone, Debug)]
pub struct BoxPrecision {
    bx: BoxSpec,
    factor: BandedCholesky,
}

/// Largest box the banded factor is built for (the band grows as `side^{d−1}`).
pub const BOX_FACTOR_MAX_ENTRIES: u64 = 1 << 27;

impl BoxPrecision {
    pub fn new(bx: &BoxSpec) -> Result<Self> {
        let n = bx.len();
        let bw = if bx.d() == 1 { 1 } else { bx.strides()[0] };
        let entries = n.saturating_mul(bw + 1);
        if entries > BOX_FACTOR_MAX_ENTRIES {
            return Err(Error::MemoryBudget { required: entries * 8, budget: BOX_FACTOR_MAX_ENTRIES * 8 });
        }
        let c = 1.0 / (2 * bx.d()) as f64;
        let factor = BandedCholesky::factor(n as usize, bw as usize, |i, j| {
            if i == j {
                return 1.0;
            }
            let diff = (i - j) as u64;
            for a in 0..bx.d() {
                if diff == bx.strides()[a] && bx.axis_offset(i as u64, a) > 0 {
                    return -c;
                }
            }
            0.0
        })?;
        Ok(Self { bx: bx.clone(), factor })
    }

    pub fn box_spec(&self) -> &BoxSpec {
        &self.bx
    }

    pub fn factor(&self) -> &BandedCholesky {
        &self.factor
    }

    /// Column `G_B(·, y)`.
    pub fn column(&self, y: u64) -> Vec<f64> {
        let mut e = vec![0.0; self.bx.len() as usize];
        e[y as usize] = 1.0;
        self.factor.solve(&mut e);
        e
    }
}

/// Where a Green's function lives.
#[derive(Clone, Debug)]
pub enum GreenMode {
    Free { d: usize },
    BoxKilled(BoxSpec),
}

pub fn greens_function(mode: &GreenMode, x: &Vertex, y: &Vertex) -> Result<f64> {
    match mode {
        GreenMode::Free { d } => {
            if x.dim() != *d || y.dim() != *d {
                return Err(Error::InvalidQuery("vertex dimension differs from d".into()));
            }
            let z: Vec<i64> = x.0.iter().zip(&y.0).map(|(a, b)| b - a).collect();
            free_green(&z)
        }
        GreenMode::BoxKilled(bx) => {
            let ix = bx.index_of(x)?;
            let iy = bx.index_of(y)?;
            Ok(BoxPrecision::new(bx)?.column(iy)[ix as usize])
        }
    }
}

/// Full table of `G` over a box: box-killed, or the free Green's function
/// restricted to pairs in the box.
#[derive(Clone, Debug)]
pub struct GreensTable {
    mode: super::KernelMode,
    bx: BoxSpec,
    g: Vec<f64>,
}

pub const GREENS_TABLE_MAX_SITES: u64 = 4096;

impl GreensTable {
    pub fn box_killed(bx: &BoxSpec) -> Result<Self> {
        Self::check(bx)?;
        let prec = BoxPrecision::new(bx)?;
        let n = bx.len() as usize;
        let mut g = vec![0.0; n * n];
        for y in 0..n {
            let col = prec.column(y as u64);
            for x in 0..n {
                g[x * n + y] = col[x];
            }
        }
        Ok(Self { mode: super::KernelMode::BoxKilled, bx: bx.clone(), g })
    }

    pub fn free(bx: &BoxSpec) -> Result<Self> {
        Self::check(bx)?;
        if bx.d() < 3 {
            return Err(Error::Recurrent(bx.d()));
        }
        let n = bx.len() as usize;
        let mut cache: rustc_hash::FxHashMap<u128, f64> = Default::default();
        let mut g = vec![0.0; n * n];
        let (mut vx, mut vy) = (vec![0; bx.d()], vec![0; bx.d()]);
        for x in 0..n {
            bx.coords_into(x as u64, &mut vx);
            for y in x..n {
                bx.coords_into(y as u64, &mut vy);
                let z: Vec<i64> = vx.iter().zip(&vy).map(|(a, b)| b - a).collect();
                let key = super::kernel::class_key(&z).expect("box offsets fit");
                let v = match cache.get(&key) {
                    Some(v) => *v,
                    None => {
                        let v = free_green(&z)?;
                        cache.insert(key, v);
                        v
                    }
                };
                g[x * n + y] = v;
                g[y * n + x] = v;
            }
        }
        Ok(Self { mode: super::KernelMode::Free, bx: bx.clone(), g })
    }

    fn check(bx: &BoxSpec) -> Result<()> {
        if bx.len() > GREENS_TABLE_MAX_SITES {
            return Err(Error::MemoryBudget {
                required: bx.len() * bx.len() * 8,
                budget: GREENS_TABLE_MAX_SITES * GREENS_TABLE_MAX_SITES * 8,
            });
        }
        Ok(())
    }

    pub fn mode(&self) -> super::KernelMode {
        self.mode
    }

    pub fn box_spec(&self) -> &BoxSpec {
        &self.bx
    }

    pub fn get(&self, x: u64, y: u64) -> f64 {
        let n = self.bx.len() as usize;
        self.g[x as usize * n + y as usize]
    }

    pub fn at(&self, x: &Vertex, y: &Vertex) -> Result<f64> {
        let (ix, iy) = (self.bx.index(&x.0), self.bx.index(&y.0));
        if ix == OUTSIDE || iy == OUTSIDE {
            return Err(Error::OutOfRegion(format!("{x} or {y}")));
        }
        Ok(self.get(ix, iy))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.bx.len() as usize;
        (0..n).all(|x| (0..x).all(|y| (self.g[x * n + y] - self.g[y * n + x]).abs() <= tol))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.g.iter().all(|&v| v >= 0.0)
    }
}
