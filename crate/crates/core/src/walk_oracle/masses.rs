//! Loop-measure masses and the scaling tables built from them.

use crate::error::{Error, Result};
use crate::lattice::{Vertex, OUTSIDE};

use super::green::{even_tail_coefficients, even_tail_sum};
use super::kernel::KernelTable;
use super::quadrature::{kernel_series, return_probs};

/// Intensity of the loop soup: the Poisson process has intensity `α μ`.
pub const ALPHA: f64 = 0.5;

/// `Λ_k(region) = (α/k) Σ_{x ∈ region} p_k(x,x)`: the Poisson mean of
/// length-`k` loops rooted in `region` under the rooted representation.
pub fn loop_mass_by_length(table: &KernelTable, region: &[Vertex], k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::param("k", "loops have length at least 2"));
    }
    if k > table.kmax() {
        return Err(Error::KernelTooShort { available: table.kmax(), required: k });
    }
    let diag_sum = match table {
        KernelTable::Free(fk) => region.len() as f64 * fk.return_prob(k),
        KernelTable::Torus(tk) => {
            for v in region {
                tk.box_spec().index_of(v)?;
            }
            region.len() as f64 * tk.return_prob(k)
        }
        KernelTable::BoxKilled(bk) => {
            let mut s = 0.0;
            for v in region {
                let i = bk.box_spec().index(&v.0);
                if i == OUTSIDE {
                    return Err(Error::OutOfRegion(v.to_string()));
                }
                s += bk.diag(k, i);
            }
            s
        }
    };
    Ok(ALPHA * diag_sum / k as f64)
}

/// Same as [`loop_mass_by_length`] for a region given by its size, which is
/// all that matters in translation-invariant geometries.
pub fn loop_mass_uniform(return_prob: f64, sites: u64, k: usize) -> f64 {
    ALPHA * sites as f64 * return_prob / k as f64
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ScalingRow {
    pub l: usize,
    pub sum: f64,
    /// `sum / L^{exponent}`
    pub ratio: f64,
}

/// Terms of the one-point sum: `α p_k(0,0)` is the μ-expected number of
/// visits to the origin by length-`k` loops, which dominates the mass of
/// loops through the origin and is of the same order.
///
/// Returns `Σ_{k ≥ L} k^i α p_k(0,0)` for each `L`, against `L^{i+1−d/2}`.
pub fn loop_count_scaling_check(d: usize, l_grid: &[usize], i: u32) -> Result<Vec<ScalingRow>> {
    let h = d as f64 / 2.0;
    if (i + 1) as f64 >= h {
        return Err(Error::param("i", format!("need i + 1 < d/2 for a summable tail (d = {d}, i = {i})")));
    }
    let lmax = l_grid.iter().copied().max().unwrap_or(0);
    let kmax = (64 * lmax).clamp(1024, 8192);
    let p = return_probs(d, kmax);
    let coef = even_tail_coefficients(&p, h);
    let tail = even_tail_sum(&coef, h, kmax / 2, i);
    Ok(l_grid
        .iter()
        .map(|&l| {
            let head: f64 = (l..=kmax).map(|k| (k as f64).powi(i as i32) * p[k]).sum();
            let sum = ALPHA * (head + tail);
            ScalingRow { l, sum, ratio: sum / (l as f64).powf(i as f64 + 1.0 - h) }
        })
        .collect())
}

/// Two-point analogue: `T_k(z) = α Σ_{0<j<k} p_j(0,z) p_{k−j}(z,0)` counts
/// μ-weighted pairs (visit to 0, visit to z) in length-`k` loops. Returns
/// `Σ_{k ≥ L} T_k(z)` against `L^{1−d/2} |z|^{2−d}` with `|z|` the ℓ∞ norm.
pub fn two_point_scaling_check(z: &[i64], l_grid: &[usize]) -> Result<Vec<ScalingRow>> {
    let d = z.len();
    let h = d as f64 / 2.0;
    if h <= 2.0 {
        return Err(Error::param("d", "two-point loop sums need d > 4"));
    }
    let zn = crate::lattice::Norm::LInf.length(z);
    if zn == 0 {
        return Err(Error::param("z", "points must be distinct"));
    }
    let lmax = l_grid.iter().copied().max().unwrap_or(0);
    let kmax = (64 * lmax).clamp(512, 4096);
    let pz = kernel_series(z, kmax);
    let mut t = vec![0.0; kmax + 1];
    for (k, tk) in t.iter_mut().enumerate() {
        *tk = ALPHA * (1..k).map(|j| pz[j] * pz[k - j]).sum::<f64>();
    }
    // T_{k} ~ k^{1−d/2}; fit the even-k tail with the same expansion
    let coef = even_tail_coefficients(&t, h - 1.0);
    let tail = even_tail_sum(&coef, h - 1.0, kmax / 2, 0);
    let scale = (zn as f64).powf(2.0 - d as f64);
    Ok(l_grid
        .iter()
        .map(|&l| {
            let sum = t[l.min(kmax)..].iter().sum::<f64>() + tail;
            ScalingRow { l, sum, ratio: sum / ((l as f64).powf(1.0 - h) * scale) }
        })
        .collect())
}

/// `p_k(0,z) k^{d/2} exp(d |z|_2² / (2k))` for each `k`: bounded above under
/// the Gaussian local limit theorem.
pub fn local_clt_table(z: &[i64], ks: &[usize]) -> Vec<(usize, f64)> {
    let d = z.len() as f64;
    let kmax = ks.iter().copied().max().unwrap_or(0);
    let p = kernel_series(z, kmax);
    let r2: f64 = z.iter().map(|&c| (c * c) as f64).sum();
    ks.iter()
        .map(|&k| (k, p[k] * (k as f64).powf(d / 2.0) * (d * r2 / (2.0 * k as f64)).exp()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ConvolutionRow {
    pub t: u64,
    pub sum: f64,
    /// `sum / t^{α₁+α₂+d}`
    pub constant: f64,
}

/// Evaluates `Σ_{|z|₂ ≤ R} ⟨z⟩^{α₁} ⟨z − y⟩^{α₂}` for `y = t e₁`, where
/// `⟨w⟩ = max(|w|₂, 1)`, and compares it to `t^{α₁+α₂+d}`.
///
/// With both points on the first axis the summand depends on `z₁` and on
/// `n = Σ_{i≥2} z_i²` only. The number of points of Z^{d−1} with a given `n`
/// is built by convolving one axis at a time, so the sum costs `O(d R³)`
/// instead of `O(R^d)`.
pub fn convolution_inequality_check(a1: f64, a2: f64, d: usize, ts: &[u64], radius: u64) -> Result<Vec<ConvolutionRow>> {
    let df = d as f64;
    if a1.min(a2) <= -df || a1 + a2 >= -df {
        return Err(Error::param("alpha", "need min(α₁,α₂) > −d and α₁+α₂ < −d"));
    }
    if d < 2 {
        return Err(Error::param("d", "need d >= 2"));
    }
    let r = radius as i64;
    let nmax = (r * r) as usize;
    let mut reps = vec![0.0f64; nmax + 1];
    reps[0] = 1.0;
    for _ in 1..d {
        let mut next = vec![0.0f64; nmax + 1];
        for (n, v) in reps.iter().enumerate() {
            if *v == 0.0 {
                continue;
            }
            for k in -r..=r {
                let m = n + (k * k) as usize;
                if m > nmax {
                    continue;
                }
                next[m] += v;
            }
        }
        reps = next;
    }
    let br = |w2: f64| w2.sqrt().max(1.0);
    Ok(ts
        .iter()
        .map(|&t| {
            let t = t as i64;
            let mut sum = 0.0;
            for z1 in -r..=r {
                let rest = nmax - (z1 * z1) as usize;
                for (n, &count) in reps[..=rest].iter().enumerate() {
                    if count == 0.0 {
                        continue;
                    }
                    let n0 = br((z1 * z1) as f64 + n as f64);
                    let n1 = br(((z1 - t) * (z1 - t)) as f64 + n as f64);
                    sum += count * n0.powf(a1) * n1.powf(a2);
                }
            }
            let constant = sum / (t.max(1) as f64).powf(a1 + a2 + df);
            ConvolutionRow { t: t as u64, sum, constant }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxSpec;
    use crate::walk_oracle::kernel::{BoxKernel, FreeKernel};

    #[test]
    fn single_vertex_masses() {
        let t = KernelTable::Free(FreeKernel::new(7, 4).unwrap());
        let o = vec![Vertex::origin(7)];
        assert!((loop_mass_by_length(&t, &o, 2).unwrap() - 1.0 / 56.0).abs() < 1e-16);
        assert_eq!(loop_mass_by_length(&t, &o, 3).unwrap(), 0.0);
        assert!(loop_mass_by_length(&t, &o, 1).is_err());
        assert!(matches!(loop_mass_by_length(&t, &o, 6), Err(Error::KernelTooShort { .. })));
        let t2 = KernelTable::Free(FreeKernel::new(2, 4).unwrap());
        let o2 = vec![Vertex::origin(2)];
        assert!((loop_mass_by_length(&t2, &o2, 4).unwrap() - 0.5 * (36.0 / 256.0) / 4.0).abs() < 1e-16);
    }

    #[test]
    fn box_killed_single_site() {
        let bx = BoxSpec::centered(3, 0).unwrap();
        let t = KernelTable::BoxKilled(BoxKernel::new(&bx, 4).unwrap());
        assert_eq!(loop_mass_by_length(&t, &[Vertex::origin(3)], 2).unwrap(), 0.0);
    }

    #[test]
    fn one_point_scaling_is_stable_in_d7() {
        let rows = loop_count_scaling_check(7, &[4, 8, 16, 32], 0).unwrap();
        let (lo, hi) = rows.iter().fold((f64::MAX, 0.0f64), |(a, b), r| (a.min(r.ratio), b.max(r.ratio)));
        assert!(hi / lo < 2.0, "{rows:?}");
        let r2 = loop_count_scaling_check(7, &[4, 16], 2).unwrap();
        assert!(r2[1].sum < r2[0].sum);
        assert!(loop_count_scaling_check(7, &[4], 3).is_err());
    }

    #[test]
    fn one_point_sum_matches_direct_summation() {
        // direct partial sums out to a very long table with the same tail rule
        let rows = loop_count_scaling_check(5, &[10], 0).unwrap();
        let p = return_probs(5, 8192);
        let direct: f64 = ALPHA * p[10..].iter().sum::<f64>();
        // the remaining tail beyond 8192 is below 1e-4 of the sum in d = 5
        assert!((rows[0].sum - direct) / rows[0].sum < 2e-4 && rows[0].sum >= direct);
    }

    #[test]
    fn two_point_tail_decreases() {
        // no loop of length < 4 visits both 0 and 2e₁, so L = 2 and L = 4 agree
        let rows = two_point_scaling_check(&[2, 0, 0, 0, 0, 0, 0], &[2, 4, 6]).unwrap();
        assert!(rows[1].sum > 0.0 && rows[1].sum <= rows[0].sum);
        assert!(rows[2].sum < rows[1].sum);
    }

    fn brute_convolution(a1: f64, a2: f64, d: usize, t: i64, r: i64) -> f64 {
        let side = 2 * r + 1;
        let n = side.pow(d as u32);
        let mut s = 0.0;
        for mut i in 0..n {
            let mut z = vec![0i64; d];
            for c in z.iter_mut() {
                *c = i % side - r;
                i /= side;
            }
            if z.iter().map(|c| c * c).sum::<i64>() > r * r {
                continue;
            }
            let n0 = (z.iter().map(|c| c * c).sum::<i64>() as f64).sqrt().max(1.0);
            let mut w = z.clone();
            w[0] -= t;
            let n1 = (w.iter().map(|c| c * c).sum::<i64>() as f64).sqrt().max(1.0);
            s += n0.powf(a1) * n1.powf(a2);
        }
        s
    }

    #[test]
    fn convolution_shells_match_brute_force() {
        let rows = convolution_inequality_check(-2.0, -2.5, 3, &[0, 2, 3], 5).unwrap();
        for row in rows {
            let b = brute_convolution(-2.0, -2.5, 3, row.t as i64, 5);
            assert!((row.sum - b).abs() < 1e-10 * b, "{} vs {b}", row.sum);
        }
    }

    #[test]
    fn convolution_constant_stable_in_d7() {
        let rows = convolution_inequality_check(-5.0, -5.0, 7, &[2, 4, 8], 100).unwrap();
        let c: Vec<f64> = rows.iter().map(|r| r.constant).collect();
        let (lo, hi) = c.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(hi / lo < 2.0, "{c:?}");
        let wide = convolution_inequality_check(-5.0, -5.0, 7, &[2, 4, 8], 200).unwrap();
        for (a, b) in rows.iter().zip(&wide) {
            assert!(b.sum >= a.sum && (b.sum - a.sum) / a.sum < 0.01);
        }
    }
}
