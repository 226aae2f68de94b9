//! Characteristic-function route to walk probabilities.
//!
//! `p_k(0,z) = ∫_{[−π,π]^d} ((1/d)Σ cos θ_i)^k Π cos(z_i θ_i) dθ/(2π)^d`.
//! Expanding the k-th power multinomially turns the tensor-product
//! Gauss–Legendre rule into a product of one-dimensional moments
//! `m_j(n) = (1/π)∫_0^π cos^j θ cos(nθ) dθ`, which are then combined one
//! axis at a time. This evaluates the tensor-product rule exactly, without
//! ever visiting its `n^d` nodes.

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi's initial guess, then Newton on P_n
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// `m_j(n)` for `j ≤ kmax` with an `nodes`-point rule on θ ∈ [0, π].
fn moments_with(nodes: usize, kmax: usize, n: i64) -> Vec<f64> {
    let (x, w) = gauss_legendre(nodes);
    let mut m = vec![0.0; kmax + 1];
    for (xi, wi) in x.iter().zip(&w) {
        let theta = std::f64::consts::FRAC_PI_2 * (xi + 1.0);
        let c = theta.cos();
        let mut term = 0.5 * wi * (n as f64 * theta).cos();
        for mj in m.iter_mut() {
            *mj += term;
            term *= c;
        }
    }
    m
}

/// One-dimensional moments `m_j(n)`, refining the node count until two
/// successive rules agree to `tol` on every moment.
pub fn axis_moments(kmax: usize, n: i64, tol: f64) -> Vec<f64> {
    let mut nodes = 16;
    let mut prev = moments_with(nodes, kmax, n);
    loop {
        nodes *= 2;
        let next = moments_with(nodes, kmax, n);
        let diff = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if diff < tol || nodes >= 1 << 16 {
            return next;
        }
        prev = next;
    }
}

/// `ln k!` for `k ≤ n`.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut lf = vec![0.0; n + 1];
    for k in 1..=n {
        lf[k] = lf[k - 1] + (k as f64).ln();
    }
    lf
}

/// Combine per-axis moment sequences into `p_k` for the walk in
/// `moments.len()` dimensions. Adding one axis to a walk in `a` dimensions:
/// each step goes to the new axis with probability `1/(a+1)`, so
/// `p^{(a+1)}_k = Σ_j C(k,j) (1/(a+1))^j (a/(a+1))^{k−j} m_j p^{(a)}_{k−j}`.
pub fn combine_axes(moments: &[Vec<f64>], kmax: usize) -> Vec<f64> {
    let lf = ln_factorials(kmax);
    let mut acc = moments[0][..=kmax].to_vec();
    for (a, m) in moments.iter().enumerate().skip(1) {
        let a = a as f64;
        let lq = (1.0 / (a + 1.0)).ln();
        let lr = (a / (a + 1.0)).ln();
        let mut next = vec![0.0; kmax + 1];
        for (k, nk) in next.iter_mut().enumerate() {
            let mut s = 0.0;
            for j in 0..=k {
                let (mj, pk) = (m[j], acc[k - j]);
                if mj == 0.0 || pk == 0.0 {
                    continue;
                }
                let lw = lf[k] - lf[j] - lf[k - j] + j as f64 * lq + (k - j) as f64 * lr;
                s += lw.exp() * mj * pk;
            }
            *nk = s;
        }
        acc = next;
    }
    acc
}

/// `p_k(0, z)` for `k ≤ kmax` via the characteristic function.
pub fn kernel_series(z: &[i64], kmax: usize) -> Vec<f64> {
    let mut cache: Vec<(i64, Vec<f64>)> = Vec::new();
    let moments: Vec<Vec<f64>> = z
        .iter()
        .map(|&n| {
            let n = n.abs();
            if let Some((_, m)) = cache.iter().find(|(c, _)| *c == n) {
                return m.clone();
            }
            let m = clean_parity(axis_moments(kmax, n, 1e-13), n);
            cache.push((n, m.clone()));
            m
        })
        .collect();
    combine_axes(&moments, kmax)
}

// m_j(n) vanishes exactly when j < n or j − n is odd; quadrature leaves
// roundoff there, which would otherwise leak into parity-forbidden p_k.
fn clean_parity(mut m: Vec<f64>, n: i64) -> Vec<f64> {
    for (j, v) in m.iter_mut().enumerate() {
        let j = j as i64;
        if j < n || (j - n) % 2 != 0 {
            *v = 0.0;
        }
    }
    m
}

/// Return probabilities `p_k(0,0)` for `k ≤ kmax` by quadrature.
pub fn return_probs(d: usize, kmax: usize) -> Vec<f64> {
    kernel_series(&vec![0; d], kmax)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree 12 monomial: ∫ x^12 = 2/13
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((v - 2.0 / 13.0).abs() < 1e-14);
    }

    #[test]
    fn axis_moments_match_central_binomials() {
        let m = axis_moments(40, 0, 1e-13);
        let mut exact = 1.0f64;
        for j in (0..=40).step_by(2) {
            if j > 0 {
                exact *= (j - 1) as f64 / j as f64;
            }
            assert!((m[j] - exact).abs() < 1e-13, "j={j}");
        }
        let m2 = axis_moments(10, 2, 1e-13);
        // m_2(2) = 1/4
        assert!((m2[2] - 0.25).abs() < 1e-13);
    }

    #[test]
    fn one_dimensional_return() {
        let p = return_probs(1, 6);
        assert!((p[2] - 0.5).abs() < 1e-13);
        assert!((p[4] - 6.0 / 16.0).abs() < 1e-13);
        assert_eq!(p[3], 0.0);
    }
}
