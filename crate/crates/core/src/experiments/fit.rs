//! Power-law fits `value ≈ A·r^γ` by least squares on log–log scale, with a
//! bootstrap interval over replicas.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct FitResult {
    pub gamma: f64,
    pub log_amplitude: f64,
    /// 2.5% and 97.5% bootstrap quantiles of `γ`.
    pub ci: (f64, f64),
    /// Smallest and largest `r` used.
    pub window: (f64, f64),
    pub n_boot: usize,
    /// Bootstrap resamples dropped because a resampled mean was not
    /// positive.
    pub dropped: usize,
}

/// Slope and intercept of the least-squares line through
/// `(ln x, ln y)`.
pub fn least_squares_loglog(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Fit("need at least two points".into()));
    }
    if let Some((xi, yi)) = x.iter().zip(y).find(|(a, b)| !(**a > 0.0 && **b > 0.0)) {
        return Err(Error::Fit(format!(
            "nonpositive value {yi} at r = {xi}; the logarithm is undefined, increase replicas"
        )));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all r values are equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let g = sxy / sxx;
    Ok((g, my - g * mx))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Fits the means of per-replica samples at each `r`. Requires at least
/// three points; each bootstrap resample redraws the replicas of every
/// point independently.
pub fn fit_exponent(points: &[(f64, &[f64])], n_boot: usize, seed: u64) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 grid points, got {}", points.len())));
    }
    if points.iter().any(|(_, s)| s.is_empty()) {
        return Err(Error::Fit("a grid point has no replicas".into()));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let y: Vec<f64> = points.iter().map(|p| mean(p.1)).collect();
    let (gamma, log_amplitude) = least_squares_loglog(&x, &y)?;
    let mut rng = stream(seed, 0, Domain::Bootstrap, &[points.len() as u64]);
    let mut gammas = Vec::with_capacity(n_boot);
    let mut dropped = 0;
    let mut yb = vec![0.0; points.len()];
    for _ in 0..n_boot {
        for (slot, (_, s)) in yb.iter_mut().zip(points) {
            let n = s.len();
            *slot = (0..n).map(|_| s[rng.random_range(0..n)]).sum::<f64>() / n as f64;
        }
        match least_squares_loglog(&x, &yb) {
            Ok((g, _)) => gammas.push(g),
            Err(_) => dropped += 1,
        }
    }
    let ci = if gammas.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        gammas.sort_by(f64::total_cmp);
        let q = |p: f64| gammas[((p * (gammas.len() - 1) as f64).round() as usize).min(gammas.len() - 1)];
        (q(0.025), q(0.975))
    };
    let window = (x.iter().copied().fold(f64::INFINITY, f64::min), x.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    Ok(FitResult { gamma, log_amplitude, ci, window, n_boot, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn exact_power_laws() {
        let rs = [2.0, 3.0, 4.0, 8.0];
        let samples: Vec<Vec<f64>> = rs.iter().map(|r: &f64| vec![r.powi(-2); 5]).collect();
        let pts: Vec<(f64, &[f64])> = rs.iter().zip(&samples).map(|(r, s)| (*r, s.as_slice())).collect();
        let f = fit_exponent(&pts, 50, 1).unwrap();
        assert!((f.gamma + 2.0).abs() < 1e-12);
        assert!((f.ci.0 + 2.0).abs() < 1e-12 && (f.ci.1 + 2.0).abs() < 1e-12);
        assert_eq!(f.window, (2.0, 8.0));
        let constant: Vec<Vec<f64>> = rs.iter().map(|_| vec![0.3; 3]).collect();
        let pts: Vec<(f64, &[f64])> = rs.iter().zip(&constant).map(|(r, s)| (*r, s.as_slice())).collect();
        assert!(fit_exponent(&pts, 10, 1).unwrap().gamma.abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let z = vec![0.0; 4];
        let one = vec![1.0; 4];
        let pts: Vec<(f64, &[f64])> = vec![(1.0, &one), (2.0, &z), (3.0, &one)];
        assert!(matches!(fit_exponent(&pts, 10, 1), Err(Error::Fit(_))));
        assert!(matches!(fit_exponent(&pts[..2], 10, 1), Err(Error::Fit(_))));
    }

    #[test]
    fn interval_halves_with_four_times_the_replicas() {
        let rs = [2.0f64, 4.0, 8.0];
        let width = |n: usize| {
            let mut rng = stream(99, n as u64, Domain::Bootstrap, &[]);
            let samples: Vec<Vec<f64>> = rs
                .iter()
                .map(|r| {
                    let m = r.powi(-2);
                    let noise = Normal::new(m, 0.2 * m).unwrap();
                    (0..n).map(|_| noise.sample(&mut rng)).collect()
                })
                .collect();
            let pts: Vec<(f64, &[f64])> = rs.iter().zip(&samples).map(|(r, s)| (*r, s.as_slice())).collect();
            let f = fit_exponent(&pts, 2000, 5).unwrap();
            f.ci.1 - f.ci.0
        };
        let ratio = width(400) / width(1600);
        assert!((1.6..2.5).contains(&ratio), "{ratio}");
    }
}
