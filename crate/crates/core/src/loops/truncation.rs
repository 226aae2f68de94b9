//! Bias from cutting loops at length `K_max`, measured by rerunning an
//! observable over a grid of cutoffs.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SweepRow {
    pub k_max: usize,
    pub estimate: f64,
    pub stderr: f64,
    /// Change from the previous row.
    pub diff: Option<f64>,
    /// Standard error of the paired per-replica change, when both rows
    /// have the same replicas.
    pub diff_stderr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct TruncationReport {
    pub rows: Vec<SweepRow>,
    /// Largest cutoff, if its change from the previous one is below half
    /// the Monte Carlo standard error of its estimate.
    pub accepted: Option<usize>,
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// `observable(K)` returns per-replica values; replicas with the same index
/// should share their seeds so successive cutoffs are coupled.
pub fn truncation_sweep(k_grid: &[usize], mut observable: impl FnMut(usize) -> Result<Vec<f64>>) -> Result<TruncationReport> {
    if k_grid.is_empty() || k_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("k_grid", "must be nonempty and strictly increasing"));
    }
    let mut rows: Vec<SweepRow> = Vec::new();
    let mut prev: Option<Vec<f64>> = None;
    for &k in k_grid {
        let vals = observable(k)?;
        if vals.is_empty() {
            return Err(Error::param("observable", "returned no replicas"));
        }
        let (estimate, stderr) = mean_se(&vals);
        let (diff, diff_stderr) = match (&prev, rows.last()) {
            (Some(p), Some(last)) => {
                let d = estimate - last.estimate;
                let se = (p.len() == vals.len()).then(|| mean_se(&vals.iter().zip(p).map(|(a, b)| a - b).collect::<Vec<_>>()).1);
                (Some(d), se)
            }
            _ => (None, None),
        };
        rows.push(SweepRow { k_max: k, estimate, stderr, diff, diff_stderr });
        prev = Some(vals);
    }
    let last = rows.last().expect("nonempty grid");
    let accepted = last.diff.filter(|d| d.abs() < 0.5 * last.stderr || *d == 0.0).map(|_| last.k_max);
    Ok(TruncationReport { rows, accepted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxSpec;
    use crate::loops::{LoopMode, LoopOptions, LoopSampler};

    #[test]
    fn loop_count_differences_are_new_masses() {
        let bx = BoxSpec::centered(3, 2).unwrap();
        let sampler = LoopSampler::new(&bx, &LoopOptions { k_max: 32, mode: LoopMode::BoxKilled, ..Default::default() }).unwrap();
        let lam = sampler.expected_counts().unwrap();
        let grid = [4, 8, 16, 32];
        let rep = truncation_sweep(&grid, |k| Ok(vec![lam[..=k].iter().sum()])).unwrap();
        for w in grid.windows(2).zip(&rep.rows[1..]) {
            let ((a, b), row) = ((w.0[0], w.0[1]), w.1);
            let new: f64 = lam[a + 1..=b].iter().sum();
            assert!((row.diff.unwrap() - new).abs() < 1e-12);
        }
        let diffs: Vec<f64> = rep.rows[1..].iter().map(|r| r.diff.unwrap()).collect();
        assert!(diffs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rejects_bad_grid() {
        assert!(truncation_sweep(&[8, 8], |_| Ok(vec![0.0])).is_err());
        let r = truncation_sweep(&[2, 4], |_| Ok(vec![1.0, 0.0])).unwrap();
        assert_eq!(r.accepted, Some(4));
        assert_eq!(r.rows[1].diff_stderr, Some(0.0));
    }
}
