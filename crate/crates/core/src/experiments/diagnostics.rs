//! Trend checks on estimate records: scaled quantities that should stay
//! flat across a grid, and the deletion-gap ordering.

use serde::Serialize;

use super::EstimateRecord;

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostic {
    pub criterion: u32,
    pub name: &'static str,
    /// `None` when the records needed are missing.
    pub passed: Option<bool>,
    pub detail: String,
}

fn value(recs: &[EstimateRecord], name: &str, key: &str, v: f64) -> Option<f64> {
    recs.iter()
        .find(|r| r.name == name && r.param(key).is_some_and(|p| (p - v).abs() < 1e-9))
        .map(|r| r.estimate)
}

/// max/min of `name` over `grid` against `factor`.
pub fn spread(recs: &[EstimateRecord], criterion: u32, label: &'static str, name: &str, key: &str, grid: &[f64], factor: f64) -> Diagnostic {
    let vals: Option<Vec<f64>> = grid.iter().map(|&g| value(recs, name, key, g)).collect();
    let Some(vals) = vals else {
        return Diagnostic { criterion, name: label, passed: None, detail: format!("no {name} records for {key} in {grid:?}") };
    };
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ratio = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    Diagnostic {
        criterion,
        name: label,
        passed: Some(ratio.is_finite() && ratio < factor),
        detail: format!("{name} over {key} = {grid:?}: {vals:.4?}, max/min {ratio:.3} (limit {factor})"),
    }
}

pub fn werner_trend(recs: &[EstimateRecord], b_grid: &[f64], b_floor: f64, floor: f64) -> Diagnostic {
    let gaps: Option<Vec<f64>> = b_grid.iter().map(|&b| value(recs, "werner_gap_r2", "b", b)).collect();
    let filt = value(recs, "werner_filtered_r2", "b", b_floor);
    let (Some(gaps), Some(filt)) = (gaps, filt) else {
        return Diagnostic { criterion: 13, name: "werner_gap", passed: None, detail: "werner records missing".into() };
    };
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    Diagnostic {
        criterion: 13,
        name: "werner_gap",
        passed: Some(decreasing && filt > floor),
        detail: format!("gap/r² over b = {b_grid:?}: {gaps:.4?}; filtered/r² at b = {b_floor}: {filt:.4} (floor {floor})"),
    }
}

/// The standard trend checks on whatever records are present.
pub fn evaluate(recs: &[EstimateRecord]) -> Vec<Diagnostic> {
    vec![
        spread(recs, 9, "one_arm_r2", "pi1_r2", "r", &[2.0, 3.0, 4.0], 3.0),
        spread(recs, 10, "chemical_over_r2", "chemical_shell_over_r2", "shell", &[2.0, 4.0], 4.0),
        spread(recs, 11, "intrinsic_arm_r", "intrinsic_arm_r", "r", &[4.0, 8.0, 16.0], 3.0),
        spread(recs, 12, "local_connectivity_r2", "local_connectivity_r2", "r", &[2.0, 3.0], 4.0),
        werner_trend(recs, &[1.0, 4.0 / 3.0, 2.0], 2.0, 0.05),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(name: &str, p: &str, est: f64) -> EstimateRecord {
        EstimateRecord {
            name: name.into(),
            d: 7,
            route: "loops".into(),
            param_json: p.into(),
            estimate: est,
            stderr: 0.0,
            n: 1,
            seed: 0,
            truncation_note: String::new(),
        }
    }

    #[test]
    fn spread_and_missing() {
        let recs = vec![rec("pi1_r2", r#"{"r":2}"#, 0.2), rec("pi1_r2", r#"{"r":3}"#, 0.3), rec("pi1_r2", r#"{"r":4}"#, 0.5)];
        let d = evaluate(&recs);
        assert_eq!(d[0].passed, Some(true));
        assert_eq!(d[1].passed, None);
        let recs = vec![rec("pi1_r2", r#"{"r":2}"#, 0.1), rec("pi1_r2", r#"{"r":3}"#, 0.3), rec("pi1_r2", r#"{"r":4}"#, 0.5)];
        assert_eq!(evaluate(&recs)[0].passed, Some(false));
    }

    #[test]
    fn werner_needs_strict_decrease() {
        let mk = |g: [f64; 3]| {
            let mut v: Vec<_> = [1.0, 4.0 / 3.0, 2.0]
                .iter()
                .zip(g)
                .map(|(b, x)| rec("werner_gap_r2", &format!(r#"{{"b":{b}}}"#), x))
                .collect();
            v.push(rec("werner_filtered_r2", r#"{"b":2.0}"#, 0.1));
            v
        };
        assert_eq!(werner_trend(&mk([0.3, 0.2, 0.1]), &[1.0, 4.0 / 3.0, 2.0], 2.0, 0.05).passed, Some(true));
        assert_eq!(werner_trend(&mk([0.3, 0.3, 0.1]), &[1.0, 4.0 / 3.0, 2.0], 2.0, 0.05).passed, Some(false));
    }
}
