//! Per-replica observables and their summaries.

use rustc_hash::FxHashSet;
use serde_json::json;

use super::fit::fit_exponent;
use super::{mean_se, ratio_se, run_estimates, run_werner, EstimateRecord, Realization, RecordContext, MIN_EVENTS};
use crate::cluster::ClusterMap;
use crate::config::{ChemicalSection, Config, IntrinsicSection, LocalSection, Pi1Section, TwoPointSection, WernerSection};
use crate::error::{Error, Result};
use crate::lattice::{BoxSpec, Norm, Vertex, OUTSIDE};

pub(crate) trait Observable: Sync + Send {
    /// Number of values appended per replica.
    fn width(&self) -> usize;
    fn observe(&self, replica: u64, z: &Realization, row: &mut Vec<f64>) -> Result<()>;
    /// `cols[i]` holds column `i` of this observable over all replicas.
    fn summarize(&self, cols: &[Vec<f64>], ctx: &RecordContext) -> Vec<EstimateRecord>;
}

pub(crate) fn build(cfg: &Config) -> Result<Vec<Box<dyn Observable>>> {
    let d = cfg.run.d;
    let mut v: Vec<Box<dyn Observable>> = Vec::new();
    if let Some(p) = &cfg.pi1 {
        v.push(Box::new(Pi1 { r_grid: p.r_grid.clone() }));
    }
    if let Some(t) = &cfg.two_point {
        v.push(Box::new(TwoPoint { xs: t.x_list.clone(), d }));
    }
    if let Some(l) = &cfg.local {
        v.push(Box::new(Local { r_grid: l.r_grid.clone(), beta: l.beta, d }));
    }
    if let Some(c) = &cfg.chemical {
        v.push(Box::new(Chemical { s: c.clone(), d }));
    }
    if let Some(i) = &cfg.intrinsic {
        v.push(Box::new(Intrinsic { r_grid: i.r_grid.clone(), d }));
    }
    Ok(v)
}

fn pathwise(replica: u64, what: impl Into<String>) -> Error {
    Error::Pathwise { replica, what: what.into() }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn events(den: &[f64]) -> u64 {
    den.iter().filter(|&&x| x > 0.0).count() as u64
}

fn events_note(k: u64) -> String {
    if k < MIN_EVENTS {
        format!("insufficient-data: {k} conditioning events")
    } else {
        String::new()
    }
}

/// Least-squares exponent with a bootstrap interval, as a record.
fn fit_record(ctx: &RecordContext, name: &str, xs: &[u64], cols: &[&Vec<f64>]) -> Option<EstimateRecord> {
    let pts: Vec<(f64, &[f64])> =
        xs.iter().zip(cols).filter(|(x, _)| **x > 0).map(|(x, c)| (*x as f64, c.as_slice())).collect();
    if pts.len() < 3 {
        return None;
    }
    let key = format!("fit_{name}");
    Some(match fit_exponent(&pts, 1000, ctx.seed) {
        Ok(f) => ctx.record(
            &key,
            json!({"model": "A*r^gamma", "window": [f.window.0, f.window.1], "ci": [f.ci.0, f.ci.1], "n_boot": f.n_boot, "dropped": f.dropped}),
            f.gamma,
            (f.ci.1 - f.ci.0) / (2.0 * 1.96),
            ctx.replicas,
        ),
        Err(e) => ctx.record_with_note(&key, json!({"model": "A*r^gamma"}), f64::NAN, f64::NAN, ctx.replicas, &e.to_string()),
    })
}

fn origin(d: usize) -> Vertex {
    Vertex::origin(d)
}

fn linf(region: &BoxSpec, site: u64, buf: &mut [i64]) -> u64 {
    region.coords_into(site, buf);
    Norm::LInf.length(buf)
}

/// Sites reached from the origin through edges inside `B(0, radius)`.
fn reach_in_box(map: &ClusterMap, d: usize, radius: u64) -> Result<Vec<u64>> {
    map.check_margin(radius)?;
    let o = map.region().index(&vec![0; d]);
    let sub = BoxSpec::centered(d, radius as u32)?;
    Ok(map.reach_within(o, &sub))
}

pub(crate) struct Pi1 {
    pub r_grid: Vec<u64>,
}

impl Observable for Pi1 {
    fn width(&self) -> usize {
        self.r_grid.len()
    }

    fn observe(&self, replica: u64, z: &Realization, row: &mut Vec<f64>) -> Result<()> {
        let map = z.map();
        let mut prev = true;
        for &r in &self.r_grid {
            let hit = map.one_arm(r)?;
            if hit && !prev {
                return Err(pathwise(replica, format!("one-arm event at r = {r} without the smaller radius")));
            }
            prev = hit;
            row.push(flag(hit));
        }
        Ok(())
    }

    fn summarize(&self, cols: &[Vec<f64>], ctx: &RecordContext) -> Vec<EstimateRecord> {
        let mut out = Vec::new();
        for (r, c) in self.r_grid.iter().zip(cols) {
            let (m, s) = mean_se(c);
            let r2 = (*r * *r) as f64;
            out.push(ctx.record("pi1", json!({"r": r}), m, s, c.len() as u64));
            out.push(ctx.record("pi1_r2", json!({"r": r}), m * r2, s * r2, c.len() as u64));
        }
        out.extend(fit_record(ctx, "pi1", &self.r_grid, &cols.iter().collect::<Vec<_>>()));
        out
    }
}

pub(crate) struct TwoPoint {
    pub xs: Vec<Vec<i64>>,
    pub d: usize,
}

impl Observable for TwoPoint {
    fn width(&self) -> usize {
        self.xs.len()
    }

    fn observe(&self, _replica: u64, z: &Realization, row: &mut Vec<f64>) -> Result<()> {
        let o = origin(self.d);
        for x in &self.xs {
            let x = Vertex(x.clone());
            z.map().check_margin(Norm::LInf.length(&x.0))?;
            row.push(flag(z.map().connected(&o, &x)?));
        }
        Ok(())
    }

    fn summarize(&self, cols: &[Vec<f64>], ctx: &RecordContext) -> Vec<EstimateRecord> {
        self.xs
            .iter()
            .zip(cols)
            .map(|(x, c)| {
                let (m, s) = mean_se(c);
                ctx.record("two_point", json!({"x": x}), m, s, c.len() as u64)
            })
            .collect()
    }
}

pub(crate) struct Local {
    pub r_grid: Vec<u64>,
    pub beta: f64,
    pub d: usize,
}

impl Observable for Local {
    fn width(&self) -> usize {
        self.r_grid.len()
    }

    fn observe(&self, replica: u64, z: &Realization, row: &mut Vec<f64>) -> Result<()> {
        let map = z.map();
        let region = map.region();
        let mut buf = vec![0i64; self.d];
        for &r in &self.r_grid {
            let big = (self.beta * r as f64).floor() as u64;
            let count = |radius: u64, buf: &mut [i64]| -> Result<u64> {
                Ok(reach_in_box(map, self.d, radius)?.into_iter().filter(|&s| linf(region, s, buf) <= 2 * r).count() as u64)
            };
            let s = count(big, &mut buf)?;
            let s_small = count(2 * r, &mut buf)?;
            if s < s_small {
                return Err(pathwise(replica, format!("restricted connectivity at r = {r} shrank when the box grew")));
            }
            if s > (4 * r + 1).pow(self.d as u32) {
                return Err(pathwise(replica, format!("S({r}) exceeds |B(0,{})|", 2 * r)));
            }
            row.push(s as f64);
        }
        Ok(())
    }

    fn summarize(&self, cols: &[Vec<f64>], ctx: &RecordContext) -> Vec<EstimateRecord> {
        let mut out = Vec::new();
        for (r, c) in self.r_grid.iter().zip(cols) {
            let (m, s) = mean_se(c);
            let r2 = (*r * *r) as f64;
            let p = json!({"r": r, "beta": self.beta});
            out.push(ctx.record("local_connectivity", p.clone(), m, s, c.len() as u64));
            out.push(ctx.record("local_connectivity_r2", p, m / r2, s / r2, c.len() as u64));
        }
        out.extend(fit_record(ctx, "local_connectivity", &self.r_grid, &cols.iter().collect::<Vec<_>>()));
        out
    }
}

pub(crate) struct Chemical {
    pub s: ChemicalSection,
    pub d: usize,
}

impl Observable for Chemical {
    fn width(&self) -> usize {
        2 * self.s.x_list.len() + 2 * self.s.shells.len() + self.s.r_grid.len() * (2 + self.s.m_grid.len())
    }

    fn observe(&self, replica: u64, z: &Realization, row: &mut Vec<f64>) -> Result<()> {
        let map = z.map();
        let region = map.region();
        let o = origin(self.d);
        let dist = map.distances_from(&o, u64::MAX)?;
        let mut buf = vec![0i64; self.d];
        for x in &self.s.x_list {
            let lx = Norm::LInf.length(x);
            map.check_margin(lx)?;
            match dist.get(&region.index(x)) {
                Some(&dx) => {
                    if dx < lx {
                        return Err(pathwise(replica, format!("chemical distance {dx} below the ℓ∞ distance of {x:?}")));
                    }
                    row.extend([dx as f64, 1.0]);
                }
                None => row.extend([0.0, 0.0]),
            }
        }
        for &rr in &self.s.shells {
            map.check_margin(rr)?;
            let (mut num, mut den) = (0u64, 0u64);
            for (&site, &dx) in &dist {
                if linf(region, site, &mut buf) == rr {
                    if dx < rr {
                        return Err(pathwise(replica, format!("chemical distance {dx} below shell radius {rr}")));
                    }
                    num += dx;
                    den += 1;
                }
            }
            row.extend([num as f64, den as f64]);
        }
        for &r in &self.s.r_grid {
            map.check_margin(r)?;
            let inner = (self.s.kappa * r as f64).ceil() as u64;
            let (mut to_r, mut to_inner) = (u64::MAX, u64::MAX);
            for (&site, &dx) in &dist {
                let l = linf(region, site, &mut buf);
                if l >= r {
                    to_r = to_r.min(dx);
                }
                if l >= inner {
                    to_inner = to_inner.min(dx);
                }
            }
            let hit = to_r != u64::MAX;
            row.push(flag(hit));
            row.push(if hit { to_inner as f64 } else { 0.0 });
            for &m in &self.s.m_grid {
                row.push(flag(hit && to_r as f64 >= m * (r * r) as f64));
            }
        }
        Ok(())
    }

    fn summarize(&self, cols: &[Vec<f64>], ctx: &RecordContext) -> Vec<EstimateRecord> {
        let mut out = Vec::new();
        let mut c = 0;
        for x in &self.s.x_list {
            let (num, den) = (&cols[c], &cols[c + 1]);
            c += 2;
            let (m, s) = ratio_se(num, den);
            let k = events(den);
            let x2 = x.iter().map(|v| (v * v) as f64).sum::<f64>();
            let note = events_note(k);
            out.push(ctx.record_with_note("chemical_point", json!({"x": x}), m, s, k, &note));
            out.push(ctx.record_with_note("chemical_point_over_x2", json!({"x": x}), m / x2, s / x2, k, &note));
        }
        for &rr in &self.s.shells {
            let (num, den) = (&cols[c], &cols[c + 1]);
            c += 2;
            let (m, s) = ratio_se(num, den);
            let k = events(den);
            let pairs: f64 = den.iter().sum();
            let note = events_note(k);
            let r2 = (rr * rr) as f64;
            let p = json!({"shell": rr, "pairs": pairs});
            out.push(ctx.record_with_note("chemical_shell", p.clone(), m, s, k, &note));
            out.push(ctx.record_with_note("chemical_shell_over_r2", p, m / r2, s / r2, k, &note));
        }
        for &r in &self.s.r_grid {
            let (hit, to_inner) = (&cols[c], &cols[c + 1]);
            c += 2;
            let k = events(hit);
            let note = events_note(k);
            let (m, s) = ratio_se(to_inner, hit);
            let r2 = (r * r) as f64;
            let p = json!({"r": r, "kappa": self.s.kappa});
            out.push(ctx.record_with_note("chemical_boundary", p.clone(), m, s, k, &note));
            out.push(ctx.record_with_note("chemical_boundary_over_r2", p, m / r2, s / r2, k, &note));
            for &mm in &self.s.m_grid {
                let (m, s) = ratio_se(&cols[c], hit);
                c += 1;
                out.push(ctx.record_with_note("chemical_boundary_tail", json!({"r": r, "M": mm}), m, s, k, &note));
            }
        }
        out
    }
}

pub(crate) struct Intrinsic {
    pub r_grid: Vec<u64>,
    pub d: usize,
}

impl Observable for Intrinsic {
    fn width(&self) -> usize {
        2 * self.r_grid.len()
    }

    fn observe(&self, replica: u64, z: &Realization, row: &mut Vec<f64>) -> Result<()> {
        let map = z.map();
        let region = map.region();
        let rmax = *self.r_grid.last().expect("validated nonempty");
        let dist = map.distances_from(&origin(self.d), rmax)?;
        let labeled = !dist.is_empty();
        let mut deepest = 0;
        // smallest depth at which the ball touches the region boundary
        let mut touch = u64::MAX;
        let mut buf = vec![0i64; self.d];
        for (&site, &dx) in &dist {
            deepest = deepest.max(dx);
            if linf(region, site, &mut buf) >= region.radius() as u64 {
                touch = touch.min(dx);
            }
        }
        let mut prev = true;
        let mut cols = Vec::with_capacity(2 * self.r_grid.len());
        for &r in &self.r_grid {
            let hit = labeled && deepest >= r;
            if hit && !prev {
                return Err(pathwise(replica, format!("intrinsic sphere at r = {r} nonempty after an empty one")));
            }
            prev = hit;
            cols.push(flag(hit));
        }
        for &r in &self.r_grid {
            cols.push(flag(touch <= r || map.truncated()));
        }
        row.extend(cols);
        Ok(())
    }

    fn summarize(&self, cols: &[Vec<f64>], ctx: &RecordContext) -> Vec<EstimateRecord> {
        let n = self.r_grid.len();
        let mut out = Vec::new();
        for (i, r) in self.r_grid.iter().enumerate() {
            let (m, s) = mean_se(&cols[i]);
            let touched = events(&cols[n + i]);
            let note = if touched > 0 {
                format!("bias warning: ball reached the region boundary on {touched} replicas")
            } else {
                String::new()
            };
            let rf = *r as f64;
            let len = cols[i].len() as u64;
            out.push(ctx.record_with_note("intrinsic_arm", json!({"r": r}), m, s, len, &note));
            out.push(ctx.record_with_note("intrinsic_arm_r", json!({"r": r}), m * rf, s * rf, len, &note));
        }
        out.extend(fit_record(ctx, "intrinsic_arm", &self.r_grid, &cols[..n].iter().collect::<Vec<_>>()));
        out
    }
}

/// Connectivity counts with all loops and with loops of length at most
/// `⌊r^b⌋`, on the same sample.
pub(crate) struct Werner {
    pub r: u64,
    pub beta: f64,
    pub b_grid: Vec<f64>,
    pub d: usize,
    pub k_max: usize,
}

impl Werner {
    pub fn new(w: &WernerSection, d: usize, k_max: usize) -> Self {
        Self { r: w.r, beta: w.beta, b_grid: w.b_grid.clone(), d, k_max }
    }

    pub fn cutoff(&self, b: f64) -> usize {
        ((self.r as f64).powf(b) + 1e-9).floor() as usize
    }

    /// `η(b)` as stated and as implied by the gap bound's proof.
    pub fn etas(&self, b: f64) -> (f64, f64) {
        let a = b * (self.d as f64 / 2.0 - 2.0);
        (2.0 - a, a - 2.0)
    }

    pub fn observe_werner(&self, replica: u64, z: &Realization, row: &mut Vec<f64>) -> Result<()> {
        let big = (self.beta * self.r as f64).floor() as u64;
        let region = z.map().region().clone();
        let mut buf = vec![0i64; self.d];
        let mut within = |sites: Vec<u64>| -> FxHashSet<u64> {
            sites.into_iter().filter(|&s| s != OUTSIDE && linf(&region, s, &mut buf) <= self.r).collect()
        };
        let full = within(reach_in_box(z.map(), self.d, big)?);
        row.push(full.len() as f64);
        let mut prev_gap = usize::MAX;
        for &b in &self.b_grid {
            let cut = self.cutoff(b);
            let f = z.filtered(cut)?;
            let part = within(reach_in_box(&f, self.d, big)?);
            if !part.is_subset(&full) {
                return Err(pathwise(replica, format!("filtered cluster at cutoff {cut} is not inside the full cluster")));
            }
            let gap = full.len() - part.len();
            if gap > prev_gap {
                return Err(pathwise(replica, format!("deletion gap grew from {prev_gap} to {gap} at b = {b}")));
            }
            if cut >= self.k_max && gap != 0 {
                return Err(pathwise(replica, format!("cutoff {cut} ≥ K_max but gap {gap} ≠ 0")));
            }
            prev_gap = gap;
            row.extend([part.len() as f64, gap as f64]);
        }
        Ok(())
    }

    pub fn summarize_werner(&self, cols: &[Vec<f64>], ctx: &RecordContext) -> Vec<EstimateRecord> {
        let mut out = Vec::new();
        let r2 = (self.r * self.r) as f64;
        let n = cols[0].len() as u64;
        let base = json!({"r": self.r, "beta": self.beta});
        let (m, s) = mean_se(&cols[0]);
        out.push(ctx.record("werner_full", base.clone(), m, s, n));
        out.push(ctx.record("werner_full_r2", base, m / r2, s / r2, n));
        for (i, &b) in self.b_grid.iter().enumerate() {
            let cut = self.cutoff(b);
            let (eta_stated, eta_proof) = self.etas(b);
            let p = json!({"r": self.r, "beta": self.beta, "b": b, "cutoff": cut});
            let (fm, fs) = mean_se(&cols[1 + 2 * i]);
            let (gm, gs) = mean_se(&cols[2 + 2 * i]);
            out.push(ctx.record("werner_filtered", p.clone(), fm, fs, n));
            out.push(ctx.record("werner_filtered_r2", p.clone(), fm / r2, fs / r2, n));
            out.push(ctx.record("werner_gap", p.clone(), gm, gs, n));
            out.push(ctx.record("werner_gap_r2", p.clone(), gm / r2, gs / r2, n));
            let rf = self.r as f64;
            for (name, eta) in [("werner_gap_eta_stated", eta_stated), ("werner_gap_eta_proof", eta_proof)] {
                let scale = rf.powf(2.0 - eta);
                let mut q = p.clone();
                q["eta"] = json!(eta);
                out.push(ctx.record(name, q, gm / scale, gs / scale, n));
            }
        }
        out
    }
}

fn only(cfg: &Config) -> Config {
    let mut c = cfg.clone();
    c.pi1 = None;
    c.two_point = None;
    c.local = None;
    c.chemical = None;
    c.intrinsic = None;
    c.werner = None;
    c
}

/// `P(0 ↔ ∂B(0,r))` for each `r`.
pub fn estimate_pi1(cfg: &Config, r_grid: &[u64], threads: usize) -> Result<Vec<EstimateRecord>> {
    let mut c = only(cfg);
    c.pi1 = Some(Pi1Section { r_grid: r_grid.to_vec() });
    Ok(run_estimates(&c, threads)?.records)
}

/// `P(0 ↔ x)` for each `x`.
pub fn estimate_two_point(cfg: &Config, x_list: &[Vec<i64>], threads: usize) -> Result<Vec<EstimateRecord>> {
    let mut c = only(cfg);
    c.two_point = Some(TwoPointSection { x_list: x_list.to_vec() });
    Ok(run_estimates(&c, threads)?.records)
}

/// `S(r) = |{y ∈ B(0,2r) : 0 ↔ y inside B(0,βr)}|`.
pub fn estimate_local_connectivity(cfg: &Config, r_grid: &[u64], beta: f64, threads: usize) -> Result<Vec<EstimateRecord>> {
    let mut c = only(cfg);
    c.local = Some(LocalSection { r_grid: r_grid.to_vec(), beta });
    Ok(run_estimates(&c, threads)?.records)
}

/// Conditional chemical distances, point-to-point, over shells and to
/// boxes.
pub fn estimate_chemical(cfg: &Config, section: &ChemicalSection, threads: usize) -> Result<Vec<EstimateRecord>> {
    let mut c = only(cfg);
    c.chemical = Some(section.clone());
    Ok(run_estimates(&c, threads)?.records)
}

/// `P(∂B_int(0,r) ≠ ∅)` for each `r`.
pub fn estimate_intrinsic_one_arm(cfg: &Config, r_grid: &[u64], threads: usize) -> Result<Vec<EstimateRecord>> {
    let mut c = only(cfg);
    c.intrinsic = Some(IntrinsicSection { r_grid: r_grid.to_vec() });
    Ok(run_estimates(&c, threads)?.records)
}

/// Deletion gap for each `b` in `b_grid`.
pub fn werner_gap(cfg: &Config, r: u64, beta: f64, b_grid: &[f64], threads: usize) -> Result<Vec<EstimateRecord>> {
    let mut c = only(cfg);
    c.werner = Some(WernerSection { r, beta, b_grid: b_grid.to_vec() });
    Ok(run_werner(&c, threads)?.records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Engine, Route};
    use crate::loops::LoopMode;

    fn find<'a>(recs: &'a [EstimateRecord], name: &str, key: &str, v: f64) -> &'a EstimateRecord {
        recs.iter().find(|r| r.name == name && r.param(key) == Some(v)).unwrap_or_else(|| panic!("{name} {key}={v}"))
    }

    #[test]
    fn origin_labeled_half_the_time_for_gff() {
        let cfg = Config::new(3, Route::Gff, 6, 4000, 3);
        let recs = estimate_pi1(&cfg, &[0, 1, 2, 3], 2).unwrap();
        let r0 = find(&recs, "pi1", "r", 0.0);
        assert!((r0.estimate - 0.5).abs() < 3.0 * r0.stderr, "{r0:?}");
        let r1 = find(&recs, "pi1", "r", 1.0);
        assert!(r1.estimate <= r0.estimate);
        assert!(recs.iter().any(|r| r.name == "fit_pi1"));
    }

    #[test]
    fn margin_is_enforced() {
        let cfg = Config::new(3, Route::Gff, 4, 10, 3);
        assert!(matches!(estimate_pi1(&cfg, &[3], 1), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn chemical_bounds_and_werner_identities() {
        let mut cfg = Config::new(3, Route::Loops, 6, 300, 5);
        cfg.loops.k_max = 8;
        cfg.loops.signed = false;
        let sec = ChemicalSection { x_list: vec![vec![1, 0, 0]], shells: vec![1, 2], r_grid: vec![2], kappa: 0.5, m_grid: vec![0.25] };
        let recs = estimate_chemical(&cfg, &sec, 2).unwrap();
        let p = recs.iter().find(|r| r.name == "chemical_point").unwrap();
        assert!(p.estimate >= 1.0);
        assert!(find(&recs, "chemical_shell", "shell", 2.0).estimate >= 2.0);
        let w = werner_gap(&cfg, 2, 1.5, &[1.0, 2.0, 3.0], 2).unwrap();
        // 2^3 = 8 = K_max: the filter keeps every loop
        assert_eq!(find(&w, "werner_gap", "b", 3.0).estimate, 0.0);
        let g1 = find(&w, "werner_gap", "b", 1.0).estimate;
        let g2 = find(&w, "werner_gap", "b", 2.0).estimate;
        assert!(g1 >= g2);
        let mut gff = cfg.clone();
        gff.run.route = Route::Gff;
        assert!(werner_gap(&gff, 2, 1.5, &[1.0], 1).is_err());
    }

    #[test]
    fn explorer_route_runs_every_observable() {
        let mut cfg = Config::new(4, Route::Loops, 4, 200, 8);
        cfg.loops.engine = Engine::Explorer;
        cfg.loops.mode = LoopMode::Free;
        cfg.loops.k_max = 8;
        cfg.pi1 = Some(Pi1Section { r_grid: vec![1, 2, 3, 4] });
        cfg.local = Some(LocalSection { r_grid: vec![1, 2], beta: 2.0 });
        cfg.intrinsic = Some(IntrinsicSection { r_grid: vec![1, 2, 4] });
        cfg.chemical = Some(ChemicalSection { x_list: vec![], shells: vec![2], r_grid: vec![3], kappa: 0.5, m_grid: vec![] });
        let out = run_estimates(&cfg, 2).unwrap();
        for name in ["pi1_r2", "local_connectivity_r2", "intrinsic_arm_r", "chemical_shell_over_r2", "chemical_boundary"] {
            assert!(out.records.iter().any(|r| r.name == name), "{name}");
        }
    }
}
