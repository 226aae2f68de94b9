//! Monte Carlo estimators over replicas of either route, with standard
//! errors, pathwise monotonicity checks, exponent fits and truncation
//! sweeps.
//!
//! Each replica is realized once and every configured observable reads the
//! same configuration, so comparisons across parameters are coupled.
//! Replicas run on a rayon pool and are collected in replica order, so
//! results do not depend on the thread count.

pub mod chain_suite;
pub mod diagnostics;
pub mod fit;
mod observables;

use std::path::Path;

use rayon::prelude::*;
use serde_json::json;

use crate::cluster::ClusterMap;
use crate::config::{Config, Engine, LoopsSection, Route};
use crate::error::{Error, Result};
use crate::gff::{open_edges, positive_clusters, DgffSampler, SampleMethod};
use crate::lattice::{BoxSpec, Vertex};
use crate::loops::explorer::{Exploration, Explorer};
use crate::loops::truncation::{truncation_sweep, TruncationReport};
use crate::loops::{cable_gluing, delete_large_loops, lift_local_times, LoopOptions, LoopSample, LoopSampler};

pub use observables::{
    estimate_chemical, estimate_intrinsic_one_arm, estimate_local_connectivity, estimate_pi1, estimate_two_point,
    werner_gap,
};

/// One row of the output CSV.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EstimateRecord {
    pub name: String,
    pub d: usize,
    pub route: String,
    pub param_json: String,
    pub estimate: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
    pub truncation_note: String,
}

impl EstimateRecord {
    pub fn params(&self) -> serde_json::Value {
        serde_json::from_str(&self.param_json).unwrap_or(serde_json::Value::Null)
    }

    /// Numeric parameter `key`, if present.
    pub fn param(&self, key: &str) -> Option<f64> {
        self.params().get(key).and_then(|v| v.as_f64())
    }
}

pub fn write_csv(path: &Path, records: &[EstimateRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<EstimateRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Mean and standard error `s/√n`.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Ratio `Σnum / Σden` with a delta-method standard error.
pub fn ratio_se(num: &[f64], den: &[f64]) -> (f64, f64) {
    let n = num.len() as f64;
    let sd: f64 = den.iter().sum();
    if sd == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let r = num.iter().sum::<f64>() / sd;
    if num.len() < 2 {
        return (r, 0.0);
    }
    let md = sd / n;
    let ss: f64 = num.iter().zip(den).map(|(a, b)| (a - r * b).powi(2)).sum();
    (r, (ss / (n * (n - 1.0))).sqrt() / md)
}

/// Fewer conditioning events than this are flagged.
pub const MIN_EVENTS: u64 = 30;

/// Thread count: explicit budget, then the `THREADS` environment variable,
/// then the machine's parallelism.
pub fn thread_budget(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var("THREADS").ok().and_then(|s| s.parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `f` on replicas `0..n` and returns results in replica order.
pub fn replicate<T: Send>(n: u64, threads: usize, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::param("threads", e.to_string()))?;
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

/// A realized configuration of one replica.
pub enum Realization {
    Gff(ClusterMap),
    Dense { sample: Box<LoopSample>, map: ClusterMap, opts: LoopOptions, seed: u64 },
    Explored(Box<Exploration>),
}

impl Realization {
    pub fn map(&self) -> &ClusterMap {
        match self {
            Realization::Gff(m) => m,
            Realization::Dense { map, .. } => map,
            Realization::Explored(e) => e.cluster(),
        }
    }

    /// Clusters after deleting loops longer than `cutoff`, from the same
    /// draws.
    pub fn filtered(&self, cutoff: usize) -> Result<ClusterMap> {
        match self {
            Realization::Gff(_) => Err(Error::param("run.route", "loop filtering needs the loop route")),
            Realization::Dense { sample, opts, seed, .. } => {
                Ok(cable_gluing(&delete_large_loops(sample, cutoff), *seed, opts)?.map)
            }
            Realization::Explored(e) => Ok(e.filtered(cutoff)),
        }
    }

    pub fn truncated(&self) -> bool {
        self.map().truncated()
    }
}

enum Kind {
    Gff(DgffSampler),
    Dense(LoopSampler, LoopOptions),
    Explorer(Explorer),
}

/// Produces the configuration of any replica for one route.
pub struct Realizer {
    route: Route,
    seed: u64,
    kind: Kind,
}

impl Realizer {
    pub fn new(cfg: &Config, route: Route) -> Result<Self> {
        Self::with_loops(cfg, route, &cfg.loops)
    }

    pub fn with_loops(cfg: &Config, route: Route, loops: &LoopsSection) -> Result<Self> {
        let bx = BoxSpec::centered(cfg.run.d, cfg.run.box_radius)?;
        let kind = match route {
            Route::Gff => Kind::Gff(DgffSampler::new(&bx, &cfg.gff)?),
            Route::Loops => match loops.engine {
                Engine::Dense => {
                    let opts = loops.loop_options();
                    Kind::Dense(LoopSampler::new(&bx, &opts)?, opts)
                }
                Engine::Explorer => Kind::Explorer(Explorer::new(&bx, &loops.explorer_options()?)?),
            },
            Route::Both => return Err(Error::param("route", "a realizer serves a single route")),
        };
        Ok(Self { route, seed: cfg.run.seed, kind })
    }

    pub fn route(&self) -> Route {
        self.route
    }

    pub fn realize(&self, replica: u64) -> Result<Realization> {
        Ok(match &self.kind {
            Kind::Gff(s) => Realization::Gff(positive_clusters(&open_edges(&s.sample(self.seed, replica), self.seed))),
            Kind::Dense(s, opts) => {
                let sample = lift_local_times(s.sample(self.seed, replica), self.seed, &opts.point_law)?;
                let map = cable_gluing(&sample, self.seed, opts)?.map;
                Realization::Dense { sample: Box::new(sample), map, opts: opts.clone(), seed: self.seed }
            }
            Kind::Explorer(e) => Realization::Explored(Box::new(e.explore(self.seed, replica))),
        })
    }

    /// How the configuration is produced, for the notes column.
    pub fn describe(&self) -> String {
        match &self.kind {
            Kind::Gff(s) => match s.method() {
                SampleMethod::Exact => "exact DGFF".into(),
                SampleMethod::HeatBath { sweeps } => format!("heat-bath DGFF, {sweeps} sweeps"),
            },
            Kind::Dense(_, o) => format!("dense loops K_max={}", o.k_max),
            Kind::Explorer(e) => format!("explorer K_max={}", e.options().k_max),
        }
    }
}

/// Context shared by the records of one route.
#[derive(Clone, Debug)]
pub struct RecordContext {
    pub d: usize,
    pub route: Route,
    pub seed: u64,
    pub note: String,
    pub replicas: u64,
    /// Replicas on which the explorer hit its budget.
    pub truncated: u64,
}

impl RecordContext {
    pub(crate) fn record(&self, name: &str, params: serde_json::Value, estimate: f64, stderr: f64, n: u64) -> EstimateRecord {
        self.record_with_note(name, params, estimate, stderr, n, "")
    }

    pub(crate) fn record_with_note(
        &self,
        name: &str,
        params: serde_json::Value,
        estimate: f64,
        stderr: f64,
        n: u64,
        extra: &str,
    ) -> EstimateRecord {
        let mut note = self.note.clone();
        if self.truncated > 0 {
            note.push_str(&format!("; explorer budget hit on {} replicas", self.truncated));
        }
        if !extra.is_empty() {
            note.push_str("; ");
            note.push_str(extra);
        }
        EstimateRecord {
            name: name.into(),
            d: self.d,
            route: self.route.name().into(),
            param_json: params.to_string(),
            estimate,
            stderr,
            n,
            seed: self.seed,
            truncation_note: note,
        }
    }
}

/// A truncation sweep run for one route.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SweepOutcome {
    pub route: String,
    pub observable: String,
    pub k_grid: Vec<usize>,
    pub report: TruncationReport,
    pub certified: bool,
}

#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub records: Vec<EstimateRecord>,
    pub sweeps: Vec<SweepOutcome>,
}

/// Runs the truncation sweep of `cfg.loops.k_grid` with `P(0 ↔ e₁)` as the
/// observable.
pub fn run_truncation_sweep(cfg: &Config, threads: usize) -> Result<Option<SweepOutcome>> {
    let Some(grid) = cfg.loops.k_grid.clone() else { return Ok(None) };
    let replicas = cfg.loops.sweep_replicas.unwrap_or(cfg.run.replicas);
    let d = cfg.run.d;
    let origin = Vertex::origin(d);
    let e1 = Vertex::unit(d, 0);
    let report = truncation_sweep(&grid, |k| {
        let mut section = cfg.loops.clone();
        section.k_max = k;
        let realizer = Realizer::with_loops(cfg, Route::Loops, &section)?;
        replicate(replicas, threads, |rep| {
            let z = realizer.realize(rep)?;
            Ok(if z.map().connected(&origin, &e1)? { 1.0 } else { 0.0 })
        })
    })?;
    let certified = report.accepted == Some(cfg.loops.k_max);
    Ok(Some(SweepOutcome { route: "loops".into(), observable: "two_point e1".into(), k_grid: grid, report, certified }))
}

fn sweep_records(ctx: &RecordContext, s: &SweepOutcome, replicas: u64) -> Vec<EstimateRecord> {
    s.report
        .rows
        .iter()
        .map(|row| {
            ctx.record(
                "truncation_sweep",
                json!({"k_max": row.k_max, "diff": row.diff, "diff_stderr": row.diff_stderr, "observable": s.observable}),
                row.estimate,
                row.stderr,
                replicas,
            )
        })
        .collect()
}

fn loops_note(cfg: &Config, sweep: Option<&SweepOutcome>) -> String {
    let k = cfg.loops.k_max;
    match sweep {
        None => format!("K_max={k} not certified (no truncation sweep)"),
        Some(s) if s.certified => format!("K_max={k} accepted by sweep over {:?}", s.k_grid),
        Some(s) => {
            let last = s.report.rows.last().expect("nonempty sweep");
            format!(
                "K_max={k} not certified: last sweep difference {:.3e} vs half s.e. {:.3e} over {:?}",
                last.diff.unwrap_or(f64::NAN),
                0.5 * last.stderr,
                s.k_grid
            )
        }
    }
}

/// Runs every configured observable except the loop-deletion gap.
pub fn run_estimates(cfg: &Config, threads: usize) -> Result<RunOutput> {
    cfg.validate()?;
    let obs = observables::build(cfg)?;
    if obs.is_empty() {
        return Err(Error::param("config", "no observable sections ([pi1], [two_point], [local], [chemical], [intrinsic])"));
    }
    let mut out = RunOutput::default();
    for route in cfg.run.route.expand() {
        let realizer = Realizer::new(cfg, route)?;
        let mut note = realizer.describe();
        let mut ctx = RecordContext { d: cfg.run.d, route, seed: cfg.run.seed, note: String::new(), replicas: cfg.run.replicas, truncated: 0 };
        if route == Route::Loops {
            let sweep = run_truncation_sweep(cfg, threads)?;
            note = format!("{note}; {}", loops_note(cfg, sweep.as_ref()));
            if let Some(s) = sweep {
                ctx.note = note.clone();
                out.records.extend(sweep_records(&ctx, &s, cfg.loops.sweep_replicas.unwrap_or(cfg.run.replicas)));
                out.sweeps.push(s);
            }
        }
        ctx.note = note;
        let rows = replicate(cfg.run.replicas, threads, |rep| {
            let z = realizer.realize(rep)?;
            let mut row = vec![if z.truncated() { 1.0 } else { 0.0 }];
            for o in &obs {
                o.observe(rep, &z, &mut row)?;
            }
            Ok(row)
        })?;
        ctx.truncated = rows.iter().filter(|r| r[0] > 0.0).count() as u64;
        let mut col = 1;
        for o in &obs {
            let w = o.width();
            let cols: Vec<Vec<f64>> = (col..col + w).map(|c| rows.iter().map(|r| r[c]).collect()).collect();
            out.records.extend(o.summarize(&cols, &ctx));
            col += w;
        }
    }
    Ok(out)
}

/// Runs the loop-deletion gap of `[werner]` on unsigned loop clusters.
pub fn run_werner(cfg: &Config, threads: usize) -> Result<RunOutput> {
    cfg.validate()?;
    if cfg.run.route != Route::Loops {
        return Err(Error::param("run.route", "the deletion gap needs loop identities; use route = \"loops\""));
    }
    let w = cfg.werner.as_ref().ok_or_else(|| Error::param("werner", "missing [werner] section"))?;
    let mut section = cfg.loops.clone();
    section.signed = false;
    let realizer = Realizer::with_loops(cfg, Route::Loops, &section)?;
    let mut out = RunOutput::default();
    let sweep = run_truncation_sweep(cfg, threads)?;
    let mut ctx = RecordContext {
        d: cfg.run.d,
        route: Route::Loops,
        seed: cfg.run.seed,
        note: format!("{}, unsigned; {}", realizer.describe(), loops_note(cfg, sweep.as_ref())),
        replicas: cfg.run.replicas,
        truncated: 0,
    };
    if let Some(s) = sweep {
        out.records.extend(sweep_records(&ctx, &s, cfg.loops.sweep_replicas.unwrap_or(cfg.run.replicas)));
        out.sweeps.push(s);
    }
    let obs = observables::Werner::new(w, cfg.run.d, cfg.loops.k_max);
    let rows = replicate(cfg.run.replicas, threads, |rep| {
        let z = realizer.realize(rep)?;
        let mut row = vec![if z.truncated() { 1.0 } else { 0.0 }];
        obs.observe_werner(rep, &z, &mut row)?;
        Ok(row)
    })?;
    ctx.truncated = rows.iter().filter(|r| r[0] > 0.0).count() as u64;
    let cols: Vec<Vec<f64>> = (1..rows[0].len()).map(|c| rows.iter().map(|r| r[c]).collect()).collect();
    out.records.extend(obs.summarize_werner(&cols, &ctx));
    Ok(out)
}
