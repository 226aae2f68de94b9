//! Command-line front end: `oracle`, `sample`, `estimate`, `werner`,
//! `chains` and `report`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::{ChainsSection, Config, Route, SampleSection};
use crate::error::{Error, Result};
use crate::experiments::chain_suite::{run_chain_suite, ChainSuiteReport};
use crate::experiments::diagnostics::evaluate;
use crate::experiments::{read_csv, run_estimates, run_werner, thread_budget, write_csv, RunOutput, SweepOutcome};
use crate::gff::{open_edges, positive_clusters, DgffSampler};
use crate::lattice::{BoxSpec, Vertex};
use crate::loops::dump::write_loop_dump;
use crate::loops::{cable_gluing, lift_local_times, LoopSampler};
use crate::rng::RNG_CONTRACT_VERSION;
use crate::walk_oracle::cache::cached_return_probs;
use crate::walk_oracle::{
    closed_walk_count, loop_count_scaling_check, loop_mass_by_length, quadrature, BoxKernel, FreeKernel, KernelTable,
    RETURN_PROB_TOL,
};

#[derive(Debug, Parser)]
#[command(name = "cable-lab", version, about = "Cable-graph percolation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file (TOML)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides run.seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; THREADS in the environment is used when absent
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Overrides run.route
    #[arg(long, global = true)]
    pub route: Option<Route>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kernel self-checks against independent computations
    Oracle {
        #[arg(long, default_value_t = 16)]
        kmax: usize,
        #[arg(long, default_value_t = 7)]
        max_d: usize,
    },
    /// Writes field snapshots, edge lists, loop dumps and cluster labels
    Sample,
    /// Runs the configured observables into estimates.csv
    Estimate,
    /// Runs the loop-deletion gap into werner.csv
    Werner,
    /// Runs the chain invariant suite
    Chains,
    /// Summarizes existing CSVs into report.md
    Report,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub rng_contract_version: u32,
    pub seed: Option<u64>,
    pub threads: usize,
    pub config: Option<Config>,
    pub outputs: Vec<String>,
    pub status: String,
    pub wall_clock_secs: Option<f64>,
    pub sweeps: Vec<SweepOutcome>,
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::StrictCheck(_) | Error::Pathwise { .. } => 3,
        Error::MemoryBudget { .. } => 4,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
        _ => 2,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load_config(cli: &Cli, required: bool) -> Result<Option<Config>> {
    let Some(path) = &cli.config else {
        return if required { Err(Error::param("--config", "this command needs a configuration file")) } else { Ok(None) };
    };
    let mut cfg = Config::load(path)?;
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    if let Some(r) = cli.route {
        cfg.run.route = r;
    }
    if cli.threads.is_some() {
        cfg.run.threads = cli.threads;
    }
    cfg.validate()?;
    Ok(Some(cfg))
}

struct Manifest {
    path: PathBuf,
    body: RunManifest,
    start: Instant,
}

impl Manifest {
    /// Writes the manifest with status "running" before any output exists.
    fn begin(out: &Path, command: &str, cfg: Option<&Config>, threads: usize, outputs: Vec<String>) -> Result<Self> {
        fs::create_dir_all(out)?;
        let m = Manifest {
            path: out.join(format!("manifest-{command}.json")),
            body: RunManifest {
                command: command.into(),
                version: env!("CARGO_PKG_VERSION").into(),
                rng_contract_version: RNG_CONTRACT_VERSION,
                seed: cfg.map(|c| c.run.seed),
                threads,
                config: cfg.cloned(),
                outputs,
                status: "running".into(),
                wall_clock_secs: None,
                sweeps: Vec::new(),
            },
            start: Instant::now(),
        };
        m.write()?;
        Ok(m)
    }

    fn write(&self) -> Result<()> {
        fs::write(&self.path, serde_json::to_string_pretty(&self.body)?)?;
        Ok(())
    }

    fn finish(mut self, status: &str, sweeps: Vec<SweepOutcome>) -> Result<()> {
        self.body.status = status.into();
        self.body.sweeps = sweeps;
        self.body.wall_clock_secs = Some(self.start.elapsed().as_secs_f64());
        self.write()
    }
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Oracle { kmax, max_d } => cmd_oracle(cli, *kmax, *max_d),
        Command::Sample => cmd_sample(cli),
        Command::Estimate => cmd_run(cli, "estimate", "estimates.csv", run_estimates),
        Command::Werner => cmd_run(cli, "werner", "werner.csv", run_werner),
        Command::Chains => cmd_chains(cli),
        Command::Report => cmd_report(cli),
    }
}

fn cmd_run(cli: &Cli, name: &str, file: &str, f: fn(&Config, usize) -> Result<RunOutput>) -> Result<()> {
    let cfg = load_config(cli, true)?.expect("required");
    let threads = thread_budget(cfg.run.threads);
    let manifest = Manifest::begin(&cli.out, name, Some(&cfg), threads, vec![file.into()])?;
    let out = match f(&cfg, threads) {
        Ok(o) => o,
        Err(e) => {
            manifest.finish(&format!("failed: {e}"), Vec::new())?;
            return Err(e);
        }
    };
    let path = cli.out.join(file);
    write_csv(&path, &out.records)?;
    manifest.finish("ok", out.sweeps)?;
    println!("{} records written to {}", out.records.len(), path.display());
    Ok(())
}

#[derive(Serialize)]
struct OracleRow {
    d: usize,
    k: usize,
    convolution: f64,
    quadrature: f64,
    discrepancy: f64,
}

/// Kernel self-checks. Return probabilities come through the on-disk cache,
/// so a corrupted cache is caught here.
pub fn oracle_checks(cache: Option<&Path>, kmax: usize, max_d: usize) -> Result<String> {
    let mut text = String::new();
    let mut rows = Vec::new();
    writeln!(text, "# Kernel self-checks\n\n## Return probabilities, convolution vs quadrature\n").unwrap();
    writeln!(text, "| d | k ≤ | max discrepancy |\n|---|---|---|").unwrap();
    let mut worst = (0.0f64, 0, 0);
    for d in 1..=max_d {
        let dp = cached_return_probs(cache, d, kmax)?;
        let quad = quadrature::return_probs(d, kmax);
        let mut m = 0.0f64;
        for k in 0..=kmax {
            let disc = (dp[k] - quad[k]).abs();
            if disc.is_nan() || disc > worst.0 {
                worst = (disc, d, k);
            }
            m = m.max(disc);
            rows.push(OracleRow { d, k, convolution: dp[k], quadrature: quad[k], discrepancy: disc });
        }
        writeln!(text, "| {d} | {kmax} | {m:.3e} |").unwrap();
    }
    if !(worst.0 <= RETURN_PROB_TOL) {
        return Err(Error::StrictCheck(format!(
            "return_prob mismatch at d = {}, k = {}: discrepancy {:.3e} exceeds {RETURN_PROB_TOL:e}",
            worst.1, worst.2, worst.0
        )));
    }
    writeln!(text, "\nall agree to {RETURN_PROB_TOL:e}\n").unwrap();

    // p_k = (closed walks) / (2d)^k, and killed loop masses sit below free ones
    writeln!(text, "## Loop-mass identities\n").unwrap();
    for d in 1..=max_d.min(4) {
        let kk = kmax.min(12);
        let fk = FreeKernel::new(d, kk)?;
        let bx = BoxSpec::centered(d, 2)?;
        let region: Vec<Vertex> = (0..bx.len()).map(|i| bx.vertex(i)).collect();
        let free = KernelTable::Free(fk.clone());
        let killed = KernelTable::BoxKilled(BoxKernel::new(&bx, kk)?);
        for k in (2..=kk).step_by(2) {
            let count = closed_walk_count(d, k)? as f64 / (2.0 * d as f64).powi(k as i32);
            if (count - fk.return_prob(k)).abs() > 1e-14 {
                return Err(Error::StrictCheck(format!("return_prob mismatch against walk count at d = {d}, k = {k}")));
            }
            let (mf, mk) = (loop_mass_by_length(&free, &region, k)?, loop_mass_by_length(&killed, &region, k)?);
            if mk > mf * (1.0 + 1e-12) {
                return Err(Error::StrictCheck(format!("killed loop mass {mk} exceeds free mass {mf} at d = {d}, k = {k}")));
            }
        }
        writeln!(text, "- d = {d}: walk counts match, killed mass ≤ free mass for k ≤ {kk}").unwrap();
    }

    writeln!(text, "\n## Loop-count scaling, d = 7\n\n| L | Σ_(k≥L) α p_k | ratio to L^(1−d/2) |\n|---|---|---|").unwrap();
    let scaling = loop_count_scaling_check(7, &[8, 16, 32, 64, 128], 0)?;
    for w in scaling.windows(2) {
        if w[1].sum > w[0].sum {
            return Err(Error::StrictCheck(format!("loop-count tail grew from L = {} to L = {}", w[0].l, w[1].l)));
        }
    }
    for r in &scaling {
        writeln!(text, "| {} | {:.6e} | {:.4} |", r.l, r.sum, r.ratio).unwrap();
    }
    text.push_str("\n```json\n");
    text.push_str(&serde_json::to_string(&rows)?);
    text.push_str("\n```\n");
    Ok(text)
}

fn cmd_oracle(cli: &Cli, kmax: usize, max_d: usize) -> Result<()> {
    let cache = cli.out.join("kernel-cache");
    let manifest = Manifest::begin(&cli.out, "oracle", None, 1, vec!["oracle_report.md".into()])?;
    match oracle_checks(Some(&cache), kmax, max_d) {
        Ok(text) => {
            fs::write(cli.out.join("oracle_report.md"), text)?;
            manifest.finish("ok", Vec::new())?;
            println!("oracle: all strict checks passed");
            Ok(())
        }
        Err(e) => {
            manifest.finish(&format!("failed: {e}"), Vec::new())?;
            Err(e)
        }
    }
}

fn cmd_sample(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli, true)?.expect("required");
    let s = cfg.sample.clone().unwrap_or_else(SampleSection::default);
    let bx = BoxSpec::centered(cfg.run.d, cfg.run.box_radius)?;
    let seed = cfg.run.seed;
    let mut outputs = Vec::new();
    for route in cfg.run.route.expand() {
        for i in 0..s.count {
            match route {
                Route::Gff => outputs.extend([format!("field_{i}.bin"), format!("gff_edges_{i}.txt"), format!("gff_labels_{i}.csv")]),
                _ => outputs.extend([format!("loops_{i}.txt"), format!("loops_labels_{i}.csv")]),
            }
        }
    }
    let threads = thread_budget(cfg.run.threads);
    let manifest = Manifest::begin(&cli.out, "sample", Some(&cfg), threads, outputs)?;
    let labels = bx.len() <= s.max_label_sites;
    let out = &cli.out;
    for route in cfg.run.route.expand() {
        for i in 0..s.count {
            if route == Route::Gff {
                let field = DgffSampler::new(&bx, &cfg.gff)?.sample(seed, i);
                field.write_snapshot(&out.join(format!("field_{i}.bin")))?;
                let cable = open_edges(&field, seed);
                cable.write_edge_list(&out.join(format!("gff_edges_{i}.txt")))?;
                if labels {
                    positive_clusters(&cable).export_labels_csv(&out.join(format!("gff_labels_{i}.csv")), s.max_label_sites)?;
                }
            } else {
                let opts = cfg.loops.loop_options();
                let sample = LoopSampler::new(&bx, &opts)?.sample(seed, i);
                write_loop_dump(&out.join(format!("loops_{i}.txt")), &sample)?;
                if labels {
                    let glued = cable_gluing(&lift_local_times(sample, seed, &opts.point_law)?, seed, &opts)?;
                    glued.map.export_labels_csv(&out.join(format!("loops_labels_{i}.csv")), s.max_label_sites)?;
                }
            }
        }
    }
    let note = if labels { "ok" } else { "ok; labels skipped, box exceeds sample.max_label_sites" };
    manifest.finish(note, Vec::new())?;
    println!("samples written to {}", out.display());
    Ok(())
}

fn chain_report_text(r: &ChainSuiteReport) -> String {
    let mut s = format!("instances {} (with covered edges: {})\n", r.instances, r.used);
    for (name, c) in [
        ("simple_chain", &r.simple_chain),
        ("minimality", &r.minimality),
        ("size_bound", &r.size_bound),
        ("geodesic_order", &r.geodesic_order),
    ] {
        let _ = writeln!(s, "{name}: {}/{} {}", c.passed, c.total, if c.all_passed() { "PASS" } else { "FAIL" });
    }
    let _ = writeln!(s, "geodesic fragments over the size limits: {}", r.geodesic_skipped);
    for f in &r.failures {
        let _ = writeln!(s, "failure: {f}");
    }
    s
}

fn cmd_chains(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli, false)?;
    let sec: ChainsSection = cfg.as_ref().and_then(|c| c.chains.clone()).unwrap_or_default();
    let seed = cli.seed.or(cfg.as_ref().map(|c| c.run.seed)).unwrap_or(0);
    let threads = thread_budget(cli.threads.or(cfg.as_ref().and_then(|c| c.run.threads)));
    let manifest = Manifest::begin(&cli.out, "chains", cfg.as_ref(), threads, vec!["chains_report.json".into()])?;
    let rep = run_chain_suite(seed, sec.instances, sec.max_len, sec.limits, threads)?;
    fs::write(cli.out.join("chains_report.json"), serde_json::to_string_pretty(&rep)?)?;
    print!("{}", chain_report_text(&rep));
    if rep.all_passed() {
        manifest.finish("ok", Vec::new())
    } else {
        manifest.finish("failed", Vec::new())?;
        Err(Error::StrictCheck(format!("chain invariants failed on {} instances", rep.failures.len())))
    }
}

fn cmd_report(cli: &Cli) -> Result<()> {
    let mut recs = Vec::new();
    let mut sources = Vec::new();
    for f in ["estimates.csv", "werner.csv"] {
        let p = cli.out.join(f);
        if p.exists() {
            recs.extend(read_csv(&p)?);
            sources.push(f);
        }
    }
    if sources.is_empty() {
        return Err(Error::param("--out", format!("no estimates.csv or werner.csv in {}", cli.out.display())));
    }
    let mut text = format!("# Diagnostics\n\nSources: {}\n\n| # | check | result | detail |\n|---|---|---|---|\n", sources.join(", "));
    for d in evaluate(&recs) {
        let res = match d.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "n/a",
        };
        let _ = writeln!(text, "| {} | {} | {res} | {} |", d.criterion, d.name, d.detail);
    }
    let fits: Vec<_> = recs.iter().filter(|r| r.name.starts_with("fit_")).collect();
    if !fits.is_empty() {
        text.push_str("\n## Exponent fits\n\n| name | route | exponent | params |\n|---|---|---|---|\n");
        for r in fits {
            let _ = writeln!(text, "| {} | {} | {:.3} | {} |", r.name, r.route, r.estimate, r.param_json);
        }
    }
    let eta: Vec<_> = recs.iter().filter(|r| r.name.starts_with("werner_gap_eta")).collect();
    if !eta.is_empty() {
        text.push_str("\n## Deletion gap against both exponent conventions\n\n| convention | params | gap / r^(2−η) |\n|---|---|---|\n");
        for r in eta {
            let _ = writeln!(text, "| {} | {} | {:.4} ± {:.4} |", r.name.trim_start_matches("werner_gap_eta_"), r.param_json, r.estimate, r.stderr);
        }
    }
    fs::write(cli.out.join("report.md"), &text)?;
    print!("{text}");
    Ok(())
}
