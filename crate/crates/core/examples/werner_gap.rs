// Loss of local connectivity when loops longer than r^b are removed from
// the soup, on one coupled sample per replica. Reported against r² and
// against both exponent conventions for the gap.
//
//     cargo run --release --example werner_gap

use cable_lab::experiments::{thread_budget, werner_gap};
use cable_lab::config::{Config, Engine, Route};
use cable_lab::loops::LoopMode;

pub fn run_example(quick: bool) -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = Config::new(7, Route::Loops, 6, if quick { 300 } else { 10_000 }, 13);
    cfg.loops.engine = Engine::Explorer;
    cfg.loops.mode = LoopMode::Free;
    cfg.loops.k_max = 32;
    let recs = werner_gap(&cfg, 3, 2.0, &[1.0, 4.0 / 3.0, 2.0, 3.0], thread_budget(None))?;
    for r in recs.iter().filter(|r| r.name != "werner_gap_eta_stated" && r.name != "werner_gap_eta_proof") {
        println!("{:<20} {:<48} {:.4} ± {:.4}", r.name, r.param_json, r.estimate, r.stderr);
    }
    for r in recs.iter().filter(|r| r.name.starts_with("werner_gap_eta")) {
        let p = r.params();
        println!("{:<22} b = {:.3}  η = {:+.3}  gap/r^(2-η) = {:.4}", r.name, p["b"], p["eta"], r.estimate);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example(false)
}
