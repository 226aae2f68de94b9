// Critical one-arm probabilities on Z^7 from the lazy loop explorer, which
// only reveals loops through the origin's cluster, with a log-log fit and
// the intrinsic one-arm alongside.
//
//     cargo run --release --example one_arm_exponent

use cable_lab::config::{Config, Engine, IntrinsicSection, Pi1Section, Route};
use cable_lab::experiments::{run_estimates, thread_budget};
use cable_lab::loops::LoopMode;

pub fn run_example(quick: bool) -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = Config::new(7, Route::Loops, 6, if quick { 500 } else { 20_000 }, 11);
    cfg.loops.engine = Engine::Explorer;
    cfg.loops.mode = LoopMode::Free;
    cfg.loops.k_max = 32;
    cfg.pi1 = Some(Pi1Section { r_grid: vec![1, 2, 3, 4, 5, 6] });
    cfg.intrinsic = Some(IntrinsicSection { r_grid: vec![2, 4, 8, 16] });
    let out = run_estimates(&cfg, thread_budget(None))?;
    for r in &out.records {
        match r.name.as_str() {
            "pi1" | "pi1_r2" | "intrinsic_arm" | "intrinsic_arm_r" => {
                println!("{:<16} {:<10} {:.5} ± {:.5}", r.name, r.param_json, r.estimate, r.stderr)
            }
            "fit_pi1" | "fit_intrinsic_arm" => println!("{:<16} exponent {:.3}  {}", r.name, r.estimate, r.param_json),
            _ => {}
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example(false)
}
