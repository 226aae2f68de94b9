// P(0 ↔ e1) in the positive cable cluster, computed from the sign clusters
// of the GFF and from glued loop clusters, with a truncation sweep over the
// longest loop length.
//
//     cargo run --release --example route_agreement

use cable_lab::config::{Config, Route, TwoPointSection};
use cable_lab::experiments::run_estimates;

pub fn run_example(quick: bool) -> Result<(), Box<dyn std::error::Error>> {
    let replicas = if quick { 2_000 } else { 100_000 };
    let mut cfg = Config::new(3, Route::Both, 3, replicas, 4);
    cfg.loops.k_max = if quick { 32 } else { 128 };
    cfg.loops.k_grid = Some(if quick { vec![16, 32] } else { vec![32, 64, 128] });
    cfg.two_point = Some(TwoPointSection { x_list: vec![vec![1, 0, 0]] });
    let out = run_estimates(&cfg, cable_lab::experiments::thread_budget(None))?;
    for s in &out.sweeps {
        for row in &s.report.rows {
            println!("K_max = {:>3}: {:.5} ± {:.5}", row.k_max, row.estimate, row.stderr);
        }
        println!("certified: {}", s.certified);
    }
    let two: Vec<_> = out.records.iter().filter(|r| r.name == "two_point").collect();
    for r in &two {
        println!("{:>5}: {:.5} ± {:.5}  ({})", r.route, r.estimate, r.stderr, r.truncation_note);
    }
    let z = (two[0].estimate - two[1].estimate) / (two[0].stderr.powi(2) + two[1].stderr.powi(2)).sqrt();
    println!("difference in combined standard errors: {z:.2}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example(false)
}
