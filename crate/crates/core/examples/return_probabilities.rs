// Return probabilities of the simple random walk by exact walk counting and
// by characteristic-function quadrature, and the loop-soup mass they imply.
//
//     cargo run --release --example return_probabilities

use cable_lab::walk_oracle::{loop_count_scaling_check, return_prob_both, ALPHA};

pub fn run_example(quick: bool) -> Result<(), Box<dyn std::error::Error>> {
    let kmax = if quick { 8 } else { 16 };
    println!("{:>2} {:>3} {:>22} {:>10}", "d", "k", "p_k(0,0)", "|dp-quad|");
    for d in [1, 3, 7] {
        for k in (2..=kmax).step_by(2) {
            let r = return_prob_both(d, k)?;
            println!("{d:>2} {k:>3} {:>22.15e} {:>10.1e}", r.dp, r.discrepancy());
        }
    }

    // mean number of length-k loops per site: α p_k(0,0) / k
    let d = 7;
    let per_site: f64 = (2..=kmax).map(|k| return_prob_both(d, k).map(|r| ALPHA * r.dp / k as f64)).sum::<Result<f64, _>>()?;
    println!("\nd = {d}: loops of length ≤ {kmax} per site {per_site:.6}");

    let ls: Vec<usize> = if quick { vec![8, 16, 32] } else { vec![8, 16, 32, 64, 128] };
    println!("\ntail Σ_(k≥L) α p_k(0,0) against L^(1-d/2), d = 7");
    for row in loop_count_scaling_check(7, &ls, 0)? {
        println!("L = {:>4}  sum {:.4e}  ratio {:.4}", row.l, row.sum, row.ratio);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example(false)
}
