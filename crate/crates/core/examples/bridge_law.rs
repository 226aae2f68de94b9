// The probability that a cable edge with endpoint values a, b > 0 lies in
// the positive level set: a Brownian bridge of length d with variance rate 2
// stays positive with probability 1 - exp(-ab/d). Monte Carlo on a fine grid
// with Richardson extrapolation against the closed form.
//
//     cargo run --release --example bridge_law

use cable_lab::gff::{bridge_min_oracle, edge_open_prob};

pub fn run_example(quick: bool) -> Result<(), Box<dyn std::error::Error>> {
    let d = 7;
    let reps = if quick { 4_000 } else { 100_000 };
    println!("{:>5} {:>5} {:>9} {:>9} {:>8} {:>7}", "a", "b", "exact", "MC", "s.e.", "z");
    for a in [0.3, 1.0, 2.0] {
        for b in [0.5, 1.5] {
            let exact = edge_open_prob(a, b, d);
            let est = bridge_min_oracle(a, b, d as f64, 2.0, 1000, reps, 17)?;
            println!(
                "{a:>5} {b:>5} {exact:>9.5} {:>9.5} {:>8.5} {:>7.2}",
                est.estimate,
                est.stderr,
                (est.estimate - exact) / est.stderr
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example(false)
}
