// Samples the random-walk loop soup at intensity 1/2 in a box, compares
// per-length loop counts with their Poisson means, lifts loops to cable
// local times and glues them into clusters. Writes a loop dump.
//
//     cargo run --release --example loop_soup

use cable_lab::experiments::replicate;
use cable_lab::loops::dump::{read_loop_dump, write_loop_dump};
use cable_lab::loops::{cable_gluing, delete_large_loops, lift_local_times, LoopMode, LoopOptions, LoopSampler};
use cable_lab::BoxSpec;

pub fn run_example(quick: bool) -> Result<(), Box<dyn std::error::Error>> {
    let bx = BoxSpec::centered(3, 3)?;
    let opts = LoopOptions { k_max: 16, mode: LoopMode::BoxKilled, ..Default::default() };
    let sampler = LoopSampler::new(&bx, &opts)?;
    let expected = sampler.expected_counts()?;
    let n = if quick { 500 } else { 20_000 };
    let counts = replicate(n, 1, |r| Ok(sampler.sample(3, r).counts_by_length()))?;
    println!("{:>3} {:>10} {:>10}", "k", "mean", "Λ_k");
    for k in (2..=opts.k_max).step_by(2) {
        let mean = counts.iter().map(|c| c[k] as f64).sum::<f64>() / n as f64;
        println!("{k:>3} {mean:>10.4} {:>10.4}", expected[k]);
    }

    let sample = lift_local_times(sampler.sample(3, 0), 3, &opts.point_law)?;
    let glued = cable_gluing(&sample, 3, &opts)?;
    println!(
        "\nreplica 0: {} loops, {} labeled sites, {} clusters",
        sample.loops.len(),
        glued.map.num_labeled(),
        glued.map.labels().len()
    );
    let short = delete_large_loops(&sample, 4);
    println!("keeping loops of length ≤ 4 leaves {} loops", short.loops.len());

    let path = std::env::temp_dir().join("cable-lab-loops.txt");
    write_loop_dump(&path, &sample)?;
    let (header, loops) = read_loop_dump(&path)?;
    println!("dump: d = {}, K_max = {}, {} loops in {}", header.d, header.k_max, loops.len(), path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example(false)
}
