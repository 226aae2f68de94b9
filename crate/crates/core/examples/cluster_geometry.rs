// Geometry of one positive cluster: labels, chemical distances, intrinsic
// balls and the one-arm event, on a GFF sample.
//
//     cargo run --release --example cluster_geometry

use cable_lab::gff::{open_edges, positive_clusters, DgffSampler, GffOptions};
use cable_lab::{BoxSpec, Vertex};

pub fn run_example(quick: bool) -> Result<(), Box<dyn std::error::Error>> {
    let d = 3;
    let bx = BoxSpec::centered(d, if quick { 6 } else { 12 })?;
    let sampler = DgffSampler::new(&bx, &GffOptions::default())?;
    // first replica whose origin lies in a positive cluster
    let (rep, map) = (0..)
        .map(|r| (r, positive_clusters(&open_edges(&sampler.sample(9, r), 9))))
        .find(|(_, m)| m.is_labeled(&Vertex::origin(d)).unwrap_or(false))
        .expect("the origin is positive half the time");
    let o = Vertex::origin(d);
    let reach = map.origin_reach()?.unwrap_or(0);
    println!("replica {rep}: {} labeled sites, origin cluster reaches ℓ∞ radius {reach}", map.num_labeled());
    for r in 1..=bx.radius() as u64 / 2 {
        print!("one-arm({r}) = {}  ", map.one_arm(r)?);
    }
    println!();

    let ball = map.intrinsic_ball(&o, 4)?;
    println!("intrinsic ball of radius 4: {} vertices, {} on its sphere", ball.members.len(), ball.sphere.len());
    for v in ball.sphere.iter().take(5) {
        println!("  {v}: chemical {:?}, ℓ∞ {}", map.chemical_distance(&o, v, 100)?, cable_lab::Norm::LInf.length(&v.0));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example(false)
}
