// Samples the discrete GFF in a box with zero boundary and compares the
// empirical covariance with the box-killed Green's function. Also writes a
// field snapshot and the cable edge list of one sample.
//
//     cargo run --release --example dgff_covariance

use cable_lab::experiments::replicate;
use cable_lab::gff::{open_edges, positive_clusters, DgffSampler, Field, GffOptions};
use cable_lab::walk_oracle::GreensTable;
use cable_lab::{BoxSpec, Vertex};

pub fn run_example(quick: bool) -> Result<(), Box<dyn std::error::Error>> {
    let bx = BoxSpec::centered(2, 3)?;
    let sampler = DgffSampler::new(&bx, &GffOptions::default())?;
    let table = GreensTable::box_killed(&bx)?;
    let n = if quick { 2_000 } else { 50_000 };
    let fields = replicate(n, 1, |r| Ok(sampler.sample(1, r).phi))?;

    let o = bx.index(&[0, 0]);
    println!("{:>8} {:>10} {:>10} {:>8}", "y", "empirical", "G(0,y)", "z");
    for y in [[0, 0], [1, 0], [1, 1], [2, 0], [3, 3]] {
        let iy = bx.index(&y);
        let prod: Vec<f64> = fields.iter().map(|f| f[o as usize] * f[iy as usize]).collect();
        let m = prod.iter().sum::<f64>() / n as f64;
        let v = prod.iter().map(|p| (p - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        let g = table.get(o, iy);
        println!("{:>8} {m:>10.4} {g:>10.4} {:>8.2}", format!("{y:?}"), (m - g) / (v / n as f64).sqrt());
    }

    let dir = std::env::temp_dir().join("cable-lab-dgff");
    std::fs::create_dir_all(&dir)?;
    let field = sampler.sample(1, 0);
    field.write_snapshot(&dir.join("field.bin"))?;
    let back = Field::read_snapshot(&dir.join("field.bin"))?;
    assert_eq!(back.phi, field.phi);
    let cable = open_edges(&field, 1);
    cable.write_edge_list(&dir.join("edges.txt"))?;
    let map = positive_clusters(&cable);
    println!(
        "\nsample 0: {} open edges, origin labeled: {}, files in {}",
        cable.open_edges().len(),
        map.is_labeled(&Vertex::origin(2))?,
        dir.display()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example(false)
}
