// Glued-loop chains along a lattice path: the greedy loop sequence, a
// minimal subsequence, a simple chain between the endpoints and exact
// simple/ordinary geodesics on a small fragment. Ends with the invariant
// suite over many random instances.
//
//     cargo run --release --example glued_chains

use cable_lab::chains::{
    chain_trace, is_minimal, loop_sequence_of_path, minimal_sequence, random_instance, simple_geodesic_exact,
    simplify_chain, GeodesicLimits,
};
use cable_lab::experiments::chain_suite::run_chain_suite;

pub fn run_example(quick: bool) -> Result<(), Box<dyn std::error::Error>> {
    let inst = (0..).find_map(|i| random_instance(5, i, 8).transpose()).expect("instances exist")?;
    let (objs, path) = (&inst.objects, &inst.path);
    let verts: Vec<String> = path.vertices().iter().map(|v| v.to_string()).collect();
    println!("{} glued objects; path {}", objs.len(), verts.join(" "));

    let chain = loop_sequence_of_path(path, objs)?;
    print!("sequence {:?}\n{}", chain.sequence, chain_trace(path, &chain, objs)?);
    let minimal = minimal_sequence(path, &chain, objs)?;
    println!("minimal {:?} (minimal: {})", minimal.sequence, is_minimal(path, &minimal, objs));
    let simple = simplify_chain(&chain, std::slice::from_ref(path.start()), std::slice::from_ref(path.end()), objs)?;
    println!("simple chain {:?}", simple.sequence);

    let fragment = objs.restrict(&minimal.set());
    let g = simple_geodesic_exact(&fragment, path.start(), path.end(), GeodesicLimits::default())?;
    println!("on the minimal fragment: geodesic {:?}, simple geodesic {:?}, path length {}", g.ordinary, g.simple, path.len());

    let rep = run_chain_suite(5, if quick { 100 } else { 1000 }, 8, GeodesicLimits::default(), 1)?;
    println!(
        "\nsuite over {} instances: simple {}/{}, minimal {}/{}, size bound {}/{}, geodesic order {}/{}",
        rep.instances,
        rep.simple_chain.passed,
        rep.simple_chain.total,
        rep.minimality.passed,
        rep.minimality.total,
        rep.size_bound.passed,
        rep.size_bound.total,
        rep.geodesic_order.passed,
        rep.geodesic_order.total
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example(false)
}
