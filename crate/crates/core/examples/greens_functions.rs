// Free and box-killed Green's functions. The free one decays like
// |x|^(2-d); killing at the box boundary lowers it everywhere.
//
//     cargo run --release --example greens_functions

use cable_lab::walk_oracle::{free_green, greens_function, GreenMode};
use cable_lab::{BoxSpec, Vertex};

pub fn run_example(quick: bool) -> Result<(), Box<dyn std::error::Error>> {
    let dims: &[usize] = if quick { &[3, 5] } else { &[3, 4, 5, 6, 7] };
    for &d in dims {
        let g0 = free_green(&vec![0; d])?;
        print!("d = {d}: G(0) = {g0:.6}");
        for t in [1i64, 2, 4, 8] {
            let x = Vertex::along_axis(d, 0, t).0;
            let g = free_green(&x)?;
            print!("  G({t}e1)·{t}^{} = {:.4}", d - 2, g * (t as f64).powi(d as i32 - 2));
        }
        println!();
    }

    let bx = BoxSpec::centered(3, if quick { 3 } else { 6 })?;
    let killed = GreenMode::BoxKilled(bx.clone());
    let free = GreenMode::Free { d: 3 };
    let o = Vertex::origin(3);
    println!("\nradius {} box in d = 3", bx.radius());
    for t in 0..=bx.radius() as i64 {
        let x = Vertex::along_axis(3, 0, t);
        println!(
            "  x = {t}e1: killed {:.5}  free {:.5}",
            greens_function(&killed, &o, &x)?,
            greens_function(&free, &o, &x)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example(false)
}
