//! A non-convex outer boundary (image of the unit circle under
//! z + 0.3 z⁻²) with an off-center cavity, swept over a few centers r.
//! This geometry is our own; it is not taken from a published table.
//!
//! cargo run --release --example nonconvex_outer

use conformal_cavity::pipeline::{reconstruct_exact, run_forward};
use conformal_cavity::{from_laurent, CoefficientVariant, LaurentMap, C64};

fn main() -> conformal_cavity::Result<()> {
    let c = |re, im| C64::new(re, im);
    let outer_map = LaurentMap::new(c(1.0, 0.0), c(0.0, 0.0), vec![c(0.0, 0.0), c(0.3, 0.0)])?;
    let outer = from_laurent(&outer_map, 256)?;
    let truth = LaurentMap::new(c(0.2, 0.0), c(0.25, 0.1), vec![c(0.03, 0.0), c(0.0, -0.015)])?;
    let cavity = from_laurent(&truth, 256)?;

    // curvature changes sign along the outer boundary
    let bends = (0..256)
        .map(|j| {
            let (a, b, d) = (outer.nodes()[j], outer.nodes()[(j + 1) % 256], outer.nodes()[(j + 2) % 256]);
            ((b - a).conj() * (d - b)).im.signum()
        })
        .collect::<Vec<_>>();
    println!("outer boundary has {} concave nodes", bends.iter().filter(|s| **s < 0.0).count());

    for r in [c(0.0, 0.0), c(0.25, 0.1), c(0.5, 0.0)] {
        let data = run_forward(&outer, Some(&cavity), 10, r)?;
        let res = reconstruct_exact(&data, CoefficientVariant::Corrected)?.with_truth(&truth);
        let errs: Vec<String> = (-2..=1)
            .rev()
            .map(|k| format!("{:.2e}", res.relative_error(k).unwrap_or(f64::NAN)))
            .collect();
        println!("r = {r}: relative errors a1, a0, a-1, a-2 = {}", errs.join(", "));
    }
    Ok(())
}
