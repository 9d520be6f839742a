//! Moments of a known map by contour integration, then back to the map with
//! the explicit formulae. No boundary element solve is involved.
//!
//! cargo run --example oracle_roundtrip

use conformal_cavity::{invert_moments, moments_from_map, CoefficientVariant, LaurentMap};

fn main() -> conformal_cavity::Result<()> {
    let map = LaurentMap::benchmark_cavity();
    let moments = moments_from_map(&map, map.order()).sequences();
    let back = invert_moments(&moments, CoefficientVariant::Corrected)?.map;

    println!("{:>3} {:>28} {:>28} {:>10}", "k", "a_k", "recovered", "|error|");
    let mut worst: f64 = 0.0;
    for k in (-(map.order() as i64)..=1).rev() {
        let err = (back.coeff(k) - map.coeff(k)).norm();
        worst = worst.max(err);
        println!("{k:>3} {:>28.6} {:>28.6} {err:>10.2e}", map.coeff(k), back.coeff(k));
    }
    println!("largest error {worst:.2e}");
    Ok(())
}
