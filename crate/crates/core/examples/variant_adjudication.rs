//! The two coefficient conventions on φ(z) = 0.5 z + 0.1 z⁻²: only the one
//! with multinomial multiplicities returns a₋₂ = 0.1, in agreement with the
//! inverse map sampled by Newton iteration.
//!
//! cargo run --example variant_adjudication

use std::f64::consts::PI;

use conformal_cavity::{invert_moments, laurent_inversion_oracle, moments_from_map};
use conformal_cavity::{CoefficientVariant, LaurentMap, C64};

fn main() -> conformal_cavity::Result<()> {
    let zero = C64::new(0.0, 0.0);
    let map = LaurentMap::new(C64::new(0.5, 0.0), zero, vec![zero, C64::new(0.1, 0.0)])?;
    let moments = moments_from_map(&map, 2).sequences();

    for variant in [CoefficientVariant::Corrected, CoefficientVariant::Literal] {
        let a = invert_moments(&moments, variant)?.map.coeff(-2);
        println!("{variant:>9}: a_-2 = {:.12}", a.re);
    }

    // b₋₂ = −ν₂ / (4π a₁) ties the second moment to the inverse map
    let inverse = laurent_inversion_oracle(&map, 4)?;
    let predicted = -moments.nu[1] / (4.0 * PI * map.a1());
    println!("sampled inverse b_-2 = {:.12}", inverse.coeff(-2).re);
    println!("from ν_2           = {:.12}", predicted.re);
    Ok(())
}
