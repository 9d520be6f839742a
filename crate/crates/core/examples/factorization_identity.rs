//! The measurement operator factors as (I − K)⁻¹K with K the product of the
//! two interaction operators between the boundaries; K is a contraction.
//!
//! cargo run --release --example factorization_identity

use std::time::Instant;

use conformal_cavity::pipeline::{run_forward, InteractionOperators};
use conformal_cavity::{ellipse, from_laurent, LaurentMap, C64};

fn main() -> conformal_cavity::Result<()> {
    let start = Instant::now();
    let outer = ellipse(1.9, 1.1, 256)?;
    let cavity = from_laurent(&LaurentMap::benchmark_cavity(), 256)?;
    let ops = InteractionOperators::new(&outer, &cavity)?;
    let data = run_forward(&outer, Some(&cavity), 8, C64::new(-0.5, 0.0))?;

    println!("spectral radius of K      {:.6}", ops.spectral_radius());
    println!("factorization defect      {:.3e}", ops.factorization_defect(&data)?);
    println!("interaction symmetry      {:.3e}", ops.symmetry_defect());
    println!("elapsed                   {:.2?}", start.elapsed());
    Ok(())
}
