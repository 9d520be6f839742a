//! Multiplicative noise on the measurement matrix, 20 seeds per level, and
//! the number of coefficients that survive the across-seed stability test.
//!
//! cargo run --release --example noise_study

use conformal_cavity::pipeline::{noise_study, run_forward};
use conformal_cavity::{ellipse, from_laurent, CoefficientVariant, LaurentMap, C64};

fn main() -> conformal_cavity::Result<()> {
    let outer = ellipse(1.9, 1.1, 256)?;
    let truth = LaurentMap::benchmark_cavity();
    let data = run_forward(&outer, Some(&from_laurent(&truth, 256)?), 12, C64::new(-0.5, 0.0))?;
    let seeds: Vec<u64> = (0..20).collect();

    println!("{:>6} {:>9} {:>10} {:>10} {:>10}", "delta", "retained", "med a1", "med a0", "med a-1");
    for delta in [0.05, 0.15, 0.25, 0.35] {
        let study = noise_study(&data, delta, &seeds, CoefficientVariant::Corrected, Some(&truth))?;
        let med = |k| study.median_relative_error(k).map_or(f64::NAN, |e| 100.0 * e);
        println!(
            "{:>5.0}% {:>9} {:>9.2}% {:>9.2}% {:>9.2}%",
            100.0 * delta,
            study.retained_order,
            med(1),
            med(0),
            med(-1)
        );
    }
    Ok(())
}
