//! Relative error of the first coefficients as the center r of the shifted
//! polynomials moves along the real axis. With exact data the shifted
//! polynomials span the same space for every r and the recovered tensor
//! transforms covariantly, so the rows agree up to rounding; the center
//! only matters once the data are perturbed (see `noise_study`).
//!
//! cargo run --release --example center_sweep

use conformal_cavity::pipeline::{reconstruct_exact, run_forward};
use conformal_cavity::{ellipse, from_laurent, CoefficientVariant, LaurentMap, C64};

fn main() -> conformal_cavity::Result<()> {
    let outer = ellipse(1.9, 1.1, 256)?;
    let truth = LaurentMap::benchmark_cavity();
    let cavity = from_laurent(&truth, 256)?;
    let order = 8;

    print!("{:>6}", "r");
    for k in (-4..=1).rev() {
        print!(" {:>10}", format!("a_{k}"));
    }
    println!();
    for i in 0..=8 {
        let r = -1.5 + 0.25 * i as f64;
        let data = run_forward(&outer, Some(&cavity), order, C64::new(r, 0.0))?;
        let res = reconstruct_exact(&data, CoefficientVariant::Corrected)?.with_truth(&truth);
        print!("{r:>6.2}");
        for k in (-4..=1).rev() {
            print!(" {:>10.2e}", res.relative_error(k).unwrap_or(f64::NAN));
        }
        println!();
    }
    Ok(())
}
