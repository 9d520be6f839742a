//! Ellipse 1.9 × 1.1 containing the nine-coefficient cavity, exact data,
//! M = 12, shifted polynomials centered at r = −0.5 and r = 0.
//! Writes `benchmark_overlay.svg` into the current directory.
//!
//! cargo run --release --example benchmark_reconstruction

use std::path::Path;

use conformal_cavity::cli::output::{write_svg, Polyline, Stamp};
use conformal_cavity::pipeline::{reconstruct_exact, run_forward};
use conformal_cavity::{ellipse, from_laurent, CoefficientVariant, LaurentMap, C64};

fn main() -> conformal_cavity::Result<()> {
    let outer = ellipse(1.9, 1.1, 256)?;
    let truth = LaurentMap::benchmark_cavity();
    let cavity = from_laurent(&truth, 256)?;

    let mut last = None;
    for r in [-0.5, 0.0] {
        let data = run_forward(&outer, Some(&cavity), 12, C64::new(r, 0.0))?;
        let res = reconstruct_exact(&data, CoefficientVariant::Corrected)?.with_truth(&truth);
        println!("r = {r}, scale s = {:.6}", data.scale);
        for k in (-7..=1).rev() {
            let err = res.relative_error(k).map_or("-".into(), |e| format!("{:.3}%", 100.0 * e));
            println!("  a_{k:<3} {:>26.8}  rel. error {err}", res.map.coeff(k));
        }
        last = Some((res, data.scale));
    }

    let (res, scale) = last.expect("two runs");
    let sample = |m: &LaurentMap| -> Vec<C64> {
        (0..400).map(|j| m.eval(C64::from_polar(1.0, j as f64 * std::f64::consts::TAU / 400.0))).collect()
    };
    let (t, rec, ell) = (sample(&truth), sample(&res.map), outer.nodes().to_vec());
    let lines = [
        Polyline { points: &ell, color: "black", width: 1.0 },
        Polyline { points: &t, color: "gray", width: 3.0 },
        Polyline { points: &rec, color: "red", width: 1.0 },
    ];
    let stamp = Stamp { config_hash: "example".into(), scale };
    write_svg(Path::new("benchmark_overlay.svg"), &stamp, &lines, Some(res.center))?;
    println!("wrote benchmark_overlay.svg");
    Ok(())
}
