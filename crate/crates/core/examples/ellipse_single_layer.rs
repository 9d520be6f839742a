//! Single layer operator on simple curves: Fourier symbols on a circle,
//! logarithmic capacities of a circle, an ellipse and a conformal image.
//!
//! cargo run --example ellipse_single_layer

use conformal_cavity::curves::parameter;
use conformal_cavity::singlelayer::{assemble_single_layer, equilibrium};
use conformal_cavity::{ellipse, from_laurent, BoundaryGrid, LaurentMap, ParamCurve, C64};
use nalgebra::DVector;

fn main() -> conformal_cavity::Result<()> {
    let (rho, n) = (0.4, 256);
    let circle = ParamCurve::from_fn(n, |t| C64::from_polar(rho, t), |t| C64::i() * C64::from_polar(rho, t))?;
    let s = assemble_single_layer(&BoundaryGrid::new(circle))?;

    println!("circle of radius {rho}, N = {n}");
    println!("{:>4} {:>22} {:>12}", "k", "measured symbol", "error");
    for k in [1, 2, 4, 8, 16, 32, 64] {
        let density = DVector::from_fn(n, |j, _| (k as f64 * parameter(j, n)).cos());
        let image = s.apply(&density);
        let symbol = image.dot(&density) / density.norm_squared();
        println!("{k:>4} {symbol:>22.16} {:>12.2e}", (symbol - rho / (2.0 * k as f64)).abs());
    }
    println!("capacity {:.12} (exact {rho})", equilibrium(&s)?.capacity);

    let e = ellipse(0.19, 0.11, n)?;
    let cap = equilibrium(&assemble_single_layer(&BoundaryGrid::new(e))?)?.capacity;
    println!("ellipse 0.19 x 0.11: capacity {cap:.12} (exact {})", (0.19 + 0.11) / 2.0);

    let map = LaurentMap::benchmark_cavity().scaled(0.25);
    let curve = from_laurent(&map, n)?;
    let cap = equilibrium(&assemble_single_layer(&BoundaryGrid::new(curve))?)?.capacity;
    println!("benchmark cavity scaled by 1/4: capacity {cap:.12} (exact |a1| = {})", map.a1().norm());
    Ok(())
}
