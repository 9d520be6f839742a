//! Ground truth that never touches the boundary element solver: tensor
//! entries of a known conformal map by contour integration, and the Laurent
//! coefficients of its inverse by Newton sampling plus a discrete Fourier
//! transform.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rustfft::FftPlanner;

use crate::curves::{power_coeffs, LaurentMap, C64};
use crate::error::{Error, Result};
use crate::gpst::{GpstBoundary, GpstMatrix, MomentSequences};

/// Newton stopping tolerance (relative to `max(1, |w|)`).
pub const NEWTON_TOL: f64 = 1e-13;
pub const NEWTON_MAX_ITER: usize = 50;

/// `μ^{m,m'}` and `ν^{m,m'}` for `1 ≤ m, m' ≤ M`, stored at `(m−1, m'−1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleMoments {
    pub order: usize,
    pub mu: DMatrix<C64>,
    pub nu: DMatrix<C64>,
}

impl OracleMoments {
    pub fn mu(&self, m: usize, m_prime: usize) -> C64 {
        self.mu[(m - 1, m_prime - 1)]
    }

    pub fn nu(&self, m: usize, m_prime: usize) -> C64 {
        self.nu[(m - 1, m_prime - 1)]
    }

    /// `μ_m = μ^{m,1}`, `ν_m = ν^{m,1}`.
    pub fn sequences(&self) -> MomentSequences {
        MomentSequences {
            mu: (1..=self.order).map(|m| self.mu(m, 1)).collect(),
            nu: (1..=self.order).map(|m| self.nu(m, 1)).collect(),
        }
    }

    /// The full cavity tensor in the `Q^m, conj Q^m` basis.
    pub fn gpst(&self) -> GpstMatrix {
        let m = self.order;
        let entries = DMatrix::from_fn(2 * m, 2 * m, |i, j| {
            let (ci, ii) = (i >= m, i % m);
            let (cj, jj) = (j >= m, j % m);
            let v = match (ci, cj) {
                (false, false) => self.nu[(ii, jj)],
                (false, true) => self.mu[(ii, jj)],
                (true, false) => self.mu[(ii, jj)].conj(),
                (true, true) => self.nu[(ii, jj)].conj(),
            };
            2.0 * v
        });
        GpstMatrix::new(m, entries, GpstBoundary::Oracle)
    }
}

/// Evaluates
/// `μ^{m,m'} = ∫ conj(e^{it}(φ₊^{m'})'(e^{it})) φ^m(e^{it}) dt` and
/// `ν^{m,m'} = ∫ e^{it}(φ₊^{m'})'(e^{it}) φ^m(e^{it}) dt`
/// with the trapezoidal rule. The integrands are trigonometric polynomials
/// and the node count exceeds their degree, so the rule is exact.
pub fn moments_from_map(map: &LaurentMap, order: usize) -> OracleMoments {
    let degree = order * (map.order() + 1) + order;
    let mut n = (4 * (order + 1)).max(2 * degree + 2);
    n += n % 2;
    let zs: Vec<C64> = (0..n).map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64)).collect();
    let phi: Vec<C64> = zs.iter().map(|&z| map.eval(z)).collect();

    // z (φ₊^{m'})'(z) = Σ_{k≥1} k a_k^{m'} z^k at the nodes
    let plus_derivs: Vec<Vec<C64>> = (1..=order)
        .map(|mp| {
            let p = power_coeffs(map, mp);
            zs.iter()
                .map(|&z| (1..=mp as i64).map(|k| p.coeff(k) * k as f64 * z.powi(k as i32)).sum())
                .collect()
        })
        .collect();

    let h = 2.0 * PI / n as f64;
    let mut mu = DMatrix::zeros(order, order);
    let mut nu = DMatrix::zeros(order, order);
    let mut phi_m: Vec<C64> = vec![C64::new(1.0, 0.0); n];
    for m in 0..order {
        for (pm, p) in phi_m.iter_mut().zip(&phi) {
            *pm *= p;
        }
        for mp in 0..order {
            let d = &plus_derivs[mp];
            mu[(m, mp)] = h * d.iter().zip(&phi_m).map(|(a, b)| a.conj() * b).sum::<C64>();
            nu[(m, mp)] = h * d.iter().zip(&phi_m).map(|(a, b)| a * b).sum::<C64>();
        }
    }
    OracleMoments { order, mu, nu }
}

fn newton_preimage(map: &LaurentMap, z: C64) -> Result<C64> {
    let mut w = z / map.a1();
    for _ in 0..NEWTON_MAX_ITER {
        let step = (map.eval(w) - z) / map.derivative(w);
        w -= step;
        if step.norm() <= NEWTON_TOL * w.norm().max(1.0) {
            return Ok(w);
        }
    }
    Err(Error::OracleFailure(format!("Newton did not converge for z = {z}")))
}

/// Laurent coefficients of `φ^{-1}` up to `order`, from samples of `φ^{-1}`
/// on the circle `|z| = 3(Σ|a_k|)`.
pub fn laurent_inversion_oracle(map: &LaurentMap, order: usize) -> Result<LaurentMap> {
    let radius = 3.0 * map.coefficients().iter().map(|c| c.norm()).sum::<f64>();
    let n = (2 * (order + 2)).next_power_of_two().max(128);
    let mut samples = (0..n)
        .map(|j| newton_preimage(map, C64::from_polar(radius, 2.0 * PI * j as f64 / n as f64)))
        .collect::<Result<Vec<C64>>>()?;
    FftPlanner::new().plan_fft_forward(n).process(&mut samples);
    let coeff = |k: i64| {
        let idx = k.rem_euclid(n as i64) as usize;
        samples[idx] / n as f64 / radius.powi(k as i32)
    };
    LaurentMap::new(coeff(1), coeff(0), (1..=order as i64).map(|m| coeff(-m)).collect())
}
