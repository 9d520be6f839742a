//! Explicit inversion of the moment sequences into Laurent coefficients of
//! the exterior conformal map, plus the noise model and the truncation rule
//! used on noisy data.
//!
//! `a_{-m} = μ_1^{-m/2} Σ_{α ∈ A_m} C_α (μ_2/μ_1)^{α_0} ν_1^{α_1} ⋯ ν_m^{α_m}`
//! where `A_m` collects the `α ∈ ℕ^{m+1}` with
//! `α_0 + 2α_1 + … + (m+1)α_m = m + 1` and `α_0 ≠ m + 1`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curves::{LaurentMap, C64};
use crate::error::{Error, Result};
use crate::gpst::{extract_moments_with, recovered_gpst, GpstMatrix, MomentSequences, MU1_REAL_TOL};
use crate::singlelayer::MeasurementMatrix;

/// Largest order accepted by [`enumerate`].
pub const MAX_ORDER: usize = 16;

/// Across-seed relative dispersion above which a coefficient is discarded.
pub const STABILITY_THRESHOLD: f64 = 0.5;

/// The multi-indices `A_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiIndexSet {
    pub m: usize,
    /// Each entry has length `m + 1`; descending lexicographic order.
    pub indices: Vec<Vec<u32>>,
}

impl MultiIndexSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Enumerates `A_m`, i.e. the partitions of `m + 1` other than `1 + … + 1`
/// written as part multiplicities (`α_k` counts parts equal to `k + 1`).
pub fn enumerate(m: usize) -> Result<MultiIndexSet> {
    if !(1..=MAX_ORDER).contains(&m) {
        return Err(Error::OrderOutOfRange(m));
    }
    fn fill(k: usize, remaining: usize, alpha: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let m = alpha.len() - 1;
        if k > m {
            if remaining == 0 {
                out.push(alpha.clone());
            }
            return;
        }
        let part = k + 1;
        for count in (0..=remaining / part).rev() {
            alpha[k] = count as u32;
            fill(k + 1, remaining - count * part, alpha, out);
        }
        alpha[k] = 0;
    }
    let mut indices = Vec::new();
    fill(0, m + 1, &mut vec![0; m + 1], &mut indices);
    indices.retain(|a| a[0] as usize != m + 1);
    Ok(MultiIndexSet { m, indices })
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `C_α` exactly as it appears in the closed-form inversion formula.
pub fn coefficient_literal(alpha: &[u32], m: usize) -> f64 {
    debug_assert_eq!(alpha.len(), m + 1);
    let total: u32 = alpha.iter().sum();
    let tail: u32 = alpha[1..].iter().sum();
    let sign = if (total + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    let denom_k: f64 = alpha[1..]
        .iter()
        .enumerate()
        .map(|(k, &a)| ((k + 1) as f64).powi(a as i32))
        .product();
    sign / (2f64.powi(alpha[0] as i32) * m as f64) * (2.0 * PI).powf(m as f64 / 2.0 - tail as f64)
        / denom_k
}

/// Number of ordered tuples `(β_1, …, β_m)` that reorder to `α` (with
/// `θ = m − |α|` entries equal to `b_1`).
pub fn multiplicity(alpha: &[u32], m: usize) -> f64 {
    let total: u32 = alpha.iter().sum();
    let theta = m as u32 - total;
    factorial(m as u32) / (factorial(theta) * alpha.iter().map(|&a| factorial(a)).product::<f64>())
}

/// `C_α` times the multinomial multiplicity of the ordered-tuple sum.
pub fn coefficient_corrected(alpha: &[u32], m: usize) -> f64 {
    coefficient_literal(alpha, m) * multiplicity(alpha, m)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientVariant {
    Literal,
    #[default]
    Corrected,
}

impl CoefficientVariant {
    pub fn coefficient(self, alpha: &[u32], m: usize) -> f64 {
        match self {
            CoefficientVariant::Literal => coefficient_literal(alpha, m),
            CoefficientVariant::Corrected => coefficient_corrected(alpha, m),
        }
    }
}

impl fmt::Display for CoefficientVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientVariant::Literal => write!(f, "literal"),
            CoefficientVariant::Corrected => write!(f, "corrected"),
        }
    }
}

impl FromStr for CoefficientVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(CoefficientVariant::Literal),
            "corrected" => Ok(CoefficientVariant::Corrected),
            other => Err(Error::Config(format!(
                "unknown coefficient variant {other:?} (expected literal or corrected)"
            ))),
        }
    }
}

/// Recovered conformal map with the context it was computed in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub map: LaurentMap,
    /// Number of negative coefficients kept.
    pub order_used: usize,
    pub noise: f64,
    /// Center of the shifted polynomials, in physical coordinates.
    pub center: C64,
    pub scale: f64,
    pub variant: CoefficientVariant,
    pub seed: Option<u64>,
    /// `|â_k − a_k| / |a_k|` in the order `a_1, a_0, a_{-1}, …`; `None` where
    /// the true coefficient vanishes.
    pub relative_errors: Option<Vec<Option<f64>>>,
}

impl ReconstructionResult {
    /// Attaches relative errors against a known map.
    pub fn with_truth(mut self, truth: &LaurentMap) -> Self {
        self.relative_errors = Some(relative_errors(&self.map, truth));
        self
    }

    /// Relative error of `a_k`, if known and defined.
    pub fn relative_error(&self, k: i64) -> Option<f64> {
        let idx = (1 - k) as usize;
        self.relative_errors.as_ref()?.get(idx).copied().flatten()
    }

    /// Keeps `a_1, a_0, a_{-1}, …, a_{-order}`.
    pub fn truncated(&self, order: usize) -> Self {
        let mut out = self.clone();
        out.map = self.map.truncated(order);
        out.order_used = order.min(self.map.order());
        if let Some(errs) = out.relative_errors.as_mut() {
            errs.truncate(order + 2);
        }
        out
    }
}

/// Coefficient-wise relative errors of `map` against `truth`, in the order
/// `a_1, a_0, a_{-1}, …, a_{-M}` of `map`.
pub fn relative_errors(map: &LaurentMap, truth: &LaurentMap) -> Vec<Option<f64>> {
    (-(map.order() as i64)..=1)
        .rev()
        .map(|k| {
            let t = truth.coeff(k);
            (t.norm() > 0.0).then(|| (map.coeff(k) - t).norm() / t.norm())
        })
        .collect()
}

/// Applies the closed-form formulae to the moment sequences.
pub fn invert_moments(
    moments: &MomentSequences,
    variant: CoefficientVariant,
) -> Result<ReconstructionResult> {
    let moments = moments
        .clone()
        .validated()
        .map_err(|e| Error::InvalidMoments(e.to_string()))?;
    let mu1 = moments.mu[0].re;
    let ratio = moments.mu[1] / mu1;
    let a1 = (mu1 / (2.0 * PI)).sqrt();
    let a0 = ratio / 2.0;
    let order = moments.order();
    let mut negative = Vec::with_capacity(order);
    for m in 1..=order {
        let set = enumerate(m)?;
        let sum: C64 = set
            .indices
            .iter()
            .map(|alpha| {
                let mut term = ratio.powu(alpha[0]) * variant.coefficient(alpha, m);
                for (k, &a) in alpha[1..].iter().enumerate() {
                    if a > 0 {
                        term *= moments.nu[k].powu(a);
                    }
                }
                term
            })
            .sum();
        negative.push(sum * mu1.powf(-(m as f64) / 2.0));
    }
    Ok(ReconstructionResult {
        map: LaurentMap::new(C64::new(a1, 0.0), a0, negative)?,
        order_used: order,
        noise: 0.0,
        center: C64::new(0.0, 0.0),
        scale: 1.0,
        variant,
        seed: None,
        relative_errors: None,
    })
}

/// Multiplicative noise `R^N_{ij} = (1 + δ N_{ij}) R_{ij}` with `N_{ij}`
/// uniform on `[-1, 1]`, drawn in row-major order from a seeded ChaCha8
/// stream.
pub fn apply_noise(r: &MeasurementMatrix, delta: f64, seed: u64) -> Result<MeasurementMatrix> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise level must be >= 0, got {delta}")));
    }
    let mut out = r.clone();
    if delta == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (rows, cols) = out.entries.shape();
    for i in 0..rows {
        for j in 0..cols {
            let n: f64 = rng.random_range(-1.0..=1.0);
            out.entries[(i, j)] *= 1.0 + delta * n;
        }
    }
    Ok(out)
}

/// Undoes the shifted polynomials and the dilation: `a_0 ← a_0 + r`, then
/// every coefficient is divided by `s`. `r` is in the assembly frame.
pub fn shift_and_rescale(result: &ReconstructionResult, r: C64, s: f64) -> ReconstructionResult {
    assert!(s > 0.0, "scale must be positive");
    ReconstructionResult {
        map: result.map.translated(r).scaled(1.0 / s),
        center: r / s,
        scale: s,
        ..result.clone()
    }
}

/// Relative dispersion `sqrt(mean |v − v̄|²) / |v̄|` of a sample.
pub fn relative_dispersion(values: &[C64]) -> f64 {
    let n = values.len() as f64;
    let mean: C64 = values.iter().sum::<C64>() / n;
    let spread = (values.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / n).sqrt();
    if spread == 0.0 {
        0.0
    } else {
        spread / mean.norm()
    }
}

/// Largest `M'` such that `a_{-1}, …, a_{-M'}` all have across-seed relative
/// dispersion at most [`STABILITY_THRESHOLD`].
pub fn truncate_by_stability(results: &[ReconstructionResult]) -> Result<usize> {
    if results.len() < 2 {
        return Err(Error::InvalidArgument(
            "stability truncation needs at least two runs".into(),
        ));
    }
    let order = results.iter().map(|r| r.map.order()).min().unwrap_or(0);
    let mut kept = 0;
    for m in 1..=order {
        let values: Vec<C64> = results.iter().map(|r| r.map.coeff(-(m as i64))).collect();
        if relative_dispersion(&values) > STABILITY_THRESHOLD {
            break;
        }
        kept = m;
    }
    Ok(kept)
}

/// Recovered tensor → moments → coefficients → physical frame.
pub fn reconstruct_from_measurement(
    outer: &GpstMatrix,
    measurement: &MeasurementMatrix,
    variant: CoefficientVariant,
) -> Result<ReconstructionResult> {
    reconstruct_from_measurement_with(outer, measurement, variant, MU1_REAL_TOL)
}

/// [`reconstruct_from_measurement`] with a caller-chosen relative tolerance
/// on `Im μ_1`.
pub fn reconstruct_from_measurement_with(
    outer: &GpstMatrix,
    measurement: &MeasurementMatrix,
    variant: CoefficientVariant,
    mu1_imag_tol: f64,
) -> Result<ReconstructionResult> {
    let q = recovered_gpst(outer, measurement)?;
    let moments = extract_moments_with(&q, mu1_imag_tol)?;
    let raw = invert_moments(&moments, variant)?;
    Ok(shift_and_rescale(&raw, measurement.center, measurement.scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    #[test]
    fn small_index_sets() {
        assert_eq!(enumerate(1).unwrap().indices, vec![vec![0, 1]]);
        assert_eq!(enumerate(2).unwrap().indices, vec![vec![1, 1, 0], vec![0, 0, 1]]);
        let mut got = enumerate(3).unwrap().indices;
        got.sort();
        let mut want = vec![vec![2, 1, 0, 0], vec![0, 2, 0, 0], vec![1, 0, 1, 0], vec![0, 0, 0, 1]];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn order_bounds() {
        assert!(matches!(enumerate(0), Err(Error::OrderOutOfRange(0))));
        assert!(matches!(enumerate(17), Err(Error::OrderOutOfRange(17))));
        assert_eq!(enumerate(16).unwrap().len(), 296);
    }

    #[test]
    fn literal_coefficients() {
        assert_abs_diff_eq!(coefficient_literal(&[0, 1], 1), (2.0 * PI).powf(-0.5), epsilon = 1e-15);
        assert_abs_diff_eq!(coefficient_literal(&[0, 0, 1], 2), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(coefficient_literal(&[1, 1, 0], 2), -0.25, epsilon = 1e-15);
    }

    #[test]
    fn corrected_coefficients() {
        assert_abs_diff_eq!(coefficient_corrected(&[0, 1], 1), (2.0 * PI).powf(-0.5), epsilon = 1e-15);
        assert_abs_diff_eq!(coefficient_corrected(&[0, 0, 1], 2), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(coefficient_corrected(&[1, 1, 0], 2), -0.5, epsilon = 1e-15);
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("literal".parse::<CoefficientVariant>().unwrap(), CoefficientVariant::Literal);
        assert_eq!(CoefficientVariant::default(), CoefficientVariant::Corrected);
        assert!("exact".parse::<CoefficientVariant>().is_err());
    }

    #[test]
    fn disk_moments_invert_to_disk() {
        let (rho, c) = (0.3, C64::new(-0.2, 0.4));
        let order = 5;
        let mut mu = vec![C64::new(0.0, 0.0); order];
        mu[0] = C64::new(2.0 * PI * rho * rho, 0.0);
        mu[1] = 4.0 * PI * rho * rho * c;
        let m = MomentSequences { mu, nu: vec![C64::new(0.0, 0.0); order] };
        let r = invert_moments(&m, CoefficientVariant::Corrected).unwrap();
        assert_abs_diff_eq!(r.map.a1().re, rho, epsilon = 1e-15);
        assert_abs_diff_eq!((r.map.a0() - c).norm(), 0.0, epsilon = 1e-15);
        assert!(r.map.negative().iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn nonpositive_mu1_is_rejected() {
        let m = MomentSequences {
            mu: vec![C64::new(-1.0, 0.0), C64::new(0.0, 0.0)],
            nu: vec![C64::new(0.0, 0.0); 2],
        };
        assert!(matches!(
            invert_moments(&m, CoefficientVariant::Corrected),
            Err(Error::InvalidMoments(_))
        ));
    }

    fn sample_measurement() -> MeasurementMatrix {
        let mut r = MeasurementMatrix::zeros(2, C64::new(0.0, 0.0), 1.0);
        r.entries = DMatrix::from_fn(4, 4, |i, j| C64::new(1.0 + i as f64, 0.5 - j as f64));
        r
    }

    #[test]
    fn zero_noise_is_identity() {
        let r = sample_measurement();
        assert_eq!(apply_noise(&r, 0.0, 7).unwrap(), r);
    }

    #[test]
    fn noise_is_bounded_and_reproducible() {
        let r = sample_measurement();
        let a = apply_noise(&r, 0.05, 11).unwrap();
        let b = apply_noise(&r, 0.05, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, apply_noise(&r, 0.05, 12).unwrap());
        for (x, y) in a.entries.iter().zip(r.entries.iter()) {
            let ratio = x / y;
            assert!(ratio.im.abs() < 1e-15);
            assert!((ratio.re - 1.0).abs() <= 0.05 + 1e-15);
        }
        assert!(apply_noise(&r, -0.1, 1).is_err());
    }

    fn result_with(map: LaurentMap) -> ReconstructionResult {
        ReconstructionResult {
            order_used: map.order(),
            map,
            noise: 0.0,
            center: C64::new(0.0, 0.0),
            scale: 1.0,
            variant: CoefficientVariant::Corrected,
            seed: None,
            relative_errors: None,
        }
    }

    #[test]
    fn shift_and_rescale_cases() {
        let map = LaurentMap::new(C64::new(0.2, 0.0), C64::new(0.0, 0.0), vec![C64::new(0.01, 0.0)])
            .unwrap();
        let r = result_with(map.clone());
        assert_eq!(shift_and_rescale(&r, C64::new(0.0, 0.0), 1.0).map, map);
        let c = C64::new(0.3, -0.1);
        let shifted = shift_and_rescale(&r, c, 1.0);
        assert_eq!(shifted.map.a0(), c);
        assert_eq!(shifted.map.a1(), map.a1());
        let s = 0.9 / 3.8;
        let back = shift_and_rescale(&result_with(map.scaled(s)), C64::new(0.0, 0.0), s);
        for (x, y) in back.map.coefficients().iter().zip(map.coefficients()) {
            assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn identical_runs_keep_everything() {
        let r = result_with(LaurentMap::benchmark_cavity());
        assert_eq!(truncate_by_stability(&[r.clone(), r.clone(), r]).unwrap(), 7);
    }

    #[test]
    fn unstable_coefficient_cuts_the_order() {
        let base = LaurentMap::benchmark_cavity();
        let mut coeffs = base.coefficients();
        coeffs[2 + 2] = -coeffs[2 + 2]; // a_{-3} flips sign
        let flipped = LaurentMap::from_coefficients(&coeffs).unwrap();
        let kept = truncate_by_stability(&[result_with(base), result_with(flipped)]).unwrap();
        assert_eq!(kept, 2);
        assert!(truncate_by_stability(&[result_with(LaurentMap::benchmark_cavity())]).is_err());
    }
}
