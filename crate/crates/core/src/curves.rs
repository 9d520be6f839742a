//! Closed parameterized curves and truncated exterior conformal maps.
//!
//! A [`ParamCurve`] is a smooth 2π-periodic parameterization sampled on a
//! uniform grid of `(-π, π]`. A [`LaurentMap`] describes the exterior
//! conformal map `z ↦ a1 z + a0 + Σ a_{-m} z^{-m}` of the unit disk onto the
//! exterior of a cavity, and carries the series algebra used by the
//! inversion formula and by the oracles.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Smallest admissible number of nodes for the spectral quadrature.
pub const MIN_NODES: usize = 16;

/// Relative tolerance of the injectivity check (times the curve diameter).
const INJECTIVITY_TOL: f64 = 1e-8;

/// Parameter value of node `j` for an `n`-node grid on `(-π, π]`.
pub fn parameter(j: usize, n: usize) -> f64 {
    -PI + 2.0 * PI * (j + 1) as f64 / n as f64
}

fn check_node_count(n: usize) -> Result<()> {
    if n < MIN_NODES || !n.is_multiple_of(2) {
        return Err(Error::InvalidDiscretization(format!(
            "node count must be even and at least {MIN_NODES}, got {n}"
        )));
    }
    Ok(())
}

/// A closed, regular, counterclockwise curve sampled at `N` equispaced
/// parameter values.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamCurve {
    nodes: Vec<C64>,
    derivatives: Vec<C64>,
}

impl ParamCurve {
    /// Builds a curve from node values and parameter derivatives, validating
    /// node count, regularity, orientation and injectivity.
    pub fn from_samples(nodes: Vec<C64>, derivatives: Vec<C64>) -> Result<Self> {
        if nodes.len() != derivatives.len() {
            return Err(Error::InvalidDiscretization(format!(
                "{} nodes but {} derivative values",
                nodes.len(),
                derivatives.len()
            )));
        }
        check_node_count(nodes.len())?;
        if nodes.iter().chain(&derivatives).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidDiscretization("non-finite sample".into()));
        }
        let curve = ParamCurve { nodes, derivatives };
        let max_speed = curve.derivatives.iter().map(|d| d.norm()).fold(0.0, f64::max);
        if let Some(j) = curve
            .derivatives
            .iter()
            .position(|d| d.norm() <= 1e-13 * max_speed.max(f64::MIN_POSITIVE))
        {
            return Err(Error::NonJordanCurve(format!(
                "parameterization is not regular at t = {:.6}",
                curve.parameter(j)
            )));
        }
        curve.check_injective()?;
        if curve.signed_area() <= 0.0 {
            return Err(Error::Geometry("curve must be oriented counterclockwise".into()));
        }
        Ok(curve)
    }

    /// Samples `t ↦ position(t)` with derivative `velocity(t)` on `n` nodes.
    pub fn from_fn(
        n: usize,
        position: impl Fn(f64) -> C64,
        velocity: impl Fn(f64) -> C64,
    ) -> Result<Self> {
        check_node_count(n)?;
        let ts: Vec<f64> = (0..n).map(|j| parameter(j, n)).collect();
        Self::from_samples(
            ts.iter().map(|&t| position(t)).collect(),
            ts.iter().map(|&t| velocity(t)).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn derivatives(&self) -> &[C64] {
        &self.derivatives
    }

    pub fn parameter(&self, j: usize) -> f64 {
        parameter(j, self.len())
    }

    /// Uniform parameter step `2π / N`.
    pub fn step(&self) -> f64 {
        2.0 * PI / self.len() as f64
    }

    /// `|x'(t_j)|` at every node.
    pub fn speeds(&self) -> Vec<f64> {
        self.derivatives.iter().map(|d| d.norm()).collect()
    }

    pub fn is_counterclockwise(&self) -> bool {
        self.signed_area() > 0.0
    }

    /// Trapezoidal arc length.
    pub fn arc_length(&self) -> f64 {
        self.step() * self.derivatives.iter().map(|d| d.norm()).sum::<f64>()
    }

    /// Enclosed area with sign given by orientation, `½∮ Im(conj(x) x') dt`.
    pub fn signed_area(&self) -> f64 {
        0.5 * self.step()
            * self
                .nodes
                .iter()
                .zip(&self.derivatives)
                .map(|(x, d)| (x.conj() * d).im)
                .sum::<f64>()
    }

    /// Largest distance between two nodes.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.nodes.iter().enumerate() {
            for b in &self.nodes[i + 1..] {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    /// Smallest distance from `point` to any node.
    pub fn distance_to(&self, point: C64) -> f64 {
        self.nodes.iter().map(|x| (x - point).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Winding number of the node polygon around `point`.
    pub fn winding_number(&self, point: C64) -> i64 {
        let n = self.len();
        let total: f64 = (0..n)
            .map(|j| ((self.nodes[(j + 1) % n] - point) / (self.nodes[j] - point)).arg())
            .sum();
        (total / (2.0 * PI)).round() as i64
    }

    /// The curve dilated by `s` about the origin.
    pub fn scaled(&self, s: f64) -> ParamCurve {
        ParamCurve {
            nodes: self.nodes.iter().map(|x| x * s).collect(),
            derivatives: self.derivatives.iter().map(|d| d * s).collect(),
        }
    }

    fn check_injective(&self) -> Result<()> {
        let n = self.len();
        let tol = INJECTIVITY_TOL * self.diameter();
        for i in 0..n {
            for j in i + 2..n {
                // neighbours along the parameter circle are excluded
                if i == 0 && j == n - 1 {
                    continue;
                }
                let d = (self.nodes[i] - self.nodes[j]).norm();
                if d <= tol {
                    return Err(Error::NonJordanCurve(format!(
                        "nodes at t = {:.6} and t = {:.6} coincide (distance {d:.3e})",
                        self.parameter(i),
                        self.parameter(j)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Ellipse `t ↦ (a cos t, b sin t)` sampled on `n` nodes.
pub fn ellipse(semi_major: f64, semi_minor: f64, n: usize) -> Result<ParamCurve> {
    if !(semi_minor > 0.0 && semi_major >= semi_minor && semi_major.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "ellipse needs semi_major >= semi_minor > 0, got {semi_major}, {semi_minor}"
        )));
    }
    ParamCurve::from_fn(
        n,
        |t| C64::new(semi_major * t.cos(), semi_minor * t.sin()),
        |t| C64::new(-semi_major * t.sin(), semi_minor * t.cos()),
    )
}

/// Truncated exterior conformal map `z ↦ a1 z + a0 + Σ_{m=1}^{M} a_{-m} z^{-m}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaurentMap {
    a1: C64,
    a0: C64,
    negative: Vec<C64>,
}

impl LaurentMap {
    /// `negative` holds `a_{-1}, …, a_{-M}`.
    pub fn new(a1: C64, a0: C64, negative: Vec<C64>) -> Result<Self> {
        if a1.norm() == 0.0 || !a1.norm().is_finite() {
            return Err(Error::InvalidMap("leading coefficient a1 must be non-zero".into()));
        }
        if !a0.norm().is_finite() || negative.iter().any(|c| !c.norm().is_finite()) {
            return Err(Error::InvalidMap("non-finite coefficient".into()));
        }
        Ok(LaurentMap { a1, a0, negative })
    }

    /// Builds the map from `[a1, a0, a_{-1}, …]`.
    pub fn from_coefficients(coeffs: &[C64]) -> Result<Self> {
        match coeffs {
            [a1, a0, rest @ ..] => Self::new(*a1, *a0, rest.to_vec()),
            [a1] => Self::new(*a1, C64::new(0.0, 0.0), Vec::new()),
            [] => Err(Error::InvalidMap("empty coefficient list".into())),
        }
    }

    /// The cavity of the numerical experiments: a non-convex curve with
    /// coefficients down to `a_{-7}`.
    pub fn benchmark_cavity() -> Self {
        let c = |re: f64, im: f64| C64::new(re, im);
        LaurentMap {
            a1: c(0.5, 0.0),
            a0: c(-1.0, 0.0),
            negative: vec![
                c(0.085, 0.0),
                c(0.0, -0.06),
                c(-0.035, 0.0),
                c(0.0, 0.06),
                c(0.0, 0.0),
                c(0.0, -0.01),
                c(-0.005, 0.0),
            ],
        }
    }

    pub fn a1(&self) -> C64 {
        self.a1
    }

    pub fn a0(&self) -> C64 {
        self.a0
    }

    /// `a_{-1}, …, a_{-M}`.
    pub fn negative(&self) -> &[C64] {
        &self.negative
    }

    /// Truncation order `M`.
    pub fn order(&self) -> usize {
        self.negative.len()
    }

    /// Coefficient `a_k`; zero outside `-M..=1`.
    pub fn coeff(&self, k: i64) -> C64 {
        match k {
            1 => self.a1,
            0 => self.a0,
            k if k < 0 && ((-k) as usize) <= self.negative.len() => self.negative[(-k - 1) as usize],
            _ => C64::new(0.0, 0.0),
        }
    }

    /// `[a1, a0, a_{-1}, …, a_{-M}]`.
    pub fn coefficients(&self) -> Vec<C64> {
        let mut out = vec![self.a1, self.a0];
        out.extend_from_slice(&self.negative);
        out
    }

    pub fn eval(&self, z: C64) -> C64 {
        let w = z.inv();
        let mut tail = C64::new(0.0, 0.0);
        for c in self.negative.iter().rev() {
            tail = (tail + c) * w;
        }
        self.a1 * z + self.a0 + tail
    }

    /// `φ'(z)`.
    pub fn derivative(&self, z: C64) -> C64 {
        let w = z.inv();
        let mut acc = self.a1;
        let mut wp = w * w;
        for (m, c) in self.negative.iter().enumerate() {
            acc -= c * (m as f64 + 1.0) * wp;
            wp *= w;
        }
        acc
    }

    /// Reparameterizes `z ↦ e^{iθ} z` so that `a1` becomes real positive.
    /// The image curve is unchanged.
    pub fn canonical(&self) -> LaurentMap {
        let theta = -self.a1.arg();
        let rot = |k: i64| C64::from_polar(1.0, k as f64 * theta);
        LaurentMap {
            a1: C64::new(self.a1.norm(), 0.0),
            a0: self.a0,
            negative: self
                .negative
                .iter()
                .enumerate()
                .map(|(m, c)| c * rot(-(m as i64) - 1))
                .collect(),
        }
    }

    /// Map of the cavity translated by `offset`.
    pub fn translated(&self, offset: C64) -> LaurentMap {
        LaurentMap { a0: self.a0 + offset, ..self.clone() }
    }

    /// Map of the cavity dilated by `s`.
    pub fn scaled(&self, s: f64) -> LaurentMap {
        LaurentMap {
            a1: self.a1 * s,
            a0: self.a0 * s,
            negative: self.negative.iter().map(|c| c * s).collect(),
        }
    }

    /// Keeps `a_{-1}, …, a_{-order}`.
    pub fn truncated(&self, order: usize) -> LaurentMap {
        let mut negative = self.negative.clone();
        negative.truncate(order);
        LaurentMap { negative, ..self.clone() }
    }
}

/// Samples the boundary `t ↦ φ(e^{it})` of the cavity.
pub fn from_laurent(map: &LaurentMap, n: usize) -> Result<ParamCurve> {
    ParamCurve::from_fn(
        n,
        |t| map.eval(C64::from_polar(1.0, t)),
        |t| {
            let z = C64::from_polar(1.0, t);
            C64::i() * z * map.derivative(z)
        },
    )
}

/// Laurent coefficients `a_k^n` of `φ^n`, indexed `-nM ..= n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeriesPower {
    exponent: usize,
    lowest: i64,
    coeffs: Vec<C64>,
}

impl LaurentSeriesPower {
    pub fn exponent(&self) -> usize {
        self.exponent
    }

    /// Smallest index with a stored coefficient.
    pub fn lowest(&self) -> i64 {
        self.lowest
    }

    /// Largest index with a stored coefficient (always `n`).
    pub fn highest(&self) -> i64 {
        self.lowest + self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, k: i64) -> C64 {
        if k < self.lowest || k > self.highest() {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[(k - self.lowest) as usize]
        }
    }
}

/// Full discrete convolution of two dense coefficient runs starting at the
/// given lowest indices.
pub(crate) fn convolve(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact coefficients of `φ^n`.
pub fn power_coeffs(map: &LaurentMap, n: usize) -> LaurentSeriesPower {
    assert!(n >= 1, "exponent must be positive");
    // ascending order: a_{-M}, …, a_0, a_1
    let base: Vec<C64> = (-(map.order() as i64)..=1).map(|k| map.coeff(k)).collect();
    let mut acc = base.clone();
    for _ in 1..n {
        acc = convolve(&acc, &base);
    }
    LaurentSeriesPower {
        exponent: n,
        lowest: -(n as i64) * map.order() as i64,
        coeffs: acc,
    }
}

/// Coefficients of the inverse map `φ^{-1}(z) = b1 z + b0 + Σ b_{-m} z^{-m}`
/// up to order `order`, with `b_{-m} = -(1/m) [φ^m]_{-1}`.
pub fn invert_map(map: &LaurentMap, order: usize) -> LaurentMap {
    let b1 = map.a1.inv();
    let b0 = -map.a0 / map.a1;
    let negative = (1..=order)
        .map(|m| -power_coeffs(map, m).coeff(-1) / m as f64)
        .collect();
    LaurentMap { a1: b1, a0: b0, negative }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn ellipse_node_at_zero_parameter() {
        let e = ellipse(1.9, 1.1, 256).unwrap();
        let j = (0..256).find(|&j| e.parameter(j).abs() < 1e-15).unwrap();
        assert_abs_diff_eq!(e.nodes()[j].re, 1.9, epsilon = 1e-15);
        assert_abs_diff_eq!(e.nodes()[j].im, 0.0, epsilon = 1e-15);
        assert!(e.is_counterclockwise());
    }

    #[test]
    fn unit_circle_moduli() {
        let e = ellipse(1.0, 1.0, 64).unwrap();
        for x in e.nodes() {
            assert_abs_diff_eq!(x.norm(), 1.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(e.arc_length(), 2.0 * PI, epsilon = 1e-13);
    }

    #[test]
    fn ellipse_rejects_bad_node_counts() {
        assert!(matches!(ellipse(2.0, 1.0, 63), Err(Error::InvalidDiscretization(_))));
        assert!(matches!(ellipse(2.0, 1.0, 14), Err(Error::InvalidDiscretization(_))));
        assert!(matches!(ellipse(1.0, 2.0, 64), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn disk_map_gives_circle() {
        let map = LaurentMap::new(c(0.5, 0.0), c(-1.0, 0.0), vec![]).unwrap();
        let curve = from_laurent(&map, 64).unwrap();
        for x in curve.nodes() {
            assert_abs_diff_eq!((x - c(-1.0, 0.0)).norm(), 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn benchmark_cavity_is_jordan() {
        let curve = from_laurent(&LaurentMap::benchmark_cavity(), 256).unwrap();
        assert!(curve.is_counterclockwise());
        assert_eq!(curve.winding_number(c(-1.0, 0.0)), 1);
    }

    #[test]
    fn slit_map_is_rejected() {
        let map = LaurentMap::new(c(1.0, 0.0), c(0.0, 0.0), vec![c(1.0, 0.0)]).unwrap();
        assert!(matches!(from_laurent(&map, 64), Err(Error::NonJordanCurve(_))));
    }

    #[test]
    fn zero_leading_coefficient_is_rejected() {
        assert!(LaurentMap::new(c(0.0, 0.0), c(1.0, 0.0), vec![]).is_err());
    }

    #[test]
    fn square_of_disk_map() {
        let map = LaurentMap::new(c(0.5, 0.0), c(-1.0, 0.0), vec![]).unwrap();
        let p = power_coeffs(&map, 2);
        assert_abs_diff_eq!(p.coeff(2).re, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p.coeff(1).re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.coeff(0).re, 1.0, epsilon = 1e-15);
        assert_eq!(p.coeff(3), c(0.0, 0.0));
    }

    #[test]
    fn square_cross_term() {
        let a1 = c(0.7, 0.2);
        let am2 = c(0.1, -0.3);
        let map = LaurentMap::new(a1, c(0.0, 0.0), vec![c(0.0, 0.0), am2]).unwrap();
        let p = power_coeffs(&map, 2);
        assert_abs_diff_eq!((p.coeff(-1) - 2.0 * a1 * am2).norm(), 0.0, epsilon = 1e-15);
        assert_eq!(p.lowest(), -4);
        assert_eq!(p.highest(), 2);
        assert_abs_diff_eq!((p.coeff(2) - a1 * a1).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn first_power_is_identity() {
        let map = LaurentMap::benchmark_cavity();
        let p = power_coeffs(&map, 1);
        for k in -8..=2 {
            assert_eq!(p.coeff(k), map.coeff(k));
        }
    }

    #[test]
    fn inverse_of_linear_map() {
        let map = LaurentMap::new(c(2.0, 0.0), c(0.0, 0.0), vec![]).unwrap();
        let inv = invert_map(&map, 4);
        assert_abs_diff_eq!(inv.a1().re, 0.5, epsilon = 1e-15);
        assert_eq!(inv.a0(), c(0.0, 0.0));
        assert!(inv.negative().iter().all(|b| b.norm() == 0.0));
    }

    #[test]
    fn inverse_first_negative_coefficient() {
        let cc = c(0.3, -0.1);
        let map = LaurentMap::new(c(1.0, 0.0), c(0.0, 0.0), vec![cc]).unwrap();
        let inv = invert_map(&map, 3);
        assert_abs_diff_eq!((inv.coeff(-1) + cc).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn inverse_constant_term() {
        let map = LaurentMap::new(c(0.5, 0.1), c(-1.0, 0.4), vec![]).unwrap();
        let inv = invert_map(&map, 2);
        assert_abs_diff_eq!((inv.a0() + map.a0() / map.a1()).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((inv.a1() * map.a1() - 1.0).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn canonical_keeps_the_image() {
        let map = LaurentMap::new(c(0.3, 0.4), c(0.1, 0.0), vec![c(0.05, 0.02), c(0.0, 0.03)])
            .unwrap();
        let canon = map.canonical();
        assert_abs_diff_eq!(canon.a1().im, 0.0, epsilon = 1e-15);
        assert!(canon.a1().re > 0.0);
        let l1 = from_laurent(&map, 128).unwrap().arc_length();
        let l2 = from_laurent(&canon, 128).unwrap().arc_length();
        assert_abs_diff_eq!(l1, l2, epsilon = 1e-12);
        // φ̃(z) = φ(e^{iθ} z)
        let theta = -map.a1().arg();
        let z = c(1.3, -0.4);
        let lhs = canon.eval(z);
        let rhs = map.eval(C64::from_polar(1.0, theta) * z);
        assert_abs_diff_eq!((lhs - rhs).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn winding_number_detects_outside_points() {
        let e = ellipse(1.0, 0.5, 64).unwrap();
        assert_eq!(e.winding_number(c(0.0, 0.0)), 1);
        assert_eq!(e.winding_number(c(3.0, 0.0)), 0);
    }
}
