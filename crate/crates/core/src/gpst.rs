//! Harmonic polynomial bases, generalized Pólya–Szegő tensors and the moment
//! sequences `μ_m`, `ν_m` read from them.
//!
//! Basis ordering: functions `0..M` are `Q^m = (z − r)^m + c^m`, functions
//! `M..2M` their conjugates. All pairings are complex bilinear.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::curves::C64;
use crate::error::{Error, Result};
use crate::linalg::DenseLu;
use crate::singlelayer::{BoundaryGrid, Equilibrium, LayerSolver, MeasurementMatrix};

/// Relative tolerance on `Im μ_1`.
pub const MU1_REAL_TOL: f64 = 1e-6;

/// Traces of the shifted harmonic polynomials on one boundary.
#[derive(Clone, Debug)]
pub struct HarmonicBasis {
    order: usize,
    center: C64,
    constants: Vec<C64>,
    traces: Vec<DVector<C64>>,
}

impl HarmonicBasis {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn center(&self) -> C64 {
        self.center
    }

    /// `c^m`, `m = 1..=M`.
    pub fn constants(&self) -> &[C64] {
        &self.constants
    }

    /// Trace of basis function `i` (`Q^{i+1}` or `conj Q^{i+1−M}`).
    pub fn function(&self, i: usize) -> DVector<C64> {
        if i < self.order {
            self.traces[i].clone()
        } else {
            self.traces[i - self.order].conjugate()
        }
    }

    pub fn len(&self) -> usize {
        2 * self.order
    }

    pub fn is_empty(&self) -> bool {
        self.order == 0
    }
}

/// `Q^m = (z − r)^m + c^m` with `c^m = −⟨ê, (z − r)^m⟩`.
pub fn build_basis(
    grid: &BoundaryGrid,
    eq: &Equilibrium,
    order: usize,
    center: C64,
) -> Result<HarmonicBasis> {
    if order == 0 {
        return Err(Error::InvalidArgument("basis order must be at least 1".into()));
    }
    let shifted: Vec<C64> = grid.nodes().iter().map(|z| z - center).collect();
    let mut power = vec![C64::new(1.0, 0.0); grid.len()];
    let mut constants = Vec::with_capacity(order);
    let mut traces = Vec::with_capacity(order);
    for _ in 0..order {
        for (p, s) in power.iter_mut().zip(&shifted) {
            *p *= s;
        }
        let mean: C64 = grid
            .weights()
            .iter()
            .zip(eq.density.iter())
            .zip(&power)
            .map(|((w, e), p)| p * (w * e))
            .sum();
        constants.push(-mean);
        traces.push(DVector::from_iterator(grid.len(), power.iter().map(|p| p - mean)));
    }
    Ok(HarmonicBasis { order, center, constants, traces })
}

/// Which boundary a tensor describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GpstBoundary {
    /// Computed from the known outer boundary.
    Outer,
    /// Recovered for the cavity from measurements.
    Recovered,
    /// Exact cavity tensor from contour integrals of the conformal map.
    Oracle,
}

/// `2M × 2M` matrix of half-order inner products of basis traces.
#[derive(Clone, Debug, PartialEq)]
pub struct GpstMatrix {
    pub order: usize,
    pub entries: DMatrix<C64>,
    pub boundary: GpstBoundary,
}

impl GpstMatrix {
    pub fn new(order: usize, entries: DMatrix<C64>, boundary: GpstBoundary) -> Self {
        assert_eq!(entries.shape(), (2 * order, 2 * order), "GPST must be 2M x 2M");
        GpstMatrix { order, entries, boundary }
    }

    /// `μ^{m,m'} = ½⟨Q^m, conj Q^{m'}⟩`.
    pub fn mu(&self, m: usize, m_prime: usize) -> C64 {
        0.5 * self.entries[(m - 1, self.order + m_prime - 1)]
    }

    /// `ν^{m,m'} = ½⟨Q^m, Q^{m'}⟩`.
    pub fn nu(&self, m: usize, m_prime: usize) -> C64 {
        0.5 * self.entries[(m - 1, m_prime - 1)]
    }

    /// Sesquilinear form `⟨conj f_i, f_j⟩`, obtained by swapping the two
    /// halves of the rows. Hermitian positive semidefinite for a genuine
    /// tensor.
    pub fn hermitian_form(&self) -> DMatrix<C64> {
        let n = 2 * self.order;
        DMatrix::from_fn(n, n, |i, j| self.entries[((i + self.order) % n, j)])
    }
}

/// Tensor of the outer boundary: `⟨f_i, f_j⟩ = Σ w (𝖲⁻¹ f_i) f_j`.
pub fn outer_gpst(solver: &LayerSolver, basis: &HarmonicBasis) -> GpstMatrix {
    let n = basis.len();
    let traces: Vec<DVector<C64>> = (0..n).map(|i| basis.function(i)).collect();
    let densities: Vec<DVector<C64>> = traces.iter().map(|f| solver.density_complex(f)).collect();
    let grid = solver.grid();
    let entries = DMatrix::from_fn(n, n, |i, j| grid.pair_complex(&densities[i], &traces[j]));
    GpstMatrix::new(basis.order(), entries, GpstBoundary::Outer)
}

/// `𝐐_γ ≈ 𝐐_Γ (𝐐_Γ + 𝐑)⁻¹ 𝐑`.
///
/// The computation runs on the diagonally equilibrated matrices `D𝐐D`,
/// `D𝐑D` with `D = diag(|𝐐_ii|^{-1/2})`; the formula is invariant under this
/// congruence and the scaled system is far better conditioned when the
/// polynomial degrees span many orders of magnitude.
pub fn recovered_gpst(outer: &GpstMatrix, measurement: &MeasurementMatrix) -> Result<GpstMatrix> {
    if outer.order != measurement.order {
        return Err(Error::InconsistentMeasurement(format!(
            "tensor order {} but measurement order {}",
            outer.order, measurement.order
        )));
    }
    let n = 2 * outer.order;
    let d: Vec<f64> = (0..n)
        .map(|i| {
            let q = outer.entries[(i, i)].norm();
            if q > 0.0 {
                q.sqrt().recip()
            } else {
                1.0
            }
        })
        .collect();
    let q = DMatrix::from_fn(n, n, |i, j| outer.entries[(i, j)] * (d[i] * d[j]));
    let r = DMatrix::from_fn(n, n, |i, j| measurement.entries[(i, j)] * (d[i] * d[j]));
    let lu = DenseLu::new(&q + &r, "Q + R")
        .map_err(|e| Error::InconsistentMeasurement(e.to_string()))?;
    let x = q * lu.solve_matrix(&r);
    let entries = DMatrix::from_fn(n, n, |i, j| x[(i, j)] / (d[i] * d[j]));
    Ok(GpstMatrix::new(outer.order, entries, GpstBoundary::Recovered))
}

/// `μ_m = μ^{m,1}` and `ν_m = ν^{m,1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSequences {
    pub mu: Vec<C64>,
    pub nu: Vec<C64>,
}

impl MomentSequences {
    pub fn order(&self) -> usize {
        self.mu.len()
    }

    /// Checks `μ_1 > 0` (imaginary part within [`MU1_REAL_TOL`], then
    /// discarded).
    pub fn validated(self) -> Result<Self> {
        self.validated_with(MU1_REAL_TOL)
    }

    /// As [`validated`](Self::validated) with a caller-chosen relative
    /// tolerance on `Im μ_1`.
    pub fn validated_with(mut self, imag_tol: f64) -> Result<Self> {
        if self.mu.len() < 2 || self.nu.len() != self.mu.len() {
            return Err(Error::InvalidMoments(format!(
                "need at least two moments of each kind, got {} and {}",
                self.mu.len(),
                self.nu.len()
            )));
        }
        let mu1 = self.mu[0];
        if !(mu1.re > 0.0) || mu1.im.abs() > imag_tol * mu1.norm() {
            return Err(Error::InvalidMeasurement(format!(
                "μ_1 = {mu1} is not real positive"
            )));
        }
        self.mu[0] = C64::new(mu1.re, 0.0);
        Ok(self)
    }
}

pub fn extract_moments(q: &GpstMatrix) -> Result<MomentSequences> {
    extract_moments_with(q, MU1_REAL_TOL)
}

/// [`extract_moments`] with a caller-chosen tolerance on `Im μ_1`.
pub fn extract_moments_with(q: &GpstMatrix, imag_tol: f64) -> Result<MomentSequences> {
    if q.order < 2 {
        return Err(Error::InvalidArgument(format!(
            "moment extraction needs order >= 2, got {}",
            q.order
        )));
    }
    MomentSequences {
        mu: (1..=q.order).map(|m| q.mu(m, 1)).collect(),
        nu: (1..=q.order).map(|m| q.nu(m, 1)).collect(),
    }
    .validated_with(imag_tol)
}
