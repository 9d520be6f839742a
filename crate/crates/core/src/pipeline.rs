//! End-to-end runs: forward solve on a rescaled geometry, reconstruction from
//! exact or noisy data, multi-seed noise studies and the interaction
//! operators used to check the factorization of the measurement.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{ParamCurve, C64};
use crate::error::{Error, Result};
use crate::gpst::{build_basis, outer_gpst, GpstMatrix, MU1_REAL_TOL};
use crate::reconstruct::{
    apply_noise, reconstruct_from_measurement, reconstruct_from_measurement_with,
    truncate_by_stability, CoefficientVariant,
    ReconstructionResult,
};
use crate::singlelayer::{
    assemble_measurement, assemble_single_layer, cross_layer, BoundaryGrid, LayerSolver,
    MeasurementMatrix,
};
use crate::LaurentMap;

/// Target diameter of the outer boundary after rescaling. Keeping it below 1
/// keeps the logarithmic capacity away from 1.
pub const TARGET_DIAMETER: f64 = 0.9;

/// Dilation `s` that brings the outer boundary to [`TARGET_DIAMETER`].
pub fn rescale_factor(outer: &ParamCurve) -> f64 {
    TARGET_DIAMETER / outer.diameter()
}

/// Everything the inversion needs from one forward solve.
#[derive(Clone, Debug)]
pub struct ForwardData {
    pub scale: f64,
    pub measurement: MeasurementMatrix,
    pub outer_gpst: GpstMatrix,
    /// Logarithmic capacity of the rescaled outer boundary.
    pub outer_capacity: f64,
}

impl ForwardData {
    pub fn order(&self) -> usize {
        self.measurement.order
    }

    /// Center of the shifted polynomials in physical coordinates.
    pub fn physical_center(&self) -> C64 {
        self.measurement.center / self.scale
    }
}

fn scaled_cavity(cavity: &ParamCurve, s: f64) -> Result<LayerSolver> {
    LayerSolver::new(BoundaryGrid::new(cavity.scaled(s)))
}

/// Rescales the geometry, builds the shifted harmonic basis around `center`
/// (physical coordinates) and computes `𝐑` and `𝐐_Γ`. Without a cavity the
/// measurement is zero.
pub fn run_forward(
    outer: &ParamCurve,
    cavity: Option<&ParamCurve>,
    order: usize,
    center: C64,
) -> Result<ForwardData> {
    run_forward_scaled(outer, cavity, order, center, rescale_factor(outer))
}

/// [`run_forward`] with an explicit dilation `s` instead of the default
/// [`rescale_factor`].
pub fn run_forward_scaled(
    outer: &ParamCurve,
    cavity: Option<&ParamCurve>,
    order: usize,
    center: C64,
    s: f64,
) -> Result<ForwardData> {
    if !(center.re.is_finite() && center.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("center {center} is not finite")));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale must be positive, got {s}")));
    }
    let solver = LayerSolver::new(BoundaryGrid::new(outer.scaled(s)))?;
    let basis = build_basis(solver.grid(), solver.equilibrium(), order, center * s)?;
    let q = outer_gpst(&solver, &basis);
    let cavity_layer = match cavity {
        Some(c) => Some(assemble_single_layer(&BoundaryGrid::new(c.scaled(s)))?),
        None => None,
    };
    let measurement = assemble_measurement(&solver, cavity_layer.as_ref(), &basis, s)?;
    Ok(ForwardData {
        scale: s,
        measurement,
        outer_gpst: q,
        outer_capacity: solver.equilibrium().capacity,
    })
}

/// Reconstruction from the exact forward data.
pub fn reconstruct_exact(
    data: &ForwardData,
    variant: CoefficientVariant,
) -> Result<ReconstructionResult> {
    reconstruct_from_measurement(&data.outer_gpst, &data.measurement, variant)
}

/// Relative tolerance on `Im μ_1` for data perturbed at level `δ`. The noise
/// model does not respect the conjugation symmetry of `𝐑`, so `μ_1` picks
/// up an imaginary part proportional to `δ`; it is accepted up to `δ|μ_1|`
/// and discarded.
pub fn noisy_mu1_tolerance(delta: f64) -> f64 {
    MU1_REAL_TOL.max(delta)
}

/// Reconstruction from `(1 + δN)`-perturbed data for one seed.
pub fn reconstruct_noisy(
    data: &ForwardData,
    delta: f64,
    seed: u64,
    variant: CoefficientVariant,
) -> Result<ReconstructionResult> {
    let noisy = apply_noise(&data.measurement, delta, seed)?;
    let mut out = reconstruct_from_measurement_with(
        &data.outer_gpst,
        &noisy,
        variant,
        noisy_mu1_tolerance(delta),
    )?;
    out.noise = delta;
    out.seed = Some(seed);
    Ok(out)
}

/// One noise level over many seeds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NoiseStudy {
    pub delta: f64,
    pub variant: CoefficientVariant,
    /// Full-order reconstructions of the seeds that succeeded.
    pub runs: Vec<ReconstructionResult>,
    /// Seeds whose reconstruction failed, with the error message.
    pub failures: Vec<(u64, String)>,
    /// Number of negative coefficients that pass the stability test.
    pub retained_order: usize,
}

impl NoiseStudy {
    /// Per-seed reconstructions cut to the retained order.
    pub fn truncated_runs(&self) -> Vec<ReconstructionResult> {
        self.runs.iter().map(|r| r.truncated(self.retained_order)).collect()
    }

    /// Median over seeds of the relative error of `a_k`, when every run
    /// carries errors against a truth.
    pub fn median_relative_error(&self, k: i64) -> Option<f64> {
        let mut v: Vec<f64> = self
            .runs
            .iter()
            .map(|r| r.relative_error(k))
            .collect::<Option<_>>()?;
        median(&mut v)
    }

    /// Coefficient-wise mean over seeds, truncated to the retained order.
    pub fn mean_map(&self) -> Result<LaurentMap> {
        let n = self.runs.len() as f64;
        let order = self.retained_order;
        let avg = |k: i64| self.runs.iter().map(|r| r.map.coeff(k)).sum::<C64>() / n;
        LaurentMap::new(avg(1), avg(0), (1..=order as i64).map(|m| avg(-m)).collect())
    }
}

pub(crate) fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Reconstructs once per seed (in parallel) and applies the stability
/// truncation. `truth`, when given, attaches relative errors to every run.
pub fn noise_study(
    data: &ForwardData,
    delta: f64,
    seeds: &[u64],
    variant: CoefficientVariant,
    truth: Option<&LaurentMap>,
) -> Result<NoiseStudy> {
    let outcomes: Vec<(u64, Result<ReconstructionResult>)> = seeds
        .par_iter()
        .map(|&seed| (seed, reconstruct_noisy(data, delta, seed, variant)))
        .collect();
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (seed, outcome) in outcomes {
        match outcome {
            Ok(r) => runs.push(match truth {
                Some(t) => r.with_truth(t),
                None => r,
            }),
            Err(e @ Error::InvalidArgument(_)) => return Err(e),
            Err(e) => {
                log::warn!("seed {seed}: {e}");
                failures.push((seed, e.to_string()));
            }
        }
    }
    if runs.len() < 2 {
        return Err(Error::InvalidMeasurement(format!(
            "only {} of {} seeds produced a reconstruction",
            runs.len(),
            seeds.len()
        )));
    }
    let retained_order = truncate_by_stability(&runs)?;
    Ok(NoiseStudy { delta, variant, runs, failures, retained_order })
}

/// Nodal matrices of the interaction operators between the rescaled outer
/// boundary `Γ` and cavity `γ`:
/// `K_Γ^γ q = Π_γ Tr_γ 𝒮_Γ 𝖲_Γ⁻¹ q`, `K_γ^Γ p = Tr_Γ 𝒮_γ 𝖲_γ⁻¹ p` and
/// `K = K_γ^Γ K_Γ^γ Π_Γ`.
pub struct InteractionOperators {
    pub outer: LayerSolver,
    pub cavity: LayerSolver,
    /// `K_Γ^γ`, rows on `γ`, columns on `Γ`.
    pub outer_to_cavity: DMatrix<f64>,
    /// `K_γ^Γ`, rows on `Γ`, columns on `γ`.
    pub cavity_to_outer: DMatrix<f64>,
    pub k: DMatrix<f64>,
}

fn projector(solver: &LayerSolver) -> DMatrix<f64> {
    let grid = solver.grid();
    let n = grid.len();
    let we = DVector::from_fn(n, |j, _| grid.weights()[j] * solver.equilibrium().density[j]);
    DMatrix::identity(n, n) - DMatrix::from_element(n, 1, 1.0) * we.transpose()
}

fn inverse(solver: &LayerSolver) -> DMatrix<f64> {
    let n = solver.grid().len();
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = DVector::zeros(n);
        e[j] = 1.0;
        out.set_column(j, &solver.density(&e));
    }
    out
}

impl InteractionOperators {
    /// Builds the operators on the geometry rescaled exactly as
    /// [`run_forward`] does.
    pub fn new(outer: &ParamCurve, cavity: &ParamCurve) -> Result<Self> {
        let s = rescale_factor(outer);
        let outer = LayerSolver::new(BoundaryGrid::new(outer.scaled(s)))?;
        let cavity = scaled_cavity(cavity, s)?;
        let y = cross_layer(outer.grid(), cavity.grid())?;
        let x = cross_layer(cavity.grid(), outer.grid())?;
        let (pi_out, pi_cav) = (projector(&outer), projector(&cavity));
        let outer_to_cavity = &pi_cav * y * inverse(&outer);
        let cavity_to_outer = x * inverse(&cavity);
        let k = &cavity_to_outer * &outer_to_cavity * pi_out;
        Ok(InteractionOperators { outer, cavity, outer_to_cavity, cavity_to_outer, k })
    }

    /// Largest modulus among the eigenvalues of `K`.
    pub fn spectral_radius(&self) -> f64 {
        self.k
            .complex_eigenvalues()
            .iter()
            .map(|l| l.norm())
            .fold(0.0, f64::max)
    }

    /// Relative Frobenius distance between the measured matrix and the
    /// pairings `⟨f_i, (I − K)⁻¹ K f_j⟩` over the same basis.
    pub fn factorization_defect(&self, data: &ForwardData) -> Result<f64> {
        let n = self.k.nrows();
        let lu = crate::linalg::DenseLu::new(DMatrix::identity(n, n) - &self.k, "I - K")?;
        let eq = self.outer.equilibrium();
        let basis = build_basis(self.outer.grid(), eq, data.order(), data.measurement.center)?;
        let traces: Vec<DVector<C64>> = (0..basis.len()).map(|i| basis.function(i)).collect();
        let grid = self.outer.grid();
        let mut diff = 0.0;
        let mut norm = 0.0;
        for (j, fj) in traces.iter().enumerate() {
            let kf = lu.solve_complex(&crate::singlelayer::real_times_complex(&self.k, fj));
            let density = self.outer.density_complex(&kf);
            for (i, fi) in traces.iter().enumerate() {
                let predicted = grid.pair_complex(&density, fi);
                let measured = data.measurement.entries[(i, j)];
                diff += (predicted - measured).norm_sqr();
                norm += measured.norm_sqr();
            }
        }
        Ok((diff / norm).sqrt())
    }

    /// Relative defect of `⟨K_γ^Γ p, q⟩_Γ = ⟨p, K_Γ^γ q⟩_γ` over zero-mean
    /// `p` and `q`, as bilinear forms.
    pub fn symmetry_defect(&self) -> f64 {
        let (pi_out, pi_cav) = (projector(&self.outer), projector(&self.cavity));
        let w_out = DMatrix::from_diagonal(&DVector::from_column_slice(self.outer.grid().weights()));
        let w_cav = DMatrix::from_diagonal(&DVector::from_column_slice(self.cavity.grid().weights()));
        // rows index p on γ, columns index q on Γ
        let lhs = (inverse(&self.outer) * &pi_out * &self.cavity_to_outer * &pi_cav).transpose()
            * &w_out
            * &pi_out;
        let rhs = (inverse(&self.cavity) * &pi_cav).transpose()
            * w_cav
            * &self.outer_to_cavity
            * &pi_out;
        (&lhs - &rhs).norm() / lhs.norm()
    }
}
