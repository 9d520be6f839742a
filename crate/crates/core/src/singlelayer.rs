//! Nyström discretization of the logarithmic single layer operator on closed
//! analytic curves, the equilibrium density, the coupled two-boundary solver
//! and the measurement matrix `R = S_Γ(Λ_γ − Λ_0)`.
//!
//! Densities are nodal values with respect to arc length; traces are nodal
//! values of potentials. The self-interaction uses the Kress splitting of
//! `log(4 sin²((t−s)/2))`, which is spectrally accurate on uniform grids.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::curves::{ParamCurve, C64};
use crate::error::{Error, Result};
use crate::gpst::HarmonicBasis;
use crate::linalg::DenseLu;

/// `G(x) = −(1/2π) log|x|`.
pub fn fundamental_solution(x: C64) -> f64 {
    -x.norm().ln() / (2.0 * PI)
}

/// Quadrature carrier on a curve: arc-length weights and outward normals.
#[derive(Clone, Debug)]
pub struct BoundaryGrid {
    curve: ParamCurve,
    weights: Vec<f64>,
    normals: Vec<C64>,
}

impl BoundaryGrid {
    pub fn new(curve: ParamCurve) -> Self {
        let h = curve.step();
        let weights = curve.derivatives().iter().map(|d| h * d.norm()).collect();
        // outward for a counterclockwise curve: tangent rotated by −π/2
        let normals = curve
            .derivatives()
            .iter()
            .map(|d| -C64::i() * d / d.norm())
            .collect();
        BoundaryGrid { curve, weights, normals }
    }

    pub fn curve(&self) -> &ParamCurve {
        &self.curve
    }

    pub fn len(&self) -> usize {
        self.curve.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curve.is_empty()
    }

    pub fn nodes(&self) -> &[C64] {
        self.curve.nodes()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn normals(&self) -> &[C64] {
        &self.normals
    }

    /// `Σ w_j q̂_j`, the discrete `⟨q̂, 1⟩`.
    pub fn total_mass(&self, density: &DVector<f64>) -> f64 {
        self.weights.iter().zip(density.iter()).map(|(w, q)| w * q).sum()
    }

    /// Weighted bilinear pairing `Σ w_j a_j b_j` of complex nodal vectors.
    pub fn pair_complex(&self, a: &DVector<C64>, b: &DVector<C64>) -> C64 {
        self.weights
            .iter()
            .zip(a.iter().zip(b.iter()))
            .map(|(w, (x, y))| x * y * *w)
            .sum()
    }

    pub fn pair(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        self.weights
            .iter()
            .zip(a.iter().zip(b.iter()))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    }
}

/// Discrete `𝖲_𝒞`: nodal density values to nodal trace values.
#[derive(Clone, Debug)]
pub struct SingleLayerMatrix {
    grid: BoundaryGrid,
    matrix: DMatrix<f64>,
}

impl SingleLayerMatrix {
    pub fn grid(&self) -> &BoundaryGrid {
        &self.grid
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, density: &DVector<f64>) -> DVector<f64> {
        &self.matrix * density
    }
}

/// Kress weights `R_j(t_i)` for `∫ log(4 sin²((t−s)/2)) f(s) ds`, indexed by
/// the node offset `i − j` modulo `n`.
fn log_weights(n: usize) -> Vec<f64> {
    let half = n / 2;
    let hf = half as f64;
    (0..n)
        .map(|d| {
            let tau = 2.0 * PI * d as f64 / n as f64;
            let sum: f64 = (1..half).map(|m| (m as f64 * tau).cos() / m as f64).sum();
            -2.0 * PI / hf * sum - PI / (hf * hf) * (hf * tau).cos()
        })
        .collect()
}

/// Assembles the Nyström matrix of the single layer operator on `grid`.
pub fn assemble_single_layer(grid: &BoundaryGrid) -> Result<SingleLayerMatrix> {
    let n = grid.len();
    let curve = grid.curve();
    let nodes = curve.nodes();
    let speeds = curve.speeds();
    let h = curve.step();
    let r = log_weights(n);
    let c = 1.0 / (4.0 * PI);
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let smooth = if i == j {
                -c * (speeds[i] * speeds[i]).ln()
            } else {
                let d2 = (nodes[i] - nodes[j]).norm_sqr();
                if d2 == 0.0 {
                    return Err(Error::SingularGeometry(format!(
                        "nodes {i} and {j} coincide"
                    )));
                }
                let half_angle = 0.5 * (curve.parameter(i) - curve.parameter(j));
                let s = 2.0 * half_angle.sin();
                -c * (d2 / (s * s)).ln()
            };
            let offset = (i + n - j) % n;
            a[(i, j)] = (-c * r[offset] + h * smooth) * speeds[j];
        }
    }
    Ok(SingleLayerMatrix { grid: grid.clone(), matrix: a })
}

fn check_disjoint(a: &ParamCurve, b: &ParamCurve) -> Result<()> {
    let scale = a.diameter().max(b.diameter());
    let gap = a
        .nodes()
        .iter()
        .map(|&x| b.distance_to(x))
        .fold(f64::INFINITY, f64::min);
    if gap <= 1e-8 * scale {
        return Err(Error::Geometry(format!("curves touch (node gap {gap:.3e})")));
    }
    let uniform = |outer: &ParamCurve, inner: &ParamCurve| {
        let first = outer.winding_number(inner.nodes()[0]);
        inner.nodes().iter().all(|&x| outer.winding_number(x) == first)
    };
    if !uniform(a, b) || !uniform(b, a) {
        return Err(Error::Geometry("curves intersect".into()));
    }
    Ok(())
}

/// Discrete kernel of `𝒮_source` traced on `target`: entry `(i, j)` is
/// `G(x_i − y_j) w_j`. Plain trapezoid rule, the kernel being smooth.
pub fn cross_layer(source: &BoundaryGrid, target: &BoundaryGrid) -> Result<DMatrix<f64>> {
    check_disjoint(source.curve(), target.curve())?;
    Ok(cross_layer_unchecked(source, target.nodes()))
}

fn cross_layer_unchecked(source: &BoundaryGrid, targets: &[C64]) -> DMatrix<f64> {
    let ys = source.nodes();
    let w = source.weights();
    DMatrix::from_fn(targets.len(), ys.len(), |i, j| {
        fundamental_solution(targets[i] - ys[j]) * w[j]
    })
}

/// Evaluates `𝒮 q̂` at points away from the curve.
pub fn single_layer_potential(grid: &BoundaryGrid, density: &DVector<f64>, points: &[C64]) -> Vec<f64> {
    let k = cross_layer_unchecked(grid, points);
    (k * density).iter().copied().collect()
}

/// Equilibrium density and logarithmic capacity of a curve.
#[derive(Clone, Debug)]
pub struct Equilibrium {
    pub density: DVector<f64>,
    pub capacity: f64,
    /// Constant value of `𝖲 ê` on the curve.
    pub constant_trace: f64,
}

/// Solves `[S, −1; wᵀ, 0] [ê; c] = [0; 1]`.
pub fn equilibrium(s: &SingleLayerMatrix) -> Result<Equilibrium> {
    let n = s.grid.len();
    let mut a = DMatrix::zeros(n + 1, n + 1);
    a.view_mut((0, 0), (n, n)).copy_from(&s.matrix);
    for i in 0..n {
        a[(i, n)] = -1.0;
        a[(n, i)] = s.grid.weights[i];
    }
    let lu = DenseLu::new(a, "equilibrium system").map_err(|_| Error::CapacityOne)?;
    let mut rhs = DVector::zeros(n + 1);
    rhs[n] = 1.0;
    let x = lu.solve(&rhs);
    let constant_trace = x[n];
    // Cap = 1 makes 𝖲 itself singular even though this bordered system is not
    if (2.0 * PI * constant_trace).abs() < 1e-9 {
        return Err(Error::CapacityOne);
    }
    Ok(Equilibrium {
        density: x.rows(0, n).into_owned(),
        capacity: (-2.0 * PI * constant_trace).exp(),
        constant_trace,
    })
}

/// Factorized single layer operator of one curve with its equilibrium
/// density: everything needed for half-order inner products on that curve.
pub struct LayerSolver {
    layer: SingleLayerMatrix,
    lu: DenseLu<f64>,
    equilibrium: Equilibrium,
}

impl LayerSolver {
    pub fn new(grid: BoundaryGrid) -> Result<Self> {
        let layer = assemble_single_layer(&grid)?;
        let equilibrium = equilibrium(&layer)?;
        let lu = DenseLu::new(layer.matrix.clone(), "single layer").map_err(|_| Error::CapacityOne)?;
        Ok(LayerSolver { layer, lu, equilibrium })
    }

    pub fn grid(&self) -> &BoundaryGrid {
        &self.layer.grid
    }

    pub fn layer(&self) -> &SingleLayerMatrix {
        &self.layer
    }

    pub fn equilibrium(&self) -> &Equilibrium {
        &self.equilibrium
    }

    /// `𝖲⁻¹ q`.
    pub fn density(&self, trace: &DVector<f64>) -> DVector<f64> {
        self.lu.solve(trace)
    }

    pub fn density_complex(&self, trace: &DVector<C64>) -> DVector<C64> {
        self.lu.solve_complex(trace)
    }

    /// `⟨ê, q⟩`.
    pub fn mean(&self, trace: &DVector<f64>) -> f64 {
        self.grid().pair(&self.equilibrium.density, trace)
    }

    /// Projection `Π q = q − ⟨ê, q⟩` onto traces with zero equilibrium mean.
    pub fn project(&self, trace: &DVector<f64>) -> DVector<f64> {
        trace.add_scalar(-self.mean(trace))
    }

    /// Half-order inner product `⟨Πf, Πg⟩_{1/2} = Σ w (𝖲⁻¹Πf)(Πg)`.
    pub fn inner(&self, f: &DVector<f64>, g: &DVector<f64>) -> f64 {
        let pf = self.project(f);
        let pg = self.project(g);
        self.grid().pair(&self.density(&pf), &pg)
    }
}

/// Solution of the coupled single layer system for one datum `f`.
#[derive(Clone, Debug)]
pub struct CoupledSolution {
    /// `p̂` on the cavity boundary, with zero total mass.
    pub inner_density: DVector<f64>,
    /// `q̂` on the outer boundary.
    pub outer_density: DVector<f64>,
    /// Constant value `c^f` of the solution on the cavity.
    pub constant: f64,
    pub ill_conditioned: bool,
}

/// Factorized block system coupling the outer boundary `Γ` and the cavity
/// boundary `γ`:
///
/// ```text
/// [ 𝖲_γ        Tr_γ 𝒮_Γ   −1 ] [p̂]   [g]
/// [ Tr_Γ 𝒮_γ   𝖲_Γ         0 ] [q̂] = [f]
/// [ w_γᵀ       0           0 ] [c ]   [0]
/// ```
pub struct CoupledSolver {
    n_inner: usize,
    n_outer: usize,
    outer_to_inner: DMatrix<f64>,
    inner_to_outer: DMatrix<f64>,
    lu: DenseLu<f64>,
}

impl CoupledSolver {
    pub fn new(outer: &SingleLayerMatrix, inner: &SingleLayerMatrix) -> Result<Self> {
        let (gout, gin) = (outer.grid(), inner.grid());
        check_disjoint(gout.curve(), gin.curve())?;
        if gin.nodes().iter().any(|&x| gout.curve().winding_number(x) != 1) {
            return Err(Error::Geometry("cavity is not inside the outer boundary".into()));
        }
        let outer_to_inner = cross_layer_unchecked(gout, gin.nodes());
        let inner_to_outer = cross_layer_unchecked(gin, gout.nodes());
        let (ni, no) = (gin.len(), gout.len());
        let dim = ni + no + 1;
        let mut a = DMatrix::zeros(dim, dim);
        a.view_mut((0, 0), (ni, ni)).copy_from(inner.matrix());
        a.view_mut((0, ni), (ni, no)).copy_from(&outer_to_inner);
        a.view_mut((ni, 0), (no, ni)).copy_from(&inner_to_outer);
        a.view_mut((ni, ni), (no, no)).copy_from(outer.matrix());
        for i in 0..ni {
            a[(i, dim - 1)] = -1.0;
            a[(dim - 1, i)] = gin.weights()[i];
        }
        let lu = DenseLu::new(a, "coupled boundary system")?;
        Ok(CoupledSolver {
            n_inner: ni,
            n_outer: no,
            outer_to_inner,
            inner_to_outer,
            lu,
        })
    }

    /// `Tr_γ 𝒮_Γ` as a matrix (rows on `γ`, columns on `Γ`).
    pub fn outer_to_inner(&self) -> &DMatrix<f64> {
        &self.outer_to_inner
    }

    /// `Tr_Γ 𝒮_γ` as a matrix (rows on `Γ`, columns on `γ`).
    pub fn inner_to_outer(&self) -> &DMatrix<f64> {
        &self.inner_to_outer
    }

    pub fn condition(&self) -> f64 {
        self.lu.condition()
    }

    fn stack(&self, inner: Option<&DVector<f64>>, outer: Option<&DVector<f64>>) -> DVector<f64> {
        let mut b = DVector::zeros(self.n_inner + self.n_outer + 1);
        if let Some(g) = inner {
            b.rows_mut(0, self.n_inner).copy_from(g);
        }
        if let Some(f) = outer {
            b.rows_mut(self.n_inner, self.n_outer).copy_from(f);
        }
        b
    }

    /// Solves with Dirichlet datum `f` on the outer boundary.
    pub fn solve(&self, f: &DVector<f64>) -> CoupledSolution {
        let x = self.lu.solve(&self.stack(None, Some(f)));
        CoupledSolution {
            inner_density: x.rows(0, self.n_inner).into_owned(),
            outer_density: x.rows(self.n_inner, self.n_outer).into_owned(),
            constant: x[self.n_inner + self.n_outer],
            ill_conditioned: self.lu.is_ill_conditioned(),
        }
    }

    /// Scattered-field solve: given the incident trace `u_inc` on the cavity,
    /// returns `(p̂, q̂ − ĝ)` where `ĝ` generates the incident field. This
    /// avoids forming the small difference `q̂ − ĝ` by cancellation.
    pub fn solve_scattered(&self, incident: &DVector<C64>) -> (DVector<C64>, DVector<C64>) {
        let mut b = DVector::zeros(self.n_inner + self.n_outer + 1);
        b.rows_mut(0, self.n_inner).copy_from(&(-incident));
        let x = self.lu.solve_complex(&b);
        (
            x.rows(0, self.n_inner).into_owned(),
            x.rows(self.n_inner, self.n_outer).into_owned(),
        )
    }
}

/// Assembles and solves the coupled system for one datum.
pub fn solve_coupled(
    outer: &BoundaryGrid,
    inner: &BoundaryGrid,
    f: &DVector<f64>,
) -> Result<CoupledSolution> {
    let so = assemble_single_layer(outer)?;
    let si = assemble_single_layer(inner)?;
    Ok(CoupledSolver::new(&so, &si)?.solve(f))
}

/// Matrix `R_{ij} = ⟨f_i, 𝖲_Γ(Λ_γ − Λ_0) f_j⟩_{1/2}` over the harmonic basis.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementMatrix {
    pub order: usize,
    /// Center of the shifted polynomials, in the assembly frame.
    pub center: C64,
    /// Dilation applied to the physical geometry before assembly.
    pub scale: f64,
    pub entries: DMatrix<C64>,
}

impl MeasurementMatrix {
    pub fn zeros(order: usize, center: C64, scale: f64) -> Self {
        MeasurementMatrix {
            order,
            center,
            scale,
            entries: DMatrix::zeros(2 * order, 2 * order),
        }
    }
}

/// Column `j` of `R` uses `(Λ_γ − Λ_0) f_j = q̂_j − ĝ_j` (jump relation), so
/// `R_{ij} = Σ w (q̂_j − ĝ_j) f_i` needs no normal derivative.
pub fn assemble_measurement(
    outer: &LayerSolver,
    cavity: Option<&SingleLayerMatrix>,
    basis: &HarmonicBasis,
    scale: f64,
) -> Result<MeasurementMatrix> {
    let order = basis.order();
    let mut out = MeasurementMatrix::zeros(order, basis.center(), scale);
    let Some(cavity) = cavity else {
        return Ok(out);
    };
    let solver = CoupledSolver::new(outer.layer(), cavity)?;
    if solver.lu.is_ill_conditioned() {
        log::warn!("measurement assembly uses an ill-conditioned coupled system");
    }
    let grid = outer.grid();
    let traces: Vec<DVector<C64>> = (0..2 * order).map(|i| basis.function(i)).collect();
    for j in 0..order {
        let g_hat = outer.density_complex(&traces[j]);
        let incident = real_times_complex(solver.outer_to_inner(), &g_hat);
        let (_, diff) = solver.solve_scattered(&incident);
        for (i, fi) in traces.iter().enumerate() {
            let v = grid.pair_complex(&diff, fi);
            out.entries[(i, j)] = v;
            // the conjugate datum produces the conjugate response
            let i_conj = (i + order) % (2 * order);
            out.entries[(i_conj, j + order)] = v.conj();
        }
    }
    Ok(out)
}

pub(crate) fn real_times_complex(a: &DMatrix<f64>, x: &DVector<C64>) -> DVector<C64> {
    let re = a * x.map(|z| z.re);
    let im = a * x.map(|z| z.im);
    DVector::from_fn(a.nrows(), |i, _| C64::new(re[i], im[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{ellipse, from_laurent, LaurentMap};
    use crate::gpst::build_basis;
    use approx::assert_abs_diff_eq;

    fn circle(radius: f64, n: usize) -> ParamCurve {
        ParamCurve::from_fn(n, |t| C64::from_polar(radius, t), |t| C64::i() * C64::from_polar(radius, t))
            .unwrap()
    }

    fn layer(curve: ParamCurve) -> SingleLayerMatrix {
        assemble_single_layer(&BoundaryGrid::new(curve)).unwrap()
    }

    #[test]
    fn constant_density_on_a_circle() {
        let rho = 0.4;
        let s = layer(circle(rho, 64));
        let out = s.apply(&DVector::from_element(64, 1.0));
        for v in out.iter() {
            assert_abs_diff_eq!(*v, -rho * rho.ln(), epsilon = 1e-13);
        }
    }

    #[test]
    fn circle_fourier_symbols() {
        let (rho, n) = (0.4, 256);
        let s = layer(circle(rho, n));
        let ts: Vec<f64> = (0..n).map(|j| crate::curves::parameter(j, n)).collect();
        for k in [1usize, 2, 5, 17, 60] {
            let density = DVector::from_iterator(n, ts.iter().map(|t| (k as f64 * t).cos()));
            let image = s.apply(&density);
            let symbol = rho / (2.0 * k as f64);
            for (v, d) in image.iter().zip(density.iter()) {
                assert_abs_diff_eq!(*v, symbol * d, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn symmetric_after_dividing_by_speeds() {
        let s = layer(ellipse(1.9, 1.1, 128).unwrap());
        let speeds = s.grid().curve().speeds();
        let m = s.matrix();
        let sym = DMatrix::from_fn(128, 128, |i, j| m[(i, j)] / speeds[j]);
        assert!((&sym - sym.transpose()).norm() <= 1e-12 * sym.norm());
    }

    #[test]
    fn shell_theorem_outside_a_circle() {
        let rho = 0.3;
        let grid = BoundaryGrid::new(circle(rho, 64));
        let pts = [C64::new(0.7, 0.1), C64::new(-0.2, -0.9)];
        let vals = single_layer_potential(&grid, &DVector::from_element(64, 1.0), &pts);
        for (p, v) in pts.iter().zip(vals) {
            assert_abs_diff_eq!(v, -rho * p.norm().ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn point_source_representation() {
        // a density with the trace of G(x - x0), x0 inside, reproduces G
        // outside the curve
        let s = LayerSolver::new(BoundaryGrid::new(ellipse(0.4, 0.3, 128).unwrap())).unwrap();
        let x0 = C64::new(0.05, -0.02);
        let mut trace = DVector::from_iterator(128, s.grid().nodes().iter().map(|&x| fundamental_solution(x - x0)));
        // exterior uniqueness needs matching total mass: G has mass one
        let e = &s.equilibrium().density;
        let c = (1.0 - s.grid().total_mass(&s.density(&trace))) / s.grid().total_mass(e);
        trace += DVector::from_element(128, c * s.equilibrium().constant_trace);
        let density = s.density(&trace);
        let p = C64::new(1.5, 0.7);
        let v = single_layer_potential(s.grid(), &density, &[p])[0];
        assert_abs_diff_eq!(v, fundamental_solution(p - x0), epsilon = 1e-10);
    }

    #[test]
    fn circle_capacity() {
        let eq = equilibrium(&layer(circle(0.4, 256))).unwrap();
        assert_abs_diff_eq!(eq.capacity, 0.4, epsilon = 1e-8);
        for v in eq.density.iter() {
            assert_abs_diff_eq!(*v, 1.0 / (2.0 * PI * 0.4), epsilon = 1e-10);
        }
    }

    #[test]
    fn ellipse_capacity_is_mean_semi_axis() {
        let s = 0.9 / 3.8;
        let eq = equilibrium(&layer(ellipse(1.9, 1.1, 256).unwrap().scaled(s))).unwrap();
        assert_abs_diff_eq!(eq.capacity, 1.5 * s, epsilon = 1e-10);
    }

    #[test]
    fn equilibrium_density_follows_the_map() {
        let map = LaurentMap::benchmark_cavity().scaled(0.2);
        let eq = equilibrium(&layer(from_laurent(&map, 256).unwrap())).unwrap();
        assert_abs_diff_eq!(eq.capacity, 0.1, epsilon = 1e-10);
        for j in 0..256 {
            let z = C64::from_polar(1.0, crate::curves::parameter(j, 256));
            let want = 1.0 / (2.0 * PI * map.derivative(z).norm());
            assert_abs_diff_eq!(eq.density[j], want, epsilon = 1e-8);
        }
    }

    #[test]
    fn unit_capacity_is_reported() {
        assert!(matches!(equilibrium(&layer(circle(1.0, 64))), Err(Error::CapacityOne)));
    }

    #[test]
    fn crossing_curves_are_rejected() {
        let a = BoundaryGrid::new(circle(0.4, 64));
        let b = BoundaryGrid::new(ellipse(0.6, 0.2, 64).unwrap());
        assert!(matches!(cross_layer(&a, &b), Err(Error::Geometry(_))));
    }

    fn annulus(n: usize) -> (LayerSolver, SingleLayerMatrix) {
        let outer = LayerSolver::new(BoundaryGrid::new(circle(0.4, n))).unwrap();
        (outer, layer(circle(0.1, n)))
    }

    #[test]
    fn constant_datum_leaves_the_cavity_unseen() {
        let (outer, inner) = annulus(128);
        let sol = CoupledSolver::new(outer.layer(), &inner).unwrap().solve(&DVector::from_element(128, 1.0));
        assert!(sol.inner_density.amax() < 1e-10);
        assert_abs_diff_eq!(sol.constant, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn odd_datum_gives_zero_cavity_constant() {
        let (outer, inner) = annulus(128);
        let f = DVector::from_iterator(128, outer.grid().nodes().iter().map(|z| z.re));
        let sol = CoupledSolver::new(outer.layer(), &inner).unwrap().solve(&f);
        assert_abs_diff_eq!(sol.constant, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn annulus_dirichlet_to_neumann_difference() {
        let (big, small) = (0.4, 0.1);
        let (outer, inner) = annulus(128);
        let solver = CoupledSolver::new(outer.layer(), &inner).unwrap();
        let f = DVector::from_iterator(128, outer.grid().nodes().iter().map(|z| C64::new(z.re / big, 0.0)));
        let incident = real_times_complex(solver.outer_to_inner(), &outer.density_complex(&f));
        let (_, diff) = solver.solve_scattered(&incident);
        let factor = 2.0 * small * small / (big * (big * big - small * small));
        for (d, fv) in diff.iter().zip(f.iter()) {
            assert_abs_diff_eq!(d.re, factor * fv.re, epsilon = 1e-10);
        }
    }

    #[test]
    fn annulus_measurement_entry() {
        let (big, small) = (0.4, 0.1);
        let (outer, inner) = annulus(128);
        let basis = build_basis(outer.grid(), outer.equilibrium(), 1, C64::new(0.0, 0.0)).unwrap();
        let r = assemble_measurement(&outer, Some(&inner), &basis, 1.0).unwrap();
        let want = 4.0 * PI * big * big * small * small / (big * big - small * small);
        assert_abs_diff_eq!(r.entries[(0, 1)].re, want, epsilon = 1e-10);
        assert_abs_diff_eq!(r.entries[(0, 1)].im, 0.0, epsilon = 1e-12);
        assert!(r.entries[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn no_cavity_means_zero_measurement() {
        let outer = LayerSolver::new(BoundaryGrid::new(circle(0.4, 64))).unwrap();
        let basis = build_basis(outer.grid(), outer.equilibrium(), 3, C64::new(0.1, 0.0)).unwrap();
        let r = assemble_measurement(&outer, None, &basis, 1.0).unwrap();
        assert_eq!(r.entries, DMatrix::zeros(6, 6));
    }
}
