//! Dense LU factorization with a 1-norm condition number estimate.

use log::warn;
use nalgebra::{ComplexField, DMatrix, DVector, Dyn, LU};

use crate::curves::C64;
use crate::error::{Error, Result};

/// Condition numbers above this are reported as ill-conditioned.
pub const CONDITION_WARNING: f64 = 1e12;

/// LU factors of a square matrix together with an estimate of `κ₁(A)`.
pub struct DenseLu<T: ComplexField<RealField = f64>> {
    lu: LU<T, Dyn, Dyn>,
    l: DMatrix<T>,
    u: DMatrix<T>,
    condition: f64,
}

impl<T: ComplexField<RealField = f64>> DenseLu<T> {
    /// Factorizes `a`. `what` names the system in error and warning messages.
    pub fn new(a: DMatrix<T>, what: &str) -> Result<Self> {
        assert!(a.is_square(), "{what}: matrix must be square");
        let norm1 = column_norm1(&a);
        let lu = a.lu();
        if !lu.is_invertible() {
            return Err(Error::SingularMatrix(format!("{what}: zero pivot")));
        }
        let l = lu.l();
        let u = lu.u();
        let mut out = DenseLu { lu, l, u, condition: f64::INFINITY };
        out.condition = norm1 * out.inverse_norm1_estimate();
        if !out.condition.is_finite() {
            return Err(Error::SingularMatrix(format!("{what}: infinite condition number")));
        }
        if out.condition > CONDITION_WARNING {
            warn!("{what}: condition number estimate {:.3e}", out.condition);
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    /// Estimated 1-norm condition number.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn is_ill_conditioned(&self) -> bool {
        self.condition > CONDITION_WARNING
    }

    pub fn solve(&self, b: &DVector<T>) -> DVector<T> {
        self.lu.solve(b).expect("factorization checked invertible")
    }

    pub fn solve_matrix(&self, b: &DMatrix<T>) -> DMatrix<T> {
        self.lu.solve(b).expect("factorization checked invertible")
    }

    /// Solves `Aᴴ x = b` with the stored factors.
    pub fn solve_adjoint(&self, b: &DVector<T>) -> DVector<T> {
        let y = self
            .u
            .ad_solve_upper_triangular(b)
            .expect("non-zero pivots");
        let mut z = self
            .l
            .ad_solve_lower_triangular(&y)
            .expect("unit diagonal");
        self.lu.p().inv_permute_rows(&mut z);
        z
    }

    // Hager's estimator of ‖A⁻¹‖₁.
    fn inverse_norm1_estimate(&self) -> f64 {
        let n = self.dim();
        let mut x = DVector::from_element(n, T::from_real(1.0 / n as f64));
        let mut est = 0.0;
        for iter in 0..5 {
            let y = self.solve(&x);
            let y_norm: f64 = y.iter().map(|v| v.clone().modulus()).sum();
            if iter > 0 && y_norm <= est {
                break;
            }
            est = y_norm;
            let xi = y.map(|v| {
                let m = v.clone().modulus();
                if m == 0.0 {
                    T::one()
                } else {
                    v.unscale(m)
                }
            });
            let z = self.solve_adjoint(&xi);
            let (j, zj) = z
                .iter()
                .map(|v| v.clone().modulus())
                .enumerate()
                .fold((0, 0.0), |acc, (i, m)| if m > acc.1 { (i, m) } else { acc });
            let ztx = z.dotc(&x).real();
            if iter > 0 && zj <= ztx {
                break;
            }
            x = DVector::zeros(n);
            x[j] = T::one();
        }
        est
    }
}

impl DenseLu<f64> {
    /// Solves with a complex right-hand side by splitting real and imaginary
    /// parts.
    pub fn solve_complex(&self, b: &DVector<C64>) -> DVector<C64> {
        let re = self.solve(&b.map(|z| z.re));
        let im = self.solve(&b.map(|z| z.im));
        DVector::from_fn(b.len(), |i, _| C64::new(re[i], im[i]))
    }
}

fn column_norm1<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.clone().modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Exact 1-norm condition number through an explicit inverse; for tests of
/// the estimator on small matrices.
#[cfg(test)]
pub(crate) fn exact_condition<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> f64 {
    let inv = a.clone().try_inverse().unwrap();
    column_norm1(a) * column_norm1(&inv)
}
