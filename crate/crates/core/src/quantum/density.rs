use nalgebra::{DMatrix, DVector};

use super::matrix::exact_sqrt;
use super::ComplexMatrix;
use crate::{Error, Result, C64};

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-12;
    pub const PSD_TOL: f64 = 1e-10;

    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::Numeric("density matrix has non-finite entries".into()));
        }
        let herm = m.hermiticity_error();
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::Validation(format!("not Hermitian (‖ρ−ρ†‖∞ = {herm:e})")));
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > Self::TRACE_TOL {
            return Err(Error::Validation(format!("trace {tr} ≠ 1")));
        }
        let rho = Self(m);
        let lo = rho.min_eigenvalue();
        if lo < -Self::PSD_TOL {
            return Err(Error::Validation(format!("negative eigenvalue {lo:e}")));
        }
        Ok(rho)
    }

    /// `|k⟩⟨k|`.
    pub fn pure(d: usize, k: usize) -> Self {
        assert!(k < d);
        Self(super::ket_bra(d, k, k))
    }

    pub fn ground(d: usize) -> Self {
        Self::pure(d, 0)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(ComplexMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        // symmetrize first so the Hermitian solver sees exactly Hermitian input
        let m = self.0.as_matrix();
        let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn vectorize(&self) -> DVector<C64> {
        vectorize(&self.0)
    }

    /// Inverse of [`DensityMatrix::vectorize`], validating the result.
    pub fn devectorize(v: &DVector<C64>) -> Result<Self> {
        Self::new(devectorize(v.as_slice())?)
    }

    /// Rescale to unit trace and drop the anti-Hermitian rounding residue
    /// before validating. Used on fixed-point null vectors.
    pub fn from_unnormalized(m: ComplexMatrix) -> Result<Self> {
        let tr = m.trace();
        if tr.norm() < 1e-300 || !tr.re.is_finite() {
            return Err(Error::Numeric(format!("cannot normalize matrix with trace {tr}")));
        }
        let m = m.scale(tr.inv());
        let h = (&m + &m.adjoint()).scale(C64::new(0.5, 0.0));
        Self::new(h)
    }
}

/// Column-stacking vectorization: entry `(i, j)` lands at `i + j·d`.
pub fn vectorize(m: &ComplexMatrix) -> DVector<C64> {
    let a = m.as_matrix();
    DVector::from_column_slice(a.as_slice())
}

pub fn devectorize(v: &[C64]) -> Result<ComplexMatrix> {
    let d = exact_sqrt(v.len())
        .filter(|&d| d > 0)
        .ok_or_else(|| Error::Dimension(format!("length {} is not a perfect square", v.len())))?;
    ComplexMatrix::new(DMatrix::from_column_slice(d, d, v))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn random_density(d: usize, entries: &[(f64, f64)]) -> DensityMatrix {
        // A·A† / tr is always a valid state
        let a = ComplexMatrix::from_fn(d, |i, j| C64::new(entries[i * d + j].0, entries[i * d + j].1));
        DensityMatrix::from_unnormalized(&a * &a.adjoint()).unwrap()
    }

    #[test]
    fn ground_state_vectorizes_in_column_order() {
        let v = DensityMatrix::ground(2).vectorize();
        assert_eq!(v.as_slice(), &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        // (1, 0) sits at index 1, (0, 1) at index 2
        let m = super::super::ket_bra(2, 1, 0);
        assert_eq!(vectorize(&m)[1], C64::new(1.0, 0.0));
    }

    #[test]
    fn devectorize_rejects_non_square_lengths() {
        assert!(matches!(devectorize(&[C64::new(1.0, 0.0); 5]), Err(Error::Dimension(_))));
        assert!(matches!(devectorize(&[]), Err(Error::Dimension(_))));
    }

    #[test]
    fn validation() {
        let mut m = ComplexMatrix::identity(2).scale(C64::new(0.5, 0.0));
        assert!(DensityMatrix::new(m.clone()).is_ok());
        m[(0, 1)] = C64::new(0.0, 0.1);
        assert!(DensityMatrix::new(m.clone()).is_err(), "non-Hermitian");
        m[(1, 0)] = C64::new(0.0, -0.1);
        assert!(DensityMatrix::new(m.clone()).is_ok());
        let over = ComplexMatrix::from_diagonal(&[C64::new(1.2, 0.0), C64::new(-0.2, 0.0)]);
        assert!(DensityMatrix::new(over).is_err(), "negative eigenvalue");
        let trace2 = ComplexMatrix::identity(2);
        assert!(DensityMatrix::new(trace2).is_err());
        assert!((DensityMatrix::maximally_mixed(3).min_eigenvalue() - 1.0 / 3.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn roundtrip_is_exact(entries in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 9)) {
            let rho = random_density(3, &entries);
            let back = DensityMatrix::devectorize(&rho.vectorize()).unwrap();
            prop_assert_eq!(back, rho);
        }
    }
}
