use nalgebra::DVector;

use super::{devectorize, matexp, vectorize, ComplexMatrix};
use crate::{Error, Result, C64};

/// Linear map on column-stacked `d×d` matrices, stored as a `d²×d²` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    d: usize,
    m: ComplexMatrix,
}

impl Superoperator {
    pub fn from_matrix(d: usize, m: ComplexMatrix) -> Result<Self> {
        if m.dim() != d * d {
            return Err(Error::Dimension(format!(
                "superoperator on d={d} needs {}x{} entries, got {}",
                d * d,
                d * d,
                m.dim()
            )));
        }
        Ok(Self { d, m })
    }

    pub fn zero(d: usize) -> Self {
        Self { d, m: ComplexMatrix::zeros(d * d) }
    }

    pub fn identity(d: usize) -> Self {
        Self { d, m: ComplexMatrix::identity(d * d) }
    }

    /// `ρ ↦ A ρ B`, i.e. `Bᵀ ⊗ A`.
    pub fn sandwich(a: &ComplexMatrix, b: &ComplexMatrix) -> Self {
        assert_eq!(a.dim(), b.dim());
        Self { d: a.dim(), m: b.transpose().kron(a) }
    }

    /// `ρ ↦ A ρ`.
    pub fn left(a: &ComplexMatrix) -> Self {
        Self::sandwich(a, &ComplexMatrix::identity(a.dim()))
    }

    /// `ρ ↦ ρ B`.
    pub fn right(b: &ComplexMatrix) -> Self {
        Self::sandwich(&ComplexMatrix::identity(b.dim()), b)
    }

    pub fn hilbert_dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn apply_vec(&self, v: &DVector<C64>) -> DVector<C64> {
        self.m.as_matrix() * v
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(rho.dim(), self.d);
        devectorize(self.apply_vec(&vectorize(rho)).as_slice()).expect("dimension checked")
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.d, other.d);
        Self { d: self.d, m: &self.m * &other.m }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self { d: self.d, m: self.m.scale(s) }
    }

    /// `exp(t · self)`.
    pub fn exp(&self, t: f64) -> Result<Self> {
        Ok(Self { d: self.d, m: matexp(&self.m, t)? })
    }

    /// Linear functional `ρ ↦ tr ρ` as a row over the vectorized state.
    pub(crate) fn trace_row(d: usize) -> DVector<C64> {
        let mut r = DVector::zeros(d * d);
        for i in 0..d {
            r[i + i * d] = C64::new(1.0, 0.0);
        }
        r
    }

    /// Largest `|tr L(E_ij)|` over the matrix-unit basis; zero for a trace
    /// preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let row = Self::trace_row(self.d);
        let prod = row.transpose() * self.m.as_matrix();
        prod.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub(crate) fn add(&self, other: &Self) -> Self {
        Self { d: self.d, m: &self.m + &other.m }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub rate: f64,
    pub operator: ComplexMatrix,
}

impl Channel {
    pub fn new(rate: f64, operator: ComplexMatrix) -> Self {
        Self { rate, operator }
    }
}

/// Damping channels use lowering operators `σ_{j−1,j}`, dephasing channels
/// projectors `σ_jj`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dissipators {
    pub damping: Vec<Channel>,
    pub dephasing: Vec<Channel>,
}

/// `L(ρ) = −i[h,ρ] + Σ (γ/2)(2σρσ† − σ†σρ − ρσ†σ) + Σ γφ(2PρP − Pρ − ρP)`.
///
/// Note the damping terms carry γ/2 while the dephasing terms carry γφ.
pub fn lindblad_generator(h: &ComplexMatrix, diss: &Dissipators) -> Result<Superoperator> {
    let d = h.dim();
    if !h.is_finite() {
        return Err(Error::Numeric("Hamiltonian has non-finite entries".into()));
    }
    let herm = h.hermiticity_error();
    if herm > 1e-12 * (1.0 + h.norm_1()) {
        return Err(Error::Validation(format!("Hamiltonian is not Hermitian ({herm:e})")));
    }
    let mi = C64::new(0.0, -1.0);
    let mut l = Superoperator::left(h)
        .add(&Superoperator::right(h).scaled(C64::new(-1.0, 0.0)))
        .scaled(mi);

    let mut push = |ch: &Channel, pref: f64| -> Result<()> {
        if !(ch.rate.is_finite() && ch.rate >= 0.0) {
            return Err(Error::Validation(format!("rate {} must be finite and ≥ 0", ch.rate)));
        }
        if ch.operator.dim() != d {
            return Err(Error::Dimension(format!(
                "jump operator is {}x{}, Hamiltonian {d}x{d}",
                ch.operator.dim(),
                ch.operator.dim()
            )));
        }
        if ch.rate == 0.0 {
            return Ok(());
        }
        let s = &ch.operator;
        let sd = s.adjoint();
        let n = &sd * s;
        let term = Superoperator::sandwich(s, &sd)
            .scaled(C64::new(2.0, 0.0))
            .add(&Superoperator::left(&n).scaled(C64::new(-1.0, 0.0)))
            .add(&Superoperator::right(&n).scaled(C64::new(-1.0, 0.0)));
        l = l.add(&term.scaled(C64::new(pref * ch.rate, 0.0)));
        Ok(())
    };
    for ch in &diss.damping {
        push(ch, 0.5)?;
    }
    for ch in &diss.dephasing {
        push(ch, 1.0)?;
    }
    Ok(l)
}
