use nalgebra::{DMatrix, DVector};

use super::{build_monodromy_at, FloquetSystem, MonodromyMap, SamplePhase};
use crate::quantum::{devectorize, ComplexMatrix, DensityMatrix, Superoperator};
use crate::{Error, Result, C64};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_PERIODS: usize = 1_000_000;

const RESIDUAL_TOL: f64 = 1e-10;
// singular values of E − I below this (relative) count as null directions
const NULL_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SteadyStateMethod {
    FixedPoint,
    Evolution,
}

#[derive(Clone, Debug)]
pub struct SteadyStateResult {
    pub rho: DensityMatrix,
    pub method: SteadyStateMethod,
    pub iterations: usize,
    /// `‖E(ρ) − ρ‖_F`
    pub residual: f64,
}

fn residual(e: &Superoperator, v: &DVector<C64>) -> f64 {
    (e.apply_vec(v) - v).norm()
}

/// Solve `(E − I)v = 0` with the first row replaced by `tr ρ = 1`.
///
/// The rows of `E − I` belonging to diagonal entries sum to zero for a
/// trace-preserving map, so dropping the `(0,0)` row loses nothing.
pub fn steady_state_fixed_point(e: &MonodromyMap) -> Result<SteadyStateResult> {
    let s = e.superoperator();
    let d = s.hilbert_dim();
    let n = d * d;
    let mut a: DMatrix<C64> = s.matrix().as_matrix() - DMatrix::identity(n, n);

    let sv = a.clone().singular_values();
    let top = sv.max().max(1.0);
    let null = sv.iter().filter(|&&x| x <= NULL_TOL * top).count();
    if null > 1 {
        return Err(Error::Ambiguous(format!("{null} independent fixed points")));
    }

    let tr = Superoperator::trace_row(d);
    a.set_row(0, &tr.transpose());
    let mut b = DVector::zeros(n);
    b[0] = C64::new(1.0, 0.0);
    let v = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular("fixed-point system is singular".into()))?;
    let rho = DensityMatrix::from_unnormalized(devectorize(v.as_slice())?)?;
    let res = residual(s, &rho.vectorize());
    if !(res <= RESIDUAL_TOL) {
        return Err(Error::Numeric(format!("fixed-point residual {res:e} above {RESIDUAL_TOL:e}")));
    }
    Ok(SteadyStateResult { rho, method: SteadyStateMethod::FixedPoint, iterations: 1, residual: res })
}

/// Iterate `ρ ← E(ρ)` until successive states differ by less than `tol`.
pub fn steady_state_by_evolution(
    e: &MonodromyMap,
    rho0: &DensityMatrix,
    tol: f64,
    max_periods: usize,
) -> Result<SteadyStateResult> {
    if !(tol > 0.0) {
        return Err(Error::Validation(format!("tol = {tol} must be positive")));
    }
    let s = e.superoperator();
    let mut v = rho0.vectorize();
    let mut last = f64::INFINITY;
    for k in 1..=max_periods {
        let next = s.apply_vec(&v);
        last = (&next - &v).norm();
        v = next;
        if !last.is_finite() {
            return Err(Error::Numeric("evolution diverged".into()));
        }
        if last < tol {
            let rho = DensityMatrix::from_unnormalized(devectorize(v.as_slice())?)?;
            let res = residual(s, &rho.vectorize());
            return Ok(SteadyStateResult { rho, method: SteadyStateMethod::Evolution, iterations: k, residual: res });
        }
    }
    Err(Error::Convergence { iterations: max_periods, residual: last })
}

/// `[[L, I], [0, 0]]`: its exponential carries `∫₀ʰ e^{Ls} ds` in the top-right block.
fn integral_of_exp(l: &Superoperator, h: f64) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let n = l.matrix().dim();
    let mut big = DMatrix::<C64>::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(l.matrix().as_matrix());
    big.view_mut((0, n), (n, n)).fill_with_identity();
    let x = crate::quantum::matexp(&ComplexMatrix::new(big)?, h)?.into_inner();
    Ok((x.view((0, 0), (n, n)).into_owned(), x.view((0, n), (n, n)).into_owned()))
}

/// Time average of the periodic steady state over one full period.
///
/// Closed-form rotating-frame results such as the resonant Bessel-sum
/// formula describe this average rather than a stroboscopic sample.
pub fn period_averaged_steady_state<S: FloquetSystem + ?Sized>(system: &S) -> Result<DensityMatrix> {
    let t = system.period();
    let rho0 = steady_state_fixed_point(&build_monodromy_at(system, SamplePhase::PeriodEnd)?)?.rho;
    let [l1, l2] = system.half_generators()?;
    let (e1, i1) = integral_of_exp(&l1, 0.5 * t)?;
    let (_, i2) = integral_of_exp(&l2, 0.5 * t)?;
    let v0 = rho0.vectorize();
    let v_half = &e1 * &v0;
    let avg = (&i1 * &v0 + &i2 * &v_half) / C64::new(t, 0.0);
    DensityMatrix::from_unnormalized(devectorize(avg.as_slice())?)
}
