//! Stroboscopic Floquet–Lindblad evolution.
//!
//! The drives are piecewise constant, so one period is the product of two
//! superoperator exponentials. The state is observed once per period at a
//! fixed phase of the cycle ([`SamplePhase`]).

mod lab;
pub mod oracle;
mod steady;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::model::{
    dissipators_three_level, dissipators_two_level, hamiltonian_three_level, hamiltonian_two_level,
    ThreeLevelParams, TwoLevelParams,
};
use crate::quantum::{lindblad_generator, ComplexMatrix, DensityMatrix, Dissipators, Superoperator};
use crate::{Error, Result};

pub use lab::{integrate_lab_frame, lab_frame_rhs, LAB_STEPS_PER_CARRIER};
pub use steady::{
    period_averaged_steady_state, steady_state_by_evolution, steady_state_fixed_point, SteadyStateMethod,
    SteadyStateResult, DEFAULT_MAX_PERIODS, DEFAULT_TOL,
};

/// Where in the cycle the stroboscopic samples are taken.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplePhase {
    /// at `t = kT + T/2`, right after the probe-on half
    #[default]
    AfterProbe,
    /// at `t = kT`, after the full on/off cycle
    PeriodEnd,
}

impl SamplePhase {
    /// Time of the first sample after `t = 0`, as a fraction of the period.
    pub fn offset_fraction(self) -> f64 {
        match self {
            Self::AfterProbe => 0.5,
            Self::PeriodEnd => 0.0,
        }
    }
}

impl std::str::FromStr for SamplePhase {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "after-probe" => Ok(Self::AfterProbe),
            "period-end" => Ok(Self::PeriodEnd),
            _ => Err(format!("unknown sample phase '{s}' (after-probe|period-end)")),
        }
    }
}

impl std::fmt::Display for SamplePhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::AfterProbe => "after-probe",
            Self::PeriodEnd => "period-end",
        })
    }
}

/// A periodically driven system with two constant halves per period.
pub trait FloquetSystem {
    fn hilbert_dim(&self) -> usize;
    fn period(&self) -> f64;
    fn hamiltonian(&self, t: f64) -> ComplexMatrix;
    fn dissipators(&self) -> Dissipators;

    /// Generators of the first and second half-period.
    fn half_generators(&self) -> Result<[Superoperator; 2]> {
        let t = self.period();
        let d = self.dissipators();
        Ok([
            lindblad_generator(&self.hamiltonian(0.25 * t), &d)?,
            lindblad_generator(&self.hamiltonian(0.75 * t), &d)?,
        ])
    }
}

impl FloquetSystem for TwoLevelParams {
    fn hilbert_dim(&self) -> usize {
        2
    }
    fn period(&self) -> f64 {
        TwoLevelParams::period(self)
    }
    fn hamiltonian(&self, t: f64) -> ComplexMatrix {
        hamiltonian_two_level(self, t)
    }
    fn dissipators(&self) -> Dissipators {
        dissipators_two_level(self)
    }
}

impl FloquetSystem for ThreeLevelParams {
    fn hilbert_dim(&self) -> usize {
        3
    }
    fn period(&self) -> f64 {
        ThreeLevelParams::period(self)
    }
    fn hamiltonian(&self, t: f64) -> ComplexMatrix {
        hamiltonian_three_level(self, t)
    }
    fn dissipators(&self) -> Dissipators {
        dissipators_three_level(self)
    }
}

/// One-period propagator between consecutive observation instants.
#[derive(Clone, Debug)]
pub struct MonodromyMap {
    e: Superoperator,
    /// propagation from `t = 0` to the first observation instant
    lead_in: Superoperator,
    period: f64,
    phase: SamplePhase,
}

impl MonodromyMap {
    pub fn superoperator(&self) -> &Superoperator {
        &self.e
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn phase(&self) -> SamplePhase {
        self.phase
    }

    pub fn hilbert_dim(&self) -> usize {
        self.e.hilbert_dim()
    }

    /// Time of the first observation instant.
    pub fn first_sample_time(&self) -> f64 {
        self.phase.offset_fraction() * self.period
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(self.e.apply(rho.matrix()))
    }

    /// Evolve a state given at `t = 0` to the first observation instant.
    pub fn lead_in(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(self.lead_in.apply(rho.matrix()))
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        let m = self.e.matrix().as_matrix().clone();
        let schur = nalgebra::Schur::try_new(m, 1e-15, 100_000)
            .ok_or_else(|| Error::Numeric("Schur decomposition did not converge".into()))?;
        let ev = schur
            .eigenvalues()
            .ok_or_else(|| Error::Numeric("eigenvalues unavailable".into()))?;
        Ok(ev.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }
}

/// Monodromy map observed right after the probe-on half.
pub fn build_monodromy<S: FloquetSystem + ?Sized>(system: &S) -> Result<MonodromyMap> {
    build_monodromy_at(system, SamplePhase::default())
}

pub fn build_monodromy_at<S: FloquetSystem + ?Sized>(system: &S, phase: SamplePhase) -> Result<MonodromyMap> {
    let t = system.period();
    let [l1, l2] = system.half_generators()?;
    let e1 = l1.exp(0.5 * t)?;
    let e2 = l2.exp(0.5 * t)?;
    let (e, lead_in) = match phase {
        SamplePhase::PeriodEnd => (e2.compose(&e1), Superoperator::identity(system.hilbert_dim())),
        SamplePhase::AfterProbe => (e1.compose(&e2), e1),
    };
    Ok(MonodromyMap { e, lead_in, period: t, phase })
}

/// States at consecutive observation instants.
#[derive(Clone, Debug)]
pub struct StroboscopicTrace {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl StroboscopicTrace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn rho11(&self) -> Vec<f64> {
        self.states.iter().map(|r| observables(r).rho11).collect()
    }
}

/// `ρ0` is the state at an observation instant; the trace holds `n + 1` states.
pub fn evolve_stroboscopic(e: &MonodromyMap, rho0: &DensityMatrix, n: usize) -> Result<StroboscopicTrace> {
    let t0 = e.first_sample_time();
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut v: DVector<_> = rho0.vectorize();
    times.push(t0);
    states.push(rho0.clone());
    for k in 1..=n {
        v = e.superoperator().apply_vec(&v);
        times.push(t0 + k as f64 * e.period());
        states.push(DensityMatrix::devectorize(&v)?);
    }
    Ok(StroboscopicTrace { times, states })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub rho11: f64,
    /// `Im ⟨1|ρ|0⟩`, positive for absorption
    pub im_rho10: f64,
}

pub fn observables(rho: &DensityMatrix) -> Observables {
    Observables { rho11: rho.get(1, 1).re, im_rho10: rho.get(1, 0).im }
}

/// Fixed-point steady state observed at the given phase.
pub fn steady_observables<S: FloquetSystem + ?Sized>(system: &S, phase: SamplePhase) -> Result<Observables> {
    let e = build_monodromy_at(system, phase)?;
    Ok(observables(&steady_state_fixed_point(&e)?.rho))
}
