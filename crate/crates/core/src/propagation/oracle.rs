//! Brute-force reference propagation, independent of the superoperator
//! machinery: the Lindblad right-hand side is evaluated on matrices and
//! integrated with fixed-step RK4.

use super::{FloquetSystem, SamplePhase};
use crate::ode::rk4;
use crate::quantum::{devectorize, vectorize, ComplexMatrix, Dissipators};
use crate::{Result, C64};

/// `dρ/dt` for a constant Hamiltonian, evaluated directly on `ρ`.
pub fn lindblad_rhs_direct(h: &ComplexMatrix, diss: &Dissipators, rho: &ComplexMatrix) -> ComplexMatrix {
    let mi = C64::new(0.0, -1.0);
    let mut out = (h * rho - rho * h).scale(mi);
    for ch in &diss.damping {
        let s = &ch.operator;
        let sd = s.adjoint();
        let n = &sd * s;
        let term = (s * rho * sd).scale(C64::new(2.0, 0.0)) - &n * rho - rho * &n;
        out = out + term.scale(C64::new(0.5 * ch.rate, 0.0));
    }
    for ch in &diss.dephasing {
        let p = &ch.operator;
        let term = (p * rho * p).scale(C64::new(2.0, 0.0)) - p * rho - rho * p;
        out = out + term.scale(C64::new(ch.rate, 0.0));
    }
    out
}

/// One-period propagator from RK4 on each basis matrix, `steps` per half.
pub fn rk4_monodromy<S: FloquetSystem + ?Sized>(
    system: &S,
    phase: SamplePhase,
    steps: usize,
) -> Result<ComplexMatrix> {
    let d = system.hilbert_dim();
    let t = system.period();
    let diss = system.dissipators();
    let halves = [system.hamiltonian(0.25 * t), system.hamiltonian(0.75 * t)];
    let order = match phase {
        SamplePhase::PeriodEnd => [0, 1],
        SamplePhase::AfterProbe => [1, 0],
    };
    let n = d * d;
    let mut cols = Vec::with_capacity(n);
    for c in 0..n {
        let mut y = vec![C64::new(0.0, 0.0); n];
        y[c] = C64::new(1.0, 0.0);
        for &half in &order {
            let h = &halves[half];
            let mut f = |_t: f64, y: &[C64], dy: &mut [C64]| {
                let rho = devectorize(y).expect("square");
                let r = lindblad_rhs_direct(h, &diss, &rho);
                dy.copy_from_slice(vectorize(&r).as_slice());
            };
            rk4(&mut f, 0.0, 0.5 * t, &mut y, steps);
        }
        cols.push(y);
    }
    Ok(ComplexMatrix::from_fn(n, |i, j| cols[j][i]))
}
