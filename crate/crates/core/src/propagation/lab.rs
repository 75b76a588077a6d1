use std::f64::consts::PI;

use super::StroboscopicTrace;
use crate::model::LabFrameParams;
use crate::ode::{AdaptiveOptions, Dopri5};
use crate::quantum::{devectorize, DensityMatrix};
use crate::{Error, Result, C64};

/// Step cap in steps per carrier cycle 2π/ωp.
pub const LAB_STEPS_PER_CARRIER: f64 = 20.0;

/// Time derivative of the column-stacked two-level state under the
/// non-rotating-wave Hamiltonian.
pub fn lab_frame_rhs(p: &LabFrameParams, t: f64, y: &[C64], dy: &mut [C64]) {
    rhs_with_amplitude(p, p.base.probe_train().value(t), t, y, dy)
}

// the envelope is passed in so each half period sees a smooth right-hand side up to its edges
fn rhs_with_amplitude(p: &LabFrameParams, amp: f64, t: f64, y: &[C64], dy: &mut [C64]) {
    let g = (C64::from_polar(1.0, 2.0 * p.carrier * t) + 1.0) * (0.5 * amp);
    let d = p.base.detuning;
    let (h00, h01, h10, h11) = (C64::from(-0.5 * d), -g, -g.conj(), C64::from(0.5 * d));
    let (r00, r10, r01, r11) = (y[0], y[1], y[2], y[3]);
    let mi = C64::new(0.0, -1.0);
    // −i[H, ρ]
    let c00 = h01 * r10 - r01 * h10;
    let c01 = h00 * r01 + h01 * r11 - r00 * h01 - r01 * h11;
    let c10 = h10 * r00 + h11 * r10 - r10 * h00 - r11 * h10;
    let c11 = h10 * r01 - r10 * h01;
    let g = p.base.gamma10;
    let coh = 0.5 * g + p.base.gamma1_phi;
    dy[0] = mi * c00 + r11 * g;
    dy[1] = mi * c10 - r10 * coh;
    dy[2] = mi * c01 - r01 * coh;
    dy[3] = mi * c11 - r11 * g;
}

/// Adaptive integration of the lab-frame Lindblad equation from `t = 0`,
/// sampled at every period end `kT ≤ t_end`.
pub fn integrate_lab_frame(
    p: &LabFrameParams,
    rho0: &DensityMatrix,
    t_end: f64,
    reltol: f64,
) -> Result<StroboscopicTrace> {
    if !(reltol > 1e-12 && reltol < 1e-3) {
        return Err(Error::Validation(format!("reltol {reltol} outside (1e-12, 1e-3)")));
    }
    if rho0.dim() != 2 {
        return Err(Error::Dimension(format!("lab-frame state must be 2x2, got {}", rho0.dim())));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::Validation(format!("t_end = {t_end}")));
    }
    let period = p.base.period();
    let n = (t_end / period * (1.0 + 1e-12)).floor() as usize;
    let opts = AdaptiveOptions::new(reltol).with_max_step(2.0 * PI / (LAB_STEPS_PER_CARRIER * p.carrier));
    let mut stepper = Dopri5::new(4, opts)?;
    let train = p.base.probe_train();
    let (on, off) = (train.amp_first_half(), train.amp_second_half());

    let mut y: Vec<C64> = rho0.vectorize().as_slice().to_vec();
    let mut times = vec![0.0];
    let mut states = vec![rho0.clone()];
    for k in 0..n {
        let t0 = k as f64 * period;
        let mid = t0 + 0.5 * period;
        let t1 = (k + 1) as f64 * period;
        stepper.integrate(&mut |t: f64, y: &[C64], dy: &mut [C64]| rhs_with_amplitude(p, on, t, y, dy), t0, mid, &mut y)?;
        stepper.integrate(&mut |t: f64, y: &[C64], dy: &mut [C64]| rhs_with_amplitude(p, off, t, y, dy), mid, t1, &mut y)?;
        times.push(t1);
        states.push(DensityMatrix::from_unnormalized(devectorize(&y)?)?);
    }
    Ok(StroboscopicTrace { times, states })
}
