use crate::model::TwoLevelParams;
use crate::ode::{AdaptiveOptions, Dopri5};
use crate::quantum::{ComplexMatrix, DensityMatrix};
use crate::{Error, Result, C64};

/// Resonant Bloch variables
/// `U = [ρ00−ρ11+ρ10−ρ01]/2`, `V = [ρ10+ρ01]/2`, `W = [ρ00−ρ11−ρ10+ρ01]/2`.
///
/// With this orientation the equations
/// `dU/dt = γ10/2 − (γ10+γ1′)U/2 + iΩp(t)U − (γ10−γ1′)W/2` (and the mirror
/// one for `W`) follow from the Lindblad equation, the ground state is
/// `U = W = 1/2`, and `ρ11 = 1/2 − Re U`, `Im ρ10 = Im U`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochComponents {
    pub u: C64,
    pub v: C64,
    pub w: C64,
}

impl BlochComponents {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let (r00, r11, r10, r01) = (rho.get(0, 0), rho.get(1, 1), rho.get(1, 0), rho.get(0, 1));
        Self {
            u: 0.5 * (r00 - r11 + r10 - r01),
            v: 0.5 * (r10 + r01),
            w: 0.5 * (r00 - r11 - r10 + r01),
        }
    }

    pub fn rho11(&self) -> f64 {
        0.5 - self.u.re
    }

    pub fn im_rho10(&self) -> f64 {
        self.u.im
    }

    /// Reconstruct ρ using `tr ρ = 1`.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        let pop = self.u + self.w; // ρ00 − ρ11
        let coh = self.u - self.w; // ρ10 − ρ01
        let r00 = 0.5 * (1.0 + pop);
        let r11 = 0.5 * (1.0 - pop);
        let r10 = self.v + 0.5 * coh;
        let r01 = self.v - 0.5 * coh;
        DensityMatrix::new(ComplexMatrix::from_row_slice(&[r00, r01, r10, r11])?)
    }
}

#[derive(Clone, Debug)]
pub struct BlochTrace {
    pub times: Vec<f64>,
    pub components: Vec<BlochComponents>,
    pub period: f64,
    pub samples_per_period: usize,
}

impl BlochTrace {
    /// Samples at whole periods `kT`.
    pub fn stroboscopic(&self) -> impl Iterator<Item = (f64, &BlochComponents)> {
        self.times.iter().copied().zip(self.components.iter()).step_by(self.samples_per_period)
    }

    /// Mean of `ρ11` over the last `periods` full periods (left-point rule,
    /// exact for band-limited periodic signals).
    pub fn mean_rho11_last(&self, periods: usize) -> f64 {
        let m = periods * self.samples_per_period;
        let end = self.components.len() - 1;
        let start = end.saturating_sub(m);
        let slice = &self.components[start..end];
        slice.iter().map(|c| c.rho11()).sum::<f64>() / slice.len() as f64
    }
}

/// Integrate the resonant Bloch equations from the ground state with the
/// square-wave probe, sampling `samples_per_period` times per period.
pub fn integrate_bloch_resonant(
    params: &TwoLevelParams,
    t_end: f64,
    reltol: f64,
    samples_per_period: usize,
) -> Result<BlochTrace> {
    params.validate()?;
    if params.detuning != 0.0 {
        return Err(Error::Validation("Bloch oracle is resonant only (Δ = 0)".into()));
    }
    if samples_per_period == 0 || !samples_per_period.is_multiple_of(2) {
        return Err(Error::Validation("samples_per_period must be even and positive".into()));
    }
    let train = params.probe_train();
    let period = train.period();
    let g10 = params.gamma10;
    let gp = params.gamma1_prime();
    let n_periods = (t_end / period * (1.0 + 1e-12)).floor() as usize;
    let dt = period / samples_per_period as f64;

    let mut stepper = Dopri5::new(3, AdaptiveOptions::new(reltol))?;
    let mut y = vec![C64::new(0.0, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 0.0)];
    let pack = |y: &[C64]| BlochComponents { v: y[0], u: y[1], w: y[2] };
    let mut times = vec![0.0];
    let mut components = vec![pack(&y)];
    let i = C64::new(0.0, 1.0);
    for k in 0..n_periods * samples_per_period {
        let t0 = k as f64 * dt;
        let t1 = (k + 1) as f64 * dt;
        // samples per half are whole, so the drive is constant on [t0, t1)
        let amp = train.value(0.5 * (t0 + t1));
        let mut f = |_t: f64, y: &[C64], dy: &mut [C64]| {
            let (v, u, w) = (y[0], y[1], y[2]);
            dy[0] = -gp * v;
            dy[1] = 0.5 * g10 - 0.5 * (g10 + gp) * u + i * amp * u - 0.5 * (g10 - gp) * w;
            dy[2] = 0.5 * g10 - 0.5 * (g10 + gp) * w - i * amp * w - 0.5 * (g10 - gp) * u;
        };
        stepper.integrate(&mut f, t0, t1, &mut y)?;
        times.push(t1);
        components.push(pack(&y));
    }
    Ok(BlochTrace { times, components, period, samples_per_period })
}
