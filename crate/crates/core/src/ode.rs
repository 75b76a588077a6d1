//! Explicit integrators for complex-valued ODE systems.
//!
//! [`Dopri5`] is the adaptive Dormand–Prince 5(4) pair used for the
//! lab-frame and Bloch-equation runs; [`rk4`] is a fixed-step classical
//! scheme kept as an independent oracle for the monodromy map.

use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveOptions {
    pub reltol: f64,
    pub abstol: f64,
    pub max_step: f64,
}

impl AdaptiveOptions {
    pub fn new(reltol: f64) -> Self {
        Self { reltol, abstol: reltol * 1e-3, max_step: f64::INFINITY }
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th-order minus embedded 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Dormand–Prince 5(4) stepper with a remembered step size, so that
/// integrating piecewise between breakpoints does not restart from scratch.
pub struct Dopri5 {
    opts: AdaptiveOptions,
    h: Option<f64>,
    k: [Vec<C64>; 7],
    ytmp: Vec<C64>,
    ynew: Vec<C64>,
    pub steps: usize,
    pub rejected: usize,
}

impl Dopri5 {
    pub fn new(n: usize, opts: AdaptiveOptions) -> Result<Self> {
        if !(opts.reltol > 0.0 && opts.reltol.is_finite() && opts.abstol > 0.0) {
            return Err(Error::Validation(format!("bad tolerances {opts:?}")));
        }
        let z = vec![C64::new(0.0, 0.0); n];
        Ok(Self {
            opts,
            h: None,
            k: std::array::from_fn(|_| z.clone()),
            ytmp: z.clone(),
            ynew: z,
            steps: 0,
            rejected: 0,
        })
    }

    fn err_norm(&self, y: &[C64], h: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..y.len() {
            let mut e = C64::new(0.0, 0.0);
            for (s, &w) in E.iter().enumerate() {
                e += self.k[s][i] * w;
            }
            let sc = self.opts.abstol + self.opts.reltol * y[i].norm().max(self.ynew[i].norm());
            acc += (h * e.norm() / sc).powi(2);
        }
        (acc / y.len() as f64).sqrt()
    }

    /// Advance `y` from `t0` to exactly `t1` (`t1 ≥ t0`). The right-hand side
    /// must be smooth on the open interval.
    pub fn integrate<F>(&mut self, f: &mut F, t0: f64, t1: f64, y: &mut [C64]) -> Result<()>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let n = y.len();
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(());
        }
        let mut t = t0;
        f(t, y, &mut self.k[0]);
        let mut proposal = self.h.unwrap_or(0.01 * span).min(self.opts.max_step);
        loop {
            let mut h = proposal.min(self.opts.max_step);
            let last = t + h >= t1 - 1e-12 * span;
            if last {
                h = t1 - t;
            }
            if !last && h <= 1e-14 * t.abs().max(1.0) {
                return Err(Error::Stiffness { t });
            }
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for j in 0..s {
                        acc += self.k[j][i] * (h * A[s][j]);
                    }
                    if s == 6 {
                        self.ynew[i] = acc;
                    } else {
                        self.ytmp[i] = acc;
                    }
                }
                let arg = if s == 6 { &self.ynew } else { &self.ytmp };
                f(t + C[s] * h, arg, &mut self.k[s]);
            }
            let err = self.err_norm(y, h);
            if !err.is_finite() {
                return Err(Error::Numeric(format!("integrator produced non-finite state at t = {t}")));
            }
            if err <= 1.0 {
                self.steps += 1;
                y.copy_from_slice(&self.ynew);
                self.k.swap(0, 6);
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if last {
                    // a truncated final step says little about the natural step size
                    self.h = Some(proposal.max(h * fac).min(self.opts.max_step));
                    return Ok(());
                }
                t += h;
                proposal = h * fac;
            } else {
                self.rejected += 1;
                proposal = h * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            }
        }
    }
}

/// Classical fixed-step RK4 from `t0` to `t1` in `steps` equal steps.
pub fn rk4<F>(f: &mut F, t0: f64, t1: f64, y: &mut [C64], steps: usize)
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y.len();
    let h = (t1 - t0) / steps as f64;
    let z = C64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![z; n], vec![z; n], vec![z; n], vec![z; n], vec![z; n]);
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        f(t, y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        f(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        f(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + k3[i] * h;
        }
        f(t + h, &tmp, &mut k4);
        for i in 0..n {
            y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
    }
}
