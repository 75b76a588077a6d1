//! Least-squares fits of absorption spectra to the QI and ATS lineshapes
//! and AIC-based model weights.

mod optimize;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lineshape::{ats_absorption, qi_absorption, AtsParams, QiParams};
use crate::scans::Spectrum;
use crate::{Error, Result};

pub use optimize::{levenberg_marquardt, nelder_mead, LmOptions, Minimum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Qi,
    Ats,
}

impl Model {
    /// Number of free parameters.
    pub fn k(self) -> usize {
        match self {
            Self::Qi => 4,
            Self::Ats => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Qi => "qi",
            Self::Ats => "ats",
        }
    }

    /// Model value; the QI singularity maps to NaN so the optimizer rejects it.
    pub fn eval(self, delta: f64, p: &[f64]) -> f64 {
        match self {
            Self::Qi => qi_absorption(delta, &QiParams::from_slice(p)).map(|e| e.value).unwrap_or(f64::NAN),
            Self::Ats => ats_absorption(delta, &AtsParams::from_slice(p)),
        }
    }
}

/// Detuning range and sample spacing for the central-window fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub delta_min: f64,
    pub delta_max: f64,
    pub spacing: f64,
}

impl FitWindow {
    pub const DEFAULT_HALF_WIDTH: f64 = 4.0;
    pub const DEFAULT_SPACING: f64 = 0.05;
    pub const MIN_POINTS: usize = 20;

    pub fn symmetric(half_width: f64, spacing: f64) -> Self {
        Self { delta_min: -half_width, delta_max: half_width, spacing }
    }

    /// `|Δ| ≤ min(4, 1/τ)`, spacing 0.05.
    pub fn default_for(tau: f64) -> Self {
        Self::symmetric(Self::DEFAULT_HALF_WIDTH.min(1.0 / tau), Self::DEFAULT_SPACING)
    }

    /// The window must straddle Δ = 0 and stay inside the first sideband at
    /// `|Δ| = ω = 1/τ`.
    pub fn validate(&self, tau: f64) -> Result<()> {
        if !(self.delta_min < 0.0 && self.delta_max > 0.0) {
            return Err(Error::Validation(format!(
                "fit window [{}, {}] must contain Δ = 0",
                self.delta_min, self.delta_max
            )));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::Validation(format!("fit spacing {} must be positive", self.spacing)));
        }
        let edge = self.delta_min.abs().max(self.delta_max);
        if edge > (1.0 + 1e-12) / tau {
            return Err(Error::Validation(format!(
                "fit window edge {edge} reaches the first sideband at 1/τ = {}",
                1.0 / tau
            )));
        }
        if self.grid().len() < Self::MIN_POINTS {
            return Err(Error::Validation(format!(
                "fit window holds fewer than {} points",
                Self::MIN_POINTS
            )));
        }
        Ok(())
    }

    /// Sample detunings, anchored at Δ = 0 so that it is always sampled.
    pub fn grid(&self) -> Vec<f64> {
        let lo = (self.delta_min / self.spacing - 1e-9).ceil() as i64;
        let hi = (self.delta_max / self.spacing + 1e-9).floor() as i64;
        (lo..=hi).map(|i| i as f64 * self.spacing).collect()
    }

    pub fn contains(&self, delta: f64) -> bool {
        let eps = 1e-9 * self.spacing;
        delta >= self.delta_min - eps && delta <= self.delta_max + eps
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FitParams {
    Qi(QiParams),
    Ats(AtsParams),
}

impl FitParams {
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            Self::Qi(p) => p.to_vec(),
            Self::Ats(p) => p.to_vec(),
        }
    }

    fn from_model(model: Model, p: &[f64]) -> Self {
        match model {
            Model::Qi => Self::Qi(QiParams::from_slice(p)),
            Model::Ats => Self::Ats(AtsParams::from_slice(p)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: Model,
    pub params: FitParams,
    pub rss: f64,
    pub n: usize,
    pub k: usize,
    pub aic_per_point: f64,
    pub iterations: usize,
    pub converged: bool,
    /// the fitted detunings, used to check that two fits are comparable
    #[serde(skip)]
    pub deltas: Vec<f64>,
}

/// `(N ln(R/N) + 2k)/N`; an exact zero residual is floored to keep it finite.
pub fn aic_per_point(rss: f64, n: usize, k: usize) -> f64 {
    let n_f = n as f64;
    let r = rss.max(f64::MIN_POSITIVE);
    (n_f * (r / n_f).ln() + 2.0 * k as f64) / n_f
}

const MULTI_STARTS: usize = 5;
const START_SEED: u64 = 0x5155_0f17;

/// The start itself followed by perturbed copies from a fixed seed.
fn starts(init: &[f64]) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut out = vec![init.to_vec()];
    for _ in 0..MULTI_STARTS {
        out.push(
            init.iter()
                .map(|&v| v + 0.2 * v.abs().max(0.25) * rng.random_range(-1.0..=1.0))
                .collect(),
        );
    }
    out
}

/// Least-squares fit of `ys(xs)` to `model`; best of several deterministic
/// starts.
pub fn fit_curve(xs: &[f64], ys: &[f64], model: Model, init: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::Dimension(format!("{} detunings vs {} values", xs.len(), ys.len())));
    }
    if init.len() != model.k() {
        return Err(Error::Validation(format!(
            "{} model takes {} parameters, got {}",
            model.name(),
            model.k(),
            init.len()
        )));
    }
    if xs.len() < FitWindow::MIN_POINTS {
        return Err(Error::Validation(format!("only {} points to fit", xs.len())));
    }
    let residuals = |p: &[f64], out: &mut [f64]| {
        for (o, (&x, &y)) in out.iter_mut().zip(xs.iter().zip(ys)) {
            *o = model.eval(x, p) - y;
        }
    };
    let opts = LmOptions::default();
    let mut best: Option<Minimum> = None;
    let mut total_iter = 0;
    for p0 in starts(init) {
        let m = levenberg_marquardt(&residuals, xs.len(), &p0, &opts);
        total_iter += m.iterations;
        let better = match &best {
            None => true,
            Some(b) => (m.converged && !b.converged) || (m.converged == b.converged && m.rss < b.rss),
        };
        if better && m.rss.is_finite() {
            best = Some(m);
        }
    }
    let best = best.ok_or_else(|| Error::Numeric("no start produced a finite residual".into()))?;
    let n = xs.len();
    let result = FitResult {
        model,
        params: FitParams::from_model(model, &best.x),
        rss: best.rss,
        n,
        k: model.k(),
        aic_per_point: aic_per_point(best.rss, n, model.k()),
        iterations: total_iter,
        converged: best.converged,
        deltas: xs.to_vec(),
    };
    if !best.converged {
        return Err(Error::Fit { iterations: best.iterations, best: Box::new(result) });
    }
    Ok(result)
}

/// Default start: fitted splitting and probe near half their physical values
/// (each drive is on half the time), Γ and Λ from the bare rates.
pub fn default_init(spectrum: &Spectrum, model: Model) -> Vec<f64> {
    let p = &spectrum.params;
    let mut v = vec![0.5 * p.omega_c, 0.5 * p.omega_p, p.gamma_big()];
    if model == Model::Qi {
        v.push(p.lambda());
    }
    v
}

/// Fit `Im ρ10(Δ)` of a spectrum inside `window`.
pub fn fit_model(spectrum: &Spectrum, model: Model, window: &FitWindow, init: Option<&[f64]>) -> Result<FitResult> {
    window.validate(spectrum.params.tau)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = spectrum
        .points
        .iter()
        .filter(|pt| window.contains(pt.delta))
        .map(|pt| (pt.delta, pt.im_rho10))
        .unzip();
    if xs.len() < FitWindow::MIN_POINTS {
        return Err(Error::Validation(format!(
            "{} spectrum points inside the fit window, need {}",
            xs.len(),
            FitWindow::MIN_POINTS
        )));
    }
    let init = init.map(<[f64]>::to_vec).unwrap_or_else(|| default_init(spectrum, model));
    fit_curve(&xs, &ys, model, &init)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AicWeights {
    pub w_qi: f64,
    pub w_ats: f64,
}

/// `w_QI = e^{−Ī_QI/2}/(e^{−Ī_QI/2} + e^{−Ī_ATS/2})`, shifted by the smaller
/// Ī before exponentiating.
pub fn aic_weights(qi: &FitResult, ats: &FitResult) -> Result<AicWeights> {
    if qi.n != ats.n || qi.deltas != ats.deltas {
        return Err(Error::Validation("AIC weights need both fits on identical detuning samples".into()));
    }
    Ok(weights_from_aic(qi.aic_per_point, ats.aic_per_point))
}

pub fn weights_from_aic(aic_qi: f64, aic_ats: f64) -> AicWeights {
    let m = aic_qi.min(aic_ats);
    let eq = (-(aic_qi - m) / 2.0).exp();
    let ea = (-(aic_ats - m) / 2.0).exp();
    let w_qi = eq / (eq + ea);
    AicWeights { w_qi, w_ats: 1.0 - w_qi }
}
