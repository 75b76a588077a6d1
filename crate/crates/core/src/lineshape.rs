//! Three-level lineshape layer: QI and ATS absorption models, the
//! dressed-state first-order solution, and peak-position prediction.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::model::ThreeLevelParams;
use crate::{Error, Result, C64};

/// `(Γ, Λ)`: dressed-coherence decay and cross-coupling rates.
pub fn gamma_lambda(p: &ThreeLevelParams) -> (f64, f64) {
    (p.gamma_big(), p.lambda())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QiParams {
    pub omega_c: f64,
    pub omega_p: f64,
    pub gamma_big: f64,
    pub lambda: f64,
}

impl QiParams {
    pub fn new(omega_c: f64, omega_p: f64, gamma_big: f64, lambda: f64) -> Result<Self> {
        let p = Self { omega_c, omega_p, gamma_big, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_big > 0.0) {
            return Err(Error::Validation(format!("Γ = {} must be positive", self.gamma_big)));
        }
        if self.lambda.abs() > self.gamma_big {
            log::warn!("|Λ| = {} exceeds Γ = {}", self.lambda.abs(), self.gamma_big);
        }
        Ok(())
    }

    pub fn from_slice(p: &[f64]) -> Self {
        Self { omega_c: p[0], omega_p: p[1], gamma_big: p[2], lambda: p[3] }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.omega_c, self.omega_p, self.gamma_big, self.lambda]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtsParams {
    pub omega_c: f64,
    pub omega_p: f64,
    pub gamma_big: f64,
}

impl AtsParams {
    pub fn new(omega_c: f64, omega_p: f64, gamma_big: f64) -> Result<Self> {
        if !(gamma_big > 0.0) {
            return Err(Error::Validation(format!("Γ = {gamma_big} must be positive")));
        }
        Ok(Self { omega_c, omega_p, gamma_big })
    }

    pub fn from_slice(p: &[f64]) -> Self {
        Self { omega_c: p[0], omega_p: p[1], gamma_big: p[2] }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.omega_c, self.omega_p, self.gamma_big]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QiEvaluation {
    pub a: f64,
    pub b: f64,
    pub value: f64,
}

/// Interference lineshape
/// `Im ρ10 = (Ωp/4B)[(Δ−Ωc/2)²Γ + (Δ+Ωc/2)²Γ + 2A]` with
/// `A = −[(Ωc/2)² − Δ²]Λ + (Γ−Λ)²(Γ+Λ)` and
/// `B = [(Δ+Ωc/2)²+Γ²][(Δ−Ωc/2)²+Γ²] − 2[(Ωc/2)²−Δ²+Γ²]Λ² + Λ⁴`.
pub fn qi_absorption(delta: f64, p: &QiParams) -> Result<QiEvaluation> {
    let (h, g, l) = (0.5 * p.omega_c, p.gamma_big, p.lambda);
    let a = -(h * h - delta * delta) * l + (g - l) * (g - l) * (g + l);
    let dp = delta + h;
    let dm = delta - h;
    let b = (dp * dp + g * g) * (dm * dm + g * g) - 2.0 * (h * h - delta * delta + g * g) * l * l + l.powi(4);
    if b.abs() < 1e-14 {
        return Err(Error::Singular(format!("QI denominator B = {b:e} at Δ = {delta}")));
    }
    let value = p.omega_p / (4.0 * b) * (dm * dm * g + dp * dp * g + 2.0 * a);
    Ok(QiEvaluation { a, b, value })
}

/// Two Lorentzians of width Γ at `Δ = ±Ωc/2`.
pub fn ats_absorption(delta: f64, p: &AtsParams) -> f64 {
    let (h, g) = (0.5 * p.omega_c, p.gamma_big);
    let s = 0.25 * g * p.omega_p;
    s / ((delta - h).powi(2) + g * g) + s / ((delta + h).powi(2) + g * g)
}

/// Whether the QI lineshape has a local minimum at Δ = 0:
/// `Ωc > 2√((Γ−Λ)³/(3Γ−Λ))`.
pub fn dip_visible(p: &QiParams) -> Result<bool> {
    let (g, l) = (p.gamma_big, p.lambda);
    if 3.0 * g - l <= 0.0 {
        return Err(Error::Domain(format!("3Γ − Λ = {} must be positive", 3.0 * g - l)));
    }
    let thr = 2.0 * ((g - l).powi(3) / (3.0 * g - l)).sqrt();
    Ok(p.omega_c > thr)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedSolution {
    /// coherence of `|+⟩ = (|2⟩+|1⟩)/√2` with `|0⟩`
    pub rho_plus0: C64,
    pub rho_minus0: C64,
    pub im_rho10: f64,
}

/// First-order weak-probe coherences in the control-dressed basis.
///
/// Solves `M (ρ₋₀, ρ₊₀)ᵀ = b` with
/// `M = [[i(Δ+Ωc/2)+Γ, Λ], [Λ, i(Δ−Ωc/2)+Γ]]` and `b = (iΩp/(2√2))(1, 1)`;
/// the probe absorption is `Im(ρ₊₀ + ρ₋₀)/√2`.
pub fn dressed_first_order(delta: f64, p: &ThreeLevelParams) -> Result<DressedSolution> {
    let (g, l) = gamma_lambda(p);
    let h = 0.5 * p.omega_c;
    let i = C64::new(0.0, 1.0);
    let m = Matrix2::new(i * (delta + h) + g, C64::new(l, 0.0), C64::new(l, 0.0), i * (delta - h) + g);
    let drive = i * (p.omega_p / (2.0 * SQRT_2));
    let b = Vector2::new(drive, drive);
    let det = m.determinant();
    if det.norm() < 1e-300 {
        return Err(Error::Singular(format!("dressed-state matrix is singular at Δ = {delta}")));
    }
    let x = m
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular(format!("dressed-state matrix is singular at Δ = {delta}")))?;
    let (rho_minus0, rho_plus0) = (x[0], x[1]);
    Ok(DressedSolution { rho_plus0, rho_minus0, im_rho10: (rho_plus0 + rho_minus0).im / SQRT_2 })
}

/// Phase bookkeeping behind the peak predictor for one period `T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakPrediction {
    /// `(Δ ± Ωc/2)T/2`, accumulated while the control is on
    pub phi_prime: [f64; 2],
    /// `ΔT/2`, accumulated while the probe is on
    pub phi_second: f64,
    /// `(Δ ± Ωc/4)T`
    pub phi_total: [f64; 2],
}

pub fn peak_phases(delta: f64, period: f64, omega_c: f64) -> PeakPrediction {
    let h = 0.5 * omega_c;
    PeakPrediction {
        phi_prime: [(delta + h) * period / 2.0, (delta - h) * period / 2.0],
        phi_second: delta * period / 2.0,
        phi_total: [(delta + 0.5 * h) * period, (delta - 0.5 * h) * period],
    }
}

/// Detunings where the total phase per period `(Δ ± Ωc/4)T` is a multiple of
/// 2π: `Δ = 2πn/T ± Ωc/4`, for every `n` in `n_range` (negative included).
/// Returned sorted.
pub fn peak_positions(period: f64, omega_c: f64, n_range: std::ops::RangeInclusive<i64>) -> Vec<f64> {
    let q = 0.25 * omega_c;
    let mut out: Vec<f64> = n_range
        .flat_map(|n| {
            let c = 2.0 * PI * n as f64 / period;
            [c - q, c + q]
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// All predicted peaks with `|Δ| ≤ limit`.
pub fn peak_positions_within(period: f64, omega_c: f64, limit: f64) -> Vec<f64> {
    let nmax = ((limit + 0.25 * omega_c) * period / (2.0 * PI)).ceil() as i64 + 1;
    peak_positions(period, omega_c, -nmax..=nmax).into_iter().filter(|d| d.abs() <= limit).collect()
}
