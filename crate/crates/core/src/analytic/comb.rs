use std::f64::consts::PI;

use super::bessel::bessel_j_orders;
use crate::model::TwoLevelParams;
use crate::{Error, Result};

/// Truncation of the nested Bessel series for the drive comb `Ωn`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BesselSumConfig {
    /// number of odd harmonics of the square wave retained
    pub q_max: usize,
    /// orders kept per factor beyond the turning point `|x| + 10|x|^⅓`
    pub extra_orders: usize,
    /// optional cap on `|n|` in the outer steady-state sums
    pub n_max: Option<usize>,
}

impl Default for BesselSumConfig {
    fn default() -> Self {
        Self { q_max: 4, extra_orders: 12, n_max: None }
    }
}

impl BesselSumConfig {
    pub fn validate(&self) -> Result<()> {
        if self.q_max == 0 {
            return Err(Error::Validation("q_max must be ≥ 1".into()));
        }
        Ok(())
    }

    // J_k(x) only turns over past k ≈ |x| + O(|x|^⅓)
    pub fn index_cutoff(&self, x: f64) -> usize {
        let a = x.abs();
        (a + 10.0 * a.cbrt()).ceil() as usize + self.extra_orders
    }
}

/// Argument of the `j`-th Bessel factor, `(−1)^j·2Ωp/((2j−1)²ωπ)`.
pub fn harmonic_argument(j: usize, omega_p: f64, omega: f64) -> f64 {
    let m = (2 * j - 1) as f64;
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * 2.0 * omega_p / (m * m * omega * PI)
}

/// The coefficients `Ωn` on their (finite) support.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaComb {
    /// index of `coeffs[0]` is `-half`
    half: i64,
    coeffs: Vec<f64>,
}

impl OmegaComb {
    pub fn get(&self, n: i64) -> f64 {
        let i = n + self.half;
        if i < 0 || i as usize >= self.coeffs.len() {
            0.0
        } else {
            self.coeffs[i as usize]
        }
    }

    /// Largest `|n|` carried.
    pub fn max_index(&self) -> i64 {
        self.half
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - self.half, c))
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        let h = self.half.max(other.half);
        (-h..=h).map(|n| (self.get(n) - other.get(n)).abs()).fold(0.0, f64::max)
    }
}

/// Product of the `q_max` factor sequences: factor `j` places `J_k(x_j)` at
/// index `(2j−1)k`, and the nested sum over indices with
/// `ξ + 3l + … + (2q−1)g = n` is exactly their convolution.
fn comb_raw(omega_p: f64, omega: f64, cfg: &BesselSumConfig, widen: usize) -> Result<OmegaComb> {
    let mut acc = OmegaComb { half: 0, coeffs: vec![1.0] };
    for j in 1..=cfg.q_max {
        let x = harmonic_argument(j, omega_p, omega);
        let kmax = widen * cfg.index_cutoff(x);
        let jk = bessel_j_orders(kmax, x)?;
        let stride = (2 * j - 1) as i64;
        let fac_half = stride * kmax as i64;
        let half = acc.half + fac_half;
        let mut next = vec![0.0; (2 * half + 1) as usize];
        for (i, &a) in acc.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let n0 = i as i64 - acc.half;
            for k in -(kmax as i64)..=(kmax as i64) {
                let v = if k < 0 && k % 2 != 0 { -jk[(-k) as usize] } else { jk[k.unsigned_abs() as usize] };
                next[(n0 + stride * k + half) as usize] += a * v;
            }
        }
        acc = OmegaComb { half, coeffs: next };
    }
    Ok(acc)
}

/// `Ωn` for all `n`, with a self-check that doubling the per-factor index
/// cutoffs moves no coefficient by more than 1e-10.
pub fn omega_comb(omega_p: f64, omega: f64, cfg: &BesselSumConfig) -> Result<OmegaComb> {
    cfg.validate()?;
    if !(omega > 0.0 && omega.is_finite()) || !omega_p.is_finite() {
        return Err(Error::Validation(format!("need finite Ωp and ω > 0, got Ωp={omega_p}, ω={omega}")));
    }
    let base = comb_raw(omega_p, omega, cfg, 1)?;
    let wide = comb_raw(omega_p, omega, cfg, 2)?;
    let diff = base.max_abs_diff(&wide);
    if diff > 1e-10 {
        return Err(Error::Truncation(format!("doubling index cutoffs changed Ωn by {diff:e}")));
    }
    Ok(base)
}

pub fn bessel_omega_n(n: i64, omega_p: f64, omega: f64, cfg: &BesselSumConfig) -> Result<f64> {
    Ok(omega_comb(omega_p, omega, cfg)?.get(n))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResonantSteady {
    pub rho11: f64,
    pub im_rho10: f64,
}

/// Resonant (Δ = 0) steady state as a Lorentzian sum over the drive comb:
///
/// `ρ11 = 1/2 − (γ10γ1/2) Σ Ωn²/(γ1² + (Ωp/2 − nω)²)`,
/// `Im ρ10 = (γ10/2) Σ Ωn²(Ωp/2 − nω)/(γ1² + (Ωp/2 − nω)²)`.
///
/// Terms rotating at ±2Ωp are dropped, so this describes the period-averaged
/// state and is meant for Ωp ≫ γ1.
pub fn resonant_steady(omega_p: f64, params: &TwoLevelParams, cfg: &BesselSumConfig) -> Result<ResonantSteady> {
    params.validate()?;
    if params.detuning != 0.0 {
        return Err(Error::Validation(format!(
            "resonant formula needs Δ = 0, got {}",
            params.detuning
        )));
    }
    let g1 = params.gamma1();
    if omega_p < 5.0 * g1 {
        log::warn!("Ωp = {omega_p} < 5γ1 = {}: strong-drive formula outside its regime", 5.0 * g1);
    }
    let w = params.omega();
    let comb = omega_comb(omega_p, w, cfg)?;
    let cap = cfg.n_max.map(|n| n as i64).unwrap_or(i64::MAX);
    let (mut s, mut s2) = (0.0, 0.0);
    for (n, c) in comb.iter() {
        if n.abs() > cap {
            continue;
        }
        let det = 0.5 * omega_p - n as f64 * w;
        let l = c * c / (g1 * g1 + det * det);
        s += l;
        s2 += l * det;
    }
    let g10 = params.gamma10;
    Ok(ResonantSteady { rho11: 0.5 - 0.5 * g10 * g1 * s, im_rho10: 0.5 * g10 * s2 })
}
