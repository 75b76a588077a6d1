use std::f64::consts::PI;

use crate::model::TwoLevelParams;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Harmonic {
    /// `Ωpn = Ωp/((2n−1)π)`, the Rabi frequency of one rotating sideband
    pub amplitude: f64,
    /// `ωn = (2n−1)ω`
    pub frequency: f64,
}

/// Odd-harmonic decomposition of a square wave that is on for the first half
/// of each period `2π/ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierComponents {
    pub dc: f64,
    pub harmonics: Vec<Harmonic>,
}

impl FourierComponents {
    /// Partial sum `Ωp/2 + Σ 2Ωpn sin(ωn t)`. Each cosine/sine amplitude
    /// splits into two counter-rotating sidebands of strength `Ωpn`.
    pub fn reconstruct(&self, t: f64) -> f64 {
        self.dc + self.harmonics.iter().map(|h| 2.0 * h.amplitude * (h.frequency * t).sin()).sum::<f64>()
    }
}

pub fn fourier_components(omega_p: f64, omega: f64, n_max: usize) -> FourierComponents {
    let harmonics = (1..=n_max)
        .map(|n| {
            let m = (2 * n - 1) as f64;
            Harmonic { amplitude: omega_p / (m * PI), frequency: m * omega }
        })
        .collect();
    FourierComponents { dc: 0.5 * omega_p, harmonics }
}

/// Which sideband teeth enter the weak-drive sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Sidebands {
    /// teeth at Δ = ±ωn
    #[default]
    Symmetric,
    /// only the Δ = −ωn teeth, as in the one-sided textbook sum
    OneSided,
}

/// Weak-drive population: a saturated Lorentzian from the dc component plus
/// one per sideband, each of width `√(γ1′² + γ1′Ωpn²/γ10)`.
pub fn weak_drive_rho11(detuning: f64, params: &TwoLevelParams, n_max: usize, sidebands: Sidebands) -> f64 {
    let w = params.omega();
    if params.omega_p >= w {
        log::warn!("Ωp = {} ≥ ω = {w}: weak-drive sum outside its regime", params.omega_p);
    }
    let g = params.gamma1_prime();
    let g10 = params.gamma10;
    let lorentz = |amp: f64, det: f64| (g / (2.0 * g10)) * amp * amp / (g * g + det * det + g / g10 * amp * amp);
    let mut r = lorentz(0.5 * params.omega_p, detuning);
    for h in fourier_components(params.omega_p, w, n_max).harmonics {
        r += lorentz(h.amplitude, detuning + h.frequency);
        if sidebands == Sidebands::Symmetric {
            r += lorentz(h.amplitude, detuning - h.frequency);
        }
    }
    r
}
