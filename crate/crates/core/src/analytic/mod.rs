//! Closed-form two-level results and the oracles behind them.

mod bessel;
mod bloch;
mod comb;
mod fourier;

pub use bessel::{bessel_j, bessel_j_orders, BESSEL_MAX_ARG};
pub use bloch::{integrate_bloch_resonant, BlochComponents, BlochTrace};
pub use comb::{bessel_omega_n, harmonic_argument, omega_comb, resonant_steady, BesselSumConfig, OmegaComb, ResonantSteady};
pub use fourier::{fourier_components, weak_drive_rho11, FourierComponents, Harmonic, Sidebands};

/// Drive amplitude at which the effective Rabi frequency `√(Ωp² + Δ²)`
/// equals `2nω` (coherent destruction of tunneling), if it exists.
pub fn cdt_locus(omega: f64, n: u32, detuning: f64) -> Option<f64> {
    if n == 0 {
        return None;
    }
    let r = 2.0 * n as f64 * omega;
    let s = r * r - detuning * detuning;
    (s >= 0.0).then(|| s.sqrt())
}

/// `1/2 − (γ10/2)·γ1/(γ1² + (Ωp/2)²)`: the resonant steady population when
/// the modulation is so fast that only the zeroth Bessel term survives.
pub fn fast_modulation_rho11(omega_p: f64, gamma10: f64, gamma1: f64) -> f64 {
    0.5 - 0.5 * gamma10 * gamma1 / (gamma1 * gamma1 + 0.25 * omega_p * omega_p)
}

#[cfg(test)]
mod tests;
