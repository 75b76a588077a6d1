//! Pulse trains, Hamiltonians and dissipator sets.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::quantum::{ket_bra, Channel, ComplexMatrix, Dissipators};
use crate::{Error, Result, C64};

/// How the modulation parameter τ maps to the square-wave period.
///
/// With `Angular` the modulation frequency ω = 1/τ is an angular frequency,
/// so one on/off cycle lasts 2πτ. This is the reading under which the
/// sideband comb sits at multiples of 1/τ and the CDT minima at Ωp = 2n/τ.
/// `Literal` takes τ itself as the cycle length.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeriodConvention {
    #[default]
    Angular,
    Literal,
}

impl PeriodConvention {
    pub fn period(self, tau: f64) -> f64 {
        match self {
            Self::Angular => 2.0 * PI * tau,
            Self::Literal => tau,
        }
    }
}

impl std::str::FromStr for PeriodConvention {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "angular" => Ok(Self::Angular),
            "literal" => Ok(Self::Literal),
            _ => Err(format!("unknown period convention '{s}' (angular|literal)")),
        }
    }
}

impl std::fmt::Display for PeriodConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Angular => "angular",
            Self::Literal => "literal",
        })
    }
}

/// Square-wave modulation of the drive amplitudes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Modulation {
    /// probe on in the first half, control on in the second
    #[default]
    Asynchronous,
    /// both drives always on
    Constant,
}

impl std::str::FromStr for Modulation {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "asynchronous" => Ok(Self::Asynchronous),
            "constant" => Ok(Self::Constant),
            _ => Err(format!("unknown modulation '{s}' (asynchronous|constant)")),
        }
    }
}

impl std::fmt::Display for Modulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Asynchronous => "asynchronous",
            Self::Constant => "constant",
        })
    }
}

/// Piecewise-constant periodic amplitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseTrain {
    amp_first_half: f64,
    amp_second_half: f64,
    period: f64,
}

impl PulseTrain {
    pub fn new(amp_first_half: f64, amp_second_half: f64, period: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::Validation(format!("period {period} must be positive")));
        }
        for a in [amp_first_half, amp_second_half] {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::Validation(format!("amplitude {a} must be finite and ≥ 0")));
            }
        }
        Ok(Self { amp_first_half, amp_second_half, period })
    }

    /// On during `[0, T/2)`.
    pub fn probe(amp: f64, period: f64) -> Result<Self> {
        Self::new(amp, 0.0, period)
    }

    /// On during `[T/2, T)`.
    pub fn control(amp: f64, period: f64) -> Result<Self> {
        Self::new(0.0, amp, period)
    }

    pub fn constant(amp: f64, period: f64) -> Result<Self> {
        Self::new(amp, amp, period)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn amp_first_half(&self) -> f64 {
        self.amp_first_half
    }

    pub fn amp_second_half(&self) -> f64 {
        self.amp_second_half
    }

    /// Angular frequency 2π/T of the square wave.
    pub fn angular_frequency(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// The half boundary belongs to the second half.
    pub fn value(&self, t: f64) -> f64 {
        let phase = t.rem_euclid(self.period);
        if phase < 0.5 * self.period {
            self.amp_first_half
        } else {
            self.amp_second_half
        }
    }
}

pub fn pulse_value(p: &PulseTrain, t: f64) -> f64 {
    p.value(t)
}

fn check_rate(name: &str, r: f64) -> Result<()> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} = {r} must be finite and ≥ 0")))
    }
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} = {x} must be finite")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelParams {
    pub detuning: f64,
    pub omega_p: f64,
    pub tau: f64,
    pub gamma10: f64,
    pub gamma1_phi: f64,
    #[serde(default)]
    pub convention: PeriodConvention,
    #[serde(default)]
    pub modulation: Modulation,
}

impl TwoLevelParams {
    pub fn new(detuning: f64, omega_p: f64, tau: f64, gamma10: f64, gamma1_phi: f64) -> Result<Self> {
        let p = Self {
            detuning,
            omega_p,
            tau,
            gamma10,
            gamma1_phi,
            convention: PeriodConvention::default(),
            modulation: Modulation::default(),
        };
        p.validate()?;
        Ok(p)
    }

    /// γ10 = 1, γ1φ = 0.4.
    pub fn standard(detuning: f64, omega_p: f64, tau: f64) -> Self {
        Self::new(detuning, omega_p, tau, 1.0, 0.4).expect("standard rates are valid")
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("detuning", self.detuning)?;
        check_rate("omega_p", self.omega_p)?;
        check_rate("gamma10", self.gamma10)?;
        check_rate("gamma1_phi", self.gamma1_phi)?;
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::Validation(format!("tau = {} must be positive", self.tau)));
        }
        Ok(())
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn with_convention(mut self, c: PeriodConvention) -> Self {
        self.convention = c;
        self
    }

    pub fn with_modulation(mut self, m: Modulation) -> Self {
        self.modulation = m;
        self
    }

    /// γ1′ = γ10/2 + γ1φ, the decay rate of ρ10.
    pub fn gamma1_prime(&self) -> f64 {
        0.5 * self.gamma10 + self.gamma1_phi
    }

    /// γ1 = 3γ10/4 + γ1φ/2.
    pub fn gamma1(&self) -> f64 {
        0.75 * self.gamma10 + 0.5 * self.gamma1_phi
    }

    /// ω = 1/τ.
    pub fn omega(&self) -> f64 {
        1.0 / self.tau
    }

    pub fn period(&self) -> f64 {
        self.convention.period(self.tau)
    }

    pub fn probe_train(&self) -> PulseTrain {
        let t = self.period();
        match self.modulation {
            Modulation::Asynchronous => PulseTrain::probe(self.omega_p, t),
            Modulation::Constant => PulseTrain::constant(self.omega_p, t),
        }
        .expect("validated params")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeLevelParams {
    pub detuning: f64,
    pub omega_p: f64,
    pub omega_c: f64,
    pub tau: f64,
    pub gamma10: f64,
    pub gamma21: f64,
    pub gamma1_phi: f64,
    pub gamma2_phi: f64,
    #[serde(default)]
    pub convention: PeriodConvention,
    #[serde(default)]
    pub modulation: Modulation,
}

impl ThreeLevelParams {
    /// γ21 = 1.4, γ1φ = 0.4, γ2φ = 0.2, Ωp = 1, Ωc = 10.8 (Λ = 0).
    pub fn ats_regime(tau: f64) -> Self {
        Self {
            detuning: 0.0,
            omega_p: 1.0,
            omega_c: 10.8,
            tau,
            gamma10: 1.0,
            gamma21: 1.4,
            gamma1_phi: 0.4,
            gamma2_phi: 0.2,
            convention: PeriodConvention::default(),
            modulation: Modulation::default(),
        }
    }

    /// γ21 = 0.1, γ1φ = 3, γ2φ = 0, Ωp = 1, Ωc = 3.55 (Λ close to Γ).
    pub fn eit_regime(tau: f64) -> Self {
        Self { omega_c: 3.55, gamma21: 0.1, gamma1_phi: 3.0, gamma2_phi: 0.0, ..Self::ats_regime(tau) }
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("detuning", self.detuning)?;
        check_rate("omega_p", self.omega_p)?;
        check_rate("omega_c", self.omega_c)?;
        check_rate("gamma10", self.gamma10)?;
        check_rate("gamma21", self.gamma21)?;
        check_rate("gamma1_phi", self.gamma1_phi)?;
        check_rate("gamma2_phi", self.gamma2_phi)?;
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::Validation(format!("tau = {} must be positive", self.tau)));
        }
        Ok(())
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_convention(mut self, c: PeriodConvention) -> Self {
        self.convention = c;
        self
    }

    pub fn with_modulation(mut self, m: Modulation) -> Self {
        self.modulation = m;
        self
    }

    /// Γ = (γ10+γ21)/4 + (γ1φ+γ2φ)/2.
    pub fn gamma_big(&self) -> f64 {
        0.25 * (self.gamma10 + self.gamma21) + 0.5 * (self.gamma1_phi + self.gamma2_phi)
    }

    /// Λ = (γ10−γ21)/4 + (γ1φ−γ2φ)/2.
    pub fn lambda(&self) -> f64 {
        0.25 * (self.gamma10 - self.gamma21) + 0.5 * (self.gamma1_phi - self.gamma2_phi)
    }

    pub fn period(&self) -> f64 {
        self.convention.period(self.tau)
    }

    pub fn probe_train(&self) -> PulseTrain {
        let t = self.period();
        match self.modulation {
            Modulation::Asynchronous => PulseTrain::probe(self.omega_p, t),
            Modulation::Constant => PulseTrain::constant(self.omega_p, t),
        }
        .expect("validated params")
    }

    pub fn control_train(&self) -> PulseTrain {
        let t = self.period();
        match self.modulation {
            Modulation::Asynchronous => PulseTrain::control(self.omega_c, t),
            Modulation::Constant => PulseTrain::constant(self.omega_c, t),
        }
        .expect("validated params")
    }
}

/// Two-level system without the rotating-wave approximation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabFrameParams {
    pub carrier: f64,
    pub base: TwoLevelParams,
}

impl LabFrameParams {
    pub fn new(carrier: f64, base: TwoLevelParams) -> Result<Self> {
        if !(carrier.is_finite() && carrier > 0.0) {
            return Err(Error::Validation(format!("carrier frequency {carrier} must be positive")));
        }
        base.validate()?;
        let p = Self { carrier, base };
        let ratio = base.omega_p / p.transition_frequency().abs();
        if ratio > 0.1 {
            log::warn!("Ωp/ω10 = {ratio:.3} > 0.1: counter-rotating corrections are not small");
        }
        Ok(p)
    }

    /// ω10 = Δ + ωp.
    pub fn transition_frequency(&self) -> f64 {
        self.base.detuning + self.carrier
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `Δ(−|0⟩⟨0| + |1⟩⟨1|)/2 − [Ωp(t)|0⟩⟨1| + h.c.]/2`.
pub fn hamiltonian_two_level(p: &TwoLevelParams, t: f64) -> ComplexMatrix {
    two_level_with_coupling(p.detuning, re(0.5 * p.probe_train().value(t)))
}

/// Diagonal `Δ/2·(−1, 1, 1)`, probe on 0↔1 and control on 1↔2, each with −Ω/2.
pub fn hamiltonian_three_level(p: &ThreeLevelParams, t: f64) -> ComplexMatrix {
    let half = 0.5 * p.detuning;
    let mut h = ComplexMatrix::from_diagonal(&[re(-half), re(half), re(half)]);
    let gp = 0.5 * p.probe_train().value(t);
    let gc = 0.5 * p.control_train().value(t);
    h[(0, 1)] = re(-gp);
    h[(1, 0)] = re(-gp);
    h[(1, 2)] = re(-gc);
    h[(2, 1)] = re(-gc);
    h
}

/// Coupling multiplied by `1 + e^{2iωp t}`; the counter-rotating part is kept.
pub fn hamiltonian_lab_frame(p: &LabFrameParams, t: f64) -> ComplexMatrix {
    let amp = p.base.probe_train().value(t);
    let g = C64::from_polar(1.0, 2.0 * p.carrier * t) + 1.0;
    two_level_with_coupling(p.base.detuning, g * (0.5 * amp))
}

/// `H0 − (g|0⟩⟨1| + g*|1⟩⟨0|)`.
pub(crate) fn two_level_with_coupling(detuning: f64, g: C64) -> ComplexMatrix {
    let mut h = ComplexMatrix::from_diagonal(&[re(-0.5 * detuning), re(0.5 * detuning)]);
    h[(0, 1)] = -g;
    h[(1, 0)] = -g.conj();
    h
}

pub fn dissipators_two_level(p: &TwoLevelParams) -> Dissipators {
    Dissipators {
        damping: vec![Channel::new(p.gamma10, ket_bra(2, 0, 1))],
        dephasing: vec![Channel::new(p.gamma1_phi, ket_bra(2, 1, 1))],
    }
}

pub fn dissipators_three_level(p: &ThreeLevelParams) -> Dissipators {
    Dissipators {
        damping: vec![
            Channel::new(p.gamma10, ket_bra(3, 0, 1)),
            Channel::new(p.gamma21, ket_bra(3, 1, 2)),
        ],
        dephasing: vec![
            Channel::new(p.gamma1_phi, ket_bra(3, 1, 1)),
            Channel::new(p.gamma2_phi, ket_bra(3, 2, 2)),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: C64, b: f64) -> bool {
        (a - re(b)).norm() < 1e-15
    }

    #[test]
    fn probe_train_halves() {
        let p = PulseTrain::probe(1.0, 0.3).unwrap();
        assert_eq!(pulse_value(&p, 0.0), 1.0);
        assert_eq!(pulse_value(&p, 0.75 * 0.3), 0.0);
        assert_eq!(pulse_value(&p, 0.15), 0.0, "the boundary belongs to the second half");
        assert_eq!(pulse_value(&p, 0.15 - 1e-12), 1.0);
        let c = PulseTrain::control(2.0, 0.3).unwrap();
        assert_eq!((c.value(0.1), c.value(0.2)), (0.0, 2.0));
        assert!(PulseTrain::new(1.0, 0.0, 0.0).is_err());
        assert!(PulseTrain::new(-1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn conventions() {
        assert!((PeriodConvention::Angular.period(0.05) - 0.1 * PI).abs() < 1e-16);
        assert_eq!(PeriodConvention::Literal.period(0.05), 0.05);
        let p = TwoLevelParams::standard(0.0, 1.0, 0.05);
        assert_eq!(p.omega(), 20.0);
        assert!((p.probe_train().angular_frequency() - 20.0).abs() < 1e-12);
        assert_eq!("literal".parse::<PeriodConvention>().unwrap(), PeriodConvention::Literal);
        assert_eq!(PeriodConvention::Angular.to_string().parse::<PeriodConvention>().unwrap(), PeriodConvention::Angular);
        assert_eq!("constant".parse::<Modulation>().unwrap(), Modulation::Constant);
    }

    #[test]
    fn derived_rates() {
        let p = TwoLevelParams::standard(0.0, 1.0, 0.05);
        assert!((p.gamma1_prime() - 0.9).abs() < 1e-15);
        assert!((p.gamma1() - 0.95).abs() < 1e-15);
        let a = ThreeLevelParams::ats_regime(0.05);
        assert_eq!((a.gamma21, a.gamma2_phi), (1.4, 0.2));
        assert!((a.gamma_big() - 0.9).abs() < 1e-15 && a.lambda().abs() < 1e-15);
        let e = ThreeLevelParams::eit_regime(0.05);
        assert!((e.gamma_big() - 1.775).abs() < 1e-15 && (e.lambda() - 1.725).abs() < 1e-15);
    }

    #[test]
    fn two_level_hamiltonian() {
        let p = TwoLevelParams::standard(2.0, 1.0, 0.05);
        let off = hamiltonian_two_level(&p, 0.75 * p.period());
        assert!(close(off[(0, 0)], -1.0) && close(off[(1, 1)], 1.0) && close(off[(0, 1)], 0.0));
        let on = hamiltonian_two_level(&p.with_detuning(0.0), 0.1 * p.period());
        assert!(close(on[(0, 1)], -0.5) && close(on[(1, 0)], -0.5) && close(on[(0, 0)], 0.0));
    }

    #[test]
    fn three_level_hamiltonian() {
        let p = ThreeLevelParams { omega_p: 1.0, omega_c: 10.8, detuning: 3.0, ..ThreeLevelParams::ats_regime(0.05) };
        let t = p.period();
        let first = hamiltonian_three_level(&p, 0.2 * t);
        assert!(close(first[(0, 1)], -0.5) && close(first[(1, 2)], 0.0));
        assert!(close(first[(0, 0)], -1.5) && close(first[(1, 1)], 1.5) && close(first[(2, 2)], 1.5));
        let second = hamiltonian_three_level(&p, 0.7 * t);
        assert!(close(second[(0, 1)], 0.0) && close(second[(1, 2)], -5.4) && close(second[(2, 1)], -5.4));
        // Δ = 0 has no diagonal and each drive is off somewhere, but never both
        let z = ThreeLevelParams { detuning: 0.0, omega_c: 0.0, ..p };
        assert_eq!(hamiltonian_three_level(&z, 0.7 * t), ComplexMatrix::zeros(3));
    }

    #[test]
    fn lab_frame_hamiltonian() {
        let lab = LabFrameParams::new(6000.0, TwoLevelParams::standard(0.0, 1.0, 0.05)).unwrap();
        assert_eq!(lab.transition_frequency(), 6000.0);
        assert!(close(hamiltonian_lab_frame(&lab, 0.0)[(0, 1)], -1.0));
        let quarter = PI / 2.0 / 6000.0;
        assert!(hamiltonian_lab_frame(&lab, quarter)[(0, 1)].norm() < 1e-12);
        let t_off = 0.6 * lab.base.period();
        assert_eq!(hamiltonian_lab_frame(&lab, t_off), hamiltonian_two_level(&lab.base, t_off));
        assert!(LabFrameParams::new(0.0, lab.base).is_err());
    }

    #[test]
    fn lab_frame_averages_to_rotating_frame() {
        let lab = LabFrameParams::new(6000.0, TwoLevelParams::standard(1.5, 2.0, 0.05)).unwrap();
        // uniform samples over one cycle of e^{2iωp t} cancel the counter-rotating term exactly
        let n = 64;
        let t0 = 0.1 * lab.base.period();
        let cycle = PI / lab.carrier;
        let mut avg = ComplexMatrix::zeros(2);
        for k in 0..n {
            avg = &avg + &hamiltonian_lab_frame(&lab, t0 + cycle * k as f64 / n as f64).scale(re(1.0 / n as f64));
        }
        assert!(avg.max_abs_diff(&hamiltonian_two_level(&lab.base, t0)) < 1e-10);
    }

    #[test]
    fn dissipator_sets() {
        let d = dissipators_two_level(&TwoLevelParams::standard(0.0, 1.0, 0.05));
        assert_eq!((d.damping[0].rate, d.dephasing[0].rate), (1.0, 0.4));
        assert_eq!(d.damping[0].operator, ket_bra(2, 0, 1));
        let d3 = dissipators_three_level(&ThreeLevelParams::ats_regime(0.05));
        assert_eq!((d3.damping[1].rate, d3.dephasing[1].rate), (1.4, 0.2));
        assert_eq!(d3.damping[1].operator, ket_bra(3, 1, 2));
        let zero = TwoLevelParams::new(0.0, 0.0, 0.05, 0.0, 0.0).unwrap();
        let l = crate::quantum::lindblad_generator(&hamiltonian_two_level(&zero, 0.0), &dissipators_two_level(&zero)).unwrap();
        assert_eq!(l, crate::quantum::Superoperator::zero(2));
    }

    proptest! {
        #[test]
        fn trains_are_periodic(a in 0.0..50.0f64, b in 0.0..50.0f64, period in 0.01..10.0f64, t in 0.0..100.0f64) {
            let p = PulseTrain::new(a, b, period).unwrap();
            prop_assert_eq!(p.value(t + period), p.value(t));
        }

        #[test]
        fn hamiltonians_are_hermitian(d in -300.0..300.0f64, op in 0.0..100.0f64, oc in 0.0..20.0f64, tau in 0.001..1.0f64, t in 0.0..10.0f64) {
            let two = TwoLevelParams::standard(d, op, tau);
            prop_assert!(hamiltonian_two_level(&two, t).hermiticity_error() == 0.0);
            let three = ThreeLevelParams { detuning: d, omega_p: op, omega_c: oc, ..ThreeLevelParams::ats_regime(tau) };
            prop_assert!(hamiltonian_three_level(&three, t).hermiticity_error() == 0.0);
            let lab = LabFrameParams { carrier: 6000.0, base: two };
            prop_assert!(hamiltonian_lab_frame(&lab, t).hermiticity_error() < 1e-15);
        }

        #[test]
        fn piecewise_constant(tau in 0.001..1.0f64, k in 0u32..5, fracs in prop::collection::vec(0.01..0.49f64, 10)) {
            let p = ThreeLevelParams::ats_regime(tau).with_detuning(2.0);
            let t = p.period();
            let start = k as f64 * t;
            for half in [0.0, 0.5] {
                let h0 = hamiltonian_three_level(&p, start + (half + 0.25) * t);
                for f in &fracs {
                    prop_assert_eq!(&hamiltonian_three_level(&p, start + (half + f) * t), &h0);
                }
            }
        }
    }
}
