//! Pulses, composite sequences and the operating point they are evaluated at.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, PI};

use crate::dynamics::{
    cayley_klein_rectangular, cayley_klein_resonant, propagator_v, propagator_y_raw, CayleyKlein,
    PhaseVector, Propagator, System, ZetaPhase,
};
use crate::{Error, Result};

/// Time dependence `f(t)` shared by all couplings of one pulse, with peak 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    Rectangular,
    /// `exp(−(t − T/2)² / 2σ²)` truncated to the pulse window `[0, T]`.
    Gaussian { sigma: f64 },
}

impl Envelope {
    /// Gaussian truncated at ±3σ for a window of length `duration`.
    pub fn gaussian_for(duration: f64) -> Self {
        Envelope::Gaussian { sigma: duration / 6.0 }
    }

    pub fn value(&self, t: f64, duration: f64) -> f64 {
        if !(0.0..=duration).contains(&t) {
            return 0.0;
        }
        match *self {
            Envelope::Rectangular => 1.0,
            Envelope::Gaussian { sigma } => {
                let x = (t - 0.5 * duration) / sigma;
                libm::exp(-0.5 * x * x)
            }
        }
    }

    /// `∫₀ᵀ f(t) dt`.
    pub fn integral(&self, duration: f64) -> f64 {
        match *self {
            Envelope::Rectangular => duration,
            Envelope::Gaussian { sigma } => {
                sigma * libm::sqrt(2.0 * PI) * self.truncation_fraction(duration)
            }
        }
    }

    /// Fraction of the untruncated envelope area kept inside the window.
    pub fn truncation_fraction(&self, duration: f64) -> f64 {
        match *self {
            Envelope::Rectangular => 1.0,
            Envelope::Gaussian { sigma } => libm::erf(duration / (2.0 * core::f64::consts::SQRT_2 * sigma)),
        }
    }
}

/// One pulse (or simultaneous pulse pair in the Y system).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseParams {
    /// rms pulse area `A = ∫ Ω f(t) dt`.
    pub area: f64,
    /// Single-photon detuning `Δ`, constant over the pulse.
    pub detuning: f64,
    pub duration: f64,
    pub envelope: Envelope,
    pub phases: PhaseVector,
}

impl PulseParams {
    pub fn new(
        area: f64,
        detuning: f64,
        duration: f64,
        envelope: Envelope,
        phases: PhaseVector,
    ) -> Result<Self> {
        if !(area >= 0.0) {
            return Err(Error::domain(format!("pulse area {area} must be non-negative")));
        }
        if !(duration > 0.0) {
            return Err(Error::domain(format!("pulse duration {duration} must be positive")));
        }
        if !detuning.is_finite() {
            return Err(Error::domain("detuning must be finite"));
        }
        if let Envelope::Gaussian { sigma } = envelope {
            if !(sigma > 0.0) {
                return Err(Error::domain(format!("gaussian width {sigma} must be positive")));
            }
        }
        Ok(PulseParams { area, detuning, duration, envelope, phases })
    }

    /// Resonant rectangular pulse of unit duration.
    pub fn rectangular(area: f64, phases: PhaseVector) -> Self {
        PulseParams { area, detuning: 0.0, duration: 1.0, envelope: Envelope::Rectangular, phases }
    }

    /// Peak rms Rabi frequency `Ω` such that `Ω ∫ f dt = area`.
    pub fn peak_rabi(&self) -> f64 {
        self.area / self.envelope.integral(self.duration)
    }

    pub fn zeta(&self) -> ZetaPhase {
        ZetaPhase::from_detuning(self.detuning, self.duration)
    }

    /// Cayley–Klein parameters of the reduced two-state problem. Closed forms
    /// exist for rectangular pulses and, for any envelope, on resonance.
    pub fn cayley_klein(&self) -> Result<CayleyKlein> {
        match self.envelope {
            Envelope::Rectangular => cayley_klein_rectangular(self.area, self.detuning, self.duration),
            _ if self.detuning == 0.0 => cayley_klein_resonant(self.area),
            _ => Err(Error::Unsupported(
                "closed-form Cayley-Klein parameters for a detuned non-rectangular pulse".into(),
            )),
        }
    }
}

/// Where in parameter space a sequence is evaluated.
///
/// * `theta`: mixing angle of the V pair.
/// * `area`: rms area of a pulse whose nominal area is π; every pulse area is
///   scaled by `area / π`, so a nominal 2π pulse has area `2·area`.
/// * `detuning`: dimensionless `Δ·T` added to each pulse (`Δ_k += detuning/T_k`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub theta: f64,
    pub area: f64,
    pub detuning: f64,
}

impl OperatingPoint {
    pub const NOMINAL: OperatingPoint = OperatingPoint { theta: 0.0, area: PI, detuning: 0.0 };

    pub fn at_theta(theta: f64) -> Self {
        OperatingPoint { theta, ..Self::NOMINAL }
    }
}

impl Default for OperatingPoint {
    fn default() -> Self {
        Self::NOMINAL
    }
}

/// An ordered list of pulses driving one linkage.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeSequence {
    pub system: System,
    /// Lower-leg angle of the Y system; ignored for V.
    pub xi: f64,
    pub pulses: Vec<PulseParams>,
}

impl CompositeSequence {
    pub fn new(system: System, pulses: Vec<PulseParams>) -> Result<Self> {
        let seq = CompositeSequence { system, xi: FRAC_PI_4, pulses };
        seq.validate()?;
        Ok(seq)
    }

    /// Resonant rectangular pulses of unit duration with the given areas and phases.
    pub fn rectangular(system: System, area: f64, phases: &[PhaseVector]) -> Result<Self> {
        Self::new(system, phases.iter().map(|&p| PulseParams::rectangular(area, p)).collect())
    }

    pub fn with_xi(mut self, xi: f64) -> Result<Self> {
        self.xi = xi;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pulses.is_empty() {
            return Err(Error::argument("sequence has no pulses"));
        }
        if !(0.0..=core::f64::consts::FRAC_PI_2).contains(&self.xi) {
            return Err(Error::domain(format!("xi = {} outside [0, pi/2]", self.xi)));
        }
        for (k, p) in self.pulses.iter().enumerate() {
            if p.phases.system() != self.system {
                return Err(Error::argument(format!(
                    "pulse {k}: {} sequence with {} phases",
                    self.system.name(),
                    p.phases.components().len()
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn phases(&self) -> Vec<PhaseVector> {
        self.pulses.iter().map(|p| p.phases).collect()
    }

    /// The same pulses with new phases.
    pub fn with_phases(&self, phases: &[PhaseVector]) -> Result<Self> {
        if phases.len() != self.pulses.len() {
            return Err(Error::argument(format!(
                "{} phase vectors for {} pulses",
                phases.len(),
                self.pulses.len()
            )));
        }
        let pulses = self
            .pulses
            .iter()
            .zip(phases)
            .map(|(p, &phases)| PulseParams { phases, ..*p })
            .collect();
        let seq = CompositeSequence { pulses, ..self.clone() };
        seq.validate()?;
        Ok(seq)
    }

    /// The pulses as they act at `point`.
    pub fn pulses_at(&self, point: OperatingPoint) -> impl Iterator<Item = PulseParams> + '_ {
        let scale = point.area / PI;
        self.pulses.iter().map(move |p| PulseParams {
            area: p.area * scale,
            detuning: p.detuning + point.detuning / p.duration,
            ..*p
        })
    }

    /// Analytic propagator of the whole sequence at `point`.
    ///
    /// Pulses are contiguous; each contributes its own `ζ`.
    pub fn propagator(&self, point: OperatingPoint) -> Result<Propagator> {
        let mut acc = Propagator::identity(self.system);
        for pulse in self.pulses_at(point) {
            let u = self.pulse_propagator(&pulse, point.theta)?;
            acc = acc.then(&u)?;
        }
        Ok(acc)
    }

    fn pulse_propagator(&self, pulse: &PulseParams, theta: f64) -> Result<Propagator> {
        if !(pulse.area >= 0.0) {
            return Err(Error::domain(format!("scaled pulse area {} is negative", pulse.area)));
        }
        let ck = pulse.cayley_klein()?;
        match self.system {
            System::V => propagator_v(ck, pulse.zeta(), theta, pulse.phases),
            System::Y => propagator_y_raw(ck, pulse.zeta(), theta, self.xi, pulse.phases),
        }
    }

    /// Transfer probability to the target state (`P₁→₂` for V, `P₀→₂` for Y).
    pub fn transfer_probability(&self, point: OperatingPoint) -> Result<f64> {
        let u = self.propagator(point)?;
        let p = u.amplitude(self.system.initial_state(), self.system.target_state())?.norm_sqr();
        if !p.is_finite() {
            return Err(Error::NonFinite { theta: point.theta, area: point.area, detuning: point.detuning });
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn envelope_area_matches_quadrature() {
        for (env, t) in [(Envelope::Rectangular, 2.0), (Envelope::gaussian_for(3.0), 3.0), (Envelope::Gaussian { sigma: 0.2 }, 1.0)] {
            let pulse = PulseParams::new(PI, 0.0, t, env, PhaseVector::v(0.0, 0.0)).unwrap();
            let omega = pulse.peak_rabi();
            let area = simpson(|s| omega * env.value(s, t), 0.0, t, 20_000);
            assert_abs_diff_eq!(area, PI, epsilon = 1e-10);
        }
        let rect = PulseParams::new(2.0, 0.0, 4.0, Envelope::Rectangular, PhaseVector::v(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(rect.peak_rabi(), 0.5);
    }

    #[test]
    fn gaussian_envelope_stays_in_unit_interval() {
        let env = Envelope::gaussian_for(1.0);
        for i in 0..=100 {
            let v = env.value(i as f64 / 100.0, 1.0);
            assert!((0.0..=1.0).contains(&v));
        }
        assert_abs_diff_eq!(env.value(0.5, 1.0), 1.0);
        assert!(env.truncation_fraction(1.0) > 0.997);
    }

    #[test]
    fn pulse_validation() {
        let ph = PhaseVector::v(0.0, 0.0);
        assert!(PulseParams::new(-1.0, 0.0, 1.0, Envelope::Rectangular, ph).is_err());
        assert!(PulseParams::new(1.0, 0.0, 0.0, Envelope::Rectangular, ph).is_err());
        assert!(PulseParams::new(1.0, 0.0, 1.0, Envelope::Gaussian { sigma: 0.0 }, ph).is_err());
    }

    #[test]
    fn detuned_gaussian_has_no_closed_form() {
        let p = PulseParams::new(PI, 0.5, 1.0, Envelope::gaussian_for(1.0), PhaseVector::v(0.0, 0.0)).unwrap();
        assert!(matches!(p.cayley_klein(), Err(Error::Unsupported(_))));
        let p0 = PulseParams { detuning: 0.0, ..p };
        assert!(p0.cayley_klein().is_ok());
    }

    #[test]
    fn sequence_phase_kinds_must_match_system() {
        let v = PulseParams::rectangular(PI, PhaseVector::v(0.0, 0.0));
        let y = PulseParams::rectangular(PI, PhaseVector::y(0.0, 0.0, 0.0));
        assert!(CompositeSequence::new(System::V, alloc::vec![v, y]).is_err());
        assert!(CompositeSequence::new(System::Y, alloc::vec![y]).is_ok());
        assert!(CompositeSequence::new(System::V, alloc::vec![]).is_err());
    }

    #[test]
    fn operating_point_scales_areas() {
        let seq = CompositeSequence::rectangular(System::V, PI, &[PhaseVector::v(0.0, 0.0)]).unwrap();
        let p = OperatingPoint { theta: 0.0, area: 0.5 * PI, detuning: 0.4 };
        let pulse = seq.pulses_at(p).next().unwrap();
        assert_abs_diff_eq!(pulse.area, 0.5 * PI);
        assert_abs_diff_eq!(pulse.detuning, 0.4);
        let p = seq.transfer_probability(OperatingPoint { area: 0.5 * PI, ..OperatingPoint::NOMINAL }).unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-15);
    }
}
