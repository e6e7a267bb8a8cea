//! Closed-form propagators built from Cayley–Klein parameters.
//!
//! Basis orderings are fixed: the V system uses states `(1, 2, 3)` and the Y
//! system `(0, 1, 2, 3)`. Each [`Propagator`] carries its state labels so
//! matrix elements are always addressed by state number, never by position.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use num_complex::Complex64;
use num_traits::Zero;

use crate::linalg::CMatrix;
use crate::{Error, Result};

const UNIT_TOL: f64 = 1e-12;

/// Which linkage a sequence drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum System {
    /// `|1⟩` coupled to `|2⟩` (wanted) and `|3⟩` (unwanted).
    V,
    /// The V system with an extra lower state `|0⟩` coupled to `|1⟩`.
    Y,
}

impl System {
    pub fn labels(self) -> &'static [u8] {
        match self {
            System::V => &[1, 2, 3],
            System::Y => &[0, 1, 2, 3],
        }
    }

    pub fn dim(self) -> usize {
        self.labels().len()
    }

    /// Initially populated state.
    pub fn initial_state(self) -> u8 {
        match self {
            System::V => 1,
            System::Y => 0,
        }
    }

    pub fn target_state(self) -> u8 {
        2
    }

    pub fn unwanted_state(self) -> u8 {
        3
    }

    /// Number of transition phases per pulse.
    pub fn phases_per_pulse(self) -> usize {
        match self {
            System::V => 2,
            System::Y => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            System::V => "V",
            System::Y => "Y",
        }
    }
}

/// The pair `(a, b)` of a two-state propagator `[[a, b], [-b*, a*]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CayleyKlein {
    pub a: Complex64,
    pub b: Complex64,
}

impl CayleyKlein {
    /// Checks `|a|² + |b|² = 1`.
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let norm = a.norm_sqr() + b.norm_sqr();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::domain(format!("|a|^2 + |b|^2 = {norm} is not 1")));
        }
        Ok(CayleyKlein { a, b })
    }

    pub fn identity() -> Self {
        CayleyKlein { a: Complex64::new(1.0, 0.0), b: Complex64::zero() }
    }

    pub fn norm_defect(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr() - 1.0).abs()
    }

    /// The 2×2 matrix in the (hub, bright) basis.
    pub fn two_state_matrix(&self) -> CMatrix {
        CMatrix::from_rows(&[[self.a, self.b], [-self.b.conj(), self.a.conj()]])
    }
}

/// Phase `ζ = exp(i ∫Δ dt / 2)` picked up by states decoupled from the field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaPhase(Complex64);

impl ZetaPhase {
    pub fn new(zeta: Complex64) -> Result<Self> {
        if (zeta.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::domain(format!("|zeta| = {} is not 1", zeta.norm())));
        }
        Ok(ZetaPhase(zeta))
    }

    pub fn one() -> Self {
        ZetaPhase(Complex64::new(1.0, 0.0))
    }

    /// `exp(i Δ T / 2)` for a constant detuning over one pulse.
    pub fn from_detuning(detuning: f64, duration: f64) -> Self {
        ZetaPhase(Complex64::from_polar(1.0, 0.5 * detuning * duration))
    }

    #[inline]
    pub fn value(self) -> Complex64 {
        self.0
    }
}

/// Per-transition phases of one pulse. `phi01` is present only for the Y system.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseVector {
    pub phi01: Option<f64>,
    pub phi12: f64,
    pub phi13: f64,
}

impl PhaseVector {
    pub fn v(phi12: f64, phi13: f64) -> Self {
        PhaseVector { phi01: None, phi12, phi13 }
    }

    pub fn y(phi01: f64, phi12: f64, phi13: f64) -> Self {
        PhaseVector { phi01: Some(phi01), phi12, phi13 }
    }

    pub fn zero(system: System) -> Self {
        match system {
            System::V => Self::v(0.0, 0.0),
            System::Y => Self::y(0.0, 0.0, 0.0),
        }
    }

    /// Builds a phase vector from components in the order `(φ01,) φ12, φ13`.
    pub fn from_components(system: System, values: &[f64]) -> Result<Self> {
        match (system, values) {
            (System::V, &[p12, p13]) => Ok(Self::v(p12, p13)),
            (System::Y, &[p01, p12, p13]) => Ok(Self::y(p01, p12, p13)),
            _ => Err(Error::argument(format!(
                "{} system expects {} phases per pulse, got {}",
                system.name(),
                system.phases_per_pulse(),
                values.len()
            ))),
        }
    }

    pub fn components(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(3);
        if let Some(p01) = self.phi01 {
            out.push(p01);
        }
        out.push(self.phi12);
        out.push(self.phi13);
        out
    }

    /// Every phase wrapped into `(−π, π]`.
    pub fn canonical(&self) -> Self {
        PhaseVector {
            phi01: self.phi01.map(wrap_phase),
            phi12: wrap_phase(self.phi12),
            phi13: wrap_phase(self.phi13),
        }
    }

    pub fn system(&self) -> System {
        if self.phi01.is_some() {
            System::Y
        } else {
            System::V
        }
    }

    /// Adds the same offsets to each transition phase.
    pub fn shifted(&self, by: &PhaseVector) -> Self {
        PhaseVector {
            phi01: self.phi01.map(|p| p + by.phi01.unwrap_or(0.0)),
            phi12: self.phi12 + by.phi12,
            phi13: self.phi13 + by.phi13,
        }
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let wrapped = x - TAU * libm::ceil((x - PI) / TAU);
    // ceil can land exactly on -π after rounding
    if wrapped <= -PI {
        wrapped + TAU
    } else {
        wrapped
    }
}

/// Mixing angles: `theta` splits the V coupling between `1↔2` and `1↔3`,
/// `xi` sets the share of the lower leg `0↔1` in the Y system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingAngles {
    theta: f64,
    xi: f64,
}

impl MixingAngles {
    pub fn new(theta: f64, xi: f64) -> Result<Self> {
        for (name, value) in [("theta", theta), ("xi", xi)] {
            if !(0.0..=FRAC_PI_2).contains(&value) {
                return Err(Error::domain(format!("{name} = {value} outside [0, pi/2]")));
            }
        }
        Ok(MixingAngles { theta, xi })
    }

    /// `xi = π/4`, equal weight of the lower leg and the V pair.
    pub fn with_theta(theta: f64) -> Result<Self> {
        Self::new(theta, FRAC_PI_4)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Polarisation ellipticity `ε = cos 2θ`.
    pub fn ellipticity(&self) -> f64 {
        libm::cos(2.0 * self.theta)
    }
}

/// A unitary over labelled basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    labels: Vec<u8>,
    matrix: CMatrix,
}

impl Propagator {
    pub fn new(labels: Vec<u8>, matrix: CMatrix) -> Result<Self> {
        if labels.len() != matrix.dim() {
            return Err(Error::argument(format!(
                "{} labels for a {}-dimensional matrix",
                labels.len(),
                matrix.dim()
            )));
        }
        Ok(Propagator { labels, matrix })
    }

    pub fn identity(system: System) -> Self {
        Propagator { labels: system.labels().to_vec(), matrix: CMatrix::identity(system.dim()) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn index_of(&self, label: u8) -> Result<usize> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .ok_or_else(|| Error::argument(format!("state {label} not in basis {:?}", self.labels)))
    }

    /// Matrix element `⟨to|U|from⟩`.
    pub fn amplitude(&self, from: u8, to: u8) -> Result<Complex64> {
        Ok(self.matrix[(self.index_of(to)?, self.index_of(from)?)])
    }

    pub fn adjoint(&self) -> Self {
        Propagator { labels: self.labels.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.matrix.unitarity_defect()
    }

    /// `other · self`, i.e. `self` acts first.
    pub fn then(&self, other: &Propagator) -> Result<Propagator> {
        if self.labels != other.labels {
            return Err(Error::argument(format!(
                "basis mismatch: {:?} vs {:?}",
                self.labels, other.labels
            )));
        }
        Ok(Propagator { labels: self.labels.clone(), matrix: other.matrix.matmul(&self.matrix) })
    }
}

/// `(cos A/2, −i sin A/2)`: on resonance the parameters depend on the area only.
pub fn cayley_klein_resonant(area: f64) -> Result<CayleyKlein> {
    if !(area >= 0.0) {
        return Err(Error::domain(format!("pulse area {area} must be non-negative")));
    }
    Ok(CayleyKlein {
        a: Complex64::new(libm::cos(0.5 * area), 0.0),
        b: Complex64::new(0.0, -libm::sin(0.5 * area)),
    })
}

/// Exact two-state solution for constant Rabi frequency `Ω = area/duration`
/// and constant detuning `Δ` over `[0, duration]`, with Hamiltonian
/// `(1/2)[[Δ, Ω], [Ω, −Δ]]`:
///
/// `a = cos(G/2) − i (ΔT/G) sin(G/2)`, `b = −i (A/G) sin(G/2)`, with the
/// generalised area `G = sqrt(A² + (ΔT)²)`.
pub fn cayley_klein_rectangular(area: f64, detuning: f64, duration: f64) -> Result<CayleyKlein> {
    if !(duration > 0.0) {
        return Err(Error::domain(format!("pulse duration {duration} must be positive")));
    }
    if !(area >= 0.0) {
        return Err(Error::domain(format!("pulse area {area} must be non-negative")));
    }
    let dt = detuning * duration;
    let generalized = libm::hypot(area, dt);
    if generalized == 0.0 {
        return Ok(CayleyKlein::identity());
    }
    let (s, c) = libm::sincos(0.5 * generalized);
    Ok(CayleyKlein {
        a: Complex64::new(c, -dt / generalized * s),
        b: Complex64::new(0.0, -area / generalized * s),
    })
}

/// Single-pulse V-system propagator in the basis `(1, 2, 3)`:
///
/// ```text
/// [ a              b e^{iφ12} C             b e^{iφ13} S          ]
/// [ −b* e^{−iφ12} C  a* C² + ζ S²           (a* − ζ) e^{−2iφ} S C ]
/// [ −b* e^{−iφ13} S  (a* − ζ) e^{2iφ} S C   ζ C² + a* S²          ]
/// ```
///
/// with `S = sin θ`, `C = cos θ`, `φ = (φ12 − φ13)/2`.
pub fn propagator_v(
    ck: CayleyKlein,
    zeta: ZetaPhase,
    theta: f64,
    phases: PhaseVector,
) -> Result<Propagator> {
    if phases.phi01.is_some() {
        return Err(Error::argument("V-system pulses carry no phi01"));
    }
    let (s, c) = libm::sincos(theta);
    let (a, b, z) = (ck.a, ck.b, zeta.value());
    let e12 = Complex64::from_polar(1.0, phases.phi12);
    let e13 = Complex64::from_polar(1.0, phases.phi13);
    let half = 0.5 * (phases.phi12 - phases.phi13);
    let e2m = Complex64::from_polar(1.0, -2.0 * half);
    let e2p = Complex64::from_polar(1.0, 2.0 * half);
    let ac = a.conj();
    let bc = b.conj();
    let m = CMatrix::from_rows(&[
        [a, b * e12 * c, b * e13 * s],
        [-bc * e12.conj() * c, ac * c * c + z * s * s, (ac - z) * e2m * s * c],
        [-bc * e13.conj() * s, (ac - z) * e2p * s * c, z * c * c + ac * s * s],
    ]);
    Propagator::new(System::V.labels().to_vec(), m)
}

/// Single pulse-pair Y-system propagator in the basis `(0, 1, 2, 3)`.
///
/// State `|1⟩` couples to the leaf combination
/// `|β⟩ = sinξ e^{iφ01}|0⟩ + cosξ (cosθ e^{−iφ12}|2⟩ + sinθ e^{−iφ13}|3⟩)`;
/// the orthogonal leaf subspace only picks up `ζ`. Hence
/// `U = a|1⟩⟨1| + b|1⟩⟨β| − b*|β⟩⟨1| + (a* − ζ)|β⟩⟨β| + ζ P_leaves`.
pub fn propagator_y(
    ck: CayleyKlein,
    zeta: ZetaPhase,
    angles: MixingAngles,
    phases: PhaseVector,
) -> Result<Propagator> {
    propagator_y_raw(ck, zeta, angles.theta, angles.xi, phases)
}

/// [`propagator_y`] without the range check on the mixing angles, for
/// finite-difference stencils that step outside `[0, π/2]`.
pub(crate) fn propagator_y_raw(
    ck: CayleyKlein,
    zeta: ZetaPhase,
    theta: f64,
    xi: f64,
    phases: PhaseVector,
) -> Result<Propagator> {
    let phi01 = phases
        .phi01
        .ok_or_else(|| Error::argument("Y-system pulses need phi01"))?;
    let (st, ct) = libm::sincos(theta);
    let (sx, cx) = libm::sincos(xi);
    // leaf amplitudes of |β⟩ indexed by basis position; position 1 is the hub
    let beta = [
        Complex64::from_polar(sx, phi01),
        Complex64::zero(),
        Complex64::from_polar(cx * ct, -phases.phi12),
        Complex64::from_polar(cx * st, -phases.phi13),
    ];
    let (a, b, z) = (ck.a, ck.b, zeta.value());
    let mut m = CMatrix::zeros(4);
    m[(1, 1)] = a;
    for l in [0, 2, 3] {
        m[(1, l)] = b * beta[l].conj();
        m[(l, 1)] = -b.conj() * beta[l];
        for k in [0, 2, 3] {
            m[(l, k)] = (a.conj() - z) * beta[l] * beta[k].conj();
        }
        m[(l, l)] += z;
    }
    Propagator::new(System::Y.labels().to_vec(), m)
}

/// Composite propagator `U_n ⋯ U_2 U_1`; `sequence[0]` acts first.
pub fn compose(sequence: &[Propagator]) -> Result<Propagator> {
    let (first, rest) = sequence
        .split_first()
        .ok_or_else(|| Error::argument("cannot compose an empty sequence"))?;
    let mut acc = first.clone();
    for u in rest {
        if u.dim() != acc.dim() {
            return Err(Error::argument(format!(
                "dimension mismatch: {} vs {}",
                acc.dim(),
                u.dim()
            )));
        }
        acc = acc.then(u)?;
    }
    Ok(acc)
}

/// `|⟨to|U|from⟩|²`.
pub fn transition_probability(u: &Propagator, from: u8, to: u8) -> Result<f64> {
    Ok(u.amplitude(from, to)?.norm_sqr())
}
