//! Brute-force reference: fixed-step classical Runge–Kutta integration of
//! `i ∂ₜU = H(t) U` in the rotating frame, with the Hamiltonians of the V and
//! Y systems written out directly (no Morris–Shore reduction).
//!
//! For a rectangular pulse the Hamiltonian is constant and one RK4 step is the
//! fixed matrix `M = Σ_{k≤4} (−iHh)^k/k!`; the `N`-step result `M^N` is then
//! formed by repeated squaring. Gaussian pulses are stepped explicitly.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dynamics::{Propagator, System};
use crate::linalg::CMatrix;
use crate::ms::StarLinkage;
use crate::scan::{Grid, ScanRow};
use crate::sequence::{CompositeSequence, Envelope, OperatingPoint};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// RK4 steps per pulse for the coarse pass; the fine pass doubles it.
    pub step_count: usize,
    /// Bound on the element-wise change under step doubling.
    pub tolerance_target: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { step_count: 2048, tolerance_target: 1e-9 }
    }
}

impl IntegratorConfig {
    pub const MIN_STEPS: usize = 100;

    pub fn validate(&self) -> Result<()> {
        if self.step_count < Self::MIN_STEPS {
            return Err(Error::argument(format!(
                "step_count {} below the minimum of {}",
                self.step_count,
                Self::MIN_STEPS
            )));
        }
        if !(self.tolerance_target > 0.0) {
            return Err(Error::argument("tolerance_target must be positive"));
        }
        Ok(())
    }
}

/// One pulse: `H(t) = diagonal + f(t) · coupling` on `[0, duration]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub diagonal: CMatrix,
    /// Off-diagonal part at envelope value 1 (peak Rabi frequency included).
    pub coupling: CMatrix,
    pub envelope: Envelope,
    pub duration: f64,
}

impl Segment {
    fn hamiltonian(&self, t: f64) -> CMatrix {
        let f = self.envelope.value(t, self.duration);
        self.diagonal.add(&self.coupling.scale(Complex64::new(f, 0.0)))
    }

    /// Splits a star linkage Hamiltonian into diagonal and coupling parts.
    pub fn from_star(link: &StarLinkage, envelope: Envelope, duration: f64) -> Self {
        let h = link.hamiltonian();
        let dim = h.dim();
        let mut diagonal = CMatrix::zeros(dim);
        let mut coupling = h.clone();
        for i in 0..dim {
            diagonal[(i, i)] = h[(i, i)];
            coupling[(i, i)] = Complex64::new(0.0, 0.0);
        }
        Segment { diagonal, coupling, envelope, duration }
    }
}

/// Hamiltonian pieces of every pulse of `seq` at `point`.
///
/// V: `(Δ/2)(|1⟩⟨1| − |2⟩⟨2| − |3⟩⟨3|) + (Ω f/2)[cosθ e^{iφ12}|1⟩⟨2| + sinθ e^{iφ13}|1⟩⟨3| + h.c.]`.
/// Y: the V terms, `−(Δ/2)|0⟩⟨0|` and `(Ω f/2) sinξ e^{iφ01}|0⟩⟨1| + h.c.`,
/// with the V couplings scaled by `cosξ`.
pub fn segments_for(seq: &CompositeSequence, point: OperatingPoint) -> Result<Vec<Segment>> {
    seq.validate()?;
    let (st, ct) = libm::sincos(point.theta);
    let (sx, cx) = libm::sincos(seq.xi);
    seq.pulses_at(point)
        .map(|pulse| {
            let omega = pulse.peak_rabi();
            let d = 0.5 * pulse.detuning;
            let half = |amp: f64, phase: f64| Complex64::from_polar(0.5 * omega * amp, phase);
            let (diagonal, coupling) = match seq.system {
                System::V => {
                    let diag = CMatrix::diagonal(&[d.into(), (-d).into(), (-d).into()]);
                    let mut k = CMatrix::zeros(3);
                    k[(0, 1)] = half(ct, pulse.phases.phi12);
                    k[(0, 2)] = half(st, pulse.phases.phi13);
                    (diag, k)
                }
                System::Y => {
                    let phi01 = pulse
                        .phases
                        .phi01
                        .ok_or_else(|| Error::argument("Y-system pulses need phi01"))?;
                    let diag = CMatrix::diagonal(&[(-d).into(), d.into(), (-d).into(), (-d).into()]);
                    let mut k = CMatrix::zeros(4);
                    k[(0, 1)] = half(sx, phi01);
                    k[(1, 2)] = half(cx * ct, pulse.phases.phi12);
                    k[(1, 3)] = half(cx * st, pulse.phases.phi13);
                    (diag, k)
                }
            };
            let coupling = coupling.add(&coupling.adjoint());
            Ok(Segment { diagonal, coupling, envelope: pulse.envelope, duration: pulse.duration })
        })
        .collect()
}

fn rk4_constant_step(h: &CMatrix, dt: f64) -> CMatrix {
    let x = h.scale(Complex64::new(0.0, -dt));
    let mut term = CMatrix::identity(h.dim());
    let mut sum = term.clone();
    for k in 1..=4 {
        term = term.matmul(&x).scale(Complex64::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term);
    }
    sum
}

fn integrate_segment(seg: &Segment, steps: usize) -> CMatrix {
    let dt = seg.duration / steps as f64;
    match seg.envelope {
        Envelope::Rectangular => {
            rk4_constant_step(&seg.diagonal.add(&seg.coupling), dt).pow(steps as u64)
        }
        Envelope::Gaussian { .. } => {
            let minus_i = Complex64::new(0.0, -1.0);
            let mut u = CMatrix::identity(seg.diagonal.dim());
            for n in 0..steps {
                let t = n as f64 * dt;
                let h0 = seg.hamiltonian(t).scale(minus_i);
                let hm = seg.hamiltonian(t + 0.5 * dt).scale(minus_i);
                let h1 = seg.hamiltonian(t + dt).scale(minus_i);
                let k1 = h0.matmul(&u);
                let k2 = hm.matmul(&u.add(&k1.scale((0.5 * dt).into())));
                let k3 = hm.matmul(&u.add(&k2.scale((0.5 * dt).into())));
                let k4 = h1.matmul(&u.add(&k3.scale(dt.into())));
                let incr = k1.add(&k2.scale(2.0.into())).add(&k3.scale(2.0.into())).add(&k4);
                u = u.add(&incr.scale((dt / 6.0).into()));
            }
            u
        }
    }
}

fn integrate_with(segments: &[Segment], steps: usize) -> CMatrix {
    let dim = segments[0].diagonal.dim();
    segments
        .iter()
        .fold(CMatrix::identity(dim), |acc, seg| integrate_segment(seg, steps).matmul(&acc))
}

/// Propagator of contiguous `segments`, checked by step doubling.
pub fn integrate_propagator(
    labels: &[u8],
    segments: &[Segment],
    config: &IntegratorConfig,
) -> Result<Propagator> {
    config.validate()?;
    if segments.is_empty() {
        return Err(Error::argument("cannot integrate an empty sequence"));
    }
    if segments.iter().any(|s| s.diagonal.dim() != labels.len() || s.coupling.dim() != labels.len()) {
        return Err(Error::argument("segment dimension does not match basis"));
    }
    let coarse = integrate_with(segments, config.step_count);
    let fine = integrate_with(segments, 2 * config.step_count);
    if !fine.is_finite() {
        return Err(Error::Integrator { defect: f64::INFINITY, tolerance: config.tolerance_target });
    }
    let defect = coarse.max_abs_diff(&fine);
    if defect > config.tolerance_target {
        return Err(Error::Integrator { defect, tolerance: config.tolerance_target });
    }
    Propagator::new(labels.to_vec(), fine)
}

/// Integrated propagator of `seq` at `point`.
pub fn integrate_sequence(
    seq: &CompositeSequence,
    point: OperatingPoint,
    config: &IntegratorConfig,
) -> Result<Propagator> {
    integrate_propagator(seq.system.labels(), &segments_for(seq, point)?, config)
}

/// Integrated propagator of one pulse on a generic star linkage.
pub fn integrate_star(
    link: &StarLinkage,
    envelope: Envelope,
    duration: f64,
    config: &IntegratorConfig,
) -> Result<Propagator> {
    integrate_propagator(link.labels(), &[Segment::from_star(link, envelope, duration)], config)
}

/// Oracle landscape, in [`Grid::points`] order.
pub fn scan_oracle(
    seq: &CompositeSequence,
    grid: &Grid,
    config: &IntegratorConfig,
) -> Result<Vec<ScanRow>> {
    grid.points()
        .into_iter()
        .map(|p| ScanRow::from_propagator(seq, p, &integrate_sequence(seq, p, config)?))
        .collect()
}
