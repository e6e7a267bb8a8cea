//! Morris–Shore reduction of star linkages.
//!
//! A hub state coupled to several degenerate leaf states with a common time
//! dependence splits into a two-state problem (hub plus one bright leaf
//! combination) and `leaves − 1` dark leaf combinations that only acquire the
//! phase `ζ`.
//!
//! Couplings follow the Hamiltonian convention of the V and Y systems:
//! `H[hub, leaf] = coupling / 2`, `H[hub, hub] = hub_detuning / 2` and
//! `H[leaf, leaf] = leaf_detuning / 2`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;

use crate::dynamics::{cayley_klein_rectangular, CayleyKlein, PhaseVector, Propagator, System, ZetaPhase};
use crate::linalg::{inner, norm, CMatrix};
use crate::{Error, Result};

/// Below this residual norm a Gram–Schmidt candidate is treated as dependent.
const DEPENDENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct StarLinkage {
    labels: Vec<u8>,
    hub: usize,
    leaves: Vec<usize>,
    couplings: Vec<Complex64>,
    hub_detuning: f64,
    leaf_detuning: f64,
}

impl StarLinkage {
    /// `hub` and `leaves` are positions in `labels`; together they must cover
    /// every basis state exactly once.
    pub fn new(
        labels: Vec<u8>,
        hub: usize,
        leaves: Vec<usize>,
        couplings: Vec<Complex64>,
        hub_detuning: f64,
        leaf_detuning: f64,
    ) -> Result<Self> {
        let dim = labels.len();
        if leaves.is_empty() {
            return Err(Error::argument("a star linkage needs at least one leaf"));
        }
        if couplings.len() != leaves.len() {
            return Err(Error::argument(format!(
                "{} couplings for {} leaves",
                couplings.len(),
                leaves.len()
            )));
        }
        if leaves.len() + 1 != dim {
            return Err(Error::argument(format!(
                "hub plus {} leaves do not span {dim} states",
                leaves.len()
            )));
        }
        let mut seen = vec![false; dim];
        for &i in core::iter::once(&hub).chain(&leaves) {
            if i >= dim || seen[i] {
                return Err(Error::argument(format!("state position {i} repeated or out of range")));
            }
            seen[i] = true;
        }
        Ok(StarLinkage { labels, hub, leaves, couplings, hub_detuning, leaf_detuning })
    }

    /// The V linkage with rms Rabi frequency `rabi` and detuning `Δ`.
    pub fn v_system(rabi: f64, theta: f64, detuning: f64, phases: PhaseVector) -> Result<Self> {
        let (s, c) = libm::sincos(theta);
        Self::new(
            System::V.labels().to_vec(),
            0,
            vec![1, 2],
            vec![
                Complex64::from_polar(rabi * c, phases.phi12),
                Complex64::from_polar(rabi * s, phases.phi13),
            ],
            detuning,
            -detuning,
        )
    }

    /// The Y linkage: hub `|1⟩`, leaves `|0⟩, |2⟩, |3⟩`.
    pub fn y_system(rabi: f64, theta: f64, xi: f64, detuning: f64, phases: PhaseVector) -> Result<Self> {
        let phi01 = phases.phi01.ok_or_else(|| Error::argument("Y-system pulses need phi01"))?;
        let (st, ct) = libm::sincos(theta);
        let (sx, cx) = libm::sincos(xi);
        Self::new(
            System::Y.labels().to_vec(),
            1,
            vec![0, 2, 3],
            vec![
                // the 0↔1 term is written as e^{iφ01}|0⟩⟨1|, so ⟨1|H|0⟩ carries e^{−iφ01}
                Complex64::from_polar(rabi * sx, -phi01),
                Complex64::from_polar(rabi * cx * ct, phases.phi12),
                Complex64::from_polar(rabi * cx * st, phases.phi13),
            ],
            detuning,
            -detuning,
        )
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn hub(&self) -> usize {
        self.hub
    }

    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    pub fn couplings(&self) -> &[Complex64] {
        &self.couplings
    }

    pub fn hub_detuning(&self) -> f64 {
        self.hub_detuning
    }

    pub fn leaf_detuning(&self) -> f64 {
        self.leaf_detuning
    }

    /// `Ω = sqrt(Σ |coupling|²)`.
    pub fn rms_coupling(&self) -> f64 {
        norm(&self.couplings)
    }

    /// Instantaneous Hamiltonian at envelope value 1.
    pub fn hamiltonian(&self) -> CMatrix {
        let mut h = CMatrix::zeros(self.dim());
        h[(self.hub, self.hub)] = Complex64::new(0.5 * self.hub_detuning, 0.0);
        for (&leaf, &c) in self.leaves.iter().zip(&self.couplings) {
            h[(leaf, leaf)] = Complex64::new(0.5 * self.leaf_detuning, 0.0);
            h[(self.hub, leaf)] = 0.5 * c;
            h[(leaf, self.hub)] = 0.5 * c.conj();
        }
        h
    }

    /// Same linkage with all couplings multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        StarLinkage { couplings: self.couplings.iter().map(|&c| c * factor).collect(), ..self.clone() }
    }

    /// Exact propagator for a rectangular pulse of length `duration`, via
    /// [`reduce`], [`ms_basis`] and [`reconstruct`].
    pub fn rectangular_propagator(&self, duration: f64) -> Result<Propagator> {
        let reduced = reduce(self);
        let ck = if reduced.coupling == 0.0 {
            cayley_klein_rectangular(0.0, reduced.detuning, duration)?
        } else {
            cayley_klein_rectangular(reduced.coupling * duration, reduced.detuning, duration)?
        };
        let zeta = ZetaPhase::from_detuning(reduced.detuning, duration);
        let global = Complex64::from_polar(1.0, -0.5 * reduced.offset * duration);
        let u = match ms_basis(self) {
            Ok(basis) => reconstruct(&basis, ck, zeta)?,
            // no coupling: every state only evolves by its own detuning
            Err(Error::DegenerateLinkage) => {
                let mut diag = vec![zeta.value(); self.dim()];
                diag[self.hub] = ck.a;
                Propagator::new(self.labels.clone(), CMatrix::diagonal(&diag))?
            }
            Err(e) => return Err(e),
        };
        Propagator::new(self.labels.clone(), u.into_matrix().scale(global))
    }
}

/// Bright and dark combinations of the leaf states.
#[derive(Debug, Clone, PartialEq)]
pub struct MSBasis {
    labels: Vec<u8>,
    hub: usize,
    leaves: Vec<usize>,
    /// Over the leaves, in leaf order.
    pub bright: Vec<Complex64>,
    /// `leaves − 1` orthonormal vectors over the leaves.
    pub dark: Vec<Vec<Complex64>>,
    /// Rows: hub, bright, darks, written as bras in the full basis, so that
    /// `transform · ψ` gives MS-basis coordinates.
    pub transform: CMatrix,
}

impl MSBasis {
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Embeds a leaf-space vector into the full basis.
    pub fn embed(&self, leaf_vector: &[Complex64]) -> Vec<Complex64> {
        let mut v = vec![Complex64::zero(); self.labels.len()];
        for (&pos, &z) in self.leaves.iter().zip(leaf_vector) {
            v[pos] = z;
        }
        v
    }

    pub fn hub(&self) -> usize {
        self.hub
    }
}

/// Bright vector `∝ conj(couplings)` (so the hub–bright coupling is real and
/// non-negative) and darks from Gram–Schmidt on the leaf unit vectors, taken
/// in leaf order.
pub fn ms_basis(link: &StarLinkage) -> Result<MSBasis> {
    let omega = link.rms_coupling();
    if omega == 0.0 {
        return Err(Error::DegenerateLinkage);
    }
    let n = link.leaves.len();
    let bright: Vec<Complex64> = link.couplings.iter().map(|c| c.conj() / omega).collect();

    let mut accepted: Vec<Vec<Complex64>> = vec![bright.clone()];
    let mut dark = Vec::with_capacity(n - 1);
    for k in 0..n {
        if dark.len() == n - 1 {
            break;
        }
        let mut v = vec![Complex64::zero(); n];
        v[k] = Complex64::new(1.0, 0.0);
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for q in &accepted {
                let proj = inner(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let len = norm(&v);
        if len < DEPENDENCE_TOL {
            continue;
        }
        for vi in v.iter_mut() {
            *vi /= len;
        }
        accepted.push(v.clone());
        dark.push(v);
    }
    debug_assert_eq!(dark.len(), n - 1);

    let dim = link.dim();
    let mut transform = CMatrix::zeros(dim);
    transform[(0, link.hub)] = Complex64::new(1.0, 0.0);
    for (row, vec) in core::iter::once(&bright).chain(&dark).enumerate() {
        for (&pos, &z) in link.leaves.iter().zip(vec) {
            transform[(row + 1, pos)] = z.conj();
        }
    }
    Ok(MSBasis {
        labels: link.labels.clone(),
        hub: link.hub,
        leaves: link.leaves.clone(),
        bright,
        dark,
        transform,
    })
}

/// Effective two-state problem `(1/2)[[offset + detuning, Ω], [Ω, offset − detuning]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStateReduction {
    /// `Ω = sqrt(Σ|coupling|²)`.
    pub coupling: f64,
    /// Half the hub–leaf splitting, `(hub − leaf)/2`; equals `Δ` for V and Y.
    pub detuning: f64,
    /// Mean diagonal `(hub + leaf)/2`; zero for V and Y.
    pub offset: f64,
}

pub fn reduce(link: &StarLinkage) -> TwoStateReduction {
    TwoStateReduction {
        coupling: link.rms_coupling(),
        detuning: 0.5 * (link.hub_detuning - link.leaf_detuning),
        offset: 0.5 * (link.hub_detuning + link.leaf_detuning),
    }
}

/// `transform† · (U₂ ⊕ ζ·I) · transform`.
pub fn reconstruct(basis: &MSBasis, ck: CayleyKlein, zeta: ZetaPhase) -> Result<Propagator> {
    let dim = basis.transform.dim();
    if dim != basis.labels.len() || basis.dark.len() + 2 != dim {
        return Err(Error::argument(format!(
            "MS basis with {} dark states does not fit dimension {dim}",
            basis.dark.len()
        )));
    }
    let mut block = CMatrix::zeros(dim);
    let two = ck.two_state_matrix();
    for i in 0..2 {
        for j in 0..2 {
            block[(i, j)] = two[(i, j)];
        }
    }
    for i in 2..dim {
        block[(i, i)] = zeta.value();
    }
    let u = basis.transform.adjoint().matmul(&block).matmul(&basis.transform);
    Propagator::new(basis.labels.clone(), u)
}
