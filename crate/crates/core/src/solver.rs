//! Composite phase design by Taylor-coefficient nullification.
//!
//! The design criterion: the transfer probability `P` equals 1 at the nominal
//! point `(θ = 0, A = π, Δ = 0)` and its Taylor coefficients with respect to
//! the chosen variables vanish up to a given total order.
//!
//! Since `1 − P = Σ_j |L_j|²` over the leakage amplitudes `L_j = ⟨j|U|initial⟩`
//! (`j` ≠ target), the lowest non-vanishing homogeneous part of `1 − P` is a
//! sum of squared moduli of the lowest non-vanishing parts of the `L_j`.
//! Hence all coefficients of `P` of total degree `≤ order` vanish, together
//! with `1 − P(nominal)`, exactly when all Taylor coefficients of every `L_j`
//! of total degree `≤ order / 2` vanish. The solver drives the latter to zero:
//! those residuals are linear in the phase error near a solution, whereas the
//! coefficients of `P` are quadratic in it. Reported residuals are always the
//! derivatives of `P` itself.
//!
//! Restarts are independent; [`solve_restart`] runs one of them so callers
//! can fan restarts out over threads and merge them with [`merge_solutions`].

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{wrap_phase, PhaseVector, System};
use crate::scan::{high_fidelity_fraction, scan_analytic, Axis, Grid, Variable};
use crate::sequence::{CompositeSequence, OperatingPoint};
use crate::taylor::{mixed_partial, multi_indices, FdConfig, FdValue};
use crate::{Error, Result};

/// Transfer probability threshold for the high-fidelity region.
pub const HIGH_FIDELITY: f64 = 0.999;

/// What to compensate, and to which order.
#[derive(Debug, Clone, PartialEq)]
pub struct CompensationTarget {
    pub system: System,
    /// Sorted θ, A, Δ order, without duplicates.
    pub variables: Vec<Variable>,
    /// Highest total derivative order of `P` to annul.
    pub order: u32,
    /// Lower-leg angle for the Y system.
    pub xi: f64,
}

impl CompensationTarget {
    pub fn new(system: System, mut variables: Vec<Variable>, order: u32) -> Result<Self> {
        variables.sort();
        variables.dedup();
        if variables.is_empty() {
            return Err(Error::argument("compensation needs at least one variable"));
        }
        if order < 1 {
            return Err(Error::argument("compensation order must be at least 1"));
        }
        Ok(CompensationTarget { system, variables, order, xi: FRAC_PI_4 })
    }

    pub fn theta(system: System, order: u32) -> Result<Self> {
        Self::new(system, vec![Variable::Theta], order)
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }

    /// Resonant rectangular π pulses (pulse pairs for Y) of unit duration.
    pub fn sequence(&self, phases: &[PhaseVector]) -> Result<CompositeSequence> {
        CompositeSequence::rectangular(self.system, PI, phases)?.with_xi(self.xi)
    }

    fn point(&self, offsets: &[f64]) -> OperatingPoint {
        let mut p = OperatingPoint::NOMINAL;
        for (&var, &dx) in self.variables.iter().zip(offsets) {
            let base = var.get(&OperatingPoint::NOMINAL);
            var.set(&mut p, base + dx);
        }
        p
    }

    /// Landscape over the compensated variables: θ ∈ [0, π/2], A ∈ [0, 2π],
    /// ΔT ∈ [−4, 4].
    pub fn default_grid(&self, points: usize) -> Result<Grid> {
        let axes = self
            .variables
            .iter()
            .map(|&v| match v {
                Variable::Theta => Axis::linspace(v, 0.0, FRAC_PI_2, points),
                Variable::Area => Axis::linspace(v, 0.0, 2.0 * PI, points),
                Variable::Detuning => Axis::linspace(
                    v,
                    -crate::presets::DETUNING_SPAN,
                    crate::presets::DETUNING_SPAN,
                    points,
                ),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Grid::new(axes))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub n_pulses: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Finite-difference base step for the Taylor coefficients.
    pub fd_step: f64,
    pub convergence_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n_pulses: 3,
            restarts: 24,
            seed: 0,
            fd_step: 1e-3,
            convergence_tol: 1e-5,
            max_iterations: 200,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_pulses < 1 {
            return Err(Error::argument("n_pulses must be at least 1"));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::argument("convergence_tol must be positive"));
        }
        self.fd().validate()
    }

    pub fn fd(&self) -> FdConfig {
        FdConfig { step: self.fd_step, ..FdConfig::default() }
    }
}

/// One derivative `∂^{i+j+k} P / ∂θ^i ∂A^j ∂Δ^k` at the nominal point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorTerm {
    /// Exponents of `(θ, A, Δ)`.
    pub orders: [u32; 3],
    pub value: f64,
}

impl TaylorTerm {
    pub fn total_order(&self) -> u32 {
        self.orders.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSolution {
    pub system: System,
    /// Canonical phases; the first pulse is all zero.
    pub phases: Vec<PhaseVector>,
    /// `|∂P|` for every term of total order `1..=order`, in [`taylor_coefficients`] order.
    pub residuals: Vec<f64>,
    pub nominal_fidelity: f64,
    pub converged: bool,
    /// Restart that produced the solution (`None` for refinements and trivial solves).
    pub restart: Option<usize>,
}

impl PhaseSolution {
    /// `sqrt((1 − F)² + Σ residual²)`.
    pub fn residual_norm(&self) -> f64 {
        let infidelity = 1.0 - self.nominal_fidelity;
        libm::sqrt(infidelity * infidelity + self.residuals.iter().map(|r| r * r).sum::<f64>())
    }
}

fn exponents(target: &CompensationTarget, local: &[u32]) -> [u32; 3] {
    let mut out = [0; 3];
    for (&v, &k) in target.variables.iter().zip(local) {
        let slot = match v {
            Variable::Theta => 0,
            Variable::Area => 1,
            Variable::Detuning => 2,
        };
        out[slot] = k;
    }
    out
}

/// Derivatives of the transfer probability at the nominal point for every
/// exponent tuple of total order `0..=target.order`, ascending in total
/// order, θ-heavy terms first within an order.
pub fn taylor_coefficients(
    seq: &CompositeSequence,
    target: &CompensationTarget,
    fd: &FdConfig,
) -> Result<Vec<TaylorTerm>> {
    if seq.system != target.system {
        return Err(Error::argument("sequence and target are for different systems"));
    }
    fd.validate()?;
    let x0 = vec![0.0; target.variables.len()];
    let mut prob = |x: &[f64]| seq.transfer_probability(target.point(x));
    multi_indices(target.variables.len(), target.order)
        .into_iter()
        .map(|local| {
            let value = mixed_partial(&mut prob, &x0, &local, fd)?;
            if !value.is_finite() {
                let p = target.point(&x0);
                return Err(Error::NonFinite { theta: p.theta, area: p.area, detuning: p.detuning });
            }
            Ok(TaylorTerm { orders: exponents(target, &local), value })
        })
        .collect()
}

/// Leakage amplitudes out of the initial state, padded with zeros.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Leakage([Complex64; 3]);

impl Add for Leakage {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Leakage(core::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for Leakage {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Leakage(core::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Mul<f64> for Leakage {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Leakage(self.0.map(|z| z * rhs))
    }
}

impl FdValue for Leakage {
    fn zero() -> Self {
        Leakage([Complex64::new(0.0, 0.0); 3])
    }
}

fn leakage(seq: &CompositeSequence, point: OperatingPoint) -> Result<Leakage> {
    let u = seq.propagator(point)?;
    let system = seq.system;
    let mut out = Leakage::zero();
    let mut slot = 0;
    for &to in system.labels() {
        if to != system.target_state() {
            out.0[slot] = u.amplitude(system.initial_state(), to)?;
            slot += 1;
        }
    }
    Ok(out)
}

/// Decision variables: phases of pulses `2..=n`, flattened.
struct Problem<'a> {
    target: &'a CompensationTarget,
    n_pulses: usize,
    fd: FdConfig,
    amplitude_indices: Vec<Vec<u32>>,
}

impl<'a> Problem<'a> {
    fn new(target: &'a CompensationTarget, config: &SolverConfig) -> Self {
        Problem {
            target,
            n_pulses: config.n_pulses,
            fd: config.fd(),
            amplitude_indices: multi_indices(target.variables.len(), target.order / 2),
        }
    }

    fn n_free(&self) -> usize {
        (self.n_pulses - 1) * self.target.system.phases_per_pulse()
    }

    fn phases(&self, x: &[f64]) -> Result<Vec<PhaseVector>> {
        let system = self.target.system;
        let mut out = vec![PhaseVector::zero(system)];
        for chunk in x.chunks(system.phases_per_pulse()) {
            out.push(PhaseVector::from_components(system, chunk)?);
        }
        Ok(out)
    }

    fn residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
        let seq = self.target.sequence(&self.phases(x)?)?;
        let x0 = vec![0.0; self.target.variables.len()];
        let mut amp = |dx: &[f64]| leakage(&seq, self.target.point(dx));
        let n_leak = self.target.system.dim() - 1;
        let mut out = Vec::with_capacity(self.amplitude_indices.len() * n_leak * 2);
        for local in &self.amplitude_indices {
            let d = mixed_partial(&mut amp, &x0, local, &self.fd)?;
            for z in &d.0[..n_leak] {
                out.push(z.re);
                out.push(z.im);
            }
        }
        if out.iter().any(|r| !r.is_finite()) {
            return Err(Error::NonFinite { theta: 0.0, area: PI, detuning: 0.0 });
        }
        Ok(out)
    }

    /// Central-difference Jacobian, row-major `residuals × params`.
    fn jacobian(&self, x: &[f64], n_res: usize) -> Result<Vec<f64>> {
        const STEP: f64 = 1e-5;
        let m = x.len();
        let mut jac = vec![0.0; n_res * m];
        let mut xp = x.to_vec();
        for j in 0..m {
            xp[j] = x[j] + STEP;
            let plus = self.residuals(&xp)?;
            xp[j] = x[j] - STEP;
            let minus = self.residuals(&xp)?;
            xp[j] = x[j];
            for i in 0..n_res {
                jac[i * m + j] = (plus[i] - minus[i]) / (2.0 * STEP);
            }
        }
        Ok(jac)
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Solves `A x = b` for symmetric positive definite `A` (row-major `n × n`).
fn cholesky_solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * n + i] = libm::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i * n + i];
    }
    Some(x)
}

/// Damped Gauss–Newton (Levenberg–Marquardt) on the leakage residuals.
fn levenberg_marquardt(problem: &Problem<'_>, mut x: Vec<f64>, max_iterations: usize) -> Result<Vec<f64>> {
    let m = x.len();
    if m == 0 {
        return Ok(x);
    }
    let mut r = problem.residuals(&x)?;
    let mut cost = sum_sq(&r);
    let mut lambda = 1e-3;
    for _ in 0..max_iterations {
        if cost < 1e-26 {
            break;
        }
        let n_res = r.len();
        let jac = problem.jacobian(&x, n_res)?;
        let mut jtj = vec![0.0; m * m];
        let mut jtr = vec![0.0; m];
        for i in 0..n_res {
            let row = &jac[i * m..(i + 1) * m];
            for a in 0..m {
                jtr[a] += row[a] * r[i];
                for b in 0..m {
                    jtj[a * m + b] += row[a] * row[b];
                }
            }
        }
        let scale = (0..m).map(|a| jtj[a * m + a]).fold(0.0, f64::max).max(1e-12);
        let mut accepted = false;
        let mut step_norm = 0.0;
        while lambda < 1e10 {
            let mut damped = jtj.clone();
            for a in 0..m {
                damped[a * m + a] += lambda * scale;
            }
            let neg: Vec<f64> = jtr.iter().map(|g| -g).collect();
            let Some(delta) = cholesky_solve(&damped, &neg, m) else {
                lambda *= 4.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + d).collect();
            let r_trial = problem.residuals(&trial)?;
            let cost_trial = sum_sq(&r_trial);
            if cost_trial < cost {
                step_norm = libm::sqrt(sum_sq(&delta));
                x = trial;
                r = r_trial;
                cost = cost_trial;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted || step_norm < 1e-14 {
            break;
        }
    }
    Ok(x)
}

fn canonical(phases: &[PhaseVector]) -> Vec<PhaseVector> {
    // shifting every pulse by the first pulse's phases is a basis-phase gauge
    let first = phases[0];
    let minus = PhaseVector {
        phi01: first.phi01.map(|p| -p),
        phi12: -first.phi12,
        phi13: -first.phi13,
    };
    phases.iter().map(|p| p.shifted(&minus).canonical()).collect()
}

fn assess(
    target: &CompensationTarget,
    config: &SolverConfig,
    phases: Vec<PhaseVector>,
    restart: Option<usize>,
) -> Result<PhaseSolution> {
    let phases = canonical(&phases);
    let seq = target.sequence(&phases)?;
    let terms = taylor_coefficients(&seq, target, &config.fd())?;
    let nominal_fidelity = terms[0].value;
    let residuals: Vec<f64> = terms[1..].iter().map(|t| t.value.abs()).collect();
    let converged = nominal_fidelity >= 1.0 - config.convergence_tol
        && residuals.iter().all(|&r| r < config.convergence_tol);
    Ok(PhaseSolution { system: target.system, phases, residuals, nominal_fidelity, converged, restart })
}

/// One multi-start restart, seeded by `(config.seed, index)`.
pub fn solve_restart(
    target: &CompensationTarget,
    config: &SolverConfig,
    index: usize,
) -> Result<PhaseSolution> {
    config.validate()?;
    let problem = Problem::new(target, config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let x0: Vec<f64> = (0..problem.n_free()).map(|_| rng.random_range(-PI..PI)).collect();
    let x = levenberg_marquardt(&problem, x0, config.max_iterations)?;
    assess(target, config, problem.phases(&x)?, Some(index))
}

/// Local refinement from given phases (for instance published values quoted
/// to limited precision).
pub fn refine_phases(
    target: &CompensationTarget,
    config: &SolverConfig,
    start: &[PhaseVector],
) -> Result<PhaseSolution> {
    let config = SolverConfig { n_pulses: start.len(), ..config.clone() };
    config.validate()?;
    if start.iter().any(|p| p.system() != target.system) {
        return Err(Error::argument("start phases do not match the target system"));
    }
    let problem = Problem::new(target, &config);
    let x0: Vec<f64> = canonical(start)[1..].iter().flat_map(|p| p.components()).collect();
    let x = levenberg_marquardt(&problem, x0, config.max_iterations)?;
    assess(target, &config, problem.phases(&x)?, None)
}

fn same_phases(a: &[PhaseVector], b: &[PhaseVector]) -> bool {
    a.iter().zip(b).all(|(p, q)| {
        p.components()
            .iter()
            .zip(q.components())
            .all(|(x, y)| wrap_phase(x - y).abs() < 1e-6)
    })
}

fn profile(target: &CompensationTarget, grid: &Grid, phases: &[PhaseVector]) -> Result<Vec<f64>> {
    let seq = target.sequence(phases)?;
    Ok(scan_analytic(&seq, grid)?.into_iter().map(|r| r.p_target).collect())
}

/// Sorts restarts by residual norm (ties by restart index) and drops
/// duplicates: equal phases modulo 2π, or equal transfer profiles, which
/// covers the symmetry images of a solution.
pub fn merge_solutions(
    target: &CompensationTarget,
    mut solutions: Vec<PhaseSolution>,
) -> Result<Vec<PhaseSolution>> {
    solutions.sort_by(|a, b| {
        a.residual_norm()
            .total_cmp(&b.residual_norm())
            .then_with(|| a.restart.cmp(&b.restart))
    });
    let grid = target.default_grid(21)?;
    let mut kept: Vec<(PhaseSolution, Vec<f64>)> = Vec::new();
    for sol in solutions {
        let prof = profile(target, &grid, &sol.phases)?;
        let duplicate = kept.iter().any(|(k, kp)| {
            same_phases(&k.phases, &sol.phases)
                || kp.iter().zip(&prof).all(|(a, b)| (a - b).abs() < 1e-8)
        });
        if !duplicate {
            kept.push((sol, prof));
        }
    }
    Ok(kept.into_iter().map(|(s, _)| s).collect())
}

/// Multi-start solve: `config.restarts` restarts (one when there are no free
/// phases), merged by [`merge_solutions`]. Unconverged results are still
/// returned, flagged.
pub fn solve_phases(target: &CompensationTarget, config: &SolverConfig) -> Result<Vec<PhaseSolution>> {
    config.validate()?;
    if config.n_pulses == 1 {
        let phases = vec![PhaseVector::zero(target.system)];
        return Ok(vec![assess(target, config, phases, None)?]);
    }
    let restarts = config.restarts.max(1);
    let solutions = (0..restarts)
        .map(|i| solve_restart(target, config, i))
        .collect::<Result<Vec<_>>>()?;
    merge_solutions(target, solutions)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub nominal_fidelity: f64,
    /// Total orders `1..=target.order` whose derivatives are all below the tolerance.
    pub vanished_orders: Vec<u32>,
    /// Largest `k` such that every order `1..=k` vanishes (0 if order 1 does not).
    pub vanished_through: u32,
    pub grid_points: usize,
    /// Share of grid points with `P > 0.999`, `None` for an empty grid.
    pub high_fidelity_fraction: Option<f64>,
}

pub fn verify_solution(
    solution: &PhaseSolution,
    target: &CompensationTarget,
    grid: &Grid,
    config: &SolverConfig,
) -> Result<VerificationReport> {
    let seq = target.sequence(&solution.phases)?;
    let terms = taylor_coefficients(&seq, target, &config.fd())?;
    let vanished_orders: Vec<u32> = (1..=target.order)
        .filter(|&k| {
            terms
                .iter()
                .filter(|t| t.total_order() == k)
                .all(|t| t.value.abs() < config.convergence_tol)
        })
        .collect();
    let vanished_through = (1..=target.order)
        .take_while(|k| vanished_orders.contains(k))
        .last()
        .unwrap_or(0);
    let rows = scan_analytic(&seq, grid)?;
    Ok(VerificationReport {
        nominal_fidelity: terms[0].value,
        vanished_orders,
        vanished_through,
        grid_points: rows.len(),
        high_fidelity_fraction: high_fidelity_fraction(&rows, HIGH_FIDELITY),
    })
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn check<T: Send + Sync>() {}
    check::<PhaseSolution>();
    check::<CompensationTarget>();
    check::<SolverConfig>();
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_pi_pulse_second_derivative() {
        // P = cos²θ, so ∂²P/∂θ² = −2 at θ = 0
        let target = CompensationTarget::theta(System::V, 2).unwrap();
        let seq = target.sequence(&[PhaseVector::v(0.0, 0.0)]).unwrap();
        let terms = taylor_coefficients(&seq, &target, &FdConfig::default()).unwrap();
        assert_eq!(terms.len(), 3);
        assert_relative_eq!(terms[0].value, 1.0, max_relative = 1e-14);
        assert!(terms[1].value.abs() < 1e-9);
        assert_relative_eq!(terms[2].value, -2.0, max_relative = 1e-6);
    }

    #[test]
    fn target_validation() {
        assert!(CompensationTarget::new(System::V, vec![], 2).is_err());
        assert!(CompensationTarget::new(System::V, vec![Variable::Theta], 0).is_err());
        let t = CompensationTarget::new(System::Y, vec![Variable::Detuning, Variable::Theta, Variable::Theta], 2)
            .unwrap();
        assert_eq!(t.variables, vec![Variable::Theta, Variable::Detuning]);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig { fd_step: 0.5, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { n_pulses: 0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { convergence_tol: 0.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn system_mismatch_is_rejected() {
        let target = CompensationTarget::theta(System::Y, 2).unwrap();
        let seq = CompositeSequence::rectangular(System::V, PI, &[PhaseVector::v(0.0, 0.0)]).unwrap();
        assert!(taylor_coefficients(&seq, &target, &FdConfig::default()).is_err());
    }

    #[test]
    fn cholesky_small_system() {
        let a = [4.0, 1.0, 1.0, 3.0];
        let x = cholesky_solve(&a, &[1.0, 2.0], 2).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
        assert!(cholesky_solve(&[0.0, 0.0, 0.0, 0.0], &[1.0, 1.0], 2).is_none());
    }

    #[test]
    fn canonical_gauge_zeroes_first_pulse() {
        let phases = [PhaseVector::y(0.5, -0.2, 1.0), PhaseVector::y(1.5, 0.3, -2.0)];
        let c = canonical(&phases);
        assert_eq!(c[0].components(), vec![0.0, 0.0, 0.0]);
        assert_relative_eq!(c[1].phi01.unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(c[1].phi12, 0.5, max_relative = 1e-15);
        assert_relative_eq!(c[1].phi13, -3.0, max_relative = 1e-15);
    }
}
