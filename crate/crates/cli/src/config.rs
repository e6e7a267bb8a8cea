//! TOML run configuration.
//!
//! ```toml
//! preset = "fig2-3pulse"        # or: system = "V" plus [[pulse]] entries
//! units = "pi"                  # phases, theta, xi and areas in units of pi ("rad" for radians)
//!
//! [point]                       # operating point for propagate and scan/verify bases
//! theta = 0.0
//! area = 1.0
//! detuning = 0.0                # always dimensionless Delta*T
//!
//! [[pulse]]
//! phi12 = 0.0
//! phi13 = 0.0                   # phi01 as well for the Y system
//! area = 1.0                    # default pi
//! detuning = 0.0                # Delta in units of 1/T, default 0
//! duration = 1.0
//! envelope = "rectangular"      # or "gaussian" (sigma = duration/6)
//!
//! [[scan.axis]]                 # axes vary row-major in the order listed
//! variable = "theta"
//! min = 0.0
//! max = 0.5
//! points = 101
//!
//! [solve]
//! variables = ["theta"]
//! order = 4
//! n_pulses = 3
//!
//! [verify]
//! points = 21
//! ```

use std::f64::consts::{FRAC_PI_4, PI};

use compulse_core::oracle::IntegratorConfig;
use compulse_core::presets::{self, Preset};
use compulse_core::scan::{Axis, Grid, Variable};
use compulse_core::solver::{CompensationTarget, SolverConfig};
use compulse_core::{CompositeSequence, Envelope, OperatingPoint, PhaseVector, PulseParams, System};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Units {
    Pi,
    Rad,
}

impl Units {
    fn factor(self) -> f64 {
        match self {
            Units::Pi => PI,
            Units::Rad => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
enum SystemName {
    #[serde(alias = "v")]
    V,
    #[serde(alias = "y")]
    Y,
}

impl From<SystemName> for System {
    fn from(s: SystemName) -> Self {
        match s {
            SystemName::V => System::V,
            SystemName::Y => System::Y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum EnvelopeName {
    Rectangular,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum VariableName {
    Theta,
    Area,
    Detuning,
}

impl From<VariableName> for Variable {
    fn from(v: VariableName) -> Self {
        match v {
            VariableName::Theta => Variable::Theta,
            VariableName::Area => Variable::Area,
            VariableName::Detuning => Variable::Detuning,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    system: Option<SystemName>,
    preset: Option<String>,
    units: Option<Units>,
    xi: Option<f64>,
    point: Option<RawPoint>,
    #[serde(default, rename = "pulse")]
    pulses: Vec<RawPulse>,
    scan: Option<RawScan>,
    solve: Option<RawSolve>,
    verify: Option<RawVerify>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    theta: Option<f64>,
    area: Option<f64>,
    detuning: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPulse {
    phi01: Option<f64>,
    phi12: f64,
    phi13: f64,
    area: Option<f64>,
    detuning: Option<f64>,
    duration: Option<f64>,
    envelope: Option<EnvelopeName>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    #[serde(default)]
    axis: Vec<RawAxis>,
    /// Samples per axis of the preset landscape when no axes are listed.
    points: Option<usize>,
    #[serde(default)]
    oracle: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    variable: VariableName,
    min: f64,
    max: f64,
    points: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolve {
    variables: Option<Vec<VariableName>>,
    order: Option<u32>,
    n_pulses: Option<usize>,
    restarts: Option<usize>,
    seed: Option<u64>,
    fd_step: Option<f64>,
    convergence_tol: Option<f64>,
    max_iterations: Option<usize>,
    /// Grid samples per compensated variable for the verification summary.
    verify_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVerify {
    points: Option<usize>,
    step_count: Option<usize>,
    tolerance_target: Option<f64>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct SolveSettings {
    pub target: CompensationTarget,
    pub config: SolverConfig,
    pub verify_points: usize,
}

/// Validated configuration. Angles are in radians from here on.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub system: System,
    pub xi: f64,
    pub preset: Option<&'static Preset>,
    /// `None` when the file defines no pulses (allowed for `solve`).
    pub sequence: Option<CompositeSequence>,
    pub point: OperatingPoint,
    pub scan_axes: Vec<Axis>,
    pub scan_points: Option<usize>,
    pub scan_oracle: bool,
    pub solve: SolveSettings,
    pub verify_points: usize,
    pub integrator: IntegratorConfig,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

impl RunConfig {
    pub fn from_toml(text: &str, overrides: &Overrides) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Self::from_raw(raw, overrides)
    }

    /// Configuration consisting of a preset only.
    pub fn from_preset(name: &str, overrides: &Overrides) -> Result<Self, CliError> {
        let raw = RawConfig { preset: Some(name.to_owned()), ..RawConfig::default() };
        Self::from_raw(raw, overrides)
    }

    fn from_raw(raw: RawConfig, overrides: &Overrides) -> Result<Self, CliError> {
        let units = raw.units.unwrap_or(Units::Pi).factor();
        let preset_name = overrides.preset.clone().or(raw.preset);
        let preset = preset_name
            .map(|name| presets::find(&name).map_err(|e| invalid("preset", e)))
            .transpose()?;
        if preset.is_some() && !raw.pulses.is_empty() {
            return Err(invalid("pulse", "a preset and explicit [[pulse]] entries are mutually exclusive"));
        }

        let system = match (raw.system.map(System::from), preset) {
            (Some(s), Some(p)) if s != p.system => {
                return Err(invalid("system", format!("{} contradicts preset {}", s.name(), p.name)))
            }
            (Some(s), _) => s,
            (None, Some(p)) => p.system,
            (None, None) => return Err(invalid("system", "missing (give `system` or `preset`)")),
        };
        let xi = raw.xi.map_or(FRAC_PI_4, |x| x * units);

        let sequence = if let Some(p) = preset {
            Some(p.sequence().with_xi(xi).map_err(|e| invalid("xi", e))?)
        } else if raw.pulses.is_empty() {
            None
        } else {
            let pulses = raw
                .pulses
                .iter()
                .enumerate()
                .map(|(k, p)| build_pulse(system, units, k, p))
                .collect::<Result<Vec<_>, _>>()?;
            let seq = CompositeSequence::new(system, pulses).map_err(|e| invalid("pulse", e))?;
            Some(seq.with_xi(xi).map_err(|e| invalid("xi", e))?)
        };

        let rp = raw.point.unwrap_or_default();
        let point = OperatingPoint {
            theta: rp.theta.map_or(0.0, |t| t * units),
            area: rp.area.map_or(PI, |a| a * units),
            detuning: rp.detuning.unwrap_or(0.0),
        };
        for (name, v) in [("point.theta", point.theta), ("point.area", point.area), ("point.detuning", point.detuning)] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }

        let scan = raw.scan.unwrap_or_default();
        let scan_axes = scan
            .axis
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let scale = match a.variable {
                    VariableName::Detuning => 1.0,
                    _ => units,
                };
                Axis::linspace(a.variable.into(), a.min * scale, a.max * scale, a.points)
                    .map_err(|e| invalid(&format!("scan.axis[{k}]"), e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut seen = Vec::new();
        for (k, a) in scan_axes.iter().enumerate() {
            if seen.contains(&a.variable) {
                return Err(invalid(&format!("scan.axis[{k}]"), format!("{} listed twice", a.variable.name())));
            }
            seen.push(a.variable);
        }
        if let Some(n) = scan.points {
            if n < 2 {
                return Err(invalid("scan.points", "need at least 2"));
            }
        }

        let solve = build_solve(system, xi, sequence.as_ref(), raw.solve.unwrap_or_default(), overrides)?;

        let verify = raw.verify.unwrap_or_default();
        let integrator = IntegratorConfig {
            step_count: verify.step_count.unwrap_or(IntegratorConfig::default().step_count),
            tolerance_target: verify.tolerance_target.unwrap_or(IntegratorConfig::default().tolerance_target),
        };
        integrator.validate().map_err(|e| invalid("verify", e))?;
        let verify_points = verify.points.unwrap_or(21);
        if verify_points < 2 {
            return Err(invalid("verify.points", "need at least 2"));
        }

        Ok(RunConfig {
            system,
            xi,
            preset,
            sequence,
            point,
            scan_axes,
            scan_points: scan.points,
            scan_oracle: scan.oracle,
            solve,
            verify_points,
            integrator,
        })
    }

    pub fn require_sequence(&self) -> Result<&CompositeSequence, CliError> {
        self.sequence
            .as_ref()
            .ok_or_else(|| invalid("pulse", "the sequence is empty (give `preset` or [[pulse]] entries)"))
    }

    /// Listed scan axes; otherwise the preset landscape; otherwise a θ sweep.
    pub fn grid(&self, default_points: usize) -> Result<Grid, CliError> {
        let grid = if !self.scan_axes.is_empty() {
            Grid::new(self.scan_axes.clone())
        } else {
            let points = self.scan_points.unwrap_or(default_points);
            let landscape = self.preset.map_or(presets::Landscape::Theta, |p| p.landscape);
            presets::landscape_grid(landscape, points).map_err(|e| invalid("scan", e))?
        };
        Ok(grid.with_base(self.point))
    }
}

fn build_pulse(system: System, units: f64, k: usize, p: &RawPulse) -> Result<PulseParams, CliError> {
    let field = |name: &str| format!("pulse[{k}].{name}");
    let phases = match (system, p.phi01) {
        (System::V, Some(_)) => return Err(invalid(&field("phi01"), "not allowed for the V system")),
        (System::V, None) => PhaseVector::v(p.phi12 * units, p.phi13 * units),
        (System::Y, Some(p01)) => PhaseVector::y(p01 * units, p.phi12 * units, p.phi13 * units),
        (System::Y, None) => return Err(invalid(&field("phi01"), "required for the Y system")),
    };
    let duration = p.duration.unwrap_or(1.0);
    let envelope = match p.envelope.unwrap_or(EnvelopeName::Rectangular) {
        EnvelopeName::Rectangular => Envelope::Rectangular,
        EnvelopeName::Gaussian => Envelope::gaussian_for(duration),
    };
    PulseParams::new(
        p.area.map_or(PI, |a| a * units),
        p.detuning.unwrap_or(0.0),
        duration,
        envelope,
        phases,
    )
    .map_err(|e| invalid(&format!("pulse[{k}]"), e))
}

fn build_solve(
    system: System,
    xi: f64,
    sequence: Option<&CompositeSequence>,
    raw: RawSolve,
    overrides: &Overrides,
) -> Result<SolveSettings, CliError> {
    let variables: Vec<Variable> =
        raw.variables.unwrap_or_else(|| vec![VariableName::Theta]).into_iter().map(Variable::from).collect();
    let target = CompensationTarget::new(system, variables, raw.order.unwrap_or(2))
        .map_err(|e| invalid("solve", e))?
        .with_xi(xi);
    let defaults = SolverConfig::default();
    let config = SolverConfig {
        n_pulses: raw.n_pulses.or(sequence.map(|s| s.len())).unwrap_or(defaults.n_pulses),
        restarts: raw.restarts.unwrap_or(defaults.restarts),
        seed: overrides.seed.or(raw.seed).unwrap_or(defaults.seed),
        fd_step: raw.fd_step.unwrap_or(defaults.fd_step),
        convergence_tol: raw.convergence_tol.unwrap_or(defaults.convergence_tol),
        max_iterations: raw.max_iterations.unwrap_or(defaults.max_iterations),
    };
    config.validate().map_err(|e| invalid("solve", e))?;
    let verify_points = raw.verify_points.unwrap_or(if target.variables.len() == 1 { 101 } else { 41 });
    if verify_points < 2 {
        return Err(invalid("solve.verify_points", "need at least 2"));
    }
    Ok(SolveSettings { target, config, verify_points })
}
