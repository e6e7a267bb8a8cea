//! The four subcommands. Each returns its full output text; writing it is
//! left to the caller so that output is produced by a single writer.

use std::fmt::Write as _;

use compulse_core::oracle::{integrate_sequence, IntegratorConfig};
use compulse_core::scan::{evaluate, ScanRow};
use compulse_core::solver::{merge_solutions, solve_phases, solve_restart, verify_solution};
use compulse_core::{CompositeSequence, OperatingPoint, Propagator};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::output::{sci, solution_catalog, ScanTable};
use crate::CliError;

/// Bar on element-wise and probability deviations for `verify`.
pub const VERIFY_BAR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, exit_code: 0 }
    }
}

fn write_matrix(out: &mut String, u: &Propagator) {
    let dim = u.dim();
    for i in 0..dim {
        let row: Vec<String> = (0..dim)
            .map(|j| {
                let z = u.matrix()[(i, j)];
                format!("{}{}{}i", sci(z.re), if z.im.is_sign_negative() { "" } else { "+" }, sci(z.im))
            })
            .collect();
        writeln!(out, "  {}", row.join("  ")).unwrap();
    }
}

fn write_point(out: &mut String, p: &OperatingPoint) {
    writeln!(out, "theta = {}", sci(p.theta)).unwrap();
    writeln!(out, "area = {}", sci(p.area)).unwrap();
    writeln!(out, "detuning = {}", sci(p.detuning)).unwrap();
}

pub fn cmd_propagate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let seq = cfg.require_sequence()?;
    let u = seq.propagator(cfg.point)?;
    let system = seq.system;
    let mut out = String::new();
    writeln!(out, "system = {}", system.name()).unwrap();
    writeln!(out, "pulses = {}", seq.len()).unwrap();
    write_point(&mut out, &cfg.point);
    let labels: Vec<String> = u.labels().iter().map(|l| l.to_string()).collect();
    writeln!(out, "basis = {}", labels.join(" ")).unwrap();
    writeln!(out, "U =").unwrap();
    write_matrix(&mut out, &u);
    writeln!(out, "unitarity_defect = {}", sci(u.unitarity_defect())).unwrap();
    let from = system.initial_state();
    for &to in u.labels() {
        let p = u.amplitude(from, to)?.norm_sqr();
        writeln!(out, "P{from}->{to} = {p:.6} ({})", sci(p)).unwrap();
    }
    Ok(Outcome::ok(out))
}

pub fn scan_rows(cfg: &RunConfig) -> Result<Vec<ScanRow>, CliError> {
    let seq = cfg.require_sequence()?;
    let points = cfg.grid(101)?.points();
    let rows = if cfg.scan_oracle {
        points
            .par_iter()
            .map(|&p| ScanRow::from_propagator(seq, p, &integrate_sequence(seq, p, &cfg.integrator)?))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        points.par_iter().map(|&p| evaluate(seq, p)).collect::<Result<Vec<_>, _>>()?
    };
    Ok(rows)
}

pub fn cmd_scan(cfg: &RunConfig) -> Result<Outcome, CliError> {
    Ok(Outcome::ok(ScanTable { rows: scan_rows(cfg)? }.to_csv_string()))
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = &cfg.solve;
    let solutions = if s.config.n_pulses == 1 {
        solve_phases(&s.target, &s.config)?
    } else {
        let restarts = (0..s.config.restarts.max(1))
            .into_par_iter()
            .map(|i| solve_restart(&s.target, &s.config, i))
            .collect::<Result<Vec<_>, _>>()?;
        merge_solutions(&s.target, restarts)?
    };
    let grid = s.target.default_grid(s.verify_points)?;
    let verified = solutions
        .into_par_iter()
        .map(|sol| {
            let report = verify_solution(&sol, &s.target, &grid, &s.config)?;
            Ok((sol, report))
        })
        .collect::<Result<Vec<_>, compulse_core::Error>>()?;
    Ok(Outcome::ok(solution_catalog(&verified, s.config.seed)))
}

/// Largest deviation found at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub point: OperatingPoint,
    pub element: f64,
    pub probability: f64,
    pub analytic: Propagator,
    pub oracle: Propagator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub points: usize,
    pub max_element: f64,
    pub max_probability: f64,
    pub max_unitarity_defect: f64,
    /// Point with the largest element-wise deviation (earliest on ties).
    pub worst: Option<Deviation>,
}

impl OracleComparison {
    pub fn passes(&self) -> bool {
        self.max_element <= VERIFY_BAR && self.max_probability <= VERIFY_BAR
    }
}

/// Compares the closed form of `analytic` with the integrated `oracle`
/// sequence. The two are normally identical; keeping them separate lets a
/// corrupted copy serve as a negative control.
pub fn compare_with_oracle(
    analytic: &CompositeSequence,
    oracle: &CompositeSequence,
    points: &[OperatingPoint],
    integrator: &IntegratorConfig,
) -> Result<OracleComparison, compulse_core::Error> {
    let devs = points
        .par_iter()
        .map(|&p| {
            let a = analytic.propagator(p)?;
            let o = integrate_sequence(oracle, p, integrator)?;
            let element = a.matrix().max_abs_diff(o.matrix());
            let probability = a
                .matrix()
                .as_slice()
                .iter()
                .zip(o.matrix().as_slice())
                .map(|(x, y)| (x.norm_sqr() - y.norm_sqr()).abs())
                .fold(0.0, f64::max);
            let defect = a.unitarity_defect().max(o.unitarity_defect());
            Ok((Deviation { point: p, element, probability, analytic: a, oracle: o }, defect))
        })
        .collect::<Result<Vec<_>, compulse_core::Error>>()?;
    let mut cmp = OracleComparison {
        points: devs.len(),
        max_element: 0.0,
        max_probability: 0.0,
        max_unitarity_defect: 0.0,
        worst: None,
    };
    for (d, defect) in devs {
        cmp.max_probability = cmp.max_probability.max(d.probability);
        cmp.max_unitarity_defect = cmp.max_unitarity_defect.max(defect);
        if cmp.worst.is_none() || d.element > cmp.max_element {
            cmp.max_element = d.element;
            cmp.worst = Some(d);
        }
    }
    Ok(cmp)
}

pub fn verification_text(cmp: &OracleComparison) -> String {
    let mut out = String::new();
    writeln!(out, "points = {}", cmp.points).unwrap();
    writeln!(out, "max_element_deviation = {}", sci(cmp.max_element)).unwrap();
    writeln!(out, "max_probability_deviation = {}", sci(cmp.max_probability)).unwrap();
    writeln!(out, "max_unitarity_defect = {}", sci(cmp.max_unitarity_defect)).unwrap();
    writeln!(out, "bar = {}", sci(VERIFY_BAR)).unwrap();
    writeln!(out, "status = {}", if cmp.passes() { "pass" } else { "fail" }).unwrap();
    if let (false, Some(w)) = (cmp.passes(), &cmp.worst) {
        writeln!(out, "worst point:").unwrap();
        write_point(&mut out, &w.point);
        writeln!(out, "element_deviation = {}", sci(w.element)).unwrap();
        writeln!(out, "probability_deviation = {}", sci(w.probability)).unwrap();
        writeln!(out, "analytic =").unwrap();
        write_matrix(&mut out, &w.analytic);
        writeln!(out, "oracle =").unwrap();
        write_matrix(&mut out, &w.oracle);
    }
    out
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let seq = cfg.require_sequence()?;
    let points = cfg.grid(cfg.verify_points)?.points();
    let cmp = compare_with_oracle(seq, seq, &points, &cfg.integrator)?;
    Ok(Outcome { text: verification_text(&cmp), exit_code: if cmp.passes() { 0 } else { 1 } })
}
