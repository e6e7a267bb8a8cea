//! Table and catalog formats.
//!
//! Every number is written as `{:.16e}` (17 significant digits), which
//! round-trips an `f64` exactly; re-emitting a parsed table therefore
//! reproduces it byte for byte.

use std::io::{Read, Write};

use compulse_core::scan::ScanRow;
use compulse_core::solver::{PhaseSolution, VerificationReport};
use compulse_core::OperatingPoint;
use serde::Serialize;
use serde_json::value::RawValue;

use crate::CliError;

pub const CSV_HEADER: [&str; 6] = ["theta", "area", "detuning", "p_target", "p_unwanted", "p_residual"];

pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// Landscape rows in emission order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
}

impl ScanTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            let p = r.point;
            w.write_record([p.theta, p.area, p.detuning, r.p_target, r.p_unwanted, r.p_residual].map(sci))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, CliError> {
        let bad = |msg: String| CliError::Config(format!("csv: {msg}"));
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(|e| bad(e.to_string()))?;
        if header.iter().ne(CSV_HEADER) {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let mut rows = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let v: Vec<f64> = rec
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| bad(format!("row {}: {e}", line + 1)))?;
            if v.len() != 6 {
                return Err(bad(format!("row {}: expected 6 fields", line + 1)));
            }
            rows.push(ScanRow {
                point: OperatingPoint { theta: v[0], area: v[1], detuning: v[2] },
                p_target: v[3],
                p_unwanted: v[4],
                p_residual: v[5],
            });
        }
        Ok(ScanTable { rows })
    }
}

fn num(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() { sci(x) } else { "null".to_owned() };
    RawValue::from_string(text).expect("formatted floats are valid JSON")
}

fn nums(xs: impl IntoIterator<Item = f64>) -> Vec<Box<RawValue>> {
    xs.into_iter().map(num).collect()
}

#[derive(Serialize)]
struct VerificationRecord {
    nominal_fidelity: Box<RawValue>,
    vanished_orders: Vec<u32>,
    vanished_through: u32,
    grid_points: usize,
    high_fidelity_fraction: Option<Box<RawValue>>,
}

#[derive(Serialize)]
struct SolutionRecord {
    system: &'static str,
    n_pulses: usize,
    phases_pi: Vec<Vec<Box<RawValue>>>,
    residuals: Vec<Box<RawValue>>,
    nominal_fidelity: Box<RawValue>,
    converged: bool,
    seed: u64,
    restart: Option<usize>,
    verification: VerificationRecord,
}

/// JSON array of solution records, best first.
pub fn solution_catalog(solutions: &[(PhaseSolution, VerificationReport)], seed: u64) -> String {
    let records: Vec<SolutionRecord> = solutions
        .iter()
        .map(|(s, v)| SolutionRecord {
            system: s.system.name(),
            n_pulses: s.phases.len(),
            phases_pi: s
                .phases
                .iter()
                .map(|p| nums(p.components().into_iter().map(|x| x / std::f64::consts::PI)))
                .collect(),
            residuals: nums(s.residuals.iter().copied()),
            nominal_fidelity: num(s.nominal_fidelity),
            converged: s.converged,
            seed,
            restart: s.restart,
            verification: VerificationRecord {
                nominal_fidelity: num(v.nominal_fidelity),
                vanished_orders: v.vanished_orders.clone(),
                vanished_through: v.vanished_through,
                grid_points: v.grid_points,
                high_fidelity_fraction: v.high_fidelity_fraction.map(num),
            },
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&records).expect("records serialize");
    text.push('\n');
    text
}
