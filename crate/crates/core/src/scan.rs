//! Robustness landscapes over `(θ, A, ΔT)`.

use alloc::vec::Vec;

use crate::dynamics::Propagator;
use crate::sequence::{CompositeSequence, OperatingPoint};
use crate::{Error, Result};

/// A parameter the landscape (or a Taylor expansion) can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variable {
    Theta,
    Area,
    Detuning,
}

impl Variable {
    pub const ALL: [Variable; 3] = [Variable::Theta, Variable::Area, Variable::Detuning];

    pub fn name(self) -> &'static str {
        match self {
            Variable::Theta => "theta",
            Variable::Area => "area",
            Variable::Detuning => "detuning",
        }
    }

    pub fn get(self, point: &OperatingPoint) -> f64 {
        match self {
            Variable::Theta => point.theta,
            Variable::Area => point.area,
            Variable::Detuning => point.detuning,
        }
    }

    pub fn set(self, point: &mut OperatingPoint, value: f64) {
        match self {
            Variable::Theta => point.theta = value,
            Variable::Area => point.area = value,
            Variable::Detuning => point.detuning = value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub variable: Variable,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(variable: Variable, values: Vec<f64>) -> Self {
        Axis { variable, values }
    }

    /// `points` evenly spaced values from `min` to `max` inclusive.
    pub fn linspace(variable: Variable, min: f64, max: f64, points: usize) -> Result<Self> {
        if points < 2 || !(min < max) {
            return Err(Error::argument(alloc::format!(
                "axis {}: need points >= 2 and min < max (got {points}, {min}, {max})",
                variable.name()
            )));
        }
        let step = (max - min) / (points - 1) as f64;
        let values = (0..points)
            .map(|i| if i + 1 == points { max } else { min + step * i as f64 })
            .collect();
        Ok(Axis { variable, values })
    }
}

/// Cartesian grid; variables without an axis stay at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub base: OperatingPoint,
    pub axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Self {
        Grid { base: OperatingPoint::NOMINAL, axes }
    }

    pub fn with_base(mut self, base: OperatingPoint) -> Self {
        self.base = base;
        self
    }

    /// A single point.
    pub fn point(base: OperatingPoint) -> Self {
        Grid { base, axes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major: the first axis varies slowest.
    pub fn points(&self) -> Vec<OperatingPoint> {
        let total = self.len();
        let mut out = Vec::with_capacity(total);
        for mut flat in 0..total {
            let mut point = self.base;
            for axis in self.axes.iter().rev() {
                let n = axis.values.len();
                axis.variable.set(&mut point, axis.values[flat % n]);
                flat /= n;
            }
            out.push(point);
        }
        out
    }
}

/// Populations reached from the initial state at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub point: OperatingPoint,
    pub p_target: f64,
    pub p_unwanted: f64,
    /// Everything else: population left in the initial state and, for Y,
    /// in the intermediate state `|1⟩`.
    pub p_residual: f64,
}

impl ScanRow {
    pub fn from_propagator(
        seq: &CompositeSequence,
        point: OperatingPoint,
        u: &Propagator,
    ) -> Result<Self> {
        let system = seq.system;
        let from = system.initial_state();
        let mut row = ScanRow { point, p_target: 0.0, p_unwanted: 0.0, p_residual: 0.0 };
        for &to in u.labels() {
            let p = u.amplitude(from, to)?.norm_sqr();
            if !p.is_finite() {
                return Err(Error::NonFinite { theta: point.theta, area: point.area, detuning: point.detuning });
            }
            if to == system.target_state() {
                row.p_target = p;
            } else if to == system.unwanted_state() {
                row.p_unwanted = p;
            } else {
                row.p_residual += p;
            }
        }
        Ok(row)
    }
}

pub fn evaluate(seq: &CompositeSequence, point: OperatingPoint) -> Result<ScanRow> {
    ScanRow::from_propagator(seq, point, &seq.propagator(point)?)
}

/// Analytic landscape, in [`Grid::points`] order.
pub fn scan_analytic(seq: &CompositeSequence, grid: &Grid) -> Result<Vec<ScanRow>> {
    grid.points().into_iter().map(|p| evaluate(seq, p)).collect()
}

/// Share of rows whose transfer probability exceeds `threshold`; `None` for no rows.
pub fn high_fidelity_fraction(rows: &[ScanRow], threshold: f64) -> Option<f64> {
    if rows.is_empty() {
        return None;
    }
    let hits = rows.iter().filter(|r| r.p_target > threshold).count();
    Some(hits as f64 / rows.len() as f64)
}

/// Largest `θ` on an even grid over `[0, θ_max]` such that the transfer
/// probability exceeds `threshold` at every grid point from 0 up to it.
/// Returns `None` when already the nominal point fails.
pub fn theta_extent(
    seq: &CompositeSequence,
    base: OperatingPoint,
    theta_max: f64,
    points: usize,
    threshold: f64,
) -> Result<Option<f64>> {
    let axis = Axis::linspace(Variable::Theta, 0.0, theta_max, points)?;
    let mut best = None;
    for &theta in &axis.values {
        let p = seq.transfer_probability(OperatingPoint { theta, ..base })?;
        if p > threshold {
            best = Some(theta);
        } else {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{PhaseVector, System};
    use core::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn grid_is_row_major() {
        let grid = Grid::new(alloc::vec![
            Axis::new(Variable::Theta, alloc::vec![0.0, 1.0]),
            Axis::new(Variable::Detuning, alloc::vec![10.0, 20.0, 30.0]),
        ]);
        let pts = grid.points();
        assert_eq!(pts.len(), 6);
        assert_eq!((pts[0].theta, pts[0].detuning), (0.0, 10.0));
        assert_eq!((pts[1].theta, pts[1].detuning), (0.0, 20.0));
        assert_eq!((pts[3].theta, pts[3].detuning), (1.0, 10.0));
        assert!(pts.iter().all(|p| p.area == PI));
    }

    #[test]
    fn empty_and_single_point_grids() {
        assert_eq!(Grid::point(OperatingPoint::NOMINAL).len(), 1);
        let empty = Grid::new(alloc::vec![Axis::new(Variable::Theta, alloc::vec![])]);
        assert!(empty.is_empty());
        assert!(empty.points().is_empty());
        assert_eq!(high_fidelity_fraction(&[], 0.999), None);
    }

    #[test]
    fn linspace_validation() {
        assert!(Axis::linspace(Variable::Theta, 0.0, 1.0, 1).is_err());
        assert!(Axis::linspace(Variable::Theta, 1.0, 1.0, 5).is_err());
        let a = Axis::linspace(Variable::Theta, 0.0, FRAC_PI_2, 101).unwrap();
        assert_eq!(a.values[100], FRAC_PI_2);
    }

    #[test]
    fn single_pulse_rows_sum_to_one() {
        let seq = CompositeSequence::rectangular(System::Y, PI, &[PhaseVector::y(0.1, 0.2, 0.3)]).unwrap();
        let grid = Grid::new(alloc::vec![Axis::linspace(Variable::Theta, 0.0, 1.0, 7).unwrap()]);
        for row in scan_analytic(&seq, &grid).unwrap() {
            assert!((row.p_target + row.p_unwanted + row.p_residual - 1.0).abs() < 1e-12);
        }
    }
}
