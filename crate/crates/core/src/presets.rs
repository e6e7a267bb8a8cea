//! Published composite sequences, phases in units of π.
//!
//! Every pulse (V) or pulse pair (Y) is a resonant rectangular pulse of unit
//! duration with rms area π, except the single-pulse references.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::dynamics::{PhaseVector, System};
use crate::scan::{Axis, Grid, Variable};
use crate::sequence::CompositeSequence;
use crate::{Error, Result};

/// Detuning range `ΔT ∈ [−DETUNING_SPAN, DETUNING_SPAN]` of the built-in landscapes.
pub const DETUNING_SPAN: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Landscape {
    /// `θ ∈ [0, π/2]`.
    Theta,
    /// `θ ∈ [0, π/2]` × `A ∈ [0, 2π]`.
    ThetaArea,
    /// `θ ∈ [0, π/2]` × `ΔT ∈ [−4, 4]`.
    ThetaDetuning,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub system: System,
    /// Area of each pulse in units of π.
    pub area_pi: f64,
    pub phi01: Option<&'static [f64]>,
    pub phi12: &'static [f64],
    pub phi13: &'static [f64],
    pub landscape: Landscape,
    pub description: &'static str,
}

const THIRD: f64 = 1.0 / 3.0;
const TWO_THIRDS: f64 = 2.0 / 3.0;
const FOUR_THIRDS: f64 = 4.0 / 3.0;

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "single-pi",
        system: System::V,
        area_pi: 1.0,
        phi01: None,
        phi12: &[0.0],
        phi13: &[0.0],
        landscape: Landscape::Theta,
        description: "V system, single resonant pi pulse",
    },
    Preset {
        name: "fig2-3pulse",
        system: System::V,
        area_pi: 1.0,
        phi01: None,
        phi12: &[0.0, TWO_THIRDS, 0.0],
        phi13: &[0.0, 1.0, THIRD],
        landscape: Landscape::Theta,
        description: "V system, three pi pulses compensating theta",
    },
    Preset {
        name: "fig2-5pulse",
        system: System::V,
        area_pi: 1.0,
        phi01: None,
        phi12: &[0.0, 1.411, 0.249, -0.432, -0.935],
        phi13: &[0.0, 0.454, -0.632, 0.14, -0.514],
        landscape: Landscape::Theta,
        description: "V system, five pi pulses compensating theta",
    },
    Preset {
        name: "fig3-area",
        system: System::V,
        area_pi: 1.0,
        phi01: None,
        phi12: &[0.0, TWO_THIRDS, 0.0],
        phi13: &[0.0, 1.0, THIRD],
        landscape: Landscape::ThetaArea,
        description: "V system, three pi pulses compensating theta and pulse area",
    },
    Preset {
        name: "fig3-detuning",
        system: System::V,
        area_pi: 1.0,
        phi01: None,
        phi12: &[0.0, THIRD, 0.0],
        phi13: &[0.0, TWO_THIRDS, 0.0],
        landscape: Landscape::ThetaDetuning,
        description: "V system, three rectangular pi pulses compensating theta and detuning",
    },
    Preset {
        name: "single-2pi-pair",
        system: System::Y,
        area_pi: 2.0,
        phi01: Some(&[0.0]),
        phi12: &[0.0],
        phi13: &[0.0],
        landscape: Landscape::Theta,
        description: "Y system, single resonant pulse pair of rms area 2pi",
    },
    Preset {
        name: "single-pi-pair",
        system: System::Y,
        area_pi: 1.0,
        phi01: Some(&[0.0]),
        phi12: &[0.0],
        phi13: &[0.0],
        landscape: Landscape::ThetaDetuning,
        description: "Y system, single rectangular pulse pair of rms area pi",
    },
    Preset {
        name: "fig4-2pair",
        system: System::Y,
        area_pi: 1.0,
        phi01: Some(&[0.0, 0.0]),
        phi12: &[0.0, 0.0],
        phi13: &[0.0, 1.0],
        landscape: Landscape::Theta,
        description: "Y system, two pi pulse pairs compensating theta",
    },
    Preset {
        name: "fig4-6pair",
        system: System::Y,
        area_pi: 1.0,
        phi01: Some(&[0.0, 0.0, -0.181, -0.181, -0.033, -0.033]),
        phi12: &[0.0, 0.0, -0.517, -0.517, -0.398, -0.398],
        phi13: &[0.0, 0.562, 0.026, -1.554, 0.393, 0.238],
        landscape: Landscape::Theta,
        description: "Y system, six pi pulse pairs compensating theta",
    },
    Preset {
        name: "fig5-area",
        system: System::Y,
        area_pi: 1.0,
        phi01: Some(&[0.0, 0.0, -0.986, -0.986, 0.348, 0.348]),
        phi12: &[0.0, 0.0, 0.667, 0.667, -0.317, -0.317],
        phi13: &[0.0, -0.661, 0.337, -0.042, 0.955, 0.285],
        landscape: Landscape::ThetaArea,
        description: "Y system, six pi pulse pairs compensating theta and pulse area",
    },
    Preset {
        name: "fig5-detuning",
        system: System::Y,
        area_pi: 1.0,
        phi01: Some(&[0.0, 0.0, 0.0, 0.0, FOUR_THIRDS, FOUR_THIRDS]),
        phi12: &[0.0, 0.0, TWO_THIRDS, TWO_THIRDS, TWO_THIRDS, TWO_THIRDS],
        phi13: &[0.0, 0.937, 0.854, 0.171, 0.798, 1.448],
        landscape: Landscape::ThetaDetuning,
        description: "Y system, six rectangular pi pulse pairs compensating theta and detuning",
    },
];

/// Presets with a published phase set (everything but the single-pulse references).
pub fn published() -> impl Iterator<Item = &'static Preset> {
    PRESETS.iter().filter(|p| p.name.starts_with("fig"))
}

pub fn find(name: &str) -> Result<&'static Preset> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::argument(alloc::format!("unknown preset {name:?}")))
}

impl Preset {
    pub fn len(&self) -> usize {
        self.phi12.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi12.is_empty()
    }

    /// Phase vectors in radians.
    pub fn phases(&self) -> Vec<PhaseVector> {
        (0..self.len())
            .map(|k| PhaseVector {
                phi01: self.phi01.map(|p| p[k] * PI),
                phi12: self.phi12[k] * PI,
                phi13: self.phi13[k] * PI,
            })
            .collect()
    }

    pub fn sequence(&self) -> CompositeSequence {
        CompositeSequence::rectangular(self.system, self.area_pi * PI, &self.phases())
            .expect("built-in presets are well formed")
    }

    /// Single-pulse reference for this preset's landscape.
    pub fn reference(&self) -> &'static Preset {
        // a single pi pair leaves |2> a quarter populated; the 2pi pair transfers fully
        let name = match self.system {
            System::V => "single-pi",
            System::Y => "single-2pi-pair",
        };
        find(name).expect("reference presets exist")
    }

    /// Landscape grid with `points` samples per axis.
    pub fn landscape_grid(&self, points: usize) -> Result<Grid> {
        landscape_grid(self.landscape, points)
    }
}

pub fn landscape_grid(landscape: Landscape, points: usize) -> Result<Grid> {
    let theta = Axis::linspace(Variable::Theta, 0.0, FRAC_PI_2, points)?;
    let axes = match landscape {
        Landscape::Theta => alloc::vec![theta],
        Landscape::ThetaArea => {
            alloc::vec![theta, Axis::linspace(Variable::Area, 0.0, 2.0 * PI, points)?]
        }
        Landscape::ThetaDetuning => alloc::vec![
            theta,
            Axis::linspace(Variable::Detuning, -DETUNING_SPAN, DETUNING_SPAN, points)?
        ],
    };
    Ok(Grid::new(axes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::OperatingPoint;

    #[test]
    fn presets_are_consistent() {
        for p in PRESETS {
            assert_eq!(p.phi13.len(), p.len(), "{}", p.name);
            if let Some(p01) = p.phi01 {
                assert_eq!(p01.len(), p.len());
                assert_eq!(p.system, System::Y);
            } else {
                assert_eq!(p.system, System::V);
            }
            // global phase fixed by the first pulse
            assert!(p.phases()[0].components().iter().all(|&x| x == 0.0));
            p.sequence().validate().unwrap();
        }
        assert_eq!(published().count(), 8);
        assert!(find("nope").is_err());
    }

    #[test]
    fn published_sets_transfer_at_nominal() {
        for p in published() {
            let prob = p.sequence().transfer_probability(OperatingPoint::NOMINAL).unwrap();
            assert!((prob - 1.0).abs() < 1e-4, "{}: {prob}", p.name);
        }
    }
}
