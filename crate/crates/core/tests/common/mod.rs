//! Independent references shared by the integration tests.

#![allow(dead_code)]

use compulse_core::{CMatrix, C64};
use nalgebra::DMatrix;

/// `exp(−i H t)` by nalgebra's Padé matrix exponential.
pub fn expm_propagator(h: &CMatrix, t: f64) -> CMatrix {
    let n = h.dim();
    let m = DMatrix::from_fn(n, n, |i, j| h[(i, j)] * C64::new(0.0, -t));
    let e = m.exp();
    let mut out = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = e[(i, j)];
        }
    }
    out
}

/// V Hamiltonian for a rectangular pulse of unit duration and area `area`.
pub fn v_hamiltonian(area: f64, detuning: f64, theta: f64, phi12: f64, phi13: f64) -> CMatrix {
    let mut h = CMatrix::zeros(3);
    h[(0, 0)] = C64::new(0.5 * detuning, 0.0);
    h[(1, 1)] = C64::new(-0.5 * detuning, 0.0);
    h[(2, 2)] = C64::new(-0.5 * detuning, 0.0);
    h[(0, 1)] = C64::from_polar(0.5 * area * theta.cos(), phi12);
    h[(0, 2)] = C64::from_polar(0.5 * area * theta.sin(), phi13);
    h[(1, 0)] = h[(0, 1)].conj();
    h[(2, 0)] = h[(0, 2)].conj();
    h
}

/// Y Hamiltonian for a rectangular pulse pair of unit duration, basis (0, 1, 2, 3).
pub fn y_hamiltonian(area: f64, detuning: f64, theta: f64, xi: f64, phases: [f64; 3]) -> CMatrix {
    let [p01, p12, p13] = phases;
    let mut h = CMatrix::zeros(4);
    for (i, s) in [-1.0, 1.0, -1.0, -1.0].into_iter().enumerate() {
        h[(i, i)] = C64::new(0.5 * s * detuning, 0.0);
    }
    h[(0, 1)] = C64::from_polar(0.5 * area * xi.sin(), p01);
    h[(1, 2)] = C64::from_polar(0.5 * area * xi.cos() * theta.cos(), p12);
    h[(1, 3)] = C64::from_polar(0.5 * area * xi.cos() * theta.sin(), p13);
    for (i, j) in [(0, 1), (1, 2), (1, 3)] {
        h[(j, i)] = h[(i, j)].conj();
    }
    h
}
