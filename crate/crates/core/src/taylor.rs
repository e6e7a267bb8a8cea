//! Mixed partial derivatives by central finite differences with Richardson
//! extrapolation.
//!
//! The `n`-th central difference `δₛⁿ f / sⁿ` (points at `(n/2 − j)s`) has an
//! error expansion in even powers of `s`, also for tensor products over
//! several variables, so repeated halving of `s` followed by a Neville
//! tableau in `s²` removes the leading error terms.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    /// Base step for derivatives of total order ≤ 2. Order `k > 2` uses
    /// `step^(2/k)`, which keeps the round-off bound `ε/h^k` near `ε/step²`.
    pub step: f64,
    /// Richardson extrapolation levels (`levels + 1` step sizes).
    pub levels: usize,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig { step: 1e-3, levels: 2 }
    }
}

impl FdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= 0.1) {
            return Err(Error::argument(alloc::format!("fd_step {} outside (0, 0.1]", self.step)));
        }
        Ok(())
    }

    pub fn step_for_order(&self, order: u32) -> f64 {
        if order <= 2 {
            self.step
        } else {
            libm::pow(self.step, 2.0 / order as f64)
        }
    }
}

/// Values a finite-difference formula can combine.
pub trait FdValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
}

impl FdValue for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl FdValue for num_complex::Complex64 {
    fn zero() -> Self {
        num_complex::Complex64::new(0.0, 0.0)
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn central_stencil<T, F>(f: &mut F, x0: &[f64], orders: &[u32], s: f64) -> Result<T>
where
    T: FdValue,
    F: FnMut(&[f64]) -> Result<T>,
{
    let total: u32 = orders.iter().sum();
    let mut counter = vec![0u32; orders.len()];
    let mut x = x0.to_vec();
    let mut acc = T::zero();
    loop {
        let mut weight = 1.0;
        for (d, (&n, &j)) in orders.iter().zip(&counter).enumerate() {
            x[d] = x0[d] + (0.5 * n as f64 - j as f64) * s;
            weight *= binomial(n, j) * if j % 2 == 0 { 1.0 } else { -1.0 };
        }
        acc = acc + f(&x)? * weight;
        // odometer over j_d ∈ 0..=n_d
        let mut d = 0;
        loop {
            if d == orders.len() {
                return Ok(acc * libm::pow(s, -(total as f64)));
            }
            if counter[d] < orders[d] {
                counter[d] += 1;
                break;
            }
            counter[d] = 0;
            d += 1;
        }
    }
}

/// `∂^|orders| f / ∏ ∂x_d^{orders_d}` at `x0`.
pub fn mixed_partial<T, F>(f: &mut F, x0: &[f64], orders: &[u32], cfg: &FdConfig) -> Result<T>
where
    T: FdValue,
    F: FnMut(&[f64]) -> Result<T>,
{
    if orders.len() != x0.len() {
        return Err(Error::argument("derivative orders do not match the number of variables"));
    }
    let total: u32 = orders.iter().sum();
    if total == 0 {
        return f(x0);
    }
    let h = cfg.step_for_order(total);
    let mut tableau: Vec<T> = Vec::with_capacity(cfg.levels + 1);
    for level in 0..=cfg.levels {
        let s = h / libm::pow(2.0, level as f64);
        let mut current = central_stencil(f, x0, orders, s)?;
        // Neville update in s²: fold the new estimate through previous columns
        let mut factor = 1.0;
        for prev in tableau.iter_mut() {
            factor *= 4.0;
            let improved = current + (current - *prev) * (1.0 / (factor - 1.0));
            *prev = current;
            current = improved;
        }
        tableau.push(current);
    }
    Ok(*tableau.last().expect("at least one level"))
}

/// Exponent tuples over `nvars` variables with total degree `0..=max_total`,
/// ascending in total degree; within one degree the first variable's
/// exponent descends (so θ-heavy terms come first when θ is listed first).
pub fn multi_indices(nvars: usize, max_total: u32) -> Vec<Vec<u32>> {
    fn fill(prefix: &mut Vec<u32>, remaining: u32, slots: usize, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=remaining).rev() {
            prefix.push(first);
            fill(prefix, remaining - first, slots - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        out.push(Vec::new());
        return out;
    }
    for total in 0..=max_total {
        fill(&mut Vec::new(), total, nvars, &mut out);
    }
    out
}
