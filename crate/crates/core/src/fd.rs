//! Central finite differences: one level of Richardson extrapolation for
//! the fixed-step policy, a full Neville tableau (Ridders' method) for
//! high-accuracy nested derivatives.

use std::ops::{Add, Mul, Sub};

use nalgebra::SMatrix;

use crate::error::{Error, Result};

/// Values that can be differentiated numerically: scalars, vectors, matrices.
pub trait FdValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn max_abs(&self) -> f64;
}

impl FdValue for f64 {
    fn max_abs(&self) -> f64 {
        self.abs()
    }
}

impl<const R: usize, const C: usize> FdValue for SMatrix<f64, R, C> {
    fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Step size and noise tolerance for finite differences.
///
/// Derivatives of order k use the step `step · 10^(k-1)`; every estimate is
/// computed at h and h/2 and extrapolated. If the two raw estimates differ by
/// more than `noise_tol · (1 + |estimate|)` the result is rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdPolicy {
    pub step: f64,
    pub noise_tol: f64,
}

impl Default for FdPolicy {
    fn default() -> Self {
        FdPolicy { step: 1e-5, noise_tol: 1e-4 }
    }
}

impl FdPolicy {
    pub fn with_step(self, step: f64) -> Self {
        FdPolicy { step, ..self }
    }

    /// k-th derivative at 0 of a function of one real parameter, k ∈ {1, 2, 3}.
    pub fn derivative<T, F>(&self, order: u8, f: F) -> Result<T>
    where
        T: FdValue,
        F: Fn(f64) -> Result<T>,
    {
        let h = match order {
            1 => self.step,
            2 => self.step * 10.0,
            3 => self.step * 100.0,
            _ => panic!("unsupported derivative order {order}"),
        };
        let coarse = stencil(order, h, &f)?;
        let fine = stencil(order, 0.5 * h, &f)?;
        let extrapolated = (fine * 4.0 - coarse) * (1.0 / 3.0);
        let spread = (coarse - fine).max_abs();
        if !(spread <= self.noise_tol * (1.0 + extrapolated.max_abs())) {
            return Err(Error::DerivativeNoise { coarse: coarse.max_abs(), fine: fine.max_abs() });
        }
        Ok(extrapolated)
    }

    /// First derivative of an infallible function.
    pub fn d1<T, F>(&self, f: F) -> T
    where
        T: FdValue,
        F: Fn(f64) -> T,
    {
        let h = self.step;
        let coarse = stencil_ok(h, &f);
        let fine = stencil_ok(0.5 * h, &f);
        (fine * 4.0 - coarse) * (1.0 / 3.0)
    }
}

/// First derivative at 0 from central differences at `h, h/2, …, h/2^(levels−1)`
/// combined by a fixed Richardson table. The result is a fixed linear
/// combination of samples, hence smooth in any parameter of `f`, which makes
/// it safe to differentiate again.
pub fn richardson<T, F>(h: f64, levels: usize, f: F) -> Result<T>
where
    T: FdValue,
    F: Fn(f64) -> Result<T>,
{
    assert!(levels >= 1);
    let mut table = Vec::with_capacity(levels);
    let mut step = h;
    for _ in 0..levels {
        table.push((f(step)? - f(-step)?) * (0.5 / step));
        step *= 0.5;
    }
    let mut fac = 4.0;
    for k in 1..levels {
        for i in (k..levels).rev() {
            table[i] = (table[i] * fac - table[i - 1]) * (1.0 / (fac - 1.0));
        }
        fac *= 4.0;
    }
    Ok(table[levels - 1])
}

/// Derivative of order 1 or 2 at 0 by Ridders' method: central differences
/// at steps `h0, h0/1.4, …` extrapolated to zero step. Returns the estimate
/// and its error estimate.
pub fn ridders<T, F>(order: u8, h0: f64, f: F) -> Result<(T, f64)>
where
    T: FdValue,
    F: Fn(f64) -> Result<T>,
{
    const CON: f64 = 1.4;
    const CON2: f64 = CON * CON;
    const NTAB: usize = 10;
    const SAFE: f64 = 2.0;
    assert!(order == 1 || order == 2, "unsupported derivative order {order}");
    let f0 = if order == 2 { Some(f(0.0)?) } else { None };
    let diff = |h: f64| -> Result<T> {
        Ok(match f0 {
            None => (f(h)? - f(-h)?) * (0.5 / h),
            Some(c) => (f(h)? - c * 2.0 + f(-h)?) * (1.0 / (h * h)),
        })
    };
    let mut h = h0;
    let mut prev: Vec<T> = vec![diff(h)?];
    let mut best = prev[0];
    let mut err = f64::INFINITY;
    for _ in 1..NTAB {
        h /= CON;
        let mut row = Vec::with_capacity(prev.len() + 1);
        row.push(diff(h)?);
        let mut fac = CON2;
        for j in 1..=prev.len() {
            let next = (row[j - 1] * fac - prev[j - 1]) * (1.0 / (fac - 1.0));
            row.push(next);
            fac *= CON2;
            let e = (next - row[j - 1]).max_abs().max((next - prev[j - 1]).max_abs());
            if e <= err {
                err = e;
                best = next;
            }
        }
        let k = row.len() - 1;
        let unstable = (row[k] - prev[k - 1]).max_abs() >= SAFE * err;
        prev = row;
        if unstable {
            break;
        }
    }
    Ok((best, err))
}

fn stencil<T, F>(order: u8, h: f64, f: &F) -> Result<T>
where
    T: FdValue,
    F: Fn(f64) -> Result<T>,
{
    Ok(match order {
        1 => (f(h)? - f(-h)?) * (0.5 / h),
        2 => (f(h)? - f(0.0)? * 2.0 + f(-h)?) * (1.0 / (h * h)),
        _ => (f(2.0 * h)? - f(h)? * 2.0 + f(-h)? * 2.0 - f(-2.0 * h)?) * (0.5 / (h * h * h)),
    })
}

fn stencil_ok<T, F>(h: f64, f: &F) -> T
where
    T: FdValue,
    F: Fn(f64) -> T,
{
    (f(h) - f(-h)) * (0.5 / h)
}
