use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Classical fixed-step fourth-order Runge–Kutta.
    Rk4,
    /// Dormand–Prince 5(4) with embedded error control.
    Dopri5,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::Dopri5 => "dopri5",
        }
    }
}

/// Integrator settings. For `Dopri5`, `step` is the initial trial step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integration {
    pub method: Method,
    pub step: f64,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
}

fn default_rtol() -> f64 {
    1e-11
}

fn default_atol() -> f64 {
    1e-12
}

impl Integration {
    pub fn rk4(step: f64) -> Self {
        Integration { method: Method::Rk4, step, rtol: default_rtol(), atol: default_atol() }
    }

    pub fn dopri5(step: f64, rtol: f64, atol: f64) -> Self {
        Integration { method: Method::Dopri5, step, rtol, atol }
    }

    /// Integrates `dy/dt = f(t, y)` over `[t0, t1]`, returning every accepted step.
    pub fn run<const N: usize, F>(&self, f: F, t0: f64, y0: [f64; N], t1: f64) -> Result<Vec<OdeSample<N>>>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    {
        if !(t1 > t0) || !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "need t1 > t0 and step > 0 (t0 = {t0}, t1 = {t1}, step = {})",
                self.step
            )));
        }
        match self.method {
            Method::Rk4 => integrate_fixed(f, t0, y0, t1, self.step),
            Method::Dopri5 => integrate_adaptive(f, t0, y0, t1, self),
        }
    }
}

/// One accepted integrator sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSample<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

/// Fixed-step RK4. The step is shrunk slightly so that it divides the span.
pub fn integrate_fixed<const N: usize, F>(mut f: F, t0: f64, y0: [f64; N], t1: f64, step: f64) -> Result<Vec<OdeSample<N>>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let n = ((t1 - t0) / step).round().max(1.0) as usize;
    let h = (t1 - t0) / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    let mut y = y0;
    out.push(OdeSample { t: t0, y });
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let k1 = f(t, &y)?;
        let k2 = f(t + 0.5 * h, &axpy(&y, 0.5 * h, &k1))?;
        let k3 = f(t + 0.5 * h, &axpy(&y, 0.5 * h, &k2))?;
        let k4 = f(t + h, &axpy(&y, h, &k3))?;
        y = std::array::from_fn(|j| y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]));
        out.push(OdeSample { t: t0 + (i + 1) as f64 * h, y });
    }
    Ok(out)
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn integrate_adaptive<const N: usize, F>(mut f: F, t0: f64, y0: [f64; N], t1: f64, opts: &Integration) -> Result<Vec<OdeSample<N>>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut out = vec![OdeSample { t: t0, y: y0 }];
    let (mut t, mut y, mut h) = (t0, y0, opts.step.min(t1 - t0));
    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        if h < 1e-13 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t, h });
        }
        let mut k = [[0.0; N]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..N {
                    ys[i] += h * A[s][j] * kj[i];
                }
            }
            k[s] = f(t + C[s] * h, &ys)?;
        }
        let y5: [f64; N] = std::array::from_fn(|i| y[i] + h * (0..7).map(|s| B5[s] * k[s][i]).sum::<f64>());
        let err = (0..N)
            .map(|i| {
                let e = h * (0..7).map(|s| (B5[s] - B4[s]) * k[s][i]).sum::<f64>();
                let scale = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
                (e / scale).abs()
            })
            .fold(0.0, f64::max);
        if err <= 1.0 {
            t = if t1 - (t + h) < 1e-14 * t1.abs().max(1.0) { t1 } else { t + h };
            y = y5;
            out.push(OdeSample { t, y });
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Ok(out)
}
