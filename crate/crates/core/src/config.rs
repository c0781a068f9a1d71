//! JSON run configuration shared by the command-line driver and the suites.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::equation::{InitialData, Integration, Method};
use crate::error::{Error, Result};
use crate::minkowski::{Convention, Vec2};
use crate::spin::mass_renormalization;

/// Mass parameter: either μ directly or the pair (m₀, 𝔰³) with μ = m₀/𝔰³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Mass {
    Mu { mu: f64 },
    Spin { m0: f64, s3: f64 },
}

impl Mass {
    pub fn mu(&self) -> Result<f64> {
        match *self {
            Mass::Mu { mu } => Ok(mu),
            Mass::Spin { m0, s3 } => mass_renormalization(m0, s3),
        }
    }

    /// (m₀, 𝔰³); a bare μ is read as m₀ = μ, 𝔰³ = 1.
    pub fn spin_pair(&self) -> (f64, f64) {
        match *self {
            Mass::Mu { mu } => (mu, 1.0),
            Mass::Spin { m0, s3 } => (m0, s3),
        }
    }
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRunConfig", into = "RawRunConfig")]
pub struct RunConfig {
    pub mass: Mass,
    pub initial: InitialData,
    pub t_span: [f64; 2],
    pub integration: Integration,
    pub convention: Convention,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s3: Option<f64>,
    initial: InitialData,
    t_span: [f64; 2],
    step: f64,
    #[serde(default = "default_method")]
    method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    atol: Option<f64>,
    #[serde(default)]
    convention: Convention,
    #[serde(default)]
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    out_dir: Option<PathBuf>,
}

fn default_method() -> Method {
    Method::Rk4
}

fn finite(name: &str, xs: &[f64]) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must be finite")))
    }
}

impl TryFrom<RawRunConfig> for RunConfig {
    type Error = Error;

    fn try_from(raw: RawRunConfig) -> Result<Self> {
        let mass = match (raw.mu, raw.m0, raw.s3) {
            (Some(mu), None, None) => Mass::Mu { mu },
            (None, Some(m0), Some(s3)) => Mass::Spin { m0, s3 },
            _ => return Err(Error::InvalidConfig("give exactly one of `mu` or the pair `m0`, `s3`".into())),
        };
        let mu = mass.mu()?;
        finite("mu", &[mu])?;
        let [t0, t1] = raw.t_span;
        finite("t_span", &raw.t_span)?;
        if !(t1 > t0) {
            return Err(Error::InvalidConfig(format!("t_span must be increasing, got [{t0}, {t1}]")));
        }
        if !(raw.step > 0.0) || !raw.step.is_finite() {
            return Err(Error::InvalidConfig(format!("step must be positive, got {}", raw.step)));
        }
        let i = &raw.initial;
        finite("initial", &[i.x[0], i.x[1], i.v[0], i.v[1], i.vp[0], i.vp[1]])?;
        raw.convention.subluminal(&Vec2::new(i.v[0], i.v[1]))?;
        let mut integration = match raw.method {
            Method::Rk4 => Integration::rk4(raw.step),
            Method::Dopri5 => Integration::dopri5(raw.step, 1e-11, 1e-12),
        };
        if let Some(r) = raw.rtol {
            integration.rtol = r;
        }
        if let Some(a) = raw.atol {
            integration.atol = a;
        }
        if !(integration.rtol > 0.0 && integration.atol > 0.0) {
            return Err(Error::InvalidConfig("rtol and atol must be positive".into()));
        }
        Ok(RunConfig {
            mass,
            initial: raw.initial,
            t_span: raw.t_span,
            integration,
            convention: raw.convention,
            seed: raw.seed,
            out_dir: raw.out_dir,
        })
    }
}

impl From<RunConfig> for RawRunConfig {
    fn from(c: RunConfig) -> Self {
        let (mu, m0, s3) = match c.mass {
            Mass::Mu { mu } => (Some(mu), None, None),
            Mass::Spin { m0, s3 } => (None, Some(m0), Some(s3)),
        };
        let adaptive = c.integration.method == Method::Dopri5;
        RawRunConfig {
            mu,
            m0,
            s3,
            initial: c.initial,
            t_span: c.t_span,
            step: c.integration.step,
            method: c.integration.method,
            rtol: adaptive.then_some(c.integration.rtol),
            atol: adaptive.then_some(c.integration.atol),
            convention: c.convention,
            seed: c.seed,
            out_dir: c.out_dir,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The demonstration setup: μ = 1, v₀ = (0.2, 0.1), v′₀ = (0.1, −0.2),
    /// RK4 with step 10⁻³ over [0, 10].
    pub fn demo() -> Self {
        RunConfig {
            mass: Mass::Mu { mu: 1.0 },
            initial: InitialData { x: [0.0, 0.0], v: [0.2, 0.1], vp: [0.1, -0.2] },
            t_span: [0.0, 10.0],
            integration: Integration::rk4(1e-3),
            convention: Convention::default(),
            seed: 42,
            out_dir: None,
        }
    }

    pub fn mu(&self) -> f64 {
        self.mass.mu().expect("validated at construction")
    }

    pub fn x0(&self) -> Vec2 {
        Vec2::new(self.initial.x[0], self.initial.x[1])
    }

    pub fn v0(&self) -> Vec2 {
        Vec2::new(self.initial.v[0], self.initial.v[1])
    }

    pub fn vp0(&self) -> Vec2 {
        Vec2::new(self.initial.vp[0], self.initial.vp[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"mu": 1.5, "initial": {"x": [0, 0], "v": [0.1, 0.2], "vp": [0, 0.3]},
        "t_span": [0, 2], "step": 0.01}"#;

    #[test]
    fn parses_minimal() {
        let c = RunConfig::from_json(BASE).unwrap();
        assert_eq!(c.mu(), 1.5);
        assert_eq!(c.integration.method, Method::Rk4);
        assert_eq!(c.convention, Convention::default());
        assert_eq!(c.seed, 0);
    }

    #[test]
    fn spin_pair_derives_mu() {
        let c = RunConfig::from_json(&BASE.replace(r#""mu": 1.5"#, r#""m0": 1.0, "s3": 0.5"#)).unwrap();
        assert_eq!(c.mu(), 2.0);
        assert_eq!(c.mass.spin_pair(), (1.0, 0.5));
    }

    #[test]
    fn rejects_both_masses() {
        let r = RunConfig::from_json(&BASE.replace(r#""mu": 1.5"#, r#""mu": 1.5, "m0": 1.0, "s3": 0.5"#));
        assert!(r.is_err());
        let r = RunConfig::from_json(&BASE.replace(r#""mu": 1.5"#, r#""m0": 1.0"#));
        assert!(r.is_err());
    }

    #[test]
    fn rejects_bad_span_and_speed() {
        assert!(RunConfig::from_json(&BASE.replace("[0, 2]", "[2, 0]")).is_err());
        assert!(RunConfig::from_json(&BASE.replace("0.01", "-1")).is_err());
        let e = RunConfig::from_json(&BASE.replace("[0.1, 0.2]", "[0.8, 0.7]")).unwrap_err();
        assert!(e.to_string().contains("superluminal"), "{e}");
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(RunConfig::from_json(&BASE.replace("\"step\"", "\"stepp\": 1, \"step\"")).is_err());
    }

    #[test]
    fn json_roundtrip() {
        for c in [RunConfig::demo(), RunConfig::from_json(BASE).unwrap()] {
            assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
        }
    }
}
