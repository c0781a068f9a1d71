//! Second-order Lagrangians of the planar equation and a numeric
//! Euler–Poisson operator.
//!
//! ```text
//! L₍ₐ₎ = ∗(v′∧e₍ₐ₎) vᵃ / [(1 + v·v)^{1/2} (1 + g_aa ‖v∧e₍ₐ₎‖²)] − μ (1 + v·v)^{1/2}
//! ```
//!
//! With the default conventions this is
//! `L₁ = −v′² v¹ / (√w (1 − (v²)²)) − μ√w` and
//! `L₂ = v′¹ v² / (√w (1 − (v¹)²)) − μ√w`, where `w = 1 + v·v`.

use serde::{Deserialize, Serialize};

use crate::equation::{Jet, Trajectory};
use crate::error::{Error, Result};
use crate::fd::{richardson, ridders, FdPolicy};
use crate::minkowski::{Convention, Vec2};

/// Global factor relating [`euler_poisson_operator`] to
/// [`crate::equation::residual_ep`]: `EP(L) = EP_SIGN · residual_ep`.
pub const EP_SIGN: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Which {
    L1,
    L2,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagrangianSpec {
    pub which: Which,
    pub mu: f64,
}

impl LagrangianSpec {
    pub fn new(which: Which, mu: f64) -> Self {
        LagrangianSpec { which, mu }
    }
}

fn basis(a: usize) -> Vec2 {
    if a == 0 {
        Vec2::new(1.0, 0.0)
    } else {
        Vec2::new(0.0, 1.0)
    }
}

/// One of the two labelled Lagrangians, a ∈ {0, 1}.
fn labelled(a: usize, v: &Vec2, vp: &Vec2, sqrt_w: f64, conv: &Convention) -> Result<f64> {
    let e = basis(a);
    let norm2 = conv.bivector_inner2(v, &e, v, &e);
    // g_aa of the spatial block
    let den = 1.0 - norm2;
    if den.abs() < 1e-12 {
        return Err(Error::DegenerateDenominator { value: den });
    }
    Ok(conv.wedge(vp, &e) * v[a] / (sqrt_w * den))
}

pub fn eval_l(spec: &LagrangianSpec, v: &Vec2, vp: &Vec2, conv: &Convention) -> Result<f64> {
    let sqrt_w = conv.lorentz_factor(v)?;
    let kinetic = match spec.which {
        Which::L1 => labelled(0, v, vp, sqrt_w, conv)?,
        Which::L2 => labelled(1, v, vp, sqrt_w, conv)?,
        Which::Mean => 0.5 * (labelled(0, v, vp, sqrt_w, conv)? + labelled(1, v, vp, sqrt_w, conv)?),
    };
    Ok(kinetic - spec.mu * sqrt_w)
}

const PARTIAL_LEVELS: usize = 4;

/// Partial derivatives ∂L/∂v and ∂L/∂v′: central differences at steps
/// h, h/2, h/4, h/8 under a fixed Richardson table.
pub fn partials<L>(l: &L, v: &Vec2, vp: &Vec2, h: f64) -> Result<(Vec2, Vec2)>
where
    L: Fn(&Vec2, &Vec2) -> Result<f64>,
{
    let mut dv = Vec2::zeros();
    let mut dvp = Vec2::zeros();
    for a in 0..2 {
        let e = basis(a);
        dv[a] = richardson(h, PARTIAL_LEVELS, |s| l(&(v + e * s), vp))?;
        dvp[a] = richardson(h, PARTIAL_LEVELS, |s| l(v, &(vp + e * s)))?;
    }
    Ok((dv, dvp))
}

/// Step settings of the numeric Euler–Poisson operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpPolicy {
    /// Initial step of the partial derivatives in (v, v′).
    pub partial_step: f64,
    /// Initial step of the directional derivatives along the jet.
    pub total_step: f64,
    /// Largest accepted relative error estimate of a total derivative.
    pub noise_tol: f64,
}

impl Default for EpPolicy {
    fn default() -> Self {
        EpPolicy { partial_step: 0.01, total_step: 0.02, noise_tol: 1e-3 }
    }
}

impl EpPolicy {
    fn directional<G>(&self, order: u8, g: G) -> Result<Vec2>
    where
        G: Fn(f64) -> Result<Vec2>,
    {
        let (d, err) = ridders(order, self.total_step, g)?;
        if !(err <= self.noise_tol * (1.0 + d.amax())) {
            return Err(Error::DerivativeNoise { coarse: d.amax(), fine: err });
        }
        Ok(d)
    }

    /// `D_t g` along the jet for g = g(v, v′).
    fn rate<G>(&self, jet: &Jet, g: &G) -> Result<Vec2>
    where
        G: Fn(&Vec2, &Vec2) -> Result<Vec2>,
    {
        self.directional(1, |s| g(&(jet.v + jet.vp * s), &(jet.vp + jet.vpp * s)))
    }

    /// `D_t² g = ẏᵀ∇²g ẏ + ∇g·ÿ` with y = (v, v′); v‴ defaults to zero.
    fn second_rate<G>(&self, jet: &Jet, g: &G) -> Result<Vec2>
    where
        G: Fn(&Vec2, &Vec2) -> Result<Vec2>,
    {
        let curvature = self.directional(2, |s| g(&(jet.v + jet.vp * s), &(jet.vp + jet.vpp * s)))?;
        let Some(vppp) = jet.vppp.filter(|x| *x != Vec2::zeros()) else {
            return Ok(curvature + self.directional(1, |s| g(&(jet.v + jet.vpp * s), &jet.vp))?);
        };
        Ok(curvature + self.directional(1, |s| g(&(jet.v + jet.vpp * s), &(jet.vp + vppp * s)))?)
    }
}

/// `E_a = −d/dt ∂L/∂vᵃ + d²/dt² ∂L/∂v′ᵃ` for any L(v, v′). Partials are
/// numeric; total derivatives follow the chain rule through the jet.
pub fn euler_poisson<L>(l: &L, jet: &Jet, policy: &EpPolicy) -> Result<Vec2>
where
    L: Fn(&Vec2, &Vec2) -> Result<f64>,
{
    let h = policy.partial_step;
    let dv = policy.rate(jet, &|v: &Vec2, vp: &Vec2| Ok(partials(l, v, vp, h)?.0))?;
    let dvp = policy.second_rate(jet, &|v: &Vec2, vp: &Vec2| Ok(partials(l, v, vp, h)?.1))?;
    Ok(dvp - dv)
}

pub fn euler_poisson_operator(spec: &LagrangianSpec, jet: &Jet, conv: &Convention, policy: &EpPolicy) -> Result<Vec2> {
    euler_poisson(&|v: &Vec2, vp: &Vec2| eval_l(spec, v, vp, conv), jet, policy)
}

/// Momenta `p = ∂L/∂v − d/dt ∂L/∂v′` and `p′ = ∂L/∂v′` of any L(v, v′),
/// both covariant.
pub fn momenta_of<L>(l: &L, jet: &Jet, policy: &EpPolicy) -> Result<(Vec2, Vec2)>
where
    L: Fn(&Vec2, &Vec2) -> Result<f64>,
{
    let h = policy.partial_step;
    let (dv, dvp) = partials(l, &jet.v, &jet.vp, h)?;
    let rate = policy.rate(jet, &|v: &Vec2, vp: &Vec2| Ok(partials(l, v, vp, h)?.1))?;
    Ok((dv - rate, dvp))
}

/// `arctan(v¹v² / √(1 + v·v))`, whose time derivative is L₂ − L₁.
pub fn gauge_potential(v: &Vec2, conv: &Convention) -> Result<f64> {
    Ok((v.x * v.y / conv.lorentz_factor(v)?).atan())
}

/// Total time derivative of [`gauge_potential`] along (v, v′).
pub fn gauge_rate(v: &Vec2, vp: &Vec2, conv: &Convention) -> Result<f64> {
    let w = conv.subluminal(v)?;
    let sw = w.sqrt();
    let q = v.x * v.y / sw;
    let v_low = conv.lower2(v);
    // ∂w/∂vᵃ = 2 v_a
    let dq = Vec2::new(v.y / sw - q * v_low.x / w, v.x / sw - q * v_low.y / w);
    Ok(dq.dot(vp) / (1.0 + q * q))
}

/// `|(L₂ − L₁)(v, v′) − D_t arctan(v¹v²/√(1+v·v))|`.
pub fn gauge_difference_check(v: &Vec2, vp: &Vec2, conv: &Convention) -> Result<f64> {
    let l1 = eval_l(&LagrangianSpec::new(Which::L1, 0.0), v, vp, conv)?;
    let l2 = eval_l(&LagrangianSpec::new(Which::L2, 0.0), v, vp, conv)?;
    Ok(((l2 - l1) - gauge_rate(v, vp, conv)?).abs())
}

/// `|∫(L₂ − L₁) dt − [arctan(v¹v²/√w)]|` over a trajectory, with the
/// integral by cubic Hermite quadrature using the exact time derivative of
/// L₂ − L₁ along the sampled jets.
pub fn gauge_quadrature(traj: &Trajectory, conv: &Convention) -> Result<f64> {
    let diff = |v: &Vec2, vp: &Vec2| -> Result<f64> {
        let l1 = eval_l(&LagrangianSpec::new(Which::L1, 0.0), v, vp, conv)?;
        let l2 = eval_l(&LagrangianSpec::new(Which::L2, 0.0), v, vp, conv)?;
        Ok(l2 - l1)
    };
    let fd = FdPolicy::default();
    let sample = |j: &Jet| -> Result<(f64, f64)> {
        let f = diff(&j.v, &j.vp)?;
        let df = fd.derivative(1, |s| diff(&(j.v + j.vp * s), &(j.vp + j.vpp * s)))?;
        Ok((f, df))
    };
    let jets = traj.jets();
    let mut integral = 0.0;
    let mut prev = sample(&jets[0])?;
    for w in jets.windows(2) {
        let h = w[1].t - w[0].t;
        let cur = sample(&w[1])?;
        integral += 0.5 * h * (prev.0 + cur.0) + h * h / 12.0 * (prev.1 - cur.1);
        prev = cur;
    }
    let delta = gauge_potential(&traj.last().v, conv)? - gauge_potential(&traj.first().v, conv)?;
    Ok((integral - delta).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::residual_ep;

    const C: Convention = Convention::DEFAULT;

    #[test]
    fn rest_value_is_minus_mu() {
        for which in [Which::L1, Which::L2, Which::Mean] {
            let l = eval_l(&LagrangianSpec::new(which, 1.7), &Vec2::zeros(), &Vec2::new(0.3, -2.0), &C).unwrap();
            assert_eq!(l, -1.7);
        }
    }

    #[test]
    fn static_value() {
        let v = Vec2::new(0.3, 0.4);
        let l = eval_l(&LagrangianSpec::new(Which::L1, 2.0), &v, &Vec2::zeros(), &C).unwrap();
        assert!((l + 2.0 * 0.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn closed_forms() {
        let (v, vp) = (Vec2::new(0.3, -0.5), Vec2::new(0.7, 0.2));
        let sw = (1.0f64 - 0.34).sqrt();
        let l1 = eval_l(&LagrangianSpec::new(Which::L1, 0.0), &v, &vp, &C).unwrap();
        let l2 = eval_l(&LagrangianSpec::new(Which::L2, 0.0), &v, &vp, &C).unwrap();
        assert!((l1 + vp.y * v.x / (sw * (1.0 - v.y * v.y))).abs() < 1e-15);
        assert!((l2 - vp.x * v.y / (sw * (1.0 - v.x * v.x))).abs() < 1e-15);
    }

    #[test]
    fn linear_in_acceleration() {
        let spec = LagrangianSpec::new(Which::Mean, 0.8);
        let (v, vp) = (Vec2::new(-0.2, 0.6), Vec2::new(1.5, -0.4));
        let l0 = eval_l(&spec, &v, &Vec2::zeros(), &C).unwrap();
        let l1 = eval_l(&spec, &v, &vp, &C).unwrap();
        let l2 = eval_l(&spec, &v, &(vp * 2.0), &C).unwrap();
        assert!((l2 - l0 - 2.0 * (l1 - l0)).abs() < 1e-14);
    }

    #[test]
    fn rest_jet_has_zero_ep() {
        let jet = Jet::new(0.0, Vec2::zeros(), Vec2::zeros(), Vec2::zeros(), Vec2::zeros());
        let e = euler_poisson_operator(&LagrangianSpec::new(Which::L1, 1.0), &jet, &C, &EpPolicy::default()).unwrap();
        assert!(e.amax() < 1e-9);
    }

    #[test]
    fn ep_matches_equation_up_to_sign() {
        let jet = Jet::new(0.0, Vec2::zeros(), Vec2::new(0.4, -0.3), Vec2::new(0.6, 0.5), Vec2::new(-0.7, 0.9));
        let r = residual_ep(&jet, 1.2, &C).unwrap();
        for which in [Which::L1, Which::L2, Which::Mean] {
            let e = euler_poisson_operator(&LagrangianSpec::new(which, 1.2), &jet, &C, &EpPolicy::default()).unwrap();
            assert!((e - r * EP_SIGN).amax() < 1e-6, "{which:?}: {e} vs {r}");
        }
    }

    #[test]
    fn gauge_identity() {
        assert_eq!(gauge_difference_check(&Vec2::zeros(), &Vec2::new(0.4, 0.1), &C).unwrap(), 0.0);
        let r = gauge_difference_check(&Vec2::new(0.5, -0.6), &Vec2::new(0.3, 1.1), &C).unwrap();
        assert!(r < 1e-14, "{r}");
    }

    #[test]
    fn defect_of_single_lagrangians() {
        let jet = Jet::new(0.0, Vec2::zeros(), Vec2::new(0.4, -0.3), Vec2::new(0.6, 0.5), Vec2::new(-0.7, 0.9));
        let p = EpPolicy::default();
        let (_, pp1) = momenta_of(&|v: &Vec2, vp: &Vec2| eval_l(&LagrangianSpec::new(Which::L1, 1.0), v, vp, &C), &jet, &p)
            .unwrap();
        let (_, pp2) = momenta_of(&|v: &Vec2, vp: &Vec2| eval_l(&LagrangianSpec::new(Which::L2, 1.0), v, vp, &C), &jet, &p)
            .unwrap();
        assert_eq!(pp1.x, 0.0);
        assert_eq!(pp2.y, 0.0);
        assert!(pp1.y.abs() > 0.1 && pp2.x.abs() > 0.1);
    }
}
