//! The third-order equation of motion, in coordinate time and proper time.
//!
//! In coordinate time the worldline is a curve x(t) in the plane and the
//! equation reads, with w = 1 + v·v and every term carried with an upper
//! index,
//!
//! ```text
//! −∗v″/w^{3/2} + 3 ∗v′ (v·v′)/w^{5/2} + μ [w v′ − (v′·v) v]/w^{3/2} = 0.
//! ```
//!
//! In proper time the same curves solve `ü × u + μ u̇ = 0`.

mod integrator;
mod trajectory;

pub use integrator::{integrate_fixed, Integration, Method, OdeSample};
pub use trajectory::{
    read_records, InitialData, Manifest, ProperTrajectory, Trajectory, TrajectoryRecord,
    TRAJECTORY_CSV_HEADER,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minkowski::{Convention, Vec2, Vec3};

/// Third-order jet of a time-parametrized planar worldline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    pub t: f64,
    pub x: Vec2,
    pub v: Vec2,
    pub vp: Vec2,
    pub vpp: Vec2,
    /// Fourth derivative of x; only the generic Euler–Poisson operator reads it.
    pub vppp: Option<Vec2>,
}

impl Jet {
    pub fn new(t: f64, x: Vec2, v: Vec2, vp: Vec2, vpp: Vec2) -> Self {
        Jet { t, x, v, vp, vpp, vppp: None }
    }

    /// Jet whose v″ is chosen so that it solves the equation of motion.
    pub fn on_shell(t: f64, x: Vec2, v: Vec2, vp: Vec2, mu: f64, conv: &Convention) -> Result<Self> {
        let vpp = solve_jerk(&v, &vp, mu, conv)?;
        Ok(Jet::new(t, x, v, vp, vpp))
    }
}

/// Proper-time jet: event, four-velocity and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProperJet {
    pub x: Vec3,
    pub u: Vec3,
    pub ud: Vec3,
    pub udd: Vec3,
}

/// Left side of the coordinate-time equation, contravariant components.
pub fn residual_ep(jet: &Jet, mu: f64, conv: &Convention) -> Result<Vec2> {
    let w = conv.subluminal(&jet.v)?;
    let v_vp = conv.dot2(&jet.v, &jet.vp);
    let star_terms = -conv.star(&jet.vpp) / w.powf(1.5) + conv.star(&jet.vp) * (3.0 * v_vp / w.powf(2.5));
    let mass_term = (jet.vp * w - jet.v * v_vp) * (mu / w.powf(1.5));
    Ok(conv.raise2(&star_terms) + mass_term)
}

/// The unique v″ that makes [`residual_ep`] vanish.
///
/// The leading coefficient is a multiple of the star, an invertible skew
/// 2×2 matrix, so the solve reduces to applying the inverse star.
pub fn solve_jerk(v: &Vec2, vp: &Vec2, mu: f64, conv: &Convention) -> Result<Vec2> {
    let w = conv.subluminal(v)?;
    let v_vp = conv.dot2(v, vp);
    let star_vpp = conv.star(vp) * (3.0 * v_vp / w) + (conv.lower2(vp) * w - conv.lower2(v) * v_vp) * mu;
    Ok(conv.unstar(&star_vpp))
}

/// Integrates the equation of motion as a first-order system in
/// (x, v, v′) ∈ R⁶.
pub fn integrate_worldline(
    x0: Vec2,
    v0: Vec2,
    vp0: Vec2,
    mu: f64,
    t_span: (f64, f64),
    integration: &Integration,
    conv: &Convention,
) -> Result<Trajectory> {
    conv.subluminal(&v0)?;
    let y0 = [x0.x, x0.y, v0.x, v0.y, vp0.x, vp0.y];
    let rhs = |_t: f64, y: &[f64; 6]| -> Result<[f64; 6]> {
        let v = Vec2::new(y[2], y[3]);
        let vp = Vec2::new(y[4], y[5]);
        let vpp = solve_jerk(&v, &vp, mu, conv)?;
        Ok([v.x, v.y, vp.x, vp.y, vpp.x, vpp.y])
    };
    let samples = integration.run(rhs, t_span.0, y0, t_span.1)?;
    let jets = samples
        .iter()
        .map(|s| {
            let y = &s.y;
            Jet::on_shell(s.t, Vec2::new(y[0], y[1]), Vec2::new(y[2], y[3]), Vec2::new(y[4], y[5]), mu, conv)
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(jets, *integration, mu)
}

/// Proper-time jet of a coordinate-time jet, by exact chain rule with
/// dτ/dt = √(1 + v·v).
pub fn to_proper_jet(jet: &Jet, conv: &Convention) -> Result<ProperJet> {
    let w = conv.subluminal(&jet.v)?;
    let g = 1.0 / w.sqrt();
    let v_vp = conv.dot2(&jet.v, &jet.vp);
    let g1 = -v_vp * g.powi(3);
    let g2 = -(conv.dot2(&jet.vp, &jet.vp) + conv.dot2(&jet.v, &jet.vpp)) * g.powi(3)
        + 3.0 * v_vp * v_vp * g.powi(5);

    let big_u = Vec3::new(1.0, jet.v.x, jet.v.y);
    let big_u1 = Vec3::new(0.0, jet.vp.x, jet.vp.y);
    let big_u2 = Vec3::new(0.0, jet.vpp.x, jet.vpp.y);

    let u = big_u * g;
    let du_dt = big_u * g1 + big_u1 * g;
    let d2u_dt2 = big_u * g2 + big_u1 * (2.0 * g1) + big_u2 * g;
    let ud = du_dt * g;
    let udd = (du_dt * g1 + d2u_dt2 * g) * g;

    Ok(ProperJet { x: Vec3::new(jet.t, jet.x.x, jet.x.y), u, ud, udd })
}

/// `ü × u + μ u̇` with covariant components.
pub fn residual_proper(pjet: &ProperJet, mu: f64, conv: &Convention) -> Vec3 {
    conv.cross3(&pjet.udd, &pjet.u) + conv.lower3(&pjet.ud) * mu
}

/// First curvature ‖u̇‖ = √(−u̇·u̇).
pub fn curvature(pjet: &ProperJet, conv: &Convention) -> Result<f64> {
    let sq = -conv.dot3(&pjet.ud, &pjet.ud);
    let scale = pjet.ud.norm_squared();
    if sq < -1e-12 * (1.0 + scale) {
        return Err(Error::NegativeRadicand { value: sq });
    }
    Ok(sq.max(0.0).sqrt())
}

/// Largest relative deviation of ‖u̇‖ from its initial value along a
/// proper-time trajectory; absolute when the initial curvature vanishes.
pub fn curvature_drift(traj: &ProperTrajectory, conv: &Convention) -> Result<f64> {
    let k = traj.jets.iter().map(|j| curvature(j, conv)).collect::<Result<Vec<_>>>()?;
    let Some(&k0) = k.first() else { return Ok(0.0) };
    let scale = if k0 > 0.0 { k0 } else { 1.0 };
    Ok(k.iter().map(|x| (x - k0).abs() / scale).fold(0.0, f64::max))
}
