//! Poincaré invariance of the third-order equation.
//!
//! The generator acts on jets as
//!
//! ```text
//! δt  = −π·x,                δx  = g₀₀ t π − Ω x,
//! δv  = π + (π·v) v − Ω v,   δv′ = 2(π·v) v′ + (π·v′) v − Ω v′,
//! ```
//!
//! with Ω = ω·[[0, 1], [−1, 0]]. Infinitesimal invariance is checked through
//! the multiplier matrices Φ, Ξ, Π and the identities obtained by splitting
//! `X(k) = Φk − Ξv − Πv′` by powers of v′ and by (Ω, π). The group-level
//! statement is checked with exact 2+1 Lorentz matrices acting on events.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::equation::Jet;
use crate::error::{Error, Result};
use crate::fd::{FdPolicy, FdValue};
use crate::minkowski::{Convention, Mat2, Mat3, Vec2, Vec3};
use crate::variationality::{CoefficientField, Sample};

/// Infinitesimal Poincaré generator: rotation ω, boost π, translations
/// (a⁰, a¹, a²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareGen {
    pub omega: f64,
    pub piv: Vec2,
    pub translations: Vec3,
}

impl PoincareGen {
    pub fn new(omega: f64, piv: Vec2) -> Self {
        PoincareGen { omega, piv, translations: Vec3::zeros() }
    }

    pub fn translation(a: Vec3) -> Self {
        PoincareGen { omega: 0.0, piv: Vec2::zeros(), translations: a }
    }

    pub fn omega_matrix(&self) -> Mat2 {
        Mat2::new(0.0, self.omega, -self.omega, 0.0)
    }

    /// Generator on (t, x¹, x²), without translations.
    pub fn event_matrix(&self) -> Mat3 {
        let (p, o) = (self.piv, self.omega_matrix());
        Mat3::new(0.0, p.x, p.y, p.x, -o[(0, 0)], -o[(0, 1)], p.y, -o[(1, 0)], -o[(1, 1)])
    }

    fn boost_dir(&self, v: &Vec2, conv: &Convention) -> Vec2 {
        self.piv + v * conv.dot2(&self.piv, v)
    }

    fn rotation_dir(&self, v: &Vec2) -> Vec2 {
        -(self.omega_matrix() * v)
    }

    /// δv.
    pub fn velocity_field(&self, v: &Vec2, conv: &Convention) -> Vec2 {
        self.boost_dir(v, conv) + self.rotation_dir(v)
    }

    /// δv′.
    pub fn acceleration_field(&self, v: &Vec2, vp: &Vec2, conv: &Convention) -> Vec2 {
        vp * (2.0 * conv.dot2(&self.piv, v)) + v * conv.dot2(&self.piv, vp) - self.omega_matrix() * vp
    }
}

/// `a ⊗ π` acting as `y ↦ a (π·y)`.
fn outer(a: &Vec2, pi: &Vec2, conv: &Convention) -> Mat2 {
    a * conv.lower2(pi).transpose()
}

/// Multipliers of the invariance condition at a (v, v′) point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub phi: Mat2,
    pub xi: Mat2,
    pub pi: Mat2,
}

fn along_v<T, F>(fd: &FdPolicy, v: &Vec2, dir: &Vec2, f: F) -> Result<T>
where
    T: FdValue,
    F: Fn(&Sample) -> Result<T>,
{
    fd.derivative(1, |s| f(&Sample::at_velocity(v + dir * s)))
}

fn checked_inverse<F: CoefficientField + ?Sized>(cf: &F, v: &Vec2) -> Result<(Mat2, Mat2)> {
    let a = cf.a(&Sample::at_velocity(*v))?;
    let det = a.determinant();
    if det.abs() < 1e-14 {
        return Err(Error::SingularA { det });
    }
    let inv = a.try_inverse().ok_or(Error::SingularA { det })?;
    Ok((a, inv))
}

/// Φ, Ξ, Π solved from the dv′, dx and dv components of the invariance
/// condition.
pub fn multipliers<F: CoefficientField + ?Sized>(
    cf: &F,
    v: &Vec2,
    vp: &Vec2,
    gen: &PoincareGen,
    conv: &Convention,
    fd: &FdPolicy,
) -> Result<Multipliers> {
    let (a, a_inv) = checked_inverse(cf, v)?;
    let p = Sample::at_velocity(*v);
    let pv = conv.dot2(&gen.piv, v);
    let xa = along_v(fd, v, &gen.velocity_field(v, conv), |q| cf.a(q))?;
    let lhs = xa + a * (2.0 * pv) + outer(&(a * v), &gen.piv, conv) - a * gen.omega_matrix();
    let k = cf.k(&p, vp, fd)?;
    Ok(Multipliers {
        phi: lhs * a_inv,
        xi: -outer(&k, &gen.piv, conv),
        pi: outer(&(a * vp * 2.0), &gen.piv, conv) + a * conv.dot2(&gen.piv, vp),
    })
}

/// Max-norm of `X(k) − Φk + Ξv + Πv′`.
pub fn multiplier_residual<F: CoefficientField + ?Sized>(
    cf: &F,
    v: &Vec2,
    vp: &Vec2,
    gen: &PoincareGen,
    conv: &Convention,
    fd: &FdPolicy,
) -> Result<f64> {
    let m = multipliers(cf, v, vp, gen, conv, fd)?;
    let (dv, dvp) = (gen.velocity_field(v, conv), gen.acceleration_field(v, vp, conv));
    let outer_fd = fd.with_step(fd.step * 10.0);
    let xk = outer_fd.derivative(1, |s| cf.k(&Sample::at_velocity(v + dv * s), &(vp + dvp * s), fd))?;
    let k = cf.k(&Sample::at_velocity(*v), vp, fd)?;
    Ok((xk - m.phi * k + m.xi * v + m.pi * vp).amax())
}

/// Which right-hand side to use for the last term of the quadratic boost
/// identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoostQuadraticForm {
    /// `−3(π·v′) A v′`, the term produced by `−Πv′`.
    #[default]
    Consistent,
    /// `−3(π·v′) A′ v` as typeset.
    Typeset,
}

pub const IDENTITIES: [&str; 6] =
    ["rotation-quadratic", "rotation-linear", "rotation-constant", "boost-quadratic", "boost-linear", "boost-constant"];

/// Residuals of the six identities that split the invariance condition:
/// rotation parts quadratic, linear and constant in v′, then the boost parts
/// in the same order.
///
/// An arrow-scoped operator such as `(Ω·(v∧∂_v)) A↓ A⁻¹ M` differentiates A
/// alone and then multiplies by `A⁻¹ M`.
pub fn invariance_residuals<F: CoefficientField + ?Sized>(
    cf: &F,
    v: &Vec2,
    vp: &Vec2,
    gen: &PoincareGen,
    conv: &Convention,
    fd: &FdPolicy,
    form: BoostQuadraticForm,
) -> Result<[f64; 6]> {
    let (a, a_inv) = checked_inverse(cf, v)?;
    let p = Sample::at_velocity(*v);
    let (b, c) = (cf.b(&p)?, cf.c(&p)?);
    let om = gen.omega_matrix();
    let pi = &gen.piv;
    let pv = conv.dot2(pi, v);
    let pvp = conv.dot2(pi, vp);
    let rot = gen.rotation_dir(v);
    let boost = gen.boost_dir(v, conv);
    let outer_fd = fd.with_step(fd.step * 10.0);

    let ap = cf.a_along_v(&p, vp, fd)?;
    let apvp = ap * vp;
    // A′v′ as a function of v with v′ frozen
    let apvp_at = |q: &Sample| Ok(cf.a_along_v(q, vp, fd)? * vp);

    // rotation
    let ra = along_v(fd, v, &rot, |q| cf.a(q))?;
    let phi_rot = (ra - a * om) * a_inv;
    let rot_quadratic = along_v(&outer_fd, v, &rot, apvp_at)? + cf.a_along_v(&p, &(-(om * vp)), fd)? * vp
        - ap * om * vp
        - phi_rot * apvp;
    let rot_linear = along_v(fd, v, &rot, |q| cf.b(q))? - b * om - phi_rot * b;
    let rot_constant = along_v(fd, v, &rot, |q| cf.c(q))? - phi_rot * c;

    // boost
    let pa = along_v(fd, v, &boost, |q| cf.a(q))?;
    let av = a * v;
    let pa_part = pa * a_inv;
    let last = match form {
        BoostQuadraticForm::Consistent => a * vp,
        BoostQuadraticForm::Typeset => ap * v,
    };
    let boost_quadratic = along_v(&outer_fd, v, &boost, apvp_at)? + apvp * pv
        + cf.a_along_v(&p, v, fd)? * vp * pvp
        + ap * v * pvp
        - pa_part * apvp
        - av * conv.dot2(pi, &(a_inv * apvp))
        + last * (3.0 * pvp);
    let boost_linear = along_v(fd, v, &boost, |q| cf.b(q))? + outer(&(b * v), pi, conv)
        - pa_part * b
        - outer(&av, pi, conv) * a_inv * b
        - b * pv;
    let boost_constant = along_v(fd, v, &boost, |q| cf.c(q))?
        - pa_part * c
        - c * (3.0 * pv)
        - av * conv.dot2(pi, &(a_inv * c));

    Ok([rot_quadratic.amax(), rot_linear.amax(), rot_constant.amax(), boost_quadratic.amax(), boost_linear.amax(), boost_constant.amax()])
}

/// One row of the CLI-facing invariance report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub identity: String,
    pub sample: SymmetrySample,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetrySample {
    pub v: Vec2,
    pub vp: Vec2,
    pub omega: f64,
    pub piv: Vec2,
}

pub fn invariance_report<F: CoefficientField + ?Sized>(
    cf: &F,
    samples: &[SymmetrySample],
    conv: &Convention,
    fd: &FdPolicy,
) -> Result<Vec<IdentityResidual>> {
    let mut rows = Vec::with_capacity(6 * samples.len());
    for s in samples {
        let gen = PoincareGen::new(s.omega, s.piv);
        let r = invariance_residuals(cf, &s.v, &s.vp, &gen, conv, fd, BoostQuadraticForm::Consistent)?;
        for (name, residual) in IDENTITIES.iter().zip(r) {
            rows.push(IdentityResidual { identity: name.to_string(), sample: *s, residual });
        }
    }
    Ok(rows)
}

/// Finite Lorentz matrix `exp(λ G)` on (t, x¹, x²).
pub fn lorentz_matrix(gen: &PoincareGen, lambda: f64) -> Mat3 {
    (gen.event_matrix() * lambda).exp()
}

/// Image of a jet under the finite Poincaré map `E ↦ exp(λG) E + λ a`.
///
/// The new velocity and its derivatives follow from the quotient rule applied
/// to the transformed tangent (N, D) = (spatial, temporal) parts of Λ·(1, v).
/// The fourth-order entry is dropped.
pub fn lorentz_transform_jet(jet: &Jet, gen: &PoincareGen, lambda: f64, conv: &Convention) -> Result<Jet> {
    conv.subluminal(&jet.v)?;
    let l = lorentz_matrix(gen, lambda);
    let event = l * Vector3::new(jet.t, jet.x.x, jet.x.y) + gen.translations * lambda;
    let t0 = l * Vector3::new(1.0, jet.v.x, jet.v.y);
    let t1 = l * Vector3::new(0.0, jet.vp.x, jet.vp.y);
    let t2 = l * Vector3::new(0.0, jet.vpp.x, jet.vpp.y);
    let (d, d1, d2) = (t0[0], t1[0], t2[0]);
    let (n, n1, n2) = (Vec2::new(t0[1], t0[2]), Vec2::new(t1[1], t1[2]), Vec2::new(t2[1], t2[2]));
    if !(d > 0.0) {
        return Err(Error::SuperluminalVelocity { radicand: conv.radicand(&jet.v), speed: f64::INFINITY });
    }
    let v = n / d;
    conv.subluminal(&v)?;
    let vp = (n1 - v * d1) / (d * d);
    let dv_dt = vp * d;
    let vpp = ((n2 - dv_dt * d1 - v * d2) / (d * d) - vp * (2.0 * d1 / d)) / d;
    Ok(Jet::new(event[0], Vec2::new(event[1], event[2]), v, vp, vpp))
}
