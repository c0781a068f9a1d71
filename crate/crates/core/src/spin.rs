//! Spin tensor, Pirani condition and Dixon momentum of a planar spinning
//! particle.
//!
//! In 2+1 dimensions the spin tensor is dual to a covector,
//! `a_μ = ½ ε_{νλμ} S^{νλ}`. Under the Pirani condition `u_ν S^{μν} = 0`
//! the equation `m₀ u̇ + a × ü = 0` reduces to the proper-time form of the
//! third-order equation with `a = −(m₀/μ) u` and `μ = m₀/𝔰³`.
//!
//! The Dixon momentum in the plane reads
//!
//! ```text
//! P = m₀ v/√(1+v·v) − (sgn 𝔤) 𝔰³ ∗v′/(1+v·v)^{3/2}
//! ```
//!
//! and equals −𝔰³ times the canonical momentum when sgn 𝔤 = +1.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::equation::{ProperJet, ProperTrajectory};
use crate::error::{Error, Result};
use crate::hamiltonian::zero_momentum;
use crate::minkowski::{skew_defect, Convention, Mat3, Vec2, Vec3};

/// Sign σ in `P = σ 𝔰³ p` found by [`calibrate_coincidence`] for the
/// default conventions.
pub const COINCIDENCE_SIGMA: f64 = -1.0;

/// Spin data at one point of a worldline. `a` is covariant, `s` has upper
/// indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinState {
    pub m0: f64,
    pub s3: f64,
    pub s: Mat3,
    pub a: Vec3,
}

/// Planar Dixon momentum (covariant spatial part) and its embedded
/// three-vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DixonMomentum {
    pub p: Vec2,
    pub p3: Vec3,
}

/// `a_μ = ½ ε_{νλμ} S^{νλ}`.
pub fn dual_spin(s: &Mat3, conv: &Convention) -> Result<Vec3> {
    let defect = skew_defect(s);
    if defect > 1e-12 * (1.0 + s.amax()) {
        return Err(Error::NotSkew { defect });
    }
    let mut a = Vec3::zeros();
    for (mu, am) in a.iter_mut().enumerate() {
        for nu in 0..3 {
            for la in 0..3 {
                *am += 0.5 * conv.levi3(nu, la, mu) * s[(nu, la)];
            }
        }
    }
    Ok(a)
}

fn contract_raw(a: &Vec3, conv: &Convention) -> Mat3 {
    Mat3::from_fn(|nu, la| (0..3).map(|mu| conv.levi3(nu, la, mu) * a[mu]).sum())
}

/// Normalization k with `dual_spin(k · ε·a) = a`, measured on a basis
/// covector.
fn undual_normalization(conv: &Convention) -> f64 {
    let e = Vec3::new(1.0, 0.0, 0.0);
    let back = dual_spin(&contract_raw(&e, conv), conv).expect("contraction with ε is skew");
    1.0 / back[0]
}

/// Inverse of [`dual_spin`].
pub fn undual_spin(a: &Vec3, conv: &Convention) -> Mat3 {
    contract_raw(a, conv) * undual_normalization(conv)
}

/// `max(‖u_ν S^{μν}‖, ‖a × u‖)` with a the dual of S.
pub fn pirani_check(s: &Mat3, u: &Vec3, conv: &Convention) -> Result<f64> {
    let u_low = conv.lower3(u);
    let contraction = s * u_low;
    let a = dual_spin(s, conv)?;
    let cross = conv.cross3(&conv.raise3(&a), u);
    Ok(contraction.amax().max(cross.amax()))
}

/// `μ = m₀/𝔰³`.
pub fn mass_renormalization(m0: f64, s3: f64) -> Result<f64> {
    if s3 == 0.0 {
        return Err(Error::ZeroSpin);
    }
    Ok(m0 / s3)
}

/// Residual of `a = (a·u) u − (a×u)×u` for contravariant a and unit u.
pub fn decomposition_residual(a: &Vec3, u: &Vec3, conv: &Convention) -> f64 {
    let axu = conv.raise3(&conv.cross3(a, u));
    let rhs = u * conv.dot3(a, u) - conv.raise3(&conv.cross3(&axu, u));
    (a - rhs).amax()
}

/// Spin obeying the Pirani condition along a proper-time jet:
/// `a = −(m₀/μ) u`, `𝔰³ = m₀/μ`.
pub fn pirani_spin_from_motion(pjet: &ProperJet, m0: f64, mu: f64, conv: &Convention) -> Result<SpinState> {
    if mu == 0.0 {
        return Err(Error::ZeroMu);
    }
    let a = conv.lower3(&pjet.u) * (-m0 / mu);
    Ok(SpinState { m0, s3: m0 / mu, s: undual_spin(&a, conv), a })
}

/// Embedded Dixon momentum `𝔓 = m₀ u − (sgn 𝔤) ∗(u̇ ∧ u ∧ 𝔰)` for
/// 𝔰 = 𝔰³ e₃, i.e. `m₀ u_μ + κ 𝔰³ (u × u̇)_μ` with κ = −sgn 𝔤 · ε₁₂ · ε₀₁₂.
pub fn embedded_momentum(pjet: &ProperJet, m0: f64, s3: f64, conv: &Convention) -> Vec3 {
    let kappa = -conv.sgn_g() * conv.eps2() * conv.eps3();
    conv.lower3(&pjet.u) * m0 + conv.cross3(&pjet.u, &pjet.ud) * (kappa * s3)
}

/// Planar Dixon momentum from time-parametrized data.
pub fn dixon_momentum(v: &Vec2, vp: &Vec2, m0: f64, s3: f64, conv: &Convention) -> Result<DixonMomentum> {
    let w = conv.subluminal(v)?;
    let p = conv.lower2(v) * (m0 / w.sqrt()) - conv.star(vp) * (conv.sgn_g() * s3 / w.powf(1.5));
    // proper-time jet of the same event; ü is not needed
    let g = 1.0 / w.sqrt();
    let gd = -conv.dot2(v, vp) * g * g * g;
    let u = Vec3::new(g, g * v.x, g * v.y);
    let ud = Vec3::new(g * gd, g * (gd * v.x + g * vp.x), g * (gd * v.y + g * vp.y));
    let pjet = ProperJet { x: Vec3::zeros(), u, ud, udd: Vec3::zeros() };
    Ok(DixonMomentum { p, p3: embedded_momentum(&pjet, m0, s3, conv) })
}

/// `‖P − σ 𝔰³ p‖` with p the canonical momentum at μ = m₀/𝔰³.
pub fn momentum_coincidence(v: &Vec2, vp: &Vec2, m0: f64, s3: f64, sigma: f64, conv: &Convention) -> Result<f64> {
    let mu = mass_renormalization(m0, s3)?;
    let big_p = dixon_momentum(v, vp, m0, s3, conv)?.p;
    let p = zero_momentum(v, vp, mu, conv)?;
    Ok((big_p - p * (sigma * s3)).amax())
}

/// Worst coincidence residual for one (σ, sgn 𝔤) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignTrial {
    pub sigma: f64,
    pub sgn_g: i8,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub trials: Vec<SignTrial>,
    /// The unique closing pair, if exactly one closes.
    pub closing: Option<SignTrial>,
}

/// One coincidence sample `(v, v′, m₀, 𝔰³)`.
pub type CoincidenceSample = (Vec2, Vec2, f64, f64);

/// Sweeps σ ∈ {±1}, sgn 𝔤 ∈ {±1} and reports which pairs close
/// `P = σ 𝔰³ p` within `tol` on every sample.
pub fn calibrate_coincidence(samples: &[CoincidenceSample], conv: &Convention, tol: f64) -> Result<Calibration> {
    let mut trials = Vec::with_capacity(4);
    for sgn_g in [1i8, -1] {
        let c = conv.with_sgn_g(sgn_g)?;
        for sigma in [1.0, -1.0] {
            let mut worst = 0.0f64;
            for (v, vp, m0, s3) in samples {
                worst = worst.max(momentum_coincidence(v, vp, *m0, *s3, sigma, &c)?);
            }
            trials.push(SignTrial { sigma, sgn_g, max_residual: worst });
        }
    }
    let closing: Vec<_> = trials.iter().filter(|t| t.max_residual < tol).copied().collect();
    Ok(Calibration { closing: if closing.len() == 1 { Some(closing[0]) } else { None }, trials })
}

/// `(scalarP, scalarS)` along a proper-time solution with Pirani spin:
/// the drift of the embedded momentum and the worst residual of
/// `d𝔖/dτ = 2𝔓 ∧ u`, with d𝔖/dτ by three-point differences in τ.
pub fn dixon_residuals(traj: &ProperTrajectory, m0: f64, mu: f64, conv: &Convention) -> Result<(f64, f64)> {
    if mu == 0.0 {
        return Err(Error::ZeroMu);
    }
    let s3 = m0 / mu;
    let spins = traj
        .jets
        .iter()
        .map(|j| pirani_spin_from_motion(j, m0, mu, conv))
        .collect::<Result<Vec<_>>>()?;
    let momenta: Vec<Vec3> = traj.jets.iter().map(|j| embedded_momentum(j, m0, s3, conv)).collect();
    let scalar_p = momenta.iter().map(|p| (p - momenta[0]).amax()).fold(0.0, f64::max);
    let mut scalar_s = 0.0f64;
    for i in 1..traj.len().saturating_sub(1) {
        let (t0, t1, t2) = (traj.tau[i - 1], traj.tau[i], traj.tau[i + 1]);
        let (h0, h1) = (t1 - t0, t2 - t1);
        // second-order difference on a nonuniform grid
        let ds = spins[i + 1].s * (h0 / (h1 * (h0 + h1))) - spins[i - 1].s * (h1 / (h0 * (h0 + h1)))
            + spins[i].s * ((h1 - h0) / (h0 * h1));
        let pu = conv.raise3(&momenta[i]);
        let u = traj.jets[i].u;
        let wedge = pu * u.transpose() - u * pu.transpose();
        scalar_s = scalar_s.max((ds - wedge).amax());
    }
    Ok((scalar_p, scalar_s))
}

/// `𝔖_{3μ} ü^μ` for the spin embedded in four dimensions with vanishing
/// third row and column.
pub fn planar_spin_residual(state: &SpinState, pjet: &ProperJet) -> f64 {
    let mut s4 = Matrix4::<f64>::zeros();
    s4.fixed_view_mut::<3, 3>(0, 0).copy_from(&state.s);
    let g4 = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -1.0, -1.0, -1.0));
    let s_low = g4 * s4 * g4;
    let udd = nalgebra::Vector4::new(pjet.udd[0], pjet.udd[1], pjet.udd[2], 0.0);
    (s_low.row(3) * udd)[0].abs()
}

/// One row of the CLI-facing spin report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinCheck {
    pub check: String,
    pub max_residual: f64,
    pub samples: usize,
    pub sigma: f64,
    pub sgn_g: i8,
}
