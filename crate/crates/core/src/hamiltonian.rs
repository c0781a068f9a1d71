//! Canonical picture of the averaged Lagrangian `L = ½(L₁ + L₂)`.
//!
//! Momenta (covariant, `w = 1 + v·v`):
//!
//! ```text
//! p   = ∗v′ / w^{3/2} − μ v / √w
//! p′₁ =  v² / (2√w (1 + v₁v¹)),   p′₂ = −v¹ / (2√w (1 + v₂v²))
//! H   = p·v + μ√w
//! ```
//!
//! p′ depends on v alone, so ∂v/∂p = 0 and the Legendre map splits into a
//! Newton solve for v followed by an explicit formula for v′.
//!
//! The map v ↦ p′ is a diffeomorphism only on the disk
//! |v| < [`REGULAR_SPEED`] = √(2/3). Its Jacobian degenerates on a curve that
//! touches this circle on the diagonals, and beyond it p′ has several
//! preimages.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::equation::{Integration, Trajectory};
use crate::error::{Error, Result};
use crate::minkowski::{Convention, Mat2, Vec2};

/// Radius of the largest disk on which v ↦ p′ is regular.
pub const REGULAR_SPEED: f64 = 0.816_496_580_927_726;

fn first_order_denominators(v: &Vec2, conv: &Convention) -> Result<(f64, f64, f64)> {
    let w = conv.subluminal(v)?;
    // 1 + v₁v¹ and 1 + v₂v² on the spatial block
    let d1 = 1.0 - v.x * v.x;
    let d2 = 1.0 - v.y * v.y;
    for d in [d1, d2] {
        if d.abs() < 1e-12 {
            return Err(Error::DegenerateDenominator { value: d });
        }
    }
    Ok((w, d1, d2))
}

/// First-order momentum p′(v).
pub fn first_momentum(v: &Vec2, conv: &Convention) -> Result<Vec2> {
    let (w, d1, d2) = first_order_denominators(v, conv)?;
    let s = w.sqrt();
    Ok(Vec2::new(v.y / (2.0 * s * d1), -v.x / (2.0 * s * d2)))
}

/// Zero-order momentum p(v, v′).
pub fn zero_momentum(v: &Vec2, vp: &Vec2, mu: f64, conv: &Convention) -> Result<Vec2> {
    let w = conv.subluminal(v)?;
    Ok(conv.star(vp) / w.powf(1.5) - conv.lower2(v) * (mu / w.sqrt()))
}

/// `(p, p′)`.
pub fn momenta(v: &Vec2, vp: &Vec2, mu: f64, conv: &Convention) -> Result<(Vec2, Vec2)> {
    Ok((zero_momentum(v, vp, mu, conv)?, first_momentum(v, conv)?))
}

/// The two closed forms of the Hamilton function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianForms {
    /// `∗(v′∧v) / w^{3/2} + μ / √w`.
    pub wedge_form: f64,
    /// `p·v + μ√w`.
    pub momentum_form: f64,
}

pub fn hamiltonian_forms(v: &Vec2, vp: &Vec2, mu: f64, conv: &Convention) -> Result<HamiltonianForms> {
    let w = conv.subluminal(v)?;
    let p = zero_momentum(v, vp, mu, conv)?;
    Ok(HamiltonianForms {
        wedge_form: conv.wedge(vp, v) / w.powf(1.5) + mu / w.sqrt(),
        momentum_form: p.dot(v) + mu * w.sqrt(),
    })
}

pub fn hamiltonian_value(v: &Vec2, vp: &Vec2, mu: f64, conv: &Convention) -> Result<f64> {
    Ok(hamiltonian_forms(v, vp, mu, conv)?.wedge_form)
}

/// Inverse of the v-block of the Legendre Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiBlock {
    /// ∂p′/∂v, rows indexed by p′.
    pub dpp_dv: Mat2,
    /// ∂v/∂p′.
    pub dv_dpp: Mat2,
    /// Determinant of [`typeset_matrix`], so that
    /// `∂v/∂p′ = 2 (1 + v·v)^{3/2} / Δ · M`.
    pub delta: f64,
}

/// The matrix M such that `∂v/∂p′ = 2 (1 + v·v)^{3/2} Δ⁻¹ M`, Δ = det M.
pub fn typeset_matrix(v: &Vec2, conv: &Convention) -> Result<Mat2> {
    let (_, d1, d2) = first_order_denominators(v, conv)?;
    let (a, b) = (v.x, v.y);
    // v₁v¹ = −a², v₂v² = −b², v₁v² = −ab
    let m11 = -a * b * (3.0 - 3.0 * b * b - 2.0 * a * a) / (d2 * d2);
    let m22 = a * b * (3.0 - 3.0 * a * a - 2.0 * b * b) / (d1 * d1);
    Ok(Mat2::new(m11, -1.0, 1.0, m22))
}

/// ∂p′/∂v in closed form.
pub fn first_momentum_jacobian(v: &Vec2, conv: &Convention) -> Result<Mat2> {
    let (w, d1, d2) = first_order_denominators(v, conv)?;
    let (a, b) = (v.x, v.y);
    let c = 0.5 / w.powf(1.5);
    Ok(Mat2::new(
        c * a * b * (d1 + 2.0 * w) / (d1 * d1),
        c,
        -c,
        -c * a * b * (d2 + 2.0 * w) / (d2 * d2),
    ))
}

pub fn jacobi_block(v: &Vec2, conv: &Convention) -> Result<JacobiBlock> {
    let dpp_dv = first_momentum_jacobian(v, conv)?;
    let delta = typeset_matrix(v, conv)?.determinant();
    if !(delta.abs() > 1e-12) || !delta.is_finite() {
        return Err(Error::SingularJacobian { det: delta });
    }
    let dv_dpp = dpp_dv.try_inverse().ok_or(Error::SingularJacobian { det: delta })?;
    Ok(JacobiBlock { dpp_dv, dv_dpp, delta })
}

/// Newton settings for the inverse Legendre map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-12, max_iter: 50 }
    }
}

/// Small-velocity linearization of p′(v), inverted.
pub fn initial_velocity_guess(pp: &Vec2) -> Vec2 {
    let v = Vec2::new(-2.0 * pp.y, 2.0 * pp.x);
    let n = v.norm();
    if n > 0.9 {
        v * (0.9 / n)
    } else {
        v
    }
}

/// Solves p′(v) = pp on the regular branch. Damped Newton from `guess` is
/// tried first; if it fails or lands outside |v| < [`REGULAR_SPEED`], the
/// root is followed from v = 0 along p′ = λ·pp, λ ∈ [0, 1].
pub fn solve_velocity(pp: &Vec2, guess: &Vec2, conv: &Convention, opts: &NewtonOptions) -> Result<Vec2> {
    match newton(pp, guess, conv, opts) {
        Ok(v) if v.norm() < REGULAR_SPEED => Ok(v),
        _ => continuation(pp, conv, opts),
    }
}

fn newton(pp: &Vec2, guess: &Vec2, conv: &Convention, opts: &NewtonOptions) -> Result<Vec2> {
    let residual = |v: &Vec2| first_momentum(v, conv).map(|q| q - pp);
    let mut v = *guess;
    let mut r = residual(&v)?;
    for _ in 0..opts.max_iter {
        if r.amax() <= opts.tol {
            return Ok(v);
        }
        let block = jacobi_block(&v, conv)?;
        let step = block.dv_dpp * r;
        let mut lambda = 1.0;
        loop {
            let trial = v - step * lambda;
            if let Ok(rt) = residual(&trial) {
                if rt.norm() < r.norm() {
                    v = trial;
                    r = rt;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-10 {
                return Err(Error::NewtonDivergence { iterations: opts.max_iter, residual: r.norm() });
            }
        }
    }
    if r.amax() <= opts.tol {
        Ok(v)
    } else {
        Err(Error::NewtonDivergence { iterations: opts.max_iter, residual: r.norm() })
    }
}

fn continuation(pp: &Vec2, conv: &Convention, opts: &NewtonOptions) -> Result<Vec2> {
    let (mut v, mut lambda, mut dl) = (Vec2::zeros(), 0.0f64, 0.25f64);
    while lambda < 1.0 {
        let next = (lambda + dl).min(1.0);
        match newton(&(pp * next), &v, conv, opts) {
            Ok(vn) => {
                v = vn;
                lambda = next;
                dl = (dl * 1.5).min(0.5);
            }
            Err(e) => {
                dl *= 0.5;
                if dl < 1e-6 {
                    return Err(e);
                }
            }
        }
    }
    Ok(v)
}

/// v′ from p at a known v: `∗v′ = w^{3/2} (p + μ v / √w)`.
pub fn acceleration_from_momentum(p: &Vec2, v: &Vec2, mu: f64, conv: &Convention) -> Result<Vec2> {
    let w = conv.subluminal(v)?;
    Ok(conv.unstar(&((p + conv.lower2(v) * (mu / w.sqrt())) * w.powf(1.5))))
}

/// `(v, v′)` from `(p, p′)`.
pub fn inverse_legendre(p: &Vec2, pp: &Vec2, mu: f64, conv: &Convention) -> Result<(Vec2, Vec2)> {
    inverse_legendre_from(p, pp, mu, &initial_velocity_guess(pp), conv)
}

/// [`inverse_legendre`] with a caller-supplied starting velocity.
pub fn inverse_legendre_from(p: &Vec2, pp: &Vec2, mu: f64, guess: &Vec2, conv: &Convention) -> Result<(Vec2, Vec2)> {
    let v = solve_velocity(pp, guess, conv, &NewtonOptions::default())?;
    Ok((v, acceleration_from_momentum(p, &v, mu, conv)?))
}

/// Point of phase space. Both momenta are covariant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalState {
    pub t: f64,
    pub x: Vec2,
    pub p: Vec2,
    pub pp: Vec2,
}

impl CanonicalState {
    /// Legendre transform of a velocity jet. Fails with
    /// [`Error::BeyondFold`] when v is not the regular-branch preimage of
    /// its p′, since the canonical flow could not return to it.
    pub fn from_velocities(t: f64, x: Vec2, v: &Vec2, vp: &Vec2, mu: f64, conv: &Convention) -> Result<Self> {
        let (p, pp) = momenta(v, vp, mu, conv)?;
        let back = solve_velocity(&pp, v, conv, &NewtonOptions::default())?;
        if (back - v).amax() > 1e-9 {
            return Err(Error::BeyondFold { speed: v.norm() });
        }
        Ok(CanonicalState { t, x, p, pp })
    }
}

pub const CANONICAL_CSV_HEADER: [&str; 8] = ["t", "x1", "x2", "p1", "p2", "pp1", "pp2", "H"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalRecord {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub p1: f64,
    pub p2: f64,
    pub pp1: f64,
    pub pp2: f64,
    #[serde(rename = "H")]
    pub h: f64,
}

/// Canonical states with the reconstructed velocities and H at each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalTrajectory {
    pub states: Vec<CanonicalState>,
    pub velocities: Vec<(Vec2, Vec2)>,
    pub energy: Vec<f64>,
}

impl CanonicalTrajectory {
    pub fn records(&self) -> impl Iterator<Item = CanonicalRecord> + '_ {
        self.states.iter().zip(&self.energy).map(|(s, h)| CanonicalRecord {
            t: s.t,
            x1: s.x.x,
            x2: s.x.y,
            p1: s.p.x,
            p2: s.p.y,
            pp1: s.pp.x,
            pp2: s.pp.y,
            h: *h,
        })
    }

    /// Writes `t,x1,x2,p1,p2,pp1,pp2,H` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in self.records() {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Evolves (x, p′) with p held fixed: `dx/dt = v`, `dp′/dt = (∂p′/∂v) v′`,
/// where v and v′ are recovered from (p, p′) at every stage.
pub fn canonical_flow(
    state0: &CanonicalState,
    mu: f64,
    t_end: f64,
    integration: &Integration,
    conv: &Convention,
) -> Result<CanonicalTrajectory> {
    let p = state0.p;
    let mut guess = initial_velocity_guess(&state0.pp);
    let y0 = [state0.x.x, state0.x.y, state0.pp.x, state0.pp.y];
    let samples = integration.run(
        |_t, y: &[f64; 4]| {
            let pp = Vec2::new(y[2], y[3]);
            let (v, vp) = inverse_legendre_from(&p, &pp, mu, &guess, conv)?;
            guess = v;
            let dpp = first_momentum_jacobian(&v, conv)? * vp;
            Ok([v.x, v.y, dpp.x, dpp.y])
        },
        state0.t,
        y0,
        t_end,
    )?;
    let mut out = CanonicalTrajectory {
        states: Vec::with_capacity(samples.len()),
        velocities: Vec::with_capacity(samples.len()),
        energy: Vec::with_capacity(samples.len()),
    };
    let mut guess = initial_velocity_guess(&state0.pp);
    for s in samples {
        let pp = Vec2::new(s.y[2], s.y[3]);
        let (v, vp) = inverse_legendre_from(&p, &pp, mu, &guess, conv)?;
        guess = v;
        out.states.push(CanonicalState { t: s.t, x: Vec2::new(s.y[0], s.y[1]), p, pp });
        out.energy.push(hamiltonian_value(&v, &vp, mu, conv)?);
        out.velocities.push((v, vp));
    }
    Ok(out)
}

/// Column names of the paired two-flow CSV.
pub const COMPARISON_CSV_HEADER: [&str; 6] = ["t", "x1_direct", "x2_direct", "x1_canonical", "x2_canonical", "deviation"];

/// One row of the two-flow comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub t: f64,
    pub x1_direct: f64,
    pub x2_direct: f64,
    pub x1_canonical: f64,
    pub x2_canonical: f64,
    pub deviation: f64,
}

/// Worldlines of the third-order flow and the canonical flow on the grid of
/// the former.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowComparison {
    pub rows: Vec<ComparisonRecord>,
    pub max_deviation: f64,
}

impl FlowComparison {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Pairs the two worldlines. Canonical positions are taken at the direct
/// sample times, by cubic Hermite interpolation when the grids differ.
pub fn compare_flows(direct: &Trajectory, canonical: &CanonicalTrajectory) -> Result<FlowComparison> {
    let states = &canonical.states;
    if states.is_empty() {
        return Err(Error::MalformedTrajectory("empty canonical trajectory".into()));
    }
    let mut rows = Vec::with_capacity(direct.len());
    let mut k = 0;
    for (i, j) in direct.jets().iter().enumerate() {
        let xc = match states.get(i) {
            Some(s) if s.t == j.t => s.x,
            _ => {
                while k + 2 < states.len() && states[k + 1].t < j.t {
                    k += 1;
                }
                let (a, b) = (&states[k], &states[(k + 1).min(states.len() - 1)]);
                let h = b.t - a.t;
                if h <= 0.0 {
                    a.x
                } else {
                    let s = ((j.t - a.t) / h).clamp(0.0, 1.0);
                    let (va, vb) = (canonical.velocities[k].0, canonical.velocities[(k + 1).min(states.len() - 1)].0);
                    let h00 = 2.0 * s * s * s - 3.0 * s * s + 1.0;
                    let h10 = s * s * s - 2.0 * s * s + s;
                    let h01 = -2.0 * s * s * s + 3.0 * s * s;
                    let h11 = s * s * s - s * s;
                    a.x * h00 + va * (h10 * h) + b.x * h01 + vb * (h11 * h)
                }
            }
        };
        let deviation = (j.x - xc).norm();
        rows.push(ComparisonRecord {
            t: j.t,
            x1_direct: j.x.x,
            x2_direct: j.x.y,
            x1_canonical: xc.x,
            x2_canonical: xc.y,
            deviation,
        });
    }
    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok(FlowComparison { rows, max_deviation })
}

/// Largest relative deviation of a sequence from its first entry.
pub fn relative_drift(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut it = values.into_iter();
    let Some(first) = it.next() else { return 0.0 };
    let scale = first.abs().max(1e-300);
    it.fold(0.0, |m, x| m.max((x - first).abs() / scale))
}

/// H along a trajectory of the third-order equation.
pub fn energy_along(traj: &Trajectory, conv: &Convention) -> Result<Vec<f64>> {
    traj.jets().iter().map(|j| hamiltonian_value(&j.v, &j.vp, traj.mu, conv)).collect()
}

/// p along a trajectory of the third-order equation.
pub fn momentum_along(traj: &Trajectory, conv: &Convention) -> Result<Vec<Vec2>> {
    traj.jets().iter().map(|j| zero_momentum(&j.v, &j.vp, traj.mu, conv)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: Convention = Convention::DEFAULT;

    #[test]
    fn rest_momenta_vanish() {
        let (p, pp) = momenta(&Vec2::zeros(), &Vec2::zeros(), 3.0, &C).unwrap();
        assert_eq!(p, Vec2::zeros());
        assert_eq!(pp, Vec2::zeros());
    }

    #[test]
    fn momenta_examples() {
        let (p, pp) = momenta(&Vec2::zeros(), &Vec2::new(1.0, 0.0), 2.0, &C).unwrap();
        assert_eq!(p, Vec2::new(0.0, 1.0));
        assert_eq!(pp, Vec2::zeros());
        let pp = first_momentum(&Vec2::new(0.6, 0.0), &C).unwrap();
        assert_eq!(pp.x, 0.0);
        assert!((pp.y + 0.375).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_at_rest() {
        let f = hamiltonian_forms(&Vec2::zeros(), &Vec2::new(0.3, 0.2), 1.4, &C).unwrap();
        assert_eq!(f.wedge_form, 1.4);
        assert_eq!(f.momentum_form, 1.4);
    }

    #[test]
    fn hamiltonian_forms_agree() {
        let f = hamiltonian_forms(&Vec2::new(0.4, -0.5), &Vec2::new(1.3, 0.7), 0.6, &C).unwrap();
        assert!((f.wedge_form - f.momentum_form).abs() < 1e-14);
    }

    #[test]
    fn jacobian_at_rest() {
        let b = jacobi_block(&Vec2::zeros(), &C).unwrap();
        assert_eq!(b.dpp_dv, Mat2::new(0.0, 0.5, -0.5, 0.0));
        assert_eq!(b.dv_dpp, Mat2::new(0.0, -2.0, 2.0, 0.0));
        assert_eq!(b.delta, 1.0);
    }

    #[test]
    fn jacobian_matches_difference_quotient() {
        let v = Vec2::new(0.35, -0.55);
        let h = 1e-6;
        let j = first_momentum_jacobian(&v, &C).unwrap();
        for b in 0..2 {
            let mut e = Vec2::zeros();
            e[b] = h;
            let col = (first_momentum(&(v + e), &C).unwrap() - first_momentum(&(v - e), &C).unwrap()) / (2.0 * h);
            assert!((col - j.column(b)).amax() < 1e-9);
        }
    }

    #[test]
    fn typeset_inverse_agrees() {
        let v = Vec2::new(-0.3, 0.62);
        let b = jacobi_block(&v, &C).unwrap();
        let w = C.radicand(&v);
        let typeset = typeset_matrix(&v, &C).unwrap() * (2.0 * w.powf(1.5) / b.delta);
        assert!((typeset - b.dv_dpp).amax() < 1e-12);
        assert!((b.dv_dpp * b.dpp_dv - Mat2::identity()).amax() < 1e-12);
    }

    #[test]
    fn inverse_examples() {
        let (v, vp) = inverse_legendre(&Vec2::zeros(), &Vec2::zeros(), 1.0, &C).unwrap();
        assert_eq!(v, Vec2::zeros());
        assert_eq!(vp, Vec2::zeros());
        let (v, _) = inverse_legendre(&Vec2::zeros(), &Vec2::new(0.0, -0.375), 1.0, &C).unwrap();
        assert!((v - Vec2::new(0.6, 0.0)).amax() < 1e-12);
    }

    #[test]
    fn roundtrip() {
        let (v, vp, mu) = (Vec2::new(0.5, 0.55), Vec2::new(-2.0, 0.3), 1.1);
        let (p, pp) = momenta(&v, &vp, mu, &C).unwrap();
        let (v2, vp2) = inverse_legendre(&p, &pp, mu, &C).unwrap();
        assert!((v2 - v).amax() < 1e-11);
        assert!((vp2 - vp).amax() < 1e-10);
    }

    #[test]
    fn continuation_recovers_hard_points() {
        // plain Newton from the linearized guess stalls here
        for v in [Vec2::new(-0.652_813_774_337_674, -0.431_634_044_233_458), Vec2::new(0.195, -0.587)] {
            let pp = first_momentum(&v, &C).unwrap();
            let got = solve_velocity(&pp, &initial_velocity_guess(&pp), &C, &NewtonOptions::default()).unwrap();
            assert!((got - v).amax() < 1e-11, "{got:?} vs {v:?}");
        }
    }

    #[test]
    fn canonical_state_rejects_folded_velocity() {
        let r = CanonicalState::from_velocities(0.0, Vec2::zeros(), &Vec2::new(0.7, 0.45), &Vec2::zeros(), 1.0, &C);
        assert!(matches!(r, Err(Error::BeyondFold { .. })), "{r:?}");
        assert!(CanonicalState::from_velocities(0.0, Vec2::zeros(), &Vec2::new(0.5, 0.3), &Vec2::zeros(), 1.0, &C).is_ok());
    }

    #[test]
    fn fold_beyond_regular_disk() {
        // on the diagonal Δ vanishes exactly at |v|² = 2/3
        let r = (1.0f64 / 3.0).sqrt();
        let on_fold = Vec2::new(r, r);
        assert!(typeset_matrix(&on_fold, &C).unwrap().determinant().abs() < 1e-12);
        assert!(matches!(jacobi_block(&on_fold, &C), Err(Error::SingularJacobian { .. })));
        // p′ has another preimage inside the disk
        let v = Vec2::new(0.7, 0.45);
        let pp = first_momentum(&v, &C).unwrap();
        let other = solve_velocity(&pp, &Vec2::new(0.4, 0.73), &C, &NewtonOptions::default()).unwrap();
        assert!((other - v).norm() > 0.1);
        assert!(other.norm() < 1.0);
    }

    #[test]
    fn out_of_range_momentum_diverges() {
        let r = inverse_legendre(&Vec2::zeros(), &Vec2::new(1e6, 0.0), 1.0, &C);
        assert!(matches!(r, Err(Error::NewtonDivergence { .. }) | Err(Error::SuperluminalVelocity { .. })));
    }

    #[test]
    fn rest_state_is_stationary() {
        let s = CanonicalState { t: 0.0, x: Vec2::new(1.0, 2.0), p: Vec2::zeros(), pp: Vec2::zeros() };
        let out = canonical_flow(&s, 2.0, 1.0, &Integration::rk4(0.1), &C).unwrap();
        assert!(out.states.iter().all(|q| q.x == s.x && q.pp == Vec2::zeros()));
    }

    #[test]
    fn drift_helper() {
        assert!((relative_drift([2.0, 2.0, 2.2, 1.9]) - 0.1).abs() < 1e-15);
        assert_eq!(relative_drift(Vec::new()), 0.0);
    }
}
