//! Helmholtz-type variationality test for third-order planar systems
//!
//! ```text
//! A(t,x,v)·v″ + (v′·∂_v)A·v′ + B(t,x,v)·v′ + c(t,x,v) = 0,   A skew.
//! ```
//!
//! All partial derivatives, including powers of the Cartan generator
//! `D₁ = ∂_t + v·∂_x`, are taken by Richardson-extrapolated central
//! differences. Bracketed index groups carry the 1/n! normalization.

use serde::{Deserialize, Serialize};

use crate::equation::Jet;
use crate::error::{Error, Result};
use crate::fd::{FdPolicy, FdValue};
use crate::minkowski::{Convention, Mat2, Vec2};

/// A point (t, x, v) of the first jet space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: Vec2,
    pub v: Vec2,
}

impl Sample {
    pub fn new(t: f64, x: Vec2, v: Vec2) -> Self {
        Sample { t, x, v }
    }

    pub fn at_velocity(v: Vec2) -> Self {
        Sample { t: 0.0, x: Vec2::zeros(), v }
    }
}

/// Evaluable coefficients (A, B, c).
pub trait CoefficientField: Send + Sync {
    fn a(&self, p: &Sample) -> Result<Mat2>;
    fn b(&self, p: &Sample) -> Result<Mat2>;
    fn c(&self, p: &Sample) -> Result<Vec2>;

    /// Directional derivative (dir·∂_v)A.
    fn a_along_v(&self, p: &Sample, dir: &Vec2, fd: &FdPolicy) -> Result<Mat2> {
        fd.derivative(1, |s| self.a(&Sample { v: p.v + dir * s, ..*p }))
    }

    /// k = (v′·∂_v)A v′ + B v′ + c.
    fn k(&self, p: &Sample, vp: &Vec2, fd: &FdPolicy) -> Result<Vec2> {
        Ok(self.a_along_v(p, vp, fd)? * vp + self.b(p)? * vp + self.c(p)?)
    }

    /// The left side of the equation evaluated on a jet.
    fn assemble(&self, jet: &Jet, fd: &FdPolicy) -> Result<Vec2> {
        let p = Sample::new(jet.t, jet.x, jet.v);
        Ok(self.a(&p)? * jet.vpp + self.k(&p, &jet.vp, fd)?)
    }
}

/// Coefficients of the invariant equation with mass parameter μ:
///
/// * `A = ∗ / (1 + v·v)^{3/2}`, so A₁₂ = −ε₁₂ at rest,
/// * `B_ab = μ (1 + v·v)^{−3/2} [v_a v_b − (1 + v·v) g_ab]`,
/// * `c = 0`.
///
/// Assembling them reproduces [`crate::equation::residual_ep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantField {
    pub mu: f64,
    pub conv: Convention,
}

pub fn coefficients_of_eq20(mu: f64, conv: &Convention) -> InvariantField {
    InvariantField { mu, conv: *conv }
}

impl CoefficientField for InvariantField {
    fn a(&self, p: &Sample) -> Result<Mat2> {
        let w = self.conv.subluminal(&p.v)?;
        Ok(self.conv.star_matrix() / w.powf(1.5))
    }

    fn b(&self, p: &Sample) -> Result<Mat2> {
        let w = self.conv.subluminal(&p.v)?;
        let v_low = self.conv.lower2(&p.v);
        // −g_ab = δ_ab on the spatial block
        Ok((v_low * v_low.transpose() + Mat2::identity() * w) * (self.mu / w.powf(1.5)))
    }

    fn c(&self, p: &Sample) -> Result<Vec2> {
        self.conv.subluminal(&p.v)?;
        Ok(Vec2::zeros())
    }

    fn a_along_v(&self, p: &Sample, dir: &Vec2, _fd: &FdPolicy) -> Result<Mat2> {
        let w = self.conv.subluminal(&p.v)?;
        let dw = 2.0 * self.conv.dot2(&p.v, dir);
        Ok(self.conv.star_matrix() * (-1.5 * dw / w.powf(2.5)))
    }
}

/// Controlled defects injected into the invariant coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// Adds the constant skew matrix ε̂ to B.
    SkewB,
    /// Multiplies A by (1 + x¹).
    DriftingA,
    /// Adds the force c = (v², 0).
    ForcingC,
    /// Replaces the exponent 3/2 of A by 1. Still variational in the plane,
    /// but no longer Poincaré invariant.
    SoftenedA,
    /// Multiplies B by (1 + v¹). Still variational, not invariant.
    VaryingB,
}

impl Mutation {
    pub const ALL: [Mutation; 5] =
        [Mutation::SkewB, Mutation::DriftingA, Mutation::ForcingC, Mutation::SoftenedA, Mutation::VaryingB];

    pub fn name(&self) -> &'static str {
        match self {
            Mutation::SkewB => "skew-b",
            Mutation::DriftingA => "drifting-a",
            Mutation::ForcingC => "forcing-c",
            Mutation::SoftenedA => "softened-a",
            Mutation::VaryingB => "varying-b",
        }
    }

    pub fn parse(name: &str) -> Option<Mutation> {
        Mutation::ALL.into_iter().find(|m| m.name() == name)
    }
}

/// [`InvariantField`] with one [`Mutation`] applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutatedField {
    pub base: InvariantField,
    pub mutation: Mutation,
}

impl CoefficientField for MutatedField {
    fn a(&self, p: &Sample) -> Result<Mat2> {
        let a = self.base.a(p)?;
        Ok(match self.mutation {
            Mutation::DriftingA => a * (1.0 + p.x.x),
            Mutation::SoftenedA => a * self.base.conv.radicand(&p.v).sqrt(),
            _ => a,
        })
    }

    fn b(&self, p: &Sample) -> Result<Mat2> {
        let b = self.base.b(p)?;
        Ok(match self.mutation {
            Mutation::SkewB => b + Mat2::new(0.0, 1.0, -1.0, 0.0),
            Mutation::VaryingB => b * (1.0 + p.v.x),
            _ => b,
        })
    }

    fn c(&self, p: &Sample) -> Result<Vec2> {
        let c = self.base.c(p)?;
        Ok(match self.mutation {
            Mutation::ForcingC => c + Vec2::new(p.v.y, 0.0),
            _ => c,
        })
    }

    fn a_along_v(&self, p: &Sample, dir: &Vec2, fd: &FdPolicy) -> Result<Mat2> {
        let da = self.base.a_along_v(p, dir, fd)?;
        Ok(match self.mutation {
            Mutation::DriftingA => da * (1.0 + p.x.x),
            Mutation::SoftenedA => {
                let w = self.base.conv.subluminal(&p.v)?;
                let dw = 2.0 * self.base.conv.dot2(&p.v, dir);
                da * w.sqrt() + self.base.a(p)? * (0.5 * dw / w.sqrt())
            }
            _ => da,
        })
    }
}

/// Coordinate directions in (t, x, v) space.
#[derive(Debug, Clone, Copy)]
enum Dir {
    X(usize),
    V(usize),
    /// Along (1, v, 0): the Cartan generator with v frozen at the base point.
    Cartan,
}

fn shift(p: &Sample, dir: Dir, s: f64) -> Sample {
    let mut q = *p;
    match dir {
        Dir::X(i) => q.x[i] += s,
        Dir::V(i) => q.v[i] += s,
        Dir::Cartan => {
            q.t += s;
            q.x += p.v * s;
        }
    }
    q
}

fn partial<T, F>(fd: &FdPolicy, order: u8, p: &Sample, dir: Dir, f: F) -> Result<T>
where
    T: FdValue,
    F: Fn(&Sample) -> Result<T>,
{
    fd.derivative(order, |s| f(&shift(p, dir, s)))
}

/// `(∂_t + v·∂_x) f` at a sample.
pub fn d1_apply<F>(f: F, p: &Sample, fd: &FdPolicy) -> Result<f64>
where
    F: Fn(&Sample) -> f64,
{
    partial(fd, 1, p, Dir::Cartan, |q| Ok(f(q)))
}

/// Residual of one Helmholtz condition at one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResidual {
    pub condition: String,
    pub sample: Sample,
    pub residual: f64,
}

pub const CONDITIONS: [&str; 6] = ["i", "ii", "iii", "iv", "v", "vi"];

/// Max-norm residuals of conditions (i)–(vi) at a sample.
///
/// Condition (i) is evaluated in its alternated form ∂_{v^[a}A_{bc]}, which
/// vanishes identically when the velocity space is two-dimensional.
pub fn helmholtz_residuals<F: CoefficientField + ?Sized>(
    cf: &F,
    p: &Sample,
    fd: &FdPolicy,
) -> Result<[f64; 6]> {
    let det = cf.a(p)?.determinant();
    if det.abs() < 1e-14 {
        return Err(Error::SingularA { det });
    }
    // nested derivatives take the outer step one decade coarser
    let outer = fd.with_step(fd.step * 10.0);

    let a = |q: &Sample| cf.a(q);
    let b = |q: &Sample| cf.b(q);
    let c = |q: &Sample| cf.c(q);

    let b0 = cf.b(p)?;
    // v-derivatives of A go through the field so analytic forms are used
    let e = [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
    let dv_a = [cf.a_along_v(p, &e[0], fd)?, cf.a_along_v(p, &e[1], fd)?];
    let dx_a = [partial(fd, 1, p, Dir::X(0), a)?, partial(fd, 1, p, Dir::X(1), a)?];
    let dv_b = [partial(fd, 1, p, Dir::V(0), b)?, partial(fd, 1, p, Dir::V(1), b)?];
    let dx_b = [partial(fd, 1, p, Dir::X(0), b)?, partial(fd, 1, p, Dir::X(1), b)?];
    let dv_c = [partial(fd, 1, p, Dir::V(0), c)?, partial(fd, 1, p, Dir::V(1), c)?];
    let dx_c = [partial(fd, 1, p, Dir::X(0), c)?, partial(fd, 1, p, Dir::X(1), c)?];
    let d1_a = partial(fd, 1, p, Dir::Cartan, a)?;
    let d1_b = partial(fd, 1, p, Dir::Cartan, b)?;
    let d1_3_a = partial(fd, 3, p, Dir::Cartan, a)?;

    let mut d1_dv_a = [Mat2::zeros(); 2];
    let mut d1_2_dv_a = [Mat2::zeros(); 2];
    let mut d1_dx_a = [Mat2::zeros(); 2];
    let mut d1_dv_c = [Vec2::zeros(); 2];
    let mut dv_dv_c = [[Vec2::zeros(); 2]; 2];
    for i in 0..2 {
        d1_dv_a[i] = partial(&outer, 1, p, Dir::Cartan, |q| cf.a_along_v(q, &e[i], fd))?;
        d1_2_dv_a[i] = partial(&outer, 2, p, Dir::Cartan, |q| cf.a_along_v(q, &e[i], fd))?;
        d1_dx_a[i] = partial(&outer, 1, p, Dir::Cartan, |q| partial(fd, 1, q, Dir::X(i), a))?;
        d1_dv_c[i] = partial(&outer, 1, p, Dir::Cartan, |q| partial(fd, 1, q, Dir::V(i), c))?;
        for (j, slot) in dv_dv_c[i].iter_mut().enumerate() {
            *slot = partial(&outer, 1, p, Dir::V(i), |q| partial(fd, 1, q, Dir::V(j), c))?;
        }
    }

    let skew = |m: &Mat2, i: usize, j: usize| 0.5 * (m[(i, j)] - m[(j, i)]);
    let sym = |m: &Mat2, i: usize, j: usize| 0.5 * (m[(i, j)] + m[(j, i)]);

    let mut res = [0.0f64; 6];
    let mut bump = |k: usize, x: f64| res[k] = res[k].max(x.abs());

    for ia in 0..2 {
        for ib in 0..2 {
            // (ii) 2B_[ab] − 3D₁A_ab
            bump(1, 2.0 * skew(&b0, ia, ib) - 3.0 * d1_a[(ia, ib)]);
            // (iv) ∂_{v^a}c_b − D₁B_(ab)
            bump(3, dv_c[ia][ib] - sym(&d1_b, ia, ib));
            // (vi) 4∂_{x^a}c_b − 2D₁∂_{v^a}c_b − D₁³A_ab
            bump(5, 4.0 * dx_c[ia][ib] - 2.0 * d1_dv_c[ia][ib] - d1_3_a[(ia, ib)]);
            for ic in 0..2 {
                // (i) ∂_{v^[a}A_{bc]}
                let idx = [ia, ib, ic];
                let mut alt = 0.0;
                for (perm, sign) in PERMUTATIONS {
                    let (x, y, z) = (idx[perm[0]], idx[perm[1]], idx[perm[2]]);
                    alt += sign * dv_a[x][(y, z)];
                }
                bump(0, alt / 6.0);
                // (iii) 2∂_{v^a}B_[bc] − 4∂_{x^a}A_[bc] + ∂_{x^c}A_ab + 2D₁∂_{v^c}A_ab
                bump(
                    2,
                    2.0 * skew(&dv_b[ia], ib, ic) - 4.0 * skew(&dx_a[ia], ib, ic)
                        + dx_a[ic][(ia, ib)]
                        + 2.0 * d1_dv_a[ic][(ia, ib)],
                );
                // (v) 2∂_{v^c}∂_{v^a}c_b − 4∂_{x^a}B_[bc] + D₁²∂_{v^c}A_ab + 6D₁∂_{x^a}A_bc
                bump(
                    4,
                    2.0 * dv_dv_c[ic][ia][ib] - 4.0 * skew(&dx_b[ia], ib, ic)
                        + d1_2_dv_a[ic][(ia, ib)]
                        + 6.0 * d1_dx_a[ia][(ib, ic)],
                );
            }
        }
    }
    Ok(res)
}

const PERMUTATIONS: [([usize; 3], f64); 6] = [
    ([0, 1, 2], 1.0),
    ([1, 2, 0], 1.0),
    ([2, 0, 1], 1.0),
    ([0, 2, 1], -1.0),
    ([2, 1, 0], -1.0),
    ([1, 0, 2], -1.0),
];

/// Runs [`helmholtz_residuals`] over many samples and flattens the result
/// into report rows, ordered by sample then condition.
pub fn helmholtz_report<F: CoefficientField + ?Sized>(
    cf: &F,
    samples: &[Sample],
    fd: &FdPolicy,
) -> Result<Vec<ConditionResidual>> {
    let mut rows = Vec::with_capacity(6 * samples.len());
    for p in samples {
        let r = helmholtz_residuals(cf, p, fd)?;
        for (name, residual) in CONDITIONS.iter().zip(r) {
            rows.push(ConditionResidual { condition: name.to_string(), sample: *p, residual });
        }
    }
    Ok(rows)
}
