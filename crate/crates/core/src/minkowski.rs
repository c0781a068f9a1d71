//! Metric, orientation and duality conventions of flat 2+1 space-time.
//!
//! Index 0 is time, indices 1 and 2 are the plane. Components are stored
//! contravariant; operations that produce a covariant object say so. The
//! metric is fixed to diag(+1, −1, −1), so the spatial dot product is
//! negative definite and `1 + v·v = 1 − |v|²` is the proper-time radicand.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;
pub type Vec3 = Vector3<f64>;
pub type Mat2 = Matrix2<f64>;
pub type Mat3 = Matrix3<f64>;

/// Sign conventions shared by every module.
///
/// Serialized as `{"metric": [1,-1,-1], "eps2": 1, "eps3": 1, "sgn_g": 1}`.
/// `eps2` is the sign of ε₁₂, `eps3` the sign of ε₀₁₂ and `sgn_g` the sign
/// flag entering the planar Dixon momentum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawConvention", into = "RawConvention")]
pub struct Convention {
    eps2: i8,
    eps3: i8,
    sgn_g: i8,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConvention {
    metric: [i64; 3],
    eps2: i64,
    eps3: i64,
    sgn_g: i64,
}

impl TryFrom<RawConvention> for Convention {
    type Error = Error;

    fn try_from(raw: RawConvention) -> Result<Self> {
        if raw.metric != [1, -1, -1] {
            return Err(Error::InvalidConvention(format!(
                "metric must be [1,-1,-1], got {:?}",
                raw.metric
            )));
        }
        Convention::new(sign(raw.eps2, "eps2")?, sign(raw.eps3, "eps3")?, sign(raw.sgn_g, "sgn_g")?)
    }
}

impl From<Convention> for RawConvention {
    fn from(c: Convention) -> Self {
        RawConvention {
            metric: [1, -1, -1],
            eps2: c.eps2 as i64,
            eps3: c.eps3 as i64,
            sgn_g: c.sgn_g as i64,
        }
    }
}

fn sign(value: i64, name: &str) -> Result<i8> {
    match value {
        1 => Ok(1),
        -1 => Ok(-1),
        other => Err(Error::InvalidConvention(format!("{name} must be ±1, got {other}"))),
    }
}

impl Default for Convention {
    fn default() -> Self {
        Convention::DEFAULT
    }
}

/// Diagonal of the metric, indices 0, 1, 2.
pub const METRIC_DIAG: [f64; 3] = [1.0, -1.0, -1.0];

impl Convention {
    /// ε₁₂ = ε₀₁₂ = +1, sgn 𝔤 = +1.
    pub const DEFAULT: Convention = Convention { eps2: 1, eps3: 1, sgn_g: 1 };

    pub fn new(eps2: i8, eps3: i8, sgn_g: i8) -> Result<Self> {
        for (name, s) in [("eps2", eps2), ("eps3", eps3), ("sgn_g", sgn_g)] {
            if s != 1 && s != -1 {
                return Err(Error::InvalidConvention(format!("{name} must be ±1, got {s}")));
            }
        }
        Ok(Convention { eps2, eps3, sgn_g })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("convention serializes")
    }

    pub fn eps2(&self) -> f64 {
        self.eps2 as f64
    }

    pub fn eps3(&self) -> f64 {
        self.eps3 as f64
    }

    pub fn sgn_g(&self) -> f64 {
        self.sgn_g as f64
    }

    pub fn with_sgn_g(mut self, sgn_g: i8) -> Result<Self> {
        self.sgn_g = sign(sgn_g as i64, "sgn_g")?;
        Ok(self)
    }

    /// g_ab a^a b^b on the spatial block.
    pub fn dot2(&self, a: &Vec2, b: &Vec2) -> f64 {
        -(a.x * b.x + a.y * b.y)
    }

    /// g_μν a^μ b^ν.
    pub fn dot3(&self, a: &Vec3, b: &Vec3) -> f64 {
        a.x * b.x - a.y * b.y - a.z * b.z
    }

    pub fn lower2(&self, v: &Vec2) -> Vec2 {
        -v
    }

    pub fn raise2(&self, v: &Vec2) -> Vec2 {
        -v
    }

    pub fn lower3(&self, v: &Vec3) -> Vec3 {
        Vec3::new(v.x, -v.y, -v.z)
    }

    pub fn raise3(&self, v: &Vec3) -> Vec3 {
        Vec3::new(v.x, -v.y, -v.z)
    }

    /// Matrix of the spatial star on contravariant input: `(∗w)_a = ε_ba w^b`.
    pub fn star_matrix(&self) -> Mat2 {
        let e = self.eps2();
        Mat2::new(0.0, -e, e, 0.0)
    }

    /// Spatial Hodge star; the result is covariant.
    pub fn star(&self, w: &Vec2) -> Vec2 {
        self.star_matrix() * w
    }

    /// Inverse of [`Convention::star`]: recovers the contravariant vector
    /// whose star is `cov`.
    pub fn unstar(&self, cov: &Vec2) -> Vec2 {
        let e = self.eps2();
        Vec2::new(e * cov.y, -e * cov.x)
    }

    /// ε_ab a^a b^b, the star of the bivector a ∧ b.
    pub fn wedge(&self, a: &Vec2, b: &Vec2) -> f64 {
        self.eps2() * (a.x * b.y - a.y * b.x)
    }

    /// ε_μνλ with ε₀₁₂ = eps3.
    pub fn levi3(&self, i: usize, j: usize, k: usize) -> f64 {
        let parity = match (i, j, k) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
            (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
            _ => 0.0,
        };
        parity * self.eps3()
    }

    /// (a × b)_μ = ε_μνλ a^ν b^λ for contravariant a, b; the result is covariant.
    pub fn cross3(&self, a: &Vec3, b: &Vec3) -> Vec3 {
        let mut out = Vec3::zeros();
        for mu in 0..3 {
            let mut acc = 0.0;
            for nu in 0..3 {
                for la in 0..3 {
                    acc += self.levi3(mu, nu, la) * a[nu] * b[la];
                }
            }
            out[mu] = acc;
        }
        out
    }

    /// (a∧b)·(c∧d) = (a·c)(b·d) − (a·d)(b·c).
    pub fn bivector_inner(&self, a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
        self.dot3(a, c) * self.dot3(b, d) - self.dot3(a, d) * self.dot3(b, c)
    }

    /// Spatial version of [`Convention::bivector_inner`].
    pub fn bivector_inner2(&self, a: &Vec2, b: &Vec2, c: &Vec2, d: &Vec2) -> f64 {
        self.dot2(a, c) * self.dot2(b, d) - self.dot2(a, d) * self.dot2(b, c)
    }

    /// 1 + v·v, positive for subluminal v.
    pub fn radicand(&self, v: &Vec2) -> f64 {
        1.0 + self.dot2(v, v)
    }

    /// Checked radicand: errors unless the velocity is strictly subluminal.
    pub fn subluminal(&self, v: &Vec2) -> Result<f64> {
        let w = self.radicand(v);
        if w > 0.0 && w.is_finite() {
            Ok(w)
        } else {
            Err(Error::SuperluminalVelocity { radicand: w, speed: v.norm() })
        }
    }

    /// √(1 + v·v) = dτ/dt.
    pub fn lorentz_factor(&self, v: &Vec2) -> Result<f64> {
        self.subluminal(v).map(f64::sqrt)
    }
}

/// Skew-symmetric 3×3 matrices as used for spin tensors.
pub fn skew_defect(m: &Mat3) -> f64 {
    (m + m.transpose()).abs().max()
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: Convention = Convention::DEFAULT;

    #[test]
    fn metric_dot_examples() {
        let u = Vec3::new(1.0, 0.0, 0.0);
        assert_eq!(C.dot3(&u, &u), 1.0);
        let e2 = Vec2::new(0.0, 1.0);
        assert_eq!(C.dot2(&e2, &e2), -1.0);
        let v = Vec2::new(0.6, 0.0);
        assert!((C.radicand(&v) - 0.64).abs() < 1e-15);
    }

    #[test]
    fn star_examples() {
        assert_eq!(C.star(&Vec2::new(1.0, 0.0)), Vec2::new(0.0, 1.0));
        assert_eq!(C.star(&Vec2::zeros()), Vec2::zeros());
        let w = Vec2::new(0.3, -1.7);
        // composing the component maps is −1; with the index raised in between it is +1
        assert!((C.star(&C.star(&w)) + w).norm() < 1e-15);
        assert!((C.star(&C.raise2(&C.star(&w))) - w).norm() < 1e-15);
        assert!((C.unstar(&C.star(&w)) - w).norm() < 1e-15);
    }

    #[test]
    fn wedge_examples() {
        let a = Vec2::new(1.0, 0.0);
        let b = Vec2::new(0.0, 1.0);
        assert_eq!(C.wedge(&a, &b), 1.0);
        assert_eq!(C.wedge(&a, &a), 0.0);
        assert_eq!(C.wedge(&b, &a), -1.0);
    }

    #[test]
    fn cross_examples() {
        let a = Vec3::new(1.0, 0.0, 0.0);
        let b = Vec3::new(0.0, 1.0, 0.0);
        assert_eq!(C.cross3(&a, &a), Vec3::zeros());
        // ε₂₀₁ a⁰ b¹ = +1 in the covariant slot 2
        assert_eq!(C.cross3(&a, &b), Vec3::new(0.0, 0.0, 1.0));
        let flipped = Convention::new(1, -1, 1).unwrap();
        assert_eq!(flipped.cross3(&a, &b), Vec3::new(0.0, 0.0, -1.0));
    }

    #[test]
    fn bivector_inner_examples() {
        let e1 = Vec3::new(0.0, 1.0, 0.0);
        let e2 = Vec3::new(0.0, 0.0, 1.0);
        assert_eq!(C.bivector_inner(&e1, &e2, &e1, &e2), 1.0);
        let c = Vec3::new(0.2, 0.5, -0.1);
        let d = Vec3::new(1.0, 0.1, 0.3);
        assert_eq!(C.bivector_inner(&c, &c, &c, &d), 0.0);
        let x = C.bivector_inner(&e1, &c, &c, &d);
        let y = C.bivector_inner(&c, &e1, &c, &d);
        assert!((x + y).abs() < 1e-15);
    }

    #[test]
    fn lorentz_factor_examples() {
        assert_eq!(C.lorentz_factor(&Vec2::zeros()).unwrap(), 1.0);
        assert!((C.lorentz_factor(&Vec2::new(0.6, 0.0)).unwrap() - 0.8).abs() < 1e-15);
        assert!(matches!(
            C.lorentz_factor(&Vec2::new(1.0, 0.0)),
            Err(Error::SuperluminalVelocity { .. })
        ));
    }

    #[test]
    fn convention_json() {
        let text = r#"{"metric": [1,-1,-1], "eps2": 1, "eps3": 1, "sgn_g": 1}"#;
        assert_eq!(Convention::from_json(text).unwrap(), Convention::default());
        let round = Convention::from_json(&Convention::new(-1, -1, 1).unwrap().to_json()).unwrap();
        assert_eq!(round, Convention::new(-1, -1, 1).unwrap());
        assert!(Convention::from_json(r#"{"metric": [-1,1,1], "eps2": 1, "eps3": 1, "sgn_g": 1}"#).is_err());
        assert!(Convention::from_json(r#"{"metric": [1,-1,-1], "eps2": 2, "eps3": 1, "sgn_g": 1}"#).is_err());
    }
}
