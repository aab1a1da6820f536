//! Projective 2x2 real matrices acting on the extended real line.
//!
//! The group elements used throughout are words in the generators
//! `A = (1 t; 0 1)` (translation by `t`) and `C = (-1 1; -1 0)`, together
//! with the conjugation matrix `R = (0 -1; 1 0)` that implements the
//! second coordinate of the planar maps.

use crate::error::{Error, Result};
use std::fmt;

/// Tolerance for projective equality of det-normalized matrices.
pub const PROJ_EQ_TOL: f64 = 1e-12;

/// Residual bound accepted for a fixed point: `|M.x - x| < tol * (1 + |x|)`.
pub const FIXED_POINT_TOL: f64 = 1e-12;

/// Derivative within this distance of 1 is classified parabolic.
pub const PARABOLIC_TOL: f64 = 1e-8;

/// Group data for the Fuchsian group attached to index `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupParams {
    pub n: u32,
    /// Translation length `t = 1 + 2 cos(pi/n)`.
    pub t: f64,
    /// `nu = 2 cos(pi/n)`.
    pub nu: f64,
}

/// `t = 1 + 2 cos(pi/n)` and `nu = 2 cos(pi/n)` for the group of index `n`.
pub fn group_params(n: i64) -> Result<GroupParams> {
    if n < 3 {
        return Err(Error::InvalidIndex(n));
    }
    let nu = 2.0 * (std::f64::consts::PI / n as f64).cos();
    Ok(GroupParams { n: n as u32, t: 1.0 + nu, nu })
}

/// A point of the extended real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinity,
}

impl ExtReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::Infinity)
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::Finite(x)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::Infinity => write!(f, "inf"),
        }
    }
}

/// Projective 2x2 real matrix. Group elements are kept det-normalized to +1.
#[derive(Debug, Clone, Copy)]
pub struct Mobius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mobius {
    pub const IDENTITY: Mobius = Mobius { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let m = Mobius { a, b, c, d };
        let det = m.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::SingularMatrix(det));
        }
        Ok(m)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Rescale so det = +1. For our generator words det is positive already;
    /// a negative determinant is rejected since it does not occur in the group.
    pub fn normalized(&self) -> Result<Self> {
        let det = self.det();
        if det <= 0.0 || !det.is_finite() {
            return Err(Error::SingularMatrix(det));
        }
        let s = det.sqrt();
        Ok(Mobius { a: self.a / s, b: self.b / s, c: self.c / s, d: self.d / s })
    }

    pub fn compose(&self, other: &Mobius) -> Mobius {
        Mobius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn inverse(&self) -> Result<Mobius> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::SingularMatrix(det));
        }
        Ok(Mobius {
            a: self.d / det,
            b: -self.b / det,
            c: -self.c / det,
            d: self.a / det,
        })
    }

    /// Integer power (negative exponents via the inverse).
    pub fn pow(&self, k: i64) -> Result<Mobius> {
        let base = if k >= 0 { *self } else { self.inverse()? };
        let mut out = Mobius::IDENTITY;
        for _ in 0..k.unsigned_abs() {
            out = out.compose(&base);
        }
        Ok(out)
    }

    pub fn apply(&self, x: ExtReal) -> ExtReal {
        match x {
            ExtReal::Infinity => {
                if self.c == 0.0 {
                    ExtReal::Infinity
                } else {
                    ExtReal::Finite(self.a / self.c)
                }
            }
            ExtReal::Finite(x) => {
                let den = self.c * x + self.d;
                if den == 0.0 {
                    ExtReal::Infinity
                } else {
                    ExtReal::Finite((self.a * x + self.b) / den)
                }
            }
        }
    }

    /// Apply to a finite value, assuming the result is finite.
    pub fn apply_f(&self, x: f64) -> f64 {
        (self.a * x + self.b) / (self.c * x + self.d)
    }

    /// Derivative `det / (cx + d)^2` at a finite point.
    pub fn deriv(&self, x: f64) -> f64 {
        let den = self.c * x + self.d;
        self.det() / (den * den)
    }

    /// Conjugation `R M R^-1` with `R = (0 -1; 1 0)`.
    pub fn conj_by_r(&self) -> Mobius {
        Mobius { a: self.d, b: -self.c, c: -self.b, d: self.a }
    }

    /// Projective equality: entrywise agreement up to a global sign after
    /// det-normalization.
    pub fn proj_eq(&self, other: &Mobius) -> bool {
        let (m, n) = match (self.normalized(), other.normalized()) {
            (Ok(m), Ok(n)) => (m, n),
            _ => return false,
        };
        let same = (m.a - n.a).abs().max((m.b - n.b).abs()).max((m.c - n.c).abs()).max((m.d - n.d).abs());
        let flip = (m.a + n.a).abs().max((m.b + n.b).abs()).max((m.c + n.c).abs()).max((m.d + n.d).abs());
        same.min(flip) < PROJ_EQ_TOL
    }

    pub fn is_identity(&self) -> bool {
        self.proj_eq(&Mobius::IDENTITY)
    }
}

/// Classification of a real fixed point by the derivative magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedKind {
    Attracting,
    Repelling,
    Parabolic,
}

#[derive(Debug, Clone, Copy)]
pub struct FixedPoint {
    pub x: f64,
    pub kind: FixedKind,
    /// `|M'(x)|` at the root.
    pub deriv: f64,
}

/// Real fixed points of `M` (roots of `c x^2 + (d - a) x - b = 0`),
/// classified by `|M'|` against 1. Elliptic elements yield an empty list.
pub fn fixed_points(m: &Mobius) -> Vec<FixedPoint> {
    let (a, b, c, d) = (m.a, m.b, m.c, m.d);
    if c == 0.0 {
        // Affine map: x = b / (a - d) unless parabolic translation.
        if (a - d).abs() < PROJ_EQ_TOL * (a.abs() + d.abs()) {
            return Vec::new(); // translation, fixes only infinity
        }
        let x = b / (d - a);
        let dv = (a / d).abs();
        return vec![classify(x, dv)];
    }
    let disc = (d - a) * (d - a) + 4.0 * b * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    let det = m.det();
    let mut out = Vec::with_capacity(2);
    for root in [(a - d + s) / (2.0 * c), (a - d - s) / (2.0 * c)] {
        let den = c * root + d;
        let dv = (det / (den * den)).abs();
        out.push(classify(root, dv));
        if s == 0.0 {
            break;
        }
    }
    out
}

fn classify(x: f64, deriv: f64) -> FixedPoint {
    let kind = if (deriv - 1.0).abs() < PARABOLIC_TOL {
        FixedKind::Parabolic
    } else if deriv > 1.0 {
        FixedKind::Repelling
    } else {
        FixedKind::Attracting
    };
    FixedPoint { x, kind, deriv }
}

/// The generator triple `(A, C, R)` for the group of index `n`.
pub fn generators(params: &GroupParams) -> (Mobius, Mobius, Mobius) {
    let a = Mobius { a: 1.0, b: params.t, c: 0.0, d: 1.0 };
    let c = Mobius { a: -1.0, b: 1.0, c: -1.0, d: 0.0 };
    let r = Mobius { a: 0.0, b: -1.0, c: 1.0, d: 0.0 };
    (a, c, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params3() -> GroupParams {
        group_params(3).unwrap()
    }

    #[test]
    fn group_params_values() {
        let p = params3();
        assert!((p.t - 2.0).abs() < 1e-15);
        assert!((group_params(4).unwrap().t - (1.0 + 2f64.sqrt())).abs() < 1e-14);
        assert!((group_params(6).unwrap().t - (1.0 + 3f64.sqrt())).abs() < 1e-14);
        assert!(group_params(2).is_err());
    }

    #[test]
    fn generator_actions() {
        let p = params3();
        let (a, c, _r) = generators(&p);
        assert_eq!(a.apply(0.0.into()), ExtReal::Finite(2.0));
        assert!((c.apply_f(2.0) - 0.5).abs() < 1e-15);
        assert!(c.apply(0.0.into()).is_infinite());
        // C^3 = Id and A^{-1}C has projective order n.
        assert!(c.pow(3).unwrap().is_identity());
        for n in 3..=12 {
            let p = group_params(n).unwrap();
            let (a, c, _) = generators(&p);
            let b = a.inverse().unwrap().compose(&c);
            assert!(b.pow(n).unwrap().is_identity(), "(A^-1 C)^{n} != Id");
            assert!(!b.pow(n - 1).unwrap().is_identity());
        }
    }

    #[test]
    fn inverse_round_trip() {
        let p = params3();
        let (a, _, _) = generators(&p);
        let x = 0.3;
        assert!((a.inverse().unwrap().apply_f(x + p.t) - x).abs() < 1e-15);
    }

    #[test]
    fn c_squared_action() {
        let p = params3();
        let (_, c, _) = generators(&p);
        // C^2 x = -1/(x-1); at x = 3 the value is -1/2.
        let c2 = c.compose(&c);
        assert!((c2.apply_f(3.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn conj_by_r_identities() {
        for n in 3..=8 {
            let p = group_params(n).unwrap();
            let (a, c, r) = generators(&p);
            // R A R^-1 = C^-1 A C projectively.
            let lhs = a.conj_by_r();
            let rhs = c.inverse().unwrap().compose(&a).compose(&c);
            assert!(lhs.proj_eq(&rhs));
            // A and CR commute.
            let cr = c.compose(&r);
            assert!(a.compose(&cr).proj_eq(&cr.compose(&a)));
            // conj_by_r agrees with explicit conjugation.
            let direct = r.compose(&a).compose(&r.inverse().unwrap());
            assert!(lhs.proj_eq(&direct));
        }
        assert!(Mobius::IDENTITY.conj_by_r().is_identity());
    }

    #[test]
    fn reversal_of_single_letter() {
        // (R A^p C R^-1)^-1 (-x) = -(A^p C x), here p = 1, x = 0.28, n = 3.
        let p = params3();
        let (a, c, _) = generators(&p);
        let m = a.compose(&c);
        let x = 0.28;
        let lhs = m.conj_by_r().inverse().unwrap().apply_f(-x);
        assert!((lhs + m.apply_f(x)).abs() < 1e-12);
    }

    #[test]
    fn fixed_points_examples() {
        let p = params3();
        let (a, c, _) = generators(&p);
        // A fixes only infinity.
        assert!(fixed_points(&a).is_empty());
        // A^2 C fixes r0(zeta_{1,1}) = (5 - sqrt 21)/2 as its repelling point.
        let m = a.compose(&a).compose(&c);
        let fps = fixed_points(&m);
        let want = (5.0 - 21f64.sqrt()) / 2.0;
        let rep = fps.iter().find(|f| f.kind == FixedKind::Repelling).unwrap();
        assert!((rep.x - want).abs() < 1e-12);
        for f in &fps {
            let res = (m.apply_f(f.x) - f.x).abs();
            assert!(res < FIXED_POINT_TOL * (1.0 + f.x.abs()));
        }
    }

    #[test]
    fn elliptic_has_no_real_fixed_point() {
        let p = params3();
        let (a, c, _) = generators(&p);
        let b = a.inverse().unwrap().compose(&c); // order n, elliptic
        assert!(fixed_points(&b).is_empty());
    }
}
