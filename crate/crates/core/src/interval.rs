//! The interval maps `T_{n,alpha}`, digit computation, endpoint orbits,
//! cylinders and the parameter landmarks `gamma_n`, `epsilon_n`.
//!
//! `T` acts on `I_alpha = [l0, r0)` with `l0 = (alpha - 1) t`, `r0 = alpha t`
//! by `x -> A^k C^l x`, where `l` in `{1, 2}` is minimal with `C^l x` outside
//! the interval and `k` is the unique integer bringing the point back in.

use crate::error::{Error, Result};
use crate::mobius::{generators, group_params, GroupParams, Mobius};
use serde::{Deserialize, Serialize};

/// Relative tie tolerance: points within `BOUNDARY_TOL * t` of a cylinder
/// boundary are snapped to the right-hand cylinder.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Default orbit cap when no synchronization data is available.
pub const DEFAULT_ORBIT_CAP: usize = 512;

/// An alpha-digit `(k, l)`: the exponents with `T(x) = A^k C^l x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Digit {
    pub k: i64,
    pub l: u8,
}

impl Digit {
    pub fn new(k: i64, l: u8) -> Self {
        debug_assert!(l == 1 || l == 2);
        Digit { k, l }
    }

    /// The matrix `A^k C^l`.
    pub fn matrix(&self, params: &GroupParams) -> Mobius {
        let (a, c, _) = generators(params);
        let mut m = c;
        if self.l == 2 {
            m = c.compose(&c);
        }
        a.pow(self.k).expect("A is invertible").compose(&m)
    }
}

impl std::fmt::Display for Digit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.k, self.l)
    }
}

/// A fixed `(n, alpha)` pair together with the interval data.
#[derive(Debug, Clone, Copy)]
pub struct IntervalSpec {
    pub params: GroupParams,
    pub alpha: f64,
    pub ell0: f64,
    pub r0: f64,
}

impl IntervalSpec {
    pub fn new(n: i64, alpha: f64) -> Result<Self> {
        let params = group_params(n)?;
        Ok(Self::from_params(params, alpha))
    }

    pub fn from_params(params: GroupParams, alpha: f64) -> Self {
        IntervalSpec {
            params,
            alpha,
            ell0: (alpha - 1.0) * params.t,
            r0: alpha * params.t,
        }
    }

    pub fn t(&self) -> f64 {
        self.params.t
    }

    /// `frak b = C^-1 l0 = 1 / (1 - l0)`, the boundary between the
    /// `l = 1` and `l = 2` digit regions.
    pub fn frak_b(&self) -> f64 {
        1.0 / (1.0 - self.ell0)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.ell0 && x < self.r0
    }

    /// Membership in the closed interval, the domain of `T`.
    pub fn contains_closed(&self, x: f64) -> bool {
        x >= self.ell0 && x <= self.r0
    }

    fn snap_tol(&self) -> f64 {
        BOUNDARY_TOL * self.t()
    }

    /// The alpha-digit of `x` in the closed interval.
    pub fn digit(&self, x: f64) -> Result<Digit> {
        let tol = self.snap_tol();
        if !(x >= self.ell0 - tol && x <= self.r0 + tol) {
            return Err(Error::OutsideInterval { x, lo: self.ell0, hi: self.r0 });
        }
        let x = x.clamp(self.ell0, self.r0);
        let b = self.frak_b();
        // l = 1 exactly when C x leaves the interval, i.e. x < frak b.
        let l: u8 = if x < b - tol {
            1
        } else if x < b + tol {
            // boundary tie: frak b belongs to the l = 2 side
            2
        } else {
            2
        };
        let y = if l == 1 {
            // C x = (x - 1)/x, pole at 0
            if x.abs() < 1e-300 {
                return Err(Error::SingularPoint(x));
            }
            (x - 1.0) / x
        } else {
            // C^2 x = -1/(x - 1), pole at 1
            if (x - 1.0).abs() < 1e-300 {
                return Err(Error::SingularPoint(x));
            }
            -1.0 / (x - 1.0)
        };
        if !y.is_finite() {
            return Err(Error::SingularPoint(x));
        }
        let t = self.t();
        let mut k = ((self.r0 - y) / t).floor();
        // guard against rounding at cylinder edges
        while y + k * t >= self.r0 - tol {
            k -= 1.0;
        }
        while y + k * t < self.ell0 - tol {
            k += 1.0;
        }
        if y + k * t > self.r0 || y + k * t < self.ell0 - tol {
            return Err(Error::SingularPoint(x));
        }
        if k.abs() > 9e15 {
            return Err(Error::SingularPoint(x));
        }
        Ok(Digit::new(k as i64, l))
    }

    /// One step of `T`.
    pub fn step(&self, x: f64) -> Result<f64> {
        let d = self.digit(x)?;
        Ok(self.apply_digit(&d, x))
    }

    /// Apply the digit matrix `A^k C^l` without re-deriving the digit.
    pub fn apply_digit(&self, d: &Digit, x: f64) -> f64 {
        let t = self.t();
        let y = if d.l == 1 { (x - 1.0) / x } else { -1.0 / (x - 1.0) };
        y + d.k as f64 * t
    }

    /// `log |T'(x)|` data: the derivative of the branch at `x` is
    /// `1/x^2` for `l = 1` and `1/(x-1)^2` for `l = 2`.
    pub fn branch_deriv(&self, x: f64) -> f64 {
        if x < self.frak_b() {
            1.0 / (x * x)
        } else {
            let d = x - 1.0;
            1.0 / (d * d)
        }
    }

    pub fn orbit(&self, x: f64, nmax: usize) -> Result<OrbitRecord> {
        let mut points = Vec::with_capacity(nmax + 1);
        let mut digits = Vec::with_capacity(nmax);
        points.push(x);
        let mut truncated = false;
        for _ in 0..nmax {
            let cur = *points.last().unwrap();
            match self.digit(cur) {
                Ok(d) => {
                    points.push(self.apply_digit(&d, cur));
                    digits.push(d);
                }
                Err(Error::SingularPoint(_)) => {
                    truncated = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(OrbitRecord { start: x, points, digits, truncated })
    }
}

/// A finite forward orbit with its digits.
#[derive(Debug, Clone)]
pub struct OrbitRecord {
    pub start: f64,
    /// `points[0] = start`, `points[i+1] = T(points[i])`.
    pub points: Vec<f64>,
    pub digits: Vec<Digit>,
    /// Set when the orbit hit a singular point before `nmax` steps.
    pub truncated: bool,
}

/// The landmarks `gamma_n` (where `frak b = r0`) and `epsilon_n`
/// (where `A^-1 C l0 = r0`), each solved from its defining quadratic.
pub fn landmarks(params: &GroupParams) -> Result<(f64, f64)> {
    let t = params.t;
    // frak b = r0:  1/(1 - (a-1)t) = a t, i.e. t^2 a^2 - (t + t^2) a + 1 = 0.
    let gamma = quadratic_root_in_unit(t * t, -(t + t * t), 1.0)?;
    // A^-1 C l0 = r0 with l0 = (a-1)t, r0 = a t:
    // ((t-1) l0 + 1)/(-l0) = r0  =>  t^2 a^2 - (t^2 - ... expand directly:
    // (t-1)(a-1)t + 1 = -(a-1)t * a t
    // => t^2 a^2 + (t^2 - t - t^2) ... solve numerically from coefficients:
    // t^2 a^2 - t^2 a + (t-1) t a - (t-1) t + 1 = 0
    let ca = t * t;
    let cb = -t * t + (t - 1.0) * t;
    let cc = -(t - 1.0) * t + 1.0;
    let epsilon = quadratic_root_in_unit(ca, cb, cc)?;
    if gamma >= epsilon {
        return Err(Error::Construction(format!(
            "landmark order violated: gamma = {gamma}, epsilon = {epsilon}"
        )));
    }
    Ok((gamma, epsilon))
}

fn quadratic_root_in_unit(a: f64, b: f64, c: f64) -> Result<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Err(Error::Construction("quadratic has no real root".into()));
    }
    let s = disc.sqrt();
    // numerically stable pair
    let q = -0.5 * (b + b.signum() * s);
    let roots = [q / a, c / q];
    roots
        .into_iter()
        .find(|r| *r > 0.0 && *r < 1.0)
        .ok_or_else(|| Error::Construction("no quadratic root in (0,1)".into()))
}

/// Endpoints of the cylinder of digit `d`, as `[lambda, rho)`, clipped to the
/// interval; `full` means the branch maps the cylinder onto all of `I_alpha`.
#[derive(Debug, Clone, Copy)]
pub struct CylinderBounds {
    pub lambda: f64,
    pub rho: f64,
    pub full: bool,
}

impl IntervalSpec {
    /// `Delta_alpha(k, l)` or `None` when the cylinder is empty.
    pub fn cylinder_bounds(&self, d: &Digit) -> Option<CylinderBounds> {
        let t = self.t();
        let b = self.frak_b();
        let kf = d.k as f64;
        // Pull back [l0 - k t, r0 - k t) through C^l; both branch inverses are
        // increasing away from their pole.
        let lo = self.ell0 - kf * t;
        let hi = self.r0 - kf * t;
        let (pole, inv, strip_lo, strip_hi): (f64, fn(f64) -> f64, f64, f64) = if d.l == 1 {
            (1.0, |y| 1.0 / (1.0 - y), self.ell0, b)
        } else {
            (0.0, |y| (y - 1.0) / y, b, self.r0)
        };
        let tol = self.snap_tol();
        // Candidate preimage pieces: a single interval, or two rays when the
        // pole lies inside [lo, hi). A ray end of None means "came from the
        // strip boundary", which makes the cylinder non-full on that side.
        let pieces: Vec<(Option<f64>, Option<f64>)> = if lo < pole && pole <= hi {
            vec![(None, Some(inv(hi))), (Some(inv(lo)), None)]
        } else {
            vec![(Some(inv(lo)), Some(inv(hi)))]
        };
        let left_clip = strip_lo.max(self.ell0);
        let right_clip = strip_hi.min(self.r0);
        let mut best: Option<CylinderBounds> = None;
        for (raw_l, raw_r) in pieces {
            let lam_raw = raw_l.unwrap_or(f64::NEG_INFINITY);
            let rho_raw = raw_r.unwrap_or(f64::INFINITY);
            let full_left = raw_l.is_some() && lam_raw >= left_clip - tol;
            let full_right = raw_r.is_some() && rho_raw <= right_clip + tol;
            let lam = lam_raw.max(left_clip);
            let rho = rho_raw.min(right_clip);
            if rho - lam <= tol {
                continue;
            }
            let cb = CylinderBounds { lambda: lam, rho, full: full_left && full_right };
            best = Some(match best {
                Some(prev) if prev.rho - prev.lambda >= rho - lam => prev,
                _ => cb,
            });
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digit_small_alpha_right_end() {
        // n = 3, alpha = 0.14: digit of r0 = 0.28 is (1, 1).
        let spec = IntervalSpec::new(3, 0.14).unwrap();
        let d = spec.digit(0.28).unwrap();
        assert_eq!(d, Digit::new(1, 1));
        let x1 = spec.apply_digit(&d, 0.28);
        assert!((x1 + 0.5714285714285714).abs() < 1e-12);
    }

    #[test]
    fn digit_large_alpha_left_end() {
        // n = 3, alpha = 0.86: digit of l0 = -0.28 is (-2, 1).
        let spec = IntervalSpec::new(3, 0.86).unwrap();
        let d = spec.digit(-0.28).unwrap();
        assert_eq!(d, Digit::new(-2, 1));
        let x1 = spec.apply_digit(&d, -0.28);
        assert!((x1 - 0.5714285714285714).abs() < 1e-12);
    }

    #[test]
    fn digit_l2_when_c_keeps_x_inside() {
        let spec = IntervalSpec::new(3, 0.86).unwrap();
        // C maps 1.5 to 1/3, inside I; so l must be 2.
        let d = spec.digit(1.5).unwrap();
        assert_eq!(d.l, 2);
    }

    #[test]
    fn orbit_zeta11_matches_table() {
        let z = (5.0 - 21f64.sqrt()) / 4.0;
        let spec = IntervalSpec::new(3, z).unwrap();
        let orb = spec.orbit(spec.ell0, 5).unwrap();
        let s21 = 21f64.sqrt();
        let expect = [
            (1.0 - s21) / 2.0,
            (-9.0 + s21) / 10.0,
            (-9.0 + s21) / 6.0,
            (-21.0 + s21) / 10.0,
            (-21.0 + s21) / 42.0,
            (-9.0 + s21) / 10.0, // l5 = l1
        ];
        for (p, e) in orb.points.iter().zip(expect.iter()) {
            assert!((p - e).abs() < 1e-12, "{p} vs {e}");
        }
    }

    #[test]
    fn orbit_eta11_r_is_fixed_after_one_step() {
        let e = (-1.0 + 21f64.sqrt()) / 20.0;
        let spec = IntervalSpec::new(3, e).unwrap();
        let orb = spec.orbit(spec.r0, 4).unwrap();
        let r1 = (5.0 - 21f64.sqrt()) / 2.0;
        assert!((orb.points[1] - r1).abs() < 1e-12);
        // r1 is fixed by L_{1,1}; from here the orbit is constant.
        for w in orb.points[1..].windows(2) {
            assert!((w[0] - w[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn frak_b_values() {
        let p = group_params(3).unwrap();
        let (g3, _) = landmarks(&p).unwrap();
        let spec = IntervalSpec::new(3, g3).unwrap();
        assert!((spec.frak_b() - spec.r0).abs() < 1e-12);
        let spec = IntervalSpec::new(3, 1.0).unwrap();
        assert!((spec.frak_b() - 1.0).abs() < 1e-15);
        let spec = IntervalSpec::new(3, 0.86).unwrap();
        assert!((spec.frak_b() - 0.78125).abs() < 1e-15);
    }

    #[test]
    fn landmark_values_n3() {
        let p = group_params(3).unwrap();
        let (g, e) = landmarks(&p).unwrap();
        assert!((g - (3.0 - 5f64.sqrt()) / 4.0).abs() < 1e-14);
        assert!((e - (1.0 + 5f64.sqrt()) / 4.0).abs() < 1e-14);
        assert!(g < e);
        // at epsilon_n: A^-1 C l0 = r0
        let spec = IntervalSpec::from_params(p, e);
        let (a, c, _) = generators(&p);
        let m = a.inverse().unwrap().compose(&c);
        assert!((m.apply_f(spec.ell0) - spec.r0).abs() < 1e-12);
    }

    #[test]
    fn landmark_order_all_n() {
        for n in 3..=12 {
            let p = group_params(n).unwrap();
            let (g, e) = landmarks(&p).unwrap();
            assert!(0.0 < g && g < e && e < 1.0);
            // at gamma_n, frak b = r0
            let spec = IntervalSpec::from_params(p, g);
            assert!((spec.frak_b() - spec.r0).abs() < 1e-12);
        }
    }

    #[test]
    fn cylinder_bounds_examples() {
        // rho_{(1,1)} = frak b for alpha > gamma_n.
        let spec = IntervalSpec::new(3, 0.86).unwrap();
        let cb = spec.cylinder_bounds(&Digit::new(1, 1)).unwrap();
        assert!((cb.rho - spec.frak_b()).abs() < 1e-12);
        assert!(cb.full);
        // the cylinder containing r0 is right-truncated there
        let spec = IntervalSpec::new(3, 0.14).unwrap();
        let d = spec.digit(spec.r0).unwrap();
        let cb = spec.cylinder_bounds(&d).unwrap();
        assert!((cb.rho - spec.r0).abs() < 1e-12);
        assert!(!cb.full);
        // a middle cylinder is full and behaves as computed by hand
        let cb = spec.cylinder_bounds(&Digit::new(2, 1)).unwrap();
        assert!((cb.lambda - 1.0 / 6.72).abs() < 1e-12);
        assert!((cb.rho - 1.0 / 4.72).abs() < 1e-12);
        assert!(cb.full);
        // empty cylinder: (0, 1) never occurs
        assert!(spec.cylinder_bounds(&Digit::new(0, 1)).is_none());
    }

    #[test]
    fn full_cylinders_map_onto_interval() {
        for &(n, alpha) in &[(3i64, 0.14f64), (3, 0.86), (4, 0.3), (5, 0.5)] {
            let spec = IntervalSpec::new(n, alpha).unwrap();
            for k in -6..=6 {
                for l in [1u8, 2] {
                    if let Some(cb) = spec.cylinder_bounds(&Digit::new(k, l)) {
                        if !cb.full {
                            continue;
                        }
                        let d = Digit::new(k, l);
                        let lo = spec.apply_digit(&d, cb.lambda);
                        let hi = spec.apply_digit(&d, cb.rho);
                        assert!((lo - spec.ell0).abs() < 1e-9, "n={n} a={alpha} d={d}");
                        assert!((hi - spec.r0).abs() < 1e-9, "n={n} a={alpha} d={d}");
                    }
                }
            }
        }
    }

    #[test]
    fn forward_invariance_sampled() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for &(n, alpha) in &[(3i64, 0.14f64), (3, 0.5), (3, 0.86), (4, 0.7), (6, 0.2)] {
            let spec = IntervalSpec::new(n, alpha).unwrap();
            for _ in 0..2000 {
                let x = spec.ell0 + next() * (spec.r0 - spec.ell0);
                if let Ok(y) = spec.step(x) {
                    assert!(
                        y >= spec.ell0 - 1e-10 && y < spec.r0 + 1e-10,
                        "T({x}) = {y} escapes at n={n}, alpha={alpha}"
                    );
                }
            }
        }
    }

    #[test]
    fn small_alpha_digits_have_l1() {
        for n in [3i64, 4, 7] {
            let p = group_params(n).unwrap();
            let (g, _) = landmarks(&p).unwrap();
            let spec = IntervalSpec::from_params(p, g - 1e-4);
            let mut x = spec.ell0 + 1e-3;
            for _ in 0..200 {
                match spec.digit(x) {
                    Ok(d) => {
                        assert_eq!(d.l, 1);
                        x = spec.apply_digit(&d, x);
                    }
                    Err(_) => break,
                }
            }
        }
    }

    #[test]
    fn digit_rejects_outside_points() {
        let spec = IntervalSpec::new(3, 0.14).unwrap();
        assert!(matches!(
            spec.digit(5.0),
            Err(Error::OutsideInterval { .. })
        ));
    }

    #[test]
    fn order_compatibility_of_digit_sequences() {
        // x1 <= x2 iff digit sequences lexicographically ordered by cylinder
        // position (1/k within each l-class; l=1 before l=2), to depth 20.
        fn digit_key(d: &Digit) -> (u8, f64) {
            (d.l, 1.0 / d.k as f64)
        }
        let mut state = 0xdeadbeefcafef00du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for &(n, alpha) in &[(3i64, 0.14f64), (3, 0.86), (4, 0.4)] {
            let spec = IntervalSpec::new(n, alpha).unwrap();
            'pair: for _ in 0..300 {
                let mut x1 = spec.ell0 + next() * spec.t();
                let mut x2 = spec.ell0 + next() * spec.t();
                if x1 > x2 {
                    std::mem::swap(&mut x1, &mut x2);
                }
                if x2 >= spec.r0 {
                    continue;
                }
                for _ in 0..20 {
                    let (d1, d2) = match (spec.digit(x1), spec.digit(x2)) {
                        (Ok(a), Ok(b)) => (a, b),
                        _ => continue 'pair,
                    };
                    if d1 != d2 {
                        let (k1, k2) = (digit_key(&d1), digit_key(&d2));
                        assert!(
                            k1 < k2,
                            "order violated: {d1} !< {d2} for x1={x1}, x2={x2}"
                        );
                        continue 'pair;
                    }
                    x1 = spec.apply_digit(&d1, x1);
                    x2 = spec.apply_digit(&d2, x2);
                    if x1 > x2 {
                        // same branch is increasing; tiny rounding flips only
                        assert!(x1 - x2 < 1e-9);
                        continue 'pair;
                    }
                }
            }
        }
    }
}
