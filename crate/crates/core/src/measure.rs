//! Invariant mass, the return-time function, the Rohlin entropy integral and
//! the entropy-times-mass volume identity.
//!
//! The invariant measure is `d mu = dx dy / (1 + xy)^2`; the mass of an
//! axis-aligned rectangle has the closed form of [`crate::geom::mu_box`].
//! The return-time weight is `tau(x) = -2 log |x|` on the `l = 1` region and
//! `-2 log |x - 1|` on the `l = 2` region, and the inner `y`-integral of the
//! density is analytic, so the entropy integral reduces to adaptive 1-d
//! quadrature of `tau(x)` against a rational weight.

use crate::domain::{Domain, Rect};
use crate::error::{Error, Result};
use crate::geom::{mu_box, Box2};
use crate::interval::IntervalSpec;
use crate::quad::integrate;
use crate::sync::SyncInterval;

/// Default absolute tolerance for one domain's entropy integral.
pub const QUAD_TOL: f64 = 1e-10;

/// Panel budget per rectangle.
pub const MAX_PANELS: usize = 60_000;

/// Mass of one rectangle: `log((1+x1y1)(1+x2y2)/((1+x1y2)(1+x2y1)))`.
pub fn mu_rect(r: &Rect) -> Result<f64> {
    mu_box(&r.to_box())
}

/// Mass of a domain with per-rectangle breakdown.
#[derive(Debug, Clone)]
pub struct MassResult {
    pub mass: f64,
    pub breakdown: Vec<f64>,
}

pub fn mu_domain(domain: &Domain) -> Result<MassResult> {
    let breakdown = domain.mass_breakdown()?;
    Ok(MassResult { mass: breakdown.iter().sum(), breakdown })
}

/// The return-time weight `tau_alpha(x) = -2 log |c x + d|` of the branch
/// at `x`; errors at the branch poles.
pub fn tau(spec: &IntervalSpec, x: f64) -> Result<f64> {
    let s = if x < spec.frak_b() { x } else { x - 1.0 };
    if s == 0.0 {
        return Err(Error::SingularPoint(x));
    }
    Ok(-2.0 * s.abs().ln())
}

/// Result of the Rohlin entropy integral over a domain.
#[derive(Debug, Clone, Copy)]
pub struct EntropyResult {
    /// `integral of tau d mu` over the domain.
    pub integral: f64,
    /// Domain mass (may be infinite for the parameter endpoints).
    pub mass: f64,
    /// `integral / mass`.
    pub entropy: f64,
    pub quad_error: f64,
}

/// Integrate `tau` with respect to `mu` over the domain.
///
/// On each rectangle the inner integral is
/// `int_{y1}^{y2} dy/(1+xy)^2 = (y2 - y1)/((1 + x y1)(1 + x y2))`,
/// leaving an adaptive 1-d integral with log singularities at `x = 0`,
/// `x = 1` and a kink at `frak b`.
pub fn rohlin_integral(domain: &Domain) -> Result<EntropyResult> {
    let spec = domain.spec();
    let b = spec.frak_b();
    let rects: Vec<Box2> = domain.boxes();
    let mut total = 0.0;
    let mut err = 0.0;
    let tol = QUAD_TOL / rects.len().max(1) as f64;
    for r in &rects {
        let (y1, y2) = (r.y1, r.y2);
        let f = move |x: f64| {
            let tau_x = if x < b {
                -2.0 * x.abs().ln()
            } else {
                -2.0 * (x - 1.0).abs().ln()
            };
            tau_x * (y2 - y1) / ((1.0 + x * y1) * (1.0 + x * y2))
        };
        let q = integrate(&f, r.x1, r.x2, &[0.0, 1.0, b], tol, MAX_PANELS)?;
        total += q.value;
        err += q.error;
    }
    let mass = match mu_domain(domain) {
        Ok(m) => m.mass,
        Err(Error::InfiniteMass) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let entropy = if mass.is_finite() { total / mass } else { 0.0 };
    Ok(EntropyResult { integral: total, mass, entropy, quad_error: err })
}

/// Volume of the unit tangent bundle of the orbifold of the index-`n` group:
/// `2 (2n - 3) pi^2 / (3 n)`.
pub fn vol_n(n: i64) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidIndex(n));
    }
    let nf = n as f64;
    Ok(2.0 * (2.0 * nf - 3.0) * std::f64::consts::PI.powi(2) / (3.0 * nf))
}

/// Residual of the volume identity for one domain.
#[derive(Debug, Clone, Copy)]
pub struct ConjectureReport {
    pub integral: f64,
    pub vol: f64,
    pub residual: f64,
    pub quad_error: f64,
}

pub fn verify_conjecture(domain: &Domain) -> Result<ConjectureReport> {
    let er = rohlin_integral(domain)?;
    let vol = vol_n(domain.n as i64)?;
    Ok(ConjectureReport {
        integral: er.integral,
        vol,
        residual: er.integral - vol,
        quad_error: er.quad_error,
    })
}

/// Mass of the part of the domain over the x-strip `[a, b]`, normalized by
/// the domain mass: the `nu_alpha`-measure of the strip.
pub fn nu_strip(domain: &Domain, a: f64, b: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let total = mu_domain(domain)?.mass;
    let mut strip = 0.0;
    for r in domain.all_rects() {
        let x1 = r.x1.max(a);
        let x2 = r.x2.min(b);
        if x2 > x1 {
            strip += mu_box(&Box2::new(x1, x2, r.y1, r.y2))?;
        }
    }
    Ok(strip / total)
}

/// Predicted entropy of a close neighbor `alpha' < alpha` in the same
/// matching interval, given `h(T_alpha)`.
///
/// Small regime: `h' = h / (1 + (S - Sbar) nu([r0', r0]))`; the large regime
/// subtracts `nu([b', b])`, and the right portion of a large interval uses
/// the factor `1 + S - Sbar` on the `r0`-strip.
pub fn neighbor_entropy(
    iv: &SyncInterval,
    domain: &Domain,
    alpha: f64,
    alpha_prime: f64,
    h_alpha: f64,
) -> Result<f64> {
    if !(alpha_prime < alpha) {
        return Err(Error::Precondition("neighbor formulas assume alpha' < alpha".into()));
    }
    check_close_neighbors(iv, alpha, alpha_prime)?;
    let params = crate::mobius::group_params(iv.n as i64)?;
    let spec = IntervalSpec::from_params(params, alpha);
    let spec_p = IntervalSpec::from_params(params, alpha_prime);
    let su = iv.s_under as f64;
    let sb = iv.s_bar as f64;
    let nu_r = nu_strip(domain, spec_p.r0, spec.r0)?;
    let factor = if iv.is_small() {
        1.0 + (su - sb) * nu_r
    } else {
        let delta = iv.delta.expect("large interval has delta");
        let nu_b = nu_strip(domain, spec_p.frak_b(), spec.frak_b())?;
        if alpha < delta {
            1.0 + (su - sb) * nu_r - nu_b
        } else if alpha_prime > delta {
            1.0 + (1.0 + su - sb) * nu_r - nu_b
        } else {
            return Err(Error::Precondition(
                "alpha and alpha' must lie in the same portion of the interval".into(),
            ));
        }
    };
    Ok(h_alpha / factor)
}

/// Close-neighbor condition: the matched orbit points of both parameters stay
/// inside the intersection of the two definition intervals.
fn check_close_neighbors(iv: &SyncInterval, alpha: f64, alpha_prime: f64) -> Result<()> {
    if !iv.contains(alpha) || !iv.contains(alpha_prime) {
        return Err(Error::Precondition("both parameters must lie in the interval".into()));
    }
    let params = crate::mobius::group_params(iv.n as i64)?;
    let e_l = iv.s_under + 1;
    let e_r = if iv.is_small() || alpha < iv.delta.unwrap_or(f64::INFINITY) {
        iv.s_bar + 1
    } else {
        iv.s_bar + 2
    };
    let sa = IntervalSpec::from_params(params, alpha);
    let sp = IntervalSpec::from_params(params, alpha_prime);
    let lo = sa.ell0.max(sp.ell0);
    let hi = sa.r0.min(sp.r0);
    for spec in [&sa, &sp] {
        let lorb = spec.orbit(spec.ell0, e_l)?;
        let rorb = spec.orbit(spec.r0, e_r)?;
        for p in lorb.points.iter().skip(1).chain(rorb.points.iter().skip(1)) {
            if !(*p >= lo && *p <= hi) {
                return Err(Error::Precondition(format!(
                    "not close neighbors: orbit point {p} escapes the common interval"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_alpha_one, build_large, build_small_interior, build_on_interval};
    use crate::mobius::group_params;
    use crate::quad::gk15;
    use crate::sync::{solve_large, solve_small};
    use crate::words::Word;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    /// Independent 2-d quadrature oracle for the rectangle mass: nested
    /// adaptive Gauss-Kronrod of the raw density, no closed form involved.
    fn mu_quadrature_oracle(b: &Box2) -> f64 {
        let inner = |x: f64| {
            let f = |y: f64| {
                let d = 1.0 + x * y;
                1.0 / (d * d)
            };
            // adaptive-ish: fixed splits suffice for smooth positive density
            let mut tot = 0.0;
            let parts = 8;
            for i in 0..parts {
                let ya = b.y1 + (b.y2 - b.y1) * i as f64 / parts as f64;
                let yb = b.y1 + (b.y2 - b.y1) * (i + 1) as f64 / parts as f64;
                tot += gk15(&f, ya, yb).0;
            }
            tot
        };
        integrate(&inner, b.x1, b.x2, &[], 1e-12, 4000).unwrap().value
    }

    #[test]
    fn mu_rect_unit_square_is_ln2() {
        let r = Rect {
            x1: 0.0,
            x2: 1.0,
            y1: 0.0,
            y2: 1.0,
            part: crate::domain::Part::Upper,
            provenance: String::new(),
        };
        assert!((mu_rect(&r).unwrap() - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn closed_form_matches_quadrature_oracle() {
        // golden-ratio rectangle from the delta example: mass 2 ln G.
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let bx = Box2::new(-g, g, -g * g, g * g);
        let cf = mu_box(&bx).unwrap();
        assert!((cf - 2.0 * (g + 1.0).ln()).abs() < 1e-14);
        assert!((cf - mu_quadrature_oracle(&bx)).abs() < 1e-10);
        // random admissible rectangles
        let mut state = 0x1234_5678_9abc_def0u64;
        let mut rnd = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..25 {
            let x1 = -1.5 + 2.0 * rnd();
            let x2 = x1 + 0.05 + rnd();
            let y1 = -1.5 + 2.0 * rnd();
            let y2 = y1 + 0.05 + rnd();
            let bx = Box2::new(x1, x2, y1, y2);
            match mu_box(&bx) {
                Ok(cf) => {
                    let or = mu_quadrature_oracle(&bx);
                    assert!((cf - or).abs() < 1e-9, "{cf} vs {or}");
                }
                Err(_) => continue, // pole inside; oracle not applicable
            }
        }
    }

    #[test]
    fn mass_of_canonical_domains() {
        // frozen from an independent high-precision construction
        let p = group_params(3).unwrap();
        let iv = solve_small(&p, 1, &w("1")).unwrap();
        let dom = build_small_interior(&iv, 0.14).unwrap();
        assert!((mu_domain(&dom).unwrap().mass - 3.30023310315433).abs() < 1e-16 + 1e-12);
        let ivl = solve_large(&p, 2, &w("1")).unwrap();
        let d86 = build_large(&ivl, 0.86).unwrap();
        assert!((mu_domain(&d86).unwrap().mass - 2.21370903839939).abs() < 1e-12);
        let d87 = build_large(&ivl, 0.87).unwrap();
        assert!((mu_domain(&d87).unwrap().mass - 2.25932817170134).abs() < 1e-12);
        // delta domain: 4 ln G
        let iv1 = solve_large(&p, 1, &w("1")).unwrap();
        let dd = build_large(&iv1, iv1.delta.unwrap()).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((mu_domain(&dd).unwrap().mass - 4.0 * golden.ln()).abs() < 1e-12);
    }

    #[test]
    fn mass_continuity_nearby() {
        let p = group_params(3).unwrap();
        let iv = solve_small(&p, 1, &w("1")).unwrap();
        let m1 = mu_domain(&build_small_interior(&iv, 0.14).unwrap()).unwrap().mass;
        let m2 = mu_domain(&build_small_interior(&iv, 0.1405).unwrap()).unwrap().mass;
        assert!((m1 - m2).abs() < 0.01);
    }

    #[test]
    fn tau_values() {
        let spec = IntervalSpec::new(3, 1.0).unwrap();
        assert!((tau(&spec, 0.5).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!((tau(&spec, 1.5).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!(tau(&spec, 0.0).is_err());
        // |x| = 1 on an l = 1 branch gives tau = 0
        let spec = IntervalSpec::new(3, 0.55).unwrap();
        assert!(tau(&spec, -1.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn rohlin_integral_alpha_one() {
        let dom = build_alpha_one(3).unwrap();
        let er = rohlin_integral(&dom).unwrap();
        let want = 2.0 * std::f64::consts::PI.powi(2) / 3.0;
        assert!((er.integral - want).abs() < 1e-8, "{} vs {want}", er.integral);
        assert!(er.mass.is_infinite());
    }

    #[test]
    fn volume_identity_on_sample_domains() {
        let p = group_params(3).unwrap();
        let vol3 = vol_n(3).unwrap();
        let iv = solve_small(&p, 1, &w("1")).unwrap();
        for alpha in [0.12, 0.14, iv.zeta, iv.eta] {
            let dom = build_on_interval(&iv, alpha).unwrap();
            let er = rohlin_integral(&dom).unwrap();
            assert!(
                (er.integral - vol3).abs() < 1e-7,
                "alpha = {alpha}: {} vs {vol3}",
                er.integral
            );
            assert!(er.entropy > 0.0);
            // entropy * mass = integral by construction
            assert!((er.entropy * er.mass - er.integral).abs() < 1e-12 * er.integral.abs());
        }
    }

    #[test]
    fn vol_n_values() {
        assert!((vol_n(3).unwrap() - 6.5797362673929066).abs() < 1e-13);
        assert!((vol_n(4).unwrap() - 2.0 * 5.0 * std::f64::consts::PI.powi(2) / 12.0).abs() < 1e-13);
        assert!(vol_n(2).is_err());
    }

    #[test]
    fn neighbor_entropy_cross_check() {
        let p = group_params(3).unwrap();
        let iv = solve_small(&p, 1, &w("1")).unwrap();
        let alpha = 0.14;
        let alpha_p = 0.135;
        let dom = build_small_interior(&iv, alpha).unwrap();
        let h = rohlin_integral(&dom).unwrap().entropy;
        let predicted = neighbor_entropy(&iv, &dom, alpha, alpha_p, h).unwrap();
        let dom_p = build_small_interior(&iv, alpha_p).unwrap();
        let h_p = rohlin_integral(&dom_p).unwrap().entropy;
        assert!(
            (predicted - h_p).abs() < 1e-4,
            "predicted {predicted} vs computed {h_p}"
        );
        // vanishing strip: ratio tends to 1
        let near = neighbor_entropy(&iv, &dom, alpha, alpha - 1e-9, h).unwrap();
        assert!((near - h).abs() < 1e-6);
        // monotonicity: Sunder > Sbar so entropy increases with alpha'
        let lo = neighbor_entropy(&iv, &dom, alpha, 0.13, h).unwrap();
        let hi = neighbor_entropy(&iv, &dom, alpha, 0.135, h).unwrap();
        assert!(lo < hi && hi < h);
    }

    #[test]
    fn neighbor_entropy_rejects_far_pairs() {
        let p = group_params(3).unwrap();
        let iv = solve_small(&p, 1, &w("1")).unwrap();
        let dom = build_small_interior(&iv, 0.14).unwrap();
        assert!(neighbor_entropy(&iv, &dom, 0.14, 0.5, 3.0).is_err());
    }
}
