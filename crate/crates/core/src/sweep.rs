//! Iterative sweep approximation of the domain for parameters without a
//! certified matching interval.
//!
//! Starting from the explicit seed region (one shape for the small regime,
//! another for the large one), forward images are accumulated until one pass
//! adds less than the requested mass. The sweep stays inside the true domain
//! throughout: images of covered sets are covered, and after each pass the
//! cover is closed up fiberwise, using the fact that the fibers of the true
//! domain are intervals (asserted at tolerance, as is everything here).
//! Images of cylinders narrower than the width cutoff are dropped and
//! accounted into the reported residual.

use crate::domain::{Domain, DomainKind, Part, Rect, RECORD_VERSION};
use crate::error::{Error, Result};
use crate::geom::{self, diff_rects, merge_x, mu_box, Box2};
use crate::interval::{landmarks, Digit, IntervalSpec};

/// Sweep configuration.
#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub max_iter: usize,
    /// Stop when one pass adds less than this mass.
    pub mass_tol: f64,
    /// Relative cylinder-width cutoff when splitting a piece at cylinder
    /// boundaries; narrower remainders are dropped into the residual.
    pub w_min_rel: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { max_iter: 160, mass_tol: 1e-8, w_min_rel: 1e-6 }
    }
}

/// The seed region: `Z` below `gamma_n`, `W` above.
pub fn seed_region(spec: &IntervalSpec) -> Result<Vec<Box2>> {
    let (gamma, _) = landmarks(&spec.params)?;
    if spec.alpha < gamma {
        seed_z(spec)
    } else {
        seed_w(spec)
    }
}

/// Small-regime seed
/// `Z = [l0, lam_{-3}) x Phi^-  u  [lam_{-3}, rho_{k+2}) x Phi  u  [rho_{k+2}, r0) x Phi^+`
/// with `Phi = [-r0, -l0]`, `Phi^- = [-r0, -lam_{-3}]`, `Phi^+ = [-rho_{k+2}, -l0]`.
pub fn seed_z(spec: &IntervalSpec) -> Result<Vec<Box2>> {
    let k = spec.digit(spec.r0)?.k;
    let lam_m3 = spec
        .cylinder_bounds(&Digit::new(-3, 1))
        .ok_or_else(|| Error::Construction("cylinder (-3,1) is empty".into()))?
        .lambda;
    let rho_k2 = spec
        .cylinder_bounds(&Digit::new(k + 2, 1))
        .ok_or_else(|| Error::Construction("cylinder (k+2,1) is empty".into()))?
        .rho;
    Ok(vec![
        Box2::new(spec.ell0, lam_m3, -spec.r0, -lam_m3),
        Box2::new(lam_m3, rho_k2, -spec.r0, -spec.ell0),
        Box2::new(rho_k2, spec.r0, -rho_k2, -spec.ell0),
    ])
}

/// Large-regime seed with the five fibers
/// `Phi_1 = [-b, -mu_{-k-1,1}]`, `Phi_2 = [-b, -mu_{-k,1}]`, `Phi_3 = [-b, -l0]`,
/// `Phi_4 = [-C r0, -l0]`, `Phi_5 = [-rho_{2,1}, -l0]`.
pub fn seed_w(spec: &IntervalSpec) -> Result<Vec<Box2>> {
    let b = spec.frak_b();
    let k = -spec.digit(spec.ell0)?.k;
    if k < 1 {
        return Err(Error::Construction("large-regime seed requires a negative first digit".into()));
    }
    let (a, c, _) = crate::mobius::generators(&spec.params);
    // mu_{-d,1} = (A^-d C)^-1 frak b
    let mu = |d: i64| {
        a.pow(-d)
            .expect("A invertible")
            .compose(&c)
            .inverse()
            .expect("invertible")
            .apply_f(b)
    };
    let ell1 = spec.step(spec.ell0)?;
    let lam_km2 = spec
        .cylinder_bounds(&Digit::new(-k - 2, 1))
        .ok_or_else(|| Error::Construction("cylinder (-k-2,1) is empty".into()))?
        .lambda;
    let rho_21 = spec
        .cylinder_bounds(&Digit::new(2, 1))
        .ok_or_else(|| Error::Construction("cylinder (2,1) is empty".into()))?
        .rho;
    let rho_22 = spec
        .cylinder_bounds(&Digit::new(2, 2))
        .ok_or_else(|| Error::Construction("cylinder (2,2) is empty".into()))?
        .rho;
    let c_r0 = (spec.r0 - 1.0) / spec.r0;
    if !(ell1 < lam_km2 && lam_km2 < rho_21) {
        return Err(Error::Construction(
            "seed W is defined only where l1 precedes the (-k-2,1) cylinder".into(),
        ));
    }
    Ok(vec![
        Box2::new(spec.ell0, ell1, -b, -mu(k + 1)),
        Box2::new(ell1, lam_km2, -b, -mu(k)),
        Box2::new(lam_km2, rho_21, -b, -spec.ell0),
        Box2::new(rho_21, rho_22, -c_r0, -spec.ell0),
        Box2::new(rho_22, spec.r0, -rho_21, -spec.ell0),
    ])
}

/// Map one box forward, splitting its x-range at cylinder boundaries.
/// Remainder strips narrower than `w_min` are dropped into `dropped`.
pub(crate) fn map_box(
    spec: &IntervalSpec,
    bx: &Box2,
    w_min: f64,
    out: &mut Vec<Box2>,
    dropped: &mut f64,
) -> Result<()> {
    let mut x = bx.x1;
    let t = spec.t();
    let tiny = 1e-14 * t;
    while x < bx.x2 - tiny {
        let probe = (x + 0.25 * w_min).min(0.5 * (x + bx.x2));
        let cb = spec
            .digit(probe)
            .ok()
            .and_then(|d| spec.cylinder_bounds(&d).map(|cb| (d, cb)));
        let (d, cb) = match cb {
            Some((d, cb)) if cb.rho > x + tiny => (d, cb),
            _ => {
                // unresolvable sliver at an accumulation point
                let hop = (x + w_min).min(bx.x2);
                *dropped += mu_box(&Box2::new(x, hop, bx.y1, bx.y2))?.abs();
                x = hop;
                continue;
            }
        };
        // a hop may have landed inside an earlier, thinner cylinder; the gap
        // up to this cylinder's left endpoint must not be mapped with the
        // wrong branch
        let piece_x1 = if cb.lambda > x + tiny {
            *dropped += mu_box(&Box2::new(x, cb.lambda.min(bx.x2), bx.y1, bx.y2))?.abs();
            cb.lambda
        } else {
            x
        };
        let piece_x2 = cb.rho.min(bx.x2);
        if piece_x2 - piece_x1 < w_min {
            *dropped += mu_box(&Box2::new(piece_x1.min(piece_x2), piece_x2, bx.y1, bx.y2))?.abs();
            x = piece_x2.max(x + w_min).min(bx.x2);
            continue;
        }
        let m = d.matrix(&spec.params);
        let nm = m.conj_by_r();
        let d1 = nm.c * bx.y1 + nm.d;
        let d2 = nm.c * bx.y2 + nm.d;
        if d1.signum() != d2.signum() || d1.abs() < 1e-13 || d2.abs() < 1e-13 {
            return Err(Error::Pole(d1.min(d2)));
        }
        let (ix1, ix2) = (m.apply_f(piece_x1), m.apply_f(piece_x2));
        let (iy1, iy2) = (nm.apply_f(bx.y1), nm.apply_f(bx.y2));
        let bx_img = Box2::new(ix1.min(ix2), ix1.max(ix2), iy1.min(iy2), iy1.max(iy2));
        // numerical guard: a branch applied at its cylinder edge may
        // overshoot the interval by rounding; clip to the interval
        let clipped = Box2::new(
            bx_img.x1.max(spec.ell0),
            bx_img.x2.min(spec.r0),
            bx_img.y1,
            bx_img.y2,
        );
        if clipped.width() > 0.0 {
            out.push(clipped);
        }
        x = piece_x2;
    }
    Ok(())
}

/// Close the cover up fiberwise: on each slab the y-intervals are replaced by
/// their hull. Sound because the fibers of the true domain are intervals and
/// the cover sits inside the true domain.
fn fiber_hull(cover: &[Box2], snap: f64) -> Vec<Box2> {
    let mut xs: Vec<f64> = Vec::with_capacity(cover.len() * 2);
    for b in cover {
        xs.push(b.x1);
        xs.push(b.x2);
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup_by(|a, b| (*a - *b).abs() <= snap);
    let mut out = Vec::new();
    for w in xs.windows(2) {
        let (xa, xb) = (w[0], w[1]);
        if xb - xa <= snap {
            continue;
        }
        let xm = 0.5 * (xa + xb);
        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        for b in cover {
            if b.x1 <= xm && xm < b.x2 {
                lo = lo.min(b.y1);
                hi = hi.max(b.y2);
            }
        }
        if lo < hi {
            out.push(Box2::new(xa, xb, lo, hi));
        }
    }
    merge_x(out, snap)
}

/// Sweep the forward images of the seed until one pass adds less than
/// `opts.mass_tol`; returns the accumulated cover as a domain of kind
/// `Sweep` with `residual_mass` set to the last addition plus dropped mass.
pub fn build_sweep(spec: &IntervalSpec, opts: &SweepOptions) -> Result<Domain> {
    let t = spec.t();
    let snap = geom::SNAP_REL * t;
    let w_min = opts.w_min_rel * t;
    let seed = seed_region(spec)?;
    let mut cover: Vec<Box2> = Vec::new();
    let mut frontier: Vec<Box2> = seed.clone();
    let mut dropped = 0.0f64;
    let mut last_added = f64::INFINITY;
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let mut images: Vec<Box2> = Vec::new();
        for bx in &frontier {
            map_box(spec, bx, w_min, &mut images, &mut dropped)?;
        }
        let fresh = diff_rects(&images, &cover, snap);
        last_added = fresh
            .iter()
            .map(|b| mu_box(b).map(f64::abs).unwrap_or(0.0))
            .sum();
        cover.extend(fresh.iter().cloned());
        cover = fiber_hull(&cover, snap);
        if last_added < opts.mass_tol {
            converged = true;
            break;
        }
        // everything newly covered (including hull fill-in) feeds the next pass
        frontier = fresh;
    }
    if cover.is_empty() {
        return Err(Error::Construction("sweep produced an empty cover".into()));
    }
    let residual = if converged {
        dropped + last_added
    } else {
        f64::INFINITY // approximate-with-warning, never silent
    };
    build_domain_from_cover(spec, cover, residual, snap)
}

fn build_domain_from_cover(
    spec: &IntervalSpec,
    cover: Vec<Box2>,
    residual: f64,
    snap: f64,
) -> Result<Domain> {
    // split every box at y = 0 into the two parts
    let mut upper: Vec<Rect> = Vec::new();
    let mut lower: Vec<Rect> = Vec::new();
    for b in cover {
        if b.y2 > snap {
            upper.push(Rect {
                x1: b.x1,
                x2: b.x2,
                y1: 0.0,
                y2: b.y2,
                part: Part::Upper,
                provenance: "sweep".into(),
            });
        }
        if b.y1 < -snap {
            lower.push(Rect {
                x1: b.x1,
                x2: b.x2,
                y1: b.y1,
                y2: 0.0,
                part: Part::Lower,
                provenance: "sweep".into(),
            });
        }
    }
    upper.sort_by(|a, b| a.x1.partial_cmp(&b.x1).unwrap());
    lower.sort_by(|a, b| a.x1.partial_cmp(&b.x1).unwrap());
    Ok(Domain {
        version: RECORD_VERSION,
        n: spec.params.n,
        alpha: spec.alpha,
        kind: DomainKind::Sweep,
        upper,
        lower,
        residual_mass: Some(residual),
    })
}

/// Mass by which two domain approximations differ (symmetric difference).
pub fn missing_mass(sweep: &Domain, reference: &Domain) -> Result<f64> {
    let t = sweep.spec().t();
    geom::sym_diff_mass(&sweep.boxes(), &reference.boxes(), geom::SNAP_REL * t)
}
