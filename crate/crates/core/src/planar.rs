//! The two-dimensional map on a domain, its block partition, and numerical
//! bijectivity certification.
//!
//! The planar map acts on `(x, y)` by `(M x, R M R^-1 y)` with `M` the digit
//! matrix at `x`; it preserves `d mu = dx dy/(1+xy)^2`. A domain is certified
//! by checking that block images tile it: mu-weighted sample points stay
//! inside, the image rectangles cover the domain with no overlap, and the
//! uncovered remainder is confined to the thin strip around `y = 0` that the
//! infinitely many outermost blocks fill in the limit.

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::geom::{self, covers_point, diff_rects, mu_box, Box2};
use crate::interval::{Digit, IntervalSpec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Denominator threshold treated as a pole of the conjugated action.
pub const POLE_TOL: f64 = 1e-13;

/// One application of the planar map.
pub fn planar_apply(spec: &IntervalSpec, x: f64, y: f64) -> Result<(f64, f64)> {
    let d = spec.digit(x)?;
    let m = d.matrix(&spec.params);
    let n = m.conj_by_r();
    let den = n.c * y + n.d;
    if den.abs() < POLE_TOL {
        return Err(Error::Pole(den));
    }
    Ok((m.apply_f(x), n.apply_f(y)))
}

/// The part of the domain fibering over one cylinder.
#[derive(Debug, Clone)]
pub struct Block {
    pub digit: Digit,
    pub region: Vec<Box2>,
    pub mass: f64,
}

/// Exactly accounted part of the domain left to the infinitely many
/// outermost cylinders of one family.
#[derive(Debug, Clone)]
pub struct TailRegion {
    /// x-range of the un-enumerated cylinders.
    pub x1: f64,
    pub x2: f64,
    pub mass: f64,
    /// Outer edge (largest |y|) of the images of the un-enumerated blocks,
    /// evaluated at the first skipped cylinder.
    pub image_edge: f64,
}

/// Block partition of a domain, tails accounted separately.
#[derive(Debug, Clone)]
pub struct BlockSet {
    pub blocks: Vec<Block>,
    pub tails: Vec<TailRegion>,
}

impl BlockSet {
    pub fn total_mass(&self) -> f64 {
        self.blocks.iter().map(|b| b.mass).sum::<f64>()
            + self.tails.iter().map(|t| t.mass).sum::<f64>()
    }
}

fn clip_domain_to_strip(domain_boxes: &[Box2], x1: f64, x2: f64) -> Vec<Box2> {
    let mut out = Vec::new();
    for b in domain_boxes {
        let a = b.x1.max(x1);
        let c = b.x2.min(x2);
        if c > a {
            out.push(Box2::new(a, c, b.y1, b.y2));
        }
    }
    out
}

/// Partition a domain into blocks, enumerating each cylinder family outward
/// until the cylinders are narrower than `w_min_rel * t`; the remainder near
/// each accumulation point becomes a [`TailRegion`].
pub fn partition_blocks(domain: &Domain, w_min_rel: f64) -> Result<BlockSet> {
    let spec = domain.spec();
    let t = spec.t();
    let w_min = w_min_rel * t;
    let boxes = domain.boxes();
    let large = spec.frak_b() < spec.r0 - 1e-12;
    let mut blocks: Vec<Block> = Vec::new();
    let mut tails: Vec<TailRegion> = Vec::new();
    let fiber_edge = |x1: f64, x2: f64| -> (f64, f64) {
        let mut lo = 0.0f64;
        let mut hi = 0.0f64;
        for b in &boxes {
            if b.x1 < x2 && b.x2 > x1 {
                lo = lo.min(b.y1);
                hi = hi.max(b.y2);
            }
        }
        (lo, hi)
    };

    // (l, starting k, step, accumulation point) per family
    let d_l0 = spec.digit(spec.ell0)?;
    let mut families: Vec<(u8, i64, i64, f64)> = Vec::new();
    families.push((1, d_l0.k, -1, 0.0));
    {
        // rightmost l = 1 cylinder: probe just below frak b (or r0 for small alpha)
        let probe = (spec.frak_b().min(spec.r0) - 1e-9 * t).max(spec.ell0);
        let d = spec.digit(probe)?;
        debug_assert_eq!(d.l, 1);
        families.push((1, d.k, 1, 0.0));
    }
    if large {
        let d_b = spec.digit(spec.frak_b())?;
        debug_assert_eq!(d_b.l, 2);
        families.push((2, d_b.k, -1, 1.0));
        let d_r = spec.digit(spec.r0)?;
        if d_r.l == 2 {
            families.push((2, d_r.k, 1, 1.0));
        }
    }

    for (l, k0, step, accum) in families {
        let mut k = k0;
        let mut last_bounds: Option<crate::interval::CylinderBounds> = None;
        loop {
            let d = Digit::new(k, l);
            let cb = match spec.cylinder_bounds(&d) {
                Some(cb) => cb,
                None => break,
            };
            if cb.rho - cb.lambda < w_min {
                // start of the tail for this family
                let (x1, x2) = tail_range(&spec, accum, &last_bounds, step, cb.lambda, cb.rho);
                let strip = clip_domain_to_strip(&boxes, x1, x2);
                let mass = geom::union_mass(&strip, geom::SNAP_REL * t)?;
                let m = d.matrix(&spec.params).conj_by_r();
                let (flo, fhi) = fiber_edge(x1, x2);
                let edge = m.apply_f(flo).abs().max(m.apply_f(fhi).abs());
                tails.push(TailRegion { x1, x2, mass, image_edge: edge });
                break;
            }
            let region = clip_domain_to_strip(&boxes, cb.lambda, cb.rho);
            if !region.is_empty() {
                for r in &region {
                    if r.x1 < cb.lambda - w_min || r.x2 > cb.rho + w_min {
                        return Err(Error::Construction(
                            "block region escapes its cylinder".into(),
                        ));
                    }
                }
                let mass = geom::union_mass(&region, geom::SNAP_REL * t)?;
                blocks.push(Block { digit: d, region, mass });
            }
            last_bounds = Some(cb);
            k += step;
            if k.unsigned_abs() > 1_000_000 {
                return Err(Error::Inconclusive(blocks.len()));
            }
        }
    }
    Ok(BlockSet { blocks, tails })
}

fn tail_range(
    spec: &IntervalSpec,
    accum: f64,
    last: &Option<crate::interval::CylinderBounds>,
    step: i64,
    lam: f64,
    rho: f64,
) -> (f64, f64) {
    // Remaining cylinders sit between the last enumerated cylinder and the
    // accumulation point.
    match last {
        Some(cb) => {
            if step.is_positive() {
                // family marches leftward in x toward the accumulation point
                (accum.max(spec.ell0), cb.lambda)
            } else {
                (cb.rho, accum.min(spec.r0))
            }
        }
        None => (lam, rho),
    }
}

/// Configuration of a bijectivity run.
#[derive(Debug, Clone)]
pub struct BijectivityOptions {
    pub samples: usize,
    pub grid: usize,
    pub seed: u64,
    /// Relative cylinder-width cutoff for block enumeration.
    pub w_min_rel: f64,
    pub containment_min: f64,
    /// Allowed residual relative to the domain mass.
    pub residual_rel: f64,
    pub multiplicity_max: f64,
}

impl Default for BijectivityOptions {
    fn default() -> Self {
        BijectivityOptions {
            samples: 100_000,
            grid: 512,
            seed: 7,
            w_min_rel: 2.5e-7,
            containment_min: 0.999,
            residual_rel: 1e-6,
            multiplicity_max: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Certification statistics for one domain.
#[derive(Debug, Clone)]
pub struct BijectivityReport {
    pub containment_fraction: f64,
    /// Mass of image-vs-domain mismatch outside the tail strip.
    pub mass_balance_residual: f64,
    pub grid_multiplicity_excess: f64,
    pub samples: usize,
    pub seed: u64,
    /// Mass of the strip around `y = 0` left to the tail blocks.
    pub tail_strip_mass: f64,
    /// Outer edge of the tail strip actually used.
    pub tail_edge: f64,
    pub blocks: usize,
    pub verdict: Verdict,
}

impl BijectivityReport {
    /// `key=value` line export.
    pub fn to_text(&self) -> String {
        format!(
            "containment_fraction={:.9}\nmass_balance_residual={:.3e}\ngrid_multiplicity_excess={:.3e}\nsamples={}\nseed={}\ntail_strip_mass={:.3e}\ntail_edge={:.3e}\nblocks={}\nverdict={:?}\n",
            self.containment_fraction,
            self.mass_balance_residual,
            self.grid_multiplicity_excess,
            self.samples,
            self.seed,
            self.tail_strip_mass,
            self.tail_edge,
            self.blocks,
            self.verdict
        )
    }
}

/// Image of one rectangle under the planar map restricted to a digit branch.
fn image_box(spec: &IntervalSpec, d: &Digit, r: &Box2) -> Result<Box2> {
    let m = d.matrix(&spec.params);
    let n = m.conj_by_r();
    // the conjugated action must have no pole inside the fiber
    let d1 = n.c * r.y1 + n.d;
    let d2 = n.c * r.y2 + n.d;
    if d1.signum() != d2.signum() || d1.abs() < POLE_TOL || d2.abs() < POLE_TOL {
        return Err(Error::Pole(d1.min(d2)));
    }
    let (x1, x2) = (m.apply_f(r.x1), m.apply_f(r.x2));
    let (y1, y2) = (n.apply_f(r.y1), n.apply_f(r.y2));
    Ok(Box2::new(x1.min(x2), x1.max(x2), y1.min(y2), y1.max(y2)))
}

/// Verify bijectivity of the planar map on the domain.
pub fn verify_bijectivity(
    domain: &Domain,
    blockset: &BlockSet,
    opts: &BijectivityOptions,
) -> Result<BijectivityReport> {
    let spec = domain.spec();
    let t = spec.t();
    let snap = geom::SNAP_REL * t;
    let boxes = domain.boxes();
    let total_mass = crate::measure::mu_domain(domain)?.mass;

    // --- forward images of all enumerated blocks
    let mut images: Vec<(usize, Box2)> = Vec::new();
    let mut inconclusive = false;
    for (i, b) in blockset.blocks.iter().enumerate() {
        for r in &b.region {
            match image_box(&spec, &b.digit, r) {
                Ok(ib) => images.push((i, ib)),
                Err(Error::Pole(_)) => inconclusive = true,
                Err(e) => return Err(e),
            }
        }
    }
    let image_boxes: Vec<Box2> = images.iter().map(|(_, b)| *b).collect();

    // --- mass balance: domain vs union of images, up to the tail strip
    let tail_edge = blockset
        .tails
        .iter()
        .map(|t| t.image_edge)
        .fold(0.0f64, f64::max);
    let escaped = geom::diff_mass(&image_boxes, &boxes, snap)?;
    let uncovered = diff_rects(&boxes, &image_boxes, snap);
    let mut bad_uncovered = 0.0;
    let mut tail_strip_mass = 0.0;
    for u in &uncovered {
        let m = mu_box(u)?;
        if u.y1 >= -tail_edge - snap && u.y2 <= tail_edge + snap {
            tail_strip_mass += m;
        } else {
            bad_uncovered += m;
        }
    }
    let mass_balance_residual = escaped + bad_uncovered;

    // --- grid multiplicity
    let grid = opts.grid.max(8);
    let (mut xlo, mut xhi, mut ylo, mut yhi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for b in &boxes {
        xlo = xlo.min(b.x1);
        xhi = xhi.max(b.x2);
        ylo = ylo.min(b.y1);
        yhi = yhi.max(b.y2);
    }
    let dx = (xhi - xlo) / grid as f64;
    let dy = (yhi - ylo) / grid as f64;
    let mut count = vec![0u16; grid * grid];
    for (_, ib) in &images {
        let i0 = (((ib.x1 - xlo) / dx).ceil().max(0.0)) as usize;
        let i1 = ((((ib.x2 - xlo) / dx) - 0.5).floor().min(grid as f64 - 1.0)) as usize;
        let j0 = (((ib.y1 - ylo) / dy).ceil().max(0.0)) as usize;
        let j1 = ((((ib.y2 - ylo) / dy) - 0.5).floor().min(grid as f64 - 1.0)) as usize;
        // cells whose center lies inside the box
        for i in i0..=i1.min(grid - 1) {
            let cx = xlo + (i as f64 + 0.5) * dx;
            if cx < ib.x1 || cx >= ib.x2 {
                continue;
            }
            for j in j0..=j1.min(grid - 1) {
                let cy = ylo + (j as f64 + 0.5) * dy;
                if cy < ib.y1 || cy >= ib.y2 {
                    continue;
                }
                count[j * grid + i] = count[j * grid + i].saturating_add(1);
            }
        }
    }
    let mut w_covered = 0.0;
    let mut w_multi = 0.0;
    for j in 0..grid {
        let cy = ylo + (j as f64 + 0.5) * dy;
        if cy.abs() <= tail_edge {
            continue; // tail strip: covered once in the limit
        }
        for i in 0..grid {
            let c = count[j * grid + i];
            if c == 0 {
                continue;
            }
            let cx = xlo + (i as f64 + 0.5) * dx;
            let den = 1.0 + cx * cy;
            if den <= 1e-9 {
                continue;
            }
            let w = dx * dy / (den * den);
            w_covered += w;
            if c >= 2 {
                w_multi += w;
            }
        }
    }
    let grid_multiplicity_excess = if w_covered > 0.0 { w_multi / w_covered } else { 0.0 };

    // --- mu-weighted containment sampling
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let masses: Vec<f64> = boxes.iter().map(|b| mu_box(b).unwrap_or(0.0)).collect();
    let cum: Vec<f64> = masses
        .iter()
        .scan(0.0, |acc, m| {
            *acc += m;
            Some(*acc)
        })
        .collect();
    let total_cum = *cum.last().unwrap_or(&0.0);
    let mut hits = 0usize;
    let mut done = 0usize;
    let mut attempts = 0usize;
    let max_attempts = opts.samples * 50;
    while done < opts.samples && attempts < max_attempts {
        attempts += 1;
        let pick = rng.gen::<f64>() * total_cum;
        let bi = cum.partition_point(|c| *c < pick).min(boxes.len() - 1);
        let b = &boxes[bi];
        let x = b.x1 + rng.gen::<f64>() * b.width();
        let y = b.y1 + rng.gen::<f64>() * b.height();
        // rejection against the density 1/(1+xy)^2
        let corners = [
            1.0 + b.x1 * b.y1,
            1.0 + b.x1 * b.y2,
            1.0 + b.x2 * b.y1,
            1.0 + b.x2 * b.y2,
        ];
        let cmin = corners.iter().cloned().fold(f64::MAX, f64::min).max(1e-12);
        let ratio = (cmin / (1.0 + x * y)).powi(2);
        if rng.gen::<f64>() > ratio {
            continue;
        }
        match planar_apply(&spec, x, y) {
            Ok((xx, yy)) => {
                done += 1;
                if covers_point(&boxes, xx, yy, 1e-9 * t) {
                    hits += 1;
                }
            }
            Err(_) => continue, // singular line, measure zero
        }
    }
    let containment_fraction = if done > 0 { hits as f64 / done as f64 } else { 0.0 };

    let verdict = if inconclusive || done < opts.samples {
        Verdict::Inconclusive
    } else if containment_fraction >= opts.containment_min
        && mass_balance_residual <= opts.residual_rel * total_mass
        && grid_multiplicity_excess <= opts.multiplicity_max
    {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(BijectivityReport {
        containment_fraction,
        mass_balance_residual,
        grid_multiplicity_excess,
        samples: done,
        seed: opts.seed,
        tail_strip_mass,
        tail_edge,
        blocks: blockset.blocks.len(),
        verdict,
    })
}

/// Partition and verify with the given options.
pub fn certify(domain: &Domain, opts: &BijectivityOptions) -> Result<BijectivityReport> {
    let bs = partition_blocks(domain, opts.w_min_rel)?;
    verify_bijectivity(domain, &bs, opts)
}
