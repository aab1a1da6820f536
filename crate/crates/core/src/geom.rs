//! Axis-aligned rectangle collections with exact mu-measure bookkeeping.
//!
//! All boolean operations run on a slab decomposition: x-breakpoints of the
//! inputs cut the plane into vertical slabs, inside which every rectangle
//! spans the full slab, so the y-structure is one-dimensional interval
//! arithmetic. The invariant measure of a box is evaluated in closed form,
//! which keeps all mass computations exact up to rounding.

use crate::error::{Error, Result};

/// Snap tolerance used when merging interval endpoints (relative to `t`).
pub const SNAP_REL: f64 = 1e-11;

/// A plain closed box `[x1, x2] x [y1, y2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box2 {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl Box2 {
    pub fn new(x1: f64, x2: f64, y1: f64, y2: f64) -> Self {
        Box2 { x1, x2, y1, y2 }
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn contains(&self, x: f64, y: f64, tol: f64) -> bool {
        x >= self.x1 - tol && x <= self.x2 + tol && y >= self.y1 - tol && y <= self.y2 + tol
    }
}

/// Closed-form invariant mass of a box:
/// `log((1 + x1 y1)(1 + x2 y2) / ((1 + x1 y2)(1 + x2 y1)))`.
///
/// Requires `1 + x y > 0` on the closed box except for corner zeros, where
/// the mass is infinite and an error is raised.
pub fn mu_box(b: &Box2) -> Result<f64> {
    if b.width() <= 0.0 || b.height() <= 0.0 {
        return Ok(0.0);
    }
    // 1 + xy is bilinear, so positivity on the four corners gives positivity
    // on the box.
    let c11 = 1.0 + b.x1 * b.y1;
    let c22 = 1.0 + b.x2 * b.y2;
    let c12 = 1.0 + b.x1 * b.y2;
    let c21 = 1.0 + b.x2 * b.y1;
    if c11 <= 0.0 || c22 <= 0.0 || c12 <= 0.0 || c21 <= 0.0 {
        return Err(Error::InfiniteMass);
    }
    Ok((c11 * c22 / (c12 * c21)).ln())
}

fn dedup_sorted(mut xs: Vec<f64>, tol: f64) -> Vec<f64> {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::with_capacity(xs.len());
    for x in xs {
        if out.last().map_or(true, |l| x - l > tol) {
            out.push(x);
        }
    }
    out
}

/// Disjoint union of 1-d intervals, kept sorted.
fn merge_intervals(mut iv: Vec<(f64, f64)>, tol: f64) -> Vec<(f64, f64)> {
    iv.retain(|(a, b)| b - a > tol);
    iv.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
    for (a, b) in iv {
        match out.last_mut() {
            Some((_, ob)) if a <= *ob + tol => {
                if b > *ob {
                    *ob = b;
                }
            }
            _ => out.push((a, b)),
        }
    }
    out
}

/// `a \ b` for sorted disjoint interval lists.
fn subtract_intervals(a: &[(f64, f64)], b: &[(f64, f64)], tol: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(alo, ahi) in a {
        let mut lo = alo;
        for &(blo, bhi) in b {
            if bhi <= lo || blo >= ahi {
                continue;
            }
            if blo > lo + tol {
                out.push((lo, blo));
            }
            lo = lo.max(bhi);
            if lo >= ahi {
                break;
            }
        }
        if ahi - lo > tol {
            out.push((lo, ahi));
        }
    }
    out
}

fn intersect_intervals(a: &[(f64, f64)], b: &[(f64, f64)], tol: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(alo, ahi) in a {
        for &(blo, bhi) in b {
            let lo = alo.max(blo);
            let hi = ahi.min(bhi);
            if hi - lo > tol {
                out.push((lo, hi));
            }
        }
    }
    out
}

fn slab_fibers(rects: &[Box2], xm: f64, tol: f64) -> Vec<(f64, f64)> {
    let iv: Vec<(f64, f64)> = rects
        .iter()
        .filter(|r| r.x1 <= xm && xm < r.x2)
        .map(|r| (r.y1, r.y2))
        .collect();
    merge_intervals(iv, tol)
}

fn breakpoints(sets: &[&[Box2]], tol: f64) -> Vec<f64> {
    let mut xs = Vec::new();
    for set in sets {
        for r in *set {
            xs.push(r.x1);
            xs.push(r.x2);
        }
    }
    dedup_sorted(xs, tol)
}

/// Mass of the union of a rectangle collection (overlaps counted once).
pub fn union_mass(rects: &[Box2], tol: f64) -> Result<f64> {
    let xs = breakpoints(&[rects], tol);
    let mut total = 0.0;
    for w in xs.windows(2) {
        let (xa, xb) = (w[0], w[1]);
        let xm = 0.5 * (xa + xb);
        for (ya, yb) in slab_fibers(rects, xm, tol) {
            total += mu_box(&Box2::new(xa, xb, ya, yb))?;
        }
    }
    Ok(total)
}

/// Mass of the symmetric difference of two collections.
pub fn sym_diff_mass(a: &[Box2], b: &[Box2], tol: f64) -> Result<f64> {
    let xs = breakpoints(&[a, b], tol);
    let mut total = 0.0;
    for w in xs.windows(2) {
        let (xa, xb) = (w[0], w[1]);
        let xm = 0.5 * (xa + xb);
        let fa = slab_fibers(a, xm, tol);
        let fb = slab_fibers(b, xm, tol);
        for (ya, yb) in subtract_intervals(&fa, &fb, tol) {
            total += mu_box(&Box2::new(xa, xb, ya, yb))?;
        }
        for (ya, yb) in subtract_intervals(&fb, &fa, tol) {
            total += mu_box(&Box2::new(xa, xb, ya, yb))?;
        }
    }
    Ok(total)
}

/// Mass of `a \ b`.
pub fn diff_mass(a: &[Box2], b: &[Box2], tol: f64) -> Result<f64> {
    let xs = breakpoints(&[a, b], tol);
    let mut total = 0.0;
    for w in xs.windows(2) {
        let (xa, xb) = (w[0], w[1]);
        let xm = 0.5 * (xa + xb);
        let fa = slab_fibers(a, xm, tol);
        let fb = slab_fibers(b, xm, tol);
        for (ya, yb) in subtract_intervals(&fa, &fb, tol) {
            total += mu_box(&Box2::new(xa, xb, ya, yb))?;
        }
    }
    Ok(total)
}

/// `a \ b` as a rectangle collection (slab pieces, merged along x afterwards).
pub fn diff_rects(a: &[Box2], b: &[Box2], tol: f64) -> Vec<Box2> {
    let xs = breakpoints(&[a, b], tol);
    let mut out: Vec<Box2> = Vec::new();
    for w in xs.windows(2) {
        let (xa, xb) = (w[0], w[1]);
        if xb - xa <= tol {
            continue;
        }
        let xm = 0.5 * (xa + xb);
        let fa = slab_fibers(a, xm, tol);
        let fb = slab_fibers(b, xm, tol);
        for (ya, yb) in subtract_intervals(&fa, &fb, tol) {
            out.push(Box2::new(xa, xb, ya, yb));
        }
    }
    merge_x(out, tol)
}

/// `a ∩ b` as a rectangle collection.
pub fn intersect_rects(a: &[Box2], b: &[Box2], tol: f64) -> Vec<Box2> {
    let xs = breakpoints(&[a, b], tol);
    let mut out: Vec<Box2> = Vec::new();
    for w in xs.windows(2) {
        let (xa, xb) = (w[0], w[1]);
        if xb - xa <= tol {
            continue;
        }
        let xm = 0.5 * (xa + xb);
        let fa = slab_fibers(a, xm, tol);
        let fb = slab_fibers(b, xm, tol);
        for (ya, yb) in intersect_intervals(&fa, &fb, tol) {
            out.push(Box2::new(xa, xb, ya, yb));
        }
    }
    merge_x(out, tol)
}

/// Merge horizontally adjacent boxes with identical fibers.
pub fn merge_x(mut boxes: Vec<Box2>, tol: f64) -> Vec<Box2> {
    boxes.sort_by(|a, b| {
        a.y1.partial_cmp(&b.y1)
            .unwrap()
            .then(a.y2.partial_cmp(&b.y2).unwrap())
            .then(a.x1.partial_cmp(&b.x1).unwrap())
    });
    let mut out: Vec<Box2> = Vec::with_capacity(boxes.len());
    for b in boxes {
        match out.last_mut() {
            Some(p)
                if (p.y1 - b.y1).abs() <= tol
                    && (p.y2 - b.y2).abs() <= tol
                    && (p.x2 - b.x1).abs() <= tol =>
            {
                p.x2 = b.x2;
            }
            _ => out.push(b),
        }
    }
    out
}

/// Does the collection contain the point (up to `tol`)?
pub fn covers_point(rects: &[Box2], x: f64, y: f64, tol: f64) -> bool {
    rects.iter().any(|r| r.contains(x, y, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-11;

    #[test]
    fn mu_box_values() {
        // [0,1]x[0,1] has mass ln 2.
        let m = mu_box(&Box2::new(0.0, 1.0, 0.0, 1.0)).unwrap();
        assert!((m - 2f64.ln()).abs() < 1e-15);
        // degenerate boxes have zero mass
        assert_eq!(mu_box(&Box2::new(0.0, 1.0, 0.5, 0.5)).unwrap(), 0.0);
        // corner pole is infinite
        assert!(mu_box(&Box2::new(0.0, 1.0, -1.0, 0.0)).is_err());
    }

    #[test]
    fn union_of_overlapping_boxes() {
        let a = Box2::new(0.0, 1.0, 0.0, 1.0);
        let b = Box2::new(0.5, 1.5, 0.0, 1.0);
        let u = union_mass(&[a, b], TOL).unwrap();
        let direct = mu_box(&Box2::new(0.0, 1.5, 0.0, 1.0)).unwrap();
        assert!((u - direct).abs() < 1e-13);
    }

    #[test]
    fn sym_diff_and_diff() {
        let a = Box2::new(0.0, 1.0, 0.0, 1.0);
        let b = Box2::new(0.0, 1.0, 0.5, 1.5);
        let sd = sym_diff_mass(&[a], &[b], TOL).unwrap();
        let want = mu_box(&Box2::new(0.0, 1.0, 0.0, 0.5)).unwrap()
            + mu_box(&Box2::new(0.0, 1.0, 1.0, 1.5)).unwrap();
        assert!((sd - want).abs() < 1e-13);
        assert!((sym_diff_mass(&[a], &[a], TOL).unwrap()).abs() < 1e-15);
        let d = diff_rects(&[a], &[b], TOL);
        assert_eq!(d.len(), 1);
        assert!((d[0].y2 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn intersection_rects() {
        let a = Box2::new(0.0, 2.0, 0.0, 1.0);
        let b = Box2::new(1.0, 3.0, 0.5, 2.0);
        let i = intersect_rects(&[a], &[b], TOL);
        assert_eq!(i.len(), 1);
        assert_eq!(i[0], Box2::new(1.0, 2.0, 0.5, 1.0));
    }

    #[test]
    fn merge_x_rejoins_slabs() {
        let parts = vec![
            Box2::new(0.0, 1.0, 0.0, 1.0),
            Box2::new(1.0, 2.0, 0.0, 1.0),
            Box2::new(2.0, 3.0, 0.0, 2.0),
        ];
        let merged = merge_x(parts, TOL);
        assert_eq!(merged.len(), 2);
    }
}
