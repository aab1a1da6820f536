//! Construction of the planar bijectivity domains `Omega_{n, alpha}`.
//!
//! On a matching interval the domain is a finite union of axis-aligned
//! rectangles whose vertical splits come from the endpoint orbits at `alpha`
//! and whose heights come from the endpoint orbits at the interval endpoints.
//! The exact-endpoint parameters get their own constructors, which differ
//! from the interior ones by one rectangle.

use crate::error::{Error, Result};
use crate::geom::Box2;
use crate::interval::IntervalSpec;
use crate::mobius::group_params;
use crate::sync::SyncInterval;
use crate::words::{digit_word_large, DigitWord};
use serde::{Deserialize, Serialize};

/// Rectangles thinner than this (relative to `t`) are dropped.
pub const DEGEN_REL: f64 = 1e-12;

/// Which part of the domain a rectangle belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Upper,
    Lower,
}

/// One rectangle of the domain with a provenance tag describing which orbit
/// points produced its edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
    pub part: Part,
    pub provenance: String,
}

impl Rect {
    pub fn to_box(&self) -> Box2 {
        Box2::new(self.x1, self.x2, self.y1, self.y2)
    }
}

/// The construction case producing a domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    InteriorSmall,
    ZetaSmall,
    EtaSmall,
    LargeLeft,
    LargeRight,
    Delta,
    EndpointLarge,
    Sweep,
    /// The explicit two-rectangle domain at `alpha = 1` (n = 3); its mass is
    /// infinite while the return-time integral converges.
    AlphaOne,
}

/// `Omega_{n, alpha}` as an ordered rectangle union.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Domain {
    pub version: u32,
    pub n: u32,
    pub alpha: f64,
    pub kind: DomainKind,
    pub upper: Vec<Rect>,
    pub lower: Vec<Rect>,
    /// Residual mass bound for sweep approximations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_mass: Option<f64>,
}

pub const RECORD_VERSION: u32 = 1;

impl Domain {
    pub fn spec(&self) -> IntervalSpec {
        IntervalSpec::from_params(group_params(self.n as i64).expect("valid n"), self.alpha)
    }

    pub fn all_rects(&self) -> impl Iterator<Item = &Rect> {
        self.upper.iter().chain(self.lower.iter())
    }

    pub fn boxes(&self) -> Vec<Box2> {
        self.all_rects().map(|r| r.to_box()).collect()
    }

    /// Total mass by the closed form, with per-rectangle breakdown.
    pub fn mass_breakdown(&self) -> Result<Vec<f64>> {
        self.all_rects().map(|r| crate::geom::mu_box(&r.to_box())).collect()
    }

    /// Serialize to the versioned JSON record.
    pub fn to_record(&self) -> String {
        serde_json::to_string_pretty(self).expect("domain serializes")
    }

    pub fn from_record(s: &str) -> Result<Domain> {
        let d: Domain = serde_json::from_str(s)
            .map_err(|e| Error::Construction(format!("bad domain record: {e}")))?;
        if d.version != RECORD_VERSION {
            return Err(Error::Construction(format!(
                "unsupported domain record version {}",
                d.version
            )));
        }
        Ok(d)
    }

    /// Structural invariants: rectangles ordered and disjoint within each
    /// part, x-projection covering the interval, monotone boundary heights,
    /// and positive `1 + xy` at corners (except for the alpha = 1 domain).
    pub fn validate(&self) -> Result<()> {
        let spec = self.spec();
        let tol = DEGEN_REL * spec.t();
        for (part, rects) in [(Part::Upper, &self.upper), (Part::Lower, &self.lower)] {
            for w in rects.windows(2) {
                if w[1].x1 < w[0].x2 - tol {
                    return Err(Error::Construction(format!(
                        "{part:?} rectangles overlap near x = {}",
                        w[1].x1
                    )));
                }
            }
            for r in rects.iter() {
                if r.x2 - r.x1 <= 0.0 || r.y2 - r.y1 <= 0.0 {
                    return Err(Error::Construction("degenerate rectangle survived".into()));
                }
                match part {
                    Part::Upper => {
                        if r.y1 != 0.0 {
                            return Err(Error::Construction("upper rectangle not based at y=0".into()));
                        }
                    }
                    Part::Lower => {
                        if r.y2 != 0.0 {
                            return Err(Error::Construction("lower rectangle not topped at y=0".into()));
                        }
                    }
                }
            }
        }
        // heights increase left to right on both boundaries
        for w in self.upper.windows(2) {
            if w[1].y2 <= w[0].y2 {
                return Err(Error::Construction("upper heights not increasing".into()));
            }
        }
        for w in self.lower.windows(2) {
            if w[1].y1 <= w[0].y1 {
                return Err(Error::Construction("lower depths not increasing".into()));
            }
        }
        // x-projection covers the interval
        if self.kind != DomainKind::AlphaOne {
            let mut xs: Vec<(f64, f64)> = self.all_rects().map(|r| (r.x1, r.x2)).collect();
            xs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut cover = spec.ell0;
            for (a, b) in xs {
                if a > cover + tol {
                    return Err(Error::Construction(format!(
                        "projection gap at x = {cover}"
                    )));
                }
                cover = cover.max(b);
            }
            if cover < spec.r0 - tol {
                return Err(Error::Construction("projection does not reach r0".into()));
            }
        }
        // finite mass: corners stay on the good side of y = -1/x
        if self.kind != DomainKind::AlphaOne {
            for r in self.all_rects() {
                crate::geom::mu_box(&r.to_box())?;
            }
        }
        Ok(())
    }

    /// The two paired heights of the small regime:
    /// returns `(y_{S+1} - t - y_{-Sbar}, y_S - t - y_{-Sbar-1})`.
    pub fn t_pairing_residuals(&self) -> Option<(f64, f64)> {
        if self.kind != DomainKind::InteriorSmall {
            return None;
        }
        let t = self.spec().t();
        let mut tops: Vec<f64> = self.upper.iter().map(|r| r.y2).collect();
        tops.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut bots: Vec<f64> = self.lower.iter().map(|r| r.y1).collect();
        bots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if tops.len() < 2 || bots.len() < 2 {
            return None;
        }
        // y_{S+1} pairs with y_{-Sbar} (the second deepest), y_S with the deepest.
        Some((tops[0] - t - bots[1], tops[1] - t - bots[0]))
    }

    /// Render to a standalone SVG with axis annotations.
    pub fn to_svg(&self) -> String {
        let spec = self.spec();
        let (mut ylo, mut yhi) = (0.0f64, 0.0f64);
        for r in self.all_rects() {
            ylo = ylo.min(r.y1);
            yhi = yhi.max(r.y2);
        }
        let (xlo, xhi) = (spec.ell0, spec.r0);
        let w = 720.0;
        let pad = 40.0;
        let sx = (w - 2.0 * pad) / (xhi - xlo);
        let h_data = (yhi - ylo).max(1e-9);
        let h = h_data * sx + 2.0 * pad;
        let px = |x: f64| pad + (x - xlo) * sx;
        let py = |y: f64| h - pad - (y - ylo) * sx;
        let mut s = String::new();
        s.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n"
        ));
        s.push_str(&format!(
            "<title>Omega n={} alpha={:.6} ({:?})</title>\n",
            self.n, self.alpha, self.kind
        ));
        for r in self.all_rects() {
            let fill = match r.part {
                Part::Upper => "#7aa6c2",
                Part::Lower => "#c2927a",
            };
            s.push_str(&format!(
                "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"{}\" fill-opacity=\"0.55\" stroke=\"#333\" stroke-width=\"0.8\"><title>{}</title></rect>\n",
                px(r.x1),
                py(r.y2),
                (r.x2 - r.x1) * sx,
                (r.y2 - r.y1) * sx,
                fill,
                r.provenance
            ));
        }
        // axes
        if xlo < 0.0 && xhi > 0.0 {
            s.push_str(&format!(
                "<line x1=\"{0:.3}\" y1=\"{1:.3}\" x2=\"{0:.3}\" y2=\"{2:.3}\" stroke=\"#000\" stroke-dasharray=\"4 3\"/>\n",
                px(0.0),
                py(ylo),
                py(yhi)
            ));
        }
        s.push_str(&format!(
            "<line x1=\"{0:.3}\" y1=\"{2:.3}\" x2=\"{1:.3}\" y2=\"{2:.3}\" stroke=\"#000\"/>\n",
            px(xlo),
            px(xhi),
            py(0.0)
        ));
        for (x, label) in [(xlo, "l0"), (xhi, "r0")] {
            s.push_str(&format!(
                "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"12\">{} = {:.5}</text>\n",
                px(x) - 14.0,
                py(0.0) + 16.0,
                label,
                x
            ));
        }
        s.push_str(&format!(
            "<text x=\"{:.3}\" y=\"18\" font-size=\"13\">Omega(n={}, alpha={:.8}), {} rectangles</text>\n",
            pad,
            self.n,
            self.alpha,
            self.upper.len() + self.lower.len()
        ));
        s.push_str("</svg>\n");
        s
    }
}

fn argsort_asc(xs: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&i, &j| xs[i].partial_cmp(&xs[j]).unwrap());
    idx
}

fn argsort_desc(xs: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&i, &j| xs[j].partial_cmp(&xs[i]).unwrap());
    idx
}

fn orbit_points(spec: &IntervalSpec, x0: f64, steps: usize) -> Result<Vec<f64>> {
    let orb = spec.orbit(x0, steps)?;
    if orb.truncated || orb.points.len() != steps + 1 {
        return Err(Error::Construction(format!(
            "endpoint orbit truncated after {} of {steps} steps",
            orb.points.len() - 1
        )));
    }
    Ok(orb.points)
}

fn push_rect(out: &mut Vec<Rect>, t: f64, x1: f64, x2: f64, y1: f64, y2: f64, part: Part, tag: String) {
    let tol = DEGEN_REL * t;
    if x2 - x1 < tol || y2 - y1 < tol {
        return; // degenerate, dropped by design
    }
    out.push(Rect { x1, x2, y1, y2, part, provenance: tag });
}

/// Shared guts of the small-regime builders.
///
/// `drop_last_ell` removes the duplicated orbit point `l_S = l0` at the right
/// endpoint; `zeta_case` removes the degenerate leftmost lower rectangle.
fn small_domain(
    iv: &SyncInterval,
    alpha: f64,
    kind: DomainKind,
) -> Result<Domain> {
    let params = group_params(iv.n as i64)?;
    let spec = IntervalSpec::from_params(params, alpha);
    let spec_z = IntervalSpec::from_params(params, iv.zeta);
    let spec_e = IntervalSpec::from_params(params, iv.eta);
    let su = iv.s_under;
    let sb = iv.s_bar;
    let t = spec.t();

    let eta_case = kind == DomainKind::EtaSmall;
    let zeta_case = kind == DomainKind::ZetaSmall;

    // Upper part: splits from the alpha-orbit of l0, heights from the
    // zeta-orbit of l0.
    let n_ell = if eta_case { su - 1 } else { su };
    let pl = orbit_points(&spec, spec.ell0, n_ell)?;
    let plz = orbit_points(&spec_z, spec_z.ell0, su)?;
    let idx = argsort_asc(&pl);
    if !eta_case {
        // ordering of l_i(alpha) must agree with the zeta-orbit ordering
        let idx_z = argsort_asc(&plz);
        if idx != idx_z {
            return Err(Error::Construction(
                "orbit ordering differs from the zeta-endpoint ordering".into(),
            ));
        }
    }
    let mut upper = Vec::new();
    for a in 1..=pl.len() {
        let x1 = pl[idx[a - 1]];
        let x2 = if a == pl.len() { spec.r0 } else { pl[idx[a]] };
        let y = -plz[su - idx[a - 1]];
        push_rect(
            &mut upper,
            t,
            x1,
            x2,
            0.0,
            y,
            Part::Upper,
            format!("K{a}=[l{},..) y{a}=-l{}(zeta)", idx[a - 1], su - idx[a - 1]),
        );
    }

    // Lower part: splits from the alpha-orbit of r0 (sorted decreasing),
    // heights from the eta-orbit of r0.
    let pr = orbit_points(&spec, spec.r0, sb)?;
    let pre = orbit_points(&spec_e, spec_e.r0, sb)?;
    let jdx = argsort_desc(&pr);
    let y_of = |pos: usize| -pre[sb - jdx[pos]]; // y_{-(pos+1)}
    let mut lower = Vec::new();
    let inner = if zeta_case { sb - 1 } else { sb };
    for m in 0..inner {
        // L_{-(m+1)} = [r_{j_{-(m+2)}}, r_{j_{-(m+1)}}]
        let x1 = pr[jdx[m + 1]];
        let x2 = pr[jdx[m]];
        push_rect(
            &mut lower,
            t,
            x1,
            x2,
            y_of(m),
            0.0,
            Part::Lower,
            format!("L-{}=[r{},r{}] y=-r{}(eta)", m + 1, jdx[m + 1], jdx[m], sb - jdx[m]),
        );
    }
    // leftmost lower rectangle
    let (right_end, level) = if zeta_case {
        (pr[jdx[sb - 1]], sb - 1)
    } else {
        (pr[jdx[sb]], sb)
    };
    push_rect(
        &mut lower,
        t,
        spec.ell0,
        right_end,
        y_of(level),
        0.0,
        Part::Lower,
        format!("L-{}=[l0,..] y=-r{}(eta)", level + 1, sb - jdx[level]),
    );

    upper.sort_by(|a, b| a.x1.partial_cmp(&b.x1).unwrap());
    lower.sort_by(|a, b| a.x1.partial_cmp(&b.x1).unwrap());
    let dom = Domain {
        version: RECORD_VERSION,
        n: iv.n,
        alpha,
        kind,
        upper,
        lower,
        residual_mass: None,
    };
    dom.validate()?;
    Ok(dom)
}

/// Domain for small `alpha` strictly inside its matching interval.
pub fn build_small_interior(iv: &SyncInterval, alpha: f64) -> Result<Domain> {
    require_small(iv)?;
    if !(alpha > iv.zeta && alpha < iv.eta) {
        return Err(Error::AlphaOutOfRange { alpha });
    }
    small_domain(iv, alpha, DomainKind::InteriorSmall)
}

/// Domain at the left endpoint `alpha = zeta_{k,v}`.
pub fn build_small_zeta(iv: &SyncInterval) -> Result<Domain> {
    require_small(iv)?;
    small_domain(iv, iv.zeta, DomainKind::ZetaSmall)
}

/// Domain at the right endpoint `alpha = eta_{k,v}`.
pub fn build_small_eta(iv: &SyncInterval) -> Result<Domain> {
    require_small(iv)?;
    small_domain(iv, iv.eta, DomainKind::EtaSmall)
}

fn require_small(iv: &SyncInterval) -> Result<()> {
    if !iv.is_small() {
        return Err(Error::Precondition("interval is not in the small regime".into()));
    }
    if !iv.valid {
        return Err(Error::Precondition("interval lacks a validity certificate".into()));
    }
    Ok(())
}

/// Domain for large `alpha` anywhere in the closure of `J_{-k,v}`; the kind
/// (left/right portion, division point, endpoints) is resolved from `alpha`.
pub fn build_large(iv: &SyncInterval, alpha: f64) -> Result<Domain> {
    if iv.is_small() {
        return Err(Error::Precondition("interval is not in the large regime".into()));
    }
    if !iv.valid {
        return Err(Error::Precondition("interval lacks a validity certificate".into()));
    }
    let delta = iv.delta.expect("large interval has delta");
    let params = group_params(iv.n as i64)?;
    let tol = 1e-13;
    let kind = if (alpha - delta).abs() <= tol {
        DomainKind::Delta
    } else if (alpha - iv.eta).abs() <= tol {
        DomainKind::EndpointLarge
    } else if (alpha - iv.zeta).abs() <= tol {
        DomainKind::EndpointLarge
    } else if alpha > iv.eta && alpha < delta {
        DomainKind::LargeLeft
    } else if alpha > delta && alpha < iv.zeta {
        DomainKind::LargeRight
    } else {
        return Err(Error::AlphaOutOfRange { alpha });
    };
    let zeta_endpoint = kind == DomainKind::EndpointLarge && (alpha - iv.zeta).abs() <= tol;
    let right_lower = kind == DomainKind::LargeRight || zeta_endpoint;

    let spec = IntervalSpec::from_params(params, alpha);
    let spec_e = IntervalSpec::from_params(params, iv.eta);
    let su = iv.s_under;
    let sb = iv.s_bar;
    let t = spec.t();
    let k_mag = -iv.k;

    // Upper: splits from the alpha-orbit of l0, heights from the eta-orbit.
    let n_ell = if zeta_endpoint { su - 1 } else { su };
    let pl = orbit_points(&spec, spec.ell0, n_ell)?;
    let ple = orbit_points(&spec_e, spec_e.ell0, su)?;
    let idx = argsort_asc(&pl);
    let mut upper = Vec::new();
    for a in 1..=pl.len() {
        let x1 = pl[idx[a - 1]];
        let x2 = if a == pl.len() { spec.r0 } else { pl[idx[a]] };
        let y = -ple[su - idx[a - 1]];
        push_rect(
            &mut upper,
            t,
            x1,
            x2,
            0.0,
            y,
            Part::Upper,
            format!("K{a}=[l{},..) y{a}=-l{}(eta)", idx[a - 1], su - idx[a - 1]),
        );
    }

    // hatted eta-orbit of r0: digits of bbar(-k, v) decide which entries get
    // pushed through C.
    let pre = orbit_points(&spec_e, spec_e.r0, sb)?;
    let (bbar, e) = digit_word_large(k_mag, &iv.v, iv.n)?;
    let bdigits = match bbar {
        DigitWord::Full(d) => d,
        _ => unreachable!(),
    };
    let mut hat = Vec::with_capacity(sb + 1);
    for i in 0..=sb {
        if i < sb && bdigits[i].l == 2 {
            hat.push((pre[i] - 1.0) / pre[i]); // C r_i(eta)
        } else {
            hat.push(pre[i]);
        }
    }

    let steps_r = if right_lower { sb + 1 } else { sb };
    let pr = orbit_points(&spec, spec.r0, steps_r)?;
    let jdx = argsort_desc(&pr[..=sb]);
    // y_b with the e(-k,v)-shifted assignment of the hatted heights
    let y_of = |b: i64| -> f64 {
        let m = if b >= -(e as i64) { -(b + e as i64 + 1) } else { -(b + e as i64 + sb as i64 + 2) };
        -hat[jdx[(-m - 1) as usize]]
    };
    let mut lower = Vec::new();
    for m in 0..sb {
        let b = -(m as i64 + 1);
        push_rect(
            &mut lower,
            t,
            pr[jdx[m + 1]],
            pr[jdx[m]],
            y_of(b),
            0.0,
            Part::Lower,
            format!("L{b}=[r{},r{}]", jdx[m + 1], jdx[m]),
        );
    }
    let r_min = pr[jdx[sb]];
    if right_lower {
        // L_{-Sbar-1} = [r_{Sbar+1}, r_min], plus the extra rectangle
        // L_{-Sbar-2} = [l0, r_{Sbar+1}) of depth R A C^2 R^-1 y_{beta(Sbar)}.
        let r_next = pr[sb + 1];
        push_rect(
            &mut lower,
            t,
            r_next,
            r_min,
            y_of(-(sb as i64 + 1)),
            0.0,
            Part::Lower,
            format!("L-{}=[r{},rmin]", sb + 1, sb + 1),
        );
        let (a, c, _) = crate::mobius::generators(&params);
        let nmat = a.compose(&c).compose(&c).conj_by_r();
        let y_beta_sbar = y_of(-(e as i64) - 1);
        let y_extra = nmat.apply_f(y_beta_sbar);
        push_rect(
            &mut lower,
            t,
            spec.ell0,
            r_next,
            y_extra,
            0.0,
            Part::Lower,
            format!("L-{}=[l0,r{}] y=RAC2R-1.y_beta(Sbar)", sb + 2, sb + 1),
        );
    } else {
        push_rect(
            &mut lower,
            t,
            spec.ell0,
            r_min,
            y_of(-(sb as i64 + 1)),
            0.0,
            Part::Lower,
            format!("L-{}=[l0,rmin]", sb + 1),
        );
    }

    upper.sort_by(|a, b| a.x1.partial_cmp(&b.x1).unwrap());
    lower.sort_by(|a, b| a.x1.partial_cmp(&b.x1).unwrap());
    let dom = Domain {
        version: RECORD_VERSION,
        n: iv.n,
        alpha,
        kind,
        upper,
        lower,
        residual_mass: None,
    };
    dom.validate()?;
    Ok(dom)
}

/// Dispatch on the position of `alpha` in the closure of the interval,
/// selecting the endpoint constructors at exact endpoints.
pub fn build_on_interval(iv: &SyncInterval, alpha: f64) -> Result<Domain> {
    let tol = 1e-13;
    if iv.is_small() {
        if (alpha - iv.zeta).abs() <= tol {
            build_small_zeta(iv)
        } else if (alpha - iv.eta).abs() <= tol {
            build_small_eta(iv)
        } else {
            build_small_interior(iv, alpha)
        }
    } else {
        build_large(iv, alpha)
    }
}

/// The explicit domain at `alpha = 1` for n = 3:
/// `[0,1] x [-1,0]  union  [1,2] x [-1/2,0]`.
///
/// Its mass is infinite (corner pole at `(1,-1)`) but the return-time
/// integral over it is finite and equals `vol_3`.
pub fn build_alpha_one(n: i64) -> Result<Domain> {
    if n != 3 {
        return Err(Error::UnsupportedCase(
            "the explicit alpha = 1 domain is implemented for n = 3 only".into(),
        ));
    }
    let lower = vec![
        Rect {
            x1: 0.0,
            x2: 1.0,
            y1: -1.0,
            y2: 0.0,
            part: Part::Lower,
            provenance: "[0,1]x[-1,0]".into(),
        },
        Rect {
            x1: 1.0,
            x2: 2.0,
            y1: -0.5,
            y2: 0.0,
            part: Part::Lower,
            provenance: "[1,2]x[-1/2,0]".into(),
        },
    ];
    Ok(Domain {
        version: RECORD_VERSION,
        n: 3,
        alpha: 1.0,
        kind: DomainKind::AlphaOne,
        upper: Vec::new(),
        lower,
        residual_mass: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobius::group_params;
    use crate::sync::{solve_large, solve_small};
    use crate::words::Word;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn heights(dom: &Domain) -> (Vec<f64>, Vec<f64>) {
        (
            dom.upper.iter().map(|r| r.y2).collect(),
            dom.lower.iter().map(|r| r.y1).collect(),
        )
    }

    #[test]
    fn small_interior_014_matches_paper_heights() {
        let p = group_params(3).unwrap();
        let iv = solve_small(&p, 1, &w("1")).unwrap();
        let dom = build_small_interior(&iv, 0.14).unwrap();
        assert_eq!(dom.upper.len(), 5);
        assert_eq!(dom.lower.len(), 2);
        let (up, lo) = heights(&dom);
        let s21 = 21f64.sqrt();
        let want_up = [
            (21.0 - s21) / 42.0,
            (9.0 - s21) / 10.0,
            (9.0 - s21) / 6.0,
            (21.0 - s21) / 10.0,
            (s21 - 1.0) / 2.0,
        ];
        for (g, e) in up.iter().zip(want_up.iter()) {
            assert!((g - e).abs() < 1e-12, "{g} vs {e}");
        }
        // left to right: y_{-2} = -r0(eta), y_{-1} = -r1(eta)
        let want_lo = [-(s21 - 1.0) / 10.0, -(5.0 - s21) / 2.0];
        for (g, e) in lo.iter().zip(want_lo.iter()) {
            assert!((g - e).abs() < 1e-12, "{g} vs {e}");
        }
    }

    #[test]
    fn t_pairings_hold() {
        let p = group_params(3).unwrap();
        let iv = solve_small(&p, 1, &w("1")).unwrap();
        let dom = build_small_interior(&iv, 0.14).unwrap();
        let (r1, r2) = dom.t_pairing_residuals().unwrap();
        assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12, "{r1} {r2}");
    }

    #[test]
    fn endpoint_cases_have_expected_counts() {
        let p = group_params(3).unwrap();
        let iv = solve_small(&p, 1, &w("1")).unwrap();
        let z = build_small_zeta(&iv).unwrap();
        assert_eq!(z.lower.len(), iv.s_bar); // one fewer than interior
        let e = build_small_eta(&iv).unwrap();
        assert_eq!(e.upper.len(), iv.s_under); // one fewer height
        assert_eq!(e.lower.len(), iv.s_bar + 1);
    }

    #[test]
    fn large_left_086_shape() {
        let p = group_params(3).unwrap();
        let iv = solve_large(&p, 2, &w("1")).unwrap();
        let dom = build_large(&iv, 0.86).unwrap();
        assert_eq!(dom.kind, DomainKind::LargeLeft);
        assert_eq!(dom.upper.len() + dom.lower.len(), 5);
        let (_, lo) = heights(&dom);
        // frozen from the independent construction
        let want = [-0.7362373842, -0.4417424305, -0.3908910549];
        for (g, e) in lo.iter().zip(want.iter()) {
            assert!((g - e).abs() < 1e-9, "{g} vs {e}");
        }
    }

    #[test]
    fn large_right_087_has_extra_rectangle() {
        let p = group_params(3).unwrap();
        let iv = solve_large(&p, 2, &w("1")).unwrap();
        let dom = build_large(&iv, 0.87).unwrap();
        assert_eq!(dom.kind, DomainKind::LargeRight);
        assert_eq!(dom.lower.len(), 4);
        // heights y_-1..y_-3 agree with the 0.86 domain (same interval)
        let dom86 = build_large(&iv, 0.86).unwrap();
        let (_, lo87) = heights(&dom);
        let (_, lo86) = heights(&dom86);
        for (a, b) in lo87[1..].iter().zip(lo86.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn backwards_l_on_first_interval() {
        // for alpha in (gamma_3, delta_{-1,1}) the domain is a backwards L
        let p = group_params(3).unwrap();
        let iv = solve_large(&p, 1, &w("1")).unwrap();
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let cap_g = g + 1.0;
        for alpha in [0.3, 0.5] {
            let dom = build_large(&iv, alpha).unwrap();
            let (up, lo) = heights(&dom);
            assert_eq!(up.len(), 2);
            assert_eq!(lo.len(), 1);
            assert!((up[0] - g * g).abs() < 1e-12);
            assert!((up[1] - cap_g).abs() < 1e-12);
            assert!((lo[0] + g * g).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_domain_collapses_extra_rectangle() {
        let p = group_params(3).unwrap();
        let iv = solve_large(&p, 1, &w("1")).unwrap();
        let delta = iv.delta.unwrap();
        let dom = build_large(&iv, delta).unwrap();
        assert_eq!(dom.kind, DomainKind::Delta);
        // [-g, g] x [-g^2, g^2] union [g, 2-g] x [-g^2, G] as a 3-rect union
        let g = (5f64.sqrt() - 1.0) / 2.0;
        assert_eq!(dom.lower.len(), 1);
        assert!((dom.lower[0].y1 + g * g).abs() < 1e-12);
        assert!((dom.upper[0].x1 + g).abs() < 1e-12);
        assert!((dom.upper[1].x2 - (2.0 - g)).abs() < 1e-12);
    }

    #[test]
    fn zeta_endpoint_large() {
        let p = group_params(3).unwrap();
        let iv = solve_large(&p, 1, &w("1")).unwrap();
        let dom = build_large(&iv, iv.zeta).unwrap();
        assert_eq!(dom.kind, DomainKind::EndpointLarge);
        // Omega_{3, G/2} = [-g^2,g^2] x [-(5+sqrt5)/10, g^2] u [g^2,G] x [-g^2,g^2]
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let (up, lo) = heights(&dom);
        assert_eq!(up.len(), 1);
        assert!((up[0] - g * g).abs() < 1e-12);
        assert!((lo[0] + (5.0 + 5f64.sqrt()) / 10.0).abs() < 1e-12);
        assert!((lo[1] + g * g).abs() < 1e-12);
    }

    #[test]
    fn record_round_trip() {
        let p = group_params(3).unwrap();
        let iv = solve_small(&p, 1, &w("1")).unwrap();
        let dom = build_small_interior(&iv, 0.14).unwrap();
        let rec = dom.to_record();
        let back = Domain::from_record(&rec).unwrap();
        assert_eq!(dom.upper, back.upper);
        assert_eq!(dom.lower, back.lower);
        assert_eq!(dom.alpha.to_bits(), back.alpha.to_bits());
    }

    #[test]
    fn svg_renders() {
        let p = group_params(3).unwrap();
        let iv = solve_small(&p, 1, &w("1")).unwrap();
        let dom = build_small_interior(&iv, 0.14).unwrap();
        let svg = dom.to_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.matches("<rect").count() >= 7);
    }

    #[test]
    fn alpha_one_domain() {
        let dom = build_alpha_one(3).unwrap();
        assert_eq!(dom.lower.len(), 2);
        assert!(build_alpha_one(4).is_err());
        // infinite mass must be flagged
        assert!(dom.mass_breakdown().is_err());
    }
}
