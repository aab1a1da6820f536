//! Extended-precision endpoint solving and orbit verification.
//!
//! Long matching words and large group indices condition the fixed-point
//! equations badly in 64-bit arithmetic. This module re-runs the endpoint
//! solve and the synchronization check in arbitrary-precision binary floats
//! (significand of at least 128 bits; default 192) and reports residuals
//! evaluated at that precision. Results come back rounded to `f64`.

use crate::error::{Error, Result};
use crate::sync::SyncInterval;
use crate::words::Word;
use astro_float::{BigFloat, Consts, RoundingMode};

const RM: RoundingMode = RoundingMode::ToEven;

/// Minimum accepted significand size in bits.
pub const MIN_BITS: usize = 128;

struct Ctx {
    p: usize,
    consts: Consts,
}

impl Ctx {
    fn new(p: usize) -> Result<Ctx> {
        let consts = Consts::new()
            .map_err(|e| Error::UnsupportedCase(format!("extended precision unavailable: {e:?}")))?;
        Ok(Ctx { p, consts })
    }

    fn from_f64(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }

    fn from_i64(&self, x: i64) -> BigFloat {
        BigFloat::from_i64(x, self.p)
    }

    /// `t = 1 + 2 cos(pi / n)` at working precision.
    fn t_of(&mut self, n: u32) -> BigFloat {
        let pi = self.consts.pi(self.p, RM);
        let angle = pi.div(&self.from_i64(n as i64), self.p, RM);
        let c = angle.cos(self.p, RM, &mut self.consts);
        self.from_i64(1).add(&c.mul(&self.from_i64(2), self.p, RM), self.p, RM)
    }
}

fn to_f64(x: &BigFloat) -> f64 {
    // round-trip through the decimal formatter at ample precision
    format!("{x}").parse::<f64>().unwrap_or(f64::NAN)
}

#[derive(Clone, Debug)]
struct XMat {
    a: BigFloat,
    b: BigFloat,
    c: BigFloat,
    d: BigFloat,
}

impl XMat {
    fn identity(cx: &Ctx) -> XMat {
        XMat {
            a: cx.from_i64(1),
            b: cx.from_i64(0),
            c: cx.from_i64(0),
            d: cx.from_i64(1),
        }
    }

    fn compose(&self, o: &XMat, cx: &Ctx) -> XMat {
        let p = cx.p;
        let mul = |x: &BigFloat, y: &BigFloat| x.mul(y, p, RM);
        let add = |x: &BigFloat, y: &BigFloat| x.add(y, p, RM);
        XMat {
            a: add(&mul(&self.a, &o.a), &mul(&self.b, &o.c)),
            b: add(&mul(&self.a, &o.b), &mul(&self.b, &o.d)),
            c: add(&mul(&self.c, &o.a), &mul(&self.d, &o.c)),
            d: add(&mul(&self.c, &o.b), &mul(&self.d, &o.d)),
        }
    }

    fn inverse(&self, cx: &Ctx) -> XMat {
        // group elements have det 1; use the adjugate scaled by 1/det
        let p = cx.p;
        let det = self.a.mul(&self.d, p, RM).sub(&self.b.mul(&self.c, p, RM), p, RM);
        XMat {
            a: self.d.div(&det, p, RM),
            b: self.b.neg().div(&det, p, RM),
            c: self.c.neg().div(&det, p, RM),
            d: self.a.div(&det, p, RM),
        }
    }

    fn apply(&self, x: &BigFloat, cx: &Ctx) -> BigFloat {
        let p = cx.p;
        let num = self.a.mul(x, p, RM).add(&self.b, p, RM);
        let den = self.c.mul(x, p, RM).add(&self.d, p, RM);
        num.div(&den, p, RM)
    }

    fn pow(&self, k: i64, cx: &Ctx) -> XMat {
        let base = if k >= 0 { self.clone() } else { self.inverse(cx) };
        let mut out = XMat::identity(cx);
        for _ in 0..k.unsigned_abs() {
            out = out.compose(&base, cx);
        }
        out
    }
}

fn generators_x(cx: &mut Ctx, n: u32) -> (XMat, XMat) {
    let t = cx.t_of(n);
    let a = XMat {
        a: cx.from_i64(1),
        b: t,
        c: cx.from_i64(0),
        d: cx.from_i64(1),
    };
    let c = XMat {
        a: cx.from_i64(-1),
        b: cx.from_i64(1),
        c: cx.from_i64(-1),
        d: cx.from_i64(0),
    };
    (a, c)
}

fn word_matrix_x(cx: &Ctx, a: &XMat, c: &XMat, k: i64, v: &Word, large: bool) -> XMat {
    let kk = if large { -k } else { k };
    let kk2 = if large { -k - 1 } else { k + 1 };
    let m1 = a.pow(kk, cx).compose(c, cx);
    let m2 = a.pow(kk2, cx).compose(c, cx);
    let mut out = XMat::identity(cx);
    for (i, &p) in v.letters.iter().rev().enumerate() {
        let m = if i % 2 == 0 { &m1 } else { &m2 };
        for _ in 0..p {
            out = out.compose(m, cx);
        }
    }
    out
}

/// Repelling fixed point of a hyperbolic matrix at extended precision.
fn repelling_fixed_point(m: &XMat, cx: &Ctx) -> Result<BigFloat> {
    let p = cx.p;
    // c x^2 + (d - a) x - b = 0
    let two_c = m.c.mul(&cx.from_i64(2), p, RM);
    if m.c.is_zero() {
        return Err(Error::Construction("affine endpoint element".into()));
    }
    let dma = m.d.sub(&m.a, p, RM);
    let disc = dma
        .mul(&dma, p, RM)
        .add(&cx.from_i64(4).mul(&m.b.mul(&m.c, p, RM), p, RM), p, RM);
    if disc.is_negative() {
        return Err(Error::Construction("elliptic endpoint element".into()));
    }
    let s = disc.sqrt(p, RM);
    let det = m.a.mul(&m.d, p, RM).sub(&m.b.mul(&m.c, p, RM), p, RM);
    let mut best: Option<BigFloat> = None;
    for root in [
        dma.neg().add(&s, p, RM).div(&two_c, p, RM),
        dma.neg().sub(&s, p, RM).div(&two_c, p, RM),
    ] {
        let den = m.c.mul(&root, p, RM).add(&m.d, p, RM);
        let dv = det.div(&den.mul(&den, p, RM), p, RM).abs();
        if dv.partial_cmp(&BigFloat::from_f64(1.0, p)) == Some(std::cmp::Ordering::Greater) {
            best = Some(root);
        }
    }
    best.ok_or_else(|| Error::Construction("no repelling fixed point".into()))
}

/// Extended-precision endpoint solve; residuals are of the defining fixed
/// point equations, evaluated at working precision.
#[derive(Debug, Clone)]
pub struct XEndpoints {
    pub zeta: f64,
    pub eta: f64,
    pub delta: Option<f64>,
    pub bits: usize,
    /// Largest fixed-point residual `|M x - x|` over the solved endpoints.
    pub residual: f64,
}

/// Solve the endpoint equations of `(k, v)` (small regime `k > 0`, large
/// regime `k < 0`) with a significand of `bits >= 128`.
pub fn solve_endpoints(n: u32, k: i64, v: &Word, bits: usize) -> Result<XEndpoints> {
    if bits < MIN_BITS {
        return Err(Error::Precondition(format!(
            "extended precision requires at least {MIN_BITS} significand bits"
        )));
    }
    let mut cx = Ctx::new(bits)?;
    let (a, c) = generators_x(&mut cx, n);
    let t = cx.t_of(n);
    let p = bits;
    let mut max_res = 0.0f64;
    let mut fixed_alpha = |m: &XMat, shift: bool, cx: &Ctx| -> Result<f64> {
        let x = repelling_fixed_point(m, cx)?;
        let res = m.apply(&x, cx).sub(&x, p, RM).abs();
        max_res = max_res.max(to_f64(&res));
        let alpha = x.div(&t, p, RM);
        let alpha = if shift {
            alpha.add(&cx.from_i64(1), p, RM)
        } else {
            alpha
        };
        Ok(to_f64(&alpha))
    };
    if k > 0 {
        let r = word_matrix_x(&cx, &a, &c, k, v, false);
        let l = c.inverse(&cx).compose(&a, &cx).compose(&c, &cx).compose(&r, &cx);
        let zeta = fixed_alpha(&a.compose(&r, &cx), false, &cx)?;
        let eta = fixed_alpha(&l, false, &cx)?;
        Ok(XEndpoints { zeta, eta, delta: None, bits, residual: max_res })
    } else {
        let km = -k;
        let l = word_matrix_x(&cx, &a, &c, km, v, true).compose(&a.inverse(&cx), &cx);
        let r = c.compose(&a.inverse(&cx), &cx).compose(&c, &cx).compose(&l, &cx);
        let zeta = fixed_alpha(&l, false, &cx)?;
        let eta = fixed_alpha(&a.compose(&c, &cx).compose(&r, &cx), false, &cx)?;
        let delta = fixed_alpha(&c.compose(&l, &cx).compose(&a, &cx), true, &cx)?;
        Ok(XEndpoints { zeta, eta, delta: Some(delta), bits, residual: max_res })
    }
}

/// One step of the interval map at extended precision.
fn step_x(
    cx: &mut Ctx,
    t: &BigFloat,
    ell0: &BigFloat,
    r0: &BigFloat,
    x: &BigFloat,
) -> Result<BigFloat> {
    let p = cx.p;
    let one = cx.from_i64(1);
    let b = one.div(&one.sub(ell0, p, RM), p, RM);
    let y = if x.partial_cmp(&b) == Some(std::cmp::Ordering::Less) {
        x.sub(&one, p, RM).div(x, p, RM)
    } else {
        one.neg().div(&x.sub(&one, p, RM), p, RM)
    };
    let mut k = r0.sub(&y, p, RM).div(t, p, RM).floor();
    for _ in 0..6 {
        let z = y.add(&k.mul(t, p, RM), p, RM);
        if z.partial_cmp(r0) != Some(std::cmp::Ordering::Less) {
            k = k.sub(&one, p, RM);
        } else if z.partial_cmp(ell0) == Some(std::cmp::Ordering::Less) {
            k = k.add(&one, p, RM);
        } else {
            return Ok(z);
        }
    }
    Err(Error::SingularPoint(to_f64(x)))
}

/// Fully certified interval solve at extended precision, for candidates the
/// 64-bit path cannot resolve (long words, large `n`). The synchronization
/// identity is checked at interior points with a residual threshold far
/// below anything 64-bit rounding could fake.
pub fn solve_interval_x(n: u32, k: i64, v: &Word, bits: usize) -> Result<SyncInterval> {
    if bits < MIN_BITS {
        return Err(Error::Precondition(format!(
            "extended precision requires at least {MIN_BITS} significand bits"
        )));
    }
    let xe = solve_endpoints(n, k, v, bits)?;
    let mut cx = Ctx::new(bits)?;
    let t = cx.t_of(n);
    let p = bits;
    // pass tolerance: comfortably above the working precision, far below f64
    let tol = BigFloat::from_f64(2.0, p).pow(
        &BigFloat::from_i64(-(bits as i64) / 2, p),
        p,
        RM,
        &mut cx.consts,
    );
    let (s_under, s_bar, e) = if k > 0 {
        let s_bar = v.letter_sum() as usize;
        // detect Sunder at the midpoint by the orbit meeting
        let mid = cx
            .from_f64(xe.zeta)
            .add(&cx.from_f64(xe.eta), p, RM)
            .div(&cx.from_i64(2), p, RM);
        let ell0 = mid.sub(&cx.from_i64(1), p, RM).mul(&t, p, RM);
        let r0 = mid.mul(&t, p, RM);
        let mut target = r0.clone();
        for _ in 0..s_bar + 1 {
            target = step_x(&mut cx, &t, &ell0, &r0, &target)?;
        }
        let cap = 96 * (s_bar + 2) * n as usize;
        let mut x = ell0.clone();
        let mut s_under = None;
        for m in 1..=cap {
            x = step_x(&mut cx, &t, &ell0, &r0, &x)?;
            if x.sub(&target, p, RM).abs().partial_cmp(&tol) == Some(std::cmp::Ordering::Less) {
                s_under = Some(m - 1);
                break;
            }
        }
        let s_under = s_under.ok_or_else(|| Error::InvalidCandidate {
            k,
            v: v.to_string(),
            reason: "orbits do not meet at extended precision".into(),
        })?;
        (s_under, s_bar, 0usize)
    } else {
        let (bbar, e) = crate::words::digit_word_large(-k, v, n)?;
        (v.letter_sum() as usize, bbar.len(), e)
    };
    let mut iv = SyncInterval {
        n,
        k,
        v: v.clone(),
        zeta: xe.zeta,
        eta: xe.eta,
        delta: xe.delta,
        s_under,
        s_bar,
        e,
        valid: false,
    };
    // certify at interior points of each portion
    let (lo, hi) = iv.range();
    let probes: Vec<f64> = if k > 0 {
        vec![lo + 0.25 * (hi - lo), lo + 0.5 * (hi - lo), lo + 0.75 * (hi - lo)]
    } else {
        let d = iv.delta.expect("large interval has delta");
        vec![lo + 0.5 * (d - lo), d + 0.4 * (hi - d), d + 0.8 * (hi - d)]
    };
    let pass_tol = 2f64.powi(-(bits as i32) / 2 + 8);
    for alpha in probes {
        let diff = verify_sync_x(&iv, alpha, bits)?;
        if !(diff < pass_tol) {
            return Err(Error::InvalidCandidate {
                k,
                v: v.to_string(),
                reason: format!("extended-precision synchronization residual {diff:e}"),
            });
        }
    }
    iv.valid = true;
    Ok(iv)
}

/// Re-verify the synchronization identity at extended precision: returns
/// `|T^{S+1}(l0) - T^{Sbar+1 or +2}(r0)|` evaluated with `bits` of mantissa.
pub fn verify_sync_x(iv: &SyncInterval, alpha: f64, bits: usize) -> Result<f64> {
    if bits < MIN_BITS {
        return Err(Error::Precondition(format!(
            "extended precision requires at least {MIN_BITS} significand bits"
        )));
    }
    let mut cx = Ctx::new(bits)?;
    let p = bits;
    let t = cx.t_of(iv.n);
    let alpha_x = cx.from_f64(alpha);
    let one = cx.from_i64(1);
    let ell0 = alpha_x.sub(&one, p, RM).mul(&t, p, RM);
    let r0 = alpha_x.mul(&t, p, RM);
    let steps_r = if iv.is_small() {
        iv.s_bar + 1
    } else if alpha < iv.delta.expect("large interval has delta") {
        iv.s_bar + 1
    } else {
        iv.s_bar + 2
    };
    let mut lx = ell0.clone();
    for _ in 0..iv.s_under + 1 {
        lx = step_x(&mut cx, &t, &ell0, &r0, &lx)?;
    }
    let mut rx = r0.clone();
    for _ in 0..steps_r {
        rx = step_x(&mut cx, &t, &ell0, &r0, &rx)?;
    }
    Ok(to_f64(&lx.sub(&rx, p, RM).abs()))
}
