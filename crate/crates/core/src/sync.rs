//! Solving and certifying matching-interval endpoints.
//!
//! A candidate `(k, v)` is turned into the endpoint equations via the group
//! matrices of [`crate::words`]; each endpoint is the repelling fixed point
//! of an explicit hyperbolic element, converted back to a parameter value.
//! Solved intervals are only marked valid after the synchronization identity
//! has been verified at interior sample points.

use crate::error::{Error, Result};
use crate::interval::{landmarks, IntervalSpec};
use crate::mobius::{fixed_points, generators, FixedKind, GroupParams, Mobius};
use crate::words::{digit_word_large, digit_word_small, matrix_l_large, matrix_l_small, matrix_r_large, matrix_r_small, DigitWord, Word};

/// Tolerance for the synchronization identity at interior points.
pub const SYNC_TOL: f64 = 1e-9;

/// Tolerance for the delta certificates `l_S = frak b` and `r_{S+1} = l0`.
pub const DELTA_TOL: f64 = 1e-10;

/// A solved (and possibly certified) matching interval.
#[derive(Debug, Clone)]
pub struct SyncInterval {
    pub n: u32,
    /// Signed level: `k >= 1` is the small regime, `k <= -1` the large one.
    pub k: i64,
    pub v: Word,
    pub zeta: f64,
    pub eta: f64,
    /// Division point between the portions; large regime only.
    pub delta: Option<f64>,
    pub s_under: usize,
    pub s_bar: usize,
    /// Number of `(1,2)` digits in `bbar(-k, v)`; large regime only.
    pub e: usize,
    pub valid: bool,
}

impl SyncInterval {
    pub fn is_small(&self) -> bool {
        self.k > 0
    }

    /// Parameter interval `[lo, hi)` covered by this matching interval.
    pub fn range(&self) -> (f64, f64) {
        if self.is_small() {
            (self.zeta, self.eta)
        } else {
            (self.eta, self.zeta)
        }
    }

    pub fn contains(&self, alpha: f64) -> bool {
        let (lo, hi) = self.range();
        alpha >= lo && alpha < hi
    }

    /// CSV row `n,k,v,zeta,eta,delta,Sunder,Sbar,valid`.
    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.k.to_string(),
            self.v.to_string(),
            format!("{:.17e}", self.zeta),
            format!("{:.17e}", self.eta),
            self.delta.map(|d| format!("{d:.17e}")).unwrap_or_default(),
            self.s_under.to_string(),
            self.s_bar.to_string(),
            self.valid.to_string(),
        ]
    }

    pub fn csv_header() -> &'static [&'static str] {
        &["n", "k", "v", "zeta", "eta", "delta", "Sunder", "Sbar", "valid"]
    }
}

/// Extract the repelling fixed point of `m` whose converted parameter lies in
/// `(lo, hi)`; ambiguous (parabolic) classification is rejected.
fn repelling_alpha(m: &Mobius, convert: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    let fps = fixed_points(m);
    if fps.is_empty() {
        return Err(Error::Construction("endpoint element has no real fixed point".into()));
    }
    let mut candidates: Vec<f64> = Vec::new();
    for f in &fps {
        if f.kind == FixedKind::Parabolic {
            continue;
        }
        if f.kind == FixedKind::Repelling {
            let alpha = convert(f.x);
            if alpha > lo && alpha < hi {
                candidates.push(alpha);
            }
        }
    }
    match candidates.len() {
        1 => Ok(candidates[0]),
        0 => {
            if fps.iter().any(|f| f.kind == FixedKind::Parabolic) {
                Err(Error::Construction("fixed point classification ambiguous (parabolic)".into()))
            } else {
                Err(Error::Construction("no repelling fixed point converts into range".into()))
            }
        }
        _ => Err(Error::Construction("both fixed points convert into range".into())),
    }
}

/// Solve the small-regime interval `J_{k,v} = [zeta, eta)` and certify it.
pub fn solve_small(params: &GroupParams, k: i64, v: &Word) -> Result<SyncInterval> {
    if k < 1 {
        return Err(Error::InvalidCandidate {
            k,
            v: v.to_string(),
            reason: "small regime requires k >= 1".into(),
        });
    }
    if !v.is_candidate() {
        return Err(Error::InvalidWord("word must have an odd number of letters".into()));
    }
    let (gamma, _) = landmarks(params)?;
    let (a, _, _) = generators(params);
    let t = params.t;
    let r = matrix_r_small(params, k, v)?;
    let l = matrix_l_small(params, k, v)?;
    let reject = |reason: String| Error::InvalidCandidate { k, v: v.to_string(), reason };

    // zeta: A R_{k,v} fixes r0; eta: L_{k,v} fixes r0. In both cases alpha = x/t.
    let zeta = repelling_alpha(&a.compose(&r), |x| x / t, 0.0, gamma + 1e-12)
        .map_err(|e| reject(format!("zeta: {e}")))?;
    let eta = repelling_alpha(&l, |x| x / t, 0.0, gamma + 1e-12)
        .map_err(|e| reject(format!("eta: {e}")))?;
    if zeta >= eta {
        return Err(reject(format!("endpoints out of order: zeta={zeta}, eta={eta}")));
    }
    let s_bar = v.letter_sum() as usize;

    // Detect Sunder dynamically at the midpoint: the orbits of the interval
    // endpoints meet, T^{Sbar+1}(r0) = T^{Sunder+1}(l0).
    let mid = 0.5 * (zeta + eta);
    let spec = IntervalSpec::from_params(*params, mid);
    let target = spec.orbit(spec.r0, s_bar + 1)?.points[s_bar + 1];
    let cap = 64 * (s_bar + 2) * params.n as usize;
    let lorb = spec.orbit(spec.ell0, cap)?;
    let s_under = lorb
        .points
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, p)| (**p - target).abs() < SYNC_TOL)
        .map(|(i, _)| i - 1)
        .ok_or_else(|| reject("orbits of l0 and r0 do not meet".into()))?;

    let mut interval = SyncInterval {
        n: params.n,
        k,
        v: v.clone(),
        zeta,
        eta,
        delta: None,
        s_under,
        s_bar,
        e: 0,
        valid: false,
    };
    // Certify at three interior points.
    let mut ok = true;
    for f in [0.25, 0.5, 0.75] {
        let alpha = zeta + f * (eta - zeta);
        let rep = verify_sync(&interval, alpha)?;
        ok &= rep.passed();
    }
    interval.valid = ok;
    if !ok {
        return Err(reject("synchronization identity failed at an interior point".into()));
    }
    Ok(interval)
}

/// Solve the large-regime interval `J_{-k,v} = [eta, zeta)` with its division
/// point `delta`, and certify both portions. `k` is passed as a magnitude.
pub fn solve_large(params: &GroupParams, k: i64, v: &Word) -> Result<SyncInterval> {
    if k < 1 {
        return Err(Error::InvalidCandidate {
            k: -k,
            v: v.to_string(),
            reason: "large regime requires k >= 1".into(),
        });
    }
    if !v.is_candidate() {
        return Err(Error::InvalidWord("word must have an odd number of letters".into()));
    }
    let (gamma, _) = landmarks(params)?;
    let (a, c, _) = generators(params);
    let t = params.t;
    let reject = |reason: String| Error::InvalidCandidate { k: -k, v: v.to_string(), reason };
    let (bbar, e) = digit_word_large(k, v, params.n)?;
    let l = matrix_l_large(params, k, v)?;
    let r = matrix_r_large(params, k, v)?;

    // zeta: L fixes r0 (since A l0 = r0); eta: A C R fixes r0;
    // delta: C L A fixes l0, so alpha = x/t + 1 there.
    let zeta = repelling_alpha(&l, |x| x / t, gamma - 1e-12, 1.0 + 1e-12)
        .map_err(|e| reject(format!("zeta: {e}")))?;
    let eta = repelling_alpha(&a.compose(&c).compose(&r), |x| x / t, gamma - 1e-12, 1.0)
        .map_err(|e| reject(format!("eta: {e}")))?;
    let delta = repelling_alpha(&c.compose(&l).compose(&a), |x| x / t + 1.0, gamma - 1e-12, 1.0)
        .map_err(|e| reject(format!("delta: {e}")))?;
    if !(eta < delta && delta < zeta) {
        return Err(reject(format!(
            "endpoints out of order: eta={eta}, delta={delta}, zeta={zeta}"
        )));
    }
    let mut interval = SyncInterval {
        n: params.n,
        k: -k,
        v: v.clone(),
        zeta,
        eta,
        delta: Some(delta),
        s_under: v.letter_sum() as usize,
        s_bar: bbar.len(),
        e,
        valid: false,
    };
    let mut ok = true;
    for alpha in [
        eta + 0.3 * (delta - eta),
        eta + 0.7 * (delta - eta),
        delta + 0.4 * (zeta - delta),
        delta + 0.8 * (zeta - delta),
    ] {
        let rep = verify_sync(&interval, alpha)?;
        ok &= rep.passed();
    }
    // delta certificates: l_S(delta) = frak b and r_{Sbar+1}(delta) = l0.
    let spec = IntervalSpec::from_params(*params, delta);
    let lorb = spec.orbit(spec.ell0, interval.s_under)?;
    ok &= (lorb.points[interval.s_under] - spec.frak_b()).abs() < DELTA_TOL * (1.0 + spec.t());
    let rorb = spec.orbit(spec.r0, interval.s_bar + 1)?;
    ok &= (rorb.points[interval.s_bar + 1] - spec.ell0).abs() < DELTA_TOL * (1.0 + spec.t());
    interval.valid = ok;
    if !ok {
        return Err(reject("synchronization identity failed at an interior point".into()));
    }
    Ok(interval)
}

/// Status of a synchronization check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncStatus {
    Pass,
    Fail,
    /// An orbit was truncated before the meeting step; never a silent pass.
    Inconclusive,
}

/// Result of verifying the synchronization identity at one parameter.
#[derive(Debug, Clone)]
pub struct SyncReport {
    pub alpha: f64,
    /// `T^{Sunder+1}(l0)`.
    pub lhs: f64,
    /// The matching orbit point of `r0`.
    pub rhs: f64,
    pub diff: f64,
    pub digits_match: bool,
    pub status: SyncStatus,
}

impl SyncReport {
    pub fn passed(&self) -> bool {
        self.status == SyncStatus::Pass && self.digits_match
    }
}

/// Check the synchronization identity and the predicted digit prefixes at
/// `alpha`, which must lie strictly inside the interval.
pub fn verify_sync(interval: &SyncInterval, alpha: f64) -> Result<SyncReport> {
    let params = crate::mobius::group_params(interval.n as i64)?;
    let spec = IntervalSpec::from_params(params, alpha);
    let (lo, hi) = interval.range();
    if !(alpha > lo - 1e-15 && alpha < hi) {
        return Err(Error::AlphaOutOfRange { alpha });
    }
    let su = interval.s_under;
    let sb = interval.s_bar;
    let steps_r = if interval.is_small() {
        sb + 1
    } else {
        // one extra step on the right portion
        let delta = interval.delta.expect("large interval carries delta");
        if alpha < delta {
            sb + 1
        } else {
            sb + 2
        }
    };
    let lorb = spec.orbit(spec.ell0, su + 1)?;
    let rorb = spec.orbit(spec.r0, steps_r)?;
    if lorb.truncated || rorb.truncated {
        return Ok(SyncReport {
            alpha,
            lhs: f64::NAN,
            rhs: f64::NAN,
            diff: f64::NAN,
            digits_match: false,
            status: SyncStatus::Inconclusive,
        });
    }
    let lhs = lorb.points[su + 1];
    let rhs = rorb.points[steps_r];
    let diff = (lhs - rhs).abs();

    // Digit-prefix predictions: dbar(k,v) for r0 in the small regime;
    // dunder(-k,v) for l0 plus bbar(-k,v) for r0 in the large regime.
    let digits_match = if interval.is_small() {
        match digit_word_small(interval.k, &interval.v)? {
            DigitWord::Simplified(expect) => expect
                .iter()
                .zip(rorb.digits.iter())
                .all(|(e, d)| d.l == 1 && d.k == *e),
            _ => unreachable!(),
        }
    } else {
        let k = -interval.k;
        let mut ok = true;
        // dunder(-k, v) = (-k)^{c1}, (-k-1)^{d1}, ..., (-k)^{cs}
        let mut expect_l: Vec<i64> = Vec::new();
        for (i, &p) in interval.v.letters.iter().enumerate() {
            let e = if i % 2 == 0 { -k } else { -k - 1 };
            expect_l.extend(std::iter::repeat(e).take(p as usize));
        }
        ok &= expect_l
            .iter()
            .zip(lorb.digits.iter())
            .all(|(e, d)| d.l == 1 && d.k == *e);
        let (bbar, _) = digit_word_large(k, &interval.v, interval.n)?;
        if let DigitWord::Full(expect_r) = bbar {
            ok &= expect_r.iter().zip(rorb.digits.iter()).all(|(e, d)| e == d);
        }
        ok
    };

    let status = if diff < SYNC_TOL * (1.0 + spec.t()) {
        SyncStatus::Pass
    } else {
        SyncStatus::Fail
    };
    Ok(SyncReport { alpha, lhs, rhs, diff, digits_match, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobius::group_params;
    use crate::words::order_words;
    use std::cmp::Ordering;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn solve_small_k1_v1_n3() {
        let p = group_params(3).unwrap();
        let iv = solve_small(&p, 1, &w("1")).unwrap();
        let s21 = 21f64.sqrt();
        assert!((iv.zeta - (5.0 - s21) / 4.0).abs() < 1e-13);
        assert!((iv.eta - (-1.0 + s21) / 20.0).abs() < 1e-13);
        assert_eq!(iv.s_under, 4);
        assert_eq!(iv.s_bar, 1);
        assert!(iv.valid);
        // r0(zeta) from the worked example
        assert!((iv.zeta * 2.0 - (5.0 - s21) / 2.0).abs() < 1e-13);
    }

    #[test]
    fn solve_large_k1_v1_n3() {
        let p = group_params(3).unwrap();
        let iv = solve_large(&p, 1, &w("1")).unwrap();
        let s5 = 5f64.sqrt();
        assert!((iv.eta - (3.0 - s5) / 4.0).abs() < 1e-13);
        assert!((iv.delta.unwrap() - (5.0 - s5) / 4.0).abs() < 1e-13);
        assert!((iv.zeta - (1.0 + s5) / 4.0).abs() < 1e-13);
        assert_eq!(iv.s_under, 1);
        assert_eq!(iv.s_bar, 0);
        assert!(iv.valid);
    }

    #[test]
    fn solve_large_k2_v1_n3() {
        let p = group_params(3).unwrap();
        let iv = solve_large(&p, 2, &w("1")).unwrap();
        // frozen from an independent high-precision computation
        assert!((iv.eta - 0.820871215252208).abs() < 1e-12);
        assert!((iv.delta.unwrap() - 0.868118692087086).abs() < 1e-12);
        assert!((iv.zeta - 0.895643923739405).abs() < 1e-12);
        assert_eq!(iv.s_under, 1);
        assert_eq!(iv.s_bar, 2);
        assert_eq!(iv.e, 1);
        // the acceptance pair 0.86 / 0.87 straddles delta
        assert!(0.86 < iv.delta.unwrap() && iv.delta.unwrap() < 0.87);
    }

    #[test]
    fn verify_sync_small_interior() {
        let p = group_params(3).unwrap();
        let iv = solve_small(&p, 1, &w("1")).unwrap();
        let rep = verify_sync(&iv, 0.14).unwrap();
        assert!(rep.passed());
        assert!(rep.diff < 1e-9);
    }

    #[test]
    fn verify_sync_large_two_cases() {
        let p = group_params(3).unwrap();
        let iv = solve_large(&p, 2, &w("1")).unwrap();
        // left of delta: l_{1+S} = r_{1+Sbar}; right of delta: one step more
        for alpha in [0.86, 0.87] {
            let rep = verify_sync(&iv, alpha).unwrap();
            assert!(rep.passed(), "alpha = {alpha}: {rep:?}");
        }
    }

    #[test]
    fn endpoint_orbit_meeting_invariants() {
        // r1(eta_{k,v}) = r0(zeta_{k,v}) for length-one v, and
        // l0(eta) is the second smallest point of the zeta-orbit of l0.
        for n in [3i64, 4, 5] {
            let p = group_params(n).unwrap();
            for k in 1..=3 {
                let iv = solve_small(&p, k, &w("1")).unwrap();
                let spec_e = IntervalSpec::from_params(p, iv.eta);
                let spec_z = IntervalSpec::from_params(p, iv.zeta);
                let r1_eta = spec_e.orbit(spec_e.r0, 1).unwrap().points[1];
                assert!(
                    (r1_eta - spec_z.r0).abs() < 1e-10,
                    "n={n} k={k}: r1(eta) != r0(zeta)"
                );
                let zorb = spec_z.orbit(spec_z.ell0, iv.s_under).unwrap();
                let mut pts = zorb.points.clone();
                pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                assert!(
                    (pts[1] - spec_e.ell0).abs() < 1e-10,
                    "n={n} k={k}: l0(eta) != second smallest of zeta-orbit"
                );
            }
        }
    }

    #[test]
    fn certified_words_are_palindromes_and_self_dominant() {
        let p = group_params(3).unwrap();
        for s in ["1", "2", "3", "1 1 1"] {
            let v = w(s);
            if let Ok(iv) = solve_small(&p, 1, &v) {
                assert!(iv.valid);
                assert!(v.is_palindrome(), "certified word {v} not a palindrome");
                for j in 1..v.letters.len() {
                    let sh = v.shift(j).unwrap();
                    assert_ne!(
                        order_words(&sh, &v),
                        Ordering::Greater,
                        "certified word {v} not self-dominant"
                    );
                }
            }
        }
    }

    #[test]
    fn bad_candidates_are_rejected() {
        let p = group_params(3).unwrap();
        // even-length letter lists are not matching candidates
        assert!(solve_small(&p, 1, &w("1 2")).is_err());
        // k = 1 large regime at n = 3 admits only v = 1
        assert!(solve_large(&p, 1, &w("2")).is_err());
    }

    #[test]
    fn matrix_word_consistency_on_interval() {
        // T^{Sbar}(r0) = R_{k,v} r0 inside J_{k,v} (small), and
        // l_{Sunder} = L_{-k,v} A l0 inside J_{-k,v} (large).
        let p = group_params(3).unwrap();
        let iv = solve_small(&p, 1, &w("1")).unwrap();
        let r = matrix_r_small(&p, 1, &w("1")).unwrap();
        for f in [0.2, 0.5, 0.8] {
            let alpha = iv.zeta + f * (iv.eta - iv.zeta);
            let spec = IntervalSpec::from_params(p, alpha);
            let got = spec.orbit(spec.r0, iv.s_bar).unwrap().points[iv.s_bar];
            assert!((got - r.apply_f(spec.r0)).abs() < 1e-9);
        }
        let iv = solve_large(&p, 2, &w("1")).unwrap();
        let l = matrix_l_large(&p, 2, &w("1")).unwrap();
        let (a, _, _) = generators(&p);
        for f in [0.2, 0.5, 0.8] {
            let (lo, hi) = iv.range();
            let alpha = lo + f * (hi - lo);
            let spec = IntervalSpec::from_params(p, alpha);
            let got = spec.orbit(spec.ell0, iv.s_under).unwrap().points[iv.s_under];
            let want = l.compose(&a).apply_f(spec.ell0);
            assert!((got - want).abs() < 1e-9);
        }
    }
}
