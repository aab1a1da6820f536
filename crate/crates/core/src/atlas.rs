//! Catalogues of certified matching intervals and the parameter scan.
//!
//! Candidate pairs `(k, v)` are enumerated from a letter-sum budget (and
//! optionally by extending certified words), then every candidate must pass
//! the solver's certificate before it enters the atlas. Scanning resolves
//! each grid parameter against the atlas and falls back to the sweep when
//! asked to.

use crate::domain::{build_on_interval, Domain};
use crate::error::{Error, Result};
use crate::interval::IntervalSpec;
use crate::measure::{mu_domain, rohlin_integral, vol_n};
use crate::mobius::GroupParams;
use crate::sweep::{build_sweep, SweepOptions};
use crate::sync::{solve_large, solve_small, SyncInterval};
use crate::words::{theta, Word};
use rayon::prelude::*;

/// Enumeration budget for atlas generation.
#[derive(Debug, Clone)]
pub struct AtlasOptions {
    /// Levels `k = 1..=k_max` in both regimes.
    pub k_max: i64,
    /// Total letter sum of enumerated words.
    pub letter_sum_max: u64,
    /// Maximum number of letters.
    pub max_letters: usize,
    /// Also try `Theta_q` extensions (q = 1, 2) of certified words.
    pub extend_theta: bool,
}

impl Default for AtlasOptions {
    fn default() -> Self {
        AtlasOptions { k_max: 24, letter_sum_max: 6, max_letters: 5, extend_theta: true }
    }
}

/// A collection of certified matching intervals for one group index.
#[derive(Debug, Clone)]
pub struct Atlas {
    pub n: u32,
    pub intervals: Vec<SyncInterval>,
}

fn enumerate_words(letter_sum_max: u64, max_letters: usize) -> Vec<Word> {
    let mut out = Vec::new();
    fn rec(cur: &mut Vec<u64>, budget: u64, max_letters: usize, out: &mut Vec<Word>) {
        if cur.len() % 2 == 1 {
            out.push(Word::new(cur.clone()).expect("positive letters"));
        }
        if cur.len() >= max_letters {
            return;
        }
        for l in 1..=budget {
            cur.push(l);
            rec(cur, budget - l, max_letters, out);
            cur.pop();
        }
    }
    rec(&mut Vec::new(), letter_sum_max, max_letters, &mut out);
    out
}

impl Atlas {
    /// Enumerate, solve and certify candidates.
    pub fn generate(params: &GroupParams, opts: &AtlasOptions) -> Atlas {
        let words = enumerate_words(opts.letter_sum_max, opts.max_letters);
        let mut jobs: Vec<(i64, Word)> = Vec::new();
        for k in 1..=opts.k_max {
            for v in &words {
                jobs.push((k, v.clone()));
                jobs.push((-k, v.clone()));
            }
        }
        let mut intervals: Vec<SyncInterval> = jobs
            .par_iter()
            .filter_map(|(k, v)| {
                if *k > 0 {
                    solve_small(params, *k, v).ok()
                } else {
                    solve_large(params, -*k, v).ok()
                }
            })
            .collect();
        if opts.extend_theta {
            let seeds: Vec<SyncInterval> = intervals.clone();
            let extra: Vec<SyncInterval> = seeds
                .par_iter()
                .flat_map_iter(|iv| {
                    let mut found = Vec::new();
                    for q in 1..=2u64 {
                        if let Ok(w) = theta(&iv.v, q, None) {
                            let solved = if iv.k > 0 {
                                solve_small(params, iv.k, &w)
                            } else {
                                solve_large(params, -iv.k, &w)
                            };
                            if let Ok(s) = solved {
                                found.push(s);
                            }
                        }
                    }
                    found
                })
                .collect();
            intervals.extend(extra);
        }
        // drop duplicates (same range solved from different candidates)
        intervals.sort_by(|a, b| a.range().0.partial_cmp(&b.range().0).unwrap());
        intervals.dedup_by(|a, b| {
            (a.range().0 - b.range().0).abs() < 1e-13 && (a.range().1 - b.range().1).abs() < 1e-13
        });
        Atlas { n: params.n, intervals }
    }

    /// The certified interval containing `alpha`, if any. Exact endpoints of
    /// an interval resolve to that interval.
    pub fn resolve(&self, alpha: f64) -> Option<&SyncInterval> {
        self.intervals
            .iter()
            .find(|iv| iv.contains(alpha) || (alpha - iv.range().1).abs() < 1e-13)
    }

    /// Fraction of `(0, 1)` covered by the certified intervals
    /// (an empirical lower bound for the full-measure theorem).
    pub fn covered_fraction(&self) -> f64 {
        let mut ranges: Vec<(f64, f64)> = self.intervals.iter().map(|iv| iv.range()).collect();
        ranges.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut covered = 0.0;
        let mut cursor = 0.0;
        for (a, b) in ranges {
            let a = a.max(cursor);
            if b > a {
                covered += b - a;
                cursor = b;
            }
        }
        covered
    }
}

/// One row of the scan table.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub n: u32,
    pub alpha: f64,
    pub kind: String,
    pub mass: f64,
    pub rohlin_integral: f64,
    pub entropy: f64,
    pub product: f64,
    pub residual_vs_vol: f64,
    pub quad_error: f64,
    pub residual_mass: Option<f64>,
    pub error: Option<String>,
}

impl ScanRow {
    pub fn csv_header() -> &'static [&'static str] {
        &[
            "n",
            "alpha",
            "kind",
            "mass",
            "rohlin_integral",
            "entropy",
            "product",
            "residual_vs_vol",
            "quad_error",
            "residual_mass",
            "error",
        ]
    }

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            format!("{:.17e}", self.alpha),
            self.kind.clone(),
            format!("{:.17e}", self.mass),
            format!("{:.17e}", self.rohlin_integral),
            format!("{:.17e}", self.entropy),
            format!("{:.17e}", self.product),
            format!("{:.3e}", self.residual_vs_vol),
            format!("{:.3e}", self.quad_error),
            self.residual_mass.map(|r| format!("{r:.3e}")).unwrap_or_default(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

/// Build the domain for `alpha` using the atlas; falls back to the sweep when
/// permitted, and reports an error row otherwise.
pub fn domain_for_alpha(
    params: &GroupParams,
    atlas: &Atlas,
    alpha: f64,
    allow_sweep: bool,
    sweep_opts: &SweepOptions,
) -> Result<Domain> {
    if let Some(iv) = atlas.resolve(alpha) {
        return build_on_interval(iv, alpha);
    }
    if allow_sweep {
        let spec = IntervalSpec::from_params(*params, alpha);
        return build_sweep(&spec, sweep_opts);
    }
    Err(Error::UnsupportedCase(format!(
        "alpha = {alpha} is not inside a certified interval; pass --sweep to approximate"
    )))
}

/// Scan a parameter grid; failures are recorded per row and the scan
/// continues. Rows are computed in parallel in deterministic order.
pub fn scan(
    params: &GroupParams,
    atlas: &Atlas,
    alphas: &[f64],
    allow_sweep: bool,
    sweep_opts: &SweepOptions,
) -> Vec<ScanRow> {
    let vol = vol_n(params.n as i64).expect("valid n");
    alphas
        .par_iter()
        .map(|&alpha| {
            let base = ScanRow {
                n: params.n,
                alpha,
                kind: String::new(),
                mass: f64::NAN,
                rohlin_integral: f64::NAN,
                entropy: f64::NAN,
                product: f64::NAN,
                residual_vs_vol: f64::NAN,
                quad_error: f64::NAN,
                residual_mass: None,
                error: None,
            };
            match domain_for_alpha(params, atlas, alpha, allow_sweep, sweep_opts) {
                Ok(dom) => match (mu_domain(&dom), rohlin_integral(&dom)) {
                    (Ok(m), Ok(er)) => ScanRow {
                        kind: format!("{:?}", dom.kind),
                        mass: m.mass,
                        rohlin_integral: er.integral,
                        entropy: er.entropy,
                        product: er.entropy * m.mass,
                        residual_vs_vol: er.integral - vol,
                        quad_error: er.quad_error,
                        residual_mass: dom.residual_mass,
                        ..base
                    },
                    (Err(e), _) | (_, Err(e)) => ScanRow { error: Some(e.to_string()), ..base },
                },
                Err(e) => ScanRow { error: Some(e.to_string()), ..base },
            }
        })
        .collect()
}

/// Parse an `--alphas start:end:count` grid.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::UnsupportedCase(format!(
            "grid must be start:end:count, got '{s}'"
        )));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| Error::UnsupportedCase(format!("bad grid start '{}'", parts[0])))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| Error::UnsupportedCase(format!("bad grid end '{}'", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| Error::UnsupportedCase(format!("bad grid count '{}'", parts[2])))?;
    if count < 2 || !(b > a) {
        return Err(Error::UnsupportedCase("grid needs end > start and count >= 2".into()));
    }
    Ok((0..count)
        .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
        .collect())
}
