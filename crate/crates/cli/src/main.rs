//! Command-line front end: solve matching intervals, build and render
//! domains, compute masses and entropy integrals, scan parameter grids and
//! check the volume identity.

use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use tricf_core::atlas::{self, Atlas, AtlasOptions};
use tricf_core::domain::{build_alpha_one, build_on_interval, Domain};
use tricf_core::error::Error;
use tricf_core::measure::{mu_domain, rohlin_integral, vol_n};
use tricf_core::mobius::{group_params, GroupParams};
use tricf_core::planar::{certify, BijectivityOptions};
use tricf_core::sweep::SweepOptions;
use tricf_core::sync::{solve_large, solve_small, SyncInterval};
use tricf_core::words::Word;
use tricf_core::xprec;

#[derive(Parser)]
#[command(name = "tricf", version, about, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve and certify the matching interval of a candidate (k, v)
    Sync(SyncArgs),
    /// Construct the planar domain at a parameter and export it
    Domain(DomainArgs),
    /// Mass, entropy integral and the volume residual at one parameter
    Entropy(EntropyArgs),
    /// Scan a parameter grid into a CSV table
    Scan(ScanArgs),
    /// Check the entropy-times-mass volume identity at one parameter
    Conjecture(EntropyArgs),
}

#[derive(Args)]
struct SyncArgs {
    /// Group index (n >= 3)
    #[arg(long)]
    n: i64,
    /// Level: positive for the small regime, negative for the large one
    #[arg(long, allow_hyphen_values = true)]
    k: i64,
    /// Matching word, space-separated positive integers, e.g. "1" or "2 1 2"
    #[arg(long)]
    v: String,
    /// Significand bits; 64 = double precision, >= 128 = extended
    #[arg(long, default_value_t = 64)]
    precision: usize,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct DomainArgs {
    #[arg(long)]
    n: i64,
    /// Parameter in (0,1), or symbolic `zeta:k,v` / `eta:k,v` / `delta:k,v`
    #[arg(long)]
    alpha: String,
    /// Approximate by the seed sweep when no certified interval contains alpha
    #[arg(long, default_value_t = false)]
    sweep: bool,
    /// Run the bijectivity certification and print the report
    #[arg(long, default_value_t = false)]
    verify: bool,
    /// Sample count for --verify
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// RNG seed for --verify
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: json-record or svg
    #[arg(long, default_value = "json-record")]
    format: String,
}

#[derive(Args)]
struct EntropyArgs {
    #[arg(long)]
    n: i64,
    #[arg(long)]
    alpha: String,
    #[arg(long, default_value_t = false)]
    sweep: bool,
    /// Significand bits for endpoint solving (>= 128 enables extended mode)
    #[arg(long, default_value_t = 64)]
    precision: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    n: i64,
    /// Grid start:end:count
    #[arg(long)]
    alphas: String,
    /// Allow sweep fallback rows
    #[arg(long, default_value_t = false)]
    sweep: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<(), Box<dyn std::error::Error>> {
    match Cli::parse().cmd {
        Cmd::Sync(a) => cmd_sync(a),
        Cmd::Domain(a) => cmd_domain(a),
        Cmd::Entropy(a) => cmd_entropy(a, false),
        Cmd::Conjecture(a) => cmd_entropy(a, true),
        Cmd::Scan(a) => cmd_scan(a),
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, std::io::Error> {
    Ok(match out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout()),
    })
}

fn cmd_sync(a: SyncArgs) -> Result<(), Box<dyn std::error::Error>> {
    let params = group_params(a.n)?;
    let v: Word = a.v.parse()?;
    let iv = if a.precision >= xprec::MIN_BITS {
        xprec::solve_interval_x(params.n, a.k, &v, a.precision)?
    } else if a.k > 0 {
        solve_small(&params, a.k, &v)?
    } else {
        solve_large(&params, -a.k, &v)?
    };
    let w = sink(&a.out)?;
    match a.format.as_str() {
        "csv" => {
            let mut wtr = csv::Writer::from_writer(w);
            wtr.write_record(SyncInterval::csv_header())?;
            wtr.write_record(iv.csv_row())?;
            wtr.flush()?;
        }
        "json-record" => {
            let mut w = w;
            writeln!(
                w,
                "{{\"n\":{},\"k\":{},\"v\":\"{}\",\"zeta\":{:.17e},\"eta\":{:.17e},\"delta\":{},\"Sunder\":{},\"Sbar\":{},\"valid\":{}}}",
                iv.n,
                iv.k,
                iv.v,
                iv.zeta,
                iv.eta,
                iv.delta.map(|d| format!("{d:.17e}")).unwrap_or_else(|| "null".into()),
                iv.s_under,
                iv.s_bar,
                iv.valid
            )?;
        }
        other => return Err(format!("unsupported format '{other}' for sync").into()),
    }
    Ok(())
}

/// Resolve a literal or symbolic parameter. Symbolic forms request the exact
/// endpoint constructions: `zeta:k,v`, `eta:k,v`, `delta:k,v`.
fn resolve_alpha(
    params: &GroupParams,
    s: &str,
) -> Result<(f64, Option<SyncInterval>), Box<dyn std::error::Error>> {
    if let Some((which, rest)) = s.split_once(':') {
        let (k_str, v_str) = rest
            .split_once(',')
            .ok_or_else(|| format!("symbolic alpha must be {which}:k,v"))?;
        let k: i64 = k_str.parse().map_err(|_| format!("bad level '{k_str}'"))?;
        let v: Word = v_str.parse()?;
        let iv = if k > 0 {
            solve_small(params, k, &v)?
        } else {
            solve_large(params, -k, &v)?
        };
        let alpha = match which {
            "zeta" => iv.zeta,
            "eta" => iv.eta,
            "delta" => iv
                .delta
                .ok_or_else(|| Error::UnsupportedCase("small intervals have no delta".into()))?,
            other => return Err(format!("unknown symbolic endpoint '{other}'").into()),
        };
        Ok((alpha, Some(iv)))
    } else {
        let alpha: f64 = s.parse().map_err(|_| format!("bad alpha '{s}'"))?;
        Ok((alpha, None))
    }
}

fn build_domain_at(
    params: &GroupParams,
    alpha: f64,
    iv: Option<SyncInterval>,
    allow_sweep: bool,
) -> Result<Domain, Box<dyn std::error::Error>> {
    if (alpha - 1.0).abs() < 1e-15 {
        return Ok(build_alpha_one(params.n as i64)?);
    }
    if let Some(iv) = iv {
        return Ok(build_on_interval(&iv, alpha)?);
    }
    let atlas = Atlas::generate(params, &AtlasOptions::default());
    match atlas::domain_for_alpha(params, &atlas, alpha, allow_sweep, &SweepOptions::default()) {
        Ok(d) => Ok(d),
        Err(Error::UnsupportedCase(_)) => Err(format!(
            "alpha = {alpha} lies in no certified matching interval of the default atlas; \
             pass --sweep to build the seed-sweep approximation"
        )
        .into()),
        Err(e) => Err(e.into()),
    }
}

fn cmd_domain(a: DomainArgs) -> Result<(), Box<dyn std::error::Error>> {
    let params = group_params(a.n)?;
    let (alpha, iv) = resolve_alpha(&params, &a.alpha)?;
    let dom = build_domain_at(&params, alpha, iv, a.sweep)?;
    let mut w = sink(&a.out)?;
    match a.format.as_str() {
        "json-record" => writeln!(w, "{}", dom.to_record())?,
        "svg" => write!(w, "{}", dom.to_svg())?,
        other => return Err(format!("unsupported format '{other}' for domain").into()),
    }
    if a.verify {
        let opts = BijectivityOptions { samples: a.samples, seed: a.seed, ..Default::default() };
        let report = certify(&dom, &opts)?;
        eprint!("{}", report.to_text());
    }
    Ok(())
}

fn cmd_entropy(a: EntropyArgs, conjecture_only: bool) -> Result<(), Box<dyn std::error::Error>> {
    let params = group_params(a.n)?;
    let (alpha, mut iv) = resolve_alpha(&params, &a.alpha)?;
    if a.precision >= xprec::MIN_BITS {
        if let Some(known) = &iv {
            iv = Some(xprec::solve_interval_x(params.n, known.k, &known.v, a.precision)?);
        }
    }
    let dom = build_domain_at(&params, alpha, iv, a.sweep)?;
    let er = rohlin_integral(&dom)?;
    let vol = vol_n(a.n)?;
    if conjecture_only {
        println!(
            "n={} alpha={:.12} integral={:.12} vol_n={:.12} residual={:+.3e} quad_error={:.3e}",
            a.n,
            alpha,
            er.integral,
            vol,
            er.integral - vol,
            er.quad_error
        );
        return Ok(());
    }
    let mass = match mu_domain(&dom) {
        Ok(m) => m.mass,
        Err(Error::InfiniteMass) => f64::INFINITY,
        Err(e) => return Err(e.into()),
    };
    let w = sink(&a.out)?;
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "n",
        "alpha",
        "kind",
        "mass",
        "rohlin_integral",
        "entropy",
        "product",
        "residual_vs_vol",
        "quad_error",
    ])?;
    wtr.write_record([
        a.n.to_string(),
        format!("{alpha:.17e}"),
        format!("{:?}", dom.kind),
        format!("{mass:.17e}"),
        format!("{:.17e}", er.integral),
        format!("{:.17e}", er.entropy),
        format!("{:.17e}", er.entropy * mass),
        format!("{:.3e}", er.integral - vol),
        format!("{:.3e}", er.quad_error),
    ])?;
    wtr.flush()?;
    Ok(())
}

fn cmd_scan(a: ScanArgs) -> Result<(), Box<dyn std::error::Error>> {
    if a.format != "csv" {
        return Err(format!("unsupported format '{}' for scan", a.format).into());
    }
    let params = group_params(a.n)?;
    let alphas = atlas::parse_grid(&a.alphas)?;
    let atlas_ = Atlas::generate(&params, &AtlasOptions::default());
    let rows = atlas::scan(&params, &atlas_, &alphas, a.sweep, &SweepOptions::default());
    let w = sink(&a.out)?;
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(tricf_core::atlas::ScanRow::csv_header())?;
    for r in rows {
        wtr.write_record(r.csv_row())?;
    }
    wtr.flush()?;
    Ok(())
}
