use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use opbell_core::checks::{reproduce_counterexample, CheckOptions};
use opbell_core::constants::{beta, beta_tilde, kantorovich, kantorovich_with, IntervalBounds};
use opbell_core::harness::{
    parse_grid, replay, run_campaign, sweep, write_sweep_csv, CampaignConfig, CampaignReport,
    RSpec, SweepConfig, VStrategy,
};
use opbell_core::{CheckId, MapSpec, Method, ScalarFunction, Variant, Verdict};

const EXIT_VIOLATED: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "opbell", version, about = "Numerical checks of operator Bellman-type inequalities")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a seeded random campaign of one check and emit a JSON report.
    ///
    /// Exit status: 0 no violation, 1 at least one violation, 2 bad
    /// configuration, 3 no trial met the hypotheses.
    Verify(VerifyArgs),
    /// Compute K, β or β̃ for a function on [m, M] and print it as JSON.
    Constant(ConstantArgs),
    /// Evaluate the fixed 2×2 instance on which the reversed order fails.
    Counterexample,
    /// Tabulate K(m, M, (1−t)^r) and worst gaps over an r grid as CSV.
    ///
    /// Columns: r, m, M, K, K2 (= K²), argmax_closed (closed-form maximizer,
    /// empty when r lies in [-1,0] or [1,2]), argmax_grid (grid-oracle
    /// maximizer), worst_gap (most negative λ_min(rhs − lhs) over the
    /// campaign at that point, empty when no trial met the hypotheses).
    /// Numbers carry 17 significant digits.
    Sweep(SweepArgs),
    /// Re-run one trial of a saved campaign report.
    Replay(ReplayArgs),
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Check identifier, e.g. bellman-classic, thm-power, additive-corollary.
    #[arg(long)]
    check: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    m: f64,
    #[arg(long = "M", default_value_t = 0.9, allow_negative_numbers = true)]
    big_m: f64,
    /// Exponents: values and lo:hi ranges, comma separated (e.g. -1:0,1:2).
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
    /// Mean weight: a number in [0, 1] or `uniform`.
    #[arg(long, default_value = "uniform")]
    v: String,
    /// Map spec, repeatable; `all` selects one of every kind.
    #[arg(long = "map", default_value = "all")]
    maps: Vec<String>,
    /// Scalar function, e.g. power:p=1/2, exp, power-one-minus:r=3.
    #[arg(long)]
    f: Option<String>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::MapFirst)]
    variant: VariantArg,
    /// Grid size for the in-check K cross-check.
    #[arg(long, default_value_t = 10_000)]
    oracle_points: usize,
    /// Permit m = M.
    #[arg(long)]
    allow_degenerate: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    MapFirst,
    PowerFirst,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Closed,
    Grid,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstantKind {
    K,
    Beta,
    BetaTilde,
}

#[derive(clap::Args)]
struct ConstantArgs {
    #[arg(long)]
    f: String,
    #[arg(long, allow_negative_numbers = true)]
    m: f64,
    #[arg(long = "M", allow_negative_numbers = true)]
    big_m: f64,
    #[arg(long, value_enum, default_value_t = ConstantKind::K)]
    kind: ConstantKind,
    /// Force a method for K; the default picks the closed form when available.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
}

#[derive(clap::Args)]
struct SweepArgs {
    /// Exponent grid lo:hi:step (or a single value).
    #[arg(long, allow_hyphen_values = true)]
    r: String,
    #[arg(long)]
    m: f64,
    #[arg(long = "M")]
    big_m: f64,
    /// Campaign size per grid point (0 skips the campaigns).
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    grid_points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ReplayArgs {
    #[arg(long)]
    from: PathBuf,
    #[arg(long)]
    index: u64,
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> anyhow::Result<()> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn campaign_config(a: &VerifyArgs) -> anyhow::Result<CampaignConfig> {
    let check: CheckId = a.check.parse()?;
    let mut maps = Vec::new();
    for spec in &a.maps {
        if spec == "all" {
            maps.extend(MapSpec::all());
        } else {
            maps.push(spec.parse::<MapSpec>()?);
        }
    }
    let cfg = CampaignConfig {
        trials: a.trials,
        n: a.n,
        m: a.m,
        big_m: a.big_m,
        r: a.r.as_deref().map(str::parse::<RSpec>).transpose()?,
        v: a.v.parse::<VStrategy>()?,
        maps,
        f: a.f.as_deref().map(str::parse::<ScalarFunction>).transpose()?,
        seed: a.seed,
        tol: a.tol,
        variant: match a.variant {
            VariantArg::MapFirst => Variant::MapFirst,
            VariantArg::PowerFirst => Variant::PowerFirst,
        },
        oracle_points: a.oracle_points,
        allow_degenerate: a.allow_degenerate,
        ..CampaignConfig::new(check)
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Human-readable digest on stderr; a closed stderr is not an error.
fn summarize(rep: &CampaignReport) {
    let c = &rep.counts;
    let mut err = io::stderr().lock();
    let _ = writeln!(
        err,
        "{}: {} trials, holds {}, violated {} ({} beyond rounding), incomparable {}, hypothesis-unmet {}",
        rep.config.check,
        c.total(),
        c.holds,
        c.violated,
        rep.claim_failures,
        c.incomparable,
        c.hypothesis_unmet
    );
    if let Some(w) = &rep.worst_gap {
        let _ = writeln!(err, "worst gap {:e} at trial {}", w.min_eig_gap, w.index);
    }
    let _ = writeln!(err, "runtime {:.3} s", rep.runtime_secs);
}

/// Ok(code) for finished runs; Err for configuration problems.
fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.cmd {
        Cmd::Verify(a) => {
            let cfg = campaign_config(&a)?;
            let rep = run_campaign(&cfg)?;
            summarize(&rep);
            emit_json(&rep, a.out.as_deref())?;
            Ok(rep.exit_code() as u8)
        }
        Cmd::Constant(a) => {
            let f: ScalarFunction = a.f.parse()?;
            let b = IntervalBounds::new(a.m, a.big_m)?;
            let res = match (a.kind, a.method) {
                (ConstantKind::K, None) => kantorovich(&f, &b)?,
                (ConstantKind::K, Some(MethodArg::Closed)) => kantorovich_with(&f, &b, Method::ClosedForm)?,
                (ConstantKind::K, Some(MethodArg::Grid)) => kantorovich_with(&f, &b, Method::GridOracle)?,
                (_, Some(_)) => bail!("--method applies to K only"),
                (ConstantKind::Beta, None) => beta(&f, &b)?,
                (ConstantKind::BetaTilde, None) => beta_tilde(&f, &b)?,
            };
            emit_json(
                &serde_json::json!({
                    "value": res.value,
                    "argmax_t": res.argmax_t,
                    "method": res.method,
                }),
                None,
            )?;
            Ok(0)
        }
        Cmd::Counterexample => {
            let rep = reproduce_counterexample(&CheckOptions::default())?;
            emit_json(&rep, None)?;
            Ok(if rep.verdict == Verdict::Violated { EXIT_VIOLATED } else { 0 })
        }
        Cmd::Sweep(a) => {
            let cfg = SweepConfig {
                r: parse_grid(&a.r)?,
                bounds: vec![IntervalBounds::new(a.m, a.big_m)?],
                trials: a.trials,
                n: a.n,
                seed: a.seed,
                tol: a.tol,
                grid_points: a.grid_points,
                ..SweepConfig::default()
            };
            let rows = sweep(&cfg)?;
            write_sweep_csv(&rows, output(a.out.as_deref())?)?;
            Ok(0)
        }
        Cmd::Replay(a) => {
            let text = std::fs::read_to_string(&a.from)
                .with_context(|| format!("reading {}", a.from.display()))?;
            let saved: CampaignReport = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", a.from.display()))?;
            let rep = replay(&saved, a.index)?;
            emit_json(&rep, None)?;
            Ok(if rep.verdict == Verdict::Violated { EXIT_VIOLATED } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
