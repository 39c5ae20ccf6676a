//! Seeded campaigns: per-trial instance generation, parallel execution,
//! deterministic aggregation, replay, and the `(r, m, M)` sweep.
//!
//! Trial `i` of a campaign with seed `s` draws everything from a generator
//! seeded with `trial_seed(s, i)`, so results do not depend on scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checks::{
    counterexample_instance, run_check, CheckId, CheckInput, CheckOptions, CheckReport,
    FailureClass, Instance, RemarkChainInput, ScalarBellmanInput, Variant, Verdict,
};
use crate::constants::{kantorovich, kantorovich_closed_form, kantorovich_grid, IntervalBounds, K_GRID_POINTS};
use crate::error::{Error, Result};
use crate::functions::ScalarFunction;
use crate::maps::{MapSpec, PositiveMap};
use crate::matcore::MAX_DIM;
use crate::means::Weight;
use crate::random::{random_symmetric_in_rng, random_unit_vector, rng_from_seed, trial_seed, TrialRng};

pub const SCHEMA: &str = "opbell-report/1";

/// Columns of the sweep CSV, in order.
pub const SWEEP_COLUMNS: [&str; 8] = [
    "r",
    "m",
    "M",
    "K",
    "K2",
    "argmax_closed",
    "argmax_grid",
    "worst_gap",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RPart {
    Value(f64),
    Uniform(f64, f64),
}

/// Exponent distribution: a comma-separated union of values and `lo:hi`
/// uniform ranges, e.g. `3`, `-3,-2,2.5`, `-1:0,1:2`. A trial picks one part
/// uniformly, then a value from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RSpec(pub Vec<RPart>);

impl RSpec {
    pub fn value(r: f64) -> Self {
        RSpec(vec![RPart::Value(r)])
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let part = self.0[rng.random_range(0..self.0.len())];
        match part {
            RPart::Value(r) => r,
            RPart::Uniform(lo, hi) => rng.random_range(lo..=hi),
        }
    }
}

impl FromStr for RSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::parse("r", s, format!("bad number {t:?}")))
        };
        let mut parts = Vec::new();
        for item in s.split(',') {
            // a leading '-' belongs to the number, so split on the first ':' after it
            let split = item
                .char_indices()
                .skip(1)
                .find(|&(_, c)| c == ':')
                .map(|(i, _)| i);
            match split {
                Some(i) => {
                    let (lo, hi) = (num(&item[..i])?, num(&item[i + 1..])?);
                    if lo > hi {
                        return Err(Error::parse("r", s, format!("empty range {item}")));
                    }
                    parts.push(RPart::Uniform(lo, hi));
                }
                None => parts.push(RPart::Value(num(item)?)),
            }
        }
        Ok(RSpec(parts))
    }
}

impl fmt::Display for RSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match p {
                RPart::Value(r) => write!(f, "{r}")?,
                RPart::Uniform(lo, hi) => write!(f, "{lo}:{hi}")?,
            }
        }
        Ok(())
    }
}

impl TryFrom<String> for RSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<RSpec> for String {
    fn from(r: RSpec) -> String {
        r.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum VStrategy {
    Fixed(Weight),
    Uniform,
}

impl VStrategy {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Weight {
        match self {
            VStrategy::Fixed(w) => *w,
            VStrategy::Uniform => Weight::new(rng.random_range(0.0..=1.0)).expect("in [0, 1]"),
        }
    }
}

impl FromStr for VStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "uniform" {
            return Ok(VStrategy::Uniform);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::parse("v", s, "expected `uniform` or a number in [0, 1]"))?;
        Ok(VStrategy::Fixed(Weight::new(v)?))
    }
}

impl fmt::Display for VStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VStrategy::Fixed(w) => write!(f, "{}", w.get()),
            VStrategy::Uniform => f.write_str("uniform"),
        }
    }
}

impl TryFrom<String> for VStrategy {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<VStrategy> for String {
    fn from(v: VStrategy) -> String {
        v.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub check: CheckId,
    pub trials: usize,
    pub n: usize,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    /// Falls back to [`default_r`] for the check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<RSpec>,
    pub v: VStrategy,
    /// Trial `i` uses `maps[i % maps.len()]`.
    pub maps: Vec<MapSpec>,
    /// Falls back to [`default_f`] for the check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<ScalarFunction>,
    pub seed: u64,
    pub tol: f64,
    #[serde(default)]
    pub variant: Variant,
    pub oracle_points: usize,
    #[serde(default)]
    pub allow_degenerate: bool,
}

impl CampaignConfig {
    pub fn new(check: CheckId) -> Self {
        let opts = CheckOptions::default();
        CampaignConfig {
            check,
            trials: 100,
            n: 4,
            m: 0.1,
            big_m: 0.9,
            r: None,
            v: VStrategy::Uniform,
            maps: MapSpec::all(),
            f: None,
            seed: 42,
            tol: opts.tol,
            variant: opts.variant,
            oracle_points: opts.oracle_points,
            allow_degenerate: false,
        }
    }

    pub fn options(&self) -> CheckOptions {
        CheckOptions {
            tol: self.tol,
            variant: self.variant,
            oracle_points: self.oracle_points,
            ..CheckOptions::default()
        }
    }

    pub fn bounds(&self) -> Result<IntervalBounds> {
        IntervalBounds::new(self.m, self.big_m)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.n == 0 || self.n > MAX_DIM {
            return bad(format!("n must be in 1..={MAX_DIM}, got {}", self.n));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.maps.is_empty() {
            return bad("at least one map is required".into());
        }
        if self.oracle_points < 2 {
            return bad("oracle_points must be at least 2".into());
        }
        self.bounds()?;
        if self.m == self.big_m && !self.allow_degenerate {
            return bad(format!(
                "degenerate interval m = M = {} needs allow_degenerate",
                self.m
            ));
        }
        if let Some(r) = &self.r {
            if r.0.is_empty() {
                return bad("empty r specification".into());
            }
        }
        if self.check == CheckId::ScalarBellman {
            let r = self.r_spec().expect("scalar bellman has a default r");
            let integral = r.0.iter().all(|p| matches!(p, RPart::Value(x) if *x >= 1.0 && x.fract() == 0.0));
            if !integral {
                return bad(format!("scalar-bellman needs a list of positive integers for r, got {r}"));
            }
        }
        Ok(())
    }

    fn r_spec(&self) -> Option<RSpec> {
        self.r.clone().or_else(|| default_r(self.check))
    }

    fn function(&self) -> Option<ScalarFunction> {
        self.f.clone().or_else(|| default_f(self.check))
    }
}

/// Exponent distribution used when a campaign does not name one.
pub fn default_r(check: CheckId) -> Option<RSpec> {
    let s = match check {
        CheckId::BellmanClassic => "0:1",
        CheckId::BellmanReversed => "-1:0,1:2",
        CheckId::GeometricChain => "-1:0",
        CheckId::ThmPower | CheckId::AdditiveCorollary => "3",
        CheckId::ScalarBellman => "1,2,3",
        CheckId::ScalarRemarkChain => "2:5",
        _ => return None,
    };
    Some(s.parse().expect("valid literal"))
}

/// Function used when a campaign does not name one.
pub fn default_f(check: CheckId) -> Option<ScalarFunction> {
    match check {
        CheckId::JensenVector
        | CheckId::MapJensen
        | CheckId::PropConcave
        | CheckId::LemmaMeanDefect
        | CheckId::LemmaMapDefect
        | CheckId::AdditiveTheorem => Some(ScalarFunction::Power { p: 0.5 }),
        CheckId::PropConvex | CheckId::ExpCorollary => Some(ScalarFunction::Exp),
        _ => None,
    }
}

fn uses_r(check: CheckId) -> bool {
    matches!(
        check,
        CheckId::BellmanClassic
            | CheckId::BellmanReversed
            | CheckId::GeometricChain
            | CheckId::ThmPower
            | CheckId::AdditiveCorollary
    )
}

fn positive_parts<R: Rng + ?Sized>(total: f64, k: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..=1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| total * x / s).collect()
}

fn scalar_bellman_input(cfg: &CampaignConfig, rng: &mut TrialRng) -> ScalarBellmanInput {
    let r = cfg.r_spec().expect("default exists").sample(rng) as u32;
    let k = rng.random_range(1..=3);
    let a: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..=1.0)).collect();
    let b: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..=1.0)).collect();
    let ri = r as i32;
    let mut cap = |xs: &[f64]| {
        let tight = xs.iter().map(|x| x.powi(ri)).sum::<f64>().powf(1.0 / f64::from(r));
        // one draw in five sits exactly on the cap constraint
        if rng.random_bool(0.2) {
            tight
        } else {
            tight * rng.random_range(1.0..=2.0)
        }
    };
    let a_cap = cap(&a);
    let b_cap = cap(&b);
    ScalarBellmanInput { a, b, a_cap, b_cap, r }
}

/// Draws until `Σ ((1−v)a_k/M₁ + v b_k/M₂)^{1/r} < 1`, which the chain
/// needs; the normalized sums alone do not guarantee it.
fn remark_chain_input(cfg: &CampaignConfig, rng: &mut TrialRng) -> RemarkChainInput {
    let r = cfg.r_spec().expect("default exists").sample(rng);
    loop {
        let k = rng.random_range(1..=3);
        let m1 = rng.random_range(0.5..=2.0);
        let m2 = rng.random_range(0.5..=2.0);
        let x = rng.random_range(0.05..=0.9);
        let y = rng.random_range(0.05..=0.9);
        let a: Vec<f64> = positive_parts(x, k, rng).into_iter().map(|s| m1 * s.powf(r)).collect();
        let b: Vec<f64> = positive_parts(y, k, rng).into_iter().map(|s| m2 * s.powf(r)).collect();
        let v = m2 / (m1 + m2);
        let s: f64 = a
            .iter()
            .zip(&b)
            .map(|(ak, bk)| ((1.0 - v) * ak / m1 + v * bk / m2).powf(1.0 / r))
            .sum();
        if s < 1.0 {
            return RemarkChainInput { a, b, m1, m2, r, bounds: None };
        }
    }
}

/// The input of trial `index`, a pure function of `(cfg, index)`.
pub fn generate_input(cfg: &CampaignConfig, index: u64) -> Result<CheckInput> {
    let seed = trial_seed(cfg.seed, index);
    let mut rng = rng_from_seed(seed);
    match cfg.check {
        CheckId::Counterexample => return Ok(CheckInput::Operator(counterexample_instance())),
        CheckId::ScalarBellman => return Ok(CheckInput::ScalarBellman(scalar_bellman_input(cfg, &mut rng))),
        CheckId::ScalarRemarkChain => return Ok(CheckInput::RemarkChain(remark_chain_input(cfg, &mut rng))),
        _ => {}
    }
    let r = if uses_r(cfg.check) {
        let spec = cfg
            .r_spec()
            .ok_or_else(|| Error::InvalidConfig(format!("{} needs r", cfg.check)))?;
        Some(spec.sample(&mut rng))
    } else {
        None
    };
    let v = cfg.v.sample(&mut rng);
    let a = random_symmetric_in_rng(cfg.n, cfg.m, cfg.big_m, &mut rng)?;
    let b = random_symmetric_in_rng(cfg.n, cfg.m, cfg.big_m, &mut rng)?;
    let map = if cfg.check == CheckId::JensenVector {
        PositiveMap::vector_state(random_unit_vector(cfg.n, &mut rng))?
    } else {
        cfg.maps[(index % cfg.maps.len() as u64) as usize].build(cfg.n, &mut rng)?
    };
    Ok(CheckInput::Operator(Instance {
        a,
        b,
        v,
        r,
        f: cfg.function(),
        map,
        bounds: Some(cfg.bounds()?),
        seed: Some(seed),
    }))
}

pub fn run_trial(cfg: &CampaignConfig, index: u64) -> Result<CheckReport> {
    run_check(cfg.check, &generate_input(cfg, index)?, &cfg.options())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub holds: usize,
    pub violated: usize,
    pub incomparable: usize,
    pub hypothesis_unmet: usize,
}

impl Counts {
    fn add(&mut self, v: Verdict) {
        match v {
            Verdict::Holds => self.holds += 1,
            Verdict::Violated => self.violated += 1,
            Verdict::Incomparable => self.incomparable += 1,
            Verdict::HypothesisUnmet => self.hypothesis_unmet += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.holds + self.violated + self.incomparable + self.hypothesis_unmet
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    pub min_eig_gap: f64,
    pub report: CheckReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub schema: String,
    pub config: CampaignConfig,
    pub counts: Counts,
    /// Violations whose gap is beyond rounding (see `FailureClass`).
    pub claim_failures: usize,
    pub worst_gap: Option<TrialRecord>,
    pub median_gap: Option<f64>,
    /// Largest value of each reported constant over all trials.
    pub constants_max: BTreeMap<String, f64>,
    pub runtime_secs: f64,
    /// Every violated trial, by index, with its full input.
    pub violations: Vec<TrialRecord>,
}

impl CampaignReport {
    /// 0 when nothing was violated, 1 on any violation, 3 when no trial met
    /// the hypotheses.
    pub fn exit_code(&self) -> i32 {
        if self.counts.violated > 0 {
            1
        } else if self.counts.hypothesis_unmet == self.counts.total() {
            3
        } else {
            0
        }
    }

    /// The report with the wall-clock field zeroed, for comparisons.
    pub fn without_runtime(&self) -> CampaignReport {
        CampaignReport {
            runtime_secs: 0.0,
            ..self.clone()
        }
    }
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    Some(if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    })
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    cfg.validate()?;
    let start = Instant::now();
    let reports: Vec<CheckReport> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| run_trial(cfg, i))
        .collect::<Result<_>>()?;

    let mut counts = Counts::default();
    let mut claim_failures = 0;
    let mut gaps = Vec::new();
    let mut worst: Option<(u64, f64)> = None;
    let mut constants_max: BTreeMap<String, f64> = BTreeMap::new();
    let mut violations = Vec::new();
    for (i, rep) in reports.iter().enumerate() {
        let i = i as u64;
        counts.add(rep.verdict);
        if rep.failure == Some(FailureClass::Claim) {
            claim_failures += 1;
        }
        for (k, &v) in &rep.constants {
            constants_max
                .entry(k.clone())
                .and_modify(|m| *m = m.max(v))
                .or_insert(v);
        }
        if let Some(g) = rep.min_eig_gap {
            gaps.push(g);
            if worst.is_none_or(|(_, w)| g < w) {
                worst = Some((i, g));
            }
            if rep.verdict == Verdict::Violated {
                violations.push(TrialRecord {
                    index: i,
                    min_eig_gap: g,
                    report: rep.clone(),
                });
            }
        }
    }
    let worst_gap = worst.map(|(i, g)| TrialRecord {
        index: i,
        min_eig_gap: g,
        report: reports[i as usize].clone(),
    });
    Ok(CampaignReport {
        schema: SCHEMA.to_string(),
        config: cfg.clone(),
        counts,
        claim_failures,
        worst_gap,
        median_gap: median(gaps),
        constants_max,
        runtime_secs: start.elapsed().as_secs_f64(),
        violations,
    })
}

/// Re-runs trial `index` of a saved campaign: from the embedded input when
/// the trial was recorded, otherwise regenerated from the config.
pub fn replay(report: &CampaignReport, index: u64) -> Result<CheckReport> {
    let cfg = &report.config;
    if index >= cfg.trials as u64 {
        return Err(Error::InvalidConfig(format!(
            "index {index} out of range for {} trials",
            cfg.trials
        )));
    }
    let recorded = report
        .violations
        .iter()
        .chain(&report.worst_gap)
        .find(|t| t.index == index);
    match recorded {
        Some(t) => run_check(cfg.check, &t.report.input, &cfg.options()),
        None => run_trial(cfg, index),
    }
}

/// Parses `lo:hi:step` into `lo, lo+step, …` up to `hi` (inclusive, with a
/// small allowance for accumulated rounding).
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let err = |reason: &str| Error::parse("grid", s, reason);
    let nums: Vec<f64> = s
        .split(':')
        .map(|t| t.trim().parse::<f64>().map_err(|_| err("expected lo:hi:step")))
        .collect::<Result<_>>()?;
    match nums[..] {
        [x] if x.is_finite() => Ok(vec![x]),
        [lo, hi, step] if lo.is_finite() && hi.is_finite() && step > 0.0 && lo <= hi => {
            let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| lo + i as f64 * step).collect())
        }
        _ => Err(err("expected lo:hi:step with lo <= hi and step > 0")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub r: Vec<f64>,
    pub bounds: Vec<IntervalBounds>,
    /// Campaign size at each grid point; 0 skips the campaigns.
    pub trials: usize,
    pub n: usize,
    pub seed: u64,
    pub tol: f64,
    pub maps: Vec<MapSpec>,
    pub grid_points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            r: Vec::new(),
            bounds: Vec::new(),
            trials: 100,
            n: 4,
            seed: 42,
            tol: CheckOptions::default().tol,
            maps: MapSpec::all(),
            grid_points: K_GRID_POINTS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub k: Option<f64>,
    pub k2: Option<f64>,
    pub argmax_closed: Option<f64>,
    pub argmax_grid: Option<f64>,
    pub worst_gap: Option<f64>,
}

/// One row per `(r, [m, M])`: `K(m, M, (1−t)^r)` (closed form when one
/// exists, else the grid), both maximizers, and the worst `thm-power` gap.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.r.is_empty() || cfg.bounds.is_empty() {
        return Err(Error::InvalidConfig("sweep grid is empty".into()));
    }
    let mut rows = Vec::with_capacity(cfg.r.len() * cfg.bounds.len());
    for &r in &cfg.r {
        for b in &cfg.bounds {
            let f = ScalarFunction::PowerOneMinus { r };
            let closed = kantorovich_closed_form(&f, b).ok();
            let grid = kantorovich_grid(&f, b, cfg.grid_points).ok();
            let k = match &closed {
                Some(c) => Some(c.value),
                None => kantorovich(&f, b).ok().map(|c| c.value),
            };
            let worst_gap = if cfg.trials > 0 {
                let camp = CampaignConfig {
                    trials: cfg.trials,
                    n: cfg.n,
                    m: b.m(),
                    big_m: b.big_m(),
                    r: Some(RSpec::value(r)),
                    maps: cfg.maps.clone(),
                    seed: cfg.seed,
                    tol: cfg.tol,
                    allow_degenerate: true,
                    ..CampaignConfig::new(CheckId::ThmPower)
                };
                run_campaign(&camp)?.worst_gap.map(|t| t.min_eig_gap)
            } else {
                None
            };
            rows.push(SweepRow {
                r,
                m: b.m(),
                big_m: b.big_m(),
                k,
                k2: k.map(|k| k * k),
                argmax_closed: closed.map(|c| c.argmax_t),
                argmax_grid: grid.map(|g| g.argmax_t),
                worst_gap,
            });
        }
    }
    Ok(rows)
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidConfig(format!("writing CSV: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS).map_err(io)?;
    let cell = |x: Option<f64>| x.map(format_float).unwrap_or_default();
    for row in rows {
        w.write_record([
            format_float(row.r),
            format_float(row.m),
            format_float(row.big_m),
            cell(row.k),
            cell(row.k2),
            cell(row.argmax_closed),
            cell(row.argmax_grid),
            cell(row.worst_gap),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidConfig(format!("writing CSV: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rspec_parsing() {
        let r: RSpec = "-1:0,1:2".parse().unwrap();
        assert_eq!(r.0, vec![RPart::Uniform(-1.0, 0.0), RPart::Uniform(1.0, 2.0)]);
        let r: RSpec = "-3,-2,2.5".parse().unwrap();
        assert_eq!(r.0.len(), 3);
        assert_eq!(r.to_string(), "-3,-2,2.5");
        assert!("2:1".parse::<RSpec>().is_err());
        assert!("x".parse::<RSpec>().is_err());
        let mut rng = rng_from_seed(3);
        let spec: RSpec = "-1:0,1:2".parse().unwrap();
        for _ in 0..100 {
            let x = spec.sample(&mut rng);
            assert!((-1.0..=0.0).contains(&x) || (1.0..=2.0).contains(&x));
        }
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("2.5:5:0.5").unwrap().len(), 6);
        assert_eq!(parse_grid("3").unwrap(), vec![3.0]);
        assert!(parse_grid("5:2:1").is_err());
        assert!(parse_grid("1:2:0").is_err());
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = CampaignConfig {
            trials: 0,
            ..CampaignConfig::new(CheckId::BellmanClassic)
        };
        assert!(matches!(run_campaign(&cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn counterexample_campaign() {
        let cfg = CampaignConfig {
            trials: 1,
            ..CampaignConfig::new(CheckId::Counterexample)
        };
        let rep = run_campaign(&cfg).unwrap();
        assert_eq!(rep.counts.incomparable, 1);
        let single = crate::checks::reproduce_counterexample(&cfg.options()).unwrap();
        assert_eq!(rep.worst_gap.unwrap().report, single);
    }

    #[test]
    fn campaign_is_deterministic() {
        let cfg = CampaignConfig {
            trials: 40,
            ..CampaignConfig::new(CheckId::GeometricChain)
        };
        let a = run_campaign(&cfg).unwrap().without_runtime();
        let b = run_campaign(&cfg).unwrap().without_runtime();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.counts.total(), 40);
        assert_eq!(a.counts.violated, a.violations.len());
    }

    #[test]
    fn report_survives_json_and_replays() {
        let cfg = CampaignConfig {
            trials: 12,
            ..CampaignConfig::new(CheckId::ThmPower)
        };
        let rep = run_campaign(&cfg).unwrap();
        let back: CampaignReport = serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap();
        assert_eq!(back, rep);
        for i in 0..12 {
            let again = replay(&back, i).unwrap();
            assert_eq!(again, run_trial(&cfg, i).unwrap());
        }
        assert!(replay(&back, 12).is_err());
    }

    #[test]
    fn sweep_rows() {
        let cfg = SweepConfig {
            r: vec![3.0, 4.0],
            bounds: vec![IntervalBounds::new(0.1, 0.5).unwrap(), IntervalBounds::new(0.3, 0.3).unwrap()],
            trials: 5,
            grid_points: 10_001,
            ..SweepConfig::default()
        };
        let rows = sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[1].k, Some(1.0));
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("r,m,M,K,K2,argmax_closed,argmax_grid,worst_gap\n"));
        assert_eq!(text.lines().count(), 5);
    }
}
