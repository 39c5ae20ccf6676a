//! One checker per inequality. Each evaluates both sides on a concrete
//! instance and compares them in the Löwner order, link by link.
//!
//! Instances outside a statement's hypotheses are not errors: they produce
//! a [`Verdict::HypothesisUnmet`] report listing what failed, so parameter
//! sweeps can cross hypothesis boundaries without aborting.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constants::{
    beta, beta_tilde, kantorovich, kantorovich_closed_form, kantorovich_grid, IntervalBounds,
};
use crate::error::{Error, Result};
use crate::functions::{ScalarFunction, Shape};
use crate::maps::PositiveMap;
use crate::matcore::{apply_function, loewner_compare, operator_norm, spectrum_in, Relation, SymMatrix};
use crate::means::{arith_mean, geom_mean, Weight};

/// Default Löwner tolerance (scaled by `max(1, ‖lhs‖, ‖rhs‖)`).
pub const DEFAULT_TOL: f64 = 1e-9;
/// Slack allowed when testing `spectrum ⊂ [m, M]`.
pub const SPECTRUM_TOL: f64 = 1e-9;
/// Minimum eigenvalue demanded of `I − A`, `I − B`, `I − A∇B` before a
/// negative power is taken.
pub const STRICTNESS_MARGIN: f64 = 1e-6;
/// A failing link whose gap is below `−CLAIM_THRESHOLD · scale` is classed
/// as a failure of the stated inequality rather than rounding.
pub const CLAIM_THRESHOLD: f64 = 1e-7;
/// Relative size below which a scalar Bellman base is treated as zero.
pub const BASE_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckId {
    BellmanClassic,
    BellmanReversed,
    GeometricChain,
    JensenVector,
    MapJensen,
    PropConcave,
    PropConvex,
    ThmPower,
    ExpCorollary,
    LemmaMeanDefect,
    LemmaMapDefect,
    AdditiveTheorem,
    AdditiveCorollary,
    Counterexample,
    ScalarBellman,
    ScalarRemarkChain,
}

impl CheckId {
    pub const ALL: [CheckId; 16] = [
        CheckId::BellmanClassic,
        CheckId::BellmanReversed,
        CheckId::GeometricChain,
        CheckId::JensenVector,
        CheckId::MapJensen,
        CheckId::PropConcave,
        CheckId::PropConvex,
        CheckId::ThmPower,
        CheckId::ExpCorollary,
        CheckId::LemmaMeanDefect,
        CheckId::LemmaMapDefect,
        CheckId::AdditiveTheorem,
        CheckId::AdditiveCorollary,
        CheckId::Counterexample,
        CheckId::ScalarBellman,
        CheckId::ScalarRemarkChain,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckId::BellmanClassic => "bellman-classic",
            CheckId::BellmanReversed => "bellman-reversed",
            CheckId::GeometricChain => "geometric-chain",
            CheckId::JensenVector => "jensen-vector",
            CheckId::MapJensen => "map-jensen",
            CheckId::PropConcave => "prop-concave",
            CheckId::PropConvex => "prop-convex",
            CheckId::ThmPower => "thm-power",
            CheckId::ExpCorollary => "exp-corollary",
            CheckId::LemmaMeanDefect => "lemma-mean-defect",
            CheckId::LemmaMapDefect => "lemma-map-defect",
            CheckId::AdditiveTheorem => "additive-theorem",
            CheckId::AdditiveCorollary => "additive-corollary",
            CheckId::Counterexample => "counterexample",
            CheckId::ScalarBellman => "scalar-bellman",
            CheckId::ScalarRemarkChain => "scalar-remark-chain",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CheckId::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownCheck(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Violated,
    Incomparable,
    HypothesisUnmet,
}

/// Why a link failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureClass {
    /// Gap within `CLAIM_THRESHOLD · scale`: consistent with rounding.
    Numeric,
    /// Gap well beyond rounding: the stated inequality fails on this input.
    Claim,
}

/// How `Φ(X)^r` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `(Φ(X))^r`: apply the map, then the power.
    #[default]
    MapFirst,
    /// `Φ(X^r)`.
    PowerFirst,
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "map-first" => Ok(Variant::MapFirst),
            "power-first" => Ok(Variant::PowerFirst),
            _ => Err(Error::parse("variant", s, "expected map-first or power-first")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub tol: f64,
    pub variant: Variant,
    /// Grid size for the in-check `K` cross-check.
    pub oracle_points: usize,
    /// Grid size for concavity/convexity hypotheses.
    pub shape_samples: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            tol: DEFAULT_TOL,
            variant: Variant::MapFirst,
            oracle_points: 10_000,
            shape_samples: 65,
        }
    }
}

/// Operator instance shared by every matrix check. Single-operator checks
/// read only `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub a: SymMatrix,
    pub b: SymMatrix,
    pub v: Weight,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<ScalarFunction>,
    pub map: PositiveMap,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<IntervalBounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarBellmanInput {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub a_cap: f64,
    pub b_cap: f64,
    pub r: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemarkChainInput {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub m1: f64,
    pub m2: f64,
    pub r: f64,
    /// Interval for the Kantorovich factor; the tight hull of the two
    /// normalized sums when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<IntervalBounds>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum CheckInput {
    Operator(Instance),
    ScalarBellman(ScalarBellmanInput),
    RemarkChain(RemarkChainInput),
}

/// One Löwner comparison `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub name: String,
    pub lhs: SymMatrix,
    pub rhs: SymMatrix,
    /// Smallest eigenvalue of `rhs − lhs`.
    pub min_eig_gap: f64,
    /// `max(1, ‖lhs‖_op, ‖rhs‖_op)`.
    pub scale: f64,
    pub relation: Relation,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: CheckId,
    pub verdict: Verdict,
    /// Sides of the primary link.
    pub lhs: Option<SymMatrix>,
    pub rhs: Option<SymMatrix>,
    /// Smallest `λ_min(rhs − lhs)` over all links.
    pub min_eig_gap: Option<f64>,
    pub tol: f64,
    pub links: Vec<Link>,
    pub constants: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unmet: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureClass>,
    pub variant: Variant,
    pub input: CheckInput,
}

impl CheckReport {
    pub fn link(&self, name: &str) -> Option<&Link> {
        self.links.iter().find(|l| l.name == name)
    }

    /// Worst gap relative to the link's own scale.
    pub fn worst_scaled_gap(&self) -> Option<f64> {
        self.links
            .iter()
            .map(|l| l.min_eig_gap / l.scale)
            .min_by(f64::total_cmp)
    }
}

fn link(name: &str, lhs: SymMatrix, rhs: SymMatrix, tol: f64) -> Result<Link> {
    let verdict = loewner_compare(&lhs, &rhs, tol)?;
    let scale = operator_norm(&lhs)?.max(operator_norm(&rhs)?).max(1.0);
    Ok(Link {
        name: name.to_string(),
        min_eig_gap: verdict.min_eig_ba,
        scale,
        relation: verdict.relation,
        holds: verdict.less_eq(),
        lhs,
        rhs,
    })
}

fn scalar(x: f64) -> SymMatrix {
    SymMatrix::scalar(1, x).expect("1x1 is a valid dimension")
}

struct Builder<'a> {
    check: CheckId,
    opts: &'a CheckOptions,
    input: CheckInput,
    unmet: Vec<String>,
    flags: Vec<String>,
    constants: BTreeMap<String, f64>,
    links: Vec<Link>,
}

impl<'a> Builder<'a> {
    fn new(check: CheckId, opts: &'a CheckOptions, input: CheckInput) -> Self {
        Builder {
            check,
            opts,
            input,
            unmet: Vec::new(),
            flags: Vec::new(),
            constants: BTreeMap::new(),
            links: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.unmet.push(what());
        }
    }

    fn spectra_in(&mut self, name: &str, x: &SymMatrix, lo: f64, hi: f64) -> Result<()> {
        let ok = spectrum_in(x, lo, hi, SPECTRUM_TOL)?;
        self.require(ok, || format!("spectrum of {name} not in [{lo}, {hi}]"));
        Ok(())
    }

    fn shape(&mut self, f: &ScalarFunction, b: &IntervalBounds, allowed: &[Shape]) {
        match f.shape_on(b, self.opts.shape_samples) {
            Ok(s) if allowed.contains(&s) => {}
            Ok(s) => self.unmet.push(format!("{f} is {s:?} on {b}, need {allowed:?}")),
            Err(e) => self.unmet.push(e.to_string()),
        }
    }

    fn constant(&mut self, key: &str, value: f64) {
        self.constants.insert(key.to_string(), value);
    }

    fn compare(&mut self, name: &str, lhs: SymMatrix, rhs: SymMatrix) -> Result<()> {
        let l = link(name, lhs, rhs, self.opts.tol)?;
        self.links.push(l);
        Ok(())
    }

    fn unmet_report(self) -> CheckReport {
        CheckReport {
            check: self.check,
            verdict: Verdict::HypothesisUnmet,
            lhs: None,
            rhs: None,
            min_eig_gap: None,
            tol: self.opts.tol,
            links: self.links,
            constants: self.constants,
            unmet: self.unmet,
            flags: self.flags,
            failure: None,
            variant: self.opts.variant,
            input: self.input,
        }
    }

    fn finish(self) -> CheckReport {
        let all_hold = self.links.iter().all(|l| l.holds);
        let verdict = if all_hold {
            Verdict::Holds
        } else {
            Verdict::Violated
        };
        let failure = (!all_hold).then(|| {
            let claim = self
                .links
                .iter()
                .any(|l| !l.holds && l.min_eig_gap < -CLAIM_THRESHOLD * l.scale);
            if claim {
                FailureClass::Claim
            } else {
                FailureClass::Numeric
            }
        });
        self.with_verdict(verdict, failure)
    }

    fn with_verdict(self, verdict: Verdict, failure: Option<FailureClass>) -> CheckReport {
        let min_gap = self
            .links
            .iter()
            .map(|l| l.min_eig_gap)
            .min_by(f64::total_cmp);
        let primary = self.links.first();
        CheckReport {
            check: self.check,
            verdict,
            lhs: primary.map(|l| l.lhs.clone()),
            rhs: primary.map(|l| l.rhs.clone()),
            min_eig_gap: min_gap,
            tol: self.opts.tol,
            constants: self.constants,
            unmet: self.unmet,
            flags: self.flags,
            failure,
            variant: self.opts.variant,
            input: self.input,
            links: self.links,
        }
    }
}

fn power(x: &SymMatrix, p: f64) -> Result<SymMatrix> {
    apply_function(x, &ScalarFunction::Power { p })
}

fn check_shapes(inst: &Instance) -> Result<()> {
    let n = inst.a.n();
    for (what, dim) in [("B", inst.b.n()), ("map input", inst.map.input_dim())] {
        if dim != n {
            return Err(Error::InvalidConfig(format!(
                "{what} has dimension {dim}, A has {n}"
            )));
        }
    }
    Ok(())
}

fn need_r(inst: &Instance, check: CheckId) -> Result<f64> {
    inst.r
        .ok_or_else(|| Error::InvalidConfig(format!("{check} needs r")))
}

fn need_f(inst: &Instance, check: CheckId) -> Result<&ScalarFunction> {
    inst.f
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig(format!("{check} needs f")))
}

fn need_bounds(inst: &Instance, check: CheckId) -> Result<IntervalBounds> {
    inst.bounds
        .ok_or_else(|| Error::InvalidConfig(format!("{check} needs bounds m, M")))
}

fn in_bellman_reverse_range(r: f64) -> bool {
    (-1.0..=0.0).contains(&r) || (1.0..=2.0).contains(&r)
}

/// `Φ(X)^r` under the chosen reading.
fn phi_pow(map: &PositiveMap, x: &SymMatrix, r: f64, variant: Variant) -> Result<SymMatrix> {
    match variant {
        Variant::MapFirst => power(&map.apply(x)?, r),
        Variant::PowerFirst => map.apply(&power(x, r)?),
    }
}

/// Requires `λ_min(x) ≥ STRICTNESS_MARGIN` before a negative power.
fn strict(b: &mut Builder<'_>, name: &str, x: &SymMatrix) -> Result<()> {
    let lo = x.min_eigenvalue()?;
    b.require(lo >= STRICTNESS_MARGIN, || {
        format!("{name} is nearly singular (min eigenvalue {lo:e}) for a negative power")
    });
    Ok(())
}

/// `Φ((I−A)^r ∇_v (I−B)^r) ≤ Φ(I − A∇_vB)^r` for `r, v ∈ [0, 1]` and
/// contractions with spectra in `[0, 1]`.
pub fn check_bellman_classic(inst: &Instance, opts: &CheckOptions) -> Result<CheckReport> {
    let id = CheckId::BellmanClassic;
    check_shapes(inst)?;
    let r = need_r(inst, id)?;
    let mut b = Builder::new(id, opts, CheckInput::Operator(inst.clone()));
    b.require((0.0..=1.0).contains(&r), || format!("r = {r} not in [0, 1]"));
    b.spectra_in("A", &inst.a, 0.0, 1.0)?;
    b.spectra_in("B", &inst.b, 0.0, 1.0)?;
    if !b.unmet.is_empty() {
        return Ok(b.unmet_report());
    }
    let p = inst.a.one_minus();
    let q = inst.b.one_minus();
    let c = arith_mean(&inst.a, &inst.b, inst.v)?;
    let lhs = inst.map.apply(&arith_mean(&power(&p, r)?, &power(&q, r)?, inst.v)?)?;
    let rhs = phi_pow(&inst.map, &c.one_minus(), r, opts.variant)?;
    b.compare("bellman", lhs, rhs)?;
    Ok(b.finish())
}

/// `Φ(I − A∇_vB)^r ≤ Φ((I−A)^r ∇_v (I−B)^r)` for `r ∈ [−1,0] ∪ [1,2]`.
pub fn check_bellman_reversed(inst: &Instance, opts: &CheckOptions) -> Result<CheckReport> {
    let id = CheckId::BellmanReversed;
    check_shapes(inst)?;
    let r = need_r(inst, id)?;
    let mut b = Builder::new(id, opts, CheckInput::Operator(inst.clone()));
    b.require(in_bellman_reverse_range(r), || {
        format!("r = {r} not in [-1, 0] or [1, 2]")
    });
    b.spectra_in("A", &inst.a, -1.0, 1.0)?;
    b.spectra_in("B", &inst.b, -1.0, 1.0)?;
    let p = inst.a.one_minus();
    let q = inst.b.one_minus();
    let c = arith_mean(&inst.a, &inst.b, inst.v)?;
    let i_c = c.one_minus();
    if r < 0.0 {
        strict(&mut b, "I - A", &p)?;
        strict(&mut b, "I - B", &q)?;
        strict(&mut b, "I - A#B", &i_c)?;
    }
    if !b.unmet.is_empty() {
        return Ok(b.unmet_report());
    }
    let lhs = phi_pow(&inst.map, &i_c, r, opts.variant)?;
    let rhs = inst.map.apply(&arith_mean(&power(&p, r)?, &power(&q, r)?, inst.v)?)?;
    b.compare("bellman-reversed", lhs, rhs)?;
    Ok(b.finish())
}

/// Three links for `r ∈ [−1, 0]`:
/// `Φ(I−A∇B)^r ≤ Φ(I−A)^r ♯_v Φ(I−B)^r ≤ Φ((I−A)^r ♯_v (I−B)^r)
///  ≤ Φ((I−A)^r ∇_v (I−B)^r)`.
pub fn check_geometric_chain(inst: &Instance, opts: &CheckOptions) -> Result<CheckReport> {
    let id = CheckId::GeometricChain;
    check_shapes(inst)?;
    let r = need_r(inst, id)?;
    let mut b = Builder::new(id, opts, CheckInput::Operator(inst.clone()));
    b.require((-1.0..=0.0).contains(&r), || format!("r = {r} not in [-1, 0]"));
    b.spectra_in("A", &inst.a, -1.0, 1.0)?;
    b.spectra_in("B", &inst.b, -1.0, 1.0)?;
    let p = inst.a.one_minus();
    let q = inst.b.one_minus();
    let i_c = arith_mean(&inst.a, &inst.b, inst.v)?.one_minus();
    strict(&mut b, "I - A", &p)?;
    strict(&mut b, "I - B", &q)?;
    strict(&mut b, "I - A#B", &i_c)?;
    if !b.unmet.is_empty() {
        return Ok(b.unmet_report());
    }
    let (pr, qr) = (power(&p, r)?, power(&q, r)?);
    let first = phi_pow(&inst.map, &i_c, r, opts.variant)?;
    let mapped_geo = geom_mean(
        &phi_pow(&inst.map, &p, r, opts.variant)?,
        &phi_pow(&inst.map, &q, r, opts.variant)?,
        inst.v,
    )?;
    let geo_mapped = inst.map.apply(&geom_mean(&pr, &qr, inst.v)?)?;
    let arith_mapped = inst.map.apply(&arith_mean(&pr, &qr, inst.v)?)?;
    b.compare("power-vs-geometric", first, mapped_geo.clone())?;
    b.compare("ando", mapped_geo, geo_mapped.clone())?;
    b.compare("geometric-vs-arithmetic", geo_mapped, arith_mapped)?;
    Ok(b.finish())
}

/// `⟨f(A)u, u⟩ ≤ f(⟨Au, u⟩)` for concave `f` and a unit vector `u`.
pub fn check_jensen_vector(
    a: &SymMatrix,
    f: &ScalarFunction,
    u: &[f64],
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let inst = Instance {
        a: a.clone(),
        b: a.clone(),
        v: Weight::new(0.0)?,
        r: None,
        f: Some(f.clone()),
        map: PositiveMap::vector_state(u.to_vec())?,
        bounds: None,
        seed: None,
    };
    check_jensen_vector_instance(&inst, opts)
}

fn check_jensen_vector_instance(inst: &Instance, opts: &CheckOptions) -> Result<CheckReport> {
    let id = CheckId::JensenVector;
    check_shapes(inst)?;
    let f = need_f(inst, id)?;
    let PositiveMap::VectorState { .. } = inst.map else {
        return Err(Error::InvalidConfig(format!("{id} needs a vector-state map")));
    };
    let ev = inst.a.eigenvalues()?;
    let hull = match inst.bounds {
        Some(bd) => bd,
        None => IntervalBounds::new(ev[0], ev[ev.len() - 1])?,
    };
    let mut b = Builder::new(id, opts, CheckInput::Operator(inst.clone()));
    b.spectra_in("A", &inst.a, hull.m(), hull.big_m())?;
    b.shape(f, &hull, &[Shape::Concave, Shape::Affine]);
    if !b.unmet.is_empty() {
        return Ok(b.unmet_report());
    }
    let lhs = inst.map.apply(&apply_function(&inst.a, f)?)?;
    let mean = inst.map.apply(&inst.a)?.get(0, 0);
    let mean = hull.clamp(mean);
    let rhs = scalar(f.eval(mean)?);
    b.compare("jensen", lhs, rhs)?;
    Ok(b.finish())
}

/// `K Φ(f(A)) ≤ f(Φ(A)) ≤ K⁻¹ Φ(f(A))` for concave positive `f`.
pub fn check_map_jensen(inst: &Instance, opts: &CheckOptions) -> Result<CheckReport> {
    let id = CheckId::MapJensen;
    check_shapes(inst)?;
    let f = need_f(inst, id)?;
    let bounds = need_bounds(inst, id)?;
    let mut b = Builder::new(id, opts, CheckInput::Operator(inst.clone()));
    b.spectra_in("A", &inst.a, bounds.m(), bounds.big_m())?;
    b.shape(f, &bounds, &[Shape::Concave, Shape::Affine]);
    if !b.unmet.is_empty() {
        return Ok(b.unmet_report());
    }
    let k = match kantorovich(f, &bounds) {
        Ok(k) => k.value,
        Err(e) => {
            b.unmet.push(e.to_string());
            return Ok(b.unmet_report());
        }
    };
    b.constant("K", k);
    let phi_f = inst.map.apply(&apply_function(&inst.a, f)?)?;
    let f_phi = apply_function(&inst.map.apply(&inst.a)?, f)?;
    b.compare("lower", phi_f.scale(k), f_phi.clone())?;
    b.compare("upper", f_phi, phi_f.scale(1.0 / k))?;
    Ok(b.finish())
}

struct MeanParts {
    /// `Φ(f(A)) ∇_v Φ(f(B))`
    mapped_mean: SymMatrix,
    /// `f(Φ(A ∇_v B))`
    f_of_mapped: SymMatrix,
    /// `f(A) ∇_v f(B)`
    mean_of_f: SymMatrix,
    /// `f(A ∇_v B)`
    f_of_mean: SymMatrix,
}

fn mean_parts(inst: &Instance, f: &ScalarFunction) -> Result<MeanParts> {
    let fa = apply_function(&inst.a, f)?;
    let fb = apply_function(&inst.b, f)?;
    let c = arith_mean(&inst.a, &inst.b, inst.v)?;
    Ok(MeanParts {
        mapped_mean: arith_mean(&inst.map.apply(&fa)?, &inst.map.apply(&fb)?, inst.v)?,
        f_of_mapped: apply_function(&inst.map.apply(&c)?, f)?,
        mean_of_f: arith_mean(&fa, &fb, inst.v)?,
        f_of_mean: apply_function(&c, f)?,
    })
}

fn two_operator_hypotheses(
    b: &mut Builder<'_>,
    inst: &Instance,
    f: &ScalarFunction,
    bounds: &IntervalBounds,
    shapes: &[Shape],
) -> Result<()> {
    b.spectra_in("A", &inst.a, bounds.m(), bounds.big_m())?;
    b.spectra_in("B", &inst.b, bounds.m(), bounds.big_m())?;
    b.shape(f, bounds, shapes);
    Ok(())
}

/// `Φ(f(A)) ∇_v Φ(f(B)) ≤ K⁻² f(Φ(A∇_vB))` for concave positive `f`, with
/// the operator-level step `f(A)∇_v f(B) ≤ K⁻¹ f(A∇_vB)` as a second link.
pub fn check_prop_concave(inst: &Instance, opts: &CheckOptions) -> Result<CheckReport> {
    let id = CheckId::PropConcave;
    check_shapes(inst)?;
    let f = need_f(inst, id)?;
    let bounds = need_bounds(inst, id)?;
    let mut b = Builder::new(id, opts, CheckInput::Operator(inst.clone()));
    two_operator_hypotheses(&mut b, inst, f, &bounds, &[Shape::Concave, Shape::Affine])?;
    if !b.unmet.is_empty() {
        return Ok(b.unmet_report());
    }
    let k = match kantorovich(f, &bounds) {
        Ok(k) => k.value,
        Err(e) => {
            b.unmet.push(e.to_string());
            return Ok(b.unmet_report());
        }
    };
    b.constant("K", k);
    b.constant("K2", k * k);
    let parts = mean_parts(inst, f)?;
    b.compare("mapped", parts.mapped_mean, parts.f_of_mapped.scale(1.0 / (k * k)))?;
    b.compare("operator", parts.mean_of_f, parts.f_of_mean.scale(1.0 / k))?;
    Ok(b.finish())
}

/// `K⁻² f(Φ(A∇_vB)) ≤ Φ(f(A)) ∇_v Φ(f(B))` for convex positive `f`, with
/// `K⁻¹ f(A∇_vB) ≤ f(A)∇_v f(B)` as a second link.
pub fn check_prop_convex(inst: &Instance, opts: &CheckOptions) -> Result<CheckReport> {
    let id = CheckId::PropConvex;
    check_shapes(inst)?;
    let f = need_f(inst, id)?;
    let bounds = need_bounds(inst, id)?;
    let mut b = Builder::new(id, opts, CheckInput::Operator(inst.clone()));
    two_operator_hypotheses(&mut b, inst, f, &bounds, &[Shape::Convex, Shape::Affine])?;
    if !b.unmet.is_empty() {
        return Ok(b.unmet_report());
    }
    let k = match kantorovich(f, &bounds) {
        Ok(k) => k.value,
        Err(e) => {
            b.unmet.push(e.to_string());
            return Ok(b.unmet_report());
        }
    };
    b.constant("K", k);
    b.constant("K2", k * k);
    let parts = mean_parts(inst, f)?;
    b.compare("mapped", parts.f_of_mapped.scale(1.0 / (k * k)), parts.mapped_mean)?;
    b.compare("operator", parts.f_of_mean.scale(1.0 / k), parts.mean_of_f)?;
    Ok(b.finish())
}

fn power_one_minus_hypotheses(
    b: &mut Builder<'_>,
    inst: &Instance,
    r: f64,
    bounds: &IntervalBounds,
) -> Result<()> {
    b.require(!in_bellman_reverse_range(r), || {
        format!("r = {r} lies in [-1, 0] or [1, 2]")
    });
    b.require(
        bounds.m() > 0.0 && bounds.big_m() <= 1.0 - STRICTNESS_MARGIN,
        || format!("need 0 < m <= M < 1 - {STRICTNESS_MARGIN:e}, got {bounds}"),
    );
    b.spectra_in("A", &inst.a, bounds.m(), bounds.big_m())?;
    b.spectra_in("B", &inst.b, bounds.m(), bounds.big_m())?;
    Ok(())
}

/// `(I − Φ(A∇_vB))^r ≤ K(m, M, (1−t)^r)² Φ((I−A)^r ∇_v (I−B)^r)`.
pub fn check_thm_power(inst: &Instance, opts: &CheckOptions) -> Result<CheckReport> {
    let id = CheckId::ThmPower;
    check_shapes(inst)?;
    let r = need_r(inst, id)?;
    let bounds = need_bounds(inst, id)?;
    let mut b = Builder::new(id, opts, CheckInput::Operator(inst.clone()));
    power_one_minus_hypotheses(&mut b, inst, r, &bounds)?;
    if !b.unmet.is_empty() {
        return Ok(b.unmet_report());
    }
    let f = ScalarFunction::PowerOneMinus { r };
    let k = kantorovich_closed_form(&f, &bounds)?;
    let k_grid = kantorovich_grid(&f, &bounds, opts.oracle_points)?;
    b.constant("K", k.value);
    b.constant("K2", k.value * k.value);
    b.constant("K_argmax_t", k.argmax_t);
    b.constant("K_grid", k_grid.value);
    b.constant("K_grid_rel_diff", (k.value - k_grid.value).abs() / k.value);

    let c = arith_mean(&inst.a, &inst.b, inst.v)?;
    let lhs = apply_function(&inst.map.apply(&c)?, &f)?;
    let mean = arith_mean(&apply_function(&inst.a, &f)?, &apply_function(&inst.b, &f)?, inst.v)?;
    let rhs = inst.map.apply(&mean)?.scale(k.value * k.value);
    b.compare("kantorovich", lhs, rhs)?;
    Ok(b.finish())
}

/// `exp(Φ(A∇_vB)) ≤ K(m, M, exp)² Φ(exp(A) ∇_v exp(B))`.
pub fn check_exp_corollary(inst: &Instance, opts: &CheckOptions) -> Result<CheckReport> {
    let id = CheckId::ExpCorollary;
    check_shapes(inst)?;
    let bounds = need_bounds(inst, id)?;
    let mut b = Builder::new(id, opts, CheckInput::Operator(inst.clone()));
    b.spectra_in("A", &inst.a, bounds.m(), bounds.big_m())?;
    b.spectra_in("B", &inst.b, bounds.m(), bounds.big_m())?;
    if !b.unmet.is_empty() {
        return Ok(b.unmet_report());
    }
    let f = ScalarFunction::Exp;
    let k = kantorovich_closed_form(&f, &bounds)?;
    b.constant("K", k.value);
    b.constant("K2", k.value * k.value);
    b.constant("K_argmax_t", k.argmax_t);
    let parts = mean_parts(inst, &f)?;
    b.compare(
        "kantorovich",
        parts.f_of_mapped,
        parts.mapped_mean.scale(k.value * k.value),
    )?;
    Ok(b.finish())
}

/// `β I ≤ f(A)∇_v f(B) − f(A∇_vB) ≤ −β I` for concave `f` on `[m, M]`, `m > 0`.
pub fn check_lemma_mean_defect(
    a: &SymMatrix,
    b: &SymMatrix,
    v: Weight,
    f: &ScalarFunction,
    bounds: &IntervalBounds,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let inst = Instance {
        a: a.clone(),
        b: b.clone(),
        v,
        r: None,
        f: Some(f.clone()),
        map: PositiveMap::identity(a.n())?,
        bounds: Some(*bounds),
        seed: None,
    };
    check_lemma_mean_defect_instance(&inst, opts)
}

fn check_lemma_mean_defect_instance(inst: &Instance, opts: &CheckOptions) -> Result<CheckReport> {
    let id = CheckId::LemmaMeanDefect;
    check_shapes(inst)?;
    let f = need_f(inst, id)?;
    let bounds = need_bounds(inst, id)?;
    let mut b = Builder::new(id, opts, CheckInput::Operator(inst.clone()));
    b.require(bounds.m() > 0.0, || format!("need m > 0, got {bounds}"));
    two_operator_hypotheses(&mut b, inst, f, &bounds, &[Shape::Concave, Shape::Affine])?;
    if !b.unmet.is_empty() {
        return Ok(b.unmet_report());
    }
    let beta = beta(f, &bounds)?.value;
    b.constant("beta", beta);
    let parts = mean_parts(inst, f)?;
    let defect = parts.mean_of_f.sub(&parts.f_of_mean)?;
    let n = inst.a.n();
    b.compare("lower", SymMatrix::scalar(n, beta)?, defect.clone())?;
    b.compare("upper", defect, SymMatrix::scalar(n, -beta)?)?;
    Ok(b.finish())
}

/// `−β̃ I ≤ f(Φ(A)) − Φ(f(A)) ≤ β̃ I` for concave `f` on `[m, M]`.
pub fn check_lemma_map_defect(
    a: &SymMatrix,
    f: &ScalarFunction,
    phi: &PositiveMap,
    bounds: &IntervalBounds,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let inst = Instance {
        a: a.clone(),
        b: a.clone(),
        v: Weight::new(0.0)?,
        r: None,
        f: Some(f.clone()),
        map: phi.clone(),
        bounds: Some(*bounds),
        seed: None,
    };
    check_lemma_map_defect_instance(&inst, opts)
}

fn check_lemma_map_defect_instance(inst: &Instance, opts: &CheckOptions) -> Result<CheckReport> {
    let id = CheckId::LemmaMapDefect;
    check_shapes(inst)?;
    let f = need_f(inst, id)?;
    let bounds = need_bounds(inst, id)?;
    let mut b = Builder::new(id, opts, CheckInput::Operator(inst.clone()));
    b.spectra_in("A", &inst.a, bounds.m(), bounds.big_m())?;
    b.shape(f, &bounds, &[Shape::Concave, Shape::Affine]);
    if !b.unmet.is_empty() {
        return Ok(b.unmet_report());
    }
    let bt = beta_tilde(f, &bounds)?.value;
    b.constant("beta_tilde", bt);
    let f_phi = apply_function(&inst.map.apply(&inst.a)?, f)?;
    let phi_f = inst.map.apply(&apply_function(&inst.a, f)?)?;
    let defect = f_phi.sub(&phi_f)?;
    let k = defect.n();
    b.compare("lower", SymMatrix::scalar(k, -bt)?, defect.clone())?;
    b.compare("upper", defect, SymMatrix::scalar(k, bt)?)?;
    Ok(b.finish())
}

/// `f(Φ(A∇_vB)) ≤ Φ(f(A)) ∇_v Φ(f(B)) + 2β̃ I` for concave `f`.
pub fn check_additive_theorem(inst: &Instance, opts: &CheckOptions) -> Result<CheckReport> {
    let id = CheckId::AdditiveTheorem;
    check_shapes(inst)?;
    let f = need_f(inst, id)?;
    let bounds = need_bounds(inst, id)?;
    let mut b = Builder::new(id, opts, CheckInput::Operator(inst.clone()));
    two_operator_hypotheses(&mut b, inst, f, &bounds, &[Shape::Concave, Shape::Affine])?;
    if !b.unmet.is_empty() {
        return Ok(b.unmet_report());
    }
    let bt = beta_tilde(f, &bounds)?.value;
    let be = beta(f, &bounds)?.value;
    b.constant("beta", be);
    b.constant("beta_tilde", bt);
    // statement bound 2β̃ against the bound β̃ − β reached by the proof
    b.constant("bound_identity_residual", 2.0 * bt - (bt - be));
    let parts = mean_parts(inst, f)?;
    b.compare("additive", parts.f_of_mapped, parts.mapped_mean.shift(2.0 * bt))?;
    Ok(b.finish())
}

/// `(I − Φ(A∇_vB))^r ≤ Φ((I−A)^r ∇_v (I−B)^r) + 2β̃(m, M, (1−t)^r) I`.
pub fn check_additive_corollary(inst: &Instance, opts: &CheckOptions) -> Result<CheckReport> {
    let id = CheckId::AdditiveCorollary;
    check_shapes(inst)?;
    let r = need_r(inst, id)?;
    let bounds = need_bounds(inst, id)?;
    let mut b = Builder::new(id, opts, CheckInput::Operator(inst.clone()));
    power_one_minus_hypotheses(&mut b, inst, r, &bounds)?;
    if !b.unmet.is_empty() {
        return Ok(b.unmet_report());
    }
    let f = ScalarFunction::PowerOneMinus { r };
    let bt = beta_tilde(&f, &bounds)?.value;
    b.constant("beta_tilde", bt);
    let parts = mean_parts(inst, &f)?;
    b.compare("additive", parts.f_of_mapped, parts.mapped_mean.shift(2.0 * bt))?;
    Ok(b.finish())
}

/// The fixed 2×2 instance `A = [[2,1],[1,1]]`, `B = [[1,0],[0,0]]`,
/// `v = ½`, `r = 3`, `Φ = id`.
pub fn counterexample_instance() -> Instance {
    Instance {
        a: SymMatrix::from_rows(&[[2.0, 1.0], [1.0, 1.0]]).expect("symmetric"),
        b: SymMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).expect("symmetric"),
        v: Weight::HALF,
        r: Some(3.0),
        f: None,
        map: PositiveMap::Identity { n: 2 },
        bounds: None,
        seed: None,
    }
}

/// Evaluates `Φ(I − A∇_vB)^r` against `Φ((I−A)^r ∇_v (I−B)^r)` without
/// policing hypotheses and reports the measured Löwner relation. The claim
/// under test is that the two sides are *not* ordered as `lhs ≤ rhs`.
pub fn check_counterexample(inst: &Instance, opts: &CheckOptions) -> Result<CheckReport> {
    let id = CheckId::Counterexample;
    check_shapes(inst)?;
    let r = need_r(inst, id)?;
    let mut b = Builder::new(id, opts, CheckInput::Operator(inst.clone()));
    for (name, x) in [("A", &inst.a), ("B", &inst.b)] {
        let nrm = operator_norm(x)?;
        if nrm > 1.0 + SPECTRUM_TOL {
            b.flags.push(format!(
                "hypothesis-violating: {name} is not a contraction (norm {nrm})"
            ));
        }
    }
    if !in_bellman_reverse_range(r) {
        b.flags.push(format!("r = {r} lies outside [-1, 0] and [1, 2]"));
    }
    let f = ScalarFunction::Power { p: r };
    let c = arith_mean(&inst.a, &inst.b, inst.v)?;
    let lhs = phi_pow(&inst.map, &c.one_minus(), r, opts.variant)?;
    let mean = arith_mean(
        &apply_function(&inst.a.one_minus(), &f)?,
        &apply_function(&inst.b.one_minus(), &f)?,
        inst.v,
    )?;
    let rhs = inst.map.apply(&mean)?;
    b.compare("claimed-failure", lhs, rhs)?;
    let verdict = match b.links[0].relation {
        Relation::Incomparable => Verdict::Incomparable,
        Relation::GreaterEq => Verdict::Violated,
        Relation::LessEq | Relation::Equal => Verdict::Holds,
    };
    Ok(b.with_verdict(verdict, None))
}

pub fn reproduce_counterexample(opts: &CheckOptions) -> Result<CheckReport> {
    check_counterexample(&counterexample_instance(), opts)
}

fn snap(base: f64, reference: f64) -> f64 {
    if base.abs() <= BASE_SNAP * reference.abs() {
        0.0
    } else {
        base
    }
}

/// `(A^r − Σaᵢ^r)^{1/r} + (B^r − Σbᵢ^r)^{1/r} ≤ ((A+B)^r − Σ(aᵢ+bᵢ)^r)^{1/r}`.
pub fn check_scalar_bellman(input: &ScalarBellmanInput, opts: &CheckOptions) -> Result<CheckReport> {
    let id = CheckId::ScalarBellman;
    let mut b = Builder::new(id, opts, CheckInput::ScalarBellman(input.clone()));
    let ScalarBellmanInput {
        a,
        b: bs,
        a_cap,
        b_cap,
        r,
    } = input;
    b.require(!a.is_empty() && a.len() == bs.len(), || {
        "a and b must be nonempty and of equal length".into()
    });
    b.require(*r >= 1, || "r must be a positive integer".into());
    b.require(
        a.iter().chain(bs).chain([a_cap, b_cap]).all(|&x| x > 0.0),
        || "all values must be positive".into(),
    );
    if !b.unmet.is_empty() {
        return Ok(b.unmet_report());
    }
    let ri = *r as i32;
    let inv = 1.0 / f64::from(*r);
    let sum_pow = |xs: &mut dyn Iterator<Item = f64>| xs.map(|x| x.powi(ri)).sum::<f64>();
    let cap_a = a_cap.powi(ri);
    let cap_b = b_cap.powi(ri);
    let cap_ab = (a_cap + b_cap).powi(ri);
    let base_a = snap(cap_a - sum_pow(&mut a.iter().copied()), cap_a);
    let base_b = snap(cap_b - sum_pow(&mut bs.iter().copied()), cap_b);
    let base_ab = snap(
        cap_ab - sum_pow(&mut a.iter().zip(bs).map(|(x, y)| x + y)),
        cap_ab,
    );
    b.require(base_a >= 0.0, || format!("sum a_i^r exceeds A^r by {:e}", -base_a));
    b.require(base_b >= 0.0, || format!("sum b_i^r exceeds B^r by {:e}", -base_b));
    if !b.unmet.is_empty() {
        return Ok(b.unmet_report());
    }
    b.constant("base_a", base_a);
    b.constant("base_b", base_b);
    b.constant("base_ab", base_ab);
    let lhs = base_a.powf(inv) + base_b.powf(inv);
    // a negative combined base is itself a failure: report it as -|.|^{1/r}
    let rhs = base_ab.signum() * base_ab.abs().powf(inv);
    b.compare("bellman", scalar(lhs), scalar(rhs))?;
    Ok(b.finish())
}

/// The scalar chain behind the `Σ a_k^{1/r}` corollary for `r > 2`, with
/// `v = M₂/(M₁+M₂)` and `a_k/M₁`, `b_k/M₂` substituted.
///
/// Links: the concavity step, the Kantorovich step with `ξ = K²`, and the
/// final un-normalized display.
pub fn check_scalar_remark_chain(
    input: &RemarkChainInput,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let id = CheckId::ScalarRemarkChain;
    let mut b = Builder::new(id, opts, CheckInput::RemarkChain(input.clone()));
    let RemarkChainInput {
        a,
        b: bs,
        m1,
        m2,
        r,
        bounds,
    } = input;
    let (m1, m2, r) = (*m1, *m2, *r);
    b.require(r > 2.0, || format!("r = {r} must exceed 2"));
    b.require(!a.is_empty() && a.len() == bs.len(), || {
        "a and b must be nonempty and of equal length".into()
    });
    b.require(
        a.iter().chain(bs).chain([&m1, &m2]).all(|&x| x > 0.0),
        || "all values must be positive".into(),
    );
    if !b.unmet.is_empty() {
        return Ok(b.unmet_report());
    }
    let inv = 1.0 / r;
    let total = m1 + m2;
    let v = m2 / total;
    let x: f64 = a.iter().map(|ak| (ak / m1).powf(inv)).sum();
    let y: f64 = bs.iter().map(|bk| (bk / m2).powf(inv)).sum();
    let bounds = match bounds {
        Some(bd) => *bd,
        None => IntervalBounds::new(x.min(y), x.max(y))?,
    };
    b.require(bounds.m() > 0.0 && bounds.big_m() < 1.0, || {
        format!("need 0 < m <= M < 1, got {bounds}")
    });
    for (name, s) in [("sum a_k^(1/r)", x), ("sum b_k^(1/r)", y)] {
        b.require(s >= bounds.m() && s <= bounds.big_m(), || {
            format!("{name} = {s} outside {bounds}")
        });
    }
    let s: f64 = a
        .iter()
        .zip(bs)
        .map(|(ak, bk)| ((1.0 - v) * ak / m1 + v * bk / m2).powf(inv))
        .sum();
    b.require(s < 1.0, || {
        format!("sum (a_k # b_k)^(1/r) = {s} is not below 1")
    });
    if !b.unmet.is_empty() {
        return Ok(b.unmet_report());
    }
    let f = ScalarFunction::PowerOneMinus { r };
    let k = kantorovich(&f, &bounds)?;
    let xi = k.value * k.value;
    b.constant("v", v);
    b.constant("x", x);
    b.constant("y", y);
    b.constant("K", k.value);
    b.constant("xi", xi);

    let concave_lhs = (1.0 - s).powf(r);
    let mid = ((1.0 - v) * (1.0 - x) + v * (1.0 - y)).powf(r);
    let chain_rhs = xi * ((1.0 - v) * (1.0 - x).powf(r) + v * (1.0 - y).powf(r));

    let sum_ab: f64 = a.iter().zip(bs).map(|(ak, bk)| (ak + bk).powf(inv)).sum();
    let sum_a: f64 = a.iter().map(|ak| ak.powf(inv)).sum();
    let sum_b: f64 = bs.iter().map(|bk| bk.powf(inv)).sum();
    let final_lhs = (total.powf(inv) - sum_ab).powf(r) / total;
    let final_rhs =
        xi * ((m1.powf(inv) - sum_a).powf(r) / total + (m2.powf(inv) - sum_b).powf(r) / total);
    b.constant("final_lhs_residual", (final_lhs - concave_lhs).abs());
    b.constant("final_rhs_residual", (final_rhs - chain_rhs).abs());

    b.compare("concavity", scalar(concave_lhs), scalar(mid))?;
    b.compare("kantorovich", scalar(mid), scalar(chain_rhs))?;
    b.compare("final", scalar(final_lhs), scalar(final_rhs))?;
    Ok(b.finish())
}

/// Dispatches `check` on `input`.
pub fn run_check(check: CheckId, input: &CheckInput, opts: &CheckOptions) -> Result<CheckReport> {
    let mismatch = || Error::InvalidConfig(format!("{check} cannot run on this input kind"));
    match (check, input) {
        (CheckId::ScalarBellman, CheckInput::ScalarBellman(i)) => check_scalar_bellman(i, opts),
        (CheckId::ScalarRemarkChain, CheckInput::RemarkChain(i)) => {
            check_scalar_remark_chain(i, opts)
        }
        (CheckId::ScalarBellman | CheckId::ScalarRemarkChain, _) => Err(mismatch()),
        (_, CheckInput::Operator(inst)) => match check {
            CheckId::BellmanClassic => check_bellman_classic(inst, opts),
            CheckId::BellmanReversed => check_bellman_reversed(inst, opts),
            CheckId::GeometricChain => check_geometric_chain(inst, opts),
            CheckId::JensenVector => check_jensen_vector_instance(inst, opts),
            CheckId::MapJensen => check_map_jensen(inst, opts),
            CheckId::PropConcave => check_prop_concave(inst, opts),
            CheckId::PropConvex => check_prop_convex(inst, opts),
            CheckId::ThmPower => check_thm_power(inst, opts),
            CheckId::ExpCorollary => check_exp_corollary(inst, opts),
            CheckId::LemmaMeanDefect => check_lemma_mean_defect_instance(inst, opts),
            CheckId::LemmaMapDefect => check_lemma_map_defect_instance(inst, opts),
            CheckId::AdditiveTheorem => check_additive_theorem(inst, opts),
            CheckId::AdditiveCorollary => check_additive_corollary(inst, opts),
            CheckId::Counterexample => check_counterexample(inst, opts),
            CheckId::ScalarBellman | CheckId::ScalarRemarkChain => unreachable!(),
        },
        _ => Err(mismatch()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_symmetric_in, rng_from_seed};

    fn opts() -> CheckOptions {
        CheckOptions::default()
    }

    fn inst(n: usize, lo: f64, hi: f64, seed: u64) -> Instance {
        Instance {
            a: random_symmetric_in(n, lo, hi, seed).unwrap(),
            b: random_symmetric_in(n, lo, hi, seed + 1).unwrap(),
            v: Weight::new(0.3).unwrap(),
            r: None,
            f: None,
            map: PositiveMap::identity(n).unwrap(),
            bounds: Some(IntervalBounds::new(lo, hi).unwrap()),
            seed: Some(seed),
        }
    }

    #[test]
    fn ids_round_trip() {
        for id in CheckId::ALL {
            assert_eq!(id.as_str().parse::<CheckId>().unwrap(), id);
            let js = serde_json::to_string(&id).unwrap();
            assert_eq!(js, format!("\"{}\"", id.as_str()));
        }
        assert!("nope".parse::<CheckId>().is_err());
    }

    #[test]
    fn counterexample_is_incomparable() {
        let rep = reproduce_counterexample(&opts()).unwrap();
        assert_eq!(rep.verdict, Verdict::Incomparable);
        let l = &rep.links[0];
        assert!(l.lhs.max_abs_diff(&SymMatrix::from_rows(&[[-0.25, -0.25], [-0.25, 0.25]]).unwrap()).unwrap() < 1e-12);
        assert!(l.rhs.max_abs_diff(&SymMatrix::from_rows(&[[-1.5, -1.0], [-1.0, 0.0]]).unwrap()).unwrap() < 1e-12);
        assert!(rep.flags.iter().any(|f| f.contains("contraction")));
    }

    #[test]
    fn classic_holds_on_random_instance() {
        let mut i = inst(4, 0.0, 0.95, 10);
        i.r = Some(0.4);
        let rep = check_bellman_classic(&i, &opts()).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds, "{rep:?}");
        i.r = Some(1.5);
        assert_eq!(check_bellman_classic(&i, &opts()).unwrap().verdict, Verdict::HypothesisUnmet);
    }

    #[test]
    fn reversed_and_chain_hold() {
        for (seed, r) in [(1, -0.7), (2, 1.6), (3, -1.0), (4, 2.0)] {
            let mut i = inst(3, 0.05, 0.9, seed);
            i.r = Some(r);
            i.map = PositiveMap::random(crate::maps::MapKind::Isometry, 3, &mut rng_from_seed(seed)).unwrap();
            let rep = check_bellman_reversed(&i, &opts()).unwrap();
            assert_eq!(rep.verdict, Verdict::Holds, "r={r}: {rep:?}");
            if r <= 0.0 {
                let rep = check_geometric_chain(&i, &opts()).unwrap();
                assert_eq!(rep.verdict, Verdict::Holds, "r={r}: {rep:?}");
                assert_eq!(rep.links.len(), 3);
            }
        }
    }

    #[test]
    fn thm_power_holds_and_records_constants() {
        let mut i = inst(4, 0.1, 0.5, 7);
        i.r = Some(3.0);
        let rep = check_thm_power(&i, &opts()).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds, "{rep:?}");
        assert!(rep.constants["K"] >= 1.0);
        assert!(rep.constants["K_grid_rel_diff"] < 1e-6);
        i.r = Some(1.5);
        assert_eq!(check_thm_power(&i, &opts()).unwrap().verdict, Verdict::HypothesisUnmet);
    }

    #[test]
    fn jensen_vector_scalar_sides() {
        let a = SymMatrix::diag(&[0.2, 0.8]).unwrap();
        let f = ScalarFunction::Power { p: 0.5 };
        let u = [1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()];
        let rep = check_jensen_vector(&a, &f, &u, &opts()).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        let want_l = 0.5 * (0.2f64.sqrt() + 0.8f64.sqrt());
        assert!((rep.lhs.unwrap().get(0, 0) - want_l).abs() < 1e-14);
        assert!((rep.rhs.unwrap().get(0, 0) - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn defect_lemmas_hold_and_affine_is_exact() {
        let i = inst(3, 0.2, 0.9, 21);
        let f = ScalarFunction::Power { p: 0.5 };
        let b = i.bounds.unwrap();
        let rep = check_lemma_mean_defect(&i.a, &i.b, i.v, &f, &b, &opts()).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds, "{rep:?}");
        let trace = PositiveMap::trace_normalized(3).unwrap();
        let rep = check_lemma_map_defect(&i.a, &f, &trace, &b, &opts()).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds, "{rep:?}");
        let aff = ScalarFunction::Affine { a: 2.0, b: 1.0 };
        let rep = check_lemma_map_defect(&i.a, &aff, &trace, &b, &opts()).unwrap();
        assert_eq!(rep.constants["beta_tilde"], 0.0);
        assert_eq!(rep.verdict, Verdict::Holds);
    }

    #[test]
    fn scalar_bellman_examples() {
        let sat = ScalarBellmanInput { a: vec![0.3], b: vec![0.4], a_cap: 0.3, b_cap: 0.4, r: 2 };
        let rep = check_scalar_bellman(&sat, &opts()).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert_eq!(rep.links[0].relation, Relation::Equal);
        let bad = ScalarBellmanInput { a: vec![0.6], b: vec![0.1], a_cap: 0.5, b_cap: 0.4, r: 2 };
        assert_eq!(check_scalar_bellman(&bad, &opts()).unwrap().verdict, Verdict::HypothesisUnmet);
        let gen = ScalarBellmanInput { a: vec![0.1, 0.2], b: vec![0.3, 0.1], a_cap: 1.0, b_cap: 2.0, r: 3 };
        assert_eq!(check_scalar_bellman(&gen, &opts()).unwrap().verdict, Verdict::Holds);
    }

    #[test]
    fn remark_chain_final_display_matches_normalized_form() {
        let input = RemarkChainInput {
            a: vec![0.001, 0.002],
            b: vec![0.003, 0.0005],
            m1: 1.0,
            m2: 2.0,
            r: 3.0,
            bounds: None,
        };
        let rep = check_scalar_remark_chain(&input, &opts()).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds, "{rep:?}");
        assert!(rep.constants["final_lhs_residual"] < 1e-12);
        assert!(rep.constants["final_rhs_residual"] < 1e-12);
    }

    #[test]
    fn run_check_rejects_wrong_input_kind() {
        let sb = CheckInput::ScalarBellman(ScalarBellmanInput { a: vec![0.1], b: vec![0.1], a_cap: 1.0, b_cap: 1.0, r: 2 });
        assert!(run_check(CheckId::ThmPower, &sb, &opts()).is_err());
        let op = CheckInput::Operator(counterexample_instance());
        assert!(run_check(CheckId::ScalarBellman, &op, &opts()).is_err());
        assert_eq!(run_check(CheckId::Counterexample, &op, &opts()).unwrap().verdict, Verdict::Incomparable);
    }

    #[test]
    fn report_json_round_trip() {
        let rep = reproduce_counterexample(&opts()).unwrap();
        let js = serde_json::to_string(&rep).unwrap();
        let back: CheckReport = serde_json::from_str(&js).unwrap();
        assert_eq!(back, rep);
    }
}
