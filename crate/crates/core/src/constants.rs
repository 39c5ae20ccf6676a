//! Sharpness constants over an interval `[m, M]`:
//!
//! * the Kantorovich-type ratio `K(m, M, f) = max_t chord(t) / f(t)`,
//! * the defect `β(m, M, f) = min_t (chord(t) − f(t))`,
//! * the defect `β̃(m, M, f) = max_t (f(t) − chord(t))`,
//!
//! where `chord` is the affine function through `(m, f(m))` and `(M, f(M))`.
//!
//! For `(1 − t)^r` and `exp` the ratio has a single stationary point given in
//! closed form, so `K` is the best of `{m, M, t₁}`. Every constant can also be
//! computed on a dense uniform grid, which serves as an independent oracle.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::ScalarFunction;

/// Grid size used for `K` when no closed form applies.
pub const K_GRID_POINTS: usize = 1_000_000;
/// Grid size used for `β` and `β̃`.
pub const BETA_GRID_POINTS: usize = 100_000;
/// Below this chord slope no critical point is reported.
pub const MIN_CHORD_SLOPE: f64 = 1e-14;

/// Closed interval `[m, M]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoundsRaw", into = "BoundsRaw")]
pub struct IntervalBounds {
    m: f64,
    big_m: f64,
}

#[derive(Serialize, Deserialize)]
struct BoundsRaw {
    m: f64,
    #[serde(rename = "M")]
    big_m: f64,
}

impl TryFrom<BoundsRaw> for IntervalBounds {
    type Error = Error;
    fn try_from(raw: BoundsRaw) -> Result<Self> {
        IntervalBounds::new(raw.m, raw.big_m)
    }
}

impl From<IntervalBounds> for BoundsRaw {
    fn from(b: IntervalBounds) -> Self {
        BoundsRaw {
            m: b.m,
            big_m: b.big_m,
        }
    }
}

impl IntervalBounds {
    pub fn new(m: f64, big_m: f64) -> Result<Self> {
        if !m.is_finite() || !big_m.is_finite() || m > big_m {
            return Err(Error::InvalidBounds { m, big_m });
        }
        Ok(IntervalBounds { m, big_m })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn big_m(&self) -> f64 {
        self.big_m
    }

    pub fn width(&self) -> f64 {
        self.big_m - self.m
    }

    pub fn is_degenerate(&self) -> bool {
        self.m == self.big_m
    }

    /// Requires `0 < m ≤ M < 1`.
    pub fn require_unit_open(&self) -> Result<()> {
        if self.m > 0.0 && self.big_m < 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidBounds {
                m: self.m,
                big_m: self.big_m,
            })
        }
    }

    pub fn clamp(&self, t: f64) -> f64 {
        t.clamp(self.m, self.big_m)
    }

    /// `points` uniformly spaced abscissae, both endpoints included exactly.
    pub fn grid(&self, points: usize) -> impl Iterator<Item = f64> + '_ {
        let last = points.saturating_sub(1);
        let h = if last == 0 { 0.0 } else { self.width() / last as f64 };
        (0..points).map(move |i| {
            if i == last && last > 0 {
                self.big_m
            } else {
                self.m + h * i as f64
            }
        })
    }
}

impl fmt::Display for IntervalBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.m, self.big_m)
    }
}

/// Chord `μ·t + λ` through `(m, f(m))` and `(M, f(M))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChordCoefficients {
    pub mu: f64,
    pub lambda: f64,
}

impl ChordCoefficients {
    pub fn at(&self, t: f64) -> f64 {
        self.mu * t + self.lambda
    }
}

pub fn chord(f: &ScalarFunction, b: &IntervalBounds) -> Result<ChordCoefficients> {
    f.require_defined_on(b)?;
    if b.is_degenerate() {
        return Err(Error::InvalidBounds {
            m: b.m,
            big_m: b.big_m,
        });
    }
    if let ScalarFunction::Affine { a, b: c } = *f {
        return Ok(ChordCoefficients { mu: a, lambda: c });
    }
    let (m, big_m) = (b.m, b.big_m);
    let fm = f.eval_unchecked(m);
    let f_big = f.eval_unchecked(big_m);
    let w = big_m - m;
    Ok(ChordCoefficients {
        mu: (f_big - fm) / w,
        lambda: (big_m * fm - m * f_big) / w,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    GridOracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantResult {
    pub value: f64,
    pub argmax_t: f64,
    pub method: Method,
    pub f: ScalarFunction,
    pub bounds: IntervalBounds,
}

/// Stationary points of `h(t) = ((μt + λ)/f(t))²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    /// `t₁` clamped into `[m, M]`.
    pub t1: f64,
    /// Unclamped `t₁`.
    pub t1_raw: f64,
    /// Zero of the chord, `−λ/μ`; a minimum of `h`, never a maximizer.
    pub t0: f64,
    pub chord: ChordCoefficients,
}

impl CriticalPoint {
    pub fn interior(&self) -> bool {
        self.t1 == self.t1_raw
    }
}

fn power_critical_unchecked(r: f64, b: &IntervalBounds) -> Result<CriticalPoint> {
    let ch = chord(&ScalarFunction::PowerOneMinus { r }, b)?;
    if ch.mu.abs() < MIN_CHORD_SLOPE {
        return Err(Error::DegenerateChord { mu: ch.mu });
    }
    let t1_raw = -(ch.lambda * r + ch.mu) / (ch.mu * (r - 1.0));
    Ok(CriticalPoint {
        t1: b.clamp(t1_raw),
        t1_raw,
        t0: -ch.lambda / ch.mu,
        chord: ch,
    })
}

fn exp_critical_unchecked(b: &IntervalBounds) -> Result<CriticalPoint> {
    let ch = chord(&ScalarFunction::Exp, b)?;
    if ch.mu.abs() < MIN_CHORD_SLOPE {
        return Err(Error::DegenerateChord { mu: ch.mu });
    }
    let t1_raw = (ch.mu - ch.lambda) / ch.mu;
    Ok(CriticalPoint {
        t1: b.clamp(t1_raw),
        t1_raw,
        t0: -ch.lambda / ch.mu,
        chord: ch,
    })
}

/// Maximizer of `((μt+λ)/(1−t)^r)²` on `[m, M]`:
/// `t₁ = −(λr + μ)/(μ(r − 1))`, clamped.
///
/// Requires `r ∉ [−1, 0] ∪ [1, 2]` and `0 < m ≤ M < 1`.
pub fn power_critical_point(r: f64, b: &IntervalBounds) -> Result<CriticalPoint> {
    if !r.is_finite() || (-1.0..=0.0).contains(&r) || (1.0..=2.0).contains(&r) {
        return Err(Error::InvalidConfig(format!(
            "power critical point needs r outside [-1,0] and [1,2], got {r}"
        )));
    }
    b.require_unit_open()?;
    power_critical_unchecked(r, b)
}

/// Maximizer of `((μt+λ)/e^t)²` on `[m, M]`: `t₁ = (μ − λ)/μ`, clamped.
///
/// Requires `0 < m ≤ M < 1`.
pub fn exp_critical_point(b: &IntervalBounds) -> Result<CriticalPoint> {
    b.require_unit_open()?;
    exp_critical_unchecked(b)
}

/// First maximizer of `g` over the uniform grid (ties resolve to the
/// smallest abscissa).
pub fn grid_argmax(b: &IntervalBounds, points: usize, g: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut best = (b.m, f64::NEG_INFINITY);
    for t in b.grid(points.max(2)) {
        let v = g(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    best
}

fn require_constant_sign(f: &ScalarFunction, b: &IntervalBounds, points: usize) -> Result<()> {
    let sign_change = || Error::SignChange {
        function: f.to_string(),
        m: b.m,
        big_m: b.big_m,
    };
    let positive = f.eval_unchecked(b.m) > 0.0;
    for t in b.grid(points.max(2)) {
        let v = f.eval_unchecked(t);
        if v == 0.0 || (v > 0.0) != positive || !v.is_finite() {
            return Err(sign_change());
        }
    }
    Ok(())
}

fn has_closed_form_k(f: &ScalarFunction, b: &IntervalBounds) -> bool {
    match f {
        ScalarFunction::Affine { .. } | ScalarFunction::Exp => true,
        ScalarFunction::PowerOneMinus { .. } => b.big_m < 1.0,
        _ => false,
    }
}

/// `K(m, M, f)`: closed form for `(1−t)^r`, `exp` and affine `f`, the
/// `10⁶`-point grid oracle otherwise.
pub fn kantorovich(f: &ScalarFunction, b: &IntervalBounds) -> Result<ConstantResult> {
    let method = if has_closed_form_k(f, b) {
        Method::ClosedForm
    } else {
        Method::GridOracle
    };
    kantorovich_with(f, b, method)
}

pub fn kantorovich_with(
    f: &ScalarFunction,
    b: &IntervalBounds,
    method: Method,
) -> Result<ConstantResult> {
    match method {
        Method::ClosedForm => kantorovich_closed_form(f, b),
        Method::GridOracle => kantorovich_grid(f, b, K_GRID_POINTS),
    }
}

fn degenerate_result(f: &ScalarFunction, b: &IntervalBounds, value: f64) -> ConstantResult {
    ConstantResult {
        value,
        argmax_t: b.m,
        method: Method::ClosedForm,
        f: f.clone(),
        bounds: *b,
    }
}

pub fn kantorovich_closed_form(f: &ScalarFunction, b: &IntervalBounds) -> Result<ConstantResult> {
    f.require_defined_on(b)?;
    if !has_closed_form_k(f, b) {
        return Err(Error::InvalidConfig(format!(
            "no closed form for K with {f} on {b}"
        )));
    }
    if let ScalarFunction::Affine { a, b: c } = *f {
        let (lo, hi) = (a * b.m + c, a * b.big_m + c);
        if lo == 0.0 || hi == 0.0 || (lo > 0.0) != (hi > 0.0) {
            return Err(Error::SignChange {
                function: f.to_string(),
                m: b.m,
                big_m: b.big_m,
            });
        }
        return Ok(degenerate_result(f, b, 1.0));
    }
    if b.is_degenerate() {
        require_constant_sign(f, b, 2)?;
        return Ok(degenerate_result(f, b, 1.0));
    }
    // (1-t)^r with M < 1 and exp are strictly positive on [m, M].
    let ch = chord(f, b)?;
    let critical = match f {
        ScalarFunction::PowerOneMinus { r } => power_critical_unchecked(*r, b),
        _ => exp_critical_unchecked(b),
    };
    let mut candidates = vec![b.m, b.big_m];
    if let Ok(cp) = critical {
        candidates.push(cp.t1);
    }
    let ratio = |t: f64| ch.at(t) / f.eval_unchecked(t);
    let mut best = (candidates[0], ratio(candidates[0]));
    for &t in &candidates[1..] {
        let v = ratio(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    Ok(ConstantResult {
        value: best.1,
        argmax_t: best.0,
        method: Method::ClosedForm,
        f: f.clone(),
        bounds: *b,
    })
}

type MemoKey = (&'static str, String, u64, u64, usize);

/// Grid constants depend only on `(f, m, M, points)` and campaigns ask for
/// the same ones on every trial, so results are kept for reuse.
fn memoized(
    kind: &'static str,
    f: &ScalarFunction,
    b: &IntervalBounds,
    points: usize,
    compute: impl FnOnce() -> Result<ConstantResult>,
) -> Result<ConstantResult> {
    const CAPACITY: usize = 4096;
    static CACHE: OnceLock<Mutex<HashMap<MemoKey, ConstantResult>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (
        kind,
        serde_json::to_string(f).expect("functions serialize"),
        b.m.to_bits(),
        b.big_m.to_bits(),
        points,
    );
    if let Some(hit) = cache.lock().expect("cache lock").get(&key) {
        return Ok(hit.clone());
    }
    let res = compute()?;
    let mut map = cache.lock().expect("cache lock");
    if map.len() >= CAPACITY {
        map.clear();
    }
    map.insert(key, res.clone());
    Ok(res)
}

/// `K` as the maximum of `chord/f` on a uniform grid of `points` abscissae.
pub fn kantorovich_grid(
    f: &ScalarFunction,
    b: &IntervalBounds,
    points: usize,
) -> Result<ConstantResult> {
    memoized("kantorovich_grid", f, b, points, || kantorovich_grid_uncached(f, b, points))
}

fn kantorovich_grid_uncached(
    f: &ScalarFunction,
    b: &IntervalBounds,
    points: usize,
) -> Result<ConstantResult> {
    f.require_defined_on(b)?;
    require_constant_sign(f, b, points.min(10_001))?;
    if b.is_degenerate() {
        return Ok(ConstantResult {
            method: Method::GridOracle,
            ..degenerate_result(f, b, 1.0)
        });
    }
    let ch = chord(f, b)?;
    let (t, v) = grid_argmax(b, points, |t| ch.at(t) / f.eval_unchecked(t));
    Ok(ConstantResult {
        value: v,
        argmax_t: t,
        method: Method::GridOracle,
        f: f.clone(),
        bounds: *b,
    })
}

/// Chord in the slope form `(f(M) − f(m))/(M − m)·(t − m) + f(m)`.
fn slope_chord(f: &ScalarFunction, b: &IntervalBounds) -> impl Fn(f64) -> f64 {
    let fm = f.eval_unchecked(b.m);
    let slope = (f.eval_unchecked(b.big_m) - fm) / b.width();
    let m = b.m;
    move |t| slope * (t - m) + fm
}

/// `β(m, M, f) = min_t (chord(t) − f(t))`; `argmax_t` holds the minimizer.
pub fn beta(f: &ScalarFunction, b: &IntervalBounds) -> Result<ConstantResult> {
    beta_grid(f, b, BETA_GRID_POINTS)
}

/// `β̃(m, M, f) = max_t (f(t) − chord(t))`.
pub fn beta_tilde(f: &ScalarFunction, b: &IntervalBounds) -> Result<ConstantResult> {
    beta_tilde_grid(f, b, BETA_GRID_POINTS)
}

pub fn beta_grid(f: &ScalarFunction, b: &IntervalBounds, points: usize) -> Result<ConstantResult> {
    memoized("beta_grid", f, b, points, || beta_grid_uncached(f, b, points))
}

fn beta_grid_uncached(f: &ScalarFunction, b: &IntervalBounds, points: usize) -> Result<ConstantResult> {
    f.require_defined_on(b)?;
    if b.is_degenerate() || matches!(f, ScalarFunction::Affine { .. }) {
        return Ok(degenerate_result(f, b, 0.0));
    }
    let chord = slope_chord(f, b);
    let mut best = (b.m, f64::INFINITY);
    for t in b.grid(points.max(2)) {
        let v = chord(t) - f.eval_unchecked(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    Ok(ConstantResult {
        value: best.1,
        argmax_t: best.0,
        method: Method::GridOracle,
        f: f.clone(),
        bounds: *b,
    })
}

pub fn beta_tilde_grid(
    f: &ScalarFunction,
    b: &IntervalBounds,
    points: usize,
) -> Result<ConstantResult> {
    memoized("beta_tilde_grid", f, b, points, || beta_tilde_grid_uncached(f, b, points))
}

fn beta_tilde_grid_uncached(
    f: &ScalarFunction,
    b: &IntervalBounds,
    points: usize,
) -> Result<ConstantResult> {
    f.require_defined_on(b)?;
    if b.is_degenerate() || matches!(f, ScalarFunction::Affine { .. }) {
        return Ok(degenerate_result(f, b, 0.0));
    }
    let chord = slope_chord(f, b);
    let (t, v) = grid_argmax(b, points, |t| f.eval_unchecked(t) - chord(t));
    Ok(ConstantResult {
        value: v,
        argmax_t: t,
        method: Method::GridOracle,
        f: f.clone(),
        bounds: *b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(m: f64, big_m: f64) -> IntervalBounds {
        IntervalBounds::new(m, big_m).unwrap()
    }

    fn cube() -> ScalarFunction {
        ScalarFunction::PowerOneMinus { r: 3.0 }
    }

    /// Golden-section maximizer, used as an oracle independent of the grid.
    fn golden_max(lo: f64, hi: f64, g: impl Fn(f64) -> f64) -> f64 {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (lo, hi);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut gc, mut gd) = (g(c), g(d));
        for _ in 0..200 {
            if gc > gd {
                b = d;
                d = c;
                gd = gc;
                c = b - inv_phi * (b - a);
                gc = g(c);
            } else {
                a = c;
                c = d;
                gc = gd;
                d = a + inv_phi * (b - a);
                gd = g(d);
            }
            if b - a < 1e-13 {
                break;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn chord_examples() {
        let ch = chord(&ScalarFunction::Affine { a: 2.5, b: -1.0 }, &bounds(0.0, 3.0)).unwrap();
        assert_eq!((ch.mu, ch.lambda), (2.5, -1.0));

        let ch = chord(&cube(), &bounds(0.1, 0.5)).unwrap();
        let mu = (0.5f64.powi(3) - 0.9f64.powi(3)) / 0.4;
        let lambda = (0.5 * 0.9f64.powi(3) - 0.1 * 0.5f64.powi(3)) / 0.4;
        assert!((ch.mu - mu).abs() < 1e-15);
        assert!((ch.lambda - lambda).abs() < 1e-15);

        let ch = chord(&ScalarFunction::Exp, &bounds(0.2, 0.7)).unwrap();
        assert!((ch.mu - (0.7f64.exp() - 0.2f64.exp()) / 0.5).abs() < 1e-14);
        assert!(ch.mu > 0.0);
        assert!(
            (ch.lambda - (0.7 * 0.2f64.exp() - 0.2 * 0.7f64.exp()) / 0.5).abs() < 1e-14
        );

        assert!(chord(&cube(), &bounds(0.3, 0.3)).is_err());
    }

    #[test]
    fn k_affine_is_one() {
        let k = kantorovich(&ScalarFunction::Affine { a: 1.0, b: 2.0 }, &bounds(0.0, 5.0)).unwrap();
        assert_eq!(k.value, 1.0);
        let err = kantorovich(&ScalarFunction::Affine { a: 1.0, b: 0.0 }, &bounds(-1.0, 1.0));
        assert!(matches!(err, Err(Error::SignChange { .. })));
    }

    #[test]
    fn k_closed_form_matches_grid() {
        let b = bounds(0.1, 0.5);
        let closed = kantorovich(&cube(), &b).unwrap();
        assert_eq!(closed.method, Method::ClosedForm);
        let grid = kantorovich_grid(&cube(), &b, K_GRID_POINTS).unwrap();
        assert!((closed.value - grid.value).abs() <= 1e-8 * closed.value);
        assert!(closed.value > 1.0);

        let b = bounds(0.1, 0.9);
        let closed = kantorovich(&ScalarFunction::Exp, &b).unwrap();
        let grid = kantorovich_grid(&ScalarFunction::Exp, &b, K_GRID_POINTS).unwrap();
        assert!((closed.value - grid.value).abs() <= 1e-8 * closed.value);
        let cp = exp_critical_point(&b).unwrap();
        assert_eq!(closed.argmax_t, cp.t1);
    }

    #[test]
    fn k_concave_is_one_at_endpoints() {
        let k = kantorovich(&ScalarFunction::Power { p: 0.5 }, &bounds(0.1, 0.9)).unwrap();
        assert_eq!(k.method, Method::GridOracle);
        assert!((k.value - 1.0).abs() < 1e-15);
        assert!(k.argmax_t == 0.1 || k.argmax_t == 0.9);
    }

    #[test]
    fn k_degenerate_interval() {
        let k = kantorovich(&cube(), &bounds(0.4, 0.4)).unwrap();
        assert_eq!((k.value, k.argmax_t), (1.0, 0.4));
        let bt = beta_tilde(&cube(), &bounds(0.4, 0.4)).unwrap();
        assert_eq!(bt.value, 0.0);
    }

    #[test]
    fn k_rejects_sign_change() {
        let f: ScalarFunction = "tabulated:points=0/-1;1/1".parse().unwrap();
        assert!(matches!(
            kantorovich(&f, &bounds(0.0, 1.0)),
            Err(Error::SignChange { .. })
        ));
    }

    #[test]
    fn power_critical_point_matches_golden_section() {
        let b = bounds(0.1, 0.5);
        let cp = power_critical_point(3.0, &b).unwrap();
        assert!(cp.interior());
        let ch = cp.chord;
        let h = |t: f64| (ch.at(t) / (1.0 - t).powi(3)).powi(2);
        let oracle = golden_max(0.1, 0.5, h);
        assert!((oracle - cp.t1).abs() <= 1e-6, "{oracle} vs {}", cp.t1);

        let d = 1e-6;
        let slope = (h(cp.t1 + d) - h(cp.t1 - d)) / (2.0 * d);
        assert!(slope.abs() <= 1e-8, "h'(t1) = {slope}");

        let b = bounds(0.2, 0.8);
        let cp = power_critical_point(-2.0, &b).unwrap();
        assert!((0.2..=0.8).contains(&cp.t1));
        let ch = cp.chord;
        let oracle = golden_max(0.2, 0.8, |t| (ch.at(t) * (1.0 - t).powi(2)).powi(2));
        assert!((oracle - cp.t1).abs() <= 1e-6);
    }

    #[test]
    fn power_critical_point_preconditions() {
        assert!(power_critical_point(1.5, &bounds(0.1, 0.5)).is_err());
        assert!(power_critical_point(-0.5, &bounds(0.1, 0.5)).is_err());
        assert!(power_critical_point(3.0, &bounds(0.1, 1.0)).is_err());
        assert!(power_critical_point(3.0, &bounds(0.0, 0.5)).is_err());
    }

    #[test]
    fn exp_critical_point_examples() {
        let b = bounds(0.1, 0.9);
        let cp = exp_critical_point(&b).unwrap();
        let ch = cp.chord;
        let h = |t: f64| (ch.at(t) / t.exp()).powi(2);
        assert!((golden_max(0.1, 0.9, h) - cp.t1).abs() <= 1e-6);
        let d = 1e-6;
        assert!(((h(cp.t1 + d) - h(cp.t1 - d)) / (2.0 * d)).abs() <= 1e-8);

        let big_m = 0.6;
        let cp = exp_critical_point(&bounds(big_m - 1e-9, big_m)).unwrap();
        assert!((cp.t1 - (big_m - 1e-9)).abs() <= 1e-9);
    }

    #[test]
    fn beta_examples() {
        let aff = ScalarFunction::Affine { a: -2.0, b: 3.0 };
        assert_eq!(beta(&aff, &bounds(0.0, 1.0)).unwrap().value, 0.0);
        assert_eq!(beta_tilde(&aff, &bounds(0.0, 1.0)).unwrap().value, 0.0);

        // sqrt on [1/4, 1]: chord 2t/3 + 1/3, min of chord - sqrt at t = 9/16
        let sqrt = ScalarFunction::Power { p: 0.5 };
        let b = beta(&sqrt, &bounds(0.25, 1.0)).unwrap();
        assert!(b.value < 0.0);
        assert!((b.value - (-1.0 / 24.0)).abs() < 1e-10);
        assert!((b.argmax_t - 9.0 / 16.0).abs() < 1e-4);

        // convex: chord above f, min of chord - f sits at an endpoint
        let b = beta(&cube(), &bounds(0.1, 0.5)).unwrap();
        assert!(b.value.abs() < 1e-15);
        assert!(b.argmax_t == 0.1 || b.argmax_t == 0.5);
    }

    #[test]
    fn beta_tilde_exp_on_unit_interval() {
        let b = bounds(0.0, 1.0);
        let bt = beta_tilde(&ScalarFunction::Exp, &b).unwrap();
        assert!(bt.value.abs() < 1e-15);
        // the chord gap e^t - (e-1)t - 1 bottoms out at ln(e-1)
        let e = 1f64.exp();
        let (t, _) = grid_argmax(&b, 1_000_001, |t| (e - 1.0) * t + 1.0 - t.exp());
        assert!((t - (e - 1.0).ln()).abs() < 1e-5);
    }

    #[test]
    fn beta_tilde_is_negated_beta() {
        for f in [
            ScalarFunction::Power { p: 0.5 },
            ScalarFunction::Power { p: 1.0 / 3.0 },
            ScalarFunction::Exp,
            cube(),
            ScalarFunction::PowerOneMinus { r: -2.0 },
        ] {
            let b = bounds(0.15, 0.85);
            let lo = beta(&f, &b).unwrap();
            let hi = beta_tilde(&f, &b).unwrap();
            assert_eq!(hi.value, -lo.value, "{f}");
        }
    }

    #[test]
    fn grid_includes_endpoints() {
        let b = bounds(0.1, 0.7);
        let pts: Vec<f64> = b.grid(7).collect();
        assert_eq!(pts[0], 0.1);
        assert_eq!(pts[6], 0.7);
        assert_eq!(bounds(0.3, 0.3).grid(1).collect::<Vec<_>>(), vec![0.3]);
    }

    #[test]
    fn invalid_bounds() {
        assert!(IntervalBounds::new(0.5, 0.1).is_err());
        assert!(IntervalBounds::new(f64::NAN, 0.1).is_err());
        assert!(serde_json::from_str::<IntervalBounds>(r#"{"m":0.9,"M":0.1}"#).is_err());
        let b: IntervalBounds = serde_json::from_str(r#"{"m":0.1,"M":0.9}"#).unwrap();
        assert_eq!(b.big_m(), 0.9);
    }
}
