//! The closed catalog of scalar functions used by the checks, with domain
//! metadata and a second-difference shape probe.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constants::IntervalBounds;
use crate::error::{Error, Result};

/// Threshold (relative to `max(1, max|f|)`) below which a second difference
/// counts as zero.
pub const SHAPE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScalarFunction {
    /// `(1 − t)^r`.
    PowerOneMinus { r: f64 },
    /// `t^p`.
    Power { p: f64 },
    Exp,
    /// `a·t + b`.
    Affine { a: f64, b: f64 },
    /// Piecewise-linear interpolation through fixed knots.
    Tabulated(Tabulated),
}

/// Knots of a piecewise-linear function; abscissae strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TabulatedRaw", into = "TabulatedRaw")]
pub struct Tabulated {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TabulatedRaw {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl TryFrom<TabulatedRaw> for Tabulated {
    type Error = Error;
    fn try_from(raw: TabulatedRaw) -> Result<Self> {
        Tabulated::new(raw.xs, raw.ys)
    }
}

impl From<Tabulated> for TabulatedRaw {
    fn from(t: Tabulated) -> Self {
        TabulatedRaw { xs: t.xs, ys: t.ys }
    }
}

impl Tabulated {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let desc = format!("{} knots", xs.len());
        if xs.len() < 2 || xs.len() != ys.len() {
            return Err(Error::parse(
                "tabulated function",
                &desc,
                "need at least two knots with matching ordinates",
            ));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::parse(
                "tabulated function",
                &desc,
                "abscissae must be strictly increasing",
            ));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::parse("tabulated function", &desc, "non-finite knot"));
        }
        Ok(Tabulated { xs, ys })
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.xs.len();
        let seg = self.xs.partition_point(|&x| x <= t).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.xs[seg], self.xs[seg + 1]);
        let (y0, y1) = (self.ys[seg], self.ys[seg + 1]);
        y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Endpoint {
    Unbounded,
    Open(f64),
    Closed(f64),
}

/// Real interval on which a catalog function is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: Endpoint,
    pub hi: Endpoint,
}

impl Domain {
    pub const REALS: Domain = Domain {
        lo: Endpoint::Unbounded,
        hi: Endpoint::Unbounded,
    };

    pub fn contains(&self, t: f64) -> bool {
        self.admit(t, 0.0).is_some()
    }

    /// Returns `t` (clamped onto a closed endpoint it overshoots by at most
    /// `margin`) when it belongs to the domain.
    pub fn admit(&self, t: f64, margin: f64) -> Option<f64> {
        if !t.is_finite() {
            return None;
        }
        let t = match self.lo {
            Endpoint::Unbounded => t,
            Endpoint::Open(lo) if t > lo => t,
            Endpoint::Closed(lo) if t >= lo - margin => t.max(lo),
            _ => return None,
        };
        match self.hi {
            Endpoint::Unbounded => Some(t),
            Endpoint::Open(hi) if t < hi => Some(t),
            Endpoint::Closed(hi) if t <= hi + margin => Some(t.min(hi)),
            _ => None,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lo {
            Endpoint::Unbounded => write!(f, "(-inf, ")?,
            Endpoint::Open(x) => write!(f, "({x}, ")?,
            Endpoint::Closed(x) => write!(f, "[{x}, ")?,
        }
        match self.hi {
            Endpoint::Unbounded => write!(f, "+inf)"),
            Endpoint::Open(x) => write!(f, "{x})"),
            Endpoint::Closed(x) => write!(f, "{x}]"),
        }
    }
}

fn is_nonneg_integer(x: f64) -> bool {
    x >= 0.0 && x.fract() == 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Concave,
    Convex,
    Affine,
    Neither,
}

impl ScalarFunction {
    pub fn domain(&self) -> Domain {
        match *self {
            ScalarFunction::PowerOneMinus { r } if is_nonneg_integer(r) => Domain::REALS,
            ScalarFunction::PowerOneMinus { .. } => Domain {
                lo: Endpoint::Unbounded,
                hi: Endpoint::Open(1.0),
            },
            ScalarFunction::Power { p } if is_nonneg_integer(p) => Domain::REALS,
            ScalarFunction::Power { p } if p > 0.0 => Domain {
                lo: Endpoint::Closed(0.0),
                hi: Endpoint::Unbounded,
            },
            ScalarFunction::Power { .. } => Domain {
                lo: Endpoint::Open(0.0),
                hi: Endpoint::Unbounded,
            },
            ScalarFunction::Exp | ScalarFunction::Affine { .. } => Domain::REALS,
            ScalarFunction::Tabulated(ref tab) => Domain {
                lo: Endpoint::Closed(tab.xs[0]),
                hi: Endpoint::Closed(tab.xs[tab.xs.len() - 1]),
            },
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !self.domain().contains(t) {
            return Err(Error::DomainViolation {
                value: t,
                domain: self.domain().to_string(),
                function: self.to_string(),
            });
        }
        Ok(self.eval_unchecked(t))
    }

    /// Evaluates without a domain check; callers guarantee membership.
    pub fn eval_unchecked(&self, t: f64) -> f64 {
        match self {
            ScalarFunction::PowerOneMinus { r } => (1.0 - t).powf(*r),
            ScalarFunction::Power { p } => t.powf(*p),
            ScalarFunction::Exp => t.exp(),
            ScalarFunction::Affine { a, b } => a * t + b,
            ScalarFunction::Tabulated(tab) => tab.eval(t),
        }
    }

    /// Checks that both endpoints of `b` belong to the domain.
    pub fn require_defined_on(&self, b: &IntervalBounds) -> Result<()> {
        let dom = self.domain();
        for t in [b.m(), b.big_m()] {
            if !dom.contains(t) {
                return Err(Error::DomainViolation {
                    value: t,
                    domain: dom.to_string(),
                    function: self.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Classifies `f` on `[m, M]` by the sign of second differences over a
    /// uniform grid of `samples` points (endpoints included).
    pub fn shape_on(&self, b: &IntervalBounds, samples: usize) -> Result<Shape> {
        if samples < 3 {
            return Err(Error::InvalidConfig(format!(
                "shape probe needs at least 3 samples, got {samples}"
            )));
        }
        self.require_defined_on(b)?;
        if b.is_degenerate() {
            return Ok(Shape::Affine);
        }
        let values: Vec<f64> = b
            .grid(samples)
            .map(|t| self.eval_unchecked(t))
            .collect();
        let scale = values.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        let thr = SHAPE_TOL * scale;
        let (mut any_pos, mut any_neg) = (false, false);
        for w in values.windows(3) {
            let d2 = w[0] - 2.0 * w[1] + w[2];
            if d2 > thr {
                any_pos = true;
            } else if d2 < -thr {
                any_neg = true;
            }
        }
        Ok(match (any_pos, any_neg) {
            (false, false) => Shape::Affine,
            (true, false) => Shape::Convex,
            (false, true) => Shape::Concave,
            (true, true) => Shape::Neither,
        })
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

impl fmt::Display for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFunction::PowerOneMinus { r } => write!(f, "power-one-minus:r={}", fmt_num(*r)),
            ScalarFunction::Power { p } => write!(f, "power:p={}", fmt_num(*p)),
            ScalarFunction::Exp => write!(f, "exp"),
            ScalarFunction::Affine { a, b } => {
                write!(f, "affine:a={},b={}", fmt_num(*a), fmt_num(*b))
            }
            ScalarFunction::Tabulated(tab) => {
                let pts: Vec<String> = tab
                    .knots()
                    .map(|(x, y)| format!("{}/{}", fmt_num(x), fmt_num(y)))
                    .collect();
                write!(f, "tabulated:points={}", pts.join(";"))
            }
        }
    }
}

/// Parses a real, accepting a simple fraction such as `1/3`.
pub(crate) fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num.trim().parse().ok()?;
        let den: f64 = den.trim().parse().ok()?;
        let v = num / den;
        return v.is_finite().then_some(v);
    }
    let v: f64 = s.parse().ok()?;
    v.is_finite().then_some(v)
}

/// Splits `"k1=v1,k2=v2"` into pairs.
pub(crate) fn parse_params(s: &str) -> Option<Vec<(&str, &str)>> {
    if s.trim().is_empty() {
        return Some(Vec::new());
    }
    s.split(',')
        .map(|kv| kv.split_once('=').map(|(k, v)| (k.trim(), v.trim())))
        .collect()
}

impl FromStr for ScalarFunction {
    type Err = Error;

    /// `power-one-minus:r=3`, `exp`, `power:p=0.5`, `affine:a=1,b=0`,
    /// `tabulated:points=0/0;0.5/0.7;1/1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::parse("function", s, reason);
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let params = parse_params(rest).ok_or_else(|| bad("expected key=value parameters"))?;
        let get = |key: &str| -> Result<f64> {
            let raw = params
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| bad(&format!("missing parameter {key}")))?;
            parse_real(raw).ok_or_else(|| bad(&format!("parameter {key} is not a number")))
        };
        let expect_keys = |keys: &[&str]| -> Result<()> {
            match params.iter().find(|(k, _)| !keys.contains(k)) {
                Some((k, _)) => Err(bad(&format!("unexpected parameter {k}"))),
                None => Ok(()),
            }
        };
        match name.trim() {
            "power-one-minus" => {
                expect_keys(&["r"])?;
                Ok(ScalarFunction::PowerOneMinus { r: get("r")? })
            }
            "power" => {
                expect_keys(&["p"])?;
                Ok(ScalarFunction::Power { p: get("p")? })
            }
            "exp" => {
                expect_keys(&[])?;
                Ok(ScalarFunction::Exp)
            }
            "affine" => {
                expect_keys(&["a", "b"])?;
                Ok(ScalarFunction::Affine {
                    a: get("a")?,
                    b: get("b")?,
                })
            }
            "tabulated" => {
                let pts = params
                    .iter()
                    .find(|(k, _)| *k == "points")
                    .map(|(_, v)| *v)
                    .ok_or_else(|| bad("missing parameter points"))?;
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for pair in pts.split(';') {
                    let (x, y) = pair.split_once('/').ok_or_else(|| bad("knot must be x/y"))?;
                    xs.push(parse_real(x).ok_or_else(|| bad("bad knot abscissa"))?);
                    ys.push(parse_real(y).ok_or_else(|| bad("bad knot ordinate"))?);
                }
                Ok(ScalarFunction::Tabulated(Tabulated::new(xs, ys)?))
            }
            _ => Err(bad("unknown function name")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(m: f64, big_m: f64) -> IntervalBounds {
        IntervalBounds::new(m, big_m).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(
            ScalarFunction::PowerOneMinus { r: 3.0 }.eval(0.5).unwrap(),
            0.125
        );
        assert_eq!(ScalarFunction::Exp.eval(0.0).unwrap(), 1.0);
        let cube_root = ScalarFunction::Power { p: 1.0 / 3.0 }.eval(8.0).unwrap();
        assert!((cube_root - 2.0).abs() < 1e-15);
    }

    #[test]
    fn eval_outside_domain() {
        assert!(matches!(
            ScalarFunction::Power { p: -1.0 }.eval(0.0),
            Err(Error::DomainViolation { .. })
        ));
        assert!(ScalarFunction::PowerOneMinus { r: 2.5 }.eval(1.0).is_err());
        assert!(ScalarFunction::PowerOneMinus { r: 3.0 }.eval(2.0).is_ok());
        assert!(ScalarFunction::Power { p: 0.5 }.eval(0.0).is_ok());
    }

    #[test]
    fn shape_examples() {
        let s = ScalarFunction::PowerOneMinus { r: 3.0 }
            .shape_on(&bounds(0.1, 0.5), 101)
            .unwrap();
        assert_eq!(s, Shape::Convex);
        let s = ScalarFunction::Power { p: 1.0 / 3.0 }
            .shape_on(&bounds(0.1, 0.9), 101)
            .unwrap();
        assert_eq!(s, Shape::Concave);
        let s = ScalarFunction::Affine { a: 2.0, b: 1.0 }
            .shape_on(&bounds(-3.0, 7.0), 11)
            .unwrap();
        assert_eq!(s, Shape::Affine);
        let s = ScalarFunction::Power { p: 3.0 }
            .shape_on(&bounds(-1.0, 1.0), 11)
            .unwrap();
        assert_eq!(s, Shape::Neither);
    }

    #[test]
    fn shape_errors() {
        assert!(ScalarFunction::Exp.shape_on(&bounds(0.0, 1.0), 2).is_err());
        assert!(matches!(
            ScalarFunction::Power { p: 0.5 }.shape_on(&bounds(-1.0, 1.0), 11),
            Err(Error::DomainViolation { .. })
        ));
    }

    #[test]
    fn power_one_minus_shape_by_exponent() {
        for &r in &[-4.0, -2.5, -1.0, -0.5, -0.1, 1.3, 1.9, 2.0, 2.5, 3.0, 5.5] {
            for &(m, big_m) in &[(0.05, 0.3), (0.1, 0.9), (0.6, 0.95)] {
                let s = ScalarFunction::PowerOneMinus { r }
                    .shape_on(&bounds(m, big_m), 65)
                    .unwrap();
                assert_eq!(s, Shape::Convex, "r={r} on [{m},{big_m}]");
            }
        }
        for &r in &[0.1, 0.25, 0.5, 0.9] {
            let s = ScalarFunction::PowerOneMinus { r }
                .shape_on(&bounds(0.1, 0.9), 65)
                .unwrap();
            assert_eq!(s, Shape::Concave, "r={r}");
        }
        for &r in &[0.0, 1.0] {
            let s = ScalarFunction::PowerOneMinus { r }
                .shape_on(&bounds(0.1, 0.9), 65)
                .unwrap();
            assert_eq!(s, Shape::Affine, "r={r}");
        }
    }

    #[test]
    fn exp_is_convex_everywhere() {
        for &(m, big_m) in &[(-5.0, -4.0), (0.0, 1.0), (3.0, 9.0)] {
            assert_eq!(
                ScalarFunction::Exp.shape_on(&bounds(m, big_m), 33).unwrap(),
                Shape::Convex
            );
        }
    }

    #[test]
    fn tabulated_interpolates() {
        let f: ScalarFunction = "tabulated:points=0/0;0.5/0.75;1/1".parse().unwrap();
        assert_eq!(f.eval(0.25).unwrap(), 0.375);
        assert_eq!(f.eval(1.0).unwrap(), 1.0);
        assert_eq!(f.eval(0.0).unwrap(), 0.0);
        assert!(f.eval(1.5).is_err());
        assert_eq!(f.shape_on(&bounds(0.0, 1.0), 5).unwrap(), Shape::Concave);
        assert!(Tabulated::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in [
            "power-one-minus:r=3",
            "exp",
            "power:p=0.5",
            "affine:a=1,b=0",
            "power:p=1/3",
            "tabulated:points=0/1;1/3",
        ] {
            let f: ScalarFunction = s.parse().unwrap();
            let again: ScalarFunction = f.to_string().parse().unwrap();
            assert_eq!(f, again, "{s}");
        }
        assert_eq!(
            "power:p=1/3".parse::<ScalarFunction>().unwrap(),
            ScalarFunction::Power { p: 1.0 / 3.0 }
        );
        assert!("log".parse::<ScalarFunction>().is_err());
        assert!("power:q=2".parse::<ScalarFunction>().is_err());
        assert!("power".parse::<ScalarFunction>().is_err());
    }

    #[test]
    fn power_one_minus_matches_power_of_complement() {
        for &r in &[-3.0, -1.5, 0.5, 2.5, 3.0, 4.0] {
            for i in 0..50 {
                let t = -0.9 + 1.85 * f64::from(i) / 49.0;
                let a = ScalarFunction::PowerOneMinus { r }.eval(t).unwrap();
                let b = ScalarFunction::Power { p: r }.eval(1.0 - t).unwrap();
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }
}
