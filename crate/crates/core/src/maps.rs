//! Closed catalog of normalized (unital) positive linear maps.
//!
//! Every member is completely positive and unital when its parameters are
//! valid; [`PositiveMap::verify_normalized`] checks the unit condition
//! numerically for raw values built outside the validating constructors.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{parse_params, parse_real};
use crate::matcore::{SymMatrix, MAX_DIM};
use crate::random::{haar_frame, random_unit_vector, rng_from_seed};

pub const NORMALIZATION_TOL: f64 = 1e-10;
pub const UNIT_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PositiveMap {
    Identity {
        n: usize,
    },
    /// `X ↦ [⟨X u, u⟩]`, a `1 × 1` output.
    VectorState {
        u: Vec<f64>,
    },
    /// `X ↦ Vᵀ X V` for a row-major `n × k` matrix `V` with orthonormal columns.
    IsometryCompression {
        n: usize,
        k: usize,
        v: Vec<f64>,
    },
    /// Zeroes every entry outside the diagonal blocks (0-based indices).
    Pinching {
        n: usize,
        blocks: Vec<Vec<usize>>,
    },
    /// `X ↦ (tr X / n) · I`.
    TraceNormalized {
        n: usize,
    },
    Mixture {
        components: Vec<MixtureComponent>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub map: PositiveMap,
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        Err(Error::UnsupportedDimension(n))
    } else {
        Ok(())
    }
}

impl PositiveMap {
    pub fn identity(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(PositiveMap::Identity { n })
    }

    pub fn trace_normalized(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(PositiveMap::TraceNormalized { n })
    }

    pub fn vector_state(u: Vec<f64>) -> Result<Self> {
        check_dim(u.len())?;
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::InvalidConfig(format!(
                "vector state needs a unit vector, norm is {norm}"
            )));
        }
        Ok(PositiveMap::VectorState { u })
    }

    pub fn isometry(n: usize, k: usize, v: Vec<f64>) -> Result<Self> {
        check_dim(n)?;
        check_dim(k)?;
        if k > n || v.len() != n * k {
            return Err(Error::InvalidConfig(format!(
                "isometry needs an n x k matrix with k <= n, got n={n}, k={k}, {} entries",
                v.len()
            )));
        }
        let map = PositiveMap::IsometryCompression { n, k, v };
        if map.isometry_defect() > NORMALIZATION_TOL {
            return Err(Error::InvalidConfig("isometry columns are not orthonormal".into()));
        }
        Ok(map)
    }

    pub fn pinching(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        check_dim(n)?;
        let mut seen = vec![false; n];
        for &i in blocks.iter().flatten() {
            if i >= n || seen[i] {
                return Err(Error::InvalidConfig(format!(
                    "pinching blocks must partition 0..{n}"
                )));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) || blocks.iter().any(Vec::is_empty) {
            return Err(Error::InvalidConfig(format!(
                "pinching blocks must partition 0..{n}"
            )));
        }
        Ok(PositiveMap::Pinching { n, blocks })
    }

    pub fn mixture(components: Vec<(f64, PositiveMap)>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidConfig("empty mixture".into()))?;
        let (n_in, n_out) = (first.1.input_dim(), first.1.output_dim());
        let mut total = 0.0;
        for (w, map) in &components {
            if w.is_nan() || *w < 0.0 || map.input_dim() != n_in || map.output_dim() != n_out {
                return Err(Error::InvalidConfig(
                    "mixture needs nonnegative weights and maps of equal shape".into(),
                ));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        Ok(PositiveMap::Mixture {
            components: components
                .into_iter()
                .map(|(weight, map)| MixtureComponent { weight, map })
                .collect(),
        })
    }

    pub fn input_dim(&self) -> usize {
        match self {
            PositiveMap::Identity { n }
            | PositiveMap::TraceNormalized { n }
            | PositiveMap::Pinching { n, .. }
            | PositiveMap::IsometryCompression { n, .. } => *n,
            PositiveMap::VectorState { u } => u.len(),
            PositiveMap::Mixture { components } => {
                components.first().map_or(0, |c| c.map.input_dim())
            }
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            PositiveMap::Identity { n }
            | PositiveMap::TraceNormalized { n }
            | PositiveMap::Pinching { n, .. } => *n,
            PositiveMap::IsometryCompression { k, .. } => *k,
            PositiveMap::VectorState { .. } => 1,
            PositiveMap::Mixture { components } => {
                components.first().map_or(0, |c| c.map.output_dim())
            }
        }
    }

    pub fn kind(&self) -> MapKind {
        match self {
            PositiveMap::Identity { .. } => MapKind::Identity,
            PositiveMap::VectorState { .. } => MapKind::VectorState,
            PositiveMap::IsometryCompression { .. } => MapKind::Isometry,
            PositiveMap::Pinching { .. } => MapKind::Pinching,
            PositiveMap::TraceNormalized { .. } => MapKind::Trace,
            PositiveMap::Mixture { .. } => MapKind::Mixture,
        }
    }

    fn isometry_defect(&self) -> f64 {
        match self {
            PositiveMap::IsometryCompression { n, k, v } => {
                let mut worst: f64 = 0.0;
                for a in 0..*k {
                    for b in 0..*k {
                        let dot: f64 = (0..*n).map(|i| v[i * k + a] * v[i * k + b]).sum();
                        let want = if a == b { 1.0 } else { 0.0 };
                        worst = worst.max((dot - want).abs());
                    }
                }
                worst
            }
            _ => 0.0,
        }
    }

    pub fn apply(&self, x: &SymMatrix) -> Result<SymMatrix> {
        if x.n() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: x.n(),
            });
        }
        match self {
            PositiveMap::Identity { .. } => Ok(x.clone()),
            PositiveMap::VectorState { u } => SymMatrix::scalar(1, x.quadratic_form(u)?),
            PositiveMap::IsometryCompression { k, v, .. } => x.congruence(v, *k),
            PositiveMap::Pinching { n, blocks } => {
                let mut owner = vec![0usize; *n];
                for (b, block) in blocks.iter().enumerate() {
                    for &i in block {
                        owner[i] = b;
                    }
                }
                let mut data = x.as_row_major().to_vec();
                for i in 0..*n {
                    for j in 0..*n {
                        if owner[i] != owner[j] {
                            data[i * n + j] = 0.0;
                        }
                    }
                }
                SymMatrix::from_row_major(*n, data)
            }
            PositiveMap::TraceNormalized { n } => SymMatrix::scalar(*n, x.trace() / *n as f64),
            PositiveMap::Mixture { components } => {
                let mut acc = SymMatrix::zeros(self.output_dim())?;
                for c in components {
                    acc = acc.lin_comb(1.0, &c.map.apply(x)?, c.weight)?;
                }
                Ok(acc)
            }
        }
    }

    /// `‖Φ(I) − I‖_max ≤ 1e-10`.
    pub fn verify_normalized(&self) -> bool {
        let Ok(id_in) = SymMatrix::identity(self.input_dim()) else {
            return false;
        };
        let Ok(image) = self.apply(&id_in) else {
            return false;
        };
        let Ok(id_out) = SymMatrix::identity(self.output_dim()) else {
            return false;
        };
        image
            .max_abs_diff(&id_out)
            .is_ok_and(|d| d <= NORMALIZATION_TOL)
    }

    /// Draws a valid map of the given kind on `n × n` inputs.
    pub fn random<R: Rng + ?Sized>(kind: MapKind, n: usize, rng: &mut R) -> Result<Self> {
        check_dim(n)?;
        match kind {
            MapKind::Identity => Self::identity(n),
            MapKind::Trace => Self::trace_normalized(n),
            MapKind::VectorState => Self::vector_state(random_unit_vector(n, rng)),
            MapKind::Isometry => {
                let k = rng.random_range(1..=n);
                Self::isometry(n, k, haar_frame(n, k, rng))
            }
            MapKind::Pinching => Self::pinching(n, random_partition(n, rng)),
            MapKind::Mixture => {
                let w: f64 = rng.random_range(0.0..=1.0);
                let pool = [MapKind::Identity, MapKind::Trace, MapKind::Pinching];
                let a = pool[rng.random_range(0..pool.len())];
                let b = pool[rng.random_range(0..pool.len())];
                Self::mixture(vec![
                    (w, Self::random(a, n, rng)?),
                    (1.0 - w, Self::random(b, n, rng)?),
                ])
            }
        }
    }
}

/// Convenience wrapper over [`PositiveMap::random`] with a fresh seeded
/// generator.
pub fn random_map(kind: MapKind, n: usize, seed: u64) -> Result<PositiveMap> {
    PositiveMap::random(kind, n, &mut rng_from_seed(seed))
}

fn random_partition<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        idx.swap(i, j);
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (pos, i) in idx.into_iter().enumerate() {
        if pos == 0 || rng.random_bool(0.5) {
            blocks.push(vec![i]);
        } else {
            blocks.last_mut().expect("first element opens a block").push(i);
        }
    }
    for b in &mut blocks {
        b.sort_unstable();
    }
    blocks.sort();
    blocks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    Identity,
    Trace,
    Pinching,
    VectorState,
    Isometry,
    Mixture,
}

impl MapKind {
    pub const ALL: [MapKind; 6] = [
        MapKind::Identity,
        MapKind::Trace,
        MapKind::Pinching,
        MapKind::VectorState,
        MapKind::Isometry,
        MapKind::Mixture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MapKind::Identity => "identity",
            MapKind::Trace => "trace",
            MapKind::Pinching => "pinching",
            MapKind::VectorState => "vector-state",
            MapKind::Isometry => "isometry",
            MapKind::Mixture => "mixture",
        }
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A map as written on the command line. Parameters left out are drawn at
/// random when the map is built.
///
/// Forms: `identity`, `trace`, `vector-state[:seed=7]`,
/// `isometry[:k=2,seed=1]`, `pinching[:blocks=1|2,3]` (1-based indices,
/// blocks separated by `|`), `mix:0.5*identity+0.5*trace`, `mixture`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MapSpec {
    Identity,
    Trace,
    VectorState { seed: Option<u64> },
    Isometry { k: Option<usize>, seed: Option<u64> },
    Pinching { blocks: Option<Vec<Vec<usize>>> },
    Mix(Vec<(f64, MapSpec)>),
    RandomMixture,
}

impl MapSpec {
    pub fn from_kind(kind: MapKind) -> Self {
        match kind {
            MapKind::Identity => MapSpec::Identity,
            MapKind::Trace => MapSpec::Trace,
            MapKind::Pinching => MapSpec::Pinching { blocks: None },
            MapKind::VectorState => MapSpec::VectorState { seed: None },
            MapKind::Isometry => MapSpec::Isometry { k: None, seed: None },
            MapKind::Mixture => MapSpec::RandomMixture,
        }
    }

    pub fn all() -> Vec<MapSpec> {
        MapKind::ALL.iter().copied().map(MapSpec::from_kind).collect()
    }

    /// Materializes the map for `n × n` inputs; unspecified parameters come
    /// from `rng`.
    pub fn build<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<PositiveMap> {
        match self {
            MapSpec::Identity => PositiveMap::identity(n),
            MapSpec::Trace => PositiveMap::trace_normalized(n),
            MapSpec::VectorState { seed: None } => PositiveMap::random(MapKind::VectorState, n, rng),
            MapSpec::VectorState { seed: Some(s) } => {
                PositiveMap::vector_state(random_unit_vector(n, &mut rng_from_seed(*s)))
            }
            MapSpec::Isometry { k, seed } => {
                let k = match k {
                    Some(k) => *k,
                    None => rng.random_range(1..=n),
                };
                if k == 0 || k > n {
                    return Err(Error::InvalidConfig(format!(
                        "isometry needs 1 <= k <= n, got k={k}, n={n}"
                    )));
                }
                let v = match seed {
                    Some(s) => haar_frame(n, k, &mut rng_from_seed(*s)),
                    None => haar_frame(n, k, rng),
                };
                PositiveMap::isometry(n, k, v)
            }
            MapSpec::Pinching { blocks: None } => PositiveMap::random(MapKind::Pinching, n, rng),
            MapSpec::Pinching { blocks: Some(b) } => PositiveMap::pinching(n, b.clone()),
            MapSpec::Mix(parts) => {
                let mut comps = Vec::with_capacity(parts.len());
                for (w, spec) in parts {
                    comps.push((*w, spec.build(n, rng)?));
                }
                PositiveMap::mixture(comps)
            }
            MapSpec::RandomMixture => PositiveMap::random(MapKind::Mixture, n, rng),
        }
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapSpec::Identity => write!(f, "identity"),
            MapSpec::Trace => write!(f, "trace"),
            MapSpec::VectorState { seed: None } => write!(f, "vector-state"),
            MapSpec::VectorState { seed: Some(s) } => write!(f, "vector-state:seed={s}"),
            MapSpec::Isometry { k, seed } => {
                let mut parts = Vec::new();
                if let Some(k) = k {
                    parts.push(format!("k={k}"));
                }
                if let Some(s) = seed {
                    parts.push(format!("seed={s}"));
                }
                if parts.is_empty() {
                    write!(f, "isometry")
                } else {
                    write!(f, "isometry:{}", parts.join(","))
                }
            }
            MapSpec::Pinching { blocks: None } => write!(f, "pinching"),
            MapSpec::Pinching { blocks: Some(b) } => {
                let blocks: Vec<String> = b
                    .iter()
                    .map(|blk| {
                        blk.iter()
                            .map(|i| (i + 1).to_string())
                            .collect::<Vec<_>>()
                            .join(",")
                    })
                    .collect();
                write!(f, "pinching:blocks={}", blocks.join("|"))
            }
            MapSpec::Mix(parts) => {
                let items: Vec<String> = parts.iter().map(|(w, s)| format!("{w:?}*{s}")).collect();
                write!(f, "mix:{}", items.join("+"))
            }
            MapSpec::RandomMixture => write!(f, "mixture"),
        }
    }
}

impl FromStr for MapSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::parse("map", s, reason);
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r)),
            None => (s.trim(), None),
        };
        let params = |rest: Option<&str>| -> Result<Vec<(String, String)>> {
            let raw = rest.unwrap_or("");
            parse_params(raw)
                .map(|v| v.into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect())
                .ok_or_else(|| bad("expected key=value parameters"))
        };
        let lookup = |ps: &[(String, String)], key: &str| -> Result<Option<u64>> {
            match ps.iter().find(|(k, _)| k == key) {
                None => Ok(None),
                Some((_, v)) => v
                    .parse::<u64>()
                    .map(Some)
                    .map_err(|_| bad(&format!("{key} must be a nonnegative integer"))),
            }
        };
        let only = |ps: &[(String, String)], keys: &[&str]| -> Result<()> {
            match ps.iter().find(|(k, _)| !keys.contains(&k.as_str())) {
                Some((k, _)) => Err(bad(&format!("unexpected parameter {k}"))),
                None => Ok(()),
            }
        };
        match name {
            "identity" | "trace" | "mixture" if rest.is_some() => {
                Err(bad("this map takes no parameters"))
            }
            "identity" => Ok(MapSpec::Identity),
            "trace" => Ok(MapSpec::Trace),
            "mixture" => Ok(MapSpec::RandomMixture),
            "vector-state" => {
                let ps = params(rest)?;
                only(&ps, &["seed"])?;
                Ok(MapSpec::VectorState {
                    seed: lookup(&ps, "seed")?,
                })
            }
            "isometry" => {
                let ps = params(rest)?;
                only(&ps, &["k", "seed"])?;
                Ok(MapSpec::Isometry {
                    k: lookup(&ps, "k")?.map(|k| k as usize),
                    seed: lookup(&ps, "seed")?,
                })
            }
            "pinching" => match rest {
                None => Ok(MapSpec::Pinching { blocks: None }),
                Some(r) => {
                    let spec = r
                        .trim()
                        .strip_prefix("blocks=")
                        .ok_or_else(|| bad("expected blocks=..."))?;
                    let mut blocks = Vec::new();
                    for blk in spec.split('|') {
                        let mut b = Vec::new();
                        for i in blk.split(',') {
                            let i: usize = i
                                .trim()
                                .parse()
                                .map_err(|_| bad("block indices must be positive integers"))?;
                            if i == 0 {
                                return Err(bad("block indices are 1-based"));
                            }
                            b.push(i - 1);
                        }
                        blocks.push(b);
                    }
                    Ok(MapSpec::Pinching {
                        blocks: Some(blocks),
                    })
                }
            },
            "mix" => {
                let r = rest.ok_or_else(|| bad("mix needs components"))?;
                let mut parts = Vec::new();
                for item in r.split('+') {
                    let (w, spec) = item
                        .split_once('*')
                        .ok_or_else(|| bad("mix components are weight*map"))?;
                    let w = parse_real(w).ok_or_else(|| bad("bad mixture weight"))?;
                    parts.push((w, spec.trim().parse()?));
                }
                Ok(MapSpec::Mix(parts))
            }
            _ => Err(bad("unknown map name")),
        }
    }
}

impl TryFrom<String> for MapSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MapSpec> for String {
    fn from(m: MapSpec) -> String {
        m.to_string()
    }
}
