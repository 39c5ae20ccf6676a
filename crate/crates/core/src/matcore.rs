//! Dense real symmetric matrices: spectral decomposition by cyclic Jacobi
//! rotations, functional calculus and the Löwner order.
//!
//! Every ordering decision scales its tolerance by `max(1, ‖·‖_op)` of the
//! operands, so verdicts are invariant under rescaling of well-conditioned
//! inputs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::ScalarFunction;

/// Largest supported dimension.
pub const MAX_DIM: usize = 16;

/// Relative asymmetry tolerated (and symmetrized away) on input.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Margin by which an eigenvalue may overshoot a closed domain endpoint.
pub const DOMAIN_MARGIN: f64 = 1e-12;

const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Real symmetric `n × n` matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MatrixJson", try_from = "MatrixJson")]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

/// Interchange form `{"n": <int>, "rows": [[...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub rows: Vec<Vec<f64>>,
}

impl From<SymMatrix> for MatrixJson {
    fn from(m: SymMatrix) -> Self {
        MatrixJson {
            n: m.n,
            rows: m.rows(),
        }
    }
}

impl TryFrom<MatrixJson> for SymMatrix {
    type Error = Error;

    fn try_from(value: MatrixJson) -> Result<Self> {
        if value.rows.len() != value.n {
            return Err(Error::Malformed(format!(
                "declared n = {} but {} rows given",
                value.n,
                value.rows.len()
            )));
        }
        SymMatrix::from_rows(&value.rows)
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        Err(Error::UnsupportedDimension(n))
    } else {
        Ok(())
    }
}

impl SymMatrix {
    /// Builds a matrix from rows. Asymmetry below `1e-12 · max(1, max|a_ij|)`
    /// is removed by averaging with the transpose; anything larger is rejected.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        check_dim(n)?;
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::Malformed(format!(
                    "row of length {} in a {n}x{n} matrix",
                    row.len()
                )));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::Malformed("non-finite entry".into()));
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(n, data)
    }

    /// Same as [`SymMatrix::from_rows`] from a flat row-major buffer.
    pub fn from_row_major(n: usize, mut data: Vec<f64>) -> Result<Self> {
        check_dim(n)?;
        if data.len() != n * n {
            return Err(Error::Malformed(format!(
                "{} entries for a {n}x{n} matrix",
                data.len()
            )));
        }
        let max_abs = data.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        let threshold = SYMMETRY_TOL * max_abs.max(1.0);
        for i in 0..n {
            for j in (i + 1)..n {
                let asym = (data[i * n + j] - data[j * n + i]).abs();
                if asym > threshold {
                    return Err(Error::NonSymmetric {
                        row: i,
                        col: j,
                        asymmetry: asym,
                    });
                }
                let avg = 0.5 * (data[i * n + j] + data[j * n + i]);
                data[i * n + j] = avg;
                data[j * n + i] = avg;
            }
        }
        Ok(SymMatrix { n, data })
    }

    /// Trusted constructor for internally computed products that are
    /// symmetric up to rounding.
    pub(crate) fn symmetrized(n: usize, mut data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (data[i * n + j] + data[j * n + i]);
                data[i * n + j] = avg;
                data[j * n + i] = avg;
            }
        }
        SymMatrix { n, data }
    }

    pub fn zeros(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(SymMatrix {
            n,
            data: vec![0.0; n * n],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::scalar(n, 1.0)
    }

    /// `c · I_n`.
    pub fn scalar(n: usize, c: f64) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            m.data[i * n + i] = c;
        }
        Ok(m)
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let mut m = Self::zeros(n)?;
        for (i, &d) in values.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn same_dim(&self, other: &SymMatrix) -> Result<()> {
        if self.n != other.n {
            Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            })
        } else {
            Ok(())
        }
    }

    /// `a · self + b · other`.
    pub fn lin_comb(&self, a: f64, other: &SymMatrix, b: f64) -> Result<SymMatrix> {
        self.same_dim(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(SymMatrix { n: self.n, data })
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(x, y)| x + y).collect();
        Ok(SymMatrix { n: self.n, data })
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(x, y)| x - y).collect();
        Ok(SymMatrix { n: self.n, data })
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    /// `self + c · I`.
    pub fn shift(&self, c: f64) -> SymMatrix {
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i * self.n + i] += c;
        }
        out
    }

    /// `I - self`.
    pub fn one_minus(&self) -> SymMatrix {
        self.scale(-1.0).shift(1.0)
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> Result<f64> {
        self.same_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (x, y)| acc.max((x - y).abs())))
    }

    /// `⟨A u, u⟩`.
    pub fn quadratic_form(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: u.len(),
            });
        }
        let n = self.n;
        let mut acc = 0.0;
        for (row, ui) in self.data.chunks_exact(n).zip(u) {
            let dot: f64 = row.iter().zip(u).map(|(a, b)| a * b).sum();
            acc += ui * dot;
        }
        Ok(acc)
    }

    /// `S · X · S` with `S = self`; symmetric since both factors are.
    pub fn sandwich(&self, middle: &SymMatrix) -> Result<SymMatrix> {
        self.same_dim(middle)?;
        let n = self.n;
        let sx = matmul(&self.data, &middle.data, n, n, n);
        let sxs = matmul(&sx, &self.data, n, n, n);
        Ok(SymMatrix::symmetrized(n, sxs))
    }

    /// `Vᵀ · self · V` for a row-major `n × k` matrix `V`.
    pub fn congruence(&self, v: &[f64], k: usize) -> Result<SymMatrix> {
        let n = self.n;
        if v.len() != n * k {
            return Err(Error::DimensionMismatch {
                expected: n * k,
                found: v.len(),
            });
        }
        check_dim(k)?;
        let xv = matmul(&self.data, v, n, n, k);
        let vt = transpose(v, n, k);
        let vtxv = matmul(&vt, &xv, k, n, k);
        Ok(SymMatrix::symmetrized(k, vtxv))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(spectral_decompose(self)?.eigenvalues)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }
}

/// `C = A·B` for row-major `A: r×k`, `B: k×c`.
pub(crate) fn matmul(a: &[f64], b: &[f64], r: usize, k: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        for l in 0..k {
            let ail = a[i * k + l];
            if ail == 0.0 {
                continue;
            }
            for j in 0..c {
                out[i * c + j] += ail * b[l * c + j];
            }
        }
    }
    out
}

pub(crate) fn transpose(a: &[f64], r: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        for j in 0..c {
            out[j * r + i] = a[i * c + j];
        }
    }
    out
}

/// Eigen-decomposition `A = Q · diag(λ) · Qᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomp {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Row-major `n × n`; column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: Vec<f64>,
}

impl SpectralDecomp {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|r| self.eigenvectors[r * n + i]).collect()
    }

    /// `Q · diag(values) · Qᵀ`, computed on the upper triangle and mirrored
    /// so the result is exactly symmetric.
    pub fn reconstruct_with(&self, values: &[f64]) -> SymMatrix {
        let n = self.n();
        let q = &self.eigenvectors;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for (k, &d) in values.iter().enumerate() {
                    acc += q[i * n + k] * d * q[j * n + k];
                }
                data[i * n + j] = acc;
                data[j * n + i] = acc;
            }
        }
        SymMatrix { n, data }
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_with(&self.eigenvalues)
    }
}

/// Cyclic Jacobi eigen-solver. Converges when the off-diagonal Frobenius
/// norm drops to `1e-14 · ‖A‖_F`.
pub fn spectral_decompose(a: &SymMatrix) -> Result<SpectralDecomp> {
    let n = a.n;
    let mut w = a.data.clone();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    let target = JACOBI_TOL * a.frobenius_norm();

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&w, n) <= target {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for r in (p + 1)..n {
                rotate(&mut w, &mut q, n, p, r);
            }
        }
    }
    if !converged && off_diagonal_norm(&w, n) > target {
        return Err(Error::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[i * n + i].total_cmp(&w[j * n + j]));
    let eigenvalues = order.iter().map(|&i| w[i * n + i]).collect();
    let mut eigenvectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        for row in 0..n {
            eigenvectors[row * n + dst] = q[row * n + src];
        }
    }
    Ok(SpectralDecomp {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(w: &[f64], n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += w[i * n + j] * w[i * n + j];
            }
        }
    }
    acc.sqrt()
}

/// Annihilates `w[p][r]` with the rotation `Jᵀ W J`, accumulating `Q ← Q J`.
fn rotate(w: &mut [f64], q: &mut [f64], n: usize, p: usize, r: usize) {
    let apr = w[p * n + r];
    if apr == 0.0 {
        return;
    }
    let tau = (w[r * n + r] - w[p * n + p]) / (2.0 * apr);
    let t = if tau.abs() > 1e150 {
        0.5 / tau
    } else {
        let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
        sign / (tau.abs() + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    for k in 0..n {
        let wkp = w[k * n + p];
        let wkr = w[k * n + r];
        w[k * n + p] = c * wkp - s * wkr;
        w[k * n + r] = s * wkp + c * wkr;
    }
    for k in 0..n {
        let wpk = w[p * n + k];
        let wrk = w[r * n + k];
        w[p * n + k] = c * wpk - s * wrk;
        w[r * n + k] = s * wpk + c * wrk;
    }
    w[p * n + r] = 0.0;
    w[r * n + p] = 0.0;

    for k in 0..n {
        let qkp = q[k * n + p];
        let qkr = q[k * n + r];
        q[k * n + p] = c * qkp - s * qkr;
        q[k * n + r] = s * qkp + c * qkr;
    }
}

/// `f(A) = Q · diag(f(λ_i)) · Qᵀ`.
///
/// Eigenvalues may overshoot a closed endpoint of the domain by
/// `1e-12 · max(1, ‖A‖_op)`; they are clamped onto the endpoint before
/// evaluation. Anything further out is a [`Error::DomainViolation`].
pub fn apply_function(a: &SymMatrix, f: &ScalarFunction) -> Result<SymMatrix> {
    let sd = spectral_decompose(a)?;
    let norm = sd
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let margin = DOMAIN_MARGIN * norm.max(1.0);
    let domain = f.domain();
    let mut values = Vec::with_capacity(sd.n());
    for &lambda in &sd.eigenvalues {
        let t = domain
            .admit(lambda, margin)
            .ok_or_else(|| Error::DomainViolation {
                value: lambda,
                domain: domain.to_string(),
                function: f.to_string(),
            })?;
        values.push(f.eval_unchecked(t));
    }
    Ok(sd.reconstruct_with(&values))
}

/// Applies an arbitrary scalar map to the spectrum without domain checks.
pub fn map_spectrum(a: &SymMatrix, g: impl Fn(f64) -> f64) -> Result<SymMatrix> {
    let sd = spectral_decompose(a)?;
    let values: Vec<f64> = sd.eigenvalues.iter().map(|&x| g(x)).collect();
    Ok(sd.reconstruct_with(&values))
}

/// `max |λ_i|`.
pub fn operator_norm(a: &SymMatrix) -> Result<f64> {
    let ev = a.eigenvalues()?;
    Ok(ev.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())))
}

/// `λ_min(A) ≥ −tol · max(1, ‖A‖_op)`.
pub fn is_psd(a: &SymMatrix, tol: f64) -> Result<bool> {
    let ev = a.eigenvalues()?;
    let norm = ev.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    Ok(ev[0] >= -tol * norm.max(1.0))
}

/// All eigenvalues in `[m − tol, M + tol]`.
pub fn spectrum_in(a: &SymMatrix, m: f64, big_m: f64, tol: f64) -> Result<bool> {
    let ev = a.eigenvalues()?;
    Ok(ev[0] >= m - tol && ev[ev.len() - 1] <= big_m + tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    LessEq,
    GreaterEq,
    Equal,
    Incomparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoewnerVerdict {
    pub relation: Relation,
    /// Smallest eigenvalue of `B − A`.
    pub min_eig_ba: f64,
    /// Smallest eigenvalue of `A − B`.
    pub min_eig_ab: f64,
    /// Effective tolerance: the requested one times `max(1, ‖A‖_op, ‖B‖_op)`.
    pub tol: f64,
}

impl LoewnerVerdict {
    pub fn less_eq(&self) -> bool {
        matches!(self.relation, Relation::LessEq | Relation::Equal)
    }
}

/// Compares `A` and `B` in the Löwner order.
pub fn loewner_compare(a: &SymMatrix, b: &SymMatrix, tol: f64) -> Result<LoewnerVerdict> {
    let diff = b.sub(a)?;
    let ev = diff.eigenvalues()?;
    let min_eig_ba = ev[0];
    let min_eig_ab = -ev[ev.len() - 1];
    let scale = operator_norm(a)?.max(operator_norm(b)?).max(1.0);
    let eff = tol * scale;
    let ba = min_eig_ba >= -eff;
    let ab = min_eig_ab >= -eff;
    let relation = match (ba, ab) {
        (true, true) => Relation::Equal,
        (true, false) => Relation::LessEq,
        (false, true) => Relation::GreaterEq,
        (false, false) => Relation::Incomparable,
    };
    Ok(LoewnerVerdict {
        relation,
        min_eig_ba,
        min_eig_ab,
        tol: eff,
    })
}
