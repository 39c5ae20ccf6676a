//! Seeded random inputs: Haar-distributed orthogonal frames and symmetric
//! matrices with prescribed spectral range.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::matcore::SymMatrix;

pub type TrialRng = ChaCha8Rng;

/// Weyl increment of the splitmix64 generator.
pub const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const SPLITMIX_MUL_1: u64 = 0xBF58_476D_1CE4_E5B9;
const SPLITMIX_MUL_2: u64 = 0x94D0_49BB_1331_11EB;

/// splitmix64 finalizer applied to `z + γ`.
pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(SPLITMIX_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(SPLITMIX_MUL_1);
    z = (z ^ (z >> 27)).wrapping_mul(SPLITMIX_MUL_2);
    z ^ (z >> 31)
}

/// Per-trial seed, a pure function of `(campaign seed, trial index)`.
pub fn trial_seed(campaign_seed: u64, index: u64) -> u64 {
    splitmix64(campaign_seed ^ splitmix64(index))
}

pub fn rng_from_seed(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Orthonormal `n × k` frame (row-major): Gram–Schmidt, run twice, on a
/// Gaussian matrix. Equivalent to the Q factor of a QR decomposition with
/// positive diagonal in R, hence Haar distributed.
pub fn haar_frame<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<f64> {
    assert!(k <= n && n > 0, "frame of {k} columns in dimension {n}");
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    while cols.len() < k {
        let mut c: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for q in &cols {
                let dot: f64 = q.iter().zip(&c).map(|(a, b)| a * b).sum();
                for (ci, qi) in c.iter_mut().zip(q) {
                    *ci -= dot * qi;
                }
            }
        }
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        // a Gaussian draw lands in the span of earlier columns with probability 0
        if norm < 1e-8 {
            continue;
        }
        c.iter_mut().for_each(|x| *x /= norm);
        cols.push(c);
    }
    let mut out = vec![0.0; n * k];
    for (j, c) in cols.iter().enumerate() {
        for i in 0..n {
            out[i * k + j] = c[i];
        }
    }
    out
}

pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    haar_frame(n, n, rng)
}

pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    haar_frame(n, 1, rng)
}

/// `Q · diag(d) · Qᵀ` with `d` i.i.d. uniform on `[m, M]` and Haar `Q`.
/// When `m = M` the result is exactly `m · I`.
pub fn random_symmetric_in_rng<R: Rng + ?Sized>(
    n: usize,
    m: f64,
    big_m: f64,
    rng: &mut R,
) -> Result<SymMatrix> {
    if m == big_m {
        return SymMatrix::scalar(n, m);
    }
    let d: Vec<f64> = (0..n).map(|_| rng.random_range(m..=big_m)).collect();
    let q = haar_orthogonal(n, rng);
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for (k, dk) in d.iter().enumerate() {
                acc += q[i * n + k] * dk * q[j * n + k];
            }
            data[i * n + j] = acc;
            data[j * n + i] = acc;
        }
    }
    SymMatrix::from_row_major(n, data)
}

pub fn random_symmetric_in(n: usize, m: f64, big_m: f64, seed: u64) -> Result<SymMatrix> {
    random_symmetric_in_rng(n, m, big_m, &mut rng_from_seed(seed))
}
