//! Weighted arithmetic and geometric operator means.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::ScalarFunction;
use crate::matcore::{apply_function, operator_norm, SymMatrix};

/// Strict positivity margin for the left operand of `♯_v`.
pub const PD_MARGIN: f64 = 1e-10;
/// Tolerance for the right operand of `♯_v` being PSD.
pub const PSD_TOL: f64 = 1e-12;

/// Mean weight `v ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Weight(f64);

impl Weight {
    pub fn new(v: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&v) {
            Ok(Weight(v))
        } else {
            Err(Error::InvalidWeight(v))
        }
    }

    pub const HALF: Weight = Weight(0.5);

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Weight {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Weight::new(v)
    }
}

impl From<Weight> for f64 {
    fn from(w: Weight) -> f64 {
        w.0
    }
}

/// `A ∇_v B = (1 − v)·A + v·B`.
pub fn arith_mean(a: &SymMatrix, b: &SymMatrix, v: Weight) -> Result<SymMatrix> {
    a.lin_comb(1.0 - v.0, b, v.0)
}

/// `A ♯_v B = A^{1/2} (A^{-1/2} B A^{-1/2})^v A^{1/2}`.
pub fn geom_mean(a: &SymMatrix, b: &SymMatrix, v: Weight) -> Result<SymMatrix> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: b.n(),
        });
    }
    let a_min = a.min_eigenvalue()?;
    if a_min <= PD_MARGIN * operator_norm(a)? {
        return Err(Error::NotPositiveDefinite { min_eig: a_min });
    }
    let b_min = b.min_eigenvalue()?;
    if b_min < -PSD_TOL * operator_norm(b)?.max(1.0) {
        return Err(Error::NotPsd { min_eig: b_min });
    }
    let sqrt_a = apply_function(a, &ScalarFunction::Power { p: 0.5 })?;
    let inv_sqrt_a = apply_function(a, &ScalarFunction::Power { p: -0.5 })?;
    let inner = inv_sqrt_a.sandwich(b)?;
    // clamp rounding below zero onto the PSD cone before the fractional power
    let inner_pow = apply_function(&inner, &ScalarFunction::Power { p: v.0 }).or_else(|_| {
        crate::matcore::map_spectrum(&inner, |t| t.max(0.0).powf(v.0))
    })?;
    sqrt_a.sandwich(&inner_pow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{loewner_compare, Relation};

    fn m2(rows: [[f64; 2]; 2]) -> SymMatrix {
        SymMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn arith_examples() {
        let a = m2([[2.0, 1.0], [1.0, 1.0]]);
        let b = m2([[1.0, 0.0], [0.0, 0.0]]);
        assert_eq!(arith_mean(&a, &a, Weight::new(0.3).unwrap()).unwrap(), a);
        assert_eq!(
            arith_mean(&a, &b, Weight::HALF).unwrap(),
            m2([[1.5, 0.5], [0.5, 0.5]])
        );
        assert_eq!(arith_mean(&a, &b, Weight::new(0.0).unwrap()).unwrap(), a);
        let c = SymMatrix::identity(3).unwrap();
        assert!(arith_mean(&a, &c, Weight::HALF).is_err());
    }

    #[test]
    fn weight_bounds() {
        assert!(Weight::new(-0.01).is_err());
        assert!(Weight::new(1.01).is_err());
        assert!(Weight::new(f64::NAN).is_err());
        assert!(serde_json::from_str::<Weight>("1.5").is_err());
    }

    #[test]
    fn geom_examples() {
        let a = m2([[2.0, 0.3], [0.3, 1.0]]);
        let b = m2([[0.5, -0.1], [-0.1, 0.9]]);
        let v = Weight::new(0.37).unwrap();
        assert!(geom_mean(&a, &a, v).unwrap().max_abs_diff(&a).unwrap() < 1e-13);
        let g0 = geom_mean(&a, &b, Weight::new(0.0).unwrap()).unwrap();
        assert!(g0.max_abs_diff(&a).unwrap() < 1e-13);
        let g1 = geom_mean(&a, &b, Weight::new(1.0).unwrap()).unwrap();
        assert!(g1.max_abs_diff(&b).unwrap() < 1e-13);

        let g = geom_mean(
            &SymMatrix::diag(&[1.0, 4.0]).unwrap(),
            &SymMatrix::diag(&[4.0, 1.0]).unwrap(),
            Weight::HALF,
        )
        .unwrap();
        assert!(g.max_abs_diff(&SymMatrix::scalar(2, 2.0).unwrap()).unwrap() < 1e-14);
    }

    #[test]
    fn geom_rejects_singular_left_operand() {
        let a = SymMatrix::diag(&[0.0, 1.0]).unwrap();
        let b = SymMatrix::identity(2).unwrap();
        assert!(matches!(
            geom_mean(&a, &b, Weight::HALF),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let neg = SymMatrix::diag(&[-1.0, 1.0]).unwrap();
        assert!(matches!(
            geom_mean(&b, &neg, Weight::HALF),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn geom_below_arith() {
        let a = m2([[2.0, 0.3], [0.3, 1.0]]);
        let b = m2([[0.5, -0.1], [-0.1, 0.9]]);
        let v = Weight::new(0.6).unwrap();
        let g = geom_mean(&a, &b, v).unwrap();
        let ar = arith_mean(&a, &b, v).unwrap();
        let rel = loewner_compare(&g, &ar, 1e-9).unwrap().relation;
        assert!(matches!(rel, Relation::LessEq | Relation::Equal));
    }
}
