//! Exponent arithmetic for multilinear weight classes.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExponentError {
    #[error("exponent p_{index} must lie in (1, inf), got {value}")]
    OutOfRange { index: usize, value: f64 },
    #[error("exponent vector must not be empty")]
    Empty,
    #[error("arity mismatch: {got} weights for {expected} exponents")]
    ArityMismatch { expected: usize, got: usize },
}

/// `(p_1, ..., p_m)` with the derived `p` (`1/p = sum 1/p_i`) and the
/// conjugates `p_i' = p_i/(p_i - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentVector {
    p_list: Vec<f64>,
    conj_list: Vec<f64>,
    p: f64,
}

impl ExponentVector {
    pub fn new(p_list: &[f64]) -> Result<Self, ExponentError> {
        if p_list.is_empty() {
            return Err(ExponentError::Empty);
        }
        for (index, &value) in p_list.iter().enumerate() {
            if !(value > 1.0) || !value.is_finite() {
                return Err(ExponentError::OutOfRange { index, value });
            }
        }
        let inv_p: f64 = p_list.iter().map(|pi| 1.0 / pi).sum();
        let conj_list = p_list.iter().map(|pi| pi / (pi - 1.0)).collect();
        Ok(ExponentVector {
            p_list: p_list.to_vec(),
            conj_list,
            p: 1.0 / inv_p,
        })
    }

    pub fn single(p: f64) -> Result<Self, ExponentError> {
        ExponentVector::new(&[p])
    }

    pub fn m(&self) -> usize {
        self.p_list.len()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn p_i(&self) -> &[f64] {
        &self.p_list
    }

    pub fn conj_i(&self) -> &[f64] {
        &self.conj_list
    }

    /// Residual of `1/p + sum 1/p_i' = m`.
    pub fn identity_residual(&self) -> f64 {
        let lhs: f64 = 1.0 / self.p + self.conj_list.iter().map(|c| 1.0 / c).sum::<f64>();
        lhs - self.m() as f64
    }

    pub fn check_arity(&self, weights: usize) -> Result<(), ExponentError> {
        if weights == self.m() {
            Ok(())
        } else {
            Err(ExponentError::ArityMismatch {
                expected: self.m(),
                got: weights,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_p_and_conjugates() {
        let pv = ExponentVector::new(&[2.0, 2.0]).unwrap();
        assert_eq!(pv.p(), 1.0);
        assert_eq!(pv.conj_i(), &[2.0, 2.0]);
        let pv = ExponentVector::new(&[4.0, 4.0]).unwrap();
        assert_eq!(pv.p(), 2.0);
    }

    #[test]
    fn p_is_at_most_min_p_i() {
        let pv = ExponentVector::new(&[1.5, 3.0, 8.0]).unwrap();
        assert!(pv.p() > 0.0);
        assert!(pv.p() <= 1.5);
    }

    #[test]
    fn exponent_identity_holds_to_1e14() {
        for p_list in [vec![2.0, 2.0], vec![1.5, 3.0, 8.0], vec![7.3], vec![1.01, 99.0]] {
            let pv = ExponentVector::new(&p_list).unwrap();
            assert!(
                pv.identity_residual().abs() <= 1e-14,
                "residual {} for {p_list:?}",
                pv.identity_residual()
            );
        }
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(ExponentVector::new(&[1.0]).is_err());
        assert!(ExponentVector::new(&[0.5, 2.0]).is_err());
        assert!(ExponentVector::new(&[]).is_err());
        assert!(ExponentVector::new(&[f64::INFINITY]).is_err());
    }
}
