use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::imaging::{data_from_unshifted, rd_unshifted};
use crate::signal::dft_matrix;
use crate::{CMatrix, C64};

/// Unitary DFT of order `N` with the listed rows zeroed: `Θ = D F_N`.
///
/// Rows of a unitary matrix are orthonormal, so `Θ⁺ = Θ†` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct UndercompleteOperator {
    order: usize,
    missing: BTreeSet<usize>,
    theta: CMatrix,
    pinv: CMatrix,
}

impl UndercompleteOperator {
    pub fn new(order: usize, missing: &BTreeSet<usize>) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("operator order must be positive"));
        }
        if let Some(&r) = missing.iter().next_back() {
            if r >= order {
                return Err(Error::invalid(format!("missing row {r} outside 0..{order}")));
            }
        }
        if missing.len() == order {
            return Err(Error::AllMasked("operator row"));
        }
        let mut theta = dft_matrix(order);
        for &r in missing {
            theta.row_mut(r).fill(C64::new(0.0, 0.0));
        }
        let pinv = theta.adjoint();
        Ok(Self {
            order,
            missing: missing.clone(),
            theta,
            pinv,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn missing(&self) -> &BTreeSet<usize> {
        &self.missing
    }

    pub fn theta(&self) -> &CMatrix {
        &self.theta
    }

    pub fn pinv(&self) -> &CMatrix {
        &self.pinv
    }

    pub fn rank(&self) -> usize {
        self.order - self.missing.len()
    }

    /// `λ_max(Θ†Θ)`; 1 because at least one row survives.
    pub fn lambda_max(&self) -> f64 {
        1.0
    }
}

fn check(s: &CMatrix, tx: &UndercompleteOperator, ty: &UndercompleteOperator) -> Result<()> {
    let want = (tx.order, ty.order);
    if s.shape() != want {
        return Err(Error::mismatch(format!("{want:?}"), format!("{:?}", s.shape())));
    }
    Ok(())
}

fn zero_masked(m: &mut CMatrix, tx: &UndercompleteOperator, ty: &UndercompleteOperator) {
    let z = C64::new(0.0, 0.0);
    for &r in &tx.missing {
        m.row_mut(r).fill(z);
    }
    for &c in &ty.missing {
        m.column_mut(c).fill(z);
    }
}

/// `Θx I Θy†` by fast transforms.
pub(crate) fn forward(i: &CMatrix, tx: &UndercompleteOperator, ty: &UndercompleteOperator) -> CMatrix {
    let mut m = data_from_unshifted(i);
    zero_masked(&mut m, tx, ty);
    m
}

/// `Θx† R Θy`, which is also `Θx⁺ R (Θy⁺)†`.
pub(crate) fn adjoint(r: &CMatrix, tx: &UndercompleteOperator, ty: &UndercompleteOperator) -> CMatrix {
    let mut m = r.clone();
    zero_masked(&mut m, tx, ty);
    rd_unshifted(&m)
}

pub(crate) fn validate(s: &CMatrix, tx: &UndercompleteOperator, ty: &UndercompleteOperator) -> Result<()> {
    check(s, tx, ty)
}

/// `‖S − Θx I Θy†‖_F²` with `I` in operator (unshifted) coordinates.
pub fn displacement(
    s: &CMatrix,
    tx: &UndercompleteOperator,
    ty: &UndercompleteOperator,
    i: &CMatrix,
) -> Result<f64> {
    check(s, tx, ty)?;
    check(i, tx, ty)?;
    Ok((s - forward(i, tx, ty)).norm_squared())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random(r: usize, c: usize, seed: u64) -> CMatrix {
        let mut s = seed;
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        CMatrix::from_fn(r, c, |_, _| C64::new(next(), next()))
    }

    fn op(n: usize, missing: &[usize]) -> UndercompleteOperator {
        UndercompleteOperator::new(n, &missing.iter().cloned().collect()).unwrap()
    }

    #[test]
    fn complete_operator_is_unitary() {
        let t = op(6, &[]);
        let id = CMatrix::identity(6, 6);
        assert!((t.pinv() * t.theta() - &id).norm() < 1e-12);
        assert!((t.theta() * t.pinv() - &id).norm() < 1e-12);
    }

    #[test]
    fn moore_penrose_identities() {
        let t = op(7, &[1, 4, 5]);
        let (a, p) = (t.theta(), t.pinv());
        assert!((a * p * a - a).norm() < 1e-12);
        assert!((p * a * p - p).norm() < 1e-12);
        let ap = a * p;
        assert!((&ap - ap.adjoint()).norm() < 1e-12);
        let pa = p * a;
        assert!((&pa - pa.adjoint()).norm() < 1e-12);
        assert_eq!(t.rank(), 4);
    }

    #[test]
    fn single_surviving_row() {
        let t = op(5, &[0, 1, 3, 4]);
        let gram = t.theta().adjoint() * t.theta();
        let eig = gram.clone().symmetric_eigen().eigenvalues;
        let mut ev: Vec<f64> = eig.iter().cloned().collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[4] - 1.0).abs() < 1e-12);
        assert!(ev[..4].iter().all(|v| v.abs() < 1e-12));
        assert!((t.theta() * t.pinv() * t.theta() - t.theta()).norm() < 1e-12);
    }

    #[test]
    fn fast_paths_match_dense() {
        let (tx, ty) = (op(6, &[2]), op(5, &[0, 3]));
        let i = random(6, 5, 3);
        let dense = tx.theta() * &i * ty.theta().adjoint();
        assert!((forward(&i, &tx, &ty) - &dense).norm() < 1e-12);
        let r = random(6, 5, 4);
        let dense_adj = tx.theta().adjoint() * &r * ty.theta();
        assert!((adjoint(&r, &tx, &ty) - &dense_adj).norm() < 1e-12);
    }

    #[test]
    fn displacement_examples() {
        let (tx, ty) = (op(4, &[]), op(3, &[]));
        let s = random(4, 3, 9);
        let exact = tx.pinv() * &s * ty.pinv().adjoint();
        assert!(displacement(&s, &tx, &ty, &exact).unwrap() < 1e-20);
        let zero = CMatrix::zeros(4, 3);
        assert!((displacement(&s, &tx, &ty, &zero).unwrap() - s.norm_squared()).abs() < 1e-12);

        let (tx, ty) = (op(4, &[1]), op(3, &[2]));
        let i = random(4, 3, 10);
        let mut brute = 0.0;
        for m in 0..4 {
            for n in 0..3 {
                let mut acc = C64::new(0.0, 0.0);
                for p in 0..4 {
                    for q in 0..3 {
                        acc += tx.theta()[(m, p)] * i[(p, q)] * ty.theta()[(n, q)].conj();
                    }
                }
                brute += (s[(m, n)] - acc).norm_sqr();
            }
        }
        assert!((displacement(&s, &tx, &ty, &i).unwrap() - brute).abs() < 1e-12);
        assert!(displacement(&s, &tx, &ty, &CMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn all_rows_missing_is_rejected() {
        assert!(UndercompleteOperator::new(2, &[0, 1].into()).is_err());
        assert!(UndercompleteOperator::new(2, &[2].into()).is_err());
    }
}
