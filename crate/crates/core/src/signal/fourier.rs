use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::signal::ComplexSequence;
use crate::C64;

/// Temporal steering vector `p_f(n) = exp(-j2πf n)/√N`, n = 0..N-1.
pub fn steering_vector(f: f64, n: usize) -> Result<ComplexSequence> {
    if !(0.0..1.0).contains(&f) {
        return Err(Error::invalid(format!(
            "normalized frequency must lie in [0,1), got {f}"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("steering vector length must be positive"));
    }
    let s = 1.0 / (n as f64).sqrt();
    ComplexSequence::new(
        (0..n)
            .map(|k| C64::from_polar(s, -2.0 * PI * f * k as f64))
            .collect(),
    )
}

/// Scaled `N × N` DFT matrix, `F(m,n) = exp(-j2π m n / N)/√N` (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct FourierMatrix {
    entries: DMatrix<C64>,
}

impl FourierMatrix {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("Fourier matrix order must be positive"));
        }
        Ok(Self {
            entries: dft_matrix(n),
        })
    }

    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    /// Max-norm of `F F† − I`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.order();
        let g = &self.entries * self.entries.adjoint() - DMatrix::<C64>::identity(n, n);
        g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub(crate) fn dft_matrix(n: usize) -> DMatrix<C64> {
    let s = 1.0 / (n as f64).sqrt();
    // reduce m·n mod N before the trig call to keep large orders accurate
    DMatrix::from_fn(n, n, |m, k| {
        let r = (m * k) % n;
        C64::from_polar(s, -2.0 * PI * r as f64 / n as f64)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[C64], b: &[C64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn steering_examples() {
        let h = C64::new(0.5, 0.0);
        let p = steering_vector(0.0, 4).unwrap();
        assert!(close(p.samples(), &[h; 4], 1e-15));

        let r = 1.0 / 2f64.sqrt();
        let p = steering_vector(0.5, 2).unwrap();
        assert!(close(p.samples(), &[C64::new(r, 0.0), C64::new(-r, 0.0)], 1e-15));

        let p = steering_vector(0.25, 4).unwrap();
        let want = [
            C64::new(0.5, 0.0),
            C64::new(0.0, -0.5),
            C64::new(-0.5, 0.0),
            C64::new(0.0, 0.5),
        ];
        assert!(close(p.samples(), &want, 1e-15));
    }

    #[test]
    fn steering_rejects_bad_args() {
        assert!(steering_vector(1.0, 4).is_err());
        assert!(steering_vector(-0.1, 4).is_err());
        assert!(steering_vector(0.1, 0).is_err());
    }

    #[test]
    fn columns_are_steering_vectors() {
        let n = 7;
        let f = FourierMatrix::new(n).unwrap();
        for col in 0..n {
            let p = steering_vector(col as f64 / n as f64, n).unwrap();
            let c: Vec<C64> = f.entries().column(col).iter().copied().collect();
            assert!(close(&c, p.samples(), 1e-13));
        }
        // F is symmetric, so rows are the same vectors
        assert!((f.entries() - f.entries().transpose()).norm() < 1e-13);
    }

    #[test]
    fn unitary_for_several_orders() {
        for n in [1, 2, 3, 16, 33, 100] {
            assert!(
                FourierMatrix::new(n).unwrap().unitarity_residual() < 1e-12,
                "n={n}"
            );
        }
    }
}
