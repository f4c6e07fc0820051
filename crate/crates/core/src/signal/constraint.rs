use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::signal::{band_grid, ComplexSequence, FrequencyBand};
use crate::C64;

/// Hermitian form `x ↦ F† diag(symbol) F x` with `F` the unitary DFT.
///
/// Every band constraint matrix and the identity are of this type, which
/// lets the solvers work in the Fourier domain instead of holding dense
/// `N × N` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantForm {
    symbol: Vec<f64>,
}

impl CirculantForm {
    pub fn new(symbol: Vec<f64>) -> Result<Self> {
        if symbol.is_empty() {
            return Err(Error::invalid("empty symbol"));
        }
        if symbol.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::invalid("symbol must be finite and nonnegative"));
        }
        Ok(Self { symbol })
    }

    pub fn identity(n: usize) -> Self {
        Self { symbol: vec![1.0; n] }
    }

    /// The form of `R = (1/w) Q Q†` for `band` at order `n`.
    pub fn for_band(band: &FrequencyBand, n: usize) -> Result<Self> {
        let grid = band_grid(band, n)?;
        let mut symbol = vec![0.0; n];
        let w = 1.0 / band.width();
        for i in grid {
            symbol[i] = w;
        }
        Ok(Self { symbol })
    }

    pub fn order(&self) -> usize {
        self.symbol.len()
    }

    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.order());
        let mut y = x.to_vec();
        fft::fft(&mut y);
        y.iter_mut().zip(&self.symbol).for_each(|(v, d)| *v *= d);
        fft::ifft(&mut y);
        y
    }

    /// `x† A x`, exactly real by construction.
    pub fn quad(&self, x: &[C64]) -> f64 {
        assert_eq!(x.len(), self.order());
        let mut y = x.to_vec();
        fft::fft(&mut y);
        y.iter().zip(&self.symbol).map(|(v, d)| d * v.norm_sqr()).sum()
    }

    /// Dense matrix; entry `(m, n)` is `(1/N) Σ_i d_i exp(+j2π i (m−n)/N)`.
    pub fn dense(&self) -> DMatrix<C64> {
        let n = self.order();
        let mut kernel: Vec<C64> = self.symbol.iter().map(|&d| C64::new(d, 0.0)).collect();
        fft::fft_raw(&mut kernel, Direction::Inverse);
        let s = 1.0 / n as f64;
        DMatrix::from_fn(n, n, |m, k| kernel[(m + n - k) % n] * s)
    }
}

/// Dense band constraint matrix `R = (1/(f_hi − f_lo)) Q Q†`.
///
/// The columns of `Q` are the vectors `exp(+j2π f_i n)/√N` for the grid
/// frequencies `f_i = i/N` inside the band, so that `c† R c` measures the
/// DTFT energy `Σ|C(f_i)|²/(N w)` at positive frequency `f_i`.
#[derive(Debug, Clone)]
pub struct ConstraintMatrix {
    band: FrequencyBand,
    grid: Vec<usize>,
    r: DMatrix<C64>,
}

impl ConstraintMatrix {
    pub fn new(band: &FrequencyBand, n: usize) -> Result<Self> {
        let grid = band_grid(band, n)?;
        let s = 1.0 / (n as f64).sqrt();
        let q = DMatrix::from_fn(n, grid.len(), |m, k| {
            let r = (m * grid[k]) % n;
            C64::from_polar(s, 2.0 * std::f64::consts::PI * r as f64 / n as f64)
        });
        let r = (&q * q.adjoint()) / C64::new(band.width(), 0.0);
        Ok(Self {
            band: band.clone(),
            grid,
            r,
        })
    }

    pub fn band(&self) -> &FrequencyBand {
        &self.band
    }

    pub fn order(&self) -> usize {
        self.r.nrows()
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.r
    }

    pub fn rank(&self) -> usize {
        self.grid.len()
    }

    pub fn form(&self) -> CirculantForm {
        CirculantForm::for_band(&self.band, self.order()).expect("grid was non-empty at construction")
    }
}

/// `c† R c` evaluated with the dense matrix.
pub fn band_energy(c: &ComplexSequence, r: &ConstraintMatrix) -> Result<f64> {
    if c.len() != r.order() {
        return Err(Error::mismatch(r.order(), c.len()));
    }
    let v = nalgebra::DVector::from_column_slice(c.samples());
    let q = (v.adjoint() * r.matrix() * &v)[(0, 0)];
    let scale = v.norm_squared() * r.matrix().norm().max(1.0);
    debug_assert!(
        q.im.abs() <= 1e-10 * scale.max(1.0),
        "non-real quadratic form {q}"
    );
    Ok(q.re.max(0.0))
}

/// Same quantity as [`band_energy`] evaluated through an FFT at order `c.len()`.
pub fn spectral_band_energy(c: &[C64], band: &FrequencyBand) -> Result<f64> {
    Ok(CirculantForm::for_band(band, c.len())?.quad(c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandCheck {
    pub f_lo: f64,
    pub f_hi: f64,
    pub energy: f64,
    pub budget: f64,
    pub satisfied: bool,
    /// `10 log10(budget / energy)`; negative when violated.
    pub margin_db: f64,
}

/// Evaluates every band constraint with budgets scaled by `budget_scale`.
pub fn check_constraints(
    c: &ComplexSequence,
    bands: &[FrequencyBand],
    budget_scale: f64,
) -> Result<Vec<BandCheck>> {
    bands
        .iter()
        .map(|b| {
            let energy = spectral_band_energy(c.samples(), b)?;
            let budget = b.energy_budget() * budget_scale;
            Ok(BandCheck {
                f_lo: b.f_lo(),
                f_hi: b.f_hi(),
                energy,
                budget,
                satisfied: energy <= budget + 1e-9 * budget,
                margin_db: 10.0 * (budget / energy).log10(),
            })
        })
        .collect()
}
