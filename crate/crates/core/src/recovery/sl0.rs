use serde::{Deserialize, Serialize};

use super::operator::{adjoint, forward, validate};
use super::{shannon_rank, TraceRow, UndercompleteOperator};
use crate::error::{Error, Result};
use crate::imaging::IsarImage;
use crate::{CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Sl0Params {
    pub sigma_min: f64,
    pub alpha: f64,
    pub mu0: f64,
    /// Inner iterations per σ level.
    pub inner: usize,
}

impl Default for Sl0Params {
    fn default() -> Self {
        Self {
            sigma_min: 1e-6,
            alpha: 0.6,
            mu0: 2.0,
            inner: 15,
        }
    }
}

impl Sl0Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_min > 0.0) {
            return Err(Error::invalid("sigma_min must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid("alpha must lie in (0, 1)"));
        }
        if !(self.mu0 > 0.0) {
            return Err(Error::invalid("mu0 must be positive"));
        }
        if self.inner == 0 {
            return Err(Error::invalid("inner iteration count must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Sl0Output {
    pub image: IsarImage,
    /// One row per σ level; `objective` is the smoothed ℓ0 count at that σ.
    pub trace: Vec<TraceRow>,
}

/// `I ← I − Θx⁺(Θx I Θy† − S)(Θy⁺)†`.
pub(crate) fn project(
    i: &CMatrix,
    s: &CMatrix,
    tx: &UndercompleteOperator,
    ty: &UndercompleteOperator,
) -> CMatrix {
    i - adjoint(&(forward(i, tx, ty) - s), tx, ty)
}

/// Two-dimensional smoothed-ℓ0 recovery.
pub fn sl0_recover(
    s: &CMatrix,
    tx: &UndercompleteOperator,
    ty: &UndercompleteOperator,
    params: &Sl0Params,
) -> Result<Sl0Output> {
    params.validate()?;
    validate(s, tx, ty)?;
    let mut i = adjoint(s, tx, ty);
    let mut sigma = 2.0 * i.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut trace = Vec::new();
    let mut step = 0;
    while sigma > params.sigma_min {
        let two_s2 = 2.0 * sigma * sigma;
        for _ in 0..params.inner {
            step += 1;
            let delta = i.map(|z| z * (-z.norm_sqr() / two_s2).exp());
            i -= delta * C64::new(params.mu0, 0.0);
            i = project(&i, s, tx, ty);
            if i.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Divergence {
                    iteration: step,
                    what: "non-finite image entry in 2D-SL0".into(),
                });
            }
        }
        let count = i.iter().map(|z| 1.0 - (-z.norm_sqr() / two_s2).exp()).sum();
        trace.push(TraceRow {
            iteration: trace.len() + 1,
            objective: count,
            shannon_rank: shannon_rank(&i)?,
            residual: (s - forward(&i, tx, ty)).norm(),
        });
        sigma *= params.alpha;
    }
    Ok(Sl0Output {
        image: IsarImage::from_unshifted(&i),
        trace,
    })
}
