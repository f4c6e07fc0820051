use serde::{Deserialize, Serialize};

use super::operator::{adjoint, forward, validate};
use super::{sl0_recover, Sl0Params, TraceRow, UndercompleteOperator};
use crate::error::{Error, Result};
use crate::imaging::IsarImage;
use crate::{CMatrix, C64};

/// Regularization weight, either absolute or relative to `σ_1(I_M)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lambda {
    Absolute(f64),
    Relative(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RmInit {
    /// Output of 2D-SL0 on the same data.
    #[default]
    Sl0,
    /// `I_M = Θx⁺ S (Θy†)⁺`.
    Pseudoinverse,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RmParams {
    pub lambda: Lambda,
    /// Majorization constant; `None` selects `20 λ_max(Θx†Θx) λ_max(Θy†Θy)`.
    pub tau: Option<f64>,
    pub k_max: usize,
    pub init: RmInit,
    pub sl0: Sl0Params,
}

impl Default for RmParams {
    fn default() -> Self {
        Self {
            lambda: Lambda::Relative(0.05),
            tau: None,
            k_max: 50,
            init: RmInit::Sl0,
            sl0: Sl0Params::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RmOutput {
    pub image: IsarImage,
    /// Row 0 is the initializer; row `k` follows update `k`.
    pub trace: Vec<TraceRow>,
    pub lambda: f64,
    pub tau: f64,
    pub iterations: usize,
}

/// Convergence threshold of the bidiagonal sweeps.
const SVD_EPS: f64 = 1e-14;

/// SVD whose reconstruction is checked, retried on the adjoint if it is off.
fn checked_svd(m: &CMatrix, iteration: usize) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let attempt = |a: &CMatrix| -> Option<(CMatrix, Vec<f64>, CMatrix)> {
        let svd = a.clone().try_svd(true, true, SVD_EPS, 0)?;
        let (u, vt) = (svd.u?, svd.v_t?);
        let sigma: Vec<f64> = svd.singular_values.iter().cloned().collect();
        let mut back = CMatrix::zeros(a.nrows(), a.ncols());
        for (k, s) in sigma.iter().enumerate() {
            back += (u.column(k) * C64::new(*s, 0.0)) * vt.row(k);
        }
        ((back - a).norm() <= 1e-10 * scale).then_some((u, sigma, vt))
    };
    if let Some(f) = attempt(m) {
        return Ok(f);
    }
    let (u, sigma, vt) = attempt(&m.adjoint()).ok_or(Error::SvdFailure(iteration))?;
    Ok((vt.adjoint(), sigma, u.adjoint()))
}

fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    let svd = m
        .clone()
        .try_svd(false, false, SVD_EPS, 0)
        .ok_or(Error::SvdFailure(0))?;
    let sigma: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let energy: f64 = sigma.iter().map(|s| s * s).sum();
    let want = m.norm_squared();
    if (energy - want).abs() <= 1e-10 * want.max(f64::MIN_POSITIVE) {
        return Ok(sigma);
    }
    Ok(checked_svd(m, 0)?.1)
}

/// `(σ_i − t)_+`, order preserved.
pub fn svd_soft_threshold(sigma: &[f64], t: f64) -> Vec<f64> {
    sigma.iter().map(|s| (s - t).max(0.0)).collect()
}

/// `exp(H(σ/‖σ‖_1))` over the nonzero singular values; 0 for the zero matrix.
pub fn shannon_rank(m: &CMatrix) -> Result<f64> {
    Ok(shannon_rank_of(&singular_values(m)?))
}

pub(crate) fn shannon_rank_of(sigma: &[f64]) -> f64 {
    let l1: f64 = sigma.iter().sum();
    if l1 <= 0.0 {
        return 0.0;
    }
    let h: f64 = sigma
        .iter()
        .filter(|s| **s > 0.0)
        .map(|s| {
            let p = s / l1;
            -p * p.ln()
        })
        .sum();
    h.exp()
}

/// `½‖S − Θx I Θy†‖_F² + λ‖I‖_⋆`, `I` in operator coordinates.
pub fn rm_objective(
    i: &CMatrix,
    s: &CMatrix,
    tx: &UndercompleteOperator,
    ty: &UndercompleteOperator,
    lambda: f64,
) -> Result<f64> {
    validate(s, tx, ty)?;
    validate(i, tx, ty)?;
    let nuclear: f64 = singular_values(i)?.iter().sum();
    Ok(0.5 * (s - forward(i, tx, ty)).norm_squared() + lambda * nuclear)
}

/// Quadratic majorizer of [`rm_objective`] around `ik`.
pub fn rm_surrogate(
    i: &CMatrix,
    ik: &CMatrix,
    s: &CMatrix,
    tx: &UndercompleteOperator,
    ty: &UndercompleteOperator,
    lambda: f64,
    tau: f64,
) -> Result<f64> {
    validate(s, tx, ty)?;
    let rk = forward(ik, tx, ty) - s;
    let grad = adjoint(&rk, tx, ty);
    let d = i - ik;
    let lin: f64 = grad.iter().zip(d.iter()).map(|(g, x)| (g.conj() * x).re).sum();
    let nuclear: f64 = singular_values(i)?.iter().sum();
    Ok(0.5 * rk.norm_squared() + lin + 0.5 * tau * d.norm_squared() + lambda * nuclear)
}

/// Singular value thresholding of `m` at `t`, with a stable descending order.
fn svt(m: &CMatrix, t: f64, iteration: usize) -> Result<CMatrix> {
    let (u, sigma, vt) = checked_svd(m, iteration)?;
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|a, b| sigma[*b].total_cmp(&sigma[*a]));
    let sorted: Vec<f64> = order.iter().map(|&k| sigma[k]).collect();
    let shrunk = svd_soft_threshold(&sorted, t);
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for (pos, &k) in order.iter().enumerate() {
        let s = shrunk[pos];
        if s == 0.0 {
            break;
        }
        out += (u.column(k) * C64::new(s, 0.0)) * vt.row(k);
    }
    Ok(out)
}

/// Majorization-minimization rank minimization.
///
/// Each update is a gradient step on the data term followed by singular
/// value soft-thresholding. Stops once the Shannon rank of the iterate
/// drops to that of `I_M`, or after `k_max` updates.
pub fn rm_recover(
    s: &CMatrix,
    tx: &UndercompleteOperator,
    ty: &UndercompleteOperator,
    params: &RmParams,
    init: Option<&CMatrix>,
) -> Result<RmOutput> {
    validate(s, tx, ty)?;
    if params.k_max == 0 {
        return Err(Error::invalid("k_max must be positive"));
    }
    let bound = tx.lambda_max() * ty.lambda_max();
    let tau = params.tau.unwrap_or(20.0 * bound);
    if !(tau >= bound) {
        return Err(Error::invalid(format!(
            "tau {tau} below the majorization bound {bound}"
        )));
    }
    let i_m = adjoint(s, tx, ty);
    let sig_m = singular_values(&i_m)?;
    let lambda = match params.lambda {
        Lambda::Absolute(v) => v,
        Lambda::Relative(r) => r * sig_m.iter().cloned().fold(0.0, f64::max),
    };
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda {lambda} must be finite and ≥ 0")));
    }
    let rank_m = shannon_rank_of(&sig_m);

    let mut i = match init {
        Some(m) => {
            validate(m, tx, ty)?;
            m.clone()
        }
        None => match params.init {
            RmInit::Sl0 => sl0_recover(s, tx, ty, &params.sl0)?.image.unshifted(),
            RmInit::Pseudoinverse => i_m.clone(),
            RmInit::Zero => CMatrix::zeros(s.nrows(), s.ncols()),
        },
    };
    let row = |k: usize, i: &CMatrix| -> Result<TraceRow> {
        let sig = singular_values(i).map_err(|_| Error::SvdFailure(k))?;
        let resid = s - forward(i, tx, ty);
        Ok(TraceRow {
            iteration: k,
            objective: 0.5 * resid.norm_squared() + lambda * sig.iter().sum::<f64>(),
            shannon_rank: shannon_rank_of(&sig),
            residual: resid.norm(),
        })
    };
    let mut trace = vec![row(0, &i)?];
    let mut k = 0;
    loop {
        k += 1;
        let grad = adjoint(&(forward(&i, tx, ty) - s), tx, ty);
        let bar = &i - grad * C64::new(1.0 / tau, 0.0);
        i = svt(&bar, lambda / tau, k)?;
        let r = row(k, &i)?;
        let done = r.shannon_rank <= rank_m || k == params.k_max;
        trace.push(r);
        if done {
            break;
        }
    }
    Ok(RmOutput {
        image: IsarImage::from_unshifted(&i),
        trace,
        lambda,
        tau,
        iterations: k,
    })
}
