//! Log-barrier interior-point solver for
//!
//! ```text
//! minimize ‖x − a‖²  s.t.  c̃† A_j c̃ ≤ b_j,   c̃ = [prefix; x]
//! ```
//!
//! over complex `x`, with every `A_j` Hermitian PSD. Newton steps are taken
//! in the real lift of `x`; the Hessian splits into a complex-linear part
//! (solved by a [`Backend`]) plus one real rank-one term per constraint,
//! which is folded in with the Woodbury identity.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::signal::CirculantForm;
use crate::{fft, C64};

#[derive(Debug, Clone)]
pub(crate) enum QuadForm {
    /// `F† diag(d) F`, order equal to the full (prefix + variable) length.
    Circulant(CirculantForm),
    /// Energy of the samples in a range of the full vector.
    Window(Range<usize>),
}

impl QuadForm {
    fn apply(&self, full: &[C64]) -> Vec<C64> {
        match self {
            QuadForm::Circulant(f) => f.apply(full),
            QuadForm::Window(r) => {
                let mut out = vec![C64::new(0.0, 0.0); full.len()];
                out[r.clone()].copy_from_slice(&full[r.clone()]);
                out
            }
        }
    }

    fn quad(&self, full: &[C64]) -> f64 {
        match self {
            QuadForm::Circulant(f) => f.quad(full),
            QuadForm::Window(r) => crate::signal::energy(&full[r.clone()]),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Constraint {
    pub form: QuadForm,
    pub bound: f64,
    pub label: String,
}

#[derive(Debug, Clone)]
pub(crate) struct QcqpInstance {
    pub prefix: Vec<C64>,
    pub target: Vec<C64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SolverSettings {
    pub gap_tol: f64,
    pub feasibility_tol: f64,
    pub max_newton: usize,
    pub dense_cap: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            gap_tol: 1e-6,
            feasibility_tol: 1e-9,
            max_newton: 2000,
            dense_cap: 2048,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct QcqpSolution {
    pub x: Vec<C64>,
    pub objective: f64,
    pub multipliers: Vec<f64>,
    pub constraint_values: Vec<f64>,
    pub kkt_residual: f64,
    pub newton_iterations: usize,
    /// Objective at the end of every centering phase.
    pub objective_trace: Vec<f64>,
}

impl QcqpInstance {
    fn total_len(&self) -> usize {
        self.prefix.len() + self.target.len()
    }

    fn full(&self, x: &[C64]) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.total_len());
        v.extend_from_slice(&self.prefix);
        v.extend_from_slice(x);
        v
    }

    fn var<'a>(&self, full: &'a [C64]) -> &'a [C64] {
        &full[self.prefix.len()..]
    }

    pub fn values(&self, x: &[C64]) -> Vec<f64> {
        let full = self.full(x);
        self.constraints.iter().map(|c| c.form.quad(&full)).collect()
    }

    fn objective(&self, x: &[C64]) -> f64 {
        x.iter().zip(&self.target).map(|(u, v)| (u - v).norm_sqr()).sum()
    }

    /// `(A_j c̃)` restricted to the variable part, for every constraint.
    fn partial_gradients(&self, x: &[C64]) -> Vec<Vec<C64>> {
        let full = self.full(x);
        self.constraints
            .iter()
            .map(|c| self.var(&c.form.apply(&full)).to_vec())
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let n = self.total_len();
        if self.target.is_empty() {
            return Err(Error::invalid("empty optimization variable"));
        }
        for c in &self.constraints {
            match &c.form {
                QuadForm::Circulant(f) if f.order() != n => {
                    return Err(Error::mismatch(n, f.order()));
                }
                QuadForm::Window(r) if r.end > n || r.start > r.end => {
                    return Err(Error::invalid(format!("window {r:?} outside length {n}")));
                }
                _ => {}
            }
            if !(c.bound > 0.0) {
                return Err(Error::invalid(format!(
                    "constraint `{}` has non-positive bound",
                    c.label
                )));
            }
        }
        Ok(())
    }
}

/// Solves `H v = rhs` for `H = 2 (t I + Σ_j w_j A_j)` restricted to the variable block.
pub(crate) trait LinearSolve {
    fn solve(&self, rhs: &[C64]) -> Vec<C64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Backend {
    /// Dense assembly and Cholesky; any forms.
    Dense,
    /// FFT-based preconditioned CG; circulant forms only.
    Fourier,
}

impl Backend {
    fn factor(
        self,
        inst: &QcqpInstance,
        t: f64,
        weights: &[f64],
        settings: &SolverSettings,
    ) -> Result<Box<dyn LinearSolve>> {
        match self {
            Backend::Dense => Ok(Box::new(DenseSolve::new(inst, t, weights, settings.dense_cap)?)),
            Backend::Fourier => Ok(Box::new(FourierSolve::new(inst, t, weights)?)),
        }
    }
}

struct DenseSolve {
    chol: nalgebra::Cholesky<C64, nalgebra::Dyn>,
}

impl DenseSolve {
    fn new(inst: &QcqpInstance, t: f64, weights: &[f64], cap: usize) -> Result<Self> {
        let n = inst.target.len();
        if n > cap {
            return Err(Error::SizeLimit { n, cap });
        }
        let p = inst.prefix.len();
        let mut h = DMatrix::<C64>::identity(n, n) * C64::new(2.0 * t, 0.0);
        for (c, &w) in inst.constraints.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            let w2 = C64::new(2.0 * w, 0.0);
            match &c.form {
                QuadForm::Circulant(f) => {
                    let d = f.dense();
                    h += d.view((p, p), (n, n)) * w2;
                }
                QuadForm::Window(r) => {
                    for i in r.clone().filter(|i| *i >= p) {
                        h[(i - p, i - p)] += w2;
                    }
                }
            }
        }
        let chol = nalgebra::Cholesky::new(h)
            .ok_or_else(|| Error::NoConvergence("Newton matrix lost positive definiteness".into()))?;
        Ok(Self { chol })
    }
}

impl LinearSolve for DenseSolve {
    fn solve(&self, rhs: &[C64]) -> Vec<C64> {
        let b = DVector::from_column_slice(rhs);
        self.chol.solve(&b).as_slice().to_vec()
    }
}

/// `2 (t + Σ w_j d_j)` as a circulant of the full order, restricted to the
/// trailing variable block. Preconditioned by the same restriction of the
/// circulant inverse, which is exact when there is no prefix.
struct FourierSolve {
    symbol: Vec<f64>,
    prefix: usize,
}

impl FourierSolve {
    fn new(inst: &QcqpInstance, t: f64, weights: &[f64]) -> Result<Self> {
        let n = inst.total_len();
        let mut symbol = vec![2.0 * t; n];
        for (c, &w) in inst.constraints.iter().zip(weights) {
            match &c.form {
                QuadForm::Circulant(f) => {
                    for (s, d) in symbol.iter_mut().zip(f.symbol()) {
                        *s += 2.0 * w * d;
                    }
                }
                QuadForm::Window(_) => {
                    return Err(Error::invalid("Fourier backend supports circulant forms only"));
                }
            }
        }
        Ok(Self {
            symbol,
            prefix: inst.prefix.len(),
        })
    }

    fn circulant(&self, v: &[C64], inverse: bool) -> Vec<C64> {
        let mut buf = vec![C64::new(0.0, 0.0); self.symbol.len()];
        buf[self.prefix..].copy_from_slice(v);
        fft::fft(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.symbol) {
            if inverse {
                *b /= s;
            } else {
                *b *= s;
            }
        }
        fft::ifft(&mut buf);
        buf.split_off(self.prefix)
    }
}

impl LinearSolve for FourierSolve {
    fn solve(&self, rhs: &[C64]) -> Vec<C64> {
        let x0 = self.circulant(rhs, true);
        if self.prefix == 0 {
            return x0;
        }
        pcg(
            |v| self.circulant(v, false),
            |v| self.circulant(v, true),
            rhs,
            x0,
            1e-13,
            1000,
        )
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Real inner product of the real lifts.
fn re_dot(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

fn norm(a: &[C64]) -> f64 {
    re_dot(a, a).sqrt()
}

/// Preconditioned conjugate gradients for a Hermitian positive-definite operator.
pub(crate) fn pcg(
    op: impl Fn(&[C64]) -> Vec<C64>,
    precond: impl Fn(&[C64]) -> Vec<C64>,
    rhs: &[C64],
    mut x: Vec<C64>,
    rel_tol: f64,
    max_iter: usize,
) -> Vec<C64> {
    let b_norm = norm(rhs);
    if b_norm == 0.0 {
        return vec![C64::new(0.0, 0.0); rhs.len()];
    }
    let ax = op(&x);
    let mut r: Vec<C64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z).re;
    for _ in 0..max_iter {
        if norm(&r) <= rel_tol * b_norm {
            break;
        }
        let ap = op(&p);
        let alpha = rz / dot(&p, &ap).re;
        for i in 0..x.len() {
            x[i] += p[i] * alpha;
            r[i] -= ap[i] * alpha;
        }
        z = precond(&r);
        let rz_new = dot(&r, &z).re;
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..p.len() {
            p[i] = z[i] + p[i] * beta;
        }
    }
    x
}

/// Largest `β ∈ [0, 1]` with `α0 + α1 β + α2 β² ≤ bound`, given `α0 ≤ bound`.
fn max_step(a0: f64, a1: f64, a2: f64, bound: f64) -> f64 {
    let slack = bound - a0;
    if a1 + a2 <= slack {
        return 1.0;
    }
    if a2 <= 1e-300 {
        return if a1 > 0.0 {
            (slack / a1).clamp(0.0, 1.0)
        } else {
            1.0
        };
    }
    let disc = a1 * a1 + 4.0 * a2 * slack;
    ((-a1 + disc.max(0.0).sqrt()) / (2.0 * a2)).clamp(0.0, 1.0)
}

/// Largest `β ∈ [0,1]` keeping `x0 + β d` within `margin · b_j` for all constraints.
fn feasible_step(inst: &QcqpInstance, x0: &[C64], d: &[C64], margin: f64) -> f64 {
    let full0 = inst.full(x0);
    let mut dfull = vec![C64::new(0.0, 0.0); inst.prefix.len()];
    dfull.extend_from_slice(d);
    inst.constraints
        .iter()
        .map(|c| {
            let a0 = c.form.quad(&full0);
            let a2 = c.form.quad(&dfull);
            let a1 = 2.0 * re_dot(&dfull, &c.form.apply(&full0));
            max_step(a0, a1, a2, margin * c.bound)
        })
        .fold(1.0, f64::min)
}

/// Strictly feasible point near the origin for instances whose fixed prefix
/// already loads some constraint, found by reweighted quadratic minimization.
fn phase_one(inst: &QcqpInstance, backend: Backend, settings: &SolverSettings) -> Result<Vec<C64>> {
    let m = inst.constraints.len();
    let mut weights: Vec<f64> = inst.constraints.iter().map(|c| 1.0 / c.bound).collect();
    let zero = vec![C64::new(0.0, 0.0); inst.target.len()];
    let base = inst.partial_gradients(&zero);
    let mut best: Option<(f64, Vec<C64>)> = None;
    for _ in 0..60 {
        let wmax = weights.iter().cloned().fold(0.0, f64::max);
        let eps = 1e-10 * wmax;
        let solver = backend.factor(inst, eps, &weights, settings)?;
        let mut rhs = vec![C64::new(0.0, 0.0); inst.target.len()];
        for (g, w) in base.iter().zip(&weights) {
            for (r, v) in rhs.iter_mut().zip(g) {
                *r -= v * (2.0 * w);
            }
        }
        let x = solver.solve(&rhs);
        let ratios: Vec<f64> = inst
            .values(&x)
            .iter()
            .zip(&inst.constraints)
            .map(|(q, c)| q / c.bound)
            .collect();
        let worst = ratios.iter().cloned().fold(0.0, f64::max);
        if best.as_ref().is_none_or(|(w, _)| worst < *w) {
            best = Some((worst, x));
        }
        if worst < 0.9 {
            break;
        }
        for (w, r) in weights.iter_mut().zip(&ratios) {
            *w *= r.max(1e-3);
        }
        let norm: f64 = weights.iter().sum::<f64>() / m as f64;
        weights.iter_mut().for_each(|w| *w /= norm);
    }
    let (worst, x) = best.expect("at least one phase-one iterate");
    if worst >= 1.0 - 1e-9 {
        // look for a constraint that no choice of the free samples can meet
        for (j, c) in inst.constraints.iter().enumerate() {
            let mut w = vec![1e-12; m];
            w[j] = 1.0;
            let solver = backend.factor(inst, 1e-12, &w, settings)?;
            let rhs: Vec<C64> = base[j].iter().map(|v| -v * 2.0).collect();
            let xj = solver.solve(&rhs);
            let load = inst.values(&xj)[j] / c.bound;
            if load >= 1.0 {
                return Err(Error::Infeasible(format!(
                    "constraint `{}` cannot be met given the fixed prefix (least load {load:.3e} of budget)",
                    c.label
                )));
            }
        }
        let ratios: Vec<f64> = inst
            .values(&x)
            .iter()
            .zip(&inst.constraints)
            .map(|(q, c)| q / c.bound)
            .collect();
        let j = ratios
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(j, _)| j)
            .unwrap_or(0);
        return Err(Error::Infeasible(format!(
            "constraints cannot be met jointly; `{}` worst at {:.3e} of budget",
            inst.constraints[j].label, ratios[j]
        )));
    }
    Ok(x)
}

pub(crate) fn solve(
    inst: &QcqpInstance,
    backend: Backend,
    settings: &SolverSettings,
) -> Result<QcqpSolution> {
    inst.validate()?;
    let m = inst.constraints.len();
    let a = &inst.target;

    let at_target = inst.values(a);
    if at_target
        .iter()
        .zip(&inst.constraints)
        .all(|(q, c)| *q <= c.bound)
    {
        return Ok(QcqpSolution {
            x: a.clone(),
            objective: 0.0,
            multipliers: vec![0.0; m],
            constraint_values: at_target,
            kkt_residual: 0.0,
            newton_iterations: 0,
            objective_trace: vec![0.0],
        });
    }

    let zero = vec![C64::new(0.0, 0.0); a.len()];
    let origin_ok = inst
        .values(&zero)
        .iter()
        .zip(&inst.constraints)
        .all(|(q, c)| *q < 0.9 * c.bound);
    let anchor = if origin_ok {
        zero
    } else {
        phase_one(inst, backend, settings)?
    };
    let dir: Vec<C64> = a.iter().zip(&anchor).map(|(t, s)| t - s).collect();
    let beta = feasible_step(inst, &anchor, &dir, 0.9);
    let mut x: Vec<C64> = anchor.iter().zip(&dir).map(|(s, d)| s + d * beta).collect();

    let slacks = |x: &[C64]| -> Vec<f64> {
        inst.values(x)
            .iter()
            .zip(&inst.constraints)
            .map(|(q, c)| c.bound - q)
            .collect()
    };
    let barrier = |x: &[C64], t: f64| -> Option<f64> {
        let s = slacks(x);
        if s.iter().any(|v| *v <= 0.0) {
            return None;
        }
        Some(t * inst.objective(x) - s.iter().map(|v| v.ln()).sum::<f64>())
    };

    let f_start = inst.objective(&x).max(1e-300);
    // optimum at or next to the target: stop on an absolute gap
    let gap_floor = 1e-12 * crate::signal::energy(a).max(1e-300);
    let mut t = (m as f64 / f_start).max(1.0);
    let mu = 10.0;
    let mut newton_total = 0;
    let mut trace = Vec::new();
    let mut last_s;

    loop {
        // centering
        let mut centered = false;
        for _ in 0..100 {
            newton_total += 1;
            if newton_total > settings.max_newton {
                return Err(Error::NoConvergence(format!(
                    "exceeded {} Newton iterations",
                    settings.max_newton
                )));
            }
            let s = slacks(&x);
            let w: Vec<f64> = s.iter().map(|v| 1.0 / v).collect();
            let vs = inst.partial_gradients(&x);
            let grad: Vec<C64> = (0..x.len())
                .map(|i| {
                    let mut g = (x[i] - a[i]) * (2.0 * t);
                    for (v, wj) in vs.iter().zip(&w) {
                        g += v[i] * (2.0 * wj);
                    }
                    g
                })
                .collect();
            let us: Vec<Vec<C64>> = vs
                .iter()
                .zip(&w)
                .map(|(v, wj)| v.iter().map(|z| z * (2.0 * wj)).collect())
                .collect();
            let solver = backend.factor(inst, t, &w, settings)?;
            let neg_grad: Vec<C64> = grad.iter().map(|g| -g).collect();
            let y = solver.solve(&neg_grad);
            let zs: Vec<Vec<C64>> = us.iter().map(|u| solver.solve(u)).collect();
            let small = DMatrix::from_fn(m, m, |i, j| {
                re_dot(&us[i], &zs[j]) + if i == j { 1.0 } else { 0.0 }
            });
            let rhs = DVector::from_fn(m, |i, _| re_dot(&us[i], &y));
            let coef = small
                .clone()
                .cholesky()
                .map(|c| c.solve(&rhs))
                .or_else(|| small.lu().solve(&rhs))
                .ok_or_else(|| Error::NoConvergence("singular Woodbury system".into()))?;
            let mut step = y;
            for (j, z) in zs.iter().enumerate() {
                for (s, zi) in step.iter_mut().zip(z) {
                    *s -= zi * coef[j];
                }
            }
            let decrement = -re_dot(&grad, &step);
            let grad_scale = 2.0 * t * norm(&x.iter().zip(a).map(|(u, v)| u - v).collect::<Vec<_>>())
                + us.iter().map(|u| norm(u)).sum::<f64>();
            if decrement.abs() / 2.0 <= 1e-14 || norm(&grad) <= 1e-10 * grad_scale {
                centered = true;
                break;
            }
            let phi0 = barrier(&x, t).expect("iterate is strictly feasible");
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..80 {
                let cand: Vec<C64> = x.iter().zip(&step).map(|(u, d)| u + d * alpha).collect();
                if let Some(phi) = barrier(&cand, t) {
                    // close to the center the barrier value is dominated by rounding
                    if decrement < 1e-4 || phi <= phi0 - 0.25 * alpha * decrement {
                        x = cand;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                // numerically converged along this direction
                centered = true;
                break;
            }
        }
        if !centered {
            log::debug!("centering hit its iteration limit at t = {t:e}");
        }
        let f = inst.objective(&x);
        trace.push(f);
        last_s = slacks(&x);
        if m as f64 / t <= settings.gap_tol * f.max(gap_floor) {
            break;
        }
        t *= mu;
    }

    let barrier_mult: Vec<f64> = last_s.iter().map(|s| 1.0 / (t * s)).collect();
    let vs = inst.partial_gradients(&x);
    let obj_grad: Vec<C64> = x.iter().zip(a).map(|(u, v)| (u - v) * 2.0).collect();
    let gnorm = norm(&obj_grad);
    // refit multipliers on the active set; 1/(t·s) is limited by the rounding of tiny slacks
    let active: Vec<usize> = (0..m)
        .filter(|&j| barrier_mult[j] * 2.0 * norm(&vs[j]) > 1e-8 * gnorm)
        .collect();
    let mut multipliers = vec![0.0; m];
    if !active.is_empty() {
        let k = active.len();
        let gram = DMatrix::from_fn(k, k, |p, q| 4.0 * re_dot(&vs[active[p]], &vs[active[q]]));
        let rhs = DVector::from_fn(k, |p, _| -2.0 * re_dot(&vs[active[p]], &obj_grad));
        let fit = gram
            .clone()
            .cholesky()
            .map(|c| c.solve(&rhs))
            .or_else(|| gram.lu().solve(&rhs));
        match fit {
            Some(l) if l.iter().all(|v| *v >= 0.0) => {
                for (p, &j) in active.iter().enumerate() {
                    multipliers[j] = l[p];
                }
            }
            _ => {
                for &j in &active {
                    multipliers[j] = barrier_mult[j];
                }
            }
        }
    }
    let mut stat = obj_grad.clone();
    let mut scale = gnorm;
    for (v, l) in vs.iter().zip(&multipliers) {
        let g: Vec<C64> = v.iter().map(|z| z * (2.0 * l)).collect();
        scale += norm(&g);
        for (s, gi) in stat.iter_mut().zip(&g) {
            *s += gi;
        }
    }
    let objective = inst.objective(&x);
    let gap: f64 = multipliers.iter().zip(&last_s).map(|(l, s)| l * s).sum();
    let stationarity = norm(&stat) / scale.max(1e-300);
    let kkt_residual = stationarity.max(gap / objective.max(gap_floor));
    let constraint_values = inst.values(&x);
    debug_assert!(constraint_values
        .iter()
        .zip(&inst.constraints)
        .all(|(q, c)| *q <= c.bound * (1.0 + settings.feasibility_tol)));

    Ok(QcqpSolution {
        x,
        objective,
        multipliers,
        constraint_values,
        kkt_residual,
        newton_iterations: newton_total,
        objective_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::FrequencyBand;

    fn seq(n: usize, seed: f64) -> Vec<C64> {
        (0..n)
            .map(|k| C64::new((seed * k as f64 + 0.3).sin(), (seed * 1.7 * k as f64).cos()) * 0.2)
            .collect()
    }

    fn band_form(lo: f64, hi: f64, n: usize) -> QuadForm {
        QuadForm::Circulant(CirculantForm::for_band(&FrequencyBand::new(lo, hi, 1.0).unwrap(), n).unwrap())
    }

    #[test]
    fn max_step_solves_quadratic() {
        let b = max_step(0.0, 0.0, 4.0, 1.0);
        assert!((b - 0.5).abs() < 1e-15);
        assert_eq!(max_step(0.0, 0.1, 0.1, 1.0), 1.0);
        let b = max_step(0.2, 0.5, 1.0, 1.0);
        assert!((0.2 + 0.5 * b + b * b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pcg_matches_dense_solve() {
        let n = 24;
        let p = 8;
        let inst = QcqpInstance {
            prefix: seq(p, 0.9),
            target: seq(n - p, 0.4),
            constraints: vec![
                Constraint {
                    form: band_form(0.1, 0.3, n),
                    bound: 1.0,
                    label: "b".into(),
                },
                Constraint {
                    form: QuadForm::Circulant(CirculantForm::identity(n)),
                    bound: 1.0,
                    label: "e".into(),
                },
            ],
        };
        let w = [37.0, 2.5];
        let s = SolverSettings::default();
        let dense = Backend::Dense.factor(&inst, 0.7, &w, &s).unwrap();
        let four = Backend::Fourier.factor(&inst, 0.7, &w, &s).unwrap();
        let rhs = seq(n - p, 1.3);
        let a = dense.solve(&rhs);
        let b = four.solve(&rhs);
        let err: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "err = {err}");
    }

    #[test]
    fn ball_projection_is_a_rescale() {
        let a = seq(16, 0.7);
        let e: f64 = crate::signal::energy(&a);
        let inst = QcqpInstance {
            prefix: vec![],
            target: a.clone(),
            constraints: vec![Constraint {
                form: QuadForm::Circulant(CirculantForm::identity(16)),
                bound: e / 4.0,
                label: "energy".into(),
            }],
        };
        let sol = solve(&inst, Backend::Fourier, &SolverSettings::default()).unwrap();
        for (x, t) in sol.x.iter().zip(&a) {
            assert!((x - t * 0.5).norm() < 1e-6);
        }
        assert!(sol.kkt_residual <= 1e-6);
        assert!(sol.constraint_values[0] <= e / 4.0);
    }

    #[test]
    fn objective_trace_is_monotone() {
        let n = 32;
        let inst = QcqpInstance {
            prefix: vec![],
            target: seq(n, 0.31),
            constraints: vec![
                Constraint {
                    form: band_form(0.2, 0.4, n),
                    bound: 1e-3,
                    label: "b1".into(),
                },
                Constraint {
                    form: band_form(0.6, 0.7, n),
                    bound: 1e-2,
                    label: "b2".into(),
                },
                Constraint {
                    form: QuadForm::Circulant(CirculantForm::identity(n)),
                    bound: 0.5,
                    label: "e".into(),
                },
            ],
        };
        let sol = solve(&inst, Backend::Fourier, &SolverSettings::default()).unwrap();
        for w in sol.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{:?}", sol.objective_trace);
        }
        assert!(sol.kkt_residual <= 1e-6, "kkt {}", sol.kkt_residual);
        let dense = solve(&inst, Backend::Dense, &SolverSettings::default()).unwrap();
        assert!((dense.objective - sol.objective).abs() <= 1e-6 * sol.objective);
    }

    #[test]
    fn size_cap_is_enforced() {
        let inst = QcqpInstance {
            prefix: vec![],
            target: seq(40, 0.2),
            constraints: vec![Constraint {
                form: QuadForm::Window(0..40),
                bound: 1e-3,
                label: "e".into(),
            }],
        };
        let settings = SolverSettings {
            dense_cap: 16,
            ..Default::default()
        };
        assert!(matches!(
            solve(&inst, Backend::Dense, &settings),
            Err(Error::SizeLimit { .. })
        ));
    }
}
