//! Spectrally-notched waveform synthesis.
//!
//! The waveform is the point closest to a reference code subject to block
//! energy bounds and per-band interference budgets. [`solve_qcqp_full`]
//! handles the whole sequence at once (dense, desk scale only);
//! [`design_waveform`] runs the sequential overlapped-block scheme that
//! scales to long sequences.

mod qcqp;

use std::ops::Range;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{check_constraints, CirculantForm, ComplexSequence, FrequencyBand};
use crate::C64;

use qcqp::{Backend, Constraint, QcqpInstance, QcqpSolution, QuadForm, SolverSettings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute slack allowed on normalized budgets.
    pub feasibility: f64,
    /// Relative optimality gap at termination.
    pub optimality_gap: f64,
    /// Largest variable count the dense full solve accepts.
    pub dense_cap: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feasibility: 1e-9,
            optimality_gap: 1e-6,
            dense_cap: 2048,
        }
    }
}

impl Tolerances {
    fn settings(&self) -> SolverSettings {
        SolverSettings {
            gap_tol: self.optimality_gap,
            feasibility_tol: self.feasibility,
            dense_cap: self.dense_cap,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignProblem {
    reference: ComplexSequence,
    bands: Vec<FrequencyBand>,
    block_size: usize,
    overlap: usize,
    pub tolerances: Tolerances,
}

impl DesignProblem {
    pub fn new(
        reference: ComplexSequence,
        bands: Vec<FrequencyBand>,
        block_size: usize,
        overlap: usize,
    ) -> Result<Self> {
        let n = reference.len();
        if block_size == 0 || block_size > n {
            return Err(Error::invalid(format!(
                "block size {block_size} must lie in [1, {n}]"
            )));
        }
        if 2 * overlap > block_size {
            return Err(Error::invalid(format!(
                "overlap {overlap} exceeds half the block size {block_size}"
            )));
        }
        Ok(Self {
            reference,
            bands,
            block_size,
            overlap,
            tolerances: Tolerances::default(),
        })
    }

    pub fn reference(&self) -> &ComplexSequence {
        &self.reference
    }

    pub fn bands(&self) -> &[FrequencyBand] {
        &self.bands
    }

    pub fn len(&self) -> usize {
        self.reference.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn overlap(&self) -> usize {
        self.overlap
    }

    /// `L = ⌈N / N̄⌉`.
    pub fn block_count(&self) -> usize {
        self.len().div_ceil(self.block_size)
    }

    /// Number of overlapped solves after the first block.
    pub fn refinement_count(&self) -> usize {
        refinement_count(self.len(), self.block_size, self.overlap)
    }
}

/// `L̃ = ⌈(N − N̄) / (N̄ − W)⌉`.
pub fn refinement_count(n: usize, block: usize, overlap: usize) -> usize {
    (n - block).div_ceil(block - overlap)
}

/// Segments of the reference optimized by the block scheme: one of length
/// `N̄`, then `L̃` of length `N̄ − W`; the last one is cut to end at `N`.
pub fn partition(n: usize, block: usize, overlap: usize) -> Vec<Range<usize>> {
    let mut out = vec![0..block.min(n)];
    let step = block - overlap;
    let mut start = block;
    for _ in 0..refinement_count(n, block, overlap) {
        let end = (start + step).min(n);
        out.push(start..end);
        start = end;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub objective: f64,
    pub kkt_residual: f64,
    pub newton_iterations: usize,
    pub multipliers: Vec<f64>,
    /// Objective after each barrier centering phase.
    pub objective_trace: Vec<f64>,
}

impl From<&QcqpSolution> for SolveStats {
    fn from(s: &QcqpSolution) -> Self {
        Self {
            objective: s.objective,
            kkt_residual: s.kkt_residual,
            newton_iterations: s.newton_iterations,
            multipliers: s.multipliers.clone(),
            objective_trace: s.objective_trace.clone(),
        }
    }
}

/// One block solve: the optimized samples plus the constraint values seen
/// on the (possibly prefixed) window.
#[derive(Debug, Clone)]
pub struct BlockSolution {
    pub samples: Vec<C64>,
    pub window_energy: f64,
    pub band_energies: Vec<f64>,
    pub stats: SolveStats,
}

#[derive(Debug, Clone)]
pub struct DesignSolution {
    pub c: ComplexSequence,
    /// `‖c − c0‖²`.
    pub objective: f64,
    /// Energy of every constrained window (full solve: every block).
    pub block_energies: Vec<f64>,
    /// Band energies per constrained window, one inner entry per band.
    pub band_energies: Vec<Vec<f64>>,
    pub block_bound: f64,
    pub band_budgets: Vec<f64>,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub solves: Vec<SolveStats>,
}

impl DesignSolution {
    /// True when every window meets its energy bound and band budgets within `tol` (relative).
    pub fn is_feasible(&self, tol: f64) -> bool {
        self.block_energies
            .iter()
            .all(|e| *e <= self.block_bound * (1.0 + tol))
            && self.band_energies.iter().all(|row| {
                row.iter()
                    .zip(&self.band_budgets)
                    .all(|(e, b)| *e <= b * (1.0 + tol))
            })
    }
}

fn window_instance(
    prefix: &[C64],
    segment: &[C64],
    bands: &[FrequencyBand],
    block_count: usize,
) -> Result<QcqpInstance> {
    let n = prefix.len() + segment.len();
    let l = block_count as f64;
    let mut constraints = vec![Constraint {
        form: QuadForm::Circulant(CirculantForm::identity(n)),
        bound: 1.0 / l,
        label: "block energy".into(),
    }];
    for (k, b) in bands.iter().enumerate() {
        constraints.push(Constraint {
            form: QuadForm::Circulant(CirculantForm::for_band(b, n)?),
            bound: b.energy_budget() / l,
            label: format!("band {k} [{:.4}, {:.4}]", b.f_lo(), b.f_hi()),
        });
    }
    Ok(QcqpInstance {
        prefix: prefix.to_vec(),
        target: segment.to_vec(),
        constraints,
    })
}

fn block_solution(sol: QcqpSolution) -> BlockSolution {
    BlockSolution {
        window_energy: sol.constraint_values[0],
        band_energies: sol.constraint_values[1..].to_vec(),
        stats: SolveStats::from(&sol),
        samples: sol.x,
    }
}

/// First block: closest point to `segment` with `‖c‖² ≤ 1/L` and
/// `c† R^k c ≤ E_I^k / L` at order `segment.len()`.
pub fn solve_block_first(
    segment: &[C64],
    bands: &[FrequencyBand],
    block_count: usize,
    tolerances: &Tolerances,
) -> Result<BlockSolution> {
    solve_block_overlap(&[], segment, bands, block_count, tolerances)
}

/// Overlapped block: optimizes only `segment`, with constraints evaluated on
/// the concatenation `[prev_tail; segment]`.
pub fn solve_block_overlap(
    prev_tail: &[C64],
    segment: &[C64],
    bands: &[FrequencyBand],
    block_count: usize,
    tolerances: &Tolerances,
) -> Result<BlockSolution> {
    if block_count == 0 {
        return Err(Error::invalid("block count must be positive"));
    }
    let inst = window_instance(prev_tail, segment, bands, block_count)?;
    let sol = qcqp::solve(&inst, Backend::Fourier, &tolerances.settings())?;
    Ok(block_solution(sol))
}

/// Whole-sequence solve with `L` block-energy constraints and full-order
/// band constraints. Requires `N = L·N̄`.
pub fn solve_qcqp_full(problem: &DesignProblem) -> Result<DesignSolution> {
    let n = problem.len();
    let nb = problem.block_size;
    if !n.is_multiple_of(nb) {
        return Err(Error::invalid(format!(
            "full solve needs N = L·N̄, got N = {n}, N̄ = {nb}"
        )));
    }
    if n > problem.tolerances.dense_cap {
        return Err(Error::SizeLimit {
            n,
            cap: problem.tolerances.dense_cap,
        });
    }
    let l = problem.block_count();
    let mut constraints: Vec<Constraint> = (0..l)
        .map(|b| Constraint {
            form: QuadForm::Window(b * nb..(b + 1) * nb),
            bound: 1.0 / l as f64,
            label: format!("block {b} energy"),
        })
        .collect();
    for (k, b) in problem.bands.iter().enumerate() {
        constraints.push(Constraint {
            form: QuadForm::Circulant(CirculantForm::for_band(b, n)?),
            bound: b.energy_budget(),
            label: format!("band {k}"),
        });
    }
    let inst = QcqpInstance {
        prefix: vec![],
        target: problem.reference.samples().to_vec(),
        constraints,
    };
    let sol = qcqp::solve(&inst, Backend::Dense, &problem.tolerances.settings())?;
    let stats = SolveStats::from(&sol);
    Ok(DesignSolution {
        objective: sol.objective,
        block_energies: sol.constraint_values[..l].to_vec(),
        band_energies: vec![sol.constraint_values[l..].to_vec()],
        block_bound: 1.0 / l as f64,
        band_budgets: problem.bands.iter().map(|b| b.energy_budget()).collect(),
        kkt_residual: sol.kkt_residual,
        iterations: sol.newton_iterations,
        c: ComplexSequence::new(sol.x)?,
        solves: vec![stats],
    })
}

/// Sequential overlapped-block design.
///
/// Solves the first block of length `N̄`, then `L̃` blocks of `N̄ − W` new
/// samples each constrained jointly with the last `W` designed samples.
pub fn design_waveform(problem: &DesignProblem) -> Result<DesignSolution> {
    let n = problem.len();
    let nb = problem.block_size;
    let w = problem.overlap;
    let l = problem.block_count();
    let c0 = problem.reference.samples();
    let segments = partition(n, nb, w);

    let mut c: Vec<C64> = Vec::with_capacity(n);
    let mut block_energies = Vec::with_capacity(segments.len());
    let mut band_energies = Vec::with_capacity(segments.len());
    let mut solves = Vec::with_capacity(segments.len());
    let mut kkt: f64 = 0.0;
    let mut iterations = 0;
    for (idx, seg) in segments.into_iter().enumerate() {
        let tail_start = c.len().saturating_sub(w);
        let tail = if idx == 0 { &[][..] } else { &c[tail_start..] };
        let sol = solve_block_overlap(tail, &c0[seg], &problem.bands, l, &problem.tolerances)
            .map_err(|e| e.in_block(idx))?;
        kkt = kkt.max(sol.stats.kkt_residual);
        iterations += sol.stats.newton_iterations;
        block_energies.push(sol.window_energy);
        band_energies.push(sol.band_energies);
        solves.push(sol.stats);
        c.extend_from_slice(&sol.samples);
    }
    debug_assert_eq!(c.len(), n);
    let objective = c.iter().zip(c0).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok(DesignSolution {
        c: ComplexSequence::new(c)?,
        objective,
        block_energies,
        band_energies,
        block_bound: 1.0 / l as f64,
        band_budgets: problem
            .bands
            .iter()
            .map(|b| b.energy_budget() / l as f64)
            .collect(),
        kkt_residual: kkt,
        iterations,
        solves,
    })
}

/// Summary emitted next to a designed waveform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub length: usize,
    pub block_size: usize,
    pub overlap: usize,
    pub objective: f64,
    /// Worst-window margin per band, `10 log10(budget / energy)`.
    pub band_margins_db: Vec<f64>,
    /// Margin per band of the complete waveform against the unscaled budgets.
    pub waveform_margins_db: Vec<f64>,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub wall_time_s: f64,
}

/// Runs [`design_waveform`] and times it.
pub fn design_with_report(problem: &DesignProblem) -> Result<(DesignSolution, DesignReport)> {
    let start = Instant::now();
    let sol = design_waveform(problem)?;
    let wall = start.elapsed().as_secs_f64();
    let band_margins_db = (0..problem.bands.len())
        .map(|k| {
            sol.band_energies
                .iter()
                .map(|row| 10.0 * (sol.band_budgets[k] / row[k]).log10())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let waveform_margins_db = check_constraints(&sol.c, &problem.bands, 1.0)?
        .into_iter()
        .map(|r| r.margin_db)
        .collect();
    let report = DesignReport {
        length: problem.len(),
        block_size: problem.block_size,
        overlap: problem.overlap,
        objective: sol.objective,
        band_margins_db,
        waveform_margins_db,
        iterations: sol.iterations,
        kkt_residual: sol.kkt_residual,
        wall_time_s: wall,
    };
    Ok((sol, report))
}
