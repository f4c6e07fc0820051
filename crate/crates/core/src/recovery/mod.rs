//! Recovery of the full frequency/slow-time data from a masked matrix.
//!
//! Images here live in operator coordinates, `S = Θx I Θy†`; outputs are
//! wrapped as centred [`IsarImage`](crate::imaging::IsarImage)s.

mod operator;
mod rm;
mod sl0;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use operator::{displacement, UndercompleteOperator};
pub use rm::{
    rm_objective, rm_recover, rm_surrogate, shannon_rank, svd_soft_threshold, Lambda, RmInit, RmOutput,
    RmParams,
};
pub use sl0::{sl0_recover, Sl0Output, Sl0Params};

use crate::error::Result;
use crate::scene::DataMatrix;

/// One line of a convergence trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub objective: f64,
    pub shannon_rank: f64,
    /// `‖S − Θx I Θy†‖_F`.
    pub residual: f64,
}

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], mut w: W) -> Result<()> {
    writeln!(w, "iteration,objective,shannon_rank,residual")?;
    for r in rows {
        writeln!(
            w,
            "{},{:.12e},{:.9},{:.12e}",
            r.iteration, r.objective, r.shannon_rank, r.residual
        )?;
    }
    Ok(())
}

/// Operators matching the mask of `data`.
pub fn operators_for(data: &DataMatrix) -> Result<(UndercompleteOperator, UndercompleteOperator)> {
    Ok((
        UndercompleteOperator::new(data.rows(), &data.mask().missing_pulse_rows)?,
        UndercompleteOperator::new(data.cols(), &data.mask().missing_frequency_bins)?,
    ))
}
