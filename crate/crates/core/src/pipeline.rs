//! Preprocess, normalize, solve locally and map back.

use crate::algo::{solve_local_detailed, LocalRun, Params};
use crate::error::{Error, Result};
use crate::instance::{preprocess_degenerate, utility, DegeneracyReport, Instance, Solution};
use crate::transform::{normalize, BackMap, Normalized};

#[derive(Clone, Debug)]
pub struct PipelineRun {
    /// Solution of the input instance.
    pub x: Solution,
    pub utility: f64,
    pub degeneracy: DegeneracyReport,
    pub normalized: Normalized,
    /// Back-map from the normalized instance to the input, including the
    /// preprocessing embedding.
    pub backmap: BackMap,
    pub local: LocalRun,
}

/// Refuses instances with unbounded agents.
pub fn prepare(inst: &Instance) -> Result<(Normalized, BackMap, DegeneracyReport)> {
    inst.ensure_valid()?;
    let (reduced, report) = preprocess_degenerate(inst);
    if !report.unbounded_agents.is_empty() {
        return Err(Error::Unbounded {
            agents: report.unbounded_agents.clone(),
        });
    }
    let normalized = normalize(&reduced)?;
    let backmap = normalized
        .backmap
        .clone()
        .with_embedding(report.original_agents, report.kept_agents.clone());
    Ok((normalized, backmap, report))
}

pub fn solve_instance(inst: &Instance, params: &Params) -> Result<PipelineRun> {
    let (normalized, backmap, degeneracy) = prepare(inst)?;
    let local = solve_local_detailed(&normalized.instance, params)?;
    let x = backmap.apply(&local.x)?;
    let utility = utility(inst, &x)?;
    Ok(PipelineRun {
        x,
        utility,
        degeneracy,
        normalized,
        backmap,
        local,
    })
}
