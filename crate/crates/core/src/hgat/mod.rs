//! Per-song heterogeneous graphs, edge-featured graph attention and
//! next-line pre-training.

mod graph;
mod params;
mod pretrain;
mod propagate;

pub use graph::{build_graph, random_graph, top_chords, Edge, GraphInputs, HeteroGraph, TOP_CHORD_COUNT};
pub use params::{GatConfig, GatParams, ParamVars, Step};
pub use pretrain::{
    mean_next_line_loss, next_line_gradients, next_line_loss, next_line_loss_on_tape, next_line_pairs,
    pretrain_next_line, LinePair, PretrainConfig, PretrainReport,
};
pub use propagate::{
    attend_on_tape, forward, gat_attend, positional_encoding, propagate, AttentionWeights, ForwardPass, Propagated,
    StepEdge, StepTrace,
};

use crate::Result;

/// Read-only handle on trained parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenGat {
    params: GatParams,
}

impl FrozenGat {
    pub fn params(&self) -> &GatParams {
        &self.params
    }

    pub fn propagate(&self, graph: &HeteroGraph) -> Result<Propagated> {
        propagate(graph, &self.params)
    }

    pub fn fingerprint(&self) -> u64 {
        self.params.fingerprint()
    }

    /// Gives the parameters back for joint training.
    pub fn unfreeze(self) -> GatParams {
        self.params
    }
}

pub fn freeze(params: GatParams) -> FrozenGat {
    FrozenGat { params }
}

#[cfg(test)]
mod tests;
