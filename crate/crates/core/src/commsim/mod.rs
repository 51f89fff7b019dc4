//! Cell-probe machines for `uᵀMv`, cell sampling, the one-way protocol that
//! simulates them, and the discrepancy machinery behind the direct sum.
//!
//! Query pairs are indexed by `(u << root) | v` with `u`, `v` as integers
//! (coordinate 1 in bit 0).

mod discrepancy;
mod machine;
mod protocol;
mod sampling;

pub use discrepancy::{
    all_tuples, bias, bias_enumerated, bias_from_rank, count_low_rank, direct_sum_success, discrepancy_within_bounds,
    matrix_code, moment, moment_bound, moment_bound_check, rank_histogram, rank_u64, rectangle_discrepancy, BiasLedger,
    DirectSum, MomentCheck, PairTuple,
};
pub use machine::{
    all_matrices, execute, machine_by_name, majority_flip, pair_from_index, pair_index, tabulate, CellProbeDs,
    CellReader, ConstantAnswer, MajorityFlip, Negated, Outcome, PartialMemory, PartialRowStore, QueryTable, RowStore,
    TracedMemory, VerbatimParity,
};
pub use protocol::{
    alice, binomial, bob, check_sample, closed_form_success, message_bits, run_protocol, subset_rank, subset_unrank,
    ProtocolMessage,
};
pub use sampling::{cell_sample, lemma_check, sample_for_cells, LemmaCheck, SampleResult};

use serde::Serialize;

/// Parameters of the communication game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GameParams {
    pub root: usize,
    pub k: usize,
    /// `2(w + log2(s·w/n))` with `n = root²`.
    pub alpha: f64,
}

impl GameParams {
    pub fn new(root: usize, k: usize, s: usize, w: usize) -> Self {
        let n = (root * root) as f64;
        let alpha = 2.0 * (w as f64 + ((s * w) as f64 / n).log2());
        GameParams { root, k, alpha }
    }

    /// `k ≤ root`, where the moment bound is claimed.
    pub fn moment_regime(&self) -> bool {
        self.k <= self.root
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_uses_real_log() {
        let p = GameParams::new(3, 2, 9, 1);
        assert!((p.alpha - 2.0).abs() < 1e-12);
        let p = GameParams::new(4, 5, 32, 2);
        assert!((p.alpha - 2.0 * (2.0 + 2.0)).abs() < 1e-12);
        assert!(!p.moment_regime());
    }
}
