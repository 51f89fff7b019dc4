//! Cell sampling: find a small set of cells that still answers many queries.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::machine::{tabulate, CellProbeDs, QueryTable};
use super::GameParams;
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::rational::{self, Rational};

/// Conditions and conclusion of the sampling lemma for one run.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaCheck {
    pub beta: f64,
    /// `t ≤ min{n/(256β), √n/(256 log2(sβ/n))}`
    pub hypothesis_holds: bool,
    /// `⌈n/(128β)⌉`, when `β > 0`.
    pub lemma_size: Option<usize>,
    /// `advantage · 2^{-√n/16}`
    pub required_margin: f64,
    pub margin_met: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleResult {
    /// Sorted cell indices.
    pub cells: Vec<usize>,
    /// Correctly answered queries that probe only cells in `cells`, by pair index.
    pub q1: Vec<usize>,
    /// Wrongly answered queries that probe only cells in `cells`.
    pub q2: Vec<usize>,
    /// `(|q1| - |q2|) / 4^root`
    #[serde(with = "rational::serde_text")]
    pub margin: Rational,
    /// Per-matrix advantage of the machine.
    #[serde(with = "rational::serde_text")]
    pub advantage: Rational,
    pub trials: usize,
    pub lemma: LemmaCheck,
}

impl SampleResult {
    /// Whether pair index `idx` is in `Q1' ∪ Q2'`.
    pub fn covers(&self, idx: usize) -> bool {
        self.q1.binary_search(&idx).is_ok() || self.q2.binary_search(&idx).is_ok()
    }
}

pub(crate) fn probe_masks(table: &QueryTable) -> Vec<u128> {
    table
        .outcomes
        .iter()
        .map(|o| o.trace.iter().fold(0u128, |acc, &c| acc | (1u128 << c)))
        .collect()
}

pub(crate) fn cell_mask(cells: &[usize]) -> u128 {
    cells.iter().fold(0u128, |acc, &c| acc | (1u128 << c))
}

fn split(table: &QueryTable, masks: &[u128], s_mask: u128) -> (Vec<usize>, Vec<usize>) {
    let mut q1 = Vec::new();
    let mut q2 = Vec::new();
    for (idx, (o, &mask)) in table.outcomes.iter().zip(masks).enumerate() {
        if mask & !s_mask == 0 {
            if o.correct() {
                q1.push(idx);
            } else {
                q2.push(idx);
            }
        }
    }
    (q1, q2)
}

/// Sampling-lemma bookkeeping for `ds` with the given advantage.
pub fn lemma_check<D: CellProbeDs + ?Sized>(ds: &D, advantage: &Rational, margin: &Rational) -> LemmaCheck {
    let root = ds.root();
    let n = (root * root) as f64;
    let beta = GameParams::new(root, 1, ds.cells(), ds.word_bits()).alpha;
    let t = ds.max_probes() as f64;
    let log_term = (ds.cells() as f64 * beta / n).log2();
    let hypothesis_holds =
        beta > 0.0 && log_term > 0.0 && t <= (n / (256.0 * beta)).min(root as f64 / (256.0 * log_term));
    let lemma_size = (beta > 0.0).then(|| (n / (128.0 * beta)).ceil() as usize);
    let required_margin = rational::to_f64(advantage) * (-(root as f64) / 16.0).exp2();
    LemmaCheck {
        beta,
        hypothesis_holds,
        lemma_size,
        required_margin,
        margin_met: rational::to_f64(margin) >= required_margin,
    }
}

/// Tries `trials` uniform `size`-subsets of cells (seeded) and keeps the first
/// one with the largest margin.
pub fn cell_sample<D: CellProbeDs + ?Sized>(
    ds: &D,
    m: &BitMatrix,
    size: usize,
    trials: usize,
    seed: u64,
) -> Result<SampleResult> {
    let s = ds.cells();
    if size > s {
        return Err(Error::InvalidArgument(format!("sample size {size} exceeds {s} cells")));
    }
    if s > 128 {
        return Err(Error::InvalidArgument(format!(
            "{s} cells exceed the 128 supported by sampling"
        )));
    }
    let table = tabulate(ds, m)?;
    let masks = probe_masks(&table);
    let total = table.len() as i64;
    let trials = if size == 0 || size == s { 1 } else { trials.max(1) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // (score, cells, q1, q2)
    type Candidate = (i64, Vec<usize>, Vec<usize>, Vec<usize>);
    let mut best: Option<Candidate> = None;
    for _ in 0..trials {
        let mut cells = rand::seq::index::sample(&mut rng, s, size).into_vec();
        cells.sort_unstable();
        let (q1, q2) = split(&table, &masks, cell_mask(&cells));
        let score = q1.len() as i64 - q2.len() as i64;
        if best.as_ref().is_none_or(|b| score > b.0) {
            best = Some((score, cells, q1, q2));
        }
    }
    let (score, cells, q1, q2) = best.expect("at least one trial");
    let margin = rational::ratio(score, total);
    let advantage = table.advantage();
    let lemma = lemma_check(ds, &advantage, &margin);
    Ok(SampleResult {
        cells,
        q1,
        q2,
        margin,
        advantage,
        trials,
        lemma,
    })
}

/// Recomputes `Q1'`, `Q2'` for a fixed cell set.
pub fn sample_for_cells<D: CellProbeDs + ?Sized>(ds: &D, m: &BitMatrix, cells: &[usize]) -> Result<SampleResult> {
    let s = ds.cells();
    if s > 128 {
        return Err(Error::InvalidArgument(format!(
            "{s} cells exceed the 128 supported by sampling"
        )));
    }
    let mut cells = cells.to_vec();
    cells.sort_unstable();
    cells.dedup();
    if let Some(&bad) = cells.iter().find(|&&c| c >= s) {
        return Err(Error::InvalidArgument(format!("cell {bad} out of range for {s} cells")));
    }
    let table = tabulate(ds, m)?;
    let (q1, q2) = split(&table, &probe_masks(&table), cell_mask(&cells));
    let margin = rational::ratio(q1.len() as i64 - q2.len() as i64, table.len() as i64);
    let advantage = table.advantage();
    let lemma = lemma_check(ds, &advantage, &margin);
    Ok(SampleResult {
        cells,
        q1,
        q2,
        margin,
        advantage,
        trials: 0,
        lemma,
    })
}
