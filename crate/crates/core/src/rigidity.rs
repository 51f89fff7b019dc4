//! Exact rigidity of query sets and the constructive steps around it:
//! folding a set into `2r` dimensions, far points from a family of sets, and
//! the rank-one far point for the vector-matrix-vector query set.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::gf2::{exact_sqrt, gaussian_binomial, pivot_blocks, BitMatrix, BitVector, Subspace};
use crate::querysets::QuerySet;
use crate::rational::{self, Rational};

/// Outcome of an exact rigidity scan.
#[derive(Debug, Clone)]
pub struct RigidityReport {
    pub r: usize,
    /// `RIG(Q, r)`: min over `dim U <= r` of `max_q d_H(q, U)`.
    pub value: usize,
    /// First minimizing subspace in canonical order.
    pub witness: Subspace,
    /// First query attaining `value` against `witness`.
    pub argmax_query: BitVector,
    pub subspaces_scanned: u128,
}

/// Finds the first subspace (canonical order) minimizing `score`.
///
/// `score(U, limit)` must return the exact score when it is `<= limit` and may
/// return `None` as soon as it knows the score exceeds `limit`. Blocks of
/// equal pivot sets run in parallel; a shared bound only prunes strictly worse
/// candidates, so the winner does not depend on scheduling.
fn scan_min<F>(n: usize, r: usize, caps: &Caps, score: F) -> Result<(u64, Subspace, u128)>
where
    F: Fn(&Subspace, u64) -> Option<u64> + Sync,
{
    let blocks = pivot_blocks(n, r, caps)?;
    let total = gaussian_binomial(n, r);
    let global = AtomicU64::new(u64::MAX);
    let per_block: Vec<Option<(u64, u64)>> = blocks
        .par_iter()
        .map(|block| {
            let mut best: Option<(u64, u64)> = None;
            for counter in 0..block.len() as u64 {
                let local_limit = match best {
                    Some((0, _)) => break,
                    Some((s, _)) => s - 1,
                    None => u64::MAX,
                };
                let limit = local_limit.min(global.load(Ordering::Relaxed));
                if let Some(s) = score(&block.subspace(counter), limit) {
                    if best.is_none_or(|(b, _)| s < b) {
                        best = Some((s, counter));
                        global.fetch_min(s, Ordering::Relaxed);
                    }
                }
            }
            best
        })
        .collect();
    let (score_value, block_idx, counter) = per_block
        .iter()
        .enumerate()
        .filter_map(|(i, b)| b.map(|(s, c)| (s, i, c)))
        .min_by_key(|&(s, i, _)| (s, i))
        .ok_or_else(|| Error::Invariant("subspace scan produced no candidate".into()))?;
    Ok((score_value, blocks[block_idx].subspace(counter), total))
}

fn max_distance_within(q: &QuerySet, u: &Subspace, limit: u64) -> Option<u64> {
    let mut worst = 0u64;
    for v in q {
        let d = u.distance_unchecked(v) as u64;
        if d > limit {
            return None;
        }
        worst = worst.max(d);
    }
    Some(worst)
}

fn check_scan_args(q: &QuerySet, r: usize, caps: &Caps) -> Result<()> {
    if r > q.n() {
        return Err(Error::InvalidArgument(format!(
            "r = {r} exceeds the ambient dimension {}",
            q.n()
        )));
    }
    caps.check_coset(r)
}

/// Exact `RIG(Q, r)`. Only dimension exactly `r` is scanned: enlarging a
/// subspace never increases a distance, so this equals the minimum over
/// `dim <= r`.
pub fn rigidity_value(q: &QuerySet, r: usize, caps: &Caps) -> Result<RigidityReport> {
    check_scan_args(q, r, caps)?;
    let (value, witness, scanned) = scan_min(q.n(), r, caps, |u, limit| max_distance_within(q, u, limit))?;
    let argmax_query = q
        .iter()
        .find(|v| witness.distance_unchecked(v) as u64 == value)
        .cloned()
        .expect("max is attained");
    Ok(RigidityReport {
        r,
        value: value as usize,
        witness,
        argmax_query,
        subspaces_scanned: scanned,
    })
}

/// `RIG(Q, r)` scanning every dimension `0..=r`, lowest dimension first.
pub fn rigidity_value_at_most(q: &QuerySet, r: usize, caps: &Caps) -> Result<RigidityReport> {
    let mut best: Option<RigidityReport> = None;
    let mut scanned = 0;
    for d in 0..=r {
        let rep = rigidity_value(q, d, caps)?;
        scanned += rep.subspaces_scanned;
        if best.as_ref().is_none_or(|b| rep.value < b.value) {
            best = Some(rep);
        }
    }
    let mut best = best.expect("at least dimension 0");
    best.r = r;
    best.subspaces_scanned = scanned;
    Ok(best)
}

/// Whether `Q` is `(r, t)`-rigid, reading real parameters as `(⌊r⌋, ⌈t⌉)`.
pub fn is_rigid(q: &QuerySet, r: f64, t: f64, caps: &Caps) -> Result<bool> {
    if !(r.is_finite() && t.is_finite()) || r < 0.0 {
        return Err(Error::InvalidArgument(format!("bad rigidity parameters ({r}, {t})")));
    }
    let t = t.ceil();
    if t <= 0.0 {
        return Ok(true);
    }
    let r = (r.floor() as usize).min(q.n());
    Ok(rigidity_value(q, r, caps)?.value as f64 >= t)
}

/// Folds `S ⊆ F_2^n` into `S' ⊆ F_2^{2r}`: the `⌊n/2r⌋` consecutive blocks of
/// length `2r` of every element, plus the zero-padded tail block when `2r`
/// does not divide `n`. First occurrences are kept.
pub fn fold_set(s: &QuerySet, r: usize) -> Result<QuerySet> {
    let n = s.n();
    let width = 2 * r;
    if r == 0 || width > n {
        return Err(Error::InvalidArgument(format!(
            "folding needs 1 <= 2r <= n, got r = {r}, n = {n}"
        )));
    }
    let k = n / width;
    let mut blocks = Vec::with_capacity(s.len() * n.div_ceil(width));
    for i in 0..k {
        blocks.extend(s.iter().map(|v| v.slice(i * width, (i + 1) * width)));
    }
    if !n.is_multiple_of(width) {
        blocks.extend(s.iter().map(|v| v.slice(k * width, n).resized(width)));
    }
    let folded = QuerySet::dedup(width, blocks)?;
    Ok(match s.name() {
        Some(name) => folded.with_name(format!("fold({name}, {r})")),
        None => folded,
    })
}

/// Result of [`find_far_point`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarPoint {
    pub point: BitVector,
    /// `min_i d_H(point, V_i)`, the largest achievable.
    pub min_distance: usize,
    /// Whether `|V_i| <= 2^{ℓ/2}` for all `i` and `k < 2^{ℓ/4}`.
    pub hypotheses_hold: bool,
    /// `⌈ℓ/16⌉`, guaranteed when the hypotheses hold.
    pub guaranteed: usize,
}

/// Exhaustive maximizer of `min_i d_H(v, V_i)` over `v ∈ F_2^ℓ`, ties to the
/// numerically smallest `v`.
///
/// Distances to each set come from one breadth-first sweep of the hypercube
/// seeded with the set's elements, so the cost is `O(k · ℓ · 2^ℓ)` regardless
/// of set sizes.
pub fn find_far_point(subsets: &[Vec<BitVector>], ell: usize, caps: &Caps) -> Result<FarPoint> {
    if ell == 0 {
        return Err(Error::InvalidArgument("far point needs ℓ >= 1".into()));
    }
    if subsets.is_empty() || subsets.iter().any(Vec::is_empty) {
        return Err(Error::InvalidArgument("far point needs nonempty sets".into()));
    }
    caps.check_input_space(ell)?;
    let size = 1usize << ell;
    let mut best = vec![u8::MAX; size];
    let mut dist = vec![u8::MAX; size];
    let mut queue = VecDeque::with_capacity(size);
    for set in subsets {
        dist.fill(u8::MAX);
        queue.clear();
        for v in set {
            v.check_len(ell)?;
            let x = v.to_u64() as usize;
            if dist[x] != 0 {
                dist[x] = 0;
                queue.push_back(x);
            }
        }
        while let Some(x) = queue.pop_front() {
            let next = dist[x] + 1;
            for b in 0..ell {
                let y = x ^ (1 << b);
                if dist[y] == u8::MAX {
                    dist[y] = next;
                    queue.push_back(y);
                }
            }
        }
        for (b, d) in best.iter_mut().zip(&dist) {
            *b = (*b).min(*d);
        }
    }
    // max_by_key returns the last maximum; scan manually for the first
    let (mut arg, mut val) = (0usize, best[0]);
    for (x, &d) in best.iter().enumerate().skip(1) {
        if d > val {
            arg = x;
            val = d;
        }
    }
    let hypotheses_hold = subsets
        .iter()
        .all(|s| (s.len() as u128).saturating_pow(2) <= 1u128 << ell)
        && (subsets.len() as u128).saturating_pow(4) < 1u128 << ell;
    let guaranteed = ell.div_ceil(16);
    if hypotheses_hold && (val as usize) < guaranteed {
        return Err(Error::Invariant(format!(
            "far point at distance {val} < ⌈ℓ/16⌉ = {guaranteed} although the counting hypotheses hold"
        )));
    }
    Ok(FarPoint {
        point: BitVector::from_u64(ell, arg as u64),
        min_distance: val as usize,
        hypotheses_hold,
        guaranteed,
    })
}

/// Output of [`find_far_rank_one`].
#[derive(Debug, Clone)]
pub struct FarRankOne {
    pub a: BitVector,
    pub b: BitVector,
    /// `d_H(vec(a bᵀ), V)`, computed exactly.
    pub certified: usize,
    /// `⌈(Σ_i d_H(v', V_{S_i})) · √n / (2r')⌉`.
    pub lower_bound: usize,
    pub r_prime: usize,
    /// Number of blocks `k`.
    pub blocks: usize,
    pub block_len: usize,
    pub block_point: BitVector,
    pub block_distances: Vec<usize>,
    /// The tiled vector `v` whose matrix has rank at most `2r'/√n`.
    pub tiled: BitVector,
    /// Every rank-one component `(a_i, b_i, d_H(vec(a_i b_iᵀ), V))`.
    pub components: Vec<(BitVector, BitVector, usize)>,
}

/// Builds a rank-one matrix far from `v_space ⊆ F_2^n` (`n` a perfect square):
/// project onto blocks of length `2r'`, take a point far from every
/// projection, tile it, factor `mat` of the tiled vector into rank-one terms
/// and keep the term farthest from `v_space`.
///
/// `r'` is the smallest multiple of `√n` that is at least `max(dim, 1)`. When
/// `2r' > n` a single block covering all coordinates is used.
pub fn find_far_rank_one(v_space: &Subspace, caps: &Caps) -> Result<FarRankOne> {
    let n = v_space.ambient_dim();
    let root = exact_sqrt(n)
        .filter(|&r| r >= 2)
        .ok_or_else(|| Error::InvalidArgument(format!("n = {n} must be a perfect square >= 4")))?;
    caps.check_coset(v_space.dim())?;
    let r_prime = v_space.dim().max(1).div_ceil(root) * root;
    let block_len = (2 * r_prime).min(n);
    let blocks = (n / (2 * r_prime)).max(1);
    caps.check_input_space(block_len)?;

    let projections: Vec<Subspace> = (0..blocks)
        .map(|i| v_space.project(i * block_len, (i + 1) * block_len))
        .collect();
    let sets = projections
        .iter()
        .map(|p| p.elements(caps))
        .collect::<Result<Vec<_>>>()?;
    let far = find_far_point(&sets, block_len, caps)?;
    let block_distances: Vec<usize> = projections.iter().map(|p| p.distance_unchecked(&far.point)).collect();

    let tiled = BitVector::from_bools((0..n).map(|i| i < blocks * block_len && far.point.get(i % block_len)));
    let (a_mat, b_mat) = BitMatrix::from_vec(&tiled)?.rank_factorize();
    let components: Vec<(BitVector, BitVector, usize)> = (0..a_mat.ncols())
        .map(|i| {
            let a = a_mat.column(i);
            let b = b_mat.row(i).clone();
            let d = v_space.distance_unchecked(&BitMatrix::outer(&a, &b).to_vec());
            (a, b, d)
        })
        .collect();
    let (a, b, certified) = components
        .iter()
        .fold(None::<&(BitVector, BitVector, usize)>, |acc, c| match acc {
            Some(best) if best.2 >= c.2 => Some(best),
            _ => Some(c),
        })
        .cloned()
        .unwrap_or_else(|| (BitVector::zeros(root), BitVector::zeros(root), 0));

    let total: usize = block_distances.iter().sum();
    let lower_bound = (total * root).div_ceil(2 * r_prime);
    if certified < lower_bound {
        return Err(Error::Invariant(format!(
            "rank-one component at distance {certified} below the guaranteed {lower_bound}"
        )));
    }
    Ok(FarRankOne {
        a,
        b,
        certified,
        lower_bound,
        r_prime,
        blocks,
        block_len,
        block_point: far.point,
        block_distances,
        tiled,
        components,
    })
}

/// `(1/m) Σ_q d_H(q, U)` as an exact rational.
pub fn average_distance(q: &QuerySet, u: &Subspace, caps: &Caps) -> Result<Rational> {
    let mut total = 0i64;
    for v in q {
        total += u.distance(v, caps)? as i64;
    }
    Ok(rational::ratio(total, q.len() as i64))
}

#[derive(Debug, Clone, Serialize)]
pub struct StrongRigidity {
    #[serde(with = "crate::rational::serde_text")]
    pub value: Rational,
    #[serde(skip)]
    pub witness: Subspace,
    pub subspaces_scanned: u128,
}

/// Minimum over `dim <= r` subspaces of the average distance of `Q`.
pub fn strong_rigidity_value(q: &QuerySet, r: usize, caps: &Caps) -> Result<StrongRigidity> {
    check_scan_args(q, r, caps)?;
    let (total, witness, scanned) = scan_min(q.n(), r, caps, |u, limit| {
        let mut sum = 0u64;
        for v in q {
            sum += u.distance_unchecked(v) as u64;
            if sum > limit {
                return None;
            }
        }
        Some(sum)
    })?;
    Ok(StrongRigidity {
        value: rational::ratio(total as i64, q.len() as i64),
        witness,
        subspaces_scanned: scanned,
    })
}
