//! Brute-force oracles shared by the integration tests. Everything here works
//! on `u64` bit masks (coordinate `i` in bit `i`) and avoids the library's
//! elimination, enumeration and distance code.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_bigint::BigUint;
use rigidlab::commsim::CellReader;
use rigidlab::BitVector;

pub fn bits(v: &BitVector) -> u64 {
    v.to_u64()
}

/// Every element of `span(gens)`.
pub fn span(gens: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64];
    for &g in gens {
        if !out.contains(&g) {
            let extra: Vec<u64> = out.iter().map(|x| x ^ g).collect();
            out.extend(extra);
        }
    }
    out
}

pub fn distance(q: u64, elements: &[u64]) -> u32 {
    elements
        .iter()
        .map(|e| (q ^ e).count_ones())
        .min()
        .expect("span contains 0")
}

/// `RIG(Q, r)` by spanning every `r`-subset of nonzero vectors of F_2^n.
pub fn rig(queries: &[u64], n: usize, r: usize) -> u32 {
    let pool: Vec<u64> = (1..1u64 << n).collect();
    let mut seen = BTreeSet::new();
    let mut best = u32::MAX;
    let mut idx: Vec<usize> = (0..r).collect();
    if r > pool.len() {
        idx = (0..pool.len()).collect();
    }
    loop {
        let gens: Vec<u64> = idx.iter().map(|&i| pool[i]).collect();
        let mut elems = span(&gens);
        elems.sort_unstable();
        if seen.insert(elems.clone()) {
            let worst = queries.iter().map(|&q| distance(q, &elems)).max().unwrap_or(0);
            best = best.min(worst);
        }
        // next combination
        let k = idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < pool.len() - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
        if k == 0 {
            return best;
        }
    }
}

/// Rank by repeated pivot elimination on row masks.
pub fn rank(rows: &[u64]) -> usize {
    let mut rows = rows.to_vec();
    let mut rank = 0;
    for bit in 0..64 {
        let Some(p) = (rank..rows.len()).find(|&i| rows[i] >> bit & 1 == 1) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank];
        for (i, r) in rows.iter_mut().enumerate() {
            if i != rank && *r >> bit & 1 == 1 {
                *r ^= pivot;
            }
        }
        rank += 1;
    }
    rank
}

/// Rows of the matrix with code `code` (bit `i*root + j` is entry `(i, j)`).
pub fn matrix_rows(root: usize, code: u64) -> Vec<u64> {
    (0..root).map(|i| (code >> (i * root)) & ((1 << root) - 1)).collect()
}

/// Number of `root × root` matrices of rank `r`:
/// `Π_{i<r} (2^root - 2^i)^2 / (2^r - 2^i)`.
pub fn rank_count(root: usize, r: usize) -> BigUint {
    let two = |e: usize| BigUint::from(1u8) << e;
    let mut num = BigUint::from(1u8);
    let mut den = BigUint::from(1u8);
    for i in 0..r {
        let f = two(root) - two(i);
        num *= &f * &f;
        den *= two(r) - two(i);
    }
    num / den
}

/// `uᵀMv` with `M` given by row masks.
pub fn bilinear(rows: &[u64], u: u64, v: u64) -> bool {
    rows.iter()
        .enumerate()
        .filter(|(i, _)| u >> i & 1 == 1)
        .fold(false, |acc, (_, r)| acc ^ ((r & v).count_ones() & 1 == 1))
}

/// Full memory access that records probes.
pub struct Recorder<'a> {
    pub cells: &'a [u64],
    pub trace: Vec<usize>,
}

impl CellReader for Recorder<'_> {
    fn read(&mut self, cell: usize) -> Option<u64> {
        self.trace.push(cell);
        self.cells.get(cell).copied()
    }
}
