//! One-way protocol: Alice sends a majority bit plus a sampled set of cells,
//! Bob simulates the query algorithm on what he received.

use std::collections::BTreeMap;

use serde::Serialize;

use super::machine::{pair_from_index, tabulate, CellProbeDs, PartialMemory};
use super::sampling::SampleResult;
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::rational::{self, Rational};

/// `C(n, k)`, or `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Bits needed to index `count` alternatives.
fn index_bits(count: u128) -> u32 {
    128 - count.saturating_sub(1).leading_zeros()
}

/// Colex rank of a sorted subset: `Σ C(c_i, i+1)`.
pub fn subset_rank(cells: &[usize]) -> Result<u128> {
    let mut rank: u128 = 0;
    for (i, &c) in cells.iter().enumerate() {
        if i > 0 && cells[i - 1] >= c {
            return Err(Error::InvalidArgument("subset must be strictly increasing".into()));
        }
        let term = binomial(c as u64, i as u64 + 1)
            .ok_or_else(|| Error::InvalidArgument("subset too large to rank".into()))?;
        rank += term;
    }
    Ok(rank)
}

/// Inverse of [`subset_rank`] for subsets of size `size`.
pub fn subset_unrank(mut rank: u128, size: usize) -> Result<Vec<usize>> {
    let mut cells = vec![0usize; size];
    for i in (1..=size).rev() {
        let mut c = i - 1;
        while binomial(c as u64 + 1, i as u64).ok_or_else(|| Error::InvalidArgument("rank too large".into()))? <= rank {
            c += 1;
        }
        rank -= binomial(c as u64, i as u64).expect("checked above");
        cells[i - 1] = c;
    }
    Ok(cells)
}

/// Exact message length `1 + size·w + ⌈log2 C(s,size)⌉` and the bound
/// `1 + size·w + size·log2(e·s/size)`.
pub fn message_bits(s: usize, w: usize, size: usize) -> Result<(u64, f64)> {
    if size > s {
        return Err(Error::InvalidArgument(format!("sample size {size} exceeds {s} cells")));
    }
    let count =
        binomial(s as u64, size as u64).ok_or_else(|| Error::InvalidArgument(format!("C({s},{size}) overflows")))?;
    let exact = 1 + (size * w) as u64 + u64::from(index_bits(count));
    let bound = if size == 0 {
        1.0
    } else {
        1.0 + (size * w) as f64 + size as f64 * (std::f64::consts::E * s as f64 / size as f64).log2()
    };
    Ok((exact, bound))
}

/// Alice's message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProtocolMessage {
    pub b: bool,
    pub cells: Vec<usize>,
    /// Colex rank of `cells`.
    pub location_code: u128,
    pub contents: Vec<u64>,
    pub total_bits: u64,
}

impl ProtocolMessage {
    /// Serialized form: `b`, then the location code in `⌈log2 C(s,|S|)⌉`
    /// bits, then each cell in `w` bits, all least significant bit first.
    pub fn to_bits(&self, s: usize, w: usize) -> Result<BitVector> {
        let count = binomial(s as u64, self.cells.len() as u64)
            .ok_or_else(|| Error::InvalidArgument("subset count overflows".into()))?;
        let loc_bits = index_bits(count) as usize;
        let mut bits = vec![self.b];
        bits.extend((0..loc_bits).map(|i| (self.location_code >> i) & 1 == 1));
        for &c in &self.contents {
            bits.extend((0..w).map(|i| (c >> i) & 1 == 1));
        }
        Ok(BitVector::from_bools(bits))
    }

    pub fn from_bits(bits: &BitVector, s: usize, w: usize, size: usize) -> Result<Self> {
        let count =
            binomial(s as u64, size as u64).ok_or_else(|| Error::InvalidArgument("subset count overflows".into()))?;
        let loc_bits = index_bits(count) as usize;
        let expected = 1 + loc_bits + size * w;
        if bits.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: bits.len(),
            });
        }
        let field =
            |start: usize, len: usize| (0..len).fold(0u128, |acc, i| acc | (u128::from(bits.get(start + i)) << i));
        let location_code = field(1, loc_bits);
        let cells = subset_unrank(location_code, size)?;
        let contents = (0..size).map(|j| field(1 + loc_bits + j * w, w) as u64).collect();
        Ok(ProtocolMessage {
            b: bits.get(0),
            cells,
            location_code,
            contents,
            total_bits: expected as u64,
        })
    }
}

/// Alice: majority of `uᵀMv` over queries outside `Q'` (ties to 0), plus
/// the sampled cells and their contents.
pub fn alice<D: CellProbeDs + ?Sized>(ds: &D, m: &BitMatrix, sample: &SampleResult) -> Result<ProtocolMessage> {
    let table = tabulate(ds, m)?;
    let (mut ones, mut zeros) = (0usize, 0usize);
    for (idx, o) in table.outcomes.iter().enumerate() {
        if !sample.covers(idx) {
            if o.truth {
                ones += 1;
            } else {
                zeros += 1;
            }
        }
    }
    let memory = ds.build(m);
    let contents = sample.cells.iter().map(|&c| memory[c]).collect();
    let (total_bits, _) = message_bits(ds.cells(), ds.word_bits(), sample.cells.len())?;
    Ok(ProtocolMessage {
        b: ones > zeros,
        location_code: subset_rank(&sample.cells)?,
        cells: sample.cells.clone(),
        contents,
        total_bits,
    })
}

/// Bob: run the query algorithm on the received cells; fall back to `b` when
/// it needs a cell outside them.
pub fn bob<D: CellProbeDs + ?Sized>(ds: &D, msg: &ProtocolMessage, u: &BitVector, v: &BitVector) -> bool {
    let contents: BTreeMap<usize, u64> = msg.cells.iter().copied().zip(msg.contents.iter().copied()).collect();
    ds.query(u, v, &mut PartialMemory { contents: &contents })
        .unwrap_or(msg.b)
}

/// Runs the protocol over the wire format and returns Alice's message with
/// Bob's exact success probability over uniform `(u, v)`.
pub fn run_protocol<D: CellProbeDs + ?Sized>(
    ds: &D,
    m: &BitMatrix,
    sample: &SampleResult,
) -> Result<(ProtocolMessage, Rational)> {
    check_sample(ds, m, sample)?;
    let msg = alice(ds, m, sample)?;
    let wire = msg.to_bits(ds.cells(), ds.word_bits())?;
    if wire.len() as u64 != msg.total_bits {
        return Err(Error::Invariant(format!(
            "message has {} bits, expected {}",
            wire.len(),
            msg.total_bits
        )));
    }
    let received = ProtocolMessage::from_bits(&wire, ds.cells(), ds.word_bits(), sample.cells.len())?;
    let root = ds.root();
    let total = 1usize << (2 * root);
    let contents: BTreeMap<usize, u64> = received
        .cells
        .iter()
        .copied()
        .zip(received.contents.iter().copied())
        .collect();
    let mut correct = 0i64;
    for idx in 0..total {
        let (u, v) = pair_from_index(root, idx);
        let answer = ds
            .query(&u, &v, &mut PartialMemory { contents: &contents })
            .unwrap_or(received.b);
        if answer == m.bilinear(&u, &v) {
            correct += 1;
        }
    }
    Ok((msg, rational::ratio(correct, total as i64)))
}

/// `Pr[q ∈ Q' ∧ correct] + max(Pr[q ∉ Q' ∧ uᵀMv = 0], Pr[q ∉ Q' ∧ uᵀMv = 1])`.
pub fn closed_form_success<D: CellProbeDs + ?Sized>(ds: &D, m: &BitMatrix, sample: &SampleResult) -> Result<Rational> {
    let table = tabulate(ds, m)?;
    let (mut ones, mut zeros) = (0i64, 0i64);
    for (idx, o) in table.outcomes.iter().enumerate() {
        if !sample.covers(idx) {
            if o.truth {
                ones += 1;
            } else {
                zeros += 1;
            }
        }
    }
    Ok(rational::ratio(
        sample.q1.len() as i64 + ones.max(zeros),
        table.len() as i64,
    ))
}

/// Confirms that `Q1'`, `Q2'` are exactly the queries whose traces stay in
/// the sampled cells, split by correctness.
pub fn check_sample<D: CellProbeDs + ?Sized>(ds: &D, m: &BitMatrix, sample: &SampleResult) -> Result<()> {
    let table = tabulate(ds, m)?;
    if sample.cells.iter().any(|&c| c >= ds.cells()) || sample.cells.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invariant(
            "sample cells must be sorted, distinct and in range".into(),
        ));
    }
    for (idx, o) in table.outcomes.iter().enumerate() {
        let inside = o.trace.iter().all(|c| sample.cells.binary_search(c).is_ok());
        let in_q1 = sample.q1.binary_search(&idx).is_ok();
        let in_q2 = sample.q2.binary_search(&idx).is_ok();
        let expected = (inside && o.correct(), inside && !o.correct());
        if (in_q1, in_q2) != expected {
            return Err(Error::Invariant(format!("query {idx} misclassified by the sample")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::machine::RowStore;
    use super::super::sampling::{cell_sample, sample_for_cells};
    use super::*;

    #[test]
    fn binomial_and_ranks() {
        assert_eq!(binomial(8, 2), Some(28));
        assert_eq!(binomial(5, 0), Some(1));
        assert_eq!(binomial(3, 4), Some(0));
        let mut seen = Vec::new();
        for a in 0..6 {
            for b in a + 1..6 {
                for c in b + 1..6 {
                    let r = subset_rank(&[a, b, c]).unwrap();
                    assert_eq!(subset_unrank(r, 3).unwrap(), vec![a, b, c]);
                    seen.push(r);
                }
            }
        }
        seen.sort_unstable();
        assert_eq!(seen, (0..20).collect::<Vec<u128>>());
    }

    #[test]
    fn message_bit_examples() {
        assert_eq!(message_bits(8, 3, 0).unwrap(), (1, 1.0));
        let (exact, bound) = message_bits(8, 3, 2).unwrap();
        assert_eq!(exact, 12);
        assert!((bound - 13.885).abs() < 1e-3);
        assert_eq!(message_bits(8, 3, 8).unwrap().0, 25);
    }

    #[test]
    fn identity_single_row() {
        let ds = RowStore { root: 2 };
        let m = BitMatrix::identity(2);
        let sample = sample_for_cells(&ds, &m, &[1]).unwrap();
        let (msg, success) = run_protocol(&ds, &m, &sample).unwrap();
        assert_eq!(success, closed_form_success(&ds, &m, &sample).unwrap());
        // Q' = u ∈ {00, 01}: 8 queries, all correct; the other 8 have 4 ones
        assert_eq!(sample.q1.len(), 8);
        assert!(!msg.b);
        assert_eq!(success, rational::ratio(12, 16));
    }

    #[test]
    fn full_and_empty_samples() {
        let ds = RowStore { root: 2 };
        let m: BitMatrix = "11,01".parse().unwrap();
        let full = cell_sample(&ds, &m, 2, 1, 0).unwrap();
        assert_eq!(run_protocol(&ds, &m, &full).unwrap().1, rational::one());
        let empty = cell_sample(&ds, &m, 0, 1, 0).unwrap();
        let (_, success) = run_protocol(&ds, &m, &empty).unwrap();
        assert!(success >= rational::ratio(1, 2));
    }

    #[test]
    fn wire_roundtrip() {
        let msg = ProtocolMessage {
            b: true,
            cells: vec![1, 4],
            location_code: subset_rank(&[1, 4]).unwrap(),
            contents: vec![5, 2],
            total_bits: 12,
        };
        let bits = msg.to_bits(8, 3).unwrap();
        assert_eq!(bits.len(), 12);
        assert_eq!(ProtocolMessage::from_bits(&bits, 8, 3, 2).unwrap(), msg);
    }
}
