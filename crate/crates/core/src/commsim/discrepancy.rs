//! Bias, rank moments, rectangle discrepancy and direct-sum accounting.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::machine::{all_matrices, tabulate, CellProbeDs};
use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::rational::{self, Rational};

/// Rank of a small matrix given as row bitmasks.
pub fn rank_u64(rows: &mut [u64]) -> usize {
    let mut rank = 0;
    for i in 0..rows.len() {
        let pivot = rows[i];
        if pivot == 0 {
            continue;
        }
        rank += 1;
        let low = pivot & pivot.wrapping_neg();
        for r in rows.iter_mut().skip(i + 1) {
            if *r & low != 0 {
                *r ^= pivot;
            }
        }
    }
    rank
}

fn rank_of_code(root: usize, code: u64) -> usize {
    let mask = (1u64 << root) - 1;
    let mut rows: Vec<u64> = (0..root).map(|i| (code >> (i * root)) & mask).collect();
    rank_u64(&mut rows)
}

/// Row-major code of a square matrix: bit `i*root + j` is `M[i,j]`.
pub fn matrix_code(m: &BitMatrix) -> u64 {
    m.to_vec().to_u64()
}

fn check_square(m: &BitMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    if m.nrows() > 8 {
        return Err(Error::InvalidArgument(format!("root {} exceeds 8", m.nrows())));
    }
    Ok(m.nrows())
}

/// `E_{u,v} (-1)^{uᵀMv}` by summing over all `4^root` pairs.
pub fn bias_enumerated(m: &BitMatrix) -> Result<Rational> {
    let root = check_square(m)?;
    let rows: Vec<u64> = m.rows().iter().map(BitVector::to_u64).collect();
    let mut sum: i64 = 0;
    for v in 0u64..1 << root {
        let mv = rows
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, r)| acc | (u64::from((r & v).count_ones() & 1) << i));
        for u in 0u64..1 << root {
            sum += if (u & mv).count_ones() & 1 == 0 { 1 } else { -1 };
        }
    }
    Ok(rational::ratio(sum, 1i64 << (2 * root)))
}

/// `2^{-rank(M)}`.
pub fn bias_from_rank(m: &BitMatrix) -> Result<Rational> {
    check_square(m)?;
    Ok(rational::pow2_neg(m.rank() as u32))
}

/// Exact bias: enumeration up to `root = 5`, the rank formula beyond.
pub fn bias(m: &BitMatrix) -> Result<Rational> {
    if check_square(m)? <= 5 {
        bias_enumerated(m)
    } else {
        bias_from_rank(m)
    }
}

/// Number of `root × root` matrices of each rank `0..=root`, by enumeration.
pub fn rank_histogram(root: usize, caps: &Caps) -> Result<Vec<u64>> {
    caps.check_matrices(root)?;
    let mut hist = vec![0u64; root + 1];
    for code in 0u64..1 << (root * root) {
        hist[rank_of_code(root, code)] += 1;
    }
    Ok(hist)
}

/// `E_M bias(M)^k` over all `root × root` matrices.
pub fn moment(root: usize, k: u32, caps: &Caps) -> Result<Rational> {
    let hist = rank_histogram(root, caps)?;
    let mut total = rational::zero();
    for (r, &count) in hist.iter().enumerate() {
        total += rational::from_int(count as i64) * rational::pow2_neg(r as u32 * k);
    }
    Ok(total * rational::pow2_neg((root * root) as u32))
}

/// `2 · 2^{-9k·root/20}`.
pub fn moment_bound(root: usize, k: u32) -> f64 {
    2.0 * (-9.0 * k as f64 * root as f64 / 20.0).exp2()
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentCheck {
    pub root: usize,
    pub k: u32,
    #[serde(with = "rational::serde_text")]
    pub moment: Rational,
    pub bound: f64,
    pub holds: bool,
}

pub fn moment_bound_check(root: usize, k: u32, caps: &Caps) -> Result<MomentCheck> {
    if k as usize > root {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds root = {root}")));
    }
    let moment = moment(root, k, caps)?;
    let bound = moment_bound(root, k);
    Ok(MomentCheck {
        root,
        k,
        holds: rational::le_real(&moment, bound),
        moment,
        bound,
    })
}

/// Number of `root × root` matrices of rank at most `k`.
pub fn count_low_rank(root: usize, k: usize, caps: &Caps) -> Result<u64> {
    let hist = rank_histogram(root, caps)?;
    Ok(hist.iter().take(k + 1).sum())
}

/// A `k`-tuple of query pairs `(u_i, v_i)`.
pub type PairTuple = Vec<(BitVector, BitVector)>;

/// All `4^{root·k}` tuples, the first pair varying slowest.
pub fn all_tuples(root: usize, k: usize, caps: &Caps) -> Result<Vec<PairTuple>> {
    let bits = 2 * root * k;
    caps.check_input_space(bits)?;
    let pair_mask = (1u64 << (2 * root)) - 1;
    let half = (1u64 << root) - 1;
    Ok((0u64..1 << bits)
        .map(|code| {
            (0..k)
                .rev()
                .map(|i| {
                    let p = (code >> (2 * root * i)) & pair_mask;
                    (
                        BitVector::from_u64(root, p >> root),
                        BitVector::from_u64(root, p & half),
                    )
                })
                .collect()
        })
        .collect())
}

/// `E_{M, tuple} [A(M) B(tuple) (-1)^{Σ u_iᵀ M v_i}]` over uniform `M` and
/// uniform `k`-tuples. Duplicates in `a` or `b` count once.
pub fn rectangle_discrepancy(root: usize, k: usize, a: &[BitMatrix], b: &[PairTuple], caps: &Caps) -> Result<Rational> {
    if root == 0 || root > 8 {
        return Err(Error::InvalidArgument(format!("root {root} outside 1..=8")));
    }
    let mut codes = HashSet::new();
    for m in a {
        if m.nrows() != root || m.ncols() != root {
            return Err(Error::DimensionMismatch {
                expected: root,
                got: m.nrows(),
            });
        }
        codes.insert(matrix_code(m));
    }
    let mut sums = HashSet::new();
    let mut xs = Vec::new();
    for t in b {
        if t.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: t.len(),
            });
        }
        let mut key = Vec::with_capacity(k);
        let mut x = 0u64;
        for (u, v) in t {
            u.check_len(root)?;
            v.check_len(root)?;
            key.push((u.to_u64(), v.to_u64()));
            x ^= matrix_code(&BitMatrix::outer(u, v));
        }
        if sums.insert(key) {
            xs.push(x);
        }
    }
    caps.check_tuples(codes.len() as u128 * xs.len() as u128)?;
    let mut total = BigInt::zero();
    for &code in &codes {
        let mut s: i64 = 0;
        for &x in &xs {
            s += if (code & x).count_ones() & 1 == 0 { 1 } else { -1 };
        }
        total += s;
    }
    let den = BigInt::from(1u8) << (root * root + 2 * root * k);
    Ok(Rational::new(total, den))
}

/// Whether `|disc|` is within [`moment_bound`] and `disc² ≤ moment(root, k)`.
pub fn discrepancy_within_bounds(disc: &Rational, root: usize, k: u32, caps: &Caps) -> Result<(bool, bool)> {
    let abs = disc.abs();
    let per_rectangle = rational::le_real(&abs, moment_bound(root, k));
    let squared = &abs * &abs <= moment(root, k, caps)?;
    Ok((per_rectangle, squared))
}

/// Per-matrix advantages `E_{u,v} Z_M(u,v)` of one machine.
#[derive(Debug, Clone, Serialize)]
pub struct BiasLedger {
    pub root: usize,
    /// Indexed by [`matrix_code`].
    #[serde(serialize_with = "rational::serde_text::vec::serialize")]
    pub per_m: Vec<Rational>,
    #[serde(with = "rational::serde_text")]
    pub global: Rational,
}

impl BiasLedger {
    pub fn from_advantages(root: usize, per_m: Vec<Rational>) -> Result<Self> {
        if per_m.is_empty() {
            return Err(Error::InvalidArgument("empty ledger".into()));
        }
        if let Some(bad) = per_m.iter().find(|a| a.abs() > rational::one()) {
            return Err(Error::InvalidArgument(format!(
                "advantage {} outside [-1, 1]",
                rational::to_text(bad)
            )));
        }
        let sum: Rational = per_m.iter().sum();
        let global = sum / rational::from_int(per_m.len() as i64);
        Ok(BiasLedger { root, per_m, global })
    }

    /// Exact ledger of `ds` over every matrix.
    pub fn of_machine<D: CellProbeDs + ?Sized>(ds: &D, caps: &Caps) -> Result<Self> {
        let per_m = all_matrices(ds.root(), caps)?
            .map(|m| tabulate(ds, &m).map(|t| t.advantage()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_advantages(ds.root(), per_m)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectSum {
    pub k: u32,
    /// `½(1 + E_M adv_M^k)`
    #[serde(with = "rational::serde_text")]
    pub success: Rational,
    /// `½(1 + (E_M adv_M)^k)`
    #[serde(with = "rational::serde_text")]
    pub convexity_floor: Rational,
}

/// Success of answering `k` independent queries and outputting the XOR.
pub fn direct_sum_success(ledger: &BiasLedger, k: u32) -> Result<DirectSum> {
    if let Some((idx, a)) = ledger.per_m.iter().enumerate().find(|(_, a)| a.is_negative()) {
        return Err(Error::NegativeAdvantage(format!(
            "matrix {idx} has advantage {}",
            rational::to_text(a)
        )));
    }
    let half = rational::ratio(1, 2);
    let n = rational::from_int(ledger.per_m.len() as i64);
    let mean_pow: Rational = ledger.per_m.iter().map(|a| rational::pow(a, k)).sum::<Rational>() / n;
    let success = &half * (rational::one() + mean_pow);
    let convexity_floor = &half * (rational::one() + rational::pow(&ledger.global, k));
    if success < convexity_floor {
        return Err(Error::Invariant(format!(
            "direct-sum success {} below convexity floor {}",
            rational::to_text(&success),
            rational::to_text(&convexity_floor)
        )));
    }
    Ok(DirectSum {
        k,
        success,
        convexity_floor,
    })
}

#[cfg(test)]
mod tests {
    use super::super::machine::{majority_flip, ConstantAnswer, RowStore};
    use super::*;

    fn m(s: &str) -> BitMatrix {
        s.parse().unwrap()
    }

    #[test]
    fn bias_examples() {
        assert_eq!(bias(&m("00,00")).unwrap(), rational::one());
        assert_eq!(bias(&m("10,01")).unwrap(), rational::ratio(1, 4));
        assert_eq!(bias(&m("100,000,000")).unwrap(), rational::ratio(1, 2));
    }

    #[test]
    fn bias_matches_rank_exhaustively() {
        let caps = Caps::default();
        for root in 1..=3 {
            for mat in all_matrices(root, &caps).unwrap() {
                assert_eq!(bias_enumerated(&mat).unwrap(), bias_from_rank(&mat).unwrap());
            }
        }
    }

    #[test]
    fn moment_examples() {
        let caps = Caps::default();
        assert_eq!(rank_histogram(2, &caps).unwrap(), vec![1, 9, 6]);
        assert_eq!(rank_histogram(3, &caps).unwrap(), vec![1, 49, 294, 168]);
        assert_eq!(moment(2, 1, &caps).unwrap(), rational::ratio(7, 16));
        assert_eq!(moment(3, 1, &caps).unwrap(), rational::ratio(120, 512));
        assert_eq!(moment(2, 2, &caps).unwrap(), rational::ratio(29, 128));
        for root in 1..=3 {
            assert_eq!(moment(root, 0, &caps).unwrap(), rational::one());
        }
    }

    #[test]
    fn moment_bound_examples() {
        let caps = Caps::default();
        assert!(moment_bound_check(2, 1, &caps).unwrap().holds);
        assert!(moment_bound_check(2, 2, &caps).unwrap().holds);
        assert!(moment_bound_check(3, 3, &caps).unwrap().holds);
        assert!(moment_bound_check(2, 3, &caps).is_err());
    }

    #[test]
    fn low_rank_examples() {
        let caps = Caps::default();
        assert_eq!(count_low_rank(2, 1, &caps).unwrap(), 10);
        assert_eq!(count_low_rank(3, 0, &caps).unwrap(), 1);
        assert_eq!(count_low_rank(3, 3, &caps).unwrap(), 512);
    }

    #[test]
    fn full_rectangle_is_the_moment() {
        let caps = Caps::default();
        let a: Vec<BitMatrix> = all_matrices(2, &caps).unwrap().collect();
        let b = all_tuples(2, 1, &caps).unwrap();
        assert_eq!(
            rectangle_discrepancy(2, 1, &a, &b, &caps).unwrap(),
            rational::ratio(7, 16)
        );
        assert_eq!(rectangle_discrepancy(2, 1, &[], &b, &caps).unwrap(), rational::zero());
    }

    #[test]
    fn direct_sum_examples() {
        let caps = Caps::default();
        let ledger = BiasLedger::of_machine(&RowStore { root: 2 }, &caps).unwrap();
        let ds = direct_sum_success(&ledger, 3).unwrap();
        assert_eq!(ds.success, rational::one());

        let ledger = BiasLedger::of_machine(&majority_flip(ConstantAnswer { root: 2, bit: false }), &caps).unwrap();
        let one = direct_sum_success(&ledger, 1).unwrap();
        assert_eq!(one.success, rational::ratio(1, 2) * (rational::one() + &ledger.global));
        let two = direct_sum_success(&ledger, 2).unwrap();
        assert!(two.success >= two.convexity_floor);

        let raw = BiasLedger::of_machine(&ConstantAnswer { root: 2, bit: true }, &caps).unwrap();
        assert!(matches!(direct_sum_success(&raw, 2), Err(Error::NegativeAdvantage(_))));
    }
}
