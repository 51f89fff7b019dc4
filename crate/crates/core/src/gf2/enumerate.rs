use super::subspace::Subspace;
use super::vector::BitVector;
use crate::caps::Caps;
use crate::error::{Error, Result};

/// Number of `r`-dimensional subspaces of F_2^n, saturating at `u128::MAX`.
pub fn gaussian_binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    // [n r]_2 = prod_{i<r} (2^{n-i} - 1) / (2^{i+1} - 1), exact at every step
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        let num = pow2_minus_one(n - i);
        let den = pow2_minus_one(i + 1);
        let Some(prod) = acc.checked_mul(num) else {
            return u128::MAX;
        };
        acc = prod / den;
    }
    acc
}

fn pow2_minus_one(k: usize) -> u128 {
    if k >= 128 {
        u128::MAX
    } else {
        (1u128 << k) - 1
    }
}

/// All `r`-subsets of `0..n` in lexicographic order.
pub fn pivot_sets(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..r).collect();
    loop {
        out.push(cur.clone());
        // rightmost position that can still advance
        let Some(i) = (0..r).rev().find(|&i| cur[i] < n - r + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..r {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// The RREF subspaces sharing one pivot-column set.
///
/// Free entries are the non-pivot columns to the right of each row's pivot,
/// listed row by row with columns ascending; a binary counter over them
/// (first listed entry = least significant bit) fixes the order.
#[derive(Debug, Clone)]
pub struct PivotBlock {
    n: usize,
    pivots: Vec<usize>,
    free: Vec<(usize, usize)>,
}

impl PivotBlock {
    pub fn new(n: usize, pivots: Vec<usize>) -> Self {
        let mut free = Vec::new();
        for (row, &p) in pivots.iter().enumerate() {
            for col in p + 1..n {
                if !pivots.contains(&col) {
                    free.push((row, col));
                }
            }
        }
        PivotBlock { n, pivots, free }
    }

    pub fn len(&self) -> u128 {
        1u128 << self.free.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn subspace(&self, counter: u64) -> Subspace {
        let mut rows: Vec<BitVector> = self.pivots.iter().map(|&p| BitVector::unit(self.n, p)).collect();
        for (bit, &(row, col)) in self.free.iter().enumerate() {
            if (counter >> bit) & 1 == 1 {
                rows[row].set(col, true);
            }
        }
        Subspace::from_rref(self.n, rows, self.pivots.clone())
    }

    pub fn iter(&self) -> impl Iterator<Item = Subspace> + '_ {
        (0..self.len() as u64).map(move |c| self.subspace(c))
    }
}

/// Deterministic stream of every `r`-dimensional subspace of F_2^n: pivot sets
/// in lexicographic order, then free entries counting up.
pub fn enumerate_subspaces(n: usize, r: usize, caps: &Caps) -> Result<impl Iterator<Item = Subspace>> {
    Ok(pivot_blocks(n, r, caps)?
        .into_iter()
        .flat_map(|b| (0..b.len() as u64).map(move |c| b.subspace(c))))
}

/// The enumeration split by pivot set, for partitioned scans.
pub fn pivot_blocks(n: usize, r: usize, caps: &Caps) -> Result<Vec<PivotBlock>> {
    if r > n {
        return Err(Error::InvalidArgument(format!(
            "subspace dimension {r} exceeds ambient dimension {n}"
        )));
    }
    caps.check_subspaces(gaussian_binomial(n, r))?;
    Ok(pivot_sets(n, r).into_iter().map(|p| PivotBlock::new(n, p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn gaussian_binomial_values() {
        assert_eq!(gaussian_binomial(3, 1), 7);
        assert_eq!(gaussian_binomial(3, 3), 1);
        // (2^4-1)(2^4-2) / ((2^2-1)(2^2-2))
        assert_eq!(gaussian_binomial(4, 2), 15 * 14 / (3 * 2));
        assert_eq!(gaussian_binomial(5, 0), 1);
        assert_eq!(gaussian_binomial(2, 3), 0);
        assert_eq!(gaussian_binomial(6, 3), 1395);
    }

    #[test]
    fn enumeration_examples() {
        let caps = Caps::default();
        assert_eq!(enumerate_subspaces(3, 1, &caps).unwrap().count(), 7);
        let full: Vec<_> = enumerate_subspaces(3, 3, &caps).unwrap().collect();
        assert_eq!(full, vec![Subspace::full(3)]);
        assert_eq!(enumerate_subspaces(4, 2, &caps).unwrap().count(), 35);
    }

    #[test]
    fn exhaustive_counts_and_distinctness_up_to_five() {
        let caps = Caps::default();
        for n in 0..=5 {
            for r in 0..=n {
                let all: Vec<Subspace> = enumerate_subspaces(n, r, &caps).unwrap().collect();
                assert_eq!(all.len() as u128, gaussian_binomial(n, r), "n={n} r={r}");
                let distinct: HashSet<&Subspace> = all.iter().collect();
                assert_eq!(distinct.len(), all.len());
                for s in &all {
                    assert_eq!(s.dim(), r);
                    // the generated basis is already canonical
                    assert_eq!(&Subspace::from_matrix(s.basis()), s);
                }
            }
        }
    }

    #[test]
    fn one_dimensional_subspaces_are_nonzero_vectors() {
        let caps = Caps::default();
        let gens: HashSet<BitVector> = enumerate_subspaces(4, 1, &caps)
            .unwrap()
            .map(|s| s.basis().row(0).clone())
            .collect();
        assert_eq!(gens.len(), 15);
    }

    #[test]
    fn order_is_lexicographic_in_pivots() {
        let sets = pivot_sets(4, 2);
        assert_eq!(sets.first().unwrap(), &vec![0, 1]);
        assert_eq!(sets.last().unwrap(), &vec![2, 3]);
        assert_eq!(sets.len(), 6);
        assert_eq!(pivot_sets(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn cap_refuses_large_enumerations() {
        let caps = Caps {
            subspaces: 100,
            ..Caps::default()
        };
        assert!(enumerate_subspaces(6, 3, &caps).err().unwrap().is_cap());
    }
}
