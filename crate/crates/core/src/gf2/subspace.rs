use std::fmt;

use super::matrix::{eliminate, pivot_columns, BitMatrix};
use super::vector::BitVector;
use crate::caps::Caps;
use crate::error::{Error, Result};

/// A linear subspace of F_2^n held by its RREF basis.
///
/// The basis is canonical, so two subspaces are equal exactly when their
/// bases are identical.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    basis: BitMatrix,
    pivots: Vec<usize>,
}

/// Closest point of a subspace to a query, see [`Subspace::nearest`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nearest {
    pub distance: usize,
    /// Bit `j` selects basis row `j`.
    pub coeffs: u64,
    pub point: BitVector,
}

impl Subspace {
    pub fn zero(n: usize) -> Self {
        Subspace {
            basis: BitMatrix::zeros(0, n),
            pivots: Vec::new(),
        }
    }

    pub fn full(n: usize) -> Self {
        Subspace {
            basis: BitMatrix::identity(n),
            pivots: (0..n).collect(),
        }
    }

    /// Span of arbitrary generators of length `n`.
    pub fn span<'a, I>(n: usize, generators: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a BitVector>,
    {
        let mut rows = Vec::new();
        for g in generators {
            g.check_len(n)?;
            rows.push(g.clone());
        }
        Ok(Self::from_rows_unchecked(n, rows))
    }

    pub fn from_matrix(m: &BitMatrix) -> Self {
        Self::from_rows_unchecked(m.ncols(), m.rows().to_vec())
    }

    pub(crate) fn from_rows_unchecked(n: usize, mut rows: Vec<BitVector>) -> Self {
        let rank = eliminate(&mut rows, n);
        rows.truncate(rank);
        let pivots = pivot_columns(&rows);
        Subspace {
            basis: BitMatrix::from_rows(n, rows).expect("rows share length n"),
            pivots,
        }
    }

    /// Wraps rows already in RREF. Only the enumerator calls this.
    pub(crate) fn from_rref(n: usize, rows: Vec<BitVector>, pivots: Vec<usize>) -> Self {
        debug_assert_eq!(rows.len(), pivots.len());
        Subspace {
            basis: BitMatrix::from_rows(n, rows).expect("rows share length n"),
            pivots,
        }
    }

    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.basis.ncols()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &BitMatrix {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Reduces `v` against the basis; the result is zero iff `v` is in the span.
    pub fn reduce(&self, v: &BitVector) -> BitVector {
        let mut r = v.clone();
        for (row, &p) in self.basis.rows().iter().zip(&self.pivots) {
            if r.get(p) {
                r ^= row;
            }
        }
        r
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        v.len() == self.ambient_dim() && self.reduce(v).is_zero()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.ambient_dim() == other.ambient_dim() && self.basis.rows().iter().all(|r| other.contains(r))
    }

    /// Span of `self` together with extra generators.
    pub fn extend<'a, I>(&self, extra: I) -> Result<Subspace>
    where
        I: IntoIterator<Item = &'a BitVector>,
    {
        let mut rows = self.basis.rows().to_vec();
        for e in extra {
            e.check_len(self.ambient_dim())?;
            rows.push(e.clone());
        }
        Ok(Subspace::from_rows_unchecked(self.ambient_dim(), rows))
    }

    /// Restriction of every element to the coordinates `start..end`.
    pub fn project(&self, start: usize, end: usize) -> Subspace {
        let rows = self.basis.rows().iter().map(|r| r.slice(start, end)).collect();
        Subspace::from_rows_unchecked(end - start, rows)
    }

    /// Element selected by `coeffs` (bit `j` picks basis row `j`).
    pub fn combination(&self, coeffs: u64) -> BitVector {
        let mut acc = BitVector::zeros(self.ambient_dim());
        for (j, row) in self.basis.rows().iter().enumerate() {
            if (coeffs >> j) & 1 == 1 {
                acc ^= row;
            }
        }
        acc
    }

    /// All `2^dim` elements in coefficient order.
    pub fn elements(&self, caps: &Caps) -> Result<Vec<BitVector>> {
        caps.check_coset(self.dim())?;
        Ok((0..1u64 << self.dim()).map(|c| self.combination(c)).collect())
    }

    /// Exact `d_H(q, U) = min_{u ∈ U} d_H(q, u)`.
    ///
    /// Walks the coset `q + U` in Gray-code order so each step is one row XOR
    /// and a popcount.
    pub fn distance(&self, q: &BitVector, caps: &Caps) -> Result<usize> {
        q.check_len(self.ambient_dim())?;
        caps.check_coset(self.dim())?;
        Ok(self.distance_unchecked(q))
    }

    pub(crate) fn distance_unchecked(&self, q: &BitVector) -> usize {
        let rows = self.basis.rows();
        let mut cur = q.clone();
        let mut best = cur.weight();
        for i in 1u64..(1u64 << rows.len()) {
            if best == 0 {
                break;
            }
            cur ^= &rows[i.trailing_zeros() as usize];
            best = best.min(cur.weight());
        }
        best
    }

    /// Like [`Subspace::distance`] but also returns the minimizing element.
    /// Ties go to the numerically smallest coefficient vector.
    pub fn nearest(&self, q: &BitVector, caps: &Caps) -> Result<Nearest> {
        q.check_len(self.ambient_dim())?;
        caps.check_coset(self.dim())?;
        let rows = self.basis.rows();
        let mut cur = q.clone();
        let mut best = (cur.weight(), 0u64);
        let mut gray = 0u64;
        for i in 1u64..(1u64 << rows.len()) {
            let bit = i.trailing_zeros();
            gray ^= 1 << bit;
            cur ^= &rows[bit as usize];
            let w = cur.weight();
            if w < best.0 || (w == best.0 && gray < best.1) {
                best = (w, gray);
            }
        }
        Ok(Nearest {
            distance: best.0,
            coeffs: best.1,
            point: self.combination(best.1),
        })
    }

    /// Parses basis rows in the text format and canonicalizes them.
    pub fn from_text(text: &str) -> Result<Subspace> {
        let rows = super::parse_rows(text)?;
        let n = rows
            .first()
            .map(|(_, v)| v.len())
            .ok_or_else(|| Error::InvalidArgument("subspace file has no basis rows".into()))?;
        let vs: Vec<BitVector> = rows.into_iter().map(|(_, v)| v).collect();
        Subspace::span(n, &vs)
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span{{")?;
        for (i, r) in self.basis.rows().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, "}} ⊆ F_2^{}", self.ambient_dim())
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
