use std::fmt;
use std::str::FromStr;

use super::vector::BitVector;
use crate::error::{Error, Result};

/// Dense matrix over F_2 stored as packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            cols,
            rows: vec![BitVector::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        BitMatrix {
            cols: n,
            rows: (0..n).map(|i| BitVector::unit(n, i)).collect(),
        }
    }

    /// Builds a matrix from rows, all of which must have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Result<Self> {
        for r in &rows {
            r.check_len(cols)?;
        }
        Ok(BitMatrix { cols, rows })
    }

    /// The outer product `u vᵀ`.
    pub fn outer(u: &BitVector, v: &BitVector) -> Self {
        let rows = u
            .iter()
            .map(|ui| if ui { v.clone() } else { BitVector::zeros(v.len()) })
            .collect();
        BitMatrix { cols: v.len(), rows }
    }

    /// Square matrix whose row `i` is bits `i*root .. (i+1)*root` of `bits`.
    pub fn from_u64_square(root: usize, bits: u64) -> Self {
        assert!(root * root <= 64);
        let mask = if root == 64 { u64::MAX } else { (1u64 << root) - 1 };
        let rows = (0..root)
            .map(|i| BitVector::from_u64(root, (bits >> (i * root)) & mask))
            .collect();
        BitMatrix { cols: root, rows }
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    #[inline]
    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn into_rows(self) -> Vec<BitVector> {
        self.rows
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.rows[i].set(j, value);
    }

    pub fn column(&self, j: usize) -> BitVector {
        BitVector::from_bools(self.rows.iter().map(|r| r.get(j)))
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitVector::is_zero)
    }

    pub fn transpose(&self) -> BitMatrix {
        BitMatrix {
            cols: self.nrows(),
            rows: (0..self.cols).map(|j| self.column(j)).collect(),
        }
    }

    /// `self · x` over F_2.
    pub fn mul_vec(&self, x: &BitVector) -> BitVector {
        debug_assert_eq!(x.len(), self.cols);
        BitVector::from_bools(self.rows.iter().map(|r| r.dot(x)))
    }

    pub fn mul(&self, rhs: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != rhs.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: rhs.nrows(),
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut acc = BitVector::zeros(rhs.cols);
                for k in r.ones_iter() {
                    acc ^= &rhs.rows[k];
                }
                acc
            })
            .collect();
        Ok(BitMatrix { cols: rhs.cols, rows })
    }

    /// `uᵀ M v`.
    pub fn bilinear(&self, u: &BitVector, v: &BitVector) -> bool {
        u.ones_iter().fold(false, |acc, i| acc ^ self.rows[i].dot(v))
    }

    /// Row-concatenation into a single vector: entry `(a, b)` lands at `a * cols + b`.
    pub fn to_vec(&self) -> BitVector {
        BitVector::from_bools(self.rows.iter().flat_map(|r| r.iter()))
    }

    /// Inverse of [`BitMatrix::to_vec`] for a square shape; `v.len()` must be a perfect square.
    pub fn from_vec(v: &BitVector) -> Result<BitMatrix> {
        let root = exact_sqrt(v.len())
            .ok_or_else(|| Error::InvalidArgument(format!("length {} is not a perfect square", v.len())))?;
        let rows = (0..root).map(|a| v.slice(a * root, (a + 1) * root)).collect();
        Ok(BitMatrix { cols: root, rows })
    }

    /// Reduced row-echelon form with zero rows dropped.
    pub fn rref(&self) -> BitMatrix {
        let mut rows = self.rows.clone();
        let rank = eliminate(&mut rows, self.cols);
        rows.truncate(rank);
        BitMatrix { cols: self.cols, rows }
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        eliminate(&mut rows, self.cols)
    }

    /// Splits `self` into `A · B` with `A` of shape `rows × ρ` and `B` of shape
    /// `ρ × cols`, `ρ = rank(self)`.
    ///
    /// `B` is the RREF of `self`; row `i` of `A` holds the entries of row `i`
    /// of `self` at the pivot columns of `B`, which are exactly its coordinates
    /// in that basis.
    pub fn rank_factorize(&self) -> (BitMatrix, BitMatrix) {
        let b = self.rref();
        let pivots = pivot_columns(b.rows());
        let a_rows = self
            .rows
            .iter()
            .map(|r| BitVector::from_bools(pivots.iter().map(|&p| r.get(p))))
            .collect();
        (
            BitMatrix {
                cols: pivots.len(),
                rows: a_rows,
            },
            b,
        )
    }

    fn fmt_rows(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Solves `a · x = b`, returning one solution (free variables set to zero) or
/// `None` when the system is inconsistent.
pub fn solve_linear(a: &BitMatrix, b: &BitVector) -> Result<Option<BitVector>> {
    b.check_len(a.nrows())?;
    let n = a.ncols();
    let mut aug: Vec<BitVector> = a
        .rows()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.resized(n + 1);
            row.set(n, b.get(i));
            row
        })
        .collect();
    let rank = eliminate(&mut aug, n + 1);
    let mut x = BitVector::zeros(n);
    for row in &aug[..rank] {
        let pivot = row.ones_iter().next().expect("nonzero row after elimination");
        if pivot == n {
            return Ok(None);
        }
        x.set(pivot, row.get(n));
    }
    Ok(Some(x))
}

/// Gauss-Jordan elimination in place. Returns the rank; rows `0..rank` end up
/// in reduced row-echelon form with increasing pivots.
pub(crate) fn eliminate(rows: &mut [BitVector], cols: usize) -> usize {
    let mut rank = 0;
    for col in 0..cols {
        let Some(found) = (rank..rows.len()).find(|&i| rows[i].get(col)) else {
            continue;
        };
        rows.swap(rank, found);
        let pivot = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && row.get(col) {
                row.xor_assign(&pivot);
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Leading coordinate of each (nonzero) row.
pub(crate) fn pivot_columns(rows: &[BitVector]) -> Vec<usize> {
    rows.iter()
        .map(|r| r.ones_iter().next().expect("echelon rows are nonzero"))
        .collect()
}

pub(crate) fn exact_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r.checked_mul(r) == Some(n)).then_some(r)
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_rows(f)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix({}x{}) [", self.nrows(), self.cols)?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("]")
    }
}

impl FromStr for BitMatrix {
    type Err = Error;

    /// Rows separated by newlines, commas or whitespace. An empty string is
    /// not accepted since the column count would be unknown.
    fn from_str(s: &str) -> Result<Self> {
        let rows = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<BitVector>>>()?;
        let cols = rows
            .first()
            .map(BitVector::len)
            .ok_or_else(|| Error::InvalidArgument("empty matrix text".into()))?;
        BitMatrix::from_rows(cols, rows)
    }
}
