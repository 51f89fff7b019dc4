//! Bit-packed linear algebra over F_2.
//!
//! Text format shared by every file the crate reads: one `0`/`1` string per
//! line, coordinate 1 leftmost, lines starting with `#` are comments and blank
//! lines are ignored.

mod enumerate;
mod matrix;
mod subspace;
mod vector;

pub use enumerate::{enumerate_subspaces, gaussian_binomial, pivot_blocks, pivot_sets, PivotBlock};
pub use matrix::{solve_linear, BitMatrix};
pub use subspace::{Nearest, Subspace};
pub use vector::BitVector;

pub(crate) use matrix::exact_sqrt;

use crate::error::{Error, Result};

/// Parses the text format into `(line_number, vector)` pairs, checking that
/// every row has the same length. Line numbers are 1-based.
pub fn parse_rows(text: &str) -> Result<Vec<(usize, BitVector)>> {
    let mut out: Vec<(usize, BitVector)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let v: BitVector = trimmed.parse().map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse { line, message },
            other => other,
        })?;
        if let Some((first_line, first)) = out.first() {
            if first.len() != v.len() {
                return Err(Error::Parse {
                    line,
                    message: format!(
                        "row has length {} but line {} has length {}",
                        v.len(),
                        first_line,
                        first.len()
                    ),
                });
            }
        }
        out.push((line, v));
    }
    Ok(out)
}

/// `vec(M)`: row concatenation of a matrix.
pub fn vec(m: &BitMatrix) -> BitVector {
    m.to_vec()
}

/// `mat(v)`: the inverse of [`vec`] for square shapes.
pub fn mat(v: &BitVector) -> Result<BitMatrix> {
    BitMatrix::from_vec(v)
}
