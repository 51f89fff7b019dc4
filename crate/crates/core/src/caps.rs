use crate::error::{Error, Result};

/// Resource guards for the exhaustive searches. Every enumeration checks the
/// relevant cap before starting and refuses with [`Error::CapExceeded`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of subspaces a single scan may visit.
    pub subspaces: u128,
    /// Maximum subspace dimension for exhaustive coset walks (2^dim elements).
    pub coset_dim: usize,
    /// Maximum `n` for scans over all of F_2^n (verification, far points).
    pub input_bits: usize,
    /// Maximum number of matrix entries `root^2` for scans over all matrices.
    pub matrix_entries: usize,
    /// Maximum number of redundancy tuples visited by the direct time computation.
    pub tuples: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            subspaces: 20_000_000,
            coset_dim: 24,
            input_bits: 24,
            matrix_entries: 16,
            tuples: 50_000_000,
        }
    }
}

impl Caps {
    pub fn check_subspaces(&self, count: u128) -> Result<()> {
        if count > self.subspaces {
            return Err(Error::cap("subspaces", count, self.subspaces));
        }
        Ok(())
    }

    pub fn check_coset(&self, dim: usize) -> Result<()> {
        if dim > self.coset_dim.min(63) {
            return Err(Error::cap(
                "coset_dim",
                1u128 << dim.min(127),
                1u128 << self.coset_dim.min(63),
            ));
        }
        Ok(())
    }

    pub fn check_input_space(&self, n: usize) -> Result<()> {
        if n > self.input_bits.min(63) {
            return Err(Error::cap(
                "input_space",
                1u128 << n.min(127),
                1u128 << self.input_bits.min(63),
            ));
        }
        Ok(())
    }

    pub fn check_matrices(&self, root: usize) -> Result<()> {
        let entries = root * root;
        if entries > self.matrix_entries.min(63) {
            return Err(Error::cap(
                "matrix_entries",
                1u128 << entries.min(127),
                1u128 << self.matrix_entries.min(63),
            ));
        }
        Ok(())
    }

    pub fn check_tuples(&self, count: u128) -> Result<()> {
        if count > self.tuples {
            return Err(Error::cap("tuples", count, self.tuples));
        }
        Ok(())
    }
}
