//! Toy cell-probe machines for the `uᵀMv` problem and their traced execution.

use std::collections::BTreeMap;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::rational::{self, Rational};

/// Memory access as seen by a query algorithm. `None` aborts the query.
pub trait CellReader {
    fn read(&mut self, cell: usize) -> Option<u64>;
}

/// A deterministic static data structure for `uᵀMv` over `root × root`
/// matrices: `s` cells of `w` bits, at most `t` probes per query.
pub trait CellProbeDs: Send + Sync {
    fn name(&self) -> String;
    fn root(&self) -> usize;
    /// `s`
    fn cells(&self) -> usize;
    /// `w`
    fn word_bits(&self) -> usize;
    /// `t`
    fn max_probes(&self) -> usize;
    /// Cell contents for `m`; each value uses the low `w` bits.
    fn build(&self, m: &BitMatrix) -> Vec<u64>;
    /// Answers `uᵀMv`, reading memory only through `mem`. Propagates `None`
    /// from the reader with `?`.
    fn query(&self, u: &BitVector, v: &BitVector, mem: &mut dyn CellReader) -> Option<bool>;
}

impl<T: CellProbeDs + ?Sized> CellProbeDs for Box<T> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn root(&self) -> usize {
        (**self).root()
    }
    fn cells(&self) -> usize {
        (**self).cells()
    }
    fn word_bits(&self) -> usize {
        (**self).word_bits()
    }
    fn max_probes(&self) -> usize {
        (**self).max_probes()
    }
    fn build(&self, m: &BitMatrix) -> Vec<u64> {
        (**self).build(m)
    }
    fn query(&self, u: &BitVector, v: &BitVector, mem: &mut dyn CellReader) -> Option<bool> {
        (**self).query(u, v, mem)
    }
}

/// Full memory access that records every probe.
pub struct TracedMemory<'a> {
    cells: &'a [u64],
    pub trace: Vec<usize>,
}

impl<'a> TracedMemory<'a> {
    pub fn new(cells: &'a [u64]) -> Self {
        TracedMemory {
            cells,
            trace: Vec::new(),
        }
    }
}

impl CellReader for TracedMemory<'_> {
    fn read(&mut self, cell: usize) -> Option<u64> {
        self.trace.push(cell);
        self.cells.get(cell).copied()
    }
}

/// Only the cells in `contents` are readable; anything else aborts.
pub struct PartialMemory<'a> {
    pub contents: &'a BTreeMap<usize, u64>,
}

impl CellReader for PartialMemory<'_> {
    fn read(&mut self, cell: usize) -> Option<u64> {
        self.contents.get(&cell).copied()
    }
}

/// Cells are the rows of `M`; a query XORs `⟨row_i, v⟩` over `i ∈ supp(u)`.
#[derive(Debug, Clone, Copy)]
pub struct RowStore {
    pub root: usize,
}

impl CellProbeDs for RowStore {
    fn name(&self) -> String {
        "row-store".into()
    }
    fn root(&self) -> usize {
        self.root
    }
    fn cells(&self) -> usize {
        self.root
    }
    fn word_bits(&self) -> usize {
        self.root
    }
    fn max_probes(&self) -> usize {
        self.root
    }
    fn build(&self, m: &BitMatrix) -> Vec<u64> {
        m.rows().iter().map(BitVector::to_u64).collect()
    }
    fn query(&self, u: &BitVector, v: &BitVector, mem: &mut dyn CellReader) -> Option<bool> {
        let v = v.to_u64();
        let mut acc = false;
        for i in u.ones_iter() {
            acc ^= (mem.read(i)? & v).count_ones() & 1 == 1;
        }
        Some(acc)
    }
}

/// Like [`RowStore`] but keeps only the first `kept` rows and ignores the
/// rest, so it errs on some queries.
#[derive(Debug, Clone, Copy)]
pub struct PartialRowStore {
    pub root: usize,
    pub kept: usize,
}

impl CellProbeDs for PartialRowStore {
    fn name(&self) -> String {
        format!("partial-row-store:{}", self.kept)
    }
    fn root(&self) -> usize {
        self.root
    }
    fn cells(&self) -> usize {
        self.kept
    }
    fn word_bits(&self) -> usize {
        self.root
    }
    fn max_probes(&self) -> usize {
        self.kept
    }
    fn build(&self, m: &BitMatrix) -> Vec<u64> {
        m.rows()[..self.kept].iter().map(BitVector::to_u64).collect()
    }
    fn query(&self, u: &BitVector, v: &BitVector, mem: &mut dyn CellReader) -> Option<bool> {
        let v = v.to_u64();
        let mut acc = false;
        for i in u.ones_iter().filter(|&i| i < self.kept) {
            acc ^= (mem.read(i)? & v).count_ones() & 1 == 1;
        }
        Some(acc)
    }
}

/// One cell per entry of `M` plus a final cell with the parity of all
/// entries, used when `u` and `v` are both all-ones.
#[derive(Debug, Clone, Copy)]
pub struct VerbatimParity {
    pub root: usize,
}

impl CellProbeDs for VerbatimParity {
    fn name(&self) -> String {
        "verbatim-parity".into()
    }
    fn root(&self) -> usize {
        self.root
    }
    fn cells(&self) -> usize {
        self.root * self.root + 1
    }
    fn word_bits(&self) -> usize {
        1
    }
    fn max_probes(&self) -> usize {
        self.root * self.root
    }
    fn build(&self, m: &BitMatrix) -> Vec<u64> {
        let mut cells: Vec<u64> = m.to_vec().iter().map(u64::from).collect();
        cells.push(m.to_vec().weight() as u64 & 1);
        cells
    }
    fn query(&self, u: &BitVector, v: &BitVector, mem: &mut dyn CellReader) -> Option<bool> {
        let root = self.root;
        if u.weight() == root && v.weight() == root {
            return Some(mem.read(root * root)? == 1);
        }
        let mut acc = false;
        for i in u.ones_iter() {
            for j in v.ones_iter() {
                acc ^= mem.read(i * root + j)? == 1;
            }
        }
        Some(acc)
    }
}

/// Answers a fixed bit without touching memory.
#[derive(Debug, Clone, Copy)]
pub struct ConstantAnswer {
    pub root: usize,
    pub bit: bool,
}

impl CellProbeDs for ConstantAnswer {
    fn name(&self) -> String {
        format!("constant-{}", u8::from(self.bit))
    }
    fn root(&self) -> usize {
        self.root
    }
    fn cells(&self) -> usize {
        0
    }
    fn word_bits(&self) -> usize {
        1
    }
    fn max_probes(&self) -> usize {
        0
    }
    fn build(&self, _m: &BitMatrix) -> Vec<u64> {
        Vec::new()
    }
    fn query(&self, _u: &BitVector, _v: &BitVector, _mem: &mut dyn CellReader) -> Option<bool> {
        Some(self.bit)
    }
}

/// Complements every answer of the inner machine.
#[derive(Debug, Clone)]
pub struct Negated<D>(pub D);

impl<D: CellProbeDs> CellProbeDs for Negated<D> {
    fn name(&self) -> String {
        format!("not({})", self.0.name())
    }
    fn root(&self) -> usize {
        self.0.root()
    }
    fn cells(&self) -> usize {
        self.0.cells()
    }
    fn word_bits(&self) -> usize {
        self.0.word_bits()
    }
    fn max_probes(&self) -> usize {
        self.0.max_probes()
    }
    fn build(&self, m: &BitMatrix) -> Vec<u64> {
        self.0.build(m)
    }
    fn query(&self, u: &BitVector, v: &BitVector, mem: &mut dyn CellReader) -> Option<bool> {
        self.0.query(u, v, mem).map(|b| !b)
    }
}

/// The inner machine plus one cell flagging matrices on which it is correct
/// on fewer than half of all queries; the flag is probed first and XORed into
/// the answer. Space and time each grow by one.
#[derive(Debug, Clone)]
pub struct MajorityFlip<D> {
    inner: D,
}

pub fn majority_flip<D: CellProbeDs>(ds: D) -> MajorityFlip<D> {
    MajorityFlip { inner: ds }
}

impl<D: CellProbeDs> MajorityFlip<D> {
    pub fn inner(&self) -> &D {
        &self.inner
    }

    /// Whether the flag cell is set for `m`.
    pub fn flag(&self, m: &BitMatrix) -> bool {
        let table = tabulate(&self.inner, m).expect("inner machine respects its declared shape");
        2 * table.correct() < table.len()
    }
}

impl<D: CellProbeDs> CellProbeDs for MajorityFlip<D> {
    fn name(&self) -> String {
        format!("flip({})", self.inner.name())
    }
    fn root(&self) -> usize {
        self.inner.root()
    }
    fn cells(&self) -> usize {
        self.inner.cells() + 1
    }
    fn word_bits(&self) -> usize {
        self.inner.word_bits()
    }
    fn max_probes(&self) -> usize {
        self.inner.max_probes() + 1
    }
    fn build(&self, m: &BitMatrix) -> Vec<u64> {
        let mut cells = self.inner.build(m);
        cells.push(u64::from(self.flag(m)));
        cells
    }
    fn query(&self, u: &BitVector, v: &BitVector, mem: &mut dyn CellReader) -> Option<bool> {
        let flag = mem.read(self.inner.cells())? == 1;
        Some(self.inner.query(u, v, mem)? ^ flag)
    }
}

/// The built-in machines by CLI name.
pub fn machine_by_name(name: &str, root: usize) -> Result<Box<dyn CellProbeDs>> {
    if root == 0 || root > 8 {
        return Err(Error::InvalidArgument(format!("root {root} outside 1..=8")));
    }
    match name {
        "row-store" => Ok(Box::new(RowStore { root })),
        "verbatim-parity" => Ok(Box::new(VerbatimParity { root })),
        "constant-0" => Ok(Box::new(ConstantAnswer { root, bit: false })),
        other => match other.strip_prefix("partial-row-store:") {
            Some(k) => {
                let kept: usize = k
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad row count in {other:?}")))?;
                if kept > root {
                    return Err(Error::InvalidArgument(format!("cannot keep {kept} of {root} rows")));
                }
                Ok(Box::new(PartialRowStore { root, kept }))
            }
            None => Err(Error::InvalidArgument(format!("unknown machine {other:?}"))),
        },
    }
}

/// Index of the query pair `(u, v)`: `u` in the high `root` bits.
#[inline]
pub fn pair_index(root: usize, u: u64, v: u64) -> usize {
    ((u << root) | v) as usize
}

#[inline]
pub fn pair_from_index(root: usize, idx: usize) -> (BitVector, BitVector) {
    let mask = (1u64 << root) - 1;
    let idx = idx as u64;
    (
        BitVector::from_u64(root, idx >> root),
        BitVector::from_u64(root, idx & mask),
    )
}

/// One fully traced query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub answer: bool,
    pub truth: bool,
    pub trace: Vec<usize>,
}

impl Outcome {
    pub fn correct(&self) -> bool {
        self.answer == self.truth
    }
}

/// Every query `(u, v)` of one matrix, indexed by [`pair_index`].
#[derive(Debug, Clone)]
pub struct QueryTable {
    pub root: usize,
    pub outcomes: Vec<Outcome>,
}

impl QueryTable {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn correct(&self) -> usize {
        self.outcomes.iter().filter(|o| o.correct()).count()
    }

    /// `Pr_{u,v}[correct]`.
    pub fn success(&self) -> Rational {
        rational::ratio(self.correct() as i64, self.len() as i64)
    }

    /// `E_{u,v}[Z_M(u,v)] = 2 Pr[correct] - 1`.
    pub fn advantage(&self) -> Rational {
        let c = self.correct() as i64;
        rational::ratio(2 * c - self.len() as i64, self.len() as i64)
    }
}

/// Runs one query against full memory, checking the declared probe budget.
pub fn execute<D: CellProbeDs + ?Sized>(
    ds: &D,
    memory: &[u64],
    u: &BitVector,
    v: &BitVector,
) -> Result<(bool, Vec<usize>)> {
    let mut mem = TracedMemory::new(memory);
    let answer = ds
        .query(u, v, &mut mem)
        .ok_or_else(|| Error::Invariant(format!("{} aborted with full memory", ds.name())))?;
    if mem.trace.len() > ds.max_probes() {
        return Err(Error::Invariant(format!(
            "{} made {} probes, declared at most {}",
            ds.name(),
            mem.trace.len(),
            ds.max_probes()
        )));
    }
    if let Some(&bad) = mem.trace.iter().find(|&&c| c >= ds.cells()) {
        return Err(Error::Invariant(format!(
            "{} probed cell {bad} of {}",
            ds.name(),
            ds.cells()
        )));
    }
    Ok((answer, mem.trace))
}

/// Traces every query on `m`.
pub fn tabulate<D: CellProbeDs + ?Sized>(ds: &D, m: &BitMatrix) -> Result<QueryTable> {
    let root = ds.root();
    if m.nrows() != root || m.ncols() != root {
        return Err(Error::DimensionMismatch {
            expected: root,
            got: m.nrows(),
        });
    }
    let memory = ds.build(m);
    if memory.len() != ds.cells() {
        return Err(Error::Invariant(format!(
            "{} built {} cells, declared {}",
            ds.name(),
            memory.len(),
            ds.cells()
        )));
    }
    let w = ds.word_bits();
    if w < 64 && memory.iter().any(|&c| c >> w != 0) {
        return Err(Error::Invariant(format!(
            "{} stored more than {w} bits in a cell",
            ds.name()
        )));
    }
    let outcomes = (0..1usize << (2 * root))
        .map(|idx| {
            let (u, v) = pair_from_index(root, idx);
            let (answer, trace) = execute(ds, &memory, &u, &v)?;
            Ok(Outcome {
                answer,
                truth: m.bilinear(&u, &v),
                trace,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QueryTable { root, outcomes })
}

/// Every `root × root` matrix, in code order (bit `i*root + j` is `M[i,j]`).
pub fn all_matrices(root: usize, caps: &Caps) -> Result<impl Iterator<Item = BitMatrix>> {
    caps.check_matrices(root)?;
    Ok((0..1u64 << (root * root)).map(move |code| BitMatrix::from_u64_square(root, code)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> BitMatrix {
        s.parse().unwrap()
    }

    #[test]
    fn builtin_machines_are_correct() {
        let caps = Caps::default();
        for root in 1..=3 {
            for mat in all_matrices(root, &caps).unwrap().step_by(7) {
                assert_eq!(tabulate(&RowStore { root }, &mat).unwrap().correct(), 1 << (2 * root));
                assert_eq!(
                    tabulate(&VerbatimParity { root }, &mat).unwrap().correct(),
                    1 << (2 * root)
                );
            }
        }
    }

    #[test]
    fn row_store_probes_rows_in_support_of_u() {
        let ds = RowStore { root: 3 };
        let mat = m("101,011,110");
        let mem = ds.build(&mat);
        let (_, trace) = execute(&ds, &mem, &"101".parse().unwrap(), &"111".parse().unwrap()).unwrap();
        assert_eq!(trace, vec![0, 2]);
    }

    #[test]
    fn verbatim_parity_uses_parity_cell_for_all_ones() {
        let ds = VerbatimParity { root: 2 };
        let mat = m("10,11");
        let mem = ds.build(&mat);
        assert_eq!(mem, vec![1, 0, 1, 1, 1]);
        let ones: BitVector = "11".parse().unwrap();
        let (ans, trace) = execute(&ds, &mem, &ones, &ones).unwrap();
        assert_eq!(trace, vec![4]);
        assert!(ans);
    }

    #[test]
    fn flip_of_complement_is_always_correct() {
        let caps = Caps::default();
        let ds = majority_flip(Negated(RowStore { root: 2 }));
        assert_eq!((ds.cells(), ds.max_probes()), (3, 3));
        for mat in all_matrices(2, &caps).unwrap() {
            assert_eq!(tabulate(&ds, &mat).unwrap().correct(), 16);
        }
    }

    #[test]
    fn flip_leaves_good_machines_alone() {
        let caps = Caps::default();
        let ds = majority_flip(RowStore { root: 2 });
        for mat in all_matrices(2, &caps).unwrap() {
            assert!(!ds.flag(&mat));
            let plain = tabulate(&RowStore { root: 2 }, &mat).unwrap();
            let flipped = tabulate(&ds, &mat).unwrap();
            for (a, b) in plain.outcomes.iter().zip(&flipped.outcomes) {
                assert_eq!(a.answer, b.answer);
            }
        }
    }

    #[test]
    fn constant_zero_flipped_reaches_majority() {
        let caps = Caps::default();
        let raw = ConstantAnswer { root: 2, bit: false };
        let ds = majority_flip(raw);
        for mat in all_matrices(2, &caps).unwrap() {
            let p = tabulate(&raw, &mat).unwrap().success();
            let q = tabulate(&ds, &mat).unwrap().success();
            let half = rational::ratio(1, 2);
            let expected = if p < half { rational::one() - &p } else { p };
            assert_eq!(q, expected);
            assert!(q >= half);
        }
    }

    #[test]
    fn machine_names() {
        assert_eq!(machine_by_name("row-store", 3).unwrap().cells(), 3);
        assert_eq!(machine_by_name("verbatim-parity", 3).unwrap().cells(), 10);
        assert_eq!(machine_by_name("partial-row-store:2", 3).unwrap().cells(), 2);
        assert!(machine_by_name("partial-row-store:4", 3).is_err());
        assert!(machine_by_name("hash", 3).is_err());
    }

    #[test]
    fn pair_indexing_roundtrips() {
        for idx in 0..64 {
            let (u, v) = pair_from_index(3, idx);
            assert_eq!(pair_index(3, u.to_u64(), v.to_u64()), idx);
        }
    }
}
