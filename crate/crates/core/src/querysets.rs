//! Query sets: generators, builtins and the text file form.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::gf2::{self, BitMatrix, BitVector, Subspace};

/// An ordered list of distinct vectors of a common length `n`.
///
/// Order is kept so reports are reproducible; equality ignores it.
#[derive(Clone)]
pub struct QuerySet {
    n: usize,
    vectors: Vec<BitVector>,
    name: Option<String>,
}

impl QuerySet {
    /// Validates lengths, distinctness and non-emptiness.
    pub fn new(n: usize, vectors: Vec<BitVector>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidArgument("a query set needs at least one vector".into()));
        }
        let mut seen = HashMap::new();
        for (i, v) in vectors.iter().enumerate() {
            v.check_len(n)?;
            if let Some(first) = seen.insert(v, i) {
                return Err(Error::DuplicateVector {
                    first_line: first + 1,
                    line: i + 1,
                });
            }
        }
        Ok(QuerySet { n, vectors, name: None })
    }

    /// Keeps the first occurrence of every vector.
    pub fn dedup(n: usize, vectors: impl IntoIterator<Item = BitVector>) -> Result<Self> {
        let mut seen = HashSet::new();
        let kept = vectors.into_iter().filter(|v| seen.insert(v.clone())).collect();
        Self::new(n, kept)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[BitVector] {
        &self.vectors
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BitVector> {
        self.vectors.iter()
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        self.vectors.contains(v)
    }

    pub fn max_weight(&self) -> usize {
        self.vectors.iter().map(BitVector::weight).max().unwrap_or(0)
    }

    /// The vectors as rows of the matrix `M_Q`.
    pub fn to_matrix(&self) -> BitMatrix {
        BitMatrix::from_rows(self.n, self.vectors.clone()).expect("uniform lengths")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(name) = &self.name {
            out.push_str("# ");
            out.push_str(name);
            out.push('\n');
        }
        for v in &self.vectors {
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses the text format; duplicates are rejected naming both lines.
    pub fn from_text(text: &str) -> Result<Self> {
        let rows = gf2::parse_rows(text)?;
        let n = rows
            .first()
            .map(|(_, v)| v.len())
            .ok_or_else(|| Error::InvalidArgument("query file contains no vectors".into()))?;
        let mut seen: HashMap<&BitVector, usize> = HashMap::new();
        for (line, v) in &rows {
            if let Some(&first_line) = seen.get(v) {
                return Err(Error::DuplicateVector {
                    first_line,
                    line: *line,
                });
            }
            seen.insert(v, *line);
        }
        Self::new(n, rows.into_iter().map(|(_, v)| v).collect())
    }
}

impl PartialEq for QuerySet {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.len() == other.len() && self.vectors.iter().all(|v| other.contains(v))
    }
}

impl Eq for QuerySet {}

impl fmt::Debug for QuerySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuerySet")
            .field("n", &self.n)
            .field("name", &self.name)
            .field("vectors", &self.vectors)
            .finish()
    }
}

impl<'a> IntoIterator for &'a QuerySet {
    type Item = &'a BitVector;
    type IntoIter = std::slice::Iter<'a, BitVector>;

    fn into_iter(self) -> Self::IntoIter {
        self.vectors.iter()
    }
}

pub fn load_queryset(path: impl AsRef<Path>) -> Result<QuerySet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let q = QuerySet::from_text(&text)?;
    Ok(match path.file_stem() {
        Some(stem) if q.name.is_none() => q.with_name(stem.to_string_lossy()),
        _ => q,
    })
}

pub fn save_queryset(q: &QuerySet, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, q.to_text())?;
    Ok(())
}

/// `Υ = { vec(u vᵀ) : u, v ∈ F_2^root }`, zero vector included, generated with
/// `u` in the outer loop and both counting up numerically.
pub fn gen_upsilon(root: usize, caps: &Caps) -> Result<QuerySet> {
    if root == 0 {
        return Err(Error::InvalidArgument("root must be at least 1".into()));
    }
    caps.check_input_space(2 * root)?;
    let side = 1u64 << root;
    let all = (0..side).flat_map(|u| {
        (0..side).map(move |v| BitMatrix::outer(&BitVector::from_u64(root, u), &BitVector::from_u64(root, v)).to_vec())
    });
    Ok(QuerySet::dedup(root * root, all)?.with_name(format!("upsilon:{root}")))
}

/// Distinct elements of Υ: `(2^root - 1)^2` nonzero rank-one matrices plus zero.
pub fn upsilon_size(root: usize) -> u128 {
    let side = (1u128 << root) - 1;
    side * side + 1
}

/// The count `2^{2 root} - 2^{root+1} + 1`, which leaves out the zero matrix.
pub fn upsilon_size_nonzero(root: usize) -> u128 {
    (1u128 << (2 * root)) - (1u128 << (root + 1)) + 1
}

/// Prefix-sum queries `1^i 0^{n-i}` for `1 <= i <= n`.
pub fn gen_prefix(n: usize) -> Result<QuerySet> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let vs = (1..=n).map(|i| BitVector::from_indices(n, 0..i)).collect();
    Ok(QuerySet::new(n, vs)?.with_name(format!("prefix:{n}")))
}

/// `m` distinct uniform vectors of length `n`, reproducible from `seed`.
pub fn gen_random(n: usize, m: usize, seed: u64) -> Result<QuerySet> {
    if n < 128 && (m as u128) > (1u128 << n) {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {m} distinct vectors from F_2^{n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(m);
    let mut out = Vec::with_capacity(m);
    while out.len() < m {
        let v = random_vector(&mut rng, n);
        if seen.insert(v.clone()) {
            out.push(v);
        }
    }
    Ok(QuerySet::new(n, out)?.with_name(format!("random:{n}:{m}:{seed}")))
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> BitVector {
    BitVector::from_bools((0..n).map(|_| rng.gen::<bool>()))
}

/// A uniformly random `dim`-dimensional subspace of F_2^n: spans random
/// vectors until the dimension is reached.
pub fn random_subspace<R: Rng + ?Sized>(rng: &mut R, n: usize, dim: usize) -> Result<Subspace> {
    if dim > n {
        return Err(Error::InvalidArgument(format!("dimension {dim} exceeds {n}")));
    }
    let mut u = Subspace::zero(n);
    while u.dim() < dim {
        let v = random_vector(rng, n);
        if !u.contains(&v) {
            u = u.extend([&v])?;
        }
    }
    Ok(u)
}

/// Checks `uᵀMv + (u+e_i)ᵀMv + uᵀM(v+e_j) + (u+e_i)ᵀM(v+e_j) = M[i,j]`
/// (0-based `i`, `j`).
pub fn four_query_identity(m: &BitMatrix, u: &BitVector, v: &BitVector, i: usize, j: usize) -> Result<bool> {
    u.check_len(m.nrows())?;
    v.check_len(m.ncols())?;
    if i >= m.nrows() || j >= m.ncols() {
        return Err(Error::InvalidArgument(format!(
            "entry ({i}, {j}) outside a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut ui = u.clone();
    ui.flip(i);
    let mut vj = v.clone();
    vj.flip(j);
    let sum = m.bilinear(u, v) ^ m.bilinear(&ui, v) ^ m.bilinear(u, &vj) ^ m.bilinear(&ui, &vj);
    Ok(sum == m.get(i, j))
}

/// Where a query set comes from: a file or a `builtin:` URI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuerySource {
    Upsilon(usize),
    Prefix(usize),
    Random { n: usize, m: usize, seed: u64 },
    File(String),
}

impl QuerySource {
    /// `builtin:upsilon:<root>`, `builtin:prefix:<n>`,
    /// `builtin:random:<n>:<m>:<seed>`, or anything else as a path.
    pub fn parse(source: &str) -> Result<Self> {
        let Some(rest) = source.strip_prefix("builtin:") else {
            return Ok(QuerySource::File(source.to_string()));
        };
        let parts: Vec<&str> = rest.split(':').collect();
        let num = |s: &str| -> Result<u64> {
            s.parse()
                .map_err(|_| Error::InvalidArgument(format!("bad number {s:?} in {source:?}")))
        };
        match parts.as_slice() {
            ["upsilon", root] => Ok(QuerySource::Upsilon(num(root)? as usize)),
            ["prefix", n] => Ok(QuerySource::Prefix(num(n)? as usize)),
            ["random", n, m, seed] => Ok(QuerySource::Random {
                n: num(n)? as usize,
                m: num(m)? as usize,
                seed: num(seed)?,
            }),
            _ => Err(Error::InvalidArgument(format!("unknown builtin query set {source:?}"))),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            QuerySource::Random { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    pub fn load(&self, caps: &Caps) -> Result<QuerySet> {
        match self {
            QuerySource::Upsilon(root) => gen_upsilon(*root, caps),
            QuerySource::Prefix(n) => gen_prefix(*n),
            QuerySource::Random { n, m, seed } => gen_random(*n, *m, *seed),
            QuerySource::File(path) => load_queryset(path),
        }
    }
}
