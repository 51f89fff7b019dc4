//! Systematic linear data structures for inner-product queries.
//!
//! The structure stores the input `v ∈ F_2^n` verbatim together with the `r`
//! bits `⟨a_j, v⟩` for a fixed, input-independent basis `a_1..a_r`. A query
//! `q` is answered as `⟨u_q, v⟩ + Σ_{i ∈ I_q} v[i]` where `u_q` lies in the
//! span of the basis; only the probes `I_q` are charged as query time.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::gf2::{solve_linear, BitMatrix, BitVector, Subspace};
use crate::querysets::QuerySet;

/// How one query is answered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    /// Bit `j` selects redundancy basis row `j`; their sum is `u_q`.
    pub coeffs: u64,
    /// Probed coordinates (0-based, ascending).
    pub probes: Vec<usize>,
}

impl Plan {
    pub fn time(&self) -> usize {
        self.probes.len()
    }
}

#[derive(Debug, Clone)]
pub struct SystematicLinearDS {
    n: usize,
    basis: Subspace,
    plans: IndexMap<BitVector, Plan>,
}

impl SystematicLinearDS {
    /// Assembles a structure from explicit plans. Plans are only checked for
    /// shape, not for correctness; see [`verify_exhaustive`].
    pub fn from_parts(basis: Subspace, plans: IndexMap<BitVector, Plan>) -> Result<Self> {
        let n = basis.ambient_dim();
        for (q, plan) in &plans {
            q.check_len(n)?;
            if basis.dim() < 64 && plan.coeffs >> basis.dim() != 0 {
                return Err(Error::InvalidArgument(format!(
                    "plan for {q} selects a basis row beyond dimension {}",
                    basis.dim()
                )));
            }
            if let Some(&bad) = plan.probes.iter().find(|&&i| i >= n) {
                return Err(Error::InvalidArgument(format!("probe {bad} outside 0..{n}")));
            }
        }
        Ok(SystematicLinearDS { n, basis, plans })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Redundancy `r`.
    pub fn r(&self) -> usize {
        self.basis.dim()
    }

    pub fn redundancy_basis(&self) -> &Subspace {
        &self.basis
    }

    pub fn plans(&self) -> &IndexMap<BitVector, Plan> {
        &self.plans
    }

    pub fn plan(&self, q: &BitVector) -> Result<&Plan> {
        self.plans.get(q).ok_or_else(|| Error::UnknownQuery(q.to_string()))
    }

    pub fn plans_mut(&mut self) -> &mut IndexMap<BitVector, Plan> {
        &mut self.plans
    }

    /// Query time `t`: the largest probe set. Reading the `r` precomputed bits
    /// is free in this model.
    pub fn time(&self) -> usize {
        self.plans.values().map(Plan::time).max().unwrap_or(0)
    }

    /// `⟨a_j, v⟩` for every basis row.
    pub fn redundant_bits(&self, v: &BitVector) -> Vec<bool> {
        self.basis.basis().rows().iter().map(|a| a.dot(v)).collect()
    }

    /// The plan's output: selected redundancy bits plus probed coordinates.
    pub fn answer(&self, v: &BitVector, q: &BitVector) -> Result<bool> {
        v.check_len(self.n)?;
        let plan = self.plan(q)?;
        let stored = self.redundant_bits(v);
        Ok(answer_from(&stored, v, plan))
    }

    /// Whether `q == u_q + Σ_{i ∈ I_q} e_i`.
    pub fn plan_is_valid(&self, q: &BitVector, plan: &Plan) -> bool {
        let mut x = self.basis.combination(plan.coeffs);
        for &i in &plan.probes {
            x.flip(i);
        }
        &x == q
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&DsFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DsFile = serde_json::from_str(text)?;
        file.try_into()
    }
}

fn answer_from(stored: &[bool], v: &BitVector, plan: &Plan) -> bool {
    let mut out = false;
    for (j, &bit) in stored.iter().enumerate() {
        if (plan.coeffs >> j) & 1 == 1 {
            out ^= bit;
        }
    }
    plan.probes.iter().fold(out, |acc, &i| acc ^ v.get(i))
}

/// Builds the structure storing `⟨b, v⟩` for the RREF basis `b` of `u`. Each
/// query gets a nearest element of `u` and probes the support of the
/// difference, so `time() == max_q d_H(q, u)`.
pub fn build_plan(q: &QuerySet, u: &Subspace, caps: &Caps) -> Result<SystematicLinearDS> {
    if q.n() != u.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: u.ambient_dim(),
            got: q.n(),
        });
    }
    let mut plans = IndexMap::with_capacity(q.len());
    for query in q {
        let near = u.nearest(query, caps)?;
        let probes = (query ^ &near.point).support();
        plans.insert(
            query.clone(),
            Plan {
                coeffs: near.coeffs,
                probes,
            },
        );
    }
    SystematicLinearDS::from_parts(u.clone(), plans)
}

/// Outcome of [`verify_exhaustive`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Correct,
    /// First failure in enumeration order (`v` counting up, then queries in order).
    Wrong {
        v: BitVector,
        q: BitVector,
    },
}

impl Verdict {
    pub fn is_correct(&self) -> bool {
        matches!(self, Verdict::Correct)
    }
}

/// Checks `answer(v, q) == ⟨q, v⟩` for every `v ∈ F_2^n` and every query.
pub fn verify_exhaustive(ds: &SystematicLinearDS, queries: &[BitVector], caps: &Caps) -> Result<Verdict> {
    caps.check_input_space(ds.n)?;
    let plans = queries
        .iter()
        .map(|q| ds.plan(q).map(|p| (q, p)))
        .collect::<Result<Vec<_>>>()?;
    for x in 0..1u64 << ds.n {
        let v = BitVector::from_u64(ds.n, x);
        let stored = ds.redundant_bits(&v);
        for &(q, plan) in &plans {
            if answer_from(&stored, &v, plan) != q.dot(&v) {
                return Ok(Verdict::Wrong { v, q: q.clone() });
            }
        }
    }
    Ok(Verdict::Correct)
}

/// Number of multisets of size `r` drawn from `2^n` vectors.
fn tuple_count(n: usize, r: usize) -> u128 {
    let pool = 1u128.checked_shl(n as u32).unwrap_or(u128::MAX);
    let mut acc: u128 = 1;
    for i in 0..r as u128 {
        acc = match acc.checked_mul(pool + i) {
            Some(x) => x / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Optimal systematic-linear query time `T(Q, r)` straight from the model's
/// definition, without subspace enumeration or coset walks: every choice of
/// `r` redundancy vectors (as a multiset, so dependent choices cover every
/// dimension up to `r`) and, per query, every linear combination of them.
pub fn t_direct(q: &QuerySet, r: usize, caps: &Caps) -> Result<usize> {
    let n = q.n();
    if r > n {
        return Err(Error::InvalidArgument(format!("r = {r} exceeds n = {n}")));
    }
    if n > 64 {
        return Err(Error::cap("input_space", 1u128 << 64, 1u128 << 63));
    }
    caps.check_tuples(tuple_count(n, r))?;
    let queries: Vec<u64> = q.iter().map(BitVector::to_u64).collect();
    let max_weight = queries.iter().map(|x| x.count_ones() as usize).max().unwrap_or(0);
    if r == 0 {
        return Ok(max_weight);
    }
    let top = 1u64 << n;
    let mut best = max_weight;
    let mut tuple = vec![0u64; r];
    let mut span = vec![0u64; 1 << r];
    'outer: loop {
        // all 2^r combinations of the current tuple
        for c in 1..span.len() {
            let low = c.trailing_zeros() as usize;
            span[c] = span[c & (c - 1)] ^ tuple[low];
        }
        let mut worst = 0;
        for &x in &queries {
            let d = span.iter().map(|&s| (x ^ s).count_ones() as usize).min().unwrap_or(0);
            worst = worst.max(d);
            if worst >= best {
                break;
            }
        }
        best = best.min(worst);
        if best == 0 {
            break;
        }
        // next non-decreasing tuple
        let mut i = r;
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            if tuple[i] + 1 < top {
                tuple[i] += 1;
                for j in i + 1..r {
                    tuple[j] = tuple[i];
                }
                break;
            }
        }
    }
    Ok(best)
}

/// A pair of inputs `v`, `v + y` that the declared reads cannot tell apart
/// although `⟨q*, v⟩ ≠ ⟨q*, v + y⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversaryWitness {
    pub q_star: BitVector,
    pub y: BitVector,
    /// The probe set the witness defeats (0-based coordinates).
    pub probes: Vec<usize>,
}

/// Looks for `y ⟂ span(basis ∪ {e_i : i ∈ probes})` with `⟨y, q*⟩ = 1`.
///
/// Returns `None` when `q*` lies in that span, i.e. the probes suffice.
pub fn extract_adversary(basis: &Subspace, q_star: &BitVector, probes: &[usize]) -> Result<Option<AdversaryWitness>> {
    let n = basis.ambient_dim();
    q_star.check_len(n)?;
    if let Some(&bad) = probes.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidArgument(format!("probe {bad} outside 0..{n}")));
    }
    let units: Vec<BitVector> = probes.iter().map(|&i| BitVector::unit(n, i)).collect();
    let visible = basis.extend(&units)?;
    if visible.contains(q_star) {
        return Ok(None);
    }
    let mut rows = visible.basis().rows().to_vec();
    rows.push(q_star.clone());
    let mut rhs = BitVector::zeros(rows.len());
    rhs.set(rows.len() - 1, true);
    let system = BitMatrix::from_rows(n, rows)?;
    let y = solve_linear(&system, &rhs)?.ok_or_else(|| Error::Invariant("q* outside U' but no separating y".into()))?;
    let mut probes = probes.to_vec();
    probes.sort_unstable();
    probes.dedup();
    Ok(Some(AdversaryWitness {
        q_star: q_star.clone(),
        y,
        probes,
    }))
}

/// What a query algorithm restricted to the redundancy bits and `probes` sees.
pub fn visible_view(basis: &Subspace, probes: &[usize], v: &BitVector) -> Vec<bool> {
    basis
        .basis()
        .rows()
        .iter()
        .map(|a| a.dot(v))
        .chain(probes.iter().map(|&i| v.get(i)))
        .collect()
}

/// A query of the linear model: XOR of some stored functionals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearQuery {
    /// Indices into [`LinearDS::stored`], ascending.
    pub reads: Vec<usize>,
    /// Parallel to `reads`: whether each read value enters the output.
    pub coeffs: Vec<bool>,
}

/// Linear-model structure with `s = n + r` stored functionals: the redundancy
/// rows `a_1..a_r` followed by the coordinate functionals `e_1..e_n`. Every
/// read is charged.
#[derive(Debug, Clone)]
pub struct LinearDS {
    n: usize,
    r: usize,
    stored: Vec<BitVector>,
    queries: IndexMap<BitVector, LinearQuery>,
}

impl LinearDS {
    pub fn space(&self) -> usize {
        self.stored.len()
    }

    pub fn stored(&self) -> &[BitVector] {
        &self.stored
    }

    pub fn queries(&self) -> &IndexMap<BitVector, LinearQuery> {
        &self.queries
    }

    pub fn time(&self) -> usize {
        self.queries.values().map(|q| q.reads.len()).max().unwrap_or(0)
    }

    pub fn redundancy(&self) -> usize {
        self.r
    }

    pub fn encode(&self, v: &BitVector) -> Vec<bool> {
        self.stored.iter().map(|f| f.dot(v)).collect()
    }

    pub fn answer(&self, cells: &[bool], q: &BitVector) -> Result<bool> {
        let lq = self.queries.get(q).ok_or_else(|| Error::UnknownQuery(q.to_string()))?;
        Ok(lq
            .reads
            .iter()
            .zip(&lq.coeffs)
            .fold(false, |acc, (&i, &c)| acc ^ (c & cells[i])))
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Converts a systematic structure into the linear model: read all `r`
/// redundancy cells, then the probed coordinate cells. Reads per query are
/// `r + |I_q| <= t + r`.
pub fn to_linear_model(ds: &SystematicLinearDS) -> LinearDS {
    let n = ds.n;
    let r = ds.r();
    let stored: Vec<BitVector> = ds
        .basis
        .basis()
        .rows()
        .iter()
        .cloned()
        .chain((0..n).map(|i| BitVector::unit(n, i)))
        .collect();
    let queries = ds
        .plans
        .iter()
        .map(|(q, plan)| {
            let reads: Vec<usize> = (0..r).chain(plan.probes.iter().map(|&i| r + i)).collect();
            let coeffs = (0..r)
                .map(|j| (plan.coeffs >> j) & 1 == 1)
                .chain(plan.probes.iter().map(|_| true))
                .collect();
            (q.clone(), LinearQuery { reads, coeffs })
        })
        .collect();
    LinearDS { n, r, stored, queries }
}

/// JSON form: basis rows and coefficients as 0/1 strings, probes as 1-based
/// coordinates.
#[derive(Debug, Serialize, Deserialize)]
struct DsFile {
    n: usize,
    basis: Vec<String>,
    plans: Vec<PlanFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PlanFile {
    query: String,
    coeffs: String,
    probes: Vec<usize>,
}

impl From<&SystematicLinearDS> for DsFile {
    fn from(ds: &SystematicLinearDS) -> Self {
        let r = ds.r();
        DsFile {
            n: ds.n,
            basis: ds.basis.basis().rows().iter().map(ToString::to_string).collect(),
            plans: ds
                .plans
                .iter()
                .map(|(q, p)| PlanFile {
                    query: q.to_string(),
                    coeffs: BitVector::from_u64(r, p.coeffs).to_string(),
                    probes: p.probes.iter().map(|i| i + 1).collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<DsFile> for SystematicLinearDS {
    type Error = Error;

    fn try_from(file: DsFile) -> Result<Self> {
        let rows = file
            .basis
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<BitVector>>>()?;
        let basis = Subspace::span(file.n, &rows)?;
        if basis.basis().rows() != rows.as_slice() {
            return Err(Error::InvalidArgument("basis rows must be in RREF".into()));
        }
        let mut plans = IndexMap::new();
        for p in file.plans {
            let q: BitVector = p.query.parse()?;
            let coeffs: BitVector = p.coeffs.parse()?;
            coeffs.check_len(basis.dim())?;
            let probes = p
                .probes
                .iter()
                .map(|&i| {
                    i.checked_sub(1)
                        .ok_or_else(|| Error::InvalidArgument("probes are 1-based".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            let coeffs = if coeffs.is_empty() { 0 } else { coeffs.to_u64() };
            plans.insert(q, Plan { coeffs, probes });
        }
        SystematicLinearDS::from_parts(basis, plans)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    fn qs(items: &[&str]) -> QuerySet {
        let vs: Vec<BitVector> = items.iter().map(|s| v(s)).collect();
        QuerySet::new(vs[0].len(), vs).unwrap()
    }

    fn example() -> (QuerySet, SystematicLinearDS) {
        let q = qs(&["1100", "1111"]);
        let u = Subspace::span(4, &[v("1100")]).unwrap();
        let ds = build_plan(&q, &u, &Caps::default()).unwrap();
        (q, ds)
    }

    #[test]
    fn build_plan_examples() {
        let caps = Caps::default();
        let (_, ds) = example();
        assert_eq!(
            ds.plan(&v("1100")).unwrap(),
            &Plan {
                coeffs: 1,
                probes: vec![]
            }
        );
        assert_eq!(
            ds.plan(&v("1111")).unwrap(),
            &Plan {
                coeffs: 1,
                probes: vec![2, 3]
            }
        );
        assert_eq!(ds.time(), 2);

        let inside = qs(&["1100", "0011", "1111"]);
        let u = Subspace::span(4, &[v("1100"), v("0011")]).unwrap();
        assert_eq!(build_plan(&inside, &u, &caps).unwrap().time(), 0);

        let w = qs(&["1101", "0100"]);
        let ds = build_plan(&w, &Subspace::zero(4), &caps).unwrap();
        assert_eq!(ds.plan(&v("1101")).unwrap().probes, vec![0, 1, 3]);
        assert_eq!(ds.time(), 3);
    }

    #[test]
    fn answer_examples() {
        let (q, ds) = example();
        for query in &q {
            assert!(!ds.answer(&BitVector::zeros(4), query).unwrap());
        }
        assert!(!ds.answer(&v("1010"), &v("1111")).unwrap());
        assert_eq!(ds.answer(&v("1010"), &v("1100")).unwrap(), v("1100").dot(&v("1010")));
        assert!(matches!(ds.answer(&v("1010"), &v("0001")), Err(Error::UnknownQuery(_))));
    }

    #[test]
    fn verify_detects_a_removed_probe() {
        let caps = Caps::default();
        let (q, mut ds) = example();
        assert_eq!(verify_exhaustive(&ds, q.vectors(), &caps).unwrap(), Verdict::Correct);
        ds.plans_mut().get_mut(&v("1111")).unwrap().probes.pop();
        match verify_exhaustive(&ds, q.vectors(), &caps).unwrap() {
            Verdict::Wrong { v: input, q: query } => {
                assert_eq!(query, v("1111"));
                assert_ne!(ds.answer(&input, &query).unwrap(), query.dot(&input));
            }
            Verdict::Correct => panic!("broken plan passed"),
        }
        assert!(verify_exhaustive(&ds, &[], &caps).unwrap().is_correct());
    }

    #[test]
    fn t_direct_examples() {
        let caps = Caps::default();
        let units = qs(&["100", "010", "001"]);
        assert_eq!(t_direct(&units, 3, &caps).unwrap(), 0);
        assert_eq!(t_direct(&units, 1, &caps).unwrap(), 1);
        assert_eq!(t_direct(&qs(&["1101", "0110"]), 0, &caps).unwrap(), 3);
        assert_eq!(tuple_count(3, 2), 36);
    }

    #[test]
    fn adversary_examples() {
        let basis = Subspace::span(4, &[v("1100")]).unwrap();
        let w = extract_adversary(&basis, &v("0011"), &[2]).unwrap().unwrap();
        assert_eq!(w.y, v("0001"));
        // probes covering support(q* - u) for u = 1100
        assert_eq!(extract_adversary(&basis, &v("1111"), &[2, 3]).unwrap(), None);
        let w = extract_adversary(&Subspace::zero(3), &v("100"), &[]).unwrap().unwrap();
        assert_eq!(w.y, v("100"));
    }

    #[test]
    fn linear_model_examples() {
        let (q, ds) = example();
        let lin = to_linear_model(&ds);
        assert_eq!(lin.space(), 5);
        let sizes: Vec<usize> = q.iter().map(|x| lin.queries()[x].reads.len()).collect();
        assert_eq!(sizes, vec![1, 3]);
        assert!(lin.time() <= ds.time() + ds.r());

        let zero_r = build_plan(&q, &Subspace::zero(4), &Caps::default()).unwrap();
        let lin = to_linear_model(&zero_r);
        for (query, lq) in lin.queries() {
            assert_eq!(lq.reads, zero_r.plan(query).unwrap().probes);
        }
    }

    #[test]
    fn json_roundtrip() {
        let (_, ds) = example();
        let text = ds.to_json().unwrap();
        assert!(text.contains("\"probes\": [\n        3,\n        4\n      ]"));
        let back = SystematicLinearDS::from_json(&text).unwrap();
        assert_eq!(back.plans(), ds.plans());
        assert_eq!(back.redundancy_basis(), ds.redundancy_basis());
    }
}
