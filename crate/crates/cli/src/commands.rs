//! One function per subcommand.

use std::path::Path;

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use rigidlab::commsim::{self, CellProbeDs};
use rigidlab::gf2::{self, BitMatrix, BitVector, Subspace};
use rigidlab::querysets::{self, QuerySource};
use rigidlab::rational;
use rigidlab::rigidity;
use rigidlab::sysds;
use rigidlab::{Caps, QuerySet};

use crate::report::{int, Output, Record};
use crate::CliError;

fn load(source: &str, caps: &Caps) -> Result<QuerySet, CliError> {
    Ok(QuerySource::parse(source)?.load(caps)?)
}

fn rows_text(s: &Subspace) -> Value {
    s.basis()
        .rows()
        .iter()
        .map(|r| r.to_string())
        .collect::<Vec<_>>()
        .into()
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

#[derive(Debug, Args, Serialize)]
pub struct RigidityArgs {
    /// Query set: a file or builtin:upsilon:<root>, builtin:prefix:<n>,
    /// builtin:random:<n>:<m>:<seed>.
    #[arg(long)]
    pub queries: String,
    /// Subspace dimension.
    #[arg(long)]
    pub r: usize,
}

pub fn rigidity(a: &RigidityArgs, caps: &Caps) -> Result<Output, CliError> {
    let q = load(&a.queries, caps)?;
    let rep = rigidity::rigidity_value(&q, a.r, caps)?;
    let mut out = Output::default();
    out.set("queries", q.name().unwrap_or(&a.queries));
    out.set("n", q.n());
    out.set("m", q.len());
    out.set("r", a.r);
    out.set("value", rep.value);
    out.set("witness", rows_text(&rep.witness));
    out.set("argmax_query", rep.argmax_query.to_string());
    out.set("subspaces_scanned", int(rep.subspaces_scanned));
    Ok(out)
}

pub fn strong_rigidity(a: &RigidityArgs, caps: &Caps) -> Result<Output, CliError> {
    let q = load(&a.queries, caps)?;
    let rep = rigidity::strong_rigidity_value(&q, a.r, caps)?;
    let mut out = Output::default();
    out.set("queries", q.name().unwrap_or(&a.queries));
    out.set("n", q.n());
    out.set("m", q.len());
    out.set("r", a.r);
    out.set("value", rational::to_text(&rep.value));
    out.set("witness", rows_text(&rep.witness));
    out.set("subspaces_scanned", int(rep.subspaces_scanned));
    Ok(out)
}

#[derive(Debug, Args, Serialize)]
pub struct EquivalenceArgs {
    /// Expected vector length; checked against the query set.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub queries: String,
}

pub fn equivalence_check(a: &EquivalenceArgs, caps: &Caps) -> Result<Output, CliError> {
    let q = load(&a.queries, caps)?;
    if let Some(n) = a.n {
        if n != q.n() {
            return Err(CliError::Usage(format!(
                "--n {n} but the query set has length {}",
                q.n()
            )));
        }
    }
    let rig = rigidity::rigidity_value(&q, a.r, caps)?;
    let t = sysds::t_direct(&q, a.r, caps)?;
    let ds = sysds::build_plan(&q, &rig.witness, caps)?;
    let verdict = sysds::verify_exhaustive(&ds, q.vectors(), caps)?;
    let mut out = Output::default();
    out.set("queries", q.name().unwrap_or(&a.queries));
    out.set("n", q.n());
    out.set("m", q.len());
    out.set("r", a.r);
    out.set("rig_value", rig.value);
    out.set("t_direct", t);
    out.set("equal", rig.value == t);
    out.set("plan_time", ds.time());
    out.set("plan_verified", verdict.is_correct());
    out.check(rig.value == t, || format!("RIG = {} but T = {t}", rig.value));
    out.check(verdict.is_correct(), || {
        "plan built from the witness answers wrongly".into()
    });
    out.check(ds.time() == rig.value, || {
        format!("plan time {} != RIG {}", ds.time(), rig.value)
    });
    Ok(out)
}

#[derive(Debug, Args, Serialize)]
pub struct FoldArgs {
    #[arg(long)]
    pub queries: String,
    #[arg(long)]
    pub r: usize,
}

pub fn fold(a: &FoldArgs, caps: &Caps) -> Result<Output, CliError> {
    let s = load(&a.queries, caps)?;
    let folded = rigidity::fold_set(&s, a.r)?;
    let rig_s = rigidity::rigidity_value(&s, a.r, caps)?.value;
    let rig_f = rigidity::rigidity_value(&folded, a.r, caps)?.value;
    let floor = ceil_div(rig_s * a.r, s.n());
    let mut out = Output::default();
    out.set("queries", s.name().unwrap_or(&a.queries));
    out.set("n", s.n());
    out.set("m", s.len());
    out.set("r", a.r);
    out.set("folded_n", folded.n());
    out.set("folded_m", folded.len());
    out.set("rig", rig_s);
    out.set("rig_folded", rig_f);
    out.set("floor", floor);
    out.set("floor_formula", "ceil(rig*r/n)");
    out.set("holds", rig_f >= floor);
    out.set("folded", folded.iter().map(|v| v.to_string()).collect::<Vec<_>>());
    out.check(rig_f >= floor, || format!("folded rigidity {rig_f} below {floor}"));
    Ok(out)
}

#[derive(Debug, Args, Serialize)]
pub struct FarRankOneArgs {
    /// Length of vec(M); must be a perfect square.
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    /// Dimension of the random subspace V.
    #[arg(long, default_value_t = 2)]
    pub r: usize,
    /// Read V's generators from this file instead.
    #[arg(long)]
    pub basis: Option<String>,
}

pub fn far_rank_one(a: &FarRankOneArgs, seed: u64, caps: &Caps) -> Result<Output, CliError> {
    let v = match &a.basis {
        Some(path) => Subspace::from_text(&std::fs::read_to_string(path)?)?,
        None => querysets::random_subspace(&mut ChaCha8Rng::seed_from_u64(seed), a.n, a.r)?,
    };
    let fr = rigidity::find_far_rank_one(&v, caps)?;
    let point = gf2::vec(&BitMatrix::outer(&fr.a, &fr.b));
    let recomputed = v.distance(&point, caps)?;
    let mut out = Output::default();
    out.set("n", v.ambient_dim());
    out.set("dim", v.dim());
    out.set("basis", rows_text(&v));
    out.set("r_prime", fr.r_prime);
    out.set("blocks", fr.blocks);
    out.set("block_len", fr.block_len);
    out.set("block_distances", fr.block_distances.clone());
    out.set("a", fr.a.to_string());
    out.set("b", fr.b.to_string());
    out.set("certified", fr.certified);
    out.set("recomputed", recomputed);
    out.set("lower_bound", fr.lower_bound);
    out.set("lower_bound_formula", "ceil(sum(block_distances)*sqrt(n)/(2*r_prime))");
    out.set("holds", recomputed == fr.certified && fr.certified >= fr.lower_bound);
    out.check(recomputed == fr.certified, || {
        format!("certified {} but distance {recomputed}", fr.certified)
    });
    out.check(fr.certified >= fr.lower_bound, || {
        format!("certified {} below {}", fr.certified, fr.lower_bound)
    });
    Ok(out)
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    /// builtin:upsilon:<root>, builtin:prefix:<n> or builtin:random:<n>:<m>:<seed>.
    pub source: String,
}

pub fn gen_queryset_text(a: &GenArgs, caps: &Caps) -> Result<String, CliError> {
    Ok(load(&a.source, caps)?.to_text())
}

pub fn gen_queryset(a: &GenArgs, path: &Path, caps: &Caps) -> Result<Output, CliError> {
    let q = load(&a.source, caps)?;
    querysets::save_queryset(&q, path)?;
    let mut out = Output::default();
    out.set("source", a.source.clone());
    out.set("name", q.name().unwrap_or_default());
    out.set("n", q.n());
    out.set("m", q.len());
    out.set("path", path.display().to_string());
    if let QuerySource::Upsilon(root) = QuerySource::parse(&a.source)? {
        out.set("upsilon_size", int(querysets::upsilon_size(root)));
        out.set("upsilon_size_nonzero", int(querysets::upsilon_size_nonzero(root)));
    }
    Ok(out)
}

#[derive(Debug, Args, Serialize)]
pub struct ProtocolArgs {
    #[arg(long, default_value_t = 2)]
    pub root: usize,
    /// row-store, verbatim-parity, constant-0 or partial-row-store:<rows>.
    #[arg(long, default_value = "row-store")]
    pub machine: String,
    /// Add the per-matrix majority flag cell.
    #[arg(long)]
    pub flip: bool,
    /// Matrix rows separated by commas; a seeded random matrix when absent.
    #[arg(long)]
    pub matrix: Option<String>,
    /// |S|; defaults to one cell (none for machines without cells).
    #[arg(long)]
    pub sample_size: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Number of independent queries for the direct-sum success.
    #[arg(long, default_value_t = 2)]
    pub k: u32,
}

pub fn protocol_sim(a: &ProtocolArgs, seed: u64, caps: &Caps) -> Result<Output, CliError> {
    let base = commsim::machine_by_name(&a.machine, a.root)?;
    let ds: Box<dyn CellProbeDs> = if a.flip {
        Box::new(commsim::majority_flip(base))
    } else {
        base
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = match &a.matrix {
        Some(text) => text.parse::<BitMatrix>()?,
        None => {
            let entries = a.root * a.root;
            let mask = if entries == 64 { u64::MAX } else { (1u64 << entries) - 1 };
            BitMatrix::from_u64_square(a.root, rng.gen::<u64>() & mask)
        }
    };
    if m.nrows() != a.root || m.ncols() != a.root {
        return Err(CliError::Usage(format!("--matrix must be {0}x{0}", a.root)));
    }
    let ledger = commsim::BiasLedger::of_machine(&ds, caps)?;
    let sample = commsim::cell_sample(&ds, &m, a.sample_size.unwrap_or(ds.cells().min(1)), a.trials, rng.gen())?;
    let (msg, success) = commsim::run_protocol(&ds, &m, &sample)?;
    let closed = commsim::closed_form_success(&ds, &m, &sample)?;
    let (exact, bound) = commsim::message_bits(ds.cells(), ds.word_bits(), sample.cells.len())?;
    let params = commsim::GameParams::new(a.root, a.k as usize, ds.cells(), ds.word_bits());

    let mut out = Output::default();
    out.set("machine", ds.name());
    out.set("root", a.root);
    out.set("s", ds.cells());
    out.set("w", ds.word_bits());
    out.set("t", ds.max_probes());
    out.set_real("alpha", params.alpha, "2*(w+log2(s*w/n))");
    out.set("per_M", ledger.per_m.iter().map(rational::to_text).collect::<Vec<_>>());
    out.set("global_advantage", rational::to_text(&ledger.global));
    out.set("matrix", m.rows().iter().map(BitVector::to_string).collect::<Vec<_>>());
    out.set("advantage", rational::to_text(&sample.advantage));
    out.set(
        "sample",
        json!({
            "S": sample.cells,
            "q1": sample.q1.len(),
            "q2": sample.q2.len(),
            "margin": rational::to_text(&sample.margin),
            "trials": sample.trials,
        }),
    );
    let lemma = &sample.lemma;
    out.set(
        "sampling_lemma",
        json!({
            "beta": lemma.beta,
            "beta_formula": "2*(w+log2(s*w/n))",
            "hypothesis_holds": lemma.hypothesis_holds,
            "lemma_size": lemma.lemma_size,
            "lemma_size_formula": "ceil(n/(128*beta))",
            "required_margin": lemma.required_margin,
            "required_margin_formula": "advantage*2^(-root/16)",
            "margin_met": lemma.margin_met,
        }),
    );
    out.set("b", u8::from(msg.b));
    out.set("location_code", int(msg.location_code));
    out.set("message_bits", msg.total_bits);
    out.set_real("message_bits_bound", bound, "1+|S|*w+|S|*log2(e*s/|S|)");
    out.set_real("n_over_10", (a.root * a.root) as f64 / 10.0, "n/10");
    out.set("success", rational::to_text(&success));
    out.set("closed_form_success", rational::to_text(&closed));
    match commsim::direct_sum_success(&ledger, a.k) {
        Ok(d) => {
            out.set("direct_sum_k", a.k);
            out.set("direct_sum_success", rational::to_text(&d.success));
            out.set("direct_sum_floor", rational::to_text(&d.convexity_floor));
        }
        Err(rigidlab::Error::NegativeAdvantage(why)) => {
            out.set("direct_sum_k", a.k);
            out.set("direct_sum_success", Value::Null);
            out.set(
                "direct_sum_note",
                format!("negative advantage ({why}); rerun with --flip"),
            );
        }
        Err(e) => return Err(e.into()),
    }
    out.check(success == closed, || {
        format!(
            "success {} != closed form {}",
            rational::to_text(&success),
            rational::to_text(&closed)
        )
    });
    out.check(exact == msg.total_bits, || {
        format!("message has {} bits, expected {exact}", msg.total_bits)
    });
    out.check(exact as f64 <= bound + 1e-9, || {
        format!("message bits {exact} above bound {bound}")
    });
    Ok(out)
}

#[derive(Debug, Args, Serialize)]
pub struct DiscrepancyArgs {
    #[arg(long, default_value_t = 2)]
    pub root: usize,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Random rectangles to test (each matrix and tuple kept with probability 1/2).
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
}

pub fn discrepancy(a: &DiscrepancyArgs, seed: u64, caps: &Caps) -> Result<Output, CliError> {
    let (root, k) = (a.root, a.k);
    let moment = commsim::moment(root, k, caps)?;
    let bound = commsim::moment_bound(root, k);
    let pass = rational::le_real(&moment, bound);
    let low = commsim::count_low_rank(root, k as usize, caps)?;
    let low_bound = 2 * k as usize * root;
    let mut out = Output::default();
    out.set("root", root);
    out.set("k", k);
    out.set("moment_regime", k as usize <= root);
    out.set("moment", rational::to_text(&moment));
    out.set_real("bound", bound, "2*2^(-9*k*root/20)");
    out.set("pass", pass);
    out.set("low_rank_count", low);
    out.set(
        "low_rank_bound",
        if low_bound < 128 {
            int(1u128 << low_bound)
        } else {
            format!("2^{low_bound}").into()
        },
    );
    if k as usize <= root {
        out.check(pass, || format!("moment {} above {bound}", rational::to_text(&moment)));
    }
    out.check(low_bound >= 64 || low <= 1u64 << low_bound, || {
        format!("{low} matrices of rank <= {k}")
    });

    let mut rows = Vec::new();
    if a.trials > 0 {
        let matrices: Vec<BitMatrix> = commsim::all_matrices(root, caps)?.collect();
        let tuples = commsim::all_tuples(root, k as usize, caps)?;
        caps.check_tuples(matrices.len() as u128 * tuples.len() as u128)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for trial in 0..a.trials {
            let sa: Vec<BitMatrix> = matrices.iter().filter(|_| rng.gen::<bool>()).cloned().collect();
            let sb: Vec<commsim::PairTuple> = tuples.iter().filter(|_| rng.gen::<bool>()).cloned().collect();
            let disc = commsim::rectangle_discrepancy(root, k as usize, &sa, &sb, caps)?;
            let (per_rect, squared) = commsim::discrepancy_within_bounds(&disc, root, k, caps)?;
            out.check(squared, || {
                format!("rectangle {trial}: squared discrepancy above the moment")
            });
            let mut row = Record::new();
            row.insert("rectangle".into(), trial.into());
            row.insert("size_a".into(), sa.len().into());
            row.insert("size_b".into(), sb.len().into());
            row.insert("discrepancy".into(), rational::to_text(&disc).into());
            row.insert("within_bound".into(), per_rect.into());
            row.insert("square_within_moment".into(), squared.into());
            rows.push(row);
        }
    }
    out.set(
        "rectangles",
        rows.iter().cloned().map(Value::Object).collect::<Vec<_>>(),
    );
    Ok(out)
}

#[derive(Debug, Args, Serialize)]
pub struct IdentityArgs {
    #[arg(long, default_value_t = 3)]
    pub root: usize,
}

pub fn identity_checks(a: &IdentityArgs, caps: &Caps) -> Result<Output, CliError> {
    let root = a.root;
    if root == 0 {
        return Err(CliError::Usage("--root must be at least 1".into()));
    }
    let matrices: Vec<BitMatrix> = commsim::all_matrices(root, caps)?.collect();
    let mut rows: Vec<(&str, u64, u64)> = Vec::new();

    let ups = querysets::gen_upsilon(root, caps)?;
    rows.push((
        "upsilon_size",
        1,
        u64::from(ups.len() as u128 != querysets::upsilon_size(root)),
    ));
    let bad_rank = ups
        .iter()
        .filter(|q| gf2::mat(q).map_or(true, |m| m.rank() > 1))
        .count();
    rows.push(("upsilon_rank_at_most_1", ups.len() as u64, bad_rank as u64));

    let (mut cases, mut bad) = (0u64, 0u64);
    for m in &matrices {
        for u in 0u64..1 << root {
            for v in 0u64..1 << root {
                let (u, v) = (BitVector::from_u64(root, u), BitVector::from_u64(root, v));
                for i in 0..root {
                    for j in 0..root {
                        cases += 1;
                        bad += u64::from(!querysets::four_query_identity(m, &u, &v, i, j)?);
                    }
                }
            }
        }
    }
    rows.push(("four_query_identity", cases, bad));

    let mut bad = 0u64;
    for m in &matrices {
        bad += u64::from(commsim::bias_enumerated(m)? != commsim::bias_from_rank(m)?);
    }
    rows.push(("bias_equals_2^-rank", matrices.len() as u64, bad));

    let bad = matrices
        .iter()
        .filter(|m| gf2::mat(&gf2::vec(m)).ok().as_ref() != Some(*m))
        .count();
    rows.push(("mat_vec_roundtrip", matrices.len() as u64, bad as u64));

    let mut out = Output::default();
    out.set("root", root);
    let mut table = Vec::new();
    for (check, cases, failures) in rows {
        out.check(failures == 0, || format!("{check}: {failures} of {cases} cases failed"));
        let mut row = Record::new();
        row.insert("check".into(), check.into());
        row.insert("cases".into(), cases.into());
        row.insert("failures".into(), failures.into());
        row.insert("pass".into(), (failures == 0).into());
        table.push(row);
    }
    out.set("checks", table.iter().cloned().map(Value::Object).collect::<Vec<_>>());
    out.rows = Some(table);
    Ok(out)
}
