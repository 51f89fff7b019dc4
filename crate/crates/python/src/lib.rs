//! Python bindings. Vectors cross the boundary as `0`/`1` strings (coordinate
//! 1 leftmost), matrices as lists of row strings, rationals as `"p/q"`.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rigidlab::commsim::{self, CellProbeDs};
use rigidlab::gf2::{self, BitMatrix, BitVector};
use rigidlab::querysets::{self, QuerySource};
use rigidlab::{rational, rigidity, sysds, Caps};

create_exception!(pyrigidlab, RigidlabError, PyException);
create_exception!(pyrigidlab, CapExceeded, RigidlabError);
create_exception!(pyrigidlab, InvariantViolation, RigidlabError);

fn err(e: rigidlab::Error) -> PyErr {
    match e {
        rigidlab::Error::CapExceeded { .. } => CapExceeded::new_err(e.to_string()),
        rigidlab::Error::Invariant(_) => InvariantViolation::new_err(e.to_string()),
        _ => RigidlabError::new_err(e.to_string()),
    }
}

fn vector(s: &str) -> PyResult<BitVector> {
    s.parse().map_err(err)
}

fn matrix(rows: &[String]) -> PyResult<BitMatrix> {
    rows.join(",").parse().map_err(err)
}

fn rows_of(m: &BitMatrix) -> Vec<String> {
    m.rows().iter().map(BitVector::to_string).collect()
}

fn caps(subspaces: Option<u128>, coset_dim: Option<usize>) -> Caps {
    let d = Caps::default();
    Caps {
        subspaces: subspaces.unwrap_or(d.subspaces),
        coset_dim: coset_dim.unwrap_or(d.coset_dim),
        ..d
    }
}

/// A set of distinct vectors of a common length.
#[pyclass(name = "QuerySet", from_py_object)]
#[derive(Clone)]
struct PyQuerySet {
    inner: rigidlab::QuerySet,
}

#[pymethods]
impl PyQuerySet {
    #[new]
    fn new(vectors: Vec<String>) -> PyResult<Self> {
        let vs = vectors.iter().map(|s| vector(s)).collect::<PyResult<Vec<_>>>()?;
        let n = vs
            .first()
            .map(BitVector::len)
            .ok_or_else(|| PyValueError::new_err("empty query set"))?;
        Ok(PyQuerySet {
            inner: rigidlab::QuerySet::new(n, vs).map_err(err)?,
        })
    }

    /// `builtin:upsilon:<root>`, `builtin:prefix:<n>`,
    /// `builtin:random:<n>:<m>:<seed>` or a file path.
    #[staticmethod]
    fn load(source: &str) -> PyResult<Self> {
        let q = QuerySource::parse(source)
            .and_then(|s| s.load(&Caps::default()))
            .map_err(err)?;
        Ok(PyQuerySet { inner: q })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn vectors(&self) -> Vec<String> {
        self.inner.iter().map(BitVector::to_string).collect()
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        format!("QuerySet(n={}, m={})", self.inner.n(), self.inner.len())
    }
}

/// A subspace of F_2^n kept in reduced row-echelon form.
#[pyclass(name = "Subspace", from_py_object)]
#[derive(Clone)]
struct PySubspace {
    inner: rigidlab::Subspace,
}

#[pymethods]
impl PySubspace {
    #[new]
    fn new(n: usize, generators: Vec<String>) -> PyResult<Self> {
        let gs = generators.iter().map(|s| vector(s)).collect::<PyResult<Vec<_>>>()?;
        Ok(PySubspace {
            inner: rigidlab::Subspace::span(n, &gs).map_err(err)?,
        })
    }

    #[staticmethod]
    fn random(n: usize, dim: usize, seed: u64) -> PyResult<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(PySubspace {
            inner: querysets::random_subspace(&mut rng, n, dim).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.ambient_dim()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn basis(&self) -> Vec<String> {
        rows_of(self.inner.basis())
    }

    fn contains(&self, v: &str) -> PyResult<bool> {
        Ok(self.inner.contains(&vector(v)?))
    }

    fn distance(&self, v: &str) -> PyResult<usize> {
        self.inner.distance(&vector(v)?, &Caps::default()).map_err(err)
    }

    fn __repr__(&self) -> String {
        self.inner.to_string()
    }
}

/// A systematic linear data structure built from a subspace.
#[pyclass(name = "SystematicDS")]
struct PySystematicDs {
    inner: sysds::SystematicLinearDS,
}

#[pymethods]
impl PySystematicDs {
    #[getter]
    fn r(&self) -> usize {
        self.inner.r()
    }

    #[getter]
    fn time(&self) -> usize {
        self.inner.time()
    }

    fn answer(&self, v: &str, q: &str) -> PyResult<bool> {
        self.inner.answer(&vector(v)?, &vector(q)?).map_err(err)
    }

    /// Checks every stored query on all 2^n inputs.
    fn verify(&self) -> PyResult<bool> {
        let qs: Vec<BitVector> = self.inner.plans().keys().cloned().collect();
        Ok(sysds::verify_exhaustive(&self.inner, &qs, &Caps::default())
            .map_err(err)?
            .is_correct())
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }
}

#[pyfunction]
#[pyo3(signature = (queries, r, cap_subspaces=None, cap_coset_dim=None))]
fn rigidity_value<'py>(
    py: Python<'py>,
    queries: &PyQuerySet,
    r: usize,
    cap_subspaces: Option<u128>,
    cap_coset_dim: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let rep = rigidity::rigidity_value(&queries.inner, r, &caps(cap_subspaces, cap_coset_dim)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("value", rep.value)?;
    d.set_item("witness", PySubspace { inner: rep.witness })?;
    d.set_item("argmax_query", rep.argmax_query.to_string())?;
    d.set_item("subspaces_scanned", rep.subspaces_scanned)?;
    Ok(d)
}

/// Exact average-distance rigidity as `"p/q"`.
#[pyfunction]
fn strong_rigidity_value(queries: &PyQuerySet, r: usize) -> PyResult<String> {
    let rep = rigidity::strong_rigidity_value(&queries.inner, r, &Caps::default()).map_err(err)?;
    Ok(rational::to_text(&rep.value))
}

/// Optimal probe count with `r` redundant bits, by brute force.
#[pyfunction]
fn t_direct(queries: &PyQuerySet, r: usize) -> PyResult<usize> {
    sysds::t_direct(&queries.inner, r, &Caps::default()).map_err(err)
}

#[pyfunction]
fn build_plan(queries: &PyQuerySet, subspace: &PySubspace) -> PyResult<PySystematicDs> {
    Ok(PySystematicDs {
        inner: sysds::build_plan(&queries.inner, &subspace.inner, &Caps::default()).map_err(err)?,
    })
}

#[pyfunction]
fn fold_set(queries: &PyQuerySet, r: usize) -> PyResult<PyQuerySet> {
    Ok(PyQuerySet {
        inner: rigidity::fold_set(&queries.inner, r).map_err(err)?,
    })
}

#[pyfunction]
fn gen_upsilon(root: usize) -> PyResult<PyQuerySet> {
    Ok(PyQuerySet {
        inner: querysets::gen_upsilon(root, &Caps::default()).map_err(err)?,
    })
}

#[pyfunction]
fn find_far_rank_one<'py>(py: Python<'py>, subspace: &PySubspace) -> PyResult<Bound<'py, PyDict>> {
    let fr = rigidity::find_far_rank_one(&subspace.inner, &Caps::default()).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("a", fr.a.to_string())?;
    d.set_item("b", fr.b.to_string())?;
    d.set_item("certified", fr.certified)?;
    d.set_item("lower_bound", fr.lower_bound)?;
    d.set_item("r_prime", fr.r_prime)?;
    d.set_item("block_distances", fr.block_distances)?;
    Ok(d)
}

#[pyfunction]
fn rank(rows: Vec<String>) -> PyResult<usize> {
    Ok(matrix(&rows)?.rank())
}

/// `vec(M)` as a string.
#[pyfunction]
fn vec(rows: Vec<String>) -> PyResult<String> {
    Ok(gf2::vec(&matrix(&rows)?).to_string())
}

/// `E_{u,v} (-1)^{uᵀMv}` as `"p/q"`.
#[pyfunction]
fn bias(rows: Vec<String>) -> PyResult<String> {
    Ok(rational::to_text(&commsim::bias(&matrix(&rows)?).map_err(err)?))
}

#[pyfunction]
fn moment(root: usize, k: u32) -> PyResult<String> {
    Ok(rational::to_text(
        &commsim::moment(root, k, &Caps::default()).map_err(err)?,
    ))
}

#[pyfunction]
fn count_low_rank(root: usize, k: usize) -> PyResult<u64> {
    commsim::count_low_rank(root, k, &Caps::default()).map_err(err)
}

/// `(exact, bound)` length of the protocol message.
#[pyfunction]
fn message_bits(s: usize, w: usize, size: usize) -> PyResult<(u64, f64)> {
    commsim::message_bits(s, w, size).map_err(err)
}

/// Cell sampling plus the one-way protocol on a built-in machine.
#[pyfunction]
#[pyo3(signature = (machine, matrix_rows, sample_size, trials=100, seed=0, flip=false))]
fn protocol_sim<'py>(
    py: Python<'py>,
    machine: &str,
    matrix_rows: Vec<String>,
    sample_size: usize,
    trials: usize,
    seed: u64,
    flip: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let m = matrix(&matrix_rows)?;
    let base = commsim::machine_by_name(machine, m.nrows()).map_err(err)?;
    let ds: Box<dyn CellProbeDs> = if flip {
        Box::new(commsim::majority_flip(base))
    } else {
        base
    };
    let sample = commsim::cell_sample(&ds, &m, sample_size, trials, seed).map_err(err)?;
    let (msg, success) = commsim::run_protocol(&ds, &m, &sample).map_err(err)?;
    let closed = commsim::closed_form_success(&ds, &m, &sample).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("S", sample.cells.clone())?;
    d.set_item("margin", rational::to_text(&sample.margin))?;
    d.set_item("advantage", rational::to_text(&sample.advantage))?;
    d.set_item("b", msg.b)?;
    d.set_item("message_bits", msg.total_bits)?;
    d.set_item("success", rational::to_text(&success))?;
    d.set_item("closed_form_success", rational::to_text(&closed))?;
    Ok(d)
}

#[pymodule]
fn pyrigidlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("RigidlabError", py.get_type::<RigidlabError>())?;
    m.add("CapExceeded", py.get_type::<CapExceeded>())?;
    m.add("InvariantViolation", py.get_type::<InvariantViolation>())?;
    m.add_class::<PyQuerySet>()?;
    m.add_class::<PySubspace>()?;
    m.add_class::<PySystematicDs>()?;
    m.add_function(wrap_pyfunction!(rigidity_value, m)?)?;
    m.add_function(wrap_pyfunction!(strong_rigidity_value, m)?)?;
    m.add_function(wrap_pyfunction!(t_direct, m)?)?;
    m.add_function(wrap_pyfunction!(build_plan, m)?)?;
    m.add_function(wrap_pyfunction!(fold_set, m)?)?;
    m.add_function(wrap_pyfunction!(gen_upsilon, m)?)?;
    m.add_function(wrap_pyfunction!(find_far_rank_one, m)?)?;
    m.add_function(wrap_pyfunction!(rank, m)?)?;
    m.add_function(wrap_pyfunction!(vec, m)?)?;
    m.add_function(wrap_pyfunction!(bias, m)?)?;
    m.add_function(wrap_pyfunction!(moment, m)?)?;
    m.add_function(wrap_pyfunction!(count_low_rank, m)?)?;
    m.add_function(wrap_pyfunction!(message_bits, m)?)?;
    m.add_function(wrap_pyfunction!(protocol_sim, m)?)?;
    Ok(())
}
