//! Python bindings for the wildcard index family: the prepared text,
//! gap patterns, the four index variants, and the reference scanner,
//! exposed as the `wcindex_py` extension module.
//!
//! Errors map onto Python exceptions by class: malformed input is a
//! `ValueError`, an over-budget pattern is a `BudgetError`, a resource
//! refusal (guard, scanner cap, window overflow, bad index bytes) is a
//! `RefusalError`, and I/O failures raise `OSError`.

use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use wcindex::{
    build_index_guarded, load_index, oracle_match, save_index, Error, GapPattern, Index,
    IndexVariant, IndexedText, OccurrenceSet, QueryStats, TextHandle,
};

create_exception!(
    wcindex_py,
    BudgetError,
    PyValueError,
    "The pattern needs more wildcards or slack than the index was built for."
);

create_exception!(
    wcindex_py,
    RefusalError,
    PyRuntimeError,
    "The library refused the operation rather than exceed a resource limit."
);

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Budget { .. } => BudgetError::new_err(e.to_string()),
        Error::Guard { .. }
        | Error::OracleCap { .. }
        | Error::SpecialWindow { .. }
        | Error::Format(_) => RefusalError::new_err(e.to_string()),
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A text prepared for indexing. Positions are 1-indexed; an implicit
/// terminator sits past the last symbol.
#[pyclass(frozen, name = "Text", module = "wcindex_py")]
struct PyText {
    inner: TextHandle,
}

#[pymethods]
impl PyText {
    #[new]
    fn new(data: &str) -> PyResult<PyText> {
        if data.is_empty() {
            return Err(PyValueError::new_err("text must not be empty"));
        }
        Ok(PyText { inner: Arc::new(IndexedText::from_str(data)) })
    }

    /// Length in symbols, excluding the terminator.
    fn __len__(&self) -> usize {
        self.inner.n()
    }

    /// Number of distinct symbols in the text.
    #[getter]
    fn sigma(&self) -> usize {
        self.inner.sigma()
    }

    fn __str__(&self) -> String {
        String::from_utf8_lossy(&self.inner.to_bytes()).into_owned()
    }

    fn __repr__(&self) -> String {
        format!("Text(n={}, sigma={})", self.inner.n(), self.inner.sigma())
    }
}

/// A query pattern: literal pieces joined by `*` (one symbol) or
/// `*{a,b}` (between `a` and `b` symbols). Backslash escapes the
/// metacharacters.
#[pyclass(frozen, name = "Pattern", module = "wcindex_py")]
struct PyPattern {
    inner: GapPattern,
}

#[pymethods]
impl PyPattern {
    #[new]
    fn new(pattern: &str) -> PyResult<PyPattern> {
        GapPattern::parse(pattern)
            .map(|inner| PyPattern { inner })
            .map_err(to_py_err)
    }

    /// Literal pieces between the gaps, in order.
    #[getter]
    fn subpatterns(&self) -> Vec<String> {
        self.inner
            .subpatterns()
            .iter()
            .map(|sub| {
                String::from_utf8_lossy(
                    &sub.iter().map(|s| s.code() as u8).collect::<Vec<u8>>(),
                )
                .into_owned()
            })
            .collect()
    }

    /// `(lower, upper)` length bounds of each gap, in order.
    #[getter]
    fn gaps(&self) -> Vec<(usize, usize)> {
        self.inner.gaps().to_vec()
    }

    /// True when every gap has a fixed length, so matches all share one
    /// span length and queries report start positions only.
    #[getter]
    fn wildcard_only(&self) -> bool {
        self.inner.is_wildcard_only()
    }

    fn __str__(&self) -> String {
        self.inner.render()
    }

    fn __repr__(&self) -> String {
        format!("Pattern({:?})", self.inner.render())
    }
}

fn occurrences_to_py(py: Python<'_>, set: &OccurrenceSet) -> PyResult<Py<PyAny>> {
    match set {
        OccurrenceSet::Starts(v) => Ok(v.clone().into_pyobject(py)?.unbind().into_any()),
        OccurrenceSet::Spans(v) => {
            let pairs: Vec<(usize, usize)> = v.iter().map(|o| (o.start, o.end)).collect();
            Ok(pairs.into_pyobject(py)?.unbind().into_any())
        }
    }
}

fn stats_to_py<'py>(py: Python<'py>, stats: &QueryStats) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("lcp_queries", stats.lcp_queries)?;
    d.set_item("branch_events", stats.branch_events)?;
    d.set_item("active_location_peak", stats.active_location_peak)?;
    d.set_item("heavy_hops_total", stats.heavy_hops_total)?;
    d.set_item("predecessor_uses", stats.predecessor_uses)?;
    d.set_item("fallback_comparisons", stats.fallback_comparisons)?;
    d.set_item("dedup_removed", stats.dedup_removed)?;
    d.set_item("routed_to", stats.routed_to.to_string())?;
    d.set_item("subpattern_starts", stats.subpattern_starts.clone())?;
    Ok(d)
}

fn reject_flag(name: &str, value: Option<usize>, variant: &str) -> PyResult<()> {
    if value.is_some() {
        return Err(PyValueError::new_err(format!(
            "{name} does not apply to the {variant} variant"
        )));
    }
    Ok(())
}

/// One of the four index variants over one text.
#[pyclass(frozen, name = "Index", module = "wcindex_py")]
struct PyIndex {
    inner: Index,
}

#[pymethods]
impl PyIndex {
    /// Builds an index over `text`.
    ///
    /// `variant` is one of `"simple"`, `"art-linear"`, `"tradeoff"`
    /// (requires `beta` and `k`), or `"linear-time"` (requires `k`).
    /// `opt` bounds the optional-wildcard slack, `chi` and `g` override
    /// derived decomposition and window parameters, and `guard` caps
    /// the number of stored strings a build may create.
    #[staticmethod]
    #[pyo3(signature = (text, variant = "simple", *, beta = None, k = None, opt = None, chi = None, g = None, guard = None))]
    #[allow(clippy::too_many_arguments)]
    fn build(
        text: &PyText,
        variant: &str,
        beta: Option<usize>,
        k: Option<usize>,
        opt: Option<usize>,
        chi: Option<usize>,
        g: Option<usize>,
        guard: Option<u64>,
    ) -> PyResult<PyIndex> {
        let kind = match variant {
            "simple" => {
                reject_flag("beta", beta, variant)?;
                reject_flag("k", k, variant)?;
                reject_flag("opt", opt, variant)?;
                reject_flag("chi", chi, variant)?;
                reject_flag("g", g, variant)?;
                IndexVariant::Simple
            }
            "art-linear" => {
                reject_flag("beta", beta, variant)?;
                reject_flag("k", k, variant)?;
                reject_flag("opt", opt, variant)?;
                reject_flag("g", g, variant)?;
                IndexVariant::ArtLinear { chi }
            }
            "tradeoff" => {
                reject_flag("chi", chi, variant)?;
                reject_flag("g", g, variant)?;
                let beta = beta
                    .ok_or_else(|| PyValueError::new_err("the tradeoff variant needs beta"))?;
                let k =
                    k.ok_or_else(|| PyValueError::new_err("the tradeoff variant needs k"))?;
                IndexVariant::Tradeoff { beta, k, opt }
            }
            "linear-time" => {
                reject_flag("beta", beta, variant)?;
                let k = k
                    .ok_or_else(|| PyValueError::new_err("the linear-time variant needs k"))?;
                IndexVariant::LinearTime { k, opt, g, chi }
            }
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown variant {other:?}; expected simple, art-linear, tradeoff, \
                     or linear-time"
                )))
            }
        };
        build_index_guarded(&text.inner, kind, guard)
            .map(|inner| PyIndex { inner })
            .map_err(to_py_err)
    }

    /// Reconstructs an index from bytes produced by `save`.
    #[staticmethod]
    fn load(data: &[u8]) -> PyResult<PyIndex> {
        load_index(data).map(|inner| PyIndex { inner }).map_err(to_py_err)
    }

    /// Serializes the index (text included) to bytes.
    fn save<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &save_index(&self.inner))
    }

    /// All occurrences of `pattern`, ascending: start positions for
    /// wildcard-only patterns, `(start, end)` spans otherwise.
    fn query(&self, py: Python<'_>, pattern: &PyPattern) -> PyResult<Py<PyAny>> {
        let (set, _) = self.inner.query(&pattern.inner).map_err(to_py_err)?;
        occurrences_to_py(py, &set)
    }

    /// As `query`, returning `(occurrences, counters)` where the dict
    /// holds the work counters recorded during the query.
    fn query_with_stats<'py>(
        &self,
        py: Python<'py>,
        pattern: &PyPattern,
    ) -> PyResult<(Py<PyAny>, Bound<'py, PyDict>)> {
        let (set, stats) = self.inner.query(&pattern.inner).map_err(to_py_err)?;
        Ok((occurrences_to_py(py, &set)?, stats_to_py(py, &stats)?))
    }

    /// Which sub-index the composite variant would answer `pattern` on:
    /// `"SPECIAL"`, `"FALLBACK"`, or `"n/a"` for the other variants.
    fn route(&self, pattern: &PyPattern) -> String {
        self.inner.route(&pattern.inner).to_string()
    }

    /// Build-time figures (variant, sizes, parameters) as a dict of
    /// strings, matching the CLI's `stats` output.
    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (key, value) in self.inner.stats_pairs() {
            d.set_item(key, value)?;
        }
        Ok(d)
    }

    /// The parameters the build resolved to, defaults filled in.
    fn resolved<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = self.inner.resolved();
        let d = PyDict::new(py);
        d.set_item("beta", r.beta)?;
        d.set_item("k", r.k)?;
        d.set_item("opt", r.opt)?;
        d.set_item("chi", r.chi)?;
        d.set_item("g", r.g)?;
        Ok(d)
    }

    /// The indexed text.
    #[getter]
    fn text(&self) -> PyText {
        PyText { inner: self.inner.text().clone() }
    }

    fn __repr__(&self) -> String {
        let pairs = self.inner.stats_pairs();
        let variant = pairs
            .iter()
            .find(|(k, _)| *k == "variant")
            .map(|(_, v)| v.as_str())
            .unwrap_or("?");
        format!("Index(variant={variant}, n={})", self.inner.text().n())
    }
}

/// Reference scanner: enumerates every occurrence of `pattern` in
/// `text` directly, with no index. Output matches `Index.query`.
#[pyfunction]
fn scan(py: Python<'_>, text: &PyText, pattern: &PyPattern) -> PyResult<Py<PyAny>> {
    let result = oracle_match(&text.inner, &pattern.inner).map_err(to_py_err)?;
    if pattern.inner.is_wildcard_only() {
        Ok(result.starts.into_pyobject(py)?.unbind().into_any())
    } else {
        let pairs: Vec<(usize, usize)> =
            result.spans.iter().map(|o| (o.start, o.end)).collect();
        Ok(pairs.into_pyobject(py)?.unbind().into_any())
    }
}

#[pymodule]
fn wcindex_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyText>()?;
    m.add_class::<PyPattern>()?;
    m.add_class::<PyIndex>()?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add("BudgetError", m.py().get_type::<BudgetError>())?;
    m.add("RefusalError", m.py().get_type::<RefusalError>())?;
    Ok(())
}
