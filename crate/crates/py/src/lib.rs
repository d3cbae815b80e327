//! Python bindings for the nectk toolkit.
//!
//! Exposes the two main types (`Network`, `Code`) plus module-level
//! functions for family construction, probability bounds, and Monte-Carlo
//! estimation. Matrices come back as lists of lists, structured reports as
//! JSON strings (`json.loads` them on the Python side).

use std::collections::HashMap;
use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use nectk::decoder;
use nectk::ff::FieldSpec;
use nectk::metrics;
use nectk::nec_code::NecCode;
use nectk::randomized::{self, Target, TrialConfig};
use nectk::samples;
use nectk::topology::{EnumLimit, ErrorPattern};
use nectk::variable_rate::{self, KStrategy, ReductionVector, VariableRateError};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// (decoded message or None on ties, minimal weight, all minimizers)
type DecodeTuple = (Option<Vec<u64>>, usize, Vec<Vec<u64>>);
/// per-sink (decoded message or None, minimal weight)
type SinkOutcomes = HashMap<String, (Option<Vec<u64>>, usize)>;

fn vr_err(e: VariableRateError) -> PyErr {
    match e {
        VariableRateError::ConstructionFailed { .. }
        | VariableRateError::NoValidK { .. }
        | VariableRateError::FamilyStep { .. } => runtime_err(e),
        other => value_err(other),
    }
}

fn field_spec(p: u64) -> PyResult<FieldSpec> {
    FieldSpec::new(p).map_err(value_err)
}

fn enum_limit(max_channels: usize, max_delta: usize) -> EnumLimit {
    EnumLimit {
        max_channels,
        max_delta,
    }
}

fn parse_strategy(name: &str) -> PyResult<KStrategy> {
    match name {
        "deterministic" => Ok(KStrategy::Deterministic),
        "random" => Ok(KStrategy::Random),
        other => Err(value_err(format!(
            "unknown strategy {other:?}; use 'deterministic' or 'random'"
        ))),
    }
}

/// Single-source multicast DAG with unit-capacity channels.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Network {
    inner: Arc<nectk::Network>,
}

impl Network {
    fn sink_index(&self, name: &str) -> PyResult<usize> {
        let idx = self.inner.node_index(name).map_err(value_err)?;
        if self.inner.is_sink(idx) {
            Ok(idx)
        } else {
            Err(value_err(format!("node {name} is not a sink")))
        }
    }

    fn pattern(&self, ids: Vec<String>) -> PyResult<ErrorPattern> {
        let refs: Vec<&str> = ids.iter().map(|s| s.as_str()).collect();
        ErrorPattern::from_ids(&self.inner, &refs).map_err(value_err)
    }
}

#[pymethods]
impl Network {
    /// Parse a network from its JSON document.
    #[new]
    fn new(json: &str) -> PyResult<Self> {
        Ok(Network {
            inner: Arc::new(nectk::Network::from_json_str(json).map_err(value_err)?),
        })
    }

    /// The (N, k) combination network.
    #[staticmethod]
    fn combination(n: usize, k: usize) -> PyResult<Self> {
        if k < 1 || k > n {
            return Err(value_err("need 1 <= k <= n"));
        }
        Ok(Network {
            inner: Arc::new(nectk::Network::combination(n, k)),
        })
    }

    /// The built-in two-sink relay sample network.
    #[staticmethod]
    fn relay_sample() -> Self {
        Network {
            inner: Arc::new(samples::relay_network()),
        }
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn channel_count(&self) -> usize {
        self.inner.channel_count()
    }

    #[getter]
    fn source(&self) -> String {
        self.inner.node_name(self.inner.source()).to_string()
    }

    #[getter]
    fn sinks(&self) -> Vec<String> {
        self.inner
            .sinks()
            .iter()
            .map(|&t| self.inner.node_name(t).to_string())
            .collect()
    }

    #[getter]
    fn channel_ids(&self) -> Vec<String> {
        self.inner.channels().iter().map(|c| c.id.clone()).collect()
    }

    fn min_cut(&self, sink: &str) -> PyResult<usize> {
        let t = self.sink_index(sink)?;
        self.inner.min_cut(t).map_err(value_err)
    }

    /// Rank of an error pattern (given as channel ids) at a sink.
    fn pattern_rank(&self, channels: Vec<String>, sink: &str) -> PyResult<usize> {
        let t = self.sink_index(sink)?;
        let pattern = self.pattern(channels)?;
        self.inner.pattern_rank(&pattern, t).map_err(value_err)
    }

    /// |R_t(delta)|: patterns of the given size whose rank equals it.
    #[pyo3(signature = (sink, delta, max_channels = 40, max_delta = 4))]
    fn count_rt(
        &self,
        sink: &str,
        delta: usize,
        max_channels: usize,
        max_delta: usize,
    ) -> PyResult<u64> {
        let t = self.sink_index(sink)?;
        self.inner
            .rt_size(t, delta, enum_limit(max_channels, max_delta))
            .map_err(value_err)
    }

    /// Σ_t |R_t(delta)| with the same size at every sink.
    #[pyo3(signature = (delta, max_channels = 40, max_delta = 4))]
    fn rt_sum(&self, delta: usize, max_channels: usize, max_delta: usize) -> PyResult<u64> {
        self.inner
            .rt_sum_uniform(delta, enum_limit(max_channels, max_delta))
            .map_err(value_err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "Network(nodes={}, channels={}, sinks={})",
            self.inner.node_count(),
            self.inner.channel_count(),
            self.inner.sinks().len()
        )
    }
}

/// A linear network error correction code bound to its network.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Code {
    inner: NecCode,
}

impl Code {
    fn sink_index(&self, name: &str) -> PyResult<usize> {
        let net = self.inner.network();
        let idx = net.node_index(name).map_err(value_err)?;
        if net.is_sink(idx) {
            Ok(idx)
        } else {
            Err(value_err(format!("node {name} is not a sink")))
        }
    }
}

#[pymethods]
impl Code {
    /// Parse a code file against its network.
    #[new]
    fn new(network: &Network, json: &str) -> PyResult<Self> {
        Ok(Code {
            inner: NecCode::from_json_str(network.inner.clone(), json).map_err(value_err)?,
        })
    }

    /// The known rate-2 GF(3) MDS code on the relay sample network.
    #[staticmethod]
    fn relay_sample() -> Self {
        Code {
            inner: samples::relay_code(),
        }
    }

    /// Seeded randomized MDS construction with full verification.
    #[staticmethod]
    #[pyo3(signature = (network, rate, field, seed = 0, attempts = 64))]
    fn construct_mds(
        network: &Network,
        rate: usize,
        field: u64,
        seed: u64,
        attempts: usize,
    ) -> PyResult<Self> {
        let field = field_spec(field)?;
        let code = variable_rate::construct_mds_with_attempts(
            network.inner.clone(),
            rate,
            field,
            seed,
            attempts,
        )
        .map_err(vr_err)?;
        Ok(Code { inner: code })
    }

    /// One uniform random draw of all local kernels; unverified.
    #[staticmethod]
    #[pyo3(signature = (network, rate, field, seed = 0))]
    fn random(network: &Network, rate: usize, field: u64, seed: u64) -> PyResult<Self> {
        let field = field_spec(field)?;
        let code =
            randomized::random_code(network.inner.clone(), rate, field, seed).map_err(value_err)?;
        Ok(Code { inner: code })
    }

    #[getter]
    fn rate(&self) -> usize {
        self.inner.rate()
    }

    #[getter]
    fn field(&self) -> u64 {
        self.inner.field().modulus()
    }

    #[getter]
    fn network(&self) -> Network {
        Network {
            inner: self.inner.network().clone(),
        }
    }

    fn is_regular(&self) -> bool {
        self.inner.is_regular()
    }

    fn is_mds(&self) -> bool {
        metrics::verify_mds(&self.inner).is_mds
    }

    /// Full verification report as a JSON string.
    fn verify(&self) -> String {
        metrics::verify_mds(&self.inner).to_json_string()
    }

    fn min_distance(&self, sink: &str) -> PyResult<usize> {
        let t = self.sink_index(sink)?;
        Ok(metrics::min_distance(&self.inner, t)
            .map_err(value_err)?
            .d_min)
    }

    fn correction_radius(&self, sink: &str) -> PyResult<usize> {
        let t = self.sink_index(sink)?;
        decoder::correction_radius(&self.inner, t).map_err(value_err)
    }

    /// The full decoding matrix of a sink as rows.
    fn decoding_matrix(&self, sink: &str) -> PyResult<Vec<Vec<u64>>> {
        let t = self.sink_index(sink)?;
        Ok(self
            .inner
            .decoding_matrix(t)
            .map_err(value_err)?
            .full()
            .row_vectors())
    }

    /// The extended global encoding kernel of one channel.
    fn extended_kernel(&self, channel: &str) -> PyResult<Vec<u64>> {
        let e = self
            .inner
            .network()
            .channel_index(channel)
            .map_err(value_err)?;
        Ok(self.inner.extended_kernels().vector(e).to_vec())
    }

    /// Received vectors per sink for a message and a full error vector.
    fn transmit(&self, x: Vec<u64>, z: Vec<u64>) -> PyResult<HashMap<String, Vec<u64>>> {
        let received = self.inner.transmit(&x, &z).map_err(value_err)?;
        let net = self.inner.network();
        Ok(net
            .sinks()
            .iter()
            .zip(received)
            .map(|(&t, r)| (net.node_name(t).to_string(), r))
            .collect())
    }

    /// Critical patterns Q(t) as lists of channel ids (MDS codes only).
    fn q_patterns(&self, sink: &str) -> PyResult<Vec<Vec<String>>> {
        let t = self.sink_index(sink)?;
        let q = metrics::compute_q(&self.inner, t).map_err(value_err)?;
        Ok(q.iter().map(|p| p.ids(self.inner.network())).collect())
    }

    /// Pick a fold vector avoiding every forbidden hyperplane.
    #[pyo3(signature = (strategy = "deterministic", seed = 0))]
    fn choose_k(&self, strategy: &str, seed: u64) -> PyResult<Vec<u64>> {
        let strategy = parse_strategy(strategy)?;
        let k = variable_rate::choose_k(&self.inner, strategy, seed).map_err(vr_err)?;
        Ok(k.values().to_vec())
    }

    /// Reduce the rate by one with the given fold vector.
    fn reduce(&self, k: Vec<u64>) -> PyResult<Code> {
        let k = ReductionVector::new(self.inner.field(), k).map_err(value_err)?;
        Ok(Code {
            inner: variable_rate::reduce_rate(&self.inner, &k).map_err(vr_err)?,
        })
    }

    /// Minimum-weight decoding of a received vector at one sink.
    /// Returns (decoded or None on ties, weight, candidates).
    fn decode(&self, sink: &str, received: Vec<u64>) -> PyResult<DecodeTuple> {
        let t = self.sink_index(sink)?;
        let r = decoder::decode(&self.inner, t, &received).map_err(value_err)?;
        Ok((r.decoded, r.weight, r.candidates))
    }

    /// Inject errors (channel ids with nonzero values), propagate, and
    /// decode at every sink. Returns {sink: (decoded or None, weight)}.
    fn simulate(
        &self,
        x: Vec<u64>,
        pattern: Vec<String>,
        values: Vec<u64>,
    ) -> PyResult<SinkOutcomes> {
        let net = self.inner.network();
        let refs: Vec<&str> = pattern.iter().map(|s| s.as_str()).collect();
        let pattern = ErrorPattern::from_ids(net, &refs).map_err(value_err)?;
        let results = decoder::simulate(&self.inner, &x, &pattern, &values).map_err(value_err)?;
        Ok(results
            .into_iter()
            .map(|(t, r)| (net.node_name(t).to_string(), (r.decoded, r.weight)))
            .collect())
    }

    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "Code(rate={}, field=GF({}), regular={})",
            self.inner.rate(),
            self.inner.field().modulus(),
            self.inner.is_regular()
        )
    }
}

/// Build the full variable-rate family below a fresh MDS construction.
/// Returns (codes best-rate-first, fold vectors per step).
#[pyfunction]
#[pyo3(signature = (network, rate, field, seed = 0))]
fn build_family(
    network: &Network,
    rate: usize,
    field: u64,
    seed: u64,
) -> PyResult<(Vec<Code>, Vec<Vec<u64>>)> {
    let field = field_spec(field)?;
    let family =
        variable_rate::build_family(network.inner.clone(), rate, field, seed).map_err(vr_err)?;
    Ok(family_parts(family))
}

/// Build the family below an existing MDS code.
#[pyfunction]
#[pyo3(signature = (code, strategy = "deterministic", seed = 0))]
fn build_family_from(
    code: &Code,
    strategy: &str,
    seed: u64,
) -> PyResult<(Vec<Code>, Vec<Vec<u64>>)> {
    let strategy = parse_strategy(strategy)?;
    let family =
        variable_rate::build_family_from(code.inner.clone(), strategy, seed).map_err(vr_err)?;
    Ok(family_parts(family))
}

fn family_parts(family: variable_rate::CodeFamily) -> (Vec<Code>, Vec<Vec<u64>>) {
    let ks = family
        .reduction_vectors()
        .iter()
        .map(|k| k.values().to_vec())
        .collect();
    let codes = family
        .codes()
        .iter()
        .map(|c| Code { inner: c.clone() })
        .collect();
    (codes, ks)
}

/// Lower bound on the probability that one uniform draw is MDS.
#[pyfunction]
#[pyo3(signature = (network, rate, field, max_channels = 40, max_delta = 4))]
fn mds_lower_bound(
    network: &Network,
    rate: usize,
    field: u64,
    max_channels: usize,
    max_delta: usize,
) -> PyResult<f64> {
    let field = field_spec(field)?;
    randomized::mds_lower_bound(
        &network.inner,
        rate,
        field,
        enum_limit(max_channels, max_delta),
    )
    .map_err(value_err)
}

/// Joint lower bounds (exact_form, binomial_form) for drawing an MDS code
/// plus one uniform fold vector that keeps it MDS.
#[pyfunction]
#[pyo3(signature = (network, rate, field, q_total = None, max_channels = 40, max_delta = 4))]
fn joint_lower_bound(
    network: &Network,
    rate: usize,
    field: u64,
    q_total: Option<u64>,
    max_channels: usize,
    max_delta: usize,
) -> PyResult<(f64, f64)> {
    let field = field_spec(field)?;
    let b = randomized::joint_lower_bound(
        &network.inner,
        rate,
        field,
        q_total,
        enum_limit(max_channels, max_delta),
    )
    .map_err(value_err)?;
    Ok((b.exact_form, b.binomial_form))
}

/// Monte-Carlo estimate; returns the full probability report as JSON.
/// Targets: "mds", "joint", "joint-exists-k".
#[pyfunction]
#[pyo3(signature = (network, field, rate, trials, seed = 0, target = "mds", max_channels = 40, max_delta = 4))]
#[allow(clippy::too_many_arguments)]
fn estimate_success(
    network: &Network,
    field: u64,
    rate: usize,
    trials: usize,
    seed: u64,
    target: &str,
    max_channels: usize,
    max_delta: usize,
) -> PyResult<String> {
    let field = field_spec(field)?;
    let target = match target {
        "mds" => Target::Mds,
        "joint" => Target::JointFamily,
        "joint-exists-k" => Target::JointFamilyExistsK,
        other => {
            return Err(value_err(format!(
                "unknown target {other:?}; use 'mds', 'joint', or 'joint-exists-k'"
            )))
        }
    };
    let cfg = TrialConfig { rate, trials, seed };
    let report = randomized::estimate_success(
        network.inner.clone(),
        field,
        cfg,
        target,
        enum_limit(max_channels, max_delta),
    )
    .map_err(value_err)?;
    Ok(report.to_json_string())
}

/// Sufficient field sizes for a rate-ω family:
/// (exact or None when enumeration is capped, binomial).
#[pyfunction]
#[pyo3(signature = (network, rate, max_channels = 40, max_delta = 4))]
fn field_size_bound(
    network: &Network,
    rate: usize,
    max_channels: usize,
    max_delta: usize,
) -> PyResult<(Option<u64>, u128)> {
    let b =
        variable_rate::field_size_bound(&network.inner, rate, enum_limit(max_channels, max_delta))
            .map_err(vr_err)?;
    Ok((b.exact, b.binomial))
}

#[pymodule]
fn nectk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Network>()?;
    m.add_class::<Code>()?;
    m.add_function(wrap_pyfunction!(build_family, m)?)?;
    m.add_function(wrap_pyfunction!(build_family_from, m)?)?;
    m.add_function(wrap_pyfunction!(mds_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(joint_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_success, m)?)?;
    m.add_function(wrap_pyfunction!(field_size_bound, m)?)?;
    Ok(())
}
