//! Variable-rate MDS code families: starting from an ω-dimensional MDS code,
//! derive MDS codes of every lower rate that keep the exact same local
//! encoding kernel at every non-source node.
//!
//! One reduction step folds the last source row into the others: picking a
//! column vector k of length ω−1, the new source coefficients become
//! k_{d'_i,e} + k_i·k_{d'_ω,e} while internal kernels stay untouched. The
//! reduced code is MDS exactly when k avoids, for every sink t and critical
//! pattern ρ ∈ Q(t), the hyperplane of vectors that preserve the
//! one-dimensional intersection of Δ(t,ρ) with the message space. A valid k
//! is guaranteed to exist once the field is larger than Σ_t |Q(t)|; the
//! chooser verifies instead of assuming, so smaller fields succeed whenever
//! a valid vector happens to exist.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ff::{FieldMatrix, FieldSpec};
use crate::metrics::{self, MetricsError};
use crate::nec_code::{CodeError, LocalKernels, NecCode};
use crate::topology::{binomial, EnumLimit, ErrorPattern, Network, TopologyError};

#[derive(Debug, Error)]
pub enum VariableRateError {
    #[error("rate {rate} exceeds the smallest sink min-cut {min_cut}")]
    RateExceedsCapacity { rate: usize, min_cut: usize },
    #[error("cannot reduce a rate-1 code any further")]
    RateFloor,
    #[error("reduction requires a regular code")]
    NotRegular,
    #[error("reduction vector has length {got}, expected {expected}")]
    ReductionLength { expected: usize, got: usize },
    #[error("reduction vector value {value} is not a canonical element of GF({modulus})")]
    ValueOutOfRange { value: u64, modulus: u64 },
    #[error(
        "no valid reduction vector exists: all {total} vectors of GF({modulus})^{exponent} are \
         forbidden ({hyperplanes} hyperplanes from {q_total} critical patterns)"
    )]
    NoValidK {
        modulus: u64,
        exponent: usize,
        total: u128,
        hyperplanes: usize,
        q_total: usize,
    },
    #[error("randomized construction failed after {attempts} attempts (seed {seed})")]
    ConstructionFailed { attempts: usize, seed: u64 },
    #[error("code failed MDS verification: {summary}")]
    NotMdsCode { summary: String },
    #[error("internal kernels diverged across the family")]
    KernelMismatch,
    #[error("family construction failed at rate {rate}: {source}")]
    FamilyStep {
        rate: usize,
        #[source]
        source: Box<VariableRateError>,
    },
    #[error("critical pattern at sink {sink} has intersection dimension {dim}, expected 1")]
    IntersectionDimension { sink: String, dim: usize },
    #[error("reduced kernels disagree with the matrix transform of the extended kernels")]
    TransformMismatch,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Field(#[from] crate::ff::FfError),
}

/// The column vector k = [k_1 … k_{ω−1}]ᵀ folding the last source row into
/// the others.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionVector {
    field: FieldSpec,
    values: Vec<u64>,
}

impl ReductionVector {
    pub fn new(field: FieldSpec, values: Vec<u64>) -> Result<Self, VariableRateError> {
        for &v in &values {
            if v >= field.modulus() {
                return Err(VariableRateError::ValueOutOfRange {
                    value: v,
                    modulus: field.modulus(),
                });
            }
        }
        Ok(ReductionVector { field, values })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// For one sink t and one critical pattern ρ ∈ Q(t): the coefficients
/// a_1..a_ω of the (unique up to scale) intersection vector in the message
/// row basis. The forbidden set is K(t,ρ) = {k : Σ_{i<ω} a_i k_i = a_ω};
/// when a_1..a_{ω−1} all vanish with a_ω ≠ 0 the constraint is
/// unsatisfiable and the hyperplane is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForbiddenHyperplane {
    pub sink: usize,
    pub pattern: ErrorPattern,
    pub coeffs: Vec<u64>,
}

impl ForbiddenHyperplane {
    /// True when K(t,ρ) is empty, so no vector is actually forbidden.
    pub fn is_degenerate(&self) -> bool {
        let (head, last) = self.coeffs.split_at(self.coeffs.len() - 1);
        head.iter().all(|&a| a == 0) && last[0] != 0
    }

    /// Membership of k in K(t,ρ).
    pub fn contains(&self, k: &[u64], field: FieldSpec) -> bool {
        let (head, last) = self.coeffs.split_at(self.coeffs.len() - 1);
        let mut acc = 0u64;
        for (&a, &ki) in head.iter().zip(k) {
            acc = field.add(acc, field.mul(a, ki));
        }
        acc == last[0]
    }
}

/// Computes every forbidden hyperplane of an MDS code: one per
/// (sink, pattern ∈ Q(t)) pair, in sink order then pattern order.
pub fn forbidden_hyperplanes(
    code: &NecCode,
) -> Result<Vec<ForbiddenHyperplane>, VariableRateError> {
    let net = code.network();
    let mut out = Vec::new();
    for &t in net.sinks() {
        let q = metrics::compute_q(code, t)?;
        let phi = metrics::message_space(code, t).matrix;
        for pattern in q {
            let delta = metrics::error_space(code, t, &pattern).matrix;
            let basis = delta
                .row_space_intersection(&phi)
                .expect("spaces share the sink dimension");
            if basis.rows() != 1 {
                return Err(VariableRateError::IntersectionDimension {
                    sink: net.node_name(t).to_string(),
                    dim: basis.rows(),
                });
            }
            let coeffs = phi
                .solve_row(basis.row(0))
                .expect("intersection vector lies in the message space");
            out.push(ForbiddenHyperplane {
                sink: t,
                pattern,
                coeffs,
            });
        }
    }
    Ok(out)
}

/// How [`choose_k`] searches the vector space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KStrategy {
    /// Scan GF(p)^{ω−1} in lexicographic order; fully reproducible.
    Deterministic,
    /// Uniform random probes first, falling back to the full scan so that
    /// nonexistence is still detected.
    Random,
}

fn k_is_valid(k: &[u64], hyperplanes: &[ForbiddenHyperplane], field: FieldSpec) -> bool {
    hyperplanes
        .iter()
        .filter(|h| !h.is_degenerate())
        .all(|h| !h.contains(k, field))
}

/// Picks a reduction vector outside every non-degenerate hyperplane, or
/// proves by full scan that none exists.
pub fn select_k(
    field: FieldSpec,
    rate: usize,
    hyperplanes: &[ForbiddenHyperplane],
    strategy: KStrategy,
    seed: u64,
) -> Result<ReductionVector, VariableRateError> {
    let len = rate - 1;
    let p = field.modulus();
    if strategy == KStrategy::Random {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let probes = 64.max(4 * len);
        for _ in 0..probes {
            let k: Vec<u64> = (0..len).map(|_| rng.random_range(0..p)).collect();
            if k_is_valid(&k, hyperplanes, field) {
                return Ok(ReductionVector { field, values: k });
            }
        }
    }
    // lexicographic scan; k_1 is the most significant digit
    let mut k = vec![0u64; len];
    loop {
        if k_is_valid(&k, hyperplanes, field) {
            return Ok(ReductionVector {
                field,
                values: k.clone(),
            });
        }
        let mut pos = len;
        loop {
            if pos == 0 {
                let q_total = hyperplanes.len();
                let active = hyperplanes.iter().filter(|h| !h.is_degenerate()).count();
                return Err(VariableRateError::NoValidK {
                    modulus: p,
                    exponent: len,
                    total: (p as u128).pow(len as u32),
                    hyperplanes: active,
                    q_total,
                });
            }
            pos -= 1;
            k[pos] += 1;
            if k[pos] < p {
                break;
            }
            k[pos] = 0;
        }
    }
}

/// Chooses a reduction vector for an MDS code per the hyperplane condition.
pub fn choose_k(
    code: &NecCode,
    strategy: KStrategy,
    seed: u64,
) -> Result<ReductionVector, VariableRateError> {
    let hyperplanes = forbidden_hyperplanes(code)?;
    select_k(code.field(), code.rate(), &hyperplanes, strategy, seed)
}

/// Applies the rate-reduction transform for a given k.
///
/// The new source kernel rows are k_{d'_i,e} + k_i·k_{d'_ω,e}; every other
/// kernel is byte-identical. The derived extended kernels are additionally
/// cross-checked against the block-matrix transform of the originals —
/// the two routes must agree exactly.
pub fn reduce_rate(code: &NecCode, k: &ReductionVector) -> Result<NecCode, VariableRateError> {
    let rate = code.rate();
    if rate <= 1 {
        return Err(VariableRateError::RateFloor);
    }
    if !code.is_regular() {
        return Err(VariableRateError::NotRegular);
    }
    if k.len() != rate - 1 {
        return Err(VariableRateError::ReductionLength {
            expected: rate - 1,
            got: k.len(),
        });
    }
    let field = code.field();
    let net = code.network().clone();
    let old = code.local_kernels();

    let mut kernels = Vec::new();
    for node in old.nodes() {
        let kernel = old.kernel(node).expect("node listed by the kernels");
        if node == net.source() {
            let mut rows = Vec::with_capacity(rate - 1);
            for i in 0..rate - 1 {
                let row: Vec<u64> = (0..kernel.cols())
                    .map(|c| {
                        field.add(
                            kernel.get(i, c),
                            field.mul(k.values()[i], kernel.get(rate - 1, c)),
                        )
                    })
                    .collect();
                rows.push(row);
            }
            kernels.push((node, FieldMatrix::from_rows(field, &rows)?));
        } else {
            kernels.push((node, kernel.clone()));
        }
    }
    let local = LocalKernels::new(&net, field, rate - 1, kernels)?;
    let reduced = NecCode::derive(net.clone(), local)?;

    // independent route: multiply each old extended kernel by the
    // [I k 0; 0 0 I] block matrix and compare
    let m = net.channel_count();
    for e in 0..m {
        let old_vec = code.extended_kernels().vector(e);
        let mut transformed = vec![0u64; (rate - 1) + m];
        for (i, slot) in transformed.iter_mut().take(rate - 1).enumerate() {
            *slot = field.add(old_vec[i], field.mul(k.values()[i], old_vec[rate - 1]));
        }
        transformed[rate - 1..].copy_from_slice(&old_vec[rate..]);
        if reduced.extended_kernels().vector(e) != transformed.as_slice() {
            return Err(VariableRateError::TransformMismatch);
        }
    }
    Ok(reduced)
}

/// Randomized MDS construction: draw uniform local kernels, verify, retry.
/// Deterministic for a fixed seed. Succeeds quickly once the field is
/// comfortably above the R_t sums; the verifier is the gate either way.
pub fn construct_mds(
    network: Arc<Network>,
    rate: usize,
    field: FieldSpec,
    seed: u64,
) -> Result<NecCode, VariableRateError> {
    construct_mds_with_attempts(network, rate, field, seed, DEFAULT_CONSTRUCT_ATTEMPTS)
}

pub const DEFAULT_CONSTRUCT_ATTEMPTS: usize = 64;

pub fn construct_mds_with_attempts(
    network: Arc<Network>,
    rate: usize,
    field: FieldSpec,
    seed: u64,
    attempts: usize,
) -> Result<NecCode, VariableRateError> {
    let min_cut = network
        .sinks()
        .iter()
        .map(|&t| network.min_cut(t).expect("sink"))
        .min()
        .unwrap_or(0);
    if rate > min_cut {
        return Err(VariableRateError::RateExceedsCapacity { rate, min_cut });
    }
    for attempt in 0..attempts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        let local = LocalKernels::random(&network, field, rate, &mut rng)?;
        let code = NecCode::derive(network.clone(), local)?;
        if metrics::verify_mds(&code).is_mds {
            return Ok(code);
        }
    }
    Err(VariableRateError::ConstructionFailed { attempts, seed })
}

/// An ordered family of codes at rates ω, ω−1, …, 1 on one network, all
/// sharing every internal local encoding kernel, plus the reduction vectors
/// that produced each step.
#[derive(Debug, Clone)]
pub struct CodeFamily {
    codes: Vec<NecCode>,
    reduction_vectors: Vec<ReductionVector>,
}

impl CodeFamily {
    /// Codes ordered by descending rate, the rate-ω original first.
    pub fn codes(&self) -> &[NecCode] {
        &self.codes
    }

    /// The k used to go from rate ω−i to ω−i−1, aligned with the steps.
    pub fn reduction_vectors(&self) -> &[ReductionVector] {
        &self.reduction_vectors
    }

    pub fn top_rate(&self) -> usize {
        self.codes.first().map_or(0, |c| c.rate())
    }

    /// Bit-exact equality of every non-source kernel across all members.
    pub fn shares_internal_kernels(&self) -> bool {
        let Some(first) = self.codes.first() else {
            return true;
        };
        let net = first.network();
        self.codes.iter().skip(1).all(|code| {
            first
                .local_kernels()
                .nodes()
                .filter(|&n| n != net.source())
                .all(|n| first.local_kernels().kernel(n) == code.local_kernels().kernel(n))
        })
    }
}

/// Builds the full family below an existing MDS code by repeated
/// choose-and-reduce. Every step re-verifies the MDS property and the
/// kernel sharing from scratch before recursing.
pub fn build_family_from(
    code: NecCode,
    strategy: KStrategy,
    seed: u64,
) -> Result<CodeFamily, VariableRateError> {
    let step_fail = |rate: usize, source: VariableRateError| VariableRateError::FamilyStep {
        rate,
        source: Box::new(source),
    };
    let start = metrics::verify_mds(&code);
    if !start.is_mds {
        return Err(step_fail(
            code.rate(),
            VariableRateError::NotMdsCode {
                summary: start.summary(),
            },
        ));
    }
    let mut codes = vec![code];
    let mut reduction_vectors = Vec::new();
    while codes.last().expect("non-empty").rate() > 1 {
        let current = codes.last().expect("non-empty");
        let rate = current.rate();
        let k = choose_k(current, strategy, seed.wrapping_add(rate as u64))
            .map_err(|e| step_fail(rate - 1, e))?;
        let reduced = reduce_rate(current, &k).map_err(|e| step_fail(rate - 1, e))?;
        let report = metrics::verify_mds(&reduced);
        if !report.is_mds {
            return Err(step_fail(
                rate - 1,
                VariableRateError::NotMdsCode {
                    summary: report.summary(),
                },
            ));
        }
        codes.push(reduced);
        reduction_vectors.push(k);
    }
    let family = CodeFamily {
        codes,
        reduction_vectors,
    };
    if !family.shares_internal_kernels() {
        return Err(step_fail(
            family.codes.last().expect("non-empty").rate(),
            VariableRateError::KernelMismatch,
        ));
    }
    Ok(family)
}

/// Constructs a fresh rate-ω MDS code and derives the whole family below it.
pub fn build_family(
    network: Arc<Network>,
    rate: usize,
    field: FieldSpec,
    seed: u64,
) -> Result<CodeFamily, VariableRateError> {
    let top = construct_mds(network, rate, field, seed)?;
    build_family_from(top, KStrategy::Deterministic, seed)
}

/// Field-size thresholds sufficient for building a family of rates ω…1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSizeBound {
    /// Σ_t |R_t(C_t − ω + i)| for i = 0..ω; None when enumeration is capped.
    pub exact_terms: Option<Vec<u64>>,
    /// max of `exact_terms`.
    pub exact: Option<u64>,
    /// Σ_t C(|E|, C_t − ω + i) for i = 0..ω.
    pub binomial_terms: Vec<u128>,
    /// max of `binomial_terms`; always available.
    pub binomial: u128,
}

/// Computes both the enumeration-based threshold and its closed-form
/// binomial relaxation. A field strictly larger than `exact` (when
/// available) suffices; `binomial` is the coarser bound that never needs
/// enumeration.
pub fn field_size_bound(
    network: &Network,
    rate: usize,
    limit: EnumLimit,
) -> Result<FieldSizeBound, VariableRateError> {
    let min_cut = network
        .sinks()
        .iter()
        .map(|&t| network.min_cut(t).expect("sink"))
        .min()
        .unwrap_or(0);
    if rate > min_cut {
        return Err(VariableRateError::RateExceedsCapacity { rate, min_cut });
    }
    let m = network.channel_count() as u64;
    let mut binomial_terms = Vec::with_capacity(rate);
    for i in 0..rate {
        let mut total: u128 = 0;
        for &t in network.sinks() {
            let c_t = network.min_cut(t)? as u64;
            total += binomial(m, c_t - rate as u64 + i as u64);
        }
        binomial_terms.push(total);
    }
    let binomial_max = binomial_terms.iter().copied().max().unwrap_or(0);

    let mut exact_terms = Vec::with_capacity(rate);
    let mut capped = false;
    'outer: for i in 0..rate {
        let mut total: u64 = 0;
        for &t in network.sinks() {
            let c_t = network.min_cut(t)?;
            match network.rt_size(t, c_t - rate + i, limit) {
                Ok(n) => total += n,
                Err(TopologyError::EnumerationCap { .. }) => {
                    capped = true;
                    break 'outer;
                }
                Err(e) => return Err(e.into()),
            }
        }
        exact_terms.push(total);
    }
    let (exact_terms, exact) = if capped {
        (None, None)
    } else {
        let max = exact_terms.iter().copied().max();
        (Some(exact_terms), max)
    };
    Ok(FieldSizeBound {
        exact_terms,
        exact,
        binomial_terms,
        binomial: binomial_max,
    })
}
