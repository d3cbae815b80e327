//! Random code generation, Monte-Carlo estimates of MDS-construction
//! success, and the theoretical lower bounds they are checked against.
//!
//! Trials are reproducible: each trial derives its own ChaCha stream from
//! the master seed and the trial index, so runs are order-insensitive and
//! parallel-safe.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ff::FieldSpec;
use crate::metrics;
use crate::nec_code::{CodeError, LocalKernels, NecCode};
use crate::topology::{binomial, EnumLimit, Network, TopologyError};
use crate::variable_rate::{self, ReductionVector, VariableRateError};

#[derive(Debug, Error)]
pub enum RandomizedError {
    #[error("rate {rate} exceeds the smallest sink min-cut {min_cut}")]
    RateExceedsCapacity { rate: usize, min_cut: usize },
    #[error("joint estimation needs rate >= 2, got {0}")]
    JointNeedsRateTwo(usize),
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    VariableRate(#[from] VariableRateError),
}

/// Draws every local coefficient (source kernel included) i.i.d. uniformly
/// from the field, using the caller's generator. No verification happens
/// here; the draw is the experiment.
pub fn random_code_with_rng(
    network: Arc<Network>,
    rate: usize,
    field: FieldSpec,
    rng: &mut impl Rng,
) -> Result<NecCode, RandomizedError> {
    let min_cut = network
        .sinks()
        .iter()
        .map(|&t| network.min_cut(t).expect("sink"))
        .min()
        .unwrap_or(0);
    if rate > min_cut {
        return Err(RandomizedError::RateExceedsCapacity { rate, min_cut });
    }
    let local = LocalKernels::random(&network, field, rate, rng)?;
    Ok(NecCode::derive(network, local)?)
}

/// Seeded uniform random code; identical seeds give identical codes.
pub fn random_code(
    network: Arc<Network>,
    rate: usize,
    field: FieldSpec,
    seed: u64,
) -> Result<NecCode, RandomizedError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_code_with_rng(network, rate, field, &mut rng)
}

fn redundancies(network: &Network, rate: usize) -> Result<Vec<usize>, RandomizedError> {
    let mut out = Vec::with_capacity(network.sinks().len());
    for &t in network.sinks() {
        let c_t = network.min_cut(t)?;
        if rate > c_t {
            return Err(RandomizedError::RateExceedsCapacity { rate, min_cut: c_t });
        }
        out.push(c_t - rate);
    }
    Ok(out)
}

/// Lower bound on the probability that a uniform random code of the given
/// rate is MDS: [1 − ΣR_t(δ_t)/(q−1)]^(|J|+1), clamped into [0, 1].
pub fn mds_lower_bound(
    network: &Network,
    rate: usize,
    field: FieldSpec,
    limit: EnumLimit,
) -> Result<f64, RandomizedError> {
    let deltas = redundancies(network, rate)?;
    let r_sum = network.rt_sum(&deltas, limit)? as f64;
    let q = field.modulus() as f64;
    let base = 1.0 - r_sum / (q - 1.0);
    let exponent = (network.internal_count() + 1) as i32;
    Ok(base.max(0.0).powi(exponent).clamp(0.0, 1.0))
}

/// The pair of lower bounds on the joint event "the rate-ω draw is MDS and
/// one uniform fold vector yields a rate-(ω−1) MDS code".
#[derive(Debug, Clone, Copy, Serialize)]
pub struct JointBounds {
    /// [1 − ΣQ/q]·[1 − ΣR_t(δ_t)/(q−1)]^(|J|+1), with ΣQ replaced by its
    /// upper bound ΣR_t(δ_t+1) when no Q total is supplied.
    pub exact_form: f64,
    /// Closed-form relaxation [1 − ΣC(|E|,C_t−ω+1)/(q−1)]^(|J|+2).
    pub binomial_form: f64,
}

pub fn joint_lower_bound(
    network: &Network,
    rate: usize,
    field: FieldSpec,
    q_total: Option<u64>,
    limit: EnumLimit,
) -> Result<JointBounds, RandomizedError> {
    if rate < 2 {
        return Err(RandomizedError::JointNeedsRateTwo(rate));
    }
    let q = field.modulus() as f64;
    let deltas = redundancies(network, rate)?;

    let binomial_sum: u128 = network
        .sinks()
        .iter()
        .zip(&deltas)
        .map(|(_, &d)| binomial(network.channel_count() as u64, (d + 1) as u64))
        .sum();
    let binomial_base = 1.0 - binomial_sum as f64 / (q - 1.0);
    let binomial_form = binomial_base
        .max(0.0)
        .powi((network.internal_count() + 2) as i32)
        .clamp(0.0, 1.0);

    let q_sum = match q_total {
        Some(total) => total,
        None => {
            // Q(t) is always contained in R_t(δ_t + 1)
            let next: Vec<usize> = deltas.iter().map(|&d| d + 1).collect();
            network.rt_sum(&next, limit)?
        }
    } as f64;
    let mds = mds_lower_bound(network, rate, field, limit)?;
    let exact_form = ((1.0 - q_sum / q).max(0.0) * mds).clamp(0.0, 1.0);
    Ok(JointBounds {
        exact_form,
        binomial_form,
    })
}

/// Heuristic figure for building a whole family of rates ω…1 by random
/// draws: the MDS bound for the top rate times one fold-success factor
/// (1 − ΣR_t(C_t−r+1)/q) per reduction step. The two-rate case coincides
/// with [`joint_lower_bound`]'s exact form; beyond two rates no proven
/// bound exists, so treat this as a product heuristic, not a theorem.
pub fn family_success_heuristic(
    network: &Network,
    rate: usize,
    field: FieldSpec,
    limit: EnumLimit,
) -> Result<f64, RandomizedError> {
    let q = field.modulus() as f64;
    let mut value = mds_lower_bound(network, rate, field, limit)?;
    for step_rate in 2..=rate {
        let mut q_surrogate = 0u64;
        for &t in network.sinks() {
            let c_t = network.min_cut(t)?;
            q_surrogate += network.rt_size(t, c_t - step_rate + 1, limit)?;
        }
        value *= (1.0 - q_surrogate as f64 / q).max(0.0);
    }
    Ok(value.clamp(0.0, 1.0))
}

/// What a Monte-Carlo run estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Target {
    /// A uniform random code verifies MDS.
    Mds,
    /// The code is MDS and one uniformly drawn fold vector keeps it MDS one
    /// rate lower — the event the joint bound speaks about.
    JointFamily,
    /// Diagnostic variant beyond the bounded experiment: the code is MDS
    /// and *some* valid fold vector exists (found by scan, not drawn).
    JointFamilyExistsK,
}

/// Outcome of a single trial, for per-trial diagnosis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum TrialOutcome {
    Success,
    NotRegular,
    NotMds {
        sink: String,
        d_min: usize,
        needed: usize,
    },
    ReducedNotMds,
    NoValidFold,
}

impl TrialOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, TrialOutcome::Success)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialConfig {
    pub rate: usize,
    pub trials: usize,
    pub seed: u64,
}

/// Empirical success fraction with its Wilson 95% interval, the theoretical
/// lower bounds for comparison, and the per-trial outcomes.
#[derive(Debug, Clone, Serialize)]
pub struct ProbabilityReport {
    pub target: Target,
    pub field: u64,
    pub rate: usize,
    pub trials: usize,
    pub successes: usize,
    pub p_hat: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub mds_bound: f64,
    pub joint_bounds: Option<JointBounds>,
    /// Product of per-step bounds for a whole family; a labeled heuristic,
    /// not a proven bound (see [`family_success_heuristic`]).
    pub family_heuristic: Option<f64>,
    pub outcomes: Vec<TrialOutcome>,
}

impl ProbabilityReport {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// 95% Wilson score interval; robust at small counts.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let centre = p + z2 / (2.0 * n);
    let spread = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (
        ((centre - spread) / denom).clamp(0.0, 1.0),
        ((centre + spread) / denom).clamp(0.0, 1.0),
    )
}

fn diagnose(code: &NecCode) -> TrialOutcome {
    let report = metrics::verify_mds(code);
    if !report.regular {
        return TrialOutcome::NotRegular;
    }
    if report.is_mds {
        return TrialOutcome::Success;
    }
    let bad = report
        .sinks
        .iter()
        .find(|s| !s.mds_at_sink)
        .expect("some sink failed");
    TrialOutcome::NotMds {
        sink: bad.sink.clone(),
        d_min: bad.d_min.unwrap_or(0),
        needed: bad.redundancy + 1,
    }
}

fn run_trial(
    network: &Arc<Network>,
    rate: usize,
    field: FieldSpec,
    seed: u64,
    index: u64,
    target: Target,
) -> TrialOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let code = random_code_with_rng(network.clone(), rate, field, &mut rng)
        .expect("rate was validated before the run");
    let outcome = diagnose(&code);
    if !outcome.is_success() || target == Target::Mds {
        return outcome;
    }
    match target {
        Target::JointFamily => {
            // one uniform draw of the fold vector, as the random method does
            let p = field.modulus();
            let values: Vec<u64> = (0..rate - 1).map(|_| rng.random_range(0..p)).collect();
            let k = ReductionVector::new(field, values).expect("canonical values");
            match variable_rate::reduce_rate(&code, &k) {
                Ok(reduced) if metrics::verify_mds(&reduced).is_mds => TrialOutcome::Success,
                Ok(_) => TrialOutcome::ReducedNotMds,
                Err(_) => TrialOutcome::ReducedNotMds,
            }
        }
        Target::JointFamilyExistsK => {
            match variable_rate::choose_k(&code, variable_rate::KStrategy::Deterministic, 0) {
                Ok(_) => TrialOutcome::Success,
                Err(_) => TrialOutcome::NoValidFold,
            }
        }
        Target::Mds => unreachable!("handled above"),
    }
}

/// Runs the Monte-Carlo experiment. Identical configurations produce
/// identical reports.
pub fn estimate_success(
    network: Arc<Network>,
    field: FieldSpec,
    cfg: TrialConfig,
    target: Target,
    limit: EnumLimit,
) -> Result<ProbabilityReport, RandomizedError> {
    if cfg.trials == 0 {
        return Err(RandomizedError::NoTrials);
    }
    if target != Target::Mds && cfg.rate < 2 {
        return Err(RandomizedError::JointNeedsRateTwo(cfg.rate));
    }
    // validate the rate once up front
    redundancies(&network, cfg.rate)?;
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| run_trial(&network, cfg.rate, field, cfg.seed, i, target))
        .collect();
    let successes = outcomes.iter().filter(|o| o.is_success()).count();
    let p_hat = successes as f64 / cfg.trials as f64;
    let (wilson_low, wilson_high) = wilson_interval(successes, cfg.trials);
    let mds_bound = mds_lower_bound(&network, cfg.rate, field, limit)?;
    let (joint_bounds, family_heuristic) = if cfg.rate >= 2 && target != Target::Mds {
        (
            Some(joint_lower_bound(&network, cfg.rate, field, None, limit)?),
            Some(family_success_heuristic(&network, cfg.rate, field, limit)?),
        )
    } else {
        (None, None)
    };
    Ok(ProbabilityReport {
        target,
        field: field.modulus(),
        rate: cfg.rate,
        trials: cfg.trials,
        successes,
        p_hat,
        wilson_low,
        wilson_high,
        mds_bound,
        joint_bounds,
        family_heuristic,
        outcomes,
    })
}
