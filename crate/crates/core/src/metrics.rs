//! Error spaces, message spaces, minimum distance, MDS verification against
//! the refined Singleton bound, and the critical pattern sets Q(t).
//!
//! The minimum distance at a sink is the size of the smallest error pattern
//! whose error space meets the message space nontrivially. For a regular
//! code it never exceeds the redundancy δ_t + 1, so the search is bounded;
//! codes meeting the bound with equality at every sink are MDS.

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::ff::FieldMatrix;
use crate::nec_code::NecCode;
use crate::topology::{ErrorPattern, TopologyError};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("minimum distance is defined only for regular codes (rank(F_t) = rate fails at sink {sink})")]
    NotRegular { sink: String },
    #[error("operation requires an MDS code; verification reports: {summary}")]
    NotMds { summary: String },
    #[error("distance search exhausted the refined Singleton ceiling without a witness; the code is inconsistent")]
    SingletonCeiling,
    #[error("oracle enumeration over {channels} candidate channels exceeds the cap of {cap}")]
    OracleCap { channels: usize, cap: usize },
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// Which span a [`SpaceBasis`] describes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpaceKind {
    /// Δ(t,ρ): spanned by the decoding-matrix rows of the pattern channels.
    ErrorSpace(ErrorPattern),
    /// Φ(t): spanned by the message rows of the decoding matrix.
    MessageSpace,
}

/// A spanning set of rows for one of the decode-side subspaces at a sink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceBasis {
    pub kind: SpaceKind,
    pub sink: usize,
    pub matrix: FieldMatrix,
}

/// Rows {r̃_t(e) : e ∈ ρ}, spanning the error space Δ(t,ρ). The empty
/// pattern spans the zero space, kept at the sink's width.
pub fn error_space(code: &NecCode, sink: usize, pattern: &ErrorPattern) -> SpaceBasis {
    let d = code
        .decoding_matrix(sink)
        .expect("sink of the code's network");
    let rows: Vec<Vec<u64>> = pattern
        .channels()
        .iter()
        .map(|&e| d.channel_row(e).to_vec())
        .collect();
    let matrix = if rows.is_empty() {
        FieldMatrix::zeros(code.field(), 0, d.full().cols())
    } else {
        FieldMatrix::from_rows(code.field(), &rows).expect("rows share the sink width")
    };
    SpaceBasis {
        kind: SpaceKind::ErrorSpace(pattern.clone()),
        sink,
        matrix,
    }
}

/// Rows {r̃_t(d'_i)}, spanning the message space Φ(t). This is F_t.
pub fn message_space(code: &NecCode, sink: usize) -> SpaceBasis {
    let d = code
        .decoding_matrix(sink)
        .expect("sink of the code's network");
    SpaceBasis {
        kind: SpaceKind::MessageSpace,
        sink,
        matrix: d.message_part(),
    }
}

/// True iff dim(Δ(t,ρ) ∩ Φ(t)) > 0.
pub fn intersects(code: &NecCode, sink: usize, pattern: &ErrorPattern) -> bool {
    let delta = error_space(code, sink, pattern);
    let phi = message_space(code, sink);
    delta
        .matrix
        .intersection_dim(&phi.matrix)
        .expect("spaces share the sink dimension")
        > 0
}

fn require_regular_at(code: &NecCode, sink: usize) -> Result<(), MetricsError> {
    let d = code
        .decoding_matrix(sink)
        .expect("sink of the code's network");
    if d.message_part().rank() == code.rate() {
        Ok(())
    } else {
        Err(MetricsError::NotRegular {
            sink: code.network().node_name(sink).to_string(),
        })
    }
}

/// Channels that can matter at this sink: those with a nonzero decoding row.
/// A zero row spans nothing, so dropping such channels changes no error
/// space and no minimum.
fn candidate_channels(code: &NecCode, sink: usize) -> Vec<usize> {
    let d = code
        .decoding_matrix(sink)
        .expect("sink of the code's network");
    (0..code.network().channel_count())
        .filter(|&e| d.channel_row(e).iter().any(|&v| v != 0))
        .collect()
}

/// Minimum distance at a sink with the lexicographically first witness
/// pattern achieving it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distance {
    pub d_min: usize,
    pub witness: ErrorPattern,
}

/// d_min at one sink by increasing-size exhaustive search, using the
/// refined Singleton ceiling δ_t + 1 on regular codes.
pub fn min_distance(code: &NecCode, sink: usize) -> Result<Distance, MetricsError> {
    require_regular_at(code, sink)?;
    let net = code.network();
    let capacity = net.min_cut(sink)?;
    let ceiling = capacity - code.rate() + 1;
    let candidates = candidate_channels(code, sink);
    for size in 1..=ceiling {
        for combo in candidates.iter().copied().combinations(size) {
            let pattern = ErrorPattern::new(net, combo).expect("channels are in range");
            if intersects(code, sink, &pattern) {
                return Ok(Distance {
                    d_min: size,
                    witness: pattern,
                });
            }
        }
    }
    Err(MetricsError::SingletonCeiling)
}

/// The three equivalent minimum-distance expressions, each recomputed
/// independently over every subset of candidate channels:
/// min |ρ|, min rank_t(ρ), and min dim(Δ(t,ρ)) over patterns whose error
/// space meets the message space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleDistances {
    pub by_size: usize,
    pub by_rank: usize,
    pub by_dim: usize,
}

const ORACLE_CHANNEL_CAP: usize = 16;

pub fn min_distance_oracle(code: &NecCode, sink: usize) -> Result<OracleDistances, MetricsError> {
    require_regular_at(code, sink)?;
    let net = code.network();
    let candidates = candidate_channels(code, sink);
    if candidates.len() > ORACLE_CHANNEL_CAP {
        return Err(MetricsError::OracleCap {
            channels: candidates.len(),
            cap: ORACLE_CHANNEL_CAP,
        });
    }
    let phi = message_space(code, sink).matrix;
    let mut by_size = usize::MAX;
    let mut by_rank = usize::MAX;
    let mut by_dim = usize::MAX;
    for mask in 1u32..(1 << candidates.len()) {
        let subset: Vec<usize> = (0..candidates.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| candidates[i])
            .collect();
        let pattern = ErrorPattern::new(net, subset).expect("channels are in range");
        let delta = error_space(code, sink, &pattern).matrix;
        if delta.intersection_dim(&phi).expect("same width") == 0 {
            continue;
        }
        by_size = by_size.min(pattern.len());
        by_rank = by_rank.min(net.pattern_rank(&pattern, sink)?);
        by_dim = by_dim.min(delta.rank());
    }
    if by_size == usize::MAX {
        return Err(MetricsError::SingletonCeiling);
    }
    Ok(OracleDistances {
        by_size,
        by_rank,
        by_dim,
    })
}

/// Per-sink facts assembled by [`verify_mds`].
#[derive(Debug, Clone, Serialize)]
pub struct SinkDistance {
    pub sink: String,
    pub capacity: usize,
    pub redundancy: usize,
    /// None when the code is not regular, in which case no distance exists.
    pub d_min: Option<usize>,
    /// δ_t + 1 − d_min: zero exactly for MDS behaviour at this sink.
    pub singleton_gap: Option<usize>,
    pub mds_at_sink: bool,
    pub witness: Option<Vec<String>>,
}

/// Outcome of MDS verification across all sinks.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceReport {
    pub field: u64,
    pub rate: usize,
    pub regular: bool,
    pub is_mds: bool,
    pub sinks: Vec<SinkDistance>,
}

impl DistanceReport {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn summary(&self) -> String {
        let per_sink: Vec<String> = self
            .sinks
            .iter()
            .map(|s| {
                format!(
                    "{}: C={}, δ={}, d_min={}",
                    s.sink,
                    s.capacity,
                    s.redundancy,
                    s.d_min.map_or("-".to_string(), |d| d.to_string())
                )
            })
            .collect();
        format!(
            "regular={}, mds={} [{}]",
            self.regular,
            self.is_mds,
            per_sink.join(", ")
        )
    }
}

/// Checks the refined Singleton bound with equality at every sink.
/// Non-regularity is reported, not raised.
pub fn verify_mds(code: &NecCode) -> DistanceReport {
    let net = code.network();
    let regular = code.is_regular();
    let mut sinks = Vec::new();
    let mut all_mds = regular;
    for &t in net.sinks() {
        let capacity = net.min_cut(t).expect("sink");
        let redundancy = capacity - code.rate();
        let (d_min, witness) = if regular {
            let d = min_distance(code, t).expect("regular code has a distance");
            (Some(d.d_min), Some(d.witness.ids(net)))
        } else {
            (None, None)
        };
        let mds_at_sink = d_min == Some(redundancy + 1);
        all_mds &= mds_at_sink;
        sinks.push(SinkDistance {
            sink: net.node_name(t).to_string(),
            capacity,
            redundancy,
            d_min,
            singleton_gap: d_min.map(|d| redundancy + 1 - d),
            mds_at_sink,
            witness,
        });
    }
    DistanceReport {
        field: code.field().modulus(),
        rate: code.rate(),
        regular,
        is_mds: all_mds,
        sinks,
    }
}

/// Q(t): every pattern of size d_min whose error space meets the message
/// space. Defined (and meaningful downstream) only for MDS codes, where
/// each member's intersection is exactly one-dimensional.
pub fn compute_q(code: &NecCode, sink: usize) -> Result<Vec<ErrorPattern>, MetricsError> {
    let report = verify_mds(code);
    if !report.is_mds {
        return Err(MetricsError::NotMds {
            summary: report.summary(),
        });
    }
    let net = code.network();
    let d = net.min_cut(sink)? - code.rate() + 1;
    let candidates = candidate_channels(code, sink);
    let mut out = Vec::new();
    for combo in candidates.iter().copied().combinations(d) {
        let pattern = ErrorPattern::new(net, combo).expect("channels are in range");
        if intersects(code, sink, &pattern) {
            out.push(pattern);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::{FieldMatrix, FieldSpec};
    use crate::nec_code::LocalKernels;
    use crate::samples;
    use crate::topology::Network;
    use std::sync::Arc;

    #[test]
    fn empty_pattern_never_intersects() {
        let code = samples::relay_code();
        for &t in code.network().sinks() {
            assert!(!intersects(&code, t, &ErrorPattern::empty()));
        }
    }

    #[test]
    fn single_channels_do_not_intersect_fixture() {
        let code = samples::relay_code();
        let net = code.network().clone();
        for &t in net.sinks() {
            for e in 0..net.channel_count() {
                let p = ErrorPattern::new(&net, vec![e]).unwrap();
                assert!(!intersects(&code, t, &p));
            }
        }
    }

    #[test]
    fn fixture_distances() {
        let code = samples::relay_code();
        let net = code.network().clone();
        for &t in net.sinks() {
            let d = min_distance(&code, t).unwrap();
            assert_eq!(d.d_min, 2);
        }
        // lexicographically first witness at t1 is {e1, e2}
        let t1 = net.node_index("t1").unwrap();
        let d = min_distance(&code, t1).unwrap();
        assert_eq!(d.witness.ids(&net), vec!["e1", "e2"]);
    }

    #[test]
    fn fixture_report_is_mds() {
        let code = samples::relay_code();
        let report = verify_mds(&code);
        assert!(report.regular);
        assert!(report.is_mds);
        for s in &report.sinks {
            assert_eq!(s.capacity, 3);
            assert_eq!(s.redundancy, 1);
            assert_eq!(s.d_min, Some(2));
            assert_eq!(s.singleton_gap, Some(0));
        }
    }

    #[test]
    fn zero_code_reports_not_regular() {
        let net = Arc::new(samples::relay_network());
        let f3 = FieldSpec::new(3).unwrap();
        let code = NecCode::derive(
            net,
            LocalKernels::zeros(samples::relay_code().network(), f3, 2).unwrap(),
        )
        .unwrap();
        let report = verify_mds(&code);
        assert!(!report.regular);
        assert!(!report.is_mds);
        assert!(report.sinks.iter().all(|s| s.d_min.is_none()));
        assert!(matches!(
            min_distance(&code, code.network().sinks()[0]),
            Err(MetricsError::NotRegular { .. })
        ));
    }

    #[test]
    fn oracle_agrees_on_fixture() {
        let code = samples::relay_code();
        for &t in code.network().sinks() {
            let o = min_distance_oracle(&code, t).unwrap();
            assert_eq!(o.by_size, 2);
            assert_eq!(o.by_rank, 2);
            assert_eq!(o.by_dim, 2);
        }
    }

    #[test]
    fn q_set_of_fixture() {
        let code = samples::relay_code();
        let net = code.network().clone();
        let t1 = net.node_index("t1").unwrap();
        let q = compute_q(&code, t1).unwrap();
        let ids: Vec<Vec<String>> = q.iter().map(|p| p.ids(&net)).collect();
        assert_eq!(
            ids,
            vec![
                vec!["e1", "e2"],
                vec!["e1", "e3"],
                vec!["e1", "e6"],
                vec!["e2", "e3"],
                vec!["e2", "e6"],
            ]
        );
        // every member's intersection is exactly one-dimensional
        let phi = message_space(&code, t1).matrix;
        for p in &q {
            let delta = error_space(&code, t1, p).matrix;
            assert_eq!(delta.intersection_dim(&phi).unwrap(), 1);
        }
        // and every member is a full-rank pattern of size δ+1
        for p in &q {
            assert_eq!(net.pattern_rank(p, t1).unwrap(), p.len());
            assert_eq!(p.len(), 2);
        }
    }

    #[test]
    fn reduced_code_resists_all_small_patterns() {
        // rate-1 member of the fixture family: no pattern of size <= 2
        // intersects, at either sink, so d_min is 3
        let code = samples::relay_code();
        let k = crate::variable_rate::ReductionVector::new(code.field(), vec![1]).unwrap();
        let reduced = crate::variable_rate::reduce_rate(&code, &k).unwrap();
        let net = reduced.network().clone();
        for &t in net.sinks() {
            for mask in 1u32..128 {
                let channels: Vec<usize> = (0..7).filter(|i| mask >> i & 1 == 1).collect();
                if channels.len() > 2 {
                    continue;
                }
                let p = ErrorPattern::new(&net, channels).unwrap();
                assert!(
                    !intersects(&reduced, t, &p),
                    "{:?} at {}",
                    p,
                    net.node_name(t)
                );
            }
            let o = min_distance_oracle(&reduced, t).unwrap();
            assert_eq!((o.by_size, o.by_rank, o.by_dim), (3, 3, 3));
        }
    }

    #[test]
    fn q_requires_mds() {
        let net = Arc::new(samples::relay_network());
        let f3 = FieldSpec::new(3).unwrap();
        let code = NecCode::derive(net.clone(), LocalKernels::zeros(&net, f3, 2).unwrap()).unwrap();
        assert!(matches!(
            compute_q(&code, net.sinks()[0]),
            Err(MetricsError::NotMds { .. })
        ));
    }

    #[test]
    fn intersects_is_monotone() {
        let code = samples::relay_code();
        let net = code.network().clone();
        for &t in net.sinks() {
            for m1 in 0u32..128 {
                let m2 = m1 | 0b101; // grow the pattern
                let p1 = ErrorPattern::new(&net, (0..7).filter(|i| m1 >> i & 1 == 1)).unwrap();
                let p2 = ErrorPattern::new(&net, (0..7).filter(|i| m2 >> i & 1 == 1)).unwrap();
                assert!(p1.is_subset_of(&p2));
                if intersects(&code, t, &p1) {
                    assert!(intersects(&code, t, &p2));
                }
            }
        }
    }

    #[test]
    fn full_rate_code_has_distance_one() {
        // two parallel source->sink channels, rate equal to the min-cut
        let net = Arc::new(
            Network::new(
                vec!["s".into(), "t".into()],
                "s",
                &["t".into()],
                vec![
                    ("e1".into(), "s".into(), "t".into()),
                    ("e2".into(), "s".into(), "t".into()),
                ],
            )
            .unwrap(),
        );
        let f3 = FieldSpec::new(3).unwrap();
        let ks = FieldMatrix::identity(f3, 2);
        let local = LocalKernels::new(&net, f3, 2, vec![(net.source(), ks)]).unwrap();
        let code = NecCode::derive(net.clone(), local).unwrap();
        let t = net.sinks()[0];
        assert_eq!(min_distance(&code, t).unwrap().d_min, 1);
        let o = min_distance_oracle(&code, t).unwrap();
        assert_eq!((o.by_size, o.by_rank, o.by_dim), (1, 1, 1));
        let report = verify_mds(&code);
        assert!(report.is_mds);
        // with d_min = 1 the critical patterns are single channels
        let q = compute_q(&code, t).unwrap();
        assert!(!q.is_empty());
        assert!(q.iter().all(|p| p.len() == 1));
    }
}
