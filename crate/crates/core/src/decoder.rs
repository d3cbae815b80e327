//! Minimum-weight brute-force decoding at each sink, plus an end-to-end
//! error-injection simulator. This decoder is the ground truth the distance
//! claims are tested against: for every candidate message it finds the
//! lightest error explaining the received vector, scanning supports in
//! increasing size, and ties are reported as ambiguity rather than broken
//! arbitrarily. Exponential by nature; meant for desk-scale instances.

use itertools::Itertools;
use thiserror::Error;

use crate::metrics::{self, MetricsError};
use crate::nec_code::{CodeError, NecCode};
use crate::topology::ErrorPattern;

#[derive(Debug, Error)]
pub enum DecoderError {
    #[error("received vector has length {got}, expected |In(t)| = {expected}")]
    ReceivedLength { expected: usize, got: usize },
    #[error("value {value} is not a canonical element of GF({modulus})")]
    ValueOutOfRange { value: u64, modulus: u64 },
    #[error("error values must be nonzero exactly on the pattern: {0} values for {1} channels")]
    SupportLength(usize, usize),
    #[error("error value for channel {0} is zero, so the support does not match the pattern")]
    SupportZero(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// Result of minimum-weight decoding at one sink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    /// The unique minimum-weight message, or None on a tie.
    pub decoded: Option<Vec<u64>>,
    /// The minimizing error weight.
    pub weight: usize,
    /// Every message achieving the minimum.
    pub candidates: Vec<Vec<u64>>,
}

impl DecodeResult {
    pub fn is_ambiguous(&self) -> bool {
        self.decoded.is_none()
    }
}

/// Smallest error weight w such that some Z with support inside the
/// candidate channels and |supp(Z)| <= w satisfies Z·G_t = target.
/// `cap` bounds the search; returns None if nothing fits below it.
fn min_weight_solution(
    g_rows: &crate::ff::FieldMatrix,
    candidates: &[usize],
    target: &[u64],
    cap: usize,
) -> Option<usize> {
    if target.iter().all(|&v| v == 0) {
        return Some(0);
    }
    for w in 1..=cap.min(candidates.len()) {
        for support in (0..candidates.len()).combinations(w) {
            let rows: Vec<usize> = support.iter().map(|&i| candidates[i]).collect();
            let sub = g_rows.select_rows(&rows);
            if sub.solve_row(target).is_some() {
                return Some(w);
            }
        }
    }
    None
}

/// Exhaustive minimum-weight decoding of one received vector.
///
/// For every message X, the residual Ũ_t − X·F_t must be explained by an
/// error Z·G_t; the decoder finds the minimal Hamming weight over the
/// channels that can reach the sink and returns the message minimizing it.
pub fn decode(code: &NecCode, sink: usize, received: &[u64]) -> Result<DecodeResult, DecoderError> {
    let dm = code.decoding_matrix(sink)?;
    let width = dm.full().cols();
    if received.len() != width {
        return Err(DecoderError::ReceivedLength {
            expected: width,
            got: received.len(),
        });
    }
    let field = code.field();
    for &v in received {
        if v >= field.modulus() {
            return Err(DecoderError::ValueOutOfRange {
                value: v,
                modulus: field.modulus(),
            });
        }
    }
    let f_t = dm.message_part();
    let g_t = dm.error_part();
    // only channels with a nonzero row can explain anything
    let candidates: Vec<usize> = (0..code.network().channel_count())
        .filter(|&e| dm.channel_row(e).iter().any(|&v| v != 0))
        .collect();

    let mut best_weight = usize::MAX;
    let mut best: Vec<Vec<u64>> = Vec::new();
    let mut x = vec![0u64; code.rate()];
    loop {
        let image = f_t.row_vec_mul(&x);
        let residual: Vec<u64> = received
            .iter()
            .zip(&image)
            .map(|(&r, &i)| field.sub(r, i))
            .collect();
        // no need to search past the current best; ties at it still count
        let cap = if best_weight == usize::MAX {
            candidates.len()
        } else {
            best_weight
        };
        if let Some(w) = min_weight_solution(&g_t, &candidates, &residual, cap) {
            match w.cmp(&best_weight) {
                std::cmp::Ordering::Less => {
                    best_weight = w;
                    best = vec![x.clone()];
                }
                std::cmp::Ordering::Equal => best.push(x.clone()),
                std::cmp::Ordering::Greater => {}
            }
        }
        // advance X through GF(p)^rate
        let mut pos = 0;
        loop {
            if pos == x.len() {
                let decoded = if best.len() == 1 {
                    Some(best[0].clone())
                } else {
                    None
                };
                return Ok(DecodeResult {
                    decoded,
                    weight: best_weight,
                    candidates: best,
                });
            }
            x[pos] += 1;
            if x[pos] < field.modulus() {
                break;
            }
            x[pos] = 0;
            pos += 1;
        }
    }
}

/// Guaranteed number of correctable channel errors: ⌊(d_min − 1)/2⌋.
pub fn correction_radius(code: &NecCode, sink: usize) -> Result<usize, DecoderError> {
    let d = metrics::min_distance(code, sink)?;
    Ok((d.d_min - 1) / 2)
}

/// Injects an error matching the pattern (values aligned with its channels,
/// all nonzero), propagates hop by hop, and decodes at every sink.
/// Returns (sink, result) pairs aligned with `network.sinks()`.
pub fn simulate(
    code: &NecCode,
    message: &[u64],
    pattern: &ErrorPattern,
    values: &[u64],
) -> Result<Vec<(usize, DecodeResult)>, DecoderError> {
    if values.len() != pattern.len() {
        return Err(DecoderError::SupportLength(values.len(), pattern.len()));
    }
    let net = code.network().clone();
    let mut z = vec![0u64; net.channel_count()];
    for (&e, &v) in pattern.channels().iter().zip(values) {
        if v == 0 || v >= code.field().modulus() {
            return Err(DecoderError::SupportZero(net.channel(e).id.clone()));
        }
        z[e] = v;
    }
    let (_, received) = code.propagate(message, &z)?;
    let mut out = Vec::with_capacity(net.sinks().len());
    for (pos, &t) in net.sinks().iter().enumerate() {
        out.push((t, decode(code, t, &received[pos])?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;
    use crate::variable_rate::{reduce_rate, ReductionVector};

    fn rate1_code() -> NecCode {
        let code = samples::relay_code();
        let k = ReductionVector::new(code.field(), vec![1]).unwrap();
        reduce_rate(&code, &k).unwrap()
    }

    #[test]
    fn error_free_roundtrip_all_messages() {
        for code in [samples::relay_code(), rate1_code()] {
            let p = code.field().modulus();
            let z = vec![0u64; code.network().channel_count()];
            let mut x = vec![0u64; code.rate()];
            'all: loop {
                let received = code.transmit(&x, &z).unwrap();
                for (pos, &t) in code.network().sinks().iter().enumerate() {
                    let r = decode(&code, t, &received[pos]).unwrap();
                    assert_eq!(r.decoded.as_deref(), Some(x.as_slice()));
                    assert_eq!(r.weight, 0);
                }
                let mut pos = 0;
                loop {
                    if pos == x.len() {
                        break 'all;
                    }
                    x[pos] += 1;
                    if x[pos] < p {
                        break;
                    }
                    x[pos] = 0;
                    pos += 1;
                }
            }
        }
    }

    #[test]
    fn radius_values() {
        let code2 = samples::relay_code();
        let code1 = rate1_code();
        for &t in code2.network().sinks() {
            assert_eq!(correction_radius(&code2, t).unwrap(), 0); // d = 2
            assert_eq!(correction_radius(&code1, t).unwrap(), 1); // d = 3
        }
    }

    #[test]
    fn rate1_corrects_every_single_error() {
        let code = rate1_code();
        let net = code.network().clone();
        for x in 0..3u64 {
            for e in 0..net.channel_count() {
                for v in 1..3u64 {
                    let pattern = ErrorPattern::new(&net, vec![e]).unwrap();
                    let results = simulate(&code, &[x], &pattern, &[v]).unwrap();
                    for (t, r) in results {
                        assert_eq!(
                            r.decoded.as_deref(),
                            Some(&[x][..]),
                            "x={x} e={} v={v} sink={}",
                            net.channel(e).id,
                            net.node_name(t),
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn known_single_error_case() {
        let code = rate1_code();
        let net = code.network().clone();
        let pattern = ErrorPattern::from_ids(&net, &["e4"]).unwrap();
        let results = simulate(&code, &[2], &pattern, &[1]).unwrap();
        assert_eq!(results.len(), 2);
        for (_, r) in results {
            assert_eq!(r.decoded, Some(vec![2]));
        }
    }

    #[test]
    fn distance_two_code_fails_somewhere_on_single_errors() {
        // d = 2 corrects zero errors, so some single-channel error must
        // confuse some sink
        let code = samples::relay_code();
        let net = code.network().clone();
        let mut witness = false;
        'search: for x1 in 0..3u64 {
            for x2 in 0..3u64 {
                for e in 0..net.channel_count() {
                    for v in 1..3u64 {
                        let pattern = ErrorPattern::new(&net, vec![e]).unwrap();
                        let results = simulate(&code, &[x1, x2], &pattern, &[v]).unwrap();
                        for (_, r) in results {
                            if r.is_ambiguous() || r.decoded.as_deref() != Some(&[x1, x2][..]) {
                                witness = true;
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
        assert!(
            witness,
            "a distance-2 code cannot correct every single error"
        );
    }

    #[test]
    fn off_upstream_errors_do_not_disturb_a_sink() {
        let code = rate1_code();
        let net = code.network().clone();
        let t1 = net.node_index("t1").unwrap();
        // e4 only reaches t2, so t1's received vector is clean
        let clean = code.transmit(&[2], &[0; 7]).unwrap();
        let mut z = vec![0u64; 7];
        z[3] = 2;
        let noisy = code.transmit(&[2], &z).unwrap();
        assert_eq!(clean[0], noisy[0]);
        let r = decode(&code, t1, &noisy[0]).unwrap();
        assert_eq!(r.decoded, Some(vec![2]));
        assert_eq!(r.weight, 0);
    }

    #[test]
    fn null_space_errors_leave_decoding_unchanged() {
        // at t1 the rows of e3 and e6 coincide, so z_{e3} = 1, z_{e6} = 2
        // annihilates in G_t1 and the received vector is untouched
        let code = samples::relay_code();
        let net = code.network().clone();
        let t1 = net.node_index("t1").unwrap();
        let dm = code.decoding_matrix(t1).unwrap();
        let mut z = vec![0u64; 7];
        z[2] = 1;
        z[5] = 2;
        let image = dm.error_part().row_vec_mul(&z);
        assert!(
            image.iter().all(|&v| v == 0),
            "z must lie in the null space"
        );
        for x in [[0u64, 0], [1, 2], [2, 2]] {
            let clean = code.transmit(&x, &[0; 7]).unwrap();
            let noisy = code.transmit(&x, &z).unwrap();
            assert_eq!(clean[0], noisy[0]);
            assert_eq!(
                decode(&code, t1, &clean[0]).unwrap(),
                decode(&code, t1, &noisy[0]).unwrap()
            );
        }
    }

    #[test]
    fn empty_pattern_decodes_exactly() {
        let code = samples::relay_code();
        let results = simulate(&code, &[1, 2], &ErrorPattern::empty(), &[]).unwrap();
        for (_, r) in results {
            assert_eq!(r.decoded, Some(vec![1, 2]));
            assert_eq!(r.weight, 0);
        }
    }

    #[test]
    fn support_mismatch_is_rejected() {
        let code = samples::relay_code();
        let net = code.network().clone();
        let pattern = ErrorPattern::from_ids(&net, &["e1", "e2"]).unwrap();
        assert!(matches!(
            simulate(&code, &[1, 0], &pattern, &[1]),
            Err(DecoderError::SupportLength(1, 2))
        ));
        assert!(matches!(
            simulate(&code, &[1, 0], &pattern, &[1, 0]),
            Err(DecoderError::SupportZero(_))
        ));
    }

    #[test]
    fn received_length_is_checked() {
        let code = samples::relay_code();
        let t = code.network().sinks()[0];
        assert!(matches!(
            decode(&code, t, &[0, 0]),
            Err(DecoderError::ReceivedLength {
                expected: 3,
                got: 2
            })
        ));
    }

    #[test]
    fn ambiguity_is_reported_not_guessed() {
        // beyond the radius the decoder may tie; make one deliberately:
        // rate-2 fixture, hit e1 so that received explanations tie
        let code = samples::relay_code();
        let net = code.network().clone();
        let t1 = net.node_index("t1").unwrap();
        let mut found_tie = false;
        for x1 in 0..3u64 {
            for x2 in 0..3u64 {
                for e in [0usize, 1, 2, 5] {
                    for v in 1..3u64 {
                        let mut z = vec![0u64; 7];
                        z[e] = v;
                        let received = code.transmit(&[x1, x2], &z).unwrap();
                        let r = decode(&code, t1, &received[0]).unwrap();
                        if r.is_ambiguous() {
                            assert!(r.candidates.len() > 1);
                            found_tie = true;
                        }
                    }
                }
            }
        }
        assert!(
            found_tie,
            "single errors on a distance-2 code must tie somewhere"
        );
    }
}
