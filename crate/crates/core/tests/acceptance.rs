//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS line (run with `--nocapture` to see them; the harness prints one
//! ok/FAILED line per criterion either way). Golden values come from the
//! hand-verified relay fixture and the combination-network counting
//! benchmark; property criteria run seeded randomized sweeps.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nectk::decoder;
use nectk::ff::{FieldMatrix, FieldSpec};
use nectk::metrics;
use nectk::nec_code::NecCode;
use nectk::randomized::{self, Target, TrialConfig};
use nectk::samples;
use nectk::topology::{binomial, EnumLimit, ErrorPattern, Network};
use nectk::variable_rate::{self, KStrategy, ReductionVector};

fn pass(n: u32, what: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    assert!(
        elapsed < budget,
        "criterion {n} exceeded its runtime budget: {elapsed:?} >= {budget:?}"
    );
    println!("criterion {n:02} PASS ({elapsed:?}): {what}");
}

/// Criterion 1: the relay network file and its GF(3) kernels reproduce all
/// nine extended global encoding kernels and both decoding matrices exactly.
#[test]
fn criterion_01_golden_forward() {
    let started = Instant::now();
    // exercise the full loading path: serialize, reparse, derive
    let net = Arc::new(Network::from_json_str(&samples::relay_network().to_json_string()).unwrap());
    let code =
        NecCode::from_json_str(net.clone(), &samples::relay_code().to_json_string()).unwrap();
    let ek = code.extended_kernels();
    assert_eq!(ek.message_kernel(0), vec![1, 0, 0, 0, 0, 0, 0, 0, 0]);
    assert_eq!(ek.message_kernel(1), vec![0, 1, 0, 0, 0, 0, 0, 0, 0]);
    let expected: [[u64; 9]; 7] = [
        [1, 1, 1, 0, 0, 0, 0, 0, 0],
        [1, 0, 0, 1, 0, 0, 0, 0, 0],
        [0, 1, 0, 0, 1, 0, 0, 0, 0],
        [1, 1, 0, 0, 0, 1, 0, 0, 0],
        [1, 0, 0, 0, 0, 0, 1, 0, 0],
        [0, 1, 0, 0, 1, 0, 0, 1, 0],
        [0, 1, 0, 0, 1, 0, 0, 0, 1],
    ];
    for (e, want) in expected.iter().enumerate() {
        assert_eq!(ek.vector(e), want, "extended kernel of channel index {e}");
    }
    let f3 = code.field();
    let t1 = net.node_index("t1").unwrap();
    let t2 = net.node_index("t2").unwrap();
    let want_t1 = FieldMatrix::from_rows(
        f3,
        &[
            vec![1, 1, 0],
            vec![1, 0, 1],
            vec![1, 0, 0],
            vec![0, 1, 0],
            vec![0, 0, 1],
            vec![0, 0, 0],
            vec![0, 0, 0],
            vec![0, 0, 1],
            vec![0, 0, 0],
        ],
    )
    .unwrap();
    let want_t2 = FieldMatrix::from_rows(
        f3,
        &[
            vec![1, 1, 0],
            vec![1, 0, 1],
            vec![0, 0, 0],
            vec![0, 0, 0],
            vec![0, 0, 1],
            vec![1, 0, 0],
            vec![0, 1, 0],
            vec![0, 0, 0],
            vec![0, 0, 1],
        ],
    )
    .unwrap();
    assert_eq!(code.decoding_matrix(t1).unwrap().full(), &want_t1);
    assert_eq!(code.decoding_matrix(t2).unwrap().full(), &want_t2);
    pass(
        1,
        "nine extended kernels and both decoding matrices, entry-exact",
        started,
        Duration::from_secs(1),
    );
}

/// Criterion 2: verification reports minimum distance 2 and MDS at both sinks.
#[test]
fn criterion_02_golden_distance() {
    let started = Instant::now();
    let code = samples::relay_code();
    let report = metrics::verify_mds(&code);
    assert!(report.regular);
    assert!(report.is_mds);
    assert_eq!(report.sinks.len(), 2);
    for s in &report.sinks {
        assert_eq!(s.d_min, Some(2), "sink {}", s.sink);
        assert!(s.mds_at_sink);
    }
    pass(
        2,
        "fixture verifies MDS with d_min = 2 at both sinks",
        started,
        Duration::from_secs(1),
    );
}

/// Criterion 3: reduction with k = 1 reproduces the known rate-1 code:
/// folded source row (2,1,1,2,1), reduced decoding matrices, d_min = 3,
/// internal kernels untouched.
#[test]
fn criterion_03_golden_reduction() {
    let started = Instant::now();
    let code = samples::relay_code();
    let net = code.network().clone();
    let k = ReductionVector::new(code.field(), vec![1]).unwrap();
    let reduced = variable_rate::reduce_rate(&code, &k).unwrap();
    let source_kernel = reduced.local_kernels().kernel(net.source()).unwrap();
    assert_eq!(source_kernel.row(0), &[2, 1, 1, 2, 1]);
    let relay = net.node_index("i").unwrap();
    assert_eq!(
        reduced.local_kernels().kernel(relay),
        code.local_kernels().kernel(relay),
        "internal kernel must be unchanged"
    );
    let f3 = code.field();
    let t1 = net.node_index("t1").unwrap();
    let t2 = net.node_index("t2").unwrap();
    let want_t1 = FieldMatrix::from_rows(
        f3,
        &[
            vec![2, 1, 1],
            vec![1, 0, 0],
            vec![0, 1, 0],
            vec![0, 0, 1],
            vec![0, 0, 0],
            vec![0, 0, 0],
            vec![0, 0, 1],
            vec![0, 0, 0],
        ],
    )
    .unwrap();
    let want_t2 = FieldMatrix::from_rows(
        f3,
        &[
            vec![2, 1, 1],
            vec![0, 0, 0],
            vec![0, 0, 0],
            vec![0, 0, 1],
            vec![1, 0, 0],
            vec![0, 1, 0],
            vec![0, 0, 0],
            vec![0, 0, 1],
        ],
    )
    .unwrap();
    assert_eq!(reduced.decoding_matrix(t1).unwrap().full(), &want_t1);
    assert_eq!(reduced.decoding_matrix(t2).unwrap().full(), &want_t2);
    let report = metrics::verify_mds(&reduced);
    assert!(report.is_mds);
    for s in &report.sinks {
        assert_eq!(s.d_min, Some(3));
    }
    pass(
        3,
        "k = 1 reduction reproduces the rate-1 code exactly with d_min = 3",
        started,
        Duration::from_secs(1),
    );
}

/// Criterion 4: combination network N=6, k=4 counting benchmark —
/// per-sink |R_t(2)| = 24 and |R_t(3)| = 32, sums 360 and 480, and the
/// binomial values 32175 (= Σ_t C(66,2)) and 45760 (= C(66,3)).
#[test]
fn criterion_04_combination_counts() {
    let started = Instant::now();
    let net = Network::combination(6, 4);
    assert_eq!(net.channel_count(), 66);
    assert_eq!(net.sinks().len(), 15);
    let limit = EnumLimit {
        max_channels: 70,
        max_delta: 4,
    };
    for &t in net.sinks() {
        assert_eq!(net.min_cut(t).unwrap(), 4);
        assert_eq!(net.rt_size(t, 2, limit).unwrap(), 24);
        assert_eq!(net.rt_size(t, 3, limit).unwrap(), 32);
    }
    assert_eq!(net.rt_sum_uniform(2, limit).unwrap(), 360);
    assert_eq!(net.rt_sum_uniform(3, limit).unwrap(), 480);
    assert_eq!(15 * binomial(66, 2), 32175);
    assert_eq!(binomial(66, 3), 45760);
    // formula-consistent closed-form bound from the same machinery
    let bound = variable_rate::field_size_bound(&net, 2, limit).unwrap();
    assert_eq!(bound.exact_terms, Some(vec![360, 480]));
    assert_eq!(bound.exact, Some(480));
    assert_eq!(bound.binomial_terms, vec![32175, 15 * 45760]);
    pass(
        4,
        "R_t sizes 24/32, sums 360/480, binomial values 32175/45760",
        started,
        Duration::from_secs(60),
    );
}

fn regular_codes(
    net: &Arc<Network>,
    rate: usize,
    field: FieldSpec,
    want: usize,
    seed_base: u64,
) -> Vec<NecCode> {
    let mut out = Vec::new();
    let mut seed = seed_base;
    while out.len() < want {
        let code = randomized::random_code(net.clone(), rate, field, seed).unwrap();
        if code.is_regular() {
            out.push(code);
        }
        seed += 1;
    }
    out
}

/// Criterion 5: the three minimum-distance expressions (pattern size,
/// pattern rank, error-space dimension) agree on 120 random regular codes
/// across three small networks and two fields.
#[test]
fn criterion_05_distance_expression_equivalence() {
    let started = Instant::now();
    let networks = [
        Arc::new(samples::relay_network()),
        Arc::new(samples::diamond_network()),
        Arc::new(samples::parallel_paths_network()),
    ];
    let fields = [FieldSpec::new(3).unwrap(), FieldSpec::new(5).unwrap()];
    let mut checked = 0;
    for (ni, net) in networks.iter().enumerate() {
        let rate = 2.min(
            net.sinks()
                .iter()
                .map(|&t| net.min_cut(t).unwrap())
                .min()
                .unwrap(),
        );
        for (fi, &field) in fields.iter().enumerate() {
            let seed_base = (ni as u64) * 1000 + (fi as u64) * 100;
            for code in regular_codes(net, rate, field, 20, seed_base) {
                for &t in net.sinks() {
                    let d = metrics::min_distance(&code, t).unwrap();
                    let oracle = metrics::min_distance_oracle(&code, t).unwrap();
                    assert_eq!(d.d_min, oracle.by_size);
                    assert_eq!(oracle.by_size, oracle.by_rank);
                    assert_eq!(oracle.by_rank, oracle.by_dim);
                }
                checked += 1;
            }
        }
    }
    assert!(checked >= 100, "only {checked} codes checked");
    pass(
        5,
        "size/rank/dimension distance forms agree on 120 regular codes",
        started,
        Duration::from_secs(120),
    );
}

/// Criterion 6: refined Singleton bound d_min <= δ_t + 1 on 540 random
/// regular codes, zero violations.
#[test]
fn criterion_06_refined_singleton_property() {
    let started = Instant::now();
    let networks = [
        Arc::new(samples::relay_network()),
        Arc::new(samples::diamond_network()),
        Arc::new(samples::parallel_paths_network()),
    ];
    let fields = [FieldSpec::new(3).unwrap(), FieldSpec::new(5).unwrap()];
    let mut checked = 0;
    for (ni, net) in networks.iter().enumerate() {
        let min_cut = net
            .sinks()
            .iter()
            .map(|&t| net.min_cut(t).unwrap())
            .min()
            .unwrap();
        for (fi, &field) in fields.iter().enumerate() {
            for rate in 1..=min_cut.min(2) {
                let seed_base = 40_000 + (ni as u64) * 1000 + (fi as u64) * 100 + rate as u64;
                for code in regular_codes(net, rate, field, 50, seed_base) {
                    for &t in net.sinks() {
                        let delta = net.min_cut(t).unwrap() - rate;
                        // the oracle enumerates every pattern, so the bound
                        // is genuinely exercised rather than assumed
                        let oracle = metrics::min_distance_oracle(&code, t).unwrap();
                        assert!(
                            oracle.by_size <= delta + 1,
                            "singleton violation: d={} > {}",
                            oracle.by_size,
                            delta + 1
                        );
                    }
                    checked += 1;
                }
            }
        }
    }
    assert!(checked >= 500, "only {checked} codes checked");
    pass(
        6,
        "refined Singleton bound holds on 500+ random regular codes",
        started,
        Duration::from_secs(180),
    );
}

/// Criterion 7: families built from the GF(3) fixture and from a random
/// GF(31) construction are all-MDS with bit-identical internal kernels.
#[test]
fn criterion_07_family_invariants() {
    let started = Instant::now();
    let fixture_family =
        variable_rate::build_family_from(samples::relay_code(), KStrategy::Deterministic, 0)
            .unwrap();
    let net = Arc::new(samples::relay_network());
    let f31 = FieldSpec::new(31).unwrap();
    let random_family = variable_rate::build_family(net.clone(), 2, f31, 2024).unwrap();
    for (label, family) in [
        ("fixture GF(3)", &fixture_family),
        ("random GF(31)", &random_family),
    ] {
        assert_eq!(family.codes().len(), family.top_rate());
        for code in family.codes() {
            assert!(
                metrics::verify_mds(code).is_mds,
                "{label}: member at rate {} is not MDS",
                code.rate()
            );
        }
        assert!(
            family.shares_internal_kernels(),
            "{label}: internal kernels diverged"
        );
        // explicit pairwise check of every non-source kernel
        let source = family.codes()[0].network().source();
        for pair in family.codes().windows(2) {
            for node in pair[0].local_kernels().nodes() {
                if node == source {
                    continue;
                }
                assert_eq!(
                    pair[0].local_kernels().kernel(node),
                    pair[1].local_kernels().kernel(node)
                );
            }
        }
    }
    pass(
        7,
        "both families are all-MDS and share internal kernels bit-exactly",
        started,
        Duration::from_secs(60),
    );
}

/// Criterion 8: folding a regular rate-3 code over GF(5) with 100 random
/// vectors always leaves the message part at rank 2 at every sink.
#[test]
fn criterion_08_fold_preserves_rank() {
    let started = Instant::now();
    let net = Arc::new(samples::relay_network());
    let f5 = FieldSpec::new(5).unwrap();
    let code = variable_rate::construct_mds(net.clone(), 3, f5, 77).unwrap();
    assert!(code.is_regular());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let values: Vec<u64> = (0..2).map(|_| rng.random_range(0..5)).collect();
        let k = ReductionVector::new(f5, values.clone()).unwrap();
        let reduced = variable_rate::reduce_rate(&code, &k).unwrap();
        for &t in net.sinks() {
            // route one: the reduced code's own message part
            let via_code = reduced.decoding_matrix(t).unwrap().message_part();
            assert_eq!(via_code.rank(), 2);
            // route two: direct [I | k] fold of the original F_t
            let f_t = code.decoding_matrix(t).unwrap().message_part();
            let fold = FieldMatrix::from_rows(f5, &[vec![1, 0, values[0]], vec![0, 1, values[1]]])
                .unwrap();
            let direct = fold.matmul(&f_t).unwrap();
            assert_eq!(direct, via_code);
            assert_eq!(direct.rank(), 2);
        }
    }
    pass(
        8,
        "100 random folds of a rate-3 code keep rank 2 at every sink",
        started,
        Duration::from_secs(60),
    );
}

/// Criterion 9: on the fixture, every 2-pattern in Q(t) has intersection
/// dimension exactly 1, checked exhaustively over all 21 channel pairs.
#[test]
fn criterion_09_critical_patterns_have_dimension_one() {
    let started = Instant::now();
    let code = samples::relay_code();
    let net = code.network().clone();
    for &t in net.sinks() {
        let q = metrics::compute_q(&code, t).unwrap();
        assert!(!q.is_empty());
        let phi = metrics::message_space(&code, t).matrix;
        let mut members = 0;
        let mut pairs = 0;
        for a in 0..net.channel_count() {
            for b in (a + 1)..net.channel_count() {
                pairs += 1;
                let pattern = ErrorPattern::new(&net, vec![a, b]).unwrap();
                let delta = metrics::error_space(&code, t, &pattern).matrix;
                let dim = delta.intersection_dim(&phi).unwrap();
                if q.contains(&pattern) {
                    assert_eq!(dim, 1, "member of Q(t) must have dimension exactly 1");
                    members += 1;
                } else {
                    assert_eq!(dim, 0, "non-member pair must not intersect");
                }
            }
        }
        assert_eq!(pairs, 21);
        assert_eq!(members, q.len());
        assert_eq!(members, 5);
    }
    pass(
        9,
        "all 21 pairs classified; Q members have dimension exactly 1",
        started,
        Duration::from_secs(10),
    );
}

/// Criterion 10: 2000-trial Monte-Carlo on GF(31) stays above the
/// theoretical lower bounds (Wilson 95% lower limit vs bound).
#[test]
fn criterion_10_probability_bounds_hold() {
    let started = Instant::now();
    let net = Arc::new(samples::relay_network());
    let f31 = FieldSpec::new(31).unwrap();
    let cfg = TrialConfig {
        rate: 2,
        trials: 2000,
        seed: 31337,
    };
    let mds =
        randomized::estimate_success(net.clone(), f31, cfg, Target::Mds, EnumLimit::default())
            .unwrap();
    assert!(
        mds.wilson_low >= mds.mds_bound,
        "MDS: wilson low {} fell below the bound {}",
        mds.wilson_low,
        mds.mds_bound
    );
    let joint =
        randomized::estimate_success(net, f31, cfg, Target::JointFamily, EnumLimit::default())
            .unwrap();
    let joint_bound = joint.joint_bounds.expect("joint target carries bounds");
    assert!(
        joint.wilson_low >= joint_bound.exact_form,
        "joint: wilson low {} fell below the bound {}",
        joint.wilson_low,
        joint_bound.exact_form
    );
    assert!(joint.wilson_low >= joint_bound.binomial_form);
    pass(
        10,
        "2000-trial estimates clear the MDS and joint lower bounds",
        started,
        Duration::from_secs(300),
    );
}

/// Criterion 11: the rate-1 family member corrects every single-channel
/// error for every message at both sinks — 42 scenarios, zero failures.
#[test]
fn criterion_11_decoding_capability() {
    let started = Instant::now();
    let code = samples::relay_code();
    let k = ReductionVector::new(code.field(), vec![1]).unwrap();
    let rate1 = variable_rate::reduce_rate(&code, &k).unwrap();
    let net = rate1.network().clone();
    for &t in net.sinks() {
        assert_eq!(decoder::correction_radius(&rate1, t).unwrap(), 1);
    }
    let mut scenarios = 0;
    for x in 0..3u64 {
        for e in 0..net.channel_count() {
            for v in 1..3u64 {
                let pattern = ErrorPattern::new(&net, vec![e]).unwrap();
                let results = decoder::simulate(&rate1, &[x], &pattern, &[v]).unwrap();
                for (t, r) in results {
                    assert!(!r.is_ambiguous(), "ambiguity inside the correction radius");
                    assert_eq!(
                        r.decoded.as_deref(),
                        Some(&[x][..]),
                        "x={x} channel={} value={v} sink={}",
                        net.channel(e).id,
                        net.node_name(t)
                    );
                }
                scenarios += 1;
            }
        }
    }
    assert_eq!(scenarios, 42);
    pass(
        11,
        "42 single-error scenarios all decode to the sent message",
        started,
        Duration::from_secs(10),
    );
}
