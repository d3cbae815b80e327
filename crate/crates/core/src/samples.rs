//! Small ready-made networks and codes used by tests, docs, and the demo
//! data files. The relay fixtures carry hand-verified golden values, so
//! golden tests never depend on randomized construction succeeding.

use std::sync::Arc;

use crate::ff::{FieldMatrix, FieldSpec};
use crate::nec_code::{LocalKernels, NecCode};
use crate::topology::Network;

/// Two-sink multicast network with one relay node and seven channels:
/// `e1,e2: s->t1`, `e3: s->i`, `e4,e5: s->t2`, `e6: i->t1`, `e7: i->t2`.
/// Both sinks have min-cut 3.
pub fn relay_network() -> Network {
    Network::new(
        vec!["s".into(), "i".into(), "t1".into(), "t2".into()],
        "s",
        &["t1".into(), "t2".into()],
        vec![
            ("e1".into(), "s".into(), "t1".into()),
            ("e2".into(), "s".into(), "t1".into()),
            ("e3".into(), "s".into(), "i".into()),
            ("e4".into(), "s".into(), "t2".into()),
            ("e5".into(), "s".into(), "t2".into()),
            ("e6".into(), "i".into(), "t1".into()),
            ("e7".into(), "i".into(), "t2".into()),
        ],
    )
    .expect("relay network is valid")
}

/// The rate-2 GF(3) MDS code on [`relay_network`] with known decoding
/// matrices and minimum distance 2 at both sinks.
pub fn relay_code() -> NecCode {
    let net = Arc::new(relay_network());
    let field = FieldSpec::new(3).unwrap();
    let source_kernel = FieldMatrix::from_rows(
        field,
        &[
            // columns e1..e5
            vec![1, 1, 0, 1, 1],
            vec![1, 0, 1, 1, 0],
        ],
    )
    .unwrap();
    let relay = net.node_index("i").unwrap();
    let relay_kernel = FieldMatrix::from_rows(field, &[vec![1, 1]]).unwrap();
    let kernels = vec![(net.source(), source_kernel), (relay, relay_kernel)];
    let local = LocalKernels::new(&net, field, 2, kernels).unwrap();
    NecCode::derive(net, local).unwrap()
}

/// Two-relay diamond with a shared middle node, eight channels, two sinks
/// of min-cut 2. A second small shape for randomized property suites.
pub fn diamond_network() -> Network {
    Network::new(
        vec![
            "s".into(),
            "a".into(),
            "b".into(),
            "c".into(),
            "t1".into(),
            "t2".into(),
        ],
        "s",
        &["t1".into(), "t2".into()],
        vec![
            ("e1".into(), "s".into(), "a".into()),
            ("e2".into(), "s".into(), "b".into()),
            ("e3".into(), "a".into(), "c".into()),
            ("e4".into(), "b".into(), "c".into()),
            ("e5".into(), "a".into(), "t1".into()),
            ("e6".into(), "b".into(), "t2".into()),
            ("e7".into(), "c".into(), "t1".into()),
            ("e8".into(), "c".into(), "t2".into()),
        ],
    )
    .expect("diamond network is valid")
}

/// Single sink behind two parallel length-two paths; four channels,
/// min-cut 2. The smallest shape with an internal bottleneck pair.
pub fn parallel_paths_network() -> Network {
    Network::new(
        vec!["s".into(), "a".into(), "b".into(), "t".into()],
        "s",
        &["t".into()],
        vec![
            ("e1".into(), "s".into(), "a".into()),
            ("e2".into(), "s".into(), "b".into()),
            ("e3".into(), "a".into(), "t".into()),
            ("e4".into(), "b".into(), "t".into()),
        ],
    )
    .expect("parallel paths network is valid")
}
