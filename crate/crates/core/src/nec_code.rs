//! Linear network error correction codes: the local description (per-node
//! encoding kernels) and the derived global description (extended global
//! encoding kernels and per-sink decoding matrices).
//!
//! Every vector indexed by `In(s) ∪ E` uses the layout: the ω imaginary
//! message channels first, then the real channels in network order. Errors
//! enter through the `+ 1_e` term of the kernel recursion, so imaginary
//! error channels never need to be materialized as graph edges.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ff::{FfError, FieldMatrix, FieldSpec};
use crate::topology::{Network, TopologyError};

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("rate must satisfy 1 <= rate <= min-cut; got rate {rate} with min-cut {min_cut}")]
    RateOutOfRange { rate: usize, min_cut: usize },
    #[error("kernel missing for non-sink node {0}")]
    MissingKernel(String),
    #[error("kernel given for unexpected node {0}")]
    UnexpectedKernel(String),
    #[error("kernel at node {node} has shape {got_rows}x{got_cols}, expected {rows}x{cols}")]
    KernelShape {
        node: String,
        rows: usize,
        cols: usize,
        got_rows: usize,
        got_cols: usize,
    },
    #[error("kernel at node {node} is over GF({got}), expected GF({expected})")]
    KernelField {
        node: String,
        expected: u64,
        got: u64,
    },
    #[error("message length {got} does not match rate {rate}")]
    MessageLength { rate: usize, got: usize },
    #[error("error vector length {got} does not match channel count {channels}")]
    ErrorLength { channels: usize, got: usize },
    #[error("value {value} is not a canonical element of GF({modulus})")]
    ValueOutOfRange { value: u64, modulus: u64 },
    #[error("node {0} is not a sink")]
    NotASink(String),
    #[error("code file parse error: {0}")]
    Parse(String),
    #[error("code file channel labels for node {node} do not match the network")]
    LabelMismatch { node: String },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Field(#[from] FfError),
}

/// The local description: one encoding kernel per non-sink node.
///
/// At the source the rows are indexed by the ω imaginary message channels;
/// everywhere else by the real incoming channels in network order. Columns
/// are always the outgoing channels in network order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalKernels {
    field: FieldSpec,
    rate: usize,
    kernels: BTreeMap<usize, FieldMatrix>,
}

impl LocalKernels {
    /// Validates shapes against the network and the rate against the
    /// smallest sink min-cut.
    pub fn new(
        network: &Network,
        field: FieldSpec,
        rate: usize,
        kernels: Vec<(usize, FieldMatrix)>,
    ) -> Result<Self, CodeError> {
        let min_cut = network
            .sinks()
            .iter()
            .map(|&t| network.min_cut(t).expect("sink"))
            .min()
            .unwrap_or(0);
        if rate < 1 || rate > min_cut {
            return Err(CodeError::RateOutOfRange { rate, min_cut });
        }
        let mut map = BTreeMap::new();
        for (node, k) in kernels {
            if network.is_sink(node) {
                return Err(CodeError::UnexpectedKernel(
                    network.node_name(node).to_string(),
                ));
            }
            map.insert(node, k);
        }
        let lk = LocalKernels {
            field,
            rate,
            kernels: map,
        };
        lk.check_shapes(network)?;
        Ok(lk)
    }

    /// All-zero kernels at every non-sink node.
    pub fn zeros(network: &Network, field: FieldSpec, rate: usize) -> Result<Self, CodeError> {
        let kernels = (0..network.node_count())
            .filter(|&n| !network.is_sink(n))
            .map(|n| {
                let rows = if n == network.source() {
                    rate
                } else {
                    network.in_channels(n).len()
                };
                (
                    n,
                    FieldMatrix::zeros(field, rows, network.out_channels(n).len()),
                )
            })
            .collect();
        LocalKernels::new(network, field, rate, kernels)
    }

    /// Every coefficient (source kernel included) drawn i.i.d. uniformly
    /// from the field. Nodes are visited in index order and entries
    /// row-major, so a seeded generator reproduces the same kernels.
    pub fn random(
        network: &Network,
        field: FieldSpec,
        rate: usize,
        rng: &mut impl rand::Rng,
    ) -> Result<Self, CodeError> {
        let p = field.modulus();
        let kernels = (0..network.node_count())
            .filter(|&n| !network.is_sink(n))
            .map(|n| {
                let rows = if n == network.source() {
                    rate
                } else {
                    network.in_channels(n).len()
                };
                let cols = network.out_channels(n).len();
                let mut k = FieldMatrix::zeros(field, rows, cols);
                for r in 0..rows {
                    for c in 0..cols {
                        k.set(r, c, rng.random_range(0..p));
                    }
                }
                (n, k)
            })
            .collect();
        LocalKernels::new(network, field, rate, kernels)
    }

    fn check_shapes(&self, network: &Network) -> Result<(), CodeError> {
        for n in 0..network.node_count() {
            if network.is_sink(n) {
                continue;
            }
            let name = network.node_name(n).to_string();
            let k = self
                .kernels
                .get(&n)
                .ok_or_else(|| CodeError::MissingKernel(name.clone()))?;
            let rows = if n == network.source() {
                self.rate
            } else {
                network.in_channels(n).len()
            };
            let cols = network.out_channels(n).len();
            if k.rows() != rows || k.cols() != cols {
                return Err(CodeError::KernelShape {
                    node: name,
                    rows,
                    cols,
                    got_rows: k.rows(),
                    got_cols: k.cols(),
                });
            }
            if k.field() != self.field {
                return Err(CodeError::KernelField {
                    node: name,
                    expected: self.field.modulus(),
                    got: k.field().modulus(),
                });
            }
        }
        Ok(())
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rate(&self) -> usize {
        self.rate
    }

    pub fn kernel(&self, node: usize) -> Option<&FieldMatrix> {
        self.kernels.get(&node)
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.kernels.keys().copied()
    }

    /// Local coefficient k_{d,e} for a real channel pair (d enters tail(e)).
    pub fn coefficient(&self, network: &Network, d: usize, e: usize) -> u64 {
        let tail = network.channel(e).tail;
        let k = &self.kernels[&tail];
        let row = network
            .in_channels(tail)
            .iter()
            .position(|&c| c == d)
            .expect("d enters tail(e)");
        let col = network
            .out_channels(tail)
            .iter()
            .position(|&c| c == e)
            .expect("e leaves tail(e)");
        k.get(row, col)
    }

    /// Source coefficient k_{d'_i,e} for an imaginary message channel index.
    pub fn source_coefficient(&self, network: &Network, i: usize, e: usize) -> u64 {
        let k = &self.kernels[&network.source()];
        let col = network
            .out_channels(network.source())
            .iter()
            .position(|&c| c == e)
            .expect("e leaves the source");
        k.get(i, col)
    }
}

/// The extended global encoding kernels f̃_e, one (ω+|E|)-vector per channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedKernels {
    field: FieldSpec,
    rate: usize,
    channel_count: usize,
    vectors: Vec<Vec<u64>>,
}

impl ExtendedKernels {
    /// Computes all extended kernels in topological channel order via the
    /// recursion f̃_e = Σ_{d∈In(tail(e))} k_{d,e}·f̃_d + 1_e, with the unit
    /// boundary vectors on the imaginary channels.
    pub fn derive(network: &Network, kernels: &LocalKernels) -> Result<Self, CodeError> {
        kernels.check_shapes(network)?;
        let field = kernels.field();
        let rate = kernels.rate();
        let m = network.channel_count();
        let dim = rate + m;
        let mut vectors: Vec<Vec<u64>> = Vec::with_capacity(m);
        for (e, chan) in network.channels().iter().enumerate() {
            let mut v = vec![0u64; dim];
            if chan.tail == network.source() {
                for (i, slot) in v.iter_mut().take(rate).enumerate() {
                    *slot = kernels.source_coefficient(network, i, e);
                }
            } else {
                for &d in network.in_channels(chan.tail) {
                    let k = kernels.coefficient(network, d, e);
                    if k == 0 {
                        continue;
                    }
                    // channel order guarantees d was already computed
                    for (slot, &coord) in v.iter_mut().zip(&vectors[d]) {
                        *slot = field.add(*slot, field.mul(k, coord));
                    }
                }
            }
            v[rate + e] = field.add(v[rate + e], 1);
            vectors.push(v);
        }
        Ok(ExtendedKernels {
            field,
            rate,
            channel_count: m,
            vectors,
        })
    }

    pub fn rate(&self) -> usize {
        self.rate
    }

    /// f̃_e for a real channel.
    pub fn vector(&self, e: usize) -> &[u64] {
        &self.vectors[e]
    }

    /// Top block f_e: coefficients on the source messages.
    pub fn message_part(&self, e: usize) -> &[u64] {
        &self.vectors[e][..self.rate]
    }

    /// Bottom block g_e: coefficients on the channel errors.
    pub fn error_part(&self, e: usize) -> &[u64] {
        &self.vectors[e][self.rate..]
    }

    /// f̃_{d'_i}: the unit vector of the i-th imaginary message channel
    /// (0-based), fixed by convention.
    pub fn message_kernel(&self, i: usize) -> Vec<u64> {
        assert!(i < self.rate, "imaginary message channel out of range");
        let mut v = vec![0u64; self.rate + self.channel_count];
        v[i] = 1;
        v
    }

    /// f̃_{e'}: the unit vector of the imaginary error channel of `e`,
    /// fixed by convention.
    pub fn error_kernel(&self, e: usize) -> Vec<u64> {
        assert!(e < self.channel_count, "channel out of range");
        let mut v = vec![0u64; self.rate + self.channel_count];
        v[self.rate + e] = 1;
        v
    }
}

/// The decoding matrix F̃_t of one sink: columns are the extended kernels of
/// its incoming channels, in channel order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodingMatrix {
    sink: usize,
    rate: usize,
    matrix: FieldMatrix,
}

impl DecodingMatrix {
    pub fn sink(&self) -> usize {
        self.sink
    }

    /// The full (ω+|E|) × |In(t)| matrix.
    pub fn full(&self) -> &FieldMatrix {
        &self.matrix
    }

    /// F_t: the top ω rows, mapping messages to received symbols.
    pub fn message_part(&self) -> FieldMatrix {
        self.matrix.select_rows(&(0..self.rate).collect::<Vec<_>>())
    }

    /// G_t: the bottom |E| rows, mapping channel errors to received symbols.
    pub fn error_part(&self) -> FieldMatrix {
        self.matrix
            .select_rows(&(self.rate..self.matrix.rows()).collect::<Vec<_>>())
    }

    /// Row r̃_t(d'_i) for an imaginary message channel (0-based).
    pub fn message_row(&self, i: usize) -> &[u64] {
        assert!(i < self.rate);
        self.matrix.row(i)
    }

    /// Row r̃_t(e) for a real channel.
    pub fn channel_row(&self, e: usize) -> &[u64] {
        self.matrix.row(self.rate + e)
    }
}

/// An ω-dimensional linear network error correction code: the network, the
/// local kernels, and everything derived from them. Immutable after
/// derivation.
#[derive(Debug, Clone)]
pub struct NecCode {
    network: Arc<Network>,
    field: FieldSpec,
    rate: usize,
    local: LocalKernels,
    extended: ExtendedKernels,
    decoding: Vec<DecodingMatrix>,
}

impl NecCode {
    pub fn derive(network: Arc<Network>, local: LocalKernels) -> Result<Self, CodeError> {
        let extended = ExtendedKernels::derive(&network, &local)?;
        let decoding = network
            .sinks()
            .iter()
            .map(|&t| {
                let cols: Vec<Vec<u64>> = network
                    .in_channels(t)
                    .iter()
                    .map(|&e| extended.vector(e).to_vec())
                    .collect();
                DecodingMatrix {
                    sink: t,
                    rate: local.rate(),
                    matrix: FieldMatrix::from_columns(local.field(), &cols)
                        .expect("extended kernels share a dimension"),
                }
            })
            .collect();
        Ok(NecCode {
            field: local.field(),
            rate: local.rate(),
            network,
            local,
            extended,
            decoding,
        })
    }

    pub fn network(&self) -> &Arc<Network> {
        &self.network
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rate(&self) -> usize {
        self.rate
    }

    pub fn local_kernels(&self) -> &LocalKernels {
        &self.local
    }

    pub fn extended_kernels(&self) -> &ExtendedKernels {
        &self.extended
    }

    pub fn decoding_matrix(&self, sink: usize) -> Result<&DecodingMatrix, CodeError> {
        self.decoding
            .iter()
            .find(|d| d.sink == sink)
            .ok_or_else(|| {
                CodeError::NotASink(
                    self.network
                        .node_name(sink.min(self.network.node_count() - 1))
                        .to_string(),
                )
            })
    }

    /// Regularity: Rank(F_t) = ω at every sink, the precondition for
    /// error-free decodability.
    pub fn is_regular(&self) -> bool {
        self.decoding
            .iter()
            .all(|d| d.message_part().rank() == self.rate)
    }

    fn check_message(&self, x: &[u64]) -> Result<(), CodeError> {
        if x.len() != self.rate {
            return Err(CodeError::MessageLength {
                rate: self.rate,
                got: x.len(),
            });
        }
        self.check_values(x)
    }

    fn check_error(&self, z: &[u64]) -> Result<(), CodeError> {
        if z.len() != self.network.channel_count() {
            return Err(CodeError::ErrorLength {
                channels: self.network.channel_count(),
                got: z.len(),
            });
        }
        self.check_values(z)
    }

    fn check_values(&self, vals: &[u64]) -> Result<(), CodeError> {
        for &v in vals {
            if v >= self.field.modulus() {
                return Err(CodeError::ValueOutOfRange {
                    value: v,
                    modulus: self.field.modulus(),
                });
            }
        }
        Ok(())
    }

    /// The decoding equation: Ũ_t = (X Z)·F̃_t = X·F_t + Z·G_t per sink.
    /// Returns the received vectors aligned with `network.sinks()`.
    pub fn transmit(&self, x: &[u64], z: &[u64]) -> Result<Vec<Vec<u64>>, CodeError> {
        self.check_message(x)?;
        self.check_error(z)?;
        let mut xz = Vec::with_capacity(self.rate + z.len());
        xz.extend_from_slice(x);
        xz.extend_from_slice(z);
        Ok(self
            .decoding
            .iter()
            .map(|d| d.full().row_vec_mul(&xz))
            .collect())
    }

    /// Hop-by-hop simulation: Ũ_e = Σ k_{d,e}·Ũ_d + Z_e, evaluated in
    /// channel order. Returns all channel symbols plus the per-sink
    /// received vectors; must agree with [`NecCode::transmit`].
    pub fn propagate(&self, x: &[u64], z: &[u64]) -> Result<(Vec<u64>, Vec<Vec<u64>>), CodeError> {
        self.check_message(x)?;
        self.check_error(z)?;
        let f = self.field;
        let mut symbols = vec![0u64; self.network.channel_count()];
        for (e, chan) in self.network.channels().iter().enumerate() {
            let mut acc = 0u64;
            if chan.tail == self.network.source() {
                for (i, &xi) in x.iter().enumerate() {
                    let k = self.local.source_coefficient(&self.network, i, e);
                    acc = f.add(acc, f.mul(k, xi));
                }
            } else {
                for &d in self.network.in_channels(chan.tail) {
                    let k = self.local.coefficient(&self.network, d, e);
                    acc = f.add(acc, f.mul(k, symbols[d]));
                }
            }
            symbols[e] = f.add(acc, z[e]);
        }
        let received = self
            .network
            .sinks()
            .iter()
            .map(|&t| {
                self.network
                    .in_channels(t)
                    .iter()
                    .map(|&e| symbols[e])
                    .collect()
            })
            .collect();
        Ok((symbols, received))
    }

    /// Canonical JSON serialization: kernels sorted by node id, channel
    /// labels in network order. Identical codes serialize to identical
    /// bytes.
    pub fn to_json_string(&self) -> String {
        let mut kernels: Vec<KernelDoc> = self
            .local
            .kernels
            .iter()
            .map(|(&node, k)| {
                let in_labels = if node == self.network.source() {
                    (1..=self.rate).map(|i| format!("d'{i}")).collect()
                } else {
                    self.network
                        .in_channels(node)
                        .iter()
                        .map(|&e| self.network.channel(e).id.clone())
                        .collect()
                };
                KernelDoc {
                    node: self.network.node_name(node).to_string(),
                    in_channels: in_labels,
                    out_channels: self
                        .network
                        .out_channels(node)
                        .iter()
                        .map(|&e| self.network.channel(e).id.clone())
                        .collect(),
                    coefficients: k.row_vectors(),
                }
            })
            .collect();
        kernels.sort_by(|a, b| a.node.cmp(&b.node));
        let doc = CodeDoc {
            field: self.field.modulus(),
            rate: self.rate,
            kernels,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("code serializes");
        s.push('\n');
        s
    }

    /// Parses a code file against its network. Channel labels must match
    /// the network order exactly and all values must be canonical.
    pub fn from_json_str(network: Arc<Network>, s: &str) -> Result<Self, CodeError> {
        let doc: CodeDoc = serde_json::from_str(s).map_err(|e| CodeError::Parse(e.to_string()))?;
        let field = FieldSpec::new(doc.field).map_err(CodeError::Field)?;
        let mut kernels = Vec::new();
        for kd in &doc.kernels {
            let node = network.node_index(&kd.node)?;
            let expected_in: Vec<String> = if node == network.source() {
                (1..=doc.rate).map(|i| format!("d'{i}")).collect()
            } else {
                network
                    .in_channels(node)
                    .iter()
                    .map(|&e| network.channel(e).id.clone())
                    .collect()
            };
            let expected_out: Vec<String> = network
                .out_channels(node)
                .iter()
                .map(|&e| network.channel(e).id.clone())
                .collect();
            if kd.in_channels != expected_in || kd.out_channels != expected_out {
                return Err(CodeError::LabelMismatch {
                    node: kd.node.clone(),
                });
            }
            for row in &kd.coefficients {
                for &v in row {
                    if v >= field.modulus() {
                        return Err(CodeError::ValueOutOfRange {
                            value: v,
                            modulus: field.modulus(),
                        });
                    }
                }
            }
            kernels.push((node, FieldMatrix::from_rows(field, &kd.coefficients)?));
        }
        let local = LocalKernels::new(&network, field, doc.rate, kernels)?;
        NecCode::derive(network, local)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CodeDoc {
    field: u64,
    rate: usize,
    kernels: Vec<KernelDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct KernelDoc {
    node: String,
    #[serde(rename = "in")]
    in_channels: Vec<String>,
    #[serde(rename = "out")]
    out_channels: Vec<String>,
    coefficients: Vec<Vec<u64>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    fn relay_parts() -> (Arc<Network>, NecCode) {
        let code = samples::relay_code();
        (code.network().clone(), code)
    }

    #[test]
    fn extended_kernels_match_known_values() {
        let (net, code) = relay_parts();
        let ek = code.extended_kernels();
        let expect: [(usize, [u64; 9]); 7] = [
            (0, [1, 1, 1, 0, 0, 0, 0, 0, 0]),
            (1, [1, 0, 0, 1, 0, 0, 0, 0, 0]),
            (2, [0, 1, 0, 0, 1, 0, 0, 0, 0]),
            (3, [1, 1, 0, 0, 0, 1, 0, 0, 0]),
            (4, [1, 0, 0, 0, 0, 0, 1, 0, 0]),
            (5, [0, 1, 0, 0, 1, 0, 0, 1, 0]),
            (6, [0, 1, 0, 0, 1, 0, 0, 0, 1]),
        ];
        for (e, v) in expect {
            assert_eq!(ek.vector(e), v, "channel {}", net.channel(e).id);
        }
        assert_eq!(ek.message_kernel(0), vec![1, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(ek.message_kernel(1), vec![0, 1, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(ek.error_kernel(3)[2 + 3], 1);
    }

    #[test]
    fn decoding_matrices_match_known_values() {
        let (net, code) = relay_parts();
        let t1 = net.node_index("t1").unwrap();
        let t2 = net.node_index("t2").unwrap();
        let f3 = code.field();
        let expect_t1 = FieldMatrix::from_rows(
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
        let expect_t2 = FieldMatrix::from_rows(
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
        assert_eq!(code.decoding_matrix(t1).unwrap().full(), &expect_t1);
        assert_eq!(code.decoding_matrix(t2).unwrap().full(), &expect_t2);
    }

    #[test]
    fn decoding_matrix_columns_are_extended_kernels() {
        let (net, code) = relay_parts();
        for &t in net.sinks() {
            let d = code.decoding_matrix(t).unwrap();
            for (j, &e) in net.in_channels(t).iter().enumerate() {
                assert_eq!(d.full().column(j), code.extended_kernels().vector(e));
            }
        }
    }

    #[test]
    fn zero_kernels_collapse_to_indicators() {
        let net = Arc::new(samples::relay_network());
        let f3 = FieldSpec::new(3).unwrap();
        let local = LocalKernels::zeros(&net, f3, 2).unwrap();
        let code = NecCode::derive(net.clone(), local).unwrap();
        for e in 0..net.channel_count() {
            let mut expected = vec![0u64; 2 + 7];
            expected[2 + e] = 1;
            assert_eq!(code.extended_kernels().vector(e), expected);
        }
        assert!(!code.is_regular());
        for &t in net.sinks() {
            let d = code.decoding_matrix(t).unwrap();
            assert!(d.message_part().is_zero());
            // bottom block reduces to a 0/1 incidence pattern
            let g = d.error_part();
            for r in 0..g.rows() {
                for c in 0..g.cols() {
                    assert!(g.get(r, c) <= 1);
                }
            }
        }
    }

    #[test]
    fn regularity_of_fixture() {
        let (_, code) = relay_parts();
        assert!(code.is_regular());
    }

    #[test]
    fn transmit_known_values() {
        let (net, code) = relay_parts();
        let t1_pos = 0;
        let z = vec![0u64; 7];
        let received = code.transmit(&[1, 2], &z).unwrap();
        assert_eq!(received[t1_pos], vec![0, 1, 2]);
        // error-free transmission is X·F_t
        for (pos, &t) in net.sinks().iter().enumerate() {
            let f_t = code.decoding_matrix(t).unwrap().message_part();
            assert_eq!(received[pos], f_t.row_vec_mul(&[1, 2]));
        }
    }

    #[test]
    fn pure_error_selects_error_row() {
        let (net, code) = relay_parts();
        let mut z = vec![0u64; 7];
        z[3] = 1; // e4
        let received = code.transmit(&[0, 0], &z).unwrap();
        let t2 = net.node_index("t2").unwrap();
        let t2_pos = net.sinks().iter().position(|&t| t == t2).unwrap();
        assert_eq!(
            received[t2_pos],
            code.decoding_matrix(t2).unwrap().channel_row(3).to_vec()
        );
    }

    #[test]
    fn transmit_agrees_with_propagation_exhaustively() {
        let (net, code) = relay_parts();
        let p = code.field().modulus();
        let m = net.channel_count();
        let mut z = vec![0u64; m];
        // all messages, all error vectors over GF(3)^7
        for x1 in 0..p {
            for x2 in 0..p {
                let x = [x1, x2];
                for mask in 0..p.pow(m as u32) {
                    let mut rest = mask;
                    for slot in z.iter_mut() {
                        *slot = rest % p;
                        rest /= p;
                    }
                    let via_matrix = code.transmit(&x, &z).unwrap();
                    let (_, via_hops) = code.propagate(&x, &z).unwrap();
                    assert_eq!(via_matrix, via_hops);
                }
            }
        }
    }

    #[test]
    fn causality_of_error_block() {
        let (net, code) = relay_parts();
        let ek = code.extended_kernels();
        for e in 0..net.channel_count() {
            let g = ek.error_part(e);
            for (later, &gv) in g.iter().enumerate().skip(e + 1) {
                assert_eq!(gv, 0, "error of channel {later} leaked upstream");
            }
        }
    }

    #[test]
    fn rederivation_is_idempotent() {
        let (net, code) = relay_parts();
        let again = NecCode::derive(net, code.local_kernels().clone()).unwrap();
        assert_eq!(code.extended_kernels(), again.extended_kernels());
        for &t in again.network().sinks() {
            assert_eq!(
                code.decoding_matrix(t).unwrap().full(),
                again.decoding_matrix(t).unwrap().full()
            );
        }
    }

    #[test]
    fn shape_validation() {
        let net = Arc::new(samples::relay_network());
        let f3 = FieldSpec::new(3).unwrap();
        // wrong source shape: rate 2 needs 2 rows
        let bad = vec![
            (net.source(), FieldMatrix::zeros(f3, 1, 5)),
            (net.node_index("i").unwrap(), FieldMatrix::zeros(f3, 1, 2)),
        ];
        assert!(matches!(
            LocalKernels::new(&net, f3, 2, bad),
            Err(CodeError::KernelShape { .. })
        ));
        // rate above min-cut
        assert!(matches!(
            LocalKernels::zeros(&net, f3, 4),
            Err(CodeError::RateOutOfRange { .. })
        ));
        // missing internal kernel
        let missing = vec![(net.source(), FieldMatrix::zeros(f3, 2, 5))];
        assert!(matches!(
            LocalKernels::new(&net, f3, 2, missing),
            Err(CodeError::MissingKernel(_))
        ));
    }

    #[test]
    fn transmit_validates_dimensions() {
        let (_, code) = relay_parts();
        assert!(matches!(
            code.transmit(&[1], &[0; 7]),
            Err(CodeError::MessageLength { .. })
        ));
        assert!(matches!(
            code.transmit(&[1, 2], &[0; 6]),
            Err(CodeError::ErrorLength { .. })
        ));
        assert!(matches!(
            code.transmit(&[1, 3], &[0; 7]),
            Err(CodeError::ValueOutOfRange { .. })
        ));
    }

    #[test]
    fn json_round_trip_is_identical() {
        let (net, code) = relay_parts();
        let s = code.to_json_string();
        let back = NecCode::from_json_str(net, &s).unwrap();
        assert_eq!(back.to_json_string(), s);
        assert_eq!(back.extended_kernels(), code.extended_kernels());
    }

    #[test]
    fn json_rejects_label_and_value_mismatches() {
        let (net, code) = relay_parts();
        let s = code.to_json_string();
        let swapped = s.replace("\"e6\"", "\"eX\"");
        assert!(NecCode::from_json_str(net.clone(), &swapped).is_err());
        let too_big = s.replace(": 2,", ": 9,");
        let _ = too_big; // fixture has no standalone 2 coefficient; craft directly
        let mut doc: serde_json::Value = serde_json::from_str(&s).unwrap();
        doc["kernels"][0]["coefficients"][0][0] = serde_json::json!(7);
        let bad = serde_json::to_string(&doc).unwrap();
        assert!(matches!(
            NecCode::from_json_str(net, &bad),
            Err(CodeError::ValueOutOfRange { .. })
        ));
    }
}
