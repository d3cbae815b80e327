//! Acyclic multicast network model: channels kept in an upstream-to-downstream
//! order, unit capacities, min-cut queries, and error-pattern ranks computed
//! through the source-rewiring construction.

use std::collections::VecDeque;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("invalid network: {}", violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid { violations: Vec<Violation> },
    #[error("node {0} is not a sink")]
    NotASink(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("unknown channel {0}")]
    UnknownChannel(String),
    #[error("duplicate channel {0} in error pattern")]
    DuplicateInPattern(String),
    #[error("channel index {index} out of range for a network with {count} channels")]
    ChannelOutOfRange { index: usize, count: usize },
    #[error(
        "enumeration over {channels} channels at pattern size {delta} exceeds the cap \
         ({max_channels} channels, size {max_delta}); raise the limit explicitly to proceed"
    )]
    EnumerationCap {
        channels: usize,
        delta: usize,
        max_channels: usize,
        max_delta: usize,
    },
    #[error("expected {expected} per-sink sizes, got {got}")]
    SinkCountMismatch { expected: usize, got: usize },
    #[error("network parse error: {0}")]
    Parse(String),
}

/// A structural rule broken by a candidate network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    Cyclic,
    ChannelOrder { earlier: String, later: String },
    SourceIncoming { channel: String },
    SinkOutgoing { sink: String, channel: String },
    SinkUnreachable { sink: String },
    UnknownNode { name: String },
    DuplicateNode { name: String },
    DuplicateChannelId { id: String },
    NoSinks,
    SourceIsSink,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Cyclic => write!(f, "acyclic violated: the graph contains a cycle"),
            Violation::ChannelOrder { earlier, later } => write!(
                f,
                "channel order violated: {later} feeds {earlier} but is listed after it"
            ),
            Violation::SourceIncoming { channel } => {
                write!(
                    f,
                    "source in-degree violated: channel {channel} enters the source"
                )
            }
            Violation::SinkOutgoing { sink, channel } => {
                write!(
                    f,
                    "sink out-degree violated: channel {channel} leaves sink {sink}"
                )
            }
            Violation::SinkUnreachable { sink } => {
                write!(
                    f,
                    "reachability violated: sink {sink} is unreachable from the source"
                )
            }
            Violation::UnknownNode { name } => write!(f, "unknown node {name}"),
            Violation::DuplicateNode { name } => write!(f, "duplicate node {name}"),
            Violation::DuplicateChannelId { id } => write!(f, "duplicate channel id {id}"),
            Violation::NoSinks => write!(f, "sink set is empty"),
            Violation::SourceIsSink => write!(f, "the source cannot be a sink"),
        }
    }
}

/// A unit-capacity directed channel. Parallel channels between the same pair
/// of nodes are permitted and distinguished by their ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Channel {
    pub id: String,
    pub tail: usize,
    pub head: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct NetworkDoc {
    nodes: Vec<String>,
    source: String,
    sinks: Vec<String>,
    channels: Vec<ChannelDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ChannelDoc {
    id: String,
    tail: String,
    head: String,
}

/// Cap on the exhaustive error-pattern enumeration, which is exponential in
/// the channel count. The defaults keep accidental runs at desk scale;
/// callers that know what they are doing pass a larger limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumLimit {
    pub max_channels: usize,
    pub max_delta: usize,
}

impl Default for EnumLimit {
    fn default() -> Self {
        EnumLimit {
            max_channels: 40,
            max_delta: 4,
        }
    }
}

/// Single-source multicast DAG with unit-capacity channels.
///
/// The stored channel order is part of the model: it must be a valid
/// upstream-to-downstream order, and every matrix and vector in the rest of
/// the crate is indexed by it. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    nodes: Vec<String>,
    source: usize,
    sinks: Vec<usize>,
    channels: Vec<Channel>,
    in_channels: Vec<Vec<usize>>,
    out_channels: Vec<Vec<usize>>,
}

impl Network {
    /// Builds and validates a network. `channels` are (id, tail, head)
    /// triples whose order defines the upstream-to-downstream order.
    pub fn new(
        nodes: Vec<String>,
        source: &str,
        sinks: &[String],
        channels: Vec<(String, String, String)>,
    ) -> Result<Self, TopologyError> {
        let mut violations = Vec::new();

        let mut index_of = std::collections::HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index_of.insert(n.clone(), i).is_some() {
                violations.push(Violation::DuplicateNode { name: n.clone() });
            }
        }
        let lookup = |name: &str, violations: &mut Vec<Violation>| -> Option<usize> {
            match index_of.get(name) {
                Some(&i) => Some(i),
                None => {
                    violations.push(Violation::UnknownNode {
                        name: name.to_string(),
                    });
                    None
                }
            }
        };

        let source_idx = lookup(source, &mut violations);
        let mut sink_idx = Vec::new();
        for s in sinks {
            if let Some(i) = lookup(s, &mut violations) {
                sink_idx.push(i);
            }
        }
        if sinks.is_empty() {
            violations.push(Violation::NoSinks);
        }
        if let Some(s) = source_idx {
            if sink_idx.contains(&s) {
                violations.push(Violation::SourceIsSink);
            }
        }

        let mut chans = Vec::new();
        let mut seen_ids = std::collections::HashSet::new();
        for (id, tail, head) in &channels {
            if !seen_ids.insert(id.clone()) {
                violations.push(Violation::DuplicateChannelId { id: id.clone() });
            }
            let (t, h) = (lookup(tail, &mut violations), lookup(head, &mut violations));
            if let (Some(t), Some(h)) = (t, h) {
                chans.push(Channel {
                    id: id.clone(),
                    tail: t,
                    head: h,
                });
            }
        }

        if !violations.is_empty() {
            return Err(TopologyError::Invalid { violations });
        }
        let source = source_idx.expect("validated above");

        let mut in_channels = vec![Vec::new(); nodes.len()];
        let mut out_channels = vec![Vec::new(); nodes.len()];
        for (i, c) in chans.iter().enumerate() {
            out_channels[c.tail].push(i);
            in_channels[c.head].push(i);
        }

        let net = Network {
            nodes,
            source,
            sinks: sink_idx,
            channels: chans,
            in_channels,
            out_channels,
        };
        let violations = net.structural_violations();
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(TopologyError::Invalid { violations })
        }
    }

    /// Structural checks on an already-indexed graph: acyclicity, channel
    /// order consistency, degree rules at the source and sinks, and sink
    /// reachability.
    fn structural_violations(&self) -> Vec<Violation> {
        let mut violations = Vec::new();

        // Kahn's algorithm for acyclicity
        let mut indegree: Vec<usize> = self.nodes.iter().map(|_| 0).collect();
        for c in &self.channels {
            indegree[c.head] += 1;
        }
        let mut queue: VecDeque<usize> = (0..self.nodes.len())
            .filter(|&n| indegree[n] == 0)
            .collect();
        let mut seen = 0;
        while let Some(n) = queue.pop_front() {
            seen += 1;
            for &e in &self.out_channels[n] {
                let h = self.channels[e].head;
                indegree[h] -= 1;
                if indegree[h] == 0 {
                    queue.push_back(h);
                }
            }
        }
        if seen != self.nodes.len() {
            violations.push(Violation::Cyclic);
        }

        // the stored order must be upstream-to-downstream: every channel
        // entering a node precedes every channel leaving it
        for n in 0..self.nodes.len() {
            let max_in = self.in_channels[n].iter().max();
            let min_out = self.out_channels[n].iter().min();
            if let (Some(&max_in), Some(&min_out)) = (max_in, min_out) {
                if max_in > min_out {
                    violations.push(Violation::ChannelOrder {
                        earlier: self.channels[min_out].id.clone(),
                        later: self.channels[max_in].id.clone(),
                    });
                }
            }
        }

        for &e in &self.in_channels[self.source] {
            violations.push(Violation::SourceIncoming {
                channel: self.channels[e].id.clone(),
            });
        }
        for &t in &self.sinks {
            for &e in &self.out_channels[t] {
                violations.push(Violation::SinkOutgoing {
                    sink: self.nodes[t].clone(),
                    channel: self.channels[e].id.clone(),
                });
            }
        }

        let reachable = self.reachable_from(self.source);
        for &t in &self.sinks {
            if !reachable[t] {
                violations.push(Violation::SinkUnreachable {
                    sink: self.nodes[t].clone(),
                });
            }
        }
        violations
    }

    fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            for &e in &self.out_channels[n] {
                let h = self.channels[e].head;
                if !seen[h] {
                    seen[h] = true;
                    queue.push_back(h);
                }
            }
        }
        seen
    }

    pub fn from_json_str(s: &str) -> Result<Self, TopologyError> {
        let doc: NetworkDoc =
            serde_json::from_str(s).map_err(|e| TopologyError::Parse(e.to_string()))?;
        Network::new(
            doc.nodes,
            &doc.source,
            &doc.sinks,
            doc.channels
                .into_iter()
                .map(|c| (c.id, c.tail, c.head))
                .collect(),
        )
    }

    pub fn to_json_string(&self) -> String {
        let doc = NetworkDoc {
            nodes: self.nodes.clone(),
            source: self.nodes[self.source].clone(),
            sinks: self.sinks.iter().map(|&t| self.nodes[t].clone()).collect(),
            channels: self
                .channels
                .iter()
                .map(|c| ChannelDoc {
                    id: c.id.clone(),
                    tail: self.nodes[c.tail].clone(),
                    head: self.nodes[c.head].clone(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("network serializes");
        s.push('\n');
        s
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn node_name(&self, n: usize) -> &str {
        &self.nodes[n]
    }

    pub fn node_index(&self, name: &str) -> Result<usize, TopologyError> {
        self.nodes
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| TopologyError::UnknownNode(name.to_string()))
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sinks(&self) -> &[usize] {
        &self.sinks
    }

    pub fn is_sink(&self, n: usize) -> bool {
        self.sinks.contains(&n)
    }

    /// Number of internal nodes |J| (neither source nor sink).
    pub fn internal_count(&self) -> usize {
        self.nodes.len() - 1 - self.sinks.len()
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel(&self, e: usize) -> &Channel {
        &self.channels[e]
    }

    pub fn channel_index(&self, id: &str) -> Result<usize, TopologyError> {
        self.channels
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| TopologyError::UnknownChannel(id.to_string()))
    }

    /// Incoming channels of a node, ascending in channel order.
    pub fn in_channels(&self, n: usize) -> &[usize] {
        &self.in_channels[n]
    }

    /// Outgoing channels of a node, ascending in channel order.
    pub fn out_channels(&self, n: usize) -> &[usize] {
        &self.out_channels[n]
    }

    fn require_sink(&self, t: usize) -> Result<(), TopologyError> {
        if self.is_sink(t) {
            Ok(())
        } else {
            Err(TopologyError::NotASink(
                self.nodes
                    .get(t)
                    .cloned()
                    .unwrap_or_else(|| format!("#{t}")),
            ))
        }
    }

    /// Minimum cut capacity between the source and a sink: the value of a
    /// maximum flow with unit channel capacities.
    pub fn min_cut(&self, t: usize) -> Result<usize, TopologyError> {
        self.require_sink(t)?;
        let edges: Vec<(usize, usize)> = self.channels.iter().map(|c| (c.tail, c.head)).collect();
        Ok(max_flow_unit(self.nodes.len(), &edges, self.source, t))
    }

    /// Rank of an error pattern at a sink, via rewiring: a fresh node takes
    /// over as the tail of every pattern channel, and the rank is the
    /// min-cut from that node to the sink.
    pub fn pattern_rank(&self, pattern: &ErrorPattern, t: usize) -> Result<usize, TopologyError> {
        self.require_sink(t)?;
        pattern.check_against(self)?;
        if pattern.is_empty() {
            return Ok(0);
        }
        let rewired_source = self.nodes.len();
        let mut edges = Vec::with_capacity(self.channels.len());
        for (i, c) in self.channels.iter().enumerate() {
            if pattern.contains(i) {
                edges.push((rewired_source, c.head));
            } else {
                edges.push((c.tail, c.head));
            }
        }
        Ok(max_flow_unit(
            self.nodes.len() + 1,
            &edges,
            rewired_source,
            t,
        ))
    }

    /// Channels whose errors can influence the given node: those whose head
    /// is the node or can reach it.
    pub fn upstream_channels(&self, node: usize) -> Vec<usize> {
        let mut reaches = vec![false; self.nodes.len()];
        reaches[node] = true;
        // reverse BFS
        let mut queue = VecDeque::from([node]);
        while let Some(n) = queue.pop_front() {
            for &e in &self.in_channels[n] {
                let t = self.channels[e].tail;
                if !reaches[t] {
                    reaches[t] = true;
                    queue.push_back(t);
                }
            }
        }
        (0..self.channels.len())
            .filter(|&e| reaches[self.channels[e].head])
            .collect()
    }

    /// All error patterns of size `delta` whose rank at `t` equals `delta`.
    ///
    /// Only channels upstream of the sink can contribute to the rank, so the
    /// enumeration is restricted to them; a pattern containing any other
    /// channel has rank strictly below its size.
    pub fn enumerate_rt(
        &self,
        t: usize,
        delta: usize,
        limit: EnumLimit,
    ) -> Result<Vec<ErrorPattern>, TopologyError> {
        self.require_sink(t)?;
        if self.channels.len() > limit.max_channels || delta > limit.max_delta {
            return Err(TopologyError::EnumerationCap {
                channels: self.channels.len(),
                delta,
                max_channels: limit.max_channels,
                max_delta: limit.max_delta,
            });
        }
        if delta == 0 {
            return Ok(vec![ErrorPattern::empty()]);
        }
        let candidates = self.upstream_channels(t);
        let mut out = Vec::new();
        for combo in candidates.iter().copied().combinations(delta) {
            let pattern = ErrorPattern::from_sorted(combo);
            if self.pattern_rank(&pattern, t)? == delta {
                out.push(pattern);
            }
        }
        Ok(out)
    }

    /// |R_t(δ)| for one sink.
    pub fn rt_size(&self, t: usize, delta: usize, limit: EnumLimit) -> Result<u64, TopologyError> {
        Ok(self.enumerate_rt(t, delta, limit)?.len() as u64)
    }

    /// Σ_t |R_t(δ_t)| with one size per sink, aligned with `sinks()`.
    pub fn rt_sum(&self, deltas: &[usize], limit: EnumLimit) -> Result<u64, TopologyError> {
        if deltas.len() != self.sinks.len() {
            return Err(TopologyError::SinkCountMismatch {
                expected: self.sinks.len(),
                got: deltas.len(),
            });
        }
        let mut total = 0u64;
        for (&t, &d) in self.sinks.iter().zip(deltas) {
            total += self.rt_size(t, d, limit)?;
        }
        Ok(total)
    }

    /// Σ_t |R_t(δ)| with the same size at every sink.
    pub fn rt_sum_uniform(&self, delta: usize, limit: EnumLimit) -> Result<u64, TopologyError> {
        let deltas = vec![delta; self.sinks.len()];
        self.rt_sum(&deltas, limit)
    }

    /// The (N, k) combination network: the source feeds N relay nodes, and
    /// every k-subset of relays feeds one sink. A standard counting
    /// benchmark with C_t = k at each of the C(N, k) sinks.
    pub fn combination(n_relays: usize, k: usize) -> Network {
        assert!(k >= 1 && k <= n_relays, "need 1 <= k <= N");
        let mut nodes = vec!["s".to_string()];
        for i in 1..=n_relays {
            nodes.push(format!("i{i}"));
        }
        let subsets: Vec<Vec<usize>> = (1..=n_relays).combinations(k).collect();
        let mut sinks = Vec::new();
        for (j, _) in subsets.iter().enumerate() {
            let name = format!("t{}", j + 1);
            sinks.push(name.clone());
            nodes.push(name);
        }
        let mut channels = Vec::new();
        let mut next_id = 1;
        for i in 1..=n_relays {
            channels.push((format!("e{next_id}"), "s".to_string(), format!("i{i}")));
            next_id += 1;
        }
        for (j, subset) in subsets.iter().enumerate() {
            for &i in subset {
                channels.push((
                    format!("e{next_id}"),
                    format!("i{i}"),
                    format!("t{}", j + 1),
                ));
                next_id += 1;
            }
        }
        Network::new(nodes, "s", &sinks, channels).expect("combination network is valid")
    }
}

/// Max flow with unit edge capacities by repeated BFS augmentation.
/// Capacities are integral and tiny, so this is exact and fast enough.
fn max_flow_unit(node_count: usize, edges: &[(usize, usize)], s: usize, t: usize) -> usize {
    if s == t {
        return 0;
    }
    // residual graph: forward arcs with capacity 1, backward with 0
    let mut cap = Vec::with_capacity(edges.len() * 2);
    let mut to = Vec::with_capacity(edges.len() * 2);
    let mut adj = vec![Vec::new(); node_count];
    for &(a, b) in edges {
        adj[a].push(to.len());
        to.push(b);
        cap.push(1i32);
        adj[b].push(to.len());
        to.push(a);
        cap.push(0);
    }
    let mut flow = 0;
    loop {
        let mut prev_arc = vec![usize::MAX; node_count];
        let mut visited = vec![false; node_count];
        visited[s] = true;
        let mut queue = VecDeque::from([s]);
        'bfs: while let Some(n) = queue.pop_front() {
            for &arc in &adj[n] {
                if cap[arc] > 0 && !visited[to[arc]] {
                    visited[to[arc]] = true;
                    prev_arc[to[arc]] = arc;
                    if to[arc] == t {
                        break 'bfs;
                    }
                    queue.push_back(to[arc]);
                }
            }
        }
        if !visited[t] {
            return flow;
        }
        let mut n = t;
        while n != s {
            let arc = prev_arc[n];
            cap[arc] -= 1;
            cap[arc ^ 1] += 1;
            n = to[arc ^ 1];
        }
        flow += 1;
    }
}

/// A set of channels on which errors may occur, kept sorted by channel order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ErrorPattern {
    channels: Vec<usize>,
}

impl ErrorPattern {
    pub fn empty() -> Self {
        ErrorPattern {
            channels: Vec::new(),
        }
    }

    /// Builds a pattern from channel indices of the given network,
    /// canonicalizing the order and rejecting duplicates.
    pub fn new(
        network: &Network,
        channels: impl IntoIterator<Item = usize>,
    ) -> Result<Self, TopologyError> {
        let mut channels: Vec<usize> = channels.into_iter().collect();
        channels.sort_unstable();
        for pair in channels.windows(2) {
            if pair[0] == pair[1] {
                return Err(TopologyError::DuplicateInPattern(
                    network
                        .channels()
                        .get(pair[0])
                        .map(|c| c.id.clone())
                        .unwrap_or_else(|| format!("#{}", pair[0])),
                ));
            }
        }
        let pattern = ErrorPattern { channels };
        pattern.check_against(network)?;
        Ok(pattern)
    }

    /// Builds a pattern from channel ids.
    pub fn from_ids(network: &Network, ids: &[&str]) -> Result<Self, TopologyError> {
        let mut channels = Vec::with_capacity(ids.len());
        for id in ids {
            channels.push(network.channel_index(id)?);
        }
        Self::new(network, channels)
    }

    fn from_sorted(channels: Vec<usize>) -> Self {
        debug_assert!(channels.windows(2).all(|w| w[0] < w[1]));
        ErrorPattern { channels }
    }

    fn check_against(&self, network: &Network) -> Result<(), TopologyError> {
        for &e in &self.channels {
            if e >= network.channel_count() {
                return Err(TopologyError::ChannelOutOfRange {
                    index: e,
                    count: network.channel_count(),
                });
            }
        }
        Ok(())
    }

    pub fn channels(&self) -> &[usize] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.channels.binary_search(&e).is_ok()
    }

    pub fn is_subset_of(&self, other: &ErrorPattern) -> bool {
        self.channels.iter().all(|&e| other.contains(e))
    }

    pub fn ids(&self, network: &Network) -> Vec<String> {
        self.channels
            .iter()
            .map(|&e| network.channel(e).id.clone())
            .collect()
    }
}

/// Binomial coefficient C(n, k) in exact u128 arithmetic.
/// Panics on overflow, which does not occur at desk scale.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128).expect("binomial overflow");
        acc /= (i + 1) as u128;
    }
    acc
}
