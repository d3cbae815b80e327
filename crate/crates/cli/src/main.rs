//! `nectk` — command-line front end for the network error correction
//! toolkit: network inspection, code construction, MDS verification, rate
//! reduction, family building, Monte-Carlo probability runs, and error
//! injection simulations.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 invalid network,
//! 4 verification failed, 5 construction failed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use nectk::decoder;
use nectk::ff::FieldSpec;
use nectk::metrics;
use nectk::nec_code::{CodeError, NecCode};
use nectk::randomized::{self, Target, TrialConfig};
use nectk::topology::{EnumLimit, ErrorPattern, Network, TopologyError};
use nectk::variable_rate::{self, KStrategy, ReductionVector, VariableRateError};

const EXIT_USAGE: u8 = 2;
const EXIT_INVALID_NETWORK: u8 = 3;
const EXIT_VERIFICATION: u8 = 4;
const EXIT_CONSTRUCTION: u8 = 5;

#[derive(Parser)]
#[command(
    name = "nectk",
    about = "Linear network error correction MDS codes: construct, verify, reduce, simulate",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Deterministic,
    Random,
}

impl From<StrategyArg> for KStrategy {
    fn from(s: StrategyArg) -> KStrategy {
        match s {
            StrategyArg::Deterministic => KStrategy::Deterministic,
            StrategyArg::Random => KStrategy::Random,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Mds,
    Joint,
    JointExistsK,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Target {
        match t {
            TargetArg::Mds => Target::Mds,
            TargetArg::Joint => Target::JointFamily,
            TargetArg::JointExistsK => Target::JointFamilyExistsK,
        }
    }
}

#[derive(Args)]
struct ReportArgs {
    /// Report format; `json` writes the machine report to --out (or stdout)
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Output path for the machine report
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnumArgs {
    /// Cap on channels for exhaustive pattern enumeration
    #[arg(long, default_value_t = 40)]
    max_enum_channels: usize,
    /// Cap on pattern size for exhaustive pattern enumeration
    #[arg(long, default_value_t = 4)]
    max_enum_delta: usize,
}

impl EnumArgs {
    fn limit(&self) -> EnumLimit {
        EnumLimit {
            max_channels: self.max_enum_channels,
            max_delta: self.max_enum_delta,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate a network file and report per-sink min-cut capacities
    NetInfo {
        network: PathBuf,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Generate a network file
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
    /// Construct an MDS code by seeded randomized search with verification
    Construct {
        network: PathBuf,
        #[arg(long)]
        field: u64,
        #[arg(long)]
        rate: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = variable_rate::DEFAULT_CONSTRUCT_ATTEMPTS)]
        attempts: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify the MDS property of a code and report per-sink distances
    Verify {
        network: PathBuf,
        code: PathBuf,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Reduce a code by one rate, with an explicit or chosen fold vector
    Reduce {
        network: PathBuf,
        code: PathBuf,
        /// Comma-separated fold vector k (length rate-1); chosen automatically when absent
        #[arg(long)]
        k: Option<String>,
        #[arg(long, value_enum, default_value = "deterministic")]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the whole variable-rate family down to rate 1
    Family {
        network: PathBuf,
        /// Start from an existing code file instead of constructing one
        #[arg(long)]
        code: Option<PathBuf>,
        #[arg(long, required_unless_present = "code")]
        field: Option<u64>,
        #[arg(long, required_unless_present = "code")]
        rate: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "deterministic")]
        strategy: StrategyArg,
        /// Directory for the per-rate code files and the manifest
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte-Carlo estimate of random-construction success vs the bounds
    Prob {
        network: PathBuf,
        #[arg(long)]
        field: u64,
        #[arg(long)]
        rate: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "mds")]
        target: TargetArg,
        #[command(flatten)]
        enumeration: EnumArgs,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Transmit a message under an injected error and decode at every sink
    Simulate {
        network: PathBuf,
        code: PathBuf,
        /// Comma-separated message symbols
        #[arg(long, required_unless_present = "scenario")]
        message: Option<String>,
        /// Comma-separated channel ids carrying errors
        #[arg(long)]
        pattern: Option<String>,
        /// Comma-separated nonzero error values, aligned with --pattern
        #[arg(long)]
        values: Option<String>,
        /// JSON scenario file: {"message": [...], "pattern": [...], "values": [...]}
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[command(flatten)]
        report: ReportArgs,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// The (N, k) combination network: N relays, one sink per k-subset
    Combination {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

struct Failure {
    exit: u8,
    message: String,
}

impl Failure {
    fn new(exit: u8, message: impl Into<String>) -> Self {
        Failure {
            exit,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(EXIT_USAGE, format!("io error: {e}"))
    }
}

fn topology_failure(e: TopologyError) -> Failure {
    match e {
        TopologyError::Invalid { ref violations } => Failure::new(
            EXIT_INVALID_NETWORK,
            violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("\n"),
        ),
        other => Failure::new(EXIT_USAGE, other.to_string()),
    }
}

fn code_failure(e: CodeError) -> Failure {
    Failure::new(EXIT_USAGE, e.to_string())
}

fn variable_rate_exit(e: &VariableRateError) -> u8 {
    match e {
        VariableRateError::NoValidK { .. } | VariableRateError::ConstructionFailed { .. } => {
            EXIT_CONSTRUCTION
        }
        VariableRateError::NotMdsCode { .. }
        | VariableRateError::KernelMismatch
        | VariableRateError::IntersectionDimension { .. }
        | VariableRateError::TransformMismatch => EXIT_VERIFICATION,
        VariableRateError::Metrics(
            nectk::metrics::MetricsError::NotMds { .. }
            | nectk::metrics::MetricsError::NotRegular { .. },
        ) => EXIT_VERIFICATION,
        VariableRateError::Metrics(_) => EXIT_USAGE,
        VariableRateError::FamilyStep { source, .. } => variable_rate_exit(source),
        _ => EXIT_USAGE,
    }
}

fn variable_rate_failure(e: VariableRateError) -> Failure {
    Failure::new(variable_rate_exit(&e), e.to_string())
}

fn load_network(path: &Path) -> Result<Arc<Network>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot read {}: {e}", path.display())))?;
    Ok(Arc::new(
        Network::from_json_str(&text).map_err(topology_failure)?,
    ))
}

fn load_code(network: Arc<Network>, path: &Path) -> Result<NecCode, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot read {}: {e}", path.display())))?;
    NecCode::from_json_str(network, &text).map_err(code_failure)
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>, Failure> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|e| Failure::new(EXIT_USAGE, format!("bad number {part:?}: {e}")))
        })
        .collect()
}

fn emit_report(report: &ReportArgs, text: String, json: String) -> Result<(), Failure> {
    match report.format {
        Format::Text => {
            print!("{text}");
            if let Some(path) = &report.out {
                std::fs::write(path, text)?;
            }
        }
        Format::Json => match &report.out {
            Some(path) => {
                std::fs::write(path, json)?;
                println!("report written to {}", path.display());
            }
            None => print!("{json}"),
        },
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}

#[derive(Serialize)]
struct NetInfoDoc {
    nodes: usize,
    channels: usize,
    source: String,
    internal: usize,
    sinks: Vec<SinkInfoDoc>,
}

#[derive(Serialize)]
struct SinkInfoDoc {
    name: String,
    min_cut: usize,
}

fn cmd_net_info(path: &Path, report: &ReportArgs) -> Result<(), Failure> {
    let net = load_network(path)?;
    let sinks: Vec<SinkInfoDoc> = net
        .sinks()
        .iter()
        .map(|&t| SinkInfoDoc {
            name: net.node_name(t).to_string(),
            min_cut: net.min_cut(t).expect("validated sink"),
        })
        .collect();
    let doc = NetInfoDoc {
        nodes: net.node_count(),
        channels: net.channel_count(),
        source: net.node_name(net.source()).to_string(),
        internal: net.internal_count(),
        sinks,
    };
    let mut text = format!(
        "network ok: {} nodes, {} channels, source {}, {} internal node(s)\n",
        doc.nodes, doc.channels, doc.source, doc.internal
    );
    for s in &doc.sinks {
        text.push_str(&format!("  C_{} = {}\n", s.name, s.min_cut));
    }
    let mut json = serde_json::to_string_pretty(&doc).expect("report serializes");
    json.push('\n');
    emit_report(report, text, json)
}

fn cmd_gen_combination(n: usize, k: usize, out: &Path) -> Result<(), Failure> {
    if k < 1 || k > n {
        return Err(Failure::new(EXIT_USAGE, "need 1 <= k <= n"));
    }
    let net = Network::combination(n, k);
    write_file(out, &net.to_json_string())?;
    println!(
        "combination network N={n}, k={k}: {} nodes, {} channels, {} sinks -> {}",
        net.node_count(),
        net.channel_count(),
        net.sinks().len(),
        out.display()
    );
    Ok(())
}

fn field_spec(p: u64) -> Result<FieldSpec, Failure> {
    FieldSpec::new(p).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))
}

fn cmd_construct(
    network: &Path,
    field: u64,
    rate: usize,
    seed: u64,
    attempts: usize,
    out: &Path,
) -> Result<(), Failure> {
    let net = load_network(network)?;
    let field = field_spec(field)?;
    let code = variable_rate::construct_mds_with_attempts(net, rate, field, seed, attempts)
        .map_err(variable_rate_failure)?;
    write_file(out, &code.to_json_string())?;
    let report = metrics::verify_mds(&code);
    println!(
        "constructed rate-{rate} code over {field}: {} -> {}",
        report.summary(),
        out.display()
    );
    Ok(())
}

fn distance_text(report: &metrics::DistanceReport) -> String {
    let mut text = format!(
        "field GF({}), rate {}\nregular: {}\nMDS: {}\n",
        report.field, report.rate, report.regular, report.is_mds
    );
    for s in &report.sinks {
        let d = s.d_min.map_or("-".to_string(), |d| d.to_string());
        let gap = s.singleton_gap.map_or("-".to_string(), |g| g.to_string());
        let witness = s
            .witness
            .as_ref()
            .map_or("-".to_string(), |w| format!("{{{}}}", w.join(",")));
        text.push_str(&format!(
            "  sink {}: C_t={} δ_t={} d_min={} singleton_gap={} mds={} witness={}\n",
            s.sink, s.capacity, s.redundancy, d, gap, s.mds_at_sink, witness
        ));
    }
    text
}

fn cmd_verify(network: &Path, code: &Path, report_args: &ReportArgs) -> Result<(), Failure> {
    let net = load_network(network)?;
    let code = load_code(net, code)?;
    let report = metrics::verify_mds(&code);
    emit_report(report_args, distance_text(&report), report.to_json_string())?;
    if report.is_mds {
        Ok(())
    } else {
        Err(Failure::new(EXIT_VERIFICATION, "code is not MDS"))
    }
}

fn cmd_reduce(
    network: &Path,
    code_path: &Path,
    k: Option<&str>,
    strategy: KStrategy,
    seed: u64,
    out: &Path,
) -> Result<(), Failure> {
    let net = load_network(network)?;
    let code = load_code(net, code_path)?;
    let k = match k {
        Some(csv) => {
            let values = parse_u64_list(csv)?;
            ReductionVector::new(code.field(), values).map_err(variable_rate_failure)?
        }
        None => variable_rate::choose_k(&code, strategy, seed).map_err(variable_rate_failure)?,
    };
    let reduced = variable_rate::reduce_rate(&code, &k).map_err(variable_rate_failure)?;
    write_file(out, &reduced.to_json_string())?;
    let report = metrics::verify_mds(&reduced);
    println!(
        "reduced rate {} -> {} with k = [{}]: {} -> {}",
        code.rate(),
        reduced.rate(),
        k.values()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(","),
        report.summary(),
        out.display()
    );
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct FamilyManifest {
    field: u64,
    rates: Vec<usize>,
    files: Vec<String>,
    reduction_vectors: Vec<Vec<u64>>,
    internal_kernels_shared: bool,
    verification: Vec<serde_json::Value>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_family(
    network: &Path,
    code: Option<&Path>,
    field: Option<u64>,
    rate: Option<usize>,
    seed: u64,
    strategy: KStrategy,
    out: &Path,
) -> Result<(), Failure> {
    let net = load_network(network)?;
    let top = match code {
        Some(path) => load_code(net, path)?,
        None => {
            let field = field_spec(field.expect("clap enforces field without --code"))?;
            let rate = rate.expect("clap enforces rate without --code");
            variable_rate::construct_mds(net, rate, field, seed).map_err(variable_rate_failure)?
        }
    };
    let family =
        variable_rate::build_family_from(top, strategy, seed).map_err(variable_rate_failure)?;
    std::fs::create_dir_all(out)?;
    let mut rates = Vec::new();
    let mut files = Vec::new();
    let mut verification = Vec::new();
    for member in family.codes() {
        let name = format!("code_rate_{}.json", member.rate());
        write_file(&out.join(&name), &member.to_json_string())?;
        rates.push(member.rate());
        files.push(name);
        let report = metrics::verify_mds(member);
        verification
            .push(serde_json::from_str(&report.to_json_string()).expect("report round-trips"));
    }
    let manifest = FamilyManifest {
        field: family.codes()[0].field().modulus(),
        rates,
        files,
        reduction_vectors: family
            .reduction_vectors()
            .iter()
            .map(|k| k.values().to_vec())
            .collect(),
        internal_kernels_shared: family.shares_internal_kernels(),
        verification,
    };
    let mut manifest_json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    manifest_json.push('\n');
    write_file(&out.join("manifest.json"), &manifest_json)?;
    println!(
        "family of rates {:?} written to {} (kernels shared: {})",
        manifest.rates,
        out.display(),
        manifest.internal_kernels_shared
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_prob(
    network: &Path,
    field: u64,
    rate: usize,
    trials: usize,
    seed: u64,
    target: Target,
    limit: EnumLimit,
    report_args: &ReportArgs,
) -> Result<(), Failure> {
    let net = load_network(network)?;
    let field = field_spec(field)?;
    let cfg = TrialConfig { rate, trials, seed };
    let report = randomized::estimate_success(net, field, cfg, target, limit)
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let mut text = format!(
        "target {:?} on GF({}) rate {}: {}/{} successes, p_hat = {:.4}\n\
         wilson 95%: [{:.4}, {:.4}]\n\
         mds lower bound: {:.4}\n",
        report.target,
        report.field,
        report.rate,
        report.successes,
        report.trials,
        report.p_hat,
        report.wilson_low,
        report.wilson_high,
        report.mds_bound,
    );
    if let Some(jb) = &report.joint_bounds {
        text.push_str(&format!(
            "joint lower bounds: exact-form {:.4}, binomial-form {:.4}\n",
            jb.exact_form, jb.binomial_form
        ));
    }
    if let Some(h) = report.family_heuristic {
        text.push_str(&format!(
            "family product heuristic (not a proven bound): {h:.4}\n"
        ));
    }
    let failures = report.trials - report.successes;
    text.push_str(&format!("failures: {failures}\n"));
    emit_report(report_args, text, report.to_json_string())
}

#[derive(Deserialize)]
struct ScenarioDoc {
    message: Vec<u64>,
    #[serde(default)]
    pattern: Vec<String>,
    #[serde(default)]
    values: Vec<u64>,
}

#[derive(Serialize)]
struct SimulationDoc {
    message: Vec<u64>,
    pattern: Vec<String>,
    values: Vec<u64>,
    sinks: Vec<SinkDecodeDoc>,
}

#[derive(Serialize)]
struct SinkDecodeDoc {
    sink: String,
    decoded: Option<Vec<u64>>,
    ambiguous: bool,
    weight: usize,
    matches_message: bool,
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    network: &Path,
    code_path: &Path,
    message: Option<&str>,
    pattern: Option<&str>,
    values: Option<&str>,
    scenario: Option<&Path>,
    report_args: &ReportArgs,
) -> Result<(), Failure> {
    let net = load_network(network)?;
    let code = load_code(net.clone(), code_path)?;
    let (message, pattern_ids, values) = match scenario {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let doc: ScenarioDoc = serde_json::from_str(&text)
                .map_err(|e| Failure::new(EXIT_USAGE, format!("bad scenario file: {e}")))?;
            (doc.message, doc.pattern, doc.values)
        }
        None => {
            let message = parse_u64_list(message.expect("clap enforces message"))?;
            let pattern_ids: Vec<String> = pattern
                .map(|s| {
                    s.split(',')
                        .map(|p| p.trim().to_string())
                        .filter(|p| !p.is_empty())
                        .collect()
                })
                .unwrap_or_default();
            let values = values.map(parse_u64_list).transpose()?.unwrap_or_default();
            (message, pattern_ids, values)
        }
    };
    let id_refs: Vec<&str> = pattern_ids.iter().map(|s| s.as_str()).collect();
    let pattern = ErrorPattern::from_ids(&net, &id_refs).map_err(topology_failure)?;
    let results = decoder::simulate(&code, &message, &pattern, &values)
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let sinks: Vec<SinkDecodeDoc> = results
        .iter()
        .map(|(t, r)| SinkDecodeDoc {
            sink: net.node_name(*t).to_string(),
            decoded: r.decoded.clone(),
            ambiguous: r.is_ambiguous(),
            weight: r.weight,
            matches_message: r.decoded.as_deref() == Some(message.as_slice()),
        })
        .collect();
    let doc = SimulationDoc {
        message,
        pattern: pattern_ids,
        values,
        sinks,
    };
    let mut text = format!(
        "message [{}], errors {{{}}}\n",
        doc.message
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(","),
        doc.pattern
            .iter()
            .zip(&doc.values)
            .map(|(p, v)| format!("{p}={v}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    for s in &doc.sinks {
        let decoded = match &s.decoded {
            Some(x) => format!(
                "[{}]",
                x.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            None => "ambiguous".to_string(),
        };
        text.push_str(&format!(
            "  sink {}: decoded {} (error weight {}, {})\n",
            s.sink,
            decoded,
            s.weight,
            if s.matches_message {
                "correct"
            } else {
                "MISMATCH"
            }
        ));
    }
    let mut json = serde_json::to_string_pretty(&doc).expect("report serializes");
    json.push('\n');
    emit_report(report_args, text, json)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::NetInfo { network, report } => cmd_net_info(network, report),
        Command::Gen { what } => match what {
            GenCommand::Combination { n, k, out } => cmd_gen_combination(*n, *k, out),
        },
        Command::Construct {
            network,
            field,
            rate,
            seed,
            attempts,
            out,
        } => cmd_construct(network, *field, *rate, *seed, *attempts, out),
        Command::Verify {
            network,
            code,
            report,
        } => cmd_verify(network, code, report),
        Command::Reduce {
            network,
            code,
            k,
            strategy,
            seed,
            out,
        } => cmd_reduce(network, code, k.as_deref(), (*strategy).into(), *seed, out),
        Command::Family {
            network,
            code,
            field,
            rate,
            seed,
            strategy,
            out,
        } => cmd_family(
            network,
            code.as_deref(),
            *field,
            *rate,
            *seed,
            (*strategy).into(),
            out,
        ),
        Command::Prob {
            network,
            field,
            rate,
            trials,
            seed,
            target,
            enumeration,
            report,
        } => cmd_prob(
            network,
            *field,
            *rate,
            *trials,
            *seed,
            (*target).into(),
            enumeration.limit(),
            report,
        ),
        Command::Simulate {
            network,
            code,
            message,
            pattern,
            values,
            scenario,
            report,
        } => cmd_simulate(
            network,
            code,
            message.as_deref(),
            pattern.as_deref(),
            values.as_deref(),
            scenario.as_deref(),
            report,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.exit)
        }
    }
}
