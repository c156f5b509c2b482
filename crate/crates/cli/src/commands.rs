//! Per-command parameter schemas and execution.
//!
//! [`prepare`] parses and checks every parameter (including referenced
//! files) without computing anything; [`Job::execute`] does the work.

use std::path::PathBuf;

use rand::Rng;
use rayon::prelude::*;
use sdht_core::channels::Channel;
use sdht_core::engine::{
    build_onebit_scheme, build_prop1_scheme, evaluate, monte_carlo_evaluate, DetectorSpec, EvaluationReport,
    KeyedScheme,
};
use sdht_core::lab::{self, ratio_limit, reduce_to_binary, sup_ratio_binary, tradeoff_audit_channel, Disjunct};
use sdht_core::prob::FiniteDistribution;
use sdht_core::psm::{
    barrington_compile, counter_program, fkn_two_party, kilian_randomize, majority3_program, psm_to_sdht, psm_verify,
    BooleanFormula, PsmProtocol, TruthTable, VerificationReport, VerifyMode,
};
use sdht_core::rng::stream_rng;
use serde::{Deserialize, Serialize};

use crate::config::{Command, ExperimentConfig, Mode};
use crate::error::{CliError, CliResult};
use crate::plot::{emit_plot, PlotOptions, Series};

const DEFAULT_TRIALS: u64 = 10_000;
const BOUND_SLACK: f64 = 1e-9;

fn invalid<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Validation(msg.into()))
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

fn yes() -> bool {
    true
}

/// Inline channel matrix or a JSON file holding one.
fn load_channel(
    cfg: &ExperimentConfig,
    inline: Option<Channel>,
    file: Option<PathBuf>,
    what: &str,
) -> CliResult<Channel> {
    match (inline, file) {
        (Some(c), None) => Ok(c),
        (None, Some(path)) => cfg.read_json(&path),
        (Some(_), Some(_)) => invalid(format!("{what}: give either channel or channel_file, not both")),
        (None, None) => invalid(format!("{what}: channel or channel_file is required")),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SchemeSpec {
    /// H0 = {μ0, μ1}, H1 = {μ2} with at most one key bit.
    Onebit,
    /// Keyless scheme over a channel that merges each class.
    Separating {
        channel: Option<Channel>,
        channel_file: Option<PathBuf>,
    },
    Keyless {
        channel: Option<Channel>,
        channel_file: Option<PathBuf>,
        detector: DetectorSpec,
    },
    /// A serialized `KeyedScheme`.
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone)]
enum SchemeSource {
    Onebit,
    Separating(Channel),
    Keyless(Channel, DetectorSpec),
    Fixed(KeyedScheme),
}

impl SchemeSource {
    fn resolve(
        cfg: &ExperimentConfig,
        spec: SchemeSpec,
        h0: &[FiniteDistribution],
        h1: &[FiniteDistribution],
    ) -> CliResult<Self> {
        Ok(match spec {
            SchemeSpec::Onebit => {
                if h0.len() != 2 || h1.len() != 1 {
                    return invalid("onebit scheme needs exactly two H0 and one H1 distributions");
                }
                SchemeSource::Onebit
            }
            SchemeSpec::Separating { channel, channel_file } => {
                SchemeSource::Separating(load_channel(cfg, channel, channel_file, "scheme")?)
            }
            SchemeSpec::Keyless { channel, channel_file, detector } => {
                SchemeSource::Keyless(load_channel(cfg, channel, channel_file, "scheme")?, detector)
            }
            SchemeSpec::File { path } => {
                let s: KeyedScheme = cfg.read_json(&path)?;
                s.validate()?;
                SchemeSource::Fixed(s)
            }
        })
    }

    fn build(&self, n: usize, h0: &[FiniteDistribution], h1: &[FiniteDistribution]) -> CliResult<KeyedScheme> {
        Ok(match self {
            SchemeSource::Onebit => build_onebit_scheme(&h0[0], &h0[1], &h1[0], n)?,
            SchemeSource::Separating(w) => build_prop1_scheme(w, h0, h1, n)?,
            SchemeSource::Keyless(w, d) => KeyedScheme::keyless(n, w.clone(), d.clone())?,
            SchemeSource::Fixed(s) => {
                let mut s = s.clone();
                s.n = n;
                s.validate()?;
                s
            }
        })
    }

    fn fixed_n(&self) -> Option<usize> {
        match self {
            SchemeSource::Fixed(s) => Some(s.n),
            _ => None,
        }
    }
}

fn check_classes(h0: &[FiniteDistribution], h1: &[FiniteDistribution]) -> CliResult<()> {
    if h0.is_empty() || h1.is_empty() {
        return invalid("h0 and h1 must be non-empty");
    }
    let m = h0[0].alphabet_size();
    if h0.iter().chain(h1).any(|d| d.alphabet_size() != m) {
        return invalid("all distributions must share one alphabet");
    }
    Ok(())
}

fn check_bound(name: &str, value: f64, max: Option<f64>, violations: &mut Vec<String>) {
    if let Some(max) = max {
        if value > max {
            violations.push(format!("{name} = {value} exceeds {max}"));
        }
    }
}

fn evaluate_with(
    scheme: &KeyedScheme,
    h0: &[FiniteDistribution],
    h1: &[FiniteDistribution],
    mode: Mode,
    trials: u64,
    seed: u64,
) -> CliResult<EvaluationReport> {
    Ok(match mode {
        Mode::Exact => evaluate(scheme, h0, h1)?,
        Mode::Mc => monte_carlo_evaluate(scheme, h0, h1, trials, seed)?,
    })
}

// evaluate-scheme ------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvaluateParams {
    h0: Vec<FiniteDistribution>,
    h1: Vec<FiniteDistribution>,
    n: Option<usize>,
    scheme: SchemeSpec,
    #[serde(default = "default_trials")]
    trials: u64,
    max_epsilon: Option<f64>,
    max_delta: Option<f64>,
}

#[derive(Debug)]
pub struct EvaluateJob {
    h0: Vec<FiniteDistribution>,
    h1: Vec<FiniteDistribution>,
    n: usize,
    source: SchemeSource,
    trials: u64,
    max_epsilon: Option<f64>,
    max_delta: Option<f64>,
}

#[derive(Serialize)]
struct EvaluateSummary<'a> {
    command: &'static str,
    seed: u64,
    mode: &'static str,
    n: usize,
    report: &'a EvaluationReport,
    violations: &'a [String],
}

// sweep-n --------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepParams {
    h0: Vec<FiniteDistribution>,
    h1: Vec<FiniteDistribution>,
    ns: Vec<usize>,
    scheme: SchemeSpec,
    #[serde(default = "default_trials")]
    trials: u64,
    max_epsilon: Option<f64>,
    max_delta: Option<f64>,
    #[serde(default = "yes")]
    log_scale: bool,
}

#[derive(Debug)]
pub struct SweepJob {
    h0: Vec<FiniteDistribution>,
    h1: Vec<FiniteDistribution>,
    ns: Vec<usize>,
    source: SchemeSource,
    trials: u64,
    max_epsilon: Option<f64>,
    max_delta: Option<f64>,
    log_scale: bool,
}

#[derive(Serialize)]
struct SweepRow {
    n: usize,
    epsilon: f64,
    delta: f64,
    comm_bits: u64,
    key_bits: u64,
    epsilon_stderr: Option<f64>,
}

#[derive(Serialize)]
struct LineFit {
    slope: f64,
    intercept: f64,
    r_squared: f64,
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    command: &'static str,
    seed: u64,
    mode: &'static str,
    rows: &'a [SweepRow],
    max_delta: f64,
    /// Least-squares fit of ln ε against n over rows with ε > 0.
    log_epsilon_fit: Option<LineFit>,
    log_scale_plot: bool,
    violations: &'a [String],
}

fn line_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    if x.len() < 2 {
        return None;
    }
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LineFit { slope, intercept: my - slope * mx, r_squared })
}

// verify-psm -----------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ProtocolSpec {
    /// Two-party table protocol for f(x1, x2) = bit (2·x1 + x2) of `code`.
    TwoBit { code: u8 },
    /// Every two-bit function, one row each.
    AllTwoBit,
    /// Two-party table protocol for an arbitrary table.
    Table { sizes: Vec<usize>, values: Vec<u8> },
    /// n-client parity as a cyclic counter program.
    Parity { n: usize },
    /// Three-client majority over S3.
    MajorityS3,
    /// Three-client majority compiled to an S5 program.
    MajorityBarrington,
    /// Any formula over client bits, compiled to an S5 program.
    Formula { formula: BooleanFormula },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SdhtClasses {
    h0: Vec<FiniteDistribution>,
    h1: Vec<FiniteDistribution>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyParams {
    protocols: Vec<ProtocolSpec>,
    #[serde(default = "default_trials")]
    trials: u64,
    sdht: Option<SdhtClasses>,
}

#[derive(Debug)]
enum PreparedProtocol {
    Table(sdht_core::psm::TableProtocol),
    Program(sdht_core::psm::GroupProgramProtocol),
}

#[derive(Debug)]
struct ProtocolCase {
    label: String,
    function: TruthTable,
    protocol: PreparedProtocol,
}

#[derive(Debug)]
pub struct VerifyJob {
    cases: Vec<ProtocolCase>,
    trials: u64,
    sdht: Option<SdhtClasses>,
}

#[derive(Serialize)]
struct SdhtOutcome {
    epsilon: f64,
    delta: f64,
    tolerance: f64,
    bound_holds: bool,
    method: &'static str,
}

#[derive(Serialize)]
struct VerifyRow {
    label: String,
    verification: VerificationReport,
    sdht: Option<SdhtOutcome>,
}

#[derive(Serialize)]
struct VerifySummary<'a> {
    command: &'static str,
    seed: u64,
    mode: &'static str,
    trials: u64,
    protocols: &'a [VerifyRow],
    violations: &'a [String],
}

fn prepare_protocol(spec: ProtocolSpec) -> CliResult<Vec<ProtocolCase>> {
    let table_case = |label: String, f: TruthTable| -> CliResult<ProtocolCase> {
        let p = fkn_two_party(&f)?;
        Ok(ProtocolCase { label, function: f, protocol: PreparedProtocol::Table(p) })
    };
    Ok(match spec {
        ProtocolSpec::TwoBit { code } => {
            if code > 15 {
                return invalid(format!("two_bit code {code} above 15"));
            }
            vec![table_case(format!("two_bit_{code:04b}"), TruthTable::two_bit(code))?]
        }
        ProtocolSpec::AllTwoBit => (0..16u8)
            .map(|code| table_case(format!("two_bit_{code:04b}"), TruthTable::two_bit(code)))
            .collect::<CliResult<_>>()?,
        ProtocolSpec::Table { sizes, values } => {
            if sizes.len() != 2 {
                return invalid("table protocols have exactly two parties");
            }
            vec![table_case("table".into(), TruthTable::new(sizes, values)?)?]
        }
        ProtocolSpec::Parity { n } => {
            let p = kilian_randomize(&counter_program(n, 2, &[1])?)?;
            vec![ProtocolCase {
                label: format!("parity_{n}"),
                function: TruthTable::parity(n)?,
                protocol: PreparedProtocol::Program(p),
            }]
        }
        ProtocolSpec::MajorityS3 => vec![ProtocolCase {
            label: "majority_s3".into(),
            function: TruthTable::majority(3)?,
            protocol: PreparedProtocol::Program(kilian_randomize(&majority3_program())?),
        }],
        ProtocolSpec::MajorityBarrington => vec![ProtocolCase {
            label: "majority_barrington".into(),
            function: TruthTable::majority(3)?,
            protocol: PreparedProtocol::Program(kilian_randomize(&barrington_compile(&BooleanFormula::majority3())?)?),
        }],
        ProtocolSpec::Formula { formula } => {
            let program = barrington_compile(&formula)?;
            let f = TruthTable::from_fn(program.input_sizes(), |x| u8::from(formula.eval(x)))?;
            vec![ProtocolCase {
                label: "formula".into(),
                function: f,
                protocol: PreparedProtocol::Program(kilian_randomize(&program)?),
            }]
        }
    })
}

fn run_case<P: PsmProtocol>(
    label: &str,
    p: &P,
    f: &TruthTable,
    mode: VerifyMode,
    trials: u64,
    seed: u64,
    sdht: Option<&SdhtClasses>,
) -> CliResult<VerifyRow> {
    let verification = psm_verify(p, f, mode, trials, seed)?;
    // Only symmetric functions define a hypothesis test.
    let sdht = match sdht {
        Some(c) if verification.passed() && f.is_symmetric() => {
            let r = psm_to_sdht(f, p, &c.h0, &c.h1, trials, seed)?;
            Some(SdhtOutcome {
                epsilon: r.report.epsilon,
                delta: r.report.delta,
                tolerance: r.tolerance,
                bound_holds: r.bound_holds,
                method: r.report.method.as_str(),
            })
        }
        _ => None,
    };
    Ok(VerifyRow { label: label.to_string(), verification, sdht })
}

// hellinger-sup --------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SupParams {
    thetas: Vec<f64>,
    resolution: usize,
    #[serde(default = "yes")]
    log_scale: bool,
}

#[derive(Debug)]
pub struct SupJob {
    thetas: Vec<f64>,
    resolution: usize,
    log_scale: bool,
}

#[derive(Serialize)]
struct SupRow {
    theta: f64,
    max_value: f64,
    argmax_a: f64,
    argmax_c: f64,
    limit: f64,
    within_limit: bool,
}

#[derive(Serialize)]
struct SupSummary<'a> {
    command: &'static str,
    seed: u64,
    resolution: usize,
    /// Largest grid value over all θ.
    max: f64,
    results: &'a [SupRow],
    violations: &'a [String],
}

// tradeoff-audit -------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomChannels {
    count: usize,
    outputs: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TradeoffParams {
    theta: f64,
    ns: Vec<usize>,
    #[serde(default)]
    channels: Vec<Channel>,
    #[serde(default)]
    channel_files: Vec<PathBuf>,
    random: Option<RandomChannels>,
}

#[derive(Debug)]
pub struct TradeoffJob {
    theta: f64,
    ns: Vec<usize>,
    channels: Vec<Channel>,
}

#[derive(Serialize)]
struct TradeoffRow {
    channel: usize,
    n: usize,
    tv_01: f64,
    tv_12: f64,
    bound: f64,
    held: &'static str,
}

#[derive(Serialize)]
struct TradeoffSummary<'a> {
    command: &'static str,
    seed: u64,
    theta: f64,
    lambda: f64,
    bound: f64,
    bound_as_printed: f64,
    channels: usize,
    audits: usize,
    close_to_alternative: usize,
    far_from_null: usize,
    violations: &'a [String],
}

fn random_row<R: Rng>(rng: &mut R, outputs: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..outputs).map(|_| rng.gen_range(0.001..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

fn random_channel(seed: u64, index: u64, outputs: usize) -> CliResult<Channel> {
    let mut rng = stream_rng(seed, index);
    let rows = vec![random_row(&mut rng, outputs), random_row(&mut rng, outputs)];
    Ok(Channel::new(rows)?)
}

fn held_name(d: Option<Disjunct>) -> &'static str {
    match d {
        Some(Disjunct::CloseToAlternative) => "close_to_alternative",
        Some(Disjunct::FarFromNull) => "far_from_null",
        None => "none",
    }
}

// reduce-channel -------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReduceParams {
    theta: f64,
    channel: Option<Channel>,
    channel_file: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ReduceJob {
    theta: f64,
    channel: Channel,
}

#[derive(Serialize)]
struct ReduceSummary<'a> {
    command: &'static str,
    seed: u64,
    theta: f64,
    initial_outputs: usize,
    initial_ratio: f64,
    final_ratio: f64,
    limit: f64,
    direction: lab::TraceDirection,
    steps: &'a [lab::ReductionStep],
    trace: &'a [f64],
    final_channel: &'a Channel,
    violations: &'a [String],
}

// dispatch -------------------------------------------------------------------

#[derive(Debug)]
pub enum Job {
    Evaluate(EvaluateJob),
    Sweep(SweepJob),
    Verify(VerifyJob),
    Sup(SupJob),
    Tradeoff(TradeoffJob),
    Reduce(ReduceJob),
}

/// Files produced by a command, plus any declared bounds that failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub csv: String,
    pub summary: String,
    pub plot: Option<String>,
    pub violations: Vec<String>,
}

fn theta_in_unit(theta: f64) -> CliResult<()> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        invalid(format!("theta {theta} outside (0,1)"))
    }
}

/// Parses and checks the parameters of `cfg.command`.
pub fn prepare(cfg: &ExperimentConfig) -> CliResult<Job> {
    Ok(match cfg.command {
        Command::EvaluateScheme => {
            let p: EvaluateParams = cfg.params()?;
            check_classes(&p.h0, &p.h1)?;
            let source = SchemeSource::resolve(cfg, p.scheme, &p.h0, &p.h1)?;
            let n = match (p.n, source.fixed_n()) {
                (Some(n), Some(f)) if n != f => return invalid(format!("n = {n} but the scheme file has n = {f}")),
                (Some(n), _) | (None, Some(n)) => n,
                (None, None) => return invalid("n is required"),
            };
            if n == 0 || (cfg.mode == Mode::Mc && p.trials == 0) {
                return invalid("n and trials must be positive");
            }
            Job::Evaluate(EvaluateJob {
                h0: p.h0,
                h1: p.h1,
                n,
                source,
                trials: p.trials,
                max_epsilon: p.max_epsilon,
                max_delta: p.max_delta,
            })
        }
        Command::SweepN => {
            let p: SweepParams = cfg.params()?;
            check_classes(&p.h0, &p.h1)?;
            if p.ns.is_empty() || p.ns.contains(&0) {
                return invalid("ns must be a non-empty list of positive sizes");
            }
            if cfg.mode == Mode::Mc && p.trials == 0 {
                return invalid("trials must be positive");
            }
            let source = SchemeSource::resolve(cfg, p.scheme, &p.h0, &p.h1)?;
            Job::Sweep(SweepJob {
                h0: p.h0,
                h1: p.h1,
                ns: p.ns,
                source,
                trials: p.trials,
                max_epsilon: p.max_epsilon,
                max_delta: p.max_delta,
                log_scale: p.log_scale,
            })
        }
        Command::VerifyPsm => {
            let p: VerifyParams = cfg.params()?;
            if p.protocols.is_empty() {
                return invalid("protocols must be non-empty");
            }
            if cfg.mode == Mode::Mc && p.trials == 0 {
                return invalid("trials must be positive");
            }
            if let Some(c) = &p.sdht {
                check_classes(&c.h0, &c.h1)?;
            }
            let mut cases = Vec::new();
            for spec in p.protocols {
                cases.extend(prepare_protocol(spec)?);
            }
            if let Some(c) = &p.sdht {
                let m = c.h0[0].alphabet_size();
                if let Some(case) = cases.iter().find(|k| k.function.is_symmetric() && k.function.sizes[0] != m) {
                    return invalid(format!(
                        "{}: inputs have {} values but the distributions have {m}",
                        case.label, case.function.sizes[0]
                    ));
                }
            }
            Job::Verify(VerifyJob { cases, trials: p.trials, sdht: p.sdht })
        }
        Command::HellingerSup => {
            let p: SupParams = cfg.params()?;
            if p.thetas.is_empty() {
                return invalid("thetas must be non-empty");
            }
            for &t in &p.thetas {
                theta_in_unit(t)?;
            }
            if p.resolution < 100 {
                return invalid(format!("resolution {} below 100", p.resolution));
            }
            Job::Sup(SupJob { thetas: p.thetas, resolution: p.resolution, log_scale: p.log_scale })
        }
        Command::TradeoffAudit => {
            let p: TradeoffParams = cfg.params()?;
            theta_in_unit(p.theta)?;
            if p.ns.is_empty() || p.ns.contains(&0) {
                return invalid("ns must be a non-empty list of positive sizes");
            }
            let mut channels = p.channels;
            for f in &p.channel_files {
                channels.push(cfg.read_json(f)?);
            }
            if let Some(r) = &p.random {
                if r.outputs < 2 {
                    return invalid("random channels need at least two outputs");
                }
                for i in 0..r.count {
                    channels.push(random_channel(cfg.seed, i as u64, r.outputs)?);
                }
            }
            if channels.is_empty() {
                return invalid("no channels: give channels, channel_files or random");
            }
            if let Some(i) = channels.iter().position(|w| w.input_size() != 2 || w.has_equal_rows()) {
                return invalid(format!("channel {i} must have two inputs with distinct rows"));
            }
            Job::Tradeoff(TradeoffJob { theta: p.theta, ns: p.ns, channels })
        }
        Command::ReduceChannel => {
            let p: ReduceParams = cfg.params()?;
            theta_in_unit(p.theta)?;
            let channel = load_channel(cfg, p.channel, p.channel_file, "reduce-channel")?;
            if channel.input_size() != 2 || channel.has_equal_rows() {
                return invalid("channel must have two inputs with distinct rows");
            }
            Job::Reduce(ReduceJob { theta: p.theta, channel })
        }
    })
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summary serializes");
    s.push('\n');
    s
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Job {
    pub fn execute(&self, cfg: &ExperimentConfig) -> CliResult<Artifacts> {
        let seed = cfg.seed;
        let mode = cfg.mode;
        let command = cfg.command.as_str();
        let mut violations = Vec::new();
        match self {
            Job::Evaluate(j) => {
                let scheme = j.source.build(j.n, &j.h0, &j.h1)?;
                let report = evaluate_with(&scheme, &j.h0, &j.h1, mode, j.trials, seed)?;
                check_bound("epsilon", report.epsilon, j.max_epsilon, &mut violations);
                check_bound("delta", report.delta, j.max_delta, &mut violations);
                let header = format!("n,{}", EvaluationReport::CSV_HEADER);
                let csv = format!("{header}\n{},{}\n", j.n, report.csv_row());
                let summary = json(&EvaluateSummary {
                    command,
                    seed,
                    mode: mode.as_str(),
                    n: j.n,
                    report: &report,
                    violations: &violations,
                });
                Ok(Artifacts { csv, summary, plot: None, violations })
            }
            Job::Sweep(j) => {
                let reports =
                    j.ns.par_iter()
                        .map(|&n| {
                            let scheme = j.source.build(n, &j.h0, &j.h1)?;
                            evaluate_with(&scheme, &j.h0, &j.h1, mode, j.trials, seed)
                        })
                        .collect::<CliResult<Vec<_>>>()?;
                let rows: Vec<SweepRow> =
                    j.ns.iter()
                        .zip(&reports)
                        .map(|(&n, r)| SweepRow {
                            n,
                            epsilon: r.epsilon,
                            delta: r.delta,
                            comm_bits: r.comm_bits,
                            key_bits: r.key_bits,
                            epsilon_stderr: r.epsilon_stderr,
                        })
                        .collect();
                for r in &rows {
                    check_bound(&format!("epsilon(n={})", r.n), r.epsilon, j.max_epsilon, &mut violations);
                    check_bound(&format!("delta(n={})", r.n), r.delta, j.max_delta, &mut violations);
                }
                let positive: Vec<&SweepRow> = rows.iter().filter(|r| r.epsilon > 0.0).collect();
                let fit = line_fit(
                    &positive.iter().map(|r| r.n as f64).collect::<Vec<_>>(),
                    &positive.iter().map(|r| r.epsilon.ln()).collect::<Vec<_>>(),
                );
                let log_y = j.log_scale && positive.len() == rows.len();
                let csv = csv_table(
                    &["n", "epsilon", "delta", "comm_bits", "key_bits"],
                    &rows
                        .iter()
                        .map(|r| {
                            vec![
                                r.n.to_string(),
                                r.epsilon.to_string(),
                                r.delta.to_string(),
                                r.comm_bits.to_string(),
                                r.key_bits.to_string(),
                            ]
                        })
                        .collect::<Vec<_>>(),
                );
                let plot = emit_plot(
                    &[Series {
                        label: "epsilon".into(),
                        points: rows.iter().map(|r| (r.n as f64, r.epsilon)).collect(),
                    }],
                    &PlotOptions {
                        title: "correctness error against sample count".into(),
                        x_label: "n".into(),
                        y_label: "epsilon".into(),
                        log_x: false,
                        log_y,
                    },
                )?;
                let summary = json(&SweepSummary {
                    command,
                    seed,
                    mode: mode.as_str(),
                    max_delta: rows.iter().map(|r| r.delta).fold(0.0, f64::max),
                    rows: &rows,
                    log_epsilon_fit: fit,
                    log_scale_plot: log_y,
                    violations: &violations,
                });
                Ok(Artifacts { csv, summary, plot: Some(plot), violations })
            }
            Job::Verify(j) => {
                let vmode = match mode {
                    Mode::Exact => VerifyMode::Exhaustive,
                    Mode::Mc => VerifyMode::Sampled,
                };
                let mut rows = Vec::new();
                for (i, case) in j.cases.iter().enumerate() {
                    let s = seed.wrapping_add(i as u64);
                    let row = match &case.protocol {
                        PreparedProtocol::Table(p) => {
                            run_case(&case.label, p, &case.function, vmode, j.trials, s, j.sdht.as_ref())?
                        }
                        PreparedProtocol::Program(p) => {
                            run_case(&case.label, p, &case.function, vmode, j.trials, s, j.sdht.as_ref())?
                        }
                    };
                    if !row.verification.correctness_pass {
                        violations.push(format!("{}: correctness failed", row.label));
                    }
                    if !row.verification.privacy_pass {
                        violations.push(format!("{}: privacy failed", row.label));
                    }
                    if let Some(o) = &row.sdht {
                        if !o.bound_holds {
                            violations.push(format!(
                                "{}: delta {} exceeds epsilon {} + {}",
                                row.label, o.delta, o.epsilon, o.tolerance
                            ));
                        }
                    }
                    rows.push(row);
                }
                let csv = csv_table(
                    &[
                        "label",
                        "mode",
                        "correctness_pass",
                        "privacy_pass",
                        "keys_checked",
                        "min_p_value",
                        "alpha",
                        "epsilon",
                        "delta",
                        "tolerance",
                        "bound_holds",
                    ],
                    &rows
                        .iter()
                        .map(|r| {
                            let v = &r.verification;
                            vec![
                                r.label.clone(),
                                match v.mode {
                                    VerifyMode::Exhaustive => "exhaustive".into(),
                                    VerifyMode::Sampled => "sampled".into(),
                                },
                                v.correctness_pass.to_string(),
                                v.privacy_pass.to_string(),
                                v.keys_checked.to_string(),
                                opt(v.min_p_value),
                                opt(v.alpha),
                                opt(r.sdht.as_ref().map(|o| o.epsilon)),
                                opt(r.sdht.as_ref().map(|o| o.delta)),
                                opt(r.sdht.as_ref().map(|o| o.tolerance)),
                                opt(r.sdht.as_ref().map(|o| o.bound_holds)),
                            ]
                        })
                        .collect::<Vec<_>>(),
                );
                let summary = json(&VerifySummary {
                    command,
                    seed,
                    mode: mode.as_str(),
                    trials: j.trials,
                    protocols: &rows,
                    violations: &violations,
                });
                Ok(Artifacts { csv, summary, plot: None, violations })
            }
            Job::Sup(j) => {
                let results = j
                    .thetas
                    .par_iter()
                    .map(|&t| sup_ratio_binary(t, j.resolution).map_err(CliError::from))
                    .collect::<CliResult<Vec<_>>>()?;
                let rows: Vec<SupRow> = results
                    .iter()
                    .map(|s| SupRow {
                        theta: s.theta,
                        max_value: s.max_value,
                        argmax_a: s.argmax.a,
                        argmax_c: s.argmax.c,
                        limit: s.limit,
                        within_limit: s.max_value <= s.limit + BOUND_SLACK,
                    })
                    .collect();
                for r in rows.iter().filter(|r| !r.within_limit) {
                    violations.push(format!("theta {}: grid max {} above limit {}", r.theta, r.max_value, r.limit));
                }
                // Edge a = 0, where the grid maximum sits.
                let series = j
                    .thetas
                    .iter()
                    .map(|&t| {
                        let points = (1..=j.resolution)
                            .map(|k| {
                                let c = k as f64 / j.resolution as f64;
                                let inst = lab::RatioInstance::new(t, 0.0, c)?;
                                Ok((c, lab::hellinger_ratio_f(&inst).value))
                            })
                            .collect::<CliResult<Vec<_>>>()?;
                        Ok(Series { label: format!("theta={t}"), points })
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                let plot = emit_plot(
                    &series,
                    &PlotOptions {
                        title: "Hellinger ratio along a = 0".into(),
                        x_label: "c".into(),
                        y_label: "f(0, c)".into(),
                        log_x: j.log_scale,
                        log_y: j.log_scale && series.iter().all(|s| s.points.iter().all(|p| p.1 > 0.0)),
                    },
                )?;
                let csv = csv_table(
                    &["theta", "resolution", "max_value", "argmax_a", "argmax_c", "limit", "within_limit"],
                    &rows
                        .iter()
                        .map(|r| {
                            vec![
                                r.theta.to_string(),
                                j.resolution.to_string(),
                                r.max_value.to_string(),
                                r.argmax_a.to_string(),
                                r.argmax_c.to_string(),
                                r.limit.to_string(),
                                r.within_limit.to_string(),
                            ]
                        })
                        .collect::<Vec<_>>(),
                );
                let summary = json(&SupSummary {
                    command,
                    seed,
                    resolution: j.resolution,
                    max: rows.iter().map(|r| r.max_value).fold(f64::NEG_INFINITY, f64::max),
                    results: &rows,
                    violations: &violations,
                });
                Ok(Artifacts { csv, summary, plot: Some(plot), violations })
            }
            Job::Tradeoff(j) => {
                let cells: Vec<(usize, usize)> =
                    (0..j.channels.len()).flat_map(|c| j.ns.iter().map(move |&n| (c, n))).collect();
                let audits = cells
                    .par_iter()
                    .map(|&(c, n)| tradeoff_audit_channel(&j.channels[c], j.theta, n).map_err(CliError::from))
                    .collect::<CliResult<Vec<_>>>()?;
                let rows: Vec<TradeoffRow> = cells
                    .iter()
                    .zip(&audits)
                    .map(|(&(channel, n), a)| TradeoffRow {
                        channel,
                        n,
                        tv_01: a.tv_01,
                        tv_12: a.tv_12,
                        bound: a.bound,
                        held: held_name(a.held),
                    })
                    .collect();
                for r in rows.iter().filter(|r| r.held == "none") {
                    violations.push(format!(
                        "channel {} n={}: tv_12 = {} > 1/2 and tv_01 = {} < {}",
                        r.channel, r.n, r.tv_12, r.tv_01, r.bound
                    ));
                }
                let lambda = 1.0 / ratio_limit(j.theta)?;
                let csv = csv_table(
                    &["channel", "n", "tv_01", "tv_12", "bound", "held"],
                    &rows
                        .iter()
                        .map(|r| {
                            vec![
                                r.channel.to_string(),
                                r.n.to_string(),
                                r.tv_01.to_string(),
                                r.tv_12.to_string(),
                                r.bound.to_string(),
                                r.held.to_string(),
                            ]
                        })
                        .collect::<Vec<_>>(),
                );
                let summary = json(&TradeoffSummary {
                    command,
                    seed,
                    theta: j.theta,
                    lambda,
                    bound: lab::tradeoff_bound(lambda),
                    bound_as_printed: lab::tradeoff_bound_as_printed(lambda),
                    channels: j.channels.len(),
                    audits: rows.len(),
                    close_to_alternative: rows.iter().filter(|r| r.held == "close_to_alternative").count(),
                    far_from_null: rows.iter().filter(|r| r.held == "far_from_null").count(),
                    violations: &violations,
                });
                Ok(Artifacts { csv, summary, plot: None, violations })
            }
            Job::Reduce(j) => {
                let red = reduce_to_binary(&j.channel, j.theta)?;
                let limit = ratio_limit(j.theta)?;
                let initial = red.trace[0];
                let last = *red.trace.last().expect("trace starts with the initial ratio");
                if last > limit + BOUND_SLACK {
                    violations.push(format!("final ratio {last} above limit {limit}"));
                }
                let mut rows = vec![vec!["0".to_string(), "initial".to_string(), initial.to_string()]];
                for (k, (step, ratio)) in red.steps.iter().zip(&red.trace[1..]).enumerate() {
                    let name = serde_json::to_value(step).expect("step serializes");
                    rows.push(vec![
                        (k + 1).to_string(),
                        name.as_str().unwrap_or_default().to_string(),
                        ratio.to_string(),
                    ]);
                }
                let csv = csv_table(&["step", "operation", "ratio"], &rows);
                let summary = json(&ReduceSummary {
                    command,
                    seed,
                    theta: j.theta,
                    initial_outputs: j.channel.output_size(),
                    initial_ratio: initial,
                    final_ratio: last,
                    limit,
                    direction: red.direction,
                    steps: &red.steps,
                    trace: &red.trace,
                    final_channel: &red.channel,
                    violations: &violations,
                });
                Ok(Artifacts { csv, summary, plot: None, violations })
            }
        }
    }
}
