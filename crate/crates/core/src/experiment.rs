//! JSON-configured experiments with CSV outputs and a run manifest.
//!
//! Each command writes its CSV files plus `manifest.json` into the output
//! directory. CSV payloads depend only on the configuration and seed, never
//! on the thread count.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::codeword_sets::{
    build_partition, dual_polarize, eve_capacity, pauli_induced_channels, write_partition_csv,
    IndexSetPartition, SetError,
};
use crate::fmt_f64;
use crate::polar::{
    error_bound, polarize, select_sets, symmetric_capacity, write_polarization_csv, Bdmc,
    PolarError, PolarizeOptions,
};
use crate::quantum::{
    coherent_information, private_information, symmetric_cq_capacity, BinaryCqChannel,
    DensityMatrix, KrausChannel, QuantumError,
};
use crate::relay::{
    direct_link_is_degraded, expected_throughput, relay_private_capacity, set_capacities,
    simulate_relay, write_relay_csv, LinkChannel, RelayChannelSpec, RelayError,
};
use crate::superactivation::{
    assisted_single_use_capacity, build_switch_channel, joint_coherent_info,
    lift_for_flagged_input, make_rho_ac, p_grid, superactivated_bound, sweep, write_sweep_csv,
    FlagVariant, InputMode, SuperactivationError, SweepRow,
};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Polarize,
    Sets,
    Capacity,
    RelaySim,
    Superactivate,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Polarize => "polarize",
            Command::Sets => "sets",
            Command::Capacity => "capacity",
            Command::RelaySim => "relay-sim",
            Command::Superactivate => "superactivate",
            Command::Sweep => "sweep",
        }
    }
}

/// Binary-input classical channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassicalChannelSpec {
    Bec { epsilon: f64 },
    Bsc { p: f64 },
    Table { w0: Vec<f64>, w1: Vec<f64> },
}

impl ClassicalChannelSpec {
    pub fn build(&self) -> Result<Bdmc, PolarError> {
        match self {
            ClassicalChannelSpec::Bec { epsilon } => Bdmc::bec(*epsilon),
            ClassicalChannelSpec::Bsc { p } => Bdmc::bsc(*p),
            ClassicalChannelSpec::Table { w0, w1 } => Bdmc::new(w0.clone(), w1.clone()),
        }
    }

    fn check(&self, field: &str, errors: &mut Vec<String>) {
        match self {
            ClassicalChannelSpec::Bec { epsilon } => check_unit(field, "epsilon", *epsilon, errors),
            ClassicalChannelSpec::Bsc { p } => check_unit(field, "p", *p, errors),
            ClassicalChannelSpec::Table { .. } => {
                if let Err(e) = self.build() {
                    errors.push(format!("{field}: {e}"));
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum QuantumChannelSpec {
    Identity {
        #[serde(default = "default_dim")]
        dim: usize,
    },
    Dephasing {
        q: f64,
    },
    BitFlip {
        q: f64,
    },
    Depolarizing {
        q: f64,
    },
    Erasure {
        epsilon: f64,
    },
    Pauli {
        px: f64,
        py: f64,
        pz: f64,
    },
    /// Stages applied in order.
    Compose {
        stages: Vec<QuantumChannelSpec>,
    },
}

fn default_dim() -> usize {
    2
}

impl QuantumChannelSpec {
    pub fn build(&self) -> Result<KrausChannel, QuantumError> {
        match self {
            QuantumChannelSpec::Identity { dim } => Ok(KrausChannel::identity(*dim)),
            QuantumChannelSpec::Dephasing { q } => KrausChannel::dephasing(*q),
            QuantumChannelSpec::BitFlip { q } => KrausChannel::bit_flip(*q),
            QuantumChannelSpec::Depolarizing { q } => KrausChannel::depolarizing(*q),
            QuantumChannelSpec::Erasure { epsilon } => KrausChannel::erasure(*epsilon, 2),
            QuantumChannelSpec::Pauli { px, py, pz } => KrausChannel::pauli(*px, *py, *pz),
            QuantumChannelSpec::Compose { stages } => {
                let mut iter = stages.iter();
                let first = iter.next().ok_or(QuantumError::EmptyKraus)?.build()?;
                iter.try_fold(first, |acc, s| acc.then(&s.build()?))
            }
        }
    }

    fn check(&self, field: &str, errors: &mut Vec<String>) {
        if let Err(e) = self.build() {
            errors.push(format!("{field}: {e}"));
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PauliSpec {
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

/// Input state for the doubled switch channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSpec {
    /// Flag pair `|00>,|11>` with a shared `|Psi+>`.
    #[default]
    Alternating,
    /// Flag pair `|00>,|00>` with a shared `|Psi+>`.
    Literal,
    /// `|+><+| (x) |+><+|`.
    Plus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    /// Channel polarized by `polarize`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ClassicalChannelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amp_channel: Option<ClassicalChannelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_channel: Option<ClassicalChannelSpec>,
    /// Alternative to the amplitude/phase pair: the channels induced by a
    /// qubit Pauli channel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<PauliSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub main_channel: Option<QuantumChannelSpec>,
    /// Direct sender-to-receiver link for the relay diagnostic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct_channel: Option<QuantumChannelSpec>,
    #[serde(default)]
    pub input: InputSpec,
    #[serde(default = "default_k")]
    pub k: u32,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_p_e2")]
    pub p_e2: f64,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_alphabet_cap")]
    pub alphabet_cap: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantize_bins: Option<usize>,
}

fn default_k() -> u32 {
    10
}
fn default_beta() -> f64 {
    0.45
}
fn default_p_e2() -> f64 {
    0.3
}
fn default_p() -> f64 {
    0.5
}
fn default_trials() -> u64 {
    10_000
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_alphabet_cap() -> usize {
    4096
}

fn check_unit(field: &str, name: &str, v: f64, errors: &mut Vec<String>) {
    if !(0.0..=1.0).contains(&v) {
        errors.push(format!("{field}.{name} = {v} must lie in [0, 1]"));
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid config:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Every violated constraint, not just the first.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errors = Vec::new();
        let Some(command) = self.command else {
            errors.push("command is missing".into());
            return Err(ConfigError::Invalid(errors));
        };
        if !(self.beta > 0.0 && self.beta < 0.5) {
            errors.push(format!(
                "beta = {} is outside (0, 0.5); the good-set threshold requires beta < 0.5",
                self.beta
            ));
        }
        if self.trials == 0 {
            errors.push("trials must be at least 1".into());
        }
        if self.k == 0 || self.k > 20 {
            errors.push(format!("k = {} must lie in 1..=20", self.k));
        }
        if !(self.p_e2 > 0.0 && self.p_e2 < 1.0) {
            errors.push(format!(
                "p_e2 = {} must lie strictly between 0 and 1",
                self.p_e2
            ));
        }
        if !(0.0..=1.0).contains(&self.p) {
            errors.push(format!("p = {} must lie in [0, 1]", self.p));
        }
        if self.alphabet_cap < 2 {
            errors.push("alphabet_cap must be at least 2".into());
        }
        for (field, spec) in [
            ("channel", &self.channel),
            ("amp_channel", &self.amp_channel),
            ("phase_channel", &self.phase_channel),
        ] {
            if let Some(s) = spec {
                s.check(field, &mut errors);
            }
        }
        for (field, spec) in [
            ("main_channel", &self.main_channel),
            ("direct_channel", &self.direct_channel),
        ] {
            if let Some(s) = spec {
                s.check(field, &mut errors);
            }
        }
        if let Some(pauli) = self.pauli {
            if let Err(e) = pauli_induced_channels(pauli.px, pauli.py, pauli.pz) {
                errors.push(format!("pauli: {e}"));
            }
        }
        let has_sets =
            self.pauli.is_some() || (self.amp_channel.is_some() && self.phase_channel.is_some());
        if self.pauli.is_some() && (self.amp_channel.is_some() || self.phase_channel.is_some()) {
            errors.push("give either pauli or amp_channel/phase_channel, not both".into());
        }
        match command {
            Command::Polarize => {
                if self.channel.is_none() {
                    errors.push("polarize needs `channel`".into());
                }
            }
            Command::Sets | Command::RelaySim => {
                if !has_sets {
                    errors.push(format!(
                        "{} needs `pauli` or both `amp_channel` and `phase_channel`",
                        command.name()
                    ));
                }
            }
            Command::Capacity | Command::Superactivate => {
                if self.main_channel.is_none() {
                    errors.push(format!("{} needs `main_channel`", command.name()));
                }
            }
            Command::Sweep => {
                if self.main_channel.is_none() {
                    errors.push("sweep needs `main_channel`".into());
                }
                if !has_sets {
                    errors.push(
                        "sweep needs `pauli` or both `amp_channel` and `phase_channel`".into(),
                    );
                }
            }
        }
        if let (Command::Capacity | Command::Superactivate | Command::Sweep, Some(spec)) =
            (command, &self.main_channel)
        {
            if let Ok(ch) = spec.build() {
                if ch.in_dim() != 2 {
                    errors.push("main_channel must act on a qubit".into());
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errors))
        }
    }

    fn polarize_options(&self) -> PolarizeOptions {
        PolarizeOptions {
            alphabet_cap: self.alphabet_cap,
            merge_equal_ratios: true,
            quantize_bins: self.quantize_bins,
        }
    }
}

/// Reads a configuration file without validating it.
pub fn read_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ExperimentConfig::from_json(&text)
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let cfg = read_config(path)?;
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Polar(#[from] PolarError),
    #[error(transparent)]
    Sets(#[from] SetError),
    #[error(transparent)]
    Relay(#[from] RelayError),
    #[error(transparent)]
    Superactivation(#[from] SuperactivationError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot start thread pool: {0}")]
    Threads(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// File name relative to the output directory.
    pub file: String,
    pub sha256: String,
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub key: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: ExperimentConfig,
    pub version: String,
    pub duration_seconds: f64,
    pub output_dir: PathBuf,
    pub outputs: Vec<OutputFile>,
    pub summary: Vec<SummaryEntry>,
}

struct Outputs {
    dir: PathBuf,
    files: Vec<OutputFile>,
    summary: Vec<SummaryEntry>,
}

impl Outputs {
    fn write(&mut self, file: &str, body: Vec<u8>) -> Result<(), RunError> {
        let path = self.dir.join(file);
        fs::write(&path, &body).map_err(|source| RunError::Io { path, source })?;
        let rows = body
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
            .saturating_sub(1);
        self.files.push(OutputFile {
            file: file.to_string(),
            sha256: hex::encode(Sha256::digest(&body)),
            rows,
        });
        Ok(())
    }

    fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push(SummaryEntry {
            key: key.to_string(),
            value: value.to_string(),
        });
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn quantity_csv(rows: &[(&str, String)]) -> Vec<u8> {
    let mut out = b"quantity,value\n".to_vec();
    for (k, v) in rows {
        out.extend_from_slice(format!("{k},{v}\n").as_bytes());
    }
    out
}

/// Runs `config` on a pool of `threads` workers (all cores when `None`).
pub fn run(config: &ExperimentConfig, threads: Option<usize>) -> Result<RunManifest, RunError> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| RunError::Threads(e.to_string()))?;
    pool.install(|| run_inner(config))
}

fn run_inner(config: &ExperimentConfig) -> Result<RunManifest, RunError> {
    let start = Instant::now();
    let command = config.command.expect("validated");
    fs::create_dir_all(&config.output_dir).map_err(io_err(&config.output_dir))?;
    let mut out = Outputs {
        dir: config.output_dir.clone(),
        files: Vec::new(),
        summary: Vec::new(),
    };
    match command {
        Command::Polarize => run_polarize(config, &mut out)?,
        Command::Sets => run_sets(config, &mut out)?,
        Command::Capacity => run_capacity(config, &mut out)?,
        Command::RelaySim => run_relay(config, &mut out)?,
        Command::Superactivate => run_superactivate(config, &mut out)?,
        Command::Sweep => run_sweep(config, &mut out)?,
    }
    let manifest = RunManifest {
        command: command.name().to_string(),
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        duration_seconds: start.elapsed().as_secs_f64(),
        output_dir: config.output_dir.clone(),
        outputs: out.files,
        summary: out.summary,
    };
    let path = config.output_dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(manifest)
}

fn run_polarize(config: &ExperimentConfig, out: &mut Outputs) -> Result<(), RunError> {
    let w = config.channel.as_ref().expect("validated").build()?;
    let pr = polarize(&w, config.k, &config.polarize_options())?;
    let sets = select_sets(&pr, config.beta)?;
    let mut body = Vec::new();
    write_polarization_csv(&mut body, &pr, &sets).expect("write to memory");
    out.write("polarization.csv", body)?;
    let sum_z: f64 = sets.good.iter().map(|i| pr.z[i]).sum();
    out.note("n", pr.n);
    out.note("|good|", sets.good.len());
    out.note("|bad|", sets.bad.len());
    out.note(
        "rate |good|/n",
        fmt_f64(sets.good.len() as f64 / pr.n as f64),
    );
    out.note("symmetric capacity I(W)", fmt_f64(symmetric_capacity(&w)));
    out.note("sum of z over good", fmt_f64(sum_z));
    out.note("threshold", fmt_f64(sets.threshold));
    out.note(
        "error bound n 2^(-n^beta)",
        fmt_f64(error_bound(pr.n, config.beta)),
    );
    Ok(())
}

fn dual_partition(config: &ExperimentConfig) -> Result<IndexSetPartition, RunError> {
    let (amp, phase) = match (config.pauli, &config.amp_channel, &config.phase_channel) {
        (Some(p), _, _) => pauli_induced_channels(p.px, p.py, p.pz)?,
        (None, Some(a), Some(b)) => (a.build()?, b.build()?),
        _ => unreachable!("validated"),
    };
    let run = dual_polarize(
        &amp,
        &phase,
        config.k,
        config.beta,
        &config.polarize_options(),
    )?;
    Ok(build_partition(&run.sets))
}

fn note_partition(out: &mut Outputs, part: &IndexSetPartition) {
    out.note("n", part.n);
    out.note("|S_in|", part.s_in.len());
    out.note("|P1|", part.p1.len());
    out.note("|P2|", part.p2.len());
    out.note("|B|", part.b.len());
}

fn run_sets(config: &ExperimentConfig, out: &mut Outputs) -> Result<(), RunError> {
    let part = dual_partition(config)?;
    let mut body = Vec::new();
    write_partition_csv(&mut body, &part).expect("write to memory");
    out.write("partition.csv", body)?;
    let r = eve_capacity(&part);
    let rows = [
        ("n", part.n.to_string()),
        ("s_in", part.s_in.len().to_string()),
        ("p1", part.p1.len().to_string()),
        ("p2", part.p2.len().to_string()),
        ("b", part.b.len().to_string()),
        ("p_sym_degraded", fmt_f64(r.p_sym_degraded)),
        ("p_sym_nondegraded", fmt_f64(r.p_sym_nondegraded)),
        ("r_sym", fmt_f64(r.r_sym)),
        ("c_bob", fmt_f64(r.c_bob)),
        ("c_bob_alt", fmt_f64(r.c_bob_alt)),
        ("bob_consistent", r.bob_consistent.to_string()),
        ("c_eve", fmt_f64(r.c_eve)),
        ("c_eve_p1", fmt_f64(r.c_eve_p1)),
        ("c_eve_e1e2", fmt_f64(r.c_eve_e1e2)),
        ("c_eve_e2d", fmt_f64(r.c_eve_e2d)),
        ("secrecy_gap", fmt_f64(r.secrecy_gap)),
        ("negative_rate_warning", r.negative_rate_warning.to_string()),
    ];
    out.write("rates.csv", quantity_csv(&rows))?;
    note_partition(out, &part);
    out.note("P_sym (degraded)", fmt_f64(r.p_sym_degraded));
    out.note("P_sym (non-degraded)", fmt_f64(r.p_sym_nondegraded));
    if r.negative_rate_warning {
        out.note("warning", "negative rate at this block length");
    }
    Ok(())
}

fn run_capacity(config: &ExperimentConfig, out: &mut Outputs) -> Result<(), RunError> {
    let main = config.main_channel.as_ref().expect("validated").build()?;
    let amp = BinaryCqChannel::from_channel_z(&main)?;
    let phase = BinaryCqChannel::from_channel_x(&main)?;
    let eve = BinaryCqChannel::complementary_x(&main)?;
    let private = private_information(&phase, &eve)?;
    let i_coh = coherent_information(&main, &DensityMatrix::maximally_mixed(main.in_dim()))?;
    let assisted = assisted_single_use_capacity(&phase, &eve)?;
    let rows = [
        ("c_sym_amp", fmt_f64(symmetric_cq_capacity(&amp))),
        ("c_sym_phase", fmt_f64(symmetric_cq_capacity(&phase))),
        ("i_ab_phase", fmt_f64(private.i_ab)),
        ("i_ae_phase", fmt_f64(private.i_ae)),
        ("p_sym_single_use", fmt_f64(private.p_sym_single_use)),
        ("i_coh_maximally_mixed", fmt_f64(i_coh)),
        ("assisted_single_use_capacity", fmt_f64(assisted)),
    ];
    out.write("capacity.csv", quantity_csv(&rows))?;
    for (k, v) in rows {
        out.note(k, v);
    }
    Ok(())
}

fn relay_links(config: &ExperimentConfig) -> Result<(LinkChannel, Option<LinkChannel>), RunError> {
    let hop = match &config.main_channel {
        Some(spec) => spec.build()?,
        None => KrausChannel::identity(2),
    };
    let direct = match &config.direct_channel {
        Some(spec) => Some(LinkChannel::Quantum(spec.build()?)),
        None => None,
    };
    Ok((LinkChannel::Quantum(hop), direct))
}

fn run_relay(config: &ExperimentConfig, out: &mut Outputs) -> Result<(), RunError> {
    let part = dual_partition(config)?;
    let (hop, direct) = relay_links(config)?;
    let spec = RelayChannelSpec::new(hop.clone(), hop, direct, config.p_e2, part)?;
    let result = simulate_relay(&spec, config.trials, config.seed)?;
    let expected = expected_throughput(&spec);
    let b_star = 0.5 * spec.partition.s_in.len() as f64;
    let mut body = Vec::new();
    write_relay_csv(
        &mut body,
        &[(config.p_e2, result.clone(), expected, b_star)],
    )
    .expect("write to memory");
    out.write("relay.csv", body)?;

    let caps = set_capacities(&spec.partition);
    let degraded = direct_link_is_degraded(&spec)?;
    let rows = [
        ("c_12", fmt_f64(caps.c_12)),
        ("c_1d", fmt_f64(caps.c_1d)),
        ("c_2d", fmt_f64(caps.c_2d)),
        ("relay_capacity", fmt_f64(caps.relay)),
        (
            "relay_private_capacity",
            fmt_f64(relay_private_capacity(&spec.partition)),
        ),
        (
            "direct_link_degraded",
            degraded.map_or("n/a".to_string(), |d| d.to_string()),
        ),
    ];
    out.write("relay_capacities.csv", quantity_csv(&rows))?;
    note_partition(out, &spec.partition);
    out.note("p_e2", fmt_f64(config.p_e2));
    out.note(
        "successes / trials",
        format!("{} / {}", result.successes, result.trials),
    );
    out.note("mean throughput", fmt_f64(result.mean_throughput));
    out.note("expected throughput p_e2 |S_in|", fmt_f64(expected));
    out.note("assisted throughput |S_in|/2", fmt_f64(b_star));
    out.note(
        "superactivation advantage",
        if b_star > expected { "yes" } else { "no" },
    );
    Ok(())
}

fn switch_inputs(
    config: &ExperimentConfig,
) -> Result<(KrausChannel, crate::superactivation::JointInputState), RunError> {
    let main = config.main_channel.as_ref().expect("validated").build()?;
    let (mode, main) = match config.input {
        InputSpec::Alternating => (
            InputMode::EntangledFlagged(FlagVariant::Alternating),
            lift_for_flagged_input(&main),
        ),
        InputSpec::Literal => (
            InputMode::EntangledFlagged(FlagVariant::Literal),
            lift_for_flagged_input(&main),
        ),
        InputSpec::Plus => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let plus = DensityMatrix::pure(&[crate::quantum::c(s), crate::quantum::c(s)])?;
            (InputMode::PhaseSetState(plus), main)
        }
    };
    Ok((main, make_rho_ac(mode)?))
}

fn run_superactivate(config: &ExperimentConfig, out: &mut Outputs) -> Result<(), RunError> {
    let (main, input) = switch_inputs(config)?;
    let sc = build_switch_channel(config.p, &main)?;
    let report = joint_coherent_info(&sc, &input)?;
    let mut rows: Vec<(&str, String)> = vec![
        ("p", fmt_f64(report.p)),
        ("i_coh_joint", fmt_f64(report.i_coh_joint)),
        ("decomposition_sum", fmt_f64(report.decomposition_sum)),
    ];
    let labels = ["term_mm", "term_me", "term_em", "term_ee"];
    let weights = ["weight_mm", "weight_me", "weight_em", "weight_ee"];
    for (i, t) in report.branch_terms.iter().enumerate() {
        rows.push((labels[i], fmt_f64(t.i_coh)));
        rows.push((weights[i], fmt_f64(t.weight)));
    }
    rows.push(("i_coh_main", fmt_f64(report.i_coh_main)));
    rows.push(("bound_2p1p", fmt_f64(report.bound_2p1p)));
    rows.push(("p_sym_star_lower", fmt_f64(report.p_sym_star_lower)));
    let interior = if config.p > 0.0 && config.p < 1.0 {
        config.p
    } else {
        0.5
    };
    let bound = superactivated_bound(interior, report.i_coh_main)?;
    rows.push(("p_star", fmt_f64(bound.p_star)));
    rows.push(("bound_at_p_star", fmt_f64(bound.bound_at_p_star)));
    out.write("superactivation.csv", quantity_csv(&rows))?;

    out.note("p", fmt_f64(report.p));
    out.note("I_coh(M x M)", fmt_f64(report.i_coh_joint));
    out.note("four-branch sum", fmt_f64(report.decomposition_sum));
    out.note("I_coh(main)", fmt_f64(report.i_coh_main));
    out.note("bound 2p(1-p) I_coh(main)", fmt_f64(report.bound_2p1p));
    out.note("p_star", fmt_f64(bound.p_star));
    out.note("bound at p_star", fmt_f64(bound.bound_at_p_star));
    out.note("I_coh(main) / 2", fmt_f64(report.p_sym_star_lower));
    Ok(())
}

fn run_sweep(config: &ExperimentConfig, out: &mut Outputs) -> Result<(), RunError> {
    let (main, input) = switch_inputs(config)?;
    let part = dual_partition(config)?;
    let rows: Vec<SweepRow> = sweep(&main, &input, &part, &p_grid())?;
    let mut body = Vec::new();
    write_sweep_csv(&mut body, &rows).expect("write to memory");
    out.write("sweep.csv", body)?;
    note_partition(out, &part);
    let flip = rows
        .windows(2)
        .find(|w| w[0].comparison.advantage != w[1].comparison.advantage)
        .map(|w| fmt_f64(w[1].report.p));
    out.note(
        "advantage ends at p_e2",
        flip.unwrap_or_else(|| "none".into()),
    );
    if let Some(mid) = rows.iter().find(|r| r.report.p == 0.5) {
        out.note("bound at p = 0.5", fmt_f64(mid.report.bound_2p1p));
        out.note("I_coh(main) / 2", fmt_f64(mid.report.p_sym_star_lower));
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("manifest lists no outputs")]
    NoOutputs,
    #[error("output file {0} is missing")]
    MissingFile(PathBuf),
}

/// Plain-text summary of a finished run.
pub fn render_report(manifest: &RunManifest) -> Result<String, ReportError> {
    if manifest.outputs.is_empty() {
        return Err(ReportError::NoOutputs);
    }
    let mut paths = Vec::new();
    for o in &manifest.outputs {
        let path = manifest.output_dir.join(&o.file);
        if !path.is_file() {
            return Err(ReportError::MissingFile(path));
        }
        paths.push((path, o));
    }
    let width = manifest
        .summary
        .iter()
        .map(|e| e.key.chars().count())
        .max()
        .unwrap_or(0);
    let mut s = Vec::new();
    writeln!(s, "qrelay {} ({})", manifest.command, manifest.version).ok();
    for e in &manifest.summary {
        writeln!(s, "  {:<width$}  {}", e.key, e.value).ok();
    }
    writeln!(
        s,
        "data files (CSV, header row; gnuplot: set datafile separator ','):"
    )
    .ok();
    for (path, o) in paths {
        writeln!(
            s,
            "  {}  rows={}  sha256={}",
            path.display(),
            o.rows,
            &o.sha256[..16]
        )
        .ok();
    }
    Ok(String::from_utf8(s).expect("utf-8"))
}
