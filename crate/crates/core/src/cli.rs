//! Experiment runner behind the `kway` binary.
//!
//! Every command writes plain CSV preceded by a `#` comment block (the run
//! manifest) and followed by `#` summary lines. Output depends only on the
//! flags, never on the thread count; wall time goes to stderr.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::channel::{db_to_linear, derive_seed, Purpose, SimConfig};
use crate::decryption::eavesdrop_ambiguity;
use crate::error::Error;
use crate::mac_phase::EncryptedChain;
use crate::metrics::{snr_grid, sum_rate_sweep};
use crate::protocol::{map_trials, run_aligned_trial, run_tdma_trial, sample_messages, Scheme, TrialOutcome};
use crate::tdma::{aligned_dof_closed_form, tdma_dof_closed_form};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BAD_FLAGS: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "kway", version, about = "MIMO K-way relay channel simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run full message exchanges and report per-pair recovery.
    Exchange(ExchangeArgs),
    /// Sweep SNR and estimate the sum-rate DoF slope.
    Dof(DofArgs),
    /// Count what a keyless broadcast listener can infer.
    Eavesdrop(EavesdropArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Aligned,
    Tdma,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Aligned => Scheme::Aligned,
            SchemeArg::Tdma => Scheme::Tdma,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct NetworkArgs {
    /// Number of users K
    #[arg(short = 'K', long, default_value_t = 4)]
    pub users: usize,
    /// Antennas per node M (defaults to K - 1)
    #[arg(short = 'M', long)]
    pub antennas: Option<usize>,
    /// Master seed
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of Monte Carlo trials
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long, value_enum, default_value_t = SchemeArg::Aligned)]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 1.0)]
    pub noise_variance: f64,
    /// Worker threads (output does not depend on this)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write CSV here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl NetworkArgs {
    fn antennas(&self) -> usize {
        self.antennas.unwrap_or(self.users.saturating_sub(1))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ExchangeArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    #[arg(long, default_value_t = 20.0)]
    pub snr_db: f64,
    /// Payload bits per message
    #[arg(long, default_value_t = 64)]
    pub payload_bits: usize,
    /// Re-run only this trial index
    #[arg(long)]
    pub only_trial: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct DofArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    #[arg(long, default_value_t = 40.0)]
    pub snr_start: f64,
    #[arg(long, default_value_t = 60.0)]
    pub snr_stop: f64,
    #[arg(long, default_value_t = 5.0)]
    pub step: f64,
}

#[derive(Debug, Clone, Args)]
pub struct EavesdropArgs {
    #[arg(short = 'K', long, default_value_t = 4)]
    pub users: usize,
    #[arg(long, default_value_t = 64)]
    pub payload_bits: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Give the listener this user's message (1-based)
    #[arg(long)]
    pub with_key: Option<usize>,
}

/// Maps a library error onto the documented exit codes.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_) | Error::InsufficientGrid(_) | Error::LengthMismatch { .. } => EXIT_BAD_FLAGS,
        Error::SingularMatrix { .. } | Error::NoConvergence { .. } | Error::ResampleLimit { .. } => EXIT_NUMERIC,
    }
}

#[derive(Debug)]
pub enum CliError {
    Sim(Error),
    Io(io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Sim(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Sim(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Sim(e) => exit_code(e),
            CliError::Io(_) => 1,
        }
    }
}

/// Parses flags and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_BAD_FLAGS } else { EXIT_OK };
        }
    };
    let started = Instant::now();
    let result = match out_path(&cli.command) {
        Some(path) => File::create(path)
            .map_err(CliError::from)
            .and_then(|f| execute(&cli.command, &mut BufWriter::new(f))),
        None => execute(&cli.command, &mut io::stdout().lock()),
    };
    eprintln!("# wall_time_s: {:.3}", started.elapsed().as_secs_f64());
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn out_path(cmd: &Command) -> Option<&PathBuf> {
    match cmd {
        Command::Exchange(a) => a.net.out.as_ref(),
        Command::Dof(a) => a.net.out.as_ref(),
        Command::Eavesdrop(_) => None,
    }
}

pub fn execute(cmd: &Command, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Exchange(a) => cmd_exchange(a, out),
        Command::Dof(a) => cmd_dof(a, out),
        Command::Eavesdrop(a) => cmd_eavesdrop(a, out),
    }
}

/// Reproducibility header written at the top of every CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: &'static str,
    pub entries: Vec<(&'static str, String)>,
}

impl RunManifest {
    fn write(&self, out: &mut dyn Write) -> io::Result<()> {
        writeln!(out, "# {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))?;
        writeln!(out, "# command: {}", self.command)?;
        for (k, v) in &self.entries {
            writeln!(out, "# {k}: {v}")?;
        }
        Ok(())
    }
}

fn network_entries(n: &NetworkArgs) -> Vec<(&'static str, String)> {
    vec![
        ("scheme", Scheme::from(n.scheme).to_string()),
        ("users", n.users.to_string()),
        ("antennas", n.antennas().to_string()),
        ("noise_variance", n.noise_variance.to_string()),
        ("trials", n.trials.to_string()),
        ("master_seed", n.seed.to_string()),
    ]
}

pub fn cmd_exchange(a: &ExchangeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let scheme = Scheme::from(a.net.scheme);
    let cfg = SimConfig {
        users: a.net.users,
        antennas: a.net.antennas(),
        snr: db_to_linear(a.snr_db),
        noise_variance: a.net.noise_variance,
        master_seed: a.net.seed,
        trials: a.net.trials,
        payload_bits: a.payload_bits,
    };
    cfg.validate()?;
    if scheme == Scheme::Aligned && cfg.antennas + 1 != cfg.users {
        return Err(Error::InvalidConfig(format!("aligned scheme needs M = K - 1, got K = {}, M = {}", cfg.users, cfg.antennas)).into());
    }
    if let Some(t) = a.only_trial {
        if t >= cfg.trials {
            return Err(Error::InvalidConfig(format!("--only-trial {t} is outside 0..{}", cfg.trials)).into());
        }
    }

    let run = |t: u64| match scheme {
        Scheme::Aligned => run_aligned_trial(&cfg, t),
        Scheme::Tdma => run_tdma_trial(&cfg, t),
    };
    // Keep per-trial results so rows before a failing trial are still written.
    let results: Vec<Result<TrialOutcome, Error>> = match a.only_trial {
        Some(t) => vec![run(t)],
        None => map_trials(cfg.trials, a.net.threads, |t| Ok(run(t)))?,
    };

    let completed: Vec<&TrialOutcome> = results.iter().map_while(|r| r.as_ref().ok()).collect();
    let resamples: u64 = completed.iter().map(|o| u64::from(o.resamples)).sum();
    let mut entries = network_entries(&a.net);
    entries.push(("snr_db", a.snr_db.to_string()));
    entries.push(("payload_bits", a.payload_bits.to_string()));
    if let Some(t) = a.only_trial {
        entries.push(("only_trial", t.to_string()));
    }
    entries.push(("resamples", resamples.to_string()));
    RunManifest { command: "exchange", entries }.write(out)?;

    let mut errors = 0u64;
    let mut triples = 0u64;
    {
        let mut w = csv::Writer::from_writer(&mut *out);
        w.write_record(["trial", "user", "source", "bits_total", "bits_wrong", "recovered_ok"])?;
        for outcome in &completed {
            for r in &outcome.records {
                triples += 1;
                errors += u64::from(!r.recovered_ok());
                w.write_record([
                    outcome.trial.to_string(),
                    (r.destination + 1).to_string(),
                    (r.source + 1).to_string(),
                    r.bits_total.to_string(),
                    r.bits_wrong.to_string(),
                    u8::from(r.recovered_ok()).to_string(),
                ])?;
            }
        }
        w.flush()?;
    }
    let mer = if triples == 0 { 0.0 } else { errors as f64 / triples as f64 };
    writeln!(out, "# mer: {mer}")?;
    writeln!(out, "# message_errors: {errors}")?;
    writeln!(out, "# message_triples: {triples}")?;
    out.flush()?;

    if let Some(Err(e)) = results.into_iter().find(Result::is_err) {
        return Err(e.into());
    }
    Ok(())
}

pub fn cmd_dof(a: &DofArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let scheme = Scheme::from(a.net.scheme);
    let users = a.net.users;
    let antennas = a.net.antennas();
    if users < 2 || antennas < 1 {
        return Err(Error::InvalidConfig(format!("need K >= 2 and M >= 1 (K = {users}, M = {antennas})")).into());
    }
    if scheme == Scheme::Aligned && antennas + 1 != users {
        return Err(Error::InvalidConfig(format!("aligned scheme needs M = K - 1, got K = {users}, M = {antennas}")).into());
    }
    if a.net.trials < 1 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()).into());
    }
    let grid = snr_grid(a.snr_start, a.snr_stop, a.step)?;
    let est = sum_rate_sweep(scheme, users, antennas, &grid, a.net.trials, a.net.seed, a.net.noise_variance, a.net.threads)?;

    let mut entries = network_entries(&a.net);
    entries.push(("snr_start_db", a.snr_start.to_string()));
    entries.push(("snr_stop_db", a.snr_stop.to_string()));
    entries.push(("snr_step_db", a.step.to_string()));
    entries.push(("resamples", est.resamples.to_string()));
    RunManifest { command: "dof", entries }.write(out)?;
    {
        let mut w = csv::Writer::from_writer(&mut *out);
        w.write_record(["snr_db", "scheme", "sum_rate", "resamples"])?;
        for (db, rate) in est.snr_grid_db.iter().zip(&est.sum_rates) {
            w.write_record([db.to_string(), scheme.to_string(), rate.to_string(), est.resamples.to_string()])?;
        }
        w.flush()?;
    }
    let closed = match scheme {
        Scheme::Aligned => aligned_dof_closed_form(users),
        Scheme::Tdma => tdma_dof_closed_form(users, antennas),
    };
    writeln!(out, "# slope: {}", est.slope)?;
    writeln!(out, "# closed_form_dof: {closed}")?;
    out.flush()?;
    Ok(())
}

pub fn cmd_eavesdrop(a: &EavesdropArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.users < 2 {
        return Err(Error::InvalidConfig(format!("K must be at least 2, got {}", a.users)).into());
    }
    if a.payload_bits == 0 {
        return Err(Error::InvalidConfig("payload must have at least one bit".into()).into());
    }
    let messages = sample_messages(derive_seed(a.seed, 0, Purpose::Messages), a.users, a.payload_bits);
    let chain = EncryptedChain::from_messages(&messages);
    let known = match a.with_key {
        None => Vec::new(),
        Some(u) if (1..=a.users).contains(&u) => vec![(u - 1, messages[u - 1].clone())],
        Some(u) => return Err(Error::InvalidConfig(format!("--with-key {u} is not a user in 1..={}", a.users)).into()),
    };
    let report = eavesdrop_ambiguity(&chain, &known)?;
    let per_bit = match report.uniform_count() {
        Some(c) => c.to_string(),
        None => format!("{:?}", report.consistent_per_bit),
    };
    writeln!(out, "users: {}", a.users)?;
    writeln!(out, "payload_bits: {}", a.payload_bits)?;
    writeln!(
        out,
        "known_keys: {}",
        a.with_key.map_or_else(|| "none".to_string(), |u| u.to_string())
    )?;
    writeln!(out, "consistent tuples per bit: {per_bit}; messages determined: {}", report.determined_messages.len())?;
    out.flush()?;
    Ok(())
}
