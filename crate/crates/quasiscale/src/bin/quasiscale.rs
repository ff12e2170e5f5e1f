#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quasiscale::io::{
    charfn_to_json, sweep_to_json, write_quasiprob_csv, write_sweep_csv, ChoiSummary, ReductionSummary,
    ThresholdSummary, WitnessSummary,
};
use quasiscale::sweep::{self, Axes, Range, SweepConfig};
use quasiscale::Error;
use quasiscale_core::certify::{choi, planck_overlap, positivity_probe, ProbeConfig, ProbeState};
use quasiscale_core::channels::{det2, reduce_scaling_matrix, ChannelSpec};
use quasiscale_core::fock::{make_state, FockDim, StateKind, TruncatedState};
use quasiscale_core::gaussian::{threshold_report, Family};
use quasiscale_core::phase::{classify_action, EvalConfig, Verdict};
use quasiscale_core::quasiprob::{char_fn, quasiprob_from_charfn, OrderingParam, PolarGrid, QuadratureConfig};
use serde::Serialize;

const EXIT_MISMATCH: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "quasiscale", version, about = "Scaling maps of quasiprobability distributions")]
struct Cli {
    /// Fock truncation N
    #[arg(long, global = true, default_value_t = 40)]
    dim: usize,
    /// Radial quadrature nodes at the base cutoff
    #[arg(long, global = true, default_value_t = 200)]
    radial_nodes: usize,
    /// Base radial cutoff R
    #[arg(long, global = true, default_value_t = 8.0)]
    cutoff: f64,
    /// Eigen-witness tolerance
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0: one per core)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Output file (default: stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// JSON state file replacing --state
    #[arg(long, global = true)]
    state_file: Option<PathBuf>,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    Scaling,
    Amp,
    Att,
}

#[derive(Debug, Args)]
struct ScanArgs {
    target: Target,
    #[arg(long, allow_hyphen_values = true)]
    s: Option<Range>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<Range>,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<Range>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<Range>,
    /// Boundary band excused from the agreement check
    #[arg(long, default_value_t = 0.02)]
    band: f64,
    /// Fock/Choi tier on every n-th point plus in-band points (0: never)
    #[arg(long, default_value_t = 4)]
    every: usize,
    #[arg(long, default_value_t = 12)]
    choi_dim: usize,
    /// Seeded random pure probes per point
    #[arg(long, default_value_t = 10)]
    random_probes: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify a parameter grid analytically and numerically
    Scan(ScanArgs),
    /// Look for a positivity witness of a channel on one state
    Certify {
        #[arg(long, allow_hyphen_values = true)]
        channel: ChannelSpec,
        #[arg(long, default_value = "vacuum")]
        state: StateKind,
    },
    /// Block spectrum of the Choi matrix on a --dim level probe
    Choi {
        #[arg(long, allow_hyphen_values = true)]
        channel: ChannelSpec,
    },
    /// Overlap of |1><1| and |0><0| Wigner functions at two values of hbar
    Planck {
        #[arg(long)]
        a2: f64,
    },
    /// Reduce a 2x2 matrix to a*1 or a*sigma_3 by symplectic matrices
    ReduceK {
        /// k11,k12,k21,k22
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// Analytic thresholds of a noisy attenuator or amplifier
    Threshold {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        kappa: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
    },
    /// s-ordered quasiprobability of a state as re_alpha,im_alpha,value
    Quasiprob {
        #[arg(long, default_value = "vacuum")]
        state: StateKind,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        s: f64,
        /// Largest |alpha| sampled
        #[arg(long, default_value_t = 4.0)]
        alpha_max: f64,
        #[arg(long, default_value_t = 40)]
        alpha_nodes: usize,
    },
    /// Sampled characteristic function of a state as JSON
    Charfn {
        #[arg(long, default_value = "vacuum")]
        state: StateKind,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        s: f64,
    },
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

impl Cli {
    fn dim(&self) -> Result<FockDim, Error> {
        FockDim::new(self.dim).map_err(|e| usage(format!("--dim: {e}")))
    }

    fn quad(&self) -> Result<QuadratureConfig, Error> {
        if !(self.cutoff > 0.0) || !self.cutoff.is_finite() {
            return Err(usage("--cutoff must be positive"));
        }
        if self.radial_nodes == 0 {
            return Err(usage("--radial-nodes must be positive"));
        }
        Ok(QuadratureConfig {
            cutoff: self.cutoff,
            radial_nodes: self.radial_nodes,
            ..QuadratureConfig::default()
        })
    }

    fn probe(&self) -> Result<ProbeConfig, Error> {
        if !(self.tol > 0.0) {
            return Err(usage("--tol must be positive"));
        }
        Ok(ProbeConfig {
            quad: self.quad()?,
            tol_pos: self.tol,
            ..ProbeConfig::default()
        })
    }

    fn state(&self, kind: StateKind) -> Result<(String, TruncatedState), Error> {
        match &self.state_file {
            Some(path) => {
                let text = fs::read_to_string(path)?;
                Ok((path.display().to_string(), quasiscale::io::state_from_json(&text)?))
            }
            None => Ok((kind.to_string(), make_state(kind, self.dim()?)?)),
        }
    }

    /// Writes `bytes` to --out, or to stdout.
    fn emit(&self, bytes: &[u8]) -> Result<(), Error> {
        match &self.out {
            Some(path) => write_file(path, bytes),
            None => {
                let mut stdout = std::io::stdout().lock();
                match stdout.write_all(bytes).and_then(|_| stdout.flush()) {
                    Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                    other => Ok(other?),
                }
            }
        }
    }

    /// A one-line summary on stdout followed by the JSON document, which
    /// goes to --out when given.
    fn report<T: Serialize>(&self, line: &str, doc: &T) -> Result<(), Error> {
        println!("{line}");
        let mut json = serde_json::to_string_pretty(doc)?;
        json.push('\n');
        self.emit(json.as_bytes())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    fs::write(path, bytes)?;
    Ok(())
}

fn scan(cli: &Cli, args: &ScanArgs) -> Result<ExitCode, Error> {
    let need = |r: Option<Range>, flag: &str| r.ok_or_else(|| usage(format!("scan {:?} needs --{flag}", args.target)));
    let axes = match args.target {
        Target::Scaling => Axes::Scaling {
            s: need(args.s, "s")?,
            a: need(args.a, "a")?,
        },
        Target::Amp | Target::Att => Axes::Noisy {
            family: if args.target == Target::Amp { Family::Amplifier } else { Family::Attenuator },
            kappa: need(args.kappa, "kappa")?,
            b: need(args.b, "b")?,
        },
    };
    let mut config = SweepConfig::new(axes);
    config.band = args.band;
    config.fock_every = args.every;
    config.jobs = cli.jobs;
    config.eval = EvalConfig {
        dim: cli.dim()?,
        choi_dim: FockDim::new(args.choi_dim).map_err(|e| usage(format!("--choi-dim: {e}")))?,
        probe: cli.probe()?,
        random_probes: args.random_probes,
        seed: cli.seed,
        ..EvalConfig::default()
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    let outcome = sweep::run(&config)?;

    let mut table = Vec::new();
    match cli.format {
        Format::Csv => write_sweep_csv(&outcome.records, &mut table)?,
        Format::Json => {
            table = sweep_to_json(&outcome.records)?.into_bytes();
            table.push(b'\n');
        }
    }
    cli.emit(&table)?;

    let mismatches = outcome.mismatches();
    eprintln!(
        "points={} fock_checked={} mismatches={}",
        outcome.records.len(),
        outcome.fock_checked(),
        mismatches.len()
    );
    for col in outcome.columns() {
        let show = |e: Option<f64>| e.map_or_else(|| "none".to_string(), |v| v.to_string());
        eprintln!(
            "kappa={} cp_edge={} cp_threshold={} eb_edge={} eb_threshold={}",
            col.kappa,
            show(col.cp_edge),
            col.cp_threshold,
            show(col.eb_edge),
            col.eb_threshold
        );
    }
    if let Err(e) = outcome.check() {
        for rec in &mismatches {
            eprintln!(
                "mismatch: analytic={} numeric={} reproduce: quasiscale {}",
                rec.analytic,
                rec.numeric.map_or_else(|| "none".to_string(), |v| v.to_string()),
                config.reproduction(rec)
            );
        }
        eprintln!("{e}");
        return Ok(ExitCode::from(EXIT_MISMATCH));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CertifyReport {
    channel: String,
    state: String,
    analytic: String,
    status: &'static str,
    witness: Option<WitnessSummary>,
}

fn certify(cli: &Cli, channel: &ChannelSpec, state: StateKind) -> Result<ExitCode, Error> {
    let (descriptor, rho) = cli.state(state)?;
    let probes = [ProbeState { descriptor, state: rho }];
    let witness = positivity_probe(channel, &probes, &cli.probe()?)?;
    let analytic = classify_action(channel.action());
    let positive = matches!(
        analytic,
        Verdict::Cp | Verdict::CpUnitary | Verdict::EbNb | Verdict::PinchVacuum
    );
    let status = match (positive, witness.is_some()) {
        (true, true) => "mismatch",
        (false, true) | (true, false) => "consistent",
        (false, false) => "inconclusive",
    };
    let mut line = format!(
        "channel={channel} state={} analytic={analytic} status={status}",
        probes[0].descriptor
    );
    match &witness {
        Some(w) => line.push_str(&format!(" witness={} input={} value={}", w.kind, w.input, w.value)),
        None => line.push_str(" witness=none"),
    }
    let report = CertifyReport {
        channel: channel.to_string(),
        state: probes[0].descriptor.clone(),
        analytic: analytic.to_string(),
        status,
        witness: witness.as_ref().map(WitnessSummary::from),
    };
    cli.report(&line, &report)?;
    Ok(if status == "mismatch" {
        ExitCode::from(EXIT_MISMATCH)
    } else {
        ExitCode::SUCCESS
    })
}

fn choi_cmd(cli: &Cli, channel: &ChannelSpec) -> Result<ExitCode, Error> {
    let j = choi(channel, cli.dim()?, &cli.quad()?)?;
    let summary = ChoiSummary::new(channel.to_string(), &j);
    let tol = EvalConfig::default().choi_tol;
    let line = format!(
        "channel={channel} dim={} min_eigenvalue={} max_eigenvalue={} trace={} negative={}",
        summary.dim,
        summary.min_eigenvalue,
        summary.max_eigenvalue,
        summary.trace,
        summary.min_eigenvalue < -tol
    );
    cli.report(&line, &summary)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct PlanckReport {
    a2: f64,
    overlap: f64,
}

fn planck(cli: &Cli, a2: f64) -> Result<ExitCode, Error> {
    let overlap = planck_overlap(a2).map_err(|e| usage(format!("--a2: {e}")))?;
    println!("{overlap:.6}");
    if cli.out.is_some() {
        cli.emit(serde_json::to_string_pretty(&PlanckReport { a2, overlap })?.as_bytes())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_matrix(text: &str) -> Result<[[f64; 2]; 2], Error> {
    let bad = || usage(format!("--matrix expects four comma-separated numbers, got `{text}`"));
    let v: Vec<f64> = text
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        &[a, b, c, d] if v.iter().all(|x| x.is_finite()) => Ok([[a, b], [c, d]]),
        _ => Err(bad()),
    }
}

fn reduce_k(cli: &Cli, matrix: &str) -> Result<ExitCode, Error> {
    let k = parse_matrix(matrix)?;
    let red = reduce_scaling_matrix(k)?;
    let summary = ReductionSummary::from(&red);
    let line = format!(
        "S1={:?} a={} sign={:+} S2={:?} residual={:e} det_S1={} det_S2={}",
        red.s1,
        red.a,
        red.sign,
        red.s2,
        summary.residual,
        det2(red.s1),
        det2(red.s2)
    );
    cli.report(&line, &summary)?;
    Ok(ExitCode::SUCCESS)
}

fn threshold(cli: &Cli, family: Family, kappa: f64, b: f64) -> Result<ExitCode, Error> {
    let report = threshold_report(family, kappa, b).map_err(|e| usage(e.to_string()))?;
    let summary = ThresholdSummary::from(&report);
    let line = format!(
        "family={family} kappa={kappa} b={b} cp={} ({}) eb={} ({}) nb={} ({})",
        summary.cp, summary.cp_threshold, summary.eb, summary.eb_threshold, summary.nb, summary.nb_threshold
    );
    cli.report(&line, &summary)?;
    Ok(ExitCode::SUCCESS)
}

fn ordering(s: f64) -> Result<OrderingParam, Error> {
    OrderingParam::new(s).map_err(|e| usage(format!("--s: {e}")))
}

fn charfn_grid(cli: &Cli, state: StateKind, s: f64) -> Result<quasiscale_core::quasiprob::CharFnGrid, Error> {
    let (_, rho) = cli.state(state)?;
    let grid = PolarGrid::new(cli.cutoff, cli.radial_nodes, rho.dim().get()).map_err(|e| usage(e.to_string()))?;
    Ok(char_fn(&rho, ordering(s)?, &grid)?)
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::Scan(args) => scan(cli, args),
        Command::Certify { channel, state } => certify(cli, channel, *state),
        Command::Choi { channel } => choi_cmd(cli, channel),
        Command::Planck { a2 } => planck(cli, *a2),
        Command::ReduceK { matrix } => reduce_k(cli, matrix),
        Command::Threshold { family, kappa, b } => threshold(cli, *family, *kappa, *b),
        Command::Quasiprob {
            state,
            s,
            alpha_max,
            alpha_nodes,
        } => {
            let chi = charfn_grid(cli, *state, *s)?;
            let alpha = PolarGrid::new(*alpha_max, *alpha_nodes, cli.dim).map_err(|e| usage(e.to_string()))?;
            let grid = quasiprob_from_charfn(&chi, &alpha)?;
            let mut buf = Vec::new();
            write_quasiprob_csv(&grid, &mut buf)?;
            cli.emit(&buf)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Charfn { state, s } => {
            let mut json = charfn_to_json(&charfn_grid(cli, *state, *s)?)?;
            json.push('\n');
            cli.emit(json.as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { EXIT_USAGE } else { 1 })
        }
    }
}
