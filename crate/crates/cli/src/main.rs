use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use reductive::kostant::FormNormalization;
use reductive::report::{
    render_checks, run_decompose, run_transport, run_verify, summarize, CheckGroup, Report,
    RunConfig,
};
use reductive::{Error, Mode};

/// Reductive decompositions, Kostant forms and canonical connections of
/// homogeneous orbits.
#[derive(Parser)]
#[command(name = "reductive", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute h, m, n with all algebraic certificates.
    Decompose(RunArgs),
    /// Decomposition plus connection, transport and parallelism checks.
    Verify(RunArgs),
    /// Compare D-transport along exp(tX)·o with the group pushforward.
    Transport(RunArgs),
    /// Print the summary table of a saved report and re-check its flags.
    Report {
        /// Report JSON written by another verb.
        file: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Built-in fixture: horosphere, punctured_euclidean or euclidean.
    #[arg(long)]
    example: Option<String>,
    /// JSON file mirroring the run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Seed of the sampled curve family.
    #[arg(long)]
    seed: Option<u64>,
    /// Multiple of tr(AB) used as the invariant form: trace or killing.
    #[arg(long, value_parser = parse_norm)]
    normalization: Option<FormNormalization>,
    /// Restrict to check groups (comma separated or repeated).
    #[arg(long, value_delimiter = ',')]
    check: Vec<String>,
    /// Write the JSON report here and the table to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record stage timings in the report (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    tol_residual: Option<f64>,
    #[arg(long)]
    tol_definiteness: Option<f64>,
    #[arg(long)]
    tol_skew: Option<f64>,
    #[arg(long)]
    tol_principal: Option<f64>,
    #[arg(long)]
    tol_parallel: Option<f64>,
    #[arg(long)]
    tol_lemma: Option<f64>,
    #[arg(long)]
    tol_transport: Option<f64>,
    #[arg(long)]
    tol_metric: Option<f64>,
    #[arg(long)]
    tol_negative: Option<f64>,
    #[arg(long)]
    tol_ode_atol: Option<f64>,
    #[arg(long)]
    tol_ode_rtol: Option<f64>,
    #[arg(long)]
    tol_fd_step: Option<f64>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "exact" => Ok(Mode::Exact),
        "float" => Ok(Mode::Float),
        _ => Err(format!("expected exact or float, got `{s}`")),
    }
}

fn parse_norm(s: &str) -> Result<FormNormalization, String> {
    match s {
        "trace" => Ok(FormNormalization::Trace),
        "killing" => Ok(FormNormalization::Killing),
        _ => Err(format!("expected trace or killing, got `{s}`")),
    }
}

impl RunArgs {
    fn config(&self) -> reductive::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
                RunConfig::from_json_str(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(e) = &self.example {
            cfg.example = Some(e.clone());
            cfg.custom = None;
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(f) = self.normalization {
            cfg.normalization = f;
        }
        if !self.check.is_empty() {
            cfg.checks = Some(
                self.check
                    .iter()
                    .map(|s| CheckGroup::parse(s.trim()))
                    .collect::<reductive::Result<_>>()?,
            );
        }
        cfg.timing |= self.timing;
        let t = &mut cfg.tolerances;
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut t.residual, self.tol_residual);
        set(&mut t.definiteness, self.tol_definiteness);
        set(&mut t.skew, self.tol_skew);
        set(&mut t.principal, self.tol_principal);
        set(&mut t.parallel, self.tol_parallel);
        set(&mut t.lemma, self.tol_lemma);
        set(&mut t.transport, self.tol_transport);
        set(&mut t.metric, self.tol_metric);
        set(&mut t.negative, self.tol_negative);
        set(&mut t.ode_atol, self.tol_ode_atol);
        set(&mut t.ode_rtol, self.tol_ode_rtol);
        set(&mut t.fd_step, self.tol_fd_step);
        Ok(cfg)
    }
}

fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

fn emit(report: &Report, out: Option<&Path>) -> ExitCode {
    match out {
        Some(path) => {
            if let Err(e) = write_atomic(path, &report.render_json()) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
            print!("{}", report.render_table());
        }
        None => {
            print!("{}", report.render_json());
            eprint!("{}", report.render_table());
        }
    }
    ExitCode::from(report.exit_code() as u8)
}

fn run(args: &RunArgs, f: fn(&RunConfig) -> reductive::Result<Report>) -> ExitCode {
    match args.config().and_then(|cfg| f(&cfg)) {
        Ok(report) => emit(&report, args.out.as_deref()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Decompose(a) => run(a, run_decompose),
        Command::Verify(a) => run(a, run_verify),
        Command::Transport(a) => run(a, run_transport),
        Command::Report { file } => {
            let parsed = fs::read_to_string(file)
                .map_err(|e| Error::Input(format!("{}: {e}", file.display())))
                .and_then(|t| {
                    serde_json::from_str(&t).map_err(|e| Error::Input(format!("report: {e}")))
                })
                .and_then(|v| summarize(&v));
            match parsed {
                Ok((checks, passed)) => {
                    print!("{}", render_checks(&checks));
                    ExitCode::from(if passed { 0 } else { 1 })
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
