use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cartanlab::checks::{run_check, transport_run, CheckOptions, ConnectionChoice};
use cartanlab::dynamics::DuplicateTerm;
use cartanlab::models::{load_definition, registry, Model};
use cartanlab::report::{emit, format_float, Format};
use cartanlab::transport::TransportResult;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Every required verdict held.
const EXIT_OK: u8 = 0;
/// At least one required verdict failed.
const EXIT_FAILED: u8 = 1;
/// The command could not run: bad model, unsupported check, I/O.
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "cartanlab", version, about = "Verify coframe geometry identities on registered models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the registered models.
    Models,
    /// Levi-Civita connection, curvature and oracle agreement.
    Curvature(CheckArgs),
    /// Teleparallel connection: flatness, compatibility, torsion values.
    Torsion(CheckArgs),
    /// Nonmetricity of the background connection with respect to the metric.
    Nonmetricity(CheckArgs),
    /// Strain relation between the background and Levi-Civita connections.
    Strain(CheckArgs),
    /// Ricci and Einstein tensors against the coordinate computation.
    Einstein(CheckArgs),
    /// Teleparallel field equations with the model source.
    #[command(name = "field-equations")]
    FieldEquations(CheckArgs),
    /// Teleparallel field equations against the Einstein 3-forms.
    Equivalence(CheckArgs),
    /// Teleparallel Lagrangian minus Einstein-Hilbert is exact.
    #[command(name = "lagrangian-decomposition")]
    LagrangianDecomposition(CheckArgs),
    /// Energy-momentum conservation and d² = δ² = 0 on random forms.
    Conservation(CheckArgs),
    /// Parallel transport and geodesic conserved quantities.
    Transport(TransportArgs),
    /// Holonomy around the model loop.
    Holonomy(CheckArgs),
    /// Quadrilateral torsion estimate and its convergence.
    #[command(name = "quad-torsion")]
    QuadTorsion(CheckArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Models => "models",
            Command::Curvature(_) => "curvature",
            Command::Torsion(_) => "torsion",
            Command::Nonmetricity(_) => "nonmetricity",
            Command::Strain(_) => "strain",
            Command::Einstein(_) => "einstein",
            Command::FieldEquations(_) => "field-equations",
            Command::Equivalence(_) => "equivalence",
            Command::LagrangianDecomposition(_) => "lagrangian-decomposition",
            Command::Conservation(_) => "conservation",
            Command::Transport(_) => "transport",
            Command::Holonomy(_) => "holonomy",
            Command::QuadTorsion(_) => "quad-torsion",
        }
    }
}

#[derive(Args)]
struct CheckArgs {
    /// Registry name or path to a model JSON file.
    #[arg(long)]
    model: String,
    /// Parameter override, e.g. `m=2`. Repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, env = "CARTANLAB_SEED", default_value_t = 42)]
    seed: u64,
    /// Zero-test tolerance; each check has its own default.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = DuplicateArg::Complete)]
    duplicate_term: DuplicateArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TransportArgs {
    #[command(flatten)]
    check: CheckArgs,
    /// Restrict to one connection; both are checked by default.
    #[arg(long, value_enum)]
    connection: Option<ConnectionArg>,
    /// Curve spec: `latitude:<theta0>`, `meridian:<phi0>:<a>:<b>`,
    /// `curve:<x0>,<x1>,...:<s0>:<s1>` or `polyline:x,y;x,y;...`.
    #[arg(long)]
    path: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    /// Initial vector in frame components, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    vector: Option<Vec<f64>>,
    /// Per-step CSV trace of the transported vector.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    CsvSummary,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConnectionArg {
    Lc,
    Nunes,
}

#[derive(Clone, Copy, ValueEnum)]
enum DuplicateArg {
    Verbatim,
    SingleCopy,
    Complete,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v: f64 = value.trim().parse().map_err(|_| format!("`{value}` is not a number"))?;
    Ok((name.trim().to_string(), v))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<u8, cartanlab::Error> {
    let name = cli.command.name();
    match cli.command {
        Command::Models => {
            let mut out = std::io::stdout().lock();
            for def in registry() {
                writeln!(out, "{}\t{}D\t{}", def.name, def.dim(), def.description).map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::Transport(t) => {
            let connection = t.connection.map(|c| match c {
                ConnectionArg::Lc => ConnectionChoice::Lc,
                ConnectionArg::Nunes => ConnectionChoice::Nunes,
            });
            let model = load(&t.check)?;
            let mut opts = options(&t.check);
            opts.connection = connection;
            opts.path = t.path;
            opts.steps = t.steps;
            opts.vector = t.vector;
            if let Some(path) = &t.trace {
                let run = transport_run(&model, connection.unwrap_or(ConnectionChoice::Lc), &opts)?;
                write_trace(path, &model, &run)?;
            }
            report(&model, name, &opts, &t.check)
        }
        Command::Curvature(a)
        | Command::Torsion(a)
        | Command::Nonmetricity(a)
        | Command::Strain(a)
        | Command::Einstein(a)
        | Command::FieldEquations(a)
        | Command::Equivalence(a)
        | Command::LagrangianDecomposition(a)
        | Command::Conservation(a)
        | Command::Holonomy(a)
        | Command::QuadTorsion(a) => {
            let model = load(&a)?;
            report(&model, name, &options(&a), &a)
        }
    }
}

fn io(e: impl std::fmt::Display) -> cartanlab::Error {
    cartanlab::Error::Io(e.to_string())
}

fn load(a: &CheckArgs) -> Result<Model, cartanlab::Error> {
    let def = load_definition(&a.model)?;
    let overrides: BTreeMap<String, f64> = a.params.iter().cloned().collect();
    Model::build(def, &overrides)
}

fn options(a: &CheckArgs) -> CheckOptions {
    CheckOptions {
        seed: a.seed,
        samples: a.samples,
        tolerance: a.tol,
        duplicate_term: match a.duplicate_term {
            DuplicateArg::Verbatim => DuplicateTerm::Verbatim,
            DuplicateArg::SingleCopy => DuplicateTerm::SingleCopy,
            DuplicateArg::Complete => DuplicateTerm::Complete,
        },
        ..CheckOptions::default()
    }
}

fn report(model: &Model, check: &str, opts: &CheckOptions, a: &CheckArgs) -> Result<u8, cartanlab::Error> {
    let report = run_check(model, check, opts)?;
    let format = match a.format {
        FormatArg::Json => Format::Json,
        FormatArg::CsvSummary => Format::CsvSummary,
    };
    let bytes = emit(&report, format);
    match &a.out {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| io(format!("{}: {e}", path.display())))?,
        None => std::io::stdout().lock().write_all(&bytes).map_err(io)?,
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_FAILED })
}

fn write_trace(path: &Path, model: &Model, run: &TransportResult) -> Result<(), cartanlab::Error> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io(format!("{}: {e}", path.display())))?;
    let n = model.dim();
    let mut header = vec!["s".to_string()];
    header.extend(model.chart().coords().iter().cloned());
    header.extend((0..n).map(|i| format!("v{i}")));
    header.extend(["g_vv".to_string(), "g_tv".to_string()]);
    w.write_record(&header).map_err(io)?;
    for (k, s) in run.s.iter().enumerate() {
        let mut row = vec![format_float(*s)];
        row.extend(run.points[k].iter().map(|x| format_float(*x)));
        row.extend(run.components[k].iter().map(|x| format_float(*x)));
        for trace in [&run.norm, &run.tangent_product] {
            row.push(trace.as_ref().map_or_else(String::new, |t| format_float(t[k])));
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(io)
}
