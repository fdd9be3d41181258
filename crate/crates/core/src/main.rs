use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use entsus::harness::{
    run_sweep, verify, write_rows, write_two_column, Format, Header, Overrides, Quantity, RunOptions, SweepPlan,
    VerifyOptions,
};
use entsus::{Error, Result};

#[derive(Parser)]
#[command(name = "entsus", version, about = "Entanglement and fidelity susceptibilities by exact numerics")]
struct Cli {
    /// TOML plan; each subcommand except `sweep` has a built-in default.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Fill the wall_time_ms column (output is then no longer reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// χ_E, χ_F and the bound chain for one spin chain.
    Chi,
    /// Run an arbitrary plan given by --config.
    Sweep,
    /// Dimerised fermion chain: polar-map χ_F and its bounds.
    Fermion,
    /// Pinned harmonic chain: Gaussian fidelity, χ_F and its bounds.
    Boson,
    /// Tight-binding χ_E over sizes with the logarithmic scaling fit.
    Tightbinding {
        /// Two-column `ln L  χ_E` file; defaults to `<out>.lnL.dat` when --out is set.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Energy cumulants over a β grid and their large-β fits.
    Cumulants,
    /// Property run over seeded corpora; writes a JSON report.
    Verify,
}

const CHI_PLAN: &str = r#"
quantities = ["chi_e", "chi_f", "bounds", "s2", "fidelity"]
sizes = [10]
lambdas = [0.01]
[spin]
model = { name = "tfim", h = 2.0 }
"#;

const FERMION_PLAN: &str = r#"
sizes = [64, 128, 256, 512, 1024]
[fermion]
model = "dimerized"
t1 = 1.0
t2 = 0.5
"#;

const BOSON_PLAN: &str = r#"
sizes = [16, 32, 64, 128, 256]
[boson]
spring = 1.0
mass_sq = 1.0
"#;

const TIGHT_BINDING_PLAN: &str = r#"
sizes = [64, 128, 256, 512, 1024, 2048, 4096]
[fermion]
model = "tight_binding"
dim = 1
"#;

const CUMULANT_PLAN: &str = r#"
sizes = [6]
[spin]
model = { name = "tfim", h = 2.0 }
beta_gap = [10.0, 20.0]
beta_points = 11
"#;

impl Command {
    /// Built-in plan, required family and quantities used when the file has none.
    fn defaults(&self) -> (Option<&'static str>, Option<&'static str>, &'static [Quantity]) {
        use Quantity::*;
        match self {
            Command::Chi => (Some(CHI_PLAN), Some("spin"), &[ChiE, ChiF, Bounds]),
            Command::Sweep => (None, None, &[]),
            Command::Fermion => (Some(FERMION_PLAN), Some("fermion"), &[ChiF, Bounds]),
            Command::Boson => (Some(BOSON_PLAN), Some("boson"), &[ChiF, Bounds]),
            Command::Tightbinding { .. } => (Some(TIGHT_BINDING_PLAN), Some("fermion"), &[TightBinding, ScalingFit]),
            Command::Cumulants => (Some(CUMULANT_PLAN), Some("spin"), &[Cumulants]),
            Command::Verify => (None, None, &[]),
        }
    }
}

fn load_plan(cli: &Cli) -> Result<SweepPlan> {
    let (builtin, family, quantities) = cli.command.defaults();
    let text = match (&cli.config, builtin) {
        (Some(path), _) => std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?,
        (None, Some(text)) => text.to_string(),
        (None, None) => return Err(Error::config("--config", "this subcommand requires a plan file")),
    };
    let overrides = Overrides {
        seed: cli.seed,
        threads: cli.threads,
        default_quantities: (!quantities.is_empty()).then_some(quantities),
    };
    let plan = SweepPlan::from_toml_with(&text, &overrides)?;
    if let Some(expected) = family {
        if plan.family.name() != expected {
            return Err(Error::config(
                "family",
                format!("this subcommand needs a [{expected}] plan, got [{}]", plan.family.name()),
            ));
        }
    }
    Ok(plan)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn plot_path(cli: &Cli, explicit: Option<&PathBuf>) -> Option<PathBuf> {
    explicit.cloned().or_else(|| {
        cli.out.as_ref().map(|o| {
            let mut name = o.file_stem().unwrap_or_default().to_os_string();
            name.push(".lnL.dat");
            o.with_file_name(name)
        })
    })
}

fn run_verify(cli: &Cli) -> Result<bool> {
    if cli.config.is_some() {
        return Err(Error::config("--config", "verify runs a built-in corpus and takes no plan"));
    }
    let opts = VerifyOptions {
        seed: cli.seed.unwrap_or(0),
        threads: cli.threads.unwrap_or(1).max(1),
        ..VerifyOptions::default()
    };
    let report = verify(&opts)?;
    let mut out = output(cli.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    out.flush()?;
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("FAIL {} worst={:e} tolerance={:e}", c.name, c.worst, c.tolerance);
    }
    Ok(report.passed)
}

fn run(cli: &Cli) -> Result<bool> {
    if let Command::Verify = cli.command {
        return run_verify(cli);
    }
    let plan = load_plan(cli)?;
    let rows = run_sweep(
        &plan,
        &RunOptions {
            timing: cli.timing,
            ..RunOptions::default()
        },
    )?;
    let header = Header::new(plan.config_hash(), plan.seed);
    let mut out = output(cli.out.as_deref())?;
    write_rows(&mut out, &header, &rows, cli.format.into())?;
    if let Command::Tightbinding { plot } = &cli.command {
        if let Some(path) = plot_path(cli, plot.as_ref()) {
            let points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.quantity == "chi_e")
                .filter_map(|r| Some(((r.l? as f64).ln(), r.value?)))
                .collect();
            write_two_column(BufWriter::new(File::create(path)?), "ln(L) chi_e", &points)?;
        }
    }
    Ok(rows.iter().all(|r| r.status == "ok"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
