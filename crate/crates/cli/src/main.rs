use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use uvartest::simlab::{permutation_pvalue, preset, run_scenario, ScenarioSpec, PRESET_NAMES};
use uvartest::{f_test, u_test, Error, SeedSpec};
use uvartest_cli::{parse_input, Report};

#[derive(Parser)]
#[command(
    name = "uvartest",
    version,
    about = "Tests for the between-treatment variance component"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a test on long-form `treatment,value` CSV data.
    Test {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::U)]
        method: MethodArg,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Permutations for `--method perm`.
        #[arg(long, default_value_t = 999)]
        n_perm: usize,
        #[arg(long, env = "UVARTEST_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Estimate rejection rates for a preset or a JSON scenario file.
    Simulate {
        /// Preset name or path to a JSON scenario.
        scenario: String,
        #[arg(long)]
        replicates: Option<u64>,
        #[arg(long, env = "UVARTEST_SEED")]
        seed: Option<u64>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    U,
    F,
    Both,
    Perm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Md,
}

enum Failure {
    Degenerate(String),
    Input(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn classify(e: Error) -> Failure {
    match e {
        Error::DegenerateWithinVariance => Failure::Degenerate(e.to_string()),
        other => Failure::Input(other.into()),
    }
}

fn cmd_test(path: &Path, method: MethodArg, alpha: f64, n_perm: usize, seed: u64) -> Result<(), Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let input = parse_input(&text).with_context(|| format!("parsing {}", path.display()))?;
    let ds = &input.dataset;

    let results = match method {
        MethodArg::U => vec![u_test(ds, alpha)],
        MethodArg::F => vec![f_test(ds, alpha)],
        MethodArg::Both => vec![u_test(ds, alpha), f_test(ds, alpha)],
        MethodArg::Perm => vec![permutation_pvalue(ds, alpha, n_perm, SeedSpec::from_master(seed))],
    };
    let mut lines = Vec::new();
    for r in results {
        let report = Report::new(ds, r.map_err(classify)?);
        lines.push(serde_json::to_string(&report).context("encoding report")?);
    }
    println!("{}", lines.join("\n"));
    Ok(())
}

fn load_scenario(scenario: &str) -> anyhow::Result<ScenarioSpec> {
    if PRESET_NAMES.contains(&scenario) {
        return Ok(preset(scenario)?);
    }
    let path = Path::new(scenario);
    if !path.is_file() {
        anyhow::bail!(
            "unknown preset {scenario:?} (and no such file); presets: {}",
            PRESET_NAMES.join(", ")
        );
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec: ScenarioSpec =
        serde_json::from_str(&text).with_context(|| format!("parsing scenario {}", path.display()))?;
    spec.validate()?;
    Ok(spec)
}

fn cmd_simulate(
    scenario: &str,
    replicates: Option<u64>,
    seed: Option<u64>,
    out: Option<&Path>,
    format: Format,
) -> Result<(), Failure> {
    let mut spec = load_scenario(scenario)?;
    if let Some(r) = replicates {
        spec.replicates = r;
    }
    if let Some(s) = seed {
        spec.seed = SeedSpec::from_master(s);
    }
    let table = run_scenario(&spec).map_err(classify)?;

    for c in &table.cells {
        eprintln!(
            "{} k={} {} sigma_b2={} {}: {:.2}% (se {:.2})",
            c.scenario,
            c.k,
            c.design,
            c.sigma_b2,
            c.method,
            100.0 * c.rate,
            100.0 * c.se
        );
    }
    if table.degenerate_replicates > 0 {
        eprintln!(
            "{} degenerate replicate(s) counted as non-rejections",
            table.degenerate_replicates
        );
    }

    let body = match format {
        Format::Csv => table.to_csv_string(),
        Format::Md => table.to_markdown(),
    };
    match out {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .context("writing to stdout")?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Test {
            path,
            method,
            alpha,
            n_perm,
            seed,
        } => cmd_test(&path, method, alpha, n_perm, seed),
        Command::Simulate {
            scenario,
            replicates,
            seed,
            out,
            format,
        } => cmd_simulate(&scenario, replicates, seed, out.as_deref(), format),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Degenerate(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
