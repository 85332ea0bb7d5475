//! `netmimo` command-line driver.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use netmimo::evaluation::UniformSpread;
use netmimo::experiment::{
    allocations_to_csv, channel_csv, report_sizes, run_experiment, sizes_to_csv, ExperimentConfig, LayoutSpec,
    PolicyConfig,
};
use netmimo::oracle::{checks_to_csv, checks_to_text, verification_suite, VerifyOptions};
use netmimo::rng::{substream, Purpose};
use netmimo::topology::{cooperation_radius, data_sharing_sets, NodeLayout};
use netmimo::Error;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_REJECTION: u8 = 3;
const EXIT_ERROR: u8 = 4;

#[derive(Parser)]
#[command(
    name = "netmimo",
    version,
    about = "Distributed CSIT allocation experiments for network MIMO"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML config and/or flags.
    Run(ConfigArgs),
    /// Print allocation sizes and ratios to the conventional allocation.
    Sizes(ConfigArgs),
    /// Run the numerical verification suite.
    Verify(VerifyArgs),
    /// Emit or inspect a node layout.
    Layout(LayoutArgs),
    /// 4x4 grid, gamma 0.6, perfect/distance/uniform/cluster.
    #[command(name = "fig1-desk")]
    Fig1Desk(PresetArgs),
    /// 8 random nodes, gamma 0.7, three alpha values.
    #[command(name = "fig2-desk")]
    Fig2Desk(PresetArgs),
    /// 6x6 grid at 1000 trials (slow).
    #[command(name = "fig1-full")]
    Fig1Full(PresetArgs),
    /// 15 random nodes at 1000 trials (slow).
    #[command(name = "fig2-full")]
    Fig2Full(PresetArgs),
}

#[derive(Args, Default)]
struct ConfigArgs {
    /// TOML config, or a metadata sidecar from an earlier run.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Comma-separated SNR points in dB.
    #[arg(long, value_delimiter = ',')]
    snr_db: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    /// Square grid of this side length.
    #[arg(long, conflicts_with_all = ["random", "layout_file"])]
    grid: Option<usize>,
    /// Number of uniformly placed nodes; see --side.
    #[arg(long, conflicts_with = "layout_file")]
    random: Option<usize>,
    /// Side of the square for --random.
    #[arg(long, default_value_t = 4.0)]
    side: f64,
    #[arg(long)]
    layout_file: Option<PathBuf>,
    /// Comma-separated policy names.
    #[arg(long, value_delimiter = ',')]
    policies: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[arg(long)]
    cluster_size: Option<usize>,
    /// Spread the uniform budget over conventional-support entries only.
    #[arg(long)]
    uniform_on_support: bool,
    #[arg(long)]
    fit_points: Option<usize>,
    #[arg(long)]
    condition_threshold: Option<f64>,
    #[arg(long)]
    data_mask: bool,
    #[arg(long)]
    workers: Option<usize>,
    /// Output prefix for `<prefix>.csv` and `<prefix>.meta.toml`.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    diagnostics: DiagnosticArgs,
}

#[derive(Args, Default)]
struct DiagnosticArgs {
    /// Write every finite allocation as `policy,alpha,snr_db,j,k,i,bits` rows.
    #[arg(long)]
    export_allocations: Option<PathBuf>,
    /// Write one channel draw at the first SNR point as `k,i,re,im` rows.
    #[arg(long)]
    dump_channel: Option<PathBuf>,
    /// Trial index for --dump-channel.
    #[arg(long, default_value_t = 0)]
    dump_trial: usize,
}

#[derive(Args)]
struct PresetArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Channel draws per SNR point for slope checks.
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long, default_value_t = 1000)]
    resolvent_pairs: usize,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct LayoutArgs {
    /// Inspect an existing layout file instead of generating one.
    #[arg(long, conflicts_with_all = ["grid", "random"])]
    input: Option<PathBuf>,
    #[arg(long, conflicts_with = "random")]
    grid: Option<usize>,
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 4.0)]
    side: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Report cooperation radius and data-sharing set sizes for this gamma.
    #[arg(long)]
    gamma: Option<f64>,
    /// Write the layout here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn blank_config() -> ExperimentConfig {
    ExperimentConfig {
        seed: 1,
        gamma: 0.6,
        snr_db: (0..=8).map(|i| 10.0 * i as f64).collect(),
        trials: 500,
        fit_points: 4,
        condition_threshold: netmimo::precoding::DEFAULT_CONDITION_THRESHOLD,
        max_rejection_rate: netmimo::evaluation::DEFAULT_MAX_REJECTION_RATE,
        data_mask: false,
        workers: None,
        output: None,
        layout: LayoutSpec::Grid { side: 4 },
        policies: PolicyConfig {
            names: vec!["perfect".into(), "distance".into()],
            alphas: vec![1.0],
            cluster_size: 4,
            uniform_spread: UniformSpread::All,
        },
    }
}

fn write_diagnostics(config: &ExperimentConfig, d: &DiagnosticArgs) -> Result<(), Error> {
    if let Some(path) = &d.export_allocations {
        fs::write(path, allocations_to_csv(config)?)?;
        eprintln!("allocations: {}", path.display());
    }
    if let Some(path) = &d.dump_channel {
        fs::write(path, channel_csv(config, d.dump_trial)?)?;
        eprintln!("channel: {}", path.display());
    }
    Ok(())
}

fn configure(mut a: ConfigArgs) -> Result<ExperimentConfig, Error> {
    let diagnostics = std::mem::take(&mut a.diagnostics);
    let config = build_config(a)?;
    write_diagnostics(&config, &diagnostics)?;
    Ok(config)
}

fn build_config(a: ConfigArgs) -> Result<ExperimentConfig, Error> {
    let mut c = match &a.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => blank_config(),
    };
    if let Some(v) = a.seed {
        c.seed = v;
    }
    if let Some(v) = a.gamma {
        c.gamma = v;
    }
    if let Some(v) = a.snr_db {
        c.snr_db = v;
    }
    if let Some(v) = a.trials {
        c.trials = v;
    }
    if let Some(side) = a.grid {
        c.layout = LayoutSpec::Grid { side };
    }
    if let Some(k) = a.random {
        c.layout = LayoutSpec::Random {
            k,
            side: a.side,
            seed: None,
        };
    }
    if let Some(path) = a.layout_file {
        c.layout = LayoutSpec::File { path };
    }
    if let Some(v) = a.policies {
        c.policies.names = v;
    }
    if let Some(v) = a.alphas {
        c.policies.alphas = v;
    }
    if let Some(v) = a.cluster_size {
        c.policies.cluster_size = v;
    }
    if a.uniform_on_support {
        c.policies.uniform_spread = UniformSpread::ConventionalSupport;
    }
    if let Some(v) = a.fit_points {
        c.fit_points = v;
    }
    if let Some(v) = a.condition_threshold {
        c.condition_threshold = v;
    }
    if a.data_mask {
        c.data_mask = true;
    }
    if a.workers.is_some() {
        c.workers = a.workers;
    }
    if a.output.is_some() {
        c.output = a.output;
    }
    Ok(c)
}

fn run(config: ExperimentConfig) -> Result<ExitCode, Error> {
    let result = run_experiment(&config)?;
    let prefix = config.output.clone().unwrap_or_else(|| PathBuf::from("netmimo-run"));
    let (csv, meta) = result.write(&prefix)?;
    println!("rates:    {}", csv.display());
    println!("metadata: {}", meta.display());
    println!(
        "{:<14} {:>6} {:>10} {:>10} {:>10}",
        "policy", "alpha", "avg slope", "min user", "max user"
    );
    for row in result.dof_rows() {
        println!(
            "{:<14} {:>6} {:>10.3} {:>10.3} {:>10.3}",
            row.policy,
            row.alpha.map(|a| a.to_string()).unwrap_or_default(),
            row.avg_slope,
            row.min_user_slope,
            row.max_user_slope
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn preset(name: &str, a: PresetArgs) -> Result<ExitCode, Error> {
    let mut c = ExperimentConfig::preset(name).expect("known preset");
    if let Some(v) = a.seed {
        c.seed = v;
    }
    if let Some(v) = a.trials {
        c.trials = v;
    }
    if a.workers.is_some() {
        c.workers = a.workers;
    }
    if a.output.is_some() {
        c.output = a.output;
    }
    run(c)
}

fn sizes(config: ExperimentConfig) -> Result<ExitCode, Error> {
    let table = sizes_to_csv(&report_sizes(&config)?);
    match &config.output {
        Some(prefix) => {
            let mut path = prefix.as_os_str().to_owned();
            path.push(".sizes.csv");
            fs::write(&path, table)?;
            println!("sizes: {}", PathBuf::from(path).display());
        }
        None => print!("{table}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(a: VerifyArgs) -> Result<ExitCode, Error> {
    let rows = verification_suite(VerifyOptions {
        seed: a.seed,
        trials: a.trials,
        resolvent_pairs: a.resolvent_pairs,
    })?;
    print!("{}", checks_to_text(&rows));
    if let Some(path) = a.csv {
        fs::write(path, checks_to_csv(&rows))?;
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    println!("{} of {} checks passed", rows.len() - failed, rows.len());
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY_FAILED)
    })
}

fn layout(a: LayoutArgs) -> Result<ExitCode, Error> {
    let layout = if let Some(path) = &a.input {
        NodeLayout::read(path)?
    } else if let Some(k) = a.random {
        NodeLayout::uniform_random(k, a.side, &mut substream(a.seed, Purpose::Layout, 0, 0))?
    } else {
        NodeLayout::grid(a.grid.unwrap_or(4))?
    };
    let d = layout.distances();
    let k = layout.len();
    let min = (0..k)
        .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| d[(i, j)])
        .fold(f64::INFINITY, f64::min);
    eprintln!("nodes: {k}");
    if k > 1 {
        eprintln!("min distance: {min:.4}");
    }
    if let Some(side) = layout.grid_side() {
        eprintln!("grid side: {side}");
    }
    if let Some(gamma) = a.gamma {
        match cooperation_radius(gamma) {
            Ok(d0) => eprintln!("cooperation radius: {d0:.4}"),
            Err(_) => eprintln!("cooperation radius: unbounded"),
        }
        let sizes: Vec<usize> = data_sharing_sets(&layout, gamma)?.iter().map(Vec::len).collect();
        eprintln!("data-sharing set sizes: {sizes:?}");
    }
    match (&a.output, &a.input) {
        (Some(path), _) => layout.write(path)?,
        (None, None) => print!("{}", layout.to_text()),
        (None, Some(_)) => {}
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => configure(a).and_then(run),
        Command::Sizes(a) => configure(a).and_then(sizes),
        Command::Verify(a) => verify(a),
        Command::Layout(a) => layout(a),
        Command::Fig1Desk(a) => preset("fig1-desk", a),
        Command::Fig2Desk(a) => preset("fig2-desk", a),
        Command::Fig1Full(a) => preset("fig1-full", a),
        Command::Fig2Full(a) => preset("fig2-full", a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::RejectionRateExceeded { .. } => EXIT_REJECTION,
                _ => EXIT_ERROR,
            })
        }
    }
}
