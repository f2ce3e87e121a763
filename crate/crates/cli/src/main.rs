//! Command-line surface of the localization toolkit: network generation,
//! single-network localization, expected-distance spot checks, benchmark
//! grids, and report rendering over saved results.

use std::error::Error;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hoploc_core::demn::{evaluate, monte_carlo_eval, CrossDomainCase, UpperBoundModel};
use hoploc_core::dvhop::baseline_placement;
use hoploc_core::experiment::{
    render_summary, rows_from_csv, rows_to_csv, run_experiment, summarize_rows, summary_json,
    ExperimentConfig, Method,
};
use hoploc_core::metrics::ales;
use hoploc_core::moga::{run, GaConfig, LocalizationProblem, ObjectiveMode};
use hoploc_core::net::{
    generate_network, hop_matrix, load_network, save_network, Area, Network, TopologyShape,
};
use hoploc_core::objectives::{distance_table, least_squares_placement};

#[derive(Parser)]
#[command(
    name = "hoploc",
    version,
    about = "Range-free localization toolkit: DV-Hop, expected-distance estimation, \
             and a two-objective evolutionary solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a node layout and save it as a network JSON file.
    Generate(GenerateArgs),
    /// Place the unknowns of a saved network with one method.
    Localize(LocalizeArgs),
    /// Compare the analytic expected distance against Monte Carlo sampling.
    DemnCheck(DemnCheckArgs),
    /// Run a benchmark grid described by a config file and save the CSV.
    Benchmark(BenchmarkArgs),
    /// Summarize a previously saved results CSV.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Topology mask: random, c, o, or x.
    #[arg(long, default_value = "random", value_parser = parse_shape)]
    shape: TopologyShape,
    /// Total node count.
    #[arg(long, default_value_t = 100)]
    nodes: usize,
    /// Anchor count (the first nodes of the layout).
    #[arg(long, default_value_t = 20)]
    anchors: usize,
    /// Communication radius in meters.
    #[arg(long, default_value_t = 25.0)]
    radius: f64,
    /// Deployment area width in meters.
    #[arg(long, default_value_t = 100.0)]
    width: f64,
    /// Deployment area height in meters.
    #[arg(long, default_value_t = 100.0)]
    height: f64,
    /// Layout seed; equal seeds give identical layouts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path for the network JSON.
    #[arg(long, default_value = "network.json")]
    out: PathBuf,
}

#[derive(Args)]
struct LocalizeArgs {
    /// Path to a network JSON produced by `generate`.
    #[arg(long)]
    network: PathBuf,
    /// Method: dvhop, demn-hop, demn-only, or hop-only.
    #[arg(long, default_value = "demn-hop", value_parser = parse_method)]
    method: Method,
    /// Solver population size (even).
    #[arg(long, default_value_t = 20)]
    pop: usize,
    /// Solver generations.
    #[arg(long, default_value_t = 500)]
    iters: usize,
    /// Crossover probability per mating pair.
    #[arg(long, default_value_t = 0.9)]
    pc: f64,
    /// Mutation probability per gene.
    #[arg(long, default_value_t = 0.1)]
    pm: f64,
    /// Solver seed; equal seeds give identical runs.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seed one individual with the least-squares baseline placement.
    #[arg(long)]
    warm_start: bool,
    /// Optional path for the placement as JSON `[[x, y], ...]`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemnCheckArgs {
    /// Distance between the two anchors, meters.
    #[arg(long)]
    d: f64,
    /// Communication radius R, meters.
    #[arg(long)]
    radius: f64,
    /// Upper bound on the m-hop reach; defaults to m · radius.
    #[arg(long)]
    ub: Option<f64>,
    /// Hop count from the far anchor: 1 or 2.
    #[arg(long, default_value_t = 1)]
    m: u32,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 1_000_000)]
    mc_samples: u64,
    /// Monte Carlo seed.
    #[arg(long, default_value_t = 1)]
    mc_seed: u64,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Benchmark config file (TOML mirroring the experiment config).
    #[arg(long, required_unless_present = "emit_default_config")]
    config: Option<PathBuf>,
    /// Output path for the per-repeat results CSV.
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Record wall-clock seconds per repeat (breaks byte reproducibility).
    #[arg(long)]
    timing: bool,
    /// Print a default config file to stdout and exit.
    #[arg(long)]
    emit_default_config: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Results CSV produced by `benchmark`.
    #[arg(long)]
    csv: PathBuf,
    /// Emit the per-cell summary as JSON instead of a text table.
    #[arg(long)]
    json: bool,
}

fn parse_shape(s: &str) -> Result<TopologyShape, String> {
    TopologyShape::from_name(s).map_err(|e| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    Method::from_name(s)
        .ok_or_else(|| format!("unknown method {s:?} (expected dvhop, demn-hop, demn-only, or hop-only)"))
}

/// Error wrapper for messages raised directly by the CLI layer.
#[derive(Debug)]
struct CliError(String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Error for CliError {}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => generate(args),
        Command::Localize(args) => localize(args),
        Command::DemnCheck(args) => demn_check(args),
        Command::Benchmark(args) => benchmark(args),
        Command::Report(args) => report(args),
    };
    if let Err(e) = result {
        // A closed pipe (e.g. piping into `head`) is a normal way for the
        // reader to stop early, not a failure.
        if e.downcast_ref::<io::Error>().map(|io| io.kind()) == Some(io::ErrorKind::BrokenPipe) {
            return;
        }
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn generate(args: GenerateArgs) -> Result<(), Box<dyn Error>> {
    let area = Area::new(args.width, args.height);
    let network = generate_network(args.shape, args.nodes, args.anchors, args.radius, area, args.seed)?;
    save_network(&network, &args.out)?;
    let hops = hop_matrix(&network);
    let reached = (network.n_anchors()..network.len())
        .filter(|&k| (0..network.n_anchors()).any(|i| hops.get(i, k).is_some()))
        .count();
    writeln!(
        io::stdout(),
        "wrote {}: shape {}, {} nodes ({} anchors), radius {} m, area {} x {} m, seed {}; {}/{} unknowns reach an anchor",
        args.out.display(),
        args.shape.name(),
        network.len(),
        network.n_anchors(),
        network.radius(),
        args.width,
        args.height,
        args.seed,
        reached,
        network.n_unknowns(),
    )?;
    Ok(())
}

fn localize(args: LocalizeArgs) -> Result<(), Box<dyn Error>> {
    let network = load_network(&args.network)?;
    let hops = hop_matrix(&network);
    let ga = GaConfig {
        population_size: args.pop,
        max_iter: args.iters,
        pc: args.pc,
        pm: args.pm,
        seed: args.seed,
        ..GaConfig::default()
    };
    let ub = UpperBoundModel::HopTimesRadius;
    let (placement, history) = match args.method {
        Method::DvHop => (baseline_placement(&network, &hops), None),
        Method::DemnOnly => {
            let table = distance_table(&network, &hops, Some(&ub))?;
            (least_squares_placement(&table, &network), None)
        }
        Method::DemnHop | Method::HopOnly => {
            let demn = matches!(args.method, Method::DemnHop).then_some(&ub);
            let table = distance_table(&network, &hops, demn)?;
            let mut problem = LocalizationProblem::new(&network, &hops, &table)
                .with_mode(ObjectiveMode::DistanceAndHops);
            if args.warm_start {
                problem = problem.with_warm_start(baseline_placement(&network, &hops));
            }
            let result = run(problem, ga)?;
            (result.chosen.placement, Some(result.history))
        }
    };
    print_placement(&network, &placement, history.as_deref(), &args)?;
    if let Some(out) = &args.out {
        let coords: Vec<(f64, f64)> = placement.iter().map(|p| (p.x, p.y)).collect();
        fs::write(out, serde_json::to_string_pretty(&coords)?)?;
    }
    Ok(())
}

fn print_placement(
    network: &Network,
    placement: &[hoploc_core::net::Point],
    history: Option<&[(f64, f64)]>,
    args: &LocalizeArgs,
) -> io::Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(
        out,
        "# network {}: {} nodes ({} anchors), radius {} m",
        args.network.display(),
        network.len(),
        network.n_anchors(),
        network.radius(),
    )?;
    match args.method {
        Method::DvHop | Method::DemnOnly => {
            writeln!(out, "# method {} (least squares)", args.method)?
        }
        _ => writeln!(
            out,
            "# method {}: pop {}, iters {}, pc {}, pm {}, seed {}, warm start {}",
            args.method,
            args.pop,
            args.iters,
            args.pc,
            args.pm,
            args.seed,
            if args.warm_start { "on" } else { "off" },
        )?,
    }
    writeln!(out, "node,x,y,err_m")?;
    let truth = network.unknown_positions();
    for (u, p) in placement.iter().enumerate() {
        writeln!(
            out,
            "{},{:.3},{:.3},{:.3}",
            network.n_anchors() + u,
            p.x,
            p.y,
            p.dist(truth[u]),
        )?;
    }
    if let Some(history) = history {
        writeln!(out, "# history gen,min_f1,min_f2")?;
        for (gen, (f1, f2)) in history.iter().enumerate() {
            writeln!(out, "{gen},{f1},{f2}")?;
        }
    }
    writeln!(out, "# ales {:.2}%", ales(placement, truth, network.radius()))
}

fn demn_check(args: DemnCheckArgs) -> Result<(), Box<dyn Error>> {
    let ub = args.ub.unwrap_or(args.m as f64 * args.radius);
    let case = CrossDomainCase::new(args.d, args.radius, ub, args.m)?;
    let analytic = evaluate(&case)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(
        out,
        "case: d {} m, radius {} m, ub {} m, m {}",
        args.d, args.radius, ub, args.m
    )?;
    writeln!(
        out,
        "analytic:    expected {:.6} m | areas D1 {:.6} D2 {:.6} D3 {:.6} | x* {:.6}",
        analytic.expected, analytic.areas.d1, analytic.areas.d2, analytic.areas.d3, analytic.x_cross,
    )?;
    let mc = monte_carlo_eval(&case, args.mc_samples, args.mc_seed)?;
    let gap = (analytic.expected - mc.expected).abs() / analytic.expected;
    writeln!(
        out,
        "monte carlo: expected {:.6} m | areas D1 {:.6} D2 {:.6} D3 {:.6} | {} samples, {} accepted, std error {:.6}",
        mc.expected, mc.areas.d1, mc.areas.d2, mc.areas.d3, args.mc_samples, mc.accepted, mc.std_error,
    )?;
    writeln!(out, "relative gap: {:.4}%", 100.0 * gap)?;
    Ok(())
}

fn benchmark(args: BenchmarkArgs) -> Result<(), Box<dyn Error>> {
    if args.emit_default_config {
        write!(io::stdout(), "{}", ExperimentConfig::default().to_toml())?;
        return Ok(());
    }
    let path = args.config.as_ref().expect("clap enforces --config");
    let text = fs::read_to_string(path)
        .map_err(|e| CliError(format!("reading {}: {e}", path.display())))?;
    let mut config = ExperimentConfig::from_toml(&text)?;
    if args.timing {
        config.timing = true;
    }
    let report = run_experiment(&config)?;
    fs::write(&args.out, rows_to_csv(&report.rows))?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    write!(out, "{}", render_summary(&report.cells))?;
    writeln!(out, "wrote {} rows to {}", report.rows.len(), args.out.display())?;
    Ok(())
}

fn report(args: ReportArgs) -> Result<(), Box<dyn Error>> {
    let text = fs::read_to_string(&args.csv)
        .map_err(|e| CliError(format!("reading {}: {e}", args.csv.display())))?;
    let rows = rows_from_csv(&text)?;
    let cells = summarize_rows(&rows);
    if args.json {
        writeln!(io::stdout(), "{}", summary_json(&cells))?;
    } else {
        write!(io::stdout(), "{}", render_summary(&cells))?;
    }
    Ok(())
}
