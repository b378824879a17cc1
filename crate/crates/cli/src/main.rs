use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use densecluster::certificate::{certify, check_theorem, converse_gap, CertificateReport};
use densecluster::harness::{
    read_config, resolve_workers, run_sweep, write_results, RunConfig, SweepConfig,
};
use densecluster::model::io::{read_edge_list, write_edge_list, EdgeListGraph};
use densecluster::model::{complement, generate};
use densecluster::recovery::{assess, extract_clusters, round_region, DEFAULT_THRESHOLD};
use densecluster::solvers::{solve_blind, solve_intelligent, Decomposition, LambdaMode, Method};
use densecluster::{rng_from_seed, ClusterLayout, PlantedGraph, SymMatrix};

/// Planted dense-cluster recovery by low-rank plus sparse decomposition.
#[derive(Parser, Debug)]
#[command(name = "densecluster", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Random seed; overrides `base_seed` from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path (a directory for `solve`); standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for `sweep`; overrides DENSECLUSTER_WORKERS.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a graph from the cluster model and write it as an edge list.
    Generate {
        /// Write the complement graph instead (flips every off-diagonal entry).
        #[arg(long)]
        complement: bool,
    },
    /// Solve one decomposition program on a graph file.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "blind")]
        method: Method,
        /// Size of the planted region; overrides the config's region size.
        #[arg(long)]
        region_size: Option<f64>,
    },
    /// Build and check the dual certificate for a graph.
    Certify {
        /// Graph file; drawn from the config when omitted.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, default_value = "intelligent")]
        method: Method,
        /// Emit a CSV header and row instead of `key = value` lines.
        #[arg(long)]
        csv: bool,
    },
    /// Compare the planted blind solution with the converse construction.
    Converse {
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Run a phase-transition sweep and write its CSV.
    Sweep,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("densecluster: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.global.config {
        Some(path) => read_config(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Generate { complement } => cmd_generate(&cli.global, &config, complement),
        Command::Solve {
            graph,
            method,
            region_size,
        } => cmd_solve(&cli.global, &config, &graph, method, region_size),
        Command::Certify { graph, method, csv } => {
            cmd_certify(&cli.global, &config, graph.as_deref(), method, csv)
        }
        Command::Converse { graph } => cmd_converse(&cli.global, &config, graph.as_deref()),
        Command::Sweep => cmd_sweep(&cli.global, &config),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn seed(global: &Global, config: &RunConfig) -> u64 {
    global.seed.or(config.base_seed).unwrap_or(0)
}

fn draw_graph(global: &Global, config: &RunConfig) -> Result<PlantedGraph> {
    if global.config.is_none() {
        bail!("no graph given; pass --graph <file> or --config <file> with n, k, p and q");
    }
    let layout = config.layout()?;
    let params = config.params()?;
    let seed = seed(global, config);
    Ok(generate(&layout, &params, seed, &mut rng_from_seed(seed))?)
}

fn read_graph(path: &Path) -> Result<EdgeListGraph> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(read_edge_list(
        BufReader::new(file),
        &path.display().to_string(),
    )?)
}

fn planted_graph(global: &Global, config: &RunConfig, path: Option<&Path>) -> Result<PlantedGraph> {
    match path {
        Some(p) => Ok(read_graph(p)?.into_planted()?),
        None => draw_graph(global, config),
    }
}

fn cmd_generate(global: &Global, config: &RunConfig, flip: bool) -> Result<()> {
    let mut graph = draw_graph(global, config)?;
    if flip {
        graph = complement(&graph);
    }
    let mut out = output(global.out.as_deref())?;
    write_edge_list(&graph, &mut out)?;
    out.flush()?;
    Ok(())
}

fn write_matrix(path: &Path, m: &SymMatrix) -> Result<()> {
    let mut out = output(Some(path))?;
    let n = m.order();
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| m.get(i, j).to_string()).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    out.flush()?;
    Ok(())
}

fn solve_report(
    dec: &Decomposition,
    method: Method,
    lambda: f64,
    planted: &ClusterLayout,
) -> String {
    let mut lines = vec![
        format!("method = {method}"),
        format!("lambda = {lambda}"),
        format!("objective = {}", dec.objective),
        format!("iterations = {}", dec.iterations),
        format!("converged = {}", dec.converged),
        format!("primal_residual = {}", dec.primal_residual),
        format!("dual_residual = {}", dec.dual_residual),
        format!("duality_gap = {}", dec.duality_gap),
    ];
    let clusters = |layout: &ClusterLayout| {
        layout
            .clusters()
            .iter()
            .map(|c| c.iter().map(usize::to_string).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join(" | ")
    };
    if planted.t() > 0 {
        let outcome = assess(&dec.low_rank, planted, DEFAULT_THRESHOLD);
        lines.push(format!("exact = {}", outcome.exact));
        lines.push(format!("mismatch_count = {}", outcome.mismatch_count));
        lines.push(format!("ambiguous = {}", outcome.ambiguous));
        if let Some(found) = &outcome.recovered {
            lines.push(format!("recovered = {}", clusters(found)));
        }
    } else {
        match extract_clusters(&round_region(&dec.low_rank, DEFAULT_THRESHOLD)) {
            Ok(found) => lines.push(format!("recovered = {}", clusters(&found))),
            Err(e) => lines.push(format!("recovered = none ({e})")),
        }
    }
    lines.join("\n") + "\n"
}

fn cmd_solve(
    global: &Global,
    config: &RunConfig,
    path: &Path,
    method: Method,
    region_size: Option<f64>,
) -> Result<()> {
    let graph = read_graph(path)?;
    let n = graph.layout.n();
    let adjacency = SymMatrix::indicator(&graph.support);
    let lambda = config.lambda_for(n, LambdaMode::Simulation);
    let solver = config.solver_config(lambda);
    let dec = match method {
        Method::Blind => solve_blind(&adjacency, &solver)?,
        Method::Intelligent => {
            let region = match region_size {
                Some(v) => v,
                None => {
                    let planted = (graph.layout.t() > 0).then_some(&graph.layout);
                    config.region_size_mode()?.resolve(planted)?
                }
            };
            solve_intelligent(&adjacency, region, &solver)?
        }
    };
    let report = solve_report(&dec, method, lambda, &graph.layout);
    if let Some(dir) = &global.out {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        write_matrix(&dir.join("low_rank.txt"), &dec.low_rank)?;
        write_matrix(&dir.join("sparse.txt"), &dec.sparse)?;
        std::fs::write(dir.join("outcome.txt"), &report)?;
    }
    print!("{report}");
    Ok(())
}

fn cmd_certify(
    global: &Global,
    config: &RunConfig,
    path: Option<&Path>,
    method: Method,
    csv: bool,
) -> Result<()> {
    let graph = planted_graph(global, config, path)?;
    let default_mode = match method {
        Method::Intelligent => LambdaMode::IntelligentTheorem,
        Method::Blind => LambdaMode::BlindTheorem,
    };
    let lambda = config.lambda_for(graph.n(), default_mode);
    let samples = config.samples.unwrap_or(1000);
    let report = certify(&graph, lambda, method, samples, seed(global, config))?;
    let theorem = check_theorem(graph.layout(), graph.params(), method);
    let mut out = output(global.out.as_deref())?;
    if csv {
        writeln!(out, "{}", CertificateReport::CSV_HEADER)?;
        writeln!(out, "{}", report.to_csv_row())?;
    } else {
        write!(out, "{}", report.to_key_value())?;
        writeln!(out, "theorem_guarantee = {}", theorem.guarantee)?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_converse(global: &Global, config: &RunConfig, path: Option<&Path>) -> Result<()> {
    let graph = planted_graph(global, config, path)?;
    let lambda = config.lambda_for(graph.n(), LambdaMode::Simulation);
    let gap = converse_gap(&graph, lambda)?;
    let theorem = check_theorem(graph.layout(), graph.params(), Method::Blind);
    let mut out = output(global.out.as_deref())?;
    writeln!(out, "lambda = {lambda}")?;
    writeln!(out, "case = {}", gap.case.as_str())?;
    writeln!(out, "converse_regime = {}", theorem.converse)?;
    writeln!(out, "planted_objective = {}", gap.planted_objective)?;
    writeln!(out, "alternative_objective = {}", gap.alternative_objective)?;
    writeln!(out, "gap = {}", gap.gap)?;
    out.flush()?;
    Ok(())
}

fn cmd_sweep(global: &Global, config: &RunConfig) -> Result<()> {
    if global.config.is_none() {
        bail!("sweep needs --config <file>");
    }
    let mut sweep = SweepConfig::from_config(config)?;
    if let Some(seed) = global.seed {
        sweep.base_seed = seed;
    }
    let workers = resolve_workers(global.workers, sweep.workers)?;
    let result = run_sweep(&sweep, workers)?;
    let target = global.out.clone().or_else(|| sweep.output.clone());
    let mut out = output(target.as_deref())?;
    write_results(&mut out, &result)?;
    out.flush()?;
    Ok(())
}
