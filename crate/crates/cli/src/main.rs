//! Command-line surface for the tree-cover toolkit.
//!
//! `gen` writes gadget metrics and graphs in the text formats, `cover`
//! runs the builders (every cover is verified before the command
//! succeeds), `verify` re-checks a cover directory against its input, and
//! `stats` prints structural statistics. All randomness flows from the
//! explicit `--seed`; identical configurations produce byte-identical
//! reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use treecover::gadgets;
use treecover::metric::{metric_from_graph, FiniteMetric, WeightedGraph};
use treecover::tree::{TreeCover, TreeEmbedding, TreeKind};
use treecover::verify::{verify_cover, DistortionReport};

#[derive(Parser)]
#[command(name = "treecover", version, about = "Tree covers of finite metrics: builders, gadget generators, and an exhaustive verifier")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Size cap for generated instances (points or vertices).
    #[arg(long, global = true, default_value_t = gadgets::DEFAULT_SIZE_CAP)]
    max_size: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate gadget inputs.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
    /// Build a verified tree cover.
    Cover {
        #[command(subcommand)]
        builder: CoverCommand,
    },
    /// Re-verify a cover directory against its input.
    Verify {
        /// Cover directory produced by a `cover` command.
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
        format: InputFormat,
        /// Also write a CSV histogram of per-pair distortions here.
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Structural statistics of an input.
    Stats {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
        format: InputFormat,
        /// Also build and dump the hierarchical net ladder at this eps.
        #[arg(long)]
        ladder_eps: Option<f64>,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Shortest-path metric of the unweighted N-cycle.
    Cycle {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// k-fold beta-composition of the N-cycle with itself.
    Composition {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recursive N-cycle graph of depth k.
    RecursiveCycle {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum CoverCommand {
    /// Bottom-up clustered cover for doubling metrics, distortion 1+eps.
    Doubling {
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        io: CoverIo,
    },
    /// Separator-based cover for planar graphs, distortion 1+eps.
    Planar {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = treecover::planar::DEFAULT_C)]
        c_const: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        io: CoverIo,
    },
    /// Hierarchical-partition-family cover, distortion O(alpha).
    Hpf {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        io: CoverIo,
    },
    /// Ramsey cover with k trees.
    Ramsey {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        io: CoverIo,
    },
}

#[derive(Args)]
struct CoverIo {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    format: InputFormat,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    Auto,
    Metric,
    Graph,
}

/// The loaded input: always a metric, with the graph kept when present.
enum Input {
    Metric(FiniteMetric),
    Graph(WeightedGraph, FiniteMetric),
}

impl Input {
    fn metric(&self) -> &FiniteMetric {
        match self {
            Input::Metric(m) => m,
            Input::Graph(_, m) => m,
        }
    }
}

fn load_input(path: &Path, format: InputFormat) -> anyhow::Result<Input> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let format = match format {
        InputFormat::Auto => {
            let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
            if first.split_whitespace().count() >= 2 {
                InputFormat::Graph
            } else {
                InputFormat::Metric
            }
        }
        f => f,
    };
    match format {
        InputFormat::Metric => Ok(Input::Metric(FiniteMetric::from_text(&text)?)),
        InputFormat::Graph => {
            let g = WeightedGraph::from_text(&text)?;
            let m = metric_from_graph(&g)?;
            Ok(Input::Graph(g, m))
        }
        InputFormat::Auto => unreachable!(),
    }
}

/// Top section of every report, for provenance and reproducibility.
#[derive(Serialize, Deserialize)]
struct ReportHeader {
    schema: u32,
    version: String,
    command: String,
    input: String,
    seed: Option<u64>,
    threads: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct CoverMeta {
    kind: TreeKind,
    claimed_distortion: f64,
    num_trees: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    home_tree: Option<Vec<usize>>,
}

#[derive(Serialize)]
struct CoverReport<'a> {
    #[serde(flatten)]
    header: &'a ReportHeader,
    cover: CoverMeta,
    verification: &'a DistortionReport,
    log: serde_json::Value,
}

fn header(command: &str, input: &Path, seed: Option<u64>, threads: Option<usize>) -> ReportHeader {
    ReportHeader {
        schema: 1,
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        input: input.display().to_string(),
        seed,
        threads,
    }
}

fn write_cover_dir(
    dir: &Path,
    cover: &TreeCover,
    verification: &DistortionReport,
    header: &ReportHeader,
    log: serde_json::Value,
) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (i, tree) in cover.trees.iter().enumerate() {
        let path = dir.join(format!("tree_{i:05}.txt"));
        std::fs::write(path, tree.to_text())?;
    }
    let report = CoverReport {
        header,
        cover: CoverMeta {
            kind: cover.kind,
            claimed_distortion: cover.claimed_distortion,
            num_trees: cover.trees.len(),
            home_tree: cover.home_tree.clone(),
        },
        verification,
        log,
    };
    let json = serde_json::to_string_pretty(&report)?;
    std::fs::write(dir.join("report.json"), json)?;
    Ok(())
}

fn finish_cover(
    dir: &Path,
    cover: &TreeCover,
    verification: &DistortionReport,
    header: &ReportHeader,
    log: serde_json::Value,
) -> anyhow::Result<()> {
    write_cover_dir(dir, cover, verification, header, log)?;
    println!(
        "cover: {} trees, distortion {} (claimed {}), domination {}",
        verification.num_trees,
        verification.effective_distortion(),
        verification.claimed_distortion,
        if verification.domination_ok { "ok" } else { "VIOLATED" }
    );
    if !(verification.domination_ok && verification.claimed_met) {
        let json = serde_json::to_string_pretty(&verification)?;
        eprintln!("{json}");
        bail!("verification gate failed");
    }
    println!("report: {}", dir.join("report.json").display());
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("thread pool already initialized")?;
    }
    match cli.command {
        Command::Gen { what } => run_gen(what, cli.max_size),
        Command::Cover { builder } => run_cover(builder, cli.threads, cli.max_size),
        Command::Verify {
            cover,
            input,
            format,
            histogram,
        } => run_verify(&cover, &input, format, histogram.as_deref()),
        Command::Stats {
            input,
            format,
            ladder_eps,
        } => run_stats(&input, format, ladder_eps),
    }
}

fn run_gen(what: GenCommand, cap: usize) -> anyhow::Result<()> {
    let (out, report) = match what {
        GenCommand::Cycle { n, out } => {
            let m = gadgets::cycle_metric(n)?;
            std::fs::write(&out, m.to_text())?;
            println!("wrote {} ({} points)", out.display(), m.len());
            (
                out,
                serde_json::json!({
                    "schema": 1,
                    "version": env!("CARGO_PKG_VERSION"),
                    "command": "gen cycle",
                    "n": n,
                    "points": m.len(),
                }),
            )
        }
        GenCommand::Composition { n, k, beta, out } => {
            let m = gadgets::composition_power(n, k, beta, cap)?;
            std::fs::write(&out, m.to_text())?;
            println!("wrote {} ({} points)", out.display(), m.len());
            (
                out,
                serde_json::json!({
                    "schema": 1,
                    "version": env!("CARGO_PKG_VERSION"),
                    "command": "gen composition",
                    "n": n,
                    "k": k,
                    "beta": beta,
                    "points": m.len(),
                }),
            )
        }
        GenCommand::RecursiveCycle { n, k, out } => {
            let rc = gadgets::recursive_cycle_graph(n, k, cap)?;
            std::fs::write(&out, rc.graph.to_text())?;
            println!(
                "wrote {} ({} vertices, {} edges, s = {}, t = {})",
                out.display(),
                rc.graph.len(),
                rc.graph.edges().len(),
                rc.s,
                rc.t
            );
            (
                out,
                serde_json::json!({
                    "schema": 1,
                    "version": env!("CARGO_PKG_VERSION"),
                    "command": "gen recursive-cycle",
                    "n": n,
                    "k": k,
                    "vertices": rc.graph.len(),
                    "edges": rc.graph.edges().len(),
                    "side_vertices": [rc.s, rc.t],
                }),
            )
        }
    };
    let sidecar = out.with_extension("report.json");
    std::fs::write(&sidecar, serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

fn check_cap(n: usize, cap: usize) -> anyhow::Result<()> {
    if n > cap {
        bail!("input has {n} points, size cap is {cap} (raise with --max-size)");
    }
    Ok(())
}

fn run_cover(builder: CoverCommand, threads: Option<usize>, cap: usize) -> anyhow::Result<()> {
    match builder {
        CoverCommand::Doubling { eps, io } => {
            let input = load_input(&io.input, io.format)?;
            check_cap(input.metric().len(), cap)?;
            let m = input.metric();
            let (cover, log) = treecover::doubling::build_doubling_cover(m, eps)?;
            let verification = verify_cover(&cover, m)?;
            if !(verification.domination_ok
                && verification.plain_distortion <= (1.0 + eps) * (1.0 + treecover::REL_TOL))
            {
                let json = serde_json::to_string_pretty(&verification)?;
                eprintln!("{json}");
                bail!("doubling cover failed its distortion gate");
            }
            let header = header("cover doubling", &io.input, None, threads);
            finish_cover(
                &io.out,
                &cover,
                &verification,
                &header,
                serde_json::to_value(&log)?,
            )
        }
        CoverCommand::Planar {
            eps,
            c_const,
            seed,
            io,
        } => {
            let input = load_input(&io.input, io.format)?;
            check_cap(input.metric().len(), cap)?;
            let Input::Graph(g, m) = &input else {
                bail!("cover planar needs a graph input");
            };
            let (cover, log, verification) =
                treecover::planar::build_separator_cover(g, eps, c_const, seed)?;
            let _ = m;
            let header = header("cover planar", &io.input, Some(seed), threads);
            finish_cover(
                &io.out,
                &cover,
                &verification,
                &header,
                serde_json::to_value(&log)?,
            )
        }
        CoverCommand::Hpf { alpha, seed, io } => {
            let input = load_input(&io.input, io.format)?;
            check_cap(input.metric().len(), cap)?;
            let m = input.metric();
            let (family, log) = treecover::partition::family::assemble_family(m, alpha, seed)?;
            let cover = treecover::partition::family::cover_from_family(&family, m)?;
            let verification = verify_cover(&cover, m)?;
            if !(verification.domination_ok && verification.claimed_met) {
                let json = serde_json::to_string_pretty(&verification)?;
                eprintln!("{json}");
                bail!("hpf cover failed its distortion gate");
            }
            let header = header("cover hpf", &io.input, Some(seed), threads);
            finish_cover(
                &io.out,
                &cover,
                &verification,
                &header,
                serde_json::to_value(&log)?,
            )
        }
        CoverCommand::Ramsey { k, seed, io } => {
            let input = load_input(&io.input, io.format)?;
            check_cap(input.metric().len(), cap)?;
            let m = input.metric();
            let (cover, log, verification) = treecover::ramsey::build_ramsey_cover(m, k, seed)?;
            if !verification.domination_ok {
                let json = serde_json::to_string_pretty(&verification)?;
                eprintln!("{json}");
                bail!("ramsey cover failed domination");
            }
            let header = header("cover ramsey", &io.input, Some(seed), threads);
            finish_cover(
                &io.out,
                &cover,
                &verification,
                &header,
                serde_json::to_value(&log)?,
            )
        }
    }
}

fn run_verify(
    dir: &Path,
    input: &Path,
    format: InputFormat,
    histogram: Option<&Path>,
) -> anyhow::Result<()> {
    let loaded = load_input(input, format)?;
    let m = loaded.metric();
    let report_text = std::fs::read_to_string(dir.join("report.json"))
        .with_context(|| format!("reading {}", dir.join("report.json").display()))?;
    let report: serde_json::Value = serde_json::from_str(&report_text)?;
    let meta: CoverMeta = serde_json::from_value(
        report
            .get("cover")
            .cloned()
            .context("report.json lacks a cover section")?,
    )?;
    let mut trees = Vec::with_capacity(meta.num_trees);
    for i in 0..meta.num_trees {
        let path = dir.join(format!("tree_{i:05}.txt"));
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        trees.push(TreeEmbedding::from_text(&text)?);
    }
    let cover = TreeCover {
        trees,
        kind: meta.kind,
        claimed_distortion: meta.claimed_distortion,
        home_tree: meta.home_tree,
    };
    let verification = verify_cover(&cover, m)?;
    let json = serde_json::to_string_pretty(&verification)?;
    std::fs::write(dir.join("verify_report.json"), &json)?;
    println!("{json}");
    if let Some(path) = histogram {
        let pairs = treecover::verify::pair_distortions(&cover, m)?;
        std::fs::write(path, DistortionReport::histogram_csv(&pairs, 20))?;
    }
    if !(verification.domination_ok && verification.claimed_met) {
        bail!("verification gate failed");
    }
    Ok(())
}

fn run_stats(input: &Path, format: InputFormat, ladder_eps: Option<f64>) -> anyhow::Result<()> {
    let loaded = load_input(input, format)?;
    let m = loaded.metric();
    #[derive(Serialize)]
    struct LadderDump {
        eps: f64,
        scales: Vec<i32>,
        net_sizes: Vec<usize>,
        nets: Vec<Vec<usize>>,
        /// Identical consecutive levels as (starting scale, run length).
        dedup_runs: Vec<(i32, usize)>,
    }
    #[derive(Serialize)]
    struct Stats {
        schema: u32,
        points: usize,
        d_min: f64,
        d_max: f64,
        aspect_ratio: Option<f64>,
        doubling_constant_estimate: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        ladder: Option<LadderDump>,
    }
    let ladder = match ladder_eps {
        Some(eps) => {
            let ladder = treecover::nets::build_ladder(m, eps)?;
            Some(LadderDump {
                eps,
                scales: ladder.scales().collect(),
                net_sizes: ladder.scales().map(|i| ladder.net(i).len()).collect(),
                nets: ladder.scales().map(|i| ladder.net(i).to_vec()).collect(),
                dedup_runs: ladder.dedup_runs(),
            })
        }
        None => None,
    };
    let stats = Stats {
        schema: 1,
        points: m.len(),
        d_min: m.d_min(),
        d_max: m.d_max(),
        aspect_ratio: m.aspect_ratio().ok(),
        doubling_constant_estimate: treecover::metric::doubling_constant_estimate(m),
        ladder,
    };
    println!("{}", serde_json::to_string_pretty(&stats)?);
    Ok(())
}

/// Die quietly on a closed pipe, like any well-behaved filter.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
