use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use streamspan::graph_io::{gen_complete, gen_gnp, gen_grid, sort_by_weight};
use streamspan::incremental::SpannerState;
use streamspan::streamsort::spanner::{run, RunOptions, StreamSortOutput};
use streamspan::streamsort::Storage;
use streamspan::verifier::{
    check_cluster_radius, check_property_p, check_removed_edges, check_size_and_work, check_state_invariants,
    check_stretch, BuildSummary, VerificationReport,
};
use streamspan::{read_edge_stream, write_edge_stream, Edge, EdgeStream, SamplingHierarchy, WeightRange};

#[derive(Parser)]
#[command(name = "streamspan", version, about = "Sparse (2k-1)-spanners of edge streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random graph as an edge-list file.
    Gen(GenArgs),
    /// Build a spanner of an edge-list file.
    Build(BuildArgs),
    /// Check a spanner against its graph, or run a seeded batch.
    Verify(VerifyArgs),
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("family").required(true).args(["gnp", "complete", "grid"])))]
struct GenArgs {
    /// G(n, p) random graph.
    #[arg(long, num_args = 2, value_names = ["N", "P"])]
    gnp: Option<Vec<String>>,
    /// Complete graph on N vertices.
    #[arg(long, value_name = "N")]
    complete: Option<usize>,
    /// ROWS x COLS grid.
    #[arg(long, num_args = 2, value_names = ["ROWS", "COLS"])]
    grid: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Integer weights drawn uniformly from LO..=HI; unweighted if absent.
    #[arg(long, value_name = "LO:HI")]
    weights: Option<WeightRange>,
    /// Output file (stdout if absent).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Model {
    SinglePass,
    SortedWeighted,
    Streamsort,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StorageKind {
    Memory,
    TempFiles,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[arg(short, value_parser = clap::value_parser!(u32).range(1..))]
    k: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Input edge list (stdin if absent).
    #[arg(short, long)]
    input: Option<PathBuf>,
    /// Spanner output file.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write the key=value report here as well as to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Run the invariant suites after (and during) the build.
    #[arg(long)]
    check_invariants: bool,
    /// Sort the input by weight first (sorted-weighted model).
    #[arg(long)]
    presort: bool,
    /// Where StreamSort keeps its streams. Defaults to temp files when
    /// STREAMSPAN_TMPDIR is set, memory otherwise.
    #[arg(long, value_enum)]
    storage: Option<StorageKind>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, required_unless_present = "gnp", requires = "spanner")]
    graph: Option<PathBuf>,
    #[arg(long)]
    spanner: Option<PathBuf>,
    /// Stretch bound.
    #[arg(short, conflicts_with = "k")]
    t: Option<f64>,
    /// Check stretch 2k-1; required in batch mode.
    #[arg(short)]
    k: Option<u32>,
    /// Batch mode: build and check one G(N, P) graph per seed.
    #[arg(long, num_args = 2, value_names = ["N", "P"], conflicts_with_all = ["graph", "spanner"])]
    gnp: Option<Vec<String>>,
    #[arg(long, default_value_t = 25)]
    seeds: u64,
    #[arg(long, value_enum, default_value = "single-pass")]
    model: Model,
    #[arg(long, value_name = "LO:HI")]
    weights: Option<WeightRange>,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(a) => cmd_gen(a).map(|()| true),
        Command::Build(a) => cmd_build(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn parse_gnp(v: &[String]) -> Result<(usize, f64)> {
    let n = v[0].parse().with_context(|| format!("bad vertex count `{}`", v[0]))?;
    let p: f64 = v[1].parse().with_context(|| format!("bad probability `{}`", v[1]))?;
    if !(0.0..=1.0).contains(&p) {
        bail!("probability {p} outside [0, 1]");
    }
    Ok((n, p))
}

fn writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_graph(path: Option<&Path>) -> Result<EdgeStream> {
    let reader: Box<dyn BufRead> = match path {
        Some(p) => Box::new(BufReader::new(File::open(p).with_context(|| format!("opening {}", p.display()))?)),
        None => Box::new(BufReader::new(io::stdin().lock())),
    };
    let g = read_edge_stream(reader).with_context(|| match path {
        Some(p) => format!("reading {}", p.display()),
        None => "reading stdin".to_string(),
    })?;
    if g.self_loops_dropped > 0 {
        eprintln!("warning: dropped {} self-loops", g.self_loops_dropped);
    }
    Ok(g)
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let g = if let Some(v) = &a.gnp {
        let (n, p) = parse_gnp(v)?;
        gen_gnp(n, p, a.seed, a.weights)
    } else if let Some(n) = a.complete {
        gen_complete(n, a.seed, a.weights)
    } else {
        let g = a.grid.as_deref().unwrap_or_default();
        gen_grid(g[0], g[1], a.seed, a.weights)
    };
    let mut out = writer(a.output.as_deref())?;
    write_edge_stream(&mut out, &g)?;
    out.flush()?;
    Ok(())
}

/// Result of one build in any model.
struct Built {
    spanner: Vec<Edge>,
    report: VerificationReport,
    summary: BuildSummary,
    lines: Vec<String>,
}

fn build(model: Model, k: u32, seed: u64, g: &EdgeStream, check: bool, storage: Storage) -> Result<Built> {
    let mut report = VerificationReport::default();
    let mut lines = Vec::new();
    let mut summary = BuildSummary { n: g.n, m: g.len(), k, spanner_size: 0, hook_edges: 0, prune_scans: 0 };
    let spanner = match model {
        Model::SinglePass | Model::SortedWeighted => {
            let h = SamplingHierarchy::build(g.n, k, seed)?;
            let mut state = SpannerState::new(h).with_invariant_checks(check);
            if model == Model::SinglePass {
                for e in g.iter() {
                    state.process_edge(e)?;
                }
            } else {
                state.process_sorted(g.iter())?;
            }
            if check {
                report.checks.push(check_state_invariants(&state));
                report.checks.push(check_cluster_radius(&state));
            }
            let c = state.counters();
            summary.hook_edges = state.hook_edge_count();
            summary.prune_scans = c.prune_scans;
            report.hook_edge_count = Some(summary.hook_edges);
            report.prune_scan_total = Some(c.prune_scans);
            lines.push(format!("edges_processed={}", c.edges_processed));
            lines.push(format!("prune_calls={}", c.prune_calls));
            lines.push(format!("promotions={}", c.promotions));
            lines.push(format!("discards={}", c.discards));
            lines.push(format!("rises={}", c.rises));
            state.spanner_edges()
        }
        Model::Streamsort => {
            let out: StreamSortOutput = run(k, seed, g, &RunOptions { storage, snapshots: check })?;
            let acc = &out.accounting;
            report.stream_passes = Some(acc.stream_passes);
            report.sort_passes = Some(acc.sort_passes);
            lines.push(format!("total_passes={}", acc.total_passes()));
            lines.push(format!("pass_bound={}", StreamSortOutput::pass_bound(k)));
            lines.push(format!("max_state_records={}", acc.max_state_records));
            lines.push(format!("max_state_bytes={}", acc.max_state_bytes));
            lines.push(format!("records_processed={}", acc.records_processed));
            summary.hook_edges = out.iterations.iter().map(|s| s.hooked_vertices as usize).sum();
            report.hook_edge_count = Some(summary.hook_edges);
            if check {
                report.checks.push(check_property_p(g.n, &out.snapshots, &out.emitted));
                report.checks.push(check_removed_edges(g.n, &out.removed, &out.spanner)?);
            }
            out.spanner
        }
    };
    summary.spanner_size = spanner.len();
    report.spanner_size = spanner.len();
    Ok(Built { spanner, report, summary, lines })
}

fn emit_report(text: &str, path: Option<&Path>) -> Result<()> {
    println!("{text}");
    if let Some(p) = path {
        std::fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn cmd_build(a: BuildArgs) -> Result<bool> {
    let mut g = read_graph(a.input.as_deref())?;
    if a.presort {
        g = sort_by_weight(&g);
    }
    let storage = match a.storage {
        Some(StorageKind::Memory) => Storage::Memory,
        Some(StorageKind::TempFiles) => match Storage::from_env() {
            s @ Storage::TempFiles(_) => s,
            Storage::Memory => Storage::TempFiles(None),
        },
        None => Storage::from_env(),
    };
    let built = build(a.model, a.k, a.seed, &g, a.check_invariants, storage)?;
    if let Some(path) = &a.output {
        let s = EdgeStream::new(g.n, g.weighted, built.spanner.clone());
        let mut out = writer(Some(path))?;
        write_edge_stream(&mut out, &s)?;
        out.flush()?;
    }
    let mut text = format!("model={:?}\nk={}\nseed={}\nn={}\nm={}\n", a.model, a.k, a.seed, g.n, g.len());
    for l in &built.lines {
        text.push_str(l);
        text.push('\n');
    }
    text.push_str(&built.report.to_string());
    emit_report(&text, a.report.as_deref())?;
    Ok(built.report.all_passed())
}

fn cmd_verify(a: VerifyArgs) -> Result<bool> {
    let t = match (a.t, a.k) {
        (Some(t), _) => t,
        (None, Some(k)) if k >= 1 => (2 * k - 1) as f64,
        (None, Some(k)) => bail!("k must be at least 1, got {k}"),
        (None, None) => bail!("one of -t or -k is required"),
    };
    if let Some(v) = &a.gnp {
        let Some(k) = a.k else { bail!("batch mode needs -k") };
        return batch(&a, parse_gnp(v)?, k, t);
    }
    let g = read_graph(a.graph.as_deref())?;
    let s = read_graph(a.spanner.as_deref())?;
    if s.n > g.n {
        bail!("spanner has {} vertices, graph only {}", s.n, g.n);
    }
    let stretch = check_stretch(g.n, &g.edges, &s.edges, t)?;
    let report =
        VerificationReport { stretch: Some(stretch), spanner_size: s.distinct_edges().len(), ..Default::default() };
    emit_report(&report.to_string(), a.report.as_deref())?;
    Ok(report.all_passed())
}

fn batch(a: &VerifyArgs, (n, p): (usize, f64), k: u32, t: f64) -> Result<bool> {
    let mut text = String::from("seed m spanner_size hook_edges prune_scans max_stretch_ratio result\n");
    let mut summaries = Vec::new();
    let mut all = true;
    for seed in 0..a.seeds {
        let mut g = gen_gnp(n, p, seed, a.weights);
        if a.model == Model::SortedWeighted {
            g = sort_by_weight(&g);
        }
        let mut built = build(a.model, k, seed, &g, true, Storage::Memory)?;
        let stretch = check_stretch(g.n, &g.edges, &built.spanner, t)?;
        let ratio = stretch.max_ratio;
        built.report.stretch = Some(stretch);
        let ok = built.report.all_passed();
        all &= ok;
        let s = built.summary;
        text.push_str(&format!(
            "{seed} {} {} {} {} {ratio:.4} {}\n",
            s.m,
            s.spanner_size,
            s.hook_edges,
            s.prune_scans,
            if ok { "pass" } else { "fail" }
        ));
        summaries.push(s);
    }
    let agg = check_size_and_work(&summaries);
    text.push_str(&format!("runs={}\n", agg.runs));
    text.push_str(&format!("mean_size={:.2}\n", agg.mean_size));
    text.push_str(&format!("size_bound={:.2}\n", agg.size_bound));
    text.push_str(&format!("max_hook_edges={}\n", agg.max_hook_edges));
    text.push_str(&format!("hook_violations={}\n", agg.hook_violations));
    if a.model != Model::Streamsort {
        text.push_str(&format!("scan_violations={}\n", agg.scan_violations));
        text.push_str(&format!("mean_scans_per_edge={:.4}\n", agg.mean_scans_per_edge));
        all &= agg.scan_violations == 0;
    }
    all &= agg.hook_violations == 0;
    text.push_str(&format!("result={}", if all { "pass" } else { "fail" }));
    emit_report(&text, a.report.as_deref())?;
    Ok(all)
}
