#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use ingrass::baseline::{baseline_sparsify, SparsifierConfig, Strategy, TreeResistance};
use ingrass::bench::{
    run_pipeline, run_setup, scaling_bench, write_scaling_csv, write_summary_csv, BenchConfig, BenchRun,
    Checkpoints, ScalingConfig, SetupTimings,
};
use ingrass::eval::{condition_number, condition_number_exact, condition_number_iterative, IterativeConfig};
use ingrass::lrd::{load_setup, save_setup, LrdConfig};
use ingrass::mtx::{load_matrix_market, write_matrix_market};
use ingrass::resistance::{build_embedder, KrylovConfig, KrylovOperator};
use ingrass::stream::{read_stream, synth_stream, synth_stream_non_edges, write_stream};
use ingrass::update::{EdgeEvent, RedistributionRule, SparsifierState};
use ingrass::Error;

#[derive(Parser, Debug)]
#[command(name = "ingrass", version, about = "Incremental spectral graph sparsification")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the result as JSON to this path (`-` for stdout).
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Write a CSV summary to this path (`-` for stdout).
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// TOML file with defaults; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build and save the resistance embedding, LRD hierarchy and pair index.
    Setup(SetupArgs),
    /// Stream edge batches through the update phase.
    Update(UpdateArgs),
    /// Relative condition number of a graph and its sparsifier.
    Eval(EvalArgs),
    /// Build an initial sparsifier.
    SparsifyBaseline(BaselineArgs),
    /// Write a synthetic edge stream.
    SynthStream(SynthArgs),
    /// Run the full experiment pipeline.
    Bench(BenchArgs),
    /// Setup and per-edge update timings over growing graph sizes.
    Scaling(ScalingArgs),
}

#[derive(Args, Debug, Default)]
struct KrylovArgs {
    /// Krylov order.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long, value_enum)]
    operator: Option<OperatorArg>,
    /// LRD levels (default: ceil(log2 N)).
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    growth: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
enum OperatorArg {
    Adjacency,
    Smoothed,
}

#[derive(Args, Debug)]
struct SetupArgs {
    /// Initial sparsifier in Matrix Market format.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    setup_out: Option<PathBuf>,
    #[command(flatten)]
    krylov: KrylovArgs,
}

#[derive(Args, Debug)]
struct UpdateArgs {
    #[arg(long)]
    setup_in: Option<PathBuf>,
    #[arg(long)]
    stream: Option<PathBuf>,
    #[arg(long)]
    target_cond: Option<f64>,
    #[arg(long)]
    out_sparsifier: Option<PathBuf>,
    /// JSON-lines log of every edge decision.
    #[arg(long)]
    events: Option<PathBuf>,
    #[arg(long)]
    filter_level: Option<usize>,
    #[arg(long, value_enum)]
    rule: Option<RuleArg>,
    /// Rebuild the setup from the current sparsifier after every K batches.
    #[arg(long)]
    resetup_every: Option<usize>,
    #[command(flatten)]
    krylov: KrylovArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
enum RuleArg {
    ShortestPath,
    Uniform,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    sparsifier: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Relative eigenvalue accuracy of the iterative method.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
enum MethodArg {
    Exact,
    Iterative,
    Auto,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Target edges per node.
    #[arg(long, group = "target")]
    density: Option<f64>,
    /// Target edges beyond a spanning tree, per node.
    #[arg(long, group = "target")]
    extra_density: Option<f64>,
    /// Target as a percentage of the graph's edges.
    #[arg(long, group = "target")]
    edge_percent: Option<f64>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
enum StrategyArg {
    Spectral,
    TreePlusDistortion,
    Random,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Existing sparsifier; candidates are edges of the graph missing from it.
    #[arg(long)]
    sparsifier: Option<PathBuf>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    per_iter: Option<usize>,
    /// Sample node pairs that are not edges of the graph instead.
    #[arg(long)]
    non_edges: bool,
    /// Weight of sampled non-edges.
    #[arg(long)]
    weight: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Additional case files; each is a full bench config.
    cases: Vec<PathBuf>,
    #[arg(long)]
    case_name: Option<String>,
    #[arg(long)]
    density_at_target: bool,
    #[arg(long, value_enum)]
    checkpoints: Option<CheckpointArg>,
    #[arg(long)]
    events: Option<PathBuf>,
    /// Cases run in parallel.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum CheckpointArg {
    None,
    Final,
    Every,
}

#[derive(Args, Debug)]
struct ScalingArgs {
    /// Node counts, comma separated; repeat a size for more samples.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long)]
    stream_edges: Option<usize>,
    #[arg(long)]
    target_cond: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] Error),
    #[error("{source}")]
    NoConvergence { source: Error },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Data(Error::Config(_)) => 2,
            CliError::NoConvergence { .. } => 4,
            CliError::Data(_) | CliError::Io(_) => 3,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// TOML defaults: top-level keys for global options, one table per command.
#[derive(Default)]
struct FileConfig {
    table: toml::Table,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)?;
        let table = text
            .parse::<toml::Table>()
            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
        Ok(FileConfig { table })
    }

    fn get<T: DeserializeOwned>(&self, section: Option<&str>, key: &str) -> CliResult<Option<T>> {
        let scope = match section {
            Some(s) => match self.table.get(s) {
                Some(toml::Value::Table(t)) => t,
                Some(_) => return Err(usage(format!("config `{s}` must be a table"))),
                None => return Ok(None),
            },
            None => &self.table,
        };
        scope
            .get(key)
            .map(|v| {
                v.clone()
                    .try_into()
                    .map_err(|e| usage(format!("config key `{key}`: {e}")))
            })
            .transpose()
    }

    /// Flag value, else the file value, else `None`.
    fn pick<T: DeserializeOwned>(&self, section: &str, key: &str, flag: Option<T>) -> CliResult<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(Some(section), key),
        }
    }

    fn require<T: DeserializeOwned>(&self, section: &str, key: &str, flag: Option<T>) -> CliResult<T> {
        self.pick(section, key, flag)?
            .ok_or_else(|| usage(format!("missing --{}", key.replace('_', "-"))))
    }
}

struct Ctx {
    seed: u64,
    json: Option<PathBuf>,
    csv: Option<PathBuf>,
    file: FileConfig,
}

fn open_out(path: &Path) -> CliResult<Box<dyn Write>> {
    if path == Path::new("-") {
        Ok(Box::new(io::stdout().lock()))
    } else {
        Ok(Box::new(BufWriter::new(File::create(path)?)))
    }
}

impl Ctx {
    fn emit_json<T: Serialize>(&self, value: &T) -> CliResult<()> {
        if let Some(path) = &self.json {
            let mut out = open_out(path)?;
            serde_json::to_writer_pretty(&mut out, value).map_err(io::Error::from)?;
            writeln!(out)?;
            out.flush()?;
        }
        Ok(())
    }
}

fn krylov_config(ctx: &Ctx, section: &str, a: &KrylovArgs) -> CliResult<(KrylovConfig, LrdConfig)> {
    let f = &ctx.file;
    let mut k = KrylovConfig::default();
    if let Some(m) = f.pick(section, "order", a.order)? {
        if m == 0 {
            return Err(usage("--order must be positive"));
        }
        k.order = m;
    }
    if let Some(op) = f.pick(section, "operator", a.operator)? {
        k.operator = match op {
            OperatorArg::Adjacency => KrylovOperator::Adjacency,
            OperatorArg::Smoothed => KrylovOperator::Smoothed,
        };
    }
    let mut l = LrdConfig::default();
    if let Some(levels) = f.pick(section, "levels", a.levels)? {
        l.levels = Some(levels);
    }
    if let Some(g) = f.pick(section, "growth", a.growth)? {
        l.growth = g;
    }
    Ok((k, l))
}

#[derive(Serialize)]
struct SetupSummary {
    n: usize,
    m: usize,
    levels: usize,
    embedding_dim: usize,
    timings: SetupTimings,
}

fn cmd_setup(ctx: &Ctx, a: &SetupArgs) -> CliResult<()> {
    let f = &ctx.file;
    let graph: PathBuf = f.require("setup", "graph", a.graph.clone())?;
    let out: PathBuf = f.require("setup", "setup_out", a.setup_out.clone())?;
    let (k, l) = krylov_config(ctx, "setup", &a.krylov)?;
    let h0 = load_matrix_market(&graph)?;
    let (art, timings) = run_setup(&h0, &k, &l, ctx.seed)?;
    save_setup(&art, &out)?;
    let summary = SetupSummary {
        n: h0.n_nodes(),
        m: h0.n_edges(),
        levels: art.hierarchy.levels(),
        embedding_dim: art.embedder.dim(),
        timings,
    };
    println!(
        "setup: n={} m={} levels={} in {:.3}s -> {}",
        summary.n,
        summary.m,
        summary.levels,
        timings.total_seconds,
        out.display()
    );
    ctx.emit_json(&summary)
}

#[derive(Serialize)]
struct UpdateSummary {
    batches: usize,
    edges: usize,
    inserted: usize,
    merged: usize,
    redistributed: usize,
    filter_level: usize,
    n: usize,
    m: usize,
    update_seconds: f64,
    resetups: usize,
}

fn cmd_update(ctx: &Ctx, a: &UpdateArgs) -> CliResult<()> {
    let f = &ctx.file;
    let setup_in: PathBuf = f.require("update", "setup_in", a.setup_in.clone())?;
    let stream_path: PathBuf = f.require("update", "stream", a.stream.clone())?;
    let target: f64 = f.require("update", "target_cond", a.target_cond)?;
    let out: PathBuf = f.require("update", "out_sparsifier", a.out_sparsifier.clone())?;
    let events_path: Option<PathBuf> = f.pick("update", "events", a.events.clone())?;
    let level: Option<usize> = f.pick("update", "filter_level", a.filter_level)?;
    let rule = match f.pick("update", "rule", a.rule)? {
        Some(RuleArg::Uniform) => RedistributionRule::Uniform,
        _ => RedistributionRule::ShortestPath,
    };
    let resetup: Option<usize> = f.pick("update", "resetup_every", a.resetup_every)?;
    if resetup == Some(0) {
        return Err(usage("--resetup-every must be positive"));
    }
    let (k, l) = krylov_config(ctx, "update", &a.krylov)?;

    let art = load_setup(&setup_in)?;
    let batches = read_stream(&stream_path)?;
    let make = |art, level: Option<usize>| -> CliResult<SparsifierState> {
        let mut s = SparsifierState::from_setup(art, target)?.with_rule(rule);
        if let Some(lv) = level {
            s.set_filter_level(lv)?;
        }
        Ok(s)
    };
    let mut state = make(art, level)?;
    let mut log = events_path.as_deref().map(open_out).transpose()?;
    let mut all: Vec<EdgeEvent> = Vec::new();
    let mut seconds = 0.0;
    let mut resetups = 0;
    for (i, batch) in batches.iter().enumerate() {
        let t = Instant::now();
        let events = state.ingrass_update(batch)?;
        seconds += t.elapsed().as_secs_f64();
        if let Some(w) = log.as_mut() {
            for ev in &events {
                serde_json::to_writer(&mut *w, ev).map_err(io::Error::from)?;
                writeln!(w)?;
            }
        }
        all.extend(events);
        if resetup.is_some_and(|r| (i + 1) % r == 0 && i + 1 < batches.len()) {
            let h = state.to_graph();
            let (art, _) = run_setup(&h, &k, &l, ctx.seed)?;
            state = make(art, level)?;
            resetups += 1;
        }
    }
    if let Some(w) = log.as_mut() {
        w.flush()?;
    }
    let h = state.to_graph();
    write_matrix_market(&h, &out)?;
    let c = ingrass::bench::DecisionCounts::tally(&all);
    let summary = UpdateSummary {
        batches: batches.len(),
        edges: all.len(),
        inserted: c.inserted,
        merged: c.merged,
        redistributed: c.redistributed,
        filter_level: state.filter_level(),
        n: h.n_nodes(),
        m: h.n_edges(),
        update_seconds: seconds,
        resetups,
    };
    println!(
        "update: {} edges in {} batches at level {}: {} inserted, {} merged, {} redistributed ({:.4}s)",
        summary.edges,
        summary.batches,
        summary.filter_level,
        c.inserted,
        c.merged,
        c.redistributed,
        seconds
    );
    ctx.emit_json(&summary)
}

fn cmd_eval(ctx: &Ctx, a: &EvalArgs) -> CliResult<()> {
    let f = &ctx.file;
    let gp: PathBuf = f.require("eval", "graph", a.graph.clone())?;
    let hp: PathBuf = f.require("eval", "sparsifier", a.sparsifier.clone())?;
    let method = f.pick("eval", "method", a.method)?.unwrap_or(MethodArg::Auto);
    let mut cfg = IterativeConfig {
        seed: ctx.seed,
        ..Default::default()
    };
    if let Some(t) = f.pick("eval", "tol", a.tol)? {
        cfg.tol = t;
    }
    if let Some(m) = f.pick("eval", "max_iter", a.max_iter)? {
        cfg.max_iter = m;
    }
    let g = load_matrix_market(&gp)?;
    let h = load_matrix_market(&hp)?;
    let res = match method {
        MethodArg::Exact => condition_number_exact(&g, &h),
        MethodArg::Iterative => condition_number_iterative(&g, &h, &cfg),
        MethodArg::Auto => condition_number(&g, &h, &cfg),
    };
    let report = match res {
        Ok(r) => r,
        Err(Error::NoConvergence(r)) => {
            ctx.emit_json(&*r)?;
            return Err(CliError::NoConvergence {
                source: Error::NoConvergence(r),
            });
        }
        Err(e) => return Err(e.into()),
    };
    println!(
        "kappa {:.6} (lambda_max {:.6}, lambda_min {:.6}, {:?})",
        report.kappa, report.lambda_max, report.lambda_min, report.method
    );
    ctx.emit_json(&report)
}

#[derive(Serialize)]
struct BaselineSummary {
    n: usize,
    m_graph: usize,
    m_sparsifier: usize,
    density: f64,
    extra_density: f64,
}

fn cmd_baseline(ctx: &Ctx, a: &BaselineArgs) -> CliResult<()> {
    let f = &ctx.file;
    let gp: PathBuf = f.require("sparsify-baseline", "graph", a.graph.clone())?;
    let out: PathBuf = f.require("sparsify-baseline", "out", a.out.clone())?;
    let strategy = match f.pick("sparsify-baseline", "strategy", a.strategy)? {
        Some(StrategyArg::TreePlusDistortion) => Strategy::TreePlusDistortion,
        Some(StrategyArg::Random) => Strategy::Random,
        Some(StrategyArg::Spectral) | None => Strategy::Spectral,
    };
    let g = load_matrix_market(&gp)?;
    let n = g.n_nodes() as f64;
    let targets = [
        f.pick("sparsify-baseline", "density", a.density)?,
        f.pick("sparsify-baseline", "extra_density", a.extra_density)?.map(|x| (n - 1.0) / n + x),
        f.pick("sparsify-baseline", "edge_percent", a.edge_percent)?
            .map(|p| p / 100.0 * g.n_edges() as f64 / n),
    ];
    let mut given = targets.iter().flatten();
    let target = *given
        .next()
        .ok_or_else(|| usage("one of --density, --extra-density or --edge-percent is required"))?;
    if given.next().is_some() {
        return Err(usage("give only one of --density, --extra-density or --edge-percent"));
    }
    let cfg = SparsifierConfig::new(target, ctx.seed, strategy);
    let h = if strategy == Strategy::TreePlusDistortion {
        let emb = build_embedder(&g, &KrylovConfig::default(), ctx.seed)?;
        baseline_sparsify(&g, &cfg, &emb)?
    } else {
        g.ensure_connected()?;
        baseline_sparsify(&g, &cfg, &TreeResistance::new(&g)?)?
    };
    write_matrix_market(&h, &out)?;
    let summary = BaselineSummary {
        n: h.n_nodes(),
        m_graph: g.n_edges(),
        m_sparsifier: h.n_edges(),
        density: ingrass::eval::density(&h),
        extra_density: ingrass::eval::extra_density(&h),
    };
    println!(
        "sparsify-baseline: kept {} of {} edges (extra density {:.4}) -> {}",
        summary.m_sparsifier,
        summary.m_graph,
        summary.extra_density,
        out.display()
    );
    ctx.emit_json(&summary)
}

fn cmd_synth(ctx: &Ctx, a: &SynthArgs) -> CliResult<()> {
    let f = &ctx.file;
    let gp: PathBuf = f.require("synth-stream", "graph", a.graph.clone())?;
    let iterations: usize = f.require("synth-stream", "iterations", a.iterations)?;
    let per: usize = f.require("synth-stream", "per_iter", a.per_iter)?;
    let out: PathBuf = f.require("synth-stream", "out", a.out.clone())?;
    let non_edges = a.non_edges || f.get(Some("synth-stream"), "non_edges")?.unwrap_or(false);
    let g = load_matrix_market(&gp)?;
    let batches = if non_edges {
        let w = f.pick("synth-stream", "weight", a.weight)?.unwrap_or(1.0);
        if !(w > 0.0) {
            return Err(usage("--weight must be positive"));
        }
        synth_stream_non_edges(&g, iterations, per, w, ctx.seed)?
    } else {
        let hp: PathBuf = f.require("synth-stream", "sparsifier", a.sparsifier.clone())?;
        let h = load_matrix_market(&hp)?;
        synth_stream(&g, &h, iterations, per, ctx.seed)?
    };
    write_stream(&batches, &out)?;
    println!("synth-stream: {} batches of {per} edges -> {}", batches.len(), out.display());
    Ok(())
}

fn cmd_bench(ctx: &Ctx, a: &BenchArgs, config: Option<&Path>, seed: Option<u64>) -> CliResult<()> {
    let mut files: Vec<Option<PathBuf>> = Vec::new();
    if config.is_some() || a.cases.is_empty() {
        files.push(config.map(Path::to_path_buf));
    }
    files.extend(a.cases.iter().cloned().map(Some));
    let mut cfgs = Vec::with_capacity(files.len());
    for path in &files {
        let mut cfg = match path {
            Some(p) => BenchConfig::load(p)?,
            None => BenchConfig::default(),
        };
        if let Some(s) = seed {
            cfg.seed = s;
        }
        if let Some(name) = &a.case_name {
            cfg.case_name = name.clone();
        }
        if a.density_at_target {
            cfg.density_at_target = true;
        }
        if let Some(c) = a.checkpoints {
            cfg.checkpoints = match c {
                CheckpointArg::None => Checkpoints::None,
                CheckpointArg::Final => Checkpoints::Final,
                CheckpointArg::Every => Checkpoints::Every,
            };
        }
        if let Some(e) = &a.events {
            cfg.event_log = Some(e.clone());
        }
        cfgs.push(cfg);
    }
    if cfgs.len() > 1 && a.events.is_some() {
        return Err(usage("--events takes a single case"));
    }
    let jobs = a.jobs.unwrap_or(1).max(1);
    let results: Vec<_> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| usage(e.to_string()))?;
        pool.install(|| cfgs.par_iter().map(run_pipeline).collect())
    } else {
        cfgs.iter().map(run_pipeline).collect()
    };
    let mut runs: Vec<BenchRun> = Vec::with_capacity(results.len());
    let mut first_err = None;
    for r in results {
        match r {
            Ok(run) => runs.push(run),
            Err(fail) => {
                eprintln!("case `{}` failed: {}", fail.partial.case_name, fail.source);
                runs.push(*fail.partial);
                first_err.get_or_insert(fail.source);
            }
        }
    }
    for run in &runs {
        print_run(run);
    }
    if runs.len() == 1 {
        ctx.emit_json(&runs[0])?;
    } else {
        ctx.emit_json(&runs)?;
    }
    if let Some(path) = &ctx.csv {
        write_summary_csv(&runs, open_out(path)?)?;
    }
    match first_err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.2}"))
}

fn print_run(r: &BenchRun) {
    println!(
        "{}: n={} m={} density {:.4} -> {:.4} (all edges); kappa initial {} no-update {} after {}; final density {} at level {}",
        r.case_name,
        r.n,
        r.m,
        r.initial_density,
        r.final_density_all_edges,
        fmt_opt(r.kappa_initial),
        fmt_opt(r.kappa_no_update),
        fmt_opt(r.kappa_after),
        r.final_density.map_or("-".into(), |d| format!("{d:.4}")),
        r.filter_level.map_or("-".into(), |l| l.to_string()),
    );
    if let Some(d) = &r.density_at_target {
        println!(
            "  density at kappa <= {:.2}: inGRASS {} random {} ratio {}",
            d.target,
            d.ingrass.map_or("-".into(), |p| format!("{:.4} (level {})", p.density, p.level)),
            d.random.map_or("-".into(), |p| format!("{:.4}", p.density)),
            fmt_opt(d.ratio()),
        );
    }
}

fn cmd_scaling(ctx: &Ctx, a: &ScalingArgs) -> CliResult<()> {
    let f = &ctx.file;
    let sizes: Vec<usize> = if a.sizes.is_empty() {
        f.get(Some("scaling"), "sizes")?.unwrap_or_default()
    } else {
        a.sizes.clone()
    };
    let mut cfg = ScalingConfig {
        seed: ctx.seed,
        ..Default::default()
    };
    if let Some(k) = f.pick("scaling", "stream_edges", a.stream_edges)? {
        cfg.stream_edges = k;
    }
    if let Some(c) = f.pick("scaling", "target_cond", a.target_cond)? {
        cfg.target_condition = c;
    }
    let rows = scaling_bench(&sizes, &cfg)?;
    match &ctx.csv {
        Some(p) => write_scaling_csv(&rows, open_out(p)?)?,
        None if ctx.json.is_none() => write_scaling_csv(&rows, io::stdout().lock())?,
        None => {}
    }
    ctx.emit_json(&rows)
}

fn run(cli: Cli) -> CliResult<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let seed = match cli.seed {
        Some(s) => Some(s),
        None => file.get(None, "seed")?,
    };
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => file.get(None, "threads")?,
    };
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    let ctx = Ctx {
        seed: seed.unwrap_or(0),
        json: cli.json,
        csv: cli.csv,
        file,
    };
    match &cli.cmd {
        Command::Setup(a) => cmd_setup(&ctx, a),
        Command::Update(a) => cmd_update(&ctx, a),
        Command::Eval(a) => cmd_eval(&ctx, a),
        Command::SparsifyBaseline(a) => cmd_baseline(&ctx, a),
        Command::SynthStream(a) => cmd_synth(&ctx, a),
        Command::Bench(a) => cmd_bench(&ctx, a, cli.config.as_deref(), seed),
        Command::Scaling(a) => cmd_scaling(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = FileConfig {
            table: "seed = 4\n[eval]\ntol = 0.5\nmethod = \"exact\"\n".parse().unwrap(),
        };
        assert_eq!(file.get::<u64>(None, "seed").unwrap(), Some(4));
        assert_eq!(file.pick("eval", "tol", Some(0.1)).unwrap(), Some(0.1));
        assert_eq!(file.pick::<f64>("eval", "tol", None).unwrap(), Some(0.5));
        assert_eq!(file.pick::<MethodArg>("eval", "method", None).unwrap(), Some(MethodArg::Exact));
        assert!(file.require::<PathBuf>("eval", "graph", None).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(usage("x").exit_code(), 2);
        assert_eq!(CliError::Data(Error::NotConnected).exit_code(), 3);
        assert_eq!(CliError::Data(Error::Config("x".into())).exit_code(), 2);
    }

    #[test]
    fn cli_definition_is_valid() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
