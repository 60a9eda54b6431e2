//! Experiment harness: one setup, a stream of batches through the update
//! phase, condition-number checkpoints and density-at-target comparisons.
//!
//! Densities reported here are extra densities, `(|E| - (N - 1)) / N`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baseline::{baseline_sparsify, random_include_count, SparsifierConfig, Strategy, TreeResistance};
use crate::error::{Error, Result};
use crate::eval::{condition_number, extra_density, IterativeConfig, SimilarityReport};
use crate::gen;
use crate::graph::WeightedGraph;
use crate::lrd::{build_pair_index, lrd_decompose, LrdConfig, SetupArtifact};
use crate::mtx::load_matrix_market;
use crate::resistance::{build_embedder, KrylovConfig};
use crate::stream::{read_stream, synth_stream, synth_stream_non_edges, Batch};
use crate::update::{Decision, EdgeEvent, RedistributionRule, SparsifierState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphSpec {
    File {
        path: PathBuf,
    },
    FeLikeMesh {
        #[serde(default)]
        seed: u64,
    },
    TriangulatedGrid {
        rows: usize,
        cols: usize,
        #[serde(default)]
        seed: u64,
    },
    TriangulatedTorus {
        rows: usize,
        cols: usize,
    },
    RandomConnected {
        n: usize,
        avg_degree: f64,
        #[serde(default = "one")]
        min_weight: f64,
        #[serde(default = "one")]
        max_weight: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn one() -> f64 {
    1.0
}

impl GraphSpec {
    pub fn build(&self) -> Result<WeightedGraph> {
        let g = match *self {
            GraphSpec::File { ref path } => load_matrix_market(path)?,
            GraphSpec::FeLikeMesh { seed } => gen::fe_like_mesh(seed),
            GraphSpec::TriangulatedGrid { rows, cols, seed } => {
                if rows * cols < 2 {
                    return Err(Error::Config("grid needs at least two nodes".into()));
                }
                gen::triangulated_grid(rows, cols, seed)
            }
            GraphSpec::TriangulatedTorus { rows, cols } => {
                if rows < 3 || cols < 3 {
                    return Err(Error::Config("torus sides must be at least 3".into()));
                }
                gen::triangulated_torus(rows, cols)
            }
            GraphSpec::RandomConnected {
                n,
                avg_degree,
                min_weight,
                max_weight,
                seed,
            } => {
                if n < 2 || !(min_weight > 0.0 && min_weight <= max_weight) {
                    return Err(Error::Config("bad random graph parameters".into()));
                }
                gen::random_connected(n, avg_degree, (min_weight, max_weight), seed)
            }
        };
        g.ensure_connected()?;
        Ok(g)
    }
}

/// Where the new edges come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StreamSpec {
    /// Edges of `G` absent from `H0`. `G` is the final graph and the
    /// original graph is `G` without the stream.
    MissingEdges {
        #[serde(default = "ten")]
        iterations: usize,
        /// Ratio of all-edges extra density to the initial one.
        #[serde(default = "default_growth")]
        density_growth: f64,
    },
    /// Random node pairs that are not edges of the configured graph, which
    /// then acts as the original graph and grows by the stream.
    NonEdges {
        #[serde(default = "ten")]
        iterations: usize,
        #[serde(default = "default_growth")]
        density_growth: f64,
        #[serde(default = "one")]
        weight: f64,
    },
    /// A stream file. With `graph_includes_stream` the configured graph is the
    /// final graph and every stream edge must be one of its edges; otherwise
    /// it is the original graph and the stream is added to it.
    File {
        path: PathBuf,
        #[serde(default)]
        graph_includes_stream: bool,
    },
}

fn ten() -> usize {
    10
}

fn default_growth() -> f64 {
    3.4
}

impl Default for StreamSpec {
    fn default() -> Self {
        StreamSpec::MissingEdges {
            iterations: ten(),
            density_growth: default_growth(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Checkpoints {
    /// Only `kappa_initial` and `kappa_no_update`.
    None,
    /// Also after the last batch.
    #[default]
    Final,
    /// After every batch.
    Every,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub case_name: String,
    pub seed: u64,
    pub graph: GraphSpec,
    pub stream: StreamSpec,
    /// Initial sparsifier file; the baseline builds one when absent.
    pub initial_sparsifier: Option<PathBuf>,
    pub initial_extra_density: f64,
    pub baseline: Strategy,
    /// Defaults to `kappa(G0, H0)`.
    pub target_condition: Option<f64>,
    /// Overrides the level picked from the target condition number.
    pub filter_level: Option<usize>,
    pub rule: RedistributionRule,
    pub krylov: KrylovConfig,
    pub lrd: LrdConfig,
    pub kappa: IterativeConfig,
    pub checkpoints: Checkpoints,
    /// Density needed by each filter level and by random inclusion to reach
    /// the target condition number.
    pub density_at_target: bool,
    /// JSON-lines file receiving every edge event.
    pub event_log: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            case_name: "fe-like".into(),
            seed: 1,
            graph: GraphSpec::FeLikeMesh { seed: 1 },
            stream: StreamSpec::default(),
            initial_sparsifier: None,
            initial_extra_density: 0.1,
            baseline: Strategy::default(),
            target_condition: None,
            filter_level: None,
            rule: RedistributionRule::default(),
            krylov: KrylovConfig::default(),
            lrd: LrdConfig::default(),
            kappa: IterativeConfig::default(),
            checkpoints: Checkpoints::default(),
            density_at_target: false,
            event_log: None,
        }
    }
}

impl BenchConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct SetupTimings {
    pub embed_seconds: f64,
    pub lrd_seconds: f64,
    pub index_seconds: f64,
    pub total_seconds: f64,
}

/// Embedding, decomposition and pair index for `h0`, timed per phase.
pub fn run_setup(
    h0: &WeightedGraph,
    krylov: &KrylovConfig,
    lrd: &LrdConfig,
    seed: u64,
) -> Result<(SetupArtifact, SetupTimings)> {
    let t0 = Instant::now();
    let embedder = build_embedder(h0, krylov, seed)?;
    let t1 = Instant::now();
    let hierarchy = lrd_decompose(h0, &embedder, lrd)?;
    let t2 = Instant::now();
    let index = build_pair_index(h0, &hierarchy)?;
    let t3 = Instant::now();
    let timings = SetupTimings {
        embed_seconds: (t1 - t0).as_secs_f64(),
        lrd_seconds: (t2 - t1).as_secs_f64(),
        index_seconds: (t3 - t2).as_secs_f64(),
        total_seconds: (t3 - t0).as_secs_f64(),
    };
    let art = SetupArtifact {
        graph: h0.clone(),
        embedder,
        hierarchy,
        index,
    };
    Ok((art, timings))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct DecisionCounts {
    pub inserted: usize,
    pub merged: usize,
    pub redistributed: usize,
}

impl DecisionCounts {
    pub fn tally(events: &[EdgeEvent]) -> Self {
        let mut c = DecisionCounts::default();
        for ev in events {
            match ev.decision {
                Decision::Inserted => c.inserted += 1,
                Decision::MergedInto { .. } => c.merged += 1,
                Decision::Redistributed { .. } => c.redistributed += 1,
            }
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub batch_size: usize,
    pub events: DecisionCounts,
    /// Extra density of the sparsifier after this batch.
    pub density: f64,
    pub update_seconds: f64,
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelPoint {
    pub level: usize,
    pub density: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomPoint {
    pub edges: usize,
    pub density: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityAtTarget {
    pub target: f64,
    pub sweep: Vec<LevelPoint>,
    /// Sparsest filter level meeting the target.
    pub ingrass: Option<LevelPoint>,
    /// Fewest random stream edges meeting the target, found by bisection.
    pub random: Option<RandomPoint>,
}

impl DensityAtTarget {
    /// `random.density / ingrass.density` when both reached the target.
    pub fn ratio(&self) -> Option<f64> {
        match (self.ingrass, self.random) {
            (Some(a), Some(b)) if a.density > 0.0 => Some(b.density / a.density),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRun {
    pub case_name: String,
    pub n: usize,
    /// Edges of the final graph `G`.
    pub m: usize,
    pub initial_density: f64,
    /// Extra density of `H0` plus every stream edge.
    pub final_density_all_edges: f64,
    pub kappa_initial: Option<f64>,
    pub kappa_no_update: Option<f64>,
    pub kappa_after: Option<f64>,
    pub target_condition: Option<f64>,
    pub filter_level: Option<usize>,
    pub final_density: Option<f64>,
    pub stream_edges: usize,
    pub setup: SetupTimings,
    pub iterations: Vec<IterationRecord>,
    pub density_at_target: Option<DensityAtTarget>,
    pub config: BenchConfig,
    /// Set when the run stopped early.
    pub failure: Option<String>,
}

impl BenchRun {
    fn new(cfg: &BenchConfig) -> Self {
        BenchRun {
            case_name: cfg.case_name.clone(),
            n: 0,
            m: 0,
            initial_density: 0.0,
            final_density_all_edges: 0.0,
            kappa_initial: None,
            kappa_no_update: None,
            kappa_after: None,
            target_condition: None,
            filter_level: None,
            final_density: None,
            stream_edges: 0,
            setup: SetupTimings::default(),
            iterations: Vec::new(),
            density_at_target: None,
            config: cfg.clone(),
            failure: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.into()))
    }

    /// Copy with every wall-clock field zeroed, for determinism checks.
    pub fn without_timings(&self) -> BenchRun {
        let mut r = self.clone();
        r.setup = SetupTimings::default();
        r.iterations.iter_mut().for_each(|it| it.update_seconds = 0.0);
        r
    }
}

/// Error from [`run_pipeline`] with everything measured before it.
#[derive(Debug, thiserror::Error)]
#[error("{source}")]
pub struct PipelineFailure {
    pub partial: Box<BenchRun>,
    #[source]
    pub source: Error,
}

/// One summary row per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub case_name: String,
    pub n: usize,
    pub m: usize,
    pub initial_density: f64,
    pub final_density_all_edges: f64,
    pub kappa_initial: Option<f64>,
    pub kappa_no_update: Option<f64>,
    pub kappa_after: Option<f64>,
    pub final_density: Option<f64>,
    pub filter_level: Option<usize>,
    pub setup_seconds: f64,
    pub update_seconds: f64,
    pub ingrass_density_at_target: Option<f64>,
    pub random_density_at_target: Option<f64>,
    pub failed: bool,
}

impl From<&BenchRun> for SummaryRow {
    fn from(r: &BenchRun) -> Self {
        let dat = r.density_at_target.as_ref();
        SummaryRow {
            case_name: r.case_name.clone(),
            n: r.n,
            m: r.m,
            initial_density: r.initial_density,
            final_density_all_edges: r.final_density_all_edges,
            kappa_initial: r.kappa_initial,
            kappa_no_update: r.kappa_no_update,
            kappa_after: r.kappa_after,
            final_density: r.final_density,
            filter_level: r.filter_level,
            setup_seconds: r.setup.total_seconds,
            update_seconds: r.iterations.iter().map(|it| it.update_seconds).sum(),
            ingrass_density_at_target: dat.and_then(|d| d.ingrass).map(|p| p.density),
            random_density_at_target: dat.and_then(|d| d.random).map(|p| p.density),
            failed: r.failure.is_some(),
        }
    }
}

pub fn write_summary_csv<W: Write>(runs: &[BenchRun], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in runs {
        w.serialize(SummaryRow::from(r)).map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}

/// `kappa` from a report, accepting the best estimate of a run that did not
/// converge.
pub fn kappa_of(res: Result<SimilarityReport>) -> Result<f64> {
    match res {
        Ok(r) => Ok(r.kappa),
        Err(Error::NoConvergence(r)) => Ok(r.kappa),
        Err(e) => Err(e),
    }
}

struct Inputs {
    g0: WeightedGraph,
    g: WeightedGraph,
    h0: WeightedGraph,
    stream: Vec<Batch>,
}

fn stream_size(n: usize, initial: f64, iterations: usize, growth: f64) -> Result<usize> {
    if !(growth > 1.0) || iterations == 0 {
        return Err(Error::Config(
            "stream needs at least one iteration and density growth above 1".into(),
        ));
    }
    let total = initial * (growth - 1.0) * n as f64;
    Ok(((total / iterations as f64).round() as usize).max(1))
}

fn remove_edges(g: &WeightedGraph, stream: &[Batch]) -> Result<WeightedGraph> {
    let mut drop = vec![false; g.n_edges()];
    for &(u, v, _) in stream.iter().flatten() {
        match g.find_edge(u, v) {
            Some(id) if !drop[id] => drop[id] = true,
            _ => {
                return Err(Error::Config(format!(
                    "stream edge ({u}, {v}) is not a distinct edge of the graph"
                )))
            }
        }
    }
    let edges = g.edges().iter().zip(&drop).filter(|(_, &d)| !d).map(|(e, _)| *e).collect();
    Ok(WeightedGraph::from_sorted_edges(g.n_nodes(), edges))
}

fn initial_sparsifier(cfg: &BenchConfig, g: &WeightedGraph) -> Result<WeightedGraph> {
    let h0 = match &cfg.initial_sparsifier {
        Some(path) => load_matrix_market(path)?,
        None => {
            let n = g.n_nodes();
            let sc = SparsifierConfig::from_extra_density(n, cfg.initial_extra_density, cfg.seed, cfg.baseline);
            if cfg.baseline == Strategy::TreePlusDistortion {
                let emb = build_embedder(g, &cfg.krylov, cfg.seed)?;
                baseline_sparsify(g, &sc, &emb)?
            } else {
                baseline_sparsify(g, &sc, &TreeResistance::new(g)?)?
            }
        }
    };
    if h0.n_nodes() != g.n_nodes() {
        return Err(Error::NodeSetMismatch(g.n_nodes(), h0.n_nodes()));
    }
    h0.ensure_connected()?;
    Ok(h0)
}

fn prepare(cfg: &BenchConfig) -> Result<Inputs> {
    let graph = cfg.graph.build()?;
    let n = graph.n_nodes();
    let seed = cfg.seed;
    match cfg.stream {
        StreamSpec::MissingEdges {
            iterations,
            density_growth,
        } => {
            let h0 = initial_sparsifier(cfg, &graph)?;
            let per = stream_size(n, extra_density(&h0), iterations, density_growth)?;
            let stream = synth_stream(&graph, &h0, iterations, per, seed)?;
            let g0 = remove_edges(&graph, &stream)?;
            Ok(Inputs {
                g0,
                g: graph,
                h0,
                stream,
            })
        }
        StreamSpec::NonEdges {
            iterations,
            density_growth,
            weight,
        } => {
            let h0 = initial_sparsifier(cfg, &graph)?;
            let per = stream_size(n, extra_density(&h0), iterations, density_growth)?;
            let stream = synth_stream_non_edges(&graph, iterations, per, weight, seed)?;
            let g = graph.with_added_edges(stream.iter().flatten().copied())?;
            Ok(Inputs {
                g0: graph,
                g,
                h0,
                stream,
            })
        }
        StreamSpec::File {
            ref path,
            graph_includes_stream,
        } => {
            let stream = read_stream(path)?;
            if graph_includes_stream {
                let g0 = remove_edges(&graph, &stream)?;
                g0.ensure_connected()?;
                let h0 = initial_sparsifier(cfg, &g0)?;
                Ok(Inputs {
                    g0,
                    g: graph,
                    h0,
                    stream,
                })
            } else {
                let h0 = initial_sparsifier(cfg, &graph)?;
                let g = graph.with_added_edges(stream.iter().flatten().copied())?;
                Ok(Inputs {
                    g0: graph,
                    g,
                    h0,
                    stream,
                })
            }
        }
    }
}

fn write_events(out: &mut Option<BufWriter<File>>, events: &[EdgeEvent]) -> Result<()> {
    if let Some(w) = out {
        for ev in events {
            serde_json::to_writer(&mut *w, ev).map_err(|e| Error::Io(e.into()))?;
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Runs the whole experiment described by `cfg`.
///
/// Setup runs once on `H0`; every batch then goes through the update phase
/// in stream order. On error the measurements gathered so far are returned
/// inside [`PipelineFailure`] with `failure` set.
pub fn run_pipeline(cfg: &BenchConfig) -> std::result::Result<BenchRun, PipelineFailure> {
    let mut run = BenchRun::new(cfg);
    match pipeline(cfg, &mut run) {
        Ok(()) => Ok(run),
        Err(e) => {
            run.failure = Some(e.to_string());
            Err(PipelineFailure {
                partial: Box::new(run),
                source: e,
            })
        }
    }
}

fn pipeline(cfg: &BenchConfig, run: &mut BenchRun) -> Result<()> {
    let Inputs { g0, g, h0, stream } = prepare(cfg)?;
    let all: Batch = stream.iter().flatten().copied().collect();
    run.n = g.n_nodes();
    run.m = g.n_edges();
    run.stream_edges = all.len();
    run.initial_density = extra_density(&h0);
    run.final_density_all_edges = run.initial_density + all.len() as f64 / run.n as f64;

    let kappa0 = kappa_of(condition_number(&g0, &h0, &cfg.kappa))?;
    run.kappa_initial = Some(kappa0);
    run.kappa_no_update = Some(kappa_of(condition_number(&g, &h0, &cfg.kappa))?);
    let target = cfg.target_condition.unwrap_or(kappa0.max(2.0));
    run.target_condition = Some(target);

    let (art, timings) = run_setup(&h0, &cfg.krylov, &cfg.lrd, cfg.seed)?;
    run.setup = timings;
    let levels = art.hierarchy.levels();
    let fresh = |level: Option<usize>| -> Result<SparsifierState> {
        let mut s = SparsifierState::new(&h0, art.hierarchy.clone(), art.index.clone(), target)?
            .with_rule(cfg.rule);
        if let Some(l) = level {
            s.set_filter_level(l)?;
        }
        Ok(s)
    };
    let mut state = fresh(cfg.filter_level)?;
    run.filter_level = Some(state.filter_level());

    let mut log = cfg.event_log.as_ref().map(File::create).transpose()?.map(BufWriter::new);
    let mut g_t = g0.clone();
    for (i, batch) in stream.iter().enumerate() {
        let t = Instant::now();
        let events = state.ingrass_update(batch)?;
        let update_seconds = t.elapsed().as_secs_f64();
        write_events(&mut log, &events)?;
        let h = state.to_graph();
        let kappa = if cfg.checkpoints == Checkpoints::Every {
            g_t = g_t.with_added_edges(batch.iter().copied())?;
            Some(kappa_of(condition_number(&g_t, &h, &cfg.kappa))?)
        } else {
            None
        };
        run.iterations.push(IterationRecord {
            iteration: i + 1,
            batch_size: batch.len(),
            events: DecisionCounts::tally(&events),
            density: extra_density(&h),
            update_seconds,
            kappa,
        });
    }
    if let Some(w) = log.as_mut() {
        w.flush()?;
    }
    let h = state.to_graph();
    run.final_density = Some(extra_density(&h));
    run.kappa_after = match cfg.checkpoints {
        Checkpoints::None => None,
        Checkpoints::Every => run.iterations.last().and_then(|it| it.kappa),
        Checkpoints::Final => Some(kappa_of(condition_number(&g, &h, &cfg.kappa))?),
    };

    if cfg.density_at_target {
        let mut sweep = Vec::with_capacity(levels);
        for level in 1..=levels {
            let mut s = fresh(Some(level))?;
            for batch in &stream {
                s.ingrass_update(batch)?;
            }
            let h = s.to_graph();
            sweep.push(LevelPoint {
                level,
                density: extra_density(&h),
                kappa: kappa_of(condition_number(&g, &h, &cfg.kappa))?,
            });
        }
        let ingrass = sweep
            .iter()
            .filter(|p| p.kappa <= target)
            .min_by(|a, b| a.density.total_cmp(&b.density).then(a.level.cmp(&b.level)))
            .copied();
        let random = random_at_target(&g, &h0, &all, target, cfg)?;
        run.density_at_target = Some(DensityAtTarget {
            target,
            sweep,
            ingrass,
            random,
        });
    }
    Ok(())
}

fn random_at_target(
    g: &WeightedGraph,
    h0: &WeightedGraph,
    all: &[(usize, usize, f64)],
    target: f64,
    cfg: &BenchConfig,
) -> Result<Option<RandomPoint>> {
    let point = |count: usize| -> Result<RandomPoint> {
        let h = random_include_count(h0, all, count, cfg.seed)?;
        Ok(RandomPoint {
            edges: count,
            density: extra_density(&h),
            kappa: kappa_of(condition_number(g, &h, &cfg.kappa))?,
        })
    };
    let full = point(all.len())?;
    if full.kappa > target {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0usize, all.len());
    let mut best = full;
    // invariant: count `hi` meets the target, count `lo` is untested or fails
    let start = point(0)?;
    if start.kappa <= target {
        return Ok(Some(start));
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let p = point(mid)?;
        if p.kappa <= target {
            hi = mid;
            best = p;
        } else {
            lo = mid;
        }
    }
    Ok(Some(best))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScalingConfig {
    pub krylov: KrylovConfig,
    pub lrd: LrdConfig,
    /// Random non-edges pushed through the update phase per size.
    pub stream_edges: usize,
    pub target_condition: f64,
    pub seed: u64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            krylov: KrylovConfig::default(),
            lrd: LrdConfig::default(),
            stream_edges: 4096,
            target_condition: 100.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub requested: usize,
    pub n: usize,
    pub m: usize,
    /// Occurrence of this size so far in the size list, from 0.
    pub repetition: usize,
    pub embed_seconds: f64,
    pub lrd_seconds: f64,
    pub index_seconds: f64,
    pub setup_seconds: f64,
    pub update_edges: usize,
    pub update_seconds: f64,
    pub per_edge_seconds: f64,
}

impl ScalingRow {
    pub const HEADER: [&'static str; 11] = [
        "requested",
        "n",
        "m",
        "repetition",
        "embed_seconds",
        "lrd_seconds",
        "index_seconds",
        "setup_seconds",
        "update_edges",
        "update_seconds",
        "per_edge_seconds",
    ];
}

/// The 6-regular triangulated torus closest to `n` nodes.
pub fn scaling_graph(n: usize) -> Result<WeightedGraph> {
    if n < 9 {
        return Err(Error::Config(format!("scaling size {n} is below 9")));
    }
    let rows = (n as f64).sqrt().floor() as usize;
    Ok(gen::triangulated_torus(rows, n / rows))
}

/// Setup and update timings on a triangulated torus of each size, which
/// serves as its own initial sparsifier.
pub fn scaling_bench(sizes: &[usize], cfg: &ScalingConfig) -> Result<Vec<ScalingRow>> {
    let mut rows = Vec::with_capacity(sizes.len());
    for (i, &size) in sizes.iter().enumerate() {
        let repetition = sizes[..i].iter().filter(|&&s| s == size).count();
        let h0 = scaling_graph(size)?;
        let seed = cfg.seed.wrapping_add(repetition as u64);
        let stream = synth_stream_non_edges(&h0, 1, cfg.stream_edges.max(1), 1.0, seed)?;
        let (art, setup) = run_setup(&h0, &cfg.krylov, &cfg.lrd, seed)?;
        let mut state = SparsifierState::from_setup(art, cfg.target_condition)?;
        let t = Instant::now();
        state.ingrass_update(&stream[0])?;
        let update_seconds = t.elapsed().as_secs_f64();
        let k = stream[0].len();
        rows.push(ScalingRow {
            requested: size,
            n: h0.n_nodes(),
            m: h0.n_edges(),
            repetition,
            embed_seconds: setup.embed_seconds,
            lrd_seconds: setup.lrd_seconds,
            index_seconds: setup.index_seconds,
            setup_seconds: setup.total_seconds,
            update_edges: k,
            update_seconds,
            per_edge_seconds: update_seconds / k as f64,
        });
    }
    Ok(rows)
}

pub fn write_scaling_csv<W: Write>(rows: &[ScalingRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(ScalingRow::HEADER).map_err(|e| Error::Io(e.into()))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}
