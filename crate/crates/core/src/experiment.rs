//! Experiment runner: sweeps, seeds and schemes in, CSV rows out.
//!
//! An experiment file is TOML:
//!
//! ```toml
//! base_config = "paper.toml"      # or an inline [params] table
//! seeds = [1, 2, 3]
//! schemes = ["random", "greedy_local", "improved_fa"]
//! clustering = "hcg"              # hcg | singletons | whole_set
//! output = "results.csv"
//!
//! [sweep]
//! axis = "capacity"               # capacity (GB) | zipf_eta | social_delta | none
//! values = [10, 20, 30]
//!
//! [fa]
//! population = 30
//! max_iters = 200
//! ```
//!
//! Paths are resolved against the directory of the experiment file.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{exhaustive_optimal, greedy_local, random_caching, SchemeId, DEFAULT_EXHAUSTIVE_CAP};
use crate::cache::{evaluate_per_request, feasible, EvalResult, Evaluator};
use crate::error::{invalid, Error, Result};
use crate::firefly::{run_fa, FaConfig};
use crate::hcg::{is_individually_stable, run_hcg, HcgConfig};
use crate::matrix::CacheMatrix;
use crate::params::{units, SystemParams};
use crate::partition::Partition;
use crate::radio::LinkRateTable;
use crate::rng::{derive_seed, TAG_FA, TAG_HCG, TAG_RANDOM_CACHING};
use crate::scenario::{generate_scenario, Scenario};
use crate::social::build_social_graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clustering {
    #[default]
    Hcg,
    Singletons,
    WholeSet,
}

impl Clustering {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Hcg => "hcg",
            Self::Singletons => "singletons",
            Self::WholeSet => "whole_set",
        }
    }
}

impl std::str::FromStr for Clustering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hcg" => Ok(Self::Hcg),
            "singletons" => Ok(Self::Singletons),
            "whole_set" => Ok(Self::WholeSet),
            _ => Err(invalid(format!("unknown clustering `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Cache capacity, values in GB.
    Capacity,
    ZipfEta,
    SocialDelta,
    #[default]
    None,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl Sweep {
    /// Parameters for each sweep point (a single point without an axis).
    pub fn points(&self, base: &SystemParams) -> Result<Vec<SystemParams>> {
        if self.axis == SweepAxis::None {
            return Ok(vec![base.clone()]);
        }
        if self.values.is_empty() {
            return Err(invalid("sweep has an axis but no values"));
        }
        self.values
            .iter()
            .map(|&v| {
                if !v.is_finite() || v < 0.0 {
                    return Err(invalid(format!("sweep value {v} is not a finite non-negative number")));
                }
                let mut p = base.clone();
                match self.axis {
                    SweepAxis::Capacity => p.capacity = units::gb_to_bits(v),
                    SweepAxis::ZipfEta => p.zipf_eta = v,
                    SweepAxis::SocialDelta => p.social_delta = v,
                    SweepAxis::None => unreachable!(),
                }
                p.validate()?;
                Ok(p)
            })
            .collect()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    base_config: Option<PathBuf>,
    params: Option<SystemParams>,
    seeds: Vec<u64>,
    schemes: Vec<SchemeId>,
    #[serde(default)]
    clustering: Clustering,
    #[serde(default)]
    record_timing: bool,
    exhaustive_cap: Option<usize>,
    output: Option<PathBuf>,
    #[serde(default)]
    sweep: Sweep,
    #[serde(default)]
    hcg: HcgConfig,
    #[serde(default)]
    fa: FaConfig,
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub params: SystemParams,
    pub seeds: Vec<u64>,
    pub schemes: Vec<SchemeId>,
    pub clustering: Clustering,
    pub sweep: Sweep,
    /// Fill `wall_ms`; off by default so reruns give identical files.
    pub record_timing: bool,
    pub exhaustive_cap: usize,
    pub output: Option<PathBuf>,
    /// Template for the clustering game; its seed is derived per run.
    pub hcg: HcgConfig,
    /// Template for the firefly search; its seed is derived per run.
    pub fa: FaConfig,
}

impl ExperimentSpec {
    pub fn new(params: SystemParams, seeds: Vec<u64>, schemes: Vec<SchemeId>) -> Self {
        Self {
            params,
            seeds,
            schemes,
            clustering: Clustering::Hcg,
            sweep: Sweep::default(),
            record_timing: false,
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
            output: None,
            hcg: HcgConfig::default(),
            fa: FaConfig::default(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let file: SpecFile = toml::from_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let dir = path.parent().unwrap_or(Path::new(""));
        let params = match (file.base_config, file.params) {
            (Some(_), Some(_)) => {
                return Err(Error::Config {
                    path: path.to_path_buf(),
                    message: "give either base_config or [params], not both".into(),
                })
            }
            (Some(base), None) => SystemParams::load(dir.join(base))?,
            (None, Some(p)) => p,
            (None, None) => SystemParams::default(),
        };
        let spec = Self {
            params,
            seeds: file.seeds,
            schemes: file.schemes,
            clustering: file.clustering,
            sweep: file.sweep,
            record_timing: file.record_timing,
            exhaustive_cap: file.exhaustive_cap.unwrap_or(DEFAULT_EXHAUSTIVE_CAP),
            output: file.output.map(|o| dir.join(o)),
            hcg: file.hcg,
            fa: file.fa,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(invalid("experiment needs at least one seed"));
        }
        if self.schemes.is_empty() {
            return Err(invalid("experiment needs at least one scheme"));
        }
        self.params.validate()?;
        self.fa.validate()?;
        self.sweep.points(&self.params)?;
        Ok(())
    }

    /// The same experiment at the base parameters only.
    pub fn without_sweep(&self) -> Self {
        Self {
            sweep: Sweep::default(),
            ..self.clone()
        }
    }
}

pub const CSV_HEADER: [&str; 15] = [
    "run_id",
    "seed",
    "scheme",
    "clustering",
    "C_bits",
    "eta",
    "delta",
    "mu",
    "delay_seconds",
    "energy_joules",
    "objective",
    "fa_iterations",
    "hcg_passes",
    "num_clusters",
    "wall_ms",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub run_id: u64,
    pub seed: u64,
    pub scheme: SchemeId,
    pub clustering: Clustering,
    #[serde(rename = "C_bits")]
    pub c_bits: f64,
    pub eta: f64,
    pub delta: f64,
    pub mu: f64,
    pub delay_seconds: f64,
    pub energy_joules: f64,
    pub objective: f64,
    pub fa_iterations: u64,
    pub hcg_passes: u64,
    pub num_clusters: u64,
    pub wall_ms: f64,
}

impl ResultRow {
    fn fields(&self) -> [String; 15] {
        [
            self.run_id.to_string(),
            self.seed.to_string(),
            self.scheme.to_string(),
            self.clustering.as_str().to_string(),
            self.c_bits.to_string(),
            self.eta.to_string(),
            self.delta.to_string(),
            self.mu.to_string(),
            self.delay_seconds.to_string(),
            self.energy_joules.to_string(),
            self.objective.to_string(),
            self.fa_iterations.to_string(),
            self.hcg_passes.to_string(),
            self.num_clusters.to_string(),
            self.wall_ms.to_string(),
        ]
    }
}

/// Best objective of one firefly run after each iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub run_id: u64,
    pub iteration: u64,
    pub best_objective: f64,
    pub best_delay: f64,
    pub best_energy: f64,
}

/// Clustering chosen for one (sweep value, seed) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub sweep_value: Option<f64>,
    pub seed: u64,
    pub partition: Partition,
    pub hcg_passes: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub traces: Vec<TraceRow>,
    pub cells: Vec<CellSummary>,
}

/// Scenario, rates and clustering shared by all schemes of one cell.
pub struct Instance {
    pub scenario: Scenario,
    pub rates: LinkRateTable,
    pub partition: Partition,
    pub hcg_passes: usize,
}

pub fn build_instance(params: &SystemParams, seed: u64, clustering: Clustering, hcg: &HcgConfig) -> Result<Instance> {
    let scenario = generate_scenario(params, seed)?;
    let rates = LinkRateTable::compute(&scenario);
    let m = scenario.num_faps();
    let (partition, hcg_passes) = match clustering {
        Clustering::Singletons => (Partition::singletons(m), 0),
        Clustering::WholeSet => (Partition::whole(m), 0),
        Clustering::Hcg => {
            let graph = build_social_graph(&scenario, &rates, params.social_delta)?;
            let cfg = HcgConfig {
                seed: derive_seed(seed, &[TAG_HCG]),
                ..hcg.clone()
            };
            let out = run_hcg(&graph, &cfg)?;
            (out.partition, out.passes)
        }
    };
    Ok(Instance {
        scenario,
        rates,
        partition,
        hcg_passes,
    })
}

/// Placement produced by one scheme, with the firefly history if any.
pub struct SchemeRun {
    pub placement: CacheMatrix,
    pub eval: EvalResult,
    pub history: Vec<EvalResult>,
    pub fa_iterations: usize,
}

pub fn run_scheme(
    inst: &Instance,
    scheme: SchemeId,
    seed: u64,
    fa: &FaConfig,
    exhaustive_cap: usize,
) -> Result<SchemeRun> {
    let evaluator = Evaluator::new(&inst.scenario, &inst.rates, &inst.partition);
    let simple = |placement: CacheMatrix| {
        let eval = evaluator.evaluate(&placement);
        SchemeRun {
            placement,
            eval,
            history: Vec::new(),
            fa_iterations: 0,
        }
    };
    Ok(match scheme {
        SchemeId::Random => simple(random_caching(&inst.scenario, derive_seed(seed, &[TAG_RANDOM_CACHING]))),
        SchemeId::GreedyLocal => simple(greedy_local(&inst.scenario)?),
        SchemeId::Exhaustive => {
            let (placement, eval) = exhaustive_optimal(&inst.scenario, &inst.rates, &inst.partition, exhaustive_cap)?;
            SchemeRun {
                placement,
                eval,
                history: Vec::new(),
                fa_iterations: 0,
            }
        }
        SchemeId::ImprovedFa => {
            let cfg = FaConfig {
                seed: derive_seed(seed, &[TAG_FA]),
                ..fa.clone()
            };
            let out = run_fa(&inst.scenario, &inst.rates, &inst.partition, &cfg)?;
            SchemeRun {
                placement: out.best,
                eval: out.best_eval,
                history: out.history,
                fa_iterations: out.iterations,
            }
        }
    })
}

fn objective_identity_holds(e: &EvalResult, mu: f64) -> bool {
    let expected = mu * e.delay + (1.0 - mu) * e.energy;
    (e.objective - expected).abs() <= 1e-9 * expected.abs().max(1e-300)
}

fn check_run(run: &SchemeRun, params: &SystemParams, label: &str) -> Result<()> {
    if !feasible(&run.placement, params) {
        return Err(Error::InvariantViolation(format!(
            "{label}: placement exceeds capacity"
        )));
    }
    if !objective_identity_holds(&run.eval, params.weight) {
        return Err(Error::InvariantViolation(format!(
            "{label}: objective is not mu*T + (1-mu)*E"
        )));
    }
    if run.history.windows(2).any(|w| w[1].objective > w[0].objective) {
        return Err(Error::InvariantViolation(format!(
            "{label}: best-objective history increased"
        )));
    }
    Ok(())
}

/// Runs every (sweep value, seed, scheme) cell. Rows come back ordered by
/// sweep value, then seed, then scheme as listed in the spec.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let points = spec.sweep.points(&spec.params)?;
    let cells: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|v| spec.seeds.iter().map(move |&s| (v, s)))
        .collect();

    type CellResult = (CellSummary, Vec<(ResultRow, Vec<EvalResult>)>);
    let results: Vec<CellResult> = cells
        .par_iter()
        .map(|&(v, seed)| -> Result<CellResult> {
            let params = &points[v];
            let inst = build_instance(params, seed, spec.clustering, &spec.hcg)?;
            let mut rows = Vec::with_capacity(spec.schemes.len());
            for &scheme in &spec.schemes {
                let start = Instant::now();
                let run = run_scheme(&inst, scheme, seed, &spec.fa, spec.exhaustive_cap)?;
                let wall_ms = if spec.record_timing {
                    start.elapsed().as_secs_f64() * 1e3
                } else {
                    0.0
                };
                check_run(&run, params, &format!("seed {seed}, scheme {scheme}"))?;
                let row = ResultRow {
                    run_id: 0,
                    seed,
                    scheme,
                    clustering: spec.clustering,
                    c_bits: params.capacity,
                    eta: params.zipf_eta,
                    delta: params.social_delta,
                    mu: params.weight,
                    delay_seconds: run.eval.delay,
                    energy_joules: run.eval.energy,
                    objective: run.eval.objective,
                    fa_iterations: run.fa_iterations as u64,
                    hcg_passes: inst.hcg_passes as u64,
                    num_clusters: inst.partition.len() as u64,
                    wall_ms,
                };
                rows.push((row, run.history));
            }
            let summary = CellSummary {
                sweep_value: (spec.sweep.axis != SweepAxis::None).then(|| spec.sweep.values[v]),
                seed,
                partition: inst.partition,
                hcg_passes: inst.hcg_passes,
            };
            Ok((summary, rows))
        })
        .collect::<Result<_>>()?;

    let mut out = ExperimentOutput::default();
    for (summary, rows) in results {
        out.cells.push(summary);
        for (mut row, history) in rows {
            row.run_id = out.rows.len() as u64;
            for (t, e) in history.iter().enumerate() {
                out.traces.push(TraceRow {
                    run_id: row.run_id,
                    iteration: t as u64,
                    best_objective: e.objective,
                    best_delay: e.delay,
                    best_energy: e.energy,
                });
            }
            out.rows.push(row);
        }
    }
    Ok(out)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes rows as CSV with the exact [`CSV_HEADER`]. Floats use the shortest
/// decimal representation that round-trips.
pub fn write_rows<W: Write>(rows: &[ResultRow], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    write_rows(rows, file).map_err(csv_err(path))
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err(path))
}

/// `<out>.trace.csv` next to the results file.
pub fn trace_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".trace.csv");
    out.with_file_name(name)
}

pub fn write_trace(traces: &[TraceRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    let res = (|| {
        w.write_record(["run_id", "iteration", "best_objective", "best_delay", "best_energy"])?;
        for t in traces {
            w.write_record([
                t.run_id.to_string(),
                t.iteration.to_string(),
                t.best_objective.to_string(),
                t.best_delay.to_string(),
                t.best_energy.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })();
    res.map_err(csv_err(path))
}

/// Writes the pairwise social components of a generated scenario.
pub fn dump_social<W: Write>(params: &SystemParams, seed: u64, out: W) -> Result<()> {
    let scenario = generate_scenario(params, seed)?;
    let rates = LinkRateTable::compute(&scenario);
    build_social_graph(&scenario, &rates, params.social_delta)?.write_csv(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: String, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name,
            passed,
            detail: detail.into(),
        });
    }
}

impl std::fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            let mut line = format!("[{}] {}", if c.passed { "ok" } else { "FAIL" }, c.name);
            if !c.detail.is_empty() {
                let _ = write!(line, ": {}", c.detail);
            }
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// Invariant and oracle checks for every sweep point and seed of `spec`.
pub fn verify(spec: &ExperimentSpec) -> Result<VerifyReport> {
    spec.validate()?;
    let mut report = VerifyReport::default();
    for (v, params) in spec.sweep.points(&spec.params)?.iter().enumerate() {
        for &seed in &spec.seeds {
            let tag = if spec.sweep.axis == SweepAxis::None {
                format!("seed {seed}")
            } else {
                format!("value {}, seed {seed}", spec.sweep.values[v])
            };
            let scenario = generate_scenario(params, seed)?;
            let rates = LinkRateTable::compute(&scenario);

            let worst = (0..scenario.num_users())
                .map(|u| (scenario.demand(u).iter().sum::<f64>() - 1.0).abs())
                .fold(0.0, f64::max);
            report.push(
                format!("{tag}: demand rows sum to one"),
                worst <= 1e-9,
                format!("max deviation {worst:e}"),
            );

            let graph = build_social_graph(&scenario, &rates, params.social_delta)?;
            let m_count = scenario.num_faps();
            let symmetric = (0..m_count).all(|m| (0..m_count).all(|n| graph.matrix()[m][n] == graph.matrix()[n][m]));
            report.push(format!("{tag}: social graph symmetric"), symmetric, "");

            let hcg_cfg = HcgConfig {
                seed: derive_seed(seed, &[TAG_HCG]),
                ..spec.hcg.clone()
            };
            let hcg = run_hcg(&graph, &hcg_cfg)?;
            let stable = is_individually_stable(&graph, &hcg.partition);
            let increasing = hcg.moves.iter().all(|mv| mv.potential_after > mv.potential_before);
            report.push(
                format!("{tag}: clustering individually stable"),
                stable && increasing && !hcg.truncated,
                format!("{} after {} passes", hcg.partition, hcg.passes),
            );

            let inst = build_instance(params, seed, spec.clustering, &spec.hcg)?;
            let mut placements = Vec::new();
            let mut fa_objective = None;
            for &scheme in &spec.schemes {
                if scheme == SchemeId::Exhaustive {
                    continue;
                }
                let run = run_scheme(&inst, scheme, seed, &spec.fa, spec.exhaustive_cap)?;
                report.push(
                    format!("{tag}: {scheme} feasible"),
                    feasible(&run.placement, params),
                    "",
                );
                let literal = evaluate_per_request(&inst.scenario, &inst.rates, &run.placement, &inst.partition);
                report.push(
                    format!("{tag}: {scheme} fast and per-request evaluation agree"),
                    rel_close(run.eval.delay, literal.delay, 1e-9)
                        && rel_close(run.eval.energy, literal.energy, 1e-9)
                        && rel_close(run.eval.objective, literal.objective, 1e-9),
                    format!("{} vs {}", run.eval.objective, literal.objective),
                );
                if scheme == SchemeId::ImprovedFa {
                    let monotone = run.history.windows(2).all(|w| w[1].objective <= w[0].objective);
                    report.push(format!("{tag}: firefly history non-increasing"), monotone, "");
                    fa_objective = Some(run.eval.objective);
                }
                placements.push((scheme, run.placement, run.eval.objective));
            }

            let single_part = Partition::singletons(m_count);
            let single = Evaluator::new(&inst.scenario, &inst.rates, &single_part);
            let whole_part = Partition::whole(m_count);
            let whole = Evaluator::new(&inst.scenario, &inst.rates, &whole_part);
            for (scheme, x, _) in &placements {
                let (ds, dw) = (single.evaluate(x).delay, whole.evaluate(x).delay);
                report.push(
                    format!("{tag}: {scheme} whole-set delay <= singleton delay"),
                    dw <= ds * (1.0 + 1e-12),
                    format!("{dw} vs {ds}"),
                );
            }

            if m_count * scenario.num_contents() <= spec.exhaustive_cap {
                let (_, best) = exhaustive_optimal(&inst.scenario, &inst.rates, &inst.partition, spec.exhaustive_cap)?;
                let worst_gap = placements
                    .iter()
                    .map(|(_, _, o)| o - best.objective)
                    .fold(0.0, f64::min);
                report.push(
                    format!("{tag}: exhaustive optimum dominates every scheme"),
                    worst_gap >= -1e-9 * best.objective.abs(),
                    format!(
                        "optimum {}{}",
                        best.objective,
                        fa_objective.map(|o| format!(", firefly {o}")).unwrap_or_default()
                    ),
                );
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SystemParams {
        SystemParams {
            num_faps: 4,
            num_users: 16,
            num_contents: 30,
            capacity: units::gb_to_bits(2.0),
            ..Default::default()
        }
    }

    fn fast_fa() -> FaConfig {
        FaConfig {
            population: 6,
            max_iters: 8,
            ..Default::default()
        }
    }

    #[test]
    fn cardinality() {
        let mut spec = ExperimentSpec::new(small(), vec![1], vec![SchemeId::Random]);
        assert_eq!(run_experiment(&spec).unwrap().rows.len(), 1);
        spec.seeds = vec![1, 2];
        spec.schemes = vec![SchemeId::Random, SchemeId::ImprovedFa];
        spec.fa = fast_fa();
        spec.sweep = Sweep {
            axis: SweepAxis::Capacity,
            values: vec![1.0, 2.0, 3.0],
        };
        let out = run_experiment(&spec).unwrap();
        assert_eq!(out.rows.len(), 12);
        assert_eq!(out.cells.len(), 6);
        assert!(out.rows.iter().enumerate().all(|(i, r)| r.run_id == i as u64));
        assert_eq!(out.rows[4].c_bits, units::gb_to_bits(2.0));
        assert_eq!(out.rows[5].scheme, SchemeId::ImprovedFa);
        assert_eq!(out.traces.iter().filter(|t| t.run_id == 5).count(), 9);
    }

    #[test]
    fn csv_header_and_round_trip() {
        let mut buf = Vec::new();
        write_rows(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), CSV_HEADER.join(",") + "\n");

        let mut spec = ExperimentSpec::new(small(), vec![7], vec![SchemeId::GreedyLocal]);
        spec.clustering = Clustering::WholeSet;
        let rows = run_experiment(&spec).unwrap().rows;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_csv(&rows, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.ends_with('\n') && !text.contains("e-") && !text.contains("e+"));
        assert_eq!(read_csv(&path).unwrap(), rows);
    }

    #[test]
    fn trace_path_is_sibling() {
        assert_eq!(trace_path(Path::new("out/res.csv")), PathBuf::from("out/res.trace.csv"));
    }

    #[test]
    fn sweep_validation() {
        let s = Sweep {
            axis: SweepAxis::ZipfEta,
            values: vec![],
        };
        assert!(s.points(&small()).is_err());
        let s = Sweep {
            axis: SweepAxis::Capacity,
            values: vec![-1.0],
        };
        assert!(s.points(&small()).is_err());
        let s = Sweep {
            axis: SweepAxis::None,
            values: vec![1.0, 2.0],
        };
        assert_eq!(s.points(&small()).unwrap().len(), 1);
    }

    #[test]
    fn oracle_above_cap_is_refused() {
        let spec = ExperimentSpec::new(small(), vec![1], vec![SchemeId::Exhaustive]);
        assert!(matches!(run_experiment(&spec), Err(Error::OracleTooLarge { .. })));
    }

    #[test]
    fn verify_small_instance() {
        let params = SystemParams {
            num_faps: 3,
            num_users: 9,
            num_contents: 6,
            capacity: units::gb_to_bits(1.0),
            ..Default::default()
        };
        let mut spec = ExperimentSpec::new(params, vec![1, 2], SchemeId::ALL.to_vec());
        spec.fa = fast_fa();
        let report = verify(&spec).unwrap();
        assert!(report.all_passed(), "{report}");
        assert!(report.checks.iter().any(|c| c.name.contains("exhaustive optimum")));
    }
}
