//! Running (instance, algorithm, replicate) grids and turning the archives
//! into indicator tables.
//!
//! Records keep their full archives, genotypes included, so every indicator
//! in the emitted CSVs can be recomputed from `records.json` alone.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use carbonflow_core::baselines::{brute_force_pareto, random_search, run_nsga2, Nsga2Params, BRUTE_FORCE_MAX_JOBS};
use carbonflow_core::kdma::{run_kdma, KdmaParams, ParamError, RunResult};
use carbonflow_core::metrics::{build_reference_front, Indicators, Point, ReferenceFront};
use carbonflow_core::model::{EvalConfig, Instance};

use crate::seeds::run_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgoConfig {
    Kdma(KdmaParams),
    Nsga2(Nsga2Params),
    Random { evaluations: u64, reduction: bool },
}

impl AlgoConfig {
    pub fn reduction(&self) -> bool {
        match self {
            AlgoConfig::Kdma(p) => p.use_carbon_reduction,
            AlgoConfig::Nsga2(p) => p.reduction,
            AlgoConfig::Random { reduction, .. } => *reduction,
        }
    }

    fn run(&self, instance: &Instance, seed: u64) -> Result<RunResult, ParamError> {
        match self {
            AlgoConfig::Kdma(p) => run_kdma(instance, &KdmaParams { seed, ..p.clone() }),
            AlgoConfig::Nsga2(p) => run_nsga2(instance, &Nsga2Params { seed, ..p.clone() }),
            AlgoConfig::Random { evaluations, reduction } => {
                if *evaluations == 0 {
                    return Err(ParamError::BudgetTooSmall { budget: 0, population: 1 });
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok(random_search(instance, *evaluations, EvalConfig::new(*reduction), &mut rng))
            }
        }
    }
}

/// A named algorithm configuration. Variants sharing a `seed_key` draw the
/// same run seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub label: String,
    pub seed_key: String,
    pub config: AlgoConfig,
}

impl Variant {
    pub fn new(label: impl Into<String>, config: AlgoConfig) -> Self {
        let label = label.into();
        Variant {
            seed_key: label.clone(),
            label,
            config,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchivePoint {
    pub makespan: u64,
    pub ce_total: f64,
    pub ce_idle: f64,
    pub offon_cycles: u64,
    pub genotype: Vec<Vec<usize>>,
}

impl ArchivePoint {
    pub fn objectives(&self) -> Point {
        [self.makespan as f64, self.ce_total]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicatorValues {
    pub spread: f64,
    pub gd: f64,
    pub igd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub algorithm: String,
    pub replicate: u64,
    pub run_seed: u64,
    pub evaluations: u64,
    pub runtime_ms: u64,
    /// Set when the run could not start; the archive is then empty.
    pub error: Option<String>,
    /// Sorted by makespan, then carbon.
    pub archive: Vec<ArchivePoint>,
    pub indicators: Option<IndicatorValues>,
}

impl RunRecord {
    pub fn points(&self) -> Vec<Point> {
        self.archive.iter().map(ArchivePoint::objectives).collect()
    }

    pub fn best_makespan(&self) -> Option<u64> {
        self.archive.iter().map(|a| a.makespan).min()
    }

    pub fn min_carbon(&self) -> Option<&ArchivePoint> {
        self.archive.iter().min_by(|a, b| a.ce_total.total_cmp(&b.ce_total))
    }

    /// Mean carbon over the archive.
    pub fn mean_carbon(&self) -> Option<f64> {
        if self.archive.is_empty() {
            return None;
        }
        Some(self.archive.iter().map(|a| a.ce_total).sum::<f64>() / self.archive.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub master_seed: u64,
    pub replicates: u64,
    pub instances: Vec<Instance>,
    pub variants: Vec<Variant>,
    /// Exact fronts of small instances, keyed by instance id.
    pub exact: BTreeMap<String, Vec<Point>>,
    pub records: Vec<RunRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub replicates: u64,
    pub master_seed: u64,
    pub workers: usize,
    /// Record wall-clock time; off keeps output byte-reproducible.
    pub timing: bool,
    /// Add brute-force fronts for instances of at most
    /// [`BRUTE_FORCE_MAX_JOBS`] jobs.
    pub exact_fronts: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            replicates: 10,
            master_seed: 1,
            workers: 1,
            timing: false,
            exact_fronts: true,
        }
    }
}

fn execute(instance: &Instance, variant: &Variant, replicate: u64, opts: &RunOptions) -> RunRecord {
    let seed = run_seed(opts.master_seed, instance.id(), &variant.seed_key, replicate);
    let started = Instant::now();
    let result = variant.config.run(instance, seed);
    let runtime_ms = if opts.timing { started.elapsed().as_millis() as u64 } else { 0 };
    let mut record = RunRecord {
        instance: instance.id().to_string(),
        algorithm: variant.label.clone(),
        replicate,
        run_seed: seed,
        evaluations: 0,
        runtime_ms,
        error: None,
        archive: Vec::new(),
        indicators: None,
    };
    match result {
        Ok(res) => {
            record.evaluations = res.stats.evaluations;
            record.archive = res
                .archive
                .sorted()
                .into_iter()
                .map(|(g, p)| ArchivePoint {
                    makespan: p.makespan,
                    ce_total: p.ce_total,
                    ce_idle: p.ce_idle,
                    offon_cycles: p.offon_cycles,
                    genotype: g.sequences().to_vec(),
                })
                .collect();
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("worker pool")
}

/// Run every variant `replicates` times on every instance. Output order is
/// (instance, variant, replicate) regardless of the worker count.
pub fn run_experiment(instances: Vec<Instance>, variants: Vec<Variant>, opts: &RunOptions) -> Experiment {
    let mut jobs = Vec::new();
    for (i, _) in instances.iter().enumerate() {
        for (v, _) in variants.iter().enumerate() {
            for r in 0..opts.replicates {
                jobs.push((i, v, r));
            }
        }
    }
    let reduction = variants.iter().any(|v| v.config.reduction());
    let workers = pool(opts.workers);
    let (records, exact) = workers.install(|| {
        let records: Vec<RunRecord> = jobs
            .par_iter()
            .map(|&(i, v, r)| execute(&instances[i], &variants[v], r, opts))
            .collect();
        let exact: BTreeMap<String, Vec<Point>> = if opts.exact_fronts {
            instances
                .par_iter()
                .filter(|inst| inst.num_jobs() <= BRUTE_FORCE_MAX_JOBS)
                .map(|inst| {
                    let front = brute_force_pareto(inst, EvalConfig::new(reduction)).expect("guarded size");
                    (inst.id().to_string(), front.points())
                })
                .collect()
        } else {
            BTreeMap::new()
        };
        (records, exact)
    });
    let mut exp = Experiment {
        master_seed: opts.master_seed,
        replicates: opts.replicates,
        instances,
        variants,
        exact,
        records,
    };
    exp.compute_indicators();
    exp
}

/// Mean of a slice, `None` when empty.
pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

impl Experiment {
    pub fn instance(&self, id: &str) -> Option<&Instance> {
        self.instances.iter().find(|i| i.id() == id)
    }

    pub fn records_for<'a>(&'a self, instance: &'a str) -> impl Iterator<Item = &'a RunRecord> + 'a {
        self.records.iter().filter(move |r| r.instance == instance)
    }

    /// Shared reference front of one instance: every run's archive plus the
    /// exact front when known.
    pub fn reference_front(&self, instance: &str) -> Option<ReferenceFront> {
        let archives: Vec<Vec<Point>> = self.records_for(instance).map(RunRecord::points).collect();
        let exact = self.exact.get(instance).map(Vec::as_slice);
        build_reference_front(archives.iter().map(Vec::as_slice), exact)
    }

    /// Recompute every record's indicators from archives and reference fronts.
    pub fn compute_indicators(&mut self) {
        let refs: BTreeMap<String, Option<ReferenceFront>> = self
            .instances
            .iter()
            .map(|i| (i.id().to_string(), self.reference_front(i.id())))
            .collect();
        for rec in &mut self.records {
            let reference = refs.get(&rec.instance).and_then(Option::as_ref);
            rec.indicators = reference.and_then(|r| {
                Indicators::compute(&rec.points(), r).ok().map(|ind| IndicatorValues {
                    spread: ind.spread,
                    gd: ind.gd,
                    igd: ind.igd,
                })
            });
        }
    }

    pub fn labels(&self) -> Vec<String> {
        self.variants.iter().map(|v| v.label.clone()).collect()
    }

    /// Per-instance mean of `metric` over replicates, for one algorithm.
    pub fn instance_means(&self, label: &str, metric: Metric) -> Vec<(String, f64)> {
        self.instances
            .iter()
            .filter_map(|inst| {
                let vals: Vec<f64> = self
                    .records_for(inst.id())
                    .filter(|r| r.algorithm == label)
                    .filter_map(|r| metric.of(r))
                    .collect();
                mean(&vals).map(|m| (inst.id().to_string(), m))
            })
            .collect()
    }

    /// Mean of `metric` over every run of one algorithm.
    pub fn overall_mean(&self, label: &str, metric: Metric) -> Option<f64> {
        let vals: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.algorithm == label)
            .filter_map(|r| metric.of(r))
            .collect();
        mean(&vals)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Spread,
    Gd,
    Igd,
    MeanCarbon,
}

impl Metric {
    pub fn of(self, r: &RunRecord) -> Option<f64> {
        match self {
            Metric::Spread => r.indicators.map(|i| i.spread),
            Metric::Gd => r.indicators.map(|i| i.gd),
            Metric::Igd => r.indicators.map(|i| i.igd),
            Metric::MeanCarbon => r.mean_carbon(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Spread => "spread",
            Metric::Gd => "gd",
            Metric::Igd => "igd",
            Metric::MeanCarbon => "carbon",
        }
    }
}

pub const RESULTS_HEADER: &str =
    "instance,algorithm,seed,evals,best_makespan,best_ce,spread,gd,igd,offon_cycles,runtime_ms";

fn fixed(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:.6}"))
}

/// One row per run; the seed column holds the replicate index.
pub fn results_csv(exp: &Experiment) -> String {
    let mut s = String::from(RESULTS_HEADER);
    s.push('\n');
    for r in &exp.records {
        let best = r.min_carbon();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.instance,
            r.algorithm,
            r.replicate,
            r.evaluations,
            r.best_makespan().map_or_else(String::new, |m| m.to_string()),
            fixed(best.map(|b| b.ce_total)),
            fixed(r.indicators.map(|i| i.spread)),
            fixed(r.indicators.map(|i| i.gd)),
            fixed(r.indicators.map(|i| i.igd)),
            best.map_or(0, |b| b.offon_cycles),
            r.runtime_ms,
        );
    }
    s
}

/// Per (F, m, n) combination means of `metric`, one column per algorithm,
/// with a final `Mean` row over the combination rows.
pub fn mean_table(exp: &Experiment, metric: Metric) -> String {
    let labels = exp.labels();
    let mut s = String::from("F,m,n");
    for l in &labels {
        s.push(',');
        s.push_str(l);
    }
    s.push('\n');
    let mut groups: BTreeMap<(usize, usize, usize), Vec<&str>> = BTreeMap::new();
    for inst in &exp.instances {
        groups
            .entry((inst.num_factories(), inst.num_machines(), inst.num_jobs()))
            .or_default()
            .push(inst.id());
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); labels.len()];
    let mut rows = 0;
    for (&(f, m, n), ids) in &groups {
        let cells: Vec<Option<f64>> = labels
            .iter()
            .map(|l| {
                let vals: Vec<f64> = exp
                    .records
                    .iter()
                    .filter(|r| &r.algorithm == l && ids.contains(&r.instance.as_str()))
                    .filter_map(|r| metric.of(r))
                    .collect();
                mean(&vals)
            })
            .collect();
        if cells.iter().all(Option::is_none) {
            continue;
        }
        rows += 1;
        let _ = write!(s, "{f},{m},{n}");
        for (col, cell) in columns.iter_mut().zip(&cells) {
            let _ = write!(s, ",{}", fixed(*cell));
            if let Some(v) = cell {
                col.push(*v);
            }
        }
        s.push('\n');
    }
    if rows > 0 {
        s.push_str("Mean,,");
        for col in &columns {
            let _ = write!(s, ",{}", fixed(mean(col)));
        }
        s.push('\n');
    }
    s
}
