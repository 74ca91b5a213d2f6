//! Problem data, schedule decoding and the bi-objective evaluation.
//!
//! A genotype is decoded factory by factory with the classic permutation
//! flow-shop recursion: the first job on the first machine starts at zero,
//! the first machine and the first job form simple chains, and every other
//! operation starts at `max(left, above)`. Makespan is the largest
//! last-machine completion over all factories.
//!
//! Carbon is split into three parts. Processing and auxiliary emissions only
//! depend on processing times, which are identical in every factory, so they
//! are instance constants. Idle emissions depend on the schedule and are the
//! only part the optional off/on strategy can reduce.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::{Genotype, JobId, Violation};

/// Integer time units.
pub type Time = u64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("instance needs at least one factory")]
    NoFactories,
    #[error("instance needs at least one job")]
    NoJobs,
    #[error("instance needs at least one machine")]
    NoMachines,
    #[error("{table} row {row}: expected {expected} values, found {found}")]
    RaggedRow {
        table: &'static str,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{table} has {found} rows, expected {expected}")]
    RowCount {
        table: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("processing time of job {job} on machine {machine} must be at least 1")]
    ZeroProcessingTime { job: JobId, machine: usize },
    #[error("{0} must be a non-negative number")]
    Negative(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid genotype: {0}")]
    InvalidGenotype(#[from] Violation),
}

/// Scalar emission coefficients shared by all factories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    /// Idle power draw of a machine, energy per time unit.
    pub idle_power: f64,
    /// Carbon per unit of electrical energy.
    pub elec_coeff: f64,
    /// Auxiliary-material carbon per processing time unit, one value per machine.
    pub aux_coeff: Vec<f64>,
    /// Carbon released by one off/on cycle of a machine.
    pub offon_emission: f64,
    /// Minimum idle gap for which an off/on cycle is possible.
    pub offon_time: f64,
}

impl Coefficients {
    /// Default constants with all auxiliary coefficients set to `aux`.
    pub fn standard(machines: usize, aux: f64) -> Self {
        Coefficients {
            idle_power: 2.0,
            elec_coeff: 0.581,
            aux_coeff: vec![aux; machines],
            offon_emission: 6.0,
            offon_time: 3.0,
        }
    }

    /// Every coefficient zero; handy for makespan-only checks.
    pub fn zero(machines: usize) -> Self {
        Coefficients {
            idle_power: 0.0,
            elec_coeff: 0.0,
            aux_coeff: vec![0.0; machines],
            offon_emission: 0.0,
            offon_time: 0.0,
        }
    }
}

#[derive(Deserialize)]
struct InstanceRepr {
    id: String,
    factories: usize,
    proc_time: Vec<Vec<Time>>,
    proc_power: Vec<Vec<f64>>,
    coefficients: Coefficients,
}

impl TryFrom<InstanceRepr> for Instance {
    type Error = InstanceError;

    fn try_from(r: InstanceRepr) -> Result<Self, Self::Error> {
        Instance::new(r.id, r.factories, r.proc_time, r.proc_power, r.coefficients)
    }
}

/// An energy-efficient distributed homogeneous flow-shop instance.
///
/// `n` jobs, `m` machines per factory and `F` identical factories. Immutable
/// once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr")]
pub struct Instance {
    id: String,
    factories: usize,
    proc_time: Vec<Vec<Time>>,
    proc_power: Vec<Vec<f64>>,
    coefficients: Coefficients,
}

impl Instance {
    pub fn new(
        id: impl Into<String>,
        factories: usize,
        proc_time: Vec<Vec<Time>>,
        proc_power: Vec<Vec<f64>>,
        coefficients: Coefficients,
    ) -> Result<Self, InstanceError> {
        if factories == 0 {
            return Err(InstanceError::NoFactories);
        }
        let n = proc_time.len();
        if n == 0 {
            return Err(InstanceError::NoJobs);
        }
        let m = proc_time[0].len();
        if m == 0 {
            return Err(InstanceError::NoMachines);
        }
        for (row, times) in proc_time.iter().enumerate() {
            if times.len() != m {
                return Err(InstanceError::RaggedRow {
                    table: "P",
                    row,
                    expected: m,
                    found: times.len(),
                });
            }
            if let Some(machine) = times.iter().position(|&p| p == 0) {
                return Err(InstanceError::ZeroProcessingTime { job: row, machine });
            }
        }
        if proc_power.len() != n {
            return Err(InstanceError::RowCount {
                table: "PP",
                expected: n,
                found: proc_power.len(),
            });
        }
        for (row, powers) in proc_power.iter().enumerate() {
            if powers.len() != m {
                return Err(InstanceError::RaggedRow {
                    table: "PP",
                    row,
                    expected: m,
                    found: powers.len(),
                });
            }
            if powers.iter().any(|&v| !(v >= 0.0)) {
                return Err(InstanceError::Negative("PP"));
            }
        }
        let c = &coefficients;
        if c.aux_coeff.len() != m {
            return Err(InstanceError::RaggedRow {
                table: "AUX",
                row: 0,
                expected: m,
                found: c.aux_coeff.len(),
            });
        }
        let non_negative = |v: f64| v >= 0.0;
        if !non_negative(c.idle_power) {
            return Err(InstanceError::Negative("SP"));
        }
        if !non_negative(c.elec_coeff) {
            return Err(InstanceError::Negative("ELEC"));
        }
        if !c.aux_coeff.iter().all(|&v| non_negative(v)) {
            return Err(InstanceError::Negative("AUX"));
        }
        if !non_negative(c.offon_emission) {
            return Err(InstanceError::Negative("CE_OFFON"));
        }
        if !non_negative(c.offon_time) {
            return Err(InstanceError::Negative("T_OFFON"));
        }
        Ok(Instance {
            id: id.into(),
            factories,
            proc_time,
            proc_power,
            coefficients,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn num_factories(&self) -> usize {
        self.factories
    }

    pub fn num_machines(&self) -> usize {
        self.proc_time[0].len()
    }

    pub fn num_jobs(&self) -> usize {
        self.proc_time.len()
    }

    /// Processing time of `job` on `machine`.
    #[inline]
    pub fn p(&self, job: JobId, machine: usize) -> Time {
        self.proc_time[job][machine]
    }

    pub fn proc_times(&self) -> &[Vec<Time>] {
        &self.proc_time
    }

    pub fn proc_powers(&self) -> &[Vec<f64>] {
        &self.proc_power
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    /// Sum of a job's processing power over all machines.
    pub fn rated_power(&self, job: JobId) -> f64 {
        self.proc_power[job].iter().sum()
    }

    /// Copy of this instance with different emission coefficients.
    pub fn with_coefficients(&self, coefficients: Coefficients) -> Result<Self, InstanceError> {
        Instance::new(
            self.id.clone(),
            self.factories,
            self.proc_time.clone(),
            self.proc_power.clone(),
            coefficients,
        )
    }
}

/// Timing of one factory's sequence. Rows are positions, columns machines.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorySchedule {
    jobs: Vec<JobId>,
    start: Vec<Vec<Time>>,
    completion: Vec<Vec<Time>>,
    makespan: Time,
}

impl FactorySchedule {
    /// Assemble a factory schedule from raw parts. No consistency check is
    /// made here; see [`check_constraints`].
    pub fn from_parts(
        jobs: Vec<JobId>,
        start: Vec<Vec<Time>>,
        completion: Vec<Vec<Time>>,
        makespan: Time,
    ) -> Self {
        FactorySchedule {
            jobs,
            start,
            completion,
            makespan,
        }
    }

    pub fn jobs(&self) -> &[JobId] {
        &self.jobs
    }

    pub fn start(&self) -> &[Vec<Time>] {
        &self.start
    }

    pub fn completion(&self) -> &[Vec<Time>] {
        &self.completion
    }

    pub fn makespan(&self) -> Time {
        self.makespan
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }
}

/// Decoded start and completion times for every factory.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    factories: Vec<FactorySchedule>,
}

impl Schedule {
    pub fn from_factories(factories: Vec<FactorySchedule>) -> Self {
        Schedule { factories }
    }

    pub fn factories(&self) -> &[FactorySchedule] {
        &self.factories
    }

    pub fn factory_makespans(&self) -> Vec<Time> {
        self.factories.iter().map(|f| f.makespan).collect()
    }

    /// Overall makespan: the largest factory makespan.
    pub fn makespan(&self) -> Time {
        self.factories.iter().map(|f| f.makespan).max().unwrap_or(0)
    }
}

/// How idle time on a machine is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum IdleMode {
    /// Gaps between a machine's first start and last completion. Machines are
    /// considered off before their first and after their last operation.
    #[default]
    MachineSpan,
    /// Every non-busy instant between time zero and the factory makespan,
    /// including leading and trailing time. Empty factories stay uncharged.
    FactoryMakespan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Apply the off/on strategy to idle gaps.
    pub reduction: bool,
    pub idle_mode: IdleMode,
}

impl EvalConfig {
    pub fn new(reduction: bool) -> Self {
        EvalConfig {
            reduction,
            idle_mode: IdleMode::MachineSpan,
        }
    }
}

/// Both objectives of one solution plus the carbon breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectivePoint {
    pub makespan: Time,
    pub ce_total: f64,
    pub ce_run: f64,
    pub ce_idle: f64,
    pub ce_au: f64,
    pub offon_cycles: u64,
}

impl ObjectivePoint {
    /// The two minimised objectives as `[makespan, total carbon]`.
    pub fn objectives(&self) -> [f64; 2] {
        [self.makespan as f64, self.ce_total]
    }

    /// Pareto dominance under minimisation of both objectives.
    pub fn dominates(&self, other: &ObjectivePoint) -> bool {
        let (a, b) = (self.makespan, other.makespan);
        let (x, y) = (self.ce_total, other.ce_total);
        a <= b && x <= y && (a < b || x < y)
    }

    pub fn same_objectives(&self, other: &ObjectivePoint) -> bool {
        self.makespan == other.makespan && self.ce_total == other.ce_total
    }
}

/// Decode one factory's job sequence.
pub fn decode_sequence(instance: &Instance, jobs: &[JobId]) -> FactorySchedule {
    let m = instance.num_machines();
    let mut start = Vec::with_capacity(jobs.len());
    let mut completion: Vec<Vec<Time>> = Vec::with_capacity(jobs.len());
    for (k, &job) in jobs.iter().enumerate() {
        let mut s_row = vec![0; m];
        let mut c_row = vec![0; m];
        for j in 0..m {
            let left = if j > 0 { c_row[j - 1] } else { 0 };
            let above = if k > 0 { completion[k - 1][j] } else { 0 };
            s_row[j] = left.max(above);
            c_row[j] = s_row[j] + instance.p(job, j);
        }
        start.push(s_row);
        completion.push(c_row);
    }
    let makespan = completion.last().map_or(0, |row| row[m - 1]);
    FactorySchedule {
        jobs: jobs.to_vec(),
        start,
        completion,
        makespan,
    }
}

/// Decode a genotype into a full semi-active schedule.
pub fn decode(instance: &Instance, genotype: &Genotype) -> Result<Schedule, ModelError> {
    genotype.validate_for(instance.num_jobs(), instance.num_factories())?;
    Ok(Schedule {
        factories: genotype
            .sequences()
            .iter()
            .map(|seq| decode_sequence(instance, seq))
            .collect(),
    })
}

pub fn makespan(schedule: &Schedule) -> Time {
    schedule.makespan()
}

/// Makespan of a single sequence without materialising the schedule.
pub fn sequence_makespan(instance: &Instance, jobs: &[JobId], row: &mut Vec<Time>) -> Time {
    let m = instance.num_machines();
    row.clear();
    row.resize(m, 0);
    for &job in jobs {
        let mut left = 0;
        for (j, slot) in row.iter_mut().enumerate() {
            let c = left.max(*slot) + instance.p(job, j);
            *slot = c;
            left = c;
        }
    }
    if jobs.is_empty() {
        0
    } else {
        row[m - 1]
    }
}

/// Processing emissions. Genotype independent.
pub fn carbon_run(instance: &Instance) -> f64 {
    let mut energy = 0.0;
    for (times, powers) in instance.proc_time.iter().zip(&instance.proc_power) {
        for (&p, &pp) in times.iter().zip(powers) {
            energy += p as f64 * pp;
        }
    }
    energy * instance.coefficients.elec_coeff
}

/// Auxiliary-material emissions. Genotype independent.
pub fn carbon_aux(instance: &Instance) -> f64 {
    let aux = &instance.coefficients.aux_coeff;
    let mut total = 0.0;
    for times in &instance.proc_time {
        for (&p, &eps) in times.iter().zip(aux) {
            total += p as f64 * eps;
        }
    }
    total
}

/// Integer idle bookkeeping, turned into emissions only at the end so the
/// result does not depend on the order in which gaps are visited.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IdleTally {
    /// All idle time units observed.
    pub idle_time: Time,
    /// Idle time still charged at idle power after off/on substitution.
    pub charged_time: Time,
    /// Gaps replaced by an off/on cycle.
    pub cycles: u64,
}

impl IdleTally {
    #[inline]
    fn gap(&mut self, gap: Time, coeffs: &Coefficients, reduction: bool) {
        if gap == 0 {
            return;
        }
        self.idle_time += gap;
        if reduction && offon_pays(gap, coeffs) {
            self.cycles += 1;
        } else {
            self.charged_time += gap;
        }
    }

    pub fn emissions(&self, coeffs: &Coefficients) -> f64 {
        let idle = self.charged_time as f64 * coeffs.idle_power * coeffs.elec_coeff;
        // skip the cycle term when unused so an infinite cycle cost stays inert
        if self.cycles == 0 {
            idle
        } else {
            idle + self.cycles as f64 * coeffs.offon_emission
        }
    }
}

/// Whether switching a machine off for `gap` time units beats idling.
#[inline]
pub fn offon_pays(gap: Time, c: &Coefficients) -> bool {
    let g = gap as f64;
    g >= c.offon_time && g * c.idle_power * c.elec_coeff > c.offon_emission
}

/// Tally idle gaps of a decoded schedule.
pub fn idle_tally(instance: &Instance, schedule: &Schedule, config: EvalConfig) -> IdleTally {
    let coeffs = &instance.coefficients;
    let m = instance.num_machines();
    let mut tally = IdleTally::default();
    for fs in &schedule.factories {
        if fs.is_empty() {
            continue;
        }
        for j in 0..m {
            if config.idle_mode == IdleMode::FactoryMakespan {
                tally.gap(fs.start[0][j], coeffs, config.reduction);
            }
            for k in 1..fs.jobs.len() {
                let gap = fs.start[k][j].saturating_sub(fs.completion[k - 1][j]);
                tally.gap(gap, coeffs, config.reduction);
            }
            if config.idle_mode == IdleMode::FactoryMakespan {
                let last = fs.completion[fs.jobs.len() - 1][j];
                tally.gap(fs.makespan.saturating_sub(last), coeffs, config.reduction);
            }
        }
    }
    tally
}

/// Idle emissions of a schedule and the number of off/on cycles used.
pub fn carbon_idle(instance: &Instance, schedule: &Schedule, reduction: bool) -> (f64, u64) {
    let tally = idle_tally(instance, schedule, EvalConfig::new(reduction));
    (tally.emissions(&instance.coefficients), tally.cycles)
}

fn assemble(instance: &Instance, makespan: Time, tally: IdleTally) -> ObjectivePoint {
    let ce_run = carbon_run(instance);
    let ce_au = carbon_aux(instance);
    let ce_idle = tally.emissions(&instance.coefficients);
    ObjectivePoint {
        makespan,
        ce_total: ce_run + ce_idle + ce_au,
        ce_run,
        ce_idle,
        ce_au,
        offon_cycles: tally.cycles,
    }
}

/// Objectives of an already decoded schedule.
pub fn evaluate_schedule(instance: &Instance, schedule: &Schedule, config: EvalConfig) -> ObjectivePoint {
    assemble(instance, schedule.makespan(), idle_tally(instance, schedule, config))
}

pub fn evaluate(
    instance: &Instance,
    genotype: &Genotype,
    reduction: bool,
) -> Result<ObjectivePoint, ModelError> {
    evaluate_with(instance, genotype, EvalConfig::new(reduction))
}

/// Evaluate without building a [`Schedule`]: a rolling completion row per
/// factory gives every gap as `max(left, above) - above`.
pub fn evaluate_with(
    instance: &Instance,
    genotype: &Genotype,
    config: EvalConfig,
) -> Result<ObjectivePoint, ModelError> {
    genotype.validate_for(instance.num_jobs(), instance.num_factories())?;
    Ok(evaluate_sequences(instance, genotype.sequences(), config))
}

/// Evaluation of arbitrary (possibly partial) sequences. Callers guarantee
/// every listed job is a valid index.
pub(crate) fn evaluate_sequences(
    instance: &Instance,
    sequences: &[Vec<JobId>],
    config: EvalConfig,
) -> ObjectivePoint {
    let coeffs = &instance.coefficients;
    let m = instance.num_machines();
    let mut row = vec![0; m];
    let mut tally = IdleTally::default();
    let mut overall = 0;
    for seq in sequences {
        if seq.is_empty() {
            continue;
        }
        row.iter_mut().for_each(|c| *c = 0);
        for (k, &job) in seq.iter().enumerate() {
            let mut left = 0;
            for (j, slot) in row.iter_mut().enumerate() {
                let start = left.max(*slot);
                if k > 0 {
                    tally.gap(start - *slot, coeffs, config.reduction);
                } else if config.idle_mode == IdleMode::FactoryMakespan {
                    tally.gap(start, coeffs, config.reduction);
                }
                let c = start + instance.p(job, j);
                *slot = c;
                left = c;
            }
        }
        let factory_makespan = row[m - 1];
        if config.idle_mode == IdleMode::FactoryMakespan {
            for &c in &row {
                tally.gap(factory_makespan - c, coeffs, config.reduction);
            }
        }
        overall = overall.max(factory_makespan);
    }
    assemble(instance, overall, tally)
}

/// One problem found by [`check_constraints`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintViolation {
    Genotype(Violation),
    FactoryCount { expected: usize, found: usize },
    SequenceMismatch { factory: usize },
    Dimensions { factory: usize },
    /// An operation starts before the same job's previous operation ends.
    JobPrecedence { factory: usize, position: usize, machine: usize },
    /// Two consecutive positions overlap on one machine.
    MachineOverlap { factory: usize, position: usize, machine: usize },
    /// Completion does not equal start plus processing time, or the implied
    /// start is negative.
    Duration { factory: usize, position: usize, machine: usize },
    MakespanTooSmall { factory: usize },
}

impl std::fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        use ConstraintViolation::*;
        match self {
            Genotype(v) => write!(f, "{v}"),
            FactoryCount { expected, found } => {
                write!(f, "schedule has {found} factories, expected {expected}")
            }
            SequenceMismatch { factory } => {
                write!(f, "factory {factory}: schedule sequence differs from genotype")
            }
            Dimensions { factory } => write!(f, "factory {factory}: timing table has wrong shape"),
            JobPrecedence { factory, position, machine } => write!(
                f,
                "factory {factory}: job precedence violated at position {position}, machine {machine}"
            ),
            MachineOverlap { factory, position, machine } => write!(
                f,
                "factory {factory}: machine overlap at position {position}, machine {machine}"
            ),
            Duration { factory, position, machine } => write!(
                f,
                "factory {factory}: bad duration at position {position}, machine {machine}"
            ),
            MakespanTooSmall { factory } => {
                write!(f, "factory {factory}: makespan below a final-machine completion")
            }
        }
    }
}

/// Check a genotype/schedule pair against the model constraints. An empty
/// vector means the pair is feasible.
pub fn check_constraints(
    instance: &Instance,
    genotype: &Genotype,
    schedule: &Schedule,
) -> Vec<ConstraintViolation> {
    let mut out = Vec::new();
    if let Err(v) = genotype.validate_for(instance.num_jobs(), instance.num_factories()) {
        out.push(ConstraintViolation::Genotype(v));
    }
    if schedule.factories.len() != genotype.num_factories() {
        out.push(ConstraintViolation::FactoryCount {
            expected: genotype.num_factories(),
            found: schedule.factories.len(),
        });
        return out;
    }
    let m = instance.num_machines();
    for (f, (fs, seq)) in schedule.factories.iter().zip(genotype.sequences()).enumerate() {
        if fs.jobs != *seq {
            out.push(ConstraintViolation::SequenceMismatch { factory: f });
        }
        let shape_ok = fs.start.len() == fs.jobs.len()
            && fs.completion.len() == fs.jobs.len()
            && fs.start.iter().chain(&fs.completion).all(|r| r.len() == m)
            && fs.jobs.iter().all(|&j| j < instance.num_jobs());
        if !shape_ok {
            out.push(ConstraintViolation::Dimensions { factory: f });
            continue;
        }
        for (k, &job) in fs.jobs.iter().enumerate() {
            for j in 0..m {
                let s = fs.start[k][j];
                let c = fs.completion[k][j];
                let p = instance.p(job, j);
                if c < p || c - p != s {
                    out.push(ConstraintViolation::Duration { factory: f, position: k, machine: j });
                }
                let begin = c.saturating_sub(p);
                if j > 0 && begin < fs.completion[k][j - 1] {
                    out.push(ConstraintViolation::JobPrecedence { factory: f, position: k, machine: j });
                }
                if k > 0 && begin < fs.completion[k - 1][j] {
                    out.push(ConstraintViolation::MachineOverlap { factory: f, position: k, machine: j });
                }
            }
        }
        if fs.completion.iter().any(|row| row[m - 1] > fs.makespan) {
            out.push(ConstraintViolation::MakespanTooSmall { factory: f });
        }
    }
    out
}
