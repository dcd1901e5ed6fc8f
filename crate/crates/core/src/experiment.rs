//! Experiment grids: unconstrained runs from zero diversity, the synthetic
//! heat map, and quality-constrained runs from the optimum.
//!
//! Cells run in parallel; each run's generator is seeded from the master
//! seed, the cell coordinates and the repetition index, so any single cell
//! can be re-run in isolation. Results are collected first and then written
//! by one writer.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::diversity::{MeasureKind, TieBreak};
use crate::engine::{checkpoint_schedule, run_ea, Checkpoint, EaConfig, InitMode, RunRecord};
use crate::error::{Error, Result};
use crate::instance::Problem;
use crate::mutation::OperatorSpec;
use crate::qaplib::gen_synthetic_qap;
use crate::rng::{derive_seed, hash_label};

/// A labelled problem instance.
pub struct NamedInstance {
    pub label: String,
    pub problem: Box<dyn Problem + Send>,
}

impl NamedInstance {
    pub fn new(label: impl Into<String>, problem: impl Problem + Send + 'static) -> Self {
        NamedInstance {
            label: label.into(),
            problem: Box::new(problem),
        }
    }
}

fn measure_code(m: MeasureKind) -> u64 {
    match m {
        MeasureKind::NVector => 1,
        MeasureKind::DVector => 2,
    }
}

fn operator_code(op: OperatorSpec) -> u64 {
    hash_label(&op.to_string())
}

/// Sample mean and standard deviation (`n - 1` denominator; 0 for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Config(format!("CSV error for {}: {other:?}", path.display())),
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    csv::Writer::from_path(path).map_err(|e| csv_err(path, e))
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn opt_u64(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Columns of a single checkpoint, in CSV order.
pub const CHECKPOINT_COLUMNS: [&str; 6] = ["iteration", "d1_norm", "d2_norm", "d_p", "c_p", "unique_frac"];

fn checkpoint_fields(c: &Checkpoint) -> Vec<String> {
    vec![
        c.iteration.to_string(),
        c.d1_norm.to_string(),
        c.d2_norm.to_string(),
        c.d_p.to_string(),
        c.c_p.to_string(),
        c.unique_fraction.to_string(),
    ]
}

/// Writes one run's trajectory and a summary line.
pub fn write_run_record<W: Write>(record: &RunRecord, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Config(format!("CSV error: {e}"));
    w.write_record(CHECKPOINT_COLUMNS).map_err(io)?;
    for c in &record.checkpoints {
        w.write_record(checkpoint_fields(c)).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Config(format!("CSV error: {e}")))?;
    Ok(())
}

pub const SUMMARY_COLUMNS: [&str; 9] = [
    "termination_iteration",
    "evaluations",
    "budget",
    "d1_norm",
    "d2_norm",
    "d_p",
    "c_p",
    "unique_frac",
    "seed",
];

pub fn summary_fields(record: &RunRecord) -> Vec<String> {
    let last = record.last();
    vec![
        opt_u64(record.termination),
        record.evaluations.to_string(),
        record.budget.to_string(),
        last.d1_norm.to_string(),
        last.d2_norm.to_string(),
        last.d_p.to_string(),
        last.c_p.to_string(),
        last.unique_fraction.to_string(),
        record.seed.to_string(),
    ]
}

/// The checkpoint in force at `iteration`: the last one recorded at or
/// before it. Runs that stopped early keep their final values.
pub fn value_at(record: &RunRecord, iteration: u64) -> &Checkpoint {
    let idx = record
        .checkpoints
        .partition_point(|c| c.iteration <= iteration);
    &record.checkpoints[idx.max(1) - 1]
}

// ---------------------------------------------------------------------------
// Unconstrained runs

#[derive(Clone, Debug)]
pub struct UnconstrainedSpec {
    pub mus: Vec<usize>,
    pub measures: Vec<MeasureKind>,
    pub operator: OperatorSpec,
    pub reps: usize,
    pub seed: u64,
    pub budget: Option<u64>,
    pub checkpoints: usize,
    pub tie_break: TieBreak,
}

#[derive(Clone, Debug)]
pub struct UnconstrainedRun {
    pub instance: String,
    pub n: usize,
    pub mu: usize,
    pub measure: MeasureKind,
    pub rep: usize,
    pub record: RunRecord,
}

pub fn run_unconstrained(
    instances: &[NamedInstance],
    spec: &UnconstrainedSpec,
) -> Result<Vec<UnconstrainedRun>> {
    if spec.reps == 0 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    if let Some(&mu) = spec.mus.iter().find(|&&m| m < 2) {
        return Err(Error::PopulationTooSmall { mu, min: 2 });
    }
    let mut cells = Vec::new();
    for i in 0..instances.len() {
        for &mu in &spec.mus {
            for &measure in &spec.measures {
                for rep in 0..spec.reps {
                    cells.push((i, mu, measure, rep));
                }
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(i, mu, measure, rep)| {
            let inst = &instances[i];
            let mut cfg = EaConfig::new(mu, spec.operator, measure);
            cfg.budget = spec.budget;
            cfg.checkpoints = spec.checkpoints;
            cfg.tie_break = spec.tie_break;
            cfg.seed = derive_seed(
                spec.seed,
                &[hash_label(&inst.label), mu as u64, measure_code(measure)],
                rep as u64,
            );
            let record = run_ea(&cfg, inst.problem.as_ref())?;
            Ok(UnconstrainedRun {
                instance: inst.label.clone(),
                n: inst.problem.size(),
                mu,
                measure,
                rep,
                record,
            })
        })
        .collect()
}

/// Writes `trajectories.csv`, `summary.csv`, `aggregate.csv` and
/// `termination.csv` under `dir`.
pub fn write_unconstrained(runs: &[UnconstrainedRun], checkpoints: usize, dir: &Path) -> Result<()> {
    let key = |r: &UnconstrainedRun| {
        vec![
            r.instance.clone(),
            r.n.to_string(),
            r.mu.to_string(),
            r.measure.to_string(),
            r.rep.to_string(),
            r.record.seed.to_string(),
        ]
    };
    let base = ["instance", "n", "mu", "measure", "rep", "seed"];
    let header: Vec<&str> = base.iter().chain(CHECKPOINT_COLUMNS.iter()).copied().collect();
    write_rows(
        &dir.join("trajectories.csv"),
        &header,
        runs.iter().flat_map(|r| {
            let k = key(r);
            r.record.checkpoints.iter().map(move |c| {
                let mut row = k.clone();
                row.extend(checkpoint_fields(c));
                row
            })
        }),
    )?;
    let header: Vec<&str> = base.iter().chain(SUMMARY_COLUMNS[..8].iter()).copied().collect();
    write_rows(
        &dir.join("summary.csv"),
        &header,
        runs.iter().map(|r| {
            let mut row = key(r);
            let mut s = summary_fields(&r.record);
            s.pop(); // seed already in the key
            row.extend(s);
            row
        }),
    )?;

    let groups = group_runs(runs);
    let mut agg = Vec::new();
    let mut term = Vec::new();
    for g in &groups {
        let first = g[0];
        let budget = first.record.budget;
        let cell = vec![
            first.instance.clone(),
            first.n.to_string(),
            first.mu.to_string(),
            first.measure.to_string(),
        ];
        for t in checkpoint_schedule(budget, checkpoints) {
            let d1: Vec<f64> = g.iter().map(|r| value_at(&r.record, t).d1_norm).collect();
            let d2: Vec<f64> = g.iter().map(|r| value_at(&r.record, t).d2_norm).collect();
            let (m1, s1) = mean_std(&d1);
            let (m2, s2) = mean_std(&d2);
            let mut row = cell.clone();
            row.extend([
                t.to_string(),
                g.len().to_string(),
                m1.to_string(),
                s1.to_string(),
                m2.to_string(),
                s2.to_string(),
            ]);
            agg.push(row);
        }
        let steps: Vec<f64> = g
            .iter()
            .map(|r| r.record.termination.unwrap_or(budget) as f64)
            .collect();
        let (ms, ss) = mean_std(&steps);
        let done = g.iter().filter(|r| r.record.termination.is_some()).count();
        let mut row = cell;
        row.extend([
            budget.to_string(),
            g.len().to_string(),
            done.to_string(),
            ms.to_string(),
            ss.to_string(),
        ]);
        term.push(row);
    }
    write_rows(
        &dir.join("aggregate.csv"),
        &[
            "instance", "n", "mu", "measure", "iteration", "runs", "mean_d1_norm", "std_d1_norm",
            "mean_d2_norm", "std_d2_norm",
        ],
        agg,
    )?;
    write_rows(
        &dir.join("termination.csv"),
        &[
            "instance", "n", "mu", "measure", "budget", "runs", "terminated", "mean_steps",
            "std_steps",
        ],
        term,
    )
}

fn group_runs(runs: &[UnconstrainedRun]) -> Vec<Vec<&UnconstrainedRun>> {
    let mut groups: Vec<Vec<&UnconstrainedRun>> = Vec::new();
    for r in runs {
        match groups.iter_mut().find(|g| {
            g[0].instance == r.instance && g[0].mu == r.mu && g[0].measure == r.measure
        }) {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    groups
}

// ---------------------------------------------------------------------------
// Heat map

/// Operator of a heat-map column; `FifthOfN` is k-opt with `k = ⌈n/5⌉`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeatOperator {
    Fixed(OperatorSpec),
    FifthOfN,
}

impl HeatOperator {
    pub fn resolve(self, n: usize) -> OperatorSpec {
        match self {
            HeatOperator::Fixed(op) => op,
            HeatOperator::FifthOfN => OperatorSpec::QapKOpt(n.div_ceil(5).max(2)),
        }
    }

    pub fn label(self) -> String {
        match self {
            HeatOperator::Fixed(op) => op.to_string(),
            HeatOperator::FifthOfN => "kopt:n/5".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct HeatmapSpec {
    pub ns: Vec<usize>,
    pub mus: Vec<usize>,
    pub operators: Vec<HeatOperator>,
    pub reps: usize,
    pub seed: u64,
    pub tie_break: TieBreak,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeatmapRun {
    pub n: usize,
    pub mu: usize,
    pub operator: String,
    pub rep: usize,
    pub seed: u64,
    pub budget: u64,
    pub termination: Option<u64>,
}

impl HeatmapRun {
    /// Iterations used as a percentage of the budget; failures count as 100.
    pub fn percent(&self) -> f64 {
        100.0 * self.termination.unwrap_or(self.budget) as f64 / self.budget as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeatmapCell {
    pub n: usize,
    pub mu: usize,
    pub operator: String,
    pub runs: usize,
    pub successes: usize,
    pub mean_percent: f64,
    pub std_percent: f64,
}

pub fn run_heatmap(spec: &HeatmapSpec) -> Result<Vec<HeatmapRun>> {
    if spec.reps == 0 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    let mut cells = Vec::new();
    for &n in &spec.ns {
        for &mu in &spec.mus {
            for &op in &spec.operators {
                for rep in 0..spec.reps {
                    cells.push((n, mu, op, rep));
                }
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(n, mu, op, rep)| {
            // the matrices are never read without a quality threshold
            let inst = gen_synthetic_qap(n, derive_seed(spec.seed, &[n as u64], 0))?;
            let operator = op.resolve(n);
            let mut cfg = EaConfig::new(mu, operator, MeasureKind::NVector);
            cfg.checkpoints = 1;
            cfg.tie_break = spec.tie_break;
            cfg.seed = derive_seed(
                spec.seed,
                &[n as u64, mu as u64, hash_label(&op.label())],
                rep as u64,
            );
            let r = run_ea(&cfg, &inst)?;
            Ok(HeatmapRun {
                n,
                mu,
                operator: op.label(),
                rep,
                seed: cfg.seed,
                budget: r.budget,
                termination: r.termination,
            })
        })
        .collect()
}

pub fn aggregate_heatmap(runs: &[HeatmapRun]) -> Vec<HeatmapCell> {
    let mut cells: Vec<HeatmapCell> = Vec::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    for r in runs {
        let idx = cells
            .iter()
            .position(|c| c.n == r.n && c.mu == r.mu && c.operator == r.operator);
        let idx = idx.unwrap_or_else(|| {
            cells.push(HeatmapCell {
                n: r.n,
                mu: r.mu,
                operator: r.operator.clone(),
                runs: 0,
                successes: 0,
                mean_percent: 0.0,
                std_percent: 0.0,
            });
            values.push(Vec::new());
            cells.len() - 1
        });
        cells[idx].runs += 1;
        cells[idx].successes += usize::from(r.termination.is_some());
        values[idx].push(r.percent());
    }
    for (c, v) in cells.iter_mut().zip(&values) {
        (c.mean_percent, c.std_percent) = mean_std(v);
    }
    cells
}

/// Writes `heatmap_runs.csv` and `heatmap.csv` under `dir`.
pub fn write_heatmap(runs: &[HeatmapRun], dir: &Path) -> Result<()> {
    write_rows(
        &dir.join("heatmap_runs.csv"),
        &["n", "mu", "operator", "rep", "seed", "budget", "termination_iteration", "percent_budget"],
        runs.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.mu.to_string(),
                r.operator.clone(),
                r.rep.to_string(),
                r.seed.to_string(),
                r.budget.to_string(),
                opt_u64(r.termination),
                r.percent().to_string(),
            ]
        }),
    )?;
    write_rows(
        &dir.join("heatmap.csv"),
        &["n", "mu", "operator", "runs", "successes", "mean_percent_budget", "std_percent_budget"],
        aggregate_heatmap(runs).into_iter().map(|c| {
            vec![
                c.n.to_string(),
                c.mu.to_string(),
                c.operator,
                c.runs.to_string(),
                c.successes.to_string(),
                c.mean_percent.to_string(),
                c.std_percent.to_string(),
            ]
        }),
    )
}

// ---------------------------------------------------------------------------
// Constrained runs

#[derive(Clone, Debug)]
pub struct ConstrainedSpec {
    pub mus: Vec<usize>,
    pub alphas: Vec<f64>,
    pub measures: Vec<MeasureKind>,
    pub operator: OperatorSpec,
    pub reps: usize,
    pub seed: u64,
    pub budget: Option<u64>,
    pub tie_break: TieBreak,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstrainedRun {
    pub instance: String,
    pub n: usize,
    pub mu: usize,
    pub alpha: f64,
    pub measure: MeasureKind,
    pub rep: usize,
    pub seed: u64,
    pub d1_norm: f64,
    pub d2_norm: f64,
    pub unique_fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstrainedRow {
    pub instance: String,
    pub n: usize,
    pub mu: usize,
    pub alpha: f64,
    pub measure: MeasureKind,
    pub runs: usize,
    pub d1: (f64, f64),
    pub d2: (f64, f64),
    pub unique: (f64, f64),
}

pub fn run_constrained(
    instances: &[NamedInstance],
    spec: &ConstrainedSpec,
) -> Result<Vec<ConstrainedRun>> {
    if spec.reps == 0 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    if let Some(inst) = instances.iter().find(|i| i.problem.optimum().is_none()) {
        return Err(Error::Config(format!(
            "instance '{}' has no known optimum",
            inst.label
        )));
    }
    let mut cells = Vec::new();
    for i in 0..instances.len() {
        for &mu in &spec.mus {
            for (a, &alpha) in spec.alphas.iter().enumerate() {
                for &measure in &spec.measures {
                    for rep in 0..spec.reps {
                        cells.push((i, mu, a, alpha, measure, rep));
                    }
                }
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(i, mu, _a, alpha, measure, rep)| {
            let inst = &instances[i];
            let mut cfg = EaConfig::new(mu, spec.operator, measure);
            cfg.alpha = Some(alpha);
            cfg.init = InitMode::DuplicateOpt;
            cfg.early_stop = false;
            cfg.budget = spec.budget;
            cfg.checkpoints = 1;
            cfg.tie_break = spec.tie_break;
            cfg.seed = derive_seed(
                spec.seed,
                &[
                    hash_label(&inst.label),
                    mu as u64,
                    alpha.to_bits(),
                    measure_code(measure),
                    operator_code(spec.operator),
                ],
                rep as u64,
            );
            let r = run_ea(&cfg, inst.problem.as_ref())?;
            let last = r.last();
            Ok(ConstrainedRun {
                instance: inst.label.clone(),
                n: inst.problem.size(),
                mu,
                alpha,
                measure,
                rep,
                seed: cfg.seed,
                d1_norm: last.d1_norm,
                d2_norm: last.d2_norm,
                unique_fraction: last.unique_fraction,
            })
        })
        .collect()
}

pub fn aggregate_constrained(runs: &[ConstrainedRun]) -> Vec<ConstrainedRow> {
    let mut groups: Vec<Vec<&ConstrainedRun>> = Vec::new();
    for r in runs {
        match groups.iter_mut().find(|g| {
            let f = g[0];
            f.instance == r.instance && f.mu == r.mu && f.alpha == r.alpha && f.measure == r.measure
        }) {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let col = |f: fn(&ConstrainedRun) -> f64| mean_std(&g.iter().map(|r| f(r)).collect::<Vec<_>>());
            ConstrainedRow {
                instance: g[0].instance.clone(),
                n: g[0].n,
                mu: g[0].mu,
                alpha: g[0].alpha,
                measure: g[0].measure,
                runs: g.len(),
                d1: col(|r| r.d1_norm),
                d2: col(|r| r.d2_norm),
                unique: col(|r| r.unique_fraction),
            }
        })
        .collect()
}

/// Writes `constrained_runs.csv` and `constrained_table.csv` under `dir`.
/// Table values are percentages.
pub fn write_constrained(runs: &[ConstrainedRun], dir: &Path) -> Result<()> {
    write_rows(
        &dir.join("constrained_runs.csv"),
        &["instance", "n", "mu", "alpha", "measure", "rep", "seed", "d1_norm", "d2_norm", "unique_frac"],
        runs.iter().map(|r| {
            vec![
                r.instance.clone(),
                r.n.to_string(),
                r.mu.to_string(),
                r.alpha.to_string(),
                r.measure.to_string(),
                r.rep.to_string(),
                r.seed.to_string(),
                r.d1_norm.to_string(),
                r.d2_norm.to_string(),
                r.unique_fraction.to_string(),
            ]
        }),
    )?;
    let pct = |x: f64| format!("{:.2}", 100.0 * x);
    write_rows(
        &dir.join("constrained_table.csv"),
        &[
            "instance", "n", "mu", "alpha", "measure", "runs", "mean_d1_pct", "std_d1_pct",
            "mean_d2_pct", "std_d2_pct", "mean_unique_pct", "std_unique_pct",
        ],
        aggregate_constrained(runs).into_iter().map(|r| {
            vec![
                r.instance,
                r.n.to_string(),
                r.mu.to_string(),
                r.alpha.to_string(),
                r.measure.to_string(),
                r.runs.to_string(),
                pct(r.d1.0),
                pct(r.d1.1),
                pct(r.d2.0),
                pct(r.d2.1),
                pct(r.unique.0),
                pct(r.unique.1),
            ]
        }),
    )
}
