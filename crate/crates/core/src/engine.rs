//! The (μ+1) evolutionary algorithm for diversity optimisation.
//!
//! Each iteration picks a member uniformly, mutates it, and if the offspring
//! meets the quality threshold adds it and removes a member whose removal
//! leaves the most diverse population. One iteration is one fitness
//! evaluation, whether or not the cost actually has to be computed.

use rand::Rng;

use crate::diversity::{
    d1_from_counts, d1_upper_bound, d2_from_overlaps, select_largest_key, CountTable, MeasureKind,
    Population, TieBreak,
};
use crate::error::{Error, Result};
use crate::instance::Problem;
use crate::mutation::{sample_neighbor, OperatorSpec};
use crate::permutation::{Permutation, ProblemKind};
use crate::rng::{rng_from_seed, EdoRng};

#[derive(Clone, Debug, PartialEq)]
pub enum InitMode {
    /// `μ` copies of one uniformly random solution.
    DuplicateRandom,
    /// `μ` copies of the instance's known optimum.
    DuplicateOpt,
    /// A supplied population.
    Given(Population),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EaConfig {
    pub mu: usize,
    /// Maximum number of iterations; `None` means `μn²`.
    pub budget: Option<u64>,
    pub measure: MeasureKind,
    pub operator: OperatorSpec,
    /// Offspring costing more than this are rejected.
    pub threshold: f64,
    /// When set, the threshold becomes `(1 + α)·OPT`.
    pub alpha: Option<f64>,
    pub init: InitMode,
    pub seed: u64,
    /// Number of evenly spaced checkpoints besides iteration 0.
    pub checkpoints: usize,
    /// Stop as soon as the driven measure reaches its optimum.
    pub early_stop: bool,
    pub tie_break: TieBreak,
}

impl EaConfig {
    /// Unconstrained configuration starting from random duplicates.
    pub fn new(mu: usize, operator: OperatorSpec, measure: MeasureKind) -> Self {
        EaConfig {
            mu,
            budget: None,
            measure,
            operator,
            threshold: f64::INFINITY,
            alpha: None,
            init: InitMode::DuplicateRandom,
            seed: 0,
            checkpoints: 1000,
            early_stop: true,
            tie_break: TieBreak::Random,
        }
    }

    pub fn budget_for(&self, n: usize) -> u64 {
        self.budget
            .unwrap_or((self.mu as u64) * (n as u64) * (n as u64))
    }

    fn validate(&self, problem: &dyn Problem) -> Result<()> {
        if self.mu < 2 {
            return Err(Error::PopulationTooSmall {
                mu: self.mu,
                min: 2,
            });
        }
        if self.budget == Some(0) {
            return Err(Error::Config("budget must be at least 1".into()));
        }
        if let Some(a) = self.alpha {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::Config(format!("alpha must be finite and >= 0, got {a}")));
            }
        }
        if self.operator.problem_kind() != problem.kind() {
            return Err(Error::KindMismatch {
                expected: problem.kind(),
                found: self.operator.problem_kind(),
            });
        }
        self.operator.check(problem.size())
    }
}

/// The quality threshold in force for `cfg` on `problem`.
pub fn effective_threshold(cfg: &EaConfig, problem: &dyn Problem) -> Result<f64> {
    match cfg.alpha {
        Some(alpha) => {
            let opt = problem.optimum().ok_or(Error::OptimumUnknown)?;
            Ok((1.0 + alpha) * opt.value)
        }
        None => Ok(cfg.threshold),
    }
}

pub fn init_population<R: Rng + ?Sized>(
    cfg: &EaConfig,
    problem: &dyn Problem,
    rng: &mut R,
) -> Result<Population> {
    let (kind, n) = (problem.kind(), problem.size());
    match &cfg.init {
        InitMode::DuplicateRandom => {
            Population::duplicates(kind, &Permutation::random(n, rng), cfg.mu)
        }
        InitMode::DuplicateOpt => {
            let opt = problem.optimum().ok_or(Error::OptimumUnknown)?;
            Population::duplicates(kind, &opt.permutation, cfg.mu)
        }
        InitMode::Given(p) => {
            if p.kind() != kind {
                return Err(Error::KindMismatch {
                    expected: kind,
                    found: p.kind(),
                });
            }
            if p.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.n(),
                });
            }
            if p.mu() != cfg.mu {
                return Err(Error::Config(format!(
                    "given population has {} members, configuration asks for {}",
                    p.mu(),
                    cfg.mu
                )));
            }
            Ok(p.clone())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Checkpoint {
    pub iteration: u64,
    pub d1_norm: f64,
    pub d2_norm: f64,
    pub d_p: u32,
    pub c_p: usize,
    pub unique_fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub checkpoints: Vec<Checkpoint>,
    /// Iteration at which the driven measure reached its optimum, if it did.
    pub termination: Option<u64>,
    pub evaluations: u64,
    pub budget: u64,
    pub final_population: Population,
    pub seed: u64,
}

impl RunRecord {
    pub fn last(&self) -> &Checkpoint {
        self.checkpoints.last().expect("a run records iteration 0")
    }
}

/// Mutable engine state: members with cached object ids and costs, the
/// count table, and (for the overlap measure) the overlap matrix.
pub struct EaState<'a> {
    problem: &'a dyn Problem,
    kind: ProblemKind,
    n: usize,
    members: Vec<Permutation>,
    ids: Vec<Vec<usize>>,
    costs: Vec<f64>,
    counts: CountTable,
    overlaps: Vec<Vec<usize>>,
    positive_pairs: usize,
    measure: MeasureKind,
    operator: OperatorSpec,
    threshold: f64,
    tie_break: TieBreak,
    stamp: Vec<u64>,
    stamp_now: u64,
    row_buf: Vec<usize>,
}

impl<'a> EaState<'a> {
    pub fn new(
        population: Population,
        problem: &'a dyn Problem,
        operator: OperatorSpec,
        measure: MeasureKind,
        threshold: f64,
        tie_break: TieBreak,
    ) -> Result<Self> {
        let (kind, n) = (population.kind(), population.n());
        if kind != problem.kind() || n != problem.size() {
            return Err(Error::DimensionMismatch {
                expected: problem.size(),
                found: n,
            });
        }
        let counts = CountTable::from_population(&population);
        let members = population.into_members();
        let ids: Vec<Vec<usize>> = members.iter().map(|m| m.object_ids(kind).collect()).collect();
        let costs = if threshold.is_finite() {
            members.iter().map(|m| problem.evaluate(m)).collect()
        } else {
            vec![f64::NAN; members.len()]
        };
        let mut state = EaState {
            problem,
            kind,
            n,
            members,
            ids,
            costs,
            counts,
            overlaps: Vec::new(),
            positive_pairs: 0,
            measure,
            operator,
            threshold,
            tie_break,
            stamp: vec![0; n * n],
            stamp_now: 0,
            row_buf: Vec::new(),
        };
        let mu = state.members.len();
        state.overlaps = vec![vec![n; mu]; mu];
        for i in 0..mu {
            state.overlap_row(&state.ids[i].clone());
            for j in 0..mu {
                if j != i {
                    state.overlaps[i][j] = state.row_buf[j];
                }
            }
        }
        state.positive_pairs = (0..mu)
            .flat_map(|i| (i + 1..mu).map(move |j| (i, j)))
            .filter(|&(i, j)| state.overlaps[i][j] > 0)
            .count();
        Ok(state)
    }

    /// Overlaps of the object-id list `ids` with every member, into `row_buf`.
    fn overlap_row(&mut self, ids: &[usize]) {
        self.stamp_now += 1;
        for &id in ids {
            self.stamp[id] = self.stamp_now;
        }
        self.row_buf.clear();
        for m in &self.ids {
            let shared = m.iter().filter(|&&id| self.stamp[id] == self.stamp_now).count();
            self.row_buf.push(shared);
        }
    }

    pub fn mu(&self) -> usize {
        self.members.len()
    }

    pub fn counts(&self) -> &CountTable {
        &self.counts
    }

    pub fn population(&self) -> Population {
        Population::new(self.kind, self.members.clone()).expect("state holds a valid population")
    }

    pub fn costs(&self) -> Option<&[f64]> {
        self.threshold.is_finite().then_some(self.costs.as_slice())
    }

    /// Whether the driven measure is at its best possible value.
    pub fn at_optimum(&self) -> bool {
        match self.measure {
            MeasureKind::NVector => self.counts.is_balanced(),
            MeasureKind::DVector => self.positive_pairs == 0,
        }
    }

    pub fn checkpoint(&self, iteration: u64) -> Checkpoint {
        let mu = self.mu();
        let d1 = d1_from_counts(&self.counts);
        let bound = d1_upper_bound(self.kind, self.n, mu);
        let d2 = d2_from_overlaps(self.n, &self.overlaps);
        Checkpoint {
            iteration,
            d1_norm: if bound == 0 { 1.0 } else { d1 as f64 / bound as f64 },
            d2_norm: d2 as f64 / (mu * self.n) as f64,
            d_p: self.counts.d_p(),
            c_p: self.counts.c_p(),
            unique_fraction: self.counts.unique_objects() as f64 / (mu * self.n) as f64,
        }
    }

    /// One iteration. Returns whether the offspring entered the population.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<bool> {
        let mu = self.mu();
        let parent = rng.random_range(0..mu);
        let child = sample_neighbor(&self.members[parent], self.operator, rng)?;
        let child_cost = if self.threshold.is_finite() {
            let c = self
                .problem
                .evaluate_neighbor(&self.members[parent], self.costs[parent], &child);
            if c > self.threshold {
                return Ok(false);
            }
            c
        } else {
            f64::NAN
        };
        let child_ids: Vec<usize> = child.object_ids(self.kind).collect();
        let removed = match self.measure {
            MeasureKind::NVector => {
                self.counts.add_ids(&child_ids);
                let counts = &self.counts;
                let ids = &self.ids;
                let r = select_largest_key(
                    mu + 1,
                    |j, buf| {
                        let src = if j == mu { &child_ids } else { &ids[j] };
                        buf.extend(src.iter().map(|&id| counts.count_id(id)));
                    },
                    self.tie_break,
                    rng,
                );
                let gone = if r == mu { &child_ids } else { &self.ids[r] };
                let gone = gone.clone();
                self.counts.remove_ids(&gone);
                r
            }
            MeasureKind::DVector => {
                self.overlap_row(&child_ids);
                let row = &self.row_buf;
                let o = &self.overlaps;
                select_largest_key(
                    mu + 1,
                    |j, buf| {
                        if j == mu {
                            buf.extend(row.iter().map(|&v| v as u32));
                        } else {
                            buf.extend((0..mu).filter(|&i| i != j).map(|i| o[j][i] as u32));
                            buf.push(row[j] as u32);
                        }
                    },
                    self.tie_break,
                    rng,
                )
            }
        };
        if removed == mu {
            return Ok(false);
        }
        if self.measure == MeasureKind::NVector {
            self.overlap_row(&child_ids);
        } else {
            self.counts.remove_ids(&self.ids[removed].clone());
            self.counts.add_ids(&child_ids);
        }
        for j in 0..mu {
            if j == removed {
                continue;
            }
            let (old, new) = (self.overlaps[removed][j], self.row_buf[j]);
            self.positive_pairs = self.positive_pairs + usize::from(new > 0) - usize::from(old > 0);
            self.overlaps[removed][j] = new;
            self.overlaps[j][removed] = new;
        }
        self.members[removed] = child;
        self.ids[removed] = child_ids;
        self.costs[removed] = child_cost;
        Ok(true)
    }
}

/// Iterations at which checkpoints are taken: 0 and `count` evenly spaced
/// points up to `budget`.
pub fn checkpoint_schedule(budget: u64, count: usize) -> Vec<u64> {
    let count = count.max(1) as u128;
    let mut out: Vec<u64> = (0..=count)
        .map(|c| ((c * budget as u128 + count / 2) / count) as u64)
        .collect();
    out.dedup();
    out
}

/// Runs the algorithm to completion.
pub fn run_ea(cfg: &EaConfig, problem: &dyn Problem) -> Result<RunRecord> {
    cfg.validate(problem)?;
    let threshold = effective_threshold(cfg, problem)?;
    let mut rng: EdoRng = rng_from_seed(cfg.seed);
    let population = init_population(cfg, problem, &mut rng)?;
    let budget = cfg.budget_for(problem.size());
    let mut state = EaState::new(
        population,
        problem,
        cfg.operator,
        cfg.measure,
        threshold,
        cfg.tie_break,
    )?;
    let schedule = checkpoint_schedule(budget, cfg.checkpoints);
    let mut next = 1; // schedule[0] == 0
    let mut checkpoints = vec![state.checkpoint(0)];
    let mut termination = None;
    let mut t = 0u64;
    if cfg.early_stop && state.at_optimum() {
        termination = Some(0);
    }
    while termination.is_none() && t < budget {
        let accepted = state.step(&mut rng)?;
        t += 1;
        if cfg.early_stop && accepted && state.at_optimum() {
            termination = Some(t);
        }
        if next < schedule.len() && schedule[next] == t {
            checkpoints.push(state.checkpoint(t));
            next += 1;
        } else if termination.is_some() {
            checkpoints.push(state.checkpoint(t));
        }
    }
    Ok(RunRecord {
        checkpoints,
        termination,
        evaluations: t,
        budget,
        final_population: state.population(),
        seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diversity::{build_count_table, lex_compare, measure_vector};
    use crate::instance::QapInstance;
    use std::cmp::Ordering;

    fn zero_qap(n: usize) -> QapInstance {
        QapInstance::new(n, vec![0.0; n * n], vec![0.0; n * n]).unwrap()
    }

    #[test]
    fn schedule_is_strictly_increasing() {
        let s = checkpoint_schedule(10, 1000);
        assert_eq!(s, (0..=10).collect::<Vec<_>>());
        let s = checkpoint_schedule(1000, 4);
        assert_eq!(s, vec![0, 250, 500, 750, 1000]);
    }

    #[test]
    fn rejecting_threshold_freezes_population() {
        let q = zero_qap(6);
        let mut cfg = EaConfig::new(3, OperatorSpec::QapKOpt(2), MeasureKind::NVector);
        cfg.threshold = -1.0;
        cfg.budget = Some(200);
        let r = run_ea(&cfg, &q).unwrap();
        assert_eq!(r.termination, None);
        assert_eq!(r.evaluations, 200);
        assert_eq!(r.last().d_p, 3);
    }

    #[test]
    fn single_evaluation_budget() {
        let q = zero_qap(5);
        let mut cfg = EaConfig::new(2, OperatorSpec::QapKOpt(2), MeasureKind::DVector);
        cfg.budget = Some(1);
        let r = run_ea(&cfg, &q).unwrap();
        assert_eq!(r.evaluations, 1);
        cfg.budget = Some(0);
        assert!(run_ea(&cfg, &q).is_err());
        cfg.budget = Some(1);
        cfg.mu = 1;
        assert!(run_ea(&cfg, &q).is_err());
    }

    #[test]
    fn alpha_without_optimum_is_rejected() {
        let q = zero_qap(5);
        let mut cfg = EaConfig::new(2, OperatorSpec::QapKOpt(2), MeasureKind::NVector);
        cfg.alpha = Some(0.1);
        assert!(matches!(run_ea(&cfg, &q), Err(Error::OptimumUnknown)));
    }

    #[test]
    fn incremental_state_matches_recomputation() {
        for measure in MeasureKind::ALL {
            let q = zero_qap(7);
            let mut rng = rng_from_seed(9);
            let pop = Population::duplicates(ProblemKind::Qap, &Permutation::identity(7), 4).unwrap();
            let mut st = EaState::new(
                pop,
                &q,
                OperatorSpec::QapKOpt(3),
                measure,
                f64::INFINITY,
                TieBreak::Random,
            )
            .unwrap();
            let mut prev = measure_vector(&st.population(), measure).unwrap();
            for _ in 0..300 {
                st.step(&mut rng).unwrap();
                let p = st.population();
                assert_eq!(st.counts(), &build_count_table(&p));
                let cur = measure_vector(&p, measure).unwrap();
                assert_ne!(lex_compare(&cur, &prev).unwrap(), Ordering::Greater);
                let naive = crate::diversity::overlap_matrix(&p);
                assert_eq!(st.overlaps, naive);
                prev = cur;
            }
        }
    }
}
