//! Closed-form improvement-probability and run-time bounds, and the
//! Monte-Carlo estimator used to test them.
//!
//! Probabilities are exact rationals; convert with [`Bound::to_f64`].

use std::cmp::Ordering;
use std::fmt;

use num::{BigInt, BigRational, BigUint, One, ToPrimitive, Zero};
use rand::Rng;

use crate::diversity::{
    lex_compare, measure_vector, n_vector, select_largest_key, select_removal, CountTable,
    MeasureKind, Population, TieBreak,
};
use crate::error::{Error, Result};
use crate::mutation::{sample_neighbor, OperatorSpec};

/// Largest population size for which the operator is guaranteed to improve
/// any population with `d_P ≥ 2`.
pub fn mu_guarantee_bound(op: OperatorSpec, n: usize) -> Result<usize> {
    op.check(n)?;
    Ok(match op {
        OperatorSpec::StspTwoOpt => (n + 2) / 4,
        OperatorSpec::StspExchange => (n + 4) / 8,
        OperatorSpec::AtspThreeOpt => (n + 2) / 3,
        OperatorSpec::AtspFourOpt => n / 3,
        OperatorSpec::QapKOpt(k) => (n + 3 + usize::from(k == 2) - k) / 2,
        OperatorSpec::StspInsertion => {
            return Err(Error::Operator {
                op: op.to_string(),
                reason: "no improvement guarantee is known for insertion".into(),
            })
        }
    })
}

/// `!k` by the recurrence `!k = (k - 1)(!(k - 1) + !(k - 2))`.
pub fn subfactorial(k: usize) -> BigUint {
    let (mut prev, mut cur) = (BigUint::one(), BigUint::zero());
    if k == 0 {
        return prev;
    }
    for i in 2..=k {
        let next = BigUint::from(i - 1) * (&prev + &cur);
        prev = cur;
        cur = next;
    }
    cur
}

pub fn factorial(k: usize) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// A bound that is either an exact number or only known up to its order.
#[derive(Clone, Debug, PartialEq)]
pub enum Bound {
    Exact(BigRational),
    Asymptotic(String),
}

impl Bound {
    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Bound::Exact(r) => Some(r),
            Bound::Asymptotic(_) => None,
        }
    }

    pub fn to_f64(&self) -> Option<f64> {
        self.exact().and_then(|r| r.to_f64())
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Exact(r) => write!(f, "{}", r.to_f64().unwrap_or(f64::NAN)),
            Bound::Asymptotic(s) => f.write_str(s),
        }
    }
}

fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

fn check_query(op: OperatorSpec, n: usize, mu: usize, d_p: usize) -> Result<()> {
    let max_mu = mu_guarantee_bound(op, n)?;
    if mu < 2 || mu > max_mu {
        return Err(Error::Range(format!(
            "{op} on n={n} needs 2 <= mu <= {max_mu}, got {mu}"
        )));
    }
    if d_p < 2 || d_p > mu {
        return Err(Error::Range(format!("d_P must lie in 2..={mu}, got {d_p}")));
    }
    Ok(())
}

/// Lower bound on the probability that one iteration strictly improves a
/// population of `μ` solutions with maximum count `d_P`.
pub fn improvement_prob_bound(op: OperatorSpec, n: usize, mu: usize, d_p: usize) -> Result<Bound> {
    check_query(op, n, mu, d_p)?;
    let (n, mu, d) = (n as i64, mu as i64, d_p as i64);
    Ok(match op {
        OperatorSpec::StspTwoOpt => Bound::Exact(ratio(
            int(2 * ((n - 1) * (d - 2) + 1)),
            int(mu * n * (n - 3)),
        )),
        OperatorSpec::StspExchange => Bound::Exact(ratio(
            int(4 * ((n - 2) * (d - 2) + 1)),
            int(mu * n * (n - 5)),
        )),
        OperatorSpec::AtspThreeOpt => Bound::Exact(ratio(
            int(3) * int(n * (d - 2) + 1) * int((n + 1) * (d - 2) + 2),
            int(mu) * int(n) * int(n - 1) * int(n - 2) * int(d - 1),
        )),
        OperatorSpec::AtspFourOpt => Bound::Asymptotic(if d == 2 {
            "Omega(1/(mu n^3))".to_string()
        } else {
            "Omega(d_P/(mu n))".to_string()
        }),
        OperatorSpec::QapKOpt(k) => {
            let k = k as i64;
            let ind = i64::from(k == 2);
            let decay = ratio(int(2 * d - 3), int(2 * d - 2));
            let mut factor = BigRational::one();
            for _ in 0..k - 2 {
                factor *= &decay;
            }
            let num = BigInt::from(factorial(k as usize)) * int((n - k + 2 + ind) * (d - 2) + 1);
            let den = int(mu)
                * int(n - 1)
                * int(n - k + 1 + ind)
                * BigInt::from(subfactorial(k as usize));
            Bound::Exact(factor * ratio(num, den))
        }
        OperatorSpec::StspInsertion => unreachable!("rejected by mu_guarantee_bound"),
    })
}

/// Expected iterations until the count vector is balanced, summing the
/// waiting time `1/bound` over the `μn/j` improvements needed at each level
/// `d_P = j`, for `j = 2..=μ`.
pub fn runtime_bound(op: OperatorSpec, n: usize, mu: usize) -> Result<Bound> {
    check_query(op, n, mu, 2)?;
    if op == OperatorSpec::AtspFourOpt {
        return Ok(Bound::Asymptotic("O(mu^2 n^4)".to_string()));
    }
    let mut total = BigRational::zero();
    for j in 2..=mu {
        let p = improvement_prob_bound(op, n, mu, j)?;
        let p = p.exact().expect("exact bound").clone();
        total += ratio(int((mu * n) as i64), int(j as i64)) / p;
    }
    Ok(Bound::Exact(total))
}

/// Observed frequency of strictly improving iterations with a Wilson
/// confidence interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub successes: u64,
    pub trials: u64,
    pub frequency: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Estimate {
    /// `sqrt(p̂(1 - p̂)/trials)`.
    pub fn std_error(&self) -> f64 {
        (self.frequency * (1.0 - self.frequency) / self.trials as f64).sqrt()
    }
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let t = trials as f64;
    let p = successes as f64 / t;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * t)) / (1.0 + z2 / t);
    let half = z / (1.0 + z2 / t) * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Runs `trials` independent single iterations from `p` with no quality
/// threshold and counts those after which the measure vector is strictly
/// smaller. The interval is the 95% Wilson interval.
pub fn estimate_improvement_prob<R: Rng + ?Sized>(
    p: &Population,
    op: OperatorSpec,
    measure: MeasureKind,
    trials: u64,
    rng: &mut R,
) -> Result<Estimate> {
    if trials < 1 {
        return Err(Error::Config("at least one trial is required".into()));
    }
    if op.problem_kind() != p.kind() {
        return Err(Error::KindMismatch {
            expected: p.kind(),
            found: op.problem_kind(),
        });
    }
    let mu = p.mu();
    let kind = p.kind();
    let baseline = measure_vector(p, measure)?;
    let mut successes = 0u64;
    match measure {
        MeasureKind::NVector => {
            let mut ct = CountTable::from_population(p);
            let ids: Vec<Vec<usize>> = p.members().iter().map(|m| m.object_ids(kind).collect()).collect();
            for _ in 0..trials {
                let b = rng.random_range(0..mu);
                let child = sample_neighbor(&p.members()[b], op, rng)?;
                let child_ids: Vec<usize> = child.object_ids(kind).collect();
                ct.add_ids(&child_ids);
                let removed = select_largest_key(
                    mu + 1,
                    |j, buf| {
                        let src = if j == mu { &child_ids } else { &ids[j] };
                        buf.extend(src.iter().map(|&id| ct.count_id(id)));
                    },
                    TieBreak::Random,
                    rng,
                );
                let gone = if removed == mu { &child_ids } else { &ids[removed] };
                ct.remove_ids(gone);
                if lex_compare(&n_vector(&ct), &baseline)? == Ordering::Less {
                    successes += 1;
                }
                // restore P
                ct.add_ids(gone);
                ct.remove_ids(&child_ids);
            }
        }
        MeasureKind::DVector => {
            for _ in 0..trials {
                let b = rng.random_range(0..mu);
                let child = sample_neighbor(&p.members()[b], op, rng)?;
                let p_plus = p.with_member(child)?;
                let j = select_removal(&p_plus, measure, TieBreak::Random, rng);
                let after = measure_vector(&p_plus.without(j)?, measure)?;
                if lex_compare(&after, &baseline)? == Ordering::Less {
                    successes += 1;
                }
            }
        }
    }
    let (lower, upper) = wilson_interval(successes, trials, 1.96);
    Ok(Estimate {
        successes,
        trials,
        frequency: successes as f64 / trials as f64,
        lower,
        upper,
    })
}
