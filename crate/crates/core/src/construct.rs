//! Maximum-diversity populations, populations on which an operator admits no
//! improving step, and the exhaustive checks that certify both.

use std::cmp::Ordering;

use crate::diversity::{
    build_count_table, lex_compare, measure_vector, DiversityVector, MeasureKind, Population,
};
use crate::error::{Error, Result};
use crate::mutation::{binomial, enumerate_neighbors, OperatorSpec};
use crate::permutation::{Permutation, ProblemKind};

/// Default limit on the number of candidate populations an exhaustive check
/// may evaluate.
pub const DEFAULT_CAP: u128 = 20_000_000;

/// Cyclic left shift of the value sequence: `φ(a)(i) = a(i + 1)`.
pub fn shift(a: &Permutation) -> Permutation {
    let mut v = a.as_slice().to_vec();
    v.rotate_left(1);
    Permutation::from_vec_unchecked(v)
}

fn shift_by(a: &Permutation, times: usize) -> Permutation {
    let mut v = a.as_slice().to_vec();
    if !v.is_empty() {
        let len = v.len();
        v.rotate_left(times % len);
    }
    Permutation::from_vec_unchecked(v)
}

/// A QAP population whose assignment counts differ by at most one: with
/// `μ = kn + r`, the first `r` shifts of the identity appear `k + 1` times
/// and the remaining ones `k` times.
pub fn max_div_qap(n: usize, mu: usize) -> Result<Population> {
    if n == 0 {
        return Err(Error::TooSmall {
            kind: ProblemKind::Qap,
            min: 1,
            n,
        });
    }
    if mu == 0 {
        return Err(Error::PopulationTooSmall { mu, min: 1 });
    }
    let (k, r) = (mu / n, mu % n);
    let base = Permutation::identity(n);
    let mut members = Vec::with_capacity(mu);
    for s in 0..n {
        let copies = if s < r { k + 1 } else { k };
        let shifted = shift_by(&base, s);
        members.extend(std::iter::repeat_n(shifted, copies));
    }
    Population::new(ProblemKind::Qap, members)
}

/// `⌊(n - 1)/2⌋` pairwise edge-disjoint Hamiltonian cycles of `K_n`.
pub fn hamiltonian_decomposition(n: usize) -> Result<Vec<Permutation>> {
    ProblemKind::Stsp.check_size(n)?;
    let cycles = if n % 2 == 1 {
        zigzag_cycles(n)
    } else {
        let mut cycles = zigzag_cycles(n - 1);
        insert_extra_vertex(&mut cycles, n - 1)?;
        cycles
    };
    let out: Vec<Permutation> = cycles
        .into_iter()
        .map(Permutation::new)
        .collect::<Result<_>>()?;
    let pop = Population::new(ProblemKind::Stsp, out.clone())?;
    if build_count_table(&pop).d_p() > 1 {
        return Err(Error::Construction(format!(
            "cycle decomposition for n={n} reuses an edge"
        )));
    }
    Ok(out)
}

/// Rotational construction for odd `n = 2m + 1`: vertex `2m` is a hub and
/// the `i`-th cycle follows the zigzag `i, i+1, i-1, i+2, ..., i+m` (mod 2m).
fn zigzag_cycles(n: usize) -> Vec<Vec<usize>> {
    let m = (n - 1) / 2;
    let ring = 2 * m;
    (0..m)
        .map(|i| {
            let mut c = Vec::with_capacity(n);
            c.push(ring);
            c.push(i);
            for t in 1..m {
                c.push((i + t) % ring);
                c.push((i + ring - t) % ring);
            }
            c.push((i + m) % ring);
            c
        })
        .collect()
}

/// Subdivides one edge per cycle with `extra`, choosing the edges pairwise
/// vertex-disjoint so the new edges never repeat.
fn insert_extra_vertex(cycles: &mut [Vec<usize>], extra: usize) -> Result<()> {
    fn search(
        cycles: &[Vec<usize>],
        idx: usize,
        used: &mut Vec<bool>,
        chosen: &mut Vec<usize>,
    ) -> bool {
        if idx == cycles.len() {
            return true;
        }
        let c = &cycles[idx];
        for pos in 0..c.len() {
            let (a, b) = (c[pos], c[(pos + 1) % c.len()]);
            if used[a] || used[b] {
                continue;
            }
            used[a] = true;
            used[b] = true;
            chosen.push(pos);
            if search(cycles, idx + 1, used, chosen) {
                return true;
            }
            chosen.pop();
            used[a] = false;
            used[b] = false;
        }
        false
    }
    let mut used = vec![false; extra];
    let mut chosen = Vec::new();
    if !search(cycles, 0, &mut used, &mut chosen) {
        return Err(Error::Construction(format!(
            "no vertex-disjoint edge choice to insert vertex {extra}"
        )));
    }
    for (c, &pos) in cycles.iter_mut().zip(&chosen) {
        c.insert(pos + 1, extra);
    }
    Ok(())
}

/// `μ` pairwise edge-disjoint tours, `1 ≤ μ ≤ ⌊(n - 1)/2⌋`.
pub fn max_div_stsp(n: usize, mu: usize) -> Result<Population> {
    ProblemKind::Stsp.check_size(n)?;
    let max = (n - 1) / 2;
    if mu == 0 || mu > max {
        return Err(Error::Range(format!(
            "edge-disjoint tours on {n} nodes exist for 1 <= mu <= {max}, got {mu}"
        )));
    }
    let mut cycles = hamiltonian_decomposition(n)?;
    cycles.truncate(mu);
    Population::new(ProblemKind::Stsp, cycles)
}

/// Both orientations of `⌈μ/2⌉` edge-disjoint undirected tours, dropping the
/// last one when `μ` is odd.
pub fn max_div_atsp(n: usize, mu: usize) -> Result<Population> {
    ProblemKind::Atsp.check_size(n)?;
    let max = (n - 1) / 2;
    let pairs = mu.div_ceil(2);
    if mu == 0 || pairs > max {
        return Err(Error::Range(format!(
            "arc-disjoint directed tours on {n} nodes need ceil(mu/2) <= {max}, got mu={mu}"
        )));
    }
    let mut members = Vec::with_capacity(2 * pairs);
    for c in hamiltonian_decomposition(n)?.into_iter().take(pairs) {
        let mut rev = c.as_slice().to_vec();
        rev.reverse();
        members.push(c);
        members.push(Permutation::from_vec_unchecked(rev));
    }
    members.truncate(mu);
    let pop = Population::new(ProblemKind::Atsp, members)?;
    if build_count_table(&pop).d_p() > 1 {
        return Err(Error::Construction(format!(
            "directed tours for n={n}, mu={mu} share an arc"
        )));
    }
    Ok(pop)
}

fn inclusive(a: usize, b: usize) -> impl Iterator<Item = usize> {
    a..=b
}

/// `⌊(n + 2)/2⌋ + 1` assignments with `d_P = 2` on which no single 2-opt
/// step, combined with any removal, lowers the count vector.
pub fn qap_two_opt_trap(n: usize) -> Result<Population> {
    if n < 5 {
        return Err(Error::TooSmall {
            kind: ProblemKind::Qap,
            min: 5,
            n,
        });
    }
    let l = (n + 2) / 2;
    let a1: Vec<usize> = (1..=n).collect();
    let phi = |j: usize| {
        let mut v = a1.clone();
        v.rotate_left(j % n);
        v
    };
    let mut members: Vec<Vec<usize>> = vec![a1.clone()];
    if n == 6 {
        members.push(phi(2));
        members.push(vec![4, 5, 6, 2, 3, 1]);
        members.push(vec![2, 1, 4, 5, 6, 3]);
        members.push(vec![1, 6, 2, 3, 4, 5]);
    } else if n % 2 == 0 {
        for j in 2..l {
            let mut v = phi(j);
            // 2-opt at 1-based positions n-j+1 and n-j+2
            v.swap(n - j, n - j + 1);
            members.push(v);
        }
        let h = n / 2;
        let mut al = vec![2, 1];
        al.extend(inclusive(4, h + 1));
        al.push(3);
        al.extend(inclusive(h + 3, n));
        al.push(h + 2);
        members.push(al);
        let mut last = vec![1, n];
        last.extend(inclusive(2, n - 1));
        members.push(last);
    } else {
        for j in 2..l {
            members.push(phi(j));
        }
        let mut al = vec![2];
        al.extend(inclusive((n + 5) / 2, n));
        al.push((n + 3) / 2);
        al.extend(inclusive(3, (n + 1) / 2));
        al.push(1);
        members.push(al);
        let mut last = vec![1];
        last.extend(inclusive(3, (n + 1) / 2));
        last.push(2);
        last.extend(inclusive((n + 5) / 2, n));
        last.push((n + 3) / 2);
        members.push(last);
    }
    let members = members
        .iter()
        .map(|v| Permutation::from_one_based(v))
        .collect::<Result<Vec<_>>>()?;
    Population::new(ProblemKind::Qap, members)
}

/// Three tours on `n ≡ 0 (mod 4)` nodes, `n ≥ 8`: the identity, a
/// crisscross tour sharing two edges with it, and a skip tour disjoint from
/// both. The result is certified by [`verify_no_improvement`] with the
/// insertion operator under the count vector before it is returned.
pub fn stsp_three_opt_trap(n: usize) -> Result<Population> {
    if n < 8 || n % 4 != 0 {
        return Err(Error::Range(format!(
            "insertion trap needs n >= 8 with n divisible by 4, got {n}"
        )));
    }
    let h = n / 2;
    let first: Vec<usize> = (1..=n).collect();
    let mut cross = Vec::with_capacity(n);
    for t in (1..h).step_by(2) {
        cross.push(t);
        cross.push(n - t);
    }
    for s in (2..=h).rev().step_by(2) {
        cross.push(s);
        cross.push(n + 2 - s);
    }
    let mut skip: Vec<usize> = (1..h).step_by(2).collect();
    skip.extend((h + 2..=n).step_by(2));
    skip.extend((2..=h).rev().step_by(2));
    skip.extend((h + 1..n).rev().step_by(2));
    let members = [first, cross, skip]
        .iter()
        .map(|v| Permutation::from_one_based(v))
        .collect::<Result<Vec<_>>>()?;
    let pop = Population::new(ProblemKind::Stsp, members)?;
    let report = verify_no_improvement(
        &pop,
        OperatorSpec::StspInsertion,
        MeasureKind::NVector,
        DEFAULT_CAP,
    )?;
    if let Some(w) = report.witness {
        return Err(Error::Construction(format!(
            "insertion trap for n={n} is not certified: mutating member {} and removing {} improves",
            w.member, w.removed
        )));
    }
    Ok(pop)
}

/// A strictly improving step found by [`verify_no_improvement`].
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    /// Index of the mutated member.
    pub member: usize,
    pub neighbor: Permutation,
    /// Index of the member replaced by the neighbour.
    pub removed: usize,
    pub vector: DiversityVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImprovementReport {
    pub measure: MeasureKind,
    pub baseline: DiversityVector,
    /// Candidate populations evaluated before stopping.
    pub checked: u64,
    pub witness: Option<Witness>,
}

impl ImprovementReport {
    pub fn is_local_optimum(&self) -> bool {
        self.witness.is_none()
    }
}

/// Scans every member `b`, every neighbour `b'` of `b` and every member `a`,
/// and reports the first population `P \ {a} ∪ {b'}` whose measure vector is
/// strictly smaller than that of `P`.
pub fn verify_no_improvement(
    p: &Population,
    op: OperatorSpec,
    measure: MeasureKind,
    cap: u128,
) -> Result<ImprovementReport> {
    if op.problem_kind() != p.kind() {
        return Err(Error::KindMismatch {
            expected: p.kind(),
            found: op.problem_kind(),
        });
    }
    let mu = p.mu() as u128;
    let size = mu * mu * op.neighborhood_size(p.n())?;
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let baseline = measure_vector(p, measure)?;
    let mut checked = 0u64;
    for (b, member) in p.members().iter().enumerate() {
        for neighbor in enumerate_neighbors(member, op)? {
            for a in 0..p.mu() {
                let candidate = p.replaced(a, neighbor.clone())?;
                let vector = measure_vector(&candidate, measure)?;
                checked += 1;
                if lex_compare(&vector, &baseline)? == Ordering::Less {
                    return Ok(ImprovementReport {
                        measure,
                        baseline,
                        checked,
                        witness: Some(Witness {
                            member: b,
                            neighbor,
                            removed: a,
                            vector,
                        }),
                    });
                }
            }
        }
    }
    Ok(ImprovementReport {
        measure,
        baseline,
        checked,
        witness: None,
    })
}

/// One representative of every distinct solution: all permutations for QAP,
/// rotations fixed for directed tours, rotations and reversal fixed for
/// symmetric tours.
fn representatives(kind: ProblemKind, n: usize) -> Vec<Permutation> {
    fn permute(rest: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for idx in 0..rest.len() {
            let v = rest.remove(idx);
            cur.push(v);
            permute(rest, cur, out);
            cur.pop();
            rest.insert(idx, v);
        }
    }
    let mut out = Vec::new();
    match kind {
        ProblemKind::Qap => permute(&mut (0..n).collect(), &mut Vec::new(), &mut out),
        ProblemKind::Atsp | ProblemKind::Stsp => {
            permute(&mut (1..n).collect(), &mut vec![0], &mut out);
            if kind == ProblemKind::Stsp {
                out.retain(|v| v[1] < v[n - 1]);
            }
        }
    }
    out.into_iter().map(Permutation::from_vec_unchecked).collect()
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// The lexicographically smallest measure vector over all populations of `μ`
/// solutions, found by exhaustive search over multisets.
pub fn brute_force_optimum(
    kind: ProblemKind,
    n: usize,
    mu: usize,
    measure: MeasureKind,
    cap: u128,
) -> Result<DiversityVector> {
    kind.check_size(n)?;
    if mu == 0 || (measure == MeasureKind::DVector && mu < 2) {
        return Err(Error::PopulationTooSmall {
            mu,
            min: if measure == MeasureKind::DVector { 2 } else { 1 },
        });
    }
    let reps_count = match kind {
        ProblemKind::Qap => factorial(n),
        ProblemKind::Atsp => factorial(n - 1),
        ProblemKind::Stsp => (factorial(n - 1) / 2).max(1),
    };
    let size = binomial((reps_count + mu as u128 - 1) as usize, mu);
    if reps_count > cap || size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let reps = representatives(kind, n);
    let r = reps.len();
    let mut idx = vec![0usize; mu];
    let mut best: Option<DiversityVector> = None;
    loop {
        let members = idx.iter().map(|&i| reps[i].clone()).collect();
        let v = measure_vector(&Population::new(kind, members)?, measure)?;
        if best
            .as_ref()
            .is_none_or(|b| lex_compare(&v, b).map(|o| o == Ordering::Less).unwrap_or(false))
        {
            best = Some(v);
        }
        // next non-decreasing index tuple
        let mut t = mu;
        while t > 0 && idx[t - 1] == r - 1 {
            t -= 1;
        }
        if t == 0 {
            break;
        }
        idx[t - 1] += 1;
        let v = idx[t - 1];
        for slot in idx.iter_mut().skip(t) {
            *slot = v;
        }
    }
    Ok(best.expect("at least one population"))
}
