//! Mutation operators, uniform neighbour sampling and exhaustive enumeration.
//!
//! All positions are 0-based. Every operator has a canonical parameter range
//! in which distinct parameters give distinct neighbours, so sampling the
//! parameters uniformly samples the neighbourhood uniformly.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::permutation::{Permutation, ProblemKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorSpec {
    /// Segment reversal on a symmetric tour (2 edges traded).
    StspTwoOpt,
    /// Move one node elsewhere in a symmetric tour (3 edges traded).
    StspInsertion,
    /// Swap two nodes at cyclic distance at least 3 (4 edges traded).
    StspExchange,
    /// Swap two adjacent segments of a directed tour (3 arcs traded).
    AtspThreeOpt,
    /// Reverse the order of three consecutive segments of a directed tour.
    AtspFourOpt,
    /// Derange the values at `k` positions of an assignment.
    QapKOpt(usize),
}

impl OperatorSpec {
    pub fn problem_kind(self) -> ProblemKind {
        match self {
            OperatorSpec::StspTwoOpt | OperatorSpec::StspInsertion | OperatorSpec::StspExchange => {
                ProblemKind::Stsp
            }
            OperatorSpec::AtspThreeOpt | OperatorSpec::AtspFourOpt => ProblemKind::Atsp,
            OperatorSpec::QapKOpt(_) => ProblemKind::Qap,
        }
    }

    /// Smallest `n` for which the neighbourhood is non-empty.
    pub fn min_size(self) -> usize {
        match self {
            OperatorSpec::StspTwoOpt => 4,
            OperatorSpec::StspInsertion => 5,
            OperatorSpec::StspExchange => 6,
            OperatorSpec::AtspThreeOpt => 3,
            OperatorSpec::AtspFourOpt => 4,
            OperatorSpec::QapKOpt(k) => k.max(2),
        }
    }

    pub fn check(self, n: usize) -> Result<()> {
        if let OperatorSpec::QapKOpt(k) = self {
            if k < 2 {
                return Err(Error::Operator {
                    op: self.to_string(),
                    reason: "k must be at least 2".into(),
                });
            }
        }
        if n < self.min_size() {
            return Err(Error::Operator {
                op: self.to_string(),
                reason: format!("needs n >= {}, got {n}", self.min_size()),
            });
        }
        Ok(())
    }

    /// Number of distinct neighbours of any solution of size `n`.
    pub fn neighborhood_size(self, n: usize) -> Result<u128> {
        self.check(n)?;
        let n128 = n as u128;
        Ok(match self {
            OperatorSpec::StspTwoOpt => n128 * (n128 - 3) / 2,
            OperatorSpec::StspInsertion => n128 * (n128 - 4),
            OperatorSpec::StspExchange => n128 * (n128 - 5) / 2,
            OperatorSpec::AtspThreeOpt => binomial(n, 3),
            OperatorSpec::AtspFourOpt => binomial(n, 4),
            OperatorSpec::QapKOpt(k) => derangement_count(k)
                .and_then(|d| d.checked_mul(binomial(n, k)))
                .ok_or_else(|| Error::Range(format!("{self} neighbourhood overflows at n={n}")))?,
        })
    }

    /// Parses an operator name, resolving `2opt`/`3opt`/`4opt` against the
    /// problem kind when one is given (`2opt` on QAP means `kopt:2`).
    pub fn parse_for(s: &str, kind: Option<ProblemKind>) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let short = lower.replace('-', "");
        if let Some(k) = short.strip_prefix("kopt:") {
            let k = k
                .parse()
                .map_err(|_| Error::Config(format!("bad k in operator '{s}'")))?;
            return Ok(OperatorSpec::QapKOpt(k));
        }
        let op = match (short.as_str(), kind) {
            ("2opt", Some(ProblemKind::Qap)) => OperatorSpec::QapKOpt(2),
            ("3opt", Some(ProblemKind::Qap)) => OperatorSpec::QapKOpt(3),
            ("4opt", Some(ProblemKind::Qap)) => OperatorSpec::QapKOpt(4),
            ("2opt", _) => OperatorSpec::StspTwoOpt,
            ("insertion", _) => OperatorSpec::StspInsertion,
            ("exchange", _) => OperatorSpec::StspExchange,
            ("3opt", _) => OperatorSpec::AtspThreeOpt,
            ("4opt", _) => OperatorSpec::AtspFourOpt,
            _ => return Err(Error::Config(format!("unknown operator '{s}'"))),
        };
        match kind {
            Some(k) if k != op.problem_kind() => Err(Error::KindMismatch {
                expected: k,
                found: op.problem_kind(),
            }),
            _ => Ok(op),
        }
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorSpec::StspTwoOpt => f.write_str("2opt"),
            OperatorSpec::StspInsertion => f.write_str("insertion"),
            OperatorSpec::StspExchange => f.write_str("exchange"),
            OperatorSpec::AtspThreeOpt => f.write_str("3opt"),
            OperatorSpec::AtspFourOpt => f.write_str("4opt"),
            OperatorSpec::QapKOpt(k) => write!(f, "kopt:{k}"),
        }
    }
}

impl FromStr for OperatorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OperatorSpec::parse_for(s, None)
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// `!k`, or `None` on overflow.
pub fn derangement_count(k: usize) -> Option<u128> {
    let (mut prev, mut cur) = (1u128, 0u128); // !0, !1
    if k == 0 {
        return Some(1);
    }
    for i in 2..=k {
        let next = (i as u128 - 1).checked_mul(prev.checked_add(cur)?)?;
        prev = cur;
        cur = next;
    }
    Some(cur)
}

/// A fixed-point-free permutation of `0..k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Derangement(Vec<usize>);

impl Derangement {
    pub fn new(values: Vec<usize>) -> Result<Self> {
        let p = Permutation::new(values).map_err(|e| Error::InvalidDerangement(e.to_string()))?;
        if let Some(i) = (0..p.len()).find(|&i| p[i] == i) {
            return Err(Error::InvalidDerangement(format!("fixed point at {i}")));
        }
        Ok(Derangement(p.into_vec()))
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Every derangement of `0..k` in lexicographic order.
    pub fn all(k: usize) -> Vec<Derangement> {
        fn extend(k: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Derangement>) {
            let i = cur.len();
            if i == k {
                out.push(Derangement(cur.clone()));
                return;
            }
            for v in 0..k {
                if v != i && !used[v] {
                    used[v] = true;
                    cur.push(v);
                    extend(k, cur, used, out);
                    cur.pop();
                    used[v] = false;
                }
            }
        }
        let mut out = Vec::new();
        if k >= 2 {
            extend(k, &mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
        }
        out
    }

    /// Uniform over all `!k` derangements.
    pub fn random<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<Derangement> {
        if k < 2 {
            return Err(Error::InvalidDerangement(format!("no derangement of {k} elements")));
        }
        if k <= 4 {
            let all = Derangement::all(k);
            return Ok(all[rng.random_range(0..all.len())].clone());
        }
        let mut v: Vec<usize> = (0..k).collect();
        loop {
            v.shuffle(rng);
            if v.iter().enumerate().all(|(i, &x)| i != x) {
                return Ok(Derangement(v));
            }
        }
    }
}

fn check_kind(p: &Permutation, op: OperatorSpec) -> Result<usize> {
    let n = p.len();
    op.check(n)?;
    Ok(n)
}

fn invalid(msg: String) -> Error {
    Error::InvalidMove(msg)
}

/// Reverses positions `i..=j`. The segment must hold between 2 and `n - 2`
/// elements; other lengths leave the tour unchanged or collapse the trade.
pub fn stsp_two_opt(p: &Permutation, i: usize, j: usize) -> Result<Permutation> {
    let n = check_kind(p, OperatorSpec::StspTwoOpt)?;
    if !(i < j && j < n) {
        return Err(invalid(format!("2-opt needs i < j < n, got ({i}, {j}) with n={n}")));
    }
    let len = j - i + 1;
    if len > n - 2 {
        return Err(invalid(format!(
            "2-opt segment ({i}, {j}) of length {len} does not change the tour"
        )));
    }
    let mut v = p.as_slice().to_vec();
    v[i..=j].reverse();
    Ok(Permutation::from_vec_unchecked(v))
}

/// Takes the element at position `i` out and re-inserts it immediately
/// after the element originally at position `j`.
///
/// `j` equal to `i`, or to `i - 1` (cyclically), is the identity; `j = i + 1`
/// and `j = i - 2` amount to swapping neighbours, which trades only two
/// edges. All four are rejected.
pub fn stsp_insertion(p: &Permutation, i: usize, j: usize) -> Result<Permutation> {
    let n = check_kind(p, OperatorSpec::StspInsertion)?;
    if i >= n || j >= n {
        return Err(invalid(format!("insertion positions ({i}, {j}) out of range")));
    }
    let offset = (j + n - i) % n;
    if offset <= 1 || offset >= n - 2 {
        return Err(invalid(format!(
            "insertion ({i}, {j}) trades fewer than three edges"
        )));
    }
    let mut v = p.as_slice().to_vec();
    let x = v.remove(i);
    let target = if j < i { j } else { j - 1 };
    v.insert(target + 1, x);
    Ok(Permutation::from_vec_unchecked(v))
}

/// Swaps the elements at positions `i` and `j`, which must be at cyclic
/// distance at least 3.
pub fn stsp_exchange(p: &Permutation, i: usize, j: usize) -> Result<Permutation> {
    let n = check_kind(p, OperatorSpec::StspExchange)?;
    if i >= n || j >= n {
        return Err(invalid(format!("exchange positions ({i}, {j}) out of range")));
    }
    let d = i.abs_diff(j);
    if d.min(n - d) < 3 {
        return Err(invalid(format!(
            "exchange positions ({i}, {j}) are at cyclic distance {} < 3",
            d.min(n - d)
        )));
    }
    let mut v = p.as_slice().to_vec();
    v.swap(i, j);
    Ok(Permutation::from_vec_unchecked(v))
}

/// Cuts after positions `i < j < k` and swaps the two middle segments:
/// `p[..=i] ++ p[j+1..=k] ++ p[i+1..=j] ++ p[k+1..]`.
pub fn atsp_three_opt(p: &Permutation, i: usize, j: usize, k: usize) -> Result<Permutation> {
    let n = check_kind(p, OperatorSpec::AtspThreeOpt)?;
    if !(i < j && j < k && k < n) {
        return Err(invalid(format!(
            "3-opt needs i < j < k < n, got ({i}, {j}, {k}) with n={n}"
        )));
    }
    let s = p.as_slice();
    let mut v = Vec::with_capacity(n);
    v.extend_from_slice(&s[..=i]);
    v.extend_from_slice(&s[j + 1..=k]);
    v.extend_from_slice(&s[i + 1..=j]);
    v.extend_from_slice(&s[k + 1..]);
    Ok(Permutation::from_vec_unchecked(v))
}

/// Cuts after positions `i < j < k < h` and reverses the order of the three
/// middle segments: `p[..=i] ++ p[k+1..=h] ++ p[j+1..=k] ++ p[i+1..=j] ++ p[h+1..]`.
pub fn atsp_four_opt(
    p: &Permutation,
    i: usize,
    j: usize,
    k: usize,
    h: usize,
) -> Result<Permutation> {
    let n = check_kind(p, OperatorSpec::AtspFourOpt)?;
    if !(i < j && j < k && k < h && h < n) {
        return Err(invalid(format!(
            "4-opt needs i < j < k < h < n, got ({i}, {j}, {k}, {h}) with n={n}"
        )));
    }
    let s = p.as_slice();
    let mut v = Vec::with_capacity(n);
    v.extend_from_slice(&s[..=i]);
    v.extend_from_slice(&s[k + 1..=h]);
    v.extend_from_slice(&s[j + 1..=k]);
    v.extend_from_slice(&s[i + 1..=j]);
    v.extend_from_slice(&s[h + 1..]);
    Ok(Permutation::from_vec_unchecked(v))
}

/// Rearranges the values at `positions` (strictly increasing) so that the
/// `t`-th chosen position receives the value previously at the
/// `d[t]`-th chosen position.
pub fn qap_k_opt(p: &Permutation, positions: &[usize], d: &Derangement) -> Result<Permutation> {
    let n = p.len();
    let k = positions.len();
    if d.k() != k {
        return Err(invalid(format!(
            "derangement on {} elements applied to {k} positions",
            d.k()
        )));
    }
    OperatorSpec::QapKOpt(k).check(n)?;
    if positions.windows(2).any(|w| w[0] >= w[1]) || positions.last().is_some_and(|&x| x >= n) {
        return Err(invalid(format!(
            "positions {positions:?} must be strictly increasing and below {n}"
        )));
    }
    let s = p.as_slice();
    let mut v = s.to_vec();
    for (t, &pos) in positions.iter().enumerate() {
        v[pos] = s[positions[d.as_slice()[t]]];
    }
    Ok(Permutation::from_vec_unchecked(v))
}

fn sorted_sample<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut v = sample(rng, n, k).into_vec();
    v.sort_unstable();
    v
}

/// Draws a neighbour of `p` uniformly from the operator's neighbourhood.
pub fn sample_neighbor<R: Rng + ?Sized>(
    p: &Permutation,
    op: OperatorSpec,
    rng: &mut R,
) -> Result<Permutation> {
    let n = check_kind(p, op)?;
    match op {
        OperatorSpec::StspTwoOpt => loop {
            // position 0 stays fixed; (1, n-1) would reverse everything else
            let ij = sorted_sample(rng, n - 1, 2);
            let (i, j) = (ij[0] + 1, ij[1] + 1);
            if !(i == 1 && j == n - 1) {
                return stsp_two_opt(p, i, j);
            }
        },
        OperatorSpec::StspInsertion => {
            let i = rng.random_range(0..n);
            let j = (i + 2 + rng.random_range(0..n - 4)) % n;
            stsp_insertion(p, i, j)
        }
        OperatorSpec::StspExchange => {
            // each unordered pair is reachable from both of its positions
            let i = rng.random_range(0..n);
            let j = (i + rng.random_range(3..=n - 3)) % n;
            stsp_exchange(p, i, j)
        }
        OperatorSpec::AtspThreeOpt => {
            let c = sorted_sample(rng, n, 3);
            atsp_three_opt(p, c[0], c[1], c[2])
        }
        OperatorSpec::AtspFourOpt => {
            let c = sorted_sample(rng, n, 4);
            atsp_four_opt(p, c[0], c[1], c[2], c[3])
        }
        OperatorSpec::QapKOpt(k) => {
            let positions = sorted_sample(rng, n, k);
            let d = Derangement::random(k, rng)?;
            qap_k_opt(p, &positions, &d)
        }
    }
}

fn combinations(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    if k > n {
        return Ok(());
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        f(&c)?;
        let mut t = k;
        while t > 0 && c[t - 1] == n - k + t - 1 {
            t -= 1;
        }
        if t == 0 {
            return Ok(());
        }
        c[t - 1] += 1;
        for u in t..k {
            c[u] = c[u - 1] + 1;
        }
    }
}

/// Every distinct neighbour of `p`, each exactly once, in the canonical
/// parameter order used by the sampler.
pub fn enumerate_neighbors(p: &Permutation, op: OperatorSpec) -> Result<Vec<Permutation>> {
    let n = check_kind(p, op)?;
    let mut out = Vec::new();
    match op {
        OperatorSpec::StspTwoOpt => {
            for i in 1..n {
                for j in i + 1..n {
                    if !(i == 1 && j == n - 1) {
                        out.push(stsp_two_opt(p, i, j)?);
                    }
                }
            }
        }
        OperatorSpec::StspInsertion => {
            for i in 0..n {
                for off in 2..n - 2 {
                    out.push(stsp_insertion(p, i, (i + off) % n)?);
                }
            }
        }
        OperatorSpec::StspExchange => {
            for i in 0..n {
                for j in i + 3..n {
                    if n - (j - i) >= 3 {
                        out.push(stsp_exchange(p, i, j)?);
                    }
                }
            }
        }
        OperatorSpec::AtspThreeOpt => combinations(n, 3, |c| {
            out.push(atsp_three_opt(p, c[0], c[1], c[2])?);
            Ok(())
        })?,
        OperatorSpec::AtspFourOpt => combinations(n, 4, |c| {
            out.push(atsp_four_opt(p, c[0], c[1], c[2], c[3])?);
            Ok(())
        })?,
        OperatorSpec::QapKOpt(k) => {
            let ds = Derangement::all(k);
            combinations(n, k, |c| {
                for d in &ds {
                    out.push(qap_k_opt(p, c, d)?);
                }
                Ok(())
            })?
        }
    }
    Ok(out)
}
