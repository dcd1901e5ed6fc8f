//! Object counts, the lexicographic diversity measures and survival selection.
//!
//! Two measures drive selection. [`MeasureKind::NVector`] sorts the counts of
//! every object in the universe in descending order; [`MeasureKind::DVector`]
//! sorts all pairwise overlaps. Both are minimised lexicographically. The
//! scalar scores D1 (sum of pairwise object-set differences) and D2 (sum of
//! nearest-neighbour distances) are reported alongside.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::permutation::{overlap_unchecked, Permutation, ProblemKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    /// Sorted object counts (drives D1).
    NVector,
    /// Sorted pairwise overlaps (drives D2).
    DVector,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 2] = [MeasureKind::NVector, MeasureKind::DVector];
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasureKind::NVector => "n",
            MeasureKind::DVector => "d",
        })
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "n" | "d1" => Ok(MeasureKind::NVector),
            "d" | "d2" => Ok(MeasureKind::DVector),
            other => Err(Error::Config(format!("unknown measure '{other}'"))),
        }
    }
}

/// How ties in the removal argmin are broken.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    /// Uniformly among all minimisers, using the run's generator.
    #[default]
    Random,
    /// Lowest index among the minimisers.
    First,
}

impl FromStr for TieBreak {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(TieBreak::Random),
            "first" => Ok(TieBreak::First),
            other => Err(Error::Config(format!("unknown tie-break '{other}'"))),
        }
    }
}

impl fmt::Display for TieBreak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieBreak::Random => "random",
            TieBreak::First => "first",
        })
    }
}

/// An ordered multiset of solutions of one problem kind and size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Population {
    kind: ProblemKind,
    n: usize,
    members: Vec<Permutation>,
}

impl Population {
    pub fn new(kind: ProblemKind, members: Vec<Permutation>) -> Result<Self> {
        let first = members
            .first()
            .ok_or(Error::PopulationTooSmall { mu: 0, min: 1 })?;
        let n = first.len();
        kind.check_size(n)?;
        if let Some(bad) = members.iter().find(|m| m.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(Population { kind, n, members })
    }

    /// `mu` copies of `p`.
    pub fn duplicates(kind: ProblemKind, p: &Permutation, mu: usize) -> Result<Self> {
        Population::new(kind, vec![p.clone(); mu])
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[Permutation] {
        &self.members
    }

    pub fn into_members(self) -> Vec<Permutation> {
        self.members
    }

    /// `P \ {index} ∪ {replacement}`, keeping the order of the other members.
    pub fn replaced(&self, index: usize, replacement: Permutation) -> Result<Population> {
        if replacement.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: replacement.len(),
            });
        }
        let mut members = self.members.clone();
        members[index] = replacement;
        Ok(Population {
            kind: self.kind,
            n: self.n,
            members,
        })
    }

    /// `P ∪ {extra}` (the offspring is appended last).
    pub fn with_member(&self, extra: Permutation) -> Result<Population> {
        let mut members = self.members.clone();
        members.push(extra);
        Population::new(self.kind, members)
    }

    pub fn without(&self, index: usize) -> Result<Population> {
        let mut members = self.members.clone();
        members.remove(index);
        Population::new(self.kind, members)
    }
}

/// Object → number of members using it, with a histogram over count values so
/// that `d_P`, `c_P`, the minimum count and the whole count vector are cheap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    kind: ProblemKind,
    n: usize,
    members: usize,
    counts: Vec<u32>,
    // histogram[c] = number of universe objects with count c
    histogram: Vec<usize>,
}

impl CountTable {
    pub fn new(kind: ProblemKind, n: usize) -> Self {
        CountTable {
            kind,
            n,
            members: 0,
            counts: vec![0; n * n],
            histogram: vec![kind.universe_size(n)],
        }
    }

    pub fn from_population(p: &Population) -> Self {
        let mut ct = CountTable::new(p.kind, p.n);
        for m in &p.members {
            ct.add(m);
        }
        ct
    }

    pub fn add(&mut self, p: &Permutation) {
        for id in p.object_ids(self.kind) {
            self.increment(id);
        }
        self.members += 1;
    }

    pub fn remove(&mut self, p: &Permutation) {
        for id in p.object_ids(self.kind) {
            self.decrement(id);
        }
        self.members -= 1;
    }

    pub(crate) fn add_ids(&mut self, ids: &[usize]) {
        for &id in ids {
            self.increment(id);
        }
        self.members += 1;
    }

    pub(crate) fn remove_ids(&mut self, ids: &[usize]) {
        for &id in ids {
            self.decrement(id);
        }
        self.members -= 1;
    }

    #[inline]
    fn increment(&mut self, id: usize) {
        let c = self.counts[id] as usize;
        self.histogram[c] -= 1;
        if self.histogram.len() <= c + 1 {
            self.histogram.push(0);
        }
        self.histogram[c + 1] += 1;
        self.counts[id] += 1;
    }

    #[inline]
    fn decrement(&mut self, id: usize) {
        let c = self.counts[id] as usize;
        debug_assert!(c > 0, "removing an object that is not counted");
        self.histogram[c] -= 1;
        self.histogram[c - 1] += 1;
        self.counts[id] -= 1;
        while self.histogram.len() > 1 && *self.histogram.last().unwrap() == 0 {
            self.histogram.pop();
        }
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of solutions counted.
    pub fn population_size(&self) -> usize {
        self.members
    }

    pub fn universe_size(&self) -> usize {
        self.kind.universe_size(self.n)
    }

    /// Count of object `(a, b)`: an edge, or the assignment `a → b`.
    pub fn count(&self, a: usize, b: usize) -> u32 {
        self.counts[self.kind.object_id(self.n, a, b)]
    }

    #[inline]
    pub(crate) fn count_id(&self, id: usize) -> u32 {
        self.counts[id]
    }

    /// `histogram()[c]` is the number of universe objects with count `c`.
    pub fn histogram(&self) -> &[usize] {
        &self.histogram
    }

    /// Maximum count `d_P`.
    pub fn d_p(&self) -> u32 {
        (self.histogram.len() - 1) as u32
    }

    /// Number of objects attaining `d_P`.
    pub fn c_p(&self) -> usize {
        *self.histogram.last().unwrap()
    }

    pub fn min_count(&self) -> u32 {
        self.histogram.iter().position(|&h| h > 0).unwrap_or(0) as u32
    }

    /// Counts differ by at most one across the whole universe.
    pub fn is_balanced(&self) -> bool {
        self.d_p() - self.min_count() <= 1
    }

    pub fn total(&self) -> u64 {
        self.histogram
            .iter()
            .enumerate()
            .map(|(c, &h)| c as u64 * h as u64)
            .sum()
    }

    /// Objects with count exactly one.
    pub fn unique_objects(&self) -> usize {
        self.histogram.get(1).copied().unwrap_or(0)
    }

    /// `Σ_e n(e)(1 - n(e))`, always ≤ 0.
    fn sum_n_one_minus_n(&self) -> i64 {
        self.histogram
            .iter()
            .enumerate()
            .map(|(c, &h)| h as i64 * c as i64 * (1 - c as i64))
            .sum()
    }
}

pub fn build_count_table(p: &Population) -> CountTable {
    CountTable::from_population(p)
}

/// A descending-sorted vector of nominal length `len`, stored as its non-zero
/// prefix. Comparison is lexicographic over the zero-padded sequence; smaller
/// means more diverse.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiversityVector {
    entries: Vec<u32>,
    len: usize,
}

impl DiversityVector {
    pub fn from_values(mut values: Vec<u32>, len: usize) -> Result<Self> {
        if values.len() > len {
            return Err(Error::LengthMismatch(values.len(), len));
        }
        values.retain(|&v| v > 0);
        values.sort_unstable_by(|a, b| b.cmp(a));
        Ok(DiversityVector {
            entries: values,
            len,
        })
    }

    pub(crate) fn from_histogram(histogram: &[usize], len: usize) -> Self {
        let mut entries = Vec::new();
        for (value, &h) in histogram.iter().enumerate().skip(1).rev() {
            entries.extend(std::iter::repeat_n(value as u32, h));
        }
        DiversityVector { entries, len }
    }

    /// Non-zero entries in descending order.
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn to_padded(&self) -> Vec<u32> {
        let mut v = self.entries.clone();
        v.resize(self.len, 0);
        v
    }

    /// Largest entry (0 for an all-zero vector).
    pub fn max(&self) -> u32 {
        self.entries.first().copied().unwrap_or(0)
    }
}

impl fmt::Display for DiversityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let padded = self.to_padded();
        write!(f, "(")?;
        for (i, v) in padded.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Lexicographic comparison of two vectors of the same nominal length.
pub fn lex_compare(a: &DiversityVector, b: &DiversityVector) -> Result<Ordering> {
    if a.len != b.len {
        return Err(Error::LengthMismatch(a.len, b.len));
    }
    let longest = a.entries.len().max(b.entries.len());
    for i in 0..longest {
        let x = a.entries.get(i).copied().unwrap_or(0);
        let y = b.entries.get(i).copied().unwrap_or(0);
        match x.cmp(&y) {
            Ordering::Equal => continue,
            other => return Ok(other),
        }
    }
    Ok(Ordering::Equal)
}

/// All object counts, sorted descending, nominal length `m`.
pub fn n_vector(ct: &CountTable) -> DiversityVector {
    DiversityVector::from_histogram(&ct.histogram, ct.universe_size())
}

/// Symmetric matrix of pairwise overlaps `o_XY`; the diagonal holds `n`.
pub fn overlap_matrix(p: &Population) -> Vec<Vec<usize>> {
    let mu = p.mu();
    let mut o = vec![vec![p.n; mu]; mu];
    for i in 0..mu {
        for j in i + 1..mu {
            let v = overlap_unchecked(&p.members[i], &p.members[j], p.kind);
            o[i][j] = v;
            o[j][i] = v;
        }
    }
    o
}

/// All `μ(μ-1)/2` pairwise overlaps, sorted descending.
pub fn d_vector(p: &Population) -> Result<DiversityVector> {
    let mu = p.mu();
    if mu < 2 {
        return Err(Error::PopulationTooSmall { mu, min: 2 });
    }
    let o = overlap_matrix(p);
    let values: Vec<u32> = (0..mu)
        .flat_map(|i| (i + 1..mu).map(move |j| (i, j)))
        .map(|(i, j)| o[i][j] as u32)
        .collect();
    DiversityVector::from_values(values, mu * (mu - 1) / 2)
}

/// The vector `measure` minimises.
pub fn measure_vector(p: &Population, measure: MeasureKind) -> Result<DiversityVector> {
    match measure {
        MeasureKind::NVector => Ok(n_vector(&CountTable::from_population(p))),
        MeasureKind::DVector => d_vector(p),
    }
}

/// A raw diversity score and its value divided by the applicable upper bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Score {
    pub raw: u64,
    pub normalized: f64,
}

/// `D1` from counts: `μ(μ-1)n + Σ_e n(e)(1 - n(e))`.
pub fn d1_from_counts(ct: &CountTable) -> u64 {
    let mu = ct.population_size() as i64;
    let n = ct.n() as i64;
    (mu * (mu - 1) * n + ct.sum_n_one_minus_n()) as u64
}

pub fn d1_score(p: &Population) -> Score {
    let ct = CountTable::from_population(p);
    let raw = d1_from_counts(&ct);
    let bound = d1_upper_bound(p.kind, p.n, p.mu());
    Score {
        raw,
        normalized: if bound == 0 { 1.0 } else { raw as f64 / bound as f64 },
    }
}

/// `D2 = Σ_X min_{Y≠X} (n - o_XY)` from a precomputed overlap matrix.
pub(crate) fn d2_from_overlaps(n: usize, overlaps: &[Vec<usize>]) -> u64 {
    let mu = overlaps.len();
    (0..mu)
        .map(|i| {
            let max_overlap = (0..mu).filter(|&j| j != i).map(|j| overlaps[i][j]).max().unwrap();
            (n - max_overlap) as u64
        })
        .sum()
}

pub fn d2_score(p: &Population) -> Result<Score> {
    let mu = p.mu();
    if mu < 2 {
        return Err(Error::PopulationTooSmall { mu, min: 2 });
    }
    let raw = d2_from_overlaps(p.n, &overlap_matrix(p));
    Ok(Score {
        raw,
        normalized: raw as f64 / (mu * p.n) as f64,
    })
}

/// Largest D1 attainable if the `μn` object tokens could be spread over the
/// `m` objects with counts differing by at most one. Exact for QAP (the shift
/// construction attains it); for tours outside the decomposition range it is
/// only an upper bound.
pub fn d1_upper_bound(kind: ProblemKind, n: usize, mu: usize) -> u64 {
    let m = kind.universe_size(n) as u64;
    let (n, mu) = (n as u64, mu as u64);
    if m == 0 {
        return 0;
    }
    let tokens = mu * n;
    let (q, r) = (tokens / m, tokens % m);
    let sum_sq = r * (q + 1) * (q + 1) + (m - r) * q * q;
    mu * mu.saturating_sub(1) * n + tokens - sum_sq
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PopulationStats {
    pub d_p: u32,
    pub c_p: usize,
    /// Objects used by exactly one member, divided by `μn`.
    pub unique_fraction: f64,
}

impl PopulationStats {
    pub fn from_counts(ct: &CountTable) -> Self {
        PopulationStats {
            d_p: ct.d_p(),
            c_p: ct.c_p(),
            unique_fraction: ct.unique_objects() as f64
                / (ct.population_size() * ct.n()) as f64,
        }
    }
}

pub fn population_stats(p: &Population) -> PopulationStats {
    PopulationStats::from_counts(&CountTable::from_population(p))
}

/// Picks the candidate whose key, sorted descending, is lexicographically
/// largest. Keys are produced by `fill` (unsorted) and must all have the same
/// length.
///
/// Removing member `J` lowers a fixed multiset by exactly `J`'s key (its
/// objects' counts, or its overlaps with the others), so the candidate with
/// the largest key leaves the smallest vector behind.
pub(crate) fn select_largest_key<R: Rng + ?Sized>(
    candidates: usize,
    mut fill: impl FnMut(usize, &mut Vec<u32>),
    tie: TieBreak,
    rng: &mut R,
) -> usize {
    let mut buf = Vec::new();
    let mut best_top = (0u32, 0usize);
    let mut survivors = Vec::new();
    for j in 0..candidates {
        buf.clear();
        fill(j, &mut buf);
        let top = buf.iter().copied().max().unwrap_or(0);
        let at_top = buf.iter().filter(|&&v| v == top).count();
        match (top, at_top).cmp(&best_top) {
            Ordering::Greater => {
                best_top = (top, at_top);
                survivors.clear();
                survivors.push(j);
            }
            Ordering::Equal => survivors.push(j),
            Ordering::Less => {}
        }
    }
    if survivors.len() > 1 {
        let mut best_key: Vec<u32> = Vec::new();
        let mut ties = Vec::new();
        for &j in &survivors {
            buf.clear();
            fill(j, &mut buf);
            buf.sort_unstable_by(|a, b| b.cmp(a));
            match buf.as_slice().cmp(best_key.as_slice()) {
                Ordering::Greater => {
                    best_key.clone_from(&buf);
                    ties.clear();
                    ties.push(j);
                }
                Ordering::Equal => ties.push(j),
                Ordering::Less => {}
            }
        }
        survivors = ties;
    }
    match tie {
        TieBreak::First => survivors[0],
        TieBreak::Random if survivors.len() == 1 => survivors[0],
        TieBreak::Random => survivors[rng.random_range(0..survivors.len())],
    }
}

/// Index of a member whose removal from `p_plus` minimises `measure`.
pub fn select_removal<R: Rng + ?Sized>(
    p_plus: &Population,
    measure: MeasureKind,
    tie: TieBreak,
    rng: &mut R,
) -> usize {
    let kind = p_plus.kind;
    match measure {
        MeasureKind::NVector => {
            let ct = CountTable::from_population(p_plus);
            select_largest_key(
                p_plus.mu(),
                |j, buf| buf.extend(p_plus.members[j].object_ids(kind).map(|id| ct.count_id(id))),
                tie,
                rng,
            )
        }
        MeasureKind::DVector => {
            let o = overlap_matrix(p_plus);
            select_largest_key(
                p_plus.mu(),
                |j, buf| {
                    buf.extend(
                        (0..o.len())
                            .filter(|&i| i != j)
                            .map(|i| o[j][i] as u32),
                    )
                },
                tie,
                rng,
            )
        }
    }
}

/// Sum of counts of objects incident to a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IncidentSum {
    Undirected(u64),
    Directed { out: u64, incoming: u64 },
}

pub fn incident_count_sum(node: usize, ct: &CountTable) -> Result<IncidentSum> {
    let n = ct.n();
    if node >= n {
        return Err(Error::Range(format!("node {node} not in 0..{n}")));
    }
    let others = (0..n).filter(move |&v| v != node);
    match ct.kind() {
        ProblemKind::Stsp => Ok(IncidentSum::Undirected(
            others.map(|v| ct.count(node, v) as u64).sum(),
        )),
        ProblemKind::Atsp => Ok(IncidentSum::Directed {
            out: others.clone().map(|v| ct.count(node, v) as u64).sum(),
            incoming: others.map(|v| ct.count(v, node) as u64).sum(),
        }),
        ProblemKind::Qap => Err(Error::KindMismatch {
            expected: ProblemKind::Stsp,
            found: ProblemKind::Qap,
        }),
    }
}
