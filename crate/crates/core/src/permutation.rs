//! Permutation genotype and the objects a permutation induces.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Which permutation problem a solution belongs to. Determines how a
/// permutation is read (visit order or assignment) and which objects it uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Stsp,
    Atsp,
    Qap,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 3] = [ProblemKind::Stsp, ProblemKind::Atsp, ProblemKind::Qap];

    /// Number of distinct objects `m` for instance size `n`.
    pub fn universe_size(self, n: usize) -> usize {
        match self {
            ProblemKind::Stsp => n * n.saturating_sub(1) / 2,
            ProblemKind::Atsp => n * n.saturating_sub(1),
            ProblemKind::Qap => n * n,
        }
    }

    pub fn min_size(self) -> usize {
        match self {
            ProblemKind::Stsp | ProblemKind::Atsp => 3,
            ProblemKind::Qap => 1,
        }
    }

    pub fn is_tour(self) -> bool {
        !matches!(self, ProblemKind::Qap)
    }

    pub fn check_size(self, n: usize) -> Result<()> {
        if n < self.min_size() {
            return Err(Error::TooSmall {
                kind: self,
                min: self.min_size(),
                n,
            });
        }
        Ok(())
    }

    /// Dense identifier of an object inside an `n * n` table.
    ///
    /// STSP edges are stored with the smaller endpoint first.
    #[inline]
    pub fn object_id(self, n: usize, a: usize, b: usize) -> usize {
        match self {
            ProblemKind::Stsp if a > b => b * n + a,
            _ => a * n + b,
        }
    }

    /// Whether a dense identifier belongs to the object universe.
    pub fn is_object(self, n: usize, id: usize) -> bool {
        let (a, b) = (id / n, id % n);
        match self {
            ProblemKind::Stsp => a < b,
            ProblemKind::Atsp => a != b && a < n,
            ProblemKind::Qap => a < n,
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Stsp => "STSP",
            ProblemKind::Atsp => "ATSP",
            ProblemKind::Qap => "QAP",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "STSP" | "TSP" => Ok(ProblemKind::Stsp),
            "ATSP" => Ok(ProblemKind::Atsp),
            "QAP" => Ok(ProblemKind::Qap),
            other => Err(Error::Config(format!("unknown problem kind '{other}'"))),
        }
    }
}

/// A bijection on `{0, …, n-1}`.
///
/// For tours the sequence is the visit order; for QAP position `i` holds the
/// location assigned to facility `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

/// Checks that `values` is a bijection on `{0, …, n-1}`.
pub fn validate_permutation(values: &[usize]) -> Result<Permutation> {
    Permutation::new(values.to_vec())
}

impl Permutation {
    pub fn new(values: Vec<usize>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut seen = vec![false; n];
        for (index, &value) in values.iter().enumerate() {
            if value >= n {
                return Err(Error::OutOfRange { index, value, n });
            }
            if std::mem::replace(&mut seen[value], true) {
                return Err(Error::Duplicate { index, value });
            }
        }
        Ok(Permutation(values))
    }

    /// Builds from 1-based values as they appear in QAPLIB and population files.
    pub fn from_one_based(values: &[usize]) -> Result<Self> {
        let n = values.len();
        let zero_based = values
            .iter()
            .enumerate()
            .map(|(index, &v)| {
                if v == 0 || v > n {
                    Err(Error::OutOfRange { index, value: v, n })
                } else {
                    Ok(v - 1)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(zero_based)
    }

    pub(crate) fn from_vec_unchecked(values: Vec<usize>) -> Self {
        debug_assert!(Permutation::new(values.clone()).is_ok());
        Permutation(values)
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut v: Vec<usize> = (0..n).collect();
        v.shuffle(rng);
        Permutation(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|v| v + 1).collect()
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        Permutation(inv)
    }

    /// Dense identifiers of the `n` objects this permutation uses under `kind`.
    ///
    /// Callers must have checked `kind.check_size(n)`.
    pub fn object_ids(&self, kind: ProblemKind) -> impl Iterator<Item = usize> + '_ {
        let n = self.len();
        let v = &self.0;
        (0..n).map(move |i| match kind {
            ProblemKind::Qap => i * n + v[i],
            _ => kind.object_id(n, v[i], v[(i + 1) % n]),
        })
    }
}

impl std::ops::Index<usize> for Permutation {
    type Output = usize;

    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// The `n` objects used by one solution, as sorted dense identifiers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectSet {
    kind: ProblemKind,
    n: usize,
    ids: Vec<usize>,
}

impl ObjectSet {
    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.ids
            .binary_search(&self.kind.object_id(self.n, a, b))
            .is_ok()
    }

    /// Objects as pairs: `(u, v)` edges (`u < v` for STSP) or `(position, value)`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.ids.iter().map(|&id| (id / self.n, id % self.n)).collect()
    }

    pub fn intersection_len(&self, other: &ObjectSet) -> usize {
        let (mut i, mut j, mut shared) = (0, 0, 0);
        while i < self.ids.len() && j < other.ids.len() {
            match self.ids[i].cmp(&other.ids[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    shared += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        shared
    }
}

pub fn object_set(p: &Permutation, kind: ProblemKind) -> Result<ObjectSet> {
    kind.check_size(p.len())?;
    let mut ids: Vec<usize> = p.object_ids(kind).collect();
    ids.sort_unstable();
    Ok(ObjectSet {
        kind,
        n: p.len(),
        ids,
    })
}

/// Number of objects shared by two solutions, `|obj(x) ∩ obj(y)|`.
pub fn overlap(x: &Permutation, y: &Permutation, kind: ProblemKind) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    kind.check_size(x.len())?;
    Ok(overlap_unchecked(x, y, kind))
}

pub(crate) fn overlap_unchecked(x: &Permutation, y: &Permutation, kind: ProblemKind) -> usize {
    let n = x.len();
    match kind {
        ProblemKind::Qap => x.0.iter().zip(&y.0).filter(|(a, b)| a == b).count(),
        ProblemKind::Atsp | ProblemKind::Stsp => {
            let mut succ = vec![0usize; n];
            for i in 0..n {
                succ[y.0[i]] = y.0[(i + 1) % n];
            }
            let symmetric = kind == ProblemKind::Stsp;
            (0..n)
                .filter(|&i| {
                    let (u, v) = (x.0[i], x.0[(i + 1) % n]);
                    succ[u] == v || (symmetric && succ[v] == u)
                })
                .count()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    #[test]
    fn validation_accepts_bijections() {
        assert!(validate_permutation(&[0, 1, 2, 3]).is_ok());
        assert!(validate_permutation(&[2, 0, 1]).is_ok());
    }

    #[test]
    fn validation_names_offending_index() {
        match validate_permutation(&[0, 0, 2]) {
            Err(Error::Duplicate { index, value }) => assert_eq!((index, value), (1, 0)),
            other => panic!("unexpected {other:?}"),
        }
        match validate_permutation(&[0, 3, 1]) {
            Err(Error::OutOfRange { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(validate_permutation(&[]), Err(Error::Empty)));
    }

    #[test]
    fn object_sets_per_kind() {
        let s = object_set(&perm(&[0, 1, 2, 3]), ProblemKind::Stsp).unwrap();
        assert_eq!(s.pairs(), vec![(0, 1), (0, 3), (1, 2), (2, 3)]);

        let a = object_set(&perm(&[0, 1, 2]), ProblemKind::Atsp).unwrap();
        assert_eq!(a.pairs(), vec![(0, 1), (1, 2), (2, 0)]);

        let q = object_set(&perm(&[0, 2, 1]), ProblemKind::Qap).unwrap();
        assert_eq!(q.pairs(), vec![(0, 0), (1, 2), (2, 1)]);
    }

    #[test]
    fn tours_need_three_nodes() {
        assert!(object_set(&perm(&[1, 0]), ProblemKind::Stsp).is_err());
        assert!(object_set(&perm(&[1, 0]), ProblemKind::Atsp).is_err());
        assert!(object_set(&perm(&[0]), ProblemKind::Qap).is_ok());
    }

    #[test]
    fn overlap_examples() {
        let x = perm(&[0, 1, 2, 3]);
        assert_eq!(overlap(&x, &x, ProblemKind::Stsp).unwrap(), 4);
        // {0,2},{1,2},{1,3},{0,3} against {0,1},{1,2},{2,3},{0,3}
        assert_eq!(
            overlap(&x, &perm(&[0, 2, 1, 3]), ProblemKind::Stsp).unwrap(),
            2
        );
        let a1 = Permutation::from_one_based(&[1, 2, 3, 4]).unwrap();
        let a2 = Permutation::from_one_based(&[1, 3, 4, 2]).unwrap();
        assert_eq!(overlap(&a1, &a2, ProblemKind::Qap).unwrap(), 1);
        assert!(overlap(&x, &perm(&[0, 1, 2]), ProblemKind::Qap).is_err());
    }

    #[test]
    fn reversed_tour_shares_all_undirected_edges_only() {
        let x = perm(&[0, 1, 2, 3, 4]);
        let r = perm(&[4, 3, 2, 1, 0]);
        assert_eq!(overlap(&x, &r, ProblemKind::Stsp).unwrap(), 5);
        assert_eq!(overlap(&x, &r, ProblemKind::Atsp).unwrap(), 0);
    }

    #[test]
    fn universe_sizes() {
        assert_eq!(ProblemKind::Stsp.universe_size(5), 10);
        assert_eq!(ProblemKind::Atsp.universe_size(5), 20);
        assert_eq!(ProblemKind::Qap.universe_size(5), 25);
    }
}
