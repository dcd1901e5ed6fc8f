//! Naive reference implementations shared by the integration tests. They
//! recompute everything from scratch with hash sets and maps so that they
//! share no code paths with the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use edo_core::{Permutation, Population, ProblemKind};

pub fn objects(p: &Permutation, kind: ProblemKind) -> BTreeSet<(usize, usize)> {
    let v = p.as_slice();
    let n = v.len();
    match kind {
        ProblemKind::Qap => (0..n).map(|i| (i, v[i])).collect(),
        ProblemKind::Atsp => (0..n).map(|i| (v[i], v[(i + 1) % n])).collect(),
        ProblemKind::Stsp => (0..n)
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % n]);
                (a.min(b), a.max(b))
            })
            .collect(),
    }
}

pub fn counts(members: &[Permutation], kind: ProblemKind) -> BTreeMap<(usize, usize), u32> {
    let mut m = BTreeMap::new();
    for p in members {
        for o in objects(p, kind) {
            *m.entry(o).or_insert(0) += 1;
        }
    }
    m
}

/// Full padded descending count vector over the whole universe.
pub fn count_vector(members: &[Permutation], kind: ProblemKind) -> Vec<u32> {
    let n = members[0].len();
    let m = kind.universe_size(n);
    let mut v: Vec<u32> = counts(members, kind).into_values().collect();
    v.resize(m, 0);
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

pub fn overlap(x: &Permutation, y: &Permutation, kind: ProblemKind) -> usize {
    objects(x, kind).intersection(&objects(y, kind)).count()
}

pub fn overlap_vector(members: &[Permutation], kind: ProblemKind) -> Vec<u32> {
    let mut v = Vec::new();
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            v.push(overlap(&members[i], &members[j], kind) as u32);
        }
    }
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

pub fn vector(members: &[Permutation], kind: ProblemKind, count_based: bool) -> Vec<u32> {
    if count_based {
        count_vector(members, kind)
    } else {
        overlap_vector(members, kind)
    }
}

/// Σ over ordered pairs X ≠ Y of |obj(X) \ obj(Y)|.
pub fn d1_pairwise(members: &[Permutation], kind: ProblemKind) -> u64 {
    let sets: Vec<_> = members.iter().map(|p| objects(p, kind)).collect();
    let mut total = 0;
    for (i, x) in sets.iter().enumerate() {
        for (j, y) in sets.iter().enumerate() {
            if i != j {
                total += x.difference(y).count() as u64;
            }
        }
    }
    total
}

/// Indices whose removal gives the smallest vector, by rebuilding the vector
/// for every candidate.
pub fn naive_removal_set(p: &Population, count_based: bool) -> Vec<usize> {
    let members = p.members();
    let vectors: Vec<Vec<u32>> = (0..members.len())
        .map(|j| {
            let rest: Vec<Permutation> = members
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, m)| m.clone())
                .collect();
            vector(&rest, p.kind(), count_based)
        })
        .collect();
    let best = vectors.iter().min().unwrap();
    (0..members.len()).filter(|&j| &vectors[j] == best).collect()
}

pub fn symmetric_difference(a: &Permutation, b: &Permutation, kind: ProblemKind) -> usize {
    objects(a, kind).symmetric_difference(&objects(b, kind)).count()
}

/// Canonical key of a tour as an object set, so that rotations (and
/// reversals for STSP) compare equal.
pub fn tour_key(p: &Permutation, kind: ProblemKind) -> BTreeSet<(usize, usize)> {
    objects(p, kind)
}
