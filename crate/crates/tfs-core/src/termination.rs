//! Depth restriction and chart-growth diagnostics.
//!
//! `restrict` truncates a structure at a fixed depth: classes whose
//! shortest path from a root is longer than `d` are dropped, along
//! with their arcs. The result is finite-range for any fixed depth,
//! idempotent, and monotone with respect to subsumption, which makes
//! it usable as a termination-forcing approximation.

use crate::mrs::Amrs;
use crate::signature::Signature;

/// Shortest distance (in arcs) from any root to each class; `None`
/// for unreachable classes (impossible in a canonical structure).
fn min_depths(a: &Amrs) -> Vec<Option<usize>> {
    let mut depth: Vec<Option<usize>> = vec![None; a.class_count()];
    let mut queue = std::collections::VecDeque::new();
    for i in 1..=a.len() {
        let r = a.root_class(i);
        if depth[r].is_none() {
            depth[r] = Some(0);
            queue.push_back(r);
        }
    }
    while let Some(c) = queue.pop_front() {
        let d = depth[c].unwrap();
        for &(_, t) in a.arcs_of_class(c) {
            if depth[t].is_none() {
                depth[t] = Some(d + 1);
                queue.push_back(t);
            }
        }
    }
    depth
}

/// Keeps only classes within `d` arcs of a root (and arcs between
/// surviving classes).
pub fn restrict(a: &Amrs, d: usize) -> Amrs {
    let depth = min_depths(a);
    let keep: Vec<bool> = depth
        .iter()
        .map(|od| od.map(|x| x <= d).unwrap_or(false))
        .collect();
    // Relabel survivors densely.
    let mut relabel = vec![usize::MAX; a.class_count()];
    let mut kept = 0usize;
    for c in 0..a.class_count() {
        if keep[c] {
            relabel[c] = kept;
            kept += 1;
        }
    }
    let mut types = Vec::with_capacity(kept);
    let mut arcs = Vec::with_capacity(kept);
    for c in 0..a.class_count() {
        if !keep[c] {
            continue;
        }
        types.push(a.type_of_class(c));
        arcs.push(
            a.arcs_of_class(c)
                .iter()
                .filter(|&&(_, t)| keep[t])
                .map(|&(f, t)| (f, relabel[t]))
                .collect(),
        );
    }
    let roots: Vec<usize> = (1..=a.len()).map(|i| relabel[a.root_class(i)]).collect();
    Amrs::from_raw(roots, types, arcs)
}

/// Size of a greedy antichain among `items` under subsumption: a
/// lower bound on how many pairwise-incomparable structures the slice
/// holds. Used to warn about charts that grow without converging.
pub fn incomparable_count(items: &[&Amrs], sig: &Signature) -> usize {
    let mut reps: Vec<&Amrs> = Vec::new();
    for a in items {
        if reps
            .iter()
            .all(|r| !r.order(a, sig) && !a.order(r, sig))
        {
            reps.push(a);
        }
    }
    reps.len()
}
