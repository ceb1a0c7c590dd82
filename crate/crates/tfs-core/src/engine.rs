//! Internal merge engine shared by unification, grammar elaboration
//! and the derivation oracle: a union-find over graph nodes where
//! merging two classes joins their types (least upper bound) and
//! propagates merges of same-feature successors until a fixpoint.
//!
//! Termination: every productive merge strictly decreases the number
//! of classes.

use crate::mrs::Amrs;
use crate::signature::{FeatureId, Signature, TypeId};

/// A type join hit top. `class` is the offending class in the engine's
/// node space; the two source types are reported for diagnostics.
pub(crate) struct Failure {
    pub class: usize,
    pub t1: TypeId,
    pub t2: TypeId,
}

pub(crate) struct MergeGraph {
    parent: Vec<usize>,
    ty: Vec<TypeId>,
    /// Valid at class representatives; sorted by feature, unique
    /// features. Targets may be stale (resolve with `find`).
    arcs: Vec<Vec<(FeatureId, usize)>>,
}

impl MergeGraph {
    pub fn new() -> MergeGraph {
        MergeGraph {
            parent: Vec::new(),
            ty: Vec::new(),
            arcs: Vec::new(),
        }
    }

    pub fn add_node(&mut self, t: TypeId) -> usize {
        let id = self.parent.len();
        self.parent.push(id);
        self.ty.push(t);
        self.arcs.push(Vec::new());
        id
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Adds (or unifies in) an arc `from -f-> to`.
    pub fn add_arc(&mut self, from: usize, f: FeatureId, to: usize, sig: &Signature) -> Result<(), Failure> {
        let r = self.find(from);
        match self.arcs[r].binary_search_by_key(&f, |&(g, _)| g) {
            Ok(i) => {
                let old = self.arcs[r][i].1;
                self.merge(old, to, sig)
            }
            Err(i) => {
                self.arcs[r].insert(i, (f, to));
                Ok(())
            }
        }
    }

    /// Sets the type of a class to the join with `t`.
    pub fn constrain_type(&mut self, x: usize, t: TypeId, sig: &Signature) -> Result<(), Failure> {
        let r = self.find(x);
        match sig.lub(self.ty[r], t) {
            Some(u) => {
                self.ty[r] = u;
                Ok(())
            }
            None => Err(Failure {
                class: r,
                t1: self.ty[r],
                t2: t,
            }),
        }
    }

    pub fn merge(&mut self, a: usize, b: usize, sig: &Signature) -> Result<(), Failure> {
        let mut work = vec![(a, b)];
        while let Some((x, y)) = work.pop() {
            let x = self.find(x);
            let y = self.find(y);
            if x == y {
                continue;
            }
            let t = match sig.lub(self.ty[x], self.ty[y]) {
                Some(t) => t,
                None => {
                    let err = Failure {
                        class: x,
                        t1: self.ty[x],
                        t2: self.ty[y],
                    };
                    self.parent[y] = x;
                    return Err(err);
                }
            };
            self.parent[y] = x;
            self.ty[x] = t;
            let ya = std::mem::take(&mut self.arcs[y]);
            let xa = std::mem::take(&mut self.arcs[x]);
            let mut merged = Vec::with_capacity(xa.len() + ya.len());
            let (mut i, mut j) = (0, 0);
            while i < xa.len() && j < ya.len() {
                match xa[i].0.cmp(&ya[j].0) {
                    std::cmp::Ordering::Less => {
                        merged.push(xa[i]);
                        i += 1;
                    }
                    std::cmp::Ordering::Greater => {
                        merged.push(ya[j]);
                        j += 1;
                    }
                    std::cmp::Ordering::Equal => {
                        work.push((xa[i].1, ya[j].1));
                        merged.push(xa[i]);
                        i += 1;
                        j += 1;
                    }
                }
            }
            merged.extend_from_slice(&xa[i..]);
            merged.extend_from_slice(&ya[j..]);
            self.arcs[x] = merged;
        }
        Ok(())
    }

    /// Copies an AMRS into the engine; returns the engine node of each
    /// of its classes (class i of `a` ↦ returned[i]).
    pub fn load(&mut self, a: &Amrs) -> Vec<usize> {
        let base = self.parent.len();
        for c in 0..a.class_count() {
            self.add_node(a.type_of_class(c));
        }
        for c in 0..a.class_count() {
            for &(f, t) in a.arcs_of_class(c) {
                self.arcs[base + c].push((f, base + t));
            }
        }
        (0..a.class_count()).map(|c| base + c).collect()
    }

    /// Reads out the part reachable from `roots` as a canonical AMRS.
    pub fn extract(&mut self, roots: &[usize]) -> Amrs {
        let roots: Vec<usize> = roots.iter().map(|&r| self.find(r)).collect();
        let n = self.parent.len();
        let mut types = vec![TypeId(0); n];
        let mut arcs: Vec<Vec<(FeatureId, usize)>> = vec![Vec::new(); n];
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = roots.iter().rev().copied().collect();
        for &r in &roots {
            seen[r] = true;
        }
        while let Some(c) = stack.pop() {
            types[c] = self.ty[c];
            let out: Vec<(FeatureId, usize)> = self.arcs[c]
                .clone()
                .into_iter()
                .map(|(f, t)| (f, self.find(t)))
                .collect();
            for &(_, t) in &out {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
            arcs[c] = out;
        }
        Amrs::from_raw(roots, types, arcs)
    }

    /// Shortest path (by breadth, ties broken by feature order) from
    /// any of `roots` to `target`'s class; for failure diagnostics.
    pub fn witness_path(&mut self, roots: &[usize], target: usize) -> Vec<FeatureId> {
        let target = self.find(target);
        let n = self.parent.len();
        let mut prev: Vec<Option<(usize, FeatureId)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        for &r in roots {
            let r = self.find(r);
            if !seen[r] {
                seen[r] = true;
                queue.push_back(r);
            }
        }
        while let Some(c) = queue.pop_front() {
            if c == target {
                break;
            }
            let out = self.arcs[c].clone();
            for (f, t) in out {
                let t = self.find(t);
                if !seen[t] {
                    seen[t] = true;
                    prev[t] = Some((c, f));
                    queue.push_back(t);
                }
            }
        }
        let mut path = Vec::new();
        let mut cur = target;
        while let Some((p, f)) = prev[cur] {
            path.push(f);
            cur = p;
        }
        path.reverse();
        path
    }
}
