//! Concrete typed feature structures: rooted, connected, labeled
//! graphs with deterministic arcs.
//!
//! Node identities are plain indices local to one structure; equality
//! of structures is never by identity but up to alphabetic variance
//! (mutual subsumption), or via the canonical abstract form in [`crate::afs`].

use thiserror::Error;

use crate::signature::{FeatureId, Signature, TypeId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TfsError {
    #[error("node {0} has two arcs labeled with the same feature")]
    NonDeterministicArcs(usize),
    #[error("arc target {0} out of range")]
    BadNode(usize),
    #[error("rank is undefined for cyclic structures")]
    CyclicStructure,
}

/// A concrete TFS. Nodes unreachable from the root are dropped at
/// construction, so connectedness holds by construction.
#[derive(Debug, Clone)]
pub struct ConcreteTfs {
    root: usize,
    types: Vec<TypeId>,
    /// Per node, sorted by feature.
    arcs: Vec<Vec<(FeatureId, usize)>>,
}

impl ConcreteTfs {
    pub fn new(
        root: usize,
        types: Vec<TypeId>,
        mut arcs: Vec<Vec<(FeatureId, usize)>>,
    ) -> Result<ConcreteTfs, TfsError> {
        let n = types.len();
        arcs.resize(n, Vec::new());
        if root >= n {
            return Err(TfsError::BadNode(root));
        }
        for (q, out) in arcs.iter_mut().enumerate() {
            out.sort_by_key(|&(f, _)| f);
            for w in out.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(TfsError::NonDeterministicArcs(q));
                }
            }
            for &(_, t) in out.iter() {
                if t >= n {
                    return Err(TfsError::BadNode(t));
                }
            }
        }
        // Restrict to the part reachable from the root.
        let mut map = vec![usize::MAX; n];
        let mut order = Vec::new();
        let mut stack = vec![root];
        map[root] = 0;
        order.push(root);
        while let Some(q) = stack.pop() {
            for &(_, t) in &arcs[q] {
                if map[t] == usize::MAX {
                    map[t] = order.len();
                    order.push(t);
                    stack.push(t);
                }
            }
        }
        let types2 = order.iter().map(|&q| types[q]).collect();
        let arcs2 = order
            .iter()
            .map(|&q| arcs[q].iter().map(|&(f, t)| (f, map[t])).collect())
            .collect();
        Ok(ConcreteTfs {
            root: 0,
            types: types2,
            arcs: arcs2,
        })
    }

    /// Single node, no arcs.
    pub fn atom(t: TypeId) -> ConcreteTfs {
        ConcreteTfs {
            root: 0,
            types: vec![t],
            arcs: vec![Vec::new()],
        }
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.types.len()
    }

    pub fn type_of(&self, q: usize) -> TypeId {
        self.types[q]
    }

    pub fn arcs_of(&self, q: usize) -> &[(FeatureId, usize)] {
        &self.arcs[q]
    }

    fn arc(&self, q: usize, f: FeatureId) -> Option<usize> {
        self.arcs[q]
            .binary_search_by_key(&f, |&(g, _)| g)
            .ok()
            .map(|i| self.arcs[q][i].1)
    }

    /// Walks `path` from `q`; `None` when some arc is missing.
    pub fn delta(&self, q: usize, path: &[FeatureId]) -> Option<usize> {
        let mut cur = q;
        for &f in path {
            cur = self.arc(cur, f)?;
        }
        Some(cur)
    }

    /// True iff some node reaches itself via a non-empty path.
    pub fn is_cyclic(&self) -> bool {
        let n = self.types.len();
        let mut color = vec![0u8; n];
        for start in 0..n {
            if color[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            color[start] = 1;
            while let Some(&mut (q, ref mut i)) = stack.last_mut() {
                if *i < self.arcs[q].len() {
                    let t = self.arcs[q][*i].1;
                    *i += 1;
                    match color[t] {
                        0 => {
                            color[t] = 1;
                            stack.push((t, 0));
                        }
                        1 => return true,
                        _ => {}
                    }
                } else {
                    color[q] = 2;
                    stack.pop();
                }
            }
        }
        false
    }

    /// Subsumption morphism from `self` into `other`, if one exists.
    /// The morphism is forced along paths from the root, hence unique.
    pub fn subsumes(&self, other: &ConcreteTfs, sig: &Signature) -> Option<Vec<usize>> {
        let mut map = vec![usize::MAX; self.types.len()];
        let mut queue = std::collections::VecDeque::new();
        map[self.root] = other.root;
        queue.push_back(self.root);
        while let Some(q) = queue.pop_front() {
            let h = map[q];
            if !sig.subsumes_type(self.types[q], other.types[h]) {
                return None;
            }
            for &(f, t) in &self.arcs[q] {
                let ht = other.arc(h, f)?;
                if map[t] == usize::MAX {
                    map[t] = ht;
                    queue.push_back(t);
                } else if map[t] != ht {
                    return None;
                }
            }
        }
        Some(map)
    }

    /// Mutual subsumption.
    pub fn alphabetic_variant(&self, other: &ConcreteTfs, sig: &Signature) -> bool {
        self.subsumes(other, sig).is_some() && other.subsumes(self, sig).is_some()
    }

    /// Number of paths defined from the root; `None` when cyclic (the
    /// path set is infinite).
    pub fn path_count(&self) -> Option<u64> {
        self.path_weights().map(|w| w.iter().sum())
    }

    /// Per node: how many distinct paths from the root reach it.
    fn path_weights(&self) -> Option<Vec<u64>> {
        if self.is_cyclic() {
            return None;
        }
        let n = self.types.len();
        // Topological order by in-degree.
        let mut indeg = vec![0usize; n];
        for q in 0..n {
            for &(_, t) in &self.arcs[q] {
                indeg[t] += 1;
            }
        }
        let mut ways = vec![0u64; n];
        ways[self.root] = 1;
        let mut stack: Vec<usize> = (0..n).filter(|&q| indeg[q] == 0).collect();
        let mut topo = Vec::new();
        while let Some(q) = stack.pop() {
            topo.push(q);
            for &(_, t) in &self.arcs[q] {
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    stack.push(t);
                }
            }
        }
        for &q in &topo {
            let wq = ways[q];
            for &(_, t) in &self.arcs[q] {
                ways[t] += wq;
            }
        }
        Some(ways)
    }

    /// Rank with an injected type-rank function `r` (indexed by type
    /// id): (number of paths − number of nodes) + the sum of `r` over
    /// the types at the ends of all paths.
    pub fn rank_with(&self, r: &[u64]) -> Result<u64, TfsError> {
        let ways = self.path_weights().ok_or(TfsError::CyclicStructure)?;
        let paths: u64 = ways.iter().sum();
        let theta: u64 = ways
            .iter()
            .zip(&self.types)
            .map(|(&w, &t)| w * r[t.0])
            .sum();
        Ok(paths - self.types.len() as u64 + theta)
    }

    /// Rank with the default type rank: height in the hierarchy plus
    /// one. The type rank must be strictly positive (and strictly
    /// monotone along the type order) for rank to decrease under every
    /// strict generalization — with a zero rank, dropping an arc to a
    /// least-typed leaf could leave the total unchanged.
    pub fn rank(&self, sig: &Signature) -> Result<u64, TfsError> {
        let r: Vec<u64> = (0..sig.num_types())
            .map(|t| sig.height(TypeId(t)) + 1)
            .collect();
        self.rank_with(&r)
    }

    /// All paths from the root, in feature order, up to `limit` paths.
    /// Total for acyclic structures when `limit` is large enough.
    pub fn paths(&self, limit: usize) -> Vec<Vec<FeatureId>> {
        let mut out = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        queue.push_back((self.root, Vec::new()));
        while let Some((q, p)) = queue.pop_front() {
            if out.len() >= limit {
                break;
            }
            out.push(p.clone());
            for &(f, t) in &self.arcs[q] {
                let mut p2 = p.clone();
                p2.push(f);
                queue.push_back((t, p2));
            }
        }
        out
    }
}
