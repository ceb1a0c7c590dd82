//! Abstract multi-rooted structures: an ordered sequence of root
//! classes over one shared quotient graph. A single-rooted structure
//! ([`crate::afs::Afs`]) is the length-1 case of the same machinery.
//!
//! Values are always stored in canonical form (breadth-first
//! relabeling from the roots in order, arcs in feature order), so the
//! derived equality and hashing are structural equality up to class
//! renaming.

use thiserror::Error;

use crate::afs::{Afs, UnificationFailure};
use crate::engine::MergeGraph;
use crate::signature::{FeatureId, Signature, TypeId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContextError {
    #[error("{0}")]
    Unification(UnificationFailure),
    #[error("alignment error: {0}")]
    Alignment(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("substructure range {from}..{to} out of range for length {len}")]
pub struct IndexOutOfRange {
    pub from: usize,
    pub to: usize,
    pub len: usize,
}

/// Canonical abstract multi-rooted structure.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Amrs {
    roots: Vec<usize>,
    types: Vec<TypeId>,
    arcs: Vec<Vec<(FeatureId, usize)>>,
}

impl Amrs {
    /// The empty structure (no roots, no classes).
    pub fn empty() -> Amrs {
        Amrs {
            roots: Vec::new(),
            types: Vec::new(),
            arcs: Vec::new(),
        }
    }

    /// Canonicalizes a raw quotient graph: restricts to the classes
    /// reachable from `roots` and relabels breadth-first (roots in
    /// order, then arcs in feature order).
    pub fn from_raw(
        roots: Vec<usize>,
        types: Vec<TypeId>,
        mut arcs: Vec<Vec<(FeatureId, usize)>>,
    ) -> Amrs {
        arcs.resize(types.len(), Vec::new());
        for out in arcs.iter_mut() {
            out.sort_by_key(|&(f, _)| f);
        }
        let mut map = vec![usize::MAX; types.len()];
        let mut order = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        for &r in &roots {
            if map[r] == usize::MAX {
                map[r] = order.len();
                order.push(r);
                queue.push_back(r);
            }
        }
        while let Some(c) = queue.pop_front() {
            for &(_, t) in &arcs[c] {
                if map[t] == usize::MAX {
                    map[t] = order.len();
                    order.push(t);
                    queue.push_back(t);
                }
            }
        }
        Amrs {
            roots: roots.iter().map(|&r| map[r]).collect(),
            types: order.iter().map(|&c| types[c]).collect(),
            arcs: order
                .iter()
                .map(|&c| arcs[c].iter().map(|&(f, t)| (f, map[t])).collect())
                .collect(),
        }
    }

    /// Number of roots (indices run 1..=len).
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.types.len()
    }

    /// Class of the i-th root, 1-based.
    pub fn root_class(&self, i: usize) -> usize {
        self.roots[i - 1]
    }

    pub fn type_of_class(&self, c: usize) -> TypeId {
        self.types[c]
    }

    pub fn arcs_of_class(&self, c: usize) -> &[(FeatureId, usize)] {
        &self.arcs[c]
    }

    pub fn arc(&self, c: usize, f: FeatureId) -> Option<usize> {
        self.arcs[c]
            .binary_search_by_key(&f, |&(g, _)| g)
            .ok()
            .map(|i| self.arcs[c][i].1)
    }

    /// True iff some class reaches itself via a non-empty path.
    pub fn is_cyclic(&self) -> bool {
        let n = self.types.len();
        let mut color = vec![0u8; n];
        for start in 0..n {
            if color[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            color[start] = 1;
            while let Some(&mut (c, ref mut i)) = stack.last_mut() {
                if *i < self.arcs[c].len() {
                    let t = self.arcs[c][*i].1;
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
                    color[c] = 2;
                    stack.pop();
                }
            }
        }
        false
    }

    /// A feature path tracing one cycle, when the structure is cyclic.
    pub fn cycle_witness(&self, sig: &Signature) -> Option<String> {
        // DFS keeping the arc path to the current class.
        let n = self.types.len();
        let mut color = vec![0u8; n];
        for start in 0..n {
            if color[start] != 0 {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
            let mut path: Vec<FeatureId> = Vec::new();
            color[start] = 1;
            while let Some(&mut (c, ref mut i)) = stack.last_mut() {
                if *i < self.arcs[c].len() {
                    let (f, t) = self.arcs[c][*i];
                    *i += 1;
                    match color[t] {
                        0 => {
                            color[t] = 1;
                            path.push(f);
                            stack.push((t, 0));
                        }
                        1 => {
                            // Suffix of `path` from t's stack position.
                            let pos = stack.iter().position(|&(q, _)| q == t).unwrap();
                            let mut cyc: Vec<&str> =
                                path[pos..].iter().map(|&g| sig.feature_name(g)).collect();
                            cyc.push(sig.feature_name(f));
                            return Some(cyc.join("·"));
                        }
                        _ => {}
                    }
                } else {
                    color[c] = 2;
                    stack.pop();
                    path.pop();
                }
            }
        }
        None
    }

    /// Contiguous substructure, 1-based inclusive; `from > to` yields
    /// the empty structure.
    pub fn substructure(&self, from: usize, to: usize) -> Result<Amrs, IndexOutOfRange> {
        if from > to {
            return Ok(Amrs::empty());
        }
        if from < 1 || to > self.roots.len() {
            return Err(IndexOutOfRange {
                from,
                to,
                len: self.roots.len(),
            });
        }
        Ok(Amrs::from_raw(
            self.roots[from - 1..to].to_vec(),
            self.types.clone(),
            self.arcs.clone(),
        ))
    }

    /// Concatenation; no sharing is created between the two parts.
    pub fn concat(&self, other: &Amrs) -> Amrs {
        let off = self.types.len();
        let mut roots = self.roots.clone();
        roots.extend(other.roots.iter().map(|&r| r + off));
        let mut types = self.types.clone();
        types.extend_from_slice(&other.types);
        let mut arcs = self.arcs.clone();
        arcs.extend(
            other
                .arcs
                .iter()
                .map(|out| out.iter().map(|&(f, t)| (f, t + off)).collect::<Vec<_>>()),
        );
        Amrs::from_raw(roots, types, arcs)
    }

    /// The i-th root's substructure as a single-rooted value.
    pub fn project(&self, i: usize) -> Result<Afs, IndexOutOfRange> {
        Ok(Afs::from_amrs_unchecked(self.substructure(i, i)?))
    }

    /// Unification in context: merges root `j` of `self` with the
    /// aligned root of `b` for every `j` in `js`, propagating through
    /// shared structure. When `b` has length 1 the single index of
    /// `js` aligns with it; otherwise alignment is positional. The
    /// result keeps `self`'s indices.
    pub fn unify_in_context(
        &self,
        js: &[usize],
        b: &Amrs,
        sig: &Signature,
    ) -> Result<Amrs, ContextError> {
        for &j in js {
            if j < 1 || j > self.roots.len() {
                return Err(ContextError::Alignment(format!(
                    "index {j} out of range for length {}",
                    self.roots.len()
                )));
            }
        }
        if js.is_empty() {
            return Ok(self.clone());
        }
        if b.len() == 1 {
            if js.len() != 1 {
                return Err(ContextError::Alignment(format!(
                    "single-rooted operand requires exactly one index, got {}",
                    js.len()
                )));
            }
        } else {
            for &j in js {
                if j > b.len() {
                    return Err(ContextError::Alignment(format!(
                        "index {j} out of range for operand length {}",
                        b.len()
                    )));
                }
            }
        }
        let mut g = MergeGraph::new();
        let ma = g.load(self);
        let mb = g.load(b);
        let my_roots: Vec<usize> = self.roots.iter().map(|&r| ma[r]).collect();
        for &j in js {
            let left = ma[self.roots[j - 1]];
            let right = if b.len() == 1 {
                mb[b.roots[0]]
            } else {
                mb[b.roots[j - 1]]
            };
            if let Err(fail) = g.merge(left, right, sig) {
                let path = g.witness_path(&my_roots, fail.class);
                return Err(ContextError::Unification(UnificationFailure {
                    path: path.iter().map(|&f| sig.feature_name(f).to_string()).collect(),
                    t1: sig.type_name(fail.t1).to_string(),
                    t2: sig.type_name(fail.t2).to_string(),
                }));
            }
        }
        Ok(g.extract(&my_roots))
    }

    /// The subsumption order on equal-length structures: true iff the
    /// root-and-arc-forced class map into `other` exists and is
    /// non-decreasing on types.
    pub fn order(&self, other: &Amrs, sig: &Signature) -> bool {
        if self.roots.len() != other.roots.len() {
            return false;
        }
        let mut map = vec![usize::MAX; self.types.len()];
        let mut queue = std::collections::VecDeque::new();
        for (&ra, &rb) in self.roots.iter().zip(&other.roots) {
            if map[ra] == usize::MAX {
                map[ra] = rb;
                queue.push_back(ra);
            } else if map[ra] != rb {
                return false;
            }
        }
        while let Some(c) = queue.pop_front() {
            let h = map[c];
            if !sig.subsumes_type(self.types[c], other.types[h]) {
                return false;
            }
            for &(f, t) in &self.arcs[c] {
                let ht = match other.arc(h, f) {
                    Some(x) => x,
                    None => return false,
                };
                if map[t] == usize::MAX {
                    map[t] = ht;
                    queue.push_back(t);
                } else if map[t] != ht {
                    return false;
                }
            }
        }
        true
    }
}

/// Abstraction of a concrete multi-rooted structure: a shared node
/// space (`types`/`arcs` as in [`crate::tfs::ConcreteTfs`]) plus an
/// ordered list of distinct root nodes.
pub fn abs_mrs(
    roots: &[usize],
    types: &[TypeId],
    arcs: &[Vec<(FeatureId, usize)>],
) -> Amrs {
    Amrs::from_raw(roots.to_vec(), types.to_vec(), arcs.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::afs;
    use crate::tfs::ConcreteTfs;

    fn sig() -> Signature {
        Signature::build(
            "bot",
            &[("bot", vec!["t", "u"]), ("t", vec!["t1"])],
            &["F", "G"],
        )
        .unwrap()
    }

    fn atom(sig: &Signature, name: &str) -> Afs {
        afs::abs(&ConcreteTfs::atom(sig.type_id(name).unwrap()))
    }

    #[test]
    fn concat_and_substructure_cohere() {
        let s = sig();
        let a = Amrs::from(atom(&s, "t"));
        let b = Amrs::from(atom(&s, "u")).concat(&Amrs::from(atom(&s, "t1")));
        let ab = a.concat(&b);
        assert_eq!(ab.len(), 3);
        assert_eq!(ab.substructure(1, 1).unwrap(), a);
        assert_eq!(ab.substructure(2, 3).unwrap(), b);
        assert_eq!(ab.substructure(1, 3).unwrap(), ab);
        assert_eq!(ab.substructure(2, 1).unwrap(), Amrs::empty());
        assert!(ab.substructure(1, 4).is_err());
        assert_eq!(Amrs::empty().concat(&a), a);
        assert_eq!(a.concat(&Amrs::empty()), a);
    }

    #[test]
    fn unify_in_context_propagates_through_sharing() {
        let s = sig();
        let f = s.feature_id("F").unwrap();
        // Two roots sharing one F value.
        let shared = Amrs::from_raw(
            vec![0, 1],
            vec![s.bottom(), s.bottom(), s.bottom()],
            vec![vec![(f, 2)], vec![(f, 2)]],
        );
        // Constrain root 1's F value to t1 through a length-1 operand.
        let one = Amrs::from_raw(
            vec![0],
            vec![s.bottom(), s.type_id("t1").unwrap()],
            vec![vec![(f, 1)]],
        );
        let out = shared.unify_in_context(&[1], &one, &s).unwrap();
        let p2 = out.project(2).unwrap();
        let c = p2.as_amrs().arc(p2.as_amrs().root_class(1), f).unwrap();
        assert_eq!(p2.as_amrs().type_of_class(c), s.type_id("t1").unwrap());
        assert!(shared.order(&out, &s));
        assert_eq!(out.len(), shared.len());
    }

    #[test]
    fn absorption_in_context() {
        let s = sig();
        let a = Amrs::from(atom(&s, "t")).concat(&Amrs::from(atom(&s, "u")));
        let all: Vec<usize> = vec![1, 2];
        assert_eq!(a.unify_in_context(&all, &a, &s).unwrap(), a);
    }

    #[test]
    fn alignment_errors() {
        let s = sig();
        let a = Amrs::from(atom(&s, "t"));
        let b = Amrs::from(atom(&s, "u")).concat(&Amrs::from(atom(&s, "u")));
        assert!(matches!(
            a.unify_in_context(&[2], &b, &s),
            Err(ContextError::Alignment(_))
        ));
        assert!(matches!(
            b.unify_in_context(&[1, 2], &Amrs::empty(), &s),
            Err(ContextError::Alignment(_))
        ));
    }

    #[test]
    fn order_requires_equal_length_and_type_growth() {
        let s = sig();
        let t = Amrs::from(atom(&s, "t"));
        let t1 = Amrs::from(atom(&s, "t1"));
        let u = Amrs::from(atom(&s, "u"));
        assert!(t.order(&t1, &s));
        assert!(!t1.order(&t, &s));
        assert!(!t.order(&u, &s));
        assert!(!t.order(&t.concat(&t), &s));
    }
}
