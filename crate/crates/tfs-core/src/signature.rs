//! Type signatures: a finite set of types ordered by a
//! bounded-complete partial order, plus a totally ordered feature set.
//!
//! Type unification is the least upper bound in the order.  The
//! inconsistent element (top) is represented out of band as `None`: it
//! marks failure and is never stored inside a structure.

use std::collections::HashMap;

use thiserror::Error;

/// Index of a type in its [`Signature`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct TypeId(pub usize);

/// Index of a feature in its [`Signature`]. The ordering of ids is the
/// signature's total feature order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct FeatureId(pub usize);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("type `{0}` declared more than once")]
    DuplicateType(String),
    #[error("type `{0}` participates in a subtype cycle")]
    Cycle(String),
    #[error("types `{a}` and `{b}` have no least upper bound (minimal upper bounds: {})",
            .minimal.join(", "))]
    NotBoundedComplete {
        a: String,
        b: String,
        minimal: Vec<String>,
    },
    #[error("no type named `{0}` to serve as the most general type")]
    MissingBottom(String),
}

/// A validated type hierarchy together with the feature set.
#[derive(Debug, Clone)]
pub struct Signature {
    type_names: Vec<String>,
    type_index: HashMap<String, TypeId>,
    feature_names: Vec<String>,
    feature_index: HashMap<String, FeatureId>,
    bottom: TypeId,
    /// subsumes[a][b] ⟺ a is more general than (or equal to) b.
    subsumes: Vec<Vec<bool>>,
    /// lub[a][b] = least upper bound, `None` meaning top (failure).
    lub: Vec<Vec<Option<TypeId>>>,
    /// Length of the longest chain from bottom up to the type.
    height: Vec<u64>,
}

impl Signature {
    /// Builds and validates a hierarchy from immediate-subtype
    /// declarations. The most general type must be named
    /// `bottom_name`; any declared type not reachable from it is
    /// attached as its immediate subtype. `features` fixes the total
    /// feature order (position = rank).
    pub fn build(
        bottom_name: &str,
        decls: &[(&str, Vec<&str>)],
        features: &[&str],
    ) -> Result<Signature, SignatureError> {
        let mut type_names: Vec<String> = Vec::new();
        let mut type_index: HashMap<String, TypeId> = HashMap::new();
        let intern = |names: &mut Vec<String>, index: &mut HashMap<String, TypeId>, n: &str| {
            if let Some(&id) = index.get(n) {
                id
            } else {
                let id = TypeId(names.len());
                names.push(n.to_string());
                index.insert(n.to_string(), id);
                id
            }
        };

        let mut seen_lhs: HashMap<String, ()> = HashMap::new();
        let mut children: Vec<Vec<usize>> = Vec::new();
        for (lhs, subs) in decls {
            if seen_lhs.insert(lhs.to_string(), ()).is_some() {
                return Err(SignatureError::DuplicateType(lhs.to_string()));
            }
            let l = intern(&mut type_names, &mut type_index, lhs).0;
            children.resize(type_names.len(), Vec::new());
            let mut local: Vec<usize> = Vec::new();
            for s in subs {
                let c = intern(&mut type_names, &mut type_index, s).0;
                children.resize(type_names.len(), Vec::new());
                if local.contains(&c) {
                    return Err(SignatureError::DuplicateType(s.to_string()));
                }
                local.push(c);
                children[l].push(c);
            }
        }
        children.resize(type_names.len(), Vec::new());

        let bottom = *type_index
            .get(bottom_name)
            .ok_or_else(|| SignatureError::MissingBottom(bottom_name.to_string()))?;

        let n = type_names.len();

        // Cycle check (iterative three-color DFS over the subtype edges).
        {
            let mut color = vec![0u8; n]; // 0 white, 1 gray, 2 black
            for start in 0..n {
                if color[start] != 0 {
                    continue;
                }
                let mut stack = vec![(start, 0usize)];
                color[start] = 1;
                while let Some(&mut (v, ref mut i)) = stack.last_mut() {
                    if *i < children[v].len() {
                        let c = children[v][*i];
                        *i += 1;
                        match color[c] {
                            0 => {
                                color[c] = 1;
                                stack.push((c, 0));
                            }
                            1 => return Err(SignatureError::Cycle(type_names[c].clone())),
                            _ => {}
                        }
                    } else {
                        color[v] = 2;
                        stack.pop();
                    }
                }
            }
        }

        // Attach types unreachable from bottom as its immediate subtypes.
        {
            let mut reach = vec![false; n];
            let mut stack = vec![bottom.0];
            reach[bottom.0] = true;
            while let Some(v) = stack.pop() {
                for &c in &children[v] {
                    if !reach[c] {
                        reach[c] = true;
                        stack.push(c);
                    }
                }
            }
            // A type is a candidate root if nothing points at it.
            let mut has_parent = vec![false; n];
            for v in 0..n {
                for &c in &children[v] {
                    has_parent[c] = true;
                }
            }
            for v in 0..n {
                if !reach[v] && !has_parent[v] {
                    children[bottom.0].push(v);
                    let mut stack = vec![v];
                    reach[v] = true;
                    while let Some(u) = stack.pop() {
                        for &c in &children[u] {
                            if !reach[c] {
                                reach[c] = true;
                                stack.push(c);
                            }
                        }
                    }
                }
            }
        }

        // Reflexive-transitive closure.
        let mut subsumes = vec![vec![false; n]; n];
        for v in 0..n {
            let mut stack = vec![v];
            subsumes[v][v] = true;
            while let Some(u) = stack.pop() {
                for &c in &children[u] {
                    if !subsumes[v][c] {
                        subsumes[v][c] = true;
                        stack.push(c);
                    }
                }
            }
        }

        // Bounded completeness + LUB table by exhaustive pairwise scan.
        let mut lub = vec![vec![None; n]; n];
        for a in 0..n {
            for b in 0..n {
                let ubs: Vec<usize> = (0..n)
                    .filter(|&u| subsumes[a][u] && subsumes[b][u])
                    .collect();
                let minimal: Vec<usize> = ubs
                    .iter()
                    .copied()
                    .filter(|&u| !ubs.iter().any(|&u2| u2 != u && subsumes[u2][u]))
                    .collect();
                match minimal.len() {
                    0 => lub[a][b] = None,
                    1 => lub[a][b] = Some(TypeId(minimal[0])),
                    _ => {
                        return Err(SignatureError::NotBoundedComplete {
                            a: type_names[a].clone(),
                            b: type_names[b].clone(),
                            minimal: minimal.iter().map(|&u| type_names[u].clone()).collect(),
                        })
                    }
                }
            }
        }

        // Height = longest chain from bottom (DAG longest path).
        let mut height = vec![0u64; n];
        let mut order: Vec<usize> = (0..n).collect();
        // Process more general types first: a ⊑ b with a ≠ b puts a earlier.
        order.sort_by(|&a, &b| {
            let ca = subsumes[a].iter().filter(|&&x| x).count();
            let cb = subsumes[b].iter().filter(|&&x| x).count();
            cb.cmp(&ca)
        });
        for &v in &order {
            for &c in &children[v] {
                if height[v] + 1 > height[c] {
                    height[c] = height[v] + 1;
                }
            }
        }

        let feature_names: Vec<String> = features.iter().map(|f| f.to_string()).collect();
        let feature_index = feature_names
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), FeatureId(i)))
            .collect();

        Ok(Signature {
            type_names,
            type_index,
            feature_names,
            feature_index,
            bottom,
            subsumes,
            lub,
            height,
        })
    }

    pub fn bottom(&self) -> TypeId {
        self.bottom
    }

    pub fn num_types(&self) -> usize {
        self.type_names.len()
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn type_id(&self, name: &str) -> Option<TypeId> {
        self.type_index.get(name).copied()
    }

    pub fn feature_id(&self, name: &str) -> Option<FeatureId> {
        self.feature_index.get(name).copied()
    }

    pub fn type_name(&self, t: TypeId) -> &str {
        &self.type_names[t.0]
    }

    pub fn feature_name(&self, f: FeatureId) -> &str {
        &self.feature_names[f.0]
    }

    /// Least upper bound of two types; `None` is the failure marker.
    pub fn lub(&self, a: TypeId, b: TypeId) -> Option<TypeId> {
        self.lub[a.0][b.0]
    }

    /// True iff `a` is more general than or equal to `b`.
    pub fn subsumes_type(&self, a: TypeId, b: TypeId) -> bool {
        self.subsumes[a.0][b.0]
    }

    /// Length of the longest chain from bottom up to `t`; usable as a
    /// type-rank function (strictly monotone along the order).
    pub fn height(&self, t: TypeId) -> u64 {
        self.height[t.0]
    }
}
