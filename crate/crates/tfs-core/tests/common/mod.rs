//! Seeded random generators shared by the integration tests.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use tfs_core::afs::{self, Afs, PreAfs};
use tfs_core::grammar::Grammar;
use tfs_core::mrs::Amrs;
use tfs_core::signature::{FeatureId, Signature, TypeId};
use tfs_core::tfs::ConcreteTfs;

pub const EXAMPLE: &str =
    include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../grammars/example.gr"));

pub fn example_grammar() -> Grammar {
    Grammar::load(EXAMPLE).expect("example grammar loads")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random quotient graph with `roots` roots and up to `max_nodes`
/// classes. Acyclic unless `cyclic`; when cyclic, at least one back
/// edge is forced.
pub fn random_amrs(
    r: &mut ChaCha8Rng,
    sig: &Signature,
    roots: usize,
    max_nodes: usize,
    cyclic: bool,
) -> Amrs {
    let n = r.gen_range(roots.max(1)..=max_nodes.max(roots.max(1)));
    let types: Vec<TypeId> = (0..n).map(|_| TypeId(r.gen_range(0..sig.num_types()))).collect();
    let mut arcs: Vec<Vec<(FeatureId, usize)>> = vec![Vec::new(); n];
    for q in 0..n {
        let k = r.gen_range(0..=2usize.min(sig.num_features()));
        let mut feats: Vec<usize> = (0..sig.num_features()).collect();
        feats.shuffle(r);
        for &f in feats.iter().take(k) {
            // Forward edges keep the graph acyclic; sharing arises when
            // two nodes pick the same target.
            if q + 1 < n {
                let t = r.gen_range(q + 1..n);
                arcs[q].push((FeatureId(f), t));
            }
        }
    }
    if cyclic {
        // A guaranteed back edge on a fresh feature of some node.
        let q = r.gen_range(0..n);
        let used: Vec<usize> = arcs[q].iter().map(|&(f, _)| f.0).collect();
        if let Some(f) = (0..sig.num_features()).find(|f| !used.contains(f)) {
            let t = r.gen_range(0..=q);
            arcs[q].push((FeatureId(f), t));
        }
    }
    let root_ids: Vec<usize> = (0..roots).map(|i| i % n).collect();
    Amrs::from_raw(root_ids, types, arcs)
}

pub fn random_afs(r: &mut ChaCha8Rng, sig: &Signature, max_nodes: usize, cyclic: bool) -> Afs {
    let a = random_amrs(r, sig, 1, max_nodes, cyclic);
    Afs::from_amrs(a).expect("single root")
}

pub fn random_tfs(r: &mut ChaCha8Rng, sig: &Signature, max_nodes: usize, cyclic: bool) -> ConcreteTfs {
    afs::conc(&random_afs(r, sig, max_nodes, cyclic))
}

/// One generalization move on `a`: either replace a class type by a
/// strictly more general one, or delete an arc. Returns `None` when no
/// move applies.
fn generalize_once(r: &mut ChaCha8Rng, sig: &Signature, a: &Amrs) -> Option<Amrs> {
    let n = a.class_count();
    let types: Vec<TypeId> = (0..n).map(|c| a.type_of_class(c)).collect();
    let mut arcs: Vec<Vec<(FeatureId, usize)>> =
        (0..n).map(|c| a.arcs_of_class(c).to_vec()).collect();
    let roots: Vec<usize> = (1..=a.len()).map(|i| a.root_class(i)).collect();
    let weaken_type = r.gen_bool(0.5);
    if weaken_type {
        let mut candidates: Vec<(usize, TypeId)> = Vec::new();
        for c in 0..n {
            for t in (0..sig.num_types()).map(TypeId) {
                if t != types[c] && sig.subsumes_type(t, types[c]) {
                    candidates.push((c, t));
                }
            }
        }
        if let Some(&(c, t)) = candidates.choose(r) {
            let mut types2 = types;
            types2[c] = t;
            return Some(Amrs::from_raw(roots, types2, arcs));
        }
        return None;
    }
    let with_arcs: Vec<usize> = (0..n).filter(|&c| !arcs[c].is_empty()).collect();
    let &c = with_arcs.choose(r)?;
    let ix = r.gen_range(0..arcs[c].len());
    arcs[c].remove(ix);
    Some(Amrs::from_raw(roots, types, arcs))
}

/// A strictly more general variant of `a` (1–3 moves), or `None` when
/// `a` admits no strict generalization.
pub fn strictly_generalize(r: &mut ChaCha8Rng, sig: &Signature, a: &Amrs) -> Option<Amrs> {
    for _ in 0..8 {
        let mut cur = a.clone();
        let moves = r.gen_range(1..=3);
        for _ in 0..moves {
            if let Some(next) = generalize_once(r, sig, &cur) {
                cur = next;
            }
        }
        if cur.order(a, sig) && !a.order(&cur, sig) {
            return Some(cur);
        }
    }
    None
}

/// A chain of `k` arcs along F ending in an F-self-loop; all nodes of
/// one type. Longer chains are strictly more general: the whole chain
/// folds onto a shorter one's loop.
pub fn looped_chain(k: usize, f: FeatureId, t: TypeId) -> ConcreteTfs {
    let types = vec![t; k + 1];
    let arcs: Vec<Vec<(FeatureId, usize)>> = (0..=k)
        .map(|q| vec![(f, if q < k { q + 1 } else { k })])
        .collect();
    ConcreteTfs::new(0, types, arcs).expect("well-formed chain")
}

/// Componentwise union of two path-set presentations (same root).
pub fn union_pre(a: &PreAfs, b: &PreAfs) -> PreAfs {
    let mut paths = a.paths.clone();
    paths.extend(b.paths.iter().cloned());
    let mut typing = a.typing.clone();
    typing.extend(b.typing.iter().cloned());
    let offset = a.paths.len();
    let mut reent = a.reent.clone();
    reent.extend(b.reent.iter().map(|&(x, y)| (x + offset, y + offset)));
    // Both roots denote the same object: relate the empty paths.
    let empty_a = a.paths.iter().position(|p| p.is_empty());
    let empty_b = b.paths.iter().position(|p| p.is_empty());
    if let (Some(x), Some(y)) = (empty_a, empty_b) {
        reent.push((x, y + offset));
    }
    PreAfs { paths, typing, reent }
}

/// All sentences of length 0..=max over the words of `g`'s lexicon.
pub fn all_sentences(g: &Grammar, max: usize) -> Vec<Vec<String>> {
    let words: Vec<String> = g.lexicon().iter().map(|(w, _)| w.clone()).collect();
    let mut out: Vec<Vec<String>> = vec![Vec::new()];
    let mut layer: Vec<Vec<String>> = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for s in &layer {
            for w in &words {
                let mut s2 = s.clone();
                s2.push(w.clone());
                next.push(s2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}
