//! Deterministic AVM rendering.
//!
//! Text output uses the grammar surface syntax (`type & FEAT:value`,
//! reentrancy tags `#n(...)` / `#n`), so rendered structures can be
//! fed back to the loader. Features appear in the signature's total
//! order; tags are numbered by first encounter in the canonical
//! traversal (roots in order, then arcs in feature order), so output
//! is identical across runs and platforms.

use std::collections::HashMap;

use serde_json::{json, Value};

use crate::mrs::Amrs;
use crate::signature::Signature;

/// Classes referenced more than once (roots + incoming arcs) get tags.
fn ref_counts(a: &Amrs) -> Vec<usize> {
    let mut counts = vec![0usize; a.class_count()];
    for i in 1..=a.len() {
        counts[a.root_class(i)] += 1;
    }
    for c in 0..a.class_count() {
        for &(_, t) in a.arcs_of_class(c) {
            counts[t] += 1;
        }
    }
    counts
}

struct Renderer<'a> {
    a: &'a Amrs,
    sig: &'a Signature,
    counts: Vec<usize>,
    tags: HashMap<usize, usize>,
}

impl<'a> Renderer<'a> {
    fn new(a: &'a Amrs, sig: &'a Signature) -> Renderer<'a> {
        Renderer {
            a,
            sig,
            counts: ref_counts(a),
            tags: HashMap::new(),
        }
    }

    fn tag_for(&mut self, c: usize) -> usize {
        let next = self.tags.len() + 1;
        *self.tags.entry(c).or_insert(next)
    }

    /// Returns the term for class `c` plus whether it is a bare
    /// conjunction needing parentheses in a feature-value position.
    fn text(&mut self, c: usize) -> (String, bool) {
        if self.tags.contains_key(&c) {
            return (format!("#{}", self.tags[&c]), false);
        }
        let tagged = self.counts[c] > 1;
        let tag = if tagged { Some(self.tag_for(c)) } else { None };
        let mut parts = vec![self.sig.type_name(self.a.type_of_class(c)).to_string()];
        for &(f, t) in self.a.arcs_of_class(c).to_vec().iter() {
            let (sub, needs) = self.text(t);
            let sub = if needs { format!("({sub})") } else { sub };
            parts.push(format!("{}:{}", self.sig.feature_name(f), sub));
        }
        let body = parts.join(" & ");
        match tag {
            Some(n) => (format!("#{n}({body})"), false),
            None => (body, parts.len() > 1),
        }
    }

    fn jsonify(&mut self, c: usize) -> Value {
        if self.tags.contains_key(&c) {
            return json!({ "ref": self.tags[&c] });
        }
        let tagged = self.counts[c] > 1;
        let tag = if tagged { Some(self.tag_for(c)) } else { None };
        let feats: Vec<Value> = self
            .a
            .arcs_of_class(c)
            .to_vec()
            .iter()
            .map(|&(f, t)| json!([self.sig.feature_name(f), self.jsonify(t)]))
            .collect();
        let mut obj = serde_json::Map::new();
        obj.insert(
            "type".to_string(),
            Value::String(self.sig.type_name(self.a.type_of_class(c)).to_string()),
        );
        if let Some(n) = tag {
            obj.insert("tag".to_string(), json!(n));
        }
        obj.insert("features".to_string(), Value::Array(feats));
        Value::Object(obj)
    }
}

/// Renders a single-rooted structure (or one element of a sequence).
pub fn text_afs(a: &Amrs, sig: &Signature) -> String {
    assert_eq!(a.len(), 1);
    Renderer::new(a, sig).text(a.root_class(1)).0
}

/// Renders a root sequence: `< e1 , e2 , ... >` with cross-element
/// tags; `<>` for the empty structure; bare term for length 1.
pub fn text(a: &Amrs, sig: &Signature) -> String {
    match a.len() {
        0 => "<>".to_string(),
        1 => text_afs(a, sig),
        _ => {
            let mut r = Renderer::new(a, sig);
            let parts: Vec<String> = (1..=a.len()).map(|i| r.text(a.root_class(i)).0).collect();
            format!("< {} >", parts.join(" , "))
        }
    }
}

/// JSON form: a single object for length 1, an array of objects (tags
/// shared across elements) otherwise.
pub fn to_json(a: &Amrs, sig: &Signature) -> Value {
    let mut r = Renderer::new(a, sig);
    if a.len() == 1 {
        r.jsonify(a.root_class(1))
    } else {
        Value::Array((1..=a.len()).map(|i| r.jsonify(a.root_class(i))).collect())
    }
}
