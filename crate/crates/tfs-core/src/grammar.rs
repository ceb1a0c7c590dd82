//! Loaded grammars: a validated signature, rules (multi-rooted
//! structures with the last element as head), a lexicon, and the start
//! structure.
//!
//! The feature set is implicit: every feature mentioned anywhere in
//! the file, ordered lexicographically. Tags scope over a single
//! clause and must be used at least twice there.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::afs::{Afs, UnificationFailure};
use crate::engine::MergeGraph;
use crate::mrs::Amrs;
use crate::signature::{Signature, SignatureError};
use crate::syntax::{self, Avm, SyntaxError, Term};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LoadError {
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("{0}")]
    Signature(#[from] SignatureError),
    #[error("unknown type `{ty}` in {clause}")]
    UnknownType { clause: String, ty: String },
    #[error("unknown feature `{feature}` in {clause}")]
    UnknownFeature { clause: String, feature: String },
    #[error("tag #{tag} in {clause} is used only once")]
    TagUsedOnce { clause: String, tag: u32 },
    #[error("inconsistent structure in {clause}: {failure}")]
    Inconsistent {
        clause: String,
        failure: UnificationFailure,
    },
    #[error("missing start declaration")]
    MissingStart,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown word `{0}`")]
pub struct UnknownWord(pub String);

/// A rule: the last element of `amrs` is the head, the rest (possibly
/// none) the body. Head and body may share classes.
#[derive(Debug, Clone)]
pub struct Rule {
    pub name: String,
    pub amrs: Amrs,
}

impl Rule {
    pub fn body_len(&self) -> usize {
        self.amrs.len() - 1
    }

    pub fn head_index(&self) -> usize {
        self.amrs.len()
    }
}

#[derive(Debug, Clone)]
pub struct Grammar {
    sig: Signature,
    typedecls: Vec<(String, Vec<String>)>,
    start: Afs,
    rules: Vec<Rule>,
    lexicon: Vec<(String, Vec<Afs>)>,
    lints: Vec<String>,
}

/// Whitespace-split, case-folded sentence tokenization.
pub fn tokenize(sentence: &str) -> Vec<String> {
    sentence
        .split_whitespace()
        .map(|w| w.to_lowercase())
        .collect()
}

fn collect_features(avm: &Avm, out: &mut BTreeSet<String>) {
    for term in avm {
        match term {
            Term::Feature(f, inner) => {
                out.insert(f.clone());
                collect_features(&vec![(**inner).clone()], out);
            }
            Term::TagBound(_, inner) | Term::Group(inner) => collect_features(inner, out),
            _ => {}
        }
    }
}

fn collect_types(avm: &Avm, out: &mut BTreeSet<String>) {
    for term in avm {
        match term {
            Term::Type(t) => {
                out.insert(t.clone());
            }
            Term::Feature(_, inner) => collect_types(&vec![(**inner).clone()], out),
            Term::TagBound(_, inner) | Term::Group(inner) => collect_types(inner, out),
            Term::Tag(_) => {}
        }
    }
}

fn count_tags(avm: &Avm, out: &mut HashMap<u32, usize>) {
    for term in avm {
        match term {
            Term::Tag(n) => *out.entry(*n).or_insert(0) += 1,
            Term::TagBound(n, inner) => {
                *out.entry(*n).or_insert(0) += 1;
                count_tags(inner, out);
            }
            Term::Feature(_, inner) => count_tags(&vec![(**inner).clone()], out),
            Term::Group(inner) => count_tags(inner, out),
            Term::Type(_) => {}
        }
    }
}

/// Elaborates one clause (a sequence of AVMs sharing a tag scope) into
/// engine nodes; returns the node of each AVM.
struct Elaborator<'a> {
    sig: &'a Signature,
    clause: String,
    engine: MergeGraph,
    tags: HashMap<u32, usize>,
}

impl<'a> Elaborator<'a> {
    fn new(sig: &'a Signature, clause: &str) -> Elaborator<'a> {
        Elaborator {
            sig,
            clause: clause.to_string(),
            engine: MergeGraph::new(),
            tags: HashMap::new(),
        }
    }

    fn fail(&mut self, roots: &[usize], f: crate::engine::Failure) -> LoadError {
        let path = self.engine.witness_path(roots, f.class);
        LoadError::Inconsistent {
            clause: self.clause.clone(),
            failure: UnificationFailure {
                path: path.iter().map(|&g| self.sig.feature_name(g).to_string()).collect(),
                t1: self.sig.type_name(f.t1).to_string(),
                t2: self.sig.type_name(f.t2).to_string(),
            },
        }
    }

    fn avm(&mut self, avm: &Avm, roots_so_far: &[usize]) -> Result<usize, LoadError> {
        let node = self.engine.add_node(self.sig.bottom());
        self.apply(node, avm, roots_so_far)?;
        Ok(node)
    }

    fn apply(&mut self, node: usize, avm: &Avm, roots: &[usize]) -> Result<(), LoadError> {
        for term in avm {
            self.term(node, term, roots)?;
        }
        Ok(())
    }

    fn term(&mut self, node: usize, term: &Term, roots: &[usize]) -> Result<(), LoadError> {
        match term {
            Term::Type(name) => {
                let t = self.sig.type_id(name).ok_or_else(|| LoadError::UnknownType {
                    clause: self.clause.clone(),
                    ty: name.clone(),
                })?;
                self.engine
                    .constrain_type(node, t, self.sig)
                    .map_err(|f| self.fail(roots, f))
            }
            Term::Tag(n) => {
                if let Some(&prev) = self.tags.get(n) {
                    self.engine
                        .merge(node, prev, self.sig)
                        .map_err(|f| self.fail(roots, f))
                } else {
                    self.tags.insert(*n, node);
                    Ok(())
                }
            }
            Term::TagBound(n, inner) => {
                self.term(node, &Term::Tag(*n), roots)?;
                self.apply(node, inner, roots)
            }
            Term::Group(inner) => self.apply(node, inner, roots),
            Term::Feature(f, inner) => {
                let fid = self.sig.feature_id(f).ok_or_else(|| LoadError::UnknownFeature {
                    clause: self.clause.clone(),
                    feature: f.clone(),
                })?;
                let child = self.engine.add_node(self.sig.bottom());
                self.engine
                    .add_arc(node, fid, child, self.sig)
                    .map_err(|f| self.fail(roots, f))?;
                self.term(child, inner, roots)
            }
        }
    }
}

fn elaborate_clause(
    sig: &Signature,
    clause: &str,
    avms: &[Avm],
) -> Result<Amrs, LoadError> {
    let mut tag_counts = HashMap::new();
    for a in avms {
        count_tags(a, &mut tag_counts);
    }
    let mut tags: Vec<_> = tag_counts.into_iter().collect();
    tags.sort();
    for (tag, count) in tags {
        if count < 2 {
            return Err(LoadError::TagUsedOnce {
                clause: clause.to_string(),
                tag,
            });
        }
    }
    let mut el = Elaborator::new(sig, clause);
    let mut roots = Vec::new();
    for a in avms {
        let node = el.avm(a, &roots)?;
        roots.push(node);
    }
    let mut engine = el.engine;
    Ok(engine.extract(&roots))
}

impl Grammar {
    /// Parses, validates and elaborates a grammar file.
    pub fn load(src: &str) -> Result<Grammar, LoadError> {
        let file = syntax::parse_file(src)?;

        let mut features = BTreeSet::new();
        let mut used_types = BTreeSet::new();
        let mut all_avms: Vec<&Avm> = Vec::new();
        if let Some(s) = &file.start {
            all_avms.push(s);
        }
        for r in &file.rules {
            all_avms.extend(r.body.iter());
            all_avms.push(&r.head);
        }
        for (_, a) in &file.lexicon {
            all_avms.push(a);
        }
        for a in &all_avms {
            collect_features(a, &mut features);
            collect_types(a, &mut used_types);
        }

        let decls: Vec<(&str, Vec<&str>)> = file
            .typedecls
            .iter()
            .map(|(l, subs)| (l.as_str(), subs.iter().map(|s| s.as_str()).collect()))
            .collect();
        let feature_refs: Vec<&str> = features.iter().map(|f| f.as_str()).collect();
        let sig = Signature::build("bot", &decls, &feature_refs)?;

        let start_avm = file.start.as_ref().ok_or(LoadError::MissingStart)?;
        let start = Afs::from_amrs(elaborate_clause(&sig, "start declaration", &[start_avm.clone()])?)
            .expect("one clause, one root");

        let mut rules = Vec::new();
        for r in &file.rules {
            let mut avms: Vec<Avm> = r.body.clone();
            avms.push(r.head.clone());
            let amrs = elaborate_clause(&sig, &format!("rule `{}`", r.name), &avms)?;
            rules.push(Rule {
                name: r.name.clone(),
                amrs,
            });
        }

        let mut lexicon: Vec<(String, Vec<Afs>)> = Vec::new();
        for (word, avm) in &file.lexicon {
            let cat = Afs::from_amrs(elaborate_clause(
                &sig,
                &format!("lexical entry `{word}`"),
                &[avm.clone()],
            )?)
            .expect("one clause, one root");
            match lexicon.iter_mut().find(|(w, _)| w == word) {
                Some((_, cats)) => cats.push(cat),
                None => lexicon.push((word.clone(), vec![cat])),
            }
        }

        let mut lints = Vec::new();
        // A type is unused when neither it nor any of its subtypes is
        // mentioned in any structure.
        for t in 0..sig.num_types() {
            let tid = crate::signature::TypeId(t);
            if tid == sig.bottom() {
                continue;
            }
            let mentioned = (0..sig.num_types()).any(|u| {
                sig.subsumes_type(tid, crate::signature::TypeId(u))
                    && used_types.contains(sig.type_name(crate::signature::TypeId(u)))
            });
            if !mentioned {
                lints.push(format!("type `{}` is never used", sig.type_name(tid)));
            }
        }
        // Lexical categories are not expected to head non-lexical rules:
        // warn when a rule head could derive a lexical category.
        for rule in &rules {
            if rule.body_len() == 0 {
                continue;
            }
            let head = rule
                .amrs
                .project(rule.head_index())
                .expect("head index in range");
            for (word, cats) in &lexicon {
                for cat in cats {
                    if crate::afs::order(&head, cat, &sig) {
                        lints.push(format!(
                            "head of rule `{}` subsumes the category of `{}`",
                            rule.name, word
                        ));
                    }
                }
            }
        }

        Ok(Grammar {
            sig,
            typedecls: file.typedecls,
            start,
            rules,
            lexicon,
            lints,
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn start(&self) -> &Afs {
        &self.start
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn lexicon(&self) -> &[(String, Vec<Afs>)] {
        &self.lexicon
    }

    pub fn lints(&self) -> &[String] {
        &self.lints
    }

    /// The category set of a word.
    pub fn cat(&self, word: &str) -> Result<&[Afs], UnknownWord> {
        self.lexicon
            .iter()
            .find(|(w, _)| w == word)
            .map(|(_, cats)| cats.as_slice())
            .ok_or_else(|| UnknownWord(word.to_string()))
    }

    /// Pre-terminals: all abstractions of category sequences covering
    /// positions j..=k of `w` (1-based); the singleton empty structure
    /// when j > k.
    pub fn pre_terminals(
        &self,
        w: &[String],
        j: usize,
        k: usize,
    ) -> Result<Vec<Amrs>, UnknownWord> {
        if j > k {
            return Ok(vec![Amrs::empty()]);
        }
        let mut acc = vec![Amrs::empty()];
        for word in &w[j - 1..k] {
            let cats = self.cat(word)?;
            let mut next = Vec::with_capacity(acc.len() * cats.len());
            for prefix in &acc {
                for cat in cats {
                    next.push(prefix.concat(cat.as_amrs()));
                }
            }
            acc = next;
        }
        Ok(acc)
    }

    /// Elaborates a standalone AVM sequence against this grammar's
    /// signature and feature order (tags scope over the whole
    /// sequence). Useful for building expected structures in tests and
    /// for tooling.
    pub fn parse_avms(&self, src: &str) -> Result<Amrs, LoadError> {
        let avms = syntax::parse_avm_seq(src)?;
        elaborate_clause(&self.sig, "avm input", &avms)
    }

    /// Renders the grammar back to its file syntax; reloading the
    /// result reproduces the same structures.
    pub fn render(&self) -> String {
        use std::fmt::Write;
        let mut out = String::from("signature\n");
        for (lhs, subs) in &self.typedecls {
            writeln!(out, "  {lhs} sub [{}].", subs.join(", ")).unwrap();
        }
        writeln!(out, "\nstart {}.", crate::avm::text_afs(self.start.as_amrs(), &self.sig))
            .unwrap();
        if !self.rules.is_empty() {
            out.push_str("\nrules\n");
            for r in &self.rules {
                // Render elements jointly so cross-element tags stay
                // shared, then rewrite `< a , b >` into rule syntax.
                let joint = crate::avm::text(&r.amrs, &self.sig);
                let inner = joint.trim_start_matches("< ").trim_end_matches(" >");
                let elems: Vec<&str> = if r.amrs.len() == 1 {
                    vec![joint.as_str()]
                } else {
                    inner.split(" , ").collect()
                };
                let (body, head) = elems.split_at(elems.len() - 1);
                writeln!(
                    out,
                    "  {}: {} => {}.",
                    r.name,
                    body.iter()
                        .map(|b| format!("({b})"))
                        .collect::<Vec<_>>()
                        .join(", "),
                    head[0]
                )
                .unwrap();
            }
        }
        if !self.lexicon.is_empty() {
            out.push_str("\nlexicon\n");
            for (word, cats) in &self.lexicon {
                for cat in cats {
                    writeln!(out, "  {word} -> {}.", crate::avm::text_afs(cat.as_amrs(), &self.sig))
                        .unwrap();
                }
            }
        }
        out
    }
}
