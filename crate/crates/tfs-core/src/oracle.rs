//! Independent derivation-based acceptor: expands sentential forms
//! (multi-rooted structures) top-down by replacing an element with an
//! instantiated rule body, leftmost-first with full backtracking over
//! the rule and position choice, under an explicit step budget.
//!
//! Deliberately naive — this is the ground truth the chart parser is
//! validated against, not an efficient parser.

use std::collections::HashMap;

use thiserror::Error;

use crate::engine::MergeGraph;
use crate::grammar::{Grammar, Rule, UnknownWord};
use crate::mrs::Amrs;
use crate::signature::Signature;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{0}")]
    UnknownWord(#[from] UnknownWord),
    #[error("derivation search exhausted its step budget")]
    BudgetExhausted,
}

/// One recorded expansion step.
#[derive(Debug, Clone)]
pub struct Step {
    pub rule: String,
    pub index: usize,
    pub result: Amrs,
}

/// A successful leftmost derivation from the start structure down to a
/// pre-terminal-compatible form.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub steps: Vec<Step>,
}

/// Replaces element `j` of `a` with the body of `rule`, unifying the
/// element with the rule's head first; the unification instantiates
/// the rule as little as necessary. `None` when the head does not
/// unify.
pub fn strong_derive_step(a: &Amrs, rule: &Rule, j: usize, sig: &Signature) -> Option<Amrs> {
    assert!(1 <= j && j <= a.len());
    let mut g = MergeGraph::new();
    let ma = g.load(a);
    let mr = g.load(&rule.amrs);
    let elem = ma[a.root_class(j)];
    let head = mr[rule.amrs.root_class(rule.head_index())];
    if g.merge(elem, head, sig).is_err() {
        return None;
    }
    let mut roots = Vec::with_capacity(a.len() - 1 + rule.body_len());
    for i in 1..j {
        roots.push(ma[a.root_class(i)]);
    }
    for i in 1..=rule.body_len() {
        roots.push(mr[rule.amrs.root_class(i)]);
    }
    for i in j + 1..=a.len() {
        roots.push(ma[a.root_class(i)]);
    }
    Some(g.extract(&roots))
}

enum Outcome {
    Found(Vec<(usize, usize)>), // (rule index, position), root first
    No,
    Cut, // some branch hit the budget
}

struct Search<'a> {
    g: &'a Grammar,
    pre_terminals: Vec<Amrs>,
    n: usize,
    has_eps: bool,
    /// Refuted states: the largest budget under which the state was
    /// fully explored without success, and whether exploration was cut.
    memo: HashMap<Amrs, (usize, bool)>,
    /// States on the current derivation path. A derivation revisiting
    /// a sentential form has a shorter variant, so repeats are pruned.
    path: std::collections::HashSet<Amrs>,
}

impl<'a> Search<'a> {
    fn goal(&self, state: &Amrs) -> bool {
        if self.n == 0 {
            return state.is_empty();
        }
        if state.len() != self.n {
            return false;
        }
        let all: Vec<usize> = (1..=self.n).collect();
        self.pre_terminals
            .iter()
            .any(|b| state.unify_in_context(&all, b, self.g.signature()).is_ok())
    }

    fn run(&mut self, state: &Amrs, budget: usize) -> Outcome {
        if self.goal(state) {
            return Outcome::Found(Vec::new());
        }
        if let Some(&(tried, cut)) = self.memo.get(state) {
            if budget <= tried {
                return if cut { Outcome::Cut } else { Outcome::No };
            }
        }
        if budget == 0 {
            return Outcome::Cut;
        }
        self.path.insert(state.clone());
        let mut cut = false;
        for j in 1..=state.len() {
            for (ri, rule) in self.g.rules().iter().enumerate() {
                let next = match strong_derive_step(state, rule, j, self.g.signature()) {
                    Some(next) => next,
                    None => continue,
                };
                // Without ε-rules the length never shrinks, so forms
                // longer than the sentence are dead ends.
                if !self.has_eps && next.len() > self.n {
                    continue;
                }
                if self.path.contains(&next) {
                    continue;
                }
                match self.run(&next, budget - 1) {
                    Outcome::Found(mut steps) => {
                        self.path.remove(state);
                        steps.push((ri, j));
                        return Outcome::Found(steps);
                    }
                    Outcome::Cut => cut = true,
                    Outcome::No => {}
                }
            }
        }
        self.path.remove(state);
        self.memo.insert(state.clone(), (budget, cut));
        if cut {
            Outcome::Cut
        } else {
            Outcome::No
        }
    }
}

fn search_from(g: &Grammar, a: &Amrs, w: &[String], max_steps: usize) -> Result<Option<Vec<(usize, usize)>>, OracleError> {
    let n = w.len();
    let pre_terminals = g.pre_terminals(w, 1, n)?;
    let has_eps = g.rules().iter().any(|r| r.body_len() == 0);
    let mut s = Search {
        g,
        pre_terminals,
        n,
        has_eps,
        memo: HashMap::new(),
        path: std::collections::HashSet::new(),
    };
    match s.run(a, max_steps) {
        Outcome::Found(mut steps) => {
            steps.reverse();
            Ok(Some(steps))
        }
        Outcome::No => Ok(None),
        Outcome::Cut => Err(OracleError::BudgetExhausted),
    }
}

/// Does a bounded leftmost-first search from `a` reach a form
/// compatible with the pre-terminals of `w`? Budget exhaustion is
/// reported separately from rejection.
pub fn derives_from(g: &Grammar, a: &Amrs, w: &[String], max_steps: usize) -> Result<bool, OracleError> {
    Ok(search_from(g, a, w, max_steps)?.is_some())
}

/// Membership from the start structure.
pub fn derives(g: &Grammar, w: &[String], max_steps: usize) -> Result<bool, OracleError> {
    let start: Amrs = g.start().clone().into_amrs();
    derives_from(g, &start, w, max_steps)
}

/// Replays the found derivation so each step's resulting structure can
/// be reported.
pub fn derive_tree(g: &Grammar, w: &[String], max_steps: usize) -> Result<Option<Derivation>, OracleError> {
    let start: Amrs = g.start().clone().into_amrs();
    let steps = match search_from(g, &start, w, max_steps)? {
        Some(steps) => steps,
        None => return Ok(None),
    };
    let mut out = Vec::new();
    let mut cur = start;
    for (ri, j) in steps {
        let rule = &g.rules()[ri];
        cur = strong_derive_step(&cur, rule, j, g.signature())
            .expect("replay of a found derivation");
        out.push(Step {
            rule: rule.name.clone(),
            index: j,
            result: cur.clone(),
        });
    }
    Ok(Some(Derivation { steps: out }))
}
