//! Bottom-up chart parsing as a least fixpoint.
//!
//! Items are four-tuples [i, A, j, status]: A spans input positions
//! i+1..j; ACT items carry an instantiated rule-body prefix, COMP
//! items a finished constituent (always length 1). The step operator
//! contributes: dot movement (an ACT prefix extended by an adjacent
//! COMP item), completion (a full body prefix emits the instantiated
//! head; applied eagerly, so a prefix completed within an iteration
//! yields its COMP item in the same iteration), predictions [i,λ,i,ACT],
//! ε-rule items, and lexical scans. Iteration is cumulative
//! (I ∪ step(I)) until nothing new appears.

use std::collections::HashSet;

use thiserror::Error;

use crate::grammar::Grammar;
use crate::mrs::Amrs;
use crate::termination;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Status {
    Act,
    Comp,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Act => "ACT",
            Status::Comp => "COMP",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Prediction,
    Scan { word: String, pos: usize },
    Epsilon { rule: String },
    DotMove { rule: String, act: usize, comp: usize },
    Complete { rule: String, act: usize },
}

#[derive(Clone, Debug)]
pub struct Item {
    pub i: usize,
    pub j: usize,
    pub status: Status,
    pub amrs: Amrs,
    /// Iteration that first produced the item (1-based).
    pub iteration: usize,
    pub provenance: Provenance,
}

#[derive(Clone, Debug)]
pub struct Config {
    /// Keep only subsumption-minimal items per (i, j, status) cell.
    pub filter: bool,
    pub max_iterations: usize,
    /// Reject any item whose structure contains a cycle.
    pub guard_acyclic: bool,
    /// Warn when a cell holds more pairwise-incomparable items.
    pub sentinel_threshold: usize,
    /// Keep iterating after the first success witness.
    pub full_fixpoint: bool,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            filter: true,
            max_iterations: 100,
            guard_acyclic: true,
            sentinel_threshold: 8,
            full_fixpoint: false,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Verdict {
    Accepted,
    Rejected,
    BudgetExhausted,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Accepted => "accepted",
            Verdict::Rejected => "rejected",
            Verdict::BudgetExhausted => "budget-exhausted",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub verdict: Verdict,
    pub iterations: usize,
    /// All surviving items, in creation order.
    pub items: Vec<Item>,
    /// Index into `items` of the success witness, when accepted.
    pub witness: Option<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RunError {
    #[error("unknown word `{0}`")]
    UnknownWord(String),
    #[error("cyclic structure in item [{i}, ·, {j}, {status}] (cycle along {cycle})")]
    CyclicItem {
        i: usize,
        j: usize,
        status: &'static str,
        cycle: String,
    },
}

struct Chart {
    items: Vec<Item>,
    alive: Vec<bool>,
    /// Everything ever generated, including filtered-out items, so a
    /// regenerated duplicate never counts as progress.
    seen: HashSet<(usize, usize, Status, Amrs)>,
}

impl Chart {
    fn live(&self) -> impl Iterator<Item = (usize, &Item)> {
        self.items
            .iter()
            .enumerate()
            .filter(|&(ix, _)| self.alive[ix])
    }
}

fn check_invariants(g: &Grammar, item: &Item) {
    match item.status {
        Status::Comp => debug_assert_eq!(item.amrs.len(), 1),
        Status::Act => {
            let k = item.amrs.len();
            if k > 0 {
                debug_assert!(
                    g.rules().iter().any(|r| {
                        r.body_len() >= k
                            && r.amrs
                                .substructure(1, k)
                                .map(|p| p.order(&item.amrs, g.signature()))
                                .unwrap_or(false)
                    }),
                    "ACT item is not an instantiated rule-body prefix"
                );
            }
        }
    }
}

/// One application of the step operator to the live items of `chart`;
/// returns candidate items (not yet deduplicated).
fn step(g: &Grammar, w: &[String], chart: &Chart, iteration: usize) -> Vec<Item> {
    let sig = g.signature();
    let n = w.len();
    let mut out: Vec<Item> = Vec::new();

    // Predictions: [i, λ, i, ACT].
    for i in 0..=n {
        out.push(Item {
            i,
            j: i,
            status: Status::Act,
            amrs: Amrs::empty(),
            iteration,
            provenance: Provenance::Prediction,
        });
    }
    // ε-rules: [i, Abs(ρ), i, COMP].
    for rule in g.rules() {
        if rule.body_len() == 0 {
            for i in 0..=n {
                out.push(Item {
                    i,
                    j: i,
                    status: Status::Comp,
                    amrs: rule.amrs.clone(),
                    iteration,
                    provenance: Provenance::Epsilon { rule: rule.name.clone() },
                });
            }
        }
    }
    // Scanning: [i-1, Abs(A_i), i, COMP].
    for (pos, word) in w.iter().enumerate() {
        for cat in g.cat(word).expect("words validated before the run") {
            out.push(Item {
                i: pos,
                j: pos + 1,
                status: Status::Comp,
                amrs: cat.as_amrs().clone(),
                iteration,
                provenance: Provenance::Scan { word: word.clone(), pos: pos + 1 },
            });
        }
    }
    // Dot movement: ACT prefix of length k < body length, extended by
    // an adjacent COMP item.
    for rule in g.rules() {
        let m = rule.amrs.len();
        if m <= 1 {
            continue;
        }
        for (ai, act) in chart.live() {
            if act.status != Status::Act {
                continue;
            }
            let k = act.amrs.len();
            if k >= m - 1 {
                continue;
            }
            let prefix: Vec<usize> = (1..=k).collect();
            let b = match rule.amrs.unify_in_context(&prefix, &act.amrs, sig) {
                Ok(b) => b,
                Err(_) => continue,
            };
            for (ci, comp) in chart.live() {
                if comp.status != Status::Comp || comp.i != act.j {
                    continue;
                }
                let c = match b.unify_in_context(&[k + 1], &comp.amrs, sig) {
                    Ok(c) => c,
                    Err(_) => continue,
                };
                out.push(Item {
                    i: act.i,
                    j: comp.j,
                    status: Status::Act,
                    amrs: c.substructure(1, k + 1).expect("prefix within rule"),
                    iteration,
                    provenance: Provenance::DotMove {
                        rule: rule.name.clone(),
                        act: ai,
                        comp: ci,
                    },
                });
            }
        }
    }
    out
}

/// Completion over the given ACT items: a full body prefix emits the
/// instantiated head as a COMP item.
fn complete(g: &Grammar, acts: &[(usize, &Item)], iteration: usize) -> Vec<Item> {
    let sig = g.signature();
    let mut out = Vec::new();
    for rule in g.rules() {
        let m = rule.amrs.len();
        if m <= 1 {
            continue;
        }
        for &(ai, act) in acts {
            if act.status != Status::Act || act.amrs.len() != m - 1 {
                continue;
            }
            let body: Vec<usize> = (1..m).collect();
            let c = match rule.amrs.unify_in_context(&body, &act.amrs, sig) {
                Ok(c) => c,
                Err(_) => continue,
            };
            out.push(Item {
                i: act.i,
                j: act.j,
                status: Status::Comp,
                amrs: c.substructure(m, m).expect("head within rule"),
                iteration,
                provenance: Provenance::Complete { rule: rule.name.clone(), act: ai },
            });
        }
    }
    out
}

/// First success witness among the live items: [0, A, n, COMP] with A
/// unifiable with the start structure. Scanning creation order makes
/// the choice deterministic (iteration, then insertion order).
pub fn success(g: &Grammar, n: usize, items: &[Item], alive: &[bool]) -> Option<usize> {
    for (ix, item) in items.iter().enumerate() {
        if !alive[ix] || item.status != Status::Comp || item.i != 0 || item.j != n {
            continue;
        }
        if item.amrs.len() != 1 {
            continue;
        }
        if item
            .amrs
            .unify_in_context(&[1], g.start().as_amrs(), g.signature())
            .is_ok()
        {
            return Some(ix);
        }
    }
    None
}

/// Retains only subsumption-minimal items per (i, j, status) cell.
/// Idempotent; equal items were never duplicated to begin with.
pub fn filter_subsume(g: &Grammar, items: &[Item], alive: &mut [bool]) {
    let sig = g.signature();
    for x in 0..items.len() {
        if !alive[x] {
            continue;
        }
        for y in 0..items.len() {
            if x == y || !alive[y] {
                continue;
            }
            let (a, b) = (&items[x], &items[y]);
            if a.i == b.i && a.j == b.j && a.status == b.status && b.amrs.order(&a.amrs, sig) {
                // b strictly more general (equality is impossible after
                // dedup), so a is redundant.
                alive[x] = false;
                break;
            }
        }
    }
}

/// Runs the fixpoint computation for `w` under `cfg`.
pub fn run(g: &Grammar, w: &[String], cfg: &Config) -> Result<RunResult, RunError> {
    for word in w {
        if g.cat(word).is_err() {
            return Err(RunError::UnknownWord(word.clone()));
        }
    }
    let n = w.len();
    let sig = g.signature();
    let mut chart = Chart {
        items: Vec::new(),
        alive: Vec::new(),
        seen: HashSet::new(),
    };
    let mut warnings: Vec<String> = Vec::new();
    let mut iterations = 0;
    let mut at_fixpoint = false;

    while iterations < cfg.max_iterations {
        iterations += 1;
        let prev_live: Vec<usize> = chart.live().map(|(ix, _)| ix).collect();

        let mut candidates = step(g, w, &chart, iterations);
        // Eager completion: prefixes finished in this very iteration
        // complete immediately.
        {
            let mut acts: Vec<(usize, &Item)> = chart
                .live()
                .filter(|(_, it)| it.status == Status::Act)
                .collect();
            let base = chart.items.len();
            // Candidate indices are provisional; they become real ids
            // below because candidates are appended in order.
            let cand_acts: Vec<(usize, &Item)> = candidates
                .iter()
                .enumerate()
                .filter(|(_, it)| it.status == Status::Act)
                .map(|(off, it)| (base + off, it))
                .collect();
            acts.extend(cand_acts);
            let completions = complete(g, &acts, iterations);
            let mut candidates2 = candidates.clone();
            candidates2.extend(completions);
            candidates = candidates2;
        }

        let mut added = 0usize;
        let mut remap: Vec<usize> = Vec::with_capacity(candidates.len());
        let base = chart.items.len();
        for mut item in candidates {
            let key = (item.i, item.j, item.status, item.amrs.clone());
            if chart.seen.contains(&key) {
                // Re-derived: point provenance ids at nothing new.
                remap.push(usize::MAX);
                continue;
            }
            chart.seen.insert(key);
            // Provisional parent ids among this batch resolve to their
            // real positions.
            if let Provenance::DotMove { act, comp, .. } = &mut item.provenance {
                for r in [act, comp] {
                    if *r >= base {
                        *r = remap[*r - base];
                    }
                }
            }
            if let Provenance::Complete { act, .. } = &mut item.provenance {
                if *act >= base {
                    *act = remap[*act - base];
                }
            }
            if cfg.guard_acyclic && item.amrs.is_cyclic() {
                return Err(RunError::CyclicItem {
                    i: item.i,
                    j: item.j,
                    status: item.status.as_str(),
                    cycle: item
                        .amrs
                        .cycle_witness(sig)
                        .unwrap_or_else(|| "?".to_string()),
                });
            }
            check_invariants(g, &item);
            remap.push(chart.items.len());
            chart.items.push(item);
            chart.alive.push(true);
            added += 1;
        }

        if cfg.filter {
            filter_subsume(g, &chart.items, &mut chart.alive);
        } else {
            // Monotone chain: cumulative iteration never loses items.
            assert!(
                prev_live.iter().all(|&ix| chart.alive[ix]),
                "monotone chain violated"
            );
        }

        sentinel(g, &chart, cfg.sentinel_threshold, &mut warnings);

        if !cfg.full_fixpoint && success(g, n, &chart.items, &chart.alive).is_some() {
            break;
        }
        if added == 0 {
            at_fixpoint = true;
            break;
        }
    }

    let witness = success(g, n, &chart.items, &chart.alive);
    let verdict = match (&witness, at_fixpoint) {
        (Some(_), _) => Verdict::Accepted,
        (None, true) => Verdict::Rejected,
        (None, false) => Verdict::BudgetExhausted,
    };
    let Chart { items, alive, .. } = chart;
    // Drop filtered items from the report, remapping provenance ids.
    let mut remap = vec![usize::MAX; items.len()];
    let mut out_items = Vec::new();
    let mut out_witness = None;
    for (ix, item) in items.into_iter().enumerate() {
        if !alive[ix] {
            continue;
        }
        remap[ix] = out_items.len();
        if witness == Some(ix) {
            out_witness = Some(out_items.len());
        }
        let mut item = item;
        match &mut item.provenance {
            Provenance::DotMove { act, comp, .. } => {
                for r in [act, comp] {
                    if *r != usize::MAX {
                        *r = remap.get(*r).copied().unwrap_or(usize::MAX);
                    }
                }
            }
            Provenance::Complete { act, .. } => {
                if *act != usize::MAX {
                    *act = remap.get(*act).copied().unwrap_or(usize::MAX);
                }
            }
            _ => {}
        }
        out_items.push(item);
    }

    Ok(RunResult {
        verdict,
        iterations,
        items: out_items,
        witness: out_witness,
        warnings,
    })
}

fn sentinel(g: &Grammar, chart: &Chart, threshold: usize, warnings: &mut Vec<String>) {
    let mut cells: Vec<((usize, usize, Status), Vec<&Amrs>)> = Vec::new();
    for (_, item) in chart.live() {
        let key = (item.i, item.j, item.status);
        match cells.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(&item.amrs),
            None => cells.push((key, vec![&item.amrs])),
        }
    }
    for ((i, j, status), amrss) in cells {
        let count = termination::incomparable_count(&amrss, g.signature());
        if count > threshold {
            let msg = format!(
                "cell ({i}, {j}, {}) holds {count} pairwise-incomparable items (threshold {threshold})",
                status.as_str()
            );
            if !warnings.contains(&msg) {
                warnings.push(msg);
            }
        }
    }
}
