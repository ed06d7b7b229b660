//! Adjacency graphs of a symbolic overlapping substitution.
//!
//! `G_1` records letter pairs that occur consecutively in some rule image.
//! `G_{k+1}` adds an edge `e -> f` whenever some edge `h -> g` of `G_k` has
//! the image of `h` ending in a full (weight-1) letter `e` and the image of
//! `g` starting with a full letter `f`. The edge sets grow inside the
//! finite set of letter pairs and stabilize; the stabilized graph is
//! consistent when every edge's junction weights are complementary.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_traits::One;

use crate::num::{Mode, Rational};
use crate::rules::SymbolicSubstitution;

/// Stabilized adjacency graph: the edge sets of `G_1 ⊆ G_2 ⊆ …` and the
/// first index `k*` with `G_{k*+1} = G_{k*}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyGraph {
    kappa: usize,
    /// `levels[k-1]` is the edge set of `G_k`, up to and including `G_{k*}`.
    levels: Vec<BTreeSet<(usize, usize)>>,
    pub stabilized_at: usize,
}

impl AdjacencyGraph {
    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        self.levels.last().expect("at least G_1")
    }

    pub fn level(&self, k: usize) -> &BTreeSet<(usize, usize)> {
        let idx = k.min(self.levels.len()).saturating_sub(1);
        &self.levels[idx]
    }

    pub fn has_edge(&self, e: usize, f: usize) -> bool {
        self.edges().contains(&(e, f))
    }
}

/// Build `G_1, G_2, …` until stabilization.
pub fn build_adjacency_graph(sub: &SymbolicSubstitution) -> AdjacencyGraph {
    let kappa = sub.kappa();
    let mut g1 = BTreeSet::new();
    for image in &sub.images {
        for pair in image.windows(2) {
            g1.insert((pair[0].letter, pair[1].letter));
        }
    }
    // letters whose image ends (starts) with a full letter
    let ends_full: Vec<Option<usize>> = (0..kappa)
        .map(|i| {
            let last = sub.images[i].last().unwrap();
            last.weight.is_one().then_some(last.letter)
        })
        .collect();
    let starts_full: Vec<Option<usize>> = (0..kappa)
        .map(|i| {
            let first = sub.images[i].first().unwrap();
            first.weight.is_one().then_some(first.letter)
        })
        .collect();

    let mut levels = vec![g1];
    loop {
        let current = levels.last().unwrap();
        let mut next = current.clone();
        for &(h, g) in current.iter() {
            if let (Some(e), Some(f)) = (ends_full[h], starts_full[g]) {
                next.insert((e, f));
            }
        }
        if &next == current {
            let stabilized_at = levels.len();
            return AdjacencyGraph { kappa, levels, stabilized_at };
        }
        levels.push(next);
    }
}

/// One junction demand on an edge `e -> f`: the last weight of the image
/// of `e` with its letter, and the first weight of the image of `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDemand {
    pub edge: (usize, usize),
    pub end_letter: usize,
    pub end_weight_value: f64,
    pub start_letter: usize,
    pub start_weight_value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub demands: Vec<EdgeDemand>,
    pub violations: Vec<EdgeDemand>,
}

impl ConsistencyReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the stabilized graph: every edge `e -> f` must have either both
/// junction weights equal to 1, or the image of `e` ending with `[h]_r` and
/// the image of `f` starting with `[h]_s`, `r + s = 1` (exact in exact
/// mode, within `eps` in float mode).
pub fn check_graph_consistency(
    sub: &SymbolicSubstitution,
    graph: &AdjacencyGraph,
    eps: f64,
) -> ConsistencyReport {
    let mut demands = Vec::new();
    let mut violations = Vec::new();
    for &(e, f) in graph.edges() {
        let end = sub.images[e].last().unwrap();
        let start = sub.images[f].first().unwrap();
        let pass = if end.weight.is_one() && start.weight.is_one() {
            true
        } else if end.letter == start.letter {
            match (sub.mode, &end.weight.exact, &start.weight.exact) {
                (Mode::Exact, Some(r), Some(s)) => r + s == Rational::one(),
                _ => (end.weight.value + start.weight.value - 1.0).abs() <= eps,
            }
        } else {
            false
        };
        let demand = EdgeDemand {
            edge: (e, f),
            end_letter: end.letter,
            end_weight_value: end.weight.value,
            start_letter: start.letter,
            start_weight_value: start.weight.value,
            pass,
        };
        if !pass {
            violations.push(demand.clone());
        }
        demands.push(demand);
    }
    ConsistencyReport { demands, violations }
}

/// DOT rendering of the level-`k` graph (clamped to the stabilized level).
pub fn to_dot(sub: &SymbolicSubstitution, graph: &AdjacencyGraph, k: usize) -> String {
    let mut out = String::from("digraph adjacency {\n  rankdir=LR;\n");
    for i in 0..graph.kappa {
        let _ = writeln!(out, "  {};", sub.alphabet.name(i));
    }
    for &(e, f) in graph.level(k) {
        let _ = writeln!(out, "  {} -> {};", sub.alphabet.name(e), sub.alphabet.name(f));
    }
    out.push_str("}\n");
    out
}
