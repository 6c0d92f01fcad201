//! Cycle arborescences: checking, the unfolding of a tied-free automaton into
//! one, its height, and the rank of sparseness.
//!
//! The unfolding works on a mutable copy of the transition table:
//!
//! 1. states that cannot reach a nonzero output get all their edges turned
//!    into self-loops, and states that become unreachable are dropped;
//! 2. components are swept upstream first; a state on no cycle with several
//!    in-edges, or a live cycle with several in-edges from outside, keeps its
//!    lowest in-edge and every other in-edge is redirected into a fresh copy
//!    of everything reachable from the unit;
//! 3. dead all-self-loop states are split until each has one in-edge.
//!
//! The start state is never copied. Copies are named `orig~k`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::automaton::{Automaton, OutputLabel, State};
use crate::structure::{
    classify_sparse, reaches_nonzero, scc_decomposition, tied_vertices, StructureError, Verdict,
};

/// Default maximum number of states `arborize` may create.
pub const DEFAULT_STATE_CAP: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArborescenceError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("unfolding exceeded the cap of {cap} states")]
    CapExceeded { cap: usize },
    #[error("non-sparse: the automaton has tied vertices")]
    NonSparse,
    #[error("rank undefined: the support is empty")]
    EmptySupport,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum VertexType {
    #[serde(rename = "type-i")]
    Leaf,
    #[serde(rename = "type-ii")]
    Tree,
    #[serde(rename = "type-iii")]
    Cycle,
}

impl VertexType {
    pub fn as_str(self) -> &'static str {
        match self {
            VertexType::Leaf => "type-i",
            VertexType::Tree => "type-ii",
            VertexType::Cycle => "type-iii",
        }
    }
}

impl fmt::Display for VertexType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct ArborescenceCheck {
    pub ok: bool,
    /// Per-state typing; meaningful only when `ok`.
    pub typing: Vec<Option<VertexType>>,
    pub violations: Vec<String>,
}

/// In-degree of every state, counting parallel edges, self-loops and the
/// virtual edge into the start state.
fn in_degrees(a: &Automaton) -> Vec<usize> {
    let mut deg = vec![0; a.len()];
    deg[a.start()] += 1;
    for (_, _, t) in a.all_edges() {
        deg[t] += 1;
    }
    deg
}

/// Checks the three vertex types with the start state as root.
pub fn is_cycle_arborescence(a: &Automaton) -> ArborescenceCheck {
    let scc = scc_decomposition(a);
    let indeg = in_degrees(a);
    let mut typing = vec![None; a.len()];
    let mut violations = Vec::new();

    for (ci, comp) in scc.components.iter().enumerate() {
        let members = &comp.members;
        if !comp.nontrivial {
            let v = members[0];
            if indeg[v] == 1 {
                typing[v] = Some(VertexType::Tree);
            } else {
                violations.push(format!("{}: on no cycle but has {} in-edges", a.name(v), indeg[v]));
            }
            continue;
        }
        if members.len() == 1 {
            let v = members[0];
            let self_loops = a.edges(v).filter(|&(_, t)| t == v).count();
            if self_loops == a.base() {
                if !a.is_nonzero(v) && indeg[v] - self_loops == 1 {
                    typing[v] = Some(VertexType::Leaf);
                } else if a.is_nonzero(v) {
                    violations.push(format!("{}: all self-loops but nonzero output", a.name(v)));
                } else {
                    violations.push(format!(
                        "{}: all self-loops but {} other in-edges",
                        a.name(v),
                        indeg[v] - self_loops
                    ));
                }
                continue;
            }
        }
        let simple = members.iter().all(|&s| {
            a.edges(s).filter(|&(_, t)| scc.component_of[t] == ci).count() == 1
        });
        if !simple {
            let names: Vec<&str> = members.iter().map(|&s| a.name(s)).collect();
            violations.push(format!("{{{}}}: returning walk is not unique", names.join(",")));
            continue;
        }
        let degs: Vec<usize> = members.iter().map(|&s| indeg[s]).collect();
        let surplus: usize = degs.iter().map(|d| d - 1).sum();
        if degs.iter().all(|&d| d == 1 || d == 2) && surplus == 1 {
            for &s in members {
                typing[s] = Some(VertexType::Cycle);
            }
        } else {
            let names: Vec<&str> = members.iter().map(|&s| a.name(s)).collect();
            violations.push(format!(
                "{{{}}}: cycle has {} in-edges from outside",
                names.join(","),
                surplus
            ));
        }
    }
    ArborescenceCheck {
        ok: violations.is_empty(),
        typing,
        violations,
    }
}

#[derive(Clone, Debug)]
pub struct CycleArborescence {
    pub automaton: Automaton,
    pub vertex_type: Vec<VertexType>,
    pub root: usize,
    pub height: usize,
    /// Original state name of every state.
    pub provenance: Vec<String>,
}

impl CycleArborescence {
    /// Sidecar JSON; provenance lists only states that are copies.
    pub fn sidecar_json(&self) -> serde_json::Value {
        let a = &self.automaton;
        let types: BTreeMap<&str, &str> = (0..a.len())
            .map(|s| (a.name(s), self.vertex_type[s].as_str()))
            .collect();
        let provenance: BTreeMap<&str, &str> = (0..a.len())
            .filter(|&s| a.name(s) != self.provenance[s])
            .map(|s| (a.name(s), self.provenance[s].as_str()))
            .collect();
        json!({
            "vertex_type": types,
            "provenance": provenance,
            "height": self.height,
            "root": a.name(self.root),
        })
    }
}

/// Mutable working form used during unfolding.
struct Work {
    base: usize,
    names: Vec<String>,
    outputs: Vec<OutputLabel>,
    origin: Vec<String>,
    delta: Vec<usize>,
    start: usize,
    used: HashSet<String>,
    copies: HashMap<String, usize>,
    cap: usize,
}

impl Work {
    fn from(a: &Automaton, cap: usize) -> Self {
        Work {
            base: a.base(),
            names: a.states().iter().map(|s| s.name.clone()).collect(),
            outputs: a.states().iter().map(|s| s.output.clone()).collect(),
            origin: a.states().iter().map(|s| s.name.clone()).collect(),
            delta: a.transition_table().to_vec(),
            start: a.start(),
            used: a.states().iter().map(|s| s.name.clone()).collect(),
            copies: HashMap::new(),
            cap,
        }
    }

    fn build(&self) -> Automaton {
        let states = self
            .names
            .iter()
            .zip(&self.outputs)
            .map(|(n, o)| State {
                name: n.clone(),
                output: o.clone(),
            })
            .collect();
        Automaton::new(self.base, states, self.start, self.delta.clone()).expect("consistent working form")
    }

    fn fresh_name(&mut self, origin: &str) -> String {
        let k = self.copies.entry(origin.to_string()).or_insert(0);
        loop {
            *k += 1;
            let name = format!("{origin}~{k}");
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }

    fn push_copy(&mut self, of: usize) -> Result<usize, ArborescenceError> {
        if self.names.len() >= self.cap {
            return Err(ArborescenceError::CapExceeded { cap: self.cap });
        }
        let origin = self.origin[of].clone();
        let name = self.fresh_name(&origin);
        self.names.push(name);
        self.outputs.push(self.outputs[of].clone());
        self.origin.push(origin);
        let row: Vec<usize> = self.delta[of * self.base..(of + 1) * self.base].to_vec();
        self.delta.extend(row);
        Ok(self.names.len() - 1)
    }

    /// Copies every state reachable from `from`; returns old → new.
    fn copy_reachable(&mut self, from: &[usize]) -> Result<HashMap<usize, usize>, ArborescenceError> {
        let mut seen: Vec<usize> = Vec::new();
        let mut mark = HashSet::new();
        let mut stack: Vec<usize> = from.to_vec();
        while let Some(s) = stack.pop() {
            if mark.insert(s) {
                seen.push(s);
                for d in 0..self.base {
                    stack.push(self.delta[s * self.base + d]);
                }
            }
        }
        seen.sort_unstable();
        let mut map = HashMap::new();
        for &s in &seen {
            map.insert(s, self.push_copy(s)?);
        }
        for &s in &seen {
            let c = map[&s];
            for d in 0..self.base {
                let t = self.delta[c * self.base + d];
                self.delta[c * self.base + d] = map[&t];
            }
        }
        Ok(map)
    }
}

/// Unfolds a tied-free automaton into a cycle arborescence generating the
/// same sequence.
pub fn arborize(a: &Automaton) -> Result<CycleArborescence, ArborescenceError> {
    arborize_with_cap(a, DEFAULT_STATE_CAP)
}

pub fn arborize_with_cap(a: &Automaton, cap: usize) -> Result<CycleArborescence, ArborescenceError> {
    let tied = tied_vertices(a);
    if !tied.is_empty() {
        return Err(StructureError::HasTiedVertices(
            tied.iter().map(|&s| a.name(s).to_string()).collect(),
        )
        .into());
    }
    let m = a.base();

    // Dead states become all-self-loop leaves.
    let live = reaches_nonzero(a);
    let mut work = Work::from(a, cap);
    for s in (0..a.len()).filter(|&s| !live[s]) {
        for d in 0..m {
            work.delta[s * m + d] = s;
        }
    }
    let pruned = work.build().accessible_part();
    let mut work = Work::from(&pruned, cap);

    // Upstream-first sweep over trees and live cycles.
    loop {
        let cur = work.build();
        let scc = scc_decomposition(&cur);
        let order = scc.topological_order(&cur);
        let mut fixed_one = false;
        for c in order {
            let comp = &scc.components[c];
            if comp.members.len() == 1 && comp.internal_edges.len() == m {
                continue; // leaf
            }
            let mut external: Vec<(usize, usize)> = Vec::new();
            for (s, d, t) in cur.all_edges() {
                if scc.component_of[t] == c && scc.component_of[s] != c {
                    external.push((s, d));
                }
            }
            let virtual_in = comp.members.contains(&cur.start());
            let total = external.len() + virtual_in as usize;
            if total <= 1 {
                continue;
            }
            external.sort_unstable();
            let redirect = if virtual_in { &external[..] } else { &external[1..] };
            for &(s, d) in redirect {
                let map = work.copy_reachable(&comp.members)?;
                let t = work.delta[s * m + d];
                work.delta[s * m + d] = map[&t];
            }
            fixed_one = true;
            break;
        }
        if !fixed_one {
            break;
        }
    }

    // Split leaves so each keeps a single in-edge.
    let cur = work.build();
    let mut in_edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); cur.len()];
    for (s, d, t) in cur.all_edges() {
        if s != t {
            in_edges[t].push((s, d));
        }
    }
    for v in 0..cur.len() {
        let leaf = (0..m).all(|d| cur.next(v, d) == v);
        if !leaf {
            continue;
        }
        let mut edges = in_edges[v].clone();
        edges.sort_unstable();
        let skip = if v == cur.start() { 0 } else { 1 };
        for &(s, d) in edges.iter().skip(skip) {
            let c = work.push_copy(v)?;
            for dd in 0..m {
                work.delta[c * m + dd] = c;
            }
            work.delta[s * m + d] = c;
        }
    }

    let automaton = work.build();
    let check = is_cycle_arborescence(&automaton);
    assert!(check.ok, "unfolding produced a non-arborescence: {:?}", check.violations);
    let vertex_type: Vec<VertexType> = check.typing.into_iter().map(|t| t.unwrap()).collect();
    let mut ca = CycleArborescence {
        root: automaton.start(),
        provenance: work.origin.clone(),
        automaton,
        vertex_type,
        height: 0,
    };
    ca.height = height(&ca);
    Ok(ca)
}

/// Longest chain of live cycles along a path of the condensation, counting
/// only components accepted by `counts`. Returns the chain as component ids.
fn longest_chain(a: &Automaton, counts: impl Fn(usize, &[usize]) -> bool) -> (usize, Vec<Vec<usize>>) {
    let scc = scc_decomposition(a);
    let succ = scc.condensation(a);
    let order = scc.topological_order(a);
    let weight: Vec<usize> = scc
        .components
        .iter()
        .enumerate()
        .map(|(c, comp)| counts(c, &comp.members) as usize)
        .collect();
    let mut best = vec![0usize; scc.len()];
    let mut next = vec![None; scc.len()];
    for &c in order.iter().rev() {
        let (b, n) = succ[c]
            .iter()
            .map(|&d| (best[d], Some(d)))
            .max_by_key(|&(b, d)| (b, std::cmp::Reverse(d)))
            .unwrap_or((0, None));
        best[c] = weight[c] + b;
        next[c] = n;
    }
    let start_comp = scc.component_of[a.start()];
    let mut chain = Vec::new();
    let mut c = Some(start_comp);
    while let Some(ci) = c {
        if weight[ci] == 1 {
            chain.push(scc.components[ci].members.clone());
        }
        c = next[ci];
    }
    (best[start_comp], chain)
}

/// Number of distinct live type-iii cycles along the longest chain.
pub fn height(ca: &CycleArborescence) -> usize {
    height_with_chain(ca).0
}

fn height_with_chain(ca: &CycleArborescence) -> (usize, Vec<Vec<usize>>) {
    let a = &ca.automaton;
    let live = reaches_nonzero(a);
    longest_chain(a, |_, members| {
        members.iter().all(|&s| ca.vertex_type[s] == VertexType::Cycle) && live[members[0]]
    })
}

/// Height computed on the original automaton from its condensation: the
/// largest number of nontrivial, nonzero-reaching components on one path.
pub fn height_condensation_oracle(a: &Automaton) -> Result<usize, ArborescenceError> {
    let tied = tied_vertices(a);
    if !tied.is_empty() {
        return Err(StructureError::HasTiedVertices(
            tied.iter().map(|&s| a.name(s).to_string()).collect(),
        )
        .into());
    }
    let scc = scc_decomposition(a);
    let live = reaches_nonzero(a);
    Ok(longest_chain(a, |c, members| scc.components[c].nontrivial && live[members[0]]).0)
}

#[derive(Clone, Debug, Serialize)]
pub struct RankReport {
    pub height: usize,
    pub rank: i64,
    /// Members of each cycle on a longest chain, upstream first.
    pub live_cycle_chain: Vec<Vec<String>>,
}

/// Whether some index `k >= 1` has a nonzero term.
pub fn support_is_nonempty(a: &Automaton) -> bool {
    let reach = a.reachable_from(a.start());
    a.all_edges().any(|(s, d, t)| reach[s] && d != 0 && a.is_nonzero(t))
}

pub fn rank_of_sparseness(a: &Automaton) -> Result<RankReport, ArborescenceError> {
    if classify_sparse(a).verdict == Verdict::NonSparse {
        return Err(ArborescenceError::NonSparse);
    }
    if !support_is_nonempty(a) {
        return Err(ArborescenceError::EmptySupport);
    }
    let ca = arborize(a)?;
    let (h, chain) = height_with_chain(&ca);
    let names = chain
        .into_iter()
        .map(|c| c.into_iter().map(|s| ca.automaton.name(s).to_string()).collect())
        .collect();
    Ok(RankReport {
        height: h,
        rank: h as i64 - 1,
        live_cycle_chain: names,
    })
}
