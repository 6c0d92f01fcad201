//! Strongly connected components, reachability of nonzero outputs, tied
//! vertices, per-vertex case classification and the sparse/non-sparse verdict.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::automaton::Automaton;
use crate::spectral::matrix::omega_table;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("automaton has tied vertices: {}", .0.join(", "))]
    HasTiedVertices(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    /// Members in increasing index order.
    pub members: Vec<usize>,
    /// Edges `(source, digit, target)` with both ends in the component.
    pub internal_edges: Vec<(usize, usize, usize)>,
    /// Whether the component carries a cycle (at least one internal edge).
    pub nontrivial: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SccDecomposition {
    pub component_of: Vec<usize>,
    /// Components numbered by their smallest member.
    pub components: Vec<Component>,
}

impl SccDecomposition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Distinct successor components of each component (self excluded).
    pub fn condensation(&self, a: &Automaton) -> Vec<BTreeSet<usize>> {
        let mut succ = vec![BTreeSet::new(); self.len()];
        for (s, _, t) in a.all_edges() {
            let (cs, ct) = (self.component_of[s], self.component_of[t]);
            if cs != ct {
                succ[cs].insert(ct);
            }
        }
        succ
    }

    /// Components in a topological order of the condensation; ties broken by
    /// component number.
    pub fn topological_order(&self, a: &Automaton) -> Vec<usize> {
        let succ = self.condensation(a);
        let mut indeg = vec![0usize; self.len()];
        for s in &succ {
            for &t in s {
                indeg[t] += 1;
            }
        }
        let mut ready: BTreeSet<usize> = (0..self.len()).filter(|&c| indeg[c] == 0).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(c) = ready.pop_first() {
            order.push(c);
            for &t in &succ[c] {
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    ready.insert(t);
                }
            }
        }
        order
    }
}

/// Tarjan's algorithm, iterative.
pub fn scc_decomposition(a: &Automaton) -> SccDecomposition {
    let n = a.len();
    let m = a.base();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut raw: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // (state, next digit to explore)
        let mut call = vec![(root, 0usize)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (s, ref mut d)) = call.last_mut() {
            if *d < m {
                let t = a.next(s, *d);
                *d += 1;
                if index[t] == UNSEEN {
                    index[t] = counter;
                    low[t] = counter;
                    counter += 1;
                    stack.push(t);
                    on_stack[t] = true;
                    call.push((t, 0));
                } else if on_stack[t] {
                    low[s] = low[s].min(index[t]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[s]);
                }
                if low[s] == index[s] {
                    let mut comp = Vec::new();
                    loop {
                        let t = stack.pop().unwrap();
                        on_stack[t] = false;
                        comp.push(t);
                        if t == s {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    raw.push(comp);
                }
            }
        }
    }

    raw.sort_by_key(|c| c[0]);
    let mut component_of = vec![0; n];
    for (i, c) in raw.iter().enumerate() {
        for &s in c {
            component_of[s] = i;
        }
    }
    let components = raw
        .into_iter()
        .enumerate()
        .map(|(i, members)| {
            let internal_edges: Vec<_> = members
                .iter()
                .flat_map(|&s| a.edges(s).map(move |(d, t)| (s, d, t)))
                .filter(|&(_, _, t)| component_of[t] == i)
                .collect();
            Component {
                nontrivial: !internal_edges.is_empty(),
                members,
                internal_edges,
            }
        })
        .collect();
    SccDecomposition {
        component_of,
        components,
    }
}

/// States from which a nonzero-output state is reachable (possibly by the
/// empty walk).
pub fn reaches_nonzero(a: &Automaton) -> Vec<bool> {
    let mut preds = vec![Vec::new(); a.len()];
    for (s, _, t) in a.all_edges() {
        preds[t].push(s);
    }
    let mut mark: Vec<bool> = (0..a.len()).map(|s| a.is_nonzero(s)).collect();
    let mut work: Vec<usize> = (0..a.len()).filter(|&s| mark[s]).collect();
    while let Some(t) = work.pop() {
        for &s in &preds[t] {
            if !mark[s] {
                mark[s] = true;
                work.push(s);
            }
        }
    }
    mark
}

fn tied_with(a: &Automaton, scc: &SccDecomposition, live: &[bool]) -> Vec<usize> {
    let branching: Vec<bool> = scc
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| {
            c.nontrivial
                && c.members.iter().any(|&s| {
                    a.edges(s).filter(|&(_, t)| scc.component_of[t] == i).count() >= 2
                })
        })
        .collect();
    (0..a.len())
        .filter(|&v| live[v] && branching[scc.component_of[v]])
        .collect()
}

/// Tied states, in increasing index order: those that reach a nonzero output
/// and lie in a component where some member has two internal out-edges.
pub fn tied_vertices(a: &Automaton) -> Vec<usize> {
    tied_with(a, &scc_decomposition(a), &reaches_nonzero(a))
}

/// Walk-length bound for `tied_oracle` that is always sufficient.
pub fn default_oracle_bound(a: &Automaton) -> usize {
    2 * a.base() * a.len()
}

/// Tiedness straight from the definition: `v` reaches a nonzero output and
/// has two distinct closed walks of some common length `n <= n_max`.
pub fn tied_oracle(a: &Automaton, v: usize, n_max: usize) -> bool {
    if !reaches_nonzero(a)[v] {
        return false;
    }
    let two = BigUint::from(2u32);
    omega_table(a, v, v, n_max).iter().skip(1).any(|x| *x >= two)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Case {
    /// Every walk from the state stays on zero outputs.
    #[serde(rename = "case-i'")]
    DeadEnd,
    /// Reaches a nonzero output but lies on no cycle.
    #[serde(rename = "case-ii'")]
    Transient,
    /// Reaches a nonzero output and lies on exactly one cycle.
    #[serde(rename = "case-iii'")]
    OnCycle,
}

impl Case {
    pub fn as_str(self) -> &'static str {
        match self {
            Case::DeadEnd => "case-i'",
            Case::Transient => "case-ii'",
            Case::OnCycle => "case-iii'",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn cases_with(scc: &SccDecomposition, live: &[bool]) -> Vec<Case> {
    (0..live.len())
        .map(|v| {
            if !live[v] {
                Case::DeadEnd
            } else if scc.components[scc.component_of[v]].nontrivial {
                Case::OnCycle
            } else {
                Case::Transient
            }
        })
        .collect()
}

fn names(a: &Automaton, states: &[usize]) -> Vec<String> {
    states.iter().map(|&s| a.name(s).to_string()).collect()
}

pub fn classify_cases(a: &Automaton) -> Result<Vec<Case>, StructureError> {
    let scc = scc_decomposition(a);
    let live = reaches_nonzero(a);
    let tied = tied_with(a, &scc, &live);
    if !tied.is_empty() {
        return Err(StructureError::HasTiedVertices(names(a, &tied)));
    }
    Ok(cases_with(&scc, &live))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Sparse,
    NonSparse,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Sparse => "Sparse",
            Verdict::NonSparse => "NonSparse",
        })
    }
}

#[derive(Clone, Debug)]
pub struct StructureReport {
    pub scc: SccDecomposition,
    pub reaches_nonzero: Vec<bool>,
    pub tied: Vec<usize>,
    /// Present only when there are no tied vertices.
    pub cases: Option<Vec<Case>>,
    pub verdict: Verdict,
}

impl StructureReport {
    pub fn to_json(&self, a: &Automaton) -> serde_json::Value {
        let sccs: Vec<_> = self
            .scc
            .components
            .iter()
            .map(|c| json!({"members": names(a, &c.members), "nontrivial": c.nontrivial}))
            .collect();
        let cases: BTreeMap<String, &str> = self
            .cases
            .iter()
            .flat_map(|cs| cs.iter().enumerate())
            .map(|(s, c)| (a.name(s).to_string(), c.as_str()))
            .collect();
        json!({
            "verdict": self.verdict,
            "tied": names(a, &self.tied),
            "sccs": sccs,
            "cases": cases,
        })
    }
}

pub fn classify_sparse(a: &Automaton) -> StructureReport {
    let scc = scc_decomposition(a);
    let live = reaches_nonzero(a);
    let tied = tied_with(a, &scc, &live);
    let (cases, verdict) = if tied.is_empty() {
        (Some(cases_with(&scc, &live)), Verdict::Sparse)
    } else {
        (None, Verdict::NonSparse)
    };
    StructureReport {
        scc,
        reaches_nonzero: live,
        tied,
        cases,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::random::{random_tied_free_automaton, random_valid_automaton};
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn by_name(a: &Automaton, states: &[usize]) -> Vec<String> {
        names(a, states)
    }

    fn all_zero() -> Automaton {
        Automaton::from_rows(2, "z", &[("z", "0", &["z", "z"])])
    }

    #[test]
    fn components_of_second_figure() {
        let a = corpus::fig1b();
        let scc = scc_decomposition(&a);
        let comps: Vec<Vec<String>> = scc.components.iter().map(|c| by_name(&a, &c.members)).collect();
        assert_eq!(comps, vec![vec!["A", "A2"], vec!["B", "C", "E"], vec!["D"]]);
        assert!(scc.components.iter().all(|c| c.nontrivial));
    }

    #[test]
    fn small_decompositions() {
        let scc = scc_decomposition(&all_zero());
        assert_eq!(scc.len(), 1);
        assert!(scc.components[0].nontrivial);

        let chain = Automaton::from_rows(
            2,
            "a",
            &[("a", "1", &["b", "b"]), ("b", "1", &["c", "c"]), ("c", "1", &["c", "c"])],
        );
        let scc = scc_decomposition(&chain);
        let flags: Vec<bool> = scc.components.iter().map(|c| c.nontrivial).collect();
        assert_eq!(flags, vec![false, false, true]);
    }

    #[test]
    fn nonzero_reachability() {
        let a = corpus::fig1a();
        assert_eq!(
            by_name(&a, &(0..a.len()).filter(|&s| reaches_nonzero(&a)[s]).collect::<Vec<_>>()),
            vec!["P", "Q"]
        );
        assert!(reaches_nonzero(&all_zero()).iter().all(|&x| !x));
        let b = Automaton::from_rows(2, "s", &[("s", "1", &["s", "z"]), ("z", "0", &["z", "z"])]);
        assert!(reaches_nonzero(&b)[0]);
    }

    #[test]
    fn tied_examples() {
        let a = corpus::fig1b();
        assert_eq!(by_name(&a, &tied_vertices(&a)), vec!["B", "C", "E"]);
        assert!(tied_vertices(&corpus::fig1a()).is_empty());
        let two_cycle = Automaton::from_rows(
            2,
            "a",
            &[("a", "1", &["a2", "z"]), ("a2", "1", &["a", "z"]), ("z", "0", &["z", "z"])],
        );
        assert!(tied_vertices(&two_cycle).is_empty());
    }

    #[test]
    fn oracle_examples() {
        let a = corpus::fig1b();
        assert!(tied_oracle(&a, a.find_state("C").unwrap(), 24));
        let f = corpus::fig1a();
        assert!(!tied_oracle(&f, f.find_state("Q").unwrap(), 24));
        let chain = Automaton::from_rows(2, "a", &[("a", "1", &["b", "b"]), ("b", "1", &["b", "b"])]);
        assert!(!tied_oracle(&chain, 0, 100));
    }

    #[test]
    fn case_examples() {
        let a = corpus::fig1a();
        let cases = classify_cases(&a).unwrap();
        let get = |n: &str| cases[a.find_state(n).unwrap()];
        assert_eq!(get("P"), Case::OnCycle);
        assert_eq!(get("Q"), Case::OnCycle);
        assert_eq!(get("S"), Case::DeadEnd);
        let transient = Automaton::from_rows(2, "s", &[("s", "1", &["z", "z"]), ("z", "0", &["z", "z"])]);
        assert_eq!(classify_cases(&transient).unwrap()[0], Case::Transient);
        assert!(matches!(
            classify_cases(&corpus::fig1b()),
            Err(StructureError::HasTiedVertices(v)) if v == ["B", "C", "E"]
        ));
    }

    #[test]
    fn verdicts() {
        assert_eq!(classify_sparse(&corpus::fig1a()).verdict, Verdict::Sparse);
        let r = classify_sparse(&corpus::fig1b());
        assert_eq!(r.verdict, Verdict::NonSparse);
        assert_eq!(r.tied.len(), 3);
        assert!(r.cases.is_none());
        let z = classify_sparse(&all_zero());
        assert_eq!(z.verdict, Verdict::Sparse);
        assert!(z.tied.is_empty());
    }

    #[test]
    fn report_json_shape() {
        let a = corpus::fig1a();
        let j = classify_sparse(&a).to_json(&a);
        assert_eq!(j["verdict"], "Sparse");
        assert_eq!(j["cases"]["S"], "case-i'");
        assert_eq!(j["sccs"].as_array().unwrap().len(), 3);
    }

    /// Number of closed walks at `v` of length `n` that do not pass through
    /// `v` in between, for `n = 1..=n_max`.
    fn first_returns(a: &Automaton, v: usize, n_max: usize) -> Vec<BigUint> {
        let mut x = vec![BigUint::zero(); a.len()];
        for (_, t) in a.edges(v) {
            x[t] += 1u32;
        }
        let mut out = Vec::new();
        for _ in 0..n_max {
            out.push(x[v].clone());
            let mut y = vec![BigUint::zero(); a.len()];
            for s in (0..a.len()).filter(|&s| s != v) {
                for (_, t) in a.edges(s) {
                    y[t] += &x[s];
                }
            }
            x = y;
        }
        out
    }

    #[test]
    fn random_structure_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..200 {
            let base = rng.gen_range(2..=3);
            let a = random_valid_automaton(&mut rng, 8, base);
            let scc = scc_decomposition(&a);
            let live = reaches_nonzero(&a);
            let tied = tied_vertices(&a);
            let bound = default_oracle_bound(&a);

            for v in 0..a.len() {
                // structural criterion against walk counting
                assert_eq!(tied.contains(&v), tied_oracle(&a, v, bound), "{a}");
                // against two distinct first-return walks
                let returns: BigUint = first_returns(&a, v, bound).iter().sum();
                assert_eq!(tied.contains(&v), live[v] && returns >= BigUint::from(2u32), "{a}");
            }

            for c in &scc.components {
                let live_members: Vec<_> = c.members.iter().filter(|&&s| live[s]).collect();
                if c.nontrivial && live_members.len() > 1 {
                    let t0 = tied.contains(live_members[0]);
                    assert!(live_members.iter().all(|s| tied.contains(s) == t0));
                }
            }

            let order = scc.topological_order(&a);
            assert_eq!(order.len(), scc.len(), "condensation must be acyclic");
            let mut pos = vec![0; scc.len()];
            for (i, &c) in order.iter().enumerate() {
                pos[c] = i;
            }
            for (c, succ) in scc.condensation(&a).iter().enumerate() {
                assert!(succ.iter().all(|&d| pos[c] < pos[d]));
            }
            let mut seen: Vec<usize> = scc.components.iter().flat_map(|c| c.members.clone()).collect();
            seen.sort_unstable();
            assert_eq!(seen, (0..a.len()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn tied_free_components_are_simple_cycles() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let base = rng.gen_range(2..=3);
            let a = random_valid_automaton(&mut rng, 8, base);
            if !tied_vertices(&a).is_empty() {
                continue;
            }
            let scc = scc_decomposition(&a);
            let live = reaches_nonzero(&a);
            for (i, c) in scc.components.iter().enumerate() {
                if c.nontrivial && live[c.members[0]] {
                    for &s in &c.members {
                        let internal = a.edges(s).filter(|&(_, t)| scc.component_of[t] == i).count();
                        assert_eq!(internal, 1, "{a}");
                    }
                }
            }
        }
        for _ in 0..100 {
            let a = random_tied_free_automaton(&mut rng, 8, 2);
            assert!(tied_vertices(&a).is_empty(), "{a}");
        }
    }
}
