//! Exponential witness families: for a tied state `v`, the sizes of
//! `W_s ∘ W_{i_1} ∘ … ∘ W_{i_k} ∘ W_e` with `i_j ∈ {1, 2}` are `2^k`
//! distinct support members below `m^{z + y + kx}`.

use std::collections::{HashSet, VecDeque};

use num_bigint::BigUint;
use num_traits::One;

use super::matrix::omega_table;
use super::SpectralError;
use crate::automaton::Automaton;
use crate::sequence::{compose_walks, eval_term_big, Walk};
use crate::structure::{default_oracle_bound, tied_vertices};

/// Default cap on the number of members (`2^k`).
pub const DEFAULT_MEMBER_BUDGET: usize = 1 << 20;

#[derive(Clone, Debug)]
pub struct WitnessFamily {
    pub v: usize,
    /// Shortest walk from the start to `v`.
    pub ws: Walk,
    /// Two distinct closed walks at `v` of common length `x`.
    pub w1: Walk,
    pub w2: Walk,
    /// Walk from `v` to a nonzero state whose last digit is nonzero.
    pub we: Walk,
    pub k: usize,
    /// Member sizes in the order of the choice sequences `(i_1, …, i_k)`,
    /// read as binary numbers with `W_1` as 0.
    pub members: Vec<BigUint>,
}

impl WitnessFamily {
    pub fn x(&self) -> usize {
        self.w1.len()
    }

    pub fn y(&self) -> usize {
        self.we.len()
    }

    pub fn z(&self) -> usize {
        self.ws.len()
    }

    /// Total walk length `z + y + kx` of every member.
    pub fn length(&self) -> usize {
        self.z() + self.y() + self.k * self.x()
    }

    /// `m^{z + y + kx}`, an upper bound on every member.
    pub fn bound(&self, base: usize) -> BigUint {
        BigUint::from(base).pow(self.length() as u32)
    }

    /// Members are distinct, in the support, and below the bound.
    pub fn verify(&self, a: &Automaton) -> bool {
        let bound = self.bound(a.base());
        let distinct = self.members.iter().collect::<HashSet<_>>().len() == self.members.len();
        distinct
            && self.members.len() == 1usize << self.k
            && self
                .members
                .iter()
                .all(|n| *n < bound && !eval_term_big(a, n).is_zero())
    }
}

/// Shortest walk from `from` to any state satisfying `goal`, digits tried in
/// increasing order.
fn shortest_walk(a: &Automaton, from: usize, goal: impl Fn(usize) -> bool) -> Option<Walk> {
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; a.len()];
    let mut seen = vec![false; a.len()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    let mut hit = None;
    while let Some(s) = queue.pop_front() {
        if goal(s) {
            hit = Some(s);
            break;
        }
        for (d, t) in a.edges(s) {
            if !seen[t] {
                seen[t] = true;
                prev[t] = Some((s, d));
                queue.push_back(t);
            }
        }
    }
    let mut s = hit?;
    let mut digits = Vec::new();
    while let Some((p, d)) = prev[s] {
        digits.push(d);
        s = p;
    }
    digits.reverse();
    Some(Walk::from_digits(a, from, &digits))
}

/// The first two closed walks at `v` of length `x` in lexicographic digit
/// order, pruned by exact reachability in the remaining number of steps.
fn two_closed_walks(a: &Automaton, v: usize, x: usize) -> (Walk, Walk) {
    // can[r][s]: state s reaches v in exactly r steps
    let mut can = vec![vec![false; a.len()]; x + 1];
    can[0][v] = true;
    for r in 1..=x {
        for s in 0..a.len() {
            can[r][s] = a.edges(s).any(|(_, t)| can[r - 1][t]);
        }
    }
    let mut found: Vec<Vec<usize>> = Vec::new();
    let mut digits = Vec::with_capacity(x);
    fn dfs(
        a: &Automaton,
        s: usize,
        left: usize,
        can: &[Vec<bool>],
        digits: &mut Vec<usize>,
        found: &mut Vec<Vec<usize>>,
    ) {
        if found.len() == 2 {
            return;
        }
        if left == 0 {
            found.push(digits.clone());
            return;
        }
        for (d, t) in a.edges(s) {
            if can[left - 1][t] {
                digits.push(d);
                dfs(a, t, left - 1, can, digits, found);
                digits.pop();
            }
        }
    }
    dfs(a, v, x, &can, &mut digits, &mut found);
    (
        Walk::from_digits(a, v, &found[0]),
        Walk::from_digits(a, v, &found[1]),
    )
}

pub fn witness_family(a: &Automaton, v: usize, k: usize) -> Result<WitnessFamily, SpectralError> {
    witness_family_with_budget(a, v, k, DEFAULT_MEMBER_BUDGET)
}

pub fn witness_family_with_budget(
    a: &Automaton,
    v: usize,
    k: usize,
    budget: usize,
) -> Result<WitnessFamily, SpectralError> {
    if !tied_vertices(a).contains(&v) {
        return Err(SpectralError::NotTied(a.name(v).to_string()));
    }
    if k >= usize::BITS as usize - 1 || (1usize << k) > budget {
        return Err(SpectralError::BudgetExceeded { n: k, budget });
    }
    let omega = omega_table(a, v, v, default_oracle_bound(a));
    let two = BigUint::from(2u32);
    let x = (1..omega.len())
        .find(|&n| omega[n] >= two)
        .expect("tied state has two closed walks of equal length");
    let (w1, w2) = two_closed_walks(a, v, x);
    let ws = shortest_walk(a, a.start(), |s| s == v).expect("accessible");
    let we = if a.is_nonzero(v) {
        // trailing zeros of a closed walk lead back to v without changing
        // the output, so the trimmed walk ends on a nonzero state
        let (t1, t2) = (w1.trim_trailing_zeros(), w2.trim_trailing_zeros());
        match (t1.is_empty(), t2.is_empty()) {
            (false, false) if t2.len() < t1.len() => t2,
            (false, _) => t1,
            _ => t2,
        }
    } else {
        shortest_walk(a, v, |s| a.is_nonzero(s)).expect("tied state reaches a nonzero state")
    };

    let base = a.base();
    let step = |w: &Walk| -> (BigUint, BigUint) { (w.size(base), BigUint::from(base).pow(w.len() as u32)) };
    // size(W_s ∘ M ∘ W_e) = |W_s| + m^z (|M| + m^{kx} |W_e|)
    let (s_size, s_scale) = step(&ws);
    let (e_size, _) = step(&we);
    let (one_size, _) = step(&w1);
    let (two_size, x_scale) = step(&w2);
    let mid_scale = x_scale.pow(k as u32);
    let mut members = Vec::with_capacity(1 << k);
    for choice in 0..(1usize << k) {
        // bit j of `choice` picks the j-th middle block, least significant first
        let mut mid = BigUint::default();
        let mut scale = BigUint::one();
        for j in 0..k {
            let block = if (choice >> (k - 1 - j)) & 1 == 0 { &one_size } else { &two_size };
            mid += block * &scale;
            scale *= &x_scale;
        }
        members.push(&s_size + &s_scale * (mid + &mid_scale * &e_size));
    }
    Ok(WitnessFamily {
        v,
        ws,
        w1,
        w2,
        we,
        k,
        members,
    })
}

/// Composes the full walk for one choice sequence; used to cross-check sizes.
pub fn compose_member(f: &WitnessFamily, choices: &[bool]) -> Walk {
    let mut w = f.ws.clone();
    for &c in choices {
        w = compose_walks(&w, if c { &f.w2 } else { &f.w1 }).expect("closed walks at v");
    }
    compose_walks(&w, &f.we).expect("exit walk starts at v")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::sequence::run;

    #[test]
    fn second_figure_family() {
        let a = corpus::fig1b();
        let b = a.find_state("B").unwrap();
        let f = witness_family(&a, b, 3).unwrap();
        assert_eq!(f.members.len(), 8);
        assert!(f.verify(&a));
        assert_ne!(f.w1.digits(), f.w2.digits());
        assert_eq!(f.w1.len(), f.w2.len());
        assert_eq!(f.w1.end(), b);
        assert_eq!(f.ws.start, a.start());
        assert_eq!(f.ws.end(), b);
        assert_ne!(*f.we.digits().last().unwrap(), 0);
        assert!(a.is_nonzero(f.we.end()));
    }

    #[test]
    fn sizes_match_composed_walks() {
        let a = corpus::fig1b();
        let f = witness_family(&a, a.find_state("C").unwrap(), 4).unwrap();
        for (i, m) in f.members.iter().enumerate() {
            let choices: Vec<bool> = (0..4).map(|j| (i >> (3 - j)) & 1 == 1).collect();
            let w = compose_member(&f, &choices);
            assert_eq!(w.size(2), *m);
            assert_eq!(run(&a, a.start(), &w.digits()), w.end());
        }
    }

    #[test]
    fn empty_middle() {
        let a = corpus::fib();
        let f = witness_family(&a, a.find_state("u").unwrap(), 0).unwrap();
        assert_eq!(f.members.len(), 1);
        assert!(f.verify(&a));
    }

    #[test]
    fn fibonacci_family() {
        let a = corpus::fib();
        let f = witness_family(&a, a.find_state("u").unwrap(), 4).unwrap();
        assert_eq!(f.members.len(), 16);
        assert!(f.verify(&a));
    }

    #[test]
    fn budget_and_precondition() {
        let a = corpus::fib();
        let u = a.find_state("u").unwrap();
        assert!(matches!(
            witness_family_with_budget(&a, u, 5, 16),
            Err(SpectralError::BudgetExceeded { .. })
        ));
        let f = corpus::fig1a();
        assert!(matches!(witness_family(&f, 0, 1), Err(SpectralError::NotTied(_))));
    }
}
