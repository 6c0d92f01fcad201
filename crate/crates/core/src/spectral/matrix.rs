//! Exact walk counting and count matrices of strongly connected subdigraphs.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use super::SpectralError;
use crate::automaton::Automaton;
use crate::structure::scc_decomposition;

/// Default cap on walk lengths for `count_walks` and the Ω tables.
pub const DEFAULT_WALK_BUDGET: usize = 4096;

/// Edge-count matrix over an ordered subset of states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountMatrix {
    /// State index of each row/column.
    pub index: Vec<usize>,
    pub entries: Vec<Vec<BigUint>>,
}

impl CountMatrix {
    /// Matrix of the subdigraph induced by `members` (kept in the given order).
    pub fn induced(a: &Automaton, members: &[usize]) -> Self {
        let n = members.len();
        let mut pos = vec![usize::MAX; a.len()];
        for (i, &s) in members.iter().enumerate() {
            pos[s] = i;
        }
        let mut entries = vec![vec![BigUint::zero(); n]; n];
        for (i, &s) in members.iter().enumerate() {
            for (_, t) in a.edges(s) {
                if pos[t] != usize::MAX {
                    entries[i][pos[t]] += 1u32;
                }
            }
        }
        CountMatrix {
            index: members.to_vec(),
            entries,
        }
    }

    pub fn from_rows(rows: &[&[u64]]) -> Self {
        CountMatrix {
            index: (0..rows.len()).collect(),
            entries: rows
                .iter()
                .map(|r| r.iter().map(|&x| BigUint::from(x)).collect())
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn has_edge(&self) -> bool {
        self.entries.iter().flatten().any(|x| !x.is_zero())
    }

    pub fn max_row_sum(&self) -> BigUint {
        self.entries
            .iter()
            .map(|r| r.iter().sum::<BigUint>())
            .max()
            .unwrap_or_default()
    }

    pub fn to_bigint(&self) -> Vec<Vec<BigInt>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|x| BigInt::from(x.clone())).collect())
            .collect()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|x| x.to_f64().unwrap_or(f64::INFINITY)).collect())
            .collect()
    }

    pub fn mul(&self, other: &CountMatrix) -> CountMatrix {
        let n = self.dim();
        let mut entries = vec![vec![BigUint::zero(); n]; n];
        for i in 0..n {
            for k in 0..n {
                if self.entries[i][k].is_zero() {
                    continue;
                }
                for j in 0..n {
                    if !other.entries[k][j].is_zero() {
                        entries[i][j] += &self.entries[i][k] * &other.entries[k][j];
                    }
                }
            }
        }
        CountMatrix {
            index: self.index.clone(),
            entries,
        }
    }

    pub fn pow(&self, p: u32) -> CountMatrix {
        let n = self.dim();
        let mut result = CountMatrix {
            index: self.index.clone(),
            entries: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| if i == j { BigUint::one() } else { BigUint::zero() })
                        .collect()
                })
                .collect(),
        };
        let mut base = self.clone();
        let mut p = p;
        while p > 0 {
            if p & 1 == 1 {
                result = result.mul(&base);
            }
            p >>= 1;
            if p > 0 {
                base = base.mul(&base);
            }
        }
        result
    }
}

/// One step of the walk-count recurrence: `y[t] = Σ_{s -d-> t} x[s]`.
pub fn step(a: &Automaton, x: &[BigUint]) -> Vec<BigUint> {
    let mut y = vec![BigUint::zero(); a.len()];
    for (s, xs) in x.iter().enumerate() {
        if xs.is_zero() {
            continue;
        }
        for (_, t) in a.edges(s) {
            y[t] += xs;
        }
    }
    y
}

/// `Ω_n(u, v)` for `n = 0..=n_max`: number of walks of length `n` from `u` to `v`.
pub fn omega_table(a: &Automaton, u: usize, v: usize, n_max: usize) -> Vec<BigUint> {
    let mut x = vec![BigUint::zero(); a.len()];
    x[u] = BigUint::one();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(x[v].clone());
    for _ in 0..n_max {
        x = step(a, &x);
        out.push(x[v].clone());
    }
    out
}

/// `Ω_n(u, v)` for `n = 0..=n_max`, for every target `v` at once.
pub fn omega_rows(a: &Automaton, u: usize, n_max: usize) -> Vec<Vec<BigUint>> {
    let mut x = vec![BigUint::zero(); a.len()];
    x[u] = BigUint::one();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(x.clone());
    for _ in 0..n_max {
        x = step(a, &x);
        out.push(x.clone());
    }
    out
}

/// Running sums of a table: entry `n` is `Σ_{i<=n} table[i]`.
pub fn cumulative(table: &[BigUint]) -> Vec<BigUint> {
    let mut acc = BigUint::zero();
    table
        .iter()
        .map(|x| {
            acc += x;
            acc.clone()
        })
        .collect()
}

/// Exact `Ω_n(u, v)`, or `Ω_{≤n}(u, v)` when `cumulative` is set.
pub fn count_walks(
    a: &Automaton,
    u: usize,
    v: usize,
    n: usize,
    cumulative: bool,
) -> Result<BigUint, SpectralError> {
    count_walks_with_budget(a, u, v, n, cumulative, DEFAULT_WALK_BUDGET)
}

pub fn count_walks_with_budget(
    a: &Automaton,
    u: usize,
    v: usize,
    n: usize,
    cumulative: bool,
    budget: usize,
) -> Result<BigUint, SpectralError> {
    if n > budget {
        return Err(SpectralError::BudgetExceeded { n, budget });
    }
    let table = omega_table(a, u, v, n);
    Ok(if cumulative {
        table.iter().sum()
    } else {
        table[n].clone()
    })
}

/// CSV `n,value` with decimal values.
pub fn table_csv(table: &[BigUint]) -> String {
    let mut out = String::from("n,value\n");
    for (n, x) in table.iter().enumerate() {
        out.push_str(&format!("{n},{x}\n"));
    }
    out
}

/// The subdigraph `D_v` induced by the states mutually reachable with `v`.
#[derive(Clone, Debug)]
pub struct StronglyConnectedSubdigraph {
    pub anchor: usize,
    /// Members in increasing index order.
    pub members: Vec<usize>,
    pub matrix: CountMatrix,
}

impl StronglyConnectedSubdigraph {
    /// Position of the anchor among the members.
    pub fn anchor_pos(&self) -> usize {
        self.members.iter().position(|&s| s == self.anchor).unwrap()
    }

    pub fn is_trivial(&self) -> bool {
        !self.matrix.has_edge()
    }
}

pub fn strongly_connected_subdigraph(a: &Automaton, v: usize) -> StronglyConnectedSubdigraph {
    let scc = scc_decomposition(a);
    let members = scc.components[scc.component_of[v]].members.clone();
    let matrix = CountMatrix::induced(a, &members);
    StronglyConnectedSubdigraph {
        anchor: v,
        members,
        matrix,
    }
}
