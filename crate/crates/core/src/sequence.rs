//! Term evaluation, walks and their sizes, and the brute-force support oracle.
//!
//! Terms are indexed from 0, but the support only counts indices `k >= 1`.
//! Index 0 has the empty expansion and evaluates to the start state's label.

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::automaton::{Automaton, OutputLabel};

/// Default cap on the number of terms the brute-force oracle will evaluate.
pub const DEFAULT_BRUTE_BUDGET: u64 = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SequenceError {
    #[error("walks cannot be composed: first ends at state {end}, second starts at state {start}")]
    EndpointMismatch { end: usize, start: usize },
    #[error("brute-force budget exceeded: N = {n} > {budget}")]
    BudgetExceeded { n: u64, budget: u64 },
}

/// Base-m digits, least significant first, without trailing (high) zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitString {
    pub base: usize,
    pub digits: Vec<usize>,
}

impl DigitString {
    pub fn value(&self) -> BigUint {
        digits_value(&self.digits, self.base)
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }
}

pub fn digits_lsb(k: u64, base: usize) -> DigitString {
    assert!(base >= 2);
    let mut digits = Vec::new();
    let mut k = k;
    let b = base as u64;
    while k > 0 {
        digits.push((k % b) as usize);
        k /= b;
    }
    DigitString { base, digits }
}

pub fn digits_lsb_big(k: &BigUint, base: usize) -> DigitString {
    assert!(base >= 2);
    let digits = if k.is_zero() {
        Vec::new()
    } else {
        k.to_radix_le(base as u32)
            .into_iter()
            .map(usize::from)
            .collect()
    };
    DigitString { base, digits }
}

/// Integer whose base-m digits, least significant first, are `digits`.
pub fn digits_value(digits: &[usize], base: usize) -> BigUint {
    let mut v = BigUint::zero();
    for &d in digits.iter().rev() {
        v = v * base + d;
    }
    v
}

/// State reached from `from` by consuming `digits` in order.
pub fn run(a: &Automaton, from: usize, digits: &[usize]) -> usize {
    digits.iter().fold(from, |s, &d| a.next(s, d))
}

pub fn eval_term(a: &Automaton, k: u64) -> &OutputLabel {
    let mut s = a.start();
    let mut k = k;
    let m = a.base() as u64;
    while k > 0 {
        s = a.next(s, (k % m) as usize);
        k /= m;
    }
    a.output(s)
}

pub fn eval_term_big<'a>(a: &'a Automaton, k: &BigUint) -> &'a OutputLabel {
    let digits = digits_lsb_big(k, a.base());
    a.output(run(a, a.start(), &digits.digits))
}

#[inline]
fn term_nonzero(a: &Automaton, k: u64) -> bool {
    !eval_term(a, k).is_zero()
}

/// A walk: a start state plus the digit-labeled edges taken, with the state
/// reached after each edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Walk {
    pub start: usize,
    /// `(digit, target)` per edge.
    pub steps: Vec<(usize, usize)>,
}

impl Walk {
    pub fn empty(at: usize) -> Self {
        Walk {
            start: at,
            steps: Vec::new(),
        }
    }

    pub fn from_digits(a: &Automaton, start: usize, digits: &[usize]) -> Self {
        let mut s = start;
        let steps = digits
            .iter()
            .map(|&d| {
                s = a.next(s, d);
                (d, s)
            })
            .collect();
        Walk { start, steps }
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn end(&self) -> usize {
        self.steps.last().map_or(self.start, |&(_, t)| t)
    }

    pub fn digits(&self) -> Vec<usize> {
        self.steps.iter().map(|&(d, _)| d).collect()
    }

    /// States visited, including the start.
    pub fn vertices(&self) -> Vec<usize> {
        std::iter::once(self.start)
            .chain(self.steps.iter().map(|&(_, t)| t))
            .collect()
    }

    /// Σ digit_i · m^(i-1).
    pub fn size(&self, base: usize) -> BigUint {
        digits_value(&self.digits(), base)
    }

    /// Checks that each edge exists in `a`.
    pub fn is_walk_in(&self, a: &Automaton) -> bool {
        let mut s = self.start;
        for &(d, t) in &self.steps {
            if d >= a.base() || a.next(s, d) != t {
                return false;
            }
            s = t;
        }
        true
    }

    /// Same walk with trailing digit-0 edges removed.
    pub fn trim_trailing_zeros(&self) -> Walk {
        let keep = self
            .steps
            .iter()
            .rposition(|&(d, _)| d != 0)
            .map_or(0, |i| i + 1);
        Walk {
            start: self.start,
            steps: self.steps[..keep].to_vec(),
        }
    }
}

/// The canonical walk of size `k` from the start state (no trailing zero edge).
pub fn walk_of(a: &Automaton, k: u64) -> Walk {
    Walk::from_digits(a, a.start(), &digits_lsb(k, a.base()).digits)
}

/// Concatenation; `|w1 ∘ w2| = |w1| + m^len(w1) · |w2|`.
pub fn compose_walks(w1: &Walk, w2: &Walk) -> Result<Walk, SequenceError> {
    if w1.end() != w2.start {
        return Err(SequenceError::EndpointMismatch {
            end: w1.end(),
            start: w2.start,
        });
    }
    let mut steps = w1.steps.clone();
    steps.extend_from_slice(&w2.steps);
    Ok(Walk {
        start: w1.start,
        steps,
    })
}

/// Exact support `{k in [1, N] : a_k != 0}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportSample {
    pub n: u64,
    pub members: Vec<u64>,
}

impl SupportSample {
    pub fn count(&self) -> usize {
        self.members.len()
    }

    /// One `k` per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k\n");
        for k in &self.members {
            out.push_str(&k.to_string());
            out.push('\n');
        }
        out
    }

    /// `{"N":…, "count":…, "members":[…]}`; members are omitted when there are
    /// more than `max_members` of them.
    pub fn to_json(&self, max_members: usize) -> serde_json::Value {
        let mut v = serde_json::json!({ "N": self.n, "count": self.count() });
        if self.count() <= max_members {
            v["members"] = serde_json::json!(self.members);
        }
        v
    }
}

const PARALLEL_CHUNK: u64 = 1 << 14;

/// Evaluates every term in `[1, n]`. Chunks are evaluated in parallel and
/// concatenated in order, so the result equals the sequential scan.
pub fn support_bruteforce(a: &Automaton, n: u64, budget: u64) -> Result<SupportSample, SequenceError> {
    if n > budget {
        return Err(SequenceError::BudgetExceeded { n, budget });
    }
    let members = if n < PARALLEL_CHUNK {
        (1..=n).filter(|&k| term_nonzero(a, k)).collect()
    } else {
        let chunks = n.div_ceil(PARALLEL_CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * PARALLEL_CHUNK + 1;
                let hi = ((c + 1) * PARALLEL_CHUNK).min(n);
                (lo..=hi).filter(|&k| term_nonzero(a, k)).collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
            .concat()
    };
    Ok(SupportSample { n, members })
}

/// Sequential variant of [`support_bruteforce`].
pub fn support_bruteforce_sequential(a: &Automaton, n: u64) -> SupportSample {
    SupportSample {
        n,
        members: (1..=n).filter(|&k| term_nonzero(a, k)).collect(),
    }
}

/// ⌊log_m k⌋ + 1 for k ≥ 1.
pub fn expansion_length(k: u64, base: usize) -> usize {
    digits_lsb(k, base).len()
}
