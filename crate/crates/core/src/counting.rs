//! Exact support counting `#E_N = #{k ∈ [1, N] : a_k ≠ 0}`, tables of
//! `#E_{m^k − 1}` and growth fits.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::json;
use thiserror::Error;

use crate::automaton::Automaton;
use crate::sequence::{digits_lsb_big, support_bruteforce, SequenceError, DEFAULT_BRUTE_BUDGET};
use crate::spectral::checks::ln_big;
use crate::spectral::matrix::{omega_rows, step};
use crate::structure::{classify_sparse, Verdict};

/// Default cap on `k_max` for power tables.
pub const DEFAULT_TABLE_BUDGET: usize = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CountingError {
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error("k_max {k} exceeds budget {budget}")]
    BudgetExceeded { k: usize, budget: usize },
    #[error("matrix method needs N = m^k - 1, got {0}")]
    NotPowerMinusOne(String),
    #[error("growth report needs k_max >= 10, got {0}")]
    TableTooShort(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Dp,
    Brute,
    Matrix,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Dp => "dp",
            Method::Brute => "brute",
            Method::Matrix => "matrix",
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dp" => Ok(Method::Dp),
            "brute" => Ok(Method::Brute),
            "matrix" => Ok(Method::Matrix),
            _ => Err(format!("unknown method {s:?} (expected dp, brute or matrix)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountResult {
    pub n: BigUint,
    pub count: BigUint,
    pub method: Method,
}

impl CountResult {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "N": self.n.to_string(),
            "count": self.count.to_string(),
            "method": self.method.as_str(),
        })
    }
}

/// Comparison of the low digits processed so far against those of `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cmp {
    Less,
    Equal,
    Greater,
}

impl Cmp {
    fn index(self) -> usize {
        self as usize
    }

    /// Comparison after appending digit `b` above the processed digits of
    /// the candidate and `d` above those of `N`: the new top digit decides
    /// unless it ties, in which case the lower digits still decide.
    fn push(self, b: usize, d: usize) -> Cmp {
        match b.cmp(&d) {
            std::cmp::Ordering::Less => Cmp::Less,
            std::cmp::Ordering::Greater => Cmp::Greater,
            std::cmp::Ordering::Equal => self,
        }
    }
}

const CMPS: [Cmp; 3] = [Cmp::Less, Cmp::Equal, Cmp::Greater];

/// `#E_N` by digit dynamic programming.
pub fn count_support_exact(a: &Automaton, n: &BigUint) -> CountResult {
    let result = |count| CountResult {
        n: n.clone(),
        count,
        method: Method::Dp,
    };
    if n.is_zero() {
        return result(BigUint::zero());
    }
    let m = a.base();
    let digits = digits_lsb_big(n, m).digits;
    let len = digits.len();
    let mut count = BigUint::zero();

    // integers with j < L digits: walks of length j with a nonzero last digit
    let mut any = vec![BigUint::zero(); a.len()];
    any[a.start()] = BigUint::one();
    for _ in 1..len {
        for s in 0..a.len() {
            if any[s].is_zero() {
                continue;
            }
            for d in 1..m {
                if a.is_nonzero(a.next(s, d)) {
                    count += &any[s];
                }
            }
        }
        any = step(a, &any);
    }

    // integers with exactly L digits and value ≤ N
    let mut dp = vec![[BigUint::zero(), BigUint::zero(), BigUint::zero()]; a.len()];
    dp[a.start()][Cmp::Equal.index()] = BigUint::one();
    for (t, &d) in digits.iter().enumerate() {
        let mut next = vec![[BigUint::zero(), BigUint::zero(), BigUint::zero()]; a.len()];
        let lowest = if t == len - 1 { 1 } else { 0 };
        for s in 0..a.len() {
            for c in CMPS {
                let ways = &dp[s][c.index()];
                if ways.is_zero() {
                    continue;
                }
                for b in lowest..m {
                    next[a.next(s, b)][c.push(b, d).index()] += ways;
                }
            }
        }
        dp = next;
    }
    for s in (0..a.len()).filter(|&s| a.is_nonzero(s)) {
        count += &dp[s][Cmp::Less.index()] + &dp[s][Cmp::Equal.index()];
    }
    result(count)
}

/// `k` with `n = m^k − 1`, if any.
pub fn power_minus_one(n: &BigUint, base: usize) -> Option<usize> {
    let target = n + 1u32;
    let mut p = BigUint::one();
    let mut k = 0;
    while p < target {
        p *= base;
        k += 1;
    }
    (p == target).then_some(k)
}

/// `#E_{m^k − 1}` for `k = 0..=k_max`: by leading-zero invariance every
/// integer below `m^k` is read by exactly one walk of length `k` from the
/// start, so the count is the number of such walks ending on a nonzero state,
/// less one when the start itself (the integer 0) is nonzero.
fn power_counts(a: &Automaton, k_max: usize) -> Vec<BigUint> {
    let rows = omega_rows(a, a.start(), k_max);
    rows.iter()
        .map(|row| {
            let total: BigUint = (0..a.len()).filter(|&s| a.is_nonzero(s)).map(|s| &row[s]).sum();
            if a.is_nonzero(a.start()) {
                total - 1u32
            } else {
                total
            }
        })
        .collect()
}

/// `#E_N` with the requested method. `brute` needs `N ≤ budget`; `matrix`
/// needs `N = m^k − 1`.
pub fn count_support(a: &Automaton, n: &BigUint, method: Method, budget: u64) -> Result<CountResult, CountingError> {
    let count = match method {
        Method::Dp => return Ok(count_support_exact(a, n)),
        Method::Brute => {
            let n64 = n.to_u64().ok_or(SequenceError::BudgetExceeded { n: u64::MAX, budget })?;
            BigUint::from(support_bruteforce(a, n64, budget)?.count())
        }
        Method::Matrix => {
            let k = power_minus_one(n, a.base()).ok_or_else(|| CountingError::NotPowerMinusOne(n.to_string()))?;
            power_counts(a, k).pop().expect("k + 1 rows")
        }
    };
    Ok(CountResult {
        n: n.clone(),
        count,
        method,
    })
}

pub fn count_support_default(a: &Automaton, n: &BigUint, method: Method) -> Result<CountResult, CountingError> {
    count_support(a, n, method, DEFAULT_BRUTE_BUDGET)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthTable {
    pub base: usize,
    /// `(k, #E_{m^k − 1})` for `k = 1..=k_max`.
    pub rows: Vec<(usize, BigUint)>,
}

impl GrowthTable {
    /// `log_m(count_k) / k`, or `None` when the count is zero.
    pub fn log_ratio(&self, i: usize) -> Option<f64> {
        let (k, c) = &self.rows[i];
        (!c.is_zero()).then(|| ln_big(c) / (self.base as f64).ln() / *k as f64)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,count,log_ratio\n");
        for (i, (k, c)) in self.rows.iter().enumerate() {
            let ratio = self.log_ratio(i).map(|r| r.to_string()).unwrap_or_default();
            writeln!(out, "{k},{c},{ratio}").unwrap();
        }
        out
    }
}

pub fn count_power_table(a: &Automaton, k_max: usize) -> Result<GrowthTable, CountingError> {
    count_power_table_with_budget(a, k_max, DEFAULT_TABLE_BUDGET)
}

pub fn count_power_table_with_budget(a: &Automaton, k_max: usize, budget: usize) -> Result<GrowthTable, CountingError> {
    if k_max > budget {
        return Err(CountingError::BudgetExceeded { k: k_max, budget });
    }
    let rows = power_counts(a, k_max).into_iter().enumerate().skip(1).collect();
    Ok(GrowthTable { base: a.base(), rows })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GrowthFit {
    /// Slope of `log_m count_k` against `k`.
    Exponent(f64),
    /// Slope of `ln count_k` against `ln k`.
    PolylogDegree(f64),
}

impl GrowthFit {
    pub fn value(self) -> f64 {
        match self {
            GrowthFit::Exponent(x) | GrowthFit::PolylogDegree(x) => x,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub table: GrowthTable,
    pub verdict: Verdict,
    /// `None` when fewer than two rows of the fitted range have a nonzero count.
    pub fit: Option<GrowthFit>,
}

impl GrowthReport {
    pub fn to_json(&self) -> serde_json::Value {
        let (kind, value) = match self.fit {
            Some(GrowthFit::Exponent(x)) => ("exponent", Some(x)),
            Some(GrowthFit::PolylogDegree(x)) => ("polylog_degree", Some(x)),
            None => ("none", None),
        };
        json!({
            "verdict": self.verdict,
            "fit": {"kind": kind, "value": value},
            "rows": self.table.rows.iter().enumerate().map(|(i, (k, c))| json!({
                "k": k,
                "count": c.to_string(),
                "log_ratio": self.table.log_ratio(i),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Ordinary least-squares slope.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Power table plus a fit over its top half of rows: the exponent for
/// non-sparse automata, the polylog degree for sparse ones.
pub fn growth_report(a: &Automaton, k_max: usize) -> Result<GrowthReport, CountingError> {
    if k_max < 10 {
        return Err(CountingError::TableTooShort(k_max));
    }
    let table = count_power_table(a, k_max)?;
    let verdict = classify_sparse(a).verdict;
    let ln_m = (a.base() as f64).ln();
    let top = table.rows.iter().filter(|(k, c)| *k > k_max / 2 && !c.is_zero());
    let fit = match verdict {
        Verdict::NonSparse => {
            let pts: Vec<_> = top.map(|(k, c)| (*k as f64, ln_big(c) / ln_m)).collect();
            least_squares_slope(&pts).map(GrowthFit::Exponent)
        }
        Verdict::Sparse => {
            let pts: Vec<_> = top.map(|(k, c)| ((*k as f64).ln(), ln_big(c))).collect();
            least_squares_slope(&pts).map(GrowthFit::PolylogDegree)
        }
    };
    Ok(GrowthReport { table, verdict, fit })
}
