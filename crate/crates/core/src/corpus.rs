//! Bundled example automata.
//!
//! The `.aut` files and their expected-value sidecars live in the top-level
//! `corpus/` directory and are compiled in so tests and the CLI can use them
//! without touching the filesystem.

use serde::Deserialize;

use crate::automaton::{parse_automaton, Automaton};

pub const FIG1A: &str = include_str!("../../../corpus/fig1a.aut");
pub const FIG1B: &str = include_str!("../../../corpus/fig1b.aut");
pub const FIG4A: &str = include_str!("../../../corpus/fig4a.aut");
pub const FIG4B: &str = include_str!("../../../corpus/fig4b.aut");
pub const FIB: &str = include_str!("../../../corpus/fib.aut");

pub const FIG1A_META: &str = include_str!("../../../corpus/fig1a.json");
pub const FIG1B_META: &str = include_str!("../../../corpus/fig1b.json");
pub const FIG4A_META: &str = include_str!("../../../corpus/fig4a.json");
pub const FIG4B_META: &str = include_str!("../../../corpus/fig4b.json");
pub const FIB_META: &str = include_str!("../../../corpus/fib.json");

fn load(text: &str) -> Automaton {
    parse_automaton(text).expect("bundled automaton parses")
}

/// Powers of two; sparse, rank 1.
pub fn fig1a() -> Automaton {
    load(FIG1A)
}

/// Non-sparse, three tied states with spectral radius √2.
pub fn fig1b() -> Automaton {
    load(FIG1B)
}

/// Non-sparse with exponent 1/2 attained.
pub fn fig4a() -> Automaton {
    load(FIG4A)
}

/// Non-sparse with exponent 1/2 not attained.
pub fn fig4b() -> Automaton {
    load(FIG4B)
}

/// Fibbinary numbers; exponent log₂ φ.
pub fn fib() -> Automaton {
    load(FIB)
}

/// `(id, automaton)` for every bundled entry.
pub fn all() -> Vec<(&'static str, Automaton)> {
    vec![
        ("fig1a", fig1a()),
        ("fig1b", fig1b()),
        ("fig4a", fig4a()),
        ("fig4b", fig4b()),
        ("fib", fib()),
    ]
}

/// A count identity `#E_{b^k + c} = d^(k + e)` checked for `k` in a range.
#[derive(Clone, Debug, Deserialize)]
pub struct CountIdentity {
    pub n_base: u64,
    pub n_offset: u64,
    pub count_base: u64,
    pub count_exponent_offset: i64,
    pub k_from: u32,
    pub k_to: u32,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Expected {
    pub verdict: String,
    pub tied: Vec<String>,
    #[serde(default)]
    pub rank: Option<i64>,
    #[serde(default)]
    pub height: Option<usize>,
    #[serde(default, rename = "B")]
    pub exponent: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub perron_p: Option<u32>,
    #[serde(default)]
    pub perron_root: Option<String>,
    #[serde(default)]
    pub prefix: Vec<String>,
    #[serde(default)]
    pub terms: Vec<(u64, String)>,
    #[serde(default)]
    pub count_identity: Option<CountIdentity>,
}

/// A corpus entry: the automaton text plus its expected values. The
/// `provenance` map records, per expected field, where the value comes from
/// (`stated` for values given with the source figure, `derived` for values
/// computed independently by hand).
#[derive(Clone, Debug, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub expected: Expected,
    #[serde(default)]
    pub provenance: std::collections::BTreeMap<String, String>,
    #[serde(skip)]
    pub aut_text: String,
}

impl CorpusEntry {
    pub fn automaton(&self) -> Automaton {
        load(&self.aut_text)
    }
}

pub fn parse_entry(aut_text: &str, meta_json: &str) -> Result<CorpusEntry, serde_json::Error> {
    let mut e: CorpusEntry = serde_json::from_str(meta_json)?;
    e.aut_text = aut_text.to_string();
    Ok(e)
}

pub fn entries() -> Vec<CorpusEntry> {
    [
        (FIG1A, FIG1A_META),
        (FIG1B, FIG1B_META),
        (FIG4A, FIG4A_META),
        (FIG4B, FIG4B_META),
        (FIB, FIB_META),
    ]
    .iter()
    .map(|(a, m)| parse_entry(a, m).expect("bundled metadata parses"))
    .collect()
}
