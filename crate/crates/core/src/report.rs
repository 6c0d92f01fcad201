//! Recomputes every expected value of a corpus entry.

use num_bigint::BigUint;
use serde::Serialize;

use crate::arborescence::{arborize, height, rank_of_sparseness};
use crate::corpus::CorpusEntry;
use crate::counting::count_support_exact;
use crate::sequence::eval_term;
use crate::spectral::growth_exponent;
use crate::spectral::perron::perron_certificate;
use crate::spectral::strongly_connected_subdigraph;
use crate::structure::classify_sparse;

/// Tolerance for floating-point expectations.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct ExpectationCheck {
    pub field: String,
    pub expected: String,
    pub actual: String,
    pub ok: bool,
}

fn exact(field: &str, expected: impl ToString, actual: impl ToString) -> ExpectationCheck {
    let (expected, actual) = (expected.to_string(), actual.to_string());
    ExpectationCheck {
        field: field.to_string(),
        ok: expected == actual,
        expected,
        actual,
    }
}

fn close(field: &str, expected: f64, actual: Option<f64>) -> ExpectationCheck {
    ExpectationCheck {
        field: field.to_string(),
        expected: expected.to_string(),
        actual: actual.map_or_else(|| "undefined".to_string(), |x| x.to_string()),
        ok: actual.is_some_and(|x| (x - expected).abs() <= FLOAT_TOLERANCE),
    }
}

pub fn check_entry(entry: &CorpusEntry) -> Vec<ExpectationCheck> {
    let a = entry.automaton();
    let e = &entry.expected;
    let mut out = Vec::new();

    let structure = classify_sparse(&a);
    out.push(exact("verdict", &e.verdict, structure.verdict));
    let tied: Vec<&str> = structure.tied.iter().map(|&s| a.name(s)).collect();
    out.push(exact("tied", e.tied.join(","), tied.join(",")));

    if !e.prefix.is_empty() {
        let got: Vec<String> = (0..e.prefix.len() as u64).map(|k| eval_term(&a, k).to_string()).collect();
        out.push(exact("prefix", e.prefix.join(","), got.join(",")));
    }
    for (k, want) in &e.terms {
        out.push(exact(&format!("term {k}"), want, eval_term(&a, *k)));
    }
    if let Some(rank) = e.rank {
        let got = rank_of_sparseness(&a).map_or_else(|err| err.to_string(), |r| r.rank.to_string());
        out.push(exact("rank", rank, got));
    }
    if let Some(h) = e.height {
        let got = arborize(&a).map_or_else(|err| err.to_string(), |ca| height(&ca).to_string());
        out.push(exact("height", h, got));
    }

    let spectral = growth_exponent(&a).ok();
    if let Some(b) = e.exponent {
        out.push(close("B", b, spectral.as_ref().map(|r| r.B())));
    }
    if let Some(beta) = e.beta {
        out.push(close("beta", beta, spectral.as_ref().map(|r| r.beta_f64())));
    }
    if e.perron_p.is_some() || e.perron_root.is_some() {
        let cert = spectral.as_ref().and_then(|r| {
            let anchor = r.components[r.argmax].members[0];
            perron_certificate(&strongly_connected_subdigraph(&a, anchor)).ok()
        });
        if let Some(p) = e.perron_p {
            let got = cert.as_ref().filter(|c| c.ok).map_or("none".to_string(), |c| c.p.to_string());
            out.push(exact("perron_p", p, got));
        }
        if let Some(root) = &e.perron_root {
            let got = cert
                .as_ref()
                .and_then(|c| c.dominant_integer())
                .map_or("not an integer".to_string(), |x| x.to_string());
            out.push(exact("perron_root", root, got));
        }
    }
    if let Some(id) = &e.count_identity {
        for k in id.k_from..=id.k_to {
            let n = BigUint::from(id.n_base).pow(k) + id.n_offset;
            let want = BigUint::from(id.count_base).pow((k as i64 + id.count_exponent_offset) as u32);
            out.push(exact(&format!("count at {n}"), want, count_support_exact(&a, &n).count));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::entries;

    #[test]
    fn corpus_expectations_hold() {
        for entry in entries() {
            let checks = check_entry(&entry);
            assert!(checks.len() >= 3);
            for c in checks {
                assert!(c.ok, "{}: {} expected {} got {}", entry.id, c.field, c.expected, c.actual);
            }
        }
    }

    #[test]
    fn mismatches_are_reported() {
        let mut entry = entries().remove(0);
        entry.expected.rank = Some(3);
        let bad: Vec<_> = check_entry(&entry).into_iter().filter(|c| !c.ok).collect();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].field, "rank");
    }
}
