//! The growth exponent `B = max_v log_m ρ_v` over the tied components.

use num_traits::ToPrimitive;
use serde_json::json;

use super::matrix::strongly_connected_subdigraph;
use super::perron::{perron_certificate, PerronCertificate};
use super::roots::{spectral_radius, RadiusCertificate, RhoInterval};
use super::SpectralError;
use crate::automaton::Automaton;
use crate::structure::{scc_decomposition, tied_vertices};

#[derive(Clone, Debug)]
pub struct TiedComponent {
    /// Members in increasing index order; the first is the anchor.
    pub members: Vec<usize>,
    pub radius: RadiusCertificate,
    pub perron: Option<PerronCertificate>,
}

impl TiedComponent {
    pub fn rho_float(&self) -> f64 {
        self.radius.rho.mid_f64()
    }
}

#[derive(Clone, Debug)]
pub struct SpectralReport {
    pub base: usize,
    pub components: Vec<TiedComponent>,
    /// Index into `components` of a component with the largest radius.
    pub argmax: usize,
}

impl SpectralReport {
    pub fn beta(&self) -> &RhoInterval {
        &self.components[self.argmax].radius.rho
    }

    pub fn beta_f64(&self) -> f64 {
        self.beta().mid_f64()
    }

    #[allow(non_snake_case)]
    pub fn B(&self) -> f64 {
        self.beta_f64().ln() / (self.base as f64).ln()
    }

    /// Every component has `ρ > 1` and passes the power-iteration cross-check.
    pub fn certified(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.radius.rho.lo_f64() > 1.0 && c.radius.cross_check_ok && c.radius.simple)
    }

    pub fn to_json(&self, a: &Automaton) -> serde_json::Value {
        let sccs: Vec<_> = self
            .components
            .iter()
            .map(|c| {
                // highest degree first; coefficients beyond i64 become strings
                let poly: Vec<serde_json::Value> = c
                    .radius
                    .char_poly
                    .iter()
                    .rev()
                    .map(|x| x.to_i64().map(Into::into).unwrap_or_else(|| x.to_string().into()))
                    .collect();
                json!({
                    "members": c.members.iter().map(|&s| a.name(s)).collect::<Vec<_>>(),
                    "char_poly": poly,
                    "rho": c.radius.rho.to_json(),
                    "perron": c.perron.as_ref().map(|p| p.to_json()),
                })
            })
            .collect();
        json!({"B": self.B(), "beta": self.beta_f64(), "sccs": sccs})
    }
}

pub fn growth_exponent(a: &Automaton) -> Result<SpectralReport, SpectralError> {
    let tied = tied_vertices(a);
    if tied.is_empty() {
        return Err(SpectralError::Sparse);
    }
    let scc = scc_decomposition(a);
    let mut seen = vec![false; scc.len()];
    let mut components = Vec::new();
    for &v in &tied {
        let c = scc.component_of[v];
        if std::mem::replace(&mut seen[c], true) {
            continue;
        }
        let sub = strongly_connected_subdigraph(a, v);
        components.push(TiedComponent {
            members: scc.components[c].members.clone(),
            radius: spectral_radius(&sub),
            perron: perron_certificate(&sub).ok(),
        });
    }
    let argmax = (0..components.len())
        .max_by(|&i, &j| {
            let (x, y) = (&components[i].radius.rho, &components[j].radius.rho);
            x.lo.cmp(&y.lo).then(x.hi.cmp(&y.hi))
        })
        .expect("at least one tied component");
    Ok(SpectralReport {
        base: a.base(),
        components,
        argmax,
    })
}

/// `log_m` of a rational enclosure, as floats `(lo, hi)`.
pub fn log_interval(rho: &RhoInterval, base: usize) -> (f64, f64) {
    let ln_m = (base as f64).ln();
    (
        rho.lo.to_f64().unwrap().ln() / ln_m,
        rho.hi.to_f64().unwrap().ln() / ln_m,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn second_figure() {
        let a = corpus::fig1b();
        let r = growth_exponent(&a).unwrap();
        assert!((r.B() - 0.5).abs() < 1e-9);
        assert!((r.beta_f64() - 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(r.components.len(), 1);
        assert!(r.certified());
        let j = r.to_json(&a);
        assert_eq!(j["sccs"][0]["char_poly"], json!([1, 0, -2, 0]));
        assert_eq!(j["sccs"][0]["perron"]["p"], 2);
    }

    #[test]
    fn fourth_figures() {
        for a in [corpus::fig4a(), corpus::fig4b()] {
            let r = growth_exponent(&a).unwrap();
            assert!((r.B() - 0.5).abs() < 1e-9, "B = {}", r.B());
        }
    }

    #[test]
    fn fibonacci() {
        let r = growth_exponent(&corpus::fib()).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((r.B() - phi.log2()).abs() < 1e-9);
        assert!((r.B() - 0.694242).abs() < 1e-6);
    }

    #[test]
    fn sparse_input() {
        assert_eq!(growth_exponent(&corpus::fig1a()).unwrap_err(), SpectralError::Sparse);
    }

    #[test]
    fn state_order_does_not_matter() {
        let a = corpus::fib();
        // same automaton with states listed in reverse
        let names: Vec<&str> = a.states().iter().map(|s| s.name.as_str()).collect();
        let rows: Vec<(String, String, Vec<String>)> = (0..a.len())
            .rev()
            .map(|s| {
                (
                    names[s].to_string(),
                    a.output(s).to_string(),
                    a.edges(s).map(|(_, t)| names[t].to_string()).collect(),
                )
            })
            .collect();
        let targets: Vec<Vec<&str>> = rows.iter().map(|r| r.2.iter().map(|s| s.as_str()).collect()).collect();
        let table: Vec<(&str, &str, &[&str])> = rows
            .iter()
            .zip(&targets)
            .map(|(r, t)| (r.0.as_str(), r.1.as_str(), t.as_slice()))
            .collect();
        let b = Automaton::from_rows(2, a.name(a.start()), &table);
        let (x, y) = (growth_exponent(&a).unwrap(), growth_exponent(&b).unwrap());
        assert!((x.B() - y.B()).abs() < 1e-12);
        assert_eq!(x.beta(), y.beta());
    }
}
