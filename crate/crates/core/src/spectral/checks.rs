//! Empirical checks of the closed-walk growth bounds and the 𝒲_k diagnostic.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::matrix::{cumulative, omega_table, strongly_connected_subdigraph, DEFAULT_WALK_BUDGET};
use super::perron::perron_vector;
use super::roots::{spectral_radius, RhoInterval};
use super::SpectralError;
use crate::automaton::Automaton;
use crate::structure::tied_vertices;

/// Natural logarithm of a big natural number (−∞ for zero).
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 60;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

fn big(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

fn rat_pow(x: &BigRational, n: usize) -> BigRational {
    num_traits::pow(x.clone(), n)
}

fn require_tied(a: &Automaton, v: usize) -> Result<(), SpectralError> {
    if tied_vertices(a).contains(&v) {
        Ok(())
    } else {
        Err(SpectralError::NotTied(a.name(v).to_string()))
    }
}

fn check_budget(n: usize) -> Result<(), SpectralError> {
    if n > DEFAULT_WALK_BUDGET {
        return Err(SpectralError::BudgetExceeded {
            n,
            budget: DEFAULT_WALK_BUDGET,
        });
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct OmegaBoundReport {
    pub n_max: usize,
    pub rho_lo: f64,
    pub rho_hi: f64,
    /// Lower-bound constant derived from the Perron eigenvector.
    pub c: f64,
    /// Window width: largest shortest-path length back to the anchor.
    pub window: usize,
    /// Number of windows `[n, n + window]` inside `0..=n_max` that were checked.
    pub windows_checked: usize,
}

/// Checks `Ω_n(v) <= ρ_hi^n` for `n <= n_max` exactly, and that every window
/// `[n, n + D]` within range contains some `n'` with `Ω_{n'}(v) >= C·ρ_lo^{n'}`.
///
/// `C = min_i x_v / (s·x_i) · ρ_hi^(−l_i)` where `x` is the Perron
/// eigenvector of `D_v`, `s` its size and `l_i` the length of a shortest path
/// from member `i` back to `v`; it is shrunk by a relative `1e−6` to absorb
/// floating-point error in `x`.
pub fn omega_bound_check(a: &Automaton, v: usize, n_max: usize) -> Result<OmegaBoundReport, SpectralError> {
    require_tied(a, v)?;
    check_budget(n_max)?;
    let sub = strongly_connected_subdigraph(a, v);
    let rho = spectral_radius(&sub).rho;
    let omega = omega_table(a, v, v, n_max);

    let hi_num = BigRational::from_integer(rho.hi.numer().clone());
    let hi_den = BigRational::from_integer(rho.hi.denom().clone());
    for (n, w) in omega.iter().enumerate() {
        if big(w) * rat_pow(&hi_den, n) > rat_pow(&hi_num, n) {
            return Err(SpectralError::BoundViolation {
                n,
                detail: format!("Ω_{n} = {w} exceeds ρ_hi^{n}"),
            });
        }
    }

    let s = sub.members.len();
    let (x, _) = perron_vector(&sub.matrix, rho.mid_f64());
    let anchor = sub.anchor_pos();
    let dist = distances_to(&sub.matrix.entries, anchor);
    let hi = rho.hi_f64();
    let c = (0..s)
        .map(|i| x[anchor] / (s as f64 * x[i]) * hi.powi(-(dist[i] as i32)))
        .fold(f64::INFINITY, f64::min)
        * (1.0 - 1e-6);
    let window = dist.iter().cloned().max().unwrap_or(0);

    let c_rat = BigRational::from_float(c).ok_or_else(|| SpectralError::BoundViolation {
        n: 0,
        detail: "lower-bound constant is not finite".into(),
    })?;
    let meets: Vec<bool> = omega
        .iter()
        .enumerate()
        .map(|(n, w)| big(w) >= &c_rat * rat_pow(&rho.lo, n))
        .collect();
    let mut windows_checked = 0;
    for n in 0..=n_max.saturating_sub(window) {
        windows_checked += 1;
        if !meets[n..=n + window].iter().any(|&b| b) {
            return Err(SpectralError::BoundViolation {
                n,
                detail: format!("no n' in [{n}, {}] with Ω_n' >= C·ρ_lo^n'", n + window),
            });
        }
    }
    Ok(OmegaBoundReport {
        n_max,
        rho_lo: rho.lo_f64(),
        rho_hi: hi,
        c,
        window,
        windows_checked,
    })
}

/// Shortest path length from every member to `target` inside the matrix.
fn distances_to(entries: &[Vec<BigUint>], target: usize) -> Vec<usize> {
    let n = entries.len();
    let mut dist = vec![usize::MAX; n];
    dist[target] = 0;
    let mut queue = std::collections::VecDeque::from([target]);
    while let Some(j) = queue.pop_front() {
        for i in 0..n {
            if !entries[i][j].is_zero() && dist[i] == usize::MAX {
                dist[i] = dist[j] + 1;
                queue.push_back(i);
            }
        }
    }
    dist
}

#[derive(Clone, Debug, Serialize)]
pub struct SupRatioReport {
    pub n_max: usize,
    /// `max_{n <= n_max} log_m(Ω_n(v))/n`, skipping `Ω_n = 0`.
    pub sup: f64,
    /// Running maximum for `n = 1..=n_max` (`None` while every `Ω_n` is 0).
    pub running: Vec<Option<f64>>,
    /// `log_m ρ_hi`.
    pub log_rho_hi: f64,
    pub log_rho: f64,
    /// `Ω_n <= ρ_hi^n` for every `n`, checked exactly.
    pub below_upper: bool,
}

pub fn sup_ratio_check(a: &Automaton, v: usize, n_max: usize) -> Result<SupRatioReport, SpectralError> {
    require_tied(a, v)?;
    check_budget(n_max)?;
    let sub = strongly_connected_subdigraph(a, v);
    let rho = spectral_radius(&sub).rho;
    let omega = omega_table(a, v, v, n_max);
    let ln_m = (a.base() as f64).ln();
    let mut best: Option<f64> = None;
    let mut running = Vec::with_capacity(n_max);
    let hi_num = BigRational::from_integer(rho.hi.numer().clone());
    let hi_den = BigRational::from_integer(rho.hi.denom().clone());
    let mut below_upper = true;
    for (n, w) in omega.iter().enumerate().skip(1) {
        if !w.is_zero() {
            let r = ln_big(w) / ln_m / n as f64;
            best = Some(best.map_or(r, |b: f64| b.max(r)));
        }
        if big(w) * rat_pow(&hi_den, n) > rat_pow(&hi_num, n) {
            below_upper = false;
        }
        running.push(best);
    }
    Ok(SupRatioReport {
        n_max,
        sup: best.unwrap_or(f64::NEG_INFINITY),
        running,
        log_rho_hi: rho.hi_f64().ln() / ln_m,
        log_rho: rho.mid_f64().ln() / ln_m,
        below_upper,
    })
}

/// `𝒲_j` for `j = 0..=k_max`: the sum over compositions `k_1 + … + k_s = j`
/// of `Π Ω_{≤k_i}(v_i)`, built by successive convolution.
pub fn wk_table(a: &Automaton, tied: &[usize], k_max: usize) -> Vec<BigUint> {
    let mut acc: Vec<BigUint> = {
        let mut e = vec![BigUint::zero(); k_max + 1];
        e[0] = BigUint::one();
        e
    };
    // start from the unit sequence (1, 0, 0, …) and convolve each factor in
    for &v in tied {
        let f = cumulative(&omega_table(a, v, v, k_max));
        let mut next = vec![BigUint::zero(); k_max + 1];
        for (i, x) in acc.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for j in 0..=k_max - i {
                next[i + j] += x * &f[j];
            }
        }
        acc = next;
    }
    acc
}

#[derive(Clone, Debug)]
pub struct WkReport {
    pub k: usize,
    pub value: BigUint,
    /// Upper end of `max ρ_{v_i}`.
    pub rho_bar: RhoInterval,
    /// `K = (ρ̄/(ρ̄ − 1))^s · 2^s`.
    pub constant: BigRational,
    /// `𝒲_k <= K · max(k,1)^(s−1) · ρ̄^k`, exactly.
    pub within_envelope: bool,
}

/// Exact `𝒲_k` and the envelope check.
pub fn wk_diagnostic(a: &Automaton, tied: &[usize], k: usize) -> Result<WkReport, SpectralError> {
    Ok(wk_diagnostic_table(a, tied, k)?.pop().unwrap())
}

/// `wk_diagnostic` for every `j = 0..=k_max`.
pub fn wk_diagnostic_table(a: &Automaton, tied: &[usize], k_max: usize) -> Result<Vec<WkReport>, SpectralError> {
    check_budget(k_max)?;
    let all_tied = tied_vertices(a);
    for (i, v) in tied.iter().enumerate() {
        if !all_tied.contains(v) {
            return Err(SpectralError::NotTied(a.name(*v).to_string()));
        }
        if tied[..i].contains(v) {
            return Err(SpectralError::RepeatedState(a.name(*v).to_string()));
        }
    }
    let rho_bar_hi = tied
        .iter()
        .map(|&v| spectral_radius(&strongly_connected_subdigraph(a, v)).rho.hi)
        .max()
        .ok_or(SpectralError::NotTied(String::new()))?;
    let s = tied.len();
    let one = BigRational::one();
    let two = BigRational::from_integer(2.into());
    let ratio = &rho_bar_hi / (&rho_bar_hi - &one);
    let constant = rat_pow(&ratio, s) * rat_pow(&two, s);
    let table = wk_table(a, tied, k_max);
    Ok(table
        .into_iter()
        .enumerate()
        .map(|(k, value)| {
            let envelope = &constant
                * rat_pow(&BigRational::from_integer(BigInt::from(k.max(1))), s - 1)
                * rat_pow(&rho_bar_hi, k);
            WkReport {
                k,
                within_envelope: big(&value) <= envelope,
                value,
                rho_bar: RhoInterval::exact(rho_bar_hi.clone()),
                constant: constant.clone(),
            }
        })
        .collect())
}

/// CSV `n,value` of `Ω_n(u, v)` or its running sums.
pub fn omega_csv(a: &Automaton, u: usize, v: usize, n_max: usize, cumulative_sums: bool) -> String {
    let t = omega_table(a, u, v, n_max);
    let t = if cumulative_sums { cumulative(&t) } else { t };
    super::matrix::table_csv(&t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn state(a: &Automaton, n: &str) -> usize {
        a.find_state(n).unwrap()
    }

    #[test]
    fn fibonacci_bounds() {
        let a = corpus::fib();
        let u = state(&a, "u");
        let r = omega_bound_check(&a, u, 200).unwrap();
        assert!(r.c > 0.0 && r.window >= 1);
        // Ω_n(u) = Fib(n+1)
        let t = omega_table(&a, u, u, 30);
        let (mut f0, mut f1) = (BigUint::one(), BigUint::one());
        for w in t.iter().skip(1) {
            assert_eq!(*w, f1);
            let next = &f0 + &f1;
            f0 = f1;
            f1 = next;
        }
    }

    #[test]
    fn second_figure_bounds() {
        let a = corpus::fig1b();
        for name in ["B", "C", "E"] {
            omega_bound_check(&a, state(&a, name), 200).unwrap();
        }
        let b = state(&a, "B");
        let t = omega_table(&a, b, b, 20);
        for n in 1..=10 {
            assert_eq!(t[2 * n], BigUint::from(2u32).pow(n as u32 - 1));
            assert!(t[2 * n - 1].is_zero());
        }
    }

    #[test]
    fn untied_states_are_rejected() {
        let a = corpus::fig1a();
        assert!(matches!(omega_bound_check(&a, 0, 10), Err(SpectralError::NotTied(_))));
        assert!(matches!(sup_ratio_check(&a, 0, 10), Err(SpectralError::NotTied(_))));
    }

    #[test]
    fn sup_ratio_examples() {
        let a = corpus::fig1b();
        let r = sup_ratio_check(&a, state(&a, "B"), 200).unwrap();
        assert!((0.45..=0.5).contains(&r.sup), "{}", r.sup);
        assert!(r.below_upper && r.sup <= r.log_rho_hi);
        let r = sup_ratio_check(&a, state(&a, "C"), 2).unwrap();
        assert_eq!(r.sup, 0.5);

        let f = corpus::fib();
        let r = sup_ratio_check(&f, state(&f, "u"), 200).unwrap();
        assert!((0.644..=0.6943).contains(&r.sup), "{}", r.sup);
        let run: Vec<f64> = r.running.iter().flatten().cloned().collect();
        assert!(run.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn wk_single_vertex_is_cumulative_count() {
        let a = corpus::fib();
        let u = state(&a, "u");
        let t = wk_table(&a, &[u], 20);
        assert_eq!(t, cumulative(&omega_table(&a, u, u, 20)));
        assert_eq!(t[0], BigUint::one());
    }

    #[test]
    fn wk_matches_double_sum() {
        let a = corpus::fig1b();
        let (b, c) = (state(&a, "B"), state(&a, "C"));
        let ob = cumulative(&omega_table(&a, b, b, 10));
        let oc = cumulative(&omega_table(&a, c, c, 10));
        let mut direct = BigUint::zero();
        for k1 in 0..=10 {
            direct += &ob[k1] * &oc[10 - k1];
        }
        assert_eq!(wk_diagnostic(&a, &[b, c], 10).unwrap().value, direct);
        let r = wk_diagnostic(&a, &[b, c], 0).unwrap();
        assert_eq!(r.value, BigUint::one());
        assert!(r.within_envelope);
    }

    #[test]
    fn wk_envelope_holds() {
        let a = corpus::fig1b();
        let tied: Vec<usize> = ["B", "C", "E"].iter().map(|n| state(&a, n)).collect();
        for r in wk_diagnostic_table(&a, &tied, 60).unwrap() {
            assert!(r.within_envelope, "k = {}", r.k);
        }
        assert!(matches!(
            wk_diagnostic(&a, &[tied[0], tied[0]], 3),
            Err(SpectralError::RepeatedState(_))
        ));
    }
}
