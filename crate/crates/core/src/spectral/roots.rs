//! Certified enclosure of the spectral radius, plus the floating-point power
//! iteration used to cross-check it.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::json;

use super::matrix::{CountMatrix, StronglyConnectedSubdigraph};
use super::poly::{char_poly, eval_int, int_derivative, IntPoly, Sturm};

/// Relative width the bisection stops at.
pub const RELATIVE_WIDTH: f64 = 1e-12;
/// Relative tolerance for the power-iteration cross-check.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-9;

/// Rational interval `[lo, hi]` containing a real number; `lo == hi` when the
/// value is known exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RhoInterval {
    pub fn exact(x: BigRational) -> Self {
        RhoInterval { lo: x.clone(), hi: x }
    }

    pub fn from_int(x: i64) -> Self {
        Self::exact(BigRational::from_integer(BigInt::from(x)))
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64().unwrap_or(f64::NAN)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64().unwrap_or(f64::NAN)
    }

    pub fn mid_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / BigRational::from_integer(2.into()))
            .to_f64()
            .unwrap_or(f64::NAN)
    }

    pub fn contains_f64(&self, x: f64, rel_tol: f64) -> bool {
        let slack = rel_tol * self.hi_f64().abs().max(1.0);
        x >= self.lo_f64() - slack && x <= self.hi_f64() + slack
    }

    pub fn pow(&self, p: u32) -> RhoInterval {
        let p = p as i32;
        RhoInterval {
            lo: num_traits::pow::Pow::pow(&self.lo, p),
            hi: num_traits::pow::Pow::pow(&self.hi, p),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({"lo": self.lo_f64(), "hi": self.hi_f64()})
    }
}

/// Certified spectral radius of a strongly connected subdigraph.
#[derive(Clone, Debug)]
pub struct RadiusCertificate {
    pub char_poly: IntPoly,
    pub rho: RhoInterval,
    /// `ρ` is a simple root of the characteristic polynomial.
    pub simple: bool,
    /// Collatz–Wielandt bounds from power iteration on `A + I`, shifted back.
    pub power_bounds: (f64, f64),
    pub power_estimate: f64,
    pub cross_check_ok: bool,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Largest real root of `p` in `(lower, upper]`, or `None` if there is none;
/// requires that `p` has no root above `upper`. The result has relative
/// width at most `RELATIVE_WIDTH` and isolates a single root; it collapses
/// to a point when a bisection point hits the root.
pub fn largest_root_in(p: &[BigInt], lower: &BigRational, upper: &BigRational) -> Option<RhoInterval> {
    let sturm = Sturm::new(p);
    if sturm.count(lower, upper) == 0 {
        return None;
    }
    let tol = BigRational::from_float(RELATIVE_WIDTH).unwrap();
    let two = rat(2);
    let (mut lo, mut hi) = (lower.clone(), upper.clone());
    loop {
        if eval_int(p, &hi).is_zero() {
            // nothing lies above hi, so hi is the largest root
            return Some(RhoInterval::exact(hi));
        }
        let width_ok = &hi - &lo <= &tol * lo.abs();
        if width_ok && sturm.count(&lo, &hi) == 1 {
            return Some(RhoInterval { lo, hi });
        }
        let mid = (&lo + &hi) / &two;
        if sturm.count(&mid, upper) >= 1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Power iteration on `A + I`: a positive vector and Collatz–Wielandt bounds
/// `min_i (Mx)_i/x_i <= ρ(A) + 1 <= max_i (Mx)_i/x_i`.
pub fn power_iteration(a: &[Vec<f64>], max_iter: usize) -> (Vec<f64>, f64, f64) {
    let n = a.len();
    let mut x = vec![1.0; n];
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    for _ in 0..max_iter {
        let y: Vec<f64> = (0..n)
            .map(|i| x[i] + (0..n).map(|j| a[i][j] * x[j]).sum::<f64>())
            .collect();
        let ratios = y.iter().zip(&x).map(|(yi, xi)| yi / xi);
        lo = ratios.clone().fold(f64::INFINITY, f64::min);
        hi = ratios.fold(0.0, f64::max);
        let norm = y.iter().cloned().fold(0.0, f64::max);
        x = y.into_iter().map(|v| v / norm).collect();
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    (x, lo - 1.0, hi - 1.0)
}

/// Certified enclosure of `ρ(A_v)`. A subdigraph without edges has `ρ = 0`.
pub fn spectral_radius(sub: &StronglyConnectedSubdigraph) -> RadiusCertificate {
    radius_of_matrix(&sub.matrix)
}

pub fn radius_of_matrix(m: &CountMatrix) -> RadiusCertificate {
    let cp = char_poly(m);
    if !m.has_edge() {
        return RadiusCertificate {
            char_poly: cp,
            rho: RhoInterval::from_int(0),
            simple: m.dim() == 1,
            power_bounds: (0.0, 0.0),
            power_estimate: 0.0,
            cross_check_ok: true,
        };
    }
    let upper = BigRational::from_integer(BigInt::from(m.max_row_sum() + BigUint::one()));
    let one = rat(1);
    let rho = largest_root_in(&cp, &one, &upper).unwrap_or_else(|| RhoInterval::exact(one.clone()));

    let dp = int_derivative(&cp);
    let simple = if rho.is_exact() {
        !eval_int(&dp, &rho.hi).is_zero()
    } else {
        let sign_change = eval_int(&cp, &rho.lo).is_negative() && eval_int(&cp, &rho.hi).is_positive();
        sign_change && Sturm::new(&dp).count(&rho.lo, &rho.hi) == 0
    };

    let (_, lo, hi) = power_iteration(&m.to_f64(), 100_000);
    let estimate = (lo + hi) / 2.0;
    let cross_check_ok = rho.contains_f64(estimate, CROSS_CHECK_TOLERANCE);
    RadiusCertificate {
        char_poly: cp,
        rho,
        simple,
        power_bounds: (lo, hi),
        power_estimate: estimate,
        cross_check_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::spectral::matrix::strongly_connected_subdigraph;

    fn check_tight(r: &RhoInterval) {
        if !r.is_exact() {
            let width = (&r.hi - &r.lo).to_f64().unwrap();
            assert!(width <= RELATIVE_WIDTH * r.lo_f64(), "width {width}");
        }
    }

    #[test]
    fn square_root_of_two_for_second_figure() {
        let a = corpus::fig1b();
        for name in ["B", "C", "E"] {
            let c = spectral_radius(&strongly_connected_subdigraph(&a, a.find_state(name).unwrap()));
            assert!((c.rho.mid_f64() - 2f64.sqrt()).abs() < 1e-9);
            assert!(c.simple && c.cross_check_ok);
            check_tight(&c.rho);
            // √2 is irrational: the interval is not exact and straddles it
            let two = rat(2);
            assert!(&c.rho.lo * &c.rho.lo < two && &c.rho.hi * &c.rho.hi > two);
        }
    }

    #[test]
    fn golden_ratio_for_fibonacci() {
        let a = corpus::fib();
        let c = spectral_radius(&strongly_connected_subdigraph(&a, a.find_state("u").unwrap()));
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((c.rho.mid_f64() - phi).abs() < 1e-9);
        check_tight(&c.rho);
        assert!(c.cross_check_ok);
    }

    #[test]
    fn simple_cycles_have_radius_one() {
        for len in 1..=5usize {
            let rows: Vec<Vec<u64>> = (0..len)
                .map(|i| (0..len).map(|j| (j == (i + 1) % len) as u64).collect())
                .collect();
            let refs: Vec<&[u64]> = rows.iter().map(|r| r.as_slice()).collect();
            let c = radius_of_matrix(&CountMatrix::from_rows(&refs));
            assert_eq!(c.rho, RhoInterval::from_int(1));
            assert!(c.simple && c.cross_check_ok);
        }
    }

    #[test]
    fn trivial_subdigraph_is_zero() {
        let c = radius_of_matrix(&CountMatrix::from_rows(&[&[0]]));
        assert_eq!(c.rho, RhoInterval::from_int(0));
    }

    #[test]
    fn exact_integer_radius() {
        // two self-loops: ρ = 2 is hit exactly by bisection of [1, 3]
        let c = radius_of_matrix(&CountMatrix::from_rows(&[&[2]]));
        assert_eq!(c.rho, RhoInterval::from_int(2));
        assert!(c.simple);
        let c = radius_of_matrix(&CountMatrix::from_rows(&[&[1, 1], &[1, 1]]));
        assert_eq!(c.rho, RhoInterval::from_int(2));
    }

    #[test]
    fn bisection_oracle_agrees() {
        // independent float bisection on x^2 − x − 1 over [1, 2]
        let (mut lo, mut hi) = (1.0f64, 2.0f64);
        for _ in 0..100 {
            let mid = (lo + hi) / 2.0;
            if mid * mid - mid - 1.0 < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c = radius_of_matrix(&CountMatrix::from_rows(&[&[1, 1], &[1, 0]]));
        assert!(c.rho.contains_f64(lo, 1e-12));
    }
}
