//! Perron certificates: some power `ρ^p` is a root of an irreducible integer
//! polynomial whose other roots are strictly smaller in modulus.
//!
//! The dominance of `ρ^p` is certified by counting the roots of that factor
//! inside a circle `|z| = r` with `r < ρ^p`: the argument principle is
//! evaluated on exact Gaussian-rational points, and a Lipschitz bound on the
//! polynomial rules out a zero, or a half-turn, between neighbouring points.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::json;

use super::matrix::{CountMatrix, StronglyConnectedSubdigraph};
use super::poly::{char_poly, factor, format_poly, IntPoly, Sturm};
use super::roots::{power_iteration, radius_of_matrix, RhoInterval};
use super::SpectralError;

/// Largest power tried.
pub const MAX_POWER: u32 = 64;
/// Finest sampling of each half circle (number of steps).
const MAX_GRID: i64 = 1 << 14;
/// Residual bound required of the eigenvector.
pub const EIGVEC_RESIDUAL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct PerronCertificate {
    pub p: u32,
    /// Irreducible factor of the characteristic polynomial of `A^p` having
    /// `ρ^p` as a root.
    pub poly: IntPoly,
    /// Enclosure of `ρ^p`.
    pub dominant: RhoInterval,
    /// Circle radius: all other roots of `poly` lie strictly inside it.
    pub radius: f64,
    /// Lower end of `ρ^p` minus the modulus of each other root.
    pub root_gaps: Vec<f64>,
    /// Positive eigenvector of `A` for `ρ`, normalized to maximum 1.
    pub eigvec: Vec<f64>,
    pub residual: f64,
    pub period: u32,
    pub ok: bool,
}

impl PerronCertificate {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "p": self.p,
            "poly": format_poly(&self.poly),
            "ok": self.ok,
        })
    }

    /// `ρ^p` as an exact integer, when the certifying factor is linear.
    pub fn dominant_integer(&self) -> Option<BigInt> {
        (self.poly.len() == 2 && self.poly[1].is_one()).then(|| -self.poly[0].clone())
    }
}

/// Period of a strongly connected matrix: gcd of its cycle lengths.
pub fn period(m: &CountMatrix) -> u32 {
    let n = m.dim();
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if !m.entries[i][j].is_zero() && level[j] == usize::MAX {
                level[j] = level[i] + 1;
                queue.push_back(j);
            }
        }
    }
    let mut g = 0i64;
    for i in 0..n {
        for j in 0..n {
            if !m.entries[i][j].is_zero() && level[i] != usize::MAX && level[j] != usize::MAX {
                g = g.gcd(&(level[i] as i64 + 1 - level[j] as i64));
            }
        }
    }
    g.max(1) as u32
}

/// Positive eigenvector for the dominant eigenvalue, refined by inverse
/// iteration. Returns the vector (max-normalized) and the relative residual.
pub fn perron_vector(m: &CountMatrix, rho: f64) -> (Vec<f64>, f64) {
    let a = m.to_f64();
    let n = a.len();
    let (mut x, _, _) = power_iteration(&a, 100_000);
    let mat = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let shifted = &mat - DMatrix::identity(n, n) * (rho * (1.0 + 1e-13));
    let lu = shifted.lu();
    for _ in 0..3 {
        let v = nalgebra::DVector::from_vec(x.clone());
        let Some(y) = lu.solve(&v) else { break };
        let norm = y.iter().cloned().fold(0.0, |acc: f64, t| if t.abs() > acc.abs() { t } else { acc });
        if norm == 0.0 || !norm.is_finite() {
            break;
        }
        x = y.iter().map(|t| t / norm).collect();
    }
    let residual = residual(&a, &x, rho);
    (x, residual)
}

fn residual(a: &[Vec<f64>], x: &[f64], rho: f64) -> f64 {
    let n = a.len();
    let top = x.iter().cloned().fold(0.0, f64::max);
    (0..n)
        .map(|i| ((0..n).map(|j| a[i][j] * x[j]).sum::<f64>() - rho * x[i]).abs())
        .fold(0.0, f64::max)
        / top
}

/// Complex roots of a monic-up-to-sign integer polynomial, numerically.
fn numeric_roots(f: &[BigInt]) -> Vec<(f64, f64)> {
    let d = f.len() - 1;
    let lead = f[d].to_f64().unwrap();
    let companion = DMatrix::from_fn(d, d, |i, j| {
        if i == 0 {
            -f[d - 1 - j].to_f64().unwrap() / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    companion
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect()
}

#[derive(Clone, Debug)]
struct Gauss {
    re: BigInt,
    im: BigInt,
}

impl Gauss {
    fn mul(&self, o: &Gauss) -> Gauss {
        Gauss {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn norm2(&self) -> BigInt {
        &self.re * &self.re + &self.im * &self.im
    }
}

/// Angle of a Gaussian integer, robust to huge magnitudes.
fn angle(z: &Gauss) -> f64 {
    let bits = z.re.bits().max(z.im.bits());
    let shift = bits.saturating_sub(60);
    let re = (&z.re >> shift).to_f64().unwrap();
    let im = (&z.im >> shift).to_f64().unwrap();
    im.atan2(re)
}

/// Number of roots of `f` strictly inside `|z| = r`, if the sampled argument
/// principle is decisive at some grid size up to `MAX_GRID`.
pub fn roots_inside_circle(f: &[BigInt], r: &BigRational) -> Option<usize> {
    let deg = f.len() - 1;
    // |f'(z)| <= L on the circle
    let lipschitz: BigRational = f
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| BigRational::from_integer(c.abs() * BigInt::from(k)) * num_traits::pow(r.clone(), k - 1))
        .fold(BigRational::zero(), |a, b| a + b);
    let (rn, rd) = (r.numer().clone(), r.denom().clone());

    let mut n = 16i64;
    while n <= MAX_GRID {
        // t = j/n on [−1, 1]; z(t) = r((1 − t²) + 2ti)/(1 + t²); left half is −z(t).
        // Scaled: z = (rn·(n² − j²) + rn·2jn·i) / (rd·(n² + j²)).
        let nn = BigInt::from(n);
        let step_bound = {
            // L · (2r/n), squared
            let b = &lipschitz * r * BigRational::from_integer(2.into()) / BigRational::from_integer(nn.clone());
            &b * &b
        };
        let mut values: Vec<Gauss> = Vec::with_capacity((4 * n + 2) as usize);
        let mut decisive = true;
        'halves: for sign in [1i64, -1] {
            for j in -n..=n {
                let jj = BigInt::from(j);
                let num = Gauss {
                    re: BigInt::from(sign) * &rn * (&nn * &nn - &jj * &jj),
                    im: BigInt::from(sign) * &rn * BigInt::from(2) * &jj * &nn,
                };
                let den = &rd * (&nn * &nn + &jj * &jj);
                // F = f(z)·den^deg
                let mut pows = Vec::with_capacity(deg + 1);
                let mut den_pow = BigInt::one();
                for _ in 0..=deg {
                    pows.push(den_pow.clone());
                    den_pow *= &den;
                }
                let acc = horner_scaled(f, &num, &pows);
                let lhs = BigRational::new(acc.norm2(), &pows[deg] * &pows[deg]);
                if lhs <= step_bound {
                    decisive = false;
                    break 'halves;
                }
                values.push(acc);
            }
        }
        if decisive {
            let mut total = 0.0;
            for w in values.windows(2) {
                let conj = Gauss { re: w[0].re.clone(), im: -w[0].im.clone() };
                total += angle(&w[1].mul(&conj));
            }
            let last = values.last().unwrap();
            let conj = Gauss { re: last.re.clone(), im: -last.im.clone() };
            total += angle(&values[0].mul(&conj));
            let turns = total / std::f64::consts::TAU;
            let rounded = turns.round();
            if (turns - rounded).abs() < 0.25 && rounded >= 0.0 {
                return Some(rounded as usize);
            }
            return None;
        }
        n *= 2;
    }
    None
}

/// `Σ c_k num^k den^(deg−k)` given `pows[i] = den^i`.
fn horner_scaled(f: &[BigInt], num: &Gauss, pows: &[BigInt]) -> Gauss {
    let deg = f.len() - 1;
    let mut acc = Gauss { re: BigInt::zero(), im: BigInt::zero() };
    let mut num_pow = Gauss { re: BigInt::one(), im: BigInt::zero() };
    for (k, c) in f.iter().enumerate() {
        let scale = c * &pows[deg - k];
        acc.re += &scale * &num_pow.re;
        acc.im += &scale * &num_pow.im;
        num_pow = num_pow.mul(num);
    }
    acc
}

/// Tries to certify a Perron power of `ρ` for one power `p`.
fn certify_power(m: &CountMatrix, rho: &RhoInterval, p: u32) -> Option<(IntPoly, RhoInterval, f64, Vec<f64>)> {
    let dominant = rho.pow(p);
    let cp = char_poly(&m.pow(p));
    let f = factor(&cp).into_iter().map(|(f, _)| f).find(|f| {
        if dominant.is_exact() {
            super::poly::eval_int(f, &dominant.hi).is_zero()
        } else {
            Sturm::new(f).count(&dominant.lo, &dominant.hi) >= 1
        }
    })?;
    if !f.last().unwrap().is_one() {
        return None;
    }
    if dominant.lo <= BigRational::one() {
        return None;
    }
    if f.len() == 2 {
        return Some((f, dominant, 0.0, Vec::new()));
    }
    if !dominant.is_exact() && Sturm::new(&f).count(&dominant.lo, &dominant.hi) != 1 {
        return None;
    }
    let lo = dominant.lo_f64();
    let mut roots = numeric_roots(&f);
    let nearest = roots
        .iter()
        .enumerate()
        .min_by(|a, b| {
            let da = (a.1 .0 - lo).hypot(a.1 .1);
            let db = (b.1 .0 - lo).hypot(b.1 .1);
            da.partial_cmp(&db).unwrap()
        })
        .map(|(i, _)| i)?;
    roots.remove(nearest);
    let moduli: Vec<f64> = roots.iter().map(|(re, im)| re.hypot(*im)).collect();
    let max_other = moduli.iter().cloned().fold(0.0, f64::max);
    if max_other >= lo * (1.0 - 1e-9) {
        return None;
    }
    let r = BigRational::from_float((max_other + lo) / 2.0)?;
    if r >= dominant.lo {
        return None;
    }
    let inside = roots_inside_circle(&f, &r)?;
    if inside != f.len() - 2 {
        return None;
    }
    let gaps = moduli.iter().map(|mm| lo - mm).collect();
    Some((f, dominant, r.to_f64().unwrap(), gaps))
}

pub fn perron_certificate(sub: &StronglyConnectedSubdigraph) -> Result<PerronCertificate, SpectralError> {
    let m = &sub.matrix;
    let radius = radius_of_matrix(m);
    if radius.rho.hi <= BigRational::one() {
        return Err(SpectralError::RadiusNotAboveOne);
    }
    let h = period(m);
    let (eigvec, residual) = perron_vector(m, radius.rho.mid_f64());
    let positive = eigvec.iter().all(|&x| x > 0.0);
    for p in 1..=h.min(MAX_POWER) {
        if let Some((poly, dominant, r, gaps)) = certify_power(m, &radius.rho, p) {
            return Ok(PerronCertificate {
                p,
                poly,
                dominant,
                radius: r,
                root_gaps: gaps,
                ok: positive && residual <= EIGVEC_RESIDUAL,
                eigvec,
                residual,
                period: h,
            });
        }
    }
    Ok(PerronCertificate {
        p: 0,
        poly: Vec::new(),
        dominant: radius.rho.clone(),
        radius: 0.0,
        root_gaps: Vec::new(),
        eigvec,
        residual,
        period: h,
        ok: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::spectral::matrix::strongly_connected_subdigraph;

    fn ints(v: &[i64]) -> IntPoly {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn second_figure_needs_the_square() {
        let a = corpus::fig1b();
        let c = perron_certificate(&strongly_connected_subdigraph(&a, a.find_state("B").unwrap())).unwrap();
        assert!(c.ok);
        assert_eq!(c.p, 2);
        assert_eq!(c.poly, ints(&[-2, 1]));
        assert_eq!(c.dominant_integer(), Some(BigInt::from(2)));
        assert_eq!(c.period, 2);
        assert!(c.eigvec.iter().all(|&x| x > 0.0));
        assert!(c.residual <= EIGVEC_RESIDUAL);
    }

    #[test]
    fn fibonacci_is_perron_directly() {
        let a = corpus::fib();
        let c = perron_certificate(&strongly_connected_subdigraph(&a, a.find_state("u").unwrap())).unwrap();
        assert!(c.ok);
        assert_eq!(c.p, 1);
        assert_eq!(c.poly, ints(&[-1, -1, 1]));
        assert_eq!(c.root_gaps.len(), 1);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((c.root_gaps[0] - (phi - (phi - 1.0))).abs() < 1e-9);
    }

    #[test]
    fn simple_cycle_is_rejected() {
        let m = CountMatrix::from_rows(&[&[0, 1], &[1, 0]]);
        let sub = StronglyConnectedSubdigraph { anchor: 0, members: vec![0, 1], matrix: m };
        assert_eq!(perron_certificate(&sub).unwrap_err(), SpectralError::RadiusNotAboveOne);
    }

    #[test]
    fn periods() {
        assert_eq!(period(&CountMatrix::from_rows(&[&[0, 1, 0], &[1, 0, 1], &[0, 1, 0]])), 2);
        assert_eq!(period(&CountMatrix::from_rows(&[&[1, 1], &[1, 0]])), 1);
        assert_eq!(period(&CountMatrix::from_rows(&[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]])), 3);
    }

    #[test]
    fn circle_root_counts() {
        // roots 1/2, −3, 2 ± i (modulus √5)
        let p = crate::spectral::poly::multiply(
            &crate::spectral::poly::multiply(&ints(&[-1, 2]), &ints(&[3, 1])),
            &ints(&[5, -4, 1]),
        );
        assert_eq!(roots_inside_circle(&p, &rat(1, 1)), Some(1));
        assert_eq!(roots_inside_circle(&p, &rat(5, 2)), Some(3));
        assert_eq!(roots_inside_circle(&p, &rat(4, 1)), Some(4));
        assert_eq!(roots_inside_circle(&p, &rat(1, 10)), Some(0));
    }

    #[test]
    fn period_three_matrix_with_chord() {
        // cycle of length 3 plus a chord making a 2-cycle: aperiodic
        let m = CountMatrix::from_rows(&[&[0, 1, 0], &[1, 0, 1], &[1, 0, 0]]);
        let sub = StronglyConnectedSubdigraph { anchor: 0, members: vec![0, 1, 2], matrix: m };
        let c = perron_certificate(&sub).unwrap();
        assert!(c.ok, "{c:?}");
        assert_eq!(c.p, 1);
    }
}
