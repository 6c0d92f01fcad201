//! Integer and rational polynomials: characteristic polynomials, Sturm
//! sequences and factorization over ℤ.
//!
//! Coefficients are stored lowest degree first.

use algebraics::polynomial::Polynomial;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::matrix::CountMatrix;

pub type IntPoly = Vec<BigInt>;
pub type RatPoly = Vec<BigRational>;

fn trim<T: Zero>(mut p: Vec<T>) -> Vec<T> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

/// Characteristic polynomial `det(xI − A)` by the Faddeev–LeVerrier
/// recurrence; every division in it is exact over ℤ.
pub fn char_poly(mtx: &CountMatrix) -> IntPoly {
    let a = mtx.to_bigint();
    let n = a.len();
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[n] = BigInt::one();
    // M_0 = 0, M_k = A·M_{k−1} + c_{n−k+1}·I, c_{n−k} = −tr(A·M_k)/k
    let mut m = vec![vec![BigInt::zero(); n]; n];
    for k in 1..=n {
        let mut am = matmul(&a, &m);
        for (i, row) in am.iter_mut().enumerate() {
            row[i] += &coeffs[n - k + 1];
        }
        m = am;
        let am = matmul(&a, &m);
        let trace: BigInt = (0..n).map(|i| am[i][i].clone()).sum();
        let (q, r) = (-trace).div_rem(&BigInt::from(k));
        debug_assert!(r.is_zero());
        coeffs[n - k] = q;
    }
    coeffs
}

fn matmul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    let mut c = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b[k][j].is_zero() {
                    c[i][j] += &a[i][k] * &b[k][j];
                }
            }
        }
    }
    c
}

pub fn to_rat(p: &[BigInt]) -> RatPoly {
    p.iter().map(|c| BigRational::from_integer(c.clone())).collect()
}

pub fn eval_int(p: &[BigInt], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + BigRational::from_integer(c.clone());
    }
    acc
}

pub fn eval_rat(p: &[BigRational], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

pub fn eval_f64(p: &[BigInt], x: f64) -> f64 {
    p.iter()
        .rev()
        .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
}

pub fn int_derivative(p: &[BigInt]) -> IntPoly {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect()
}

fn rat_derivative(p: &[BigRational]) -> RatPoly {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
        .collect()
}

/// Remainder of `a` divided by nonzero `b`.
pub fn rem(a: &[BigRational], b: &[BigRational]) -> RatPoly {
    let b = trim(b.to_vec());
    let db = b.len() - 1;
    let lead = b[db].clone();
    let mut r = trim(a.to_vec());
    while r.len() > db && !r.is_empty() {
        let shift = r.len() - 1 - db;
        let q = r.last().unwrap() / &lead;
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= &q * c;
        }
        r.pop();
        r = trim(r);
    }
    r
}

fn quotient(a: &[BigRational], b: &[BigRational]) -> RatPoly {
    let b = trim(b.to_vec());
    let db = b.len() - 1;
    let lead = b[db].clone();
    let mut r = trim(a.to_vec());
    if r.len() <= db {
        return Vec::new();
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    while r.len() > db && !r.is_empty() {
        let shift = r.len() - 1 - db;
        let c = r.last().unwrap() / &lead;
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] -= &c * bc;
        }
        q[shift] = c;
        r.pop();
        r = trim(r);
    }
    q
}

pub fn gcd(a: &[BigRational], b: &[BigRational]) -> RatPoly {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = rem(&a, &b);
        a = b;
        b = r;
    }
    let lead = a.last().cloned().unwrap_or_else(BigRational::one);
    a.into_iter().map(|c| c / &lead).collect()
}

/// `p / gcd(p, p')`: same distinct roots, all simple.
pub fn squarefree(p: &[BigRational]) -> RatPoly {
    let g = gcd(p, &rat_derivative(p));
    if g.len() <= 1 {
        return trim(p.to_vec());
    }
    quotient(p, &g)
}

/// Scales to integer coefficients with positive content 1; the sign of every
/// value is preserved.
fn primitive(p: RatPoly) -> RatPoly {
    if p.is_empty() {
        return p;
    }
    let l = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p.iter().map(|c| (c * BigRational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    ints.into_iter()
        .map(|c| BigRational::from_integer(c / &g))
        .collect()
}

/// Sturm sequence of the squarefree part of a polynomial.
#[derive(Clone, Debug)]
pub struct Sturm {
    seq: Vec<RatPoly>,
}

impl Sturm {
    pub fn new(p: &[BigInt]) -> Self {
        Self::from_rat(&to_rat(p))
    }

    pub fn from_rat(p: &[BigRational]) -> Self {
        let p0 = primitive(squarefree(p));
        let mut seq = vec![p0.clone()];
        if p0.len() > 1 {
            let mut prev = p0.clone();
            let mut cur = primitive(rat_derivative(&p0));
            while !cur.is_empty() {
                let r: RatPoly = rem(&prev, &cur).into_iter().map(|c| -c).collect();
                seq.push(cur.clone());
                prev = cur;
                cur = primitive(r);
            }
        }
        Sturm { seq }
    }

    fn variations(&self, x: &BigRational) -> usize {
        let signs: Vec<i8> = self
            .seq
            .iter()
            .map(|q| {
                let v = eval_rat(q, x);
                if v.is_positive() {
                    1
                } else if v.is_negative() {
                    -1
                } else {
                    0
                }
            })
            .filter(|&s| s != 0)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Number of distinct real roots in `(a, b]`, for `a < b`.
    pub fn count(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }
}

/// Irreducible factors over ℤ with multiplicities, each with positive
/// leading coefficient.
pub fn factor(p: &[BigInt]) -> Vec<(IntPoly, usize)> {
    let poly: Polynomial<BigInt> = p.to_vec().into();
    poly.factor()
        .polynomial_factors
        .into_iter()
        .map(|f| {
            let mut c: IntPoly = f.polynomial.into_coefficients();
            if c.last().is_some_and(|l| l.is_negative()) {
                c = c.into_iter().map(|x| -x).collect();
            }
            (c, f.power)
        })
        .collect()
}

pub fn multiply(a: &[BigInt], b: &[BigInt]) -> IntPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut c = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    c
}

/// Human-readable form such as `x^3 - 2x`.
pub fn format_poly(p: &[BigInt]) -> String {
    let mut out = String::new();
    for (i, c) in p.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        let coeff = if mag.is_one() && i > 0 { String::new() } else { mag.to_string() };
        out.push_str(&coeff);
        match i {
            0 => {}
            1 => out.push('x'),
            _ => out.push_str(&format!("x^{i}")),
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> IntPoly {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// `det(xI − A)` by expansion over all permutations.
    fn det_poly(a: &[Vec<i64>]) -> IntPoly {
        let n = a.len();
        let entry = |i: usize, j: usize| -> IntPoly {
            if i == j {
                ints(&[-a[i][j], 1])
            } else {
                ints(&[-a[i][j]])
            }
        };
        let mut total = IntPoly::new();
        let mut perm: Vec<usize> = (0..n).collect();
        permutations(&mut perm, 0, &mut |p| {
            let inversions = (0..p.len())
                .flat_map(|i| (i + 1..p.len()).map(move |j| (i, j)))
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            let mut term = ints(&[if inversions % 2 == 0 { 1 } else { -1 }]);
            for (i, &pi) in p.iter().enumerate() {
                term = multiply(&term, &entry(i, pi));
            }
            total = add(&total, &term);
        });
        total
    }

    fn permutations(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if k == p.len() {
            f(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permutations(p, k + 1, f);
            p.swap(k, i);
        }
    }

    fn add(a: &[BigInt], b: &[BigInt]) -> IntPoly {
        let n = a.len().max(b.len());
        trim(
            (0..n)
                .map(|i| a.get(i).cloned().unwrap_or_default() + b.get(i).cloned().unwrap_or_default())
                .collect(),
        )
    }

    #[test]
    fn characteristic_polynomial_examples() {
        assert_eq!(char_poly(&CountMatrix::from_rows(&[&[1, 1], &[1, 0]])), ints(&[-1, -1, 1]));
        assert_eq!(
            char_poly(&CountMatrix::from_rows(&[&[0, 1, 0], &[1, 0, 1], &[0, 1, 0]])),
            ints(&[0, -2, 0, 1])
        );
        assert_eq!(char_poly(&CountMatrix::from_rows(&[&[0]])), ints(&[0, 1]));
    }

    proptest! {
        #[test]
        fn char_poly_matches_determinant_expansion(
            n in 1usize..=4,
            entries in proptest::collection::vec(0u64..3, 16),
        ) {
            let rows: Vec<Vec<u64>> = (0..n).map(|i| entries[i * 4..i * 4 + n].to_vec()).collect();
            let refs: Vec<&[u64]> = rows.iter().map(|r| r.as_slice()).collect();
            let m = CountMatrix::from_rows(&refs);
            let signed: Vec<Vec<i64>> = rows.iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect();
            prop_assert_eq!(char_poly(&m), det_poly(&signed));
        }

        #[test]
        fn factors_multiply_back(roots in proptest::collection::vec(-4i64..5, 1..5), extra in 0i64..3) {
            // (x^2 + extra) · Π (x − r)
            let mut p = ints(&[extra, 0, 1]);
            for &root in &roots {
                p = multiply(&p, &ints(&[-root, 1]));
            }
            let mut back = ints(&[1]);
            for (f, k) in factor(&p) {
                for _ in 0..k {
                    back = multiply(&back, &f);
                }
            }
            prop_assert_eq!(back, p);
        }
    }

    #[test]
    fn sturm_counts_roots() {
        // (x − 1)^2 (x − 3)(x + 2)
        let p = multiply(&multiply(&ints(&[1, -2, 1]), &ints(&[-3, 1])), &ints(&[2, 1]));
        let s = Sturm::new(&p);
        assert_eq!(s.count(&r(-10, 1), &r(10, 1)), 3);
        assert_eq!(s.count(&r(0, 1), &r(1, 1)), 1);
        assert_eq!(s.count(&r(1, 1), &r(3, 1)), 1);
        assert_eq!(s.count(&r(3, 2), &r(5, 2)), 0);
        let s = Sturm::new(&ints(&[-2, 0, 1]));
        assert_eq!(s.count(&r(1, 1), &r(3, 2)), 1);
        assert_eq!(s.count(&r(-3, 2), &r(1, 1)), 1);
    }

    #[test]
    fn factorization_of_second_figure_polynomials() {
        let f = factor(&ints(&[0, -2, 0, 1]));
        assert!(f.contains(&(ints(&[0, 1]), 1)));
        assert!(f.contains(&(ints(&[-2, 0, 1]), 1)));
        let f = factor(&ints(&[0, 4, -4, 1]));
        assert!(f.contains(&(ints(&[-2, 1]), 2)));
    }

    #[test]
    fn formatting() {
        assert_eq!(format_poly(&ints(&[0, -2, 0, 1])), "x^3 - 2x");
        assert_eq!(format_poly(&ints(&[-1, -1, 1])), "x^2 - x - 1");
        assert_eq!(format_poly(&ints(&[-2, 1])), "x - 2");
        assert_eq!(format_poly(&ints(&[])), "0");
    }

    #[test]
    fn rational_helpers() {
        let p = to_rat(&ints(&[-1, -1, 1]));
        assert_eq!(eval_rat(&p, &r(2, 1)), r(1, 1));
        assert_eq!(eval_int(&ints(&[-1, -1, 1]), &r(1, 2)), r(-5, 4));
        assert_eq!(squarefree(&to_rat(&ints(&[1, -2, 1]))), to_rat(&ints(&[-1, 1])));
        assert_eq!(int_derivative(&ints(&[5, 3, 1])), ints(&[3, 2]));
        assert!((eval_f64(&ints(&[-2, 0, 1]), 2f64.sqrt())).abs() < 1e-12);
    }
}
