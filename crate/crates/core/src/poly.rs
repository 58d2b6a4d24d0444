//! Characteristic polynomials of integer recurrences.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::ball::{CApprox, CBall, Dyadic};

/// Monic integer polynomial, coefficients stored lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharPoly {
    coeffs: Vec<BigInt>,
}

impl CharPoly {
    /// `t^k - A_1 t^{k-1} - ... - A_k` for the recurrence `b_n = sum A_i b_{n-i}`.
    pub fn from_recurrence(coefficients: &[BigInt]) -> Self {
        let k = coefficients.len();
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = BigInt::one();
        for (i, a) in coefficients.iter().enumerate() {
            coeffs[k - 1 - i] = -a;
        }
        CharPoly { coeffs }
    }

    /// Builds a polynomial from ascending coefficients; returns `None` unless
    /// it is monic of degree at least one.
    pub fn from_coeffs(coeffs: Vec<BigInt>) -> Option<Self> {
        if coeffs.len() < 2 || !coeffs.last()?.is_one() {
            return None;
        }
        Some(CharPoly { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_t_minus_one_squared(&self) -> bool {
        self.coeffs == [BigInt::one(), BigInt::from(-2), BigInt::one()]
    }

    /// Monic gcd with the derivative, over the rationals.
    pub fn gcd_with_derivative(&self) -> Vec<BigRational> {
        let p = to_rational(&self.coeffs);
        let dp = derivative(&p);
        poly_gcd(p, dp)
    }

    pub fn is_square_free(&self) -> bool {
        self.gcd_with_derivative().len() <= 1
    }

    /// Monic gcd with the reversed polynomial `t^k p(1/t)`. Nonconstant whenever
    /// `p` has a root on the unit circle (or a pair `z`, `1/z`).
    pub fn gcd_with_reciprocal(&self) -> Vec<BigRational> {
        let p = to_rational(&self.coeffs);
        let mut rev = p.clone();
        rev.reverse();
        poly_gcd(p, trim(rev))
    }

    pub fn eval_ball(&self, z: &CBall, prec: u64) -> CBall {
        let mut acc = CBall::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(z, prec).add(&CBall::from_int(c), prec);
        }
        acc
    }

    pub fn eval_approx(&self, z: &CApprox, prec: u64) -> CApprox {
        let mut acc = CApprox::new(Dyadic::zero(), Dyadic::zero());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(z, prec).add(&CApprox::new(c.into(), Dyadic::zero()), prec);
        }
        acc
    }

    /// Cauchy bound: every root has modulus below `1 + max |c_i|`.
    pub fn cauchy_bound(&self) -> BigInt {
        let m = self.coeffs[..self.degree()]
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_default();
        m + 1
    }
}

impl fmt::Display for CharPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_coeff = !mag.is_one() || i == 0;
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "t")?,
                _ => write!(f, "t^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn to_rational(c: &[BigInt]) -> Vec<BigRational> {
    c.iter().cloned().map(BigRational::from_integer).collect()
}

fn trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn derivative(p: &[BigRational]) -> Vec<BigRational> {
    trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
            .collect(),
    )
}

fn poly_rem(mut a: Vec<BigRational>, b: &[BigRational]) -> Vec<BigRational> {
    let db = b.len() - 1;
    let lead = b[db].clone();
    while a.len() > db {
        let shift = a.len() - 1 - db;
        let q = a.last().unwrap() / &lead;
        for (i, bc) in b.iter().enumerate() {
            a[i + shift] = &a[i + shift] - &q * bc;
        }
        a.pop();
        a = trim(a);
    }
    a
}

/// Monic gcd over Q; the empty vector stands for the zero polynomial.
fn poly_gcd(a: Vec<BigRational>, b: Vec<BigRational>) -> Vec<BigRational> {
    let (mut a, mut b) = (trim(a), trim(b));
    while !b.is_empty() {
        let r = poly_rem(a, &b);
        a = b;
        b = r;
    }
    if let Some(lead) = a.last().cloned() {
        for c in a.iter_mut() {
            *c = &*c / &lead;
        }
    }
    a
}

/// Integer content-free form of a monic rational polynomial (for reporting).
pub fn primitive_part(p: &[BigRational]) -> Vec<BigInt> {
    let l = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p.iter().map(|c| (c * &l).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if g.is_zero() {
        ints
    } else {
        ints.into_iter().map(|c| c / &g).collect()
    }
}
