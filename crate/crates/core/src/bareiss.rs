//! Fraction-free (Bareiss) elimination over the integers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Square integer matrix in row-major order.
pub type Matrix = Vec<Vec<BigInt>>;

/// Determinant by Bareiss elimination with row pivoting. Every intermediate
/// division is exact, so entries stay bounded by minors of the input.
pub fn determinant(m: &Matrix) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.clone();
    let mut sign = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = !sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign {
        -d
    } else {
        d
    }
}

/// Solves `m x = rhs` exactly. Returns `None` when `m` is singular.
///
/// Forward elimination is fraction-free on the augmented matrix; only the
/// final back-substitution touches rationals.
pub fn solve(m: &Matrix, rhs: &[BigInt]) -> Option<Vec<BigRational>> {
    let n = m.len();
    assert_eq!(rhs.len(), n);
    let mut a: Matrix = m
        .iter()
        .zip(rhs)
        .map(|(row, r)| {
            let mut row = row.clone();
            row.push(r.clone());
            row
        })
        .collect();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let i = (k + 1..n).find(|&i| !a[i][k].is_zero())?;
            a.swap(k, i);
        }
        for i in k + 1..n {
            for j in k + 1..=n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let mut x = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        let mut s = BigRational::from_integer(a[i][n].clone());
        for j in i + 1..n {
            s -= BigRational::from_integer(a[i][j].clone()) * &x[j];
        }
        x[i] = s / BigRational::from_integer(a[i][i].clone());
    }
    Some(x)
}
