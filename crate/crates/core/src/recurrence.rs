//! Constant-coefficient integer linear recurrences: exact evaluation and
//! minimal-order fitting from a sequence prefix.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::bareiss;
use crate::poly::CharPoly;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecurrenceError {
    #[error("recurrence needs at least one coefficient")]
    Empty,
    #[error("{coefficients} coefficients but {initial} initial terms")]
    LengthMismatch { coefficients: usize, initial: usize },
    #[error("last coefficient A_k must be nonzero")]
    ZeroTrailingCoefficient,
    #[error("prefix of {have} terms is too short to search orders up to {max_order} (need {need})")]
    InsufficientPrefix { have: usize, need: usize, max_order: usize },
    #[error("no integer recurrence of order <= {max_order} fits the {len} given terms")]
    NotFound { max_order: usize, len: usize },
}

/// `b_n = A_1 b_{n-1} + ... + A_k b_{n-k}` with initial terms `b_0 .. b_{k-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearRecurrence {
    coefficients: Vec<BigInt>,
    initial: Vec<BigInt>,
}

impl LinearRecurrence {
    pub fn new(coefficients: Vec<BigInt>, initial: Vec<BigInt>) -> Result<Self, RecurrenceError> {
        if coefficients.is_empty() {
            return Err(RecurrenceError::Empty);
        }
        if coefficients.len() != initial.len() {
            return Err(RecurrenceError::LengthMismatch {
                coefficients: coefficients.len(),
                initial: initial.len(),
            });
        }
        if coefficients.last().is_some_and(|a| a.is_zero()) {
            return Err(RecurrenceError::ZeroTrailingCoefficient);
        }
        Ok(LinearRecurrence { coefficients, initial })
    }

    /// Convenience constructor from machine integers.
    pub fn from_i64(coefficients: &[i64], initial: &[i64]) -> Result<Self, RecurrenceError> {
        LinearRecurrence::new(
            coefficients.iter().map(|&a| a.into()).collect(),
            initial.iter().map(|&a| a.into()).collect(),
        )
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coefficients
    }

    pub fn initial_terms(&self) -> &[BigInt] {
        &self.initial
    }

    pub fn char_poly(&self) -> CharPoly {
        CharPoly::from_recurrence(&self.coefficients)
    }

    /// Next term given the last `k` terms (oldest first).
    pub fn step(&self, window: &[BigInt]) -> BigInt {
        let k = self.order();
        debug_assert_eq!(window.len(), k);
        let mut acc = BigInt::zero();
        for (i, a) in self.coefficients.iter().enumerate() {
            if !a.is_zero() {
                acc += a * &window[k - 1 - i];
            }
        }
        acc
    }

    /// Unbounded stream `b_0, b_1, ...`.
    pub fn terms(&self) -> Terms<'_> {
        Terms {
            rec: self,
            window: self.initial.clone(),
            n: 0,
        }
    }
}

pub struct Terms<'a> {
    rec: &'a LinearRecurrence,
    window: Vec<BigInt>,
    n: usize,
}

impl Iterator for Terms<'_> {
    type Item = BigInt;

    fn next(&mut self) -> Option<BigInt> {
        let k = self.rec.order();
        let out = if self.n < k {
            self.window[self.n].clone()
        } else {
            let next = self.rec.step(&self.window);
            self.window.remove(0);
            self.window.push(next.clone());
            next
        };
        self.n += 1;
        Some(out)
    }
}

/// `b_0 .. b_{count-1}` by exact iteration.
pub fn eval_recurrence(rec: &LinearRecurrence, count: usize) -> Vec<BigInt> {
    let k = rec.order();
    let mut out: Vec<BigInt> = rec.initial.iter().take(count).cloned().collect();
    while out.len() < count {
        let n = out.len();
        let next = rec.step(&out[n - k..]);
        out.push(next);
    }
    out
}

impl fmt::Display for LinearRecurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d: Vec<String> = self.initial.iter().map(|t| t.to_string()).collect();
        let a: Vec<String> = self.coefficients.iter().map(|t| t.to_string()).collect();
        write!(f, "[[{}], [{}]]", d.join(", "), a.join(", "))
    }
}

// Pair-of-lists form `[[d_1, ..., d_k], [A_1, ..., A_k]]`.
impl Serialize for LinearRecurrence {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let d: Vec<serde_json::Number> = self.initial.iter().map(crate::serde_big::to_number).collect();
        let a: Vec<serde_json::Number> = self.coefficients.iter().map(crate::serde_big::to_number).collect();
        (d, a).serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearRecurrence {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (init, coeffs) = <(Vec<serde_json::Number>, Vec<serde_json::Number>)>::deserialize(d)?;
        let conv = |v: Vec<serde_json::Number>| {
            v.iter()
                .map(crate::serde_big::from_number)
                .collect::<Result<Vec<_>, _>>()
                .map_err(D::Error::custom)
        };
        LinearRecurrence::new(conv(coeffs)?, conv(init)?).map_err(D::Error::custom)
    }
}

/// Outcome of solving for a recurrence of one fixed order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderFit {
    /// The `k x k` system from the first `2k` terms is singular.
    Singular,
    /// Unique solution, but not all coefficients are integers.
    NonIntegral(Vec<BigRational>),
    /// Unique integer solution with `A_k = 0`, so the order is not minimal.
    ZeroTrailing,
    /// Unique integer solution that fails at term `at`.
    Mismatch { rec: LinearRecurrence, at: usize },
    /// Unique integer solution valid on the whole prefix.
    Fits(LinearRecurrence),
}

fn solve_order(terms: &[BigInt], k: usize) -> Option<Vec<BigRational>> {
    let m: bareiss::Matrix = (0..k)
        .map(|i| (1..=k).map(|j| terms[k + i - j].clone()).collect())
        .collect();
    let rhs: Vec<BigInt> = (0..k).map(|i| terms[k + i].clone()).collect();
    bareiss::solve(&m, &rhs)
}

/// Solves for order `k` from `terms[0 .. 2k]` and checks the result against
/// every later term. Requires `terms.len() >= 2k`.
pub fn fit_order(terms: &[BigInt], k: usize) -> OrderFit {
    assert!(k >= 1 && terms.len() >= 2 * k, "fit_order needs 2k terms");
    let Some(sol) = solve_order(terms, k) else {
        return OrderFit::Singular;
    };
    if sol.iter().any(|c| !c.is_integer()) {
        return OrderFit::NonIntegral(sol);
    }
    let coefficients: Vec<BigInt> = sol.into_iter().map(|c| c.to_integer()).collect();
    let rec = match LinearRecurrence::new(coefficients, terms[..k].to_vec()) {
        Ok(rec) => rec,
        Err(_) => return OrderFit::ZeroTrailing,
    };
    for n in 2 * k..terms.len() {
        if rec.step(&terms[n - k..n]) != terms[n] {
            return OrderFit::Mismatch { rec, at: n };
        }
    }
    OrderFit::Fits(rec)
}

/// Largest order the prefix can support with at least one term left over to
/// check the solution against.
fn supported_order(len: usize) -> usize {
    len.saturating_sub(1) / 2
}

/// Minimal-order integer recurrence fitting every term of `terms`.
///
/// Orders are tried upward; the first `k` with a unique integral solution that
/// reproduces the whole prefix wins. A prefix too short to test every order up
/// to `max_order` yields `InsufficientPrefix` unless a smaller order already fits.
pub fn guess_recurrence(terms: &[BigInt], max_order: usize) -> Result<LinearRecurrence, RecurrenceError> {
    let top = max_order.min(supported_order(terms.len()));
    for k in 1..=top {
        if let OrderFit::Fits(rec) = fit_order(terms, k) {
            return Ok(rec);
        }
    }
    if top < max_order {
        return Err(RecurrenceError::InsufficientPrefix {
            have: terms.len(),
            need: 2 * max_order + 1,
            max_order,
        });
    }
    Err(RecurrenceError::NotFound {
        max_order,
        len: terms.len(),
    })
}

/// Like [`guess_recurrence`] but also accepts non-integral rational
/// coefficients. Returns the coefficients `A_1 .. A_k`.
pub fn guess_rational_recurrence(terms: &[BigInt], max_order: usize) -> Option<Vec<BigRational>> {
    let top = max_order.min(supported_order(terms.len()));
    for k in 1..=top {
        let Some(sol) = solve_order(terms, k) else {
            continue;
        };
        if sol.last().is_some_and(|a| a.is_zero()) {
            continue;
        }
        let ok = (2 * k..terms.len()).all(|n| {
            let mut acc = BigRational::zero();
            for (i, a) in sol.iter().enumerate() {
                acc += a * BigRational::from_integer(terms[n - 1 - i].clone());
            }
            acc == BigRational::from_integer(terms[n].clone())
        });
        if ok {
            return Some(sol);
        }
    }
    None
}
