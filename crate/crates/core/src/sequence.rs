//! Exact generation of Pisot sequences `E_r(x, y)` and their order-`s`
//! Hankel generalization.
//!
//! All arithmetic is on arbitrary-precision integers. The rounding offset `r`
//! is an exact rational `p/q`, and `floor(u/v + p/q)` is evaluated as
//! `floor((q*u + p*v) / (q*v))`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::bareiss;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SequenceError {
    #[error("initial terms must satisfy 0 < x < y (got x = {x}, y = {y})")]
    NotIncreasing { x: BigInt, y: BigInt },
    #[error("initial terms must be positive")]
    NonPositiveInitial,
    #[error("order-{s} sequences need exactly {} initial terms, got {got}", 2 * s)]
    WrongInitialCount { s: usize, got: usize },
    #[error("rounding offset must lie in [0, 1], got {0}")]
    OffsetOutOfRange(String),
    #[error("cannot parse rounding offset {0:?}; expected p/q")]
    BadOffset(String),
    #[error("requested {count} terms but the sequence is defined by {needed} initial terms")]
    CountTooSmall { count: usize, needed: usize },
    #[error("Hankel pivot vanished while computing term {at}")]
    PivotVanished { at: usize },
    #[error("window must hold {expected} terms, got {got}")]
    BadWindow { expected: usize, got: usize },
    #[error("malformed b-file line {line}: {text:?}")]
    BadBfile { line: usize, text: String },
}

/// The rounding offset `r = p/q` with `0 <= r <= 1`, kept in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Offset(Ratio<u64>);

impl Offset {
    pub fn new(p: u64, q: u64) -> Result<Self, SequenceError> {
        if q == 0 {
            return Err(SequenceError::BadOffset(format!("{p}/{q}")));
        }
        if p > q {
            return Err(SequenceError::OffsetOutOfRange(format!("{p}/{q}")));
        }
        Ok(Offset(Ratio::new(p, q)))
    }

    pub fn half() -> Self {
        Offset(Ratio::new(1, 2))
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn is_limiting(&self) -> bool {
        self.numer() == 0 || self.numer() == self.denom()
    }

    pub fn ratio(&self) -> Ratio<u64> {
        self.0
    }

    pub fn to_big(&self) -> num_rational::BigRational {
        num_rational::BigRational::new(self.numer().into(), self.denom().into())
    }
}

impl fmt::Display for Offset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for Offset {
    type Err = SequenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SequenceError::BadOffset(s.to_string());
        let (p, q) = match s.trim().split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s.trim(), "1"),
        };
        let p: u64 = p.parse().map_err(|_| bad())?;
        let q: u64 = q.parse().map_err(|_| bad())?;
        Offset::new(p, q)
    }
}

impl Serialize for Offset {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Offset {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parameters of `E_r(a_0, ..., a_{2s-1})`; for `s = 1` this is `E_r(x, y)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PisotParams {
    #[serde(with = "crate::serde_big")]
    pub x: BigInt,
    #[serde(with = "crate::serde_big")]
    pub y: BigInt,
    pub r: Offset,
    #[serde(default = "one_usize")]
    pub s: usize,
    #[serde(default, with = "crate::serde_big::vec", skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<BigInt>,
}

fn one_usize() -> usize {
    1
}

impl PisotParams {
    /// Classic `E_r(x, y)`.
    pub fn new(x: impl Into<BigInt>, y: impl Into<BigInt>, r: Offset) -> Result<Self, SequenceError> {
        let p = PisotParams {
            x: x.into(),
            y: y.into(),
            r,
            s: 1,
            extra: Vec::new(),
        };
        p.validate()?;
        Ok(p)
    }

    /// Order-`s` sequence from its `2s` initial terms.
    pub fn with_initial_terms(initial: Vec<BigInt>, r: Offset) -> Result<Self, SequenceError> {
        if initial.len() < 2 || !initial.len().is_multiple_of(2) {
            return Err(SequenceError::WrongInitialCount {
                s: (initial.len() / 2).max(1),
                got: initial.len(),
            });
        }
        let s = initial.len() / 2;
        let mut it = initial.into_iter();
        let x = it.next().unwrap();
        let y = it.next().unwrap();
        let p = PisotParams {
            x,
            y,
            r,
            s,
            extra: it.collect(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SequenceError> {
        if self.s == 0 || self.extra.len() != 2 * self.s - 2 {
            return Err(SequenceError::WrongInitialCount {
                s: self.s.max(1),
                got: 2 + self.extra.len(),
            });
        }
        if !self.x.is_positive() || !self.y.is_positive() || self.extra.iter().any(|t| !t.is_positive()) {
            return Err(SequenceError::NonPositiveInitial);
        }
        if self.s == 1 && self.x >= self.y {
            return Err(SequenceError::NotIncreasing {
                x: self.x.clone(),
                y: self.y.clone(),
            });
        }
        Ok(())
    }

    pub fn initial_terms(&self) -> Vec<BigInt> {
        let mut v = vec![self.x.clone(), self.y.clone()];
        v.extend(self.extra.iter().cloned());
        v
    }
}

impl fmt::Display for PisotParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self.initial_terms().iter().map(|t| t.to_string()).collect();
        write!(f, "E_{{{}}}({})", self.r, terms.join(","))
    }
}

/// Why a prefix is shorter than requested.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Truncation {
    /// The Hankel pivot `F_s` was zero, so term `at` is undefined.
    PivotVanished { at: usize },
    /// Term `at` came out non-positive.
    NonPositiveTerm { at: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequencePrefix {
    pub params: PisotParams,
    pub terms: Vec<BigInt>,
    pub truncated: Option<Truncation>,
}

impl SequencePrefix {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Fails if generation stopped at a vanishing pivot.
    pub fn require_complete(&self) -> Result<&Self, SequenceError> {
        match self.truncated {
            Some(Truncation::PivotVanished { at }) => Err(SequenceError::PivotVanished { at }),
            _ => Ok(self),
        }
    }

    /// OEIS b-file text: one `n a_n` line per term, `n` from 0.
    pub fn to_bfile(&self) -> String {
        to_bfile(&self.terms)
    }

    /// JSON array of decimal strings.
    pub fn to_json(&self) -> String {
        let v: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        serde_json::to_string(&v).expect("string array serializes")
    }
}

pub fn to_bfile(terms: &[BigInt]) -> String {
    let mut out = String::new();
    for (n, t) in terms.iter().enumerate() {
        out.push_str(&format!("{n} {t}\n"));
    }
    out
}

/// Parses b-file text. Comment (`#`) and blank lines are skipped; indices must
/// be consecutive, though they may start anywhere.
pub fn parse_bfile(text: &str) -> Result<Vec<BigInt>, SequenceError> {
    let mut terms = Vec::new();
    let mut expected: Option<BigInt> = None;
    for (i, line) in text.lines().enumerate() {
        let l = line.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let bad = || SequenceError::BadBfile {
            line: i + 1,
            text: line.to_string(),
        };
        let mut parts = l.split_whitespace();
        let n: BigInt = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let v: BigInt = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        if let Some(e) = &expected {
            if &n != e {
                return Err(bad());
            }
        }
        expected = Some(n + 1);
        terms.push(v);
    }
    Ok(terms)
}

/// `floor(a_prev1^2 / a_prev2 + r)`, exactly.
pub fn next_term(a_prev2: &BigInt, a_prev1: &BigInt, r: Offset) -> BigInt {
    debug_assert!(a_prev2.is_positive());
    let p = BigInt::from(r.numer());
    let q = BigInt::from(r.denom());
    let num = a_prev1 * a_prev1 * &q + a_prev2 * p;
    let den = a_prev2 * q;
    num.div_floor(&den)
}

/// The pivot `F_s` and numerator `G_s` for the window `a_n .. a_{n+2s-1}`:
/// the Hankel determinant with unknown corner `u` equals `u * F_s - G_s`.
pub fn hankel_parts(window: &[BigInt], s: usize) -> Result<(BigInt, BigInt), SequenceError> {
    if window.len() != 2 * s || s == 0 {
        return Err(SequenceError::BadWindow {
            expected: 2 * s,
            got: window.len(),
        });
    }
    let pivot: bareiss::Matrix = (0..s)
        .map(|i| (0..s).map(|j| window[i + j].clone()).collect())
        .collect();
    let full: bareiss::Matrix = (0..=s)
        .map(|i| {
            (0..=s)
                .map(|j| {
                    if i + j == 2 * s {
                        BigInt::zero()
                    } else {
                        window[i + j].clone()
                    }
                })
                .collect()
        })
        .collect();
    Ok((bareiss::determinant(&pivot), -bareiss::determinant(&full)))
}

/// One step of the order-`s` rule: `floor(G_s / F_s + r)`.
pub fn hankel_step(window: &[BigInt], s: usize, r: Offset) -> Result<BigInt, SequenceError> {
    hankel_step_at(window, s, r, 2 * s)
}

fn hankel_step_at(window: &[BigInt], s: usize, r: Offset, at: usize) -> Result<BigInt, SequenceError> {
    let (f, g) = hankel_parts(window, s)?;
    if f.is_zero() {
        return Err(SequenceError::PivotVanished { at });
    }
    let p = BigInt::from(r.numer());
    let q = BigInt::from(r.denom());
    Ok((&q * g + p * &f).div_floor(&(q * f)))
}

/// Successor of the last `2s` terms under the Pisot rule of `params`.
pub(crate) fn successor(window: &[BigInt], params: &PisotParams, at: usize) -> Result<BigInt, SequenceError> {
    if params.s == 1 {
        Ok(next_term(&window[0], &window[1], params.r))
    } else {
        hankel_step_at(window, params.s, params.r, at)
    }
}

/// First `count` terms of the sequence.
///
/// Stops early (recording why in `truncated`) if the Hankel pivot vanishes or
/// a term fails to be positive.
pub fn generate(params: &PisotParams, count: usize) -> Result<SequencePrefix, SequenceError> {
    params.validate()?;
    let width = 2 * params.s;
    if count < width {
        return Err(SequenceError::CountTooSmall { count, needed: width });
    }
    let mut terms = params.initial_terms();
    terms.reserve(count - width);
    let mut truncated = None;
    while terms.len() < count {
        let n = terms.len();
        match successor(&terms[n - width..], params, n) {
            Ok(t) if t.is_positive() => terms.push(t),
            Ok(_) => {
                truncated = Some(Truncation::NonPositiveTerm { at: n });
                break;
            }
            Err(SequenceError::PivotVanished { at }) => {
                truncated = Some(Truncation::PivotVanished { at });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SequencePrefix {
        params: params.clone(),
        terms,
        truncated,
    })
}

/// Streams the sequence without storing it; `f` sees `(n, a_n)` and returns
/// `false` to stop. Stops silently where [`generate`] would truncate.
pub fn for_each_term<F>(params: &PisotParams, limit: usize, mut f: F)
where
    F: FnMut(usize, &BigInt) -> bool,
{
    let width = 2 * params.s;
    let mut window: std::collections::VecDeque<BigInt> = params.initial_terms().into();
    for (n, t) in window.iter().enumerate().take(limit) {
        if !f(n, t) {
            return;
        }
    }
    for n in width..limit {
        let w: Vec<BigInt> = window.iter().cloned().collect();
        let next = match successor(&w, params, n) {
            Ok(t) if t.is_positive() => t,
            _ => return,
        };
        if !f(n, &next) {
            return;
        }
        window.pop_front();
        window.push_back(next);
    }
}

impl Default for Offset {
    fn default() -> Self {
        Offset::half()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn next_term_examples() {
        let h = Offset::half();
        assert_eq!(next_term(&4.into(), &7.into(), h), BigInt::from(12));
        assert_eq!(next_term(&1.into(), &2.into(), h), BigInt::from(4));
        // floor((2*219^2 + 10) / 20)
        assert_eq!(next_term(&10.into(), &219.into(), h), BigInt::from(4796));
    }

    #[test]
    fn generate_examples() {
        let h = Offset::half();
        let e47 = generate(&PisotParams::new(4, 7, h).unwrap(), 8).unwrap();
        assert_eq!(e47.terms, big(&[4, 7, 12, 21, 37, 65, 114, 200]));
        assert!(e47.truncated.is_none());
        let pow2 = generate(&PisotParams::new(1, 2, h).unwrap(), 6).unwrap();
        assert_eq!(pow2.terms, big(&[1, 2, 4, 8, 16, 32]));
        let e517 = generate(&PisotParams::new(5, 17, h).unwrap(), 5).unwrap();
        assert_eq!(e517.terms, big(&[5, 17, 58, 198, 676]));
        assert_eq!(BigInt::from(4 * 58 - 2 * 17), e517.terms[3]);
    }

    #[test]
    fn limiting_offsets_generate() {
        let t = generate(&PisotParams::new(4, 7, Offset::new(0, 1).unwrap()).unwrap(), 4).unwrap();
        // floor(49/4) = 12, floor(144/7) = 20
        assert_eq!(t.terms, big(&[4, 7, 12, 20]));
        let s = generate(&PisotParams::new(4, 7, Offset::new(1, 1).unwrap()).unwrap(), 4).unwrap();
        assert_eq!(s.terms, big(&[4, 7, 13, 25]));
    }

    #[test]
    fn params_rejected() {
        let h = Offset::half();
        assert!(matches!(
            PisotParams::new(4, 3, h),
            Err(SequenceError::NotIncreasing { .. })
        ));
        assert!(matches!(
            PisotParams::new(0, 3, h),
            Err(SequenceError::NonPositiveInitial)
        ));
        assert!(matches!(
            PisotParams::new(4, 4, h),
            Err(SequenceError::NotIncreasing { .. })
        ));
        assert!("3/2".parse::<Offset>().is_err());
        assert!("1/0".parse::<Offset>().is_err());
        assert_eq!("2/4".parse::<Offset>().unwrap(), Offset::half());
        assert!(matches!(
            PisotParams::with_initial_terms(big(&[1, 2, 3]), h),
            Err(SequenceError::WrongInitialCount { .. })
        ));
        let p = PisotParams::new(4, 7, h).unwrap();
        assert!(matches!(generate(&p, 1), Err(SequenceError::CountTooSmall { .. })));
    }

    #[test]
    fn hankel_step_examples() {
        let h = Offset::half();
        assert_eq!(hankel_step(&big(&[4, 7]), 1, h).unwrap(), BigInt::from(12));
        assert_eq!(hankel_step(&big(&[3, 15]), 1, h).unwrap(), BigInt::from(75));
        // Fibonacci-like b_n = b_{n-1} + b_{n-2}: 2, 3, 5, 8 -> 13
        assert_eq!(hankel_step(&big(&[2, 3, 5, 8]), 2, h).unwrap(), BigInt::from(13));
        // b_n = 3 b_{n-1} - b_{n-2}: 1, 2, 5, 13 -> 34
        assert_eq!(hankel_step(&big(&[1, 2, 5, 13]), 2, h).unwrap(), BigInt::from(34));
    }

    #[test]
    fn vanishing_pivot_truncates() {
        // 1, 1, 1, 1: the 2x2 pivot [[1,1],[1,1]] is singular.
        let p = PisotParams::with_initial_terms(big(&[1, 1, 1, 1]), Offset::half()).unwrap();
        assert!(matches!(
            hankel_step(&big(&[1, 1, 1, 1]), 2, Offset::half()),
            Err(SequenceError::PivotVanished { .. })
        ));
        let pre = generate(&p, 10).unwrap();
        assert_eq!(pre.len(), 4);
        assert_eq!(pre.truncated, Some(Truncation::PivotVanished { at: 4 }));
        assert_eq!(pre.require_complete(), Err(SequenceError::PivotVanished { at: 4 }));
    }

    #[test]
    fn bfile_round_trip_and_errors() {
        let pre = generate(&PisotParams::new(4, 7, Offset::half()).unwrap(), 5).unwrap();
        let text = pre.to_bfile();
        assert_eq!(text, "0 4\n1 7\n2 12\n3 21\n4 37\n");
        assert_eq!(parse_bfile(&format!("# comment\n{text}")).unwrap(), pre.terms);
        assert!(parse_bfile("0 1\n2 3\n").is_err());
        assert!(parse_bfile("0 x\n").is_err());
        assert_eq!(pre.to_json(), r#"["4","7","12","21","37"]"#);
    }

    #[test]
    fn streaming_matches_generate() {
        let p = PisotParams::new(10, 219, Offset::half()).unwrap();
        let pre = generate(&p, 40).unwrap();
        let mut seen = Vec::new();
        for_each_term(&p, 40, |_, t| {
            seen.push(t.clone());
            true
        });
        assert_eq!(seen, pre.terms);
    }

    proptest! {
        #[test]
        fn strictly_increasing(x in 1u32..10_000, dy in 1u32..10_000, r in 0u64..=4) {
            let y = x + dy;
            let p = PisotParams::new(x, y, Offset::new(r, 4).unwrap()).unwrap();
            let pre = generate(&p, 30).unwrap();
            prop_assert!(pre.terms.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn order_one_hankel_is_next_term(a in 1u64..1_000_000, b in 1u64..1_000_000, r in 0u64..=4) {
            let r = Offset::new(r, 4).unwrap();
            let w = vec![BigInt::from(a), BigInt::from(b)];
            prop_assert_eq!(hankel_step(&w, 1, r).unwrap(), next_term(&w[0], &w[1], r));
        }
    }
}
