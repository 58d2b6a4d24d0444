//! One-parameter families `E(x, k x^2 + j)` whose recurrences are polynomial
//! in `k`, loaded from JSON fixtures.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::decision::{end_to_end, DecideOptions, Verdict};
use crate::recurrence::{LinearRecurrence, RecurrenceError};
use crate::sequence::{Offset, PisotParams, SequenceError};

const BUILTIN: &str = include_str!("../fixtures/families.json");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("cannot parse polynomial in k: {0:?}")]
    BadPolynomial(String),
    #[error("residue {residue} is not below x^2 = {modulus}")]
    BadResidue { residue: u64, modulus: u64 },
    #[error("first initial term must be x and the second x^2 k + residue")]
    InitialTermsMismatch,
    #[error("invalid instance at k = {k}: {source}")]
    Params { k: u64, source: SequenceError },
    #[error("invalid recurrence at k = {k}: {source}")]
    Recurrence { k: u64, source: RecurrenceError },
    #[error("bad fixture file: {0}")]
    Fixture(String),
}

/// Integer polynomial in `k`, written like `64k^2+16k+1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KPoly {
    /// Ascending powers of `k`.
    coeffs: Vec<BigInt>,
}

impl KPoly {
    pub fn eval(&self, k: u64) -> BigInt {
        let k = BigInt::from(k);
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * &k + c)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }
}

impl FromStr for KPoly {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FamilyError::BadPolynomial(s.to_string());
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() {
            return Err(bad());
        }
        let mut coeffs: Vec<BigInt> = Vec::new();
        let mut rest = text.as_str();
        while !rest.is_empty() {
            let (neg, body) = match rest.as_bytes()[0] {
                b'+' => (false, &rest[1..]),
                b'-' => (true, &rest[1..]),
                _ if coeffs.is_empty() => (false, rest),
                _ => return Err(bad()),
            };
            let end = body[1.min(body.len())..].find(['+', '-']).map_or(body.len(), |i| i + 1);
            let term = &body[..end];
            rest = &body[end..];
            if term.is_empty() || term.starts_with(['+', '-']) {
                return Err(bad());
            }
            let (coef, power) = match term.split_once('k') {
                None => (term, 0usize),
                Some((c, p)) => {
                    let power = match p {
                        "" => 1,
                        _ => p.strip_prefix('^').ok_or_else(bad)?.parse().map_err(|_| bad())?,
                    };
                    (c.strip_suffix('*').unwrap_or(c), power)
                }
            };
            let mut value: BigInt = if coef.is_empty() {
                BigInt::from(1)
            } else {
                coef.parse().map_err(|_| bad())?
            };
            if neg {
                value = -value;
            }
            if coeffs.len() <= power {
                coeffs.resize(power + 1, BigInt::zero());
            }
            coeffs[power] += value;
        }
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Ok(KPoly { coeffs })
    }
}

impl fmt::Display for KPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (power, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() && !(power == 0 && first) {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { "-" } else { "+" })?;
            }
            first = false;
            match power {
                0 => write!(f, "{mag}")?,
                _ => {
                    if mag != BigInt::from(1) {
                        write!(f, "{mag}")?;
                    }
                    f.write_str("k")?;
                    if power > 1 {
                        write!(f, "^{power}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl Serialize for KPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for KPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// `E(x, x^2 k + residue) = [[initial(k)], [coefficients(k)]]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyTemplate {
    pub x: u64,
    pub residue: u64,
    pub initial: Vec<KPoly>,
    pub coefficients: Vec<KPoly>,
    /// Whether `k = 0` belongs to the family.
    #[serde(default)]
    pub allow_k0: bool,
}

impl FamilyTemplate {
    pub fn modulus(&self) -> u64 {
        self.x * self.x
    }

    pub fn y(&self, k: u64) -> u64 {
        self.modulus() * k + self.residue
    }

    pub fn validate(&self) -> Result<(), FamilyError> {
        if self.residue >= self.modulus() {
            return Err(FamilyError::BadResidue {
                residue: self.residue,
                modulus: self.modulus(),
            });
        }
        for k in [0, 1, 2] {
            let init: Vec<BigInt> = self.initial.iter().map(|p| p.eval(k)).collect();
            if init.len() < 2 || init[0] != BigInt::from(self.x) || init[1] != BigInt::from(self.y(k)) {
                return Err(FamilyError::InitialTermsMismatch);
            }
        }
        Ok(())
    }

    /// Default range of `k` to verify.
    pub fn k_values(&self, max_k: u64) -> Vec<u64> {
        let start = if self.allow_k0 { 0 } else { 1 };
        (start..=max_k).collect()
    }

    pub fn instantiate(&self, k: u64, r: Offset) -> Result<(PisotParams, LinearRecurrence), FamilyError> {
        let params = PisotParams::new(self.x, self.y(k), r).map_err(|source| FamilyError::Params { k, source })?;
        let rec = LinearRecurrence::new(
            self.coefficients.iter().map(|p| p.eval(k)).collect(),
            self.initial.iter().map(|p| p.eval(k)).collect(),
        )
        .map_err(|source| FamilyError::Recurrence { k, source })?;
        Ok((params, rec))
    }

    pub fn label(&self) -> String {
        format!("E({},{}k+{})", self.x, self.modulus(), self.residue)
    }
}

pub fn parse_templates(json: &str) -> Result<Vec<FamilyTemplate>, FamilyError> {
    let templates: Vec<FamilyTemplate> = serde_json::from_str(json).map_err(|e| FamilyError::Fixture(e.to_string()))?;
    for t in &templates {
        t.validate()?;
    }
    Ok(templates)
}

/// The shipped templates for `x = 4, 5, 6`.
pub fn builtin_templates() -> Vec<FamilyTemplate> {
    parse_templates(BUILTIN).expect("bundled fixture is valid")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FamilyOutcome {
    Proved {
        n0: u64,
    },
    /// The guesser found a different recurrence (or none).
    MismatchedGuess {
        k: u64,
        got: Option<LinearRecurrence>,
    },
    NotProved {
        verdict: Verdict,
    },
    Invalid {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyRow {
    pub k: u64,
    pub y: u64,
    pub expected: Option<LinearRecurrence>,
    pub outcome: FamilyOutcome,
}

impl FamilyRow {
    pub fn passed(&self) -> bool {
        matches!(self.outcome, FamilyOutcome::Proved { .. })
    }
}

/// Runs the full pipeline for each `k` and compares with the template.
pub fn verify_family(
    template: &FamilyTemplate,
    ks: &[u64],
    r: Offset,
    max_order: usize,
    opts: &DecideOptions,
) -> Vec<FamilyRow> {
    ks.par_iter()
        .map(|&k| verify_one(template, k, r, max_order, opts))
        .collect()
}

fn verify_one(template: &FamilyTemplate, k: u64, r: Offset, max_order: usize, opts: &DecideOptions) -> FamilyRow {
    let y = template.y(k);
    let invalid = |reason: String| FamilyRow {
        k,
        y,
        expected: None,
        outcome: FamilyOutcome::Invalid { reason },
    };
    let (params, expected) = match template.instantiate(k, r) {
        Ok(v) => v,
        Err(e) => return invalid(e.to_string()),
    };
    let report = match end_to_end(&params, max_order, 0, opts) {
        Ok((_, report)) => report,
        Err(e) => return invalid(e.to_string()),
    };
    let outcome = if report.recurrence.as_ref() != Some(&expected) {
        FamilyOutcome::MismatchedGuess {
            k,
            got: report.recurrence.clone(),
        }
    } else if let Verdict::Proved { n0 } = report.verdict {
        FamilyOutcome::Proved { n0 }
    } else {
        FamilyOutcome::NotProved {
            verdict: report.verdict.clone(),
        }
    };
    FamilyRow {
        k,
        y,
        expected: Some(expected),
        outcome,
    }
}
