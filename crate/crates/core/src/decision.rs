//! Deciding whether a Pisot sequence satisfies a linear recurrence forever.
//!
//! Write `b_n = sum C_i r_i^n` for the recurrence sequence. For order `s` the
//! Hankel determinants of `b` expand (Cauchy–Binet) as
//! `det H_m(n) = sum_{|S| = m} prod_{i in S} C_i r_i^n * V(S)^2`, with `V(S)`
//! the Vandermonde product of the roots in `S`. The Pisot rule reproduces
//! `b` at index `n + 2s` exactly when `-r <= -Delta_s / F_s < 1 - r`, where
//! `Delta_s = det H_{s+1}(n)` and `F_s = det H_s(n)`. When the `(s+1)`-st root
//! lies inside the unit circle, `|Delta_s / F_s|` decays like `rho^n`; an
//! explicit `K rho^n` bound gives a threshold `N0` past which the rule cannot
//! fail, and everything below `N0` is checked exactly. For `s = 1`,
//! `-Delta_1 = c_{n+2} = b_{n+1}^2 - b_{n+2} b_n`.

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ball::{CApprox, CBall, Dyadic};
use crate::recurrence::{LinearRecurrence, RecurrenceError};
use crate::roots::{
    certify_roots, classify_adaptive, classify_spectrum, may_have_unit_modulus_root, EnclosureJson, RootEnclosure,
    RootError, Spectrum, SpectrumKind, PRECISION_CAP, START_BITS,
};
use crate::sequence::{self, hankel_step, Offset, PisotParams, SequenceError};

pub const DEFAULT_CHECK_LIMIT: usize = 50_000;

/// Working bits added on top of the root precision for ball linear algebra.
const BALL_GUARD: u64 = 64;
/// Significant bits kept in the reported constants `K` and `rho`.
const CONSTANT_BITS: u64 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecisionError {
    #[error("Vandermonde system not certifiably invertible at {bits} bits")]
    SingularSystem { bits: u64 },
    #[error("leading Binet coefficient cannot be separated from zero")]
    DominantCoefficientAmbiguous,
    #[error("root moduli are not separated enough to bound the discrepancy")]
    BoundUnavailable,
    #[error("recurrence initial term b_{index} differs from the sequence")]
    InitialTermsMismatch { index: usize },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Recurrence(#[from] RecurrenceError),
}

/// Binet form `b_n = sum C_i r_i^n` with certified balls.
#[derive(Clone, Debug)]
pub struct BinetData {
    pub roots: Vec<RootEnclosure>,
    pub coefficients: Vec<CBall>,
    pub precision_bits: u64,
}

impl BinetData {
    pub fn dominant_coefficient(&self) -> &CBall {
        &self.coefficients[0]
    }

    fn working_bits(&self) -> u64 {
        self.precision_bits + BALL_GUARD
    }

    /// Ball enclosing `b_n`.
    pub fn term(&self, n: u64) -> CBall {
        let wp = self.working_bits();
        self.roots
            .iter()
            .zip(&self.coefficients)
            .fold(CBall::zero(), |acc, (r, c)| {
                acc.add(&c.mul(&r.ball().pow(n, wp), wp), wp)
            })
    }

    /// Ball enclosing `c_n = -sum_{i<j} C_i C_j (r_i r_j)^{n-2} (r_i - r_j)^2`.
    pub fn discrepancy(&self, n: u64) -> CBall {
        assert!(n >= 2);
        let wp = self.working_bits();
        let k = self.roots.len();
        let balls: Vec<CBall> = self.roots.iter().map(RootEnclosure::ball).collect();
        let mut acc = CBall::zero();
        for i in 0..k {
            for j in i + 1..k {
                let d = balls[i].sub(&balls[j], wp).sqr(wp);
                let p = balls[i].mul(&balls[j], wp).pow(n - 2, wp);
                let t = self.coefficients[i]
                    .mul(&self.coefficients[j], wp)
                    .mul(&p, wp)
                    .mul(&d, wp);
                acc = acc.add(&t, wp);
            }
        }
        acc.neg()
    }
}

/// Solves the Vandermonde system `sum_j C_j r_j^i = b_i`, `i < k`, in ball
/// arithmetic.
pub fn binet_coefficients(
    rec: &LinearRecurrence,
    roots: &[RootEnclosure],
    precision_bits: u64,
) -> Result<BinetData, DecisionError> {
    let k = rec.order();
    assert_eq!(roots.len(), k, "one enclosure per root");
    let wp = precision_bits + BALL_GUARD;
    let singular = DecisionError::SingularSystem { bits: precision_bits };
    let balls: Vec<CBall> = roots.iter().map(RootEnclosure::ball).collect();
    let mut a: Vec<Vec<CBall>> = (0..k)
        .map(|i| balls.iter().map(|r| r.pow(i as u64, wp)).collect())
        .collect();
    let mut rhs: Vec<CBall> = rec.initial_terms().iter().map(CBall::from_int).collect();
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&x, &y| a[x][col].center_mag_lower().cmp(&a[y][col].center_mag_lower()))
            .expect("nonempty range");
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = a[col][col].inv(wp).ok_or(singular.clone())?;
        let pivot_row = a[col].clone();
        for row in col + 1..k {
            let f = a[row][col].mul(&inv, wp);
            for (cell, p) in a[row].iter_mut().zip(&pivot_row).skip(col) {
                *cell = cell.sub(&f.mul(p, wp), wp);
            }
            let t = f.mul(&rhs[col], wp);
            rhs[row] = rhs[row].sub(&t, wp);
        }
    }
    let mut c = vec![CBall::zero(); k];
    for i in (0..k).rev() {
        let mut acc = rhs[i].clone();
        for j in i + 1..k {
            acc = acc.sub(&a[i][j].mul(&c[j], wp), wp);
        }
        c[i] = acc.div(&a[i][i], wp).ok_or(singular.clone())?;
    }
    Ok(BinetData {
        roots: roots.to_vec(),
        coefficients: c,
        precision_bits,
    })
}

/// Exact `c_n = b_{n-1}^2 - b_n b_{n-2}` of the recurrence sequence.
pub fn discrepancy(rec: &LinearRecurrence, n: usize) -> BigInt {
    assert!(n >= 2);
    let b: Vec<BigInt> = rec.terms().skip(n - 2).take(3).collect();
    &b[1] * &b[1] - &b[2] * &b[0]
}

/// `-r <= c / b < 1 - r`, decided with integers only. This is equivalent to
/// `b_n = floor(b_{n-1}^2 / b_{n-2} + r)` when `c = b_{n-1}^2 - b_n b_{n-2}`
/// and `b = b_{n-2}`.
pub fn floor_bracket_holds(c: &BigInt, b: &BigInt, r: Offset) -> bool {
    let p = BigInt::from(r.numer());
    let q = BigInt::from(r.denom());
    let qc = &q * c;
    let lo = -(&p * b);
    let hi = (&q - &p) * b;
    match b.sign() {
        num_bigint::Sign::Plus => lo <= qc && qc < hi,
        num_bigint::Sign::Minus => lo >= qc && qc > hi,
        num_bigint::Sign::NoSign => false,
    }
}

/// Explicit bound `|Delta_s / F_s| <= k * rho^n` for every term index
/// `n >= n_min` (for `s = 1`: `|c_n / b_{n-2}| <= k rho^n`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioBound {
    pub k: Dyadic,
    pub rho: Dyadic,
    pub n_min: u64,
}

struct SubsetTerm {
    upper: Dyadic,
    lower: Dyadic,
}

fn subset_term(binet: &BinetData, subset: &[usize], wp: u64) -> SubsetTerm {
    let mut p = CBall::one();
    for &i in subset {
        p = p.mul(&binet.coefficients[i], wp);
    }
    for (x, &i) in subset.iter().enumerate() {
        for &j in &subset[x + 1..] {
            let d = binet.roots[i].ball().sub(&binet.roots[j].ball(), wp).sqr(wp);
            p = p.mul(&d, wp);
        }
    }
    SubsetTerm {
        upper: p.mag_upper(),
        lower: p.mag_lower(),
    }
}

fn product(values: impl Iterator<Item = Dyadic>) -> Dyadic {
    values.fold(Dyadic::one(), |acc, v| &acc * &v)
}

/// Smallest `n >= 0` with `pred(n)`, for a predicate that stays true once
/// true. `None` if it is still false at `cap`.
fn first_true(cap: u64, mut pred: impl FnMut(u64) -> bool) -> Option<u64> {
    if pred(0) {
        return Some(0);
    }
    let mut hi = 1u64;
    while !pred(hi) {
        if hi >= cap {
            return None;
        }
        hi = hi.saturating_mul(2).min(cap);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// `K` and `rho` for order `s`, from certified roots and coefficients.
///
/// Needs roots sorted by decreasing modulus, the top `s` separated from the
/// rest, and the leading term `prod_{i<s} C_i * V(top)^2` bounded away from 0.
pub fn ratio_bound(binet: &BinetData, s: usize) -> Result<RatioBound, DecisionError> {
    let k = binet.roots.len();
    let wp = binet.working_bits();
    let shift = 2 * s as u64;
    if k < s {
        return Err(DecisionError::BoundUnavailable);
    }
    let top: Vec<usize> = (0..s).collect();
    let lead = subset_term(binet, &top, wp);
    if lead.lower.is_zero() {
        return Err(DecisionError::DominantCoefficientAmbiguous);
    }
    let top_lower = product(binet.roots[..s].iter().map(|e| e.modulus_lower.clone()));
    if top_lower.is_zero() {
        return Err(DecisionError::BoundUnavailable);
    }

    // Lower bound for |F_s(n)|: the other s-subsets must fall below half the lead.
    let mut tail_sum = Dyadic::zero();
    let mut tail_rate = Dyadic::zero();
    for subset in (0..k).combinations(s).filter(|c| c != &top) {
        tail_sum = &tail_sum + &subset_term(binet, &subset, wp).upper;
        let u = product(subset.iter().map(|&i| binet.roots[i].modulus_upper.clone()));
        tail_rate = Dyadic::max(&tail_rate, &Dyadic::div_up(&u, &top_lower, wp));
    }
    let half_lead = Dyadic::new(lead.lower.mantissa().clone(), lead.lower.exponent() - 1);
    let tail_start = if tail_sum.is_zero() {
        0
    } else {
        if tail_rate >= Dyadic::one() {
            return Err(DecisionError::BoundUnavailable);
        }
        let rate = tail_rate.abs_up(CONSTANT_BITS);
        let rate = if rate < Dyadic::one() { rate } else { tail_rate };
        first_true(u64::MAX / 2, |n| &tail_sum * &rate.pow(n) <= half_lead).ok_or(DecisionError::BoundUnavailable)?
    };
    let n_min = tail_start + shift;

    // Upper bound for |Delta_s(n)|, relative to the lead's growth.
    if k == s {
        return Ok(RatioBound {
            k: Dyadic::zero(),
            rho: Dyadic::zero(),
            n_min,
        });
    }
    let mut delta_sum = Dyadic::zero();
    for subset in (0..k).combinations(s + 1) {
        delta_sum = &delta_sum + &subset_term(binet, &subset, wp).upper;
    }
    let num = product(binet.roots[..=s].iter().map(|e| e.modulus_upper.clone()));
    let rho_exact = Dyadic::div_up(&num, &top_lower, wp);
    if rho_exact >= Dyadic::one() {
        return Err(DecisionError::BoundUnavailable);
    }
    let rho = {
        let r = rho_exact.abs_up(CONSTANT_BITS);
        if r < Dyadic::one() {
            r
        } else {
            rho_exact
        }
    };
    // Hankel index n = term index - 2s, so K_term = K_hankel / rho^{2s}.
    let k_hankel = Dyadic::div_up(
        &Dyadic::new(delta_sum.mantissa().clone(), delta_sum.exponent() + 1),
        &lead.lower,
        wp,
    );
    let k_term = if k_hankel.is_zero() {
        k_hankel
    } else if rho.is_zero() {
        return Err(DecisionError::BoundUnavailable);
    } else {
        Dyadic::div_up(&k_hankel, &rho.pow(shift), CONSTANT_BITS)
    };
    Ok(RatioBound { k: k_term, rho, n_min })
}

/// Does `k * rho^n < min(r, 1 - r)` hold?
fn below_margin(k: &Dyadic, rho: &Dyadic, r: Offset, n: u64) -> bool {
    let p = r.numer();
    let q = r.denom();
    let margin = p.min(q - p);
    // k rho^n < margin / q  <=>  q k rho^n < margin
    let lhs = &(&Dyadic::from_int(q) * k) * &rho.pow(n);
    lhs < Dyadic::from_int(margin)
}

/// Smallest `N >= n_min` with `k rho^n < min(r, 1 - r)` for every `n >= N`,
/// by exact comparison; `None` if that `N` exceeds `cap`.
pub fn compute_n0_within(k: &Dyadic, rho: &Dyadic, r: Offset, n_min: u64, cap: u64) -> Option<u64> {
    assert!(*rho < Dyadic::one() && rho.signum() >= 0, "rho must lie in [0, 1)");
    if k.is_zero() {
        return Some(n_min);
    }
    if cap < n_min {
        return None;
    }
    first_true(cap - n_min, |d| below_margin(k, rho, r, n_min + d)).map(|d| n_min + d)
}

/// Unbounded form of [`compute_n0_within`].
pub fn compute_n0(k: &Dyadic, rho: &Dyadic, r: Offset, n_min: u64) -> u64 {
    compute_n0_within(k, rho, r, n_min, u64::MAX / 2).expect("rho < 1 forces a threshold")
}

/// Scans the recurrence sequence against the Pisot rule for indices below
/// `limit`; returns the first index where they part ways.
pub fn first_failure(params: &PisotParams, rec: &LinearRecurrence, limit: usize) -> Option<usize> {
    let s = params.s;
    let width = 2 * s;
    let initial = params.initial_terms();
    let mut window: Vec<BigInt> = Vec::with_capacity(width + 1);
    for (n, b) in rec.terms().enumerate().take(limit) {
        if n < width {
            if b != initial[n] {
                return Some(n);
            }
        } else if s == 1 {
            let c = &window[1] * &window[1] - &b * &window[0];
            if !floor_bracket_holds(&c, &window[0], params.r) {
                return Some(n);
            }
        } else {
            match hankel_step(&window, s, params.r) {
                Ok(v) if v == b && v.is_positive() => {}
                _ => return Some(n),
            }
        }
        window.push(b);
        if window.len() > width {
            window.remove(0);
        }
    }
    None
}

/// Recomputes both sequences from scratch and checks they agree before
/// `index` and disagree (or the Pisot sequence ends) at `index`.
pub fn confirm_failure(params: &PisotParams, rec: &LinearRecurrence, index: usize) -> bool {
    let mut b = rec.terms();
    let mut seen = 0usize;
    let mut agree_before = true;
    let mut differs_at = false;
    sequence::for_each_term(params, index + 1, |n, a| {
        let bn = b.next().expect("unbounded");
        seen = n + 1;
        if n < index {
            agree_before &= *a == bn;
            agree_before
        } else {
            differs_at = *a != bn;
            false
        }
    });
    // A Pisot sequence that stops before `index` counts as a disagreement there.
    agree_before && (differs_at || seen == index)
}

/// Advisory first-failure estimate from the diverging Binet terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreakdownModel {
    /// First index where the model leaves `[-r, 1 - r)`.
    pub predicted_index: Option<u64>,
    /// Sum of `|C_j| |r_1 - r_j|^2 / |r_j|^2` over diverging roots (64 bits).
    pub amplitude: Dyadic,
    /// Largest diverging modulus, lower bound.
    pub growth: Dyadic,
}

/// Tracks `D(n) = -sum_j C_j (r_1 - r_j)^2 r_j^{n-2}` over the non-dominant
/// roots outside the unit circle; this is the leading part of
/// `c_n / b_{n-2}` once those terms dominate. Midpoint arithmetic only.
pub fn predict_breakdown(binet: &BinetData, r: Offset, limit: u64) -> Option<BreakdownModel> {
    let one = Dyadic::one();
    let diverging: Vec<usize> = (1..binet.roots.len())
        .filter(|&j| binet.roots[j].modulus_lower > one)
        .collect();
    if diverging.is_empty() {
        return None;
    }
    let wp = binet.working_bits();
    let center = |b: &CBall| CApprox::new(b.re.clone(), b.im.clone());
    let r1 = center(&binet.roots[0].ball());
    let mut amplitude = Dyadic::zero();
    let mut growth = Dyadic::zero();
    let mut terms: Vec<(CApprox, CApprox)> = Vec::new();
    for &j in &diverging {
        let rj = center(&binet.roots[j].ball());
        let d = r1.sub(&rj, wp);
        let base = center(&binet.coefficients[j]).mul(&d.mul(&d, wp), wp);
        let (lo, _) = binet.roots[j].ball().mag_bounds(wp);
        let amp = Dyadic::div_up(&base.as_ball().mag_upper(), &(&lo * &lo), CONSTANT_BITS);
        amplitude = (&amplitude + &amp).abs_up(CONSTANT_BITS);
        growth = Dyadic::max(&growth, &lo.abs_down(CONSTANT_BITS));
        terms.push((base, rj));
    }
    let p = Dyadic::from_int(r.numer());
    let q = Dyadic::from_int(r.denom());
    let mut predicted = None;
    // terms[j].0 holds C_j (r_1 - r_j)^2 r_j^{n-2}; start at n = 2.
    for n in 2..=limit.max(2) {
        let sum = terms
            .iter()
            .fold(CApprox::new(Dyadic::zero(), Dyadic::zero()), |acc, t| acc.add(&t.0, wp));
        let qd = &q * &(-&sum.re);
        if qd < -&p || qd >= &q - &p {
            predicted = Some(n);
            break;
        }
        for t in terms.iter_mut() {
            t.0 = t.0.mul(&t.1, wp);
        }
    }
    Some(BreakdownModel {
        predicted_index: predicted,
        amplitude,
        growth,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InconclusiveReason {
    NoRecurrenceFound,
    /// A root may sit exactly on the unit circle.
    UnitModulusRoot,
    PrecisionExhausted {
        bits: u64,
    },
    DominantCoefficientAmbiguous,
    BoundUnavailable,
    /// The proof threshold lies beyond what we are allowed to check.
    N0BeyondCheckLimit {
        n0: Option<u64>,
        check_limit: u64,
    },
    /// No failure found although the spectrum says one must occur.
    CheckLimitExceeded {
        check_limit: u64,
        contradiction_suspect: bool,
    },
    /// `(t - 1)^2`: checked exactly up to the limit, no bound argument.
    UnitCircleSpecial {
        verified_up_to: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnsupportedReason {
    RepeatedRoots {
        #[serde(with = "crate::serde_big::vec")]
        gcd: Vec<BigInt>,
    },
    /// `r = 0` or `r = 1`.
    LimitingOffset,
}

/// Outcome of a decision. Failure positions are 1-based (`a_1 = x`);
/// `first_failure_index` and `n0` are 0-based term indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Proved {
        n0: u64,
    },
    Disproved {
        predicted_n: Option<u64>,
        first_failure_n: u64,
        first_failure_index: u64,
    },
    Inconclusive {
        reason: InconclusiveReason,
    },
    Unsupported {
        reason: UnsupportedReason,
    },
}

impl Verdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved { .. })
    }

    pub fn is_disproved(&self) -> bool {
        matches!(self, Verdict::Disproved { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Proved { .. } => "Proved",
            Verdict::Disproved { .. } => "Disproved",
            Verdict::Inconclusive { .. } => "Inconclusive",
            Verdict::Unsupported { .. } => "Unsupported",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionReport {
    pub params: PisotParams,
    pub recurrence: Option<LinearRecurrence>,
    pub verdict: Verdict,
    pub n0: Option<u64>,
    /// 1-based, like `first_failure`.
    pub predicted_breakdown: Option<u64>,
    pub first_failure: Option<u64>,
    pub k: Option<Dyadic>,
    pub rho: Option<Dyadic>,
    pub n_min: Option<u64>,
    /// Modulus bounds of root `s + 1` (the second root when `s = 1`).
    pub second_root_modulus_bounds: Option<(Dyadic, Dyadic)>,
    pub precision_bits_used: u64,
    /// Terms of the recurrence sequence checked exactly against the rule.
    pub checked_up_to: u64,
    pub spectrum: Option<SpectrumKind>,
    pub roots: Vec<EnclosureJson>,
    pub dominant_coefficient: Option<EnclosureJson>,
    pub breakdown: Option<BreakdownModel>,
}

impl DecisionReport {
    fn new(params: &PisotParams, recurrence: Option<LinearRecurrence>, verdict: Verdict) -> Self {
        DecisionReport {
            params: params.clone(),
            recurrence,
            verdict,
            n0: None,
            predicted_breakdown: None,
            first_failure: None,
            k: None,
            rho: None,
            n_min: None,
            second_root_modulus_bounds: None,
            precision_bits_used: 0,
            checked_up_to: 0,
            spectrum: None,
            roots: Vec::new(),
            dominant_coefficient: None,
            breakdown: None,
        }
    }

    /// Report for a prefix with no recurrence of the searched orders.
    pub fn no_recurrence(params: &PisotParams, checked: u64) -> Self {
        let mut r = DecisionReport::new(
            params,
            None,
            Verdict::Inconclusive {
                reason: InconclusiveReason::NoRecurrenceFound,
            },
        );
        r.checked_up_to = checked;
        r
    }

    fn inconclusive(&mut self, reason: InconclusiveReason) {
        self.verdict = Verdict::Inconclusive { reason };
    }

    fn record_spectrum(&mut self, spectrum: &Spectrum, s: usize) {
        self.spectrum = Some(spectrum.kind.clone());
        self.precision_bits_used = spectrum.precision_bits;
        self.roots = spectrum.roots.iter().map(RootEnclosure::to_json).collect();
        self.second_root_modulus_bounds = spectrum
            .modulus_after(s)
            .map(|(lo, hi)| (lo.abs_down(CONSTANT_BITS), hi.abs_up(CONSTANT_BITS)));
    }

    fn record_failure(&mut self, index: usize, predicted: Option<u64>) {
        self.first_failure = Some(index as u64 + 1);
        self.predicted_breakdown = predicted;
        self.verdict = Verdict::Disproved {
            predicted_n: predicted,
            first_failure_n: index as u64 + 1,
            first_failure_index: index as u64,
        };
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecideOptions {
    pub check_limit: usize,
    pub start_bits: u64,
    pub precision_cap: u64,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            check_limit: DEFAULT_CHECK_LIMIT,
            start_bits: START_BITS,
            precision_cap: PRECISION_CAP,
        }
    }
}

pub fn decide(
    params: &PisotParams,
    rec: &LinearRecurrence,
    check_limit: usize,
) -> Result<DecisionReport, DecisionError> {
    decide_with(
        params,
        rec,
        &DecideOptions {
            check_limit,
            ..DecideOptions::default()
        },
    )
}

pub fn decide_with(
    params: &PisotParams,
    rec: &LinearRecurrence,
    opts: &DecideOptions,
) -> Result<DecisionReport, DecisionError> {
    params.validate()?;
    let initial = params.initial_terms();
    if let Some(index) = rec.initial_terms().iter().zip(&initial).position(|(b, a)| b != a) {
        return Err(DecisionError::InitialTermsMismatch { index });
    }
    if rec.order() > initial.len() {
        let prefix = sequence::generate(params, rec.order())?;
        if let Some(index) = rec.initial_terms().iter().zip(&prefix.terms).position(|(b, a)| b != a) {
            return Err(DecisionError::InitialTermsMismatch { index });
        }
    }
    let mut report = DecisionReport::new(
        params,
        Some(rec.clone()),
        Verdict::Inconclusive {
            reason: InconclusiveReason::BoundUnavailable,
        },
    );
    if params.r.is_limiting() {
        report.verdict = Verdict::Unsupported {
            reason: UnsupportedReason::LimitingOffset,
        };
        return Ok(report);
    }
    let s = params.s;
    let poly = rec.char_poly();
    let spectrum = match classify_adaptive(&poly, s, opts.start_bits, opts.precision_cap) {
        Ok(sp) => sp,
        Err(RootError::RepeatedRoots { gcd }) => {
            report.verdict = Verdict::Unsupported {
                reason: UnsupportedReason::RepeatedRoots { gcd },
            };
            return Ok(report);
        }
        Err(RootError::PrecisionExhausted { bits }) => {
            report.precision_bits_used = bits;
            report.inconclusive(InconclusiveReason::PrecisionExhausted { bits });
            return Ok(report);
        }
    };
    report.record_spectrum(&spectrum, s);
    match &spectrum.kind {
        SpectrumKind::UnitCircleSpecial => {
            let limit = opts.check_limit;
            match first_failure(params, rec, limit) {
                Some(n) => confirmed_failure(&mut report, params, rec, n, None),
                None => {
                    report.checked_up_to = limit as u64;
                    report.inconclusive(InconclusiveReason::UnitCircleSpecial {
                        verified_up_to: limit as u64,
                    });
                }
            }
        }
        SpectrumKind::Ambiguous { .. } => {
            let reason = if may_have_unit_modulus_root(&poly) {
                InconclusiveReason::UnitModulusRoot
            } else {
                InconclusiveReason::PrecisionExhausted {
                    bits: spectrum.precision_bits,
                }
            };
            report.inconclusive(reason);
        }
        SpectrumKind::DominantContracting => prove(&mut report, params, rec, spectrum, opts),
        SpectrumKind::SecondRootOutside | SpectrumKind::NotPisotLike { .. } => {
            refute(&mut report, params, rec, &spectrum, opts)
        }
    }
    Ok(report)
}

fn confirmed_failure(
    report: &mut DecisionReport,
    params: &PisotParams,
    rec: &LinearRecurrence,
    index: usize,
    predicted: Option<u64>,
) {
    report.checked_up_to = index as u64 + 1;
    if confirm_failure(params, rec, index) {
        report.record_failure(index, predicted);
    } else {
        // Scanner and regeneration disagree; never report an unconfirmed failure.
        report.inconclusive(InconclusiveReason::BoundUnavailable);
    }
}

/// Binet data at the spectrum's precision, re-certifying at higher precision
/// while the coefficient balls are too wide.
fn binet_and_bound(
    rec: &LinearRecurrence,
    spectrum: Spectrum,
    s: usize,
    cap: u64,
) -> (Spectrum, Result<(BinetData, RatioBound), DecisionError>) {
    let poly = rec.char_poly();
    let mut spectrum = spectrum;
    loop {
        let attempt = binet_coefficients(rec, &spectrum.roots, spectrum.precision_bits)
            .and_then(|b| ratio_bound(&b, s).map(|bound| (b, bound)));
        if attempt.is_ok() || spectrum.precision_bits >= cap {
            return (spectrum, attempt);
        }
        let bits = (spectrum.precision_bits * 2).min(cap);
        match certify_roots(&poly, bits) {
            Ok(roots) => {
                let kind = classify_spectrum(&roots, s);
                if kind != SpectrumKind::DominantContracting {
                    return (spectrum, attempt);
                }
                spectrum = Spectrum {
                    kind,
                    roots,
                    precision_bits: bits,
                };
            }
            Err(_) => return (spectrum, attempt),
        }
    }
}

fn prove(
    report: &mut DecisionReport,
    params: &PisotParams,
    rec: &LinearRecurrence,
    spectrum: Spectrum,
    opts: &DecideOptions,
) {
    let s = params.s;
    let (spectrum, attempt) = binet_and_bound(rec, spectrum, s, opts.precision_cap);
    report.record_spectrum(&spectrum, s);
    let (binet, bound) = match attempt {
        Ok(v) => v,
        Err(DecisionError::DominantCoefficientAmbiguous) => {
            return report.inconclusive(InconclusiveReason::DominantCoefficientAmbiguous)
        }
        Err(_) => return report.inconclusive(InconclusiveReason::BoundUnavailable),
    };
    report.dominant_coefficient = Some(
        RootEnclosure {
            center_re: binet.dominant_coefficient().re.clone(),
            center_im: binet.dominant_coefficient().im.clone(),
            radius: binet.dominant_coefficient().rad.clone(),
            conjugate_pair_id: None,
            modulus_lower: Dyadic::zero(),
            modulus_upper: Dyadic::zero(),
        }
        .to_json(),
    );
    report.k = Some(bound.k.clone());
    report.rho = Some(bound.rho.clone());
    report.n_min = Some(bound.n_min);
    let limit = opts.check_limit as u64;
    let Some(n0) = compute_n0_within(&bound.k, &bound.rho, params.r, bound.n_min, limit) else {
        return report.inconclusive(InconclusiveReason::N0BeyondCheckLimit {
            n0: None,
            check_limit: limit,
        });
    };
    report.n0 = Some(n0);
    match first_failure(params, rec, n0 as usize) {
        Some(n) => confirmed_failure(report, params, rec, n, None),
        None => {
            report.checked_up_to = n0;
            report.verdict = Verdict::Proved { n0 };
        }
    }
}

fn refute(
    report: &mut DecisionReport,
    params: &PisotParams,
    rec: &LinearRecurrence,
    spectrum: &Spectrum,
    opts: &DecideOptions,
) {
    let mut predicted = None;
    if params.s == 1 && spectrum.kind == SpectrumKind::SecondRootOutside {
        if let Ok(binet) = binet_coefficients(rec, &spectrum.roots, spectrum.precision_bits) {
            let horizon = (opts.check_limit as u64).saturating_mul(4).max(1000);
            if let Some(model) = predict_breakdown(&binet, params.r, horizon) {
                predicted = model.predicted_index.map(|i| i + 1);
                report.breakdown = Some(model);
            }
        }
    }
    report.predicted_breakdown = predicted;
    match first_failure(params, rec, opts.check_limit) {
        Some(n) => confirmed_failure(report, params, rec, n, predicted),
        None => {
            report.checked_up_to = opts.check_limit as u64;
            report.inconclusive(InconclusiveReason::CheckLimitExceeded {
                check_limit: opts.check_limit as u64,
                contradiction_suspect: true,
            });
        }
    }
}

/// Number of terms generated by [`end_to_end`] for guessing.
pub fn guess_prefix_len(max_order: usize, print_terms: usize) -> usize {
    print_terms.max(4 * max_order + 8)
}

/// Generates a prefix, guesses the minimal recurrence and decides it.
///
/// The prefix holds `guess_prefix_len(max_order, print_terms)` terms, so a
/// verbose front end can print the first `print_terms` of the same prefix.
pub fn end_to_end(
    params: &PisotParams,
    max_order: usize,
    print_terms: usize,
    opts: &DecideOptions,
) -> Result<(sequence::SequencePrefix, DecisionReport), DecisionError> {
    let len = guess_prefix_len(max_order, print_terms).max(2 * params.s);
    let prefix = sequence::generate(params, len)?;
    let rec = match crate::recurrence::guess_recurrence(&prefix.terms, max_order) {
        Ok(rec) => rec,
        Err(RecurrenceError::NotFound { .. }) | Err(RecurrenceError::InsufficientPrefix { .. }) => {
            let report = DecisionReport::no_recurrence(params, prefix.len() as u64);
            return Ok((prefix, report));
        }
        Err(e) => return Err(e.into()),
    };
    let report = decide_with(params, &rec, opts)?;
    Ok((prefix, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::eval_recurrence;
    use num_traits::Zero;

    fn rec(c: &[i64], i: &[i64]) -> LinearRecurrence {
        LinearRecurrence::from_i64(c, i).unwrap()
    }

    fn binet_of(r: &LinearRecurrence) -> BinetData {
        let roots = certify_roots(&r.char_poly(), 128).unwrap();
        binet_coefficients(r, &roots, 128).unwrap()
    }

    #[test]
    fn discrepancy_examples() {
        let e47 = rec(&[2, -1, 1], &[4, 7, 12]);
        assert_eq!(discrepancy(&e47, 2), BigInt::from(1));
        let geo = rec(&[2], &[1]);
        for n in 2..10 {
            assert!(discrepancy(&geo, n).is_zero());
        }
        let e10 = rec(&[22, -3, 18, -11], &[10, 219, 4796, 105030]);
        assert_eq!(discrepancy(&e10, 3), BigInt::from(4796i64 * 4796 - 105030 * 219));
    }

    #[test]
    fn binet_dominant_coefficient() {
        let b = binet_of(&rec(&[2, -1, 1], &[4, 7, 12]));
        let c1 = b.dominant_coefficient();
        assert!(
            c1.contains(&Dyadic::from_f64(3.902586801).unwrap(), &Dyadic::zero())
                || (c1.re.to_f64() - 3.902586801).abs() < 1e-9
        );
        assert!(c1.rad < Dyadic::pow2(-100));
        let g = binet_of(&rec(&[2], &[1]));
        assert!(g.dominant_coefficient().contains(&Dyadic::one(), &Dyadic::zero()));
    }

    #[test]
    fn binet_reproduces_terms() {
        let r = rec(&[22, -3, 18, -11], &[10, 219, 4796, 105030]);
        let b = binet_of(&r);
        let terms = eval_recurrence(&r, 40);
        for (n, t) in terms.iter().enumerate() {
            assert!(b.term(n as u64).contains_int(t), "n = {n}");
        }
    }

    #[test]
    fn discrepancy_ball_contains_exact_value() {
        let r = rec(&[2, -1, 1], &[4, 7, 12]);
        let b = binet_of(&r);
        for n in 2..=50 {
            assert!(b.discrepancy(n).contains_int(&discrepancy(&r, n as usize)));
        }
    }

    #[test]
    fn bracket_matches_floor() {
        let r = Offset::half();
        for (b2, b1, b0) in [(4, 7, 12), (4, 7, 13), (7, 12, 21), (10, 219, 4796)] {
            let (b2, b1, b0) = (BigInt::from(b2), BigInt::from(b1), BigInt::from(b0));
            let c = &b1 * &b1 - &b0 * &b2;
            assert_eq!(floor_bracket_holds(&c, &b2, r), sequence::next_term(&b2, &b1, r) == b0);
        }
    }

    #[test]
    fn n0_examples() {
        let half = Offset::half();
        assert_eq!(compute_n0(&Dyadic::zero(), &Dyadic::from_f64(0.5).unwrap(), half, 7), 7);
        assert_eq!(
            compute_n0(&Dyadic::from_int(2), &Dyadic::from_f64(0.5).unwrap(), half, 0),
            3
        );
        assert_eq!(
            compute_n0_within(&Dyadic::pow2(40), &Dyadic::from_f64(0.5).unwrap(), half, 0, 10),
            None
        );
    }

    #[test]
    fn ratio_bound_examples() {
        let b = ratio_bound(&binet_of(&rec(&[2, -1, 1], &[4, 7, 12])), 1).unwrap();
        assert!(b.rho.to_f64() >= 0.754877666246 && b.rho.to_f64() < 0.7549);
        let b = ratio_bound(&binet_of(&rec(&[4, -2], &[5, 17])), 1).unwrap();
        assert!(b.rho.to_f64() < 0.586);
        let b = ratio_bound(&binet_of(&rec(&[2], &[1])), 1).unwrap();
        assert!(b.k.is_zero());
    }

    #[test]
    fn decide_small_cases() {
        let p = PisotParams::new(4, 7, Offset::half()).unwrap();
        let r = decide(&p, &rec(&[2, -1, 1], &[4, 7, 12]), 50_000).unwrap();
        assert!(r.verdict.is_proved(), "{:?}", r.verdict);

        let p = PisotParams::new(1, 2, Offset::half()).unwrap();
        let r = decide(&p, &rec(&[2], &[1]), 1000).unwrap();
        assert_eq!(r.verdict, Verdict::Proved { n0: 2 });

        let p = PisotParams::new(10, 219, Offset::half()).unwrap();
        let r = decide(&p, &rec(&[22, -3, 18, -11], &[10, 219, 4796, 105030]), 2000).unwrap();
        assert_eq!(r.first_failure, Some(1403));
        assert_eq!(r.predicted_breakdown, Some(1403));
    }

    #[test]
    fn end_to_end_examples() {
        let opts = DecideOptions::default();
        let p = PisotParams::new(5, 17, Offset::half()).unwrap();
        let (prefix, r) = end_to_end(&p, 12, 60, &opts).unwrap();
        assert_eq!(prefix.len(), 60);
        assert_eq!(
            r.recurrence.as_ref().unwrap().coefficients(),
            &[BigInt::from(4), BigInt::from(-2)]
        );
        assert!(r.verdict.is_proved());

        let p = PisotParams::new(1, 2, Offset::half()).unwrap();
        let (_, r) = end_to_end(&p, 12, 20, &opts).unwrap();
        assert_eq!(r.recurrence.as_ref().unwrap().coefficients(), &[BigInt::from(2)]);
        assert!(r.verdict.is_proved());
    }

    #[test]
    fn no_recurrence_is_inconclusive() {
        // E(10, 219) needs order 4.
        let p = PisotParams::new(10, 219, Offset::half()).unwrap();
        let (_, r) = end_to_end(&p, 2, 0, &DecideOptions::default()).unwrap();
        assert!(r.recurrence.is_none());
        assert_eq!(
            r.verdict,
            Verdict::Inconclusive {
                reason: InconclusiveReason::NoRecurrenceFound
            }
        );
    }

    #[test]
    fn limiting_offset_unsupported() {
        let p = PisotParams::new(4, 7, Offset::new(0, 1).unwrap()).unwrap();
        let r = decide(&p, &rec(&[2, -1, 1], &[4, 7, 12]), 100).unwrap();
        assert!(matches!(r.verdict, Verdict::Unsupported { .. }));
    }

    #[test]
    fn mismatched_initial_terms_rejected() {
        let p = PisotParams::new(4, 7, Offset::half()).unwrap();
        let err = decide(&p, &rec(&[2, -1, 1], &[4, 8, 12]), 100).unwrap_err();
        assert_eq!(err, DecisionError::InitialTermsMismatch { index: 1 });
    }

    #[test]
    fn arithmetic_progression_is_special() {
        // E(3, 4) = 3, 4, 5, ... follows b_n = 2 b_{n-1} - b_{n-2}.
        let p = PisotParams::new(3, 4, Offset::half()).unwrap();
        let r = decide(&p, &rec(&[2, -1], &[3, 4]), 500).unwrap();
        assert_eq!(
            r.verdict,
            Verdict::Inconclusive {
                reason: InconclusiveReason::UnitCircleSpecial { verified_up_to: 500 }
            }
        );
    }

    #[test]
    fn report_round_trips() {
        let p = PisotParams::new(4, 7, Offset::half()).unwrap();
        let r = decide(&p, &rec(&[2, -1, 1], &[4, 7, 12]), 50_000).unwrap();
        let text = r.to_json();
        let back: DecisionReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), text);
    }
}
