//! Certified root enclosures for monic integer polynomials and the
//! classification of a spectrum against the unit circle.
//!
//! Roots are approximated by simultaneous iteration (Aberth in `f64` to seed,
//! then Durand–Kerner in dyadic arithmetic). Certification is a posteriori:
//! with Weierstrass corrections `W_i = p(z_i) / prod_{j != i} (z_i - z_j)`
//! evaluated in ball arithmetic, the disks `|z - z_i| <= k |W_i|` cover all
//! roots and every connected component of `m` disks holds exactly `m` roots.
//! Pairwise disjoint disks therefore isolate one root each. A disk centred on
//! the real axis that isolates one root of a real polynomial isolates a real
//! root.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ball::{CApprox, CBall, Dyadic};
use crate::poly::{primitive_part, CharPoly};

/// First precision tried by [`classify_adaptive`].
pub const START_BITS: u64 = 128;
/// Precision ceiling for [`classify_adaptive`].
pub const PRECISION_CAP: u64 = 16_384;

/// Extra working bits carried during iteration and certification.
const GUARD_BITS: u64 = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootError {
    #[error("polynomial has repeated roots; gcd with derivative is {gcd:?}")]
    RepeatedRoots { gcd: Vec<BigInt> },
    #[error("could not certify disjoint root disks at {bits} bits")]
    PrecisionExhausted { bits: u64 },
}

/// A disk containing exactly one root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootEnclosure {
    pub center_re: Dyadic,
    pub center_im: Dyadic,
    pub radius: Dyadic,
    /// Shared by the two members of a complex-conjugate pair.
    pub conjugate_pair_id: Option<usize>,
    /// Rigorous bounds on the modulus of the enclosed root.
    pub modulus_lower: Dyadic,
    pub modulus_upper: Dyadic,
}

impl RootEnclosure {
    fn new(center: CApprox, radius: Dyadic, prec: u64) -> Self {
        let ball = CBall::exact(center.re.clone(), center.im.clone()).with_radius(radius);
        let (lo, hi) = ball.mag_bounds(prec);
        RootEnclosure {
            center_re: center.re,
            center_im: center.im,
            radius: ball.rad,
            conjugate_pair_id: None,
            modulus_lower: lo,
            modulus_upper: hi,
        }
    }

    pub fn ball(&self) -> CBall {
        CBall::exact(self.center_re.clone(), self.center_im.clone()).with_radius(self.radius.clone())
    }

    /// The enclosed root is real (the disk is symmetric about the real axis).
    pub fn is_real(&self) -> bool {
        self.center_im.is_zero()
    }

    pub fn contains(&self, re: f64, im: f64) -> bool {
        match (Dyadic::from_f64(re), Dyadic::from_f64(im)) {
            (Some(r), Some(i)) => self.ball().contains(&r, &i),
            _ => false,
        }
    }

    pub fn approx(&self) -> (f64, f64) {
        (self.center_re.to_f64(), self.center_im.to_f64())
    }

    pub fn to_json(&self) -> EnclosureJson {
        EnclosureJson {
            center_re: self.center_re.to_decimal_string(),
            center_im: self.center_im.to_decimal_string(),
            radius: self.radius.to_decimal_string(),
            conjugate_pair_id: self.conjugate_pair_id,
        }
    }
}

/// Wire form of an enclosure: exact decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnclosureJson {
    pub center_re: String,
    pub center_im: String,
    pub radius: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugate_pair_id: Option<usize>,
}

/// `log2 |z|`, roughly; `i64::MIN` for zero.
fn mag_log2(z: &CApprox) -> i64 {
    let f = |d: &Dyadic| {
        if d.is_zero() {
            i64::MIN
        } else {
            d.magnitude_exponent()
        }
    };
    f(&z.re).max(f(&z.im))
}

fn aberth_f64(poly: &CharPoly) -> Option<Vec<(f64, f64)>> {
    let c: Vec<f64> = poly.coeffs().iter().map(|v| v.to_f64()).collect::<Option<_>>()?;
    if c.iter().any(|v| !v.is_finite() || v.abs() > 1e150) {
        return None;
    }
    let k = poly.degree();
    // Fujiwara-style radius for the starting circle.
    let rad = (0..k)
        .map(|i| (c[i].abs()).powf(1.0 / (k - i) as f64))
        .fold(0.0f64, f64::max)
        .max(1e-3)
        * 2.0;
    type C = (f64, f64);
    let mul = |a: C, b: C| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    let div = |a: C, b: C| {
        let d = b.0 * b.0 + b.1 * b.1;
        ((a.0 * b.0 + a.1 * b.1) / d, (a.1 * b.0 - a.0 * b.1) / d)
    };
    let mut z: Vec<C> = (0..k)
        .map(|i| {
            let t = std::f64::consts::TAU * (i as f64 + 0.4) / k as f64 + 0.3;
            (rad * t.cos(), rad * t.sin())
        })
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..k {
            let (mut p, mut dp) = ((0.0, 0.0), (0.0, 0.0));
            for &ci in c.iter().rev() {
                dp = mul(dp, z[i]);
                dp = (dp.0 + p.0, dp.1 + p.1);
                p = mul(p, z[i]);
                p.0 += ci;
            }
            if p == (0.0, 0.0) {
                continue;
            }
            let ratio = div(p, dp);
            let mut sum = (0.0, 0.0);
            for j in 0..k {
                if j != i {
                    let inv = div((1.0, 0.0), (z[i].0 - z[j].0, z[i].1 - z[j].1));
                    sum = (sum.0 + inv.0, sum.1 + inv.1);
                }
            }
            let den = (1.0 - mul(ratio, sum).0, -mul(ratio, sum).1);
            let step = div(ratio, den);
            if !step.0.is_finite() || !step.1.is_finite() {
                return None;
            }
            z[i] = (z[i].0 - step.0, z[i].1 - step.1);
            let scale = (z[i].0.hypot(z[i].1)).max(1.0);
            moved = moved.max(step.0.hypot(step.1) / scale);
        }
        if moved < 1e-15 {
            break;
        }
    }
    Some(z)
}

/// One Gauss–Seidel sweep of Durand–Kerner; returns the largest correction's
/// `log2` relative to its root.
fn dk_sweep(poly: &CharPoly, z: &mut [CApprox], prec: u64) -> Option<i64> {
    let k = z.len();
    let mut worst = i64::MIN;
    for i in 0..k {
        let num = poly.eval_approx(&z[i], prec);
        if num.re.is_zero() && num.im.is_zero() {
            continue;
        }
        let mut den = CApprox::new(Dyadic::one(), Dyadic::zero());
        for j in 0..k {
            if j != i {
                den = den.mul(&z[i].sub(&z[j], prec), prec);
            }
        }
        let w = num.div(&den, prec)?;
        let rel = mag_log2(&w).saturating_sub(mag_log2(&z[i]).max(1));
        worst = worst.max(rel);
        z[i] = z[i].sub(&w, prec);
    }
    Some(worst)
}

fn approximate_roots(poly: &CharPoly, prec: u64) -> Option<Vec<CApprox>> {
    let k = poly.degree();
    let mut z: Vec<CApprox> = match aberth_f64(poly) {
        Some(seed) => seed
            .into_iter()
            .map(|(re, im)| Some(CApprox::new(Dyadic::from_f64(re)?, Dyadic::from_f64(im)?)))
            .collect::<Option<_>>()?,
        None => {
            let r = poly.cauchy_bound().to_f64().unwrap_or(1e300).min(1e300);
            (0..k)
                .map(|i| {
                    let t = std::f64::consts::TAU * (i as f64 + 0.4) / k as f64 + 0.3;
                    CApprox::new(
                        Dyadic::from_f64(r * t.cos()).unwrap(),
                        Dyadic::from_f64(r * t.sin()).unwrap(),
                    )
                })
                .collect()
        }
    };
    // Low precision first: the linear phase of convergence is cheap there.
    let low = prec.min(96);
    for _ in 0..2000 {
        let worst = dk_sweep(poly, &mut z, low)?;
        if worst <= -(low as i64) + 8 {
            break;
        }
    }
    for _ in 0..200 {
        let worst = dk_sweep(poly, &mut z, prec)?;
        if worst <= -(prec as i64) + 4 {
            break;
        }
    }
    Some(z)
}

/// Puts near-real approximations on the real axis and makes complex ones
/// exact conjugate pairs. Returns the pair index for each root.
fn symmetrize(z: &mut [CApprox], prec: u64) -> Option<Vec<Option<usize>>> {
    let k = z.len();
    for w in z.iter_mut() {
        if w.im.is_zero() {
            continue;
        }
        let scale = mag_log2(w).max(1);
        if w.im.magnitude_exponent() < scale - (prec as i64) / 2 {
            w.im = Dyadic::zero();
        }
    }
    let mut pair = vec![None; k];
    let upper: Vec<usize> = (0..k).filter(|&i| z[i].im.signum() > 0).collect();
    let mut lower: Vec<usize> = (0..k).filter(|&i| z[i].im.signum() < 0).collect();
    if upper.len() != lower.len() {
        return None;
    }
    for (id, &i) in upper.iter().enumerate() {
        let target = CApprox::new(z[i].re.clone(), -&z[i].im);
        let (pos, _) = lower.iter().enumerate().min_by(|a, b| {
            let da = z[*a.1].sub(&target, prec).norm_sqr();
            let db = z[*b.1].sub(&target, prec).norm_sqr();
            da.cmp(&db)
        })?;
        let j = lower.swap_remove(pos);
        z[j] = target;
        pair[i] = Some(id);
        pair[j] = Some(id);
    }
    Some(pair)
}

/// Certified enclosures of all roots of a square-free monic polynomial,
/// sorted by decreasing modulus upper bound (conjugate pairs: upper half-plane
/// first).
pub fn certify_roots(poly: &CharPoly, precision_bits: u64) -> Result<Vec<RootEnclosure>, RootError> {
    if !poly.is_square_free() {
        return Err(RootError::RepeatedRoots {
            gcd: primitive_part(&poly.gcd_with_derivative()),
        });
    }
    let k = poly.degree();
    let prec = precision_bits.max(16);
    let fail = || RootError::PrecisionExhausted { bits: prec };
    if k == 1 {
        let root = CApprox::new(Dyadic::from(&-&poly.coeffs()[0]), Dyadic::zero());
        return Ok(vec![RootEnclosure::new(root, Dyadic::zero(), prec)]);
    }
    let wp = prec + GUARD_BITS;
    let mut z = approximate_roots(poly, wp).ok_or_else(fail)?;
    for w in z.iter_mut() {
        w.re = w.re.truncate(wp).0.normalized();
        w.im = w.im.truncate(wp).0.normalized();
    }
    let pair = symmetrize(&mut z, wp).ok_or_else(fail)?;

    let degree = Dyadic::from_int(k as i64);
    let mut radii = Vec::with_capacity(k);
    for i in 0..k {
        let zi = z[i].as_ball();
        let num = poly.eval_ball(&zi, wp);
        let mut den = CBall::one();
        for (j, zj) in z.iter().enumerate() {
            if j != i {
                den = den.mul(&zi.sub(&zj.as_ball(), wp), wp);
            }
        }
        let w = num.div(&den, wp).ok_or_else(fail)?;
        radii.push(&degree * &w.mag_upper());
    }
    // Conjugate partners get the same radius.
    for i in 0..k {
        if let Some(id) = pair[i] {
            if let Some(j) = (0..k).find(|&j| j != i && pair[j] == Some(id)) {
                let m = Dyadic::max(&radii[i], &radii[j]);
                radii[i] = m.clone();
                radii[j] = m;
            }
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            let d2 = z[i].sub(&z[j], u64::MAX).norm_sqr();
            let r = &radii[i] + &radii[j];
            if d2 <= &r * &r {
                return Err(fail());
            }
        }
    }
    let mut out: Vec<RootEnclosure> = z
        .into_iter()
        .zip(radii)
        .zip(pair)
        .map(|((c, r), p)| {
            let mut e = RootEnclosure::new(c, r, prec);
            e.conjugate_pair_id = p;
            e
        })
        .collect();
    out.sort_by(|a, b| {
        b.modulus_upper
            .cmp(&a.modulus_upper)
            .then_with(|| b.center_im.cmp(&a.center_im))
    });
    // Renumber pair ids in output order.
    let mut remap = std::collections::HashMap::new();
    for e in out.iter_mut() {
        if let Some(id) = e.conjugate_pair_id {
            let n = remap.len();
            e.conjugate_pair_id = Some(*remap.entry(id).or_insert(n));
        }
    }
    Ok(out)
}

/// Shape of the spectrum relative to the unit circle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectrumKind {
    /// One real root `> 1`, every other root strictly inside the unit circle
    /// (for order `s`: the `(s+1)`-st largest modulus is `< 1`).
    DominantContracting,
    /// A real dominant root `> 1` and at least one more root strictly outside.
    SecondRootOutside,
    /// The polynomial is exactly `(t - 1)^2`.
    UnitCircleSpecial,
    /// Some modulus comparisons are undecided at the current precision.
    Ambiguous { straddling: Vec<usize> },
    /// Certified to lack the required shape, e.g. no real positive dominant root.
    NotPisotLike { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spectrum {
    pub kind: SpectrumKind,
    /// Sorted by decreasing modulus upper bound; empty for `UnitCircleSpecial`.
    pub roots: Vec<RootEnclosure>,
    pub precision_bits: u64,
}

impl Spectrum {
    pub fn dominant(&self) -> Option<&RootEnclosure> {
        self.roots.first()
    }

    /// Modulus bounds of the second root, when there is one.
    pub fn second_modulus(&self) -> Option<(Dyadic, Dyadic)> {
        self.roots
            .get(1)
            .map(|e| (e.modulus_lower.clone(), e.modulus_upper.clone()))
    }

    /// Modulus bounds of the `(s+1)`-st root.
    pub fn modulus_after(&self, s: usize) -> Option<(Dyadic, Dyadic)> {
        self.roots
            .get(s)
            .map(|e| (e.modulus_lower.clone(), e.modulus_upper.clone()))
    }
}

fn straddles_one(e: &RootEnclosure) -> bool {
    let one = Dyadic::one();
    e.modulus_lower <= one && e.modulus_upper >= one
}

/// Classifies sorted, certified enclosures for order `s`.
pub fn classify_spectrum(enclosures: &[RootEnclosure], s: usize) -> SpectrumKind {
    let one = Dyadic::one();
    let Some(dom) = enclosures.first() else {
        return SpectrumKind::NotPisotLike {
            reason: "empty spectrum".into(),
        };
    };
    if s <= 1 {
        let rest = &enclosures[1..];
        let separated = rest.iter().all(|e| e.modulus_upper < dom.modulus_lower);
        let real_positive = dom.is_real() && dom.center_re > dom.radius;
        if separated && real_positive && dom.modulus_lower > one {
            if rest.iter().all(|e| e.modulus_upper < one) {
                return SpectrumKind::DominantContracting;
            }
            if rest.iter().any(|e| e.modulus_lower > one) {
                return SpectrumKind::SecondRootOutside;
            }
            return SpectrumKind::Ambiguous {
                straddling: (1..enclosures.len())
                    .filter(|&i| straddles_one(&enclosures[i]))
                    .collect(),
            };
        }
        // Undecided ordering or a dominant disk touching the unit circle.
        let mut straddling: Vec<usize> = (0..enclosures.len())
            .filter(|&i| straddles_one(&enclosures[i]))
            .collect();
        if !separated {
            straddling.extend((1..enclosures.len()).filter(|&i| enclosures[i].modulus_upper >= dom.modulus_lower));
            straddling.sort_unstable();
            straddling.dedup();
            if !dom.is_real()
                && rest
                    .iter()
                    .all(|e| e.modulus_upper < dom.modulus_lower || e.conjugate_pair_id == dom.conjugate_pair_id)
            {
                return SpectrumKind::NotPisotLike {
                    reason: "dominant roots form a complex-conjugate pair".into(),
                };
            }
            return SpectrumKind::Ambiguous { straddling };
        }
        if !real_positive {
            return SpectrumKind::NotPisotLike {
                reason: "dominant root is not real and positive".into(),
            };
        }
        if dom.modulus_upper < one {
            return SpectrumKind::NotPisotLike {
                reason: "every root lies inside the unit circle".into(),
            };
        }
        return SpectrumKind::Ambiguous { straddling };
    }
    // Order s: roots s+1, s+2, ... must lie inside, strictly separated from the top s.
    let Some(next) = enclosures.get(s) else {
        return SpectrumKind::DominantContracting;
    };
    let top = &enclosures[s - 1];
    if next.modulus_upper < one && top.modulus_lower > next.modulus_upper {
        return SpectrumKind::DominantContracting;
    }
    if next.modulus_lower > one {
        return SpectrumKind::SecondRootOutside;
    }
    let mut straddling: Vec<usize> = (s..enclosures.len())
        .filter(|&i| straddles_one(&enclosures[i]))
        .collect();
    if top.modulus_lower <= next.modulus_upper {
        straddling.push(s - 1);
    }
    if straddling.is_empty() && next.modulus_upper < one {
        return SpectrumKind::NotPisotLike {
            reason: format!("root {} and {} are not separated in modulus", s, s + 1),
        };
    }
    straddling.sort_unstable();
    SpectrumKind::Ambiguous { straddling }
}

/// Certifies and classifies, doubling precision from `start` until the
/// classification is decided or `cap` is reached.
pub fn classify_adaptive(poly: &CharPoly, s: usize, start: u64, cap: u64) -> Result<Spectrum, RootError> {
    if poly.is_t_minus_one_squared() {
        return Ok(Spectrum {
            kind: SpectrumKind::UnitCircleSpecial,
            roots: Vec::new(),
            precision_bits: 0,
        });
    }
    let mut bits = start.max(16);
    let mut last = None;
    loop {
        match certify_roots(poly, bits) {
            Ok(roots) => {
                let kind = classify_spectrum(&roots, s);
                let done = !matches!(kind, SpectrumKind::Ambiguous { .. });
                let spec = Spectrum {
                    kind,
                    roots,
                    precision_bits: bits,
                };
                if done {
                    return Ok(spec);
                }
                last = Some(spec);
            }
            Err(e @ RootError::RepeatedRoots { .. }) => return Err(e),
            Err(RootError::PrecisionExhausted { .. }) => {}
        }
        if bits >= cap {
            return last.ok_or(RootError::PrecisionExhausted { bits });
        }
        bits = (bits * 2).min(cap);
    }
}

/// True when some root may lie exactly on the unit circle: `p` shares a
/// factor with its reversal.
pub fn may_have_unit_modulus_root(poly: &CharPoly) -> bool {
    poly.gcd_with_reciprocal().len() > 1
}
