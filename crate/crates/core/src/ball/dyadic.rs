//! Exact dyadic rationals `m * 2^e`.
//!
//! Every operation here is exact except the explicitly named rounding
//! helpers, which always report (or absorb) the error they introduce.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Dyadic rational `mantissa * 2^exponent`.
///
/// Not normalized; equality and ordering compare values, not representations.
#[derive(Clone, Debug)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

fn bit_len(m: &BigInt) -> u64 {
    m.bits()
}

impl Dyadic {
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        Dyadic { mantissa, exponent }
    }

    pub fn zero() -> Self {
        Dyadic::new(BigInt::zero(), 0)
    }

    pub fn one() -> Self {
        Dyadic::new(BigInt::one(), 0)
    }

    pub fn from_int<T: Into<BigInt>>(v: T) -> Self {
        Dyadic::new(v.into(), 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic::new(BigInt::one(), e)
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let exp_bits = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if exp_bits == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_bits - 1075)
        };
        Some(Dyadic::new(BigInt::from(m) * sign, e))
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mantissa.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic::new(self.mantissa.abs(), self.exponent)
    }

    /// Exponent of the most significant bit plus one (`|x| < 2^magnitude_bits`).
    pub fn magnitude_exponent(&self) -> i64 {
        self.exponent + bit_len(&self.mantissa) as i64
    }

    pub fn to_f64(&self) -> f64 {
        if self.mantissa.is_zero() {
            return 0.0;
        }
        let bits = bit_len(&self.mantissa) as i64;
        let shift = (bits - 60).max(0);
        let m = (&self.mantissa >> shift as usize).to_f64().unwrap_or(f64::NAN);
        let e = self.exponent + shift;
        if e > 2000 {
            return m.signum() * f64::INFINITY;
        }
        if e < -2200 {
            return 0.0;
        }
        m * 2f64.powi(e as i32)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << self.exponent as usize)
        } else {
            BigRational::new(self.mantissa.clone(), BigInt::one() << (-self.exponent) as usize)
        }
    }

    /// Strips trailing zero bits from the mantissa.
    pub fn normalized(mut self) -> Self {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return self;
        }
        let tz = self.mantissa.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mantissa >>= tz as usize;
            self.exponent += tz as i64;
        }
        self
    }

    fn aligned(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt, i64) {
        match a.exponent.cmp(&b.exponent) {
            Ordering::Equal => (a.mantissa.clone(), b.mantissa.clone(), a.exponent),
            Ordering::Greater => (
                &a.mantissa << (a.exponent - b.exponent) as usize,
                b.mantissa.clone(),
                b.exponent,
            ),
            Ordering::Less => (
                a.mantissa.clone(),
                &b.mantissa << (b.exponent - a.exponent) as usize,
                a.exponent,
            ),
        }
    }

    /// Truncates toward zero to at most `prec` significant bits.
    ///
    /// Returns the rounded value and, when bits were dropped, the ulp that
    /// strictly bounds the error.
    pub fn truncate(&self, prec: u64) -> (Dyadic, Option<Dyadic>) {
        let bits = bit_len(&self.mantissa);
        if bits <= prec {
            return (self.clone(), None);
        }
        let shift = bits - prec;
        let neg = self.mantissa.is_negative();
        let mag = self.mantissa.magnitude() >> shift as usize;
        let m = if neg { -BigInt::from(mag) } else { BigInt::from(mag) };
        let e = self.exponent + shift as i64;
        (Dyadic::new(m, e), Some(Dyadic::pow2(e)))
    }

    /// Upper bound of `|self|` with at most `prec` significant bits.
    pub fn abs_up(&self, prec: u64) -> Dyadic {
        let a = self.abs();
        match a.truncate(prec) {
            (t, None) => t,
            (t, Some(ulp)) => &t + &ulp,
        }
    }

    /// Lower bound of `|self|` with at most `prec` significant bits.
    pub fn abs_down(&self, prec: u64) -> Dyadic {
        self.abs().truncate(prec).0
    }

    /// `a / b` truncated toward zero with about `prec` bits; error below one
    /// returned ulp.
    pub fn div_trunc(a: &Dyadic, b: &Dyadic, prec: u64) -> (Dyadic, Dyadic) {
        assert!(!b.is_zero(), "dyadic division by zero");
        let shift = (prec as i64 + bit_len(&b.mantissa) as i64 - bit_len(&a.mantissa) as i64 + 2).max(0);
        let num = &a.mantissa << shift as usize;
        // BigInt `/` truncates toward zero.
        let q = num / &b.mantissa;
        let e = a.exponent - b.exponent - shift;
        (Dyadic::new(q, e), Dyadic::pow2(e))
    }

    /// Upper bound of `a / b` for `a >= 0`, `b > 0`.
    pub fn div_up(a: &Dyadic, b: &Dyadic, prec: u64) -> Dyadic {
        let (q, ulp) = Dyadic::div_trunc(a, b, prec);
        &q + &ulp
    }

    /// Lower bound of `a / b` for `a >= 0`, `b > 0`.
    pub fn div_down(a: &Dyadic, b: &Dyadic, prec: u64) -> Dyadic {
        Dyadic::div_trunc(a, b, prec).0
    }

    /// Bounds `(lo, hi)` with `lo <= sqrt(self) <= hi` for `self >= 0`,
    /// each with about `prec` bits.
    pub fn sqrt_bounds(&self, prec: u64) -> (Dyadic, Dyadic) {
        assert!(!self.mantissa.is_negative(), "sqrt of negative dyadic");
        if self.mantissa.is_zero() {
            return (Dyadic::zero(), Dyadic::zero());
        }
        let m = self.mantissa.magnitude().clone();
        let want = 2 * prec + 4;
        let bits = m.bits();
        // Pick t so that the working mantissa has ~`want` bits and e - t is even.
        let mut t = bits as i64 - want as i64;
        if (self.exponent + t).rem_euclid(2) != 0 {
            t += 1;
        }
        let (lo_m, hi_m): (BigUint, BigUint) = if t >= 0 {
            let lo = &m >> t as usize;
            let exact = (&lo << t as usize) == m;
            let hi = if exact { lo.clone() } else { &lo + 1u32 };
            (lo, hi)
        } else {
            let s = &m << (-t) as usize;
            (s.clone(), s)
        };
        let e = (self.exponent + t) / 2;
        let lo_root = lo_m.sqrt();
        let hi_root = {
            let r = hi_m.sqrt();
            if &r * &r == hi_m {
                r
            } else {
                r + 1u32
            }
        };
        (
            Dyadic::new(BigInt::from(lo_root), e),
            Dyadic::new(BigInt::from(hi_root), e),
        )
    }

    pub fn max(a: &Dyadic, b: &Dyadic) -> Dyadic {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn pow(&self, n: u64) -> Dyadic {
        Dyadic::new(num_traits::pow::Pow::pow(&self.mantissa, n), self.exponent * n as i64)
    }

    /// Exact decimal expansion (dyadics always terminate in base 10).
    pub fn to_decimal_string(&self) -> String {
        let d = self.clone().normalized();
        if d.exponent >= 0 {
            return (&d.mantissa << d.exponent as usize).to_string();
        }
        let k = (-d.exponent) as u32;
        // m / 2^k = m * 5^k / 10^k
        let scaled = d.mantissa.abs() * num_traits::pow::Pow::pow(BigInt::from(5), k);
        let digits = scaled.to_string();
        let k = k as usize;
        let (int_part, frac_part) = if digits.len() > k {
            let (a, b) = digits.split_at(digits.len() - k);
            (a.to_string(), b.to_string())
        } else {
            ("0".to_string(), format!("{}{}", "0".repeat(k - digits.len()), digits))
        };
        let sign = if d.mantissa.is_negative() { "-" } else { "" };
        format!("{sign}{int_part}.{frac_part}")
    }

    /// Parses the output of [`Dyadic::to_decimal_string`]; fails when the
    /// decimal is not dyadic.
    pub fn from_decimal_str(s: &str) -> Option<Dyadic> {
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((a, b)) => (a, b),
            None => (body, ""),
        };
        let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
        let k = frac_part.len() as u32;
        // value = digits / 10^k = digits / (2^k 5^k); need 5^k | digits
        let five_k = num_traits::pow::Pow::pow(BigInt::from(5), k);
        let (q, r) = digits.div_rem(&five_k);
        if !r.is_zero() {
            return None;
        }
        let m = if neg { -q } else { q };
        Some(Dyadic::new(m, -(k as i64)).normalized())
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Dyadic {}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let sa = self.signum();
        let sb = other.signum();
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        // Same sign: compare magnitudes by leading bit first.
        let ma = self.magnitude_exponent();
        let mb = other.magnitude_exponent();
        let mag = if ma != mb {
            ma.cmp(&mb)
        } else {
            let (a, b, _) = Dyadic::aligned(&self.abs(), &other.abs());
            a.cmp(&b)
        };
        if sa > 0 {
            mag
        } else {
            mag.reverse()
        }
    }
}

impl<'a> Add<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &'a Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (a, b, e) = Dyadic::aligned(self, rhs);
        Dyadic::new(a + b, e)
    }
}

impl<'a> Sub<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &'a Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Dyadic> for &'a Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &'a Dyadic) -> Dyadic {
        Dyadic::new(&self.mantissa * &rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic::new(-&self.mantissa, self.exponent)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic::new(-self.mantissa, self.exponent)
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_int(v)
    }
}

impl From<&BigInt> for Dyadic {
    fn from(v: &BigInt) -> Self {
        Dyadic::new(v.clone(), 0)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

impl serde::Serialize for Dyadic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_decimal_string())
    }
}

impl<'de> serde::Deserialize<'de> for Dyadic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Dyadic::from_decimal_str(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("not a terminating binary fraction: {s}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: f64) -> Dyadic {
        Dyadic::from_f64(v).unwrap()
    }

    #[test]
    fn ordering_across_exponents() {
        assert!(d(0.5) < d(0.75));
        assert!(d(-3.0) < d(-2.5));
        assert!(d(-0.0) == Dyadic::zero());
        assert_eq!(Dyadic::new(4.into(), -2), Dyadic::one());
    }

    #[test]
    fn decimal_round_trip() {
        for v in [0.0, 1.0, -2.5, 0.1, 1e-20, 123456.789] {
            let x = d(v);
            let s = x.to_decimal_string();
            assert_eq!(Dyadic::from_decimal_str(&s).unwrap(), x, "{s}");
        }
        assert_eq!(d(0.375).to_decimal_string(), "0.375");
        assert_eq!(d(-8.0).to_decimal_string(), "-8");
        assert!(Dyadic::from_decimal_str("0.1").is_none());
    }

    #[test]
    fn sqrt_brackets() {
        for v in [2.0, 0.5, 1e-30, 12345.678, 4.0] {
            let (lo, hi) = d(v).sqrt_bounds(80);
            assert!(&lo * &lo <= d(v));
            assert!(&hi * &hi >= d(v));
            assert!((hi.to_f64() - lo.to_f64()) <= 1e-20 * v.sqrt().max(1.0));
        }
        let (lo, hi) = d(4.0).sqrt_bounds(30);
        assert_eq!(lo, d(2.0));
        assert_eq!(hi, d(2.0));
    }

    #[test]
    fn division_brackets() {
        let a = d(1.0);
        let b = d(3.0);
        let lo = Dyadic::div_down(&a, &b, 64);
        let hi = Dyadic::div_up(&a, &b, 64);
        assert!(&lo * &b <= a);
        assert!(&hi * &b >= a);
        assert!(hi.to_f64() - lo.to_f64() < 1e-18);
    }

    #[test]
    fn truncation_error_is_bounded() {
        let x = Dyadic::new(BigInt::from(0b1011_0111), -3);
        let (t, err) = x.truncate(4);
        let err = err.unwrap();
        assert!((&x - &t).abs() < err);
        assert!(x.abs_up(4) >= x.abs());
        assert!(x.abs_down(4) <= x.abs());
    }
}
