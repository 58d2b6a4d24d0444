//! Midpoint-radius complex ball arithmetic over dyadic rationals.
//!
//! A [`CBall`] is the closed disk `{ z : |z - mid| <= rad }`. Every operation
//! returns a ball containing all results of applying the exact operation to
//! members of its inputs. Midpoints are truncated to the working precision and
//! the truncation error is folded into the radius; radii are kept at
//! [`RAD_BITS`] significant bits and always rounded up.

mod dyadic;

pub use dyadic::Dyadic;

use num_bigint::BigInt;

/// Significant bits kept in radii and magnitude bounds.
pub const RAD_BITS: u64 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CBall {
    pub re: Dyadic,
    pub im: Dyadic,
    pub rad: Dyadic,
}

fn up(x: &Dyadic) -> Dyadic {
    x.abs_up(RAD_BITS)
}

impl CBall {
    pub fn exact(re: Dyadic, im: Dyadic) -> Self {
        CBall {
            re,
            im,
            rad: Dyadic::zero(),
        }
    }

    pub fn real(re: Dyadic) -> Self {
        CBall::exact(re, Dyadic::zero())
    }

    pub fn from_int(v: &BigInt) -> Self {
        CBall::real(Dyadic::from(v))
    }

    pub fn zero() -> Self {
        CBall::real(Dyadic::zero())
    }

    pub fn one() -> Self {
        CBall::real(Dyadic::one())
    }

    pub fn with_radius(mut self, rad: Dyadic) -> Self {
        self.rad = up(&rad);
        self
    }

    /// Truncates the midpoint to `prec` bits, absorbing the error.
    fn rounded(re: Dyadic, im: Dyadic, rad: Dyadic, prec: u64) -> Self {
        let (re, e1) = re.truncate(prec);
        let (im, e2) = im.truncate(prec);
        let mut rad = rad;
        if let Some(e) = e1 {
            rad = &rad + &e;
        }
        if let Some(e) = e2 {
            rad = &rad + &e;
        }
        CBall { re, im, rad: up(&rad) }
    }

    pub fn conj(&self) -> Self {
        CBall {
            re: self.re.clone(),
            im: -&self.im,
            rad: self.rad.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        CBall {
            re: -&self.re,
            im: -&self.im,
            rad: self.rad.clone(),
        }
    }

    pub fn add(&self, o: &CBall, prec: u64) -> Self {
        CBall::rounded(&self.re + &o.re, &self.im + &o.im, &self.rad + &o.rad, prec)
    }

    pub fn sub(&self, o: &CBall, prec: u64) -> Self {
        CBall::rounded(&self.re - &o.re, &self.im - &o.im, &self.rad + &o.rad, prec)
    }

    pub fn mul(&self, o: &CBall, prec: u64) -> Self {
        let re = &(&self.re * &o.re) - &(&self.im * &o.im);
        let im = &(&self.re * &o.im) + &(&self.im * &o.re);
        let a = self.center_mag_upper();
        let b = o.center_mag_upper();
        let rad = &(&(&a * &o.rad) + &(&b * &self.rad)) + &(&self.rad * &o.rad);
        CBall::rounded(re, im, rad, prec)
    }

    /// Multiplication by an exact integer.
    pub fn scale(&self, k: &BigInt, prec: u64) -> Self {
        let kd = Dyadic::from(k);
        CBall::rounded(&self.re * &kd, &self.im * &kd, &self.rad * &kd.abs(), prec)
    }

    pub fn sqr(&self, prec: u64) -> Self {
        self.mul(self, prec)
    }

    pub fn pow(&self, mut n: u64, prec: u64) -> Self {
        let mut base = self.clone();
        let mut acc = CBall::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base, prec);
            }
            n >>= 1;
            if n > 0 {
                base = base.sqr(prec);
            }
        }
        acc
    }

    /// `1 / self`, or `None` when the ball may contain zero.
    pub fn inv(&self, prec: u64) -> Option<Self> {
        let lower = self.center_mag_lower();
        if lower <= self.rad {
            return None;
        }
        let d = &(&self.re * &self.re) + &(&self.im * &self.im);
        let (qr, e1) = Dyadic::div_trunc(&self.re, &d, prec);
        let (qi, e2) = Dyadic::div_trunc(&-&self.im, &d, prec);
        // |1/(c + h) - 1/c| <= r / (|c| (|c| - r))
        let gap = &lower - &self.rad;
        let den = &lower * &gap;
        let mut rad = if self.rad.is_zero() {
            Dyadic::zero()
        } else {
            Dyadic::div_up(&self.rad, &den, RAD_BITS)
        };
        rad = &(&rad + &e1) + &e2;
        Some(CBall::rounded(qr, qi, rad, prec))
    }

    pub fn div(&self, o: &CBall, prec: u64) -> Option<Self> {
        Some(self.mul(&o.inv(prec)?, prec))
    }

    /// Upper bound on `|mid|`.
    pub fn center_mag_upper(&self) -> Dyadic {
        let a = self.re.abs_up(RAD_BITS);
        let b = self.im.abs_up(RAD_BITS);
        let s = &(&a * &a) + &(&b * &b);
        s.sqrt_bounds(RAD_BITS).1
    }

    /// Lower bound on `|mid|`.
    pub fn center_mag_lower(&self) -> Dyadic {
        let a = self.re.abs_down(RAD_BITS);
        let b = self.im.abs_down(RAD_BITS);
        let s = &(&a * &a) + &(&b * &b);
        s.sqrt_bounds(RAD_BITS).0
    }

    /// Upper bound on `|z|` over the ball.
    pub fn mag_upper(&self) -> Dyadic {
        up(&(&self.center_mag_upper() + &self.rad))
    }

    /// Lower bound on `|z|` over the ball (zero if the ball touches zero).
    pub fn mag_lower(&self) -> Dyadic {
        let l = &self.center_mag_lower() - &self.rad;
        if l.signum() <= 0 {
            Dyadic::zero()
        } else {
            l.abs_down(RAD_BITS)
        }
    }

    /// Modulus bounds with `prec` bits on the center magnitude.
    pub fn mag_bounds(&self, prec: u64) -> (Dyadic, Dyadic) {
        let s = &(&self.re * &self.re) + &(&self.im * &self.im);
        let (lo, hi) = s.sqrt_bounds(prec);
        let lo = &lo - &self.rad;
        let lo = if lo.signum() < 0 { Dyadic::zero() } else { lo };
        (lo, &hi + &self.rad)
    }

    pub fn excludes_zero(&self) -> bool {
        self.mag_lower().signum() > 0
    }

    /// Does the disk contain the given complex point?
    pub fn contains(&self, re: &Dyadic, im: &Dyadic) -> bool {
        let dr = &self.re - re;
        let di = &self.im - im;
        let d2 = &(&dr * &dr) + &(&di * &di);
        d2 <= &self.rad * &self.rad
    }

    pub fn contains_int(&self, v: &BigInt) -> bool {
        self.contains(&Dyadic::from(v), &Dyadic::zero())
    }

    /// Interval `[re - rad, re + rad]` enclosing the real part.
    pub fn real_interval(&self) -> (Dyadic, Dyadic) {
        (&self.re - &self.rad, &self.re + &self.rad)
    }

    pub fn approx(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

/// Plain complex number with dyadic parts, used for approximate iteration.
/// Operations truncate to the requested precision and track no error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CApprox {
    pub re: Dyadic,
    pub im: Dyadic,
}

impl CApprox {
    pub fn new(re: Dyadic, im: Dyadic) -> Self {
        CApprox { re, im }
    }

    fn trunc(re: Dyadic, im: Dyadic, prec: u64) -> Self {
        CApprox {
            re: re.truncate(prec).0,
            im: im.truncate(prec).0,
        }
    }

    pub fn add(&self, o: &CApprox, prec: u64) -> Self {
        CApprox::trunc(&self.re + &o.re, &self.im + &o.im, prec)
    }

    pub fn sub(&self, o: &CApprox, prec: u64) -> Self {
        CApprox::trunc(&self.re - &o.re, &self.im - &o.im, prec)
    }

    pub fn mul(&self, o: &CApprox, prec: u64) -> Self {
        CApprox::trunc(
            &(&self.re * &o.re) - &(&self.im * &o.im),
            &(&self.re * &o.im) + &(&self.im * &o.re),
            prec,
        )
    }

    pub fn div(&self, o: &CApprox, prec: u64) -> Option<Self> {
        let d = &(&o.re * &o.re) + &(&o.im * &o.im);
        if d.is_zero() {
            return None;
        }
        let nr = &(&self.re * &o.re) + &(&self.im * &o.im);
        let ni = &(&self.im * &o.re) - &(&self.re * &o.im);
        Some(CApprox {
            re: Dyadic::div_trunc(&nr, &d, prec).0,
            im: Dyadic::div_trunc(&ni, &d, prec).0,
        })
    }

    pub fn norm_sqr(&self) -> Dyadic {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn as_ball(&self) -> CBall {
        CBall::exact(self.re.clone(), self.im.clone())
    }
}
