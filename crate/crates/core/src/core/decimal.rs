//! Fixed-point numbers with a configurable number of significant decimal digits.
//!
//! A [`Decimal`] is an integer mantissa scaled by `2^-bits`. The scale is
//! chosen from the requested decimal digit count plus guard bits, so every
//! value carries at least that many correct decimal places after the point.
//! Multiplication and division round to nearest. All values created through
//! one [`DecimalContext`] share a scale; mixing scales is allowed and the
//! result takes the finer one.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Bits carried beyond the requested decimal digits.
const GUARD_BITS: u32 = 48;

/// Precision context: the number of decimal digits and the derived binary scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecimalContext {
    digits: u32,
    bits: u32,
}

impl DecimalContext {
    /// Context holding `digits` decimal digits after the point.
    pub fn new(digits: u32) -> Self {
        let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + GUARD_BITS;
        DecimalContext { digits, bits }
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// A context with `extra` more digits, used for intermediate work.
    pub fn widened(&self, extra: u32) -> Self {
        DecimalContext::new(self.digits + extra)
    }

    /// Tolerance `10^-(digits - slack)` as a decimal in this context.
    pub fn epsilon(&self, slack: u32) -> Decimal {
        let e = self.digits.saturating_sub(slack);
        let ten = BigInt::from(10u32);
        self.from_ratio(&BigInt::one(), &num_traits::pow(ten, e as usize))
    }

    pub fn zero(&self) -> Decimal {
        Decimal { mant: BigInt::zero(), bits: self.bits }
    }

    pub fn one(&self) -> Decimal {
        Decimal { mant: BigInt::one() << self.bits, bits: self.bits }
    }

    pub fn from_i64(&self, v: i64) -> Decimal {
        Decimal { mant: BigInt::from(v) << self.bits, bits: self.bits }
    }

    /// Exact binary value of an f64, rounded to the context scale.
    pub fn from_f64(&self, v: f64) -> Decimal {
        let r = BigRational::from_float(v).unwrap_or_else(BigRational::zero);
        self.from_rational(&r)
    }

    pub fn from_ratio(&self, num: &BigInt, den: &BigInt) -> Decimal {
        let scaled = num << self.bits;
        Decimal { mant: div_round(&scaled, den), bits: self.bits }
    }

    pub fn from_rational(&self, r: &BigRational) -> Decimal {
        self.from_ratio(r.numer(), r.denom())
    }

    /// Parses plain or scientific decimal notation, e.g. `-0.125`, `3e-4`.
    pub fn parse(&self, s: &str) -> Result<Decimal> {
        let r = parse_decimal_str(s)?;
        Ok(self.from_rational(&r))
    }

    /// Converts a value to this context's scale.
    pub fn rescale(&self, x: &Decimal) -> Decimal {
        x.with_bits(self.bits)
    }

    /// `e^x`.
    pub fn exp(&self, x: &Decimal) -> Decimal {
        let x = self.rescale(x);
        // Halve the argument until it is below 2^-8, then square back.
        let mut s = 0u32;
        let limit = self.one().mant >> 8;
        while x.mant.abs() > (&limit << s) {
            s += 1;
        }
        let work = DecimalContext { digits: self.digits, bits: self.bits + s + 16 };
        let y = Decimal { mant: work.rescale(&x).mant >> s, bits: work.bits };
        let mut sum = work.one();
        let mut term = work.one();
        let mut k = 1i64;
        loop {
            term = &(&term * &y) / &work.from_i64(k);
            if term.mant.is_zero() {
                break;
            }
            sum = &sum + &term;
            k += 1;
        }
        for _ in 0..s {
            sum = &sum * &sum;
        }
        self.rescale(&sum)
    }

    /// Natural logarithm of a positive value.
    pub fn ln(&self, x: &Decimal) -> Result<Decimal> {
        if !x.is_positive() {
            return Err(Error::OutOfRange("ln of a nonpositive value".into()));
        }
        let x = self.rescale(x);
        // Split off a power of two so the Newton start is accurate.
        let xf = x.to_f64();
        let mut y = if xf.is_finite() && xf > 0.0 {
            self.from_f64(xf.ln())
        } else {
            self.zero()
        };
        let two = self.from_i64(2);
        let tol = Decimal { mant: BigInt::from(4), bits: self.bits };
        for _ in 0..200 {
            // Halley step for e^y = x.
            let ey = self.exp(&y);
            let delta = &(&two * &(&x - &ey)) / &(&x + &ey);
            y = &y + &delta;
            if delta.abs() <= tol {
                return Ok(y);
            }
        }
        Err(Error::NoConvergence(200))
    }

    /// The positive k-th root of a positive value.
    pub fn nth_root(&self, x: &Decimal, k: u32) -> Result<Decimal> {
        if !x.is_positive() || k == 0 {
            return Err(Error::OutOfRange("nth_root needs x > 0 and k > 0".into()));
        }
        let x = self.rescale(x);
        if k == 1 {
            return Ok(x);
        }
        let guess = x.to_f64().powf(1.0 / k as f64);
        let mut y = if guess.is_finite() && guess > 0.0 {
            self.from_f64(guess)
        } else {
            self.exp(&(&self.ln(&x)? / &self.from_i64(k as i64)))
        };
        let kd = self.from_i64(k as i64);
        let tol = Decimal { mant: BigInt::from(4), bits: self.bits };
        for _ in 0..200 {
            let yk1 = y.powi(k - 1);
            let delta = &(&(&yk1 * &y) - &x) / &(&kd * &yk1);
            y = &y - &delta;
            if delta.abs() <= tol {
                return Ok(y);
            }
        }
        Err(Error::NoConvergence(200))
    }

    /// `x^p` for real `p` and positive `x`.
    pub fn powf(&self, x: &Decimal, p: &Decimal) -> Result<Decimal> {
        Ok(self.exp(&(&self.ln(x)? * p)))
    }
}

/// A fixed-point number; see the module documentation.
#[derive(Clone, Debug)]
pub struct Decimal {
    mant: BigInt,
    bits: u32,
}

fn div_round(num: &BigInt, den: &BigInt) -> BigInt {
    let (q, r): (BigInt, BigInt) = num.div_mod_floor(den);
    // `r / den` lies in [0, 1), so round half up.
    let twice: BigInt = &r * 2;
    if twice.abs() >= den.abs() {
        q + 1
    } else {
        q
    }
}

fn shift_round(x: &BigInt, s: u32) -> BigInt {
    if s == 0 {
        return x.clone();
    }
    let half = BigInt::one() << (s - 1);
    (x + half) >> s
}

fn parse_decimal_str(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a decimal number: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, body) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = match body.find('.') {
        Some(i) => (&body[..i], &body[i + 1..]),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits.is_empty() { "0".to_string() } else { digits };
    let mut num: BigInt = digits.parse().map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let r = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(r)
}

/// Parses a decimal string into an exact rational.
pub fn parse_rational_decimal(s: &str) -> Result<BigRational> {
    parse_decimal_str(s)
}

impl Decimal {
    fn with_bits(&self, bits: u32) -> Decimal {
        match bits.cmp(&self.bits) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => Decimal { mant: &self.mant << (bits - self.bits), bits },
            Ordering::Less => Decimal { mant: shift_round(&self.mant, self.bits - bits), bits },
        }
    }

    fn aligned<'a>(a: &'a Decimal, b: &'a Decimal) -> (std::borrow::Cow<'a, Decimal>, std::borrow::Cow<'a, Decimal>) {
        use std::borrow::Cow;
        match a.bits.cmp(&b.bits) {
            Ordering::Equal => (Cow::Borrowed(a), Cow::Borrowed(b)),
            Ordering::Less => (Cow::Owned(a.with_bits(b.bits)), Cow::Borrowed(b)),
            Ordering::Greater => (Cow::Borrowed(a), Cow::Owned(b.with_bits(a.bits))),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.sign() == Sign::Minus
    }

    pub fn is_positive(&self) -> bool {
        self.mant.sign() == Sign::Plus
    }

    pub fn abs(&self) -> Decimal {
        Decimal { mant: self.mant.abs(), bits: self.bits }
    }

    pub fn powi(&self, k: u32) -> Decimal {
        let mut result = Decimal { mant: BigInt::one() << self.bits, bits: self.bits };
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Nearest f64.
    pub fn to_f64(&self) -> f64 {
        let r = BigRational::new(self.mant.clone(), BigInt::one() << self.bits);
        r.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact rational value of the stored binary fraction.
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.mant.clone(), BigInt::one() << self.bits)
    }

    /// Decimal string with exactly `places` digits after the point, rounded.
    pub fn to_string_places(&self, places: u32) -> String {
        let ten = BigInt::from(10u32);
        let scaled = &self.mant * num_traits::pow(ten, places as usize);
        let q = shift_round(&scaled, self.bits);
        let neg = q.is_negative();
        let digits = q.abs().to_string();
        let p = places as usize;
        let body = if p == 0 {
            digits
        } else if digits.len() > p {
            format!("{}.{}", &digits[..digits.len() - p], &digits[digits.len() - p..])
        } else {
            format!("0.{}{}", "0".repeat(p - digits.len()), digits)
        };
        if neg {
            format!("-{body}")
        } else {
            body
        }
    }

    /// Base-10 exponent of the leading digit: `x = d.ddd × 10^e`. `None` for zero.
    pub fn leading_exponent(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let f = self.abs().to_f64();
        if f.is_finite() && f > 0.0 {
            return Some(f.log10().floor() as i64);
        }
        None
    }
}

impl PartialEq for Decimal {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = Decimal::aligned(self, other);
        a.mant == b.mant
    }
}

impl Eq for Decimal {}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = Decimal::aligned(self, other);
        a.mant.cmp(&b.mant)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let places = f.precision().unwrap_or(20) as u32;
        f.write_str(&self.to_string_places(places))
    }
}

impl<'a> Add<&'a Decimal> for &'a Decimal {
    type Output = Decimal;
    fn add(self, rhs: &'a Decimal) -> Decimal {
        let (a, b) = Decimal::aligned(self, rhs);
        Decimal { mant: &a.mant + &b.mant, bits: a.bits }
    }
}

impl<'a> Sub<&'a Decimal> for &'a Decimal {
    type Output = Decimal;
    fn sub(self, rhs: &'a Decimal) -> Decimal {
        let (a, b) = Decimal::aligned(self, rhs);
        Decimal { mant: &a.mant - &b.mant, bits: a.bits }
    }
}

impl<'a> Mul<&'a Decimal> for &'a Decimal {
    type Output = Decimal;
    fn mul(self, rhs: &'a Decimal) -> Decimal {
        let (a, b) = Decimal::aligned(self, rhs);
        Decimal { mant: shift_round(&(&a.mant * &b.mant), a.bits), bits: a.bits }
    }
}

impl<'a> Div<&'a Decimal> for &'a Decimal {
    type Output = Decimal;
    /// Panics on division by zero, like integer division.
    fn div(self, rhs: &'a Decimal) -> Decimal {
        let (a, b) = Decimal::aligned(self, rhs);
        let num = &a.mant << a.bits;
        Decimal { mant: div_round(&num, &b.mant), bits: a.bits }
    }
}

impl Neg for &Decimal {
    type Output = Decimal;
    fn neg(self) -> Decimal {
        Decimal { mant: -&self.mant, bits: self.bits }
    }
}

macro_rules! owned_binop {
    ($tr:ident, $f:ident) => {
        impl $tr<Decimal> for Decimal {
            type Output = Decimal;
            fn $f(self, rhs: Decimal) -> Decimal {
                (&self).$f(&rhs)
            }
        }
        impl<'a> $tr<&'a Decimal> for Decimal {
            type Output = Decimal;
            fn $f(self, rhs: &'a Decimal) -> Decimal {
                (&self).$f(rhs)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Decimal, b: &Decimal, digits: u32, ctx: &DecimalContext) -> bool {
        (a - b).abs() <= ctx.epsilon(digits)
    }

    #[test]
    fn parse_and_format_round_trip() {
        let ctx = DecimalContext::new(40);
        let x = ctx.parse("-12.0625").unwrap();
        assert_eq!(x.to_string_places(4), "-12.0625");
        let y = ctx.parse("3e-3").unwrap();
        assert_eq!(y.to_string_places(5), "0.00300");
        assert!(ctx.parse("1.2.3").is_err());
        assert!(ctx.parse("").is_err());
    }

    #[test]
    fn arithmetic_matches_rationals() {
        let ctx = DecimalContext::new(60);
        let a = ctx.from_ratio(&BigInt::from(1), &BigInt::from(3));
        let b = ctx.from_ratio(&BigInt::from(2), &BigInt::from(7));
        let prod = &a * &b;
        let want = ctx.from_ratio(&BigInt::from(2), &BigInt::from(21));
        assert!(close(&prod, &want, 58, &ctx));
        let q = &a / &b;
        let want = ctx.from_ratio(&BigInt::from(7), &BigInt::from(6));
        assert!(close(&q, &want, 58, &ctx));
    }

    #[test]
    fn exp_and_ln_are_inverse() {
        let ctx = DecimalContext::new(80);
        let x = ctx.parse("2.5").unwrap();
        let back = ctx.exp(&ctx.ln(&x).unwrap());
        assert!(close(&back, &x, 75, &ctx));
        // e to 50 places.
        let e = ctx.exp(&ctx.one());
        assert_eq!(
            e.to_string_places(50),
            "2.71828182845904523536028747135266249775724709369996"
        );
    }

    #[test]
    fn nth_root_inverts_power() {
        let ctx = DecimalContext::new(100);
        let x = ctx.from_ratio(&BigInt::from(1), &BigInt::from(16));
        let r = ctx.nth_root(&x, 15).unwrap();
        let back = r.powi(15);
        assert!(close(&back, &x, 95, &ctx));
        let two = ctx.from_i64(2);
        let s = ctx.nth_root(&two, 2).unwrap();
        assert_eq!(
            s.to_string_places(40),
            "1.4142135623730950488016887242096980785697"
        );
    }

    #[test]
    fn mixed_scales_align() {
        let lo = DecimalContext::new(20);
        let hi = DecimalContext::new(50);
        let a = lo.from_i64(3);
        let b = hi.from_ratio(&BigInt::from(1), &BigInt::from(4));
        let s = &a + &b;
        assert_eq!(s.to_string_places(3), "3.250");
    }
}
