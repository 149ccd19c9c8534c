//! Exact scalar field Q(i), first-order jets and permutation signs.
//!
//! Every identity checked by this crate is a polynomial identity in
//! structure constants over the ground field, so scalars are Gaussian
//! rationals with arbitrary-precision parts: no tolerances anywhere.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Element of Q(i): `re + im*i` with reduced rational parts.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar {
    re: BigRational,
    im: BigRational,
}

impl Scalar {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Scalar { re, im }
    }

    pub fn zero() -> Self {
        Scalar {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        Scalar {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Scalar {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    /// Exact rational `num/den`. Panics if `den == 0`.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    /// Multiplicative inverse; errors on zero.
    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // 1/(a+bi) = (a-bi)/(a^2+b^2)
        let norm = &self.re * &self.re + &self.im * &self.im;
        Ok(Scalar {
            re: &self.re / &norm,
            im: -(&self.im / &norm),
        })
    }

    pub fn try_div(&self, rhs: &Scalar) -> Result<Scalar> {
        Ok(self.clone() * rhs.inv()?)
    }

    pub fn pow(&self, mut n: u32) -> Scalar {
        let mut acc = Scalar::one();
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            n >>= 1;
        }
        acc
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        Scalar {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl<'a> Add<&'a Scalar> for Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar {
            re: self.re + &rhs.re,
            im: self.im + &rhs.im,
        }
    }
}

impl AddAssign for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        Scalar {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl SubAssign for Scalar {
    fn sub_assign(&mut self, rhs: Scalar) {
        self.re -= rhs.re;
        self.im -= rhs.im;
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        let re = &self.re * &rhs.re - &self.im * &rhs.im;
        let im = &self.re * &rhs.im + &self.im * &rhs.re;
        Scalar { re, im }
    }
}

impl<'a> Mul<&'a Scalar> for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        let re = &self.re * &rhs.re - &self.im * &rhs.im;
        let im = &self.re * &rhs.im + &self.im * &rhs.re;
        Scalar { re, im }
    }
}

impl MulAssign for Scalar {
    fn mul_assign(&mut self, rhs: Scalar) {
        *self = self.clone() * rhs;
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            re: -self.re,
            im: -self.im,
        }
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Canonical string form: `a/b`, `c/d*i` or `a/b+c/d*i` (fractions reduced,
/// denominator omitted when 1, `1*i` rendered as `i`). Round-trips exactly
/// through the `FromStr` parser.
impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", fmt_rational(&self.re));
        }
        let im_mag = self.im.abs();
        let im_str = if im_mag.is_one() {
            "i".to_string()
        } else {
            format!("{}*i", fmt_rational(&im_mag))
        };
        if self.re.is_zero() {
            if self.im.is_negative() {
                write!(f, "-{im_str}")
            } else {
                write!(f, "{im_str}")
            }
        } else {
            let sign = if self.im.is_negative() { '-' } else { '+' };
            write!(f, "{}{}{}", fmt_rational(&self.re), sign, im_str)
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(num).map_err(|e| Error::Parse(format!("bad numerator {num:?}: {e}")))?;
    let d = BigInt::from_str(den).map_err(|e| Error::Parse(format!("bad denominator {den:?}: {e}")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(n, d))
}

impl FromStr for Scalar {
    type Err = Error;

    /// Parses `a/b`, `c/d*i`, `i`, `-i` and combinations `a/b+c/d*i`,
    /// `a/b-c/d*i`. Whitespace around tokens is ignored.
    fn from_str(s: &str) -> Result<Scalar> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty scalar".into()));
        }
        // split into at most two signed terms at a top-level +/- (not the leading sign)
        let bytes = s.as_bytes();
        let mut split_at = None;
        for (k, &b) in bytes.iter().enumerate().skip(1) {
            if (b == b'+' || b == b'-') && bytes[k - 1] != b'+' && bytes[k - 1] != b'-' {
                if split_at.is_some() {
                    return Err(Error::Parse(format!("too many terms in scalar {s:?}")));
                }
                split_at = Some(k);
            }
        }
        let parse_term = |t: &str| -> Result<(BigRational, bool)> {
            // returns (coefficient, is_imaginary)
            if let Some(rest) = t.strip_suffix("*i") {
                Ok((parse_rational(rest)?, true))
            } else if t == "i" {
                Ok((BigRational::one(), true))
            } else if t == "-i" {
                Ok((-BigRational::one(), true))
            } else if t == "+i" {
                Ok((BigRational::one(), true))
            } else {
                Ok((parse_rational(t)?, false))
            }
        };
        let mut re = BigRational::zero();
        let mut im = BigRational::zero();
        let mut seen_re = false;
        let mut seen_im = false;
        let terms: Vec<String> = match split_at {
            None => vec![s.clone()],
            Some(k) => vec![s[..k].to_string(), s[k..].to_string()],
        };
        for t in &terms {
            let (q, imag) = parse_term(t)?;
            if imag {
                if seen_im {
                    return Err(Error::Parse(format!("duplicate imaginary part in {s:?}")));
                }
                seen_im = true;
                im = q;
            } else {
                if seen_re {
                    return Err(Error::Parse(format!("duplicate real part in {s:?}")));
                }
                seen_re = true;
                re = q;
            }
        }
        Ok(Scalar { re, im })
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Scalar::from_str(&s).map_err(de::Error::custom)
    }
}

/// First-order jet `value + eps*deriv` with `eps^2 = 0`.
///
/// Carries exactly the data needed for derivatives at `t = 0` along a
/// one-parameter direction; division requires a nonzero value part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jet1 {
    pub val: Scalar,
    pub der: Scalar,
}

impl Jet1 {
    pub fn new(val: Scalar, der: Scalar) -> Self {
        Jet1 { val, der }
    }

    pub fn constant(val: Scalar) -> Self {
        Jet1 {
            val,
            der: Scalar::zero(),
        }
    }

    pub fn zero() -> Self {
        Jet1::constant(Scalar::zero())
    }

    pub fn one() -> Self {
        Jet1::constant(Scalar::one())
    }

    /// `(v + eps d)^{-1} = v^{-1} - eps d v^{-2}`; errors when `v = 0`.
    pub fn inv(&self) -> Result<Jet1> {
        let vi = self.val.inv()?;
        let der = -(self.der.clone() * vi.clone() * vi.clone());
        Ok(Jet1 { val: vi, der })
    }
}

impl Add for Jet1 {
    type Output = Jet1;
    fn add(self, rhs: Jet1) -> Jet1 {
        Jet1 {
            val: self.val + rhs.val,
            der: self.der + rhs.der,
        }
    }
}

impl Sub for Jet1 {
    type Output = Jet1;
    fn sub(self, rhs: Jet1) -> Jet1 {
        Jet1 {
            val: self.val - rhs.val,
            der: self.der - rhs.der,
        }
    }
}

impl Mul for Jet1 {
    type Output = Jet1;
    fn mul(self, rhs: Jet1) -> Jet1 {
        // (a + eps b)(c + eps d) = ac + eps(ad + bc)
        let der = self.val.clone() * rhs.der.clone() + self.der * rhs.val.clone();
        Jet1 {
            val: self.val * rhs.val,
            der,
        }
    }
}

impl Neg for Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        Jet1 {
            val: -self.val,
            der: -self.der,
        }
    }
}

/// Ring interface shared by `Scalar` and `Jet1` so expressions and small
/// determinants evaluate over either.
pub trait RingElem: Clone {
    fn ring_zero() -> Self;
    fn ring_one() -> Self;
    fn ring_add(&self, rhs: &Self) -> Self;
    fn ring_mul(&self, rhs: &Self) -> Self;
    fn ring_neg(&self) -> Self;
    fn ring_inv(&self) -> Result<Self>;
    fn from_scalar(s: &Scalar) -> Self;
}

impl RingElem for Scalar {
    fn ring_zero() -> Self {
        Scalar::zero()
    }
    fn ring_one() -> Self {
        Scalar::one()
    }
    fn ring_add(&self, rhs: &Self) -> Self {
        self.clone() + rhs
    }
    fn ring_mul(&self, rhs: &Self) -> Self {
        self.clone() * rhs
    }
    fn ring_neg(&self) -> Self {
        -self.clone()
    }
    fn ring_inv(&self) -> Result<Self> {
        self.inv()
    }
    fn from_scalar(s: &Scalar) -> Self {
        s.clone()
    }
}

impl RingElem for Jet1 {
    fn ring_zero() -> Self {
        Jet1::zero()
    }
    fn ring_one() -> Self {
        Jet1::one()
    }
    fn ring_add(&self, rhs: &Self) -> Self {
        self.clone() + rhs.clone()
    }
    fn ring_mul(&self, rhs: &Self) -> Self {
        self.clone() * rhs.clone()
    }
    fn ring_neg(&self) -> Self {
        -self.clone()
    }
    fn ring_inv(&self) -> Result<Self> {
        self.inv()
    }
    fn from_scalar(s: &Scalar) -> Self {
        Jet1::constant(s.clone())
    }
}

/// Sign of a permutation given as a sequence of distinct indices, by
/// inversion counting. O(r^2), fine for r up to the odd dimension.
pub fn perm_sign(perm: &[usize]) -> Result<i64> {
    for (k, a) in perm.iter().enumerate() {
        if perm[k + 1..].contains(a) {
            return Err(Error::BadPermutation(format!("repeated index {a}")));
        }
    }
    Ok(inversion_sign(perm))
}

fn inversion_sign(seq: &[usize]) -> i64 {
    let mut inv = 0usize;
    for a in 0..seq.len() {
        for b in a + 1..seq.len() {
            if seq[a] > seq[b] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sign `(-1)^{|tau|}` of the riffle permutation that sorts the
/// concatenation `left ++ right` of two disjoint strictly increasing
/// sequences. Overlapping or non-increasing inputs are rejected.
pub fn shuffle_sign(left: &[usize], right: &[usize]) -> Result<i64> {
    for seq in [left, right] {
        if !seq.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::BadPermutation(format!(
                "sequence not strictly increasing: {seq:?}"
            )));
        }
    }
    if left.iter().any(|a| right.contains(a)) {
        return Err(Error::BadPermutation(format!(
            "sequences overlap: {left:?} / {right:?}"
        )));
    }
    let mut concat = Vec::with_capacity(left.len() + right.len());
    concat.extend_from_slice(left);
    concat.extend_from_slice(right);
    Ok(inversion_sign(&concat))
}

/// `+1` or `-1` as a scalar.
pub fn sign_scalar(s: i64) -> Scalar {
    if s >= 0 {
        Scalar::one()
    } else {
        -Scalar::one()
    }
}
