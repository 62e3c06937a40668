//! Exact arithmetic for threshold formulas.
//!
//! Every quantity that enters a comparison here is a positive real of the
//! form `prod p_i^(q_i)` with the `p_i` prime and the `q_i` rational:
//! parameters are rationals, and the threshold formulas only multiply,
//! divide, and raise them to rational powers. Such a product is rational
//! exactly when all exponents are integers; otherwise unique factorization
//! makes it irrational, so it can never equal a rational candidate and
//! interval refinement of logarithms terminates on every comparison.
//! Comparisons, ceilings, and floors are therefore exact. Floating point is
//! used only by the explicitly approximate accessors.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// small-integer factorization

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    debug_assert!(n > 1 && !is_prime_u64(n));
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let step = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        while d == 1 {
            x = step(x);
            y = step(step(y));
            d = num_integer::gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorization of `n >= 1` as `prime -> multiplicity`.
pub fn factor_u64(n: u64) -> BTreeMap<u64, u64> {
    let mut out = BTreeMap::new();
    let mut rest = n;
    for p in [2u64, 3, 5] {
        while rest % p == 0 {
            *out.entry(p).or_insert(0) += 1;
            rest /= p;
        }
    }
    let mut d = 7u64;
    let mut wheel = [4u64, 2].iter().cycle();
    while d <= 100_000 && d * d <= rest {
        while rest % d == 0 {
            *out.entry(d).or_insert(0) += 1;
            rest /= d;
        }
        d += wheel.next().unwrap();
    }
    let mut stack = Vec::new();
    if rest > 1 {
        stack.push(rest);
    }
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            *out.entry(m).or_insert(0) += 1;
        } else {
            let f = pollard_rho(m);
            stack.push(f);
            stack.push(m / f);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// dyadic logarithm intervals

/// `[lo, hi] * 2^-prec` enclosing `ln 2`, via `ln 2 = 2 atanh(1/3)`.
fn ln2_interval(prec: u32) -> (BigInt, BigInt) {
    let zlo = (BigInt::one() << prec) / 3;
    let zhi = &zlo + 1;
    atanh_interval(zlo, zhi, prec)
}

/// `[lo, hi] * 2^-prec` enclosing `2 atanh(z)` for `z = [zlo, zhi] * 2^-prec`
/// with `0 <= z <= 1/3 + ulp`.
fn atanh_interval(zlo: BigInt, zhi: BigInt, prec: u32) -> (BigInt, BigInt) {
    let round = (BigInt::one() << prec) - 1;
    let mut sum_lo = BigInt::zero();
    let mut sum_hi = BigInt::zero();
    let mut pow_lo = zlo.clone();
    let mut pow_hi = zhi.clone();
    let (sq_lo, sq_hi) = (&zlo * &zlo >> prec, (&zhi * &zhi + &round) >> prec);
    let mut j = 0u64;
    loop {
        sum_lo += &pow_lo / (2 * j + 1);
        sum_hi += (&pow_hi + BigInt::from(2 * j)) / (2 * j + 1);
        if pow_hi <= BigInt::from(8) || j > 20 * prec as u64 {
            break;
        }
        pow_lo = &pow_lo * &sq_lo >> prec;
        pow_hi = (&pow_hi * &sq_hi + &round) >> prec;
        j += 1;
    }
    // Unsummed tail: z <= 1/3 + ulp gives tail <= z^(2j+3)/(1-z^2) <= pow/8,
    // and pow_hi <= 8 at exit, so two ulps cover it together with rounding.
    ((sum_lo << 1u32), (sum_hi << 1u32) + 2)
}

/// `[lo, hi] * 2^-prec` enclosing `ln x` for an integer `x >= 1`.
fn ln_interval(x: &BigUint, prec: u32) -> (BigInt, BigInt) {
    if x.is_one() {
        return (BigInt::zero(), BigInt::zero());
    }
    let s = x.bits() - 1;
    let p2 = BigUint::one() << s;
    // r = x / 2^s in [1, 2); z = (r-1)/(r+1) = (x - 2^s)/(x + 2^s) in [0, 1/3).
    let a = BigInt::from(x - &p2);
    let b = BigInt::from(x + &p2);
    let zlo = (a << prec) / &b;
    let zhi = &zlo + 1;
    let (r_lo, r_hi) = atanh_interval(zlo, zhi, prec);
    let (l2_lo, l2_hi) = ln2_interval(prec);
    (l2_lo * s + r_lo, l2_hi * s + r_hi)
}

fn mul_ratio_floor(x: &BigInt, q: &BigRational) -> BigInt {
    (x * q.numer()).div_floor(q.denom())
}

fn mul_ratio_ceil(x: &BigInt, q: &BigRational) -> BigInt {
    (x * q.numer()).div_ceil(q.denom())
}

/// Sign of `sum q_i ln(b_i)` where the sum is known to be nonzero.
fn ln_combination_sign(terms: &[(BigUint, BigRational)]) -> std::cmp::Ordering {
    let mut prec = 128u32;
    loop {
        let mut lo = BigInt::zero();
        let mut hi = BigInt::zero();
        for (base, q) in terms {
            let (l, h) = ln_interval(base, prec);
            if q.is_positive() {
                lo += mul_ratio_floor(&l, q);
                hi += mul_ratio_ceil(&h, q);
            } else {
                lo += mul_ratio_floor(&h, q);
                hi += mul_ratio_ceil(&l, q);
            }
        }
        if lo.is_positive() {
            return std::cmp::Ordering::Greater;
        }
        if hi.is_negative() {
            return std::cmp::Ordering::Less;
        }
        assert!(
            prec < (1 << 24),
            "logarithm comparison failed to resolve; operands are equal, \
             which the canonical form should have detected"
        );
        prec *= 4;
    }
}

// ---------------------------------------------------------------------------
// values

/// A positive real number in canonical form: a product of prime powers with
/// nonzero rational exponents. The empty product is 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Value {
    factors: BTreeMap<u64, BigRational>,
}

impl Value {
    pub fn one() -> Self {
        Value { factors: BTreeMap::new() }
    }

    pub fn from_u64(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("value must be positive".into()));
        }
        let factors = factor_u64(n)
            .into_iter()
            .map(|(p, e)| (p, BigRational::from_integer(e.into())))
            .collect();
        Ok(Value { factors })
    }

    /// `num / den` as a value; both sides must be positive.
    pub fn from_ratio_u64(num: u64, den: u64) -> Result<Self> {
        Ok(Self::from_u64(num)?.div(&Self::from_u64(den)?))
    }

    pub fn from_biguint(n: &BigUint) -> Result<Self> {
        let small = n.to_u64().ok_or_else(|| {
            Error::InvalidParameter(format!("cannot factor {n}: too large for exact form"))
        })?;
        Self::from_u64(small)
    }

    pub fn from_rational(q: &BigRational) -> Result<Self> {
        if !q.is_positive() {
            return Err(Error::InvalidParameter(format!("value must be positive, got {q}")));
        }
        let num = Self::from_biguint(&q.numer().to_biguint().unwrap())?;
        let den = Self::from_biguint(&q.denom().to_biguint().unwrap())?;
        Ok(num.div(&den))
    }

    pub fn mul(&self, other: &Value) -> Value {
        let mut factors = self.factors.clone();
        for (p, q) in &other.factors {
            let slot = factors.entry(*p).or_insert_with(BigRational::zero);
            *slot += q;
            if slot.is_zero() {
                factors.remove(p);
            }
        }
        Value { factors }
    }

    pub fn div(&self, other: &Value) -> Value {
        self.mul(&other.recip())
    }

    pub fn recip(&self) -> Value {
        Value { factors: self.factors.iter().map(|(p, q)| (*p, -q)).collect() }
    }

    pub fn pow(&self, e: &BigRational) -> Value {
        if e.is_zero() {
            return Value::one();
        }
        Value { factors: self.factors.iter().map(|(p, q)| (*p, q * e)).collect() }
    }

    pub fn pow_i64(&self, e: i64) -> Value {
        self.pow(&BigRational::from_integer(e.into()))
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.factors.values().all(|q| q.is_integer())
    }

    /// Exact rational form, when all exponents are integers.
    pub fn as_rational(&self) -> Option<BigRational> {
        if !self.is_rational() {
            return None;
        }
        let mut num = BigUint::one();
        let mut den = BigUint::one();
        for (p, q) in &self.factors {
            let e = q.to_integer();
            let mag = e.magnitude().to_u64().expect("exponent magnitude fits u64");
            let pw = Pow::pow(&BigUint::from(*p), mag);
            if e.is_positive() {
                num *= pw;
            } else {
                den *= pw;
            }
        }
        Some(BigRational::new(num.into(), den.into()))
    }

    fn cmp_one(&self) -> std::cmp::Ordering {
        if self.factors.is_empty() {
            return std::cmp::Ordering::Equal;
        }
        if let Some(q) = self.as_rational() {
            return q.cmp(&BigRational::one());
        }
        let terms: Vec<(BigUint, BigRational)> =
            self.factors.iter().map(|(p, q)| (BigUint::from(*p), q.clone())).collect();
        ln_combination_sign(&terms)
    }

    pub fn cmp_value(&self, other: &Value) -> std::cmp::Ordering {
        self.div(other).cmp_one()
    }

    pub fn cmp_integer(&self, m: &BigUint) -> std::cmp::Ordering {
        if m.is_zero() {
            return std::cmp::Ordering::Greater;
        }
        if let Some(q) = self.as_rational() {
            return q.cmp(&BigRational::from_integer(m.clone().into()));
        }
        // Irrational, so never equal to m; compare ln(self) - ln(m).
        let mut terms: Vec<(BigUint, BigRational)> =
            self.factors.iter().map(|(p, q)| (BigUint::from(*p), q.clone())).collect();
        terms.push((m.clone(), -BigRational::one()));
        ln_combination_sign(&terms)
    }

    /// Exact ceiling. Rational values take an exact integer path. An
    /// irrational value x satisfies x^L ∈ ℚ for the common denominator L of
    /// its exponents, so its floor is an integer L-th root, verified by
    /// exact powering (x itself never sits on an integer). Values whose L
    /// overflows u32 fall back to bisection over logarithm intervals.
    pub fn ceil_big(&self) -> BigUint {
        if let Some(q) = self.as_rational() {
            let n = q.numer().to_biguint().unwrap();
            let d = q.denom().to_biguint().unwrap();
            return n.div_ceil(&d);
        }
        let mut l = BigInt::one();
        for q in self.factors.values() {
            l = l.lcm(q.denom());
        }
        if let Some(l) = l.to_u32() {
            let q = self
                .pow(&BigRational::from_integer(l.into()))
                .as_rational()
                .expect("integral exponents after scaling by their lcm");
            let n = q.numer().to_biguint().unwrap();
            let d = q.denom().to_biguint().unwrap();
            let mut c = (&n / &d).nth_root(l);
            while Pow::pow(&(&c + 1u32), u64::from(l)) * &d <= n {
                c += 1u32;
            }
            return c + 1u32;
        }
        if self.cmp_integer(&BigUint::one()) == std::cmp::Ordering::Less {
            return BigUint::one();
        }
        let mut hi = BigUint::from(2u32);
        while self.cmp_integer(&hi) != std::cmp::Ordering::Less {
            hi <<= 1u32;
        }
        let mut lo = &hi >> 1u32; // value > lo, value < hi
        while (&hi - &lo) > BigUint::one() {
            let mid = (&lo + &hi) >> 1u32;
            if self.cmp_integer(&mid) == std::cmp::Ordering::Less {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    pub fn floor_big(&self) -> BigUint {
        if let Some(q) = self.as_rational() {
            let n = q.numer().to_biguint().unwrap();
            let d = q.denom().to_biguint().unwrap();
            return n / d;
        }
        self.ceil_big() - 1u32
    }

    /// Base-2 logarithm as a float, for reports only.
    pub fn log2_approx(&self) -> f64 {
        self.factors
            .iter()
            .map(|(p, q)| q.to_f64().unwrap_or(f64::NAN) * (*p as f64).log2())
            .sum()
    }

    /// Float approximation, for reports only. Saturates to infinity when the
    /// magnitude exceeds the float range.
    pub fn to_f64_approx(&self) -> f64 {
        self.log2_approx().exp2()
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.as_rational() {
            return write!(f, "{q}");
        }
        let mut first = true;
        for (p, q) in &self.factors {
            if !first {
                write!(f, " * ")?;
            }
            first = false;
            if q.is_integer() {
                write!(f, "{p}^{}", q.numer())?;
            } else {
                write!(f, "{p}^({q})")?;
            }
        }
        Ok(())
    }
}

impl serde::Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

// ---------------------------------------------------------------------------
// extended counts

/// A codegree threshold: a nonnegative integer or unbounded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtendedCount {
    Finite(BigUint),
    Unbounded,
}

impl ExtendedCount {
    pub fn from_u64(n: u64) -> Self {
        ExtendedCount::Finite(n.into())
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, ExtendedCount::Unbounded)
    }

    pub fn min(self, other: ExtendedCount) -> ExtendedCount {
        match (self, other) {
            (ExtendedCount::Unbounded, b) => b,
            (a, ExtendedCount::Unbounded) => a,
            (ExtendedCount::Finite(a), ExtendedCount::Finite(b)) => {
                ExtendedCount::Finite(a.min(b))
            }
        }
    }

    pub fn add(&self, other: &ExtendedCount) -> ExtendedCount {
        match (self, other) {
            (ExtendedCount::Finite(a), ExtendedCount::Finite(b)) => {
                ExtendedCount::Finite(a + b)
            }
            _ => ExtendedCount::Unbounded,
        }
    }

    pub fn add_biguint(&self, other: &BigUint) -> ExtendedCount {
        match self {
            ExtendedCount::Finite(a) => ExtendedCount::Finite(a + other),
            ExtendedCount::Unbounded => ExtendedCount::Unbounded,
        }
    }

    pub fn scale_u64(&self, c: u64) -> ExtendedCount {
        match self {
            ExtendedCount::Finite(a) => ExtendedCount::Finite(a * c),
            ExtendedCount::Unbounded => ExtendedCount::Unbounded,
        }
    }

    /// True when a multiset of count `deg` exceeds this threshold.
    pub fn exceeded_by(&self, deg: &BigUint) -> bool {
        match self {
            ExtendedCount::Finite(a) => deg > a,
            ExtendedCount::Unbounded => false,
        }
    }
}

impl PartialOrd for ExtendedCount {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedCount {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (ExtendedCount::Unbounded, ExtendedCount::Unbounded) => std::cmp::Ordering::Equal,
            (ExtendedCount::Unbounded, _) => std::cmp::Ordering::Greater,
            (_, ExtendedCount::Unbounded) => std::cmp::Ordering::Less,
            (ExtendedCount::Finite(a), ExtendedCount::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtendedCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedCount::Finite(a) => write!(f, "{a}"),
            ExtendedCount::Unbounded => write!(f, "inf"),
        }
    }
}

impl serde::Serialize for ExtendedCount {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

// ---------------------------------------------------------------------------
// helpers

/// Smallest `t` with `2^t >= n`; 0 for `n <= 1`.
pub fn ceil_log2_biguint(n: &BigUint) -> u64 {
    if n <= &BigUint::one() {
        0
    } else {
        (n - 1u32).bits()
    }
}

/// Base-2 logarithm of a positive integer as a float, for reports only;
/// negative infinity on zero.
pub fn log2_approx_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 53 {
        (n.to_u64().expect("53 bits fit") as f64).log2()
    } else {
        let top = (n >> (bits - 53)).to_u64().expect("53 bits fit");
        (top as f64).log2() + (bits - 53) as f64
    }
}

pub fn ceil_log2_u64(n: u64) -> u64 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros() as u64
    }
}

/// Parses "p/q", "mantissa.fraction", or a plain integer into an exact
/// rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::Config(format!("cannot parse rational from '{text}'"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = t.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int_part, frac_part)) = t.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int_part.trim_start().starts_with('-');
        let whole: BigInt =
            if int_part == "-" || int_part.is_empty() { BigInt::zero() } else { int_part.parse().map_err(|_| bad())? };
        let frac: BigInt = frac_part.parse().map_err(|_| bad())?;
        let scale = Pow::pow(&BigInt::from(10), frac_part.len() as u64);
        let frac_signed = if negative { -frac } else { frac };
        return Ok(BigRational::new(whole * &scale + frac_signed, scale));
    }
    let n: BigInt = t.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn factorization_roundtrip() {
        let v = Value::from_u64(360).unwrap();
        assert_eq!(v.as_rational().unwrap(), BigRational::from_integer(360.into()));
        let q = rat(3, 10);
        let w = Value::from_rational(&q).unwrap();
        assert_eq!(w.as_rational().unwrap(), q);
    }

    #[test]
    fn factor_handles_large_prime_pairs() {
        // 1_000_003 and 1_000_033 are both prime and above the trial bound.
        let n = 1_000_003u64 * 1_000_033u64;
        let f = factor_u64(n);
        assert_eq!(f.get(&1_000_003), Some(&1));
        assert_eq!(f.get(&1_000_033), Some(&1));
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn fractional_powers_cancel_exactly() {
        let twelve = Value::from_u64(12).unwrap();
        let root = twelve.pow(&rat(1, 2));
        assert!(!root.is_rational());
        let back = root.mul(&root);
        assert_eq!(back.cmp_value(&twelve), std::cmp::Ordering::Equal);
        assert!(back.is_rational());
    }

    #[test]
    fn irrational_comparisons() {
        let sqrt2 = Value::from_u64(2).unwrap().pow(&rat(1, 2));
        assert_eq!(sqrt2.cmp_value(&Value::from_ratio_u64(3, 2).unwrap()), std::cmp::Ordering::Less);
        assert_eq!(
            sqrt2.cmp_value(&Value::from_ratio_u64(141, 100).unwrap()),
            std::cmp::Ordering::Greater
        );
    }

    #[test]
    fn ceilings_are_exact() {
        // 12^(3/2) = 41.569...
        let v = Value::from_u64(12).unwrap().pow(&rat(3, 2));
        assert_eq!(v.ceil_big(), BigUint::from(42u32));
        assert_eq!(v.floor_big(), BigUint::from(41u32));
        assert_eq!(Value::from_ratio_u64(7, 2).unwrap().ceil_big(), BigUint::from(4u32));
        assert_eq!(Value::from_u64(6).unwrap().ceil_big(), BigUint::from(6u32));
        assert_eq!(Value::from_ratio_u64(1, 3).unwrap().floor_big(), BigUint::zero());
        assert_eq!(Value::from_u64(5).unwrap().pow(&rat(-1, 2)).ceil_big(), BigUint::one());
    }

    #[test]
    fn half_integer_exponents_recombine_to_exact_powers() {
        let two = Value::from_u64(2).unwrap();
        let v = two.pow(&rat(1, 2)).mul(&two.pow(&rat(75, 2)));
        let expect = BigUint::from(1u32) << 38;
        assert_eq!(v.cmp_integer(&expect), std::cmp::Ordering::Equal);
        assert_eq!(v.ceil_big(), expect);
    }

    #[test]
    fn tight_integer_bracketing() {
        // sqrt(2) * 10^10 = 14142135623.7309...
        let v = Value::from_u64(2)
            .unwrap()
            .pow(&rat(1, 2))
            .mul(&Value::from_u64(10).unwrap().pow_i64(10));
        assert_eq!(
            v.cmp_integer(&BigUint::from(14_142_135_623u64)),
            std::cmp::Ordering::Greater
        );
        assert_eq!(v.cmp_integer(&BigUint::from(14_142_135_624u64)), std::cmp::Ordering::Less);
        assert_eq!(v.ceil_big(), BigUint::from(14_142_135_624u64));
    }

    #[test]
    fn extended_count_algebra() {
        let a = ExtendedCount::from_u64(7);
        let b = ExtendedCount::Unbounded;
        assert_eq!(a.clone().min(b.clone()), a);
        assert_eq!(b.add(&a), ExtendedCount::Unbounded);
        assert_eq!(a.scale_u64(20), ExtendedCount::from_u64(140));
        assert!(a.exceeded_by(&BigUint::from(8u32)));
        assert!(!a.exceeded_by(&BigUint::from(7u32)));
        assert!(!b.exceeded_by(&BigUint::from(u64::MAX)));
        assert!(ExtendedCount::Unbounded > ExtendedCount::from_u64(u64::MAX));
    }

    #[test]
    fn ceil_log2_values() {
        for (n, want) in [(1u64, 0u64), (2, 1), (3, 2), (4, 2), (5, 3), (1024, 10), (1025, 11)] {
            assert_eq!(ceil_log2_u64(n), want, "n = {n}");
            assert_eq!(ceil_log2_biguint(&BigUint::from(n)), want, "n = {n}");
        }
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("0.3").unwrap(), rat(3, 10));
        assert_eq!(parse_rational("7/4").unwrap(), rat(7, 4));
        assert_eq!(parse_rational("12").unwrap(), rat(12, 1));
        assert_eq!(parse_rational("-1.25").unwrap(), rat(-5, 4));
        assert_eq!(parse_rational(" 1/3 ").unwrap(), rat(1, 3));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.2.3").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1.-2").is_err());
    }

    proptest! {
        #[test]
        fn rational_value_roundtrip(n in 1u64..1_000_000, d in 1u64..1_000_000) {
            let q = BigRational::new(n.into(), d.into());
            let v = Value::from_rational(&q).unwrap();
            prop_assert_eq!(v.as_rational().unwrap(), q);
        }

        #[test]
        fn rational_cmp_matches_bigrational(
            a in 1u64..100_000, b in 1u64..100_000,
            c in 1u64..100_000, d in 1u64..100_000,
        ) {
            let x = BigRational::new(a.into(), b.into());
            let y = BigRational::new(c.into(), d.into());
            let vx = Value::from_rational(&x).unwrap();
            let vy = Value::from_rational(&y).unwrap();
            prop_assert_eq!(vx.cmp_value(&vy), x.cmp(&y));
        }

        #[test]
        fn irrational_sign_matches_float_estimate(a in 2u64..500, b in 2u64..500) {
            // x = a^(1/2) / b^(1/3); compare against 1 both ways.
            let v = Value::from_u64(a).unwrap().pow(&rat(1, 2))
                .div(&Value::from_u64(b).unwrap().pow(&rat(1, 3)));
            let log = 0.5 * (a as f64).ln() - (b as f64).ln() / 3.0;
            if log.abs() > 1e-6 {
                let want = if log > 0.0 {
                    std::cmp::Ordering::Greater
                } else {
                    std::cmp::Ordering::Less
                };
                prop_assert_eq!(v.cmp_value(&Value::one()), want);
            }
        }

        #[test]
        fn ceil_matches_float_estimate(a in 2u64..200, num in 1i64..7, den in 2i64..5) {
            let e = rat(num, den);
            let v = Value::from_u64(a).unwrap().pow(&e);
            let f = (a as f64).powf(num as f64 / den as f64);
            // Far from integer boundaries the float estimate is trustworthy.
            if (f - f.round()).abs() > 1e-6 && f < 1e15 {
                prop_assert_eq!(v.ceil_big(), BigUint::from(f.ceil() as u64));
            }
        }
    }
}
