//! Base-`p` digit and valuation combinatorics.
//!
//! Everything here is exact. Values of `tau` (and every exponent of `p` the
//! construction manipulates) live in `(1/(p-1))·Z` and are carried by
//! [`TauRational`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Error, Result};
use crate::mutation::{self, Mutation};

/// Rejects anything that is not a prime `>= 2`.
pub fn check_prime(p: u64) -> Result<()> {
    if p < 2 {
        return invalid(format!("p = {p} is not prime"));
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return invalid(format!("p = {p} is not prime"));
        }
        d += 1;
    }
    Ok(())
}

/// A rational number whose denominator divides `p - 1`.
///
/// Stored as the numerator over the fixed denominator `p - 1`, so equality of
/// the derived `PartialEq` is equality of values. Mixing two primes in one
/// operation panics.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct TauRational {
    scaled: i64,
    p: u64,
}

impl TauRational {
    /// The value `scaled / (p - 1)`.
    pub fn from_scaled(scaled: i64, p: u64) -> Self {
        debug_assert!(p >= 2);
        TauRational { scaled, p }
    }

    pub fn from_int(n: i64, p: u64) -> Self {
        TauRational::from_scaled(n * (p as i64 - 1), p)
    }

    pub fn zero(p: u64) -> Self {
        TauRational::from_scaled(0, p)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// `(p - 1) * self`, always an integer.
    pub fn scaled(&self) -> i64 {
        self.scaled
    }

    pub fn is_integer(&self) -> bool {
        self.scaled % (self.p as i64 - 1) == 0
    }

    /// The integer value, if `self` is one.
    pub fn to_integer(&self) -> Option<i64> {
        self.is_integer().then(|| self.scaled / (self.p as i64 - 1))
    }

    pub fn is_negative(&self) -> bool {
        self.scaled < 0
    }

    /// Smallest integer `>= self`.
    pub fn ceil(&self) -> i64 {
        Integer::div_ceil(&self.scaled, &(self.p as i64 - 1))
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn to_ratio(&self) -> Ratio<i128> {
        Ratio::new(self.scaled as i128, self.p as i128 - 1)
    }

    fn same_prime(&self, other: &Self) {
        assert_eq!(self.p, other.p, "TauRational values for different primes were mixed");
    }
}

impl fmt::Display for TauRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_ratio())
    }
}

impl Add for TauRational {
    type Output = TauRational;
    fn add(self, rhs: Self) -> Self {
        self.same_prime(&rhs);
        TauRational::from_scaled(self.scaled + rhs.scaled, self.p)
    }
}

impl Sub for TauRational {
    type Output = TauRational;
    fn sub(self, rhs: Self) -> Self {
        self.same_prime(&rhs);
        TauRational::from_scaled(self.scaled - rhs.scaled, self.p)
    }
}

impl AddAssign for TauRational {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for TauRational {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl Neg for TauRational {
    type Output = TauRational;
    fn neg(self) -> Self {
        TauRational::from_scaled(-self.scaled, self.p)
    }
}

impl PartialOrd for TauRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TauRational {
    fn cmp(&self, other: &Self) -> Ordering {
        self.same_prime(other);
        self.scaled.cmp(&other.scaled)
    }
}

impl PartialEq<i64> for TauRational {
    fn eq(&self, other: &i64) -> bool {
        self.scaled == other * (self.p as i64 - 1)
    }
}

impl PartialOrd<i64> for TauRational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.scaled.cmp(&(other * (self.p as i64 - 1))))
    }
}

/// Base-`p` digit sum of `n`.
pub fn sigma_digit_sum(n: u64, p: u64) -> Result<u64> {
    check_prime(p)?;
    Ok(digit_sum(n, p))
}

fn digit_sum(mut n: u64, p: u64) -> u64 {
    let mut s = 0;
    while n > 0 {
        s += n % p;
        n /= p;
    }
    s
}

/// `sigma_p(n - 1) / (p - 1)`, with `tau(1) = 0`.
pub fn tau(n: u64, p: u64) -> Result<TauRational> {
    check_prime(p)?;
    if n < 1 {
        return invalid("tau is defined for n >= 1");
    }
    Ok(tau_unchecked(n, p))
}

pub(crate) fn tau_unchecked(n: u64, p: u64) -> TauRational {
    let digits = if mutation::active(Mutation::TauOffset) { digit_sum(n, p) } else { digit_sum(n - 1, p) };
    TauRational::from_scaled(digits as i64, p)
}

/// `tau(n) - tau(n - 1)` computed from the valuation of `n - 1`:
/// `1/(p-1) - v_p(n-1)`.
pub fn tau_difference(n: u64, p: u64) -> Result<TauRational> {
    check_prime(p)?;
    if n < 2 {
        return invalid("tau_difference needs n >= 2");
    }
    let a = vp_u64(n - 1, p) as i64;
    Ok(TauRational::from_scaled(1, p) - TauRational::from_int(a, p))
}

/// Largest `k` with `p^k | n`. Zero has no finite valuation and is an error.
pub fn vp_int(n: i64, p: u64) -> Result<u32> {
    check_prime(p)?;
    if n == 0 {
        return Err(Error::Domain("v_p(0) is infinite".into()));
    }
    Ok(vp_u64(n.unsigned_abs(), p))
}

pub(crate) fn vp_u64(mut n: u64, p: u64) -> u32 {
    debug_assert!(n != 0);
    let mut k = 0;
    while n.is_multiple_of(p) {
        n /= p;
        k += 1;
    }
    k
}

/// Valuation of a nonzero big integer.
pub fn vp_bigint(n: &BigInt, p: u64) -> Result<u32> {
    check_prime(p)?;
    if n.is_zero() {
        return Err(Error::Domain("v_p(0) is infinite".into()));
    }
    Ok(vp_big_unchecked(n, p))
}

pub(crate) fn vp_big_unchecked(n: &BigInt, p: u64) -> u32 {
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut k = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return k;
        }
        n = q;
        k += 1;
    }
}

/// Legendre's formula: `v_p(n!) = (n - sigma_p(n)) / (p - 1)`.
pub fn vp_factorial(n: u64, p: u64) -> Result<u64> {
    check_prime(p)?;
    Ok(vp_factorial_unchecked(n, p))
}

fn vp_factorial_unchecked(n: u64, p: u64) -> u64 {
    let v = (n - digit_sum(n, p)) / (p - 1);
    if mutation::active(Mutation::FactorialValuation) && n >= p {
        v + 1
    } else {
        v
    }
}

/// `v_p(C(n, k))` via Legendre; equals the number of carries when adding
/// `k` and `n - k` in base `p`.
pub fn vp_binomial(n: u64, k: u64, p: u64) -> Result<u64> {
    check_prime(p)?;
    if k > n {
        return invalid(format!("binomial C({n}, {k}) needs k <= n"));
    }
    Ok(vp_factorial_unchecked(n, p) - vp_factorial_unchecked(k, p) - vp_factorial_unchecked(n - k, p))
}

/// `v_p(C(p^L - j, i - j))` through `tau(j) + tau(i-j+1) - tau(i)`, valid for
/// `0 < j <= i <= p^L`. The result is a nonnegative integer.
pub fn binomial_valuation_by_tau(j: u64, i: u64, l: u32, p: u64) -> Result<TauRational> {
    check_prime(p)?;
    let top = checked_pow(p, l)?;
    if !(0 < j && j <= i && i <= top) {
        return invalid(format!("need 0 < j <= i <= p^L, got j = {j}, i = {i}, p^L = {top}"));
    }
    let k = tau_unchecked(j, p) + tau_unchecked(i - j + 1, p) - tau_unchecked(i, p);
    if !k.is_integer() || k.is_negative() {
        return Err(Error::InternalInconsistency(format!(
            "tau combination for (j={j}, i={i}, p={p}) is {k}, not a nonnegative integer"
        )));
    }
    Ok(k)
}

/// `v_p(C(p^L, i)) = L - v_p(i)` for `1 <= i <= p^L`.
pub fn vp_binomial_prime_power(i: u64, l: u32, p: u64) -> Result<u64> {
    check_prime(p)?;
    let top = checked_pow(p, l)?;
    if !(1 <= i && i <= top) {
        return invalid(format!("need 1 <= i <= p^L = {top}, got {i}"));
    }
    Ok(l as u64 - vp_u64(i, p) as u64)
}

pub(crate) fn checked_pow(p: u64, l: u32) -> Result<u64> {
    p.checked_pow(l).ok_or_else(|| Error::InvalidArgument(format!("{p}^{l} overflows u64")))
}

/// One failure of `j/p^K + K - tau(j) >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsilonViolation {
    pub j: u64,
    pub value: Ratio<i128>,
}

/// The exact value `j/p^K + K - tau(j)`.
pub fn epsilon_margin(j: u64, k: u32, p: u64) -> Result<Ratio<i128>> {
    check_prime(p)?;
    if j < 1 {
        return invalid("j must be positive");
    }
    let pk = checked_pow(p, k)? as i128;
    Ok(Ratio::new(j as i128, pk) + Ratio::from_integer(k as i128) - tau_unchecked(j, p).to_ratio())
}

/// Checks `j/p^K + K - tau(j) >= 0` for `1 <= j <= j_max`.
pub fn epsilon_inequality_violations(k: u32, j_max: u64, p: u64) -> Result<Vec<EpsilonViolation>> {
    check_prime(p)?;
    if k < 1 || j_max < 1 {
        return invalid("K and j_max must be positive");
    }
    let mut out = Vec::new();
    for j in 1..=j_max {
        let value = epsilon_margin(j, k, p)?;
        if value < Ratio::zero() {
            out.push(EpsilonViolation { j, value });
        }
    }
    Ok(out)
}

/// `p^m >= m + 1`, in exact arithmetic.
pub fn power_exceeds_successor(m: u32, p: u64) -> Result<bool> {
    check_prime(p)?;
    let lhs = num_traits::pow(BigInt::from(p), m as usize);
    Ok(lhs >= BigInt::from(m) + BigInt::one())
}
