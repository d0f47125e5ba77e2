//! Homogeneous bivariate polynomials over `Q`, their Taylor calculus, and the
//! pipeline that turns a polynomial satisfied by `w` into polynomials
//! satisfied by `z - w x` and `(z - w x) / y`.
//!
//! Derivatives are always taken in the first variable `S`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mutation::{self, Mutation};
use crate::rational::{binomial, factorial, falling_factorial, pow, q, serde_q_vec, Q};

/// `sum_j a_j S^(n-j) U^j` of declared degree `n`; `coeffs[j] = a_j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PolyJson", into = "PolyJson")]
pub struct HomoPoly {
    coeffs: Vec<Q>,
}

/// `sum_k c_k T^(n-k)`; `coeffs[0]` is the leading coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PolyJson", into = "PolyJson")]
pub struct UnivariatePoly {
    coeffs: Vec<Q>,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    degree: usize,
    #[serde(with = "serde_q_vec")]
    coefficients: Vec<Q>,
}

fn from_json(raw: PolyJson) -> Result<Vec<Q>> {
    if raw.coefficients.len() != raw.degree + 1 {
        return Err(Error::Parse(format!(
            "degree {} needs {} coefficients, got {}",
            raw.degree,
            raw.degree + 1,
            raw.coefficients.len()
        )));
    }
    Ok(raw.coefficients)
}

impl TryFrom<PolyJson> for HomoPoly {
    type Error = Error;
    fn try_from(raw: PolyJson) -> Result<Self> {
        from_json(raw).map(|coeffs| HomoPoly { coeffs })
    }
}

impl From<HomoPoly> for PolyJson {
    fn from(p: HomoPoly) -> Self {
        PolyJson { degree: p.degree(), coefficients: p.coeffs }
    }
}

impl TryFrom<PolyJson> for UnivariatePoly {
    type Error = Error;
    fn try_from(raw: PolyJson) -> Result<Self> {
        from_json(raw).map(|coeffs| UnivariatePoly { coeffs })
    }
}

impl From<UnivariatePoly> for PolyJson {
    fn from(p: UnivariatePoly) -> Self {
        PolyJson { degree: p.degree(), coefficients: p.coeffs }
    }
}

impl HomoPoly {
    /// `coeffs[j]` multiplies `S^(n-j) U^j`. Must be nonempty.
    pub fn new(coeffs: Vec<Q>) -> Result<Self> {
        if coeffs.is_empty() {
            return invalid("a homogeneous polynomial needs at least one coefficient");
        }
        Ok(HomoPoly { coeffs })
    }

    pub fn from_integers(coeffs: &[i64]) -> Result<Self> {
        HomoPoly::new(coeffs.iter().map(|&c| q(c)).collect())
    }

    pub fn zero(degree: usize) -> Self {
        HomoPoly { coeffs: vec![Q::zero(); degree + 1] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> &Q {
        &self.coeffs[j]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn eval(&self, s: &Q, u: &Q) -> Q {
        let n = self.degree();
        let mut acc = Q::zero();
        for (j, a) in self.coeffs.iter().enumerate() {
            if !a.is_zero() {
                acc += a * pow(s, n - j) * pow(u, j);
            }
        }
        acc
    }

    pub fn scale(&self, c: &Q) -> HomoPoly {
        HomoPoly { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }
}

impl fmt::Display for HomoPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.degree();
        let mut first = true;
        for (j, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({a})S^{}U^{j}", n - j)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl UnivariatePoly {
    /// Coefficients from `T^n` down to `T^0`. Must be nonempty.
    pub fn new(coeffs: Vec<Q>) -> Result<Self> {
        if coeffs.is_empty() {
            return invalid("a polynomial needs at least one coefficient");
        }
        Ok(UnivariatePoly { coeffs })
    }

    pub fn from_integers(coeffs: &[i64]) -> Result<Self> {
        UnivariatePoly::new(coeffs.iter().map(|&c| q(c)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs[0].is_one()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn eval(&self, t: &Q) -> Q {
        self.coeffs.iter().fold(Q::zero(), |acc, c| acc * t + c)
    }

    /// Horner evaluation at an element of `Q[T]/(f)`.
    pub fn eval_quotient(&self, t: &QuotientElement) -> QuotientElement {
        let mut acc = QuotientElement::constant(Q::zero(), t.modulus.clone());
        for c in &self.coeffs {
            acc = acc.mul(t).add_scalar(c);
        }
        acc
    }
}

impl fmt::Display for UnivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.degree();
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| format!("({c})T^{}", n - k))
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// An element of `Q[T]/(f)` for a monic `f`; the representative is stored
/// with ascending powers and has degree below `deg f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientElement {
    rep: Vec<Q>,
    modulus: Arc<UnivariatePoly>,
}

impl QuotientElement {
    fn check_modulus(f: &UnivariatePoly) -> Result<()> {
        if !f.is_monic() || f.degree() == 0 {
            return invalid("quotient modulus must be monic of positive degree");
        }
        Ok(())
    }

    /// The class of `T`.
    pub fn generator(f: &UnivariatePoly) -> Result<Self> {
        Self::check_modulus(f)?;
        let modulus = Arc::new(f.clone());
        let mut rep = vec![Q::zero(); f.degree()];
        if f.degree() == 1 {
            // T = -c_1 modulo T + c_1
            rep[0] = -f.coeffs[1].clone();
        } else {
            rep[1] = Q::one();
        }
        Ok(QuotientElement { rep, modulus })
    }

    fn constant(c: Q, modulus: Arc<UnivariatePoly>) -> Self {
        let mut rep = vec![Q::zero(); modulus.degree()];
        rep[0] = c;
        QuotientElement { rep, modulus }
    }

    pub fn is_zero(&self) -> bool {
        self.rep.iter().all(Zero::is_zero)
    }

    /// Ascending coefficients of the reduced representative.
    pub fn representative(&self) -> &[Q] {
        &self.rep
    }

    pub fn add(&self, other: &Self) -> Self {
        let rep = self.rep.iter().zip(&other.rep).map(|(a, b)| a + b).collect();
        QuotientElement { rep, modulus: self.modulus.clone() }
    }

    pub fn add_scalar(&self, c: &Q) -> Self {
        let mut out = self.clone();
        out.rep[0] += c;
        out
    }

    pub fn scale(&self, c: &Q) -> Self {
        let rep = self.rep.iter().map(|a| a * c).collect();
        QuotientElement { rep, modulus: self.modulus.clone() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.rep.len();
        let mut prod = vec![Q::zero(); 2 * n - 1];
        for (i, a) in self.rep.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.rep.iter().enumerate() {
                prod[i + j] += a * b;
            }
        }
        // T^n = -(c_1 T^(n-1) + ... + c_n)
        let f = &self.modulus.coeffs;
        for top in (n..prod.len()).rev() {
            let lead = std::mem::take(&mut prod[top]);
            if lead.is_zero() {
                continue;
            }
            for k in 1..=n {
                prod[top - k] -= &lead * &f[k];
            }
        }
        prod.truncate(n);
        QuotientElement { rep: prod, modulus: self.modulus.clone() }
    }
}

/// `F(S, U)` with `F(T, 1) = f(T)`, for monic `f`.
pub fn homogenize(f: &UnivariatePoly) -> Result<HomoPoly> {
    if !f.is_monic() {
        return invalid("only monic polynomials are homogenized");
    }
    Ok(HomoPoly { coeffs: f.coeffs.clone() })
}

/// `F(T, 1)`.
pub fn dehomogenize(big_f: &HomoPoly) -> UnivariatePoly {
    UnivariatePoly { coeffs: big_f.coeffs.clone() }
}

/// `k`-fold partial derivative in `S`. For `k` above the degree the result
/// is the zero polynomial of degree 0.
pub fn derivative(big_f: &HomoPoly, k: usize) -> HomoPoly {
    let n = big_f.degree();
    if k > n {
        return HomoPoly::zero(0);
    }
    let coeffs =
        (0..=n - k).map(|j| &big_f.coeffs[j] * Q::from_integer(falling_factorial((n - j) as u64, k as u64))).collect();
    HomoPoly { coeffs }
}

/// `(1/(n-i)!) F^(n-i)(z, x)` through the closed form
/// `sum_{j<=i} C(n-j, i-j) a_j z^(i-j) x^j`.
pub fn taylor_coefficient(big_f: &HomoPoly, i: usize, z: &Q, x: &Q) -> Result<Q> {
    let n = big_f.degree();
    if i > n {
        return invalid(format!("Taylor index {i} exceeds degree {n}"));
    }
    let mut acc = Q::zero();
    for j in 0..=i {
        let a = &big_f.coeffs[j];
        if a.is_zero() {
            continue;
        }
        let c = Q::from_integer(binomial((n - j) as u64, (i - j) as u64));
        acc += c * a * pow(z, i - j) * pow(x, j);
    }
    Ok(acc)
}

/// Same quantity as [`taylor_coefficient`], by differentiating and evaluating.
pub fn taylor_coefficient_by_derivative(big_f: &HomoPoly, i: usize, z: &Q, x: &Q) -> Result<Q> {
    let n = big_f.degree();
    if i > n {
        return invalid(format!("Taylor index {i} exceeds degree {n}"));
    }
    let d = derivative(big_f, n - i);
    Ok(d.eval(z, x) / Q::from_integer(factorial((n - i) as u64)))
}

/// Multiplier applied to `a_j` (the coefficient of `S^(i-j) U^j` in a degree-`i`
/// polynomial) by `Int_n`: `(n - i) / (i - j + 1)`.
pub fn integration_factor(n: u64, i: u64, j: u64) -> Q {
    let numer = if mutation::active(Mutation::IntegrateFactor) { BigInt::one() } else { BigInt::from(n - i) };
    Q::new(numer, BigInt::from(i - j + 1))
}

/// `Int_n(G) = (n - i) sum_j a_j S^(i-j+1)/(i-j+1) U^j` for `G` of degree `i < n`.
/// The `U^(i+1)` coefficient of the result is zero.
pub fn integrate(g: &HomoPoly, n: u64) -> Result<HomoPoly> {
    let i = g.degree() as u64;
    if n <= i {
        return invalid(format!("Int_n needs n > deg G, got n = {n}, deg = {i}"));
    }
    let mut coeffs: Vec<Q> = g.coeffs.iter().enumerate().map(|(j, a)| a * integration_factor(n, i, j as u64)).collect();
    coeffs.push(Q::zero());
    Ok(HomoPoly { coeffs })
}

/// Evaluates `F(s - t, u)` and `sum_i (-1)^i F^(i)(s, u) t^i / i!` and compares.
pub fn verify_taylor_identity(big_f: &HomoPoly, s: &Q, t: &Q, u: &Q) -> bool {
    let left = big_f.eval(&(s - t), u);
    let n = big_f.degree();
    let mut right = Q::zero();
    for i in 0..=n {
        let term = derivative(big_f, i).eval(s, u) * pow(t, i) / Q::from_integer(factorial(i as u64));
        if i % 2 == 0 {
            right += term;
        } else {
            right -= term;
        }
    }
    left == right
}

/// The monic polynomial whose roots are `z - w x` for the roots `w` of `f`:
/// the coefficient of `T^(n-j)` is `(-1)^j (1/(n-j)!) F^(n-j)(z, x)`.
pub fn descend_g(f: &UnivariatePoly, z: &Q, x: &Q) -> Result<UnivariatePoly> {
    let big_f = homogenize(f)?;
    let flip = !mutation::active(Mutation::DescendSign);
    let coeffs = (0..=f.degree())
        .map(|j| {
            let c = taylor_coefficient(&big_f, j, z, x)?;
            Ok(if flip && j % 2 == 1 { -c } else { c })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UnivariatePoly { coeffs })
}

/// Rescales roots by `1/y`: `c_j = b_j / y^j`.
pub fn descend_h(g: &UnivariatePoly, y: &Q) -> Result<UnivariatePoly> {
    if y.is_zero() {
        return invalid("y must be nonzero");
    }
    if !g.is_monic() {
        return invalid("descend_h expects a monic polynomial");
    }
    let coeffs = g.coeffs.iter().enumerate().map(|(j, b)| b / pow(y, j)).collect();
    Ok(UnivariatePoly { coeffs })
}

/// Output of [`verify_root_transfer`].
#[derive(Clone, Debug)]
pub struct RootTransfer {
    pub big_f: HomoPoly,
    pub g: UnivariatePoly,
    pub h: UnivariatePoly,
    pub g_vanishes: bool,
    pub h_vanishes: bool,
}

impl RootTransfer {
    pub fn verified(&self) -> bool {
        self.g_vanishes && self.h_vanishes
    }
}

/// Runs `f -> g -> h` and checks `g(z - w x) = 0` and `h((z - w x)/y) = 0`
/// where `w` is the class of `T` in `Q[T]/(f)`.
pub fn root_transfer(f: &UnivariatePoly, z: &Q, x: &Q, y: &Q) -> Result<RootTransfer> {
    if y.is_zero() {
        return invalid("y must be nonzero");
    }
    let big_f = homogenize(f)?;
    let g = descend_g(f, z, x)?;
    let h = descend_h(&g, y)?;
    let w = QuotientElement::generator(f)?;
    let shifted = w.scale(&-x).add_scalar(z);
    let g_vanishes = g.eval_quotient(&shifted).is_zero();
    let scaled = shifted.scale(&(Q::one() / y));
    let h_vanishes = h.eval_quotient(&scaled).is_zero();
    Ok(RootTransfer { big_f, g, h, g_vanishes, h_vanishes })
}

pub fn verify_root_transfer(f: &UnivariatePoly, z: &Q, x: &Q, y: &Q) -> Result<bool> {
    root_transfer(f, z, x, y).map(|r| r.verified())
}

/// Explicit decomposition `H(z, x) = alpha x^n + beta y^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InxyWitness {
    pub alpha: Q,
    pub beta: Q,
}

/// Certifies `H(z, x) in (x^n, y^n)` for a concrete instance.
///
/// Requires `z = c x - d y` and, for `i = 0..n-1`, a rational `witnesses[i]`
/// with `H^(n-i)(z, x) = witnesses[i] * y^i`. Expanding `H(z + d y, x)` around
/// `z` puts every term except `H(z, x)` into `y^n`, and `H(z + d y, x) =
/// x^n H(c, 1)`.
pub fn check_inxy_instance(
    big_h: &HomoPoly,
    z: &Q,
    x: &Q,
    y: &Q,
    c: &Q,
    d: &Q,
    witnesses: &[Q],
) -> Result<InxyWitness> {
    let n = big_h.degree();
    if witnesses.len() != n {
        return invalid(format!("expected {n} witnesses, got {}", witnesses.len()));
    }
    if *z != c * x - d * y {
        return Err(Error::HypothesisViolated("z != c x - d y".into()));
    }
    let mut tail = Q::zero();
    for (i, q_i) in witnesses.iter().enumerate() {
        let lhs = derivative(big_h, n - i).eval(z, x);
        if lhs != q_i * pow(y, i) {
            return Err(Error::HypothesisViolated(format!(
                "H^({})(z, x) = {lhs} is not {q_i} * y^{i} (index i = {i})",
                n - i
            )));
        }
        tail += q_i * pow(d, n - i) / Q::from_integer(factorial((n - i) as u64));
    }
    let alpha = big_h.eval(c, &Q::one());
    let beta = -tail;
    if big_h.eval(z, x) != &alpha * pow(x, n) + &beta * pow(y, n) {
        return Err(Error::InternalInconsistency("decomposition of H(z, x) does not reproduce its value".into()));
    }
    Ok(InxyWitness { alpha, beta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q_frac;

    fn up(c: &[i64]) -> UnivariatePoly {
        UnivariatePoly::from_integers(c).unwrap()
    }

    fn hp(c: &[i64]) -> HomoPoly {
        HomoPoly::from_integers(c).unwrap()
    }

    #[test]
    fn homogenize_examples() {
        let f = UnivariatePoly::new(vec![q(1), q_frac(2, 3)]).unwrap();
        let big_f = homogenize(&f).unwrap();
        assert_eq!(big_f.coeffs(), &[q(1), q_frac(2, 3)]);
        assert_eq!(homogenize(&up(&[1, 0, -1])).unwrap(), hp(&[1, 0, -1]));
        assert_eq!(homogenize(&up(&[1, 0, 0, 0])).unwrap(), hp(&[1, 0, 0, 0]));
        assert!(homogenize(&up(&[2, 1])).is_err());
        let t = q_frac(5, 7);
        assert_eq!(homogenize(&up(&[1, 0, -1])).unwrap().eval(&t, &q(1)), up(&[1, 0, -1]).eval(&t));
    }

    #[test]
    fn dehomogenize_examples() {
        assert_eq!(dehomogenize(&hp(&[1, 0, -1])), up(&[1, 0, -1]));
        assert_eq!(dehomogenize(&hp(&[1, 4])), up(&[1, 4]));
        assert!(dehomogenize(&HomoPoly::zero(2)).is_zero());
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(derivative(&hp(&[1, 0, 0]), 1), hp(&[2, 0]));
        // S^3 + a S^2 U with a = 5: second derivative 6S + 10U
        assert_eq!(derivative(&hp(&[1, 5, 0, 0]), 2), hp(&[6, 10]));
        let f = hp(&[3, -1, 4]);
        assert_eq!(derivative(&f, 0), f);
        assert_eq!(derivative(&f, 3), HomoPoly::zero(0));
    }

    #[test]
    fn taylor_coefficient_examples() {
        let f = hp(&[2, -3, 5, 7]);
        let (z, x) = (q(2), q_frac(-1, 3));
        assert_eq!(taylor_coefficient(&f, 3, &z, &x).unwrap(), f.eval(&z, &x));
        let cube = hp(&[1, 0, 0, 0]);
        assert_eq!(taylor_coefficient(&cube, 2, &q(4), &q(9)).unwrap(), q(48));
        assert_eq!(taylor_coefficient(&hp(&[1, 0, -1]), 1, &q(3), &q(1)).unwrap(), q(6));
        for i in 0..=3 {
            assert_eq!(
                taylor_coefficient(&f, i, &z, &x).unwrap(),
                taylor_coefficient_by_derivative(&f, i, &z, &x).unwrap()
            );
        }
        assert!(taylor_coefficient(&f, 4, &z, &x).is_err());
    }

    #[test]
    fn integrate_examples() {
        let n = 9u64;
        assert_eq!(integrate(&hp(&[1, 0]), n).unwrap(), HomoPoly::new(vec![q_frac(8, 2), q(0), q(0)]).unwrap());
        // Int_{p^L}(p^L S + a U) = C(p^L, 2) S^2 + (p^L - 1) a S U
        let (pl, a) = (8i64, 5i64);
        let got = integrate(&hp(&[pl, a]), pl as u64).unwrap();
        assert_eq!(got, hp(&[28, (pl - 1) * a, 0]));
        assert!(integrate(&HomoPoly::zero(3), 7).unwrap().is_zero());
        assert_eq!(integrate(&HomoPoly::zero(3), 7).unwrap().degree(), 4);
        assert!(integrate(&hp(&[1, 1]), 1).is_err());
        let g = hp(&[3, -2, 7]);
        let int = integrate(&g, 6).unwrap();
        assert_eq!(derivative(&int, 1), g.scale(&q(4)));
    }

    #[test]
    fn taylor_identity_examples() {
        assert!(verify_taylor_identity(&hp(&[1, 0, 0]), &q(1), &q(1), &q(0)));
        let f = hp(&[1, -4, 0, 2]);
        assert!(verify_taylor_identity(&f, &q(3), &q(0), &q(-2)));
        assert!(verify_taylor_identity(&f, &q_frac(1, 2), &q_frac(-7, 3), &q(5)));
    }

    #[test]
    fn descend_examples() {
        let f = up(&[1, 0, -1]);
        assert_eq!(descend_g(&f, &q(3), &q(1)).unwrap(), up(&[1, -6, 8]));
        assert_eq!(descend_g(&f, &q(3), &q(0)).unwrap(), up(&[1, -6, 9]));
        let (a, z, x) = (q(4), q_frac(1, 2), q(3));
        let lin = UnivariatePoly::new(vec![q(1), a.clone()]).unwrap();
        let g = descend_g(&lin, &z, &x).unwrap();
        assert_eq!(g.coeffs(), &[q(1), -(z + a * x)]);

        let g = up(&[1, -6, 8]);
        assert_eq!(descend_h(&g, &q(2)).unwrap(), up(&[1, -3, 2]));
        assert_eq!(descend_h(&g, &q(1)).unwrap(), g);
        let lin = up(&[1, -5]);
        assert_eq!(descend_h(&lin, &q(3)).unwrap().coeffs(), &[q(1), q_frac(-5, 3)]);
        assert!(descend_h(&g, &q(0)).is_err());
    }

    #[test]
    fn odd_degree_g_is_monic() {
        let f = up(&[1, 2, 0, -3]);
        let g = descend_g(&f, &q(2), &q(5)).unwrap();
        assert!(g.is_monic());
    }

    #[test]
    fn root_transfer_examples() {
        let r = root_transfer(&up(&[1, 0, -1]), &q(3), &q(1), &q(2)).unwrap();
        assert_eq!(r.g, up(&[1, -6, 8]));
        assert_eq!(r.h, up(&[1, -3, 2]));
        assert!(r.verified());
        assert!(verify_root_transfer(&up(&[1, 5]), &q_frac(2, 3), &q(-4), &q_frac(1, 7)).unwrap());
        assert!(verify_root_transfer(&up(&[1, 0, -1]), &q(3), &q(1), &q(0)).is_err());
        assert!(verify_root_transfer(&up(&[3, 0, -1]), &q(3), &q(1), &q(1)).is_err());
    }

    #[test]
    fn quotient_arithmetic() {
        // T^2 = 2 in Q[T]/(T^2 - 2)
        let f = up(&[1, 0, -2]);
        let t = QuotientElement::generator(&f).unwrap();
        let sq = t.mul(&t);
        assert_eq!(sq.representative(), &[q(2), q(0)]);
        assert!(f.eval_quotient(&t).is_zero());
        let lin = up(&[1, 7]);
        let w = QuotientElement::generator(&lin).unwrap();
        assert_eq!(w.representative(), &[q(-7)]);
        assert!(lin.eval_quotient(&w).is_zero());
    }

    #[test]
    fn inxy_examples() {
        // H = S^n, z = 0, c = d = 0
        let n = 3;
        let h = hp(&[1, 0, 0, 0]);
        let w = check_inxy_instance(&h, &q(0), &q(2), &q(5), &q(0), &q(0), &vec![q(0); n]);
        // H^(3)(0, x) = 6, which is not 0 * y^0
        assert!(matches!(w, Err(Error::HypothesisViolated(_))));
        let wit = [q(6), q(0), q(0)];
        let w = check_inxy_instance(&h, &q(0), &q(2), &q(5), &q(0), &q(0), &wit).unwrap();
        assert_eq!(w, InxyWitness { alpha: q(0), beta: q(0) });

        // H = S - cU with z = c x
        let (c, x, y) = (q(3), q(2), q(7));
        let h = HomoPoly::new(vec![q(1), -c.clone()]).unwrap();
        let w = check_inxy_instance(&h, &(&c * &x), &x, &y, &c, &q(0), &[q(1)]).unwrap();
        assert_eq!(&w.alpha * &x + &w.beta * &y, q(0));

        // H = S^2, x = 1, y = 2, z = 3 = 1*1 - (-1)*2
        let h = hp(&[1, 0, 0]);
        let w = check_inxy_instance(&h, &q(3), &q(1), &q(2), &q(1), &q(-1), &[q(2), q(3)]).unwrap();
        assert_eq!(w, InxyWitness { alpha: q(1), beta: q(2) });

        let bad = check_inxy_instance(&h, &q(3), &q(1), &q(2), &q(1), &q(-1), &[q(2), q(4)]);
        match bad {
            Err(Error::HypothesisViolated(msg)) => assert!(msg.contains("i = 1")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(check_inxy_instance(&h, &q(4), &q(1), &q(2), &q(1), &q(-1), &[q(2), q(3)]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = UnivariatePoly::new(vec![q(1), q_frac(-3, 4), q(0)]).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"{"degree":2,"coefficients":["1","-3/4","0"]}"#);
        let back: UnivariatePoly = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<HomoPoly>(r#"{"degree":2,"coefficients":["1"]}"#).is_err());
    }
}
