//! Finite precision models of the base ring.
//!
//! A model is a commutative algebra that is free of finite rank over
//! `Z/p^M`, given by structure constants on a named basis, together with the
//! distinguished elements `1, x, y, z, sigma`. Because `p` is nilpotent in a
//! model, every statement about "some power of `p`" takes the exponent
//! explicitly and carries the precision it was checked at.

mod file;
mod ideal;
pub mod presentation;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ChainRing;
use crate::padic::TauRational;

pub use file::{load_model, ModelFile};
pub use ideal::{
    colon_module, koszul_comparison, koszul_h1, stabilization_check, ColonModule, KoszulComparison, Precision,
    StabilizationReport,
};

/// Coefficient vector of a model element in the model's basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModelElement(pub Vec<u64>);

impl ModelElement {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }
}

impl fmt::Display for ModelElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Which distinguished element a name refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distinguished {
    One,
    X,
    Y,
    Z,
    Sigma,
}

/// A validated finite model. Immutable after construction.
#[derive(Clone, Debug)]
pub struct FiniteModel {
    ring: ChainRing,
    basis: Vec<String>,
    /// sparse products: `table[i * d + j]` lists the nonzero coordinates of `e_i e_j`
    table: Vec<Vec<(usize, u64)>>,
    one: ModelElement,
    x: ModelElement,
    y: ModelElement,
    z: ModelElement,
    sigma: ModelElement,
    x_nilpotency: Option<usize>,
    y_nilpotency: Option<usize>,
}

impl FiniteModel {
    /// Builds and validates a model from a dense structure-constant table
    /// (`mul[i][j]` is the coefficient vector of `e_i e_j`).
    pub fn new(
        p: u64,
        precision: u32,
        basis: Vec<String>,
        mul: Vec<Vec<Vec<u64>>>,
        elements: [ModelElement; 5],
    ) -> Result<Self> {
        let ring = ChainRing::new(p, precision)?;
        let d = basis.len();
        if d == 0 {
            return Err(Error::ModelInvariant("empty basis".into()));
        }
        if mul.len() != d || mul.iter().any(|row| row.len() != d) {
            return Err(Error::ModelInvariant(format!("structure table must be {d} x {d}")));
        }
        let mut table = Vec::with_capacity(d * d);
        for (i, row) in mul.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.len() != d {
                    return Err(Error::ModelInvariant(format!(
                        "product of basis elements {i} and {j} has length {}, expected {d}",
                        v.len()
                    )));
                }
                if let Some(bad) = v.iter().find(|&&a| a >= ring.modulus()) {
                    return Err(Error::ModelInvariant(format!(
                        "entry {bad} in product ({i}, {j}) is not reduced mod {}",
                        ring.modulus()
                    )));
                }
                table.push(v.iter().enumerate().filter(|(_, &a)| a != 0).map(|(k, &a)| (k, a)).collect());
            }
        }
        let names = ["one", "x", "y", "z", "sigma"];
        for (name, e) in names.iter().zip(&elements) {
            if e.0.len() != d || e.0.iter().any(|&a| a >= ring.modulus()) {
                return Err(Error::ModelInvariant(format!("element {name} is malformed")));
            }
        }
        let [one, x, y, z, sigma] = elements;
        let mut model = FiniteModel { ring, basis, table, one, x, y, z, sigma, x_nilpotency: None, y_nilpotency: None };
        model.validate()?;
        let limit = d * precision as usize + 1;
        model.x_nilpotency = model.nilpotency_index(&model.x, limit);
        model.y_nilpotency = model.nilpotency_index(&model.y, limit);
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        for i in 0..d {
            for j in i + 1..d {
                if self.table[i * d + j] != self.table[j * d + i] {
                    return Err(Error::ModelInvariant(format!(
                        "multiplication is not commutative on ({}, {})",
                        self.basis[i], self.basis[j]
                    )));
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                let ij = self.basis_product(i, j);
                for k in 0..d {
                    let left = self.mul_basis(&ij, k);
                    let jk = self.basis_product(j, k);
                    let right = self.mul_basis(&jk, i);
                    if left != right {
                        return Err(Error::ModelInvariant(format!(
                            "multiplication is not associative on ({}, {}, {})",
                            self.basis[i], self.basis[j], self.basis[k]
                        )));
                    }
                }
            }
        }
        for i in 0..d {
            let e = self.basis_element(i);
            if self.mul(&self.one, &e) != e {
                return Err(Error::ModelInvariant(format!(
                    "the element one does not act as identity on {}",
                    self.basis[i]
                )));
            }
        }
        let lhs = self.pow(&self.sigma, self.p() - 1);
        let rhs = self.scale(&self.one, self.p());
        if lhs != rhs {
            return Err(Error::ModelInvariant("sigma^(p-1) != p".into()));
        }
        Ok(())
    }

    pub fn ring(&self) -> ChainRing {
        self.ring
    }

    pub fn p(&self) -> u64 {
        self.ring.p()
    }

    pub fn precision(&self) -> u32 {
        self.ring.precision()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn one(&self) -> &ModelElement {
        &self.one
    }

    pub fn x(&self) -> &ModelElement {
        &self.x
    }

    pub fn y(&self) -> &ModelElement {
        &self.y
    }

    pub fn z(&self) -> &ModelElement {
        &self.z
    }

    pub fn sigma(&self) -> &ModelElement {
        &self.sigma
    }

    /// Smallest `n` with `x^n = 0`, if `x` is nilpotent.
    pub fn x_nilpotency(&self) -> Option<usize> {
        self.x_nilpotency
    }

    pub fn y_nilpotency(&self) -> Option<usize> {
        self.y_nilpotency
    }

    pub fn distinguished(&self, which: Distinguished) -> &ModelElement {
        match which {
            Distinguished::One => &self.one,
            Distinguished::X => &self.x,
            Distinguished::Y => &self.y,
            Distinguished::Z => &self.z,
            Distinguished::Sigma => &self.sigma,
        }
    }

    /// Dense structure constants, `mul[i][j]` = coordinates of `e_i e_j`.
    pub fn structure_constants(&self) -> Vec<Vec<Vec<u64>>> {
        let d = self.dim();
        (0..d).map(|i| (0..d).map(|j| self.basis_product(i, j).0).collect()).collect()
    }

    pub fn basis_element(&self, i: usize) -> ModelElement {
        let mut v = vec![0; self.dim()];
        v[i] = 1;
        ModelElement(v)
    }

    fn basis_product(&self, i: usize, j: usize) -> ModelElement {
        let mut v = vec![0; self.dim()];
        for &(k, a) in &self.table[i * self.dim() + j] {
            v[k] = a;
        }
        ModelElement(v)
    }

    /// `a * e_k`.
    pub fn mul_basis(&self, a: &ModelElement, k: usize) -> ModelElement {
        let d = self.dim();
        let mut out = vec![0u64; d];
        for (i, &ai) in a.0.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for &(l, c) in &self.table[i * d + k] {
                out[l] = self.ring.add(out[l], self.ring.mul(ai, c));
            }
        }
        ModelElement(out)
    }

    pub fn zero(&self) -> ModelElement {
        ModelElement(vec![0; self.dim()])
    }

    pub fn mul(&self, a: &ModelElement, b: &ModelElement) -> ModelElement {
        let d = self.dim();
        let mut out = vec![0u64; d];
        for (i, &ai) in a.0.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.0.iter().enumerate() {
                if bj == 0 {
                    continue;
                }
                let c = self.ring.mul(ai, bj);
                for &(l, s) in &self.table[i * d + j] {
                    out[l] = self.ring.add(out[l], self.ring.mul(c, s));
                }
            }
        }
        ModelElement(out)
    }

    pub fn add(&self, a: &ModelElement, b: &ModelElement) -> ModelElement {
        ModelElement(self.ring.add_vec(&a.0, &b.0))
    }

    pub fn sub(&self, a: &ModelElement, b: &ModelElement) -> ModelElement {
        ModelElement(self.ring.sub_vec(&a.0, &b.0))
    }

    pub fn neg(&self, a: &ModelElement) -> ModelElement {
        ModelElement(a.0.iter().map(|&v| self.ring.neg(v)).collect())
    }

    /// Multiplication by an integer scalar (already reduced mod `p^M`).
    pub fn scale(&self, a: &ModelElement, c: u64) -> ModelElement {
        ModelElement(self.ring.scale_vec(c % self.ring.modulus(), &a.0))
    }

    pub fn from_int(&self, c: i64) -> ModelElement {
        self.scale(&self.one, self.ring.from_i64(c))
    }

    pub fn pow(&self, a: &ModelElement, e: u64) -> ModelElement {
        let mut result = self.one.clone();
        let mut base = a.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        result
    }

    /// `sigma^k = p^(k div (p-1)) sigma^(k mod (p-1))`.
    pub fn sigma_pow(&self, k: u64) -> ModelElement {
        let p = self.p();
        let q = k / (p - 1);
        let r = k % (p - 1);
        let pq = if q >= self.precision() as u64 { 0 } else { self.ring.p_pow(q as u32) };
        self.scale(&self.pow(&self.sigma, r), pq)
    }

    /// `p^e * a` for `e >= 0` in `(1/(p-1)) Z`, realized with powers of `sigma`.
    pub fn mul_p_power(&self, a: &ModelElement, e: TauRational) -> Result<ModelElement> {
        if e.is_negative() {
            return Err(Error::InvalidArgument(format!("cannot realize p^({e}) in the model")));
        }
        Ok(self.mul(a, &self.sigma_pow(e.scaled() as u64)))
    }

    /// Smallest `n` with `a^n = 0`, if `a` is nilpotent of order at most `limit`.
    pub fn nilpotency_index(&self, a: &ModelElement, limit: usize) -> Option<usize> {
        let mut acc = self.one.clone();
        for n in 1..=limit {
            acc = self.mul(&acc, a);
            if acc.is_zero() {
                return Some(n);
            }
        }
        None
    }

    pub fn element_to_string(&self, a: &ModelElement) -> String {
        let terms: Vec<String> =
            a.0.iter()
                .zip(&self.basis)
                .filter(|(&c, _)| c != 0)
                .map(|(c, name)| if name == "1" { c.to_string() } else { format!("{c}*{name}") })
                .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }

    /// Generators of the ideal spanned by `gens` as a `Z/p^M`-module:
    /// all products `g * e_b`.
    pub fn ideal_module_generators(&self, gens: &[ModelElement]) -> Vec<Vec<u64>> {
        let mut out = Vec::with_capacity(gens.len() * self.dim());
        for g in gens {
            for b in 0..self.dim() {
                out.push(self.mul_basis(g, b).0);
            }
        }
        out
    }
}

/// `p^exponent * base`, where the exponent may be negative or fractional.
///
/// Two formal elements are only compared after realization; the exponent is
/// a lower bound for the true valuation, not the valuation itself.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FormalElement {
    pub base: ModelElement,
    pub exponent: TauRational,
}

impl FormalElement {
    pub fn new(base: ModelElement, exponent: TauRational) -> Self {
        FormalElement { base, exponent }
    }

    pub fn zero(model: &FiniteModel) -> Self {
        FormalElement { base: model.zero(), exponent: TauRational::zero(model.p()) }
    }

    pub fn is_zero(&self) -> bool {
        self.base.is_zero()
    }

    /// `base * sigma^((p-1) * exponent)`; defined only for nonnegative exponents.
    pub fn realize(&self, model: &FiniteModel) -> Result<ModelElement> {
        if self.is_zero() {
            return Ok(model.zero());
        }
        model.mul_p_power(&self.base, self.exponent)
    }

    /// Multiplies by `p^shift`.
    pub fn shift(&self, shift: TauRational) -> Self {
        FormalElement { base: self.base.clone(), exponent: self.exponent + shift }
    }

    pub fn mul_base(&self, model: &FiniteModel, r: &ModelElement) -> Self {
        FormalElement { base: model.mul(&self.base, r), exponent: self.exponent }
    }

    /// Sum, written over the smaller of the two exponents.
    pub fn add(&self, model: &FiniteModel, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        let (lo, hi) = if self.exponent <= other.exponent { (self, other) } else { (other, self) };
        let lifted = model.mul_p_power(&hi.base, hi.exponent - lo.exponent)?;
        Ok(FormalElement { base: model.add(&lo.base, &lifted), exponent: lo.exponent })
    }
}
