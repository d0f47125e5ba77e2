//! Ideals, colon modules and Koszul homology inside a finite model.

use serde::Serialize;

use super::{FiniteModel, ModelElement};
use crate::error::{Error, Result};
use crate::linalg::{preimage, quotient_invariants, LinearSystem, Submodule};

/// Precision data carried by every report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Precision {
    pub p: u64,
    /// coefficients live in `Z/p^M`
    pub modulus_exponent: u32,
    pub x_nilpotency: Option<usize>,
    pub y_nilpotency: Option<usize>,
}

impl FiniteModel {
    pub fn precision_info(&self) -> Precision {
        Precision {
            p: self.p(),
            modulus_exponent: self.precision(),
            x_nilpotency: self.x_nilpotency(),
            y_nilpotency: self.y_nilpotency(),
        }
    }

    /// Canonical form of the `Z/p^M`-span of `gens`.
    pub fn canonical_form(&self, gens: &[ModelElement]) -> Submodule {
        let rows: Vec<Vec<u64>> = gens.iter().map(|g| g.0.clone()).collect();
        Submodule::from_generators(self.ring(), self.dim(), &rows)
    }

    /// The ideal generated by `gens`, as a submodule.
    pub fn ideal(&self, gens: &[ModelElement]) -> Submodule {
        Submodule::from_generators(self.ring(), self.dim(), &self.ideal_module_generators(gens))
    }

    /// Cofactors `c` with `u = sum c_g g`, or `None` when `u` is not in the ideal.
    pub fn ideal_membership(&self, u: &ModelElement, gens: &[ModelElement]) -> Option<Vec<ModelElement>> {
        if gens.is_empty() {
            return u.is_zero().then(Vec::new);
        }
        let d = self.dim();
        let system = LinearSystem::new(self.ring(), d, &self.ideal_module_generators(gens));
        let coeffs = system.solve(&u.0)?;
        Some(coeffs.chunks(d).map(|c| ModelElement(c.to_vec())).collect())
    }

    pub fn power_ideal_generators(&self, i: u32) -> Vec<ModelElement> {
        vec![self.pow(self.x(), i as u64), self.pow(self.y(), i as u64)]
    }

    /// `p^k` as a ring element; zero once `k >= M`.
    pub fn p_power_element(&self, k: u32) -> ModelElement {
        if k >= self.precision() {
            self.zero()
        } else {
            self.scale(self.one(), self.ring().p_pow(k))
        }
    }

    /// Elements killed by `p^n`. The model is free over `Z/p^M`, so this is `p^(M-n) R`.
    pub fn p_power_annihilator(&self, n: u32) -> Submodule {
        let ring = self.ring();
        let m = self.precision();
        if n >= m {
            return Submodule::full(ring, self.dim());
        }
        Submodule::full(ring, self.dim()).scaled_by_p_power(m - n)
    }

    /// `{r : p^n r in I}`.
    fn colon(&self, n: u32, ideal: &Submodule) -> Submodule {
        let pn = self.p_power_element(n);
        let images: Vec<Vec<u64>> = (0..self.dim()).map(|b| self.mul_basis(&pn, b).0).collect();
        preimage(self.ring(), &images, ideal)
    }
}

/// `J = {r : p^N r in (x^i, y^i)}` and its quotient by `(x^i, y^i)`.
///
/// `reduced_quotient_invariants` describes `J / ((x^i, y^i) + ann(p^N))`. The
/// annihilator of `p^N` always lies in `J` in a model, because `p` is
/// nilpotent there; dividing it out removes that truncation effect.
#[derive(Clone, Debug, Serialize)]
pub struct ColonModule {
    pub n: u32,
    pub i: u32,
    #[serde(skip)]
    pub j: Submodule,
    #[serde(skip)]
    pub ideal: Submodule,
    pub j_length: u32,
    pub ideal_length: u32,
    pub quotient_invariants: Vec<u32>,
    pub reduced_quotient_invariants: Vec<u32>,
    pub effective_precision: u32,
    pub precision: Precision,
}

fn check_exponent(model: &FiniteModel, n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("the p-power exponent must be positive".into()));
    }
    if n >= model.precision() {
        return Err(Error::PrecisionExhausted(format!("p^{n} vanishes in a model of precision {}", model.precision())));
    }
    Ok(())
}

fn colon_of(model: &FiniteModel, n: u32, i: u32) -> ColonModule {
    let ideal = model.ideal(&model.power_ideal_generators(i));
    let j = model.colon(n, &ideal);
    let reduced_base = ideal.sum(&model.p_power_annihilator(n));
    ColonModule {
        n,
        i,
        j_length: j.length(),
        ideal_length: ideal.length(),
        quotient_invariants: quotient_invariants(&j, &ideal),
        reduced_quotient_invariants: quotient_invariants(&j, &reduced_base),
        j,
        ideal,
        effective_precision: model.precision().saturating_sub(n),
        precision: model.precision_info(),
    }
}

pub fn colon_module(model: &FiniteModel, n: u32, i: u32) -> Result<ColonModule> {
    check_exponent(model, n)?;
    if i == 0 {
        return Err(Error::InvalidArgument("the ideal power must be positive".into()));
    }
    Ok(colon_of(model, n, i))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilizationReport {
    pub n_power: u32,
    pub from: u32,
    pub to: u32,
    pub injective: bool,
    pub surjective: bool,
    pub reduced_injective: bool,
    pub reduced_surjective: bool,
    pub source_invariants: Vec<u32>,
    pub target_invariants: Vec<u32>,
    pub reduced_source_invariants: Vec<u32>,
    pub reduced_target_invariants: Vec<u32>,
    pub effective_precision: u32,
    pub precision: Precision,
}

/// Injectivity and surjectivity of `J_src / I_src -> J_dst / I_dst`, `r -> r * mult`.
fn induced_map(
    model: &FiniteModel,
    mult: &ModelElement,
    j_src: &Submodule,
    i_src: &Submodule,
    j_dst: &Submodule,
    i_dst: &Submodule,
) -> (bool, bool) {
    let images: Vec<Vec<u64>> = j_src.rows().iter().map(|r| model.mul(&ModelElement(r.clone()), mult).0).collect();
    let coeffs = preimage(model.ring(), &images, i_dst);
    let ring = model.ring();
    let injective = coeffs.rows().iter().all(|c| {
        let mut v = vec![0u64; model.dim()];
        for (ci, g) in c.iter().zip(j_src.rows()) {
            if *ci != 0 {
                v = ring.add_vec(&v, &ring.scale_vec(*ci, g));
            }
        }
        i_src.contains(&v)
    });
    let image = Submodule::from_generators(ring, model.dim(), &images).sum(i_dst);
    (injective, image == *j_dst)
}

/// The map `Q_n -> Q_k` given by multiplication with `(xy)^(k-n)`.
pub fn stabilization_check(model: &FiniteModel, n_power: u32, n: u32, k: u32) -> Result<StabilizationReport> {
    check_exponent(model, n_power)?;
    if n == 0 || n > k {
        return Err(Error::InvalidArgument(format!("need 0 < n <= k, got n = {n}, k = {k}")));
    }
    let src = colon_of(model, n_power, n);
    let dst = colon_of(model, n_power, k);
    let xy = model.mul(model.x(), model.y());
    let mult = model.pow(&xy, (k - n) as u64);
    let (injective, surjective) = induced_map(model, &mult, &src.j, &src.ideal, &dst.j, &dst.ideal);
    let ann = model.p_power_annihilator(n_power);
    let (src_red, dst_red) = (src.ideal.sum(&ann), dst.ideal.sum(&ann));
    let (reduced_injective, reduced_surjective) = induced_map(model, &mult, &src.j, &src_red, &dst.j, &dst_red);
    Ok(StabilizationReport {
        n_power,
        from: n,
        to: k,
        injective,
        surjective,
        reduced_injective,
        reduced_surjective,
        source_invariants: src.quotient_invariants,
        target_invariants: dst.quotient_invariants,
        reduced_source_invariants: src.reduced_quotient_invariants,
        reduced_target_invariants: dst.reduced_quotient_invariants,
        effective_precision: model.precision() - n_power,
        precision: model.precision_info(),
    })
}

/// Invariant factors (as exponents of `p`) of the degree-one homology of the
/// Koszul complex on `(p^n, x, y)`.
pub fn koszul_h1(model: &FiniteModel, n: u32) -> Vec<u32> {
    let ring = model.ring();
    let d = model.dim();
    let pn = model.p_power_element(n);
    let f = [pn, model.x().clone(), model.y().clone()];
    let mut d1 = Vec::with_capacity(3 * d);
    for t in &f {
        for b in 0..d {
            d1.push(model.mul_basis(t, b).0);
        }
    }
    let cycles = preimage(ring, &d1, &Submodule::zero(ring, d));
    // e_s ^ e_t -> f_s e_t - f_t e_s
    let mut d2 = Vec::with_capacity(3 * d);
    for (s, t) in [(0usize, 1usize), (0, 2), (1, 2)] {
        for b in 0..d {
            let mut v = vec![0u64; 3 * d];
            let fs = model.mul_basis(&f[s], b);
            let ft = model.mul_basis(&f[t], b);
            v[t * d..(t + 1) * d].copy_from_slice(&fs.0);
            v[s * d..(s + 1) * d].copy_from_slice(&model.neg(&ft).0);
            d2.push(v);
        }
    }
    let boundaries = Submodule::from_generators(ring, 3 * d, &d2);
    debug_assert!(cycles.contains_module(&boundaries));
    quotient_invariants(&cycles, &boundaries)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KoszulComparison {
    pub n: u32,
    pub h1_invariants: Vec<u32>,
    pub colon_quotient_invariants: Vec<u32>,
    pub coincide: bool,
    pub effective_precision: u32,
    pub precision: Precision,
}

/// Compares `H_1` with `J/(x, y)` for `J = {r : p^n r in (x, y)}`. For
/// `n >= M` both sides use `p^n = 0`.
pub fn koszul_comparison(model: &FiniteModel, n: u32) -> KoszulComparison {
    let h1 = koszul_h1(model, n);
    let ideal = model.ideal(&[model.x().clone(), model.y().clone()]);
    let j = model.colon(n, &ideal);
    let q = quotient_invariants(&j, &ideal);
    KoszulComparison {
        n,
        coincide: h1 == q,
        h1_invariants: h1,
        colon_quotient_invariants: q,
        effective_precision: model.precision().saturating_sub(n),
        precision: model.precision_info(),
    }
}
