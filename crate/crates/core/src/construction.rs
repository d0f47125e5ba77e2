//! Step-by-step simulation of the inductive polynomial construction over a
//! finite model, with verification of conditions A-D after every step.
//!
//! Polynomials are homogeneous in `S, U` and stored by their raw coefficients:
//! entry `j` of a degree-`i` polynomial is the coefficient of `S^(i-j) U^j`,
//! kept as a [`FormalElement`] so that negative and fractional powers of `p`
//! are tracked exactly. The normalized coefficients are
//! `a_ij = raw_j / C(p^L_i - j, i - j)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::homotaylor::integration_factor;
use crate::linalg::{ChainRing, LinearSystem, Submodule};
use crate::mutation::{self, Mutation};
use crate::padic::{check_prime, tau_unchecked, vp_big_unchecked, vp_u64, TauRational};
use crate::rational::Q;
use crate::ringmodel::{FiniteModel, FormalElement, ModelElement};

/// `E_i = K - tau(i) + tau(2)`.
pub fn step_exponent(i: u64, k: u32, p: u64) -> Result<TauRational> {
    check_prime(p)?;
    if i < 1 {
        return Err(Error::InvalidArgument("E_i needs i >= 1".into()));
    }
    let base = TauRational::from_int(k as i64, p) - tau_unchecked(i, p);
    if mutation::active(Mutation::StepExponentTau2) {
        Ok(base)
    } else {
        Ok(base + tau_unchecked(2, p))
    }
}

/// Both sides of the exponent identity used for the `Case 2` coefficients:
/// `E_i - E_k + v(k, j) - v'(i, k, j) + (K - tau(j))` and `K - tau(j + i - k)`,
/// where `v`, `v'` are the binomial valuations written through `tau`.
pub fn case2_exponent_identity(i: u64, k: u64, j: u64, big_k: u32, p: u64) -> Result<(TauRational, TauRational)> {
    check_prime(p)?;
    if !(1 <= j && j <= k && k < i) {
        return Err(Error::InvalidArgument(format!("need 1 <= j <= k < i, got i={i}, k={k}, j={j}")));
    }
    let t = |n: u64| tau_unchecked(n, p);
    let kk = TauRational::from_int(big_k as i64, p);
    let lhs = step_exponent(i, big_k, p)? - step_exponent(k, big_k, p)? + (t(j) + t(k - j + 1) - t(k))
        - (t(j + i - k) + t(k - j + 1) - t(i))
        + (kk - t(j));
    Ok((lhs, kk - t(j + i - k)))
}

fn strip(mut n: BigInt, p: u64) -> (u32, BigInt) {
    let pb = BigInt::from(p);
    let mut v = 0;
    while !n.is_zero() {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        n = q;
        v += 1;
    }
    (v, n)
}

/// `q = p^v * u` with `u` a `p`-adic unit; `u` is returned in `Z/p^M`.
fn split_rational(q: &Q, ring: &ChainRing) -> (i64, u64) {
    debug_assert!(!q.is_zero());
    let (vn, un) = strip(q.numer().clone(), ring.p());
    let (vd, ud) = strip(q.denom().clone(), ring.p());
    let unit = ring.mul(ring.from_bigint(&un), ring.inv(ring.from_bigint(&ud)));
    (vn as i64 - vd as i64, unit)
}

/// `C(n, k) = p^v * u`, computed incrementally; requires `k <= n`.
fn binomial_split(n: u64, k: u64, ring: &ChainRing) -> (u32, u64) {
    let p = ring.p();
    let mut v: i64 = 0;
    let mut unit = 1 % ring.modulus();
    for t in 0..k {
        let (a, b) = (n - t, t + 1);
        let (va, vb) = (vp_u64(a, p), vp_u64(b, p));
        v += va as i64 - vb as i64;
        let ua = ring.from_bigint(&BigInt::from(a / p.pow(va)));
        let ub = ring.from_bigint(&BigInt::from(b / p.pow(vb)));
        unit = ring.mul(unit, ring.mul(ua, ring.inv(ub)));
    }
    (v as u32, unit)
}

/// `n (n-1) ... (n-m+1) = p^v * u`.
fn falling_split(n: u64, m: u64, ring: &ChainRing) -> (u32, u64) {
    let p = ring.p();
    let mut v = 0;
    let mut unit = 1 % ring.modulus();
    for t in 0..m {
        let a = n - t;
        let va = vp_u64(a, p);
        v += va;
        unit = ring.mul(unit, ring.from_bigint(&BigInt::from(a / p.pow(va))));
    }
    (v, unit)
}

fn p_to(p: u64, l: u32) -> Result<u64> {
    p.checked_pow(l)
        .filter(|&n| n < (1 << 40))
        .ok_or_else(|| Error::PrecisionExhausted(format!("p^L = {p}^{l} is too large to simulate")))
}

/// The construction's cases, with the witnesses found for them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Case {
    /// `z_i` lies in `(x^i, y^i)`.
    Case1,
    /// `z_i + sum_k c_k x^(i-k) y^(i-k) z_k` lies in `(x^i, y^i)`; holds `c_1..c_(i-1)`.
    Case2(Vec<ModelElement>),
    /// Minimal `N_i` with `p^(N_i) z_i` in `(x^i, y^i)`.
    Case3(u32),
}

impl Case {
    pub fn name(&self) -> &'static str {
        match self {
            Case::Case1 => "Case1",
            Case::Case2(_) => "Case2",
            Case::Case3(_) => "Case3",
        }
    }
}

/// Verdict on one of the conditions A-D.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionVerdict {
    pub condition: &'static str,
    pub pass: bool,
    pub effective_precision: u32,
    /// Condition C: the power of `p` used to clear denominators, per derivative order.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub shifts: Vec<u32>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub step: usize,
    pub pass: bool,
    pub conditions: Vec<ConditionVerdict>,
    /// Present on `Case 2` steps: the exponent identity for every coefficient moved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case2_identity: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

impl VerificationReport {
    pub fn effective_precision(&self) -> u32 {
        self.conditions.iter().map(|c| c.effective_precision).min().unwrap_or(0)
    }

    pub fn verdict(&self, condition: &str) -> Option<&ConditionVerdict> {
        self.conditions.iter().find(|c| c.condition == condition)
    }
}

/// One normalized coefficient `a_ij` in the exponent ledger.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoefficientRecord {
    pub j: usize,
    pub exponent: String,
    pub bound: String,
    pub base: ModelElement,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witnesses {
    pub z_i: ModelElement,
    /// the element `a` of the `U^i` adjustment
    pub a: ModelElement,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub c: Vec<ModelElement>,
    #[serde(rename = "N_i", skip_serializing_if = "Option::is_none")]
    pub n_i: Option<u32>,
    pub coefficients: Vec<CoefficientRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub i: usize,
    pub case: String,
    #[serde(rename = "L_i")]
    pub l_i: u32,
    #[serde(rename = "E_i")]
    pub e_i: String,
    pub witnesses: Witnesses,
    pub report: VerificationReport,
    pub effective_precision: u32,
}

type FormalPoly = Vec<FormalElement>;

/// The data after step `i`: `F_k`, `G_k`, `L_k`, `z_k` for `k <= i`.
#[derive(Clone, Debug)]
pub struct ConstructionState<'m> {
    model: &'m FiniteModel,
    k: u32,
    f: Vec<FormalPoly>,
    g: Vec<FormalPoly>,
    l: Vec<u32>,
    z: Vec<ModelElement>,
    n_history: Vec<Option<u32>>,
    cases: Vec<Option<Case>>,
    log: Vec<StepRecord>,
}

impl<'m> ConstructionState<'m> {
    pub fn model(&self) -> &'m FiniteModel {
        self.model
    }

    pub fn big_k(&self) -> u32 {
        self.k
    }

    /// Current degree `i`.
    pub fn i(&self) -> usize {
        self.f.len()
    }

    pub fn l_values(&self) -> &[u32] {
        &self.l
    }

    pub fn l_current(&self) -> u32 {
        *self.l.last().unwrap()
    }

    pub fn z_history(&self) -> &[ModelElement] {
        &self.z
    }

    /// `N_k` with `p^(N_k) z_k` in `(x^k, y^k)`, when one below `M` exists.
    pub fn n_history(&self) -> &[Option<u32>] {
        &self.n_history
    }

    pub fn case_log(&self) -> &[StepRecord] {
        &self.log
    }

    /// Raw coefficients of `F_i`.
    pub fn current_polynomial(&self) -> &[FormalElement] {
        self.f.last().unwrap()
    }

    pub fn is_terminal(&self) -> bool {
        p_to(self.model.p(), self.l_current()).map(|n| n == self.i() as u64).unwrap_or(false)
    }

    /// Normalized coefficients `a_i0 .. a_ii` of the current polynomial.
    pub fn normalized_coefficients(&self) -> Result<Vec<FormalElement>> {
        let i = self.i() as u64;
        let ring = self.model.ring();
        let n = p_to(self.model.p(), self.l_current())?;
        let p = self.model.p();
        self.current_polynomial()
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let (v, u) = binomial_split(n - j as u64, i - j as u64, &ring);
                let base = self.model.scale(&c.base, ring.inv(u));
                Ok(FormalElement::new(base, c.exponent - TauRational::from_int(v as i64, p)))
            })
            .collect()
    }
}

fn p_int(v: i64, p: u64) -> TauRational {
    TauRational::from_int(v, p)
}

fn powers(model: &FiniteModel, a: &ModelElement, n: usize) -> Vec<ModelElement> {
    let mut out = vec![model.one().clone()];
    for t in 1..=n {
        out.push(model.mul(&out[t - 1], a));
    }
    out
}

/// `sum_j realize(p^shift raw_j) s^(deg-j) u^j`.
fn eval_formal(
    model: &FiniteModel,
    poly: &[FormalElement],
    s_pows: &[ModelElement],
    u_pows: &[ModelElement],
    shift: TauRational,
) -> Result<ModelElement> {
    let deg = poly.len() - 1;
    let mut acc = model.zero();
    for (j, c) in poly.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let term = c.shift(shift).realize(model)?;
        let term = model.mul(&model.mul(&term, &s_pows[deg - j]), &u_pows[j]);
        acc = model.add(&acc, &term);
    }
    Ok(acc)
}

fn ideal_system(model: &FiniteModel, gens: &[ModelElement]) -> LinearSystem {
    LinearSystem::new(model.ring(), model.dim(), &model.ideal_module_generators(gens))
}

/// Cofactors from a solve, one model element per generator.
fn cofactors(model: &FiniteModel, coeffs: Vec<u64>) -> Vec<ModelElement> {
    coeffs.chunks(model.dim()).map(|c| ModelElement(c.to_vec())).collect()
}

/// Smallest `N < M` (starting at `from`) with `p^N u` in the span.
fn minimal_p_power(model: &FiniteModel, system: &LinearSystem, u: &ModelElement, from: u32) -> Option<u32> {
    (from..model.precision()).find(|&n| {
        let v = model.scale(u, model.ring().p_pow(n));
        system.solve(&v.0).is_some()
    })
}

/// The state after the first step, `F_1 = p^(N_1 + K) S + p^K a U`.
pub fn seed_step(model: &FiniteModel, big_k: u32, n_1: u32) -> Result<ConstructionState<'_>> {
    let p = model.p();
    if big_k == 0 {
        return Err(Error::InvalidArgument("K must be positive".into()));
    }
    if n_1 >= model.precision() {
        return Err(Error::PrecisionExhausted(format!(
            "p^{n_1} vanishes in a model of precision {}",
            model.precision()
        )));
    }
    let l_1 = n_1 + big_k;
    p_to(p, l_1)?;
    let gens = [model.x().clone(), model.y().clone()];
    let target = model.scale(model.z(), model.ring().p_pow(n_1));
    let cof = model
        .ideal_membership(&target, &gens)
        .ok_or_else(|| Error::HypothesisViolated(format!("p^{n_1} z is not in (x, y)")))?;
    let a = model.neg(&cof[0]);
    let f1 = vec![
        FormalElement::new(model.one().clone(), p_int(l_1 as i64, p)),
        FormalElement::new(a.clone(), p_int(big_k as i64, p)),
    ];
    let g1 = vec![FormalElement::new(model.one().clone(), TauRational::zero(p)), FormalElement::zero(model)];
    let mut state = ConstructionState {
        model,
        k: big_k,
        f: vec![f1],
        g: vec![g1],
        l: vec![l_1],
        z: vec![model.z().clone()],
        n_history: vec![Some(n_1)],
        cases: vec![None],
        log: Vec::new(),
    };
    let report = verify_conditions(&state);
    let record = step_record(&state, "seed", a, Vec::new(), Some(n_1), report)?;
    state.log.push(record);
    Ok(state)
}

fn step_record(
    state: &ConstructionState<'_>,
    case: &str,
    a: ModelElement,
    c: Vec<ModelElement>,
    n_i: Option<u32>,
    report: VerificationReport,
) -> Result<StepRecord> {
    let i = state.i();
    let p = state.model.p();
    let coefficients = state
        .normalized_coefficients()?
        .into_iter()
        .enumerate()
        .skip(1)
        .map(|(j, e)| CoefficientRecord {
            j,
            exponent: e.exponent.to_string(),
            bound: (p_int(state.k as i64, p) - tau_unchecked(j as u64, p)).to_string(),
            base: e.base,
        })
        .collect();
    Ok(StepRecord {
        i,
        case: case.to_string(),
        l_i: state.l_current(),
        e_i: step_exponent(i as u64, state.k, p)?.to_string(),
        witnesses: Witnesses { z_i: state.z[i - 1].clone(), a, c, n_i, coefficients },
        effective_precision: report.effective_precision(),
        report,
    })
}

/// Checks the two valuation inequalities that make `G_i` integral, for every
/// `j < i`, and that the binomial valuations agree with their `tau` formulas.
fn check_integrality_ledger(i: u64, l_prev: u32, big_k: u32, p: u64) -> Result<()> {
    let n = p_to(p, l_prev)?;
    let e_i = step_exponent(i, big_k, p)?;
    let t = |m: u64| tau_unchecked(m, p);
    for j in 0..i {
        let actual = vp_big_unchecked(&crate::rational::binomial(n - j, i - j), p) as i64;
        let bound = if j == 0 {
            let expected = l_prev as i64 - vp_u64(i, p) as i64;
            if actual != expected {
                return Err(Error::InternalInconsistency(format!(
                    "v_p(C(p^{l_prev}, {i})) = {actual}, expected {expected}"
                )));
            }
            -e_i + p_int(expected, p)
        } else {
            let by_tau = t(j) + t(i - j + 1) - t(i);
            if by_tau != actual {
                return Err(Error::InternalInconsistency(format!(
                    "v_p(C(p^{l_prev} - {j}, {}) = {actual} but the tau formula gives {by_tau}",
                    i - j
                )));
            }
            -e_i + by_tau + (p_int(big_k as i64, p) - t(j))
        };
        if bound.is_negative() {
            return Err(Error::InternalInconsistency(format!(
                "exponent bound {bound} < 0 for the term (i = {i}, j = {j})"
            )));
        }
    }
    Ok(())
}

/// `G_i = p^(-E_i) Int_(p^L_(i-1)) F_(i-1)` from a raw degree `i-1` polynomial.
fn integrate_formal(model: &FiniteModel, prev: &[FormalElement], l_prev: u32, big_k: u32) -> Result<FormalPoly> {
    let p = model.p();
    let ring = model.ring();
    let deg = prev.len() as u64 - 1;
    let i = deg + 1;
    let n = p_to(p, l_prev)?;
    if n <= deg {
        return Err(Error::InvalidArgument(format!("cannot integrate: p^L = {n} <= {deg}")));
    }
    let e_i = step_exponent(i, big_k, p)?;
    let mut out = Vec::with_capacity(i as usize + 1);
    for (j, c) in prev.iter().enumerate() {
        let factor = integration_factor(n, deg, j as u64);
        if factor.is_zero() || c.is_zero() {
            out.push(FormalElement::zero(model));
            continue;
        }
        let (v, u) = split_rational(&factor, &ring);
        let term = FormalElement::new(model.scale(&c.base, u), c.exponent + p_int(v, p) - e_i);
        if term.exponent.is_negative() {
            return Err(Error::InternalInconsistency(format!(
                "term (i = {i}, j = {j}) of G_i has exponent {} < 0",
                term.exponent
            )));
        }
        out.push(term);
    }
    out.push(FormalElement::zero(model));
    Ok(out)
}

/// Computes `G_i` and `z_i = G_i(z, x)` for the next degree.
pub fn integrate_step(state: &ConstructionState<'_>) -> Result<(Vec<FormalElement>, ModelElement)> {
    let model = state.model;
    let i = state.i() as u64 + 1;
    check_integrality_ledger(i, state.l_current(), state.k, model.p())?;
    let g = integrate_formal(model, state.current_polynomial(), state.l_current(), state.k)?;
    let zp = powers(model, model.z(), i as usize);
    let xp = powers(model, model.x(), i as usize);
    let z_i = eval_formal(model, &g, &zp, &xp, TauRational::zero(model.p()))?;
    Ok((g, z_i))
}

/// Case 1 if `z_i` is in `(x^i, y^i)`, else Case 2 if the earlier `z_k` make
/// up the difference, else Case 3 with the minimal exponent.
pub fn classify_case(state: &ConstructionState<'_>, z_i: &ModelElement) -> Result<Case> {
    let model = state.model;
    let i = state.i() as u32 + 1;
    let base = model.power_ideal_generators(i);
    let system = ideal_system(model, &base);
    if system.solve(&z_i.0).is_some() {
        return Ok(Case::Case1);
    }
    let xy = model.mul(model.x(), model.y());
    let mut gens = base.clone();
    for k in 1..i {
        gens.push(model.mul(&model.pow(&xy, (i - k) as u64), &state.z[k as usize - 1]));
    }
    if let Some(coeffs) = ideal_system(model, &gens).solve(&z_i.0) {
        let cof = cofactors(model, coeffs);
        let c = cof[2..].iter().map(|d| model.neg(d)).collect();
        return Ok(Case::Case2(c));
    }
    minimal_p_power(model, &system, z_i, 1).map(Case::Case3).ok_or_else(|| {
        Error::PrecisionExhausted(format!("no N < {} with p^N z_{i} in (x^{i}, y^{i})", model.precision()))
    })
}

/// Builds `F_i` for the given case, appends it to the state and verifies it.
pub fn apply_case(
    state: &mut ConstructionState<'_>,
    g_i: Vec<FormalElement>,
    z_i: ModelElement,
    case: Case,
) -> Result<()> {
    let model = state.model;
    let p = model.p();
    let ring = model.ring();
    let i = state.i() + 1;
    let l_prev = state.l_current();
    let e_i = step_exponent(i as u64, state.k, p)?;
    let (tilde, l_i) = match &case {
        Case::Case1 => (g_i.clone(), l_prev),
        Case::Case2(c) => {
            let mut tilde = g_i.clone();
            for (k, ck) in (1..i).zip(c) {
                if ck.is_zero() {
                    continue;
                }
                let mult = model.mul(ck, &model.pow(model.y(), (i - k) as u64));
                for (j, coeff) in state.g[k - 1].iter().enumerate() {
                    let m = j + i - k;
                    let term = coeff.mul_base(model, &mult);
                    tilde[m] = tilde[m].add(model, &term)?;
                }
            }
            (tilde, l_prev)
        }
        Case::Case3(n_i) => {
            let l_i = l_prev + n_i;
            let (v1, u1) = binomial_split(p_to(p, l_i)?, i as u64, &ring);
            let (v0, u0) = binomial_split(p_to(p, l_prev)?, i as u64, &ring);
            if v1 as i64 - v0 as i64 != *n_i as i64 {
                return Err(Error::InternalInconsistency(format!(
                    "rescaling factor at step {i} has valuation {} instead of {n_i}",
                    v1 as i64 - v0 as i64
                )));
            }
            let unit = ring.mul(u1, ring.inv(u0));
            let shift = p_int(*n_i as i64, p);
            let tilde =
                g_i.iter().map(|c| FormalElement::new(model.scale(&c.base, unit), c.exponent + shift)).collect();
            (tilde, l_i)
        }
    };
    let zp = powers(model, model.z(), i);
    let xp = powers(model, model.x(), i);
    let value = eval_formal(model, &tilde, &zp, &xp, TauRational::zero(p))?;
    let xi = model.pow(model.x(), i as u64);
    let yi = model.pow(model.y(), i as u64);
    let cof = model.ideal_membership(&value, &[xi, yi]).ok_or_else(|| {
        Error::InternalInconsistency(format!("step {i}: adjusted polynomial does not evaluate into (x^{i}, y^{i})"))
    })?;
    let a = model.neg(&cof[0]);
    let mut f_i: FormalPoly = tilde;
    f_i[i] = f_i[i].add(model, &FormalElement::new(a.clone(), TauRational::zero(p)))?;
    let f_i: FormalPoly = f_i.into_iter().map(|c| c.shift(e_i)).collect();

    let system = ideal_system(model, &model.power_ideal_generators(i as u32));
    let n_i = match &case {
        Case::Case1 => Some(0),
        Case::Case3(n) => Some(*n),
        Case::Case2(_) => minimal_p_power(model, &system, &z_i, 1),
    };
    state.f.push(f_i);
    state.g.push(g_i);
    state.l.push(l_i);
    state.z.push(z_i);
    state.n_history.push(n_i);
    state.cases.push(Some(case.clone()));
    let report = verify_conditions(state);
    let (c, witness_n) = match case {
        Case::Case1 => (Vec::new(), None),
        Case::Case2(c) => (c, None),
        Case::Case3(n) => (Vec::new(), Some(n)),
    };
    let record = step_record(state, state.cases[i - 1].as_ref().unwrap().name(), a, c, witness_n, report.clone())?;
    state.log.push(record);
    if !report.pass {
        return Err(Error::ConstructionInvariant { step: i, detail: report.first_failure.clone().unwrap_or_default() });
    }
    Ok(())
}

fn verdict(condition: &'static str, pass: bool, effective_precision: u32, detail: String) -> ConditionVerdict {
    ConditionVerdict { condition, pass, effective_precision, shifts: Vec::new(), detail }
}

/// `true` if every coordinate of `v` vanishes mod `p^prec`.
fn zero_mod(ring: &ChainRing, v: &ModelElement, prec: u32) -> bool {
    v.0.iter().all(|&a| ring.val(a) >= prec)
}

fn check_a(state: &ConstructionState<'_>, coeffs: &[FormalElement]) -> ConditionVerdict {
    let model = state.model;
    let m = model.precision();
    let one = FormalElement::new(model.neg(model.one()), TauRational::zero(model.p()));
    let diff = match coeffs[0].add(model, &one) {
        Ok(d) => d,
        Err(e) => return verdict("A", false, 0, e.to_string()),
    };
    if diff.is_zero() {
        return verdict("A", true, m, String::new());
    }
    let shift = (-diff.exponent).ceil().max(0) as u32;
    if shift >= m {
        return verdict("A", false, 0, format!("a_{{{},0}} is not 1: no precision left", state.i()));
    }
    let realized = diff.shift(p_int(shift as i64, model.p())).realize(model);
    let ok = realized.map(|r| zero_mod(&model.ring(), &r, m - shift)).unwrap_or(false);
    let detail = if ok { String::new() } else { format!("a_{{{},0}} != 1", state.i()) };
    verdict("A", ok, m - shift, detail)
}

fn check_b(state: &ConstructionState<'_>, coeffs: &[FormalElement]) -> ConditionVerdict {
    let model = state.model;
    let p = model.p();
    let i = state.i();
    for (j, a) in coeffs.iter().enumerate().skip(1) {
        if a.is_zero() {
            continue;
        }
        let bound = p_int(state.k as i64, p) - tau_unchecked(j as u64, p);
        if a.exponent < bound {
            return verdict(
                "B",
                false,
                model.precision(),
                format!("a_({i},{j}) has exponent {} below K - tau({j}) = {bound}", a.exponent),
            );
        }
    }
    verdict("B", true, model.precision(), String::new())
}

fn check_c(state: &ConstructionState<'_>) -> ConditionVerdict {
    let model = state.model;
    let ring = model.ring();
    let p = model.p();
    let mm = model.precision();
    let i = state.i();
    let f = state.current_polynomial();
    let zp = powers(model, model.z(), i);
    let xp = powers(model, model.x(), i);
    let mut shifts = Vec::with_capacity(i + 1);
    let mut eff = mm;
    for m in 0..=i {
        // p-adic split of the falling factorials (i-j)!/(i-j-m)!
        let terms: Vec<FormalElement> = (0..=i - m)
            .map(|j| {
                let (v, u) = falling_split((i - j) as u64, m as u64, &ring);
                FormalElement::new(model.scale(&f[j].base, u), f[j].exponent + p_int(v as i64, p))
            })
            .collect();
        let min_exp = terms.iter().filter(|t| !t.is_zero()).map(|t| t.exponent).min();
        let shift = min_exp.map(|e| (-e).ceil().max(0) as u32).unwrap_or(0);
        shifts.push(shift);
        if shift >= mm {
            let mut v = verdict("C", false, 0, format!("m = {m}: clearing denominators needs p^{shift}"));
            v.shifts = shifts;
            return v;
        }
        eff = eff.min(mm - shift);
        let value = match eval_formal(model, &terms, &zp, &xp, p_int(shift as i64, p)) {
            Ok(v) => v,
            Err(e) => return verdict("C", false, 0, e.to_string()),
        };
        let mut gens = model.ideal_module_generators(&[model.pow(model.y(), (i - m) as u64)]);
        gens.extend(Submodule::full(ring, model.dim()).scaled_by_p_power(mm - shift).rows().iter().cloned());
        let target = Submodule::from_generators(ring, model.dim(), &gens);
        if !target.contains(&value.0) {
            let mut v = verdict(
                "C",
                false,
                mm - shift,
                format!("p^{shift} F_{i}^({m})(z, x) = {} is not in y^{} R", model.element_to_string(&value), i - m),
            );
            v.shifts = shifts;
            return v;
        }
    }
    let mut v = verdict("C", true, eff, String::new());
    v.shifts = shifts;
    v
}

fn check_d(state: &ConstructionState<'_>) -> ConditionVerdict {
    let model = state.model;
    let i = state.i();
    let mm = model.precision();
    let recomputed = if i == 1 {
        Ok(model.z().clone())
    } else {
        integrate_formal(model, &state.f[i - 2], state.l[i - 2], state.k).and_then(|g| {
            let zp = powers(model, model.z(), i);
            let xp = powers(model, model.x(), i);
            eval_formal(model, &g, &zp, &xp, TauRational::zero(model.p()))
        })
    };
    match recomputed {
        Ok(z) if z == state.z[i - 1] => verdict("D", true, mm, String::new()),
        Ok(z) => verdict("D", false, mm, format!("G_{i}(z, x) = {} differs from z_{i}", model.element_to_string(&z))),
        Err(e) => verdict("D", false, mm, e.to_string()),
    }
}

/// Checks the exponent identity and its two binomial valuations for every
/// coefficient moved by a `Case 2` step.
fn check_case2_identity(state: &ConstructionState<'_>, c: &[ModelElement]) -> std::result::Result<(), String> {
    let p = state.model.p();
    let i = state.i() as u64;
    let l_i = state.l_current();
    for (k, ck) in (1..i).zip(c) {
        if ck.is_zero() {
            continue;
        }
        let l_k = state.l[k as usize - 1];
        for j in 1..k {
            let (lhs, rhs) = case2_exponent_identity(i, k, j, state.k, p).map_err(|e| e.to_string())?;
            if lhs != rhs {
                return Err(format!("exponent identity fails at (i, k, j) = ({i}, {k}, {j}): {lhs} != {rhs}"));
            }
            let t = |n: u64| tau_unchecked(n, p);
            let m = j + i - k;
            let checks = [(l_k, j, k, t(j) + t(k - j + 1) - t(k)), (l_i, m, i, t(m) + t(k - j + 1) - t(i))];
            for (l, top_j, top_i, by_tau) in checks {
                let n = p_to(p, l).map_err(|e| e.to_string())?;
                let actual = vp_big_unchecked(&crate::rational::binomial(n - top_j, top_i - top_j), p) as i64;
                if by_tau != actual {
                    return Err(format!(
                        "v_p(C(p^{l} - {top_j}, {})) = {actual} but the tau formula gives {by_tau}",
                        top_i - top_j
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Verifies conditions A-D for the current step.
pub fn verify_conditions(state: &ConstructionState<'_>) -> VerificationReport {
    let step = state.i();
    let mut conditions = Vec::with_capacity(4);
    match state.normalized_coefficients() {
        Ok(coeffs) => {
            conditions.push(check_a(state, &coeffs));
            conditions.push(check_b(state, &coeffs));
        }
        Err(e) => {
            conditions.push(verdict("A", false, 0, e.to_string()));
            conditions.push(verdict("B", false, 0, e.to_string()));
        }
    }
    conditions.push(check_c(state));
    conditions.push(check_d(state));
    let mut first_failure =
        conditions.iter().find(|c| !c.pass).map(|c| format!("condition {}: {}", c.condition, c.detail));
    let case2_identity = match state.cases.last().and_then(|c| c.as_ref()) {
        Some(Case::Case2(c)) => {
            let r = check_case2_identity(state, c);
            if let Err(msg) = &r {
                first_failure.get_or_insert_with(|| format!("case 2 identity: {msg}"));
            }
            Some(r.is_ok())
        }
        _ => None,
    };
    VerificationReport { step, pass: first_failure.is_none(), conditions, case2_identity, first_failure }
}

/// One coefficient after multiplying `a_j` by `p^(j / p^K)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScaledCoefficient {
    pub j: usize,
    pub exponent: String,
    pub scaled_exponent: String,
    /// `j / p^K + K - tau(j)`, the guaranteed lower bound
    pub margin: String,
    /// present when `(p - 1)` times the scaled exponent is an integer
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realized: Option<ModelElement>,
}

fn ratio_string(r: &Ratio<i128>) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Multiplies `a_j` by `p^(j eps)` with `eps = 1/p^K` and checks every
/// exponent stays nonnegative.
pub fn epsilon_scale(model: &FiniteModel, coeffs: &[FormalElement], big_k: u32) -> Result<Vec<ScaledCoefficient>> {
    let p = model.p();
    let pk =
        p.checked_pow(big_k).ok_or_else(|| Error::InvalidArgument(format!("p^K overflows for K = {big_k}")))? as i128;
    let mut out = Vec::with_capacity(coeffs.len());
    for (j, a) in coeffs.iter().enumerate().skip(1) {
        let added = Ratio::new(j as i128, pk);
        let margin = added + Ratio::from_integer(big_k as i128) - tau_unchecked(j as u64, p).to_ratio();
        if margin.is_negative() {
            return Err(Error::InternalInconsistency(format!("j/p^K + K - tau(j) < 0 at j = {j}")));
        }
        let scaled = a.exponent.to_ratio() + added;
        if !a.is_zero() && scaled.is_negative() {
            return Err(Error::InternalInconsistency(format!("scaled coefficient {j} has exponent below 0")));
        }
        let times = scaled * Ratio::from_integer(p as i128 - 1);
        let realized = if a.is_zero() {
            Some(model.zero())
        } else if times.is_integer() {
            let e = TauRational::from_scaled(times.to_integer() as i64, p);
            Some(model.mul_p_power(&a.base, e)?)
        } else {
            None
        };
        out.push(ScaledCoefficient {
            j,
            exponent: a.exponent.to_string(),
            scaled_exponent: ratio_string(&scaled),
            margin: ratio_string(&margin),
            realized,
        });
    }
    Ok(out)
}

/// Coefficient `a_j` of the final monic polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FinalCoefficient {
    pub j: usize,
    pub exponent: String,
    pub base: ModelElement,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstructionRun {
    #[serde(rename = "K")]
    pub k: u32,
    #[serde(rename = "N_1")]
    pub n_1: u32,
    pub terminated: bool,
    pub case3_count: usize,
    pub steps: Vec<StepRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<Vec<FinalCoefficient>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_scaled: Option<Vec<ScaledCoefficient>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub failure: Option<Error>,
}

/// Smallest `N >= 1` below the precision with `p^N z` in `(x, y)`.
pub fn seed_exponent(model: &FiniteModel) -> Result<u32> {
    let system = ideal_system(model, &[model.x().clone(), model.y().clone()]);
    minimal_p_power(model, &system, model.z(), 1)
        .ok_or_else(|| Error::HypothesisViolated(format!("no N < {} with p^N z in (x, y)", model.precision())))
}

/// Runs the construction and keeps the partial trace on failure.
pub fn simulate(model: &FiniteModel, big_k: u32, max_steps: usize) -> ConstructionRun {
    let mut run = ConstructionRun {
        k: big_k,
        n_1: 0,
        terminated: false,
        case3_count: 0,
        steps: Vec::new(),
        polynomial: None,
        epsilon_scaled: None,
        error: None,
        failure: None,
    };
    let fail = |mut run: ConstructionRun, e: Error| {
        run.error = Some(e.to_string());
        run.failure = Some(e);
        run
    };
    let n_1 = match seed_exponent(model) {
        Ok(n) => n,
        Err(e) => return fail(run, e),
    };
    run.n_1 = n_1;
    let mut state = match seed_step(model, big_k, n_1) {
        Ok(s) => s,
        Err(e) => return fail(run, e),
    };
    let mut steps = 0;
    let result = (|| -> Result<()> {
        if !state.log[0].report.pass {
            return Err(Error::ConstructionInvariant {
                step: 1,
                detail: state.log[0].report.first_failure.clone().unwrap_or_default(),
            });
        }
        while !state.is_terminal() {
            if steps == max_steps {
                let case3_count = state.cases.iter().filter(|c| matches!(c, Some(Case::Case3(_)))).count();
                return Err(Error::StepLimit { max_steps, case3_count });
            }
            let (g, z_i) = integrate_step(&state)?;
            let case = classify_case(&state, &z_i)?;
            steps += 1;
            apply_case(&mut state, g, z_i, case)?;
        }
        Ok(())
    })();
    run.case3_count = state.cases.iter().filter(|c| matches!(c, Some(Case::Case3(_)))).count();
    run.steps = state.log.clone();
    if let Err(e) = result {
        return fail(run, e);
    }
    run.terminated = true;
    let coeffs = state.current_polynomial().to_vec();
    run.polynomial = Some(
        coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| FinalCoefficient { j, exponent: c.exponent.to_string(), base: c.base.clone() })
            .collect(),
    );
    match epsilon_scale(model, &coeffs, big_k) {
        Ok(s) => run.epsilon_scaled = Some(s),
        Err(e) => return fail(run, e),
    }
    run
}

/// Runs the construction to termination.
pub fn run_construction(model: &FiniteModel, big_k: u32, max_steps: usize) -> Result<ConstructionRun> {
    let mut run = simulate(model, big_k, max_steps);
    match run.failure.take() {
        Some(e) => Err(e),
        None => Ok(run),
    }
}
