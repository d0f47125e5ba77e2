//! Builders that turn small presentations into structure-constant models.

use std::collections::HashMap;

use super::{FiniteModel, ModelElement};
use crate::error::{Error, Result};
use crate::linalg::{ChainRing, Submodule};

/// A polynomial as `(coefficient, exponent vector)` terms.
pub type Poly = Vec<(i64, Vec<u32>)>;

fn monomial_name(names: &[&str], exps: &[u32], sigma: u64) -> String {
    let mut parts = Vec::new();
    match sigma {
        0 => {}
        1 => parts.push("sigma".to_string()),
        s => parts.push(format!("sigma^{s}")),
    }
    for (n, &e) in names.iter().zip(exps) {
        match e {
            0 => {}
            1 => parts.push(n.to_string()),
            e => parts.push(format!("{n}^{e}")),
        }
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// `Z/p^M[x, y]/(x^A, y^B)`, with `sigma` adjoined (`sigma^(p-1) = p`) when
/// `p > 2`. For `p = 2` the element `sigma` is `2`. `z` is given by terms
/// `(c, a, b)` meaning `c x^a y^b`.
pub fn truncated_polynomial_model(
    p: u64,
    precision: u32,
    a_bound: u32,
    b_bound: u32,
    z: &[(i64, u32, u32)],
) -> Result<FiniteModel> {
    let ring = ChainRing::new(p, precision)?;
    if a_bound == 0 || b_bound == 0 {
        return Err(Error::InvalidArgument("truncation degrees must be positive".into()));
    }
    let s_count = p - 1;
    let mut keys = Vec::new();
    for s in 0..s_count {
        for a in 0..a_bound {
            for b in 0..b_bound {
                keys.push((s, a, b));
            }
        }
    }
    let index: HashMap<(u64, u32, u32), usize> = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let d = keys.len();
    let names: Vec<String> = keys.iter().map(|&(s, a, b)| monomial_name(&["x", "y"], &[a, b], s)).collect();
    let mut mul = vec![vec![vec![0u64; d]; d]; d];
    for (i, &(s1, a1, b1)) in keys.iter().enumerate() {
        for (j, &(s2, a2, b2)) in keys.iter().enumerate() {
            let (a, b) = (a1 + a2, b1 + b2);
            if a >= a_bound || b >= b_bound {
                continue;
            }
            let (s, c) = if s1 + s2 >= s_count { (s1 + s2 - s_count, p % ring.modulus()) } else { (s1 + s2, 1) };
            if c != 0 {
                mul[i][j][index[&(s, a, b)]] = c;
            }
        }
    }
    let unit = |k: (u64, u32, u32)| {
        let mut v = vec![0u64; d];
        if let Some(&i) = index.get(&k) {
            v[i] = 1;
        }
        ModelElement(v)
    };
    let one = unit((0, 0, 0));
    let sigma = if p == 2 { ModelElement(ring.scale_vec(2 % ring.modulus(), &one.0)) } else { unit((1, 0, 0)) };
    let mut zv = vec![0u64; d];
    for &(c, a, b) in z {
        if let Some(&i) = index.get(&(0, a, b)) {
            zv[i] = ring.add(zv[i], ring.from_i64(c));
        }
    }
    FiniteModel::new(p, precision, names, mul, [one, unit((0, 1, 0)), unit((0, 0, 1)), ModelElement(zv), sigma])
}

/// A weighted-homogeneous presentation `Z/p^M[v_1..v_k]/(relations)`, cut
/// off at weighted degree `degree_bound` (all monomials of degree
/// `>= degree_bound` are set to zero).
///
/// Monomials are ordered within a degree lexicographically in the variable
/// order, so relation terms in early variables are the ones eliminated. The
/// build fails unless the quotient is free, i.e. every relation pivot is a unit.
#[derive(Clone, Debug)]
pub struct GradedPresentation {
    pub p: u64,
    pub precision: u32,
    pub variables: Vec<(String, u32)>,
    pub relations: Vec<Poly>,
    pub degree_bound: u32,
    pub x: Poly,
    pub y: Poly,
    pub z: Poly,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Mono {
    sigma: u64,
    exps: Vec<u32>,
}

impl GradedPresentation {
    fn degree(&self, exps: &[u32]) -> u32 {
        exps.iter().zip(&self.variables).map(|(e, (_, w))| e * w).sum()
    }

    fn monomials(&self) -> Vec<Mono> {
        let k = self.variables.len();
        let mut out = Vec::new();
        let mut exps = vec![0u32; k];
        fn rec(g: &GradedPresentation, v: usize, exps: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if v == exps.len() {
                out.push(exps.clone());
                return;
            }
            loop {
                rec(g, v + 1, exps, out);
                exps[v] += 1;
                if g.degree(exps) >= g.degree_bound {
                    exps[v] = 0;
                    return;
                }
            }
        }
        let mut raw = Vec::new();
        if self.degree(&exps) < self.degree_bound {
            rec(self, 0, &mut exps, &mut raw);
        }
        for s in 0..self.p - 1 {
            for e in &raw {
                out.push(Mono { sigma: s, exps: e.clone() });
            }
        }
        // lower sigma power, then lower degree, then lexicographically larger first
        out.sort_by(|a, b| {
            a.sigma.cmp(&b.sigma).then(self.degree(&a.exps).cmp(&self.degree(&b.exps))).then(b.exps.cmp(&a.exps))
        });
        out
    }

    /// Product of two monomials with its scalar, or `None` past the cutoff.
    fn times(&self, a: &Mono, b: &Mono) -> Option<(Mono, u64)> {
        let exps: Vec<u32> = a.exps.iter().zip(&b.exps).map(|(x, y)| x + y).collect();
        if self.degree(&exps) >= self.degree_bound {
            return None;
        }
        let s = a.sigma + b.sigma;
        let (sigma, c) = if s >= self.p - 1 { (s - (self.p - 1), self.p) } else { (s, 1) };
        Some((Mono { sigma, exps }, c))
    }

    fn check_poly(&self, poly: &Poly, what: &str, homogeneous: bool) -> Result<()> {
        let k = self.variables.len();
        if poly.iter().any(|(_, e)| e.len() != k) {
            return Err(Error::InvalidArgument(format!("{what}: exponent vectors must have length {k}")));
        }
        if homogeneous {
            let degs: Vec<u32> = poly.iter().map(|(_, e)| self.degree(e)).collect();
            if degs.windows(2).any(|w| w[0] != w[1]) {
                return Err(Error::InvalidArgument(format!("{what} is not homogeneous")));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<FiniteModel> {
        let ring = ChainRing::new(self.p, self.precision)?;
        for (i, r) in self.relations.iter().enumerate() {
            self.check_poly(r, &format!("relation {i}"), true)?;
        }
        for (poly, name) in [(&self.x, "x"), (&self.y, "y"), (&self.z, "z")] {
            self.check_poly(poly, name, false)?;
        }
        let monos = self.monomials();
        let n = monos.len();
        let index: HashMap<Mono, usize> = monos.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let to_vec = |terms: &[(u64, Mono)]| {
            let mut v = vec![0u64; n];
            for (c, m) in terms {
                if let Some(&i) = index.get(m) {
                    v[i] = ring.add(v[i], *c);
                }
            }
            v
        };
        let mut rows = Vec::new();
        for rel in &self.relations {
            for m in &monos {
                let mut terms = Vec::new();
                for (c, e) in rel {
                    let t = Mono { sigma: 0, exps: e.clone() };
                    if let Some((prod, s)) = self.times(&t, m) {
                        terms.push((ring.mul(ring.from_i64(*c), s % ring.modulus()), prod));
                    }
                }
                let v = to_vec(&terms);
                if v.iter().any(|&a| a != 0) {
                    rows.push(v);
                }
            }
        }
        let relations = Submodule::from_generators(ring, n, &rows);
        let names: Vec<&str> = self.variables.iter().map(|(s, _)| s.as_str()).collect();
        let mut pivot_cols = Vec::new();
        for row in relations.rows() {
            let c = row.iter().position(|&a| a != 0).unwrap();
            if ring.val(row[c]) != 0 {
                return Err(Error::ModelInvariant(format!(
                    "presentation is not free: relation pivot at {} is {}",
                    monomial_name(&names, &monos[c].exps, monos[c].sigma),
                    row[c]
                )));
            }
            pivot_cols.push(c);
        }
        let basis_cols: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
        let d = basis_cols.len();
        let normal_form = |v: &[u64]| -> Vec<u64> {
            let r = relations.reduce(v);
            basis_cols.iter().map(|&c| r[c]).collect()
        };
        let mut mul = vec![vec![vec![0u64; d]; d]; d];
        for (i, &ci) in basis_cols.iter().enumerate() {
            for (j, &cj) in basis_cols.iter().enumerate() {
                if let Some((prod, s)) = self.times(&monos[ci], &monos[cj]) {
                    mul[i][j] = normal_form(&to_vec(&[(s % ring.modulus(), prod)]));
                }
            }
        }
        let poly_elem = |poly: &Poly| {
            let terms: Vec<(u64, Mono)> =
                poly.iter().map(|(c, e)| (ring.from_i64(*c), Mono { sigma: 0, exps: e.clone() })).collect();
            ModelElement(normal_form(&to_vec(&terms)))
        };
        let zero_exps = vec![0u32; self.variables.len()];
        let one = poly_elem(&vec![(1, zero_exps.clone())]);
        let sigma = if self.p == 2 {
            poly_elem(&vec![(2, zero_exps.clone())])
        } else {
            ModelElement(normal_form(&to_vec(&[(1, Mono { sigma: 1, exps: zero_exps })])))
        };
        let basis_names = basis_cols.iter().map(|&c| monomial_name(&names, &monos[c].exps, monos[c].sigma)).collect();
        FiniteModel::new(
            self.p,
            self.precision,
            basis_names,
            mul,
            [one, poly_elem(&self.x), poly_elem(&self.y), poly_elem(&self.z), sigma],
        )
    }
}
