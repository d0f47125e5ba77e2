//! Linear algebra over the chain ring `Z/p^M`.
//!
//! Submodules of `(Z/p^M)^n` are kept in Howell form: rows in echelon form,
//! every pivot normalized to a power of `p`, entries above a pivot `p^v`
//! reduced into `[0, p^v)`, no zero rows, and the Howell property (for a row
//! with pivot `p^v`, the row times `p^(M-v)` lies in the span of the rows
//! below it). That form is unique for a given submodule, so equality of
//! submodules is equality of forms, and greedy reduction decides membership.

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChainRing {
    p: u64,
    m: u32,
    modulus: u64,
}

impl ChainRing {
    pub fn new(p: u64, m: u32) -> Result<Self> {
        crate::padic::check_prime(p)?;
        if m == 0 {
            return invalid("precision must be positive");
        }
        match p.checked_pow(m) {
            Some(modulus) if modulus < (1 << 62) => Ok(ChainRing { p, m, modulus }),
            _ => invalid(format!("{p}^{m} is too large for the coefficient ring")),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    pub fn from_i64(&self, a: i64) -> u64 {
        a.rem_euclid(self.modulus as i64) as u64
    }

    pub fn from_bigint(&self, a: &num_bigint::BigInt) -> u64 {
        use num_traits::ToPrimitive;
        let m = num_bigint::BigInt::from(self.modulus);
        let r = ((a % &m) + &m) % &m;
        r.to_u64().expect("reduced value fits")
    }

    /// Valuation of a ring element; zero has valuation `M`.
    pub fn val(&self, mut a: u64) -> u32 {
        if a == 0 {
            return self.m;
        }
        let mut k = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            k += 1;
        }
        k
    }

    /// `p^k`, or zero once `k >= M`.
    pub fn p_pow(&self, k: u32) -> u64 {
        if k >= self.m {
            0
        } else {
            self.p.pow(k)
        }
    }

    /// Inverse of a unit.
    pub fn inv(&self, u: u64) -> u64 {
        debug_assert!(!u.is_multiple_of(self.p), "{u} is not a unit");
        let (mut r0, mut r1) = (self.modulus as i128, u as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let qt = r0 / r1;
            (r0, r1) = (r1, r0 - qt * r1);
            (t0, t1) = (t1, t0 - qt * t1);
        }
        debug_assert_eq!(r0, 1);
        t0.rem_euclid(self.modulus as i128) as u64
    }

    pub fn scale_vec(&self, c: u64, v: &[u64]) -> Vec<u64> {
        v.iter().map(|&a| self.mul(c, a)).collect()
    }

    pub fn add_vec(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| self.add(x, y)).collect()
    }

    pub fn sub_vec(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| self.sub(x, y)).collect()
    }

    /// `target -= c * row`, from column `from` on.
    #[inline]
    fn axpy_neg(&self, target: &mut [u64], c: u64, row: &[u64], from: usize) {
        if c == 0 {
            return;
        }
        for k in from..target.len() {
            if row[k] != 0 {
                target[k] = self.sub(target[k], self.mul(c, row[k]));
            }
        }
    }
}

/// Howell form of the row span of `rows`, each of length `ncols`.
/// Returns the rows together with their pivot columns.
fn howell(ring: &ChainRing, rows: Vec<Vec<u64>>, ncols: usize) -> (Vec<Vec<u64>>, Vec<usize>) {
    let mut pending: Vec<Vec<u64>> = rows.into_iter().filter(|r| r.iter().any(|&a| a != 0)).collect();
    let mut out: Vec<Vec<u64>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for c in 0..ncols {
        if pending.is_empty() {
            break;
        }
        let mut best: Option<(usize, u32)> = None;
        for (idx, r) in pending.iter().enumerate() {
            let v = ring.val(r[c]);
            if v < ring.m && best.is_none_or(|(_, bv)| v < bv) {
                best = Some((idx, v));
                if v == 0 {
                    break;
                }
            }
        }
        let Some((idx, v)) = best else { continue };
        let mut pivot = pending.swap_remove(idx);
        let pv = ring.p.pow(v);
        let unit = pivot[c] / pv;
        if unit != 1 {
            let inv = ring.inv(unit);
            for a in pivot[c..].iter_mut() {
                *a = ring.mul(*a, inv);
            }
        }
        debug_assert_eq!(pivot[c], pv);
        for r in pending.iter_mut() {
            if r[c] != 0 {
                let f = r[c] / pv;
                ring.axpy_neg(r, f, &pivot, c);
                debug_assert_eq!(r[c], 0);
            }
        }
        if v > 0 {
            let ann = ring.scale_vec(ring.p_pow(ring.m - v), &pivot);
            if ann.iter().any(|&a| a != 0) {
                pending.push(ann);
            }
        }
        pending.retain(|r| r[c + 1..].iter().any(|&a| a != 0));
        out.push(pivot);
        pivots.push(c);
    }
    // reduce entries above each pivot into [0, p^v)
    for t in 0..out.len() {
        let c = pivots[t];
        let pv = out[t][c];
        let (above, rest) = out.split_at_mut(t);
        let row_t = &rest[0];
        for s in above.iter_mut() {
            let f = s[c] / pv;
            if f != 0 {
                ring.axpy_neg(s, f, row_t, c);
            }
        }
    }
    (out, pivots)
}

/// Greedy reduction of `v` against the Howell rows whose pivot lies before
/// column `limit`.
fn reduce_against(ring: &ChainRing, rows: &[Vec<u64>], pivots: &[usize], limit: usize, v: &mut [u64]) {
    for (row, &c) in rows.iter().zip(pivots) {
        if c >= limit {
            break;
        }
        if v[c] == 0 {
            continue;
        }
        let pv = row[c];
        if !v[c].is_multiple_of(pv) {
            continue;
        }
        let f = v[c] / pv;
        ring.axpy_neg(v, f, row, c);
    }
}

/// A submodule of `(Z/p^M)^dim` in canonical Howell form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Submodule {
    ring: ChainRing,
    dim: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl Submodule {
    pub fn from_generators(ring: ChainRing, dim: usize, gens: &[Vec<u64>]) -> Self {
        debug_assert!(gens.iter().all(|g| g.len() == dim));
        let (rows, pivots) = howell(&ring, gens.to_vec(), dim);
        Submodule { ring, dim, rows, pivots }
    }

    pub fn zero(ring: ChainRing, dim: usize) -> Self {
        Submodule { ring, dim, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ring: ChainRing, dim: usize) -> Self {
        let gens: Vec<Vec<u64>> = (0..dim).map(|i| unit_vector(dim, i)).collect();
        Submodule::from_generators(ring, dim, &gens)
    }

    pub fn ring(&self) -> ChainRing {
        self.ring
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The canonical rows.
    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// Remainder of `v` after greedy reduction; zero exactly for members.
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let mut w = v.to_vec();
        reduce_against(&self.ring, &self.rows, &self.pivots, self.dim, &mut w);
        w
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&a| a == 0)
    }

    pub fn contains_module(&self, other: &Submodule) -> bool {
        other.rows.iter().all(|r| self.contains(r))
    }

    /// `log_p` of the number of elements.
    pub fn length(&self) -> u32 {
        self.rows.iter().zip(&self.pivots).map(|(r, &c)| self.ring.m - self.ring.val(r[c])).sum()
    }

    pub fn sum(&self, other: &Submodule) -> Submodule {
        let mut gens = self.rows.clone();
        gens.extend(other.rows.iter().cloned());
        Submodule::from_generators(self.ring, self.dim, &gens)
    }

    /// `p^k` times this submodule.
    pub fn scaled_by_p_power(&self, k: u32) -> Submodule {
        let c = self.ring.p_pow(k);
        let gens: Vec<Vec<u64>> = self.rows.iter().map(|r| self.ring.scale_vec(c, r)).collect();
        Submodule::from_generators(self.ring, self.dim, &gens)
    }
}

pub fn unit_vector(dim: usize, i: usize) -> Vec<u64> {
    let mut v = vec![0; dim];
    v[i] = 1;
    v
}

/// Invariant factors of `a / b` for submodules `b ⊆ a`, returned as the
/// exponents `e` of the cyclic summands `Z/p^e`, ascending.
///
/// Computed from the lengths of `p^k a + b`, which determine the
/// decomposition of a finite abelian `p`-group.
pub fn quotient_invariants(a: &Submodule, b: &Submodule) -> Vec<u32> {
    let m = a.ring.m;
    let base = b.length();
    let s: Vec<u32> = (0..=m + 1).map(|k| a.scaled_by_p_power(k).sum(b).length() - base).collect();
    // at_least[k] = number of summands of order >= p^(k+1)
    let at_least: Vec<u32> = (0..=m).map(|k| s[k as usize] - s[k as usize + 1]).collect();
    let mut out = Vec::new();
    for e in 1..=m {
        let here = at_least[e as usize - 1] - at_least.get(e as usize).copied().unwrap_or(0);
        out.extend(std::iter::repeat_n(e, here as usize));
    }
    out
}

/// Preimage of `target` under the linear map sending the `i`-th unit vector
/// to `images[i]`.
pub fn preimage(ring: ChainRing, images: &[Vec<u64>], target: &Submodule) -> Submodule {
    let k = images.len();
    let mut gens = images.to_vec();
    gens.extend(target.rows().iter().cloned());
    let kernel = LinearSystem::new(ring, target.dim(), &gens).kernel();
    let proj: Vec<Vec<u64>> = kernel.rows().iter().map(|r| r[..k].to_vec()).collect();
    Submodule::from_generators(ring, k, &proj)
}

/// A fixed list of generators prepared for solving `v = sum c_i g_i` and for
/// computing the relations among the generators.
///
/// Internally this is the Howell form of `[G | I]`.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    ring: ChainRing,
    dim: usize,
    ngens: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl LinearSystem {
    pub fn new(ring: ChainRing, dim: usize, gens: &[Vec<u64>]) -> Self {
        let ngens = gens.len();
        let aug: Vec<Vec<u64>> = gens
            .iter()
            .enumerate()
            .map(|(i, g)| {
                debug_assert_eq!(g.len(), dim);
                let mut r = g.clone();
                r.resize(dim + ngens, 0);
                r[dim + i] = 1;
                r
            })
            .collect();
        let (rows, pivots) = howell(&ring, aug, dim + ngens);
        LinearSystem { ring, dim, ngens, rows, pivots }
    }

    pub fn ngens(&self) -> usize {
        self.ngens
    }

    /// Coefficients `c` with `v = sum c_i g_i`, or `None` if `v` is not in the span.
    pub fn solve(&self, v: &[u64]) -> Option<Vec<u64>> {
        let mut w = v.to_vec();
        w.resize(self.dim + self.ngens, 0);
        reduce_against(&self.ring, &self.rows, &self.pivots, self.dim, &mut w);
        if w[..self.dim].iter().any(|&a| a != 0) {
            return None;
        }
        Some(w[self.dim..].iter().map(|&a| self.ring.neg(a)).collect())
    }

    /// All `c` with `sum c_i g_i = 0`, as a submodule of `(Z/p^M)^ngens`.
    pub fn kernel(&self) -> Submodule {
        let mut rows = Vec::new();
        let mut pivots = Vec::new();
        for (r, &c) in self.rows.iter().zip(&self.pivots) {
            if c >= self.dim {
                rows.push(r[self.dim..].to_vec());
                pivots.push(c - self.dim);
            }
        }
        Submodule { ring: self.ring, dim: self.ngens, rows, pivots }
    }

    /// The span of the generators.
    pub fn image(&self) -> Submodule {
        let mut rows = Vec::new();
        let mut pivots = Vec::new();
        for (r, &c) in self.rows.iter().zip(&self.pivots) {
            if c < self.dim {
                rows.push(r[..self.dim].to_vec());
                pivots.push(c);
            }
        }
        Submodule { ring: self.ring, dim: self.dim, rows, pivots }
    }
}
