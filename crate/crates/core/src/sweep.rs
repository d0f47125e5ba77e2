//! Exhaustive sweeps over the valuation identities, run in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::homotaylor::{taylor_coefficient, taylor_coefficient_by_derivative, HomoPoly};
use crate::padic::{
    binomial_valuation_by_tau, check_prime, epsilon_inequality_violations, power_exceeds_successor, tau,
    tau_difference, vp_factorial,
};
use crate::rational::{q_frac, Q};

/// Largest `p^L` the binomial sweep accepts; the sweep is quadratic in it.
pub const MAX_TOP: u64 = 4096;
const TAYLOR_SAMPLES: u64 = 200;
const TAYLOR_MAX_DEGREE: usize = 12;
const POWER_BOUND: u32 = 60;
const KEEP: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepConfig {
    pub primes: Vec<u64>,
    #[serde(rename = "L_max")]
    pub l_max: u32,
    pub n_max: u64,
    #[serde(rename = "K_max")]
    pub k_max: u32,
    pub jobs: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { primes: vec![2, 3, 5], l_max: 4, n_max: 10_000, k_max: 4, jobs: 0 }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.primes.is_empty() {
            return Err(Error::InvalidArgument("the prime list is empty".into()));
        }
        for &p in &self.primes {
            check_prime(p)?;
            match p.checked_pow(self.l_max) {
                Some(top) if top <= MAX_TOP => {}
                _ => {
                    return Err(Error::InvalidArgument(format!("{p}^{} exceeds the sweep limit {MAX_TOP}", self.l_max)))
                }
            }
            if p.checked_pow(self.k_max + 4).is_none_or(|t| t > 1 << 24) {
                return Err(Error::InvalidArgument(format!("{p}^(K_max + 4) is too large")));
            }
        }
        if self.l_max == 0 || self.n_max < 2 || self.k_max == 0 {
            return Err(Error::InvalidArgument("L_max, K_max must be positive and n_max >= 2".into()));
        }
        Ok(())
    }

    /// Number of checks each sweep will perform, known before running.
    pub fn tuple_counts(&self) -> Vec<(&'static str, u64)> {
        let mut lemma3 = 0;
        let mut tau_powers = 0;
        let mut eps = 0;
        for &p in &self.primes {
            for l in 1..=self.l_max {
                let top = p.pow(l);
                lemma3 += top * (top + 1) / 2;
                tau_powers += 1;
            }
            for k in 1..=self.k_max {
                eps += p.pow(k + 4);
            }
            eps += POWER_BOUND as u64 + 1;
        }
        let np = self.primes.len() as u64;
        let taylor: u64 = (0..TAYLOR_SAMPLES).map(|s| taylor_degree(s) as u64 + 1).sum();
        vec![
            ("binomial-valuation", lemma3 + tau_powers),
            ("taylor-coefficient", taylor),
            ("tau-difference", np * (self.n_max - 1)),
            ("legendre", np * (self.n_max + 1)),
            ("epsilon-inequality", eps),
        ]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub name: &'static str,
    pub checked: u64,
    pub violations: u64,
    pub counterexamples: Vec<Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub total_tuples: u64,
    pub lemmas: Vec<LemmaReport>,
    pub violations: u64,
}

#[derive(Default)]
struct Tally {
    checked: u64,
    violations: u64,
    examples: Vec<Value>,
}

impl Tally {
    fn record(&mut self, ok: bool, example: impl FnOnce() -> Value) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.examples.len() < KEEP {
                self.examples.push(example());
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checked += other.checked;
        self.violations += other.violations;
        self.examples.extend(other.examples);
        self.examples.truncate(KEEP);
        self
    }

    fn finish(self, name: &'static str) -> LemmaReport {
        LemmaReport { name, checked: self.checked, violations: self.violations, counterexamples: self.examples }
    }
}

/// `v_p(m)` by repeated division.
fn val(mut m: u64, p: u64) -> u64 {
    let mut k = 0;
    while m.is_multiple_of(p) {
        m /= p;
        k += 1;
    }
    k
}

/// Row `i` of the binomial sweep: `C(p^L - j, i - j)` for `1 <= j <= i`,
/// against `v_p` of the binomial counted factor by factor.
fn lemma3_row(p: u64, l: u32, i: u64) -> Tally {
    let top = p.pow(l);
    let mut t = Tally::default();
    for j in 1..=i {
        let (n, k) = (top - j, i - j);
        let mut oracle: i64 = 0;
        for s in 0..k {
            oracle += val(n - s, p) as i64 - val(s + 1, p) as i64;
        }
        let got = binomial_valuation_by_tau(j, i, l, p).ok().and_then(|v| v.to_integer());
        t.record(got == Some(oracle), || json!({"p": p, "L": l, "i": i, "j": j, "expected": oracle, "got": got}));
    }
    t
}

fn sweep_lemma3(cfg: &SweepConfig) -> Tally {
    let mut tasks = Vec::new();
    for &p in &cfg.primes {
        for l in 1..=cfg.l_max {
            for i in 1..=p.pow(l) {
                tasks.push((p, l, i));
            }
        }
    }
    let mut tally = tasks.into_par_iter().map(|(p, l, i)| lemma3_row(p, l, i)).reduce(Tally::default, Tally::merge);
    for &p in &cfg.primes {
        for l in 1..=cfg.l_max {
            let got = tau(p.pow(l), p).ok().and_then(|v| v.to_integer());
            tally.record(got == Some(l as i64), || json!({"p": p, "n": l, "tau(p^n)": got}));
        }
    }
    tally
}

fn taylor_degree(sample: u64) -> usize {
    (sample as usize % TAYLOR_MAX_DEGREE) + 1
}

fn random_rational(rng: &mut ChaCha8Rng) -> Q {
    q_frac(rng.gen_range(-20..=20), rng.gen_range(1..=9))
}

fn sweep_taylor() -> Tally {
    (0..TAYLOR_SAMPLES)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let n = taylor_degree(s);
            let coeffs: Vec<Q> = (0..=n).map(|_| random_rational(&mut rng)).collect();
            let f = HomoPoly::new(coeffs).expect("length matches degree");
            let (z, x) = (random_rational(&mut rng), random_rational(&mut rng));
            let mut t = Tally::default();
            for i in 0..=n {
                let closed = taylor_coefficient(&f, i, &z, &x).ok();
                let direct = taylor_coefficient_by_derivative(&f, i, &z, &x).ok();
                t.record(closed.is_some() && closed == direct, || json!({"sample": s, "F": f.to_string(), "i": i}));
            }
            t
        })
        .reduce(Tally::default, Tally::merge)
}

fn sweep_tau_difference(cfg: &SweepConfig) -> Tally {
    cfg.primes
        .par_iter()
        .map(|&p| {
            let mut t = Tally::default();
            let mut prev = tau(1, p).expect("prime checked");
            for n in 2..=cfg.n_max {
                let cur = tau(n, p).expect("prime checked");
                let diff = tau_difference(n, p).expect("prime checked");
                t.record(
                    cur - prev == diff,
                    || json!({"p": p, "n": n, "difference": (cur - prev).to_string(), "formula": diff.to_string()}),
                );
                prev = cur;
            }
            t
        })
        .reduce(Tally::default, Tally::merge)
}

fn sweep_legendre(cfg: &SweepConfig) -> Tally {
    cfg.primes
        .par_iter()
        .map(|&p| {
            let mut t = Tally::default();
            let mut acc = 0;
            for n in 0..=cfg.n_max {
                if n > 0 {
                    acc += val(n, p);
                }
                let got = vp_factorial(n, p).expect("prime checked");
                t.record(got == acc, || json!({"p": p, "n": n, "expected": acc, "got": got}));
            }
            t
        })
        .reduce(Tally::default, Tally::merge)
}

fn sweep_epsilon(cfg: &SweepConfig) -> Tally {
    let mut t = Tally::default();
    for &p in &cfg.primes {
        for k in 1..=cfg.k_max {
            let j_max = p.pow(k + 4);
            let bad = epsilon_inequality_violations(k, j_max, p).expect("config validated");
            t.checked += j_max - bad.len() as u64;
            for v in bad {
                t.record(false, || json!({"p": p, "K": k, "j": v.j, "value": v.value.to_string()}));
            }
        }
        for m in 0..=POWER_BOUND {
            let ok = power_exceeds_successor(m, p).unwrap_or(false);
            t.record(ok, || json!({"p": p, "M": m, "claim": "p^M >= M + 1"}));
        }
    }
    t
}

/// Runs every sweep. `jobs == 0` uses the default thread count.
pub fn run_sweeps(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let lemmas = pool.install(|| {
        vec![
            sweep_lemma3(cfg).finish("binomial-valuation"),
            sweep_taylor().finish("taylor-coefficient"),
            sweep_tau_difference(cfg).finish("tau-difference"),
            sweep_legendre(cfg).finish("legendre"),
            sweep_epsilon(cfg).finish("epsilon-inequality"),
        ]
    });
    let expected = cfg.tuple_counts();
    for (l, (name, n)) in lemmas.iter().zip(&expected) {
        debug_assert_eq!(l.name, *name);
        if l.checked != *n {
            return Err(Error::InternalInconsistency(format!("{name}: checked {} of {n} tuples", l.checked)));
        }
    }
    let violations = lemmas.iter().map(|l| l.violations).sum();
    Ok(SweepReport { config: cfg.clone(), total_tuples: expected.iter().map(|(_, n)| n).sum(), lemmas, violations })
}
