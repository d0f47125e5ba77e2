//! The ten acceptance criteria, run in order on one thread. Each prints a
//! `criterion N: PASS` or `criterion N: FAIL (...)` line.

mod common;

use std::collections::{HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mixedchar::construction::{case2_exponent_identity, run_construction, simulate};
use mixedchar::homotaylor::{
    derivative, integrate, root_transfer, taylor_coefficient, taylor_coefficient_by_derivative, verify_root_transfer,
    verify_taylor_identity, HomoPoly, UnivariatePoly,
};
use mixedchar::linalg::{ChainRing, Submodule};
use mixedchar::mutation::{self, Mutation};
use mixedchar::padic::{
    binomial_valuation_by_tau, epsilon_inequality_violations, epsilon_margin, power_exceeds_successor, tau,
    vp_binomial, vp_factorial,
};
use mixedchar::rational::{parse_rational, q, q_frac, Q};
use mixedchar::ringmodel::presentation::{truncated_polynomial_model, GradedPresentation};
use mixedchar::ringmodel::{koszul_h1, FiniteModel, ModelElement};

type Outcome = Result<(), String>;

/// Writes past the test harness's output capture.
macro_rules! report {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, $($arg)*);
        let _ = out.flush();
    }};
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn val_u64(mut n: u64, p: u64) -> u64 {
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

fn val_big(n: &BigUint, p: u64) -> u64 {
    let pb = BigUint::from(p);
    let mut n = n.clone();
    let mut v = 0;
    while (&n % &pb).is_zero() {
        n /= &pb;
        v += 1;
    }
    v
}

fn digit_sum(mut n: u64, p: u64) -> u64 {
    let mut s = 0;
    while n > 0 {
        s += n % p;
        n /= p;
    }
    s
}

/// `tau(n) = sigma_p(n - 1) / (p - 1)`, computed here without the library.
fn tau_oracle(n: u64, p: u64) -> Ratio<i64> {
    Ratio::new(digit_sum(n - 1, p) as i64, p as i64 - 1)
}

fn ratio_i128(r: Ratio<i64>) -> Ratio<i128> {
    Ratio::new(*r.numer() as i128, *r.denom() as i128)
}

// 1. binomial valuations through tau against big-integer binomials
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut checked = 0u64;
    for p in [2u64, 3, 5] {
        let mut l = 1;
        while p.pow(l) <= 250 {
            let top = p.pow(l);
            for j in 1..=top {
                let n = top - j;
                let mut c = BigUint::one();
                for k in 0..=n {
                    let i = j + k;
                    let oracle = val_big(&c, p) as i64;
                    let got = binomial_valuation_by_tau(j, i, l, p).map_err(|e| e.to_string())?;
                    ensure(got.to_integer() == Some(oracle), || {
                        format!("p={p} L={l} i={i} j={j}: got {got}, expected {oracle}")
                    })?;
                    checked += 1;
                    c = c * BigUint::from(n - k) / BigUint::from(k + 1);
                }
            }
            l += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    ensure(checked > 50_000, || format!("only {checked} tuples"))
}

// 2. Legendre and Kummer
fn criterion_2() -> Outcome {
    for p in [2u64, 3, 5, 7] {
        let mut acc = 0;
        for n in 0..=10_000u64 {
            if n > 0 {
                acc += val_u64(n, p);
            }
            let got = vp_factorial(n, p).map_err(|e| e.to_string())?;
            ensure(got == acc, || format!("v_{p}({n}!) = {got}, expected {acc}"))?;
        }
        for n in 0..=2000u64 {
            let mut count: i64 = 0;
            for k in 0..=n {
                let got = vp_binomial(n, k, p).map_err(|e| e.to_string())?;
                ensure(got as i64 == count, || format!("v_{p}(C({n},{k})) = {got}, expected {count}"))?;
                if k < n {
                    count += val_u64(n - k, p) as i64 - val_u64(k + 1, p) as i64;
                }
            }
        }
    }
    Ok(())
}

// 3. tau(n) - tau(n-1) = 1/(p-1) - v_p(n-1)
fn criterion_3() -> Outcome {
    for p in [2u64, 3, 5] {
        let mut prev = tau(1, p).map_err(|e| e.to_string())?;
        for n in 2..=100_000u64 {
            let cur = tau(n, p).map_err(|e| e.to_string())?;
            let expected = Ratio::new(1, p as i128 - 1) - Ratio::from_integer(val_u64(n - 1, p) as i128);
            ensure((cur - prev).to_ratio() == expected, || format!("p={p} n={n}: difference {}", cur - prev))?;
            ensure(cur.to_ratio() == ratio_i128(tau_oracle(n, p)), || format!("tau({n}) for p={p} is {cur}"))?;
            prev = cur;
        }
    }
    Ok(())
}

fn rand_q(rng: &mut ChaCha8Rng) -> Q {
    q_frac(rng.gen_range(-30..=30), rng.gen_range(1..=12))
}

fn rand_homo(rng: &mut ChaCha8Rng, degree: usize) -> HomoPoly {
    HomoPoly::new((0..=degree).map(|_| rand_q(rng)).collect()).unwrap()
}

// 4. Taylor suite
fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for sample in 0..1000 {
        let n = rng.gen_range(0..=12);
        let f = rand_homo(&mut rng, n);
        let (s, t, u) = (rand_q(&mut rng), rand_q(&mut rng), rand_q(&mut rng));
        ensure(verify_taylor_identity(&f, &s, &t, &u), || format!("sample {sample}: Taylor identity fails for {f}"))?;
        let (z, x) = (rand_q(&mut rng), rand_q(&mut rng));
        for i in 0..=n {
            let closed = taylor_coefficient(&f, i, &z, &x).map_err(|e| e.to_string())?;
            let direct = taylor_coefficient_by_derivative(&f, i, &z, &x).map_err(|e| e.to_string())?;
            ensure(closed == direct, || format!("sample {sample}: coefficient {i} of {f}"))?;
        }
        let i = rng.gen_range(0..=11);
        let g = rand_homo(&mut rng, i);
        let big_n = rng.gen_range(i + 1..=i + 8) as u64;
        let int = integrate(&g, big_n).map_err(|e| e.to_string())?;
        ensure(int.degree() == i + 1 && int.coeff(i + 1).is_zero(), || format!("sample {sample}: shape of Int"))?;
        let back = derivative(&int, 1);
        let expected = g.scale(&q(big_n as i64 - i as i64));
        ensure(back == expected, || format!("sample {sample}: d/dS Int_{big_n}({g}) = {back}"))?;
    }
    Ok(())
}

// 5. root transfer
fn criterion_5() -> Outcome {
    let f = UnivariatePoly::from_integers(&[1, 0, -1]).unwrap();
    let r = root_transfer(&f, &q(3), &q(1), &q(2)).map_err(|e| e.to_string())?;
    ensure(r.g == UnivariatePoly::from_integers(&[1, -6, 8]).unwrap(), || format!("pinned g = {}", r.g))?;
    ensure(r.h == UnivariatePoly::from_integers(&[1, -3, 2]).unwrap(), || format!("pinned h = {}", r.h))?;
    ensure(r.verified(), || "pinned example not verified".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for sample in 0..1000 {
        let n = rng.gen_range(1..=6);
        let mut c = vec![1i64];
        c.extend((0..n).map(|_| rng.gen_range(-9..=9)));
        let f = UnivariatePoly::from_integers(&c).unwrap();
        let (z, x) = (rand_q(&mut rng), rand_q(&mut rng));
        let y = loop {
            let y = rand_q(&mut rng);
            if !y.is_zero() {
                break y;
            }
        };
        let ok = verify_root_transfer(&f, &z, &x, &y).map_err(|e| e.to_string())?;
        ensure(ok, || format!("sample {sample}: f = {c:?}, z = {z}, x = {x}, y = {y}"))?;
    }
    Ok(())
}

// 6. epsilon inequality and p^M >= M + 1
fn criterion_6() -> Outcome {
    for p in [2u64, 3, 5] {
        for k in 1..=4u32 {
            let pk = p.pow(k) as i64;
            let j_max = p.pow(k + 4);
            for j in 1..=j_max {
                let margin = Ratio::new(j as i64, pk) + Ratio::from_integer(k as i64) - tau_oracle(j, p);
                ensure(margin >= Ratio::zero(), || format!("p={p} K={k} j={j}: {margin}"))?;
                let got = epsilon_margin(j, k, p).map_err(|e| e.to_string())?;
                ensure(got == ratio_i128(margin), || format!("p={p} K={k} j={j}: library gives {got}"))?;
            }
            let bad = epsilon_inequality_violations(k, j_max, p).map_err(|e| e.to_string())?;
            ensure(bad.is_empty(), || format!("p={p} K={k}: {} violations reported", bad.len()))?;
        }
        for m in 0..=60u32 {
            let exact = BigInt::from(p).pow(m) >= BigInt::from(m + 1);
            let got = power_exceeds_successor(m, p).map_err(|e| e.to_string())?;
            ensure(exact && got, || format!("p={p} M={m}"))?;
        }
    }
    Ok(())
}

// 7. the Case 2 exponent identity
fn criterion_7() -> Outcome {
    for p in [2u64, 3] {
        for big_k in [1u32, 3] {
            for i in 2..=200u64 {
                for k in 1..i {
                    for j in 1..=k {
                        let (lhs, rhs) = case2_exponent_identity(i, k, j, big_k, p).map_err(|e| e.to_string())?;
                        ensure(lhs == rhs, || format!("p={p} K={big_k} i={i} k={k} j={j}: {lhs} vs {rhs}"))?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn all_vectors(ring: ChainRing, dim: usize) -> Vec<Vec<u64>> {
    let m = ring.modulus();
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..m).map(move |a| {
                    let mut w = v.clone();
                    w.push(a);
                    w
                })
            })
            .collect();
    }
    out
}

/// The span of `gens` by closing `{0}` under adding generators.
fn span_by_closure(ring: ChainRing, dim: usize, gens: &[Vec<u64>]) -> HashSet<Vec<u64>> {
    let mut seen: HashSet<Vec<u64>> = HashSet::from([vec![0; dim]]);
    let mut frontier = vec![vec![0; dim]];
    while let Some(v) = frontier.pop() {
        for g in gens {
            let w = ring.add_vec(&v, g);
            if seen.insert(w.clone()) {
                frontier.push(w);
            }
        }
    }
    seen
}

fn rand_element(model: &FiniteModel, rng: &mut ChaCha8Rng) -> ModelElement {
    let m = model.ring().modulus();
    ModelElement((0..model.dim()).map(|_| rng.gen_range(0..m)).collect())
}

/// `H_1` of the Koszul complex on `(p^n, x, y)` by listing every element.
fn koszul_h1_by_enumeration(model: &FiniteModel, n: u32) -> Vec<u32> {
    let ring = model.ring();
    let elems = all_vectors(ring, model.dim());
    let r = elems.len();
    let index: HashMap<Vec<u64>, usize> = elems.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    let add: Vec<Vec<usize>> =
        elems.iter().map(|a| elems.iter().map(|b| index[&ring.add_vec(a, b)]).collect()).collect();
    let neg: Vec<usize> = elems.iter().map(|a| index[&model.neg(&ModelElement(a.clone())).0]).collect();
    let pn = ModelElement(ring.scale_vec(ring.p_pow(n), &model.one().0));
    let f = [pn, model.x().clone(), model.y().clone()];
    let times: Vec<Vec<usize>> =
        f.iter().map(|g| elems.iter().map(|a| index[&model.mul(g, &ModelElement(a.clone())).0]).collect()).collect();
    let zero = index[&vec![0; model.dim()]];

    let mut boundaries = HashSet::new();
    let mut cycles = Vec::new();
    for a in 0..r {
        for b in 0..r {
            for c in 0..r {
                // e0^e1 -> a, e0^e2 -> b, e1^e2 -> c
                let c0 = add[neg[times[1][a]]][neg[times[2][b]]];
                let c1 = add[times[0][a]][neg[times[2][c]]];
                let c2 = add[times[0][b]][times[1][c]];
                boundaries.insert((c0, c1, c2));
                if add[add[times[0][a]][times[1][b]]][times[2][c]] == zero {
                    cycles.push((a, b, c));
                }
            }
        }
    }
    let p = model.p();
    let scale: Vec<Vec<usize>> = (0..=model.precision())
        .map(|k| elems.iter().map(|a| index[&ring.scale_vec(ring.p_pow(k), a)]).collect())
        .collect();
    // |H[p^k]| = #{u cycle : p^k u boundary} / #boundaries
    let log_p = |count: usize| -> u32 {
        let mut l = 0;
        let mut c = count;
        while c > 1 {
            assert_eq!(c as u64 % p, 0);
            c /= p as usize;
            l += 1;
        }
        l
    };
    let b_len = log_p(boundaries.len());
    let torsion: Vec<u32> = (0..=model.precision() as usize)
        .map(|k| {
            let s = &scale[k];
            let hits = cycles.iter().filter(|&&(a, b, c)| boundaries.contains(&(s[a], s[b], s[c]))).count();
            log_p(hits) - b_len
        })
        .collect();
    // torsion[k] - torsion[k-1] summands have order >= p^k
    let at_least: Vec<u32> = (1..torsion.len()).map(|k| torsion[k] - torsion[k - 1]).collect();
    let mut out = Vec::new();
    for e in 1..=at_least.len() {
        let here = at_least[e - 1] - at_least.get(e).copied().unwrap_or(0);
        out.extend(std::iter::repeat_n(e as u32, here as usize));
    }
    out
}

fn tiny_models() -> Vec<(String, FiniteModel)> {
    let mut out = Vec::new();
    for (p, m, a, b) in [(2u64, 1u32, 2u32, 2u32), (2, 1, 3, 2), (2, 2, 2, 1), (2, 3, 2, 1), (3, 1, 1, 1)] {
        let name = format!("Z/{p}^{m}[x,y]/(x^{a},y^{b})");
        out.push((name, truncated_polynomial_model(p, m, a, b, &[(1, 1, 0)]).unwrap()));
    }
    let v = |a: u32, b: u32, c: u32| vec![a, b, c];
    let graded = GradedPresentation {
        p: 2,
        precision: 1,
        variables: vec![("y".into(), 1), ("x".into(), 1), ("w".into(), 2)],
        relations: vec![vec![(2, v(0, 0, 1)), (-1, v(1, 1, 0))]],
        degree_bound: 3,
        x: vec![(1, v(0, 1, 0))],
        y: vec![(1, v(1, 0, 0))],
        z: vec![(1, v(0, 0, 1))],
    }
    .build()
    .unwrap();
    out.push(("2w = xy, degree < 3".into(), graded));
    out
}

// 8. canonical forms, membership, Koszul homology
fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut enumerated = 0;
    for sample in 0..1000 {
        let p = [2u64, 3, 5][rng.gen_range(0..3)];
        let m = rng.gen_range(1..=3);
        let ring = ChainRing::new(p, m).unwrap();
        let dim = rng.gen_range(1..=8);
        let count = rng.gen_range(0..=6);
        let mut gens: Vec<Vec<u64>> =
            (0..count).map(|_| (0..dim).map(|_| rng.gen_range(0..ring.modulus())).collect()).collect();
        let s = Submodule::from_generators(ring, dim, &gens);
        ensure(Submodule::from_generators(ring, dim, s.rows()) == s, || format!("sample {sample}: not idempotent"))?;
        gens.shuffle(&mut rng);
        ensure(Submodule::from_generators(ring, dim, &gens) == s, || format!("sample {sample}: order dependent"))?;
        ensure(gens.iter().all(|g| s.contains(g)), || format!("sample {sample}: generator not contained"))?;
        if (ring.modulus() as f64).powi(dim as i32) <= 4096.0 {
            enumerated += 1;
            let span = span_by_closure(ring, dim, &gens);
            ensure(span.len() as u64 == p.pow(s.length()), || {
                format!("sample {sample}: size {} vs length", span.len())
            })?;
            for v in all_vectors(ring, dim) {
                ensure(s.contains(&v) == span.contains(&v), || format!("sample {sample}: membership of {v:?}"))?;
            }
        }
    }
    ensure(enumerated >= 100, || format!("only {enumerated} sets enumerated"))?;

    let models = [
        truncated_polynomial_model(2, 3, 3, 3, &[(1, 1, 0), (1, 0, 1)]).unwrap(),
        truncated_polynomial_model(3, 2, 2, 3, &[(1, 1, 1)]).unwrap(),
        common::case3_fixture(),
    ];
    for (mi, model) in models.iter().enumerate() {
        for _ in 0..40 {
            let gens: Vec<ModelElement> = (0..rng.gen_range(1..=3)).map(|_| rand_element(model, &mut rng)).collect();
            let mut u = model.zero();
            for g in &gens {
                u = model.add(&u, &model.mul(&rand_element(model, &mut rng), g));
            }
            for (target, must) in [(u, true), (rand_element(model, &mut rng), false)] {
                match model.ideal_membership(&target, &gens) {
                    Some(c) => {
                        let mut back = model.zero();
                        for (ci, g) in c.iter().zip(&gens) {
                            back = model.add(&back, &model.mul(ci, g));
                        }
                        ensure(back == target, || format!("model {mi}: cofactors do not reconstruct"))?;
                    }
                    None => ensure(!must, || format!("model {mi}: member reported as non-member"))?,
                }
            }
        }
        let x2 = model.pow(model.x(), 2);
        let x2y = model.mul(&x2, model.y());
        let c = model.ideal_membership(&x2y, std::slice::from_ref(&x2)).ok_or("x^2 y not in (x^2)")?;
        ensure(model.mul(&c[0], &x2) == x2y, || format!("model {mi}: x^2 y cofactor"))?;
    }

    for (name, model) in tiny_models() {
        ensure(model.ring().modulus().pow(3 * model.dim() as u32) <= 1 << 18, || format!("{name} too large"))?;
        for n in 1..=model.precision() + 1 {
            let got = koszul_h1(&model, n);
            let oracle = koszul_h1_by_enumeration(&model, n);
            ensure(got == oracle, || format!("{name}, N={n}: {got:?} vs enumeration {oracle:?}"))?;
        }
    }
    Ok(())
}

// 9. end-to-end runs on the bundled models
fn criterion_9() -> Outcome {
    let model = common::load_bundled("regular_p2");
    ensure(model.p() == 2 && model.precision() >= 6, || "regular model parameters".into())?;
    ensure(model.x_nilpotency() >= Some(8) && model.y_nilpotency() >= Some(8), || "truncation below x^8, y^8".into())?;
    let run = run_construction(&model, 1, 64).map_err(|e| e.to_string())?;
    let last = run.steps.last().ok_or("empty trace")?;
    ensure(run.terminated && last.i as u64 == 2u64.pow(last.l_i), || format!("ends at i={} L={}", last.i, last.l_i))?;
    for s in &run.steps[1..] {
        ensure(s.case == "Case1", || format!("step {} is {}", s.i, s.case))?;
    }
    ensure(run.steps.iter().all(|s| s.report.pass), || "a regular step failed".into())?;
    for s in &run.steps {
        // E_i = K - tau(i) + tau(2)
        let expected = Ratio::from_integer(1) - tau_oracle(s.i as u64, 2) + tau_oracle(2, 2);
        let got = parse_rational(&s.e_i).map_err(|e| e.to_string())?;
        let expected = Q::new((*expected.numer()).into(), (*expected.denom()).into());
        ensure(got == expected, || format!("step {}: E_i = {}, expected {expected}", s.i, s.e_i))?;
    }
    let golden =
        std::fs::read_to_string(common::models_dir().join("regular_p2_trace.json")).map_err(|e| e.to_string())?;
    ensure(common::trace_steps(&run.steps) == golden, || "trace differs from the golden file".into())?;
    let again = run_construction(&model, 1, 64).map_err(|e| e.to_string())?;
    ensure(common::trace_steps(&again.steps) == golden, || "trace not bit-stable".into())?;

    for (name, branch, steps) in [
        ("case2_fixture", "Case2", common::CASE2_FAITHFUL_STEPS),
        ("case3_fixture", "Case3", common::CASE3_FAITHFUL_STEPS),
    ] {
        let model = common::load_bundled(name);
        let run = simulate(&model, 1, steps);
        ensure(run.steps.len() == steps + 1, || format!("{name}: {} steps, error {:?}", run.steps.len(), run.error))?;
        ensure(run.steps.iter().any(|s| s.case == branch), || format!("{name}: {branch} never taken"))?;
        for s in &run.steps {
            let eff = s.report.effective_precision();
            ensure(s.report.pass, || format!("{name}: step {} fails: {:?}", s.i, s.report.first_failure))?;
            ensure(s.report.conditions.len() == 4, || format!("{name}: step {} lacks conditions", s.i))?;
            ensure(eff == s.effective_precision && eff > 0, || format!("{name}: step {} precision {eff}", s.i))?;
            if s.case == "Case2" {
                ensure(s.report.case2_identity == Some(true), || format!("{name}: step {} identity", s.i))?;
            }
        }
        for w in run.steps.windows(2) {
            let jump = w[1].witnesses.n_i.unwrap_or(0);
            ensure(w[1].l_i == w[0].l_i + jump, || format!("{name}: L ledger at step {}", w[1].i))?;
        }
    }
    Ok(())
}

const CRITERIA: [fn() -> Outcome; 9] = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
];

fn run_guarded(f: fn() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()))
}

/// The first criterion that fails with `m` active on this thread, and why.
fn first_catch(m: Mutation) -> Option<(usize, String)> {
    mutation::with(m, || CRITERIA.iter().enumerate().find_map(|(k, &c)| run_guarded(c).err().map(|e| (k + 1, e))))
}

// 10. each corrupted formula is noticed
fn criterion_10() -> Outcome {
    for m in [Mutation::DescendSign, Mutation::IntegrateFactor, Mutation::StepExponentTau2] {
        match first_catch(m) {
            Some((k, why)) => report!("    {} caught by criterion {k}: {why}", m.name()),
            None => return Err(format!("{} passes every criterion", m.name())),
        }
    }
    Ok(())
}

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    for (k, &c) in CRITERIA.iter().chain([criterion_10 as fn() -> Outcome].iter()).enumerate() {
        let start = Instant::now();
        match run_guarded(c) {
            Ok(()) => report!("criterion {}: PASS ({:.1?})", k + 1, start.elapsed()),
            Err(e) => {
                report!("criterion {}: FAIL ({e})", k + 1);
                failed.push(k + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
