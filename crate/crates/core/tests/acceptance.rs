//! One PASS/FAIL line per acceptance criterion. Everything runs inside a
//! single test so the timing criterion is not disturbed by other tests.

use std::collections::BTreeSet;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;

use dynrepset::circuit::{automatic_cap, brute_force_expand, monomial_sum};
use dynrepset::factorization::{ContextOptions, FactorizationContext};
use dynrepset::instances::{self, CircuitShape};
use dynrepset::kpath::{brute_force_kpath, kpath_dp, solve_kpath, solve_kpath_decision};
use dynrepset::oracle::{
    check_commutation, check_drop_universal_set, check_factorization, check_hat_commutation, Defect,
};
use dynrepset::pseudorandom::{verify_splitter, verify_universal, Verdict};
use dynrepset::repset::invert;
use dynrepset::selftest::representation_sequence;
use dynrepset::semiring::{Boolean, CappedMinPlus, Cost, Semiring};

/// Work budget for every exhaustive check; large enough that nothing on
/// the grid is skipped.
const BUDGET: u128 = 1_000_000_000;
const FACTORIZATION_GRID: [(usize, usize); 4] = [(6, 3), (8, 4), (9, 3), (10, 4)];
/// Allowed slack on the normalised growth of solve time.
const SCALING_NOISE: f64 = 2.0;
const SEED: u64 = 2024;

fn ctx(n: usize, k: usize) -> Arc<FactorizationContext> {
    FactorizationContext::build(n, k, &ContextOptions::default()).expect("context builds")
}

fn factorization_identity() -> (bool, String) {
    let mut detail = Vec::new();
    let mut ok = true;
    for (n, k) in FACTORIZATION_GRID {
        let v = check_factorization(&ctx(n, k), BUDGET, None);
        ok &= v == Verdict::Pass;
        detail.push(format!("({n},{k}) {}", v.label()));
    }
    (ok, detail.join(", "))
}

fn commutation() -> (bool, String) {
    let mut cases = 0;
    let mut ok = true;
    for n in 1..=8 {
        for k in 1..=4usize.min(n) {
            for e in 1..=n {
                ok &= check_commutation(n, k, e, None);
                cases += 1;
            }
        }
    }
    let c = ctx(6, 4);
    let hat_ok = (1..=6).all(|e| check_hat_commutation(&c, e, BUDGET, None) == Verdict::Pass);
    (ok && hat_ok, format!("{cases} (n,k,e) cases, lifted commutation on (6,4) for e=1..6: {hat_ok}"))
}

fn invert_minimality() -> (bool, String) {
    // {0, 1, ∞}
    let sr = CappedMinPlus::new(1).unwrap();
    let elements = [Cost::finite(0), Cost::finite(1), Cost::INF];
    let mut rng = instances::rng(SEED);
    let trials = 1000;
    let times = |a: &[Cost], x: &[Vec<bool>], cols: usize| -> Vec<Cost> {
        (0..cols).map(|j| sr.sum((0..a.len()).filter(|&i| x[i][j]).map(|i| a[i]))).collect()
    };
    for _ in 0..trials {
        let rows = rng.gen_range(1..=6);
        let cols = rng.gen_range(1..=6);
        let x: Vec<Vec<bool>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_bool(0.5)).collect()).collect();
        let b: Vec<Cost> = (0..cols).map(|_| elements[rng.gen_range(0..3)]).collect();
        let a = invert(&sr, &x, &b);
        // b ⪯ y in min-plus means b ≤ y numerically, with INF the largest
        let num = |c: Cost| c.value().unwrap_or(u64::MAX);
        let solves = |cand: &[Cost]| times(cand, &x, cols).iter().zip(&b).all(|(&ax, &bj)| num(bj) <= num(ax));
        if !solves(&a) {
            return (false, format!("not a solution: X={x:?} b={b:?}"));
        }
        for code in 0..3usize.pow(rows as u32) {
            let cand: Vec<Cost> = (0..rows).map(|i| elements[code / 3usize.pow(i as u32) % 3]).collect();
            if solves(&cand) && a.iter().zip(&cand).any(|(&ai, &ci)| num(ai) > num(ci)) {
                return (false, format!("not least: X={x:?} b={b:?} a={a:?} â={cand:?}"));
            }
        }
    }
    (true, format!("{trials} random instances, exhaustive over all â"))
}

fn representation_preservation() -> (bool, String) {
    let mut rng = instances::rng(SEED ^ 4);
    let mut total = 0;
    for (n, k) in FACTORIZATION_GRID {
        let c = ctx(n, k);
        for _ in 0..25 {
            let len = rng.gen_range(1..=10);
            if !representation_sequence(&c, &Boolean, &mut rng, len, |r| r.gen_bool(0.8)).unwrap() {
                return (false, format!("Boolean sequence failed on ({n},{k})"));
            }
            let sr = CappedMinPlus::new(30).unwrap();
            let len = rng.gen_range(1..=10);
            let ok = representation_sequence(&c, &sr, &mut rng, len, |r| {
                if r.gen_bool(0.1) {
                    Cost::INF
                } else {
                    sr.elem(r.gen_range(0..=9))
                }
            })
            .unwrap();
            if !ok {
                return (false, format!("min-plus sequence failed on ({n},{k})"));
            }
            total += 2;
        }
    }
    (true, format!("{total} sequences over (6,3),(8,4),(9,3),(10,4), both semirings"))
}

fn kpath_end_to_end() -> (bool, String) {
    let fixtures = [
        (instances::path_graph(), 3, Cost::finite(3)),
        (instances::triangle(), 3, Cost::finite(2)),
        (instances::triangle(), 4, Cost::INF),
    ];
    for (g, k, want) in &fixtures {
        let got = solve_kpath(g, *k).unwrap();
        if got != *want {
            return (false, format!("fixture k={k}: got {got}, want {want}"));
        }
    }
    let mut rng = instances::rng(SEED ^ 5);
    let mut found = 0;
    for i in 0..100 {
        let n = rng.gen_range(2..=12);
        let k = 2 + i % 3;
        let density = rng.gen_range(0.1..0.5);
        let g = instances::random_digraph(&mut rng, n, density, 9);
        let want = brute_force_kpath(&g, k).unwrap();
        let got = solve_kpath(&g, k).unwrap();
        let decided = solve_kpath_decision(&g, k).unwrap();
        if got != want || decided == want.is_inf() {
            return (false, format!("instance {i} (n={n}, k={k}): solver {got}, DFS {want}, decision {decided}"));
        }
        found += usize::from(!want.is_inf());
    }
    (true, format!("3 fixtures + 100 random digraphs ({found} with a path), decision agrees"))
}

fn circuit_end_to_end() -> (bool, String) {
    let opts = ContextOptions::default();
    let mut rng = instances::rng(SEED ^ 6);
    for i in 0..100 {
        let k = rng.gen_range(0..=4);
        let (got, want) = if i % 2 == 0 {
            let shape = CircuitShape { max_const: 1, ..CircuitShape::default() };
            let c = instances::random_circuit(&mut rng, shape, &Boolean);
            (monomial_sum(&c, k, &Boolean, &opts).unwrap().to_string(), brute_force_expand(&c, k, &Boolean).unwrap().to_string())
        } else {
            let c = instances::random_circuit(&mut rng, CircuitShape::default(), &CappedMinPlus::saturating(u64::MAX - 1));
            let sr = CappedMinPlus::new(automatic_cap(&c)).unwrap();
            (monomial_sum(&c, k, &sr, &opts).unwrap().to_string(), brute_force_expand(&c, k, &sr).unwrap().to_string())
        };
        if got != want {
            return (false, format!("circuit {i}, k={k}: {got} vs {want}"));
        }
    }
    for i in 0..20 {
        let n = rng.gen_range(2..=8);
        let k = 2 + i % 3;
        let density = rng.gen_range(0.2..0.6);
        let g = instances::random_digraph(&mut rng, n, density, 9);
        let c = instances::kpath_circuit(&g, k);
        let sr = CappedMinPlus::new(automatic_cap(&c)).unwrap();
        let got = monomial_sum(&c, k, &sr, &opts).unwrap();
        let want = solve_kpath(&g, k).unwrap();
        if got != want {
            return (false, format!("reduction {i}: circuit {got}, solver {want}"));
        }
    }
    (true, "100 random skewed circuits + 20 k-path reductions".into())
}

fn family_correctness() -> (bool, String) {
    let mut grid: BTreeSet<(usize, usize)> = FACTORIZATION_GRID.into_iter().collect();
    grid.insert((6, 4));
    grid.insert((20, 2));
    for n in 2..=12 {
        for k in 2..=4usize.min(n) {
            grid.insert((n, k));
        }
    }
    for &(n, k) in &grid {
        let c = ctx(n, k);
        for (what, v) in [
            ("outer", verify_splitter(c.outer(), BUDGET)),
            ("inner", verify_splitter(c.inner(), BUDGET)),
            ("universal", verify_universal(c.family(), BUDGET)),
        ] {
            if v != Verdict::Pass {
                return (false, format!("{what} family of ({n},{k}): {}", v.label()));
            }
        }
    }
    let caught = |d: Defect| -> bool {
        match d {
            Defect::PerturbD => !check_commutation(4, 2, 1, Some(d)),
            Defect::DropUniversalSet => check_drop_universal_set(&ctx(8, 4), BUDGET) == Verdict::Pass,
            Defect::SkipPadding => check_factorization(&ctx(6, 3), BUDGET, Some(d)) == Verdict::Fail,
            Defect::SkipInjectivity => check_factorization(&ctx(20, 2), BUDGET, Some(d)) == Verdict::Fail,
            Defect::WrongBlock => check_hat_commutation(&ctx(6, 4), 2, BUDGET, Some(d)) == Verdict::Fail,
        }
    };
    let missed: Vec<&str> = Defect::ALL.into_iter().filter(|&d| !caught(d)).map(|d| d.name()).collect();
    if !missed.is_empty() {
        return (false, format!("mutations not caught: {}", missed.join(", ")));
    }
    let big = ctx(20, 2);
    let small = ctx(8, 4);
    let truncated = [
        verify_splitter(&big.outer().without_last(), BUDGET),
        verify_splitter(&small.inner().without_last(), BUDGET),
        verify_universal(&small.family().without_last(), BUDGET),
    ];
    if truncated.iter().any(|&v| v != Verdict::Fail) {
        return (false, format!("truncated families accepted: {truncated:?}"));
    }
    (true, format!("{} contexts verified, {} defects and 3 truncated families caught", grid.len(), Defect::ALL.len()))
}

fn scaling() -> (bool, String) {
    let k = 4;
    let mut rows = Vec::new();
    for n in [25usize, 50, 100, 200] {
        let c = ctx(n, k);
        let h = c.outer().len() * c.inner().len();
        let ell = c.family().len() * (c.s() + 1);
        if c.r() != h * ell.pow(c.s() as u32) {
            return (false, format!("n={n}: r = {} but h·ell^s = {}", c.r(), h * ell.pow(c.s() as u32)));
        }
        let g = instances::out_degree_digraph(&mut instances::rng(SEED ^ n as u64), n, 2, 9);
        let sr = CappedMinPlus::saturating(k as u64 * g.max_weight());
        let mut best = f64::INFINITY;
        for _ in 0..3 {
            let start = Instant::now();
            std::hint::black_box(kpath_dp(&c, sr, &g, k, |w| sr.elem(w)).unwrap());
            best = best.min(start.elapsed().as_secs_f64());
        }
        rows.push((n, n + g.edges().len(), c.r(), best));
    }
    let (n0, size0, _, t0) = rows[0];
    let mut ok = true;
    let mut detail = Vec::new();
    for &(n, size, r, t) in &rows {
        let allowed = SCALING_NOISE * (size as f64 / size0 as f64) * ((n as f64).ln() / (n0 as f64).ln());
        let ratio = t / t0;
        ok &= ratio <= allowed;
        detail.push(format!("n={n} r={r} t={:.1}ms ratio={ratio:.2} allowed={allowed:.2}", t * 1e3));
    }
    (ok, detail.join("; "))
}

fn determinism() -> (bool, String) {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_dynrepset"))
            .args(["--no-cache", "selftest", "--seed", "7"])
            .output()
            .expect("binary runs")
    };
    let a = run();
    let b = run();
    let ok = a.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
    (ok, format!("{} report bytes, identical: {}", a.stdout.len(), a.stdout == b.stdout))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> (bool, String)); 9] = [
        ("factorization identity", factorization_identity),
        ("commutation", commutation),
        ("invert correctness and minimality", invert_minimality),
        ("representation preservation", representation_preservation),
        ("k-path end-to-end", kpath_end_to_end),
        ("circuit end-to-end", circuit_end_to_end),
        ("family correctness", family_correctness),
        ("scaling smoke", scaling),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = check();
        println!(
            "criterion {} {name}: {} ({detail}) [{:.1}s]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        if !ok {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
