//! Oracle sweeps behind `dynrepset selftest`.
//!
//! Every check reports one line `<name> <params> PASS|FAIL|SKIP`. A check
//! whose estimated work exceeds the budget is skipped without running, so
//! a zero budget skips everything. Reports depend only on the config.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::circuit::{automatic_cap, brute_force_expand, monomial_sum};
use crate::error::Result;
use crate::factorization::{ContextOptions, FactorizationContext};
use crate::instances::{self, CircuitShape};
use crate::kpath::{brute_force_kpath, solve_kpath_decision_with, solve_kpath_with, SolveOptions};
use crate::oracle::{
    self, check_commutation, check_drop_universal_set, check_factorization, check_hat_commutation, Defect,
};
use crate::pseudorandom::{verify_splitter, verify_universal, Verdict, DEFAULT_CONSTRUCTION_BUDGET, FAMILY_SEED};
use crate::repset::Representation;
use crate::semiring::{Boolean, CappedMinPlus, Cost, Semiring};
use crate::subsets::binomial_sum;

/// Contexts whose factorization, families and commutation are checked.
/// `(20, 2)` is the one whose outer hash is not the identity.
pub const CONTEXT_GRID: [(usize, usize); 6] = [(6, 3), (6, 4), (8, 4), (9, 3), (10, 4), (20, 2)];

/// Contexts on which dropping a universal set must break the identity.
/// On `(6, 4)` and `(20, 2)` the family has slack and no single set is
/// needed.
pub const DROP_GRID: [(usize, usize); 4] = [(6, 3), (8, 4), (9, 3), (10, 4)];

#[derive(Clone, Debug)]
pub struct SelftestConfig {
    pub max_n: usize,
    pub max_k: usize,
    pub budget: u128,
    pub seed: u64,
    pub mutate: Option<Defect>,
    pub context: ContextOptions,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig {
            max_n: 20,
            max_k: 4,
            budget: DEFAULT_CONSTRUCTION_BUDGET,
            seed: FAMILY_SEED,
            mutate: None,
            context: ContextOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckLine {
    pub name: String,
    pub params: String,
    pub verdict: Verdict,
}

impl CheckLine {
    fn new(name: &str, params: String, verdict: Verdict) -> Self {
        CheckLine { name: name.to_string(), params, verdict }
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.name, self.params, self.verdict.label())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub lines: Vec<CheckLine>,
}

impl Report {
    pub fn failed(&self) -> usize {
        self.lines.iter().filter(|l| l.verdict == Verdict::Fail).count()
    }
    pub fn skipped(&self) -> usize {
        self.lines.iter().filter(|l| matches!(l.verdict, Verdict::Unverifiable { .. })).count()
    }
    pub fn passed(&self) -> usize {
        self.lines.iter().filter(|l| l.verdict == Verdict::Pass).count()
    }
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(&l.to_string());
            out.push('\n');
        }
        out.push_str(&format!("summary {} passed, {} failed, {} skipped\n", self.passed(), self.failed(), self.skipped()));
        out
    }
}

fn gated(required: u128, budget: u128, run: impl FnOnce() -> Result<bool>) -> Verdict {
    if required > budget {
        return Verdict::Unverifiable { required, budget };
    }
    match run() {
        Ok(ok) => Verdict::from_bool(ok),
        Err(_) => Verdict::Fail,
    }
}

pub fn run(cfg: &SelftestConfig) -> Report {
    let mut lines = Vec::new();
    let max_k = cfg.max_k.min(4);
    for n in 2..=cfg.max_n.min(8) {
        for k in 1..=max_k.min(n) {
            lines.push(commutation(n, k, cfg.budget, cfg.mutate));
        }
    }
    for (n, k) in CONTEXT_GRID {
        if n > cfg.max_n || k > cfg.max_k {
            continue;
        }
        let ctx = if cfg.budget == 0 { None } else { FactorizationContext::build(n, k, &cfg.context).ok() };
        lines.extend(context_checks(n, k, ctx.as_ref(), cfg.budget, cfg.mutate));
    }
    lines.push(invert_sweep(cfg.seed, 1000, cfg.budget));
    for (n, k) in CONTEXT_GRID {
        if n > cfg.max_n.min(10) || k > cfg.max_k || k < 3 {
            continue;
        }
        lines.extend(sequence_sweeps(n, k, cfg.seed, 10, cfg.budget, &cfg.context));
    }
    let kpath_opts = SolveOptions { context: cfg.context.clone(), cap: None };
    lines.push(kpath_sweep(cfg.seed, 30, cfg.max_n.min(12), max_k, cfg.budget, &kpath_opts));
    lines.push(circuit_sweep(cfg.seed, 50, max_k, cfg.budget, &cfg.context));
    lines.push(reduction_sweep(cfg.seed, 10, cfg.max_n.min(8), max_k, cfg.budget, &cfg.context));
    Report { lines }
}

/// Commutation for every `e ∈ [n]`.
pub fn commutation(n: usize, k: usize, budget: u128, mutate: Option<Defect>) -> CheckLine {
    let sets = binomial_sum(n, k);
    let required = sets.saturating_mul(sets).saturating_mul(n as u128);
    let v = gated(required, budget, || Ok((1..=n).all(|e| check_commutation(n, k, e, mutate))));
    CheckLine::new("commutation", format!("n={n},k={k}"), v)
}

/// Family verification, factorization identity, universal-set mutation
/// and lifted commutation on one context. `ctx` is `None` when it was not
/// built, which reports every line as skipped or failed.
pub fn context_checks(
    n: usize,
    k: usize,
    ctx: Option<&Arc<FactorizationContext>>,
    budget: u128,
    mutate: Option<Defect>,
) -> Vec<CheckLine> {
    let params = format!("n={n},k={k}");
    let with_drop = DROP_GRID.contains(&(n, k));
    let line = |name: &str, v: Verdict| CheckLine::new(name, params.clone(), v);
    let Some(ctx) = ctx else {
        let v = if budget == 0 { Verdict::Unverifiable { required: 1, budget } } else { Verdict::Fail };
        let mut names = vec!["outer-splitter", "inner-splitter", "universal-family", "factorization"];
        if with_drop {
            names.push("drop-universal-set");
        }
        names.push("hat-commutation");
        return names.into_iter().map(|name| line(name, v)).collect();
    };
    let factorization = match mutate {
        // the identity must break once a set is gone
        Some(Defect::DropUniversalSet) => match check_drop_universal_set(ctx, budget) {
            Verdict::Pass => Verdict::Fail,
            Verdict::Fail => Verdict::Pass,
            skip => skip,
        },
        _ => check_factorization(ctx, budget, mutate),
    };
    let mut lines = vec![
        line("outer-splitter", verify_splitter(ctx.outer(), budget)),
        line("inner-splitter", verify_splitter(ctx.inner(), budget)),
        line("universal-family", verify_universal(ctx.family(), budget)),
        line("factorization", factorization),
    ];
    if with_drop {
        lines.push(line("drop-universal-set", check_drop_universal_set(ctx, budget)));
    }
    let hat = (1..=n).map(|e| check_hat_commutation(ctx, e, budget / n as u128, mutate)).fold(Verdict::Pass, worst);
    lines.push(line("hat-commutation", hat));
    lines
}

fn worst(a: Verdict, b: Verdict) -> Verdict {
    match (a, b) {
        (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
        (u @ Verdict::Unverifiable { .. }, _) | (_, u @ Verdict::Unverifiable { .. }) => u,
        _ => Verdict::Pass,
    }
}

/// Random 0/1 matrices and right-hand sides over `{0, 1, ∞}`, at most six
/// rows and columns each.
pub fn invert_sweep(seed: u64, trials: usize, budget: u128) -> CheckLine {
    let required = (trials as u128) * 3u128.pow(6);
    let v = gated(required, budget, || {
        let mut rng = instances::rng(seed ^ 0x1);
        let sr = CappedMinPlus::new(1)?;
        for _ in 0..trials {
            let rows = rng.gen_range(1..=6);
            let cols = rng.gen_range(1..=6);
            let x: Vec<Vec<bool>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_bool(0.5)).collect()).collect();
            let b: Vec<Cost> = (0..cols).map(|_| sr.elem(rng.gen_range(0..3))).collect();
            if !oracle::check_invert(&sr, &x, &b)? {
                return Ok(false);
            }
        }
        Ok(true)
    });
    CheckLine::new("invert-minimality", format!("trials={trials}"), v)
}

/// Applies `len` random convolve/add/scale steps starting from the initial
/// representation, comparing against the dense table after every step.
pub fn representation_sequence<S: Semiring, R: Rng>(
    ctx: &Arc<FactorizationContext>,
    sr: &S,
    rng: &mut R,
    len: usize,
    mut scalar: impl FnMut(&mut R) -> S::Elem,
) -> Result<bool> {
    let n = ctx.n();
    let mut pool = vec![(Representation::init(ctx, sr.clone()), oracle::init_table(sr))];
    if !oracle::represents(&pool[0].0, &pool[0].1)? {
        return Ok(false);
    }
    for _ in 0..len {
        let (b, a) = &pool[rng.gen_range(0..pool.len())];
        let next = match rng.gen_range(0..6) {
            0..=2 => {
                let e = rng.gen_range(1..=n);
                (b.convolve(e)?, oracle::dense_mul_c(sr, a, e))
            }
            3 => {
                let (b2, a2) = &pool[rng.gen_range(0..pool.len())];
                (b.add(b2)?, oracle::dense_add(sr, a, a2))
            }
            4 => {
                let l = scalar(rng);
                (b.scale_left(l), oracle::dense_scale(sr, l, a))
            }
            _ => {
                let l = scalar(rng);
                (b.scale_right(l), oracle::dense_scale(sr, l, a))
            }
        };
        if !oracle::represents(&next.0, &next.1)? || !oracle::queries_match(&next.0, &next.1)? {
            return Ok(false);
        }
        pool.push(next);
    }
    Ok(true)
}

/// `sequences` random sequences of length at most 10 per semiring.
pub fn sequence_sweeps(
    n: usize,
    k: usize,
    seed: u64,
    sequences: usize,
    budget: u128,
    opts: &ContextOptions,
) -> Vec<CheckLine> {
    let sets = binomial_sum(n, k);
    let required = (sequences as u128) * 10 * sets * sets;
    let mut lines = Vec::new();
    for semiring in ["boolean", "minplus"] {
        let v = gated(required, budget, || {
            let ctx = FactorizationContext::build(n, k, opts)?;
            let mut rng = instances::rng(seed ^ ((n as u64) << 8 | k as u64) ^ 0x2);
            for _ in 0..sequences {
                let len = rng.gen_range(1..=10);
                let ok = if semiring == "boolean" {
                    representation_sequence(&ctx, &Boolean, &mut rng, len, |r| r.gen_bool(0.8))?
                } else {
                    let sr = CappedMinPlus::new(20)?;
                    representation_sequence(&ctx, &sr, &mut rng, len, |r| {
                        if r.gen_bool(0.1) {
                            Cost::INF
                        } else {
                            sr.elem(r.gen_range(0..=9))
                        }
                    })?
                };
                if !ok {
                    return Ok(false);
                }
            }
            Ok(true)
        });
        lines.push(CheckLine::new(
            "representation-sequences",
            format!("n={n},k={k},semiring={semiring},sequences={sequences}"),
            v,
        ));
    }
    lines
}

/// Random digraphs with `n ≤ max_n`, `k ∈ [2, max_k]`, weights in `[0, 9]`,
/// plus the hand fixtures; both the optimisation and decision variants.
pub fn kpath_sweep(seed: u64, instances: usize, max_n: usize, max_k: usize, budget: u128, opts: &SolveOptions) -> CheckLine {
    let max_n = max_n.max(2);
    let max_k = max_k.max(2);
    let required = (instances as u128).saturating_mul((max_n as u128).pow(max_k as u32));
    let v = gated(required, budget, || {
        let fixtures = [
            (instances::path_graph(), 3, Cost::finite(3)),
            (instances::triangle(), 3, Cost::finite(2)),
            (instances::triangle(), 4, Cost::INF),
        ];
        for (g, k, want) in &fixtures {
            if solve_kpath_with(g, *k, opts)? != *want {
                return Ok(false);
            }
        }
        let mut rng = instances::rng(seed ^ 0x3);
        for i in 0..instances {
            let n = rng.gen_range(2..=max_n);
            let k = 2 + i % (max_k - 1);
            let density = rng.gen_range(0.15..0.6);
            let g = instances::random_digraph(&mut rng, n, density, 9);
            let want = brute_force_kpath(&g, k)?;
            if solve_kpath_with(&g, k, opts)? != want || solve_kpath_decision_with(&g, k, opts)? != !want.is_inf() {
                return Ok(false);
            }
        }
        Ok(true)
    });
    CheckLine::new("kpath-vs-dfs", format!("instances={instances},max_n={max_n},max_k={max_k}"), v)
}

/// Random skewed circuits, alternating semirings, against full expansion.
pub fn circuit_sweep(seed: u64, instances: usize, max_k: usize, budget: u128, opts: &ContextOptions) -> CheckLine {
    let shape = CircuitShape::default();
    let required = (instances as u128) << (2 * shape.max_vars);
    let v = gated(required, budget, || {
        let mut rng = instances::rng(seed ^ 0x4);
        for i in 0..instances {
            let k = rng.gen_range(0..=max_k);
            let ok = if i % 2 == 0 {
                let c = instances::random_circuit(&mut rng, CircuitShape { max_const: 1, ..shape }, &Boolean);
                monomial_sum(&c, k, &Boolean, opts)? == brute_force_expand(&c, k, &Boolean)?
            } else {
                let c = instances::random_circuit(&mut rng, shape, &CappedMinPlus::saturating(CappedMinPlus::MAX_CAP));
                let sr = CappedMinPlus::new(automatic_cap(&c))?;
                monomial_sum(&c, k, &sr, opts)? == brute_force_expand(&c, k, &sr)?
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    });
    CheckLine::new("circuit-vs-expansion", format!("instances={instances},max_k={max_k}"), v)
}

/// The layered k-path circuit evaluated through representations against
/// the k-path solver.
pub fn reduction_sweep(seed: u64, instances: usize, max_n: usize, max_k: usize, budget: u128, opts: &ContextOptions) -> CheckLine {
    let max_n = max_n.max(2);
    let max_k = max_k.max(2);
    let required = (instances as u128).saturating_mul((max_n as u128).pow(max_k as u32));
    let v = gated(required, budget, || {
        let mut rng = instances::rng(seed ^ 0x5);
        let solve = SolveOptions { context: opts.clone(), cap: None };
        for i in 0..instances {
            let n = rng.gen_range(2..=max_n);
            let k = 2 + i % (max_k - 1);
            let density = rng.gen_range(0.2..0.6);
            let g = instances::random_digraph(&mut rng, n, density, 9);
            let c = instances::kpath_circuit(&g, k);
            let sr = CappedMinPlus::new(automatic_cap(&c))?;
            if monomial_sum(&c, k, &sr, opts)? != solve_kpath_with(&g, k, &solve)? {
                return Ok(false);
            }
        }
        Ok(true)
    });
    CheckLine::new("kpath-circuit-reduction", format!("instances={instances},max_n={max_n},max_k={max_k}"), v)
}
