//! Minimum-weight simple directed paths on exactly `k` vertices.
//!
//! The solver runs the layered dynamic program
//!
//! ```text
//! b[t][1] = convolve(init, t)
//! b[t][p] = Σ_{(u,t) ∈ E} w(u,t) · convolve(b[u][p-1], t)
//! answer  = (Σ_t b[t][k] · R)[∅]
//! ```
//!
//! over the capped min-plus semiring with cap `k · max w`, so no path
//! weight is ever clipped. The Boolean instance of the same recurrence
//! answers the decision question.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factorization::{ContextOptions, FactorizationContext, MAX_K};
use crate::repset::Representation;
use crate::semiring::{Boolean, CappedMinPlus, Cost, Semiring};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedDigraph {
    n: usize,
    edges: Vec<(usize, usize, u64)>,
    k: Option<usize>,
}

impl WeightedDigraph {
    /// Vertices are `1..=n`; self-loops and parallel edges are allowed.
    pub fn new(n: usize, edges: Vec<(usize, usize, u64)>) -> Result<Self> {
        for &(i, j, w) in &edges {
            if i == 0 || j == 0 || i > n || j > n {
                return Err(Error::Usage(format!("edge ({i}, {j}) outside [1, {n}]")));
            }
            if w > CappedMinPlus::MAX_CAP {
                return Err(Error::Usage(format!("weight {w} too large")));
            }
        }
        Ok(WeightedDigraph { n, edges, k: None })
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, u64)] {
        &self.edges
    }

    /// The `k` from the file header, if any.
    pub fn k(&self) -> Option<usize> {
        self.k
    }

    pub fn max_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.2).max().unwrap_or(0)
    }

    /// Smallest weight per ordered pair, self-loops dropped.
    pub fn min_weights(&self) -> BTreeMap<(usize, usize), u64> {
        let mut out = BTreeMap::new();
        for &(i, j, w) in &self.edges {
            if i != j {
                out.entry((i, j)).and_modify(|x: &mut u64| *x = (*x).min(w)).or_insert(w);
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("p kpath {} {} {}\n", self.n, self.edges.len(), self.k.unwrap_or(0));
        for &(i, j, w) in &self.edges {
            out.push_str(&format!("e {i} {j} {w}\n"));
        }
        out
    }
}

pub fn parse_graph(path: &Path) -> Result<WeightedDigraph> {
    parse_graph_str(&fs::read_to_string(path)?)
}

/// Parses `p kpath <n> <m> <k>` followed by `m` lines `e <i> <j> <w>`.
/// `#` starts a comment. A header `k` of 0 means "not given".
pub fn parse_graph_str(text: &str) -> Result<WeightedDigraph> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str, what: &str| -> Result<u64> {
            if s.starts_with('-') {
                return Err(Error::parse(line_no, format!("negative {what} `{s}`")));
            }
            s.parse::<u64>().map_err(|_| Error::parse(line_no, format!("bad {what} `{s}`")))
        };
        match fields[0] {
            "p" => {
                if header.is_some() {
                    return Err(Error::parse(line_no, "duplicate header"));
                }
                if fields.len() != 5 || fields[1] != "kpath" {
                    return Err(Error::parse(line_no, "expected `p kpath <n> <m> <k>`"));
                }
                let n = num(fields[2], "vertex count")? as usize;
                let m = num(fields[3], "edge count")? as usize;
                let k = num(fields[4], "k")? as usize;
                header = Some((n, m, k));
            }
            "e" => {
                let (n, _, _) = header.ok_or_else(|| Error::parse(line_no, "edge before header"))?;
                if fields.len() != 4 {
                    return Err(Error::parse(line_no, "expected `e <i> <j> <w>`"));
                }
                let i = num(fields[1], "vertex")? as usize;
                let j = num(fields[2], "vertex")? as usize;
                let w = num(fields[3], "weight")?;
                for v in [i, j] {
                    if v == 0 || v > n {
                        return Err(Error::parse(line_no, format!("vertex {v} outside [1, {n}]")));
                    }
                }
                if w > CappedMinPlus::MAX_CAP {
                    return Err(Error::parse(line_no, format!("weight {w} too large")));
                }
                edges.push((i, j, w));
            }
            other => return Err(Error::parse(line_no, format!("unknown line type `{other}`"))),
        }
    }
    let (n, m, k) = header.ok_or_else(|| Error::parse(1, "missing `p kpath` header"))?;
    if edges.len() != m {
        return Err(Error::parse(1, format!("header declares {m} edges, found {}", edges.len())));
    }
    let g = WeightedDigraph { n, edges, k: None };
    Ok(if k > 0 { g.with_k(k) } else { g })
}

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    pub context: ContextOptions,
    /// Overrides the automatic cap `k · max w`.
    pub cap: Option<u64>,
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Usage("k must be at least 1".into()));
    }
    if k > MAX_K {
        return Err(Error::Resource(format!("k={k} exceeds the supported maximum {MAX_K}")));
    }
    Ok(())
}

/// The layered recurrence over any semiring; `weight` embeds edge weights.
pub fn kpath_dp<S: Semiring>(
    ctx: &Arc<FactorizationContext>,
    sr: S,
    g: &WeightedDigraph,
    k: usize,
    weight: impl Fn(u64) -> S::Elem,
) -> Result<S::Elem> {
    let n = g.n();
    let mut incoming: Vec<Vec<(usize, S::Elem)>> = vec![Vec::new(); n + 1];
    for (&(i, j), &w) in &g.min_weights() {
        let w = weight(w);
        if !sr.is_zero(w) {
            incoming[j].push((i, w));
        }
    }
    let init = Representation::init(ctx, sr.clone());
    let first = |t: usize| -> Result<Option<Representation<S>>> { Ok(Some(init.convolve(t)?)) };
    #[cfg(feature = "parallel")]
    let mut layer: Vec<Option<Representation<S>>> = (1..=n).into_par_iter().map(first).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let mut layer: Vec<Option<Representation<S>>> = (1..=n).map(first).collect::<Result<_>>()?;

    for _ in 2..=k {
        let step = |t: usize| -> Result<Option<Representation<S>>> {
            let mut acc: Option<Representation<S>> = None;
            for &(u, w) in &incoming[t] {
                if let Some(bu) = &layer[u - 1] {
                    let term = bu.convolve(t)?.scale_left(w);
                    match &mut acc {
                        None => acc = Some(term),
                        Some(a) => a.add_assign(&term)?,
                    }
                }
            }
            Ok(acc.filter(|b| !b.is_zero()))
        };
        #[cfg(feature = "parallel")]
        let next = (1..=n).into_par_iter().map(step).collect::<Result<Vec<_>>>()?;
        #[cfg(not(feature = "parallel"))]
        let next = (1..=n).map(step).collect::<Result<Vec<_>>>()?;
        layer = next;
    }

    // (Σ_t b_t)·R = Σ_t (b_t·R)
    let mut total = sr.zero();
    for b in layer.iter().flatten() {
        total = sr.add(total, b.query(&[])?);
    }
    Ok(total)
}

pub fn solve_kpath(g: &WeightedDigraph, k: usize) -> Result<Cost> {
    solve_kpath_with(g, k, &SolveOptions::default())
}

/// Minimum weight of a simple path on `k` vertices, or [`Cost::INF`].
pub fn solve_kpath_with(g: &WeightedDigraph, k: usize, opts: &SolveOptions) -> Result<Cost> {
    check_k(k)?;
    if k > g.n() {
        return Ok(Cost::INF);
    }
    if k == 1 {
        return Ok(Cost::finite(0));
    }
    let cap = opts.cap.unwrap_or_else(|| (k as u64).saturating_mul(g.max_weight()));
    let sr = CappedMinPlus::saturating(cap);
    let ctx = FactorizationContext::build(g.n(), k, &opts.context)?;
    kpath_dp(&ctx, sr, g, k, |w| sr.elem(w))
}

pub fn solve_kpath_decision(g: &WeightedDigraph, k: usize) -> Result<bool> {
    solve_kpath_decision_with(g, k, &SolveOptions::default())
}

/// Whether a simple path on `k` vertices exists.
pub fn solve_kpath_decision_with(g: &WeightedDigraph, k: usize, opts: &SolveOptions) -> Result<bool> {
    check_k(k)?;
    if k > g.n() {
        return Ok(false);
    }
    if k == 1 {
        return Ok(true);
    }
    let ctx = FactorizationContext::build(g.n(), k, &opts.context)?;
    kpath_dp(&ctx, Boolean, g, k, |_| true)
}

pub const BRUTE_FORCE_MAX_N: usize = 14;
pub const BRUTE_FORCE_MAX_K: usize = 6;

/// Exhaustive search over simple vertex sequences of length `k`.
pub fn brute_force_kpath(g: &WeightedDigraph, k: usize) -> Result<Cost> {
    if k == 0 {
        return Err(Error::Usage("k must be at least 1".into()));
    }
    if g.n() > BRUTE_FORCE_MAX_N || k > BRUTE_FORCE_MAX_K {
        return Err(Error::Resource(format!(
            "brute force limited to n <= {BRUTE_FORCE_MAX_N}, k <= {BRUTE_FORCE_MAX_K}"
        )));
    }
    if k > g.n() {
        return Ok(Cost::INF);
    }
    let n = g.n();
    let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
    for (&(i, j), &w) in &g.min_weights() {
        adj[i - 1].push((j - 1, w));
    }
    fn dfs(adj: &[Vec<(usize, u64)>], v: usize, used: u32, left: usize, acc: u64, best: &mut Option<u64>) {
        if left == 0 {
            *best = Some(best.map_or(acc, |b| b.min(acc)));
            return;
        }
        for &(t, w) in &adj[v] {
            if used & (1 << t) == 0 {
                dfs(adj, t, used | (1 << t), left - 1, acc.saturating_add(w), best);
            }
        }
    }
    let mut best = None;
    for start in 0..n {
        dfs(&adj, start, 1 << start, k - 1, 0, &mut best);
    }
    Ok(best.map_or(Cost::INF, Cost::finite))
}
