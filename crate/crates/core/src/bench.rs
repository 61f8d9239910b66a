//! Timing sweeps: context construction, one convolution, and full k-path
//! solves on random out-degree-2 digraphs.

use std::fmt::Write as _;
use std::time::Instant;

use crate::error::Result;
use crate::factorization::{ContextOptions, FactorizationContext};
use crate::instances;
use crate::kpath::{kpath_dp, WeightedDigraph};
use crate::repset::Representation;
use crate::semiring::{Boolean, CappedMinPlus};

pub const CSV_HEADER: &str = "n,k,r,h,ell,build_ms,convolve_us,solve_ms";

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub grid: Vec<(usize, usize)>,
    pub seed: u64,
    /// Out-degree of the generated graphs.
    pub degree: usize,
    pub context: ContextOptions,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            grid: vec![(25, 4), (50, 4), (100, 4), (200, 4), (9, 9)],
            seed: 1,
            degree: 2,
            context: ContextOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub r: usize,
    pub h: usize,
    pub ell: usize,
    pub build_ms: f64,
    pub convolve_us: f64,
    pub solve_ms: f64,
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{:.3},{:.3},{:.3}",
            self.n, self.k, self.r, self.h, self.ell, self.build_ms, self.convolve_us, self.solve_ms
        )
    }
}

/// The random graph a bench row solves.
pub fn bench_graph(n: usize, degree: usize, seed: u64) -> WeightedDigraph {
    instances::out_degree_digraph(&mut instances::rng(seed ^ n as u64), n, degree, 9)
}

pub fn bench_row(n: usize, k: usize, cfg: &BenchConfig) -> Result<BenchRow> {
    let start = Instant::now();
    let ctx = FactorizationContext::build(n, k, &cfg.context)?;
    let build_ms = start.elapsed().as_secs_f64() * 1e3;

    let init = Representation::init(&ctx, Boolean);
    let reps = n.min(8);
    let start = Instant::now();
    for e in 1..=reps {
        std::hint::black_box(init.convolve(e)?);
    }
    let convolve_us = start.elapsed().as_secs_f64() * 1e6 / reps as f64;

    let g = bench_graph(n, cfg.degree, cfg.seed);
    let sr = CappedMinPlus::saturating((k as u64).saturating_mul(g.max_weight()));
    let start = Instant::now();
    std::hint::black_box(kpath_dp(&ctx, sr, &g, k, |w| sr.elem(w))?);
    let solve_ms = start.elapsed().as_secs_f64() * 1e3;

    Ok(BenchRow {
        n,
        k,
        m: g.edges().len(),
        r: ctx.r(),
        h: ctx.h(),
        ell: ctx.ell(),
        build_ms,
        convolve_us,
        solve_ms,
    })
}

/// CSV with one row per grid point; failed rows are reported as comment
/// lines after an `NA` row.
pub fn bench_csv(cfg: &BenchConfig) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for &(n, k) in &cfg.grid {
        match bench_row(n, k, cfg) {
            Ok(row) => {
                let _ = writeln!(out, "{}", row.to_csv());
            }
            Err(e) => {
                let _ = writeln!(out, "{n},{k},NA,NA,NA,NA,NA,NA\n# n={n} k={k}: {e}");
            }
        }
    }
    out
}
