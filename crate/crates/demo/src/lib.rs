use std::fmt::Write;

use wasm_bindgen::prelude::*;

use dynrepset::circuit::{automatic_cap, brute_force_expand, monomial_sum, parse_circuit_str, BRUTE_FORCE_MAX_VARS};
use dynrepset::factorization::{ContextOptions, FactorizationContext};
use dynrepset::instances;
use dynrepset::kpath::{brute_force_kpath, parse_graph_str, solve_kpath_with, SolveOptions};
use dynrepset::semiring::{Boolean, CappedMinPlus};

// exhaustive search gets slow past this in the browser
const ORACLE_MAX_N: usize = 14;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Sizes of the families behind the vectors for (n, k).
#[wasm_bindgen]
pub fn context_summary(n: usize, k: usize) -> Result<String, JsError> {
    let ctx = FactorizationContext::build(n, k, &ContextOptions::default()).map_err(js_err)?;
    let mut out = String::new();
    writeln!(out, "n {}  k {}  padding {}", ctx.n(), ctx.k_user(), ctx.padding()).unwrap();
    writeln!(out, "blocks s {}  block universe u {}", ctx.s(), ctx.u()).unwrap();
    writeln!(out, "outer hashes {}  inner hashes {}", ctx.outer().len(), ctx.inner().len()).unwrap();
    writeln!(out, "universal sets {}", ctx.family().len()).unwrap();
    writeln!(out, "h {}  ell {}  vector length r {}", ctx.h(), ctx.ell(), ctx.r()).unwrap();
    Ok(out)
}

/// Min-weight k-vertex path for a graph in the text format. Small graphs
/// are also searched exhaustively.
#[wasm_bindgen]
pub fn solve_kpath(graph: &str, k: usize) -> Result<String, JsError> {
    let g = parse_graph_str(graph).map_err(js_err)?;
    let k = if k == 0 { g.k().unwrap_or(0) } else { k };
    let answer = solve_kpath_with(&g, k, &SolveOptions::default()).map_err(js_err)?;
    let mut out = format!("answer {answer}\n");
    if g.n() <= ORACLE_MAX_N {
        let expected = brute_force_kpath(&g, k).map_err(js_err)?;
        let verdict = if expected == answer { "match" } else { "MISMATCH" };
        writeln!(out, "oracle {expected} {verdict}").unwrap();
    }
    Ok(out)
}

/// A random digraph where every vertex has `degree` out-edges.
#[wasm_bindgen]
pub fn random_graph(n: usize, k: usize, degree: usize, max_weight: u64, seed: u64) -> String {
    let mut rng = instances::rng(seed);
    instances::out_degree_digraph(&mut rng, n.max(1), degree, max_weight).with_k(k).to_text()
}

/// Degree-k coefficient sum of a skewed circuit.
#[wasm_bindgen]
pub fn circuit_sum(text: &str, k: usize, boolean: bool) -> Result<String, JsError> {
    let c = parse_circuit_str(text).map_err(js_err)?;
    let k = if k == 0 { c.k().unwrap_or(0) } else { k };
    let opts = ContextOptions::default();
    let small = c.n_vars() <= BRUTE_FORCE_MAX_VARS;
    let (answer, expected) = if boolean {
        let answer = monomial_sum(&c, k, &Boolean, &opts).map_err(js_err)?;
        let expected = small.then(|| brute_force_expand(&c, k, &Boolean)).transpose().map_err(js_err)?;
        (answer.to_string(), expected.map(|e| (e.to_string(), e == answer)))
    } else {
        let sr = CappedMinPlus::new(automatic_cap(&c)).map_err(js_err)?;
        let answer = monomial_sum(&c, k, &sr, &opts).map_err(js_err)?;
        let expected = small.then(|| brute_force_expand(&c, k, &sr)).transpose().map_err(js_err)?;
        (answer.to_string(), expected.map(|e| (e.to_string(), e == answer)))
    };
    let mut out = format!("answer {answer}\n");
    if let Some((e, ok)) = expected {
        writeln!(out, "oracle {e} {}", if ok { "match" } else { "MISMATCH" }).unwrap();
    }
    Ok(out)
}
