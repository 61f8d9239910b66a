//! Seeded generators for graphs and circuits used by tests, the self-test
//! harness and benchmarks.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{monomial_lists, CircuitSemiring, ConstValue, Gate, SkewedCircuit};
use crate::kpath::WeightedDigraph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Path `1 → 2 → 3` with weights 1 and 2.
pub fn path_graph() -> WeightedDigraph {
    WeightedDigraph::new(3, vec![(1, 2, 1), (2, 3, 2)]).expect("valid graph")
}

/// Directed triangle `1 → 2 → 3 → 1` with unit weights.
pub fn triangle() -> WeightedDigraph {
    WeightedDigraph::new(3, vec![(1, 2, 1), (2, 3, 1), (3, 1, 1)]).expect("valid graph")
}

/// Complete digraph without self-loops.
pub fn complete_digraph(n: usize, w: u64) -> WeightedDigraph {
    let edges = (1..=n).flat_map(|i| (1..=n).filter(move |&j| j != i).map(move |j| (i, j, w))).collect();
    WeightedDigraph::new(n, edges).expect("valid graph")
}

/// Each ordered pair becomes an edge with probability `density`; a few
/// self-loops and parallel edges are mixed in.
pub fn random_digraph<R: Rng>(rng: &mut R, n: usize, density: f64, max_weight: u64) -> WeightedDigraph {
    let mut edges = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            if i != j && rng.gen_bool(density) {
                edges.push((i, j, rng.gen_range(0..=max_weight)));
                if rng.gen_bool(0.05) {
                    edges.push((i, j, rng.gen_range(0..=max_weight)));
                }
            }
        }
        if rng.gen_bool(0.05) {
            edges.push((i, i, rng.gen_range(0..=max_weight)));
        }
    }
    WeightedDigraph::new(n, edges).expect("valid graph")
}

/// Every vertex gets `degree` distinct random out-neighbours, so
/// `m = degree · n`.
pub fn out_degree_digraph<R: Rng>(rng: &mut R, n: usize, degree: usize, max_weight: u64) -> WeightedDigraph {
    let degree = degree.min(n.saturating_sub(1));
    let mut edges = Vec::with_capacity(n * degree);
    let mut others: Vec<usize> = Vec::with_capacity(n);
    for i in 1..=n {
        others.clear();
        others.extend((1..=n).filter(|&j| j != i));
        for &j in others.choose_multiple(rng, degree) {
            edges.push((i, j, rng.gen_range(0..=max_weight)));
        }
    }
    WeightedDigraph::new(n, edges).expect("valid graph")
}

/// Shape limits for [`random_circuit`].
#[derive(Clone, Copy, Debug)]
pub struct CircuitShape {
    pub max_gates: usize,
    pub max_vars: usize,
    pub max_d: usize,
    /// Constants are drawn from `0..=max_const` (plus the occasional `INF`).
    pub max_const: u64,
}

impl Default for CircuitShape {
    fn default() -> Self {
        CircuitShape { max_gates: 12, max_vars: 8, max_d: 4, max_const: 9 }
    }
}

/// A random circuit that is `d`-skewed over `sr`. Multiplications that
/// would break skewness are redrawn, and as a last resort replaced by
/// additions. Leftover sinks are joined by one final addition.
pub fn random_circuit<R: Rng, S: CircuitSemiring>(rng: &mut R, shape: CircuitShape, sr: &S) -> SkewedCircuit {
    let n_vars = rng.gen_range(1..=shape.max_vars);
    let d = rng.gen_range(1..=shape.max_d);
    let max_gates = shape.max_gates.max(2);
    let leaves = rng.gen_range(1..=4.min(max_gates - 1));
    let internal = rng.gen_range(0..=max_gates - 1 - leaves);
    let mut gates: Vec<Gate> = Vec::with_capacity(max_gates);
    for _ in 0..leaves {
        gates.push(random_leaf(rng, n_vars, shape.max_const));
    }
    for _ in 0..internal {
        let n = gates.len();
        let mut pick = None;
        for _ in 0..10 {
            let g = if rng.gen_bool(0.5) {
                Gate::Mul(rng.gen_range(0..n), rng.gen_range(0..n))
            } else if rng.gen_bool(0.2) {
                random_leaf(rng, n_vars, shape.max_const)
            } else {
                let fan_in = rng.gen_range(1..=3);
                Gate::Add((0..fan_in).map(|_| rng.gen_range(0..n)).collect())
            };
            gates.push(g);
            let ok = monomial_lists(&gates, d, sr, |i| i.to_string()).is_ok();
            let g = gates.pop().expect("just pushed");
            if ok {
                pick = Some(g);
                break;
            }
        }
        gates.push(pick.unwrap_or_else(|| Gate::Add(vec![rng.gen_range(0..n)])));
    }
    let mut used = vec![false; gates.len()];
    for g in &gates {
        match g {
            Gate::Add(ops) => ops.iter().for_each(|&o| used[o] = true),
            Gate::Mul(l, r) => {
                used[*l] = true;
                used[*r] = true;
            }
            _ => {}
        }
    }
    let sinks: Vec<usize> = (0..gates.len()).filter(|&i| !used[i]).collect();
    if sinks.len() > 1 {
        gates.push(Gate::Add(sinks));
    }
    let output = gates.len() - 1;
    SkewedCircuit::new(n_vars, d, gates, output).expect("generator emits valid circuits")
}

fn random_leaf<R: Rng>(rng: &mut R, n_vars: usize, max_const: u64) -> Gate {
    if rng.gen_bool(0.75) {
        Gate::Var(rng.gen_range(1..=n_vars))
    } else if rng.gen_bool(0.1) {
        Gate::Const(ConstValue::Inf)
    } else {
        Gate::Const(ConstValue::Finite(rng.gen_range(0..=max_const)))
    }
}

/// Layered circuit whose degree-`k` multilinear coefficient sum over
/// capped min-plus is the minimum weight of a `k`-vertex path:
/// `P_{t,1} = x_t` and `P_{t,p} = Σ_u P_{u,p-1} · (w_{u,t} · x_t)`.
/// The right operand of every layer multiplication is a single monomial,
/// so the circuit is 1-skewed.
pub fn kpath_circuit(g: &WeightedDigraph, k: usize) -> SkewedCircuit {
    let n = g.n();
    let mut gates: Vec<Gate> = (1..=n).map(Gate::Var).collect();
    let mut into: BTreeMap<usize, Vec<(usize, u64)>> = BTreeMap::new();
    for ((u, t), w) in g.min_weights() {
        into.entry(t).or_default().push((u, w));
    }
    let mut edge_gate: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&t, ins) in &into {
        for &(u, w) in ins {
            gates.push(Gate::Const(ConstValue::Finite(w)));
            gates.push(Gate::Mul(gates.len() - 1, t - 1));
            edge_gate.insert((u, t), gates.len() - 1);
        }
    }
    let mut layer: Vec<Option<usize>> = (0..n).map(Some).collect();
    for _ in 2..=k {
        let mut next = vec![None; n];
        for (&t, ins) in &into {
            let mut terms = Vec::new();
            for &(u, _) in ins {
                if let Some(prev) = layer[u - 1] {
                    gates.push(Gate::Mul(prev, edge_gate[&(u, t)]));
                    terms.push(gates.len() - 1);
                }
            }
            if !terms.is_empty() {
                gates.push(Gate::Add(terms));
                next[t - 1] = Some(gates.len() - 1);
            }
        }
        layer = next;
    }
    let last: Vec<usize> = layer.into_iter().flatten().collect();
    if last.is_empty() {
        gates.push(Gate::Const(ConstValue::Inf));
    } else {
        gates.push(Gate::Add(last));
    }
    let output = gates.len() - 1;
    SkewedCircuit::new(n, 1, gates, output).expect("reduction emits valid circuits").with_k(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{automatic_cap, brute_force_expand, compute_monomial_lists};
    use crate::kpath::brute_force_kpath;
    use crate::semiring::{Boolean, CappedMinPlus};

    #[test]
    fn generators_are_deterministic() {
        let a = random_digraph(&mut rng(7), 9, 0.3, 9);
        let b = random_digraph(&mut rng(7), 9, 0.3, 9);
        assert_eq!(a.to_text(), b.to_text());
        let sr = CappedMinPlus::saturating(1000);
        let c1 = random_circuit(&mut rng(3), CircuitShape::default(), &sr);
        let c2 = random_circuit(&mut rng(3), CircuitShape::default(), &sr);
        assert_eq!(c1, c2);
    }

    #[test]
    fn out_degree_graph_shape() {
        let g = out_degree_digraph(&mut rng(1), 30, 2, 9);
        assert_eq!(g.edges().len(), 60);
        assert!(g.edges().iter().all(|&(u, v, _)| u != v));
    }

    #[test]
    fn random_circuits_are_valid_and_small() {
        let mut r = rng(11);
        for i in 0..200 {
            let shape = CircuitShape { max_const: if i % 2 == 0 { 1 } else { 9 }, ..CircuitShape::default() };
            let c = if i % 2 == 0 {
                let c = random_circuit(&mut r, shape, &Boolean);
                assert!(compute_monomial_lists(&c, &Boolean).is_ok());
                c
            } else {
                let sr = CappedMinPlus::saturating(CappedMinPlus::MAX_CAP);
                let c = random_circuit(&mut r, shape, &sr);
                assert!(compute_monomial_lists(&c, &sr).is_ok());
                c
            };
            assert!(c.gates().len() <= 12, "{}", c.to_text());
            assert!(c.n_vars() <= 8 && c.d() <= 4);
        }
    }

    #[test]
    fn kpath_circuit_matches_dfs_by_expansion() {
        let mut r = rng(5);
        for _ in 0..20 {
            let n = r.gen_range(2..=6);
            let g = random_digraph(&mut r, n, 0.4, 9);
            for k in 1..=4 {
                let c = kpath_circuit(&g, k);
                let sr = CappedMinPlus::new(automatic_cap(&c)).unwrap();
                assert_eq!(brute_force_expand(&c, k, &sr).unwrap(), brute_force_kpath(&g, k).unwrap(), "{}", g.to_text());
            }
        }
    }

    #[test]
    fn representation_sum_matches_expansion_on_random_circuits() {
        use crate::circuit::monomial_sum;
        use crate::factorization::ContextOptions;
        let opts = ContextOptions::default();
        let mut r = rng(21);
        for i in 0..40 {
            let k = r.gen_range(0..=4);
            if i % 2 == 0 {
                let shape = CircuitShape { max_const: 1, ..CircuitShape::default() };
                let c = random_circuit(&mut r, shape, &Boolean);
                let want = brute_force_expand(&c, k, &Boolean).unwrap();
                assert_eq!(monomial_sum(&c, k, &Boolean, &opts).unwrap(), want, "k={k}\n{}", c.to_text());
            } else {
                let c = random_circuit(&mut r, CircuitShape::default(), &CappedMinPlus::saturating(1 << 40));
                let sr = CappedMinPlus::new(automatic_cap(&c)).unwrap();
                let want = brute_force_expand(&c, k, &sr).unwrap();
                assert_eq!(monomial_sum(&c, k, &sr, &opts).unwrap(), want, "k={k}\n{}", c.to_text());
            }
        }
    }
}
