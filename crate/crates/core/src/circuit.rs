//! `d`-skewed arithmetic circuits and the sum of their degree-`k`
//! multilinear coefficients.
//!
//! A circuit is a DAG of variable, constant, addition (any fan-in) and
//! multiplication (fan-in two) gates with a single sink. It is `d`-skewed
//! when every multiplication has an operand whose polynomial has at most
//! `d` monomials. Products that repeat a variable are not multilinear and
//! are dropped everywhere in this module, which is also what repeated
//! convolution with the same element produces.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::factorization::{ContextOptions, FactorizationContext, MAX_K};
use crate::repset::Representation;
use crate::semiring::{Boolean, CappedMinPlus, Cost, Semiring};

/// A constant as written in a circuit file, interpreted per semiring.
///
/// `INF` always denotes `0̄`. Over the Boolean semiring only `0`, `1` and
/// `INF` are accepted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstValue {
    Finite(u64),
    Inf,
}

impl std::fmt::Display for ConstValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConstValue::Finite(v) => write!(f, "{v}"),
            ConstValue::Inf => f.write_str("INF"),
        }
    }
}

/// Semirings whose elements circuit constants can be read into.
pub trait CircuitSemiring: Semiring {
    fn constant(&self, c: ConstValue) -> Result<Self::Elem>;
}

impl CircuitSemiring for Boolean {
    fn constant(&self, c: ConstValue) -> Result<bool> {
        match c {
            ConstValue::Finite(0) | ConstValue::Inf => Ok(false),
            ConstValue::Finite(1) => Ok(true),
            ConstValue::Finite(v) => Err(Error::SemiringMismatch(format!("{v} is not a Boolean constant"))),
        }
    }
}

impl CircuitSemiring for CappedMinPlus {
    fn constant(&self, c: ConstValue) -> Result<Cost> {
        Ok(match c {
            ConstValue::Finite(v) => self.elem(v),
            ConstValue::Inf => Cost::INF,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gate {
    /// 1-based variable index.
    Var(usize),
    Const(ConstValue),
    Add(Vec<usize>),
    /// Left and right operand; order is kept for non-commutative use.
    Mul(usize, usize),
}

/// Gates are stored in topological order and refer to earlier gates by
/// position; the sink is the last gate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkewedCircuit {
    gates: Vec<Gate>,
    /// Identifier of every gate as written in the source.
    names: Vec<String>,
    n_vars: usize,
    d: usize,
    k: Option<usize>,
}

/// Explicit monomial list of a gate: `(variable set, coefficient)` pairs
/// with distinct sets and non-`0̄` coefficients, or `None` when the gate
/// has more than `d` monomials.
pub type MonomialList<E> = Option<Vec<(u64, E)>>;

impl SkewedCircuit {
    /// Builds a circuit from gates in topological order (operands must
    /// precede their users) with the given output gate. Gates that do not
    /// feed the output are dropped.
    pub fn new(n_vars: usize, d: usize, gates: Vec<Gate>, output: usize) -> Result<Self> {
        if n_vars > 64 {
            return Err(Error::InvalidCircuit(format!("{n_vars} variables, at most 64 supported")));
        }
        if output >= gates.len() {
            return Err(Error::InvalidCircuit(format!("output gate {output} does not exist")));
        }
        for (i, g) in gates.iter().enumerate() {
            let ops: Vec<usize> = match g {
                Gate::Var(v) => {
                    if *v == 0 || *v > n_vars {
                        return Err(Error::InvalidCircuit(format!("gate {i}: variable {v} outside [1, {n_vars}]")));
                    }
                    vec![]
                }
                Gate::Const(_) => vec![],
                Gate::Add(ops) if ops.is_empty() => {
                    return Err(Error::InvalidCircuit(format!("gate {i}: addition without operands")))
                }
                Gate::Add(ops) => ops.clone(),
                Gate::Mul(l, r) => vec![*l, *r],
            };
            if let Some(bad) = ops.iter().find(|&&o| o >= i) {
                return Err(Error::InvalidCircuit(format!("gate {i} refers to gate {bad}, not an earlier gate")));
            }
        }
        // keep only ancestors of the output
        let mut keep = vec![false; gates.len()];
        keep[output] = true;
        for i in (0..=output).rev() {
            if keep[i] {
                match &gates[i] {
                    Gate::Add(ops) => ops.iter().for_each(|&o| keep[o] = true),
                    Gate::Mul(l, r) => {
                        keep[*l] = true;
                        keep[*r] = true;
                    }
                    _ => {}
                }
            }
        }
        let mut remap = vec![usize::MAX; gates.len()];
        let mut kept = Vec::new();
        let mut names = Vec::new();
        for (i, g) in gates.into_iter().enumerate().take(output + 1) {
            if !keep[i] {
                continue;
            }
            remap[i] = kept.len();
            names.push(i.to_string());
            kept.push(match g {
                Gate::Add(ops) => Gate::Add(ops.into_iter().map(|o| remap[o]).collect()),
                Gate::Mul(l, r) => Gate::Mul(remap[l], remap[r]),
                other => other,
            });
        }
        Ok(SkewedCircuit { gates: kept, names, n_vars, d, k: None })
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }
    pub fn d(&self) -> usize {
        self.d
    }
    /// The `k` from the file header, if any.
    pub fn k(&self) -> Option<usize> {
        self.k
    }
    pub fn output(&self) -> usize {
        self.gates.len() - 1
    }
    pub fn gate_name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("p circuit {} {} {} {}\n", self.gates.len(), self.n_vars, self.d, self.k.unwrap_or(0));
        for (i, g) in self.gates.iter().enumerate() {
            let line = match g {
                Gate::Var(v) => format!("g {i} var {v}"),
                Gate::Const(c) => format!("g {i} const {c}"),
                Gate::Add(ops) => {
                    let ops: Vec<String> = ops.iter().map(|o| o.to_string()).collect();
                    format!("g {i} add {}", ops.join(" "))
                }
                Gate::Mul(l, r) => format!("g {i} mul {l} {r}"),
            };
            out.push_str(&line);
            out.push('\n');
        }
        out.push_str(&format!("output {}\n", self.output()));
        out
    }
}

pub fn parse_circuit(path: &Path) -> Result<SkewedCircuit> {
    parse_circuit_str(&fs::read_to_string(path)?)
}

/// Parses the `p circuit <ngates> <nvars> <d> <k>` format. Gate lines may
/// appear in any order; identifiers are arbitrary tokens.
pub fn parse_circuit_str(text: &str) -> Result<SkewedCircuit> {
    let mut header: Option<(usize, usize, usize, usize)> = None;
    let mut order: Vec<String> = Vec::new();
    let mut defs: HashMap<String, (usize, Vec<String>)> = HashMap::new();
    let mut output: Option<(usize, String)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<usize>().map_err(|_| Error::parse(line_no, format!("bad number `{s}`")));
        match fields[0] {
            "p" => {
                if header.is_some() {
                    return Err(Error::parse(line_no, "duplicate header"));
                }
                if fields.len() != 6 || fields[1] != "circuit" {
                    return Err(Error::parse(line_no, "expected `p circuit <ngates> <nvars> <d> <k>`"));
                }
                header = Some((num(fields[2])?, num(fields[3])?, num(fields[4])?, num(fields[5])?));
            }
            "g" => {
                if header.is_none() {
                    return Err(Error::parse(line_no, "gate before header"));
                }
                if fields.len() < 3 {
                    return Err(Error::parse(line_no, "expected `g <id> <kind> ...`"));
                }
                let id = fields[1].to_string();
                if defs.contains_key(&id) {
                    return Err(Error::parse(line_no, format!("gate `{id}` defined twice")));
                }
                order.push(id.clone());
                defs.insert(id, (line_no, fields[2..].iter().map(|s| s.to_string()).collect()));
            }
            "output" => {
                if fields.len() != 2 || output.is_some() {
                    return Err(Error::parse(line_no, "expected a single `output <id>`"));
                }
                output = Some((line_no, fields[1].to_string()));
            }
            other => return Err(Error::parse(line_no, format!("unknown line type `{other}`"))),
        }
    }
    let (ngates, n_vars, d, k) = header.ok_or_else(|| Error::parse(1, "missing `p circuit` header"))?;
    if order.len() != ngates {
        return Err(Error::parse(1, format!("header declares {ngates} gates, found {}", order.len())));
    }

    enum Raw {
        Var(usize),
        Const(ConstValue),
        Add(Vec<String>),
        Mul(String, String),
    }
    let mut raws: HashMap<&str, Raw> = HashMap::new();
    for id in &order {
        let (line_no, spec) = &defs[id];
        let line_no = *line_no;
        let args = &spec[1..];
        let raw = match spec[0].as_str() {
            "var" => {
                if args.len() != 1 {
                    return Err(Error::parse(line_no, "`var` takes one index"));
                }
                let v = args[0].parse::<usize>().map_err(|_| Error::parse(line_no, "bad variable index"))?;
                if v == 0 || v > n_vars {
                    return Err(Error::parse(line_no, format!("variable {v} outside [1, {n_vars}]")));
                }
                Raw::Var(v)
            }
            "const" => {
                if args.len() != 1 {
                    return Err(Error::parse(line_no, "`const` takes one value"));
                }
                Raw::Const(if args[0] == "INF" {
                    ConstValue::Inf
                } else {
                    match args[0].parse::<u64>() {
                        Ok(v) if v <= CappedMinPlus::MAX_CAP => ConstValue::Finite(v),
                        _ => return Err(Error::parse(line_no, format!("bad constant `{}`", args[0]))),
                    }
                })
            }
            "add" => {
                if args.is_empty() {
                    return Err(Error::parse(line_no, "`add` needs at least one operand"));
                }
                Raw::Add(args.to_vec())
            }
            "mul" => {
                if args.len() != 2 {
                    return Err(Error::parse(line_no, format!("`mul` needs exactly 2 operands, got {}", args.len())));
                }
                Raw::Mul(args[0].clone(), args[1].clone())
            }
            other => return Err(Error::parse(line_no, format!("unknown gate kind `{other}`"))),
        };
        let refs: Vec<&String> = match &raw {
            Raw::Add(ops) => ops.iter().collect(),
            Raw::Mul(l, r) => vec![l, r],
            _ => vec![],
        };
        if let Some(bad) = refs.iter().find(|r| !defs.contains_key(r.as_str())) {
            return Err(Error::parse(line_no, format!("unknown gate `{bad}`")));
        }
        raws.insert(id.as_str(), raw);
    }

    // Kahn's algorithm, taking ready gates in file order
    let pos: HashMap<&str, usize> = order.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let operands = |id: &str| -> Vec<usize> {
        match &raws[id] {
            Raw::Add(ops) => ops.iter().map(|o| pos[o.as_str()]).collect(),
            Raw::Mul(l, r) => vec![pos[l.as_str()], pos[r.as_str()]],
            _ => vec![],
        }
    };
    let mut users: Vec<Vec<usize>> = vec![Vec::new(); ngates];
    let mut pending: Vec<usize> = vec![0; ngates];
    for (i, id) in order.iter().enumerate() {
        let ops = operands(id);
        pending[i] = ops.len();
        for o in ops {
            users[o].push(i);
        }
    }
    let sinks: Vec<usize> = (0..ngates).filter(|&i| users[i].is_empty()).collect();
    let mut ready: std::collections::BTreeSet<usize> = (0..ngates).filter(|&i| pending[i] == 0).collect();
    let mut topo = Vec::with_capacity(ngates);
    while let Some(i) = ready.pop_first() {
        topo.push(i);
        for &u in &users[i] {
            pending[u] -= 1;
            if pending[u] == 0 {
                ready.insert(u);
            }
        }
    }
    if topo.len() != ngates {
        return Err(Error::InvalidCircuit("the gates contain a cycle".into()));
    }
    if sinks.len() != 1 {
        let names: Vec<&str> = sinks.iter().map(|&i| order[i].as_str()).collect();
        return Err(Error::InvalidCircuit(format!("multiple sinks: {}", names.join(", "))));
    }
    let sink = sinks[0];
    if let Some((line_no, id)) = output {
        match pos.get(id.as_str()) {
            None => return Err(Error::parse(line_no, format!("unknown gate `{id}`"))),
            Some(&p) if p != sink => {
                return Err(Error::InvalidCircuit(format!("output `{id}` is not the unique sink `{}`", order[sink])))
            }
            _ => {}
        }
    }
    // sink is last in topological order since every other gate reaches it
    let mut new_idx = vec![0; ngates];
    for (j, &i) in topo.iter().enumerate() {
        new_idx[i] = j;
    }
    let gates: Vec<Gate> = topo
        .iter()
        .map(|&i| match &raws[order[i].as_str()] {
            Raw::Var(v) => Gate::Var(*v),
            Raw::Const(c) => Gate::Const(*c),
            Raw::Add(_) => Gate::Add(operands(&order[i]).into_iter().map(|o| new_idx[o]).collect()),
            Raw::Mul(_, _) => {
                let ops = operands(&order[i]);
                Gate::Mul(new_idx[ops[0]], new_idx[ops[1]])
            }
        })
        .collect();
    let names = topo.iter().map(|&i| order[i].clone()).collect();
    let c = SkewedCircuit { gates, names, n_vars, d, k: None };
    Ok(if k > 0 { c.with_k(k) } else { c })
}

fn merge<S: Semiring>(sr: &S, terms: impl IntoIterator<Item = (u64, S::Elem)>) -> Vec<(u64, S::Elem)> {
    let mut acc: BTreeMap<u64, S::Elem> = BTreeMap::new();
    for (set, c) in terms {
        let slot = acc.entry(set).or_insert(sr.zero());
        *slot = sr.add(*slot, c);
    }
    acc.into_iter().filter(|(_, c)| !sr.is_zero(*c)).collect()
}

/// Bottom-up monomial lists; fails on the first multiplication with no
/// operand of at most `d` monomials.
pub fn compute_monomial_lists<S: CircuitSemiring>(c: &SkewedCircuit, sr: &S) -> Result<Vec<MonomialList<S::Elem>>> {
    monomial_lists(c.gates(), c.d(), sr, |i| c.gate_name(i).to_string())
}

pub(crate) fn monomial_lists<S: CircuitSemiring>(
    gates: &[Gate],
    d: usize,
    sr: &S,
    name: impl Fn(usize) -> String,
) -> Result<Vec<MonomialList<S::Elem>>> {
    let cap = |list: Vec<(u64, S::Elem)>| (list.len() <= d).then_some(list);
    let mut out: Vec<MonomialList<S::Elem>> = Vec::with_capacity(gates.len());
    for (i, g) in gates.iter().enumerate() {
        let q = match g {
            Gate::Var(v) => cap(vec![(1u64 << (v - 1), sr.one())]),
            Gate::Const(k) => cap(merge(sr, [(0u64, sr.constant(*k)?)])),
            Gate::Add(ops) => {
                if ops.iter().all(|&o| out[o].is_some()) {
                    cap(merge(sr, ops.iter().flat_map(|&o| out[o].clone().unwrap())))
                } else {
                    None
                }
            }
            Gate::Mul(l, r) => match (&out[*l], &out[*r]) {
                (None, None) => return Err(Error::Skewness { gate: name(i), d }),
                (Some(ql), Some(qr)) => {
                    let prods = ql.iter().flat_map(|&(a, x)| {
                        qr.iter().filter(move |&&(b, _)| a & b == 0).map(move |&(b, y)| (a | b, sr.mul(x, y)))
                    });
                    cap(merge(sr, prods))
                }
                _ => None,
            },
        };
        out.push(q);
    }
    Ok(out)
}

/// Largest coefficient any monomial can reach: variables cost 0,
/// additions take the max, multiplications add up.
pub fn automatic_cap(c: &SkewedCircuit) -> u64 {
    let mut bound: Vec<u64> = Vec::with_capacity(c.gates().len());
    for g in c.gates() {
        let b = match g {
            Gate::Var(_) | Gate::Const(ConstValue::Inf) => 0,
            Gate::Const(ConstValue::Finite(v)) => *v,
            Gate::Add(ops) => ops.iter().map(|&o| bound[o]).max().unwrap_or(0),
            Gate::Mul(l, r) => bound[*l].saturating_add(bound[*r]),
        };
        bound.push(b);
    }
    bound.last().copied().unwrap_or(0)
}

/// Sum of the coefficients of the multilinear monomials of degree exactly
/// `k` in the output polynomial, through representation vectors.
pub fn monomial_sum<S: CircuitSemiring>(
    c: &SkewedCircuit,
    k: usize,
    sr: &S,
    opts: &ContextOptions,
) -> Result<S::Elem> {
    if k > MAX_K {
        return Err(Error::Resource(format!("k={k} exceeds the supported maximum {MAX_K}")));
    }
    let q = compute_monomial_lists(c, sr)?;
    if k > c.n_vars() {
        return Ok(sr.zero());
    }
    let ctx = FactorizationContext::build(c.n_vars(), k.max(1), opts)?;
    evaluate(c, k, sr, &ctx, &q)
}

type Layer<S> = Vec<Option<Representation<S>>>;

fn evaluate<S: CircuitSemiring>(
    c: &SkewedCircuit,
    k: usize,
    sr: &S,
    ctx: &Arc<FactorizationContext>,
    q: &[MonomialList<S::Elem>],
) -> Result<S::Elem> {
    let gates = c.gates();
    let mut uses = vec![0usize; gates.len()];
    for g in gates {
        match g {
            Gate::Add(ops) => ops.iter().for_each(|&o| uses[o] += 1),
            Gate::Mul(l, r) => {
                uses[*l] += 1;
                uses[*r] += 1;
            }
            _ => {}
        }
    }
    let init = Representation::init(ctx, sr.clone());
    let vars = |set: u64| -> Vec<usize> { crate::oracle::elems(set) };
    let push = |acc: &mut Option<Representation<S>>, term: Representation<S>| -> Result<()> {
        match acc {
            None => *acc = Some(term),
            Some(a) => a.add_assign(&term)?,
        }
        Ok(())
    };
    let mut b: Vec<Option<Layer<S>>> = vec![None; gates.len()];
    for (g, gate) in gates.iter().enumerate() {
        let mut layer: Layer<S> = Vec::with_capacity(k + 1);
        for p in 0..=k {
            let mut acc: Option<Representation<S>> = None;
            if let Some(list) = &q[g] {
                for &(set, lambda) in list.iter().filter(|(set, _)| set.count_ones() as usize == p) {
                    push(&mut acc, init.convolve_set(&vars(set))?.scale_left(lambda))?;
                }
            } else {
                match gate {
                    Gate::Add(ops) => {
                        for &o in ops {
                            if let Some(x) = &b[o].as_ref().expect("operand evaluated")[p] {
                                push(&mut acc, x.clone())?;
                            }
                        }
                    }
                    Gate::Mul(l, r) => {
                        let (small_left, list, other) = match (&q[*l], &q[*r]) {
                            (Some(list), _) => (true, list, *r),
                            (None, Some(list)) => (false, list, *l),
                            (None, None) => unreachable!("skewness checked while building the lists"),
                        };
                        let other = b[other].as_ref().expect("operand evaluated");
                        for &(set, lambda) in list {
                            let z = set.count_ones() as usize;
                            if z > p {
                                continue;
                            }
                            if let Some(x) = &other[p - z] {
                                let moved = x.convolve_set(&vars(set))?;
                                let term = if small_left { moved.scale_left(lambda) } else { moved.scale_right(lambda) };
                                push(&mut acc, term)?;
                            }
                        }
                    }
                    Gate::Var(_) | Gate::Const(_) => unreachable!("variables and constants always have lists"),
                }
            }
            layer.push(acc.filter(|x| !x.is_zero()));
        }
        b[g] = Some(layer);
        let ops: Vec<usize> = match gate {
            Gate::Add(ops) => ops.clone(),
            Gate::Mul(l, r) => vec![*l, *r],
            _ => vec![],
        };
        for o in ops {
            uses[o] -= 1;
            if uses[o] == 0 {
                b[o] = None;
            }
        }
    }
    let out = b[c.output()].as_ref().expect("sink evaluated");
    match &out[k] {
        Some(x) => x.query(&[]),
        None => Ok(sr.zero()),
    }
}

/// Multilinear coefficient table of every gate, keeping only monomials of
/// degree at most `max_degree` when given.
pub fn expand_gates<S: CircuitSemiring>(
    c: &SkewedCircuit,
    sr: &S,
    max_degree: Option<usize>,
) -> Result<Vec<BTreeMap<u64, S::Elem>>> {
    let keep = |set: u64| max_degree.is_none_or(|m| set.count_ones() as usize <= m);
    let mut tables: Vec<BTreeMap<u64, S::Elem>> = Vec::with_capacity(c.gates().len());
    for g in c.gates() {
        let terms: Vec<(u64, S::Elem)> = match g {
            Gate::Var(v) => vec![(1u64 << (v - 1), sr.one())],
            Gate::Const(k) => vec![(0, sr.constant(*k)?)],
            Gate::Add(ops) => ops.iter().flat_map(|&o| tables[o].iter().map(|(&s, &x)| (s, x))).collect(),
            Gate::Mul(l, r) => {
                let mut prods = Vec::new();
                for (&a, &x) in &tables[*l] {
                    for (&b, &y) in &tables[*r] {
                        if a & b == 0 && keep(a | b) {
                            prods.push((a | b, sr.mul(x, y)));
                        }
                    }
                }
                prods
            }
        };
        tables.push(merge(sr, terms.into_iter().filter(|&(s, _)| keep(s))).into_iter().collect());
    }
    Ok(tables)
}

pub const BRUTE_FORCE_MAX_VARS: usize = 16;

/// The same sum by full expansion of every gate.
pub fn brute_force_expand<S: CircuitSemiring>(c: &SkewedCircuit, k: usize, sr: &S) -> Result<S::Elem> {
    if c.n_vars() > BRUTE_FORCE_MAX_VARS {
        return Err(Error::Resource(format!("expansion limited to {BRUTE_FORCE_MAX_VARS} variables")));
    }
    let tables = expand_gates(c, sr, Some(k))?;
    let sink = &tables[c.output()];
    Ok(sr.sum(sink.iter().filter(|(s, _)| s.count_ones() as usize == k).map(|(_, &x)| x)))
}
