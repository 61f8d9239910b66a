//! Splitters and universal set families.
//!
//! An `(n, k, ell)`-splitter is a list of maps `[n] -> [ell]` such that every
//! `k`-subset of `[n]` is split (spread as evenly as possible over the
//! blocks) by at least one map. A `(u, s)`-universal family is a list of
//! subsets of `[u]` whose traces on every set `X` of at most `s` elements
//! realise all `2^|X|` subsets of `X`.
//!
//! Families are built by greedy covering over a deterministic candidate
//! stream (SplitMix64 seeded with [`FAMILY_SEED`]), tracking the still
//! uncovered `k`-sets or demands exactly, and can be checked exhaustively
//! with [`verify_splitter`] / [`verify_universal`] while the enumeration
//! fits a budget.
//!
//! Internally maps and sets are 0-based; the text format writes blocks
//! 1-based.

use std::fmt::Write as _;
use std::fs;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{Error, Result};
use crate::subsets::{binomial, binomial_sum, bit_subsets_up_to, for_each_combination, Bits};

pub const FAMILY_SEED: u64 = 0x5EED;
pub const DEFAULT_VERIFY_BUDGET: u128 = 10_000_000;
pub const DEFAULT_CONSTRUCTION_BUDGET: u128 = 100_000_000;

/// Most `k`-sets the greedy keeps in memory; larger universes are first
/// thinned by taking candidates from the stream unconditionally.
const MATERIALIZE_CAP: usize = 1 << 22;
const MAX_CANDIDATES: usize = 100_000;

/// Result of an exhaustive check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The enumeration needs `required` steps, more than the budget allows.
    Unverifiable { required: u128, budget: u128 },
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Unverifiable { .. } => "SKIP",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitterFamily {
    n: usize,
    k: usize,
    ell: usize,
    functions: Vec<Vec<u16>>,
}

impl SplitterFamily {
    pub fn new(n: usize, k: usize, ell: usize, functions: Vec<Vec<u16>>) -> Result<Self> {
        if ell == 0 || ell > u16::MAX as usize {
            return Err(Error::Usage(format!("range size {ell} out of bounds")));
        }
        for (i, f) in functions.iter().enumerate() {
            if f.len() != n {
                return Err(Error::Usage(format!("function {i} has {} entries, expected {n}", f.len())));
            }
            if let Some(&bad) = f.iter().find(|&&b| b as usize >= ell) {
                return Err(Error::Usage(format!("function {i} maps into block {bad} >= {ell}")));
            }
        }
        Ok(SplitterFamily { n, k, ell, functions })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn ell(&self) -> usize {
        self.ell
    }
    pub fn len(&self) -> usize {
        self.functions.len()
    }
    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
    pub fn functions(&self) -> &[Vec<u16>] {
        &self.functions
    }
    pub fn function(&self, idx: usize) -> &[u16] {
        &self.functions[idx]
    }

    /// The same family without its last function.
    pub fn without_last(&self) -> Self {
        let mut f = self.clone();
        f.functions.pop();
        f
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("splitter {} {} {} {}\n", self.n, self.k, self.ell, self.functions.len());
        for f in &self.functions {
            let mut first = true;
            for &b in f {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{}", b as usize + 1);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or_else(|| Error::parse(1, "empty splitter file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != "splitter" {
            return Err(Error::parse(hl + 1, "expected `splitter <n> <k> <ell> <count>`"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| Error::parse(hl + 1, format!("bad number `{s}`")));
        let (n, k, ell, count) = (num(fields[1])?, num(fields[2])?, num(fields[3])?, num(fields[4])?);
        let mut functions = Vec::with_capacity(count);
        for (ln, line) in lines {
            let f = line
                .split_whitespace()
                .map(|t| match t.parse::<usize>() {
                    Ok(b) if (1..=ell).contains(&b) => Ok((b - 1) as u16),
                    _ => Err(Error::parse(ln + 1, format!("bad block index `{t}`"))),
                })
                .collect::<Result<Vec<u16>>>()?;
            if f.len() != n {
                return Err(Error::parse(ln + 1, format!("expected {n} block indices, found {}", f.len())));
            }
            functions.push(f);
        }
        if functions.len() != count {
            return Err(Error::parse(hl + 1, format!("header promises {count} functions, found {}", functions.len())));
        }
        SplitterFamily::new(n, k, ell, functions)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniversalFamily {
    u: usize,
    s: usize,
    sets: Vec<Bits>,
}

impl UniversalFamily {
    pub fn new(u: usize, s: usize, sets: Vec<Bits>) -> Result<Self> {
        if u > 128 {
            return Err(Error::Usage(format!("universe {u} exceeds 128")));
        }
        let mask = if u == 128 { Bits::MAX } else { (1u128 << u) - 1 };
        if sets.iter().any(|&x| x & !mask != 0) {
            return Err(Error::Usage(format!("set outside universe [{u}]")));
        }
        Ok(UniversalFamily { u, s, sets })
    }

    pub fn u(&self) -> usize {
        self.u
    }
    pub fn s(&self) -> usize {
        self.s
    }
    pub fn len(&self) -> usize {
        self.sets.len()
    }
    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
    pub fn sets(&self) -> &[Bits] {
        &self.sets
    }

    pub fn without_last(&self) -> Self {
        let mut f = self.clone();
        f.sets.pop();
        f
    }

    /// The family with every set containing `x` removed.
    pub fn without_element(&self, x: usize) -> Self {
        let mut f = self.clone();
        f.sets.retain(|&set| set & (1u128 << x) == 0);
        f
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("universal {} {} {}\n", self.u, self.s, self.sets.len());
        for set in &self.sets {
            let _ = writeln!(out, "{set:x}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or_else(|| Error::parse(1, "empty universal file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "universal" {
            return Err(Error::parse(hl + 1, "expected `universal <u> <s> <count>`"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| Error::parse(hl + 1, format!("bad number `{s}`")));
        let (u, s, count) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
        let sets = lines
            .map(|(ln, l)| {
                Bits::from_str_radix(l.trim(), 16).map_err(|_| Error::parse(ln + 1, format!("bad hex set `{l}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if sets.len() != count {
            return Err(Error::parse(hl + 1, format!("header promises {count} sets, found {}", sets.len())));
        }
        UniversalFamily::new(u, s, sets)
    }
}

/// Literal splitting test: block `i` (in order) receives `ceil(k/ell)`
/// elements of `set` for `i < j` and `floor(k/ell)` for `i >= j`, for some
/// `j`.
pub fn splits(h: &[u16], ell: usize, set: &[usize]) -> bool {
    let counts = block_counts(h, ell, set);
    let k = set.len();
    let (hi, lo) = (k.div_ceil(ell), k / ell);
    let prefix = counts.iter().take_while(|&&c| c == hi).count();
    counts[prefix..].iter().all(|&c| c == lo)
}

/// Splitting up to a relabelling of the blocks: the multiset of block
/// counts is the balanced one. For `ell >= k` this is injectivity on `set`;
/// for `k = ell^2` it is an exact `ell`-by-`ell` balance. This is the
/// property the factorization relies on, and what families are built and
/// verified against.
pub fn splits_unordered(h: &[u16], ell: usize, set: &[usize]) -> bool {
    let k = set.len();
    if ell >= k && ell <= 128 {
        let mut seen: u128 = 0;
        for &x in set {
            let bit = 1u128 << h[x];
            if seen & bit != 0 {
                return false;
            }
            seen |= bit;
        }
        return true;
    }
    let counts = block_counts(h, ell, set);
    let (hi, lo) = (k.div_ceil(ell), k / ell);
    let mut n_hi = 0;
    for &c in &counts {
        if c == hi {
            n_hi += 1;
        } else if c != lo {
            return false;
        }
    }
    hi == lo || n_hi == k - ell * lo
}

fn block_counts(h: &[u16], ell: usize, set: &[usize]) -> Vec<usize> {
    let mut counts = vec![0usize; ell];
    for &x in set {
        counts[h[x] as usize] += 1;
    }
    counts
}

/// Checks that every `k`-subset of `[n]` is split (up to block relabelling)
/// by some member.
pub fn verify_splitter(f: &SplitterFamily, budget: u128) -> Verdict {
    let required = binomial(f.n, f.k).saturating_mul(f.len().max(1) as u128);
    if required > budget {
        return Verdict::Unverifiable { required, budget };
    }
    let res = for_each_combination(f.n, f.k, |set| {
        if f.functions.iter().any(|h| splits_unordered(h, f.ell, set)) {
            ControlFlow::Continue(())
        } else {
            ControlFlow::Break(())
        }
    });
    Verdict::from_bool(res.is_continue())
}

/// Checks that the traces on every `X` with `|X| <= s` are all of `2^X`.
pub fn verify_universal(f: &UniversalFamily, budget: u128) -> Verdict {
    let s = f.s.min(f.u);
    let required = binomial_sum(f.u, s).saturating_mul(1u128 << s).saturating_mul(f.len().max(1) as u128);
    if required > budget {
        return Verdict::Unverifiable { required, budget };
    }
    for x in bit_subsets_up_to(f.u, s) {
        let width = x.count_ones();
        let mut hit = vec![false; 1 << width];
        for &set in &f.sets {
            hit[compress(set & x, x)] = true;
        }
        if hit.iter().any(|&b| !b) {
            return Verdict::Fail;
        }
    }
    Verdict::Pass
}

/// Packs the bits of `value` selected by `mask` into the low bits.
fn compress(value: Bits, mut mask: Bits) -> usize {
    let mut out = 0usize;
    let mut pos = 0;
    while mask != 0 {
        let bit = mask & mask.wrapping_neg();
        if value & bit != 0 {
            out |= 1 << pos;
        }
        pos += 1;
        mask &= mask - 1;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    /// Largest number of sets (or demands) tracked exactly during greedy.
    pub construction_budget: u128,
    pub seed: u64,
    /// Candidates scored per greedy round.
    pub batch: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { construction_budget: DEFAULT_CONSTRUCTION_BUDGET, seed: FAMILY_SEED, batch: 16 }
    }
}

fn stream(opts: &BuildOptions, tag: u64, a: usize, b: usize) -> SplitMix64 {
    let mix = opts.seed ^ tag.rotate_left(48) ^ ((a as u64) << 20) ^ (b as u64);
    SplitMix64::seed_from_u64(mix)
}

/// Greedy `(n, k, ell)`-splitter: each round scores a batch of candidates
/// against the uncovered `k`-sets and keeps the best.
fn greedy_splitter(
    n: usize,
    k: usize,
    ell: usize,
    opts: &BuildOptions,
    rng: &mut SplitMix64,
    mut candidate: impl FnMut(&mut SplitMix64) -> Vec<u16>,
) -> Result<Vec<Vec<u16>>> {
    let total = binomial(n, k);
    if total > opts.construction_budget || n > u16::MAX as usize {
        return Err(Error::Resource(format!(
            "splitter ({n}, {k}, {ell}) needs {total} tracked sets, budget is {}",
            opts.construction_budget
        )));
    }
    let mut family: Vec<Vec<u16>> = Vec::new();
    let mut uncovered = loop {
        if let Some(list) = collect_uncovered(n, k, ell, &family) {
            break list;
        }
        family.push(candidate(rng));
    };
    let mut tried = family.len();
    let batch = opts.batch.max(1);
    while !uncovered.is_empty() {
        if tried >= MAX_CANDIDATES {
            return Err(Error::Construction(format!(
                "splitter ({n}, {k}, {ell}) still has {} uncovered sets after {tried} candidates",
                uncovered.len() / k
            )));
        }
        let candidates: Vec<Vec<u16>> = (0..batch).map(|_| candidate(rng)).collect();
        tried += batch;
        let scores: Vec<usize> = candidates
            .iter()
            .map(|h| uncovered.chunks_exact(k).filter(|set| splits_unordered(h, ell, &to_usize(set)[..k])).count())
            .collect();
        let best = (0..batch).fold(0, |b, i| if scores[i] > scores[b] { i } else { b });
        if scores[best] == 0 {
            continue;
        }
        let h = &candidates[best];
        let mut rest = Vec::with_capacity(uncovered.len() - scores[best] * k);
        for set in uncovered.chunks_exact(k) {
            if !splits_unordered(h, ell, &to_usize(set)[..k]) {
                rest.extend_from_slice(set);
            }
        }
        uncovered = rest;
        family.push(candidates[best].clone());
    }
    Ok(family)
}

fn to_usize(set: &[u16]) -> [usize; 16] {
    let mut out = [0usize; 16];
    for (o, &x) in out.iter_mut().zip(set) {
        *o = x as usize;
    }
    out
}

/// `k`-sets of `[n]` not split by any member, flattened; `None` when there
/// are more than [`MATERIALIZE_CAP`].
fn collect_uncovered(n: usize, k: usize, ell: usize, family: &[Vec<u16>]) -> Option<Vec<u16>> {
    let mut out: Vec<u16> = Vec::new();
    let mut count = 0usize;
    let res = for_each_combination(n, k, |set| {
        if family.iter().any(|h| splits_unordered(h, ell, set)) {
            return ControlFlow::Continue(());
        }
        count += 1;
        if count > MATERIALIZE_CAP {
            return ControlFlow::Break(());
        }
        out.extend(set.iter().map(|&x| x as u16));
        ControlFlow::Continue(())
    });
    res.is_continue().then_some(out)
}

/// An `(n, k, k^2)`-splitter: for every `k`-set some member is injective on it.
pub fn build_outer_splitter(n: usize, k: usize, opts: &BuildOptions) -> Result<SplitterFamily> {
    if k == 0 || k > n {
        return Err(Error::Usage(format!("outer splitter needs 1 <= k <= n, got n={n} k={k}")));
    }
    if k > 16 {
        return Err(Error::Resource(format!("k={k} is too large")));
    }
    let ell = k * k;
    if n <= ell {
        let identity = (0..n as u16).collect();
        return SplitterFamily::new(n, k, ell, vec![identity]);
    }
    if binomial(n, k) <= opts.construction_budget {
        let mut rng = stream(opts, 1, n, k);
        let functions =
            greedy_splitter(n, k, ell, opts, &mut rng, |rng| (0..n).map(|_| rng.gen_range(0..ell) as u16).collect())?;
        return SplitterFamily::new(n, k, ell, functions);
    }
    build_outer_by_reduction(n, k, opts)
}

/// Outer splitter for universes too large to track: reduce modulo a list of
/// primes, then apply a greedy splitter on the largest prime's residues.
///
/// A difference `0 < |x - y| < n` has at most `floor(log_P(n - 1))` prime
/// factors `>= P`, so among `C(k, 2) * floor(log_P(n - 1)) + 1` primes
/// `>= P` at least one keeps a given `k`-set injective.
fn build_outer_by_reduction(n: usize, k: usize, opts: &BuildOptions) -> Result<SplitterFamily> {
    let ell = k * k;
    let floor_p = k.max((n as f64).sqrt().ceil() as usize + 1);
    let mut per_diff = 0usize;
    let mut pow = 1u128;
    while pow * floor_p as u128 <= (n - 1) as u128 {
        pow *= floor_p as u128;
        per_diff += 1;
    }
    let needed = k * (k - 1) / 2 * per_diff.max(1) + 1;
    let primes: Vec<usize> = (floor_p..).filter(|&p| is_prime(p)).take(needed).collect();
    let p_max = *primes.last().expect("at least one prime");
    let base = build_outer_splitter(p_max, k, opts)?;
    let mut functions = Vec::with_capacity(primes.len() * base.len());
    for &p in &primes {
        for g in base.functions() {
            functions.push((0..n).map(|x| g[x % p]).collect());
        }
    }
    SplitterFamily::new(n, k, ell, functions)
}

fn is_prime(p: usize) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// A `(u, k, s)`-splitter with `k = s^2`: every `k`-subset of `[u]` gets
/// exactly `s` elements in each of the `s` blocks under some member.
pub fn build_inner_splitter(u: usize, k: usize, s: usize, opts: &BuildOptions) -> Result<SplitterFamily> {
    if s == 0 || s * s != k || u < k {
        return Err(Error::Usage(format!("inner splitter needs k = s^2 <= u, got u={u} k={k} s={s}")));
    }
    let balanced = |rng: &mut SplitMix64| -> Vec<u16> {
        let mut perm: Vec<usize> = (0..u).collect();
        for i in (1..u).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let mut h = vec![0u16; u];
        for (pos, &x) in perm.iter().enumerate() {
            h[x] = (pos * s / u) as u16;
        }
        h
    };
    let mut rng = stream(opts, 2, u, k);
    if u == k {
        // one k-set only; any balanced map splits it
        return SplitterFamily::new(u, k, s, vec![balanced(&mut rng)]);
    }
    let functions = greedy_splitter(u, k, s, opts, &mut rng, balanced)?;
    SplitterFamily::new(u, k, s, functions)
}

/// Greedy set cover over the demands `(X, Y)` with `|X| = min(s, u)` and
/// `Y ⊆ X`; a set `F` covers `(X, Y)` when `F ∩ X = Y`.
pub fn build_universal_family(u: usize, s: usize, opts: &BuildOptions) -> Result<UniversalFamily> {
    if s == 0 || s > u || u > 128 {
        return Err(Error::Usage(format!("universal family needs 1 <= s <= u <= 128, got u={u} s={s}")));
    }
    let width = s.min(u);
    let demands = binomial(u, width).saturating_mul(1u128 << width);
    if demands > opts.construction_budget {
        return Err(Error::Resource(format!(
            "universal family ({u}, {s}) has {demands} demands, budget is {}",
            opts.construction_budget
        )));
    }
    let mut uncovered: Vec<(Bits, Bits)> = Vec::new();
    let _ = for_each_combination(u, width, |xs| {
        let x = crate::subsets::to_bits(xs);
        uncovered.extend(crate::subsets::submasks(x).map(|y| (x, y)));
        ControlFlow::<()>::Continue(())
    });
    let mut rng = stream(opts, 3, u, s);
    let full = if u == 128 { Bits::MAX } else { (1u128 << u) - 1 };
    let mut sets = Vec::new();
    let mut tried = 0usize;
    while !uncovered.is_empty() {
        let candidates: Vec<Bits> = if u <= 10 {
            (0..1u128 << u).collect()
        } else {
            (0..256).map(|_| rng.gen::<u128>() & full).collect()
        };
        tried += candidates.len();
        if tried > MAX_CANDIDATES * 16 {
            return Err(Error::Construction(format!("universal family ({u}, {s}) did not converge")));
        }
        let score = |f: Bits| uncovered.iter().filter(|&&(x, y)| f & x == y).count();
        let (best, best_score) = candidates
            .iter()
            .map(|&f| (f, score(f)))
            .fold((0, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best_score == 0 {
            continue;
        }
        uncovered.retain(|&(x, y)| best & x != y);
        sets.push(best);
    }
    UniversalFamily::new(u, s, sets)
}

/// On-disk cache of built families, one text file per family.
#[derive(Clone, Debug)]
pub struct FamilyCache {
    dir: PathBuf,
}

impl FamilyCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FamilyCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn load_or<T>(
        &self,
        name: &str,
        parse: impl Fn(&str) -> Result<T>,
        render: impl Fn(&T) -> String,
        build: impl FnOnce() -> Result<T>,
    ) -> Result<T> {
        let path = self.dir.join(name);
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(v) = parse(&text) {
                return Ok(v);
            }
        }
        let v = build()?;
        // the cache is best effort; failing to write it is not an error
        if fs::create_dir_all(&self.dir).is_ok() {
            let tmp = self.dir.join(format!("{name}.tmp{}", std::process::id()));
            if fs::write(&tmp, render(&v)).is_ok() {
                let _ = fs::rename(&tmp, &path);
            }
        }
        Ok(v)
    }

    pub fn outer(&self, n: usize, k: usize, opts: &BuildOptions) -> Result<SplitterFamily> {
        let name = format!("outer-n{n}-k{k}-seed{:x}.txt", opts.seed);
        self.load_or(
            &name,
            |t| SplitterFamily::from_text(t).and_then(|f| check_params(f, n, k, k * k)),
            SplitterFamily::to_text,
            || build_outer_splitter(n, k, opts),
        )
    }

    pub fn inner(&self, u: usize, k: usize, s: usize, opts: &BuildOptions) -> Result<SplitterFamily> {
        let name = format!("inner-u{u}-k{k}-s{s}-seed{:x}.txt", opts.seed);
        self.load_or(
            &name,
            |t| SplitterFamily::from_text(t).and_then(|f| check_params(f, u, k, s)),
            SplitterFamily::to_text,
            || build_inner_splitter(u, k, s, opts),
        )
    }

    pub fn universal(&self, u: usize, s: usize, opts: &BuildOptions) -> Result<UniversalFamily> {
        let name = format!("universal-u{u}-s{s}-seed{:x}.txt", opts.seed);
        self.load_or(
            &name,
            |t| {
                UniversalFamily::from_text(t).and_then(|f| {
                    if f.u == u && f.s == s {
                        Ok(f)
                    } else {
                        Err(Error::Usage("cached family has other parameters".into()))
                    }
                })
            },
            UniversalFamily::to_text,
            || build_universal_family(u, s, opts),
        )
    }
}

fn check_params(f: SplitterFamily, n: usize, k: usize, ell: usize) -> Result<SplitterFamily> {
    if f.n == n && f.k == k && f.ell == ell {
        Ok(f)
    } else {
        Err(Error::Usage("cached family has other parameters".into()))
    }
}
