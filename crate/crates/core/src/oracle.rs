//! Brute-force reference implementations of the matrices behind the data
//! structure, for checking the fast paths on small universes.
//!
//! Sets of `[n]` are `u64` bitmasks here (element `x` is bit `x - 1`), so
//! everything in this module assumes `n <= 64`; the checks themselves are
//! exponential and meant for `n` around 16 or less.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::factorization::{ColumnIndex, FactorizationContext};
use crate::pseudorandom::Verdict;
use crate::repset::Representation;
use crate::semiring::Semiring;
use crate::subsets::{binomial_sum, for_each_combination};

/// Sparse table over subsets of `[n]`; missing keys are `0̄`.
pub type DenseTable<E> = BTreeMap<u64, E>;

/// Seeded defects that the checks must notice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Defect {
    /// Flip one entry of the disjointness matrix.
    PerturbD,
    /// Remove one set from the universal family.
    DropUniversalSet,
    /// Evaluate `L` without the phantom padding elements.
    SkipPadding,
    /// Evaluate `L` and `R` without the injectivity guard on `π`.
    SkipInjectivity,
    /// Insert `π(e)` into the wrong block in the lifted convolution matrix.
    WrongBlock,
}

impl Defect {
    pub const ALL: [Defect; 5] =
        [Defect::PerturbD, Defect::DropUniversalSet, Defect::SkipPadding, Defect::SkipInjectivity, Defect::WrongBlock];

    pub fn name(self) -> &'static str {
        match self {
            Defect::PerturbD => "perturb-d",
            Defect::DropUniversalSet => "drop-universal-set",
            Defect::SkipPadding => "skip-padding",
            Defect::SkipInjectivity => "skip-injectivity",
            Defect::WrongBlock => "wrong-block",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|d| d.name() == name)
            .ok_or_else(|| Error::Usage(format!("unknown defect `{name}`")))
    }
}

pub fn mask(elems: &[usize]) -> u64 {
    elems.iter().fold(0, |acc, &x| acc | (1u64 << (x - 1)))
}

/// 1-based elements of a mask.
pub fn elems(mut m: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(m.count_ones() as usize);
    while m != 0 {
        out.push(m.trailing_zeros() as usize + 1);
        m &= m - 1;
    }
    out
}

/// Every subset of `[n]` with at most `k` elements.
pub fn sets_up_to(n: usize, k: usize) -> Vec<u64> {
    assert!(n <= 64);
    let mut out = Vec::new();
    for size in 0..=k.min(n) {
        let _ = for_each_combination(n, size, |c| {
            out.push(c.iter().fold(0u64, |acc, &x| acc | (1 << x)));
            ControlFlow::<()>::Continue(())
        });
    }
    out
}

/// `D_{n,k}[A, B] = [A ∩ B = ∅ and |A ∪ B| <= k]`.
pub fn d_entry(a: u64, b: u64, k: usize) -> bool {
    a & b == 0 && (a | b).count_ones() as usize <= k
}

/// `C_{n,e}[A, B] = [e ∉ A and A ∪ {e} = B]`, `e` 1-based.
pub fn c_entry(a: u64, b: u64, e: usize) -> bool {
    let bit = 1u64 << (e - 1);
    a & bit == 0 && a | bit == b
}

/// The table with `∅ ↦ 1̄`.
pub fn init_table<S: Semiring>(sr: &S) -> DenseTable<S::Elem> {
    DenseTable::from([(0, sr.one())])
}

/// `a · D_{n,k}`, over every `B` with `|B| <= k`. `0̄` entries are dropped.
pub fn dense_mul_d<S: Semiring>(sr: &S, a: &DenseTable<S::Elem>, n: usize, k: usize) -> DenseTable<S::Elem> {
    let mut out = DenseTable::new();
    for b in sets_up_to(n, k) {
        let v = sr.sum(a.iter().filter(|(&set, _)| d_entry(set, b, k)).map(|(_, &x)| x));
        if !sr.is_zero(v) {
            out.insert(b, v);
        }
    }
    out
}

/// `a · C_{n,e}`.
pub fn dense_mul_c<S: Semiring>(sr: &S, a: &DenseTable<S::Elem>, e: usize) -> DenseTable<S::Elem> {
    let bit = 1u64 << (e - 1);
    let mut out: DenseTable<S::Elem> = DenseTable::new();
    for (&set, &x) in a {
        if set & bit == 0 && !sr.is_zero(x) {
            let slot = out.entry(set | bit).or_insert(sr.zero());
            *slot = sr.add(*slot, x);
        }
    }
    out
}

/// Pointwise `a + a2`.
pub fn dense_add<S: Semiring>(sr: &S, a: &DenseTable<S::Elem>, a2: &DenseTable<S::Elem>) -> DenseTable<S::Elem> {
    let mut out = a.clone();
    for (&set, &x) in a2 {
        let slot = out.entry(set).or_insert(sr.zero());
        *slot = sr.add(*slot, x);
    }
    out.retain(|_, x| !sr.is_zero(*x));
    out
}

/// `λ · a`.
pub fn dense_scale<S: Semiring>(sr: &S, lambda: S::Elem, a: &DenseTable<S::Elem>) -> DenseTable<S::Elem> {
    a.iter().map(|(&set, &x)| (set, sr.mul(lambda, x))).filter(|(_, x)| !sr.is_zero(*x)).collect()
}

/// `C_{n,e} · D_{n,k} = D_{n,k} · C_{n,e}^T`, compared entrywise over all
/// `|A|, |B| <= k` by expanding both products over the sparse rows of `C`.
pub fn check_commutation(n: usize, k: usize, e: usize, defect: Option<Defect>) -> bool {
    let bit = 1u64 << (e - 1);
    // the perturbed entry is D[{e}, {x}] for the first x != e
    let x = if e == 1 { 2 } else { 1 };
    let d = |a: u64, b: u64| {
        let v = d_entry(a, b, k);
        if defect == Some(Defect::PerturbD) && a == bit && b == 1 << (x - 1) {
            !v
        } else {
            v
        }
    };
    let sets = sets_up_to(n, k);
    // the only nonzero of row A of C is column A ∪ {e}, of column B of C^T is row B ∪ {e}
    let c_row = |a: u64| (a & bit == 0).then_some(a | bit);
    for &a in &sets {
        for &b in &sets {
            let left = c_row(a).is_some_and(|m| c_entry(a, m, e) && d(m, b));
            let right = c_row(b).is_some_and(|m| c_entry(b, m, e) && d(a, m));
            if left != right {
                return false;
            }
        }
    }
    true
}

/// Which guards the oracle's own evaluation of `L` and `R` applies.
#[derive(Clone, Copy, Debug)]
struct Guards {
    padding: bool,
    injectivity: bool,
}

impl Guards {
    fn from(defect: Option<Defect>) -> Self {
        Guards {
            padding: defect != Some(Defect::SkipPadding),
            injectivity: defect != Some(Defect::SkipInjectivity),
        }
    }
}

/// Per-block images of `elems` (0-based) under hash `(oi, si)`.
fn blocks(ctx: &FactorizationContext, oi: usize, si: usize, elems: &[usize], injectivity: bool) -> Option<Vec<u128>> {
    let pi = ctx.outer().function(oi);
    let sigma = ctx.inner().function(si);
    let mut seen = 0u128;
    let mut out = vec![0u128; ctx.s()];
    for &x in elems {
        let v = pi[x] as usize;
        let bit = 1u128 << v;
        if injectivity && seen & bit != 0 {
            return None;
        }
        seen |= bit;
        out[sigma[v] as usize] |= bit;
    }
    Some(out)
}

/// For one row set and every hash pair: per block, the bitset of block
/// codes `(F, p)` with a `1̄` factor. `None` where the row vanishes.
type BlockSupport = Vec<Option<Vec<Vec<u64>>>>;

fn code_bitset(ell: usize, pred: impl Fn(usize) -> bool) -> Vec<u64> {
    let mut out = vec![0u64; ell.div_ceil(64)];
    for c in (0..ell).filter(|&c| pred(c)) {
        out[c / 64] |= 1 << (c % 64);
    }
    out
}

fn support(ctx: &FactorizationContext, set: u64, left: bool, guards: Guards) -> BlockSupport {
    let n_hash = ctx.outer().len() * ctx.inner().len();
    let mut items: Vec<usize> = elems(set).iter().map(|x| x - 1).collect();
    if set.count_ones() as usize > ctx.k_user() {
        return vec![None; n_hash];
    }
    if left && guards.padding {
        items.extend(ctx.n()..ctx.n_pad());
    }
    let (s, ell, fam) = (ctx.s(), ctx.ell(), ctx.family().sets());
    (0..n_hash)
        .map(|hash| {
            let (oi, si) = (hash / ctx.inner().len(), hash % ctx.inner().len());
            let m = blocks(ctx, oi, si, &items, guards.injectivity)?;
            Some(
                m.iter()
                    .map(|&mi| {
                        let size = mi.count_ones() as usize;
                        code_bitset(ell, |c| {
                            let (f, p) = (fam[c / (s + 1)], c % (s + 1));
                            if left {
                                mi & !f == 0 && size <= p
                            } else {
                                f & mi == 0 && size + p <= s
                            }
                        })
                    })
                    .collect(),
            )
        })
        .collect()
}

/// `(L·R)[A, B]` from block supports: the column space is a full product
/// over blocks, so the sum of products factors blockwise.
fn lr_entry(la: &BlockSupport, rb: &BlockSupport) -> bool {
    la.iter().zip(rb).any(|(l, r)| match (l, r) {
        (Some(l), Some(r)) => l.iter().zip(r).all(|(lb, rb)| lb.iter().zip(rb).any(|(x, y)| x & y != 0)),
        _ => false,
    })
}

fn factorization_required(ctx: &FactorizationContext) -> u128 {
    let sets = binomial_sum(ctx.n(), ctx.k_user());
    let per_pair = (ctx.h() * ctx.s() * ctx.ell().div_ceil(64)) as u128;
    sets.saturating_mul(sets).saturating_mul(per_pair)
}

/// `Σ_col L[A,col]·R[col,B] = D_{n,k}[A,B]` for every `|A|, |B| <= k`.
pub fn check_factorization(ctx: &FactorizationContext, budget: u128, defect: Option<Defect>) -> Verdict {
    let required = factorization_required(ctx);
    if required > budget || ctx.n() > 64 {
        return Verdict::Unverifiable { required, budget };
    }
    let guards = Guards::from(defect);
    let sets = sets_up_to(ctx.n(), ctx.k_user());
    let left: Vec<BlockSupport> = sets.iter().map(|&a| support(ctx, a, true, guards)).collect();
    let right: Vec<BlockSupport> = sets.iter().map(|&b| support(ctx, b, false, guards)).collect();
    for (i, &a) in sets.iter().enumerate() {
        for (j, &b) in sets.iter().enumerate() {
            if lr_entry(&left[i], &right[j]) != d_entry(a, b, ctx.k_user()) {
                return Verdict::Fail;
            }
        }
    }
    Verdict::Pass
}

/// The factorization check on `ctx` with one universal set removed, for
/// each set in turn; passes (the defect is caught) when some removal
/// breaks the identity.
pub fn check_drop_universal_set(ctx: &FactorizationContext, budget: u128) -> Verdict {
    let fam = ctx.family();
    if factorization_required(ctx).saturating_mul(fam.len() as u128) > budget {
        return Verdict::Unverifiable { required: factorization_required(ctx), budget };
    }
    for j in (0..fam.len()).rev() {
        let mut sets = fam.sets().to_vec();
        sets.remove(j);
        let fewer = crate::pseudorandom::UniversalFamily::new(fam.u(), fam.s(), sets).expect("subset of a valid family");
        let mutated = FactorizationContext::from_families(
            ctx.n(),
            ctx.k_user(),
            ctx.outer().clone(),
            ctx.inner().clone(),
            fewer,
            usize::MAX,
        )
        .expect("same parameters");
        if check_factorization(&mutated, budget, None) == Verdict::Fail {
            return Verdict::Pass;
        }
    }
    Verdict::Fail
}

/// Column of the uncontracted `H` for row set `elems` (0-based, over the
/// padded universe) under hash `hash`: the per-block images, if `π` is
/// injective.
fn h_column(ctx: &FactorizationContext, hash: usize, elems: &[usize]) -> Option<Vec<u128>> {
    blocks(ctx, hash / ctx.inner().len(), hash % ctx.inner().len(), elems, true)
}

/// `C_{n,e} · H = H · Ĉ_e` on rows `A ⊆ [n_pad]`, `|A| <= k`, and on the
/// `H` columns whose block sets all have at most `s` elements.
pub fn check_hat_commutation(ctx: &FactorizationContext, e: usize, budget: u128, defect: Option<Defect>) -> Verdict {
    let required = binomial_sum(ctx.n_pad(), ctx.k()).saturating_mul(ctx.h() as u128);
    if required > budget || ctx.n_pad() > 64 {
        return Verdict::Unverifiable { required, budget };
    }
    if e == 0 || e > ctx.n() {
        return Verdict::Fail;
    }
    let s = ctx.s();
    let in_range = |m: &Vec<u128>| m.iter().all(|b| b.count_ones() as usize <= s);
    let e0 = e - 1;
    for a in sets_up_to(ctx.n_pad(), ctx.k()) {
        let items: Vec<usize> = elems(a).iter().map(|x| x - 1).collect();
        for hash in 0..ctx.h() {
            // (C·H)[A, ·]: the H row of A ∪ {e}, when e ∉ A
            let lhs = if a & (1 << e0) == 0 {
                let mut with_e = items.clone();
                with_e.push(e0);
                h_column(ctx, hash, &with_e)
            } else {
                None
            };
            // (H·Ĉ)[A, ·]: the H row of A moved by Ĉ, which adds π(e) to block σ(π(e))
            let rhs = h_column(ctx, hash, &items).and_then(|mut m| {
                let (v, mut i) = ctx.hash_of(hash, e0);
                if defect == Some(Defect::WrongBlock) {
                    i = (i + 1) % s;
                }
                let bit = 1u128 << v;
                (m[i] & bit == 0).then(|| {
                    m[i] |= bit;
                    m
                })
            });
            let lhs = lhs.filter(in_range);
            let rhs = rhs.filter(in_range);
            if lhs != rhs {
                return Verdict::Fail;
            }
        }
    }
    Verdict::Pass
}

/// Independent evaluation of `L[A, col]`, for cross-checking the context.
pub fn l_entry_reference(ctx: &FactorizationContext, a: &[usize], col: &ColumnIndex) -> bool {
    if a.len() > ctx.k_user() {
        return false;
    }
    let mut items: Vec<usize> = a.iter().map(|x| x - 1).collect();
    items.extend(ctx.n()..ctx.n_pad());
    let fam = ctx.family().sets();
    match blocks(ctx, col.outer_idx, col.inner_idx, &items, true) {
        None => false,
        Some(m) => col.blocks.iter().zip(&m).all(|(&(f, p), &mi)| mi & !fam[f] == 0 && mi.count_ones() as usize <= p),
    }
}

/// Independent evaluation of `R[col, B]`.
pub fn r_entry_reference(ctx: &FactorizationContext, col: &ColumnIndex, b: &[usize]) -> bool {
    if b.len() > ctx.k_user() {
        return false;
    }
    let items: Vec<usize> = b.iter().map(|x| x - 1).collect();
    let fam = ctx.family().sets();
    match blocks(ctx, col.outer_idx, col.inner_idx, &items, true) {
        None => false,
        Some(m) => {
            col.blocks.iter().zip(&m).all(|(&(f, p), &mi)| fam[f] & mi == 0 && mi.count_ones() as usize + p <= ctx.s())
        }
    }
}

/// `a · L`, as a dense length-`r` vector.
pub fn dense_mul_l<S: Semiring>(ctx: &FactorizationContext, sr: &S, a: &DenseTable<S::Elem>) -> Result<Vec<S::Elem>> {
    let mut out = vec![sr.zero(); ctx.r()];
    for (&set, &x) in a {
        if sr.is_zero(x) {
            continue;
        }
        for c in ctx.l_row(&elems(set))? {
            out[c] = sr.add(out[c], x);
        }
    }
    Ok(out)
}

/// Whether `b` represents `a`: `a·D ⪯ b·R` on every `|B| <= k` and
/// `b ⪯ a·L` on every column.
pub fn represents<S: Semiring>(b: &Representation<S>, a: &DenseTable<S::Elem>) -> Result<bool> {
    let ctx = b.context();
    let sr = b.semiring();
    let ad = dense_mul_d(sr, a, ctx.n(), ctx.k_user());
    for set in sets_up_to(ctx.n(), ctx.k_user()) {
        let lhs = ad.get(&set).copied().unwrap_or(sr.zero());
        if !sr.leq(lhs, b.query(&elems(set))?) {
            return Ok(false);
        }
    }
    let al = dense_mul_l(ctx, sr, a)?;
    Ok(b.values().iter().zip(&al).all(|(&x, &y)| sr.leq(x, y)))
}

/// Whether `query(b, B) = (a·D)[B]` for every `|B| <= k`.
pub fn queries_match<S: Semiring>(b: &Representation<S>, a: &DenseTable<S::Elem>) -> Result<bool> {
    let ctx = b.context();
    let sr = b.semiring();
    let ad = dense_mul_d(sr, a, ctx.n(), ctx.k_user());
    for set in sets_up_to(ctx.n(), ctx.k_user()) {
        if ad.get(&set).copied().unwrap_or(sr.zero()) != b.query(&elems(set))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `invert(X, b*)` solves `b* ⪯ a·X` and lies below every other solution,
/// checked by enumerating all vectors over a finite semiring.
pub fn check_invert<S: Semiring>(sr: &S, x: &[Vec<bool>], b_star: &[S::Elem]) -> Result<bool> {
    let elements = sr.elements().ok_or_else(|| Error::Usage("semiring is not finite".into()))?;
    let cols = b_star.len();
    let mul = |a: &[S::Elem]| -> Vec<S::Elem> {
        (0..cols).map(|j| sr.sum(x.iter().zip(a).filter(|(row, _)| row[j]).map(|(_, &v)| v))).collect()
    };
    let solves = |a: &[S::Elem]| mul(a).iter().zip(b_star).all(|(&ax, &b)| sr.leq(b, ax));
    let least = crate::repset::invert(sr, x, b_star);
    if !solves(&least) {
        return Ok(false);
    }
    let mut digits = vec![0usize; x.len()];
    loop {
        let cand: Vec<S::Elem> = digits.iter().map(|&i| elements[i]).collect();
        if solves(&cand) && !least.iter().zip(&cand).all(|(&a, &c)| sr.leq(a, c)) {
            return Ok(false);
        }
        let Some(pos) = digits.iter().position(|&d| d + 1 < elements.len()) else {
            return Ok(true);
        };
        digits[pos] += 1;
        digits[..pos].iter_mut().for_each(|d| *d = 0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::ContextOptions;
    use crate::semiring::{Boolean, CappedMinPlus, Cost};
    use std::sync::Arc;

    const BUDGET: u128 = 1 << 40;

    fn ctx(n: usize, k: usize) -> Arc<FactorizationContext> {
        FactorizationContext::build(n, k, &ContextOptions::default()).unwrap()
    }

    #[test]
    fn entry_examples() {
        assert!(d_entry(mask(&[1]), mask(&[2]), 2));
        assert!(!d_entry(mask(&[1]), mask(&[1]), 5));
        assert!(!d_entry(mask(&[1, 2]), mask(&[3]), 2));
        assert!(c_entry(mask(&[1]), mask(&[1, 3]), 3));
        assert!(!c_entry(mask(&[3]), mask(&[3]), 3));
        assert!(!c_entry(0, mask(&[2]), 1));
    }

    #[test]
    fn dense_products() {
        let sr = Boolean;
        let a = init_table(&sr);
        assert_eq!(dense_mul_c(&sr, &a, 4), DenseTable::from([(mask(&[4]), true)]));
        let ad = dense_mul_d(&sr, &a, 5, 2);
        assert_eq!(ad.len(), 16);
        assert!(ad.values().all(|&x| x));
        // (a·C)·D = (a·D)·C^T
        let mp = CappedMinPlus::new(30).unwrap();
        let a: DenseTable<Cost> = [(0, 3), (mask(&[1]), 1), (mask(&[2, 3]), 5), (mask(&[4]), 2)]
            .into_iter()
            .map(|(m, v)| (m, Cost::finite(v)))
            .collect();
        for e in 1..=5 {
            let left = dense_mul_d(&mp, &dense_mul_c(&mp, &a, e), 5, 3);
            let ad = dense_mul_d(&mp, &a, 5, 3);
            let bit = 1u64 << (e - 1);
            for b in sets_up_to(5, 3) {
                let right = if b & bit == 0 { ad.get(&(b | bit)).copied() } else { None };
                assert_eq!(left.get(&b).copied(), right, "e={e} B={:?}", elems(b));
            }
        }
    }

    #[test]
    fn commutation() {
        assert!(check_commutation(4, 2, 1, None));
        for e in 1..=6 {
            assert!(check_commutation(6, 3, e, None));
        }
        assert!(!check_commutation(4, 2, 1, Some(Defect::PerturbD)));
    }

    #[test]
    fn factorization_identity() {
        for (n, k) in [(6, 3), (8, 4), (5, 1), (7, 2)] {
            assert_eq!(check_factorization(&ctx(n, k), BUDGET, None), Verdict::Pass, "n={n} k={k}");
        }
        assert!(matches!(check_factorization(&ctx(8, 4), 10, None), Verdict::Unverifiable { .. }));
    }

    #[test]
    fn factorization_mutations() {
        assert_eq!(check_factorization(&ctx(6, 3), BUDGET, Some(Defect::SkipPadding)), Verdict::Fail);
        assert_eq!(check_factorization(&ctx(20, 2), BUDGET, Some(Defect::SkipInjectivity)), Verdict::Fail);
        assert_eq!(check_drop_universal_set(&ctx(4, 1), BUDGET), Verdict::Pass);
    }

    #[test]
    fn blockwise_matches_columnwise() {
        let c = ctx(5, 3);
        let sets = sets_up_to(5, 3);
        let rows: Vec<Vec<bool>> = sets
            .iter()
            .map(|&a| (0..c.r()).map(|f| l_entry_reference(&c, &elems(a), &c.decode(f))).collect())
            .collect();
        let cols: Vec<Vec<bool>> = sets
            .iter()
            .map(|&b| (0..c.r()).map(|f| r_entry_reference(&c, &c.decode(f), &elems(b))).collect())
            .collect();
        let guards = Guards::from(None);
        for (i, &a) in sets.iter().enumerate() {
            for (j, &b) in sets.iter().enumerate() {
                let direct = (0..c.r()).any(|f| rows[i][f] && cols[j][f]);
                let blockwise = lr_entry(&support(&c, a, true, guards), &support(&c, b, false, guards));
                assert_eq!(direct, blockwise);
                assert_eq!(direct, d_entry(a, b, 3));
            }
        }
    }

    #[test]
    fn reference_entries_agree_with_context() {
        let c = ctx(6, 3);
        for a in sets_up_to(6, 3) {
            let a = elems(a);
            for f in (0..c.r()).step_by(5) {
                let col = c.decode(f);
                assert_eq!(c.l_entry(&a, &col).unwrap(), l_entry_reference(&c, &a, &col));
                assert_eq!(c.r_entry(&col, &a).unwrap(), r_entry_reference(&c, &col, &a));
            }
        }
    }

    #[test]
    fn hat_commutation() {
        let c = ctx(6, 4);
        for e in 1..=6 {
            assert_eq!(check_hat_commutation(&c, e, BUDGET, None), Verdict::Pass);
        }
        assert_eq!(check_hat_commutation(&c, 2, BUDGET, Some(Defect::WrongBlock)), Verdict::Fail);
        assert_eq!(check_hat_commutation(&ctx(7, 3), 3, BUDGET, None), Verdict::Pass);
    }

    #[test]
    fn represents_examples() {
        let c = ctx(5, 3);
        let sr = Boolean;
        let b = Representation::init(&c, sr);
        let a = init_table(&sr);
        assert!(represents(&b, &a).unwrap());
        let b2 = b.convolve(2).unwrap();
        assert!(represents(&b2, &dense_mul_c(&sr, &a, 2)).unwrap());
        assert!(queries_match(&b2, &dense_mul_c(&sr, &a, 2)).unwrap());
        assert!(!represents(&b, &DenseTable::from([(mask(&[1]), true)])).unwrap());
    }

    #[test]
    fn defect_names_round_trip() {
        for d in Defect::ALL {
            assert_eq!(Defect::parse(d.name()).unwrap(), d);
        }
        assert!(Defect::parse("nope").is_err());
    }
}
