//! Implicit low-rank factorization `D_{n,k} = L · R` of the disjointness
//! matrix.
//!
//! Columns are indexed by a hash pair `(π, σ)` from the outer and inner
//! splitters together with `s` blocks `(F, p)`, `F` from the universal
//! family and `p ∈ {0..s}`. Entries of `L` and `R` are evaluated on demand;
//! nothing of size `2^n` is ever built.
//!
//! When `k` is not a perfect square it is padded up to `s^2` with `d`
//! phantom elements `n+1..n+d` that every row set of `L` implicitly
//! contains.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pseudorandom::{
    build_inner_splitter, build_outer_splitter, build_universal_family, verify_splitter, verify_universal,
    BuildOptions, FamilyCache, SplitterFamily, UniversalFamily, Verdict, DEFAULT_VERIFY_BUDGET,
};
use crate::subsets::{binomial, bit_subsets_up_to, Bits};

/// Largest supported `k` (so that `u = k^2 <= 128` fits a bitset).
pub const MAX_K: usize = 11;
/// Largest block count `s = ceil(sqrt(MAX_K))`.
pub const MAX_S: usize = 4;
pub const DEFAULT_MAX_COLUMNS: usize = 1 << 25;

#[derive(Clone, Debug)]
pub struct ContextOptions {
    pub build: BuildOptions,
    /// Exhaustive family checks run when they fit this budget; 0 disables.
    pub verify_budget: u128,
    /// Contexts with more columns than this are refused.
    pub max_columns: usize,
    pub cache: Option<FamilyCache>,
}

impl Default for ContextOptions {
    fn default() -> Self {
        ContextOptions {
            build: BuildOptions::default(),
            verify_budget: DEFAULT_VERIFY_BUDGET,
            max_columns: DEFAULT_MAX_COLUMNS,
            cache: None,
        }
    }
}

/// A decoded column: hash pair plus one `(F, p)` per block.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColumnIndex {
    pub outer_idx: usize,
    pub inner_idx: usize,
    /// `(F index, p)` for blocks `1..=s` in order.
    pub blocks: Vec<(usize, usize)>,
}

/// Block masks `π(A) ∩ σ⁻¹(i)` for `i = 0..s`.
pub(crate) type BlockMasks = [Bits; MAX_S];

#[derive(Debug)]
pub(crate) struct VTable {
    /// Small-set indices `A` with `v ∉ A`, `|A| <= s - 1`.
    pub sources: Vec<u32>,
    /// For every block code `c`: positions into `sources` of the sets `A`
    /// with `A ∪ {v} ⊆ F_c` and `|A| + 1 <= p_c`.
    pub out_offsets: Vec<u32>,
    pub out_terms: Vec<u32>,
}

impl VTable {
    pub fn outputs(&self, code: usize) -> &[u32] {
        &self.out_terms[self.out_offsets[code] as usize..self.out_offsets[code + 1] as usize]
    }
}

#[derive(Debug)]
pub(crate) struct ConvTables {
    /// All `A ⊆ [u]` with `|A| <= s`, ordered by size.
    pub small_sets: Vec<Bits>,
    /// For every small set: the block codes `(F, p)` with `A ⊆ F`, `|A| <= p`.
    pub cover_offsets: Vec<u32>,
    pub cover_codes: Vec<u32>,
    pub per_v: Vec<VTable>,
}

impl ConvTables {
    pub fn covering(&self, set_idx: usize) -> &[u32] {
        &self.cover_codes[self.cover_offsets[set_idx] as usize..self.cover_offsets[set_idx + 1] as usize]
    }
}

#[derive(Debug)]
pub struct FactorizationContext {
    n: usize,
    k_user: usize,
    k: usize,
    s: usize,
    u: usize,
    d: usize,
    n_pad: usize,
    outer: SplitterFamily,
    inner: SplitterFamily,
    fam: UniversalFamily,
    h: usize,
    ell: usize,
    /// `ell^s`, the number of columns per hash pair.
    block_space: usize,
    r: usize,
    /// `ell^(s-1-i)` for block `i`.
    strides: Vec<usize>,
    code_sets: Vec<Bits>,
    code_p: Vec<usize>,
    tables: ConvTables,
}

/// `(s, k, d, n_pad)` after squaring `k_user` up.
pub fn padded_parameters(n: usize, k_user: usize) -> (usize, usize, usize, usize) {
    let mut s = 1;
    while s * s < k_user {
        s += 1;
    }
    let k = s * s;
    let d = k - k_user;
    (s, k, d, n + d)
}

impl FactorizationContext {
    pub fn build(n: usize, k_user: usize, opts: &ContextOptions) -> Result<Arc<Self>> {
        if k_user == 0 || k_user > n {
            return Err(Error::Usage(format!("need 1 <= k <= n, got n={n} k={k_user}")));
        }
        if k_user > MAX_K {
            return Err(Error::Resource(format!("k={k_user} exceeds the supported maximum {MAX_K}")));
        }
        let (s, k, _, n_pad) = padded_parameters(n, k_user);
        let b = &opts.build;
        // When the whole padded universe fits into [k^2] and the inner
        // splitter over [k^2] is out of reach, hash by the identity into
        // [n_pad] instead; the inner families then only cover that image.
        let compact = n_pad < k * k && binomial(k * k, k) > b.construction_budget;
        let u = if compact { n_pad } else { k * k };
        let outer = if compact {
            SplitterFamily::new(n_pad, k, u, vec![(0..n_pad as u16).collect()])?
        } else {
            match &opts.cache {
                Some(cache) => cache.outer(n_pad, k, b)?,
                None => build_outer_splitter(n_pad, k, b)?,
            }
        };
        let (inner, fam) = match &opts.cache {
            Some(cache) => (cache.inner(u, k, s, b)?, cache.universal(u, s, b)?),
            None => (build_inner_splitter(u, k, s, b)?, build_universal_family(u, s, b)?),
        };
        if opts.verify_budget > 0 {
            for (name, verdict) in [
                ("outer splitter", verify_splitter(&outer, opts.verify_budget)),
                ("inner splitter", verify_splitter(&inner, opts.verify_budget)),
                ("universal family", verify_universal(&fam, opts.verify_budget)),
            ] {
                if verdict == Verdict::Fail {
                    return Err(Error::Construction(format!("{name} failed verification")));
                }
            }
        }
        let ctx = Self::from_families(n, k_user, outer, inner, fam, opts.max_columns)?;
        for (idx, &set) in ctx.tables.small_sets.iter().enumerate() {
            if ctx.tables.covering(idx).is_empty() {
                return Err(Error::Construction(format!("no family set contains {:?}", crate::subsets::from_bits(set))));
            }
        }
        Ok(Arc::new(ctx))
    }

    /// Assembles a context from given families without checking them.
    /// Meant for experiments and mutation tests.
    pub fn from_families(
        n: usize,
        k_user: usize,
        outer: SplitterFamily,
        inner: SplitterFamily,
        fam: UniversalFamily,
        max_columns: usize,
    ) -> Result<Self> {
        let (s, k, d, n_pad) = padded_parameters(n, k_user);
        let u = outer.ell();
        if u != k * k && !(u == n_pad && n_pad < k * k) {
            return Err(Error::Usage(format!("outer splitter range {u} must be k^2 = {}", k * k)));
        }
        if outer.n() != n_pad || inner.n() != u || inner.ell() != s || fam.u() != u {
            return Err(Error::Usage("family parameters do not match the context".into()));
        }
        let h = outer.len() * inner.len();
        let ell = fam.len() * (s + 1);
        let too_big = || Error::Resource(format!("r = {h}·{ell}^{s} exceeds the column ceiling {max_columns}"));
        let block_space = (0..s).try_fold(1usize, |acc, _| acc.checked_mul(ell)).ok_or_else(too_big)?;
        let r = h.checked_mul(block_space).ok_or_else(too_big)?;
        if r > max_columns {
            return Err(Error::Resource(format!("r = {r} exceeds the column ceiling {max_columns}")));
        }
        let strides = (0..s).map(|i| ell.pow((s - 1 - i) as u32)).collect();
        let code_sets: Vec<Bits> = (0..ell).map(|c| fam.sets()[c / (s + 1)]).collect();
        let code_p: Vec<usize> = (0..ell).map(|c| c % (s + 1)).collect();
        let tables = build_tables(u, s, &code_sets, &code_p);
        Ok(FactorizationContext {
            n,
            k_user,
            k,
            s,
            u,
            d,
            n_pad,
            outer,
            inner,
            fam,
            h,
            ell,
            block_space,
            r,
            strides,
            code_sets,
            code_p,
            tables,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    /// The `k` the context was requested for.
    pub fn k_user(&self) -> usize {
        self.k_user
    }
    /// The padded, square `k`.
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn s(&self) -> usize {
        self.s
    }
    /// Range of the outer hash: `k^2`, or `n_pad` for small universes with
    /// `k >= 5`.
    pub fn u(&self) -> usize {
        self.u
    }
    pub fn padding(&self) -> usize {
        self.d
    }
    pub fn n_pad(&self) -> usize {
        self.n_pad
    }
    pub fn h(&self) -> usize {
        self.h
    }
    pub fn ell(&self) -> usize {
        self.ell
    }
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn outer(&self) -> &SplitterFamily {
        &self.outer
    }
    pub fn inner(&self) -> &SplitterFamily {
        &self.inner
    }
    pub fn family(&self) -> &UniversalFamily {
        &self.fam
    }
    pub(crate) fn block_space(&self) -> usize {
        self.block_space
    }
    pub(crate) fn strides(&self) -> &[usize] {
        &self.strides
    }
    pub(crate) fn tables(&self) -> &ConvTables {
        &self.tables
    }
    #[cfg(test)]
    pub(crate) fn code_set(&self, code: usize) -> Bits {
        self.code_sets[code]
    }
    #[cfg(test)]
    pub(crate) fn code_p(&self, code: usize) -> usize {
        self.code_p[code]
    }

    pub fn encode(&self, col: &ColumnIndex) -> usize {
        let hash = col.outer_idx * self.inner.len() + col.inner_idx;
        let within = col.blocks.iter().fold(0, |acc, &(f, p)| acc * self.ell + f * (self.s + 1) + p);
        hash * self.block_space + within
    }

    pub fn decode(&self, flat: usize) -> ColumnIndex {
        let (hash, mut within) = (flat / self.block_space, flat % self.block_space);
        let mut blocks = vec![(0, 0); self.s];
        for i in (0..self.s).rev() {
            let c = within % self.ell;
            within /= self.ell;
            blocks[i] = (c / (self.s + 1), c % (self.s + 1));
        }
        ColumnIndex { outer_idx: hash / self.inner.len(), inner_idx: hash % self.inner.len(), blocks }
    }

    /// Block code `F_idx·(s+1) + p` for every block of `flat`.
    #[cfg(test)]
    pub(crate) fn codes(&self, flat: usize) -> (usize, [usize; MAX_S]) {
        let mut within = flat % self.block_space;
        let mut codes = [0; MAX_S];
        for i in (0..self.s).rev() {
            codes[i] = within % self.ell;
            within /= self.ell;
        }
        (flat / self.block_space, codes)
    }

    /// `(π(e), σ(π(e)))` for 0-based `e` under hash pair `hash`.
    pub(crate) fn hash_of(&self, hash: usize, e: usize) -> (usize, usize) {
        let v = self.outer.function(hash / self.inner.len())[e] as usize;
        (v, self.inner.function(hash % self.inner.len())[v] as usize)
    }

    /// Per-block masks of `π(elems)`, or `None` if `π` collides on `elems`
    /// (0-based, possibly phantom, elements).
    pub(crate) fn block_masks(&self, hash: usize, elems: &[usize]) -> Option<BlockMasks> {
        let pi = self.outer.function(hash / self.inner.len());
        let sigma = self.inner.function(hash % self.inner.len());
        let mut seen: Bits = 0;
        let mut masks = [0; MAX_S];
        for &x in elems {
            let v = pi[x] as usize;
            let bit = 1u128 << v;
            if seen & bit != 0 {
                return None;
            }
            seen |= bit;
            masks[sigma[v] as usize] |= bit;
        }
        Some(masks)
    }

    /// 0-based elements of a user set, validated.
    pub(crate) fn user_elems(&self, set: &[usize]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(set.len() + self.d);
        for &x in set {
            if x == 0 || x > self.n {
                return Err(Error::Usage(format!("element {x} outside [1, {}]", self.n)));
            }
            out.push(x - 1);
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// `set` with the phantom padding elements appended.
    pub(crate) fn lifted(&self, set: &[usize]) -> Result<Vec<usize>> {
        let mut out = self.user_elems(set)?;
        out.extend(self.n..self.n_pad);
        Ok(out)
    }

    pub fn x_entry(&self, a: Bits, f_idx: usize, p: usize) -> bool {
        a & !self.fam.sets()[f_idx] == 0 && a.count_ones() as usize <= p
    }

    pub fn y_entry(&self, f_idx: usize, p: usize, b: Bits) -> bool {
        self.fam.sets()[f_idx] & b == 0 && b.count_ones() as usize + p <= self.s
    }

    /// `L[A, col]` for a user set `A` (1-based elements).
    pub fn l_entry(&self, a: &[usize], col: &ColumnIndex) -> Result<bool> {
        let elems = self.lifted(a)?;
        if elems.len() - self.d > self.k_user {
            return Ok(false);
        }
        let hash = col.outer_idx * self.inner.len() + col.inner_idx;
        Ok(match self.block_masks(hash, &elems) {
            None => false,
            Some(m) => col.blocks.iter().enumerate().all(|(i, &(f, p))| self.x_entry(m[i], f, p)),
        })
    }

    /// `R[col, B]` for a user set `B` (1-based elements, not padded).
    pub fn r_entry(&self, col: &ColumnIndex, b: &[usize]) -> Result<bool> {
        let elems = self.user_elems(b)?;
        if elems.len() > self.k_user {
            return Ok(false);
        }
        let hash = col.outer_idx * self.inner.len() + col.inner_idx;
        Ok(match self.block_masks(hash, &elems) {
            None => false,
            Some(m) => col.blocks.iter().enumerate().all(|(i, &(f, p))| self.y_entry(f, p, m[i])),
        })
    }

    /// Calls `f` with every flat column whose hash is `hash` and whose block
    /// codes are drawn from `allowed[i]` for each block `i`.
    pub(crate) fn for_each_product(&self, hash: usize, allowed: &[Vec<usize>], f: &mut impl FnMut(usize)) {
        fn go(
            ctx: &FactorizationContext,
            allowed: &[Vec<usize>],
            i: usize,
            acc: usize,
            f: &mut impl FnMut(usize),
        ) {
            if i == allowed.len() {
                f(acc);
                return;
            }
            for &c in &allowed[i] {
                go(ctx, allowed, i + 1, acc + c * ctx.strides[i], f);
            }
        }
        go(self, allowed, 0, hash * self.block_space, f);
    }

    /// Every flat column with `L[A, col] = 1̄`, given the lifted 0-based
    /// elements of `A`.
    pub(crate) fn l_support(&self, lifted: &[usize], f: &mut impl FnMut(usize)) {
        for hash in 0..self.h {
            if let Some(m) = self.block_masks(hash, lifted) {
                let allowed: Vec<Vec<usize>> = (0..self.s)
                    .map(|i| {
                        (0..self.ell)
                            .filter(|&c| m[i] & !self.code_sets[c] == 0 && m[i].count_ones() as usize <= self.code_p[c])
                            .collect()
                    })
                    .collect();
                self.for_each_product(hash, &allowed, f);
            }
        }
    }

    /// Every flat column with `R[col, B] = 1̄`, given the 0-based elements of `B`.
    pub(crate) fn r_support(&self, elems: &[usize], f: &mut impl FnMut(usize)) {
        for hash in 0..self.h {
            if let Some(m) = self.block_masks(hash, elems) {
                let allowed: Vec<Vec<usize>> = (0..self.s)
                    .map(|i| {
                        (0..self.ell)
                            .filter(|&c| {
                                m[i] & self.code_sets[c] == 0 && m[i].count_ones() as usize + self.code_p[c] <= self.s
                            })
                            .collect()
                    })
                    .collect();
                self.for_each_product(hash, &allowed, f);
            }
        }
    }

    /// Flat columns of row `A` of `L` (user set, 1-based). Empty when
    /// `|A| > k`.
    pub fn l_row(&self, a: &[usize]) -> Result<Vec<usize>> {
        let elems = self.lifted(a)?;
        let mut out = Vec::new();
        if elems.len() - self.d <= self.k_user {
            self.l_support(&elems, &mut |c| out.push(c));
        }
        Ok(out)
    }

    /// Flat columns of column `B` of `R` (user set, 1-based).
    pub fn r_column(&self, b: &[usize]) -> Result<Vec<usize>> {
        let elems = self.user_elems(b)?;
        let mut out = Vec::new();
        if elems.len() <= self.k_user {
            self.r_support(&elems, &mut |c| out.push(c));
        }
        Ok(out)
    }
}

fn build_tables(u: usize, s: usize, code_sets: &[Bits], code_p: &[usize]) -> ConvTables {
    let ell = code_sets.len();
    let small_sets = bit_subsets_up_to(u, s);
    let index: HashMap<Bits, u32> = small_sets.iter().enumerate().map(|(i, &a)| (a, i as u32)).collect();

    let mut cover_offsets = vec![0u32];
    let mut cover_codes = Vec::new();
    for &a in &small_sets {
        let size = a.count_ones() as usize;
        cover_codes.extend((0..ell).filter(|&c| a & !code_sets[c] == 0 && size <= code_p[c]).map(|c| c as u32));
        cover_offsets.push(cover_codes.len() as u32);
    }

    let per_v = (0..u)
        .map(|v| {
            let vbit = 1u128 << v;
            let sources: Vec<u32> = small_sets
                .iter()
                .filter(|&&a| a & vbit == 0 && (a.count_ones() as usize) < s)
                .map(|a| index[a])
                .collect();
            let mut out_offsets = vec![0u32];
            let mut out_terms = Vec::new();
            for c in 0..ell {
                if code_sets[c] & vbit != 0 {
                    for (pos, &src) in sources.iter().enumerate() {
                        let a = small_sets[src as usize];
                        if a & !code_sets[c] == 0 && a.count_ones() as usize + 1 <= code_p[c] {
                            out_terms.push(pos as u32);
                        }
                    }
                }
                out_offsets.push(out_terms.len() as u32);
            }
            VTable { sources, out_offsets, out_terms }
        })
        .collect();

    ConvTables { small_sets, cover_offsets, cover_codes, per_v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subsets::{subsets_up_to, to_bits};

    fn ctx(n: usize, k: usize) -> Arc<FactorizationContext> {
        FactorizationContext::build(n, k, &ContextOptions::default()).unwrap()
    }

    #[test]
    fn padding_parameters() {
        let c = ctx(10, 4);
        assert_eq!((c.s(), c.k(), c.u(), c.padding(), c.n_pad()), (2, 4, 16, 0, 10));
        let c = ctx(10, 3);
        assert_eq!((c.s(), c.k(), c.u(), c.padding(), c.n_pad()), (2, 4, 16, 1, 11));
        let c = ctx(5, 1);
        assert_eq!((c.s(), c.k(), c.u(), c.padding()), (1, 1, 1, 0));
        assert_eq!(c.r(), c.h() * c.ell());
    }

    #[test]
    fn rank_formula_and_encoding() {
        let c = ctx(7, 4);
        assert_eq!(c.r(), c.h() * c.ell().pow(c.s() as u32));
        for flat in 0..c.r() {
            let col = c.decode(flat);
            assert_eq!(c.encode(&col), flat);
            assert!(col.blocks.iter().all(|&(f, p)| f < c.family().len() && p <= c.s()));
        }
    }

    #[test]
    fn xy_entries() {
        let c = ctx(6, 4);
        for f in 0..c.family().len() {
            for p in 0..=c.s() {
                assert!(c.x_entry(0, f, p));
                assert!(!c.x_entry(0b111, f, p));
                assert!(c.y_entry(f, p, 0));
            }
            let set = c.family().sets()[f];
            if let Some(out) = (0..16).find(|&x| set & (1 << x) == 0) {
                assert!(!c.x_entry(1 << out, f, 2));
            }
            if let Some(inside) = (0..16).find(|&x| set & (1 << x) != 0) {
                assert!(!c.y_entry(f, 0, 1 << inside));
            }
        }
        // |B| = s with p = 1
        let f = (0..c.family().len()).find(|&f| c.family().sets()[f] & 0b11 == 0).unwrap();
        assert!(!c.y_entry(f, 1, 0b11));
        assert!(c.y_entry(f, 0, 0b11));
    }

    #[test]
    fn empty_set_rows_and_columns() {
        let c = ctx(6, 4);
        for flat in (0..c.r()).step_by(7) {
            let col = c.decode(flat);
            assert!(c.l_entry(&[], &col).unwrap());
            assert!(c.r_entry(&col, &[]).unwrap());
            assert!(!c.l_entry(&[1, 2, 3, 4, 5], &col).unwrap());
            assert!(!c.r_entry(&col, &[1, 2, 3, 4, 5]).unwrap());
        }
        assert!(c.l_entry(&[7], &c.decode(0)).is_err());
        assert!(c.r_entry(&c.decode(0), &[0]).is_err());
    }

    #[test]
    fn supports_match_entries() {
        for (n, k) in [(6, 4), (5, 3), (4, 1)] {
            let c = ctx(n, k);
            for set in subsets_up_to(n, k) {
                let set: Vec<usize> = set.iter().map(|x| x + 1).collect();
                let l: Vec<usize> = (0..c.r()).filter(|&f| c.l_entry(&set, &c.decode(f)).unwrap()).collect();
                let mut got = c.l_row(&set).unwrap();
                got.sort_unstable();
                assert_eq!(got, l, "L row {set:?}");
                let r: Vec<usize> = (0..c.r()).filter(|&f| c.r_entry(&c.decode(f), &set).unwrap()).collect();
                let mut got = c.r_column(&set).unwrap();
                got.sort_unstable();
                assert_eq!(got, r, "R column {set:?}");
            }
        }
    }

    #[test]
    fn collisions_give_zero() {
        let c = ctx(20, 4);
        let pi = c.outer().function(0);
        let pair = (0..20)
            .flat_map(|a| (a + 1..20).map(move |b| (a, b)))
            .find(|&(a, b)| pi[a] == pi[b])
            .expect("20 elements into 16 slots collide");
        let set = [pair.0 + 1, pair.1 + 1];
        for flat in 0..c.block_space() {
            let col = c.decode(flat);
            assert_eq!(col.outer_idx, 0);
            assert!(!c.l_entry(&set, &col).unwrap());
            assert!(!c.r_entry(&col, &set).unwrap());
        }
    }

    #[test]
    fn tables_cover_every_small_set() {
        let c = ctx(8, 4);
        let t = c.tables();
        for (i, &a) in t.small_sets.iter().enumerate() {
            assert!(!t.covering(i).is_empty());
            for &code in t.covering(i) {
                assert!(a & !c.code_set(code as usize) == 0);
            }
        }
        let v = 3;
        let vt = &t.per_v[v];
        for code in 0..c.ell() {
            for &pos in vt.outputs(code) {
                let a = t.small_sets[vt.sources[pos as usize] as usize];
                let with_v = a | (1 << v);
                assert!(with_v & !c.code_set(code) == 0);
                assert!(with_v.count_ones() as usize <= c.code_p(code));
            }
        }
        assert_eq!(to_bits(&[]), 0);
    }

    #[test]
    fn large_k_on_small_universe() {
        let c = ctx(5, 5);
        assert_eq!((c.s(), c.k(), c.padding(), c.u()), (3, 9, 4, 9));
        assert_eq!(c.r(), c.h() * c.ell().pow(3));
    }

    #[test]
    fn column_ceiling_is_reported() {
        let opts = ContextOptions { max_columns: 10, ..ContextOptions::default() };
        match FactorizationContext::build(8, 4, &opts) {
            Err(Error::Resource(msg)) => assert!(msg.contains("r = ")),
            other => panic!("expected resource error, got {other:?}"),
        }
    }
}
