//! Dynamic representative sets.
//!
//! A [`Representation`] is a length-`r` vector `b` standing in for a table
//! `a` over subsets of `[n]` in the sense that `a·D ⪯ b·R` and `b ⪯ a·L`.
//! Under those two inequalities `b·R = a·D`, so [`Representation::query`]
//! answers "best `a[A]` over sets `A` disjoint from `B` with
//! `|A ∪ B| <= k`" exactly.
//!
//! Tables are never built; `b` is updated in place of `a` through
//! [`Representation::convolve`] (insert an element into every set),
//! [`Representation::add`] and scaling.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factorization::FactorizationContext;
use crate::semiring::Semiring;
use crate::subsets::Bits;

/// Sparse vector over subsets of `[u]`; missing keys are `0̄`.
pub type SparseTable<E> = BTreeMap<Bits, E>;

#[derive(Clone)]
pub struct Representation<S: Semiring> {
    ctx: Arc<FactorizationContext>,
    semiring: S,
    values: Vec<S::Elem>,
}

impl<S: Semiring> fmt::Debug for Representation<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nonzero = self.values.iter().filter(|&&x| !self.semiring.is_zero(x)).count();
        f.debug_struct("Representation").field("r", &self.values.len()).field("nonzero", &nonzero).finish()
    }
}

impl<S: Semiring> PartialEq for Representation<S> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.ctx, &other.ctx) && self.values == other.values
    }
}

impl<S: Semiring> Representation<S> {
    /// Represents the table with `a[∅] = 1̄` and `0̄` elsewhere:
    /// `b[col] = L[∅, col]`.
    pub fn init(ctx: &Arc<FactorizationContext>, semiring: S) -> Self {
        let mut values = vec![semiring.zero(); ctx.r()];
        let phantoms: Vec<usize> = (ctx.n()..ctx.n_pad()).collect();
        let one = semiring.one();
        ctx.l_support(&phantoms, &mut |c| values[c] = one);
        Representation { ctx: Arc::clone(ctx), semiring, values }
    }

    /// The all-`0̄` vector, representing the all-`0̄` table.
    pub fn zero(ctx: &Arc<FactorizationContext>, semiring: S) -> Self {
        Representation { ctx: Arc::clone(ctx), values: vec![semiring.zero(); ctx.r()], semiring }
    }

    pub fn from_values(ctx: &Arc<FactorizationContext>, semiring: S, values: Vec<S::Elem>) -> Result<Self> {
        if values.len() != ctx.r() {
            return Err(Error::Usage(format!("expected {} values, got {}", ctx.r(), values.len())));
        }
        Ok(Representation { ctx: Arc::clone(ctx), semiring, values })
    }

    pub fn context(&self) -> &Arc<FactorizationContext> {
        &self.ctx
    }

    pub fn semiring(&self) -> &S {
        &self.semiring
    }

    pub fn values(&self) -> &[S::Elem] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&x| self.semiring.is_zero(x))
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.ctx, &other.ctx) {
            return Err(Error::Usage("representations belong to different contexts".into()));
        }
        if self.semiring.descriptor() != other.semiring.descriptor() {
            return Err(Error::SemiringMismatch(format!(
                "{:?} vs {:?}",
                self.semiring.descriptor(),
                other.semiring.descriptor()
            )));
        }
        Ok(())
    }

    /// Represents `a · C_{n,e}`: every set gains `e`, sets already holding
    /// `e` vanish. `e` is 1-based.
    pub fn convolve(&self, e: usize) -> Result<Self> {
        let ctx = &*self.ctx;
        if e == 0 || e > ctx.n() {
            return Err(Error::Usage(format!("element {e} outside [1, {}]", ctx.n())));
        }
        let mut out = vec![self.semiring.zero(); ctx.r()];
        let bs = ctx.block_space();
        let sr = &self.semiring;
        #[cfg(feature = "parallel")]
        out.par_chunks_mut(bs)
            .zip(self.values.par_chunks(bs))
            .enumerate()
            .for_each(|(hash, (o, i))| convolve_hash(ctx, sr, hash, e - 1, i, o));
        #[cfg(not(feature = "parallel"))]
        out.chunks_mut(bs)
            .zip(self.values.chunks(bs))
            .enumerate()
            .for_each(|(hash, (o, i))| convolve_hash(ctx, sr, hash, e - 1, i, o));
        Ok(Representation { ctx: Arc::clone(&self.ctx), semiring: self.semiring.clone(), values: out })
    }

    /// Convolves with each element in turn. Repeated elements give a vector
    /// representing the all-`0̄` table.
    pub fn convolve_set(&self, elems: &[usize]) -> Result<Self> {
        let mut cur = self.clone();
        for &e in elems {
            cur = cur.convolve(e)?;
        }
        Ok(cur)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.add_assign(other)?;
        Ok(out)
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_same(other)?;
        let sr = &self.semiring;
        for (x, &y) in self.values.iter_mut().zip(&other.values) {
            *x = sr.add(*x, y);
        }
        Ok(())
    }

    /// `λ · b`.
    pub fn scale_left(&self, lambda: S::Elem) -> Self {
        let sr = &self.semiring;
        let values = self.values.iter().map(|&x| sr.mul(lambda, x)).collect();
        Representation { ctx: Arc::clone(&self.ctx), semiring: sr.clone(), values }
    }

    /// `b · λ`.
    pub fn scale_right(&self, lambda: S::Elem) -> Self {
        let sr = &self.semiring;
        let values = self.values.iter().map(|&x| sr.mul(x, lambda)).collect();
        Representation { ctx: Arc::clone(&self.ctx), semiring: sr.clone(), values }
    }

    /// `(b·R)[B]` for a 1-based set `B`. Sets larger than `k` give `0̄`,
    /// since every `R` column vanishes on them.
    pub fn query(&self, set: &[usize]) -> Result<S::Elem> {
        let elems = self.ctx.user_elems(set)?;
        let sr = &self.semiring;
        if elems.len() > self.ctx.k_user() {
            return Ok(sr.zero());
        }
        if elems.is_empty() {
            return Ok(sr.sum(self.values.iter().copied()));
        }
        let mut acc = sr.zero();
        self.ctx.r_support(&elems, &mut |c| acc = sr.add(acc, self.values[c]));
        Ok(acc)
    }
}

/// Algorithm-1 update of the columns of one hash pair.
fn convolve_hash<S: Semiring>(
    ctx: &FactorizationContext,
    sr: &S,
    hash: usize,
    e: usize,
    inp: &[S::Elem],
    out: &mut [S::Elem],
) {
    let (v, block) = ctx.hash_of(hash, e);
    let tables = ctx.tables();
    let vt = &tables.per_v[v];
    let ell = ctx.ell();
    let stride = ctx.strides()[block];
    let span = ell * stride;
    let zero = sr.zero();
    let bottom = sr.bottom();
    let mut b_star = vec![zero; ell];
    let mut a_star = vec![zero; vt.sources.len()];
    for hi in (0..inp.len()).step_by(span) {
        for lo in 0..stride {
            let base = hi + lo;
            let mut any = false;
            for (c, slot) in b_star.iter_mut().enumerate() {
                *slot = inp[base + c * stride];
                any |= *slot != zero;
            }
            if !any {
                continue;
            }
            for (slot, &src) in a_star.iter_mut().zip(&vt.sources) {
                let mut acc = bottom;
                for &c in tables.covering(src as usize) {
                    acc = sr.lcu(acc, b_star[c as usize]);
                    if acc == zero {
                        break;
                    }
                }
                *slot = acc;
            }
            for c in 0..ell {
                let mut acc = zero;
                for &pos in vt.outputs(c) {
                    let a = a_star[pos as usize];
                    if a != zero {
                        acc = sr.add(acc, a);
                    }
                }
                out[base + c * stride] = acc;
            }
        }
    }
}

/// Least `a*` with `b* ⪯ a*·X` for a 0/1 matrix `X` given row-wise
/// (`x[row][col]`): `a*[row]` is the lcu of `b*[col]` over the columns
/// where `X[row, col] = 1̄`, and the bottom element for empty rows.
pub fn invert<S: Semiring>(semiring: &S, x: &[Vec<bool>], b_star: &[S::Elem]) -> Vec<S::Elem> {
    x.iter()
        .map(|row| {
            semiring.lcu_all(row.iter().zip(b_star).filter(|(&on, _)| on).map(|(_, &b)| b))
        })
        .collect()
}

/// [`invert`] against the context's `X` (rows: subsets of `[u]` with at
/// most `s` elements; columns: block codes `(F, p)`).
pub fn invert_slice<S: Semiring>(
    ctx: &FactorizationContext,
    semiring: &S,
    b_star: &[S::Elem],
) -> Result<SparseTable<S::Elem>> {
    if b_star.len() != ctx.ell() {
        return Err(Error::Usage(format!("slice has {} entries, expected {}", b_star.len(), ctx.ell())));
    }
    let tables = ctx.tables();
    let mut out = SparseTable::new();
    for (idx, &set) in tables.small_sets.iter().enumerate() {
        let a = semiring.lcu_all(tables.covering(idx).iter().map(|&c| b_star[c as usize]));
        if !semiring.is_zero(a) {
            out.insert(set, a);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::ContextOptions;
    use crate::semiring::{Boolean, CappedMinPlus, Cost};
    use proptest::prelude::*;

    fn ctx(n: usize, k: usize) -> Arc<FactorizationContext> {
        FactorizationContext::build(n, k, &ContextOptions::default()).unwrap()
    }

    /// Algorithm 1 written out slice by slice via `invert_slice`.
    fn convolve_reference<S: Semiring>(b: &Representation<S>, e: usize) -> Vec<S::Elem> {
        let ctx = b.context();
        let sr = b.semiring();
        let mut out = vec![sr.zero(); ctx.r()];
        for flat in 0..ctx.r() {
            let (hash, codes) = ctx.codes(flat);
            let (v, i) = ctx.hash_of(hash, e - 1);
            let base = flat - codes[i] * ctx.strides()[i];
            let b_star: Vec<S::Elem> = (0..ctx.ell()).map(|c| b.values()[base + c * ctx.strides()[i]]).collect();
            let a_star = invert_slice(ctx, sr, &b_star).unwrap();
            let (set, p) = (ctx.code_set(codes[i]), ctx.code_p(codes[i]));
            out[flat] = sr.sum(a_star.iter().filter_map(|(&a, &val)| {
                let with_v = a | (1u128 << v);
                (a & (1u128 << v) == 0 && with_v & !set == 0 && with_v.count_ones() as usize <= p).then_some(val)
            }));
        }
        out
    }

    #[test]
    fn init_values() {
        let c = ctx(6, 4);
        let b = Representation::init(&c, Boolean);
        assert!(b.values().iter().all(|&x| x));
        assert!(b.query(&[]).unwrap());

        let c = ctx(6, 3);
        let b = Representation::init(&c, Boolean);
        for flat in 0..c.r() {
            assert_eq!(b.values()[flat], c.l_entry(&[], &c.decode(flat)).unwrap());
        }
        for set in [vec![], vec![1], vec![2, 5], vec![1, 3, 6]] {
            assert!(b.query(&set).unwrap(), "B = {set:?}");
        }
        assert!(!b.query(&[1, 2, 3, 4]).unwrap());
    }

    #[test]
    fn convolve_examples() {
        let c = ctx(6, 4);
        let b = Representation::init(&c, Boolean);
        let once = b.convolve(2).unwrap();
        assert!(once.query(&[]).unwrap());
        assert!(!once.query(&[2]).unwrap());
        assert!(once.query(&[1, 3, 4]).unwrap());
        assert!(!once.query(&[1, 3, 4, 5]).unwrap());
        let twice = once.convolve(2).unwrap();
        assert!(twice.is_zero());
        assert!(b.convolve(0).is_err());
        assert!(b.convolve(7).is_err());
    }

    #[test]
    fn convolve_set_examples() {
        let c = ctx(6, 3);
        let b = Representation::init(&c, Boolean);
        assert_eq!(b.convolve_set(&[]).unwrap(), b);
        assert_eq!(b.convolve_set(&[4]).unwrap(), b.convolve(4).unwrap());
        assert!(b.convolve_set(&[1, 2]).unwrap().query(&[]).unwrap());
        assert!(b.convolve_set(&[1, 2, 3]).unwrap().query(&[]).unwrap());
        assert!(!b.convolve_set(&[1, 2, 3, 4]).unwrap().query(&[]).unwrap());
        let c1 = ctx(4, 1);
        let b1 = Representation::init(&c1, Boolean);
        assert!(b1.convolve(3).unwrap().query(&[]).unwrap());
        assert!(!b1.convolve_set(&[1, 2]).unwrap().query(&[]).unwrap());
    }

    #[test]
    fn convolve_matches_reference() {
        let sr = CappedMinPlus::new(20).unwrap();
        for (n, k) in [(6, 4), (7, 3), (3, 1)] {
            let c = ctx(n, k);
            let mut b = Representation::init(&c, sr).scale_left(sr.elem(1));
            for (step, e) in [1, 3, 2].into_iter().enumerate() {
                let expected = convolve_reference(&b, e);
                b = b.convolve(e).unwrap();
                assert_eq!(b.values(), &expected[..], "n={n} k={k} step {step}");
                b = b.add(&Representation::init(&c, sr).scale_left(sr.elem(step as u64 + 2))).unwrap();
            }
        }
    }

    #[test]
    fn combinators() {
        let c = ctx(5, 4);
        let sr = CappedMinPlus::new(10).unwrap();
        let b = Representation::init(&c, sr).convolve(1).unwrap();
        assert_eq!(b.add(&b).unwrap(), b);
        assert_eq!(b.add(&Representation::zero(&c, sr)).unwrap(), b);
        assert_eq!(b.scale_left(Cost::finite(0)), b);
        assert!(b.scale_right(Cost::INF).is_zero());
        let shifted = b.scale_left(Cost::finite(4));
        for (&x, &y) in b.values().iter().zip(shifted.values()) {
            assert_eq!(y, sr.mul(Cost::finite(4), x));
        }
        assert_eq!(b.scale_left(Cost::finite(11)).values().iter().filter(|x| !x.is_inf()).count(), 0);
        let other = ctx(5, 4);
        assert!(b.add(&Representation::init(&other, sr)).is_err());
    }

    #[test]
    fn query_edge_cases() {
        let c = ctx(5, 3);
        let b = Representation::init(&c, Boolean).convolve(5).unwrap();
        assert!(!b.query(&[5]).unwrap());
        assert!(!b.query(&[1, 2, 3, 4]).unwrap());
        assert!(b.query(&[6]).is_err());
    }

    #[test]
    fn invert_hand_example() {
        let sr = CappedMinPlus::new(10).unwrap();
        let x = vec![vec![true, true], vec![false, true]];
        let a = invert(&sr, &x, &[Cost::finite(5), Cost::finite(3)]);
        assert_eq!(a, vec![Cost::finite(5), Cost::finite(3)]);
        assert_eq!(invert(&sr, &[vec![false, false]], &[Cost::INF, Cost::INF]), vec![Cost::finite(0)]);
        assert_eq!(invert(&sr, &x, &[Cost::INF, Cost::INF]), vec![Cost::INF, Cost::INF]);
    }

    #[test]
    fn invert_slice_all_zero() {
        let c = ctx(6, 4);
        let t = invert_slice(&*c, &Boolean, &vec![false; c.ell()]).unwrap();
        assert!(t.is_empty());
        assert!(invert_slice(&*c, &Boolean, &[true]).is_err());
    }

    fn mat_vec(sr: &CappedMinPlus, a: &[Cost], x: &[Vec<bool>], cols: usize) -> Vec<Cost> {
        (0..cols).map(|j| sr.sum((0..a.len()).filter(|&i| x[i][j]).map(|i| a[i]))).collect()
    }

    proptest! {
        #[test]
        fn invert_is_least_solution(
            rows in 1usize..5,
            cols in 1usize..5,
            bits in proptest::collection::vec(any::<bool>(), 25),
            raw in proptest::collection::vec(0u64..3, 5),
        ) {
            // {0, 1, ∞}
            let sr = CappedMinPlus::new(1).unwrap();
            let x: Vec<Vec<bool>> = (0..rows).map(|i| (0..cols).map(|j| bits[i * 5 + j]).collect()).collect();
            let b: Vec<Cost> = raw[..cols].iter().map(|&v| sr.elem(v)).collect();
            let a = invert(&sr, &x, &b);
            let ax = mat_vec(&sr, &a, &x, cols);
            for j in 0..cols {
                prop_assert!(sr.leq(b[j], ax[j]));
            }
            let elems = sr.elements().unwrap();
            let mut hat = vec![0usize; rows];
            loop {
                let cand: Vec<Cost> = hat.iter().map(|&i| elems[i]).collect();
                let cx = mat_vec(&sr, &cand, &x, cols);
                if (0..cols).all(|j| sr.leq(b[j], cx[j])) {
                    for i in 0..rows {
                        prop_assert!(sr.leq(a[i], cand[i]));
                    }
                }
                let mut pos = 0;
                while pos < rows && hat[pos] + 1 == elems.len() {
                    hat[pos] = 0;
                    pos += 1;
                }
                if pos == rows {
                    break;
                }
                hat[pos] += 1;
            }
        }
    }
}
