//! Small combinatorial helpers: binomials, k-subset enumeration, and
//! fixed-width bitsets over a universe of at most 128 elements.

use std::ops::ControlFlow;

/// Subset of `{0, .., 127}` as a bitmask.
pub type Bits = u128;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact: acc * (n - i) is divisible by (i + 1)
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of subsets of an `n`-set with at most `k` elements.
pub fn binomial_sum(n: usize, k: usize) -> u128 {
    (0..=k.min(n)).fold(0u128, |acc, j| acc.saturating_add(binomial(n, j)))
}

/// Calls `f` with every `k`-subset of `{0, .., n-1}` in lexicographic order.
/// Stops early when `f` breaks.
pub fn for_each_combination<B>(
    n: usize,
    k: usize,
    mut f: impl FnMut(&[usize]) -> ControlFlow<B>,
) -> ControlFlow<B> {
    if k > n {
        return ControlFlow::Continue(());
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx)?;
        // rightmost position that can still move
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return ControlFlow::Continue(());
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// All subsets of `{0, .., n-1}` with at most `k` elements, as sorted
/// index vectors, ordered by size and then lexicographically.
pub fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 0..=k.min(n) {
        let _ = for_each_combination(n, size, |c| {
            out.push(c.to_vec());
            ControlFlow::<()>::Continue(())
        });
    }
    out
}

/// Bitmask form of [`subsets_up_to`] for universes of at most 128 elements.
pub fn bit_subsets_up_to(n: usize, k: usize) -> Vec<Bits> {
    assert!(n <= 128);
    subsets_up_to(n, k).iter().map(|s| to_bits(s)).collect()
}

pub fn to_bits(elems: &[usize]) -> Bits {
    elems.iter().fold(0, |acc, &x| acc | (1u128 << x))
}

pub fn from_bits(mut bits: Bits) -> Vec<usize> {
    let mut out = Vec::with_capacity(bits.count_ones() as usize);
    while bits != 0 {
        let x = bits.trailing_zeros() as usize;
        out.push(x);
        bits &= bits - 1;
    }
    out
}

/// Every subset of `bits`, including the empty set and `bits` itself.
pub fn submasks(bits: Bits) -> impl Iterator<Item = Bits> {
    let mut next = Some(bits);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & bits) };
        Some(cur)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(16, 4), 1820);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(200, 4), 64_684_950);
        assert_eq!(binomial_sum(10, 4), 386);
        assert_eq!(binomial(1000, 500), u128::MAX);
    }

    #[test]
    fn combinations_are_complete_and_ordered() {
        for n in 0..8 {
            for k in 0..=n + 1 {
                let mut seen = Vec::new();
                let _ = for_each_combination(n, k, |c| {
                    assert!(c.windows(2).all(|w| w[0] < w[1]));
                    seen.push(to_bits(c));
                    ControlFlow::<()>::Continue(())
                });
                assert_eq!(seen.len() as u128, binomial(n, k), "n={n} k={k}");
                let mut sorted = seen.clone();
                sorted.dedup();
                assert_eq!(sorted.len(), seen.len());
            }
        }
    }

    #[test]
    fn early_exit() {
        let mut count = 0;
        let r = for_each_combination(6, 3, |_| {
            count += 1;
            if count == 4 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        assert!(r.is_break());
        assert_eq!(count, 4);
    }

    #[test]
    fn submask_enumeration() {
        let subs: Vec<_> = submasks(0b101).collect();
        assert_eq!(subs, vec![0b101, 0b100, 0b001, 0]);
        assert_eq!(submasks(0).count(), 1);
        assert_eq!(from_bits(to_bits(&[0, 3, 127])), vec![0, 3, 127]);
    }
}
