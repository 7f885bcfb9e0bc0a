use std::fmt;

/// Sparse exponent vector `alpha`, stored as `(coordinate, power)` pairs sorted by
/// coordinate with every power at least 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex(Vec<(usize, u32)>);

impl MultiIndex {
    pub fn zero() -> Self {
        Self(Vec::new())
    }

    /// Single coordinate raised to `power`.
    pub fn var(coord: usize, power: u32) -> Self {
        if power == 0 {
            Self::zero()
        } else {
            Self(vec![(coord, power)])
        }
    }

    /// From a dense exponent slice.
    pub fn from_dense(exponents: &[u32]) -> Self {
        Self(
            exponents
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(c, &e)| (c, e))
                .collect(),
        )
    }

    /// From arbitrary `(coordinate, power)` pairs; repeated coordinates add up.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut v: Vec<(usize, u32)> = pairs.into_iter().filter(|&(_, e)| e > 0).collect();
        v.sort_unstable();
        let mut out: Vec<(usize, u32)> = Vec::with_capacity(v.len());
        for (c, e) in v {
            match out.last_mut() {
                Some((lc, le)) if *lc == c => *le += e,
                _ => out.push((c, e)),
            }
        }
        Self(out)
    }

    /// `|alpha|`
    pub fn total(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, coord: usize) -> u32 {
        self.0
            .binary_search_by_key(&coord, |&(c, _)| c)
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().copied()
    }

    /// One past the largest coordinate used (0 for the zero index).
    pub fn min_dimension(&self) -> usize {
        self.0.last().map(|&(c, _)| c + 1).unwrap_or(0)
    }

    /// `alpha!` as a float.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&(_, e)| factorial_f64(e)).product()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_pairs(self.iter().chain(other.iter()))
    }

    /// `self - other` when `other <= self` coordinatewise.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let mut out = Vec::with_capacity(self.0.len());
        for (c, e) in self.iter() {
            let o = other.get(c);
            if o > e {
                return None;
            }
            if e > o {
                out.push((c, e - o));
            }
        }
        if other.iter().any(|(c, _)| self.get(c) == 0) {
            return None;
        }
        Some(Self(out))
    }

    /// All `alpha <= self` coordinatewise with `|alpha| = order`.
    pub fn sub_indices_of_order(&self, order: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut current = Vec::new();
        fn rec(
            parts: &[(usize, u32)],
            remaining: u32,
            current: &mut Vec<(usize, u32)>,
            out: &mut Vec<MultiIndex>,
        ) {
            if remaining == 0 {
                out.push(MultiIndex(current.clone()));
                return;
            }
            let Some((&(c, e), rest)) = parts.split_first() else {
                return;
            };
            let cap: u32 = rest.iter().map(|&(_, e)| e).sum();
            let lo = remaining.saturating_sub(cap);
            for take in lo..=e.min(remaining) {
                if take > 0 {
                    current.push((c, take));
                }
                rec(rest, remaining - take, current, out);
                if take > 0 {
                    current.pop();
                }
            }
        }
        if order <= self.total() {
            rec(&self.0, order, &mut current, &mut out);
        }
        out
    }

    /// Every multi-index over `dim` coordinates with `|alpha| <= max_total`.
    pub fn all_up_to(dim: usize, max_total: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut dense = vec![0u32; dim];
        fn rec(pos: usize, budget: u32, dense: &mut [u32], out: &mut Vec<MultiIndex>) {
            if pos == dense.len() {
                out.push(MultiIndex::from_dense(dense));
                return;
            }
            for e in 0..=budget {
                dense[pos] = e;
                rec(pos + 1, budget - e, dense, out);
            }
            dense[pos] = 0;
        }
        rec(0, max_total, &mut dense, &mut out);
        out.sort();
        out
    }

    /// `x^alpha`
    pub fn monomial_at(&self, x: &[f64]) -> f64 {
        self.0.iter().map(|&(c, e)| x[c].powi(e as i32)).product()
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|(c, e)| format!("x{c}^{e}")).collect();
        write!(f, "{}", parts.join("*"))
    }
}

pub(crate) fn factorial_f64(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `n (n-1) ... (n-k+1)`
pub(crate) fn falling_factorial(n: u32, k: u32) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        let a = MultiIndex::from_pairs([(2, 1), (0, 2), (2, 1), (1, 0)]);
        assert_eq!(a, MultiIndex::from_dense(&[2, 0, 2]));
        assert_eq!(a.total(), 4);
        assert_eq!(a.get(1), 0);
        assert_eq!(a.min_dimension(), 3);
        assert_eq!(a.factorial(), 4.0);
    }

    #[test]
    fn sub_indices_counts() {
        let b = MultiIndex::from_dense(&[2, 1, 3]);
        // coefficient of z^2 in (1+z+z^2)(1+z)(1+z+z^2+z^3) is 5
        assert_eq!(b.sub_indices_of_order(2).len(), 5);
        assert_eq!(b.sub_indices_of_order(0), vec![MultiIndex::zero()]);
        assert!(b.sub_indices_of_order(7).is_empty());
        for a in b.sub_indices_of_order(3) {
            assert_eq!(a.total(), 3);
            assert!(b.checked_sub(&a).is_some());
        }
    }

    #[test]
    fn all_up_to_count() {
        // C(n + d, d)
        assert_eq!(MultiIndex::all_up_to(3, 2).len(), 10);
        assert_eq!(MultiIndex::all_up_to(4, 3).len(), 35);
    }

    #[test]
    fn sub_and_add() {
        let a = MultiIndex::from_dense(&[1, 2]);
        let b = MultiIndex::from_dense(&[0, 1]);
        assert_eq!(a.checked_sub(&b).unwrap().add(&b), a);
        assert!(b.checked_sub(&a).is_none());
        assert!(MultiIndex::var(0, 1).checked_sub(&MultiIndex::var(3, 1)).is_none());
    }
}
