//! Normalized probabilists' Hermite polynomials `h_j = He_j / sqrt(j!)` and the
//! monomial <-> Hermite basis change.
//!
//! Both directions use the integer table `a(m, k) = m! / (2^k k! (m-2k)!)`:
//!
//! ```text
//! x^m  = sum_k a(m, k) He_{m-2k}(x)
//! He_m = sum_k (-1)^k a(m, k) x^{m-2k}
//! ```
//!
//! so the only floating-point steps are the `sqrt(j!)` normalizations and the
//! final products.

use std::collections::BTreeMap;

use super::multi_index::factorial_f64;
use super::{HermiteExpansion, MonomialPoly, MultiIndex, MAX_POWER};

/// `h_j(y)` via `h_{j+1} = (y h_j - sqrt(j) h_{j-1}) / sqrt(j+1)`.
pub fn hermite_h(j: u32, y: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for i in 0..j {
        let next = (y * cur - (i as f64).sqrt() * prev) / ((i + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// `h_alpha(y) = prod_j h_{alpha_j}(y_j)`.
pub fn hermite_eval(alpha: &MultiIndex, y: &[f64]) -> f64 {
    alpha.iter().map(|(c, e)| hermite_h(e, y[c])).product()
}

/// `a(m, k) = C(m, 2k) (2k-1)!!`, exact.
fn pairing_count(m: u32, k: u32) -> u128 {
    assert!(m <= MAX_POWER, "power {m} exceeds supported {MAX_POWER}");
    let mut binom: u128 = 1;
    for i in 0..2 * k {
        binom = binom * (m - i) as u128 / (i + 1) as u128;
    }
    let double_fact: u128 = (1..=k).map(|i| (2 * i - 1) as u128).product();
    binom * double_fact
}

/// Tensor-product expansion of one multi-index through a univariate table.
fn expand_index(
    alpha: &MultiIndex,
    coeff: f64,
    univariate: impl Fn(u32) -> Vec<(u32, f64)>,
    out: &mut BTreeMap<MultiIndex, f64>,
) {
    let mut partial: Vec<(Vec<(usize, u32)>, f64)> = vec![(Vec::new(), coeff)];
    for (coord, power) in alpha.iter() {
        let table = univariate(power);
        let mut next = Vec::with_capacity(partial.len() * table.len());
        for (idx, c) in &partial {
            for &(e, w) in &table {
                let mut idx = idx.clone();
                idx.push((coord, e));
                next.push((idx, c * w));
            }
        }
        partial = next;
    }
    for (idx, c) in partial {
        *out.entry(MultiIndex::from_pairs(idx)).or_insert(0.0) += c;
    }
}

/// Monomial -> normalized Hermite coefficients.
pub fn to_hermite(p: &MonomialPoly) -> HermiteExpansion {
    let table = |m: u32| -> Vec<(u32, f64)> {
        (0..=m / 2)
            .map(|k| {
                let j = m - 2 * k;
                (j, pairing_count(m, k) as f64 * factorial_f64(j).sqrt())
            })
            .collect()
    };
    let mut acc = BTreeMap::new();
    for (alpha, c) in p.terms() {
        expand_index(alpha, c, table, &mut acc);
    }
    HermiteExpansion::from_coeffs(p.dimension(), acc).expect("indices within dimension")
}

/// Normalized Hermite coefficients -> monomial.
pub fn from_hermite(e: &HermiteExpansion) -> MonomialPoly {
    let table = |m: u32| -> Vec<(u32, f64)> {
        let norm = factorial_f64(m).sqrt();
        (0..=m / 2)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                (m - 2 * k, sign * pairing_count(m, k) as f64 / norm)
            })
            .collect()
    };
    let mut acc = BTreeMap::new();
    for (alpha, c) in e.coeffs() {
        expand_index(alpha, c, table, &mut acc);
    }
    MonomialPoly::from_terms(e.dimension(), acc).expect("indices within dimension")
}
