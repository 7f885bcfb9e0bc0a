//! Standalone diagnostics: exact k-wise independence, coupling, anti-concentration.

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field_hash::{KWisePolySource, PrimeField};
use crate::gaussian::{coupled_sample, UnitPair};
use crate::poly::{from_hermite, HermiteExpansion};

/// Largest `p^t` enumerated by [`exhaustive_independence_test`].
pub const MAX_ENUMERATION: u64 = 10_000_000;
const MAX_CELLS: u64 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub modulus: u64,
    pub wiseness: usize,
    pub test_order: usize,
    pub indices: Vec<u64>,
    pub seeds_enumerated: u64,
    pub subsets_checked: usize,
    pub first_failure: Option<Vec<u64>>,
    pub pass: bool,
}

fn subsets_up_to(n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = vec![vec![]];
    while let Some(s) = stack.pop() {
        let start = s.last().map_or(0, |&l| l + 1);
        for i in start..n {
            let mut t = s.clone();
            t.push(i);
            if t.len() < max {
                stack.push(t.clone());
            }
            out.push(t);
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

/// Enumerate every coefficient vector of a `source_t`-wise source over `F_p` and
/// check that the values at every subset of `indices` of size at most
/// `test_order` are jointly uniform.
pub fn exhaustive_independence_test(
    p: u64,
    source_t: usize,
    test_order: usize,
    indices: &[u64],
) -> Result<IndependenceReport> {
    let field = PrimeField::from_u64(p)?;
    if source_t == 0 || test_order == 0 {
        return Err(Error::InvalidParameter("wiseness and test order must be positive".into()));
    }
    let seeds = (p as u128).checked_pow(source_t as u32).filter(|&s| s <= MAX_ENUMERATION as u128);
    let Some(seeds) = seeds else {
        return Err(Error::TooLarge(format!("p^t = {p}^{source_t} exceeds {MAX_ENUMERATION}")));
    };
    let seeds = seeds as u64;
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != indices.len() {
        return Err(Error::InvalidParameter("indices must be distinct".into()));
    }
    if let Some(&j) = indices.iter().find(|&&j| j >= p) {
        return Err(Error::IndexExceedsField {
            index: j,
            modulus: p.to_string(),
        });
    }

    let subsets = subsets_up_to(indices.len(), test_order);
    let mut cells = 0u64;
    for s in &subsets {
        cells = p
            .checked_pow(s.len() as u32)
            .and_then(|c| cells.checked_add(c))
            .filter(|&c| c <= MAX_CELLS)
            .ok_or_else(|| Error::TooLarge(format!("histograms exceed {MAX_CELLS} cells")))?;
    }
    let mut hist: Vec<Vec<u32>> = subsets.iter().map(|s| vec![0; p.pow(s.len() as u32) as usize]).collect();

    let mut coeffs = vec![0u64; source_t];
    let mut values = vec![0u64; indices.len()];
    for _ in 0..seeds {
        let src = KWisePolySource::from_u64_coeffs(&field, &coeffs, 0)?;
        for (v, &j) in values.iter_mut().zip(indices) {
            *v = src
                .eval_index(j)?
                .try_into()
                .expect("value below a u64 modulus");
        }
        for (s, h) in subsets.iter().zip(hist.iter_mut()) {
            let cell = s.iter().fold(0u64, |acc, &i| acc * p + values[i]);
            h[cell as usize] += 1;
        }
        // odometer over F_p^t
        for c in coeffs.iter_mut() {
            *c += 1;
            if *c < p {
                break;
            }
            *c = 0;
        }
    }

    let first_failure = subsets.iter().zip(&hist).find_map(|(s, h)| {
        let expected = seeds / p.pow(s.len() as u32);
        let uniform = seeds.is_multiple_of(p.pow(s.len() as u32)) && h.iter().all(|&c| c as u64 == expected);
        (!uniform).then(|| s.iter().map(|&i| indices[i]).collect())
    });
    Ok(IndependenceReport {
        modulus: p,
        wiseness: source_t,
        test_order,
        indices: indices.to_vec(),
        seeds_enumerated: seeds,
        subsets_checked: subsets.len(),
        pass: first_failure.is_none(),
        first_failure,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingReport {
    pub precision: u32,
    pub delta: f64,
    pub n_samples: u64,
    pub within: u64,
    pub rate: f64,
    pub standard_error: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Fraction of exact Box–Muller draws within `delta` of their grid-truncated
/// counterpart. Passes when the rate is at least `1 - delta - 3 SE`, with the
/// binomial standard error taken at rate `1 - delta`.
pub fn coupling_test(precision: u32, delta: f64, n_samples: u64, rng_seed: u64) -> Result<CouplingReport> {
    if precision == 0 || precision > 63 {
        return Err(Error::InvalidParameter(format!("precision {precision} outside 1..=63")));
    }
    if !(delta > 0.0 && delta < 1.0) || n_samples == 0 {
        return Err(Error::InvalidParameter("delta must be in (0, 1) and N positive".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
    let mut within = 0u64;
    for _ in 0..n_samples {
        let u = 1.0 - rng.random::<f64>();
        let v = rng.random::<f64>();
        within += coupled_sample(UnitPair::new(u, v)?, precision, delta).within_bound() as u64;
    }
    let rate = within as f64 / n_samples as f64;
    let standard_error = (delta * (1.0 - delta) / n_samples as f64).sqrt();
    let threshold = 1.0 - delta - 3.0 * standard_error;
    Ok(CouplingReport {
        precision,
        delta,
        n_samples,
        within,
        rate,
        standard_error,
        threshold,
        pass: rate >= threshold,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AntiConcentrationReport {
    pub degree: u32,
    pub eps: f64,
    pub dimension: usize,
    pub constant: f64,
    pub n_samples: u64,
    pub bound: f64,
    pub standard_error: f64,
    pub probabilities: Vec<f64>,
    pub worst: f64,
    pub pass: bool,
}

/// `Pr[|p(X)| <= eps]` for `trials` random unit-norm degree-`d` polynomials,
/// against `c d eps^(1/d)` plus three binomial standard errors.
pub fn anti_concentration_test(
    d: u32,
    eps: f64,
    n_samples: u64,
    trials: u32,
    c: f64,
    n: usize,
    rng_seed: u64,
) -> Result<AntiConcentrationReport> {
    if d == 0 || n == 0 || trials == 0 || n_samples == 0 || eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidParameter("d, n, trials, N and eps must be positive".into()));
    }
    let bound = c * d as f64 * eps.powf(1.0 / d as f64);
    let b = bound.clamp(0.0, 1.0);
    let standard_error = (b * (1.0 - b) / n_samples as f64).sqrt();
    let mut probabilities = Vec::with_capacity(trials as usize);
    let mut x = vec![0.0; n];
    for trial in 0..trials {
        let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
        rng.set_stream(trial as u64);
        let e = HermiteExpansion::random(&mut rng, n, d);
        let p = from_hermite(&e.scale(1.0 / e.l2_norm()));
        let mut hits = 0u64;
        for _ in 0..n_samples {
            x.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            hits += (p.eval_unchecked(&x).abs() <= eps) as u64;
        }
        probabilities.push(hits as f64 / n_samples as f64);
    }
    let worst = probabilities.iter().copied().fold(0.0, f64::max);
    Ok(AntiConcentrationReport {
        degree: d,
        eps,
        dimension: n,
        constant: c,
        n_samples,
        bound,
        standard_error,
        probabilities,
        worst,
        pass: worst <= bound + 3.0 * standard_error,
    })
}
