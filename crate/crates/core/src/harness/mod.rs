//! Statistical harness: fooling-gap estimation with Hoeffding intervals plus the
//! diagnostic suites in [`checks`] and [`lemmas`].
//!
//! Every sampler is indexed by draw number, so sample loops can run on any
//! number of threads and still aggregate to bit-identical results: draws are
//! grouped in fixed chunks and the per-chunk counts are reduced in order.

pub mod checks;
pub mod lemmas;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::MonomialPoly;
use crate::prg::{generate_into, reference_vector, PrgParams};
use crate::ptf::{Combiner, PtfFunction};
use crate::seed;

pub use checks::{
    anti_concentration_test, coupling_test, exhaustive_independence_test, AntiConcentrationReport,
    CouplingReport, IndependenceReport,
};
pub use lemmas::{lemma_suite, LemmaCheck, LemmaSuiteConfig, LemmaSuiteReport};

pub const DEFAULT_CONFIDENCE: f64 = 0.99;
pub const MIN_SAMPLES: u64 = 100;
pub const MIN_GAP_SAMPLES: u64 = 1000;
pub const CHUNK: u64 = 1024;

/// `sqrt(ln(2 / (1 - confidence)) / (2 N))`
pub fn hoeffding_half_width(n_samples: u64, confidence: f64) -> f64 {
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * n_samples as f64)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimateCI {
    pub mean: f64,
    pub n_samples: u64,
    pub half_width: f64,
    pub confidence: f64,
}

impl EstimateCI {
    pub fn from_count(ones: u64, n_samples: u64) -> Self {
        Self {
            mean: ones as f64 / n_samples as f64,
            n_samples,
            half_width: hoeffding_half_width(n_samples, DEFAULT_CONFIDENCE),
            confidence: DEFAULT_CONFIDENCE,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        (self.mean - value).abs() <= self.half_width
    }
}

/// A source of vectors addressed by draw index.
pub trait VectorSampler: Sync {
    fn dimension(&self) -> usize;
    fn sample_into(&self, draw: u64, out: &mut [f64]) -> Result<()>;
}

/// Generator arm: draw `i` runs the generator on `expand(hash(master || i))`.
#[derive(Clone, Debug)]
pub struct PrgSampler {
    params: PrgParams,
    master_seed: Vec<u8>,
    seed_bytes: usize,
}

impl PrgSampler {
    pub fn new(params: PrgParams, master_seed: &[u8]) -> Self {
        let seed_bytes = params.seed_bytes();
        Self {
            params,
            master_seed: master_seed.to_vec(),
            seed_bytes,
        }
    }

    pub fn params(&self) -> &PrgParams {
        &self.params
    }

    pub fn draw_seed(&self, draw: u64) -> Vec<u8> {
        seed::draw_seed(&self.master_seed, draw, self.seed_bytes)
    }
}

impl VectorSampler for PrgSampler {
    fn dimension(&self) -> usize {
        self.params.n
    }

    fn sample_into(&self, draw: u64, out: &mut [f64]) -> Result<()> {
        generate_into(&self.params, &self.draw_seed(draw), out)
    }
}

/// Baseline arm: reference Gaussian vectors.
#[derive(Clone, Copy, Debug)]
pub struct ReferenceSampler {
    pub n: usize,
    pub rng_seed: u64,
}

impl VectorSampler for ReferenceSampler {
    fn dimension(&self) -> usize {
        self.n
    }

    fn sample_into(&self, draw: u64, out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(&reference_vector(self.n, self.rng_seed, draw));
        Ok(())
    }
}

/// Count of draws in `0..n_samples` satisfying `pred`, chunked and reduced in order.
pub fn count_draws<S, P>(sampler: &S, n_samples: u64, pred: P) -> Result<u64>
where
    S: VectorSampler + ?Sized,
    P: Fn(&[f64]) -> Result<bool> + Sync,
{
    let chunks = n_samples.div_ceil(CHUNK);
    let counts: Vec<Result<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut buf = vec![0.0; sampler.dimension()];
            let mut ones = 0u64;
            for draw in c * CHUNK..((c + 1) * CHUNK).min(n_samples) {
                sampler.sample_into(draw, &mut buf)?;
                ones += pred(&buf)? as u64;
            }
            Ok(ones)
        })
        .collect();
    counts.into_iter().sum()
}

/// Empirical `E[F]` over `n_samples` draws with a 99% Hoeffding interval.
pub fn estimate_mean<S: VectorSampler + ?Sized>(f: &PtfFunction, sampler: &S, n_samples: u64) -> Result<EstimateCI> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_SAMPLES} samples, got {n_samples}"
        )));
    }
    if sampler.dimension() != f.dimension() {
        return Err(Error::DimensionMismatch {
            expected: f.dimension(),
            actual: sampler.dimension(),
        });
    }
    let ones = count_draws(sampler, n_samples, |x| f.eval(x))?;
    Ok(EstimateCI::from_count(ones, n_samples))
}

/// Seeds for the two arms of a gap experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapSeeds {
    pub prg_master_hex: String,
    pub reference_seed: u64,
}

impl GapSeeds {
    pub fn new(prg_master: &[u8], reference_seed: u64) -> Self {
        Self {
            prg_master_hex: hex::encode(prg_master),
            reference_seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub prg_estimate: EstimateCI,
    pub gaussian_estimate: EstimateCI,
    pub gap: f64,
    pub gap_bound: f64,
    pub target: f64,
    pub params: PrgParams,
    pub seeds: GapSeeds,
    pub family_digest: String,
    pub pass: bool,
}

/// `|E[F(generator)] - E[F(gaussian)]|` with both arms at `n_samples`.
/// Passes when the gap is at most `target` plus the two half-widths.
pub fn fooling_gap(
    f: &PtfFunction,
    params: &PrgParams,
    n_samples: u64,
    seeds: &GapSeeds,
    target: f64,
) -> Result<GapReport> {
    if n_samples < MIN_GAP_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_GAP_SAMPLES} samples per arm, got {n_samples}"
        )));
    }
    let master = hex::decode(&seeds.prg_master_hex).map_err(|e| Error::Malformed(format!("seed hex: {e}")))?;
    let prg = PrgSampler::new(params.clone(), &master);
    let reference = ReferenceSampler {
        n: params.n,
        rng_seed: seeds.reference_seed,
    };
    let prg_estimate = estimate_mean(f, &prg, n_samples)?;
    let gaussian_estimate = estimate_mean(f, &reference, n_samples)?;
    let gap = (prg_estimate.mean - gaussian_estimate.mean).abs();
    let gap_bound = prg_estimate.half_width + gaussian_estimate.half_width;
    Ok(GapReport {
        prg_estimate,
        gaussian_estimate,
        gap,
        gap_bound,
        target,
        params: params.clone(),
        seeds: seeds.clone(),
        family_digest: f.digest(),
        pass: gap <= target + gap_bound,
    })
}

/// Moment-sensitive control: `AND(sign(x_0 - x_1), sign(x_1 - x_0))`. Under true
/// Gaussians it is 1 with probability 0; any source that repeats coordinates
/// makes it 1 always.
pub fn control_family(n: usize) -> Result<PtfFunction> {
    if n < 2 {
        return Err(Error::InvalidParameter("control family needs n >= 2".into()));
    }
    let mut p = MonomialPoly::var(n, 0);
    p.add_term(crate::poly::MultiIndex::var(1, 1), -1.0);
    let q = p.scale(-1.0);
    PtfFunction::new(vec![p, q], Combiner::and(2)?)
}

/// First four raw moments.
pub fn raw_moments(samples: &[f64]) -> [f64; 4] {
    let n = samples.len() as f64;
    let mut m = [0.0; 4];
    for &x in samples {
        let x2 = x * x;
        m[0] += x;
        m[1] += x2;
        m[2] += x2 * x;
        m[3] += x2 * x2;
    }
    m.map(|v| v / n)
}

/// One-sample Kolmogorov–Smirnov statistic against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value `sqrt(-ln(alpha/2) / 2) / sqrt(N)`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Fraction of `reps` Bernoulli(1/2) experiments of size `n_samples` whose
/// 99% Hoeffding interval contains 1/2.
pub fn ci_calibration(reps: u64, n_samples: u64, rng_seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let covered: u64 = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(rng_seed);
            rng.set_stream(r);
            let ones = (0..n_samples).filter(|_| rng.random::<bool>()).count() as u64;
            EstimateCI::from_count(ones, n_samples).contains(0.5) as u64
        })
        .sum();
    covered as f64 / reps as f64
}
