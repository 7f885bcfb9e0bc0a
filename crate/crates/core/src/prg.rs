//! The generator: `X = L^{-1/2} sum_i X_i`, where block `X_i` is a discretized
//! Box–Muller vector driven by two `2dR`-wise independent grid sources.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field_hash::{derive_source, PrimeField, DEFAULT_BIAS_MARGIN, MAX_GRID_PRECISION};
use crate::gaussian::sample_block_coordinate;
use crate::seed;

pub const M_MIN: u32 = 2;

/// Default constants in `R`, `L` and `M`, plus the polylog exponent in `L`.
pub const DEFAULT_C: f64 = 2.0;
pub const DEFAULT_C_PRIME: f64 = 1.0;
pub const DEFAULT_C_DOUBLE_PRIME: f64 = 1.0;
pub const POLYLOG_EXPONENT: i32 = 3;

/// Desk-scale overrides used by the experiments.
pub const DESK_R: u32 = 8;
pub const DESK_L: u64 = 64;
pub const DESK_M: u32 = 24;

/// Optional knobs for [`derive_params`]. Unset fields take their formula or default.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ParamOverrides {
    pub r: Option<u32>,
    pub l: Option<u64>,
    pub m: Option<u32>,
    /// Breaks the `wiseness = 2dR` invariant; only for under-independence controls.
    pub wiseness: Option<usize>,
    pub c: Option<f64>,
    pub c_prime: Option<f64>,
    pub c_double_prime: Option<f64>,
    pub bias_margin: Option<u32>,
}

impl ParamOverrides {
    pub fn desk() -> Self {
        Self {
            r: Some(DESK_R),
            l: Some(DESK_L),
            m: Some(DESK_M),
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrgParams {
    pub n: usize,
    pub k: usize,
    pub d: u32,
    pub eps: f64,
    pub r: u32,
    pub l: u64,
    pub m: u32,
    pub wiseness: usize,
    pub c: f64,
    pub c_prime: f64,
    pub c_double_prime: f64,
    pub polylog_exponent: i32,
    pub bias_margin: u32,
    pub field: PrimeField,
    /// Names of the fields taken from overrides rather than formulas.
    pub overridden: Vec<&'static str>,
}

impl PrgParams {
    pub fn seed_length(&self) -> u128 {
        seed_length(self)
    }

    pub fn seed_bytes(&self) -> usize {
        seed::bytes_for_bits(self.seed_length())
    }

    /// Whether the block sources carry the full `2dR`-wise independence.
    pub fn fully_independent(&self) -> bool {
        self.wiseness == 2 * self.d as usize * self.r as usize
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Fill in `R`, `L`, `M`, wiseness and the field from `(k, d, eps, n)`:
///
/// ```text
/// R = ceil(C  log2(kd/eps))
/// L = ceil(C' k^4 d^9 / eps^2 * log2(kd/eps)^3)
/// M = max(2, ceil(C'' k d log2(kdn/eps)))
/// p = smallest prime >= 2^(M + bias_margin)
/// ```
pub fn derive_params(k: usize, d: u32, eps: f64, n: usize, overrides: &ParamOverrides) -> Result<PrgParams> {
    if k == 0 || d == 0 || n == 0 {
        return Err(Error::InvalidParameter("k, d, n must be at least 1".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1)")));
    }
    let c = positive("C", overrides.c.unwrap_or(DEFAULT_C))?;
    let c_prime = positive("C'", overrides.c_prime.unwrap_or(DEFAULT_C_PRIME))?;
    let c_double_prime = positive("C''", overrides.c_double_prime.unwrap_or(DEFAULT_C_DOUBLE_PRIME))?;
    let bias_margin = overrides.bias_margin.unwrap_or(DEFAULT_BIAS_MARGIN);

    let (kf, df, nf) = (k as f64, d as f64, n as f64);
    let log_kd = (kf * df / eps).log2();
    let log_kdn = (kf * df * nf / eps).log2();

    let mut overridden = Vec::new();
    let mut mark = |name: &'static str, set: bool| {
        if set {
            overridden.push(name);
        }
    };

    let r = match overrides.r {
        Some(r) => r,
        None => ((c * log_kd).ceil() as u32).max(1),
    };
    mark("R", overrides.r.is_some());
    let l = match overrides.l {
        Some(l) => l,
        None => {
            let raw = (c_prime * kf.powi(4) * df.powi(9) / (eps * eps) * log_kd.powi(POLYLOG_EXPONENT)).ceil();
            if raw >= u64::MAX as f64 {
                return Err(Error::InvalidParameter(format!("block count {raw:e} overflows u64")));
            }
            (raw as u64).max(1)
        }
    };
    mark("L", overrides.l.is_some());
    let m = match overrides.m {
        Some(m) => m,
        None => (c_double_prime * kf * df * log_kdn).ceil() as u32,
    }
    .max(M_MIN);
    mark("M", overrides.m.is_some());
    let wiseness = overrides.wiseness.unwrap_or(2 * d as usize * r as usize);
    mark("wiseness", overrides.wiseness.is_some());
    mark("bias_margin", overrides.bias_margin.is_some());
    mark("C", overrides.c.is_some());
    mark("C'", overrides.c_prime.is_some());
    mark("C''", overrides.c_double_prime.is_some());

    if r == 0 || l == 0 || wiseness == 0 {
        return Err(Error::InvalidParameter("R, L and wiseness must be at least 1".into()));
    }
    let field = PrimeField::for_grid(m, bias_margin);
    Ok(PrgParams {
        n,
        k,
        d,
        eps,
        r,
        l,
        m,
        wiseness,
        c,
        c_prime,
        c_double_prime,
        polylog_exponent: POLYLOG_EXPONENT,
        bias_margin,
        field,
        overridden,
    })
}

/// Exact seed bits: `L` blocks x 2 sources x `wiseness` coefficients x field bit width.
pub fn seed_length(params: &PrgParams) -> u128 {
    params.l as u128 * 2 * params.wiseness as u128 * params.field.bit_width() as u128
}

/// The asymptotic seed-length shape `k^5 d^11 / eps^2 * log2(kdn/eps)`.
pub fn asymptotic_seed_shape(k: usize, d: u32, eps: f64, n: usize) -> f64 {
    let (kf, df) = (k as f64, d as f64);
    kf.powi(5) * df.powi(11) / (eps * eps) * (kf * df * n as f64 / eps).log2()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrgOutput {
    pub x: Vec<f64>,
    pub params: PrgParams,
    pub seed_digest: String,
}

/// Fills `out` with the generator output. `out.len()` must equal `params.n`.
pub(crate) fn generate_into(params: &PrgParams, seed: &[u8], out: &mut [f64]) -> Result<()> {
    if params.m > MAX_GRID_PRECISION {
        return Err(Error::InvalidParameter(format!(
            "grid precision M = {} exceeds the sampling limit {MAX_GRID_PRECISION}",
            params.m
        )));
    }
    debug_assert_eq!(out.len(), params.n);
    out.fill(0.0);
    // Blocks are accumulated in order i = 0..L so the sum is reproducible.
    for block in 0..params.l {
        let u_src = derive_source(seed, params.wiseness, 2 * block, &params.field)?;
        let v_src = derive_source(seed, params.wiseness, 2 * block + 1, &params.field)?;
        for (j, slot) in out.iter_mut().enumerate() {
            *slot += sample_block_coordinate(&u_src, &v_src, j as u64, params.m)?;
        }
    }
    if params.l > 1 {
        let scale = 1.0 / (params.l as f64).sqrt();
        out.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(())
}

/// Run the generator on a seed of at least `seed_length(params)` bits.
pub fn generate(params: &PrgParams, seed: &[u8]) -> Result<PrgOutput> {
    let mut x = vec![0.0; params.n];
    generate_into(params, seed, &mut x)?;
    Ok(PrgOutput {
        x,
        params: params.clone(),
        seed_digest: seed::digest_hex(seed),
    })
}

/// Expand a short master seed to exactly the bytes `generate` consumes.
pub fn expand_seed(master: &[u8], params: &PrgParams) -> Vec<u8> {
    seed::expand(b"gaussprg/prg-seed", master, params.seed_bytes())
}

/// Baseline vector `index` of the reference stream keyed by `rng_seed`:
/// ChaCha20 seeded from `rng_seed` on stream `index`, ziggurat normals.
pub fn reference_vector(n: usize, rng_seed: u64, index: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
    rng.set_stream(index);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// `count` reference Gaussian vectors in `R^n`.
pub fn generate_reference(n: usize, rng_seed: u64, count: u64) -> impl Iterator<Item = Vec<f64>> {
    (0..count).map(move |i| reference_vector(n, rng_seed, i))
}
