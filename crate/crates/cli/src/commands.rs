use std::io::Write;

use gaussprg_core::gaussian::default_delta;
use gaussprg_core::harness::{
    self, anti_concentration_test, control_family, coupling_test, exhaustive_independence_test, lemma_suite,
    GapSeeds, LemmaSuiteConfig, PrgSampler,
};
use gaussprg_core::mollifier::{derivative_bound_check, log_ratio_bump_check};
use gaussprg_core::prg::{asymptotic_seed_shape, DESK_L, DESK_M, DESK_R};
use gaussprg_core::ptf::random_family;
use gaussprg_core::{derive_params, generate, seed, ParamOverrides, PrgParams, PtfFunction};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    AntiConcArgs, CouplingArgs, FoolArgs, GenArgs, IndependenceArgs, LemmaArgs, MollifierArgs, ParamArgs,
};
use crate::CliError;

/// Default coupling threshold is the 16-bit one for every M, so coarse grids
/// are measured against the same closeness as the reference grid.
pub const COUPLING_REFERENCE_PRECISION: u32 = 16;
pub const DEFAULT_MASTER_SEED: &str = "00";
/// Vectors longer than this are reported by digest only.
pub const INLINE_LIMIT: usize = 64;

/// What a command hands back to be wrapped in a report.
pub struct Outcome {
    pub command: &'static str,
    pub config: Value,
    pub master_seed: Option<String>,
    pub pass: bool,
    pub result: Value,
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn required<T: Copy>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing required option --{flag}")))
}

fn resolve_params(a: &mut ParamArgs) -> Result<PrgParams, CliError> {
    let k = required(a.k, "k")?;
    let d = required(a.d, "d")?;
    let eps = required(a.eps, "eps")?;
    let n = required(a.n, "n")?;
    if a.desk {
        a.override_r.get_or_insert(DESK_R);
        a.override_l.get_or_insert(DESK_L);
        a.override_m.get_or_insert(DESK_M);
    }
    let overrides = ParamOverrides {
        r: a.override_r,
        l: a.override_l,
        m: a.override_m,
        wiseness: a.wiseness,
        c: a.c,
        c_prime: a.c_prime,
        c_double_prime: a.c_double_prime,
        bias_margin: a.bias_margin,
    };
    Ok(derive_params(k, d, eps, n, &overrides)?)
}

fn decode_seed(hex_str: &str) -> Result<Vec<u8>, CliError> {
    hex::decode(hex_str).map_err(|e| CliError::Config(format!("--seed-hex: {e}")))
}

pub fn params(mut a: ParamArgs) -> Result<Outcome, CliError> {
    let p = resolve_params(&mut a)?;
    let bits = p.seed_length();
    let shape = asymptotic_seed_shape(p.k, p.d, p.eps, p.n);
    Ok(Outcome {
        command: "params",
        config: value(&a),
        master_seed: None,
        pass: true,
        result: json!({
            "params": p,
            "seed_length": bits,
            "seed_bytes": p.seed_bytes(),
            "asymptotic_shape": shape,
            "ratio_to_shape": bits as f64 / shape,
        }),
    })
}

fn vector_bytes(x: &[f64]) -> Vec<u8> {
    x.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn gen(mut a: GenArgs) -> Result<Outcome, CliError> {
    let p = resolve_params(&mut a.params)?;
    let seed_hex = a.seed_hex.get_or_insert_with(|| DEFAULT_MASTER_SEED.into()).clone();
    let count = *a.count.get_or_insert(1);
    let master = decode_seed(&seed_hex)?;
    if a.raw_seed && count != 1 {
        return Err(CliError::Config("--raw-seed produces exactly one vector".into()));
    }
    let sampler = PrgSampler::new(p.clone(), &master);
    let mut vectors = Vec::new();
    let mut sidecar = Vec::new();
    for index in 0..count {
        let draw = if a.raw_seed { master.clone() } else { sampler.draw_seed(index) };
        let out = generate(&p, &draw)?;
        let bytes = vector_bytes(&out.x);
        let mut entry = json!({"index": index, "seed_digest": out.seed_digest});
        if p.n <= INLINE_LIMIT {
            entry["x"] = value(&out.x);
        } else {
            entry["x_digest"] = Value::String(seed::digest_hex(&bytes));
        }
        vectors.push(entry);
        if a.sidecar.is_some() {
            sidecar.extend_from_slice(&bytes);
        }
    }
    if let Some(path) = &a.sidecar {
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(&sidecar))
            .map_err(|e| CliError::Config(format!("writing {}: {e}", path.display())))?;
    }
    Ok(Outcome {
        command: "gen",
        config: value(&a),
        master_seed: Some(seed_hex),
        pass: true,
        result: json!({
            "params": p,
            "seed_length": p.seed_length(),
            "vectors": vectors,
            "sidecar": a.sidecar,
            "sidecar_layout": a.sidecar.as_ref().map(|_| "f64 little-endian, row-major count x n"),
        }),
    })
}

pub fn fool(mut a: FoolArgs) -> Result<Outcome, CliError> {
    let p = resolve_params(&mut a.params)?;
    let seed_hex = a.seed_hex.get_or_insert_with(|| DEFAULT_MASTER_SEED.into()).clone();
    let reference_seed = *a.reference_seed.get_or_insert(0);
    let samples = *a.samples.get_or_insert(200_000);
    let target = *a.target.get_or_insert(0.02);
    let family: PtfFunction = if let Some(path) = &a.family {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
    } else if a.control {
        control_family(p.n)?
    } else {
        random_family(*a.family_seed.get_or_insert(0), p.n, p.d, p.k, true)?
    };
    if family.dimension() != p.n {
        return Err(CliError::Config(format!(
            "family dimension {} differs from n = {}",
            family.dimension(),
            p.n
        )));
    }
    let master = decode_seed(&seed_hex)?;
    let report = harness::fooling_gap(&family, &p, samples, &GapSeeds::new(&master, reference_seed), target)?;
    Ok(Outcome {
        command: "fool",
        config: value(&a),
        master_seed: Some(seed_hex),
        pass: report.pass,
        result: value(&report),
    })
}

pub fn independence(mut a: IndependenceArgs) -> Result<Outcome, CliError> {
    let p = *a.p.get_or_insert(13);
    let t = *a.t.get_or_insert(3);
    let order = *a.test_order.get_or_insert(t);
    let indices = a.indices.get_or_insert_with(|| (0..p.min(16)).collect()).clone();
    let report = exhaustive_independence_test(p, t, order, &indices)?;
    Ok(Outcome {
        command: "diag independence",
        config: value(&a),
        master_seed: None,
        pass: report.pass,
        result: value(&report),
    })
}

pub fn coupling(mut a: CouplingArgs) -> Result<Outcome, CliError> {
    let m = *a.m.get_or_insert(16);
    let delta = *a.delta.get_or_insert(default_delta(COUPLING_REFERENCE_PRECISION));
    let samples = *a.samples.get_or_insert(100_000);
    let rng_seed = *a.seed.get_or_insert(0);
    let report = coupling_test(m, delta, samples, rng_seed)?;
    Ok(Outcome {
        command: "diag coupling",
        config: value(&a),
        master_seed: Some(rng_seed.to_string()),
        pass: report.pass,
        result: value(&report),
    })
}

pub fn anticonc(mut a: AntiConcArgs) -> Result<Outcome, CliError> {
    let rng_seed = *a.seed.get_or_insert(0);
    let report = anti_concentration_test(
        *a.d.get_or_insert(2),
        *a.eps.get_or_insert(0.01),
        *a.samples.get_or_insert(100_000),
        *a.trials.get_or_insert(20),
        *a.c.get_or_insert(5.0),
        *a.n.get_or_insert(3),
        rng_seed,
    )?;
    Ok(Outcome {
        command: "diag anticonc",
        config: value(&a),
        master_seed: Some(rng_seed.to_string()),
        pass: report.pass,
        result: value(&report),
    })
}

pub fn lemmas(mut a: LemmaArgs) -> Result<Outcome, CliError> {
    let cfg = LemmaSuiteConfig {
        seed: *a.seed.get_or_insert(LemmaSuiteConfig::default().seed),
        ..LemmaSuiteConfig::default()
    };
    let report = lemma_suite(&cfg)?;
    Ok(Outcome {
        command: "diag lemmas",
        config: value(&a),
        master_seed: Some(cfg.seed.to_string()),
        pass: report.pass,
        result: value(&report),
    })
}

pub fn mollifier(mut a: MollifierArgs) -> Result<Outcome, CliError> {
    let min_order = *a.min_order.get_or_insert(2);
    if !(1..=4).contains(&min_order) {
        return Err(CliError::Config(format!("--min-order {min_order} outside 1..=4")));
    }
    let bounds = (min_order..=4).map(derivative_bound_check).collect::<Result<Vec<_>, _>>()?;
    let log_ratio: Vec<Value> = [(2, 0), (1, 1), (0, 2), (2, 1)]
        .into_iter()
        .map(|(x, y)| {
            let worst = log_ratio_bump_check(x, y, 0.5);
            json!({"orders": [x, y], "worst_ratio": worst, "pass": worst <= 1.0})
        })
        .collect();
    let pass = bounds.iter().all(|b| b.pass) && log_ratio.iter().all(|v| v["pass"] == true);
    Ok(Outcome {
        command: "diag mollifier",
        config: value(&a),
        master_seed: None,
        pass,
        result: json!({"derivative_bounds": bounds, "log_ratio": log_ratio}),
    })
}
