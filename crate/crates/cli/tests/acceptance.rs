//! Acceptance gate: nine end-to-end criteria, one PASS/FAIL line each.
//! Runs without the libtest harness so the lines always reach the output.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use gaussprg_core::gaussian::{box_muller, UnitPair};
use gaussprg_core::harness::lemmas::expansion_identity_check;
use gaussprg_core::harness::{
    control_family, fooling_gap, ks_critical, ks_statistic, lemma_suite, raw_moments, GapSeeds, LemmaSuiteConfig,
};
use gaussprg_core::poly::quadrature::GaussHermiteRule;
use gaussprg_core::poly::{from_hermite, hermite_eval, to_hermite};
use gaussprg_core::prg::asymptotic_seed_shape;
use gaussprg_core::ptf::random_family;
use gaussprg_core::{derive_params, HermiteExpansion, MonomialPoly, MultiIndex, ParamOverrides};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde_json::Value;
use statrs::distribution::{ContinuousCDF, Normal};

/// Ceiling on `seed_length / (k^5 d^11 / eps^2 * log2(kdn/eps))` over the test grid.
/// Observed range is about 46 to 2.9e4; the ratio carries extra polylog factors, so
/// the constant is specific to this grid.
const SEED_RATIO_CEILING: f64 = 1e5;

type Criterion = (&'static str, Duration, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn cli(args: &[&str], threads: Option<&str>) -> (i32, Vec<u8>) {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gaussprg"));
    c.env_remove("GAUSSPRG_THREADS").args(args);
    if let Some(t) = threads {
        c.env("GAUSSPRG_THREADS", t);
    }
    let out = c.output().expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).expect("report is JSON")
}

fn independence() -> Verdict {
    let (ok_code, ok) = cli(&["diag", "independence", "--p", "13", "--t", "3"], None);
    let (bad_code, bad) = cli(
        &["diag", "independence", "--p", "13", "--t", "2", "--test-order", "3"],
        None,
    );
    let ok = json(&ok);
    let subsets = &ok["result"]["subsets_checked"];
    let failure = &json(&bad)["result"]["first_failure"];
    Verdict {
        pass: ok_code == 0 && ok["pass"] == true && bad_code == 1,
        detail: format!("p=13 t=3 exit {ok_code} over {subsets} subsets; t=2 at order 3 exit {bad_code}, first failing triple {failure}"),
    }
}

fn box_muller_moments() -> Verdict {
    const N: usize = 1_000_000;
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let xs: Vec<f64> = (0..N)
        .map(|_| {
            let u = 1.0 - rng.random::<f64>();
            box_muller(UnitPair::new(u, rng.random()).expect("u in (0, 1]"))
        })
        .collect();
    let m = raw_moments(&xs);
    let target = [0.0, 1.0, 0.0, 3.0];
    let tol = [0.01, 0.02, 0.03, 0.06];
    let moments_ok = (0..4).all(|i| (m[i] - target[i]).abs() <= tol[i]);
    let normal = Normal::standard();
    let d = ks_statistic(&xs, |x| normal.cdf(x));
    let crit = ks_critical(N, 0.01);
    Verdict {
        pass: moments_ok && d < crit,
        detail: format!(
            "moments [{:.4}, {:.4}, {:.4}, {:.4}], KS D={d:.5} vs {crit:.5}",
            m[0], m[1], m[2], m[3]
        ),
    }
}

fn coupling() -> Verdict {
    let (code16, r16) = cli(&["diag", "coupling", "--m", "16", "--delta", "0.0078125", "--samples", "100000"], None);
    let (code2, r2) = cli(&["diag", "coupling", "--m", "2", "--delta", "0.0078125", "--samples", "100000"], None);
    let (r16, r2) = (json(&r16), json(&r2));
    Verdict {
        pass: code16 == 0 && r16["pass"] == true && code2 == 1 && r2["pass"] == false,
        detail: format!(
            "M=16 rate {} >= {:.5}; M=2 rate {} (control fails: exit {code2})",
            r16["result"]["rate"], r16["result"]["threshold"].as_f64().unwrap_or(f64::NAN), r2["result"]["rate"]
        ),
    }
}

fn hermite_stack() -> Verdict {
    let rule = GaussHermiteRule::new(10);
    let mut worst_orth: f64 = 0.0;
    for n in 1..=2 {
        let indices = MultiIndex::all_up_to(n, 6);
        for a in &indices {
            for b in &indices {
                let e = rule.expect(n, |y| hermite_eval(a, y) * hermite_eval(b, y));
                let want = if a == b { 1.0 } else { 0.0 };
                worst_orth = worst_orth.max((e - want).abs());
            }
        }
    }

    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let mut worst_trip: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(1..=3);
        let degree = rng.random_range(0..=6);
        let e = HermiteExpansion::random(&mut rng, n, degree);
        let back = to_hermite(&from_hermite(&e));
        for (alpha, c) in e.coeffs() {
            worst_trip = worst_trip.max((back.coeff(alpha) - c).abs() / c.abs().max(1.0));
        }
    }

    let y2 = MonomialPoly::from_terms(1, [(MultiIndex::var(0, 2), 1.0)]).expect("valid");
    let norm_err = (to_hermite(&y2).l2_norm() - 3f64.sqrt()).abs();

    let e = HermiteExpansion::random(&mut rng, 2, 5);
    let composed = e.noise_operator(0.75).noise_operator(0.5);
    let direct = e.noise_operator(0.375);
    let semigroup_exact = composed == direct;

    Verdict {
        pass: worst_orth <= 1e-9 && worst_trip <= 1e-12 && norm_err <= 1e-12 && semigroup_exact,
        detail: format!(
            "orthonormality err {worst_orth:.2e}, round trip err {worst_trip:.2e}, |y^2| err {norm_err:.2e}, U_0.75 U_0.5 == U_0.375: {semigroup_exact}"
        ),
    }
}

fn expansion_identity() -> Verdict {
    let clean = expansion_identity_check(50, 0x5eed, 1e-8, None).expect("check runs");
    let faulty = expansion_identity_check(50, 0x5eed, 1e-8, Some(1e-3)).expect("check runs");
    Verdict {
        pass: clean.pass && !faulty.pass,
        detail: format!(
            "max rel err {:.2e} over {} cases ({} exact at lambda=0); injected fault err {:.2e} detected: {}",
            clean.max_relative_error, clean.cases, clean.exact_cases, faulty.max_relative_error, !faulty.pass
        ),
    }
}

fn lemma_suites() -> Verdict {
    let r = lemma_suite(&LemmaSuiteConfig::default()).expect("suite runs");
    let failed: Vec<&str> = r.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let margins: Vec<String> = r
        .checks
        .iter()
        .filter(|c| ["hypercontractivity", "anti_concentration", "perturbation", "gradient_growth"].contains(&c.name.as_str()))
        .map(|c| format!("{} {:.4} vs {:.4}", c.name, c.measured, c.bound))
        .collect();
    Verdict {
        pass: r.pass,
        detail: format!("{} checks, failed {failed:?}; {}", r.checks.len(), margins.join(", ")),
    }
}

fn fooling() -> Verdict {
    const N: u64 = 200_000;
    let (k, d, n) = (2, 2, 4);
    let params = derive_params(k, d, 0.1, n, &ParamOverrides::desk()).expect("desk params");
    let family = random_family(1, n, d, k, true).expect("family");
    let seeds = GapSeeds::new(b"acceptance", 7);
    let r = fooling_gap(&family, &params, N, &seeds, 0.02).expect("gap runs");

    let weak = derive_params(
        k,
        d,
        0.1,
        n,
        &ParamOverrides {
            wiseness: Some(1),
            ..ParamOverrides::desk()
        },
    )
    .expect("control params");
    let control = fooling_gap(&control_family(n).expect("control"), &weak, N, &seeds, 0.02).expect("gap runs");
    Verdict {
        pass: r.gap <= 0.02 && control.gap > 0.05,
        detail: format!(
            "gap {:.4} (prg {:.4}, gaussian {:.4}, half-widths {:.4}); wiseness-1 control gap {:.4}",
            r.gap, r.prg_estimate.mean, r.gaussian_estimate.mean, r.gap_bound, control.gap
        ),
    }
}

fn seed_length_accounting() -> Verdict {
    let mut mismatches = 0;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for k in [1usize, 2, 4] {
        for d in [1u32, 2, 4] {
            for eps in [0.5, 0.1] {
                for n in [4usize, 64] {
                    let p = derive_params(k, d, eps, n, &ParamOverrides::default()).expect("params");
                    // the smallest prime at or above 2^(M+32) lies below 2^(M+33)
                    let closed = p.l as u128 * 2 * (2 * d as u128 * p.r as u128) * (p.m as u128 + 33);
                    if p.seed_length() != closed {
                        mismatches += 1;
                    }
                    let ratio = p.seed_length() as f64 / asymptotic_seed_shape(k, d, eps, n);
                    lo = lo.min(ratio);
                    hi = hi.max(ratio);
                }
            }
        }
    }
    Verdict {
        pass: mismatches == 0 && hi <= SEED_RATIO_CEILING && lo > 0.0,
        detail: format!("36 grid points, {mismatches} closed-form mismatches; ratio in [{lo:.1}, {hi:.1}] <= {SEED_RATIO_CEILING:e}"),
    }
}

fn determinism() -> Verdict {
    let gen = [
        "gen", "--k", "2", "--d", "2", "--eps", "0.1", "--n", "4", "--desk", "--seed-hex", "d00d", "--count", "8",
    ];
    let fool = [
        "fool", "--k", "2", "--d", "2", "--eps", "0.1", "--n", "4", "--desk", "--seed-hex", "d00d", "--samples",
        "20000", "--family-seed", "3",
    ];
    let mut ok = true;
    let mut sizes = Vec::new();
    for args in [&gen[..], &fool[..]] {
        let runs: Vec<(i32, Vec<u8>)> = [None, Some("1"), Some("8")].iter().map(|t| cli(args, *t)).collect();
        let again = cli(args, Some("8"));
        ok &= runs.iter().all(|r| r.0 == 0 && r.1 == runs[0].1) && again.1 == runs[0].1;
        sizes.push(runs[0].1.len());
    }
    Verdict {
        pass: ok,
        detail: format!("gen ({} bytes) and fool ({} bytes) identical across runs and threads {{default, 1, 8}}", sizes[0], sizes[1]),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 exact t-wise independence", Duration::from_secs(5), independence),
        ("2 Box-Muller moments and KS", Duration::from_secs(10), box_muller_moments),
        ("3 grid coupling", Duration::from_secs(5), coupling),
        ("4 Hermite stack", Duration::from_secs(5), hermite_stack),
        ("5 shift expansion identity", Duration::from_secs(10), expansion_identity),
        ("6 analytic check suite", Duration::from_secs(60), lemma_suites),
        ("7 end-to-end fooling gap", Duration::from_secs(300), fooling),
        ("8 seed-length accounting", Duration::from_secs(1), seed_length_accounting),
        ("9 determinism", Duration::from_secs(60), determinism),
    ];
    let mut all = true;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let v = check();
        let took = start.elapsed();
        let pass = v.pass && took <= budget;
        all &= pass;
        println!(
            "{} criterion {name}: {} [{:.2}s of {}s]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    if all {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
