//! Numerical validation of the analytic facts the construction leans on:
//! the Hermite shift expansion, hypercontractivity, anti-concentration,
//! perturbation, gradient growth, derivative concentration and the bump
//! function derivative bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use serde_json::json;

use crate::error::Result;
use crate::mollifier::{derivative_bound_check, log_ratio_bump_check};
use crate::poly::{from_hermite, gradient_norm, shift_expansion, smooth, HermiteExpansion, MonomialPoly, MultiIndex};

use super::checks::anti_concentration_test;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaSuiteConfig {
    pub seed: u64,
    pub expansion_cases: usize,
    pub expansion_tolerance: f64,
    pub hypercontractivity_trials: usize,
    pub hypercontractivity_samples: u64,
    pub anticoncentration_c: f64,
    pub anticoncentration_degree: u32,
    pub anticoncentration_eps: f64,
    pub anticoncentration_samples: u64,
    pub anticoncentration_trials: u32,
    pub anticoncentration_dimension: usize,
    pub gradient_c: f64,
    pub gradient_eps: f64,
    pub gradient_degree: u32,
    pub gradient_points: u64,
    pub perturbation_c: f64,
    pub perturbation_box: f64,
    pub perturbation_delta: f64,
    pub perturbation_degree: u32,
    pub perturbation_dimension: usize,
    pub perturbation_trials: usize,
}

impl Default for LemmaSuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0x5eed,
            expansion_cases: 50,
            expansion_tolerance: 1e-8,
            hypercontractivity_trials: 5,
            hypercontractivity_samples: 100_000,
            anticoncentration_c: 5.0,
            anticoncentration_degree: 2,
            anticoncentration_eps: 0.01,
            anticoncentration_samples: 100_000,
            anticoncentration_trials: 20,
            anticoncentration_dimension: 3,
            gradient_c: 10.0,
            gradient_eps: 0.05,
            gradient_degree: 3,
            gradient_points: 10_000,
            perturbation_c: 8.0,
            perturbation_box: 2.0,
            perturbation_delta: 1e-3,
            perturbation_degree: 3,
            perturbation_dimension: 4,
            perturbation_trials: 1000,
        }
    }
}

/// One aggregated check. `margin` is signed so that positive means slack.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
    pub detail: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaSuiteReport {
    pub config: LemmaSuiteConfig,
    pub checks: Vec<LemmaCheck>,
    pub pass: bool,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_vec(rng: &mut ChaCha20Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn unit_poly(rng: &mut ChaCha20Rng, n: usize, d: u32) -> MonomialPoly {
    let e = HermiteExpansion::random(rng, n, d);
    from_hermite(&e.scale(1.0 / e.l2_norm()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionIdentityReport {
    pub cases: usize,
    pub points_per_case: usize,
    pub max_relative_error: f64,
    /// Cases at `lambda = 0` whose expansion reproduced `p(x)` exactly.
    pub exact_cases: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compare `shift_expansion(p, x, lambda)` evaluated at `y` with `p(x + sqrt(lambda) y)`
/// on random instances (`deg <= 4`, `n <= 3`, `lambda` cycling through 0, 0.1, 0.5).
/// `corruption`, when set, is added to the highest coefficient of every expansion
/// before evaluation, to confirm the comparison can fail.
pub fn expansion_identity_check(
    cases: usize,
    rng_seed: u64,
    tolerance: f64,
    corruption: Option<f64>,
) -> Result<ExpansionIdentityReport> {
    const LAMBDAS: [f64; 3] = [0.0, 0.1, 0.5];
    const POINTS: usize = 20;
    let mut rng = rng_for(rng_seed, 0);
    let mut max_relative_error: f64 = 0.0;
    let mut exact_cases = 0;
    for case in 0..cases {
        let n = rng.random_range(1..=3);
        let d = rng.random_range(1..=4);
        let lambda = LAMBDAS[case % LAMBDAS.len()];
        let p = unit_poly(&mut rng, n, d);
        let x = gaussian_vec(&mut rng, n);
        let mut e = shift_expansion(&p, &x, lambda)?;
        if let Some(bump) = corruption {
            let (top, c) = e
                .coeffs()
                .max_by_key(|(a, _)| a.total())
                .map(|(a, c)| (a.clone(), c))
                .unwrap_or((MultiIndex::zero(), 0.0));
            e.add_coeff(top, bump * c.abs().max(1.0));
        }
        let mut case_err: f64 = 0.0;
        for _ in 0..POINTS {
            let y = gaussian_vec(&mut rng, n);
            let shifted: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + lambda.sqrt() * b).collect();
            let direct = p.eval(&shifted)?;
            let expanded = e.eval(&y)?;
            case_err = case_err.max((direct - expanded).abs() / direct.abs().max(1.0));
        }
        if lambda == 0.0 && case_err == 0.0 {
            exact_cases += 1;
        }
        max_relative_error = max_relative_error.max(case_err);
    }
    Ok(ExpansionIdentityReport {
        cases,
        points_per_case: POINTS,
        max_relative_error,
        exact_cases,
        tolerance,
        pass: max_relative_error <= tolerance,
    })
}

/// Monte Carlo `||f||_4` against the exact `||U_{sqrt 3} f||_2`.
fn hypercontractivity(cfg: &LemmaSuiteConfig) -> Result<LemmaCheck> {
    let mut worst_margin = f64::INFINITY;
    let mut trials = Vec::new();
    for trial in 0..cfg.hypercontractivity_trials {
        let mut rng = rng_for(cfg.seed, 100 + trial as u64);
        let n = 3;
        let d = rng.random_range(1..=3);
        let e = HermiteExpansion::random(&mut rng, n, d);
        let f = from_hermite(&e);
        let rhs = e.noise_operator(3f64.sqrt()).l2_norm();
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..cfg.hypercontractivity_samples {
            let v = f.eval_unchecked(&gaussian_vec(&mut rng, n)).powi(4);
            s1 += v;
            s2 += v * v;
        }
        let m = cfg.hypercontractivity_samples as f64;
        let m4 = s1 / m;
        let sd = (s2 / m - m4 * m4).max(0.0).sqrt();
        let norm4 = m4.powf(0.25);
        // delta method for the fourth root
        let se = sd / m.sqrt() / (4.0 * m4.powf(0.75));
        let margin = rhs + 3.0 * se - norm4;
        worst_margin = worst_margin.min(margin);
        trials.push(json!({"degree": d, "norm4": norm4, "noised_norm2": rhs, "se": se}));
    }
    Ok(LemmaCheck {
        name: "hypercontractivity".into(),
        pass: worst_margin >= 0.0,
        measured: worst_margin,
        bound: 0.0,
        margin: worst_margin,
        detail: json!({"p": 4, "trials": trials}),
    })
}

fn anti_concentration(cfg: &LemmaSuiteConfig) -> Result<LemmaCheck> {
    let r = anti_concentration_test(
        cfg.anticoncentration_degree,
        cfg.anticoncentration_eps,
        cfg.anticoncentration_samples,
        cfg.anticoncentration_trials,
        cfg.anticoncentration_c,
        cfg.anticoncentration_dimension,
        cfg.seed ^ 0xa17c,
    )?;
    Ok(LemmaCheck {
        name: "anti_concentration".into(),
        pass: r.pass,
        measured: r.worst,
        bound: r.bound,
        margin: r.bound + 3.0 * r.standard_error - r.worst,
        detail: serde_json::to_value(&r).expect("report serializes"),
    })
}

/// `|p(x) - p(x')| <= delta n^{d/2} (c B)^d` on random unit-norm polynomials.
fn perturbation(cfg: &LemmaSuiteConfig) -> Result<LemmaCheck> {
    let (n, d, b, delta) = (
        cfg.perturbation_dimension,
        cfg.perturbation_degree,
        cfg.perturbation_box,
        cfg.perturbation_delta,
    );
    let bound = delta * (n as f64).powf(d as f64 / 2.0) * (cfg.perturbation_c * b).powi(d as i32);
    let mut rng = rng_for(cfg.seed, 200);
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.perturbation_trials {
        let p = unit_poly(&mut rng, n, d);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-b..=b)).collect();
        let x2: Vec<f64> = x
            .iter()
            .map(|v| (v + rng.random_range(-delta..=delta)).clamp(-b, b))
            .collect();
        worst = worst.max((p.eval(&x)? - p.eval(&x2)?).abs());
    }
    Ok(LemmaCheck {
        name: "perturbation".into(),
        pass: worst <= bound,
        measured: worst,
        bound,
        margin: bound - worst,
        detail: json!({"n": n, "d": d, "box": b, "delta": delta, "c": cfg.perturbation_c, "trials": cfg.perturbation_trials}),
    })
}

/// Frequency of `||∇^t p(y)|| <= (c/eps) ||∇^{t-1} p(y)||` for all `1 <= t <= d`.
fn gradient_growth(cfg: &LemmaSuiteConfig) -> Result<LemmaCheck> {
    let n = 3;
    let d = cfg.gradient_degree;
    let mut rng = rng_for(cfg.seed, 300);
    let p = unit_poly(&mut rng, n, d);
    let ratio = cfg.gradient_c / cfg.gradient_eps;
    let mut hits = 0u64;
    for _ in 0..cfg.gradient_points {
        let y = gaussian_vec(&mut rng, n);
        let norms: Vec<f64> = (0..=d).map(|t| gradient_norm(&p, &y, t)).collect::<Result<_>>()?;
        hits += norms.windows(2).all(|w| w[1] <= ratio * w[0]) as u64;
    }
    let m = cfg.gradient_points as f64;
    let rate = hits as f64 / m;
    let bound = 1.0 - cfg.gradient_eps * (d as f64).powi(3);
    let b = bound.clamp(0.0, 1.0);
    let se = (b * (1.0 - b) / m).sqrt();
    Ok(LemmaCheck {
        name: "gradient_growth".into(),
        pass: rate >= bound - 3.0 * se,
        measured: rate,
        bound,
        margin: rate - bound + 3.0 * se,
        detail: json!({"c": cfg.gradient_c, "eps": cfg.gradient_eps, "d": d, "points": cfg.gradient_points, "vacuous": bound <= 0.0}),
    })
}

/// Second-moment form of derivative concentration (R = 2). The left side
/// `E_y ||∇^t p(x + sqrt(lambda) y) - ∇^t phi(x)||^2` is the non-constant Hermite
/// mass of each `∂^alpha p` shifted to `x`; the right side is
/// `sum_{j > t} (lambda d R)^{j-t} ||∇^j phi(x)||^2`. A Monte Carlo estimate of the
/// left side is reported alongside.
fn derivative_concentration(cfg: &LemmaSuiteConfig) -> Result<LemmaCheck> {
    const R: u32 = 2;
    const MC: usize = 20_000;
    let mut rng = rng_for(cfg.seed, 400);
    let mut worst_ratio: f64 = 0.0;
    let mut mc_gap: f64 = 0.0;
    let mut cases = Vec::new();
    for case in 0..6 {
        let n = 2;
        let d = 3;
        let lambda = [0.1, 0.5][case % 2];
        let p = unit_poly(&mut rng, n, d);
        let x = gaussian_vec(&mut rng, n);
        let phi = smooth(&p, lambda)?;
        for t in 0..d {
            let alphas = MultiIndex::all_up_to(n, t).into_iter().filter(|a| a.total() == t);
            let mut lhs = 0.0;
            let mut derivs = Vec::new();
            for alpha in alphas {
                let dp = p.derivative(&alpha);
                let e = shift_expansion(&dp, &x, lambda)?;
                let c0 = e.coeff(&MultiIndex::zero());
                lhs += e.l2_norm().powi(2) - c0 * c0;
                derivs.push((dp, c0));
            }
            let rhs: f64 = (t + 1..=d)
                .map(|j| {
                    let g = gradient_norm(&phi, &x, j)?;
                    Ok((lambda * (d * R) as f64).powi((j - t) as i32) * g * g)
                })
                .sum::<Result<f64>>()?;
            let mut mc = 0.0;
            for _ in 0..MC {
                let y = gaussian_vec(&mut rng, n);
                let shifted: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + lambda.sqrt() * b).collect();
                mc += derivs
                    .iter()
                    .map(|(dp, c0)| (dp.eval_unchecked(&shifted) - c0).powi(2))
                    .sum::<f64>();
            }
            mc /= MC as f64;
            if rhs > 0.0 {
                worst_ratio = worst_ratio.max(lhs / rhs);
            } else if lhs > 1e-12 {
                worst_ratio = f64::INFINITY;
            }
            if lhs > 1e-12 {
                mc_gap = mc_gap.max((mc - lhs).abs() / lhs);
            }
            cases.push(json!({"lambda": lambda, "t": t, "lhs": lhs, "lhs_monte_carlo": mc, "rhs": rhs}));
        }
    }
    Ok(LemmaCheck {
        name: "derivative_concentration".into(),
        pass: worst_ratio <= 1.0,
        measured: worst_ratio,
        bound: 1.0,
        margin: 1.0 - worst_ratio,
        detail: json!({"R": R, "max_monte_carlo_relative_gap": mc_gap, "cases": cases}),
    })
}

fn expansion(cfg: &LemmaSuiteConfig) -> Result<Vec<LemmaCheck>> {
    let clean = expansion_identity_check(cfg.expansion_cases, cfg.seed, cfg.expansion_tolerance, None)?;
    let faulty = expansion_identity_check(cfg.expansion_cases, cfg.seed, cfg.expansion_tolerance, Some(1e-3))?;
    Ok(vec![
        LemmaCheck {
            name: "expansion_identity".into(),
            pass: clean.pass,
            measured: clean.max_relative_error,
            bound: clean.tolerance,
            margin: clean.tolerance - clean.max_relative_error,
            detail: serde_json::to_value(&clean).expect("report serializes"),
        },
        LemmaCheck {
            name: "expansion_identity_fault_injection".into(),
            pass: !faulty.pass,
            measured: faulty.max_relative_error,
            bound: faulty.tolerance,
            margin: faulty.max_relative_error - faulty.tolerance,
            detail: serde_json::to_value(&faulty).expect("report serializes"),
        },
    ])
}

fn mollifier_checks() -> Result<Vec<LemmaCheck>> {
    let mut out = Vec::new();
    for t in 2..=4 {
        let r = derivative_bound_check(t)?;
        let measured = r.psi_max.max(r.rho_max);
        out.push(LemmaCheck {
            name: format!("bump_derivative_order_{t}"),
            pass: r.pass,
            measured,
            bound: r.bound,
            margin: r.bound - measured,
            detail: serde_json::to_value(&r).expect("report serializes"),
        });
    }
    let worst = [(2, 0), (1, 1), (0, 2), (2, 1)]
        .into_iter()
        .map(|(a, b)| log_ratio_bump_check(a, b, 0.5))
        .fold(0.0, f64::max);
    out.push(LemmaCheck {
        name: "bump_log_ratio".into(),
        pass: worst <= 1.0,
        measured: worst,
        bound: 1.0,
        margin: 1.0 - worst,
        detail: json!({"orders": [[2, 0], [1, 1], [0, 2], [2, 1]], "shift": 0.5}),
    });
    Ok(out)
}

/// Run every check and aggregate.
pub fn lemma_suite(cfg: &LemmaSuiteConfig) -> Result<LemmaSuiteReport> {
    let mut checks = expansion(cfg)?;
    checks.push(hypercontractivity(cfg)?);
    checks.push(anti_concentration(cfg)?);
    checks.push(perturbation(cfg)?);
    checks.push(gradient_growth(cfg)?);
    checks.push(derivative_concentration(cfg)?);
    checks.extend(mollifier_checks()?);
    let pass = checks.iter().all(|c| c.pass);
    Ok(LemmaSuiteReport {
        config: cfg.clone(),
        checks,
        pass,
    })
}
