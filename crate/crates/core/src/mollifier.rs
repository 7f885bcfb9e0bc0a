//! Bump functions and the derivative-control mollifier.
//!
//! `G(x) = prod_i prod_{t<d} rho(ln(||∇^t p_i(x)||^2 / (16 eps^2 ||∇^{t+1} p_i(x)||^2)))`
//! is 1 where every derivative order of every polynomial is dominated by its
//! predecessor and 0 as soon as one order is not.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::gradient_norm;
use crate::ptf::PtfFunction;

/// `exp(1 / (x^2 - 1))` on `|x| < 1`, zero elsewhere.
pub fn psi(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (1.0 / (x * x - 1.0)).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`, `e * psi(1 - x)` in between.
pub fn rho(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let s = x - 1.0;
        (1.0 + 1.0 / (s * s - 1.0)).exp()
    }
}

#[derive(Clone, Debug)]
pub struct MollifierConfig<'a> {
    eps: f64,
    family: &'a PtfFunction,
}

impl<'a> MollifierConfig<'a> {
    pub fn new(eps: f64, family: &'a PtfFunction) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1)")));
        }
        Ok(Self { eps, family })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn family(&self) -> &PtfFunction {
        self.family
    }
}

/// One `(i, t)` factor of the product.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct MollifierFactor {
    pub poly: usize,
    pub order: u32,
    pub norm_t: f64,
    pub norm_next: f64,
    /// `None` when the ratio is `0/0`, `0` or `inf`.
    pub log_ratio: Option<f64>,
    pub factor: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct MollifierValue {
    pub g: f64,
    pub factors: Vec<MollifierFactor>,
}

fn factor_for(norm_t: f64, norm_next: f64, eps: f64) -> (Option<f64>, f64) {
    match (norm_t == 0.0, norm_next == 0.0) {
        // vacuous constraint
        (true, true) => (None, 1.0),
        (true, false) => (None, 0.0),
        (false, true) => (None, 1.0),
        (false, false) => {
            let arg = 2.0 * norm_t.ln() - 2.0 * norm_next.ln() - (16.0 * eps * eps).ln();
            (Some(arg), rho(arg))
        }
    }
}

/// `G(x)` with every factor itemized. `d` is the largest degree in the family.
pub fn mollifier_g(cfg: &MollifierConfig<'_>, x: &[f64]) -> Result<MollifierValue> {
    let family = cfg.family;
    if x.len() != family.dimension() {
        return Err(Error::DimensionMismatch {
            expected: family.dimension(),
            actual: x.len(),
        });
    }
    let d = family.degree();
    let mut factors = Vec::with_capacity(family.k() * d as usize);
    let mut g = 1.0;
    for (i, p) in family.polys().iter().enumerate() {
        let norms: Vec<f64> = (0..=d)
            .map(|t| gradient_norm(p, x, t))
            .collect::<Result<_>>()?;
        for t in 0..d {
            let (log_ratio, factor) = factor_for(norms[t as usize], norms[t as usize + 1], cfg.eps);
            g *= factor;
            factors.push(MollifierFactor {
                poly: i,
                order: t,
                norm_t: norms[t as usize],
                norm_next: norms[t as usize + 1],
                log_ratio,
                factor,
            });
        }
    }
    Ok(MollifierValue { g, factors })
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Central finite difference of order `t` with step `h`.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, t: u32, h: f64) -> f64 {
    let half = t as f64 / 2.0;
    (0..=t)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(t, i) * f(x + (half - i as f64) * h)
        })
        .sum::<f64>()
        / h.powi(t as i32)
}

fn fd_step(t: u32) -> f64 {
    match t {
        1 => 1e-6,
        2 => 1e-4,
        _ => 1e-3,
    }
}

/// Finite-difference estimate of bump-function derivative magnitudes against the
/// surrogate envelope `t^(6t)`.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct DerivativeBoundReport {
    pub order: u32,
    pub grid_points: usize,
    pub psi_max: f64,
    pub rho_max: f64,
    pub bound: f64,
    /// `psi^(t)` vanishes on a grid outside `[-1 - margin, 1 + margin]`.
    pub psi_vanishes_outside_support: bool,
    pub pass: bool,
}

pub const DERIVATIVE_GRID_POINTS: usize = 1000;

pub fn derivative_bound_check(order: u32) -> Result<DerivativeBoundReport> {
    if !(1..=4).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference check supports orders 1..=4, got {order}"
        )));
    }
    let h = fd_step(order);
    let n = DERIVATIVE_GRID_POINTS;
    let grid = |lo: f64, hi: f64| (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64);
    let psi_max = grid(-1.25, 1.25)
        .map(|x| central_difference(psi, x, order, h).abs())
        .fold(0.0, f64::max);
    let rho_max = grid(-0.25, 1.25)
        .map(|x| central_difference(rho, x, order, h).abs())
        .fold(0.0, f64::max);
    let margin = 0.05;
    let psi_vanishes_outside_support = grid(1.0 + margin, 3.0)
        .chain(grid(-3.0, -1.0 - margin))
        .all(|x| central_difference(psi, x, order, h) == 0.0);
    let bound = (order as f64).powi(6 * order as i32);
    Ok(DerivativeBoundReport {
        order,
        grid_points: n,
        psi_max,
        rho_max,
        bound,
        psi_vanishes_outside_support,
        pass: psi_max <= bound && rho_max <= bound && psi_vanishes_outside_support,
    })
}

/// Spot check of `|∂_u^a ∂_v^b rho(ln u - ln v + c)| <= (a+b)^{6(a+b)} / (|u|^a |v|^b)`
/// on a grid in `[0.25, 4]^2`. Returns the largest observed ratio to the envelope.
pub fn log_ratio_bump_check(a: u32, b: u32, shift: f64) -> f64 {
    let r = |u: f64, v: f64| rho(u.ln() - v.ln() + shift);
    let order = a + b;
    let envelope = (order as f64).powi(6 * order as i32);
    let steps = 40;
    let mut worst: f64 = 0.0;
    for i in 0..steps {
        for j in 0..steps {
            let u = 0.25 * 16f64.powf(i as f64 / (steps - 1) as f64);
            let v = 0.25 * 16f64.powf(j as f64 / (steps - 1) as f64);
            let h = 1e-3 * u.min(v);
            // mixed difference as a tensor product of 1-D stencils
            let value = central_difference(
                |uu| central_difference(|vv| r(uu, vv), v, b, h),
                u,
                a,
                h,
            );
            let scaled = value.abs() * u.powi(a as i32) * v.powi(b as i32);
            worst = worst.max(scaled / envelope);
        }
    }
    worst
}
