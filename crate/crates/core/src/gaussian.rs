//! Box–Muller sampling from uniform grid values.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field_hash::KWisePolySource;

/// Two uniforms feeding one Box–Muller draw. `u` must be strictly positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnitPair {
    u: f64,
    v: f64,
}

impl UnitPair {
    /// `u` in `(0, 1]`, `v` in `[0, 1]` (`v = 0` and `v = 1` give the same cosine).
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::Domain(format!("u = {u} outside (0, 1]")));
        }
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("v = {v} outside [0, 1]")));
        }
        Ok(Self { u, v })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }
}

/// `sqrt(-2 ln u) * cos(2 pi v)`, the cosine branch only.
pub fn box_muller(pair: UnitPair) -> f64 {
    (-2.0 * pair.u.ln()).sqrt() * (2.0 * PI * pair.v).cos()
}

/// One discretized Gaussian coordinate `X_{i,j}` from the block's two sources.
pub fn sample_block_coordinate(
    u_src: &KWisePolySource,
    v_src: &KWisePolySource,
    j: u64,
    precision: u32,
) -> Result<f64> {
    let u = u_src.grid_at(j, precision)?.value();
    let v = v_src.grid_at(j, precision)?.value();
    Ok(box_muller(UnitPair { u, v }))
}

/// An exact Box–Muller draw alongside its grid-truncated counterpart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoupledSample {
    pub exact_y: f64,
    pub truncated_x: f64,
    pub delta_bound: f64,
}

impl CoupledSample {
    pub fn within_bound(&self) -> bool {
        (self.exact_y - self.truncated_x).abs() <= self.delta_bound
    }
}

/// Default closeness threshold for an `precision`-bit grid: `2^(-precision/2 + 1)`.
pub fn default_delta(precision: u32) -> f64 {
    (1.0 - precision as f64 / 2.0).exp2()
}

/// Round `x` down to a multiple of `2^-precision`.
pub fn floor_to_grid(x: f64, precision: u32) -> f64 {
    let scale = (precision as f64).exp2();
    (x * scale).floor() / scale
}

/// Couple `pair` with its floor-to-grid rounding (u clamped to at least `2^-precision`).
pub fn coupled_sample(pair: UnitPair, precision: u32, delta: f64) -> CoupledSample {
    let floor_u = (-(precision as f64)).exp2();
    let u = floor_to_grid(pair.u, precision).max(floor_u);
    let v = floor_to_grid(pair.v, precision);
    CoupledSample {
        exact_y: box_muller(pair),
        truncated_x: box_muller(UnitPair { u, v }),
        delta_bound: delta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_hash::PrimeField;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn closed_form_points() {
        assert_eq!(box_muller(UnitPair::new(1.0, 0.3).unwrap()), 0.0);
        let x = box_muller(UnitPair::new((-0.5f64).exp(), 0.0).unwrap());
        assert!((x - 1.0).abs() < 1e-15);
        let y = box_muller(UnitPair::new(0.37, 0.25).unwrap());
        assert!(y.abs() < 1e-15);
    }

    #[test]
    fn zero_u_is_domain_error() {
        assert!(matches!(UnitPair::new(0.0, 0.5), Err(Error::Domain(_))));
        assert!(UnitPair::new(0.5, 1.5).is_err());
    }

    #[test]
    fn half_period_shift_negates() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let u = 1.0 - rng.random::<f64>();
            let v: f64 = rng.random();
            let shifted = (v + 0.5) % 1.0;
            let a = box_muller(UnitPair::new(u, v).unwrap());
            let b = box_muller(UnitPair::new(u, shifted).unwrap());
            assert!((a + b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn zero_sources_hit_grid_floor() {
        let field = PrimeField::smallest_at_least_pow2(56);
        let zero = KWisePolySource::from_u64_coeffs(&field, &[0, 0], 0).unwrap();
        let m = 24;
        let x = sample_block_coordinate(&zero, &zero, 5, m).unwrap();
        let step = (-(m as f64)).exp2();
        let expect = (2.0 * m as f64 * std::f64::consts::LN_2).sqrt() * (2.0 * PI * step).cos();
        assert!((x - expect).abs() < 1e-12);
    }

    #[test]
    fn coupling_identity_on_grid() {
        let pair = UnitPair::new(0.75, 0.125).unwrap();
        let c = coupled_sample(pair, 8, default_delta(8));
        assert_eq!(c.exact_y, c.truncated_x);
        let c = coupled_sample(UnitPair::new(1.0, 1.0).unwrap(), 16, 0.0);
        assert_eq!(c.exact_y, 0.0);
        assert_eq!(c.truncated_x, 0.0);
    }

    #[test]
    fn truncation_depends_only_on_rounding() {
        let a = coupled_sample(UnitPair::new(0.50001, 0.30001).unwrap(), 10, 0.1);
        let b = coupled_sample(UnitPair::new(0.50002, 0.30002).unwrap(), 10, 0.1);
        assert_eq!(a.truncated_x, b.truncated_x);
    }

    #[test]
    fn default_delta_m16() {
        assert_eq!(default_delta(16), 2f64.powi(-7));
    }
}
