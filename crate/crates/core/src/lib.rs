//! Pseudorandom generator for Gaussian space that fools arbitrary Boolean
//! functions of a few low-degree polynomial threshold functions, together with
//! the polynomial, mollifier and statistical tooling used to validate it.
//!
//! The generator sums `L` blocks of discretized Gaussians, each block produced
//! from two limited-independence polynomial hash families over a prime field.
//!
//! ```
//! use gaussprg_core::prg::{derive_params, expand_seed, generate, ParamOverrides};
//!
//! let params = derive_params(2, 2, 0.1, 4, &ParamOverrides::desk()).unwrap();
//! let seed = expand_seed(b"example", &params);
//! let out = generate(&params, &seed).unwrap();
//! assert_eq!(out.x.len(), 4);
//! ```

pub mod error;
pub mod field_hash;
pub mod gaussian;
pub mod harness;
pub mod mollifier;
pub mod poly;
pub mod prg;
pub mod ptf;
pub mod seed;

pub use error::{Error, Result};
pub use field_hash::{derive_source, GridValue, KWisePolySource, PrimeField};
pub use gaussian::{box_muller, coupled_sample, UnitPair};
pub use harness::{estimate_mean, fooling_gap, EstimateCI, GapReport, GapSeeds};
pub use mollifier::{mollifier_g, MollifierConfig};
pub use poly::{gradient_norm, shift_expansion, smooth, HermiteExpansion, MonomialPoly, MultiIndex};
pub use prg::{derive_params, generate, seed_length, ParamOverrides, PrgOutput, PrgParams};
pub use ptf::{Combiner, PtfFunction};
