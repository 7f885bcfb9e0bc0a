//! Sparse multivariate polynomials on Gaussian space.
//!
//! Two representations are kept: the monomial basis ([`MonomialPoly`]) for
//! evaluation and differentiation, and the normalized Hermite basis
//! ([`HermiteExpansion`]) for norms and the noise operator.

mod hermite;
mod multi_index;
pub mod quadrature;

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use hermite::{from_hermite, hermite_eval, hermite_h, to_hermite};
pub use multi_index::MultiIndex;
use multi_index::falling_factorial;

/// Highest per-coordinate power the exact basis change supports.
pub const MAX_POWER: u32 = 32;

/// `sum_alpha c_alpha x^alpha` on `R^dimension`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialPoly {
    dimension: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl MonomialPoly {
    pub fn zero(dimension: usize) -> Self {
        Self {
            dimension,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dimension: usize, c: f64) -> Self {
        let mut p = Self::zero(dimension);
        p.add_term(MultiIndex::zero(), c);
        p
    }

    /// The coordinate function `x_coord`.
    pub fn var(dimension: usize, coord: usize) -> Self {
        Self::from_terms(dimension, [(MultiIndex::var(coord, 1), 1.0)])
            .expect("coordinate within dimension")
    }

    pub fn from_terms(
        dimension: usize,
        terms: impl IntoIterator<Item = (MultiIndex, f64)>,
    ) -> Result<Self> {
        let mut p = Self::zero(dimension);
        for (alpha, c) in terms {
            if alpha.min_dimension() > dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    actual: alpha.min_dimension(),
                });
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    /// Adds `c x^alpha`, dropping the term if the coefficient cancels to zero.
    pub fn add_term(&mut self, alpha: MultiIndex, c: f64) {
        debug_assert!(alpha.min_dimension() <= self.dimension);
        let entry = self.terms.entry(alpha).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.retain(|_, v| *v != 0.0);
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::total).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(a, &c)| (a, c))
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> f64 {
        self.terms.get(alpha).copied().unwrap_or(0.0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(a, &c)| c * a.monomial_at(x)).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = Self::zero(self.dimension);
        for (a, &c) in &self.terms {
            out.add_term(a.clone(), c * factor);
        }
        out
    }

    /// `x -> p(s x)`.
    pub fn scale_inputs(&self, s: f64) -> Self {
        let mut out = Self::zero(self.dimension);
        for (a, &c) in &self.terms {
            out.add_term(a.clone(), c * s.powi(a.total() as i32));
        }
        out
    }

    /// `∂^alpha p`
    pub fn derivative(&self, alpha: &MultiIndex) -> Self {
        let mut out = Self::zero(self.dimension);
        for (beta, &c) in &self.terms {
            if let Some(rest) = beta.checked_sub(alpha) {
                let factor: f64 = alpha
                    .iter()
                    .map(|(coord, k)| falling_factorial(beta.get(coord), k))
                    .product();
                out.add_term(rest, c * factor);
            }
        }
        out
    }

    /// All nonzero `∂^alpha p(x)` with `|alpha| = order`.
    pub fn derivatives_at(&self, x: &[f64], order: u32) -> Result<BTreeMap<MultiIndex, f64>> {
        self.check_dim(x)?;
        let mut acc: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        for (beta, &c) in &self.terms {
            for alpha in beta.sub_indices_of_order(order) {
                let factor: f64 = alpha
                    .iter()
                    .map(|(coord, k)| falling_factorial(beta.get(coord), k))
                    .product();
                let rest = beta.checked_sub(&alpha).expect("sub-index");
                *acc.entry(alpha).or_insert(0.0) += c * factor * rest.monomial_at(x);
            }
        }
        Ok(acc)
    }
}

/// `||∇^t p(x)|| = sqrt(sum_{|alpha| = t} (∂^alpha p(x))^2)`, summing over multi-indices.
pub fn gradient_norm(p: &MonomialPoly, x: &[f64], order: u32) -> Result<f64> {
    Ok(p.derivatives_at(x, order)?
        .values()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt())
}

/// `sum_alpha c_alpha h_alpha(y)` in the orthonormal Hermite basis.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteExpansion {
    dimension: usize,
    coeffs: BTreeMap<MultiIndex, f64>,
}

impl HermiteExpansion {
    pub fn zero(dimension: usize) -> Self {
        Self {
            dimension,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_coeffs(
        dimension: usize,
        coeffs: impl IntoIterator<Item = (MultiIndex, f64)>,
    ) -> Result<Self> {
        let mut e = Self::zero(dimension);
        for (alpha, c) in coeffs {
            if alpha.min_dimension() > dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    actual: alpha.min_dimension(),
                });
            }
            e.add_coeff(alpha, c);
        }
        Ok(e)
    }

    /// i.i.d. standard normal coefficient on every `h_alpha` with `|alpha| <= degree`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dimension: usize, degree: u32) -> Self {
        let mut e = Self::zero(dimension);
        for alpha in MultiIndex::all_up_to(dimension, degree) {
            let c: f64 = rng.sample(StandardNormal);
            e.add_coeff(alpha, c);
        }
        e
    }

    pub fn add_coeff(&mut self, alpha: MultiIndex, c: f64) {
        let entry = self.coeffs.entry(alpha).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.coeffs.retain(|_, v| *v != 0.0);
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(MultiIndex::total).max().unwrap_or(0)
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> f64 {
        self.coeffs.get(alpha).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.coeffs.iter().map(|(a, &c)| (a, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: y.len(),
            });
        }
        Ok(self.coeffs.iter().map(|(a, &c)| c * hermite_eval(a, y)).sum())
    }

    /// Gaussian L2 norm; by orthonormality `sqrt(sum c_alpha^2)`.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut e = Self::zero(self.dimension);
        for (a, &c) in &self.coeffs {
            e.add_coeff(a.clone(), c * factor);
        }
        e
    }

    /// `U_rho`: multiplies the coefficient of `h_alpha` by `rho^|alpha|`.
    /// Any `rho >= 0` is accepted, including the formal extension `rho > 1`.
    pub fn noise_operator(&self, rho: f64) -> Self {
        assert!(rho >= 0.0, "noise parameter must be nonnegative, got {rho}");
        let mut e = Self::zero(self.dimension);
        for (a, &c) in &self.coeffs {
            let w = if a.is_zero() { 1.0 } else { rho.powi(a.total() as i32) };
            e.add_coeff(a.clone(), c * w);
        }
        e
    }
}

/// `l2_norm` as a free function.
pub fn l2_norm(e: &HermiteExpansion) -> f64 {
    e.l2_norm()
}

/// `noise_operator` as a free function.
pub fn noise_operator(e: &HermiteExpansion, rho: f64) -> HermiteExpansion {
    e.noise_operator(rho)
}

/// `phi(x) = E_y[p(x + sqrt(lambda) y)] = (U_rho p)(x / rho)` with `rho = sqrt(1 - lambda)`.
pub fn smooth(p: &MonomialPoly, lambda: f64) -> Result<MonomialPoly> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::Domain(format!("lambda = {lambda} outside [0, 1)")));
    }
    if lambda == 0.0 {
        return Ok(p.clone());
    }
    let rho = (1.0 - lambda).sqrt();
    let noised = from_hermite(&to_hermite(p).noise_operator(rho));
    Ok(noised.scale_inputs(1.0 / rho))
}

/// Hermite expansion in `y` of `p(x + sqrt(lambda) y)`: the coefficient of `h_alpha`
/// is `∂^alpha phi(x) lambda^{|alpha|/2} / sqrt(alpha!)`.
pub fn shift_expansion(p: &MonomialPoly, x: &[f64], lambda: f64) -> Result<HermiteExpansion> {
    let phi = smooth(p, lambda)?;
    let mut e = HermiteExpansion::zero(p.dimension());
    let top = if lambda == 0.0 { 0 } else { phi.degree() };
    for order in 0..=top {
        let weight = lambda.powf(order as f64 / 2.0);
        for (alpha, d) in phi.derivatives_at(x, order)? {
            let c = d * weight / alpha.factorial().sqrt();
            if c != 0.0 {
                e.add_coeff(alpha, c);
            }
        }
    }
    Ok(e)
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exponents: BTreeMap<String, u32>,
    coeff: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    dimension: usize,
    terms: Vec<TermJson>,
}

impl Serialize for MonomialPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .terms
            .iter()
            .map(|(a, &c)| TermJson {
                exponents: a.iter().map(|(k, e)| (k.to_string(), e)).collect(),
                coeff: c,
            })
            .collect();
        PolyJson {
            dimension: self.dimension,
            terms,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MonomialPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PolyJson::deserialize(d)?;
        let mut terms = Vec::with_capacity(raw.terms.len());
        for t in raw.terms {
            let mut pairs = Vec::with_capacity(t.exponents.len());
            for (k, e) in t.exponents {
                let coord: usize = k
                    .parse()
                    .map_err(|_| D::Error::custom(format!("bad coordinate key {k:?}")))?;
                pairs.push((coord, e));
            }
            if !t.coeff.is_finite() {
                return Err(D::Error::custom("non-finite coefficient"));
            }
            terms.push((MultiIndex::from_pairs(pairs), t.coeff));
        }
        MonomialPoly::from_terms(raw.dimension, terms).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn x2() -> MonomialPoly {
        MonomialPoly::from_terms(1, [(MultiIndex::var(0, 2), 1.0)]).unwrap()
    }

    /// Naive reference evaluator: repeated multiplication, no powi.
    fn naive_eval(p: &MonomialPoly, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for (alpha, c) in p.terms() {
            let mut m = c;
            for (coord, e) in alpha.iter() {
                for _ in 0..e {
                    m *= x[coord];
                }
            }
            total += m;
        }
        total
    }

    #[test]
    fn eval_basics() {
        assert_eq!(MonomialPoly::constant(3, 5.0).eval(&[1.0, 2.0, 3.0]).unwrap(), 5.0);
        assert_eq!(x2().eval(&[3.0]).unwrap(), 9.0);
        assert!(matches!(
            x2().eval(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eval_matches_naive() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let p = from_hermite(&HermiteExpansion::random(&mut rng, 3, 3));
        for _ in 0..10 {
            let x: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
            let a = p.eval(&x).unwrap();
            let b = naive_eval(&p, &x);
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn gradient_norm_examples() {
        let p = x2();
        assert_eq!(gradient_norm(&p, &[3.0], 0).unwrap(), 9.0);
        assert_eq!(gradient_norm(&p, &[3.0], 1).unwrap(), 6.0);
        assert_eq!(gradient_norm(&p, &[3.0], 2).unwrap(), 2.0);
        assert_eq!(gradient_norm(&p, &[3.0], 3).unwrap(), 0.0);
        let q = MonomialPoly::from_terms(1, [(MultiIndex::zero(), -4.0)]).unwrap();
        assert_eq!(gradient_norm(&q, &[3.0], 0).unwrap(), 4.0);
    }

    #[test]
    fn gradient_norm_matches_finite_differences() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let n = 3;
        let p = from_hermite(&HermiteExpansion::random(&mut rng, n, 3));
        let h = 1e-4;
        for _ in 0..5 {
            let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let f = |v: &[f64]| naive_eval(&p, v);
            let at = |i: usize, di: f64, j: usize, dj: f64| {
                let mut v = x.clone();
                v[i] += di;
                v[j] += dj;
                f(&v)
            };
            // first order
            let g1: f64 = (0..n)
                .map(|i| ((at(i, h, i, 0.0) - at(i, -h, i, 0.0)) / (2.0 * h)).powi(2))
                .sum::<f64>()
                .sqrt();
            let exact1 = gradient_norm(&p, &x, 1).unwrap();
            assert!((g1 - exact1).abs() <= 1e-5 * exact1.max(1.0), "{g1} vs {exact1}");
            // second order, one term per multi-index (i <= j)
            let mut sq = 0.0;
            for i in 0..n {
                for j in i..n {
                    let d = (at(i, h, j, h) - at(i, h, j, -h) - at(i, -h, j, h)
                        + at(i, -h, j, -h))
                        / (4.0 * h * h);
                    sq += d * d;
                }
            }
            let exact2 = gradient_norm(&p, &x, 2).unwrap();
            assert!((sq.sqrt() - exact2).abs() <= 1e-5 * exact2.max(1.0));
        }
    }

    #[test]
    fn derivative_of_monomial() {
        let p = MonomialPoly::from_terms(2, [(MultiIndex::from_dense(&[3, 2]), 2.0)]).unwrap();
        let d = p.derivative(&MultiIndex::from_dense(&[2, 1]));
        assert_eq!(d.coeff(&MultiIndex::from_dense(&[1, 1])), 2.0 * 6.0 * 2.0);
        assert_eq!(d.num_terms(), 1);
        assert!(p.derivative(&MultiIndex::var(0, 4)).is_zero());
    }

    #[test]
    fn smooth_examples() {
        let p = x2();
        assert_eq!(smooth(&p, 0.0).unwrap(), p);
        let phi = smooth(&p, 0.5).unwrap();
        assert!((phi.eval(&[1.0]).unwrap() - 1.5).abs() < 1e-12);
        let lin = MonomialPoly::from_terms(
            2,
            [(MultiIndex::var(0, 1), 2.0), (MultiIndex::var(1, 1), -1.0), (MultiIndex::zero(), 0.5)],
        )
        .unwrap();
        let s = smooth(&lin, 0.7).unwrap();
        for (a, c) in lin.terms() {
            assert!((s.coeff(a) - c).abs() < 1e-12);
        }
        assert!(matches!(smooth(&p, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn shift_expansion_examples() {
        let p = MonomialPoly::var(1, 0);
        let e = shift_expansion(&p, &[0.8], 0.3).unwrap();
        assert!((e.coeff(&MultiIndex::zero()) - 0.8).abs() < 1e-14);
        assert!((e.coeff(&MultiIndex::var(0, 1)) - 0.3f64.sqrt()).abs() < 1e-14);
        assert_eq!(e.len(), 2);

        let q = x2();
        let e0 = shift_expansion(&q, &[1.7], 0.0).unwrap();
        assert_eq!(e0.len(), 1);
        assert_eq!(e0.coeff(&MultiIndex::zero()), 1.7 * 1.7);
    }

    #[test]
    fn shift_expansion_pointwise() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        for trial in 0..20 {
            let n = 1 + trial % 3;
            let p = from_hermite(&HermiteExpansion::random(&mut rng, n, 4));
            let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let lambda = [0.0, 0.1, 0.5][trial % 3];
            let e = shift_expansion(&p, &x, lambda).unwrap();
            for _ in 0..20 {
                let y: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let shifted: Vec<f64> =
                    x.iter().zip(&y).map(|(a, b)| a + lambda.sqrt() * b).collect();
                let direct = p.eval(&shifted).unwrap();
                let via = e.eval(&y).unwrap();
                assert!((direct - via).abs() <= 1e-8 * direct.abs().max(1.0));
            }
        }
    }

    #[test]
    fn noise_operator_laws() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let e = HermiteExpansion::random(&mut rng, 2, 4);
        assert_eq!(e.noise_operator(1.0), e);
        let zero = e.noise_operator(0.0);
        assert_eq!(zero.len(), 1);
        assert_eq!(zero.coeff(&MultiIndex::zero()), e.coeff(&MultiIndex::zero()));
        let (r1, r2) = (0.5, 0.25);
        let lhs = e.noise_operator(r1).noise_operator(r2);
        let rhs = e.noise_operator(r1 * r2);
        for (a, c) in rhs.coeffs() {
            assert_eq!(lhs.coeff(a), c);
        }
    }

    #[test]
    fn l2_norm_examples() {
        let single = HermiteExpansion::from_coeffs(2, [(MultiIndex::from_dense(&[1, 2]), 1.0)]).unwrap();
        assert_eq!(single.l2_norm(), 1.0);
        assert!((to_hermite(&x2()).l2_norm() - 3f64.sqrt()).abs() < 1e-12);
        assert!((single.scale(-3.0).l2_norm() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let p = from_hermite(&HermiteExpansion::random(&mut rng, 3, 2));
        let s = serde_json::to_string(&p).unwrap();
        let q: MonomialPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        let bad = r#"{"dimension":1,"terms":[{"exponents":{"3":1},"coeff":1.0}]}"#;
        assert!(serde_json::from_str::<MonomialPoly>(bad).is_err());
    }
}
