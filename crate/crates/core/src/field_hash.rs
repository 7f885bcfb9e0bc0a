//! t-wise independent values from polynomial hashing over a prime field.
//!
//! A [`KWisePolySource`] holds `t` field coefficients taken from a seed and
//! maps an index `j` to `c_0 + c_1 j + ... + c_{t-1} j^{t-1} mod p`. Over a
//! uniformly random coefficient tuple the outputs at any `t` distinct indices
//! are independent and uniform on the field.
//!
//! Fields whose modulus is odd and below 2^63 use Montgomery arithmetic on
//! `u64`; anything larger goes through `BigUint`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Default number of bits by which the field must exceed the sampling grid.
pub const DEFAULT_BIAS_MARGIN: u32 = 32;

/// Largest grid precision whose numerators fit in a `u64`.
pub const MAX_GRID_PRECISION: u32 = 63;

const SMALL_PRIMES: [u64; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Montgomery {
    modulus: u64,
    /// -p^{-1} mod 2^64
    neg_inv: u64,
    /// 2^128 mod p
    r2: u64,
}

impl Montgomery {
    fn new(modulus: u64) -> Option<Self> {
        if modulus.is_multiple_of(2) || !(3..1 << 63).contains(&modulus) {
            return None;
        }
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(modulus.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % modulus as u128) as u64;
        let r2 = ((r as u128 * r as u128) % modulus as u128) as u64;
        Some(Self {
            modulus,
            neg_inv: inv.wrapping_neg(),
            r2,
        })
    }

    #[inline(always)]
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.neg_inv);
        let u = ((t + m as u128 * self.modulus as u128) >> 64) as u64;
        if u >= self.modulus {
            u - self.modulus
        } else {
            u
        }
    }

    #[inline(always)]
    fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    #[inline(always)]
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline(always)]
    fn encode(self, a: u64) -> u64 {
        self.mul(a % self.modulus, self.r2)
    }

    #[inline(always)]
    fn decode(self, a: u64) -> u64 {
        self.redc(a as u128)
    }
}

/// A prime field `F_p`, verified prime at construction.
#[derive(Clone, PartialEq, Eq)]
pub struct PrimeField {
    modulus: Arc<BigUint>,
    bit_width: u32,
    mont: Option<Montgomery>,
}

impl fmt::Debug for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrimeField")
            .field("modulus", &self.modulus.to_string())
            .field("bit_width", &self.bit_width)
            .finish()
    }
}

impl Serialize for PrimeField {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("PrimeField", 2)?;
        s.serialize_field("modulus", &self.modulus.to_string())?;
        s.serialize_field("bit_width", &self.bit_width)?;
        s.end()
    }
}

impl PrimeField {
    pub fn new(modulus: BigUint) -> Result<Self> {
        if !is_prime(&modulus) {
            return Err(Error::NotPrime(modulus.to_string()));
        }
        let bit_width = modulus.bits() as u32;
        let mont = modulus.to_u64().and_then(Montgomery::new);
        Ok(Self {
            modulus: Arc::new(modulus),
            bit_width,
            mont,
        })
    }

    pub fn from_u64(modulus: u64) -> Result<Self> {
        Self::new(BigUint::from(modulus))
    }

    /// Smallest prime `p >= 2^exponent`.
    pub fn smallest_at_least_pow2(exponent: u32) -> Self {
        let mut candidate = BigUint::one() << exponent;
        if candidate > BigUint::from(2u32) {
            candidate += 1u32;
        }
        while !is_prime(&candidate) {
            candidate += 2u32;
        }
        Self::new(candidate).expect("candidate verified prime")
    }

    /// The field used for an `precision`-bit grid: smallest prime `>= 2^(precision + bias_margin)`.
    pub fn for_grid(precision: u32, bias_margin: u32) -> Self {
        Self::smallest_at_least_pow2(precision + bias_margin)
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn modulus_u64(&self) -> Option<u64> {
        self.modulus.to_u64()
    }

    /// `ceil(log2 p)`; for a prime this equals the bit length.
    pub fn bit_width(&self) -> u32 {
        self.bit_width
    }

    /// Whether this field can host an unbiased-enough `precision`-bit grid.
    pub fn supports_grid(&self, precision: u32, bias_margin: u32) -> bool {
        *self.modulus >= BigUint::one() << (precision + bias_margin)
    }

    fn index_in_range(&self, j: u64) -> Result<()> {
        if BigUint::from(j) >= *self.modulus {
            return Err(Error::IndexExceedsField {
                index: j,
                modulus: self.modulus.to_string(),
            });
        }
        Ok(())
    }
}

/// Deterministic Miller–Rabin. Exact below 3.3e24 (first 12 prime bases);
/// above that the 24 fixed bases leave a composite-acceptance chance below 4^-24.
pub fn is_prime(n: &BigUint) -> bool {
    if n < &BigUint::from(2u32) {
        return false;
    }
    for &sp in &SMALL_PRIMES {
        let sp_big = BigUint::from(sp);
        if n == &sp_big {
            return true;
        }
        if (n % &sp_big).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    'bases: for &a in &SMALL_PRIMES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Coeffs {
    /// Montgomery-form coefficients for the fast path.
    Mont(Vec<u64>),
    Big(Vec<BigUint>),
}

/// A t-wise independent stream of field elements keyed by a coefficient tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KWisePolySource {
    field: PrimeField,
    coeffs: Coeffs,
    stream_id: u64,
}

impl KWisePolySource {
    /// Build a source directly from coefficients (each reduced into `[0, p)`).
    pub fn from_coeffs(field: &PrimeField, coeffs: &[BigUint], stream_id: u64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("wiseness must be at least 1".into()));
        }
        let coeffs = match field.mont {
            Some(m) => Coeffs::Mont(
                coeffs
                    .iter()
                    .map(|c| m.encode((c % field.modulus.as_ref()).to_u64().unwrap()))
                    .collect(),
            ),
            None => Coeffs::Big(coeffs.iter().map(|c| c % field.modulus.as_ref()).collect()),
        };
        Ok(Self {
            field: field.clone(),
            coeffs,
            stream_id,
        })
    }

    pub fn from_u64_coeffs(field: &PrimeField, coeffs: &[u64], stream_id: u64) -> Result<Self> {
        let big: Vec<BigUint> = coeffs.iter().map(|&c| BigUint::from(c)).collect();
        Self::from_coeffs(field, &big, stream_id)
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn wiseness(&self) -> usize {
        match &self.coeffs {
            Coeffs::Mont(c) => c.len(),
            Coeffs::Big(c) => c.len(),
        }
    }

    /// Coefficients in standard form, lowest degree first.
    pub fn coeffs(&self) -> Vec<BigUint> {
        match (&self.coeffs, self.field.mont) {
            (Coeffs::Mont(c), Some(m)) => c.iter().map(|&x| BigUint::from(m.decode(x))).collect(),
            (Coeffs::Big(c), _) => c.clone(),
            (Coeffs::Mont(_), None) => unreachable!("montgomery coefficients without montgomery field"),
        }
    }

    /// `sum_i coeffs[i] * j^i mod p`.
    pub fn eval_index(&self, j: u64) -> Result<BigUint> {
        self.field.index_in_range(j)?;
        Ok(match &self.coeffs {
            Coeffs::Mont(_) => BigUint::from(self.eval_fast(j)),
            Coeffs::Big(c) => {
                let p = self.field.modulus.as_ref();
                let x = BigUint::from(j);
                c.iter()
                    .rev()
                    .fold(BigUint::zero(), |acc, ci| (acc * &x + ci) % p)
            }
        })
    }

    /// Grid value at index `j`; equivalent to `to_grid(eval_index(j), precision)`.
    pub fn grid_at(&self, j: u64, precision: u32) -> Result<GridValue> {
        self.field.index_in_range(j)?;
        match &self.coeffs {
            Coeffs::Mont(_) => Ok(grid_from_u64(self.eval_fast(j), precision)),
            Coeffs::Big(_) => Ok(to_grid(&self.eval_index(j)?, precision)),
        }
    }

    /// Fast-path evaluation; caller guarantees the Montgomery layout and `j < p`.
    #[inline]
    fn eval_fast(&self, j: u64) -> u64 {
        let m = self.field.mont.expect("fast path requires montgomery field");
        let Coeffs::Mont(c) = &self.coeffs else {
            unreachable!()
        };
        let x = m.encode(j);
        let mut acc = 0u64;
        for &ci in c.iter().rev() {
            acc = m.add(m.mul(acc, x), ci);
        }
        m.decode(acc)
    }
}

/// Derive a source from a slice of the seed.
///
/// The seed is read as a little-endian bit stream; source `stream_id` consumes
/// bits `[stream_id * t * w, (stream_id + 1) * t * w)` where `w` is the field
/// bit width, one `w`-bit chunk per coefficient, each reduced mod `p`.
pub fn derive_source(
    seed_bytes: &[u8],
    t: usize,
    stream_id: u64,
    field: &PrimeField,
) -> Result<KWisePolySource> {
    if t == 0 {
        return Err(Error::InvalidParameter("wiseness must be at least 1".into()));
    }
    let width = field.bit_width as u128;
    let per_source = t as u128 * width;
    let start = stream_id as u128 * per_source;
    let needed = start + per_source;
    let available = seed_bytes.len() as u128 * 8;
    if needed > available {
        return Err(Error::InsufficientSeed { needed, available });
    }

    match field.mont {
        Some(m) => {
            let coeffs = (0..t as u128)
                .map(|i| {
                    let raw = read_bits_u64(seed_bytes, start + i * width, field.bit_width);
                    m.encode(raw)
                })
                .collect();
            Ok(KWisePolySource {
                field: field.clone(),
                coeffs: Coeffs::Mont(coeffs),
                stream_id,
            })
        }
        None => {
            let coeffs: Vec<BigUint> = (0..t as u128)
                .map(|i| read_bits_big(seed_bytes, start + i * width, field.bit_width))
                .collect();
            KWisePolySource::from_coeffs(field, &coeffs, stream_id)
        }
    }
}

#[inline]
fn bit_at(bytes: &[u8], pos: u128) -> u64 {
    ((bytes[(pos / 8) as usize] >> (pos % 8)) & 1) as u64
}

fn read_bits_u64(bytes: &[u8], start: u128, width: u32) -> u64 {
    debug_assert!(width <= 64);
    // at most 9 bytes cover a 64-bit chunk at any bit offset
    let first = (start / 8) as usize;
    let offset = (start % 8) as u32;
    let last = (start + width as u128).div_ceil(8) as usize;
    let window = bytes[first..last]
        .iter()
        .rev()
        .fold(0u128, |acc, &b| (acc << 8) | b as u128);
    let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
    (window >> offset) as u64 & mask
}

fn read_bits_big(bytes: &[u8], start: u128, width: u32) -> BigUint {
    let mut digits = vec![0u8; width.div_ceil(8) as usize];
    for b in 0..width {
        if bit_at(bytes, start + b as u128) == 1 {
            digits[(b / 8) as usize] |= 1 << (b % 8);
        }
    }
    BigUint::from_bytes_le(&digits)
}

/// A point `numerator * 2^-precision` of the grid `{2^-M, 2*2^-M, ..., 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridValue {
    numerator: u64,
    precision: u32,
}

impl GridValue {
    pub fn new(numerator: u64, precision: u32) -> Result<Self> {
        if !(1..=MAX_GRID_PRECISION).contains(&precision) {
            return Err(Error::InvalidParameter(format!(
                "grid precision {precision} outside 1..={MAX_GRID_PRECISION}"
            )));
        }
        if numerator == 0 || numerator > 1u64 << precision {
            return Err(Error::InvalidParameter(format!(
                "grid numerator {numerator} outside 1..=2^{precision}"
            )));
        }
        Ok(Self {
            numerator,
            precision,
        })
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 * (-(self.precision as f64)).exp2()
    }
}

#[inline]
fn grid_from_u64(elem: u64, precision: u32) -> GridValue {
    debug_assert!((1..=MAX_GRID_PRECISION).contains(&precision));
    let mask = (1u64 << precision) - 1;
    GridValue {
        numerator: (elem & mask) + 1,
        precision,
    }
}

/// `(elem mod 2^precision) + 1`, read as a grid point in `(0, 1]`.
///
/// `precision` must lie in `1..=MAX_GRID_PRECISION`.
pub fn to_grid(elem: &BigUint, precision: u32) -> GridValue {
    assert!(
        (1..=MAX_GRID_PRECISION).contains(&precision),
        "grid precision {precision} outside 1..={MAX_GRID_PRECISION}"
    );
    let low = elem.iter_u64_digits().next().unwrap_or(0);
    grid_from_u64(low, precision)
}
