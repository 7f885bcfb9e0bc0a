//! Boolean functions of polynomial threshold functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{from_hermite, HermiteExpansion, MonomialPoly};

/// Largest supported number of polynomials (truth table of `2^MAX_K` bits).
pub const MAX_K: usize = 20;

/// `sign(v) = 1` iff `v >= 0`; `-0.0` counts as nonnegative, NaN as negative.
#[inline]
pub fn sign_of(v: f64) -> bool {
    v >= 0.0
}

/// Truth table of a Boolean combiner on `k` inputs.
///
/// Entry `e` is addressed by the sign vector packed as `e = sum_i sign_i << i`
/// (polynomial 0 is the least significant bit). In hex form the table is stored
/// as bytes, entry `e` at bit `e % 8` of byte `e / 8`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Combiner {
    k: usize,
    table: Vec<bool>,
}

impl Combiner {
    pub fn new(k: usize, table: Vec<bool>) -> Result<Self> {
        if k == 0 || k > MAX_K {
            return Err(Error::InvalidParameter(format!("k = {k} outside 1..={MAX_K}")));
        }
        if table.len() != 1 << k {
            return Err(Error::InvalidParameter(format!(
                "truth table has {} entries, expected {}",
                table.len(),
                1usize << k
            )));
        }
        Ok(Self { k, table })
    }

    pub fn from_fn(k: usize, f: impl Fn(&[bool]) -> bool) -> Result<Self> {
        let table = (0..1usize << k)
            .map(|e| {
                let bits: Vec<bool> = (0..k).map(|i| (e >> i) & 1 == 1).collect();
                f(&bits)
            })
            .collect();
        Self::new(k, table)
    }

    pub fn constant(k: usize, value: bool) -> Result<Self> {
        Self::new(k, vec![value; 1 << k])
    }

    /// AND of all signs (intersection of the threshold regions).
    pub fn and(k: usize) -> Result<Self> {
        Self::from_fn(k, |b| b.iter().all(|&x| x))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entry(&self, packed: usize) -> bool {
        self.table[packed]
    }

    pub fn to_hex(&self) -> String {
        let mut bytes = vec![0u8; self.table.len().div_ceil(8)];
        for (e, &b) in self.table.iter().enumerate() {
            if b {
                bytes[e / 8] |= 1 << (e % 8);
            }
        }
        hex::encode(bytes)
    }

    pub fn from_hex(k: usize, s: &str) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| Error::Malformed(format!("combiner hex: {e}")))?;
        let entries = 1usize << k.min(MAX_K);
        if bytes.len() != entries.div_ceil(8) {
            return Err(Error::Malformed(format!(
                "combiner hex has {} bytes, expected {} for k = {k}",
                bytes.len(),
                entries.div_ceil(8)
            )));
        }
        let table = (0..entries).map(|e| (bytes[e / 8] >> (e % 8)) & 1 == 1).collect();
        Self::new(k, table)
    }
}

/// `F(x) = f(sign(p_1(x)), ..., sign(p_k(x)))`.
#[derive(Clone, Debug, PartialEq)]
pub struct PtfFunction {
    polys: Vec<MonomialPoly>,
    combiner: Combiner,
}

impl PtfFunction {
    pub fn new(polys: Vec<MonomialPoly>, combiner: Combiner) -> Result<Self> {
        let Some(first) = polys.first() else {
            return Err(Error::InvalidParameter("need at least one polynomial".into()));
        };
        let n = first.dimension();
        if let Some(bad) = polys.iter().find(|p| p.dimension() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: bad.dimension(),
            });
        }
        if combiner.k() != polys.len() {
            return Err(Error::InvalidParameter(format!(
                "combiner arity {} differs from {} polynomials",
                combiner.k(),
                polys.len()
            )));
        }
        Ok(Self { polys, combiner })
    }

    pub fn polys(&self) -> &[MonomialPoly] {
        &self.polys
    }

    pub fn combiner(&self) -> &Combiner {
        &self.combiner
    }

    pub fn k(&self) -> usize {
        self.polys.len()
    }

    pub fn dimension(&self) -> usize {
        self.polys[0].dimension()
    }

    pub fn degree(&self) -> u32 {
        self.polys.iter().map(MonomialPoly::degree).max().unwrap_or(0)
    }

    /// Packed sign vector at `x`.
    pub fn sign_vector(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                actual: x.len(),
            });
        }
        Ok(self
            .polys
            .iter()
            .enumerate()
            .map(|(i, p)| (sign_of(p.eval_unchecked(x)) as usize) << i)
            .sum())
    }

    pub fn eval(&self, x: &[f64]) -> Result<bool> {
        Ok(self.combiner.entry(self.sign_vector(x)?))
    }

    /// Stable SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("family serializes");
        crate::seed::digest_hex(&json)
    }
}

/// `eval_F` as a free function.
pub fn eval_f(f: &PtfFunction, x: &[f64]) -> Result<bool> {
    f.eval(x)
}

#[derive(Serialize, Deserialize)]
struct FamilyJson {
    polys: Vec<MonomialPoly>,
    combiner_hex: String,
}

impl Serialize for PtfFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FamilyJson {
            polys: self.polys.clone(),
            combiner_hex: self.combiner.to_hex(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PtfFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = FamilyJson::deserialize(d)?;
        let combiner = Combiner::from_hex(raw.polys.len(), &raw.combiner_hex).map_err(D::Error::custom)?;
        PtfFunction::new(raw.polys, combiner).map_err(D::Error::custom)
    }
}

/// Random family: i.i.d. Gaussian Hermite coefficients on every `h_alpha` with
/// `|alpha| <= d`, optionally scaled to unit Gaussian L2 norm, and a uniform
/// random truth table.
pub fn random_family(rng_seed: u64, n: usize, d: u32, k: usize, normalize: bool) -> Result<PtfFunction> {
    if n == 0 || d == 0 || k == 0 {
        return Err(Error::InvalidParameter("n, d, k must be at least 1".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
    let polys = (0..k)
        .map(|_| {
            let mut e = HermiteExpansion::random(&mut rng, n, d);
            if normalize {
                let norm = e.l2_norm();
                e = e.scale(1.0 / norm);
            }
            from_hermite(&e)
        })
        .collect();
    let table = (0..1usize << k).map(|_| rng.random::<bool>()).collect();
    PtfFunction::new(polys, Combiner::new(k, table)?)
}
