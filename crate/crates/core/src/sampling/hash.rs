//! Seeded hash families over edge keys.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The Mersenne prime `2^61 - 1`.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

/// Largest independence degree evaluated as a true polynomial.
pub const MAX_POLY_INDEPENDENCE: usize = 256;

#[inline]
pub fn mod_mersenne(x: u128) -> u64 {
    let lo = (x as u64) & MERSENNE_61;
    let hi = (x >> 61) as u64;
    let mut r = lo + (hi & MERSENNE_61) + (hi >> 61);
    while r >= MERSENNE_61 {
        r -= MERSENNE_61;
    }
    r
}

#[inline]
pub fn mul_mod(a: u64, b: u64) -> u64 {
    mod_mersenne(a as u128 * b as u128)
}

pub fn pow_mod(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1u64;
    base %= MERSENNE_61;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base);
        }
        base = mul_mod(base, base);
        exp >>= 1;
    }
    acc
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Keyed 64-bit pseudorandom function.
#[inline]
pub fn keyed_mix(key: u64, seed: u64) -> u64 {
    mix64(mix64(key ^ seed).wrapping_add(seed.rotate_left(32)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HashMode {
    /// Polynomial up to [`MAX_POLY_INDEPENDENCE`], pseudorandom beyond.
    #[default]
    Auto,
    Polynomial,
    Pseudorandom,
}

impl std::str::FromStr for HashMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Self::Auto),
            "polynomial" => Ok(Self::Polynomial),
            "pseudorandom" => Ok(Self::Pseudorandom),
            other => Err(format!("unknown hash mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Kind {
    /// Coefficients of a degree `w - 1` polynomial over `GF(2^61 - 1)`.
    Polynomial(Vec<u64>),
    Pseudorandom(u64),
}

/// `h : keys -> [q]`, either `w`-wise independent or seeded pseudorandom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashFamily {
    kind: Kind,
    range: u64,
}

impl HashFamily {
    pub fn new(independence: usize, range: u64, seed: u64, mode: HashMode) -> Self {
        assert!(range >= 1, "hash range must be positive");
        let poly = match mode {
            HashMode::Auto => independence <= MAX_POLY_INDEPENDENCE,
            HashMode::Polynomial => true,
            HashMode::Pseudorandom => false,
        };
        let kind = if poly {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = independence.clamp(1, MAX_POLY_INDEPENDENCE);
            Kind::Polynomial((0..w).map(|_| rng.gen_range(0..MERSENNE_61)).collect())
        } else {
            Kind::Pseudorandom(mix64(seed))
        };
        Self { kind, range }
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self.kind, Kind::Polynomial(_))
    }

    pub fn range(&self) -> u64 {
        self.range
    }

    /// Hash value in `[0, q)`. Keys are reduced modulo `2^61 - 1` first.
    #[inline]
    pub fn eval(&self, key: u64) -> u64 {
        if self.range == 1 {
            return 0;
        }
        match &self.kind {
            Kind::Polynomial(coeffs) => {
                let x = key % MERSENNE_61;
                let mut acc = 0u64;
                for &c in coeffs.iter().rev() {
                    acc = mod_mersenne(acc as u128 * x as u128 + c as u128);
                }
                acc % self.range
            }
            Kind::Pseudorandom(k) => ((keyed_mix(key, *k) as u128 * self.range as u128) >> 64) as u64,
        }
    }
}
