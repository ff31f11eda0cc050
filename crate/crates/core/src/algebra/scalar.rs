use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use ark_bls12_381::Fr;
use ark_ff::{BigInteger, Field, PrimeField, UniformRand, Zero};
use rand::{CryptoRng, RngCore};

use super::AlgebraError;

/// Encoded length of a scalar (big-endian).
pub const SCALAR_BYTES: usize = 32;

/// An element of Z_p, the scalar field shared by G1, G2 and GT.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Scalar(pub(crate) Fr);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(Fr::zero())
    }

    pub fn one() -> Self {
        Scalar(Fr::from(1u64))
    }

    pub fn from_u64(v: u64) -> Self {
        Scalar(Fr::from(v))
    }

    /// Signed small integer, reduced mod p.
    pub fn from_i64(v: i64) -> Self {
        let s = Scalar::from_u64(v.unsigned_abs());
        if v < 0 {
            -s
        } else {
            s
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Scalar> {
        self.0.inverse().map(Scalar)
    }

    /// Uniform draw from Z_p, or from Z_p \ {0} when `nonzero` is set.
    pub fn random<R: RngCore + CryptoRng + ?Sized>(rng: &mut R, nonzero: bool) -> Scalar {
        loop {
            let s = Fr::rand(&mut RngAdapter(rng));
            if !nonzero || !s.is_zero() {
                return Scalar(s);
            }
        }
    }

    pub fn to_bytes(&self) -> [u8; SCALAR_BYTES] {
        let be = self.0.into_bigint().to_bytes_be();
        let mut out = [0u8; SCALAR_BYTES];
        out[SCALAR_BYTES - be.len()..].copy_from_slice(&be);
        out
    }

    /// Decodes a canonical big-endian encoding; values `>= p` are rejected.
    pub fn from_bytes(bytes: &[u8]) -> Result<Scalar, AlgebraError> {
        if bytes.len() != SCALAR_BYTES {
            return Err(AlgebraError::Length {
                what: "scalar",
                expected: SCALAR_BYTES,
                got: bytes.len(),
            });
        }
        let reduced = Fr::from_be_bytes_mod_order(bytes);
        let s = Scalar(reduced);
        if s.to_bytes().as_slice() != bytes {
            return Err(AlgebraError::NonCanonical("scalar"));
        }
        Ok(s)
    }

    /// Reduces arbitrary big-endian bytes mod p.
    pub fn from_bytes_mod_order(bytes: &[u8]) -> Scalar {
        Scalar(Fr::from_be_bytes_mod_order(bytes))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({})", hex::encode(self.to_bytes()))
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 + rhs.0)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 - rhs.0)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 * rhs.0)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

// ark's UniformRand wants a sized `Rng`; this lets callers pass `&mut dyn`.
pub(crate) struct RngAdapter<'a, R: RngCore + ?Sized>(pub(crate) &'a mut R);

impl<R: RngCore + ?Sized> RngCore for RngAdapter<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.0.try_fill_bytes(dest)
    }
}

impl<R: RngCore + CryptoRng + ?Sized> CryptoRng for RngAdapter<'_, R> {}
