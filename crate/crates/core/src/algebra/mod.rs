//! Type-3 bilinear group abstraction over BLS12-381.
//!
//! Group operations are written multiplicatively (`a * b`, `a.exp(&k)`) to
//! match the usual presentation of pairing-based schemes. Exponentiations,
//! pairings and hash-to-curve calls are recorded by the scoped
//! [`counters`].

pub mod counters;
pub mod encoding;
mod hash;
mod points;
mod scalar;

use thiserror::Error;

pub use counters::{count_ops, uncounted, CountingScope, OpCounters};
pub use encoding::{Framer, Unframer};
pub use hash::{hash_to_g1, hash_to_scalar, FS_DST, H_DST};
pub use points::{
    pairing, pairing_product_is_identity, pairings_equal, G1Point, G2Point, GtPoint, G1_BYTES,
    G2_BYTES, GT_BYTES,
};
pub use scalar::{Scalar, SCALAR_BYTES};

use rand::{CryptoRng, RngCore};

/// Identifier of the pairing-friendly curve fixed by this backend.
pub const CURVE_ID: &str = "BLS12-381";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("{what}: expected {expected} bytes, got {got}")]
    Length {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{0}: encoding is not a valid subgroup point")]
    InvalidPoint(&'static str),
    #[error("{0}: identity element not allowed here")]
    Identity(&'static str),
    #[error("{0}: non-canonical encoding")]
    NonCanonical(&'static str),
    #[error("input truncated")]
    Truncated,
    #[error("{0} trailing bytes")]
    TrailingBytes(usize),
}

/// Fixed public parameters of the bilinear group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BilinearContext {
    pub g: G1Point,
    pub g_hat: G2Point,
    pub curve_id: &'static str,
}

impl BilinearContext {
    pub fn new() -> Self {
        BilinearContext {
            g: G1Point::generator(),
            g_hat: G2Point::generator(),
            curve_id: CURVE_ID,
        }
    }

    /// The group order p as big-endian bytes.
    pub fn order_be() -> Vec<u8> {
        use ark_ff::{BigInteger, PrimeField};
        ark_bls12_381::Fr::MODULUS.to_bytes_be()
    }
}

impl Default for BilinearContext {
    fn default() -> Self {
        Self::new()
    }
}

/// Uniform scalar; see [`Scalar::random`].
pub fn random_scalar<R: RngCore + CryptoRng + ?Sized>(rng: &mut R, nonzero: bool) -> Scalar {
    Scalar::random(rng, nonzero)
}
