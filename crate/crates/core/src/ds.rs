//! Long-term user signatures binding an identity to its registration value.
//!
//! The default scheme is Schnorr over G1: `upk = g^usk`, a signature is
//! `(c, s)` with `R = g^k`, `c = H([NGS-DS-v1] ‖ [upk] ‖ [R] ‖ [m])` and
//! `s = k − c·usk`. Verification recomputes `R = g^s · upk^c`.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{hash_to_scalar, AlgebraError, Framer, G1Point, Scalar, Unframer};

pub const DS_DST: &[u8] = b"NGS-DS-v1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DsError {
    #[error("unknown signature scheme id {0}")]
    UnknownScheme(u8),
    #[error("decode: {0}")]
    Decode(#[from] AlgebraError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DsKeyPair {
    pub usk: Scalar,
    pub upk: G1Point,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DsSignature {
    pub scheme_id: u8,
    pub challenge: Scalar,
    pub response: Scalar,
}

impl DsSignature {
    /// `scheme_id ‖ [challenge] ‖ [response]`.
    pub fn to_bytes(&self) -> Vec<u8> {
        Framer::new()
            .raw(&[self.scheme_id])
            .field(&self.challenge.to_bytes())
            .field(&self.response.to_bytes())
            .finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DsError> {
        let mut r = Unframer::new(bytes);
        let scheme_id = r.raw(1)?[0];
        let challenge = Scalar::from_bytes(r.field()?)?;
        let response = Scalar::from_bytes(r.field()?)?;
        r.finish()?;
        Ok(DsSignature {
            scheme_id,
            challenge,
            response,
        })
    }
}

/// An EUF-CMA signature scheme over G1 key pairs.
pub trait SignatureScheme {
    const SCHEME_ID: u8;

    fn keygen<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> DsKeyPair;
    fn sign<R: RngCore + CryptoRng + ?Sized>(
        usk: &Scalar,
        message: &[u8],
        rng: &mut R,
    ) -> DsSignature;
    fn verify(upk: &G1Point, message: &[u8], sig: &DsSignature) -> bool;
}

pub struct SchnorrG1;

impl SchnorrG1 {
    fn challenge(upk: &G1Point, commitment: &G1Point, message: &[u8]) -> Scalar {
        let t = Framer::new()
            .field(DS_DST)
            .field(&upk.to_bytes())
            .field(&commitment.to_bytes())
            .field(message)
            .finish();
        hash_to_scalar(&t)
    }
}

impl SignatureScheme for SchnorrG1 {
    const SCHEME_ID: u8 = 1;

    fn keygen<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> DsKeyPair {
        let usk = Scalar::random(rng, true);
        DsKeyPair {
            usk,
            upk: G1Point::generator().exp(&usk),
        }
    }

    fn sign<R: RngCore + CryptoRng + ?Sized>(
        usk: &Scalar,
        message: &[u8],
        rng: &mut R,
    ) -> DsSignature {
        let g = G1Point::generator();
        let upk = g.exp(usk);
        let k = Scalar::random(rng, false);
        let challenge = Self::challenge(&upk, &g.exp(&k), message);
        DsSignature {
            scheme_id: Self::SCHEME_ID,
            challenge,
            response: k - challenge * *usk,
        }
    }

    fn verify(upk: &G1Point, message: &[u8], sig: &DsSignature) -> bool {
        if sig.scheme_id != Self::SCHEME_ID || upk.is_identity() {
            return false;
        }
        let commitment = G1Point::generator().exp(&sig.response) * upk.exp(&sig.challenge);
        Self::challenge(upk, &commitment, message) == sig.challenge
    }
}

pub fn ds_keygen<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> DsKeyPair {
    SchnorrG1::keygen(rng)
}

pub fn ds_sign<R: RngCore + CryptoRng + ?Sized>(
    usk: &Scalar,
    message: &[u8],
    rng: &mut R,
) -> DsSignature {
    SchnorrG1::sign(usk, message, rng)
}

pub fn ds_verify(upk: &G1Point, message: &[u8], sig: &DsSignature) -> bool {
    SchnorrG1::verify(upk, message, sig)
}
