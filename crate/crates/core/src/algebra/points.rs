use std::fmt;
use std::ops::Mul;

use ark_bls12_381::{Bls12_381, G1Affine, G1Projective, G2Affine, G2Projective};
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{CurveGroup, PrimeGroup};
use ark_ff::Zero;
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use rand::{CryptoRng, RngCore};

use super::counters::{record, Op};
use super::{AlgebraError, Scalar};

pub const G1_BYTES: usize = 48;
pub const G2_BYTES: usize = 96;
pub const GT_BYTES: usize = 576;

macro_rules! curve_point {
    ($name:ident, $proj:ty, $affine:ty, $len:expr, $op:expr, $label:literal) => {
        #[derive(Clone, Copy, PartialEq, Eq)]
        pub struct $name(pub(crate) $proj);

        impl $name {
            pub fn generator() -> Self {
                $name(<$proj>::generator())
            }

            pub fn identity() -> Self {
                $name(<$proj>::zero())
            }

            pub fn is_identity(&self) -> bool {
                self.0.is_zero()
            }

            /// `self^k` in multiplicative notation. Counted.
            pub fn exp(&self, k: &Scalar) -> Self {
                record($op, 1);
                $name(self.0 * k.0)
            }

            pub fn inverse(&self) -> Self {
                $name(-self.0)
            }

            /// `generator^k` for a fresh uniform k. Counted as one exponentiation.
            pub fn random<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
                Self::generator().exp(&Scalar::random(rng, true))
            }

            /// Canonical compressed encoding.
            pub fn to_bytes(&self) -> [u8; $len] {
                let mut out = [0u8; $len];
                self.0
                    .into_affine()
                    .serialize_compressed(&mut out[..])
                    .expect("fixed-size buffer matches the compressed length");
                out
            }

            /// Decodes a compressed point, checking curve and subgroup membership.
            pub fn from_bytes(bytes: &[u8]) -> Result<Self, AlgebraError> {
                if bytes.len() != $len {
                    return Err(AlgebraError::Length {
                        what: $label,
                        expected: $len,
                        got: bytes.len(),
                    });
                }
                let p = <$affine>::deserialize_compressed(bytes)
                    .map_err(|_| AlgebraError::InvalidPoint($label))?;
                Ok($name(p.into()))
            }

            /// Like [`Self::from_bytes`] but also rejects the identity.
            pub fn from_bytes_nonidentity(bytes: &[u8]) -> Result<Self, AlgebraError> {
                let p = Self::from_bytes(bytes)?;
                if p.is_identity() {
                    return Err(AlgebraError::Identity($label));
                }
                Ok(p)
            }
        }

        impl Mul for $name {
            type Output = $name;
            /// Group operation (written multiplicatively).
            fn mul(self, rhs: $name) -> $name {
                $name(self.0 + rhs.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let b = self.to_bytes();
                write!(f, "{}({}..)", $label, hex::encode(&b[..8]))
            }
        }

        impl std::hash::Hash for $name {
            fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
                self.to_bytes().hash(state)
            }
        }

        impl PartialOrd for $name {
            fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
                Some(self.cmp(other))
            }
        }

        impl Ord for $name {
            fn cmp(&self, other: &Self) -> std::cmp::Ordering {
                self.to_bytes().cmp(&other.to_bytes())
            }
        }
    };
}

curve_point!(G1Point, G1Projective, G1Affine, G1_BYTES, Op::G1Exp, "G1");
curve_point!(G2Point, G2Projective, G2Affine, G2_BYTES, Op::G2Exp, "G2");

/// Element of the target group GT.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct GtPoint(pub(crate) PairingOutput<Bls12_381>);

impl GtPoint {
    pub fn identity() -> Self {
        GtPoint(PairingOutput::zero())
    }

    /// `e(g, ĝ)`; computed once per call, counted as a pairing.
    pub fn generator() -> Self {
        pairing(&G1Point::generator(), &G2Point::generator())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_zero()
    }

    pub fn exp(&self, k: &Scalar) -> Self {
        record(Op::GtExp, 1);
        GtPoint(self.0 * k.0)
    }

    pub fn inverse(&self) -> Self {
        GtPoint(-self.0)
    }

    /// A uniformly random GT element, `e(g, ĝ)^k`.
    pub fn random<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        GtPoint::generator().exp(&Scalar::random(rng, true))
    }

    pub fn to_bytes(&self) -> [u8; GT_BYTES] {
        let mut out = [0u8; GT_BYTES];
        self.0
            .serialize_compressed(&mut out[..])
            .expect("fixed-size buffer matches the GT encoding length");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AlgebraError> {
        if bytes.len() != GT_BYTES {
            return Err(AlgebraError::Length {
                what: "GT",
                expected: GT_BYTES,
                got: bytes.len(),
            });
        }
        PairingOutput::<Bls12_381>::deserialize_compressed(bytes)
            .map(GtPoint)
            .map_err(|_| AlgebraError::InvalidPoint("GT"))
    }
}

impl Mul for GtPoint {
    type Output = GtPoint;
    fn mul(self, rhs: GtPoint) -> GtPoint {
        GtPoint(self.0 + rhs.0)
    }
}

impl fmt::Debug for GtPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.to_bytes();
        write!(f, "GT({}..)", hex::encode(&b[..8]))
    }
}

/// The bilinear map `e: G1 × G2 → GT`.
pub fn pairing(a: &G1Point, b: &G2Point) -> GtPoint {
    record(Op::Pairing, 1);
    GtPoint(Bls12_381::pairing(a.0, b.0))
}

/// Tests `∏ e(a_i, b_i) = 1` with a shared final exponentiation.
/// Counted as one pairing per pair.
pub fn pairing_product_is_identity(pairs: &[(G1Point, G2Point)]) -> bool {
    record(Op::Pairing, pairs.len() as u64);
    let (a, b): (Vec<G1Affine>, Vec<G2Affine>) = pairs
        .iter()
        .map(|(a, b)| (a.0.into_affine(), b.0.into_affine()))
        .unzip();
    Bls12_381::multi_pairing(a, b).is_zero()
}

/// `e(a, b) = e(c, d)`.
pub fn pairings_equal(a: &G1Point, b: &G2Point, c: &G1Point, d: &G2Point) -> bool {
    pairing_product_is_identity(&[(*a, *b), (c.inverse(), *d)])
}
