use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::encoding::nonidentity;
use crate::algebra::{AlgebraError, Framer, G1Point, G2Point, GtPoint, Scalar, Unframer, G1_BYTES};
use crate::ds::DsSignature;
use crate::sigma::SpkProof;

/// Position of a user in the public tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserIndex(pub u32);

impl fmt::Display for UserIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssuerSecretKey {
    pub x: Scalar,
    pub y: Scalar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssuerPublicKey {
    #[serde(with = "nonidentity")]
    pub x_hat: G2Point,
    #[serde(with = "nonidentity")]
    pub y_hat: G2Point,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssuerKeys {
    pub secret: IssuerSecretKey,
    pub public: IssuerPublicKey,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenerSecretKey {
    pub z: Scalar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenerPublicKey {
    #[serde(with = "nonidentity")]
    pub z_hat: G2Point,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenerKeys {
    pub secret: OpenerSecretKey,
    pub public: OpenerPublicKey,
}

/// A member's master secret `α` and tracing trapdoor `τ = ĝ^α`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberSecret {
    pub msk: Scalar,
    #[serde(with = "nonidentity")]
    pub trapdoor: G2Point,
}

/// ElGamal encryption of a trapdoor under the opener key:
/// `(Ŝ, f̂′) = (ĝ^s, τ·Ẑ^s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncryptedTrapdoor {
    pub s_hat: G2Point,
    pub f_prime: G2Point,
}

impl EncryptedTrapdoor {
    /// `f̂′ · Ŝ^{−z}`.
    pub fn decrypt(&self, osk: &OpenerSecretKey) -> G2Point {
        self.f_prime * self.s_hat.exp(&osk.z).inverse()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinRequest {
    #[serde(with = "nonidentity")]
    pub f: G1Point,
    #[serde(with = "nonidentity")]
    pub w: G1Point,
    pub enc_trapdoor: EncryptedTrapdoor,
    pub pi_j: SpkProof,
    pub sigma_ds: DsSignature,
}

/// What the issuer stores for a member; readable by the opener.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistrationEntry {
    #[serde(with = "nonidentity")]
    pub f: G1Point,
    pub enc_trapdoor: EncryptedTrapdoor,
    pub rho: GtPoint,
    pub sigma_ds: DsSignature,
}

/// A triple `(u, v, w)` of non-identity G1 elements.
///
/// Master public keys and nicknames share this type; a nickname is
/// group-valid when `e(v, ĝ) = e(u, X̂)·e(w, Ŷ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "NicknameRepr", into = "NicknameRepr")]
pub struct Nickname {
    u: G1Point,
    v: G1Point,
    w: G1Point,
}

pub const NICKNAME_BYTES: usize = 3 * G1_BYTES;

impl Nickname {
    pub fn new(u: G1Point, v: G1Point, w: G1Point) -> Result<Self, AlgebraError> {
        if u.is_identity() || v.is_identity() || w.is_identity() {
            return Err(AlgebraError::Identity("nickname component"));
        }
        Ok(Nickname { u, v, w })
    }

    pub fn u(&self) -> &G1Point {
        &self.u
    }

    pub fn v(&self) -> &G1Point {
        &self.v
    }

    pub fn w(&self) -> &G1Point {
        &self.w
    }

    /// `u ‖ v ‖ w`, compressed.
    pub fn to_bytes(&self) -> [u8; NICKNAME_BYTES] {
        let mut out = [0u8; NICKNAME_BYTES];
        out[..G1_BYTES].copy_from_slice(&self.u.to_bytes());
        out[G1_BYTES..2 * G1_BYTES].copy_from_slice(&self.v.to_bytes());
        out[2 * G1_BYTES..].copy_from_slice(&self.w.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, AlgebraError> {
        if bytes.len() != NICKNAME_BYTES {
            return Err(AlgebraError::Length {
                what: "nickname",
                expected: NICKNAME_BYTES,
                got: bytes.len(),
            });
        }
        Nickname::new(
            G1Point::from_bytes(&bytes[..G1_BYTES])?,
            G1Point::from_bytes(&bytes[G1_BYTES..2 * G1_BYTES])?,
            G1Point::from_bytes(&bytes[2 * G1_BYTES..])?,
        )
    }
}

impl PartialOrd for Nickname {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Nickname {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.to_bytes().cmp(&other.to_bytes())
    }
}

#[derive(Serialize, Deserialize)]
struct NicknameRepr {
    u: G1Point,
    v: G1Point,
    w: G1Point,
}

impl TryFrom<NicknameRepr> for Nickname {
    type Error = AlgebraError;
    fn try_from(r: NicknameRepr) -> Result<Self, Self::Error> {
        Nickname::new(r.u, r.v, r.w)
    }
}

impl From<Nickname> for NicknameRepr {
    fn from(n: Nickname) -> Self {
        NicknameRepr {
            u: n.u,
            v: n.v,
            w: n.w,
        }
    }
}

/// `Π = (ρ, σ_DS, π_O)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpeningProof {
    pub rho: GtPoint,
    pub sigma_ds: DsSignature,
    pub pi_o: SpkProof,
}

impl OpeningProof {
    pub fn to_bytes(&self) -> Vec<u8> {
        Framer::new()
            .field(&self.rho.to_bytes())
            .field(&self.sigma_ds.to_bytes())
            .field(&self.pi_o.to_bytes())
            .finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, super::NgsError> {
        let mut r = Unframer::new(bytes);
        let rho = GtPoint::from_bytes(r.field()?)?;
        let sigma_ds = DsSignature::from_bytes(r.field()?)?;
        let pi_o = SpkProof::from_bytes(r.field()?)?;
        r.finish()?;
        Ok(OpeningProof {
            rho,
            sigma_ds,
            pi_o,
        })
    }
}
