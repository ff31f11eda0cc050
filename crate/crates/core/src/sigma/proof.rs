use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraError, Framer, G2Point, Scalar, Unframer};

use super::SigmaError;

/// Domain tag prepended to every Fiat-Shamir transcript.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainTag {
    /// Join proof: knowledge of (α, s).
    #[serde(rename = "NGS-PKJ-v1")]
    PkJ,
    /// Opening proof: knowledge of the trapdoor τ ∈ G2.
    #[serde(rename = "NGS-PKO-v1")]
    PkO,
    /// Nickname signature: knowledge of α with w = u^α.
    #[serde(rename = "NGS-SPKS-v1")]
    SpkS,
}

impl DomainTag {
    pub const ALL: [DomainTag; 3] = [DomainTag::PkJ, DomainTag::PkO, DomainTag::SpkS];

    pub fn as_bytes(&self) -> &'static [u8] {
        match self {
            DomainTag::PkJ => b"NGS-PKJ-v1",
            DomainTag::PkO => b"NGS-PKO-v1",
            DomainTag::SpkS => b"NGS-SPKS-v1",
        }
    }

    pub fn code(&self) -> u8 {
        match self {
            DomainTag::PkJ => 1,
            DomainTag::PkO => 2,
            DomainTag::SpkS => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<DomainTag> {
        DomainTag::ALL.into_iter().find(|t| t.code() == code)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Responses {
    Scalars(Vec<Scalar>),
    G2(G2Point),
}

/// A Fiat-Shamir signature proof of knowledge `(Cha, Rsp)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpkProof {
    pub tag: DomainTag,
    pub challenge: Scalar,
    pub responses: Responses,
}

impl SpkProof {
    /// `tag byte ‖ [challenge] ‖ [count] ‖ [response]*` with `[x]` a
    /// 4-byte big-endian length-prefixed field.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut f = Framer::new();
        f.raw(&[self.tag.code()]).field(&self.challenge.to_bytes());
        match &self.responses {
            Responses::Scalars(rs) => {
                f.u32(rs.len() as u32);
                for r in rs {
                    f.field(&r.to_bytes());
                }
            }
            Responses::G2(p) => {
                f.u32(1).field(&p.to_bytes());
            }
        }
        f.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<SpkProof, SigmaError> {
        let mut r = Unframer::new(bytes);
        let tag = r.raw(1)?[0];
        let tag = DomainTag::from_code(tag).ok_or(SigmaError::MalformedProof("unknown tag"))?;
        let challenge = Scalar::from_bytes(r.field()?)?;
        let count = r.u32()?;
        let responses = if tag == DomainTag::PkO {
            if count != 1 {
                return Err(SigmaError::MalformedProof("PK_O carries one G2 response"));
            }
            Responses::G2(G2Point::from_bytes(r.field()?)?)
        } else {
            // Bound the allocation by what the input can actually hold.
            let mut rs = Vec::with_capacity((count as usize).min(bytes.len() / 36));
            for _ in 0..count {
                rs.push(Scalar::from_bytes(r.field()?)?);
            }
            Responses::Scalars(rs)
        };
        r.finish()?;
        Ok(SpkProof {
            tag,
            challenge,
            responses,
        })
    }

    pub(crate) fn scalar_responses(&self) -> Option<&[Scalar]> {
        match &self.responses {
            Responses::Scalars(rs) => Some(rs),
            Responses::G2(_) => None,
        }
    }
}

impl From<AlgebraError> for SigmaError {
    fn from(e: AlgebraError) -> Self {
        SigmaError::Decode(e)
    }
}
