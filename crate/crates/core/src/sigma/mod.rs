//! Σ-protocols for Z_p-linear relations and their Fiat-Shamir compilation.
//!
//! A [`Statement`] is a conjunction of [`LinearRelation`]s, each asserting
//! `target = ∏_j bases[j]^{witness[witness_indices[j]]}` inside one group.
//! The prover sends `Comm = φ(rnd)`, receives `Cha`, and answers
//! `Rsp = rnd − Cha·x`; the verifier checks `φ(Rsp)·y^Cha = Comm`.
//!
//! In the non-interactive form the challenge is
//! `hash_to_scalar([tag] ‖ [statement] ‖ [n] ‖ [comm_1] … [comm_n] ‖ [message])`
//! where `[x]` is `x` preceded by its 4-byte big-endian length, and the
//! verifier hashes the recomputed commitments `y^Cha·φ(Rsp)`.
//!
//! The opening proof, whose witness lives in G2, is in [`g2`].

pub mod families;
pub mod g2;
mod proof;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    hash_to_scalar, uncounted, AlgebraError, Framer, G1Point, G2Point, GtPoint, Scalar,
};

pub use g2::{fs_prove_g2, fs_verify_g2, G2Witness};
pub use proof::{DomainTag, Responses, SpkProof};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SigmaError {
    #[error("witness has {got} components, statement expects {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("relation has {bases} bases but {indices} witness indices")]
    BasesIndicesMismatch { bases: usize, indices: usize },
    #[error("relation mixes elements of different groups")]
    GroupMismatch,
    #[error("witness index {index} out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },
    #[error("witness does not satisfy the statement")]
    UnsatisfiedWitness,
    #[error("transcripts share the same challenge")]
    EqualChallenges,
    #[error("forked transcripts must share their commitments")]
    CommitmentMismatch,
    #[error("transcript does not verify")]
    InvalidTranscript,
    #[error("malformed proof: {0}")]
    MalformedProof(&'static str),
    #[error("decode: {0}")]
    Decode(AlgebraError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    G1,
    G2,
    Gt,
}

/// A group element tagged with its group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Element {
    G1(G1Point),
    G2(G2Point),
    Gt(GtPoint),
}

impl Element {
    pub fn kind(&self) -> GroupKind {
        match self {
            Element::G1(_) => GroupKind::G1,
            Element::G2(_) => GroupKind::G2,
            Element::Gt(_) => GroupKind::Gt,
        }
    }

    pub fn identity(kind: GroupKind) -> Element {
        match kind {
            GroupKind::G1 => Element::G1(G1Point::identity()),
            GroupKind::G2 => Element::G2(G2Point::identity()),
            GroupKind::Gt => Element::Gt(GtPoint::identity()),
        }
    }

    pub fn exp(&self, k: &Scalar) -> Element {
        match self {
            Element::G1(p) => Element::G1(p.exp(k)),
            Element::G2(p) => Element::G2(p.exp(k)),
            Element::Gt(p) => Element::Gt(p.exp(k)),
        }
    }

    /// Group operation; `None` across groups.
    pub fn op(&self, other: &Element) -> Option<Element> {
        match (self, other) {
            (Element::G1(a), Element::G1(b)) => Some(Element::G1(*a * *b)),
            (Element::G2(a), Element::G2(b)) => Some(Element::G2(*a * *b)),
            (Element::Gt(a), Element::Gt(b)) => Some(Element::Gt(*a * *b)),
            _ => None,
        }
    }

    /// Group-kind byte followed by the canonical encoding.
    pub fn to_bytes(&self) -> Vec<u8> {
        let (kind, body): (u8, Vec<u8>) = match self {
            Element::G1(p) => (1, p.to_bytes().to_vec()),
            Element::G2(p) => (2, p.to_bytes().to_vec()),
            Element::Gt(p) => (3, p.to_bytes().to_vec()),
        };
        let mut out = Vec::with_capacity(1 + body.len());
        out.push(kind);
        out.extend_from_slice(&body);
        out
    }
}

/// `target = ∏ bases[j]^{w[witness_indices[j]]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearRelation {
    target: Element,
    bases: Vec<Element>,
    witness_indices: Vec<usize>,
}

impl LinearRelation {
    pub fn new(
        target: Element,
        bases: Vec<Element>,
        witness_indices: Vec<usize>,
    ) -> Result<Self, SigmaError> {
        if bases.len() != witness_indices.len() {
            return Err(SigmaError::BasesIndicesMismatch {
                bases: bases.len(),
                indices: witness_indices.len(),
            });
        }
        if bases.iter().any(|b| b.kind() != target.kind()) {
            return Err(SigmaError::GroupMismatch);
        }
        Ok(LinearRelation {
            target,
            bases,
            witness_indices,
        })
    }

    pub fn target(&self) -> &Element {
        &self.target
    }

    pub fn bases(&self) -> &[Element] {
        &self.bases
    }

    pub fn witness_indices(&self) -> &[usize] {
        &self.witness_indices
    }

    /// `∏ bases[j]^{values[idx_j]}`.
    fn image(&self, values: &[Scalar]) -> Element {
        self.bases.iter().zip(&self.witness_indices).fold(
            Element::identity(self.target.kind()),
            |acc, (b, &i)| {
                acc.op(&b.exp(&values[i]))
                    .expect("bases share the target's group")
            },
        )
    }
}

/// A conjunction of linear relations over a shared scalar witness vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Statement {
    relations: Vec<LinearRelation>,
    arity: usize,
}

impl Statement {
    pub fn new(relations: Vec<LinearRelation>, arity: usize) -> Result<Self, SigmaError> {
        for r in &relations {
            if let Some(&index) = r.witness_indices.iter().find(|&&i| i >= arity) {
                return Err(SigmaError::IndexOutOfRange { index, arity });
            }
        }
        Ok(Statement { relations, arity })
    }

    pub fn relations(&self) -> &[LinearRelation] {
        &self.relations
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_satisfied_by(&self, witness: &ScalarWitness) -> bool {
        witness.values.len() == self.arity
            && self
                .relations
                .iter()
                .all(|r| r.image(&witness.values) == r.target)
    }

    /// Canonical encoding hashed into the Fiat-Shamir transcript.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut f = Framer::new();
        f.u32(self.arity as u32).u32(self.relations.len() as u32);
        for r in &self.relations {
            f.field(&r.target.to_bytes()).u32(r.bases.len() as u32);
            for (b, &i) in r.bases.iter().zip(&r.witness_indices) {
                f.field(&b.to_bytes()).u32(i as u32);
            }
        }
        f.finish()
    }

    fn check_arity(&self, got: usize) -> Result<(), SigmaError> {
        if got != self.arity {
            return Err(SigmaError::ArityMismatch {
                expected: self.arity,
                got,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalarWitness {
    pub values: Vec<Scalar>,
}

impl ScalarWitness {
    pub fn new(values: Vec<Scalar>) -> Self {
        ScalarWitness { values }
    }
}

/// Prover randomness `rnd`, one scalar per witness component.
pub struct ProverNonces(Vec<Scalar>);

/// One run of the interactive protocol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub commitments: Vec<Element>,
    pub challenge: Scalar,
    pub responses: Vec<Scalar>,
}

/// First move: checks the witness eagerly, samples `rnd` and returns `φ(rnd)`.
pub fn commit<R: RngCore + CryptoRng + ?Sized>(
    statement: &Statement,
    witness: &ScalarWitness,
    rng: &mut R,
) -> Result<(ProverNonces, Vec<Element>), SigmaError> {
    statement.check_arity(witness.values.len())?;
    if !uncounted(|| statement.is_satisfied_by(witness)) {
        return Err(SigmaError::UnsatisfiedWitness);
    }
    let nonces: Vec<Scalar> = (0..statement.arity)
        .map(|_| Scalar::random(rng, false))
        .collect();
    let comms = statement
        .relations
        .iter()
        .map(|r| r.image(&nonces))
        .collect();
    Ok((ProverNonces(nonces), comms))
}

/// Third move: `Rsp_k = rnd_k − Cha·x_k`.
pub fn respond(nonces: &ProverNonces, witness: &ScalarWitness, challenge: &Scalar) -> Vec<Scalar> {
    nonces
        .0
        .iter()
        .zip(&witness.values)
        .map(|(r, x)| *r - *challenge * *x)
        .collect()
}

/// `target^Cha · ∏ bases^Rsp` for every relation; `None` on arity mismatch.
pub fn recompute_commitments(
    statement: &Statement,
    challenge: &Scalar,
    responses: &[Scalar],
) -> Option<Vec<Element>> {
    if responses.len() != statement.arity {
        return None;
    }
    statement
        .relations
        .iter()
        .map(|r| r.target.exp(challenge).op(&r.image(responses)))
        .collect()
}

/// Interactive verifier check `φ(Rsp)·y^Cha = Comm`.
pub fn verify_transcript(statement: &Statement, t: &Transcript) -> bool {
    t.commitments.len() == statement.relations.len()
        && recompute_commitments(statement, &t.challenge, &t.responses)
            .is_some_and(|c| c == t.commitments)
}

/// Special-soundness extractor: from two accepting transcripts with equal
/// commitments and distinct challenges, `x_k = (Rsp_a,k − Rsp_b,k)/(Cha_b − Cha_a)`.
pub fn extract_witness(
    statement: &Statement,
    a: &Transcript,
    b: &Transcript,
) -> Result<ScalarWitness, SigmaError> {
    if a.commitments != b.commitments {
        return Err(SigmaError::CommitmentMismatch);
    }
    let denom = (b.challenge - a.challenge)
        .inverse()
        .ok_or(SigmaError::EqualChallenges)?;
    if !verify_transcript(statement, a) || !verify_transcript(statement, b) {
        return Err(SigmaError::InvalidTranscript);
    }
    let values = a
        .responses
        .iter()
        .zip(&b.responses)
        .map(|(ra, rb)| (*ra - *rb) * denom)
        .collect();
    Ok(ScalarWitness { values })
}

/// The Fiat-Shamir challenge for a tagged transcript.
pub fn fs_challenge(
    tag: DomainTag,
    statement_bytes: &[u8],
    commitments: &[Element],
    message: &[u8],
) -> Scalar {
    let mut f = Framer::new();
    f.field(tag.as_bytes())
        .field(statement_bytes)
        .u32(commitments.len() as u32);
    for c in commitments {
        f.field(&c.to_bytes());
    }
    f.field(message);
    hash_to_scalar(&f.finish())
}

pub fn fs_prove_scalars<R: RngCore + CryptoRng + ?Sized>(
    statement: &Statement,
    witness: &ScalarWitness,
    message: &[u8],
    tag: DomainTag,
    rng: &mut R,
) -> Result<SpkProof, SigmaError> {
    let (nonces, comms) = commit(statement, witness, rng)?;
    let challenge = fs_challenge(tag, &statement.to_bytes(), &comms, message);
    let responses = respond(&nonces, witness, &challenge);
    Ok(SpkProof {
        tag,
        challenge,
        responses: Responses::Scalars(responses),
    })
}

pub fn fs_verify_scalars(statement: &Statement, proof: &SpkProof, message: &[u8]) -> bool {
    let Some(responses) = proof.scalar_responses() else {
        return false;
    };
    let Some(comms) = recompute_commitments(statement, &proof.challenge, responses) else {
        return false;
    };
    fs_challenge(proof.tag, &statement.to_bytes(), &comms, message) == proof.challenge
}
