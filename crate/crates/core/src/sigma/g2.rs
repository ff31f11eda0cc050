//! Proof of knowledge of a G2 trapdoor:
//! `PK{(τ): e(w, ĝ) = e(u, τ) ∧ ρ = e(g, τ)}`.
//!
//! The prover commits `(e(u, r̂), e(g, r̂))` for a uniform `r̂ ∈ G2` and
//! answers `Rsp = r̂ · τ^{−Cha}`; the verifier recomputes
//! `(e(u, Rsp)·e(w, ĝ)^Cha, e(g, Rsp)·ρ^Cha)`.

use rand::{CryptoRng, RngCore};

use crate::algebra::{
    pairing, pairings_equal, uncounted, Framer, G1Point, G2Point, GtPoint,
};

use super::{fs_challenge, DomainTag, Element, Responses, SigmaError, SpkProof};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct G2Witness {
    tau: G2Point,
}

impl G2Witness {
    pub fn new(tau: G2Point) -> Result<Self, SigmaError> {
        if tau.is_identity() {
            return Err(SigmaError::Decode(crate::algebra::AlgebraError::Identity(
                "G2",
            )));
        }
        Ok(G2Witness { tau })
    }

    pub fn tau(&self) -> &G2Point {
        &self.tau
    }
}

fn statement_bytes(u: &G1Point, w: &G1Point, g: &G1Point, rho: &GtPoint) -> Vec<u8> {
    Framer::new()
        .field(&u.to_bytes())
        .field(&w.to_bytes())
        .field(&g.to_bytes())
        .field(&G2Point::generator().to_bytes())
        .field(&rho.to_bytes())
        .finish()
}

pub fn fs_prove_g2<R: RngCore + CryptoRng + ?Sized>(
    u: &G1Point,
    w: &G1Point,
    g: &G1Point,
    rho: &GtPoint,
    witness: &G2Witness,
    rng: &mut R,
) -> Result<SpkProof, SigmaError> {
    let g_hat = G2Point::generator();
    let tau = witness.tau;
    let holds = uncounted(|| pairings_equal(u, &tau, w, &g_hat) && pairing(g, &tau) == *rho);
    if !holds {
        return Err(SigmaError::UnsatisfiedWitness);
    }
    let r_hat = G2Point::random(rng);
    let comms = [
        Element::Gt(pairing(u, &r_hat)),
        Element::Gt(pairing(g, &r_hat)),
    ];
    let challenge = fs_challenge(DomainTag::PkO, &statement_bytes(u, w, g, rho), &comms, b"");
    let response = r_hat * tau.exp(&challenge).inverse();
    Ok(SpkProof {
        tag: DomainTag::PkO,
        challenge,
        responses: Responses::G2(response),
    })
}

pub fn fs_verify_g2(
    u: &G1Point,
    w: &G1Point,
    g: &G1Point,
    rho: &GtPoint,
    proof: &SpkProof,
) -> bool {
    let Responses::G2(rsp) = &proof.responses else {
        return false;
    };
    if proof.tag != DomainTag::PkO {
        return false;
    }
    let cha = &proof.challenge;
    let comms = [
        Element::Gt(pairing(u, rsp) * pairing(w, &G2Point::generator()).exp(cha)),
        Element::Gt(pairing(g, rsp) * rho.exp(cha)),
    ];
    fs_challenge(DomainTag::PkO, &statement_bytes(u, w, g, rho), &comms, b"") == *cha
}
