use std::collections::BTreeMap;

use rand::{CryptoRng, RngCore};

use crate::algebra::{
    hash_to_g1, pairing, pairing_product_is_identity, pairings_equal, Framer, G1Point, G2Point,
    Scalar, H_DST,
};
use crate::ds::{ds_keygen, ds_sign, ds_verify, DsKeyPair};
use crate::sigma::families::{pk_j_statement, spk_s_statement};
use crate::sigma::g2::{fs_prove_g2, fs_verify_g2, G2Witness};
use crate::sigma::{
    fs_prove_scalars, fs_verify_scalars, DomainTag, ScalarWitness, SigmaError, SpkProof,
};

use super::state::GroupState;
use super::types::{
    EncryptedTrapdoor, IssuerKeys, IssuerPublicKey, IssuerSecretKey, JoinRequest, MemberSecret,
    Nickname, OpenerKeys, OpenerPublicKey, OpenerSecretKey, OpeningProof, RegistrationEntry,
    UserIndex,
};
use super::{IssueRejection, NgsError};

pub fn ikg<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> IssuerKeys {
    let x = Scalar::random(rng, true);
    let y = Scalar::random(rng, true);
    let g_hat = G2Point::generator();
    IssuerKeys {
        public: IssuerPublicKey {
            x_hat: g_hat.exp(&x),
            y_hat: g_hat.exp(&y),
        },
        secret: IssuerSecretKey { x, y },
    }
}

pub fn okg<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> OpenerKeys {
    let z = Scalar::random(rng, true);
    OpenerKeys {
        public: OpenerPublicKey {
            z_hat: G2Point::generator().exp(&z),
        },
        secret: OpenerSecretKey { z },
    }
}

/// Generates a user key pair and publishes it as `upk[i]`.
pub fn ukg<R: RngCore + CryptoRng + ?Sized>(
    i: UserIndex,
    state: &mut GroupState,
    rng: &mut R,
) -> Result<DsKeyPair, NgsError> {
    if state.upk(i).is_some() {
        return Err(NgsError::AlreadyRegistered(i));
    }
    let kp = ds_keygen(rng);
    state.register_user(i, kp.upk)?;
    Ok(kp)
}

fn class_base(f: &G1Point) -> G1Point {
    hash_to_g1(&f.to_bytes(), H_DST)
}

/// User side of the join handshake.
pub fn join<R: RngCore + CryptoRng + ?Sized>(
    usk: &Scalar,
    opk: &OpenerPublicKey,
    rng: &mut R,
) -> (MemberSecret, JoinRequest) {
    let alpha = Scalar::random(rng, true);
    let s = Scalar::random(rng, true);
    let g_hat = G2Point::generator();

    let f = G1Point::generator().exp(&alpha);
    let u = class_base(&f);
    let w = u.exp(&alpha);
    let tau = g_hat.exp(&alpha);
    let s_hat = g_hat.exp(&s);
    let f_prime = tau * opk.z_hat.exp(&s);

    let statement = pk_j_statement(&f, &w, &u, &s_hat, &f_prime, &opk.z_hat);
    let pi_j = fs_prove_scalars(
        &statement,
        &ScalarWitness::new(vec![alpha, s]),
        b"",
        DomainTag::PkJ,
        rng,
    )
    .expect("witness built from the statement's own exponents");

    let rho = pairing(&f, &g_hat);
    let sigma_ds = ds_sign(usk, &rho.to_bytes(), rng);
    (
        MemberSecret {
            msk: alpha,
            trapdoor: tau,
        },
        JoinRequest {
            f,
            w,
            enc_trapdoor: EncryptedTrapdoor { s_hat, f_prime },
            pi_j,
            sigma_ds,
        },
    )
}

/// Issuer side of the join handshake. On success writes `reg[i]` and
/// `mpk[i]` and returns the new master public key.
pub fn iss(
    i: UserIndex,
    isk: &IssuerSecretKey,
    req: &JoinRequest,
    opk: &OpenerPublicKey,
    state: &mut GroupState,
) -> Result<Nickname, NgsError> {
    let upk = *state.upk(i).ok_or(NgsError::UnknownUser(i))?;
    if state.is_member(i) {
        return Err(NgsError::AlreadyJoined(i));
    }
    if req.f.is_identity() || req.w.is_identity() || state.has_seen(&req.f) {
        return Err(NgsError::Rejected(IssueRejection::FreshF));
    }
    let u = class_base(&req.f);
    let et = &req.enc_trapdoor;
    let statement = pk_j_statement(&req.f, &req.w, &u, &et.s_hat, &et.f_prime, &opk.z_hat);
    if req.pi_j.tag != DomainTag::PkJ || !fs_verify_scalars(&statement, &req.pi_j, b"") {
        return Err(NgsError::Rejected(IssueRejection::JoinProof));
    }
    let rho = pairing(&req.f, &G2Point::generator());
    if !ds_verify(&upk, &rho.to_bytes(), &req.sigma_ds) {
        return Err(NgsError::Rejected(IssueRejection::IdentityBinding));
    }
    let v = u.exp(&isk.x) * req.w.exp(&isk.y);
    let mpk = Nickname::new(u, v, req.w)?;
    state.admit(
        i,
        RegistrationEntry {
            f: req.f,
            enc_trapdoor: *et,
            rho,
            sigma_ds: req.sigma_ds.clone(),
        },
        mpk,
    );
    Ok(mpk)
}

/// `(u^r, v^r, w^r)` for a nonzero `r`.
pub fn nick(mpk: &Nickname, r: &Scalar) -> Result<Nickname, NgsError> {
    if r.is_zero() {
        return Err(NgsError::ZeroExponent);
    }
    Ok(Nickname::new(
        mpk.u().exp(r),
        mpk.v().exp(r),
        mpk.w().exp(r),
    )?)
}

/// A nickname with a fresh uniform nonzero exponent.
pub fn random_nick<R: RngCore + CryptoRng + ?Sized>(mpk: &Nickname, rng: &mut R) -> Nickname {
    nick(mpk, &Scalar::random(rng, true)).expect("nonzero exponent")
}

/// `e(v, ĝ) = e(u, X̂)·e(w, Ŷ)`, checked as one three-pairing product.
pub fn gvf(ipk: &IssuerPublicKey, nk: &Nickname) -> bool {
    pairing_product_is_identity(&[
        (*nk.v(), G2Point::generator()),
        (nk.u().inverse(), ipk.x_hat),
        (nk.w().inverse(), ipk.y_hat),
    ])
}

pub fn trace(ipk: &IssuerPublicKey, trapdoor: &G2Point, nk: &Nickname) -> bool {
    pairings_equal(nk.u(), trapdoor, nk.w(), &G2Point::generator()) && gvf(ipk, nk)
}

/// Scans `reg` in ascending index order for the member whose trapdoor
/// opens `nk`, and proves the match.
pub fn open<R: RngCore + CryptoRng + ?Sized>(
    osk: &OpenerSecretKey,
    nk: &Nickname,
    state: &GroupState,
    rng: &mut R,
) -> Result<(UserIndex, OpeningProof), NgsError> {
    let g = G1Point::generator();
    let target = pairing(nk.w(), &G2Point::generator());
    let mut hits = Vec::new();
    for (i, entry) in state.reg_table() {
        let tau = entry.enc_trapdoor.decrypt(osk);
        if pairing(nk.u(), &tau) == target && pairing(&g, &tau) == entry.rho {
            hits.push((*i, tau, entry));
        }
    }
    match hits.len() {
        0 => Err(NgsError::NotFound),
        1 => {
            let (i, tau, entry) = hits.remove(0);
            let witness = G2Witness::new(tau)?;
            let pi_o = fs_prove_g2(nk.u(), nk.w(), &g, &entry.rho, &witness, rng)?;
            Ok((
                i,
                OpeningProof {
                    rho: entry.rho,
                    sigma_ds: entry.sigma_ds.clone(),
                    pi_o,
                },
            ))
        }
        _ => Err(NgsError::AmbiguousOpening(
            hits.into_iter().map(|(i, _, _)| i).collect(),
        )),
    }
}

/// Accepts iff the opening proof is valid for `nk`, `ρ` carries a valid
/// signature under `upk[i]`, and `nk` is group-valid.
pub fn judge(
    nk: &Nickname,
    i: UserIndex,
    ipk: &IssuerPublicKey,
    proof: &OpeningProof,
    upk_table: &BTreeMap<UserIndex, G1Point>,
) -> bool {
    let Some(upk) = upk_table.get(&i) else {
        return false;
    };
    ds_verify(upk, &proof.rho.to_bytes(), &proof.sigma_ds)
        && fs_verify_g2(
            nk.u(),
            nk.w(),
            &G1Point::generator(),
            &proof.rho,
            &proof.pi_o,
        )
        && gvf(ipk, nk)
}

/// The signed message also carries `v`, so a signature cannot be moved to
/// a triple that differs only in its middle component.
fn bound_message(nk: &Nickname, message: &[u8]) -> Vec<u8> {
    Framer::new()
        .field(&nk.v().to_bytes())
        .field(message)
        .finish()
}

/// Signature of knowledge of `α` with `w = u^α`, bound to `message`.
pub fn sign<R: RngCore + CryptoRng + ?Sized>(
    nk: &Nickname,
    msk: &Scalar,
    message: &[u8],
    rng: &mut R,
) -> Result<SpkProof, NgsError> {
    fs_prove_scalars(
        &spk_s_statement(nk.u(), nk.w()),
        &ScalarWitness::new(vec![*msk]),
        &bound_message(nk, message),
        DomainTag::SpkS,
        rng,
    )
    .map_err(|e| match e {
        SigmaError::UnsatisfiedWitness => NgsError::KeyMismatch,
        e => e.into(),
    })
}

/// Verifies a nickname signature. Does not check group validity; see [`gvf`].
pub fn uvf(nk: &Nickname, message: &[u8], sigma: &SpkProof) -> bool {
    sigma.tag == DomainTag::SpkS
        && fs_verify_scalars(
            &spk_s_statement(nk.u(), nk.w()),
            sigma,
            &bound_message(nk, message),
        )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{count_ops, GtPoint};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    struct Group {
        issuer: IssuerKeys,
        opener: OpenerKeys,
        state: GroupState,
        members: Vec<(DsKeyPair, MemberSecret)>,
    }

    fn group(n: u32, seed: u64) -> (Group, ChaCha20Rng) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let issuer = ikg(&mut rng);
        let opener = okg(&mut rng);
        let mut state = GroupState::with_keys(issuer.public, opener.public);
        let mut members = Vec::new();
        for i in 0..n {
            let kp = ukg(UserIndex(i), &mut state, &mut rng).unwrap();
            let (ms, req) = join(&kp.usk, &opener.public, &mut rng);
            iss(
                UserIndex(i),
                &issuer.secret,
                &req,
                &opener.public,
                &mut state,
            )
            .unwrap();
            members.push((kp, ms));
        }
        (
            Group {
                issuer,
                opener,
                state,
                members,
            },
            rng,
        )
    }

    #[test]
    fn keygen_is_seeded_and_consistent() {
        let a = ikg(&mut ChaCha20Rng::seed_from_u64(1));
        let b = ikg(&mut ChaCha20Rng::seed_from_u64(1));
        assert_eq!(a, b);
        assert!(!a.secret.x.is_zero() && !a.secret.y.is_zero());
        let g = G1Point::generator();
        assert_eq!(
            pairing(&g, &a.public.x_hat),
            pairing(&g.exp(&a.secret.x), &G2Point::generator())
        );
        let o = okg(&mut ChaCha20Rng::seed_from_u64(2));
        assert_eq!(o.public.z_hat, G2Point::generator().exp(&o.secret.z));
    }

    #[test]
    fn join_outputs_are_well_formed() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let opener = okg(&mut rng);
        let kp = ds_keygen(&mut rng);
        let (ms, req) = join(&kp.usk, &opener.public, &mut rng);
        assert_eq!(ms.trapdoor, G2Point::generator().exp(&ms.msk));
        assert_eq!(req.enc_trapdoor.decrypt(&opener.secret), ms.trapdoor);
        let u = class_base(&req.f);
        let et = req.enc_trapdoor;
        let st = pk_j_statement(
            &req.f,
            &req.w,
            &u,
            &et.s_hat,
            &et.f_prime,
            &opener.public.z_hat,
        );
        assert!(fs_verify_scalars(&st, &req.pi_j, b""));
        let rho = pairing(&req.f, &G2Point::generator());
        assert!(ds_verify(&kp.upk, &rho.to_bytes(), &req.sigma_ds));
    }

    #[test]
    fn issuance_rules() {
        let (mut g, mut rng) = group(1, 4);
        let mpk = *g.state.mpk(UserIndex(0)).unwrap();
        assert!(gvf(&g.issuer.public, &mpk));
        g.state.check_invariants().unwrap();

        let kp = ukg(UserIndex(1), &mut g.state, &mut rng).unwrap();
        let (_, req) = join(&kp.usk, &g.opener.public, &mut rng);

        let mut replay = req.clone();
        replay.f = g.state.reg(UserIndex(0)).unwrap().f;
        assert_eq!(
            iss(
                UserIndex(1),
                &g.issuer.secret,
                &replay,
                &g.opener.public,
                &mut g.state
            ),
            Err(NgsError::Rejected(IssueRejection::FreshF))
        );

        let mut squared = req.clone();
        squared.w = req.w * req.w;
        assert_eq!(
            iss(
                UserIndex(1),
                &g.issuer.secret,
                &squared,
                &g.opener.public,
                &mut g.state
            ),
            Err(NgsError::Rejected(IssueRejection::JoinProof))
        );

        let other = ds_keygen(&mut rng);
        let mut rebound = req.clone();
        rebound.sigma_ds = ds_sign(&other.usk, b"whatever", &mut rng);
        assert_eq!(
            iss(
                UserIndex(1),
                &g.issuer.secret,
                &rebound,
                &g.opener.public,
                &mut g.state
            ),
            Err(NgsError::Rejected(IssueRejection::IdentityBinding))
        );

        assert_eq!(
            iss(
                UserIndex(9),
                &g.issuer.secret,
                &req,
                &g.opener.public,
                &mut g.state
            ),
            Err(NgsError::UnknownUser(UserIndex(9)))
        );
        assert!(!g.state.is_member(UserIndex(1)));

        iss(
            UserIndex(1),
            &g.issuer.secret,
            &req,
            &g.opener.public,
            &mut g.state,
        )
        .unwrap();
        assert_eq!(
            iss(
                UserIndex(1),
                &g.issuer.secret,
                &req,
                &g.opener.public,
                &mut g.state
            ),
            Err(NgsError::AlreadyJoined(UserIndex(1)))
        );
        g.state.check_invariants().unwrap();
    }

    #[test]
    fn nick_laws() {
        let (g, mut rng) = group(1, 5);
        let mpk = *g.state.mpk(UserIndex(0)).unwrap();
        assert_eq!(nick(&mpk, &Scalar::one()).unwrap(), mpk);
        assert_eq!(nick(&mpk, &Scalar::zero()), Err(NgsError::ZeroExponent));
        let a = Scalar::random(&mut rng, true);
        let b = Scalar::random(&mut rng, true);
        assert_eq!(
            nick(&nick(&mpk, &a).unwrap(), &b).unwrap(),
            nick(&mpk, &(a * b)).unwrap()
        );
        for _ in 0..20 {
            assert!(gvf(&g.issuer.public, &random_nick(&mpk, &mut rng)));
        }
    }

    #[test]
    fn gvf_rejects_tampering_and_accepts_hand_built_triples() {
        let (g, mut rng) = group(1, 6);
        let ipk = g.issuer.public;
        let mpk = *g.state.mpk(UserIndex(0)).unwrap();
        let bad = Nickname::new(*mpk.u(), *mpk.v() * G1Point::generator(), *mpk.w()).unwrap();
        assert!(!gvf(&ipk, &bad));

        let (x, y) = (g.issuer.secret.x, g.issuer.secret.y);
        let u = G1Point::random(&mut rng);
        let w = G1Point::random(&mut rng);
        let hand = Nickname::new(u, u.exp(&x) * w.exp(&y), w).unwrap();
        assert!(gvf(&ipk, &hand));
    }

    #[test]
    fn trace_matrix_is_diagonal() {
        let (g, mut rng) = group(3, 7);
        let ipk = g.issuer.public;
        for (j, (_, ms)) in g.members.iter().enumerate() {
            for i in 0..3u32 {
                let nk = random_nick(g.state.mpk(UserIndex(i)).unwrap(), &mut rng);
                assert_eq!(trace(&ipk, &ms.trapdoor, &nk), i as usize == j);
            }
        }
        let mpk = *g.state.mpk(UserIndex(0)).unwrap();
        let bad = Nickname::new(*mpk.u(), *mpk.v() * G1Point::generator(), *mpk.w()).unwrap();
        assert!(!trace(&ipk, &g.members[0].1.trapdoor, &bad));
    }

    #[test]
    fn open_and_judge() {
        let (g, mut rng) = group(4, 8);
        let ipk = g.issuer.public;
        for i in 0..4u32 {
            let nk = random_nick(g.state.mpk(UserIndex(i)).unwrap(), &mut rng);
            let (who, proof) = open(&g.opener.secret, &nk, &g.state, &mut rng).unwrap();
            assert_eq!(who, UserIndex(i));
            assert!(trace(&ipk, &g.members[i as usize].1.trapdoor, &nk));
            assert!(judge(&nk, who, &ipk, &proof, g.state.upk_table()));
            for j in (0..4u32).filter(|&j| j != i) {
                assert!(!judge(&nk, UserIndex(j), &ipk, &proof, g.state.upk_table()));
            }
            assert!(!judge(
                &nk,
                UserIndex(99),
                &ipk,
                &proof,
                g.state.upk_table()
            ));
            let bytes = proof.to_bytes();
            assert_eq!(OpeningProof::from_bytes(&bytes).unwrap(), proof);
        }

        // A class outside the group that still passes GVf.
        let (x, y) = (g.issuer.secret.x, g.issuer.secret.y);
        let u = G1Point::random(&mut rng);
        let w = u.exp(&Scalar::random(&mut rng, true));
        let outsider = Nickname::new(u, u.exp(&x) * w.exp(&y), w).unwrap();
        assert!(gvf(&ipk, &outsider));
        assert_eq!(
            open(&g.opener.secret, &outsider, &g.state, &mut rng).unwrap_err(),
            NgsError::NotFound
        );
        assert_eq!(
            open(&g.opener.secret, &outsider, &GroupState::new(), &mut rng).unwrap_err(),
            NgsError::NotFound
        );
    }

    #[test]
    fn judge_rejects_invalid_nickname_with_valid_parts() {
        let (g, mut rng) = group(1, 9);
        let ipk = g.issuer.public;
        let mpk = *g.state.mpk(UserIndex(0)).unwrap();
        let bad = Nickname::new(*mpk.u(), *mpk.v() * G1Point::generator(), *mpk.w()).unwrap();
        let (i, proof) = open(&g.opener.secret, &bad, &g.state, &mut rng).unwrap();
        assert!(!judge(&bad, i, &ipk, &proof, g.state.upk_table()));

        let mut forged = proof.clone();
        forged.rho = GtPoint::random(&mut rng);
        assert!(!judge(&mpk, i, &ipk, &forged, g.state.upk_table()));
    }

    #[test]
    fn duplicate_registration_is_an_integrity_error() {
        let (mut g, mut rng) = group(2, 10);
        let e0 = g.state.reg(UserIndex(0)).unwrap().clone();
        let m0 = *g.state.mpk(UserIndex(0)).unwrap();
        g.state.force_entry(UserIndex(1), e0, m0);
        let nk = random_nick(&m0, &mut rng);
        let err = open(&g.opener.secret, &nk, &g.state, &mut rng).unwrap_err();
        assert_eq!(
            err,
            NgsError::AmbiguousOpening(vec![UserIndex(0), UserIndex(1)])
        );
        assert!(err.is_integrity());
        assert!(g.state.check_invariants().is_err());
    }

    #[test]
    fn sign_and_verify() {
        let (g, mut rng) = group(2, 11);
        let mpk = *g.state.mpk(UserIndex(0)).unwrap();
        let nk = random_nick(&mpk, &mut rng);
        let msk = g.members[0].1.msk;
        let sigma = sign(&nk, &msk, b"pay 5", &mut rng).unwrap();
        assert!(uvf(&nk, b"pay 5", &sigma));
        assert!(!uvf(&nk, b"pay 6", &sigma));
        let nk2 = random_nick(&mpk, &mut rng);
        assert!(!uvf(&nk2, b"pay 5", &sigma));
        let shifted = Nickname::new(*nk.u(), *nk.v() * G1Point::generator(), *nk.w()).unwrap();
        assert!(!uvf(&shifted, b"pay 5", &sigma));

        assert_eq!(
            sign(&nk, &g.members[1].1.msk, b"pay 5", &mut rng),
            Err(NgsError::KeyMismatch)
        );

        let a = sign(&nk, &msk, b"m", &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        let b = sign(&nk, &msk, b"m", &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn operation_counts() {
        let (g, mut rng) = group(1, 12);
        let mpk = *g.state.mpk(UserIndex(0)).unwrap();
        let msk = g.members[0].1.msk;
        let ((nk, sigma), c) = count_ops(|| {
            let nk = random_nick(&mpk, &mut rng);
            let sigma = sign(&nk, &msk, b"m", &mut rng).unwrap();
            (nk, sigma)
        });
        assert_eq!((c.g1_exp, c.pairings), (4, 0));
        let (ok, c) = count_ops(|| gvf(&g.issuer.public, &nk) && uvf(&nk, b"m", &sigma));
        assert!(ok);
        assert_eq!((c.g1_exp, c.pairings), (2, 3));
    }
}
