//! Stateful oracles of the security model, with the bookkeeping lists the
//! experiments inspect.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::algebra::{G1Point, G2Point, Scalar};
use crate::ds::ds_keygen;
use crate::ngs::{
    iss, join, nick, sign, trace, GroupState, IssuerKeys, JoinRequest, MemberSecret, NgsError,
    Nickname, OpenerKeys, OpeningProof, RegistrationEntry, UserIndex,
};
use crate::sigma::SpkProof;

use super::OracleError;

/// Phase of a corrupted user: `Cont` before its join request was handled,
/// `Accept` after.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CorruptPhase {
    Cont,
    Accept,
}

/// `(i, m, nk, σ)` as stored in the challenge and signing lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedRecord {
    pub user: UserIndex,
    pub message: Vec<u8>,
    pub nickname: Nickname,
    pub sigma: SpkProof,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub user: UserIndex,
    pub nickname: Nickname,
    pub result: bool,
}

/// The lists kept by the oracles. All start empty.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleLists {
    /// Honest users with their trapdoors.
    pub honest: BTreeMap<UserIndex, G2Point>,
    /// Corrupted users with their phases. A user may hold both phases.
    pub corrupt: BTreeSet<(UserIndex, CorruptPhase)>,
    pub challenged: Vec<SignedRecord>,
    /// Users whose secret keys were revealed.
    pub revealed: BTreeSet<UserIndex>,
    pub signed: Vec<SignedRecord>,
    pub traced: Vec<TraceRecord>,
}

impl OracleLists {
    pub fn is_honest(&self, i: UserIndex) -> bool {
        self.honest.contains_key(&i)
    }

    pub fn is_challenged(&self, i: UserIndex) -> bool {
        self.challenged.iter().any(|r| r.user == i)
    }

    pub fn is_traced(&self, i: UserIndex) -> bool {
        self.traced.iter().any(|r| r.user == i)
    }

    pub fn traced_true(&self, i: UserIndex, nk: &Nickname) -> bool {
        self.traced
            .iter()
            .any(|r| r.user == i && r.nickname == *nk && r.result)
    }

    pub fn was_signed(&self, i: UserIndex, m: &[u8], nk: &Nickname) -> bool {
        self.signed
            .iter()
            .any(|r| r.user == i && r.message == m && r.nickname == *nk)
    }
}

/// Secrets released by the key-reveal oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RevealedKeys {
    pub member: Option<MemberSecret>,
    pub usk: Option<Scalar>,
}

/// A challenger holding fixed issuer and opener keys, the public tables
/// and the oracle lists.
pub struct OracleState {
    pub issuer: IssuerKeys,
    pub opener: OpenerKeys,
    pub group: GroupState,
    pub lists: OracleLists,
    usk: BTreeMap<UserIndex, Scalar>,
    msk: BTreeMap<UserIndex, MemberSecret>,
    req_u: BTreeMap<UserIndex, JoinRequest>,
    rng: ChaCha20Rng,
}

impl OracleState {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let issuer = crate::ngs::ikg(&mut rng);
        let opener = crate::ngs::okg(&mut rng);
        OracleState {
            group: GroupState::with_keys(issuer.public, opener.public),
            issuer,
            opener,
            lists: OracleLists::default(),
            usk: BTreeMap::new(),
            msk: BTreeMap::new(),
            req_u: BTreeMap::new(),
            rng,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha20Rng {
        &mut self.rng
    }

    fn fresh_index(&self, i: UserIndex) -> Result<(), OracleError> {
        if self.group.upk(i).is_some() {
            return Err(OracleError::Refused("index already in use"));
        }
        Ok(())
    }

    fn user_join(&mut self, i: UserIndex) -> (G1Point, MemberSecret, JoinRequest) {
        let kp = ds_keygen(&mut self.rng);
        self.group.set_user_key(i, kp.upk);
        let (ms, req) = join(&kp.usk, &self.opener.public, &mut self.rng);
        self.usk.insert(i, kp.usk);
        self.msk.insert(i, ms.clone());
        self.req_u.insert(i, req.clone());
        self.lists.honest.insert(i, ms.trapdoor);
        (kp.upk, ms, req)
    }

    /// Adds and joins an honest user.
    pub fn add_u(&mut self, i: UserIndex) -> Result<G1Point, OracleError> {
        self.fresh_index(i)?;
        let (upk, _, req) = self.user_join(i);
        iss(
            i,
            &self.issuer.secret,
            &req,
            &self.opener.public,
            &mut self.group,
        )?;
        Ok(upk)
    }

    /// Sets `upk[i]` to an adversarial key and marks `i` corrupted.
    pub fn crpt_u(&mut self, i: UserIndex, upk: G1Point) {
        self.group.set_user_key(i, upk);
        self.lists.corrupt.insert((i, CorruptPhase::Cont));
    }

    /// Hands a corrupted user's join request to the honest issuer.
    pub fn snd_to_i(&mut self, i: UserIndex, req: &JoinRequest) -> Result<Nickname, OracleError> {
        if !self.lists.corrupt.remove(&(i, CorruptPhase::Cont)) {
            return Err(OracleError::Refused(
                "user is not corrupted or already sent",
            ));
        }
        self.lists.corrupt.insert((i, CorruptPhase::Accept));
        Ok(iss(
            i,
            &self.issuer.secret,
            req,
            &self.opener.public,
            &mut self.group,
        )?)
    }

    /// Runs the user side of joining for an honest user; issuance is left
    /// to the (adversarial) issuer.
    pub fn snd_to_u(&mut self, i: UserIndex) -> Result<JoinRequest, OracleError> {
        self.fresh_index(i)?;
        Ok(self.user_join(i).2)
    }

    /// Reveals `(msk[i], usk[i])` unless `i` was challenged.
    pub fn usk(&mut self, i: UserIndex) -> Result<RevealedKeys, OracleError> {
        if self.lists.is_challenged(i) {
            return Err(OracleError::Refused("user was challenged"));
        }
        self.lists.revealed.insert(i);
        Ok(RevealedKeys {
            member: self.msk.get(&i).cloned(),
            usk: self.usk.get(&i).copied(),
        })
    }

    pub fn rreg(&self, i: UserIndex) -> Option<RegistrationEntry> {
        self.group.reg(i).cloned()
    }

    /// Overwrites `reg[i]`. Only existing entries can be written.
    pub fn wreg(&mut self, i: UserIndex, entry: RegistrationEntry) -> Result<(), OracleError> {
        self.group
            .write_reg(i, entry)
            .map_err(|_| OracleError::Refused("no registration entry to overwrite"))
    }

    pub fn trace(&mut self, i: UserIndex, nk: &Nickname) -> Result<bool, OracleError> {
        let tau = *self
            .lists
            .honest
            .get(&i)
            .ok_or(OracleError::Refused("user is not honest"))?;
        let b = trace(&self.issuer.public, &tau, nk);
        self.lists.traced.push(TraceRecord {
            user: i,
            nickname: *nk,
            result: b,
        });
        Ok(b)
    }

    /// Signs for `i` under `nk`, only after a successful trace of `nk` by `i`.
    pub fn sig(&mut self, i: UserIndex, nk: &Nickname, m: &[u8]) -> Result<SpkProof, OracleError> {
        if !self.lists.traced_true(i, nk) {
            return Err(OracleError::Refused("nickname not traced by user"));
        }
        let msk = self.msk[&i].msk;
        let sigma = sign(nk, &msk, m, &mut self.rng)?;
        self.lists.signed.push(SignedRecord {
            user: i,
            message: m.to_vec(),
            nickname: *nk,
            sigma: sigma.clone(),
        });
        Ok(sigma)
    }

    /// The challenge oracle: a fresh nickname of `i_b` and a signature on `m`.
    pub fn ch(
        &mut self,
        b: bool,
        i0: UserIndex,
        i1: UserIndex,
        m: &[u8],
    ) -> Result<(Nickname, SpkProof), OracleError> {
        let l = &self.lists;
        if !l.is_honest(i0) || !l.is_honest(i1) {
            return Err(OracleError::Refused("challenged users must be honest"));
        }
        if l.is_traced(i0) || l.is_traced(i1) {
            return Err(OracleError::Refused("challenged user was traced"));
        }
        if l.revealed.contains(&i0) || l.revealed.contains(&i1) {
            return Err(OracleError::Refused("challenged user's keys were revealed"));
        }
        let ib = if b { i1 } else { i0 };
        let mpk = *self.group.mpk(ib).ok_or(OracleError::Refused(
            "challenged user has no master public key",
        ))?;
        let r = Scalar::random(&mut self.rng, true);
        let nk = nick(&mpk, &r)?;
        let sigma = sign(&nk, &self.msk[&ib].msk, m, &mut self.rng)?;
        for user in [i0, i1] {
            self.lists.challenged.push(SignedRecord {
                user,
                message: m.to_vec(),
                nickname: nk,
                sigma: sigma.clone(),
            });
        }
        Ok((nk, sigma))
    }

    /// Issues a pending honest request with the issuer key. Stands in for an
    /// adversary that controls the issuer.
    pub fn issue_pending(&mut self, i: UserIndex) -> Result<Nickname, NgsError> {
        let req = self.req_u.get(&i).ok_or(NgsError::UnknownUser(i))?.clone();
        iss(
            i,
            &self.issuer.secret,
            &req,
            &self.opener.public,
            &mut self.group,
        )
    }

    /// Opens `nk` with the opener key (the adversary holds it in several
    /// experiments).
    pub fn open(&mut self, nk: &Nickname) -> Result<(UserIndex, OpeningProof), NgsError> {
        crate::ngs::open(&self.opener.secret, nk, &self.group, &mut self.rng)
    }

    pub fn member_secret(&self, i: UserIndex) -> Option<&MemberSecret> {
        self.msk.get(&i)
    }

    pub fn join_request(&self, i: UserIndex) -> Option<&JoinRequest> {
        self.req_u.get(&i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ngs::random_nick;

    fn u(i: u32) -> UserIndex {
        UserIndex(i)
    }

    #[test]
    fn add_u_then_usk_reveals_keys() {
        let mut o = OracleState::new(1);
        o.add_u(u(0)).unwrap();
        let k = o.usk(u(0)).unwrap();
        assert!(k.member.is_some() && k.usk.is_some());
        assert!(o.lists.revealed.contains(&u(0)));
        assert_eq!(
            o.add_u(u(0)),
            Err(OracleError::Refused("index already in use"))
        );
    }

    #[test]
    fn every_refusal_branch_is_reachable() {
        let mut o = OracleState::new(2);
        o.add_u(u(0)).unwrap();
        o.add_u(u(1)).unwrap();
        o.add_u(u(2)).unwrap();
        o.snd_to_u(u(3)).unwrap();

        // Ch: not honest, traced, revealed, no mpk.
        assert!(matches!(
            o.ch(false, u(0), u(9), b"m"),
            Err(OracleError::Refused(_))
        ));
        assert!(matches!(
            o.ch(true, u(0), u(3), b"m"),
            Err(OracleError::Refused(_))
        ));
        let (nk, _) = o.ch(true, u(0), u(1), b"m").unwrap();

        // USK on a challenged user.
        assert!(matches!(o.usk(u(1)), Err(OracleError::Refused(_))));
        o.usk(u(2)).unwrap();
        assert!(matches!(
            o.ch(false, u(0), u(2), b"m"),
            Err(OracleError::Refused(_))
        ));

        // Sig without a successful trace, then after one.
        assert!(matches!(
            o.sig(u(1), &nk, b"x"),
            Err(OracleError::Refused(_))
        ));
        assert!(matches!(o.trace(u(9), &nk), Err(OracleError::Refused(_))));
        assert!(!o.trace(u(0), &nk).unwrap());
        assert!(matches!(
            o.sig(u(0), &nk, b"x"),
            Err(OracleError::Refused(_))
        ));
        assert!(o.trace(u(1), &nk).unwrap());
        o.sig(u(1), &nk, b"x").unwrap();
        assert!(matches!(
            o.ch(false, u(0), u(1), b"m"),
            Err(OracleError::Refused(_))
        ));

        // SndToI on a non-corrupted user, WReg on a missing entry.
        let req = o.join_request(u(3)).unwrap().clone();
        assert!(matches!(
            o.snd_to_i(u(3), &req),
            Err(OracleError::Refused(_))
        ));
        let e = o.rreg(u(0)).unwrap();
        assert!(matches!(
            o.wreg(u(7), e.clone()),
            Err(OracleError::Refused(_))
        ));
        o.wreg(u(0), e).unwrap();
    }

    #[test]
    fn corrupt_user_joins_once() {
        let mut o = OracleState::new(3);
        let kp = ds_keygen(o.rng());
        o.crpt_u(u(5), kp.upk);
        let opk = o.opener.public;
        let (_, req) = join(&kp.usk, &opk, o.rng());
        o.snd_to_i(u(5), &req).unwrap();
        assert!(o.lists.corrupt.contains(&(u(5), CorruptPhase::Accept)));
        assert!(matches!(
            o.snd_to_i(u(5), &req),
            Err(OracleError::Refused(_))
        ));
    }

    #[test]
    fn pending_requests_can_be_issued_by_the_adversary() {
        let mut o = OracleState::new(4);
        o.snd_to_u(u(0)).unwrap();
        assert!(o.group.mpk(u(0)).is_none());
        let mpk = o.issue_pending(u(0)).unwrap();
        let nk = random_nick(&mpk, o.rng());
        assert!(o.trace(u(0), &nk).unwrap());
    }
}
