#![allow(dead_code)]

use ngs::ds::{ds_keygen, DsKeyPair};
use ngs::ngs::{
    ikg, iss, join, okg, random_nick, GroupState, IssuerKeys, JoinRequest, MemberSecret, Nickname,
    OpenerKeys, UserIndex,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// A group with `n` honestly joined members.
pub struct Group {
    pub issuer: IssuerKeys,
    pub opener: OpenerKeys,
    pub state: GroupState,
    pub keys: Vec<DsKeyPair>,
    pub members: Vec<MemberSecret>,
    pub requests: Vec<JoinRequest>,
    pub rng: ChaCha20Rng,
}

impl Group {
    pub fn new(seed: u64, n: u32) -> Group {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let issuer = ikg(&mut rng);
        let opener = okg(&mut rng);
        let mut state = GroupState::with_keys(issuer.public, opener.public);
        let mut keys = Vec::new();
        let mut members = Vec::new();
        let mut requests = Vec::new();
        for i in 0..n {
            let kp = ds_keygen(&mut rng);
            state.register_user(UserIndex(i), kp.upk).unwrap();
            let (ms, req) = join(&kp.usk, &opener.public, &mut rng);
            iss(UserIndex(i), &issuer.secret, &req, &opener.public, &mut state).unwrap();
            keys.push(kp);
            members.push(ms);
            requests.push(req);
        }
        Group {
            issuer,
            opener,
            state,
            keys,
            members,
            requests,
            rng,
        }
    }

    pub fn mpk(&self, i: u32) -> Nickname {
        *self.state.mpk(UserIndex(i)).unwrap()
    }

    pub fn nick(&mut self, i: u32) -> Nickname {
        let mpk = self.mpk(i);
        random_nick(&mpk, &mut self.rng)
    }
}
