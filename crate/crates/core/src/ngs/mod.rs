//! Nicknames for group signatures.
//!
//! An issuer admits members by certifying a key triple `mpk = (u, v, w)`
//! with `v = u^x·w^y`. Anyone can derive fresh nicknames `(u^r, v^r, w^r)`
//! from a published `mpk`; only the member (through its trapdoor `τ = ĝ^α`)
//! and the opener (who decrypts registered trapdoors) can tell which member
//! a nickname belongs to.
//!
//! [`gvf`] checks group validity and [`uvf`] checks a signature under a
//! nickname. They are separate on purpose: a verifier that wants "a valid
//! member signed this" must call both.

mod scheme;
mod state;
mod types;

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::ds::DsError;
use crate::sigma::SigmaError;

pub use scheme::{gvf, ikg, iss, join, judge, nick, okg, open, random_nick, sign, trace, ukg, uvf};
pub use state::{GroupEntry, GroupFile, GroupState, GROUP_FORMAT_VERSION};
pub use types::{
    EncryptedTrapdoor, IssuerKeys, IssuerPublicKey, IssuerSecretKey, JoinRequest, MemberSecret,
    Nickname, OpenerKeys, OpenerPublicKey, OpenerSecretKey, OpeningProof, RegistrationEntry,
    UserIndex, NICKNAME_BYTES,
};

/// Why the issuer turned a join request down.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum IssueRejection {
    #[error("fresh-f violation")]
    FreshF,
    #[error("join proof")]
    JoinProof,
    #[error("identity binding")]
    IdentityBinding,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NgsError {
    #[error("nickname exponent must be nonzero")]
    ZeroExponent,
    #[error("secret key does not match the nickname")]
    KeyMismatch,
    #[error("no public key registered for user {0}")]
    UnknownUser(UserIndex),
    #[error("user {0} already registered")]
    AlreadyRegistered(UserIndex),
    #[error("user {0} already joined")]
    AlreadyJoined(UserIndex),
    #[error("user {0} has no registration entry")]
    NotJoined(UserIndex),
    #[error("join request rejected: {0}")]
    Rejected(IssueRejection),
    #[error("no registered member matches the nickname")]
    NotFound,
    #[error("integrity error: nickname matches several members {0:?}")]
    AmbiguousOpening(Vec<UserIndex>),
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("proof: {0}")]
    Sigma(#[from] SigmaError),
    #[error("signature: {0}")]
    Ds(#[from] DsError),
    #[error("decode: {0}")]
    Decode(#[from] AlgebraError),
}

impl NgsError {
    /// Errors that indicate corrupted group state rather than bad input.
    pub fn is_integrity(&self) -> bool {
        matches!(self, NgsError::AmbiguousOpening(_) | NgsError::Integrity(_))
    }
}
