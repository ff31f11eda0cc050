//! Deterministic in-process simulation of an escrowed token system with
//! nickname-addressed balances.
//!
//! Users deposit ERC20-style tokens into an escrow contract, crediting a
//! nickname; the deposit is announced so the owner can find it by tracing.
//! Nickname holders move funds through a forwarder that checks group
//! validity and the nickname signature on a canonical request encoding
//! before dispatching it. A supervisor holding the opener key can audit any
//! announced nickname. A small hashed-time-lock contract sits on top.

mod ledger;
mod request;
pub mod script;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::ngs::NgsError;

pub use ledger::{Announcement, HtlcLock, LockState, Ledger, LedgerSnapshot, RelayRecord, Relayer};
pub use request::{RequestKind, TransferRequest, REQUEST_DST};

pub type Amount = u64;

/// A 20-byte account identifier.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address(pub [u8; 20]);

impl Address {
    /// Deterministic address for a human-readable label.
    pub fn from_label(label: &str) -> Address {
        let d = Sha256::digest(label.as_bytes());
        let mut a = [0u8; 20];
        a.copy_from_slice(&d[..20]);
        Address(a)
    }

    pub fn escrow() -> Address {
        Address::from_label("nickhat/escrow")
    }

    pub fn htlc() -> Address {
        Address::from_label("nickhat/htlc")
    }

    pub fn is_contract(&self) -> bool {
        *self == Address::escrow() || *self == Address::htlc()
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl std::str::FromStr for Address {
    type Err = AlgebraError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = hex::decode(s.strip_prefix("0x").unwrap_or(s))
            .map_err(|_| AlgebraError::NonCanonical("address"))?;
        let arr: [u8; 20] = bytes.try_into().map_err(|b: Vec<u8>| AlgebraError::Length {
            what: "address",
            expected: 20,
            got: b.len(),
        })?;
        Ok(Address(arr))
    }
}

impl Serialize for Address {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct TokenId(pub u32);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("forwarder: signature or nickname rejected")]
    Forwarder,
    #[error("replay: expected nonce {expected}, got {got}")]
    Replay { expected: u64, got: u64 },
    #[error("funds: balance {available} below {requested}")]
    Funds { available: Amount, requested: Amount },
    #[error("allowance: {available} approved, {requested} requested")]
    Allowance { available: Amount, requested: Amount },
    #[error("nickname fails group verification")]
    InvalidNickname,
    #[error("master public key already registered")]
    DuplicateKey,
    #[error("amount must be positive")]
    ZeroAmount,
    #[error("amount overflow")]
    Overflow,
    #[error("contract addresses cannot act as users")]
    ContractAddress,
    #[error("unknown lock {0}")]
    UnknownLock(u64),
    #[error("lock {0} is no longer open")]
    LockClosed(u64),
    #[error("preimage does not match the hashlock")]
    WrongPreimage,
    #[error("refund before timelock {timelock} (height {height})")]
    EarlyRefund { height: u64, timelock: u64 },
    #[error("requester is not a party of lock {0}")]
    NotParty(u64),
    #[error("nickname was never announced")]
    NotAnnounced,
    #[error("audit failed: {0}")]
    Audit(#[from] NgsError),
    #[error("audit proof does not judge")]
    AuditProofRejected,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn address_round_trips_and_contracts_are_distinct() {
        let a = Address::from_label("alice");
        assert_eq!(a.to_string().parse::<Address>().unwrap(), a);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(serde_json::from_str::<Address>(&json).unwrap(), a);
        assert_ne!(Address::escrow(), Address::htlc());
        assert!(Address::escrow().is_contract() && !a.is_contract());
        assert!("0x1234".parse::<Address>().is_err());
    }
}
