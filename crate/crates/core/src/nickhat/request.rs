use serde::{Deserialize, Serialize};

use crate::algebra::encoding::hex_bytes;
use crate::algebra::Framer;
use crate::ngs::Nickname;

use super::{Address, Amount, TokenId};

/// Domain tag of the signed request encoding.
pub const REQUEST_DST: &[u8] = b"NICKHAT-REQ-v1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RequestKind {
    Transfer {
        to: Nickname,
        token: TokenId,
        amount: Amount,
    },
    Withdraw {
        to: Address,
        token: TokenId,
        amount: Amount,
    },
    /// Lets the HTLC contract lock up to `amount` of the source's balance.
    Approve { token: TokenId, amount: Amount },
    Lock {
        recipient: Nickname,
        token: TokenId,
        amount: Amount,
        #[serde(with = "hex_bytes")]
        hashlock: [u8; 32],
        timelock: u64,
    },
    Claim {
        lock_id: u64,
        #[serde(with = "hex_bytes")]
        preimage: Vec<u8>,
    },
    Refund { lock_id: u64 },
}

impl RequestKind {
    pub fn code(&self) -> u8 {
        match self {
            RequestKind::Transfer { .. } => 1,
            RequestKind::Withdraw { .. } => 2,
            RequestKind::Approve { .. } => 3,
            RequestKind::Lock { .. } => 4,
            RequestKind::Claim { .. } => 5,
            RequestKind::Refund { .. } => 6,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RequestKind::Transfer { .. } => "transfer",
            RequestKind::Withdraw { .. } => "withdraw",
            RequestKind::Approve { .. } => "approve",
            RequestKind::Lock { .. } => "lock",
            RequestKind::Claim { .. } => "claim",
            RequestKind::Refund { .. } => "refund",
        }
    }
}

/// A request from a nickname holder, relayed to the forwarder together
/// with a nickname signature over [`TransferRequest::to_bytes`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferRequest {
    pub source: Nickname,
    pub nonce: u64,
    #[serde(flatten)]
    pub kind: RequestKind,
}

impl TransferRequest {
    /// `[dst] ‖ code ‖ [source] ‖ nonce ‖ params`, fields length-prefixed
    /// and integers big-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut f = Framer::new();
        f.field(REQUEST_DST)
            .raw(&[self.kind.code()])
            .field(&self.source.to_bytes())
            .u64(self.nonce);
        match &self.kind {
            RequestKind::Transfer { to, token, amount } => {
                f.field(&to.to_bytes()).u32(token.0).u64(*amount);
            }
            RequestKind::Withdraw { to, token, amount } => {
                f.field(&to.0).u32(token.0).u64(*amount);
            }
            RequestKind::Approve { token, amount } => {
                f.u32(token.0).u64(*amount);
            }
            RequestKind::Lock {
                recipient,
                token,
                amount,
                hashlock,
                timelock,
            } => {
                f.field(&recipient.to_bytes())
                    .u32(token.0)
                    .u64(*amount)
                    .field(hashlock)
                    .u64(*timelock);
            }
            RequestKind::Claim { lock_id, preimage } => {
                f.u64(*lock_id).field(preimage);
            }
            RequestKind::Refund { lock_id } => {
                f.u64(*lock_id);
            }
        }
        f.finish()
    }
}
