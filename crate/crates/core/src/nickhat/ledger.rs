use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::encoding::hex_bytes;
use crate::algebra::G2Point;
use crate::ngs::{
    gvf, judge, open, trace, uvf, GroupState, IssuerPublicKey, Nickname, OpenerSecretKey,
    OpeningProof, UserIndex,
};
use crate::sigma::SpkProof;

use super::{Address, Amount, LedgerError, RequestKind, TokenId, TransferRequest};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Announcement {
    pub height: u64,
    pub nickname: Nickname,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LockState {
    Open,
    Claimed,
    Refunded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HtlcLock {
    pub sender: Nickname,
    pub recipient: Nickname,
    pub token: TokenId,
    pub amount: Amount,
    #[serde(with = "hex_bytes")]
    pub hashlock: [u8; 32],
    pub timelock: u64,
    pub state: LockState,
}

/// Single-owner ledger state. Every mutating operation either succeeds
/// and advances the block height by one, or fails leaving the ledger
/// unchanged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ledger {
    ipk: IssuerPublicKey,
    supervisor: Address,
    block_height: u64,
    supply: BTreeMap<TokenId, Amount>,
    token_balances: BTreeMap<(Address, TokenId), Amount>,
    allowances: BTreeMap<(Address, Address, TokenId), Amount>,
    nick_balances: BTreeMap<(Nickname, TokenId), Amount>,
    nick_approvals: BTreeMap<(Nickname, TokenId), Amount>,
    nick_nonces: BTreeMap<Nickname, u64>,
    announcements: Vec<Announcement>,
    key_registry: Vec<Nickname>,
    htlc_locks: BTreeMap<u64, HtlcLock>,
}

fn positive(amount: Amount) -> Result<Amount, LedgerError> {
    if amount == 0 {
        Err(LedgerError::ZeroAmount)
    } else {
        Ok(amount)
    }
}

fn debit<K: Ord>(map: &mut BTreeMap<K, Amount>, key: K, amount: Amount) -> Result<(), LedgerError> {
    let bal = map.get(&key).copied().unwrap_or(0);
    if bal < amount {
        return Err(LedgerError::Funds {
            available: bal,
            requested: amount,
        });
    }
    if bal == amount {
        map.remove(&key);
    } else {
        map.insert(key, bal - amount);
    }
    Ok(())
}

fn credit<K: Ord>(map: &mut BTreeMap<K, Amount>, key: K, amount: Amount) -> Result<(), LedgerError> {
    let bal = map.entry(key).or_insert(0);
    *bal = bal.checked_add(amount).ok_or(LedgerError::Overflow)?;
    Ok(())
}

impl Ledger {
    pub fn deploy(ipk: IssuerPublicKey, supervisor: Address) -> Ledger {
        Ledger {
            ipk,
            supervisor,
            block_height: 0,
            supply: BTreeMap::new(),
            token_balances: BTreeMap::new(),
            allowances: BTreeMap::new(),
            nick_balances: BTreeMap::new(),
            nick_approvals: BTreeMap::new(),
            nick_nonces: BTreeMap::new(),
            announcements: Vec::new(),
            key_registry: Vec::new(),
            htlc_locks: BTreeMap::new(),
        }
    }

    pub fn ipk(&self) -> &IssuerPublicKey {
        &self.ipk
    }

    pub fn supervisor(&self) -> Address {
        self.supervisor
    }

    pub fn block_height(&self) -> u64 {
        self.block_height
    }

    pub fn balance(&self, a: Address, t: TokenId) -> Amount {
        self.token_balances.get(&(a, t)).copied().unwrap_or(0)
    }

    pub fn allowance(&self, owner: Address, spender: Address, t: TokenId) -> Amount {
        self.allowances.get(&(owner, spender, t)).copied().unwrap_or(0)
    }

    pub fn nick_balance(&self, nk: &Nickname, t: TokenId) -> Amount {
        self.nick_balances.get(&(*nk, t)).copied().unwrap_or(0)
    }

    pub fn nick_approval(&self, nk: &Nickname, t: TokenId) -> Amount {
        self.nick_approvals.get(&(*nk, t)).copied().unwrap_or(0)
    }

    pub fn nonce(&self, nk: &Nickname) -> u64 {
        self.nick_nonces.get(nk).copied().unwrap_or(0)
    }

    pub fn supply(&self, t: TokenId) -> Amount {
        self.supply.get(&t).copied().unwrap_or(0)
    }

    pub fn tokens(&self) -> impl Iterator<Item = TokenId> + '_ {
        self.supply.keys().copied()
    }

    pub fn announcements(&self) -> &[Announcement] {
        &self.announcements
    }

    pub fn is_announced(&self, nk: &Nickname) -> bool {
        self.announcements.iter().any(|a| a.nickname == *nk)
    }

    pub fn key_registry(&self) -> &[Nickname] {
        &self.key_registry
    }

    pub fn lock(&self, id: u64) -> Option<&HtlcLock> {
        self.htlc_locks.get(&id)
    }

    pub fn locks(&self) -> &BTreeMap<u64, HtlcLock> {
        &self.htlc_locks
    }

    /// Runs `op` on a scratch copy and commits it, with one block of
    /// height, only if it succeeds.
    fn transact<T>(
        &mut self,
        op: impl FnOnce(&mut Ledger) -> Result<T, LedgerError>,
    ) -> Result<T, LedgerError> {
        let mut next = self.clone();
        let out = op(&mut next)?;
        next.block_height += 1;
        *self = next;
        Ok(out)
    }

    /// Advances time by `blocks` without any other change.
    pub fn tick(&mut self, blocks: u64) {
        self.block_height += blocks;
    }

    /// Creates `amount` new tokens at `to`.
    pub fn mint(&mut self, to: Address, token: TokenId, amount: Amount) -> Result<(), LedgerError> {
        self.transact(|l| {
            positive(amount)?;
            if to.is_contract() {
                return Err(LedgerError::ContractAddress);
            }
            credit(&mut l.supply, token, amount)?;
            credit(&mut l.token_balances, (to, token), amount)
        })
    }

    /// ERC20 `approve`: sets the allowance of `spender` over `owner`'s tokens.
    pub fn approve(
        &mut self,
        owner: Address,
        spender: Address,
        token: TokenId,
        amount: Amount,
    ) -> Result<(), LedgerError> {
        self.transact(|l| {
            if owner.is_contract() {
                return Err(LedgerError::ContractAddress);
            }
            if amount == 0 {
                l.allowances.remove(&(owner, spender, token));
            } else {
                l.allowances.insert((owner, spender, token), amount);
            }
            Ok(())
        })
    }

    /// Publishes a master public key. It must be group-valid and new.
    pub fn register_mpk(&mut self, mpk: &Nickname) -> Result<(), LedgerError> {
        self.transact(|l| {
            if !gvf(&l.ipk, mpk) {
                return Err(LedgerError::InvalidNickname);
            }
            if l.key_registry.contains(mpk) {
                return Err(LedgerError::DuplicateKey);
            }
            l.key_registry.push(*mpk);
            Ok(())
        })
    }

    /// Escrows `amount` of `from`'s tokens under nickname `nk` and announces it.
    pub fn deposit(
        &mut self,
        from: Address,
        token: TokenId,
        amount: Amount,
        nk: &Nickname,
    ) -> Result<(), LedgerError> {
        self.transact(|l| {
            positive(amount)?;
            if from.is_contract() {
                return Err(LedgerError::ContractAddress);
            }
            let escrow = Address::escrow();
            let allowed = l.allowance(from, escrow, token);
            if allowed < amount {
                return Err(LedgerError::Allowance {
                    available: allowed,
                    requested: amount,
                });
            }
            if !gvf(&l.ipk, nk) {
                return Err(LedgerError::InvalidNickname);
            }
            debit(&mut l.allowances, (from, escrow, token), amount)?;
            debit(&mut l.token_balances, (from, token), amount)?;
            credit(&mut l.token_balances, (escrow, token), amount)?;
            credit(&mut l.nick_balances, (*nk, token), amount)?;
            l.announce(nk);
            Ok(())
        })
    }

    fn announce(&mut self, nk: &Nickname) {
        self.announcements.push(Announcement {
            height: self.block_height,
            nickname: *nk,
        });
    }

    /// The forwarder: checks the source nickname and its signature on the
    /// canonical request bytes, then the nonce, then dispatches. Returns the
    /// new lock id for lock requests.
    pub fn execute(
        &mut self,
        req: &TransferRequest,
        sigma: &SpkProof,
    ) -> Result<Option<u64>, LedgerError> {
        self.transact(|l| {
            if !gvf(&l.ipk, &req.source) || !uvf(&req.source, &req.to_bytes(), sigma) {
                return Err(LedgerError::Forwarder);
            }
            let expected = l.nonce(&req.source) + 1;
            if req.nonce != expected {
                return Err(LedgerError::Replay {
                    expected,
                    got: req.nonce,
                });
            }
            l.nick_nonces.insert(req.source, expected);
            l.dispatch(&req.source, &req.kind)
        })
    }

    fn dispatch(&mut self, src: &Nickname, kind: &RequestKind) -> Result<Option<u64>, LedgerError> {
        match kind {
            RequestKind::Transfer { to, token, amount } => {
                positive(*amount)?;
                if !gvf(&self.ipk, to) {
                    return Err(LedgerError::InvalidNickname);
                }
                debit(&mut self.nick_balances, (*src, *token), *amount)?;
                credit(&mut self.nick_balances, (*to, *token), *amount)?;
                self.announce(to);
                Ok(None)
            }
            RequestKind::Withdraw { to, token, amount } => {
                positive(*amount)?;
                if to.is_contract() {
                    return Err(LedgerError::ContractAddress);
                }
                debit(&mut self.nick_balances, (*src, *token), *amount)?;
                debit(&mut self.token_balances, (Address::escrow(), *token), *amount)?;
                credit(&mut self.token_balances, (*to, *token), *amount)?;
                Ok(None)
            }
            RequestKind::Approve { token, amount } => {
                if *amount == 0 {
                    self.nick_approvals.remove(&(*src, *token));
                } else {
                    self.nick_approvals.insert((*src, *token), *amount);
                }
                Ok(None)
            }
            RequestKind::Lock {
                recipient,
                token,
                amount,
                hashlock,
                timelock,
            } => {
                positive(*amount)?;
                if !gvf(&self.ipk, recipient) {
                    return Err(LedgerError::InvalidNickname);
                }
                let approved = self.nick_approval(src, *token);
                if approved < *amount {
                    return Err(LedgerError::Allowance {
                        available: approved,
                        requested: *amount,
                    });
                }
                debit(&mut self.nick_approvals, (*src, *token), *amount)?;
                debit(&mut self.nick_balances, (*src, *token), *amount)?;
                debit(&mut self.token_balances, (Address::escrow(), *token), *amount)?;
                credit(&mut self.token_balances, (Address::htlc(), *token), *amount)?;
                let id = self.htlc_locks.keys().next_back().map_or(0, |k| k + 1);
                self.htlc_locks.insert(
                    id,
                    HtlcLock {
                        sender: *src,
                        recipient: *recipient,
                        token: *token,
                        amount: *amount,
                        hashlock: *hashlock,
                        timelock: *timelock,
                        state: LockState::Open,
                    },
                );
                Ok(Some(id))
            }
            RequestKind::Claim { lock_id, preimage } => {
                let lock = self.open_lock(*lock_id)?;
                if lock.recipient != *src {
                    return Err(LedgerError::NotParty(*lock_id));
                }
                if Sha256::digest(preimage).as_slice() != lock.hashlock {
                    return Err(LedgerError::WrongPreimage);
                }
                self.release(*lock_id, LockState::Claimed)?;
                Ok(None)
            }
            RequestKind::Refund { lock_id } => {
                let lock = self.open_lock(*lock_id)?;
                if lock.sender != *src {
                    return Err(LedgerError::NotParty(*lock_id));
                }
                if self.block_height <= lock.timelock {
                    return Err(LedgerError::EarlyRefund {
                        height: self.block_height,
                        timelock: lock.timelock,
                    });
                }
                self.release(*lock_id, LockState::Refunded)?;
                Ok(None)
            }
        }
    }

    fn open_lock(&self, id: u64) -> Result<HtlcLock, LedgerError> {
        let lock = self.htlc_locks.get(&id).ok_or(LedgerError::UnknownLock(id))?;
        if lock.state != LockState::Open {
            return Err(LedgerError::LockClosed(id));
        }
        Ok(lock.clone())
    }

    /// Moves a lock's funds back into escrow, credited to the recipient on
    /// claim and to the sender on refund.
    fn release(&mut self, id: u64, to: LockState) -> Result<(), LedgerError> {
        let lock = self.htlc_locks.get_mut(&id).ok_or(LedgerError::UnknownLock(id))?;
        lock.state = to;
        let lock = lock.clone();
        let owner = if to == LockState::Claimed {
            lock.recipient
        } else {
            lock.sender
        };
        debit(&mut self.token_balances, (Address::htlc(), lock.token), lock.amount)?;
        credit(&mut self.token_balances, (Address::escrow(), lock.token), lock.amount)?;
        credit(&mut self.nick_balances, (owner, lock.token), lock.amount)
    }

    /// Announcements from `from_height` on whose nickname traces to the
    /// trapdoor's owner.
    pub fn scan(&self, trapdoor: &G2Point, from_height: u64) -> Vec<Announcement> {
        self.announcements
            .iter()
            .filter(|a| a.height >= from_height && trace(&self.ipk, trapdoor, &a.nickname))
            .copied()
            .collect()
    }

    /// Opens an announced nickname and checks the resulting proof.
    pub fn audit<R: rand::RngCore + rand::CryptoRng + ?Sized>(
        &self,
        osk: &OpenerSecretKey,
        state: &GroupState,
        nk: &Nickname,
        rng: &mut R,
    ) -> Result<(UserIndex, OpeningProof), LedgerError> {
        if !self.is_announced(nk) {
            return Err(LedgerError::NotAnnounced);
        }
        let (i, proof) = open(osk, nk, state, rng)?;
        if !judge(nk, i, &self.ipk, &proof, state.upk_table()) {
            return Err(LedgerError::AuditProofRejected);
        }
        Ok((i, proof))
    }

    /// User-held plus nickname-held plus locked amounts of `token`.
    pub fn circulating(&self, token: TokenId) -> Amount {
        let users: Amount = self
            .token_balances
            .iter()
            .filter(|((a, t), _)| *t == token && !a.is_contract())
            .map(|(_, v)| v)
            .sum();
        users + self.nick_total(token) + self.locked_total(token)
    }

    pub fn nick_total(&self, token: TokenId) -> Amount {
        self.nick_balances
            .iter()
            .filter(|((_, t), _)| *t == token)
            .map(|(_, v)| v)
            .sum()
    }

    pub fn locked_total(&self, token: TokenId) -> Amount {
        self.htlc_locks
            .values()
            .filter(|l| l.token == token && l.state == LockState::Open)
            .map(|l| l.amount)
            .sum()
    }

    /// Supply conservation and contract backing: for every token the
    /// circulating amount equals the minted supply, escrow holds exactly
    /// the nickname balances, and the HTLC contract exactly the open locks.
    pub fn check_conservation(&self) -> Result<(), String> {
        for (&t, &supply) in &self.supply {
            let c = self.circulating(t);
            if c != supply {
                return Err(format!("token {}: circulating {c} != supply {supply}", t.0));
            }
            let escrow = self.balance(Address::escrow(), t);
            if escrow != self.nick_total(t) {
                return Err(format!("token {}: escrow {escrow} unbacked", t.0));
            }
            let htlc = self.balance(Address::htlc(), t);
            if htlc != self.locked_total(t) {
                return Err(format!("token {}: htlc {htlc} unbacked", t.0));
            }
        }
        Ok(())
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        LedgerSnapshot {
            ipk: self.ipk,
            supervisor: self.supervisor,
            block_height: self.block_height,
            supply: self.supply.iter().map(|(t, v)| (*t, *v)).collect(),
            token_balances: self
                .token_balances
                .iter()
                .map(|((a, t), v)| (*a, *t, *v))
                .collect(),
            allowances: self
                .allowances
                .iter()
                .map(|((o, s, t), v)| (*o, *s, *t, *v))
                .collect(),
            nick_balances: self
                .nick_balances
                .iter()
                .map(|((n, t), v)| (*n, *t, *v))
                .collect(),
            nick_approvals: self
                .nick_approvals
                .iter()
                .map(|((n, t), v)| (*n, *t, *v))
                .collect(),
            nick_nonces: self.nick_nonces.iter().map(|(n, v)| (*n, *v)).collect(),
            announcements: self.announcements.clone(),
            key_registry: self.key_registry.clone(),
            htlc_locks: self
                .htlc_locks
                .iter()
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    pub fn from_snapshot(s: LedgerSnapshot) -> Ledger {
        Ledger {
            ipk: s.ipk,
            supervisor: s.supervisor,
            block_height: s.block_height,
            supply: s.supply.into_iter().collect(),
            token_balances: s
                .token_balances
                .into_iter()
                .map(|(a, t, v)| ((a, t), v))
                .collect(),
            allowances: s
                .allowances
                .into_iter()
                .map(|(o, sp, t, v)| ((o, sp, t), v))
                .collect(),
            nick_balances: s
                .nick_balances
                .into_iter()
                .map(|(n, t, v)| ((n, t), v))
                .collect(),
            nick_approvals: s
                .nick_approvals
                .into_iter()
                .map(|(n, t, v)| ((n, t), v))
                .collect(),
            nick_nonces: s.nick_nonces.into_iter().collect(),
            announcements: s.announcements,
            key_registry: s.key_registry,
            htlc_locks: s.htlc_locks.into_iter().collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.snapshot()).expect("snapshot is plain data")
    }

    /// Distinct nicknames holding a positive balance of `token`.
    pub fn funded_nicknames(&self, token: TokenId) -> BTreeSet<Nickname> {
        self.nick_balances
            .keys()
            .filter(|(_, t)| *t == token)
            .map(|(n, _)| *n)
            .collect()
    }
}

/// JSON form of a [`Ledger`]; maps become sorted entry lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerSnapshot {
    pub ipk: IssuerPublicKey,
    pub supervisor: Address,
    pub block_height: u64,
    pub supply: Vec<(TokenId, Amount)>,
    pub token_balances: Vec<(Address, TokenId, Amount)>,
    pub allowances: Vec<(Address, Address, TokenId, Amount)>,
    pub nick_balances: Vec<(Nickname, TokenId, Amount)>,
    pub nick_approvals: Vec<(Nickname, TokenId, Amount)>,
    pub nick_nonces: Vec<(Nickname, u64)>,
    pub announcements: Vec<Announcement>,
    pub key_registry: Vec<Nickname>,
    pub htlc_locks: Vec<(u64, HtlcLock)>,
}

/// A relayed submission and its outcome.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelayRecord {
    pub height: u64,
    pub kind: String,
    #[serde(with = "hex_bytes")]
    pub request_digest: [u8; 32],
    pub outcome: Result<(), String>,
}

/// Pass-through relayer: wraps a signed request, submits it to the
/// forwarder and keeps a log. The log lives outside the ledger.
#[derive(Clone, Debug, Default)]
pub struct Relayer {
    pub log: Vec<RelayRecord>,
}

impl Relayer {
    pub fn submit(
        &mut self,
        ledger: &mut Ledger,
        req: &TransferRequest,
        sigma: &SpkProof,
    ) -> Result<Option<u64>, LedgerError> {
        let height = ledger.block_height();
        let out = ledger.execute(req, sigma);
        self.log.push(RelayRecord {
            height,
            kind: req.kind.name().to_string(),
            request_digest: Sha256::digest(req.to_bytes()).into(),
            outcome: out.as_ref().map(|_| ()).map_err(|e| e.to_string()),
        });
        out
    }
}
