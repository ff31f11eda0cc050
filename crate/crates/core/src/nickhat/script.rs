//! Line-oriented JSON scenarios.
//!
//! Each non-empty line is one command `{"op": .., "params": {..},
//! "actor": "alice", "seed": 7}`. Actors are the member names given to
//! `setup`; their token account is `Address::from_label(name)`. Nicknames
//! created by deposits, transfers and locks are kept under caller-chosen
//! labels so later lines can refer to them.
//!
//! A command that the ledger rejects produces an `"ok": false` result and
//! the run continues. Malformed commands or references to unknown actors
//! and labels abort the run.

use std::collections::BTreeMap;

use rand_chacha::ChaCha20Rng;
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ds::ds_keygen;
use crate::ngs::{
    ikg, iss, join, okg, random_nick, sign, GroupState, MemberSecret, NgsError,
    Nickname, OpenerKeys, UserIndex,
};

use super::{
    Address, Amount, Ledger, LedgerError, Relayer, RequestKind, TokenId, TransferRequest,
};

const SUPERVISOR: &str = "supervisor";

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    Command { line: usize, msg: String },
    #[error("line {line}: group setup failed: {source}")]
    Setup { line: usize, source: NgsError },
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(tag = "op", content = "params", rename_all = "snake_case")]
pub enum Op {
    Setup {
        members: Vec<String>,
    },
    Register {},
    Mint {
        token: u32,
        amount: Amount,
    },
    Approve {
        token: u32,
        amount: Amount,
    },
    Deposit {
        token: u32,
        amount: Amount,
        recipient: String,
        label: String,
    },
    Transfer {
        from: String,
        recipient: String,
        label: String,
        token: u32,
        amount: Amount,
    },
    Withdraw {
        from: String,
        to: String,
        token: u32,
        amount: Amount,
    },
    HtlcApprove {
        from: String,
        token: u32,
        amount: Amount,
    },
    HtlcLock {
        from: String,
        recipient: String,
        label: String,
        token: u32,
        amount: Amount,
        preimage: String,
        timelock_in: u64,
    },
    HtlcClaim {
        from: String,
        lock_id: u64,
        preimage: String,
    },
    HtlcRefund {
        from: String,
        lock_id: u64,
    },
    Tick {
        blocks: u64,
    },
    Scan {
        #[serde(default)]
        from_height: u64,
    },
    Audit {
        nickname: String,
    },
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::Setup { .. } => "setup",
            Op::Register {} => "register",
            Op::Mint { .. } => "mint",
            Op::Approve { .. } => "approve",
            Op::Deposit { .. } => "deposit",
            Op::Transfer { .. } => "transfer",
            Op::Withdraw { .. } => "withdraw",
            Op::HtlcApprove { .. } => "htlc_approve",
            Op::HtlcLock { .. } => "htlc_lock",
            Op::HtlcClaim { .. } => "htlc_claim",
            Op::HtlcRefund { .. } => "htlc_refund",
            Op::Tick { .. } => "tick",
            Op::Scan { .. } => "scan",
            Op::Audit { .. } => "audit",
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCommand {
    op: String,
    #[serde(default)]
    params: Value,
    #[serde(default)]
    actor: Option<String>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Command {
    pub op: Op,
    pub actor: Option<String>,
    pub seed: Option<u64>,
}

impl Command {
    pub fn parse(line: &str) -> Result<Command, String> {
        let raw: RawCommand = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let params = if raw.params.is_null() { json!({}) } else { raw.params };
        let op = serde_json::from_value(json!({ "op": raw.op, "params": params }))
            .map_err(|e| e.to_string())?;
        Ok(Command {
            op,
            actor: raw.actor,
            seed: raw.seed,
        })
    }
}

pub fn parse_script(text: &str) -> Result<Vec<(usize, Command)>, ScriptError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            Command::parse(l)
                .map(|c| (n + 1, c))
                .map_err(|msg| ScriptError::Parse { line: n + 1, msg })
        })
        .collect()
}

struct Group {
    opener: OpenerKeys,
    state: GroupState,
    members: BTreeMap<String, (UserIndex, MemberSecret)>,
    ledger: Ledger,
}

/// An in-memory run of a scenario.
pub struct Scenario {
    seed: u64,
    group: Option<Group>,
    labels: BTreeMap<String, Nickname>,
    pub relayer: Relayer,
}

impl Scenario {
    pub fn new(seed: u64) -> Scenario {
        Scenario {
            seed,
            group: None,
            labels: BTreeMap::new(),
            relayer: Relayer::default(),
        }
    }

    pub fn ledger(&self) -> Option<&Ledger> {
        self.group.as_ref().map(|g| &g.ledger)
    }

    pub fn group_state(&self) -> Option<&GroupState> {
        self.group.as_ref().map(|g| &g.state)
    }

    pub fn nickname(&self, label: &str) -> Option<&Nickname> {
        self.labels.get(label)
    }

    /// Runs every line and returns one JSON result per command.
    pub fn run(&mut self, text: &str) -> Result<Vec<Value>, ScriptError> {
        parse_script(text)?
            .into_iter()
            .map(|(line, cmd)| self.step(line, &cmd))
            .collect()
    }

    pub fn step(&mut self, line: usize, cmd: &Command) -> Result<Value, ScriptError> {
        let mut rng = crate::derive_rng(cmd.seed.unwrap_or(self.seed), "nickhat/script", line as u64);
        let out = self.apply(line, cmd, &mut rng)?;
        let mut v = json!({ "line": line, "op": cmd.op.name() });
        match out {
            Ok(result) => {
                v["ok"] = json!(true);
                if !result.is_null() {
                    v["result"] = result;
                }
            }
            Err(e) => {
                v["ok"] = json!(false);
                v["error"] = json!(e.to_string());
            }
        }
        if let Some(l) = self.ledger() {
            v["height"] = json!(l.block_height());
        }
        Ok(v)
    }

    fn apply(
        &mut self,
        line: usize,
        cmd: &Command,
        rng: &mut ChaCha20Rng,
    ) -> Result<Result<Value, LedgerError>, ScriptError> {
        let fail = |msg: String| ScriptError::Command { line, msg };
        if let Op::Setup { members } = &cmd.op {
            if self.group.is_some() {
                return Err(fail("setup may only run once".into()));
            }
            self.group = Some(setup(members, rng).map_err(|source| ScriptError::Setup { line, source })?);
            return Ok(Ok(json!({ "members": members })));
        }
        let labels = &mut self.labels;
        let relayer = &mut self.relayer;
        let g = self.group.as_mut().ok_or_else(|| fail("run setup first".into()))?;
        let actor = || cmd.actor.clone().ok_or_else(|| fail("this op needs an actor".into()));
        let member = |g: &Group, name: &str| {
            g.members
                .get(name)
                .map(|(i, ms)| (*i, ms.clone()))
                .ok_or_else(|| fail(format!("unknown member {name:?}")))
        };
        let label = |labels: &BTreeMap<String, Nickname>, name: &str| {
            labels
                .get(name)
                .copied()
                .ok_or_else(|| fail(format!("unknown nickname label {name:?}")))
        };
        let fresh_nick = |g: &Group, name: &str, rng: &mut ChaCha20Rng| {
            let (i, _) = member(g, name)?;
            let mpk = *g.state.mpk(i).expect("setup members are joined");
            Ok::<_, ScriptError>(random_nick(&mpk, rng))
        };

        let out = match &cmd.op {
            Op::Setup { .. } => unreachable!(),
            Op::Register {} => {
                let (i, _) = member(g, &actor()?)?;
                let mpk = *g.state.mpk(i).expect("setup members are joined");
                g.ledger.register_mpk(&mpk).map(|_| Value::Null)
            }
            Op::Mint { token, amount } => g
                .ledger
                .mint(Address::from_label(&actor()?), TokenId(*token), *amount)
                .map(|_| Value::Null),
            Op::Approve { token, amount } => g
                .ledger
                .approve(Address::from_label(&actor()?), Address::escrow(), TokenId(*token), *amount)
                .map(|_| Value::Null),
            Op::Deposit {
                token,
                amount,
                recipient,
                label: name,
            } => {
                let nk = fresh_nick(g, recipient, rng)?;
                let r = g
                    .ledger
                    .deposit(Address::from_label(&actor()?), TokenId(*token), *amount, &nk);
                if r.is_ok() {
                    labels.insert(name.clone(), nk);
                }
                r.map(|_| json!({ "nickname": nk }))
            }
            Op::Transfer {
                from,
                recipient,
                label: name,
                token,
                amount,
            } => {
                let to = fresh_nick(g, recipient, rng)?;
                let kind = RequestKind::Transfer {
                    to,
                    token: TokenId(*token),
                    amount: *amount,
                };
                let r = relay(line, g, relayer, &actor()?, label(labels, from)?, kind, rng)?;
                if r.is_ok() {
                    labels.insert(name.clone(), to);
                }
                r.map(|_| json!({ "nickname": to }))
            }
            Op::Withdraw {
                from,
                to,
                token,
                amount,
            } => {
                let kind = RequestKind::Withdraw {
                    to: Address::from_label(to),
                    token: TokenId(*token),
                    amount: *amount,
                };
                relay(line, g, relayer, &actor()?, label(labels, from)?, kind, rng)?.map(|_| Value::Null)
            }
            Op::HtlcApprove {
                from,
                token,
                amount,
            } => {
                let kind = RequestKind::Approve {
                    token: TokenId(*token),
                    amount: *amount,
                };
                relay(line, g, relayer, &actor()?, label(labels, from)?, kind, rng)?.map(|_| Value::Null)
            }
            Op::HtlcLock {
                from,
                recipient,
                label: name,
                token,
                amount,
                preimage,
                timelock_in,
            } => {
                let to = fresh_nick(g, recipient, rng)?;
                let kind = RequestKind::Lock {
                    recipient: to,
                    token: TokenId(*token),
                    amount: *amount,
                    hashlock: Sha256::digest(preimage.as_bytes()).into(),
                    timelock: g.ledger.block_height() + timelock_in,
                };
                let r = relay(line, g, relayer, &actor()?, label(labels, from)?, kind, rng)?;
                if r.is_ok() {
                    labels.insert(name.clone(), to);
                }
                r.map(|id| json!({ "lock_id": id, "nickname": to }))
            }
            Op::HtlcClaim {
                from,
                lock_id,
                preimage,
            } => {
                let kind = RequestKind::Claim {
                    lock_id: *lock_id,
                    preimage: preimage.as_bytes().to_vec(),
                };
                relay(line, g, relayer, &actor()?, label(labels, from)?, kind, rng)?.map(|_| Value::Null)
            }
            Op::HtlcRefund { from, lock_id } => {
                let kind = RequestKind::Refund { lock_id: *lock_id };
                relay(line, g, relayer, &actor()?, label(labels, from)?, kind, rng)?.map(|_| Value::Null)
            }
            Op::Tick { blocks } => {
                g.ledger.tick(*blocks);
                Ok(Value::Null)
            }
            Op::Scan { from_height } => {
                let (_, ms) = member(g, &actor()?)?;
                let found: Vec<Value> = g
                    .ledger
                    .scan(&ms.trapdoor, *from_height)
                    .into_iter()
                    .map(|a| {
                        let name = labels.iter().find(|(_, n)| **n == a.nickname).map(|(k, _)| k.clone());
                        json!({ "height": a.height, "label": name, "nickname": a.nickname })
                    })
                    .collect();
                Ok(json!(found))
            }
            Op::Audit { nickname } => {
                let nk = label(labels, nickname)?;
                g.ledger
                    .audit(&g.opener.secret, &g.state, &nk, rng)
                    .map(|(i, _)| {
                        let name = g.members.iter().find(|(_, (j, _))| *j == i).map(|(k, _)| k.clone());
                        json!({ "index": i, "member": name })
                    })
            }
        };
        Ok(out)
    }
}

fn setup(members: &[String], rng: &mut ChaCha20Rng) -> Result<Group, NgsError> {
    let issuer = ikg(rng);
    let opener = okg(rng);
    let mut state = GroupState::with_keys(issuer.public, opener.public);
    let mut table = BTreeMap::new();
    for (n, name) in members.iter().enumerate() {
        let i = UserIndex(n as u32);
        let kp = ds_keygen(rng);
        state.register_user(i, kp.upk)?;
        let (ms, req) = join(&kp.usk, &opener.public, rng);
        iss(i, &issuer.secret, &req, &opener.public, &mut state)?;
        table.insert(name.clone(), (i, ms));
    }
    let ledger = Ledger::deploy(issuer.public, Address::from_label(SUPERVISOR));
    Ok(Group {
        opener,
        state,
        members: table,
        ledger,
    })
}

/// Signs `kind` from `source` with the actor's member key and submits it.
/// The actor need not own `source`; the forwarder then rejects.
fn relay(
    line: usize,
    g: &mut Group,
    relayer: &mut Relayer,
    actor: &str,
    source: Nickname,
    kind: RequestKind,
    rng: &mut ChaCha20Rng,
) -> Result<Result<Option<u64>, LedgerError>, ScriptError> {
    let (_, ms) = g.members.get(actor).ok_or_else(|| ScriptError::Command {
        line,
        msg: format!("unknown member {actor:?}"),
    })?;
    let req = TransferRequest {
        source,
        nonce: g.ledger.nonce(&source) + 1,
        kind,
    };
    // A signature that cannot be produced is still submitted so the
    // forwarder records the rejection.
    let sigma = match sign(&source, &ms.msk, &req.to_bytes(), rng) {
        Ok(s) => s,
        Err(_) => {
            let mpk = *g.state.mpk(g.members[actor].0).expect("joined");
            sign(&mpk, &ms.msk, &req.to_bytes(), rng).expect("own master key signs")
        }
    };
    Ok(relayer.submit(&mut g.ledger, &req, &sigma))
}
