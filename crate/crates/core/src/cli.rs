//! Command-line front end with file-based state.
//!
//! Everything for one group lives under `<state-dir>/<group>/`:
//!
//! | file | contents |
//! |---|---|
//! | `group.json` | public tables ([`GroupFile`]) |
//! | `issuer.key.json`, `opener.key.json` | authority key pairs (mode 0600) |
//! | `issuer.pub.json`, `opener.pub.json` | public keys |
//! | `users/<i>/usk.json`, `users/<i>/member.json` | user secrets (mode 0600) |
//! | `users/<i>/join_request.json` | the join message for the issuer |
//! | `ledger.json` | NickHat ledger snapshot |
//!
//! Exit codes: 0 success, 1 a verification returned false or the ledger
//! rejected the operation, 2 usage or I/O error (including a held lock),
//! 3 integrity error in the stored state.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::derive_rng;
use crate::ds::DsKeyPair;
use crate::harness::{
    correctness_experiment, run_experiment_sanity, ExperimentConfig, ExperimentName,
};
use crate::ngs::{
    gvf, ikg, iss, join, judge, okg, open, random_nick, sign, trace, ukg, uvf, GroupFile,
    GroupState, IssuerKeys, IssuerPublicKey, JoinRequest, MemberSecret, NgsError, Nickname,
    OpenerKeys, OpeningProof, UserIndex,
};
use crate::nickhat::script::{Scenario, ScriptError};
use crate::nickhat::{
    Address, Ledger, LedgerError, LedgerSnapshot, Relayer, RequestKind, TokenId, TransferRequest,
};
use crate::sigma::SpkProof;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("state directory is locked by another invocation ({0})")]
    Locked(PathBuf),
    #[error("{0}")]
    False(String),
    #[error("integrity: {0}")]
    Integrity(String),
    #[error(transparent)]
    Ngs(#[from] NgsError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Script(#[from] ScriptError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::False(_) => 1,
            CliError::Integrity(_) => 3,
            CliError::Ngs(e) => ngs_code(e),
            CliError::Ledger(LedgerError::Audit(e)) => ngs_code(e),
            CliError::Ledger(_) => 1,
            _ => 2,
        }
    }
}

fn ngs_code(e: &NgsError) -> i32 {
    match e {
        _ if e.is_integrity() => 3,
        NgsError::Rejected(_) | NgsError::NotFound => 1,
        _ => 2,
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Parser)]
#[command(name = "ngs", version, about = "Nickname group signatures and the NickHat simulator")]
pub struct Cli {
    #[command(flatten)]
    pub config: CliConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CliConfig {
    /// Directory holding per-group state.
    #[arg(long, global = true, default_value = ".")]
    pub state_dir: PathBuf,
    /// Makes every random choice a function of this seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Group identifier (subdirectory of the state directory).
    #[arg(long = "group", global = true, default_value = "default")]
    pub group_id: String,
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct UserArg {
    #[arg(long)]
    pub user: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the issuer key pair.
    Ikg,
    /// Generate the opener key pair.
    Okg,
    /// Generate and publish a user's signing key.
    Ukg(UserArg),
    /// Build a join request for a user.
    Join {
        #[command(flatten)]
        user: UserArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Issue a master public key for a join request.
    Iss {
        #[command(flatten)]
        user: UserArg,
        #[arg(long)]
        request: Option<PathBuf>,
    },
    /// Derive a fresh nickname for a member.
    Nick {
        #[command(flatten)]
        user: UserArg,
        /// Distinguishes several nicknames drawn under one seed.
        #[arg(long, default_value_t = 0)]
        index: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check whether a nickname belongs to a member, using their trapdoor.
    Trace {
        #[command(flatten)]
        user: UserArg,
        #[arg(long)]
        nickname: PathBuf,
    },
    /// Check that a nickname is valid for the group.
    Gvf {
        #[arg(long)]
        nickname: PathBuf,
    },
    /// Sign a message under a nickname.
    Sign {
        #[command(flatten)]
        user: UserArg,
        #[arg(long)]
        nickname: PathBuf,
        #[arg(long)]
        message: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a signature under a nickname.
    Uvf {
        #[arg(long)]
        nickname: PathBuf,
        #[arg(long)]
        message: String,
        #[arg(long)]
        signature: PathBuf,
    },
    /// Identify the owner of a nickname and prove it.
    Open {
        #[arg(long)]
        nickname: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check an opening proof against a claimed owner.
    Judge {
        #[command(flatten)]
        user: UserArg,
        #[arg(long)]
        nickname: PathBuf,
        #[arg(long)]
        proof: PathBuf,
    },
    /// NickHat ledger operations.
    #[command(subcommand)]
    Nickhat(NickhatCommand),
    /// Run the security harness.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Debug, Subcommand)]
pub enum NickhatCommand {
    /// Create an empty ledger bound to the group's issuer key.
    Deploy {
        #[arg(long, default_value = "supervisor")]
        supervisor: String,
    },
    /// Publish a member's master public key.
    Register(UserArg),
    /// Create tokens at an account.
    Mint {
        #[arg(long)]
        to: String,
        #[arg(long)]
        token: u32,
        #[arg(long)]
        amount: u64,
    },
    /// Let the escrow contract spend an account's tokens.
    Approve {
        #[arg(long)]
        owner: String,
        #[arg(long)]
        token: u32,
        #[arg(long)]
        amount: u64,
    },
    /// Escrow tokens under a nickname.
    Deposit {
        #[arg(long)]
        from: String,
        #[arg(long)]
        token: u32,
        #[arg(long)]
        amount: u64,
        #[arg(long)]
        nickname: PathBuf,
    },
    /// Move escrowed tokens between nicknames.
    Transfer {
        #[command(flatten)]
        user: UserArg,
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        #[arg(long)]
        token: u32,
        #[arg(long)]
        amount: u64,
    },
    /// Release escrowed tokens to an account.
    Withdraw {
        #[command(flatten)]
        user: UserArg,
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: String,
        #[arg(long)]
        token: u32,
        #[arg(long)]
        amount: u64,
    },
    /// List announcements that belong to a member.
    Scan {
        #[command(flatten)]
        user: UserArg,
        #[arg(long, default_value_t = 0)]
        from_height: u64,
    },
    /// Open an announced nickname as the supervisor.
    Audit {
        #[arg(long)]
        nickname: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hashed time-lock operations.
    #[command(subcommand)]
    Htlc(HtlcCommand),
    /// Advance the block height.
    Tick {
        #[arg(long)]
        blocks: u64,
    },
    /// Run a JSON-lines scenario in memory.
    Run {
        #[arg(long)]
        script: PathBuf,
        /// Results file; the final ledger is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum HtlcCommand {
    /// Allow the HTLC contract to lock a nickname's tokens.
    Approve {
        #[command(flatten)]
        user: UserArg,
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        token: u32,
        #[arg(long)]
        amount: u64,
    },
    Lock {
        #[command(flatten)]
        user: UserArg,
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        #[arg(long)]
        token: u32,
        #[arg(long)]
        amount: u64,
        #[arg(long)]
        preimage: String,
        /// Blocks after the current height before a refund is allowed.
        #[arg(long)]
        timelock_in: u64,
    },
    Claim {
        #[command(flatten)]
        user: UserArg,
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        lock_id: u64,
        #[arg(long)]
        preimage: String,
    },
    Refund {
        #[command(flatten)]
        user: UserArg,
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        lock_id: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCommand {
    /// Correctness experiment over a range of seeds.
    Correctness {
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value_t = 5)]
        users: u32,
    },
    /// Scripted adversaries against one or all security experiments.
    Sanity {
        /// trace, nf, os, oc, anon or all.
        #[arg(long, default_value = "all")]
        name: String,
    },
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ngs: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    if let Command::Experiment(cmd) = &cli.command {
        return experiment(&cli.config, cmd);
    }
    let ctx = Context::open(&cli.config)?;
    ctx.run(&cli.command)
}

/// An open group directory, locked for the lifetime of the value.
struct Context<'a> {
    cfg: &'a CliConfig,
    dir: PathBuf,
    _lock: DirLock,
}

struct DirLock(PathBuf);

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, text: &str, secret: bool) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut opts = OpenOptions::new();
        opts.write(true).create(true).truncate(true);
        #[cfg(unix)]
        {
            use std::os::unix::fs::OpenOptionsExt;
            opts.mode(if secret { 0o600 } else { 0o644 });
        }
        let mut f = opts.open(&tmp).map_err(io_err(&tmp))?;
        f.write_all(text.as_bytes()).map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn to_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("artifacts serialize");
    s.push('\n');
    s
}

fn write_json<T: Serialize>(path: &Path, v: &T, secret: bool) -> Result<()> {
    write_file(path, &to_pretty(v), secret)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

/// Reads an artifact under verification. One that does not even decode
/// cannot verify, so it reads as a false verdict rather than a usage error.
fn read_claim<T: DeserializeOwned>(path: &Path) -> Result<T> {
    read_json(path).map_err(|e| match e {
        CliError::Format { path, msg } => {
            CliError::False(format!("{}: malformed ({msg})", path.display()))
        }
        other => other,
    })
}

fn parse_address(s: &str) -> Address {
    s.parse().unwrap_or_else(|_| Address::from_label(s))
}

fn verdict(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::False(format!("{what}: false")))
    }
}

impl<'a> Context<'a> {
    fn open(cfg: &'a CliConfig) -> Result<Self> {
        if cfg.group_id.is_empty() || cfg.group_id.contains(['/', '\\']) || cfg.group_id.starts_with('.') {
            return Err(CliError::Usage(format!("invalid group id {:?}", cfg.group_id)));
        }
        let dir = cfg.state_dir.join(&cfg.group_id);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let lock = dir.join(".lock");
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(CliError::Locked(lock));
            }
            Err(e) => return Err(io_err(&lock)(e)),
        }
        Ok(Context {
            cfg,
            dir,
            _lock: DirLock(lock),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn user_path(&self, i: u32, name: &str) -> PathBuf {
        self.dir.join("users").join(i.to_string()).join(name)
    }

    fn rng(&self, label: &str, index: u64) -> ChaCha20Rng {
        match self.cfg.seed {
            Some(seed) => derive_rng(seed, label, index),
            None => ChaCha20Rng::from_entropy(),
        }
    }

    fn load_group(&self) -> Result<GroupState> {
        let path = self.path("group.json");
        if !path.exists() {
            return Ok(GroupState::new());
        }
        let file: GroupFile = read_json(&path)?;
        GroupState::from_file(file).map_err(|e| CliError::Integrity(format!("group.json: {e}")))
    }

    fn save_group(&self, g: &GroupState) -> Result<()> {
        write_json(&self.path("group.json"), &g.to_file(), false)
    }

    fn ipk(&self, g: &GroupState) -> Result<IssuerPublicKey> {
        g.ipk.ok_or_else(|| CliError::Usage("no issuer key; run ikg first".into()))
    }

    fn member(&self, i: u32) -> Result<MemberSecret> {
        read_json(&self.user_path(i, "member.json"))
    }

    fn load_ledger(&self) -> Result<Ledger> {
        let path = self.path("ledger.json");
        if !path.exists() {
            return Err(CliError::Usage("no ledger; run nickhat deploy first".into()));
        }
        let snap: LedgerSnapshot = read_json(&path)?;
        let ledger = Ledger::from_snapshot(snap);
        ledger
            .check_conservation()
            .map_err(|e| CliError::Integrity(format!("ledger.json: {e}")))?;
        Ok(ledger)
    }

    fn save_ledger(&self, l: &Ledger) -> Result<()> {
        write_json(&self.path("ledger.json"), &l.snapshot(), false)
    }

    fn emit(&self, text: String, value: Value) {
        if self.cfg.json {
            println!("{value}");
        } else {
            println!("{text}");
        }
    }

    fn emit_artifact<T: Serialize>(&self, out: &Option<PathBuf>, v: &T) -> Result<()> {
        match out {
            Some(p) => write_json(p, v, false),
            None => {
                print!("{}", to_pretty(v));
                Ok(())
            }
        }
    }

    fn run(&self, cmd: &Command) -> Result<()> {
        match cmd {
            Command::Ikg => {
                let key = self.path("issuer.key.json");
                if key.exists() {
                    return Err(CliError::Usage("issuer key already exists".into()));
                }
                let keys: IssuerKeys = ikg(&mut self.rng("ikg", 0));
                let mut g = self.load_group()?;
                g.ipk = Some(keys.public);
                write_json(&key, &keys, true)?;
                write_json(&self.path("issuer.pub.json"), &keys.public, false)?;
                self.save_group(&g)?;
                self.emit("issuer key written".into(), json!({ "ipk": keys.public }));
            }
            Command::Okg => {
                let key = self.path("opener.key.json");
                if key.exists() {
                    return Err(CliError::Usage("opener key already exists".into()));
                }
                let keys: OpenerKeys = okg(&mut self.rng("okg", 0));
                let mut g = self.load_group()?;
                g.opk = Some(keys.public);
                write_json(&key, &keys, true)?;
                write_json(&self.path("opener.pub.json"), &keys.public, false)?;
                self.save_group(&g)?;
                self.emit("opener key written".into(), json!({ "opk": keys.public }));
            }
            Command::Ukg(UserArg { user }) => {
                let mut g = self.load_group()?;
                let kp: DsKeyPair = ukg(UserIndex(*user), &mut g, &mut self.rng("ukg", *user as u64))?;
                write_json(&self.user_path(*user, "usk.json"), &kp, true)?;
                self.save_group(&g)?;
                self.emit(format!("user {user} key published"), json!({ "user": user, "upk": kp.upk }));
            }
            Command::Join { user, out } => {
                let i = user.user;
                let g = self.load_group()?;
                let opk = g.opk.ok_or_else(|| CliError::Usage("no opener key; run okg first".into()))?;
                let kp: DsKeyPair = read_json(&self.user_path(i, "usk.json"))?;
                let (ms, req) = join(&kp.usk, &opk, &mut self.rng("join", i as u64));
                write_json(&self.user_path(i, "member.json"), &ms, true)?;
                let out = out.clone().unwrap_or_else(|| self.user_path(i, "join_request.json"));
                write_json(&out, &req, false)?;
                self.emit(format!("join request written to {}", out.display()), json!({ "user": i, "request": out }));
            }
            Command::Iss { user, request } => {
                let i = user.user;
                let mut g = self.load_group()?;
                let keys: IssuerKeys = read_json(&self.path("issuer.key.json"))?;
                let opk = g.opk.ok_or_else(|| CliError::Usage("no opener key; run okg first".into()))?;
                let path = request.clone().unwrap_or_else(|| self.user_path(i, "join_request.json"));
                let req: JoinRequest = read_claim(&path)?;
                let mpk = iss(UserIndex(i), &keys.secret, &req, &opk, &mut g)?;
                self.save_group(&g)?;
                self.emit(format!("user {i} joined"), json!({ "user": i, "mpk": mpk }));
            }
            Command::Nick { user, index, out } => {
                let i = user.user;
                let g = self.load_group()?;
                let mpk = *g
                    .mpk(UserIndex(i))
                    .ok_or_else(|| CliError::Usage(format!("user {i} has not joined")))?;
                let nk = random_nick(&mpk, &mut self.rng("nick", (i as u64) << 32 | *index as u64));
                self.emit_artifact(out, &nk)?;
            }
            Command::Trace { user, nickname } => {
                let g = self.load_group()?;
                let ipk = self.ipk(&g)?;
                let ms = self.member(user.user)?;
                let nk: Nickname = read_claim(nickname)?;
                let ok = trace(&ipk, &ms.trapdoor, &nk);
                self.emit(format!("trace: {ok}"), json!({ "trace": ok }));
                verdict(ok, "trace")?;
            }
            Command::Gvf { nickname } => {
                let g = self.load_group()?;
                let ipk = self.ipk(&g)?;
                let nk: Nickname = read_claim(nickname)?;
                let ok = gvf(&ipk, &nk);
                self.emit(format!("gvf: {ok}"), json!({ "gvf": ok }));
                verdict(ok, "gvf")?;
            }
            Command::Sign {
                user,
                nickname,
                message,
                out,
            } => {
                let ms = self.member(user.user)?;
                let nk: Nickname = read_json(nickname)?;
                let seed_index = u64::from_be_bytes(Sha256::digest(message.as_bytes())[..8].try_into().unwrap());
                let sigma = sign(&nk, &ms.msk, message.as_bytes(), &mut self.rng("sign", seed_index ^ user.user as u64))?;
                self.emit_artifact(out, &sigma)?;
            }
            Command::Uvf {
                nickname,
                message,
                signature,
            } => {
                let nk: Nickname = read_claim(nickname)?;
                let sigma: SpkProof = read_claim(signature)?;
                let ok = uvf(&nk, message.as_bytes(), &sigma);
                self.emit(format!("uvf: {ok}"), json!({ "uvf": ok }));
                verdict(ok, "uvf")?;
            }
            Command::Open { nickname, out } => {
                let g = self.load_group()?;
                let keys: OpenerKeys = read_json(&self.path("opener.key.json"))?;
                let nk: Nickname = read_json(nickname)?;
                let (i, proof) = open(&keys.secret, &nk, &g, &mut self.rng("open", 0))?;
                if let Some(p) = out {
                    write_json(p, &proof, false)?;
                }
                self.emit(format!("opened to user {i}"), json!({ "user": i }));
            }
            Command::Judge {
                user,
                nickname,
                proof,
            } => {
                let g = self.load_group()?;
                let ipk = self.ipk(&g)?;
                let nk: Nickname = read_claim(nickname)?;
                let pf: OpeningProof = read_claim(proof)?;
                let ok = judge(&nk, UserIndex(user.user), &ipk, &pf, g.upk_table());
                self.emit(format!("judge: {ok}"), json!({ "judge": ok }));
                verdict(ok, "judge")?;
            }
            Command::Nickhat(cmd) => self.nickhat(cmd)?,
            Command::Experiment(_) => unreachable!("handled before locking"),
        }
        Ok(())
    }

    /// Builds, signs and relays a request from `source` with user `i`'s key.
    fn relay(&self, ledger: &mut Ledger, i: u32, source: Nickname, kind: RequestKind) -> Result<Option<u64>> {
        let ms = self.member(i)?;
        let req = TransferRequest {
            source,
            nonce: ledger.nonce(&source) + 1,
            kind,
        };
        let mut rng = self.rng("nickhat/request", ledger.block_height());
        let sigma = sign(&source, &ms.msk, &req.to_bytes(), &mut rng)?;
        let mut relayer = Relayer::default();
        Ok(relayer.submit(ledger, &req, &sigma)?)
    }

    fn nickhat(&self, cmd: &NickhatCommand) -> Result<()> {
        if let NickhatCommand::Deploy { supervisor } = cmd {
            let path = self.path("ledger.json");
            if path.exists() {
                return Err(CliError::Usage("ledger already deployed".into()));
            }
            let g = self.load_group()?;
            let ledger = Ledger::deploy(self.ipk(&g)?, parse_address(supervisor));
            self.save_ledger(&ledger)?;
            self.emit("ledger deployed".into(), json!({ "supervisor": ledger.supervisor() }));
            return Ok(());
        }
        if let NickhatCommand::Run { script, out } = cmd {
            return self.run_script(script, out);
        }
        let mut ledger = self.load_ledger()?;
        let result: Value = match cmd {
            NickhatCommand::Deploy { .. } | NickhatCommand::Run { .. } => unreachable!(),
            NickhatCommand::Register(UserArg { user }) => {
                let g = self.load_group()?;
                let mpk = *g
                    .mpk(UserIndex(*user))
                    .ok_or_else(|| CliError::Usage(format!("user {user} has not joined")))?;
                ledger.register_mpk(&mpk)?;
                json!({ "registered": user })
            }
            NickhatCommand::Mint { to, token, amount } => {
                ledger.mint(parse_address(to), TokenId(*token), *amount)?;
                json!({ "minted": amount })
            }
            NickhatCommand::Approve { owner, token, amount } => {
                ledger.approve(parse_address(owner), Address::escrow(), TokenId(*token), *amount)?;
                json!({ "approved": amount })
            }
            NickhatCommand::Deposit {
                from,
                token,
                amount,
                nickname,
            } => {
                let nk: Nickname = read_json(nickname)?;
                ledger.deposit(parse_address(from), TokenId(*token), *amount, &nk)?;
                json!({ "deposited": amount })
            }
            NickhatCommand::Transfer {
                user,
                from,
                to,
                token,
                amount,
            } => {
                let source: Nickname = read_json(from)?;
                let to: Nickname = read_json(to)?;
                let kind = RequestKind::Transfer {
                    to,
                    token: TokenId(*token),
                    amount: *amount,
                };
                self.relay(&mut ledger, user.user, source, kind)?;
                json!({ "transferred": amount })
            }
            NickhatCommand::Withdraw {
                user,
                from,
                to,
                token,
                amount,
            } => {
                let source: Nickname = read_json(from)?;
                let kind = RequestKind::Withdraw {
                    to: parse_address(to),
                    token: TokenId(*token),
                    amount: *amount,
                };
                self.relay(&mut ledger, user.user, source, kind)?;
                json!({ "withdrawn": amount })
            }
            NickhatCommand::Scan { user, from_height } => {
                let ms = self.member(user.user)?;
                json!(ledger.scan(&ms.trapdoor, *from_height))
            }
            NickhatCommand::Audit { nickname, out } => {
                let g = self.load_group()?;
                let keys: OpenerKeys = read_json(&self.path("opener.key.json"))?;
                let nk: Nickname = read_json(nickname)?;
                let (i, proof) = ledger.audit(&keys.secret, &g, &nk, &mut self.rng("audit", 0))?;
                if let Some(p) = out {
                    write_json(p, &proof, false)?;
                }
                json!({ "user": i })
            }
            NickhatCommand::Htlc(h) => match h {
                HtlcCommand::Approve {
                    user,
                    from,
                    token,
                    amount,
                } => {
                    let source: Nickname = read_json(from)?;
                    let kind = RequestKind::Approve {
                        token: TokenId(*token),
                        amount: *amount,
                    };
                    self.relay(&mut ledger, user.user, source, kind)?;
                    json!({ "approved": amount })
                }
                HtlcCommand::Lock {
                    user,
                    from,
                    to,
                    token,
                    amount,
                    preimage,
                    timelock_in,
                } => {
                    let source: Nickname = read_json(from)?;
                    let recipient: Nickname = read_json(to)?;
                    let kind = RequestKind::Lock {
                        recipient,
                        token: TokenId(*token),
                        amount: *amount,
                        hashlock: Sha256::digest(preimage.as_bytes()).into(),
                        timelock: ledger.block_height() + timelock_in,
                    };
                    let id = self.relay(&mut ledger, user.user, source, kind)?;
                    json!({ "lock_id": id })
                }
                HtlcCommand::Claim {
                    user,
                    from,
                    lock_id,
                    preimage,
                } => {
                    let source: Nickname = read_json(from)?;
                    let kind = RequestKind::Claim {
                        lock_id: *lock_id,
                        preimage: preimage.as_bytes().to_vec(),
                    };
                    self.relay(&mut ledger, user.user, source, kind)?;
                    json!({ "claimed": lock_id })
                }
                HtlcCommand::Refund { user, from, lock_id } => {
                    let source: Nickname = read_json(from)?;
                    let kind = RequestKind::Refund { lock_id: *lock_id };
                    self.relay(&mut ledger, user.user, source, kind)?;
                    json!({ "refunded": lock_id })
                }
            },
            NickhatCommand::Tick { blocks } => {
                ledger.tick(*blocks);
                json!({ "height": ledger.block_height() })
            }
        };
        self.save_ledger(&ledger)?;
        self.emit(result.to_string(), result);
        Ok(())
    }

    fn run_script(&self, script: &Path, out: &Option<PathBuf>) -> Result<()> {
        let text = fs::read_to_string(script).map_err(io_err(script))?;
        let seed = self.cfg.seed.unwrap_or_else(rand::random);
        let mut scenario = Scenario::new(seed);
        let results = scenario.run(&text)?;
        let out = out.clone().unwrap_or_else(|| self.path("scenario.results.jsonl"));
        let mut lines = String::new();
        for r in &results {
            lines.push_str(&r.to_string());
            lines.push('\n');
        }
        write_file(&out, &lines, false)?;
        if let Some(l) = scenario.ledger() {
            write_json(&out.with_extension("ledger.json"), &l.snapshot(), false)?;
        }
        let rejected = results.iter().filter(|r| r["ok"] == json!(false)).count();
        self.emit(
            format!("{} commands, {rejected} rejected; results in {}", results.len(), out.display()),
            json!({ "commands": results.len(), "rejected": rejected, "results": out }),
        );
        Ok(())
    }
}

fn experiment(cfg: &CliConfig, cmd: &ExperimentCommand) -> Result<()> {
    let base = cfg.seed.unwrap_or(0);
    match cmd {
        ExperimentCommand::Correctness { seeds, users } => {
            if *users == 0 {
                return Err(CliError::Usage("--users must be positive".into()));
            }
            let cfg_exp = ExperimentConfig { group_size: *users };
            let mut failures = Vec::new();
            let mut runs = 0u64;
            for s in base..base + seeds {
                for i in 0..*users {
                    let m = format!("message {s}/{i}");
                    runs += 1;
                    if !correctness_experiment(cfg_exp, UserIndex(i), m.as_bytes(), s, None)
                        .map_err(|e| CliError::Integrity(e.to_string()))?
                    {
                        failures.push((s, i));
                    }
                }
            }
            if cfg.json {
                println!("{}", json!({ "experiment": "correctness", "runs": runs, "failures": failures }));
            } else {
                println!("correctness runs={runs} failures={}", failures.len());
            }
            verdict(failures.is_empty(), "correctness")
        }
        ExperimentCommand::Sanity { name } => {
            let names: Vec<ExperimentName> = if name == "all" {
                ExperimentName::ALL.to_vec()
            } else {
                vec![name.parse().map_err(|_| CliError::Usage(format!("unknown experiment {name:?}")))?]
            };
            let mut passed = true;
            for n in names {
                let report = run_experiment_sanity(n, base);
                passed &= report.passed();
                if cfg.json {
                    println!("{}", report.to_json());
                } else {
                    print!("{}", report.to_text());
                }
            }
            verdict(passed, "sanity")
        }
    }
}
