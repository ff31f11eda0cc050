use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::algebra::{G1Point, CURVE_ID};

use super::types::{IssuerPublicKey, Nickname, OpenerPublicKey, RegistrationEntry, UserIndex};
use super::NgsError;

pub const GROUP_FORMAT_VERSION: u32 = 1;

/// Public tables of one group.
///
/// `reg` is written only by the issuer and read by the opener; `mpk` and
/// `upk` are public. Every `f` ever accepted stays in `seen_f`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroupState {
    pub ipk: Option<IssuerPublicKey>,
    pub opk: Option<OpenerPublicKey>,
    upk: BTreeMap<UserIndex, G1Point>,
    mpk: BTreeMap<UserIndex, Nickname>,
    reg: BTreeMap<UserIndex, RegistrationEntry>,
    seen_f: BTreeSet<G1Point>,
}

impl GroupState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_keys(ipk: IssuerPublicKey, opk: OpenerPublicKey) -> Self {
        GroupState {
            ipk: Some(ipk),
            opk: Some(opk),
            ..Self::default()
        }
    }

    /// Publishes a user key. An index can be registered once.
    pub fn register_user(&mut self, i: UserIndex, upk: G1Point) -> Result<(), NgsError> {
        if self.upk.contains_key(&i) {
            return Err(NgsError::AlreadyRegistered(i));
        }
        self.set_user_key(i, upk);
        Ok(())
    }

    /// Unconditionally sets `upk[i]` (the corruption oracle needs this).
    pub fn set_user_key(&mut self, i: UserIndex, upk: G1Point) {
        self.upk.insert(i, upk);
    }

    pub fn upk(&self, i: UserIndex) -> Option<&G1Point> {
        self.upk.get(&i)
    }

    pub fn mpk(&self, i: UserIndex) -> Option<&Nickname> {
        self.mpk.get(&i)
    }

    pub fn reg(&self, i: UserIndex) -> Option<&RegistrationEntry> {
        self.reg.get(&i)
    }

    pub fn upk_table(&self) -> &BTreeMap<UserIndex, G1Point> {
        &self.upk
    }

    pub fn mpk_table(&self) -> &BTreeMap<UserIndex, Nickname> {
        &self.mpk
    }

    pub fn reg_table(&self) -> &BTreeMap<UserIndex, RegistrationEntry> {
        &self.reg
    }

    pub fn seen_f(&self) -> &BTreeSet<G1Point> {
        &self.seen_f
    }

    pub fn has_seen(&self, f: &G1Point) -> bool {
        self.seen_f.contains(f)
    }

    pub fn is_member(&self, i: UserIndex) -> bool {
        self.mpk.contains_key(&i)
    }

    pub(super) fn admit(&mut self, i: UserIndex, entry: RegistrationEntry, mpk: Nickname) {
        self.seen_f.insert(entry.f);
        self.reg.insert(i, entry);
        self.mpk.insert(i, mpk);
    }

    /// Overwrites the registration entry of an existing member, keeping
    /// `seen_f` a superset of every stored `f`.
    pub fn write_reg(&mut self, i: UserIndex, entry: RegistrationEntry) -> Result<(), NgsError> {
        if !self.reg.contains_key(&i) {
            return Err(NgsError::NotJoined(i));
        }
        self.seen_f.insert(entry.f);
        self.reg.insert(i, entry);
        Ok(())
    }

    /// Inserts a raw entry without any check. Only for fault injection.
    #[doc(hidden)]
    pub fn force_entry(&mut self, i: UserIndex, entry: RegistrationEntry, mpk: Nickname) {
        self.reg.insert(i, entry);
        self.mpk.insert(i, mpk);
    }

    /// Checks the table invariants: `reg` and `mpk` share their index set,
    /// every `f` is in `seen_f`, and no `f` appears twice.
    pub fn check_invariants(&self) -> Result<(), NgsError> {
        if !self.reg.keys().eq(self.mpk.keys()) {
            return Err(NgsError::Integrity("reg and mpk indices differ".into()));
        }
        let mut fs = BTreeSet::new();
        for (i, e) in &self.reg {
            if !self.seen_f.contains(&e.f) {
                return Err(NgsError::Integrity(format!("f of user {i} not in seen_f")));
            }
            if !fs.insert(e.f) {
                return Err(NgsError::Integrity(format!("f of user {i} is duplicated")));
            }
        }
        Ok(())
    }

    pub fn to_file(&self) -> GroupFile {
        let mut idx: BTreeSet<UserIndex> = self.upk.keys().copied().collect();
        idx.extend(self.mpk.keys().copied());
        idx.extend(self.reg.keys().copied());
        GroupFile {
            format_version: GROUP_FORMAT_VERSION,
            curve_id: CURVE_ID.to_string(),
            ipk: self.ipk,
            opk: self.opk,
            entries: idx
                .into_iter()
                .map(|i| GroupEntry {
                    index: i,
                    upk: self.upk.get(&i).copied(),
                    mpk: self.mpk.get(&i).copied(),
                    reg: self.reg.get(&i).cloned(),
                })
                .collect(),
            seen_f: self.seen_f.iter().copied().collect(),
        }
    }

    pub fn from_file(file: GroupFile) -> Result<Self, NgsError> {
        if file.format_version != GROUP_FORMAT_VERSION {
            return Err(NgsError::Integrity(format!(
                "unsupported group file version {}",
                file.format_version
            )));
        }
        if file.curve_id != CURVE_ID {
            return Err(NgsError::Integrity(format!(
                "group file is for curve {}",
                file.curve_id
            )));
        }
        let mut st = GroupState {
            ipk: file.ipk,
            opk: file.opk,
            seen_f: file.seen_f.into_iter().collect(),
            ..Self::default()
        };
        for e in file.entries {
            if let Some(upk) = e.upk {
                st.upk.insert(e.index, upk);
            }
            if let Some(mpk) = e.mpk {
                st.mpk.insert(e.index, mpk);
            }
            if let Some(reg) = e.reg {
                st.reg.insert(e.index, reg);
            }
        }
        st.check_invariants()?;
        Ok(st)
    }
}

/// On-disk form of a [`GroupState`]. Holds public values only.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupFile {
    pub format_version: u32,
    pub curve_id: String,
    pub ipk: Option<IssuerPublicKey>,
    pub opk: Option<OpenerPublicKey>,
    pub entries: Vec<GroupEntry>,
    pub seen_f: Vec<G1Point>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupEntry {
    pub index: UserIndex,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub upk: Option<G1Point>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mpk: Option<Nickname>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reg: Option<RegistrationEntry>,
}
