//! The oracles' list bookkeeping, compared step by step with a model that
//! acts on lists only.

use std::collections::{BTreeMap, BTreeSet};

use ngs::ds::ds_keygen;
use ngs::harness::{CorruptPhase, OracleError, OracleState};
use ngs::ngs::{join, random_nick, Nickname, UserIndex};
use proptest::prelude::*;

#[derive(Clone, Debug)]
enum Call {
    AddU(u32),
    CrptU(u32),
    SndToI { i: u32, own_request: bool },
    SndToU(u32),
    IssuePending(u32),
    Usk(u32),
    WReg(u32),
    Trace { i: u32, of: u32 },
    Sig { i: u32, of: u32, m: u8 },
    Ch { b: bool, i0: u32, i1: u32, m: u8 },
}

fn call() -> impl Strategy<Value = Call> {
    let i = 0u32..5;
    prop_oneof![
        i.clone().prop_map(Call::AddU),
        i.clone().prop_map(Call::CrptU),
        (i.clone(), any::<bool>()).prop_map(|(i, own_request)| Call::SndToI { i, own_request }),
        i.clone().prop_map(Call::SndToU),
        i.clone().prop_map(Call::IssuePending),
        i.clone().prop_map(Call::Usk),
        i.clone().prop_map(Call::WReg),
        (i.clone(), i.clone()).prop_map(|(i, of)| Call::Trace { i, of }),
        (i.clone(), i.clone(), 0u8..3).prop_map(|(i, of, m)| Call::Sig { i, of, m }),
        (any::<bool>(), i.clone(), i, 0u8..3).prop_map(|(b, i0, i1, m)| Call::Ch { b, i0, i1, m }),
    ]
}

/// The list-only model: which indices are defined, which have a master
/// key, and the oracle lists without any cryptographic payload.
#[derive(Default)]
struct Model {
    upk: BTreeSet<u32>,
    mpk: BTreeSet<u32>,
    honest: BTreeSet<u32>,
    corrupt: BTreeSet<(u32, CorruptPhase)>,
    challenged: Vec<(u32, Vec<u8>, Nickname)>,
    revealed: BTreeSet<u32>,
    signed: Vec<(u32, Vec<u8>, Nickname)>,
    traced: Vec<(u32, Nickname, bool)>,
}

impl Model {
    fn traced_true(&self, i: u32, nk: &Nickname) -> bool {
        self.traced.iter().any(|(u, n, r)| *u == i && n == nk && *r)
    }
}

fn compare(o: &OracleState, m: &Model) -> Result<(), TestCaseError> {
    let l = &o.lists;
    let honest: BTreeSet<u32> = l.honest.keys().map(|u| u.0).collect();
    prop_assert_eq!(&honest, &m.honest);
    let corrupt: BTreeSet<(u32, CorruptPhase)> = l.corrupt.iter().map(|(u, p)| (u.0, *p)).collect();
    prop_assert_eq!(&corrupt, &m.corrupt);
    let revealed: BTreeSet<u32> = l.revealed.iter().map(|u| u.0).collect();
    prop_assert_eq!(&revealed, &m.revealed);
    let challenged: Vec<_> = l.challenged.iter().map(|r| (r.user.0, r.message.clone(), r.nickname)).collect();
    prop_assert_eq!(&challenged, &m.challenged);
    let signed: Vec<_> = l.signed.iter().map(|r| (r.user.0, r.message.clone(), r.nickname)).collect();
    prop_assert_eq!(&signed, &m.signed);
    let traced: Vec<_> = l.traced.iter().map(|r| (r.user.0, r.nickname, r.result)).collect();
    prop_assert_eq!(&traced, &m.traced);
    let mpk: BTreeSet<u32> = o.group.mpk_table().keys().map(|u| u.0).collect();
    prop_assert_eq!(&mpk, &m.mpk);
    Ok(())
}

fn refused<T>(r: &Result<T, OracleError>) -> bool {
    matches!(r, Err(OracleError::Refused(_)))
}

fn run(seed: u64, calls: Vec<Call>) -> Result<(), TestCaseError> {
    let mut o = OracleState::new(seed);
    let mut m = Model::default();
    let mut pending: BTreeMap<u32, ngs::ngs::JoinRequest> = BTreeMap::new();
    let mut challenge_nicks: Vec<Nickname> = Vec::new();

    for c in calls {
        match c {
            Call::AddU(i) => {
                let r = o.add_u(UserIndex(i));
                let expect_refused = m.upk.contains(&i);
                prop_assert_eq!(refused(&r), expect_refused);
                if !expect_refused {
                    prop_assert!(r.is_ok());
                    m.upk.insert(i);
                    m.honest.insert(i);
                    m.mpk.insert(i);
                }
            }
            Call::CrptU(i) => {
                let kp = ds_keygen(o.rng());
                o.crpt_u(UserIndex(i), kp.upk);
                let opk = o.opener.public;
                let (_, req) = join(&kp.usk, &opk, o.rng());
                pending.insert(i, req);
                m.upk.insert(i);
                m.corrupt.insert((i, CorruptPhase::Cont));
            }
            Call::SndToI { i, own_request } => {
                let req = if own_request {
                    pending.get(&i).cloned()
                } else {
                    pending.get(&((i + 1) % 5)).cloned()
                };
                let Some(req) = req else { continue };
                let r = o.snd_to_i(UserIndex(i), &req);
                let expect_refused = !m.corrupt.contains(&(i, CorruptPhase::Cont));
                prop_assert_eq!(refused(&r), expect_refused);
                if !expect_refused {
                    m.corrupt.remove(&(i, CorruptPhase::Cont));
                    m.corrupt.insert((i, CorruptPhase::Accept));
                    if r.is_ok() {
                        m.mpk.insert(i);
                    }
                }
            }
            Call::SndToU(i) => {
                let r = o.snd_to_u(UserIndex(i));
                let expect_refused = m.upk.contains(&i);
                prop_assert_eq!(refused(&r), expect_refused);
                if !expect_refused {
                    m.upk.insert(i);
                    m.honest.insert(i);
                }
            }
            Call::IssuePending(i) => {
                if o.issue_pending(UserIndex(i)).is_ok() {
                    m.mpk.insert(i);
                }
            }
            Call::Usk(i) => {
                let r = o.usk(UserIndex(i));
                let expect_refused = m.challenged.iter().any(|(u, _, _)| *u == i);
                prop_assert_eq!(refused(&r), expect_refused);
                if !expect_refused {
                    m.revealed.insert(i);
                }
            }
            Call::WReg(i) => {
                let Some(entry) = o.rreg(UserIndex((i + 1) % 5)) else { continue };
                let r = o.wreg(UserIndex(i), entry);
                prop_assert_eq!(refused(&r), !m.mpk.contains(&i));
            }
            Call::Trace { i, of } => {
                let nk = match (o.group.mpk(UserIndex(of)).copied(), challenge_nicks.last()) {
                    (Some(mpk), _) => random_nick(&mpk, o.rng()),
                    (None, Some(nk)) => *nk,
                    (None, None) => continue,
                };
                let r = o.trace(UserIndex(i), &nk);
                let expect_refused = !m.honest.contains(&i);
                prop_assert_eq!(refused(&r), expect_refused);
                if let Ok(b) = r {
                    m.traced.push((i, nk, b));
                }
            }
            Call::Sig { i, of, m: msg } => {
                let candidates: Vec<Nickname> = m.traced.iter().filter(|(u, _, _)| *u == of).map(|(_, n, _)| *n).collect();
                let Some(nk) = candidates.last().copied() else { continue };
                let r = o.sig(UserIndex(i), &nk, &[msg]);
                let expect_refused = !m.traced_true(i, &nk);
                prop_assert_eq!(refused(&r), expect_refused);
                if !expect_refused {
                    prop_assert!(r.is_ok());
                    m.signed.push((i, vec![msg], nk));
                }
            }
            Call::Ch { b, i0, i1, m: msg } => {
                let r = o.ch(b, UserIndex(i0), UserIndex(i1), &[msg]);
                let ib = if b { i1 } else { i0 };
                let traced = |u: u32| m.traced.iter().any(|(t, _, _)| *t == u);
                let expect_refused = !m.honest.contains(&i0)
                    || !m.honest.contains(&i1)
                    || traced(i0)
                    || traced(i1)
                    || m.revealed.contains(&i0)
                    || m.revealed.contains(&i1)
                    || !m.mpk.contains(&ib);
                prop_assert_eq!(refused(&r), expect_refused);
                if let Ok((nk, _)) = r {
                    m.challenged.push((i0, vec![msg], nk));
                    m.challenged.push((i1, vec![msg], nk));
                    challenge_nicks.push(nk);
                }
            }
        }
        compare(&o, &m)?;
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn oracle_lists_follow_the_list_model(seed in any::<u64>(), calls in prop::collection::vec(call(), 1..30)) {
        run(seed, calls)?;
    }
}

#[test]
fn scripted_sequence_exercises_every_oracle() {
    use Call::*;
    let calls = vec![
        AddU(0),
        AddU(1),
        AddU(0),
        SndToU(2),
        IssuePending(2),
        CrptU(3),
        SndToI { i: 3, own_request: true },
        SndToI { i: 3, own_request: true },
        CrptU(4),
        SndToI { i: 4, own_request: false },
        Trace { i: 0, of: 0 },
        Trace { i: 3, of: 0 },
        Sig { i: 0, of: 0, m: 1 },
        Sig { i: 1, of: 0, m: 1 },
        Ch { b: true, i0: 1, i1: 2, m: 2 },
        Ch { b: false, i0: 0, i1: 2, m: 2 },
        Usk(1),
        Usk(2),
        Ch { b: false, i0: 2, i1: 1, m: 0 },
        WReg(1),
        WReg(4),
    ];
    run(9, calls).unwrap();
}
