//! Property tests for the algebraic, proof, scheme and ledger invariants.

mod common;

use common::Group;
use ngs::algebra::{count_ops, pairing, G1Point, G2Point, GtPoint, Scalar};
use ngs::ds::{ds_keygen, ds_sign, ds_verify, DsSignature};
use ngs::ngs::{gvf, nick, open, sign, trace, uvf, Nickname, UserIndex};
use ngs::nickhat::{Address, Ledger, RequestKind, TokenId, TransferRequest};
use ngs::sigma::families::spk_s_statement;
use ngs::sigma::{fs_prove_scalars, fs_verify_scalars, DomainTag, ScalarWitness, SpkProof};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn flip(bytes: &mut [u8], bit: usize) {
    let bit = bit % (bytes.len() * 8);
    bytes[bit / 8] ^= 1 << (bit % 8);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn group_laws_hold(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (x, y) = (Scalar::random(&mut r, false), Scalar::random(&mut r, false));
        let (a, b) = (G1Point::random(&mut r), G1Point::random(&mut r));
        prop_assert_eq!((a * b).exp(&x), a.exp(&x) * b.exp(&x));
        prop_assert_eq!(a.exp(&(x + y)), a.exp(&x) * a.exp(&y));
        let (a, b) = (G2Point::random(&mut r), G2Point::random(&mut r));
        prop_assert_eq!((a * b).exp(&x), a.exp(&x) * b.exp(&x));
        prop_assert_eq!(a.exp(&(x + y)), a.exp(&x) * a.exp(&y));
        let (a, b) = (GtPoint::random(&mut r), GtPoint::random(&mut r));
        prop_assert_eq!((a * b).exp(&x), a.exp(&x) * b.exp(&x));
        prop_assert_eq!(a.exp(&(x + y)), a.exp(&x) * a.exp(&y));
    }

    #[test]
    fn encodings_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = Scalar::random(&mut r, false);
        prop_assert_eq!(Scalar::from_bytes(&s.to_bytes()).unwrap(), s);
        let p = G1Point::random(&mut r);
        prop_assert_eq!(G1Point::from_bytes(&p.to_bytes()).unwrap(), p);
        let q = G2Point::random(&mut r);
        prop_assert_eq!(G2Point::from_bytes(&q.to_bytes()).unwrap(), q);
        let t = GtPoint::random(&mut r);
        prop_assert_eq!(GtPoint::from_bytes(&t.to_bytes()).unwrap(), t);
        let nk = Nickname::new(p, G1Point::random(&mut r), G1Point::random(&mut r)).unwrap();
        prop_assert_eq!(Nickname::from_bytes(&nk.to_bytes()).unwrap(), nk);
        let json = serde_json::to_string(&nk).unwrap();
        prop_assert_eq!(serde_json::from_str::<Nickname>(&json).unwrap(), nk);
    }

    #[test]
    fn pairing_is_bilinear(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (x, y) = (Scalar::random(&mut r, false), Scalar::random(&mut r, false));
        let g = G1Point::generator();
        let h = G2Point::generator();
        prop_assert_eq!(pairing(&g.exp(&x), &h.exp(&y)), pairing(&g, &h).exp(&(x * y)));
    }

    #[test]
    fn counters_count_exactly(k in 0u64..12, m in 0u64..4) {
        let g = G1Point::generator();
        let h = G2Point::generator();
        let s = Scalar::from_u64(5);
        let (_, c) = count_ops(|| {
            for _ in 0..k {
                let _ = g.exp(&s);
            }
            for _ in 0..m {
                let _ = pairing(&g, &h);
            }
        });
        prop_assert_eq!(c.g1_exp, k);
        prop_assert_eq!(c.pairings, m);
        prop_assert_eq!(c.g2_exp, 0);
    }

    #[test]
    fn ds_complete_and_bit_sensitive(seed in any::<u64>(), msg in prop::collection::vec(any::<u8>(), 0..64), bit in any::<usize>()) {
        let mut r = rng(seed);
        let kp = ds_keygen(&mut r);
        let sig = ds_sign(&kp.usk, &msg, &mut r);
        prop_assert!(ds_verify(&kp.upk, &msg, &sig));
        let mut bytes = sig.to_bytes();
        flip(&mut bytes, bit);
        if let Ok(t) = DsSignature::from_bytes(&bytes) {
            prop_assert!(!ds_verify(&kp.upk, &msg, &t));
        }
        let mut m2 = msg.clone();
        m2.push(0);
        flip(&mut m2, bit);
        prop_assert!(!ds_verify(&kp.upk, &m2, &sig));
    }

    #[test]
    fn fiat_shamir_complete_deterministic_and_bit_sensitive(seed in any::<u64>(), msg in prop::collection::vec(any::<u8>(), 0..32), bit in any::<usize>()) {
        let mut r = rng(seed);
        let x = Scalar::random(&mut r, true);
        let u = G1Point::random(&mut r);
        let st = spk_s_statement(&u, &u.exp(&x));
        let w = ScalarWitness::new(vec![x]);
        let p = fs_prove_scalars(&st, &w, &msg, DomainTag::SpkS, &mut rng(seed ^ 1)).unwrap();
        let p2 = fs_prove_scalars(&st, &w, &msg, DomainTag::SpkS, &mut rng(seed ^ 1)).unwrap();
        prop_assert_eq!(p.to_bytes(), p2.to_bytes());
        prop_assert!(fs_verify_scalars(&st, &p, &msg));

        let mut bytes = p.to_bytes();
        flip(&mut bytes, bit);
        if let Ok(t) = SpkProof::from_bytes(&bytes) {
            prop_assert!(!fs_verify_scalars(&st, &t, &msg));
        }
        let mut m2 = msg.clone();
        m2.push(0);
        flip(&mut m2, bit);
        prop_assert!(!fs_verify_scalars(&st, &p, &m2));
        let other = spk_s_statement(&u.exp(&Scalar::from_u64(2)), &u.exp(&x));
        prop_assert!(!fs_verify_scalars(&other, &p, &msg));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn trace_is_invariant_under_rerandomization(seed in any::<u64>(), k in 1u64..u64::MAX) {
        let mut g = Group::new(seed, 2);
        let nk = g.nick(0);
        let again = nick(&nk, &Scalar::from_u64(k)).unwrap();
        for i in 0..2 {
            let tau = g.members[i].trapdoor;
            prop_assert_eq!(trace(&g.issuer.public, &tau, &again), trace(&g.issuer.public, &tau, &nk));
        }
        prop_assert!(gvf(&g.issuer.public, &again));
    }

    #[test]
    fn open_agrees_with_trace(seed in any::<u64>(), owner in 0u32..3) {
        let mut g = Group::new(seed, 3);
        let nk = g.nick(owner);
        let (i, _) = open(&g.opener.secret, &nk, &g.state, &mut rng(seed)).unwrap();
        prop_assert_eq!(i, UserIndex(owner));
        prop_assert!(trace(&g.issuer.public, &g.members[i.0 as usize].trapdoor, &nk));
    }

    #[test]
    fn nickname_signatures_bind_message_and_nickname(seed in any::<u64>(), msg in prop::collection::vec(any::<u8>(), 0..32)) {
        let mut g = Group::new(seed, 2);
        let nk = g.nick(0);
        let sigma = sign(&nk, &g.members[0].msk, &msg, &mut g.rng).unwrap();
        prop_assert!(uvf(&nk, &msg, &sigma));
        let sibling = g.nick(0);
        prop_assert!(!uvf(&sibling, &msg, &sigma));
        let mut m2 = msg.clone();
        m2.push(1);
        prop_assert!(!uvf(&nk, &m2, &sigma));
        prop_assert!(sign(&nk, &g.members[1].msk, &msg, &mut g.rng).is_err());
    }

    #[test]
    fn request_encoding_is_injective(seed in any::<u64>(), a in 1u64..1000, b in 1u64..1000, n in 1u64..5) {
        let mut r = rng(seed);
        let nk = Nickname::new(G1Point::random(&mut r), G1Point::random(&mut r), G1Point::random(&mut r)).unwrap();
        let kinds = [
            RequestKind::Transfer { to: nk, token: TokenId(1), amount: a },
            RequestKind::Withdraw { to: Address::from_label("x"), token: TokenId(1), amount: a },
            RequestKind::Approve { token: TokenId(1), amount: a },
            RequestKind::Claim { lock_id: a, preimage: b.to_be_bytes().to_vec() },
            RequestKind::Refund { lock_id: a },
        ];
        for (k1, x) in kinds.iter().enumerate() {
            for (k2, y) in kinds.iter().enumerate() {
                let rx = TransferRequest { source: nk, nonce: n, kind: x.clone() };
                let ry = TransferRequest { source: nk, nonce: n + (k1 == k2) as u64, kind: y.clone() };
                prop_assert_ne!(rx.to_bytes(), ry.to_bytes());
            }
        }
        let t1 = TransferRequest { source: nk, nonce: n, kind: RequestKind::Approve { token: TokenId(1), amount: a } };
        let t2 = TransferRequest { source: nk, nonce: n, kind: RequestKind::Approve { token: TokenId(1), amount: b } };
        prop_assert_eq!(t1.to_bytes() == t2.to_bytes(), a == b);
        let json = serde_json::to_string(&t1).unwrap();
        prop_assert_eq!(serde_json::from_str::<TransferRequest>(&json).unwrap(), t1);
    }
}

#[derive(Clone, Debug)]
enum LedgerOp {
    Mint(u8, u64),
    Approve(u8, u64),
    Deposit(u8, u64, u8),
    Transfer(u8, u64, u8, bool),
    Withdraw(u8, u64, u8),
    Tick(u8),
}

fn ledger_op() -> impl Strategy<Value = LedgerOp> {
    prop_oneof![
        (0u8..3, 0u64..50).prop_map(|(a, v)| LedgerOp::Mint(a, v)),
        (0u8..3, 0u64..80).prop_map(|(a, v)| LedgerOp::Approve(a, v)),
        (0u8..3, 0u64..40, 0u8..2).prop_map(|(a, v, o)| LedgerOp::Deposit(a, v, o)),
        (any::<u8>(), 0u64..40, 0u8..2, any::<bool>()).prop_map(|(s, v, o, h)| LedgerOp::Transfer(s, v, o, h)),
        (any::<u8>(), 0u64..40, 0u8..3).prop_map(|(s, v, a)| LedgerOp::Withdraw(s, v, a)),
        (0u8..3).prop_map(LedgerOp::Tick),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn ledger_conserves_and_rejections_are_atomic(seed in any::<u64>(), ops in prop::collection::vec(ledger_op(), 1..40)) {
        let mut g = Group::new(seed, 2);
        let t = TokenId(7);
        let addrs: Vec<Address> = ["a", "b", "c"].iter().map(|s| Address::from_label(s)).collect();
        let mut ledger = Ledger::deploy(g.issuer.public, Address::from_label("sup"));
        let mut minted = 0u64;
        let mut nicks: Vec<(Nickname, usize)> = Vec::new();
        for op in ops {
            let before = ledger.clone();
            let r = match op {
                LedgerOp::Mint(a, v) => {
                    let r = ledger.mint(addrs[a as usize], t, v);
                    if r.is_ok() { minted += v; }
                    r.map(|_| ())
                }
                LedgerOp::Approve(a, v) => ledger.approve(addrs[a as usize], Address::escrow(), t, v),
                LedgerOp::Deposit(a, v, o) => {
                    let nk = g.nick(o as u32);
                    let r = ledger.deposit(addrs[a as usize], t, v, &nk);
                    if r.is_ok() { nicks.push((nk, o as usize)); }
                    r
                }
                LedgerOp::Transfer(s, v, o, honest) if !nicks.is_empty() => {
                    let (src, owner) = nicks[s as usize % nicks.len()];
                    let to = g.nick(o as u32);
                    let req = TransferRequest { source: src, nonce: ledger.nonce(&src) + 1, kind: RequestKind::Transfer { to, token: t, amount: v } };
                    let signer = if honest { owner } else { 1 - owner };
                    let sigma = sign(&src, &g.members[signer].msk, &req.to_bytes(), &mut g.rng)
                        .unwrap_or_else(|_| sign(&g.mpk(signer as u32), &g.members[signer].msk, &req.to_bytes(), &mut g.rng).unwrap());
                    let r = ledger.execute(&req, &sigma);
                    if honest && v > 0 && before.nick_balance(&src, t) >= v {
                        prop_assert!(r.is_ok(), "honest fresh request with funds must execute");
                    }
                    if !honest {
                        prop_assert!(r.is_err());
                    }
                    if r.is_ok() { nicks.push((to, o as usize)); }
                    r.map(|_| ())
                }
                LedgerOp::Withdraw(s, v, a) if !nicks.is_empty() => {
                    let (src, owner) = nicks[s as usize % nicks.len()];
                    let req = TransferRequest { source: src, nonce: ledger.nonce(&src) + 1, kind: RequestKind::Withdraw { to: addrs[a as usize], token: t, amount: v } };
                    let sigma = sign(&src, &g.members[owner].msk, &req.to_bytes(), &mut g.rng).unwrap();
                    ledger.execute(&req, &sigma).map(|_| ())
                }
                LedgerOp::Tick(n) => { ledger.tick(n as u64); Ok(()) }
                _ => Ok(()),
            };
            if r.is_err() {
                prop_assert!(ledger == before);
            }
            prop_assert_eq!(ledger.circulating(t), minted);
            prop_assert!(ledger.check_conservation().is_ok());
        }
    }
}
