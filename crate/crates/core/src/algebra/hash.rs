//! Random-oracle instantiations.
//!
//! * `hash_to_g1` is the IETF hash-to-curve construction for BLS12-381 G1
//!   (`expand_message_xmd` with SHA-256, simplified SWU on the 11-isogenous
//!   curve, cofactor clearing), keyed by a caller-supplied DST.
//! * `hash_to_scalar` is the matching `hash_to_field` into Z_p with the fixed
//!   DST [`FS_DST`].

use ark_bls12_381::{g1, Fr, G1Projective};
use ark_ec::hashing::curve_maps::wb::WBMap;
use ark_ec::hashing::map_to_curve_hasher::MapToCurveBasedHasher;
use ark_ec::hashing::HashToCurve;
use ark_ff::field_hashers::{DefaultFieldHasher, HashToField};
use sha2::Sha256;

use super::counters::{record, Op};
use super::{G1Point, Scalar};

/// DST of the G1 hash `H` used to derive `u = H(f)`.
pub const H_DST: &[u8] = b"NGS-H-v1";
/// DST of the Fiat-Shamir challenge hash.
pub const FS_DST: &[u8] = b"NGS-FS-v1";

type G1Hasher =
    MapToCurveBasedHasher<G1Projective, DefaultFieldHasher<Sha256, 128>, WBMap<g1::Config>>;

/// Hashes `input` to a G1 point under the domain tag `dst`.
///
/// The output is never the identity: in the (negligible) event the map hits
/// it, the input is re-hashed with an appended counter byte.
pub fn hash_to_g1(input: &[u8], dst: &[u8]) -> G1Point {
    record(Op::HashToG1, 1);
    let hasher = G1Hasher::new(dst).expect("BLS12-381 G1 supports the WB map");
    let mut msg = input.to_vec();
    let mut ctr = 0u8;
    loop {
        let p = hasher
            .hash(&msg)
            .expect("hash-to-curve on a valid map cannot fail");
        let p = G1Point(p.into());
        if !p.is_identity() {
            return p;
        }
        if ctr == 0 {
            msg.push(0);
        }
        ctr = ctr.wrapping_add(1);
        *msg.last_mut().expect("counter byte") = ctr;
    }
}

pub fn hash_to_scalar(transcript: &[u8]) -> Scalar {
    let hasher = <DefaultFieldHasher<Sha256, 128> as HashToField<Fr>>::new(FS_DST);
    let [s]: [Fr; 1] = hasher.hash_to_field::<1>(transcript);
    Scalar(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn hash_to_g1_is_deterministic_and_domain_separated() {
        let a = hash_to_g1(b"abc", H_DST);
        assert_eq!(a, hash_to_g1(b"abc", H_DST));
        assert_ne!(a, hash_to_g1(b"abc", FS_DST));
        assert_ne!(a, hash_to_g1(b"abd", H_DST));
        assert!(!a.is_identity());
        assert_ne!(a, G1Point::generator());
    }

    #[test]
    fn hash_to_scalar_is_stable() {
        let e1 = hash_to_scalar(b"");
        let e2 = hash_to_scalar(b"");
        assert_eq!(e1, e2);
        assert_ne!(e1, hash_to_scalar(b"\x00"));
        assert!(!e1.is_zero());
    }

    #[test]
    fn hash_to_scalar_has_no_collisions_on_ten_thousand_inputs() {
        let mut seen = HashSet::new();
        for i in 0u32..10_000 {
            let s = hash_to_scalar(&i.to_be_bytes());
            assert!(seen.insert(s.to_bytes()), "collision at {i}");
        }
    }
}
