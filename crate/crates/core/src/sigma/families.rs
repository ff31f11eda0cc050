//! Statements of the scalar-witness proof families.

use crate::algebra::{G1Point, G2Point};

use super::{Element, LinearRelation, Statement};

/// Join proof over witness `(α, s)`:
/// `f = g^α ∧ w = u^α ∧ Ŝ = ĝ^s ∧ f̂′ = ĝ^α·Ẑ^s`.
pub fn pk_j_statement(
    f: &G1Point,
    w: &G1Point,
    u: &G1Point,
    s_hat: &G2Point,
    f_prime: &G2Point,
    z_hat: &G2Point,
) -> Statement {
    let g = Element::G1(G1Point::generator());
    let g_hat = Element::G2(G2Point::generator());
    let rel = |t, b, i| LinearRelation::new(t, b, i).expect("well-formed by construction");
    Statement::new(
        vec![
            rel(Element::G1(*f), vec![g], vec![0]),
            rel(Element::G1(*w), vec![Element::G1(*u)], vec![0]),
            rel(Element::G2(*s_hat), vec![g_hat], vec![1]),
            rel(
                Element::G2(*f_prime),
                vec![g_hat, Element::G2(*z_hat)],
                vec![0, 1],
            ),
        ],
        2,
    )
    .expect("indices within arity")
}

/// Nickname signature over witness `α`: `w = u^α`.
pub fn spk_s_statement(u: &G1Point, w: &G1Point) -> Statement {
    Statement::new(
        vec![
            LinearRelation::new(Element::G1(*w), vec![Element::G1(*u)], vec![0])
                .expect("well-formed by construction"),
        ],
        1,
    )
    .expect("indices within arity")
}
