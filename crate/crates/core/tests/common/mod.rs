#![allow(dead_code)]

pub mod published;

use peprk::bseries::ConditionTarget;
use peprk::poly::{Monomial, Poly};
use peprk::scalar::parse_rational;
use peprk::{Condition, Rational, RootedTree};

/// Tree from the nested-bracket drawing notation, where `[]` is a leaf and
/// siblings are juxtaposed: `[[[]][]]` is `[•,[•]]`.
pub fn rt(s: &str) -> RootedTree {
    s.replace(' ', "").replace("][", "],[").parse().unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn q(s: &str) -> Rational {
    parse_rational(s).unwrap()
}

/// `Σ c · Π u_τ` from `(coefficient, trees)` pairs; an empty tree list is a
/// constant.
pub fn poly(terms: &[(&str, &[&str])]) -> Poly {
    terms.iter().fold(Poly::constant(q("0")), |acc, (c, trees)| {
        let m = trees
            .iter()
            .fold(Poly::constant(q("1")), |m, t| m * Poly::from_term(Monomial::var(rt(t)), q("1")));
        acc + Poly::constant(q(c)) * m
    })
}

pub fn flow(order: usize, terms: &[(&str, &str)]) -> Condition {
    Condition::linear(
        ConditionTarget::FlowCoefficients,
        order,
        terms.iter().map(|(c, t)| (rt(t), q(c))),
        q("0"),
    )
    .unwrap()
}

/// `lhs − rhs = 0` on weights, given as one polynomial.
pub fn weights(order: usize, terms: &[(&str, &[&str])]) -> Condition {
    Condition::from_poly(ConditionTarget::MapWeights, order, poly(terms)).unwrap()
}

use peprk::methods::ButcherTableau;
use proptest::prelude::*;

/// Small rationals, zero included.
pub fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=6).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

/// Explicit consistent tableau with `s` stages and small rational entries.
pub fn random_tableau(s: usize) -> impl Strategy<Value = ButcherTableau<Rational>> {
    (prop::collection::vec(small_rational(), s * (s - 1) / 2), prop::collection::vec(small_rational(), s - 1)).prop_map(
        move |(a, mut b)| {
            let rest: Rational = b.iter().sum();
            b.push(Rational::from_integer(1.into()) - rest);
            let mut it = a.into_iter();
            let rows = (0..s).map(|i| (0..i).map(|_| it.next().unwrap()).collect()).collect();
            ButcherTableau::new("random", rows, b, None).unwrap()
        },
    )
}
