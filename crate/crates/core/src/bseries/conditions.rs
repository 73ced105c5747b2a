//! Explicit energy-preservation conditions.
//!
//! On flow coefficients every condition is linear. Substituting the
//! map/flow relation turns them into conditions on elementary weights, which
//! become polynomial from order six on (products of third-order terms).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{ep_system, modified_equation, CoefficientSeries, SeriesKind, MAX_CONDITION_ORDER};
use crate::error::{Error, Result};
use crate::poly::{Monomial, Poly};
use crate::scalar::{rat, Coeff, Rational};
use crate::trees::{self, generate_trees, RootedTree};

/// Which coefficients a [`Condition`] constrains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConditionTarget {
    /// Flow coefficients `v_τ`.
    FlowCoefficients,
    /// Elementary weights `u_τ`.
    MapWeights,
}

impl ConditionTarget {
    fn prefix(self) -> &'static str {
        match self {
            ConditionTarget::FlowCoefficients => "v",
            ConditionTarget::MapWeights => "u",
        }
    }
}

/// `Σ c_m m = rhs` over monomials in the series coefficients.
///
/// Canonical scaling: the coefficients are coprime integers and the first
/// term (lowest degree, then tree order) is positive. `rhs` is whatever that
/// scaling leaves and may be a fraction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Condition {
    target: ConditionTarget,
    order: usize,
    terms: BTreeMap<Monomial, Rational>,
    rhs: Rational,
}

/// A condition of degree one.
pub type LinearCondition = Condition;

impl Condition {
    /// Canonical form of `p = 0`; `None` when `p` has no variable terms.
    pub fn from_poly(target: ConditionTarget, order: usize, p: Poly) -> Option<Self> {
        let mut terms = p.into_terms();
        let constant = terms.remove(&Monomial::one()).unwrap_or_else(Rational::zero);
        if terms.is_empty() {
            return None;
        }
        let mut c = Condition {
            target,
            order,
            terms,
            rhs: -constant,
        };
        c.normalize();
        Some(c)
    }

    /// Canonical form of `Σ c_τ x_τ = rhs`.
    pub fn linear(
        target: ConditionTarget,
        order: usize,
        terms: impl IntoIterator<Item = (RootedTree, Rational)>,
        rhs: Rational,
    ) -> Result<Self> {
        let p = terms
            .into_iter()
            .fold(Poly::constant(-rhs), |acc, (t, c)| acc + Poly::from_term(Monomial::var(t), c));
        Condition::from_poly(target, order, p).ok_or_else(|| Error::Domain("condition has no nonzero terms".into()))
    }

    fn normalize(&mut self) {
        let lcm = self
            .terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let gcd = self
            .terms
            .values()
            .fold(BigInt::zero(), |acc, c| acc.gcd(&(c.numer() * &lcm / c.denom())));
        let mut scale = Rational::new(lcm, gcd);
        if self.terms.values().next().is_some_and(Signed::is_negative) {
            scale = -scale;
        }
        for c in self.terms.values_mut() {
            *c = &*c * &scale;
        }
        self.rhs = &self.rhs * &scale;
    }

    pub fn target(&self) -> ConditionTarget {
        self.target
    }

    /// Order of the flow condition this one stems from.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rational> {
        &self.terms
    }

    pub fn rhs(&self) -> &Rational {
        &self.rhs
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_linear(&self) -> bool {
        self.degree() == 1
    }

    /// `(tree, coefficient)` pairs when the condition is linear.
    pub fn linear_terms(&self) -> Option<Vec<(&RootedTree, &Rational)>> {
        self.is_linear()
            .then(|| self.terms.iter().map(|(m, c)| (&m.vars()[0], c)).collect())
    }

    /// Every tree that appears in some term.
    pub fn trees(&self) -> BTreeSet<&RootedTree> {
        self.terms.keys().flat_map(|m| m.vars()).collect()
    }

    /// `lhs − rhs` with `value` supplying the coefficients.
    pub fn residual<S: Coeff>(&self, value: impl Fn(&RootedTree) -> S) -> S {
        let lhs = self
            .terms
            .iter()
            .fold(S::zero(), |acc, (m, c)| acc + S::from_rational(c) * m.eval(&value));
        lhs - S::from_rational(&self.rhs)
    }

    /// Residual against a series; every referenced tree must be covered.
    pub fn residual_of<S: Coeff>(&self, series: &CoefficientSeries<S>) -> S {
        self.residual(|t| series.get(t).clone())
    }
}

impl Ord for Condition {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.target, self.order)
            .cmp(&(other.target, other.order))
            .then_with(|| self.terms.iter().cmp(other.terms.iter()))
            .then_with(|| self.rhs.cmp(&other.rhs))
    }
}

impl PartialOrd for Condition {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = self.target.prefix();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let a = c.abs();
            match (i, c.is_negative()) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if a.is_one() {
                write!(f, "{}", m.render(prefix))?;
            } else {
                write!(f, "{a} {}", m.render(prefix))?;
            }
        }
        write!(f, " = {}", self.rhs)
    }
}

/// Conditions on the order-`n` flow coefficients for energy preservation at
/// that order: one per left null vector of each conjugacy-class system,
/// applied to `v_t / σ(t)`. Sorted.
pub fn derive_conditions(n: usize) -> Result<Vec<Condition>> {
    if !(2..=MAX_CONDITION_ORDER).contains(&n) {
        return Err(Error::OrderOutOfRange {
            order: n,
            max: MAX_CONDITION_ORDER,
        });
    }
    let sys = ep_system(n)?;
    let mut out = Vec::new();
    for class in &sys.classes {
        for y in &class.left_null {
            let terms = class
                .trees
                .iter()
                .zip(y)
                .filter(|(_, yi)| !yi.is_zero())
                .map(|(t, yi)| (t.clone(), yi / Rational::from_integer(trees::symmetry(t).into())));
            out.push(Condition::linear(ConditionTarget::FlowCoefficients, n, terms, Rational::zero())?);
        }
    }
    out.sort();
    Ok(out)
}

/// Largest order accepted by [`conditions_on_weights`].
pub const MAX_WEIGHT_CONDITION_ORDER: usize = 6;

/// Conditions on elementary weights for PEP orders `3..=n`, assuming
/// classical order at least two (`u_• = 1`, `u_[•] = 1/2`).
///
/// Each flow condition is rewritten in the weights and then reduced by the
/// lower-order conditions: every linear condition eliminates its pivot, the
/// last variable in tree order, from all conditions of higher order. One
/// weight condition per flow condition, sorted.
pub fn conditions_on_weights(n: usize) -> Result<&'static [Condition]> {
    static CACHE: [OnceLock<Vec<Condition>>; MAX_WEIGHT_CONDITION_ORDER + 1] =
        [const { OnceLock::new() }; MAX_WEIGHT_CONDITION_ORDER + 1];
    if !(3..=MAX_WEIGHT_CONDITION_ORDER).contains(&n) {
        return Err(Error::OrderOutOfRange {
            order: n,
            max: MAX_WEIGHT_CONDITION_ORDER,
        });
    }
    if let Some(c) = CACHE[n].get() {
        return Ok(c);
    }
    let computed = weight_conditions(n)?;
    Ok(CACHE[n].get_or_init(|| computed))
}

/// Flow coefficients as polynomials in the weights of an order-two method.
pub fn symbolic_flow(max_order: usize) -> Result<CoefficientSeries<Poly>> {
    let leaf = RootedTree::leaf();
    let pair = RootedTree::tall(2);
    let coeffs = generate_trees(max_order)?
        .into_iter()
        .map(|t| {
            let c = if t == leaf {
                Poly::one()
            } else if t == pair {
                Poly::constant(rat(1, 2))
            } else {
                Poly::var(t.clone())
            };
            (t, c)
        })
        .collect();
    let u = CoefficientSeries::new(SeriesKind::Map, max_order, coeffs)?;
    modified_equation(&u)
}

/// Flow condition rewritten in the weights, without any reduction.
pub fn unreduced_weight_condition(flow: &Condition, v: &CoefficientSeries<Poly>) -> Result<Condition> {
    let p = flow
        .terms()
        .iter()
        .fold(Poly::zero(), |acc, (m, c)| acc + Poly::constant(c.clone()) * m.eval(&|t| v.get(t).clone()));
    Condition::from_poly(ConditionTarget::MapWeights, flow.order(), p)
        .ok_or_else(|| Error::Domain(format!("flow condition {flow} is trivial on weights")))
}

impl Condition {
    /// `lhs − rhs` as a polynomial.
    pub fn to_poly(&self) -> Poly {
        self.terms
            .iter()
            .fold(Poly::constant(-self.rhs.clone()), |acc, (m, c)| acc + Poly::from_term(m.clone(), c.clone()))
    }

    /// Variable eliminated by a linear condition: its last tree.
    pub fn pivot(&self) -> Option<&RootedTree> {
        if !self.is_linear() {
            return None;
        }
        self.terms.keys().next_back().map(|m| &m.vars()[0])
    }

    /// The pivot written in terms of the remaining variables.
    fn pivot_expression(&self) -> Option<(RootedTree, Poly)> {
        let x = self.pivot()?.clone();
        let m = Monomial::var(x.clone());
        let c = self.terms[&m].clone();
        let rest = self.to_poly() - Poly::from_term(m, c.clone());
        Some((x, Poly::constant(-Rational::one() / c) * rest))
    }
}

/// Reduces a weight condition of order `n` by the canonical conditions of
/// orders `3..n`, the same way [`conditions_on_weights`] does.
pub fn reduce_weight_condition(c: &Condition) -> Result<Condition> {
    if c.order() <= 3 {
        return Ok(c.clone());
    }
    let lower = conditions_on_weights(c.order() - 1)?;
    let pivots: Vec<(RootedTree, Poly)> = lower.iter().filter_map(Condition::pivot_expression).collect();
    let p = pivots.iter().fold(c.to_poly(), |p, (x, e)| p.substitute(x, e));
    Condition::from_poly(c.target, c.order, p).ok_or_else(|| Error::Domain(format!("{c} reduces to a constant")))
}

fn weight_conditions(n: usize) -> Result<Vec<Condition>> {
    let v = symbolic_flow(n)?;
    let mut out: Vec<Condition> = Vec::new();
    let mut pivots: Vec<(RootedTree, Poly)> = Vec::new();
    for order in 3..=n {
        let mut this_order = Vec::new();
        for flow in derive_conditions(order)? {
            let raw = unreduced_weight_condition(&flow, &v)?;
            let p = pivots.iter().fold(raw.to_poly(), |p, (x, e)| p.substitute(x, e));
            let c = Condition::from_poly(ConditionTarget::MapWeights, order, p)
                .ok_or_else(|| Error::Domain(format!("{raw} reduces to a constant")))?;
            this_order.push(c);
        }
        pivots.extend(this_order.iter().filter_map(Condition::pivot_expression));
        out.extend(this_order);
    }
    debug_assert!(pivots
        .iter()
        .all(|(_, e)| pivots.iter().all(|(x, _)| e.terms().keys().all(|m| !m.vars().contains(x)))));
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn t(s: &str) -> RootedTree {
        s.parse().unwrap()
    }

    #[test]
    fn counts_per_order() {
        let counts: Vec<usize> = (2..=6).map(|n| derive_conditions(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 1, 3, 4, 11]);
    }

    #[test]
    fn third_order_condition() {
        let c = derive_conditions(3).unwrap();
        assert_eq!(c[0].to_string(), "v[•,•] = 0");
    }

    #[test]
    fn canonical_scaling() {
        let c = Condition::linear(
            ConditionTarget::FlowCoefficients,
            4,
            [(t("[[•,•]]"), rat(1, 2)), (t("[•,[•]]"), int(-1))],
            int(0),
        )
        .unwrap();
        assert_eq!(c.to_string(), "v[[•,•]] - 2 v[•,[•]] = 0");
        let neg = Condition::linear(
            ConditionTarget::FlowCoefficients,
            4,
            [(t("[[•,•]]"), rat(-3, 2)), (t("[•,[•]]"), int(3))],
            int(0),
        )
        .unwrap();
        assert_eq!(c, neg);
    }

    #[test]
    fn weight_conditions_at_order_three() {
        let c = conditions_on_weights(3).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].to_string(), "u[•,•] = 1/3");
    }

    #[test]
    fn sixth_order_weights_are_quadratic() {
        let c = conditions_on_weights(6).unwrap();
        assert_eq!(c.len(), 1 + 3 + 4 + 11);
        assert!(c.iter().any(|c| c.degree() == 2));
        assert!(c.iter().filter(|c| c.order() <= 5).all(Condition::is_linear));
    }
}
