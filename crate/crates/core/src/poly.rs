//! Multivariate polynomials over the rationals whose variables are rooted
//! trees. Used to express flow coefficients symbolically in terms of the
//! elementary weights of a method.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use crate::scalar::{Coeff, Rational};
use crate::trees::RootedTree;

/// Product of variables, kept sorted; the empty monomial is the constant 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(SmallVec<[RootedTree; 2]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(tree: RootedTree) -> Self {
        Monomial(SmallVec::from_elem(tree, 1))
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn vars(&self) -> &[RootedTree] {
        &self.0
    }

    fn times(&self, other: &Monomial) -> Monomial {
        let mut v: SmallVec<[RootedTree; 2]> = self.0.iter().chain(other.0.iter()).cloned().collect();
        v.sort();
        Monomial(v)
    }

    /// Evaluates the product with `value` supplying each variable.
    pub fn eval<S: Coeff>(&self, value: &impl Fn(&RootedTree) -> S) -> S {
        self.0.iter().fold(S::one(), |acc, t| acc * value(t))
    }
}

impl Ord for Monomial {
    /// Constant first, then by degree, then variable by variable.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.iter().cmp(other.0.iter()))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Monomial {
    /// Writes the monomial with `prefix` naming the variables, e.g. `u[•,•]^2`.
    pub fn render(&self, prefix: &str) -> String {
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.0.len() {
            let mut j = i + 1;
            while j < self.0.len() && self.0[j] == self.0[i] {
                j += 1;
            }
            let power = j - i;
            let name = if self.0[i].is_leaf() {
                format!("{prefix}•")
            } else {
                format!("{prefix}{}", self.0[i])
            };
            parts.push(if power > 1 { format!("{name}^{power}") } else { name });
            i = j;
        }
        parts.join("*")
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn var(tree: RootedTree) -> Self {
        Poly::from_term(Monomial::var(tree), Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::from_term(Monomial::one(), c)
    }

    pub fn from_term(m: Monomial, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rational> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Monomial, Rational> {
        self.terms
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn eval<S: Coeff>(&self, value: &impl Fn(&RootedTree) -> S) -> S {
        self.terms
            .iter()
            .fold(S::zero(), |acc, (m, c)| acc + S::from_rational(c) * m.eval(value))
    }

    /// Replaces every occurrence of `var` by `expr`.
    pub fn substitute(&self, var: &RootedTree, expr: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let k = m.0.iter().filter(|t| *t == var).count();
            if k == 0 {
                out.add_term(m.clone(), c.clone());
                continue;
            }
            let rest = Monomial(m.0.iter().filter(|t| *t != var).cloned().collect());
            let mut term = Poly::from_term(rest, c.clone());
            for _ in 0..k {
                term = term * expr.clone();
            }
            out = out + term;
        }
        out
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }
}

impl Zero for Poly {
    fn zero() -> Self {
        Poly::default()
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Poly {
    fn one() -> Self {
        Poly::constant(Rational::one())
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        self + (-rhs)
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(mut self) -> Poly {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.times(m2), c1 * c2);
            }
        }
        out
    }
}

impl Coeff for Poly {
    fn from_rational(r: &Rational) -> Self {
        Poly::constant(r.clone())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if i > 0 {
                write!(f, " {sign} ")?;
            } else if c.is_negative() {
                f.write_str("-")?;
            }
            let a = c.abs();
            if m.degree() == 0 {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{}", m.render("u"))?;
            } else {
                write!(f, "{a}*{}", m.render("u"))?;
            }
        }
        Ok(())
    }
}
