//! Coefficient-level B-series algebra.
//!
//! Series are normalized as `B(a, hf, y) = a(∅) y + Σ h^|τ| / σ(τ) a(τ) F(τ)(y)`.
//! A Runge-Kutta method has map coefficients `u` (its elementary weights) and
//! flow coefficients `v` (the vector field of its modified equation). The two
//! are related through the exact flow of `ẏ = B(v, hf, y)`: writing that flow
//! as `B(a(t), y)`, the composition law gives
//!
//! ```text
//! a'(t)(τ) = Σ_θ v(θ) Π_{σ ∈ τ∖θ} a(t)(σ)
//! ```
//!
//! where `θ` ranges over the non-empty subtrees containing the root. Each
//! `a(t)(τ)` is a polynomial in `t` with `a(1) = u`, and the only term of
//! order `|τ|` on the right is `v(τ)` itself, so the relation can be solved
//! order by order in either direction.

mod conditions;

pub use conditions::{
    conditions_on_weights, derive_conditions, reduce_weight_condition, symbolic_flow, unreduced_weight_condition, Condition,
    ConditionTarget, LinearCondition, MAX_WEIGHT_CONDITION_ORDER,
};

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, RatMatrix};
use crate::methods::ButcherTableau;
use crate::scalar::{rat, Coeff, Rational, Scalar};
use crate::trees::{self, generate_trees, RootedTree};

/// Which B-series a [`CoefficientSeries`] describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesKind {
    /// One step of a numerical method; `a(∅) = 1`.
    Map,
    /// Modified-equation vector field; `a(∅) = 0`.
    Flow,
    /// The exact solution, `a(τ) = 1/γ(τ)`.
    ExactFlow,
}

/// Tolerances used when the coefficients are floating point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Per classical order condition `|u_τ − 1/γ(τ)|`.
    pub order_condition: f64,
    /// Energy-preservation defect (least-squares residual norm).
    pub ep_defect: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            order_condition: 1e-10,
            ep_defect: 1e-8,
        }
    }
}

/// Tree-indexed coefficients of a truncated B-series.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSeries<S> {
    kind: SeriesKind,
    max_order: usize,
    empty: S,
    coeffs: BTreeMap<RootedTree, S>,
}

impl<S: Coeff> CoefficientSeries<S> {
    /// Builds a series from explicit coefficients; every tree up to
    /// `max_order` must be present.
    pub fn new(kind: SeriesKind, max_order: usize, coeffs: BTreeMap<RootedTree, S>) -> Result<Self> {
        for t in generate_trees(max_order)? {
            if !coeffs.contains_key(&t) {
                return Err(Error::Domain(format!("missing coefficient for {t}")));
            }
        }
        let empty = match kind {
            SeriesKind::Flow => S::zero(),
            SeriesKind::Map | SeriesKind::ExactFlow => S::one(),
        };
        Ok(CoefficientSeries {
            kind,
            max_order,
            empty,
            coeffs,
        })
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Coefficient of the empty tree.
    pub fn empty_coeff(&self) -> &S {
        &self.empty
    }

    /// Coefficient of `tree`. Panics when the tree is beyond `max_order`.
    pub fn get(&self, tree: &RootedTree) -> &S {
        self.coeffs
            .get(tree)
            .unwrap_or_else(|| panic!("{tree} is not covered by this series (max order {})", self.max_order))
    }

    pub fn try_get(&self, tree: &RootedTree) -> Option<&S> {
        self.coeffs.get(tree)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RootedTree, &S)> {
        self.coeffs.iter()
    }

    /// Coefficients of trees of exactly `order` nodes.
    pub fn of_order(&self, order: usize) -> impl Iterator<Item = (&RootedTree, &S)> {
        self.coeffs.iter().filter(move |(t, _)| t.order() == order)
    }

    pub fn map<T: Coeff>(&self, f: impl Fn(&S) -> T) -> CoefficientSeries<T> {
        CoefficientSeries {
            kind: self.kind,
            max_order: self.max_order,
            empty: f(&self.empty),
            coeffs: self.coeffs.iter().map(|(t, c)| (t.clone(), f(c))).collect(),
        }
    }
}

/// Elementary weights `u_τ = bᵀ Φ(τ)` of an explicit tableau, where the stage
/// vector of a tree is the componentwise product over its children of
/// `A Φ(child)`, and a leaf child contributes `c`.
pub fn elementary_weights<S: Coeff>(tableau: &ButcherTableau<S>, max_order: usize) -> Result<CoefficientSeries<S>> {
    let trees = generate_trees(max_order)?;
    let s = tableau.stages();
    let mut stage: HashMap<RootedTree, Vec<S>> = HashMap::new();
    // A Φ(τ) for every tree already seen
    let mut internal: HashMap<RootedTree, Vec<S>> = HashMap::new();
    let mut coeffs = BTreeMap::new();
    for t in trees {
        let mut phi = vec![S::one(); s];
        for child in t.children() {
            let z = &internal[&child];
            for (p, zi) in phi.iter_mut().zip(z) {
                *p = p.clone() * zi.clone();
            }
        }
        let weight = tableau
            .b()
            .iter()
            .zip(&phi)
            .fold(S::zero(), |acc, (bi, pi)| acc + bi.clone() * pi.clone());
        let z = if t.is_leaf() {
            tableau.c().to_vec()
        } else {
            (0..s)
                .map(|i| {
                    (0..i).fold(S::zero(), |acc, j| acc + tableau.a(i, j).clone() * phi[j].clone())
                })
                .collect()
        };
        internal.insert(t.clone(), z);
        stage.insert(t.clone(), phi);
        coeffs.insert(t, weight);
    }
    Ok(CoefficientSeries {
        kind: SeriesKind::Map,
        max_order,
        empty: S::one(),
        coeffs,
    })
}

/// Coefficients `1/γ(τ)` of the exact solution.
pub fn exact_flow_weights<S: Coeff>(max_order: usize) -> Result<CoefficientSeries<S>> {
    let coeffs = generate_trees(max_order)?
        .into_iter()
        .map(|t| {
            let g = trees::density(&t) as i64;
            (t, S::from_ratio(1, g))
        })
        .collect();
    Ok(CoefficientSeries {
        kind: SeriesKind::ExactFlow,
        max_order,
        empty: S::one(),
        coeffs,
    })
}

/// Largest `p ≤ max_order` with `u_τ = 1/γ(τ)` for every `|τ| ≤ p`.
pub fn classical_order<S: Scalar>(u: &CoefficientSeries<S>, tol: &Tolerances) -> usize {
    let mut p = 0;
    for order in 1..=u.max_order {
        let ok = u.of_order(order).all(|(t, ut)| {
            let target = S::from_ratio(1, trees::density(t) as i64);
            (ut.clone() - target).is_negligible(tol.order_condition)
        });
        if !ok {
            break;
        }
        p = order;
    }
    p
}

/// Polynomial in `t`, lowest degree first.
#[derive(Clone, Debug)]
struct TimePoly<S>(Vec<S>);

impl<S: Coeff> TimePoly<S> {
    fn mul(&self, other: &TimePoly<S>) -> TimePoly<S> {
        if self.0.is_empty() || other.0.is_empty() {
            return TimePoly(Vec::new());
        }
        let mut out = vec![S::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        TimePoly(out)
    }

    fn add_scaled(&mut self, other: &TimePoly<S>, k: &S) {
        if self.0.len() < other.0.len() {
            self.0.resize(other.0.len(), S::zero());
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a = a.clone() + k.clone() * b.clone();
        }
    }

    /// Antiderivative vanishing at `t = 0`.
    fn integrate(&self) -> TimePoly<S> {
        let mut out = Vec::with_capacity(self.0.len() + 1);
        out.push(S::zero());
        for (k, a) in self.0.iter().enumerate() {
            out.push(a.clone() * S::from_ratio(1, k as i64 + 1));
        }
        TimePoly(out)
    }

    fn at_one(&self) -> S {
        self.0.iter().fold(S::zero(), |acc, a| acc + a.clone())
    }
}

enum Direction<'a, S> {
    MapToFlow(&'a CoefficientSeries<S>),
    FlowToMap(&'a CoefficientSeries<S>),
}

/// Returns `(u, v)` with both series filled in up to `max_order`.
fn flow_relation<S: Coeff>(max_order: usize, dir: Direction<'_, S>) -> Result<(BTreeMap<RootedTree, S>, BTreeMap<RootedTree, S>)> {
    let trees = generate_trees(max_order)?;
    let mut a: HashMap<RootedTree, TimePoly<S>> = HashMap::new();
    let mut u = BTreeMap::new();
    let mut v: BTreeMap<RootedTree, S> = BTreeMap::new();
    for tau in trees {
        let mut deriv = TimePoly(Vec::new());
        for (theta, forest) in tau.root_subtrees() {
            if forest.is_empty() {
                continue;
            }
            let mut prod = TimePoly(vec![S::one()]);
            for f in &forest {
                prod = prod.mul(&a[f]);
            }
            deriv.add_scaled(&prod, &v[&theta]);
        }
        let mut poly = deriv.integrate();
        let lower = poly.at_one();
        let (u_tau, v_tau) = match &dir {
            Direction::MapToFlow(map) => {
                let ut = map.get(&tau).clone();
                (ut.clone(), ut - lower)
            }
            Direction::FlowToMap(flow) => {
                let vt = flow.get(&tau).clone();
                (lower + vt.clone(), vt)
            }
        };
        poly.add_scaled(&TimePoly(vec![S::zero(), S::one()]), &v_tau);
        a.insert(tau.clone(), poly);
        u.insert(tau.clone(), u_tau);
        v.insert(tau, v_tau);
    }
    Ok((u, v))
}

/// Flow coefficients `v` of the modified equation whose exact time-`h` flow
/// reproduces the map `u`.
pub fn modified_equation<S: Coeff>(u: &CoefficientSeries<S>) -> Result<CoefficientSeries<S>> {
    if u.kind == SeriesKind::Flow {
        return Err(Error::Domain("modified_equation expects map coefficients".into()));
    }
    let (_, v) = flow_relation(u.max_order, Direction::MapToFlow(u))?;
    Ok(CoefficientSeries {
        kind: SeriesKind::Flow,
        max_order: u.max_order,
        empty: S::zero(),
        coeffs: v,
    })
}

/// Checked variant for numeric scalars: rejects inconsistent maps
/// (`u_• ≠ 1` beyond the order-condition tolerance).
pub fn modified_equation_checked<S: Scalar>(u: &CoefficientSeries<S>, tol: &Tolerances) -> Result<CoefficientSeries<S>> {
    let leaf = u.get(&RootedTree::leaf()).clone();
    if !(leaf.clone() - S::one()).is_negligible(tol.order_condition) {
        return Err(Error::Domain(format!(
            "method is not consistent: u(•) = {}",
            leaf.to_f64()
        )));
    }
    modified_equation(u)
}

/// Inverse of [`modified_equation`]: the map coefficients of the exact
/// time-`h` flow of the vector field `v`.
pub fn map_from_flow<S: Coeff>(v: &CoefficientSeries<S>) -> Result<CoefficientSeries<S>> {
    if v.kind != SeriesKind::Flow {
        return Err(Error::Domain("map_from_flow expects flow coefficients".into()));
    }
    let (u, _) = flow_relation(v.max_order, Direction::FlowToMap(v))?;
    Ok(CoefficientSeries {
        kind: SeriesKind::Map,
        max_order: v.max_order,
        empty: S::one(),
        coeffs: u,
    })
}

/// Linear system for the coefficients `μ_{j,τ}` on one conjugacy class.
#[derive(Clone, Debug)]
pub struct ClassSystem {
    pub trees: Vec<RootedTree>,
    /// Rows indexed by `trees`, one column per (tree, leaf) pair.
    pub matrix: RatMatrix,
    /// Rows spanning `{y : yᵀ M = 0}` in reduced echelon form.
    pub left_null: RatMatrix,
    pub rank: usize,
}

/// All conjugacy-class systems for one order.
#[derive(Clone, Debug)]
pub struct EpSystem {
    pub order: usize,
    pub classes: Vec<ClassSystem>,
}

/// Largest order for which energy-preservation systems are assembled.
pub const MAX_EP_ORDER: usize = 10;

/// Largest order accepted by [`derive_conditions`].
pub const MAX_CONDITION_ORDER: usize = 8;

/// Cached per-order systems; the matrices only depend on tree combinatorics.
pub fn ep_system(order: usize) -> Result<&'static EpSystem> {
    static CACHE: [OnceLock<EpSystem>; MAX_EP_ORDER + 1] = [const { OnceLock::new() }; MAX_EP_ORDER + 1];
    if !(2..=MAX_EP_ORDER).contains(&order) {
        return Err(Error::OrderOutOfRange { order, max: MAX_EP_ORDER });
    }
    Ok(CACHE[order].get_or_init(|| build_ep_system(order)))
}

fn build_ep_system(order: usize) -> EpSystem {
    let classes = trees::classes_of_order(order)
        .into_iter()
        .map(|class| {
            let index: HashMap<&RootedTree, usize> = class.iter().enumerate().map(|(i, t)| (t, i)).collect();
            let mut columns: Vec<Vec<Rational>> = Vec::new();
            for (i, t) in class.iter().enumerate() {
                for leaf in trees::leaves(t) {
                    let (conj, parity) = trees::ep_conjugate(t, leaf).expect("leaf enumerated from the tree");
                    let mut col = vec![Rational::zero(); class.len()];
                    col[i] += Rational::one();
                    col[index[&conj]] += rat(parity as i64, 1);
                    columns.push(col);
                }
            }
            let matrix: RatMatrix = (0..class.len())
                .map(|r| columns.iter().map(|c| c[r].clone()).collect())
                .collect();
            let left_null = linalg::left_null_space(&matrix, class.len(), columns.len());
            let rank = class.len() - left_null.len();
            ClassSystem {
                trees: class,
                matrix,
                left_null,
                rank,
            }
        })
        .collect();
    EpSystem { order, classes }
}

/// Least-squares residual of the `μ` system at one order.
#[derive(Clone, Debug, PartialEq)]
pub struct Defect<S> {
    /// `‖r‖²`, exact for rational input.
    pub squared_norm: S,
}

impl<S: Scalar> Defect<S> {
    pub fn norm(&self) -> f64 {
        self.squared_norm.to_f64().max(0.0).sqrt()
    }

    /// Zero exactly for rational input, below `tol` otherwise.
    pub fn is_zero(&self, tol: f64) -> bool {
        if S::EXACT {
            self.squared_norm.is_zero()
        } else {
            self.norm() < tol
        }
    }
}

/// Least-squares residual of the order-`order` system: for every tree `t`
/// the equation reads `Σ μ (±1) = v_t / σ(t)`. Rational input is projected
/// onto the left null space exactly; floats go through a column-pivoted QR
/// of the system matrix.
pub fn ep_flow_defect<S: Scalar>(v: &CoefficientSeries<S>, order: usize) -> Result<Defect<S>> {
    if v.kind != SeriesKind::Flow {
        return Err(Error::Domain("ep_flow_defect expects flow coefficients".into()));
    }
    if order > v.max_order {
        return Err(Error::Domain(format!(
            "order {order} exceeds the series truncation {}",
            v.max_order
        )));
    }
    let sys = ep_system(order)?;
    let mut total = S::zero();
    for class in &sys.classes {
        let w: Vec<S> = class
            .trees
            .iter()
            .map(|t| v.get(t).clone() * S::from_ratio(1, trees::symmetry(t) as i64))
            .collect();
        total = total + S::ep_residual_sq(class, &w);
    }
    Ok(Defect { squared_norm: total })
}

/// PEP order: the largest `q ≤ cap` such that the modified equation is
/// energy preserving at every order `2..=q`. Inconsistent methods get 0.
pub fn pep_order<S: Scalar>(tableau: &ButcherTableau<S>, cap: usize, tol: &Tolerances) -> Result<usize> {
    Ok(pep_profile(tableau, cap, tol)?.pep_order)
}

/// Per-order defects together with the classical and PEP orders.
#[derive(Clone, Debug)]
pub struct PepProfile {
    pub classical_order: usize,
    pub pep_order: usize,
    /// `(order, defect norm)` for orders `2..=cap`.
    pub defects: Vec<(usize, f64)>,
}

pub fn pep_profile<S: Scalar>(tableau: &ButcherTableau<S>, cap: usize, tol: &Tolerances) -> Result<PepProfile> {
    if !(2..=MAX_EP_ORDER).contains(&cap) {
        return Err(Error::OrderOutOfRange { order: cap, max: MAX_EP_ORDER });
    }
    let u = elementary_weights(tableau, cap)?;
    let classical = classical_order(&u, tol);
    if classical == 0 {
        return Ok(PepProfile {
            classical_order: 0,
            pep_order: 0,
            defects: Vec::new(),
        });
    }
    let v = modified_equation_checked(&u, tol)?;
    let mut q = 1;
    let mut saturated = true;
    let mut defects = Vec::new();
    for order in 2..=cap {
        let d = ep_flow_defect(&v, order)?;
        if saturated && d.is_zero(tol.ep_defect) {
            q = order;
        } else {
            saturated = false;
        }
        defects.push((order, d.norm()));
    }
    Ok(PepProfile {
        classical_order: classical,
        pep_order: q,
        defects,
    })
}
