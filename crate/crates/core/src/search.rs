//! Multistart Levenberg-Marquardt search for explicit tableaus with given
//! classical and PEP order.
//!
//! The unknowns are the strictly lower triangular entries of `A`, row by
//! row, followed by `b`; `c` is always the row sums.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bseries::{conditions_on_weights, elementary_weights, MAX_WEIGHT_CONDITION_ORDER};
use crate::error::{Error, Result};
use crate::methods::{validate_with, ButcherTableau, Tableau};
use crate::scalar::{ratio_to_f64, Rational};
use crate::trees::{density, generate_trees, RootedTree};
use crate::Tolerances;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
const MAX_ITERATIONS: usize = 500;
const POLISH_MAX_DEN: i64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchSpec {
    pub s: usize,
    pub p: usize,
    pub q: usize,
    pub restarts: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl SearchSpec {
    pub fn new(s: usize, p: usize, q: usize) -> Self {
        Self { s, p, q, restarts: 100, seed: 0, tolerance: DEFAULT_TOLERANCE }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn unknowns(&self) -> usize {
        self.s * (self.s - 1) / 2 + self.s
    }

    fn check(&self) -> Result<()> {
        if self.s == 0 || self.p == 0 || self.q < self.p {
            return Err(Error::Domain(format!(
                "need s ≥ 1 and q ≥ p ≥ 1, got s = {}, p = {}, q = {}",
                self.s, self.p, self.q
            )));
        }
        if self.q >= 3 && self.p < 2 {
            return Err(Error::Domain("PEP conditions beyond order 2 assume classical order at least 2".into()));
        }
        if self.q > MAX_WEIGHT_CONDITION_ORDER {
            return Err(Error::OrderOutOfRange { order: self.q, max: MAX_WEIGHT_CONDITION_ORDER });
        }
        Ok(())
    }
}

/// Builds the tableau encoded by `x`.
pub fn tableau_from_vars<S: crate::scalar::Coeff>(s: usize, x: &[S], name: &str) -> Result<ButcherTableau<S>> {
    let na = s * (s - 1) / 2;
    if x.len() != na + s {
        return Err(Error::Domain(format!("expected {} unknowns for {s} stages, got {}", na + s, x.len())));
    }
    let mut a = Vec::with_capacity(s);
    let mut k = 0;
    for i in 0..s {
        a.push(x[k..k + i].to_vec());
        k += i;
    }
    ButcherTableau::new(name, a, x[na..].to_vec(), None)
}

/// Inverse of [`tableau_from_vars`].
pub fn vars_from_tableau<S: crate::scalar::Coeff>(t: &ButcherTableau<S>) -> Vec<S> {
    let s = t.stages();
    let mut x = Vec::with_capacity(s * (s + 1) / 2);
    for i in 0..s {
        x.extend(t.a_matrix()[i][..i].iter().cloned());
    }
    x.extend(t.b().iter().cloned());
    x
}

/// Residual system compiled to index arithmetic for fast float evaluation.
struct Program {
    s: usize,
    trees: Vec<RootedTree>,
    children: Vec<Vec<usize>>,
    order_targets: Vec<(usize, f64)>,
    conditions: Vec<(Vec<(f64, Vec<usize>)>, f64)>,
}

impl Program {
    fn new(spec: &SearchSpec) -> Result<Self> {
        spec.check()?;
        let trees = generate_trees(spec.q.max(spec.p))?;
        let index = |t: &RootedTree| trees.iter().position(|x| x == t).expect("tree within range");
        let children = trees.iter().map(|t| t.children().iter().map(index).collect()).collect();
        let order_targets = trees
            .iter()
            .enumerate()
            .filter(|(_, t)| t.order() <= spec.p)
            .map(|(i, t)| (i, 1.0 / density(t) as f64))
            .collect();
        let conditions = if spec.q >= 3 {
            conditions_on_weights(spec.q)?
                .iter()
                .map(|c| {
                    let terms = c
                        .terms()
                        .iter()
                        .map(|(m, k)| (ratio_to_f64(k), m.vars().iter().map(index).collect()))
                        .collect();
                    (terms, ratio_to_f64(c.rhs()))
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(Self { s: spec.s, trees, children, order_targets, conditions })
    }

    fn weights(&self, x: &[f64]) -> Vec<f64> {
        let s = self.s;
        let na = s * (s - 1) / 2;
        let (a, b) = x.split_at(na);
        let row = |i: usize| &a[i * i.saturating_sub(1) / 2..][..i];
        let mut inner: Vec<Vec<f64>> = Vec::with_capacity(self.trees.len());
        let mut weights = Vec::with_capacity(self.trees.len());
        let mut phi = vec![0.0; s];
        for kids in &self.children {
            phi.iter_mut().for_each(|p| *p = 1.0);
            for &k in kids {
                for (p, z) in phi.iter_mut().zip(&inner[k]) {
                    *p *= z;
                }
            }
            weights.push(b.iter().zip(&phi).map(|(x, y)| x * y).sum());
            inner.push((0..s).map(|i| row(i).iter().zip(&phi).map(|(x, y)| x * y).sum()).collect());
        }
        weights
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let u = self.weights(x);
        let mut r: Vec<f64> = self.order_targets.iter().map(|&(i, g)| u[i] - g).collect();
        for (terms, rhs) in &self.conditions {
            let lhs: f64 = terms.iter().map(|(c, vars)| c * vars.iter().map(|&v| u[v]).product::<f64>()).sum();
            r.push(lhs - rhs);
        }
        r
    }
}

/// Order-condition residuals `u_τ − 1/γ(τ)` for `|τ| ≤ p`, followed by the
/// PEP weight conditions of orders `3..=q`.
pub fn residual_vector(x: &[f64], spec: &SearchSpec) -> Result<Vec<f64>> {
    if x.len() != spec.unknowns() {
        return Err(Error::Domain(format!("expected {} unknowns, got {}", spec.unknowns(), x.len())));
    }
    Ok(Program::new(spec)?.residual(x))
}

/// Exact counterpart of [`residual_vector`].
pub fn residual_vector_exact(t: &ButcherTableau<Rational>, spec: &SearchSpec) -> Result<Vec<Rational>> {
    spec.check()?;
    let u = elementary_weights(t, spec.q.max(spec.p))?;
    let mut r: Vec<Rational> = u
        .iter()
        .filter(|(t, _)| t.order() <= spec.p)
        .map(|(t, w)| w - Rational::new(1.into(), density(t).into()))
        .collect();
    if spec.q >= 3 {
        r.extend(conditions_on_weights(spec.q)?.iter().map(|c| c.residual_of(&u)));
    }
    Ok(r)
}

fn inf_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, x| if x.is_nan() { f64::INFINITY } else { m.max(x.abs()) })
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

fn jacobian(prog: &Program, x: &[f64], r: &[f64]) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(r.len(), x.len());
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        let step = 1e-7 * x[k].abs().max(1.0);
        xp[k] = x[k] + step;
        let rp = prog.residual(&xp);
        for (i, (a, b)) in rp.iter().zip(r).enumerate() {
            j[(i, k)] = (a - b) / step;
        }
        xp[k] = x[k];
    }
    j
}

/// Damped Gauss-Newton from `x`; returns the final point and its residual.
fn levenberg_marquardt(prog: &Program, mut x: Vec<f64>, tol: f64) -> (Vec<f64>, f64) {
    let mut r = prog.residual(&x);
    let mut cost = sum_sq(&r);
    let mut lambda = 1e-3;
    for _ in 0..MAX_ITERATIONS {
        if !cost.is_finite() || inf_norm(&r) < tol {
            break;
        }
        let j = jacobian(prog, &x, &r);
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * DVector::from_column_slice(&r);
        let mut improved = false;
        while lambda < 1e16 {
            let mut m = jtj.clone();
            for d in 0..m.nrows() {
                m[(d, d)] += lambda * (1.0 + jtj[(d, d)]);
            }
            let Some(delta) = m.cholesky().map(|c| c.solve(&-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
            let rt = prog.residual(&trial);
            let ct = sum_sq(&rt);
            if ct.is_finite() && ct < cost {
                (x, r, cost) = (trial, rt, ct);
                lambda = (lambda / 10.0).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let norm = inf_norm(&r);
    (x, norm)
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub spec: SearchSpec,
    /// Best point over all restarts, with its `‖r‖∞`.
    pub best: Option<ButcherTableau<f64>>,
    pub residual: f64,
    pub best_restart: Option<usize>,
    pub successes: usize,
    /// Distinct successful tableaus in restart order.
    pub solutions: Vec<ButcherTableau<f64>>,
    /// Exact tableau reconstructed from the best point, when every entry
    /// has a small-denominator neighbour and the exact residual vanishes.
    pub polished: Option<ButcherTableau<Rational>>,
}

impl SearchOutcome {
    pub fn feasible(&self) -> bool {
        self.successes > 0
    }
}

/// Uniform start in `[−2, 2]` for restart `index`.
pub fn initial_guess(spec: &SearchSpec, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    (0..spec.unknowns()).map(|_| rng.random_range(-2.0..=2.0)).collect()
}

fn name(spec: &SearchSpec) -> String {
    format!("search({},{},{})", spec.s, spec.p, spec.q)
}

fn certified(t: &ButcherTableau<f64>, spec: &SearchSpec) -> bool {
    let cap = spec.q.clamp(2, crate::bseries::MAX_EP_ORDER);
    match validate_with(&Tableau::Float(t.clone()), cap, &Tolerances::default()) {
        Ok(r) => r.classical_order >= spec.p && r.pep_order >= spec.q.min(cap),
        Err(_) => false,
    }
}

/// Runs every restart and keeps the smallest residual, lower index first on ties.
pub fn solve(spec: &SearchSpec) -> Result<SearchOutcome> {
    let prog = Program::new(spec)?;
    let runs: Vec<(usize, Vec<f64>, f64)> = (0..spec.restarts)
        .into_par_iter()
        .map(|i| {
            let (x, norm) = levenberg_marquardt(&prog, initial_guess(spec, i), spec.tolerance);
            (i, x, norm)
        })
        .collect();

    let mut solutions: Vec<ButcherTableau<f64>> = Vec::new();
    let mut successes = 0;
    for (_, x, norm) in &runs {
        if *norm >= spec.tolerance {
            continue;
        }
        let t = tableau_from_vars(spec.s, x, &name(spec))?;
        if !certified(&t, spec) {
            continue;
        }
        successes += 1;
        let xv = vars_from_tableau(&t);
        let seen = solutions.iter().any(|o| {
            vars_from_tableau(o).iter().zip(&xv).all(|(a, b)| (a - b).abs() < 1e-4)
        });
        if !seen {
            solutions.push(t);
        }
    }

    let best = runs
        .iter()
        .filter(|r| r.2.is_finite())
        .min_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
    let (best, residual, best_restart) = match best {
        Some((i, x, norm)) => (Some(tableau_from_vars(spec.s, x, &name(spec))?), *norm, Some(*i)),
        None => (None, f64::INFINITY, None),
    };
    let polished = best
        .iter()
        .filter(|_| residual < spec.tolerance)
        .chain(&solutions)
        .find_map(|t| polish(t, spec));
    Ok(SearchOutcome { spec: spec.clone(), best, residual, best_restart, successes, solutions, polished })
}

/// Simplest fraction within `eps` of `x`, found among the continued-fraction
/// convergents with denominator at most `max_den`.
fn simplest_within(x: f64, eps: f64, max_den: i64) -> Option<Rational> {
    let (mut h0, mut h1, mut k0, mut k1) = (0i128, 1i128, 1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if !a.is_finite() || a.abs() > 1e15 {
            return None;
        }
        let (h2, k2) = (a as i128 * h1 + h0, a as i128 * k1 + k0);
        if k2 > max_den as i128 {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= eps {
            return Some(Rational::new(h1.into(), k1.into()));
        }
        r = 1.0 / (r - a);
    }
    None
}

/// Replaces every unknown by the simplest nearby fraction (denominators up
/// to `10⁶`), widening the neighbourhood step by step, and keeps the first
/// candidate whose exact residual vanishes.
pub fn polish(t: &ButcherTableau<f64>, spec: &SearchSpec) -> Option<ButcherTableau<Rational>> {
    let x = vars_from_tableau(t);
    let mut last: Option<Vec<Rational>> = None;
    for eps in [1e-12, 1e-10, 1e-8, 1e-6, 1e-5, 1e-4] {
        let Some(exact) = x
            .iter()
            .map(|&v| simplest_within(v, eps, POLISH_MAX_DEN))
            .collect::<Option<Vec<_>>>()
        else {
            continue;
        };
        if last.as_ref() == Some(&exact) {
            continue;
        }
        let candidate = tableau_from_vars(spec.s, &exact, t.name()).ok()?;
        let r = residual_vector_exact(&candidate, spec).ok()?;
        if r.iter().all(num_traits::Zero::is_zero) {
            return Some(candidate);
        }
        last = Some(exact);
    }
    None
}
