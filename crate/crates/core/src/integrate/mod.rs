//! Fixed-step explicit Runge-Kutta integration, error tracking, EOC tables
//! and Duffing orbit classification.

mod problems;

pub use problems::{
    duffing, exponential, lotka_volterra, oscillator, problem, problem_suite, HamiltonianProblem,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::methods::registry;
use crate::methods::ButcherTableau;

/// An autonomous system `y' = f(y)`.
pub trait OdeSystem: Sync {
    fn dim(&self) -> usize;
    fn rhs(&self, y: &[f64], dy: &mut [f64]);
}

/// Reusable stage storage for one tableau and one system size.
pub struct Stepper<'a> {
    t: &'a ButcherTableau<f64>,
    dim: usize,
    k: Vec<f64>,
    tmp: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(t: &'a ButcherTableau<f64>, dim: usize) -> Self {
        Self { t, dim, k: vec![0.0; t.stages() * dim], tmp: vec![0.0; dim] }
    }

    /// Advances `y` by one step of size `h`. On a non-finite stage the
    /// failing stage index is returned and `y` is left untouched; index `s`
    /// means the update itself overflowed.
    pub fn step<F: OdeSystem + ?Sized>(&mut self, f: &F, y: &mut [f64], h: f64) -> std::result::Result<(), usize> {
        let (s, n) = (self.t.stages(), self.dim);
        let a = self.t.a_matrix();
        for i in 0..s {
            self.tmp.copy_from_slice(y);
            for (j, &aij) in a[i][..i].iter().enumerate() {
                if aij != 0.0 {
                    let kj = &self.k[j * n..(j + 1) * n];
                    for (x, &kx) in self.tmp.iter_mut().zip(kj) {
                        *x += h * aij * kx;
                    }
                }
            }
            let (_, rest) = self.k.split_at_mut(i * n);
            let ki = &mut rest[..n];
            f.rhs(&self.tmp, ki);
            if ki.iter().any(|x| !x.is_finite()) {
                return Err(i);
            }
        }
        self.tmp.copy_from_slice(y);
        for (i, &bi) in self.t.b().iter().enumerate() {
            if bi != 0.0 {
                for (x, &kx) in self.tmp.iter_mut().zip(&self.k[i * n..(i + 1) * n]) {
                    *x += h * bi * kx;
                }
            }
        }
        if self.tmp.iter().any(|x| !x.is_finite()) {
            return Err(s);
        }
        y.copy_from_slice(&self.tmp);
        Ok(())
    }
}

/// One explicit RK step.
pub fn rk_step<F: OdeSystem + ?Sized>(t: &ButcherTableau<f64>, f: &F, y: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut out = y.to_vec();
    Stepper::new(t, f.dim())
        .step(f, &mut out, h)
        .map_err(|stage| Error::Divergence { time: 0.0, stage })?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub method: String,
    pub h: f64,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// The last sample was reached with a shortened step.
    pub final_partial: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectories hold at least y0")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectories hold at least y0")
    }
}

/// Smallest sampling stride keeping a trajectory of `steps` steps below
/// `10⁶` stored points.
pub fn default_sample_every(steps: usize) -> usize {
    steps / 999_999 + 1
}

fn step_count(h: f64, t_end: f64) -> (usize, f64) {
    let ratio = t_end / h;
    let n = ratio.round();
    if (ratio - n).abs() <= 1e-9 * ratio.max(1.0) {
        (n as usize, 0.0)
    } else {
        let n = ratio.floor();
        (n as usize, t_end - n * h)
    }
}

/// Integrates `f` from `y0` with fixed step `h` up to `t_end`, storing every
/// `sample_every`-th state and the final one.
pub fn integrate_system<F: OdeSystem + ?Sized>(
    t: &ButcherTableau<f64>,
    f: &F,
    y0: &[f64],
    h: f64,
    t_end: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step size must be positive, got {h}")));
    }
    if !(t_end >= 0.0) {
        return Err(Error::Domain(format!("final time must be nonnegative, got {t_end}")));
    }
    if y0.len() != f.dim() {
        return Err(Error::Domain(format!("initial state has length {} but the system has dimension {}", y0.len(), f.dim())));
    }
    let every = sample_every.max(1);
    let (n, rest) = step_count(h, t_end);
    let mut traj = Trajectory {
        method: t.name().to_string(),
        h,
        times: vec![0.0],
        states: vec![y0.to_vec()],
        final_partial: false,
    };
    let mut stepper = Stepper::new(t, f.dim());
    let mut y = y0.to_vec();
    for k in 1..=n {
        stepper
            .step(f, &mut y, h)
            .map_err(|stage| Error::Divergence { time: (k - 1) as f64 * h, stage })?;
        if k % every == 0 || k == n {
            traj.times.push(k as f64 * h);
            traj.states.push(y.clone());
        }
    }
    if rest > 0.0 {
        stepper
            .step(f, &mut y, rest)
            .map_err(|stage| Error::Divergence { time: n as f64 * h, stage })?;
        traj.times.push(t_end);
        traj.states.push(y);
        traj.final_partial = true;
    }
    Ok(traj)
}

/// Integrates a test problem with `h = s·h0`, `s` the number of stages.
pub fn integrate(
    t: &ButcherTableau<f64>,
    p: &HamiltonianProblem,
    h0: f64,
    t_end: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    integrate_system(t, p, &p.y0, t.stages() as f64 * h0, t_end, sample_every)
}

/// Classical RK(4,4) solution of `p` at the given increasing times, taking
/// equal substeps no longer than `h_ref` between consecutive times.
pub fn reference_trajectory(p: &HamiltonianProblem, times: &[f64], h_ref: f64) -> Result<Trajectory> {
    let rk = registry::rk44().to_f64();
    let mut stepper = Stepper::new(&rk, p.dim);
    let mut y = p.y0.clone();
    let mut traj = Trajectory {
        method: rk.name().to_string(),
        h: h_ref,
        times: Vec::with_capacity(times.len()),
        states: Vec::with_capacity(times.len()),
        final_partial: false,
    };
    let mut now = 0.0;
    for &target in times {
        let span = target - now;
        if span < 0.0 {
            return Err(Error::Domain("reference times must be increasing from 0".into()));
        }
        let m = (span / h_ref - 1e-9).ceil().max(0.0) as usize;
        for _ in 0..m {
            stepper
                .step(p, &mut y, span / m as f64)
                .map_err(|stage| Error::Divergence { time: now, stage })?;
        }
        now = target;
        traj.times.push(target);
        traj.states.push(y.clone());
    }
    Ok(traj)
}

pub enum Reference<'a> {
    Exact,
    Trajectory(&'a Trajectory),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorSample {
    pub t: f64,
    pub solution_error: f64,
    pub energy_error: f64,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(1.0)
}

/// Solution and energy error at every sample of `traj`.
pub fn error_series(traj: &Trajectory, p: &HamiltonianProblem, reference: Reference<'_>) -> Result<Vec<ErrorSample>> {
    let h0 = p.energy(&traj.states[0]);
    let mut out = Vec::with_capacity(traj.len());
    let mut j = 0;
    for (&t, y) in traj.times.iter().zip(&traj.states) {
        let exact = match &reference {
            Reference::Exact => p
                .exact_solution(t)
                .ok_or_else(|| Error::Domain(format!("{} has no closed-form solution", p.name)))?,
            Reference::Trajectory(r) => {
                while j < r.len() && r.times[j] < t && !same_time(r.times[j], t) {
                    j += 1;
                }
                if j == r.len() || !same_time(r.times[j], t) {
                    return Err(Error::Alignment(t));
                }
                r.states[j].clone()
            }
        };
        out.push(ErrorSample {
            t,
            solution_error: distance(y, &exact),
            energy_error: (p.energy(y) - h0).abs(),
        });
    }
    Ok(out)
}

/// Errors against the closed-form solution when there is one, otherwise
/// against RK(4,4) with a hundredth of the step.
pub fn error_series_auto(traj: &Trajectory, p: &HamiltonianProblem) -> Result<Vec<ErrorSample>> {
    if p.has_exact_solution() {
        error_series(traj, p, Reference::Exact)
    } else {
        let r = reference_trajectory(p, &traj.times, traj.h / 100.0)?;
        error_series(traj, p, Reference::Trajectory(&r))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EocRow {
    pub h: f64,
    pub solution_error: f64,
    pub solution_eoc: Option<f64>,
    pub energy_error: f64,
    pub energy_eoc: Option<f64>,
}

fn eoc(e_prev: f64, e: f64, h_prev: f64, h: f64) -> f64 {
    (e_prev / e).ln() / (h_prev / h).ln()
}

/// Final-time errors at each step size; the EOC of row `i` compares rows
/// `i − 1` and `i`. Step sizes are used as given, not scaled by the stage count.
pub fn eoc_table(t: &ButcherTableau<f64>, p: &HamiltonianProblem, h_list: &[f64], t_end: f64) -> Result<Vec<EocRow>> {
    let errors = h_list
        .par_iter()
        .map(|&h| {
            let (n, _) = step_count(h, t_end);
            let traj = integrate_system(t, p, &p.y0, h, t_end, n.max(1))?;
            let exact = match p.exact_solution(t_end) {
                Some(y) => y,
                None => reference_trajectory(p, &[t_end], h / 100.0)?.states.pop().expect("one sample"),
            };
            Ok((distance(traj.final_state(), &exact), (p.energy(traj.final_state()) - p.initial_energy()).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(errors
        .iter()
        .enumerate()
        .map(|(i, &(sol, en))| {
            let prev = i.checked_sub(1).map(|j| (h_list[j], errors[j]));
            EocRow {
                h: h_list[i],
                solution_error: sol,
                solution_eoc: prev.map(|(hp, (sp, _))| eoc(sp, sol, hp, h_list[i])),
                energy_error: en,
                energy_eoc: prev.map(|(hp, (_, ep))| eoc(ep, en, hp, h_list[i])),
            }
        })
        .collect())
}

/// `|H(y₁) − H(y₀)|` after a single step of size `h` from the initial state.
pub fn one_step_energy_error(t: &ButcherTableau<f64>, p: &HamiltonianProblem, h: f64) -> Result<f64> {
    let y1 = rk_step(t, p, &p.y0, h)?;
    Ok((p.energy(&y1) - p.initial_energy()).abs())
}

/// Least-squares slope of `ln y` against `ln x`. Nonpositive entries are skipped.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitClass {
    RightHalfPlane,
    CrossedLeft,
    CollapsedInward,
}

impl std::fmt::Display for OrbitClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OrbitClass::RightHalfPlane => "right-half-plane",
            OrbitClass::CrossedLeft => "crossed-left",
            OrbitClass::CollapsedInward => "collapsed-inward",
        })
    }
}

/// Classifies a Duffing trajectory using its final quarter as the window.
pub fn classify_orbit(traj: &Trajectory) -> OrbitClass {
    classify_orbit_with(traj, 0.25)
}

/// Crossed-left if any sample has `u1 < 0`; collapsed-inward if `max |u1|`
/// over the last `window` fraction of the time span is below 1.
pub fn classify_orbit_with(traj: &Trajectory, window: f64) -> OrbitClass {
    if traj.states.iter().any(|y| y[0] < 0.0) {
        return OrbitClass::CrossedLeft;
    }
    let start = traj.final_time() * (1.0 - window);
    let peak = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(t, _)| **t >= start)
        .map(|(_, y)| y[0].abs())
        .fold(0.0, f64::max);
    if peak < 1.0 {
        OrbitClass::CollapsedInward
    } else {
        OrbitClass::RightHalfPlane
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::registry::{pep223, registry, rk44};

    struct Linear(f64);
    impl OdeSystem for Linear {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, y: &[f64], dy: &mut [f64]) {
            dy[0] = self.0 * y[0];
        }
    }

    struct Constant;
    impl OdeSystem for Constant {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _: &[f64], dy: &mut [f64]) {
            dy[0] = 1.5;
            dy[1] = -0.25;
        }
    }

    #[test]
    fn rk44_step_is_taylor_polynomial() {
        let (lambda, h) = (-0.7, 0.3);
        let y = rk_step(&rk44().to_f64(), &Linear(lambda), &[2.0], h).unwrap();
        let z: f64 = lambda * h;
        let taylor = 1.0 + z + z * z / 2.0 + z.powi(3) / 6.0 + z.powi(4) / 24.0;
        assert!((y[0] - 2.0 * taylor).abs() < 1e-15);
    }

    #[test]
    fn constant_field_is_integrated_exactly() {
        for t in registry() {
            let traj = integrate_system(&t.to_f64(), &Constant, &[1.0, 2.0], 0.125, 10.0, 1).unwrap();
            let y = traj.final_state();
            assert!((y[0] - 16.0).abs() < 1e-12 && (y[1] + 0.5).abs() < 1e-12, "{}: {y:?}", t.name());
        }
    }

    #[test]
    fn zero_length_and_partial_steps() {
        let rk = rk44().to_f64();
        let p = oscillator();
        assert_eq!(integrate(&rk, &p, 0.05, 0.0, 1).unwrap().len(), 1);
        let traj = integrate_system(&rk, &p, &p.y0, 0.3, 1.0, 1).unwrap();
        assert!(traj.final_partial);
        assert_eq!(traj.times, vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
        let traj = integrate(&rk, &p, 0.025, 1.0, 2).unwrap();
        assert!(!traj.final_partial);
        assert_eq!(traj.len(), 6);
    }

    #[test]
    fn divergence_reports_stage() {
        struct Blowup;
        impl OdeSystem for Blowup {
            fn dim(&self) -> usize {
                1
            }
            fn rhs(&self, y: &[f64], dy: &mut [f64]) {
                dy[0] = (y[0] * 1e3).exp();
            }
        }
        let err = integrate_system(&rk44().to_f64(), &Blowup, &[0.5], 0.1, 1.0, 1).unwrap_err();
        assert!(matches!(err, Error::Divergence { stage: 0 | 1 | 2 | 3 | 4, .. }), "{err}");
    }

    #[test]
    fn self_reference_gives_zero_error() {
        let p = lotka_volterra();
        let traj = integrate(&pep223().to_f64(), &p, 0.1, 5.0, 3).unwrap();
        let e = error_series(&traj, &p, Reference::Trajectory(&traj)).unwrap();
        assert!(e.iter().all(|s| s.solution_error == 0.0));
        let short = Trajectory { times: traj.times[..2].to_vec(), states: traj.states[..2].to_vec(), ..traj.clone() };
        assert!(matches!(error_series(&traj, &p, Reference::Trajectory(&short)), Err(Error::Alignment(_))));
    }

    #[test]
    fn exact_solution_orbit_stays_right() {
        let p = oscillator();
        let traj = integrate(&rk44().to_f64(), &p, 0.01, 3.0, 1).unwrap();
        let e = error_series(&traj, &p, Reference::Exact).unwrap();
        assert!(e.last().unwrap().solution_error < 1e-6);
        let d = duffing();
        let traj = integrate(&rk44().to_f64(), &d, 0.0025, 60.0, 1).unwrap();
        assert_eq!(classify_orbit(&traj), OrbitClass::RightHalfPlane);
    }

    #[test]
    fn slope_fit() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(3)).collect();
        assert!((loglog_slope(&xs, &ys) - 3.0).abs() < 1e-12);
    }
}
