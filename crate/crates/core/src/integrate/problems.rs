//! Hamiltonian test problems.

use std::f64::consts::E;

use crate::error::{Error, Result};

use super::OdeSystem;

/// Right-hand side, monitored energy and initial data of a test problem.
#[derive(Clone, Debug)]
pub struct HamiltonianProblem {
    pub name: &'static str,
    pub dim: usize,
    rhs: fn(&[f64], &mut [f64]),
    energy: fn(&[f64]) -> f64,
    pub y0: Vec<f64>,
    exact: Option<fn(f64) -> Vec<f64>>,
    pub period: Option<f64>,
}

impl HamiltonianProblem {
    pub fn energy(&self, y: &[f64]) -> f64 {
        (self.energy)(y)
    }

    pub fn initial_energy(&self) -> f64 {
        self.energy(&self.y0)
    }

    pub fn exact_solution(&self, t: f64) -> Option<Vec<f64>> {
        self.exact.map(|f| f(t))
    }

    pub fn has_exact_solution(&self) -> bool {
        self.exact.is_some()
    }
}

impl OdeSystem for HamiltonianProblem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        (self.rhs)(y, dy)
    }
}

fn exp_rhs(y: &[f64], dy: &mut [f64]) {
    dy[0] = -y[1].exp();
    dy[1] = y[0].exp();
}

fn exp_energy(y: &[f64]) -> f64 {
    y[0].exp() + y[1].exp()
}

/// Closed form for `y0 = (1, 1/2)`: with `H = e + e^{1/2}` and
/// `w = e^{1/2 − H t}`, `u2 = ln H − ln(1 + w)` and `u1 = u2 + 1/2 − H t`.
fn exp_exact(t: f64) -> Vec<f64> {
    let h = E + 0.5f64.exp();
    let u2 = h.ln() - (0.5 - h * t).exp().ln_1p();
    vec![u2 + 0.5 - h * t, u2]
}

/// `u' = (−e^{u2}, e^{u1})`, `y0 = (1, 1/2)`, `H = e^{u1} + e^{u2}`.
pub fn exponential() -> HamiltonianProblem {
    HamiltonianProblem {
        name: "exponential",
        dim: 2,
        rhs: exp_rhs,
        energy: exp_energy,
        y0: vec![1.0, 0.5],
        exact: Some(exp_exact),
        period: None,
    }
}

fn osc_rhs(y: &[f64], dy: &mut [f64]) {
    let r2 = y[0] * y[0] + y[1] * y[1];
    dy[0] = -y[1] / r2;
    dy[1] = y[0] / r2;
}

fn osc_energy(y: &[f64]) -> f64 {
    y[0] * y[0] + y[1] * y[1]
}

fn osc_exact(t: f64) -> Vec<f64> {
    vec![t.cos(), t.sin()]
}

/// `u' = ‖u‖⁻² (−u2, u1)`, `y0 = (1, 0)`, `H = ‖u‖²`; solution `(cos t, sin t)`.
pub fn oscillator() -> HamiltonianProblem {
    HamiltonianProblem {
        name: "oscillator",
        dim: 2,
        rhs: osc_rhs,
        energy: osc_energy,
        y0: vec![1.0, 0.0],
        exact: Some(osc_exact),
        period: Some(std::f64::consts::TAU),
    }
}

fn lv_rhs(y: &[f64], dy: &mut [f64]) {
    dy[0] = y[0] * (1.0 - y[1]);
    dy[1] = y[1] * (y[0] - 1.0);
}

fn lv_energy(y: &[f64]) -> f64 {
    y[0] + y[1] - y[0].ln() - y[1].ln()
}

/// `u' = (u1 (1 − u2), u2 (u1 − 1))`, `y0 = (1, 2)`,
/// invariant `u1 + u2 − ln u1 − ln u2`.
pub fn lotka_volterra() -> HamiltonianProblem {
    HamiltonianProblem {
        name: "lotka-volterra",
        dim: 2,
        rhs: lv_rhs,
        energy: lv_energy,
        y0: vec![1.0, 2.0],
        exact: None,
        period: None,
    }
}

fn duffing_rhs(y: &[f64], dy: &mut [f64]) {
    dy[0] = y[1];
    dy[1] = y[0] - y[0] * y[0] * y[0];
}

fn duffing_energy(y: &[f64]) -> f64 {
    0.5 * y[1] * y[1] - 0.5 * y[0] * y[0] + 0.25 * y[0].powi(4)
}

/// `u1'' = u1 − u1³` as a first-order system, `y0 = (1.4142, 0)`.
pub fn duffing() -> HamiltonianProblem {
    HamiltonianProblem {
        name: "duffing",
        dim: 2,
        rhs: duffing_rhs,
        energy: duffing_energy,
        y0: vec![1.4142, 0.0],
        exact: None,
        period: None,
    }
}

pub fn problem_suite() -> Vec<HamiltonianProblem> {
    vec![exponential(), oscillator(), lotka_volterra(), duffing()]
}

/// Looks a problem up by name; a few short aliases are accepted.
pub fn problem(name: &str) -> Result<HamiltonianProblem> {
    match name.trim().to_ascii_lowercase().as_str() {
        "exponential" | "exp" => Ok(exponential()),
        "oscillator" | "nonlinear-oscillator" | "osc" => Ok(oscillator()),
        "lotka-volterra" | "lotkavolterra" | "lv" => Ok(lotka_volterra()),
        "duffing" => Ok(duffing()),
        _ => Err(Error::UnknownProblem(name.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_energies() {
        assert!((exponential().initial_energy() - (E + 0.5f64.exp())).abs() < 1e-15);
        assert_eq!(oscillator().initial_energy(), 1.0);
        let d = duffing().initial_energy();
        let u = 1.4142f64;
        assert!((d - (-0.5 * u * u + 0.25 * u.powi(4))).abs() < 1e-18);
        assert!(d < 0.0 && d > -5e-5, "{d}");
        assert!((lotka_volterra().initial_energy() - (3.0 - 2f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn exponential_closed_form_solves_the_system() {
        let p = exponential();
        let y0 = p.exact_solution(0.0).unwrap();
        assert!((y0[0] - 1.0).abs() < 1e-15 && (y0[1] - 0.5).abs() < 1e-15);
        for &t in &[0.3, 2.0, 40.0, 160.0] {
            let y = p.exact_solution(t).unwrap();
            let d = 1e-6;
            let (yp, ym) = (p.exact_solution(t + d).unwrap(), p.exact_solution(t - d).unwrap());
            let mut f = vec![0.0; 2];
            p.rhs(&y, &mut f);
            for i in 0..2 {
                let fd = (yp[i] - ym[i]) / (2.0 * d);
                assert!((fd - f[i]).abs() < 1e-6 * f[i].abs().max(1.0), "t={t} i={i}");
            }
            assert!((p.energy(&y) - p.initial_energy()).abs() < 1e-10 * p.initial_energy());
        }
    }

    #[test]
    fn oscillator_is_periodic() {
        let p = oscillator();
        let y = p.exact_solution(p.period.unwrap()).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-15 && y[1].abs() < 1e-14);
    }

    #[test]
    fn lookup() {
        assert_eq!(problem("LV").unwrap().name, "lotka-volterra");
        assert!(problem("pendulum").is_err());
    }
}
