//! Fourier pseudospectral semidiscretization of the BBM equation
//! `u_t + u_x + u u_x − u_txx = 0` on a periodic domain.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{integrate_system, OdeSystem, Trajectory};
use crate::methods::ButcherTableau;

pub const DEFAULT_LENGTH: f64 = 180.0;
pub const DEFAULT_SPEED: f64 = 1.2;
pub const DEFAULT_N: usize = 128;

/// Nodal values of the wave amplitude.
pub type BbmState = Vec<f64>;

/// Periodic grid on `[−L/2, L/2)` together with its transform plans and
/// the diagonal symbol of `(I − ∂xx)⁻¹ ∂x`.
#[derive(Clone)]
pub struct BbmGrid {
    n: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    symbol: Vec<Complex<f64>>,
}

impl fmt::Debug for BbmGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BbmGrid").field("n", &self.n).field("length", &self.length).finish()
    }
}

impl BbmGrid {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_length(n, DEFAULT_LENGTH)
    }

    pub fn with_length(n: usize, length: f64) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::Domain(format!("grid size must be even and at least 2, got {n}")));
        }
        if !(length > 0.0) {
            return Err(Error::Domain(format!("domain length must be positive, got {length}")));
        }
        let mut planner = FftPlanner::new();
        let symbol = (0..n)
            .map(|j| {
                if j == n / 2 {
                    return Complex::new(0.0, 0.0);
                }
                let k = wavenumber(j, n, length);
                Complex::new(0.0, k / (1.0 + k * k))
            })
            .collect();
        Ok(Self {
            n,
            length,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            symbol,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| -self.length / 2.0 + j as f64 * self.dx()).collect()
    }

    /// Signed wavenumbers in transform order; the Nyquist entry is `+π/Δx`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|j| wavenumber(j, self.n, self.length)).collect()
    }

    fn apply_symbol(&self, values: &mut [Complex<f64>], symbol: impl Fn(usize) -> Complex<f64>) {
        self.forward.process(values);
        let scale = 1.0 / self.n as f64;
        for (j, v) in values.iter_mut().enumerate() {
            *v *= symbol(j) * scale;
        }
        self.inverse.process(values);
    }

    /// Spectral first derivative (Nyquist mode dropped).
    pub fn derivative(&self, u: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = u.iter().map(|&x| Complex::new(x, 0.0)).collect();
        let n = self.n;
        self.apply_symbol(&mut buf, |j| {
            if j == n / 2 {
                Complex::new(0.0, 0.0)
            } else {
                Complex::new(0.0, wavenumber(j, n, self.length))
            }
        });
        buf.iter().map(|c| c.re).collect()
    }
}

fn wavenumber(j: usize, n: usize, length: f64) -> f64 {
    let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
    2.0 * std::f64::consts::PI / length * m
}

/// `u_t = −(I − ∂xx)⁻¹ ∂x (u + u²/2)`.
pub fn bbm_rhs(grid: &BbmGrid, u: &[f64], du: &mut [f64]) {
    let mut buf: Vec<Complex<f64>> = u.iter().map(|&x| Complex::new(x + 0.5 * x * x, 0.0)).collect();
    grid.apply_symbol(&mut buf, |j| -grid.symbol[j]);
    for (d, c) in du.iter_mut().zip(&buf) {
        *d = c.re;
    }
}

impl OdeSystem for BbmGrid {
    fn dim(&self) -> usize {
        self.n
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        bbm_rhs(self, y, dy)
    }
}

/// `A sech²(K(x − ct))` with `A = 3(c − 1)` and `K = ½√(1 − 1/c)`, shifted
/// periodically into the domain.
pub fn solitary_wave_with(grid: &BbmGrid, t: f64, c: f64) -> BbmState {
    let a = 3.0 * (c - 1.0);
    let k = 0.5 * (1.0 - 1.0 / c).sqrt();
    let half = grid.length / 2.0;
    grid.nodes()
        .into_iter()
        .map(|x| {
            let xi = (x - c * t + half).rem_euclid(grid.length) - half;
            a / (k * xi).cosh().powi(2)
        })
        .collect()
}

pub fn solitary_wave(grid: &BbmGrid, t: f64) -> BbmState {
    solitary_wave_with(grid, t, DEFAULT_SPEED)
}

/// Discrete mass `Δx Σ u` and Hamiltonian `Δx Σ (u²/2 + u³/6)`.
pub fn discrete_invariants(grid: &BbmGrid, u: &[f64]) -> (f64, f64) {
    let dx = grid.dx();
    let mass = dx * u.iter().sum::<f64>();
    let energy = dx * u.iter().map(|&x| 0.5 * x * x + x * x * x / 6.0).sum::<f64>();
    (mass, energy)
}

/// `√Δx ‖u(t) − exact(t)‖` at every sample of a solitary-wave run.
pub fn bbm_error(grid: &BbmGrid, traj: &Trajectory) -> Vec<(f64, f64)> {
    bbm_error_with(grid, traj, DEFAULT_SPEED)
}

pub fn bbm_error_with(grid: &BbmGrid, traj: &Trajectory, c: f64) -> Vec<(f64, f64)> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, u)| {
            let exact = solitary_wave_with(grid, t, c);
            let sq: f64 = u.iter().zip(&exact).map(|(a, b)| (a - b) * (a - b)).sum();
            (t, (grid.dx() * sq).sqrt())
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BbmSample {
    pub t: f64,
    pub error: f64,
    /// Relative to the initial value.
    pub mass_drift: f64,
    pub energy_drift: f64,
}

/// Integrates the solitary wave with `h = s·h0` and reports error and
/// invariant drift at the sampled times.
pub fn solitary_wave_run(
    t: &ButcherTableau<f64>,
    grid: &BbmGrid,
    h0: f64,
    t_end: f64,
    sample_every: usize,
) -> Result<Vec<BbmSample>> {
    let u0 = solitary_wave(grid, 0.0);
    let traj = integrate_system(t, grid, &u0, t.stages() as f64 * h0, t_end, sample_every)?;
    let (m0, e0) = discrete_invariants(grid, &u0);
    Ok(bbm_error(grid, &traj)
        .into_iter()
        .zip(&traj.states)
        .map(|((t, error), u)| {
            let (m, e) = discrete_invariants(grid, u);
            BbmSample { t, error, mass_drift: (m - m0) / m0.abs(), energy_drift: (e - e0) / e0.abs() }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn crest_residual(n: usize) -> f64 {
        let grid = BbmGrid::new(n).unwrap();
        let u = solitary_wave(&grid, 0.0);
        let mut du = vec![0.0; n];
        bbm_rhs(&grid, &u, &mut du);
        let (a, k) = (0.6, 0.5 * (1.0f64 / 6.0).sqrt());
        let exact: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&x| {
                let s = 1.0 / (k * x).cosh();
                DEFAULT_SPEED * 2.0 * a * k * s * s * (k * x).tanh()
            })
            .collect();
        let err = du.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        err / exact.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    #[test]
    fn crest_and_shape() {
        let grid = BbmGrid::new(256).unwrap();
        let u = solitary_wave(&grid, 0.0);
        assert_eq!(grid.nodes()[128], 0.0);
        assert!((u[128] - 0.6).abs() < 1e-15);
        assert!(u.iter().all(|&x| x > 0.0 && x <= u[128]));
    }

    #[test]
    fn traveling_wave_residual_is_spectral() {
        let (coarse, fine) = (crest_residual(128), crest_residual(256));
        assert!(fine < 1e-8, "{fine:e}");
        assert!(coarse / fine >= 1e4 || fine < 1e-13, "{coarse:e} {fine:e}");
    }

    #[test]
    fn constants_are_stationary() {
        let grid = BbmGrid::new(64).unwrap();
        let mut du = vec![1.0; 64];
        bbm_rhs(&grid, &vec![0.7; 64], &mut du);
        assert!(du.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn linear_dispersion() {
        let grid = BbmGrid::new(64).unwrap();
        let k1 = 2.0 * std::f64::consts::PI / grid.length() * 3.0;
        let eps = 1e-7;
        let x = grid.nodes();
        let u: Vec<f64> = x.iter().map(|x| eps * (k1 * x).cos()).collect();
        let mut du = vec![0.0; 64];
        bbm_rhs(&grid, &u, &mut du);
        for (d, x) in du.iter().zip(&x) {
            let expected = k1 / (1.0 + k1 * k1) * eps * (k1 * x).sin();
            assert!((d - expected).abs() < 1e-13, "{d} {expected}");
        }
    }

    #[test]
    fn translation_equivariance() {
        let grid = BbmGrid::new(64).unwrap();
        let u = solitary_wave(&grid, 3.3);
        let mut shifted = u.clone();
        shifted.rotate_right(1);
        let (mut a, mut b) = (vec![0.0; 64], vec![0.0; 64]);
        bbm_rhs(&grid, &u, &mut a);
        bbm_rhs(&grid, &shifted, &mut b);
        a.rotate_right(1);
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-15));
    }

    #[test]
    fn grid_aligned_translation() {
        let grid = BbmGrid::new(128).unwrap();
        let dt = grid.dx() * 5.0 / DEFAULT_SPEED;
        let mut u0 = solitary_wave(&grid, 0.0);
        u0.rotate_right(5);
        let u = solitary_wave(&grid, dt);
        assert!(u.iter().zip(&u0).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn invariants_of_constants() {
        let grid = BbmGrid::new(32).unwrap();
        assert_eq!(discrete_invariants(&grid, &[0.0; 32]), (0.0, 0.0));
        let (m, e) = discrete_invariants(&grid, &[1.0; 32]);
        assert!((m - 180.0).abs() < 1e-12 && (e - 120.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_of_mode() {
        let grid = BbmGrid::new(32).unwrap();
        let k = 2.0 * std::f64::consts::PI / grid.length() * 2.0;
        let u: Vec<f64> = grid.nodes().iter().map(|x| (k * x).sin()).collect();
        let du = grid.derivative(&u);
        for (d, x) in du.iter().zip(grid.nodes()) {
            assert!((d - k * (k * x).cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_odd_grids() {
        assert!(BbmGrid::new(31).is_err());
    }
}
