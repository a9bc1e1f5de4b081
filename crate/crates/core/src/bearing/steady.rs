//! Steady pressure of the concentric bearing.
//!
//! With no circumferential variation the groove-averaged equation reduces to
//! `d/dZ [ P (a_zz dP/dZ - 2Λ b_z) ] = 0` with `P = 1` at both bearing ends.
//! The flux form is discretised on a uniform grid with coefficients sampled at
//! cell midpoints and solved by damped Newton iteration.

use super::film::AxialLayout;
use super::{BearingError, BearingShape};

pub const NEWTON_TOLERANCE: f64 = 1e-10;
pub const NEWTON_MAX_ITERATIONS: usize = 50;
const MAX_STEP_HALVINGS: usize = 30;

/// Axial steady pressure `P₀(Z)` on a uniform grid over `[-L/D, L/D]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureProfile {
    pub z: Vec<f64>,
    pub p: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl PressureProfile {
    pub fn step(&self) -> f64 {
        self.z[1] - self.z[0]
    }

    pub fn max_pressure(&self) -> f64 {
        self.p.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn check_grid(grid_n: usize) -> Result<(), BearingError> {
    if grid_n < 11 || grid_n.is_multiple_of(2) {
        return Err(BearingError::InvalidGrid(format!("grid_n must be odd and >= 11, got {grid_n}")));
    }
    Ok(())
}

pub(crate) fn axial_grid(half_length: f64, grid_n: usize) -> Vec<f64> {
    let intervals = (grid_n - 1) as f64;
    (0..grid_n)
        .map(|i| half_length * (2.0 * i as f64 - intervals) / intervals)
        .collect()
}

/// Midpoint coefficients `(a_zz, b_z)` of each cell.
fn cell_coefficients(layout: &AxialLayout, z: &[f64]) -> Vec<(f64, f64)> {
    z.windows(2)
        .map(|w| {
            let c = layout.coefficients(0.5 * (w[0] + w[1]), 1.0);
            (c.a_zz, c.b_z)
        })
        .collect()
}

/// Cell fluxes and their partial derivatives with respect to the left and right node pressures.
fn fluxes(p: &[f64], cells: &[(f64, f64)], h: f64, lambda: f64) -> Vec<(f64, f64, f64)> {
    cells
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let (pl, pr) = (p[i], p[i + 1]);
            let mean = 0.5 * (pl + pr);
            let drive = a * (pr - pl) / h - 2.0 * lambda * b;
            let flux = mean * drive;
            let d_left = 0.5 * drive - mean * a / h;
            let d_right = 0.5 * drive + mean * a / h;
            (flux, d_left, d_right)
        })
        .collect()
}

fn residual_norm(f: &[(f64, f64, f64)]) -> f64 {
    f.windows(2).map(|w| (w[1].0 - w[0].0).abs()).fold(0.0, f64::max)
}

/// Solve the steady concentric pressure for compressibility number `lambda`.
pub fn solve_zeroth_order(shape: &BearingShape, lambda: f64, grid_n: usize) -> Result<PressureProfile, BearingError> {
    shape.validate()?;
    check_grid(grid_n)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(BearingError::InvalidParameter { field: "Lambda", reason: format!("must be >= 0, got {lambda}") });
    }
    let layout = AxialLayout::new(shape);
    let z = axial_grid(shape.half_length(), grid_n);
    let h = z[1] - z[0];
    let cells = cell_coefficients(&layout, &z);

    let mut p = vec![1.0; grid_n];
    let mut f = fluxes(&p, &cells, h, lambda);
    let mut residual = residual_norm(&f);
    let mut iterations = 0;
    let interior = grid_n - 2;

    while residual > NEWTON_TOLERANCE {
        if iterations == NEWTON_MAX_ITERATIONS {
            return Err(BearingError::Nonconvergence { iterations, residual });
        }
        iterations += 1;

        // Tridiagonal Jacobian of R_i = F_{i+1/2} - F_{i-1/2} at interior node i.
        let mut lower = vec![0.0; interior];
        let mut diag = vec![0.0; interior];
        let mut upper = vec![0.0; interior];
        let mut rhs = vec![0.0; interior];
        for k in 0..interior {
            let node = k + 1;
            let (f_right, dl_right, dr_right) = f[node];
            let (f_left, dl_left, dr_left) = f[node - 1];
            lower[k] = -dl_left;
            diag[k] = dl_right - dr_left;
            upper[k] = dr_right;
            rhs[k] = -(f_right - f_left);
        }
        let delta = solve_tridiagonal(&lower, &diag, &upper, &rhs)
            .ok_or(BearingError::Nonconvergence { iterations, residual })?;

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_STEP_HALVINGS {
            let trial: Vec<f64> = p
                .iter()
                .enumerate()
                .map(|(i, &pi)| if i == 0 || i == grid_n - 1 { pi } else { pi + step * delta[i - 1] })
                .collect();
            if trial.iter().all(|&v| v > 0.0) {
                let trial_f = fluxes(&trial, &cells, h, lambda);
                let trial_residual = residual_norm(&trial_f);
                if trial_residual < residual || trial_residual <= NEWTON_TOLERANCE {
                    p = trial;
                    f = trial_f;
                    residual = trial_residual;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(BearingError::Nonconvergence { iterations, residual });
        }
    }

    Ok(PressureProfile { z, p, iterations, residual })
}

/// Thomas algorithm; `None` on a vanishing pivot.
pub(crate) fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot.abs() < f64::MIN_POSITIVE {
        return None;
    }
    c[0] = upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot.abs() < f64::MIN_POSITIVE || !pivot.is_finite() {
            return None;
        }
        c[i] = upper[i] / pivot;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Some(x)
}
