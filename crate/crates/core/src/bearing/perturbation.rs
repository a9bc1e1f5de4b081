//! Dynamic stiffness and damping from a first-order whirl perturbation.
//!
//! The journal is displaced harmonically, `H = 1 - ε (x cos θ + y sin θ) e^{iντ}`
//! with `τ = Ωt`, and the pressure is expanded as `P = P₀(Z) + ε p₁`. Because
//! the concentric film is axisymmetric, `p₁ = (p_c(Z) cos θ + p_s(Z) sin θ) e^{iντ}`
//! and the linearised equation becomes a 2-component complex boundary-value
//! problem in `Z`, block-tridiagonal after discretisation. Film-sensitivity
//! terms are obtained by differencing the film coefficients with amplitude `ε`.
//!
//! The impedance `Z = K + iνC` follows from integrating `p_c`, `p_s` over the
//! bearing surface.

use nalgebra::Matrix2;
use num_complex::Complex64;

use super::film::{AxialLayout, FilmCoefficients};
use super::steady::{check_grid, solve_zeroth_order, PressureProfile};
use super::{BearingCoefficients, BearingError, BearingShape};

/// Default film perturbation amplitude, as a fraction of `h_r`.
pub const DEFAULT_PERTURBATION: f64 = 1e-3;

type Block = Matrix2<Complex64>;

fn real_block(a: f64, b: f64, c: f64, d: f64) -> Block {
    Block::new(Complex64::new(a, 0.0), Complex64::new(b, 0.0), Complex64::new(c, 0.0), Complex64::new(d, 0.0))
}

/// `∂/∂θ` acting on `(cos, sin)` amplitudes.
fn rotation() -> Block {
    real_block(0.0, 1.0, -1.0, 0.0)
}

fn identity() -> Block {
    Block::identity()
}

/// Perturbation operator for one bearing and compressibility number; the
/// frequency-independent part is assembled once and reused for every `ν`.
#[derive(Debug, Clone)]
pub struct DynamicSolver {
    lambda: f64,
    eps: f64,
    lower: Vec<Block>,
    diag_static: Vec<Block>,
    upper: Vec<Block>,
    rhs_static: Vec<Block>,
    /// `H̄₀` and `P₀` at interior nodes, multiplying the squeeze terms.
    mean_film: Vec<f64>,
    pressure: Vec<f64>,
    /// `π h R / L`, converting the summed amplitudes to impedance.
    force_scale: f64,
    profile: PressureProfile,
}

impl DynamicSolver {
    pub fn new(shape: &BearingShape, lambda: f64, eps: f64, grid_n: usize) -> Result<Self, BearingError> {
        check_grid(grid_n)?;
        let profile = solve_zeroth_order(shape, lambda, grid_n)?;
        Self::with_profile(shape, profile, lambda, eps)
    }

    /// Build on an already solved steady profile.
    pub fn with_profile(shape: &BearingShape, profile: PressureProfile, lambda: f64, eps: f64) -> Result<Self, BearingError> {
        if !(eps > 0.0 && eps <= 0.05) {
            return Err(BearingError::InvalidParameter { field: "eps", reason: format!("must lie in (0, 0.05], got {eps}") });
        }
        let layout = AxialLayout::new(shape);
        let z = &profile.z;
        let p = &profile.p;
        let n = z.len();
        let h = profile.step();
        let j = rotation();
        let two_lambda = 2.0 * lambda;

        // Half-node flux pieces: F_{i+1/2} = α (x_i + x_{i+1}) + κ (x_{i+1} - x_i) + φ ΔH.
        struct HalfNode {
            alpha: Block,
            kappa: f64,
            phi: f64,
        }
        let half: Vec<HalfNode> = (0..n - 1)
            .map(|i| {
                let zm = 0.5 * (z[i] + z[i + 1]);
                let c = layout.coefficients(zm, 1.0);
                let dc = layout.film_derivative(zm, eps);
                let pm = 0.5 * (p[i] + p[i + 1]);
                let dp = (p[i + 1] - p[i]) / h;
                let alpha = identity() * Complex64::new(0.5 * (dp * c.a_zz - two_lambda * c.b_z), 0.0)
                    + j * Complex64::new(0.5 * pm * c.a_tz, 0.0);
                HalfNode { alpha, kappa: pm * c.a_zz / h, phi: pm * dc.a_zz * dp - two_lambda * pm * dc.b_z }
            })
            .collect();

        let interior = n - 2;
        let mut lower = Vec::with_capacity(interior);
        let mut diag_static = Vec::with_capacity(interior);
        let mut upper = Vec::with_capacity(interior);
        let mut rhs_static = Vec::with_capacity(interior);
        let mut mean_film = Vec::with_capacity(interior);
        let mut pressure = Vec::with_capacity(interior);
        let inv_h = Complex64::new(1.0 / h, 0.0);

        for node in 1..n - 1 {
            let c: FilmCoefficients = layout.coefficients(z[node], 1.0);
            let dc = layout.film_derivative(z[node], eps);
            let p0 = p[node];
            let dp0 = (p[node + 1] - p[node - 1]) / (2.0 * h);
            let left = &half[node - 1];
            let right = &half[node];
            let cross = j * Complex64::new(p0 * c.a_tz / (2.0 * h), 0.0);

            let kl = identity() * Complex64::new(left.kappa, 0.0);
            let kr = identity() * Complex64::new(right.kappa, 0.0);
            lower.push(-cross + (kl - left.alpha) * inv_h);
            upper.push(cross + (right.alpha + kr) * inv_h);
            diag_static.push(
                j * Complex64::new(dp0 * c.a_tz - two_lambda * c.b_t, 0.0)
                    - identity() * Complex64::new(p0 * c.a_tt, 0.0)
                    + (right.alpha - kr - left.alpha - kl) * inv_h,
            );
            // Forcing for the two unit displacements ΔH = -cos θ (x) and -sin θ (y), as columns.
            let g = p0 * dc.a_tz * dp0 - two_lambda * p0 * dc.b_t;
            rhs_static.push(j * Complex64::new(g, 0.0) + identity() * Complex64::new((right.phi - left.phi) / h, 0.0));
            mean_film.push(c.mean_film);
            pressure.push(p0);
        }

        Ok(Self {
            lambda,
            eps,
            lower,
            diag_static,
            upper,
            rhs_static,
            mean_film,
            pressure,
            force_scale: std::f64::consts::PI * h / (2.0 * shape.length_ratio),
            profile,
        })
    }

    pub fn profile(&self) -> &PressureProfile {
        &self.profile
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Complex impedance `Z = K + iνC`, `Z[i][j]` the force in `i` per displacement in `j`.
    pub fn impedance(&self, nu: f64) -> Result<[[Complex64; 2]; 2], BearingError> {
        let squeeze = Complex64::new(0.0, 2.0 * self.lambda * nu);
        let n = self.diag_static.len();
        let mut c_prime: Vec<Block> = Vec::with_capacity(n);
        let mut d_prime: Vec<Block> = Vec::with_capacity(n);
        for i in 0..n {
            let diag = self.diag_static[i] - identity() * (squeeze * self.mean_film[i]);
            let rhs = self.rhs_static[i] - identity() * (squeeze * self.pressure[i]);
            let (m, r) = if i == 0 {
                (diag, rhs)
            } else {
                (diag - self.lower[i] * c_prime[i - 1], rhs - self.lower[i] * d_prime[i - 1])
            };
            let scale = m.iter().map(|v| v.norm_sqr()).sum::<f64>();
            let pivot_ratio = m.determinant().norm() / scale.max(f64::MIN_POSITIVE);
            let inv = match m.try_inverse() {
                Some(inv) if pivot_ratio > 1e-14 => inv,
                _ => return Err(BearingError::Singular { node: i + 1, pivot_ratio }),
            };
            c_prime.push(inv * self.upper[i]);
            d_prime.push(inv * r);
        }
        let mut x = d_prime[n - 1];
        let mut sum = x;
        for i in (0..n - 1).rev() {
            x = d_prime[i] - c_prime[i] * x;
            sum += x;
        }
        let s = Complex64::new(self.force_scale, 0.0);
        Ok([[sum[(0, 0)] * s, sum[(0, 1)] * s], [sum[(1, 0)] * s, sum[(1, 1)] * s]])
    }

    pub fn coefficients(&self, nu: f64) -> Result<BearingCoefficients, BearingError> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(BearingError::InvalidParameter { field: "nu", reason: format!("must be positive, got {nu}") });
        }
        let z = self.impedance(nu)?;
        let k = [[z[0][0].re, z[0][1].re], [z[1][0].re, z[1][1].re]];
        let c = [[z[0][0].im / nu, z[0][1].im / nu], [z[1][0].im / nu, z[1][1].im / nu]];
        Ok(BearingCoefficients { k, c, lambda: self.lambda, nu })
    }
}

/// Dimensionless stiffness and damping at `(Λ, ν)` with film perturbation amplitude `eps`.
pub fn dynamic_coefficients(
    shape: &BearingShape,
    lambda: f64,
    nu: f64,
    eps: f64,
    grid_n: usize,
) -> Result<BearingCoefficients, BearingError> {
    DynamicSolver::new(shape, lambda, eps, grid_n)?.coefficients(nu)
}
