//! Groove-averaged flux coefficients.
//!
//! Across a pattern of many fine grooves the pressure is continuous, the
//! pressure gradient along the grooves is shared by groove and ridge, and the
//! mass flux across the grooves is continuous. Averaging the local Poiseuille
//! and Couette fluxes of the two strips under those conditions gives, in the
//! groove-aligned frame `(s, n)`,
//!
//! ```text
//! q_s = -A_s ∂P/∂s + u_s Hm / 2          A_s = α Hg³ + (1-α) Hr³
//! q_n = -A_n ∂P/∂n + u_n Sh / (2 Sa)      A_n = 1 / Sa
//! Sa  = α / Hg³ + (1-α) / Hr³,  Sh = α / Hg² + (1-α) / Hr²,  Hm = α Hg + (1-α) Hr
//! ```
//!
//! (Vohr & Chow, J. Basic Eng. 87, 1965). The tensor is then rotated into the
//! circumferential/axial frame `(θ, Z)`.

use super::{BearingShape, GROOVE_EDGE_WIDTH};

/// Flux tensor `A`, drag vector `b` and mean film at one axial station,
/// such that the dimensionless mass flux is `P (-A ∇P + 2Λ b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct FilmCoefficients {
    pub a_tt: f64,
    pub a_tz: f64,
    pub a_zz: f64,
    pub b_t: f64,
    pub b_z: f64,
    pub mean_film: f64,
}

impl FilmCoefficients {
    fn central_difference(plus: &Self, minus: &Self, step: f64) -> Self {
        let d = |a: f64, b: f64| (a - b) / (2.0 * step);
        Self {
            a_tt: d(plus.a_tt, minus.a_tt),
            a_tz: d(plus.a_tz, minus.a_tz),
            a_zz: d(plus.a_zz, minus.a_zz),
            b_t: d(plus.b_t, minus.b_t),
            b_z: d(plus.b_z, minus.b_z),
            mean_film: d(plus.mean_film, minus.mean_film),
        }
    }
}

/// Groove-averaged coefficients for ridge film `hr` and groove film `hg`,
/// grooves oriented at `(cos_b, sin_b)` in the `(θ, Z)` plane.
pub(crate) fn groove_averaged(alpha: f64, cos_b: f64, sin_b: f64, hr: f64, hg: f64) -> FilmCoefficients {
    let ridge = 1.0 - alpha;
    let a_s = alpha * hg.powi(3) + ridge * hr.powi(3);
    let s_a = alpha / hg.powi(3) + ridge / hr.powi(3);
    let s_h = alpha / (hg * hg) + ridge / (hr * hr);
    let mean_film = alpha * hg + ridge * hr;
    let a_n = 1.0 / s_a;
    let drag_n = s_h / s_a;

    let (c2, s2, cs) = (cos_b * cos_b, sin_b * sin_b, cos_b * sin_b);
    FilmCoefficients {
        a_tt: a_s * c2 + a_n * s2,
        a_tz: (a_s - a_n) * cs,
        a_zz: a_s * s2 + a_n * c2,
        b_t: 0.5 * (c2 * mean_film + s2 * drag_n),
        b_z: 0.5 * cs * (mean_film - drag_n),
        mean_film,
    }
}

/// Axial arrangement of the herringbone: a smooth land of length `(1-γ)L` at
/// mid-span flanked by two grooved bands whose groove angles mirror each other.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AxialLayout {
    alpha: f64,
    cos_b: f64,
    sin_b: f64,
    depth_ratio: f64,
    land_edge: f64,
    edge_width: f64,
}

impl AxialLayout {
    pub fn new(shape: &BearingShape) -> Self {
        let half = shape.half_length();
        Self {
            alpha: shape.alpha,
            cos_b: shape.beta.cos(),
            sin_b: shape.beta.sin(),
            depth_ratio: shape.depth_ratio,
            land_edge: (1.0 - shape.gamma) * half,
            edge_width: GROOVE_EDGE_WIDTH * 2.0 * half,
        }
    }

    /// Fraction of the nominal groove depth present at `z` (0 on the land, 1 in the grooves).
    pub fn groove_fraction(&self, z: f64) -> f64 {
        0.5 * (1.0 + ((z.abs() - self.land_edge) / self.edge_width).tanh())
    }

    /// Coefficients at axial station `z` for a uniform ridge film `hr`.
    ///
    /// The grooves of the `z < 0` band are mirrored, which flips the sign of
    /// the odd components `a_tz` and `b_z`; at the apex `z = 0` they vanish.
    pub fn coefficients(&self, z: f64, hr: f64) -> FilmCoefficients {
        let hg = hr + self.depth_ratio * self.groove_fraction(z);
        let mut coeffs = groove_averaged(self.alpha, self.cos_b, self.sin_b, hr, hg);
        let side = if z > 0.0 {
            1.0
        } else if z < 0.0 {
            -1.0
        } else {
            0.0
        };
        coeffs.a_tz *= side;
        coeffs.b_z *= side;
        coeffs
    }

    /// Derivative of the coefficients with respect to a uniform change of the
    /// local film, by central differences with film step `eps`.
    pub fn film_derivative(&self, z: f64, eps: f64) -> FilmCoefficients {
        let plus = self.coefficients(z, 1.0 + eps);
        let minus = self.coefficients(z, 1.0 - eps);
        FilmCoefficients::central_difference(&plus, &minus, eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_film_reduces_to_plain_reynolds() {
        for beta in [0.3_f64, 1.2, 2.44, 3.0] {
            let c = groove_averaged(0.4, beta.cos(), beta.sin(), 1.3, 1.3);
            let h3 = 1.3_f64.powi(3);
            assert!((c.a_tt - h3).abs() < 1e-12);
            assert!((c.a_zz - h3).abs() < 1e-12);
            assert!(c.a_tz.abs() < 1e-12);
            assert!((c.b_t - 0.65).abs() < 1e-12);
            assert!(c.b_z.abs() < 1e-15);
            assert!((c.mean_film - 1.3).abs() < 1e-15);
        }
    }

    #[test]
    fn inward_pumping_for_obtuse_groove_angle() {
        let shape = BearingShape { alpha: 0.5, beta: 2.44, gamma: 0.8, depth_ratio: 2.0, length_ratio: 1.0 };
        let layout = AxialLayout::new(&shape);
        // Axial drag points toward mid-span on both bands.
        assert!(layout.coefficients(0.7, 1.0).b_z < 0.0);
        assert!(layout.coefficients(-0.7, 1.0).b_z > 0.0);
        // Land at mid-span carries essentially no grooves.
        assert!(layout.groove_fraction(0.0) < 1e-2);
        assert!(layout.groove_fraction(1.0) > 1.0 - 1e-6);
    }

    #[test]
    fn tensor_is_positive_definite() {
        let c = groove_averaged(0.3, 2.6_f64.cos(), 2.6_f64.sin(), 1.0, 4.0);
        assert!(c.a_tt > 0.0 && c.a_zz > 0.0);
        assert!(c.a_tt * c.a_zz - c.a_tz * c.a_tz > 0.0);
    }
}
