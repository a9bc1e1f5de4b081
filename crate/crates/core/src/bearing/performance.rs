//! Viscous loss and a static load-capacity indicator.

use std::f64::consts::PI;

use super::{BearingCoefficients, HgjbGeometry};

/// Allowable static eccentricity as a fraction of the clearance.
pub const ALLOWABLE_ECCENTRICITY: f64 = 0.25;

/// Couette shear loss of one concentric bearing, W.
///
/// Grooved bands see the groove-averaged inverse film; the land sees `1/h_r`.
pub fn power_loss(geom: &HgjbGeometry, mu: f64, omega: f64) -> f64 {
    let r = geom.radius();
    let l = geom.length;
    let inverse_film = (1.0 - geom.gamma) * l / geom.h_r
        + geom.gamma * l * (geom.alpha / (geom.h_r + geom.h_g) + (1.0 - geom.alpha) / geom.h_r);
    mu * omega * omega * r.powi(3) * 2.0 * PI * inverse_film
}

/// Load-capacity proxy, N: `0.25 h_r k_min`, with `k_min` the smaller singular
/// value of the dimensional stiffness at synchronous excitation.
pub fn load_capacity_proxy(coeffs: &BearingCoefficients, geom: &HgjbGeometry, p_a: f64) -> f64 {
    let k_scale = p_a * geom.radius() * geom.length / geom.h_r;
    let k = coeffs.k;
    let frob = k.iter().flatten().map(|v| v * v).sum::<f64>();
    let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
    let disc = (frob * frob - 4.0 * det * det).max(0.0).sqrt();
    let sigma_min = (0.5 * (frob - disc)).max(0.0).sqrt();
    ALLOWABLE_ECCENTRICITY * geom.h_r * sigma_min * k_scale
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain() -> HgjbGeometry {
        HgjbGeometry { alpha: 0.5, beta: 2.44, gamma: 0.8, h_g: 0.0, h_r: 1e-5, length: 0.015, diameter: 0.01 }
    }

    #[test]
    fn plain_couette_limit() {
        let g = plain();
        let p = power_loss(&g, 1.8e-5, 20944.0);
        let couette = 2.0 * PI * 1.8e-5 * 20944.0_f64.powi(2) * 5e-3_f64.powi(3) * 0.015 / 1e-5;
        assert!((p - couette).abs() / couette < 1e-14);
        assert!((p - 9.30).abs() < 0.01, "{p}");
        assert_eq!(power_loss(&g, 1.8e-5, 0.0), 0.0);
    }

    #[test]
    fn grooves_reduce_loss() {
        let grooved = HgjbGeometry { h_g: 2e-5, ..plain() };
        assert!(power_loss(&grooved, 1.8e-5, 1000.0) < power_loss(&plain(), 1.8e-5, 1000.0));
    }

    #[test]
    fn load_capacity_scaling() {
        let g = plain();
        let zero = BearingCoefficients { k: [[0.0; 2]; 2], c: [[0.0; 2]; 2], lambda: 1.0, nu: 1.0 };
        assert_eq!(load_capacity_proxy(&zero, &g, 1e5), 0.0);
        let k = BearingCoefficients { k: [[3.0, 4.0], [-4.0, 3.0]], ..zero };
        let w = load_capacity_proxy(&k, &g, 1e5);
        // Isotropic K: both singular values equal sqrt(3² + 4²) = 5.
        let expected = 0.25 * 1e-5 * 5.0 * 1e5 * 5e-3 * 0.015 / 1e-5;
        assert!((w - expected).abs() / expected < 1e-12);
        assert!((load_capacity_proxy(&k, &g, 2e5) - 2.0 * w).abs() < 1e-12 * w);
        let diag = BearingCoefficients { k: [[2.0, 0.0], [0.0, 7.0]], ..zero };
        let expected = 0.25 * 1e-5 * 2.0 * 1e5 * 5e-3 * 0.015 / 1e-5;
        assert!((load_capacity_proxy(&diag, &g, 1e5) - expected).abs() < 1e-12);
    }
}
