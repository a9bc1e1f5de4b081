//! Rigid-body mass properties.
//!
//! Element contributions are accumulated with a correctly rounded sum about
//! the rotor's axial centre, so the result does not depend on element order.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::Rotor;
use crate::numeric::exact_sum;

/// Journal midplanes relative to the centre of gravity, m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BearingOffsets {
    pub z1: f64,
    pub z2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassProperties {
    /// kg.
    pub mass: f64,
    /// Axial CG position from the left face, m.
    pub z_cg: f64,
    /// kg·m².
    pub i_polar: f64,
    /// About the CG, kg·m².
    pub i_transverse: f64,
    /// `None` until both journals are assigned.
    pub bearing_offsets: Option<BearingOffsets>,
}

struct Slice {
    mass: f64,
    /// Midplane relative to the rotor's axial centre.
    centre: f64,
    i_polar: f64,
    /// About the slice's own midplane.
    i_transverse: f64,
}

fn slices(rotor: &Rotor) -> Vec<Slice> {
    let elements = rotor.elements();
    elements
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let left = exact_sum(elements[..i].iter().map(|e| e.length));
            let right = exact_sum(elements[i + 1..].iter().rev().map(|e| e.length));
            let centre = 0.5 * (left - right);
            let (mut mass, mut i_polar, mut radial) = (Vec::new(), Vec::new(), Vec::new());
            for layer in &e.layers {
                let (d2, big2) = (layer.d_inner * layer.d_inner, layer.d_outer * layer.d_outer);
                let m = layer.density * 0.25 * PI * (big2 - d2) * e.length;
                mass.push(m);
                i_polar.push(m * (big2 + d2) / 8.0);
                radial.push(m * (big2 + d2) / 16.0);
            }
            let mass = exact_sum(mass);
            let i_transverse = exact_sum(radial) + mass * e.length * e.length / 12.0;
            Slice { mass, centre, i_polar: exact_sum(i_polar), i_transverse }
        })
        .collect()
}

pub fn mass_properties(rotor: &Rotor) -> MassProperties {
    let parts = slices(rotor);
    let mass = exact_sum(parts.iter().map(|s| s.mass));
    let centre_cg = exact_sum(parts.iter().map(|s| s.mass * s.centre)) / mass;
    let i_polar = exact_sum(parts.iter().map(|s| s.i_polar));
    let i_transverse = exact_sum(parts.iter().map(|s| {
        let arm = s.centre - centre_cg;
        s.i_transverse + s.mass * arm * arm
    }));
    let half = 0.5 * exact_sum(rotor.elements().iter().map(|e| e.length));
    let bearing_offsets = rotor.journals().ok().map(|(a, b)| BearingOffsets {
        z1: parts[a].centre - centre_cg,
        z2: parts[b].centre - centre_cg,
    });
    MassProperties { mass, z_cg: half + centre_cg, i_polar, i_transverse, bearing_offsets }
}

#[cfg(test)]
mod tests {
    use super::super::{Layer, RotorElement};
    use super::*;

    fn cylinder(rho: f64, l: f64, d: f64, big: f64) -> Rotor {
        Rotor::new(vec![RotorElement::new(l, vec![Layer::with_density(d, big, rho)])], None, None, None).unwrap()
    }

    #[test]
    fn solid_cylinder() {
        let mp = mass_properties(&cylinder(8000.0, 0.1, 0.0, 0.02));
        // m = ρπR²L, Ip = mR²/2, It = m(3R² + L²)/12.
        let m = 8000.0 * PI * 1e-4 * 0.1;
        assert!((mp.mass - m).abs() < 1e-15);
        assert!((mp.mass - 0.2513).abs() < 5e-5);
        assert!((mp.i_polar - 1.257e-5).abs() < 5e-9);
        assert!((mp.i_transverse - 2.157e-4).abs() < 5e-8);
        assert!((mp.i_transverse - m * (3e-4 + 0.01) / 12.0).abs() < 1e-17);
        assert!((mp.z_cg - 0.05).abs() < 1e-17);
        assert!(mp.bearing_offsets.is_none());
    }

    #[test]
    fn hollow_cylinder() {
        let mp = mass_properties(&cylinder(8000.0, 0.1, 0.01, 0.02));
        assert!((mp.mass - 0.1885).abs() < 5e-5);
        assert!((mp.mass - 8000.0 * PI * (1e-4 - 0.25e-4) * 0.1).abs() < 1e-15);
    }

    #[test]
    fn two_identical_elements_centre_on_interface() {
        let e = RotorElement::new(0.013, vec![Layer::with_density(0.0, 0.007, 4500.0)]);
        let rotor = Rotor::new(vec![e.clone(), e], Some(0), Some(1), None).unwrap();
        let mp = mass_properties(&rotor);
        assert_eq!(mp.z_cg, 0.013);
        let offsets = mp.bearing_offsets.unwrap();
        assert_eq!(offsets.z1, -0.0065);
        assert_eq!(offsets.z2, 0.0065);
    }
}
