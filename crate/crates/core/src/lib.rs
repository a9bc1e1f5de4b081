//! Rotordynamics of rigid rotors on herringbone-grooved gas journal bearings.

pub mod bearing;
pub mod design;
pub mod dynamics;
pub mod fluid;
pub(crate) mod numeric;
pub mod rotor;
pub mod robustness;
pub mod surrogate;
