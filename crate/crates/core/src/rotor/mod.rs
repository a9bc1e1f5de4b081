//! Rotors assembled from layered cylindrical elements.
//!
//! Elements stack left to right from the axial origin at the rotor's left
//! face. Each element holds one to three concentric, contiguous annular
//! layers listed inside-out. Two elements carry the journal bearings and an
//! optional third one the thrust bearing. Journal assignment may be left open
//! while a rotor is being edited; evaluations require it.

mod document;
mod mass;

use serde::Serialize;
use thiserror::Error;

pub use document::{parse_rotor, serialize_rotor, FORMAT_VERSION};
pub use mass::{mass_properties, BearingOffsets, MassProperties};

pub const MAX_LAYERS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RotorError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unsupported format_version {0}")]
    UnsupportedVersion(u32),
    #[error("{path}: {message}")]
    Invariant { path: String, message: String },
    #[error("{path}: unknown material '{name}'")]
    UnknownMaterial { path: String, name: String },
    #[error("{path}: index {index} out of range ({len} elements)")]
    IndexOutOfRange { path: String, index: usize, len: usize },
    #[error("unknown field '{0}'")]
    UnknownField(String),
    #[error("journal bearings are not assigned")]
    JournalsUnassigned,
}

impl RotorError {
    /// Stable machine-readable error code, shared by the CLI and the service.
    pub fn code(&self) -> &'static str {
        match self {
            Self::Syntax { .. } => "rotor.syntax",
            Self::UnsupportedVersion(_) => "rotor.version",
            Self::Invariant { .. } => "rotor.invariant",
            Self::UnknownMaterial { .. } => "rotor.unknown_material",
            Self::IndexOutOfRange { .. } => "rotor.index_out_of_range",
            Self::UnknownField(_) => "rotor.unknown_field",
            Self::JournalsUnassigned => "rotor.journals_unassigned",
        }
    }

    /// Document path of the offending field, when there is one.
    pub fn path(&self) -> Option<&str> {
        match self {
            Self::Invariant { path, .. } | Self::UnknownMaterial { path, .. } | Self::IndexOutOfRange { path, .. } => {
                Some(path)
            }
            _ => None,
        }
    }

    fn invariant(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invariant { path: path.into(), message: message.into() }
    }
}

/// Named densities, kg/m³.
pub fn material_density(name: &str) -> Option<f64> {
    match name {
        "steel" => Some(7800.0),
        "titanium" => Some(4500.0),
        "ceramic" => Some(3200.0),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layer {
    /// Inner diameter, m.
    pub d_inner: f64,
    /// Outer diameter, m.
    pub d_outer: f64,
    /// Resolved density, kg/m³.
    pub density: f64,
    /// Material name as written in the document, if any.
    pub material: Option<String>,
    /// Whether the density was given inline (it then overrides the material).
    pub inline_density: bool,
}

impl Layer {
    pub fn with_density(d_inner: f64, d_outer: f64, density: f64) -> Self {
        Self { d_inner, d_outer, density, material: None, inline_density: true }
    }

    pub fn with_material(d_inner: f64, d_outer: f64, material: &str) -> Result<Self, RotorError> {
        let density = material_density(material)
            .ok_or_else(|| RotorError::UnknownMaterial { path: "material".into(), name: material.into() })?;
        Ok(Self { d_inner, d_outer, density, material: Some(material.into()), inline_density: false })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotorElement {
    /// Axial length, m.
    pub length: f64,
    pub layers: Vec<Layer>,
}

impl RotorElement {
    pub fn new(length: f64, layers: Vec<Layer>) -> Self {
        Self { length, layers }
    }

    pub fn outer_diameter(&self) -> f64 {
        self.layers.last().map_or(0.0, |l| l.d_outer)
    }

    fn validate(&self, index: usize) -> Result<(), RotorError> {
        let path = format!("elements[{index}]");
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(RotorError::invariant(format!("{path}.L_m"), format!("length must be > 0, got {}", self.length)));
        }
        if self.layers.is_empty() || self.layers.len() > MAX_LAYERS {
            return Err(RotorError::invariant(
                format!("{path}.layers"),
                format!("expected 1 to {MAX_LAYERS} layers, got {}", self.layers.len()),
            ));
        }
        for (k, layer) in self.layers.iter().enumerate() {
            let lpath = format!("{path}.layers[{k}]");
            if !(layer.d_inner.is_finite() && layer.d_inner >= 0.0) {
                return Err(RotorError::invariant(format!("{lpath}.d_m"), format!("inner diameter must be >= 0, got {}", layer.d_inner)));
            }
            if !(layer.d_outer.is_finite() && layer.d_outer > layer.d_inner) {
                return Err(RotorError::invariant(
                    format!("{lpath}.D_m"),
                    format!("outer diameter {} must exceed inner diameter {}", layer.d_outer, layer.d_inner),
                ));
            }
            if !(layer.density.is_finite() && layer.density > 0.0) {
                return Err(RotorError::invariant(format!("{lpath}.rho_kg_m3"), format!("density must be > 0, got {}", layer.density)));
            }
            if k > 0 && self.layers[k - 1].d_outer != layer.d_inner {
                return Err(RotorError::invariant(
                    format!("{lpath}.d_m"),
                    format!(
                        "layers must be contiguous: inner diameter {} differs from previous outer diameter {}",
                        layer.d_inner,
                        self.layers[k - 1].d_outer
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// A validated rotor. Construct with [`Rotor::new`] or [`parse_rotor`]; edits
/// go through [`Rotor::apply`], which re-checks every invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rotor {
    elements: Vec<RotorElement>,
    journal_a: Option<usize>,
    journal_b: Option<usize>,
    thrust: Option<usize>,
}

/// An edit of a single rotor field.
#[derive(Debug, Clone, PartialEq)]
pub enum RotorEdit {
    Length { element: usize, value: f64 },
    /// Moves the inner boundary of `layer` together with the outer boundary of the layer below it.
    InnerDiameter { element: usize, layer: usize, value: f64 },
    /// Moves the outer boundary of `layer` together with the inner boundary of the layer above it.
    OuterDiameter { element: usize, layer: usize, value: f64 },
    Density { element: usize, layer: usize, value: f64 },
    JournalA(Option<usize>),
    JournalB(Option<usize>),
    Thrust(Option<usize>),
}

impl Rotor {
    pub fn new(
        elements: Vec<RotorElement>,
        journal_a: Option<usize>,
        journal_b: Option<usize>,
        thrust: Option<usize>,
    ) -> Result<Self, RotorError> {
        let rotor = Self { elements, journal_a, journal_b, thrust };
        rotor.validate()?;
        Ok(rotor)
    }

    fn validate(&self) -> Result<(), RotorError> {
        if self.elements.is_empty() {
            return Err(RotorError::invariant("elements", "rotor needs at least one element"));
        }
        for (i, element) in self.elements.iter().enumerate() {
            element.validate(i)?;
        }
        let len = self.elements.len();
        for (path, index) in [("journal_a", self.journal_a), ("journal_b", self.journal_b), ("thrust", self.thrust)] {
            if let Some(index) = index {
                if index >= len {
                    return Err(RotorError::IndexOutOfRange { path: path.into(), index, len });
                }
            }
        }
        match (self.journal_a, self.journal_b) {
            (None, None) => {}
            (Some(a), Some(b)) => {
                if a == b {
                    return Err(RotorError::invariant("journal_b", "journal bearings must be on distinct elements"));
                }
                if a > b {
                    return Err(RotorError::invariant("journal_b", "journal_a must lie left of journal_b"));
                }
            }
            (None, Some(_)) => return Err(RotorError::invariant("journal_a", "both journals must be assigned together")),
            (Some(_), None) => return Err(RotorError::invariant("journal_b", "both journals must be assigned together")),
        }
        if let Some(t) = self.thrust {
            if Some(t) == self.journal_a || Some(t) == self.journal_b {
                return Err(RotorError::invariant("thrust", "thrust bearing must not share an element with a journal"));
            }
        }
        Ok(())
    }

    pub fn elements(&self) -> &[RotorElement] {
        &self.elements
    }

    pub fn journal_a(&self) -> Option<usize> {
        self.journal_a
    }

    pub fn journal_b(&self) -> Option<usize> {
        self.journal_b
    }

    /// Both journal element indices, left first.
    pub fn journals(&self) -> Result<(usize, usize), RotorError> {
        match (self.journal_a, self.journal_b) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(RotorError::JournalsUnassigned),
        }
    }

    pub fn thrust(&self) -> Option<usize> {
        self.thrust
    }

    pub fn total_length(&self) -> f64 {
        self.elements.iter().map(|e| e.length).sum()
    }

    /// Axial position of the left face of element `index`.
    pub fn element_start(&self, index: usize) -> f64 {
        self.elements[..index].iter().map(|e| e.length).sum()
    }

    pub fn element_midplane(&self, index: usize) -> f64 {
        self.element_start(index) + 0.5 * self.elements[index].length
    }

    /// Length and outer diameter of a journal element, m.
    pub fn journal_dimensions(&self, index: usize) -> (f64, f64) {
        let e = &self.elements[index];
        (e.length, e.outer_diameter())
    }

    /// Apply `edit` to a copy; the original is untouched whether or not the edit is accepted.
    pub fn apply(&self, edit: &RotorEdit) -> Result<Rotor, RotorError> {
        let mut next = self.clone();
        let len = next.elements.len();
        match *edit {
            RotorEdit::Length { element, value } => {
                next.elements
                    .get_mut(element)
                    .ok_or(RotorError::IndexOutOfRange { path: "elements".into(), index: element, len })?
                    .length = value;
            }
            RotorEdit::InnerDiameter { element, layer, value } => {
                let layers = next.layers_mut(element, layer, len)?;
                layers[layer].d_inner = value;
                if layer > 0 {
                    layers[layer - 1].d_outer = value;
                }
            }
            RotorEdit::OuterDiameter { element, layer, value } => {
                let layers = next.layers_mut(element, layer, len)?;
                layers[layer].d_outer = value;
                if layer + 1 < layers.len() {
                    layers[layer + 1].d_inner = value;
                }
            }
            RotorEdit::Density { element, layer, value } => {
                let layers = next.layers_mut(element, layer, len)?;
                layers[layer].density = value;
                layers[layer].inline_density = true;
            }
            RotorEdit::JournalA(i) => next.journal_a = i,
            RotorEdit::JournalB(i) => next.journal_b = i,
            RotorEdit::Thrust(t) => next.thrust = t,
        }
        next.validate()?;
        Ok(next)
    }

    fn layers_mut(&mut self, element: usize, layer: usize, len: usize) -> Result<&mut Vec<Layer>, RotorError> {
        let e = self
            .elements
            .get_mut(element)
            .ok_or(RotorError::IndexOutOfRange { path: "elements".into(), index: element, len })?;
        let count = e.layers.len();
        if layer >= count {
            return Err(RotorError::IndexOutOfRange {
                path: format!("elements[{element}].layers"),
                index: layer,
                len: count,
            });
        }
        Ok(&mut e.layers)
    }

    /// Rotor with the element order reversed (journal roles swap so `journal_a` stays leftmost).
    pub fn reversed(&self) -> Rotor {
        let n = self.elements.len();
        let mut elements = self.elements.clone();
        elements.reverse();
        Rotor {
            elements,
            journal_a: self.journal_b.map(|b| n - 1 - b),
            journal_b: self.journal_a.map(|a| n - 1 - a),
            thrust: self.thrust.map(|t| n - 1 - t),
        }
    }
}

/// Edit one element field addressed by its document name (`L_m`,
/// `layers[k].d_m`, `layers[k].D_m`, `layers[k].rho_kg_m3`).
pub fn update_element(rotor: &Rotor, index: usize, field: &str, value: f64) -> Result<Rotor, RotorError> {
    let edit = if field == "L_m" {
        RotorEdit::Length { element: index, value }
    } else {
        let rest = field.strip_prefix("layers[").ok_or_else(|| RotorError::UnknownField(field.into()))?;
        let (layer, name) = rest.split_once("].").ok_or_else(|| RotorError::UnknownField(field.into()))?;
        let layer: usize = layer.parse().map_err(|_| RotorError::UnknownField(field.into()))?;
        match name {
            "d_m" => RotorEdit::InnerDiameter { element: index, layer, value },
            "D_m" => RotorEdit::OuterDiameter { element: index, layer, value },
            "rho_kg_m3" => RotorEdit::Density { element: index, layer, value },
            _ => return Err(RotorError::UnknownField(field.into())),
        }
    };
    rotor.apply(&edit)
}
