//! Rotor document: versioned JSON text.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "elements": [
//!     { "L_m": 0.01, "layers": [ { "d_m": 0.0, "D_m": 0.01, "material": "steel" } ] },
//!     { "L_m": 0.02, "layers": [ { "d_m": 0.0, "D_m": 0.008, "rho_kg_m3": 7850.0 } ] }
//!   ],
//!   "journal_a": 0,
//!   "journal_b": 1,
//!   "thrust": null
//! }
//! ```
//!
//! Indices are 0-based. A layer names a `material` from the registry, gives
//! `rho_kg_m3` inline, or both (the inline density wins). `journal_a`,
//! `journal_b` and `thrust` may be omitted.

use serde::{Deserialize, Serialize};

use super::{material_density, Layer, Rotor, RotorElement, RotorError};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RotorDocument {
    format_version: u32,
    elements: Vec<ElementDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    journal_a: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    journal_b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    thrust: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct ElementDocument {
    L_m: f64,
    layers: Vec<LayerDocument>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct LayerDocument {
    d_m: f64,
    D_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    material: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho_kg_m3: Option<f64>,
}

/// Parse and validate a rotor document.
pub fn parse_rotor(text: &str) -> Result<Rotor, RotorError> {
    let doc: RotorDocument = serde_json::from_str(text).map_err(|e| RotorError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if doc.format_version != FORMAT_VERSION {
        return Err(RotorError::UnsupportedVersion(doc.format_version));
    }
    let mut elements = Vec::with_capacity(doc.elements.len());
    for (i, element) in doc.elements.into_iter().enumerate() {
        let mut layers = Vec::with_capacity(element.layers.len());
        for (k, layer) in element.layers.into_iter().enumerate() {
            let path = format!("elements[{i}].layers[{k}]");
            let named = match &layer.material {
                Some(name) => Some(material_density(name).ok_or_else(|| RotorError::UnknownMaterial {
                    path: format!("{path}.material"),
                    name: name.clone(),
                })?),
                None => None,
            };
            let density = match (layer.rho_kg_m3, named) {
                (Some(rho), _) => rho,
                (None, Some(rho)) => rho,
                (None, None) => {
                    return Err(RotorError::Invariant {
                        path,
                        message: "layer needs a material or rho_kg_m3".into(),
                    })
                }
            };
            layers.push(Layer {
                d_inner: layer.d_m,
                d_outer: layer.D_m,
                density,
                material: layer.material,
                inline_density: layer.rho_kg_m3.is_some(),
            });
        }
        elements.push(RotorElement { length: element.L_m, layers });
    }
    Rotor::new(elements, doc.journal_a, doc.journal_b, doc.thrust)
}

/// Serialise to the document format, fields in schema order.
pub fn serialize_rotor(rotor: &Rotor) -> String {
    let doc = RotorDocument {
        format_version: FORMAT_VERSION,
        elements: rotor
            .elements()
            .iter()
            .map(|e| ElementDocument {
                L_m: e.length,
                layers: e
                    .layers
                    .iter()
                    .map(|l| LayerDocument {
                        d_m: l.d_inner,
                        D_m: l.d_outer,
                        material: l.material.clone(),
                        rho_kg_m3: (l.inline_density || l.material.is_none()).then_some(l.density),
                    })
                    .collect(),
            })
            .collect(),
        journal_a: rotor.journal_a(),
        journal_b: rotor.journal_b(),
        thrust: rotor.thrust(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("rotor document is always serialisable");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let rotor = parse_rotor(r#"{"format_version":1,"elements":[{"L_m":0.01,"layers":[{"d_m":0,"D_m":0.01,"rho_kg_m3":7800}]}]}"#)
            .unwrap();
        assert_eq!(rotor.elements().len(), 1);
        assert_eq!(rotor.elements()[0].layers[0].density, 7800.0);
        assert!(matches!(rotor.journals(), Err(RotorError::JournalsUnassigned)));
    }

    #[test]
    fn inverted_layer_is_invariant_error() {
        let err = parse_rotor(r#"{"format_version":1,"elements":[{"L_m":0.01,"layers":[{"d_m":0.01,"D_m":0.005,"material":"steel"}]}]}"#)
            .unwrap_err();
        assert_eq!(err.code(), "rotor.invariant");
        assert_eq!(err.path(), Some("elements[0].layers[0].D_m"));
    }

    #[test]
    fn contiguity() {
        let ok = r#"{"format_version":1,"elements":[{"L_m":0.01,"layers":[
            {"d_m":0,"D_m":0.005,"material":"steel"},
            {"d_m":0.005,"D_m":0.008,"material":"titanium"},
            {"d_m":0.008,"D_m":0.012,"material":"ceramic"}]}]}"#;
        assert_eq!(parse_rotor(ok).unwrap().elements()[0].layers.len(), 3);
        let gap = r#"{"format_version":1,"elements":[{"L_m":0.01,"layers":[
            {"d_m":0,"D_m":0.005,"material":"steel"},
            {"d_m":0.006,"D_m":0.008,"material":"titanium"}]}]}"#;
        let err = parse_rotor(gap).unwrap_err();
        assert_eq!(err.path(), Some("elements[0].layers[1].d_m"));
    }

    #[test]
    fn syntax_error_is_positioned() {
        let err = parse_rotor("{\n  \"format_version\": 1,\n  \"elements\": [,]\n}").unwrap_err();
        match err {
            RotorError::Syntax { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_material_and_version() {
        let err = parse_rotor(r#"{"format_version":1,"elements":[{"L_m":0.01,"layers":[{"d_m":0,"D_m":0.01,"material":"cheese"}]}]}"#)
            .unwrap_err();
        assert_eq!(err.code(), "rotor.unknown_material");
        let err = parse_rotor(r#"{"format_version":2,"elements":[]}"#).unwrap_err();
        assert_eq!(err, RotorError::UnsupportedVersion(2));
    }

    #[test]
    fn inline_density_overrides_material() {
        let text = r#"{"format_version":1,"elements":[{"L_m":0.01,"layers":[{"d_m":0,"D_m":0.01,"material":"steel","rho_kg_m3":7850}]}]}"#;
        let rotor = parse_rotor(text).unwrap();
        assert_eq!(rotor.elements()[0].layers[0].density, 7850.0);
        assert_eq!(parse_rotor(&serialize_rotor(&rotor)).unwrap(), rotor);
    }

    #[test]
    fn serializer_field_order() {
        let text = r#"{"format_version":1,"elements":[{"L_m":0.01,"layers":[{"d_m":0,"D_m":0.01,"material":"steel"}]},
            {"L_m":0.02,"layers":[{"d_m":0,"D_m":0.01,"material":"steel"}]},
            {"L_m":0.01,"layers":[{"d_m":0,"D_m":0.01,"material":"steel"}]}],"thrust":1,"journal_b":2,"journal_a":0}"#;
        let out = serialize_rotor(&parse_rotor(text).unwrap());
        let pos = |k: &str| out.find(k).unwrap();
        assert!(pos("format_version") < pos("elements"));
        assert!(pos("elements") < pos("journal_a"));
        assert!(pos("journal_a") < pos("journal_b"));
        assert!(pos("journal_b") < pos("thrust"));
    }
}
