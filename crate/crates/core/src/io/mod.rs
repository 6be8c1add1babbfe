//! Model input: Abaqus-style user-element decks and the native JSON format.

mod inp;
mod native;
mod solution;

pub use inp::{parse_inp, DeckElement, DeckModel, DeckNode, UelProperty, UserElementDef};
pub use native::{
    parse_native_model, parse_problem, serialize_mesh, serialize_native_model, ModelDoc, ProblemDoc, FORMAT_VERSION,
};
pub use solution::{parse_solution, serialize_solution, SolutionKind, StoredSolution};

use crate::error::{Error, Result};
use crate::mesh::{Node, PolygonElement, PolygonMesh};
use crate::model::{Material, SeepageModel};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Data a deck does not carry: storage per element set plus the problem definition.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct DeckOverlay {
    /// Specific storage per element set, overriding `default_storage`.
    #[serde(default)]
    pub storage: BTreeMap<String, f64>,
    #[serde(default)]
    pub default_storage: f64,
    #[serde(default)]
    pub problem: ProblemDoc,
}

/// Builds a model from a parsed deck. Element property values are `kx, ky`
/// (an optional third value is the specific storage). Free edges on the
/// bounding box are tagged `left`, `right`, `bottom`, `top`; other free edges `boundary`.
pub fn deck_to_model(deck: &DeckModel, overlay: &DeckOverlay) -> Result<SeepageModel> {
    let mut materials = BTreeMap::new();
    let mut elements = Vec::with_capacity(deck.elements.len());
    for e in &deck.elements {
        let set = e.elset.clone().unwrap_or_else(|| e.type_name.clone());
        let prop = deck.property(&set).ok_or_else(|| {
            Error::parse(e.line, format!("element {} is in set {set}, which has no *UEL PROPERTY", e.id))
        })?;
        if prop.values.len() < 2 {
            return Err(Error::parse(prop.line, format!("element set {set} needs at least kx and ky")));
        }
        let ss = prop
            .values
            .get(2)
            .copied()
            .or_else(|| overlay.storage.get(&prop.elset).copied())
            .unwrap_or(overlay.default_storage);
        let material = Material::new(prop.values[0], prop.values[1], ss);
        material.check(&prop.elset)?;
        materials.insert(prop.elset.clone(), material);
        elements.push(PolygonElement::new(e.id, e.nodes.clone(), prop.elset.clone()));
    }
    if let Some(unknown) = overlay.storage.keys().find(|k| !materials.contains_key(*k)) {
        return Err(Error::Model(format!("storage given for unknown element set {unknown}")));
    }
    let nodes = deck.nodes.iter().map(|n| Node::new(n.id, n.x, n.y)).collect();
    let mut mesh = PolygonMesh::new(nodes, elements, Vec::new())?;
    let pts = mesh.points();
    let (lo, hi) = crate::geometry::bounding_box(&pts);
    let tol = 1e-9 * mesh.bounding_diameter();
    let near = |a: f64, b: f64| (a - b).abs() <= tol;
    mesh.tag_free_edges(|p, q| {
        let tag = if near(p.x, lo.x) && near(q.x, lo.x) {
            "left"
        } else if near(p.x, hi.x) && near(q.x, hi.x) {
            "right"
        } else if near(p.y, lo.y) && near(q.y, lo.y) {
            "bottom"
        } else if near(p.y, hi.y) && near(q.y, hi.y) {
            "top"
        } else {
            "boundary"
        };
        Some(tag.to_string())
    });
    let mut model = SeepageModel::new(mesh, materials);
    overlay.problem.apply(&mut model)?;
    model.check()?;
    Ok(model)
}

pub fn parse_overlay(text: &str) -> Result<DeckOverlay> {
    serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))
}

/// Reads a whole file; the error names the path.
pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Reads a model by extension: `.inp` (with an optional overlay file) or JSON.
pub fn load_model(path: &Path, overlay: Option<&Path>) -> Result<SeepageModel> {
    let text = read_text(path)?;
    let is_inp = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("inp"));
    if is_inp {
        let deck = parse_inp(&text)?;
        let overlay = match overlay {
            Some(p) => parse_overlay(&read_text(p)?)?,
            None => DeckOverlay::default(),
        };
        deck_to_model(&deck, &overlay)
    } else {
        if overlay.is_some() {
            return Err(Error::Model("an overlay only applies to .inp decks".into()));
        }
        parse_native_model(&text)
    }
}
