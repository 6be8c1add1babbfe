//! Versioned JSON model format.

use crate::error::{Error, Result};
use crate::mesh::{BoundaryEdge, Node, NodeId, PolygonElement, PolygonMesh};
use crate::model::{
    DirichletSet, EdgeTarget, FluxSet, HeadValue, InitialHead, Material, Monitor, NodeTarget, Schedule,
    SeepageModel, TransientSettings,
};
use crate::geometry::Point2;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MeshDoc {
    /// `[id, x, y]`
    pub nodes: Vec<(NodeId, f64, f64)>,
    pub elements: Vec<ElementDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundary_edges: Vec<BoundaryEdgeDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ElementDoc {
    pub id: usize,
    pub nodes: Vec<NodeId>,
    pub material: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BoundaryEdgeDoc {
    pub nodes: [NodeId; 2],
    pub tag: String,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MaterialDoc {
    pub kx: f64,
    pub ky: f64,
    #[serde(default)]
    pub ss: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum NodeTargetDoc {
    Nodes(Vec<NodeId>),
    Tag(String),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum EdgeTargetDoc {
    Edges(Vec<[NodeId; 2]>),
    Tag(String),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum HeadValueDoc {
    Value(f64),
    Schedule(String),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HeadDoc {
    pub name: String,
    #[serde(flatten)]
    pub target: NodeTargetDoc,
    #[serde(flatten)]
    pub value: HeadValueDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FluxDoc {
    pub name: String,
    #[serde(flatten)]
    pub target: EdgeTargetDoc,
    /// Inflow per unit length.
    pub flux: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConditionsDoc {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub heads: Vec<HeadDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fluxes: Vec<FluxDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum InitialDoc {
    Uniform(f64),
    Values(Vec<f64>),
    Steady,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TransientDoc {
    pub t_end: f64,
    pub dt: f64,
    pub initial: InitialDoc,
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MonitorDoc {
    pub name: String,
    pub x: f64,
    pub y: f64,
}

/// Everything except the mesh and materials; shared with the deck overlay.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
    #[serde(default)]
    pub boundary_conditions: BoundaryConditionsDoc,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub schedules: BTreeMap<String, Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transient: Option<TransientDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub monitors: Vec<MonitorDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelDoc {
    pub format_version: u32,
    pub mesh: MeshDoc,
    pub materials: BTreeMap<String, MaterialDoc>,
    #[serde(flatten)]
    pub problem: ProblemDoc,
}

impl From<&PolygonMesh> for MeshDoc {
    fn from(m: &PolygonMesh) -> Self {
        MeshDoc {
            nodes: m.nodes().iter().map(|n| (n.id, n.x, n.y)).collect(),
            elements: m
                .elements()
                .iter()
                .map(|e| ElementDoc {
                    id: e.id,
                    nodes: e.node_ids.clone(),
                    material: e.material.clone(),
                })
                .collect(),
            boundary_edges: m
                .boundary_edges()
                .iter()
                .map(|b| BoundaryEdgeDoc {
                    nodes: b.nodes,
                    tag: b.tag.clone(),
                })
                .collect(),
        }
    }
}

impl MeshDoc {
    pub fn to_mesh(&self) -> Result<PolygonMesh> {
        PolygonMesh::new(
            self.nodes.iter().map(|&(id, x, y)| Node::new(id, x, y)).collect(),
            self.elements
                .iter()
                .map(|e| PolygonElement::new(e.id, e.nodes.clone(), e.material.clone()))
                .collect(),
            self.boundary_edges
                .iter()
                .map(|b| BoundaryEdge::new(b.nodes[0], b.nodes[1], b.tag.clone()))
                .collect(),
        )
    }
}

impl ProblemDoc {
    pub fn from_model(m: &SeepageModel) -> Self {
        ProblemDoc {
            units: m.units.clone(),
            boundary_conditions: BoundaryConditionsDoc {
                heads: m
                    .dirichlet
                    .iter()
                    .map(|d| HeadDoc {
                        name: d.name.clone(),
                        target: match &d.target {
                            NodeTarget::Nodes(n) => NodeTargetDoc::Nodes(n.clone()),
                            NodeTarget::Tag(t) => NodeTargetDoc::Tag(t.clone()),
                        },
                        value: match &d.value {
                            HeadValue::Constant(v) => HeadValueDoc::Value(*v),
                            HeadValue::Schedule(s) => HeadValueDoc::Schedule(s.clone()),
                        },
                    })
                    .collect(),
                fluxes: m
                    .flux
                    .iter()
                    .map(|f| FluxDoc {
                        name: f.name.clone(),
                        target: match &f.target {
                            EdgeTarget::Edges(e) => EdgeTargetDoc::Edges(e.clone()),
                            EdgeTarget::Tag(t) => EdgeTargetDoc::Tag(t.clone()),
                        },
                        flux: f.flux,
                    })
                    .collect(),
            },
            schedules: m
                .schedules
                .iter()
                .map(|(k, s)| (k.clone(), s.knots().to_vec()))
                .collect(),
            transient: m.transient.as_ref().map(|t| TransientDoc {
                t_end: t.t_end,
                dt: t.dt,
                initial: match &t.initial {
                    InitialHead::Uniform(v) => InitialDoc::Uniform(*v),
                    InitialHead::Values(v) => InitialDoc::Values(v.clone()),
                    InitialHead::Steady => InitialDoc::Steady,
                },
                stride: t.stride,
            }),
            monitors: m
                .monitors
                .iter()
                .map(|mo| MonitorDoc {
                    name: mo.name.clone(),
                    x: mo.at.x,
                    y: mo.at.y,
                })
                .collect(),
        }
    }

    /// Fills the problem part of `model` (replacing what was there).
    pub fn apply(&self, model: &mut SeepageModel) -> Result<()> {
        model.units = self.units.clone();
        model.dirichlet = self
            .boundary_conditions
            .heads
            .iter()
            .map(|h| DirichletSet {
                name: h.name.clone(),
                target: match &h.target {
                    NodeTargetDoc::Nodes(n) => NodeTarget::Nodes(n.clone()),
                    NodeTargetDoc::Tag(t) => NodeTarget::Tag(t.clone()),
                },
                value: match &h.value {
                    HeadValueDoc::Value(v) => HeadValue::Constant(*v),
                    HeadValueDoc::Schedule(s) => HeadValue::Schedule(s.clone()),
                },
            })
            .collect();
        model.flux = self
            .boundary_conditions
            .fluxes
            .iter()
            .map(|f| FluxSet {
                name: f.name.clone(),
                target: match &f.target {
                    EdgeTargetDoc::Edges(e) => EdgeTarget::Edges(e.clone()),
                    EdgeTargetDoc::Tag(t) => EdgeTarget::Tag(t.clone()),
                },
                flux: f.flux,
            })
            .collect();
        model.schedules = self
            .schedules
            .iter()
            .map(|(k, v)| {
                Schedule::new(v.clone())
                    .map(|s| (k.clone(), s))
                    .map_err(|e| Error::Model(format!("schedule '{k}': {e}")))
            })
            .collect::<Result<_>>()?;
        model.transient = self.transient.as_ref().map(|t| TransientSettings {
            t_end: t.t_end,
            dt: t.dt,
            initial: match &t.initial {
                InitialDoc::Uniform(v) => InitialHead::Uniform(*v),
                InitialDoc::Values(v) => InitialHead::Values(v.clone()),
                InitialDoc::Steady => InitialHead::Steady,
            },
            stride: t.stride,
        });
        model.monitors = self
            .monitors
            .iter()
            .map(|m| Monitor {
                name: m.name.clone(),
                at: Point2::new(m.x, m.y),
            })
            .collect();
        Ok(())
    }
}

impl ModelDoc {
    pub fn from_model(m: &SeepageModel) -> Self {
        ModelDoc {
            format_version: FORMAT_VERSION,
            mesh: MeshDoc::from(&m.mesh),
            materials: m
                .materials
                .iter()
                .map(|(k, v)| (k.clone(), MaterialDoc { kx: v.kx, ky: v.ky, ss: v.ss }))
                .collect(),
            problem: ProblemDoc::from_model(m),
        }
    }

    pub fn to_model(&self) -> Result<SeepageModel> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let materials = self
            .materials
            .iter()
            .map(|(k, m)| (k.clone(), Material::new(m.kx, m.ky, m.ss)))
            .collect();
        let mut model = SeepageModel::new(self.mesh.to_mesh()?, materials);
        self.problem.apply(&mut model)?;
        model.check()?;
        Ok(model)
    }
}

fn json_error(e: serde_json::Error) -> Error {
    Error::parse(e.line(), e.to_string())
}

/// Reads a native JSON model and checks it.
pub fn parse_native_model(text: &str) -> Result<SeepageModel> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(json_error)?;
    doc.to_model()
}

/// Pretty JSON; floats use the shortest representation that reads back bit-exactly.
pub fn serialize_native_model(model: &SeepageModel) -> String {
    let mut s = serde_json::to_string_pretty(&ModelDoc::from_model(model)).expect("model is serializable");
    s.push('\n');
    s
}

/// Mesh section alone, in the same layout as inside a model file.
pub fn serialize_mesh(mesh: &PolygonMesh) -> String {
    let mut s = serde_json::to_string_pretty(&MeshDoc::from(mesh)).expect("mesh is serializable");
    s.push('\n');
    s
}

pub fn parse_problem(text: &str) -> Result<ProblemDoc> {
    serde_json::from_str(text).map_err(json_error)
}
