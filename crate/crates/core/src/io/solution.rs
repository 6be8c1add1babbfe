//! Stored solutions: the model plus its head frames and monitor traces, so
//! results can be re-exported without solving again.

use super::native::{ModelDoc, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::model::SeepageModel;
use crate::solver::{Frame, MonitorTraces, SolutionHistory};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    Steady,
    Transient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameDoc {
    t: f64,
    heads: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TracesDoc {
    names: Vec<String>,
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionDoc {
    format_version: u32,
    kind: SolutionKind,
    model: ModelDoc,
    frames: Vec<FrameDoc>,
    monitors: TracesDoc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredSolution {
    pub kind: SolutionKind,
    pub model: SeepageModel,
    pub history: SolutionHistory,
}

pub fn serialize_solution(kind: SolutionKind, model: &SeepageModel, history: &SolutionHistory) -> String {
    let doc = SolutionDoc {
        format_version: FORMAT_VERSION,
        kind,
        model: ModelDoc::from_model(model),
        frames: history
            .frames
            .iter()
            .map(|f| FrameDoc {
                t: f.t,
                heads: f.heads.clone(),
            })
            .collect(),
        monitors: TracesDoc {
            names: history.traces.names.clone(),
            times: history.traces.times.clone(),
            values: history.traces.values.clone(),
        },
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("solution is serializable");
    s.push('\n');
    s
}

pub fn parse_solution(text: &str) -> Result<StoredSolution> {
    let doc: SolutionDoc = serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    if doc.format_version != FORMAT_VERSION {
        return Err(Error::Model(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            doc.format_version
        )));
    }
    let model = doc.model.to_model()?;
    let n = model.mesh.num_nodes();
    if doc.frames.is_empty() {
        return Err(Error::Model("stored solution has no frames".into()));
    }
    if let Some(f) = doc.frames.iter().find(|f| f.heads.len() != n) {
        return Err(Error::Model(format!(
            "frame at t = {} has {} heads for {n} nodes",
            f.t,
            f.heads.len()
        )));
    }
    let m = &doc.monitors;
    if m.times.len() != m.values.len() || m.values.iter().any(|r| r.len() != m.names.len()) {
        return Err(Error::Model("monitor traces have inconsistent sizes".into()));
    }
    Ok(StoredSolution {
        kind: doc.kind,
        model,
        history: SolutionHistory {
            frames: doc.frames.into_iter().map(|f| Frame { t: f.t, heads: f.heads }).collect(),
            traces: MonitorTraces {
                names: doc.monitors.names,
                times: doc.monitors.times,
                values: doc.monitors.values,
            },
            factorizations: 0,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::PolygonMesh;
    use crate::model::Material;

    #[test]
    fn round_trip() {
        let mesh = PolygonMesh::structured_quads(0.0, 1.0, 0.0, 1.0, 1, 1, "m").unwrap();
        let model = SeepageModel::with_material(mesh, "m", Material::isotropic(1.0, 0.0));
        let history = SolutionHistory {
            frames: vec![Frame {
                t: 0.0,
                heads: vec![0.1, 0.2, 1.0 / 3.0, 4.0],
            }],
            traces: MonitorTraces {
                names: vec!["A".into()],
                times: vec![0.0],
                values: vec![vec![0.7]],
            },
            factorizations: 0,
        };
        let text = serialize_solution(SolutionKind::Steady, &model, &history);
        let back = parse_solution(&text).unwrap();
        assert_eq!(back.kind, SolutionKind::Steady);
        assert_eq!(back.history, history);
        assert_eq!(crate::io::serialize_native_model(&back.model), crate::io::serialize_native_model(&model));
    }
}
