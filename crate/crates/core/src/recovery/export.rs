use super::{element_heads, InteriorField};
use crate::error::{Error, Result};
use crate::mesh::PolygonMesh;
use crate::sbfem::SElementOperator;
use crate::solver::{MonitorTraces, SolutionHistory};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Radial position at which the per-element flux is sampled.
const CELL_FLUX_XI: f64 = 0.5;
const VTK_POLYGON: u8 = 7;
/// Flux components below this fraction of the element's head-gradient scale are written as 0.
const FLUX_NOISE: f64 = 1e-12;

/// Shortest round-trip formatting that switches to exponent notation for very
/// small or large magnitudes; `-0` is written as `0`.
#[derive(Debug, Clone, Copy)]
pub struct Num(pub f64);

impl std::fmt::Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let v = self.0;
        let a = v.abs();
        if v == 0.0 {
            f.write_str("0")
        } else if !v.is_finite() || (1e-4..1e15).contains(&a) {
            write!(f, "{v}")
        } else {
            write!(f, "{v:e}")
        }
    }
}

fn geometry_section(mesh: &PolygonMesh, title: &str) -> String {
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.num_nodes());
    for n in mesh.nodes() {
        let _ = writeln!(s, "{} {} 0", Num(n.x), Num(n.y));
    }
    let ne = mesh.num_elements();
    let size: usize = mesh.elements().iter().map(|e| e.node_ids.len() + 1).sum();
    let _ = writeln!(s, "CELLS {ne} {size}");
    for e in 0..ne {
        let idx = mesh.element_node_indices(e);
        let _ = write!(s, "{}", idx.len());
        for i in idx {
            let _ = write!(s, " {i}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    for _ in 0..ne {
        let _ = writeln!(s, "{VTK_POLYGON}");
    }
    s
}

/// Legacy ASCII VTK of the mesh with nodal heads and element mean fluxes.
/// Numbers use the shortest round-trip representation, so output is byte-stable.
pub fn export_vtk(mesh: &PolygonMesh, ops: &[SElementOperator], heads: &[f64], title: &str) -> Result<String> {
    if heads.len() != mesh.num_nodes() {
        return Err(Error::OutOfRange(format!(
            "{} heads for {} nodes",
            heads.len(),
            mesh.num_nodes()
        )));
    }
    if ops.len() != mesh.num_elements() {
        return Err(Error::OutOfRange("operator count does not match the mesh".into()));
    }
    let mut s = geometry_section(mesh, title);
    let ne = mesh.num_elements();
    let _ = writeln!(s, "POINT_DATA {}\nSCALARS head double 1\nLOOKUP_TABLE default", mesh.num_nodes());
    for h in heads {
        let _ = writeln!(s, "{}", Num(*h));
    }
    let _ = writeln!(s, "CELL_DATA {ne}\nVECTORS flux double");
    for (e, op) in ops.iter().enumerate() {
        let hb = element_heads(mesh, e, heads);
        let q = InteriorField::new(op, &hb)?.mean_flux(CELL_FLUX_XI)?;
        let range = hb.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)) - hb.iter().fold(f64::INFINITY, |m, v| m.min(*v));
        let k = op.conductivity.matrix().abs().max();
        let noise = FLUX_NOISE * k * range.max(hb.iter().fold(0.0, |m, v| m.max(v.abs()))) / op.geometry.diameter();
        let clean = |v: f64| if v.abs() <= noise { 0.0 } else { v };
        let _ = writeln!(s, "{} {} 0", Num(clean(q[0])), Num(clean(q[1])));
    }
    Ok(s)
}

/// Geometry-only preview: the mesh with the vertex count of each cell.
pub fn export_mesh_vtk(mesh: &PolygonMesh, title: &str) -> String {
    let mut s = geometry_section(mesh, title);
    let _ = writeln!(s, "CELL_DATA {}\nSCALARS vertices int 1\nLOOKUP_TABLE default", mesh.num_elements());
    for e in mesh.elements() {
        let _ = writeln!(s, "{}", e.node_ids.len());
    }
    s
}

pub fn write_vtk(path: &Path, mesh: &PolygonMesh, ops: &[SElementOperator], heads: &[f64], title: &str) -> Result<()> {
    fs::write(path, export_vtk(mesh, ops, heads, title)?)?;
    Ok(())
}

/// Writes `heads_000000.vtk`, `heads_000001.vtk`, ... into `dir`, one per stored frame,
/// plus `frames.csv` listing the time of each file.
pub fn write_history_vtk(
    dir: &Path,
    mesh: &PolygonMesh,
    ops: &[SElementOperator],
    history: &SolutionHistory,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::with_capacity(history.frames.len());
    for (k, f) in history.frames.iter().enumerate() {
        let path = dir.join(format!("heads_{k:06}.vtk"));
        write_vtk(&path, mesh, ops, &f.heads, &format!("head at t = {}", Num(f.t)))?;
        files.push(path);
    }
    fs::write(dir.join("frames.csv"), history_index_csv(history))?;
    Ok(files)
}

pub fn history_index_csv(history: &SolutionHistory) -> String {
    let mut s = String::from("index,t,file\n");
    for (k, f) in history.frames.iter().enumerate() {
        let _ = writeln!(s, "{k},{},heads_{k:06}.vtk", Num(f.t));
    }
    s
}

/// `t,<monitor names>` followed by one row per time level.
pub fn monitor_csv(traces: &MonitorTraces) -> String {
    let mut s = String::from("t");
    for n in &traces.names {
        s.push(',');
        s.push_str(n);
    }
    s.push('\n');
    for (t, row) in traces.times.iter().zip(&traces.values) {
        let _ = write!(s, "{}", Num(*t));
        for v in row {
            let _ = write!(s, ",{}", Num(*v));
        }
        s.push('\n');
    }
    s
}

pub fn write_monitor_csv(path: &Path, traces: &MonitorTraces) -> Result<()> {
    fs::write(path, monitor_csv(traces))?;
    Ok(())
}
