//! Model builders for the verification problems.

use crate::error::{Error, Result};
use crate::geometry::{point_in_polygon, Point2};
use crate::mesh::{
    generate_quadtree, Node, PolygonElement, PolygonMesh, QuadtreeSpec, RefineTarget, IMPERMEABLE_TAG,
};
use crate::model::{
    InitialHead, Material, Monitor, NodeTarget, Schedule, SeepageModel, TransientSettings,
};
use std::collections::BTreeSet;
use std::f64::consts::PI;

pub const MATERIAL: &str = "soil";

/// `sin(pi x) sinh(pi y) / sinh(pi)`, harmonic on the unit square.
pub fn harmonic(p: Point2) -> f64 {
    (PI * p.x).sin() * (PI * p.y).sinh() / PI.sinh()
}

/// Linear patch-test field.
pub fn patch_field(p: Point2) -> f64 {
    1.0 + 2.0 * p.x + 3.0 * p.y
}

/// Node ids on free edges, ascending.
pub fn boundary_nodes(mesh: &PolygonMesh) -> Vec<usize> {
    let set: BTreeSet<usize> = mesh.free_edges().into_iter().flat_map(|(a, b)| [a, b]).collect();
    set.into_iter().collect()
}

/// Prescribes `f` at every node of `nodes`, one set per node.
pub fn prescribe_nodes(model: &mut SeepageModel, nodes: &[usize], f: &dyn Fn(Point2) -> f64) {
    for &id in nodes {
        let p = model.mesh.node_by_id(id).expect("node exists").point();
        model.add_head(&format!("n{id}"), NodeTarget::Nodes(vec![id]), f(p));
    }
}

/// Steady isotropic model with `f` prescribed on the whole boundary.
pub fn dirichlet_problem(mesh: PolygonMesh, k: f64, f: &dyn Fn(Point2) -> f64) -> SeepageModel {
    let nodes = boundary_nodes(&mesh);
    let mut model = SeepageModel::with_material(relabel(mesh), MATERIAL, Material::isotropic(k, 0.0));
    prescribe_nodes(&mut model, &nodes, f);
    model
}

fn relabel(mesh: PolygonMesh) -> PolygonMesh {
    let elements = mesh
        .elements()
        .iter()
        .map(|e| PolygonElement::new(e.id, e.node_ids.clone(), MATERIAL))
        .collect();
    PolygonMesh::new(mesh.nodes().to_vec(), elements, mesh.boundary_edges().to_vec()).expect("same nodes")
}

/// Triangle, quadrilateral and pentagon sharing node 7, on eight numbered nodes.
pub fn mixed_polygon_mesh() -> PolygonMesh {
    let nodes = vec![
        Node::new(1, 0.0, 0.0),
        Node::new(2, 1.0, 0.0),
        Node::new(3, 2.0, 0.0),
        Node::new(4, 2.0, 1.0),
        Node::new(5, 0.5, 1.8),
        Node::new(6, 0.0, 1.0),
        Node::new(7, 1.0, 1.0),
        Node::new(8, 1.5, 1.5),
    ];
    let elements = vec![
        PolygonElement::new(1, vec![1, 2, 7, 6], MATERIAL),
        PolygonElement::new(2, vec![2, 3, 4, 8, 7], MATERIAL),
        PolygonElement::new(3, vec![6, 7, 5], MATERIAL),
    ];
    PolygonMesh::new(nodes, elements, Vec::new()).expect("static mesh")
}

/// Meshes for the linear patch test: uniform quads, mixed polygons, graded
/// tensor quads and two quadtrees with hanging nodes (one with a hole).
pub fn patch_meshes() -> Result<Vec<(String, PolygonMesh)>> {
    let mut out = vec![
        ("uniform quads 4x4".to_string(), PolygonMesh::structured_quads(0.0, 1.0, 0.0, 1.0, 4, 4, MATERIAL)?),
        ("mixed triangle/quad/pentagon".to_string(), mixed_polygon_mesh()),
        (
            "graded tensor quads".to_string(),
            PolygonMesh::tensor_quads(&[0.0, 0.1, 0.35, 0.7, 1.0], &[0.0, 0.4, 0.55, 1.0], MATERIAL)?,
        ),
    ];
    let balanced = QuadtreeSpec::rectangle(0.0, 0.0, 1.0, 1.0, 5)
        .with_uniform_depth(2)
        .with_refinement(RefineTarget::Point { at: Point2::new(0.3, 0.7) }, 5)
        .balanced(true);
    out.push(("balanced quadtree".to_string(), generate_quadtree(&balanced)?));
    let holed = QuadtreeSpec::rectangle(0.0, 0.0, 1.0, 1.0, 4)
        .with_uniform_depth(3)
        .with_hole(square(0.335, 0.665))
        .with_refinement(RefineTarget::Point { at: Point2::new(0.9, 0.1) }, 4)
        .balanced(true);
    out.push(("quadtree with hole".to_string(), generate_quadtree(&holed)?));
    Ok(out)
}

pub fn square(lo: f64, hi: f64) -> Vec<Point2> {
    vec![Point2::new(lo, lo), Point2::new(hi, lo), Point2::new(hi, hi), Point2::new(lo, hi)]
}

/// Bounds of the impermeable inclusion in the unit square.
pub const INCLUSION: (f64, f64) = (0.335, 0.665);

/// Unit square with a centred impermeable square inclusion, head 1 on top and 0 on the bottom.
pub fn inclusion_quadtree_model(depth: u32, boundary_depth: u32) -> Result<SeepageModel> {
    let mut spec = QuadtreeSpec::rectangle(0.0, 0.0, 1.0, 1.0, boundary_depth.max(depth))
        .with_uniform_depth(depth)
        .with_hole(square(INCLUSION.0, INCLUSION.1))
        .balanced(true);
    spec.boundary_depth = Some(boundary_depth);
    spec.material = MATERIAL.into();
    inclusion_bcs(generate_quadtree(&spec)?)
}

fn inclusion_bcs(mesh: PolygonMesh) -> Result<SeepageModel> {
    let mut model = SeepageModel::with_material(mesh, MATERIAL, Material::isotropic(1.0, 0.0));
    model.add_head("top", NodeTarget::Tag("top".into()), 1.0);
    model.add_head("bottom", NodeTarget::Tag("bottom".into()), 0.0);
    model.check()?;
    Ok(model)
}

/// Tensor quadrilaterals on `xs x ys` with the cells inside `hole` removed.
pub fn tensor_quads_without(xs: &[f64], ys: &[f64], hole: &[Point2]) -> Result<PolygonMesh> {
    let full = PolygonMesh::tensor_quads(xs, ys, MATERIAL)?;
    let kept: Vec<PolygonElement> = (0..full.num_elements())
        .filter(|&e| {
            let (_, c) = full.element_area_centroid(e).expect("grid cell");
            !point_in_polygon(c, hole)
        })
        .map(|e| full.elements()[e].clone())
        .collect();
    let used: BTreeSet<usize> = kept.iter().flat_map(|e| e.node_ids.iter().copied()).collect();
    let nodes: Vec<Node> = full.nodes().iter().filter(|n| used.contains(&n.id)).cloned().collect();
    let edges = full.boundary_edges().to_vec();
    let mut mesh = PolygonMesh::new(nodes, kept, edges)?;
    let tol = 1e-12;
    let on_hole = |p: Point2| {
        (0..hole.len()).any(|k| crate::geometry::point_segment_distance(p, hole[k], hole[(k + 1) % hole.len()]) <= tol)
    };
    mesh.tag_free_edges(|p, q| (on_hole(p) && on_hole(q)).then(|| IMPERMEABLE_TAG.to_string()));
    Ok(mesh)
}

/// Bilinear-FEM version of the inclusion problem on a uniform grid of spacing `1/n`
/// that also contains the inclusion lines.
pub fn inclusion_fem_model(n: usize) -> Result<SeepageModel> {
    let mut lines: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    lines.extend([INCLUSION.0, INCLUSION.1]);
    lines.sort_by(f64::total_cmp);
    lines.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mesh = tensor_quads_without(&lines, &lines, &square(INCLUSION.0, INCLUSION.1))?;
    inclusion_bcs(mesh)
}

/// Dam-foundation analog: permeable layer `[0,80] x [0,20]`, upstream head on the
/// top surface left of the dam ramped from 10 to 30 over 100 days then held,
/// impermeable dam base on `30 <= x <= 50`, tailwater head 5 right of the dam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DamAnalog {
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
}

impl Default for DamAnalog {
    fn default() -> Self {
        DamAnalog {
            dt: 5.0,
            t_end: 3000.0,
            stride: 100,
        }
    }
}

pub const DAM_MONITOR: (f64, f64) = (40.0, 20.0);

impl DamAnalog {
    fn dress(&self, mesh: PolygonMesh) -> Result<SeepageModel> {
        let up = mesh.nodes_where(|x, y| y == 20.0 && x <= 30.0);
        let down = mesh.nodes_where(|x, y| y == 20.0 && x >= 50.0);
        let mut model = SeepageModel::with_material(mesh, MATERIAL, Material::new(0.001, 0.0005, 0.001));
        model.units = Some("m, day".into());
        model
            .schedules
            .insert("reservoir".into(), Schedule::new(vec![(0.0, 10.0), (100.0, 30.0), (self.t_end.max(100.0) + 1.0, 30.0)])?);
        model.add_scheduled_head("upstream", NodeTarget::Nodes(up), "reservoir");
        model.add_head("tailwater", NodeTarget::Nodes(down), 5.0);
        model.transient = Some(TransientSettings {
            t_end: self.t_end,
            dt: self.dt,
            initial: InitialHead::Steady,
            stride: self.stride,
        });
        model.monitors.push(Monitor {
            name: "P".into(),
            at: Point2::new(DAM_MONITOR.0, DAM_MONITOR.1),
        });
        model.check()?;
        Ok(model)
    }

    /// Quadtree mesh refined around the dam heel and toe.
    pub fn quadtree_model(&self) -> Result<SeepageModel> {
        let mut spec = QuadtreeSpec::rectangle(0.0, 0.0, 80.0, 20.0, 7)
            .with_uniform_depth(4)
            .with_refinement(RefineTarget::Point { at: Point2::new(30.0, 20.0) }, 7)
            .with_refinement(RefineTarget::Point { at: Point2::new(50.0, 20.0) }, 7)
            .balanced(true);
        spec.material = MATERIAL.into();
        self.dress(generate_quadtree(&spec)?)
    }

    /// Uniform bilinear-FEM mesh with `per_10m` cells per 10 m.
    pub fn fem_model(&self, per_10m: usize) -> Result<SeepageModel> {
        if per_10m == 0 {
            return Err(Error::OutOfRange("need at least one cell per 10 m".into()));
        }
        self.dress(PolygonMesh::structured_quads(0.0, 80.0, 0.0, 20.0, 8 * per_10m, 2 * per_10m, MATERIAL)?)
    }
}
