use super::grid::PointGrid;
use super::{ElementId, NodeId, PolygonMesh};
use crate::geometry::{
    bounding_box, is_simple, is_star_convex_from, on_open_segment, polygon_area_centroid, Point2,
};
use std::collections::{BTreeMap, HashSet};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateNode { first: NodeId, second: NodeId },
    RepeatedVertex { element: ElementId, node: NodeId },
    DuplicateElementId { element: ElementId },
    Degenerate { element: ElementId },
    NotSimple { element: ElementId },
    NotStarConvex { element: ElementId },
    EdgeOverShared { edge: (NodeId, NodeId), count: usize },
    HangingNode { node: NodeId, element: ElementId },
    BoundaryEdgeNotFree { edge: (NodeId, NodeId), count: usize },
}

impl Violation {
    pub fn is_conformity(&self) -> bool {
        matches!(
            self,
            Violation::EdgeOverShared { .. }
                | Violation::HangingNode { .. }
                | Violation::DuplicateNode { .. }
        )
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateNode { first, second } => {
                write!(f, "nodes {first} and {second} are coincident")
            }
            Violation::RepeatedVertex { element, node } => {
                write!(f, "element {element} lists node {node} more than once")
            }
            Violation::DuplicateElementId { element } => write!(f, "element id {element} is repeated"),
            Violation::Degenerate { element } => write!(f, "element {element} has zero area"),
            Violation::NotSimple { element } => write!(f, "element {element} self-intersects"),
            Violation::NotStarConvex { element } => {
                write!(f, "element {element} is not star-convex with respect to its centroid")
            }
            Violation::EdgeOverShared { edge, count } => {
                write!(f, "edge {}-{} is used by {count} elements", edge.0, edge.1)
            }
            Violation::HangingNode { node, element } => {
                write!(f, "node {node} lies on an edge of element {element} without being its vertex")
            }
            Violation::BoundaryEdgeNotFree { edge, count } => write!(
                f,
                "boundary edge {}-{} is used by {count} elements (expected 1)",
                edge.0, edge.1
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub warnings: Vec<String>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn conformity_violations(&self) -> usize {
        self.violations.iter().filter(|v| v.is_conformity()).count()
    }
}

/// Checks a mesh. Clockwise elements are reversed in place (with a warning);
/// every other defect is reported and left untouched.
pub fn validate_mesh(mesh: &mut PolygonMesh) -> ValidationReport {
    let mut report = ValidationReport::default();
    let diam = mesh.bounding_diameter();
    let tol = 1e-9 * diam.max(f64::MIN_POSITIVE);

    let mut seen_ids = HashSet::new();
    for e in mesh.elements() {
        if !seen_ids.insert(e.id) {
            report
                .violations
                .push(Violation::DuplicateElementId { element: e.id });
        }
    }

    let points = mesh.points();
    let grid = PointGrid::new(points.clone(), (diam / 64.0).max(tol));
    for (i, p) in points.iter().enumerate() {
        for j in grid.query_near(*p, tol) {
            if j > i {
                report.violations.push(Violation::DuplicateNode {
                    first: mesh.nodes()[i].id,
                    second: mesh.nodes()[j].id,
                });
            }
        }
    }

    for ei in 0..mesh.num_elements() {
        let id = mesh.elements()[ei].id;
        let ids = &mesh.elements()[ei].node_ids;
        let mut uniq = HashSet::new();
        if let Some(rep) = ids.iter().find(|n| !uniq.insert(**n)) {
            report.violations.push(Violation::RepeatedVertex {
                element: id,
                node: *rep,
            });
            continue;
        }
        let pts = mesh.element_points(ei);
        let (area, _) = match polygon_area_centroid(&pts) {
            Ok(v) => v,
            Err(_) => {
                report.violations.push(Violation::Degenerate { element: id });
                continue;
            }
        };
        if area < 0.0 {
            mesh.elements[ei].node_ids.reverse();
            report
                .warnings
                .push(format!("element {id} was clockwise; vertex order reversed"));
        }
        let pts = mesh.element_points(ei);
        if !is_simple(&pts, tol) {
            report.violations.push(Violation::NotSimple { element: id });
            continue;
        }
        let (_, c) = polygon_area_centroid(&pts).expect("area checked above");
        if !is_star_convex_from(&pts, c, tol) {
            report.violations.push(Violation::NotStarConvex { element: id });
        }
    }

    let mut edge_count: BTreeMap<(NodeId, NodeId), usize> = BTreeMap::new();
    for e in mesh.elements() {
        for (a, b) in e.edges() {
            *edge_count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    for (&edge, &count) in &edge_count {
        if count > 2 {
            report.violations.push(Violation::EdgeOverShared { edge, count });
        }
    }
    for be in mesh.boundary_edges() {
        let [a, b] = be.nodes;
        let count = edge_count.get(&(a.min(b), a.max(b))).copied().unwrap_or(0);
        if count != 1 {
            report.violations.push(Violation::BoundaryEdgeNotFree {
                edge: (a, b),
                count,
            });
        }
    }

    for ei in 0..mesh.num_elements() {
        let e = &mesh.elements()[ei];
        let pts = mesh.element_points(ei);
        let n = pts.len();
        for k in 0..n {
            let (a, b) = (pts[k], pts[(k + 1) % n]);
            let (lo, hi) = bounding_box(&[a, b]);
            for j in grid.query_box(lo, hi, tol) {
                if on_open_segment(points[j], a, b, tol) {
                    report.violations.push(Violation::HangingNode {
                        node: mesh.nodes()[j].id,
                        element: e.id,
                    });
                }
            }
        }
    }
    report
}

/// Nodes lying strictly inside an edge of `pts`, ordered along each edge.
pub(crate) fn edge_interior_points(
    pts: &[Point2],
    grid: &PointGrid,
    all: &[Point2],
    tol: f64,
) -> Vec<Vec<usize>> {
    let n = pts.len();
    (0..n)
        .map(|k| {
            let (a, b) = (pts[k], pts[(k + 1) % n]);
            let (lo, hi) = bounding_box(&[a, b]);
            let mut on: Vec<usize> = grid
                .query_box(lo, hi, tol)
                .into_iter()
                .filter(|&j| on_open_segment(all[j], a, b, tol))
                .collect();
            on.sort_by(|&i, &j| {
                a.dist(all[i])
                    .partial_cmp(&a.dist(all[j]))
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            on
        })
        .collect()
}
