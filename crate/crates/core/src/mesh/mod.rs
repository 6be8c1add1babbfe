//! Polygonal meshes: representation, validation and quadtree generation.

mod grid;
mod quadtree;
mod validate;

pub use quadtree::{
    build_quadtree, generate_quadtree, polygonize_hanging_nodes, Quadtree, QuadtreeCell,
    QuadtreeSpec, RefineRegion, RefineTarget, IMPERMEABLE_TAG,
};
pub use validate::{validate_mesh, ValidationReport, Violation};

use crate::error::{Error, Result};
use crate::geometry::{polygon_area_centroid, Point2};
use std::collections::{BTreeMap, HashMap};

pub type NodeId = usize;
pub type ElementId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
}

impl Node {
    pub fn new(id: NodeId, x: f64, y: f64) -> Self {
        Node { id, x, y }
    }

    pub fn point(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolygonElement {
    pub id: ElementId,
    /// Vertex node ids, counter-clockwise once validated.
    pub node_ids: Vec<NodeId>,
    pub material: String,
}

impl PolygonElement {
    pub fn new(id: ElementId, node_ids: Vec<NodeId>, material: impl Into<String>) -> Self {
        PolygonElement {
            id,
            node_ids,
            material: material.into(),
        }
    }

    /// Edges as ordered node-id pairs.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        let n = self.node_ids.len();
        (0..n).map(move |i| (self.node_ids[i], self.node_ids[(i + 1) % n]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    pub nodes: [NodeId; 2],
    pub tag: String,
}

impl BoundaryEdge {
    pub fn new(a: NodeId, b: NodeId, tag: impl Into<String>) -> Self {
        BoundaryEdge {
            nodes: [a, b],
            tag: tag.into(),
        }
    }
}

/// Nodes, star-convex polygon elements and tagged boundary edges.
#[derive(Debug, Clone)]
pub struct PolygonMesh {
    nodes: Vec<Node>,
    elements: Vec<PolygonElement>,
    boundary_edges: Vec<BoundaryEdge>,
    index: HashMap<NodeId, usize>,
}

impl PartialEq for PolygonMesh {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
            && self.elements == other.elements
            && self.boundary_edges == other.boundary_edges
    }
}

impl PolygonMesh {
    /// Builds a mesh, checking only that node ids are unique and element
    /// references resolve. Geometric checks live in [`validate_mesh`].
    pub fn new(
        nodes: Vec<Node>,
        elements: Vec<PolygonElement>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if !(n.x.is_finite() && n.y.is_finite()) {
                return Err(Error::InvalidMesh(format!("node {} has non-finite coordinates", n.id)));
            }
            if index.insert(n.id, i).is_some() {
                return Err(Error::InvalidMesh(format!("duplicate node id {}", n.id)));
            }
        }
        for e in &elements {
            if e.node_ids.len() < 3 {
                return Err(Error::InvalidMesh(format!(
                    "element {} has {} nodes, need at least 3",
                    e.id,
                    e.node_ids.len()
                )));
            }
            if let Some(missing) = e.node_ids.iter().find(|id| !index.contains_key(id)) {
                return Err(Error::InvalidMesh(format!(
                    "element {} references undefined node {}",
                    e.id, missing
                )));
            }
        }
        for be in &boundary_edges {
            if let Some(missing) = be.nodes.iter().find(|id| !index.contains_key(id)) {
                return Err(Error::InvalidMesh(format!(
                    "boundary edge tagged '{}' references undefined node {}",
                    be.tag, missing
                )));
            }
        }
        Ok(PolygonMesh {
            nodes,
            elements,
            boundary_edges,
            index,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn elements(&self) -> &[PolygonElement] {
        &self.elements
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// Position of a node id in [`nodes`](Self::nodes); this is also its global dof.
    pub fn node_index(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn node_by_id(&self, id: NodeId) -> Option<&Node> {
        self.node_index(id).map(|i| &self.nodes[i])
    }

    pub fn element_node_indices(&self, elem: usize) -> Vec<usize> {
        self.elements[elem]
            .node_ids
            .iter()
            .map(|id| self.index[id])
            .collect()
    }

    pub fn element_points(&self, elem: usize) -> Vec<Point2> {
        self.elements[elem]
            .node_ids
            .iter()
            .map(|id| self.nodes[self.index[id]].point())
            .collect()
    }

    pub fn element_area_centroid(&self, elem: usize) -> Result<(f64, Point2)> {
        polygon_area_centroid(&self.element_points(elem))
    }

    pub fn total_area(&self) -> Result<f64> {
        (0..self.elements.len())
            .map(|e| self.element_area_centroid(e).map(|(a, _)| a))
            .sum()
    }

    pub fn points(&self) -> Vec<Point2> {
        self.nodes.iter().map(Node::point).collect()
    }

    pub fn bounding_diameter(&self) -> f64 {
        crate::geometry::bounding_diameter(&self.points())
    }

    /// Edges used by exactly one element, in element order.
    pub fn free_edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut count: BTreeMap<(NodeId, NodeId), usize> = BTreeMap::new();
        for e in &self.elements {
            for (a, b) in e.edges() {
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut out = Vec::new();
        for e in &self.elements {
            for (a, b) in e.edges() {
                if count[&(a.min(b), a.max(b))] == 1 {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn edges_with_tag(&self, tag: &str) -> Vec<[NodeId; 2]> {
        self.boundary_edges
            .iter()
            .filter(|e| e.tag == tag)
            .map(|e| e.nodes)
            .collect()
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.boundary_edges.iter().any(|e| e.tag == tag)
    }

    /// Sorted, deduplicated node ids on edges carrying `tag`.
    pub fn nodes_with_tag(&self, tag: &str) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = self
            .boundary_edges
            .iter()
            .filter(|e| e.tag == tag)
            .flat_map(|e| e.nodes)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Node ids whose coordinates satisfy `pred`, in node order.
    pub fn nodes_where(&self, pred: impl Fn(f64, f64) -> bool) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|n| pred(n.x, n.y))
            .map(|n| n.id)
            .collect()
    }

    /// Tags every free edge for which `classify` returns a tag. Existing tags are kept.
    pub fn tag_free_edges(&mut self, classify: impl Fn(Point2, Point2) -> Option<String>) {
        for (a, b) in self.free_edges() {
            let pa = self.nodes[self.index[&a]].point();
            let pb = self.nodes[self.index[&b]].point();
            if let Some(tag) = classify(pa, pb) {
                self.boundary_edges.push(BoundaryEdge::new(a, b, tag));
            }
        }
    }


    /// Structured rectangular grid of `nx * ny` quadrilaterals over `[x0,x1] x [y0,y1]`.
    /// Node ids run row by row from the bottom-left corner starting at 0.
    pub fn structured_quads(
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
        nx: usize,
        ny: usize,
        material: &str,
    ) -> Result<Self> {
        let xs: Vec<f64> = (0..=nx).map(|i| x0 + (x1 - x0) * i as f64 / nx as f64).collect();
        let ys: Vec<f64> = (0..=ny).map(|j| y0 + (y1 - y0) * j as f64 / ny as f64).collect();
        Self::tensor_quads(&xs, &ys, material)
    }

    /// Tensor-product quadrilateral grid on the given grid lines.
    pub fn tensor_quads(xs: &[f64], ys: &[f64], material: &str) -> Result<Self> {
        if xs.len() < 2 || ys.len() < 2 {
            return Err(Error::InvalidMesh("tensor grid needs at least two lines per axis".into()));
        }
        let nx = xs.len() - 1;
        let mut nodes = Vec::with_capacity(xs.len() * ys.len());
        for (j, &y) in ys.iter().enumerate() {
            for (i, &x) in xs.iter().enumerate() {
                nodes.push(Node::new(j * (nx + 1) + i, x, y));
            }
        }
        let mut elements = Vec::new();
        for j in 0..ys.len() - 1 {
            for i in 0..nx {
                let n0 = j * (nx + 1) + i;
                let n3 = n0 + nx + 1;
                elements.push(PolygonElement::new(
                    elements.len(),
                    vec![n0, n0 + 1, n3 + 1, n3],
                    material,
                ));
            }
        }
        let mut mesh = PolygonMesh::new(nodes, elements, Vec::new())?;
        let (xa, xb) = (xs[0], xs[nx]);
        let (ya, yb) = (ys[0], ys[ys.len() - 1]);
        mesh.tag_free_edges(|p, q| {
            let tag = if p.x == xa && q.x == xa {
                "left"
            } else if p.x == xb && q.x == xb {
                "right"
            } else if p.y == ya && q.y == ya {
                "bottom"
            } else if p.y == yb && q.y == yb {
                "top"
            } else {
                return None;
            };
            Some(tag.to_string())
        });
        Ok(mesh)
    }
}
