//! Quadtree mesh generation.
//!
//! Leaves of a (optionally 2:1 balanced) quadtree over the bounding square of
//! the domain are clipped against the outer polygon and the holes. Each
//! clipped piece becomes a polygon element; vertices that land on a
//! neighbour's edge (quadtree hanging nodes, hole-cut points) are then
//! inserted into that neighbour so the result is conforming.

use super::grid::PointGrid;
use super::validate::edge_interior_points;
use super::{BoundaryEdge, Node, NodeId, PolygonElement, PolygonMesh};
use crate::error::{Error, Result};
use crate::geometry::{
    bounding_box, bounding_diameter, clip_convex, clip_half_plane, dedup_ring, is_convex_ccw,
    is_simple, point_segment_distance, signed_area, Point2,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

/// Tag given to boundary edges that lie on a hole.
pub const IMPERMEABLE_TAG: &str = "impermeable";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RefineTarget {
    Point { at: Point2 },
    Segment { from: Point2, to: Point2 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineRegion {
    #[serde(flatten)]
    pub target: RefineTarget,
    pub depth: u32,
}

fn default_material() -> String {
    "default".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadtreeSpec {
    /// Outer boundary polygon.
    pub domain: Vec<Point2>,
    /// Convex holes; edges on them are tagged [`IMPERMEABLE_TAG`].
    #[serde(default)]
    pub holes: Vec<Vec<Point2>>,
    /// Uniform subdivision level applied everywhere.
    #[serde(default)]
    pub min_depth: u32,
    pub max_depth: u32,
    #[serde(default)]
    pub refine_regions: Vec<RefineRegion>,
    #[serde(default)]
    pub balance: bool,
    /// Level to which cells cut by the domain or hole boundaries are refined.
    #[serde(default)]
    pub boundary_depth: Option<u32>,
    /// One tag per outer edge (edge `i` runs from vertex `i` to `i+1`).
    /// Defaults to `edge<i>`.
    #[serde(default)]
    pub edge_tags: Option<Vec<String>>,
    #[serde(default = "default_material")]
    pub material: String,
}

impl QuadtreeSpec {
    pub fn new(domain: Vec<Point2>, max_depth: u32) -> Self {
        QuadtreeSpec {
            domain,
            holes: Vec::new(),
            min_depth: 0,
            max_depth,
            refine_regions: Vec::new(),
            balance: false,
            boundary_depth: None,
            edge_tags: None,
            material: default_material(),
        }
    }

    /// Axis-aligned rectangle with edges tagged `bottom`, `right`, `top`, `left`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64, max_depth: u32) -> Self {
        let mut spec = QuadtreeSpec::new(
            vec![
                Point2::new(x0, y0),
                Point2::new(x1, y0),
                Point2::new(x1, y1),
                Point2::new(x0, y1),
            ],
            max_depth,
        );
        spec.edge_tags = Some(
            ["bottom", "right", "top", "left"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        );
        spec
    }

    pub fn with_uniform_depth(mut self, depth: u32) -> Self {
        self.min_depth = depth;
        self
    }

    pub fn with_hole(mut self, hole: Vec<Point2>) -> Self {
        self.holes.push(hole);
        self
    }

    pub fn with_refinement(mut self, target: RefineTarget, depth: u32) -> Self {
        self.refine_regions.push(RefineRegion { target, depth });
        self
    }

    pub fn balanced(mut self, on: bool) -> Self {
        self.balance = on;
        self
    }

    fn edge_tag(&self, i: usize) -> String {
        self.edge_tags
            .as_ref()
            .and_then(|t| t.get(i).cloned())
            .unwrap_or_else(|| format!("edge{i}"))
    }

    fn check(&self) -> Result<(Vec<Point2>, Vec<Vec<Point2>>)> {
        if self.max_depth < 1 {
            return Err(Error::Quadtree("max_depth must be at least 1".into()));
        }
        if self.max_depth > 20 {
            return Err(Error::Quadtree(format!("max_depth {} exceeds 20", self.max_depth)));
        }
        if self.min_depth > self.max_depth {
            return Err(Error::Quadtree(format!(
                "unreachable target depth: min_depth {} > max_depth {}",
                self.min_depth, self.max_depth
            )));
        }
        for r in &self.refine_regions {
            if r.depth > self.max_depth {
                return Err(Error::Quadtree(format!(
                    "unreachable target depth {} (max_depth {})",
                    r.depth, self.max_depth
                )));
            }
        }
        if let Some(d) = self.boundary_depth {
            if d > self.max_depth {
                return Err(Error::Quadtree(format!(
                    "unreachable boundary depth {d} (max_depth {})",
                    self.max_depth
                )));
            }
        }
        if let Some(tags) = &self.edge_tags {
            if tags.len() != self.domain.len() {
                return Err(Error::Quadtree(format!(
                    "{} edge tags given for {} domain edges",
                    tags.len(),
                    self.domain.len()
                )));
            }
        }
        let diam = bounding_diameter(&self.domain);
        let tol = 1e-9 * diam;
        let orient = |poly: &[Point2], what: &str| -> Result<Vec<Point2>> {
            if poly.len() < 3 || poly.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
                return Err(Error::Quadtree(format!("{what} polygon is invalid")));
            }
            if !is_simple(poly, tol) {
                return Err(Error::Quadtree(format!("{what} polygon is not simple")));
            }
            let a = signed_area(poly);
            if a.abs() <= tol * tol {
                return Err(Error::Quadtree(format!("{what} polygon has zero area")));
            }
            let mut p = poly.to_vec();
            if a < 0.0 {
                p.reverse();
            }
            Ok(p)
        };
        let domain = orient(&self.domain, "domain")?;
        if signed_area(&self.domain) < 0.0 && self.edge_tags.is_some() {
            return Err(Error::Quadtree(
                "edge tags require a counter-clockwise domain polygon".into(),
            ));
        }
        let mut holes = Vec::new();
        for (k, h) in self.holes.iter().enumerate() {
            let h = orient(h, &format!("hole {k}"))?;
            if !is_convex_ccw(&h, 1e-12) {
                return Err(Error::Quadtree(format!("hole {k} is not convex")));
            }
            holes.push(h);
        }
        Ok((domain, holes))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuadtreeCell {
    pub level: u32,
    pub ix: u64,
    pub iy: u64,
}

/// Leaves of a quadtree over a square root cell.
#[derive(Debug, Clone)]
pub struct Quadtree {
    origin: Point2,
    size: f64,
    max_depth: u32,
    leaves: BTreeSet<QuadtreeCell>,
}

impl Quadtree {
    pub fn leaves(&self) -> impl Iterator<Item = &QuadtreeCell> {
        self.leaves.iter()
    }

    pub fn num_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn cell_rect(&self, c: &QuadtreeCell) -> [Point2; 4] {
        let h = self.size / (1u64 << c.level) as f64;
        let x0 = self.origin.x + c.ix as f64 * h;
        let y0 = self.origin.y + c.iy as f64 * h;
        let x1 = self.origin.x + (c.ix + 1) as f64 * h;
        let y1 = self.origin.y + (c.iy + 1) as f64 * h;
        [
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ]
    }

    fn finest_span(&self, c: &QuadtreeCell) -> u64 {
        1u64 << (self.max_depth - c.level)
    }

    /// Leaf covering the finest-level cell `(fx, fy)`.
    fn leaf_at(&self, fx: u64, fy: u64) -> Option<QuadtreeCell> {
        (0..=self.max_depth).find_map(|level| {
            let shift = self.max_depth - level;
            let c = QuadtreeCell {
                level,
                ix: fx >> shift,
                iy: fy >> shift,
            };
            self.leaves.contains(&c).then_some(c)
        })
    }

    /// Leaves sharing a side with `c`.
    pub fn edge_neighbors(&self, c: &QuadtreeCell) -> Vec<QuadtreeCell> {
        let s = self.finest_span(c);
        let n = 1u64 << self.max_depth;
        let (fx0, fy0) = (c.ix * s, c.iy * s);
        let mut out = BTreeSet::new();
        let mut walk = |fixed_is_x: bool, fixed: u64, start: u64| {
            let mut t = start;
            while t < start + s {
                let (fx, fy) = if fixed_is_x { (fixed, t) } else { (t, fixed) };
                match self.leaf_at(fx, fy) {
                    Some(l) => {
                        let ls = self.finest_span(&l);
                        let lstart = if fixed_is_x { l.iy * ls } else { l.ix * ls };
                        out.insert(l);
                        t = lstart + ls;
                    }
                    None => t += 1,
                }
            }
        };
        if fx0 + s < n {
            walk(true, fx0 + s, fy0);
        }
        if fx0 > 0 {
            walk(true, fx0 - 1, fy0);
        }
        if fy0 + s < n {
            walk(false, fy0 + s, fx0);
        }
        if fy0 > 0 {
            walk(false, fy0 - 1, fx0);
        }
        out.into_iter().collect()
    }

    fn split(&mut self, c: QuadtreeCell) {
        self.leaves.remove(&c);
        for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            self.leaves.insert(QuadtreeCell {
                level: c.level + 1,
                ix: 2 * c.ix + dx,
                iy: 2 * c.iy + dy,
            });
        }
    }

    /// Largest level difference between edge-adjacent leaves.
    pub fn max_neighbor_level_jump(&self) -> u32 {
        self.leaves
            .iter()
            .flat_map(|c| {
                self.edge_neighbors(c)
                    .into_iter()
                    .map(move |n| n.level.abs_diff(c.level))
            })
            .max()
            .unwrap_or(0)
    }
}

struct Region {
    domain: Vec<Point2>,
    holes: Vec<Vec<Point2>>,
    area_tol: f64,
}

impl Region {
    /// Pieces of `cell ∩ domain ∖ holes`, each convex when the cell lies fully
    /// inside the outer polygon.
    fn pieces(&self, cell: &[Point2], snap: f64) -> Vec<Vec<Point2>> {
        let first = dedup_ring(&clip_convex(&self.domain, cell), snap);
        if first.len() < 3 || signed_area(&first) <= self.area_tol {
            return Vec::new();
        }
        let mut pieces = vec![first];
        for hole in &self.holes {
            let mut next = Vec::new();
            for p in pieces {
                let overlap = dedup_ring(&clip_convex(&p, hole), snap);
                if overlap.len() < 3 || signed_area(&overlap) <= self.area_tol {
                    next.push(p);
                    continue;
                }
                let m = hole.len();
                for k in 0..m {
                    let (a, b) = (hole[k], hole[(k + 1) % m]);
                    let mut q = clip_half_plane(&p, b, a - b);
                    for j in 0..k {
                        if q.is_empty() {
                            break;
                        }
                        let (c, d) = (hole[j], hole[(j + 1) % m]);
                        q = clip_half_plane(&q, c, d - c);
                    }
                    let q = dedup_ring(&q, snap);
                    if q.len() >= 3 && signed_area(&q) > self.area_tol {
                        next.push(q);
                    }
                }
            }
            pieces = next;
        }
        pieces
    }

    fn cut_by_boundary(&self, cell: &[Point2; 4]) -> bool {
        let rings = std::iter::once(&self.domain).chain(self.holes.iter());
        for ring in rings {
            let n = ring.len();
            for i in 0..n {
                if segment_crosses_open_rect(ring[i], ring[(i + 1) % n], cell) {
                    return true;
                }
            }
        }
        false
    }
}

fn segment_crosses_open_rect(a: Point2, b: Point2, cell: &[Point2; 4]) -> bool {
    let (lo, hi) = (cell[0], cell[2]);
    let eps = 1e-12 * (hi.x - lo.x);
    let (lo, hi) = (
        Point2::new(lo.x + eps, lo.y + eps),
        Point2::new(hi.x - eps, hi.y - eps),
    );
    // Liang-Barsky
    let d = b - a;
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (p, q) in [
        (-d.x, a.x - lo.x),
        (d.x, hi.x - a.x),
        (-d.y, a.y - lo.y),
        (d.y, hi.y - a.y),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    t1 - t0 > 1e-12
}

fn target_touches(target: &RefineTarget, cell: &[Point2; 4]) -> bool {
    let (lo, hi) = (cell[0], cell[2]);
    let inside = |p: Point2| p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    match target {
        RefineTarget::Point { at } => inside(*at),
        RefineTarget::Segment { from, to } => {
            inside(*from)
                || inside(*to)
                || (0..4).any(|i| {
                    crate::geometry::segments_intersect(*from, *to, cell[i], cell[(i + 1) % 4], 0.0)
                })
        }
    }
}

/// Builds the (optionally balanced) quadtree leaves for `spec`.
pub fn build_quadtree(spec: &QuadtreeSpec) -> Result<Quadtree> {
    let (domain, holes) = spec.check()?;
    let (lo, hi) = bounding_box(&domain);
    let size = (hi.x - lo.x).max(hi.y - lo.y);
    let region = Region {
        area_tol: 1e-20 * size * size,
        domain,
        holes,
    };
    let snap = 1e-9 * bounding_diameter(&region.domain);
    let mut tree = Quadtree {
        origin: lo,
        size,
        max_depth: spec.max_depth,
        leaves: BTreeSet::new(),
    };
    tree.leaves.insert(QuadtreeCell {
        level: 0,
        ix: 0,
        iy: 0,
    });

    let mut stack: Vec<QuadtreeCell> = tree.leaves.iter().copied().collect();
    while let Some(c) = stack.pop() {
        if c.level >= spec.max_depth {
            continue;
        }
        let rect = tree.cell_rect(&c);
        if region.pieces(&rect, snap).is_empty() {
            continue;
        }
        let split = c.level < spec.min_depth
            || spec
                .refine_regions
                .iter()
                .any(|r| r.depth > c.level && target_touches(&r.target, &rect))
            || spec
                .boundary_depth
                .is_some_and(|d| d > c.level && region.cut_by_boundary(&rect));
        if split {
            tree.split(c);
            for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                stack.push(QuadtreeCell {
                    level: c.level + 1,
                    ix: 2 * c.ix + dx,
                    iy: 2 * c.iy + dy,
                });
            }
        }
    }

    if spec.balance {
        loop {
            let offenders: Vec<QuadtreeCell> = tree
                .leaves
                .iter()
                .filter(|c| {
                    tree.edge_neighbors(c)
                        .iter()
                        .any(|n| n.level > c.level + 1)
                })
                .copied()
                .collect();
            if offenders.is_empty() {
                break;
            }
            for c in offenders {
                tree.split(c);
            }
        }
    }
    Ok(tree)
}

struct VertexPool {
    tol: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
    points: Vec<Point2>,
}

impl VertexPool {
    fn new(tol: f64) -> Self {
        VertexPool {
            tol,
            buckets: HashMap::new(),
            points: Vec::new(),
        }
    }

    fn key(&self, p: Point2) -> (i64, i64) {
        let h = 4.0 * self.tol;
        ((p.x / h).floor() as i64, (p.y / h).floor() as i64)
    }

    fn get_or_insert(&mut self, p: Point2) -> usize {
        let (i, j) = self.key(p);
        for di in -1..=1 {
            for dj in -1..=1 {
                if let Some(b) = self.buckets.get(&(i + di, j + dj)) {
                    if let Some(&k) = b.iter().find(|&&k| self.points[k].dist(p) <= self.tol) {
                        return k;
                    }
                }
            }
        }
        let k = self.points.len();
        self.points.push(p);
        self.buckets.entry((i, j)).or_default().push(k);
        k
    }
}

impl Quadtree {
    /// Clipped leaves as polygons, before hanging nodes are absorbed.
    /// Leaves are visited bottom-to-top, left-to-right by their lower-left corner.
    pub fn raw_mesh(&self, spec: &QuadtreeSpec) -> Result<PolygonMesh> {
        let (domain, holes) = spec.check()?;
        let region = Region {
            area_tol: 1e-20 * self.size * self.size,
            domain,
            holes,
        };
        let snap = 1e-9 * bounding_diameter(&region.domain);
        let mut cells: Vec<QuadtreeCell> = self.leaves.iter().copied().collect();
        cells.sort_by_key(|c| {
            let s = self.finest_span(c);
            (c.iy * s, c.ix * s, c.level)
        });
        let mut pool = VertexPool::new(snap);
        let mut elements = Vec::new();
        for c in &cells {
            let rect = self.cell_rect(c);
            for piece in region.pieces(&rect, snap) {
                let mut ids: Vec<NodeId> = piece.iter().map(|p| pool.get_or_insert(*p)).collect();
                ids.dedup();
                while ids.len() > 1 && ids[0] == *ids.last().unwrap() {
                    ids.pop();
                }
                if ids.len() < 3 {
                    continue;
                }
                elements.push(PolygonElement::new(elements.len(), ids, spec.material.clone()));
            }
        }
        let nodes = pool
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| Node::new(i, p.x, p.y))
            .collect();
        PolygonMesh::new(nodes, elements, Vec::new())
    }
}

/// Inserts every mesh node that lies inside an element edge as a vertex of
/// that element. Tagged boundary edges that get split keep their tag.
pub fn polygonize_hanging_nodes(mesh: &PolygonMesh) -> PolygonMesh {
    let diam = mesh.bounding_diameter();
    let tol = 1e-9 * diam.max(f64::MIN_POSITIVE);
    let points = mesh.points();
    let grid = PointGrid::new(points.clone(), (diam / 256.0).max(tol));
    let nodes = mesh.nodes().to_vec();

    let split_chain = |pts: &[Point2]| edge_interior_points(pts, &grid, &points, tol);

    let elements = mesh
        .elements()
        .iter()
        .enumerate()
        .map(|(ei, e)| {
            let pts = mesh.element_points(ei);
            let inserts = split_chain(&pts);
            let mut ids = Vec::with_capacity(e.node_ids.len());
            for (k, &id) in e.node_ids.iter().enumerate() {
                ids.push(id);
                ids.extend(inserts[k].iter().map(|&j| nodes[j].id));
            }
            PolygonElement::new(e.id, ids, e.material.clone())
        })
        .collect();

    let mut boundary = Vec::new();
    for be in mesh.boundary_edges() {
        let a = mesh.node_by_id(be.nodes[0]).expect("validated").point();
        let b = mesh.node_by_id(be.nodes[1]).expect("validated").point();
        let inner = &split_chain(&[a, b])[0];
        let mut chain = vec![be.nodes[0]];
        chain.extend(inner.iter().map(|&j| nodes[j].id));
        chain.push(be.nodes[1]);
        for w in chain.windows(2) {
            boundary.push(BoundaryEdge::new(w[0], w[1], be.tag.clone()));
        }
    }
    PolygonMesh::new(nodes, elements, boundary).expect("node set unchanged")
}

/// Generates a conforming polygon mesh with tagged boundary edges.
pub fn generate_quadtree(spec: &QuadtreeSpec) -> Result<PolygonMesh> {
    let tree = build_quadtree(spec)?;
    let raw = tree.raw_mesh(spec)?;
    if raw.num_elements() == 0 {
        return Err(Error::Quadtree("no cell intersects the domain".into()));
    }
    let mut mesh = polygonize_hanging_nodes(&raw);
    let (domain, holes) = spec.check()?;
    let tol = 1e-9 * bounding_diameter(&domain);
    // Tag order follows the caller's vertex order.
    let outer = &spec.domain;
    let on = |p: Point2, q: Point2, a: Point2, b: Point2| {
        point_segment_distance(p, a, b) <= tol && point_segment_distance(q, a, b) <= tol
    };
    mesh.tag_free_edges(|p, q| {
        let n = outer.len();
        for i in 0..n {
            if on(p, q, outer[i], outer[(i + 1) % n]) {
                return Some(spec.edge_tag(i));
            }
        }
        for h in &holes {
            let m = h.len();
            if (0..m).any(|k| on(p, q, h[k], h[(k + 1) % m])) {
                return Some(IMPERMEABLE_TAG.to_string());
            }
        }
        None
    });
    let mut report_mesh = mesh.clone();
    let report = super::validate_mesh(&mut report_mesh);
    if !report.passed() {
        let list: Vec<String> = report.violations.iter().take(5).map(|v| v.to_string()).collect();
        return Err(Error::Quadtree(format!(
            "generated mesh failed validation ({} violations): {}",
            report.violations.len(),
            list.join("; ")
        )));
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_depth_two_unit_square() {
        let spec = QuadtreeSpec::rectangle(0.0, 0.0, 1.0, 1.0, 2).with_uniform_depth(2);
        let mesh = generate_quadtree(&spec).unwrap();
        assert_eq!(mesh.num_elements(), 16);
        assert_eq!(mesh.num_nodes(), 25);
        assert!(mesh.elements().iter().all(|e| e.node_ids.len() == 4));
        assert_eq!(mesh.nodes_with_tag("left").len(), 5);
        assert_eq!(mesh.edges_with_tag("top").len(), 4);
    }

    #[test]
    fn single_refined_quadrant_creates_pentagons() {
        let spec = QuadtreeSpec::rectangle(0.0, 0.0, 1.0, 1.0, 2)
            .with_uniform_depth(1)
            .with_refinement(
                RefineTarget::Point {
                    at: Point2::new(0.75, 0.25),
                },
                2,
            );
        let mesh = generate_quadtree(&spec).unwrap();
        assert_eq!(mesh.num_elements(), 7);
        let counts: Vec<usize> = mesh.elements().iter().map(|e| e.node_ids.len()).collect();
        assert_eq!(counts.iter().filter(|&&c| c == 5).count(), 2);
        assert_eq!(counts.iter().filter(|&&c| c == 4).count(), 5);
    }

    #[test]
    fn unreachable_depth_rejected() {
        let spec = QuadtreeSpec::rectangle(0.0, 0.0, 1.0, 1.0, 2).with_refinement(
            RefineTarget::Point {
                at: Point2::new(0.0, 0.0),
            },
            3,
        );
        assert!(matches!(build_quadtree(&spec), Err(Error::Quadtree(_))));
        let mut zero = QuadtreeSpec::rectangle(0.0, 0.0, 1.0, 1.0, 1);
        zero.max_depth = 0;
        assert!(build_quadtree(&zero).is_err());
    }

    #[test]
    fn self_intersecting_domain_rejected() {
        let spec = QuadtreeSpec::new(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 1.0),
            ],
            2,
        );
        assert!(generate_quadtree(&spec).is_err());
    }

    #[test]
    fn rectangle_domain_in_square_root() {
        let spec = QuadtreeSpec::rectangle(0.0, 0.0, 4.0, 1.0, 3).with_uniform_depth(3);
        let mesh = generate_quadtree(&spec).unwrap();
        // Root is 4x4, cells are 0.5 wide: 8 x 2 cells inside the strip.
        assert_eq!(mesh.num_elements(), 16);
        assert!((mesh.total_area().unwrap() - 4.0).abs() < 1e-12);
    }
}
