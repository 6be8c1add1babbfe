use crate::error::{Error, Result};
use crate::geometry::{bounding_diameter, polygon_area_centroid, Point2};
use crate::model::Material;
use nalgebra::{DMatrix, Matrix2, Vector2};

/// Symmetric 2x2 permeability tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conductivity {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Conductivity {
    pub fn diagonal(kx: f64, ky: f64) -> Self {
        Conductivity {
            xx: kx,
            xy: 0.0,
            yy: ky,
        }
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.xx, self.xy, self.xy, self.yy)
    }
}

impl From<&Material> for Conductivity {
    fn from(m: &Material) -> Self {
        Conductivity::diagonal(m.kx, m.ky)
    }
}

/// Boundary of an S-element seen from its scaling center.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledBoundaryGeometry {
    pub center: Point2,
    /// Vertex coordinates relative to the center, counter-clockwise.
    pub vertices: Vec<Point2>,
}

impl ScaledBoundaryGeometry {
    /// Uses the area centroid as scaling center.
    pub fn from_polygon(points: &[Point2]) -> Result<Self> {
        let (area, center) = polygon_area_centroid(points)?;
        if area <= 0.0 {
            return Err(Error::Geometry("polygon vertices are not counter-clockwise".into()));
        }
        Self::with_center(points, center)
    }

    pub fn with_center(points: &[Point2], center: Point2) -> Result<Self> {
        let geom = ScaledBoundaryGeometry {
            center,
            vertices: points.iter().map(|p| *p - center).collect(),
        };
        let scale = bounding_diameter(points);
        for i in 0..geom.num_nodes() {
            let j = geom.detj(i);
            if !(j > 1e-12 * scale * scale) {
                return Err(Error::Geometry(format!(
                    "edge {i} is not visible from the scaling center (|J_b| = {j:e})"
                )));
            }
        }
        Ok(geom)
    }

    pub fn num_nodes(&self) -> usize {
        self.vertices.len()
    }

    /// Bounding-box diagonal of the polygon.
    pub fn diameter(&self) -> f64 {
        bounding_diameter(&self.vertices)
    }

    /// Local node indices of edge `i`.
    pub fn edge(&self, i: usize) -> (usize, usize) {
        (i, (i + 1) % self.num_nodes())
    }

    /// Boundary Jacobian of edge `i`; constant along a straight edge.
    pub fn detj(&self, i: usize) -> f64 {
        let (a, b) = self.edge(i);
        0.5 * self.vertices[a].cross(self.vertices[b])
    }

    /// Boundary point of edge `i` at local coordinate `eta` (relative to the center).
    pub fn boundary_point(&self, i: usize, eta: f64) -> Point2 {
        let (a, b) = self.edge(i);
        self.vertices[a] * (0.5 * (1.0 - eta)) + self.vertices[b] * (0.5 * (1.0 + eta))
    }

    /// `b1` (constant per edge) and `b2(eta)` of the scaled-boundary gradient.
    pub fn gradient_operators(&self, i: usize, eta: f64) -> (Vector2<f64>, Vector2<f64>) {
        let (a, b) = self.edge(i);
        let d = (self.vertices[b] - self.vertices[a]) * 0.5;
        let xb = self.boundary_point(i, eta);
        let j = self.detj(i);
        (
            Vector2::new(d.y / j, -d.x / j),
            Vector2::new(-xb.y / j, xb.x / j),
        )
    }
}

/// Linear edge shape functions and their eta-derivatives.
pub fn edge_shape(eta: f64) -> ([f64; 2], [f64; 2]) {
    ([0.5 * (1.0 - eta), 0.5 * (1.0 + eta)], [-0.5, 0.5])
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrices {
    pub e0: DMatrix<f64>,
    pub e1: DMatrix<f64>,
    pub e2: DMatrix<f64>,
    pub m0: DMatrix<f64>,
}

const GAUSS2: [(f64, f64); 2] = [
    (-0.577_350_269_189_625_8, 1.0),
    (0.577_350_269_189_625_8, 1.0),
];

/// Boundary integrals `E0`, `E1`, `E2`, `M0` with two-point Gauss per edge,
/// exact for straight two-node edges.
pub fn element_coefficients(
    geom: &ScaledBoundaryGeometry,
    k: Conductivity,
    ss: f64,
) -> CoefficientMatrices {
    let n = geom.num_nodes();
    let kmat = k.matrix();
    let mut e0 = DMatrix::zeros(n, n);
    let mut e1 = DMatrix::zeros(n, n);
    let mut e2 = DMatrix::zeros(n, n);
    let mut m0 = DMatrix::zeros(n, n);
    for i in 0..n {
        let (a, b) = geom.edge(i);
        let dofs = [a, b];
        let j = geom.detj(i);
        for &(eta, w) in &GAUSS2 {
            let (nf, dn) = edge_shape(eta);
            let (b1, b2) = geom.gradient_operators(i, eta);
            let kb1 = kmat * b1;
            let kb2 = kmat * b2;
            let s11 = b1.dot(&kb1);
            let s21 = b2.dot(&kb1);
            let s22 = b2.dot(&kb2);
            for r in 0..2 {
                for c in 0..2 {
                    let (gr, gc) = (dofs[r], dofs[c]);
                    e0[(gr, gc)] += w * j * nf[r] * s11 * nf[c];
                    e1[(gr, gc)] += w * j * dn[r] * s21 * nf[c];
                    e2[(gr, gc)] += w * j * dn[r] * s22 * dn[c];
                    m0[(gr, gc)] += w * j * nf[r] * ss * nf[c];
                }
            }
        }
    }
    CoefficientMatrices { e0, e1, e2, m0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square2() -> ScaledBoundaryGeometry {
        let pts = [
            Point2::new(-1.0, -1.0),
            Point2::new(1.0, -1.0),
            Point2::new(1.0, 1.0),
            Point2::new(-1.0, 1.0),
        ];
        ScaledBoundaryGeometry::from_polygon(&pts).unwrap()
    }

    #[test]
    fn coefficient_matrices_symmetric() {
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.1),
            Point2::new(2.5, 1.5),
            Point2::new(0.7, 2.0),
            Point2::new(-0.4, 1.0),
        ];
        let g = ScaledBoundaryGeometry::from_polygon(&pts).unwrap();
        let c = element_coefficients(&g, Conductivity::diagonal(2.0, 0.5), 0.3);
        for m in [&c.e0, &c.e2, &c.m0] {
            assert!((m - m.transpose()).abs().max() < 1e-14);
        }
    }

    #[test]
    fn constant_vector_in_kernels() {
        let c = element_coefficients(&square2(), Conductivity::diagonal(1.0, 1.0), 1.0);
        let ones = nalgebra::DVector::from_element(4, 1.0);
        assert!((c.e1.transpose() * &ones).norm() < 1e-14);
        assert!((&c.e2 * &ones).norm() < 1e-14);
    }

    #[test]
    fn center_outside_kernel_is_rejected() {
        // Arrow-head: the centroid does not see the notch edges.
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(4.0, 0.2),
            Point2::new(0.2, 0.2),
            Point2::new(0.2, 4.0),
            Point2::new(0.0, 4.0),
        ];
        assert!(matches!(
            ScaledBoundaryGeometry::from_polygon(&pts),
            Err(Error::Geometry(_))
        ));
    }
}
