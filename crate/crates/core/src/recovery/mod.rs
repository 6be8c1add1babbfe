//! Interior head and flux from boundary heads, point sampling and export.

mod export;

pub use export::{
    export_mesh_vtk, export_vtk, history_index_csv, monitor_csv, write_history_vtk, write_monitor_csv, write_vtk, Num,
};

use crate::error::{Error, Result};
use crate::geometry::{bounding_box, Point2};
use crate::mesh::PolygonMesh;
use crate::sbfem::{edge_shape, SElementOperator, C64};
use nalgebra::{DMatrix, DVector, Vector2};

/// Exponents closer than this to one count as the linear modes.
const UNIT_EXPONENT_TOL: f64 = 1e-8;

/// Scaled boundary coordinates of a point inside one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementLocation {
    pub element: usize,
    pub edge: usize,
    pub xi: f64,
    pub eta: f64,
}

/// Finds the sector of `op` containing `p`; `tol` is relative to the element size.
pub fn locate_in_element(op: &SElementOperator, p: Point2, tol: f64) -> Option<(usize, f64, f64)> {
    let g = &op.geometry;
    let r = p - g.center;
    let size = g.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if r.norm() <= tol * size {
        return Some((0, 0.0, 0.0));
    }
    for i in 0..g.num_nodes() {
        let (a, b) = g.edge(i);
        let (p1, p2) = (g.vertices[a], g.vertices[b]);
        let slack = tol * size * r.norm();
        if p1.cross(r) < -slack || r.cross(p2) < -slack {
            continue;
        }
        let d = p2 - p1;
        let xi = r.cross(d) / p1.cross(p2);
        if xi > 1.0 + tol || xi <= 0.0 {
            continue;
        }
        let t = (-r.cross(p1) / r.cross(d)).clamp(0.0, 1.0);
        return Some((i, xi.min(1.0), 2.0 * t - 1.0));
    }
    None
}

/// Locates `p` in the mesh; on shared edges the lowest element index wins.
pub fn locate_point(ops: &[SElementOperator], p: Point2) -> Result<ElementLocation> {
    const TOL: f64 = 1e-10;
    for (e, op) in ops.iter().enumerate() {
        let pts: Vec<Point2> = op.geometry.vertices.iter().map(|v| *v + op.geometry.center).collect();
        let (lo, hi) = bounding_box(&pts);
        let pad = TOL * (hi - lo).norm();
        if p.x < lo.x - pad || p.x > hi.x + pad || p.y < lo.y - pad || p.y > hi.y + pad {
            continue;
        }
        if let Some((edge, xi, eta)) = locate_in_element(op, p, TOL) {
            return Ok(ElementLocation {
                element: e,
                edge,
                xi,
                eta,
            });
        }
    }
    Err(Error::Location { x: p.x, y: p.y })
}

fn xi_pow(xi: f64, mu: C64) -> C64 {
    if xi == 0.0 {
        if mu.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    } else {
        (mu * xi.ln()).exp()
    }
}

/// Modal amplitudes of one element for given boundary heads.
#[derive(Debug, Clone)]
pub struct InteriorField<'a> {
    op: &'a SElementOperator,
    amplitudes: DVector<C64>,
}

impl<'a> InteriorField<'a> {
    /// `boundary_heads` are in the element's local node order.
    pub fn new(op: &'a SElementOperator, boundary_heads: &[f64]) -> Result<Self> {
        let n = op.num_nodes();
        if boundary_heads.len() != n {
            return Err(Error::OutOfRange(format!(
                "{} boundary heads for an element with {n} nodes",
                boundary_heads.len()
            )));
        }
        let hb = DVector::from_iterator(n, boundary_heads.iter().map(|&h| C64::new(h, 0.0)));
        let amplitudes = op
            .modal
            .psi_h
            .clone()
            .lu()
            .solve(&hb)
            .ok_or_else(|| Error::Decomposition("head eigenvector block is singular".into()))?;
        Ok(InteriorField { op, amplitudes })
    }

    fn check(&self, edge: usize, xi: f64, eta: f64) -> Result<()> {
        if edge >= self.op.num_nodes() {
            return Err(Error::OutOfRange(format!("edge {edge} does not exist")));
        }
        if !(0.0..=1.0).contains(&xi) || !(-1.0..=1.0).contains(&eta) {
            return Err(Error::OutOfRange(format!("(xi, eta) = ({xi}, {eta}) outside the sector")));
        }
        Ok(())
    }

    fn edge_values(&self, col: usize, edge: usize) -> (C64, C64) {
        let (a, b) = self.op.geometry.edge(edge);
        let psi = &self.op.modal.psi_h;
        (psi[(a, col)], psi[(b, col)])
    }

    pub fn head(&self, edge: usize, xi: f64, eta: f64) -> Result<f64> {
        self.check(edge, xi, eta)?;
        let (n, _) = edge_shape(eta);
        let mut h = C64::new(0.0, 0.0);
        for (i, mu) in self.op.modal.exponents.iter().enumerate() {
            let (pa, pb) = self.edge_values(i, edge);
            h += self.amplitudes[i] * xi_pow(xi, *mu) * (pa * n[0] + pb * n[1]);
        }
        Ok(h.re)
    }

    /// Darcy flux `-k grad h`. At the scaling center only the linear modes
    /// contribute; modes with `0 < Re(mu) < 1` make the flux unbounded there.
    pub fn flux(&self, edge: usize, xi: f64, eta: f64) -> Result<Vector2<f64>> {
        self.check(edge, xi, eta)?;
        let (b1, b2) = self.op.geometry.gradient_operators(edge, eta);
        let (n, dn) = edge_shape(eta);
        let mut grad = [C64::new(0.0, 0.0); 2];
        for (i, mu) in self.op.modal.exponents.iter().enumerate() {
            let c = self.amplitudes[i];
            if c.norm() == 0.0 {
                continue;
            }
            let weight = if xi == 0.0 {
                if mu.re > 0.0 && mu.re < 1.0 - UNIT_EXPONENT_TOL {
                    return Err(Error::OutOfRange(
                        "flux is singular at the scaling center".into(),
                    ));
                }
                if (mu - C64::new(1.0, 0.0)).norm() <= UNIT_EXPONENT_TOL {
                    C64::new(1.0, 0.0)
                } else {
                    continue;
                }
            } else {
                xi_pow(xi, mu - C64::new(1.0, 0.0))
            };
            let (pa, pb) = self.edge_values(i, edge);
            let nphi = pa * n[0] + pb * n[1];
            let dphi = pa * dn[0] + pb * dn[1];
            for (k, g) in grad.iter_mut().enumerate() {
                *g += c * weight * (mu * b1[k] * nphi + dphi * b2[k]);
            }
        }
        let g = Vector2::new(grad[0].re, grad[1].re);
        Ok(-(self.op.conductivity.matrix() * g))
    }

    /// Area-weighted mean of the flux sampled at `xi` on the mid-ray of every sector.
    pub fn mean_flux(&self, xi: f64) -> Result<Vector2<f64>> {
        let g = &self.op.geometry;
        let mut acc = Vector2::zeros();
        let mut w = 0.0;
        for i in 0..g.num_nodes() {
            let a = g.detj(i);
            acc += self.flux(i, xi, 0.0)? * a;
            w += a;
        }
        Ok(acc / w)
    }
}

/// Boundary heads of element `e`, taken from the global head vector.
pub fn element_heads(mesh: &PolygonMesh, e: usize, heads: &[f64]) -> Vec<f64> {
    mesh.element_node_indices(e).into_iter().map(|i| heads[i]).collect()
}

/// Head and flux at scaled boundary coordinates of one element.
pub fn recover_interior(
    op: &SElementOperator,
    boundary_heads: &[f64],
    edge: usize,
    xi: f64,
    eta: f64,
) -> Result<(f64, Vector2<f64>)> {
    let f = InteriorField::new(op, boundary_heads)?;
    Ok((f.head(edge, xi, eta)?, f.flux(edge, xi, eta)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSample {
    pub location: ElementLocation,
    pub head: f64,
    pub flux: Vector2<f64>,
}

/// Head and flux at a physical point.
pub fn sample_point(
    mesh: &PolygonMesh,
    ops: &[SElementOperator],
    heads: &[f64],
    p: Point2,
) -> Result<PointSample> {
    let location = locate_point(ops, p)?;
    let hb = element_heads(mesh, location.element, heads);
    let (head, flux) = recover_interior(
        &ops[location.element],
        &hb,
        location.edge,
        location.xi,
        location.eta,
    )?;
    Ok(PointSample {
        location,
        head,
        flux,
    })
}

/// Linear map from the global head vector to the head at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadProbe {
    pub dofs: Vec<usize>,
    pub weights: Vec<f64>,
}

impl HeadProbe {
    /// Probe through the interior field of the S-element containing `p`.
    pub fn new(mesh: &PolygonMesh, ops: &[SElementOperator], p: Point2) -> Result<Self> {
        let location = locate_point(ops, p)?;
        let op = &ops[location.element];
        let n = op.num_nodes();
        let mut weights = Vec::with_capacity(n);
        for k in 0..n {
            let mut unit = vec![0.0; n];
            unit[k] = 1.0;
            let f = InteriorField::new(op, &unit)?;
            weights.push(f.head(location.edge, location.xi, location.eta)?);
        }
        Ok(HeadProbe {
            dofs: mesh.element_node_indices(location.element),
            weights,
        })
    }

    pub fn eval(&self, heads: &[f64]) -> f64 {
        self.dofs.iter().zip(&self.weights).map(|(&d, w)| w * heads[d]).sum()
    }
}

/// Dense interpolation of the head at every given point (rows) from the dofs (columns).
pub fn interpolation_matrix(mesh: &PolygonMesh, ops: &[SElementOperator], points: &[Point2]) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(points.len(), mesh.num_nodes());
    for (r, p) in points.iter().enumerate() {
        let probe = HeadProbe::new(mesh, ops, *p)?;
        for (&d, &w) in probe.dofs.iter().zip(&probe.weights) {
            m[(r, d)] += w;
        }
    }
    Ok(m)
}
