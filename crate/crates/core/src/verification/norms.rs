use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::mesh::PolygonMesh;
use crate::recovery::{element_heads, InteriorField};
use crate::sbfem::SElementOperator;

/// Barycentric points of the symmetric 3-point rule (exact for quadratics).
const TRI3: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];

/// A quadrature point with its scaled boundary coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub element: usize,
    pub edge: usize,
    pub xi: f64,
    pub eta: f64,
    pub point: Point2,
    pub weight: f64,
}

/// Triangle fan from each scaling center, three points per triangle.
pub fn fan_quadrature(ops: &[SElementOperator]) -> Vec<QuadPoint> {
    let mut out = Vec::new();
    for (e, op) in ops.iter().enumerate() {
        let g = &op.geometry;
        for i in 0..g.num_nodes() {
            let (a, b) = g.edge(i);
            let (p1, p2) = (g.vertices[a], g.vertices[b]);
            let area = g.detj(i);
            for [_, a1, a2] in TRI3 {
                let xi = a1 + a2;
                let t = a2 / xi;
                out.push(QuadPoint {
                    element: e,
                    edge: i,
                    xi,
                    eta: 2.0 * t - 1.0,
                    point: g.center + p1 * a1 + p2 * a2,
                    weight: area / 3.0,
                });
            }
        }
    }
    out
}

/// Semi-analytic interior head of an SBFEM solution at the given points.
pub fn heads_at(mesh: &PolygonMesh, ops: &[SElementOperator], heads: &[f64], points: &[QuadPoint]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(points.len());
    let mut cached: Option<(usize, InteriorField)> = None;
    for q in points {
        if cached.as_ref().is_none_or(|(e, _)| *e != q.element) {
            let f = InteriorField::new(&ops[q.element], &element_heads(mesh, q.element, heads))?;
            cached = Some((q.element, f));
        }
        let (_, f) = cached.as_ref().expect("filled");
        out.push(f.head(q.edge, q.xi, q.eta)?);
    }
    Ok(out)
}

/// What an SBFEM head field is compared against.
pub enum Reference<'a> {
    Analytic(&'a dyn Fn(Point2) -> f64),
    /// Nodal heads on the same mesh, interpolated the same way.
    Field(&'a [f64]),
}

fn ratio(num: f64, den: f64) -> Result<f64> {
    if !(den > 0.0) {
        return Err(Error::Verification("reference field has zero norm".into()));
    }
    Ok((num / den).sqrt())
}

/// `sqrt(int (h - h_ref)^2) / sqrt(int h_ref^2)` over the mesh.
pub fn l2_relative_error(
    mesh: &PolygonMesh,
    ops: &[SElementOperator],
    heads: &[f64],
    reference: Reference,
) -> Result<f64> {
    if heads.len() != mesh.num_nodes() {
        return Err(Error::Verification("head vector does not match the mesh".into()));
    }
    let qp = fan_quadrature(ops);
    let h = heads_at(mesh, ops, heads, &qp)?;
    let r = match reference {
        Reference::Analytic(f) => qp.iter().map(|q| f(q.point)).collect(),
        Reference::Field(hr) => {
            if hr.len() != heads.len() {
                return Err(Error::Verification("reference field does not match the mesh".into()));
            }
            heads_at(mesh, ops, hr, &qp)?
        }
    };
    let (mut num, mut den) = (0.0, 0.0);
    for ((q, a), b) in qp.iter().zip(&h).zip(&r) {
        num += q.weight * (a - b) * (a - b);
        den += q.weight * b * b;
    }
    ratio(num, den)
}

/// `sqrt(sum (v - ref)^2) / sqrt(sum ref^2)` over a set of sampled values.
pub fn pointwise_relative_error(values: &[f64], reference: &[f64]) -> Result<f64> {
    if values.len() != reference.len() || values.is_empty() {
        return Err(Error::Verification("value and reference lists differ in length".into()));
    }
    let num: f64 = values.iter().zip(reference).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = reference.iter().map(|b| b * b).sum();
    ratio(num, den)
}
