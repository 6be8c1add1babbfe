//! Bilinear quadrilateral finite elements, used only as an independent reference.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::model::{SeepageModel, TransientSettings};
use crate::recovery::HeadProbe;
use crate::sbfem::Conductivity;
use crate::solver::{
    boundary_flux_vector, initial_heads, integrate, solve_steady, GlobalSystem, SolutionField, SolutionHistory,
};
use nalgebra::{DMatrix, Matrix2, Vector2};

const GAUSS2: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];
const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

fn shape(s: f64, t: f64) -> ([f64; 4], [[f64; 2]; 4]) {
    let n = [
        0.25 * (1.0 - s) * (1.0 - t),
        0.25 * (1.0 + s) * (1.0 - t),
        0.25 * (1.0 + s) * (1.0 + t),
        0.25 * (1.0 - s) * (1.0 + t),
    ];
    let d = [
        [-0.25 * (1.0 - t), -0.25 * (1.0 - s)],
        [0.25 * (1.0 - t), -0.25 * (1.0 + s)],
        [0.25 * (1.0 + t), 0.25 * (1.0 + s)],
        [-0.25 * (1.0 + t), 0.25 * (1.0 - s)],
    ];
    (n, d)
}

fn jacobian(pts: &[Point2; 4], d: &[[f64; 2]; 4]) -> Matrix2<f64> {
    let mut j = Matrix2::zeros();
    for (p, dn) in pts.iter().zip(d) {
        j[(0, 0)] += dn[0] * p.x;
        j[(0, 1)] += dn[0] * p.y;
        j[(1, 0)] += dn[1] * p.x;
        j[(1, 1)] += dn[1] * p.y;
    }
    j
}

/// Conductivity and consistent storage matrices of one quadrilateral, 2x2 Gauss.
pub fn bilinear_matrices(pts: &[Point2; 4], k: Conductivity, ss: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let km = k.matrix();
    let mut kk = DMatrix::zeros(4, 4);
    let mut mm = DMatrix::zeros(4, 4);
    for &s in &GAUSS2 {
        for &t in &GAUSS2 {
            let (n, d) = shape(s, t);
            let j = jacobian(pts, &d);
            let det = j.determinant();
            if !(det > 0.0) {
                return Err(Error::Verification("quadrilateral is inverted or degenerate".into()));
            }
            let jinv = j.try_inverse().expect("det > 0");
            let grads: Vec<Vector2<f64>> = d.iter().map(|dn| jinv * Vector2::new(dn[0], dn[1])).collect();
            for a in 0..4 {
                for b in 0..4 {
                    kk[(a, b)] += det * grads[a].dot(&(km * grads[b]));
                    mm[(a, b)] += det * ss * n[a] * n[b];
                }
            }
        }
    }
    Ok(((&kk + kk.transpose()) * 0.5, mm))
}

/// Bilinear-FEM discretization of a model whose elements are all quadrilaterals.
/// Boundary handling and time stepping are those of the main solver.
#[derive(Debug, Clone)]
pub struct FemReference<'m> {
    pub model: &'m SeepageModel,
    pub system: GlobalSystem,
    pub inflow: Vec<f64>,
}

impl<'m> FemReference<'m> {
    pub fn new(model: &'m SeepageModel) -> Result<Self> {
        model.check()?;
        let mesh = &model.mesh;
        let mut mats = Vec::with_capacity(mesh.num_elements());
        let mut dofs = Vec::with_capacity(mesh.num_elements());
        for e in 0..mesh.num_elements() {
            let el = &mesh.elements()[e];
            if el.node_ids.len() != 4 {
                return Err(Error::Verification(format!(
                    "element {} has {} nodes; the FEM reference needs quadrilaterals",
                    el.id,
                    el.node_ids.len()
                )));
            }
            let p = mesh.element_points(e);
            let m = model.material_of(e);
            mats.push(bilinear_matrices(&[p[0], p[1], p[2], p[3]], Conductivity::from(m), m.ss)?);
            dofs.push(mesh.element_node_indices(e));
        }
        let system = GlobalSystem::from_element_matrices(
            mesh.num_nodes(),
            mesh.nodes().iter().map(|n| n.id).collect(),
            dofs.iter().zip(&mats).map(|(d, (k, m))| (d.as_slice(), k, m)),
        )?;
        Ok(FemReference {
            model,
            system,
            inflow: boundary_flux_vector(model),
        })
    }

    pub fn steady(&self, t: f64) -> Result<SolutionField> {
        solve_steady(&self.system, &self.model.dirichlet_at(t), &self.inflow)
    }

    pub fn run_with(&self, settings: &TransientSettings) -> Result<SolutionHistory> {
        let probes = self
            .model
            .monitors
            .iter()
            .map(|m| self.probe(m.at))
            .collect::<Result<Vec<_>>>()?;
        let h0 = initial_heads(self.model, &self.system, &self.inflow, &settings.initial)?;
        integrate(self.model, &self.system, &self.inflow, &probes, h0, settings)
    }

    fn quad(&self, e: usize) -> [Point2; 4] {
        let p = self.model.mesh.element_points(e);
        [p[0], p[1], p[2], p[3]]
    }

    /// Reference coordinates of `p` in element `e`, if it lies inside.
    fn inverse_map(&self, e: usize, p: Point2) -> Option<(f64, f64)> {
        let pts = self.quad(e);
        let (mut s, mut t) = (0.0, 0.0);
        for _ in 0..50 {
            let (n, d) = shape(s, t);
            let x = pts.iter().zip(n).fold(Point2::new(0.0, 0.0), |acc, (q, w)| acc + *q * w);
            let r = Vector2::new(x.x - p.x, x.y - p.y);
            let j = jacobian(&pts, &d);
            let step = j.transpose().try_inverse()? * r;
            s -= step[0];
            t -= step[1];
            if step.norm() < 1e-15 {
                break;
            }
        }
        const TOL: f64 = 1e-9;
        (s.abs() <= 1.0 + TOL && t.abs() <= 1.0 + TOL).then_some((s.clamp(-1.0, 1.0), t.clamp(-1.0, 1.0)))
    }

    /// Bilinear interpolation weights at `p`; the lowest element index wins on shared edges.
    pub fn probe(&self, p: Point2) -> Result<HeadProbe> {
        let mesh = &self.model.mesh;
        for e in 0..mesh.num_elements() {
            if let Some((s, t)) = self.inverse_map(e, p) {
                let (n, _) = shape(s, t);
                return Ok(HeadProbe {
                    dofs: mesh.element_node_indices(e),
                    weights: n.to_vec(),
                });
            }
        }
        Err(Error::Location { x: p.x, y: p.y })
    }

    /// Relative L2 error against an analytic head, 3x3 Gauss per element.
    pub fn l2_relative_error(&self, heads: &[f64], exact: &dyn Fn(Point2) -> f64) -> Result<f64> {
        let mesh = &self.model.mesh;
        let (mut num, mut den) = (0.0, 0.0);
        for e in 0..mesh.num_elements() {
            let pts = self.quad(e);
            let idx = mesh.element_node_indices(e);
            for &(s, ws) in &GAUSS3 {
                for &(t, wt) in &GAUSS3 {
                    let (n, d) = shape(s, t);
                    let w = ws * wt * jacobian(&pts, &d).determinant();
                    let x = pts.iter().zip(n).fold(Point2::new(0.0, 0.0), |acc, (q, c)| acc + *q * c);
                    let h: f64 = idx.iter().zip(n).map(|(&i, c)| c * heads[i]).sum();
                    let r = exact(x);
                    num += w * (h - r) * (h - r);
                    den += w * r * r;
                }
            }
        }
        if !(den > 0.0) {
            return Err(Error::Verification("reference field has zero norm".into()));
        }
        Ok((num / den).sqrt())
    }
}
