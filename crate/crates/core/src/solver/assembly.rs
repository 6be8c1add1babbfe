use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::mesh::PolygonMesh;
use crate::model::SeepageModel;
use crate::sbfem::SElementOperator;
use nalgebra::DMatrix;

/// Assembled conductance and storage matrices. Dof `i` is mesh node index `i`.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    /// Node id of every dof.
    pub dof_map: Vec<usize>,
}

impl GlobalSystem {
    pub fn num_dofs(&self) -> usize {
        self.dof_map.len()
    }

    /// Scatters element matrices given with their dof lists.
    pub fn from_element_matrices<'a>(
        n: usize,
        dof_map: Vec<usize>,
        elements: impl IntoIterator<Item = (&'a [usize], &'a DMatrix<f64>, &'a DMatrix<f64>)>,
    ) -> Result<Self> {
        let mut kt = Vec::new();
        let mut mt = Vec::new();
        for (e, (dofs, k, m)) in elements.into_iter().enumerate() {
            let nd = dofs.len();
            if k.shape() != (nd, nd) || m.shape() != (nd, nd) {
                return Err(Error::Solver(format!(
                    "element {e}: matrix size does not match its {nd} dofs"
                )));
            }
            let mut seen = dofs.to_vec();
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Solver(format!("element {e}: repeated dof")));
            }
            if let Some(&d) = dofs.iter().find(|&&d| d >= n) {
                return Err(Error::Solver(format!("element {e}: dof {d} out of range")));
            }
            for (a, &ra) in dofs.iter().enumerate() {
                for (b, &cb) in dofs.iter().enumerate() {
                    kt.push((ra, cb, k[(a, b)]));
                    mt.push((ra, cb, m[(a, b)]));
                }
            }
        }
        Ok(GlobalSystem {
            stiffness: CsrMatrix::from_triplets(n, kt),
            mass: CsrMatrix::from_triplets(n, mt),
            dof_map,
        })
    }
}

/// Global matrices of a mesh whose element operators are given in element order.
pub fn assemble_global(mesh: &PolygonMesh, ops: &[SElementOperator]) -> Result<GlobalSystem> {
    if ops.len() != mesh.num_elements() {
        return Err(Error::Solver(format!(
            "{} element operators for {} elements",
            ops.len(),
            mesh.num_elements()
        )));
    }
    let dofs: Vec<Vec<usize>> = (0..mesh.num_elements()).map(|e| mesh.element_node_indices(e)).collect();
    let dof_map = mesh.nodes().iter().map(|n| n.id).collect();
    GlobalSystem::from_element_matrices(
        mesh.num_nodes(),
        dof_map,
        dofs.iter()
            .zip(ops)
            .map(|(d, op)| (d.as_slice(), &op.stiffness, &op.mass)),
    )
}

/// Nodal inflow vector from the prescribed edge fluxes, split equally between edge ends.
pub fn boundary_flux_vector(model: &SeepageModel) -> Vec<f64> {
    let mesh = &model.mesh;
    let mut q = vec![0.0; mesh.num_nodes()];
    for set in &model.flux {
        for [a, b] in model.target_edges(&set.target) {
            let (Some(ia), Some(ib)) = (mesh.node_index(a), mesh.node_index(b)) else {
                continue;
            };
            let len = mesh.nodes()[ia].point().dist(mesh.nodes()[ib].point());
            let half = 0.5 * set.flux * len;
            q[ia] += half;
            q[ib] += half;
        }
    }
    q
}
