//! Scaled boundary S-element operators.

mod coefficients;
mod modal;
mod operator;

pub use coefficients::{
    edge_shape, element_coefficients, CoefficientMatrices, Conductivity, ScaledBoundaryGeometry,
};
pub use modal::{build_hamiltonian, eigenvalues, modal_decomposition, ModalData, C64};
pub use operator::{
    mass_equation_residual, mass_matrix, steady_stiffness, SElementOperator,
};

use crate::error::{Error, Result};
use crate::model::SeepageModel;

/// Forms every element of the model, in element order.
pub fn form_elements(model: &SeepageModel) -> Result<Vec<SElementOperator>> {
    let mesh = &model.mesh;
    (0..mesh.num_elements())
        .map(|e| {
            let pts = mesh.element_points(e);
            SElementOperator::form(&pts, model.material_of(e)).map_err(|err| match err {
                Error::IllConditioned { message, .. } => Error::IllConditioned {
                    element: mesh.elements()[e].id,
                    message,
                },
                other => Error::Decomposition(format!("element {}: {other}", mesh.elements()[e].id)),
            })
        })
        .collect()
}
