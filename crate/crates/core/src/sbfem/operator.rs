use super::coefficients::{element_coefficients, CoefficientMatrices, Conductivity, ScaledBoundaryGeometry};
use super::modal::{build_hamiltonian, modal_decomposition, ModalData, C64};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::model::Material;
use nalgebra::DMatrix;

/// Tolerance on imaginary residue and asymmetry of the recovered real matrices.
const REALNESS_TOL: f64 = 1e-8;
/// Allowed residual of the mass equation relative to `||M0||`.
const MASS_RESIDUAL_TOL: f64 = 1e-8;

fn max_abs<T: Copy>(m: &DMatrix<T>, f: impl Fn(T) -> f64) -> f64 {
    m.iter().map(|v| f(*v)).fold(0.0, f64::max)
}

/// Drops the imaginary part after checking it is round-off, then symmetrizes.
fn realize_symmetric(m: &DMatrix<C64>, what: &str) -> Result<DMatrix<f64>> {
    let scale = max_abs(m, |c| c.norm()).max(f64::MIN_POSITIVE);
    let imag = max_abs(m, |c| c.im.abs());
    if imag > REALNESS_TOL * scale {
        return Err(Error::Decomposition(format!(
            "{what} has imaginary residue {:e} (relative)",
            imag / scale
        )));
    }
    let re = m.map(|c| c.re);
    let asym = max_abs(&(&re - re.transpose()), f64::abs);
    if asym > REALNESS_TOL * scale {
        return Err(Error::Decomposition(format!(
            "{what} is not symmetric (relative asymmetry {:e})",
            asym / scale
        )));
    }
    Ok((&re + re.transpose()) * 0.5)
}

/// `K = psi_q psi_h^-1`, real and symmetrized.
pub fn steady_stiffness(modal: &ModalData) -> Result<DMatrix<f64>> {
    // K psi_h = psi_q  <=>  psi_h^T K^T = psi_q^T
    let lu = modal.psi_h.transpose().lu();
    let kt = lu
        .solve(&modal.psi_q.transpose())
        .ok_or_else(|| Error::Decomposition("head eigenvector block is singular".into()))?;
    realize_symmetric(&kt.transpose(), "steady stiffness")
}

/// Residual `(K-E1) E0^-1 M + M E0^-1 (K-E1)^T + 2M - M0` of the low-frequency mass equation.
pub fn mass_equation_residual(
    c: &CoefficientMatrices,
    k_st: &DMatrix<f64>,
    mass: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let chol = c.e0.clone().cholesky().ok_or_else(|| Error::IllConditioned {
        element: usize::MAX,
        message: "E0 is not positive definite".into(),
    })?;
    let a = chol.solve(&(k_st - &c.e1).transpose()).transpose();
    Ok(&a * mass + mass * a.transpose() + mass * 2.0 - &c.m0)
}

/// Mass matrix from the modal form of the low-frequency expansion:
/// `m_ij = (Phi^T M0 Phi)_ij / (2 + mu_i + mu_j)`, `M = Phi^-T m Phi^-1` with `Phi = psi_h`.
/// Returns the matrix and the relative residual of the mass equation.
pub fn mass_matrix(
    modal: &ModalData,
    c: &CoefficientMatrices,
    k_st: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, f64)> {
    let n = modal.num_modes();
    let m0_norm = c.m0.norm();
    if m0_norm == 0.0 {
        return Ok((DMatrix::zeros(n, n), 0.0));
    }
    let phi = &modal.psi_h;
    let m0c = c.m0.map(|v| C64::new(v, 0.0));
    let r = phi.transpose() * m0c * phi;
    let mu = &modal.exponents;
    let m = DMatrix::from_fn(n, n, |i, j| r[(i, j)] / (C64::new(2.0, 0.0) + mu[i] + mu[j]));
    let lu = phi.transpose().lu();
    let x = lu
        .solve(&m)
        .ok_or_else(|| Error::MassSolve("head eigenvector block is singular".into()))?;
    let mt = lu
        .solve(&x.transpose())
        .ok_or_else(|| Error::MassSolve("head eigenvector block is singular".into()))?;
    let mass = realize_symmetric(&mt.transpose(), "mass matrix")
        .map_err(|e| Error::MassSolve(e.to_string()))?;
    let residual = mass_equation_residual(c, k_st, &mass)?.norm() / m0_norm;
    if !(residual < MASS_RESIDUAL_TOL) {
        return Err(Error::MassSolve(format!(
            "mass equation residual {residual:e} exceeds {MASS_RESIDUAL_TOL:e}"
        )));
    }
    Ok((mass, residual))
}

/// Everything the global solver and the field recovery need from one S-element.
#[derive(Debug, Clone)]
pub struct SElementOperator {
    pub geometry: ScaledBoundaryGeometry,
    pub conductivity: Conductivity,
    pub coefficients: CoefficientMatrices,
    pub modal: ModalData,
    pub stiffness: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    /// Relative residual of the mass equation.
    pub mass_residual: f64,
}

impl SElementOperator {
    /// Forms the operator of a counter-clockwise, star-convex polygon.
    pub fn form(points: &[Point2], material: &Material) -> Result<Self> {
        let geometry = ScaledBoundaryGeometry::from_polygon(points)?;
        Self::form_with(geometry, Conductivity::from(material), material.ss)
    }

    pub fn form_with(geometry: ScaledBoundaryGeometry, k: Conductivity, ss: f64) -> Result<Self> {
        // The Hamiltonian's off-diagonal blocks scale as 1/k and k, so the decomposition
        // runs on the conductivity normalized to unit magnitude and the result is scaled
        // back. Exponents and the mass matrix do not depend on that scale.
        let scale = k.xx.abs().max(k.yy.abs());
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Decomposition(format!("invalid conductivity {k:?}")));
        }
        let unit = Conductivity {
            xx: k.xx / scale,
            xy: k.xy / scale,
            yy: k.yy / scale,
        };
        let mut coefficients = element_coefficients(&geometry, unit, ss);
        let z = build_hamiltonian(&coefficients)?;
        let mut modal = modal_decomposition(&z)?;
        if modal.constant_mode().is_none() {
            return Err(Error::Decomposition(
                "S-element spectrum has no constant mode".into(),
            ));
        }
        let mut stiffness = steady_stiffness(&modal)?;
        let (mass, mass_residual) = mass_matrix(&modal, &coefficients, &stiffness)?;
        stiffness *= scale;
        modal.psi_q *= C64::new(scale, 0.0);
        coefficients.e0 *= scale;
        coefficients.e1 *= scale;
        coefficients.e2 *= scale;
        Ok(SElementOperator {
            geometry,
            conductivity: k,
            coefficients,
            modal,
            stiffness,
            mass,
            mass_residual,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.geometry.num_nodes()
    }

    /// Plain-text dump of the element matrices for external comparison.
    pub fn dump(&self, id: usize) -> String {
        let mut s = format!("element {id}\n");
        let mut block = |name: &str, m: &DMatrix<f64>| {
            s.push_str(name);
            s.push('\n');
            for r in 0..m.nrows() {
                let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:.17e}", m[(r, c)])).collect();
                s.push_str(&row.join(" "));
                s.push('\n');
            }
        };
        block("E0", &self.coefficients.e0);
        block("E1", &self.coefficients.e1);
        block("E2", &self.coefficients.e2);
        block("M0", &self.coefficients.m0);
        block("K", &self.stiffness);
        block("M", &self.mass);
        s
    }
}
