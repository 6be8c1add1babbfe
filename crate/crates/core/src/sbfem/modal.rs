//! Hamiltonian matrix and its bounded-domain eigen-decomposition.
//!
//! With `X = {h; Q}` and `xi X' = Z X`, modes behave as `xi^lambda`, so the
//! bounded branch keeps the `n` eigenvalues with non-negative real part. They
//! are stored as exponents `mu = lambda >= 0`. The zero eigenvalue is double
//! and defective (constant head paired with a logarithmic mode); only its
//! constant-head eigenvector is kept.

use super::coefficients::CoefficientMatrices;
use crate::error::{Error, Result};
use nalgebra::{Complex, DMatrix, DVector, Schur, SVD};

pub type C64 = Complex<f64>;

/// Relative size below which the two smallest eigenvalues count as the zero pair.
const ZERO_PAIR_TOL: f64 = 1e-6;
/// Relative distance below which eigenvalues share one eigenspace.
const CLUSTER_TOL: f64 = 1e-8;
/// Relative residual below which `{1; 0}` is taken as an exact null vector.
const NULL_VECTOR_TOL: f64 = 1e-12;
const MAX_PSI_H_CONDITION: f64 = 1e10;

#[derive(Debug, Clone)]
pub struct ModalData {
    /// Exponents of the bounded modes; for S-elements exactly one is zero (the constant mode).
    pub exponents: Vec<C64>,
    /// Head block of the selected eigenvectors (n x n).
    pub psi_h: DMatrix<C64>,
    /// Flux block of the selected eigenvectors (n x n).
    pub psi_q: DMatrix<C64>,
    /// 2-norm condition number of `psi_h`.
    pub psi_h_condition: f64,
    /// Relative flux-block norm of the constant mode (ideally zero; NaN without one).
    pub constant_mode_flux: f64,
    /// Largest eigenvalue magnitude of the Hamiltonian matrix.
    pub spectral_radius: f64,
}

impl ModalData {
    pub fn num_modes(&self) -> usize {
        self.exponents.len()
    }

    /// Index of the constant (zero-exponent) mode, if the spectrum has one.
    pub fn constant_mode(&self) -> Option<usize> {
        self.exponents.iter().position(|m| m.norm() == 0.0)
    }
}

/// `Z_p = [-E0^-1 E1^T, E0^-1; E2 - E1 E0^-1 E1^T, E1 E0^-1]`.
pub fn build_hamiltonian(c: &CoefficientMatrices) -> Result<DMatrix<f64>> {
    let n = c.e0.nrows();
    let chol = c.e0.clone().cholesky().ok_or_else(|| Error::IllConditioned {
        element: usize::MAX,
        message: "E0 is not positive definite".into(),
    })?;
    let e0_inv = chol.inverse();
    let e0_inv_e1t = &e0_inv * c.e1.transpose();
    let e1_e0_inv = &c.e1 * &e0_inv;
    let mut z = DMatrix::zeros(2 * n, 2 * n);
    z.view_mut((0, 0), (n, n)).copy_from(&(-&e0_inv_e1t));
    z.view_mut((0, n), (n, n)).copy_from(&e0_inv);
    z.view_mut((n, 0), (n, n))
        .copy_from(&(&c.e2 - &c.e1 * &e0_inv_e1t));
    z.view_mut((n, n), (n, n)).copy_from(&e1_e0_inv);
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::IllConditioned {
            element: usize::MAX,
            message: "Hamiltonian matrix has non-finite entries".into(),
        });
    }
    Ok(z)
}

const SCHUR_ITERATIONS: usize = 2_000;
/// Diagonal shifts, relative to `||z||_inf`, tried in turn.
const SCHUR_SHIFTS: [f64; 4] = [0.0, 0.618_033_988_749_895, -0.414_213_562_373_095, 0.302_775_637_731_995];

/// All `2n` eigenvalues of a real matrix.
///
/// The QR iteration only deflates when a subdiagonal entry is small relative to
/// its diagonal neighbours, which can fail next to the (near-)defective zero
/// pair of an S-element. If the plain attempt stalls, `z + s I` is decomposed
/// instead and the shift removed from the eigenvalues.
pub fn eigenvalues(z: &DMatrix<f64>) -> Result<Vec<C64>> {
    let m = z.nrows();
    let scale = (0..m).map(|i| z.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    for (attempt, &c) in SCHUR_SHIFTS.iter().enumerate() {
        let shift = c * scale;
        let mut a = z.clone();
        for i in 0..m {
            a[(i, i)] += shift;
        }
        if let Some(schur) = Schur::try_new(a, f64::EPSILON, SCHUR_ITERATIONS) {
            return Ok(quasi_triangular_eigenvalues(&schur.unpack().1).into_iter().map(|l| l - shift).collect());
        }
        log::debug!("Schur attempt {attempt} stalled, retrying with a shift");
    }
    Err(Error::Decomposition("Schur iteration did not converge".into()))
}

/// Eigenvalues of a real Schur form. nalgebra's own version can return NaN
/// imaginary parts when a 2x2 block holds a (nearly) repeated real pair.
fn quasi_triangular_eigenvalues(t: &DMatrix<f64>) -> Vec<C64> {
    let m = t.nrows();
    let mut out = Vec::with_capacity(m);
    let mut i = 0;
    while i < m {
        if i + 1 < m && t[(i + 1, i)] != 0.0 {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let mid = 0.5 * (a + d);
            let disc = 0.25 * (a - d) * (a - d) + b * c;
            if disc >= 0.0 {
                let r = disc.sqrt();
                out.push(C64::new(mid + r, 0.0));
                out.push(C64::new(mid - r, 0.0));
            } else {
                let r = (-disc).sqrt();
                out.push(C64::new(mid, r));
                out.push(C64::new(mid, -r));
            }
            i += 2;
        } else {
            out.push(C64::new(t[(i, i)], 0.0));
            i += 1;
        }
    }
    out
}

/// The `k` right singular vectors of `a` with the smallest singular values,
/// plus the largest of those `k` singular values.
fn smallest_right_singular_vectors(a: DMatrix<C64>, k: usize) -> Result<(Vec<DVector<C64>>, f64)> {
    let svd = SVD::try_new(a, false, true, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Decomposition("SVD did not converge".into()))?;
    let v_t = svd.v_t.as_ref().expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let vecs = order[..k]
        .iter()
        .map(|&r| v_t.row(r).transpose().map(|c| c.conj()))
        .collect();
    Ok((vecs, svd.singular_values[order[k - 1]]))
}

/// `{1; 0}` (normalized) if it lies in the numerical null space of `z`.
fn constant_null_vector(z: &DMatrix<f64>) -> Option<DVector<C64>> {
    let n = z.nrows() / 2;
    let mut v = DVector::from_element(2 * n, C64::new(0.0, 0.0));
    v.rows_mut(0, n).fill(C64::new(1.0 / (n as f64).sqrt(), 0.0));
    let residual = z.columns(0, n).column_sum().norm() / (n as f64).sqrt();
    (residual <= NULL_VECTOR_TOL * z.norm()).then_some(v)
}

fn shifted(z: &DMatrix<f64>, shift: C64) -> DMatrix<C64> {
    let mut a = z.map(|v| C64::new(v, 0.0));
    for i in 0..a.nrows() {
        a[(i, i)] -= shift;
    }
    a
}

/// Selects the bounded-domain modes of `z`.
pub fn modal_decomposition(z: &DMatrix<f64>) -> Result<ModalData> {
    let m = z.nrows();
    if m % 2 != 0 || m < 2 {
        return Err(Error::Decomposition(format!("Hamiltonian has odd size {m}")));
    }
    let n = m / 2;
    let lambda = eigenvalues(z)?;
    let rho = lambda.iter().map(|l| l.norm()).fold(0.0, f64::max);
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Decomposition(format!("degenerate spectrum (radius {rho})")));
    }

    let mut by_size: Vec<usize> = (0..m).collect();
    by_size.sort_by(|&i, &j| lambda[i].norm().total_cmp(&lambda[j].norm()));
    // A uniform head with zero flux is an exact null vector of every S-element
    // Hamiltonian. The defective pair it belongs to is only resolved to about
    // sqrt(eps), so when the structure is there the pair is taken as given.
    let constant = constant_null_vector(z);
    let has_zero_pair = constant.is_some() || lambda[by_size[1]].norm() <= ZERO_PAIR_TOL * rho;
    let skip = if has_zero_pair { 2 } else { 0 };

    // Remaining spectrum: keep the growing branch.
    let mut selected: Vec<C64> = by_size[skip..]
        .iter()
        .map(|&i| lambda[i])
        .filter(|l| l.re > 0.0)
        .collect();
    let expected = if has_zero_pair { n - 1 } else { n };
    if selected.len() != expected {
        return Err(Error::Decomposition(format!(
            "selected {} modes with positive real part, expected {expected}",
            selected.len()
        )));
    }
    selected.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let mut exponents = Vec::with_capacity(n);
    let mut columns: Vec<DVector<C64>> = Vec::with_capacity(n);
    let mut constant_mode_flux = f64::NAN;

    if has_zero_pair {
        let best = match constant {
            Some(v) => v,
            None => {
                // Among the two null directions, the one carrying least flux.
                let (cands, _) = smallest_right_singular_vectors(shifted(z, C64::new(0.0, 0.0)), 2)?;
                cands
                    .into_iter()
                    .min_by(|a, b| a.rows(n, n).norm().total_cmp(&b.rows(n, n).norm()))
                    .expect("two candidates")
            }
        };
        constant_mode_flux = best.rows(n, n).norm() / best.norm();
        exponents.push(C64::new(0.0, 0.0));
        columns.push(best);
    }

    // Group repeated eigenvalues so each group gets an independent basis.
    let mut i = 0;
    while i < selected.len() {
        let mut j = i + 1;
        while j < selected.len() && (selected[j] - selected[i]).norm() <= CLUSTER_TOL * rho {
            j += 1;
        }
        let k = j - i;
        let shift = selected[i..j].iter().sum::<C64>() / k as f64;
        let (vecs, _) = smallest_right_singular_vectors(shifted(z, shift), k)?;
        for (v, l) in vecs.into_iter().zip(&selected[i..j]) {
            exponents.push(*l);
            columns.push(v);
        }
        i = j;
    }

    let mut psi_h = DMatrix::zeros(n, n);
    let mut psi_q = DMatrix::zeros(n, n);
    for (c, v) in columns.iter().enumerate() {
        let v = v / C64::new(v.norm(), 0.0);
        psi_h.set_column(c, &v.rows(0, n));
        psi_q.set_column(c, &v.rows(n, n));
    }

    let sv = psi_h.clone().singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(cond <= MAX_PSI_H_CONDITION) {
        return Err(Error::Decomposition(format!(
            "head eigenvector block is ill-conditioned (condition {cond:e})"
        )));
    }

    Ok(ModalData {
        exponents,
        psi_h,
        psi_q,
        psi_h_condition: cond,
        constant_mode_flux,
        spectral_radius: rho,
    })
}
