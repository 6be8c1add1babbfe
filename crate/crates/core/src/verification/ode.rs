//! Dense classical Runge-Kutta reference for `M h' + K h = Q`.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

pub const ODE_MAX_DOFS: usize = 500;

/// Time-dependent prescribed heads as `(dof, value)`; the dof set must not change.
pub type DirichletFn<'a> = &'a dyn Fn(f64) -> Vec<(usize, f64)>;

pub struct OdeProblem<'a> {
    pub stiffness: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub inflow: DVector<f64>,
    pub dirichlet: DirichletFn<'a>,
    /// Time derivative of the prescribed heads.
    pub dirichlet_rate: DirichletFn<'a>,
}

/// Heads at each of `times` (the first entry is the start time, state `h0`),
/// using fixed steps no longer than `dt_oracle`. Prescribed dofs are substituted exactly.
pub fn ode_oracle(p: &OdeProblem, h0: &[f64], times: &[f64], dt_oracle: f64) -> Result<Vec<Vec<f64>>> {
    let n = p.stiffness.nrows();
    if n > ODE_MAX_DOFS {
        return Err(Error::Verification(format!(
            "dense oracle limited to {ODE_MAX_DOFS} dofs, system has {n}"
        )));
    }
    if h0.len() != n || p.mass.shape() != (n, n) || p.inflow.len() != n {
        return Err(Error::Verification("oracle inputs have inconsistent sizes".into()));
    }
    if !(dt_oracle > 0.0) || times.is_empty() || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Verification("oracle needs a positive step and sorted output times".into()));
    }
    let t0 = times[0];
    let mut is_c = vec![false; n];
    for (d, _) in (p.dirichlet)(t0) {
        is_c[d] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&i| !is_c[i]).collect();
    let cons: Vec<usize> = (0..n).filter(|&i| is_c[i]).collect();
    let sub = |a: &DMatrix<f64>, r: &[usize], c: &[usize]| DMatrix::from_fn(r.len(), c.len(), |i, j| a[(r[i], c[j])]);
    let m_ff = sub(&p.mass, &free, &free);
    let chol = m_ff
        .cholesky()
        .ok_or_else(|| Error::Verification("free-free storage block is not positive definite".into()))?;
    // h_f' = A h_f + B h_c + C h_c' + M_ff^-1 Q_f
    let a = -chol.solve(&sub(&p.stiffness, &free, &free));
    let b = -chol.solve(&sub(&p.stiffness, &free, &cons));
    let c = -chol.solve(&sub(&p.mass, &free, &cons));
    let qf = chol.solve(&DVector::from_iterator(free.len(), free.iter().map(|&i| p.inflow[i])));
    let constrained = |f: DirichletFn, t: f64| -> DVector<f64> {
        let mut v = DVector::zeros(cons.len());
        for (d, x) in f(t) {
            if let Ok(k) = cons.binary_search(&d) {
                v[k] = x;
            }
        }
        v
    };
    // The rate is sampled once per step, at its midpoint, so kinks of piecewise-linear
    // schedules that fall on step boundaries are integrated exactly.
    let rhs = |t: f64, hf: &DVector<f64>, rate: &DVector<f64>| -> DVector<f64> {
        &a * hf + &b * constrained(p.dirichlet, t) + &c * rate + &qf
    };

    let mut hf = DVector::from_iterator(free.len(), free.iter().map(|&i| h0[i]));
    let mut t = t0;
    let mut out = Vec::with_capacity(times.len());
    let assemble = |hf: &DVector<f64>, t: f64| {
        let mut h = vec![0.0; n];
        for (k, &i) in free.iter().enumerate() {
            h[i] = hf[k];
        }
        let hc = constrained(p.dirichlet, t);
        for (k, &i) in cons.iter().enumerate() {
            h[i] = hc[k];
        }
        h
    };
    for &target in times {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / dt_oracle).ceil().max(1.0) as usize;
            let dt = span / steps as f64;
            for s in 0..steps {
                let ts = t + s as f64 * dt;
                let rate = constrained(p.dirichlet_rate, ts + 0.5 * dt);
                let k1 = rhs(ts, &hf, &rate);
                let k2 = rhs(ts + 0.5 * dt, &(&hf + &k1 * (0.5 * dt)), &rate);
                let k3 = rhs(ts + 0.5 * dt, &(&hf + &k2 * (0.5 * dt)), &rate);
                let k4 = rhs(ts + dt, &(&hf + &k3 * dt), &rate);
                hf += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            }
            t = target;
        }
        out.push(assemble(&hf, t));
    }
    Ok(out)
}
