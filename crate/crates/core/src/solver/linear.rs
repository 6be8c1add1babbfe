use super::assembly::GlobalSystem;
use super::sparse::{CsrMatrix, SkylineCholesky};
use crate::error::{Error, Result};

/// Maximum accepted normwise backward error of a linear solve.
const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    /// Head at every dof.
    pub heads: Vec<f64>,
    /// Net outflow `(K h - Q)` at each constrained dof (plus storage for transient steps).
    pub reactions: Vec<(usize, f64)>,
    /// `||A h - b|| / ||b||` over the free dofs (0 when there are none).
    pub residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_constraints(n: usize, dirichlet: &[(usize, f64)]) -> Result<Vec<usize>> {
    let mut c: Vec<usize> = dirichlet.iter().map(|&(d, _)| d).collect();
    c.sort_unstable();
    if c.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Solver("a dof is constrained twice".into()));
    }
    if let Some(&d) = c.last() {
        if d >= n {
            return Err(Error::Solver(format!("constrained dof {d} out of range")));
        }
    }
    if let Some((d, v)) = dirichlet.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Solver(format!("prescribed head {v} at dof {d} is not finite")));
    }
    Ok(c)
}

/// Factorization of the free-free block of a constrained operator.
#[derive(Debug, Clone)]
struct Reduced {
    constrained: Vec<usize>,
    free: Vec<usize>,
    a_ff: CsrMatrix,
    factor: Option<SkylineCholesky>,
}

impl Reduced {
    fn new(a: &CsrMatrix, constrained: Vec<usize>) -> Result<Self> {
        let mut is_c = vec![false; a.nrows()];
        for &c in &constrained {
            is_c[c] = true;
        }
        let free: Vec<usize> = (0..a.nrows()).filter(|&i| !is_c[i]).collect();
        let a_ff = a.submatrix(&free);
        let factor = if free.is_empty() {
            None
        } else {
            Some(SkylineCholesky::factor(&a_ff)?)
        };
        Ok(Reduced {
            constrained,
            free,
            a_ff,
            factor,
        })
    }

    /// Solves `A h = rhs` with `h` prescribed on the constrained dofs.
    fn solve(&self, a: &CsrMatrix, rhs: &[f64], dirichlet: &[(usize, f64)]) -> Result<(Vec<f64>, f64)> {
        let n = a.nrows();
        let mut h = vec![0.0; n];
        for &(d, v) in dirichlet {
            h[d] = v;
        }
        let Some(factor) = &self.factor else {
            return Ok((h, 0.0));
        };
        let lifted = a.mul_vec(&h);
        let b: Vec<f64> = self.free.iter().map(|&i| rhs[i] - lifted[i]).collect();
        let mut x = factor.solve(&b);
        let residual_of = |x: &[f64]| -> Vec<f64> {
            self.a_ff.mul_vec(x).iter().zip(&b).map(|(ax, bi)| ax - bi).collect()
        };
        let mut r = residual_of(&x);
        let scale = self.a_ff.norm_inf() * x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            + b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let backward = |r: &[f64]| {
            let rmax = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if scale > 0.0 { rmax / scale } else { rmax }
        };
        if backward(&r) > 1e-14 {
            // One step of iterative refinement.
            let dx = factor.solve(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi -= di;
            }
            r = residual_of(&x);
        }
        if !(backward(&r) < RESIDUAL_TOL) {
            return Err(Error::Solver(format!(
                "linear solve residual {:e} exceeds {RESIDUAL_TOL:e}",
                backward(&r)
            )));
        }
        let bn = norm(&b);
        let relative = if bn > 0.0 { norm(&r) / bn } else { norm(&r) };
        for (&i, xi) in self.free.iter().zip(x) {
            h[i] = xi;
        }
        Ok((h, relative))
    }
}

/// Steady solution of `K h = Q` with prescribed heads.
pub fn solve_steady(system: &GlobalSystem, dirichlet: &[(usize, f64)], inflow: &[f64]) -> Result<SolutionField> {
    let n = system.num_dofs();
    if dirichlet.is_empty() {
        return Err(Error::SingularSystem(
            "steady problem has no prescribed head; the head is undetermined".into(),
        ));
    }
    if inflow.len() != n {
        return Err(Error::Solver(format!("flux vector has {} entries for {n} dofs", inflow.len())));
    }
    let constrained = check_constraints(n, dirichlet)?;
    let reduced = Reduced::new(&system.stiffness, constrained)?;
    let (heads, residual) = reduced.solve(&system.stiffness, inflow, dirichlet)?;
    let kh = system.stiffness.mul_vec(&heads);
    let reactions = reduced.constrained.iter().map(|&c| (c, kh[c] - inflow[c])).collect();
    log::info!("steady solve: {} free dofs, residual {residual:.3e}", reduced.free.len());
    Ok(SolutionField {
        heads,
        reactions,
        residual,
    })
}

/// Backward Euler stepper for `M h' + K h = Q`. The factorization of
/// `K + M/dt` is reused while the step size and the constrained dofs are unchanged.
#[derive(Debug)]
pub struct TransientSolver<'a> {
    system: &'a GlobalSystem,
    cache: Option<(u64, CsrMatrix, Reduced)>,
    factorizations: usize,
}

impl<'a> TransientSolver<'a> {
    pub fn new(system: &'a GlobalSystem) -> Self {
        TransientSolver {
            system,
            cache: None,
            factorizations: 0,
        }
    }

    /// Number of factorizations performed so far.
    pub fn factorizations(&self) -> usize {
        self.factorizations
    }

    /// Advances `h_prev` by `dt` with the boundary data of the new time level.
    pub fn step(
        &mut self,
        dt: f64,
        h_prev: &[f64],
        dirichlet: &[(usize, f64)],
        inflow: &[f64],
    ) -> Result<SolutionField> {
        let n = self.system.num_dofs();
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Solver(format!("time step must be positive, got {dt}")));
        }
        if h_prev.len() != n || inflow.len() != n {
            return Err(Error::Solver("state or flux vector has the wrong length".into()));
        }
        let constrained = check_constraints(n, dirichlet)?;
        let reuse = matches!(&self.cache, Some((bits, _, r)) if *bits == dt.to_bits() && r.constrained == constrained);
        if reuse {
            log::debug!("reusing factorization (dt = {dt})");
        } else {
            let a = self.system.stiffness.add_scaled(&self.system.mass, 1.0 / dt);
            let reduced = Reduced::new(&a, constrained)?;
            self.factorizations += 1;
            log::debug!(
                "factorized K + M/dt (dt = {dt}, {} free dofs)",
                reduced.free.len()
            );
            self.cache = Some((dt.to_bits(), a, reduced));
        }
        let (_, a, reduced) = self.cache.as_ref().expect("cache filled");
        let mh = self.system.mass.mul_vec(h_prev);
        let rhs: Vec<f64> = inflow.iter().zip(&mh).map(|(q, m)| q + m / dt).collect();
        let (heads, residual) = reduced.solve(a, &rhs, dirichlet)?;
        let ah = a.mul_vec(&heads);
        let reactions = reduced
            .constrained
            .iter()
            .map(|&c| (c, ah[c] - rhs[c]))
            .collect();
        Ok(SolutionField {
            heads,
            reactions,
            residual,
        })
    }
}

/// One backward Euler step without factorization reuse.
pub fn step_transient(
    system: &GlobalSystem,
    dt: f64,
    h_prev: &[f64],
    dirichlet: &[(usize, f64)],
    inflow: &[f64],
) -> Result<SolutionField> {
    TransientSolver::new(system).step(dt, h_prev, dirichlet, inflow)
}
