use super::assembly::{assemble_global, boundary_flux_vector, GlobalSystem};
use super::linear::{solve_steady, SolutionField, TransientSolver};
use crate::error::{Error, Result};
use crate::model::{InitialHead, SeepageModel, TransientSettings};
use crate::recovery::HeadProbe;
use crate::sbfem::{form_elements, SElementOperator};
use std::time::Instant;

/// One stored time level.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub t: f64,
    pub heads: Vec<f64>,
}

/// Head history at the monitor points, recorded at every time level.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MonitorTraces {
    pub names: Vec<String>,
    pub times: Vec<f64>,
    /// `values[k][m]` is monitor `m` at `times[k]`.
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionHistory {
    /// Stored levels, strictly increasing in time, starting with the initial state.
    pub frames: Vec<Frame>,
    pub traces: MonitorTraces,
    /// Number of factorizations the stepper performed.
    pub factorizations: usize,
}

impl SolutionHistory {
    pub fn last(&self) -> &Frame {
        self.frames.last().expect("history is never empty")
    }
}

/// Time levels `0 = t_0 < t_1 < ... = t_end` with spacing `dt` (the last step may be shorter).
pub fn time_levels(t_end: f64, dt: f64) -> Vec<f64> {
    let ratio = t_end / dt;
    let n = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) {
        ratio.round() as usize
    } else {
        ratio.ceil() as usize
    };
    let mut t: Vec<f64> = (0..=n).map(|k| (k as f64 * dt).min(t_end)).collect();
    if let Some(last) = t.last_mut() {
        *last = t_end;
    }
    t.dedup();
    t
}

/// Formed element operators and assembled matrices of one model.
#[derive(Debug, Clone)]
pub struct Simulation<'m> {
    pub model: &'m SeepageModel,
    pub operators: Vec<SElementOperator>,
    pub system: GlobalSystem,
    pub inflow: Vec<f64>,
}

impl<'m> Simulation<'m> {
    pub fn new(model: &'m SeepageModel) -> Result<Self> {
        model.check()?;
        let started = Instant::now();
        let operators = form_elements(model)?;
        let system = assemble_global(&model.mesh, &operators)?;
        log::info!(
            "formed {} S-elements, {} dofs, {} stiffness entries in {:.3?}",
            operators.len(),
            system.num_dofs(),
            system.stiffness.nnz(),
            started.elapsed()
        );
        Ok(Simulation {
            model,
            operators,
            system,
            inflow: boundary_flux_vector(model),
        })
    }

    /// Steady solution with the boundary heads of time `t`.
    pub fn steady(&self, t: f64) -> Result<SolutionField> {
        solve_steady(&self.system, &self.model.dirichlet_at(t), &self.inflow)
    }

    /// Backward Euler run with the model's transient settings.
    pub fn run_transient(&self) -> Result<SolutionHistory> {
        let settings = self
            .model
            .transient
            .as_ref()
            .ok_or_else(|| Error::Model("model has no transient settings".into()))?;
        self.run_with(settings)
    }

    pub fn run_with(&self, settings: &TransientSettings) -> Result<SolutionHistory> {
        let probes = self
            .model
            .monitors
            .iter()
            .map(|m| HeadProbe::new(&self.model.mesh, &self.operators, m.at))
            .collect::<Result<Vec<_>>>()?;
        let h0 = initial_heads(self.model, &self.system, &self.inflow, &settings.initial)?;
        integrate(self.model, &self.system, &self.inflow, &probes, h0, settings)
    }
}

/// Initial state for a transient run. Prescribed heads at `t = 0` override given values.
pub fn initial_heads(
    model: &SeepageModel,
    system: &GlobalSystem,
    inflow: &[f64],
    initial: &InitialHead,
) -> Result<Vec<f64>> {
    let n = system.num_dofs();
    let mut h = match initial {
        InitialHead::Uniform(v) => vec![*v; n],
        InitialHead::Values(v) => {
            if v.len() != n {
                return Err(Error::Model(format!("initial head has {} values for {n} nodes", v.len())));
            }
            v.clone()
        }
        InitialHead::Steady => return Ok(solve_steady(system, &model.dirichlet_at(0.0), inflow)?.heads),
    };
    for (d, v) in model.dirichlet_at(0.0) {
        h[d] = v;
    }
    Ok(h)
}

/// Backward Euler integration of an assembled system from `h0`, shared by every discretization.
pub fn integrate(
    model: &SeepageModel,
    system: &GlobalSystem,
    inflow: &[f64],
    probes: &[HeadProbe],
    h0: Vec<f64>,
    settings: &TransientSettings,
) -> Result<SolutionHistory> {
    if !(settings.dt > 0.0 && settings.t_end >= settings.dt && settings.stride >= 1) {
        return Err(Error::Model("invalid transient settings".into()));
    }
    let names = if probes.len() == model.monitors.len() {
        model.monitors.iter().map(|m| m.name.clone()).collect()
    } else {
        (0..probes.len()).map(|i| format!("p{i}")).collect()
    };
    let mut traces = MonitorTraces {
        names,
        ..Default::default()
    };
    let mut record = |t: f64, h: &[f64]| {
        traces.times.push(t);
        traces.values.push(probes.iter().map(|p| p.eval(h)).collect());
    };

    let levels = time_levels(settings.t_end, settings.dt);
    let mut h = h0;
    record(0.0, &h);
    let mut frames = vec![Frame { t: 0.0, heads: h.clone() }];
    let mut stepper = TransientSolver::new(system);
    let started = Instant::now();
    let last = levels.len() - 1;
    for k in 1..levels.len() {
        let (t0, t1) = (levels[k - 1], levels[k]);
        let field = stepper.step(t1 - t0, &h, &model.dirichlet_at(t1), inflow)?;
        h = field.heads;
        record(t1, &h);
        if k % settings.stride == 0 || k == last {
            frames.push(Frame { t: t1, heads: h.clone() });
        }
    }
    log::info!(
        "{} time steps, {} factorizations, {:.3?}",
        last,
        stepper.factorizations(),
        started.elapsed()
    );
    Ok(SolutionHistory {
        frames,
        traces,
        factorizations: stepper.factorizations(),
    })
}
