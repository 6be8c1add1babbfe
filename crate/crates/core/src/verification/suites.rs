//! Named verification suites run by the command-line tool.

use super::fem::FemReference;
use super::norms::{fan_quadrature, heads_at, l2_relative_error, Reference};
use super::ode::{ode_oracle, OdeProblem};
use super::problems::{dirichlet_problem, harmonic, patch_field, patch_meshes, MATERIAL};
use super::report::{convergence_study, Check, SuiteReport, VerificationReport};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::mesh::PolygonMesh;
use crate::model::{InitialHead, Material, NodeTarget, Schedule, SeepageModel, TransientSettings};
use crate::solver::{SolutionHistory, Simulation};
use nalgebra::DVector;

pub const SUITES: [&str; 3] = ["patch", "convergence", "oracle"];

pub fn run_suite(name: &str) -> Result<SuiteReport> {
    match name {
        "patch" => patch_suite(),
        "convergence" => convergence_suite(),
        "oracle" => oracle_suite(),
        other => Err(Error::OutOfRange(format!(
            "unknown suite '{other}' (expected one of {})",
            SUITES.join(", ")
        ))),
    }
}

/// Largest nodal and interior-sample error of the linear patch field on one mesh.
pub fn patch_errors(mesh: PolygonMesh) -> Result<(f64, f64)> {
    let model = dirichlet_problem(mesh, 1.0, &patch_field);
    let sim = Simulation::new(&model)?;
    let h = sim.steady(0.0)?.heads;
    let nodal = model
        .mesh
        .nodes()
        .iter()
        .zip(&h)
        .map(|(n, v)| (v - patch_field(n.point())).abs())
        .fold(0.0, f64::max);
    let qp = fan_quadrature(&sim.operators);
    let sampled = heads_at(&model.mesh, &sim.operators, &h, &qp)?
        .iter()
        .zip(&qp)
        .map(|(v, q)| (v - patch_field(q.point)).abs())
        .fold(0.0, f64::max);
    Ok((nodal, sampled))
}

pub fn patch_suite() -> Result<SuiteReport> {
    let mut report = SuiteReport {
        name: "patch".into(),
        ..Default::default()
    };
    for (name, mesh) in patch_meshes()? {
        let (nodal, sampled) = patch_errors(mesh)?;
        report.checks.push(Check::below(&format!("{name}: nodal error"), nodal, 1e-10));
        report.checks.push(Check::below(&format!("{name}: interior error"), sampled, 1e-10));
    }
    Ok(report)
}

/// Harmonic Dirichlet problem on an `n x n` unit-square grid: `(dofs, SBFEM error, FEM error)`.
pub fn unit_square_errors(n: usize) -> Result<(usize, f64, f64)> {
    let mesh = PolygonMesh::structured_quads(0.0, 1.0, 0.0, 1.0, n, n, MATERIAL)?;
    let model = dirichlet_problem(mesh, 1.0, &harmonic);
    let sim = Simulation::new(&model)?;
    let h = sim.steady(0.0)?.heads;
    let e_sbfem = l2_relative_error(&model.mesh, &sim.operators, &h, Reference::Analytic(&harmonic))?;
    let fem = FemReference::new(&model)?;
    let hf = fem.steady(0.0)?.heads;
    let e_fem = fem.l2_relative_error(&hf, &harmonic)?;
    Ok((model.mesh.num_nodes(), e_sbfem, e_fem))
}

pub const CONVERGENCE_SIZES: [usize; 4] = [4, 8, 16, 32];

/// SBFEM and FEM studies of the harmonic problem.
pub fn harmonic_studies() -> Result<(VerificationReport, VerificationReport)> {
    let sizes: Vec<f64> = CONVERGENCE_SIZES.iter().map(|&n| 1.0 / n as f64).collect();
    let results = CONVERGENCE_SIZES
        .iter()
        .map(|&n| unit_square_errors(n))
        .collect::<Result<Vec<_>>>()?;
    let lookup = |h: f64| {
        let k = sizes.iter().position(|&s| s == h).expect("known size");
        results[k]
    };
    let sb = convergence_study("PS-SBFEM, harmonic problem, relative L2 error", &sizes, |h| {
        let r = lookup(h);
        Ok((r.0, r.1))
    })?;
    let fe = convergence_study("bilinear FEM, harmonic problem, relative L2 error", &sizes, |h| {
        let r = lookup(h);
        Ok((r.0, r.2))
    })?;
    Ok((sb, fe))
}

pub fn convergence_suite() -> Result<SuiteReport> {
    let (sb, fe) = harmonic_studies()?;
    let mut checks = vec![Check::at_least(
        "final observed L2 rate",
        sb.final_rate().unwrap_or(0.0),
        1.9,
    )];
    for (a, b) in sb.rows.iter().zip(&fe.rows) {
        checks.push(Check {
            name: format!("{} dofs: SBFEM error / FEM error", a.n_dof),
            value: a.error / b.error,
            limit: "<= 1".into(),
            passed: a.error <= b.error,
        });
    }
    let patch = convergence_study("patch field, relative L2 error", &[0.5, 0.25, 0.125], |h| {
        let n = (1.0 / h).round() as usize;
        let mesh = PolygonMesh::structured_quads(0.0, 1.0, 0.0, 1.0, n, n, MATERIAL)?;
        let model = dirichlet_problem(mesh, 1.0, &patch_field);
        let sim = Simulation::new(&model)?;
        let heads = sim.steady(0.0)?.heads;
        let e = l2_relative_error(&model.mesh, &sim.operators, &heads, Reference::Analytic(&patch_field))?;
        Ok((model.mesh.num_nodes(), e))
    })?;
    checks.push(Check {
        name: "patch field study flagged exact".into(),
        value: patch.e_l2,
        limit: "exact".into(),
        passed: patch.exact,
    });
    Ok(SuiteReport {
        name: "convergence".into(),
        checks,
        studies: vec![sb, fe, patch],
    })
}

/// Small transient problem: unit square, 5x5 quads, left edge ramped 0 -> 1 over
/// `[0, 0.1]`, right edge held at 0, unit storage.
pub fn oracle_model() -> Result<SeepageModel> {
    let mesh = PolygonMesh::structured_quads(0.0, 1.0, 0.0, 1.0, 5, 5, MATERIAL)?;
    let mut model = SeepageModel::with_material(mesh, MATERIAL, Material::new(1.0, 0.5, 1.0));
    model.schedules.insert("ramp".into(), Schedule::new(vec![(0.0, 0.0), (0.1, 1.0)])?);
    model.add_scheduled_head("left", NodeTarget::Tag("left".into()), "ramp");
    model.add_head("right", NodeTarget::Tag("right".into()), 0.0);
    model.check()?;
    Ok(model)
}

pub const ORACLE_T_END: f64 = 0.5;
pub const ORACLE_OUTPUT_DT: f64 = 0.05;
pub const ORACLE_STEPS: [f64; 4] = [0.01, 0.005, 0.0025, 0.00125];

/// Backward Euler histories at the output times for each step size.
fn be_histories(sim: &Simulation) -> Result<Vec<SolutionHistory>> {
    ORACLE_STEPS
        .iter()
        .map(|&dt| {
            let settings = TransientSettings {
                t_end: ORACLE_T_END,
                dt,
                initial: InitialHead::Uniform(0.0),
                stride: (ORACLE_OUTPUT_DT / dt).round() as usize,
            };
            sim.run_with(&settings)
        })
        .collect()
}

/// Dense oracle of the oracle model at the output times, with time step `dt_oracle`.
pub fn oracle_reference(sim: &Simulation, dt_oracle: f64) -> Result<Vec<Vec<f64>>> {
    let model = sim.model;
    let n = sim.system.num_dofs();
    let times: Vec<f64> = (0..=(ORACLE_T_END / ORACLE_OUTPUT_DT).round() as usize)
        .map(|k| k as f64 * ORACLE_OUTPUT_DT)
        .collect();
    let dirichlet = |t: f64| model.dirichlet_at(t);
    let rate = |t: f64| model.dirichlet_rate_at(t);
    let problem = OdeProblem {
        stiffness: sim.system.stiffness.to_dense(),
        mass: sim.system.mass.to_dense(),
        inflow: DVector::from_vec(sim.inflow.clone()),
        dirichlet: &dirichlet,
        dirichlet_rate: &rate,
    };
    let mut h0 = vec![0.0; n];
    for (d, v) in model.dirichlet_at(0.0) {
        h0[d] = v;
    }
    ode_oracle(&problem, &h0, &times, dt_oracle)
}

fn max_history_error(history: &SolutionHistory, reference: &[Vec<f64>]) -> Result<f64> {
    if history.frames.len() != reference.len() {
        return Err(Error::Verification(format!(
            "history has {} frames, oracle {}",
            history.frames.len(),
            reference.len()
        )));
    }
    Ok(history
        .frames
        .iter()
        .zip(reference)
        .flat_map(|(f, r)| f.heads.iter().zip(r).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max))
}

/// Backward Euler error against the dense oracle for each step size, plus
/// the oracle's own change under step halving.
pub fn oracle_study() -> Result<(VerificationReport, f64)> {
    let model = oracle_model()?;
    let sim = Simulation::new(&model)?;
    let dt_oracle = ORACLE_STEPS[0] / 1000.0;
    let reference = oracle_reference(&sim, dt_oracle)?;
    let finer = oracle_reference(&sim, dt_oracle / 2.0)?;
    let self_change = reference
        .iter()
        .zip(&finer)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    let histories = be_histories(&sim)?;
    let n = sim.system.num_dofs();
    let mut report = convergence_study("backward Euler vs dense oracle, max nodal error", &ORACLE_STEPS, |dt| {
        let k = ORACLE_STEPS.iter().position(|&s| s == dt).expect("known step");
        Ok((n, max_history_error(&histories[k], &reference)?))
    })?;
    report.oracle_residuals.push(("oracle change under step halving".into(), self_change));
    Ok((report, self_change))
}

/// Largest change over ten steps when a steady state is stepped with unchanged boundary heads.
pub fn fixed_point_drift() -> Result<f64> {
    let mut model = oracle_model()?;
    model.dirichlet.clear();
    model.add_head("left", NodeTarget::Tag("left".into()), 1.0);
    model.add_head("right", NodeTarget::Tag("right".into()), 0.0);
    let sim = Simulation::new(&model)?;
    let steady = sim.steady(0.0)?.heads;
    let history = sim.run_with(&TransientSettings {
        t_end: 0.1,
        dt: 0.01,
        initial: InitialHead::Values(steady.clone()),
        stride: 1,
    })?;
    Ok(history
        .frames
        .iter()
        .flat_map(|f| f.heads.iter().zip(&steady).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max))
}

pub fn oracle_suite() -> Result<SuiteReport> {
    let (study, self_change) = oracle_study()?;
    let checks = vec![
        Check::within("observed order under step halving", study.final_rate().unwrap_or(0.0), 0.9, 1.1),
        Check::below("oracle self-convergence", self_change, 1e-10),
        Check::below("steady fixed point drift", fixed_point_drift()?, 1e-10),
    ];
    Ok(SuiteReport {
        name: "oracle".into(),
        checks,
        studies: vec![study],
    })
}

/// Head sampled at evenly spaced points along a segment, through the SBFEM interior field.
pub fn sample_line(sim: &Simulation, from: Point2, to: Point2, count: usize, heads: &[f64]) -> Result<Vec<f64>> {
    (0..count)
        .map(|i| {
            let p = from.lerp(to, i as f64 / (count - 1) as f64);
            Ok(crate::recovery::sample_point(&sim.model.mesh, &sim.operators, heads, p)?.head)
        })
        .collect()
}
