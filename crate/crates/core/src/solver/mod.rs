//! Global assembly, steady solve and backward Euler time stepping.

mod assembly;
mod driver;
mod linear;
mod sparse;

pub use assembly::{assemble_global, boundary_flux_vector, GlobalSystem};
pub use driver::{initial_heads, integrate, time_levels, Frame, MonitorTraces, Simulation, SolutionHistory};
pub use linear::{solve_steady, step_transient, SolutionField, TransientSolver};
pub use sparse::{reverse_cuthill_mckee, CsrMatrix, SkylineCholesky};
