//! Command-line front end: `mesh`, `solve`, `verify` and `export`.
//!
//! Every command computes its outputs in memory first and only then writes
//! them, so a failed run leaves nothing in the output directory except
//! `failure.log`.

use crate::error::Error;
use crate::geometry::Point2;
use crate::io::{load_model, parse_solution, read_text, serialize_mesh, serialize_solution, SolutionKind, StoredSolution};
use crate::mesh::{generate_quadtree, QuadtreeSpec};
use crate::model::{InitialHead, Monitor, SeepageModel, TransientSettings};
use crate::recovery::{export_mesh_vtk, export_vtk, history_index_csv, monitor_csv, HeadProbe, Num};
use crate::solver::{Frame, MonitorTraces, Simulation, SolutionHistory};
use crate::verification::{run_suite, SuiteReport, SUITES};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ARGS: i32 = 1;
pub const EXIT_MODEL: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

pub const FAILURE_LOG: &str = "failure.log";

#[derive(Debug, Parser)]
#[command(name = "sbfem", version, about = "Polygonal SBFEM seepage solver")]
pub struct Cli {
    /// More log output (repeat for debug level).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a quadtree mesh from a JSON spec; writes mesh.json and mesh.vtk.
    Mesh {
        /// Quadtree spec (JSON).
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a model (native JSON or .inp deck), steady or transient.
    Solve(SolveArgs),
    /// Run named verification suites.
    Verify {
        /// Suite name, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-emit a stored solution (solution.json or a run directory).
    Export {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Vtk)]
        format: Format,
    },
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Problem overlay for .inp decks (storage, boundary conditions, transient settings).
    #[arg(long)]
    pub overlay: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Monitor point `NAME=(x,y)`; replaces the model's monitors. Repeatable.
    #[arg(long = "monitor", value_parser = parse_monitor)]
    pub monitors: Vec<Monitor>,
    #[arg(long, value_enum, default_value_t = Format::Vtk)]
    pub format: Format,
    /// Also write the element matrices to elements.txt.
    #[arg(long)]
    pub dump_elements: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Vtk,
    Csv,
}

/// Parses `NAME=(x,y)`; the parentheses are optional.
pub fn parse_monitor(s: &str) -> Result<Monitor, String> {
    let (name, rest) = s.split_once('=').ok_or("expected NAME=(x,y)")?;
    let name = name.trim();
    if name.is_empty() || name.contains(',') {
        return Err("monitor name must be non-empty and contain no commas".into());
    }
    let body = rest.trim();
    let body = body
        .strip_prefix('(')
        .and_then(|b| b.strip_suffix(')'))
        .unwrap_or(body);
    let coords: Vec<&str> = body.split(',').map(str::trim).collect();
    if coords.len() != 2 {
        return Err("expected two coordinates".into());
    }
    let parse = |c: &str| c.parse::<f64>().ok().filter(|v| v.is_finite());
    match (parse(coords[0]), parse(coords[1])) {
        (Some(x), Some(y)) => Ok(Monitor {
            name: name.to_string(),
            at: Point2::new(x, y),
        }),
        _ => Err(format!("invalid coordinates '{body}'")),
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::Model(_)
        | Error::InvalidMesh(_)
        | Error::Quadtree(_)
        | Error::Geometry(_)
        | Error::DegenerateGeometry(_)
        | Error::Location { .. }
        | Error::Io(_) => EXIT_MODEL,
        Error::IllConditioned { .. }
        | Error::Decomposition(_)
        | Error::MassSolve(_)
        | Error::SingularSystem(_)
        | Error::Solver(_) => EXIT_SOLVER,
        Error::OutOfRange(_) => EXIT_ARGS,
        Error::Verification(_) => EXIT_VERIFY,
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

fn args_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_ARGS,
        message: message.into(),
    }
}

/// Files produced by a command, written only once the whole run succeeded.
#[derive(Default)]
struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }
}

/// Runs the tool on `argv` (including the program name) and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_ARGS,
            };
        }
    };
    init_logging(cli.verbose);
    let out = match &cli.command {
        Command::Mesh { out, .. } | Command::Solve(SolveArgs { out, .. }) | Command::Export { out, .. } => {
            Some(out.clone())
        }
        Command::Verify { out, .. } => out.clone(),
    };
    if let Some(dir) = &out {
        if let Err(f) = prepare_out_dir(dir) {
            eprintln!("error: {}", f.message);
            return f.code;
        }
    }
    let result = match &cli.command {
        Command::Mesh { model, .. } => mesh_command(model),
        Command::Solve(args) => solve_command(args),
        Command::Verify { suite, .. } => verify_command(suite),
        Command::Export { model, format, .. } => export_command(model, *format),
    };
    let result = result.and_then(|(outputs, code)| {
        if let Some(dir) = &out {
            write_outputs(dir, &outputs)?;
        }
        Ok(code)
    });
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            if let Some(dir) = &out {
                let _ = fs::write(dir.join(FAILURE_LOG), format!("exit code {}\n{}\n", f.code, f.message));
            }
            f.code
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
}

/// The output directory must be new or empty; a stale failure log is removed.
fn prepare_out_dir(dir: &Path) -> Result<(), Failure> {
    if dir.exists() {
        if !dir.is_dir() {
            return Err(args_failure(format!("{} is not a directory", dir.display())));
        }
        let entries: Vec<_> = fs::read_dir(dir)
            .map_err(|e| args_failure(format!("cannot read {}: {e}", dir.display())))?
            .filter_map(|e| e.ok())
            .map(|e| e.file_name())
            .collect();
        if entries.iter().any(|n| n != FAILURE_LOG) {
            return Err(args_failure(format!("output directory {} is not empty", dir.display())));
        }
        if !entries.is_empty() {
            fs::remove_file(dir.join(FAILURE_LOG)).map_err(|e| args_failure(e.to_string()))?;
        }
    } else {
        fs::create_dir_all(dir).map_err(|e| args_failure(format!("cannot create {}: {e}", dir.display())))?;
    }
    Ok(())
}

/// Writes every output; if any write fails, the ones already written are removed.
fn write_outputs(dir: &Path, outputs: &Outputs) -> Result<(), Failure> {
    let mut written = Vec::new();
    for (name, contents) in &outputs.files {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, contents) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(Failure {
                code: EXIT_MODEL,
                message: format!("cannot write {}: {e}", path.display()),
            });
        }
        written.push(path);
    }
    Ok(())
}

type CommandResult = Result<(Outputs, i32), Failure>;

fn mesh_command(spec_path: &Path) -> CommandResult {
    let text = read_text(spec_path)?;
    let spec: QuadtreeSpec = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let mesh = generate_quadtree(&spec)?;
    log::info!("quadtree mesh: {} nodes, {} elements", mesh.num_nodes(), mesh.num_elements());
    let mut out = Outputs::default();
    out.add("mesh.json", serialize_mesh(&mesh));
    out.add("mesh.vtk", export_mesh_vtk(&mesh, "quadtree mesh"));
    Ok((out, EXIT_OK))
}

/// Applies the command-line overrides; all checks happen before any computation.
fn apply_overrides(model: &mut SeepageModel, args: &SolveArgs) -> Result<(), Failure> {
    for (name, v) in [("--dt", args.dt), ("--t-end", args.t_end)] {
        if let Some(v) = v {
            if !(v.is_finite() && v > 0.0) {
                return Err(args_failure(format!("{name} must be positive")));
            }
        }
    }
    match (&mut model.transient, args.dt, args.t_end) {
        (Some(t), dt, t_end) => {
            if let Some(dt) = dt {
                t.dt = dt;
            }
            if let Some(t_end) = t_end {
                t.t_end = t_end;
            }
        }
        (None, Some(dt), Some(t_end)) => {
            model.transient = Some(TransientSettings {
                t_end,
                dt,
                initial: InitialHead::Steady,
                stride: 1,
            })
        }
        (None, None, None) => {}
        (None, _, _) => {
            return Err(args_failure(
                "the model is steady; give both --dt and --t-end to run it transiently",
            ))
        }
    }
    if let Some(t) = &model.transient {
        if t.dt > t.t_end {
            return Err(args_failure(format!("dt = {} exceeds t_end = {}", t.dt, t.t_end)));
        }
    }
    if !args.monitors.is_empty() {
        model.monitors = args.monitors.clone();
    }
    Ok(())
}

fn solve_command(args: &SolveArgs) -> CommandResult {
    let mut model = load_model(&args.model, args.overlay.as_deref())?;
    apply_overrides(&mut model, args)?;
    let sim = Simulation::new(&model)?;
    let (kind, history) = if model.transient.is_some() {
        (SolutionKind::Transient, sim.run_transient()?)
    } else {
        let field = sim.steady(0.0)?;
        let probes = model
            .monitors
            .iter()
            .map(|m| HeadProbe::new(&model.mesh, &sim.operators, m.at))
            .collect::<crate::Result<Vec<_>>>()?;
        let traces = MonitorTraces {
            names: model.monitors.iter().map(|m| m.name.clone()).collect(),
            times: vec![0.0],
            values: vec![probes.iter().map(|p| p.eval(&field.heads)).collect()],
        };
        let mut out = steady_outputs(&model, &sim, &field.heads, args.format)?;
        out.add("reactions.csv", reactions_csv(&model, &field.reactions));
        let history = SolutionHistory {
            frames: vec![Frame {
                t: 0.0,
                heads: field.heads,
            }],
            traces,
            factorizations: 1,
        };
        return finish_solve(out, &model, &sim, SolutionKind::Steady, &history, args.dump_elements);
    };
    let out = transient_outputs(&model, &sim, &history, args.format)?;
    finish_solve(out, &model, &sim, kind, &history, args.dump_elements)
}

fn finish_solve(
    mut out: Outputs,
    model: &SeepageModel,
    sim: &Simulation,
    kind: SolutionKind,
    history: &SolutionHistory,
    dump_elements: bool,
) -> CommandResult {
    if !history.traces.names.is_empty() {
        out.add("monitors.csv", monitor_csv(&history.traces));
    }
    out.add("solution.json", serialize_solution(kind, model, history));
    if dump_elements {
        let mut s = String::new();
        for (e, op) in sim.operators.iter().enumerate() {
            s.push_str(&op.dump(model.mesh.elements()[e].id));
        }
        out.add("elements.txt", s);
    }
    Ok((out, EXIT_OK))
}

fn steady_outputs(model: &SeepageModel, sim: &Simulation, heads: &[f64], format: Format) -> Result<Outputs, Failure> {
    let mut out = Outputs::default();
    match format {
        Format::Vtk => out.add("heads.vtk", export_vtk(&model.mesh, &sim.operators, heads, "steady head")?),
        Format::Csv => out.add("heads.csv", nodal_csv(model, &[Frame { t: 0.0, heads: heads.to_vec() }], false)),
    }
    Ok(out)
}

fn transient_outputs(
    model: &SeepageModel,
    sim: &Simulation,
    history: &SolutionHistory,
    format: Format,
) -> Result<Outputs, Failure> {
    let mut out = Outputs::default();
    match format {
        Format::Vtk => {
            for (k, f) in history.frames.iter().enumerate() {
                out.add(
                    format!("heads_{k:06}.vtk"),
                    export_vtk(&model.mesh, &sim.operators, &f.heads, &format!("head at t = {}", Num(f.t)))?,
                );
            }
            out.add("frames.csv", history_index_csv(history));
        }
        Format::Csv => out.add("heads.csv", nodal_csv(model, &history.frames, true)),
    }
    Ok(out)
}

/// One row per node (and per frame when `with_time`).
fn nodal_csv(model: &SeepageModel, frames: &[Frame], with_time: bool) -> String {
    let mut s = String::from(if with_time { "t,node,x,y,head\n" } else { "node,x,y,head\n" });
    for f in frames {
        for (n, h) in model.mesh.nodes().iter().zip(&f.heads) {
            if with_time {
                let _ = write!(s, "{},", Num(f.t));
            }
            let _ = writeln!(s, "{},{},{},{}", n.id, Num(n.x), Num(n.y), Num(*h));
        }
    }
    s
}

fn reactions_csv(model: &SeepageModel, reactions: &[(usize, f64)]) -> String {
    let mut s = String::from("node,reaction\n");
    for &(d, r) in reactions {
        let _ = writeln!(s, "{},{}", model.mesh.nodes()[d].id, Num(r));
    }
    s
}

fn verify_command(suite: &str) -> CommandResult {
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&suite) {
        vec![suite]
    } else {
        return Err(args_failure(format!(
            "unknown suite '{suite}' (expected all or one of {})",
            SUITES.join(", ")
        )));
    };
    let reports: Vec<SuiteReport> = names.iter().map(|n| run_suite(n)).collect::<crate::Result<_>>()?;
    let mut out = Outputs::default();
    let mut text = String::new();
    for r in &reports {
        text.push_str(&r.to_text());
        text.push('\n');
        out.add(format!("{}.csv", r.name), r.to_csv());
        for (k, st) in r.studies.iter().enumerate() {
            out.add(format!("{}_study{}.csv", r.name, k + 1), st.to_csv());
        }
    }
    print!("{text}");
    out.add("report.txt", text);
    let code = if reports.iter().all(SuiteReport::passed) {
        EXIT_OK
    } else {
        EXIT_VERIFY
    };
    Ok((out, code))
}

fn export_command(path: &Path, format: Format) -> CommandResult {
    let file = if path.is_dir() {
        path.join("solution.json")
    } else {
        path.to_path_buf()
    };
    let text = read_text(&file)?;
    let StoredSolution { kind, model, history } = parse_solution(&text)?;
    let sim = Simulation::new(&model)?;
    let mut out = match kind {
        SolutionKind::Steady => steady_outputs(&model, &sim, &history.last().heads, format)?,
        SolutionKind::Transient => transient_outputs(&model, &sim, &history, format)?,
    };
    if !history.traces.names.is_empty() {
        out.add("monitors.csv", monitor_csv(&history.traces));
    }
    Ok((out, EXIT_OK))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monitor_syntax() {
        let m = parse_monitor("P=(40, 20)").unwrap();
        assert_eq!(m.name, "P");
        assert_eq!(m.at, Point2::new(40.0, 20.0));
        assert_eq!(parse_monitor("Q=1.5,-2").unwrap().at, Point2::new(1.5, -2.0));
        assert!(parse_monitor("P(1,2)").is_err());
        assert!(parse_monitor("=(1,2)").is_err());
        assert!(parse_monitor("P=(1,2,3)").is_err());
        assert!(parse_monitor("P=(x,2)").is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&Error::parse(3, "x")), EXIT_MODEL);
        assert_eq!(exit_code(&Error::SingularSystem("x".into())), EXIT_SOLVER);
        assert_eq!(exit_code(&Error::Verification("x".into())), EXIT_VERIFY);
    }

    #[test]
    fn bad_arguments_exit_1() {
        assert_eq!(run_cli(["sbfem", "solve", "--model"]), EXIT_ARGS);
        assert_eq!(run_cli(["sbfem", "frobnicate"]), EXIT_ARGS);
    }
}
