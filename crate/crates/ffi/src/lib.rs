//! C ABI over the seepage solver.
//!
//! Models, solutions and histories are opaque handles created by `sbfem_*`
//! constructors and released with the matching `*_free`. Every fallible call
//! returns an [`SbfemStatus`]; on failure the message is available from
//! [`sbfem_last_error_message`] on the same thread.

use sbfem_seepage::geometry::Point2;
use sbfem_seepage::io::{load_model, parse_native_model};
use sbfem_seepage::model::SeepageModel;
use sbfem_seepage::recovery::{export_vtk, sample_point};
use sbfem_seepage::sbfem::SElementOperator;
use sbfem_seepage::solver::{Simulation, SolutionHistory};
use sbfem_seepage::verification::run_suite;
use sbfem_seepage::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbfemStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Model = 3,
    Solver = 4,
    Verification = 5,
    Io = 6,
    Panic = 7,
}

/// A checked model.
pub struct SbfemModel {
    model: SeepageModel,
}

/// Steady heads with the element operators needed to sample them.
pub struct SbfemSolution {
    model: SeepageModel,
    operators: Vec<SElementOperator>,
    heads: Vec<f64>,
}

/// Stored frames and monitor traces of a transient run.
pub struct SbfemHistory {
    history: SolutionHistory,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(SbfemStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io(_) => SbfemStatus::Io,
            Error::OutOfRange(_) => SbfemStatus::InvalidArgument,
            Error::Verification(_) => SbfemStatus::Verification,
            Error::IllConditioned { .. }
            | Error::Decomposition(_)
            | Error::MassSolve(_)
            | Error::SingularSystem(_)
            | Error::Solver(_) => SbfemStatus::Solver,
            _ => SbfemStatus::Model,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SbfemStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status and the thread's error message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SbfemStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SbfemStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SbfemStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SbfemStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, v: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

/// Copies `src` into `dst[..len]`; `len` must equal `src.len()`.
unsafe fn copy_out(src: &[f64], dst: *mut f64, len: usize) -> Result<(), Failure> {
    if dst.is_null() {
        return Err(null("output buffer"));
    }
    if len != src.len() {
        return Err(Failure(
            SbfemStatus::InvalidArgument,
            format!("buffer holds {len} values, {} required", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, len);
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns the length needed including the NUL.
/// Returns 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sbfem_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n - 1) = 0;
            }
            bytes.len()
        }
    })
}

/// Reads a model file: a native JSON model, or an `.inp` deck with an
/// optional JSON overlay (`overlay` may be null).
///
/// # Safety
/// `path` and `overlay` must be null or NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sbfem_model_load(
    path: *const c_char,
    overlay: *const c_char,
    out: *mut *mut SbfemModel,
) -> SbfemStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let overlay = if overlay.is_null() {
            None
        } else {
            Some(str_arg(overlay, "overlay")?)
        };
        let model = load_model(Path::new(path), overlay.map(Path::new))?;
        put(out, Box::into_raw(Box::new(SbfemModel { model })), "out")
    })
}

/// Parses a native JSON model from memory.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sbfem_model_from_json(json: *const c_char, out: *mut *mut SbfemModel) -> SbfemStatus {
    guard(|| {
        let model = parse_native_model(str_arg(json, "json")?)?;
        put(out, Box::into_raw(Box::new(SbfemModel { model })), "out")
    })
}

/// # Safety
/// `model` must be null or a handle from `sbfem_model_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sbfem_model_free(model: *mut SbfemModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sbfem_model_num_nodes(model: *const SbfemModel, out: *mut usize) -> SbfemStatus {
    guard(|| put(out, handle(model, "model")?.model.mesh.num_nodes(), "out"))
}

/// Node coordinates as `x0, y0, x1, y1, ...`; `len` must be twice the node count.
///
/// # Safety
/// `model` must be a live handle and `xy` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sbfem_model_node_coordinates(
    model: *const SbfemModel,
    xy: *mut f64,
    len: usize,
) -> SbfemStatus {
    guard(|| {
        let m = &handle(model, "model")?.model;
        let flat: Vec<f64> = m.mesh.nodes().iter().flat_map(|n| [n.x, n.y]).collect();
        copy_out(&flat, xy, len)
    })
}

/// Solves the steady problem with the boundary heads of `t = 0`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sbfem_solve_steady(model: *const SbfemModel, out: *mut *mut SbfemSolution) -> SbfemStatus {
    guard(|| {
        let m = &handle(model, "model")?.model;
        let sim = Simulation::new(m)?;
        let heads = sim.steady(0.0)?.heads;
        let solution = SbfemSolution {
            model: m.clone(),
            operators: sim.operators,
            heads,
        };
        put(out, Box::into_raw(Box::new(solution)), "out")
    })
}

/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbfem_solution_free(solution: *mut SbfemSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Nodal heads in model node order; `len` must equal the node count.
///
/// # Safety
/// `solution` must be a live handle and `heads` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sbfem_solution_heads(
    solution: *const SbfemSolution,
    heads: *mut f64,
    len: usize,
) -> SbfemStatus {
    guard(|| copy_out(&handle(solution, "solution")?.heads, heads, len))
}

/// Head and Darcy flux at an arbitrary point of the domain.
///
/// # Safety
/// `solution` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn sbfem_solution_sample(
    solution: *const SbfemSolution,
    x: f64,
    y: f64,
    head: *mut f64,
    qx: *mut f64,
    qy: *mut f64,
) -> SbfemStatus {
    guard(|| {
        let s = handle(solution, "solution")?;
        let p = sample_point(&s.model.mesh, &s.operators, &s.heads, Point2::new(x, y))?;
        put(head, p.head, "head")?;
        put(qx, p.flux[0], "qx")?;
        put(qy, p.flux[1], "qy")
    })
}

/// Writes the solution as a legacy VTK file.
///
/// # Safety
/// `solution` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sbfem_solution_write_vtk(solution: *const SbfemSolution, path: *const c_char) -> SbfemStatus {
    guard(|| {
        let s = handle(solution, "solution")?;
        let path = str_arg(path, "path")?;
        let text = export_vtk(&s.model.mesh, &s.operators, &s.heads, "steady head")?;
        std::fs::write(path, text).map_err(|e| Failure(SbfemStatus::Io, format!("{path}: {e}")))
    })
}

/// Runs the model's transient settings with backward Euler.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sbfem_run_transient(model: *const SbfemModel, out: *mut *mut SbfemHistory) -> SbfemStatus {
    guard(|| {
        let m = &handle(model, "model")?.model;
        let history = Simulation::new(m)?.run_transient()?;
        put(out, Box::into_raw(Box::new(SbfemHistory { history })), "out")
    })
}

/// # Safety
/// `history` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbfem_history_free(history: *mut SbfemHistory) {
    if !history.is_null() {
        drop(Box::from_raw(history));
    }
}

/// # Safety
/// `history` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sbfem_history_num_frames(history: *const SbfemHistory, out: *mut usize) -> SbfemStatus {
    guard(|| put(out, handle(history, "history")?.history.frames.len(), "out"))
}

/// Time and nodal heads of stored frame `index`.
///
/// # Safety
/// `history` must be a live handle, `t` writable and `heads` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sbfem_history_frame(
    history: *const SbfemHistory,
    index: usize,
    t: *mut f64,
    heads: *mut f64,
    len: usize,
) -> SbfemStatus {
    guard(|| {
        let h = &handle(history, "history")?.history;
        let f = h.frames.get(index).ok_or_else(|| {
            Failure(
                SbfemStatus::InvalidArgument,
                format!("frame {index} of {}", h.frames.len()),
            )
        })?;
        put(t, f.t, "t")?;
        copy_out(&f.heads, heads, len)
    })
}

/// Number of monitors and of time levels in their traces.
///
/// # Safety
/// `history` must be a live handle and the outputs writable.
#[no_mangle]
pub unsafe extern "C" fn sbfem_history_trace_shape(
    history: *const SbfemHistory,
    monitors: *mut usize,
    levels: *mut usize,
) -> SbfemStatus {
    guard(|| {
        let tr = &handle(history, "history")?.history.traces;
        put(monitors, tr.names.len(), "monitors")?;
        put(levels, tr.times.len(), "levels")
    })
}

/// Times of every level and the head history of monitor `monitor`, each `len` long.
///
/// # Safety
/// `history` must be a live handle; `times` and `values` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sbfem_history_trace(
    history: *const SbfemHistory,
    monitor: usize,
    times: *mut f64,
    values: *mut f64,
    len: usize,
) -> SbfemStatus {
    guard(|| {
        let tr = &handle(history, "history")?.history.traces;
        if monitor >= tr.names.len() {
            return Err(Failure(
                SbfemStatus::InvalidArgument,
                format!("monitor {monitor} of {}", tr.names.len()),
            ));
        }
        let column: Vec<f64> = tr.values.iter().map(|row| row[monitor]).collect();
        copy_out(&tr.times, times, len)?;
        copy_out(&column, values, len)
    })
}

/// Runs a named verification suite (`patch`, `convergence`, `oracle`).
/// Returns `Verification` when any of its checks fails.
///
/// # Safety
/// `name` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sbfem_run_suite(name: *const c_char) -> SbfemStatus {
    guard(|| {
        let report = run_suite(str_arg(name, "name")?)?;
        if report.passed() {
            Ok(())
        } else {
            Err(Failure(SbfemStatus::Verification, report.to_text()))
        }
    })
}
