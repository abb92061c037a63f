//! C ABI over the airyedge toolkit. Every object crosses the boundary as an
//! opaque handle; every fallible call returns a status code and stores a
//! human-readable message retrievable through `airyedge_last_error_message`.
//! Out-parameters marked optional may be null to skip that field. String
//! buffers are always NUL-terminated; a truncated copy reports
//! `BufferTooSmall` after writing what fits.
//!
//! Safety contract, shared by every `unsafe` entry point: handle arguments
//! must be null or values returned by this library that have not been freed;
//! pointer/length pairs must describe writable memory of at least that
//! length; handles must not be used concurrently from multiple threads.
//! Null handles and mismatched lengths are caught and reported, dangling or
//! undersized pointers cannot be.
#![warn(unsafe_op_in_unsafe_fn)]
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use airyedge::ensemble::BetaEnsembleSpec;
use airyedge::minors::{compute_trajectory, spectral_weight_samples, Trajectory};
use airyedge::randvar::{BrownianGrid, RngStream};
use airyedge::sao::{derivative_check, sample_path_for, solve_domain};
use airyedge::verify::{criterion_name, run_criterion, NUM_CRITERIA};
use airyedge::Error;

/// Status code of every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AiryEdgeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Dimension = 3,
    Convergence = 4,
    Interlacing = 5,
    InsufficientSamples = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Opaque deterministic random stream handle.
pub struct AiryEdgeStream(RngStream);

/// Opaque coupled-trajectory handle.
pub struct AiryEdgeTrajectory(Trajectory);

/// Opaque Brownian path handle.
pub struct AiryEdgePath(BrownianGrid);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(msg: impl Into<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> AiryEdgeStatus {
    match err {
        Error::InvalidParameter(_) => AiryEdgeStatus::InvalidParameter,
        Error::Dimension(_) => AiryEdgeStatus::Dimension,
        Error::Convergence(_) => AiryEdgeStatus::Convergence,
        Error::Interlacing(_) => AiryEdgeStatus::Interlacing,
        Error::InsufficientSamples(_) => AiryEdgeStatus::InsufficientSamples,
        Error::Io(_) => AiryEdgeStatus::Io,
    }
}

fn fail(err: Error) -> AiryEdgeStatus {
    let status = status_of(&err);
    set_last_error(err.to_string());
    status
}

fn null_pointer(what: &str) -> AiryEdgeStatus {
    set_last_error(format!("{what} must not be null"));
    AiryEdgeStatus::NullPointer
}

/// Panics must not unwind into C.
fn guarded(f: impl FnOnce() -> AiryEdgeStatus) -> AiryEdgeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic caught at the C boundary");
            AiryEdgeStatus::Panic
        }
    }
}

/// NUL-terminated copy into `buf`; reports truncation.
fn copy_cstr(text: &str, buf: *mut c_char, len: usize) -> AiryEdgeStatus {
    if buf.is_null() {
        return null_pointer("buffer");
    }
    if len == 0 {
        set_last_error("buffer length must be at least 1");
        return AiryEdgeStatus::BufferTooSmall;
    }
    let bytes = text.as_bytes();
    let keep = bytes.len().min(len - 1);
    unsafe {
        std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, keep);
        *buf.add(keep) = 0;
    }
    if keep < bytes.len() {
        set_last_error(format!("buffer holds {keep} of {} bytes", bytes.len()));
        AiryEdgeStatus::BufferTooSmall
    } else {
        AiryEdgeStatus::Ok
    }
}

unsafe fn stream_mut<'a>(handle: *mut AiryEdgeStream) -> Option<&'a mut RngStream> {
    unsafe { handle.as_mut() }.map(|h| &mut h.0)
}

/// Library version string.
#[no_mangle]
pub unsafe extern "C" fn airyedge_version(buf: *mut c_char, len: usize) -> AiryEdgeStatus {
    copy_cstr(env!("CARGO_PKG_VERSION"), buf, len)
}

/// Message describing the most recent failure on this thread.
#[no_mangle]
pub unsafe extern "C" fn airyedge_last_error_message(
    buf: *mut c_char,
    len: usize,
) -> AiryEdgeStatus {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        if buf.is_null() {
            return AiryEdgeStatus::NullPointer;
        }
        if len == 0 {
            return AiryEdgeStatus::BufferTooSmall;
        }
        let bytes = msg.as_bytes();
        let keep = bytes.len().min(len - 1);
        unsafe {
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, keep);
            *buf.add(keep) = 0;
        }
        if keep < bytes.len() {
            AiryEdgeStatus::BufferTooSmall
        } else {
            AiryEdgeStatus::Ok
        }
    })
}

/// New deterministic stream; never fails. Free with `airyedge_stream_free`.
#[no_mangle]
pub extern "C" fn airyedge_stream_new(master_seed: u64, stream_index: u64) -> *mut AiryEdgeStream {
    Box::into_raw(Box::new(AiryEdgeStream(RngStream::new(
        master_seed,
        stream_index,
    ))))
}

/// Independent child stream derived from a parent; the parent is untouched.
#[no_mangle]
pub unsafe extern "C" fn airyedge_stream_substream(
    stream: *const AiryEdgeStream,
    child: u64,
) -> *mut AiryEdgeStream {
    let Some(parent) = (unsafe { stream.as_ref() }) else {
        return std::ptr::null_mut();
    };
    Box::into_raw(Box::new(AiryEdgeStream(parent.0.substream(child))))
}

/// One uniform draw on [0, 1).
#[no_mangle]
pub unsafe extern "C" fn airyedge_stream_uniform(
    stream: *mut AiryEdgeStream,
    out: *mut f64,
) -> AiryEdgeStatus {
    guarded(|| {
        let Some(rng) = (unsafe { stream_mut(stream) }) else {
            return null_pointer("stream");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        unsafe { *out = airyedge::randvar::sample_uniform(rng) };
        AiryEdgeStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn airyedge_stream_free(stream: *mut AiryEdgeStream) {
    if !stream.is_null() {
        drop(unsafe { Box::from_raw(stream) });
    }
}

/// Coupled minor-process trajectory on one fresh draw from `stream`.
/// `beta` may be infinite for the noiseless ensemble.
#[no_mangle]
pub unsafe extern "C" fn airyedge_trajectory_compute(
    stream: *mut AiryEdgeStream,
    n: usize,
    beta: f64,
    num_eigs: usize,
    t_max: f64,
    dt: f64,
    out: *mut *mut AiryEdgeTrajectory,
) -> AiryEdgeStatus {
    guarded(|| {
        let Some(rng) = (unsafe { stream_mut(stream) }) else {
            return null_pointer("stream");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        let spec = match BetaEnsembleSpec::new(n, beta) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        match compute_trajectory(&spec, rng, num_eigs, t_max, dt) {
            Ok(traj) => {
                unsafe { *out = Box::into_raw(Box::new(AiryEdgeTrajectory(traj))) };
                AiryEdgeStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn airyedge_trajectory_num_frames(
    traj: *const AiryEdgeTrajectory,
    out: *mut usize,
) -> AiryEdgeStatus {
    let Some(t) = (unsafe { traj.as_ref() }) else {
        return null_pointer("trajectory");
    };
    if out.is_null() {
        return null_pointer("out");
    }
    unsafe { *out = t.0.frames.len() };
    AiryEdgeStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn airyedge_trajectory_num_eigs(
    traj: *const AiryEdgeTrajectory,
    out: *mut usize,
) -> AiryEdgeStatus {
    let Some(t) = (unsafe { traj.as_ref() }) else {
        return null_pointer("trajectory");
    };
    if out.is_null() {
        return null_pointer("out");
    }
    unsafe { *out = t.0.num_eigs };
    AiryEdgeStatus::Ok
}

/// Copy one frame. Array out-parameters receive `len` values each and may be
/// null to skip; `len` must equal the trajectory's eigenvalue count.
/// `out_deriv` receives the squared-slope derivative estimates.
#[no_mangle]
pub unsafe extern "C" fn airyedge_trajectory_frame(
    traj: *const AiryEdgeTrajectory,
    frame_index: usize,
    out_t: *mut f64,
    out_scaled: *mut f64,
    out_recentered: *mut f64,
    out_deriv: *mut f64,
    len: usize,
) -> AiryEdgeStatus {
    guarded(|| {
        let Some(t) = (unsafe { traj.as_ref() }) else {
            return null_pointer("trajectory");
        };
        let Some(frame) = t.0.frames.get(frame_index) else {
            set_last_error(format!(
                "frame index {frame_index} out of range ({} frames)",
                t.0.frames.len()
            ));
            return AiryEdgeStatus::Dimension;
        };
        if len != t.0.num_eigs {
            set_last_error(format!(
                "len is {len} but the trajectory tracks {} eigenvalues",
                t.0.num_eigs
            ));
            return AiryEdgeStatus::Dimension;
        }
        unsafe {
            if !out_t.is_null() {
                *out_t = frame.t;
            }
            let copy = |src: &[f64], dst: *mut f64| {
                if !dst.is_null() {
                    std::ptr::copy_nonoverlapping(src.as_ptr(), dst, len);
                }
            };
            copy(&frame.scaled_eigs, out_scaled);
            copy(&frame.recentered, out_recentered);
            copy(&frame.derivative_est, out_deriv);
        }
        AiryEdgeStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn airyedge_trajectory_free(traj: *mut AiryEdgeTrajectory) {
    if !traj.is_null() {
        drop(unsafe { Box::from_raw(traj) });
    }
}

/// Scaled spectral weights over independent draws, written row-major as
/// `reps` rows of `num_eigs` values; `len` must equal `reps * num_eigs`.
#[no_mangle]
pub unsafe extern "C" fn airyedge_weight_samples(
    stream: *const AiryEdgeStream,
    n: usize,
    beta: f64,
    num_eigs: usize,
    reps: usize,
    out: *mut f64,
    len: usize,
) -> AiryEdgeStatus {
    guarded(|| {
        let Some(parent) = (unsafe { stream.as_ref() }) else {
            return null_pointer("stream");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        if len != reps.saturating_mul(num_eigs) {
            set_last_error(format!(
                "len is {len}, need reps * num_eigs = {}",
                reps * num_eigs
            ));
            return AiryEdgeStatus::Dimension;
        }
        let spec = match BetaEnsembleSpec::new(n, beta) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        match spectral_weight_samples(&spec, &parent.0, num_eigs, reps) {
            Ok(rows) => {
                for (r, row) in rows.iter().enumerate() {
                    unsafe {
                        std::ptr::copy_nonoverlapping(
                            row.as_ptr(),
                            out.add(r * num_eigs),
                            num_eigs,
                        );
                    }
                }
                AiryEdgeStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Sample a Brownian path covering `[0, span]` at mesh `mesh`.
#[no_mangle]
pub unsafe extern "C" fn airyedge_path_sample(
    stream: *mut AiryEdgeStream,
    mesh: f64,
    span: f64,
    out: *mut *mut AiryEdgePath,
) -> AiryEdgeStatus {
    guarded(|| {
        let Some(rng) = (unsafe { stream_mut(stream) }) else {
            return null_pointer("stream");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        match sample_path_for(rng, mesh, span) {
            Ok(path) => {
                unsafe { *out = Box::into_raw(Box::new(AiryEdgePath(path))) };
                AiryEdgeStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Path geometry; each out-parameter may be null to skip.
#[no_mangle]
pub unsafe extern "C" fn airyedge_path_info(
    path: *const AiryEdgePath,
    out_origin: *mut f64,
    out_mesh: *mut f64,
    out_num_cells: *mut usize,
) -> AiryEdgeStatus {
    let Some(p) = (unsafe { path.as_ref() }) else {
        return null_pointer("path");
    };
    unsafe {
        if !out_origin.is_null() {
            *out_origin = p.0.origin();
        }
        if !out_mesh.is_null() {
            *out_mesh = p.0.mesh();
        }
        if !out_num_cells.is_null() {
            *out_num_cells = p.0.num_cells();
        }
    }
    AiryEdgeStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn airyedge_path_free(path: *mut AiryEdgePath) {
    if !path.is_null() {
        drop(unsafe { Box::from_raw(path) });
    }
}

/// Lowest `k` eigenvalues and boundary slopes of the discretized operator on
/// `[t_index * mesh, l_right]` driven by `path`. `out_eigs` is required with
/// `len == k`; `out_slopes` may be null.
#[no_mangle]
pub unsafe extern "C" fn airyedge_sao_solve(
    path: *const AiryEdgePath,
    beta: f64,
    t_index: usize,
    l_right: f64,
    k: usize,
    out_eigs: *mut f64,
    out_slopes: *mut f64,
    len: usize,
) -> AiryEdgeStatus {
    guarded(|| {
        let Some(p) = (unsafe { path.as_ref() }) else {
            return null_pointer("path");
        };
        if out_eigs.is_null() {
            return null_pointer("out_eigs");
        }
        if len != k {
            set_last_error(format!("len is {len}, need k = {k}"));
            return AiryEdgeStatus::Dimension;
        }
        match solve_domain(&p.0, beta, t_index, l_right, k) {
            Ok(solve) => {
                unsafe {
                    std::ptr::copy_nonoverlapping(solve.eigs.as_ptr(), out_eigs, k);
                    if !out_slopes.is_null() {
                        std::ptr::copy_nonoverlapping(
                            solve.boundary_slopes.as_ptr(),
                            out_slopes,
                            k,
                        );
                    }
                }
                AiryEdgeStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Derivative reports for the lowest `k` modes at boundary cell `t_index`:
/// finite-difference quotient over a `window_cells` shift against the squared
/// boundary slope. Arrays hold `len == k` values; any may be null.
#[no_mangle]
pub unsafe extern "C" fn airyedge_sao_derivative(
    path: *const AiryEdgePath,
    beta: f64,
    t_index: usize,
    k: usize,
    window_cells: usize,
    out_fd: *mut f64,
    out_slope_sq: *mut f64,
    out_rel_err: *mut f64,
    len: usize,
) -> AiryEdgeStatus {
    guarded(|| {
        let Some(p) = (unsafe { path.as_ref() }) else {
            return null_pointer("path");
        };
        if len != k {
            set_last_error(format!("len is {len}, need k = {k}"));
            return AiryEdgeStatus::Dimension;
        }
        match derivative_check(&p.0, beta, t_index, k, window_cells) {
            Ok(reports) => {
                for (i, rep) in reports.iter().enumerate() {
                    unsafe {
                        if !out_fd.is_null() {
                            *out_fd.add(i) = rep.fd_quotient;
                        }
                        if !out_slope_sq.is_null() {
                            *out_slope_sq.add(i) = rep.slope_squared;
                        }
                        if !out_rel_err.is_null() {
                            *out_rel_err.add(i) = rep.rel_err;
                        }
                    }
                }
                AiryEdgeStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of checklist criteria; valid ids are `1..=airyedge_num_criteria()`.
#[no_mangle]
pub extern "C" fn airyedge_num_criteria() -> usize {
    NUM_CRITERIA
}

/// Name of a checklist criterion.
#[no_mangle]
pub unsafe extern "C" fn airyedge_criterion_name(
    id: usize,
    buf: *mut c_char,
    len: usize,
) -> AiryEdgeStatus {
    if id == 0 || id > NUM_CRITERIA {
        set_last_error(format!("criterion id must be 1..={NUM_CRITERIA}, got {id}"));
        return AiryEdgeStatus::InvalidParameter;
    }
    copy_cstr(criterion_name(id), buf, len)
}

/// Run one checklist criterion at `seed`. `out_passed` is required;
/// `out_seconds` and the details buffer are optional.
#[no_mangle]
pub unsafe extern "C" fn airyedge_run_criterion(
    id: usize,
    seed: u64,
    out_passed: *mut bool,
    out_seconds: *mut f64,
    details_buf: *mut c_char,
    details_len: usize,
) -> AiryEdgeStatus {
    guarded(|| {
        if out_passed.is_null() {
            return null_pointer("out_passed");
        }
        match run_criterion(id, seed) {
            Ok(result) => {
                unsafe {
                    *out_passed = result.passed;
                    if !out_seconds.is_null() {
                        *out_seconds = result.seconds;
                    }
                }
                if !details_buf.is_null() {
                    return copy_cstr(&result.details, details_buf, details_len);
                }
                AiryEdgeStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
