//! Exercises the C ABI from the outside: handles, status codes, buffer
//! copies, and agreement with the underlying library calls. Every entry
//! point is unsafe by signature; the tests uphold the pointer contract by
//! construction.

use std::ffi::{c_char, CStr};

use airyedge::ensemble::BetaEnsembleSpec;
use airyedge::minors::{compute_trajectory, spectral_weight_samples};
use airyedge::randvar::RngStream;
use airyedge::sao::{derivative_check, sample_path_for, solve_domain};
use airyedge_ffi::*;

fn read_cstr(buf: &[c_char]) -> String {
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_str()
        .expect("utf8")
        .to_string()
}

#[test]
fn version_and_criterion_names_copy_out() {
    unsafe {
        let mut buf = [0 as c_char; 64];
        assert_eq!(
            airyedge_version(buf.as_mut_ptr(), buf.len()),
            AiryEdgeStatus::Ok
        );
        assert_eq!(read_cstr(&buf), env!("CARGO_PKG_VERSION"));

        assert!(airyedge_num_criteria() >= 11);
        assert_eq!(
            airyedge_criterion_name(1, buf.as_mut_ptr(), buf.len()),
            AiryEdgeStatus::Ok
        );
        assert!(!read_cstr(&buf).is_empty());

        // A two-byte buffer truncates but stays NUL-terminated.
        let mut tiny = [0 as c_char; 2];
        assert_eq!(
            airyedge_criterion_name(1, tiny.as_mut_ptr(), tiny.len()),
            AiryEdgeStatus::BufferTooSmall
        );
        assert_eq!(read_cstr(&tiny).len(), 1);

        assert_eq!(
            airyedge_criterion_name(99, buf.as_mut_ptr(), buf.len()),
            AiryEdgeStatus::InvalidParameter
        );
    }
}

#[test]
fn streams_are_deterministic_and_substreams_diverge() {
    unsafe {
        let a = airyedge_stream_new(7, 0);
        let b = airyedge_stream_new(7, 0);
        let mut xa = 0.0;
        let mut xb = 0.0;
        for _ in 0..16 {
            assert_eq!(airyedge_stream_uniform(a, &mut xa), AiryEdgeStatus::Ok);
            assert_eq!(airyedge_stream_uniform(b, &mut xb), AiryEdgeStatus::Ok);
            assert_eq!(xa.to_bits(), xb.to_bits());
            assert!((0.0..1.0).contains(&xa));
        }
        let child = airyedge_stream_substream(a, 1);
        assert!(!child.is_null());
        let mut xc = 0.0;
        assert_eq!(airyedge_stream_uniform(child, &mut xc), AiryEdgeStatus::Ok);
        assert_eq!(airyedge_stream_uniform(b, &mut xb), AiryEdgeStatus::Ok);
        assert_ne!(xc.to_bits(), xb.to_bits());
        airyedge_stream_free(a);
        airyedge_stream_free(b);
        airyedge_stream_free(child);
        airyedge_stream_free(std::ptr::null_mut());
    }
}

#[test]
fn null_handles_report_status_and_message() {
    unsafe {
        let mut x = 0.0;
        assert_eq!(
            airyedge_stream_uniform(std::ptr::null_mut(), &mut x),
            AiryEdgeStatus::NullPointer
        );
        let mut buf = [0 as c_char; 256];
        assert_eq!(
            airyedge_last_error_message(buf.as_mut_ptr(), buf.len()),
            AiryEdgeStatus::Ok
        );
        assert!(read_cstr(&buf).contains("must not be null"));

        // Invalid ensemble parameters surface with the matching status.
        let stream = airyedge_stream_new(1, 0);
        let mut out = std::ptr::null_mut();
        assert_eq!(
            airyedge_trajectory_compute(stream, 50, -2.0, 1, 0.1, 0.1, &mut out),
            AiryEdgeStatus::InvalidParameter
        );
        assert_eq!(
            airyedge_trajectory_compute(stream, 0, 2.0, 1, 0.1, 0.1, &mut out),
            AiryEdgeStatus::Dimension
        );
        assert!(out.is_null());
        airyedge_stream_free(stream);
    }
}

#[test]
fn trajectory_roundtrip_matches_the_library() {
    let (n, beta, num_eigs, t_max, dt) = (400usize, 2.0f64, 2usize, 0.3f64, 0.1f64);
    let spec = BetaEnsembleSpec::new(n, beta).unwrap();
    let mut rng = RngStream::new(5, 3);
    let expected = compute_trajectory(&spec, &mut rng, num_eigs, t_max, dt).unwrap();

    unsafe {
        let stream = airyedge_stream_new(5, 3);
        let mut handle = std::ptr::null_mut();
        assert_eq!(
            airyedge_trajectory_compute(stream, n, beta, num_eigs, t_max, dt, &mut handle),
            AiryEdgeStatus::Ok
        );

        let mut frames = 0usize;
        let mut eigs = 0usize;
        assert_eq!(
            airyedge_trajectory_num_frames(handle, &mut frames),
            AiryEdgeStatus::Ok
        );
        assert_eq!(
            airyedge_trajectory_num_eigs(handle, &mut eigs),
            AiryEdgeStatus::Ok
        );
        assert_eq!(frames, expected.frames.len());
        assert_eq!(eigs, num_eigs);

        let mut t = 0.0;
        let mut scaled = vec![0.0; num_eigs];
        let mut recentered = vec![0.0; num_eigs];
        let mut deriv = vec![0.0; num_eigs];
        for (idx, frame) in expected.frames.iter().enumerate() {
            assert_eq!(
                airyedge_trajectory_frame(
                    handle,
                    idx,
                    &mut t,
                    scaled.as_mut_ptr(),
                    recentered.as_mut_ptr(),
                    deriv.as_mut_ptr(),
                    num_eigs,
                ),
                AiryEdgeStatus::Ok
            );
            assert_eq!(t.to_bits(), frame.t.to_bits());
            for i in 0..num_eigs {
                assert_eq!(scaled[i].to_bits(), frame.scaled_eigs[i].to_bits());
                assert_eq!(recentered[i].to_bits(), frame.recentered[i].to_bits());
                assert_eq!(deriv[i].to_bits(), frame.derivative_est[i].to_bits());
            }
        }

        // Out-of-range frame and wrong len are dimension errors.
        assert_eq!(
            airyedge_trajectory_frame(
                handle,
                frames,
                &mut t,
                std::ptr::null_mut(),
                std::ptr::null_mut(),
                std::ptr::null_mut(),
                num_eigs
            ),
            AiryEdgeStatus::Dimension
        );
        assert_eq!(
            airyedge_trajectory_frame(
                handle,
                0,
                &mut t,
                std::ptr::null_mut(),
                std::ptr::null_mut(),
                std::ptr::null_mut(),
                num_eigs + 1
            ),
            AiryEdgeStatus::Dimension
        );
        airyedge_trajectory_free(handle);
        airyedge_stream_free(stream);
    }
}

#[test]
fn weight_samples_fill_the_buffer_row_major() {
    let (n, beta, num_eigs, reps) = (200usize, 4.0f64, 2usize, 8usize);
    let spec = BetaEnsembleSpec::new(n, beta).unwrap();
    let parent = RngStream::new(11, 0);
    let expected = spectral_weight_samples(&spec, &parent, num_eigs, reps).unwrap();

    unsafe {
        let stream = airyedge_stream_new(11, 0);
        let mut buf = vec![0.0f64; num_eigs * reps];
        assert_eq!(
            airyedge_weight_samples(stream, n, beta, num_eigs, reps, buf.as_mut_ptr(), buf.len()),
            AiryEdgeStatus::Ok
        );
        for r in 0..reps {
            for i in 0..num_eigs {
                assert_eq!(buf[r * num_eigs + i].to_bits(), expected[r][i].to_bits());
            }
        }
        assert_eq!(
            airyedge_weight_samples(
                stream,
                n,
                beta,
                num_eigs,
                reps,
                buf.as_mut_ptr(),
                buf.len() - 1
            ),
            AiryEdgeStatus::Dimension
        );
        airyedge_stream_free(stream);
    }
}

#[test]
fn sao_solve_and_derivative_match_the_library() {
    // Span covers the default extent-8 wall used by the derivative check.
    let (beta, mesh, span) = (f64::INFINITY, 2e-3, 9.0);
    let mut rng = RngStream::new(3, 0);
    let reference = sample_path_for(&mut rng, mesh, span).unwrap();
    let k = 2usize;
    let expected = solve_domain(&reference, beta, 0, 6.0, k).unwrap();
    let reports = derivative_check(&reference, beta, 0, k, 20).unwrap();

    unsafe {
        let stream = airyedge_stream_new(3, 0);
        let mut path = std::ptr::null_mut();
        assert_eq!(
            airyedge_path_sample(stream, mesh, span, &mut path),
            AiryEdgeStatus::Ok
        );
        let mut origin = -1.0;
        let mut h = 0.0;
        let mut cells = 0usize;
        assert_eq!(
            airyedge_path_info(path, &mut origin, &mut h, &mut cells),
            AiryEdgeStatus::Ok
        );
        assert_eq!(origin, 0.0);
        assert_eq!(h, mesh);
        assert!(cells as f64 * h >= span);

        let mut eigs = vec![0.0; k];
        let mut slopes = vec![0.0; k];
        assert_eq!(
            airyedge_sao_solve(
                path,
                beta,
                0,
                6.0,
                k,
                eigs.as_mut_ptr(),
                slopes.as_mut_ptr(),
                k
            ),
            AiryEdgeStatus::Ok
        );
        for i in 0..k {
            assert_eq!(eigs[i].to_bits(), expected.eigs[i].to_bits());
            assert_eq!(slopes[i].to_bits(), expected.boundary_slopes[i].to_bits());
        }

        let mut fd = vec![0.0; k];
        let mut slope_sq = vec![0.0; k];
        let mut rel_err = vec![0.0; k];
        assert_eq!(
            airyedge_sao_derivative(
                path,
                beta,
                0,
                k,
                20,
                fd.as_mut_ptr(),
                slope_sq.as_mut_ptr(),
                rel_err.as_mut_ptr(),
                k
            ),
            AiryEdgeStatus::Ok
        );
        for i in 0..k {
            assert_eq!(fd[i].to_bits(), reports[i].fd_quotient.to_bits());
            assert_eq!(slope_sq[i].to_bits(), reports[i].slope_squared.to_bits());
            assert_eq!(rel_err[i].to_bits(), reports[i].rel_err.to_bits());
        }

        // Geometry violations surface as errors, not panics.
        assert_eq!(
            airyedge_sao_solve(
                path,
                beta,
                0,
                span + 5.0,
                k,
                eigs.as_mut_ptr(),
                slopes.as_mut_ptr(),
                k
            ),
            AiryEdgeStatus::Dimension
        );
        airyedge_path_free(path);
        airyedge_stream_free(stream);
    }
}

#[test]
fn fast_criterion_runs_through_the_boundary() {
    unsafe {
        let mut passed = false;
        let mut seconds = -1.0;
        let mut details = [0 as c_char; 512];
        assert_eq!(
            airyedge_run_criterion(
                1,
                42,
                &mut passed,
                &mut seconds,
                details.as_mut_ptr(),
                details.len()
            ),
            AiryEdgeStatus::Ok
        );
        assert!(passed);
        assert!(seconds >= 0.0);
        assert!(!read_cstr(&details).is_empty());

        assert_eq!(
            airyedge_run_criterion(
                0,
                42,
                &mut passed,
                std::ptr::null_mut(),
                std::ptr::null_mut(),
                0
            ),
            AiryEdgeStatus::InvalidParameter
        );
    }
}

#[test]
fn generated_header_declares_the_interface() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("airyedge.h");
    let text = std::fs::read_to_string(&header).expect("header was generated at build time");
    for needle in [
        "AIRYEDGE_H",
        "AiryEdgeStatus",
        "AiryEdgeStream",
        "AiryEdgeTrajectory",
        "AiryEdgePath",
        "airyedge_stream_new",
        "airyedge_trajectory_compute",
        "airyedge_weight_samples",
        "airyedge_sao_solve",
        "airyedge_run_criterion",
        "airyedge_last_error_message",
    ] {
        assert!(text.contains(needle), "header lacks {needle}");
    }
}
