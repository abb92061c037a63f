//! End-to-end verification checklist and the dense brute-force eigensolver
//! it cross-checks against.
//!
//! Each numbered criterion is an independent, seeded check of one pillar of
//! the toolkit: exact linear algebra, analytic moments, or a calibrated
//! statistical law. Statistical criteria run three replicate streams and
//! pass on at least two, so a single unlucky stream cannot flip the verdict
//! while a real defect still fails consistently.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{sample_hermite, scaled_edge_eigenvalues, BetaEnsembleSpec};
use crate::error::{Error, Result};
use crate::minors::{
    compute_trajectory, eigvec_linearity_profile, reversibility_asymmetry, spectral_weight_samples,
    stationarity_samples,
};
use crate::randvar::{sample_index, sample_uniform, BrownianGrid, RngStream};
use crate::sao::{
    assemble_sao_matrix, derivative_check_with, sample_path_for, solve_domain,
    spliced_rayleigh_bound_with, stationarity_shift_check, SlopeExtraction, AIRY_FIRST_ZERO_MAG,
};
use crate::stats::{self, sorted_quantile};
use crate::tridiag::TridiagSym;

/// Number of checklist entries.
pub const NUM_CRITERIA: usize = 11;
/// Fast subset covering exact algebra, the deterministic operator limit,
/// the variational inequality, and reproducibility.
pub const QUICK_CRITERIA: [usize; 4] = [1, 7, 9, 11];

/// Frozen envelope for the scaled eigenvector deviation statistic of
/// criterion 10, calibrated once from a pilot run (see
/// `tests::pilot_linearity_statistic`: q99 ~ 0.89, observed max ~ 1.2 at
/// both n = 1e5 and 2e5) and never tuned against the checked streams.
const LINEARITY_BOUND: f64 = 1.5;

/// Outcome of one checklist entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    /// Measured quantities behind the verdict, human-readable.
    pub details: String,
    pub seconds: f64,
}

/// Stable display name of a checklist entry.
pub fn criterion_name(id: usize) -> &'static str {
    match id {
        1 => "eigensolver exactness",
        2 => "minor interlacing",
        3 => "spectral weight moments",
        4 => "derivative gamma law",
        5 => "stationarity",
        6 => "non-reversibility",
        7 => "deterministic limit",
        8 => "pathwise derivative",
        9 => "variational bound",
        10 => "eigenvector near-linearity",
        11 => "thread reproducibility",
        _ => "unknown",
    }
}

/// Run one criterion under the given master seed.
pub fn run_criterion(id: usize, seed: u64) -> Result<CriterionResult> {
    let start = Instant::now();
    let master = RngStream::new(seed, 9000 + id as u64);
    let (passed, details) = match id {
        1 => c01_eigensolver_exactness(&master)?,
        2 => c02_minor_interlacing(&master)?,
        3 => c03_weight_moments(&master)?,
        4 => c04_derivative_gamma_law(&master)?,
        5 => c05_stationarity(&master)?,
        6 => c06_non_reversibility(&master)?,
        7 => c07_deterministic_limit()?,
        8 => c08_pathwise_derivative(&master)?,
        9 => c09_variational_bound(&master)?,
        10 => c10_eigenvector_linearity(&master)?,
        11 => c11_thread_reproducibility(&master)?,
        _ => {
            return Err(Error::InvalidParameter(format!(
                "criterion id must be 1..={NUM_CRITERIA}, got {id}"
            )))
        }
    };
    Ok(CriterionResult {
        id,
        name: criterion_name(id),
        passed,
        details,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Run the whole checklist (or the quick subset), never aborting early: a
/// failed criterion is reported, not propagated.
pub fn run_suite(seed: u64, quick: bool) -> Result<Vec<CriterionResult>> {
    let ids: Vec<usize> = if quick {
        QUICK_CRITERIA.to_vec()
    } else {
        (1..=NUM_CRITERIA).collect()
    };
    ids.into_iter().map(|id| run_criterion(id, seed)).collect()
}

fn spec(n: usize, beta: f64) -> BetaEnsembleSpec {
    BetaEnsembleSpec { n, beta }
}

fn zero_path(mesh: f64, cells: usize) -> Result<BrownianGrid> {
    BrownianGrid::new(mesh, 0.0, vec![0.0; cells])
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted_quantile(values, 0.5)
}

/// Criterion 1: Lowest-k eigenvalues on 1000 random small systems match the dense
/// Jacobi oracle to 1e-10; the discrete Laplacian closed form
/// 2 - 2cos(jπ/(m+1)) is reproduced to 1e-10 at m = 10 and 100.
fn c01_eigensolver_exactness(master: &RngStream) -> Result<(bool, String)> {
    let mut stream = master.substream(0);
    let mut max_dev: f64 = 0.0;
    for _ in 0..1000 {
        let m = 1 + sample_index(&mut stream, 8);
        let diag: Vec<f64> = (0..m)
            .map(|_| 4.0 * sample_uniform(&mut stream) - 2.0)
            .collect();
        let offdiag: Vec<f64> = (0..m.saturating_sub(1))
            .map(|_| 4.0 * sample_uniform(&mut stream) - 2.0)
            .collect();
        let t = TridiagSym::new(diag.clone(), offdiag.clone())?;
        let mine = t.lowest_eigenvalues(m, Some(1e-12))?;
        let mut dense = vec![vec![0.0; m]; m];
        for i in 0..m {
            dense[i][i] = diag[i];
            if i + 1 < m {
                dense[i][i + 1] = offdiag[i];
                dense[i + 1][i] = offdiag[i];
            }
        }
        let oracle = crate::verify::jacobi_eigenvalues(&dense)?;
        for (a, b) in mine.iter().zip(&oracle) {
            max_dev = max_dev.max((a - b).abs());
        }
    }
    let mut max_lap_dev: f64 = 0.0;
    for m in [10usize, 100] {
        let t = TridiagSym::new(vec![2.0; m], vec![-1.0; m - 1])?;
        let eigs = t.lowest_eigenvalues(m, Some(1e-12))?;
        for (j, lam) in eigs.iter().enumerate() {
            let exact =
                2.0 - 2.0 * ((j + 1) as f64 * std::f64::consts::PI / (m as f64 + 1.0)).cos();
            max_lap_dev = max_lap_dev.max((lam - exact).abs());
        }
    }
    let passed = max_dev <= 1e-10 && max_lap_dev <= 1e-10;
    Ok((
        passed,
        format!(
            "max |bisection - jacobi| = {max_dev:.2e} over 1000 systems; \
             max Laplacian closed-form deviation = {max_lap_dev:.2e}"
        ),
    ))
}

/// Criterion 2: Consecutive minors interlace: for 100 draws per beta at n = 2000,
/// the lowest eigenvalues of minor k and k+1 satisfy the submatrix
/// inequalities with violations bounded by twice the bisection width.
fn c02_minor_interlacing(master: &RngStream) -> Result<(bool, String)> {
    let n = 2000;
    let minors = 12usize;
    let track = 5usize;
    let mut worst: f64 = 0.0;
    for (bi, beta) in [1.0, 2.0, 4.0].into_iter().enumerate() {
        let results: Vec<Result<f64>> = (0..100u64)
            .into_par_iter()
            .map(|r| {
                let mut stream = master.substream(bi as u64 * 1000 + r);
                let draw = sample_hermite(&spec(n, beta), &mut stream)?;
                let (g_lo, g_hi) =
                    crate::ensemble::edge_minor_matrix(&draw, 0)?.gershgorin_bounds();
                let slack = 2.0 * 1e-10 * 0.5 * (g_hi - g_lo) * (n as f64).powf(1.0 / 6.0);
                let mut violation: f64 = 0.0;
                let mut prev = scaled_edge_eigenvalues(&draw, 0, track, None)?;
                for k in 1..=minors {
                    let cur = scaled_edge_eigenvalues(&draw, k, track, None)?;
                    for i in 0..track - 1 {
                        violation = violation.max(prev[i] - cur[i]);
                        violation = violation.max(cur[i] - prev[i + 1]);
                    }
                    prev = cur;
                }
                // Report violations in units of the allowed slack.
                Ok(violation / slack)
            })
            .collect();
        for r in results {
            worst = worst.max(r?);
        }
    }
    let passed = worst <= 1.0;
    Ok((
        passed,
        format!("worst interlacing violation = {worst:.3} of the 2x-tolerance slack"),
    ))
}

/// Criterion 3: First spectral weight at n = 200, beta = 2 over 10^4 replicas: the
/// empirical mean and variance of n*q_1 match 1 and beta(n-1)/(beta n + 2)
/// within three standard errors.
fn c03_weight_moments(master: &RngStream) -> Result<(bool, String)> {
    let n = 200usize;
    let beta = 2.0;
    let rows = spectral_weight_samples(&spec(n, beta), master, 1, 10_000)?;
    let col: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let m = stats::moments(&col)?;
    let target_var = beta * (n as f64 - 1.0) / (beta * n as f64 + 2.0);
    let mean_dev = (m.mean - 1.0).abs() / m.se_mean;
    let var_dev = (m.variance - target_var).abs() / m.se_variance;
    let passed = mean_dev <= 3.0 && var_dev <= 3.0;
    Ok((
        passed,
        format!(
            "mean {:.5} ({mean_dev:.2} se from 1), variance {:.5} ({var_dev:.2} se from {target_var:.5})",
            m.mean, m.variance
        ),
    ))
}

/// Criterion 4: Scaled weights n*q_i at n = 2000 follow Gamma(beta/2, 2/beta): KS at
/// the 1% level for i = 1,2,3 in at least 2 of 3 replicate streams per
/// beta, with pooled mean within 1 +- 0.05 and variance within 2/beta +- 10%.
fn c04_derivative_gamma_law(master: &RngStream) -> Result<(bool, String)> {
    let n = 2000usize;
    let reps = 5000usize;
    let mut all_pass = true;
    let mut lines = Vec::new();
    for (bi, beta) in [1.0, 2.0, 4.0].into_iter().enumerate() {
        let shape = beta / 2.0;
        let cdf = move |x: f64| {
            if x <= 0.0 {
                0.0
            } else {
                stats::reg_lower_gamma(shape, x * shape).unwrap_or(1.0)
            }
        };
        let mut ks_passes = [0usize; 3];
        let mut pooled: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for s in 0..3u64 {
            let rows = spectral_weight_samples(
                &spec(n, beta),
                &master.substream(bi as u64 * 10 + s),
                3,
                reps,
            )?;
            for i in 0..3 {
                let col: Vec<f64> = rows.iter().map(|r| r[i]).collect();
                if stats::ks_one_sample(&col, cdf, 0.01)?.passed {
                    ks_passes[i] += 1;
                }
                pooled[i].extend_from_slice(&col);
            }
        }
        let mut beta_ok = ks_passes.iter().all(|&c| c >= 2);
        let mut moment_note = String::new();
        for (i, col) in pooled.iter().enumerate() {
            let m = stats::moments(col)?;
            let mean_ok = (m.mean - 1.0).abs() <= 0.05;
            let var_ok = (m.variance - 2.0 / beta).abs() <= 0.1 * (2.0 / beta);
            if i == 0 {
                moment_note = format!("mean {:.4}, var {:.4}", m.mean, m.variance);
            }
            beta_ok = beta_ok && mean_ok && var_ok;
        }
        all_pass = all_pass && beta_ok;
        lines.push(format!(
            "beta {beta}: KS passes {}/{}/{} of 3, {moment_note}",
            ks_passes[0], ks_passes[1], ks_passes[2]
        ));
    }
    Ok((all_pass, lines.join("; ")))
}

/// Criterion 5: Stationarity of the recentered edge: two-sample KS between t = 0 and
/// t = 1 at n = 10^5 (1000 replicas) passes at 1% in at least 2 of 3
/// streams, and the pooled least-squares drift of the recentered lowest
/// eigenvalue over t in [0, 2] is 0 +- 0.1.
fn c05_stationarity(master: &RngStream) -> Result<(bool, String)> {
    let mut ks_passed = 0usize;
    let mut stats_line = Vec::new();
    for s in 0..3u64 {
        let (zero, star) =
            stationarity_samples(&spec(100_000, 2.0), &master.substream(s), 1.0, 1000)?;
        let rep = stats::ks_two_sample(&zero, &star, 0.01)?;
        if rep.passed {
            ks_passed += 1;
        }
        stats_line.push(format!("D={:.4}", rep.statistic));
    }
    // Pooled regression of the recentered eigenvalue against t.
    let n_drift = 10_000usize;
    let dt = (n_drift as f64).powf(-1.0 / 3.0);
    let points: Vec<Result<Vec<(f64, f64)>>> = (0..300u64)
        .into_par_iter()
        .map(|r| {
            let mut stream = master.substream(100 + r);
            let traj = compute_trajectory(&spec(n_drift, 2.0), &mut stream, 1, 2.0, dt)?;
            Ok(traj.frames.iter().map(|f| (f.t, f.recentered[0])).collect())
        })
        .collect();
    let (mut sum_t, mut sum_y, mut count) = (0.0, 0.0, 0.0);
    let mut flat = Vec::new();
    for p in points {
        for (t, y) in p? {
            sum_t += t;
            sum_y += y;
            count += 1.0;
            flat.push((t, y));
        }
    }
    let (tbar, ybar) = (sum_t / count, sum_y / count);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, y) in flat {
        sxy += (t - tbar) * (y - ybar);
        sxx += (t - tbar) * (t - tbar);
    }
    let drift = sxy / sxx;
    let passed = ks_passed >= 2 && drift.abs() <= 0.1;
    Ok((
        passed,
        format!(
            "KS passed {ks_passed}/3 ({}); recentered drift {drift:.4} over [0,2]",
            stats_line.join(", ")
        ),
    ))
}

/// Criterion 6: Non-reversibility: the skewness of (derivative samples - 1) is
/// positive with 99% bootstrap confidence and within 20% of 2/sqrt(beta/2)
/// at beta = 2, in at least 2 of 3 streams.
fn c06_non_reversibility(master: &RngStream) -> Result<(bool, String)> {
    let beta = 2.0f64;
    let target = 2.0 / (beta / 2.0).sqrt();
    let mut passes = 0usize;
    let mut notes = Vec::new();
    for s in 0..3u64 {
        let rows = spectral_weight_samples(&spec(2000, beta), &master.substream(20 + s), 1, 5000)?;
        let shifted: Vec<f64> = rows.iter().map(|r| r[0] - 1.0).collect();
        let mut boot = master.substream(30 + s);
        let (skew, lo, _hi) = reversibility_asymmetry(&mut boot, &shifted, 500, 0.99)?;
        let ok = lo > 0.0 && (skew - target).abs() <= 0.2 * target;
        if ok {
            passes += 1;
        }
        notes.push(format!("skew {skew:.3} (lo {lo:.3})"));
    }
    Ok((
        passes >= 2,
        format!("target {target}; {} ; {passes}/3 streams", notes.join(", ")),
    ))
}

/// Criterion 7: Deterministic limit (beta = infinity) at h = 5e-4 on [0, 8]: the
/// ground eigenvalue matches the first Airy-zero magnitude within 1e-3
/// (h/4 Richardson extrapolation as the oracle), domain shifts move every
/// eigenvalue by exactly t within 1e-6, and squared boundary slopes are
/// 1 +- 1e-3 for the three lowest modes.
fn c07_deterministic_limit() -> Result<(bool, String)> {
    let inf = f64::INFINITY;
    let h = 5e-4;
    let ground = solve_domain(&zero_path(h, (8.0 / h) as usize)?, inf, 0, 8.0, 1)?;
    let airy_dev = (ground.eigs[0] - AIRY_FIRST_ZERO_MAG).abs();
    // Richardson h/4 oracle on the same truncated domain.
    let eig1 = |mesh: f64| -> Result<f64> {
        let path = zero_path(mesh, (8.0 / mesh) as usize)?;
        let m = assemble_sao_matrix(&path, inf, 0, 8.0)?;
        Ok(m.lowest_eigenvalues(1, Some(1e-9))?[0])
    };
    let lam_h2 = eig1(h / 2.0)?;
    let lam_h4 = eig1(h / 4.0)?;
    let oracle = lam_h4 + (lam_h4 - lam_h2) / 3.0;
    let oracle_dev = (oracle - AIRY_FIRST_ZERO_MAG).abs();
    // Shift identity and slopes for three modes. The third mode sits at
    // 5.52, so the wall goes to 10: at 8 its Dirichlet truncation shift is
    // ~3e-3, which would drown the laws being checked here.
    let cells = (10.0 / h) as usize;
    let base = solve_domain(&zero_path(h, cells)?, inf, 0, 10.0, 3)?;
    let long = zero_path(h, cells + 2000)?;
    let mut shift_dev: f64 = 0.0;
    for t_cells in [500usize, 1000, 2000] {
        let t = t_cells as f64 * h;
        let shifted = solve_domain(&long, inf, t_cells, 10.0 + t, 3)?;
        for k in 0..3 {
            shift_dev = shift_dev.max((shifted.eigs[k] - base.eigs[k] - t).abs());
        }
    }
    let mut slope_dev: f64 = 0.0;
    for s in &base.boundary_slopes {
        slope_dev = slope_dev.max((s * s - 1.0).abs());
    }
    let passed = airy_dev < 1e-3 && oracle_dev < 1e-5 && shift_dev < 1e-6 && slope_dev < 1e-3;
    Ok((
        passed,
        format!(
            "ground eig dev {airy_dev:.2e} (oracle dev {oracle_dev:.2e}), \
             shift identity dev {shift_dev:.2e}, max |slope^2 - 1| = {slope_dev:.2e}"
        ),
    ))
}

/// Criterion 8: Pathwise derivative formula at beta = 2: the median over 100 paths of
/// the relative error between the one-step quotient and the squared slope
/// is below 0.15 and decreases under joint (h, window) halving, in at
/// least 2 of 3 streams.
fn c08_pathwise_derivative(master: &RngStream) -> Result<(bool, String)> {
    let mut passes = 0usize;
    let mut notes = Vec::new();
    for s in 0..3u64 {
        let seed_stream = master.substream(40 + s);
        let pairs: Vec<Result<(f64, f64)>> = (0..100u64)
            .into_par_iter()
            .map(|r| {
                let mut stream = seed_stream.substream(r);
                let coarse = sample_path_for(&mut stream, 5e-4, 8.01)?;
                let rc =
                    derivative_check_with(&coarse, 2.0, 0, 1, 20, 8.0, SlopeExtraction::OneSided)?;
                let fine = coarse.refine(&mut stream)?;
                let rf =
                    derivative_check_with(&fine, 2.0, 0, 1, 20, 8.0, SlopeExtraction::OneSided)?;
                Ok((rc[0].rel_err, rf[0].rel_err))
            })
            .collect();
        let mut coarse_errs = Vec::new();
        let mut fine_errs = Vec::new();
        for p in pairs {
            let (c, f) = p?;
            coarse_errs.push(c);
            fine_errs.push(f);
        }
        let med_c = median(&mut coarse_errs);
        let med_f = median(&mut fine_errs);
        if med_c < 0.15 && med_f < med_c {
            passes += 1;
        }
        notes.push(format!("median {med_c:.4} -> {med_f:.4}"));
    }
    Ok((
        passes >= 2,
        format!("{} ; {passes}/3 streams", notes.join(", ")),
    ))
}

/// Criterion 9: Variational inequality: the spliced test function's Rayleigh quotient
/// never falls below the ground eigenvalue of the target domain (minus
/// rounding slack) on 100 random paths and splice geometries.
fn c09_variational_bound(master: &RngStream) -> Result<(bool, String)> {
    let h = 5e-4;
    let results: Vec<Result<f64>> = (0..100u64)
        .into_par_iter()
        .map(|case| {
            let mut stream = master.substream(50 + case);
            let path = sample_path_for(&mut stream, h, 6.3)?;
            let s_cells = sample_index(&mut stream, 401);
            let t_cells = s_cells + sample_index(&mut stream, 601);
            let ramp_cells = 5 + sample_index(&mut stream, 396);
            let splice_a = (t_cells + ramp_cells) as f64 * h;
            let rep = spliced_rayleigh_bound_with(&path, 2.0, s_cells, t_cells, splice_a, 0, 6.0)?;
            Ok(rep.rq_value - rep.lambda_t)
        })
        .collect();
    let mut min_margin = f64::INFINITY;
    let mut violations = 0usize;
    for r in results {
        let margin = r?;
        min_margin = min_margin.min(margin);
        if margin < -1e-6 {
            violations += 1;
        }
    }
    Ok((
        violations == 0,
        format!("{violations} violations; smallest margin {min_margin:.3e}"),
    ))
}

/// Largest scaled deviation from linearity over the first eigenvector's
/// near-boundary profile: max of n^{1/6} |v_l - l v_1| / x_l^2 for x_l <= 0.5.
fn linearity_statistic(n: usize, stream: &mut RngStream) -> Result<f64> {
    let profile = eigvec_linearity_profile(&spec(n, 2.0), stream, 0, 0.5)?;
    let scale = (n as f64).powf(1.0 / 6.0);
    let mut worst: f64 = 0.0;
    for (x, dev) in profile {
        worst = worst.max(scale * dev / (x * x));
    }
    Ok(worst)
}

/// Criterion 10: Eigenvector near-linearity at n = 10^5: the scaled deviation
/// statistic stays under the frozen bound for >= 95% of 500 replicas (in
/// at least 2 of 3 streams), and its 95th percentile moves by less than a
/// factor of 2 when n doubles.
fn c10_eigenvector_linearity(master: &RngStream) -> Result<(bool, String)> {
    let run = |n: usize, base: u64| -> Result<Vec<f64>> {
        let vals: Vec<Result<f64>> = (0..500u64)
            .into_par_iter()
            .map(|r| {
                let mut stream = master.substream(base).substream(r);
                linearity_statistic(n, &mut stream)
            })
            .collect();
        vals.into_iter().collect()
    };
    let mut passes = 0usize;
    let mut fracs = Vec::new();
    let mut first_stream_stats = Vec::new();
    for s in 0..3u64 {
        let stats_n = run(100_000, 60 + s)?;
        let frac =
            stats_n.iter().filter(|&&d| d <= LINEARITY_BOUND).count() as f64 / stats_n.len() as f64;
        if frac >= 0.95 {
            passes += 1;
        }
        fracs.push(format!("{frac:.3}"));
        if s == 0 {
            first_stream_stats = stats_n;
        }
    }
    let double = run(200_000, 70)?;
    let mut base_sorted = first_stream_stats;
    base_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut dbl_sorted = double;
    dbl_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q95_n = sorted_quantile(&base_sorted, 0.95);
    let q95_2n = sorted_quantile(&dbl_sorted, 0.95);
    let ratio = q95_2n / q95_n;
    let passed = passes >= 2 && (0.5..=2.0).contains(&ratio);
    Ok((
        passed,
        format!(
            "bound {LINEARITY_BOUND}: fractions under bound [{}], q95 ratio under n doubling {ratio:.3}",
            fracs.join(", ")
        ),
    ))
}

/// Criterion 11: Reproducibility: seeded statistics are bitwise identical across
/// thread-pool sizes.
fn c11_thread_reproducibility(master: &RngStream) -> Result<(bool, String)> {
    let pool = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
    };
    let weight_spec = spec(300, 2.0);
    let weight_master = master.substream(0);
    let a = pool(1)?.install(|| spectral_weight_samples(&weight_spec, &weight_master, 2, 200))?;
    let b = pool(3)?.install(|| spectral_weight_samples(&weight_spec, &weight_master, 2, 200))?;
    let weights_equal = a.len() == b.len()
        && a.iter()
            .zip(&b)
            .all(|(ra, rb)| ra.iter().zip(rb).all(|(x, y)| x.to_bits() == y.to_bits()));
    let shift_master = master.substream(1);
    let s1 = pool(2)?
        .install(|| stationarity_shift_check(&shift_master, 2.0, 2e-3, 6.0, 0.5, 64, 0.01))?
        .statistic;
    let s2 = pool(4)?
        .install(|| stationarity_shift_check(&shift_master, 2.0, 2e-3, 6.0, 0.5, 64, 0.01))?
        .statistic;
    let ks_equal = s1.to_bits() == s2.to_bits();
    Ok((
        weights_equal && ks_equal,
        format!(
            "weight matrix bitwise equal across pools: {weights_equal}; \
             KS statistic bitwise equal: {ks_equal}"
        ),
    ))
}

/// All eigenvalues of a dense symmetric matrix, ascending, by cyclic Jacobi
/// rotations. Slow and simple on purpose: this is the independent oracle the
/// tridiagonal solver is checked against, so it shares no code with it.
// Index-addressed matrix code; iterator forms would obscure the sweeps.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_eigenvalues(mat: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = mat.len();
    if n == 0 {
        return Err(Error::Dimension(
            "matrix dimension must be at least 1".into(),
        ));
    }
    let mut scale: f64 = 0.0;
    for row in mat {
        if row.len() != n {
            return Err(Error::Dimension(format!(
                "row length {} in a dimension-{n} matrix",
                row.len()
            )));
        }
        for &x in row {
            if !x.is_finite() {
                return Err(Error::InvalidParameter(
                    "matrix entries must be finite".into(),
                ));
            }
            scale = scale.max(x.abs());
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if (mat[i][j] - mat[j][i]).abs() > 1e-12 * scale.max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "matrix is not symmetric at ({i},{j})"
                )));
            }
        }
    }
    let mut a: Vec<Vec<f64>> = mat.to_vec();
    let off = |a: &Vec<Vec<f64>>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += a[i][j] * a[i][j];
            }
        }
        s.sqrt()
    };
    let frob: f64 = a
        .iter()
        .flatten()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        if off(&a) <= 1e-14 * frob {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    if off(&a) > 1e-10 * frob {
        return Err(Error::Convergence(format!(
            "Jacobi sweeps stalled with off-norm {:.3e}",
            off(&a)
        )));
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(eigs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_two_by_two_analytic() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let m = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let e = jacobi_eigenvalues(&m).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-12);
        assert!((e[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_diagonal_passthrough() {
        let m = vec![
            vec![3.0, 0.0, 0.0],
            vec![0.0, -1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ];
        let e = jacobi_eigenvalues(&m).unwrap();
        assert_eq!(e, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn jacobi_trace_and_frobenius_preserved() {
        let m = vec![
            vec![1.0, 0.5, 0.2, 0.0],
            vec![0.5, -2.0, 0.3, 0.1],
            vec![0.2, 0.3, 0.7, -0.4],
            vec![0.0, 0.1, -0.4, 1.5],
        ];
        let e = jacobi_eigenvalues(&m).unwrap();
        let trace: f64 = (0..4).map(|i| m[i][i]).sum();
        assert!((e.iter().sum::<f64>() - trace).abs() < 1e-12);
        let frob2: f64 = m.iter().flatten().map(|x| x * x).sum();
        let eig2: f64 = e.iter().map(|x| x * x).sum();
        assert!((frob2 - eig2).abs() < 1e-11);
    }

    #[test]
    fn jacobi_rejects_asymmetric() {
        let m = vec![vec![1.0, 2.0], vec![0.0, 1.0]];
        assert!(jacobi_eigenvalues(&m).is_err());
        assert!(jacobi_eigenvalues(&[]).is_err());
    }

    #[test]
    fn criterion_ids_are_validated() {
        assert!(run_criterion(0, 42).is_err());
        assert!(run_criterion(12, 42).is_err());
        assert_eq!(criterion_name(3), "spectral weight moments");
    }

    #[test]
    fn quick_criteria_pass() {
        for id in QUICK_CRITERIA {
            let res = run_criterion(id, 42).unwrap();
            assert!(res.passed, "criterion {id} failed: {}", res.details);
            assert_eq!(res.id, id);
        }
    }

    #[test]
    #[ignore = "calibration pilot, run by hand"]
    fn pilot_linearity_statistic() {
        // Distribution of the scaled deviation statistic; the frozen
        // LINEARITY_BOUND must sit above the bulk at both sizes.
        let master = RngStream::new(0xca11b, 0);
        for n in [100_000usize, 200_000] {
            let mut vals: Vec<f64> = (0..200u64)
                .into_par_iter()
                .map(|r| {
                    let mut s = master.substream(r);
                    linearity_statistic(n, &mut s).unwrap()
                })
                .collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            println!(
                "n={n}: q50={:.3} q90={:.3} q95={:.3} q99={:.3} max={:.3}",
                sorted_quantile(&vals, 0.5),
                sorted_quantile(&vals, 0.9),
                sorted_quantile(&vals, 0.95),
                sorted_quantile(&vals, 0.99),
                vals.last().unwrap()
            );
        }
    }

    #[test]
    #[ignore = "calibration pilot, run by hand"]
    fn pilot_derivative_medians() {
        let master = RngStream::new(0xca11b, 1);
        let pairs: Vec<(f64, f64)> = (0..60u64)
            .into_par_iter()
            .map(|r| {
                let mut stream = master.substream(r);
                let coarse = sample_path_for(&mut stream, 5e-4, 8.01).unwrap();
                let rc =
                    derivative_check_with(&coarse, 2.0, 0, 1, 20, 8.0, SlopeExtraction::OneSided)
                        .unwrap();
                let fine = coarse.refine(&mut stream).unwrap();
                let rf =
                    derivative_check_with(&fine, 2.0, 0, 1, 20, 8.0, SlopeExtraction::OneSided)
                        .unwrap();
                (rc[0].rel_err, rf[0].rel_err)
            })
            .collect();
        let mut c: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let mut f: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        println!(
            "coarse median {:.4}, fine median {:.4}",
            median(&mut c),
            median(&mut f)
        );
    }
}
