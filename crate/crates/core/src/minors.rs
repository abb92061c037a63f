//! Scaled edge-eigenvalue trajectories along the minor index, the spectral
//! weights of the lowest modes, and the derivative estimators built from
//! them.
//!
//! Time `t` maps to minor order `k = ⌊t n^{1/3}⌋`; all frames of one
//! trajectory are cut from a single ensemble draw, so the trajectory is the
//! coupled eigenvalue process, not a sequence of independent samples.

use rayon::prelude::*;

use crate::ensemble::{edge_minor_matrix, sample_hermite, BetaEnsembleSpec, EnsembleDraw};
use crate::error::{Error, Result};
use crate::randvar::RngStream;
use crate::stats;

/// State of the eigenvalue process at one time.
#[derive(Debug, Clone)]
pub struct TrajectoryFrame {
    pub t: f64,
    /// Minor order ⌊t n^{1/3}⌋ this frame was computed from.
    pub minor_index: usize,
    /// `n^{1/6} (2√n - λ_j)`, ascending.
    pub scaled_eigs: Vec<f64>,
    /// `scaled_eigs - t`; stationary in t.
    pub recentered: Vec<f64>,
    /// First-entry squared weights of the corresponding eigenvectors.
    pub spectral_weights: Vec<f64>,
    /// `n · weight`: the squared boundary slope estimating dΛ_j/dt.
    pub derivative_est: Vec<f64>,
}

/// One coupled trajectory: every frame is cut from the same draw, and the
/// stream identity is kept so the whole object can be replayed bit-exactly.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub spec: BetaEnsembleSpec,
    pub master_seed: u64,
    pub stream_index: u64,
    pub num_eigs: usize,
    pub frames: Vec<TrajectoryFrame>,
}

/// Minor order active at time `t`.
pub fn minor_index(t: f64, n: usize) -> usize {
    (t * (n as f64).powf(1.0 / 3.0)).floor() as usize
}

/// Time at which minor order `k` switches on.
pub fn time_of_minor(k: usize, n: usize) -> f64 {
    k as f64 * (n as f64).powf(-1.0 / 3.0)
}

fn validate_grid(spec: &BetaEnsembleSpec, num_eigs: usize, t_max: f64, dt: f64) -> Result<()> {
    spec.validate()?;
    if num_eigs == 0 {
        return Err(Error::InvalidParameter(
            "must track at least one eigenvalue".into(),
        ));
    }
    if !t_max.is_finite() || t_max < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "t_max must be finite and nonnegative, got {t_max}"
        )));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "dt must be positive and finite, got {dt}"
        )));
    }
    let k_max = minor_index(t_max, spec.n);
    if k_max + num_eigs + 2 > spec.n {
        return Err(Error::Dimension(format!(
            "t_max = {t_max} reaches minor order {k_max}, exhausting a matrix of dimension {}",
            spec.n
        )));
    }
    Ok(())
}

/// Time grid 0, dt, 2dt, ... capped at t_max (tolerating rounding in the
/// final step).
fn time_grid(t_max: f64, dt: f64) -> Vec<f64> {
    let steps = (t_max / dt * (1.0 + 1e-12) + 1e-12).floor() as usize;
    (0..=steps).map(|i| i as f64 * dt).collect()
}

/// Scaled eigenvalues and first-entry weights of minor `k`.
fn solve_minor(draw: &EnsembleDraw, k: usize, num_eigs: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = edge_minor_matrix(draw, k)?;
    if num_eigs > m.dim() {
        return Err(Error::Dimension(format!(
            "minor {k} has dimension {} < {num_eigs} requested eigenvalues",
            m.dim()
        )));
    }
    let raw = m.lowest_eigenvalues(num_eigs, None)?;
    let scale = (draw.n() as f64).powf(1.0 / 6.0);
    let mut weights = Vec::with_capacity(num_eigs);
    for &lam in &raw {
        let pair = m.eigenvector_for(lam, None)?;
        weights.push(pair.first_entry * pair.first_entry);
    }
    Ok((raw.iter().map(|e| scale * e).collect(), weights))
}

/// Sample one draw and walk the minor lattice over the uniform time grid
/// 0, dt, ..., t_max.
pub fn compute_trajectory(
    spec: &BetaEnsembleSpec,
    stream: &mut RngStream,
    num_eigs: usize,
    t_max: f64,
    dt: f64,
) -> Result<Trajectory> {
    validate_grid(spec, num_eigs, t_max, dt)?;
    let draw = sample_hermite(spec, stream)?;
    let frames = compute_trajectory_from_draw(&draw, num_eigs, t_max, dt)?;
    Ok(Trajectory {
        spec: *spec,
        master_seed: draw.master_seed(),
        stream_index: draw.stream_index(),
        num_eigs,
        frames,
    })
}

/// Compute the frames of an existing draw. Frames sharing a minor order are
/// identical up to the recentering; eigenvalues are checked to be
/// nondecreasing along the minor index and interlacing violations are
/// reported as errors.
pub fn compute_trajectory_from_draw(
    draw: &EnsembleDraw,
    num_eigs: usize,
    t_max: f64,
    dt: f64,
) -> Result<Vec<TrajectoryFrame>> {
    validate_grid(draw.spec(), num_eigs, t_max, dt)?;
    let n = draw.n();
    // Eigenvalues move by O(n^{-1/3}) per minor step; twice the bisection
    // width is the right slack for exact-inequality checks.
    let (g_lo, g_hi) = edge_minor_matrix(draw, 0)?.gershgorin_bounds();
    let slack = 2.0 * 1e-10 * 0.5 * (g_hi - g_lo) * (n as f64).powf(1.0 / 6.0);
    let times = time_grid(t_max, dt);
    let mut frames: Vec<TrajectoryFrame> = Vec::with_capacity(times.len());
    let mut cache: Option<(usize, Vec<f64>, Vec<f64>)> = None;
    let mut prev: Option<(usize, Vec<f64>)> = None;
    for t in times {
        let k = minor_index(t, n);
        let (scaled, weights) = match &cache {
            Some((ck, s, w)) if *ck == k => (s.clone(), w.clone()),
            _ => {
                let (s, w) = solve_minor(draw, k, num_eigs)?;
                cache = Some((k, s.clone(), w.clone()));
                (s, w)
            }
        };
        if let Some((pk, p_eigs)) = &prev {
            if *pk < k {
                for i in 0..num_eigs {
                    if scaled[i] < p_eigs[i] - slack {
                        return Err(Error::Interlacing(format!(
                            "eigenvalue {i} decreased from {} to {} between minors {pk} and {k}",
                            p_eigs[i], scaled[i]
                        )));
                    }
                    let up = i + (k - pk);
                    if up < num_eigs && scaled[i] > p_eigs[up] + slack {
                        return Err(Error::Interlacing(format!(
                            "eigenvalue {i} of minor {k} exceeded eigenvalue {up} of minor {pk}"
                        )));
                    }
                }
            }
        }
        prev = Some((k, scaled.clone()));
        frames.push(TrajectoryFrame {
            t,
            minor_index: k,
            recentered: scaled.iter().map(|e| e - t).collect(),
            derivative_est: weights.iter().map(|q| q * n as f64).collect(),
            spectral_weights: weights,
            scaled_eigs: scaled,
        });
    }
    Ok(frames)
}

/// Difference quotients of eigenvalue `i` between consecutive frames with
/// distinct minor orders: `(Λ_i(k') - Λ_i(k)) / ((k' - k) n^{-1/3})`. The
/// step process only moves on the minor lattice, so quotients use the
/// lattice spacing, not the frame grid's dt.
pub fn derivative_by_finite_difference(traj: &Trajectory, i: usize) -> Result<Vec<f64>> {
    if i >= traj.num_eigs {
        return Err(Error::InvalidParameter(format!(
            "eigenvalue index {i} out of range for {} tracked",
            traj.num_eigs
        )));
    }
    let lattice = (traj.spec.n as f64).powf(-1.0 / 3.0);
    let mut quotients = Vec::new();
    let mut prev: Option<(usize, f64)> = None;
    for f in &traj.frames {
        match prev {
            Some((pk, pv)) if f.minor_index != pk => {
                let dk = (f.minor_index - pk) as f64;
                quotients.push((f.scaled_eigs[i] - pv) / (dk * lattice));
                prev = Some((f.minor_index, f.scaled_eigs[i]));
            }
            None => prev = Some((f.minor_index, f.scaled_eigs[i])),
            _ => {}
        }
    }
    if quotients.is_empty() {
        return Err(Error::InsufficientSamples(
            "trajectory never changes minors; extend t_max past n^{-1/3}".into(),
        ));
    }
    Ok(quotients)
}

/// `n · q_j` samples (squared boundary slopes of the k = 0 matrix), one row
/// of `num_eigs` values per replica. Work is distributed over the current
/// rayon pool; per-draw substreams keep the output identical for any thread
/// count.
pub fn spectral_weight_samples(
    spec: &BetaEnsembleSpec,
    master: &RngStream,
    num_eigs: usize,
    reps: usize,
) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    if reps == 0 {
        return Err(Error::InsufficientSamples("reps must be positive".into()));
    }
    if num_eigs == 0 || num_eigs > spec.n {
        return Err(Error::Dimension(format!(
            "cannot extract {num_eigs} modes from dimension {}",
            spec.n
        )));
    }
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut stream = master.substream(rep as u64);
            let draw = sample_hermite(spec, &mut stream)?;
            let (_, weights) = solve_minor(&draw, 0, num_eigs)?;
            Ok(weights.into_iter().map(|q| q * spec.n as f64).collect())
        })
        .collect()
}

/// Distance of a low-lying eigenvector from the linear ramp through its
/// first entry: pairs `(x_ℓ, |v_ℓ - ℓ v_1|)` for `x_ℓ = ℓ n^{-1/3} ≤ x0`,
/// raw eigenvector units, k = 0 matrix of a fresh draw.
pub fn eigvec_linearity_profile(
    spec: &BetaEnsembleSpec,
    stream: &mut RngStream,
    eig_index: usize,
    x0: f64,
) -> Result<Vec<(f64, f64)>> {
    spec.validate()?;
    if !(x0 > 0.0) || !x0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "profile extent must be positive, got {x0}"
        )));
    }
    let n = spec.n as f64;
    let h = n.powf(-1.0 / 3.0);
    if x0 / h > n {
        return Err(Error::InvalidParameter(format!(
            "profile extent {x0} exceeds the matrix ({} lattice cells)",
            spec.n
        )));
    }
    let draw = sample_hermite(spec, stream)?;
    let m = edge_minor_matrix(&draw, 0)?;
    let raw = m.lowest_eigenvalues(eig_index + 1, None)?;
    let pair = m.eigenvector_for(raw[eig_index], None)?;
    let count = ((x0 / h).floor() as usize).min(pair.eigenvector.len());
    if count == 0 {
        return Err(Error::InvalidParameter(format!(
            "profile extent {x0} is below one mesh width {h}"
        )));
    }
    let v1 = pair.first_entry;
    let mut out = Vec::with_capacity(count);
    for ell in 1..=count {
        let x = ell as f64 * h;
        out.push((x, (pair.eigenvector[ell - 1] - ell as f64 * v1).abs()));
    }
    Ok(out)
}

/// Recentered lowest-eigenvalue samples at times 0 and `t_star`, from
/// disjoint independent draws (two substreams per replica).
pub fn stationarity_samples(
    spec: &BetaEnsembleSpec,
    master: &RngStream,
    t_star: f64,
    reps: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    spec.validate()?;
    if reps == 0 {
        return Err(Error::InsufficientSamples("reps must be positive".into()));
    }
    let n = spec.n;
    let k_star = minor_index(t_star, n);
    if k_star + 2 > n {
        return Err(Error::Dimension(format!(
            "t_star = {t_star} needs minor order {k_star} of dimension {n}"
        )));
    }
    let scale = (n as f64).powf(1.0 / 6.0);
    let t_lattice = time_of_minor(k_star, n);
    let pairs: Vec<Result<(f64, f64)>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut s0 = master.substream(2 * rep as u64);
            let d0 = sample_hermite(spec, &mut s0)?;
            let at0 = edge_minor_matrix(&d0, 0)?.lowest_eigenvalues(1, None)?[0] * scale;
            let mut s1 = master.substream(2 * rep as u64 + 1);
            let d1 = sample_hermite(spec, &mut s1)?;
            let at_star = edge_minor_matrix(&d1, k_star)?.lowest_eigenvalues(1, None)?[0] * scale;
            // Recenter by the lattice time the minor actually realizes.
            Ok((at0, at_star - t_lattice))
        })
        .collect();
    let mut zero = Vec::with_capacity(reps);
    let mut star = Vec::with_capacity(reps);
    for p in pairs {
        let (a, b) = p?;
        zero.push(a);
        star.push(b);
    }
    Ok((zero, star))
}

/// Skewness of derivative samples with a percentile bootstrap interval; a
/// reversible eigenvalue process would need a symmetric increment law, so an
/// interval excluding zero is direct evidence of time irreversibility.
pub fn reversibility_asymmetry(
    stream: &mut RngStream,
    samples: &[f64],
    boot_reps: usize,
    level: f64,
) -> Result<(f64, f64, f64)> {
    if samples.len() < 1000 {
        return Err(Error::InsufficientSamples(format!(
            "skewness certification needs at least 1000 samples, got {}",
            samples.len()
        )));
    }
    let m = stats::moments(samples)?;
    let (lo, hi) = stats::bootstrap_ci(
        stream,
        samples,
        |xs| match stats::moments(xs) {
            Ok(m) => m.skewness,
            Err(_) => 0.0,
        },
        boot_reps,
        level,
    )?;
    Ok((m.skewness, lo, hi))
}
