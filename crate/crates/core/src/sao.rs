//! Finite-difference discretization of the shifted-domain operator
//! `-d²/dx² + x + (2/√β) b'` with Dirichlet ends.
//!
//! Every domain shift reads the same increment array of one BrownianGrid,
//! which couples all solves pathwise: the matrix of the domain starting one
//! cell to the right is exactly (bitwise) the principal submatrix of its
//! neighbor with the first row and column removed. Eigenvalue monotonicity
//! in t and the nonnegativity of difference quotients are therefore exact
//! linear algebra on each path, not statistical statements.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::validate_beta;
use crate::error::{Error, Result};
use crate::randvar::{sample_brownian_grid, BrownianGrid, RngStream};
use crate::stats::{self, KsReport};
use crate::tridiag::TridiagSym;

/// Default mesh width h.
pub const DEFAULT_MESH: f64 = 5e-4;
/// Magnitude of the first Airy-function zero: the β = ∞ ground eigenvalue
/// of the operator on [0, ∞).
pub const AIRY_FIRST_ZERO_MAG: f64 = 2.338_107_410_459_767;
/// Default domain length; the potential is at least 8 at the right wall, so
/// truncation error is negligible against statistical noise for k <= 5.
pub const DEFAULT_EXTENT: f64 = 8.0;
/// Default difference-quotient window in grid cells. Smaller windows
/// amplify eigensolver tolerance noise, larger ones pick up curvature.
pub const DEFAULT_WINDOW_CELLS: usize = 20;

/// Absolute bisection tolerance for operator eigenvalues. The matrices have
/// Gershgorin radius ~4/h², so the relative default would be far too coarse
/// for O(1) eigenvalues.
const EIG_TOL: f64 = 1e-9;

/// How the boundary slope f'(t) is read off the first eigenfunction values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlopeExtraction {
    /// phi(t+h)/h; first order, but the eigenfunction has zero curvature at
    /// the wall, so the error is O(h²) in practice.
    OneSided,
    /// (4 phi(t+h) - phi(t+2h)) / 2h; second order.
    ThreePoint,
}

/// Eigen-data of one shifted domain [t, right_edge].
#[derive(Debug, Clone)]
pub struct SaoDomainSolve {
    pub t_index: usize,
    /// Left boundary position origin + t_index·h.
    pub t: f64,
    /// Dirichlet wall position (grid-aligned).
    pub right_edge: f64,
    /// k lowest eigenvalues, increasing.
    pub eigs: Vec<f64>,
    /// f'_j(t), one per eigenvalue, positive by the sign convention.
    pub boundary_slopes: Vec<f64>,
    /// Interior eigenfunction values, quadrature-normalized: h·Σφ² = 1.
    pub eigenfunctions: Vec<Vec<f64>>,
}

/// One row of a pathwise derivative comparison at fixed t.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub eig_index: usize,
    /// (Λ_j(t+δ) - Λ_j(t)) / δ on one path.
    pub fd_quotient: f64,
    /// Squared boundary slope at t: the exact derivative in the limit.
    pub slope_squared: f64,
    /// |fd_quotient - slope_squared| / slope_squared.
    pub rel_err: f64,
}

/// Rayleigh quotient of a spliced test function against the true eigenvalue
/// of the target domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpliceReport {
    pub rq_value: f64,
    pub lambda_t: f64,
}

fn noise_coeff(beta: f64) -> Result<f64> {
    validate_beta(beta)?;
    Ok(if beta.is_infinite() {
        0.0
    } else {
        2.0 / beta.sqrt()
    })
}

/// Greatest grid index whose point lies at or left of `l_right`.
fn right_index_for(path: &BrownianGrid, l_right: f64) -> Result<usize> {
    if !l_right.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "right truncation must be finite, got {l_right}"
        )));
    }
    let cells = (l_right - path.origin()) / path.mesh();
    if cells < 2.0 {
        return Err(Error::Dimension(format!(
            "right truncation {l_right} leaves no interior on a path starting at {}",
            path.origin()
        )));
    }
    let idx = (cells * (1.0 + 1e-12) + 1e-9).floor() as usize;
    if idx > path.num_cells() {
        return Err(Error::Dimension(format!(
            "right truncation {l_right} exceeds the path extent {}",
            path.right_edge()
        )));
    }
    Ok(idx)
}

/// Core assembly between two global grid indices. Diagonal entries are
/// computed from the global index so matrices at different t_index are
/// bitwise principal submatrices of each other.
fn assemble_by_indices(
    path: &BrownianGrid,
    beta: f64,
    t_index: usize,
    wall_index: usize,
) -> Result<TridiagSym> {
    let coeff = noise_coeff(beta)?;
    if wall_index < t_index + 2 {
        return Err(Error::Dimension(format!(
            "domain [{t_index}, {wall_index}] in grid cells has no interior point"
        )));
    }
    if wall_index > path.num_cells() {
        return Err(Error::Dimension(format!(
            "wall index {wall_index} exceeds the path's {} cells",
            path.num_cells()
        )));
    }
    let h = path.mesh();
    let inv_h2 = 1.0 / (h * h);
    let interior = wall_index - t_index - 1;
    let inc = path.increments();
    let mut diag = Vec::with_capacity(interior);
    for j in 1..=interior {
        let m = t_index + j;
        let x = path.origin() + m as f64 * h;
        diag.push(2.0 * inv_h2 + x + coeff * inc[m - 1] / h);
    }
    TridiagSym::new(diag, vec![-inv_h2; interior - 1])
}

/// Same stencil with the potential measured from the left wall (x - t
/// instead of x), the pullback of the shifted domain to [0, L]. At β = ∞
/// the result is independent of t_index bit-for-bit, which is what makes
/// the recentered process literally stationary in the deterministic limit.
fn assemble_recentered(
    path: &BrownianGrid,
    beta: f64,
    t_index: usize,
    interior: usize,
) -> Result<TridiagSym> {
    let coeff = noise_coeff(beta)?;
    if interior == 0 {
        return Err(Error::Dimension("recentered domain has no interior".into()));
    }
    if t_index + interior + 1 > path.num_cells() {
        return Err(Error::Dimension(format!(
            "domain needs {} cells, path has {}",
            t_index + interior + 1,
            path.num_cells()
        )));
    }
    let h = path.mesh();
    let inv_h2 = 1.0 / (h * h);
    let inc = path.increments();
    let mut diag = Vec::with_capacity(interior);
    for j in 1..=interior {
        diag.push(2.0 * inv_h2 + j as f64 * h + coeff * inc[t_index + j - 1] / h);
    }
    TridiagSym::new(diag, vec![-inv_h2; interior - 1])
}

/// Discretized operator on [origin + t_index·h, l_right], Dirichlet at both
/// ends: diagonal 2/h² + x_j + (2/√β)·ΔB/h with the backward increment cell
/// at each interior point, off-diagonal -1/h².
pub fn assemble_sao_matrix(
    path: &BrownianGrid,
    beta: f64,
    t_index: usize,
    l_right: f64,
) -> Result<TridiagSym> {
    let wall = right_index_for(path, l_right)?;
    assemble_by_indices(path, beta, t_index, wall)
}

fn solve_by_indices(
    path: &BrownianGrid,
    beta: f64,
    t_index: usize,
    wall_index: usize,
    k: usize,
    slope: SlopeExtraction,
) -> Result<SaoDomainSolve> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "must request at least one eigenvalue".into(),
        ));
    }
    let matrix = assemble_by_indices(path, beta, t_index, wall_index)?;
    let h = path.mesh();
    let eigs = matrix.lowest_eigenvalues(k, Some(EIG_TOL))?;
    let sqrt_h = h.sqrt();
    let mut slopes = Vec::with_capacity(k);
    let mut funcs = Vec::with_capacity(k);
    for &lam in &eigs {
        let pair = matrix.eigenvector_for(lam, None)?;
        let phi: Vec<f64> = pair.eigenvector.iter().map(|v| v / sqrt_h).collect();
        let s = match slope {
            SlopeExtraction::OneSided => phi[0] / h,
            SlopeExtraction::ThreePoint => {
                if phi.len() < 2 {
                    phi[0] / h
                } else {
                    (4.0 * phi[0] - phi[1]) / (2.0 * h)
                }
            }
        };
        slopes.push(s);
        funcs.push(phi);
    }
    Ok(SaoDomainSolve {
        t_index,
        t: path.origin() + t_index as f64 * h,
        right_edge: path.origin() + wall_index as f64 * h,
        eigs,
        boundary_slopes: slopes,
        eigenfunctions: funcs,
    })
}

/// k lowest eigen-pairs of the domain [origin + t_index·h, l_right] with
/// one-sided boundary slopes.
pub fn solve_domain(
    path: &BrownianGrid,
    beta: f64,
    t_index: usize,
    l_right: f64,
    k: usize,
) -> Result<SaoDomainSolve> {
    solve_domain_with(path, beta, t_index, l_right, k, SlopeExtraction::OneSided)
}

/// `solve_domain` with an explicit slope-extraction scheme.
pub fn solve_domain_with(
    path: &BrownianGrid,
    beta: f64,
    t_index: usize,
    l_right: f64,
    k: usize,
    slope: SlopeExtraction,
) -> Result<SaoDomainSolve> {
    let wall = right_index_for(path, l_right)?;
    solve_by_indices(path, beta, t_index, wall, k, slope)
}

/// Compare the difference quotient over `window` cells with the squared
/// boundary slope at t, both on the same path and with a shared right wall
/// at distance `DEFAULT_EXTENT` (so the shifted matrix is an exact
/// principal submatrix and the quotient is nonnegative by interlacing).
pub fn derivative_check(
    path: &BrownianGrid,
    beta: f64,
    t_index: usize,
    k: usize,
    window: usize,
) -> Result<Vec<DerivativeReport>> {
    derivative_check_with(
        path,
        beta,
        t_index,
        k,
        window,
        DEFAULT_EXTENT,
        SlopeExtraction::OneSided,
    )
}

/// `derivative_check` with explicit domain length and slope scheme.
pub fn derivative_check_with(
    path: &BrownianGrid,
    beta: f64,
    t_index: usize,
    k: usize,
    window: usize,
    extent: f64,
    slope: SlopeExtraction,
) -> Result<Vec<DerivativeReport>> {
    if window == 0 {
        return Err(Error::InvalidParameter(
            "difference window must be at least one cell".into(),
        ));
    }
    let h = path.mesh();
    let extent_cells = (extent / h).round() as usize;
    let wall_index = t_index + extent_cells;
    if window + 2 > extent_cells {
        return Err(Error::Dimension(format!(
            "window of {window} cells leaves no interior in {extent_cells} extent cells"
        )));
    }
    let at_t = solve_by_indices(path, beta, t_index, wall_index, k, slope)?;
    let shifted = solve_by_indices(path, beta, t_index + window, wall_index, k, slope)?;
    let delta = window as f64 * h;
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let fd = (shifted.eigs[j] - at_t.eigs[j]) / delta;
        let s2 = at_t.boundary_slopes[j] * at_t.boundary_slopes[j];
        out.push(DerivativeReport {
            eig_index: j,
            fd_quotient: fd,
            slope_squared: s2,
            rel_err: (fd - s2).abs() / s2,
        });
    }
    Ok(out)
}

/// Rayleigh quotient of the spliced test function ψ under the t-domain
/// matrix: ψ is a linear ramp on [t, a] up to f_{j,s}(a), then the s-domain
/// eigenfunction f_{j,s} on [a, wall]. Both domains share the wall at
/// s + DEFAULT_EXTENT and the same path. `s_index == t_index` is the
/// identity splice used as a diagnostic.
pub fn spliced_rayleigh_bound(
    path: &BrownianGrid,
    beta: f64,
    s_index: usize,
    t_index: usize,
    splice_a: f64,
    j: usize,
) -> Result<SpliceReport> {
    spliced_rayleigh_bound_with(path, beta, s_index, t_index, splice_a, j, DEFAULT_EXTENT)
}

/// `spliced_rayleigh_bound` with explicit s-domain length.
pub fn spliced_rayleigh_bound_with(
    path: &BrownianGrid,
    beta: f64,
    s_index: usize,
    t_index: usize,
    splice_a: f64,
    j: usize,
    extent: f64,
) -> Result<SpliceReport> {
    if s_index > t_index {
        return Err(Error::InvalidParameter(format!(
            "need s <= t, got cell indices {s_index} > {t_index}"
        )));
    }
    let h = path.mesh();
    let t = path.origin() + t_index as f64 * h;
    let extent_cells = (extent / h).round() as usize;
    let wall_index = s_index + extent_cells;
    let ramp_cells = ((splice_a - t) / h).round() as usize;
    if ramp_cells == 0 {
        return Err(Error::InvalidParameter(format!(
            "splice point {splice_a} is not to the right of t = {t}"
        )));
    }
    let a_index = t_index + ramp_cells;
    if a_index + 2 > wall_index {
        return Err(Error::InvalidParameter(format!(
            "splice point {splice_a} leaves no room before the wall"
        )));
    }
    // f_{j,s} on [s, wall]: interior values at s + m·h, m = 1..wall-s-1.
    let s_solve = solve_by_indices(
        path,
        beta,
        s_index,
        wall_index,
        j + 1,
        SlopeExtraction::OneSided,
    )?;
    let f = &s_solve.eigenfunctions[j];
    let f_at_a = f[a_index - s_index - 1];
    let t_matrix = assemble_by_indices(path, beta, t_index, wall_index)?;
    let interior = wall_index - t_index - 1;
    let mut psi = Vec::with_capacity(interior);
    for i in 1..=interior {
        let m = t_index + i;
        if m < a_index {
            psi.push(f_at_a * i as f64 / ramp_cells as f64);
        } else {
            psi.push(f[m - s_index - 1]);
        }
    }
    let rq_value = t_matrix.rayleigh_quotient(&psi)?;
    let lambda_t = t_matrix.lowest_eigenvalues(j + 1, Some(EIG_TOL))?[j];
    Ok(SpliceReport { rq_value, lambda_t })
}

/// Two-sample KS between recentered lowest eigenvalues at t = 0 and
/// t = t_star, one fresh path per replica, both solves per replica on the
/// same path. Recentering happens in the operator (potential measured from
/// the left wall), so at t_star = 0 or β = ∞ the two samples are identical
/// and the statistic is exactly zero.
pub fn stationarity_shift_check(
    master: &RngStream,
    beta: f64,
    mesh: f64,
    extent: f64,
    t_star: f64,
    reps: usize,
    alpha: f64,
) -> Result<KsReport> {
    validate_beta(beta)?;
    if !(mesh > 0.0) || !mesh.is_finite() || !(extent > 2.0 * mesh) || !extent.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "bad mesh/extent pair ({mesh}, {extent})"
        )));
    }
    if !(t_star >= 0.0) || !t_star.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "t_star must be finite and nonnegative, got {t_star}"
        )));
    }
    let tau = (t_star / mesh).round() as usize;
    let extent_cells = (extent / mesh).round() as usize;
    let cells = tau + extent_cells;
    let pairs: Vec<Result<(f64, f64)>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut stream = master.substream(rep as u64);
            let path = sample_brownian_grid(&mut stream, mesh, cells)?;
            let at0 = assemble_recentered(&path, beta, 0, extent_cells - 1)?
                .lowest_eigenvalues(1, Some(EIG_TOL))?[0];
            let at_star = assemble_recentered(&path, beta, tau, extent_cells - 1)?
                .lowest_eigenvalues(1, Some(EIG_TOL))?[0];
            Ok((at0, at_star))
        })
        .collect();
    let mut zero = Vec::with_capacity(reps);
    let mut star = Vec::with_capacity(reps);
    for p in pairs {
        let (a, b) = p?;
        zero.push(a);
        star.push(b);
    }
    stats::ks_two_sample(&zero, &star, alpha)
}

/// Fresh path with enough cells for any domain inside [0, span].
pub fn sample_path_for(stream: &mut RngStream, mesh: f64, span: f64) -> Result<BrownianGrid> {
    if !(span > 0.0) || !span.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "path span must be positive and finite, got {span}"
        )));
    }
    let cells = (span / mesh).ceil() as usize + 2;
    sample_brownian_grid(stream, mesh, cells)
}
