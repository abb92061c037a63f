//! Symmetric tridiagonal eigensolver: Sturm-count bisection for selected
//! lowest eigenvalues and inverse iteration for their eigenvectors.
//!
//! Both the random-matrix side (edge minors) and the operator side
//! (discretized shifted-domain Hamiltonians) funnel through this module, so
//! its accuracy floor sets the accuracy floor of everything downstream.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix: `diag` of length n, `offdiag` of length
/// n - 1 holding the sub/superdiagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagSym {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

/// An eigenvalue with its unit eigenvector, the vector's first entry (the
/// boundary-slope statistic), and the achieved residual `‖T v - λ v‖₂`.
#[derive(Debug, Clone)]
pub struct SpectralPair {
    pub eigenvalue: f64,
    pub eigenvector: Vec<f64>,
    /// First entry of the sign-fixed eigenvector; squared, it is the
    /// spectral weight of this mode.
    pub first_entry: f64,
    pub residual: f64,
}

impl TridiagSym {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Dimension(
                "matrix dimension must be at least 1".into(),
            ));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::Dimension(format!(
                "offdiagonal length {} does not match dimension {}",
                offdiag.len(),
                diag.len()
            )));
        }
        if diag.iter().chain(offdiag.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(Self { diag, offdiag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Max row sum; bounds the spectral radius.
    pub fn inf_norm(&self) -> f64 {
        let n = self.dim();
        let mut best: f64 = 0.0;
        for i in 0..n {
            let mut row = self.diag[i].abs();
            if i > 0 {
                row += self.offdiag[i - 1].abs();
            }
            if i + 1 < n {
                row += self.offdiag[i].abs();
            }
            best = best.max(row);
        }
        best
    }

    /// Interval guaranteed to contain the whole spectrum.
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.offdiag[i - 1].abs();
            }
            if i + 1 < n {
                r += self.offdiag[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`, by the signs of the LDLᵀ
    /// pivots of `T - x I`. Vanishing pivots are replaced by `-pivmin` so the
    /// recurrence never divides by zero; the count is then exact up to pivmin
    /// perturbations of the spectrum.
    pub fn sturm_count(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE * self.offdiag.iter().map(|e| e * e).fold(1.0f64, f64::max);
        let mut count = 0usize;
        let mut q = self.diag[0] - x;
        if q.abs() <= pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let e2 = self.offdiag[i - 1] * self.offdiag[i - 1];
            q = self.diag[i] - x - e2 / q;
            if q.abs() <= pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k` lowest eigenvalues in ascending order, each bisected to width
    /// `tol` (default: 1e-10 times the Gershgorin half-width).
    pub fn lowest_eigenvalues(&self, k: usize, tol: Option<f64>) -> Result<Vec<f64>> {
        let n = self.dim();
        if k > n {
            return Err(Error::Dimension(format!(
                "requested {k} eigenvalues of a dimension-{n} matrix"
            )));
        }
        if k == 0 {
            return Ok(Vec::new());
        }
        let (g_lo, g_hi) = self.gershgorin_bounds();
        let half_width = 0.5 * (g_hi - g_lo);
        let tol = match tol {
            Some(t) => {
                if !(t > 0.0) || !t.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "bisection tolerance must be positive and finite, got {t}"
                    )));
                }
                t
            }
            None => 1e-10 * half_width.max(f64::MIN_POSITIVE),
        };
        let mut out = Vec::with_capacity(k);
        // Eigenvalues are ascending, so each search can start at the previous
        // one's lower bracket end.
        let mut floor = g_lo;
        for i in 0..k {
            let mut lo = floor;
            let mut hi = g_hi;
            for _ in 0..200 {
                if hi - lo <= tol {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break; // bracket exhausted at f64 resolution
                }
                if self.sturm_count(mid) > i {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            out.push(0.5 * (lo + hi));
            floor = lo;
        }
        Ok(out)
    }

    /// `T v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if v.len() != n {
            return Err(Error::Dimension(format!(
                "vector length {} does not match dimension {n}",
                v.len()
            )));
        }
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * v[i];
            if i > 0 {
                acc += self.offdiag[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                acc += self.offdiag[i] * v[i + 1];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// `(vᵀ T v) / (vᵀ v)`.
    pub fn rayleigh_quotient(&self, v: &[f64]) -> Result<f64> {
        let tv = self.matvec(v)?;
        let num: f64 = v.iter().zip(&tv).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().map(|a| a * a).sum();
        if den == 0.0 || !den.is_finite() {
            return Err(Error::InvalidParameter(
                "Rayleigh quotient of a zero or non-finite vector".into(),
            ));
        }
        Ok(num / den)
    }

    /// Eigenvector for the eigenvalue nearest `lambda`, by inverse iteration
    /// on the LU-factored shift. Returns the refined eigenvalue (a Rayleigh
    /// quotient), the unit eigenvector with its first nonzero entry positive,
    /// and the achieved residual.
    ///
    /// `tol` is the acceptable residual; the iteration always runs to its
    /// rounding floor, so `tol` only gates the error return (default:
    /// 1e-8 · max(1, ‖T‖∞)).
    pub fn eigenvector_for(&self, lambda: f64, tol: Option<f64>) -> Result<SpectralPair> {
        let n = self.dim();
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "eigenvalue shift must be finite, got {lambda}"
            )));
        }
        let norm = self.inf_norm().max(1.0);
        let accept = match tol {
            Some(t) => {
                if !(t > 0.0) || !t.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "residual tolerance must be positive and finite, got {t}"
                    )));
                }
                t
            }
            None => 1e-8 * norm,
        };
        if n == 1 {
            return Ok(SpectralPair {
                eigenvalue: self.diag[0],
                eigenvector: vec![1.0],
                first_entry: 1.0,
                residual: 0.0,
            });
        }
        let factor = self.factor_shifted(lambda);
        // Deterministic pseudo-random start vector keeps reruns bit-identical
        // while avoiding accidental orthogonality to the target.
        let mut v: Vec<f64> = (0..n)
            .map(|i| {
                let z = splitmix(i as u64 ^ (n as u64).wrapping_mul(0x9e37_79b9));
                (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
            })
            .collect();
        normalize(&mut v)?;
        let mut best_vec = v.clone();
        let mut best_resid = f64::INFINITY;
        let mut stalled = 0;
        for _ in 0..50 {
            factor.solve_in_place(&mut v);
            normalize(&mut v)?;
            let rq = self.rayleigh_quotient(&v)?;
            let tv = self.matvec(&v)?;
            let resid = tv
                .iter()
                .zip(&v)
                .map(|(t, x)| {
                    let r = t - rq * x;
                    r * r
                })
                .sum::<f64>()
                .sqrt();
            if resid < best_resid {
                if resid > 0.5 * best_resid {
                    stalled += 1;
                } else {
                    stalled = 0;
                }
                best_resid = resid;
                best_vec = v.clone();
            } else {
                stalled += 1;
            }
            if best_resid <= f64::EPSILON * norm || stalled >= 3 {
                break;
            }
        }
        if best_resid > accept {
            return Err(Error::Convergence(format!(
                "inverse iteration stalled at residual {best_resid:.3e} (accept {accept:.3e}) near lambda = {lambda}"
            )));
        }
        // Sign convention: first nonzero entry positive. For an unreduced
        // tridiagonal (all offdiagonals nonzero) the first entry is nonzero
        // in exact arithmetic; the scan only matters for decoupled blocks.
        if let Some(&lead) = best_vec.iter().find(|x| **x != 0.0) {
            if lead < 0.0 {
                for x in &mut best_vec {
                    *x = -*x;
                }
            }
        }
        let eigenvalue = self.rayleigh_quotient(&best_vec)?;
        Ok(SpectralPair {
            eigenvalue,
            first_entry: best_vec[0],
            eigenvector: best_vec,
            residual: best_resid,
        })
    }

    /// Partial-pivot LU of `T - lambda I` (dgttrf layout: multipliers in
    /// `dl`, U diagonals in `d`/`du`/`du2`, swap flags per step).
    fn factor_shifted(&self, lambda: f64) -> TriFactor {
        let n = self.dim();
        let mut d: Vec<f64> = self.diag.iter().map(|x| x - lambda).collect();
        let mut du: Vec<f64> = self.offdiag.clone();
        let mut dl: Vec<f64> = self.offdiag.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if dl[i].abs() <= d[i].abs() {
                let fact = if d[i] != 0.0 { dl[i] / d[i] } else { 0.0 };
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        // Exact-zero pivots get a tiny nudge; inverse iteration then blows up
        // along the right direction instead of dividing by zero.
        let guard = f64::EPSILON * self.inf_norm().max(1.0) * f64::EPSILON;
        for pivot in &mut d {
            if pivot.abs() < guard {
                *pivot = if *pivot < 0.0 { -guard } else { guard };
            }
        }
        TriFactor {
            d,
            du,
            du2,
            dl,
            swapped,
        }
    }
}

struct TriFactor {
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    dl: Vec<f64>,
    swapped: Vec<bool>,
}

impl TriFactor {
    fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.d.len();
        // Forward: apply P and L⁻¹.
        for i in 0..n - 1 {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= self.dl[i] * x[i];
        }
        // Back substitution through U.
        x[n - 1] /= self.d[n - 1];
        if n >= 2 {
            x[n - 2] = (x[n - 2] - self.du[n - 2] * x[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - self.du[i] * x[i + 1] - self.du2[i] * x[i + 2]) / self.d[i];
        }
        // Guard against overflow to infinity when a pivot was nudged.
        let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !max.is_finite() {
            for v in x.iter_mut() {
                if !v.is_finite() {
                    *v = if v.is_sign_negative() { -1e300 } else { 1e300 };
                }
            }
        }
    }
}

fn normalize(v: &mut [f64]) -> Result<()> {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 || !max.is_finite() {
        return Err(Error::Convergence(
            "inverse iteration produced a zero or non-finite vector".into(),
        ));
    }
    // Scale by the max first so the sum of squares cannot overflow.
    let norm = v
        .iter()
        .map(|x| {
            let t = x / max;
            t * t
        })
        .sum::<f64>()
        .sqrt()
        * max;
    for x in v.iter_mut() {
        *x /= norm;
    }
    Ok(())
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::jacobi_eigenvalues;
    use proptest::prelude::*;

    /// Discrete Dirichlet Laplacian: diag 2, offdiag -1, eigenvalues
    /// 4 sin²(kπ / (2(m+1))), eigenvectors sin(jkπ/(m+1)).
    fn laplacian(m: usize) -> TridiagSym {
        TridiagSym::new(vec![2.0; m], vec![-1.0; m - 1]).unwrap()
    }

    fn laplacian_eig(m: usize, k: usize) -> f64 {
        let s = (k as f64 * std::f64::consts::PI / (2.0 * (m as f64 + 1.0))).sin();
        4.0 * s * s
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(TridiagSym::new(vec![], vec![]).is_err());
        assert!(TridiagSym::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(TridiagSym::new(vec![1.0], vec![f64::NAN]).is_err());
        assert!(TridiagSym::new(vec![1.0, f64::INFINITY], vec![0.5]).is_err());
    }

    #[test]
    fn sturm_count_brackets_known_spectrum() {
        let t = laplacian(10);
        assert_eq!(t.sturm_count(-1.0), 0);
        assert_eq!(t.sturm_count(5.0), 10);
        for k in 1..=9 {
            // Between the k-th and (k+1)-th eigenvalues the count is k.
            let mid = 0.5 * (laplacian_eig(10, k) + laplacian_eig(10, k + 1));
            assert_eq!(t.sturm_count(mid), k, "k = {k}");
        }
    }

    #[test]
    fn laplacian_lowest_eigenvalues_match_closed_form() {
        for m in [10usize, 100] {
            let t = laplacian(m);
            let eigs = t.lowest_eigenvalues(3, Some(1e-13)).unwrap();
            for (i, &e) in eigs.iter().enumerate() {
                let exact = laplacian_eig(m, i + 1);
                assert!(
                    (e - exact).abs() < 1e-12,
                    "m={m} k={} got {e} want {exact}",
                    i + 1
                );
            }
        }
    }

    #[test]
    fn laplacian_ground_vector_is_sine_profile() {
        let m = 10;
        let t = laplacian(m);
        let lam = t.lowest_eigenvalues(1, None).unwrap()[0];
        let pair = t.eigenvector_for(lam, None).unwrap();
        assert!(pair.residual < 1e-12, "residual {}", pair.residual);
        // Compare against sin(jπ/(m+1)), normalized, same sign convention.
        let mut exact: Vec<f64> = (1..=m)
            .map(|j| (j as f64 * std::f64::consts::PI / (m as f64 + 1.0)).sin())
            .collect();
        let norm = exact.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut exact {
            *x /= norm;
        }
        for (a, b) in pair.eigenvector.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        assert!((pair.eigenvalue - laplacian_eig(m, 1)).abs() < 1e-12);
        assert_eq!(pair.first_entry, pair.eigenvector[0]);
    }

    #[test]
    fn two_by_two_analytic() {
        let t = TridiagSym::new(vec![2.0, 2.0], vec![1.0]).unwrap();
        let eigs = t.lowest_eigenvalues(2, Some(1e-14)).unwrap();
        assert!((eigs[0] - 1.0).abs() < 1e-13);
        assert!((eigs[1] - 3.0).abs() < 1e-13);
        let ground = t.eigenvector_for(eigs[0], None).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // Ground vector (1, -1)/√2 up to sign; convention makes entry 0
        // positive.
        assert!((ground.eigenvector[0] - r).abs() < 1e-12);
        assert!((ground.eigenvector[1] + r).abs() < 1e-12);
        assert!(ground.first_entry > 0.0);
    }

    #[test]
    fn single_entry_matrix() {
        let t = TridiagSym::new(vec![7.5], vec![]).unwrap();
        assert_eq!(t.lowest_eigenvalues(1, None).unwrap(), vec![7.5]);
        let pair = t.eigenvector_for(7.5, None).unwrap();
        assert_eq!(pair.eigenvector, vec![1.0]);
        assert_eq!(pair.first_entry, 1.0);
        assert_eq!(pair.residual, 0.0);
    }

    #[test]
    fn decoupled_blocks_with_zero_offdiagonal() {
        // offdiag zero splits the matrix into independent 1x1 blocks.
        let t = TridiagSym::new(vec![3.0, 1.0, 2.0], vec![0.0, 0.0]).unwrap();
        let eigs = t.lowest_eigenvalues(3, Some(1e-14)).unwrap();
        assert!((eigs[0] - 1.0).abs() < 1e-12);
        assert!((eigs[1] - 2.0).abs() < 1e-12);
        assert!((eigs[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn random_matrix_matches_dense_oracle() {
        // Fixed arbitrary entries, full spectrum against Jacobi rotations.
        let diag = vec![0.3, -1.2, 2.7, 0.0, -0.5, 1.9, -2.2, 0.8];
        let off = vec![1.1, -0.4, 0.9, 1.5, -0.2, 0.7, 1.3];
        let t = TridiagSym::new(diag.clone(), off.clone()).unwrap();
        let eigs = t.lowest_eigenvalues(8, Some(1e-13)).unwrap();
        let n = diag.len();
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            dense[i][i] = diag[i];
            if i + 1 < n {
                dense[i][i + 1] = off[i];
                dense[i + 1][i] = off[i];
            }
        }
        let oracle = jacobi_eigenvalues(&dense).unwrap();
        for (a, b) in eigs.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn eigenvectors_orthogonal_and_accurate() {
        let diag = vec![0.3, -1.2, 2.7, 0.0, -0.5, 1.9, -2.2, 0.8];
        let off = vec![1.1, -0.4, 0.9, 1.5, -0.2, 0.7, 1.3];
        let t = TridiagSym::new(diag, off).unwrap();
        let eigs = t.lowest_eigenvalues(3, None).unwrap();
        let pairs: Vec<SpectralPair> = eigs
            .iter()
            .map(|&l| t.eigenvector_for(l, None).unwrap())
            .collect();
        for p in &pairs {
            assert!(p.residual < 1e-10, "residual {}", p.residual);
            let norm: f64 = p.eigenvector.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        for i in 0..pairs.len() {
            for j in i + 1..pairs.len() {
                let dot: f64 = pairs[i]
                    .eigenvector
                    .iter()
                    .zip(&pairs[j].eigenvector)
                    .map(|(a, b)| a * b)
                    .sum();
                assert!(dot.abs() < 1e-8, "modes {i},{j} dot {dot}");
            }
        }
    }

    #[test]
    fn rayleigh_quotient_basics() {
        let t = TridiagSym::new(vec![2.0, 2.0], vec![1.0]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((t.rayleigh_quotient(&[r, r]).unwrap() - 3.0).abs() < 1e-14);
        assert!((t.rayleigh_quotient(&[r, -r]).unwrap() - 1.0).abs() < 1e-14);
        assert!(t.rayleigh_quotient(&[0.0, 0.0]).is_err());
        assert!(t.rayleigh_quotient(&[1.0]).is_err());
    }

    #[test]
    fn request_bounds_checked() {
        let t = laplacian(4);
        assert!(t.lowest_eigenvalues(5, None).is_err());
        assert!(t.lowest_eigenvalues(0, None).unwrap().is_empty());
        assert!(t.lowest_eigenvalues(1, Some(0.0)).is_err());
        assert!(t.eigenvector_for(f64::NAN, None).is_err());
    }

    fn arb_tridiag(max_n: usize) -> impl Strategy<Value = TridiagSym> {
        (2usize..=max_n).prop_flat_map(|n| {
            (
                proptest::collection::vec(-5.0f64..5.0, n),
                proptest::collection::vec(0.05f64..3.0, n - 1),
            )
                .prop_map(|(d, e)| TridiagSym::new(d, e).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// The Sturm count is a nondecreasing step function of x.
        #[test]
        fn sturm_count_monotone(t in arb_tridiag(12), x in -10.0f64..10.0) {
            prop_assert!(t.sturm_count(x) <= t.sturm_count(x + 0.5));
            let (lo, hi) = t.gershgorin_bounds();
            prop_assert_eq!(t.sturm_count(lo - 1.0), 0);
            prop_assert_eq!(t.sturm_count(hi + 1.0), t.dim());
        }

        /// Cauchy interlacing: eigenvalues of the leading principal
        /// submatrix separate those of the full matrix.
        #[test]
        fn principal_submatrix_interlaces(t in arb_tridiag(10)) {
            let n = t.dim();
            let full = t.lowest_eigenvalues(n, Some(1e-12)).unwrap();
            let sub = TridiagSym::new(
                t.diag()[..n - 1].to_vec(),
                t.offdiag()[..n.saturating_sub(2)].to_vec(),
            )
            .unwrap();
            let inner = sub.lowest_eigenvalues(n - 1, Some(1e-12)).unwrap();
            for i in 0..n - 1 {
                prop_assert!(full[i] <= inner[i] + 1e-9, "i={} {} vs {}", i, full[i], inner[i]);
                prop_assert!(inner[i] <= full[i + 1] + 1e-9);
            }
        }

        /// Inverse iteration reproduces the bisected eigenvalue.
        #[test]
        fn eigenvector_value_consistent(t in arb_tridiag(10)) {
            let lam = t.lowest_eigenvalues(1, None).unwrap()[0];
            let pair = t.eigenvector_for(lam, None).unwrap();
            let (g_lo, g_hi) = t.gershgorin_bounds();
            let scale = (g_hi - g_lo).max(1.0);
            prop_assert!((pair.eigenvalue - lam).abs() < 1e-8 * scale);
        }
    }
}
