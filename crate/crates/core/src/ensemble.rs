//! The tridiagonal beta-Hermite ensemble, its leading minors, and the
//! soft-edge scaling that turns their spectra into trajectory samples.
//!
//! A draw keeps the raw tridiagonal entries; minor matrices of every order
//! are cut from the same draw, which is what makes the eigenvalue process
//! along the minor index a coupled process rather than independent samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::randvar::{sample_chi, sample_gaussian, RngStream};
use crate::tridiag::TridiagSym;

/// Ensemble parameters: dimension and inverse temperature. `beta = ∞` is
/// accepted and selects the deterministic (noise-free) model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaEnsembleSpec {
    pub n: usize,
    #[serde(with = "beta_serde")]
    pub beta: f64,
}

impl BetaEnsembleSpec {
    pub fn new(n: usize, beta: f64) -> Result<Self> {
        let spec = Self { n, beta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        validate_beta(self.beta)?;
        if self.n < 2 {
            return Err(Error::Dimension(format!(
                "ensemble dimension must be at least 2, got {}",
                self.n
            )));
        }
        Ok(())
    }
}

/// JSON-safe beta: finite values as numbers, the infinite case as "inf"
/// (plain f64 infinity would serialize to null).
mod beta_serde {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(beta: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if beta.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*beta)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum BetaRepr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match BetaRepr::deserialize(d)? {
            BetaRepr::Num(x) => Ok(x),
            BetaRepr::Text(s) if s == "inf" => Ok(f64::INFINITY),
            BetaRepr::Text(s) => s
                .parse()
                .map_err(|_| D::Error::custom(format!("invalid beta literal {s:?}"))),
        }
    }
}

/// One draw of the n-dimensional ensemble at inverse temperature `beta`.
///
/// `diag_raw[i] ~ N(0, 2)/√β` and `offdiag_raw[i] ~ χ_{(n-1-i)β}/√β`, all
/// independent. `beta = ∞` is the deterministic limit: zero diagonal and
/// offdiagonal `√(n-1-i)`. The stream identity at sampling time is kept so
/// any draw can be replayed.
#[derive(Debug, Clone)]
pub struct EnsembleDraw {
    spec: BetaEnsembleSpec,
    master_seed: u64,
    stream_index: u64,
    diag_raw: Vec<f64>,
    offdiag_raw: Vec<f64>,
}

pub(crate) fn validate_beta(beta: f64) -> Result<()> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "beta must be positive (or infinite), got {beta}"
        )));
    }
    Ok(())
}

/// Sample one ensemble draw from `stream`.
pub fn sample_hermite(spec: &BetaEnsembleSpec, stream: &mut RngStream) -> Result<EnsembleDraw> {
    spec.validate()?;
    let (master_seed, stream_index) = (stream.master_seed(), stream.stream_index());
    let n = spec.n;
    let beta = spec.beta;
    let (diag_raw, offdiag_raw) = if beta.is_infinite() {
        (
            vec![0.0; n],
            (0..n - 1).map(|i| ((n - 1 - i) as f64).sqrt()).collect(),
        )
    } else {
        let sqrt_beta = beta.sqrt();
        let mut diag = Vec::with_capacity(n);
        for _ in 0..n {
            diag.push(sample_gaussian(stream, 0.0, 2.0)? / sqrt_beta);
        }
        let mut off = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let dof = (n - 1 - i) as f64 * beta;
            off.push(sample_chi(stream, dof)? / sqrt_beta);
        }
        (diag, off)
    };
    Ok(EnsembleDraw {
        spec: *spec,
        master_seed,
        stream_index,
        diag_raw,
        offdiag_raw,
    })
}

impl EnsembleDraw {
    pub fn spec(&self) -> &BetaEnsembleSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn beta(&self) -> f64 {
        self.spec.beta
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn diag_raw(&self) -> &[f64] {
        &self.diag_raw
    }

    pub fn offdiag_raw(&self) -> &[f64] {
        &self.offdiag_raw
    }
}

/// The edge matrix of the k-th minor: `2√n I - A` with the first `k` rows
/// and columns of the draw removed (dimension n - k, centering kept at the
/// parent's 2√n for every k).
///
/// The offdiagonal is stored negated, so the lowest eigenvector is entrywise
/// positive and first-entry weights need no sign bookkeeping.
pub fn edge_minor_matrix(draw: &EnsembleDraw, k: usize) -> Result<TridiagSym> {
    if k + 2 > draw.n() {
        return Err(Error::Dimension(format!(
            "minor order {k} leaves fewer than 2 of {} rows",
            draw.n()
        )));
    }
    let center = 2.0 * (draw.n() as f64).sqrt();
    let diag: Vec<f64> = draw.diag_raw[k..].iter().map(|a| center - a).collect();
    let offdiag: Vec<f64> = draw.offdiag_raw[k..].iter().map(|b| -b).collect();
    TridiagSym::new(diag, offdiag)
}

/// The `num_eigs` lowest eigenvalues of the k-th minor's edge matrix in the
/// soft-edge scaling: `n^{1/6} (2√n - λ_j(A^{(k)}))`, ascending.
pub fn scaled_edge_eigenvalues(
    draw: &EnsembleDraw,
    k: usize,
    num_eigs: usize,
    tol: Option<f64>,
) -> Result<Vec<f64>> {
    let m = edge_minor_matrix(draw, k)?;
    let scale = (draw.n() as f64).powf(1.0 / 6.0);
    let eigs = m.lowest_eigenvalues(num_eigs, tol)?;
    Ok(eigs.into_iter().map(|e| scale * e).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, beta: f64) -> BetaEnsembleSpec {
        BetaEnsembleSpec { n, beta }
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut s = RngStream::new(1, 0);
        assert!(sample_hermite(&spec(1, 2.0), &mut s).is_err());
        assert!(sample_hermite(&spec(10, 0.0), &mut s).is_err());
        assert!(sample_hermite(&spec(10, -1.0), &mut s).is_err());
        assert!(sample_hermite(&spec(10, f64::NAN), &mut s).is_err());
        let d = sample_hermite(&spec(5, 2.0), &mut s).unwrap();
        assert!(edge_minor_matrix(&d, 4).is_err());
        assert!(edge_minor_matrix(&d, 3).is_ok());
    }

    #[test]
    fn draw_shapes_and_positivity() {
        let mut s = RngStream::new(2, 0);
        let d = sample_hermite(&spec(50, 1.0), &mut s).unwrap();
        assert_eq!(d.diag_raw().len(), 50);
        assert_eq!(d.offdiag_raw().len(), 49);
        assert!(d.offdiag_raw().iter().all(|&b| b > 0.0));
    }

    #[test]
    fn entry_moments_match_the_model() {
        // Pooled z-scores: diag entries are N(0, 2/β); offdiagonal squares
        // are χ²_{dof}/β with dof = (n-1-i)β, so their standardized versions
        // are mean 0, variance 1.
        let beta = 2.0;
        let n = 40;
        let reps = 20_000;
        let mut s = RngStream::new(0xe4_5b1e, 0);
        let mut diag_z = Vec::with_capacity(reps * n);
        let mut off_z = Vec::with_capacity(reps * (n - 1));
        for _ in 0..reps {
            let d = sample_hermite(&spec(n, beta), &mut s).unwrap();
            for &a in d.diag_raw() {
                diag_z.push(a / (2.0 / beta).sqrt());
            }
            for (i, &b) in d.offdiag_raw().iter().enumerate() {
                let dof = (n - 1 - i) as f64 * beta;
                let mean = dof / beta;
                let var = 2.0 * dof / (beta * beta);
                off_z.push((b * b - mean) / var.sqrt());
            }
        }
        let dz = crate::stats::moments(&diag_z).unwrap();
        assert!(dz.mean.abs() < 4.0 * dz.se_mean, "diag mean {}", dz.mean);
        assert!((dz.variance - 1.0).abs() < 0.01, "diag var {}", dz.variance);
        let oz = crate::stats::moments(&off_z).unwrap();
        assert!(
            oz.mean.abs() < 6.0 * oz.se_mean,
            "offdiag mean z {}",
            oz.mean
        );
        // Low-dof chi-squares are skewed; variance of the z-score is still 1.
        assert!(
            (oz.variance - 1.0).abs() < 0.02,
            "offdiag var z {}",
            oz.variance
        );
    }

    #[test]
    fn top_offdiag_square_mean_and_diag_variance() {
        // E[offdiag_raw[0]²] = (n-1)β/β² · β = n-1 and Var[diag] = 2/β.
        let n = 50;
        let beta = 2.0;
        let sp = spec(n, beta);
        let mut s = RngStream::new(0x0ffd, 0);
        let reps = 10_000;
        let mut off0_sq = Vec::with_capacity(reps);
        let mut diag0 = Vec::with_capacity(reps);
        for _ in 0..reps {
            let d = sample_hermite(&sp, &mut s).unwrap();
            off0_sq.push(d.offdiag_raw()[0] * d.offdiag_raw()[0]);
            diag0.push(d.diag_raw()[0]);
        }
        let mo = crate::stats::moments(&off0_sq).unwrap();
        assert!(
            (mo.mean - (n as f64 - 1.0)).abs() < 3.0 * mo.se_mean,
            "offdiag square mean {} vs {}",
            mo.mean,
            n - 1
        );
        let md = crate::stats::moments(&diag0).unwrap();
        assert!(
            (md.variance - 2.0 / beta).abs() < 3.0 * md.se_variance,
            "diag variance {} vs {}",
            md.variance,
            2.0 / beta
        );
    }

    #[test]
    fn infinite_beta_is_deterministic() {
        let mut s1 = RngStream::new(3, 0);
        let mut s2 = RngStream::new(99, 5);
        let a = sample_hermite(&spec(20, f64::INFINITY), &mut s1).unwrap();
        let b = sample_hermite(&spec(20, f64::INFINITY), &mut s2).unwrap();
        assert_eq!(a.diag_raw(), b.diag_raw());
        assert_eq!(a.offdiag_raw(), b.offdiag_raw());
        assert!(a.diag_raw().iter().all(|&x| x == 0.0));
        for (i, &b_val) in a.offdiag_raw().iter().enumerate() {
            assert!((b_val - ((19 - i) as f64).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn same_stream_reproduces_bit_exactly() {
        let mut a = RngStream::new(77, 3);
        let mut b = RngStream::new(77, 3);
        let da = sample_hermite(&spec(64, 4.0), &mut a).unwrap();
        let db = sample_hermite(&spec(64, 4.0), &mut b).unwrap();
        for (x, y) in da.diag_raw().iter().zip(db.diag_raw()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (x, y) in da.offdiag_raw().iter().zip(db.offdiag_raw()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn minor_matrix_layout() {
        let mut s = RngStream::new(5, 0);
        let d = sample_hermite(&spec(12, 2.0), &mut s).unwrap();
        let center = 2.0 * 12f64.sqrt();
        for k in [0usize, 1, 3] {
            let m = edge_minor_matrix(&d, k).unwrap();
            assert_eq!(m.dim(), 12 - k);
            for (j, &v) in m.diag().iter().enumerate() {
                assert_eq!(v, center - d.diag_raw()[k + j]);
            }
            for (j, &v) in m.offdiag().iter().enumerate() {
                assert_eq!(v, -d.offdiag_raw()[k + j]);
            }
        }
    }

    #[test]
    fn successive_minors_interlace() {
        // The (k+1)-minor is a trailing principal submatrix of the k-minor,
        // so its eigenvalues interlace, and the lowest one can only move up.
        let mut s = RngStream::new(6, 0);
        let d = sample_hermite(&spec(60, 1.0), &mut s).unwrap();
        let tol = 1e-11;
        for k in 0..4 {
            let outer = edge_minor_matrix(&d, k)
                .unwrap()
                .lowest_eigenvalues(5, Some(tol))
                .unwrap();
            let inner = edge_minor_matrix(&d, k + 1)
                .unwrap()
                .lowest_eigenvalues(5, Some(tol))
                .unwrap();
            for i in 0..4 {
                assert!(outer[i] <= inner[i] + 2.0 * tol, "k={k} i={i}");
                assert!(inner[i] <= outer[i + 1] + 2.0 * tol, "k={k} i={i}");
            }
        }
    }

    #[test]
    fn scaled_eigenvalues_ascending_and_scaled() {
        let mut s = RngStream::new(7, 0);
        let d = sample_hermite(&spec(200, 2.0), &mut s).unwrap();
        let eigs = scaled_edge_eigenvalues(&d, 0, 4, None).unwrap();
        assert_eq!(eigs.len(), 4);
        for w in eigs.windows(2) {
            assert!(w[0] <= w[1]);
        }
        let raw = edge_minor_matrix(&d, 0)
            .unwrap()
            .lowest_eigenvalues(1, None)
            .unwrap()[0];
        assert!((eigs[0] - 200f64.powf(1.0 / 6.0) * raw).abs() < 1e-12);
    }

    #[test]
    fn lowest_eigenvector_positive_above_noise_floor() {
        // The ground vector is entrywise positive in exact arithmetic; in
        // floating point the exponentially decayed tail is rounding noise,
        // so only entries above the noise floor carry a meaningful sign.
        let mut s = RngStream::new(8, 0);
        let d = sample_hermite(&spec(100, 2.0), &mut s).unwrap();
        let m = edge_minor_matrix(&d, 0).unwrap();
        let lam = m.lowest_eigenvalues(1, None).unwrap()[0];
        let pair = m.eigenvector_for(lam, None).unwrap();
        let floor = 1e-10 * pair.eigenvector[0].abs();
        let live = pair
            .eigenvector
            .iter()
            .filter(|x| x.abs() > floor)
            .collect::<Vec<_>>();
        assert!(live.len() > 5, "vector localized to {} entries", live.len());
        assert!(live.iter().all(|&&x| x > 0.0));
        assert!(pair.first_entry > 0.0);
        assert_eq!(pair.first_entry, pair.eigenvector[0]);
    }

    #[test]
    fn minor_of_draw_matches_smaller_ensemble_in_law() {
        // Removing the first row and column of an n-draw leaves exactly the
        // (n-1)-ensemble, so the two largest-eigenvalue samples must pass a
        // two-sample KS test.
        let beta = 1.0;
        let n = 30;
        let reps = 1200;
        let mut s = RngStream::new(0x1a_4b, 0);
        let mut from_minor = Vec::with_capacity(reps);
        let mut direct = Vec::with_capacity(reps);
        for _ in 0..reps {
            let d = sample_hermite(&spec(n, beta), &mut s).unwrap();
            // λ_max(A^{(1)}) = -λ_min(-A^{(1)}).
            let minor = TridiagSym::new(
                d.diag_raw()[1..].iter().map(|a| -a).collect(),
                d.offdiag_raw()[1..].to_vec(),
            )
            .unwrap();
            from_minor.push(-minor.lowest_eigenvalues(1, None).unwrap()[0]);
            let d2 = sample_hermite(&spec(n - 1, beta), &mut s).unwrap();
            let fresh = TridiagSym::new(
                d2.diag_raw().iter().map(|a| -a).collect(),
                d2.offdiag_raw().to_vec(),
            )
            .unwrap();
            direct.push(-fresh.lowest_eigenvalues(1, None).unwrap()[0]);
        }
        let report = crate::stats::ks_two_sample(&from_minor, &direct, 0.01).unwrap();
        assert!(
            report.passed,
            "minor law differs from fresh ensemble: D = {}",
            report.statistic
        );
    }

    #[test]
    fn huge_beta_concentrates_the_edge() {
        // At β = 10⁶ the scaled edge eigenvalue fluctuates like 1/√β around
        // the deterministic β = ∞ value.
        let n = 500;
        let mut s = RngStream::new(0xb16_b37a, 0);
        let frozen = sample_hermite(&spec(n, f64::INFINITY), &mut s).unwrap();
        let target = scaled_edge_eigenvalues(&frozen, 0, 1, None).unwrap()[0];
        let mut vals = Vec::new();
        for _ in 0..40 {
            let d = sample_hermite(&spec(n, 1e6), &mut s).unwrap();
            vals.push(scaled_edge_eigenvalues(&d, 0, 1, None).unwrap()[0]);
        }
        let m = crate::stats::moments(&vals).unwrap();
        assert!(
            (m.mean - target).abs() < 0.05,
            "mean {} vs {target}",
            m.mean
        );
        assert!(m.variance.sqrt() < 0.1, "std {}", m.variance.sqrt());
    }
}
