//! Seeded sampling of every distribution the simulations consume: Gaussian,
//! Gamma (any shape > 0), chi with real degrees of freedom, Beta, Dirichlet,
//! and Brownian increments on a fixed mesh.
//!
//! All draws come from counter-addressed ChaCha streams, so a `(master_seed,
//! stream_index)` pair pins the full sample sequence bit-exactly and replicas
//! get statistically independent streams for free.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma as GammaDist, Normal};

use crate::error::{Error, Result};

/// One independent, replayable randomness stream.
///
/// Reconstructing the stream from the same `(master_seed, stream_index)`
/// replays the identical sequence; distinct stream indices address disjoint
/// ChaCha counter streams.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

/// SplitMix64 finalizer, used to spread substream indices over the full
/// 64-bit stream space.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Derive an independent child stream. Children of distinct parents or
    /// distinct `child` ids land on distinct ChaCha streams.
    pub fn substream(&self, child: u64) -> RngStream {
        let idx = mix64(self.stream_index ^ mix64(child));
        RngStream::new(self.master_seed, idx)
    }

    /// A fresh copy positioned at the start of this stream.
    pub fn replay(&self) -> RngStream {
        RngStream::new(self.master_seed, self.stream_index)
    }

    fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Shape/scale parameters of a Gamma distribution (density
/// `x^{k-1} e^{-x/θ} / (Γ(k) θ^k)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    shape: f64,
    scale: f64,
}

impl GammaParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gamma shape must be positive and finite, got {shape}"
            )));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gamma scale must be positive and finite, got {scale}"
            )));
        }
        Ok(Self { shape, scale })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }

    pub fn variance(&self) -> f64 {
        self.shape * self.scale * self.scale
    }
}

/// One draw from `N(mean, variance)`.
pub fn sample_gaussian(stream: &mut RngStream, mean: f64, variance: f64) -> Result<f64> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gaussian variance must be positive and finite, got {variance}"
        )));
    }
    if !mean.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gaussian mean must be finite, got {mean}"
        )));
    }
    let dist =
        Normal::new(mean, variance.sqrt()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(dist.sample(stream.rng()))
}

/// One Gamma(shape, scale) draw; shape < 1 is supported (Marsaglia-Tsang with
/// the boosting identity).
pub fn sample_gamma(stream: &mut RngStream, p: GammaParams) -> Result<f64> {
    let dist =
        GammaDist::new(p.shape, p.scale).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(dist.sample(stream.rng()))
}

/// One chi draw with real degrees of freedom, realized as
/// `sqrt(2 · Gamma(dof/2, 1))`.
pub fn sample_chi(stream: &mut RngStream, dof: f64) -> Result<f64> {
    if !(dof > 0.0) || !dof.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "chi degrees of freedom must be positive and finite, got {dof}"
        )));
    }
    let g = sample_gamma(stream, GammaParams::new(dof / 2.0, 1.0)?)?;
    Ok((2.0 * g).sqrt())
}

/// One Beta(a, b) draw via the two-Gamma ratio.
pub fn sample_beta(stream: &mut RngStream, a: f64, b: f64) -> Result<f64> {
    let x = sample_gamma(stream, GammaParams::new(a, 1.0)?)?;
    let y = sample_gamma(stream, GammaParams::new(b, 1.0)?)?;
    Ok(x / (x + y))
}

/// One symmetric Dirichlet(alpha, ..., alpha) draw of length `n`, realized as
/// normalized i.i.d. Gamma(alpha, 1) draws.
pub fn sample_dirichlet(stream: &mut RngStream, n: usize, alpha: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "dirichlet dimension must be at least 1".into(),
        ));
    }
    let p = GammaParams::new(alpha, 1.0)?;
    let mut draws = Vec::with_capacity(n);
    let mut total = 0.0;
    for _ in 0..n {
        let g = sample_gamma(stream, p)?;
        total += g;
        draws.push(g);
    }
    for q in &mut draws {
        *q /= total;
    }
    Ok(draws)
}

/// Increments of one Brownian path on a uniform mesh.
///
/// Increment `j` covers `[origin + j·h, origin + (j+1)·h]`, so the path value
/// at grid point `origin + c·h` is the cumulative sum of the first `c`
/// increments. All shifted-domain solves index into the same increment array,
/// which is what couples them through one Brownian path.
#[derive(Debug, Clone)]
pub struct BrownianGrid {
    mesh: f64,
    origin: f64,
    increments: Vec<f64>,
}

impl BrownianGrid {
    pub fn new(mesh: f64, origin: f64, increments: Vec<f64>) -> Result<Self> {
        if !(mesh > 0.0) || !mesh.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mesh must be positive and finite, got {mesh}"
            )));
        }
        if increments.len() < 2 {
            return Err(Error::InvalidParameter(
                "a Brownian grid needs at least 2 increments".into(),
            ));
        }
        if increments.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "Brownian increments must be finite".into(),
            ));
        }
        Ok(Self {
            mesh,
            origin,
            increments,
        })
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn num_cells(&self) -> usize {
        self.increments.len()
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Rightmost grid point covered by the increments.
    pub fn right_edge(&self) -> f64 {
        self.origin + self.mesh * self.increments.len() as f64
    }

    /// Path value at grid point `origin + cell·h` (zero at the origin).
    pub fn value_at(&self, cell: usize) -> f64 {
        self.increments[..cell].iter().sum()
    }

    /// Cumulative path on all grid points, starting from 0 at the origin.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.increments.len() + 1);
        let mut acc = 0.0;
        out.push(acc);
        for dx in &self.increments {
            acc += dx;
            out.push(acc);
        }
        out
    }

    /// Halve the mesh by Brownian-bridge midpoint insertion. The refined path
    /// agrees with the original on every original grid point.
    pub fn refine(&self, stream: &mut RngStream) -> Result<BrownianGrid> {
        let half = self.mesh / 2.0;
        let mut fine = Vec::with_capacity(self.increments.len() * 2);
        for &db in &self.increments {
            let xi = sample_gaussian(stream, 0.0, half / 2.0)?;
            fine.push(db / 2.0 + xi);
            fine.push(db / 2.0 - xi);
        }
        BrownianGrid::new(half, self.origin, fine)
    }
}

/// Sample a fresh Brownian path: `num_cells` independent `N(0, mesh)`
/// increments starting at `origin = 0`.
pub fn sample_brownian_grid(
    stream: &mut RngStream,
    mesh: f64,
    num_cells: usize,
) -> Result<BrownianGrid> {
    if num_cells < 2 {
        return Err(Error::InvalidParameter(
            "num_cells must be at least 2".into(),
        ));
    }
    if !(mesh > 0.0) || !mesh.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "mesh must be positive and finite, got {mesh}"
        )));
    }
    let dist = Normal::new(0.0, mesh.sqrt()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let increments = (0..num_cells).map(|_| dist.sample(stream.rng())).collect();
    BrownianGrid::new(mesh, 0.0, increments)
}

/// Uniform draw in [0, 1), exposed for bootstrap resampling.
pub fn sample_uniform(stream: &mut RngStream) -> f64 {
    stream.rng().gen::<f64>()
}

/// Uniform integer in `[0, bound)`.
pub fn sample_index(stream: &mut RngStream, bound: usize) -> usize {
    stream.rng().gen_range(0..bound)
}
