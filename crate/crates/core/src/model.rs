//! Block-sparse signal model: priors, sampling, measurement matrices and
//! problem instances.
//!
//! All randomness flows through [`RngStream`], a `(seed, stream_id)` pair
//! mapped onto an independent ChaCha keystream, so every sample is a pure
//! function of its parameters and stream.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Generator handed out by [`RngStream::rng`].
pub type StreamRng = ChaCha8Rng;

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Stream for trial `trial` of sweep cell `cell` under `master_seed`.
    pub fn for_trial(master_seed: u64, cell: u32, trial: u32) -> Self {
        Self::new(master_seed, ((cell as u64) << 32) | trial as u64)
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Distribution of an active block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slab {
    /// Uniform on the sphere of the given radius.
    SphereUniform { radius: f64 },
    /// i.i.d. N(0, std²) coordinates.
    GaussianIso { std: f64 },
}

impl Slab {
    fn validate(&self) -> Result<()> {
        let v = match *self {
            Slab::SphereUniform { radius } => radius,
            Slab::GaussianIso { std } => std,
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("slab scale must be positive, got {v}")))
        }
    }

    /// E‖x_B‖² for an active block of size `block_size`.
    pub fn mean_square_norm(&self, block_size: usize) -> f64 {
        match *self {
            Slab::SphereUniform { radius } => radius * radius,
            Slab::GaussianIso { std } => std * std * block_size as f64,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, block_size: usize, rng: &mut R) -> Result<Vec<f64>> {
        match *self {
            Slab::SphereUniform { radius } => sample_sphere_uniform(block_size, radius, rng),
            Slab::GaussianIso { std } => {
                if block_size == 0 {
                    return Err(Error::Domain("block size must be at least 1".into()));
                }
                Ok((0..block_size)
                    .map(|_| std * Distribution::<f64>::sample(&StandardNormal, rng))
                    .collect::<Vec<f64>>())
            }
        }
    }
}

impl fmt::Display for Slab {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slab::SphereUniform { radius } => write!(f, "sphere:{radius}"),
            Slab::GaussianIso { std } => write!(f, "gauss:{std}"),
        }
    }
}

impl FromStr for Slab {
    type Err = Error;

    /// Parses `sphere:MU` or `gauss:SIGMA`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("slab must look like sphere:MU or gauss:SIGMA, got '{s}'")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad slab scale in '{s}'")))?;
        let slab = match kind.trim() {
            "sphere" => Slab::SphereUniform { radius: value },
            "gauss" => Slab::GaussianIso { std: value },
            other => return Err(Error::Config(format!("unknown slab kind '{other}'"))),
        };
        slab.validate()?;
        Ok(slab)
    }
}

/// Spike-and-slab block prior F = (1−ε) δ₀ + ε G.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockPrior {
    pub epsilon: f64,
    pub block_size: usize,
    pub slab: Slab,
}

impl BlockPrior {
    pub fn new(epsilon: f64, block_size: usize, slab: Slab) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::Domain(format!("epsilon must lie in [0, 1], got {epsilon}")));
        }
        if block_size == 0 {
            return Err(Error::Domain("block size must be at least 1".into()));
        }
        slab.validate()?;
        Ok(Self {
            epsilon,
            block_size,
            slab,
        })
    }

    pub fn sample_block<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        if rng.r#gen::<f64>() < self.epsilon {
            self.slab.sample(self.block_size, rng)
        } else {
            Ok(vec![0.0; self.block_size])
        }
    }
}

/// A length-N vector split into M consecutive blocks of size B.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSignal {
    block_size: usize,
    entries: Vec<f64>,
}

impl BlockSignal {
    pub fn new(block_size: usize, entries: Vec<f64>) -> Result<Self> {
        if block_size == 0 || entries.len() % block_size != 0 {
            return Err(Error::Dimension(format!(
                "length {} is not a multiple of block size {block_size}",
                entries.len()
            )));
        }
        Ok(Self {
            block_size,
            entries,
        })
    }

    pub fn zeros(block_size: usize, num_blocks: usize) -> Self {
        Self {
            block_size,
            entries: vec![0.0; block_size * num_blocks],
        }
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn num_blocks(&self) -> usize {
        self.entries.len() / self.block_size
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.entries[i * self.block_size..(i + 1) * self.block_size]
    }

    pub fn blocks(&self) -> std::slice::ChunksExact<'_, f64> {
        self.entries.chunks_exact(self.block_size)
    }

    /// Indices of blocks with at least one nonzero entry.
    pub fn active_blocks(&self) -> Vec<usize> {
        self.blocks()
            .enumerate()
            .filter(|(_, b)| b.iter().any(|&v| v != 0.0))
            .map(|(i, _)| i)
            .collect()
    }

    /// k: number of entries in active blocks.
    pub fn nonzeros(&self) -> usize {
        self.active_blocks().len() * self.block_size
    }
}

/// Uniform draw from the sphere of radius `radius` in R^B.
pub fn sample_sphere_uniform<R: Rng + ?Sized>(
    block_size: usize,
    radius: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if block_size == 0 {
        return Err(Error::Domain("block size must be at least 1".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    if block_size == 1 {
        let x: f64 = StandardNormal.sample(rng);
        return Ok(vec![radius.copysign(x)]);
    }
    loop {
        let v: Vec<f64> = (0..block_size).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return Ok(v.into_iter().map(|x| radius * x / norm).collect());
        }
    }
}

/// Draws every block independently from `prior`.
pub fn sample_signal<R: Rng + ?Sized>(
    prior: &BlockPrior,
    num_blocks: usize,
    rng: &mut R,
) -> Result<BlockSignal> {
    if num_blocks == 0 {
        return Err(Error::Dimension("need at least one block".into()));
    }
    let mut entries = Vec::with_capacity(num_blocks * prior.block_size);
    for _ in 0..num_blocks {
        entries.extend(prior.sample_block(rng)?);
    }
    BlockSignal::new(prior.block_size, entries)
}

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// out = A x
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = dot(row, x);
        }
    }

    /// out = Aᵀ z
    pub fn tr_mul_vec(&self, z: &[f64], out: &mut [f64]) {
        assert_eq!(z.len(), self.rows);
        assert_eq!(out.len(), self.cols);
        out.fill(0.0);
        for (&zi, row) in z.iter().zip(self.data.chunks_exact(self.cols)) {
            if zi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(row) {
                *o += zi * a;
            }
        }
    }

    /// One pass over the rows: z_i = residual(i, (A x)_i), then returns Aᵀz
    /// in `corr`. Same result as [`mul_vec`](Self::mul_vec) followed by
    /// [`tr_mul_vec`](Self::tr_mul_vec) at half the memory traffic.
    pub fn mul_then_tr_mul<F: FnMut(usize, f64) -> f64>(
        &self,
        x: &[f64],
        mut residual: F,
        z: &mut [f64],
        corr: &mut [f64],
    ) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(z.len(), self.rows);
        assert_eq!(corr.len(), self.cols);
        corr.fill(0.0);
        for (i, (zi, row)) in z.iter_mut().zip(self.data.chunks_exact(self.cols)).enumerate() {
            *zi = residual(i, dot(row, x));
            let v = *zi;
            if v != 0.0 {
                for (o, a) in corr.iter_mut().zip(row) {
                    *o += v * a;
                }
            }
        }
    }

    /// Applies a column permutation: new column j is old column `perm[j]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for row in self.data.chunks_exact(self.cols) {
            data.extend(perm.iter().map(|&j| row[j]));
        }
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

/// n×N matrix with i.i.d. N(0, 1/n) entries (unit expected column norm).
pub fn sample_matrix<R: Rng + ?Sized>(n: usize, signal_dim: usize, rng: &mut R) -> Result<DenseMatrix> {
    if n == 0 || n > signal_dim {
        return Err(Error::Dimension(format!(
            "need 1 <= n <= N for undersampled measurements, got n = {n}, N = {signal_dim}"
        )));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let data = (0..n * signal_dim)
        .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, rng))
        .collect::<Vec<f64>>();
    DenseMatrix::from_row_major(n, signal_dim, data)
}

/// Geometry of a recovery problem; turned into a [`ProblemInstance`] by
/// [`build_instance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceSpec {
    pub delta: f64,
    pub rho: f64,
    pub signal_dim: usize,
    pub block_size: usize,
    pub slab: Slab,
}

impl InstanceSpec {
    pub fn measurements(&self) -> usize {
        (self.delta * self.signal_dim as f64).round() as usize
    }

    /// Number of active blocks, round(ρ n / B).
    pub fn active_blocks(&self) -> usize {
        (self.rho * self.measurements() as f64 / self.block_size as f64).round() as usize
    }

    pub fn num_blocks(&self) -> usize {
        self.signal_dim / self.block_size
    }

    /// Checks the geometry without sampling anything.
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0, 1], got {}", self.delta)));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(Error::Domain(format!("rho must be nonnegative, got {}", self.rho)));
        }
        if self.block_size == 0 || self.signal_dim % self.block_size != 0 {
            return Err(Error::Dimension(format!(
                "block size {} must divide N = {}",
                self.block_size, self.signal_dim
            )));
        }
        let n = self.measurements();
        if n == 0 || n > self.signal_dim {
            return Err(Error::Dimension(format!(
                "delta = {} gives n = {n} measurements for N = {}",
                self.delta, self.signal_dim
            )));
        }
        if self.active_blocks() > self.num_blocks() {
            return Err(Error::InfeasibleSparsity {
                active: self.active_blocks(),
                available: self.num_blocks(),
            });
        }
        self.slab.validate()
    }
}

/// Noiseless measurements y = A x of an exactly block-sparse x.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub matrix: DenseMatrix,
    pub observations: Vec<f64>,
    pub truth: BlockSignal,
    pub n: usize,
    pub signal_dim: usize,
    pub delta: f64,
    /// Realized k/n.
    pub rho: f64,
    pub stream: RngStream,
}

impl ProblemInstance {
    /// Assembles an instance from parts, computing y = A x.
    pub fn from_parts(matrix: DenseMatrix, truth: BlockSignal, stream: RngStream) -> Result<Self> {
        if matrix.cols() != truth.len() {
            return Err(Error::Dimension(format!(
                "matrix has {} columns but signal has length {}",
                matrix.cols(),
                truth.len()
            )));
        }
        let n = matrix.rows();
        let mut observations = vec![0.0; n];
        matrix.mul_vec(truth.entries(), &mut observations);
        let signal_dim = truth.len();
        Ok(Self {
            rho: truth.nonzeros() as f64 / n as f64,
            delta: n as f64 / signal_dim as f64,
            matrix,
            observations,
            truth,
            n,
            signal_dim,
            stream,
        })
    }

    pub fn block_size(&self) -> usize {
        self.truth.block_size()
    }
}

/// Samples an instance with exactly round(ρ n / B) active blocks chosen
/// uniformly without replacement.
pub fn build_instance(spec: &InstanceSpec, stream: RngStream) -> Result<ProblemInstance> {
    spec.validate()?;
    let mut rng = stream.rng();
    let m = spec.num_blocks();
    let active = spec.active_blocks();
    let b = spec.block_size;

    let mut entries = vec![0.0; spec.signal_dim];
    let mut chosen = index::sample(&mut rng, m, active).into_vec();
    chosen.sort_unstable();
    for blk in chosen {
        let values = spec.slab.sample(b, &mut rng)?;
        entries[blk * b..(blk + 1) * b].copy_from_slice(&values);
    }
    let truth = BlockSignal::new(b, entries)?;
    let matrix = sample_matrix(spec.measurements(), spec.signal_dim, &mut rng)?;
    ProblemInstance::from_parts(matrix, truth, stream)
}

/// Convenience wrapper around [`build_instance`] using stream 0 of `seed`.
pub fn make_instance(
    delta: f64,
    rho: f64,
    signal_dim: usize,
    block_size: usize,
    slab: Slab,
    seed: u64,
) -> Result<ProblemInstance> {
    let spec = InstanceSpec {
        delta,
        rho,
        signal_dim,
        block_size,
        slab,
    };
    build_instance(&spec, RngStream::new(seed, 0))
}

/// Dot product with independent partial sums so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    acc.iter().sum::<f64>() + tail
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(r: f64) -> Slab {
        Slab::SphereUniform { radius: r }
    }

    #[test]
    fn zero_sphere_is_plus_minus_radius() {
        let mut rng = RngStream::new(1, 0).rng();
        let (mut pos, mut neg) = (0, 0);
        for _ in 0..10_000 {
            let v = sample_sphere_uniform(1, 3.0, &mut rng).unwrap();
            if v[0] == 3.0 {
                pos += 1;
            } else {
                assert_eq!(v[0], -3.0);
                neg += 1;
            }
        }
        // binomial(10⁴, 1/2): 4 standard deviations is 200
        assert!((pos as i64 - neg as i64).abs() < 400);
    }

    #[test]
    fn sphere_norm_is_exact() {
        let mut rng = RngStream::new(2, 0).rng();
        for b in 1..8 {
            let v = sample_sphere_uniform(b, 2.5, &mut rng).unwrap();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 2.5).abs() < 1e-12);
        }
        assert!(sample_sphere_uniform(0, 1.0, &mut rng).is_err());
        assert!(sample_sphere_uniform(2, 0.0, &mut rng).is_err());
    }

    #[test]
    fn sphere_coordinates_are_centered_and_uncorrelated() {
        let mut rng = RngStream::new(3, 0).rng();
        let n = 100_000;
        let mut mean = [0.0; 4];
        let mut cross = 0.0;
        for _ in 0..n {
            let v = sample_sphere_uniform(4, 1.0, &mut rng).unwrap();
            for (m, x) in mean.iter_mut().zip(&v) {
                *m += x / n as f64;
            }
            cross += v[0] * v[1] / n as f64;
        }
        let bound = 4.0 / (n as f64).sqrt();
        for m in mean {
            assert!(m.abs() < bound, "{m}");
        }
        // Var(v₀ v₁) = E[v₀² v₁²] = 1/24 for the unit sphere in R⁴
        assert!(cross.abs() < 4.0 * (1.0 / 24.0f64).sqrt() / (n as f64).sqrt());
    }

    #[test]
    fn prior_extremes() {
        let mut rng = RngStream::new(4, 0).rng();
        let none = BlockPrior::new(0.0, 3, sphere(1.0)).unwrap();
        let s = sample_signal(&none, 50, &mut rng).unwrap();
        assert!(s.entries().iter().all(|&v| v == 0.0));
        let all = BlockPrior::new(1.0, 3, sphere(1.0)).unwrap();
        let s = sample_signal(&all, 50, &mut rng).unwrap();
        assert_eq!(s.active_blocks().len(), 50);
        assert!(BlockPrior::new(1.5, 3, sphere(1.0)).is_err());
    }

    #[test]
    fn active_fraction_within_binomial_ci() {
        let mut rng = RngStream::new(5, 0).rng();
        let prior = BlockPrior::new(0.1, 2, Slab::GaussianIso { std: 1.0 }).unwrap();
        let m = 10_000;
        let s = sample_signal(&prior, m, &mut rng).unwrap();
        let frac = s.active_blocks().len() as f64 / m as f64;
        let half_width = 2.576 * (0.1f64 * 0.9 / m as f64).sqrt();
        assert!((frac - 0.1).abs() < half_width, "{frac}");
    }

    #[test]
    fn matrix_columns_have_unit_norm_on_average() {
        let mut rng = RngStream::new(6, 0).rng();
        let a = sample_matrix(100, 400, &mut rng).unwrap();
        let mean: f64 = (0..400)
            .map(|j| a.column(j).iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            / 400.0;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn matrix_dimension_errors_and_determinism() {
        let mut rng = RngStream::new(7, 0).rng();
        assert!(sample_matrix(5, 4, &mut rng).is_err());
        assert!(sample_matrix(0, 4, &mut rng).is_err());
        let one = sample_matrix(1, 1, &mut rng).unwrap();
        assert_eq!((one.rows(), one.cols()), (1, 1));
        let a = sample_matrix(10, 20, &mut RngStream::new(9, 3).rng()).unwrap();
        let b = sample_matrix(10, 20, &mut RngStream::new(9, 3).rng()).unwrap();
        assert_eq!(a, b);
        let c = sample_matrix(10, 20, &mut RngStream::new(9, 4).rng()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_sparsity_instance() {
        let inst = make_instance(0.5, 0.0, 100, 2, sphere(1.0), 0).unwrap();
        assert_eq!(inst.n, 50);
        assert!(inst.truth.entries().iter().all(|&v| v == 0.0));
        assert!(inst.observations.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rounding_rule_for_active_blocks() {
        let inst = make_instance(0.25, 0.2, 1000, 4, sphere(1.0), 11).unwrap();
        assert_eq!(inst.n, 250);
        assert_eq!(inst.truth.active_blocks().len(), 13);
        assert_eq!(inst.truth.nonzeros(), 52);
        // k/N within one rounding unit (B/N) of ρδ
        let eps = inst.truth.nonzeros() as f64 / 1000.0;
        assert!((eps - 0.2 * 0.25).abs() <= 4.0 / 1000.0);
    }

    #[test]
    fn observations_match_matrix_times_truth() {
        let inst = make_instance(0.3, 0.4, 300, 3, Slab::GaussianIso { std: 2.0 }, 12).unwrap();
        let mut y = vec![0.0; inst.n];
        inst.matrix.mul_vec(inst.truth.entries(), &mut y);
        let resid: f64 = y.iter().zip(&inst.observations).map(|(a, b)| (a - b).powi(2)).sum();
        assert_eq!(resid, 0.0);
    }

    #[test]
    fn infeasible_and_malformed_geometry() {
        assert!(matches!(
            make_instance(1.0, 5.0, 100, 2, sphere(1.0), 0),
            Err(Error::InfeasibleSparsity { .. })
        ));
        assert!(matches!(
            make_instance(0.5, 0.1, 101, 2, sphere(1.0), 0),
            Err(Error::Dimension(_))
        ));
        assert!(make_instance(0.0, 0.1, 100, 2, sphere(1.0), 0).is_err());
    }

    #[test]
    fn instances_are_deterministic() {
        let a = make_instance(0.4, 0.3, 200, 2, sphere(5.0), 99).unwrap();
        let b = make_instance(0.4, 0.3, 200, 2, sphere(5.0), 99).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.observations, b.observations);
    }

    #[test]
    fn slab_parsing() {
        assert_eq!("sphere:10".parse::<Slab>().unwrap(), sphere(10.0));
        assert_eq!("gauss:0.5".parse::<Slab>().unwrap(), Slab::GaussianIso { std: 0.5 });
        assert!("sphere:-1".parse::<Slab>().is_err());
        assert!("cube:1".parse::<Slab>().is_err());
        assert!("sphere".parse::<Slab>().is_err());
    }

    #[test]
    fn transpose_product_matches_definition() {
        let a = DenseMatrix::from_row_major(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let mut out = vec![0.0; 3];
        a.tr_mul_vec(&[1.0, -1.0], &mut out);
        assert_eq!(out, vec![-3.0, -3.0, -3.0]);
        let mut y = vec![0.0; 2];
        a.mul_vec(&[1.0, 0.0, 1.0], &mut y);
        assert_eq!(y, vec![4.0, 10.0]);
    }
}

