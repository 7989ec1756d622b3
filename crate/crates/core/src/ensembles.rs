//! Samplers: generalized Wigner matrices with a variance profile, GOE, the
//! exact-in-law Ornstein–Uhlenbeck interpolation, and a pathwise Dyson
//! Brownian motion integrator.

use faer::Mat;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::{derive_seed, rng_from_seed, Domain};
use crate::spectral::{SpectralData, SymmetricMatrix};
use crate::{Error, Result};

/// Symmetric, doubly stochastic matrix of entry variances `sigma_ij^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceProfile {
    n: usize,
    sigma2: Vec<f64>,
    lower: f64,
    upper: f64,
}

impl VarianceProfile {
    /// The flat profile `sigma_ij^2 = 1/N`.
    pub fn flat(n: usize) -> Result<Self> {
        build_variance_profile(n, 0.0, 0)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sigma2[i * self.n + j]
    }

    /// Constants `c <= C` with `c/N <= sigma_ij^2 <= C/N`.
    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    /// Largest deviation of a column sum from 1.
    pub fn column_sum_error(&self) -> f64 {
        (0..self.n)
            .map(|j| ((0..self.n).map(|i| self.get(i, j)).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Random variance profile: entries `1 + spread * u_ij` with `u_ij` uniform on
/// `[-1, 1]` (symmetrized), balanced by symmetric Sinkhorn scaling so that
/// every row and column sums to 1.
pub fn build_variance_profile(n: usize, spread: f64, seed: u64) -> Result<VarianceProfile> {
    if n < 2 {
        return Err(Error::invalid("variance profiles need N >= 2"));
    }
    if !(0.0..1.0).contains(&spread) {
        return Err(Error::invalid(format!(
            "profile spread must lie in [0, 1) to keep variances comparable to 1/N, got {spread}"
        )));
    }
    if spread == 0.0 {
        let v = 1.0 / n as f64;
        return Ok(VarianceProfile { n, sigma2: vec![v; n * n], lower: 1.0, upper: 1.0 });
    }
    let mut rng = rng_from_seed(derive_seed(seed, Domain::Profile, 0));
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = 1.0 + spread * rng.random_range(-1.0..=1.0);
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    // Find x > 0 with sum_j x_i a_ij x_j = 1 for every i.
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..10_000 {
        let ax: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect();
        let worst = (0..n).map(|i| (x[i] * ax[i] - 1.0).abs()).fold(0.0, f64::max);
        if worst <= 1e-14 {
            break;
        }
        for i in 0..n {
            x[i] = (x[i] / ax[i]).sqrt();
        }
    }
    let mut sigma2 = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = x[i] * a[i * n + j] * x[j];
            sigma2[i * n + j] = v;
            sigma2[j * n + i] = v;
        }
    }
    let nf = n as f64;
    let lower = sigma2.iter().fold(f64::INFINITY, |m, &v| m.min(v)) * nf;
    let upper = sigma2.iter().fold(0.0f64, |m, &v| m.max(v)) * nf;
    let profile = VarianceProfile { n, sigma2, lower, upper };
    if profile.column_sum_error() > 1e-10 {
        return Err(Error::invalid("Sinkhorn balancing did not converge"));
    }
    Ok(profile)
}

/// Law of the normalized entries `sqrt(N) h_ij / sigma_ij`: mean 0, variance 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryDistribution {
    Gaussian,
    Rademacher,
    Uniform,
}

impl EntryDistribution {
    pub fn sample(self, rng: &mut impl Rng) -> f64 {
        match self {
            EntryDistribution::Gaussian => StandardNormal.sample(rng),
            EntryDistribution::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            EntryDistribution::Uniform => 3f64.sqrt() * rng.random_range(-1.0..=1.0),
        }
    }
}

fn fill_upper(n: usize, seed: u64, mut entry: impl FnMut(&mut rand_chacha::ChaCha8Rng, usize, usize) -> f64) -> Result<SymmetricMatrix> {
    let mut m = SymmetricMatrix::zeros(n)?;
    for i in 0..n {
        let mut rng = rng_from_seed(derive_seed(seed, Domain::Matrix, i as u64));
        for j in i..n {
            m.set(i, j, entry(&mut rng, i, j));
        }
    }
    Ok(m)
}

/// Generalized Wigner matrix `h_ij = sigma_ij * x_ij` with `x_ij` drawn
/// from `dist`. Row `i` of the upper triangle uses its own stream.
pub fn sample_wigner(p: &VarianceProfile, dist: EntryDistribution, seed: u64) -> Result<SymmetricMatrix> {
    fill_upper(p.dim(), seed, |rng, i, j| p.get(i, j).sqrt() * dist.sample(rng))
}

/// GOE: off-diagonal variance `1/N`, diagonal variance `2/N`.
pub fn sample_goe(n: usize, seed: u64) -> Result<SymmetricMatrix> {
    let off = (1.0 / n as f64).sqrt();
    let diag = (2.0 / n as f64).sqrt();
    fill_upper(n, seed, |rng, i, j| {
        let g: f64 = StandardNormal.sample(rng);
        if i == j {
            diag * g
        } else {
            off * g
        }
    })
}

/// Exact-in-law solution of the matrix Ornstein–Uhlenbeck flow at time `s`:
/// `e^{-s/2} h0 + sqrt(1 - e^{-s}) G` with a fresh GOE sample `G`.
pub fn ou_interpolate(h0: &SymmetricMatrix, s: f64, seed: u64) -> Result<SymmetricMatrix> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::invalid(format!("OU time must be >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(h0.clone());
    }
    let g = sample_goe(h0.dim(), derive_seed(seed, Domain::Noise, 0))?;
    h0.combine((-0.5 * s).exp(), &g, (-(-s).exp_m1()).sqrt())
}

/// Settings of the Euler–Maruyama integrator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DbmConfig {
    pub s_end: f64,
    pub dt: f64,
    /// Times at which snapshots are stored (rounded to the step grid).
    pub snapshots: Vec<f64>,
    /// Evolve the eigenvector frame along with the eigenvalues. The
    /// eigenvalue equation is autonomous, so it can be run alone.
    pub track_vectors: bool,
    /// Disabling the noise leaves the deterministic drift equations.
    pub noise: bool,
}

impl DbmConfig {
    pub fn new(s_end: f64, dt: f64) -> Self {
        Self { s_end, dt, snapshots: vec![s_end], track_vectors: true, noise: true }
    }
}

/// Stored states of a Dyson Brownian motion path.
#[derive(Clone, Debug, Serialize)]
pub struct DbmTrajectory {
    pub times: Vec<f64>,
    pub lambdas: Vec<Vec<f64>>,
    pub seed: u64,
    pub dt: f64,
    /// Frames at the stored times; empty unless vectors were tracked.
    #[serde(skip)]
    pub states: Vec<SpectralData>,
}

impl DbmTrajectory {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Integrates the coupled eigenvalue/eigenvector SDEs
///
/// ```text
/// d lambda_k = dB_kk / sqrt(N) + (N^{-1} sum_{l != k} 1/(lambda_k - lambda_l) - lambda_k / 2) ds
/// d u_k = N^{-1/2} sum_{l != k} dB_kl / (lambda_k - lambda_l) u_l
///         - (2N)^{-1} sum_{l != k} ds / (lambda_k - lambda_l)^2 u_k
/// ```
///
/// with symmetric Brownian increments (`Var dB_kk = 2 ds`, `Var dB_kl = ds`).
/// After each step the frame is re-orthonormalized and the spectrum
/// re-sorted. A gap below `1e-12` aborts the run.
pub fn integrate_dbm(start: &SpectralData, cfg: &DbmConfig, seed: u64) -> Result<DbmTrajectory> {
    if !(cfg.dt > 0.0) || !(cfg.s_end >= 0.0) || cfg.s_end > 1.0 {
        return Err(Error::invalid("integrate_dbm needs dt > 0 and 0 <= s_end <= 1"));
    }
    let n = start.dim();
    let nf = n as f64;
    let steps = (cfg.s_end / cfg.dt).round() as usize;
    let mut marks: Vec<usize> = cfg
        .snapshots
        .iter()
        .map(|&t| {
            if !(0.0..=cfg.s_end).contains(&t) {
                Err(Error::invalid(format!("snapshot time {t} outside [0, {}]", cfg.s_end)))
            } else {
                Ok((t / cfg.dt).round() as usize)
            }
        })
        .collect::<Result<_>>()?;
    marks.sort_unstable();
    marks.dedup();

    let mut lambdas = start.lambdas().to_vec();
    let mut frame = start.frame().to_owned();
    let mut rng = rng_from_seed(derive_seed(seed, Domain::Dbm, 0));
    let mut traj = DbmTrajectory { times: vec![], lambdas: vec![], seed, dt: cfg.dt, states: vec![] };
    let record = |step: usize, lambdas: &[f64], frame: &Mat<f64>, traj: &mut DbmTrajectory| {
        traj.times.push(step as f64 * cfg.dt);
        traj.lambdas.push(lambdas.to_vec());
        if cfg.track_vectors {
            traj.states.push(SpectralData::from_frame_unchecked(lambdas.to_vec(), frame.clone()));
        }
    };

    let sd = cfg.dt.sqrt();
    let mut next_mark = 0;
    let mut increments = Mat::<f64>::zeros(n, n);
    for step in 0..=steps {
        while next_mark < marks.len() && marks[next_mark] == step {
            record(step, &lambdas, &frame, &mut traj);
            next_mark += 1;
        }
        if step == steps {
            break;
        }
        if cfg.noise {
            for k in 0..n {
                let g: f64 = StandardNormal.sample(&mut rng);
                increments[(k, k)] = std::f64::consts::SQRT_2 * sd * g;
                if cfg.track_vectors {
                    for l in (k + 1)..n {
                        let g: f64 = StandardNormal.sample(&mut rng);
                        increments[(k, l)] = sd * g;
                        increments[(l, k)] = sd * g;
                    }
                }
            }
        }

        if cfg.track_vectors {
            // U <- U + U M with M_lk the coefficient of u_l in du_k.
            let mut m = Mat::<f64>::zeros(n, n);
            for k in 0..n {
                let mut damping = 0.0;
                for l in 0..n {
                    if l == k {
                        continue;
                    }
                    let d = lambdas[k] - lambdas[l];
                    damping += cfg.dt / (d * d);
                    m[(l, k)] = increments[(k, l)] / (nf.sqrt() * d);
                }
                m[(k, k)] = -damping / (2.0 * nf);
            }
            frame = &frame + &frame * &m;
            gram_schmidt(&mut frame);
        }

        let old = lambdas.clone();
        for k in 0..n {
            let repulsion: f64 = (0..n).filter(|&l| l != k).map(|l| 1.0 / (old[k] - old[l])).sum();
            lambdas[k] += increments[(k, k)] / nf.sqrt() + (repulsion / nf - old[k] / 2.0) * cfg.dt;
        }
        resort(&mut lambdas, &mut frame, cfg.track_vectors);
        let time = (step + 1) as f64 * cfg.dt;
        for k in 0..n.saturating_sub(1) {
            if !(lambdas[k + 1] - lambdas[k] >= 1e-12) {
                return Err(Error::EigenvalueCollision { time, lower: k, upper: k + 1 });
            }
        }
    }
    Ok(traj)
}

fn resort(lambdas: &mut [f64], frame: &mut Mat<f64>, permute_frame: bool) {
    if lambdas.windows(2).all(|w| w[0] <= w[1]) {
        return;
    }
    let n = lambdas.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lambdas[a].total_cmp(&lambdas[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| lambdas[i]).collect();
    lambdas.copy_from_slice(&sorted);
    if permute_frame {
        *frame = Mat::from_fn(n, n, |i, j| frame[(i, order[j])]);
    }
}

/// Modified Gram–Schmidt on the columns, in place.
pub(crate) fn gram_schmidt(m: &mut Mat<f64>) {
    let (rows, cols) = (m.nrows(), m.ncols());
    for j in 0..cols {
        for _ in 0..2 {
            for p in 0..j {
                let proj: f64 = (0..rows).map(|i| m[(i, p)] * m[(i, j)]).sum();
                for i in 0..rows {
                    m[(i, j)] -= proj * m[(i, p)];
                }
            }
        }
        let norm: f64 = (0..rows).map(|i| m[(i, j)] * m[(i, j)]).sum::<f64>().sqrt();
        for i in 0..rows {
            m[(i, j)] /= norm;
        }
    }
}
