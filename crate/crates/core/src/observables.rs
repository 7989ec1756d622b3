//! Test families and the overlap observables
//! `p_kl = sum_a <q_a,u_k><q_a,u_l> - delta_kl |I|/N`, with the scaled
//! statistics built from them.

use faer::Mat;
use rand_distr::{Distribution, StandardNormal};

use crate::rng::{derive_seed, rng_from_seed, Domain};
use crate::spectral::{dot, SpectralData, ORTHONORMALITY_TOL};
use crate::{Error, Result};

/// Orthonormal family `(q_a)` indexed by `labels`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFamily {
    n: usize,
    labels: Vec<usize>,
    vectors: Vec<Vec<f64>>,
}

impl TestFamily {
    /// Wraps explicit vectors after checking orthonormality; labels are
    /// `0..m`.
    pub fn from_vectors(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let m = vectors.len();
        let n = vectors.first().map_or(0, Vec::len);
        if m == 0 || m > n {
            return Err(Error::invalid(format!("family size {m} must lie in [1, N = {n}]")));
        }
        if vectors.iter().any(|v| v.len() != n) {
            return Err(Error::invalid("family vectors have different lengths"));
        }
        let family = Self { n, labels: (0..m).collect(), vectors };
        let r = family.gram_residual();
        if r > ORTHONORMALITY_TOL {
            return Err(Error::invalid(format!("family is not orthonormal (residual {r:e})")));
        }
        Ok(family)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `|I|`.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn vector(&self, alpha: usize) -> &[f64] {
        &self.vectors[alpha]
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// `max |<q_a,q_b> - delta_ab|`.
    pub fn gram_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (a, qa) in self.vectors.iter().enumerate() {
            for (b, qb) in self.vectors.iter().enumerate().skip(a) {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot(qa, qb) - target).abs());
            }
        }
        worst
    }

    /// `sum_a <q_a, v>^2`, the mass of `v` on the span of the family.
    pub fn mass(&self, v: &[f64]) -> f64 {
        match self.coordinate_support() {
            Some(idx) => idx.iter().map(|&i| v[i] * v[i]).sum(),
            None => self.vectors.iter().map(|q| dot(q, v).powi(2)).sum(),
        }
    }

    fn coordinate_support(&self) -> Option<Vec<usize>> {
        self.vectors
            .iter()
            .map(|q| {
                let mut nz = q.iter().enumerate().filter(|(_, x)| **x != 0.0);
                match (nz.next(), nz.next()) {
                    (Some((i, &x)), None) if x == 1.0 => Some(i),
                    _ => None,
                }
            })
            .collect()
    }

    fn as_mat(&self) -> Mat<f64> {
        Mat::from_fn(self.n, self.len(), |i, a| self.vectors[a][i])
    }
}

/// Standard basis vectors `e_i` for the given (0-based, distinct) indices.
pub fn coordinate_family(n: usize, indices: &[usize]) -> Result<TestFamily> {
    if indices.is_empty() || indices.len() > n {
        return Err(Error::invalid(format!("family size {} must lie in [1, N = {n}]", indices.len())));
    }
    let mut seen = vec![false; n];
    for &i in indices {
        if i >= n {
            return Err(Error::invalid(format!("family index {i} out of range for N = {n}")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::invalid(format!("duplicate family index {i}")));
        }
    }
    let vectors = indices
        .iter()
        .map(|&i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    Ok(TestFamily { n, labels: indices.to_vec(), vectors })
}

/// `m` orthonormal vectors from the thin QR factor of a Gaussian `N x m` draw.
pub fn random_family(n: usize, m: usize, seed: u64) -> Result<TestFamily> {
    if m == 0 || m > n {
        return Err(Error::invalid(format!("family size {m} must lie in [1, N = {n}]")));
    }
    let mut rng = rng_from_seed(derive_seed(seed, Domain::Family, 0));
    let g = Mat::from_fn(n, m, |_, _| -> f64 { StandardNormal.sample(&mut rng) });
    let q = g.qr().compute_thin_Q();
    let vectors = (0..m).map(|a| (0..n).map(|i| q[(i, a)]).collect()).collect();
    Ok(TestFamily { n, labels: (0..m).collect(), vectors })
}

/// Overlaps `<q_a,u_k>` and the table `p_kl` for one frame and family.
#[derive(Clone, Debug)]
pub struct OverlapTable {
    n: usize,
    set_size: usize,
    /// `proj[(a, k)] = <q_a, u_k>`.
    proj: Mat<f64>,
    p: Mat<f64>,
}

/// Builds the overlap table through the `|I| x N` projection matrix.
pub fn overlaps(s: &SpectralData, f: &TestFamily) -> Result<OverlapTable> {
    if s.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: f.dim() });
    }
    let n = s.dim();
    let proj = f.as_mat().transpose() * s.frame();
    let mut p = proj.transpose() * &proj;
    let shift = f.len() as f64 / n as f64;
    for k in 0..n {
        p[(k, k)] -= shift;
        for l in 0..k {
            let v = 0.5 * (p[(k, l)] + p[(l, k)]);
            p[(k, l)] = v;
            p[(l, k)] = v;
        }
    }
    Ok(OverlapTable { n, set_size: f.len(), proj, p })
}

impl OverlapTable {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn set_size(&self) -> usize {
        self.set_size
    }

    #[inline]
    pub fn p(&self, k: usize, l: usize) -> f64 {
        self.p[(k, l)]
    }

    /// `<q_a, u_k>` where `a` is the position in the family.
    #[inline]
    pub fn projection(&self, alpha: usize, k: usize) -> f64 {
        self.proj[(alpha, k)]
    }

    /// `(N / sqrt|I|) p_kl`.
    pub fn hat_p(&self, k: usize, l: usize) -> f64 {
        self.n as f64 / (self.set_size as f64).sqrt() * self.p(k, l)
    }

    /// Largest `|hat p_kk|` and largest `|hat p_kl|` over `k != l`.
    pub fn hat_p_sups(&self) -> (f64, f64) {
        let (mut diag, mut off) = (0.0f64, 0.0f64);
        for k in 0..self.n {
            diag = diag.max(self.hat_p(k, k).abs());
            for l in 0..k {
                off = off.max(self.hat_p(k, l).abs());
            }
        }
        (diag, off)
    }

    /// `max_{k,l} |p_kl|`.
    pub fn sup_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for k in 0..self.n {
            for l in 0..self.n {
                m = m.max(self.p(k, l).abs());
            }
        }
        m
    }
}

/// `sqrt(beta N^2 / (2|I|)) p_kk` for real symmetric matrices (`beta = 1`).
pub fn clt_statistic(t: &OverlapTable, k: usize, beta: u8) -> Result<f64> {
    scaled_mass(t.p(k, k), t.dim(), t.set_size(), beta)
}

/// The same statistic for a single eigenvector, without forming a table.
pub fn clt_statistic_for_vector(u: &[f64], f: &TestFamily, beta: u8) -> Result<f64> {
    let n = f.dim();
    if u.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: u.len() });
    }
    let centered = f.mass(u) - f.len() as f64 / n as f64;
    scaled_mass(centered, n, f.len(), beta)
}

fn scaled_mass(p_kk: f64, n: usize, set_size: usize, beta: u8) -> Result<f64> {
    if beta != 1 {
        return Err(Error::invalid(format!(
            "only the real symmetric case beta = 1 is supported, got beta = {beta}"
        )));
    }
    let nf = n as f64;
    Ok((nf * nf / (2.0 * set_size as f64)).sqrt() * p_kk)
}

/// `(N / sqrt|I|) p_kl`.
pub fn hat_p(t: &OverlapTable, k: usize, l: usize) -> f64 {
    t.hat_p(k, l)
}

/// Error parameter `Psi(s) = |I| / (N^{3/2} s^2) + sqrt(|I| / (N^2 s^3))`.
pub fn psi(s: f64, set_size: usize, n: usize) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::invalid(format!("psi needs s > 0, got {s}")));
    }
    let (m, nf) = (set_size as f64, n as f64);
    Ok(m / (nf.powf(1.5) * s * s) + (m / (nf * nf * s.powi(3))).sqrt())
}
