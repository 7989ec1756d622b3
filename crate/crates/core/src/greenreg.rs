//! Entry replacement, micro-interval counting and the Poisson-regularized
//! observables.
//!
//! The regularized observables integrate resolvent quantities over short
//! energy windows. Every such integral is a sum of Poisson kernels, which is
//! done exactly with the arctan antiderivative
//! `int eta / ((x - l)^2 + eta^2) dx = arctan((x - l) / eta)`.
//!
//! Windows are centred at the true eigenvalues `lambda_k`; no regularized
//! eigenvalue construction is attempted.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::observables::{overlaps, OverlapTable, TestFamily};
use crate::spectral::{SpectralData, SpectralPoint, SymmetricMatrix};
use crate::{Error, Result};

/// `Theta_w^{(a,b)} M`: the mirrored entries `(a, b)` and `(b, a)` replaced by
/// `w m_ab`.
pub fn theta(m: &SymmetricMatrix, a: usize, b: usize, w: f64) -> Result<SymmetricMatrix> {
    let n = m.dim();
    if a >= n || b >= n {
        return Err(Error::invalid(format!("entry ({a}, {b}) out of range for N = {n}")));
    }
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::invalid(format!("replacement weight must lie in [0, 1], got {w}")));
    }
    let mut out = m.clone();
    out.set(a, b, w * m.get(a, b));
    Ok(out)
}

/// `i_hat = min(i, N + 1 - i)` for the 0-based index `i`.
pub fn edge_distance(n: usize, index: usize) -> usize {
    (index + 1).min(n - index)
}

/// Closed energy interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn centered(center: f64, half_width: f64) -> Self {
        Self { lo: center - half_width, hi: center + half_width }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo <= self.hi)
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

/// The pair of windows around `center` at the scale of eigenvalue `index`:
/// half-widths `N^{-delta2} / (N^{2/3} i_hat^{1/3})` (outer) and half of that
/// (inner).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MicroInterval {
    pub center: f64,
    pub index: usize,
    pub outer: Interval,
    pub inner: Interval,
}

impl MicroInterval {
    pub fn new(n: usize, index: usize, center: f64, delta2: f64) -> Result<Self> {
        if index >= n {
            return Err(Error::invalid(format!("index {index} out of range for N = {n}")));
        }
        let w = local_scale(n, index) * (n as f64).powf(-delta2);
        Ok(Self {
            center,
            index,
            outer: Interval::centered(center, w),
            inner: Interval::centered(center, 0.5 * w),
        })
    }
}

/// `N^{-2/3} i_hat^{-1/3}`, the typical eigenvalue spacing near index `i`.
pub fn local_scale(n: usize, index: usize) -> f64 {
    let nf = n as f64;
    1.0 / (nf.powf(2.0 / 3.0) * (edge_distance(n, index) as f64).cbrt())
}

/// Number of sorted eigenvalues in the closed interval, by binary search.
pub fn count_eigs(lambdas: &[f64], iv: &Interval) -> usize {
    if iv.is_empty() {
        return 0;
    }
    let lo = lambdas.partition_point(|&x| x < iv.lo);
    let hi = lambdas.partition_point(|&x| x <= iv.hi);
    hi.saturating_sub(lo)
}

/// Exponents of the regularization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegParams {
    pub delta2: f64,
    pub epsilon2: f64,
}

impl Default for RegParams {
    fn default() -> Self {
        Self { delta2: 0.05, epsilon2: 0.10 }
    }
}

impl RegParams {
    pub fn new(delta2: f64, epsilon2: f64) -> Result<Self> {
        let p = Self { delta2, epsilon2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta2 > 0.0) || !(self.epsilon2 > self.delta2) {
            return Err(Error::invalid(format!(
                "regularization exponents need 0 < delta2 < epsilon2, got delta2 = {}, epsilon2 = {}",
                self.delta2, self.epsilon2
            )));
        }
        Ok(())
    }

    /// `eta_i = N^{-epsilon2} / (N^{2/3} i_hat^{1/3})`.
    pub fn eta(&self, n: usize, index: usize) -> f64 {
        local_scale(n, index) * (n as f64).powf(-self.epsilon2)
    }

    /// Integration window `I_hat` centred at `center` for eigenvalue `index`.
    pub fn window(&self, n: usize, index: usize, center: f64) -> Result<Interval> {
        Ok(MicroInterval::new(n, index, center, self.delta2)?.inner)
    }

    /// `((2/pi) arctan(N^{epsilon2 - delta2} / 2))^2`, the weight with which
    /// `hat p_kl^2` enters `v(k, l)` through its own window pair.
    pub fn window_constant(&self, n: usize) -> f64 {
        let r = (n as f64).powf(self.epsilon2 - self.delta2) / 2.0;
        (2.0 / std::f64::consts::PI * r.atan()).powi(2)
    }
}

/// `arctan(b) - arctan(a)` without cancellation for large arguments.
fn atan_diff(b: f64, a: f64) -> f64 {
    let num = b - a;
    let den = 1.0 + a * b;
    if den > 0.0 {
        num.atan2(den)
    } else {
        b.atan() - a.atan()
    }
}

/// `int_{iv} eta / ((E - lambda)^2 + eta^2) dE`.
pub fn poisson_mass(lambda: f64, iv: &Interval, eta: f64) -> f64 {
    atan_diff((iv.hi - lambda) / eta, (iv.lo - lambda) / eta)
}

/// `Im 1/(lambda - z) = eta / ((lambda - E)^2 + eta^2)`.
#[inline]
fn poisson_kernel(lambda: f64, z: Complex64) -> f64 {
    let d = lambda - z.re;
    z.im / (d * d + z.im * z.im)
}

/// `Im G(z) = U diag(Im 1/(lambda_i - z)) U^T` as a dense matrix.
fn im_resolvent(s: &SpectralData, z: Complex64) -> Mat<f64> {
    let n = s.dim();
    let mut scaled = s.frame().to_owned();
    for j in 0..n {
        let k = poisson_kernel(s.lambda(j), z);
        for i in 0..n {
            scaled[(i, j)] *= k;
        }
    }
    &scaled * s.frame().transpose()
}

/// Three-term function
/// `|I|^{-1} sum_{a,b} Im<q_a,G1 q_b> Im<q_a,G2 q_b> - 2/N sum_a <q_a, Im G1 Im G2 q_a>
///  + |I|/N^2 tr(Im G1 Im G2)`, assembled from dense resolvent matrices.
pub fn z_resolvent(s: &SpectralData, f: &TestFamily, z1: SpectralPoint, z2: SpectralPoint) -> Result<f64> {
    if s.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: f.dim() });
    }
    let n = s.dim();
    let m = f.len();
    let g1 = im_resolvent(s, z1.z());
    let g2 = im_resolvent(s, z2.z());
    let q = Mat::from_fn(n, m, |i, a| f.vector(a)[i]);
    let g1q = &g1 * &q;
    let g2q = &g2 * &q;
    let a1 = q.transpose() * &g1q;
    let a2 = q.transpose() * &g2q;
    let mut first = 0.0;
    let mut second = 0.0;
    for a in 0..m {
        for b in 0..m {
            first += a1[(a, b)] * a2[(a, b)];
        }
        second += (0..n).map(|i| g1q[(i, a)] * g2q[(i, a)]).sum::<f64>();
    }
    let mut trace = 0.0;
    for i in 0..n {
        for j in 0..n {
            trace += g1[(i, j)] * g2[(j, i)];
        }
    }
    let (nf, mf) = (n as f64, m as f64);
    Ok(first / mf - 2.0 / nf * second + mf / (nf * nf) * trace)
}

/// Spectral form `|I|^{-1} sum_{i,j} K_i(z1) K_j(z2) p_ij^2` with Poisson
/// kernels `K_i(z) = Im 1/(lambda_i - z)`.
pub fn z_spectral(t: &OverlapTable, lambdas: &[f64], z1: SpectralPoint, z2: SpectralPoint) -> Result<f64> {
    let n = t.dim();
    if lambdas.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: lambdas.len() });
    }
    let k1: Vec<f64> = lambdas.iter().map(|&l| poisson_kernel(l, z1.z())).collect();
    let k2: Vec<f64> = lambdas.iter().map(|&l| poisson_kernel(l, z2.z())).collect();
    let mut total = 0.0;
    for i in 0..n {
        let row: f64 = (0..n).map(|j| t.p(i, j).powi(2) * k2[j]).sum();
        total += k1[i] * row;
    }
    Ok(total / t.set_size() as f64)
}

/// Window masses `A_i = int_{I_hat(lambda_k)} K_i(E + i eta_k) dE` for all `i`.
pub fn window_masses(lambdas: &[f64], k: usize, params: &RegParams) -> Result<Vec<f64>> {
    params.validate()?;
    let n = lambdas.len();
    let iv = params.window(n, k, lambdas[k])?;
    let eta = params.eta(n, k);
    Ok(lambdas.iter().map(|&l| poisson_mass(l, &iv, eta)).collect())
}

/// `v(k, l) = (N^2/pi^2) int_{I_hat(lambda_k)} int_{I_hat(lambda_l)} Z(E1 + i eta_k, E2 + i eta_l)`,
/// integrated exactly: `pi^{-2} sum_{i,j} hat p_ij^2 A_i(k) A_j(l)`.
pub fn v_observable(s: &SpectralData, f: &TestFamily, k: usize, l: usize, params: &RegParams) -> Result<f64> {
    v_observable_from_table(&overlaps(s, f)?, s.lambdas(), k, l, params)
}

/// [`v_observable`] for an existing overlap table.
pub fn v_observable_from_table(t: &OverlapTable, lambdas: &[f64], k: usize, l: usize, params: &RegParams) -> Result<f64> {
    let ak = window_masses(lambdas, k, params)?;
    let al = window_masses(lambdas, l, params)?;
    Ok(weighted_hat_p2(t, &ak, &al))
}

fn weighted_hat_p2(t: &OverlapTable, ak: &[f64], al: &[f64]) -> f64 {
    let n = t.dim();
    let mut total = 0.0;
    for i in 0..n {
        if ak[i] == 0.0 {
            continue;
        }
        let row: f64 = (0..n).map(|j| t.hat_p(i, j).powi(2) * al[j]).sum();
        total += ak[i] * row;
    }
    total / std::f64::consts::PI.powi(2)
}

/// `v_l(alpha) = pi^{-1} int_{I_hat(lambda_l)} Im(<q_a, G q_a> - m_N)(E + i eta_l) dE`
/// `= pi^{-1} sum_k (<q_a,u_k>^2 - 1/N) A_k(l)`; `alpha` is the family position.
pub fn v_entry(s: &SpectralData, f: &TestFamily, l: usize, alpha: usize, params: &RegParams) -> Result<f64> {
    if alpha >= f.len() {
        return Err(Error::invalid(format!("family position {alpha} out of range")));
    }
    let a = window_masses(s.lambdas(), l, params)?;
    let q = f.vector(alpha);
    let inv_n = 1.0 / s.dim() as f64;
    let total: f64 = (0..s.dim())
        .map(|k| (crate::spectral::dot(q, s.vector(k)).powi(2) - inv_n) * a[k])
        .sum();
    Ok(total / std::f64::consts::PI)
}

/// `q_ll = (N / sqrt|I|) sum_alpha v_l(alpha)`.
pub fn q_ll(s: &SpectralData, f: &TestFamily, l: usize, params: &RegParams) -> Result<f64> {
    let mut total = 0.0;
    for alpha in 0..f.len() {
        total += v_entry(s, f, l, alpha, params)?;
    }
    Ok(s.dim() as f64 / (f.len() as f64).sqrt() * total)
}

/// `q_ll` from an overlap table: `pi^{-1} sum_k hat p_kk A_k(l)`.
pub fn q_ll_from_table(t: &OverlapTable, lambdas: &[f64], l: usize, params: &RegParams) -> Result<f64> {
    let a = window_masses(lambdas, l, params)?;
    Ok((0..t.dim()).map(|k| t.hat_p(k, k) * a[k]).sum::<f64>() / std::f64::consts::PI)
}

/// Both sides of the domination inequality for one `(k, l)` term.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Domination {
    pub v: f64,
    /// `hat p_kl^2` times the own-window weight; the `(i, j) = (k, l)` term of `v`.
    pub own_term: f64,
    /// `v - own_term`, a sum of non-negative terms.
    pub margin: f64,
}

/// Splits `v(k, l)` into its own term `c hat p_kl^2` and the rest.
pub fn domination(t: &OverlapTable, lambdas: &[f64], k: usize, l: usize, params: &RegParams) -> Result<Domination> {
    let ak = window_masses(lambdas, k, params)?;
    let al = window_masses(lambdas, l, params)?;
    let v = weighted_hat_p2(t, &ak, &al);
    let own_term = t.hat_p(k, l).powi(2) * ak[k] * al[l] / std::f64::consts::PI.powi(2);
    Ok(Domination { v, own_term, margin: v - own_term })
}
