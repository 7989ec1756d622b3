//! Generator identities of the eigenvector moment flows.
//!
//! The eigenvector diffusion has generator
//! `L = (1/2) sum_{k<l} X_kl^2 / (N (lambda_k - lambda_l)^2)`, where `X_kl`
//! generates the plane rotation of `(u_k, u_l)`. `X_kl^2 F` is the second
//! derivative of `theta -> F(rotate(k, l, theta))` at zero, obtained here by
//! Richardson-refined central differences. Comparing `L F` with the flow
//! right-hand sides, fed by pointwise evaluations of the same observable
//! family, checks the flows as frame-space identities.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use crate::matchings::{f_polynomial, g4_symmetrized, g_polynomial, h4_fermionic, FourLabels, ParticleConfiguration};
use crate::observables::{overlaps, random_family, TestFamily};
use crate::rng::{derive_seed, rng_from_seed, Domain};
use crate::spectral::SpectralData;
use crate::{Error, Result};

/// Finite-difference step used by the flow checks.
pub const DEFAULT_STEP: f64 = 1e-4;

/// An observable of the eigenframe bound to its configuration and labels.
#[derive(Clone, Debug, PartialEq)]
pub enum FlowObservable {
    /// Perfect-matching observable `f(xi)`.
    FMatching { config: ParticleConfiguration },
    /// Pair-assignment observable `g(xi)` with `2n` family labels.
    GPairs { config: ParticleConfiguration, labels: Vec<usize> },
    /// Symmetrized four-point observable `g(j, k)`.
    G4 { labels: FourLabels, j: usize, k: usize },
    /// Signed four-point observable `h(j, k)`.
    H4 { labels: FourLabels, j: usize, k: usize },
    /// Control observable.
    Constant(f64),
}

/// Names used in reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    FMatching,
    GPairs,
    G4,
    H4,
    Constant,
}

impl FlowKind {
    pub fn name(self) -> &'static str {
        match self {
            FlowKind::FMatching => "f_matching",
            FlowKind::GPairs => "g_pairs",
            FlowKind::G4 => "g4",
            FlowKind::H4 => "h4",
            FlowKind::Constant => "constant",
        }
    }
}

impl FlowObservable {
    pub fn kind(&self) -> FlowKind {
        match self {
            FlowObservable::FMatching { .. } => FlowKind::FMatching,
            FlowObservable::GPairs { .. } => FlowKind::GPairs,
            FlowObservable::G4 { .. } => FlowKind::G4,
            FlowObservable::H4 { .. } => FlowKind::H4,
            FlowObservable::Constant(_) => FlowKind::Constant,
        }
    }

    /// Pointwise value on the frame of `s`.
    pub fn evaluate(&self, s: &SpectralData, f: &TestFamily) -> Result<f64> {
        if let FlowObservable::Constant(c) = self {
            return Ok(*c);
        }
        let t = overlaps(s, f)?;
        match self {
            FlowObservable::FMatching { config } => f_polynomial(&t, config),
            FlowObservable::GPairs { config, labels } => g_polynomial(&t, labels, config),
            FlowObservable::G4 { labels, j, k } => g4_symmetrized(&t, labels, *j, *k),
            FlowObservable::H4 { labels, j, k } => h4_fermionic(&t, labels, *j, *k),
            FlowObservable::Constant(_) => unreachable!(),
        }
    }
}

/// Plane rotation `u_k <- cos t u_k - sin t u_l`, `u_l <- sin t u_k + cos t u_l`.
/// Eigenvalues are untouched and the sign rule is not re-applied.
pub fn rotate_pair(s: &SpectralData, k: usize, l: usize, theta: f64) -> Result<SpectralData> {
    let n = s.dim();
    if k == l || k >= n || l >= n {
        return Err(Error::invalid(format!("rotation needs distinct indices below N = {n}, got ({k}, {l})")));
    }
    let (sin, cos) = theta.sin_cos();
    let mut out = s.clone();
    let frame = out.frame_mut();
    for i in 0..n {
        let (a, b) = (frame[(i, k)], frame[(i, l)]);
        frame[(i, k)] = cos * a - sin * b;
        frame[(i, l)] = sin * a + cos * b;
    }
    Ok(out)
}

/// `X_kl^2 o` by central second differences with one Richardson step:
/// `(4 D(h/2) - D(h)) / 3`, `D(h) = (F(h) - 2F(0) + F(-h)) / h^2`.
pub fn apply_generator_sq(
    o: &FlowObservable,
    s: &SpectralData,
    f: &TestFamily,
    k: usize,
    l: usize,
    h: f64,
) -> Result<f64> {
    if !(1e-6..=1e-3).contains(&h) {
        return Err(Error::invalid(format!("finite-difference step {h} outside [1e-6, 1e-3]")));
    }
    let eval = |theta: f64| o.evaluate(&rotate_pair(s, k, l, theta)?, f);
    let f0 = eval(0.0)?;
    let d = |step: f64| -> Result<f64> { Ok((eval(step)? - 2.0 * f0 + eval(-step)?) / (step * step)) };
    Ok((4.0 * d(0.5 * h)? - d(h)?) / 3.0)
}

/// Central second difference without refinement, for step-refinement checks.
pub fn second_difference(
    o: &FlowObservable,
    s: &SpectralData,
    f: &TestFamily,
    k: usize,
    l: usize,
    h: f64,
) -> Result<f64> {
    let eval = |theta: f64| o.evaluate(&rotate_pair(s, k, l, theta)?, f);
    Ok((eval(h)? - 2.0 * eval(0.0)? + eval(-h)?) / (h * h))
}

fn lookup<K: std::hash::Hash + Eq + std::fmt::Debug>(values: &HashMap<K, f64>, key: &K) -> Result<f64> {
    values.get(key).copied().ok_or_else(|| Error::MissingValue(format!("{key:?}")))
}

fn lookup_pair(values: &HashMap<(usize, usize), f64>, a: usize, b: usize) -> Result<f64> {
    values
        .get(&(a, b))
        .or_else(|| values.get(&(b, a)))
        .copied()
        .ok_or_else(|| Error::MissingValue(format!("({a}, {b})")))
}

fn check_config(lambdas: &[f64], c: &ParticleConfiguration) -> Result<()> {
    if c.n_sites() != lambdas.len() {
        return Err(Error::DimensionMismatch { expected: lambdas.len(), found: c.n_sites() });
    }
    Ok(())
}

fn particle_flow(
    values: &HashMap<ParticleConfiguration, f64>,
    lambdas: &[f64],
    c: &ParticleConfiguration,
    scale: f64,
) -> Result<f64> {
    check_config(lambdas, c)?;
    let n = lambdas.len() as f64;
    let here = lookup(values, c)?;
    let mut total = 0.0;
    for (k, xk) in c.occupied() {
        for l in 0..lambdas.len() {
            if l == k {
                continue;
            }
            let coeff = scale * xk as f64 * (1.0 + 2.0 * c.get(l) as f64);
            let d = lambdas[k] - lambdas[l];
            total += coeff * (lookup(values, &c.move_particle(k, l)?)? - here) / (n * d * d);
        }
    }
    Ok(total)
}

/// `sum_{k != l} 2 xi_k (1 + 2 xi_l) (f(xi^{kl}) - f(xi)) / (N (lambda_k - lambda_l)^2)`.
pub fn emf_rhs(values: &HashMap<ParticleConfiguration, f64>, lambdas: &[f64], c: &ParticleConfiguration) -> Result<f64> {
    particle_flow(values, lambdas, c, 2.0)
}

/// `sum_{k != l} xi_k (1 + 2 xi_l) (g(xi^{kl}) - g(xi)) / (N (lambda_k - lambda_l)^2)`.
pub fn emf2_rhs(values: &HashMap<ParticleConfiguration, f64>, lambdas: &[f64], c: &ParticleConfiguration) -> Result<f64> {
    particle_flow(values, lambdas, c, 1.0)
}

/// Flow of the symmetrized four-point observable. The weights are
/// `zeta_j = zeta_k = 1` (and zero elsewhere); for `j = k` only
/// `zeta_j = 1`. `values` is keyed by unordered index pairs.
pub fn emfnew1_rhs(values: &HashMap<(usize, usize), f64>, lambdas: &[f64], j: usize, k: usize) -> Result<f64> {
    let n = lambdas.len();
    if j >= n || k >= n {
        return Err(Error::invalid(format!("indices ({j}, {k}) out of range for N = {n}")));
    }
    let zeta = |l: usize| if l == j || l == k { 1.0 } else { 0.0 };
    let here = lookup_pair(values, j, k)?;
    let nf = n as f64;
    let mut total = 0.0;
    for l in 0..n {
        if l != k {
            let d = lambdas[l] - lambdas[k];
            total += zeta(k) * (1.0 + 2.0 * zeta(l)) * (lookup_pair(values, j, l)? - here) / (nf * d * d);
        }
        if l != j {
            let d = lambdas[l] - lambdas[j];
            total += zeta(j) * (1.0 + 2.0 * zeta(l)) * (lookup_pair(values, l, k)? - here) / (nf * d * d);
        }
    }
    Ok(total)
}

/// Fermionic flow: both sums run over `l` distinct from `j` and `k`; the
/// diagonal row `j = k` is identically zero.
pub fn fermionic_rhs(values: &HashMap<(usize, usize), f64>, lambdas: &[f64], j: usize, k: usize) -> Result<f64> {
    let n = lambdas.len();
    if j >= n || k >= n {
        return Err(Error::invalid(format!("indices ({j}, {k}) out of range for N = {n}")));
    }
    if j == k {
        return Ok(0.0);
    }
    let here = lookup_pair(values, j, k)?;
    let nf = n as f64;
    let mut total = 0.0;
    for l in (0..n).filter(|&l| l != j && l != k) {
        let dj = lambdas[j] - lambdas[l];
        let dk = lambdas[k] - lambdas[l];
        total += (lookup_pair(values, l, k)? - here) / (nf * dj * dj);
        total += (lookup_pair(values, j, l)? - here) / (nf * dk * dk);
    }
    Ok(total)
}

/// Outcome of one generator check.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FlowResidual {
    /// `L F` from finite differences.
    pub generator: f64,
    /// The assembled flow right-hand side.
    pub rhs: f64,
    /// `|L F - RHS|`.
    pub absolute: f64,
    /// `|L F - RHS| / max(|RHS|, sum_{k<l} |L_kl F|)`; equals the absolute
    /// residual when both scales vanish.
    pub relative: f64,
}

/// `L F` with its scale `sum_{k<l} |X_kl^2 F| / (2 N (lambda_k - lambda_l)^2)`.
pub fn generator_action(o: &FlowObservable, s: &SpectralData, f: &TestFamily, h: f64) -> Result<(f64, f64)> {
    let n = s.dim();
    let nf = n as f64;
    let (mut total, mut scale) = (0.0, 0.0);
    for k in 0..n {
        for l in (k + 1)..n {
            let d = s.lambda(k) - s.lambda(l);
            let term = 0.5 * apply_generator_sq(o, s, f, k, l, h)? / (nf * d * d);
            total += term;
            scale += term.abs();
        }
    }
    Ok((total, scale))
}

/// Right-hand side of the flow matching the observable kind, fed by
/// pointwise evaluations of the same family at neighbouring bindings.
pub fn flow_rhs(o: &FlowObservable, s: &SpectralData, f: &TestFamily) -> Result<f64> {
    let n = s.dim();
    match o {
        FlowObservable::Constant(_) => Ok(0.0),
        FlowObservable::FMatching { config } | FlowObservable::GPairs { config, .. } => {
            let rebind = |c: &ParticleConfiguration| match o {
                FlowObservable::GPairs { labels, .. } => {
                    FlowObservable::GPairs { config: c.clone(), labels: labels.clone() }
                }
                _ => FlowObservable::FMatching { config: c.clone() },
            };
            let mut values = HashMap::new();
            values.insert(config.clone(), o.evaluate(s, f)?);
            for (k, _) in config.occupied() {
                for l in 0..n {
                    let moved = config.move_particle(k, l)?;
                    if !values.contains_key(&moved) {
                        let v = rebind(&moved).evaluate(s, f)?;
                        values.insert(moved, v);
                    }
                }
            }
            if o.kind() == FlowKind::FMatching {
                emf_rhs(&values, s.lambdas(), config)
            } else {
                emf2_rhs(&values, s.lambdas(), config)
            }
        }
        FlowObservable::G4 { labels, j, k } | FlowObservable::H4 { labels, j, k } => {
            let fermionic = o.kind() == FlowKind::H4;
            let at = |a: usize, b: usize| -> Result<f64> {
                if fermionic {
                    FlowObservable::H4 { labels: *labels, j: a, k: b }.evaluate(s, f)
                } else {
                    FlowObservable::G4 { labels: *labels, j: a, k: b }.evaluate(s, f)
                }
            };
            let mut values = HashMap::new();
            values.insert((*j, *k), at(*j, *k)?);
            for l in 0..n {
                values.insert((*j, l), at(*j, l)?);
                values.insert((l, *k), at(l, *k)?);
            }
            if fermionic {
                fermionic_rhs(&values, s.lambdas(), *j, *k)
            } else {
                emfnew1_rhs(&values, s.lambdas(), *j, *k)
            }
        }
    }
}

/// Compares `L F` with the flow right-hand side for one observable.
pub fn generator_flow_residual(o: &FlowObservable, s: &SpectralData, f: &TestFamily, h: f64) -> Result<FlowResidual> {
    let (generator, lhs_scale) = generator_action(o, s, f, h)?;
    let rhs = flow_rhs(o, s, f)?;
    let absolute = (generator - rhs).abs();
    let scale = rhs.abs().max(lhs_scale);
    let relative = if scale > 0.0 { absolute / scale } else { absolute };
    Ok(FlowResidual { generator, rhs, absolute, relative })
}

/// Random instance for generator checks: a Haar-like orthogonal frame, an
/// ascending spectrum with all gaps in `[0.1, 0.3]` and an orthonormal
/// family of `family_size` vectors.
pub fn random_instance(n: usize, family_size: usize, seed: u64) -> Result<(SpectralData, TestFamily)> {
    let basis = random_family(n, n, derive_seed(seed, Domain::Instance, 0))?;
    let mut rng = rng_from_seed(derive_seed(seed, Domain::Instance, 1));
    let mut lambdas = Vec::with_capacity(n);
    let mut x = 0.0;
    for _ in 0..n {
        lambdas.push(x);
        x += rng.random_range(0.1..0.3);
    }
    let shift = 0.5 * (lambdas[0] + lambdas[n - 1]);
    lambdas.iter_mut().for_each(|v| *v -= shift);
    let s = SpectralData::from_columns(lambdas, basis.vectors())?;
    let f = random_family(n, family_size, derive_seed(seed, Domain::Instance, 2))?;
    Ok((s, f))
}
