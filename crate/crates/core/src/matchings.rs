//! Particle configurations and the matching-based moment observables.
//!
//! A configuration `xi` places `xi_i` particles on site `i` (an eigenvector
//! index). Two symmetrizations are provided:
//!
//! * perfect matchings of the doubled vertex set (each particle contributes
//!   two vertices), giving `f(xi) = M(xi)^{-1} sum_G prod_{e in G} p(e)`;
//! * pair assignments, which give each particle an ordered pair of test
//!   vector labels, giving the observable `g(xi)` over a label list
//!   `alpha_1..alpha_{2n}`.
//!
//! All evaluations are pointwise on one eigenframe; no conditional
//! expectation is taken.

use std::collections::BTreeMap;
use std::fmt;

use crate::observables::OverlapTable;
use crate::{Error, Result};

/// Largest particle count accepted by [`enumerate_perfect_matchings`].
pub const MATCHING_CAP: usize = 6;

/// Largest particle count accepted by [`enumerate_pair_assignments`].
pub const ASSIGNMENT_CAP: usize = 5;

/// Sparse occupation numbers on sites `0..n_sites`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParticleConfiguration {
    n_sites: usize,
    occupancy: BTreeMap<usize, usize>,
}

impl ParticleConfiguration {
    /// Builds a configuration from `(site, multiplicity)` pairs. Repeated
    /// sites accumulate; zero multiplicities are dropped.
    pub fn new(n_sites: usize, sites: &[(usize, usize)]) -> Result<Self> {
        let mut occupancy = BTreeMap::new();
        for &(site, count) in sites {
            if site >= n_sites {
                return Err(Error::invalid(format!("site {site} out of range for N = {n_sites}")));
            }
            if count > 0 {
                *occupancy.entry(site).or_insert(0) += count;
            }
        }
        if occupancy.is_empty() {
            return Err(Error::invalid("a configuration needs at least one particle"));
        }
        Ok(Self { n_sites, occupancy })
    }

    /// `n` particles on one site.
    pub fn single_site(n_sites: usize, site: usize, n: usize) -> Result<Self> {
        Self::new(n_sites, &[(site, n)])
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Total particle count `n`.
    pub fn total(&self) -> usize {
        self.occupancy.values().sum()
    }

    /// `xi_site`, zero for empty sites.
    pub fn get(&self, site: usize) -> usize {
        self.occupancy.get(&site).copied().unwrap_or(0)
    }

    /// Occupied sites with their multiplicities, in increasing site order.
    pub fn occupied(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.occupancy.iter().map(|(&s, &c)| (s, c))
    }

    /// Site of every particle, each site repeated by its multiplicity.
    pub fn particle_sites(&self) -> Vec<usize> {
        self.occupied().flat_map(|(s, c)| std::iter::repeat_n(s, c)).collect()
    }

    /// `xi^{ij}`: one particle moved from `i` to `j`; unchanged when `xi_i = 0`
    /// or `i = j`.
    pub fn move_particle(&self, i: usize, j: usize) -> Result<Self> {
        if i >= self.n_sites || j >= self.n_sites {
            return Err(Error::invalid(format!(
                "sites ({i}, {j}) out of range for N = {}",
                self.n_sites
            )));
        }
        if i == j || self.get(i) == 0 {
            return Ok(self.clone());
        }
        let mut next = self.clone();
        match next.occupancy.get_mut(&i) {
            Some(c) if *c > 1 => *c -= 1,
            _ => {
                next.occupancy.remove(&i);
            }
        }
        *next.occupancy.entry(j).or_insert(0) += 1;
        Ok(next)
    }
}

impl fmt::Debug for ParticleConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (s, c)) in self.occupied().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}:{c}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for ParticleConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// `(2m - 1)!!` with overflow detection; `(-1)!! = 1`.
pub fn double_factorial_odd(m: usize) -> Result<u64> {
    let mut acc: u64 = 1;
    let mut k = 1u64;
    while (k as usize) < 2 * m {
        acc = acc.checked_mul(k).ok_or(Error::Overflow("double factorial"))?;
        k += 2;
    }
    Ok(acc)
}

/// `M(xi) = prod_k (2 xi_k - 1)!!`, exact.
pub fn m_factor(c: &ParticleConfiguration) -> Result<u64> {
    c.occupied().try_fold(1u64, |acc, (_, m)| {
        acc.checked_mul(double_factorial_odd(m)?).ok_or(Error::Overflow("matching factor"))
    })
}

/// Vertex `(site, copy)` of the doubled vertex set; `copy < 2 xi_site`.
pub type Vertex = (usize, usize);

/// A perfect matching as a list of vertex pairs.
pub type Matching = Vec<(Vertex, Vertex)>;

/// All perfect matchings of the complete graph on the doubled vertex set.
/// There are `(2n - 1)!!` of them.
pub fn enumerate_perfect_matchings(c: &ParticleConfiguration) -> Result<Vec<Matching>> {
    let n = c.total();
    if n > MATCHING_CAP {
        return Err(Error::EnumerationCap { particles: n, cap: MATCHING_CAP });
    }
    let vertices: Vec<Vertex> = c.occupied().flat_map(|(s, m)| (0..2 * m).map(move |a| (s, a))).collect();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    match_rest(&vertices, &mut vec![false; vertices.len()], &mut current, &mut out);
    Ok(out)
}

fn match_rest(vertices: &[Vertex], used: &mut [bool], current: &mut Matching, out: &mut Vec<Matching>) {
    let Some(first) = used.iter().position(|u| !u) else {
        out.push(current.clone());
        return;
    };
    used[first] = true;
    for partner in (first + 1)..vertices.len() {
        if used[partner] {
            continue;
        }
        used[partner] = true;
        current.push((vertices[first], vertices[partner]));
        match_rest(vertices, used, current, out);
        current.pop();
        used[partner] = false;
    }
    used[first] = false;
}

/// `M(xi)^{-1} sum_G prod_{e in G} p(e)` over perfect matchings of the doubled
/// vertex set, where an edge between copies of sites `a` and `b` carries
/// `p_ab`.
///
/// Evaluated by recursive pairing of the vertex site list, without
/// materializing the matchings.
pub fn f_polynomial(t: &OverlapTable, c: &ParticleConfiguration) -> Result<f64> {
    let n = c.total();
    if n > MATCHING_CAP {
        return Err(Error::EnumerationCap { particles: n, cap: MATCHING_CAP });
    }
    let mut sites: Vec<usize> = c.particle_sites().into_iter().flat_map(|s| [s, s]).collect();
    Ok(pairing_sum(t, &mut sites) / m_factor(c)? as f64)
}

fn pairing_sum(t: &OverlapTable, sites: &mut Vec<usize>) -> f64 {
    if sites.is_empty() {
        return 1.0;
    }
    let first = sites.remove(0);
    let mut total = 0.0;
    for i in 0..sites.len() {
        let partner = sites.remove(i);
        total += t.p(first, partner) * pairing_sum(t, sites);
        sites.insert(i, partner);
    }
    sites.insert(0, first);
    total
}

/// A pair assignment: entry `v` is the ordered label pair `(s1, s2)`,
/// `s1 < s2`, given to the `v`-th particle (particles ordered by site).
/// Labels are 0-based positions in `0..2n`.
pub type Assignment = Vec<(usize, usize)>;

/// All assignments of disjoint label pairs partitioning `0..2n` to the `n`
/// (distinguishable) particles. There are `(2n)! / 2^n` of them.
pub fn enumerate_pair_assignments(c: &ParticleConfiguration) -> Result<Vec<Assignment>> {
    let n = c.total();
    if n > ASSIGNMENT_CAP {
        return Err(Error::EnumerationCap { particles: n, cap: ASSIGNMENT_CAP });
    }
    let mut out = Vec::new();
    assign_rest(0, n, &mut vec![false; 2 * n], &mut Vec::with_capacity(n), &mut out);
    Ok(out)
}

fn assign_rest(v: usize, n: usize, used: &mut [bool], current: &mut Assignment, out: &mut Vec<Assignment>) {
    if v == n {
        out.push(current.clone());
        return;
    }
    for a in 0..2 * n {
        if used[a] {
            continue;
        }
        for b in (a + 1)..2 * n {
            if used[b] {
                continue;
            }
            used[a] = true;
            used[b] = true;
            current.push((a, b));
            assign_rest(v + 1, n, used, current, out);
            current.pop();
            used[a] = false;
            used[b] = false;
        }
    }
}

fn check_labels(t: &OverlapTable, labels: &[usize]) -> Result<()> {
    if let Some(&bad) = labels.iter().find(|&&a| a >= t.set_size()) {
        return Err(Error::invalid(format!(
            "family label {bad} out of range for |I| = {}",
            t.set_size()
        )));
    }
    Ok(())
}

/// `2^n / ((2n)! M(xi)) sum_sigma prod_v <q_{alpha_{s1(v)}},u_k><q_{alpha_{s2(v)}},u_k>`
/// where particle `v` sits on site `k`. `labels[p]` is the family position of
/// `alpha_{p+1}`.
pub fn g_polynomial(t: &OverlapTable, labels: &[usize], c: &ParticleConfiguration) -> Result<f64> {
    let n = c.total();
    if labels.len() != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, found: labels.len() });
    }
    check_labels(t, labels)?;
    let sites = c.particle_sites();
    let assignments = enumerate_pair_assignments(c)?;
    let v = |p: usize, k: usize| t.projection(labels[p], k);
    let sum: f64 = assignments
        .iter()
        .map(|sigma| sigma.iter().zip(&sites).map(|(&(a, b), &k)| v(a, k) * v(b, k)).product::<f64>())
        .sum();
    // 2^n / (2n)! is the reciprocal of the assignment count.
    Ok(sum / assignments.len() as f64 / m_factor(c)? as f64)
}

/// The four family labels of the four-point observables, as positions in
/// the family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FourLabels {
    pub alpha1: usize,
    pub alpha2: usize,
    pub beta1: usize,
    pub beta2: usize,
}

impl FourLabels {
    pub fn new(alpha1: usize, alpha2: usize, beta1: usize, beta2: usize) -> Self {
        Self { alpha1, alpha2, beta1, beta2 }
    }

    /// Label list in the order used by the pair-assignment observable:
    /// `(alpha1, beta1, alpha2, beta2)`.
    pub fn ordered(&self) -> [usize; 4] {
        [self.alpha1, self.beta1, self.alpha2, self.beta2]
    }

    fn check(&self, t: &OverlapTable) -> Result<()> {
        let l = self.ordered();
        check_labels(t, &l)?;
        for i in 0..4 {
            for j in (i + 1)..4 {
                if l[i] == l[j] {
                    return Err(Error::invalid("four-point labels must be pairwise distinct"));
                }
            }
        }
        Ok(())
    }
}

/// `<q_{alpha1},u_a><q_{beta1},u_b><q_{alpha2},u_c><q_{beta2},u_d>`.
pub fn four_point(t: &OverlapTable, l: &FourLabels, a: usize, b: usize, c: usize, d: usize) -> f64 {
    t.projection(l.alpha1, a) * t.projection(l.beta1, b) * t.projection(l.alpha2, c) * t.projection(l.beta2, d)
}

/// Sum of the six arrangements of two `j`'s and two `k`'s.
pub fn symmetrized_four_point(t: &OverlapTable, l: &FourLabels, j: usize, k: usize) -> f64 {
    four_point(t, l, j, j, k, k)
        + four_point(t, l, j, k, j, k)
        + four_point(t, l, j, k, k, j)
        + four_point(t, l, k, j, j, k)
        + four_point(t, l, k, j, k, j)
        + four_point(t, l, k, k, j, j)
}

/// Pointwise four-point observable: `(N^2/3)` times the single product when
/// `j = k`, `(N^2/6)` times the six-term symmetrization otherwise.
pub fn g4_symmetrized(t: &OverlapTable, l: &FourLabels, j: usize, k: usize) -> Result<f64> {
    l.check(t)?;
    let n2 = (t.dim() * t.dim()) as f64;
    Ok(if j == k {
        n2 / 3.0 * four_point(t, l, k, k, k, k)
    } else {
        n2 / 6.0 * symmetrized_four_point(t, l, j, k)
    })
}

/// Pointwise signed observable `(N^2/2) Y - g4` with
/// `Y = <jjkk> + <kkjj>`; exactly zero on the diagonal `j = k`.
pub fn h4_fermionic(t: &OverlapTable, l: &FourLabels, j: usize, k: usize) -> Result<f64> {
    l.check(t)?;
    if j == k {
        return Ok(0.0);
    }
    let n2 = (t.dim() * t.dim()) as f64;
    let y = four_point(t, l, j, j, k, k) + four_point(t, l, k, k, j, j);
    Ok(n2 / 2.0 * y - g4_symmetrized(t, l, j, k)?)
}
