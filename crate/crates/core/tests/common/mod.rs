//! Independent reference routes used by the integration tests. Nothing here
//! calls the library's numerical kernels.

#![allow(dead_code)]

use eigenmass::spectral::{SpectralData, SymmetricMatrix};
use eigenmass::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric matrix with i.i.d. uniform upper-triangle entries.
pub fn random_symmetric(n: usize, seed: u64) -> SymmetricMatrix {
    let mut r = rng(seed);
    SymmetricMatrix::from_upper(n, |_, _| r.random_range(-1.0..1.0)).unwrap()
}

pub fn to_dense(m: &SymmetricMatrix) -> Vec<Vec<f64>> {
    let n = m.dim();
    (0..n).map(|i| (0..n).map(|j| m.get(i, j)).collect()).collect()
}

/// Cyclic Jacobi eigensolver: ascending eigenvalues and column eigenvectors
/// (`vectors[i][k]` is coordinate `i` of vector `k`).
pub fn jacobi_eigen(m: &SymmetricMatrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.dim();
    let mut a = to_dense(m);
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x][x].total_cmp(&a[y][y]));
    let lambdas = order.iter().map(|&k| a[k][k]).collect();
    let vectors = (0..n).map(|i| order.iter().map(|&k| v[i][k]).collect()).collect();
    (lambdas, vectors)
}

/// `(H - z)^{-1}` by complex Gauss–Jordan elimination with partial pivoting.
pub fn dense_resolvent(m: &SymmetricMatrix, z: Complex64) -> Vec<Vec<Complex64>> {
    let n = m.dim();
    let mut a: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (0..n).map(|j| Complex64::new(m.get(i, j), 0.0) - if i == j { z } else { Complex64::new(0.0, 0.0) }).collect())
        .collect();
    let mut inv: Vec<Vec<Complex64>> =
        (0..n).map(|i| (0..n).map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm())).unwrap();
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for j in 0..n {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                if f != Complex64::new(0.0, 0.0) {
                    for j in 0..n {
                        let (x, y) = (a[col][j], inv[col][j]);
                        a[r][j] -= f * x;
                        inv[r][j] -= f * y;
                    }
                }
            }
        }
    }
    inv
}

/// `sum_a <q_a,u_k><q_a,u_l> - delta_kl |I| / N` by explicit loops.
pub fn brute_overlap(s: &SpectralData, family: &[Vec<f64>], k: usize, l: usize) -> f64 {
    let n = s.dim();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let mut total = 0.0;
    for q in family {
        total += dot(q, s.vector(k)) * dot(q, s.vector(l));
    }
    if k == l {
        total -= family.len() as f64 / n as f64;
    }
    total
}

/// Composite Simpson rule with `2 * half_panels` panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, half_panels: usize) -> f64 {
    let m = 2 * half_panels;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Semicircle mass of `[-2, e]` by Simpson in the angle `E = 2 sin(t)`,
/// which removes the square-root endpoint singularity.
pub fn semicircle_mass_oracle(e: f64) -> f64 {
    let top = (e / 2.0).clamp(-1.0, 1.0).asin();
    simpson(|t| 2.0 / std::f64::consts::PI * t.cos() * t.cos(), -std::f64::consts::FRAC_PI_2, top, 2000)
}

/// Number of perfect matchings of a multiset of `2n` labelled vertices,
/// counted by exhaustive recursion over partners of the first free vertex.
pub fn count_matchings(vertices: usize) -> u64 {
    fn rec(free: &mut Vec<bool>) -> u64 {
        let Some(first) = free.iter().position(|&f| f) else { return 1 };
        free[first] = false;
        let mut total = 0;
        for j in (first + 1)..free.len() {
            if free[j] {
                free[j] = false;
                total += rec(free);
                free[j] = true;
            }
        }
        free[first] = true;
        total
    }
    rec(&mut vec![true; vertices])
}

/// All perfect matchings of `0..2n` as pair lists.
pub fn all_matchings(vertices: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(free: &mut Vec<bool>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        let Some(first) = free.iter().position(|&f| f) else {
            out.push(cur.clone());
            return;
        };
        free[first] = false;
        for j in (first + 1)..free.len() {
            if free[j] {
                free[j] = false;
                cur.push((first, j));
                rec(free, cur, out);
                cur.pop();
                free[j] = true;
            }
        }
        free[first] = true;
    }
    let mut out = Vec::new();
    rec(&mut vec![true; vertices], &mut Vec::new(), &mut out);
    out
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

/// Classical RK4 for the noise-free eigenvalue drift
/// `lambda_k' = N^{-1} sum_{l != k} 1/(lambda_k - lambda_l) - lambda_k / 2`.
pub fn rk4_drift(start: &[f64], t_end: f64, steps: usize) -> Vec<f64> {
    let n = start.len();
    let f = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|k| (0..n).filter(|&l| l != k).map(|l| 1.0 / (x[k] - x[l])).sum::<f64>() / n as f64 - x[k] / 2.0)
            .collect()
    };
    let h = t_end / steps as f64;
    let mut x = start.to_vec();
    for _ in 0..steps {
        let axpy = |a: &[f64], b: &[f64], s: f64| a.iter().zip(b).map(|(u, v)| u + s * v).collect::<Vec<_>>();
        let k1 = f(&x);
        let k2 = f(&axpy(&x, &k1, h / 2.0));
        let k3 = f(&axpy(&x, &k2, h / 2.0));
        let k4 = f(&axpy(&x, &k3, h));
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    x
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
