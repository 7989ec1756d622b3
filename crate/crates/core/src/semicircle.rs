//! Semicircle law: density, Stieltjes transform, classical locations and the
//! characteristics of the advection equation `d_s h = (m_sc + z/2) d_z h`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::spectral::SpectralPoint;
use crate::{Error, Result};

/// Finite-difference step used by [`advection_residual`].
pub const FD_STEP: f64 = 1e-5;

/// `rho_sc(E) = sqrt((4 - E^2)_+) / (2 pi)`.
pub fn rho_sc(e: f64) -> f64 {
    let r = 4.0 - e * e;
    if r > 0.0 {
        r.sqrt() / (2.0 * PI)
    } else {
        0.0
    }
}

/// Semicircle cumulative distribution function.
pub fn cdf(e: f64) -> f64 {
    if e <= -2.0 {
        0.0
    } else if e >= 2.0 {
        1.0
    } else {
        e * (4.0 - e * e).sqrt() / (4.0 * PI) + (e / 2.0).asin() / PI + 0.5
    }
}

/// Stieltjes transform of the semicircle law on the upper half plane.
pub fn m_sc(z: SpectralPoint) -> Complex64 {
    m_sc_complex(z.z())
}

/// Stieltjes transform at any `z` off the support `[-2, 2]`.
///
/// Uses `sqrt(z - 2) sqrt(z + 2)` with principal roots, which behaves like
/// `z` at infinity, and the cancellation-free form `-2 / (z + w)`.
pub fn m_sc_complex(z: Complex64) -> Complex64 {
    let w = (z - 2.0).sqrt() * (z + 2.0).sqrt();
    -2.0 / (z + w)
}

/// Classical eigenvalue locations `gamma_1 < ... < gamma_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Quantiles {
    n: usize,
    gammas: Vec<f64>,
}

impl Quantiles {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `gammas()[i]` is the location of the `(i + 1)`-th eigenvalue.
    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }
}

/// `gamma_i` solves `i / N = cdf(gamma_i)` for `i = 1..=N`.
pub fn quantiles(n: usize) -> Result<Quantiles> {
    if n == 0 {
        return Err(Error::invalid("quantiles need N >= 1"));
    }
    let gammas = (1..=n).map(|i| inverse_cdf(i as f64 / n as f64)).collect();
    Ok(Quantiles { n, gammas })
}

/// Inverse of [`cdf`] by bisection; exact at the endpoints and at `1/2`.
pub fn inverse_cdf(p: f64) -> f64 {
    if p <= 0.0 {
        return -2.0;
    }
    if p >= 1.0 {
        return 2.0;
    }
    if p == 0.5 {
        return 0.0;
    }
    let (mut lo, mut hi) = (-2.0f64, 2.0f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// The characteristic `z_s = -e^{s/2} / m_sc(z) - e^{-s/2} m_sc(z)`.
pub fn characteristic(z: SpectralPoint, s: f64) -> Result<SpectralPoint> {
    if s == 0.0 {
        return Ok(z);
    }
    SpectralPoint::from_complex(characteristic_complex(z.z(), s)?)
}

/// [`characteristic`] for any starting point off `[-2, 2]`, including real
/// points outside the spectrum.
pub fn characteristic_complex(z: Complex64, s: f64) -> Result<Complex64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::invalid(format!("characteristic time must be >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(z);
    }
    let m = m_sc_complex(z);
    let (up, down) = ((0.5 * s).exp(), (-0.5 * s).exp());
    Ok(-up / m - down * m)
}

/// Residual `|d_s h_s(z) - (m_sc(z) + z/2) d_z h_s(z)|` for the transported
/// field `h_s(z) = h0(z_s)`, with both derivatives by central differences.
/// Near `s = 0` the time derivative uses a second-order one-sided stencil.
pub fn advection_residual(
    h0: impl Fn(Complex64) -> Complex64,
    z: SpectralPoint,
    s: f64,
) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::invalid(format!("advection time must be >= 0, got {s}")));
    }
    let h = FD_STEP;
    let hs = |w: Complex64, t: f64| -> Result<Complex64> { Ok(h0(characteristic_complex(w, t)?)) };
    let zc = z.z();
    let ds = if s >= h {
        (hs(zc, s + h)? - hs(zc, s - h)?) / (2.0 * h)
    } else {
        (-3.0 * hs(zc, s)? + 4.0 * hs(zc, s + h)? - hs(zc, s + 2.0 * h)?) / (2.0 * h)
    };
    let dz = (hs(zc + h, s)? - hs(zc - h, s)?) / (2.0 * h);
    Ok((ds - (m_sc_complex(zc) + zc / 2.0) * dz).norm())
}
