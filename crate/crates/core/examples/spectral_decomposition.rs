//! Decomposes a GOE matrix, checks the residuals and evaluates the
//! resolvent through the spectral sum.

use eigenmass::ensembles::sample_goe;
use eigenmass::spectral::{decompose, eigenpair, green_entry, stieltjes, SpectralPoint};

pub struct Report {
    pub reconstruction: f64,
    pub orthonormality: f64,
    pub eigenpair_gap: f64,
    pub ward: f64,
}

pub fn run_example() -> eigenmass::Result<Report> {
    let n = 200;
    let h = sample_goe(n, 1)?;
    let s = decompose(&h)?;
    let reconstruction = s.reconstruct().combine(1.0, &h, -1.0)?.max_abs();
    let orthonormality = s.orthonormality_residual();
    let mid = eigenpair(&h, n / 2)?;
    let eigenpair_gap = (mid.value - s.lambda(n / 2)).abs();

    // Ward identity: sum_b |G_ab|^2 = Im G_aa / eta.
    let z = SpectralPoint::new(0.3, 0.05)?;
    let lhs: f64 = (0..n).map(|b| green_entry(&s, 0, b, z.z()).norm_sqr()).sum();
    let ward = (lhs - green_entry(&s, 0, 0, z.z()).im / z.im()).abs() / lhs;

    println!("N = {n}: spectrum in [{:.3}, {:.3}]", s.lambda(0), s.lambda(n - 1));
    println!("reconstruction {reconstruction:.2e}, orthonormality {orthonormality:.2e}");
    println!("single eigenpair vs full decomposition: {eigenpair_gap:.2e}");
    println!("m_N({:.2}+{:.2}i) = {:.4}, Ward residual {ward:.2e}", z.re(), z.im(), stieltjes(&s, z));
    Ok(Report { reconstruction, orthonormality, eigenpair_gap, ward })
}

#[allow(dead_code)]
fn main() -> eigenmass::Result<()> {
    run_example().map(|_| ())
}
