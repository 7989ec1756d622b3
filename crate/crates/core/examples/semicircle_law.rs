//! Semicircle density, quantiles, Stieltjes transform and the
//! characteristics of the OU flow, compared with a GOE spectrum.

use eigenmass::ensembles::sample_goe;
use eigenmass::semicircle::{cdf, characteristic, m_sc, quantiles};
use eigenmass::spectral::{decompose, stieltjes, SpectralPoint};
use eigenmass::stats::ks_one_sample;

pub struct Report {
    pub ks: f64,
    pub max_rigidity: f64,
    pub stieltjes_gap: f64,
    pub flow_gap: f64,
}

pub fn run_example() -> eigenmass::Result<Report> {
    let n = 500;
    let s = decompose(&sample_goe(n, 3)?)?;
    let ks = ks_one_sample(s.lambdas(), cdf)?.statistic;
    let q = quantiles(n)?;
    let max_rigidity = s.lambdas().iter().zip(q.gammas()).map(|(l, g)| (l - g).abs()).fold(0.0, f64::max);
    let z = SpectralPoint::new(0.5, 0.1)?;
    let stieltjes_gap = (stieltjes(&s, z) - m_sc(z)).norm();

    // m_sc(z_s) = e^{-s/2} m_sc(z) along the characteristic.
    let zs = characteristic(z, 0.4)?;
    let flow_gap = (m_sc(zs) - (-0.2f64).exp() * m_sc(z)).norm();

    println!("N = {n}: KS to the semicircle {ks:.4}, max |lambda_i - gamma_i| {max_rigidity:.4}");
    println!("|m_N - m_sc| at {:.1}+{:.1}i: {stieltjes_gap:.2e}", z.re(), z.im());
    println!("characteristic z_0.4 = {:.4}, transport residual {flow_gap:.2e}", zs.z());
    Ok(Report { ks, max_rigidity, stieltjes_gap, flow_gap })
}

#[allow(dead_code)]
fn main() -> eigenmass::Result<()> {
    run_example().map(|_| ())
}
