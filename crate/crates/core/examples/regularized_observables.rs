//! Poisson-regularized observables: the key identity, window masses and the
//! comparison of q_ll with the sharp overlap.

use eigenmass::ensembles::sample_goe;
use eigenmass::greenreg::{count_eigs, domination, q_ll_from_table, v_observable_from_table, z_resolvent, z_spectral, RegParams};
use eigenmass::observables::{coordinate_family, overlaps};
use eigenmass::spectral::{decompose, SpectralPoint};

pub struct Report {
    pub key_identity: f64,
    pub q_minus_hat_p: f64,
    pub margin: f64,
    pub window_count: usize,
}

pub fn run_example() -> eigenmass::Result<Report> {
    let n = 400;
    let s = decompose(&sample_goe(n, 31)?)?;
    let f = coordinate_family(n, &(0..20).collect::<Vec<_>>())?;
    let t = overlaps(&s, &f)?;

    let (z1, z2) = (SpectralPoint::new(-0.4, 0.01)?, SpectralPoint::new(0.7, 0.02)?);
    let a = z_resolvent(&s, &f, z1, z2)?;
    let key_identity = (a - z_spectral(&t, s.lambdas(), z1, z2)?).abs() / a.abs();

    let params = RegParams::new(0.05, 0.45)?;
    let l = n / 2;
    let q = q_ll_from_table(&t, s.lambdas(), l, &params)?;
    let q_minus_hat_p = (q - t.hat_p(l, l)).abs();
    let v = v_observable_from_table(&t, s.lambdas(), l, l + 1, &params)?;
    let d = domination(&t, s.lambdas(), l, l + 1, &params)?;
    let window_count = count_eigs(s.lambdas(), &params.window(n, l, s.lambda(l))?);

    println!("key identity relative gap {key_identity:.2e}");
    println!("q_ll = {q:+.4}, hat p_ll = {:+.4}", t.hat_p(l, l));
    println!("v(l, l+1) = {v:.4e}, own term {:.4e}, margin {:.4e}", d.own_term, d.margin);
    println!("eigenvalues in the window of lambda_l: {window_count}");
    Ok(Report { key_identity, q_minus_hat_p, margin: d.margin, window_count })
}

#[allow(dead_code)]
fn main() -> eigenmass::Result<()> {
    run_example().map(|_| ())
}
