//! Perfect-matching and pair-assignment observables on a particle
//! configuration, with the four-point observables.

use eigenmass::ensembles::sample_goe;
use eigenmass::matchings::{
    enumerate_pair_assignments, enumerate_perfect_matchings, f_polynomial, g4_symmetrized, g_polynomial, h4_fermionic, m_factor,
    FourLabels, ParticleConfiguration,
};
use eigenmass::observables::{overlaps, random_family};
use eigenmass::spectral::decompose;

pub struct Report {
    pub matchings: usize,
    pub assignments: usize,
    pub single_site_error: f64,
    pub h4_diagonal: f64,
}

pub fn run_example() -> eigenmass::Result<Report> {
    let n = 30;
    let s = decompose(&sample_goe(n, 8)?)?;
    let t = overlaps(&s, &random_family(n, 6, 9)?)?;
    let xi = ParticleConfiguration::new(n, &[(3, 2), (10, 1)])?;
    let matchings = enumerate_perfect_matchings(&xi)?.len();
    let assignments = enumerate_pair_assignments(&xi)?.len();
    let f = f_polynomial(&t, &xi)?;
    let g = g_polynomial(&t, &[0, 1, 2, 3, 4, 5], &xi)?;

    let single = ParticleConfiguration::single_site(n, 7, 3)?;
    let single_site_error = (f_polynomial(&t, &single)? - t.p(7, 7).powi(3)).abs();

    let labels = FourLabels::new(0, 1, 2, 3);
    let g4 = g4_symmetrized(&t, &labels, 4, 9)?;
    let h4_diagonal = h4_fermionic(&t, &labels, 4, 4)?;

    println!("xi = {xi}: {matchings} perfect matchings, M(xi) = {}, {assignments} pair assignments", m_factor(&xi)?);
    println!("f(xi) = {f:.4e}, g(xi) = {g:.4e}");
    println!("f(3@7) - p_77^3 = {single_site_error:.1e}");
    println!("g4(4, 9) = {g4:.4e}, h4(4, 4) = {h4_diagonal}");
    Ok(Report { matchings, assignments, single_site_error, h4_diagonal })
}

#[allow(dead_code)]
fn main() -> eigenmass::Result<()> {
    run_example().map(|_| ())
}
