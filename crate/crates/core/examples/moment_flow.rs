//! Compares the diffusion generator applied to moment observables with the
//! right-hand sides of their flows on a random frame.

use eigenmass::flowlab::{generator_flow_residual, random_instance, FlowObservable, DEFAULT_STEP};
use eigenmass::matchings::{FourLabels, ParticleConfiguration};

pub struct Report {
    pub pair_assignment: f64,
    pub four_point: f64,
    pub fermionic: f64,
    pub matching_ratio: f64,
}

pub fn run_example() -> eigenmass::Result<Report> {
    let n = 10;
    let (s, f) = random_instance(n, 4, 21)?;
    let config = ParticleConfiguration::new(n, &[(2, 1), (6, 1)])?;
    let labels = FourLabels::new(0, 2, 1, 3);
    let observables = [
        FlowObservable::GPairs { config: config.clone(), labels: vec![0, 1, 2, 3] },
        FlowObservable::G4 { labels, j: 2, k: 6 },
        FlowObservable::H4 { labels, j: 2, k: 6 },
        FlowObservable::FMatching { config },
    ];
    let mut out = Vec::new();
    for o in &observables {
        let r = generator_flow_residual(o, &s, &f, DEFAULT_STEP)?;
        println!("{:<12} L F = {:+.6e}  RHS = {:+.6e}  relative {:.1e}", o.kind().name(), r.generator, r.rhs, r.relative);
        out.push(r);
    }
    let matching_ratio = out[3].generator / out[3].rhs;
    println!("matching observable: L f / RHS = {matching_ratio:.6}");
    Ok(Report { pair_assignment: out[0].relative, four_point: out[1].relative, fermionic: out[2].relative, matching_ratio })
}

#[allow(dead_code)]
fn main() -> eigenmass::Result<()> {
    run_example().map(|_| ())
}
