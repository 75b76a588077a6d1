// Coherent destruction of tunneling: on resonance the steady population
// dips wherever the drive amplitude hits 2nω.

use floquet_qi::analytic::cdt_locus;
use floquet_qi::model::TwoLevelParams;
use floquet_qi::scans::{linspace_step, local_minima, sweep_rabi_two_level, ScanOptions};

pub struct Minimum {
    pub found: f64,
    pub rho11: f64,
    pub predicted: Option<f64>,
}

pub fn run() -> floquet_qi::Result<Vec<Minimum>> {
    let p = TwoLevelParams::standard(0.0, 1.0, 0.05);
    let omegas = linspace_step(10.0, 130.0, 0.25);
    let obs = sweep_rabi_two_level(&omegas, &p, &ScanOptions::default())?;
    let rho: Vec<f64> = obs.iter().map(|o| o.rho11).collect();
    let w = p.omega();
    Ok(local_minima(&rho)
        .into_iter()
        .map(|i| {
            // nearest 2nω
            let n = ((omegas[i] / (2.0 * w)).round() as u32).max(1);
            Minimum { found: omegas[i], rho11: rho[i], predicted: cdt_locus(w, n, 0.0) }
        })
        .collect())
}

fn main() -> floquet_qi::Result<()> {
    println!("{:>8} {:>10} {:>10}", "Ωp", "ρ11", "2nω");
    for m in run()? {
        println!("{:>8.2} {:>10.5} {:>10.2}", m.found, m.rho11, m.predicted.unwrap_or(f64::NAN));
    }
    Ok(())
}
