// Weak drive: the square wave's odd harmonics put a comb of sidebands at
// Δ = ±(2n−1)ω. Compares the Lindblad spectrum with the Lorentzian sum.

use floquet_qi::analytic::{weak_drive_rho11, Sidebands};
use floquet_qi::model::TwoLevelParams;
use floquet_qi::scans::{linspace_step, local_maxima, spectrum_two_level, ScanOptions};

pub struct Peak {
    pub delta: f64,
    pub lindblad: f64,
    pub lorentzian: f64,
}

pub fn run() -> floquet_qi::Result<Vec<Peak>> {
    let p = TwoLevelParams::standard(0.0, 1.0, 0.05);
    let deltas = linspace_step(-110.0, 110.0, 0.5);
    let pts = spectrum_two_level(&deltas, &p, &ScanOptions::default())?;
    let rho: Vec<f64> = pts.iter().map(|q| q.rho11).collect();
    Ok(local_maxima(&rho)
        .into_iter()
        .map(|i| Peak {
            delta: deltas[i],
            lindblad: rho[i],
            lorentzian: weak_drive_rho11(deltas[i], &p, 500, Sidebands::Symmetric),
        })
        .collect())
}

fn main() -> floquet_qi::Result<()> {
    println!("{:>8} {:>10} {:>10}", "Δ", "Lindblad", "sum");
    for pk in run()? {
        println!("{:>8.1} {:>10.5} {:>10.5}", pk.delta, pk.lindblad, pk.lorentzian);
    }
    Ok(())
}
