// Asynchronously modulated ladder: probe and control alternate each half
// period. Side transparency windows appear on a comb set by the period.

use floquet_qi::lineshape::peak_positions_within;
use floquet_qi::model::ThreeLevelParams;
use floquet_qi::scans::{linspace_step, local_maxima, spectrum_three_level, ScanOptions};

pub struct Windows {
    pub tau: f64,
    pub period: f64,
    pub maxima: Vec<f64>,
    pub predicted: Vec<f64>,
}

pub fn run(taus: &[f64], limit: f64) -> floquet_qi::Result<Vec<Windows>> {
    let deltas = linspace_step(-limit, limit, 0.5);
    taus.iter()
        .map(|&tau| {
            let p = ThreeLevelParams::ats_regime(tau);
            let spec = spectrum_three_level(tau, &deltas, &p, &ScanOptions::default())?;
            let rho = spec.rho11();
            Ok(Windows {
                tau,
                period: p.period(),
                maxima: local_maxima(&rho).into_iter().map(|i| deltas[i]).collect(),
                predicted: peak_positions_within(p.period(), p.omega_c, limit),
            })
        })
        .collect()
}

fn main() -> floquet_qi::Result<()> {
    for w in run(&[0.027, 0.1], 120.0)? {
        println!("τ = {} (period {:.4})", w.tau, w.period);
        println!("  maxima    {:?}", w.maxima);
        println!("  predicted {:?}", w.predicted.iter().map(|d| (d * 10.0).round() / 10.0).collect::<Vec<_>>());
    }
    Ok(())
}
