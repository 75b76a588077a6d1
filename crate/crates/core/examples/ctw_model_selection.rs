// Central transparency window: fit the simulated Im ρ10 to the interference
// (QI) and two-Lorentzian (ATS) lineshapes and weigh them by AIC.

use floquet_qi::fitting::{aic_weights, fit_model, AicWeights, FitResult, FitWindow, Model};
use floquet_qi::model::ThreeLevelParams;
use floquet_qi::scans::{spectrum_three_level, ScanOptions};

pub struct Selection {
    pub tau: f64,
    pub qi: FitResult,
    pub ats: FitResult,
    pub weights: AicWeights,
}

pub fn run(regime: ThreeLevelParams, taus: &[f64]) -> floquet_qi::Result<Vec<Selection>> {
    taus.iter()
        .map(|&tau| {
            let window = FitWindow::default_for(tau);
            let spec = spectrum_three_level(tau, &window.grid(), &regime, &ScanOptions::default())?;
            let qi = fit_model(&spec, Model::Qi, &window, None)?;
            let ats = fit_model(&spec, Model::Ats, &window, None)?;
            let weights = aic_weights(&qi, &ats)?;
            Ok(Selection { tau, qi, ats, weights })
        })
        .collect()
}

fn main() -> floquet_qi::Result<()> {
    let fmt = |v: Vec<f64>| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
    for (name, regime) in [("ATS", ThreeLevelParams::ats_regime(0.05)), ("EIT", ThreeLevelParams::eit_regime(0.05))] {
        println!("{name} regime");
        for s in run(regime, &[0.001, 0.05, 0.1, 0.15])? {
            println!(
                "  τ={:<6} QI ({}) ATS ({}) w_QI={:.3}",
                s.tau,
                fmt(s.qi.params.to_vec()),
                fmt(s.ats.params.to_vec()),
                s.weights.w_qi
            );
        }
    }
    Ok(())
}
