// Steady excitation ρ11 of the square-wave driven two-level system over
// detuning × probe power (dBm), printed as long-form CSV.
//
//   cargo run --release --example two_level_lotus > lotus.csv

use floquet_qi::model::TwoLevelParams;
use floquet_qi::scans::{linspace_step, scan_two_level, ScanGrid, ScanOptions};

pub fn run(delta_step: f64, power_step: f64) -> floquet_qi::Result<ScanGrid> {
    let base = TwoLevelParams::standard(0.0, 1.0, 0.05);
    let deltas = linspace_step(-100.0, 100.0, delta_step);
    let powers = linspace_step(-45.0, 0.0, power_step);
    scan_two_level(&deltas, &powers, base.tau, &base, &ScanOptions::default())
}

fn main() -> floquet_qi::Result<()> {
    let grid = run(2.0, 1.0)?;
    println!("delta,power_dbm,rho11");
    for (d, p, r) in grid.long_form() {
        println!("{d},{p},{r:.6}");
    }
    eprintln!(
        "{} cells, {} failed",
        grid.values.len(),
        grid.errors.len()
    );
    Ok(())
}
