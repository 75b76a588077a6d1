//! Parameter grids, spectra and RWA comparisons, evaluated in parallel.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{LabFrameParams, ThreeLevelParams, TwoLevelParams};
use crate::propagation::{
    build_monodromy_at, evolve_stroboscopic, integrate_lab_frame, steady_observables, FloquetSystem, Observables,
    SamplePhase, StroboscopicTrace,
};
use crate::quantum::DensityMatrix;
use crate::{Error, Result, THREADS_ENV};

/// `P[dBm] = 10·log10(C·Ωp²)`.
pub const DBM_CALIBRATION: f64 = 1.38e-4;

pub fn dbm_from_rabi(omega_p: f64) -> Result<f64> {
    if !(omega_p > 0.0 && omega_p.is_finite()) {
        return Err(Error::Domain(format!("Ωp = {omega_p} must be positive")));
    }
    Ok(10.0 * (DBM_CALIBRATION * omega_p * omega_p).log10())
}

pub fn rabi_from_dbm(p: f64) -> f64 {
    (10f64.powf(p / 10.0) / DBM_CALIBRATION).sqrt()
}

/// Worker count: the request (or all cores), capped by `FLOQUET_QI_THREADS`.
pub fn worker_count(requested: Option<usize>) -> usize {
    let avail = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let mut n = requested.unwrap_or(avail).max(1);
    if let Some(cap) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if cap >= 1 {
            n = n.min(cap);
        }
    }
    n
}

/// Ordered parallel map over `0..n`.
pub fn par_map<T, F>(n: usize, threads: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let workers = worker_count(threads);
    if workers == 1 {
        return (0..n).map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
        Err(_) => (0..n).map(f).collect(),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ScanOptions {
    pub phase: SamplePhase,
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: &str, values: Vec<f64>) -> Self {
        Self { name: name.to_string(), values }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub i: usize,
    pub j: usize,
    pub message: String,
}

/// Values over `axis1 × axis2`, stored with `axis1` outermost. Failed cells
/// hold NaN and are listed in `errors`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanGrid {
    pub axis1: Axis,
    pub axis2: Axis,
    pub observable: String,
    pub values: Vec<f64>,
    pub errors: Vec<CellError>,
}

impl ScanGrid {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axis2.values.len() + j]
    }

    /// Values along axis 1 at fixed index `j` of axis 2.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.axis1.values.len()).map(|i| self.get(i, j)).collect()
    }

    /// `(axis1, axis2, value)` rows in storage order.
    pub fn long_form(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n2 = self.axis2.values.len();
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (self.axis1.values[k / n2], self.axis2.values[k % n2], v))
    }
}

fn grid_scan<F>(axis1: Axis, axis2: Axis, observable: &str, threads: Option<usize>, cell: F) -> Result<ScanGrid>
where
    F: Fn(f64, f64) -> Result<f64> + Sync + Send,
{
    if axis1.values.is_empty() || axis2.values.is_empty() {
        return Err(Error::Validation("scan grids must be nonempty".into()));
    }
    let n2 = axis2.values.len();
    let out = par_map(axis1.values.len() * n2, threads, |k| cell(axis1.values[k / n2], axis2.values[k % n2]));
    let mut values = Vec::with_capacity(out.len());
    let mut errors = Vec::new();
    for (k, r) in out.into_iter().enumerate() {
        match r.and_then(|v| crate::error::ensure_finite(v, observable)) {
            Ok(v) => values.push(v),
            Err(e) => {
                values.push(f64::NAN);
                errors.push(CellError { i: k / n2, j: k % n2, message: e.to_string() });
            }
        }
    }
    Ok(ScanGrid { axis1, axis2, observable: observable.to_string(), values, errors })
}

/// Steady `ρ11` over detuning × probe power (dBm) at fixed τ. `base` supplies
/// the rates and period convention.
pub fn scan_two_level(
    deltas: &[f64],
    powers_dbm: &[f64],
    tau: f64,
    base: &TwoLevelParams,
    opts: &ScanOptions,
) -> Result<ScanGrid> {
    let template = TwoLevelParams { tau, ..*base };
    template.validate()?;
    grid_scan(
        Axis::new("delta", deltas.to_vec()),
        Axis::new("power_dbm", powers_dbm.to_vec()),
        "rho11",
        opts.threads,
        |d, p| {
            let sys = TwoLevelParams { detuning: d, omega_p: rabi_from_dbm(p), ..template };
            Ok(steady_observables(&sys, opts.phase)?.rho11)
        },
    )
}

/// Steady `ρ11` over detuning × τ for the asynchronously modulated three-level
/// system.
pub fn scan_three_level_tau(
    deltas: &[f64],
    taus: &[f64],
    base: &ThreeLevelParams,
    opts: &ScanOptions,
) -> Result<ScanGrid> {
    base.validate()?;
    if taus.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::Validation("every τ must be positive".into()));
    }
    grid_scan(
        Axis::new("delta", deltas.to_vec()),
        Axis::new("tau", taus.to_vec()),
        "rho11",
        opts.threads,
        |d, t| {
            let sys = ThreeLevelParams { detuning: d, tau: t, ..*base };
            Ok(steady_observables(&sys, opts.phase)?.rho11)
        },
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub delta: f64,
    pub rho11: f64,
    pub im_rho10: f64,
}

/// Stroboscopic steady-state observables along a detuning grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub params: ThreeLevelParams,
    pub phase: SamplePhase,
    pub points: Vec<SpectrumPoint>,
}

impl Spectrum {
    pub fn deltas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.delta).collect()
    }

    pub fn rho11(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.rho11).collect()
    }

    pub fn im_rho10(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.im_rho10).collect()
    }
}

fn check_increasing(deltas: &[f64]) -> Result<()> {
    if deltas.is_empty() {
        return Err(Error::Validation("detuning grid is empty".into()));
    }
    if deltas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Validation("detuning grid must be strictly increasing".into()));
    }
    Ok(())
}

fn spectrum_points<S, F>(deltas: &[f64], opts: &ScanOptions, make: F) -> Result<Vec<SpectrumPoint>>
where
    S: FloquetSystem,
    F: Fn(f64) -> S + Sync + Send,
{
    check_increasing(deltas)?;
    par_map(deltas.len(), opts.threads, |i| {
        let d = deltas[i];
        let Observables { rho11, im_rho10 } = steady_observables(&make(d), opts.phase)?;
        Ok(SpectrumPoint { delta: d, rho11, im_rho10 })
    })
    .into_iter()
    .collect()
}

/// Three-level spectrum at the given τ (overrides `params.tau`).
pub fn spectrum_three_level(
    tau: f64,
    deltas: &[f64],
    params: &ThreeLevelParams,
    opts: &ScanOptions,
) -> Result<Spectrum> {
    let base = ThreeLevelParams { tau, ..*params };
    base.validate()?;
    let points = spectrum_points(deltas, opts, |d| base.with_detuning(d))?;
    Ok(Spectrum { params: base, phase: opts.phase, points })
}

pub fn spectrum_two_level(deltas: &[f64], params: &TwoLevelParams, opts: &ScanOptions) -> Result<Vec<SpectrumPoint>> {
    params.validate()?;
    spectrum_points(deltas, opts, |d| params.with_detuning(d))
}

/// Steady observables along a list of probe amplitudes.
pub fn sweep_rabi_two_level(omegas: &[f64], params: &TwoLevelParams, opts: &ScanOptions) -> Result<Vec<Observables>> {
    params.validate()?;
    par_map(omegas.len(), opts.threads, |i| {
        steady_observables(&TwoLevelParams { omega_p: omegas[i], ..*params }, opts.phase)
    })
    .into_iter()
    .collect()
}

#[derive(Clone, Debug)]
pub struct RwaComparison {
    pub exact: StroboscopicTrace,
    pub rwa: StroboscopicTrace,
    pub max_deviation: f64,
}

/// Lab-frame integration against the rotating-wave monodromy evolution, both
/// from the ground state and sampled at period ends.
pub fn rwa_comparison(lab: &LabFrameParams, n_periods: usize, reltol: f64) -> Result<RwaComparison> {
    let ground = DensityMatrix::ground(2);
    let period = lab.base.period();
    let exact = integrate_lab_frame(lab, &ground, n_periods as f64 * period, reltol)?;
    let e = build_monodromy_at(&lab.base, SamplePhase::PeriodEnd)?;
    let rwa = evolve_stroboscopic(&e, &ground, n_periods)?;
    let max_deviation = exact
        .rho11()
        .iter()
        .zip(rwa.rho11())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(RwaComparison { exact, rwa, max_deviation })
}

/// Interior local maxima (strict on both sides) of `ys`, as indices.
pub fn local_maxima(ys: &[f64]) -> Vec<usize> {
    (1..ys.len().saturating_sub(1)).filter(|&i| ys[i] > ys[i - 1] && ys[i] > ys[i + 1]).collect()
}

pub fn local_minima(ys: &[f64]) -> Vec<usize> {
    (1..ys.len().saturating_sub(1)).filter(|&i| ys[i] < ys[i - 1] && ys[i] < ys[i + 1]).collect()
}

/// `start, start + step, …` up to `stop` inclusive, computed by index.
pub fn linspace_step(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dbm_calibration_points() {
        assert!((dbm_from_rabi(1.0).unwrap() + 38.6).abs() < 0.05);
        assert!((dbm_from_rabi(20.0).unwrap() + 12.6).abs() < 0.05);
        assert!(matches!(dbm_from_rabi(0.0), Err(Error::Domain(_))));
        assert!(dbm_from_rabi(-1.0).is_err());
    }

    #[test]
    fn grids() {
        let g = linspace_step(-1.0, 1.0, 0.1);
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], -1.0);
        assert!((g[20] - 1.0).abs() < 1e-15);
        let l = logspace(1e-3, 1.0, 4);
        assert_eq!(l.len(), 4);
        assert!((l[1] - 1e-2).abs() < 1e-15 && (l[3] - 1.0).abs() < 1e-15);
        assert_eq!(logspace(0.5, 2.0, 1), vec![0.5]);
        assert_eq!(local_maxima(&[0.0, 1.0, 1.0, 0.0, 2.0, 0.0]), vec![4]);
        assert_eq!(local_minima(&[1.0, 0.0, 1.0]), vec![1]);
        assert_eq!(worker_count(Some(0)), 1);
    }

    #[test]
    fn scan_layout() {
        let base = TwoLevelParams::standard(0.0, 1.0, 0.05);
        let ds = [-1.0, 0.0, 1.0];
        let ps = [-40.0, -20.0];
        let g = scan_two_level(&ds, &ps, 0.05, &base, &ScanOptions::default()).unwrap();
        assert!(g.errors.is_empty());
        let rows: Vec<_> = g.long_form().collect();
        assert_eq!(rows.len(), 6);
        assert_eq!((rows[1].0, rows[1].1), (-1.0, -20.0));
        assert_eq!((rows[2].0, rows[2].1), (0.0, -40.0));
        for (d, p, v) in rows {
            let sys = TwoLevelParams { detuning: d, omega_p: rabi_from_dbm(p), ..base };
            assert_eq!(v, steady_observables(&sys, SamplePhase::default()).unwrap().rho11);
        }
        assert_eq!(g.column(1), vec![g.get(0, 1), g.get(1, 1), g.get(2, 1)]);
        assert!(scan_two_level(&[], &ps, 0.05, &base, &ScanOptions::default()).is_err());
        assert!(scan_three_level_tau(&ds, &[0.1, 0.0], &ThreeLevelParams::ats_regime(0.1), &ScanOptions::default()).is_err());
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let base = ThreeLevelParams::ats_regime(0.05);
        let ds = linspace_step(-30.0, 30.0, 1.5);
        let taus = [0.01, 0.05, 0.3];
        let one = scan_three_level_tau(&ds, &taus, &base, &ScanOptions { threads: Some(1), ..Default::default() }).unwrap();
        let four = scan_three_level_tau(&ds, &taus, &base, &ScanOptions { threads: Some(4), ..Default::default() }).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn spectra_are_even_in_detuning() {
        let ds = linspace_step(-25.0, 25.0, 0.5);
        for phase in [SamplePhase::AfterProbe, SamplePhase::PeriodEnd] {
            let opts = ScanOptions { phase, threads: None };
            let two = spectrum_two_level(&ds, &TwoLevelParams::standard(0.0, 3.0, 0.05), &opts).unwrap();
            let three = spectrum_three_level(0.1, &ds, &ThreeLevelParams::ats_regime(0.1), &opts).unwrap().points;
            for pts in [two, three] {
                let n = pts.len();
                for i in 0..n {
                    let (a, b) = (pts[i], pts[n - 1 - i]);
                    assert!((a.rho11 - b.rho11).abs() < 1e-6 && (a.im_rho10 - b.im_rho10).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn dark_control_reduces_to_two_levels() {
        let ds = linspace_step(-30.0, 30.0, 2.5);
        let three = ThreeLevelParams { omega_c: 0.0, omega_p: 2.0, ..ThreeLevelParams::ats_regime(0.05) };
        let two = TwoLevelParams::new(0.0, 2.0, 0.05, three.gamma10, three.gamma1_phi).unwrap();
        let a = spectrum_three_level(0.05, &ds, &three, &ScanOptions::default()).unwrap();
        let b = spectrum_two_level(&ds, &two, &ScanOptions::default()).unwrap();
        for (x, y) in a.points.iter().zip(&b) {
            assert!((x.rho11 - y.rho11).abs() < 1e-9 && (x.im_rho10 - y.im_rho10).abs() < 1e-9);
        }
    }

    #[test]
    fn no_probe_no_signal() {
        let ds = linspace_step(-10.0, 10.0, 1.0);
        let p = ThreeLevelParams { omega_p: 0.0, ..ThreeLevelParams::ats_regime(0.05) };
        let s = spectrum_three_level(0.05, &ds, &p, &ScanOptions::default()).unwrap();
        assert!(s.points.iter().all(|q| q.rho11.abs() < 1e-14 && q.im_rho10.abs() < 1e-14));
        assert_eq!(s.deltas(), ds);
    }

    #[test]
    fn detuning_grid_must_increase() {
        let p = TwoLevelParams::standard(0.0, 1.0, 0.05);
        assert!(spectrum_two_level(&[0.0, 0.0], &p, &ScanOptions::default()).is_err());
        assert!(spectrum_two_level(&[], &p, &ScanOptions::default()).is_err());
    }

    #[test]
    fn cdt_minima_in_the_rabi_sweep() {
        let ops = linspace_step(20.0, 100.0, 0.5);
        let r = sweep_rabi_two_level(&ops, &TwoLevelParams::standard(0.0, 1.0, 0.05), &ScanOptions::default()).unwrap();
        let ys: Vec<f64> = r.iter().map(|o| o.rho11).collect();
        let mins: Vec<f64> = local_minima(&ys).into_iter().map(|i| ops[i]).collect();
        assert!(mins.iter().any(|m| (m - 40.0).abs() <= 1.0), "{mins:?}");
        assert!(mins.iter().any(|m| (m - 80.0).abs() <= 1.0), "{mins:?}");
    }

    proptest! {
        #[test]
        fn dbm_roundtrip(x in 1e-3..1e4f64) {
            let back = rabi_from_dbm(dbm_from_rabi(x).unwrap());
            prop_assert!((back - x).abs() <= 1e-12 * x);
        }
    }
}
