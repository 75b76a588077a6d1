//! Command-line front end: `scan`, `spectrum`, `fit`, `rwa`, `analytic` and `repro`.
//!
//! Every run is described by a flat [`RunConfig`]: `key = value` lines in a
//! file given with `--config`, overridden by the matching `--key` flags.
//! Outputs carry the fully resolved configuration as a provenance block
//! (a `<out>.provenance` sidecar for CSV, a `"provenance"` object in JSON),
//! which reads back with `--config`.
//!
//! Exit codes: 0 ok, 1 failed reference checks, 2 configuration or I/O,
//! 3 refusing to overwrite, 4 fit did not converge, 5 numerical failure.

use std::collections::BTreeMap;
use std::fmt::{self, Display};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::analytic::{
    bessel_j_orders, cdt_locus, fourier_components, omega_comb, resonant_steady, weak_drive_rho11, BesselSumConfig,
    Sidebands,
};
use crate::fitting::{aic_weights, fit_model, FitResult, FitWindow, Model};
use crate::lineshape::{
    ats_absorption, dressed_first_order, gamma_lambda, peak_positions_within, qi_absorption, AtsParams, QiParams,
};
use crate::model::{LabFrameParams, Modulation, PeriodConvention, ThreeLevelParams, TwoLevelParams};
use crate::propagation::SamplePhase;
use crate::scans::{
    linspace_step, logspace, rwa_comparison, scan_three_level_tau, scan_two_level, spectrum_three_level,
    spectrum_two_level, ScanGrid, ScanOptions, SpectrumPoint,
};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECKS_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CLOBBER: i32 = 3;
pub const EXIT_FIT: i32 = 4;
pub const EXIT_NUMERIC: i32 = 5;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Clobber(PathBuf),
    Fit(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Clobber(_) => EXIT_CLOBBER,
            Self::Fit(_) => EXIT_FIT,
            Self::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::Clobber(p) => write!(f, "{} exists; pass --force to overwrite", p.display()),
            Self::Fit(m) => write!(f, "fit failed: {m}"),
            Self::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Validation(_) | Error::Dimension(_) | Error::Domain(_) | Error::Range(_) => Self::Config(e.to_string()),
            Error::Fit { .. } => Self::Fit(e.to_string()),
            _ => Self::Numeric(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

macro_rules! keyword_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident = $text:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq)]
        pub enum $name { $($variant),+ }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok(Self::$variant),)+
                    _ => Err(format!("'{s}' is not one of: {}", [$($text),+].join(", "))),
                }
            }
        }

        impl Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $text),+ })
            }
        }
    };
}

keyword_enum!(SystemKind { TwoLevel = "two-level", ThreeLevel = "three-level", LabFrame = "lab-frame" });
keyword_enum!(
    /// Rate and coupling preset for three-level runs.
    Regime { Ats = "ats", Eit = "eit" }
);
keyword_enum!(Format { Csv = "csv", Json = "json" });
keyword_enum!(AnalyticOp {
    ResonantSteady = "resonant-steady",
    WeakDrive = "weak-drive",
    Bessel = "bessel",
    OmegaN = "omega-n",
    Cdt = "cdt",
    Qi = "qi",
    Ats = "ats",
    Dressed = "dressed",
    Peaks = "peaks",
    Fourier = "fourier",
});

/// Value types that can sit in a config file.
trait ConfigValue: Sized {
    fn parse_value(s: &str) -> Result<Self, String>;
    fn render(&self) -> String;
}

macro_rules! config_value_via_fromstr {
    ($($t:ty),*) => {$(
        impl ConfigValue for $t {
            fn parse_value(s: &str) -> Result<Self, String> {
                s.parse::<$t>().map_err(|e| e.to_string())
            }
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

config_value_via_fromstr!(
    f64, usize, i64, bool, String, SystemKind, Regime, Format, AnalyticOp, PeriodConvention, SamplePhase, Modulation
);

macro_rules! run_config {
    ($( $(#[doc = $doc:literal])* $field:ident : $ty:ty ),* $(,)?) => {
        /// Flat run description. Unset keys fall back to per-command defaults;
        /// [`RunConfig::resolve`] fills them in for provenance.
        #[derive(Clone, Debug, Default, PartialEq)]
        pub struct RunConfig {
            $( $(#[doc = $doc])* pub $field: Option<$ty>, )*
        }

        /// Every config key as a `--kebab-case` flag.
        #[derive(Args, Clone, Debug, Default)]
        pub struct ConfigFlags {
            $( $(#[doc = $doc])* #[arg(long, allow_negative_numbers = true)] pub $field: Option<$ty>, )*
        }

        impl RunConfig {
            pub const KEYS: &'static [&'static str] = &[$(stringify!($field)),*];

            pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
                match key {
                    $( stringify!($field) => {
                        self.$field = Some(<$ty as ConfigValue>::parse_value(value)
                            .map_err(|e| CliError::Config(format!("key '{key}': {e}")))?);
                    } )*
                    _ => return Err(CliError::Config(format!("unknown key '{key}'"))),
                }
                Ok(())
            }

            pub fn overlay(&mut self, flags: &ConfigFlags) {
                $( if let Some(v) = &flags.$field { self.$field = Some(v.clone()); } )*
            }

            /// Set keys as `(key, value)` pairs in declaration order.
            pub fn pairs(&self) -> Vec<(&'static str, String)> {
                let mut out = Vec::new();
                $( if let Some(v) = &self.$field { out.push((stringify!($field), v.render())); } )*
                out
            }
        }
    };
}

run_config! {
    /// two-level | three-level | lab-frame
    system: SystemKind,
    /// three-level preset: ats (γ21=1.4, γ1φ=0.4, γ2φ=0.2, Ωc=10.8) | eit (γ21=0.1, γ1φ=3, γ2φ=0, Ωc=3.55)
    regime: Regime,
    /// modulation parameter τ (ω = 1/τ)
    tau: f64,
    /// probe detuning Δ for single-point runs
    delta: f64,
    /// probe Rabi frequency Ωp
    omega_p: f64,
    /// control Rabi frequency Ωc
    omega_c: f64,
    /// decay rate |1⟩→|0⟩ (sets the unit of all rates)
    gamma10: f64,
    /// decay rate |2⟩→|1⟩
    gamma21: f64,
    /// pure dephasing of |1⟩
    gamma1_phi: f64,
    /// pure dephasing of |2⟩
    gamma2_phi: f64,
    /// detuning grid start
    delta_min: f64,
    /// detuning grid end (also the peak search limit)
    delta_max: f64,
    /// detuning grid step
    delta_step: f64,
    /// probe power grid start in dBm
    power_min: f64,
    /// probe power grid end in dBm
    power_max: f64,
    /// probe power grid step in dBm
    power_step: f64,
    /// τ grid for three-level scans (log-spaced)
    tau_min: f64,
    /// largest τ of the three-level scan
    tau_max: f64,
    /// number of τ values
    tau_points: usize,
    /// fit window half-width
    window: f64,
    /// fit window spacing
    window_step: f64,
    /// carrier frequency ωp for lab-frame runs
    carrier: f64,
    /// number of modulation periods for rwa
    n_periods: usize,
    /// relative tolerance of the lab-frame integrator
    reltol: f64,
    /// angular (period 2πτ) | literal (period τ)
    convention: PeriodConvention,
    /// after-probe | period-end
    sample_phase: SamplePhase,
    /// asynchronous | constant
    modulation: Modulation,
    /// include both ±ωn sideband teeth in the weak-drive sum
    symmetrize: bool,
    /// number of harmonic factors in the Bessel product
    q_max: usize,
    /// sideband cutoff of the weak-drive sum
    n_max: usize,
    /// analytic quantity to evaluate
    op: AnalyticOp,
    /// Bessel argument
    x: f64,
    /// largest Bessel order
    order: usize,
    /// number of harmonics / comb teeth / CDT orders
    harmonics: usize,
    /// csv | json
    format: Format,
    /// output path (stdout when absent)
    out: String,
    /// worker threads (capped by FLOQUET_QI_THREADS)
    threads: usize,
}

impl RunConfig {
    /// Parse `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(|e| io_err(path, e))?)
    }

    pub fn to_text(&self) -> String {
        self.pairs().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    fn require<T: Clone>(v: &Option<T>, key: &str) -> CliResult<T> {
        v.clone().ok_or_else(|| CliError::Config(format!("missing required key '{key}'")))
    }

    fn convention(&self) -> PeriodConvention {
        self.convention.unwrap_or_default()
    }

    fn phase(&self) -> SamplePhase {
        self.sample_phase.unwrap_or_default()
    }

    fn scan_options(&self) -> ScanOptions {
        ScanOptions { phase: self.phase(), threads: self.threads }
    }

    pub fn two_level(&self) -> CliResult<TwoLevelParams> {
        let p = TwoLevelParams {
            detuning: self.delta.unwrap_or(0.0),
            omega_p: self.omega_p.unwrap_or(1.0),
            tau: Self::require(&self.tau, "tau")?,
            gamma10: self.gamma10.unwrap_or(1.0),
            gamma1_phi: self.gamma1_phi.unwrap_or(0.4),
            convention: self.convention(),
            modulation: self.modulation.unwrap_or_default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn three_level(&self, tau: f64) -> CliResult<ThreeLevelParams> {
        let base = match self.regime.unwrap_or(Regime::Ats) {
            Regime::Ats => ThreeLevelParams::ats_regime(tau),
            Regime::Eit => ThreeLevelParams::eit_regime(tau),
        };
        let p = ThreeLevelParams {
            detuning: self.delta.unwrap_or(0.0),
            omega_p: self.omega_p.unwrap_or(base.omega_p),
            omega_c: self.omega_c.unwrap_or(base.omega_c),
            tau,
            gamma10: self.gamma10.unwrap_or(base.gamma10),
            gamma21: self.gamma21.unwrap_or(base.gamma21),
            gamma1_phi: self.gamma1_phi.unwrap_or(base.gamma1_phi),
            gamma2_phi: self.gamma2_phi.unwrap_or(base.gamma2_phi),
            convention: self.convention(),
            modulation: self.modulation.unwrap_or_default(),
        };
        p.validate()?;
        Ok(p)
    }

    fn delta_grid(&self, default_step: f64) -> CliResult<Vec<f64>> {
        let (lo, hi) = (self.delta_min.unwrap_or(-300.0), self.delta_max.unwrap_or(300.0));
        let step = self.delta_step.unwrap_or(default_step);
        grid(lo, hi, step, "delta")
    }

    fn fit_window(&self, tau: f64) -> CliResult<FitWindow> {
        let d = FitWindow::default_for(tau);
        let half = self.window.unwrap_or(d.delta_max);
        let w = FitWindow::symmetric(half, self.window_step.unwrap_or(d.spacing));
        w.validate(tau)?;
        Ok(w)
    }

    fn bessel_config(&self) -> CliResult<BesselSumConfig> {
        let cfg = BesselSumConfig { q_max: self.q_max.unwrap_or(BesselSumConfig::default().q_max), ..Default::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Copy of `self` with every value the command used written out
    /// explicitly, so that the provenance block does not depend on defaults.
    pub fn resolve(&self, cmd: Command) -> CliResult<RunConfig> {
        let mut r = self.clone();
        r.convention = Some(self.convention());
        r.sample_phase = Some(self.phase());
        r.modulation = Some(self.modulation.unwrap_or_default());
        r.format.get_or_insert(Format::Csv);
        let system = match cmd {
            Command::Fit => SystemKind::ThreeLevel,
            Command::Rwa => SystemKind::LabFrame,
            Command::Analytic => self.system.unwrap_or(SystemKind::TwoLevel),
            _ => Self::require(&self.system, "system")?,
        };
        r.system = Some(system);
        let fill_two = |r: &mut RunConfig, p: &TwoLevelParams| {
            r.delta = Some(p.detuning);
            r.omega_p = Some(p.omega_p);
            r.gamma10 = Some(p.gamma10);
            r.gamma1_phi = Some(p.gamma1_phi);
        };
        let fill_three = |r: &mut RunConfig, p: &ThreeLevelParams| {
            r.regime.get_or_insert(Regime::Ats);
            r.delta = Some(p.detuning);
            r.omega_p = Some(p.omega_p);
            r.omega_c = Some(p.omega_c);
            r.gamma10 = Some(p.gamma10);
            r.gamma21 = Some(p.gamma21);
            r.gamma1_phi = Some(p.gamma1_phi);
            r.gamma2_phi = Some(p.gamma2_phi);
        };
        match (cmd, system) {
            (Command::Scan, SystemKind::TwoLevel) => {
                fill_two(&mut r, &self.two_level()?);
                r.delta_min.get_or_insert(-300.0);
                r.delta_max.get_or_insert(300.0);
                r.delta_step.get_or_insert(2.0);
                r.power_min.get_or_insert(-45.0);
                r.power_max.get_or_insert(0.0);
                r.power_step.get_or_insert(0.5);
            }
            (Command::Scan, SystemKind::ThreeLevel) => {
                fill_three(&mut r, &self.three_level(0.05)?);
                r.tau = None;
                r.delta_min.get_or_insert(-300.0);
                r.delta_max.get_or_insert(300.0);
                r.delta_step.get_or_insert(1.0);
                r.tau_min.get_or_insert(0.02);
                r.tau_max.get_or_insert(0.8);
                r.tau_points.get_or_insert(100);
            }
            (Command::Spectrum, SystemKind::TwoLevel) => {
                fill_two(&mut r, &self.two_level()?);
                r.delta_min.get_or_insert(-80.0);
                r.delta_max.get_or_insert(80.0);
                r.delta_step.get_or_insert(0.5);
            }
            (Command::Spectrum, SystemKind::ThreeLevel) => {
                let tau = Self::require(&self.tau, "tau")?;
                fill_three(&mut r, &self.three_level(tau)?);
                r.delta_min.get_or_insert(-300.0);
                r.delta_max.get_or_insert(300.0);
                r.delta_step.get_or_insert(1.0);
            }
            (Command::Fit, _) => {
                let tau = Self::require(&self.tau, "tau")?;
                fill_three(&mut r, &self.three_level(tau)?);
                let w = self.fit_window(tau)?;
                r.window = Some(w.delta_max);
                r.window_step = Some(w.spacing);
                r.format = Some(Format::Json);
            }
            (Command::Rwa, _) => {
                let p = self.two_level()?;
                fill_two(&mut r, &p);
                r.carrier.get_or_insert(6000.0);
                r.n_periods.get_or_insert((10.0 / p.period()).ceil() as usize);
                r.reltol.get_or_insert(1e-9);
            }
            (Command::Analytic, _) => {
                let op = Self::require(&self.op, "op")?;
                match op {
                    AnalyticOp::ResonantSteady | AnalyticOp::WeakDrive | AnalyticOp::OmegaN | AnalyticOp::Fourier => {
                        fill_two(&mut r, &self.two_level()?);
                        r.q_max.get_or_insert(BesselSumConfig::default().q_max);
                        r.n_max.get_or_insert(2000);
                        r.symmetrize.get_or_insert(true);
                        r.harmonics.get_or_insert(10);
                    }
                    AnalyticOp::Qi | AnalyticOp::Ats | AnalyticOp::Dressed | AnalyticOp::Peaks => {
                        let tau = self.tau.unwrap_or(0.05);
                        r.tau = Some(tau);
                        r.system = Some(SystemKind::ThreeLevel);
                        fill_three(&mut r, &self.three_level(tau)?);
                    }
                    AnalyticOp::Bessel => {
                        r.x.get_or_insert(1.0);
                        r.order.get_or_insert(10);
                    }
                    AnalyticOp::Cdt => {
                        Self::require(&self.tau, "tau")?;
                        r.delta.get_or_insert(0.0);
                        r.harmonics.get_or_insert(10);
                    }
                }
                if matches!(op, AnalyticOp::WeakDrive | AnalyticOp::Qi | AnalyticOp::Ats | AnalyticOp::Dressed) {
                    r.delta_min.get_or_insert(-20.0);
                    r.delta_max.get_or_insert(20.0);
                    r.delta_step.get_or_insert(0.05);
                }
                if op == AnalyticOp::Peaks {
                    r.delta_max.get_or_insert(300.0);
                }
            }
            (cmd, system) => {
                return Err(CliError::Config(format!("system '{system}' is not supported by {cmd}")));
            }
        }
        Ok(r)
    }
}

fn grid(lo: f64, hi: f64, step: f64, what: &str) -> CliResult<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step > 0.0 && hi >= lo) {
        return Err(CliError::Config(format!("bad {what} grid [{lo}, {hi}] step {step}")));
    }
    Ok(linspace_step(lo, hi, step))
}

#[derive(Parser, Debug)]
#[command(name = "floquet-qi", version, about = "Square-wave modulated two- and three-level open systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// flat key = value file; flags override its entries
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// overwrite an existing output file
    #[arg(long)]
    pub force: bool,
    #[command(flatten)]
    pub keys: ConfigFlags,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// ρ11 over detuning × probe power (two-level) or detuning × τ (three-level)
    Scan(Common),
    /// steady-state (Δ, ρ11, Im ρ10) over a detuning grid
    Spectrum(Common),
    /// QI and ATS fits of a three-level Im ρ10 spectrum with AIC weights
    Fit(Common),
    /// lab-frame integration against the rotating-wave evolution
    Rwa(Common),
    /// closed-form quantities (see --op)
    Analytic(Common),
    /// run the numbered reference checks and report PASS/FAIL
    Repro {
        /// run a single check (1–13)
        #[arg(long)]
        criterion: Option<u8>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Scan,
    Spectrum,
    Fit,
    Rwa,
    Analytic,
}

impl Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Scan => "scan",
            Self::Spectrum => "spectrum",
            Self::Fit => "fit",
            Self::Rwa => "rwa",
            Self::Analytic => "analytic",
        })
    }
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (cmd, common) = match cli.command {
        Cmd::Repro { criterion, threads } => return cmd_repro(criterion, threads),
        Cmd::Scan(c) => (Command::Scan, c),
        Cmd::Spectrum(c) => (Command::Spectrum, c),
        Cmd::Fit(c) => (Command::Fit, c),
        Cmd::Rwa(c) => (Command::Rwa, c),
        Cmd::Analytic(c) => (Command::Analytic, c),
    };
    match dispatch(cmd, &common) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("floquet-qi {cmd}: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, common: &Common) -> CliResult<()> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.overlay(&common.keys);
    let cfg = cfg.resolve(cmd)?;
    let sink = Sink::new(cfg.out.as_deref().map(PathBuf::from), common.force)?;
    match cmd {
        Command::Scan => cmd_scan(&cfg, &sink),
        Command::Spectrum => cmd_spectrum(&cfg, &sink),
        Command::Fit => cmd_fit(&cfg, &sink),
        Command::Rwa => cmd_rwa(&cfg, &sink),
        Command::Analytic => cmd_analytic(&cfg, &sink),
    }
}

/// 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Output destination; refuses to overwrite unless forced.
pub struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(path: Option<PathBuf>, force: bool) -> CliResult<Self> {
        if let Some(p) = &path {
            if p.exists() && !force {
                return Err(CliError::Clobber(p.clone()));
            }
        }
        Ok(Self { path })
    }

    fn sidecar(&self, ext: &str) -> Option<PathBuf> {
        self.path.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(format!(".{ext}"));
            PathBuf::from(s)
        })
    }

    fn write(&self, body: &str) -> CliResult<()> {
        match &self.path {
            Some(p) => std::fs::write(p, body).map_err(|e| io_err(p, e)),
            None => std::io::stdout().write_all(body.as_bytes()).map_err(|e| CliError::Config(e.to_string())),
        }
    }

    fn write_csv(&self, cfg: &RunConfig, cmd: Command, body: &str) -> CliResult<()> {
        self.write(body)?;
        let prov = format!("# floquet-qi {cmd} {}\n{}", env!("CARGO_PKG_VERSION"), cfg.to_text());
        match self.sidecar("provenance") {
            Some(p) => std::fs::write(&p, prov).map_err(|e| io_err(&p, e)),
            None => {
                eprint!("{prov}");
                Ok(())
            }
        }
    }

    fn write_json(&self, cfg: &RunConfig, cmd: Command, mut v: Value) -> CliResult<()> {
        let prov: serde_json::Map<String, Value> =
            cfg.pairs().into_iter().map(|(k, s)| (k.to_string(), Value::String(s))).collect();
        v["provenance"] = Value::Object(prov);
        v["command"] = Value::String(cmd.to_string());
        let mut s = String::new();
        write_json_value(&mut s, &v, 0);
        s.push('\n');
        self.write(&s)
    }

    fn write_cell_errors(&self, grid: &ScanGrid) -> CliResult<()> {
        if grid.errors.is_empty() {
            return Ok(());
        }
        let mut log = String::from("i,j,error\n");
        for e in &grid.errors {
            log.push_str(&format!("{},{},{}\n", e.i, e.j, e.message.replace(['\n', ','], " ")));
        }
        log::warn!("{} grid cells failed and are written as NaN", grid.errors.len());
        match self.sidecar("log") {
            Some(p) => std::fs::write(&p, log).map_err(|e| io_err(&p, e)),
            None => {
                eprint!("{log}");
                Ok(())
            }
        }
    }
}

/// Provenance of JSON outputs, read back into a config.
pub fn config_from_json(v: &Value) -> CliResult<RunConfig> {
    let obj = v
        .get("provenance")
        .and_then(Value::as_object)
        .ok_or_else(|| CliError::Config("no provenance object".into()))?;
    let mut cfg = RunConfig::default();
    for (k, s) in obj {
        cfg.set(k, s.as_str().ok_or_else(|| CliError::Config(format!("provenance '{k}' is not a string")))?)?;
    }
    Ok(cfg)
}

/// Pretty JSON with floats at 17 significant digits.
fn write_json_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            out.push_str(&fmt_float(x));
        }
        Value::Array(xs) if xs.is_empty() => out.push_str("[]"),
        Value::Array(xs) => {
            out.push_str("[\n");
            for (i, x) in xs.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json_value(out, x, indent + 1);
                out.push_str(if i + 1 < xs.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_json_value(out, x, indent + 1);
                out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// JSON has no NaN; non-finite values become null.
fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn csv_rows<const N: usize>(header: &str, rows: impl IntoIterator<Item = [f64; N]>) -> String {
    let mut s = format!("{header}\n");
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_float(x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn cmd_scan(cfg: &RunConfig, sink: &Sink) -> CliResult<()> {
    let opts = cfg.scan_options();
    let deltas = cfg.delta_grid(1.0)?;
    let g = match cfg.system {
        Some(SystemKind::TwoLevel) => {
            let p = cfg.two_level()?;
            let powers =
                grid(cfg.power_min.unwrap_or(-45.0), cfg.power_max.unwrap_or(0.0), cfg.power_step.unwrap_or(0.5), "power")?;
            scan_two_level(&deltas, &powers, p.tau, &p, &opts)?
        }
        Some(SystemKind::ThreeLevel) => {
            let n = cfg.tau_points.unwrap_or(100);
            let (lo, hi) = (cfg.tau_min.unwrap_or(0.02), cfg.tau_max.unwrap_or(0.8));
            if !(lo > 0.0 && hi >= lo && n >= 1) {
                return Err(CliError::Config(format!("bad tau grid [{lo}, {hi}] with {n} points")));
            }
            let p = cfg.three_level(lo)?;
            scan_three_level_tau(&deltas, &logspace(lo, hi, n), &p, &opts)?
        }
        other => return Err(CliError::Config(format!("scan needs system two-level or three-level, got {other:?}"))),
    };
    let header = format!("{},{},{}", g.axis1.name, g.axis2.name, g.observable);
    let rows = g.long_form().map(|(a, b, v)| [a, b, v]);
    let body = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_rows(&header, rows),
        Format::Json => {
            let v = json!({
                "axis1": { "name": g.axis1.name, "values": g.axis1.values.iter().map(|&x| num(x)).collect::<Vec<_>>() },
                "axis2": { "name": g.axis2.name, "values": g.axis2.values.iter().map(|&x| num(x)).collect::<Vec<_>>() },
                "observable": g.observable,
                "values": g.values.iter().map(|&x| num(x)).collect::<Vec<_>>(),
            });
            sink.write_cell_errors(&g)?;
            return sink.write_json(cfg, Command::Scan, v);
        }
    };
    sink.write_cell_errors(&g)?;
    sink.write_csv(cfg, Command::Scan, &body)
}

fn spectrum_points(cfg: &RunConfig) -> CliResult<Vec<SpectrumPoint>> {
    let deltas = cfg.delta_grid(1.0)?;
    let opts = cfg.scan_options();
    Ok(match cfg.system {
        Some(SystemKind::TwoLevel) => spectrum_two_level(&deltas, &cfg.two_level()?, &opts)?,
        Some(SystemKind::ThreeLevel) => {
            let tau = RunConfig::require(&cfg.tau, "tau")?;
            spectrum_three_level(tau, &deltas, &cfg.three_level(tau)?, &opts)?.points
        }
        other => return Err(CliError::Config(format!("spectrum needs system two-level or three-level, got {other:?}"))),
    })
}

pub fn cmd_spectrum(cfg: &RunConfig, sink: &Sink) -> CliResult<()> {
    let pts = spectrum_points(cfg)?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => sink.write_csv(
            cfg,
            Command::Spectrum,
            &csv_rows("delta,rho11,im_rho10", pts.iter().map(|p| [p.delta, p.rho11, p.im_rho10])),
        ),
        Format::Json => sink.write_json(
            cfg,
            Command::Spectrum,
            json!({ "points": pts.iter().map(|p| json!({"delta": num(p.delta), "rho11": num(p.rho11), "im_rho10": num(p.im_rho10)})).collect::<Vec<_>>() }),
        ),
    }
}

fn fit_json(r: &FitResult) -> Value {
    let mut v = serde_json::to_value(r).unwrap_or(Value::Null);
    if let Some(obj) = v.as_object_mut() {
        for key in ["rss", "aic_per_point"] {
            if let Some(x) = obj.get(key).and_then(Value::as_f64) {
                obj.insert(key.into(), num(x));
            }
        }
    }
    v
}

pub fn cmd_fit(cfg: &RunConfig, sink: &Sink) -> CliResult<()> {
    let tau = RunConfig::require(&cfg.tau, "tau")?;
    let p = cfg.three_level(tau)?;
    let window = cfg.fit_window(tau)?;
    let spec = spectrum_three_level(tau, &window.grid(), &p, &cfg.scan_options())?;
    let mut failure = None;
    let mut fit = |model| match fit_model(&spec, model, &window, None) {
        Ok(r) => Ok(r),
        Err(Error::Fit { iterations, best }) => {
            failure = Some(format!("{} fit did not converge in {iterations} iterations", model.name()));
            Ok(*best)
        }
        Err(e) => Err(CliError::from(e)),
    };
    let qi = fit(Model::Qi)?;
    let ats = fit(Model::Ats)?;
    let w = aic_weights(&qi, &ats)?;
    let v = json!({
        "qi": fit_json(&qi),
        "ats": fit_json(&ats),
        "weights": { "w_qi": num(w.w_qi), "w_ats": num(w.w_ats) },
        "converged": failure.is_none(),
    });
    sink.write_json(cfg, Command::Fit, v)?;
    match failure {
        Some(m) => Err(CliError::Fit(m)),
        None => Ok(()),
    }
}

pub fn cmd_rwa(cfg: &RunConfig, sink: &Sink) -> CliResult<()> {
    let lab = LabFrameParams::new(cfg.carrier.unwrap_or(6000.0), cfg.two_level()?)?;
    let n = cfg.n_periods.unwrap_or(1);
    let cmp = rwa_comparison(&lab, n, cfg.reltol.unwrap_or(1e-9))?;
    log::info!("max |ρ11 exact − RWA| = {:e}", cmp.max_deviation);
    let (ex, rw) = (cmp.exact.rho11(), cmp.rwa.rho11());
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => sink.write_csv(
            cfg,
            Command::Rwa,
            &csv_rows("t,rho11_exact,rho11_rwa", cmp.exact.times.iter().zip(ex.iter().zip(&rw)).map(|(&t, (&a, &b))| [t, a, b])),
        ),
        Format::Json => sink.write_json(
            cfg,
            Command::Rwa,
            json!({
                "t": cmp.exact.times.iter().map(|&x| num(x)).collect::<Vec<_>>(),
                "rho11_exact": ex.iter().map(|&x| num(x)).collect::<Vec<_>>(),
                "rho11_rwa": rw.iter().map(|&x| num(x)).collect::<Vec<_>>(),
                "max_deviation": num(cmp.max_deviation),
            }),
        ),
    }
}

pub fn cmd_analytic(cfg: &RunConfig, sink: &Sink) -> CliResult<()> {
    let op = RunConfig::require(&cfg.op, "op")?;
    let deltas = || grid(cfg.delta_min.unwrap_or(-20.0), cfg.delta_max.unwrap_or(20.0), cfg.delta_step.unwrap_or(0.05), "delta");
    let harmonics = cfg.harmonics.unwrap_or(10);
    let (header, rows): (&str, Vec<Vec<f64>>) = match op {
        AnalyticOp::ResonantSteady => {
            let p = cfg.two_level()?;
            let r = resonant_steady(p.omega_p, &p, &cfg.bessel_config()?)?;
            ("rho11,im_rho10", vec![vec![r.rho11, r.im_rho10]])
        }
        AnalyticOp::WeakDrive => {
            let p = cfg.two_level()?;
            let sb = if cfg.symmetrize.unwrap_or(true) { Sidebands::Symmetric } else { Sidebands::OneSided };
            let n_max = cfg.n_max.unwrap_or(2000);
            ("delta,rho11", deltas()?.into_iter().map(|d| vec![d, weak_drive_rho11(d, &p, n_max, sb)]).collect())
        }
        AnalyticOp::Bessel => {
            let x = cfg.x.unwrap_or(1.0);
            let js = bessel_j_orders(cfg.order.unwrap_or(10), x)?;
            ("k,j", js.into_iter().enumerate().map(|(k, j)| vec![k as f64, j]).collect())
        }
        AnalyticOp::OmegaN => {
            let p = cfg.two_level()?;
            let comb = omega_comb(p.omega_p, p.omega(), &cfg.bessel_config()?)?;
            let h = harmonics as i64;
            ("n,omega_n", (-h..=h).map(|n| vec![n as f64, comb.get(n)]).collect())
        }
        AnalyticOp::Cdt => {
            let tau = RunConfig::require(&cfg.tau, "tau")?;
            let d = cfg.delta.unwrap_or(0.0);
            let rows = (1..=harmonics as u32)
                .filter_map(|n| cdt_locus(1.0 / tau, n, d).map(|op| vec![n as f64, op]))
                .collect();
            ("n,omega_p", rows)
        }
        AnalyticOp::Qi | AnalyticOp::Ats => {
            let p = cfg.three_level(cfg.tau.unwrap_or(0.05))?;
            let (g, l) = gamma_lambda(&p);
            let rows = if op == AnalyticOp::Qi {
                let q = QiParams::new(p.omega_c, p.omega_p, g, l)?;
                deltas()?.into_iter().map(|d| Ok(vec![d, qi_absorption(d, &q)?.value])).collect::<crate::Result<_>>()?
            } else {
                let a = AtsParams::new(p.omega_c, p.omega_p, g)?;
                deltas()?.into_iter().map(|d| vec![d, ats_absorption(d, &a)]).collect()
            };
            ("delta,absorption", rows)
        }
        AnalyticOp::Dressed => {
            let p = cfg.three_level(cfg.tau.unwrap_or(0.05))?;
            let rows = deltas()?
                .into_iter()
                .map(|d| Ok(vec![d, dressed_first_order(d, &p)?.im_rho10]))
                .collect::<crate::Result<_>>()?;
            ("delta,im_rho10", rows)
        }
        AnalyticOp::Peaks => {
            let p = cfg.three_level(cfg.tau.unwrap_or(0.05))?;
            let limit = cfg.delta_max.unwrap_or(300.0);
            ("delta", peak_positions_within(p.period(), p.omega_c, limit).into_iter().map(|d| vec![d]).collect())
        }
        AnalyticOp::Fourier => {
            let p = cfg.two_level()?;
            let f = fourier_components(p.omega_p, p.omega(), harmonics);
            let mut rows = vec![vec![0.0, f.dc, 0.0]];
            rows.extend(f.harmonics.iter().enumerate().map(|(i, h)| vec![(i + 1) as f64, h.amplitude, h.frequency]));
            ("n,amplitude,frequency", rows)
        }
    };
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = format!("{header}\n");
            for r in &rows {
                s.push_str(&r.iter().map(|&x| fmt_float(x)).collect::<Vec<_>>().join(","));
                s.push('\n');
            }
            sink.write_csv(cfg, Command::Analytic, &s)
        }
        Format::Json => {
            let cols: Vec<&str> = header.split(',').collect();
            let mut obj = BTreeMap::new();
            for (c, name) in cols.iter().enumerate() {
                obj.insert(name.to_string(), Value::Array(rows.iter().map(|r| num(r[c])).collect()));
            }
            sink.write_json(cfg, Command::Analytic, json!({ "op": op.to_string(), "columns": obj }))
        }
    }
}

pub fn cmd_repro(criterion: Option<u8>, threads: Option<usize>) -> i32 {
    let ids: Vec<u8> = match criterion {
        Some(id) if (1..=13).contains(&id) => vec![id],
        Some(id) => {
            eprintln!("floquet-qi repro: no criterion {id} (1–13)");
            return EXIT_CONFIG;
        }
        None => crate::repro::CRITERIA.iter().map(|c| c.0).collect(),
    };
    let mut all = true;
    for id in ids {
        let o = crate::repro::run(id, threads);
        println!("{}", o.summary_line());
        for d in &o.details {
            println!("{d}");
        }
        all &= o.passed;
    }
    if all {
        EXIT_OK
    } else {
        EXIT_CHECKS_FAILED
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;
    use proptest::prelude::*;

    fn config_msg<T: fmt::Debug>(r: CliResult<T>) -> String {
        match r {
            Err(CliError::Config(m)) => m,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn parses_flat_files() {
        let cfg = RunConfig::parse("# two-level run\nsystem = two-level\n\n tau=0.05 # angular\ndelta_min = -10\n").unwrap();
        assert_eq!(cfg.system, Some(SystemKind::TwoLevel));
        assert_eq!(cfg.tau, Some(0.05));
        assert_eq!(cfg.delta_min, Some(-10.0));
        assert!(cfg.omega_p.is_none());
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(config_msg(RunConfig::parse("colour = red")).contains("'colour'"));
        assert!(config_msg(RunConfig::parse("tau = fast")).contains("'tau'"));
        assert!(config_msg(RunConfig::parse("system = four-level")).contains("'system'"));
        assert!(config_msg(RunConfig::parse("tau 0.05")).contains("line 1"));
    }

    #[test]
    fn missing_key_is_named() {
        assert!(config_msg(RunConfig::default().two_level()).contains("'tau'"));
        assert!(config_msg(RunConfig::default().resolve(Command::Scan)).contains("'system'"));
    }

    #[test]
    fn flags_override_the_file() {
        let mut cfg = RunConfig::parse("tau = 0.05\nomega_p = 2").unwrap();
        let flags = ConfigFlags { tau: Some(0.1), ..Default::default() };
        cfg.overlay(&flags);
        assert_eq!((cfg.tau, cfg.omega_p), (Some(0.1), Some(2.0)));
    }

    #[test]
    fn resolved_config_roundtrips_and_is_stable() {
        let cfg = RunConfig::parse("system = two-level\ntau = 0.05").unwrap();
        let r = cfg.resolve(Command::Scan).unwrap();
        assert_eq!(r.resolve(Command::Scan).unwrap(), r);
        assert_eq!(RunConfig::parse(&r.to_text()).unwrap(), r);
        assert_eq!(r.sample_phase, Some(SamplePhase::AfterProbe));
        assert_eq!(r.convention, Some(PeriodConvention::Angular));
    }

    #[test]
    fn every_key_is_a_flag() {
        let cmd = Cli::command();
        let scan = cmd.find_subcommand("scan").unwrap();
        let longs: Vec<String> = scan.get_arguments().filter_map(|a| a.get_long().map(str::to_string)).collect();
        for k in RunConfig::KEYS {
            assert!(longs.contains(&k.replace('_', "-")), "--{k}");
        }
        for extra in ["config", "force"] {
            assert!(longs.iter().any(|l| l == extra));
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(Error::Validation("x".into())).exit_code(), EXIT_CONFIG);
        assert_eq!(CliError::from(Error::Range("x".into())).exit_code(), EXIT_CONFIG);
        assert_eq!(CliError::from(Error::Singular("x".into())).exit_code(), EXIT_NUMERIC);
        assert_eq!(CliError::from(Error::Stiffness { t: 1.0 }).exit_code(), EXIT_NUMERIC);
        assert_eq!(CliError::Clobber(PathBuf::from("a")).exit_code(), EXIT_CLOBBER);
        assert_eq!(CliError::Fit(String::new()).exit_code(), EXIT_FIT);
    }

    #[test]
    fn json_floats_keep_seventeen_digits() {
        let v = json!({"a": 0.1, "b": [1.0 / 3.0, -2.5e-300], "c": "s", "d": 3, "e": null});
        let mut s = String::new();
        write_json_value(&mut s, &v, 0);
        assert!(s.contains("1.0000000000000001e-1"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"][0].as_f64(), Some(1.0 / 3.0));
        assert_eq!(back["b"][1].as_f64(), Some(-2.5e-300));
        assert_eq!(back["d"], json!(3));
    }

    #[test]
    fn json_provenance_reads_back() {
        let cfg = RunConfig::parse("system = three-level\ntau = 0.05\nregime = eit\nwindow = 3.5").unwrap();
        let prov: serde_json::Map<String, Value> =
            cfg.pairs().into_iter().map(|(k, s)| (k.to_string(), Value::String(s))).collect();
        let v = json!({ "provenance": prov });
        assert_eq!(config_from_json(&v).unwrap(), cfg);
        assert!(config_from_json(&json!({})).is_err());
    }

    proptest! {
        #[test]
        fn float_text_is_exact(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            prop_assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
            let mut cfg = RunConfig::default();
            cfg.set("omega_c", &ConfigValue::render(&x)).unwrap();
            prop_assert_eq!(cfg.omega_c, Some(x));
        }
    }
}
