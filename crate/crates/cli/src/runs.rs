//! Subcommand implementations: deterministic CSV artifacts for the
//! trajectory scans, adiabaticity reports, spectra, background
//! comparisons, oracle suite, and parameter sweeps.

use std::fmt;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use gaugeline_core::dynamics::{
    compare_backgrounds, spectrum, BerryCorrection, SpectrumOptions, SpectrumResult,
};
use gaugeline_core::error::CoreError;
use gaugeline_core::oracle::{grid_eigensolve, run_suite, GridSpec, OracleToggles};
use gaugeline_core::oscillator::adiabaticity_parameter;
use gaugeline_core::potentials::{trajectory_scan, GaugeChoice};
use gaugeline_core::units;

use crate::config::{ConfigError, RunConfig, SweepAxis};
use crate::csvio::{cell, write_csv, write_sidecar};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum CliError {
    Core(CoreError),
    Config(ConfigError),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

fn ensure_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path)
        .map_err(|e| CliError::Io(format!("mkdir {}: {e}", path.display())))
}

fn sidecar_pairs(cfg: &RunConfig, extra: &[(String, String)]) -> Vec<(String, String)> {
    let mut pairs = vec![("code_version".to_string(), CODE_VERSION.to_string())];
    pairs.extend(cfg.echo());
    pairs.extend(extra.iter().cloned());
    pairs
}

fn spectrum_options(cfg: &RunConfig) -> SpectrumOptions {
    let mut opts = SpectrumOptions::default();
    opts.time_grid = cfg.time_grid;
    opts.workers = cfg.workers;
    opts.berry = if cfg.berry_correction {
        BerryCorrection::RealEigenstates
    } else {
        BerryCorrection::Off
    };
    opts
}

/// Scan the harmonic parameters over the transit for every configured
/// gauge; one CSV with a mandatory header, rows gauge-major then time.
pub fn run_trajectory(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    cfg.validate()?;
    ensure_dir(out)?;
    let sys = cfg.system();
    let (t_end, t_mid) = cfg.scan_window_ns()?;
    let grid = cfg.time_grid.build(&sys, t_end, t_mid)?;
    let mut rows = Vec::new();
    for &gauge in &cfg.gauges {
        let scan = trajectory_scan(gauge, &sys, 2.0 * t_mid, &grid)?;
        for hp in &scan.params {
            rows.push(vec![
                cell(hp.t_ns)?,
                gauge.label().to_string(),
                cell(hp.x0_nm)?,
                cell(hp.k_ev_per_nm2)?,
                cell(units::energy_to_angular_frequency(hp.omega_ev))?,
                cell(hp.phi0_ev)?,
            ]);
        }
    }
    write_csv(
        &out.join("trajectory.csv"),
        "t_ns,gauge,x0_nm,k_eV_per_nm2,omega_per_s,phi0_eV",
        rows,
    )?;
    let extra = vec![
        ("scan_window_ns".to_string(), cell(t_end)?),
        ("scan_points".to_string(), grid.len().to_string()),
    ];
    write_sidecar(&out.join("trajectory.meta"), &sidecar_pairs(cfg, &extra))
}

/// r₀₁(t) per gauge over the transit.
pub fn run_adiabaticity(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    cfg.validate()?;
    ensure_dir(out)?;
    let sys = cfg.system();
    let (t_end, t_mid) = cfg.scan_window_ns()?;
    let grid = cfg.time_grid.build(&sys, t_end, t_mid)?;
    let mut rows = Vec::new();
    let mut extra = Vec::new();
    for &gauge in &cfg.gauges {
        let scan = trajectory_scan(gauge, &sys, 2.0 * t_mid, &grid)?;
        let report = adiabaticity_parameter(&scan, sys.electron_mass_ev)?;
        for &(t, r) in &report.samples {
            rows.push(vec![cell(t)?, gauge.label().to_string(), cell(r)?]);
        }
        extra.push((format!("max_r01_{}", gauge.label()), cell(report.max_r01)?));
        extra.push((format!("argmax_t_ns_{}", gauge.label()), cell(report.argmax_t_ns)?));
    }
    write_csv(&out.join("adiabaticity.csv"), "t_ns,gauge,r01", rows)?;
    write_sidecar(&out.join("adiabaticity.meta"), &sidecar_pairs(cfg, &extra))
}

fn write_one_spectrum(
    cfg: &RunConfig,
    out: &Path,
    result: &SpectrumResult,
) -> Result<(), CliError> {
    let stem = format!("spectrum_{}_{}", result.gauge.label(), result.background.label());
    let mut rows = Vec::with_capacity(result.omega_per_s.len());
    for i in 0..result.omega_per_s.len() {
        rows.push(vec![
            cell(result.omega_per_s[i])?,
            cell(result.spectral_density[i])?,
            cell(result.amplitudes[i].re)?,
            cell(result.amplitudes[i].im)?,
        ]);
    }
    write_csv(&out.join(format!("{stem}.csv")), "omega_per_s,S,re_c0k,im_c0k", rows)?;
    let extra = vec![
        ("gauge".to_string(), result.gauge.label().to_string()),
        ("background".to_string(), result.background.label().to_string()),
        ("effective_t_f_ns".to_string(), cell(result.t_f_ns)?),
        ("peak_omega_per_s".to_string(), cell(result.peak_omega_per_s)?),
        ("emitted_probability".to_string(), cell(result.emitted_probability)?),
    ];
    write_sidecar(&out.join(format!("{stem}.meta")), &sidecar_pairs(cfg, &extra))
}

/// Full spectra for every configured (gauge, background), plus the peak
/// table and pairwise peak differences.
pub fn run_spectrum(cfg: &RunConfig, out: &Path) -> Result<Vec<SpectrumResult>, CliError> {
    cfg.validate()?;
    ensure_dir(out)?;
    let sys = cfg.system();
    let t_f = cfg.effective_t_f_ns()?;
    let opts = spectrum_options(cfg);
    let mut results = Vec::new();
    for &background in &cfg.backgrounds {
        for &gauge in &cfg.gauges {
            let s = spectrum(gauge, background, &sys, t_f, &cfg.omega_grid, &opts)?;
            write_one_spectrum(cfg, out, &s)?;
            results.push(s);
        }
    }

    let mut peak_rows = Vec::new();
    for s in &results {
        peak_rows.push(vec![
            s.gauge.label().to_string(),
            s.background.label().to_string(),
            cell(s.peak_omega_per_s)?,
            cell(s.emitted_probability)?,
        ]);
    }
    write_csv(
        &out.join("peaks.csv"),
        "gauge,background,peak_omega_per_s,emitted_probability",
        peak_rows,
    )?;

    let mut diff_rows = Vec::new();
    for &background in &cfg.backgrounds {
        let of = |g: GaugeChoice| {
            results
                .iter()
                .find(|s| s.gauge == g && s.background == background)
                .map(|s| s.peak_omega_per_s)
        };
        for i in 0..cfg.gauges.len() {
            for j in i + 1..cfg.gauges.len() {
                let (a, b) = (cfg.gauges[i], cfg.gauges[j]);
                if let (Some(pa), Some(pb)) = (of(a), of(b)) {
                    diff_rows.push(vec![
                        background.label().to_string(),
                        a.label().to_string(),
                        b.label().to_string(),
                        cell(pa - pb)?,
                    ]);
                }
            }
        }
    }
    write_csv(
        &out.join("peak_diffs.csv"),
        "background,gauge_a,gauge_b,delta_peak_per_s",
        diff_rows,
    )?;
    Ok(results)
}

/// Spectra under both background gauges per external gauge, with the S
/// difference series (the Lamb-type comparison).
pub fn run_compare(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    cfg.validate()?;
    ensure_dir(out)?;
    let sys = cfg.system();
    let t_f = cfg.effective_t_f_ns()?;
    let opts = spectrum_options(cfg);
    let mut extra = Vec::new();
    for &gauge in &cfg.gauges {
        let cmp = compare_backgrounds(gauge, &sys, t_f, &cfg.omega_grid, &opts)?;
        let mut rows = Vec::with_capacity(cmp.s_difference.len());
        for i in 0..cmp.s_difference.len() {
            rows.push(vec![
                cell(cmp.multipolar.omega_per_s[i])?,
                cell(cmp.multipolar.spectral_density[i])?,
                cell(cmp.minimal_coupling.spectral_density[i])?,
                cell(cmp.s_difference[i])?,
            ]);
        }
        write_csv(
            &out.join(format!("compare_{}.csv", gauge.label())),
            "omega_per_s,S_multipolarB,S_minimalB,S_diff",
            rows,
        )?;
        extra.push((
            format!("peak_shift_between_backgrounds_{}", gauge.label()),
            cell(cmp.multipolar.peak_omega_per_s - cmp.minimal_coupling.peak_omega_per_s)?,
        ));
    }
    write_sidecar(&out.join("compare.meta"), &sidecar_pairs(cfg, &extra))
}

/// Oracle residual table + eigenvalue tables; `Ok(true)` when every bound
/// holds.
pub fn run_oracle(cfg: &RunConfig, out: &Path) -> Result<bool, CliError> {
    cfg.validate()?;
    ensure_dir(out)?;
    let sys = cfg.system();
    let toggles = OracleToggles { photon_conserving: cfg.oracle_photon_conserving };
    let rows = run_suite(&sys, toggles)?;
    let mut csv_rows = Vec::new();
    let mut all_pass = true;
    for r in &rows {
        all_pass &= r.pass;
        csv_rows.push(vec![
            r.name.to_string(),
            r.gauge.map(|g| g.label().to_string()).unwrap_or_default(),
            cell(r.value)?,
            cell(r.bound)?,
            if r.pass { "pass" } else { "FAIL" }.to_string(),
            r.detail.replace(',', ";"),
        ]);
    }
    write_csv(
        &out.join("oracle_results.csv"),
        "check,gauge,value,bound,status,detail",
        csv_rows,
    )?;

    // Eigenvalue tables of the exact potentials at closest approach.
    let (_, t_mid) = cfg.scan_window_ns()?;
    let spec = GridSpec::default_for(&sys);
    let mut eig_rows = Vec::new();
    for &gauge in &cfg.gauges {
        let sol = grid_eigensolve(gauge, &sys, 2.0 * t_mid, t_mid, &spec, 3)?;
        for level in 0..3 {
            eig_rows.push(vec![
                gauge.label().to_string(),
                cell(t_mid)?,
                level.to_string(),
                cell(sol.energy_ev(level))?,
                cell(sol.energies_shifted_extrap[level])?,
            ]);
        }
    }
    write_csv(
        &out.join("eigentable.csv"),
        "gauge,t_ns,level,energy_eV,energy_shifted_eV",
        eig_rows,
    )?;
    let extra =
        vec![("oracle_all_pass".to_string(), all_pass.to_string())];
    write_sidecar(&out.join("oracle.meta"), &sidecar_pairs(cfg, &extra))?;
    Ok(all_pass)
}

fn point_label(axes: &[SweepAxis], values: &[f64]) -> String {
    axes.iter()
        .zip(values)
        .map(|(a, v)| format!("{}={}", a.param.key(), cell(*v).unwrap_or_else(|_| "nan".into())))
        .collect::<Vec<_>>()
        .join("_")
}

/// One summary row: (gauge, background, peak, probability, max_r01).
type SweepMetric = (String, String, f64, f64, f64);

struct SweepPointOutcome {
    values: Vec<f64>,
    metrics: Vec<SweepMetric>,
    error: Option<String>,
}

fn run_sweep_point(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<SweepMetric>, CliError> {
    let results = run_spectrum(cfg, out_dir)?;
    let sys = cfg.system();
    let (t_end, t_mid) = cfg.scan_window_ns()?;
    let grid = cfg.time_grid.build(&sys, t_end, t_mid)?;
    let mut max_r01 = std::collections::HashMap::new();
    for &gauge in &cfg.gauges {
        let scan = trajectory_scan(gauge, &sys, 2.0 * t_mid, &grid)?;
        let report = adiabaticity_parameter(&scan, sys.electron_mass_ev)?;
        max_r01.insert(gauge.label(), report.max_r01);
    }
    Ok(results
        .iter()
        .map(|s| {
            (
                s.gauge.label().to_string(),
                s.background.label().to_string(),
                s.peak_omega_per_s,
                s.emitted_probability,
                max_r01[s.gauge.label()],
            )
        })
        .collect())
}

/// Cartesian-product sweep over the configured axes with a bounded worker
/// pool. Per-point artifacts land in `sweep/<point>/`; the summary is
/// sorted by the parameter tuple, so the output is independent of
/// scheduling. Returns `Ok(true)` when every point succeeded.
pub fn run_sweep(cfg: &RunConfig, out: &Path) -> Result<bool, CliError> {
    cfg.validate()?;
    if cfg.sweep.is_empty() {
        return Err(CliError::Config(ConfigError {
            line: None,
            what: "sweep requires at least one sweep_<param> axis".into(),
        }));
    }
    ensure_dir(out)?;

    // Cartesian product in axis order.
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in &cfg.sweep {
        let mut next = Vec::new();
        for base in &points {
            for &v in &axis.values {
                let mut p = base.clone();
                p.push(v);
                next.push(p);
            }
        }
        points = next;
    }

    let outcomes: Mutex<Vec<Option<SweepPointOutcome>>> =
        Mutex::new((0..points.len()).map(|_| None).collect());
    let next_point = AtomicUsize::new(0);
    let workers = cfg.workers.clamp(1, points.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next_point.fetch_add(1, Ordering::Relaxed);
                if i >= points.len() {
                    break;
                }
                let values = &points[i];
                let mut sub = cfg.clone();
                for (axis, &v) in cfg.sweep.iter().zip(values.iter()) {
                    sub = sub.with_sweep_value(axis.param, v);
                }
                // Points already parallelize across the pool; keep each
                // point single-threaded inside.
                sub.workers = 1;
                let label = point_label(&cfg.sweep, values);
                let dir = out.join("sweep").join(&label);
                let outcome = match ensure_dir(&dir)
                    .and_then(|()| run_sweep_point(&sub, &dir))
                {
                    Ok(metrics) => {
                        SweepPointOutcome { values: values.clone(), metrics, error: None }
                    }
                    Err(e) => SweepPointOutcome {
                        values: values.clone(),
                        metrics: Vec::new(),
                        error: Some(e.to_string().replace(',', ";")),
                    },
                };
                outcomes.lock().unwrap()[i] = Some(outcome);
            });
        }
    });

    let mut outcomes: Vec<SweepPointOutcome> =
        outcomes.into_inner().unwrap().into_iter().map(|o| o.unwrap()).collect();
    outcomes.sort_by(|a, b| {
        a.values
            .partial_cmp(&b.values)
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut all_ok = true;
    let mut rows = Vec::new();
    for o in &outcomes {
        let param_cells: Vec<String> =
            o.values.iter().map(|&v| cell(v)).collect::<Result<_, _>>()?;
        if let Some(e) = &o.error {
            all_ok = false;
            let mut row = param_cells.clone();
            row.extend(["".into(), "".into(), "".into(), "".into(), "".into(), e.clone()]);
            rows.push(row);
            continue;
        }
        for (gauge, background, peak, prob, r01) in &o.metrics {
            let mut row = param_cells.clone();
            row.extend([
                gauge.clone(),
                background.clone(),
                cell(*peak)?,
                cell(*prob)?,
                cell(*r01)?,
                String::new(),
            ]);
            rows.push(row);
        }
    }
    let header = cfg
        .sweep
        .iter()
        .map(|a| a.param.key().to_string())
        .chain([
            "gauge".into(),
            "background".into(),
            "peak_omega_per_s".into(),
            "emitted_probability".into(),
            "max_r01".into(),
            "error".into(),
        ])
        .collect::<Vec<_>>()
        .join(",");
    write_csv(&out.join("sweep_summary.csv"), &header, rows)?;
    write_sidecar(
        &out.join("sweep.meta"),
        &sidecar_pairs(cfg, &[("points".to_string(), points.len().to_string())]),
    )?;
    Ok(all_ok)
}
