//! CLI-surface tests: artifact schemas, determinism across worker counts,
//! sweep/direct equivalence, and the binary's argument handling.

use std::path::Path;
use std::process::Command;

use gaugeline_cli::config::parse_config_str;
use gaugeline_cli::runs;

/// Small grids: these tests exercise plumbing, not spectral resolution.
const FAST: &str = "\
time_coarse_points = 501\n\
time_refine_factor = 40\n\
omega_points = 1001\n\
omega_insert_half_window_per_s = 4.7e8\n\
omega_insert_factor = 5\n\
gauge = lorentz,multipolar\n\
";

fn tmpdir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("gaugeline_test_{tag}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn trajectory_csv_schema_and_static_tail() {
    let cfg = parse_config_str(&format!("{FAST}gauge = multipolar\n")).unwrap();
    let dir = tmpdir("traj");
    runs::run_trajectory(&cfg, &dir).unwrap();
    let text = String::from_utf8(read(&dir.join("trajectory.csv"))).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t_ns,gauge,x0_nm,k_eV_per_nm2,omega_per_s,phi0_eV");
    // Far from closest approach the multipolar ω approaches the
    // unperturbed value; the residual at the ±100Y endpoints is the
    // closed-form tail 3(x0/l)² ≈ 1.9e-9.
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[1], "multipolar");
    let omega: f64 = first[4].parse().unwrap();
    let x0: f64 = first[2].parse().unwrap();
    let omega0 = gaugeline_core::units::energy_to_angular_frequency(
        cfg.system().unperturbed_omega_ev(),
    );
    let rel = (omega - omega0) / omega0;
    assert!(rel.abs() < 2e-9, "{omega} vs {omega0}");
    let tail = 3.0 * (x0 / cfg.l_nm).powi(2);
    assert!((rel - tail).abs() < 0.05 * tail, "tail {rel:e} vs closed form {tail:e}");
    // Sidecar carries the effective config.
    let meta = String::from_utf8(read(&dir.join("trajectory.meta"))).unwrap();
    assert!(meta.contains("N=1e12"));
    assert!(meta.contains("code_version="));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn adiabaticity_csv_schema() {
    let cfg = parse_config_str(&format!("{FAST}gauge = coulomb\n")).unwrap();
    let dir = tmpdir("adia");
    runs::run_adiabaticity(&cfg, &dir).unwrap();
    let text = String::from_utf8(read(&dir.join("adiabaticity.csv"))).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t_ns,gauge,r01");
    let meta = String::from_utf8(read(&dir.join("adiabaticity.meta"))).unwrap();
    let max_line = meta.lines().find(|l| l.starts_with("max_r01_coulomb=")).unwrap();
    let max_r01: f64 = max_line.split('=').nth(1).unwrap().parse().unwrap();
    assert!(max_r01 > 1e-7 && max_r01 < 1e-2);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn spectrum_csvs_byte_identical_across_worker_counts() {
    let base = parse_config_str(FAST).unwrap();
    let mut one = base.clone();
    one.workers = 1;
    let mut eight = base;
    eight.workers = 8;
    let dir1 = tmpdir("workers1");
    let dir8 = tmpdir("workers8");
    runs::run_spectrum(&one, &dir1).unwrap();
    runs::run_spectrum(&eight, &dir8).unwrap();
    for name in [
        "spectrum_lorentz_multipolarB.csv",
        "spectrum_multipolar_multipolarB.csv",
        "peaks.csv",
        "peak_diffs.csv",
    ] {
        assert_eq!(read(&dir1.join(name)), read(&dir8.join(name)), "{name} differs");
    }
    let _ = std::fs::remove_dir_all(&dir1);
    let _ = std::fs::remove_dir_all(&dir8);
}

#[test]
fn single_point_sweep_matches_direct_run() {
    let sweep_cfg = parse_config_str(&format!("{FAST}sweep_beta = 0.1\n")).unwrap();
    let dir = tmpdir("sweep");
    assert!(runs::run_sweep(&sweep_cfg, &dir).unwrap());

    let direct_cfg = parse_config_str(&format!("{FAST}beta = 0.1\n")).unwrap();
    let dir_direct = tmpdir("direct");
    runs::run_spectrum(&direct_cfg, &dir_direct).unwrap();

    let point_dir = dir.join("sweep").join("beta=1e-1");
    for name in [
        "spectrum_lorentz_multipolarB.csv",
        "spectrum_multipolar_multipolarB.csv",
        "spectrum_lorentz_multipolarB.meta",
        "peaks.csv",
        "peak_diffs.csv",
    ] {
        assert_eq!(
            read(&point_dir.join(name)),
            read(&dir_direct.join(name)),
            "{name} differs between sweep point and direct run"
        );
    }
    // Summary schema: params, gauge, background, metrics, error column.
    let summary = String::from_utf8(read(&dir.join("sweep_summary.csv"))).unwrap();
    assert_eq!(
        summary.lines().next().unwrap(),
        "beta,gauge,background,peak_omega_per_s,emitted_probability,max_r01,error"
    );
    assert_eq!(summary.lines().count(), 1 + 2);
    let _ = std::fs::remove_dir_all(&dir);
    let _ = std::fs::remove_dir_all(&dir_direct);
}

#[test]
fn sweep_points_sorted_and_n_zero_reproduces_unperturbed() {
    let cfg = parse_config_str(
        "time_coarse_points = 501\ntime_refine_factor = 40\n\
         omega_points = 1001\nomega_insert_half_window_per_s = 4.7e8\nomega_insert_factor = 5\n\
         gauge = multipolar\nsweep_N = 1e12,0\nworkers = 2\n",
    )
    .unwrap();
    let dir = tmpdir("sweepsort");
    assert!(runs::run_sweep(&cfg, &dir).unwrap());
    let summary = String::from_utf8(read(&dir.join("sweep_summary.csv"))).unwrap();
    let rows: Vec<&str> = summary.lines().skip(1).collect();
    // Sorted by parameter value: N = 0 row first despite config order.
    assert!(rows[0].starts_with("0e0,"), "{}", rows[0]);
    assert!(rows[1].starts_with("1e12,"), "{}", rows[1]);
    let peak0: f64 = rows[0].split(',').nth(3).unwrap().parse().unwrap();
    let omega0 = gaugeline_core::units::energy_to_angular_frequency(
        gaugeline_core::potentials::SystemConfig::study_defaults().unperturbed_omega_ev(),
    );
    assert!((peak0 - omega0).abs() < 2e5, "N=0 sweep peak {peak0} vs {omega0}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn binary_smoke_and_flag_handling() {
    let exe = env!("CARGO_BIN_EXE_gaugeline");
    let dir = tmpdir("bin");
    let conf = dir.join("run.conf");
    std::fs::write(&conf, format!("{FAST}gauge = multipolar\n")).unwrap();

    let ok = Command::new(exe)
        .args(["--config", conf.to_str().unwrap(), "--out"])
        .arg(&dir)
        .arg("trajectory")
        .status()
        .unwrap();
    assert!(ok.success());
    assert!(dir.join("trajectory.csv").exists());

    // --seedless is reserved and rejected.
    let seedless = Command::new(exe)
        .args(["--seedless", "trajectory"])
        .output()
        .unwrap();
    assert_eq!(seedless.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&seedless.stderr).contains("deterministic"));

    // Unknown config keys are fatal with a line number.
    let bad = dir.join("bad.conf");
    std::fs::write(&bad, "nonsense = 1\n").unwrap();
    let out = Command::new(exe)
        .args(["--config", bad.to_str().unwrap(), "trajectory"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));

    // GAUGELINE_OUT fallback.
    let env_dir = dir.join("env_out");
    let ok = Command::new(exe)
        .env("GAUGELINE_OUT", &env_dir)
        .args(["--config", conf.to_str().unwrap(), "trajectory"])
        .status()
        .unwrap();
    assert!(ok.success());
    assert!(env_dir.join("trajectory.csv").exists());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn oracle_run_emits_residual_tables() {
    let cfg = parse_config_str("gauge = lorentz,coulomb,multipolar\n").unwrap();
    let dir = tmpdir("oracle");
    let all_pass = runs::run_oracle(&cfg, &dir).unwrap();
    assert!(all_pass, "oracle bounds should hold at the defaults");
    let text = String::from_utf8(read(&dir.join("oracle_results.csv"))).unwrap();
    assert_eq!(text.lines().next().unwrap(), "check,gauge,value,bound,status,detail");
    assert!(text.lines().skip(1).all(|l| l.contains(",pass,")));
    let eig = String::from_utf8(read(&dir.join("eigentable.csv"))).unwrap();
    assert_eq!(eig.lines().next().unwrap(), "gauge,t_ns,level,energy_eV,energy_shifted_eV");
    assert_eq!(eig.lines().count(), 1 + 9);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn compare_gauges_emits_difference_series() {
    let cfg = parse_config_str(
        "time_coarse_points = 501\ntime_refine_factor = 40\n\
         omega_points = 801\nomega_insert_half_window_per_s = 0\nomega_insert_factor = 1\n\
         gauge = multipolar\nworkers = 2\n",
    )
    .unwrap();
    let dir = tmpdir("compare");
    runs::run_compare(&cfg, &dir).unwrap();
    let text = String::from_utf8(read(&dir.join("compare_multipolar.csv"))).unwrap();
    assert_eq!(text.lines().next().unwrap(), "omega_per_s,S_multipolarB,S_minimalB,S_diff");
    // S_diff column is consistent with the two series.
    let row: Vec<f64> = text
        .lines()
        .nth(100)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((row[1] - row[2] - row[3]).abs() <= 1e-18 + 1e-12 * row[1].abs());
    let meta = String::from_utf8(read(&dir.join("compare.meta"))).unwrap();
    assert!(meta.contains("peak_shift_between_backgrounds_multipolar="));
    let _ = std::fs::remove_dir_all(&dir);
}

/// The robust monotone trend over a β sweep is the adiabaticity scale:
/// max r01 grows with the cluster speed. (Peak splittings are fringe
/// positions and hop between fringes as T changes with β, so they are
/// printed but not asserted.)
#[test]
fn sweep_beta_trend() {
    let cfg = parse_config_str(&format!("{FAST}sweep_beta = 0.05,0.1,0.2\nworkers = 2\n")).unwrap();
    let dir = tmpdir("beta_trend");
    assert!(runs::run_sweep(&cfg, &dir).unwrap());
    let summary = String::from_utf8(read(&dir.join("sweep_summary.csv"))).unwrap();
    let mut by_gauge: std::collections::BTreeMap<String, Vec<(f64, f64, f64)>> =
        Default::default();
    for line in summary.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        by_gauge.entry(f[1].to_string()).or_default().push((
            f[0].parse().unwrap(),
            f[3].parse().unwrap(),
            f[5].parse().unwrap(),
        ));
    }
    for (gauge, rows) in &by_gauge {
        assert_eq!(rows.len(), 3, "{gauge}");
        // Rows arrive sorted by β; r01 must grow strictly.
        assert!(rows[0].0 < rows[1].0 && rows[1].0 < rows[2].0);
        assert!(
            rows[0].2 < rows[1].2 && rows[1].2 < rows[2].2,
            "{gauge}: max_r01 not monotone in β: {rows:?}"
        );
        println!(
            "{gauge}: peaks over β = {:?}",
            rows.iter().map(|r| r.1).collect::<Vec<_>>()
        );
    }
    let _ = std::fs::remove_dir_all(&dir);
}

/// A failing sweep point is recorded in the summary's error column and
/// fails the run as a whole, without aborting the other points.
#[test]
fn sweep_records_per_point_failures() {
    // β = 0 without t_f_ns cannot run a spectrum.
    let cfg = parse_config_str(&format!("{FAST}sweep_beta = 0.0,0.1\n")).unwrap();
    let dir = tmpdir("sweepfail");
    assert!(!runs::run_sweep(&cfg, &dir).unwrap(), "run should report failure");
    let summary = String::from_utf8(read(&dir.join("sweep_summary.csv"))).unwrap();
    let rows: Vec<&str> = summary.lines().skip(1).collect();
    assert!(rows[0].starts_with("0e0,"));
    assert!(rows[0].contains("t_f_ns is required"), "{}", rows[0]);
    // The healthy point still produced its rows.
    assert_eq!(rows.len(), 1 + 2);
    assert!(rows[1].ends_with(','), "healthy rows carry an empty error column: {}", rows[1]);
    let _ = std::fs::remove_dir_all(&dir);
}
