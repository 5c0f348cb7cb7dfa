//! Brute-force validators for every approximation layer: the harmonic
//! expansion (grid eigensolves of the full potentials), the adiabaticity
//! matrix elements (finite differences of H), and the Weisskopf-Wigner
//! reduction (direct integration against a discrete bath).

mod eigensolve;
mod modes;

pub use eigensolve::{
    convergence_order, grid_eigensolve, grid_eigensolve_model, GridEigensolve, GridSpec,
    PotentialModel,
};
pub use modes::{
    discrete_mode_evolution, ModeEvolution, PhotonConservingPulse, ScaledBathConfig,
};

use crate::dynamics::{EmissionKernel, PanelOptions};
use crate::error::CoreError;
use crate::potentials::{
    quadratic_fit, trajectory_scan, GaugeChoice, SystemConfig, TimeGridSpec,
};
use crate::units;

/// Measured anharmonic deviation of the full-potential level spacing from
/// the quadratic-fit ω for the unperturbed trap on the default grid
/// ((E₁−E₀)/ω − 1). First-run regression baseline: the ±1 nm quantum
/// width of the state samples the quartic tail of the two-charge well
/// (first-order perturbation theory puts the 0→1 spacing 3·c₄/γ⁴ ≈ 6.9%
/// above ω; the grid measures 7.10% with the higher orders in).
pub const ANHARMONIC_GAP_DEVIATION: f64 = 7.1006533944e-2;

/// Finite-difference estimate of |⟨0|Ḣ|1⟩| on the grid.
#[derive(Copy, Clone, Debug)]
pub struct HdotEstimate {
    /// |⟨0|Ḣ|1⟩| in eV/ns.
    pub matrix_element_ev_per_ns: f64,
    /// E₁ − E₀ from the same eigensolve, eV.
    pub gap_ev: f64,
}

impl HdotEstimate {
    /// Dimensionless r₀₁ = ħ·|⟨0|Ḣ|1⟩| / (E₁−E₀)².
    pub fn r01(&self) -> f64 {
        units::HBAR_EV_NS * self.matrix_element_ev_per_ns / (self.gap_ev * self.gap_ev)
    }
}

/// Time derivative of the potential on the grid, (V(t+δ) − V(t−δ))/2δ.
///
/// For the exact Lorentz/Coulomb potentials only the cluster term moves,
/// and the difference is evaluated in the cancellation-free form
/// 1/D₊ − 1/D₋ = (D₋²−D₊²)/(D₊D₋(D₊+D₋)) with D₋²−D₊² = 4vδ(x−L); the
/// ~10⁵ eV offset never enters a subtraction. The harmonic-fit model
/// differences its reconstruction directly.
fn potential_rate_on_grid(
    gauge: GaugeChoice,
    cfg: &SystemConfig,
    duration_ns: f64,
    t_ns: f64,
    delta_t_ns: f64,
    xs: &[f64],
    model: PotentialModel,
) -> Result<Vec<f64>, CoreError> {
    match (model, gauge) {
        (PotentialModel::Full, GaugeChoice::Lorentz | GaugeChoice::Coulomb) => {
            let traj = cfg.trajectory(duration_ns);
            let v = traj.v_nm_per_ns;
            let l_now = traj.position_nm(t_ns);
            let ncc = cfg.cluster_count * cfg.cluster_charge_sign * units::coulomb_coupling();
            let asq = match gauge {
                GaugeChoice::Lorentz => (1.0 - cfg.beta * cfg.beta) * cfg.y_nm * cfg.y_nm,
                _ => cfg.y_nm * cfg.y_nm,
            };
            Ok(xs
                .iter()
                .map(|&x| {
                    let up = x - l_now - v * delta_t_ns;
                    let um = x - l_now + v * delta_t_ns;
                    let dp = (up * up + asq).sqrt();
                    let dm = (um * um + asq).sqrt();
                    -2.0 * ncc * v * (x - l_now) / (dp * dm * (dp + dm))
                })
                .collect())
        }
        _ => {
            let hp_p = quadratic_fit(gauge, cfg, duration_ns, t_ns + delta_t_ns, 0.0)?;
            let hp_m = quadratic_fit(gauge, cfg, duration_ns, t_ns - delta_t_ns, 0.0)?;
            Ok(xs
                .iter()
                .map(|&x| {
                    let vp = hp_p.phi0_ev + 0.5 * hp_p.k_ev_per_nm2 * (x - hp_p.x0_nm).powi(2);
                    let vm = hp_m.phi0_ev + 0.5 * hp_m.k_ev_per_nm2 * (x - hp_m.x0_nm).powi(2);
                    (vp - vm) / (2.0 * delta_t_ns)
                })
                .collect())
        }
    }
}

/// Build H(t±δt) on the grid, form the symmetric difference, and sandwich
/// it between the grid eigenvectors of H(t). Fails the halving-consistency
/// check when δt → δt/2 moves the result by more than 1%.
///
/// With `PotentialModel::HarmonicFit` both H and Ḣ are the gauge's model
/// Hamiltonian — the quantity the adiabaticity criterion is defined over;
/// with `Full` the Lorentz/Coulomb sandwich also picks up the real
/// anharmonic corrections of the trap.
pub fn finite_difference_hdot(
    gauge: GaugeChoice,
    cfg: &SystemConfig,
    duration_ns: f64,
    t_ns: f64,
    delta_t_ns: f64,
    spec: &GridSpec,
    model: PotentialModel,
) -> Result<HdotEstimate, CoreError> {
    let sol = grid_eigensolve_model(gauge, cfg, duration_ns, t_ns, spec, 3, model)?;
    let psi0 = &sol.wavefunctions[0];
    let psi1 = &sol.wavefunctions[1];
    let sandwich = |dt: f64| -> Result<f64, CoreError> {
        let rate = potential_rate_on_grid(gauge, cfg, duration_ns, t_ns, dt, &sol.grid, model)?;
        // Constants have no off-diagonal element; subtracting the midpoint
        // value keeps the huge uniform rate from leaking through the
        // finite orthogonality of the numeric eigenvectors.
        let mid = rate[rate.len() / 2];
        let mut s = 0.0;
        for i in 0..rate.len() {
            s += psi0[i] * psi1[i] * (rate[i] - mid);
        }
        Ok((s * sol.h_nm).abs())
    };
    let coarse = sandwich(delta_t_ns)?;
    let fine = sandwich(0.5 * delta_t_ns)?;
    let rel_change = if fine == 0.0 { 0.0 } else { ((coarse - fine) / fine).abs() };
    if rel_change > 0.01 {
        return Err(CoreError::GridTooCoarse { what: "hdot finite difference".into(), rel_change });
    }
    Ok(HdotEstimate { matrix_element_ev_per_ns: fine, gap_ev: sol.gap_ev(0, 1) })
}

/// One row of the oracle residual table.
#[derive(Clone, Debug)]
pub struct OracleCheck {
    pub name: &'static str,
    pub gauge: Option<GaugeChoice>,
    /// Measured value (check-specific meaning, see `detail`).
    pub value: f64,
    /// Bound the value must stay below (absolute).
    pub bound: f64,
    pub pass: bool,
    pub detail: String,
}

impl OracleCheck {
    fn against(
        name: &'static str,
        gauge: Option<GaugeChoice>,
        value: f64,
        bound: f64,
        detail: String,
    ) -> Self {
        Self { name, gauge, value, bound, pass: value <= bound && value.is_finite(), detail }
    }
}

/// Optional slow/extra validations.
#[derive(Copy, Clone, Debug, Default)]
pub struct OracleToggles {
    /// Re-enable the photon-number-conserving transition terms and bound
    /// their effect on |c₁|.
    pub photon_conserving: bool,
}

/// Run every oracle/production consistency bound and return the residual
/// table. Callers decide how to report; `pass` is per-row.
pub fn run_suite(cfg: &SystemConfig, toggles: OracleToggles) -> Result<Vec<OracleCheck>, CoreError> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let duration = cfg.transit_duration_ns().unwrap_or(42.229);
    let t_mid = 0.5 * duration;

    let mut unperturbed = *cfg;
    unperturbed.cluster_count = 0.0;
    let omega0 = cfg.unperturbed_omega_ev();

    // 1. Discretization converges at second order (full potential).
    let order_spec = GridSpec { x_min_nm: -0.95 * cfg.l_nm, x_max_nm: 0.95 * cfg.l_nm, n_points: 501 };
    let order = convergence_order(GaugeChoice::Coulomb, &unperturbed, duration, t_mid, &order_spec)?;
    rows.push(OracleCheck::against(
        "eigensolve_convergence_order",
        Some(GaugeChoice::Coulomb),
        (order - 2.0).abs(),
        0.2,
        format!("observed order {order:.4}"),
    ));

    // 2. Harmonic limit: quadratic potential reproduces ω on the grid
    //    (wide window — the quadratic model has no singularity and the
    //    Dirichlet box must sit below the 1e-8 target).
    let spec = GridSpec::default_for(cfg);
    let harm_spec = GridSpec::harmonic_default(cfg);
    let harm =
        grid_eigensolve(GaugeChoice::Multipolar, &unperturbed, duration, t_mid, &harm_spec, 3)?;
    rows.push(OracleCheck::against(
        "harmonic_gap_vs_omega",
        Some(GaugeChoice::Multipolar),
        (harm.gap_ev(0, 1) / omega0 - 1.0).abs(),
        1e-8,
        format!("grid gap {} eV vs ω {omega0} eV", harm.gap_ev(0, 1)),
    ));

    // 3. Anharmonic deviation of the true well, regression-pinned.
    let full = grid_eigensolve(GaugeChoice::Coulomb, &unperturbed, duration, t_mid, &spec, 3)?;
    let deviation = full.gap_ev(0, 1) / omega0 - 1.0;
    rows.push(OracleCheck::against(
        "anharmonic_gap_regression",
        Some(GaugeChoice::Coulomb),
        (deviation - ANHARMONIC_GAP_DEVIATION).abs(),
        1e-6,
        format!("measured deviation {deviation:.8e}"),
    ));

    // 4. Gauge ordering of the exact-potential gaps at closest approach
    //    agrees with the quadratic fits (Lorentz vs Coulomb; the
    //    multipolar grid potential is the quadratic form itself).
    let gap_l = grid_eigensolve(GaugeChoice::Lorentz, cfg, duration, t_mid, &spec, 3)?.gap_ev(0, 1);
    let gap_c = grid_eigensolve(GaugeChoice::Coulomb, cfg, duration, t_mid, &spec, 3)?.gap_ev(0, 1);
    let fit_l = quadratic_fit(GaugeChoice::Lorentz, cfg, duration, t_mid, 0.0)?.omega_ev;
    let fit_c = quadratic_fit(GaugeChoice::Coulomb, cfg, duration, t_mid, 0.0)?.omega_ev;
    let fit_m = quadratic_fit(GaugeChoice::Multipolar, cfg, duration, t_mid, 0.0)?.omega_ev;
    let ordering_ok = (gap_l - gap_c).signum() == (fit_l - fit_c).signum()
        && fit_l > fit_m
        && fit_m > fit_c;
    let ratio = (gap_l - gap_c) / (fit_l - fit_c);
    rows.push(OracleCheck {
        name: "gauge_gap_ordering",
        gauge: None,
        value: (ratio - 1.0).abs(),
        bound: 1.0,
        pass: ordering_ok && (ratio - 1.0).abs() <= 1.0,
        detail: format!(
            "grid gap(L−C) {:.4e} eV vs fit {:.4e} eV; fit ordering L>M>C {}",
            gap_l - gap_c,
            fit_l - fit_c,
            ordering_ok
        ),
    });

    // 5. Closed-form r01 against the finite-difference matrix element of
    //    the model Hamiltonian at closest approach (peak ẋ₀), per gauge.
    let grid_spec = TimeGridSpec { coarse_points: 801, refine_factor: 50, refine_window_y: 5.0 };
    let tgrid = grid_spec.build(cfg, duration, t_mid)?;
    for gauge in GaugeChoice::ALL {
        let scan = trajectory_scan(gauge, cfg, duration, &tgrid)?;
        let x0dot = scan.x0_spline.deriv(t_mid) / units::SPEED_OF_LIGHT_NM_PER_NS;
        let omega = scan.omega_spline.eval(t_mid);
        let closed = x0dot.abs() * (cfg.electron_mass_ev / (2.0 * omega)).sqrt();
        let fd = finite_difference_hdot(
            gauge,
            cfg,
            duration,
            t_mid,
            1e-3,
            &spec,
            PotentialModel::HarmonicFit,
        )?;
        let r_fd = fd.r01();
        rows.push(OracleCheck::against(
            "r01_closed_form_vs_hdot",
            Some(gauge),
            (closed / r_fd - 1.0).abs(),
            0.01,
            format!("closed {closed:.6e} vs finite-difference {r_fd:.6e}"),
        ));
    }

    // 5b. The same sandwich over the exact potential measures the
    //     anharmonic correction to the matrix element; report it with a
    //     generous ceiling so regressions show up without mistaking real
    //     physics for error.
    let fd_full = finite_difference_hdot(
        GaugeChoice::Coulomb,
        cfg,
        duration,
        t_mid,
        1e-3,
        &spec,
        PotentialModel::Full,
    )?;
    {
        let scan = trajectory_scan(GaugeChoice::Coulomb, cfg, duration, &tgrid)?;
        let x0dot = scan.x0_spline.deriv(t_mid) / units::SPEED_OF_LIGHT_NM_PER_NS;
        let omega = scan.omega_spline.eval(t_mid);
        let closed = x0dot.abs() * (cfg.electron_mass_ev / (2.0 * omega)).sqrt();
        rows.push(OracleCheck::against(
            "r01_anharmonic_deviation",
            Some(GaugeChoice::Coulomb),
            (closed / fd_full.r01() - 1.0).abs(),
            0.3,
            format!("full-potential r01 {:.6e} vs harmonic closed form {closed:.6e}", fd_full.r01()),
        ));
    }

    // 6. Single-mode Rabi flopping at 2|g|.
    let g = 0.05;
    let period = std::f64::consts::PI / g;
    let rabi_cfg = ScaledBathConfig {
        omega0: 10.0,
        n_modes: 1,
        half_width: 0.0,
        gamma_amp: 0.0,
        explicit_g: Some(g),
        t_max: 0.25 * period,
        n_samples: 2,
        rtol: 1e-11,
        atol: 1e-13,
        photon_conserving: None,
    };
    let rabi = discrete_mode_evolution(&rabi_cfg)?;
    let p_quarter = rabi.c1.last().unwrap().norm_sqr();
    rows.push(OracleCheck::against(
        "rabi_quarter_period",
        None,
        (p_quarter / 0.5 - 1.0).abs(),
        0.01,
        format!("|c1|² at T/4 = {p_quarter:.6} (expect 0.5)"),
    ));

    // 7. Dense-bath decay slope against the Markov rate.
    let gamma = 0.01;
    let bath = ScaledBathConfig::dense_bath(gamma, 801, 0.5, 30.0);
    let evo = discrete_mode_evolution(&bath)?;
    let pick = |t_want: f64| {
        let i = evo
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t_want).abs().partial_cmp(&(b.1 - t_want).abs()).unwrap())
            .unwrap()
            .0;
        (evo.times[i], evo.c1[i].norm_sqr())
    };
    let (t1, p1) = pick(5.0);
    let (t2, p2) = pick(25.0);
    let slope = -(p2.ln() - p1.ln()) / (t2 - t1);
    rows.push(OracleCheck::against(
        "decay_slope_vs_markov",
        None,
        (slope / (2.0 * gamma) - 1.0).abs(),
        0.05,
        format!("|c1|² slope {slope:.5e} vs 2Γ = {:.5e}", 2.0 * gamma),
    ));
    rows.push(OracleCheck::against(
        "bath_norm_conservation",
        None,
        evo.norm_drift,
        1e-6,
        format!("total probability drift {:.3e}", evo.norm_drift),
    ));

    // 8. Final mode populations against the Markov line profile.
    let kernel = EmissionKernel::assemble_custom(
        |t| bath.omega0 * t,
        |_| evo.g_per_mode,
        |t| (-gamma * t).exp(),
        |_| gamma,
        0.0,
        bath.omega0,
        bath.t_max,
        PanelOptions { order: 16, budget: 2.0, h_cap_fraction: 1.0 / 24.0 },
    )?;
    let mut worst = 0.0f64;
    for (j, &w) in evo.mode_freqs.iter().enumerate() {
        if (w - bath.omega0).abs() > 3.0 * gamma {
            continue;
        }
        let markov = kernel.mode_amplitude(w).norm_sqr();
        let direct = evo.final_c0k[j].norm_sqr();
        worst = worst.max((direct / markov - 1.0).abs());
    }
    rows.push(OracleCheck::against(
        "mode_profile_vs_markov",
        None,
        worst,
        0.05,
        "pointwise |c0k|² over the central 3 half-widths".into(),
    ));

    // 9. Optional: bound the neglected photon-number-conserving terms.
    if toggles.photon_conserving {
        let r01_scale = 1e-3;
        let mut base_cfg = ScaledBathConfig::dense_bath(gamma, 401, 0.5, 24.0);
        base_cfg.n_samples = 61;
        let base = discrete_mode_evolution(&base_cfg)?;
        base_cfg.photon_conserving = Some(PhotonConservingPulse {
            amplitude: r01_scale * base_cfg.omega0,
            center: 12.0,
            width: 3.0,
        });
        let with = discrete_mode_evolution(&base_cfg)?;
        let mut diff = 0.0f64;
        for (a, b) in base.c1.iter().zip(with.c1.iter()) {
            diff = diff.max((a.norm() - b.norm()).abs());
        }
        rows.push(OracleCheck::against(
            "photon_conserving_bound",
            None,
            diff,
            r01_scale,
            format!("Δ|c1| with ⟨n|ṁ⟩ terms at r01 = {r01_scale}"),
        ));
    }

    Ok(rows)
}
