//! Weisskopf-Wigner decay of the excited instantaneous state and the
//! transient emission spectrum per gauge.
//!
//! The excited amplitude obeys ċ₁ = −Γ_G(t)·c₁ with
//! Γ_G(t) = Δ_G(t)²·|g(Δ_G(t), t)|²/(4π) (Markov reduction with the
//! half-delta convention), so c₁(t) = exp(−∫Γ) is real and positive. Each
//! photon-mode amplitude accumulates as
//!
//!   c₀ₖ(t_f) = −i ∫₀^{t_f} g*(ω_k, t)·c₁(t)·e^{i[ω_k t − ∫₀ᵗ Δ ds]} dt,
//!
//! evaluated with a phase-referenced envelope: the integrand is written as
//! (slow envelope)·e^{i(ω_k−ω_ref)t} and handed to the Filon panels, so a
//! single envelope sampling serves the whole spectral grid. The spectrum
//! is S(ω, t_f) = ω²|c₀ₖ(t_f)|²/(2π)² under the reduced photon measure
//! ∫d³k → 2π∫ω²dω (which also pins θ_k = π/2, making the exp(i k·x₀)
//! coupling phase unity).

use num_complex::Complex64;

use crate::error::{ensure_finite, CoreError};
use crate::filon::PanelSet;
use crate::potentials::{GaugeChoice, SystemConfig, TimeGridSpec, TrajectoryScan};
use crate::spline::CubicSpline;
use crate::units;

/// Gauge of the background (vacuum) field. The Lorentz and Coulomb
/// background choices coincide for physical-photon emission at leading
/// order, so one `MinimalCoupling` variant covers both.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum BackgroundGaugeChoice {
    Multipolar,
    MinimalCoupling,
}

impl BackgroundGaugeChoice {
    pub const ALL: [BackgroundGaugeChoice; 2] =
        [BackgroundGaugeChoice::Multipolar, BackgroundGaugeChoice::MinimalCoupling];

    pub fn label(self) -> &'static str {
        match self {
            BackgroundGaugeChoice::Multipolar => "multipolarB",
            BackgroundGaugeChoice::MinimalCoupling => "minimalB",
        }
    }
}

impl std::str::FromStr for BackgroundGaugeChoice {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self, CoreError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "multipolar" | "multipolarb" => Ok(BackgroundGaugeChoice::Multipolar),
            "minimal" | "minimalb" | "minimal-coupling" | "minimalcoupling" => {
                Ok(BackgroundGaugeChoice::MinimalCoupling)
            }
            other => Err(CoreError::Config { what: format!("unknown background gauge `{other}`") }),
        }
    }
}

/// Coupling between the oscillator transition and one photon mode.
///
/// Magnitudes restore the charge (and mass) factors that drop out of the
/// printed interaction coefficients: e·√ω/(2γ) for the multipolar
/// background, e·γ/(2m√ω) for minimal coupling. On resonance (ω = ω_G,
/// γ² = mω_G) the two coincide. The exp(±i k·x₀) phase is unity under the
/// reduced measure and is not carried.
#[derive(Copy, Clone, Debug)]
pub struct CouplingModel {
    pub background: BackgroundGaugeChoice,
    pub electron_mass_ev: f64,
}

impl CouplingModel {
    /// |g(ω_k, t)| in eV^(−1/2), given the instantaneous γ(t) in eV.
    pub fn magnitude_ev(&self, omega_k_ev: f64, gamma_ev: f64) -> f64 {
        let e = units::elementary_charge_natural();
        match self.background {
            BackgroundGaugeChoice::Multipolar => e * omega_k_ev.sqrt() / (2.0 * gamma_ev),
            BackgroundGaugeChoice::MinimalCoupling => {
                e * gamma_ev / (2.0 * self.electron_mass_ev * omega_k_ev.sqrt())
            }
        }
    }

    /// Exponent σ of the separable ω_k-dependence, |g| ∝ ω_k^σ.
    fn omega_exponent(&self) -> f64 {
        match self.background {
            BackgroundGaugeChoice::Multipolar => 0.5,
            BackgroundGaugeChoice::MinimalCoupling => -0.5,
        }
    }
}

/// Whether to add the Berry-connection correction −i⟨1|1̇⟩ + i⟨0|0̇⟩ to
/// the detuning. For the real instantaneous oscillator states the
/// connection vanishes identically (⟨n|∂ₜn⟩ = 0 for any real normalized
/// family), and the PZW phase factor carried by the Lorentz/Coulomb
/// states has no evaluable time derivative without an explicit vector
/// potential model, so the correction is kept behind a flag and off by
/// default.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum BerryCorrection {
    #[default]
    Off,
    RealEigenstates,
}

/// Δ_G(t): the instantaneous transition frequency entering the resonance
/// condition, as a spline over the scan window.
#[derive(Clone, Debug)]
pub struct Detuning {
    pub gauge: GaugeChoice,
    omega_spline: CubicSpline,
    berry: BerryCorrection,
}

/// Berry connection difference i⟨0|0̇⟩ − i⟨1|1̇⟩ for the real instantaneous
/// states. The drift term couples through ⟨n|∂ₓ₀n⟩ (odd integrand) and
/// the squeeze term through ⟨n|∂_γ n⟩ (derivative of a constant norm);
/// both vanish for every trajectory, so the correction carries no
/// kinematic arguments.
fn berry_connection_difference_ev() -> f64 {
    0.0
}

/// Build Δ_G(t) from a trajectory scan.
pub fn detuning(scan: &TrajectoryScan, berry: BerryCorrection) -> Detuning {
    Detuning { gauge: scan.gauge, omega_spline: scan.omega_spline.clone(), berry }
}

impl Detuning {
    pub fn value_ev(&self, t_ns: f64) -> f64 {
        let base = self.omega_spline.eval(t_ns);
        match self.berry {
            BerryCorrection::Off => base,
            BerryCorrection::RealEigenstates => base + berry_connection_difference_ev(),
        }
    }

    pub fn value_rad_ns(&self, t_ns: f64) -> f64 {
        self.value_ev(t_ns) / units::HBAR_EV_NS
    }

    /// ω_G(t) itself (no Berry term); sets γ(t) = √(mω).
    pub fn omega_ev(&self, t_ns: f64) -> f64 {
        self.omega_spline.eval(t_ns)
    }

    pub fn omega_deriv_ev_per_ns(&self, t_ns: f64) -> f64 {
        self.omega_spline.deriv(t_ns)
    }

    /// ∫₀ᵗ Δ ds in eV·ns (exact on the spline).
    pub fn integral_ev_ns(&self, t_ns: f64) -> f64 {
        self.omega_spline.integral(0.0, t_ns)
    }

    pub fn t_max(&self) -> f64 {
        self.omega_spline.x_max()
    }
}

/// Γ_G(t) in eV: Δ²·|g(Δ, t)|²/(4π). On resonance this reduces to
/// α·Δ²/(4m) for either background.
pub fn decay_rate_ev(
    t_ns: f64,
    det: &Detuning,
    coupling: &CouplingModel,
) -> f64 {
    let delta = det.value_ev(t_ns);
    let gamma_ev = (coupling.electron_mass_ev * det.omega_ev(t_ns)).sqrt();
    let g = coupling.magnitude_ev(delta, gamma_ev);
    delta * delta * g * g / (4.0 * std::f64::consts::PI)
}

/// Excited-state amplitude with its phase bookkeeping at one instant.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DecayState {
    pub t_ns: f64,
    /// Real and positive under the Weisskopf-Wigner reduction.
    pub c1: Complex64,
    /// θ₁ − θ₀ = −∫₀ᵗ ω_G ds, rad.
    pub theta_phase: f64,
    /// γ₁ − γ₀ (adiabatic phases), rad; zero for real states.
    pub berry_phase: f64,
}

/// c₁(t) = exp(−∫₀ᵗ Γ ds) with exact-on-the-spline cumulative integrals.
#[derive(Clone, Debug)]
pub struct C1Curve {
    knots: Vec<f64>,
    cum_gamma: Vec<f64>,
    gamma_ns: GammaSource,
    det: Option<Detuning>,
}

#[derive(Clone, Debug)]
enum GammaSource {
    Coupling(CouplingModel),
    Uniform(f64),
}

impl C1Curve {
    fn gamma_ns_at(&self, t: f64) -> f64 {
        match (&self.gamma_ns, &self.det) {
            (GammaSource::Coupling(c), Some(det)) => {
                decay_rate_ev(t, det, c) / units::HBAR_EV_NS
            }
            (GammaSource::Uniform(g), _) => *g,
            _ => unreachable!(),
        }
    }

    fn build(knots: Vec<f64>, gamma_ns: GammaSource, det: Option<Detuning>) -> Self {
        let mut curve = Self { knots, cum_gamma: Vec::new(), gamma_ns, det };
        let (gl_x, gl_w) = crate::filon::gauss_legendre(8);
        let mut cum = vec![0.0];
        for w in curve.knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            let mut seg = 0.0;
            for (&x, &wt) in gl_x.iter().zip(gl_w.iter()) {
                seg += wt * curve.gamma_ns_at(c + h * x);
            }
            cum.push(cum.last().unwrap() + seg * h);
        }
        curve.cum_gamma = cum;
        curve
    }

    /// ∫₀ᵗ Γ ds (dimensionless).
    pub fn cumulative_gamma(&self, t: f64) -> f64 {
        let i = match self.knots.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => return self.cum_gamma[i],
            Err(0) => 0,
            Err(i) => (i - 1).min(self.knots.len() - 2),
        };
        let a = self.knots[i];
        let (gl_x, gl_w) = crate::filon::gauss_legendre(8);
        let c = 0.5 * (a + t);
        let h = 0.5 * (t - a);
        let mut seg = 0.0;
        for (&x, &wt) in gl_x.iter().zip(gl_w.iter()) {
            seg += wt * self.gamma_ns_at(c + h * x);
        }
        self.cum_gamma[i] + seg * h
    }

    /// |c₁(t)|.
    pub fn amplitude(&self, t: f64) -> f64 {
        (-self.cumulative_gamma(t)).exp()
    }

    /// Sample the decay trajectory (with phases) on a time grid.
    pub fn states(&self, grid: &[f64]) -> Vec<DecayState> {
        grid.iter()
            .map(|&t| {
                let theta = self
                    .det
                    .as_ref()
                    .map(|d| -d.integral_ev_ns(t) / units::HBAR_EV_NS)
                    .unwrap_or(0.0);
                DecayState {
                    t_ns: t,
                    c1: Complex64::new(self.amplitude(t), 0.0),
                    theta_phase: theta,
                    berry_phase: 0.0,
                }
            })
            .collect()
    }
}

/// Evolve c₁ under the time-dependent decay rate built from the detuning
/// and coupling; c₁(0) = 1.
pub fn evolve_c1(det: &Detuning, coupling: &CouplingModel, t_f_ns: f64) -> C1Curve {
    let mut knots: Vec<f64> =
        det.omega_spline.knots().iter().copied().filter(|&t| t > 0.0 && t < t_f_ns).collect();
    knots.insert(0, 0.0);
    knots.push(t_f_ns);
    C1Curve::build(knots, GammaSource::Coupling(*coupling), Some(det.clone()))
}

/// Test/oracle construction with a uniform decay rate (1/ns).
pub fn evolve_c1_uniform(gamma_ns: f64, t_f_ns: f64, n_knots: usize) -> C1Curve {
    let knots: Vec<f64> =
        (0..n_knots).map(|i| t_f_ns * i as f64 / (n_knots - 1) as f64).collect();
    C1Curve::build(knots, GammaSource::Uniform(gamma_ns), None)
}

/// Precomputed envelope for the mode-amplitude integrals: everything in
/// c₀ₖ(t_f) except the separable ω_k^σ factor and the e^{i(ω_k−ω_ref)t}
/// oscillation handled by the panel moments.
pub struct EmissionKernel {
    pub omega_ref_rad_ns: f64,
    pub t_f_ns: f64,
    sigma: f64,
    panels: PanelSet,
}

/// Panelization controls for the emission kernel.
#[derive(Copy, Clone, Debug)]
pub struct PanelOptions {
    pub order: usize,
    /// Envelope phase/amplitude variation allowed per panel, rad.
    pub budget: f64,
    /// Absolute panel-width ceiling as a fraction of t_f.
    pub h_cap_fraction: f64,
}

impl Default for PanelOptions {
    fn default() -> Self {
        Self { order: 16, budget: 2.0, h_cap_fraction: 1.0 / 64.0 }
    }
}

impl EmissionKernel {
    /// Assemble from raw closures: `delta_integral` is ∫₀ᵗΔ ds in rad,
    /// `h_env` the slow coupling envelope (g = ω_k^σ·h_env), `amp` the
    /// excited-state amplitude, and `variation_rate` a local bound on the
    /// envelope's phase+amplitude rate for the panel builder. This is the
    /// entry point the oracle uses with rescaled systems.
    pub fn assemble_custom(
        delta_integral: impl Fn(f64) -> f64,
        h_env: impl Fn(f64) -> f64,
        amp: impl Fn(f64) -> f64,
        variation_rate: impl Fn(f64) -> f64,
        sigma: f64,
        omega_ref_rad_ns: f64,
        t_f_ns: f64,
        opts: PanelOptions,
    ) -> Result<Self, CoreError> {
        let envelope = |t: f64| -> Complex64 {
            let phi = delta_integral(t) - omega_ref_rad_ns * t;
            Complex64::from_polar(h_env(t) * amp(t), -phi)
        };
        let panels = PanelSet::build(
            0.0,
            t_f_ns,
            opts.order,
            opts.budget,
            opts.h_cap_fraction * t_f_ns,
            envelope,
            variation_rate,
        )?;
        Ok(Self { omega_ref_rad_ns, t_f_ns, sigma, panels })
    }

    /// Assemble the production ingredients: Δ(t) from the scan enters the
    /// phase, the coupling envelope follows the background choice, and
    /// `c1` supplies the decaying amplitude.
    pub fn assemble(
        det: &Detuning,
        coupling: &CouplingModel,
        c1: &C1Curve,
        omega_ref_rad_ns: f64,
        t_f_ns: f64,
        opts: PanelOptions,
    ) -> Result<Self, CoreError> {
        if t_f_ns > det.t_max() * (1.0 + 1e-12) {
            return Err(CoreError::Config {
                what: format!("t_f = {t_f_ns} ns beyond the scanned window {}", det.t_max()),
            });
        }
        let sigma = coupling.omega_exponent();
        let hbar = units::HBAR_EV_NS;
        let e = units::elementary_charge_natural();
        let mass = coupling.electron_mass_ev;
        // g(ω_k, t) in ns-rate units is ω_k^σ · h(t); see magnitude_ev.
        let h_of_t = |t: f64| -> f64 {
            let gamma_ev = (mass * det.omega_ev(t)).sqrt();
            match coupling.background {
                BackgroundGaugeChoice::Multipolar => e * hbar / (2.0 * gamma_ev),
                BackgroundGaugeChoice::MinimalCoupling => e * gamma_ev / (2.0 * mass),
            }
        };
        let rate = |t: f64| -> f64 {
            let detune = (det.value_rad_ns(t) - omega_ref_rad_ns).abs();
            let decay = c1.gamma_ns_at(t);
            let envelope_drift =
                (det.omega_deriv_ev_per_ns(t) / (2.0 * det.omega_ev(t))).abs();
            detune + decay + envelope_drift
        };
        Self::assemble_custom(
            |t| det.integral_ev_ns(t) / hbar,
            h_of_t,
            |t| c1.amplitude(t),
            rate,
            sigma,
            omega_ref_rad_ns,
            t_f_ns,
            opts,
        )
    }

    /// c₀ₖ(t_f) for one mode frequency (rad/ns); |c₀ₖ|² carries ns units
    /// compatible with the reduced measure ∫ ω² dω/(2π)².
    pub fn mode_amplitude(&self, omega_k_rad_ns: f64) -> Complex64 {
        let delta = omega_k_rad_ns - self.omega_ref_rad_ns;
        let integral = self.panels.integral(delta);
        Complex64::new(0.0, -1.0) * omega_k_rad_ns.powf(self.sigma) * integral
    }

    /// Halving-consistency check of the panel resolution over the detuning
    /// range the caller intends to use.
    pub fn verify_resolution(
        &self,
        det: &Detuning,
        coupling: &CouplingModel,
        c1: &C1Curve,
        max_abs_delta: f64,
        rel_tol: f64,
    ) -> Result<(), CoreError> {
        let opts = PanelOptions {
            order: self.panels.order(),
            budget: 1.0,
            h_cap_fraction: 1.0 / 128.0,
        };
        let fine =
            Self::assemble(det, coupling, c1, self.omega_ref_rad_ns, self.t_f_ns, opts)?;
        let mut scale: f64 = 0.0;
        let probes = [0.0, 0.31 * max_abs_delta, -0.5 * max_abs_delta, max_abs_delta, -max_abs_delta];
        let pairs: Vec<(Complex64, Complex64)> = probes
            .iter()
            .map(|&d| {
                let w = self.omega_ref_rad_ns + d;
                (self.mode_amplitude(w), fine.mode_amplitude(w))
            })
            .collect();
        for (a, _) in &pairs {
            scale = scale.max(a.norm());
        }
        for (a, b) in &pairs {
            let err = (a - b).norm() / scale;
            if err > rel_tol {
                return Err(CoreError::Resolution {
                    what: format!("mode-amplitude quadrature differs by {err:e} under refinement"),
                });
            }
        }
        Ok(())
    }

    pub fn panel_count(&self) -> usize {
        self.panels.panel_count()
    }
}

/// Frequency grid for the spectrum: an outer uniform window around ω_ref
/// plus a denser insert near the center, mirroring where the MHz-scale
/// structure lives.
#[derive(Copy, Clone, Debug)]
pub struct OmegaGridSpec {
    /// Half-width of the outer window, rad/s.
    pub half_window_per_s: f64,
    /// Points across the outer window (forced odd).
    pub points: usize,
    /// Half-width of the denser insert, rad/s.
    pub insert_half_window_per_s: f64,
    /// Density multiplier inside the insert.
    pub insert_factor: usize,
}

impl Default for OmegaGridSpec {
    fn default() -> Self {
        Self {
            half_window_per_s: 2.0 * std::f64::consts::PI * 3.0e9,
            points: 24001,
            insert_half_window_per_s: 2.0 * std::f64::consts::PI * 1.5e8,
            insert_factor: 10,
        }
    }
}

impl OmegaGridSpec {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.half_window_per_s > 0.0) || self.points < 5 {
            return Err(CoreError::Config { what: "omega grid needs a window and >= 5 points".into() });
        }
        if self.insert_factor == 0 || !(self.insert_half_window_per_s >= 0.0) {
            return Err(CoreError::Config { what: "bad omega-grid insert".into() });
        }
        Ok(())
    }

    /// Sorted grid in rad/ns centered on ω_ref (rad/ns).
    pub fn build(&self, omega_ref_rad_ns: f64) -> Result<Vec<f64>, CoreError> {
        self.validate()?;
        let n = if self.points % 2 == 0 { self.points + 1 } else { self.points };
        let half = (n - 1) / 2;
        let w = self.half_window_per_s * 1e-9;
        let dw = w / half as f64;
        let mut offsets = vec![0.0];
        for k in 1..=half {
            offsets.push(k as f64 * dw);
            offsets.push(-(k as f64) * dw);
        }
        if self.insert_half_window_per_s > 0.0 && self.insert_factor > 1 {
            let wi = (self.insert_half_window_per_s * 1e-9).min(w);
            let dwi = dw / self.insert_factor as f64;
            let kf = (wi / dwi).floor() as usize;
            for k in 1..=kf {
                offsets.push(k as f64 * dwi);
                offsets.push(-(k as f64) * dwi);
            }
        }
        offsets.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let tol = dw * 1e-9 / self.insert_factor as f64;
        let mut grid = Vec::with_capacity(offsets.len());
        for off in offsets {
            let candidate = omega_ref_rad_ns + off;
            if grid.last().is_none_or(|&last: &f64| candidate - last > tol) {
                grid.push(candidate);
            }
        }
        Ok(grid)
    }
}

/// Frequency grid, mode amplitudes, spectral density, and the extracted
/// peak for one (gauge, background) pair.
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub gauge: GaugeChoice,
    pub background: BackgroundGaugeChoice,
    pub t_f_ns: f64,
    /// Angular frequencies, rad/s.
    pub omega_per_s: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    /// S(ω, t_f) per rad/s.
    pub spectral_density: Vec<f64>,
    /// Peak of S by quadratic interpolation, rad/s.
    pub peak_omega_per_s: f64,
    /// Quadrature of S over the grid (dimensionless probability).
    pub emitted_probability: f64,
}

/// Controls for the full spectrum pipeline.
#[derive(Clone, Debug)]
pub struct SpectrumOptions {
    pub time_grid: TimeGridSpec,
    pub panels: PanelOptions,
    pub berry: BerryCorrection,
    pub workers: usize,
    /// Relative tolerance of the panel refinement self-check.
    pub resolution_tol: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            time_grid: TimeGridSpec::default(),
            panels: PanelOptions::default(),
            berry: BerryCorrection::Off,
            workers: 1,
            resolution_tol: 1e-7,
        }
    }
}

/// Run the full pipeline for one gauge and background: trajectory scan →
/// detuning → decay → mode accumulation on the grid → peak extraction.
pub fn spectrum(
    gauge: GaugeChoice,
    background: BackgroundGaugeChoice,
    cfg: &SystemConfig,
    t_f_ns: f64,
    omega_grid: &OmegaGridSpec,
    opts: &SpectrumOptions,
) -> Result<SpectrumResult, CoreError> {
    cfg.validate()?;
    if !(t_f_ns > 0.0) {
        return Err(CoreError::Config { what: "t_f must be positive".into() });
    }
    // Closest approach stays at T/2 regardless of t_f.
    let t_mid = cfg.transit_duration_ns().map(|t| 0.5 * t).unwrap_or(0.5 * t_f_ns);
    let grid_t = opts.time_grid.build(cfg, t_f_ns, t_mid)?;
    let scan = crate::potentials::trajectory_scan(gauge, cfg, 2.0 * t_mid, &grid_t)?;
    ensure_finite("trajectory", scan.params.iter().flat_map(|p| [p.x0_nm, p.omega_ev]))?;

    let det = detuning(&scan, opts.berry);
    let coupling = CouplingModel { background, electron_mass_ev: cfg.electron_mass_ev };
    let c1 = evolve_c1(&det, &coupling, t_f_ns);
    ensure_finite("decay", [c1.amplitude(t_f_ns)])?;

    let omega_ref_rad_ns = cfg.unperturbed_omega_ev() / units::HBAR_EV_NS;
    let kernel =
        EmissionKernel::assemble(&det, &coupling, &c1, omega_ref_rad_ns, t_f_ns, opts.panels)?;
    let grid_w = omega_grid.build(omega_ref_rad_ns)?;
    let max_delta = (grid_w[0] - omega_ref_rad_ns)
        .abs()
        .max((grid_w[grid_w.len() - 1] - omega_ref_rad_ns).abs());
    kernel.verify_resolution(&det, &coupling, &c1, max_delta, opts.resolution_tol)?;

    let amplitudes = compute_amplitudes(&kernel, &grid_w, opts.workers.max(1));
    finish_spectrum(gauge, background, t_f_ns, grid_w, amplitudes)
}

/// Shared tail of the pipeline: density, peak, probability, fail-closed
/// checks.
pub fn finish_spectrum(
    gauge: GaugeChoice,
    background: BackgroundGaugeChoice,
    t_f_ns: f64,
    grid_rad_ns: Vec<f64>,
    amplitudes: Vec<Complex64>,
) -> Result<SpectrumResult, CoreError> {
    let two_pi_sq = (2.0 * std::f64::consts::PI).powi(2);
    // S per rad/s: the per-(rad/ns) density scaled by 1e-9.
    let s: Vec<f64> = grid_rad_ns
        .iter()
        .zip(&amplitudes)
        .map(|(&w, a)| w * w * a.norm_sqr() / two_pi_sq * 1e-9)
        .collect();
    ensure_finite("mode-accumulation", s.iter().copied())?;

    let mut imax = 0;
    for (i, &v) in s.iter().enumerate() {
        if v > s[imax] {
            imax = i;
        }
    }
    if imax == 0 || imax == s.len() - 1 {
        return Err(CoreError::Window {
            what: format!("spectral maximum sits on the grid boundary (index {imax})"),
        });
    }
    // Quadratic interpolation on (possibly nonuniform) neighbors, shifted
    // to avoid cancellation in ω².
    let u0 = grid_rad_ns[imax - 1] - grid_rad_ns[imax];
    let u2 = grid_rad_ns[imax + 1] - grid_rad_ns[imax];
    let (y0, y1, y2) = (s[imax - 1], s[imax], s[imax + 1]);
    let num = (y0 - y1) * u2 * u2 - (y2 - y1) * u0 * u0;
    let den = (y0 - y1) * u2 - (y2 - y1) * u0;
    let vertex_off = if den == 0.0 { 0.0 } else { 0.5 * num / den };
    let peak_rad_ns = grid_rad_ns[imax] + vertex_off;

    // Trapezoid over the nonuniform grid, in deterministic index order.
    let mut prob = 0.0;
    for i in 1..grid_rad_ns.len() {
        let dw_ns = grid_rad_ns[i] - grid_rad_ns[i - 1];
        // s is per rad/s; convert the step to rad/s as well.
        prob += 0.5 * (s[i] + s[i - 1]) * dw_ns * 1e9;
    }
    ensure_finite("spectrum", [peak_rad_ns, prob])?;

    Ok(SpectrumResult {
        gauge,
        background,
        t_f_ns,
        omega_per_s: grid_rad_ns.iter().map(|w| w * 1e9).collect(),
        amplitudes,
        spectral_density: s,
        peak_omega_per_s: peak_rad_ns * 1e9,
        emitted_probability: prob,
    })
}

/// Evaluate mode amplitudes over the grid with a bounded worker pool.
/// Results are written into per-index slots, so the output is independent
/// of the worker count.
pub fn compute_amplitudes(
    kernel: &EmissionKernel,
    grid_rad_ns: &[f64],
    workers: usize,
) -> Vec<Complex64> {
    let n = grid_rad_ns.len();
    let workers = workers.max(1).min(n.max(1));
    if workers == 1 {
        return grid_rad_ns.iter().map(|&w| kernel.mode_amplitude(w)).collect();
    }
    let chunk = n.div_ceil(workers);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (ci, slice) in grid_rad_ns.chunks(chunk).enumerate() {
            let kernel_ref = &*kernel;
            handles.push((
                ci,
                scope.spawn(move || -> Vec<Complex64> {
                    slice.iter().map(|&w| kernel_ref.mode_amplitude(w)).collect()
                }),
            ));
        }
        for (ci, h) in handles {
            let vals = h.join().expect("amplitude worker panicked");
            out[ci * chunk..ci * chunk + vals.len()].copy_from_slice(&vals);
        }
    });
    out
}

/// c₀ₖ(t_f) for one mode against a prepared kernel (the per-mode entry
/// point of the accumulation pipeline).
pub fn accumulate_mode_amplitude(kernel: &EmissionKernel, omega_k_rad_ns: f64) -> Complex64 {
    kernel.mode_amplitude(omega_k_rad_ns)
}

/// Paired spectra under both background gauges with the pointwise S
/// difference (multipolar − minimal coupling).
#[derive(Clone, Debug)]
pub struct BackgroundComparison {
    pub multipolar: SpectrumResult,
    pub minimal_coupling: SpectrumResult,
    pub s_difference: Vec<f64>,
}

pub fn compare_backgrounds(
    gauge: GaugeChoice,
    cfg: &SystemConfig,
    t_f_ns: f64,
    omega_grid: &OmegaGridSpec,
    opts: &SpectrumOptions,
) -> Result<BackgroundComparison, CoreError> {
    let multipolar =
        spectrum(gauge, BackgroundGaugeChoice::Multipolar, cfg, t_f_ns, omega_grid, opts)?;
    let minimal =
        spectrum(gauge, BackgroundGaugeChoice::MinimalCoupling, cfg, t_f_ns, omega_grid, opts)?;
    let s_difference = multipolar
        .spectral_density
        .iter()
        .zip(&minimal.spectral_density)
        .map(|(a, b)| a - b)
        .collect();
    Ok(BackgroundComparison { multipolar, minimal_coupling: minimal, s_difference })
}
