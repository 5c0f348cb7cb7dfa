//! Gauge-dependent scalar potential of the fixed charges plus the moving
//! cluster, instantaneous equilibrium location, and per-gauge harmonic
//! parameters along the transit.
//!
//! All potentials are reported as the electron's potential energy qφ in eV
//! (q = −e). The fixed charges (−e at x = ±l) confine the electron; the
//! cluster of N protons passes at transverse distance Y with position
//! L(t) = v·(t − t_mid) along x. Gauge enters through the cluster term:
//!
//! * Lorentz:   −N·e²/4π / √((x−L)² + (1−β²)Y²)
//! * Coulomb:   −N·e²/4π / √((x−L)² + Y²)
//! * multipolar: defined through its Taylor coefficients about x₀ — the
//!   Lorentz-form gradient and curvature with an extra (1−β²) factor on
//!   the cluster pieces, which makes its gradient −q·Eₓ of the physical
//!   (Lorentz-contracted) field.

use crate::error::CoreError;
use crate::roots::newton_bisection;
use crate::spline::CubicSpline;
use crate::units;

/// Gauge for the external (cluster + fixed charge) field. Every API call
/// names its gauge explicitly; there is deliberately no `Default`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum GaugeChoice {
    Lorentz,
    Coulomb,
    Multipolar,
}

impl GaugeChoice {
    pub const ALL: [GaugeChoice; 3] =
        [GaugeChoice::Lorentz, GaugeChoice::Coulomb, GaugeChoice::Multipolar];

    pub fn label(self) -> &'static str {
        match self {
            GaugeChoice::Lorentz => "lorentz",
            GaugeChoice::Coulomb => "coulomb",
            GaugeChoice::Multipolar => "multipolar",
        }
    }
}

impl std::str::FromStr for GaugeChoice {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self, CoreError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lorentz" => Ok(GaugeChoice::Lorentz),
            "coulomb" => Ok(GaugeChoice::Coulomb),
            "multipolar" => Ok(GaugeChoice::Multipolar),
            other => Err(CoreError::Config { what: format!("unknown gauge `{other}`") }),
        }
    }
}

/// The physical scenario.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SystemConfig {
    /// Number of protons in the cluster (treated as a point charge).
    pub cluster_count: f64,
    /// v/c of the cluster.
    pub beta: f64,
    /// Fixed-charge half-separation in nm.
    pub l_nm: f64,
    /// Impact distance in nm.
    pub y_nm: f64,
    /// Cluster travels from −span·Y to +span·Y.
    pub span_in_y: f64,
    /// Electron mass in eV.
    pub electron_mass_ev: f64,
    /// +1 for protons.
    pub cluster_charge_sign: f64,
}

impl SystemConfig {
    /// The parameter set the study is built around: N = 10¹², β = 0.1,
    /// l = 6.33 nm, Y/l = 10⁶, transit over ±100Y.
    pub fn study_defaults() -> Self {
        Self {
            cluster_count: 1e12,
            beta: 0.1,
            l_nm: 6.33,
            y_nm: 1e6 * 6.33,
            span_in_y: 100.0,
            electron_mass_ev: units::ELECTRON_MASS_EV,
            cluster_charge_sign: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.beta >= 0.0 && self.beta < 1.0) {
            return Err(CoreError::Config { what: format!("beta = {} outside [0, 1)", self.beta) });
        }
        if !(self.cluster_count >= 0.0) {
            return Err(CoreError::Config { what: "cluster count must be >= 0".into() });
        }
        if !(self.l_nm > 0.0 && self.y_nm > 0.0 && self.span_in_y > 0.0) {
            return Err(CoreError::Config { what: "l, Y, span must be positive".into() });
        }
        if !(self.electron_mass_ev > 0.0) {
            return Err(CoreError::Config { what: "electron mass must be positive".into() });
        }
        Ok(())
    }

    /// Cluster speed in nm/ns.
    pub fn speed_nm_per_ns(&self) -> f64 {
        self.beta * units::SPEED_OF_LIGHT_NM_PER_NS
    }

    /// Transit duration T = 2·span·Y/v in ns; `None` for a parked cluster
    /// (β = 0).
    pub fn transit_duration_ns(&self) -> Option<f64> {
        if self.beta > 0.0 {
            Some(2.0 * self.span_in_y * self.y_nm / self.speed_nm_per_ns())
        } else {
            None
        }
    }

    /// Cluster kinematics over a window of the given duration, with closest
    /// approach at the midpoint. For β = 0 the cluster sits parked at
    /// closest approach (L ≡ 0) for the whole window.
    pub fn trajectory(&self, duration_ns: f64) -> ClusterTrajectory {
        ClusterTrajectory { v_nm_per_ns: self.speed_nm_per_ns(), t_mid_ns: 0.5 * duration_ns }
    }

    /// Unperturbed oscillator frequency √(4·e²/4π·ħc/(m l³)) in eV.
    pub fn unperturbed_omega_ev(&self) -> f64 {
        let cc = units::coulomb_coupling();
        units::HBAR_C_EV_NM
            * (4.0 * cc / (self.electron_mass_ev * self.l_nm.powi(3))).sqrt()
    }
}

/// Straight-line cluster kinematics, L(t) = v·(t − t_mid).
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ClusterTrajectory {
    pub v_nm_per_ns: f64,
    pub t_mid_ns: f64,
}

impl ClusterTrajectory {
    pub fn position_nm(&self, t_ns: f64) -> f64 {
        self.v_nm_per_ns * (t_ns - self.t_mid_ns)
    }
}

/// Harmonic parameters of one gauge at one instant.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct HarmonicParams {
    pub gauge: GaugeChoice,
    pub t_ns: f64,
    /// Instantaneous equilibrium x₀ in nm.
    pub x0_nm: f64,
    /// Spring constant in eV/nm².
    pub k_ev_per_nm2: f64,
    /// ω = √(k/m) in eV.
    pub omega_ev: f64,
    /// Constant offset qφ(x₀, t) in eV; recorded, dynamically inert.
    pub phi0_ev: f64,
}

impl HarmonicParams {
    /// γ = √(mω) in eV (inverse-length-like width parameter).
    pub fn gamma_ev(&self, mass_ev: f64) -> f64 {
        (mass_ev * self.omega_ev).sqrt()
    }
}

// --- closed-form pieces -------------------------------------------------

/// Potential-energy pieces of one gauge at one instant; all closed-form.
struct GaugeTerms {
    cc: f64,
    ncc: f64,
    l: f64,
    /// Cluster position.
    lt: f64,
    /// Transverse distance squared in the cluster denominator.
    asq: f64,
    /// Extra factor on the cluster gradient/curvature (multipolar only).
    cluster_factor: f64,
}

impl GaugeTerms {
    fn new(gauge: GaugeChoice, cfg: &SystemConfig, t_ns: f64, duration_ns: f64) -> Self {
        let cc = units::coulomb_coupling();
        let traj = cfg.trajectory(duration_ns);
        let one_minus_b2 = 1.0 - cfg.beta * cfg.beta;
        let (asq, cluster_factor) = match gauge {
            GaugeChoice::Lorentz => (one_minus_b2 * cfg.y_nm * cfg.y_nm, 1.0),
            GaugeChoice::Coulomb => (cfg.y_nm * cfg.y_nm, 1.0),
            GaugeChoice::Multipolar => (one_minus_b2 * cfg.y_nm * cfg.y_nm, one_minus_b2),
        };
        Self {
            cc,
            ncc: cfg.cluster_count * cfg.cluster_charge_sign * cc,
            l: cfg.l_nm,
            lt: traj.position_nm(t_ns),
            asq,
            cluster_factor,
        }
    }

    /// Fixed-charge part of qφ.
    fn fixed_value(&self, x: f64) -> f64 {
        self.cc * (1.0 / (self.l + x) + 1.0 / (self.l - x))
    }

    fn fixed_grad(&self, x: f64) -> f64 {
        let lp = self.l + x;
        let lm = self.l - x;
        self.cc * (1.0 / (lm * lm) - 1.0 / (lp * lp))
    }

    fn fixed_curv(&self, x: f64) -> f64 {
        let lp = self.l + x;
        let lm = self.l - x;
        2.0 * self.cc * (1.0 / (lp * lp * lp) + 1.0 / (lm * lm * lm))
    }

    /// Cluster part of qφ (attractive for protons).
    fn cluster_value(&self, x: f64) -> f64 {
        let u = x - self.lt;
        -self.ncc / (u * u + self.asq).sqrt()
    }

    fn cluster_grad(&self, x: f64) -> f64 {
        let u = x - self.lt;
        let d2 = u * u + self.asq;
        self.cluster_factor * self.ncc * u / (d2 * d2.sqrt())
    }

    fn cluster_curv(&self, x: f64) -> f64 {
        let u = x - self.lt;
        let d2 = u * u + self.asq;
        // (a² − 2u²)/d⁵ form avoids the 1/d³ − 3u²/d⁵ cancellation.
        self.cluster_factor * self.ncc * (self.asq - 2.0 * u * u) / (d2 * d2 * d2.sqrt())
    }

    fn grad(&self, x: f64) -> f64 {
        self.fixed_grad(x) + self.cluster_grad(x)
    }

    fn curv(&self, x: f64) -> f64 {
        self.fixed_curv(x) + self.cluster_curv(x)
    }
}

/// qφ_G(x, t) in eV. Exact closed form for Lorentz and Coulomb; for the
/// multipolar gauge the potential is defined only through its quadratic
/// coefficients about x₀, so the reconstruction φ₀ + ½k(x−x₀)² is
/// returned.
pub fn scalar_potential(
    gauge: GaugeChoice,
    cfg: &SystemConfig,
    duration_ns: f64,
    x_nm: f64,
    t_ns: f64,
) -> Result<f64, CoreError> {
    cfg.validate()?;
    if x_nm.abs() >= cfg.l_nm {
        return Err(CoreError::Domain {
            what: format!("x = {x_nm} nm is at or beyond the fixed charges (±{} nm)", cfg.l_nm),
        });
    }
    match gauge {
        GaugeChoice::Lorentz | GaugeChoice::Coulomb => {
            let terms = GaugeTerms::new(gauge, cfg, t_ns, duration_ns);
            Ok(terms.fixed_value(x_nm) + terms.cluster_value(x_nm))
        }
        GaugeChoice::Multipolar => {
            let hp = quadratic_fit(gauge, cfg, duration_ns, t_ns, 0.0)?;
            let dx = x_nm - hp.x0_nm;
            Ok(hp.phi0_ev + 0.5 * hp.k_ev_per_nm2 * dx * dx)
        }
    }
}

/// Bracket half-width as a fraction of l for the equilibrium search.
const BRACKET_FRACTION: f64 = 0.98;
/// Absolute tolerance on x₀ in nm.
const X0_TOL_NM: f64 = 1e-12;
const MAX_NEWTON_ITER: usize = 100;
/// Scan resolution for the multiple-root guard.
const ROOT_SCAN_POINTS: usize = 65;

/// Locate the equilibrium x₀ (gauge-specific gradient zero) near
/// `x0_guess` and extract the harmonic parameters at time t.
pub fn quadratic_fit(
    gauge: GaugeChoice,
    cfg: &SystemConfig,
    duration_ns: f64,
    t_ns: f64,
    x0_guess: f64,
) -> Result<HarmonicParams, CoreError> {
    cfg.validate()?;
    if x0_guess.abs() >= cfg.l_nm {
        return Err(CoreError::Domain {
            what: format!("x0 guess {x0_guess} nm outside (−l, l)"),
        });
    }
    let terms = GaugeTerms::new(gauge, cfg, t_ns, duration_ns);
    let bound = BRACKET_FRACTION * cfg.l_nm;

    // Guard against several equilibria inside the trap: scan the gradient
    // for sign changes and pick the interval holding (or nearest to) the
    // seed. The seed must break an exact tie.
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let step = 2.0 * bound / (ROOT_SCAN_POINTS - 1) as f64;
    let mut prev_x = -bound;
    let mut prev_f = terms.grad(prev_x);
    for i in 1..ROOT_SCAN_POINTS {
        let x = -bound + i as f64 * step;
        let f = terms.grad(x);
        if prev_f == 0.0 || prev_f * f < 0.0 {
            intervals.push((prev_x, x));
        }
        prev_x = x;
        prev_f = f;
    }
    let (lo, hi) = match intervals.len() {
        0 => (-bound, bound),
        1 => intervals[0],
        _ => {
            let dist = |iv: &(f64, f64)| {
                if x0_guess >= iv.0 && x0_guess <= iv.1 {
                    0.0
                } else {
                    (x0_guess - iv.0).abs().min((x0_guess - iv.1).abs())
                }
            };
            let mut best = intervals[0];
            let mut best_d = dist(&intervals[0]);
            let mut tie = false;
            for iv in &intervals[1..] {
                let d = dist(iv);
                if (d - best_d).abs() < 0.5 * step * 1e-9 {
                    tie = true;
                } else if d < best_d {
                    best = *iv;
                    best_d = d;
                    tie = false;
                }
            }
            if tie {
                return Err(CoreError::MultipleRoots { t_ns });
            }
            best
        }
    };

    let x0 = newton_bisection(
        |x| terms.grad(x),
        |x| terms.curv(x),
        lo,
        hi,
        x0_guess.clamp(lo, hi),
        X0_TOL_NM,
        MAX_NEWTON_ITER,
    )
    .map_err(|e| match e {
        CoreError::Convergence { what, .. } => CoreError::Convergence { what, t_ns },
        other => other,
    })?;

    let k = terms.curv(x0);
    if !(k > 0.0) {
        return Err(CoreError::Domain {
            what: format!("confinement lost: k = {k} eV/nm² at t = {t_ns} ns"),
        });
    }
    let omega_ev = units::HBAR_C_EV_NM * (k / cfg.electron_mass_ev).sqrt();
    // The multipolar constant term is the potential of the gauge the PZW
    // transformation starts from, evaluated at x₀; the Lorentz value is
    // recorded. It never enters the dynamics.
    let phi0_ev = match gauge {
        GaugeChoice::Multipolar => {
            let lorentz = GaugeTerms::new(GaugeChoice::Lorentz, cfg, t_ns, duration_ns);
            lorentz.fixed_value(x0) + lorentz.cluster_value(x0)
        }
        _ => terms.fixed_value(x0) + terms.cluster_value(x0),
    };

    Ok(HarmonicParams { gauge, t_ns, x0_nm: x0, k_ev_per_nm2: k, omega_ev, phi0_ev })
}

/// Time grid covering the transit: a uniform coarse grid over the full
/// window plus a `refine_factor`× denser insert where |L(t)| ≤
/// `refine_window_y`·Y. Built symmetrically about the midpoint.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TimeGridSpec {
    pub coarse_points: usize,
    pub refine_factor: usize,
    pub refine_window_y: f64,
}

impl Default for TimeGridSpec {
    fn default() -> Self {
        Self { coarse_points: 2001, refine_factor: 100, refine_window_y: 5.0 }
    }
}

impl TimeGridSpec {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.coarse_points < 3 {
            return Err(CoreError::Config { what: "time grid needs >= 3 coarse points".into() });
        }
        if self.refine_factor == 0 || self.refine_window_y <= 0.0 {
            return Err(CoreError::Config { what: "refine factor/window must be positive".into() });
        }
        Ok(())
    }

    /// Grid over [0, t_end] built from offsets about `t_mid` (the closest
    /// approach), so that a t_end = 2·t_mid grid is symmetric to the last
    /// bit. The refined insert covers |L(t)| ≤ window·Y, clipped to the
    /// span.
    pub fn build(
        &self,
        cfg: &SystemConfig,
        t_end_ns: f64,
        t_mid_ns: f64,
    ) -> Result<Vec<f64>, CoreError> {
        self.validate()?;
        if !(t_end_ns > 0.0) {
            return Err(CoreError::Config { what: "duration must be positive".into() });
        }
        let n_coarse = if self.coarse_points % 2 == 0 {
            self.coarse_points + 1
        } else {
            self.coarse_points
        };
        let dt_c = t_end_ns / (n_coarse - 1) as f64;
        let lo = -t_mid_ns;
        let hi = t_end_ns - t_mid_ns;
        let tol = dt_c * 1e-9 / self.refine_factor as f64;

        let mut offsets: Vec<f64> = Vec::new();
        offsets.push(lo);
        offsets.push(hi);
        let k_lo = (-lo / dt_c * (1.0 + 1e-12)).floor() as i64;
        let k_hi = (hi / dt_c * (1.0 + 1e-12)).floor() as i64;
        for k in -k_lo..=k_hi {
            offsets.push(k as f64 * dt_c);
        }
        let v = cfg.speed_nm_per_ns();
        if v > 0.0 && self.refine_factor > 1 {
            let window = self.refine_window_y * cfg.y_nm / v;
            let dt_f = dt_c / self.refine_factor as f64;
            let kf = (window / dt_f).floor() as i64;
            for k in 1..=kf {
                let tau = k as f64 * dt_f;
                if tau <= hi {
                    offsets.push(tau);
                }
                if -tau >= lo {
                    offsets.push(-tau);
                }
            }
        }
        offsets.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut grid: Vec<f64> = Vec::with_capacity(offsets.len());
        for tau in offsets {
            if tau < lo - tol || tau > hi + tol {
                continue;
            }
            if grid.last().is_none_or(|&last| tau - (last - t_mid_ns) > tol) {
                grid.push(t_mid_ns + tau);
            }
        }
        // Pin the endpoints exactly.
        grid[0] = 0.0;
        let n = grid.len();
        grid[n - 1] = t_end_ns;
        Ok(grid)
    }
}

/// A continuation scan over a time grid, with spline-interpolable arrays.
#[derive(Clone, Debug)]
pub struct TrajectoryScan {
    pub gauge: GaugeChoice,
    pub duration_ns: f64,
    pub params: Vec<HarmonicParams>,
    pub x0_spline: CubicSpline,
    pub omega_spline: CubicSpline,
    pub k_spline: CubicSpline,
}

/// Scan the harmonic parameters over `time_grid` (strictly increasing),
/// seeding each fit with the previous equilibrium.
pub fn trajectory_scan(
    gauge: GaugeChoice,
    cfg: &SystemConfig,
    duration_ns: f64,
    time_grid: &[f64],
) -> Result<TrajectoryScan, CoreError> {
    if time_grid.len() < 2 {
        return Err(CoreError::Config { what: "time grid needs >= 2 points".into() });
    }
    for w in time_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(CoreError::Config { what: "time grid must be strictly increasing".into() });
        }
    }
    let mut params = Vec::with_capacity(time_grid.len());
    let mut guess = 0.0;
    for &t in time_grid {
        let hp = quadratic_fit(gauge, cfg, duration_ns, t, guess)?;
        guess = hp.x0_nm;
        params.push(hp);
    }
    let x0: Vec<f64> = params.iter().map(|p| p.x0_nm).collect();
    let om: Vec<f64> = params.iter().map(|p| p.omega_ev).collect();
    let kk: Vec<f64> = params.iter().map(|p| p.k_ev_per_nm2).collect();
    Ok(TrajectoryScan {
        gauge,
        duration_ns,
        x0_spline: CubicSpline::new(time_grid, &x0)?,
        omega_spline: CubicSpline::new(time_grid, &om)?,
        k_spline: CubicSpline::new(time_grid, &kk)?,
        params,
    })
}
