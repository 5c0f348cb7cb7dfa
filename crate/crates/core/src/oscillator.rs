//! Instantaneous eigensystem of the quadratic Hamiltonian and the
//! adiabaticity diagnostics.
//!
//! Levels: E_n(t) = (n + ½)·ω_G(t). States are shifted Gaussians times
//! Hermite polynomials with width parameter γ = √(mω). The adiabaticity
//! parameter of the lowest pair reduces, via the ladder decomposition
//! Ḣ = −k·ẋ₀·(x−x₀) + ½k̇·(x−x₀)², to r₀₁ = |ẋ₀|·√(m/2ω): the k̇ piece
//! has no (0,1) matrix element by parity.

use crate::error::CoreError;
use crate::potentials::{GaugeChoice, HarmonicParams, TrajectoryScan};
use crate::spline::CubicSpline;
use crate::units;

/// Physicists' Hermite polynomial H_n(x).
pub fn hermite(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0 * x,
        _ => {
            let mut hm = 1.0;
            let mut h = 2.0 * x;
            for k in 1..n {
                let next = 2.0 * x * h - 2.0 * k as f64 * hm;
                hm = h;
                h = next;
            }
            h
        }
    }
}

/// Instantaneous eigenstate |n_G(t)⟩ of the quadratic Hamiltonian. The PZW
/// factor U_G† multiplying the state in the Lorentz/Coulomb gauges is a
/// pure phase in every quantity this crate computes; it is carried as a
/// tag, not evaluated.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct InstantaneousState {
    pub n: usize,
    /// γ = √(mω) in eV.
    pub gamma_ev: f64,
    pub x0_nm: f64,
    /// Normalization [γ_nm/(√π·2ⁿ·n!)]^(1/2) in nm^(−1/2).
    pub norm: f64,
    pub gauge: GaugeChoice,
    pub t_ns: f64,
}

impl InstantaneousState {
    pub fn from_params(n: usize, hp: &HarmonicParams) -> Self {
        // γ in nm⁻¹ follows from the params alone: √(k/ω).
        let gamma_nm = (hp.k_ev_per_nm2 / hp.omega_ev).sqrt();
        let two_n_nfact: f64 = (0..n).fold(1.0, |acc, k| acc * 2.0 * (k + 1) as f64);
        let norm = (gamma_nm / (std::f64::consts::PI.sqrt() * two_n_nfact)).sqrt();
        Self {
            n,
            gamma_ev: gamma_nm * units::HBAR_C_EV_NM,
            x0_nm: hp.x0_nm,
            norm,
            gauge: hp.gauge,
            t_ns: hp.t_ns,
        }
    }

    pub fn gamma_per_nm(&self) -> f64 {
        self.gamma_ev / units::HBAR_C_EV_NM
    }

    /// ψ_n(x) in nm^(−1/2).
    pub fn eval(&self, x_nm: f64) -> f64 {
        let xi = self.gamma_per_nm() * (x_nm - self.x0_nm);
        self.norm * (-0.5 * xi * xi).exp() * hermite(self.n, xi)
    }
}

/// E_n = (n + ½)·ω in eV.
pub fn eigenenergy(n: usize, hp: &HarmonicParams) -> f64 {
    (n as f64 + 0.5) * hp.omega_ev
}

/// ⟨n|(x−x₀)|m⟩ in nm: √(max(n,m))/(√2·γ) on |n−m| = 1, zero otherwise.
pub fn position_matrix_element(n: usize, m: usize, hp: &HarmonicParams) -> f64 {
    if n.abs_diff(m) != 1 {
        return 0.0;
    }
    let gamma_nm = (hp.k_ev_per_nm2 / hp.omega_ev).sqrt();
    (n.max(m) as f64).sqrt() / (std::f64::consts::SQRT_2 * gamma_nm)
}

/// r₀₁(t) samples over a scan and their maximum.
#[derive(Clone, Debug)]
pub struct AdiabaticityReport {
    pub gauge: GaugeChoice,
    /// (t_ns, r01) pairs on the scan grid.
    pub samples: Vec<(f64, f64)>,
    pub max_r01: f64,
    pub argmax_t_ns: f64,
}

/// Evaluate r₀₁(t) = |ẋ₀|·√(m/2ω) over the scan, with ẋ₀ from spline
/// differentiation. Fails if halving the grid changes the maximum by more
/// than 1%.
pub fn adiabaticity_parameter(
    scan: &TrajectoryScan,
    mass_ev: f64,
) -> Result<AdiabaticityReport, CoreError> {
    let r01_at = |x0_spline: &CubicSpline, omega: f64, t: f64| -> f64 {
        let x0dot_natural = x0_spline.deriv(t) / units::SPEED_OF_LIGHT_NM_PER_NS;
        x0dot_natural.abs() * (mass_ev / (2.0 * omega)).sqrt()
    };

    let mut samples = Vec::with_capacity(scan.params.len());
    let mut max_r01 = 0.0f64;
    let mut argmax_t = scan.params[0].t_ns;
    for hp in &scan.params {
        let r = r01_at(&scan.x0_spline, hp.omega_ev, hp.t_ns);
        if r > max_r01 {
            max_r01 = r;
            argmax_t = hp.t_ns;
        }
        samples.push((hp.t_ns, r));
    }

    // Halving consistency: rebuild the derivative from every other knot.
    let knots = scan.x0_spline.knots();
    if knots.len() >= 5 && max_r01 > 0.0 {
        let coarse_t: Vec<f64> = knots.iter().copied().step_by(2).collect();
        let coarse_x: Vec<f64> =
            scan.x0_spline.values().iter().copied().step_by(2).collect();
        let coarse = CubicSpline::new(&coarse_t, &coarse_x)?;
        let mut coarse_max = 0.0f64;
        for hp in &scan.params {
            let r = r01_at(&coarse, hp.omega_ev, hp.t_ns);
            coarse_max = coarse_max.max(r);
        }
        let rel_change = ((coarse_max - max_r01) / max_r01).abs();
        if rel_change > 0.01 {
            return Err(CoreError::GridTooCoarse { what: "r01 spline derivative".into(), rel_change });
        }
    }

    Ok(AdiabaticityReport { gauge: scan.gauge, samples, max_r01, argmax_t_ns: argmax_t })
}
