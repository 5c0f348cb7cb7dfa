//! Direct integration of the coupled amplitude equations against a
//! discretized photon bath — no Weisskopf-Wigner reduction.
//!
//! Physical decay (~10⁴ s⁻¹) against a femtosecond-resolved bath is not
//! integrable directly, so oracle runs use rescaled dimensionless systems
//! that preserve the Markov-validity hierarchy Γ ≪ bath bandwidth ≪ ω₀.
//! The per-mode coupling g = √(Γ·dω/π) reproduces the target amplitude
//! rate Γ through the golden rule with mode density 1/dω.

use num_complex::Complex64;

use crate::error::CoreError;

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive RK45 from t0 to t1, invoking `observe(t, y)` at every
/// requested sample time (steps land on them exactly).
fn rk45<F, O>(
    mut f: F,
    y0: Vec<Complex64>,
    t0: f64,
    t1: f64,
    samples: &[f64],
    rtol: f64,
    atol: f64,
    mut observe: O,
) -> Result<Vec<Complex64>, CoreError>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
    O: FnMut(f64, &[Complex64]),
{
    let dim = y0.len();
    let mut y = y0;
    let mut t = t0;
    let mut h = (t1 - t0) * 1e-3;
    let h_floor = (t1 - t0) * 1e-14;
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); dim]; 7];
    let mut ytmp = vec![Complex64::new(0.0, 0.0); dim];
    let mut sample_iter = samples.iter().copied().peekable();

    f(t, &y, &mut k[0]);
    if samples.first() == Some(&t0) {
        observe(t, &y);
        sample_iter.next();
    }

    let mut steps = 0usize;
    while t < t1 {
        steps += 1;
        if steps > 2_000_000 {
            return Err(CoreError::Convergence { what: "rk45 step budget".into(), t_ns: t });
        }
        let mut target = t1;
        if let Some(&s) = sample_iter.peek() {
            target = target.min(s);
        }
        let mut h_try = h.min(target - t).max(h_floor);

        loop {
            for s in 1..7 {
                for i in 0..dim {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, kj) in k.iter().enumerate().take(s) {
                        let a = A[s][j];
                        if a != 0.0 {
                            acc += a * kj[i];
                        }
                    }
                    ytmp[i] = y[i] + h_try * acc;
                }
                let (head, tail) = k.split_at_mut(s);
                let _ = head;
                f(t + C[s] * h_try, &ytmp, &mut tail[0]);
            }
            // 5th-order solution is the s=6 stage state (FSAL form):
            // ytmp currently holds y + h·Σ a7j kj = y5.
            let mut err = 0.0f64;
            for i in 0..dim {
                let mut eterm = Complex64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate() {
                    if E[j] != 0.0 {
                        eterm += E[j] * kj[i];
                    }
                }
                let scale = atol + rtol * y[i].norm().max(ytmp[i].norm());
                err += (h_try * eterm.norm() / scale).powi(2);
            }
            let err = (err / dim as f64).sqrt();
            if err <= 1.0 {
                t += h_try;
                y.copy_from_slice(&ytmp);
                k[0] = k[6].clone(); // FSAL
                let grow = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
                h = (h_try * grow.clamp(0.2, 5.0)).min(t1 - t0);
                break;
            }
            h_try *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h_try < h_floor {
                return Err(CoreError::StepUnderflow { t });
            }
        }

        while let Some(&s) = sample_iter.peek() {
            if s <= t * (1.0 + 1e-14) {
                observe(t, &y);
                sample_iter.next();
            } else {
                break;
            }
        }
    }
    Ok(y)
}

/// Optional photon-number-conserving transition terms (the ⟨n|ṁ⟩ pieces
/// the production path drops): a Gaussian pulse a(t) coupling c₀↔c₁ and
/// c₀ₖ↔c₁ₖ.
#[derive(Copy, Clone, Debug)]
pub struct PhotonConservingPulse {
    /// Peak of |⟨0|∂ₜ|1⟩|; equals r₀₁·ω₀ for the scaled system.
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl PhotonConservingPulse {
    fn eval(&self, t: f64) -> f64 {
        self.amplitude * (-((t - self.center) / self.width).powi(2)).exp()
    }
}

/// Rescaled two-level + discrete-bath scenario.
#[derive(Copy, Clone, Debug)]
pub struct ScaledBathConfig {
    /// Transition frequency (sets the fast phase of the number-conserving
    /// terms; the emission sector works in the rotating frame).
    pub omega0: f64,
    pub n_modes: usize,
    /// Modes span ω₀ ± half_width.
    pub half_width: f64,
    /// Target amplitude decay rate Γ (|c₁|² decays at 2Γ).
    pub gamma_amp: f64,
    /// Per-mode coupling override (single-mode Rabi tests).
    pub explicit_g: Option<f64>,
    pub t_max: f64,
    pub n_samples: usize,
    pub rtol: f64,
    pub atol: f64,
    pub photon_conserving: Option<PhotonConservingPulse>,
}

impl ScaledBathConfig {
    pub fn dense_bath(gamma_amp: f64, n_modes: usize, half_width: f64, t_max: f64) -> Self {
        Self {
            omega0: 10.0,
            n_modes,
            half_width,
            gamma_amp,
            explicit_g: None,
            t_max,
            n_samples: 121,
            rtol: 1e-10,
            atol: 1e-12,
            photon_conserving: None,
        }
    }
}

/// Trajectories from the direct integration.
#[derive(Clone, Debug)]
pub struct ModeEvolution {
    pub times: Vec<f64>,
    pub c1: Vec<Complex64>,
    /// Ground no-photon amplitude (only populated with the
    /// photon-conserving terms enabled).
    pub c0: Vec<Complex64>,
    pub mode_freqs: Vec<f64>,
    pub final_c0k: Vec<Complex64>,
    pub d_omega: f64,
    pub g_per_mode: f64,
    /// max |Σ|amplitudes|² − 1| over the samples.
    pub norm_drift: f64,
}

/// Integrate the coupled amplitude equations (rotating frame at ω₀):
/// ċ₁ = −i·g·Σⱼ c₀ₖⱼ e^{−iδⱼt}, ċ₀ₖⱼ = −i·g·c₁·e^{iδⱼt}; c₁(0) = 1.
pub fn discrete_mode_evolution(cfg: &ScaledBathConfig) -> Result<ModeEvolution, CoreError> {
    if cfg.n_modes == 0 || !(cfg.t_max > 0.0) {
        return Err(CoreError::Config { what: "need modes and a positive window".into() });
    }
    let n = cfg.n_modes;
    let (d_omega, deltas): (f64, Vec<f64>) = if n == 1 {
        (0.0, vec![0.0])
    } else {
        let dw = 2.0 * cfg.half_width / (n - 1) as f64;
        (dw, (0..n).map(|j| -cfg.half_width + j as f64 * dw).collect())
    };
    if n > 1 {
        let t_recur = 2.0 * std::f64::consts::PI / d_omega;
        if cfg.t_max > t_recur / 3.0 {
            return Err(CoreError::Recurrence { t_max: cfg.t_max, t_recur });
        }
    }
    let g = match cfg.explicit_g {
        Some(g) => g,
        None => {
            if n == 1 {
                return Err(CoreError::Config {
                    what: "single-mode runs need an explicit coupling".into(),
                });
            }
            (cfg.gamma_amp * d_omega / std::f64::consts::PI).sqrt()
        }
    };

    let with_pulse = cfg.photon_conserving.is_some();
    let pulse = cfg.photon_conserving;
    let omega0 = cfg.omega0;
    // Layout: [c0?, c1, c0k × n, c1k? × n]
    let dim = if with_pulse { 2 + 2 * n } else { 1 + n };
    let c1_idx = if with_pulse { 1 } else { 0 };
    let mut y0 = vec![Complex64::new(0.0, 0.0); dim];
    y0[c1_idx] = Complex64::new(1.0, 0.0);

    let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        for v in dy.iter_mut() {
            *v = Complex64::new(0.0, 0.0);
        }
        let i = Complex64::new(0.0, 1.0);
        let c1 = y[c1_idx];
        let base = c1_idx + 1;
        let mut sum = Complex64::new(0.0, 0.0);
        for (j, &dj) in deltas.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, dj * t);
            sum += y[base + j] * phase.conj();
            dy[base + j] = -i * g * c1 * phase;
        }
        dy[c1_idx] = -i * g * sum;
        if let Some(p) = pulse {
            let a = p.eval(t);
            let slow = Complex64::from_polar(1.0, -omega0 * t);
            let c0 = y[0];
            dy[0] += -a * c1 * slow;
            dy[c1_idx] += a * c0 * slow.conj();
            for j in 0..n {
                let c0k = y[base + j];
                let c1k = y[base + n + j];
                dy[base + j] += -a * c1k * slow;
                dy[base + n + j] += a * c0k * slow.conj();
            }
        }
    };

    let samples: Vec<f64> = (0..cfg.n_samples)
        .map(|i| cfg.t_max * i as f64 / (cfg.n_samples - 1).max(1) as f64)
        .collect();
    let mut times = Vec::with_capacity(samples.len());
    let mut c1_traj = Vec::with_capacity(samples.len());
    let mut c0_traj = Vec::with_capacity(samples.len());
    let mut norm_drift = 0.0f64;
    let yf = rk45(
        rhs,
        y0,
        0.0,
        cfg.t_max,
        &samples,
        cfg.rtol,
        cfg.atol,
        |t, y| {
            times.push(t);
            c1_traj.push(y[c1_idx]);
            if with_pulse {
                c0_traj.push(y[0]);
            }
            let norm: f64 = y.iter().map(|c| c.norm_sqr()).sum();
            norm_drift = norm_drift.max((norm - 1.0).abs());
        },
    )?;

    let base = c1_idx + 1;
    Ok(ModeEvolution {
        times,
        c1: c1_traj,
        c0: c0_traj,
        mode_freqs: deltas.iter().map(|d| omega0 + d).collect(),
        final_c0k: yf[base..base + n].to_vec(),
        d_omega,
        g_per_mode: g,
        norm_drift,
    })
}
