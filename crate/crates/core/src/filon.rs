//! Filon-type quadrature for ∫ F(t)·e^{iδt} dt with a slowly varying
//! complex envelope F and arbitrary δ.
//!
//! The envelope is sampled once on composite Gauss-Legendre panels and
//! expanded in Legendre polynomials; the oscillatory factor is integrated
//! exactly through the moments ∫₋₁¹ P_j(x)·e^{iθx} dx = 2·iʲ·j_j(θ), so a
//! single panelization serves every δ of a spectral grid. Panel sizes
//! adapt to the envelope's own phase/amplitude variation, never to δ.

use num_complex::Complex64;

use crate::error::CoreError;

/// Gauss-Legendre nodes and weights on [−1, 1], by Newton iteration on
/// P_n. Deterministic and accurate to machine precision.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_p_with_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_p_with_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, dp) = legendre_p_with_deriv(n, 0.0);
        weights[n / 2] = 2.0 / (dp * dp);
    }
    (nodes, weights)
}

/// (P_n(x), P_n'(x)) by the standard recurrences.
pub fn legendre_p_with_deriv(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut pm = 1.0;
    let mut p = x;
    for k in 1..n {
        let next = ((2 * k + 1) as f64 * x * p - k as f64 * pm) / (k + 1) as f64;
        pm = p;
        p = next;
    }
    let dp = n as f64 * (x * p - pm) / (x * x - 1.0);
    (p, dp)
}

/// P_0(x) .. P_nmax(x).
pub fn legendre_row(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(1.0);
    if nmax == 0 {
        return out;
    }
    out.push(x);
    for k in 1..nmax {
        let next = ((2 * k + 1) as f64 * x * out[k] - k as f64 * out[k - 1]) / (k + 1) as f64;
        out.push(next);
    }
    out
}

/// Spherical Bessel functions j_0(x) .. j_nmax(x) for x ≥ 0.
///
/// Series for small x, upward recurrence where it is stable (n ≲ x),
/// Miller's downward recurrence in between.
pub fn spherical_bessel_j(nmax: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0);
    if x < 1e-3 {
        return (0..=nmax).map(|n| sph_j_series(n, x)).collect();
    }
    if x > 1.5 * nmax as f64 + 5.0 {
        // Upward recurrence.
        let mut out = Vec::with_capacity(nmax + 1);
        let j0 = x.sin() / x;
        out.push(j0);
        if nmax >= 1 {
            out.push(x.sin() / (x * x) - x.cos() / x);
            for n in 1..nmax {
                let next = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
                out.push(next);
            }
        }
        return out;
    }
    // Miller's algorithm: downward recurrence from well above nmax,
    // normalized against the closed-form j0 (or j1 near a j0 zero).
    let start = nmax + 20 + x as usize;
    let mut fp1 = 0.0f64;
    let mut f = 1e-280f64;
    let mut saved = vec![0.0; nmax + 2];
    for n in (0..=start).rev() {
        let fm1 = (2 * n + 3) as f64 / x * f - fp1;
        fp1 = f;
        f = fm1;
        if n <= nmax + 1 {
            saved[n] = f;
        }
        if f.abs() > 1e250 {
            let scale = 1e-250;
            f *= scale;
            fp1 *= scale;
            for v in saved.iter_mut() {
                *v *= scale;
            }
        }
    }
    let j0 = x.sin() / x;
    let j1 = x.sin() / (x * x) - x.cos() / x;
    let scale = if j0.abs() * saved[1].abs() > j1.abs() * saved[0].abs() {
        j0 / saved[0]
    } else {
        j1 / saved[1]
    };
    saved[..=nmax].iter().map(|v| v * scale).collect()
}

fn sph_j_series(n: usize, x: f64) -> f64 {
    // j_n(x) = xⁿ/(2n+1)!! · Σ_k (−x²/2)ᵏ / (k!·(2n+2k+1)!!) · (2n+1)!!/(2n+1)!!…
    let mut lead = 1.0;
    for k in 0..n {
        lead *= x / (2 * k + 3) as f64;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let half_x2 = 0.5 * x * x;
    for k in 1..40 {
        term *= -half_x2 / (k as f64 * (2 * n + 2 * k + 1) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    lead * sum
}

/// ∫₋₁¹ P_j(x)·e^{iθx} dx for j = 0..order−1.
pub fn legendre_moments(order: usize, theta: f64) -> Vec<Complex64> {
    let jn = spherical_bessel_j(order.saturating_sub(1), theta.abs());
    let mut out = Vec::with_capacity(order);
    for (j, &bessel) in jn.iter().enumerate() {
        // 2·iʲ·j_j(θ); conjugate for θ < 0 since P_j is real.
        let ipow = match j % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        let m = 2.0 * ipow * bessel;
        out.push(if theta < 0.0 { m.conj() } else { m });
    }
    out
}

struct Panel {
    t_center: f64,
    half_width: f64,
    /// Index into the distinct-width table.
    width_class: usize,
    /// Legendre coefficients of the envelope on this panel.
    coeffs: Vec<Complex64>,
}

/// A reusable panelization of ∫_{t0}^{t1} F(t)·e^{iδt} dt over the
/// envelope F; `integral(δ)` is then cheap for any δ.
///
/// Panel widths are drawn from a √2-spaced ladder so that the moment
/// vectors (spherical Bessel evaluations, the expensive part) are shared
/// between all panels of a width class.
pub struct PanelSet {
    order: usize,
    panels: Vec<Panel>,
    distinct_half_widths: Vec<f64>,
    gl_nodes: Vec<f64>,
    gl_weights: Vec<f64>,
}

impl PanelSet {
    /// Panelize [t0, t1]. `envelope` supplies F(t); `variation_rate`
    /// bounds |dφ_F/dt| + |d ln|F||/dt locally, and each panel is sized so
    /// that rate·width stays below `budget` (with `h_cap` as an absolute
    /// ceiling).
    pub fn build<F, R>(
        t0: f64,
        t1: f64,
        order: usize,
        budget: f64,
        h_cap: f64,
        envelope: F,
        variation_rate: R,
    ) -> Result<Self, CoreError>
    where
        F: Fn(f64) -> Complex64,
        R: Fn(f64) -> f64,
    {
        if !(t1 > t0) || order < 4 || budget <= 0.0 || h_cap <= 0.0 {
            return Err(CoreError::Config { what: "bad panelization request".into() });
        }
        let (gl_nodes, gl_weights) = gauss_legendre(order);
        // Precompute P_j at the nodes for the coefficient projection.
        let pj_at_nodes: Vec<Vec<f64>> =
            gl_nodes.iter().map(|&x| legendre_row(order - 1, x)).collect();

        // Width ladder: h_cap·2^(−k/2), floored near 1e-9 of the span.
        let h_top = h_cap.min(t1 - t0);
        let h_min = (t1 - t0) * 1e-9;
        let n_rungs = (2.0 * (h_top / h_min).log2()).ceil() as usize + 1;
        let ladder: Vec<f64> =
            (0..n_rungs).map(|k| h_top * 2f64.powf(-(k as f64) / 2.0)).collect();

        let mut panels: Vec<Panel> = Vec::new();
        let mut used_widths: Vec<f64> = Vec::new();
        let mut t = t0;
        while t < t1 {
            let mut h = h_top.min(t1 - t);
            // Two refinement passes bound the rate over the trial panel.
            for _ in 0..2 {
                let r = variation_rate(t)
                    .max(variation_rate(t + 0.5 * h))
                    .max(variation_rate(t + h));
                if r * h > budget {
                    h = (budget / r).max(h_min);
                }
            }
            // Snap down to the ladder (the final short panel keeps its
            // exact remainder width).
            let mut h = *ladder
                .iter()
                .find(|&&rung| rung <= h * (1.0 + 1e-12))
                .unwrap_or(ladder.last().unwrap());
            if h > t1 - t {
                h = t1 - t;
            }
            let half_width = 0.5 * h;
            let width_class = match used_widths
                .iter()
                .position(|&w| (w - half_width).abs() <= 1e-14 * half_width)
            {
                Some(i) => i,
                None => {
                    used_widths.push(half_width);
                    used_widths.len() - 1
                }
            };
            let t_center = t + half_width;

            let fvals: Vec<Complex64> =
                gl_nodes.iter().map(|&x| envelope(t_center + half_width * x)).collect();
            let mut coeffs = vec![Complex64::new(0.0, 0.0); order];
            for (i, fv) in fvals.iter().enumerate() {
                let w = gl_weights[i];
                for (j, c) in coeffs.iter_mut().enumerate() {
                    *c += w * pj_at_nodes[i][j] * fv;
                }
            }
            for (j, c) in coeffs.iter_mut().enumerate() {
                *c *= (2.0 * j as f64 + 1.0) / 2.0;
            }
            panels.push(Panel { t_center, half_width, width_class, coeffs });
            t += h;
        }
        Ok(Self { order, panels, distinct_half_widths: used_widths, gl_nodes, gl_weights })
    }

    /// ∫ F(t)·e^{iδt} dt using the stored envelope expansion.
    pub fn integral(&self, delta: f64) -> Complex64 {
        // One moment vector per width class serves every panel in it.
        let moments: Vec<Vec<Complex64>> = self
            .distinct_half_widths
            .iter()
            .map(|&hw| legendre_moments(self.order, delta * hw))
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        for p in &self.panels {
            let m = &moments[p.width_class];
            let mut s = Complex64::new(0.0, 0.0);
            for (c, mj) in p.coeffs.iter().zip(m.iter()) {
                s += c * mj;
            }
            let phase = Complex64::from_polar(1.0, delta * p.t_center);
            total += p.half_width * phase * s;
        }
        total
    }

    /// Plain integral of the stored envelope itself (δ = 0).
    pub fn envelope_integral(&self) -> Complex64 {
        self.integral(0.0)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    pub fn node_count(&self) -> usize {
        self.panels.len() * self.order
    }

    /// Quadrature of g(t) over the same panels (fresh evaluations); used
    /// for integrands that share the panel resolution requirements.
    pub fn quadrature<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        let mut total = 0.0;
        for p in &self.panels {
            let mut s = 0.0;
            for (&x, &w) in self.gl_nodes.iter().zip(self.gl_weights.iter()) {
                s += w * g(p.t_center + p.half_width * x);
            }
            total += s * p.half_width;
        }
        total
    }
}
