//! Natural cubic spline with analytic derivative and integral.
//!
//! The dynamics path needs smooth interpolation of the trajectory-scan
//! arrays plus exact integrals of the interpolant (the accumulated phase
//! ∫Δ ds must be far more accurate than any sampled Riemann sum), so the
//! spline exposes closed-form per-segment antiderivatives.

use crate::error::CoreError;

#[derive(Clone, Debug)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Polynomial coefficients per segment: y(s) = a + b s + c s² + d s³,
    /// s = x − x_i.
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
    /// Cumulative integral from x[0] to each knot.
    cumint: Vec<f64>,
}

impl CubicSpline {
    /// Build a natural cubic spline through (x, y). `x` must be strictly
    /// increasing with at least two points.
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self, CoreError> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(CoreError::Config { what: "spline needs >= 2 matching knots".into() });
        }
        for w in x.windows(2) {
            if !(w[1] > w[0]) {
                return Err(CoreError::Config { what: "spline knots must be strictly increasing".into() });
            }
        }

        // Second derivatives m[i] from the natural-boundary tridiagonal system.
        let mut m = vec![0.0; n];
        if n > 2 {
            let mut diag = vec![0.0; n - 2];
            let mut rhs = vec![0.0; n - 2];
            let mut sub = vec![0.0; n - 2];
            let mut sup = vec![0.0; n - 2];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                sub[i - 1] = h0;
                diag[i - 1] = 2.0 * (h0 + h1);
                sup[i - 1] = h1;
                rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            }
            // Thomas algorithm.
            for i in 1..n - 2 {
                let w = sub[i] / diag[i - 1];
                diag[i] -= w * sup[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            let mut sol = vec![0.0; n - 2];
            sol[n - 3] = rhs[n - 3] / diag[n - 3];
            for i in (0..n - 3).rev() {
                sol[i] = (rhs[i] - sup[i] * sol[i + 1]) / diag[i];
            }
            m[1..n - 1].copy_from_slice(&sol);
        }

        let mut b = vec![0.0; n - 1];
        let mut c = vec![0.0; n - 1];
        let mut d = vec![0.0; n - 1];
        for i in 0..n - 1 {
            let h = x[i + 1] - x[i];
            b[i] = (y[i + 1] - y[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0;
            c[i] = m[i] / 2.0;
            d[i] = (m[i + 1] - m[i]) / (6.0 * h);
        }

        let mut cumint = vec![0.0; n];
        for i in 0..n - 1 {
            let h = x[i + 1] - x[i];
            let seg = (y[i] + (b[i] / 2.0 + (c[i] / 3.0 + d[i] / 4.0 * h) * h) * h) * h;
            cumint[i + 1] = cumint[i] + seg;
        }

        Ok(Self { x: x.to_vec(), y: y.to_vec(), b, c, d, cumint })
    }

    fn segment(&self, t: f64) -> usize {
        // Clamped extrapolation uses the first/last segment polynomial.
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.x.len() - 2),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let s = t - self.x[i];
        self.y[i] + (self.b[i] + (self.c[i] + self.d[i] * s) * s) * s
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let s = t - self.x[i];
        self.b[i] + (2.0 * self.c[i] + 3.0 * self.d[i] * s) * s
    }

    /// Exact integral of the interpolant from the first knot to `t`.
    pub fn integral_from_start(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let s = t - self.x[i];
        self.cumint[i]
            + (self.y[i] + (self.b[i] / 2.0 + (self.c[i] / 3.0 + self.d[i] / 4.0 * s) * s) * s) * s
    }

    /// Exact integral of the interpolant over [a, b].
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.integral_from_start(b) - self.integral_from_start(a)
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.x.last().unwrap()
    }
}
