//! Spectral weights and band-limited test functions with closed-form
//! Fourier pairs.
//!
//! Fourier transforms use the convention `f^(y) = int f(x) e^{-2 pi i x y} dx`.
//!
//! The two-bump weight is built from the base bump
//! `h(x) = (3/4) (sin(pi x / 2) / (pi x / 2))^4`, whose transform is
//! `h^(y) = (3/2) M4(2y)` with `M4` the centred cubic B-spline. It integrates
//! to 1, has `h^` supported on [-1, 1] and decays like `x^-4`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction of the peak below which weights are treated as zero when
/// choosing integration radii.
pub const DEFAULT_DECAY_EPS: f64 = 1e-18;

/// sin(u)/u with the removable singularity filled in.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

/// Centred cubic B-spline, supported on [-2, 2] with unit integral.
pub fn cubic_bspline(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        2.0 / 3.0 - a * a + 0.5 * a * a * a
    } else if a < 2.0 {
        let b = 2.0 - a;
        b * b * b / 6.0
    } else {
        0.0
    }
}

/// Base bump h(x) = (3/4) sinc(pi x / 2)^4.
pub fn base_bump(x: f64) -> f64 {
    let s = sinc(0.5 * PI * x);
    let s2 = s * s;
    0.75 * s2 * s2
}

/// Fourier transform of [`base_bump`]: (3/2) M4(2y), zero for |y| >= 1.
pub fn base_bump_hat(y: f64) -> f64 {
    1.5 * cubic_bspline(2.0 * y)
}

/// An even test function whose Fourier transform is supported in (-sigma, sigma).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// phi^(y) = max(0, 1 - |y|/sigma), phi(x) = sigma sinc^2(pi sigma x).
    Triangle { sigma: f64 },
}

/// Triangle test function with Fourier support radius `sigma`.
pub fn make_triangle_testfun(sigma: f64) -> Result<TestFunction> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Config(format!(
            "test function support sigma = {sigma} must be positive"
        )));
    }
    Ok(TestFunction::Triangle { sigma })
}

impl TestFunction {
    pub fn sigma(&self) -> f64 {
        match *self {
            TestFunction::Triangle { sigma } => sigma,
        }
    }

    /// phi(x).
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Triangle { sigma } => {
                let s = sinc(PI * sigma * x);
                sigma * s * s
            }
        }
    }

    /// phi^(y).
    pub fn eval_hat(&self, y: f64) -> f64 {
        match *self {
            TestFunction::Triangle { sigma } => (1.0 - y.abs() / sigma).max(0.0),
        }
    }

    /// phi(0).
    pub fn value_at_zero(&self) -> f64 {
        self.eval(0.0)
    }

    /// phi^(0) = int phi.
    pub fn hat_at_zero(&self) -> f64 {
        self.eval_hat(0.0)
    }

    /// Upper bound on |phi(x)| for large |x|, used to size truncation radii.
    pub fn envelope(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Triangle { sigma } => 1.0 / (PI * PI * sigma * x * x),
        }
    }

    /// The leading large-|x| behaviour of phi averaged over oscillations:
    /// phi(x) ~ 1/(2 pi^2 sigma x^2).
    pub fn mean_tail(&self, x: f64) -> f64 {
        0.5 * self.envelope(x)
    }
}

/// Family of the spectral weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Gaussian,
    TwoBump,
}

/// An even spectral weight h_T(r).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    pub kind: WeightKind,
    #[serde(rename = "T")]
    pub t: f64,
    /// Bump width (two-bump only).
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    /// Width exponent (two-bump only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Radius beyond which the weight is below 1e-18 of its peak.
    pub decay_radius: f64,
}

/// Gaussian weight exp(-r^2 / T^2).
pub fn make_gaussian_weight(t: f64) -> Result<WeightFunction> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Config(format!(
            "gaussian weight needs T > 0, got T = {t}"
        )));
    }
    let mut w = WeightFunction {
        kind: WeightKind::Gaussian,
        t,
        l: None,
        eta: None,
        decay_radius: 0.0,
    };
    w.decay_radius = w.decay_radius_for(DEFAULT_DECAY_EPS);
    Ok(w)
}

/// Two-bump weight (h((r - T)/L) + h((r + T)/L)) / 2, subject to
/// pi / (2 log T) < (1 - eta) L.
pub fn make_twobump_weight(t: f64, l: f64, eta: f64) -> Result<WeightFunction> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::Config(format!(
            "two-bump weight needs T > 1, got T = {t}"
        )));
    }
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::Config(format!(
            "two-bump weight needs L > 0, got L = {l}"
        )));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Config(format!(
            "two-bump weight needs 0 < eta < 1, got eta = {eta}"
        )));
    }
    let lhs = PI / (2.0 * t.ln());
    let rhs = (1.0 - eta) * l;
    if !(lhs < rhs) {
        return Err(Error::Config(format!(
            "constraint pi/(2 log T) < (1 - eta) L fails: {lhs:.6} >= {rhs:.6} (T = {t}, L = {l}, eta = {eta})"
        )));
    }
    let mut w = WeightFunction {
        kind: WeightKind::TwoBump,
        t,
        l: Some(l),
        eta: Some(eta),
        decay_radius: 0.0,
    };
    w.decay_radius = w.decay_radius_for(DEFAULT_DECAY_EPS);
    Ok(w)
}

impl WeightFunction {
    /// Bump width L (1 for the Gaussian, which has none).
    pub fn width(&self) -> f64 {
        self.l.unwrap_or(1.0)
    }

    /// h_T(r).
    pub fn eval(&self, r: f64) -> f64 {
        match self.kind {
            WeightKind::Gaussian => {
                let u = r / self.t;
                (-u * u).exp()
            }
            WeightKind::TwoBump => {
                let l = self.width();
                0.5 * base_bump((r - self.t) / l) + 0.5 * base_bump((r + self.t) / l)
            }
        }
    }

    /// Largest value of the weight.
    pub fn peak(&self) -> f64 {
        match self.kind {
            WeightKind::Gaussian => 1.0,
            WeightKind::TwoBump => 0.375,
        }
    }

    /// Radius beyond which |h_T(r)| < eps * peak.
    pub fn decay_radius_for(&self, eps: f64) -> f64 {
        match self.kind {
            WeightKind::Gaussian => self.t * (-eps.ln()).max(0.0).sqrt(),
            WeightKind::TwoBump => {
                // each bump tail is at most 6/(pi^4 x^4), the peak is 3/8
                let l = self.width();
                self.t + l * (32.0 / (PI.powi(4) * eps)).powf(0.25)
            }
        }
    }

    /// Upper bound on h_T(r) for |r| beyond the bump centres.
    pub fn envelope(&self, r: f64) -> f64 {
        match self.kind {
            WeightKind::Gaussian => self.eval(r),
            WeightKind::TwoBump => {
                let l = self.width();
                let a = r.abs();
                let bound = |x: f64| {
                    if x.abs() < 1.0 {
                        0.75
                    } else {
                        (12.0 / PI.powi(4) / x.powi(4)).min(0.75)
                    }
                };
                0.5 * bound((a - self.t) / l) + 0.5 * bound((a + self.t) / l)
            }
        }
    }
}
