//! Terms of the Kuznetsov trace formula for SL2(Z):
//!
//! ```text
//! sum_j h(t_j) lambda_j(m) lambda_j(n) / ||u_j||^2 = A + B + C
//! A = -(1/4 pi) int h(r) D_m(r) D_n(r) / (|zeta(1+2ir)|^2 sqrt(mn)) dr
//! B = delta_{m,n} (1/pi^2) int r tanh(r) h(r) dr
//! C = (2i/pi) sum_c S(m,n;c)/c int J_{2ir}(4 pi sqrt(mn)/c) r h(r)/cosh(pi r) dr
//! ```
//!
//! with `D_k(r) = sum_{ab=k} (a/b)^{ir}`. The `cosh(pi r)` factors of the
//! Eisenstein term cancel analytically, so A never sees exponential growth.
//! A carries the leading minus sign.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{divisor_pairs, kloosterman, KahanSum};
use crate::data::MaassData;
use crate::error::{DataError, Error, Result, SpecialError};
use crate::quadrature::{integrate_half_line_with, integrate_interval_with, QuadOptions};
use crate::specfun::{bessel_j_over_cosh, zeta_edge, BESSEL_MAX_X};
use crate::testfun::{base_bump, base_bump_hat, WeightFunction, WeightKind};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Numerical settings for trace-formula terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    /// Quadrature settings (tolerances are absolute and relative).
    pub quad: QuadOptions,
    /// Integrals involving zeta or Bessel functions are truncated where the
    /// weight drops below this fraction of its peak.
    pub truncation_eps: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            quad: QuadOptions {
                abs_tol: 1e-10,
                rel_tol: 1e-12,
                ..QuadOptions::default()
            },
            truncation_eps: 1e-12,
        }
    }
}

fn panel_cap(w: &WeightFunction) -> f64 {
    match w.kind {
        WeightKind::Gaussian => 0.5 * w.t,
        WeightKind::TwoBump => w.width(),
    }
}

/// (1/pi^2) int_R r tanh(r) h_T(r) dr.
pub fn tanh_integral(w: &WeightFunction, opts: &QuadOptions) -> Result<f64> {
    let mut o = opts.clone();
    o.max_panel_width = Some(o.max_panel_width.unwrap_or(f64::INFINITY).min(panel_cap(w)));
    let half = integrate_half_line_with(
        |r| Complex64::new(r * r.tanh() * w.eval(r), 0.0),
        w.decay_radius,
        &o,
    )?;
    Ok(2.0 * half.value.re / (PI * PI))
}

/// delta_{m,n} times [`tanh_integral`].
pub fn b_term(m: u64, n: u64, w: &WeightFunction, opts: &QuadOptions) -> Result<f64> {
    if m == n {
        tanh_integral(w, opts)
    } else {
        Ok(0.0)
    }
}

/// Accepts 1, p and p^2 for primes p.
fn check_a_term_index(k: u64) -> Result<()> {
    if k == 0 {
        return Err(Error::Config("A-term indices must be positive".into()));
    }
    if k == 1 {
        return Ok(());
    }
    let pairs = divisor_pairs(k)?;
    // p has 2 divisors, p^2 has 3 with the middle one prime
    let ok = match pairs.len() {
        2 => true,
        3 => pairs[1].0 == pairs[1].1,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "A-term index {k} is not 1, a prime, or the square of a prime"
        )))
    }
}

/// D_k(r) = sum_{ab = k} (a/b)^{ir}, which is real and even in r.
pub fn divisor_phase_sum(k: u64, r: f64) -> f64 {
    divisor_pairs(k)
        .expect("k >= 1")
        .into_iter()
        .map(|(a, b)| (r * (a as f64 / b as f64).ln()).cos())
        .sum()
}

/// Integrand of A before the -(1/4 pi) prefactor:
/// h(r) D_m(r) D_n(r) / (|zeta(1+2ir)|^2 sqrt(mn)), defined as 0 at r = 0.
pub fn a_term_integrand(m: u64, n: u64, w: &WeightFunction, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let z = zeta_edge(r).expect("r != 0").norm_sqr();
    w.eval(r) * divisor_phase_sum(m, r) * divisor_phase_sum(n, r) / (z * ((m * n) as f64).sqrt())
}

/// The continuous-spectrum term A (including its minus sign).
///
/// Only m, n in {1, p, p^2} are accepted. The integral is truncated where
/// the weight drops below `truncation_eps` of its peak, since zeta costs
/// O(|r|) per evaluation.
pub fn a_term(m: u64, n: u64, w: &WeightFunction, opts: &TraceOptions) -> Result<f64> {
    check_a_term_index(m)?;
    check_a_term_index(n)?;
    let radius = w.decay_radius_for(opts.truncation_eps);
    let freq = (m.max(n) as f64).ln().max(1.0);
    let cap = panel_cap(w).min(0.5 * PI / freq);
    let mut o = opts.quad.clone();
    o.max_panel_width = Some(o.max_panel_width.unwrap_or(f64::INFINITY).min(cap));
    let start = match w.kind {
        WeightKind::Gaussian => 0.0,
        WeightKind::TwoBump => (w.t - (radius - w.t)).max(0.0),
    };
    let f = |r: f64| Complex64::new(a_term_integrand(m, n, w, r), 0.0);
    let mut total = integrate_interval_with(f, start, radius, &o)?.value.re;
    if start > 0.0 {
        // below the window the weight is under eps; keep the near-zero part cheap
        total += integrate_interval_with(f, 0.0, start, &o)?.value.re;
    }
    // integrand is even
    Ok(-2.0 * total / (4.0 * PI))
}

/// Argument 4 pi sqrt(mn) / c of the Bessel function, checked against the
/// series region.
fn bessel_argument(c: u64, m: u64, n: u64) -> Result<f64> {
    if c == 0 || m == 0 || n == 0 {
        return Err(Error::Config("c, m, n must be positive".into()));
    }
    let x = 4.0 * PI * ((m * n) as f64).sqrt() / c as f64;
    if x > BESSEL_MAX_X {
        return Err(SpecialError::Range {
            func: "bessel_kloosterman_integral",
            detail: format!(
                "c = {c}: argument 4 pi sqrt({}) / c = {x:.4} exceeds {BESSEL_MAX_X}",
                m * n
            ),
        }
        .into());
    }
    Ok(x)
}

/// Panel width resolving the phase 2r log(x/2) - arg Gamma(1+2ir), whose
/// derivative is about 2 log(x / 4r), on [0, r_max].
fn bessel_panel_cap(x: f64, r_max: f64) -> f64 {
    let far = (2.0 * (4.0 * r_max / x).ln()).abs();
    let near = (2.0 * ((0.5 * x).ln() + EULER_GAMMA)).abs();
    let freq = far.max(near).max(1.0);
    0.25 * 2.0 * PI / freq
}

/// Integration window [a, b] on r >= 0 outside which the weight is below
/// `eps` of its peak.
fn weight_window(w: &WeightFunction, eps: f64) -> (f64, f64) {
    let b = w.decay_radius_for(eps);
    match w.kind {
        WeightKind::Gaussian => (0.0, b),
        WeightKind::TwoBump => ((2.0 * w.t - b).max(0.0), b),
    }
}

/// I_c = int_R J_{2ir}(4 pi sqrt(mn)/c) r h_T(r) / cosh(pi r) dr for the
/// weight `w`.
///
/// The integrand at -r is minus the conjugate of the integrand at r, so the
/// result is 2i int_0^inf Im(...) dr: purely imaginary by construction.
pub fn bessel_kloosterman_integral(
    c: u64,
    m: u64,
    n: u64,
    w: &WeightFunction,
    opts: &TraceOptions,
) -> Result<Complex64> {
    let x = bessel_argument(c, m, n)?;
    let (a, b) = weight_window(w, opts.truncation_eps);
    let mut o = opts.quad.clone();
    let cap = bessel_panel_cap(x, b).min(panel_cap(w));
    o.max_panel_width = Some(o.max_panel_width.unwrap_or(f64::INFINITY).min(cap));
    let f = |r: f64| {
        let j = bessel_j_over_cosh(r, x).expect("x in series region");
        Complex64::new((j * r * w.eval(r)).im, 0.0)
    };
    let half = integrate_interval_with(f, a, b, &o)?;
    Ok(Complex64::new(0.0, 2.0 * half.value.re))
}

/// The single-bump integral with h((r - T)/L) in place of the weight, which
/// is what the asymptotic main term describes. For the two-bump weight
/// I_c(weight) = (I - conj(I)) / 2 = i Im(I).
pub fn bump_bessel_integral(
    c: u64,
    m: u64,
    n: u64,
    t: f64,
    l: f64,
    opts: &TraceOptions,
) -> Result<Complex64> {
    let x = bessel_argument(c, m, n)?;
    let reach = l * (32.0 / (PI.powi(4) * opts.truncation_eps)).powf(0.25);
    let (a, b) = (t - reach, t + reach);
    let mut o = opts.quad.clone();
    let cap = bessel_panel_cap(x, b.max(a.abs())).min(l);
    o.max_panel_width = Some(o.max_panel_width.unwrap_or(f64::INFINITY).min(cap));
    let f = |r: f64| {
        let j = bessel_j_over_cosh(r, x).expect("x in series region");
        j * (r * base_bump((r - t) / l))
    };
    Ok(integrate_interval_with(f, a, b, &o)?.value)
}

/// The stationary-phase main term
/// `T^{1/2} e^{-2iT} e^{-2iT log(cT/(pi sqrt(mn)))} / sqrt(pi i) * L h^((L/pi) log(cT/(pi sqrt(mn))))`,
/// with the principal branch sqrt(pi i) = sqrt(pi) e^{i pi/4}. Exactly zero
/// once the argument of h^ leaves (-1, 1).
pub fn bessel_kloosterman_main_term(c: u64, m: u64, n: u64, t: f64, l: f64) -> Complex64 {
    let log_ratio = (c as f64 * t / (PI * ((m * n) as f64).sqrt())).ln();
    let hat = base_bump_hat(l / PI * log_ratio);
    if hat == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let phase = -2.0 * t * (1.0 + log_ratio) - 0.25 * PI;
    Complex64::from_polar(t.sqrt() * l * hat / PI.sqrt(), phase)
}

/// pi sqrt(mn) e^{pi/L} / T: moduli above this have vanishing main term.
pub fn c_cutoff(m: u64, n: u64, t: f64, l: f64) -> f64 {
    PI * ((m * n) as f64).sqrt() * (PI / l).exp() / t
}

/// Default number of moduli: max(10, 4 ceil(c_cutoff)) for two-bump
/// weights, 10 for the Gaussian.
pub fn default_c_max(m: u64, n: u64, w: &WeightFunction) -> u64 {
    match w.kind {
        WeightKind::TwoBump => {
            let cut = c_cutoff(m, n, w.t, w.width()).ceil();
            if cut.is_finite() && cut < 1e9 {
                (4 * cut as u64).max(10)
            } else {
                u64::MAX
            }
        }
        WeightKind::Gaussian => 10,
    }
}

/// The Kloosterman term C truncated at `c_max`.
#[derive(Debug, Clone, Serialize)]
pub struct CTerm {
    /// Real part of C (the imaginary part vanishes by parity).
    pub value: f64,
    pub imag: f64,
    /// Largest modulus actually summed.
    pub c_max_used: u64,
    /// True when the sum stopped early on three negligible terms.
    pub early_stop: bool,
    /// Per-modulus contributions (2i/pi) S(m,n;c)/c I_c, real parts.
    pub terms: Vec<f64>,
    /// Moduli above the two-bump cutoff whose Bessel argument lies outside
    /// the series region; their main term vanishes and they are omitted.
    pub skipped: Vec<u64>,
}

/// C = (2i/pi) sum_{c <= c_max} S(m,n;c)/c I_c.
///
/// Past the two-bump cutoff the sum stops once three consecutive terms are
/// below 1e-12 of the running scale. Moduli past the cutoff whose Bessel
/// argument exceeds the series region are skipped and listed; below the
/// cutoff (or for the Gaussian) they are a range error.
pub fn c_term(
    m: u64,
    n: u64,
    w: &WeightFunction,
    c_max: u64,
    opts: &TraceOptions,
) -> Result<CTerm> {
    if c_max == 0 {
        return Err(Error::Config("c_max must be at least 1".into()));
    }
    let cutoff = match w.kind {
        WeightKind::TwoBump => c_cutoff(m, n, w.t, w.width()),
        WeightKind::Gaussian => f64::INFINITY,
    };
    let mut acc_re = KahanSum::default();
    let mut acc_im = KahanSum::default();
    let mut terms = Vec::new();
    let mut scale: f64 = 0.0;
    let mut quiet = 0;
    let mut used = 0;
    let mut early_stop = false;
    let mut skipped = Vec::new();
    for c in 1..=c_max {
        let s = kloosterman(m as i64, n as i64, c)?.value;
        let outside = bessel_argument(c, m, n).is_err();
        if outside && (c as f64) > cutoff {
            skipped.push(c);
            terms.push(0.0);
            used = c;
            continue;
        }
        let term = if s == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            let i_c = bessel_kloosterman_integral(c, m, n, w, opts)?;
            Complex64::new(0.0, 2.0 / PI) * (s / c as f64) * i_c
        };
        acc_re.add(term.re);
        acc_im.add(term.im);
        terms.push(term.re);
        used = c;
        scale = scale.max(term.norm()).max(acc_re.value().abs());
        if term.norm() < 1e-12 * scale {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if (c as f64) > cutoff && quiet >= 3 && c < c_max {
            early_stop = true;
            break;
        }
    }
    Ok(CTerm {
        value: acc_re.value(),
        imag: acc_im.value(),
        c_max_used: used,
        early_stop,
        terms,
        skipped,
    })
}

/// Scale (mn)^{3/8} L^2 T^{3(1-eta)/2} / c^{3/4} bounding I_c for large c.
pub fn large_c_bound(c: u64, m: u64, n: u64, t: f64, l: f64, eta: f64) -> f64 {
    ((m * n) as f64).powf(0.375) * l * l * t.powf(1.5 * (1.0 - eta)) / (c as f64).powf(0.75)
}

/// One point of the large-c calibration grid.
#[derive(Debug, Clone, Serialize)]
pub struct LargeCPoint {
    pub c: u64,
    #[serde(rename = "T")]
    pub t: f64,
    pub integral_abs: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Calibration of the constant K in |I_c| <= K * large_c_bound.
#[derive(Debug, Clone, Serialize)]
pub struct LargeCReport {
    pub points: Vec<LargeCPoint>,
    /// max |I_c| / bound over the grid.
    pub k: f64,
}

/// Evaluates |I_c| / large_c_bound over a (c, T) grid for two-bump weights
/// of width `l` and exponent `eta`.
pub fn calibrate_large_c(
    cs: &[u64],
    ts: &[f64],
    m: u64,
    n: u64,
    l: f64,
    eta: f64,
    opts: &TraceOptions,
) -> Result<LargeCReport> {
    let mut points = Vec::new();
    for &t in ts {
        let w = crate::testfun::make_twobump_weight(t, l, eta)?;
        for &c in cs {
            let v = bessel_kloosterman_integral(c, m, n, &w, opts)?.norm();
            let bound = large_c_bound(c, m, n, t, l, eta);
            points.push(LargeCPoint {
                c,
                t,
                integral_abs: v,
                bound,
                ratio: v / bound,
            });
        }
    }
    let k = points.iter().map(|p| p.ratio).fold(0.0, f64::max);
    Ok(LargeCReport { points, k })
}

/// sum_j h(t_j) lambda_j(m) lambda_j(n) / ||u_j||^2 in ascending t order.
pub fn spectral_side(data: &MaassData, m: u64, n: u64, w: &WeightFunction) -> Result<f64> {
    let mut acc = KahanSum::default();
    for (i, f) in data.forms.iter().enumerate() {
        let lm = f.lambda(m).ok_or_else(|| DataError::Missing {
            form: i,
            what: format!("lambda({m})"),
        })?;
        let ln = f.lambda(n).ok_or_else(|| DataError::Missing {
            form: i,
            what: format!("lambda({n})"),
        })?;
        acc.add(w.eval(f.t) * lm * ln / f.norm_sq);
    }
    Ok(acc.value())
}

/// Both sides of the trace formula for one (m, n, h).
#[derive(Debug, Clone, Serialize)]
pub struct TraceReport {
    pub m: u64,
    pub n: u64,
    pub spectral_side: f64,
    pub a_term: f64,
    pub b_term: f64,
    pub c_term: f64,
    /// |spectral_side - (A + B + C)|.
    pub residual: f64,
    /// residual / max(|B|, 1).
    pub relative_residual: f64,
    pub c_max_used: u64,
    pub data_forms_used: usize,
    pub c_term_imag: f64,
    pub c_term_early_stop: bool,
    /// Moduli omitted from C, see [`c_term`].
    pub c_term_skipped: Vec<u64>,
    /// Per-modulus contributions to C.
    pub c_terms: Vec<f64>,
    /// |C(2 c_max) - C(c_max)| / |C(c_max)| when requested.
    pub c_term_doubling_change: Option<f64>,
    pub sign_convention: &'static str,
}

/// Assembles all terms with spectral_side = A + B + C.
pub fn verify_trace(
    data: &MaassData,
    m: u64,
    n: u64,
    w: &WeightFunction,
    c_max: Option<u64>,
    check_doubling: bool,
    opts: &TraceOptions,
) -> Result<TraceReport> {
    let spectral = spectral_side(data, m, n, w)?;
    let a = a_term(m, n, w, opts)?;
    let b = b_term(m, n, w, &opts.quad)?;
    let c_max = c_max.unwrap_or_else(|| default_c_max(m, n, w));
    let c = c_term(m, n, w, c_max, opts)?;
    let doubling = if check_doubling {
        let wide = c_term(m, n, w, c_max.saturating_mul(2), opts)?;
        Some((wide.value - c.value).abs() / c.value.abs())
    } else {
        None
    };
    let residual = (spectral - (a + b + c.value)).abs();
    Ok(TraceReport {
        m,
        n,
        spectral_side: spectral,
        a_term: a,
        b_term: b,
        c_term: c.value,
        residual,
        relative_residual: residual / b.abs().max(1.0),
        c_max_used: c.c_max_used,
        data_forms_used: data.forms.len(),
        c_term_imag: c.imag,
        c_term_early_stop: c.early_stop,
        c_term_skipped: c.skipped.clone(),
        c_terms: c.terms.clone(),
        c_term_doubling_change: doubling,
        sign_convention: "spectral_side = A + B + C, with A carrying the leading minus sign",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfun::{make_gaussian_weight, make_twobump_weight};

    #[test]
    fn cutoff_arithmetic() {
        assert!((c_cutoff(1, 1, 50.0, 2.0) - 0.302_3).abs() < 1e-4);
        assert!((c_cutoff(2, 2, 50.0, 2.0) - 2.0 * c_cutoff(1, 1, 50.0, 2.0)).abs() < 1e-15);
        assert!((c_cutoff(1, 1, 100.0, 2.0) - 0.5 * c_cutoff(1, 1, 50.0, 2.0)).abs() < 1e-15);
        assert!((c_cutoff(1, 1, 2000.0, 1.0) - 0.036_4).abs() < 1e-4);
    }

    #[test]
    fn main_term_vanishes_past_cutoff() {
        assert_eq!(
            bessel_kloosterman_main_term(1, 1, 1, 2000.0, 1.0),
            Complex64::new(0.0, 0.0)
        );
        // at log(cT/pi sqrt(mn)) = 0 the hat factor is 1
        let t = PI;
        let v = bessel_kloosterman_main_term(1, 1, 1, t, 1.0);
        assert!((v.norm() - t.sqrt() / PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn large_c_bound_shape() {
        assert_eq!(large_c_bound(1, 1, 1, 123.0, 1.0, 1.0), 1.0);
        assert!(
            large_c_bound(10, 1, 1, 100.0, 2.0, 0.5) > large_c_bound(11, 1, 1, 100.0, 2.0, 0.5)
        );
    }

    #[test]
    fn b_term_delta_and_index_rules() {
        let w = make_gaussian_weight(10.0).unwrap();
        let opts = TraceOptions::default();
        assert_eq!(b_term(2, 3, &w, &opts.quad).unwrap(), 0.0);
        assert!(a_term(6, 1, &w, &opts).is_err());
        assert!(a_term(8, 1, &w, &opts).is_err());
        assert!(check_a_term_index(9).is_ok() && check_a_term_index(7).is_ok());
        assert_eq!(a_term_integrand(1, 1, &w, 0.0), 0.0);
    }

    #[test]
    fn divisor_phase_sums() {
        let r = 0.7;
        assert_eq!(divisor_phase_sum(1, r), 1.0);
        assert!((divisor_phase_sum(5, r) - 2.0 * (r * 5f64.ln()).cos()).abs() < 1e-15);
        assert!(
            (divisor_phase_sum(9, r) - (1.0 + 2.0 * (2.0 * r * 3f64.ln()).cos())).abs() < 1e-14
        );
    }

    #[test]
    fn bessel_argument_region() {
        let w = make_twobump_weight(50.0, 2.0, 0.5).unwrap();
        let e = bessel_kloosterman_integral(1, 3, 3, &w, &TraceOptions::default()).unwrap_err();
        assert!(e.to_string().contains("c = 1"), "{e}");
    }

    #[test]
    fn spectral_side_single_form() {
        let w = make_gaussian_weight(10.0).unwrap();
        let mut data = MaassData::empty();
        assert_eq!(spectral_side(&data, 2, 3, &w).unwrap(), 0.0);
        let mut hecke = std::collections::BTreeMap::new();
        hecke.insert(1, 1.0);
        hecke.insert(2, 2.0);
        hecke.insert(3, 3.0);
        data.forms.push(crate::data::MaassFormRecord {
            t: 10.0,
            parity: 0,
            sign: 1,
            norm_sq: 4.0,
            hecke,
            zeros: None,
            zero_window: None,
        });
        let v = spectral_side(&data, 2, 3, &w).unwrap();
        assert!((v - (-1.0f64).exp() * 6.0 / 4.0).abs() < 1e-15);
        assert!(spectral_side(&data, 5, 1, &w).is_err());
    }
}
