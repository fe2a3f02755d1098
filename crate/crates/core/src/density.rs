//! The explicit-formula side of the 1- and 2-level densities.
//!
//! For a single form with spectral parameter t and scaling parameter R,
//!
//! ```text
//! D1(u; phi) = phi^(0) log(1 + t^2)/log R + phi(0)/2 - S1 - S2 + O(loglog R / log R)
//! S1 = sum_p 2 lambda(p) log p / (sqrt(p) log R) phi^(log p / log R)
//! S2 = sum_p 2 lambda(p^2) log p / (p log R) phi^(2 log p / log R)
//! ```
//!
//! Family averages weight form j by h_T(t_j)/||u_j||^2 and take R = T^2.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{prime_sum, sieve_primes, KahanSum};
use crate::data::{MaassData, MaassFormRecord};
use crate::error::{DataError, Error, Result};
use crate::quadrature::{integrate_real, QuadOptions};
use crate::specfun::digamma_unchecked;
use crate::testfun::{TestFunction, WeightFunction, WeightKind};

/// Weights below this are treated as absent when averaging over a family.
pub const MIN_FAMILY_WEIGHT: f64 = 1e-15;

/// Exponent bound towards Ramanujan used for the Satake tail estimate.
pub const KIM_SARNAK_DELTA: f64 = 7.0 / 64.0;

/// R = T^2.
pub fn scaling_r(t: f64) -> Result<f64> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::Config(format!(
            "scaling parameter needs T > 1, got T = {t}"
        )));
    }
    Ok(t * t)
}

/// Roots (alpha, beta) of x^2 - lambda x + 1.
pub fn satake(lambda_p: f64) -> (Complex64, Complex64) {
    let half = 0.5 * lambda_p;
    let disc = half * half - 1.0;
    if disc < 0.0 {
        let im = (-disc).sqrt();
        (Complex64::new(half, im), Complex64::new(half, -im))
    } else {
        let s = disc.sqrt();
        (Complex64::new(half + s, 0.0), Complex64::new(half - s, 0.0))
    }
}

/// lambda(p^2) = lambda(p)^2 - 1.
pub fn hecke_p2(lambda_p: f64) -> f64 {
    lambda_p * lambda_p - 1.0
}

/// Partial sum over p <= limit of sum_{k>=3} p^{k(delta - 1/2)}, which bounds
/// the Satake terms dropped from the explicit formula (without the log p
/// weights) under |alpha|, |beta| <= p^delta.
pub fn satake_tail_partial_sum(limit: u64, delta: f64) -> f64 {
    prime_sum(limit, |p| {
        let x = (p as f64).powf(delta - 0.5);
        x * x * x / (1.0 - x)
    })
}

/// Gamma-factor contribution to the explicit formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaTerm {
    /// (1/pi) int Re G(y) phi(y log R / 2 pi) dy by quadrature.
    pub exact: f64,
    /// phi^(0) log(1 + t^2) / log R.
    pub approx: f64,
    pub difference: f64,
}

fn gamma_kernel(t: f64, parity: u8, y: f64) -> f64 {
    let a = 0.25 + 0.5 * f64::from(parity);
    let p1 = digamma_unchecked(Complex64::new(a, 0.5 * (t + y)));
    let p2 = digamma_unchecked(Complex64::new(a, 0.5 * (y - t)));
    -PI.ln() + 0.5 * (p1.re + p2.re)
}

/// The Gamma-factor integral
/// `(1/pi) int (-log pi + psi((1/4 + e/2) + i(t+y)/2)/2 + psi((1/4 + e/2) + i(y-t)/2)/2) phi(y log R / 2pi) dy`
/// together with its leading approximation.
pub fn gamma_factor_term(
    t: f64,
    parity: u8,
    r: f64,
    phi: &TestFunction,
    opts: &QuadOptions,
) -> Result<GammaTerm> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Config(format!(
            "gamma term needs t >= 0, got t = {t}"
        )));
    }
    if parity > 1 {
        return Err(Error::Config(format!(
            "parity must be 0 or 1, got {parity}"
        )));
    }
    if !(r > std::f64::consts::E) || !r.is_finite() {
        return Err(Error::Config(format!(
            "gamma term needs R > e, got R = {r}"
        )));
    }
    let log_r = r.ln();
    let sigma = phi.sigma();
    // Re G is even in y, so fold onto x >= 0 after y = 2 pi x / log R.
    let x0 = 2000.0 / sigma;
    let scale = 2.0 * PI / log_r;
    let mut o = opts.clone();
    o.max_panel_width = Some(0.5 / sigma);
    let body = integrate_real(
        |x| gamma_kernel(t, parity, scale * x) * phi.eval(x),
        0.0,
        x0,
        &o,
    )?;
    // Beyond x0 phi averages to mean_tail(x); its oscillating part is smaller
    // than 1/x0^3 because x0 sits on a zero of sin(pi sigma x).
    let tail_coeff = phi.mean_tail(x0) * x0;
    let mut ot = opts.clone();
    ot.max_panel_width = None;
    let tail = integrate_real(
        |u| {
            if u <= 0.0 {
                0.0
            } else {
                gamma_kernel(t, parity, scale * x0 / u) * tail_coeff
            }
        },
        0.0,
        1.0,
        &ot,
    )?;
    let exact = 4.0 / log_r * (body + tail);
    let approx = phi.hat_at_zero() * (1.0 + t * t).ln() / log_r;
    Ok(GammaTerm {
        exact,
        approx,
        difference: exact - approx,
    })
}

fn primes_below(limit: f64) -> Result<Vec<u64>> {
    if limit < 2.0 {
        return Ok(Vec::new());
    }
    Ok(sieve_primes(limit.floor() as u64)?)
}

fn s1_with(
    form: &MaassFormRecord,
    index: usize,
    primes: &[u64],
    phi: &TestFunction,
    log_r: f64,
) -> Result<f64, DataError> {
    let mut acc = KahanSum::default();
    for &p in primes {
        let lp = (p as f64).ln();
        let weight = phi.eval_hat(lp / log_r);
        if weight == 0.0 {
            continue;
        }
        let lam = form.lambda(p).ok_or_else(|| DataError::Missing {
            form: index,
            what: format!("lambda({p})"),
        })?;
        acc.add(2.0 * lam * lp / ((p as f64).sqrt() * log_r) * weight);
    }
    Ok(acc.value())
}

fn s2_with(
    form: &MaassFormRecord,
    index: usize,
    primes: &[u64],
    phi: &TestFunction,
    log_r: f64,
) -> Result<f64, DataError> {
    let mut acc = KahanSum::default();
    for &p in primes {
        let lp = (p as f64).ln();
        let weight = phi.eval_hat(2.0 * lp / log_r);
        if weight == 0.0 {
            continue;
        }
        let lam = form.lambda_p2(p).ok_or_else(|| DataError::Missing {
            form: index,
            what: format!("lambda({p}^2)"),
        })?;
        acc.add(2.0 * lam * lp / (p as f64 * log_r) * weight);
    }
    Ok(acc.value())
}

fn check_r(r: f64, min: f64, what: &str) -> Result<f64> {
    if !(r > min) || !r.is_finite() {
        return Err(Error::Config(format!(
            "{what} needs R > {min}, got R = {r}"
        )));
    }
    Ok(r.ln())
}

/// S1 over p < R^sigma. A missing lambda(p) is reported against form 0.
pub fn s1_sum(form: &MaassFormRecord, phi: &TestFunction, r: f64) -> Result<f64> {
    let log_r = check_r(r, 1.0, "S1")?;
    let primes = primes_below(r.powf(phi.sigma()))?;
    Ok(s1_with(form, 0, &primes, phi, log_r)?)
}

/// S2 over p < R^(sigma/2), with lambda(p^2) stored or derived from lambda(p).
pub fn s2_sum(form: &MaassFormRecord, phi: &TestFunction, r: f64) -> Result<f64> {
    let log_r = check_r(r, 1.0, "S2")?;
    let primes = primes_below(r.powf(0.5 * phi.sigma()))?;
    Ok(s2_with(form, 0, &primes, phi, log_r)?)
}

/// The form-independent prime sum `(2/log R) sum_p (log p / p) phi^(2 log p / log R)`,
/// which tends to phi(0)/2.
pub fn prime_sum_lemma(phi: &TestFunction, r: f64) -> Result<f64> {
    let log_r = check_r(
        r,
        std::f64::consts::E * std::f64::consts::E,
        "prime sum lemma",
    )?;
    let limit = r.powf(0.5 * phi.sigma());
    if limit < 2.0 {
        return Ok(0.0);
    }
    let s = prime_sum(limit.floor() as u64, |p| {
        let lp = (p as f64).ln();
        lp / p as f64 * phi.eval_hat(2.0 * lp / log_r)
    });
    Ok(2.0 / log_r * s)
}

/// Diagonal prime sum of the 2-level density and its R -> infinity limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagonalSum {
    /// 4 sum_p log^2 p / (p log^2 R) phi1^(log p / log R) phi2^(log p / log R).
    pub sum: f64,
    /// 2 int |z| phi1^(z) phi2^(z) dz.
    pub limit: f64,
}

pub fn diagonal_pair_sum(phi1: &TestFunction, phi2: &TestFunction, r: f64) -> Result<DiagonalSum> {
    let log_r = check_r(
        r,
        std::f64::consts::E * std::f64::consts::E,
        "diagonal pair sum",
    )?;
    let support = phi1.sigma().min(phi2.sigma());
    let limit_x = r.powf(support);
    let sum = if limit_x < 2.0 {
        0.0
    } else {
        let s = prime_sum(limit_x.floor() as u64, |p| {
            let lp = (p as f64).ln();
            let z = lp / log_r;
            lp * lp / p as f64 * phi1.eval_hat(z) * phi2.eval_hat(z)
        });
        4.0 * s / (log_r * log_r)
    };
    let opts = QuadOptions::with_tol(1e-14);
    let half = integrate_real(
        |z| z * phi1.eval_hat(z) * phi2.eval_hat(z),
        0.0,
        support,
        &opts,
    )?;
    Ok(DiagonalSum {
        sum,
        limit: 4.0 * half,
    })
}

/// gamma log R / (2 pi).
pub fn rescale(gamma: f64, r: f64) -> f64 {
    gamma * r.ln() / (2.0 * PI)
}

/// Sum of phi over the stored zero window of one form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroSum {
    pub value: f64,
    /// Number of signed zeros summed, the central zero included.
    pub zeros: usize,
    /// Stored window height, if known.
    pub window: Option<f64>,
    /// The window height on the rescaled axis, gamma log R / 2 pi.
    pub rescaled_window: Option<f64>,
}

fn form_zeros(form: &MaassFormRecord, index: usize) -> Result<Vec<f64>, DataError> {
    form.signed_zeros().ok_or_else(|| DataError::Missing {
        form: index,
        what: "zeros".into(),
    })
}

fn zero_sum_with(
    form: &MaassFormRecord,
    index: usize,
    phi: &TestFunction,
    r: f64,
) -> Result<ZeroSum> {
    let zeros = form_zeros(form, index)?;
    let mut acc = KahanSum::default();
    for &g in &zeros {
        acc.add(phi.eval(rescale(g, r)));
    }
    Ok(ZeroSum {
        value: acc.value(),
        zeros: zeros.len(),
        window: form.zero_window,
        rescaled_window: form.zero_window.map(|w| rescale(w, r)),
    })
}

/// sum_gamma phi(gamma log R / 2 pi) over the stored zeros.
pub fn d1_zero_sum(form: &MaassFormRecord, phi: &TestFunction, r: f64) -> Result<ZeroSum> {
    check_r(r, 1.0, "zero sum")?;
    zero_sum_with(form, 0, phi, r)
}

/// phi(0)/2 + phi^(0).
pub fn one_level_target(phi: &TestFunction) -> f64 {
    0.5 * phi.value_at_zero() + phi.hat_at_zero()
}

/// int phi1 phi2 dx, computed as int phi1^ phi2^ dy.
pub fn product_hat_at_zero(phi1: &TestFunction, phi2: &TestFunction) -> Result<f64> {
    let support = phi1.sigma().min(phi2.sigma());
    let opts = QuadOptions::with_tol(1e-14);
    let half = integrate_real(|y| phi1.eval_hat(y) * phi2.eval_hat(y), 0.0, support, &opts)?;
    Ok(2.0 * half)
}

/// Limit of the 2-level density for a family with odd-sign fraction `n_odd`:
/// `prod_i (phi_i(0)/2 + phi_i^(0)) + (1/2) int |z| phi1^ phi2^
///  - 2 (phi1(0) phi2(0)/2 + (phi1 phi2)^(0) - (phi1 phi2)(0) n_odd)`.
pub fn two_level_target(phi1: &TestFunction, phi2: &TestFunction, n_odd: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&n_odd) {
        return Err(Error::Config(format!(
            "odd-sign fraction must lie in [0, 1], got {n_odd}"
        )));
    }
    let support = phi1.sigma().min(phi2.sigma());
    let opts = QuadOptions::with_tol(1e-14);
    let abs_moment = 2.0
        * integrate_real(
            |z| z * phi1.eval_hat(z) * phi2.eval_hat(z),
            0.0,
            support,
            &opts,
        )?;
    let p0 = phi1.value_at_zero() * phi2.value_at_zero();
    let prod_hat = product_hat_at_zero(phi1, phi2)?;
    Ok(
        one_level_target(phi1) * one_level_target(phi2) + 0.5 * abs_moment
            - 2.0 * (0.5 * p0 + prod_hat - p0 * n_odd),
    )
}

/// Which density a report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    One,
    Two,
}

/// Inputs echoed into a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityParams {
    pub phi: Vec<TestFunction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightFunction>,
    /// Forms carrying nonzero weight.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forms: Option<usize>,
}

/// A density value with the pieces it is assembled from.
///
/// Level one: `value = gamma_term + phi0_half - s1 - s2`.
/// Level two: `value = pair_sum`; the decomposition
/// `product - diagonal + sign_correction` is carried alongside and agrees
/// with it up to rounding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub level: Level,
    pub value: f64,
    pub breakdown: BTreeMap<String, f64>,
    pub target: f64,
    pub deviation: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub params: DensityParams,
    /// The same density computed from stored zeros, when every weighted
    /// form carries them.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_sum: Option<f64>,
    pub warnings: Vec<String>,
}

fn piece(b: &BTreeMap<String, f64>, key: &str) -> f64 {
    b.get(key).copied().unwrap_or(0.0)
}

impl DensityReport {
    fn assemble(
        level: Level,
        breakdown: BTreeMap<String, f64>,
        target: f64,
        r: f64,
        params: DensityParams,
    ) -> Self {
        let mut report = Self {
            level,
            value: 0.0,
            breakdown,
            target,
            deviation: 0.0,
            r,
            params,
            zero_sum: None,
            warnings: Vec::new(),
        };
        report.value = report.recombine();
        report.deviation = report.value - report.target;
        report
    }

    /// The value re-assembled from the breakdown.
    pub fn recombine(&self) -> f64 {
        let b = &self.breakdown;
        match self.level {
            Level::One => {
                piece(b, "gamma_term") + piece(b, "phi0_half") - piece(b, "s1") - piece(b, "s2")
            }
            Level::Two => piece(b, "pair_sum"),
        }
    }

    /// product - diagonal + sign_correction, for level-two reports.
    pub fn decomposition(&self) -> Option<f64> {
        let b = &self.breakdown;
        match self.level {
            Level::One => None,
            Level::Two => {
                Some(piece(b, "product") - piece(b, "diagonal") + piece(b, "sign_correction"))
            }
        }
    }
}

struct Pieces {
    gamma_term: f64,
    phi0_half: f64,
    s1: f64,
    s2: f64,
}

fn d1_pieces(
    form: &MaassFormRecord,
    index: usize,
    phi: &TestFunction,
    log_r: f64,
    primes1: &[u64],
    primes2: &[u64],
) -> Result<Pieces, DataError> {
    Ok(Pieces {
        gamma_term: phi.hat_at_zero() * (1.0 + form.t * form.t).ln() / log_r,
        phi0_half: 0.5 * phi.value_at_zero(),
        s1: s1_with(form, index, primes1, phi, log_r)?,
        s2: s2_with(form, index, primes2, phi, log_r)?,
    })
}

fn level_one_breakdown(p: &Pieces) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("gamma_term".to_string(), p.gamma_term),
        ("phi0_half".to_string(), p.phi0_half),
        ("s1".to_string(), p.s1),
        ("s2".to_string(), p.s2),
    ])
}

/// The 1-level density of one form from its Hecke eigenvalues.
pub fn d1_expansion(form: &MaassFormRecord, phi: &TestFunction, r: f64) -> Result<DensityReport> {
    let log_r = check_r(r, 1.0, "1-level density")?;
    let primes1 = primes_below(r.powf(phi.sigma()))?;
    let primes2 = primes_below(r.powf(0.5 * phi.sigma()))?;
    let p = d1_pieces(form, 0, phi, log_r, &primes1, &primes2)?;
    let mut report = DensityReport::assemble(
        Level::One,
        level_one_breakdown(&p),
        one_level_target(phi),
        r,
        DensityParams {
            phi: vec![*phi],
            weight: None,
            forms: Some(1),
        },
    );
    if form.zeros.is_some() {
        report.zero_sum = Some(zero_sum_with(form, 0, phi, r)?.value);
    }
    Ok(report)
}

/// h(t_j)/||u_j||^2 for every form, divided by their total. Forms whose raw
/// weight is below [`MIN_FAMILY_WEIGHT`] get weight 0.
pub fn normalized_weights(data: &MaassData, w: &WeightFunction) -> Result<Vec<f64>> {
    let raw: Vec<f64> = data
        .forms
        .iter()
        .map(|f| {
            let x = w.eval(f.t) / f.norm_sq;
            if x < MIN_FAMILY_WEIGHT {
                0.0
            } else {
                x
            }
        })
        .collect();
    let mut total = KahanSum::default();
    for &x in &raw {
        total.add(x);
    }
    let total = total.value();
    if !(total > 0.0) {
        return Err(DataError::Dataset {
            rule: "nonempty family",
            detail: format!(
                "all {} weights are below {MIN_FAMILY_WEIGHT:e}",
                data.forms.len()
            ),
        }
        .into());
    }
    Ok(raw.into_iter().map(|x| x / total).collect())
}

/// Weighted average of per-form values, accumulated in form order.
pub fn weighted_average(weights: &[f64], values: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (w, v) in weights.iter().zip(values) {
        acc += w * v;
    }
    acc
}

fn regime_warning(w: &WeightFunction, sigma: f64, level: Level) -> Option<String> {
    let eta = w.eta.unwrap_or(1.0);
    let bound = match (w.kind, level) {
        (WeightKind::Gaussian, Level::One) => 1.0 / 6.0,
        (WeightKind::TwoBump, Level::One) => 2.0 * eta / 3.0,
        (WeightKind::Gaussian, Level::Two) => 1.0 / 12.0,
        (WeightKind::TwoBump, Level::Two) => eta / 3.0,
    };
    (sigma >= bound).then(|| {
        format!("support sigma = {sigma} is outside the proven range sigma < {bound:.6} for this weight")
    })
}

fn active(weights: &[f64]) -> impl Iterator<Item = usize> + '_ {
    weights
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > 0.0)
        .map(|(i, _)| i)
}

/// Weighted 1-level density of a family with R = T^2.
pub fn d1_weighted_average(
    data: &MaassData,
    phi: &TestFunction,
    w: &WeightFunction,
) -> Result<DensityReport> {
    d1_weighted_average_at(data, phi, w, scaling_r(w.t)?)
}

/// [`d1_weighted_average`] with an explicit scaling parameter R.
pub fn d1_weighted_average_at(
    data: &MaassData,
    phi: &TestFunction,
    w: &WeightFunction,
    r: f64,
) -> Result<DensityReport> {
    let log_r = check_r(r, 1.0, "1-level density")?;
    let weights = normalized_weights(data, w)?;
    let primes1 = primes_below(r.powf(phi.sigma()))?;
    let primes2 = primes_below(r.powf(0.5 * phi.sigma()))?;
    let mut cols = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    let mut zero_vals = Vec::new();
    let mut all_zeros = true;
    for (i, form) in data.forms.iter().enumerate() {
        if weights[i] == 0.0 {
            for c in cols.iter_mut() {
                c.push(0.0);
            }
            zero_vals.push(0.0);
            continue;
        }
        let p = d1_pieces(form, i, phi, log_r, &primes1, &primes2)?;
        cols[0].push(p.gamma_term);
        cols[1].push(p.phi0_half);
        cols[2].push(p.s1);
        cols[3].push(p.s2);
        if form.zeros.is_some() {
            zero_vals.push(zero_sum_with(form, i, phi, r)?.value);
        } else {
            all_zeros = false;
            zero_vals.push(0.0);
        }
    }
    let pieces = Pieces {
        gamma_term: weighted_average(&weights, &cols[0]),
        phi0_half: weighted_average(&weights, &cols[1]),
        s1: weighted_average(&weights, &cols[2]),
        s2: weighted_average(&weights, &cols[3]),
    };
    let mut report = DensityReport::assemble(
        Level::One,
        level_one_breakdown(&pieces),
        one_level_target(phi),
        r,
        DensityParams {
            phi: vec![*phi],
            weight: Some(*w),
            forms: Some(active(&weights).count()),
        },
    );
    if all_zeros {
        report.zero_sum = Some(weighted_average(&weights, &zero_vals));
    }
    report
        .warnings
        .extend(regime_warning(w, phi.sigma(), Level::One));
    Ok(report)
}

/// Weighted fraction of forms with odd functional-equation sign.
pub fn n_minus_one(data: &MaassData, w: &WeightFunction) -> Result<f64> {
    let weights = normalized_weights(data, w)?;
    let mut odd = Vec::with_capacity(data.forms.len());
    for (i, f) in data.forms.iter().enumerate() {
        match f.sign {
            1 => odd.push(0.0),
            -1 => odd.push(1.0),
            s => {
                return Err(DataError::Invariant {
                    form: i,
                    rule: "sign",
                    detail: format!("sign {s} is not +1 or -1"),
                }
                .into())
            }
        }
    }
    Ok(weighted_average(&weights, &odd).clamp(0.0, 1.0))
}

/// sum over ordered pairs j1 != j2, j1 != mirror(j2) of v1[j1] v2[j2], where
/// the values sit on a signed zero list and mirror(j) = len - 1 - j.
pub fn pair_sum(v1: &[f64], v2: &[f64]) -> f64 {
    let n = v1.len();
    let mut acc = 0.0;
    for j1 in 0..n {
        for j2 in 0..n {
            if j2 == j1 || j2 == n - 1 - j1 {
                continue;
            }
            acc += v1[j1] * v2[j2];
        }
    }
    acc
}

/// The pieces of `pair_sum` for even test functions on a symmetric list:
/// `(sum v1)(sum v2)`, `2 sum v1 v2`, and the central term `v1 v2` at the
/// middle index of an odd-length list (0 otherwise).
pub fn pair_sum_pieces(v1: &[f64], v2: &[f64]) -> (f64, f64, f64) {
    let n = v1.len();
    let s1: f64 = v1.iter().sum();
    let s2: f64 = v2.iter().sum();
    let diag: f64 = v1.iter().zip(v2).map(|(a, b)| a * b).sum();
    let centre = if n % 2 == 1 {
        v1[n / 2] * v2[n / 2]
    } else {
        0.0
    };
    (s1 * s2, 2.0 * diag, centre)
}

/// Values of phi at the rescaled signed zeros of a form.
pub fn zero_values(
    form: &MaassFormRecord,
    index: usize,
    phi: &TestFunction,
    r: f64,
) -> Result<Vec<f64>> {
    Ok(form_zeros(form, index)?
        .into_iter()
        .map(|g| phi.eval(rescale(g, r)))
        .collect())
}

/// Weighted 2-level density from stored zeros, with the decomposition
/// `D2 = D2* - D2(+-)`, `D2(+-) = 2 D1(phi1 phi2) - (phi1 phi2)(0) N(-1)`.
pub fn d2_empirical(
    data: &MaassData,
    phi1: &TestFunction,
    phi2: &TestFunction,
    w: &WeightFunction,
) -> Result<DensityReport> {
    d2_empirical_at(data, phi1, phi2, w, scaling_r(w.t)?)
}

/// [`d2_empirical`] with an explicit scaling parameter R.
pub fn d2_empirical_at(
    data: &MaassData,
    phi1: &TestFunction,
    phi2: &TestFunction,
    w: &WeightFunction,
    r: f64,
) -> Result<DensityReport> {
    check_r(r, 1.0, "2-level density")?;
    let weights = normalized_weights(data, w)?;
    let n = data.forms.len();
    let mut pairs = vec![0.0; n];
    let mut products = vec![0.0; n];
    let mut diagonals = vec![0.0; n];
    let mut odd = vec![0.0; n];
    for i in active(&weights) {
        let form = &data.forms[i];
        let v1 = zero_values(form, i, phi1, r)?;
        let v2 = zero_values(form, i, phi2, r)?;
        pairs[i] = pair_sum(&v1, &v2);
        let (prod, diag, _) = pair_sum_pieces(&v1, &v2);
        products[i] = prod;
        diagonals[i] = diag;
        odd[i] = if form.sign == -1 { 1.0 } else { 0.0 };
    }
    let n_odd = weighted_average(&weights, &odd).clamp(0.0, 1.0);
    let p0 = phi1.value_at_zero() * phi2.value_at_zero();
    let breakdown = BTreeMap::from([
        ("pair_sum".to_string(), weighted_average(&weights, &pairs)),
        ("product".to_string(), weighted_average(&weights, &products)),
        (
            "diagonal".to_string(),
            weighted_average(&weights, &diagonals),
        ),
        ("sign_correction".to_string(), p0 * n_odd),
        ("n_odd".to_string(), n_odd),
    ]);
    let mut report = DensityReport::assemble(
        Level::Two,
        breakdown,
        two_level_target(phi1, phi2, n_odd)?,
        r,
        DensityParams {
            phi: vec![*phi1, *phi2],
            weight: Some(*w),
            forms: Some(active(&weights).count()),
        },
    );
    report.warnings.extend(regime_warning(
        w,
        phi1.sigma().max(phi2.sigma()),
        Level::Two,
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfun::{make_triangle_testfun, make_twobump_weight};

    fn form(t: f64, sign: i8, hecke: &[(u64, f64)], zeros: Option<Vec<f64>>) -> MaassFormRecord {
        MaassFormRecord {
            t,
            parity: if sign == 1 { 0 } else { 1 },
            sign,
            norm_sq: 1.0,
            hecke: hecke.iter().copied().collect(),
            zeros,
            zero_window: None,
        }
    }

    #[test]
    fn satake_roots() {
        let (a, b) = satake(0.0);
        assert_eq!(a, Complex64::new(0.0, 1.0));
        assert_eq!(b, Complex64::new(0.0, -1.0));
        let (a, b) = satake(2.0);
        assert_eq!((a.re, b.re), (1.0, 1.0));
        for lam in [-2.5, -1.3, 0.4, 1.9, 2.5] {
            let (a, b) = satake(lam);
            assert!((a + b - lam).norm() < 1e-14);
            assert!((a * b - 1.0).norm() < 1e-14);
            let sq = a * a + b * b;
            assert!((sq.re - (hecke_p2(lam) - 1.0)).abs() < 1e-13);
            for k in 1..8 {
                assert!((a.powi(k) + b.powi(k)).im.abs() < 1e-12);
            }
        }
        assert_eq!(hecke_p2(0.0), -1.0);
        assert_eq!(hecke_p2(2.0), 3.0);
    }

    #[test]
    fn scaling() {
        assert_eq!(scaling_r(10.0).unwrap(), 100.0);
        assert!(scaling_r(1.0).is_err());
        let r = scaling_r(37.0).unwrap();
        assert!((r.ln() - 2.0 * 37f64.ln()).abs() < 1e-14);
        assert!((r.sqrt() - 37.0).abs() < 1e-13);
    }

    #[test]
    fn single_prime_s1() {
        let phi = make_triangle_testfun(1.0).unwrap();
        let mut hecke: Vec<(u64, f64)> = vec![(1, 1.0), (2, 1.0)];
        for p in [3, 5, 7, 11, 13] {
            hecke.push((p, 0.0));
        }
        let f = form(9.5, 1, &hecke, None);
        let r = 16.0f64;
        let l2 = 2f64.ln();
        let expect = 2.0 * l2 / (2f64.sqrt() * r.ln()) * phi.eval_hat(l2 / r.ln());
        assert!((s1_sum(&f, &phi, r).unwrap() - expect).abs() < 1e-15);
        let tiny = make_triangle_testfun(0.1).unwrap();
        assert_eq!(s1_sum(&f, &tiny, r).unwrap(), 0.0);
    }

    #[test]
    fn missing_prime_is_named() {
        let phi = make_triangle_testfun(1.0).unwrap();
        let f = form(9.5, 1, &[(1, 1.0), (2, 0.5)], None);
        let err = s1_sum(&f, &phi, 100.0).unwrap_err().to_string();
        assert!(err.contains("lambda(3)"), "{err}");
    }

    #[test]
    fn zero_sums() {
        let phi = make_triangle_testfun(1.0).unwrap();
        let f = form(9.5, -1, &[(1, 1.0)], Some(vec![]));
        let z = d1_zero_sum(&f, &phi, 100.0).unwrap();
        assert_eq!(z.value, phi.value_at_zero());
        let g = form(9.5, 1, &[(1, 1.0)], Some(vec![1.3]));
        let z = d1_zero_sum(&g, &phi, 100.0).unwrap();
        assert!((z.value - 2.0 * phi.eval(rescale(1.3, 100.0))).abs() < 1e-16);
        assert!(d1_zero_sum(&form(9.5, 1, &[(1, 1.0)], None), &phi, 100.0).is_err());
    }

    #[test]
    fn expansion_reassembles() {
        let phi = make_triangle_testfun(1.0).unwrap();
        let mut hecke = vec![(1, 1.0)];
        for p in [2u64, 3, 5, 7] {
            hecke.push((p, 0.0));
        }
        let f = form(20.0, 1, &hecke, None);
        let rep = d1_expansion(&f, &phi, 10.0).unwrap();
        assert_eq!(rep.value, rep.recombine());
        assert_eq!(rep.breakdown["s1"], 0.0);
        // lambda(p^2) = -1 for these primes
        let log_r = 10f64.ln();
        let mut s2 = 0.0;
        for p in [2u64, 3, 5, 7] {
            let lp = (p as f64).ln();
            s2 += -2.0 * lp / (p as f64 * log_r) * phi.eval_hat(2.0 * lp / log_r);
        }
        assert!((rep.breakdown["s2"] - s2).abs() < 1e-15);
        let expect = (1.0 + 400.0f64).ln() / log_r + 0.5 - s2;
        assert!((rep.value - expect).abs() < 1e-14);
    }

    #[test]
    fn family_weights_and_sign_fraction() {
        let w = make_twobump_weight(20.0, 2.0, 0.5).unwrap();
        let a = form(20.0, 1, &[(1, 1.0)], Some(vec![1.0]));
        let b = form(20.0 + 1e-9, -1, &[(1, 1.0)], Some(vec![1.0]));
        let data = MaassData {
            level: 1,
            provenance: String::new(),
            forms: vec![a.clone(), b.clone()],
        };
        assert!((n_minus_one(&data, &w).unwrap() - 0.5).abs() < 1e-9);
        let weights = normalized_weights(&data, &w).unwrap();
        assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let evens = MaassData {
            forms: vec![a.clone()],
            ..data.clone()
        };
        assert_eq!(n_minus_one(&evens, &w).unwrap(), 0.0);
        let far = MaassData {
            forms: vec![form(1e9, 1, &[(1, 1.0)], None)],
            ..data.clone()
        };
        assert!(normalized_weights(&far, &w).is_err());
    }

    #[test]
    fn pair_pieces_integer_exact() {
        // symmetric lists with integer values make every sum exact
        let v1 = [3.0, 1.0, 4.0, 1.0, 3.0];
        let v2 = [2.0, 7.0, 5.0, 7.0, 2.0];
        let (prod, diag, centre) = pair_sum_pieces(&v1, &v2);
        assert_eq!(pair_sum(&v1, &v2), prod - diag + centre);
        let e1 = [2.0, 5.0, 5.0, 2.0];
        let e2 = [1.0, 3.0, 3.0, 1.0];
        let (prod, diag, centre) = pair_sum_pieces(&e1, &e2);
        assert_eq!(centre, 0.0);
        assert_eq!(pair_sum(&e1, &e2), prod - diag);
        // {+-g}: only the two cross pairs survive... which are mirrors, so none
        assert_eq!(pair_sum(&[1.0, 1.0], &[1.0, 1.0]), 0.0);
        assert_eq!(pair_sum(&[5.0], &[7.0]), 0.0);
    }

    #[test]
    fn targets() {
        let p1 = make_triangle_testfun(1.0).unwrap();
        let p2 = make_triangle_testfun(2.0).unwrap();
        assert_eq!(one_level_target(&p1), 1.5);
        assert_eq!(one_level_target(&p2), 2.0);
        // int phi^2 for the sigma = 1 triangle is 2/3
        assert!((product_hat_at_zero(&p1, &p1).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        let a = two_level_target(&p1, &p2, 0.0).unwrap();
        let b = two_level_target(&p1, &p2, 1.0).unwrap();
        let c = two_level_target(&p2, &p1, 0.0).unwrap();
        assert!((b - a - 2.0 * p1.value_at_zero() * p2.value_at_zero()).abs() < 1e-13);
        assert!((a - c).abs() < 1e-14);
        assert!(two_level_target(&p1, &p2, 1.5).is_err());
    }

    #[test]
    fn diagonal_limit_closed_form() {
        let p = make_triangle_testfun(1.0).unwrap();
        let d = diagonal_pair_sum(&p, &p, 1e4).unwrap();
        assert!((d.limit - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn satake_tail_converges() {
        let a = satake_tail_partial_sum(10_000, KIM_SARNAK_DELTA);
        let b = satake_tail_partial_sum(100_000, KIM_SARNAK_DELTA);
        assert!(b > a && b - a < 0.05);
        assert!(b < 4.1);
    }
}
