//! Deterministic adaptive quadrature.
//!
//! Panels are integrated with the 21-point Gauss-Kronrod rule. The panel with
//! the largest error estimate is bisected until the summed estimate meets the
//! tolerance. Subdivision is a pure function of the integrand values and the
//! final sum runs left to right, so results are bit-reproducible.
//!
//! Integrals over the real line are truncated at a caller-supplied decay
//! radius that is doubled until the shell beyond it contributes less than
//! the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::QuadError;

/// Kronrod abscissae on [-1, 1] (non-negative half, descending).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_381_871,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// 10-point Gauss weights for the odd-indexed entries of `XGK`.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Maximum number of radius doublings in real-line truncation.
const MAX_DOUBLINGS: u32 = 10;

/// Settings shared by all integration routines.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadOptions {
    /// Absolute error target.
    pub abs_tol: f64,
    /// Relative error target; the effective target is the larger of the two.
    pub rel_tol: f64,
    /// Upper bound on panel width, used to resolve oscillatory integrands.
    pub max_panel_width: Option<f64>,
    /// Budget of panels before giving up with a convergence error.
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_panel_width: None,
            max_panels: 200_000,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn max_panel_width(mut self, width: f64) -> Self {
        self.max_panel_width = Some(width);
        self
    }

    fn validate(&self) -> Result<(), QuadError> {
        if !(self.abs_tol > 0.0) && !(self.rel_tol > 0.0) {
            return Err(QuadError::Invalid(format!(
                "tolerance must be positive (abs_tol = {}, rel_tol = {})",
                self.abs_tol, self.rel_tol
            )));
        }
        if let Some(w) = self.max_panel_width {
            if !(w > 0.0) || !w.is_finite() {
                return Err(QuadError::Invalid(format!("max_panel_width = {w}")));
            }
        }
        Ok(())
    }
}

/// Value, absolute error estimate and number of integrand evaluations.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct IntegrationResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

impl IntegrationResult {
    /// Real part of the value, for integrands known to be real.
    pub fn re(&self) -> f64 {
        self.value.re
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    /// The error estimate is the rounding floor; bisection cannot lower it.
    at_floor: bool,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // largest error first; ties broken by position so the order is total
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn sample<F>(f: &F, x: f64) -> Result<Complex64, QuadError>
where
    F: Fn(f64) -> Complex64,
{
    let v = f(x);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(QuadError::NonFinite { abscissa: x })
    }
}

/// One application of the 21-point Gauss-Kronrod pair on [a, b].
fn gauss_kronrod<F>(f: &F, a: f64, b: f64) -> Result<Panel, QuadError>
where
    F: Fn(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut values = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 10];
    let fc = sample(f, center)?;
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for (j, &x) in XGK[..10].iter().enumerate() {
        let dx = half * x;
        let lo = sample(f, center - dx)?;
        let hi = sample(f, center + dx)?;
        values[j] = (lo, hi);
        kronrod += (lo + hi) * WGK[j];
        if j % 2 == 1 {
            gauss += (lo + hi) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[10] * (fc - mean).norm();
    let mut resabs = WGK[10] * fc.norm();
    for (j, (lo, hi)) in values.iter().enumerate() {
        resasc += WGK[j] * ((lo - mean).norm() + (hi - mean).norm());
        resabs += WGK[j] * (lo.norm() + hi.norm());
    }
    let resasc = resasc * half.abs();
    let resabs = resabs * half.abs();
    let mut error = ((kronrod - gauss) * half).norm();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    let roundoff = 50.0 * f64::EPSILON * resabs;
    let at_floor = roundoff >= error;
    if at_floor {
        error = roundoff;
    }
    Ok(Panel {
        a,
        b,
        value: kronrod * half,
        error,
        at_floor,
    })
}

/// Adaptive integration of `f` over [a, b] to absolute tolerance `tol`.
pub fn integrate_interval<F>(f: F, a: f64, b: f64, tol: f64) -> Result<IntegrationResult, QuadError>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    integrate_interval_with(f, a, b, &QuadOptions::with_tol(tol))
}

/// Adaptive integration over [a, b] with explicit options.
pub fn integrate_interval_with<F>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<IntegrationResult, QuadError>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    opts.validate()?;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(QuadError::Invalid(format!("interval [{a}, {b}]")));
    }
    let initial = match opts.max_panel_width {
        Some(w) => ((b - a) / w).ceil().max(1.0),
        None => 1.0,
    };
    if initial > opts.max_panels as f64 {
        return Err(QuadError::Invalid(format!(
            "panel width cap needs {initial} panels, budget is {}",
            opts.max_panels
        )));
    }
    let count = initial as usize;
    let width = (b - a) / count as f64;
    let edges: Vec<(f64, f64)> = (0..count)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == count {
                b
            } else {
                a + width * (i + 1) as f64
            };
            (lo, hi)
        })
        .collect();
    let panels: Vec<Panel> = if count >= 8 {
        edges
            .par_iter()
            .map(|&(lo, hi)| gauss_kronrod(&f, lo, hi))
            .collect::<Result<_, _>>()?
    } else {
        edges
            .iter()
            .map(|&(lo, hi)| gauss_kronrod(&f, lo, hi))
            .collect::<Result<_, _>>()?
    };
    let mut evaluations = 21 * count;

    let (mut value, mut error) = totals(panels.iter());
    let mut heap: BinaryHeap<Panel> = panels.into_iter().collect();
    let mut frozen: Vec<Panel> = Vec::new();
    loop {
        if error <= opts.abs_tol.max(opts.rel_tol * value.norm()) {
            // running totals drift; confirm with an exact recount
            (value, error) = totals(heap.iter().chain(frozen.iter()));
            if error <= opts.abs_tol.max(opts.rel_tol * value.norm()) {
                break;
            }
        }
        let Some(worst) = heap.pop() else {
            // every panel is at its rounding floor or unsplittable; the
            // reported error estimate is the best attainable
            break;
        };
        let mid = 0.5 * (worst.a + worst.b);
        if worst.at_floor
            || !(mid > worst.a && mid < worst.b)
            || (worst.b - worst.a) < 1e-14 * (a.abs() + b.abs())
        {
            // cannot be resolved further in f64
            frozen.push(worst);
            continue;
        }
        if heap.len() + frozen.len() + 2 > opts.max_panels {
            heap.push(worst);
            let (value, error) = totals(heap.iter().chain(frozen.iter()));
            return Err(QuadError::Convergence {
                partial: value,
                error_estimate: error,
                panels: heap.len() + frozen.len(),
            });
        }
        let left = gauss_kronrod(&f, worst.a, mid)?;
        let right = gauss_kronrod(&f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        evaluations += 42;
    }

    let mut all: Vec<Panel> = heap.into_vec();
    all.extend(frozen);
    all.sort_by(|p, q| p.a.total_cmp(&q.a));
    let (value, error) = totals(all.iter());
    Ok(IntegrationResult {
        value,
        error_estimate: error,
        evaluations,
    })
}

/// Left-to-right compensated sum of panel values and plain sum of errors.
fn totals<'a>(panels: impl Iterator<Item = &'a Panel>) -> (Complex64, f64) {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut carry = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    for p in panels {
        let y = p.value - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
        error += p.error;
    }
    (sum, error)
}

/// Integral over the real line, truncated at `decay_scale` and doubled until
/// the outer shell contributes less than `tol`.
pub fn integrate_real_line<F>(
    f: F,
    decay_scale: f64,
    tol: f64,
) -> Result<IntegrationResult, QuadError>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    integrate_real_line_with(f, decay_scale, &QuadOptions::with_tol(tol))
}

/// [`integrate_real_line`] with explicit options.
pub fn integrate_real_line_with<F>(
    f: F,
    decay_scale: f64,
    opts: &QuadOptions,
) -> Result<IntegrationResult, QuadError>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    check_radius(decay_scale)?;
    let core = integrate_interval_with(&f, -decay_scale, decay_scale, opts)?;
    extend_by_doubling(core, decay_scale, opts, |r, opts| {
        let right = integrate_interval_with(&f, r, 2.0 * r, opts)?;
        let left = integrate_interval_with(&f, -2.0 * r, -r, opts)?;
        Ok(IntegrationResult {
            value: left.value + right.value,
            error_estimate: left.error_estimate + right.error_estimate,
            evaluations: left.evaluations + right.evaluations,
        })
    })
}

/// Integral of `f` over [0, infinity), with the same truncation policy.
/// For even `f` this is half the real-line integral.
pub fn integrate_half_line_with<F>(
    f: F,
    decay_scale: f64,
    opts: &QuadOptions,
) -> Result<IntegrationResult, QuadError>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    check_radius(decay_scale)?;
    let core = integrate_interval_with(&f, 0.0, decay_scale, opts)?;
    extend_by_doubling(core, decay_scale, opts, |r, opts| {
        integrate_interval_with(&f, r, 2.0 * r, opts)
    })
}

fn check_radius(decay_scale: f64) -> Result<(), QuadError> {
    if decay_scale > 0.0 && decay_scale.is_finite() {
        Ok(())
    } else {
        Err(QuadError::Invalid(format!("decay_scale = {decay_scale}")))
    }
}

fn extend_by_doubling<S>(
    core: IntegrationResult,
    decay_scale: f64,
    opts: &QuadOptions,
    shell: S,
) -> Result<IntegrationResult, QuadError>
where
    S: Fn(f64, &QuadOptions) -> Result<IntegrationResult, QuadError>,
{
    let mut total = core;
    let mut radius = decay_scale;
    for _ in 0..MAX_DOUBLINGS {
        let outer = shell(radius, opts)?;
        total.value += outer.value;
        total.error_estimate += outer.error_estimate;
        total.evaluations += outer.evaluations;
        let target = opts.abs_tol.max(opts.rel_tol * total.value.norm());
        if outer.value.norm() < target {
            return Ok(total);
        }
        radius *= 2.0;
    }
    Err(QuadError::Divergence { radius })
}

/// Real-valued convenience wrapper around [`integrate_interval_with`].
pub fn integrate_real<F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<f64, QuadError>
where
    F: Fn(f64) -> f64 + Sync,
{
    integrate_interval_with(|x| Complex64::new(f(x), 0.0), a, b, opts).map(|r| r.value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn real<F: Fn(f64) -> f64 + Sync>(f: F) -> impl Fn(f64) -> Complex64 + Sync {
        move |x| Complex64::new(f(x), 0.0)
    }

    #[test]
    fn weights_integrate_constants() {
        let k: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn constant_and_cosine() {
        let r = integrate_interval(real(|_| 1.0), 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-15);
        assert!(r.evaluations > 0 && r.error_estimate >= 0.0);
        let r = integrate_interval(real(f64::cos), 0.0, PI / 2.0, 1e-12).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_on_interval_and_line() {
        let sqrt_pi = PI.sqrt();
        let r = integrate_interval(real(|x| (-x * x).exp()), -8.0, 8.0, 1e-13).unwrap();
        assert!((r.value.re - sqrt_pi).abs() < 1e-12);
        let r = integrate_real_line(real(|x| (-x * x).exp()), 6.0, 1e-13).unwrap();
        assert!((r.value.re - sqrt_pi).abs() < 1e-12);
        let r = integrate_real_line(real(|x| x * (-x * x).exp()), 6.0, 1e-12).unwrap();
        assert!(r.value.norm() < 1e-12);
    }

    #[test]
    fn errors_are_reported() {
        assert!(matches!(
            integrate_interval(real(|_| 1.0), 1.0, 0.0, 1e-10),
            Err(QuadError::Invalid(_))
        ));
        let e = integrate_interval(real(|x| 1.0 / (x - 0.5)), 0.0, 1.0, 1e-10).unwrap_err();
        assert_eq!(e, QuadError::NonFinite { abscissa: 0.5 });
        let opts = QuadOptions {
            max_panels: 4,
            ..QuadOptions::with_tol(1e-14)
        };
        let e = integrate_interval_with(real(|x| (50.0 * x).sin().abs()), 0.0, 10.0, &opts)
            .unwrap_err();
        assert!(matches!(e, QuadError::Convergence { .. }));
        let e = integrate_real_line(real(|_| 1.0), 1.0, 1e-10).unwrap_err();
        assert!(matches!(e, QuadError::Divergence { .. }));
    }

    #[test]
    fn panel_cap_resolves_oscillation() {
        let w = 400.0;
        let opts = QuadOptions::with_tol(1e-12).max_panel_width(0.25 * 2.0 * PI / w);
        let r = integrate_interval_with(|x| Complex64::from_polar(1.0, w * x), 0.0, 3.0, &opts)
            .unwrap();
        let exact = (Complex64::from_polar(1.0, 3.0 * w) - 1.0) / Complex64::new(0.0, w);
        assert!((r.value - exact).norm() < 1e-12);
    }

    #[test]
    fn half_line_doubles_to_full() {
        let opts = QuadOptions::with_tol(1e-13);
        let f = real(|x| (-x * x).exp() * (1.0 + x * x));
        let full = integrate_real_line_with(&f, 6.0, &opts).unwrap().value.re;
        let half = integrate_half_line_with(&f, 6.0, &opts).unwrap().value.re;
        assert!((full - 2.0 * half).abs() < 2e-13);
    }
}
