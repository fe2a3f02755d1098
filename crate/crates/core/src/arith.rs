//! Integer arithmetic: primes, modular inverses, Kloosterman sums and
//! divisor structure.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::ArithError;

/// Default memory budget for materialised prime lists.
pub const DEFAULT_SIEVE_BUDGET_BYTES: usize = 1 << 30;

/// Numbers per sieve segment.
const SEGMENT: u64 = 1 << 18;

/// Euclid's algorithm.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Primes in [lo, hi) given all primes up to sqrt(hi).
fn sieve_segment(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    let len = (hi - lo) as usize;
    let mut composite = vec![false; len];
    for &p in base {
        if p * p >= hi {
            break;
        }
        let start = (p * p).max(lo.div_ceil(p) * p);
        let mut j = start;
        while j < hi {
            composite[(j - lo) as usize] = true;
            j += p;
        }
    }
    (0..len)
        .filter(|&i| !composite[i] && lo + i as u64 >= 2)
        .map(|i| lo + i as u64)
        .collect()
}

fn segment_bounds(limit: u64) -> Vec<(u64, u64)> {
    let end = limit + 1;
    let mut out = Vec::new();
    let mut lo = 0;
    while lo < end {
        let hi = (lo + SEGMENT).min(end);
        out.push((lo, hi));
        lo = hi;
    }
    out
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// All primes up to and including `limit`, ascending.
pub fn sieve_primes(limit: u64) -> Result<Vec<u64>, ArithError> {
    sieve_primes_with_budget(limit, DEFAULT_SIEVE_BUDGET_BYTES)
}

/// [`sieve_primes`] with an explicit memory budget for the output list.
pub fn sieve_primes_with_budget(limit: u64, budget_bytes: usize) -> Result<Vec<u64>, ArithError> {
    if limit < 2 {
        return Err(ArithError::Domain(format!("sieve limit {limit} < 2")));
    }
    // pi(x) < 1.26 x / ln x for x > 1
    let lf = limit as f64;
    let estimate = 1.26 * lf / lf.ln().max(1.0) + 16.0;
    let bytes = estimate * std::mem::size_of::<u64>() as f64;
    if bytes > budget_bytes as f64 {
        return Err(ArithError::Resource(format!(
            "primes up to {limit} need about {:.0} MiB, budget is {:.0} MiB",
            bytes / 1048576.0,
            budget_bytes as f64 / 1048576.0
        )));
    }
    let base = small_primes(isqrt(limit));
    let mut out = Vec::with_capacity(estimate as usize);
    for (lo, hi) in segment_bounds(limit) {
        out.extend(sieve_segment(lo, hi, &base));
    }
    Ok(out)
}

/// Sum of `f(p)` over primes p <= limit without materialising the list.
///
/// Segments are sieved in parallel; each is summed in ascending order and
/// the segment totals are combined left to right, so the result does not
/// depend on the thread count.
pub fn prime_sum<F>(limit: u64, f: F) -> f64
where
    F: Fn(u64) -> f64 + Sync,
{
    if limit < 2 {
        return 0.0;
    }
    let base = small_primes(isqrt(limit));
    let partials: Vec<(f64, f64)> = segment_bounds(limit)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut acc = KahanSum::default();
            for p in sieve_segment(lo, hi, &base) {
                acc.add(f(p));
            }
            (acc.sum, acc.carry)
        })
        .collect();
    let mut total = KahanSum::default();
    for (s, c) in partials {
        total.add(s);
        total.add(c);
    }
    total.value()
}

/// Neumaier-compensated real accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Inverse of `x` modulo `c`, in [0, c).
pub fn mod_inverse(x: i64, c: u64) -> Result<u64, ArithError> {
    if c == 0 {
        return Err(ArithError::Domain("modulus must be positive".into()));
    }
    let c_i = c as i128;
    let a = (x as i128).rem_euclid(c_i);
    if c == 1 {
        return Ok(0);
    }
    let (mut old_r, mut r) = (a, c_i);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return Err(ArithError::Domain(format!(
            "{x} is not invertible modulo {c} (gcd = {old_r})"
        )));
    }
    Ok(old_s.rem_euclid(c_i) as u64)
}

/// A Kloosterman sum S(m, n; c) with its arguments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KloostermanValue {
    pub value: f64,
    pub modulus: u64,
    pub m: i64,
    pub n: i64,
}

/// S(m, n; c) = sum over x mod c, gcd(x, c) = 1, of cos(2 pi (n x + m x*) / c).
///
/// Direct O(c log c) summation; the sine parts cancel under x -> c - x.
pub fn kloosterman(m: i64, n: i64, c: u64) -> Result<KloostermanValue, ArithError> {
    if c == 0 {
        return Err(ArithError::Domain("modulus must be positive".into()));
    }
    let c_i = c as i128;
    let mut acc = KahanSum::default();
    for x in 0..c {
        if gcd(x, c) != 1 {
            continue;
        }
        let xs = mod_inverse(x as i64, c)?;
        let k = (n as i128 * x as i128 + m as i128 * xs as i128).rem_euclid(c_i) as u64;
        acc.add(cos_fraction(k, c));
    }
    let value = acc.value();
    debug_assert!(value.abs() <= weil_bound(m, n, c) + 1e-6);
    Ok(KloostermanValue {
        value,
        modulus: c,
        m,
        n,
    })
}

/// cos(2 pi k / c) with the argument folded into [0, pi].
fn cos_fraction(k: u64, c: u64) -> f64 {
    let k = k % c;
    let k = k.min(c - k);
    (2.0 * PI * k as f64 / c as f64).cos()
}

/// Number of positive divisors of `c`.
pub fn divisor_count(c: u64) -> u64 {
    if c == 0 {
        return 0;
    }
    let mut n = c;
    let mut count = 1;
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        count *= e + 1;
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        count *= 2;
    }
    count
}

/// Weil's bound gcd(m, n, c)^{1/2} tau(c) c^{1/2}.
pub fn weil_bound(m: i64, n: i64, c: u64) -> f64 {
    let g = gcd(gcd(m.unsigned_abs(), n.unsigned_abs()), c);
    (g as f64).sqrt() * divisor_count(c) as f64 * (c as f64).sqrt()
}

/// Ordered factorisations m = a b, ascending in a.
pub fn divisor_pairs(m: u64) -> Result<Vec<(u64, u64)>, ArithError> {
    if m == 0 {
        return Err(ArithError::Domain("divisor_pairs needs m >= 1".into()));
    }
    let mut low = Vec::new();
    let mut high = Vec::new();
    let mut a = 1;
    while a * a <= m {
        if m % a == 0 {
            low.push((a, m / a));
            if a * a != m {
                high.push((m / a, a));
            }
        }
        a += 1;
    }
    low.extend(high.into_iter().rev());
    Ok(low)
}

/// Outcome of an exhaustive Weil-bound check.
#[derive(Debug, Clone, Serialize)]
pub struct WeilSweep {
    pub m_max: u64,
    pub n_max: u64,
    pub c_max: u64,
    pub checked: u64,
    /// Triples with |S| above the bound (plus 1e-6 slack).
    pub violations: Vec<(u64, u64, u64, f64, f64)>,
    /// Largest observed |S| / bound.
    pub max_ratio: f64,
    pub max_ratio_at: (u64, u64, u64),
}

/// S(1, k; c) for every residue k, from one inverse FFT of
/// a_x = e(x*/c) [gcd(x, c) = 1].
fn kloosterman_row(c: u64, fft: &Arc<dyn Fft<f64>>) -> Vec<f64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); c as usize];
    for x in 0..c {
        if gcd(x, c) == 1 {
            let xs = mod_inverse(x as i64, c).expect("unit");
            let k = xs.min(c - xs);
            let angle = 2.0 * PI * k as f64 / c as f64;
            let sign = if xs <= c - xs { 1.0 } else { -1.0 };
            buf[x as usize] = Complex64::new(angle.cos(), sign * angle.sin());
        }
    }
    fft.process(&mut buf);
    buf.into_iter().map(|v| v.re).collect()
}

/// Checks |S(m, n; c)| <= weil_bound(m, n, c) for 1 <= m <= m_max,
/// 1 <= n <= n_max, 1 <= c <= c_max.
///
/// Sums are obtained from S(m, n; c) = sum_{d | (m, n, c)} d S(1, mn/d^2; c/d),
/// with each S(1, . ; c') row computed by a single FFT, which makes the full
/// sweep O(c_max^2 log c_max) instead of O(m_max n_max c_max^2).
pub fn weil_sweep(m_max: u64, n_max: u64, c_max: u64) -> Result<WeilSweep, ArithError> {
    if m_max == 0 || n_max == 0 || c_max == 0 {
        return Err(ArithError::Domain("sweep ranges must be positive".into()));
    }
    let per_c: Vec<(u64, Vec<(u64, u64, u64, f64, f64)>, f64, (u64, u64, u64))> = (1..=c_max)
        .into_par_iter()
        .map_init(FftPlanner::<f64>::new, |planner, c| {
            let mut rows: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
            let mut row = |modulus: u64| -> Vec<f64> {
                rows.entry(modulus)
                    .or_insert_with(|| {
                        let fft = planner.plan_fft_inverse(modulus as usize);
                        kloosterman_row(modulus, &fft)
                    })
                    .clone()
            };
            let mut checked = 0;
            let mut violations = Vec::new();
            let mut best = (0.0, (0, 0, 0));
            let base = row(c);
            let mut cache: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
            for m in 1..=m_max {
                for n in 1..=n_max {
                    let g = gcd(gcd(m, n), c);
                    let value = if g == 1 {
                        base[((m * n) % c) as usize]
                    } else {
                        let mut acc = 0.0;
                        for d in 1..=g {
                            if g % d != 0 {
                                continue;
                            }
                            let sub = c / d;
                            let r = cache.entry(sub).or_insert_with(|| row(sub));
                            acc += d as f64 * r[((m * n / (d * d)) % sub) as usize];
                        }
                        acc
                    };
                    let bound = weil_bound(m as i64, n as i64, c);
                    checked += 1;
                    if value.abs() > bound + 1e-6 {
                        violations.push((m, n, c, value, bound));
                    }
                    let ratio = value.abs() / bound;
                    if ratio > best.0 {
                        best = (ratio, (m, n, c));
                    }
                }
            }
            (checked, violations, best.0, best.1)
        })
        .collect();

    let mut sweep = WeilSweep {
        m_max,
        n_max,
        c_max,
        checked: 0,
        violations: Vec::new(),
        max_ratio: 0.0,
        max_ratio_at: (0, 0, 0),
    };
    for (checked, violations, ratio, at) in per_c {
        sweep.checked += checked;
        sweep.violations.extend(violations);
        if ratio > sweep.max_ratio {
            sweep.max_ratio = ratio;
            sweep.max_ratio_at = at;
        }
    }
    Ok(sweep)
}

/// S(m, n; c) for all 1 <= m <= m_max, 1 <= n <= n_max at one modulus, via
/// the same FFT route as [`weil_sweep`]. Row-major in (m, n).
pub fn kloosterman_table(m_max: u64, n_max: u64, c: u64) -> Result<Vec<f64>, ArithError> {
    if c == 0 {
        return Err(ArithError::Domain("modulus must be positive".into()));
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut rows: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    let mut out = Vec::with_capacity((m_max * n_max) as usize);
    for m in 1..=m_max {
        for n in 1..=n_max {
            let g = gcd(gcd(m, n), c);
            let mut acc = 0.0;
            for d in (1..=g).filter(|d| g % d == 0) {
                let sub = c / d;
                let r = rows.entry(sub).or_insert_with(|| {
                    let fft = planner.plan_fft_inverse(sub as usize);
                    kloosterman_row(sub, &fft)
                });
                acc += d as f64 * r[((m * n / (d * d)) % sub) as usize];
            }
            out.push(acc);
        }
    }
    Ok(out)
}
