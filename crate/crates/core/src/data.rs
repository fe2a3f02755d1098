//! Spectral datasets: loading, validation, summary statistics and a seeded
//! synthetic generator.
//!
//! Hecke eigenvalues must be normalised so that lambda(1) = 1. Datasets that
//! store L^2-normalised coefficients `lambda(n) / ||u||` must be converted
//! by the user (multiply every coefficient by `||u||` and store `norm_sq`);
//! the loader rejects rather than silently rescales.
//!
//! JSON layout:
//!
//! ```json
//! {"level": 1, "provenance": "...",
//!  "forms": [{"t": 9.5337, "parity": 1, "sign": -1, "norm_sq": 1.0,
//!             "hecke": {"1": 1.0, "2": -1.0683},
//!             "zeros": [2.1, 3.7], "zero_window": 5.0}]}
//! ```
//!
//! CSV layout: `#!` metadata lines, then a `# forms` table and a `# hecke`
//! table, zeros separated by `;` (`-` for a stored but empty list):
//!
//! ```text
//! #! level: 1
//! #! provenance: example
//! # forms
//! index,t,parity,sign,norm_sq,zero_window,zeros
//! 0,9.5337,1,-1,1.0,5.0,2.1;3.7
//! # hecke
//! index,n,lambda
//! 0,1,1.0
//! 0,2,-1.0683
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::sieve_primes;
use crate::error::DataError;
use crate::quadrature::QuadOptions;
use crate::testfun::WeightFunction;

/// Tolerance for multiplicativity and Hecke-relation checks.
pub const HECKE_TOL: f64 = 1e-6;

/// One Maass form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaassFormRecord {
    /// Spectral parameter t_j (eigenvalue 1/4 + t_j^2).
    pub t: f64,
    /// 0 for even forms, 1 for odd forms.
    pub parity: u8,
    /// Sign of the functional equation, +1 or -1.
    pub sign: i8,
    /// Petersson norm ||u_j||^2; 1.0 when the source omits it.
    pub norm_sq: f64,
    /// Hecke eigenvalues keyed by n.
    pub hecke: BTreeMap<u64, f64>,
    /// Positive zero ordinates, ascending. The central zero of an odd-sign
    /// form is implied by the sign and never stored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeros: Option<Vec<f64>>,
    /// Height up to which `zeros` is complete.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_window: Option<f64>,
}

impl MaassFormRecord {
    pub fn lambda(&self, n: u64) -> Option<f64> {
        self.hecke.get(&n).copied()
    }

    /// lambda(p^2), stored or derived from lambda(p).
    pub fn lambda_p2(&self, p: u64) -> Option<f64> {
        self.lambda(p * p)
            .or_else(|| self.lambda(p).map(crate::density::hecke_p2))
    }

    /// Zero ordinates with both signs and the central zero, ascending.
    pub fn signed_zeros(&self) -> Option<Vec<f64>> {
        let zeros = self.zeros.as_ref()?;
        let mut out: Vec<f64> = zeros.iter().rev().map(|g| -g).collect();
        if self.sign == -1 {
            out.push(0.0);
        }
        out.extend(zeros.iter().copied());
        Some(out)
    }
}

/// A level-1 spectral dataset, forms sorted by t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaassData {
    pub level: u32,
    pub provenance: String,
    pub forms: Vec<MaassFormRecord>,
}

impl MaassData {
    pub fn empty() -> Self {
        Self {
            level: 1,
            provenance: String::new(),
            forms: Vec::new(),
        }
    }
}

/// A soft-rule finding; does not prevent loading.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationWarning {
    /// Index of the form in the input file, if form-specific.
    pub form: Option<usize>,
    pub rule: &'static str,
    pub detail: String,
}

/// A loaded dataset with the warnings raised while validating it.
#[derive(Debug, Clone, Serialize)]
pub struct LoadReport {
    pub data: MaassData,
    pub warnings: Vec<ValidationWarning>,
}

/// Input file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Json,
    Csv,
}

impl DataFormat {
    /// Format implied by a file extension (`.csv` is CSV, anything else JSON).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => DataFormat::Csv,
            _ => DataFormat::Json,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawData {
    level: u32,
    #[serde(default)]
    provenance: String,
    forms: Vec<RawForm>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawForm {
    t: f64,
    parity: u8,
    sign: i8,
    #[serde(default)]
    norm_sq: Option<f64>,
    hecke: BTreeMap<u64, f64>,
    #[serde(default)]
    zeros: Option<Vec<f64>>,
    #[serde(default)]
    zero_window: Option<f64>,
}

/// Reads and validates a dataset file.
pub fn load_dataset(path: &Path, format: DataFormat) -> Result<LoadReport, DataError> {
    let text = std::fs::read_to_string(path)?;
    match format {
        DataFormat::Json => parse_json(&text),
        DataFormat::Csv => parse_csv(&text),
    }
}

/// Parses and validates JSON text.
pub fn parse_json(text: &str) -> Result<LoadReport, DataError> {
    let raw: RawData = serde_json::from_str(text)
        .map_err(|e| DataError::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    validate_raw(raw)
}

/// Parses and validates the sectioned CSV layout.
pub fn parse_csv(text: &str) -> Result<LoadReport, DataError> {
    let mut level = None;
    let mut provenance = String::new();
    let mut section = "";
    let mut forms_body = String::new();
    let mut hecke_body = String::new();
    let mut forms_start = 0;
    let mut hecke_start = 0;
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if let Some(meta) = trimmed.strip_prefix("#!") {
            let (key, value) = meta.split_once(':').ok_or_else(|| {
                DataError::Parse(format!("line {}: metadata needs 'key: value'", lineno + 1))
            })?;
            match key.trim() {
                "level" => {
                    level = Some(value.trim().parse::<u32>().map_err(|e| {
                        DataError::Parse(format!("line {}: level: {e}", lineno + 1))
                    })?)
                }
                "provenance" => provenance = value.trim().to_string(),
                other => {
                    return Err(DataError::Parse(format!(
                        "line {}: unknown metadata key '{other}'",
                        lineno + 1
                    )))
                }
            }
        } else if let Some(name) = trimmed.strip_prefix('#') {
            section = match name.trim() {
                "forms" => {
                    forms_start = lineno + 1;
                    "forms"
                }
                "hecke" => {
                    hecke_start = lineno + 1;
                    "hecke"
                }
                other => {
                    return Err(DataError::Parse(format!(
                        "line {}: unknown section '{other}'",
                        lineno + 1
                    )))
                }
            };
        } else if !trimmed.is_empty() {
            let body = match section {
                "forms" => &mut forms_body,
                "hecke" => &mut hecke_body,
                _ => {
                    return Err(DataError::Parse(format!(
                        "line {}: data outside a '# forms' or '# hecke' section",
                        lineno + 1
                    )))
                }
            };
            body.push_str(trimmed);
            body.push('\n');
        }
    }
    let level = level.ok_or_else(|| DataError::Parse("missing '#! level:' line".into()))?;

    #[derive(Deserialize)]
    struct FormRow {
        index: usize,
        t: f64,
        parity: u8,
        sign: i8,
        norm_sq: Option<f64>,
        zero_window: Option<f64>,
        zeros: Option<String>,
    }
    #[derive(Deserialize)]
    struct HeckeRow {
        index: usize,
        n: u64,
        lambda: f64,
    }

    let mut forms: Vec<(usize, RawForm)> = Vec::new();
    let mut reader = csv::Reader::from_reader(forms_body.as_bytes());
    for (i, row) in reader.deserialize::<FormRow>().enumerate() {
        let row = row.map_err(|e| {
            DataError::Parse(format!(
                "forms table row {} (line {}): {e}",
                i + 1,
                forms_start + i + 2
            ))
        })?;
        let zeros = match row.zeros.as_deref().map(str::trim) {
            None | Some("") => None,
            Some("-") => Some(Vec::new()),
            Some(list) => Some(
                list.split(';')
                    .map(|z| {
                        z.trim().parse::<f64>().map_err(|e| {
                            DataError::Parse(format!("forms row {}: zero '{z}': {e}", i + 1))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        forms.push((
            row.index,
            RawForm {
                t: row.t,
                parity: row.parity,
                sign: row.sign,
                norm_sq: row.norm_sq,
                hecke: BTreeMap::new(),
                zeros,
                zero_window: row.zero_window,
            },
        ));
    }
    let mut by_index: BTreeMap<usize, usize> = BTreeMap::new();
    for (pos, (index, _)) in forms.iter().enumerate() {
        if by_index.insert(*index, pos).is_some() {
            return Err(DataError::Parse(format!("duplicate form index {index}")));
        }
    }
    let mut reader = csv::Reader::from_reader(hecke_body.as_bytes());
    for (i, row) in reader.deserialize::<HeckeRow>().enumerate() {
        let row = row.map_err(|e| {
            DataError::Parse(format!(
                "hecke table row {} (line {}): {e}",
                i + 1,
                hecke_start + i + 2
            ))
        })?;
        let pos = *by_index.get(&row.index).ok_or_else(|| {
            DataError::Parse(format!(
                "hecke row {}: unknown form index {}",
                i + 1,
                row.index
            ))
        })?;
        if forms[pos].1.hecke.insert(row.n, row.lambda).is_some() {
            return Err(DataError::Parse(format!(
                "hecke row {}: duplicate lambda({}) for form {}",
                i + 1,
                row.n,
                row.index
            )));
        }
    }
    validate_raw(RawData {
        level,
        provenance,
        forms: forms.into_iter().map(|(_, f)| f).collect(),
    })
}

fn invariant(form: usize, rule: &'static str, detail: String) -> DataError {
    DataError::Invariant { form, rule, detail }
}

fn validate_raw(raw: RawData) -> Result<LoadReport, DataError> {
    if raw.level != 1 {
        return Err(DataError::Dataset {
            rule: "level = 1",
            detail: format!("level {} is not supported", raw.level),
        });
    }
    let mut warnings = Vec::new();
    let mut forms = Vec::with_capacity(raw.forms.len());
    for (i, f) in raw.forms.into_iter().enumerate() {
        let norm_sq = match f.norm_sq {
            Some(v) => v,
            None => {
                warnings.push(ValidationWarning {
                    form: Some(i),
                    rule: "norm_sq present",
                    detail: "norm_sq missing; using 1.0 (affects weighting only)".into(),
                });
                1.0
            }
        };
        let mut record = MaassFormRecord {
            t: f.t,
            parity: f.parity,
            sign: f.sign,
            norm_sq,
            hecke: f.hecke,
            zeros: f.zeros,
            zero_window: f.zero_window,
        };
        check_form(i, &mut record)?;
        warnings.extend(soft_checks(i, &record));
        forms.push((i, record));
    }
    forms.sort_by(|a, b| a.1.t.total_cmp(&b.1.t));
    for pair in forms.windows(2) {
        if (pair[1].1.t - pair[0].1.t).abs() <= 1e-9 {
            return Err(DataError::Dataset {
                rule: "distinct t",
                detail: format!(
                    "forms {} and {} share t = {}",
                    pair[0].0, pair[1].0, pair[0].1.t
                ),
            });
        }
    }
    Ok(LoadReport {
        data: MaassData {
            level: 1,
            provenance: raw.provenance,
            forms: forms.into_iter().map(|(_, f)| f).collect(),
        },
        warnings,
    })
}

/// Hard rules for one form. Sorts the zero list in place.
fn check_form(i: usize, f: &mut MaassFormRecord) -> Result<(), DataError> {
    if !(f.t > 0.0) || !f.t.is_finite() {
        return Err(invariant(i, "t > 0", format!("t = {}", f.t)));
    }
    if f.parity > 1 {
        return Err(invariant(
            i,
            "parity in {0,1}",
            format!("parity = {}", f.parity),
        ));
    }
    if f.sign != 1 && f.sign != -1 {
        return Err(invariant(
            i,
            "sign in {+1,-1}",
            format!("sign = {}", f.sign),
        ));
    }
    if !(f.norm_sq > 0.0) || !f.norm_sq.is_finite() {
        return Err(invariant(
            i,
            "norm_sq > 0",
            format!("norm_sq = {}", f.norm_sq),
        ));
    }
    match f.lambda(1) {
        Some(v) if v == 1.0 => {}
        Some(v) => return Err(invariant(i, "lambda(1)=1", format!("lambda(1) = {v}"))),
        None => {
            return Err(DataError::Missing {
                form: i,
                what: "lambda(1)".into(),
            })
        }
    }
    for (&n, &v) in &f.hecke {
        if n == 0 {
            return Err(invariant(
                i,
                "hecke index >= 1",
                "lambda(0) is not defined".into(),
            ));
        }
        if !v.is_finite() {
            return Err(invariant(i, "hecke finite", format!("lambda({n}) = {v}")));
        }
    }
    check_multiplicativity(i, f)?;
    if let Some(zeros) = f.zeros.as_mut() {
        if let Some(z) = zeros.iter().find(|z| !(**z > 0.0) || !z.is_finite()) {
            return Err(invariant(
                i,
                "zeros positive",
                format!(
                    "zero ordinate {z}; store only gamma > 0 (the central zero follows from sign)"
                ),
            ));
        }
        zeros.sort_by(f64::total_cmp);
        if let Some(w) = f.zero_window {
            if !(w > 0.0) {
                return Err(invariant(
                    i,
                    "zero_window > 0",
                    format!("zero_window = {w}"),
                ));
            }
            if let Some(z) = zeros.last().filter(|z| **z > w) {
                return Err(invariant(
                    i,
                    "zeros within window",
                    format!("zero {z} exceeds zero_window {w}"),
                ));
            }
        }
    }
    Ok(())
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// lambda(ab) = lambda(a) lambda(b) over every coprime split of each stored
/// index where both factors are stored.
fn check_multiplicativity(i: usize, f: &MaassFormRecord) -> Result<(), DataError> {
    for (&n, &v) in &f.hecke {
        let parts: Vec<u64> = factorize(n).into_iter().map(|(p, e)| p.pow(e)).collect();
        if parts.len() < 2 {
            continue;
        }
        // unitary divisors a with 1 < a < n; each split is visited twice, harmlessly
        for mask in 1..(1u32 << parts.len()) - 1 {
            let a: u64 = parts
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, q)| q)
                .product();
            let b = n / a;
            if let (Some(la), Some(lb)) = (f.lambda(a), f.lambda(b)) {
                if (v - la * lb).abs() > HECKE_TOL {
                    return Err(invariant(
                        i,
                        "multiplicativity",
                        format!(
                            "lambda({n}) = {v} but lambda({a}) lambda({b}) = {}",
                            la * lb
                        ),
                    ));
                }
            }
        }
    }
    Ok(())
}

fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).len() == 1 && factorize(n)[0].1 == 1
}

fn soft_checks(i: usize, f: &MaassFormRecord) -> Vec<ValidationWarning> {
    let mut out = Vec::new();
    for (&p, &v) in &f.hecke {
        if is_prime(p) {
            let bound = 2.0 * (p as f64).powf(7.0 / 64.0) + 1e-3;
            if v.abs() > bound {
                out.push(ValidationWarning {
                    form: Some(i),
                    rule: "Kim-Sarnak bound",
                    detail: format!(
                        "|lambda({p})| = {} exceeds 2 p^(7/64) = {bound:.6}",
                        v.abs()
                    ),
                });
            }
        }
    }
    let (lo, hi) = (f.t.powf(-0.5), f.t.powf(0.5));
    if f.norm_sq < lo.min(hi) || f.norm_sq > hi.max(lo) {
        out.push(ValidationWarning {
            form: Some(i),
            rule: "norm band",
            detail: format!(
                "norm_sq = {} outside [t^-1/2, t^1/2] = [{:.4}, {:.4}]",
                f.norm_sq,
                lo.min(hi),
                hi.max(lo)
            ),
        });
    }
    out
}

/// Serialises to the JSON layout.
pub fn to_json(data: &MaassData) -> String {
    serde_json::to_string_pretty(data).expect("dataset serialises")
}

/// Serialises to the CSV layout. Values use shortest round-trip formatting.
pub fn to_csv(data: &MaassData) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "#! level: {}", data.level);
    let _ = writeln!(out, "#! provenance: {}", data.provenance.replace('\n', " "));
    out.push_str("# forms\nindex,t,parity,sign,norm_sq,zero_window,zeros\n");
    for (i, f) in data.forms.iter().enumerate() {
        let zeros = f
            .zeros
            .as_ref()
            .map(|z| {
                if z.is_empty() {
                    "-".to_string()
                } else {
                    z.iter()
                        .map(|v| format!("{v:?}"))
                        .collect::<Vec<_>>()
                        .join(";")
                }
            })
            .unwrap_or_default();
        let window = f.zero_window.map(|w| format!("{w:?}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{i},{:?},{},{},{:?},{window},{zeros}",
            f.t, f.parity, f.sign, f.norm_sq
        );
    }
    out.push_str("# hecke\nindex,n,lambda\n");
    for (i, f) in data.forms.iter().enumerate() {
        for (n, v) in &f.hecke {
            let _ = writeln!(out, "{i},{n},{v:?}");
        }
    }
    out
}

/// Report of [`validate_hecke`].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct HeckeReport {
    /// Pairs (p, p^2) with both values stored and checked.
    pub checked_pairs: usize,
    /// (form, p, stored lambda(p^2), lambda(p)^2 - 1) beyond tolerance.
    pub flagged: Vec<(usize, u64, f64, f64)>,
    /// lambda(p^2) values that are stored.
    pub stored_p2: usize,
    /// lambda(p^2) values that can only be derived from lambda(p).
    pub derivable_p2: usize,
    /// Primes violating the Kim-Sarnak band (form, p, lambda(p)).
    pub kim_sarnak: Vec<(usize, u64, f64)>,
    pub warnings: Vec<String>,
}

impl HeckeReport {
    pub fn passed(&self) -> bool {
        self.flagged.is_empty()
    }
}

/// Checks lambda(p^2) = lambda(p)^2 - 1 and the Kim-Sarnak band.
pub fn validate_hecke(data: &MaassData) -> HeckeReport {
    let per_form: Vec<HeckeReport> = data
        .forms
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let mut r = HeckeReport::default();
            for (&p, &lp) in &f.hecke {
                if !is_prime(p) {
                    continue;
                }
                if lp.abs() > 2.0 * (p as f64).powf(7.0 / 64.0) + 1e-3 {
                    r.kim_sarnak.push((i, p, lp));
                }
                match p.checked_mul(p).and_then(|q| f.lambda(q)) {
                    Some(stored) => {
                        r.stored_p2 += 1;
                        r.checked_pairs += 1;
                        let derived = crate::density::hecke_p2(lp);
                        if (stored - derived).abs() > HECKE_TOL {
                            r.flagged.push((i, p, stored, derived));
                        }
                    }
                    None => r.derivable_p2 += 1,
                }
            }
            if f.hecke.len() <= 1 {
                r.warnings.push(format!(
                    "form {i}: no Hecke eigenvalues beyond lambda(1); check is vacuous"
                ));
            }
            r
        })
        .collect();
    let mut total = HeckeReport::default();
    for r in per_form {
        total.checked_pairs += r.checked_pairs;
        total.flagged.extend(r.flagged);
        total.stored_p2 += r.stored_p2;
        total.derivable_p2 += r.derivable_p2;
        total.kim_sarnak.extend(r.kim_sarnak);
        total.warnings.extend(r.warnings);
    }
    total
}

/// Report of [`weyl_law_check`].
#[derive(Debug, Clone, Serialize)]
pub struct WeylReport {
    pub forms: usize,
    /// X = largest t in the data.
    pub x_max: f64,
    /// X^2 / 12.
    pub expected: f64,
    /// forms / expected, absent when skipped.
    pub ratio: Option<f64>,
    /// "ok", "warn" or "skipped".
    pub status: &'static str,
    pub notice: String,
}

/// Compares #{t_j <= X} with X^2/12 at X = max t_j.
pub fn weyl_law_check(data: &MaassData) -> WeylReport {
    let n = data.forms.len();
    let x_max = data.forms.iter().map(|f| f.t).fold(0.0, f64::max);
    let expected = x_max * x_max / 12.0;
    if n < 10 {
        return WeylReport {
            forms: n,
            x_max,
            expected,
            ratio: None,
            status: "skipped",
            notice: format!("{n} forms; at least 10 are needed for a Weyl-law comparison"),
        };
    }
    let ratio = n as f64 / expected;
    let ok = (0.5..=1.5).contains(&ratio);
    WeylReport {
        forms: n,
        x_max,
        expected,
        ratio: Some(ratio),
        status: if ok { "ok" } else { "warn" },
        notice: if ok {
            "count consistent with Weyl's law".into()
        } else {
            format!(
                "count ratio {ratio:.3} outside [0.5, 1.5]; dataset likely incomplete or padded"
            )
        },
    }
}

/// Report of [`weights_sum`].
#[derive(Debug, Clone, Serialize)]
pub struct WeightsReport {
    pub sum: f64,
    /// Trace-formula prediction (1/pi^2) int r tanh(r) h_T(r) dr.
    pub prediction: f64,
    pub ratio: f64,
}

/// sum_j h_T(t_j) / ||u_j||^2 in ascending t order, against the
/// trace-formula prediction.
pub fn weights_sum(
    data: &MaassData,
    w: &WeightFunction,
    opts: &QuadOptions,
) -> Result<WeightsReport, crate::Error> {
    let sum = raw_weights_sum(data, w);
    let prediction = crate::trace::tanh_integral(w, opts)?;
    Ok(WeightsReport {
        sum,
        prediction,
        ratio: sum / prediction,
    })
}

pub(crate) fn raw_weights_sum(data: &MaassData, w: &WeightFunction) -> f64 {
    let mut acc = crate::arith::KahanSum::default();
    for f in &data.forms {
        acc.add(w.eval(f.t) / f.norm_sq);
    }
    acc.value()
}

/// Settings of the synthetic generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub count: usize,
    pub tmax: f64,
    pub seed: u64,
    /// Hecke eigenvalues are generated for all n up to this bound.
    pub hecke_limit: u64,
    /// Zeros are generated on (0, zero_window].
    pub zero_window: f64,
}

impl SynthConfig {
    /// Count matching Weyl's law up to `tmax`.
    pub fn weyl(tmax: f64, seed: u64) -> Self {
        Self {
            count: ((tmax * tmax / 12.0).round() as usize).max(1),
            tmax,
            seed,
            hecke_limit: 200,
            zero_window: 4.0,
        }
    }
}

/// Structurally valid random data: t_j with Weyl-law density, Sato-Tate
/// lambda(p) extended by the Hecke relations, parity-determined signs, and
/// uniformly scattered zeros. Not real Maass form data.
pub fn synth(cfg: &SynthConfig) -> Result<MaassData, DataError> {
    if cfg.count == 0 || !(cfg.tmax > 1.0) || !(cfg.zero_window > 0.0) {
        return Err(DataError::Empty(
            "synthetic generator needs count >= 1, tmax > 1 and zero_window > 0".into(),
        ));
    }
    let primes = if cfg.hecke_limit >= 2 {
        sieve_primes(cfg.hecke_limit).map_err(|e| DataError::Parse(e.to_string()))?
    } else {
        Vec::new()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut forms = Vec::with_capacity(cfg.count);
    let mut used = std::collections::BTreeSet::new();
    while forms.len() < cfg.count {
        // N(t) grows like t^2
        let t = 1.0 + (cfg.tmax - 1.0) * rng.gen::<f64>().sqrt();
        let key = (t * 1e6).round() as u64;
        if !used.insert(key) {
            continue;
        }
        let parity: u8 = rng.gen_range(0..=1);
        let sign = if parity == 0 { 1 } else { -1 };
        let norm_sq = t.powf(rng.gen_range(-0.25..0.25));
        let mut hecke = BTreeMap::new();
        hecke.insert(1, 1.0);
        for &p in &primes {
            let lp = 2.0 * sato_tate_angle(&mut rng).cos();
            let (mut prev, mut cur) = (1.0, lp);
            let mut q = p;
            while q <= cfg.hecke_limit {
                hecke.insert(q, cur);
                (prev, cur) = (cur, lp * cur - prev);
                q = match q.checked_mul(p) {
                    Some(v) => v,
                    None => break,
                };
            }
        }
        for n in 2..=cfg.hecke_limit {
            if hecke.contains_key(&n) {
                continue;
            }
            let v: f64 = factorize(n)
                .into_iter()
                .map(|(p, e)| hecke[&p.pow(e)])
                .product();
            hecke.insert(n, v);
        }
        let density = (t * t).ln() / (2.0 * std::f64::consts::PI);
        let expected = (density * cfg.zero_window).max(1.0);
        let nz = rng.gen_range(0..=(2.0 * expected).ceil() as usize);
        let mut zeros: Vec<f64> = (0..nz)
            .map(|_| cfg.zero_window * (1.0 - rng.gen::<f64>()))
            .collect();
        zeros.sort_by(f64::total_cmp);
        zeros.dedup();
        forms.push(MaassFormRecord {
            t,
            parity,
            sign,
            norm_sq,
            hecke,
            zeros: Some(zeros),
            zero_window: Some(cfg.zero_window),
        });
    }
    forms.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(MaassData {
        level: 1,
        provenance: format!(
            "synthetic (seed {}, count {}, tmax {}); not real Maass form data",
            cfg.seed, cfg.count, cfg.tmax
        ),
        forms,
    })
}

/// Angle with density (2/pi) sin^2(theta) on [0, pi], by rejection.
fn sato_tate_angle<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let theta = std::f64::consts::PI * rng.gen::<f64>();
        if rng.gen::<f64>() < theta.sin().powi(2) {
            return theta;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"level":1,"provenance":"test","forms":[{"t":9.5,"parity":1,"sign":-1,"norm_sq":1.0,"hecke":{"1":1.0}}]}"#;

    #[test]
    fn minimal_json_loads() {
        let r = parse_json(MINIMAL).unwrap();
        assert_eq!(r.data.forms.len(), 1);
        assert_eq!(r.data.forms[0].lambda(1), Some(1.0));
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn lambda_one_enforced() {
        let text = MINIMAL.replace("\"1\":1.0", "\"1\":0.99");
        let e = parse_json(&text).unwrap_err();
        assert!(
            matches!(
                e,
                DataError::Invariant {
                    rule: "lambda(1)=1",
                    form: 0,
                    ..
                }
            ),
            "{e}"
        );
    }

    #[test]
    fn multiplicativity_enforced() {
        let text = MINIMAL.replace("\"1\":1.0", "\"1\":1.0,\"2\":0.5,\"3\":0.4,\"6\":0.3");
        let e = parse_json(&text).unwrap_err();
        assert!(
            matches!(
                e,
                DataError::Invariant {
                    rule: "multiplicativity",
                    ..
                }
            ),
            "{e}"
        );
        let ok = MINIMAL.replace("\"1\":1.0", "\"1\":1.0,\"2\":0.5,\"3\":0.4,\"6\":0.2");
        assert!(parse_json(&ok).is_ok());
    }

    #[test]
    fn missing_norm_warns() {
        let text = MINIMAL.replace("\"norm_sq\":1.0,", "");
        let r = parse_json(&text).unwrap();
        assert_eq!(r.data.forms[0].norm_sq, 1.0);
        assert!(r.warnings.iter().any(|w| w.rule == "norm_sq present"));
    }

    #[test]
    fn duplicate_t_and_level_rejected() {
        let two = r#"{"level":1,"provenance":"","forms":[
            {"t":9.5,"parity":0,"sign":1,"norm_sq":1.0,"hecke":{"1":1.0}},
            {"t":9.5,"parity":1,"sign":-1,"norm_sq":1.0,"hecke":{"1":1.0}}]}"#;
        assert!(matches!(
            parse_json(two).unwrap_err(),
            DataError::Dataset {
                rule: "distinct t",
                ..
            }
        ));
        let lvl = MINIMAL.replace("\"level\":1", "\"level\":2");
        assert!(matches!(
            parse_json(&lvl).unwrap_err(),
            DataError::Dataset {
                rule: "level = 1",
                ..
            }
        ));
    }

    #[test]
    fn csv_round_trip() {
        let data = synth(&SynthConfig {
            count: 5,
            ..SynthConfig::weyl(20.0, 3)
        })
        .unwrap();
        let back = parse_csv(&to_csv(&data)).unwrap().data;
        assert_eq!(back, data);
        let back = parse_json(&to_json(&data)).unwrap().data;
        assert_eq!(back, data);
    }

    #[test]
    fn hecke_relation_report() {
        let ok = MINIMAL.replace("\"1\":1.0", "\"1\":1.0,\"2\":1.0,\"4\":0.0");
        assert!(validate_hecke(&parse_json(&ok).unwrap().data).passed());
        let bad = MINIMAL.replace("\"1\":1.0", "\"1\":1.0,\"2\":1.0,\"4\":0.5");
        let r = validate_hecke(&parse_json(&bad).unwrap().data);
        assert_eq!(r.flagged.len(), 1);
        let empty = validate_hecke(&parse_json(MINIMAL).unwrap().data);
        assert!(empty.passed() && !empty.warnings.is_empty());
    }

    #[test]
    fn synthetic_data_is_valid_and_reproducible() {
        let cfg = SynthConfig::weyl(40.0, 11);
        let a = synth(&cfg).unwrap();
        let b = synth(&cfg).unwrap();
        assert_eq!(a, b);
        let reparsed = parse_json(&to_json(&a)).unwrap();
        assert_eq!(reparsed.data, a);
        assert!(validate_hecke(&a).passed());
        let weyl = weyl_law_check(&a);
        assert!((weyl.ratio.unwrap() - 1.0).abs() < 0.1, "{weyl:?}");
    }
}
