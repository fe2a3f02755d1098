//! `lowlying`: command-line front end. Reports go to stdout as JSON (or as
//! two-column CSV with `--output csv`), diagnostics to stderr.
//!
//! Exit codes: 0 success, 2 configuration or validation error, 3 numerical
//! non-convergence.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use maass_lowlying::arith::{kloosterman, weil_bound, weil_sweep};
use maass_lowlying::data::{
    load_dataset, synth, to_csv, to_json, validate_hecke, weyl_law_check, DataFormat, LoadReport,
    SynthConfig,
};
use maass_lowlying::density::{
    d1_weighted_average_at, d2_empirical_at, diagonal_pair_sum, gamma_factor_term, prime_sum_lemma,
    scaling_r, DensityReport,
};
use maass_lowlying::quadrature::QuadOptions;
use maass_lowlying::specfun::{bessel_j_imag_order, bessel_j_over_cosh};
use maass_lowlying::testfun::{
    make_gaussian_weight, make_triangle_testfun, make_twobump_weight, TestFunction, WeightFunction,
    WeightKind,
};
use maass_lowlying::trace::{
    a_term, a_term_integrand, bessel_kloosterman_integral, bessel_kloosterman_main_term,
    bump_bessel_integral, c_cutoff, calibrate_large_c, default_c_max, tanh_integral, verify_trace,
    TraceOptions,
};
use maass_lowlying::Error;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "lowlying",
    version,
    about = "Trace-formula and low-lying zero numerics for level-1 Maass forms"
)]
struct Cli {
    /// Report format: a JSON report, or two-column CSV plot data.
    #[arg(long, value_enum, default_value_t = Output::Json, global = true)]
    output: Output,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = 1e-10, global = true)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Output {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum WeightChoice {
    Gaussian,
    TwoBump,
}

#[derive(Args, Debug, Clone)]
struct WeightArgs {
    /// Spectral weight family.
    #[arg(long, value_enum, default_value_t = WeightChoice::TwoBump)]
    weight: WeightChoice,
    /// Weight centre / scale T.
    #[arg(long = "T")]
    t: f64,
    /// Bump width L (two-bump only).
    #[arg(long = "L", default_value_t = 2.0)]
    l: f64,
    /// Width exponent eta in (0, 1) (two-bump only).
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
}

impl WeightArgs {
    fn build(&self) -> Result<WeightFunction, Error> {
        match self.weight {
            WeightChoice::Gaussian => make_gaussian_weight(self.t),
            WeightChoice::TwoBump => make_twobump_weight(self.t, self.l, self.eta),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Kloosterman sum S(m, n; c), or a Weil-bound sweep with --sweep.
    Kloosterman {
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        m: i64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        n: i64,
        #[arg(long, required_unless_present = "sweep")]
        c: Option<u64>,
        /// Check the Weil bound for all 1 <= m <= m-max, 1 <= n <= n-max, 1 <= c <= c-max.
        #[arg(long)]
        sweep: bool,
        #[arg(long, default_value_t = 50)]
        m_max: u64,
        #[arg(long, default_value_t = 50)]
        n_max: u64,
        #[arg(long, default_value_t = 5000)]
        c_max: u64,
    },
    /// J_{2ir}(x) from the power series (x <= 30).
    Bessel {
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        #[arg(long)]
        x: f64,
    },
    /// Modulus beyond which the two-bump main term vanishes.
    Cutoff {
        #[arg(long, default_value_t = 1)]
        m: u64,
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[arg(long = "T")]
        t: f64,
        #[arg(long = "L")]
        l: f64,
    },
    /// Both sides of the Kuznetsov trace formula.
    Trace {
        #[arg(long, default_value_t = 1)]
        m: u64,
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[command(flatten)]
        weight: WeightArgs,
        /// Spectral dataset (JSON or CSV); without it the spectral side is 0.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        c_max: Option<u64>,
        /// Also evaluate C with 2 c_max and report the relative change.
        #[arg(long)]
        check_doubling: bool,
    },
    /// Weighted 1-level density of a dataset.
    Density1 {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        weight: WeightArgs,
        /// Fourier support of the triangle test function.
        #[arg(long, default_value_t = 0.25)]
        sigma: f64,
        /// Scaling parameter (default T^2).
        #[arg(long = "R")]
        r: Option<f64>,
    },
    /// Weighted 2-level density of a dataset.
    Density2 {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        weight: WeightArgs,
        #[arg(long, default_value_t = 0.25)]
        sigma: f64,
        /// Support of the second test function (default: sigma).
        #[arg(long)]
        sigma2: Option<f64>,
        #[arg(long = "R")]
        r: Option<f64>,
    },
    /// Individual lemmas.
    #[command(subcommand)]
    Lemma(Lemma),
    /// Load and validate a dataset.
    Validate {
        #[arg(long)]
        data: PathBuf,
    },
    /// Seeded synthetic dataset (not real Maass form data).
    Synth {
        /// Number of forms (default: Weyl's law count up to tmax).
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        hecke_limit: u64,
        #[arg(long, default_value_t = 4.0)]
        zero_window: f64,
    },
}

#[derive(Subcommand, Debug)]
enum Lemma {
    /// (1/pi^2) int r tanh(r) h(r) dr against T^2 or LT.
    Tanh {
        #[command(flatten)]
        weight: WeightArgs,
    },
    /// Form-independent prime sum against phi(0)/2.
    PrimeSum {
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long = "R", required = true)]
        r: Vec<f64>,
    },
    /// Diagonal prime sum of the 2-level density against its limit.
    Diagonal {
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long)]
        sigma2: Option<f64>,
        #[arg(long = "R", required = true)]
        r: Vec<f64>,
    },
    /// Gamma-factor integral against phi^(0) log(1 + t^2)/log R.
    GammaTerm {
        #[arg(long, required = true)]
        t: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        parity: u8,
        #[arg(long = "R", required = true)]
        r: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
    },
    /// Bessel-Kloosterman integrals against the stationary-phase main term.
    MainTerm {
        #[arg(long, default_value_t = 1)]
        m: u64,
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[arg(long, default_values_t = [1u64])]
        c: Vec<u64>,
        #[arg(long = "T")]
        t: f64,
        #[arg(long = "L")]
        l: f64,
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
    },
    /// The continuous-spectrum term A.
    ATerm {
        #[arg(long, default_value_t = 1)]
        m: u64,
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[command(flatten)]
        weight: WeightArgs,
    },
    /// |I_c| against the large-c bound shape over a (c, T) grid.
    LargeC {
        #[arg(long, default_value_t = 1)]
        m: u64,
        #[arg(long, default_value_t = 1)]
        n: u64,
        #[arg(long, required = true)]
        c: Vec<u64>,
        #[arg(long = "T", required = true)]
        t: Vec<f64>,
        #[arg(long = "L")]
        l: f64,
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
    },
}

/// Everything that determines a report.
#[derive(Debug, Default, Serialize)]
struct RunConfig {
    subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    weight: Option<WeightFunction>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    testfun: Vec<TestFunction>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    r: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_max: Option<u64>,
    tol: f64,
    output: Option<Output>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threads: Option<usize>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    params: BTreeMap<&'static str, Value>,
}

/// Two-column plot data.
struct Plot {
    x: &'static str,
    y: &'static str,
    rows: Vec<(f64, f64)>,
}

impl Plot {
    fn new(x: &'static str, y: &'static str, rows: Vec<(f64, f64)>) -> Self {
        Self { x, y, rows }
    }
}

struct Outcome {
    report: Value,
    plot: Plot,
    /// Exit with status 2 after printing (validation failures).
    failed: bool,
}

fn outcome<T: Serialize>(report: &T, plot: Plot) -> Result<Outcome, Error> {
    let report = serde_json::to_value(report)
        .map_err(|e| Error::Config(format!("serialising report: {e}")))?;
    Ok(Outcome {
        report,
        plot,
        failed: false,
    })
}

fn trace_options(tol: f64) -> TraceOptions {
    let mut o = TraceOptions::default();
    o.quad.abs_tol = tol;
    o
}

fn load(path: &Path) -> Result<LoadReport, Error> {
    let report = load_dataset(path, DataFormat::from_path(path))
        .map_err(|e| Error::Config(format!("loading {}: {e}", path.display())))?;
    for w in &report.warnings {
        match w.form {
            Some(i) => eprintln!("warning: form {i}: {}: {}", w.rule, w.detail),
            None => eprintln!("warning: {}: {}", w.rule, w.detail),
        }
    }
    Ok(report)
}

fn density_plot(rep: &DensityReport) -> Plot {
    Plot::new("log_R", "deviation", vec![(rep.r.ln(), rep.deviation)])
}

fn run(cli: &Cli, cfg: &mut RunConfig) -> Result<Outcome, Error> {
    if !(cli.tol > 0.0) {
        return Err(Error::Config(format!(
            "--tol must be positive, got {}",
            cli.tol
        )));
    }
    let tol = cli.tol;
    match &cli.command {
        Command::Kloosterman {
            m,
            n,
            c,
            sweep,
            m_max,
            n_max,
            c_max,
        } => {
            if *sweep {
                cfg.subcommand = "kloosterman --sweep".into();
                cfg.c_max = Some(*c_max);
                cfg.params.insert("m_max", json!(m_max));
                cfg.params.insert("n_max", json!(n_max));
                let s = weil_sweep(*m_max, *n_max, *c_max)?;
                let plot = Plot::new("c_max", "max_ratio", vec![(*c_max as f64, s.max_ratio)]);
                let mut out = outcome(&s, plot)?;
                out.report["passed"] = json!(s.violations.is_empty());
                return Ok(out);
            }
            let c = c.expect("required unless --sweep");
            cfg.params.insert("m", json!(m));
            cfg.params.insert("n", json!(n));
            cfg.params.insert("c", json!(c));
            let k = kloosterman(*m, *n, c)?;
            let bound = weil_bound(*m, *n, c);
            let plot = Plot::new("c", "value", vec![(c as f64, k.value)]);
            let mut out = outcome(&k, plot)?;
            out.report["weil_bound"] = json!(bound);
            out.report["ratio"] = json!(k.value.abs() / bound);
            Ok(out)
        }
        Command::Bessel { r, x } => {
            cfg.params.insert("r", json!(r));
            cfg.params.insert("x", json!(x));
            let j = bessel_j_imag_order(*r, *x)?;
            let mirror = bessel_j_imag_order(-*r, *x)?;
            let ratio = bessel_j_over_cosh(*r, *x)?;
            let report = json!({
                "value": {"re": j.re, "im": j.im},
                "abs": j.norm(),
                "over_cosh": {"re": ratio.re, "im": ratio.im},
                "conj_symmetry_error": (mirror - j.conj()).norm(),
            });
            outcome(&report, Plot::new("x", "abs", vec![(*x, j.norm())]))
        }
        Command::Cutoff { m, n, t, l } => {
            cfg.params.insert("m", json!(m));
            cfg.params.insert("n", json!(n));
            cfg.params.insert("T", json!(t));
            cfg.params.insert("L", json!(l));
            if !(*t > 1.0) || !(*l > 0.0) {
                return Err(Error::Config(format!(
                    "cutoff needs T > 1 and L > 0, got T = {t}, L = {l}"
                )));
            }
            let cut = c_cutoff(*m, *n, *t, *l);
            let c_hi = (cut.ceil() as u64).clamp(1, 1000) + 3;
            let rows: Vec<(f64, f64)> = (1..=c_hi)
                .map(|c| {
                    (
                        c as f64,
                        bessel_kloosterman_main_term(c, *m, *n, *t, *l).norm(),
                    )
                })
                .collect();
            let report = json!({
                "c_cutoff": cut,
                "main_term_abs": rows.iter().map(|&(c, v)| json!({"c": c as u64, "abs": v})).collect::<Vec<_>>(),
            });
            outcome(&report, Plot::new("c", "main_term_abs", rows))
        }
        Command::Trace {
            m,
            n,
            weight,
            data,
            c_max,
            check_doubling,
        } => {
            let w = weight.build()?;
            cfg.weight = Some(w);
            cfg.data = data.clone();
            let c_max = c_max.unwrap_or_else(|| default_c_max(*m, *n, &w));
            cfg.c_max = Some(c_max);
            cfg.params.insert("m", json!(m));
            cfg.params.insert("n", json!(n));
            cfg.params.insert("check_doubling", json!(check_doubling));
            let (dataset, weyl) = match data {
                Some(p) => {
                    let d = load(p)?.data;
                    let weyl = weyl_law_check(&d);
                    (d, Some(weyl))
                }
                None => (maass_lowlying::data::MaassData::empty(), None),
            };
            let rep = verify_trace(
                &dataset,
                *m,
                *n,
                &w,
                Some(c_max),
                *check_doubling,
                &trace_options(tol),
            )?;
            let rows = rep
                .c_terms
                .iter()
                .enumerate()
                .map(|(i, &v)| ((i + 1) as f64, v))
                .collect();
            let mut out = outcome(&rep, Plot::new("c", "c_term", rows))?;
            if let Some(weyl) = weyl {
                out.report["weyl"] = serde_json::to_value(weyl).unwrap_or(Value::Null);
            }
            Ok(out)
        }
        Command::Density1 {
            data,
            weight,
            sigma,
            r,
        } => {
            let w = weight.build()?;
            let phi = make_triangle_testfun(*sigma)?;
            let r = match r {
                Some(r) => *r,
                None => scaling_r(w.t)?,
            };
            cfg.weight = Some(w);
            cfg.testfun = vec![phi];
            cfg.r = Some(json!(r));
            cfg.data = Some(data.clone());
            let d = load(data)?.data;
            let rep = d1_weighted_average_at(&d, &phi, &w, r)?;
            for warning in &rep.warnings {
                eprintln!("warning: {warning}");
            }
            let plot = density_plot(&rep);
            outcome(&rep, plot)
        }
        Command::Density2 {
            data,
            weight,
            sigma,
            sigma2,
            r,
        } => {
            let w = weight.build()?;
            let phi1 = make_triangle_testfun(*sigma)?;
            let phi2 = make_triangle_testfun(sigma2.unwrap_or(*sigma))?;
            let r = match r {
                Some(r) => *r,
                None => scaling_r(w.t)?,
            };
            cfg.weight = Some(w);
            cfg.testfun = vec![phi1, phi2];
            cfg.r = Some(json!(r));
            cfg.data = Some(data.clone());
            let d = load(data)?.data;
            let rep = d2_empirical_at(&d, &phi1, &phi2, &w, r)?;
            for warning in &rep.warnings {
                eprintln!("warning: {warning}");
            }
            let plot = density_plot(&rep);
            let mut out = outcome(&rep, plot)?;
            out.report["decomposition"] = json!(rep.decomposition());
            Ok(out)
        }
        Command::Lemma(lemma) => run_lemma(lemma, tol, cfg),
        Command::Validate { data } => {
            cfg.data = Some(data.clone());
            let loaded = load(data)?;
            let hecke = validate_hecke(&loaded.data);
            let weyl = weyl_law_check(&loaded.data);
            let passed = hecke.passed();
            let rows = loaded
                .data
                .forms
                .iter()
                .enumerate()
                .map(|(i, f)| (i as f64, f.t))
                .collect();
            let report = json!({
                "forms": loaded.data.forms.len(),
                "provenance": loaded.data.provenance,
                "warnings": loaded.warnings,
                "hecke": hecke,
                "weyl": weyl,
                "passed": passed,
            });
            let mut out = outcome(&report, Plot::new("index", "t", rows))?;
            out.failed = !passed;
            Ok(out)
        }
        Command::Synth { .. } => unreachable!("synth writes a dataset, handled in main"),
    }
}

fn run_lemma(lemma: &Lemma, tol: f64, cfg: &mut RunConfig) -> Result<Outcome, Error> {
    match lemma {
        Lemma::Tanh { weight } => {
            cfg.subcommand = "lemma tanh".into();
            let w = weight.build()?;
            cfg.weight = Some(w);
            let v = tanh_integral(&w, &trace_options(tol).quad)?;
            let expected = match w.kind {
                WeightKind::Gaussian => w.t * w.t,
                WeightKind::TwoBump => w.width() * w.t,
            };
            let scaled = PI * PI * v;
            let report = json!({
                "tanh_integral": v,
                "pi2_times_integral": scaled,
                "expected": expected,
                "deviation": scaled - expected,
            });
            outcome(
                &report,
                Plot::new("T", "deviation", vec![(w.t, scaled - expected)]),
            )
        }
        Lemma::PrimeSum { sigma, r } => {
            cfg.subcommand = "lemma prime-sum".into();
            let phi = make_triangle_testfun(*sigma)?;
            cfg.testfun = vec![phi];
            cfg.r = Some(json!(r));
            let limit = 0.5 * phi.value_at_zero();
            let mut points = Vec::new();
            let mut rows = Vec::new();
            for &rv in r {
                let v = prime_sum_lemma(&phi, rv)?;
                let log_r = rv.ln();
                points.push(json!({
                    "R": rv,
                    "value": v,
                    "limit": limit,
                    "deviation": v - limit,
                    "bound": 3.0 * log_r.ln() / log_r,
                }));
                rows.push((log_r, (v - limit).abs()));
            }
            outcome(
                &json!({ "points": points }),
                Plot::new("log_R", "abs_deviation", rows),
            )
        }
        Lemma::Diagonal { sigma, sigma2, r } => {
            cfg.subcommand = "lemma diagonal".into();
            let phi1 = make_triangle_testfun(*sigma)?;
            let phi2 = make_triangle_testfun(sigma2.unwrap_or(*sigma))?;
            cfg.testfun = vec![phi1, phi2];
            cfg.r = Some(json!(r));
            let mut points = Vec::new();
            let mut rows = Vec::new();
            for &rv in r {
                let d = diagonal_pair_sum(&phi1, &phi2, rv)?;
                points.push(json!({
                    "R": rv,
                    "sum": d.sum,
                    "limit": d.limit,
                    "deviation": d.sum - d.limit,
                }));
                rows.push((rv.ln(), (d.sum - d.limit).abs()));
            }
            outcome(
                &json!({ "points": points }),
                Plot::new("log_R", "abs_deviation", rows),
            )
        }
        Lemma::GammaTerm {
            t,
            parity,
            r,
            sigma,
        } => {
            cfg.subcommand = "lemma gamma-term".into();
            let phi = make_triangle_testfun(*sigma)?;
            cfg.testfun = vec![phi];
            cfg.r = Some(json!(r));
            cfg.params.insert("t", json!(t));
            cfg.params.insert("parity", json!(parity));
            let opts = QuadOptions::with_tol(tol);
            let mut points = Vec::new();
            let mut rows = Vec::new();
            for &tv in t {
                for &rv in r {
                    let g = gamma_factor_term(tv, *parity, rv, &phi, &opts)?;
                    points.push(json!({
                        "t": tv,
                        "R": rv,
                        "exact": g.exact,
                        "approx": g.approx,
                        "difference": g.difference,
                        "difference_times_log_R": g.difference * rv.ln(),
                    }));
                    rows.push((rv.ln(), g.difference));
                }
            }
            outcome(
                &json!({ "points": points }),
                Plot::new("log_R", "difference", rows),
            )
        }
        Lemma::MainTerm { m, n, c, t, l, eta } => {
            cfg.subcommand = "lemma main-term".into();
            let w = make_twobump_weight(*t, *l, *eta)?;
            cfg.weight = Some(w);
            cfg.params.insert("m", json!(m));
            cfg.params.insert("n", json!(n));
            cfg.params.insert("c", json!(c));
            let opts = trace_options(tol);
            let cut = c_cutoff(*m, *n, *t, *l);
            let peak = l * t.sqrt() / PI.sqrt();
            let mut points = Vec::new();
            let mut rows = Vec::new();
            for &cv in c {
                let main = bessel_kloosterman_main_term(cv, *m, *n, *t, *l);
                let bump = bump_bessel_integral(cv, *m, *n, *t, *l, &opts)?;
                let full = bessel_kloosterman_integral(cv, *m, *n, &w, &opts)?;
                let rel = if main.norm() > 0.0 {
                    json!((bump.norm() - main.norm()).abs() / main.norm())
                } else {
                    Value::Null
                };
                points.push(json!({
                    "c": cv,
                    "above_cutoff": (cv as f64) > cut,
                    "main_term": {"re": main.re, "im": main.im},
                    "main_term_abs": main.norm(),
                    "bump_integral": {"re": bump.re, "im": bump.im},
                    "bump_integral_abs": bump.norm(),
                    "weight_integral_abs": full.norm(),
                    "relative_error": rel,
                    "normalized_error": (bump.norm() - main.norm()).abs() / peak,
                }));
                rows.push((cv as f64, full.norm()));
            }
            let report = json!({
                "c_cutoff": cut,
                "peak_scale": peak,
                "points": points,
            });
            outcome(&report, Plot::new("c", "weight_integral_abs", rows))
        }
        Lemma::ATerm { m, n, weight } => {
            cfg.subcommand = "lemma a-term".into();
            let w = weight.build()?;
            cfg.weight = Some(w);
            cfg.params.insert("m", json!(m));
            cfg.params.insert("n", json!(n));
            let a = a_term(*m, *n, &w, &trace_options(tol))?;
            let report = json!({
                "a_term": a,
                "integrand_at_zero": a_term_integrand(*m, *n, &w, 0.0),
                "sqrt_mn_times_a_term": a * ((m * n) as f64).sqrt(),
            });
            outcome(&report, Plot::new("T", "a_term", vec![(w.t, a)]))
        }
        Lemma::LargeC { m, n, c, t, l, eta } => {
            cfg.subcommand = "lemma large-c".into();
            cfg.params.insert("m", json!(m));
            cfg.params.insert("n", json!(n));
            cfg.params.insert("c", json!(c));
            cfg.params.insert("T", json!(t));
            cfg.params.insert("L", json!(l));
            cfg.params.insert("eta", json!(eta));
            let rep = calibrate_large_c(c, t, *m, *n, *l, *eta, &trace_options(tol))?;
            let rows = rep.points.iter().map(|p| (p.c as f64, p.ratio)).collect();
            outcome(&rep, Plot::new("c", "ratio", rows))
        }
    }
}

fn subcommand_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Kloosterman { .. } => "kloosterman",
        Command::Bessel { .. } => "bessel",
        Command::Cutoff { .. } => "cutoff",
        Command::Trace { .. } => "trace",
        Command::Density1 { .. } => "density1",
        Command::Density2 { .. } => "density2",
        Command::Lemma(_) => "lemma",
        Command::Validate { .. } => "validate",
        Command::Synth { .. } => "synth",
    }
}

fn write_stdout(text: &str) -> ExitCode {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: writing output: {e}");
            ExitCode::from(2)
        }
    }
}

fn run_synth(cli: &Cli) -> Result<String, Error> {
    let Command::Synth {
        count,
        tmax,
        seed,
        hecke_limit,
        zero_window,
    } = &cli.command
    else {
        unreachable!()
    };
    let base = SynthConfig::weyl(*tmax, *seed);
    let cfg = SynthConfig {
        count: count.unwrap_or(base.count),
        hecke_limit: *hecke_limit,
        zero_window: *zero_window,
        ..base
    };
    let data = synth(&cfg)?;
    Ok(match cli.output {
        Output::Json => to_json(&data) + "\n",
        Output::Csv => to_csv(&data),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: configuring {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    if matches!(cli.command, Command::Synth { .. }) {
        return match run_synth(&cli) {
            Ok(text) => write_stdout(&text),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        };
    }
    let mut cfg = RunConfig {
        subcommand: subcommand_name(&cli.command).into(),
        tol: cli.tol,
        output: Some(cli.output),
        threads: cli.threads,
        ..RunConfig::default()
    };
    match run(&cli, &mut cfg) {
        Ok(out) => {
            let text = match cli.output {
                Output::Json => {
                    let mut report = out.report;
                    let config = serde_json::to_value(&cfg).unwrap_or(Value::Null);
                    match report.as_object_mut() {
                        Some(obj) => {
                            obj.insert("config".into(), config);
                        }
                        None => report = json!({ "result": report, "config": config }),
                    }
                    serde_json::to_string_pretty(&report).unwrap_or_default() + "\n"
                }
                Output::Csv => {
                    let mut s = format!("{},{}\n", out.plot.x, out.plot.y);
                    for (x, y) in &out.plot.rows {
                        s.push_str(&format!("{x:?},{y:?}\n"));
                    }
                    s
                }
            };
            let code = write_stdout(&text);
            if out.failed {
                eprintln!("error: validation failed");
                ExitCode::from(2)
            } else {
                code
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_convergence() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
