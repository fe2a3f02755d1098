use std::io::Write;

use maass_lowlying::data::*;
use maass_lowlying::error::DataError;
use maass_lowlying::quadrature::QuadOptions;
use maass_lowlying::testfun::make_gaussian_weight;

#[test]
fn files_round_trip_in_both_formats() {
    let data = synth(&SynthConfig::weyl(15.0, 9)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("forms.json");
    let csv = dir.path().join("forms.csv");
    std::fs::write(&json, to_json(&data)).unwrap();
    std::fs::write(&csv, to_csv(&data)).unwrap();
    assert_eq!(DataFormat::from_path(&csv), DataFormat::Csv);
    let a = load_dataset(&json, DataFormat::from_path(&json)).unwrap();
    let b = load_dataset(&csv, DataFormat::from_path(&csv)).unwrap();
    assert_eq!(a.data, data);
    assert_eq!(b.data, data);
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_dataset(
        std::path::Path::new("/nonexistent/forms.json"),
        DataFormat::Json,
    )
    .unwrap_err();
    assert!(matches!(err, DataError::Io(_)), "{err:?}");
}

#[test]
fn parse_errors_carry_position() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "{{\"level\": 1,\n \"forms\": [}}").unwrap();
    let err = load_dataset(f.path(), DataFormat::Json)
        .unwrap_err()
        .to_string();
    assert!(err.contains("line 2"), "{err}");
    let err = parse_json(r#"{"level":1,"provenance":"x","forms":[],"extra":1}"#).unwrap_err();
    assert!(matches!(err, DataError::Parse(_)));
}

#[test]
fn validation_is_order_independent() {
    let data = synth(&SynthConfig {
        count: 12,
        ..SynthConfig::weyl(25.0, 4)
    })
    .unwrap();
    let mut shuffled = data.clone();
    shuffled.forms.reverse();
    shuffled.forms.swap(0, 5);
    let a = parse_json(&to_json(&data)).unwrap();
    let b = parse_json(&to_json(&shuffled)).unwrap();
    assert_eq!(a.data, b.data);
    assert_eq!(validate_hecke(&a.data), validate_hecke(&b.data));
}

#[test]
fn hecke_and_weyl_reports_on_synthetic_data() {
    let data = synth(&SynthConfig::weyl(30.0, 1)).unwrap();
    let h = validate_hecke(&data);
    assert!(h.passed(), "{h:?}");
    assert!(h.checked_pairs > 0);
    let weyl = weyl_law_check(&data);
    assert!((weyl.ratio.unwrap() - 1.0).abs() < 0.15, "{weyl:?}");
    let few = MaassData {
        forms: data.forms[..3].to_vec(),
        ..data.clone()
    };
    assert!(weyl_law_check(&few).ratio.is_none());
}

#[test]
fn weights_sum_reports_prediction() {
    let data = synth(&SynthConfig::weyl(40.0, 8)).unwrap();
    let w = make_gaussian_weight(10.0).unwrap();
    let r = weights_sum(&data, &w, &QuadOptions::with_tol(1e-10)).unwrap();
    assert!(r.sum > 0.0 && r.prediction > 0.0);
    assert!((r.ratio - r.sum / r.prediction).abs() < 1e-12);
}

#[test]
fn rejects_l2_normalised_coefficients() {
    let text = r#"{"level":1,"provenance":"x","forms":[{"t":9.5,"parity":1,"sign":-1,"norm_sq":1.0,"hecke":{"1":0.72}}]}"#;
    let err = parse_json(text).unwrap_err().to_string();
    assert!(err.contains("lambda(1)"), "{err}");
}
