use std::f64::consts::PI;

use stretch_ranger::formats::*;
use stretch_ranger::AppError;
use stretch_ranger_core::calib::{self, CalibrationCurve, CalibrationPoint};
use stretch_ranger_core::mwphotonics::{design_symmetric_ramp, FilterProfile};
use stretch_ranger_core::stretch::Waveform;
use stretch_ranger_core::sysmodel::SystemConfig;

fn tone() -> Waveform {
    let s = (0..257).map(|i| (2.0 * PI * 0.013 * i as f64).sin()).collect();
    Waveform::new(s, 80e9, -1.6e-9).unwrap()
}

#[test]
fn binary_container_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.bin");
    let w = tone();
    write_waveform_bin(&path, &w).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(bytes.len(), WAVEFORM_HEADER_LEN + 8 * w.len());
    assert_eq!(&bytes[..8], WAVEFORM_MAGIC);
    assert_eq!(read_waveform_bin(&path).unwrap(), w);
}

#[test]
fn binary_container_rejects_truncation() {
    let mut bytes = encode_waveform(&tone());
    bytes.pop();
    assert!(matches!(decode_waveform(&bytes), Err(AppError::Input(_))));
    assert!(decode_waveform(b"NOTAWAVE").is_err());
}

#[test]
fn waveform_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    let w = tone();
    write_waveform_csv(&path, &w).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("time_s,value\n"));
    let back = read_waveform_csv(&path).unwrap();
    assert_eq!(back.samples(), w.samples());
    assert!((back.sample_rate() / w.sample_rate() - 1.0).abs() < 1e-9);
    assert_eq!(back.t0(), w.t0());
}

#[test]
fn designed_filter_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    let profile = design_symmetric_ramp(15e-3, &SystemConfig::reference(), 0.05).unwrap();
    write_filter_csv(&path, &profile).unwrap();
    let back = read_filter_csv(&path).unwrap();
    assert!(back.is_symmetric());
    for f in [-9e9, -3e9, 0.0, 2.5e9, 5e9, 7.7e9, 12e9] {
        assert!((back.evaluate(f) - profile.evaluate(f)).abs() < 1e-12, "{f}");
    }
}

#[test]
fn attenuation_column_is_converted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("att.csv");
    std::fs::write(&path, "offset_ghz,attenuation_db\n-5,0\n0,13.0103\n5,3.0103\n").unwrap();
    let p = read_filter_csv(&path).unwrap();
    assert!(!p.is_symmetric());
    assert!((p.evaluate(0.0) - 0.05).abs() < 1e-5);
    assert!((p.evaluate(5e9) - 0.5).abs() < 1e-5);
    assert!((p.evaluate(-5e9) - 1.0).abs() < 1e-12);
}

#[test]
fn filter_row_without_value_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    std::fs::write(&path, "offset_ghz,transmission\n0,0.1\n1,\n").unwrap();
    let err = read_filter_csv(&path).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("row 3"), "{err}");
}

#[test]
fn points_and_curve_files() {
    let dir = tempfile::tempdir().unwrap();
    let curve = CalibrationCurve::new(0.05291, 0.00690, -2.3166e-4, 0.70997, (0.0, 15.0)).unwrap();
    let points: Vec<CalibrationPoint> = (0..16)
        .map(|i| CalibrationPoint::new(i as f64, curve.polynomial(i as f64) + 1e-4 * (i % 3) as f64))
        .collect();
    let pts = dir.path().join("p.csv");
    write_points_csv(&pts, &points, Some(&curve)).unwrap();
    let header = std::fs::read_to_string(&pts).unwrap();
    assert!(header.starts_with("displacement_mm,transmission,fitted,residual\n"));
    let back = read_points_csv(&pts).unwrap();
    assert_eq!(back, points);

    let file = CurveFile::from_curve(&curve, &calib::residuals(&curve, &points));
    let text = serde_json::to_string(&file).unwrap();
    for key in ["\"a\"", "\"b\"", "\"c\"", "\"d\"", "\"units\"", "\"valid_range_mm\"", "\"residuals\"", "\"certificate\""] {
        assert!(text.contains(key), "{key}");
    }
    let again: CurveFile = serde_json::from_str(&text).unwrap();
    assert_eq!(again.to_curve().unwrap(), curve);
}

#[test]
fn tampered_certificate_is_recomputed() {
    let curve = CalibrationCurve::new(1.0, -3.0, 1.0, 0.0, (0.0, 3.0)).unwrap();
    assert!(!curve.certificate.is_monotone());
    let mut file = CurveFile::from_curve(&curve, &[]);
    file.certificate = Some(CalibrationCurve::new(1.0, 0.0, 0.0, 0.0, (0.0, 3.0)).unwrap().certificate);
    assert!(!file.to_curve().unwrap().certificate.is_monotone());
}

#[test]
fn profile_requires_sorted_offsets() {
    assert!(FilterProfile::new(vec![(1e9, 0.1), (0.5e9, 0.2)], true).is_err());
}
