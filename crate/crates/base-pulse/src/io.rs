//! File formats: waveform CSV, spectrometer-style shape export, profile CSV
//! and the sequence file.
//!
//! Numbers are written with `.` as the decimal separator regardless of
//! locale (Rust float formatting is locale-independent), with enough digits
//! to reparse bit-exactly, padded to at least 12 decimal places. Angles in
//! files are radians, except spectrometer shape phases, which are degrees.
//! All writes go through a temp file and a rename.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sequence::{PhysicalScale, PulseSequence};
use crate::simulate::ExcitationProfile;
use crate::synthesis::{PulseSegment, Waveform};

const WAVEFORM_HEADER: &str = "# base-shape v1";

/// Shortest representation that reparses to the same f64, padded with
/// trailing zeros to at least 12 decimal places.
fn format_f64(v: f64) -> String {
    let s = format!("{v}");
    match s.find('.') {
        Some(dot) => {
            let decimals = s.len() - dot - 1;
            if decimals < 12 {
                format!("{s}{}", "0".repeat(12 - decimals))
            } else {
                s
            }
        }
        None => format!("{s}.{}", "0".repeat(12)),
    }
}

fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    let mut file = fs::File::create(&tmp).map_err(|e| Error::io(path, e))?;
    file.write_all(contents.as_bytes())
        .and_then(|_| file.sync_all())
        .map_err(|e| Error::io(path, e))?;
    drop(file);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Writes the `# base-shape v1` CSV: one `duration,amplitude,phase` line per
/// segment, phases in radians in `[0, 2*pi)`.
pub fn export_waveform_csv(waveform: &Waveform, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(waveform.segments.len() * 48 + 32);
    out.push_str(WAVEFORM_HEADER);
    out.push('\n');
    for seg in &waveform.segments {
        out.push_str(&format_f64(seg.duration));
        out.push(',');
        out.push_str(&format_f64(seg.amplitude));
        out.push(',');
        out.push_str(&format_f64(seg.phase));
        out.push('\n');
    }
    atomic_write(path, &out)
}

/// Reads a `# base-shape v1` CSV back. The waveform name is taken from the
/// file stem (the format itself does not carry one).
pub fn import_waveform_csv(path: &Path) -> Result<Waveform> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(WAVEFORM_HEADER) => {}
        _ => {
            return Err(Error::parse(
                path,
                format!("first line must be exactly `{WAVEFORM_HEADER}`"),
            ))
        }
    }
    let mut segments = Vec::new();
    for (idx, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                format!("line {}: expected 3 comma-separated fields", idx + 2),
            ));
        }
        let mut values = [0.0_f64; 3];
        for (v, f) in values.iter_mut().zip(&fields) {
            *v = f
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, format!("line {}: bad number `{f}`", idx + 2)))?;
        }
        segments.push(
            PulseSegment::new(values[0], values[1], values[2])
                .map_err(|e| Error::parse(path, format!("line {}: {e}", idx + 2)))?,
        );
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Waveform::new(name, segments).map_err(|e| Error::parse(path, e.to_string()))
}

/// JCAMP-style shape export: amplitudes as percent of the maximum, phases in
/// degrees in `[0, 360)`. Requires a uniform raster (equal segment
/// durations); the absolute peak amplitude in Hz is recorded in a
/// `##$SHAPE_AMPLITUDE` header so the percent scaling stays invertible.
pub fn export_shape_spectrometer(
    waveform: &Waveform,
    scale: &PhysicalScale,
    path: &Path,
) -> Result<()> {
    let first = waveform.segments[0].duration;
    if waveform
        .segments
        .iter()
        .any(|s| (s.duration - first).abs() > 1e-12 * first.max(1.0))
    {
        return Err(Error::UnsupportedShape(
            "spectrometer shapes need equal segment durations".into(),
        ));
    }
    let max_amp = waveform.peak_amplitude();
    let mut out = String::with_capacity(waveform.segments.len() * 24 + 128);
    out.push_str(&format!("##TITLE={}\n", waveform.name));
    out.push_str(&format!(
        "##$SHAPE_AMPLITUDE={}\n",
        format_f64(scale.normalized_amplitude_to_hz(max_amp))
    ));
    out.push_str(&format!("##NPOINTS={}\n", waveform.segments.len()));
    out.push_str("##XYPOINTS=(XY..XY)\n");
    for seg in &waveform.segments {
        let percent = if max_amp > 0.0 {
            100.0 * seg.amplitude / max_amp
        } else {
            0.0
        };
        let mut degrees = seg.phase.to_degrees().rem_euclid(360.0);
        // Keep the printed 6-decimal value inside [0, 360).
        if degrees > 360.0 - 5e-7 {
            degrees = 0.0;
        }
        out.push_str(&format!("{percent:.6}, {degrees:.6}\n"));
    }
    out.push_str("##END=\n");
    atomic_write(path, &out)
}

/// Profile CSV: `offset_hz,mx,my,mz`, one row per grid point.
pub fn export_profile_csv(
    profile: &ExcitationProfile,
    scale: &PhysicalScale,
    path: &Path,
) -> Result<()> {
    let mut out = String::with_capacity(profile.offsets.len() * 72 + 24);
    out.push_str("offset_hz,mx,my,mz\n");
    for (offset, v) in profile.offsets.iter().zip(&profile.bloch) {
        out.push_str(&format_f64(scale.normalized_offset_to_hz(*offset)));
        out.push(',');
        out.push_str(&format_f64(v.mx));
        out.push(',');
        out.push_str(&format_f64(v.my));
        out.push(',');
        out.push_str(&format_f64(v.mz));
        out.push('\n');
    }
    atomic_write(path, &out)
}

/// Writes a sequence as a JSON document: `{"name": ..., "elements": [...]}`
/// with element `type` one of `shaped`, `delay`, `ideal_inversion`.
pub fn export_sequence(seq: &PulseSequence, path: &Path) -> Result<()> {
    let mut json = serde_json::to_string_pretty(seq)
        .map_err(|e| Error::parse(path, format!("serialization failed: {e}")))?;
    json.push('\n');
    atomic_write(path, &json)
}

/// Reads a sequence file and re-validates every embedded value.
pub fn import_sequence(path: &Path) -> Result<PulseSequence> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let seq: PulseSequence =
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
    seq.validate()
        .map_err(|e| Error::parse(path, e.to_string()))?;
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn min_twelve_decimal_formatting() {
        assert_eq!(format_f64(1.0), "1.000000000000");
        assert_eq!(format_f64(0.5), "0.500000000000");
        assert_eq!(format_f64(0.0), "0.000000000000");
        assert_eq!(format_f64(2000.0), "2000.000000000000");
        // Shortest round-trip representation kept when longer than 12 digits.
        assert_eq!(format_f64(PI / 10.0), "0.3141592653589793");
        for v in [PI / 10.0, 0.09993421562398414, 1e-17, 123.456] {
            assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn single_segment_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.csv");
        let w = Waveform::new("one", vec![PulseSegment::new(1.0, 0.5, 0.0).unwrap()]).unwrap();
        export_waveform_csv(&w, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "# base-shape v1\n1.000000000000,0.500000000000,0.000000000000\n"
        );
    }

    #[test]
    fn waveform_csv_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("excitation.csv");
        let w = crate::synthesis::build_excitation_waveform(
            &crate::synthesis::SynthesisParams::default(),
        )
        .unwrap();
        export_waveform_csv(&w, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 402); // header + 401 segments
        let back = import_waveform_csv(&path).unwrap();
        assert_eq!(back.segments, w.segments);
    }

    #[test]
    fn csv_import_rejects_bad_header_and_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "# wrong\n1,2,3\n").unwrap();
        assert!(matches!(
            import_waveform_csv(&path),
            Err(Error::Parse { .. })
        ));
        fs::write(&path, "# base-shape v1\n1,2\n").unwrap();
        assert!(import_waveform_csv(&path).is_err());
        fs::write(&path, "# base-shape v1\n1,abc,0\n").unwrap();
        assert!(import_waveform_csv(&path).is_err());
    }

    #[test]
    fn spectrometer_shape_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("shape.jdx");
        let w = Waveform::new(
            "demo",
            vec![
                PulseSegment::new(0.1, 0.5, 0.0).unwrap(),
                PulseSegment::new(0.1, 0.25, PI).unwrap(),
            ],
        )
        .unwrap();
        export_shape_spectrometer(&w, &PhysicalScale::default(), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "##TITLE=demo");
        assert_eq!(lines[1], "##$SHAPE_AMPLITUDE=10000.000000000000");
        assert_eq!(lines[2], "##NPOINTS=2");
        assert_eq!(lines[3], "##XYPOINTS=(XY..XY)");
        assert_eq!(lines[4], "100.000000, 0.000000");
        assert_eq!(lines[5], "50.000000, 180.000000");
        assert_eq!(lines[6], "##END=");
    }

    #[test]
    fn spectrometer_shape_rejects_nonuniform_raster() {
        let dir = tempfile::tempdir().unwrap();
        let w = Waveform::new(
            "ragged",
            vec![
                PulseSegment::new(0.1, 0.5, 0.0).unwrap(),
                PulseSegment::new(0.2, 0.5, 0.0).unwrap(),
            ],
        )
        .unwrap();
        let err =
            export_shape_spectrometer(&w, &PhysicalScale::default(), &dir.path().join("x.jdx"))
                .unwrap_err();
        assert!(matches!(err, Error::UnsupportedShape(_)));
    }

    #[test]
    fn chirp_shape_point_count() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chirp.jdx");
        let w = crate::synthesis::build_chirp(&crate::synthesis::ChirpParams::default()).unwrap();
        export_shape_spectrometer(&w, &PhysicalScale::default(), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("##NPOINTS=1500\n"));
        let data_lines = text.lines().filter(|l| !l.starts_with("##")).count();
        assert_eq!(data_lines, 1500);
    }

    #[test]
    fn profile_csv_scaling_and_shape() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profile.csv");
        let profile = ExcitationProfile {
            offsets: vec![-0.1, 0.0, 0.1],
            bloch: vec![
                crate::su2::BlochVector::PLUS_Z,
                crate::su2::BlochVector::MINUS_Y,
                crate::su2::BlochVector::PLUS_Z,
            ],
            initial_state: crate::su2::BlochVector::PLUS_Z,
            sequence_name: "demo".into(),
        };
        export_profile_csv(&profile, &PhysicalScale::default(), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "offset_hz,mx,my,mz");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("2000.000000000000,"));
    }

    #[test]
    fn sequence_roundtrip_and_schema() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seq.json");
        let seq = crate::sequence::assemble_base_excitation(
            &crate::synthesis::SynthesisParams::default(),
            &crate::synthesis::ChirpParams::default(),
            true,
        )
        .unwrap();
        export_sequence(&seq, &path).unwrap();
        let back = import_sequence(&path).unwrap();
        assert_eq!(back, seq);

        let value: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert!(value.get("name").is_some());
        let elements = value.get("elements").unwrap().as_array().unwrap();
        assert_eq!(elements.len(), 4);
        assert_eq!(elements[0]["type"], "shaped");
        assert!(elements[0]["segments"].is_array());
        assert_eq!(elements[1]["type"], "ideal_inversion");
        assert_eq!(elements[2]["type"], "delay");
        assert!(elements[2]["duration"].is_number());
    }

    #[test]
    fn sequence_import_rejects_invalid_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        fs::write(
            &path,
            r#"{"name":"bad","elements":[{"type":"delay","duration":-3.0}]}"#,
        )
        .unwrap();
        assert!(matches!(import_sequence(&path), Err(Error::Parse { .. })));
        fs::write(&path, "not json").unwrap();
        assert!(matches!(import_sequence(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn io_failure_reports_path() {
        let missing = Path::new("/nonexistent-dir-for-sure/file.csv");
        let w = Waveform::new("w", vec![PulseSegment::new(1.0, 0.0, 0.0).unwrap()]).unwrap();
        match export_waveform_csv(&w, missing) {
            Err(Error::Io { path, .. }) => assert_eq!(path, missing),
            other => panic!("expected io error, got {other:?}"),
        }
    }
}
