//! File round-trip properties over arbitrary waveforms and sequences.

use base_pulse::{io, PhysicalScale, PulseSegment, PulseSequence, SequenceElement, Waveform};
use proptest::prelude::*;

fn arb_segment() -> impl Strategy<Value = PulseSegment> {
    (
        prop_oneof![1e-6f64..1e3, Just(0.1), Just(std::f64::consts::PI / 10.0)],
        prop_oneof![0.0f64..10.0, Just(0.0), 1e-18f64..1e-12],
        -20.0f64..20.0,
    )
        .prop_map(|(duration, amplitude, phase)| {
            PulseSegment::new(duration, amplitude, phase).unwrap()
        })
}

fn arb_waveform() -> impl Strategy<Value = Waveform> {
    (
        proptest::collection::vec(arb_segment(), 1..40),
        "[a-z]{1,12}",
    )
        .prop_map(|(segments, name)| Waveform::new(name, segments).unwrap())
}

fn arb_element() -> impl Strategy<Value = SequenceElement> {
    prop_oneof![
        arb_waveform().prop_map(SequenceElement::Shaped),
        (0.0f64..1e4).prop_map(|duration| SequenceElement::Delay { duration }),
        Just(SequenceElement::IdealInversion),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn waveform_csv_roundtrips_values(w in arb_waveform()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        io::export_waveform_csv(&w, &path).unwrap();
        let back = io::import_waveform_csv(&path).unwrap();
        prop_assert_eq!(back.segments, w.segments);
    }

    #[test]
    fn sequence_json_roundtrips_identically(
        elements in proptest::collection::vec(arb_element(), 1..8),
        name in "[a-z-]{1,16}",
    ) {
        let seq = PulseSequence::new(name, elements).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seq.json");
        io::export_sequence(&seq, &path).unwrap();
        let back = io::import_sequence(&path).unwrap();
        prop_assert_eq!(back, seq);
    }

    #[test]
    fn csv_fields_carry_at_least_twelve_decimals(w in arb_waveform()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        io::export_waveform_csv(&w, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        for line in text.lines().skip(1) {
            for field in line.split(',') {
                let decimals = field.split('.').nth(1).map(str::len).unwrap_or(0);
                prop_assert!(decimals >= 12, "field `{}` too short", field);
            }
        }
    }
}

#[test]
fn spectrometer_export_keeps_percent_and_degrees_in_range() {
    let w = base_pulse::build_chirp(&base_pulse::ChirpParams::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chirp.jdx");
    io::export_shape_spectrometer(&w, &PhysicalScale::default(), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    for line in text.lines().filter(|l| !l.starts_with("##")) {
        let (amp, deg) = line.split_once(", ").unwrap();
        let amp: f64 = amp.parse().unwrap();
        let deg: f64 = deg.parse().unwrap();
        assert!((0.0..=100.0).contains(&amp), "amplitude percent {amp}");
        assert!((0.0..360.0).contains(&deg), "phase degrees {deg}");
    }
}
