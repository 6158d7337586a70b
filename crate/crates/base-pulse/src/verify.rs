//! Built-in verification suite: every structural invariant of the library,
//! runnable from the CLI (`verify` subcommand) as the single CI entry point.
//!
//! Each check reports its worst observed figure against the tolerance it is
//! held to, so a failure message carries the actual margin.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::io;
use crate::sequence::{
    assemble_base_excitation, assemble_base_rotation, PulseSequence, SequenceElement,
};
use crate::simulate::{
    adiabaticity_ratio, excitation_profile, excitation_profile_sequential, fourier_response,
    waveform_propagator, OffsetGrid,
};
use crate::su2::{BlochVector, Spinor, Su2Rotation};
use crate::synthesis::{
    build_chirp, build_excitation_waveform, excitation_amplitudes, fourier_coefficients,
    ChirpParams, SynthesisParams,
};

/// Outcome of a single invariant check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn metric(name: &'static str, worst: f64, tol: f64) -> Self {
        Check {
            name,
            passed: worst <= tol,
            detail: format!("worst {worst:.3e} (tol {tol:.1e})"),
        }
    }

    fn boolean(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name,
            passed,
            detail: detail.into(),
        }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

/// Runs the whole suite. Deterministic: all randomness is seeded.
pub fn run_all() -> Vec<Check> {
    vec![
        unitarity(),
        refinement_convergence(),
        euler_roundtrip(),
        bloch_consistency(),
        sign_convention(),
        coefficient_lock(),
        small_k_limit(),
        waveform_symmetry(),
        partial_sum_equivalence(),
        chirp_phase_continuity(),
        adiabaticity_ordering(),
        refocusing_identity(),
        first_order_validity(),
        excitation_rotation_consistency(),
        profile_norms_and_evenness(),
        sweep_determinism(),
        file_roundtrips(),
        locale_independence(),
    ]
}

fn seeded_rotations(rng: &mut ChaCha8Rng, count: usize) -> Vec<Su2Rotation> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        if q.iter().map(|v| v * v).sum::<f64>().sqrt() < 0.1 {
            continue;
        }
        out.push(Su2Rotation::from_quaternion(q[0], q[1], q[2], q[3]).unwrap());
    }
    out
}

fn seeded_unit_vectors(rng: &mut ChaCha8Rng, count: usize) -> Vec<BlochVector> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v = BlochVector::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n < 0.1 {
            continue;
        }
        out.push(BlochVector::new(v.mx / n, v.my / n, v.mz / n));
    }
    out
}

fn unitarity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0_f64;
    let mut acc = Su2Rotation::identity();
    for _ in 0..2000 {
        let u = Su2Rotation::propagator_const(
            rng.gen_range(-1.5..1.5),
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..2.0 * PI),
            rng.gen_range(0.0..5.0),
        )
        .unwrap();
        worst = worst.max((u.norm() - 1.0).abs());
        acc = u.compose(&acc);
        worst = worst.max((acc.norm() - 1.0).abs());
    }
    Check::metric("su2 unitarity", worst, 1e-12)
}

fn refinement_convergence() -> Check {
    let cases = [
        (0.3, 0.4, 1.1, 2.7),
        (-0.9, 0.5, 4.0, 10.0),
        (0.0, 0.1, 0.0, 40.0),
    ];
    let mut worst = 0.0_f64;
    for (omega, amp, phase, dt) in cases {
        let whole = Su2Rotation::propagator_const(omega, amp, phase, dt).unwrap();
        for n in [2_u32, 17, 1000] {
            let step = Su2Rotation::propagator_const(omega, amp, phase, dt / f64::from(n)).unwrap();
            let mut refined = Su2Rotation::identity();
            for _ in 0..n {
                refined = step.compose(&refined);
            }
            worst = worst.max(whole.distance(&refined));
        }
    }
    Check::metric("su2 refinement convergence", worst, 1e-9)
}

fn euler_roundtrip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let worst = seeded_rotations(&mut rng, 1000)
        .iter()
        .map(|r| r.euler_zxz().recompose().distance(r))
        .fold(0.0_f64, f64::max);
    Check::metric("su2 euler roundtrip", worst, 1e-10)
}

fn bloch_consistency() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let rotations = seeded_rotations(&mut rng, 200);
    let vectors = seeded_unit_vectors(&mut rng, 200);
    let mut worst = 0.0_f64;
    for (r, v) in rotations.iter().zip(&vectors) {
        let direct = r.apply_to_bloch(*v);
        let via_spinor = Spinor::from_bloch(*v).unwrap().rotated(r).to_bloch();
        worst = worst
            .max((direct.mx - via_spinor.mx).abs())
            .max((direct.my - via_spinor.my).abs())
            .max((direct.mz - via_spinor.mz).abs());
    }
    Check::metric("su2 bloch consistency", worst, 1e-10)
}

fn sign_convention() -> Check {
    // On-resonance x-phase pulse of flip angle pi/2 carries +z to -y.
    let u = Su2Rotation::propagator_const(0.0, FRAC_PI_2, 0.0, 1.0).unwrap();
    let v = u.apply_to_bloch(BlochVector::PLUS_Z);
    let worst = (v.my + 1.0).abs().max(v.mx.abs()).max(v.mz.abs());
    Check::metric("su2 sign convention (z -> -y)", worst, 1e-12)
}

fn coefficient_lock() -> Check {
    let mut worst = 0.0_f64;
    for (band, n, m) in [(0.2, 10_u32, 20_u32), (0.1, 10, 20), (0.37, 7, 13)] {
        let p = SynthesisParams::new(band, n, m).unwrap();
        let u = fourier_coefficients(&p).unwrap();
        worst = worst.max((4.0 * u[0] - band).abs());
        for (k, &uk) in u.iter().enumerate().skip(1) {
            let kf = k as f64;
            let nf = f64::from(n);
            worst = worst.max((uk * (2.0 * kf * PI / nf) - (kf * band * PI / nf).sin()).abs());
        }
    }
    // 2-ulp slack: (s/d)*d need not round-trip exactly in IEEE arithmetic.
    Check::metric("synthesis coefficient lock", worst, 5e-16)
}

fn small_k_limit() -> Check {
    let mut ok = true;
    let mut detail = String::new();
    for (band, n) in [(0.2, 10_u32), (0.1, 10), (0.4, 10), (0.3, 25)] {
        let p = SynthesisParams::new(band, n, 5).unwrap();
        let u = fourier_coefficients(&p).unwrap();
        let x = band * PI / f64::from(n);
        let bound = x * x * band / 12.0;
        let dev = (u[1] - band / 2.0).abs();
        if dev > bound {
            ok = false;
            detail = format!("band {band}, n {n}: |u1 - band/2| = {dev:.3e} > {bound:.3e}");
        }
    }
    if ok {
        detail = "within first-order taylor bound for all cases".into();
    }
    Check::boolean("synthesis small-k limit", ok, detail)
}

fn waveform_symmetry() -> Check {
    let p = SynthesisParams::default();
    let w = build_excitation_waveform(&p).unwrap();
    let n = w.segments.len();
    let mirrored = (0..n / 2).all(|k| {
        w.segments[k].amplitude == w.segments[n - 1 - k].amplitude
            && w.segments[k].phase == w.segments[n - 1 - k].phase
    });
    Check::boolean(
        "synthesis waveform symmetry",
        mirrored,
        if mirrored {
            "exact mirror"
        } else {
            "asymmetric"
        },
    )
}

/// The cosine partial sum and a direct Riemann evaluation over the built
/// segments are the same quantity computed two ways; they must agree to
/// rounding.
fn partial_sum_equivalence() -> Check {
    let p = SynthesisParams::default();
    let amps = excitation_amplitudes(&p).unwrap();
    let dt = p.sample_step();
    let k_max = p.harmonic_count() as isize;
    let half_t = (amps.len() as f64) * dt / 2.0;
    let grid = OffsetGrid::new(-1.0, 1.0, 1001).unwrap();
    let series = fourier_response(&p, &grid).unwrap();
    let mut worst = 0.0_f64;
    for (omega, series_value) in grid.points().iter().zip(&series) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (idx, &w) in amps.iter().enumerate() {
            let k = idx as isize - k_max;
            let t_center = (idx as f64 + 0.5) * dt;
            let arg = omega * (t_center - half_t);
            debug_assert!((t_center - half_t - (k as f64) * dt).abs() < 1e-9);
            re += w * arg.cos() * dt;
            im += w * arg.sin() * dt;
        }
        worst = worst.max((re - series_value).abs()).max(im.abs());
    }
    Check::metric("synthesis partial-sum equivalence", worst, 1e-10)
}

fn chirp_phase_continuity() -> Check {
    let p = ChirpParams::default();
    let w = build_chirp(&p).unwrap();
    let rate = (p.freq_end - p.freq_start) / p.duration;
    let dt = p.duration / f64::from(p.n_segments);
    let mut worst = 0.0_f64;
    for j in 0..w.segments.len() - 1 {
        let t_between = (j as f64 + 1.0) * dt;
        let expected = (p.freq_start + rate * t_between) * dt;
        let got = w.segments[j + 1].phase - w.segments[j].phase;
        let wrapped = (got - expected + PI).rem_euclid(2.0 * PI) - PI;
        worst = worst.max(wrapped.abs());
    }
    Check::metric("synthesis chirp phase continuity", worst, 1e-9)
}

fn adiabaticity_ordering() -> Check {
    let ratio = adiabaticity_ratio(&ChirpParams::default());
    Check::boolean(
        "synthesis adiabaticity ordering",
        (ratio - 0.08).abs() < 1e-15 && ratio < 1.0,
        format!("sweep rate / peak^2 = {ratio}"),
    )
}

/// A delay bracketed by two identical z-x(pi)-z rotations runs free evolution
/// backwards, for any outer z-angles.
fn refocusing_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let half_t = build_excitation_waveform(&SynthesisParams::default())
        .unwrap()
        .total_duration()
        / 2.0;
    let offsets = OffsetGrid::new(-1.0, 1.0, 11).unwrap().points();
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let alpha = rng.gen_range(-PI..PI);
        let beta = rng.gen_range(-PI..PI);
        let theta = Su2Rotation::about_z(alpha)
            .compose(&Su2Rotation::about_x(PI).compose(&Su2Rotation::about_z(beta)));
        for &omega in &offsets {
            let forward = Su2Rotation::propagator_const(omega, 0.0, 0.0, half_t).unwrap();
            let reversed = Su2Rotation::propagator_const(-omega, 0.0, 0.0, half_t).unwrap();
            let double_sweep = theta.compose(&forward.compose(&theta));
            worst = worst.max(double_sweep.distance(&reversed));
        }
    }
    Check::metric("simulator refocusing identity", worst, 1e-10)
}

/// At a small target angle (pi/20) the exact propagator's off-diagonal must
/// track the first-order prediction |F(omega)|/2 across the band, where F is
/// the designed flip-angle response. Tolerance: 1% of angle/2.
fn first_order_validity() -> Check {
    let angle = PI / 20.0;
    let p = SynthesisParams::with_target_angle(0.2, 10, 20, angle).unwrap();
    let w = build_excitation_waveform(&p).unwrap();
    let grid = OffsetGrid::new(-p.band, p.band, 81).unwrap();
    let response = fourier_response(&p, &grid).unwrap();
    let mut worst = 0.0_f64;
    for (&omega, &f) in grid.points().iter().zip(&response) {
        let u = waveform_propagator(&w, omega);
        let off_diag = u.inversion_probability().sqrt();
        worst = worst.max((off_diag - (f / 2.0).abs()).abs());
    }
    Check::metric(
        "simulator first-order validity",
        worst / (angle / 2.0),
        0.01,
    )
}

/// With ideal inversions, the rotation sequence applied to +z must reproduce
/// the excitation sequence's in-band -y profile: both are the same in-band
/// pi/2 x-rotation.
fn excitation_rotation_consistency() -> Check {
    let p = SynthesisParams::default();
    let c = ChirpParams::default();
    let grid = OffsetGrid::new(-0.16, 0.16, 65).unwrap();
    let exc = excitation_profile(
        &assemble_base_excitation(&p, &c, true).unwrap(),
        &grid,
        BlochVector::PLUS_Z,
    );
    let rot = excitation_profile(
        &assemble_base_rotation(&p, &c, true).unwrap(),
        &grid,
        BlochVector::PLUS_Z,
    );
    let worst = exc
        .bloch
        .iter()
        .zip(&rot.bloch)
        .map(|(a, b)| (a.my - b.my).abs())
        .fold(0.0_f64, f64::max);
    Check::metric("simulator excitation/rotation consistency", worst, 0.02)
}

fn profile_norms_and_evenness() -> Check {
    let seq = assemble_base_excitation(&SynthesisParams::default(), &ChirpParams::default(), true)
        .unwrap();
    let grid = OffsetGrid::default_profile();
    let profile = excitation_profile(&seq, &grid, BlochVector::PLUS_Z);
    let n = profile.bloch.len();
    let norm_worst = profile
        .bloch
        .iter()
        .map(|v| (v.norm() - 1.0).abs())
        .fold(0.0_f64, f64::max);
    let even_worst = (0..n)
        .map(|i| (profile.bloch[i].mz - profile.bloch[n - 1 - i].mz).abs())
        .fold(0.0_f64, f64::max);
    Check::metric(
        "simulator profile norms and evenness",
        norm_worst.max(even_worst),
        1e-9,
    )
}

fn sweep_determinism() -> Check {
    let seq = assemble_base_excitation(&SynthesisParams::default(), &ChirpParams::default(), true)
        .unwrap();
    let grid = OffsetGrid::new(-1.0, 1.0, 801).unwrap();
    let a = excitation_profile(&seq, &grid, BlochVector::PLUS_Z);
    let b = excitation_profile(&seq, &grid, BlochVector::PLUS_Z);
    let reference = excitation_profile_sequential(&seq, &grid, BlochVector::PLUS_Z);
    let identical = a == b && a == reference;
    Check::boolean(
        "simulator sweep determinism",
        identical,
        if identical {
            "repeated and sequential sweeps bit-identical"
        } else {
            "sweeps differ between runs or execution modes"
        },
    )
}

fn file_roundtrips() -> Check {
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return Check::boolean("io file roundtrips", false, format!("no temp dir: {e}")),
    };
    let wave = build_excitation_waveform(&SynthesisParams::default()).unwrap();
    let wave_path = dir.path().join("wave.csv");
    let wave_ok = io::export_waveform_csv(&wave, &wave_path)
        .and_then(|_| io::import_waveform_csv(&wave_path))
        .map(|back| back.segments == wave.segments)
        .unwrap_or(false);

    let seq = assemble_base_excitation(&SynthesisParams::default(), &ChirpParams::default(), false)
        .unwrap();
    let seq_path = dir.path().join("seq.json");
    let seq_ok = io::export_sequence(&seq, &seq_path)
        .and_then(|_| io::import_sequence(&seq_path))
        .map(|back| back == seq)
        .unwrap_or(false);

    Check::boolean(
        "io file roundtrips",
        wave_ok && seq_ok,
        format!("waveform csv exact: {wave_ok}; sequence json exact: {seq_ok}"),
    )
}

fn locale_independence() -> Check {
    // Formatting goes through Rust's locale-independent float formatter; the
    // check pins the separator and the reparse.
    let seq = PulseSequence::new("sep", vec![SequenceElement::Delay { duration: 0.5 }]).unwrap();
    let json = serde_json::to_string(&seq).unwrap();
    let ok = json.contains("0.5") && !json.contains("0,5");
    Check::boolean(
        "io locale independence",
        ok,
        "decimal separator is `.` in serialized output",
    )
}
