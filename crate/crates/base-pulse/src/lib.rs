//! Band-selective excitation (BASE) pulse design and exact spin-1/2
//! simulation.
//!
//! The toolkit builds a Fourier-designed shaped pulse that excites a chosen
//! offset band to the Bloch equator, refocuses the resulting linear phase
//! dispersion with a pair of adiabatic frequency sweeps (a "double sweep"),
//! and extends the same construction to band-selective x rotations. A
//! closed-form propagator per piecewise-constant segment makes the offset
//! sweeps exact, and [`verify::run_all`] bundles every structural invariant
//! into one deterministic suite.
//!
//! With the default `parallel` feature, offset sweeps run on a rayon pool;
//! the sequential fallback produces bit-identical results.

pub mod error;
pub mod io;
pub mod sequence;
pub mod simulate;
pub mod su2;
pub mod synthesis;
pub mod verify;

pub use error::{Error, Result};
pub use sequence::{
    assemble_base_excitation, assemble_base_rotation, PhysicalScale, PulseSequence, SequenceElement,
};
pub use simulate::{
    adiabaticity_ratio, excitation_profile, excitation_profile_sequential, fourier_response,
    inversion_report, inversion_report_sequential, sequence_propagator, waveform_propagator,
    ExcitationProfile, InversionReport, OffsetGrid,
};
pub use su2::{BlochVector, EulerZxz, Spinor, Su2Rotation};
pub use synthesis::{
    build_chirp, build_excitation_waveform, fourier_coefficients, ChirpParams, PulseSegment,
    SynthesisParams, Waveform,
};
