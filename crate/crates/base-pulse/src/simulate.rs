//! Exact spin-1/2 evolution through pulse sequences and offset-sweep profile
//! generation.
//!
//! Every waveform is piecewise constant, so each segment propagator is a
//! closed-form axis-angle rotation and the sweep is exact: no integrator, no
//! step-size tolerance. Offset points are independent; with the `parallel`
//! feature the sweep fans out over a rayon pool. Results are bit-identical to
//! the sequential path regardless of thread count, because each grid point is
//! an isolated pure-f64 computation and output order follows grid order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::{PulseSequence, SequenceElement};
use crate::su2::{BlochVector, Su2Rotation};
use crate::synthesis::{fourier_coefficients, ChirpParams, SynthesisParams, Waveform};

/// Uniform offset grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_points: u32,
}

impl OffsetGrid {
    pub fn new(omega_min: f64, omega_max: f64, n_points: u32) -> Result<Self> {
        if !omega_min.is_finite() || !omega_max.is_finite() || omega_min >= omega_max {
            return Err(Error::invalid(format!(
                "offset grid needs omega_min < omega_max, got [{omega_min}, {omega_max}]"
            )));
        }
        if n_points < 2 {
            return Err(Error::invalid("offset grid needs at least 2 points"));
        }
        Ok(OffsetGrid {
            omega_min,
            omega_max,
            n_points,
        })
    }

    /// The full normalized range at the default 801-point resolution.
    pub fn default_profile() -> Self {
        OffsetGrid {
            omega_min: -1.0,
            omega_max: 1.0,
            n_points: 801,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.n_points as usize;
        let span = self.omega_max - self.omega_min;
        (0..n)
            .map(|i| self.omega_min + span * (i as f64) / ((n - 1) as f64))
            .collect()
    }
}

/// Final Bloch vectors over an offset grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationProfile {
    pub offsets: Vec<f64>,
    pub bloch: Vec<BlochVector>,
    pub initial_state: BlochVector,
    pub sequence_name: String,
}

/// Per-offset inversion diagnostics for a candidate inversion waveform:
/// the probability of carrying +z to -z plus the outer z-angles of the
/// z-x-z factorization of its propagator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionReport {
    pub offsets: Vec<f64>,
    pub efficiency: Vec<f64>,
    pub euler_alpha: Vec<f64>,
    pub euler_beta: Vec<f64>,
}

/// Propagator of a shaped waveform at the given offset: composition of the
/// closed-form segment propagators in time order.
pub fn waveform_propagator(waveform: &Waveform, omega: f64) -> Su2Rotation {
    let mut acc = Su2Rotation::identity();
    for seg in &waveform.segments {
        // Segments are validated on construction, so this cannot fail.
        let u = Su2Rotation::propagator_const(omega, seg.amplitude, seg.phase, seg.duration)
            .expect("validated segment");
        acc = u.compose(&acc);
    }
    acc
}

/// Propagator of a whole sequence at the given offset.
pub fn sequence_propagator(seq: &PulseSequence, omega: f64) -> Su2Rotation {
    let mut acc = Su2Rotation::identity();
    for element in &seq.elements {
        let u = match element {
            SequenceElement::Shaped(w) => waveform_propagator(w, omega),
            SequenceElement::Delay { duration } => {
                Su2Rotation::propagator_const(omega, 0.0, 0.0, *duration).expect("validated delay")
            }
            SequenceElement::IdealInversion => Su2Rotation::inversion_x(),
        };
        acc = u.compose(&acc);
    }
    acc
}

/// Order-preserving map over offsets; parallel when the feature is enabled.
fn map_offsets<T, F>(offsets: &[f64], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(f64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        offsets.par_iter().map(|&w| f(w)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        offsets.iter().map(|&w| f(w)).collect()
    }
}

fn profile_with<F>(
    seq: &PulseSequence,
    grid: &OffsetGrid,
    initial: BlochVector,
    map: F,
) -> ExcitationProfile
where
    F: FnOnce(&[f64]) -> Vec<BlochVector>,
{
    let offsets = grid.points();
    let bloch = map(&offsets);
    ExcitationProfile {
        offsets,
        bloch,
        initial_state: initial,
        sequence_name: seq.name.clone(),
    }
}

/// Evolves `initial` through `seq` at every grid offset.
pub fn excitation_profile(
    seq: &PulseSequence,
    grid: &OffsetGrid,
    initial: BlochVector,
) -> ExcitationProfile {
    profile_with(seq, grid, initial, |offsets| {
        map_offsets(offsets, |w| {
            sequence_propagator(seq, w).apply_to_bloch(initial)
        })
    })
}

/// Sequential reference path for [`excitation_profile`]. Used by the
/// determinism checks and the benchmark suite; always available.
pub fn excitation_profile_sequential(
    seq: &PulseSequence,
    grid: &OffsetGrid,
    initial: BlochVector,
) -> ExcitationProfile {
    profile_with(seq, grid, initial, |offsets| {
        offsets
            .iter()
            .map(|&w| sequence_propagator(seq, w).apply_to_bloch(initial))
            .collect()
    })
}

/// The designed flip-angle response `2 * sum_k u_k cos(k*omega*pi/n) * dt`
/// (the k = 0 term carries the doubled center sample).
pub fn fourier_response(params: &SynthesisParams, grid: &OffsetGrid) -> Result<Vec<f64>> {
    let u = fourier_coefficients(params)?;
    let dt = params.sample_step();
    Ok(grid
        .points()
        .iter()
        .map(|&omega| {
            let sum: f64 = u
                .iter()
                .enumerate()
                .map(|(k, &uk)| uk * (k as f64 * omega * dt).cos())
                .sum();
            2.0 * dt * sum
        })
        .collect())
}

fn inversion_point(waveform: &Waveform, omega: f64) -> (f64, f64, f64) {
    let u = waveform_propagator(waveform, omega);
    let euler = u.euler_zxz();
    (u.inversion_probability(), euler.alpha, euler.beta)
}

fn report_from(offsets: Vec<f64>, rows: Vec<(f64, f64, f64)>) -> InversionReport {
    let mut efficiency = Vec::with_capacity(rows.len());
    let mut euler_alpha = Vec::with_capacity(rows.len());
    let mut euler_beta = Vec::with_capacity(rows.len());
    for (eff, a, b) in rows {
        efficiency.push(eff);
        euler_alpha.push(a);
        euler_beta.push(b);
    }
    InversionReport {
        offsets,
        efficiency,
        euler_alpha,
        euler_beta,
    }
}

/// Sweeps a candidate inversion waveform over the grid.
pub fn inversion_report(waveform: &Waveform, grid: &OffsetGrid) -> InversionReport {
    let offsets = grid.points();
    let rows = map_offsets(&offsets, |w| inversion_point(waveform, w));
    report_from(offsets, rows)
}

/// Sequential reference path for [`inversion_report`].
pub fn inversion_report_sequential(waveform: &Waveform, grid: &OffsetGrid) -> InversionReport {
    let offsets = grid.points();
    let rows = offsets
        .iter()
        .map(|&w| inversion_point(waveform, w))
        .collect();
    report_from(offsets, rows)
}

/// Sweep rate divided by squared peak amplitude; must be well below 1 for
/// reliable adiabatic inversion.
pub fn adiabaticity_ratio(chirp: &ChirpParams) -> f64 {
    chirp.sweep_rate() / (chirp.peak_amplitude * chirp.peak_amplitude)
}
