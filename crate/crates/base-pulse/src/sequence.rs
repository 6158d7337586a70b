//! Pulse sequences: shaped waveforms, free-evolution delays and idealized
//! inversions composed in time order, plus the double-sweep assemblies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synthesis::{
    build_chirp, build_excitation_waveform, ChirpParams, SynthesisParams, Waveform,
};

/// One step of a pulse sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SequenceElement {
    /// An RF waveform played at the given offset.
    Shaped(Waveform),
    /// Free evolution under the offset alone.
    Delay { duration: f64 },
    /// An instantaneous, perfect `exp(-i*pi*Ix)` inversion.
    IdealInversion,
}

impl SequenceElement {
    pub fn duration(&self) -> f64 {
        match self {
            SequenceElement::Shaped(w) => w.total_duration(),
            SequenceElement::Delay { duration } => *duration,
            SequenceElement::IdealInversion => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SequenceElement::Shaped(w) => w.validate(),
            SequenceElement::Delay { duration } => {
                if *duration >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(format!(
                        "delay duration must be non-negative, got {duration}"
                    )))
                }
            }
            SequenceElement::IdealInversion => Ok(()),
        }
    }
}

/// Ordered elements; earlier entries act first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub name: String,
    pub elements: Vec<SequenceElement>,
}

impl PulseSequence {
    pub fn new(name: impl Into<String>, elements: Vec<SequenceElement>) -> Result<Self> {
        let seq = PulseSequence {
            name: name.into(),
            elements,
        };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        if self.elements.is_empty() {
            return Err(Error::invalid("sequence must have at least one element"));
        }
        for e in &self.elements {
            e.validate()?;
        }
        Ok(())
    }

    /// Total duration in normalized time (ideal inversions take none).
    pub fn total_duration(&self) -> f64 {
        self.elements.iter().map(|e| e.duration()).sum()
    }

    /// Total duration in seconds under the given scale.
    pub fn total_duration_physical(&self, scale: &PhysicalScale) -> f64 {
        scale.normalized_time_to_seconds(self.total_duration())
    }
}

/// Maps normalized units to laboratory units: normalized offset 1 corresponds
/// to `nu_ref` Hz, so one normalized time unit is `1/(2*pi*nu_ref)` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalScale {
    pub nu_ref: f64,
}

impl PhysicalScale {
    pub fn new(nu_ref: f64) -> Result<Self> {
        if !nu_ref.is_finite() || nu_ref <= 0.0 {
            return Err(Error::invalid(format!(
                "reference frequency must be positive, got {nu_ref}"
            )));
        }
        Ok(PhysicalScale { nu_ref })
    }

    pub fn normalized_time_to_seconds(&self, t: f64) -> f64 {
        t / (2.0 * std::f64::consts::PI * self.nu_ref)
    }

    pub fn normalized_offset_to_hz(&self, omega: f64) -> f64 {
        omega * self.nu_ref
    }

    pub fn normalized_amplitude_to_hz(&self, amplitude: f64) -> f64 {
        amplitude * self.nu_ref
    }
}

impl Default for PhysicalScale {
    /// 20 kHz: the scale under which the normalized offset range `[-1, 1]`
    /// spans +-20 kHz.
    fn default() -> Self {
        PhysicalScale { nu_ref: 20_000.0 }
    }
}

fn inversion_element(chirp: &ChirpParams, ideal: bool) -> Result<SequenceElement> {
    if ideal {
        Ok(SequenceElement::IdealInversion)
    } else {
        Ok(SequenceElement::Shaped(build_chirp(chirp)?))
    }
}

/// Band-selective excitation: the shaped pulse followed by a double sweep
/// that refocuses the linear phase dispersion accumulated over the pulse.
///
/// Elements, in time order: `[excitation, inversion, delay(T/2), inversion]`
/// where `T` is the excitation waveform duration.
pub fn assemble_base_excitation(
    params: &SynthesisParams,
    chirp: &ChirpParams,
    ideal: bool,
) -> Result<PulseSequence> {
    let excitation = build_excitation_waveform(params)?;
    let half_t = excitation.total_duration() / 2.0;
    PulseSequence::new(
        format!(
            "base-excitation(band={},n={},m={},ideal={})",
            params.band, params.n, params.m, ideal
        ),
        vec![
            SequenceElement::Shaped(excitation),
            inversion_element(chirp, ideal)?,
            SequenceElement::Delay { duration: half_t },
            inversion_element(chirp, ideal)?,
        ],
    )
}

/// Band-selective x rotation: double sweep, shaped pulse, double sweep.
///
/// Elements, in time order:
/// `[inversion, delay(T/2), inversion, excitation, inversion, delay(T/2), inversion]`.
pub fn assemble_base_rotation(
    params: &SynthesisParams,
    chirp: &ChirpParams,
    ideal: bool,
) -> Result<PulseSequence> {
    let excitation = build_excitation_waveform(params)?;
    let half_t = excitation.total_duration() / 2.0;
    PulseSequence::new(
        format!(
            "base-rotation(band={},n={},m={},ideal={})",
            params.band, params.n, params.m, ideal
        ),
        vec![
            inversion_element(chirp, ideal)?,
            SequenceElement::Delay { duration: half_t },
            inversion_element(chirp, ideal)?,
            SequenceElement::Shaped(excitation),
            inversion_element(chirp, ideal)?,
            SequenceElement::Delay { duration: half_t },
            inversion_element(chirp, ideal)?,
        ],
    )
}
