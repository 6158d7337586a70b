//! `base-pulse`: build band-selective excitation waveforms, chirps and
//! double-sweep sequences, sweep them over offset grids, and verify the
//! library's invariants.
//!
//! Exit codes: 0 success, 2 invalid arguments, 3 i/o or file-format error,
//! 4 verification failure.

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use base_pulse::{
    assemble_base_excitation, assemble_base_rotation, build_chirp, build_excitation_waveform,
    excitation_profile, io, verify, BlochVector, ChirpParams, Error, OffsetGrid, PhysicalScale,
    PulseSequence, SequenceElement, SynthesisParams,
};

#[derive(Parser)]
#[command(
    name = "base-pulse",
    version,
    about = "Band-selective excitation pulse design and spin-1/2 offset sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Shaped-pulse design flags. Defaults are the reference design: a +-0.2
/// band, pi/10 sample step, 40.1*pi total length, pi/2 in-band flip.
#[derive(Args)]
struct SynthFlags {
    /// Excitation half-bandwidth, normalized, in (0, 1)
    #[arg(long, default_value_t = 0.2)]
    band: f64,
    /// Sample step is pi/n
    #[arg(long, default_value_t = 10)]
    n: u32,
    /// Waveform half-duration is m*pi
    #[arg(long, default_value_t = 20)]
    m: u32,
    /// In-band flip angle in radians, in (0, pi]
    #[arg(long, default_value_t = FRAC_PI_2)]
    angle: f64,
}

impl SynthFlags {
    fn params(&self) -> Result<SynthesisParams, Error> {
        SynthesisParams::with_target_angle(self.band, self.n, self.m, self.angle)
    }
}

/// Frequency-sweep flags. Defaults are the reference sweep: [-1.5, 1.5] over
/// 150 time units at peak amplitude 0.5, flat-topped across [-1, 1].
#[derive(Args)]
struct ChirpFlags {
    /// Sweep start frequency, normalized
    #[arg(long, default_value_t = -1.5, allow_negative_numbers = true)]
    start: f64,
    /// Sweep end frequency, normalized
    #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
    end: f64,
    /// Sweep duration in normalized time
    #[arg(long, default_value_t = 150.0)]
    duration: f64,
    /// Peak amplitude, normalized angular frequency
    #[arg(long, default_value_t = 0.5)]
    amp: f64,
    /// Fraction of the duration spent ramping the envelope up (and down)
    #[arg(long, default_value_t = 1.0 / 6.0)]
    ramp_fraction: f64,
    /// Number of equal-width segments
    #[arg(long, default_value_t = 1500)]
    segments: u32,
}

impl ChirpFlags {
    fn params(&self) -> Result<ChirpParams, Error> {
        ChirpParams::new(
            self.start,
            self.end,
            self.duration,
            self.amp,
            self.ramp_fraction,
            self.segments,
        )
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum SequenceKind {
    Excitation,
    Rotation,
}

#[derive(Subcommand)]
enum Command {
    /// Write the band-selective excitation waveform as base-shape CSV
    Synth {
        #[command(flatten)]
        synth: SynthFlags,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a chirp waveform as base-shape CSV
    Chirp {
        #[command(flatten)]
        chirp: ChirpFlags,
        #[arg(long)]
        out: PathBuf,
    },
    /// Assemble a double-sweep sequence and write it as a sequence file
    Sequence {
        /// excitation: [pulse, sweep, delay, sweep]; rotation adds a leading double sweep
        #[arg(long, value_enum)]
        kind: SequenceKind,
        /// Use instantaneous ideal inversions instead of chirp sweeps
        #[arg(long)]
        ideal: bool,
        #[command(flatten)]
        synth: SynthFlags,
        #[command(flatten)]
        chirp: ChirpFlags,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep a sequence file over an offset grid and write a profile CSV
    Profile {
        /// Sequence file written by `sequence`
        #[arg(long)]
        seq: PathBuf,
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        omega_min: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        omega_max: f64,
        #[arg(long, default_value_t = 801)]
        points: u32,
        /// Initial Bloch vector: x|y|z|-x|-y|-z
        #[arg(long, default_value = "z", value_parser = parse_initial, allow_hyphen_values = true)]
        initial: BlochVector,
        /// Offset frequency in Hz mapped to normalized omega = 1
        #[arg(long, default_value_t = 20_000.0)]
        nu_ref: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the element table and total physical duration of a sequence file
    Info {
        #[arg(long)]
        seq: PathBuf,
        /// Offset frequency in Hz mapped to normalized omega = 1
        #[arg(long, default_value_t = 20_000.0)]
        nu_ref: f64,
    },
    /// Run the full invariant suite; exits nonzero on any failure
    Verify,
}

fn parse_initial(s: &str) -> Result<BlochVector, String> {
    match s {
        "x" => Ok(BlochVector::PLUS_X),
        "y" => Ok(BlochVector::PLUS_Y),
        "z" => Ok(BlochVector::PLUS_Z),
        "-x" => Ok(BlochVector::MINUS_X),
        "-y" => Ok(BlochVector::MINUS_Y),
        "-z" => Ok(BlochVector::MINUS_Z),
        other => Err(format!(
            "initial state must be one of x|y|z|-x|-y|-z, got `{other}`"
        )),
    }
}

/// Optional `BASE_PULSE_THREADS` cap on sweep parallelism. Sweeps are
/// bit-deterministic regardless, so the cap never changes results.
fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var("BASE_PULSE_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1);
    match cap {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

fn element_label(e: &SequenceElement) -> String {
    match e {
        SequenceElement::Shaped(w) => {
            format!(
                "shaped           {} [{} segments]",
                w.name,
                w.segments.len()
            )
        }
        SequenceElement::Delay { .. } => "delay".to_string(),
        SequenceElement::IdealInversion => "ideal_inversion".to_string(),
    }
}

fn cmd_info(seq: &PulseSequence, scale: &PhysicalScale) {
    println!("sequence: {}", seq.name);
    println!("  #  duration        duration_ms  element");
    for (i, e) in seq.elements.iter().enumerate() {
        let d = e.duration();
        println!(
            "  {:<2} {:<15.6} {:<12.3} {}",
            i + 1,
            d,
            scale.normalized_time_to_seconds(d) * 1e3,
            element_label(e)
        );
    }
    println!(
        "total duration: {:.3} ms",
        seq.total_duration_physical(scale) * 1e3
    );
}

fn cmd_verify() -> i32 {
    let checks = verify::run_all();
    for c in &checks {
        println!(
            "{} {:<42} {}",
            if c.passed { "ok  " } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed == 0 {
        println!("verify: all {} checks passed", checks.len());
        0
    } else {
        eprintln!("verify: {failed} of {} checks failed", checks.len());
        4
    }
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Synth { synth, out } => {
            let waveform = build_excitation_waveform(&synth.params()?)?;
            io::export_waveform_csv(&waveform, &out)?;
        }
        Command::Chirp { chirp, out } => {
            let waveform = build_chirp(&chirp.params()?)?;
            io::export_waveform_csv(&waveform, &out)?;
        }
        Command::Sequence {
            kind,
            ideal,
            synth,
            chirp,
            out,
        } => {
            let params = synth.params()?;
            let chirp = chirp.params()?;
            let seq = match kind {
                SequenceKind::Excitation => assemble_base_excitation(&params, &chirp, ideal)?,
                SequenceKind::Rotation => assemble_base_rotation(&params, &chirp, ideal)?,
            };
            io::export_sequence(&seq, &out)?;
        }
        Command::Profile {
            seq,
            omega_min,
            omega_max,
            points,
            initial,
            nu_ref,
            out,
        } => {
            let sequence = io::import_sequence(&seq)?;
            let grid = OffsetGrid::new(omega_min, omega_max, points)?;
            let scale = PhysicalScale::new(nu_ref)?;
            let profile = with_thread_cap(|| excitation_profile(&sequence, &grid, initial));
            io::export_profile_csv(&profile, &scale, &out)?;
        }
        Command::Info { seq, nu_ref } => {
            let sequence = io::import_sequence(&seq)?;
            let scale = PhysicalScale::new(nu_ref)?;
            cmd_info(&sequence, &scale);
        }
        Command::Verify => return Ok(with_thread_cap(cmd_verify)),
    }
    Ok(0)
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidArgument(_) | Error::UnsupportedShape(_) => 2,
                Error::Io { .. } | Error::Parse { .. } => 3,
            }
        }
    };
    std::process::exit(code);
}
