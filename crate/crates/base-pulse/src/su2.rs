//! Exact spin-1/2 rotation algebra.
//!
//! Spin operators are one-half the Pauli matrices, `I_a = sigma_a / 2`, so all
//! angles here are physical rotation angles on the Bloch sphere. A rotation is
//! stored as a unit quaternion `(w, x, y, z)` corresponding to the matrix
//!
//! ```text
//!   U = w*1 - i*(x*sx + y*sy + z*sz)
//!     = [[ w - i*z, -y - i*x ],
//!        [ y - i*x,  w + i*z ]]
//! ```
//!
//! which is `exp(-i*theta*(n . I))` for `w = cos(theta/2)`,
//! `(x, y, z) = sin(theta/2) * n`. Global phase is unrepresented: `q` and `-q`
//! are the same physical rotation and every metric here treats them as equal.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit-norm tolerance enforced on construction.
const AXIS_NORM_TOL: f64 = 1e-9;

/// A point on (or inside, for mixed states we never produce) the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
}

impl BlochVector {
    pub const PLUS_X: BlochVector = BlochVector::new(1.0, 0.0, 0.0);
    pub const MINUS_X: BlochVector = BlochVector::new(-1.0, 0.0, 0.0);
    pub const PLUS_Y: BlochVector = BlochVector::new(0.0, 1.0, 0.0);
    pub const MINUS_Y: BlochVector = BlochVector::new(0.0, -1.0, 0.0);
    pub const PLUS_Z: BlochVector = BlochVector::new(0.0, 0.0, 1.0);
    pub const MINUS_Z: BlochVector = BlochVector::new(0.0, 0.0, -1.0);

    pub const fn new(mx: f64, my: f64, mz: f64) -> Self {
        BlochVector { mx, my, mz }
    }

    pub fn norm(&self) -> f64 {
        (self.mx * self.mx + self.my * self.my + self.mz * self.mz).sqrt()
    }

    /// Transverse (in-plane) magnitude `sqrt(mx^2 + my^2)`.
    pub fn transverse(&self) -> f64 {
        self.mx.hypot(self.my)
    }
}

/// Two-component pure state. Kept normalized to unit norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor {
    pub up: Complex64,
    pub down: Complex64,
}

impl Spinor {
    /// Normalizes the given amplitudes. Errors on a (near-)zero vector.
    pub fn new(up: Complex64, down: Complex64) -> Result<Self> {
        let n = (up.norm_sqr() + down.norm_sqr()).sqrt();
        if !n.is_finite() || n < 1e-12 {
            return Err(Error::invalid("spinor amplitudes must have nonzero norm"));
        }
        Ok(Spinor {
            up: up / n,
            down: down / n,
        })
    }

    /// The equilibrium state `(1, 0)`, Bloch vector +z.
    pub fn up_state() -> Self {
        Spinor {
            up: Complex64::new(1.0, 0.0),
            down: Complex64::new(0.0, 0.0),
        }
    }

    pub fn norm(&self) -> f64 {
        (self.up.norm_sqr() + self.down.norm_sqr()).sqrt()
    }

    /// Expectation values `(<sx>, <sy>, <sz>)`.
    pub fn to_bloch(&self) -> BlochVector {
        let cross = self.up.conj() * self.down;
        BlochVector::new(
            2.0 * cross.re,
            2.0 * cross.im,
            self.up.norm_sqr() - self.down.norm_sqr(),
        )
    }

    /// Unit Bloch vector -> spinor, with the up amplitude chosen real and
    /// non-negative (the global phase is arbitrary).
    pub fn from_bloch(v: BlochVector) -> Result<Self> {
        if (v.norm() - 1.0).abs() > AXIS_NORM_TOL {
            return Err(Error::invalid(format!(
                "bloch vector must be unit length, got |v| = {}",
                v.norm()
            )));
        }
        let theta = v.mz.clamp(-1.0, 1.0).acos();
        let phi = v.my.atan2(v.mx);
        let up = Complex64::new((theta / 2.0).cos(), 0.0);
        let down = Complex64::from_polar((theta / 2.0).sin(), phi);
        Ok(Spinor { up, down })
    }

    /// Applies the 2x2 matrix of `r` to this state.
    pub fn rotated(&self, r: &Su2Rotation) -> Spinor {
        let m = r.matrix();
        Spinor {
            up: m[0][0] * self.up + m[0][1] * self.down,
            down: m[1][0] * self.up + m[1][1] * self.down,
        }
    }
}

/// A special-unitary 2x2 rotation, stored as a unit quaternion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su2Rotation {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

/// z-x-z Euler factorization `exp(-i*alpha*Iz) exp(-i*gamma*Ix) exp(-i*beta*Iz)`.
///
/// `gamma` is the center angle, always in `[0, pi]`. When `sin(gamma) = 0` the
/// split between `alpha` and `beta` is degenerate; the convention here puts the
/// whole z-angle into `alpha` and sets `beta = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerZxz {
    pub alpha: f64,
    pub gamma: f64,
    pub beta: f64,
}

impl EulerZxz {
    /// Rebuilds the rotation this decomposition came from (up to global phase).
    pub fn recompose(&self) -> Su2Rotation {
        let rz_a = Su2Rotation::about_z(self.alpha);
        let rx_g = Su2Rotation::about_x(self.gamma);
        let rz_b = Su2Rotation::about_z(self.beta);
        rz_a.compose(&rx_g.compose(&rz_b))
    }
}

impl Su2Rotation {
    pub const IDENTITY: Su2Rotation = Su2Rotation {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn identity() -> Self {
        Self::IDENTITY
    }

    /// Builds a rotation from raw quaternion components, normalizing them.
    /// Errors if the components are not reasonably close to unit norm.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !n.is_finite() || n < 1e-6 {
            return Err(Error::invalid(
                "quaternion components must have nonzero finite norm",
            ));
        }
        Ok(Su2Rotation {
            w: w / n,
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    /// `exp(-i*angle*(n . I))`: rotation by `angle` about the unit axis `n`
    /// (right-hand rule).
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Result<Self> {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if (n - 1.0).abs() > AXIS_NORM_TOL {
            return Err(Error::invalid(format!(
                "rotation axis must be unit length, got |axis| = {n}"
            )));
        }
        let (s, c) = (angle / 2.0).sin_cos();
        Ok(Su2Rotation {
            w: c,
            x: s * axis[0],
            y: s * axis[1],
            z: s * axis[2],
        })
    }

    /// Rotation by `angle` about +x.
    pub fn about_x(angle: f64) -> Self {
        let (s, c) = (angle / 2.0).sin_cos();
        Su2Rotation {
            w: c,
            x: s,
            y: 0.0,
            z: 0.0,
        }
    }

    /// Rotation by `angle` about +z.
    pub fn about_z(angle: f64) -> Self {
        let (s, c) = (angle / 2.0).sin_cos();
        Su2Rotation {
            w: c,
            x: 0.0,
            y: 0.0,
            z: s,
        }
    }

    /// The ideal inversion `exp(-i*pi*Ix)`.
    pub fn inversion_x() -> Self {
        Su2Rotation {
            w: 0.0,
            x: 1.0,
            y: 0.0,
            z: 0.0,
        }
    }

    /// Exact propagator of the constant Hamiltonian
    /// `omega*Iz + amplitude*cos(phase)*Ix + amplitude*sin(phase)*Iy`
    /// over `duration`:
    /// a rotation by `Omega*duration` about `(A*cos, A*sin, omega)/Omega`,
    /// `Omega = sqrt(omega^2 + A^2)`.
    pub fn propagator_const(omega: f64, amplitude: f64, phase: f64, duration: f64) -> Result<Self> {
        if !amplitude.is_finite() || amplitude < 0.0 {
            return Err(Error::invalid(format!(
                "amplitude must be non-negative, got {amplitude}"
            )));
        }
        if !duration.is_finite() || duration < 0.0 {
            return Err(Error::invalid(format!(
                "duration must be non-negative, got {duration}"
            )));
        }
        let hx = amplitude * phase.cos();
        let hy = amplitude * phase.sin();
        let hz = omega;
        let big_omega = (hx * hx + hy * hy + hz * hz).sqrt();
        let half = big_omega * duration / 2.0;
        // sin(half)/Omega, finite in the Omega -> 0 limit (value duration/2).
        let s_over = if big_omega > 1e-300 {
            half.sin() / big_omega
        } else {
            duration / 2.0
        };
        Ok(Su2Rotation {
            w: half.cos(),
            x: hx * s_over,
            y: hy * s_over,
            z: hz * s_over,
        })
    }

    /// Time-ordered product: `self` acts after `first` (matrix product
    /// `U_self * U_first`). The result is renormalized to keep long
    /// compositions on the unit sphere.
    pub fn compose(&self, first: &Su2Rotation) -> Su2Rotation {
        let (a0, a1, a2, a3) = (self.w, self.x, self.y, self.z);
        let (b0, b1, b2, b3) = (first.w, first.x, first.y, first.z);
        let q = Su2Rotation {
            w: a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            x: a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            y: a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            z: a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        };
        q.renormalized()
    }

    /// Inverse rotation (quaternion conjugate).
    pub fn inverse(&self) -> Su2Rotation {
        Su2Rotation {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    fn renormalized(self) -> Su2Rotation {
        let n = self.norm();
        Su2Rotation {
            w: self.w / n,
            x: self.x / n,
            y: self.y / n,
            z: self.z / n,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn quaternion(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// The 2x2 matrix `[[w - i*z, -y - i*x], [y - i*x, w + i*z]]`.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [
            [
                Complex64::new(self.w, -self.z),
                Complex64::new(-self.y, -self.x),
            ],
            [
                Complex64::new(self.y, -self.x),
                Complex64::new(self.w, self.z),
            ],
        ]
    }

    /// Squared magnitude of the down<-up matrix element: the probability that
    /// this rotation carries +z to -z.
    pub fn inversion_probability(&self) -> f64 {
        (self.x * self.x + self.y * self.y).clamp(0.0, 1.0)
    }

    /// Adjoint (vector) action on the Bloch sphere. Preserves length and is
    /// consistent with conjugating the density operator by the 2x2 matrix.
    pub fn apply_to_bloch(&self, v: BlochVector) -> BlochVector {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        let r00 = 1.0 - 2.0 * (y * y + z * z);
        let r01 = 2.0 * (x * y - w * z);
        let r02 = 2.0 * (x * z + w * y);
        let r10 = 2.0 * (x * y + w * z);
        let r11 = 1.0 - 2.0 * (x * x + z * z);
        let r12 = 2.0 * (y * z - w * x);
        let r20 = 2.0 * (x * z - w * y);
        let r21 = 2.0 * (y * z + w * x);
        let r22 = 1.0 - 2.0 * (x * x + y * y);
        BlochVector::new(
            r00 * v.mx + r01 * v.my + r02 * v.mz,
            r10 * v.mx + r11 * v.my + r12 * v.mz,
            r20 * v.mx + r21 * v.my + r22 * v.mz,
        )
    }

    /// z-x-z Euler decomposition with `gamma` in `[0, pi]`.
    ///
    /// From the quaternion, `(w, z) = cos(gamma/2)*(cos S, sin S)` and
    /// `(x, y) = sin(gamma/2)*(cos D, sin D)` with `S = (alpha+beta)/2`,
    /// `D = (alpha-beta)/2`. Near the degenerate cases the whole z-angle goes
    /// into `alpha`.
    pub fn euler_zxz(&self) -> EulerZxz {
        let c = self.w.hypot(self.z);
        let s = self.x.hypot(self.y);
        let gamma = 2.0 * s.atan2(c);
        const TIE: f64 = 1e-12;
        let (alpha, beta) = if s < TIE {
            (2.0 * self.z.atan2(self.w), 0.0)
        } else if c < TIE {
            (2.0 * self.y.atan2(self.x), 0.0)
        } else {
            let sum_half = self.z.atan2(self.w);
            let diff_half = self.y.atan2(self.x);
            (sum_half + diff_half, sum_half - diff_half)
        };
        EulerZxz { alpha, gamma, beta }
    }

    /// Global-phase-invariant metric `1 - |<q1, q2>|`: 0 iff the two values
    /// are the same physical rotation, 1 when maximally distant.
    pub fn distance(&self, other: &Su2Rotation) -> f64 {
        let dot = self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z;
        (1.0 - dot.abs()).clamp(0.0, 1.0)
    }
}
