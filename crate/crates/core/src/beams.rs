//! Beam models and polarization states.
//!
//! All lengths are expressed in units of the optical wavelength, so the
//! wavenumber is fixed at `k = 2 pi`. The beam waist `w0` quoted for
//! Bessel-Gauss beams is likewise a plain number of wavelengths.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Wavenumber in wavelength units.
pub const WAVENUMBER: f64 = TAU;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BeamFamily {
    Bessel,
    BesselGauss,
}

/// A twisted beam: family, cone pitch angle, orbital angular momentum and
/// (for Bessel-Gauss) the Gaussian waist.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct BeamSpec {
    pub family: BeamFamily,
    /// Cone half-angle of the plane-wave components, radians, in [0, pi/2).
    pub pitch_angle: f64,
    /// Orbital angular momentum of the helical phase front.
    pub oam: i32,
    /// Gaussian waist in wavelengths; only meaningful for `BesselGauss`.
    pub waist: f64,
}

impl BeamSpec {
    pub fn bessel(pitch_angle: f64, oam: i32) -> Result<Self> {
        Self::validate_pitch(pitch_angle)?;
        Ok(BeamSpec {
            family: BeamFamily::Bessel,
            pitch_angle,
            oam,
            waist: f64::INFINITY,
        })
    }

    pub fn bessel_gauss(pitch_angle: f64, oam: i32, waist: f64) -> Result<Self> {
        Self::validate_pitch(pitch_angle)?;
        if !waist.is_finite() || waist <= 0.0 {
            return Err(Error::Beam(format!("waist must be positive, got {waist}")));
        }
        Ok(BeamSpec {
            family: BeamFamily::BesselGauss,
            pitch_angle,
            oam,
            waist,
        })
    }

    fn validate_pitch(pitch_angle: f64) -> Result<()> {
        if !(0.0..FRAC_PI_2).contains(&pitch_angle) {
            return Err(Error::Beam(format!(
                "pitch angle must lie in [0, pi/2), got {pitch_angle}"
            )));
        }
        Ok(())
    }

    /// Transverse momentum kappa = k sin(theta_k).
    pub fn kappa(&self) -> f64 {
        WAVENUMBER * self.pitch_angle.sin()
    }

    /// Longitudinal momentum k_z = k cos(theta_k).
    pub fn kz(&self) -> f64 {
        WAVENUMBER * self.pitch_angle.cos()
    }

    /// Gaussian envelope at impact parameter `b`; 1 for a pure Bessel beam.
    pub fn envelope(&self, b: f64) -> f64 {
        match self.family {
            BeamFamily::Bessel => 1.0,
            BeamFamily::BesselGauss => (-b * b / (self.waist * self.waist)).exp(),
        }
    }
}

/// Photon helicity, the spin projection on the propagation axis.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Helicity {
    Minus,
    Plus,
}

impl Helicity {
    pub const fn lambda(self) -> i32 {
        match self {
            Helicity::Minus => -1,
            Helicity::Plus => 1,
        }
    }

    pub fn from_lambda(lambda: i32) -> Result<Self> {
        match lambda {
            -1 => Ok(Helicity::Minus),
            1 => Ok(Helicity::Plus),
            _ => Err(Error::Beam(format!(
                "helicity must be +1 or -1, got {lambda}"
            ))),
        }
    }
}

/// Total angular momentum projection m_gamma = l_gamma + Lambda of a
/// definite-helicity beam.
pub fn total_angular_momentum_projection(helicity: Helicity, oam: i32) -> i32 {
    oam + helicity.lambda()
}

/// Polarization state of the beam.
///
/// `General { alpha, delta }` parametrizes a meridian sweep of the Poincare
/// sphere; both angles live in `[0, pi]`. The named linear states used for
/// in-plane ("horizontal") and out-of-plane ("vertical") polarization are
/// exposed as [`Polarization::horizontal`] and [`Polarization::vertical`].
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Polarization {
    Helicity(Helicity),
    General { alpha: f64, delta: f64 },
}

impl Polarization {
    /// General state with both angles reduced into `[0, pi]`; the
    /// boundary values 0 and pi are kept as given.
    pub fn general(alpha: f64, delta: f64) -> Self {
        let reduce = |x: f64| {
            if (0.0..=PI).contains(&x) {
                x
            } else {
                x.rem_euclid(PI)
            }
        };
        Polarization::General {
            alpha: reduce(alpha),
            delta: reduce(delta),
        }
    }

    /// True when `general` would have to reduce the angles.
    pub fn angles_out_of_range(alpha: f64, delta: f64) -> bool {
        !(0.0..=PI).contains(&alpha) || !(0.0..=PI).contains(&delta)
    }

    /// Linear polarization in the plane spanned by the beam axis and the
    /// quantization axis.
    pub fn horizontal() -> Self {
        Polarization::General {
            alpha: FRAC_PI_2,
            delta: FRAC_PI_2,
        }
    }

    /// Linear polarization perpendicular to that plane.
    pub fn vertical() -> Self {
        Polarization::General {
            alpha: FRAC_PI_2,
            delta: 0.0,
        }
    }
}

/// Complex weights `(c_minus, c_plus)` of the two circular components,
/// `e = c_minus e_- + c_plus e_+` with `e_+- = (-+1, -i, 0)/sqrt(2)`.
///
/// For a general state these are
/// `(e^{i delta} cos(alpha/2), -e^{-i delta} sin(alpha/2))`, which is
/// normalized for every `(alpha, delta)`.
pub fn decompose_polarization(pol: Polarization) -> (Complex64, Complex64) {
    match pol {
        Polarization::Helicity(Helicity::Minus) => (Complex64::ONE, Complex64::ZERO),
        Polarization::Helicity(Helicity::Plus) => (Complex64::ZERO, Complex64::ONE),
        Polarization::General { alpha, delta } => {
            let phase = Complex64::new(0.0, delta).exp();
            let c_minus = phase * (alpha / 2.0).cos();
            let c_plus = -phase * Complex64::new(0.0, -2.0 * delta).exp() * (alpha / 2.0).sin();
            (c_minus, c_plus)
        }
    }
}

/// Where the ion sits and how the quantization axis points.
///
/// `b >= 0` is the distance of the ion from the vortex line, `phi_b` its
/// azimuth, and `(theta_z, phi_z)` the polar alignment of the static field
/// axis relative to the beam axis.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Geometry {
    pub b: f64,
    pub phi_b: f64,
    pub theta_z: f64,
    pub phi_z: f64,
}

impl Geometry {
    pub fn new(b: f64, phi_b: f64, theta_z: f64, phi_z: f64) -> Result<Self> {
        if !b.is_finite() || b < 0.0 {
            return Err(Error::Geometry(format!(
                "impact parameter must be >= 0, got {b}"
            )));
        }
        Ok(Geometry {
            b,
            phi_b,
            theta_z,
            phi_z,
        })
    }

    /// Geometry with the quantization axis along the beam.
    pub fn axial(b: f64, phi_b: f64) -> Result<Self> {
        Self::new(b, phi_b, 0.0, 0.0)
    }
}

/// Cylindrical Bessel function of integer order for `x >= 0`.
///
/// Ascending series below x = 12, backward (Miller) recurrence with
/// normalization above; `J_{-n}(x) = (-1)^n J_n(x)`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    debug_assert!(x >= 0.0, "bessel_j expects x >= 0");
    let (n, sign) = if n < 0 {
        (-n, if n % 2 == 0 { 1.0 } else { -1.0 })
    } else {
        (n, 1.0)
    };
    if x < 12.0 {
        sign * bessel_series(n, x)
    } else {
        sign * bessel_miller(n, x)
    }
}

fn bessel_series(n: i32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let half = x / 2.0;
    // leading term (x/2)^n / n!
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / f64::from(k);
    }
    let mut sum = term;
    let q = half * half;
    for k in 1..=220 {
        term *= -q / (f64::from(k) * f64::from(k + n));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn bessel_miller(n: i32, x: f64) -> f64 {
    // Start the downward recurrence well above both the order and the
    // turning point so the minimal solution dominates by the time it
    // reaches n.
    let above_turning = x + 15.0 * x.cbrt() + 20.0;
    let start = ((above_turning as i32).max(n + 12) + 1) & !1; // even
    let mut jp = 0.0_f64; // J_{k+1}
    let mut jc = 1e-300_f64; // J_k seed
    let mut result = if n > start { 0.0 } else { f64::NAN };
    let mut norm = 0.0; // J_0 + 2 sum_{k even > 0} J_k
    for k in (0..=start).rev() {
        let jm = 2.0 * f64::from(k + 1) / x * jc - jp;
        jp = jc;
        jc = jm;
        // after this step jc = J_k, jp = J_{k+1}
        if k == n {
            result = jc;
        }
        if k % 2 == 0 {
            norm += if k == 0 { jc } else { 2.0 * jc };
        }
        // rescale to avoid overflow
        if jc.abs() > 1e250 {
            jc /= 1e250;
            jp /= 1e250;
            norm /= 1e250;
            if k <= n {
                result /= 1e250;
            }
        }
    }
    result / norm
}
