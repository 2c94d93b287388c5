//! Photo-absorption transition amplitudes and excitation-strength profiles
//! for single trapped ions driven by twisted (orbital-angular-momentum
//! carrying) Bessel and Bessel-Gauss beams.
//!
//! The crate covers electric, magnetic and mixed multipole transitions at
//! arbitrary beam/quantization-axis alignment and arbitrary polarization,
//! including hyperfine structure. Lengths are measured in units of the
//! optical wavelength and reduced multipole amplitudes are caller-supplied
//! parameters, so every output is in arbitrary (but mutually consistent)
//! units.

pub mod amplitudes;
pub mod angular;
pub mod beams;
mod error;
pub mod scenarios;

pub use amplitudes::{
    amplitude_matrix, bessel_amplitude, bg_amplitude, plane_wave_amplitude, polarized_amplitude,
    sublevel_summed_strength_sq, transition_strength, twisted_amplitude, AmplitudeMatrix,
    Hyperfine, LinearPolarization, Multipole, MultipoleKind, TransitionSpec,
};
pub use angular::{clebsch_gordan, wigner_6j, wigner_big_d, wigner_small_d, HalfInt};
pub use beams::{
    bessel_j, decompose_polarization, total_angular_momentum_projection, BeamFamily, BeamSpec,
    Geometry, Helicity, Polarization,
};
pub use error::{Error, Result};
pub use scenarios::{builtin_scenarios, find_scenario, small_b_oracle, Scenario};
