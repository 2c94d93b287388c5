//! Built-in ion scenarios and their closed-form vortex-center oracles.
//!
//! Five transitions are registered: the calcium quadrupole, the argon
//! magnetic dipole, the ytterbium octupole with and without nuclear spin,
//! and the neon mixed dipole-quadrupole case. Each carries a default
//! sublevel channel and canonical beam and alignment presets.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;

use crate::amplitudes::{transition_strength, LinearPolarization, Multipole, TransitionSpec};
use crate::angular::HalfInt;
use crate::beams::{BeamSpec, Geometry, Polarization};
use crate::error::{Error, Result};

/// Default pitch angle (radians) for canonical beams.
pub const DEFAULT_PITCH: f64 = 0.085;
/// Default Bessel-Gauss waist in wavelengths.
pub const DEFAULT_WAIST: f64 = 9.0;

/// A registered ion transition with canonical parameters.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub id: String,
    pub description: String,
    pub transition: TransitionSpec,
    /// Default initial sublevel of the profile scans.
    pub default_m_i: HalfInt,
    /// Default final sublevel of the profile scans.
    pub default_m_f: HalfInt,
}

impl Scenario {
    /// Bessel-Gauss presets with vorticities 0, 1 and 2.
    pub fn canonical_beams(&self) -> Vec<BeamSpec> {
        (0..=2)
            .map(|oam| BeamSpec::bessel_gauss(DEFAULT_PITCH, oam, DEFAULT_WAIST).unwrap())
            .collect()
    }

    /// Alignment presets theta_z in {0, pi/4, pi/2} at the vortex center.
    pub fn canonical_geometries(&self) -> Vec<Geometry> {
        [0.0, FRAC_PI_4, FRAC_PI_2]
            .into_iter()
            .map(|theta_z| Geometry::new(0.0, 0.0, theta_z, 0.0).unwrap())
            .collect()
    }
}

fn h(t: i32) -> HalfInt {
    HalfInt::from_twice(t)
}

/// Neon reduced-amplitude ratio M1/E2.
pub const NE5_M1_OVER_E2: f64 = 1.1;

/// Ytterbium octupole scenario with nuclear spin 1/2 and a caller-selected
/// hyperfine level pair. The registry default is (F_i, F_f) = (0, 3), the
/// only pair reachable from F_i = 0.
pub fn yb171_scenario(f_i: HalfInt, f_f: HalfInt) -> Result<Scenario> {
    let transition = TransitionSpec::new(h(1), h(7), vec![Multipole::electric(3, 1.0)?])?
        .with_hyperfine(h(1), f_i, f_f)?;
    let (m_i, m_f) = if f_i == HalfInt::ZERO {
        (HalfInt::ZERO, HalfInt::from_int(1))
    } else {
        // lowest |m_i| channel with delta_m = 1
        (HalfInt::ZERO, HalfInt::from_int(1))
    };
    Ok(Scenario {
        id: "yb171_e3".into(),
        description: "Yb+ 171 2S1/2 -> 2F7/2 electric octupole, nuclear spin 1/2".into(),
        transition,
        default_m_i: m_i,
        default_m_f: m_f,
    })
}

/// The five built-in scenarios.
pub fn builtin_scenarios() -> Vec<Scenario> {
    vec![
        Scenario {
            id: "ca40_e2".into(),
            description: "Ca+ 40 4S1/2 -> 3D5/2 electric quadrupole".into(),
            transition: TransitionSpec::new(h(1), h(5), vec![Multipole::electric(2, 1.0).unwrap()])
                .unwrap(),
            default_m_i: h(1),
            default_m_f: h(3),
        },
        Scenario {
            id: "ar13_m1".into(),
            description: "Ar13+ 2P1/2 -> 2P3/2 magnetic dipole".into(),
            transition: TransitionSpec::new(h(1), h(3), vec![Multipole::magnetic(1, 1.0).unwrap()])
                .unwrap(),
            default_m_i: h(1),
            default_m_f: h(3),
        },
        Scenario {
            id: "yb172_e3".into(),
            description: "Yb+ 172 2S1/2 -> 2F7/2 electric octupole, spinless nucleus".into(),
            transition: TransitionSpec::new(h(1), h(7), vec![Multipole::electric(3, 1.0).unwrap()])
                .unwrap(),
            default_m_i: h(1),
            default_m_f: h(3),
        },
        yb171_scenario(HalfInt::ZERO, HalfInt::from_int(3)).unwrap(),
        Scenario {
            id: "ne5_m1e2".into(),
            description: "Ne5+ 2P1/2 -> 2D3/2 mixed magnetic dipole + electric quadrupole".into(),
            transition: TransitionSpec::new(
                h(1),
                h(3),
                vec![
                    Multipole::magnetic(1, NE5_M1_OVER_E2).unwrap(),
                    Multipole::electric(2, 1.0).unwrap(),
                ],
            )
            .unwrap(),
            default_m_i: h(1),
            default_m_f: h(3),
        },
    ]
}

/// Looks a scenario up by id.
pub fn find_scenario(id: &str) -> Result<Scenario> {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::Unsupported(format!("unknown scenario `{id}`")))
}

/// Closed-form vortex-center amplitude shape for the default channel of a
/// scenario, as a function of the alignment angle.
///
/// These are the analytic small-b expansions of the full pipeline at small
/// pitch angle; they are unnormalized shapes used as test oracles. `None`
/// means no closed form is on record for that combination.
pub fn small_b_oracle(
    scenario_id: &str,
    oam: i32,
    pol: LinearPolarization,
    theta_z: f64,
    theta_k: f64,
) -> Option<Complex64> {
    use LinearPolarization::{Horizontal, Vertical};
    let i = Complex64::new(0.0, 1.0);
    let tk2 = theta_k * theta_k;
    let cz = theta_z.cos();
    let sz = theta_z.sin();
    let c2z = (2.0 * theta_z).cos();
    let c3z = (3.0 * theta_z).cos();
    let chalf2 = (theta_z / 2.0).cos().powi(2);
    match (scenario_id, oam, pol) {
        ("ca40_e2", 0, Horizontal) => Some(i * (5.0 * tk2 - 4.0) * c2z),
        ("ca40_e2", 0, Vertical) => Some(i * (5.0 * tk2 - 4.0) * cz),
        ("ca40_e2", 1, Horizontal) => Some((2.0 * theta_k * (1.0 + 4.0 * cz) * sz).into()),
        ("ca40_e2", 1, Vertical) => Some((2.0 * theta_k * (2.0 * cz - 1.0) * sz).into()),
        ("ca40_e2", 2, Horizontal) => Some(i * 3.0 / 2.0f64.sqrt() * tk2 * (cz + c2z)),
        ("ca40_e2", 2, Vertical) => Some(-i * 3.0 / 2.0f64.sqrt() * tk2 * (cz + c2z)),
        ("ar13_m1", 0, Horizontal) => Some(-i * (1.0 - tk2 / 4.0)),
        ("ar13_m1", 0, Vertical) => Some(i * (1.0 - tk2 / 4.0) * cz),
        ("ar13_m1", 1, _) => Some((theta_k * sz).into()),
        ("ar13_m1", 2, _) => Some((tk2 * chalf2).into()),
        ("yb172_e3" | "yb171_e3", 0, Horizontal) => {
            Some(i * (4.0 - 11.0 * tk2) * (cz + 15.0 * c3z))
        }
        ("yb172_e3" | "yb171_e3", 0, Vertical) => Some(-i * (4.0 - 11.0 * tk2) * (3.0 + 5.0 * c2z)),
        ("yb172_e3" | "yb171_e3", 1, Horizontal) => {
            Some((-4.0 * theta_k * (23.0 + 20.0 * cz + 45.0 * c2z) * sz).into())
        }
        ("yb172_e3" | "yb171_e3", 1, Vertical) => {
            Some((-4.0 * theta_k * (13.0 - 20.0 * cz + 15.0 * c2z) * sz).into())
        }
        ("yb172_e3" | "yb171_e3", 2, Horizontal) => {
            Some(i * 6.0 * tk2 * (21.0 - 40.0 * cz + 35.0 * c2z) * chalf2)
        }
        ("yb172_e3" | "yb171_e3", 2, Vertical) => {
            Some(i * 1.5 * tk2 * (22.0 + 7.0 * cz + 10.0 * c2z + 25.0 * c3z))
        }
        ("ne5_m1e2", 0, Horizontal) => {
            let m1 = NE5_M1_OVER_E2;
            Some(i * (3.0f64.sqrt() * m1 + (1.0 - 2.0 * theta_k.cos()) * c2z))
        }
        ("ne5_m1e2", 0, Vertical) => {
            let m1 = NE5_M1_OVER_E2;
            Some(i * (3.0f64.sqrt() * m1 + (1.0 - 2.0 * theta_k.cos())) * cz)
        }
        _ => None,
    }
}

/// Result of comparing the two ytterbium isotopes on a common grid.
#[derive(Clone, Debug)]
pub struct HyperfineComparison {
    pub b_grid: Vec<f64>,
    /// Strength profile of the nuclear-spin isotope (default F pair).
    pub with_spin: Vec<f64>,
    /// Strength profile of the spinless isotope.
    pub spinless: Vec<f64>,
    /// Mean pointwise strength ratio with_spin / spinless.
    pub scale_ratio: f64,
    /// Largest relative deviation of the pointwise ratio from the mean.
    pub ratio_spread: f64,
    pub minima_with_spin: Vec<usize>,
    pub minima_spinless: Vec<usize>,
}

fn local_minima(profile: &[f64]) -> Vec<usize> {
    (1..profile.len() - 1)
        .filter(|&i| profile[i] < profile[i - 1] && profile[i] < profile[i + 1])
        .collect()
}

/// Computes the ytterbium strength profiles with and without nuclear spin
/// on a common impact-parameter grid and reports the overall scale ratio
/// and the positions of the strength minima.
pub fn hyperfine_comparison(
    beam: &BeamSpec,
    theta_z: f64,
    pol: Polarization,
    b_max: f64,
    steps: usize,
) -> Result<HyperfineComparison> {
    if steps < 2 {
        return Err(Error::Unsupported(
            "hyperfine comparison needs at least 2 grid points".into(),
        ));
    }
    let with = find_scenario("yb171_e3")?;
    let without = find_scenario("yb172_e3")?;
    let b_grid: Vec<f64> = (0..steps)
        .map(|i| b_max * (i as f64 + 0.5) / steps as f64)
        .collect();
    let mut with_spin = Vec::with_capacity(steps);
    let mut spinless = Vec::with_capacity(steps);
    for &b in &b_grid {
        let geom = Geometry::new(b, 0.0, theta_z, 0.0)?;
        with_spin.push(transition_strength(
            &with.transition,
            beam,
            &geom,
            with.default_m_i,
            with.default_m_f,
            pol,
        )?);
        spinless.push(transition_strength(
            &without.transition,
            beam,
            &geom,
            without.default_m_i,
            without.default_m_f,
            pol,
        )?);
    }
    let peak = spinless.iter().cloned().fold(0.0, f64::max);
    let ratios: Vec<f64> = with_spin
        .iter()
        .zip(&spinless)
        .filter(|(_, &d)| d > 1e-9 * peak)
        .map(|(&n, &d)| n / d)
        .collect();
    let scale_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let ratio_spread = ratios
        .iter()
        .map(|r| (r - scale_ratio).abs() / scale_ratio)
        .fold(0.0, f64::max);
    Ok(HyperfineComparison {
        minima_with_spin: local_minima(&with_spin),
        minima_spinless: local_minima(&spinless),
        b_grid,
        with_spin,
        spinless,
        scale_ratio,
        ratio_spread,
    })
}
