//! Built-in verification suite: quick versions of the analytic oracles,
//! printed as one PASS/FAIL line each.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use twistion::scenarios::{small_b_oracle, DEFAULT_PITCH, DEFAULT_WAIST};
use twistion::{
    amplitudes, builtin_scenarios, clebsch_gordan, find_scenario, polarized_amplitude,
    transition_strength, twisted_amplitude, wigner_small_d, BeamSpec, Geometry, HalfInt, Helicity,
    LinearPolarization, Polarization,
};

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        if ok {
            println!("PASS {name}");
        } else {
            println!("FAIL {name} ({detail})");
            self.failures += 1;
        }
    }
}

fn pol_of(p: LinearPolarization) -> Polarization {
    match p {
        LinearPolarization::Horizontal => Polarization::horizontal(),
        LinearPolarization::Vertical => Polarization::vertical(),
    }
}

/// Runs every suite; returns true when all pass.
pub fn run() -> bool {
    let mut report = Report { failures: 0 };

    // Clebsch-Gordan orthogonality on a reduced grid.
    let mut worst = 0.0f64;
    for tj1 in 0i32..=3 {
        for tj2 in 0i32..=4 {
            let h = HalfInt::from_twice;
            for tja in ((tj1 - tj2).abs()..=tj1 + tj2).step_by(2) {
                for tma in (-tja..=tja).step_by(2) {
                    let mut acc = 0.0;
                    for tm1 in (-tj1..=tj1).step_by(2) {
                        let tm2 = tma - tm1;
                        if tm2.abs() > tj2 {
                            continue;
                        }
                        let c =
                            clebsch_gordan(h(tj1), h(tm1), h(tj2), h(tm2), h(tja), h(tma)).unwrap();
                        acc += c * c;
                    }
                    worst = worst.max((acc - 1.0).abs());
                }
            }
        }
    }
    report.check(
        "angular: coupling-coefficient normalization",
        worst < 1e-12,
        format!("{worst:.2e}"),
    );

    // d-matrix unitarity.
    let mut worst = 0.0f64;
    for tj in [1, 3, 4, 7] {
        let j = HalfInt::from_twice(tj);
        for theta in [0.3, 1.1, 2.0] {
            for m in j.projections() {
                let row: f64 = j
                    .projections()
                    .map(|k| wigner_small_d(j, m, k, theta).unwrap().powi(2))
                    .sum();
                worst = worst.max((row - 1.0).abs());
            }
        }
    }
    report.check(
        "angular: rotation-matrix unitarity",
        worst < 1e-12,
        format!("{worst:.2e}"),
    );

    // Central selection rules for the default channels.
    let mut worst = 0.0f64;
    for scenario in builtin_scenarios() {
        let t = &scenario.transition;
        for oam in 0..=2 {
            let beam = BeamSpec::bessel_gauss(DEFAULT_PITCH, oam, DEFAULT_WAIST).unwrap();
            for hel in [Helicity::Minus, Helicity::Plus] {
                let m_gamma = oam + hel.lambda();
                let dm = (scenario.default_m_f.twice() - scenario.default_m_i.twice()) / 2;
                if dm == m_gamma {
                    continue;
                }
                let s = transition_strength(
                    t,
                    &beam,
                    &Geometry::axial(1e-9, 0.0).unwrap(),
                    scenario.default_m_i,
                    scenario.default_m_f,
                    Polarization::Helicity(hel),
                )
                .unwrap();
                worst = worst.max(s);
            }
        }
    }
    report.check(
        "selection rules at the vortex center",
        worst < 1e-8,
        format!("{worst:.2e}"),
    );

    // Vortex-center shapes against the closed forms.
    let theta_k = 0.05;
    let angles: Vec<f64> = (0..20)
        .map(|i| 0.07 + (PI - 0.14) * i as f64 / 19.0)
        .collect();
    let mut worst = 0.0f64;
    for scenario in builtin_scenarios() {
        for oam in 0..=2 {
            let beam = BeamSpec::bessel(theta_k, oam).unwrap();
            for lp in [LinearPolarization::Horizontal, LinearPolarization::Vertical] {
                if small_b_oracle(&scenario.id, oam, lp, angles[0], theta_k).is_none() {
                    continue;
                }
                let oracle: Vec<_> = angles
                    .iter()
                    .map(|&z| small_b_oracle(&scenario.id, oam, lp, z, theta_k).unwrap())
                    .collect();
                let pipeline: Vec<_> = angles
                    .iter()
                    .map(|&z| {
                        polarized_amplitude(
                            &scenario.transition,
                            &beam,
                            &Geometry::new(1e-4, 0.0, z, 0.0).unwrap(),
                            scenario.default_m_i,
                            scenario.default_m_f,
                            pol_of(lp),
                        )
                        .unwrap()
                    })
                    .collect();
                let iref = (0..angles.len())
                    .max_by(|&a, &b| oracle[a].norm().total_cmp(&oracle[b].norm()))
                    .unwrap();
                for k in 0..angles.len() {
                    let dev = (pipeline[k] / pipeline[iref] - oracle[k] / oracle[iref]).norm();
                    worst = worst.max(dev);
                }
            }
        }
    }
    report.check(
        "vortex-center shape oracles",
        worst < 1e-3,
        format!("{worst:.2e}"),
    );

    // The two evaluation routes agree.
    let mut worst = 0.0f64;
    for scenario in builtin_scenarios() {
        let beam = BeamSpec::bessel_gauss(0.21, 1, 7.0).unwrap();
        let geom = Geometry::new(2.4, 0.8, 1.1, -0.3).unwrap();
        for hel in [Helicity::Minus, Helicity::Plus] {
            let a = twisted_amplitude(
                &scenario.transition,
                &beam,
                &geom,
                scenario.default_m_i,
                scenario.default_m_f,
                hel,
            )
            .unwrap();
            let b = amplitudes::twisted_amplitude_projected(
                &scenario.transition,
                &beam,
                &geom,
                scenario.default_m_i,
                scenario.default_m_f,
                hel,
            )
            .unwrap();
            worst = worst.max((a - b).norm());
        }
    }
    report.check(
        "independent evaluation routes agree",
        worst < 1e-12,
        format!("{worst:.2e}"),
    );

    // Active and passive plane-wave rotations share their moduli.
    let ca = find_scenario("ca40_e2").unwrap();
    let mut worst = 0.0f64;
    for (psi, theta) in [(0.4, 0.7), (-1.8, 1.9), (2.2, 2.8)] {
        for hel in [Helicity::Minus, Helicity::Plus] {
            let a = amplitudes::rotated_plane_wave_amplitude(
                &ca.transition,
                ca.default_m_i,
                ca.default_m_f,
                hel,
                psi,
                theta,
            )
            .unwrap();
            let p = amplitudes::rotated_plane_wave_amplitude_passive(
                &ca.transition,
                ca.default_m_i,
                ca.default_m_f,
                hel,
                psi,
                theta,
            )
            .unwrap();
            worst = worst.max((a.norm() - p.norm()).abs());
        }
    }
    report.check(
        "plane-wave rotation conventions",
        worst < 1e-12,
        format!("{worst:.2e}"),
    );

    // Hyperfine scale factor.
    let beam = BeamSpec::bessel_gauss(DEFAULT_PITCH, 1, DEFAULT_WAIST).unwrap();
    let cmp = twistion::scenarios::hyperfine_comparison(
        &beam,
        FRAC_PI_4,
        Polarization::horizontal(),
        20.0,
        200,
    )
    .unwrap();
    let golden = 2.0 / 5.0f64.sqrt();
    report.check(
        "hyperfine scale factor 2/sqrt(5)",
        (cmp.scale_ratio - golden).abs() < 1e-10 && cmp.ratio_spread < 1e-10,
        format!("ratio {} spread {:.2e}", cmp.scale_ratio, cmp.ratio_spread),
    );

    // Named zero: horizontal suppression for the quadrupole at pi/4.
    let s = transition_strength(
        &ca.transition,
        &BeamSpec::bessel_gauss(DEFAULT_PITCH, 0, DEFAULT_WAIST).unwrap(),
        &Geometry::new(0.0, 0.0, FRAC_PI_4, 0.0).unwrap(),
        ca.default_m_i,
        ca.default_m_f,
        Polarization::horizontal(),
    )
    .unwrap();
    report.check(
        "quadrupole horizontal zero at pi/4",
        s < 1e-12,
        format!("{s:.2e}"),
    );

    // Named zero: vertical suppression for the dipole at pi/2.
    let ar = find_scenario("ar13_m1").unwrap();
    let s = transition_strength(
        &ar.transition,
        &BeamSpec::bessel_gauss(DEFAULT_PITCH, 0, DEFAULT_WAIST).unwrap(),
        &Geometry::new(0.0, 0.0, FRAC_PI_2, 0.0).unwrap(),
        ar.default_m_i,
        ar.default_m_f,
        Polarization::vertical(),
    )
    .unwrap();
    report.check(
        "dipole vertical zero at pi/2",
        s < 1e-12,
        format!("{s:.2e}"),
    );

    if report.failures == 0 {
        println!("selftest: all suites passed");
        true
    } else {
        println!("selftest: {} suite(s) FAILED", report.failures);
        false
    }
}
