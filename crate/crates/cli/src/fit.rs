//! Least-squares recovery of beam parameters from strength profiles.
//!
//! A damped Gauss-Newton (Levenberg-Marquardt) loop with a central-
//! difference Jacobian; the model is the full amplitude pipeline evaluated
//! at each data point. Free parameters are any subset of the pitch angle,
//! the vortex azimuth, the Gaussian waist, and an overall scale.

use std::f64::consts::PI;

use twistion::{transition_strength, BeamFamily, BeamSpec, Geometry, Polarization, Result};

use crate::request::{FitParam, FitPoint, FitRequest};

/// Fit result: final parameter values, convergence data and a covariance
/// estimate for the free parameters.
#[derive(Clone, Debug)]
pub struct FitOutcome {
    pub free: Vec<FitParam>,
    pub pitch: f64,
    pub phi_b: f64,
    pub waist: f64,
    pub scale: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Euclidean norm of the residual vector at the solution.
    pub residual_norm: f64,
    /// sigma^2 (J^T J)^-1 over the free parameters, row-major.
    pub covariance: Vec<Vec<f64>>,
}

impl FitOutcome {
    pub fn value(&self, p: FitParam) -> f64 {
        match p {
            FitParam::Pitch => self.pitch,
            FitParam::PhiB => self.phi_b,
            FitParam::Waist => self.waist,
            FitParam::Scale => self.scale,
        }
    }

    /// One-sigma uncertainty of a free parameter.
    pub fn sigma(&self, p: FitParam) -> Option<f64> {
        let k = self.free.iter().position(|&q| q == p)?;
        Some(self.covariance[k][k].max(0.0).sqrt())
    }
}

struct Model<'a> {
    req: &'a FitRequest,
}

impl Model<'_> {
    fn params_to_fields(&self, params: &[f64]) -> (f64, f64, f64, f64) {
        let mut pitch = self.req.init_pitch;
        let mut phi_b = self.req.init_phi_b;
        let mut waist = self.req.init_waist;
        let mut scale = self.req.init_scale;
        for (k, &p) in self.req.free.iter().enumerate() {
            match p {
                FitParam::Pitch => pitch = params[k],
                FitParam::PhiB => phi_b = params[k],
                FitParam::Waist => waist = params[k],
                FitParam::Scale => scale = params[k],
            }
        }
        (pitch, phi_b, waist, scale)
    }

    fn strength_at(&self, point: &FitPoint, params: &[f64]) -> Result<f64> {
        let (pitch, phi_b, waist, scale) = self.params_to_fields(params);
        // keep trial steps inside the physical domain
        let pitch = pitch.clamp(1e-9, std::f64::consts::FRAC_PI_2 - 1e-9);
        let waist = waist.max(1e-6);
        let beam = match self.req.beam_family {
            BeamFamily::Bessel => BeamSpec::bessel(pitch, self.req.oam)?,
            BeamFamily::BesselGauss => BeamSpec::bessel_gauss(pitch, self.req.oam, waist)?,
        };
        let (b, phi) = if point.b_signed < 0.0 {
            (-point.b_signed, phi_b + PI)
        } else {
            (point.b_signed, phi_b)
        };
        let geom = Geometry::new(b, phi, self.req.theta_z, self.req.phi_z)?;
        let pol = match point.alpha {
            Some(alpha) => Polarization::general(alpha, self.req.sweep_delta),
            None => self.req.pol,
        };
        let s = transition_strength(
            &self.req.scenario.transition,
            &beam,
            &geom,
            self.req.m_i,
            self.req.m_f,
            pol,
        )?;
        Ok(scale * s)
    }

    fn residuals(&self, params: &[f64]) -> Result<Vec<f64>> {
        self.req
            .data
            .iter()
            .map(|pt| Ok(self.strength_at(pt, params)? - pt.strength))
            .collect()
    }

    fn jacobian(&self, params: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = self.req.data.len();
        let p = params.len();
        let mut jac = vec![vec![0.0; p]; n];
        for k in 0..p {
            let h = 1e-7 * params[k].abs().max(1e-4);
            let mut lo = params.to_vec();
            let mut hi = params.to_vec();
            lo[k] -= h;
            hi[k] += h;
            let r_lo = self.residuals(&lo)?;
            let r_hi = self.residuals(&hi)?;
            for i in 0..n {
                jac[i][k] = (r_hi[i] - r_lo[i]) / (2.0 * h);
            }
        }
        Ok(jac)
    }
}

fn cost(resid: &[f64]) -> f64 {
    resid.iter().map(|r| r * r).sum()
}

/// Solves the symmetric positive system `a x = b` by Gaussian elimination
/// with partial pivoting; `None` when singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col].clone();
            for (c, pv) in pivot_row.iter().enumerate().skip(col) {
                a[row][c] -= f * pv;
            }
            b[row] -= f * b[col];
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let x = solve(a.to_vec(), e)?;
        for row in 0..n {
            out[row][col] = x[row];
        }
    }
    Some(out)
}

/// Runs the fit. Non-convergence is reported through
/// `FitOutcome::converged`, never silently.
pub fn run_fit(req: &FitRequest) -> Result<FitOutcome> {
    req.validate()?;
    let model = Model { req };
    let mut params: Vec<f64> = req
        .free
        .iter()
        .map(|&p| match p {
            FitParam::Pitch => req.init_pitch,
            FitParam::PhiB => req.init_phi_b,
            FitParam::Waist => req.init_waist,
            FitParam::Scale => req.init_scale,
        })
        .collect();
    let np = params.len();
    let mut resid = model.residuals(&params)?;
    let mut current_cost = cost(&resid);
    let mut damping = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    for iter in 0..req.max_iterations {
        iterations = iter + 1;
        let jac = model.jacobian(&params)?;
        // normal equations
        let mut jtj = vec![vec![0.0; np]; np];
        let mut jtr = vec![0.0; np];
        for (i, row) in jac.iter().enumerate() {
            for k in 0..np {
                jtr[k] += row[k] * resid[i];
                for l in 0..np {
                    jtj[k][l] += row[k] * row[l];
                }
            }
        }
        let mut stepped = false;
        for _ in 0..16 {
            let mut damped = jtj.clone();
            for k in 0..np {
                damped[k][k] += damping * jtj[k][k].max(1e-12);
            }
            let rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
            let Some(delta) = solve(damped, rhs) else {
                damping *= 10.0;
                continue;
            };
            let trial: Vec<f64> = params.iter().zip(&delta).map(|(p, d)| p + d).collect();
            let trial_resid = model.residuals(&trial)?;
            let trial_cost = cost(&trial_resid);
            if trial_cost <= current_cost {
                let rel_step = delta
                    .iter()
                    .zip(&params)
                    .map(|(d, p)| d.abs() / p.abs().max(1e-8))
                    .fold(0.0, f64::max);
                let rel_drop = (current_cost - trial_cost) / current_cost.max(1e-300);
                params = trial;
                resid = trial_resid;
                current_cost = trial_cost;
                damping = (damping / 10.0).max(1e-12);
                stepped = true;
                // step-size or cost-plateau convergence
                if rel_step < req.tolerance || rel_drop < req.tolerance {
                    converged = true;
                }
                break;
            }
            damping *= 10.0;
        }
        if !stepped {
            // no descent direction left: the quadratic model has bottomed
            // out, which counts as convergence once the gradient is flat
            let grad = jtr.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
            converged = current_cost < 1e-28 || grad * grad < 1e-20 * current_cost.max(1e-300);
            break;
        }
        if converged {
            break;
        }
    }
    // covariance from the final Jacobian
    let jac = model.jacobian(&params)?;
    let mut jtj = vec![vec![0.0; np]; np];
    for row in &jac {
        for k in 0..np {
            for l in 0..np {
                jtj[k][l] += row[k] * row[l];
            }
        }
    }
    let dof = (req.data.len() as f64 - np as f64).max(1.0);
    let sigma_sq = current_cost / dof;
    let covariance = invert(&jtj)
        .map(|inv| {
            inv.iter()
                .map(|row| row.iter().map(|v| v * sigma_sq).collect())
                .collect()
        })
        .unwrap_or_else(|| vec![vec![f64::NAN; np]; np]);
    let (pitch, phi_b, waist, scale) = model.params_to_fields(&params);
    Ok(FitOutcome {
        free: req.free.clone(),
        pitch,
        phi_b,
        waist,
        scale,
        converged,
        iterations,
        residual_norm: current_cost.sqrt(),
        covariance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::request::defaults;
    use twistion::find_scenario;

    fn synthetic_request(free: Vec<FitParam>) -> FitRequest {
        let scenario = find_scenario("ca40_e2").unwrap();
        let true_pitch = 0.085;
        let true_phi_b = -0.45;
        let true_waist = 9.0;
        let true_scale = 1.0;
        let beam = BeamSpec::bessel_gauss(true_pitch, 1, true_waist).unwrap();
        let mut data = Vec::new();
        let n = 81;
        for i in 0..n {
            let b_signed = -12.0 + 24.0 * i as f64 / (n - 1) as f64;
            let (b, phi) = if b_signed < 0.0 {
                (-b_signed, true_phi_b + PI)
            } else {
                (b_signed, true_phi_b)
            };
            let geom = Geometry::new(b, phi, std::f64::consts::FRAC_PI_4, 0.0).unwrap();
            let s = transition_strength(
                &scenario.transition,
                &beam,
                &geom,
                scenario.default_m_i,
                scenario.default_m_f,
                Polarization::horizontal(),
            )
            .unwrap();
            data.push(FitPoint {
                alpha: None,
                b_signed,
                strength: true_scale * s,
            });
        }
        FitRequest {
            m_i: scenario.default_m_i,
            m_f: scenario.default_m_f,
            scenario,
            beam_family: BeamFamily::BesselGauss,
            oam: 1,
            theta_z: std::f64::consts::FRAC_PI_4,
            phi_z: 0.0,
            pol: Polarization::horizontal(),
            sweep_delta: 0.0,
            data,
            free,
            init_pitch: 0.07,
            init_phi_b: -0.2,
            init_waist: 7.0,
            init_scale: 0.8,
            tolerance: defaults::FIT_TOLERANCE,
            max_iterations: defaults::FIT_MAX_ITERATIONS,
        }
    }

    #[test]
    fn zero_noise_round_trip_recovers_parameters() {
        let req = synthetic_request(vec![
            FitParam::Pitch,
            FitParam::PhiB,
            FitParam::Waist,
            FitParam::Scale,
        ]);
        let out = run_fit(&req).unwrap();
        assert!(
            out.converged,
            "fit did not converge in {} iterations",
            out.iterations
        );
        assert!(out.residual_norm < 1e-10, "residual {}", out.residual_norm);
        assert!(
            (out.pitch - 0.085).abs() < 1e-6 * 0.085,
            "pitch {}",
            out.pitch
        );
        assert!(
            (out.phi_b + 0.45).abs() < 1e-6 * 0.45,
            "phi_b {}",
            out.phi_b
        );
        assert!((out.waist - 9.0).abs() < 1e-6 * 9.0, "waist {}", out.waist);
        assert!((out.scale - 1.0).abs() < 1e-6, "scale {}", out.scale);
    }

    #[test]
    fn single_parameter_fit() {
        let mut req = synthetic_request(vec![FitParam::Pitch]);
        req.init_phi_b = -0.45;
        req.init_waist = 9.0;
        req.init_scale = 1.0;
        let out = run_fit(&req).unwrap();
        assert!(out.converged);
        assert!((out.pitch - 0.085).abs() < 1e-8);
    }

    #[test]
    fn pitch_recovery_across_the_quoted_window() {
        // Profiles generated anywhere in the 0.075..0.095 rad pitch window
        // are recovered from the window midpoint as the starting guess.
        for true_pitch in [0.075, 0.085, 0.095] {
            let scenario = find_scenario("ca40_e2").unwrap();
            let beam = BeamSpec::bessel_gauss(true_pitch, 1, 9.0).unwrap();
            let mut data = Vec::new();
            for i in 0..41 {
                let b_signed = 14.0 * i as f64 / 40.0;
                let geom = Geometry::new(b_signed, 0.0, std::f64::consts::FRAC_PI_4, 0.0).unwrap();
                let s = transition_strength(
                    &scenario.transition,
                    &beam,
                    &geom,
                    scenario.default_m_i,
                    scenario.default_m_f,
                    Polarization::vertical(),
                )
                .unwrap();
                data.push(FitPoint {
                    alpha: None,
                    b_signed,
                    strength: s,
                });
            }
            let req = FitRequest {
                m_i: scenario.default_m_i,
                m_f: scenario.default_m_f,
                scenario,
                beam_family: BeamFamily::BesselGauss,
                oam: 1,
                theta_z: std::f64::consts::FRAC_PI_4,
                phi_z: 0.0,
                pol: Polarization::vertical(),
                sweep_delta: 0.0,
                data,
                free: vec![FitParam::Pitch],
                init_pitch: 0.085,
                init_phi_b: 0.0,
                init_waist: 9.0,
                init_scale: 1.0,
                tolerance: defaults::FIT_TOLERANCE,
                max_iterations: defaults::FIT_MAX_ITERATIONS,
            };
            let out = run_fit(&req).unwrap();
            assert!(out.converged);
            assert!(
                (out.pitch - true_pitch).abs() < 1e-8,
                "true {true_pitch}: fitted {}",
                out.pitch
            );
        }
    }

    #[test]
    fn zero_noise_round_trip_for_every_builtin_scenario() {
        for scenario in twistion::builtin_scenarios() {
            let true_pitch = 0.085;
            let beam = BeamSpec::bessel_gauss(true_pitch, 1, 9.0).unwrap();
            let mut data = Vec::new();
            for i in 0..41 {
                let b_signed = 14.0 * i as f64 / 40.0;
                let geom = Geometry::new(b_signed, 0.0, std::f64::consts::FRAC_PI_4, 0.0).unwrap();
                let s = transition_strength(
                    &scenario.transition,
                    &beam,
                    &geom,
                    scenario.default_m_i,
                    scenario.default_m_f,
                    Polarization::horizontal(),
                )
                .unwrap();
                data.push(FitPoint {
                    alpha: None,
                    b_signed,
                    strength: s,
                });
            }
            let id = scenario.id.clone();
            let req = FitRequest {
                m_i: scenario.default_m_i,
                m_f: scenario.default_m_f,
                scenario,
                beam_family: BeamFamily::BesselGauss,
                oam: 1,
                theta_z: std::f64::consts::FRAC_PI_4,
                phi_z: 0.0,
                pol: Polarization::horizontal(),
                sweep_delta: 0.0,
                data,
                free: vec![FitParam::Pitch, FitParam::Scale],
                init_pitch: 0.07,
                init_phi_b: 0.0,
                init_waist: 9.0,
                init_scale: 0.8,
                tolerance: defaults::FIT_TOLERANCE,
                max_iterations: defaults::FIT_MAX_ITERATIONS,
            };
            let out = run_fit(&req).unwrap();
            assert!(out.converged, "{id} did not converge");
            assert!(
                (out.pitch - true_pitch).abs() < 1e-6 * true_pitch,
                "{id}: pitch {}",
                out.pitch
            );
            assert!((out.scale - 1.0).abs() < 1e-6, "{id}: scale {}", out.scale);
        }
    }

    #[test]
    fn underdetermined_fit_is_rejected() {
        let mut req = synthetic_request(vec![FitParam::Pitch]);
        req.data.clear();
        assert!(run_fit(&req).is_err());
        let mut req = synthetic_request(vec![]);
        req.free.clear();
        assert!(run_fit(&req).is_err());
    }
}
