//! Scan drivers: strength profiles over impact parameter, polarization
//! maps over (alpha, b), and alignment scans over theta_z.

use std::f64::consts::PI;

use twistion::{transition_strength, Geometry, HalfInt, Polarization, Result, Scenario};

use crate::request::{ChannelSelection, Normalization, PolRequest, ScanRequest};
use crate::table::{Grid, Table};

/// Signed impact parameters map onto the non-negative (b, phi_b) pair by
/// adding pi to the azimuth on the negative side.
fn geometry_for_signed_b(req: &ScanRequest, b_signed: f64) -> Result<Geometry> {
    let (b, phi_b) = if b_signed < 0.0 {
        (-b_signed, req.phi_b + PI)
    } else {
        (b_signed, req.phi_b)
    };
    Geometry::new(b, phi_b, req.theta_z, req.phi_z)
}

fn channel_label(m_i: HalfInt, m_f: HalfInt) -> String {
    let fmt = |m: HalfInt| m.to_string().replace('-', "m").replace('/', "o");
    format!("mi{}_mf{}", fmt(m_i), fmt(m_f))
}

/// Strength versus impact parameter, one column per (channel, polarization).
/// With `normalize = peak` the table maximum is 1; an all-zero table is
/// left untouched and reported through the returned flag.
pub fn run_profile(req: &ScanRequest) -> Result<(Table, bool)> {
    req.validate()?;
    let beam = req.beam()?;
    let channels = req.channels.resolve(&req.scenario);
    let PolRequest::Named(pols, labels) = &req.pol else {
        return Err(twistion::Error::Unsupported(
            "profile scans need a concrete polarization list, not a sweep".into(),
        ));
    };
    let mut headers = vec!["b_lambda".to_string()];
    for (m_i, m_f) in &channels {
        for label in labels {
            if channels.len() == 1 {
                headers.push(format!("strength_{label}"));
            } else {
                headers.push(format!("strength_{}_{label}", channel_label(*m_i, *m_f)));
            }
        }
    }
    let mut rows = Vec::with_capacity(req.b_steps);
    for i in 0..req.b_steps {
        let b = req.b_min + (req.b_max - req.b_min) * i as f64 / (req.b_steps - 1) as f64;
        let geom = geometry_for_signed_b(req, b)?;
        let mut row = vec![b];
        for (m_i, m_f) in &channels {
            for pol in pols {
                row.push(transition_strength(
                    &req.scenario.transition,
                    &beam,
                    &geom,
                    *m_i,
                    *m_f,
                    *pol,
                )?);
            }
        }
        rows.push(row);
    }
    let mut table = Table { headers, rows };
    let mut normalized_ok = true;
    if req.normalize == Normalization::Peak {
        normalized_ok = table.normalize_peak();
    }
    Ok((table, normalized_ok))
}

/// Strength over (alpha, signed b). A sweep covers alpha in [0, pi] at the
/// request's fixed retardation; a named polarization list produces one row
/// per entry. The signed-b axis spans [-b_max, b_max].
pub fn run_polmap(req: &ScanRequest) -> Result<(Grid, bool)> {
    req.validate()?;
    let beam = req.beam()?;
    let (m_i, m_f) = match req.channels {
        ChannelSelection::One(m_i, m_f) => (m_i, m_f),
        ChannelSelection::All => (req.scenario.default_m_i, req.scenario.default_m_f),
    };
    let ncols = 2 * req.b_steps - 1;
    let col_values: Vec<f64> = (0..ncols)
        .map(|i| -req.b_max + 2.0 * req.b_max * i as f64 / (ncols - 1) as f64)
        .collect();
    let (row_values, pols): (Vec<f64>, Vec<Polarization>) = match &req.pol {
        PolRequest::Sweep => {
            let alphas: Vec<f64> = (0..req.angle_steps)
                .map(|i| PI * i as f64 / (req.angle_steps - 1) as f64)
                .collect();
            let pols = alphas
                .iter()
                .map(|&a| Polarization::general(a, req.sweep_delta))
                .collect();
            (alphas, pols)
        }
        PolRequest::Named(pols, _) => {
            let rows = (0..pols.len()).map(|i| i as f64).collect();
            (rows, pols.clone())
        }
    };
    let mut values = Vec::with_capacity(row_values.len() * ncols);
    for pol in &pols {
        for &b in &col_values {
            let geom = geometry_for_signed_b(req, b)?;
            values.push(transition_strength(
                &req.scenario.transition,
                &beam,
                &geom,
                m_i,
                m_f,
                *pol,
            )?);
        }
    }
    let mut grid = Grid {
        row_label: "alpha_rad".to_string(),
        row_values,
        col_values,
        values,
    };
    let mut normalized_ok = true;
    if req.normalize == Normalization::Peak {
        normalized_ok = grid.normalize_peak();
    }
    Ok((grid, normalized_ok))
}

/// Strength versus alignment angle theta_z in [0, pi] at fixed b.
pub fn run_alignscan(req: &ScanRequest) -> Result<(Table, bool)> {
    if req.angle_steps < 2 {
        return Err(twistion::Error::Unsupported(
            "alignment scan needs at least 2 steps".into(),
        ));
    }
    let beam = req.beam()?;
    let channels = req.channels.resolve(&req.scenario);
    let PolRequest::Named(pols, labels) = &req.pol else {
        return Err(twistion::Error::Unsupported(
            "alignment scans need a concrete polarization list".into(),
        ));
    };
    let mut headers = vec!["theta_z_rad".to_string()];
    for (m_i, m_f) in &channels {
        for label in labels {
            if channels.len() == 1 {
                headers.push(format!("strength_{label}"));
            } else {
                headers.push(format!("strength_{}_{label}", channel_label(*m_i, *m_f)));
            }
        }
    }
    let mut rows = Vec::with_capacity(req.angle_steps);
    for i in 0..req.angle_steps {
        let theta_z = PI * i as f64 / (req.angle_steps - 1) as f64;
        let (b, phi_b) = if req.fixed_b < 0.0 {
            (-req.fixed_b, req.phi_b + PI)
        } else {
            (req.fixed_b, req.phi_b)
        };
        let geom = Geometry::new(b, phi_b, theta_z, req.phi_z)?;
        let mut row = vec![theta_z];
        for (m_i, m_f) in &channels {
            for pol in pols {
                row.push(transition_strength(
                    &req.scenario.transition,
                    &beam,
                    &geom,
                    *m_i,
                    *m_f,
                    *pol,
                )?);
            }
        }
        rows.push(row);
    }
    let mut table = Table { headers, rows };
    let mut normalized_ok = true;
    if req.normalize == Normalization::Peak {
        normalized_ok = table.normalize_peak();
    }
    Ok((table, normalized_ok))
}

/// Convenience constructor used by tests and the fitter.
pub fn base_request(scenario: Scenario) -> ScanRequest {
    use crate::request::defaults;
    ScanRequest {
        channels: ChannelSelection::One(scenario.default_m_i, scenario.default_m_f),
        scenario,
        beam_family: twistion::BeamFamily::BesselGauss,
        pitch: defaults::DEFAULT_PITCH,
        oam: 0,
        waist: defaults::DEFAULT_WAIST,
        theta_z: 0.0,
        phi_z: 0.0,
        phi_b: 0.0,
        pol: PolRequest::Named(
            vec![Polarization::horizontal(), Polarization::vertical()],
            vec!["H".into(), "V".into()],
        ),
        b_min: defaults::B_MIN,
        b_max: defaults::B_MAX,
        b_steps: defaults::B_STEPS,
        angle_steps: defaults::ANGLE_STEPS,
        sweep_delta: 0.0,
        fixed_b: 0.0,
        normalize: Normalization::Raw,
    }
}
