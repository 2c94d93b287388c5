//! Scan and fit request types shared by the command line and the library
//! entry points.

use std::str::FromStr;

use twistion::scenarios::yb171_scenario;
use twistion::{
    find_scenario, BeamFamily, BeamSpec, Error, HalfInt, Helicity, Multipole, Polarization, Result,
    Scenario, TransitionSpec,
};

/// Which sublevel channels a scan covers.
#[derive(Clone, Debug, PartialEq)]
pub enum ChannelSelection {
    One(HalfInt, HalfInt),
    All,
}

impl ChannelSelection {
    /// Resolves to concrete (m_i, m_f) pairs for a scenario.
    pub fn resolve(&self, scenario: &Scenario) -> Vec<(HalfInt, HalfInt)> {
        match *self {
            ChannelSelection::One(m_i, m_f) => vec![(m_i, m_f)],
            ChannelSelection::All => {
                let t = &scenario.transition;
                let mut out = Vec::new();
                for m_i in t.initial_momentum().projections() {
                    for m_f in t.final_momentum().projections() {
                        if (m_f.twice() - m_i.twice()) % 2 == 0 {
                            out.push((m_i, m_f));
                        }
                    }
                }
                out
            }
        }
    }
}

/// Polarization requested on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum PolRequest {
    Named(Vec<Polarization>, Vec<String>),
    /// Meridian sweep over alpha at fixed delta (polarization maps only).
    Sweep,
}

/// Parses `L`, `R`, `H`, `V`, `alpha:delta` or `sweep`, with comma-separated
/// lists for multi-column scans. Angle pairs outside [0, pi] are reduced and
/// reported through the `warnings` vector.
pub fn parse_polarization(spec: &str, warnings: &mut Vec<String>) -> Result<PolRequest> {
    let spec = spec.trim();
    if spec.eq_ignore_ascii_case("sweep") {
        return Ok(PolRequest::Sweep);
    }
    let mut pols = Vec::new();
    let mut labels = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        let (pol, label) = match part {
            "L" | "l" => (Polarization::Helicity(Helicity::Plus), "L".to_string()),
            "R" | "r" => (Polarization::Helicity(Helicity::Minus), "R".to_string()),
            "H" | "h" => (Polarization::horizontal(), "H".to_string()),
            "V" | "v" => (Polarization::vertical(), "V".to_string()),
            other => {
                let (a, d) = other.split_once(':').ok_or_else(|| {
                    Error::Unsupported(format!(
                        "polarization `{other}` is not one of L, R, H, V, alpha:delta, sweep"
                    ))
                })?;
                let alpha: f64 = a
                    .trim()
                    .parse()
                    .map_err(|_| Error::Unsupported(format!("bad polarization angle `{a}`")))?;
                let delta: f64 = d
                    .trim()
                    .parse()
                    .map_err(|_| Error::Unsupported(format!("bad polarization angle `{d}`")))?;
                if Polarization::angles_out_of_range(alpha, delta) {
                    warnings.push(format!(
                        "polarization angles ({alpha}, {delta}) reduced into [0, pi]"
                    ));
                }
                (
                    Polarization::general(alpha, delta),
                    format!("a{alpha}_d{delta}"),
                )
            }
        };
        pols.push(pol);
        labels.push(label);
    }
    if pols.is_empty() {
        return Err(Error::Unsupported("empty polarization list".into()));
    }
    Ok(PolRequest::Named(pols, labels))
}

pub fn parse_channel(mi: &str, mf: &str) -> Result<ChannelSelection> {
    if mi.eq_ignore_ascii_case("all") || mf.eq_ignore_ascii_case("all") {
        return Ok(ChannelSelection::All);
    }
    Ok(ChannelSelection::One(
        HalfInt::from_str(mi)?,
        HalfInt::from_str(mf)?,
    ))
}

/// How scan output is scaled.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Normalization {
    Raw,
    Peak,
}

impl FromStr for Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(Normalization::Raw),
            "peak" => Ok(Normalization::Peak),
            other => Err(Error::Unsupported(format!(
                "normalization `{other}` (use raw or peak)"
            ))),
        }
    }
}

/// Fully resolved scan parameters.
#[derive(Clone, Debug)]
pub struct ScanRequest {
    pub scenario: Scenario,
    pub channels: ChannelSelection,
    pub beam_family: BeamFamily,
    pub pitch: f64,
    pub oam: i32,
    pub waist: f64,
    pub theta_z: f64,
    pub phi_z: f64,
    pub phi_b: f64,
    pub pol: PolRequest,
    pub b_min: f64,
    pub b_max: f64,
    pub b_steps: usize,
    /// Rows of a polarization map (alpha samples) or an alignment scan.
    pub angle_steps: usize,
    /// Fixed retardation of the polarization sweep.
    pub sweep_delta: f64,
    /// Fixed impact parameter of an alignment scan.
    pub fixed_b: f64,
    pub normalize: Normalization,
}

impl ScanRequest {
    pub fn beam(&self) -> Result<BeamSpec> {
        match self.beam_family {
            BeamFamily::Bessel => BeamSpec::bessel(self.pitch, self.oam),
            BeamFamily::BesselGauss => BeamSpec::bessel_gauss(self.pitch, self.oam, self.waist),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.b_steps < 2 {
            return Err(Error::Unsupported("b grid needs at least 2 steps".into()));
        }
        if self.b_min < 0.0 || self.b_max < self.b_min {
            return Err(Error::Geometry(format!(
                "bad b range [{}, {}]",
                self.b_min, self.b_max
            )));
        }
        self.beam()?;
        Ok(())
    }
}

/// Parses a multipole list such as `E2:1.0,M1:1.1`; a bare `E2` means
/// reduced amplitude 1.
pub fn parse_multipoles(spec: &str) -> Result<Vec<Multipole>> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        let (name, amp) = match part.split_once(':') {
            Some((n, a)) => (
                n.trim(),
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Unsupported(format!("bad multipole amplitude `{a}`")))?,
            ),
            None => (part, 1.0),
        };
        let bad = || {
            Error::Unsupported(format!(
                "multipole `{name}` is not of the form E<order> or M<order>"
            ))
        };
        let mut chars = name.chars();
        let kind = chars.next().ok_or_else(bad)?;
        let order: u32 = chars.as_str().parse().map_err(|_| bad())?;
        let mp = match kind {
            'E' | 'e' => Multipole::electric(order, amp)?,
            'M' | 'm' => Multipole::magnetic(order, amp)?,
            _ => return Err(bad()),
        };
        out.push(mp);
    }
    if out.is_empty() {
        return Err(Error::Unsupported("empty multipole list".into()));
    }
    Ok(out)
}

/// Builds a user-defined transition from plain parameters; used by the
/// config-file path so new ions can be scanned without recompiling.
pub fn custom_scenario(
    name: &str,
    j_i: HalfInt,
    j_f: HalfInt,
    multipoles: Vec<Multipole>,
    hyperfine: Option<(HalfInt, HalfInt, HalfInt)>,
) -> Result<Scenario> {
    let mut transition = TransitionSpec::new(j_i, j_f, multipoles)?;
    if let Some((nuclear_spin, f_i, f_f)) = hyperfine {
        transition = transition.with_hyperfine(nuclear_spin, f_i, f_f)?;
    }
    let lo = transition.initial_momentum();
    let hi = transition.final_momentum();
    // default channel: smallest non-negative m_i, delta_m = +1 when allowed
    let m_i = if lo.is_integer() {
        HalfInt::ZERO
    } else {
        HalfInt::half(1)
    };
    let m_i = if m_i.abs() > lo { lo } else { m_i };
    let candidate = m_i + HalfInt::from_int(1);
    let m_f = if candidate.abs() > hi { hi } else { candidate };
    Ok(Scenario {
        id: name.to_string(),
        description: format!("user-defined transition {j_i} -> {j_f}"),
        transition,
        default_m_i: m_i,
        default_m_f: m_f,
    })
}

/// Builds a scenario with an optional hyperfine level override.
pub fn scenario_with_levels(id: &str, f_levels: Option<(HalfInt, HalfInt)>) -> Result<Scenario> {
    match (id, f_levels) {
        ("yb171_e3", Some((f_i, f_f))) => yb171_scenario(f_i, f_f),
        (_, Some(_)) => Err(Error::Unsupported(format!(
            "scenario `{id}` has no selectable hyperfine levels"
        ))),
        (_, None) => find_scenario(id),
    }
}

/// Free parameters of the beam-parameter fit.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum FitParam {
    Pitch,
    PhiB,
    Waist,
    Scale,
}

impl FitParam {
    pub fn name(self) -> &'static str {
        match self {
            FitParam::Pitch => "pitch",
            FitParam::PhiB => "phi_b",
            FitParam::Waist => "waist",
            FitParam::Scale => "scale",
        }
    }
}

impl FromStr for FitParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "pitch" | "theta_k" => Ok(FitParam::Pitch),
            "phi_b" => Ok(FitParam::PhiB),
            "waist" | "w0" => Ok(FitParam::Waist),
            "scale" => Ok(FitParam::Scale),
            other => Err(Error::Unsupported(format!(
                "fit parameter `{other}` (use pitch, phi-b, waist, scale)"
            ))),
        }
    }
}

/// One measured point: optional polarization angle, signed impact
/// parameter, strength.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct FitPoint {
    pub alpha: Option<f64>,
    pub b_signed: f64,
    pub strength: f64,
}

/// A least-squares fit task.
#[derive(Clone, Debug)]
pub struct FitRequest {
    pub scenario: Scenario,
    pub m_i: HalfInt,
    pub m_f: HalfInt,
    pub beam_family: BeamFamily,
    pub oam: i32,
    pub theta_z: f64,
    pub phi_z: f64,
    /// Polarization used when the data has no alpha column.
    pub pol: Polarization,
    /// Retardation paired with per-row alpha values.
    pub sweep_delta: f64,
    pub data: Vec<FitPoint>,
    pub free: Vec<FitParam>,
    pub init_pitch: f64,
    pub init_phi_b: f64,
    pub init_waist: f64,
    pub init_scale: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl FitRequest {
    pub fn validate(&self) -> Result<()> {
        if self.free.is_empty() {
            return Err(Error::Unsupported(
                "fit needs at least one free parameter".into(),
            ));
        }
        if self.data.len() < self.free.len() {
            return Err(Error::Unsupported(format!(
                "{} data points cannot constrain {} parameters",
                self.data.len(),
                self.free.len()
            )));
        }
        Ok(())
    }
}

/// Defaults shared by the CLI and the config file.
pub mod defaults {
    pub use twistion::scenarios::{DEFAULT_PITCH, DEFAULT_WAIST};
    pub const B_MIN: f64 = 0.0;
    pub const B_MAX: f64 = 15.0;
    pub const B_STEPS: usize = 301;
    pub const ANGLE_STEPS: usize = 61;
    pub const FIT_TOLERANCE: f64 = 1e-12;
    pub const FIT_MAX_ITERATIONS: usize = 200;
}

/// Parses the CSV produced by `emit_csv` (or hand-made data) into fit
/// points: two columns are (b, strength), three are (alpha, b, strength).
pub fn parse_fit_data(text: &str) -> Result<Vec<FitPoint>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let nums: Option<Vec<f64>> = fields.iter().map(|f| f.parse().ok()).collect();
        let Some(nums) = nums else {
            if lineno == 0 {
                continue; // header row
            }
            return Err(Error::Unsupported(format!(
                "unparseable data line {}",
                lineno + 1
            )));
        };
        match nums.len() {
            2 => out.push(FitPoint {
                alpha: None,
                b_signed: nums[0],
                strength: nums[1],
            }),
            3 => out.push(FitPoint {
                alpha: Some(nums[0]),
                b_signed: nums[1],
                strength: nums[2],
            }),
            n => {
                return Err(Error::Unsupported(format!(
                    "data line {} has {n} columns, expected 2 or 3",
                    lineno + 1
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Unsupported("no data rows found".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polarization_parsing() {
        let mut warn = Vec::new();
        let PolRequest::Named(pols, labels) = parse_polarization("H,V,L", &mut warn).unwrap()
        else {
            panic!("expected named list")
        };
        assert_eq!(pols.len(), 3);
        assert_eq!(labels, ["H", "V", "L"]);
        assert_eq!(pols[0], Polarization::horizontal());
        assert!(matches!(
            parse_polarization("sweep", &mut warn).unwrap(),
            PolRequest::Sweep
        ));
        let PolRequest::Named(pols, _) = parse_polarization("1.2:0.4", &mut warn).unwrap() else {
            panic!()
        };
        assert_eq!(pols[0], Polarization::general(1.2, 0.4));
        assert!(warn.is_empty());
        parse_polarization("4.0:0.0", &mut warn).unwrap();
        assert_eq!(warn.len(), 1);
        assert!(parse_polarization("Q", &mut warn).is_err());
    }

    #[test]
    fn channel_parsing_and_resolution() {
        let scenario = find_scenario("ar13_m1").unwrap();
        let one = parse_channel("1/2", "3/2").unwrap();
        assert_eq!(one.resolve(&scenario).len(), 1);
        let all = parse_channel("all", "3/2").unwrap();
        assert_eq!(all.resolve(&scenario).len(), 8);
    }

    #[test]
    fn fit_data_parsing() {
        let rows = parse_fit_data("b_lambda,strength_H\n1.0,0.5\n2.0,0.25\n").unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(
            rows[0],
            FitPoint {
                alpha: None,
                b_signed: 1.0,
                strength: 0.5
            }
        );
        let rows = parse_fit_data("0.1,1.0,0.5\n").unwrap();
        assert_eq!(rows[0].alpha, Some(0.1));
        assert!(parse_fit_data("").is_err());
        assert!(parse_fit_data("h\n1.0\n").is_err());
    }

    #[test]
    fn multipole_list_parsing() {
        let mps = parse_multipoles("E2:1.0,M1:1.1").unwrap();
        assert_eq!(mps.len(), 2);
        assert_eq!(mps[0].kind, twistion::MultipoleKind::Electric);
        assert_eq!(mps[1].reduced_amplitude, 1.1);
        let mps = parse_multipoles("M3").unwrap();
        assert_eq!(mps[0].order, HalfInt::from_int(3));
        assert_eq!(mps[0].reduced_amplitude, 1.0);
        assert!(parse_multipoles("Q2").is_err());
        assert!(parse_multipoles("E2:abc").is_err());
        assert!(parse_multipoles("").is_err());
    }

    #[test]
    fn custom_scenario_defaults() {
        let s = custom_scenario(
            "myion",
            HalfInt::half(1),
            HalfInt::half(5),
            parse_multipoles("E2").unwrap(),
            None,
        )
        .unwrap();
        assert_eq!(s.id, "myion");
        assert_eq!(s.default_m_i, HalfInt::half(1));
        assert_eq!(s.default_m_f, HalfInt::half(3));
        // triangle violations surface at construction
        assert!(custom_scenario(
            "bad",
            HalfInt::half(1),
            HalfInt::half(5),
            parse_multipoles("M1").unwrap(),
            None
        )
        .is_err());
    }

    #[test]
    fn hyperfine_level_override() {
        let s = scenario_with_levels(
            "yb171_e3",
            Some((HalfInt::from_int(1), HalfInt::from_int(4))),
        )
        .unwrap();
        let hf = s.transition.hyperfine.unwrap();
        assert_eq!(hf.f_i, HalfInt::from_int(1));
        assert_eq!(hf.f_f, HalfInt::from_int(4));
        assert!(scenario_with_levels("ca40_e2", Some((HalfInt::ZERO, HalfInt::ZERO))).is_err());
        assert!(scenario_with_levels("ca40_e2", None).is_ok());
    }
}
