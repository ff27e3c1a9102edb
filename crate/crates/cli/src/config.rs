use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use soi_core::geometric::ThetaConvention;
use soi_core::types::{ParticleKind, RadialProfile, TabulatedProfile, WaveguideSpec};

use crate::CliError;

/// Keys accepted in a `--config` TOML document. Every key is optional;
/// command-line flags override whatever the file sets.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub particle: Option<String>,
    #[serde(alias = "V")]
    pub v: Option<f64>,
    #[serde(alias = "V_values")]
    pub v_values: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub profile: Option<String>,
    pub tabulated: Option<TabulatedProfile>,
    pub m: Option<MValue>,
    pub sigma: Option<i32>,
    pub p: Option<u32>,
    pub z_max: Option<f64>,
    pub steps: Option<usize>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
    pub superposition: Option<String>,
    pub variant: Option<String>,
    pub theta: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MValue {
    Int(i32),
    Text(String),
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Superposition {
    /// Both spins at one OAM value.
    A,
    /// Both OAM signs at one spin.
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Spatial,
    Temporal,
}

/// Fully resolved run parameters; also recorded in the metadata sidecar.
#[derive(Debug, Clone, Serialize)]
pub struct Scenario {
    pub particle: ParticleKind,
    pub v: f64,
    pub v_values: Option<Vec<f64>>,
    pub delta: f64,
    pub profile: RadialProfile,
    pub m: Option<Vec<i32>>,
    pub sigma: Option<i32>,
    pub p: u32,
    pub z_max: Option<f64>,
    pub steps: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub superposition: Superposition,
    pub variant: Variant,
    pub theta: ThetaConvention,
}

impl Scenario {
    pub fn spec_at(&self, v: f64) -> Result<WaveguideSpec, CliError> {
        let spec = WaveguideSpec::with_v_number(self.particle, v, self.delta, self.profile.clone());
        Ok(spec.validated()?)
    }

    pub fn spec(&self) -> Result<WaveguideSpec, CliError> {
        self.spec_at(self.v)
    }

    pub fn v_list(&self) -> Vec<f64> {
        self.v_values.clone().unwrap_or_else(|| vec![self.v])
    }

    pub fn m_list(&self, default: &[i32]) -> Vec<i32> {
        self.m.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn sigma_list(&self) -> Vec<i32> {
        self.sigma.map_or_else(|| vec![1, -1], |s| vec![s])
    }
}

/// `INT`, inclusive range `A..B`, or comma list `A,B,...`.
pub fn parse_m(text: &str) -> Result<Vec<i32>, CliError> {
    let bad = || CliError::Config(format!("cannot parse m = {text:?}; expected INT, A..B or A,B,..."));
    let text = text.trim();
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: i32 = lo.trim().parse().map_err(|_| bad())?;
        let hi: i32 = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if hi < lo {
            return Err(CliError::Config(format!("empty m range {text}")));
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

pub fn parse_profile(text: &str, tabulated: Option<&TabulatedProfile>) -> Result<RadialProfile, CliError> {
    let text = text.trim();
    match text {
        "step" => Ok(RadialProfile::Step),
        "tabulated" => tabulated
            .cloned()
            .map(RadialProfile::Tabulated)
            .ok_or_else(|| CliError::Config("profile = \"tabulated\" needs a [tabulated] table".into())),
        _ => {
            let width = text
                .strip_prefix("smooth:")
                .and_then(|w| w.parse::<f64>().ok())
                .ok_or_else(|| CliError::Config(format!("unknown profile {text:?}; expected step, smooth:W or tabulated")))?;
            Ok(RadialProfile::SmoothedStep { width })
        }
    }
}

fn parse_choice<T: Copy>(what: &str, text: &str, options: &[(&str, T)]) -> Result<T, CliError> {
    options
        .iter()
        .find(|(name, _)| name.eq_ignore_ascii_case(text.trim()))
        .map(|(_, v)| *v)
        .ok_or_else(|| {
            let names: Vec<_> = options.iter().map(|(n, _)| *n).collect();
            CliError::Config(format!("unknown {what} {text:?}; expected one of {}", names.join(", ")))
        })
}

/// Flag values that override the file; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub particle: Option<String>,
    pub v: Option<f64>,
    pub v_values: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub profile: Option<String>,
    pub m: Option<String>,
    pub sigma: Option<i32>,
    pub p: Option<u32>,
    pub z_max: Option<f64>,
    pub steps: Option<usize>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
    pub superposition: Option<String>,
    pub variant: Option<String>,
    pub theta: Option<String>,
}

pub fn resolve(file: FileConfig, flags: Overrides) -> Result<Scenario, CliError> {
    let particle = match flags.particle.or(file.particle) {
        Some(p) => p.parse::<ParticleKind>().map_err(|e| CliError::Config(e.to_string()))?,
        None => ParticleKind::Photon,
    };
    let profile = match flags.profile.or(file.profile) {
        Some(p) => parse_profile(&p, file.tabulated.as_ref())?,
        None => RadialProfile::Step,
    };
    let m = match (flags.m, file.m) {
        (Some(text), _) | (None, Some(MValue::Text(text))) => Some(parse_m(&text)?),
        (None, Some(MValue::Int(v))) => Some(vec![v]),
        (None, None) => None,
    };
    let sigma = flags.sigma.or(file.sigma);
    if let Some(s) = sigma {
        if s.abs() != 1 {
            return Err(CliError::Config(format!("sigma must be +1 or -1, got {s}")));
        }
    }
    let format = parse_choice(
        "format",
        flags.format.or(file.format).as_deref().unwrap_or("csv"),
        &[("csv", Format::Csv), ("json", Format::Json)],
    )?;
    let superposition = parse_choice(
        "superposition",
        flags.superposition.or(file.superposition).as_deref().unwrap_or("a"),
        &[("a", Superposition::A), ("b", Superposition::B)],
    )?;
    let variant = parse_choice(
        "variant",
        flags.variant.or(file.variant).as_deref().unwrap_or("spatial"),
        &[("spatial", Variant::Spatial), ("temporal", Variant::Temporal)],
    )?;
    let theta = parse_choice(
        "theta convention",
        flags.theta.or(file.theta).as_deref().unwrap_or("mode-matched"),
        &[
            ("mode-matched", ThetaConvention::ModeMatched),
            ("mode_matched", ThetaConvention::ModeMatched),
            ("sqrt-delta", ThetaConvention::SqrtDelta),
            ("sqrt_delta", ThetaConvention::SqrtDelta),
        ],
    )?;
    let v_values = flags.v_values.or(file.v_values);
    if v_values.as_ref().is_some_and(Vec::is_empty) {
        return Err(CliError::Config("V sweep is empty".into()));
    }
    let steps = flags.steps.or(file.steps).unwrap_or(101);
    if steps < 2 {
        return Err(CliError::Config(format!("steps must be at least 2, got {steps}")));
    }
    let z_max = flags.z_max.or(file.z_max);
    if z_max.is_some_and(|z| !(z.is_finite() && z > 0.0)) {
        return Err(CliError::Config("z-max must be positive".into()));
    }
    let out = flags.out.or(file.out);
    if let Some(dir) = out.as_deref().and_then(Path::parent).filter(|d| !d.as_os_str().is_empty()) {
        if !dir.is_dir() {
            return Err(CliError::Config(format!("output directory {} does not exist", dir.display())));
        }
    }
    Ok(Scenario {
        particle,
        v: flags.v.or(file.v).unwrap_or(5.0),
        v_values,
        delta: flags.delta.or(file.delta).unwrap_or(0.01),
        profile,
        m,
        sigma,
        p: flags.p.or(file.p).unwrap_or(1),
        z_max,
        steps,
        format,
        out,
        superposition,
        variant,
        theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m_syntax() {
        assert_eq!(parse_m("2").unwrap(), vec![2]);
        assert_eq!(parse_m("0..3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_m("-1..1").unwrap(), vec![-1, 0, 1]);
        assert_eq!(parse_m("1,-1").unwrap(), vec![1, -1]);
        assert!(parse_m("3..1").is_err());
        assert!(parse_m("x").is_err());
    }

    #[test]
    fn profile_syntax() {
        assert_eq!(parse_profile("step", None).unwrap(), RadialProfile::Step);
        assert_eq!(parse_profile("smooth:0.01", None).unwrap(), RadialProfile::SmoothedStep { width: 0.01 });
        assert!(parse_profile("smooth:", None).is_err());
        assert!(parse_profile("tabulated", None).is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let file: FileConfig = toml::from_str("V = 3.0\ndelta = 0.02\nm = \"0..2\"\n").unwrap();
        let s = resolve(
            file,
            Overrides {
                v: Some(7.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(s.v, 7.0);
        assert_eq!(s.delta, 0.02);
        assert_eq!(s.m, Some(vec![0, 1, 2]));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("colour = 1").is_err());
    }
}
