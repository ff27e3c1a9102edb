//! Shared domain types: particle kinds, quantum numbers, radial profiles and
//! the waveguide description.
//!
//! Units are dimensionless throughout: lengths are in units of the guide
//! radius `a` and wavenumbers in units of `1/a`, so `a = 1` is the usual
//! choice. `a` is still carried explicitly so that rescaling checks can be
//! expressed.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SoiError};
use crate::interp::CubicHermite;

/// Step heights above this are flagged as outside the weak-guidance regime.
pub const WEAK_GUIDANCE_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParticleKind {
    Electron,
    Photon,
}

impl ParticleKind {
    /// Twice the spin, kept integral so that `s` stays exact.
    pub fn twice_spin(self) -> u32 {
        match self {
            ParticleKind::Electron => 1,
            ParticleKind::Photon => 2,
        }
    }

    pub fn spin(self) -> f64 {
        f64::from(self.twice_spin()) / 2.0
    }
}

impl fmt::Display for ParticleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParticleKind::Electron => f.write_str("electron"),
            ParticleKind::Photon => f.write_str("photon"),
        }
    }
}

impl std::str::FromStr for ParticleKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "electron" => Ok(ParticleKind::Electron),
            "photon" => Ok(ParticleKind::Photon),
            other => Err(format!("unknown particle kind '{other}'")),
        }
    }
}

/// SAM quantum number `sigma` and OAM quantum number `m_ell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuantumNumbers {
    sigma: i32,
    m_ell: i32,
}

impl QuantumNumbers {
    pub fn new(sigma: i32, m_ell: i32) -> Result<Self> {
        if sigma != 1 && sigma != -1 {
            return Err(SoiError::InvalidQuantumNumbers(format!(
                "sigma must be +1 or -1, got {sigma}"
            )));
        }
        Ok(Self { sigma, m_ell })
    }

    pub fn sigma(&self) -> i32 {
        self.sigma
    }

    pub fn m_ell(&self) -> i32 {
        self.m_ell
    }

    pub fn m_abs(&self) -> u32 {
        self.m_ell.unsigned_abs()
    }

    /// Sign of the OAM, `m_ell / |m_ell|`.
    pub fn mu(&self) -> Result<i32> {
        match self.m_ell.signum() {
            0 => Err(SoiError::MuUndefined),
            s => Ok(s),
        }
    }

    /// `sigma * mu`, or 0 when `m_ell = 0`.
    pub fn sigma_mu(&self) -> i32 {
        self.sigma * self.m_ell.signum()
    }
}

/// Tabulated `chi(rho)` samples; radii are in units of `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedProfile {
    pub rho_over_a: Vec<f64>,
    pub chi: Vec<f64>,
}

impl TabulatedProfile {
    pub fn new(rho_over_a: Vec<f64>, chi: Vec<f64>) -> Result<Self> {
        if rho_over_a.len() < 2 || rho_over_a.len() != chi.len() {
            return Err(SoiError::InvalidSpec(ValidationReport::violation(
                "tabulated profile needs at least two (rho, chi) samples of equal length",
            )));
        }
        if rho_over_a.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SoiError::InvalidSpec(ValidationReport::violation(
                "tabulated radii must be strictly increasing",
            )));
        }
        Ok(Self { rho_over_a, chi })
    }

    fn interpolant(&self) -> CubicHermite {
        CubicHermite::monotone(self.rho_over_a.clone(), self.chi.clone())
    }
}

/// Normalized radial shape `chi(rho)` of the index / potential step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialProfile {
    /// Unit step at `rho = a`.
    Step,
    /// Renormalized tanh step of width `width * a`.
    SmoothedStep { width: f64 },
    Tabulated(TabulatedProfile),
}

impl RadialProfile {
    pub fn is_step(&self) -> bool {
        matches!(self, RadialProfile::Step)
    }

    /// Evaluator bound to a guide radius.
    pub fn evaluator(&self, a: f64) -> ProfileEval {
        match self {
            RadialProfile::Step => ProfileEval::Step { a },
            RadialProfile::SmoothedStep { width } => {
                let w = width * a;
                let t0 = 0.5 * (1.0 + (-a / w).tanh());
                ProfileEval::Smoothed { a, w, t0 }
            }
            RadialProfile::Tabulated(t) => ProfileEval::Tabulated {
                a,
                interp: t.interpolant(),
            },
        }
    }
}

/// `chi` and `d chi / d rho` for a profile at a fixed radius `a`.
#[derive(Debug, Clone)]
pub enum ProfileEval {
    Step { a: f64 },
    Smoothed { a: f64, w: f64, t0: f64 },
    Tabulated { a: f64, interp: CubicHermite },
}

impl ProfileEval {
    pub fn chi(&self, rho: f64) -> f64 {
        match self {
            ProfileEval::Step { a } => {
                if rho >= *a {
                    1.0
                } else {
                    0.0
                }
            }
            ProfileEval::Smoothed { a, w, t0 } => {
                // 1 - chi written via exp to avoid cancellation far outside the core
                let x = (rho - a) / w;
                let one_minus_t = if x > 0.0 {
                    let e = (-2.0 * x).exp();
                    e / (1.0 + e)
                } else {
                    1.0 / (1.0 + (2.0 * x).exp())
                };
                1.0 - one_minus_t / (1.0 - t0)
            }
            ProfileEval::Tabulated { a, interp } => interp.eval(rho / a),
        }
    }

    /// Derivative of `chi`; zero almost everywhere for the step (its
    /// distributional part is handled by the closed-form SOI route).
    pub fn dchi(&self, rho: f64) -> f64 {
        match self {
            ProfileEval::Step { .. } => 0.0,
            ProfileEval::Smoothed { a, w, t0 } => {
                let x = (rho - a) / w;
                let sech = 1.0 / x.cosh();
                0.5 * sech * sech / (w * (1.0 - t0))
            }
            ProfileEval::Tabulated { a, interp } => interp.eval_with_derivative(rho / a).1 / a,
        }
    }

    /// Radius around which `chi` changes, and the scale of that change.
    pub fn transition(&self) -> (f64, f64) {
        match self {
            ProfileEval::Step { a } => (*a, 0.0),
            ProfileEval::Smoothed { a, w, .. } => (*a, *w),
            ProfileEval::Tabulated { a, interp } => {
                let (lo, hi) = interp.domain();
                (0.5 * (lo + hi) * a, 0.5 * (hi - lo) * a)
            }
        }
    }
}

/// A straight, cylindrically symmetric guide with
/// `k^2(rho) = k_core^2 (1 - delta * chi(rho))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveguideSpec {
    pub particle: ParticleKind,
    pub a: f64,
    pub delta: f64,
    pub profile: RadialProfile,
    pub k_core: f64,
}

impl WaveguideSpec {
    /// Unit-radius guide with the given V-number `k_core * a * sqrt(delta)`.
    pub fn with_v_number(particle: ParticleKind, v: f64, delta: f64, profile: RadialProfile) -> Self {
        Self {
            particle,
            a: 1.0,
            delta,
            profile,
            k_core: v / delta.sqrt(),
        }
    }

    pub fn step(particle: ParticleKind, v: f64, delta: f64) -> Self {
        Self::with_v_number(particle, v, delta, RadialProfile::Step)
    }

    pub fn v_number(&self) -> f64 {
        self.k_core * self.a * self.delta.sqrt()
    }

    pub fn k_clad_sq(&self) -> f64 {
        self.k_core * self.k_core * (1.0 - self.delta)
    }

    pub fn profile_eval(&self) -> ProfileEval {
        self.profile.evaluator(self.a)
    }

    /// Same guide with every length multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Self {
        Self {
            a: self.a * factor,
            k_core: self.k_core / factor,
            ..self.clone()
        }
    }

    pub fn validated(self) -> Result<Self> {
        let report = validate_spec(&self);
        if report.is_valid() {
            Ok(self)
        } else {
            Err(SoiError::InvalidSpec(report))
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    fn violation(msg: &str) -> Self {
        Self {
            violations: vec![msg.to_string()],
            warnings: Vec::new(),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            f.write_str("valid")?;
        } else {
            write!(f, "violations: [{}]", self.violations.join("; "))?;
        }
        if !self.warnings.is_empty() {
            write!(f, ", warnings: [{}]", self.warnings.join("; "))?;
        }
        Ok(())
    }
}

const MONOTONICITY_SAMPLES: usize = 1000;

pub fn validate_spec(spec: &WaveguideSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    if !(spec.a.is_finite() && spec.a > 0.0) {
        report.violations.push(format!("radius a must be positive, got {}", spec.a));
    }
    if !(spec.delta.is_finite() && spec.delta > 0.0 && spec.delta < 1.0) {
        report
            .violations
            .push(format!("delta must lie in (0, 1), got {}", spec.delta));
    } else if spec.delta > WEAK_GUIDANCE_LIMIT {
        report.warnings.push(format!(
            "outside Δ ≪ 1 regime: delta = {} exceeds {WEAK_GUIDANCE_LIMIT}",
            spec.delta
        ));
    }
    if !(spec.k_core.is_finite() && spec.k_core * spec.a > 0.0) {
        report
            .violations
            .push(format!("k_core * a must be positive, got {}", spec.k_core * spec.a));
    }
    if !report.violations.is_empty() {
        return report;
    }

    match &spec.profile {
        RadialProfile::Step => {}
        RadialProfile::SmoothedStep { width } => {
            if !(width.is_finite() && *width > 0.0) {
                report
                    .violations
                    .push(format!("smoothing width must be positive, got {width}"));
            }
        }
        RadialProfile::Tabulated(t) => {
            if t.rho_over_a.len() < 2
                || t.rho_over_a.len() != t.chi.len()
                || t.rho_over_a.windows(2).any(|w| w[1] <= w[0])
            {
                report
                    .violations
                    .push("tabulated profile needs strictly increasing radii".into());
                return report;
            }
            if t.rho_over_a[0] > 0.0 {
                report.violations.push("tabulated profile must start at rho = 0".into());
            }
            if t.chi[0].abs() > 1e-12 {
                report.violations.push(format!("χ(0) ≠ 0 (χ(0) = {})", t.chi[0]));
            }
            let last = t.chi[t.chi.len() - 1];
            if (last - 1.0).abs() > 1e-12 {
                report
                    .violations
                    .push(format!("χ must reach 1 outside the core (last sample {last})"));
            }
            if t.chi.windows(2).any(|w| w[1] < w[0]) {
                report.violations.push("χ samples are not non-decreasing".into());
            }
        }
    }
    if report.violations.is_empty() {
        let eval = spec.profile_eval();
        let r_max = 3.0 * spec.a;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..MONOTONICITY_SAMPLES {
            let rho = r_max * i as f64 / (MONOTONICITY_SAMPLES - 1) as f64;
            let chi = eval.chi(rho);
            if chi < prev - 1e-14 {
                report
                    .violations
                    .push(format!("χ decreases near rho = {rho:.6}"));
                break;
            }
            prev = chi;
        }
    }
    report
}
