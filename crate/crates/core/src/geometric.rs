//! Geometric (Berry) phase picture of the splitting: a ray spiralling on a
//! helix of radius `a` at angle `theta` to the axis.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SoiError};
use crate::modes::{max_guided_m, solve_mode, GuidedMode};
use crate::soi::delta_beta_step;
use crate::types::{ParticleKind, QuantumNumbers, WaveguideSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelixGeometry {
    pub a: f64,
    pub theta: f64,
    pub mu_h: i32,
}

impl HelixGeometry {
    pub fn new(a: f64, theta: f64, mu_h: i32) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(SoiError::InvalidGeometry(format!("helix radius must be positive, got {a}")));
        }
        if !(theta > 0.0 && theta < PI / 2.0) {
            return Err(SoiError::InvalidGeometry(format!("theta must lie in (0, pi/2), got {theta}")));
        }
        if mu_h.abs() != 1 {
            return Err(SoiError::InvalidGeometry(format!("handedness must be +-1, got {mu_h}")));
        }
        Ok(Self { a, theta, mu_h })
    }

    pub fn pitch(&self) -> f64 {
        2.0 * PI * self.a / self.theta.tan()
    }

    /// Solid angle swept by the direction of propagation over one turn.
    pub fn solid_angle(&self) -> f64 {
        4.0 * PI * (0.5 * self.theta).sin().powi(2)
    }
}

/// `-lambda mu_h s Omega / h_z`.
pub fn berry_phase_per_z(geom: &HelixGeometry, lambda: i32, s: f64) -> f64 {
    -f64::from(lambda * geom.mu_h) * s * geom.solid_angle() / geom.pitch()
}

/// Critical-angle estimate `theta = sqrt(delta)`.
pub fn theta_sqrt_delta(spec: &WaveguideSpec) -> f64 {
    spec.delta.sqrt()
}

/// Ray angle matched to the mode, `|m| / (beta0 a)`.
pub fn theta_mode_matched(spec: &WaveguideSpec, mode: &GuidedMode) -> f64 {
    f64::from(mode.m_abs) / (mode.beta0 * spec.a)
}

/// `-sigma mu s (delta / 2a) theta`, zero for `m_ell = 0`.
pub fn delta_beta_geo(spec: &WaveguideSpec, qn: QuantumNumbers, theta: f64) -> f64 {
    -f64::from(qn.sigma_mu()) * spec.particle.spin() * spec.delta / (2.0 * spec.a) * theta
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaConvention {
    SqrtDelta,
    ModeMatched,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub v: f64,
    pub m_ell_max: u32,
    pub theta: f64,
    pub bracket_factor: f64,
    pub delta_beta_step: f64,
    pub delta_beta_geo: f64,
    pub ratio: f64,
    pub particle: ParticleKind,
}

/// One row per particle kind at the largest guided `|m|` (radial index 1).
pub fn compare_at(v: f64, delta: f64, theta: ThetaConvention) -> Result<[ComparisonRow; 2]> {
    let photon = WaveguideSpec::step(ParticleKind::Photon, v, delta).validated()?;
    let m = max_guided_m(&photon)?;
    if m == 0 {
        return Err(SoiError::NoGuidedMode { m_abs: 1, p: 1 });
    }
    let mode = solve_mode(&photon, m, 1)?;
    let qn = QuantumNumbers::new(1, m as i32)?;
    let corr = delta_beta_step(&photon, &mode, qn)?;
    let th = match theta {
        ThetaConvention::SqrtDelta => theta_sqrt_delta(&photon),
        ThetaConvention::ModeMatched => theta_mode_matched(&photon, &mode),
    };
    let row = |particle| {
        let spec = WaveguideSpec { particle, ..photon.clone() };
        let step = corr.signed(qn);
        let geo = delta_beta_geo(&spec, qn, th);
        ComparisonRow {
            v,
            m_ell_max: m,
            theta: th,
            bracket_factor: corr.bracket_factor.unwrap_or(f64::NAN),
            delta_beta_step: step,
            delta_beta_geo: geo,
            ratio: step / geo,
            particle,
        }
    };
    Ok([row(ParticleKind::Photon), row(ParticleKind::Electron)])
}

pub fn compare_geo_vs_perturbative(vs: &[f64], delta: f64, theta: ThetaConvention) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::with_capacity(2 * vs.len());
    for &v in vs {
        rows.extend(compare_at(v, delta, theta)?);
    }
    Ok(rows)
}
