//! First-order spin-orbit correction to the propagation constant.
//!
//! With the spin-orbit term `-(delta/2)(1/rho)(d chi/d rho) sigma_z L_z`,
//! first-order perturbation theory for `beta^2` gives
//!
//! ```text
//! delta_beta = -sigma m_ell (pi delta / 2 beta0) N^2 int (d chi/d rho) psi^2 drho
//! ```
//!
//! The `1/rho` of the operator cancels the `rho` of the area element, so the
//! remaining integral has plain `drho` measure and `N psi` is normalized
//! over the plane. For a step the integral collapses to `psi(a)^2 = J_m(u)^2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j;
use crate::error::{Result, SoiError};
use crate::modes::{group_velocity, GuidedMode, RadialShape};
use crate::quadrature::{integrate, QuadOptions};
use crate::types::{ProfileEval, QuantumNumbers, RadialProfile, WaveguideSpec};

pub const QUADRATURE_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SoiMethod {
    QuadratureGeneral,
    StepClosedForm,
}

impl SoiMethod {
    pub fn label(self) -> &'static str {
        match self {
            SoiMethod::QuadratureGeneral => "quadrature",
            SoiMethod::StepClosedForm => "step_closed_form",
        }
    }
}

/// Magnitude of the splitting for one `(|m|, p)` mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoiCorrection {
    pub m_abs: u32,
    pub delta_beta_abs: f64,
    pub method: SoiMethod,
    /// `pi a^2 N^2 J_m(kappa a)^2`, closed form only.
    pub bracket_factor: Option<f64>,
}

impl SoiCorrection {
    /// `-sigma mu |delta_beta|`; zero when `m_ell = 0`.
    pub fn signed_delta_beta(&self, sigma: i32, m_ell: i32) -> f64 {
        -f64::from(sigma * m_ell.signum()) * self.delta_beta_abs
    }

    pub fn signed(&self, qn: QuantumNumbers) -> f64 {
        self.signed_delta_beta(qn.sigma(), qn.m_ell())
    }
}

fn check_mode(mode: &GuidedMode, qn: QuantumNumbers) -> Result<()> {
    if mode.m_abs != qn.m_abs() {
        return Err(SoiError::InvalidQuantumNumbers(format!(
            "mode has |m| = {} but quantum numbers carry m_ell = {}",
            mode.m_abs,
            qn.m_ell()
        )));
    }
    Ok(())
}

/// `pi a^2 N^2 J_m(kappa a)^2` for a step-profile mode.
pub fn bracket_factor(spec: &WaveguideSpec, mode: &GuidedMode) -> f64 {
    let j = match mode.shape {
        RadialShape::Bessel { j_at_a, .. } => j_at_a,
        RadialShape::Sampled(_) => bessel_j(mode.m_abs, mode.kappa * spec.a),
    };
    PI * spec.a * spec.a * mode.norm_n * mode.norm_n * j * j
}

/// Closed form for the step profile.
pub fn delta_beta_step(spec: &WaveguideSpec, mode: &GuidedMode, qn: QuantumNumbers) -> Result<SoiCorrection> {
    if !spec.profile.is_step() {
        return Err(SoiError::WrongProfile { expected: "step" });
    }
    check_mode(mode, qn)?;
    let bracket = bracket_factor(spec, mode);
    let a = spec.a;
    let m = f64::from(qn.m_abs());
    let delta_beta_abs = spec.delta / (2.0 * a) * m / (mode.beta0 * a) * bracket;
    Ok(SoiCorrection {
        m_abs: qn.m_abs(),
        delta_beta_abs,
        method: SoiMethod::StepClosedForm,
        bracket_factor: Some(bracket),
    })
}

fn breakpoints(eval: &ProfileEval, profile: &RadialProfile, a: f64, end: f64) -> Vec<f64> {
    let mut pts = match (eval, profile) {
        (ProfileEval::Smoothed { a, w, .. }, _) => (-30..=30).map(|j| a + f64::from(j) * w).collect(),
        (_, RadialProfile::Tabulated(t)) => t.rho_over_a.iter().map(|r| r * a).collect(),
        _ => Vec::new(),
    };
    pts.retain(|&r| r > 0.0 && r < end);
    pts
}

/// `N^2 int (d chi/d rho) psi^2 drho` by adaptive Gauss–Kronrod quadrature.
pub fn overlap_integral(spec: &WaveguideSpec, mode: &GuidedMode) -> Result<f64> {
    let eval = spec.profile_eval();
    let end = match &mode.shape {
        RadialShape::Sampled(s) => s.domain().1,
        RadialShape::Bessel { .. } => 6.0 * spec.a,
    };
    let f = |r: f64| {
        let v = mode.psi(r);
        eval.dchi(r) * v * v
    };
    let opts = QuadOptions {
        rel_tol: QUADRATURE_REL_TOL,
        abs_tol: 0.0,
        max_intervals: 20_000,
    };
    let r = integrate(f, 0.0, end, &breakpoints(&eval, &spec.profile, spec.a, end), opts)?;
    Ok(mode.norm_n * mode.norm_n * r.value)
}

/// General-profile correction by quadrature of `d chi/d rho |psi|^2`.
pub fn delta_beta_quadrature(spec: &WaveguideSpec, mode: &GuidedMode, qn: QuantumNumbers) -> Result<SoiCorrection> {
    if spec.profile.is_step() {
        return Err(SoiError::WrongProfile {
            expected: "differentiable (smoothed or tabulated)",
        });
    }
    check_mode(mode, qn)?;
    let delta_beta_abs = if qn.m_abs() == 0 {
        0.0
    } else {
        let m = f64::from(qn.m_abs());
        m * PI * spec.delta / (2.0 * mode.beta0) * overlap_integral(spec, mode)?
    };
    Ok(SoiCorrection {
        m_abs: qn.m_abs(),
        delta_beta_abs,
        method: SoiMethod::QuadratureGeneral,
        bracket_factor: None,
    })
}

/// Whichever route applies to the spec's profile.
pub fn delta_beta(spec: &WaveguideSpec, mode: &GuidedMode, qn: QuantumNumbers) -> Result<SoiCorrection> {
    if spec.profile.is_step() {
        delta_beta_step(spec, mode, qn)
    } else {
        delta_beta_quadrature(spec, mode, qn)
    }
}

/// Exponent `-sigma mu |delta_beta| z` picked up by `Psi_{sigma m}` over a length `z`.
pub fn soi_phase(corr: &SoiCorrection, qn: QuantumNumbers, z: f64) -> Result<f64> {
    if qn.m_ell() == 0 {
        if corr.delta_beta_abs != 0.0 {
            return Err(SoiError::MuUndefined);
        }
        return Ok(0.0);
    }
    Ok(-f64::from(qn.sigma() * qn.mu()?) * corr.delta_beta_abs * z)
}

/// Frequency splitting `|delta_omega| = |delta_beta| v_g` at fixed `beta`.
pub fn delta_omega(spec: &WaveguideSpec, mode: &GuidedMode, corr: &SoiCorrection) -> Result<f64> {
    if corr.delta_beta_abs == 0.0 {
        return Ok(0.0);
    }
    Ok(corr.delta_beta_abs * group_velocity(spec, mode)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::solve_mode;
    use crate::types::ParticleKind;

    fn step_case() -> (WaveguideSpec, GuidedMode) {
        let spec = WaveguideSpec::step(ParticleKind::Photon, 5.0, 0.01);
        let mode = solve_mode(&spec, 2, 1).unwrap();
        (spec, mode)
    }

    #[test]
    fn sign_follows_sigma_mu() {
        let (spec, mode) = step_case();
        let plus = delta_beta_step(&spec, &mode, QuantumNumbers::new(1, 2).unwrap()).unwrap();
        assert!(plus.signed_delta_beta(1, 2) < 0.0);
        assert!(plus.signed_delta_beta(1, -2) > 0.0);
        assert_eq!(plus.signed_delta_beta(1, 2), plus.signed_delta_beta(-1, -2));
        assert_eq!(plus.signed_delta_beta(1, 2), -plus.signed_delta_beta(-1, 2));
    }

    #[test]
    fn zero_oam_gives_zero_shift() {
        let spec = WaveguideSpec::step(ParticleKind::Photon, 5.0, 0.01);
        let mode = solve_mode(&spec, 0, 1).unwrap();
        let c = delta_beta_step(&spec, &mode, QuantumNumbers::new(1, 0).unwrap()).unwrap();
        assert_eq!(c.delta_beta_abs, 0.0);
        assert_eq!(soi_phase(&c, QuantumNumbers::new(1, 0).unwrap(), 3.0).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_rejects_smooth_profile() {
        let spec = WaveguideSpec::with_v_number(ParticleKind::Photon, 5.0, 0.01, RadialProfile::SmoothedStep { width: 0.1 });
        let (_, mode) = step_case();
        assert_eq!(
            delta_beta_step(&spec, &mode, QuantumNumbers::new(1, 2).unwrap()),
            Err(SoiError::WrongProfile { expected: "step" })
        );
    }

    #[test]
    fn mismatched_mode_is_rejected() {
        let (spec, mode) = step_case();
        assert!(matches!(
            delta_beta_step(&spec, &mode, QuantumNumbers::new(1, 1).unwrap()),
            Err(SoiError::InvalidQuantumNumbers(_))
        ));
    }

    #[test]
    fn phase_is_linear_in_z() {
        let c = SoiCorrection {
            m_abs: 2,
            delta_beta_abs: 0.25,
            method: SoiMethod::StepClosedForm,
            bracket_factor: Some(1.0),
        };
        let qn = QuantumNumbers::new(1, 2).unwrap();
        assert_eq!(soi_phase(&c, qn, 0.0).unwrap(), 0.0);
        let z = PI / 8.0 / 0.25;
        assert!((soi_phase(&c, qn, z).unwrap() + PI / 8.0).abs() < 1e-15);
        assert_eq!(soi_phase(&c, qn, 2.0 * z).unwrap(), 2.0 * soi_phase(&c, qn, z).unwrap());
    }

    #[test]
    fn phase_with_zero_oam_and_nonzero_shift_is_an_error() {
        let c = SoiCorrection {
            m_abs: 0,
            delta_beta_abs: 0.1,
            method: SoiMethod::StepClosedForm,
            bracket_factor: None,
        };
        assert_eq!(soi_phase(&c, QuantumNumbers::new(1, 0).unwrap(), 1.0), Err(SoiError::MuUndefined));
    }
}
