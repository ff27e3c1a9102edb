//! Balanced spin-orbit superpositions and their SOI-driven rotation.
//!
//! States live in the four-dimensional space spanned by `(sigma, m)` with
//! fixed `|m|`, ordered `[(+,+|m|), (+,-|m|), (-,+|m|), (-,-|m|)]`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SoiError};
use crate::soi::SoiCorrection;
use crate::types::{ParticleKind, QuantumNumbers};

pub const AZIMUTH_POINTS: usize = 1024;
const PATTERN_FLOOR: f64 = 1e-12;

/// `(sigma, sign of m)` for each basis slot.
pub const BASIS: [(i32, i32); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

pub fn slot(sigma: i32, m_sign: i32) -> usize {
    usize::from(sigma < 0) * 2 + usize::from(m_sign < 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinOrbitState {
    pub amplitudes: [Complex64; 4],
    pub m_abs: u32,
}

impl SpinOrbitState {
    pub fn new(amplitudes: [Complex64; 4], m_abs: u32) -> Result<Self> {
        if m_abs == 0 {
            return Err(SoiError::InvalidQuantumNumbers("spin-orbit states need |m| >= 1".into()));
        }
        Ok(Self { amplitudes, m_abs })
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// 2x2 SAM density matrix with the OAM traced out, indexed `[+, -]`.
    pub fn sam_density(&self) -> [[Complex64; 2]; 2] {
        let a = &self.amplitudes;
        let mut rho = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in rho.iter_mut().enumerate() {
            for (j, r) in row.iter_mut().enumerate() {
                *r = a[2 * i] * a[2 * j].conj() + a[2 * i + 1] * a[2 * j + 1].conj();
            }
        }
        rho
    }
}

fn balanced(m_abs: u32, slots: [usize; 2]) -> SpinOrbitState {
    let mut amplitudes = [Complex64::new(0.0, 0.0); 4];
    for s in slots {
        amplitudes[s] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    }
    SpinOrbitState { amplitudes, m_abs }
}

fn nonzero_oam(sigma: i32, m_ell: i32) -> Result<QuantumNumbers> {
    let qn = QuantumNumbers::new(sigma, m_ell)?;
    if m_ell == 0 {
        return Err(SoiError::InvalidQuantumNumbers("balanced superpositions need m_ell != 0".into()));
    }
    Ok(qn)
}

/// `(Psi_{sigma m} + Psi_{-sigma m}) / sqrt 2`: both spins, one OAM value.
pub fn make_superposition_a(sigma: i32, m_ell: i32) -> Result<SpinOrbitState> {
    let qn = nonzero_oam(sigma, m_ell)?;
    let mu = m_ell.signum();
    Ok(balanced(qn.m_abs(), [slot(1, mu), slot(-1, mu)]))
}

/// `(Psi_{sigma m} + Psi_{sigma (-m)}) / sqrt 2`: one spin, both OAM signs.
pub fn make_superposition_b(sigma: i32, m_ell: i32) -> Result<SpinOrbitState> {
    let qn = nonzero_oam(sigma, m_ell)?;
    Ok(balanced(qn.m_abs(), [slot(sigma, 1), slot(sigma, -1)]))
}

/// Propagation in space, or in time at fixed `beta` with splitting `delta_omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Propagation {
    Spatial { z: f64 },
    Temporal { t: f64, delta_omega: f64 },
}

impl Propagation {
    /// The accumulated splitting phase `|delta_beta| z` or `|delta_omega| t`.
    pub fn splitting_phase(&self, corr: &SoiCorrection) -> f64 {
        match *self {
            Propagation::Spatial { z } => corr.delta_beta_abs * z,
            Propagation::Temporal { t, delta_omega } => delta_omega.abs() * t,
        }
    }
}

/// Multiplies each slot by `exp(-i sigma mu x)` for the given splitting phase `x`.
pub fn evolve_by_phase(state: &SpinOrbitState, x: f64) -> SpinOrbitState {
    let mut out = *state;
    for (amp, (sigma, mu)) in out.amplitudes.iter_mut().zip(BASIS) {
        *amp *= Complex64::from_polar(1.0, -f64::from(sigma * mu) * x);
    }
    out
}

pub fn evolve(state: &SpinOrbitState, corr: &SoiCorrection, propagation: Propagation) -> SpinOrbitState {
    evolve_by_phase(state, propagation.splitting_phase(corr))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "particle", rename_all = "snake_case")]
pub enum SpinObservable {
    /// `<S>` in units of hbar.
    Electron { spin: [f64; 3] },
    /// Stokes parameters `(S0, S1, S2, S3)` of the SAM-marginal polarization.
    Photon { stokes: [f64; 4] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub spin: SpinObservable,
    /// Electron: azimuth of `<S>` in the transverse plane. Photon: orientation
    /// of the polarization ellipse, defined modulo `pi`.
    pub azimuth: f64,
    /// Orientation of the `2|m|`-fold intensity pattern, modulo `pi/|m|`;
    /// `None` when the pattern has no azimuthal structure.
    pub pattern_angle: Option<f64>,
    pub intensity_profile: Vec<f64>,
    pub norm: f64,
}

/// `I(phi)` on a uniform grid of `AZIMUTH_POINTS` angles in `[0, 2 pi)`.
pub fn intensity_profile(state: &SpinOrbitState) -> Vec<f64> {
    let m = f64::from(state.m_abs);
    let a = &state.amplitudes;
    (0..AZIMUTH_POINTS)
        .map(|i| {
            let phi = 2.0 * PI * i as f64 / AZIMUTH_POINTS as f64;
            let up = Complex64::from_polar(1.0, m * phi);
            let down = up.conj();
            (a[0] * up + a[1] * down).norm_sqr() + (a[2] * up + a[3] * down).norm_sqr()
        })
        .collect()
}

/// Angle of the maximum of the `2|m|` harmonic of a sampled `I(phi)`.
pub fn pattern_angle(profile: &[f64], m_abs: u32) -> Result<f64> {
    let n = profile.len() as f64;
    let order = 2.0 * f64::from(m_abs);
    let c: Complex64 = profile
        .iter()
        .enumerate()
        .map(|(i, &v)| v * Complex64::from_polar(1.0, -order * 2.0 * PI * i as f64 / n))
        .sum::<Complex64>()
        / n;
    let mean = profile.iter().sum::<f64>() / n;
    if c.norm() <= PATTERN_FLOOR * mean.abs().max(1.0) {
        return Err(SoiError::PatternUndefined);
    }
    Ok(-c.arg() / order)
}

pub fn observables(state: &SpinOrbitState, particle: ParticleKind) -> Observables {
    let rho = state.sam_density();
    let (pp, mm, pm) = (rho[0][0].re, rho[1][1].re, rho[0][1]);
    let (spin, azimuth) = match particle {
        ParticleKind::Electron => {
            // <sigma_x> = 2 Re rho_{-+}, <sigma_y> = 2 Im rho_{-+}, rho_{-+} = conj(rho_{+-})
            let sx = 2.0 * pm.re;
            let sy = -2.0 * pm.im;
            let s = [0.5 * sx, 0.5 * sy, 0.5 * (pp - mm)];
            (SpinObservable::Electron { spin: s }, s[1].atan2(s[0]))
        }
        ParticleKind::Photon => {
            // e_+- = (x +- i y)/sqrt 2; map to the linear basis before forming Stokes parameters
            let r = FRAC_1_SQRT_2;
            let m = [[Complex64::new(r, 0.0), Complex64::new(r, 0.0)], [Complex64::new(0.0, r), Complex64::new(0.0, -r)]];
            let mut lin = [[Complex64::new(0.0, 0.0); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        for l in 0..2 {
                            lin[i][j] += m[i][k] * rho[k][l] * m[j][l].conj();
                        }
                    }
                }
            }
            let s0 = lin[0][0].re + lin[1][1].re;
            let s1 = lin[0][0].re - lin[1][1].re;
            let s2 = 2.0 * lin[0][1].re;
            let s3 = -2.0 * lin[0][1].im;
            (SpinObservable::Photon { stokes: [s0, s1, s2, s3] }, 0.5 * s2.atan2(s1))
        }
    };
    let intensity = intensity_profile(state);
    Observables {
        spin,
        azimuth,
        pattern_angle: pattern_angle(&intensity, state.m_abs).ok(),
        intensity_profile: intensity,
        norm: state.norm_sq(),
    }
}

/// Period of the azimuth reported by `observables`.
pub fn azimuth_period(particle: ParticleKind) -> f64 {
    match particle {
        ParticleKind::Electron => 2.0 * PI,
        ParticleKind::Photon => PI,
    }
}

/// Removes jumps of more than half a period between consecutive samples.
pub fn unwrap_angles(values: &[f64], period: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &v in values {
        if let Some(p) = prev {
            let jump = v + offset - p;
            offset -= period * (jump / period).round();
        }
        let u = v + offset;
        out.push(u);
        prev = Some(u);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub z: f64,
    pub splitting_phase: f64,
    pub azimuth: f64,
    pub pattern_angle: Option<f64>,
    pub norm: f64,
}

/// Spatial sweep with both angles unwrapped along `z`.
pub fn sweep(state: &SpinOrbitState, corr: &SoiCorrection, particle: ParticleKind, zs: &[f64]) -> Vec<SweepRow> {
    let obs: Vec<(f64, Observables)> = zs
        .iter()
        .map(|&z| (z, observables(&evolve(state, corr, Propagation::Spatial { z }), particle)))
        .collect();
    sweep_rows(&obs, corr, particle, state.m_abs)
}

/// Assembles sweep rows from per-`z` observables, unwrapping the angles.
pub fn sweep_rows(obs: &[(f64, Observables)], corr: &SoiCorrection, particle: ParticleKind, m_abs: u32) -> Vec<SweepRow> {
    let az: Vec<f64> = obs.iter().map(|(_, o)| o.azimuth).collect();
    let az = unwrap_angles(&az, azimuth_period(particle));
    let pattern: Vec<Option<f64>> = if obs.iter().all(|(_, o)| o.pattern_angle.is_some()) {
        let raw: Vec<f64> = obs.iter().filter_map(|(_, o)| o.pattern_angle).collect();
        unwrap_angles(&raw, PI / f64::from(m_abs)).into_iter().map(Some).collect()
    } else {
        obs.iter().map(|(_, o)| o.pattern_angle).collect()
    };
    obs.iter()
        .zip(az)
        .zip(pattern)
        .map(|(((z, o), azimuth), pattern_angle)| SweepRow {
            z: *z,
            splitting_phase: corr.delta_beta_abs * z,
            azimuth,
            pattern_angle,
            norm: o.norm,
        })
        .collect()
}
