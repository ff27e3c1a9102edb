//! Guided modes of the unperturbed scalar problem.
//!
//! Step profiles are solved from the Bessel dispersion relation
//! `u J_m'(u) / J_m(u) = w K_m'(w) / K_m(w)` with `u = kappa a`,
//! `w = gamma a` and `u^2 + w^2 = V^2`. It is solved in the pole-free form
//! `u J_m'(u) - J_m(u) * w K_m'(w) / K_m(w) = 0`. Other profiles are solved
//! on the radial grid of the [`oracle`](crate::oracle) module.

use std::f64::consts::PI;

use crate::bessel::{bessel_j_seq, BesselK};
use crate::error::{Result, SoiError};
use crate::interp::CubicHermite;
use crate::oracle::{eig_unperturbed, RadialGrid};
use crate::quadrature::{integrate, QuadOptions};
use crate::types::{ParticleKind, WaveguideSpec};

pub const SCAN_POINTS: usize = 2048;
pub const SAMPLE_POINTS: usize = 4096;
pub const MAX_DISPERSION_RESIDUAL: f64 = 1e-10;
const ROOT_MERGE: f64 = 1e-9;

/// How `psi(rho)` is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialShape {
    /// `J_m(kappa rho)` in the core, `J_m(u) K_m(gamma rho) / K_m(w)` outside.
    Bessel { a: f64, j_at_a: f64, ln_k_at_a: f64 },
    /// Spline through grid-eigensolver samples.
    Sampled(CubicHermite),
}

/// One guided solution `N psi(kappa rho) e^{i m phi}` of the unperturbed problem.
#[derive(Debug, Clone, PartialEq)]
pub struct GuidedMode {
    pub m_abs: u32,
    pub p: u32,
    pub beta0: f64,
    pub kappa: f64,
    pub decay_cladding: f64,
    pub norm_n: f64,
    /// `psi` on `SAMPLE_POINTS` uniform radii over `[0, 3a]`.
    pub radial_samples: Vec<f64>,
    pub shape: RadialShape,
}

impl GuidedMode {
    /// Unnormalized radial function; `norm_n * psi` is unit-normalized.
    pub fn psi(&self, rho: f64) -> f64 {
        match &self.shape {
            RadialShape::Bessel { a, j_at_a, ln_k_at_a } => {
                if rho <= *a {
                    bessel_j_seq(self.m_abs, self.kappa * rho)[self.m_abs as usize]
                } else {
                    let k = BesselK::new(self.m_abs, self.decay_cladding * rho);
                    j_at_a * (k.ln_k(self.m_abs) - ln_k_at_a).exp()
                }
            }
            RadialShape::Sampled(spline) => spline.eval(rho),
        }
    }

    pub fn sample_radii(a: f64) -> Vec<f64> {
        (0..SAMPLE_POINTS)
            .map(|i| 3.0 * a * i as f64 / (SAMPLE_POINTS - 1) as f64)
            .collect()
    }

    /// `2 pi int |N psi|^2 rho drho`, evaluated by adaptive quadrature.
    pub fn normalization_integral(&self, a: f64) -> Result<f64> {
        let opts = QuadOptions {
            rel_tol: 1e-12,
            ..QuadOptions::default()
        };
        let f = |r: f64| {
            let v = self.psi(r);
            v * v * r
        };
        let inner = integrate(f, 0.0, a, &[], opts)?.value;
        let outer = match &self.shape {
            RadialShape::Bessel { .. } => {
                // the evanescent tail is integrated out to where it is negligible
                let reach = a + 60.0 / self.decay_cladding.max(1e-3 / a);
                integrate(f, a, reach, &[a + 1.0 / self.decay_cladding.max(1e-3 / a)], opts)?.value
            }
            RadialShape::Sampled(s) => {
                let (_, end) = s.domain();
                integrate(f, a, end, &[], opts)?.value
            }
        };
        Ok(2.0 * PI * self.norm_n * self.norm_n * (inner + outer))
    }
}

/// Pole-free dispersion function and its natural magnitude scale.
pub fn dispersion_function(m_abs: u32, u: f64, v: f64) -> (f64, f64) {
    let w = (v * v - u * u).max(0.0).sqrt();
    let seq = bessel_j_seq(m_abs + 1, u);
    let m = m_abs as usize;
    let j = seq[m];
    let jp = if m == 0 { -seq[1] } else { 0.5 * (seq[m - 1] - seq[m + 1]) };
    let log_dk = BesselK::new(m_abs, w).log_derivative(m_abs);
    let lhs = u * jp;
    let rhs = j * log_dk;
    (lhs - rhs, lhs.abs() + rhs.abs())
}

fn relative_residual(m_abs: u32, u: f64, v: f64) -> f64 {
    let (g, scale) = dispersion_function(m_abs, u, v);
    if scale == 0.0 {
        0.0
    } else {
        g.abs() / scale
    }
}

/// Normalized dispersion residual of a step-profile mode.
pub fn dispersion_residual(spec: &WaveguideSpec, mode: &GuidedMode) -> f64 {
    relative_residual(mode.m_abs, mode.kappa * spec.a, spec.v_number())
}

fn refine_root(m_abs: u32, v: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let g = |u: f64| dispersion_function(m_abs, u, v).0;
    let mut g_lo = g(lo);
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid);
        if g_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (g_mid > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    let mut u = 0.5 * (lo + hi);
    // one Newton polish, kept only if it improves the residual
    let step = 1e-7 * u;
    let slope = (g((u + step).min(v)) - g(u - step)) / ((u + step).min(v) - (u - step));
    if slope != 0.0 && slope.is_finite() {
        let candidate = u - g(u) / slope;
        if candidate > 0.0
            && candidate < v
            && relative_residual(m_abs, candidate, v) < relative_residual(m_abs, u, v)
        {
            u = candidate;
        }
    }
    let res = relative_residual(m_abs, u, v);
    if res >= MAX_DISPERSION_RESIDUAL {
        return Err(SoiError::NumericalFailure(format!(
            "dispersion root for |m| = {m_abs} near u = {u} has residual {res:e}"
        )));
    }
    Ok(u)
}

/// Roots `u = kappa a` of the step dispersion relation in `(0, V)`, ascending.
pub fn step_dispersion_roots(m_abs: u32, v: f64) -> Result<Vec<f64>> {
    let mut grid: Vec<f64> = (1..SCAN_POINTS).map(|i| v * i as f64 / SCAN_POINTS as f64).collect();
    grid.push(v * (1.0 - 1e-12));
    let values: Vec<f64> = grid.iter().map(|&u| dispersion_function(m_abs, u, v).0).collect();
    let mut roots: Vec<f64> = Vec::new();
    for i in 0..grid.len() - 1 {
        let (g0, g1) = (values[i], values[i + 1]);
        let root = if g0 == 0.0 {
            Some(grid[i])
        } else if (g0 > 0.0) != (g1 > 0.0) && g1 != 0.0 {
            Some(refine_root(m_abs, v, grid[i], grid[i + 1])?)
        } else {
            None
        };
        if let Some(r) = root {
            if roots.last().is_none_or(|&last| (r - last).abs() > ROOT_MERGE * v) {
                roots.push(r);
            }
        }
    }
    Ok(roots)
}

fn step_mode(spec: &WaveguideSpec, m_abs: u32, p: u32, u: f64) -> GuidedMode {
    let a = spec.a;
    let v = spec.v_number();
    let w = (v * v - u * u).sqrt();
    let kappa = u / a;
    let gamma = w / a;
    let seq = bessel_j_seq(m_abs + 1, u);
    let m = m_abs as usize;
    let j = seq[m];
    let j_lower = if m == 0 { -seq[1] } else { seq[m - 1] };
    let kfun = BesselK::new(m_abs, w);
    let core = 0.5 * a * a * (j * j - j_lower * seq[m + 1]);
    let clad = 0.5 * a * a * j * j * (kfun.neighbour_product_ratio(m_abs) - 1.0);
    let norm_n = 1.0 / (2.0 * PI * (core + clad)).sqrt();
    let beta0 = (spec.k_core * spec.k_core - kappa * kappa).sqrt();
    let mut mode = GuidedMode {
        m_abs,
        p,
        beta0,
        kappa,
        decay_cladding: gamma,
        norm_n,
        radial_samples: Vec::new(),
        shape: RadialShape::Bessel {
            a,
            j_at_a: j,
            ln_k_at_a: kfun.ln_k(m_abs),
        },
    };
    mode.radial_samples = GuidedMode::sample_radii(a).into_iter().map(|r| mode.psi(r)).collect();
    mode
}

fn grid_modes(spec: &WaveguideSpec, m_abs: u32, max_p: u32) -> Result<Vec<GuidedMode>> {
    let grid = RadialGrid::for_spec(spec);
    let found = eig_unperturbed(spec, m_abs, &grid)?;
    let k_sq = spec.k_core * spec.k_core;
    let h = grid.spacing();
    found
        .into_iter()
        .take(max_p as usize)
        .enumerate()
        .map(|(idx, g)| {
            let mut xs = Vec::with_capacity(g.rho.len() + 2);
            let mut ys = Vec::with_capacity(g.rho.len() + 2);
            let axis = if m_abs == 0 {
                (9.0 * g.psi[0] - g.psi[1]) / 8.0
            } else {
                0.0
            };
            xs.push(0.0);
            ys.push(axis);
            xs.extend_from_slice(&g.rho);
            ys.extend_from_slice(&g.psi);
            xs.push(grid.r_max + 0.5 * h);
            ys.push(0.0);
            let mut mode = GuidedMode {
                m_abs,
                p: idx as u32 + 1,
                beta0: g.beta_sq.sqrt(),
                kappa: (-g.shifted_eigenvalue).max(0.0).sqrt(),
                decay_cladding: (g.beta_sq - spec.k_clad_sq()).max(0.0).sqrt(),
                norm_n: 1.0,
                radial_samples: Vec::new(),
                shape: RadialShape::Sampled(CubicHermite::natural_spline(xs, ys)),
            };
            // re-normalize against the interpolant actually used downstream
            let raw = mode.normalization_integral(spec.a)?;
            mode.norm_n = 1.0 / raw.sqrt();
            mode.radial_samples = GuidedMode::sample_radii(spec.a).into_iter().map(|r| mode.psi(r)).collect();
            debug_assert!(mode.beta0 * mode.beta0 <= k_sq);
            Ok(mode)
        })
        .collect()
}

/// All guided modes with azimuthal index `m_abs` and radial index `<= max_p`,
/// sorted by descending `beta0`. Empty below cutoff.
pub fn solve_modes(spec: &WaveguideSpec, m_abs: u32, max_p: u32) -> Result<Vec<GuidedMode>> {
    let spec = spec.clone().validated()?;
    if spec.profile.is_step() {
        let roots = step_dispersion_roots(m_abs, spec.v_number())?;
        Ok(roots
            .into_iter()
            .take(max_p as usize)
            .enumerate()
            .map(|(i, u)| step_mode(&spec, m_abs, i as u32 + 1, u))
            .collect())
    } else {
        grid_modes(&spec, m_abs, max_p)
    }
}

/// The single mode `(m_abs, p)`.
pub fn solve_mode(spec: &WaveguideSpec, m_abs: u32, p: u32) -> Result<GuidedMode> {
    if p == 0 {
        return Err(SoiError::NoGuidedMode { m_abs, p });
    }
    solve_modes(spec, m_abs, p)?
        .into_iter()
        .nth(p as usize - 1)
        .ok_or(SoiError::NoGuidedMode { m_abs, p })
}

/// Largest `|m|` with at least one guided mode (0 if only `m = 0` is guided).
pub fn max_guided_m(spec: &WaveguideSpec) -> Result<u32> {
    let has_mode = |m: u32| -> Result<bool> { Ok(!solve_modes(spec, m, 1)?.is_empty()) };
    // the |m| >= 1 cutoff exceeds |m| - 1, so nothing above V + 1 is guided;
    // guidance is monotone in |m|, so bisect
    let mut lo = 0u32;
    if !has_mode(lo)? {
        return Ok(0);
    }
    let mut hi = spec.v_number().ceil() as u32 + 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if has_mode(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Relative step used for the centred frequency difference.
pub const GROUP_VELOCITY_STEP: f64 = 1e-5;

/// Guide at a shifted frequency. Photons keep `delta` fixed (so `k^2` scales);
/// electrons keep the potential depth `k_core^2 delta` fixed.
pub fn spec_at_frequency_scale(spec: &WaveguideSpec, k_factor: f64) -> WaveguideSpec {
    let k_core = spec.k_core * k_factor;
    let delta = match spec.particle {
        ParticleKind::Photon => spec.delta,
        ParticleKind::Electron => spec.delta / (k_factor * k_factor),
    };
    WaveguideSpec {
        k_core,
        delta,
        ..spec.clone()
    }
}

/// Dimensionless frequency: `k_core` for photons, `k_core^2 / 2` for electrons
/// (up to additive constants that cancel in differences).
pub fn frequency(spec: &WaveguideSpec) -> f64 {
    match spec.particle {
        ParticleKind::Photon => spec.k_core,
        ParticleKind::Electron => 0.5 * spec.k_core * spec.k_core,
    }
}

/// `d omega / d beta` by a centred difference of re-solved propagation constants.
pub fn group_velocity(spec: &WaveguideSpec, mode: &GuidedMode) -> Result<f64> {
    group_velocity_with_step(spec, mode, GROUP_VELOCITY_STEP)
}

pub fn group_velocity_with_step(spec: &WaveguideSpec, mode: &GuidedMode, h: f64) -> Result<f64> {
    let resolve = |factor: f64| -> Result<(f64, f64)> {
        let shifted = spec_at_frequency_scale(spec, factor);
        let m = solve_mode(&shifted, mode.m_abs, mode.p).map_err(|e| {
            SoiError::NumericalFailure(format!("group velocity re-solve failed: {e}"))
        })?;
        Ok((frequency(&shifted), m.beta0))
    };
    let (w_plus, b_plus) = resolve(1.0 + h)?;
    let (w_minus, b_minus) = resolve(1.0 - h)?;
    let vg = (w_plus - w_minus) / (b_plus - b_minus);
    if !vg.is_finite() {
        return Err(SoiError::NumericalFailure("degenerate group-velocity difference".into()));
    }
    Ok(vg)
}
