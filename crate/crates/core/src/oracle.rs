//! Finite-difference radial eigensolver used as independent ground truth.
//!
//! The radial operator `(1/rho) d/drho (rho d/drho) - m^2/rho^2 + k^2(rho)`
//! is discretized on a cell-centred grid `rho_i = (i + 1/2) h` with the
//! conservative second-order stencil; the face at `rho = 0` carries zero
//! weight, which builds in regularity at the axis. Scaling by `sqrt(rho_i)`
//! makes the matrix symmetric tridiagonal. Eigenvalues are located by Sturm
//! bisection and eigenvectors by inverse iteration.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SoiError};
use crate::types::{ProfileEval, QuantumNumbers, WaveguideSpec};

/// Uniform cell-centred grid on `[0, r_max]` with `psi = 0` just past `r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub n: usize,
    pub r_max: f64,
}

impl RadialGrid {
    pub const PRODUCTION_N: usize = 4096;

    pub fn new(n: usize, r_max: f64) -> Self {
        Self { n, r_max }
    }

    /// Default grid for a spec: `r_max = 6a`, at least 4096 cells, and at
    /// least eight cells per smoothing width.
    pub fn for_spec(spec: &WaveguideSpec) -> Self {
        let r_max = 6.0 * spec.a;
        let (_, width) = spec.profile_eval().transition();
        let mut n = Self::PRODUCTION_N;
        if width > 0.0 {
            n = n.max((8.0 * r_max / width).ceil() as usize);
        }
        Self { n, r_max }
    }

    pub fn spacing(&self) -> f64 {
        self.r_max / self.n as f64
    }

    pub fn centres(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n).map(|i| (i as f64 + 0.5) * h).collect()
    }

    fn check(&self, spec: &WaveguideSpec) -> Result<()> {
        if self.n < 16 || self.r_max.is_nan() || self.r_max <= spec.a {
            return Err(SoiError::NumericalFailure(format!(
                "radial grid too small (n = {}, r_max = {})",
                self.n, self.r_max
            )));
        }
        Ok(())
    }
}

/// One eigenpair of the discretized radial problem.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMode {
    pub beta_sq: f64,
    /// `beta^2 - k_core^2`, kept separately for precision.
    pub shifted_eigenvalue: f64,
    pub rho: Vec<f64>,
    /// Radial function normalized to `2 pi sum psi^2 rho h = 1`, positive near the axis.
    pub psi: Vec<f64>,
}

struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    /// Number of eigenvalues strictly below `x`.
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let coupling = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - coupling / q;
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs() + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Ascending-order eigenvalue `k` by bisection.
    fn eigenvalue(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solves `(A - shift) x = b` by Gaussian elimination with partial
    /// pivoting (the LAPACK `gtsv` scheme).
    fn solve_shifted(&self, shift: f64, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - shift).collect();
        let mut du = self.off.clone();
        // sub-diagonal on input, second super-diagonal after elimination
        let mut dl = self.off.clone();
        let mut x = b.to_vec();
        let tiny = f64::MIN_POSITIVE.sqrt();
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                d[i + 1] -= fact * du[i];
                x[i + 1] -= fact * x[i];
                dl[i] = 0.0;
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                let tmp = d[i + 1];
                d[i + 1] = du[i] - fact * tmp;
                if i + 1 < n - 1 {
                    dl[i] = du[i + 1];
                    du[i + 1] = -fact * dl[i];
                } else {
                    dl[i] = 0.0;
                }
                du[i] = tmp;
                let bi = x[i];
                x[i] = x[i + 1];
                x[i + 1] = bi - fact * x[i + 1];
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        x[n - 1] /= d[n - 1];
        if n > 1 {
            x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - dl[i] * x[i + 2]) / d[i];
        }
        x
    }

    fn eigenvector(&self, lambda: f64) -> Result<Vec<f64>> {
        let n = self.diag.len();
        let shift = lambda + 1e-13 * (lambda.abs() + 1.0);
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        for _ in 0..4 {
            let w = self.solve_shifted(shift, &v);
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                return Err(SoiError::NumericalFailure("inverse iteration breakdown".into()));
            }
            v = w.into_iter().map(|x| x / norm).collect();
        }
        Ok(v)
    }
}

/// `chi` averaged over the cell with the `rho drho` weight of the finite-volume
/// scheme. Only the cell cut by a step discontinuity differs from the midpoint
/// value, and averaging there restores second-order convergence.
fn cell_chi(eval: &ProfileEval, spec: &WaveguideSpec, r: f64, h: f64) -> f64 {
    let (lo, hi) = (r - 0.5 * h, r + 0.5 * h);
    if spec.profile.is_step() && lo < spec.a && spec.a < hi {
        let outer = hi * hi - spec.a * spec.a;
        return outer / (hi * hi - lo * lo);
    }
    eval.chi(r)
}

fn build_operator(
    spec: &WaveguideSpec,
    m_abs: u32,
    soi_potential: Option<&dyn Fn(f64) -> f64>,
    grid: &RadialGrid,
) -> (SymTridiagonal, Vec<f64>) {
    let h = grid.spacing();
    let rho = grid.centres();
    let eval: ProfileEval = spec.profile_eval();
    let depth = spec.k_core * spec.k_core * spec.delta;
    let m2 = f64::from(m_abs) * f64::from(m_abs);
    let inv_h2 = 1.0 / (h * h);
    let diag: Vec<f64> = rho
        .iter()
        .map(|&r| {
            let mut d = -2.0 * inv_h2 - m2 / (r * r) - depth * cell_chi(&eval, spec, r, h);
            if let Some(v) = soi_potential {
                d += v(r);
            }
            d
        })
        .collect();
    let off: Vec<f64> = (0..grid.n - 1)
        .map(|i| {
            let face = (i as f64 + 1.0) * h;
            face * inv_h2 / (rho[i] * rho[i + 1]).sqrt()
        })
        .collect();
    (SymTridiagonal { diag, off }, rho)
}

fn guided_modes(
    spec: &WaveguideSpec,
    op: &SymTridiagonal,
    rho: Vec<f64>,
    h: f64,
    max_modes: usize,
) -> Result<Vec<GridMode>> {
    let n = op.diag.len();
    let floor = -spec.k_core * spec.k_core * spec.delta;
    let (_, top) = op.gershgorin();
    let guided = n - op.count_below(floor);
    let k_core_sq = spec.k_core * spec.k_core;
    let mut out = Vec::new();
    for j in 0..guided.min(max_modes) {
        let k = n - 1 - j;
        let lambda = op.eigenvalue(k, floor, top);
        if !lambda.is_finite() {
            return Err(SoiError::NumericalFailure("Sturm bisection failed".into()));
        }
        let u = op.eigenvector(lambda)?;
        let mut psi: Vec<f64> = u.iter().zip(&rho).map(|(u, r)| u / r.sqrt()).collect();
        let norm = 2.0 * std::f64::consts::PI * u.iter().map(|x| x * x).sum::<f64>() * h;
        let peak = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let first = psi
            .iter()
            .copied()
            .find(|v| v.abs() > 1e-6 * peak)
            .unwrap_or(1.0);
        let scale = first.signum() / norm.sqrt();
        psi.iter_mut().for_each(|v| *v *= scale);
        out.push(GridMode {
            beta_sq: k_core_sq + lambda,
            shifted_eigenvalue: lambda,
            rho: rho.clone(),
            psi,
        });
    }
    Ok(out)
}

/// Guided eigenpairs of the unperturbed radial problem, descending in `beta^2`.
pub fn eig_unperturbed(spec: &WaveguideSpec, m_abs: u32, grid: &RadialGrid) -> Result<Vec<GridMode>> {
    grid.check(spec)?;
    let (op, rho) = build_operator(spec, m_abs, None, grid);
    guided_modes(spec, &op, rho, grid.spacing(), usize::MAX)
}

/// The `p`-th guided `beta^2` with the spin-orbit term
/// `-(delta/2)(sigma m_ell / rho) d chi/d rho` added to the radial operator.
pub fn eig_perturbed(spec: &WaveguideSpec, qn: QuantumNumbers, p: u32, grid: &RadialGrid) -> Result<GridMode> {
    grid.check(spec)?;
    if spec.profile.is_step() {
        return Err(SoiError::WrongProfile {
            expected: "differentiable (smoothed or tabulated)",
        });
    }
    let eval = spec.profile_eval();
    let coupling = -0.5 * spec.delta * f64::from(qn.sigma() * qn.m_ell());
    let potential = move |r: f64| coupling * eval.dchi(r) / r;
    let (op, rho) = build_operator(spec, qn.m_abs(), Some(&potential), grid);
    let modes = guided_modes(spec, &op, rho, grid.spacing(), p as usize)?;
    modes.into_iter().nth(p as usize - 1).ok_or(SoiError::NoGuidedMode {
        m_abs: qn.m_abs(),
        p,
    })
}

/// `sqrt(beta^2) - beta_0` computed without cancellation.
pub fn exact_shift(perturbed: &GridMode, unperturbed: &GridMode) -> f64 {
    let diff = perturbed.shifted_eigenvalue - unperturbed.shifted_eigenvalue;
    diff / (perturbed.beta_sq.sqrt() + unperturbed.beta_sq.sqrt())
}

/// Fixture record of oracle eigenvalues with their generation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub spec: WaveguideSpec,
    pub m: i32,
    pub sigma: i32,
    pub n: usize,
    pub r_max: f64,
    pub eigenvalues: Vec<f64>,
}

impl OracleRecord {
    /// Guided `beta^2` values; `sigma = 0` means the unperturbed problem.
    pub fn generate(spec: &WaveguideSpec, m: i32, sigma: i32, grid: &RadialGrid) -> Result<Self> {
        let eigenvalues = if sigma == 0 {
            eig_unperturbed(spec, m.unsigned_abs(), grid)?
                .into_iter()
                .map(|g| g.beta_sq)
                .collect()
        } else {
            let qn = QuantumNumbers::new(sigma, m)?;
            let mut out = Vec::new();
            let mut p = 1;
            while let Ok(g) = eig_perturbed(spec, qn, p, grid) {
                out.push(g.beta_sq);
                p += 1;
            }
            out
        };
        Ok(Self {
            spec: spec.clone(),
            m,
            sigma,
            n: grid.n,
            r_max: grid.r_max,
            eigenvalues,
        })
    }
}
