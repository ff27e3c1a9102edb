//! Two-photon transfer of entanglement between polarization and OAM.
//!
//! Each photon carries a SAM qubit (`e_+`, `e_-`) and an OAM qubit
//! (`|+2>`, `|-2>`); single-particle index `2 s + o`, two-particle index
//! `4 i1 + i2`. Amplitudes are always stored in the OAM eigenbasis; the
//! per-arm `ModeBasis` label records which mode family the arm is nominally
//! prepared in, and gates which mode converters may be applied.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SoiError};

pub const OAM: u32 = 2;
pub const WAYPOINT_TOLERANCE: f64 = 1e-10;
/// Grid for the constructive searches over plate, converter and SOI settings.
pub const SEARCH_STEP: f64 = PI / 16.0;

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn cis(phase: f64) -> C {
    C::from_polar(1.0, phase)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "basis", content = "angle", rename_all = "snake_case")]
pub enum ModeBasis {
    Lg,
    Hg,
    HgRotated(f64),
}

impl ModeBasis {
    fn angle(self) -> Option<f64> {
        match self {
            ModeBasis::Lg => None,
            ModeBasis::Hg => Some(0.0),
            ModeBasis::HgRotated(a) => Some(a),
        }
    }

    /// Columns are the basis vectors in OAM-eigenbasis coordinates:
    /// `cos 2(phi - alpha)` and `sin 2(phi - alpha)` for the HG family.
    pub fn matrix(self) -> Matrix2<C> {
        match self.angle() {
            None => Matrix2::identity(),
            Some(alpha) => oam_rotation(alpha) * hg_columns(),
        }
    }
}

fn hg_columns() -> Matrix2<C> {
    let r = FRAC_1_SQRT_2;
    Matrix2::new(c(r, 0.0), c(0.0, -r), c(r, 0.0), c(0.0, r))
}

/// Rotates an `|m| = 2` transverse pattern by `alpha`.
pub fn oam_rotation(alpha: f64) -> Matrix2<C> {
    let m = f64::from(OAM);
    Matrix2::new(cis(-m * alpha), C::ZERO, C::ZERO, cis(m * alpha))
}

/// Circular components `(e_+, e_-)` of linear polarization at angle `theta`.
pub fn linear_polarization(theta: f64) -> [C; 2] {
    [cis(-theta) * FRAC_1_SQRT_2, cis(theta) * FRAC_1_SQRT_2]
}

/// Retarder with retardance `gamma` and fast axis at `angle`, in the circular basis.
pub fn wave_plate_matrix(gamma: f64, angle: f64) -> Matrix2<C> {
    let (s, co) = angle.sin_cos();
    let rot = |s: f64| Matrix2::new(c(co, 0.0), c(s, 0.0), c(-s, 0.0), c(co, 0.0));
    let retard = Matrix2::new(cis(-gamma / 2.0), C::ZERO, C::ZERO, cis(gamma / 2.0));
    let lin = rot(-s) * retard * rot(s);
    let r = FRAC_1_SQRT_2;
    let m = Matrix2::new(c(r, 0.0), c(r, 0.0), c(0.0, r), c(0.0, -r));
    m.adjoint() * lin * m
}

/// Converter oriented at `alpha`: takes the HG pair rotated by `alpha` to `|+-2>`.
pub fn converter_matrix(direction: ConverterDirection, alpha: f64) -> Matrix2<C> {
    let forward = hg_columns().adjoint() * oam_rotation(-alpha);
    match direction {
        ConverterDirection::HgToLg => forward,
        ConverterDirection::LgToHg => forward.adjoint(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConverterDirection {
    HgToLg,
    LgToHg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperationKind {
    /// SOI propagation with accumulated splitting phase `|delta_beta| z`.
    SoiStage { phase: f64 },
    WavePlate { retardance: f64, angle: f64 },
    ModeConverter { direction: ConverterDirection, angle: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalOperation {
    pub kind: OperationKind,
    pub arm: u8,
}

impl LocalOperation {
    pub fn new(kind: OperationKind, arm: u8) -> Self {
        Self { kind, arm }
    }

    pub fn inverse(&self) -> Self {
        let kind = match self.kind {
            OperationKind::SoiStage { phase } => OperationKind::SoiStage { phase: -phase },
            OperationKind::WavePlate { retardance, angle } => OperationKind::WavePlate {
                retardance: -retardance,
                angle,
            },
            OperationKind::ModeConverter { direction, angle } => OperationKind::ModeConverter {
                direction: match direction {
                    ConverterDirection::HgToLg => ConverterDirection::LgToHg,
                    ConverterDirection::LgToHg => ConverterDirection::HgToLg,
                },
                angle,
            },
        };
        Self { kind, arm: self.arm }
    }

    /// The single-particle unitary on `SAM (x) OAM`.
    pub fn matrix(&self) -> Matrix4<C> {
        match self.kind {
            OperationKind::SoiStage { phase } => {
                let mut u = Matrix4::zeros();
                for (i, (sigma, mu)) in [(1, 1), (1, -1), (-1, 1), (-1, -1)].into_iter().enumerate() {
                    u[(i, i)] = cis(-f64::from(sigma * mu) * phase);
                }
                u
            }
            OperationKind::WavePlate { retardance, angle } => kron(&wave_plate_matrix(retardance, angle), &Matrix2::identity()),
            OperationKind::ModeConverter { direction, angle } => kron(&Matrix2::identity(), &converter_matrix(direction, angle)),
        }
    }

    pub fn describe(&self) -> String {
        match self.kind {
            OperationKind::SoiStage { phase } => format!("arm {}: SOI stage, |db|z = {:.4} deg", self.arm, phase.to_degrees()),
            OperationKind::WavePlate { retardance, angle } => format!(
                "arm {}: wave plate, retardance {:.4} deg, fast axis {:.4} deg",
                self.arm,
                retardance.to_degrees(),
                angle.to_degrees()
            ),
            OperationKind::ModeConverter { direction, angle } => {
                format!("arm {}: mode converter {:?} at {:.4} deg", self.arm, direction, angle.to_degrees())
            }
        }
    }
}

fn kron(sam: &Matrix2<C>, oam: &Matrix2<C>) -> Matrix4<C> {
    Matrix4::from_fn(|i, j| sam[(i / 2, j / 2)] * oam[(i % 2, j % 2)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoParticleState {
    pub amplitudes: [C; 16],
    pub bases: [ModeBasis; 2],
}

impl TwoParticleState {
    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Builds `sum_k w_k |a_k>|b_k>` from single-particle kets.
    pub fn from_products(terms: &[(C, [C; 4], [C; 4])], bases: [ModeBasis; 2]) -> Self {
        let mut amplitudes = [C::ZERO; 16];
        for (w, a, b) in terms {
            for i in 0..4 {
                for j in 0..4 {
                    amplitudes[4 * i + j] += w * a[i] * b[j];
                }
            }
        }
        Self { amplitudes, bases }
    }

    /// Exchanges the two particles.
    pub fn swapped(&self) -> Self {
        let mut out = self.clone();
        for i in 0..4 {
            for j in 0..4 {
                out.amplitudes[4 * i + j] = self.amplitudes[4 * j + i];
            }
        }
        out.bases = [self.bases[1], self.bases[0]];
        out
    }

    /// Coefficients with each arm's OAM factor expanded in the given mode basis.
    pub fn amplitudes_in(&self, bases: [ModeBasis; 2]) -> [C; 16] {
        let b = [kron(&Matrix2::identity(), &bases[0].matrix()), kron(&Matrix2::identity(), &bases[1].matrix())];
        transform(&self.amplitudes, &b[0].adjoint(), &b[1].adjoint())
    }

    /// Inverse of `amplitudes_in`.
    pub fn from_amplitudes_in(coeffs: &[C; 16], bases: [ModeBasis; 2]) -> Self {
        let b = [kron(&Matrix2::identity(), &bases[0].matrix()), kron(&Matrix2::identity(), &bases[1].matrix())];
        Self {
            amplitudes: transform(coeffs, &b[0], &b[1]),
            bases,
        }
    }
}

fn transform(a: &[C; 16], u1: &Matrix4<C>, u2: &Matrix4<C>) -> [C; 16] {
    let mut out = [C::ZERO; 16];
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = C::ZERO;
            for k in 0..4 {
                for l in 0..4 {
                    acc += u1[(i, k)] * u2[(j, l)] * a[4 * k + l];
                }
            }
            out[4 * i + j] = acc;
        }
    }
    out
}

/// Single-particle ket `polarization (x) spatial` in the `2 s + o` ordering.
pub fn product_ket(polarization: [C; 2], spatial: [C; 2]) -> [C; 4] {
    [
        polarization[0] * spatial[0],
        polarization[0] * spatial[1],
        polarization[1] * spatial[0],
        polarization[1] * spatial[1],
    ]
}

pub const E_PLUS: [C; 2] = [C::ONE, C::ZERO];
pub const E_MINUS: [C; 2] = [C::ZERO, C::ONE];
pub const LG_PLUS: [C; 2] = [C::ONE, C::ZERO];
pub const LG_MINUS: [C; 2] = [C::ZERO, C::ONE];

/// The `cos 2(phi - alpha)` pattern in OAM coordinates.
pub fn hg_rotated(alpha: f64) -> [C; 2] {
    let v = oam_rotation(alpha) * hg_columns().column(0);
    [v[0], v[1]]
}

/// `(|a>|b> - |b>|a>) / sqrt 2`.
pub fn singlet(a: [C; 4], b: [C; 4], bases: [ModeBasis; 2]) -> TwoParticleState {
    let w = c(FRAC_1_SQRT_2, 0.0);
    TwoParticleState::from_products(&[(w, a, b), (-w, b, a)], bases)
}

pub fn bell_polarization_state() -> TwoParticleState {
    let hg = hg_rotated(0.0);
    singlet(product_ket(E_PLUS, hg), product_ket(E_MINUS, hg), [ModeBasis::Hg; 2])
}

pub fn apply(op: &LocalOperation, state: &TwoParticleState) -> Result<TwoParticleState> {
    let arm = match op.arm {
        1 | 2 => usize::from(op.arm - 1),
        other => {
            return Err(SoiError::BasisMismatch {
                arm: other,
                detail: "arm must be 1 or 2".into(),
            })
        }
    };
    let mut bases = state.bases;
    if let OperationKind::ModeConverter { direction, angle } = op.kind {
        let current = bases[arm];
        bases[arm] = match (direction, current) {
            (ConverterDirection::HgToLg, ModeBasis::Hg | ModeBasis::HgRotated(_)) => ModeBasis::Lg,
            (ConverterDirection::LgToHg, ModeBasis::Lg) if angle == 0.0 => ModeBasis::Hg,
            (ConverterDirection::LgToHg, ModeBasis::Lg) => ModeBasis::HgRotated(angle),
            _ => {
                return Err(SoiError::BasisMismatch {
                    arm: op.arm,
                    detail: format!("{direction:?} converter applied to an arm in {current:?}"),
                })
            }
        };
    }
    let u = op.matrix();
    let id = Matrix4::identity();
    let amplitudes = if arm == 0 {
        transform(&state.amplitudes, &u, &id)
    } else {
        transform(&state.amplitudes, &id, &u)
    };
    Ok(TwoParticleState { amplitudes, bases })
}

/// `|<a|b>|^2`.
pub fn fidelity(a: &TwoParticleState, b: &TwoParticleState) -> f64 {
    a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum::<C>()
        .norm_sqr()
}

/// Qubits in the two-particle index, most significant first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Qubit {
    Sam1 = 3,
    Oam1 = 2,
    Sam2 = 1,
    Oam2 = 0,
}

/// Von Neumann entropy (bits) of the reduced state on `keep`.
pub fn entropy(state: &TwoParticleState, keep: &[Qubit]) -> f64 {
    let bits: Vec<u32> = keep.iter().map(|&q| q as u32).collect();
    let rest: Vec<u32> = (0..4).filter(|b| !bits.contains(b)).collect();
    let gather = |idx: usize, from: &[u32]| from.iter().fold(0usize, |acc, &b| (acc << 1) | ((idx >> b) & 1));
    let mut m = DMatrix::<C>::zeros(1 << bits.len(), 1 << rest.len());
    for (idx, amp) in state.amplitudes.iter().enumerate() {
        m[(gather(idx, &bits), gather(idx, &rest))] = *amp;
    }
    let total = state.norm_sq();
    m.singular_values()
        .iter()
        .map(|s| s * s / total)
        .filter(|&p| p > 1e-15)
        .map(|p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entropies {
    pub particle: f64,
    pub sam_1: f64,
    pub oam_1: f64,
    pub sam_2: f64,
    pub oam_2: f64,
    /// Both SAM qubits against both OAM qubits.
    pub sam_vs_oam: f64,
}

pub fn entropies(state: &TwoParticleState) -> Entropies {
    use Qubit::*;
    Entropies {
        particle: entropy(state, &[Sam1, Oam1]),
        sam_1: entropy(state, &[Sam1]),
        oam_1: entropy(state, &[Oam1]),
        sam_2: entropy(state, &[Sam2]),
        oam_2: entropy(state, &[Oam2]),
        sam_vs_oam: entropy(state, &[Sam1, Sam2]),
    }
}

/// The three target states of the protocol, built from their ket expressions.
pub fn waypoints() -> [TwoParticleState; 3] {
    let deg = PI / 180.0;
    let hg_p = hg_rotated(22.5 * deg);
    let hg_m = hg_rotated(-22.5 * deg);
    let d = linear_polarization(45.0 * deg);
    let a = linear_polarization(-45.0 * deg);
    let h = linear_polarization(0.0);
    [
        singlet(product_ket(E_PLUS, hg_p), product_ket(E_MINUS, hg_m), [ModeBasis::Hg; 2]),
        singlet(product_ket(d, LG_PLUS), product_ket(a, LG_MINUS), [ModeBasis::Lg; 2]),
        singlet(product_ket(h, LG_PLUS), product_ket(h, LG_MINUS), [ModeBasis::Lg; 2]),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolStep {
    pub label: String,
    pub operations: Vec<LocalOperation>,
    pub descriptions: Vec<String>,
    pub state: TwoParticleState,
    pub norm: f64,
    pub entropies: Entropies,
    /// Sign check: the state is odd under particle exchange.
    pub exchange_antisymmetry_error: f64,
    pub waypoint_fidelity: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolvedSettings {
    pub stage1_phase: f64,
    pub plate_retardance: f64,
    pub plate_angle: f64,
    pub converter_angle: f64,
    pub stage3_phase: f64,
    pub candidates_tried: usize,
    /// Waypoint-1 fidelity if the first SOI stage accumulates only
    /// `|delta_beta| z = 22.5 deg` (11.25 deg of pattern rotation).
    pub stage1_quarter_phase_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTrace {
    pub steps: Vec<ProtocolStep>,
    pub waypoint_fidelities: [f64; 3],
    pub settings: SolvedSettings,
}

impl ProtocolTrace {
    pub fn initial(&self) -> &TwoParticleState {
        &self.steps[0].state
    }

    pub fn final_state(&self) -> &TwoParticleState {
        &self.steps[self.steps.len() - 1].state
    }

    /// Every operation after the initial state, in order.
    pub fn operations(&self) -> Vec<LocalOperation> {
        self.steps.iter().flat_map(|s| s.operations.iter().copied()).collect()
    }
}

fn both_arms(kind: OperationKind) -> Vec<LocalOperation> {
    vec![LocalOperation::new(kind, 1), LocalOperation::new(kind, 2)]
}

fn apply_all(ops: &[LocalOperation], state: &TwoParticleState) -> Result<TwoParticleState> {
    ops.iter().try_fold(state.clone(), |s, op| apply(op, &s))
}

fn record(label: &str, operations: Vec<LocalOperation>, state: TwoParticleState, waypoint_fidelity: Option<f64>) -> ProtocolStep {
    let swapped = state.swapped();
    let exchange_antisymmetry_error = state
        .amplitudes
        .iter()
        .zip(&swapped.amplitudes)
        .map(|(a, b)| (a + b).norm())
        .fold(0.0, f64::max);
    ProtocolStep {
        label: label.into(),
        descriptions: operations.iter().map(LocalOperation::describe).collect(),
        operations,
        norm: state.norm_sq(),
        entropies: entropies(&state),
        exchange_antisymmetry_error,
        state,
        waypoint_fidelity,
    }
}

/// Smallest positive multiple of `SEARCH_STEP` (up to a full turn) whose SOI
/// stage takes `state` onto `target`.
fn solve_soi_stage(state: &TwoParticleState, target: &TwoParticleState, tried: &mut usize) -> Option<(f64, TwoParticleState)> {
    (1..=32).find_map(|k| {
        *tried += 1;
        let phase = f64::from(k) * SEARCH_STEP;
        let out = apply_all(&both_arms(OperationKind::SoiStage { phase }), state).ok()?;
        (fidelity(&out, target) >= 1.0 - WAYPOINT_TOLERANCE).then_some((phase, out))
    })
}

fn check(step: usize, f: f64) -> Result<()> {
    if f < 1.0 - WAYPOINT_TOLERANCE {
        return Err(SoiError::ProtocolStepFailed { step, fidelity: f });
    }
    Ok(())
}

/// Runs the three-stage protocol, solving each unspecified setting by search.
pub fn run_protocol() -> Result<ProtocolTrace> {
    let targets = waypoints();
    let bell = bell_polarization_state();
    let mut tried = 0;

    let (stage1_phase, s1) = solve_soi_stage(&bell, &targets[0], &mut tried).ok_or(SoiError::ProtocolStepFailed {
        step: 1,
        fidelity: fidelity(&bell, &targets[0]),
    })?;
    let f1 = fidelity(&s1, &targets[0]);
    check(1, f1)?;
    let quarter = apply_all(&both_arms(OperationKind::SoiStage { phase: PI / 8.0 }), &bell)?;
    let stage1_quarter_phase_fidelity = fidelity(&quarter, &targets[0]);

    // wave plate then converter, same settings in both arms
    let mut stage2 = None;
    'search: for retardance in [PI / 2.0, PI] {
        for kp in 0..16 {
            let plate = OperationKind::WavePlate {
                retardance,
                angle: f64::from(kp) * SEARCH_STEP,
            };
            for kc in 0..16 {
                tried += 1;
                let conv = OperationKind::ModeConverter {
                    direction: ConverterDirection::HgToLg,
                    angle: f64::from(kc) * SEARCH_STEP,
                };
                let ops: Vec<_> = [both_arms(plate), both_arms(conv)].concat();
                let out = apply_all(&ops, &s1)?;
                if fidelity(&out, &targets[1]) >= 1.0 - WAYPOINT_TOLERANCE {
                    stage2 = Some((plate, conv, ops, out));
                    break 'search;
                }
            }
        }
    }
    let (plate, conv, ops2, s2) = stage2.ok_or(SoiError::ProtocolStepFailed {
        step: 2,
        fidelity: 0.0,
    })?;
    let f2 = fidelity(&s2, &targets[1]);
    check(2, f2)?;

    let (stage3_phase, s3) = solve_soi_stage(&s2, &targets[2], &mut tried).ok_or(SoiError::ProtocolStepFailed {
        step: 3,
        fidelity: fidelity(&s2, &targets[2]),
    })?;
    let f3 = fidelity(&s3, &targets[2]);
    check(3, f3)?;

    let (OperationKind::WavePlate { retardance, angle: plate_angle }, OperationKind::ModeConverter { angle: converter_angle, .. }) =
        (plate, conv)
    else {
        unreachable!("stage 2 search builds a plate and a converter")
    };

    Ok(ProtocolTrace {
        steps: vec![
            record("initial polarization Bell state", Vec::new(), bell, None),
            record("SOI stage 1", both_arms(OperationKind::SoiStage { phase: stage1_phase }), s1, Some(f1)),
            record("wave plates and mode converters", ops2, s2, Some(f2)),
            record("SOI stage 2", both_arms(OperationKind::SoiStage { phase: stage3_phase }), s3, Some(f3)),
        ],
        waypoint_fidelities: [f1, f2, f3],
        settings: SolvedSettings {
            stage1_phase,
            plate_retardance: retardance,
            plate_angle,
            converter_angle,
            stage3_phase,
            candidates_tried: tried,
            stage1_quarter_phase_fidelity,
        },
    })
}

/// Undoes every operation of the trace, last first.
pub fn run_inverse(trace: &ProtocolTrace) -> Result<TwoParticleState> {
    let ops: Vec<_> = trace.operations().iter().rev().map(LocalOperation::inverse).collect();
    apply_all(&ops, trace.final_state())
}
