use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;
use soi_core::evolution::{
    azimuth_period, evolve, make_superposition_a, make_superposition_b, observables, sweep, unwrap_angles, Propagation,
    SpinObservable, SpinOrbitState,
};
use soi_core::modes::solve_mode;
use soi_core::soi::{delta_beta, delta_omega, SoiCorrection};
use soi_core::types::{ParticleKind, QuantumNumbers, WaveguideSpec};

fn setup(particle: ParticleKind, m: i32) -> (WaveguideSpec, SoiCorrection) {
    let spec = WaveguideSpec::step(particle, 8.0, 0.01);
    let mode = solve_mode(&spec, m.unsigned_abs(), 1).unwrap();
    let corr = delta_beta(&spec, &mode, QuantumNumbers::new(1, m).unwrap()).unwrap();
    (spec, corr)
}

/// Corrections at |m| = 1, 2, 3, solved once for the property tests.
fn cached(particle: ParticleKind, m: u32) -> SoiCorrection {
    static CACHE: OnceLock<Vec<(ParticleKind, u32, SoiCorrection)>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        let mut v = Vec::new();
        for p in [ParticleKind::Photon, ParticleKind::Electron] {
            for m in 1..4u32 {
                v.push((p, m, setup(p, m as i32).1));
            }
        }
        v
    });
    all.iter().find(|(p, mm, _)| *p == particle && *mm == m).unwrap().2
}

fn beat_zs(corr: &SoiCorrection, n: usize) -> Vec<f64> {
    let z_end = PI / corr.delta_beta_abs;
    (0..n).map(|i| z_end * i as f64 / (n - 1) as f64).collect()
}

/// Least-squares slope of unwrapped samples.
fn slope(zs: &[f64], ys: &[f64]) -> f64 {
    let n = zs.len() as f64;
    let (mz, my) = (zs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = zs.iter().zip(ys).map(|(z, y)| (z - mz) * (y - my)).sum();
    let den: f64 = zs.iter().map(|z| (z - mz) * (z - mz)).sum();
    num / den
}

fn azimuth_slope(state: &SpinOrbitState, particle: ParticleKind, corr: &SoiCorrection) -> f64 {
    let zs = beat_zs(corr, 201);
    let rows = sweep(state, corr, particle, &zs);
    let raw: Vec<f64> = rows.iter().map(|r| r.azimuth).collect();
    slope(&zs, &unwrap_angles(&raw, azimuth_period(particle)))
}

fn pattern_slope(state: &SpinOrbitState, particle: ParticleKind, corr: &SoiCorrection) -> f64 {
    let zs = beat_zs(corr, 201);
    let rows = sweep(state, corr, particle, &zs);
    let raw: Vec<f64> = rows.iter().map(|r| r.pattern_angle.unwrap()).collect();
    slope(&zs, &unwrap_angles(&raw, PI / f64::from(state.m_abs)))
}

#[test]
fn photon_polarization_turns_at_the_splitting_rate() {
    for m in [1, 2, -2] {
        let (_, corr) = setup(ParticleKind::Photon, m);
        let s = azimuth_slope(&make_superposition_a(1, m).unwrap(), ParticleKind::Photon, &corr);
        let expected = f64::from(m.signum()) * corr.delta_beta_abs;
        assert!((s / expected - 1.0).abs() < 1e-6, "m = {m}: {s} vs {expected}");
    }
}

#[test]
fn electron_spin_turns_at_twice_the_splitting_rate() {
    for m in [1, -1, 3] {
        let (_, corr) = setup(ParticleKind::Electron, m);
        let s = azimuth_slope(&make_superposition_a(1, m).unwrap(), ParticleKind::Electron, &corr);
        let expected = 2.0 * f64::from(m.signum()) * corr.delta_beta_abs;
        assert!((s / expected - 1.0).abs() < 1e-6, "m = {m}: {s} vs {expected}");
    }
}

#[test]
fn pattern_turns_at_splitting_over_oam() {
    for particle in [ParticleKind::Photon, ParticleKind::Electron] {
        for (sigma, m) in [(1, 1), (1, 2), (-1, 2), (-1, 3)] {
            let (_, corr) = setup(particle, m);
            let s = pattern_slope(&make_superposition_b(sigma, m).unwrap(), particle, &corr);
            let expected = f64::from(sigma) * corr.delta_beta_abs / f64::from(m.abs());
            assert!((s / expected - 1.0).abs() < 1e-6, "{particle} sigma = {sigma}, m = {m}: {s} vs {expected}");
        }
    }
}

#[test]
fn temporal_and_spatial_evolution_coincide() {
    for particle in [ParticleKind::Photon, ParticleKind::Electron] {
        let spec = WaveguideSpec::step(particle, 8.0, 0.01);
        let mode = solve_mode(&spec, 2, 1).unwrap();
        let corr = delta_beta(&spec, &mode, QuantumNumbers::new(1, 2).unwrap()).unwrap();
        let dw = delta_omega(&spec, &mode, &corr).unwrap();
        let state = make_superposition_a(1, 2).unwrap();
        for z in [0.0, 1e3, 3.7e4, 1e6] {
            let t = corr.delta_beta_abs * z / dw;
            let a = evolve(&state, &corr, Propagation::Spatial { z });
            let b = evolve(&state, &corr, Propagation::Temporal { t, delta_omega: dw });
            assert!(a.fidelity(&b) >= 1.0 - 1e-12);
        }
    }
}

#[test]
fn one_beat_length_restores_the_state() {
    // the split pair re-phases after 2 pi / (2 |delta_beta|)
    let (_, corr) = setup(ParticleKind::Photon, 2);
    for state in [make_superposition_a(1, 2).unwrap(), make_superposition_b(-1, 2).unwrap()] {
        let half = evolve(&state, &corr, Propagation::Spatial { z: 0.5 * PI / corr.delta_beta_abs });
        let full = evolve(&state, &corr, Propagation::Spatial { z: PI / corr.delta_beta_abs });
        assert!(state.fidelity(&full) > 1.0 - 1e-12);
        assert!(state.fidelity(&half) < 1e-12);
    }
}

#[test]
fn flipped_handedness_reverses_rotation() {
    let (_, corr) = setup(ParticleKind::Photon, 2);
    let plus = pattern_slope(&make_superposition_b(1, 2).unwrap(), ParticleKind::Photon, &corr);
    let minus = pattern_slope(&make_superposition_b(-1, 2).unwrap(), ParticleKind::Photon, &corr);
    assert!(plus > 0.0 && (plus + minus).abs() < 1e-9 * plus);
}

fn state_from(parts: [(f64, f64); 4], m_abs: u32) -> Option<SpinOrbitState> {
    let amps = parts.map(|(re, im)| Complex64::new(re, im));
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-3 {
        return None;
    }
    SpinOrbitState::new(amps.map(|a| a / norm), m_abs).ok()
}

fn amp() -> impl Strategy<Value = (f64, f64)> {
    (-1.0f64..1.0, -1.0f64..1.0)
}

proptest! {
    #[test]
    fn evolution_is_unitary(parts in [amp(), amp(), amp(), amp()], z in 0.0f64..1e7, m in 1u32..4) {
        let Some(state) = state_from(parts, m) else { return Ok(()) };
        let corr = cached(ParticleKind::Photon, m);
        let out = evolve(&state, &corr, Propagation::Spatial { z });
        prop_assert!((out.norm_sq() - 1.0).abs() < 1e-12);
        prop_assert!((observables(&out, ParticleKind::Photon).norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spin_expectations_are_bounded(parts in [amp(), amp(), amp(), amp()], z in 0.0f64..1e6) {
        let Some(state) = state_from(parts, 2) else { return Ok(()) };
        let corr = cached(ParticleKind::Electron, 2);
        let out = evolve(&state, &corr, Propagation::Spatial { z });
        if let SpinObservable::Electron { spin } = observables(&out, ParticleKind::Electron).spin {
            let len = spin.iter().map(|s| s * s).sum::<f64>().sqrt();
            prop_assert!(len <= 0.5 + 1e-12);
        } else {
            prop_assert!(false, "electron observables expected");
        }
        if let SpinObservable::Photon { stokes } = observables(&out, ParticleKind::Photon).spin {
            let pol = (stokes[1] * stokes[1] + stokes[2] * stokes[2] + stokes[3] * stokes[3]).sqrt();
            prop_assert!(pol <= stokes[0] + 1e-12);
            prop_assert!((stokes[0] - 1.0).abs() < 1e-12);
        } else {
            prop_assert!(false, "photon observables expected");
        }
    }

    #[test]
    fn temporal_matches_spatial_for_any_state(parts in [amp(), amp(), amp(), amp()], x in 0.0f64..100.0) {
        let Some(state) = state_from(parts, 1) else { return Ok(()) };
        let corr = cached(ParticleKind::Electron, 1);
        let dw = 0.37;
        let a = evolve(&state, &corr, Propagation::Spatial { z: x / corr.delta_beta_abs });
        let b = evolve(&state, &corr, Propagation::Temporal { t: x / dw, delta_omega: dw });
        prop_assert!(a.fidelity(&b) >= 1.0 - 1e-12);
    }
}
