use approx::assert_relative_eq;
use proptest::prelude::*;
use soi_core::error::SoiError;
use soi_core::modes::{solve_mode, spec_at_frequency_scale, frequency};
use soi_core::soi::{delta_beta, delta_beta_quadrature, delta_beta_step, delta_omega, soi_phase};
use soi_core::types::{ParticleKind, QuantumNumbers, RadialProfile, WaveguideSpec};

const DELTA: f64 = 0.01;

// |delta_beta| a frozen from the independent scipy evaluation used in mode_solver.rs
const FROZEN_SHIFT: [(u32, f64, f64); 4] = [
    (1, 5.0, 3.1781644082853234e-05),
    (2, 5.0, 0.0001062966803668969),
    (3, 10.0, 4.4868844532874336e-05),
    (44, 50.0, 0.0004287640544689475),
];

fn step(particle: ParticleKind, v: f64) -> WaveguideSpec {
    WaveguideSpec::step(particle, v, DELTA)
}

fn smooth(v: f64, width: f64) -> WaveguideSpec {
    WaveguideSpec::with_v_number(ParticleKind::Photon, v, DELTA, RadialProfile::SmoothedStep { width })
}

fn qn(sigma: i32, m: i32) -> QuantumNumbers {
    QuantumNumbers::new(sigma, m).unwrap()
}

fn shift(spec: &WaveguideSpec, sigma: i32, m: i32) -> f64 {
    let mode = solve_mode(spec, m.unsigned_abs(), 1).unwrap();
    delta_beta(spec, &mode, qn(sigma, m)).unwrap().signed(qn(sigma, m))
}

#[test]
fn sign_table_for_unit_oam() {
    let spec = step(ParticleKind::Photon, 5.0);
    let table: Vec<f64> = [(1, 1), (1, -1), (-1, 1), (-1, -1)].iter().map(|&(s, m)| shift(&spec, s, m)).collect();
    let x = -table[0];
    assert!(x > 0.0);
    assert_eq!(table, vec![-x, x, x, -x]);
    assert_relative_eq!(x * spec.a, FROZEN_SHIFT[0].2, max_relative = 1e-8);
}

#[test]
fn closed_form_matches_frozen_shifts() {
    for (m, v, expected) in FROZEN_SHIFT {
        let spec = step(ParticleKind::Photon, v);
        let mode = solve_mode(&spec, m, 1).unwrap();
        let c = delta_beta_step(&spec, &mode, qn(1, m as i32)).unwrap();
        assert_relative_eq!(c.delta_beta_abs * spec.a, expected, max_relative = 1e-8);
    }
}

#[test]
fn zero_oam_has_no_shift() {
    for spec in [step(ParticleKind::Photon, 5.0), smooth(5.0, 0.05)] {
        let mode = solve_mode(&spec, 0, 1).unwrap();
        let c = delta_beta(&spec, &mode, qn(1, 0)).unwrap();
        assert_eq!(c.delta_beta_abs, 0.0);
        assert_eq!(soi_phase(&c, qn(1, 0), 10.0).unwrap(), 0.0);
    }
}

#[test]
fn narrow_smoothing_reproduces_closed_form() {
    for m in 1..=3u32 {
        let exact = step(ParticleKind::Photon, 8.0);
        let closed = delta_beta_step(&exact, &solve_mode(&exact, m, 1).unwrap(), qn(1, m as i32)).unwrap();
        let soft = smooth(8.0, 1e-3);
        let quad = delta_beta_quadrature(&soft, &solve_mode(&soft, m, 1).unwrap(), qn(1, m as i32)).unwrap();
        let rel = (quad.delta_beta_abs / closed.delta_beta_abs - 1.0).abs();
        assert!(rel < 1e-3, "|m| = {m}: relative gap {rel}");
    }
}

#[test]
fn smoothing_error_vanishes_quadratically_in_width() {
    let exact = step(ParticleKind::Photon, 5.0);
    let closed = delta_beta_step(&exact, &solve_mode(&exact, 1, 1).unwrap(), qn(1, 1)).unwrap().delta_beta_abs;
    let gap = |w: f64| {
        let s = smooth(5.0, w);
        (delta_beta_quadrature(&s, &solve_mode(&s, 1, 1).unwrap(), qn(1, 1)).unwrap().delta_beta_abs - closed).abs()
    };
    let (g1, g2) = (gap(0.1), gap(0.01));
    let ratio = g1 / g2;
    assert!((50.0..200.0).contains(&ratio), "error ratio {ratio}");
}

#[test]
fn frequency_splitting_agrees_with_dispersion_inversion() {
    // independent route: find the frequency at which the unperturbed beta has
    // moved by |delta_beta|, by bisection on re-solved modes
    for particle in [ParticleKind::Photon, ParticleKind::Electron] {
        let spec = step(particle, 5.0);
        let mode = solve_mode(&spec, 1, 1).unwrap();
        let corr = delta_beta_step(&spec, &mode, qn(1, 1)).unwrap();
        let target = mode.beta0 + corr.delta_beta_abs;
        let beta_at = |f: f64| solve_mode(&spec_at_frequency_scale(&spec, f), 1, 1).unwrap().beta0;
        let (mut lo, mut hi) = (1.0, 1.001);
        assert!(beta_at(hi) > target);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if beta_at(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let inverted = frequency(&spec_at_frequency_scale(&spec, 0.5 * (lo + hi))) - frequency(&spec);
        let dw = delta_omega(&spec, &mode, &corr).unwrap();
        assert!((dw / inverted - 1.0).abs() < 0.05, "{particle}: {dw} vs {inverted}");
    }
}

#[test]
fn dimensionless_shift_is_scale_invariant() {
    for spec in [step(ParticleKind::Photon, 5.0), smooth(5.0, 0.05)] {
        let base = shift(&spec, 1, 2) * spec.a;
        for factor in [0.25, 3.0, 1e3] {
            let big = spec.rescaled(factor);
            assert_relative_eq!(shift(&big, 1, 2) * big.a, base, max_relative = 1e-7);
        }
    }
}

#[test]
fn electrons_and_photons_share_the_splitting() {
    for v in [5.0, 20.0] {
        assert_eq!(shift(&step(ParticleKind::Photon, v), 1, 2), shift(&step(ParticleKind::Electron, v), 1, 2));
    }
}

#[test]
fn classical_limit_example() {
    // V = 50 at the largest guided |m| = 44
    let spec = step(ParticleKind::Photon, 50.0);
    let mode = solve_mode(&spec, 44, 1).unwrap();
    let c = delta_beta_step(&spec, &mode, qn(1, 44)).unwrap();
    let bracket = c.bracket_factor.unwrap();
    assert!((bracket - 1.0).abs() < 0.05);
    // the shift approaches (delta / 2a) * |m| / (beta0 a)
    let limit = DELTA / (2.0 * spec.a) * 44.0 / (mode.beta0 * spec.a);
    assert_relative_eq!(c.delta_beta_abs, limit * bracket, max_relative = 1e-12);
}

#[test]
fn mismatched_mode_is_rejected() {
    let spec = step(ParticleKind::Photon, 5.0);
    let mode = solve_mode(&spec, 1, 1).unwrap();
    assert!(matches!(delta_beta(&spec, &mode, qn(1, 2)), Err(SoiError::InvalidQuantumNumbers(_))));
    assert!(matches!(delta_beta_quadrature(&spec, &mode, qn(1, 1)), Err(SoiError::WrongProfile { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn splitting_symmetries(v in 3.0f64..30.0, m_frac in 0.0f64..1.0, smoothing in prop::bool::ANY) {
        let spec = if smoothing { smooth(v, 0.05) } else { step(ParticleKind::Photon, v) };
        let m_max = soi_core::modes::max_guided_m(&spec).unwrap().max(1);
        let m = 1 + ((m_max - 1) as f64 * m_frac).round() as i32;
        prop_assume!(solve_mode(&spec, m as u32, 1).is_ok());
        let pp = shift(&spec, 1, m);
        prop_assert!(pp < 0.0);
        prop_assert_eq!(pp, shift(&spec, -1, -m));
        prop_assert_eq!(pp, -shift(&spec, -1, m));
        prop_assert_eq!(pp, -shift(&spec, 1, -m));
    }
}
