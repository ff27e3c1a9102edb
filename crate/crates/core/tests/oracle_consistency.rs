use std::path::PathBuf;

use soi_core::modes::solve_mode;
use soi_core::oracle::{eig_perturbed, eig_unperturbed, exact_shift, OracleRecord, RadialGrid};
use soi_core::soi::delta_beta_quadrature;
use soi_core::types::{ParticleKind, QuantumNumbers, RadialProfile, WaveguideSpec};

/// Set to rewrite `tests/fixtures/oracle_records.json` from the current oracle.
const REGENERATE_ENV: &str = "SOI_REGENERATE_FIXTURES";

fn smooth(v: f64, delta: f64, width: f64) -> WaveguideSpec {
    WaveguideSpec::with_v_number(ParticleKind::Photon, v, delta, RadialProfile::SmoothedStep { width })
}

fn qn(sigma: i32, m: i32) -> QuantumNumbers {
    QuantumNumbers::new(sigma, m).unwrap()
}

/// (exact shift, first-order shift) for the fundamental radial mode.
fn shifts(spec: &WaveguideSpec, sigma: i32, m: i32) -> (f64, f64) {
    let grid = RadialGrid::for_spec(spec);
    let base = eig_unperturbed(spec, m.unsigned_abs(), &grid).unwrap();
    let pert = eig_perturbed(spec, qn(sigma, m), 1, &grid).unwrap();
    let mode = solve_mode(spec, m.unsigned_abs(), 1).unwrap();
    let first = delta_beta_quadrature(spec, &mode, qn(sigma, m)).unwrap().signed(qn(sigma, m));
    (exact_shift(&pert, &base[0]), first)
}

#[test]
fn grid_refinement_converges() {
    for spec in [WaveguideSpec::step(ParticleKind::Photon, 5.0, 0.01), smooth(5.0, 0.01, 0.05)] {
        let k2 = spec.k_core * spec.k_core;
        let coarse = eig_unperturbed(&spec, 1, &RadialGrid::new(4096, 6.0)).unwrap();
        let fine = eig_unperturbed(&spec, 1, &RadialGrid::new(8192, 6.0)).unwrap();
        assert_eq!(coarse.len(), fine.len());
        for (c, f) in coarse.iter().zip(&fine) {
            assert!((c.beta_sq - f.beta_sq).abs() < 1e-6 * k2, "{} vs {} (k^2 = {k2})", c.beta_sq, f.beta_sq);
        }
    }
}

#[test]
fn exact_shift_flips_with_spin_and_vanishes_without_oam() {
    let spec = smooth(5.0, 0.01, 0.05);
    let (up, _) = shifts(&spec, 1, 1);
    let (down, _) = shifts(&spec, -1, 1);
    assert!(up < 0.0 && down > 0.0);
    assert!((up + down).abs() < 1e-3 * up.abs());

    let grid = RadialGrid::for_spec(&spec);
    let base = eig_unperturbed(&spec, 0, &grid).unwrap();
    let pert = eig_perturbed(&spec, qn(1, 0), 1, &grid).unwrap();
    assert_eq!(pert.beta_sq, base[0].beta_sq);
}

#[test]
fn exact_shift_agrees_to_first_order() {
    for (w, m) in [(0.05, 1), (0.2, 1), (0.05, 2)] {
        let (exact, first) = shifts(&smooth(5.0, 0.01, w), 1, m);
        assert!(exact.signum() == first.signum());
        assert!((exact / first - 1.0).abs() < 0.02, "w = {w}, m = {m}: {exact} vs {first}");
    }
}

#[test]
fn residual_is_second_order_in_delta_at_fixed_v() {
    // fixed V keeps the mode shape; beta0 grows as delta^{-1/2}, so the
    // beta^2 residual falls as delta^2 and the beta residual as delta^{5/2}
    let spec = |d| smooth(5.0, d, 0.05);
    let gap = |d: f64| {
        let s = spec(d);
        let (exact, first) = shifts(&s, 1, 1);
        let beta0 = solve_mode(&s, 1, 1).unwrap().beta0;
        ((exact - first).abs(), (exact - first).abs() * 2.0 * beta0)
    };
    let (g_hi, s_hi) = gap(0.02);
    let (g_lo, s_lo) = gap(0.01);
    let beta_ratio = g_hi / g_lo;
    let sq_ratio = s_hi / s_lo;
    assert!((beta_ratio / 2f64.powf(2.5) - 1.0).abs() < 0.05, "{beta_ratio}");
    assert!((sq_ratio / 4.0 - 1.0).abs() < 0.05, "{sq_ratio}");
}

fn fixture_cases() -> Vec<(WaveguideSpec, i32, i32)> {
    let step = WaveguideSpec::step(ParticleKind::Photon, 5.0, 0.01);
    let soft = smooth(5.0, 0.01, 0.1);
    vec![(step.clone(), 0, 0), (step, 1, 0), (soft.clone(), 1, 1), (soft.clone(), 1, -1), (soft, 2, 1)]
}

fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/oracle_records.json")
}

#[test]
fn oracle_matches_recorded_fixture() {
    let grid = RadialGrid::new(1024, 6.0);
    let records: Vec<OracleRecord> = fixture_cases()
        .iter()
        .map(|(spec, m, sigma)| OracleRecord::generate(spec, *m, *sigma, &grid).unwrap())
        .collect();
    let path = fixture_path();
    if std::env::var_os(REGENERATE_ENV).is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, serde_json::to_string_pretty(&records).unwrap() + "\n").unwrap();
        return;
    }
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}; run with {REGENERATE_ENV}=1", path.display()));
    let stored: Vec<OracleRecord> = serde_json::from_str(&text).unwrap();
    assert_eq!(stored.len(), records.len());
    for (s, r) in stored.iter().zip(&records) {
        assert_eq!((&s.spec, s.m, s.sigma, s.n, s.r_max), (&r.spec, r.m, r.sigma, r.n, r.r_max));
        assert_eq!(s.eigenvalues.len(), r.eigenvalues.len());
        for (a, b) in s.eigenvalues.iter().zip(&r.eigenvalues) {
            assert!((a - b).abs() <= 1e-12 * a.abs(), "{a} vs {b}");
        }
    }
}
