use std::f64::consts::PI;

use rayon::prelude::*;
use soi_core::entanglement::{fidelity, run_inverse, run_protocol, ProtocolTrace};
use soi_core::error::SoiError;
use soi_core::evolution::{self, make_superposition_a, make_superposition_b, observables, Propagation};
use soi_core::geometric::compare_at;
use soi_core::modes::{solve_mode, solve_modes};
use soi_core::soi::{delta_beta, delta_beta_step, delta_omega, SoiMethod};
use soi_core::types::{ParticleKind, QuantumNumbers, WaveguideSpec};

use crate::config::{Scenario, Superposition, Variant};
use crate::output::{Output, Table};
use crate::CliError;

const ALL_MODES: u32 = 10_000;

pub fn modes(sc: &Scenario) -> Result<Output, CliError> {
    let spec = sc.spec()?;
    let ms = sc.m_list(&[0, 1, 2, 3]);
    let solved: Vec<_> = ms
        .par_iter()
        .map(|&m| solve_modes(&spec, m.unsigned_abs(), ALL_MODES).map(|v| (m, v)))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&["m_abs", "p", "beta0_a", "kappa_a", "decay_cladding_a", "norm_n"]);
    let mut notes = Vec::new();
    let a = spec.a;
    for (m, found) in solved {
        if found.is_empty() {
            notes.push(format!("|m| = {}: below cutoff at V = {}, no guided modes", m.unsigned_abs(), spec.v_number()));
        }
        for (i, mode) in found.iter().enumerate() {
            table.push(vec![
                mode.m_abs.into(),
                (i as u32 + 1).into(),
                (mode.beta0 * a).into(),
                (mode.kappa * a).into(),
                (mode.decay_cladding * a).into(),
                mode.norm_n.into(),
            ]);
        }
    }
    Ok(Output { notes, ..Output::table(table) })
}

struct SoiRow {
    v: f64,
    m: i32,
    sigma: i32,
    beta0_a: f64,
    abs_a: f64,
    signed_a: f64,
    bracket: Option<f64>,
    method: SoiMethod,
    ratio_to_step: f64,
}

fn soi_rows(spec: &WaveguideSpec, qn: QuantumNumbers, p: u32) -> Result<Vec<SoiRow>, SoiError> {
    let a = spec.a;
    let v = spec.v_number();
    let mode = solve_mode(spec, qn.m_abs(), p)?;
    let corr = delta_beta(spec, &mode, qn)?;
    let row = |mode_beta0: f64, c: &soi_core::soi::SoiCorrection, ratio| SoiRow {
        v,
        m: qn.m_ell(),
        sigma: qn.sigma(),
        beta0_a: mode_beta0 * a,
        abs_a: c.delta_beta_abs * a,
        signed_a: c.signed(qn) * a,
        bracket: c.bracket_factor,
        method: c.method,
        ratio_to_step: ratio,
    };
    if spec.profile.is_step() {
        return Ok(vec![row(mode.beta0, &corr, 1.0)]);
    }
    // side by side with the sharp step of the same V and delta
    let step_spec = WaveguideSpec::with_v_number(spec.particle, v, spec.delta, soi_core::types::RadialProfile::Step);
    let step_mode = solve_mode(&step_spec, qn.m_abs(), p)?;
    let step = delta_beta_step(&step_spec, &step_mode, qn)?;
    let ratio = if step.delta_beta_abs > 0.0 {
        corr.delta_beta_abs / step.delta_beta_abs
    } else {
        f64::NAN
    };
    Ok(vec![row(mode.beta0, &corr, ratio), row(step_mode.beta0, &step, 1.0)])
}

pub fn soi(sc: &Scenario) -> Result<Output, CliError> {
    let mut points = Vec::new();
    for v in sc.v_list() {
        let spec = sc.spec_at(v)?;
        for &sigma in &sc.sigma_list() {
            for &m in &sc.m_list(&[1]) {
                points.push((spec.clone(), QuantumNumbers::new(sigma, m)?));
            }
        }
    }
    let rows: Vec<Vec<SoiRow>> = points.par_iter().map(|(spec, qn)| soi_rows(spec, *qn, sc.p)).collect::<Result<_, _>>()?;
    let mut table = Table::new(&[
        "V",
        "m_ell",
        "sigma",
        "beta0_a",
        "delta_beta_abs_a",
        "delta_beta_signed_a",
        "bracket_factor",
        "method",
        "ratio_to_step",
    ]);
    for r in rows.into_iter().flatten() {
        table.push(vec![
            r.v.into(),
            r.m.into(),
            r.sigma.into(),
            r.beta0_a.into(),
            r.abs_a.into(),
            r.signed_a.into(),
            r.bracket.into(),
            r.method.label().into(),
            r.ratio_to_step.into(),
        ]);
    }
    Ok(Output::table(table))
}

pub fn evolve(sc: &Scenario) -> Result<Output, CliError> {
    let ms = sc.m_list(&[2]);
    let [m] = ms[..] else {
        return Err(CliError::Config(format!("evolve needs a single m_ell, got {ms:?}")));
    };
    let sigma = sc.sigma.unwrap_or(1);
    let qn = QuantumNumbers::new(sigma, m)?;
    if m == 0 {
        return Err(CliError::Config("evolve needs m_ell != 0".into()));
    }
    let spec = sc.spec()?;
    let mode = solve_mode(&spec, qn.m_abs(), sc.p)?;
    let corr = delta_beta(&spec, &mode, qn)?;
    let state = match sc.superposition {
        Superposition::A => make_superposition_a(sigma, m)?,
        Superposition::B => make_superposition_b(sigma, m)?,
    };
    let db = corr.delta_beta_abs;
    // default: one beat period pi / |delta_beta|
    let z_max = sc.z_max.unwrap_or(PI / db);
    let zs: Vec<f64> = (0..sc.steps).map(|i| z_max * i as f64 / (sc.steps - 1) as f64).collect();
    let d_omega = match sc.variant {
        Variant::Spatial => None,
        Variant::Temporal => Some(delta_omega(&spec, &mode, &corr)?),
    };
    let obs: Vec<_> = zs
        .par_iter()
        .map(|&z| {
            let prop = match d_omega {
                None => Propagation::Spatial { z },
                Some(w) => Propagation::Temporal { t: z * db / w, delta_omega: w },
            };
            (z, observables(&evolution::evolve(&state, &corr, prop), spec.particle))
        })
        .collect();
    let rows = evolution::sweep_rows(&obs, &corr, spec.particle, qn.m_abs());
    let angle = match spec.particle {
        ParticleKind::Photon => "polarization_angle",
        ParticleKind::Electron => "spin_azimuth",
    };
    let coord = if d_omega.is_some() { "t" } else { "z" };
    let mut table = Table::new(&[coord, "splitting_phase", angle, "pattern_angle", "norm"]);
    for r in rows {
        let c = d_omega.map_or(r.z, |w| r.z * db / w);
        table.push(vec![c.into(), r.splitting_phase.into(), r.azimuth.into(), r.pattern_angle.into(), r.norm.into()]);
    }
    let notes = vec![format!("|delta_beta| a = {:e}, beat length = {:e} a", db * spec.a, PI / db / spec.a)];
    Ok(Output { notes, ..Output::table(table) })
}

pub fn geo(sc: &Scenario) -> Result<Output, CliError> {
    let vs = sc.v_values.clone().unwrap_or_else(|| vec![10.0, 20.0, 40.0, 80.0]);
    for &v in &vs {
        sc.spec_at(v)?;
    }
    let rows: Vec<_> = vs.par_iter().map(|&v| compare_at(v, sc.delta, sc.theta)).collect::<Result<_, _>>()?;
    let mut table = Table::new(&[
        "V",
        "m_ell_max",
        "theta",
        "bracket_factor",
        "delta_beta_step_a",
        "delta_beta_geo_a",
        "ratio",
        "particle",
    ]);
    for r in rows.into_iter().flatten() {
        table.push(vec![
            r.v.into(),
            r.m_ell_max.into(),
            r.theta.into(),
            r.bracket_factor.into(),
            r.delta_beta_step.into(),
            r.delta_beta_geo.into(),
            r.ratio.into(),
            r.particle.to_string().into(),
        ]);
    }
    Ok(Output::table(table))
}

#[derive(serde::Serialize)]
struct BellDocument {
    trace: ProtocolTrace,
    inverse_fidelity: f64,
}

pub fn bell(_sc: &Scenario) -> Result<Output, CliError> {
    let trace = run_protocol()?;
    let restored = run_inverse(&trace)?;
    let inverse_fidelity = fidelity(&restored, trace.initial());
    let mut table = Table::new(&[
        "step",
        "label",
        "norm",
        "waypoint_fidelity",
        "entropy_particle",
        "entropy_sam_1",
        "entropy_oam_1",
        "entropy_sam_2",
        "entropy_oam_2",
        "entropy_sam_vs_oam",
    ]);
    for (i, s) in trace.steps.iter().enumerate() {
        let e = s.entropies;
        table.push(vec![
            (i as u32).into(),
            s.label.clone().into(),
            s.norm.into(),
            s.waypoint_fidelity.into(),
            e.particle.into(),
            e.sam_1.into(),
            e.oam_1.into(),
            e.sam_2.into(),
            e.oam_2.into(),
            e.sam_vs_oam.into(),
        ]);
    }
    let st = trace.settings;
    let notes = vec![
        format!(
            "solved settings: SOI stage 1 {:.4} deg, plate retardance {:.4} deg at {:.4} deg, converter at {:.4} deg, SOI stage 2 {:.4} deg",
            st.stage1_phase.to_degrees(),
            st.plate_retardance.to_degrees(),
            st.plate_angle.to_degrees(),
            st.converter_angle.to_degrees(),
            st.stage3_phase.to_degrees()
        ),
        format!("inverse protocol fidelity with the initial state: {inverse_fidelity:.15}"),
    ];
    let document = serde_json::to_value(BellDocument { trace, inverse_fidelity }).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(Output {
        table,
        document: Some(document),
        notes,
    })
}
