//! The five pipelines. Each one returns the files it wants written, keyed by
//! name, so the caller controls where they land.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use qnd_core::calibration::{reflected_photon_number, reflection_coefficient};
use qnd_core::dynamics::PulseSchedule;
use qnd_core::linalg::QuantumState;
use qnd_core::model::QubitLevel;
use qnd_core::protocol::{efficiency_scan, entanglement_report, run_protocol, sweep, Numerics, ProtocolResult};
use qnd_core::tomography::{
    apply_loss, build_povms, composite_mle, default_phases, mle_reconstruct, photon_distribution, sample, sample_composite,
    symmetric_axis, wigner, MleOptions, QuadratureGrid,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, Stage};
use crate::CliError;

pub type Files = Vec<(String, String)>;

fn json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn numerics(cfg: &RunConfig) -> Numerics {
    Numerics { cavity_levels: cfg.schedule.cavity_levels, max_dt: cfg.schedule.max_dt }
}

pub fn schedule(cfg: &RunConfig) -> Result<PulseSchedule, CliError> {
    let s = &cfg.schedule;
    let interval = s.gate_interval.expect("resolved");
    let mut sched = PulseSchedule::ramsey(s.pulse_fwhm, interval, Complex64::new(0.0, 0.0))?.with_mean_photons(s.mean_photons);
    sched.t_i = s.t_i.expect("resolved");
    sched.t_g = s.t_g.expect("resolved");
    sched.t_f = s.t_f.expect("resolved");
    sched.max_dt = s.max_dt;
    sched.validate()?;
    Ok(sched)
}

fn density_csv(state: &QuantumState) -> String {
    let m = state.matrix();
    let mut out = String::from("row,col,re,im\n");
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let z = m[(i, j)];
            writeln!(out, "{i},{j},{:.16e},{:.16e}", z.re, z.im).unwrap();
        }
    }
    out
}

#[derive(Serialize)]
struct SpectrumSummary {
    cavity_frequency_hz: f64,
    dispersive_shift_hz: f64,
    dip_g_hz: f64,
    dip_e_hz: f64,
    min_reflectance_g: f64,
    min_reflectance_e: f64,
    differential_phase_at_center: f64,
    reflected_photons: f64,
    input_photons: f64,
}

pub fn spectrum(cfg: &RunConfig) -> Result<Files, CliError> {
    let p = &cfg.params;
    let sp = &cfg.spectrum;
    if sp.points < 2 || !(sp.span_hz > 0.0) {
        return Err(CliError::Config("[spectrum]: need points ≥ 2 and span_hz > 0".into()));
    }
    let f0 = p.cavity_frequency_hz;
    let mut csv = String::from("frequency_hz,reflectance_g,phase_g,reflectance_e,phase_e\n");
    let (mut dip_g, mut dip_e) = ((f64::INFINITY, f0), (f64::INFINITY, f0));
    for k in 0..sp.points {
        let f = f0 - 0.5 * sp.span_hz + sp.span_hz * k as f64 / (sp.points - 1) as f64;
        let rg = reflection_coefficient(p, QubitLevel::Ground, 2.0 * PI * f);
        let re = reflection_coefficient(p, QubitLevel::Excited, 2.0 * PI * f);
        let (ag, ae) = (rg.norm_sqr(), re.norm_sqr());
        if ag < dip_g.0 {
            dip_g = (ag, f);
        }
        if ae < dip_e.0 {
            dip_e = (ae, f);
        }
        writeln!(csv, "{f:.16e},{ag:.16e},{:.16e},{ae:.16e},{:.16e}", rg.arg(), re.arg()).unwrap();
    }
    let w0 = p.omega_c();
    let dphi = (reflection_coefficient(p, QubitLevel::Excited, w0) / reflection_coefficient(p, QubitLevel::Ground, w0)).arg();
    let sched = schedule(cfg)?;
    let summary = SpectrumSummary {
        cavity_frequency_hz: f0,
        dispersive_shift_hz: p.dispersive_shift_hz,
        dip_g_hz: dip_g.1,
        dip_e_hz: dip_e.1,
        min_reflectance_g: dip_g.0,
        min_reflectance_e: dip_e.0,
        differential_phase_at_center: dphi.abs(),
        reflected_photons: reflected_photon_number(p, &sched.mode, cfg.schedule.mean_photons)?,
        input_photons: cfg.schedule.mean_photons,
    };
    Ok(vec![("spectrum.csv".into(), csv), ("spectrum.json".into(), json(&summary)?)])
}

pub fn efficiency(cfg: &RunConfig) -> Result<Files, CliError> {
    let r = efficiency_scan(&cfg.params, &schedule(cfg)?, &cfg.schedule.photon_grid, &numerics(cfg))?;
    let mut csv = String::from("mean_photons,phase_flip,quadratic_fit\n");
    for (n, pe) in r.photon_numbers.iter().zip(&r.phase_flip) {
        let fit = r.fit[0] + r.fit[1] * n + r.fit[2] * n * n;
        writeln!(csv, "{n:.16e},{pe:.16e},{fit:.16e}").unwrap();
    }
    #[derive(Serialize)]
    struct Report<'a> {
        sublinearity_at_0_6: f64,
        #[serde(flatten)]
        scan: &'a qnd_core::protocol::EfficiencyReport,
    }
    let rep = Report { sublinearity_at_0_6: r.sublinearity(), scan: &r };
    Ok(vec![("efficiency.csv".into(), csv), ("efficiency.json".into(), json(&rep)?)])
}

#[derive(Serialize)]
struct ProtocolSummary {
    mean_photons: f64,
    photon_truncation: usize,
    output_delay: f64,
    p_g: f64,
    p_e: f64,
    p_e_reported: f64,
    survival: f64,
    negativity: f64,
    fidelity_vacuum: f64,
    fidelity_single_photon: f64,
    fidelity_ideal_composite: f64,
    mode_phase: f64,
    truncation_population: f64,
}

pub fn protocol(cfg: &RunConfig) -> Result<Files, CliError> {
    let r: ProtocolResult = run_protocol(&cfg.params, &schedule(cfg)?, cfg.schedule.photon_truncation, &numerics(cfg))?;
    let ent = entanglement_report(&r)?;
    let named = [
        ("rho_g", &r.rho_g),
        ("rho_e", &r.rho_e),
        ("rho_g_readout", &r.rho_g_readout),
        ("rho_e_readout", &r.rho_e_readout),
        ("rho_uncond", &r.rho_uncond),
    ];
    let mut files: Files = named.iter().map(|(n, s)| (format!("{n}.csv"), density_csv(s))).collect();
    files.push(("composite.csv".into(), density_csv(&r.composite)));
    files.push(("qubit.csv".into(), density_csv(&r.qubit)));

    let dists = named.iter().map(|(_, s)| photon_distribution(s)).collect::<Result<Vec<_>, _>>()?;
    let mut pd = String::from("n");
    for (n, _) in &named {
        write!(pd, ",{n}").unwrap();
    }
    pd.push('\n');
    for k in 0..dists[0].len() {
        write!(pd, "{k}").unwrap();
        for d in &dists {
            write!(pd, ",{:.16e}", d[k]).unwrap();
        }
        pd.push('\n');
    }
    files.push(("photon_distribution.csv".into(), pd));

    let axis = symmetric_axis(cfg.protocol.wigner_half_width, cfg.protocol.wigner_points);
    for (n, s) in [("g", &r.rho_g_readout), ("e", &r.rho_e_readout), ("uncond", &r.rho_uncond)] {
        files.push((format!("wigner_{n}.csv"), wigner(s, &axis, &axis)?.to_csv()));
    }
    let summary = ProtocolSummary {
        mean_photons: r.mean_photons,
        photon_truncation: r.photon_truncation,
        output_delay: r.output_delay,
        p_g: r.p_g,
        p_e: r.p_e,
        p_e_reported: r.p_e_reported,
        survival: r.survival,
        negativity: ent.negativity,
        fidelity_vacuum: r.fidelity_vacuum,
        fidelity_single_photon: r.fidelity_single_photon,
        fidelity_ideal_composite: ent.fidelity_to_ideal,
        mode_phase: ent.mode_phase,
        truncation_population: r.truncation_population,
    };
    files.push(("protocol.json".into(), json(&summary)?));
    Ok(files)
}

#[derive(Serialize)]
struct SelftestRow {
    case: &'static str,
    corrected: bool,
    mean_photons: f64,
    fidelity: f64,
    negativity: f64,
    iterations: usize,
    converged: bool,
}

pub fn tomo_selftest(cfg: &RunConfig) -> Result<Files, CliError> {
    let t = &cfg.tomography;
    let seed = t.seed.ok_or_else(|| CliError::Config("tomo-selftest needs a seed ([tomography] seed or --seed)".into()))?;
    let eta = t.eta.expect("resolved");
    if t.phases == 0 || t.shots == 0 {
        return Err(CliError::Config("[tomography]: phases and shots must be positive".into()));
    }
    let grid = QuadratureGrid::default();
    let thetas = default_phases(t.phases);
    let opts = MleOptions { max_iterations: t.iterations, tolerance: t.tolerance };

    let coherent = QuantumState::coherent(t.levels, Complex64::new(t.coherent_photons.sqrt(), 0.0))?;
    let lossy_coherent = QuantumState::coherent(t.levels, Complex64::new((eta * t.coherent_photons).sqrt(), 0.0))?;
    let single = sample(&coherent, &thetas, t.shots, eta, grid, seed)?;

    let r = run_protocol(&cfg.params, &schedule(cfg)?, cfg.schedule.photon_truncation, &numerics(cfg))?;
    let composite = r.composite;
    if composite.dims()[1] != t.composite_levels {
        return Err(CliError::Config(format!(
            "[tomography]: composite_levels = {} must equal photon_truncation + 1 = {}",
            t.composite_levels,
            composite.dims()[1]
        )));
    }
    let lossy_composite = apply_loss(&composite, eta, 1)?;
    let joint = sample_composite(&composite, &thetas, t.shots, eta, grid, seed.wrapping_add(1))?;

    let cases: [(&'static str, bool); 4] = [("coherent", false), ("coherent", true), ("composite", false), ("composite", true)];
    let rows = cases
        .par_iter()
        .map(|&(case, corrected)| -> Result<SelftestRow, CliError> {
            let e = if corrected { eta } else { 1.0 };
            let (state, res) = if case == "coherent" {
                let res = mle_reconstruct(&single, &build_povms(&thetas, e, t.levels, grid)?, &opts)?;
                let target = if corrected { &coherent } else { &lossy_coherent };
                (res.state.fidelity(target)?, res)
            } else {
                let res = composite_mle(&joint, &build_povms(&thetas, e, t.composite_levels, grid)?, &opts)?;
                let target = if corrected { &composite } else { &lossy_composite };
                (res.state.fidelity(target)?, res)
            };
            let mode = if case == "coherent" { res.state.clone() } else { res.state.partial_trace(&[1])? };
            let mean_photons = photon_distribution(&mode)?.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
            let negativity = if case == "coherent" { 0.0 } else { res.state.negativity(1)? };
            Ok(SelftestRow {
                case,
                corrected,
                mean_photons,
                fidelity: state,
                negativity,
                iterations: res.iterations,
                converged: res.converged,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut csv = String::from("case,corrected,mean_photons,fidelity,negativity,iterations,converged\n");
    for r in &rows {
        writeln!(
            csv,
            "{},{},{:.16e},{:.16e},{:.16e},{},{}",
            r.case, r.corrected, r.mean_photons, r.fidelity, r.negativity, r.iterations, r.converged
        )
        .unwrap();
    }
    #[derive(Serialize)]
    struct Report<'a> {
        seed: u64,
        eta: f64,
        true_composite_negativity: f64,
        lossy_composite_negativity: f64,
        rows: &'a [SelftestRow],
    }
    let rep = Report {
        seed,
        eta,
        true_composite_negativity: composite.negativity(1)?,
        lossy_composite_negativity: lossy_composite.negativity(1)?,
        rows: &rows,
    };
    Ok(vec![
        ("selftest.csv".into(), csv),
        ("selftest.json".into(), json(&rep)?),
        ("coherent_record.csv".into(), single.to_csv()),
        ("composite_record.csv".into(), joint.to_csv()),
    ])
}

pub fn sweep_cmd(cfg: &RunConfig) -> Result<Files, CliError> {
    let values = cfg.sweep.values.as_deref().expect("resolved");
    if values.is_empty() {
        return Err(CliError::Config("[sweep]: values must not be empty".into()));
    }
    let table = sweep(&cfg.params, &schedule(cfg)?, cfg.sweep.axis, values, &cfg.schedule.photon_grid, &numerics(cfg))?;
    let mut csv = format!("{},eta,dark_count,survival,negativity\n", table.axis.name());
    for r in &table.rows {
        writeln!(csv, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", r.value, r.eta, r.dark_count, r.survival, r.negativity).unwrap();
    }
    #[derive(Serialize)]
    struct Report<'a> {
        argmax_eta: f64,
        #[serde(flatten)]
        table: &'a qnd_core::protocol::SweepTable,
    }
    let rep = Report { argmax_eta: table.argmax_eta(), table: &table };
    Ok(vec![("sweep.csv".into(), csv), ("sweep.json".into(), json(&rep)?)])
}

pub fn run(stage: Stage, cfg: &RunConfig) -> Result<Files, CliError> {
    match stage {
        Stage::Spectrum => spectrum(cfg),
        Stage::Efficiency => efficiency(cfg),
        Stage::Protocol => protocol(cfg),
        Stage::TomoSelftest => tomo_selftest(cfg),
        Stage::Sweep => sweep_cmd(cfg),
    }
}
