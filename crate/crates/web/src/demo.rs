use std::f64::consts::PI;

use num_complex::Complex64;
use qnd_core::calibration::reflection_at_detuning;
use qnd_core::dynamics::PulseSchedule;
use qnd_core::model::QubitLevel;
use qnd_core::params::SystemParams;
use qnd_core::protocol::{efficiency_scan, run_protocol, Numerics, DEFAULT_PULSE_FWHM, TOMOGRAPHY_GATE_INTERVAL};
use qnd_core::tomography::{symmetric_axis, wigner};

const MAX_POINTS: usize = 4001;

fn err(e: qnd_core::Error) -> String {
    e.to_string()
}

pub fn spectrum(chi_mhz: f64, kappa_ex_mhz: f64, kappa_in_mhz: f64, span_mhz: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(2..=MAX_POINTS).contains(&points) || !(span_mhz > 0.0) {
        return Err(format!("need 2..={MAX_POINTS} points and a positive span"));
    }
    let mut p = SystemParams::table();
    p.dispersive_shift_hz = chi_mhz * 1e6;
    p.kappa_ex_hz = kappa_ex_mhz * 1e6;
    p.kappa_in_hz = kappa_in_mhz * 1e6;
    p.validate().map_err(err)?;
    let mut out = Vec::with_capacity(5 * points);
    for k in 0..points {
        let d = -0.5 * span_mhz + span_mhz * k as f64 / (points - 1) as f64;
        out.push(d);
        for q in QubitLevel::BOTH {
            let r = reflection_at_detuning(&p, q, 2.0 * PI * d * 1e6);
            out.extend([r.norm_sqr(), r.arg()]);
        }
    }
    Ok(out)
}

pub fn efficiency_curve(gate_interval_ns: f64, kappa_in_mhz: f64, t2_star_us: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(4..=25).contains(&points) {
        return Err("need 4..=25 photon numbers".into());
    }
    let mut p = SystemParams::table();
    p.kappa_in_hz = kappa_in_mhz * 1e6;
    p.t2_star = t2_star_us * 1e-6;
    p.validate().map_err(err)?;
    let s = PulseSchedule::ramsey(DEFAULT_PULSE_FWHM, gate_interval_ns * 1e-9, Complex64::new(0.0, 0.0)).map_err(err)?;
    let grid: Vec<f64> = (0..points).map(|k| 0.6 * k as f64 / (points - 1) as f64).collect();
    let r = efficiency_scan(&p, &s, &grid, &Numerics::default()).map_err(err)?;
    let mut out = vec![r.eta, r.dark_count];
    for (n, pe) in r.photon_numbers.iter().zip(&r.phase_flip) {
        out.extend([*n, *pe]);
    }
    Ok(out)
}

pub fn conditional_wigner(mean_photons: f64, outcome: u32, half: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(2..=201).contains(&points) || !(half > 0.0) {
        return Err("need 2..=201 points and a positive half width".into());
    }
    let s = PulseSchedule::ramsey(DEFAULT_PULSE_FWHM, TOMOGRAPHY_GATE_INTERVAL, Complex64::new(0.0, 0.0))
        .map_err(err)?
        .with_mean_photons(mean_photons);
    let r = run_protocol(&SystemParams::table(), &s, 2, &Numerics::default()).map_err(err)?;
    let state = match outcome {
        0 => &r.rho_g_readout,
        1 => &r.rho_e_readout,
        _ => &r.rho_uncond,
    };
    let axis = symmetric_axis(half, points);
    Ok(wigner(state, &axis, &axis).map_err(err)?.values)
}
