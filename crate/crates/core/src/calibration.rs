//! Closed-form calibration formulas: reflection spectra, drive-induced
//! dephasing, reflected photon number and thermal-photon bounds.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode::TemporalMode;
use crate::model::QubitLevel;
use crate::params::SystemParams;

/// Reflection coefficient at detuning `delta = ω − ω_c` (rad/s).
///
/// r(ω) = [i(ω−ω_r) + (κ_ex−κ_in)/2] / [−i(ω−ω_r) + (κ_ex+κ_in)/2] with
/// ω_r = ω_c + χ for g and ω_c − χ for e.
pub fn reflection_at_detuning(p: &SystemParams, qubit: QubitLevel, delta: f64) -> Complex64 {
    let shift = match qubit {
        QubitLevel::Ground => p.chi(),
        QubitLevel::Excited => -p.chi(),
    };
    let d = delta - shift;
    let num = Complex64::new(0.5 * (p.kappa_ex() - p.kappa_in()), d);
    let den = Complex64::new(0.5 * (p.kappa_ex() + p.kappa_in()), -d);
    num / den
}

/// Reflection coefficient at absolute angular frequency `omega` (rad/s).
pub fn reflection_coefficient(p: &SystemParams, qubit: QubitLevel, omega: f64) -> Complex64 {
    reflection_at_detuning(p, qubit, omega - p.omega_c())
}

/// Cavity-drive-induced dephasing rate Γ_m for a drive of photon flux
/// `ndot` at detuning `delta_d` from ω_c.
pub fn drive_induced_dephasing(p: &SystemParams, ndot: f64, delta_d: f64) -> f64 {
    let kt = p.kappa_tot();
    let chi = p.chi();
    let nbar = |s: f64| p.kappa_ex() * ndot / (0.25 * kt * kt + (delta_d + s * chi).powi(2));
    kt * chi * chi / (0.25 * kt * kt + chi * chi + delta_d * delta_d) * (nbar(1.0) + nbar(-1.0))
}

/// Spectral weight |f̃(δ)|² of a temporal mode, returned as pairs
/// `(δ, |f̃|² Δδ / 2π)` so that the weights sum to the mode norm.
pub fn mode_spectrum(mode: &TemporalMode) -> Vec<(f64, f64)> {
    let dt = mode.dt();
    let span = mode.times().len() as f64 * dt;
    let min_len = ((8.0 * mode.fwhm()).max(span) / dt).ceil() as usize;
    let n = (2 * min_len).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[..mode.envelope().len()].copy_from_slice(mode.envelope());
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let dw = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    buf.iter()
        .enumerate()
        .map(|(k, z)| {
            let ks = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
            // forward FFT carries e^{-iωt}; a field component e^{-iδt}
            // therefore shows up at ω = −δ
            (-ks * dw, z.norm_sqr() * dt * dt * dw / (2.0 * std::f64::consts::PI))
        })
        .collect()
}

/// Mean photon number of the reflected pulse with the qubit in g:
/// n_out = n_in ∫ |r_g(ω)|² |f̃(ω)|² dω/2π.
pub fn reflected_photon_number(p: &SystemParams, mode: &TemporalMode, n_in: f64) -> Result<f64> {
    if !(n_in >= 0.0) {
        return Err(Error::InvalidParameter(format!("input photon number {n_in} must be non-negative")));
    }
    let spec = mode_spectrum(mode);
    let total: f64 = spec.iter().map(|(_, w)| w).sum();
    if (total - 1.0).abs() > 1e-4 {
        return Err(Error::InvalidParameter(format!("temporal mode norm {total} is not 1")));
    }
    let s: f64 = spec
        .iter()
        .map(|&(d, w)| reflection_at_detuning(p, QubitLevel::Ground, d).norm_sqr() * w)
        .sum();
    Ok(n_in * s / total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalBounds {
    /// Upper bound on the cavity thermal occupation from echo dephasing.
    pub n_th_max: f64,
    /// Thermal photons falling into the pulse mode.
    pub n_th_pulse: f64,
    /// Efficiency penalty 1/(1 + 2 n_th^P) from thermal photons.
    pub eta_th: f64,
}

/// Thermal-photon bounds for the cavity. The pulse-mode occupation is the
/// outgoing thermal flux κ_ex n_th integrated over the effective duration
/// ∫|f|²dt / max|f|² of the mode.
pub fn thermal_bounds(p: &SystemParams, mode: &TemporalMode) -> ThermalBounds {
    let kt = p.kappa_tot();
    let chi = p.chi();
    let n_th_max = (kt * kt + chi * chi) / (4.0 * kt * chi * chi) * p.gamma_phi_echo();
    let duration = 1.0 / mode.peak_amplitude().powi(2);
    let n_th_pulse = p.kappa_ex() * p.cavity_thermal_photons * duration;
    ThermalBounds { n_th_max, n_th_pulse, eta_th: 1.0 / (1.0 + 2.0 * n_th_pulse) }
}
