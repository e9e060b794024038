//! Physical parameters of the qubit-cavity device.
//!
//! Frequencies and rates are stored exactly as they are usually quoted,
//! i.e. as ω/2π in Hz. The accessor methods return angular quantities in
//! rad/s, which is what every formula in the crate uses.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemParams {
    /// ω_c/2π (Hz)
    pub cavity_frequency_hz: f64,
    /// ω_q/2π (Hz)
    pub qubit_frequency_hz: f64,
    /// χ/2π (Hz)
    pub dispersive_shift_hz: f64,
    /// κ_ex/2π (Hz)
    pub kappa_ex_hz: f64,
    /// κ_in/2π (Hz)
    pub kappa_in_hz: f64,
    /// Transmon anharmonicity α/2π (Hz). Kept for completeness; the qubit
    /// is modelled as a two-level system.
    pub anharmonicity_hz: f64,
    /// Energy relaxation time (s).
    pub t1: f64,
    /// Ramsey dephasing time (s).
    pub t2_star: f64,
    /// Echo dephasing time (s).
    pub t2_echo: f64,
    /// Thermal excited-state population of the qubit.
    pub thermal_population: f64,
    /// Thermal photon occupation of the cavity.
    pub cavity_thermal_photons: f64,
    /// Probability of reading e when the qubit is in g (includes
    /// initialisation error).
    pub readout_error_g: f64,
    /// Probability of reading g when the qubit is in e.
    pub readout_error_e: f64,
    /// Transmittance of the quadrature measurement chain.
    pub measurement_efficiency: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::table()
    }
}

impl SystemParams {
    /// Device parameters of the reference experiment, with readout errors set
    /// to their measured upper bounds.
    pub fn table() -> Self {
        Self {
            cavity_frequency_hz: 10.62524e9,
            qubit_frequency_hz: 7.8693e9,
            dispersive_shift_hz: 1.50e6,
            kappa_ex_hz: 3.32e6,
            kappa_in_hz: 0.25e6,
            anharmonicity_hz: -0.344e9,
            t1: 32e-6,
            t2_star: 26e-6,
            t2_echo: 33e-6,
            thermal_population: 0.067,
            cavity_thermal_photons: 0.0005,
            readout_error_g: 0.0016,
            readout_error_e: 0.022,
            measurement_efficiency: 0.43,
        }
    }

    /// Ideal detector: κ_ex = 2χ, no internal loss, no qubit decoherence and
    /// perfect readout.
    pub fn ideal() -> Self {
        let base = Self::table();
        Self {
            kappa_ex_hz: 2.0 * base.dispersive_shift_hz,
            kappa_in_hz: 0.0,
            t1: f64::INFINITY,
            t2_star: f64::INFINITY,
            t2_echo: f64::INFINITY,
            thermal_population: 0.0,
            cavity_thermal_photons: 0.0,
            readout_error_g: 0.0,
            readout_error_e: 0.0,
            ..base
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("cavity_frequency_hz", self.cavity_frequency_hz),
            ("qubit_frequency_hz", self.qubit_frequency_hz),
            ("dispersive_shift_hz", self.dispersive_shift_hz),
            ("kappa_ex_hz", self.kappa_ex_hz),
            ("kappa_in_hz", self.kappa_in_hz),
            ("t1", self.t1),
            ("t2_star", self.t2_star),
            ("t2_echo", self.t2_echo),
            ("cavity_thermal_photons", self.cavity_thermal_photons),
        ];
        for (name, v) in nonneg {
            if v.is_nan() || v < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be non-negative, got {v}")));
            }
        }
        for (name, v) in [("t1", self.t1), ("t2_star", self.t2_star), ("t2_echo", self.t2_echo)] {
            if v == 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        let unit = [
            ("thermal_population", self.thermal_population),
            ("readout_error_g", self.readout_error_g),
            ("readout_error_e", self.readout_error_e),
            ("measurement_efficiency", self.measurement_efficiency),
        ];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.gamma_phi() < -1e-12 * self.gamma_phi_total().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "T2* = {} exceeds 2 T1 = {}: negative pure dephasing",
                self.t2_star,
                2.0 * self.t1
            )));
        }
        Ok(())
    }

    pub fn omega_c(&self) -> f64 {
        TWO_PI * self.cavity_frequency_hz
    }

    pub fn omega_q(&self) -> f64 {
        TWO_PI * self.qubit_frequency_hz
    }

    pub fn chi(&self) -> f64 {
        TWO_PI * self.dispersive_shift_hz
    }

    pub fn kappa_ex(&self) -> f64 {
        TWO_PI * self.kappa_ex_hz
    }

    pub fn kappa_in(&self) -> f64 {
        TWO_PI * self.kappa_in_hz
    }

    pub fn kappa_tot(&self) -> f64 {
        self.kappa_ex() + self.kappa_in()
    }

    /// n_B = p_th/(1 + 2 p_th), thermal occupation of the qubit bath.
    pub fn n_bath(&self) -> f64 {
        self.thermal_population / (1.0 + 2.0 * self.thermal_population)
    }

    /// γ = 1/((1 + 2 n_B) T₁)
    pub fn gamma(&self) -> f64 {
        1.0 / ((1.0 + 2.0 * self.n_bath()) * self.t1)
    }

    /// Downward rate γ₁ = γ(1 + n_B).
    pub fn gamma_down(&self) -> f64 {
        self.gamma() * (1.0 + self.n_bath())
    }

    /// Upward rate γ₂ = γ n_B.
    pub fn gamma_up(&self) -> f64 {
        self.gamma() * self.n_bath()
    }

    /// Pure dephasing γ_φ = 1/T₂* − 1/(2T₁).
    pub fn gamma_phi(&self) -> f64 {
        1.0 / self.t2_star - 0.5 / self.t1
    }

    /// Coherence decay rate γ_φ + (γ₁ + γ₂)/2.
    pub fn gamma_phi_total(&self) -> f64 {
        self.gamma_phi() + 0.5 * (self.gamma_down() + self.gamma_up())
    }

    /// Echo pure dephasing γ_φE = 1/T₂E − 1/(2T₁).
    pub fn gamma_phi_echo(&self) -> f64 {
        1.0 / self.t2_echo - 0.5 / self.t1
    }

    /// Change γ keeping n_B and γ_φ fixed.
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        let gphi = self.gamma_phi();
        self.t1 = 1.0 / ((1.0 + 2.0 * self.n_bath()) * gamma);
        self.t2_star = 1.0 / (gphi + 0.5 / self.t1);
        self
    }

    /// Change γ_φ keeping T₁ fixed.
    pub fn with_gamma_phi(mut self, gamma_phi: f64) -> Self {
        self.t2_star = 1.0 / (gamma_phi + 0.5 / self.t1);
        self
    }

    pub fn with_kappa_ex(mut self, kappa_ex: f64) -> Self {
        self.kappa_ex_hz = kappa_ex / TWO_PI;
        self
    }

    pub fn with_kappa_in(mut self, kappa_in: f64) -> Self {
        self.kappa_in_hz = kappa_in / TWO_PI;
        self
    }

    pub fn without_readout_errors(mut self) -> Self {
        self.readout_error_g = 0.0;
        self.readout_error_e = 0.0;
        self
    }
}
