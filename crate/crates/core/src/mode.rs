//! Temporal modes of the itinerant pulse.
//!
//! A mode is stored both as an analytic Gaussian (used by the integrators,
//! which need the envelope between grid points) and as samples on a
//! uniform grid. Time `t` is the moment the corresponding slice of the
//! pulse reaches the cavity, so the input envelope is centred at `t = 0`
//! and the reflected mode is the same envelope centred at the delay `τ_d`.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalMode {
    fwhm: f64,
    center: f64,
    t: Vec<f64>,
    envelope: Vec<Complex64>,
}

/// Gaussian input mode with amplitude FWHM `fwhm`, sampled on `[-span/2, span/2]`.
pub fn gaussian_input_mode(fwhm: f64, span: f64, dt: f64) -> Result<TemporalMode> {
    TemporalMode::gaussian(fwhm, 0.0, span, dt)
}

impl TemporalMode {
    pub fn gaussian(fwhm: f64, center: f64, span: f64, dt: f64) -> Result<Self> {
        if !(fwhm > 0.0) || !(dt > 0.0) {
            return Err(Error::InvalidParameter("pulse length and time step must be positive".into()));
        }
        if span < 4.0 * fwhm {
            return Err(Error::InvalidParameter(format!("span {span:e} s shorter than 4 pulse lengths")));
        }
        if dt > fwhm / 20.0 {
            return Err(Error::InvalidParameter(format!("time step {dt:e} s undersamples the pulse")));
        }
        let n = (span / dt).round() as usize + 1;
        let t0 = center - 0.5 * (n - 1) as f64 * dt;
        let t: Vec<f64> = (0..n).map(|k| t0 + k as f64 * dt).collect();
        let mut mode = Self { fwhm, center, t, envelope: Vec::new() };
        mode.envelope = mode.t.iter().map(|&s| Complex64::new(mode.amplitude(s), 0.0)).collect();
        Ok(mode)
    }

    pub fn fwhm(&self) -> f64 {
        self.fwhm
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn envelope(&self) -> &[Complex64] {
        &self.envelope
    }

    pub fn dt(&self) -> f64 {
        self.t[1] - self.t[0]
    }

    /// Peak value (8 ln2 / π l²)^{1/4}.
    pub fn peak_amplitude(&self) -> f64 {
        (8.0 * LN_2 / (PI * self.fwhm * self.fwhm)).powf(0.25)
    }

    /// Analytic envelope (8 ln2 / π l²)^{1/4} 2^{-(2(t - t₀)/l)²}.
    pub fn amplitude(&self, t: f64) -> f64 {
        let x = 2.0 * (t - self.center) / self.fwhm;
        self.peak_amplitude() * (-LN_2 * x * x).exp()
    }

    /// Standard deviation of |f|² seen as a probability density.
    pub fn intensity_sigma(&self) -> f64 {
        self.fwhm / (4.0 * LN_2.sqrt())
    }

    /// ∫_{a}^{b} |f(t)|² dt in closed form.
    pub fn weight_between(&self, a: f64, b: f64) -> f64 {
        self.shifted_weight_between(0.0, a, b)
    }

    /// ∫_{a}^{b} |f(t − shift)|² dt.
    pub fn shifted_weight_between(&self, shift: f64, a: f64, b: f64) -> f64 {
        let s = self.intensity_sigma() * std::f64::consts::SQRT_2;
        let c = self.center + shift;
        let za = (a - c) / s;
        let zb = (b - c) / s;
        if za > 0.0 {
            0.5 * (libm::erfc(za) - libm::erfc(zb))
        } else if zb < 0.0 {
            0.5 * (libm::erfc(-zb) - libm::erfc(-za))
        } else {
            0.5 * (libm::erf(zb) - libm::erf(za))
        }
    }

    /// Same envelope shifted later by `tau`.
    pub fn delayed(&self, tau: f64) -> Self {
        Self {
            fwhm: self.fwhm,
            center: self.center + tau,
            t: self.t.iter().map(|x| x + tau).collect(),
            envelope: self.envelope.clone(),
        }
    }

    /// Σ|f|²Δt on the grid (trapezoid).
    pub fn norm(&self) -> f64 {
        let dt = self.dt();
        let n = self.envelope.len();
        let s: f64 = self.envelope.iter().map(|z| z.norm_sqr()).sum();
        (s - 0.5 * (self.envelope[0].norm_sqr() + self.envelope[n - 1].norm_sqr())) * dt
    }

    /// Width of the grid region where |f| ≥ max|f|/2.
    pub fn measured_fwhm(&self) -> f64 {
        let half = 0.5 * self.peak_amplitude();
        let inside: Vec<f64> = self
            .t
            .iter()
            .zip(&self.envelope)
            .filter(|(_, z)| z.norm() >= half)
            .map(|(t, _)| *t)
            .collect();
        inside.last().unwrap_or(&0.0) - inside.first().unwrap_or(&0.0)
    }
}
