//! The full detection protocol: Ramsey sequence around the reflected pulse,
//! conditional output states, the composite qubit ⊗ mode state, efficiency
//! scans and parameter sweeps.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{moments::moments_with_state, output_mode_moments, phase_flip_expansion, OutputMoments, PulseSchedule};
use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix, QuantumState};
use crate::model::build_model;
use crate::params::SystemParams;

/// Default cavity truncation.
pub const DEFAULT_CAVITY_LEVELS: usize = 7;
/// Default pulse length (amplitude FWHM).
pub const DEFAULT_PULSE_FWHM: f64 = 500e-9;
/// Gate interval used for efficiency measurements.
pub const EFFICIENCY_GATE_INTERVAL: f64 = 800e-9;
/// Gate interval used for state tomography.
pub const TOMOGRAPHY_GATE_INTERVAL: f64 = 1100e-9;
/// Ratio of gate interval to pulse length used by the pulse-length sweep.
pub const INTERVAL_PER_PULSE_LENGTH: f64 = 1.6;

const P_MIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub cavity_levels: usize,
    /// Integration step override (s).
    pub max_dt: Option<f64>,
}

impl Default for Numerics {
    fn default() -> Self {
        Self { cavity_levels: DEFAULT_CAVITY_LEVELS, max_dt: None }
    }
}

impl Numerics {
    fn apply(&self, s: &PulseSchedule) -> PulseSchedule {
        let mut s = s.clone();
        if self.max_dt.is_some() {
            s.max_dt = self.max_dt;
        }
        s
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Mode density matrix on Fock levels 0..=n_ph from normally ordered
/// moments M(m, n) = Tr[ρ A†^m A^n].
///
/// M(m, n) = Σ_{k≥n} ρ_{k, k+m−n} √(k!/(k−n)!) √((k+m−n)!/(k−n)!), which is
/// upper triangular along each diagonal d = m − n and is solved by back
/// substitution. Populations above n_ph are ignored.
pub fn density_from_moments(n_ph: usize, moment: impl Fn(usize, usize) -> Complex64) -> ComplexMatrix {
    let dim = n_ph + 1;
    let mut rho = ComplexMatrix::zeros(dim, dim);
    let coef = |k: usize, n: usize, d: isize| -> f64 {
        let l = (k as isize + d) as usize;
        (factorial(k) / factorial(k - n) * factorial(l) / factorial(k - n)).sqrt()
    };
    for d in -(n_ph as isize)..=(n_ph as isize) {
        let k_min = (-d).max(0) as usize;
        let k_max = (n_ph as isize).min(n_ph as isize - d) as usize;
        for k in (k_min..=k_max).rev() {
            let m = (k as isize + d) as usize;
            let mut v = moment(m, k);
            for kk in k + 1..=k_max {
                v -= rho[(kk, (kk as isize + d) as usize)] * coef(kk, k, d);
            }
            rho[(k, m)] = v / coef(k, k, d);
        }
    }
    rho
}

/// Pure composite state Σ_n √p_n |n mod 2⟩|n⟩ for Poisson p_n truncated to
/// n ≤ n_ph and renormalised.
pub fn ideal_composite(mean_photons: f64, n_ph: usize) -> Result<QuantumState> {
    if !(mean_photons >= 0.0) {
        return Err(Error::InvalidParameter("mean photon number must be non-negative".into()));
    }
    let dim = n_ph + 1;
    let mut psi = vec![c(0.0, 0.0); 2 * dim];
    let mut norm = 0.0;
    for n in 0..dim {
        let p = (-mean_photons).exp() * mean_photons.powi(n as i32) / factorial(n);
        psi[(n % 2) * dim + n] = c(p.sqrt(), 0.0);
        norm += p;
    }
    psi.iter_mut().for_each(|z| *z /= norm.sqrt());
    QuantumState::pure(vec![2, dim], &psi)
}

/// Conditional mode states mixed by the readout errors: outcome g is
/// dominated by true g, with a fraction of true e misassigned, and vice versa.
pub fn mix_readout(
    p_g: f64,
    rho_g: &ComplexMatrix,
    p_e: f64,
    rho_e: &ComplexMatrix,
    eps_g: f64,
    eps_e: f64,
) -> (f64, ComplexMatrix, f64, ComplexMatrix) {
    let wg = p_g * (1.0 - eps_g);
    let we = p_e * (1.0 - eps_e);
    let ng = wg + p_e * eps_e;
    let ne = we + p_g * eps_g;
    let mg = (&rho_g.scale_real(wg) + &rho_e.scale_real(p_e * eps_e)).scale_real(1.0 / ng);
    let me = (&rho_e.scale_real(we) + &rho_g.scale_real(p_g * eps_g)).scale_real(1.0 / ne);
    (ng, mg, ne, me)
}

fn to_state(dims: Vec<usize>, m: &ComplexMatrix) -> Result<QuantumState> {
    let h = m.hermitian_part();
    match QuantumState::new(dims.clone(), h.clone()) {
        Ok(s) => Ok(s),
        Err(Error::InvalidState(msg)) => {
            log::debug!("truncated moment inversion is not positive ({msg}); projecting");
            QuantumState::from_hermitian_projected(dims, &h)
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolResult {
    pub mean_photons: f64,
    pub photon_truncation: usize,
    pub output_delay: f64,
    /// ⟨σ_gg(t_f)⟩ and ⟨σ_ee(t_f)⟩ before readout errors.
    pub p_g: f64,
    pub p_e: f64,
    /// Reported phase-flip probability P̃_e.
    pub p_e_reported: f64,
    /// ρ^g, ρ^e for a perfect readout.
    pub rho_g: QuantumState,
    pub rho_e: QuantumState,
    /// ρ̃^g, ρ̃^e including readout errors.
    pub rho_g_readout: QuantumState,
    pub rho_e_readout: QuantumState,
    pub rho_uncond: QuantumState,
    /// Qubit ⊗ mode state at t_f, dims [2, N_ph + 1].
    pub composite: QuantumState,
    /// Qubit state at t_f from the master equation.
    pub qubit: QuantumState,
    /// ⟨A†A⟩ / |α_in|².
    pub survival: f64,
    pub negativity: f64,
    pub fidelity_vacuum: f64,
    pub fidelity_single_photon: f64,
    pub fidelity_ideal_composite: f64,
    /// Largest population of the top cavity level during the run.
    pub truncation_population: f64,
}

/// Run the protocol for `schedule` and build output states truncated at
/// `n_ph` ∈ {1, 2} photons.
pub fn run_protocol(p: &SystemParams, schedule: &PulseSchedule, n_ph: usize, numerics: &Numerics) -> Result<ProtocolResult> {
    if !(1..=2).contains(&n_ph) {
        return Err(Error::InvalidParameter(format!("photon truncation {n_ph} must be 1 or 2")));
    }
    let model = build_model(p, numerics.cavity_levels)?;
    let s = numerics.apply(schedule);
    let (mo, joint) = moments_with_state(&model, &s, n_ph)?;
    let p_g = mo.probability(0);
    let p_e = mo.probability(1);
    for (label, pq) in [("g", p_g), ("e", p_e)] {
        if pq < P_MIN {
            log::warn!("conditioning on qubit outcome {label} with probability {pq:e}");
            return Err(Error::Conditioning(pq));
        }
    }
    let dim = n_ph + 1;
    // conditional states are projected first so that every mixture built
    // from them below is a state as well
    let cond = |q: usize, pq: f64| to_state(vec![dim], &density_from_moments(n_ph, |m, n| mo.get(q, q, m, n)).scale_real(1.0 / pq));
    let (rho_g, rho_e) = (cond(0, p_g)?, cond(1, p_e)?);
    let (g, e) = (rho_g.matrix(), rho_e.matrix());
    let uncond = &g.scale_real(p_g) + &e.scale_real(p_e);
    let (_, mg, ne, me) = mix_readout(p_g, g, p_e, e, p.readout_error_g, p.readout_error_e);

    let comp = composite_from_moments(&mo, n_ph);
    let composite = to_state(vec![2, dim], &comp)?;
    let qubit = joint.partial_trace(&[0])?;
    let rho_g_readout = to_state(vec![dim], &mg)?;
    let rho_e_readout = to_state(vec![dim], &me)?;
    let mean = s.mean_photons();
    let survival = if mean > 0.0 { mo.unconditional(1, 1).re / mean } else { 0.0 };
    let negativity = composite.negativity(1)?;
    let mut vac = vec![c(0.0, 0.0); dim];
    vac[0] = c(1.0, 0.0);
    let mut one = vec![c(0.0, 0.0); dim];
    one[1] = c(1.0, 0.0);
    let fidelity_vacuum = rho_g_readout.fidelity_pure(&vac);
    let fidelity_single_photon = rho_e_readout.fidelity_pure(&one);
    let ideal = ideal_composite(mean, n_ph)?;
    let (fidelity_ideal_composite, _) = phase_optimised_fidelity(&composite, &ideal)?;
    Ok(ProtocolResult {
        mean_photons: mean,
        photon_truncation: n_ph,
        output_delay: mo.output_delay,
        p_g,
        p_e,
        p_e_reported: ne,
        rho_g,
        rho_e,
        rho_g_readout,
        rho_e_readout,
        rho_uncond: to_state(vec![dim], &uncond)?,
        composite,
        qubit,
        survival,
        negativity,
        fidelity_vacuum,
        fidelity_single_photon,
        fidelity_ideal_composite,
        truncation_population: mo.top_level_population,
    })
}

/// Qubit ⊗ mode matrix on Fock levels 0..=n_ph before any projection.
/// Block ⟨q,·|ρ|p,·⟩ is inverted from the moments ⟨σ_pq A†^m A^n⟩.
pub fn composite_from_moments(mo: &OutputMoments, n_ph: usize) -> ComplexMatrix {
    let dim = n_ph + 1;
    let mut comp = ComplexMatrix::zeros(2 * dim, 2 * dim);
    for q in 0..2 {
        for pp in 0..2 {
            let b = density_from_moments(n_ph, |m, n| mo.get(pp, q, m, n));
            for k in 0..dim {
                for j in 0..dim {
                    comp[(q * dim + k, pp * dim + j)] = b[(k, j)];
                }
            }
        }
    }
    comp
}

/// Fidelity of a qubit ⊗ mode state to a pure target, maximised over a
/// local phase rotation e^{iφ a†a} of the mode. The mode's phase reference
/// is a convention of the reflection model, so only this maximum is
/// meaningful.
pub fn phase_optimised_fidelity(state: &QuantumState, target: &QuantumState) -> Result<(f64, f64)> {
    if state.dims() != target.dims() || state.dims().len() != 2 {
        return Err(Error::Dimension("fidelity needs matching bipartite states".into()));
    }
    let dim = state.dims()[1];
    let eval = |phi: f64| -> f64 {
        let u = ComplexMatrix::from_diag(
            &(0..2 * dim).map(|i| Complex64::from_polar(1.0, phi * (i % dim) as f64)).collect::<Vec<_>>(),
        );
        let rotated = u.matmul(state.matrix()).matmul(&u.adjoint());
        rotated.trace_product(target.matrix()).re
    };
    let n = 720;
    let (mut best, mut arg) = (f64::MIN, 0.0);
    for k in 0..n {
        let phi = 2.0 * PI * k as f64 / n as f64;
        let f = eval(phi);
        if f > best {
            best = f;
            arg = phi;
        }
    }
    let step = 2.0 * PI / n as f64;
    let (mut lo, mut hi) = (arg - step, arg + step);
    for _ in 0..60 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if eval(m1) < eval(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let phi = 0.5 * (lo + hi);
    Ok((eval(phi).max(best).clamp(0.0, 1.0), phi.rem_euclid(2.0 * PI)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub negativity: f64,
    pub fidelity_to_ideal: f64,
    /// Mode phase rotation that best aligns the state with the ideal one.
    pub mode_phase: f64,
}

pub fn entanglement_report(result: &ProtocolResult) -> Result<EntanglementReport> {
    let ideal = ideal_composite(result.mean_photons, result.photon_truncation)?;
    let (fidelity_to_ideal, mode_phase) = phase_optimised_fidelity(&result.composite, &ideal)?;
    Ok(EntanglementReport { negativity: result.composite.negativity(1)?, fidelity_to_ideal, mode_phase })
}

/// Photon numbers |α_in|² used by default in efficiency scans.
pub fn default_photon_grid() -> Vec<f64> {
    (0..=12).map(|k| 0.05 * k as f64).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub photon_numbers: Vec<f64>,
    /// P̃_e at each grid point.
    pub phase_flip: Vec<f64>,
    /// Least-squares quadratic c₀ + c₁x + c₂x² through the grid.
    pub fit: [f64; 3],
    pub fit_rms: f64,
    /// Coefficients of the exact expansion of P̃_e in |α_in|² up to second
    /// order.
    pub expansion: [f64; 3],
    /// dP̃_e/d|α_in|² at zero.
    pub eta: f64,
    /// P̃_e at |α_in|² = 0.
    pub dark_count: f64,
    pub output_delay: f64,
}

impl EfficiencyReport {
    /// Fractional shortfall of P̃_e at the last grid point below the line
    /// dark + η x.
    pub fn sublinearity(&self) -> f64 {
        let x = *self.photon_numbers.last().unwrap();
        let lin = self.dark_count + self.eta * x;
        (lin - self.phase_flip.last().unwrap()) / lin
    }
}

/// Least-squares polynomial fit of degree 2; returns (coefficients, rms).
pub fn quadratic_fit(x: &[f64], y: &[f64]) -> Result<([f64; 3], f64)> {
    if x.len() != y.len() || x.len() < 4 {
        return Err(Error::InvalidParameter("quadratic fit needs at least 4 points".into()));
    }
    let a = nalgebra::DMatrix::from_fn(x.len(), 3, |i, j| x[i].powi(j as i32));
    let b = nalgebra::DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let sol = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::Convergence(format!("least squares failed: {e}")))?;
    let r = &a * &sol - &b;
    let rms = (r.norm_squared() / x.len() as f64).sqrt();
    Ok(([sol[0], sol[1], sol[2]], rms))
}

fn reported(p: &SystemParams, pe: f64) -> f64 {
    p.readout_error_g + pe * (1.0 - p.readout_error_g - p.readout_error_e)
}

pub(crate) fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Phase-flip probability against mean input photon number. The grid
/// values come from full simulations; η and the dark count from the exact
/// low-order expansion, which is what the slope at zero means.
pub fn efficiency_scan(p: &SystemParams, template: &PulseSchedule, grid: &[f64], numerics: &Numerics) -> Result<EfficiencyReport> {
    if grid.len() < 4 {
        return Err(Error::InvalidParameter(format!("efficiency scan needs at least 4 grid points, got {}", grid.len())));
    }
    if grid.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidParameter("photon numbers must be finite and non-negative".into()));
    }
    let model = build_model(p, numerics.cavity_levels)?;
    let base = numerics.apply(template);
    let output_delay = base.output_delay.unwrap_or_else(|| crate::dynamics::optimal_output_delay(&model, &base));
    let flips: Vec<Result<f64>> = par_map(grid, |&x| {
        let s = base.clone().with_mean_photons(x).with_output_delay(output_delay);
        let mo = output_mode_moments(&model, &s, 0)?;
        Ok(reported(p, mo.probability(1)))
    });
    let phase_flip = flips.into_iter().collect::<Result<Vec<_>>>()?;
    let (fit, fit_rms) = quadratic_fit(grid, &phase_flip)?;
    let ex = phase_flip_expansion(&model, &base, 2)?;
    let f = 1.0 - p.readout_error_g - p.readout_error_e;
    let expansion = [reported(p, ex[0]), f * ex[1], f * ex[2]];
    Ok(EfficiencyReport {
        photon_numbers: grid.to_vec(),
        phase_flip,
        fit,
        fit_rms,
        expansion,
        eta: expansion[1],
        dark_count: expansion[0],
        output_delay,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// t_g − t_i in seconds.
    GateInterval,
    /// Pulse FWHM in seconds, gate interval 1.6 × FWHM.
    PulseLength,
    /// κ_ex/2π in Hz.
    KappaEx,
    /// κ_in/2π in Hz.
    KappaIn,
    /// γ in s⁻¹.
    Gamma,
    /// γ_φ in s⁻¹.
    GammaPhi,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gate_interval" => SweepAxis::GateInterval,
            "pulse_length" => SweepAxis::PulseLength,
            "kappa_ex" => SweepAxis::KappaEx,
            "kappa_in" => SweepAxis::KappaIn,
            "gamma" => SweepAxis::Gamma,
            "gamma_phi" => SweepAxis::GammaPhi,
            other => return Err(Error::InvalidParameter(format!("unknown sweep axis '{other}'"))),
        })
    }
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::GateInterval => "gate_interval",
            SweepAxis::PulseLength => "pulse_length",
            SweepAxis::KappaEx => "kappa_ex",
            SweepAxis::KappaIn => "kappa_in",
            SweepAxis::Gamma => "gamma",
            SweepAxis::GammaPhi => "gamma_phi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub eta: f64,
    pub dark_count: f64,
    pub survival: f64,
    pub negativity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Axis value with the largest efficiency.
    pub fn argmax_eta(&self) -> f64 {
        self.rows
            .iter()
            .max_by(|a, b| a.eta.partial_cmp(&b.eta).unwrap())
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    }
}

/// Point of a sweep: parameters and schedule with the axis value applied.
pub fn sweep_point(p: &SystemParams, template: &PulseSchedule, axis: SweepAxis, value: f64) -> Result<(SystemParams, PulseSchedule)> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter("sweep values must be finite".into()));
    }
    let two_pi = 2.0 * PI;
    let mut q = *p;
    let mut s = template.clone();
    let readout = template.t_f - template.t_g;
    match axis {
        SweepAxis::GateInterval => {
            s = PulseSchedule::ramsey(template.mode.fwhm(), value, template.alpha_in)?;
            s.t_f = s.t_g + readout;
        }
        SweepAxis::PulseLength => {
            s = PulseSchedule::ramsey(value, INTERVAL_PER_PULSE_LENGTH * value, template.alpha_in)?;
            s.t_f = s.t_g + readout;
        }
        SweepAxis::KappaEx => q = q.with_kappa_ex(two_pi * value),
        SweepAxis::KappaIn => q = q.with_kappa_in(two_pi * value),
        SweepAxis::Gamma => q = q.with_gamma(value),
        SweepAxis::GammaPhi => q = q.with_gamma_phi(value),
    }
    s.max_dt = template.max_dt;
    s.ramsey = template.ramsey;
    s.output_delay = None;
    q.validate()?;
    s.validate()?;
    Ok((q, s))
}

/// One efficiency scan (and one protocol run at the template's photon
/// number for survival and negativity) per axis value.
pub fn sweep(
    p: &SystemParams,
    template: &PulseSchedule,
    axis: SweepAxis,
    values: &[f64],
    grid: &[f64],
    numerics: &Numerics,
) -> Result<SweepTable> {
    let rows: Vec<Result<SweepRow>> = par_map(values, |&v| {
        let (q, s) = sweep_point(p, template, axis, v)?;
        let eff = efficiency_scan(&q, &s, grid, numerics)?;
        let s = s.with_output_delay(eff.output_delay);
        let (survival, negativity) = if s.mean_photons() > 0.0 {
            let r = run_protocol(&q, &s, 1, numerics)?;
            (r.survival, r.negativity)
        } else {
            (f64::NAN, 0.0)
        };
        Ok(SweepRow { value: v, eta: eff.eta, dark_count: eff.dark_count, survival, negativity })
    });
    Ok(SweepTable { axis, rows: rows.into_iter().collect::<Result<Vec<_>>>()? })
}
