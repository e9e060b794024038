//! Time evolution of the driven qubit-cavity system, Ramsey gates and
//! regression-theorem correlators.

pub mod capture;
pub mod liouvillian;
pub mod moments;
pub mod ode;

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix, QuantumState};
use crate::mode::TemporalMode;
use crate::model::LindbladModel;

pub use capture::{capture_mode_oracle, CaptureOptions};
pub use liouvillian::{constant, Coeff, Liouvillian};
pub use moments::{optimal_output_delay, output_mode_moments, phase_flip_expansion, OutputMoments};

/// Delay between the second gate and the qubit readout used by the
/// standard Ramsey schedule.
pub const READOUT_DELAY: f64 = 100e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    /// |g⟩ → (|g⟩ + |e⟩)/√2
    Y2,
    /// Inverse of [`Gate::Y2`].
    MinusY2,
}

impl Gate {
    /// 2×2 unitary in the (g, e) basis.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let s = FRAC_1_SQRT_2;
        match self {
            Gate::Y2 => [[c(s, 0.0), c(-s, 0.0)], [c(s, 0.0), c(s, 0.0)]],
            Gate::MinusY2 => [[c(s, 0.0), c(s, 0.0)], [c(-s, 0.0), c(s, 0.0)]],
        }
    }
}

/// In-place (U ⊗ 1) X (U ⊗ 1)† for a row-major matrix whose first tensor
/// factor is the qubit.
pub fn conjugate_qubit(x: &mut [Complex64], rest: usize, u: &[[Complex64; 2]; 2]) {
    let d = 2 * rest;
    let mut y = vec![Complex64::new(0.0, 0.0); d * d];
    for q in 0..2 {
        for p in 0..2 {
            for qq in 0..2 {
                for pp in 0..2 {
                    let w = u[q][qq] * u[p][pp].conj();
                    if w.norm_sqr() == 0.0 {
                        continue;
                    }
                    for k in 0..rest {
                        let src = (qq * rest + k) * d + pp * rest;
                        let dst = (q * rest + k) * d + p * rest;
                        for l in 0..rest {
                            y[dst + l] += w * x[src + l];
                        }
                    }
                }
            }
        }
    }
    x.copy_from_slice(&y);
}

/// Apply an instantaneous qubit rotation to a state whose first subsystem is
/// the qubit.
pub fn apply_gate(rho: &QuantumState, which: Gate) -> Result<QuantumState> {
    if rho.dims().first() != Some(&2) {
        return Err(Error::Dimension("first subsystem is not a qubit".into()));
    }
    let mut m = rho.matrix().clone();
    conjugate_qubit(m.as_mut_slice(), rho.dim() / 2, &which.matrix());
    QuantumState::new(rho.dims().to_vec(), m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub t_i: f64,
    pub t_g: f64,
    pub t_f: f64,
    pub mode: TemporalMode,
    pub alpha_in: Complex64,
    /// Apply Y/2 at t_i and −Y/2 at t_g. Disabled for plain free evolution.
    pub ramsey: bool,
    /// Output-mode delay τ_d; optimised when absent.
    pub output_delay: Option<f64>,
    /// Integration step override.
    pub max_dt: Option<f64>,
}

impl PulseSchedule {
    pub fn new(t_i: f64, t_g: f64, t_f: f64, mode: TemporalMode, alpha_in: Complex64) -> Result<Self> {
        let s = Self { t_i, t_g, t_f, mode, alpha_in, ramsey: true, output_delay: None, max_dt: None };
        s.validate()?;
        Ok(s)
    }

    /// Gates symmetric about the pulse centre, readout [`READOUT_DELAY`]
    /// after the second gate.
    pub fn ramsey(fwhm: f64, gate_interval: f64, alpha_in: Complex64) -> Result<Self> {
        let mode = TemporalMode::gaussian(fwhm, 0.0, 8.0 * fwhm, fwhm / 200.0)?;
        Self::new(-0.5 * gate_interval, 0.5 * gate_interval, 0.5 * gate_interval + READOUT_DELAY, mode, alpha_in)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.t_i, self.t_g, self.t_f].iter().all(|x| x.is_finite());
        if !finite || !(self.t_i < self.t_g) || !(self.t_g <= self.t_f) {
            return Err(Error::InvalidParameter(format!(
                "schedule times must satisfy t_i < t_g <= t_f, got {:e}, {:e}, {:e}",
                self.t_i, self.t_g, self.t_f
            )));
        }
        if !self.alpha_in.re.is_finite() || !self.alpha_in.im.is_finite() {
            return Err(Error::InvalidParameter("input amplitude is not finite".into()));
        }
        if let Some(dt) = self.max_dt {
            if !(dt > 0.0) {
                return Err(Error::InvalidParameter("time step must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn with_alpha(mut self, alpha: Complex64) -> Self {
        self.alpha_in = alpha;
        self
    }

    pub fn with_mean_photons(self, n: f64) -> Self {
        self.with_alpha(c(n.max(0.0).sqrt(), 0.0))
    }

    pub fn with_output_delay(mut self, tau: f64) -> Self {
        self.output_delay = Some(tau);
        self
    }

    pub fn with_max_dt(mut self, dt: f64) -> Self {
        self.max_dt = Some(dt);
        self
    }

    pub fn without_gates(mut self) -> Self {
        self.ramsey = false;
        self
    }

    pub fn mean_photons(&self) -> f64 {
        self.alpha_in.norm_sqr()
    }

    /// Default step min(1/(40 κ_tot), l/200) unless overridden.
    pub fn step_limit(&self, model: &LindbladModel) -> f64 {
        self.max_dt.unwrap_or_else(|| {
            let kt = model.params().kappa_tot();
            let by_kappa = if kt > 0.0 { 1.0 / (40.0 * kt) } else { f64::INFINITY };
            by_kappa.min(self.mode.fwhm() / 200.0)
        })
    }

    /// Input envelope seen by the cavity at time t, v(t) = f_in(−t).
    pub fn drive_envelope(&self, t: f64) -> f64 {
        self.mode.amplitude(-t)
    }

    /// Output mode u(t) = f_out(−t) = f_in(τ_d − t).
    pub fn output_envelope(&self, t: f64, tau: f64) -> f64 {
        self.mode.amplitude(tau - t)
    }

    /// ∫_{t_i}^{t_f} |u|² dt, which equals [A, A†].
    pub fn output_weight(&self, tau: f64) -> f64 {
        self.output_weight_until(tau, self.t_f)
    }

    /// ∫_{t_i}^{t} |u|² dt.
    pub fn output_weight_until(&self, tau: f64, t: f64) -> f64 {
        // u is the input envelope mirrored in time, centred at τ − t₀
        self.mode.shifted_weight_between(tau - 2.0 * self.mode.center(), self.t_i, t)
    }

    /// Gate events in time order.
    pub(crate) fn gates(&self) -> Vec<(f64, Gate)> {
        if self.ramsey {
            vec![(self.t_i, Gate::Y2), (self.t_g, Gate::MinusY2)]
        } else {
            Vec::new()
        }
    }
}

/// Lindbladian of the model, optionally including the coherent drive of
/// `schedule`.
pub fn system_liouvillian(model: &LindbladModel, schedule: Option<&PulseSchedule>) -> Liouvillian {
    let one = constant(c(1.0, 0.0));
    let mut h: Vec<(Coeff, ComplexMatrix)> = vec![(one, model.hamiltonian().clone())];
    if let Some(s) = schedule {
        if s.alpha_in.norm_sqr() > 0.0 {
            let a = model.cavity_annihilation().clone();
            let eps = drive_coefficient(model, s);
            let eps2 = eps.clone();
            // H_d = i ε a† − i ε* a
            h.push((Arc::new(move |t| c(0.0, 1.0) * eps(t)), a.adjoint()));
            h.push((Arc::new(move |t| c(0.0, -1.0) * eps2(t).conj()), a));
        }
    }
    let jumps = model
        .collapse_ops()
        .iter()
        .filter(|op| op.rate > 0.0)
        .map(|op| vec![(constant(c(op.rate.sqrt(), 0.0)), op.op.clone())])
        .collect();
    Liouvillian::new(model.dim(), h, jumps, vec![])
}

/// ε(t) = −i √κ_ex α_in f_in(−t).
pub fn drive_coefficient(model: &LindbladModel, s: &PulseSchedule) -> Coeff {
    let k = model.params().kappa_ex().sqrt();
    let alpha = s.alpha_in;
    let mode = s.mode.clone();
    Arc::new(move |t| c(0.0, -1.0) * k * alpha * mode.amplitude(-t))
}

/// Partial trace over everything after the qubit: a 2×2 matrix M with
/// M[q][p] = Σ_k X_{(q,k),(p,k)}.
pub(crate) fn qubit_block_trace(x: &[Complex64], rest: usize) -> [[Complex64; 2]; 2] {
    let d = 2 * rest;
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (q, row) in out.iter_mut().enumerate() {
        for (p, v) in row.iter_mut().enumerate() {
            for k in 0..rest {
                *v += x[(q * rest + k) * d + p * rest + k];
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<QuantumState>,
    max_top_population: f64,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[QuantumState] {
        &self.states
    }

    pub fn final_state(&self) -> &QuantumState {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    /// Largest population of the highest cavity Fock level seen during the
    /// run; a truncation diagnostic.
    pub fn max_top_population(&self) -> f64 {
        self.max_top_population
    }
}

/// Population of the highest cavity level for a qubit ⊗ cavity (⊗ …) matrix.
pub(crate) fn top_level_population(x: &[Complex64], n_cav: usize, inner: usize) -> f64 {
    let rest = n_cav * inner;
    let d = 2 * rest;
    let mut p = 0.0;
    for q in 0..2 {
        for l in 0..inner {
            let i = q * rest + (n_cav - 1) * inner + l;
            p += x[i * d + i].re;
        }
    }
    p
}

/// Required bound on the top cavity level population.
pub const TRUNCATION_TOLERANCE: f64 = 1e-7;

/// Time points where the integration must stop: gates and extra events.
fn breakpoints(schedule: &PulseSchedule, extra: &[f64]) -> Vec<f64> {
    let mut t: Vec<f64> = vec![schedule.t_i, schedule.t_g, schedule.t_f];
    t.extend_from_slice(extra);
    t.sort_by(|a, b| a.partial_cmp(b).unwrap());
    t.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    t
}

/// Integrate the master equation from t_i to t_f starting from `rho0`,
/// recording the state after every step.
pub fn evolve(model: &LindbladModel, schedule: &PulseSchedule, rho0: &QuantumState) -> Result<Trajectory> {
    schedule.validate()?;
    if rho0.dims() != model.dims().as_slice() {
        return Err(Error::Dimension(format!("state dims {:?} do not match model {:?}", rho0.dims(), model.dims())));
    }
    let liou = system_liouvillian(model, Some(schedule));
    let d = model.dim();
    let n = model.cavity_levels();
    let max_dt = schedule.step_limit(model);
    let gates = schedule.gates();
    let mut x = rho0.matrix().as_slice().to_vec();
    let mut scratch = vec![Complex64::new(0.0, 0.0); d * d];
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut top: f64 = 0.0;

    let apply_gates = |t: f64, x: &mut [Complex64]| {
        for (tg, g) in &gates {
            if *tg == t {
                conjugate_qubit(x, n, &g.matrix());
            }
        }
    };
    let record = |t: f64, x: &[Complex64], times: &mut Vec<f64>, states: &mut Vec<QuantumState>| -> Result<()> {
        let m = ComplexMatrix::new(d, d, x.to_vec())?;
        let tr = m.trace().re;
        if (tr - 1.0).abs() > 1e-8 {
            return Err(Error::Convergence(format!("trace drifted to {tr} at t = {t:e}")));
        }
        states.push(QuantumState::new(model.dims(), m)?);
        times.push(t);
        Ok(())
    };

    apply_gates(schedule.t_i, &mut x);
    record(schedule.t_i, &x, &mut times, &mut states)?;
    let bp = breakpoints(schedule, &[]);
    for w in bp.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let steps = ode::step_count(t0, t1, max_dt);
        let h = (t1 - t0) / steps as f64;
        for s in 0..steps {
            let ta = t0 + s as f64 * h;
            let tb = if s + 1 == steps { t1 } else { ta + h };
            ode::rk4(|t, y, dy| liou.at(t).apply(y, dy, &mut scratch), &mut x, ta, tb, 1);
            if s + 1 == steps {
                apply_gates(t1, &mut x);
            }
            top = top.max(top_level_population(&x, n, 1));
            record(tb, &x, &mut times, &mut states)?;
        }
    }
    if top > TRUNCATION_TOLERANCE {
        log::warn!("top cavity level reached population {top:e}; consider a larger truncation");
    }
    Ok(Trajectory { times, states, max_top_population: top })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// O X: the operator stands to the right of later-time operators in the
    /// correlator, e.g. B in ⟨C(t₂) B(t₁)⟩.
    Left,
    /// X O: e.g. B in ⟨B(t₁) C(t₂)⟩.
    Right,
}

#[derive(Debug, Clone)]
pub struct Insertion {
    pub time: f64,
    pub op: ComplexMatrix,
    pub side: Side,
}

/// Multi-time correlation function via the quantum regression theorem.
///
/// Starting from |g,0⟩ at t_i the density matrix is propagated with the
/// schedule's drive and gates; each insertion multiplies the propagated
/// operator from the stated side at its time, and the result is traced
/// against `observable` at t_f. Gates at the same time as an insertion act
/// first.
pub fn correlator(
    model: &LindbladModel,
    schedule: &PulseSchedule,
    insertions: &[Insertion],
    observable: &ComplexMatrix,
) -> Result<Complex64> {
    schedule.validate()?;
    let d = model.dim();
    for w in insertions.windows(2) {
        if w[1].time < w[0].time {
            return Err(Error::InvalidParameter("insertion times must be non-decreasing".into()));
        }
    }
    for ins in insertions {
        if ins.time < schedule.t_i || ins.time > schedule.t_f {
            return Err(Error::InvalidParameter(format!("insertion time {:e} outside the schedule", ins.time)));
        }
        if ins.op.rows() != d || ins.op.cols() != d {
            return Err(Error::Dimension("insertion operator does not act on the system space".into()));
        }
    }
    if observable.rows() != d || observable.cols() != d {
        return Err(Error::Dimension("observable does not act on the system space".into()));
    }
    let liou = system_liouvillian(model, Some(schedule));
    let n = model.cavity_levels();
    let max_dt = schedule.step_limit(model);
    let gates = schedule.gates();
    let mut x = model.initial_state().matrix().as_slice().to_vec();
    let mut scratch = vec![Complex64::new(0.0, 0.0); d * d];
    let times: Vec<f64> = insertions.iter().map(|i| i.time).collect();
    let bp = breakpoints(schedule, &times);
    let mut next = 0;

    let mut events = |t: f64, x: &mut Vec<Complex64>| {
        for (tg, g) in &gates {
            if *tg == t {
                conjugate_qubit(x, n, &g.matrix());
            }
        }
        while next < insertions.len() && (insertions[next].time - t).abs() < 1e-15 {
            let ins = &insertions[next];
            let m = ComplexMatrix::new(d, d, std::mem::take(x)).expect("sizes match");
            let y = match ins.side {
                Side::Left => ins.op.matmul(&m),
                Side::Right => m.matmul(&ins.op),
            };
            *x = y.into_vec();
            next += 1;
        }
    };
    events(bp[0], &mut x);
    for w in bp.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let steps = ode::step_count(t0, t1, max_dt);
        ode::rk4(|t, y, dy| liou.at(t).apply(y, dy, &mut scratch), &mut x, t0, t1, steps);
        events(t1, &mut x);
    }
    let m = ComplexMatrix::new(d, d, x)?;
    Ok(observable.trace_product(&m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_model;
    use crate::params::SystemParams;

    #[test]
    fn gates_act_as_stated() {
        let g = QuantumState::pure(vec![2], &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let plus = apply_gate(&g, Gate::Y2).unwrap();
        assert!((plus.fidelity_pure(&[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]) - 1.0).abs() < 1e-12);
        let back = apply_gate(&plus, Gate::MinusY2).unwrap();
        assert!(back.matrix().max_abs_diff(g.matrix()) < 1e-12);
        let minus = QuantumState::pure(vec![2], &[c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)]).unwrap();
        let e = apply_gate(&minus, Gate::MinusY2).unwrap();
        assert!((e.matrix()[(1, 1)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gate_on_composite_matches_kron() {
        let u = Gate::Y2.matrix();
        let um = ComplexMatrix::new(2, 2, vec![u[0][0], u[0][1], u[1][0], u[1][1]]).unwrap();
        let full = um.tensor(&ComplexMatrix::identity(3)).unwrap();
        let x = ComplexMatrix::from_fn(6, 6, |i, j| c(i as f64 + 0.3 * j as f64, (i * j) as f64 * 0.1));
        let mut y = x.as_slice().to_vec();
        conjugate_qubit(&mut y, 3, &u);
        let want = full.matmul(&x).matmul(&full.adjoint());
        assert!(ComplexMatrix::new(6, 6, y).unwrap().max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn free_evolution_without_dissipation_is_static() {
        let p = SystemParams::ideal();
        let m = build_model(&p, 4).unwrap();
        let s = PulseSchedule::ramsey(500e-9, 800e-9, c(0.0, 0.0)).unwrap().without_gates();
        let plus = QuantumState::pure(vec![2, 4], &{
            let mut v = vec![c(0.0, 0.0); 8];
            v[0] = c(FRAC_1_SQRT_2, 0.0);
            v[4] = c(FRAC_1_SQRT_2, 0.0);
            v
        })
        .unwrap();
        let tr = evolve(&m, &s, &plus).unwrap();
        for st in tr.states() {
            assert!(st.matrix().max_abs_diff(plus.matrix()) < 1e-12);
        }
    }

    #[test]
    fn unordered_insertions_are_rejected() {
        let m = build_model(&SystemParams::table(), 3).unwrap();
        let s = PulseSchedule::ramsey(500e-9, 800e-9, c(0.0, 0.0)).unwrap();
        let op = m.qubit_op(0, 0);
        let ins = vec![
            Insertion { time: 0.0, op: op.clone(), side: Side::Left },
            Insertion { time: -1e-7, op: op.clone(), side: Side::Left },
        ];
        assert!(correlator(&m, &s, &ins, &op).is_err());
    }
}
