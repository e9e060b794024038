//! Independent check of the output-mode moments: a virtual cavity b placed
//! downstream of the real one with a time-dependent coupling g(t) absorbs
//! exactly the output mode u(t).
//!
//! The two systems are combined as a cascade: the jump operator of the
//! external port becomes c₁ + c₂ with c₁ = −i√κ_ex a + β(t) (the reflected
//! field, β = α_in v) and c₂ = g(t) b, and the cascade coupling adds
//! ½(c₁†c₂ − c₂†c₁) to the effective non-Hermitian Hamiltonian. Half of the
//! coherent drive comes out of the D[c₁] term, the other half is added as
//! (√κ_ex/2)(β a† + β* a).
//!
//! With g(t) = −u(t)/√W(t), W(t) = ∫_{t_i}^t |u|², the virtual mode at t_f is
//! b = A/√W(t_f), so ⟨σ_pq A†^m A^n⟩ = W^{(m+n)/2} ⟨σ_pq b†^m b^n⟩.

use std::sync::Arc;

use num_complex::Complex64;

use super::liouvillian::{constant, Coeff, Liouvillian};
use super::moments::{optimal_output_delay, OutputMoments};
use super::{conjugate_qubit, ode, top_level_population, PulseSchedule};
use crate::error::{Error, Result};
use crate::linalg::{annihilation, c, ComplexMatrix};
use crate::model::{qubit_projector, LindbladModel};

#[derive(Debug, Clone, Copy)]
pub struct CaptureOptions {
    /// Fock levels of the virtual mode.
    pub capture_levels: usize,
    /// Floor on W(t) relative to W(t_f).
    pub weight_floor: f64,
    pub tolerances: ode::Tolerances,
}

impl Default for CaptureOptions {
    fn default() -> Self {
        Self {
            capture_levels: 6,
            weight_floor: 1e-6,
            tolerances: ode::Tolerances { rtol: 1e-8, atol: 1e-10, max_steps: 5_000_000 },
        }
    }
}

pub fn capture_mode_oracle(
    model: &LindbladModel,
    schedule: &PulseSchedule,
    max_order: usize,
    opts: CaptureOptions,
) -> Result<OutputMoments> {
    schedule.validate()?;
    if opts.capture_levels < 3 {
        return Err(Error::InvalidParameter("capture mode needs at least 3 levels".into()));
    }
    if max_order > 2 || max_order + 1 > opts.capture_levels {
        return Err(Error::InvalidParameter(format!("moment order {max_order} not supported")));
    }
    let p = model.params();
    let n = model.cavity_levels();
    let m = opts.capture_levels;
    let rest = n * m;
    let d = 2 * rest;

    let tau = schedule.output_delay.unwrap_or_else(|| optimal_output_delay(model, schedule));
    let w_total = schedule.output_weight(tau);
    if w_total <= 0.0 {
        return Err(Error::InvalidParameter("output mode has no weight inside the schedule window".into()));
    }
    let floor = opts.weight_floor * w_total;

    let iq = ComplexMatrix::identity(2);
    let ic = ComplexMatrix::identity(n);
    let im = ComplexMatrix::identity(m);
    let lift = |op: &ComplexMatrix| op.tensor(&im).expect("small dims");
    let a = ComplexMatrix::tensor_all(&[&iq, &annihilation(n), &im])?;
    let b = ComplexMatrix::tensor_all(&[&iq, &ic, &annihilation(m)])?;
    let id = ComplexMatrix::identity(d);
    let sk = p.kappa_ex().sqrt();

    let sched = Arc::new(schedule.clone());
    let beta: Coeff = {
        let s = sched.clone();
        Arc::new(move |t| s.alpha_in * s.drive_envelope(t))
    };
    let g: Coeff = {
        let s = sched.clone();
        Arc::new(move |t| {
            let w = s.output_weight_until(tau, t).max(floor);
            c(-s.output_envelope(t, tau) / w.sqrt(), 0.0)
        })
    };
    let conj_of = |f: &Coeff| -> Coeff {
        let f = f.clone();
        Arc::new(move |t| f(t).conj())
    };
    let times = |f: &Coeff, h: &Coeff, s: Complex64| -> Coeff {
        let (f, h) = (f.clone(), h.clone());
        Arc::new(move |t| s * f(t) * h(t))
    };

    let half_k = c(0.5 * sk, 0.0);
    let hamiltonian: Vec<(Coeff, ComplexMatrix)> = vec![
        (constant(c(1.0, 0.0)), lift(model.hamiltonian())),
        (times(&beta, &constant(half_k), c(1.0, 0.0)), a.adjoint()),
        (times(&conj_of(&beta), &constant(half_k), c(1.0, 0.0)), a.clone()),
    ];
    let mut jumps: Vec<Vec<(Coeff, ComplexMatrix)>> = vec![vec![
        (constant(c(0.0, -sk)), a.clone()),
        (beta.clone(), id.clone()),
        (g.clone(), b.clone()),
    ]];
    if p.kappa_in() > 0.0 {
        jumps.push(vec![(constant(c(p.kappa_in().sqrt(), 0.0)), a.clone())]);
    }
    for op in model.collapse_ops().iter().skip(1) {
        if op.rate > 0.0 {
            jumps.push(vec![(constant(c(op.rate.sqrt(), 0.0)), lift(&op.op))]);
        }
    }
    // ½(c₁†c₂ − c₂†c₁) with c₁ = −i√κ a + β, c₂ = g b
    let half = c(0.5, 0.0);
    let extra_k: Vec<(Coeff, ComplexMatrix)> = vec![
        (times(&g, &constant(c(0.0, sk)), half), a.adjoint().matmul(&b)),
        (times(&g, &conj_of(&beta), half), b.clone()),
        (times(&conj_of(&g), &constant(c(0.0, sk)), half), b.adjoint().matmul(&a)),
        (times(&conj_of(&g), &beta, -half), b.adjoint()),
    ];
    let liou = Liouvillian::new(d, hamiltonian, jumps, extra_k);

    let mut x = vec![c(0.0, 0.0); d * d];
    x[0] = c(1.0, 0.0);
    let gates = schedule.gates();
    let apply = |t: f64, x: &mut [Complex64]| {
        for (tg, gate) in &gates {
            if *tg == t {
                conjugate_qubit(x, rest, &gate.matrix());
            }
        }
    };
    let mut scratch = vec![c(0.0, 0.0); d * d];
    apply(schedule.t_i, &mut x);
    let mut bp = vec![schedule.t_i, schedule.t_g, schedule.t_f];
    bp.dedup();
    let h0 = 1e-3 * schedule.step_limit(model);
    for w in bp.windows(2) {
        ode::dopri5(|t, y, dy| liou.at(t).apply(y, dy, &mut scratch), &mut x, w[0], w[1], h0, opts.tolerances)?;
        apply(w[1], &mut x);
    }
    let top = top_level_population(&x, n, m);

    let rho = ComplexMatrix::new(d, d, x)?;
    let k = max_order + 1;
    let mut table = vec![c(0.0, 0.0); 4 * k * k];
    let bd = b.adjoint();
    let pow = |op: &ComplexMatrix, e: usize| (0..e).fold(ComplexMatrix::identity(d), |acc, _| acc.matmul(op));
    for pq in 0..2 {
        for qq in 0..2 {
            let sigma = qubit_projector(pq, qq).tensor(&ComplexMatrix::identity(rest))?;
            for mm in 0..k {
                for nn in 0..k {
                    let op = sigma.matmul(&pow(&bd, mm)).matmul(&pow(&b, nn));
                    let v = op.trace_product(&rho) * w_total.powf(0.5 * (mm + nn) as f64);
                    table[((pq * 2 + qq) * k + mm) * k + nn] = v;
                }
            }
        }
    }
    Ok(OutputMoments::from_table(max_order, tau, w_total, top, table))
}
