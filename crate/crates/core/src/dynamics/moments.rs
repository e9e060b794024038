//! Output-mode moments ⟨σ_pq A†^m A^n⟩ from the regression theorem.
//!
//! With the reflected field b_out(s) = α_in v(s) − i√κ_ex a(s) and
//! A = ∫_{t_i}^{t_f} u*(s) b_out(s) ds, every moment is a sum of time-ordered
//! correlators with b inserted from the left and b† from the right. Instead
//! of evaluating the multiple time integrals on a grid, the partial sums are
//! carried as auxiliary operators
//!
//! ```text
//! R_mn(t) = "ρ(t) with n left insertions of ∫^t u* b and m right insertions of ∫^t u b†"
//! dR_mn/dt = L R_mn + n u* b R_{m,n−1} + m u R_{m−1,n} b†
//! ```
//!
//! which obey the same master equation plus source terms. R_nm = R_mn†, so
//! only m ≤ n is stored. Tr[σ_pq R_mn(t_f)] = ⟨σ_pq A†^m A^n⟩.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::liouvillian::{constant, Liouvillian, TimeOp};
use super::{conjugate_qubit, ode, qubit_block_trace, system_liouvillian, top_level_population, PulseSchedule};
use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix, QuantumState};
use crate::model::LindbladModel;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputMoments {
    pub max_order: usize,
    /// Output-mode delay τ_d used for f_out.
    pub output_delay: f64,
    /// ∫_{t_i}^{t_f} |u|², the commutator [A, A†] on the integration window.
    pub mode_weight: f64,
    /// Largest population of the top cavity level during the run.
    pub top_level_population: f64,
    table: Vec<Complex64>,
}

impl OutputMoments {
    pub(crate) fn from_table(max_order: usize, output_delay: f64, mode_weight: f64, top: f64, table: Vec<Complex64>) -> Self {
        Self { max_order, output_delay, mode_weight, top_level_population: top, table }
    }

    fn index(&self, p: usize, q: usize, m: usize, n: usize) -> usize {
        let k = self.max_order + 1;
        ((p * 2 + q) * k + m) * k + n
    }

    /// ⟨σ_pq A†^m A^n⟩ at t_f, with σ_pq = |p⟩⟨q| on the qubit.
    pub fn get(&self, p: usize, q: usize, m: usize, n: usize) -> Complex64 {
        assert!(p < 2 && q < 2 && m <= self.max_order && n <= self.max_order);
        self.table[self.index(p, q, m, n)]
    }

    /// P_q = ⟨σ_qq⟩.
    pub fn probability(&self, q: usize) -> f64 {
        self.get(q, q, 0, 0).re
    }

    /// ⟨A†^m A^n⟩ regardless of the qubit.
    pub fn unconditional(&self, m: usize, n: usize) -> Complex64 {
        self.get(0, 0, m, n) + self.get(1, 1, m, n)
    }

    /// Largest relative deviation between two moment tables, measured
    /// against the largest moment of the same order.
    pub fn max_relative_difference(&self, other: &OutputMoments) -> f64 {
        let k = self.max_order.min(other.max_order);
        let mut worst: f64 = 0.0;
        for m in 0..=k {
            for n in 0..=k {
                let mut scale: f64 = 0.0;
                for p in 0..2 {
                    for q in 0..2 {
                        scale = scale.max(self.get(p, q, m, n).norm());
                    }
                }
                if scale < 1e-14 {
                    continue;
                }
                for p in 0..2 {
                    for q in 0..2 {
                        let d = (self.get(p, q, m, n) - other.get(p, q, m, n)).norm();
                        worst = worst.max(d / scale);
                    }
                }
            }
        }
        worst
    }
}

/// Output-mode delay maximising the overlap of the delayed input envelope
/// with the classical reflected field (qubit in g), found by golden-section
/// search over [0, 5/κ_ex] to 1 ns.
pub fn optimal_output_delay(model: &LindbladModel, schedule: &PulseSchedule) -> f64 {
    let p = model.params();
    let kex = p.kappa_ex();
    if kex <= 0.0 {
        return 0.0;
    }
    let mode = &schedule.mode;
    let t0 = mode.times()[0].min(-mode.times()[mode.times().len() - 1]);
    let t1 = -t0 + 5.0 / kex;
    let h = schedule.step_limit(model).min(mode.fwhm() / 200.0);
    let steps = ode::step_count(t0, t1, h);
    let h = (t1 - t0) / steps as f64;
    let lam = c(-0.5 * p.kappa_tot(), -p.chi());
    let drive = |t: f64| c(0.0, -kex.sqrt()) * schedule.drive_envelope(t);
    let mut a = ZERO;
    let mut field = Vec::with_capacity(steps + 1);
    let out = |t: f64, a: Complex64| schedule.drive_envelope(t) - c(0.0, kex.sqrt()) * a;
    field.push((t0, out(t0, a)));
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        let f = |t: f64, a: Complex64| lam * a + drive(t);
        let k1 = f(t, a);
        let k2 = f(t + 0.5 * h, a + k1 * (0.5 * h));
        let k3 = f(t + 0.5 * h, a + k2 * (0.5 * h));
        let k4 = f(t + h, a + k3 * h);
        a += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
        field.push((t + h, out(t + h, a)));
    }
    let overlap = |tau: f64| -> f64 {
        let n = field.len();
        let mut s = ZERO;
        for (j, (t, b)) in field.iter().enumerate() {
            let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            s += b * (w * schedule.output_envelope(*t, tau));
        }
        (s * h).norm_sqr()
    };
    golden_max(overlap, 0.0, 5.0 / kex, 1e-9)
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Integrate `nblocks` stacked d×d blocks over the schedule with RK4,
/// applying gates to every block. `rhs` receives (t, y, dy).
pub(crate) fn integrate_blocks<F>(
    model: &LindbladModel,
    schedule: &PulseSchedule,
    y: &mut [Complex64],
    mut rhs: F,
) -> f64
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let d = model.dim();
    let n = model.cavity_levels();
    let nb = y.len() / (d * d);
    let max_dt = schedule.step_limit(model);
    let gates = schedule.gates();
    let apply = |t: f64, y: &mut [Complex64]| {
        for (tg, g) in &gates {
            if *tg == t {
                let u = g.matrix();
                for b in 0..nb {
                    conjugate_qubit(&mut y[b * d * d..(b + 1) * d * d], n, &u);
                }
            }
        }
    };
    let mut top: f64 = 0.0;
    apply(schedule.t_i, y);
    let mut bp = vec![schedule.t_i, schedule.t_g, schedule.t_f];
    bp.dedup();
    for w in bp.windows(2) {
        let steps = ode::step_count(w[0], w[1], max_dt);
        let h = (w[1] - w[0]) / steps as f64;
        for s in 0..steps {
            let ta = w[0] + s as f64 * h;
            let tb = if s + 1 == steps { w[1] } else { ta + h };
            ode::rk4(&mut rhs, y, ta, tb, 1);
            top = top.max(top_level_population(&y[..d * d], n, 1));
        }
        apply(w[1], y);
    }
    top
}

/// Accumulates s·(β x − i√κ a x) and s·(β* x + i√κ x a†).
struct FieldOps {
    a: TimeOp,
    a_vals: Vec<Complex64>,
    sqrt_k: f64,
}

impl FieldOps {
    fn new(model: &LindbladModel) -> Self {
        let d = model.dim();
        let a = TimeOp::new(d, vec![(constant(c(1.0, 0.0)), model.cavity_annihilation().clone())]);
        let a_vals = a.values(0.0);
        Self { a, a_vals, sqrt_k: model.params().kappa_ex().sqrt() }
    }

    fn left_b(&self, beta: Complex64, x: &[Complex64], s: Complex64, out: &mut [Complex64]) {
        if beta.norm_sqr() > 0.0 {
            let sb = s * beta;
            for (o, v) in out.iter_mut().zip(x) {
                *o += sb * v;
            }
        }
        self.a.left_mul_acc(&self.a_vals, x, s * c(0.0, -self.sqrt_k), out);
    }

    fn right_bdag(&self, beta: Complex64, x: &[Complex64], s: Complex64, out: &mut [Complex64]) {
        if beta.norm_sqr() > 0.0 {
            let sb = s * beta.conj();
            for (o, v) in out.iter_mut().zip(x) {
                *o += sb * v;
            }
        }
        self.a.right_mul_adjoint_acc(&self.a_vals, x, s * c(0.0, self.sqrt_k), out);
    }
}

/// out += T + T†
fn add_with_adjoint(t: &[Complex64], d: usize, out: &mut [Complex64]) {
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] += t[i * d + j] + t[j * d + i].conj();
        }
    }
}

/// Block layout for the accumulators with m ≤ n ≤ max_order.
fn block_pairs(max_order: usize) -> Vec<(usize, usize)> {
    match max_order {
        0 => vec![(0, 0)],
        1 => vec![(0, 0), (0, 1), (1, 1)],
        _ => vec![(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)],
    }
}

/// Moments ⟨σ_pq A†^m A^n⟩ at t_f for all m, n ≤ `max_order` (at most 2).
pub fn output_mode_moments(model: &LindbladModel, schedule: &PulseSchedule, max_order: usize) -> Result<OutputMoments> {
    let (moments, _) = moments_with_state(model, schedule, max_order)?;
    Ok(moments)
}

/// Same as [`output_mode_moments`] but also returns the qubit-cavity state
/// at t_f.
pub fn moments_with_state(
    model: &LindbladModel,
    schedule: &PulseSchedule,
    max_order: usize,
) -> Result<(OutputMoments, QuantumState)> {
    schedule.validate()?;
    if max_order > 2 {
        return Err(Error::InvalidParameter(format!("moment order {max_order} above 2 is not supported")));
    }
    let tau = schedule.output_delay.unwrap_or_else(|| optimal_output_delay(model, schedule));
    let weight = schedule.output_weight(tau);
    if weight <= 0.0 {
        return Err(Error::InvalidParameter("output mode has no weight inside the schedule window".into()));
    }
    let liou = system_liouvillian(model, Some(schedule));
    let d = model.dim();
    let dd = d * d;
    let pairs = block_pairs(max_order);
    let nb = pairs.len();
    let mut y = vec![ZERO; nb * dd];
    y[..dd].copy_from_slice(model.initial_state().matrix().as_slice());
    let ops = FieldOps::new(model);
    let alpha = schedule.alpha_in;
    let mut scratch = vec![ZERO; dd];
    let mut tmp = vec![ZERO; dd];

    let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let frame = liou.at(t);
        for b in 0..nb {
            frame.apply(&y[b * dd..(b + 1) * dd], &mut dy[b * dd..(b + 1) * dd], &mut scratch);
        }
        if nb == 1 {
            return;
        }
        let u = c(schedule.output_envelope(t, tau), 0.0);
        if u.norm_sqr() == 0.0 {
            return;
        }
        let beta = alpha * schedule.drive_envelope(t);
        let blk = |k: usize| k * dd..(k + 1) * dd;
        // indices: 0 ρ, 1 R01, then for order 2: 2 R02, 3 R11, 4 R12, 5 R22
        let (i01, i11) = if nb == 3 { (1, 2) } else { (1, 3) };
        ops.left_b(beta, &y[blk(0)], u.conj(), &mut dy[blk(i01)]);
        tmp.iter_mut().for_each(|v| *v = ZERO);
        ops.right_bdag(beta, &y[blk(i01)], u, &mut tmp);
        add_with_adjoint(&tmp, d, &mut dy[blk(i11)]);
        if nb == 6 {
            ops.left_b(beta, &y[blk(1)], 2.0 * u.conj(), &mut dy[blk(2)]);
            ops.left_b(beta, &y[blk(3)], 2.0 * u.conj(), &mut dy[blk(4)]);
            ops.right_bdag(beta, &y[blk(2)], u, &mut dy[blk(4)]);
            tmp.iter_mut().for_each(|v| *v = ZERO);
            ops.right_bdag(beta, &y[blk(4)], 2.0 * u, &mut tmp);
            add_with_adjoint(&tmp, d, &mut dy[blk(5)]);
        }
    };
    let top = integrate_blocks(model, schedule, &mut y, rhs);

    let traces: Vec<[[Complex64; 2]; 2]> =
        (0..nb).map(|b| qubit_block_trace(&y[b * dd..(b + 1) * dd], model.cavity_levels())).collect();
    let k = max_order + 1;
    let mut table = vec![ZERO; 4 * k * k];
    for p in 0..2 {
        for q in 0..2 {
            for m in 0..k {
                for n in 0..k {
                    let v = if m <= n {
                        let b = pairs.iter().position(|&x| x == (m, n)).unwrap();
                        traces[b][q][p]
                    } else {
                        let b = pairs.iter().position(|&x| x == (n, m)).unwrap();
                        traces[b][p][q].conj()
                    };
                    table[((p * 2 + q) * k + m) * k + n] = v;
                }
            }
        }
    }
    let rho = ComplexMatrix::new(d, d, y[..dd].to_vec())?;
    let tr = rho.trace().re;
    if (tr - 1.0).abs() > 1e-8 {
        return Err(Error::Convergence(format!("trace drifted to {tr}")));
    }
    let state = QuantumState::new(model.dims(), rho)?;
    if top > super::TRUNCATION_TOLERANCE {
        log::warn!("top cavity level reached population {top:e}");
    }
    Ok((OutputMoments::from_table(max_order, tau, weight, top, table), state))
}

/// Coefficients c_j of ⟨σ_ee(t_f)⟩ = Σ_j c_j |α_in|^{2j} for j ≤ `order`
/// (at most 2), from the exact perturbative expansion of the master
/// equation in the drive amplitude. The amplitude of `schedule` is ignored.
pub fn phase_flip_expansion(model: &LindbladModel, schedule: &PulseSchedule, order: usize) -> Result<Vec<f64>> {
    schedule.validate()?;
    if order > 2 {
        return Err(Error::InvalidParameter(format!("expansion order {order} above 2 is not supported")));
    }
    let liou: Liouvillian = system_liouvillian(model, None);
    let d = model.dim();
    let dd = d * d;
    // blocks ρ_jk with j ≤ k: (0,0), (0,1), (1,1), (0,2), (1,2), (2,2)
    let pairs: Vec<(usize, usize)> = match order {
        0 => vec![(0, 0)],
        1 => vec![(0, 0), (0, 1), (1, 1)],
        _ => vec![(0, 0), (0, 1), (1, 1), (0, 2), (1, 2), (2, 2)],
    };
    let nb = pairs.len();
    let mut y = vec![ZERO; nb * dd];
    y[..dd].copy_from_slice(model.initial_state().matrix().as_slice());
    let a = TimeOp::new(d, vec![(constant(c(1.0, 0.0)), model.cavity_annihilation().clone())]);
    let av = a.values(0.0);
    let ad = TimeOp::new(d, vec![(constant(c(1.0, 0.0)), model.cavity_annihilation().adjoint())]);
    let adv = ad.values(0.0);
    let sk = model.params().kappa_ex().sqrt();
    let mut scratch = vec![ZERO; dd];
    let mut tmp = vec![ZERO; dd];

    // L₊X = −i√κ v [a†, X],  L₋X = −i√κ v [a, X]; X a = X (a†)†
    let comm_a = |x: &[Complex64], s: Complex64, out: &mut [Complex64]| {
        a.left_mul_acc(&av, x, s, out);
        ad.right_mul_adjoint_acc(&adv, x, -s, out);
    };
    let comm_ad = |x: &[Complex64], s: Complex64, out: &mut [Complex64]| {
        ad.left_mul_acc(&adv, x, s, out);
        a.right_mul_adjoint_acc(&av, x, -s, out);
    };

    let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let frame = liou.at(t);
        for b in 0..nb {
            frame.apply(&y[b * dd..(b + 1) * dd], &mut dy[b * dd..(b + 1) * dd], &mut scratch);
        }
        if nb == 1 {
            return;
        }
        let v = schedule.drive_envelope(t);
        if v == 0.0 {
            return;
        }
        let s = c(0.0, -sk * v);
        let blk = |k: usize| k * dd..(k + 1) * dd;
        // ρ01 ← L₋ ρ00
        comm_a(&y[blk(0)], s, &mut dy[blk(1)]);
        // ρ11 ← L₊ ρ01 + L₋ ρ10 = S† + S with S = L₋ ρ01†
        let r10 = adjoint(&y[blk(1)], d);
        tmp.iter_mut().for_each(|z| *z = ZERO);
        comm_a(&r10, s, &mut tmp);
        add_with_adjoint(&tmp, d, &mut dy[blk(2)]);
        if nb == 6 {
            // ρ02 ← L₋ ρ01
            comm_a(&y[blk(1)], s, &mut dy[blk(3)]);
            // ρ12 ← L₊ ρ02 + L₋ ρ11
            comm_ad(&y[blk(3)], s, &mut dy[blk(4)]);
            comm_a(&y[blk(2)], s, &mut dy[blk(4)]);
            // ρ22 ← L₊ ρ12 + L₋ ρ21
            let r21 = adjoint(&y[blk(4)], d);
            tmp.iter_mut().for_each(|z| *z = ZERO);
            comm_a(&r21, s, &mut tmp);
            add_with_adjoint(&tmp, d, &mut dy[blk(5)]);
        }
    };
    integrate_blocks(model, schedule, &mut y, rhs);
    let n = model.cavity_levels();
    let diag = |b: usize| qubit_block_trace(&y[b * dd..(b + 1) * dd], n)[1][1].re;
    let mut out = vec![diag(0)];
    if order >= 1 {
        out.push(diag(2));
    }
    if order >= 2 {
        out.push(diag(5));
    }
    Ok(out)
}

fn adjoint(x: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut y = vec![ZERO; d * d];
    for i in 0..d {
        for j in 0..d {
            y[i * d + j] = x[j * d + i].conj();
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_peak() {
        let x = golden_max(|x| -(x - 0.37f64).powi(2), 0.0, 1.0, 1e-9);
        assert!((x - 0.37).abs() < 1e-8);
    }
}
