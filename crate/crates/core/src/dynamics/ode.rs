//! Explicit integrators for complex-valued linear ODE systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

fn axpy(out: &mut [Complex64], y: &[Complex64], h: f64, k: &[Complex64]) {
    for ((o, a), b) in out.iter_mut().zip(y).zip(k) {
        *o = a + b * h;
    }
}

/// Classical RK4 from `t0` to `t1` in `steps` equal steps.
pub fn rk4<F>(mut f: F, y: &mut [Complex64], t0: f64, t1: f64, steps: usize)
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let n = y.len();
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let h = (t1 - t0) / steps as f64;
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        f(t, y, &mut k1);
        axpy(&mut tmp, y, 0.5 * h, &k1);
        f(t + 0.5 * h, &tmp, &mut k2);
        axpy(&mut tmp, y, 0.5 * h, &k2);
        f(t + 0.5 * h, &tmp, &mut k3);
        axpy(&mut tmp, y, h, &k3);
        f(t + h, &tmp, &mut k4);
        for i in 0..n {
            y[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
        }
    }
}

/// Number of equal steps of length at most `max_dt` covering `[t0, t1]`.
pub fn step_count(t0: f64, t1: f64, max_dt: f64) -> usize {
    (((t1 - t0) / max_dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, max_steps: 2_000_000 }
    }
}

/// Adaptive Dormand–Prince 5(4). Returns the number of accepted steps.
pub fn dopri5<F>(mut f: F, y: &mut [Complex64], t0: f64, t1: f64, h0: f64, tol: Tolerances) -> Result<usize>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let n = y.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut k: Vec<Vec<Complex64>> = (0..7).map(|_| vec![zero; n]).collect();
    let mut tmp = vec![zero; n];
    let mut t = t0;
    let mut h = h0.min(t1 - t0);
    let mut accepted = 0;
    let mut fsal = false;
    let mut attempts = 0;
    while t < t1 {
        attempts += 1;
        if attempts > tol.max_steps {
            return Err(Error::Convergence(format!("adaptive integrator exceeded {} steps", tol.max_steps)));
        }
        if t + h > t1 {
            h = t1 - t;
        }
        if !fsal {
            f(t, y, &mut k[0]);
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += kj[i] * (a * h);
                    }
                }
                tmp[i] = acc;
            }
            let (head, tail) = k.split_at_mut(s);
            let _ = head;
            f(t + C[s] * h, &tmp, &mut tail[0]);
        }
        // tmp holds the 5th-order solution (row 6 of A equals the b weights)
        let mut err = 0.0f64;
        for i in 0..n {
            let mut e = Complex64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e += kj[i] * E[j];
                }
            }
            let sc = tol.atol + tol.rtol * y[i].norm().max(tmp[i].norm());
            err = err.max((e * h).norm() / sc);
        }
        if !err.is_finite() {
            return Err(Error::Convergence("non-finite values in adaptive integration".into()));
        }
        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&tmp);
            k.swap(0, 6);
            fsal = true;
            accepted += 1;
        } else {
            fsal = false;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * (t1 - t0).abs().max(1e-30) {
            return Err(Error::Convergence("step size underflow in adaptive integration".into()));
        }
    }
    Ok(accepted)
}
