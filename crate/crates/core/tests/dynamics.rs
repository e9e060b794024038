use num_complex::Complex64;
use qnd_core::dynamics::*;
use qnd_core::linalg::c;
use qnd_core::model::build_model;
use qnd_core::params::SystemParams;

fn linear_cavity() -> SystemParams {
    let mut p = SystemParams::ideal();
    p.dispersive_shift_hz = 0.0;
    p
}

#[test]
fn linear_cavity_field_matches_convolution() {
    let p = linear_cavity().with_kappa_in(2.0 * std::f64::consts::PI * 0.25e6);
    let model = build_model(&p, 7).unwrap();
    let alpha = c(0.3, 0.2);
    let s = PulseSchedule::ramsey(500e-9, 1600e-9, alpha).unwrap().without_gates();
    let traj = evolve(&model, &s, &model.initial_state()).unwrap();
    let a = model.cavity_annihilation();
    let (kt, ke) = (p.kappa_tot(), p.kappa_ex());
    // ⟨a⟩(t) = ∫_{t_i}^t e^{−κ_tot(t−s)/2} ε(s) ds with ε(s) = −i√κ_ex α f(−s)
    let oracle = |t: f64| -> Complex64 {
        let n = 20_000;
        let h = (t - s.t_i) / n as f64;
        let mut acc = c(0.0, 0.0);
        for k in 0..=n {
            let r = s.t_i + k as f64 * h;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            acc += c(0.0, -ke.sqrt()) * alpha * s.drive_envelope(r) * (-0.5 * kt * (t - r)).exp() * w;
        }
        acc * h
    };
    let scale = oracle(0.0).norm();
    for (t, st) in traj.times().iter().zip(traj.states()).step_by(97) {
        assert!((st.matrix().trace().re - 1.0).abs() < 1e-8);
        let got = st.expectation(a);
        assert!((got - oracle(*t)).norm() < 1e-5 * scale, "t = {t:e}: {got} vs {}", oracle(*t));
    }
}

#[test]
fn free_ramsey_matches_closed_form() {
    let p = SystemParams::table();
    let model = build_model(&p, 4).unwrap();
    let s = PulseSchedule::ramsey(500e-9, 800e-9, c(0.0, 0.0)).unwrap();
    let traj = evolve(&model, &s, &model.initial_state()).unwrap();
    let pe_final = traj.final_state().expectation(&model.qubit_op(1, 1)).re;
    let pe_gate = 0.5 * (1.0 - (-(s.t_g - s.t_i) / p.t2_star).exp());
    let g1 = p.gamma_down() + p.gamma_up();
    let relax = (-g1 * (s.t_f - s.t_g)).exp();
    let expect = pe_gate * relax + p.gamma_up() / g1 * (1.0 - relax);
    assert!((pe_final - expect).abs() < 1e-7, "{pe_final} vs {expect}");
}

#[test]
fn single_time_correlator_equals_evolution() {
    let p = SystemParams::table();
    let model = build_model(&p, 6).unwrap();
    let s = PulseSchedule::ramsey(500e-9, 800e-9, c(0.4, 0.0)).unwrap();
    let see = model.qubit_op(1, 1);
    let direct = evolve(&model, &s, &model.initial_state()).unwrap().final_state().expectation(&see);
    let corr = correlator(&model, &s, &[], &see).unwrap();
    assert!((direct - corr).norm() < 1e-10);
}

#[test]
fn qubit_coherence_correlator() {
    // ⟨σ_ge(t) σ_eg(0)⟩ from |g⟩: 1 without qubit decoherence, e^{−t/T₂*} with it
    for (p, rate) in [(SystemParams::ideal(), 0.0), (SystemParams::table(), 1.0 / SystemParams::table().t2_star)] {
        let model = build_model(&p, 3).unwrap();
        let s = PulseSchedule::ramsey(500e-9, 800e-9, c(0.0, 0.0)).unwrap().without_gates();
        let ins = [Insertion { time: s.t_i, op: model.qubit_op(1, 0), side: Side::Left }];
        let v = correlator(&model, &s, &ins, &model.qubit_op(0, 1)).unwrap();
        let expect = (-rate * (s.t_f - s.t_i)).exp();
        assert!((v - c(expect, 0.0)).norm() < 1e-8, "{v} vs {expect}");
    }
}

#[test]
fn vacuum_in_vacuum_out() {
    let model = build_model(&SystemParams::ideal(), 4).unwrap();
    let s = PulseSchedule::ramsey(500e-9, 800e-9, c(0.0, 0.0)).unwrap();
    let m = output_mode_moments(&model, &s, 2).unwrap();
    assert!(m.unconditional(1, 1).norm() < 1e-12 && m.unconditional(2, 2).norm() < 1e-12);
}

#[test]
fn lossless_linear_reflection_returns_the_pulse() {
    let model = build_model(&linear_cavity(), 6).unwrap();
    let s = PulseSchedule::ramsey(500e-9, 2000e-9, c(0.4, 0.0)).unwrap();
    let m = output_mode_moments(&model, &s, 1).unwrap();
    let n = m.unconditional(1, 1).re;
    assert!(n > 0.99 * 0.16 && n <= 0.16 * (1.0 + 1e-9), "⟨A†A⟩ = {n}");
    let cap = capture_mode_oracle(&model, &s.clone().with_output_delay(m.output_delay), 1, CaptureOptions::default()).unwrap();
    assert!((cap.unconditional(1, 1).re - n).abs() < 1e-4 * n);
}

#[test]
fn global_input_phase_is_a_gauge() {
    let p = SystemParams::table();
    let model = build_model(&p, 6).unwrap();
    let base = PulseSchedule::ramsey(500e-9, 800e-9, c(0.4, 0.0)).unwrap();
    let m0 = output_mode_moments(&model, &base, 1).unwrap();
    let phi = 1.1;
    let rotated = base.clone().with_alpha(Complex64::from_polar(0.4, phi)).with_output_delay(m0.output_delay);
    let m1 = output_mode_moments(&model, &rotated, 1).unwrap();
    for q in 0..2 {
        assert!((m1.get(q, q, 0, 0) - m0.get(q, q, 0, 0)).norm() < 1e-10);
        assert!((m1.get(q, q, 1, 1) - m0.get(q, q, 1, 1)).norm() < 1e-10);
        let want = m0.get(q, q, 0, 1) * Complex64::from_polar(1.0, phi);
        assert!((m1.get(q, q, 0, 1) - want).norm() < 1e-10);
    }
}

#[test]
fn weak_input_is_linear() {
    let model = build_model(&SystemParams::table(), 6).unwrap();
    let base = PulseSchedule::ramsey(500e-9, 800e-9, c(0.0, 0.0)).unwrap();
    let tau = optimal_output_delay(&model, &base);
    let ratio: Vec<f64> = [0.005, 0.01, 0.02]
        .iter()
        .map(|&n| {
            let s = base.clone().with_mean_photons(n).with_output_delay(tau);
            output_mode_moments(&model, &s, 1).unwrap().unconditional(1, 1).re / n
        })
        .collect();
    for r in &ratio {
        assert!((r / ratio[0] - 1.0).abs() < 0.01);
    }
}

#[test]
fn truncation_and_trace_hold_at_the_largest_default_power() {
    let model = build_model(&SystemParams::table(), 7).unwrap();
    let s = PulseSchedule::ramsey(500e-9, 800e-9, c(0.0, 0.0)).unwrap().with_mean_photons(0.3);
    let traj = evolve(&model, &s, &model.initial_state()).unwrap();
    assert!(traj.max_top_population() < TRUNCATION_TOLERANCE);
    for st in traj.states() {
        assert!((st.matrix().trace().re - 1.0).abs() < 1e-8);
    }
}

#[test]
fn double_sum_of_two_time_correlators_matches_accumulators() {
    // N_e = ∫∫ u(s) u(s') ⟨b†(s) σ_ee(t_f) b(s')⟩ on a coarse grid
    let p = SystemParams::table();
    let model = build_model(&p, 5).unwrap();
    let s = PulseSchedule::ramsey(500e-9, 800e-9, c(0.4, 0.0)).unwrap();
    let m = output_mode_moments(&model, &s, 1).unwrap();
    let tau = m.output_delay;
    let a = model.cavity_annihilation();
    let id = qnd_core::linalg::ComplexMatrix::identity(model.dim());
    let sk = p.kappa_ex().sqrt();
    let b_at = |t: f64| &id.scale(s.alpha_in * s.drive_envelope(t)) - &a.scale(c(0.0, sk));
    let n = 40;
    let h = (s.t_f - s.t_i) / n as f64;
    let grid: Vec<f64> = (0..=n).map(|k| s.t_i + k as f64 * h).collect();
    let w = |k: usize| if k == 0 || k == n { 0.5 * h } else { h };
    let see = model.qubit_op(1, 1);
    let mut total = c(0.0, 0.0);
    for i in 0..=n {
        for j in i..=n {
            let (si, sj) = (grid[i], grid[j]);
            // b†(s_i) to the right at the earlier time, b(s_j) to the left at the later
            let right = Insertion { time: si, op: b_at(si).adjoint(), side: Side::Right };
            let left = Insertion { time: sj, op: b_at(sj), side: Side::Left };
            let ins = if i == j {
                vec![Insertion { time: si, op: b_at(si), side: Side::Left }, right]
            } else {
                vec![right, left]
            };
            let v = correlator(&model, &s, &ins, &see).unwrap();
            let weight = w(i) * w(j) * s.output_envelope(si, tau) * s.output_envelope(sj, tau);
            total += if i == j { v * weight } else { (v + v.conj()) * weight };
        }
    }
    let exact = m.get(1, 1, 1, 1).re;
    assert!((total.re - exact).abs() < 0.02 * exact, "double sum {} vs accumulator {exact}", total.re);
}
