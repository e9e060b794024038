use num_complex::Complex64;
use proptest::prelude::*;
use qnd_core::linalg::{c, ComplexMatrix, QuantumState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(dims: Vec<usize>, rank: usize, rng: &mut impl Rng) -> QuantumState {
    let d: usize = dims.iter().product();
    let g = ComplexMatrix::from_fn(d, rank, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    QuantumState::new(dims, m.scale_real(1.0 / tr)).unwrap()
}

/// Haar-ish random unitary from the eigenvectors of a random Hermitian matrix.
fn random_unitary(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    (&g + &g.adjoint()).eigh().1
}

fn check_state(s: &QuantumState) {
    let m = s.matrix();
    assert!(m.is_hermitian(1e-10));
    assert!((m.trace().re - 1.0).abs() < 1e-10 && m.trace().im.abs() < 1e-10);
    assert!(m.eigvalsh()[0] > -1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn partial_trace_recovers_product_factors(seed in any::<u64>(), da in 2usize..4, db in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_state(vec![da], da, &mut rng);
        let b = random_state(vec![db], 2, &mut rng);
        let ab = a.tensor(&b).unwrap();
        check_state(&ab);
        prop_assert!(ab.partial_trace(&[0]).unwrap().matrix().max_abs_diff(a.matrix()) < 1e-12);
        prop_assert!(ab.partial_trace(&[1]).unwrap().matrix().max_abs_diff(b.matrix()) < 1e-12);
    }

    #[test]
    fn trace_norm_matches_negative_eigenvalues(seed in any::<u64>(), rank in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(vec![2, 3], rank, &mut rng);
        let pt = s.partial_transpose(1).unwrap();
        let neg: f64 = pt.eigvalsh().iter().filter(|l| **l < 0.0).map(|l| -l).sum();
        prop_assert!((pt.trace_norm_hermitian() - (1.0 + 2.0 * neg)).abs() < 1e-10);
        prop_assert!((s.negativity(1).unwrap() - neg).abs() < 1e-10);
    }
}

#[test]
fn negativity_is_invariant_under_local_unitaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let s = random_state(vec![2, 3], 2, &mut rng);
    let n0 = s.negativity(1).unwrap();
    assert!(n0 > 1e-3, "test state should be entangled");
    for _ in 0..20 {
        let u = random_unitary(2, &mut rng).tensor(&random_unitary(3, &mut rng)).unwrap();
        let rotated = QuantumState::new(vec![2, 3], u.matmul(s.matrix()).matmul(&u.adjoint())).unwrap();
        assert!((rotated.negativity(1).unwrap() - n0).abs() < 1e-9);
        check_state(&rotated);
    }
}

#[test]
fn thermal_vacuum_overlap() {
    let th = QuantumState::thermal(40, 0.1).unwrap();
    let vac = QuantumState::fock(40, 0).unwrap();
    assert!((th.fidelity(&vac).unwrap() - 1.0 / 1.1).abs() < 1e-10);
}

#[test]
fn schmidt_negativity_of_photon_qubit_state() {
    let (p0, p1) = (0.85f64, 0.15f64);
    let mut psi = vec![c(0.0, 0.0); 4];
    psi[0] = c(p0.sqrt(), 0.0);
    psi[3] = Complex64::from_polar(p1.sqrt(), 0.7);
    let s = QuantumState::pure(vec![2, 2], &psi).unwrap();
    let coeffs = p0.sqrt() + p1.sqrt();
    assert!((s.negativity(1).unwrap() - (coeffs * coeffs - 1.0) / 2.0).abs() < 1e-12);
    assert!((s.negativity(0).unwrap() - (p0 * p1).sqrt()).abs() < 1e-12);
}
