//! Master-equation model of the dispersively coupled qubit and cavity.
//!
//! The joint Hilbert space is `qubit ⊗ cavity` with the qubit index first
//! (0 = g, 1 = e). In the frame rotating at ω_c for the cavity and ω_q for
//! the qubit the drift Hamiltonian is
//!
//! ```text
//! H = χ a†a σ_gg − χ a†a σ_ee
//! ```
//!
//! so the cavity resonance sits at ω_c + χ (qubit in g) and ω_c − χ
//! (qubit in e). Dissipation enters through
//! `√κ_tot a`, `√γ₁ σ_ge`, `√γ₂ σ_eg` and `√(2γ_φ) σ_ee`; the last one makes
//! the qubit coherence decay at exactly γ_φ + (γ₁+γ₂)/2.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{annihilation, c, ComplexMatrix, QuantumState};
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QubitLevel {
    Ground,
    Excited,
}

impl QubitLevel {
    pub fn index(self) -> usize {
        match self {
            QubitLevel::Ground => 0,
            QubitLevel::Excited => 1,
        }
    }

    pub const BOTH: [QubitLevel; 2] = [QubitLevel::Ground, QubitLevel::Excited];
}

/// |p⟩⟨q| on the qubit alone.
pub fn qubit_projector(p: usize, q: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(p, q)] = c(1.0, 0.0);
    m
}

#[derive(Debug, Clone)]
pub struct CollapseOp {
    pub label: &'static str,
    pub rate: f64,
    pub op: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct LindbladModel {
    params: SystemParams,
    cavity_levels: usize,
    hamiltonian: ComplexMatrix,
    collapse: Vec<CollapseOp>,
    a: ComplexMatrix,
}

/// Smallest cavity truncation accepted by [`build_model`].
pub const MIN_CAVITY_LEVELS: usize = 3;

pub fn build_model(p: &SystemParams, cavity_levels: usize) -> Result<LindbladModel> {
    if cavity_levels < MIN_CAVITY_LEVELS {
        return Err(Error::InvalidParameter(format!(
            "cavity truncation {cavity_levels} below the minimum of {MIN_CAVITY_LEVELS}"
        )));
    }
    p.validate()?;
    let n = cavity_levels;
    let iq = ComplexMatrix::identity(2);
    let ic = ComplexMatrix::identity(n);
    let a_c = annihilation(n);
    let num = a_c.adjoint().matmul(&a_c);

    let a = iq.tensor(&a_c)?;
    let sgg = qubit_projector(0, 0).tensor(&ic)?;
    let see = qubit_projector(1, 1).tensor(&ic)?;
    let sge = qubit_projector(0, 1).tensor(&ic)?;
    let seg = qubit_projector(1, 0).tensor(&ic)?;

    let chi = p.chi();
    let z = qubit_projector(0, 0).scale_real(chi);
    let z = &z - &qubit_projector(1, 1).scale_real(chi);
    let hamiltonian = z.tensor(&num)?;

    let collapse = vec![
        CollapseOp { label: "cavity decay", rate: p.kappa_tot(), op: a.clone() },
        CollapseOp { label: "qubit relaxation", rate: p.gamma_down(), op: sge },
        CollapseOp { label: "qubit excitation", rate: p.gamma_up(), op: seg },
        CollapseOp { label: "qubit dephasing", rate: 2.0 * p.gamma_phi().max(0.0), op: see },
    ];
    let _ = sgg;
    Ok(LindbladModel { params: *p, cavity_levels, hamiltonian, collapse, a })
}

impl LindbladModel {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn cavity_levels(&self) -> usize {
        self.cavity_levels
    }

    pub fn dim(&self) -> usize {
        2 * self.cavity_levels
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![2, self.cavity_levels]
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn collapse_ops(&self) -> &[CollapseOp] {
        &self.collapse
    }

    /// Cavity annihilation operator on the joint space; also the operator
    /// through which the drive couples.
    pub fn cavity_annihilation(&self) -> &ComplexMatrix {
        &self.a
    }

    /// |g, 0⟩⟨g, 0|, the state before the first gate.
    pub fn initial_state(&self) -> QuantumState {
        let mut psi = vec![c(0.0, 0.0); self.dim()];
        psi[0] = c(1.0, 0.0);
        QuantumState::pure(self.dims(), &psi).expect("normalised basis state")
    }

    /// σ_pq ⊗ 1 on the joint space.
    pub fn qubit_op(&self, p: usize, q: usize) -> ComplexMatrix {
        qubit_projector(p, q)
            .tensor(&ComplexMatrix::identity(self.cavity_levels))
            .expect("small dimensions")
    }

    /// Drive amplitude ε(t) = −i √κ_ex α_in f(t) for an input envelope value.
    pub fn drive_amplitude(&self, alpha_in: Complex64, envelope: f64) -> Complex64 {
        Complex64::new(0.0, -1.0) * self.params.kappa_ex().sqrt() * alpha_in * envelope
    }

    /// H_drive = i(ε a† − ε* a).
    pub fn drive_hamiltonian(&self, eps: Complex64) -> ComplexMatrix {
        let ad = self.a.adjoint();
        let i = Complex64::new(0.0, 1.0);
        &ad.scale(i * eps) - &self.a.scale(i * eps.conj())
    }
}
