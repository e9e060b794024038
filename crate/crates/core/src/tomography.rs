//! Measurement side: binned quadrature POVMs with detection loss, synthetic
//! sampling, iterative maximum-likelihood reconstruction, Wigner functions.
//!
//! Quadratures use vacuum units, x_θ = (a e^{−iθ} + a† e^{iθ})/√2, so the
//! vacuum has Var(x) = 1/2. Wigner functions are on the α plane with
//! W(α) = (2/π) Tr[ρ D(α) P D†(α)].

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix, QuantumState};
use crate::protocol::par_map;

/// Fock levels used for single-mode reconstruction.
pub const SINGLE_MODE_LEVELS: usize = 5;
/// Fock levels of the mode in composite reconstruction.
pub const COMPOSITE_LEVELS: usize = 3;
/// Phases per reconstruction by default, spaced by π/100.
pub const DEFAULT_PHASES: usize = 100;
pub const DEFAULT_SHOTS: u64 = 10_000;

const PROB_FLOOR: f64 = 1e-12;
const COMPLETENESS_TOL: f64 = 1e-4;

// 5-point Gauss–Legendre on [−1, 1]
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self { lo: -5.0, hi: 5.0, bins: 201 }
    }
}

impl QuadratureGrid {
    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        let w = self.width();
        (0..self.bins).map(|k| self.lo + (k as f64 + 0.5) * w).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || self.bins == 0 || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::InvalidParameter(format!("bad quadrature grid {self:?}")));
        }
        Ok(())
    }
}

/// Hermite functions ψ_0..ψ_{n−1} at x, normalised on the real line.
pub fn hermite_functions(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * x * x).exp();
    for k in 0..n {
        out.push(cur);
        let next = (2.0 / (k + 1) as f64).sqrt() * x * cur - (k as f64 / (k + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Kraus operators of a pure-loss channel with transmittance η on `dim`
/// levels: E_k|n⟩ = √(C(n,k) η^{n−k} (1−η)^k) |n−k⟩.
pub fn loss_kraus(dim: usize, eta: f64) -> Vec<ComplexMatrix> {
    (0..dim)
        .map(|k| {
            let mut e = ComplexMatrix::zeros(dim, dim);
            for n in k..dim {
                let amp = binomial(n, k) * eta.powi((n - k) as i32) * (1.0 - eta).powi(k as i32);
                e[(n - k, n)] = c(amp.sqrt(), 0.0);
            }
            e
        })
        .collect()
}

/// Send the mode `subsystem` of `state` through a loss channel.
pub fn apply_loss(state: &QuantumState, eta: f64, subsystem: usize) -> Result<QuantumState> {
    check_eta(eta)?;
    let dims = state.dims().to_vec();
    if subsystem >= dims.len() {
        return Err(Error::Dimension(format!("no subsystem {subsystem} in {dims:?}")));
    }
    let left: usize = dims[..subsystem].iter().product();
    let right: usize = dims[subsystem + 1..].iter().product();
    let (il, ir) = (ComplexMatrix::identity(left), ComplexMatrix::identity(right));
    let mut out = ComplexMatrix::zeros(state.dim(), state.dim());
    for k in loss_kraus(dims[subsystem], eta) {
        let big = ComplexMatrix::tensor_all(&[&il, &k, &ir])?;
        out = &out + &big.matmul(state.matrix()).matmul(&big.adjoint());
    }
    QuantumState::new(dims, out.hermitian_part())
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter(format!("efficiency {eta} outside (0, 1]")));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadraturePOVM {
    pub theta: f64,
    pub eta: f64,
    pub grid: QuadratureGrid,
    pub elements: Vec<ComplexMatrix>,
}

impl QuadraturePOVM {
    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    /// max |Σ Π − 1|.
    pub fn completeness_error(&self) -> f64 {
        let d = self.dim();
        let mut s = ComplexMatrix::zeros(d, d);
        for e in &self.elements {
            s = &s + e;
        }
        s.max_abs_diff(&ComplexMatrix::identity(d))
    }

    pub fn probabilities(&self, rho: &ComplexMatrix) -> Vec<f64> {
        self.elements.iter().map(|e| rho.trace_product(e).re.max(0.0)).collect()
    }
}

pub fn build_povm(theta: f64, eta: f64, levels: usize, grid: QuadratureGrid) -> Result<QuadraturePOVM> {
    check_eta(eta)?;
    grid.validate()?;
    if levels < 2 {
        return Err(Error::InvalidParameter("POVM needs at least 2 Fock levels".into()));
    }
    let w = grid.width();
    let phase: Vec<Complex64> = (0..levels).map(|n| Complex64::from_polar(1.0, theta * n as f64)).collect();
    let kraus = if eta < 1.0 { loss_kraus(levels, eta) } else { Vec::new() };
    let elements: Vec<ComplexMatrix> = (0..grid.bins)
        .map(|b| {
            let lo = grid.lo + b as f64 * w;
            let mut ov = vec![0.0; levels * levels];
            for (x, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
                let psi = hermite_functions(levels, lo + 0.5 * w * (1.0 + x));
                for m in 0..levels {
                    for n in 0..levels {
                        ov[m * levels + n] += 0.5 * w * wt * psi[m] * psi[n];
                    }
                }
            }
            // ⟨m|x_θ⟩⟨x_θ|n⟩ = e^{i(m−n)θ} ψ_m ψ_n
            let ideal = ComplexMatrix::from_fn(levels, levels, |m, n| phase[m] * phase[n].conj() * ov[m * levels + n]);
            if kraus.is_empty() {
                ideal
            } else {
                let mut out = ComplexMatrix::zeros(levels, levels);
                for k in &kraus {
                    out = &out + &k.adjoint().matmul(&ideal).matmul(k);
                }
                out
            }
        })
        .collect();
    let povm = QuadraturePOVM { theta, eta, grid, elements };
    let err = povm.completeness_error();
    if err > COMPLETENESS_TOL {
        return Err(Error::InvalidParameter(format!("quadrature grid too narrow: completeness error {err:e}")));
    }
    Ok(povm)
}

/// θ_k = kπ/count for k < count.
pub fn default_phases(count: usize) -> Vec<f64> {
    (0..count).map(|k| PI * k as f64 / count as f64).collect()
}

pub fn build_povms(thetas: &[f64], eta: f64, levels: usize, grid: QuadratureGrid) -> Result<Vec<QuadraturePOVM>> {
    par_map(thetas, |&t| build_povm(t, eta, levels, grid)).into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QubitBasis {
    X,
    Y,
    Z,
}

impl QubitBasis {
    pub const ALL: [QubitBasis; 3] = [QubitBasis::X, QubitBasis::Y, QubitBasis::Z];

    /// Projector for outcome 0 (+, +i, g) or 1 (−, −i, e).
    pub fn projector(self, outcome: usize) -> ComplexMatrix {
        let s = if outcome == 0 { 1.0 } else { -1.0 };
        let v = match self {
            QubitBasis::X => [c(1.0, 0.0), c(s, 0.0)],
            QubitBasis::Y => [c(1.0, 0.0), c(0.0, s)],
            QubitBasis::Z => {
                return if outcome == 0 {
                    ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]])
                } else {
                    ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]])
                }
            }
        };
        ComplexMatrix::outer(&v, &v).scale_real(0.5)
    }

    pub fn label(self) -> &'static str {
        match self {
            QubitBasis::X => "X",
            QubitBasis::Y => "Y",
            QubitBasis::Z => "Z",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub theta: f64,
    /// Qubit basis for joint measurements, `None` for the mode alone.
    pub basis: Option<QubitBasis>,
}

/// Histograms per setting. For joint settings a row holds the bins for
/// qubit outcome 0 followed by those for outcome 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub grid: QuadratureGrid,
    pub eta: f64,
    pub settings: Vec<Setting>,
    pub counts: Vec<Vec<u64>>,
}

impl MeasurementRecord {
    pub fn shots(&self, setting: usize) -> u64 {
        self.counts[setting].iter().sum()
    }

    pub fn total_shots(&self) -> u64 {
        (0..self.settings.len()).map(|s| self.shots(s)).sum()
    }

    /// Rows `setting,theta,basis,qubit,bin_center,count`; zero counts are kept.
    pub fn to_csv(&self) -> String {
        let centers = self.grid.centers();
        let mut out = String::from("setting,theta,basis,qubit,bin_center,count\n");
        for (i, (s, row)) in self.settings.iter().zip(&self.counts).enumerate() {
            let basis = s.basis.map_or("-", |b| b.label());
            for (j, n) in row.iter().enumerate() {
                let q = if s.basis.is_some() { (j / self.grid.bins).to_string() } else { "-".into() };
                let x = centers[j % self.grid.bins];
                out.push_str(&format!("{i},{:.16e},{basis},{q},{x:.16e},{n}\n", s.theta));
            }
        }
        out
    }
}

fn sample_counts(probs: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Result<Vec<u64>> {
    let dist = WeightedIndex::new(probs).map_err(|e| Error::InvalidState(format!("outcome distribution: {e}")))?;
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        counts[dist.sample(rng)] += 1;
    }
    Ok(counts)
}

fn stream_rng(seed: u64, stream: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Draw `shots` quadrature outcomes per phase from a single-mode state.
/// Each setting has its own ChaCha stream derived from `seed`.
pub fn sample(state: &QuantumState, thetas: &[f64], shots: u64, eta: f64, grid: QuadratureGrid, seed: u64) -> Result<MeasurementRecord> {
    if state.dims().len() != 1 {
        return Err(Error::Dimension("single-mode sampling needs a one-mode state".into()));
    }
    let povms = build_povms(thetas, eta, state.dim(), grid)?;
    let idx: Vec<usize> = (0..thetas.len()).collect();
    let counts = par_map(&idx, |&i| sample_counts(&povms[i].probabilities(state.matrix()), shots, &mut stream_rng(seed, i)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasurementRecord {
        grid,
        eta,
        settings: thetas.iter().map(|&theta| Setting { theta, basis: None }).collect(),
        counts,
    })
}

/// Joint qubit ⊗ quadrature sampling of a [2, n] state for every
/// (basis, phase) pair.
pub fn sample_composite(
    state: &QuantumState,
    thetas: &[f64],
    shots: u64,
    eta: f64,
    grid: QuadratureGrid,
    seed: u64,
) -> Result<MeasurementRecord> {
    if state.dims().len() != 2 || state.dims()[0] != 2 {
        return Err(Error::Dimension("composite sampling needs a qubit ⊗ mode state".into()));
    }
    let n = state.dims()[1];
    let povms = build_povms(thetas, eta, n, grid)?;
    let settings: Vec<Setting> = QubitBasis::ALL
        .iter()
        .flat_map(|&b| thetas.iter().map(move |&theta| Setting { theta, basis: Some(b) }))
        .collect();
    let idx: Vec<usize> = (0..settings.len()).collect();
    let counts = par_map(&idx, |&i| {
        let basis = settings[i].basis.unwrap();
        let povm = &povms[i % thetas.len()];
        let mut probs = Vec::with_capacity(2 * grid.bins);
        for q in 0..2 {
            let pq = basis.projector(q);
            for e in &povm.elements {
                probs.push(state.matrix().trace_product(&pq.tensor(e)?).re.max(0.0));
            }
        }
        sample_counts(&probs, shots, &mut stream_rng(seed, i))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(MeasurementRecord { grid, eta, settings, counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Stop once the log-likelihood per shot gains less than this.
    pub tolerance: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self { max_iterations: 10_000, tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct MleResult {
    pub state: QuantumState,
    pub iterations: usize,
    /// Log-likelihood per shot after each accepted step, starting value first.
    pub log_likelihood: Vec<f64>,
    pub converged: bool,
}

/// Elements with nonzero counts, flattened for fast traces.
struct Problem {
    dim: usize,
    elements: Vec<Vec<Complex64>>,
    freqs: Vec<f64>,
}

impl Problem {
    fn probs(&self, rho: &ComplexMatrix) -> Vec<f64> {
        let r = rho.as_slice();
        self.elements
            .iter()
            .map(|e| r.iter().zip(e).map(|(a, b)| a.re * b.re + a.im * b.im).sum::<f64>().max(PROB_FLOOR))
            .collect()
    }

    fn log_likelihood(&self, probs: &[f64]) -> f64 {
        self.freqs.iter().zip(probs).map(|(f, p)| f * p.ln()).sum()
    }

    fn r_operator(&self, probs: &[f64]) -> ComplexMatrix {
        let mut r = vec![c(0.0, 0.0); self.dim * self.dim];
        for ((e, f), p) in self.elements.iter().zip(&self.freqs).zip(probs) {
            let w = f / p;
            r.iter_mut().zip(e).for_each(|(acc, x)| *acc += x * w);
        }
        ComplexMatrix::new(self.dim, self.dim, r).expect("square")
    }

    fn solve(&self, dims: Vec<usize>, opts: &MleOptions) -> Result<MleResult> {
        let d = self.dim;
        let mut rho = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
        let mut probs = self.probs(&rho);
        let mut ll = self.log_likelihood(&probs);
        let mut history = vec![ll];
        let mut converged = false;
        let mut iterations = 0;
        let id = ComplexMatrix::identity(d);
        while iterations < opts.max_iterations {
            iterations += 1;
            let r = self.r_operator(&probs);
            // plain RρR first, then diluted steps (1 + εR)/(1 + ε) if the
            // likelihood drops
            let mut accepted = None;
            let mut eps = f64::INFINITY;
            while eps > 1e-8 {
                let step = if eps.is_infinite() { r.clone() } else { &id + &r.scale_real(eps) };
                let next = step.matmul(&rho).matmul(&step.adjoint()).hermitian_part();
                let tr = next.trace().re;
                let next = next.scale_real(1.0 / tr);
                let p = self.probs(&next);
                let l = self.log_likelihood(&p);
                if l >= ll {
                    accepted = Some((next, p, l));
                    break;
                }
                eps = if eps.is_infinite() { 1.0 } else { eps / 2.0 };
            }
            let Some((next, p, l)) = accepted else {
                converged = true;
                break;
            };
            let gain = l - ll;
            assert!(gain >= 0.0, "log-likelihood decreased");
            rho = next;
            probs = p;
            ll = l;
            history.push(ll);
            if gain < opts.tolerance {
                converged = true;
                break;
            }
        }
        if !converged {
            log::info!("MLE stopped at the iteration cap of {}", opts.max_iterations);
        }
        let state = QuantumState::from_hermitian_projected(dims, &rho)?;
        Ok(MleResult { state, iterations, log_likelihood: history, converged })
    }
}

fn push_element(p: &mut Problem, e: &ComplexMatrix, count: u64, total: f64) {
    if count > 0 {
        // Tr ρΠ = Re Σ ρ_ij conj(Π_ij) for Hermitian Π
        p.elements.push(e.as_slice().to_vec());
        p.freqs.push(count as f64 / total);
    }
}

fn find_povm<'a>(povms: &'a [QuadraturePOVM], theta: f64) -> Result<&'a QuadraturePOVM> {
    povms
        .iter()
        .find(|p| (p.theta - theta).abs() < 1e-12)
        .ok_or_else(|| Error::InvalidParameter(format!("no POVM for phase {theta}")))
}

/// RρR reconstruction of a single mode. Pass POVMs built with the record's
/// efficiency to correct for detection loss, or with η = 1 to reconstruct
/// what the detector saw.
pub fn mle_reconstruct(record: &MeasurementRecord, povms: &[QuadraturePOVM], opts: &MleOptions) -> Result<MleResult> {
    if record.settings.iter().any(|s| s.basis.is_some()) {
        return Err(Error::InvalidParameter("record holds joint settings; use composite_mle".into()));
    }
    let dim = povms.first().ok_or_else(|| Error::InvalidParameter("no POVMs".into()))?.dim();
    let total = record.total_shots() as f64;
    if total == 0.0 {
        return Err(Error::InvalidParameter("record has no shots".into()));
    }
    let mut prob = Problem { dim, elements: Vec::new(), freqs: Vec::new() };
    for (s, row) in record.settings.iter().zip(&record.counts) {
        let povm = find_povm(povms, s.theta)?;
        if povm.grid != record.grid {
            return Err(Error::InvalidParameter("POVM and record grids differ".into()));
        }
        for (e, &n) in povm.elements.iter().zip(row) {
            push_element(&mut prob, e, n, total);
        }
    }
    prob.solve(vec![dim], opts)
}

/// Joint RρR reconstruction of qubit ⊗ mode from X, Y and Z records.
pub fn composite_mle(record: &MeasurementRecord, povms: &[QuadraturePOVM], opts: &MleOptions) -> Result<MleResult> {
    for b in QubitBasis::ALL {
        if !record.settings.iter().any(|s| s.basis == Some(b)) {
            return Err(Error::InvalidParameter(format!("missing qubit basis {}", b.label())));
        }
    }
    let n = povms.first().ok_or_else(|| Error::InvalidParameter("no POVMs".into()))?.dim();
    let total = record.total_shots() as f64;
    if total == 0.0 {
        return Err(Error::InvalidParameter("record has no shots".into()));
    }
    let bins = record.grid.bins;
    let mut prob = Problem { dim: 2 * n, elements: Vec::new(), freqs: Vec::new() };
    for (s, row) in record.settings.iter().zip(&record.counts) {
        let basis = s.basis.ok_or_else(|| Error::InvalidParameter("mode-only setting in a joint record".into()))?;
        let povm = find_povm(povms, s.theta)?;
        for q in 0..2 {
            let pq = basis.projector(q);
            for (e, &cnt) in povm.elements.iter().zip(&row[q * bins..(q + 1) * bins]) {
                if cnt > 0 {
                    push_element(&mut prob, &pq.tensor(e)?, cnt, total);
                }
            }
        }
    }
    prob.solve(vec![2, n], opts)
}

/// Diagonal of a single-mode state, clipped at zero and normalised.
pub fn photon_distribution(state: &QuantumState) -> Result<Vec<f64>> {
    let s = if state.dims().len() > 1 {
        state.partial_trace(&[state.dims().len() - 1])?
    } else {
        state.clone()
    };
    let d: Vec<f64> = s.matrix().diagonal().iter().map(|z| z.re.max(0.0)).collect();
    let total: f64 = d.iter().sum();
    Ok(d.into_iter().map(|p| p / total).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    /// Re α.
    pub xs: Vec<f64>,
    /// Im α.
    pub ps: Vec<f64>,
    /// values[i * xs.len() + j] = W(xs[j] + i ps[i]).
    pub values: Vec<f64>,
}

impl WignerGrid {
    /// ∫ W d²α by the trapezoid rule.
    pub fn integral(&self) -> f64 {
        let trap = |v: &[f64], i: usize| if i == 0 || i + 1 == v.len() { 0.5 } else { 1.0 };
        let dx = (self.xs[self.xs.len() - 1] - self.xs[0]) / (self.xs.len() - 1) as f64;
        let dp = (self.ps[self.ps.len() - 1] - self.ps[0]) / (self.ps.len() - 1) as f64;
        let mut s = 0.0;
        for i in 0..self.ps.len() {
            for j in 0..self.xs.len() {
                s += trap(&self.ps, i) * trap(&self.xs, j) * self.values[i * self.xs.len() + j];
            }
        }
        s * dx * dp
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,p,W\n");
        for (i, p) in self.ps.iter().enumerate() {
            for (j, x) in self.xs.iter().enumerate() {
                out.push_str(&format!("{x:.16e},{p:.16e},{:.16e}\n", self.values[i * self.xs.len() + j]));
            }
        }
        out
    }
}

/// Generalised Laguerre L_n^{(k)}(x).
fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let (mut l0, mut l1) = (1.0, 1.0 + k as f64 - x);
    if n == 0 {
        return l0;
    }
    for j in 1..n {
        let l2 = ((2 * j + 1 + k) as f64 - x) * l1 - (j + k) as f64 * l0;
        l0 = l1;
        l1 = l2 / (j + 1) as f64;
    }
    l1
}

/// W(α) of |m⟩⟨n| for m ≥ n.
fn wigner_element(m: usize, n: usize, alpha: Complex64) -> Complex64 {
    let r2 = alpha.norm_sqr();
    let ratio: f64 = (n + 1..=m).map(|k| 1.0 / k as f64).product::<f64>().sqrt();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let pw = (alpha.conj() * 2.0).powu((m - n) as u32);
    pw * (2.0 / PI * sign * ratio * (-2.0 * r2).exp() * laguerre(n, m - n, 4.0 * r2))
}

pub fn wigner_at(state: &QuantumState, alpha: Complex64) -> Result<f64> {
    if state.dims().len() != 1 {
        return Err(Error::Dimension("Wigner function of a single mode only".into()));
    }
    let rho = state.matrix();
    let d = state.dim();
    let mut w = 0.0;
    for m in 0..d {
        w += rho[(m, m)].re * wigner_element(m, m, alpha).re;
        for n in 0..m {
            // ρ_mn W_{|m⟩⟨n|} + ρ_nm W_{|n⟩⟨m|} = 2 Re(ρ_mn W_{|m⟩⟨n|})
            w += 2.0 * (rho[(m, n)] * wigner_element(m, n, alpha)).re;
        }
    }
    Ok(w)
}

pub fn wigner(state: &QuantumState, xs: &[f64], ps: &[f64]) -> Result<WignerGrid> {
    if xs.len() < 2 || ps.len() < 2 {
        return Err(Error::InvalidParameter("Wigner grid needs at least 2 points per axis".into()));
    }
    let mut values = Vec::with_capacity(xs.len() * ps.len());
    for &p in ps {
        for &x in xs {
            values.push(wigner_at(state, c(x, p))?);
        }
    }
    Ok(WignerGrid { xs: xs.to_vec(), ps: ps.to_vec(), values })
}

/// `count` evenly spaced points on [−half, half].
pub fn symmetric_axis(half: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| -half + 2.0 * half * k as f64 / (count - 1) as f64).collect()
}
