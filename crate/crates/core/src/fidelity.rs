//! Fidelity of entanglement `F(ρ) = max_U ⟨φ⁺|(U⊗I)† ρ (U⊗I)|φ⁺⟩`.
//!
//! Two-qubit states use the closed form over the singular values of the
//! correlation tensor. Larger systems maximize over `U = exp(i Σ θ_k g_k)`
//! with multi-start Nelder–Mead; the result is a certified lower bound and is
//! always reported together with the `λ_max(ρ)` upper bound.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{exp_i_hermitian, matrix_log_on_support, ComplexMatrix};
use crate::optim::NelderMead;
use crate::states::{decompose, gell_mann_basis, phi_plus, DensityMatrix};

/// Largest local dimension for the unitary optimizer.
pub const MAX_OPTIMIZE_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FidelityMethod {
    ClosedForm,
    Optimized,
    WitnessBound,
}

impl FidelityMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ClosedForm => "closed-form",
            Self::Optimized => "optimized",
            Self::WitnessBound => "witness-bound",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerTrace {
    pub evaluations: usize,
    pub restarts: usize,
    /// Generator coefficients `θ` of the best unitary found.
    pub best_params: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FidelityResult {
    /// Exact for the closed form, a lower bound for the optimizer.
    pub value: f64,
    /// `λ_max(ρ)`.
    pub upper_bound: f64,
    pub method: FidelityMethod,
    pub trace: Option<OptimizerTrace>,
}

impl FidelityResult {
    /// `(lower, upper)` bracket on the true fidelity.
    pub fn bracket(&self) -> (f64, f64) {
        match self.method {
            FidelityMethod::ClosedForm => (self.value, self.value),
            _ => (self.value, self.upper_bound),
        }
    }
}

/// Settings of the multi-start unitary search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub simplex: NelderMead,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            simplex: NelderMead::default(),
        }
    }
}

fn require_square_dims(rho: &DensityMatrix) -> Result<usize> {
    let (da, db) = rho.dims();
    if da != db {
        return Err(Error::DimensionMismatch(format!("fidelity needs a d⊗d state, got {da}⊗{db}")));
    }
    Ok(da)
}

fn det3(m: &[f64]) -> f64 {
    m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6])
}

/// Closed-form two-qubit fidelity.
///
/// `F = (1 + σ₁ + σ₂ + s σ₃) / 4`, with `σ` the singular values of `T` and
/// `s = -sign(det T)` (taken as `+1` when `det T = 0`). This is
/// `(1 + ||T||₁) / 4` whenever `det T ≤ 0`, in particular whenever
/// `F > 1/2`.
pub fn fidelity_two_qubit(rho: &DensityMatrix) -> Result<FidelityResult> {
    if rho.dims() != (2, 2) {
        return Err(Error::DimensionMismatch(format!(
            "two-qubit closed form needs a 2⊗2 state, got {:?}",
            rho.dims()
        )));
    }
    let bf = decompose(rho)?;
    let sv = bf.t_singular_values()?;
    let sign = if det3(&bf.t) > 0.0 { -1.0 } else { 1.0 };
    let value = (1.0 + sv[0] + sv[1] + sign * sv[2]) / 4.0;
    Ok(FidelityResult {
        value,
        upper_bound: rho.spectrum()?.max(),
        method: FidelityMethod::ClosedForm,
        trace: None,
    })
}

/// `(1 + ||T||₁) / 4`, the trace-norm expression without the determinant
/// sign correction.
pub fn trace_norm_fidelity(rho: &DensityMatrix) -> Result<f64> {
    let bf = decompose(rho)?;
    Ok((1.0 + bf.t_singular_values()?.iter().sum::<f64>()) / 4.0)
}

/// `exp(i Σ θ_k g_k)` over the Gell-Mann generators plus the identity.
struct UnitaryFamily {
    d: usize,
    generators: Vec<ComplexMatrix>,
}

impl UnitaryFamily {
    fn new(d: usize) -> Result<Self> {
        let mut generators = gell_mann_basis(d)?;
        generators.push(ComplexMatrix::identity(d));
        Ok(Self { d, generators })
    }

    fn n_params(&self) -> usize {
        self.generators.len()
    }

    fn unitary(&self, theta: &[f64]) -> ComplexMatrix {
        let mut h = ComplexMatrix::zeros(self.d, self.d);
        for (g, &t) in self.generators.iter().zip(theta) {
            h = &h + &g.scale(t);
        }
        exp_i_hermitian(&h).expect("generator combination is Hermitian")
    }

    /// `(U⊗I)|φ⁺⟩`, whose amplitude on `|j i⟩` is `U_ji / √d`.
    fn rotated_phi(&self, theta: &[f64]) -> Vec<Complex64> {
        let u = self.unitary(theta);
        let s = 1.0 / (self.d as f64).sqrt();
        u.as_slice().iter().map(|z| z * s).collect()
    }
}

struct Maximum {
    value: f64,
    params: Vec<f64>,
    evaluations: usize,
}

// Maximizes ⟨v(θ)| M |v(θ)⟩ over the unitary family.
fn maximize_overlap(m: &ComplexMatrix, d: usize, cfg: &OptimizerConfig, seed: u64) -> Result<Maximum> {
    if d > MAX_OPTIMIZE_DIM {
        return Err(Error::UnsupportedDimension(d));
    }
    let family = UnitaryFamily::new(d)?;
    let n = family.n_params();
    let objective = |theta: &[f64]| -m.expectation(&family.rotated_phi(theta)).re;
    let mut best = Maximum {
        value: f64::NEG_INFINITY,
        params: vec![0.0; n],
        evaluations: 0,
    };
    for restart in 0..cfg.restarts.max(1) {
        let x0: Vec<f64> = if restart == 0 {
            vec![0.0; n]
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(restart as u64);
            (0..n).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
        };
        let found = cfg.simplex.minimize(objective, &x0);
        best.evaluations += found.evaluations;
        if -found.value > best.value {
            best.value = -found.value;
            best.params = found.x;
        }
    }
    Ok(best)
}

/// Optimizer-based fidelity for `d ⊗ d` states with `d ≤ 4`.
pub fn fidelity_optimize(rho: &DensityMatrix, cfg: &OptimizerConfig, seed: u64) -> Result<FidelityResult> {
    let d = require_square_dims(rho)?;
    let best = maximize_overlap(rho.matrix(), d, cfg, seed)?;
    let upper = rho.spectrum()?.max();
    Ok(FidelityResult {
        value: best.value.min(upper),
        upper_bound: upper,
        method: FidelityMethod::Optimized,
        trace: Some(OptimizerTrace {
            evaluations: best.evaluations,
            restarts: cfg.restarts.max(1),
            best_params: best.params,
        }),
    })
}

/// Closed form for two qubits, optimizer otherwise.
pub fn fidelity(rho: &DensityMatrix, cfg: &OptimizerConfig, seed: u64) -> Result<FidelityResult> {
    if rho.dims() == (2, 2) {
        fidelity_two_qubit(rho)
    } else {
        fidelity_optimize(rho, cfg, seed)
    }
}

/// `F(ρ) ≤ λ_max(ρ)`.
pub fn fidelity_upper_bound(rho: &DensityMatrix) -> Result<f64> {
    Ok(rho.spectrum()?.max())
}

/// Teleportation witness `W = I/d - |φ⁺⟩⟨φ⁺|` on `d ⊗ d`.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessOperator {
    pub d: usize,
    pub matrix: ComplexMatrix,
}

pub fn teleportation_witness(d: usize) -> Result<WitnessOperator> {
    if !(2..=MAX_OPTIMIZE_DIM).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let n = d * d;
    let matrix = &ComplexMatrix::identity(n).scale(1.0 / d as f64) - &ComplexMatrix::outer(&phi_plus(d));
    Ok(WitnessOperator { d, matrix })
}

/// `Tr[W ρ]`; negative values certify `F(ρ) > 1/d`.
pub fn witness_value(w: &WitnessOperator, rho: &DensityMatrix) -> Result<f64> {
    if rho.dims() != (w.d, w.d) {
        return Err(Error::DimensionMismatch(format!(
            "witness on {0}⊗{0} applied to {1:?} state",
            w.d,
            rho.dims()
        )));
    }
    Ok(w.matrix.trace_product(rho.matrix()).re)
}

/// `R(ρ) = max_U -Tr[log₂ρ (U⊗I) ρ_φ (U⊗I)†]` for full-rank `ρ`.
pub fn r_quantity(rho: &DensityMatrix, cfg: &OptimizerConfig, seed: u64) -> Result<f64> {
    let d = require_square_dims(rho)?;
    let log = matrix_log_on_support(rho.matrix())?;
    if log.support_deficient {
        return Err(Error::SupportViolation(format!(
            "R(rho) needs a full-rank state (min eigenvalue {:e})",
            log.spectrum.min()
        )));
    }
    let neg_log = log.log.scale(-1.0);
    Ok(maximize_overlap(&neg_log, d, cfg, seed)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::WeylParams;

    fn quick() -> OptimizerConfig {
        OptimizerConfig {
            restarts: 6,
            ..Default::default()
        }
    }

    #[test]
    fn two_qubit_examples() {
        let f = fidelity_two_qubit(&DensityMatrix::maximally_entangled(2)).unwrap();
        assert!((f.value - 1.0).abs() < 1e-12);
        let f = fidelity_two_qubit(&DensityMatrix::maximally_mixed((2, 2))).unwrap();
        assert!((f.value - 0.25).abs() < 1e-12);
        let f = fidelity_two_qubit(&DensityMatrix::isotropic(2, 0.8).unwrap()).unwrap();
        assert!((f.value - 0.85).abs() < 1e-12);
        assert!(fidelity_two_qubit(&DensityMatrix::maximally_mixed((3, 3))).is_err());
    }

    #[test]
    fn positive_determinant_uses_corrected_form() {
        // T = diag(0.3, 0.3, 0.3): ||T||₁ = 0.9 but the best rotation only reaches 0.3.
        let w = crate::states::weyl_state(&WeylParams::new([0.3, 0.3, 0.3]).unwrap()).unwrap();
        let f = fidelity_two_qubit(&w).unwrap();
        assert!((f.value - 1.3 / 4.0).abs() < 1e-12);
        assert!((trace_norm_fidelity(&w).unwrap() - 1.9 / 4.0).abs() < 1e-12);
        // for Bell-diagonal states F is the largest eigenvalue
        assert!((f.value - w.spectrum().unwrap().max()).abs() < 1e-12);
        let opt = fidelity_optimize(&w, &quick(), 1).unwrap();
        assert!((opt.value - f.value).abs() < 1e-8);
    }

    #[test]
    fn optimizer_examples() {
        for d in 2..=3 {
            let f = fidelity_optimize(&DensityMatrix::maximally_entangled(d), &quick(), 5).unwrap();
            assert!((f.value - 1.0).abs() < 1e-8, "d={d} F={}", f.value);
        }
        let f = fidelity_optimize(&DensityMatrix::maximally_mixed((3, 3)), &quick(), 5).unwrap();
        assert!((f.value - 1.0 / 9.0).abs() < 1e-8);
        assert!(matches!(
            fidelity_optimize(&DensityMatrix::maximally_mixed((5, 5)), &quick(), 0),
            Err(Error::UnsupportedDimension(5))
        ));
    }

    #[test]
    fn upper_bound_examples() {
        assert!((fidelity_upper_bound(&DensityMatrix::maximally_entangled(2)).unwrap() - 1.0).abs() < 1e-12);
        assert!((fidelity_upper_bound(&DensityMatrix::maximally_mixed((2, 2))).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn witness_examples() {
        let w = teleportation_witness(3).unwrap();
        let v = witness_value(&w, &DensityMatrix::maximally_mixed((3, 3))).unwrap();
        assert!((v - 2.0 / 9.0).abs() < 1e-14);
        let v = witness_value(&w, &DensityMatrix::maximally_entangled(3)).unwrap();
        assert!((v + 2.0 / 3.0).abs() < 1e-14);
        assert!(teleportation_witness(5).is_err());
        assert!(witness_value(&w, &DensityMatrix::maximally_mixed((2, 2))).is_err());
    }

    #[test]
    fn r_quantity_examples() {
        let r = r_quantity(&DensityMatrix::maximally_mixed((2, 2)), &quick(), 0).unwrap();
        assert!((r - 2.0).abs() < 1e-10);
        assert!(matches!(
            r_quantity(&DensityMatrix::maximally_entangled(2), &quick(), 0),
            Err(Error::SupportViolation(_))
        ));
        let rho = DensityMatrix::isotropic(2, 0.8).unwrap();
        let r = r_quantity(&rho, &quick(), 0).unwrap();
        let f = fidelity_optimize(&rho, &quick(), 0).unwrap();
        assert!(r >= -f.value - 1e-8);
        // the maximizer rotates φ⁺ onto another Bell state: -log₂((1-w)/4)
        assert!((r + (0.05f64).log2()).abs() < 1e-8);
    }
}
