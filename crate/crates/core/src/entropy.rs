//! Entropy functionals of bipartite states (all logarithms base 2).
//!
//! Conditional quantities always condition on subsystem `B`:
//! `S(A|B) = S(AB) - S(B)`.

use crate::error::{Error, Result};
use crate::linalg::{matrix_log_on_support, Subsystem, SUPPORT_EPS};
use crate::states::{BlochFano, DensityMatrix};

/// How an entropy value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntropyMethod {
    Spectral,
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyReport {
    pub value: f64,
    pub method: EntropyMethod,
}

impl EntropyReport {
    pub fn spectral(value: f64) -> Self {
        Self {
            value,
            method: EntropyMethod::Spectral,
        }
    }

    pub fn closed_form(value: f64) -> Self {
        Self {
            value,
            method: EntropyMethod::ClosedForm,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(())
}

/// `-Σ λ log₂ λ` over eigenvalues above the support cutoff.
pub fn shannon_bits(spectrum: &[f64]) -> f64 {
    -spectrum
        .iter()
        .filter(|&&l| l > SUPPORT_EPS)
        .map(|&l| l * l.log2())
        .sum::<f64>()
}

fn power_trace(spectrum: &[f64], alpha: f64) -> f64 {
    spectrum.iter().filter(|&&l| l > SUPPORT_EPS).map(|l| l.powf(alpha)).sum()
}

fn eigenvalues(rho: &DensityMatrix) -> Result<Vec<f64>> {
    Ok(rho.spectrum()?.eigenvalues)
}

fn marginal_b(rho: &DensityMatrix) -> Result<DensityMatrix> {
    rho.reduced(Subsystem::B)
}

pub fn von_neumann(rho: &DensityMatrix) -> Result<f64> {
    Ok(shannon_bits(&eigenvalues(rho)?))
}

pub fn conditional_von_neumann(rho: &DensityMatrix) -> Result<f64> {
    Ok(von_neumann(rho)? - von_neumann(&marginal_b(rho)?)?)
}

pub fn renyi(rho: &DensityMatrix, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(power_trace(&eigenvalues(rho)?, alpha).log2() / (1.0 - alpha))
}

pub fn conditional_renyi(rho: &DensityMatrix, alpha: f64) -> Result<f64> {
    Ok(renyi(rho, alpha)? - renyi(&marginal_b(rho)?, alpha)?)
}

/// `-log₂ λ_max`.
pub fn min_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(-rho.spectrum()?.max().log2())
}

/// `log₂(λ_max(ρ_B) / λ_max(ρ_AB))`.
pub fn conditional_min_entropy(rho: &DensityMatrix) -> Result<f64> {
    let lb = marginal_b(rho)?.spectrum()?.max();
    let lab = rho.spectrum()?.max();
    Ok((lb / lab).log2())
}

pub fn tsallis(rho: &DensityMatrix, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok((power_trace(&eigenvalues(rho)?, alpha) - 1.0) / (1.0 - alpha))
}

/// `[Tr ρ_B^α - Tr ρ_AB^α] / [(α - 1) Tr ρ_B^α]`.
pub fn conditional_tsallis(rho: &DensityMatrix, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let tab = power_trace(&eigenvalues(rho)?, alpha);
    let tb = power_trace(&eigenvalues(&marginal_b(rho)?)?, alpha);
    Ok((tb - tab) / ((alpha - 1.0) * tb))
}

/// Base-2 relative entropy `D(σ||ρ) = Tr[σ (log σ - log ρ)]`.
pub fn relative_entropy(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<f64> {
    if sigma.dims() != rho.dims() {
        return Err(Error::DimensionMismatch("relative entropy of states with different dims".into()));
    }
    let log_rho = matrix_log_on_support(rho.matrix())?;
    if log_rho.support_deficient {
        // weight of σ on the kernel of ρ
        let spec = &log_rho.spectrum;
        let leak: f64 = spec
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l <= SUPPORT_EPS)
            .map(|(k, _)| sigma.matrix().expectation(&spec.eigenvector(k)).re)
            .sum();
        if leak > 1e-10 {
            return Err(Error::SupportViolation(format!(
                "sigma has weight {leak:e} outside the support of rho"
            )));
        }
    }
    let neg_entropy = -von_neumann(sigma)?;
    let cross = sigma.matrix().trace_product(&log_rho.log).re;
    Ok(neg_entropy - cross)
}

fn two_qubit_check(bf: &BlochFano) -> Result<()> {
    if bf.dims != (2, 2) {
        return Err(Error::DimensionMismatch(format!(
            "closed forms need a two-qubit state, got {:?}",
            bf.dims
        )));
    }
    Ok(())
}

// Tr ρ² = (1 + |a|² + |b|² + ||T||₂²) / 4 for two qubits.
fn purity_bloch(bf: &BlochFano) -> f64 {
    (1.0 + bf.a_norm_sq() + bf.b_norm_sq() + bf.t_frobenius_sq()) / 4.0
}

/// `S₂(AB) = log₂[4 / (1 + |a|² + |b|² + ||T||₂²)]`.
pub fn renyi2_closed_form(bf: &BlochFano) -> Result<f64> {
    two_qubit_check(bf)?;
    Ok(-purity_bloch(bf).log2())
}

/// `S₂(A|B) = log₂[(2 + 2|b|²) / (1 + |a|² + |b|² + ||T||₂²)]`.
pub fn conditional_renyi2_closed_form(bf: &BlochFano) -> Result<f64> {
    two_qubit_check(bf)?;
    Ok(((2.0 + 2.0 * bf.b_norm_sq()) / (4.0 * purity_bloch(bf))).log2())
}

/// `S₂ᵀ(AB) = (3 - |a|² - |b|² - ||T||₂²) / 4`.
pub fn tsallis2_closed_form(bf: &BlochFano) -> Result<f64> {
    two_qubit_check(bf)?;
    Ok((3.0 - bf.a_norm_sq() - bf.b_norm_sq() - bf.t_frobenius_sq()) / 4.0)
}

/// `(1 - |a|² + |b|² - ||T||₂²) / 4`.
///
/// This equals `Tr ρ_B² - Tr ρ_AB²`, i.e. the numerator of the quotient
/// form used by [`conditional_tsallis`] at `α = 2` without the division by
/// `Tr ρ_B²`. The two agree only when `Tr ρ_B² = 1`.
pub fn conditional_tsallis2_closed_form(bf: &BlochFano) -> Result<f64> {
    two_qubit_check(bf)?;
    Ok((1.0 - bf.a_norm_sq() + bf.b_norm_sq() - bf.t_frobenius_sq()) / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{tensor_product, ComplexMatrix};
    use crate::states::{decompose, weyl_state, WeylParams};

    fn bell() -> DensityMatrix {
        DensityMatrix::maximally_entangled(2)
    }

    fn mixed4() -> DensityMatrix {
        DensityMatrix::maximally_mixed((2, 2))
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn von_neumann_examples() {
        assert!(close(von_neumann(&bell()).unwrap(), 0.0));
        assert!(close(von_neumann(&mixed4()).unwrap(), 2.0));
        let half = ComplexMatrix::identity(2).scale(0.5);
        let pure = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let r = DensityMatrix::new(tensor_product(&half, &pure).unwrap(), (2, 2)).unwrap();
        assert!(close(von_neumann(&r).unwrap(), 1.0));
    }

    #[test]
    fn renyi_examples() {
        assert!(close(renyi(&mixed4(), 2.0).unwrap(), 2.0));
        assert!(close(renyi(&bell(), 2.0).unwrap(), 0.0));
        let flat = DensityMatrix::two_qubit(ComplexMatrix::from_real_diag(&[0.5, 0.5, 0.0, 0.0])).unwrap();
        assert!(close(renyi(&flat, 0.5).unwrap(), 1.0));
        for bad in [0.0, 1.0, -2.0, f64::NAN] {
            assert!(matches!(renyi(&flat, bad), Err(Error::InvalidAlpha(_))));
        }
    }

    #[test]
    fn conditional_renyi_examples() {
        assert!(close(conditional_renyi(&bell(), 2.0).unwrap(), -1.0));
        assert!(close(conditional_renyi(&mixed4(), 2.0).unwrap(), 1.0));
        let ra = ComplexMatrix::from_real_diag(&[0.8, 0.2]);
        let rb = ComplexMatrix::from_real_diag(&[0.6, 0.4]);
        let prod = DensityMatrix::two_qubit(tensor_product(&ra, &rb).unwrap()).unwrap();
        let s2a = -(0.8f64 * 0.8 + 0.2 * 0.2).log2();
        assert!(close(conditional_renyi(&prod, 2.0).unwrap(), s2a));
    }

    #[test]
    fn min_entropy_examples() {
        assert!(close(min_entropy(&bell()).unwrap(), 0.0));
        assert!(close(conditional_min_entropy(&bell()).unwrap(), -1.0));
        assert!(close(min_entropy(&mixed4()).unwrap(), 2.0));
        assert!(close(conditional_min_entropy(&mixed4()).unwrap(), 1.0));
        let w = weyl_state(&WeylParams::new([0.6, -0.5, 0.4]).unwrap()).unwrap();
        assert!(w.spectrum().unwrap().max() > 0.5);
        assert!(min_entropy(&w).unwrap() < 1.0);
    }

    #[test]
    fn tsallis_examples() {
        assert!(close(tsallis(&bell(), 2.0).unwrap(), 0.0));
        assert!(close(tsallis(&mixed4(), 2.0).unwrap(), 0.75));
        let half = DensityMatrix::new(ComplexMatrix::identity(2).scale(0.5), (2, 1)).unwrap();
        assert!(close(tsallis(&half, 2.0).unwrap(), 0.5));
    }

    #[test]
    fn conditional_tsallis_examples() {
        assert!(close(conditional_tsallis(&bell(), 2.0).unwrap(), -1.0));
        let p00 = DensityMatrix::two_qubit(ComplexMatrix::from_real_diag(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert!(close(conditional_tsallis(&p00, 2.0).unwrap(), 0.0));
        assert!(close(conditional_tsallis(&mixed4(), 2.0).unwrap(), 0.5));
    }

    #[test]
    fn relative_entropy_examples() {
        assert!(close(relative_entropy(&mixed4(), &mixed4()).unwrap(), 0.0));
        assert!(close(relative_entropy(&bell(), &mixed4()).unwrap(), 2.0));
        let p0 = DensityMatrix::new(ComplexMatrix::from_real_diag(&[1.0, 0.0]), (2, 1)).unwrap();
        let p1 = DensityMatrix::new(ComplexMatrix::from_real_diag(&[0.0, 1.0]), (2, 1)).unwrap();
        assert!(matches!(relative_entropy(&p0, &p1), Err(Error::SupportViolation(_))));
        // σ inside a deficient support is fine
        let half = DensityMatrix::new(ComplexMatrix::from_real_diag(&[0.5, 0.5, 0.0]), (3, 1)).unwrap();
        let p = DensityMatrix::new(ComplexMatrix::from_real_diag(&[1.0, 0.0, 0.0]), (3, 1)).unwrap();
        assert!(close(relative_entropy(&p, &half).unwrap(), 1.0));
    }

    #[test]
    fn closed_form_examples() {
        let bf = decompose(&mixed4()).unwrap();
        assert!(close(renyi2_closed_form(&bf).unwrap(), 2.0));
        assert!(close(conditional_renyi2_closed_form(&bf).unwrap(), 1.0));
        assert!(close(tsallis2_closed_form(&bf).unwrap(), 0.75));
        assert!(close(conditional_tsallis2_closed_form(&bf).unwrap(), 0.25));

        let bf = decompose(&bell()).unwrap();
        assert!(close(renyi2_closed_form(&bf).unwrap(), 0.0));
        assert!(close(conditional_renyi2_closed_form(&bf).unwrap(), -1.0));
        assert!(close(tsallis2_closed_form(&bf).unwrap(), 0.0));
        assert!(close(conditional_tsallis2_closed_form(&bf).unwrap(), -0.5));
        // the quotient form gives -1 on the same state
        assert!(close(conditional_tsallis(&bell(), 2.0).unwrap(), -1.0));
    }

    #[test]
    fn closed_forms_reject_non_qubit_input() {
        let bf = decompose(&DensityMatrix::maximally_mixed((2, 3))).unwrap();
        assert!(renyi2_closed_form(&bf).is_err());
        assert!(conditional_tsallis2_closed_form(&bf).is_err());
    }
}
