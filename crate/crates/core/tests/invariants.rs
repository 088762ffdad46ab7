//! Randomized invariants of the numerical core.

use approx::assert_abs_diff_eq;
use fidelion::entropy::{
    conditional_renyi, conditional_renyi2_closed_form, conditional_von_neumann, relative_entropy, renyi,
    renyi2_closed_form, tsallis, tsallis2_closed_form, von_neumann,
};
use fidelion::linalg::{
    frobenius_norm, hermitian_eig, partial_trace, singular_values, tensor_product, trace_norm, ComplexMatrix, Subsystem,
};
use fidelion::states::{
    decompose, random_density_matrix, random_unitary, reconstruct, weyl_spectrum, weyl_state, DensityMatrix, WeylParams,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn hermitian(entries: &[(f64, f64)], n: usize) -> ComplexMatrix {
    let raw = ComplexMatrix::from_fn(n, n, |i, j| {
        let (re, im) = entries[i * n + j];
        Complex64::new(re, im)
    });
    raw.hermitian_part()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_reconstructs(n in 1usize..7, entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 36)) {
        let m = hermitian(&entries, n);
        let spec = hermitian_eig(&m).unwrap();
        prop_assert!(spec.reconstruct().max_abs_diff(&m) < 1e-10);
        for w in spec.eigenvalues.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        let trace: f64 = spec.eigenvalues.iter().sum();
        prop_assert!((trace - m.trace().re).abs() < 1e-10);
    }

    #[test]
    fn norms_are_ordered(n in 1usize..6, entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 36)) {
        let m = ComplexMatrix::from_fn(n, n, |i, j| Complex64::new(entries[i * n + j].0, entries[i * n + j].1));
        let sv = singular_values(&m).unwrap();
        let fro = frobenius_norm(&m);
        let fro_sv: f64 = sv.iter().map(|s| s * s).sum::<f64>().sqrt();
        prop_assert!((fro - fro_sv).abs() < 1e-9);
        let tn = trace_norm(&m).unwrap();
        prop_assert!(tn + 1e-12 >= fro);
        prop_assert!(tn <= (n as f64).sqrt() * fro + 1e-9);
    }

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut r = rng(seed);
        let a = random_density_matrix(da, 1, da, &mut r).unwrap();
        let b = random_density_matrix(db, 1, db, &mut r).unwrap();
        let ab = tensor_product(a.matrix(), b.matrix()).unwrap();
        prop_assert!(partial_trace(&ab, (da, db), Subsystem::A).unwrap().max_abs_diff(a.matrix()) < 1e-12);
        prop_assert!(partial_trace(&ab, (da, db), Subsystem::B).unwrap().max_abs_diff(b.matrix()) < 1e-12);
    }

    #[test]
    fn bloch_round_trip(seed in any::<u64>(), da in 2usize..4, db in 2usize..4, rank in 1usize..5) {
        let rho = random_density_matrix(da, db, rank, &mut rng(seed)).unwrap();
        let back = reconstruct(&decompose(&rho).unwrap()).unwrap();
        prop_assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-10);
    }

    #[test]
    fn weyl_spectrum_matches_numerics(seed in any::<u64>()) {
        let params = WeylParams::random(&mut rng(seed));
        let numeric = weyl_state(&params).unwrap().spectrum().unwrap().eigenvalues;
        for (x, y) in weyl_spectrum(params.t()).iter().zip(&numeric) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_bounds(seed in any::<u64>(), rank in 1usize..5) {
        let rho = random_density_matrix(2, 2, rank, &mut rng(seed)).unwrap();
        let s = von_neumann(&rho).unwrap();
        prop_assert!((-1e-12..=2.0 + 1e-12).contains(&s));
        let c = conditional_von_neumann(&rho).unwrap();
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&c));
        // Rényi entropies decrease with the order
        let s2 = renyi(&rho, 2.0).unwrap();
        let s3 = renyi(&rho, 3.0).unwrap();
        prop_assert!(s + 1e-10 >= s2 && s2 + 1e-10 >= s3);
    }

    #[test]
    fn closed_forms_match_spectra(seed in any::<u64>(), rank in 1usize..5) {
        let rho = random_density_matrix(2, 2, rank, &mut rng(seed)).unwrap();
        let bf = decompose(&rho).unwrap();
        prop_assert!((renyi2_closed_form(&bf).unwrap() - renyi(&rho, 2.0).unwrap()).abs() < 1e-9);
        prop_assert!((conditional_renyi2_closed_form(&bf).unwrap() - conditional_renyi(&rho, 2.0).unwrap()).abs() < 1e-9);
        prop_assert!((tsallis2_closed_form(&bf).unwrap() - tsallis(&rho, 2.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn relative_entropy_nonnegative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_density_matrix(2, 2, 4, &mut r).unwrap();
        let sigma = random_density_matrix(2, 2, 2, &mut r).unwrap();
        prop_assert!(relative_entropy(&sigma, &rho).unwrap() >= -1e-10);
        prop_assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-9);
    }

    #[test]
    fn local_unitaries_preserve_spectra(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_density_matrix(2, 3, 3, &mut r).unwrap();
        let u = random_unitary(2, &mut r);
        let v = random_unitary(3, &mut r);
        let moved = rho.local_unitary(&u, &v).unwrap();
        assert_abs_diff_eq!(von_neumann(&moved).unwrap(), von_neumann(&rho).unwrap(), epsilon = 1e-10);
        assert_abs_diff_eq!(
            conditional_von_neumann(&moved).unwrap(),
            conditional_von_neumann(&rho).unwrap(),
            epsilon = 1e-10
        );
    }
}

#[test]
fn maximally_mixed_and_bell_entropies() {
    let mixed = DensityMatrix::maximally_mixed((2, 2));
    assert_abs_diff_eq!(von_neumann(&mixed).unwrap(), 2.0, epsilon = 1e-12);
    assert_abs_diff_eq!(conditional_von_neumann(&mixed).unwrap(), 1.0, epsilon = 1e-12);
    let bell = DensityMatrix::maximally_entangled(2);
    assert_abs_diff_eq!(von_neumann(&bell).unwrap(), 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(conditional_von_neumann(&bell).unwrap(), -1.0, epsilon = 1e-12);
}
