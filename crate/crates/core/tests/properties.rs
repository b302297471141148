//! Randomized invariants of the decomposition and of the polarization state.

mod common;

use common::{dense_mul, random_dense, random_unitary, rng, Dense};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use schmidt_core::polarization::{coherence, density_matrix_checks, mixture_decomposition, polarization_density_matrix, reassemble};
use schmidt_core::schmidt::{schmidt_decompose, DecompositionOptions};
use schmidt_core::tensor::{normalize, AmplitudeMatrix, CMatrix, Grid};

fn amplitude(a: &Dense) -> AmplitudeMatrix {
    let n = a.len();
    let m = CMatrix::from_rows(a).unwrap();
    normalize(&AmplitudeMatrix::from_matrix(Grid::square(-1.0, 1.0, n).unwrap(), m).unwrap()).unwrap()
}

fn weights(a: &Dense) -> Vec<f64> {
    let opts = DecompositionOptions { truncation_relative_threshold: 0.0, ..Default::default() };
    schmidt_decompose(&amplitude(a), &opts).unwrap().lambdas
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitary_invariance(seed in any::<u64>(), n in 2usize..=8) {
        let mut r = rng(seed);
        let a = random_dense(&mut r, n, n);
        let u = random_unitary(&mut r, n);
        let w = random_unitary(&mut r, n);
        let rotated = dense_mul(&dense_mul(&u, &a), &w);
        prop_assert!(close(&weights(&a), &weights(&rotated), 1e-12));
    }

    #[test]
    fn transpose_symmetry(seed in any::<u64>(), n in 2usize..=8) {
        let a = random_dense(&mut rng(seed), n, n);
        let t: Dense = (0..n).map(|i| (0..n).map(|j| a[j][i]).collect()).collect();
        prop_assert!(close(&weights(&a), &weights(&t), 1e-12));
    }

    #[test]
    fn global_phase_leaves_gauged_modes(seed in any::<u64>(), n in 2usize..=6, phi in -3.1f64..3.1) {
        let a = random_dense(&mut rng(seed), n, n);
        let z = C64::from_polar(1.0, phi);
        let b: Dense = a.iter().map(|row| row.iter().map(|x| x * z).collect()).collect();
        let opts = DecompositionOptions::default();
        let ra = schmidt_decompose(&amplitude(&a), &opts).unwrap();
        let rb = schmidt_decompose(&amplitude(&b), &opts).unwrap();
        prop_assert!(close(&ra.lambdas, &rb.lambdas, 1e-12));
        // the phase moves entirely into the q-modes
        for k in 0..ra.rank {
            let dp = ra.modes_p[k].iter().zip(&rb.modes_p[k]).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            let dq = ra.modes_q[k].iter().zip(&rb.modes_q[k]).map(|(x, y)| (x * z - y).norm()).fold(0.0, f64::max);
            prop_assert!(dp < 1e-10 && dq < 1e-10, "mode {k}: {dp:e} {dq:e}");
        }
    }

    #[test]
    fn coherence_is_bounded_and_transposes_to_conjugate(seed in any::<u64>(), n in 2usize..=8) {
        let a = amplitude(&random_dense(&mut rng(seed), n, n));
        let f = coherence(&a).unwrap();
        prop_assert!(f.norm() <= 1.0 + 1e-12);
        let ft = coherence(&a.transpose()).unwrap();
        prop_assert!((ft - f.conj()).norm() < 1e-14);
    }

    #[test]
    fn purity_identity(f in 0.0f64..=1.0) {
        let rho = polarization_density_matrix(C64::new(f, 0.0)).unwrap();
        let d = density_matrix_checks(rho.matrix()).unwrap();
        prop_assert!((d.purity - 0.5 * (1.0 + f * f)).abs() < 1e-12);
        prop_assert!(d.is_valid());
        let m = mixture_decomposition(f).unwrap();
        prop_assert!((d.eigenvalues[0] - m[0].weight).abs() < 1e-12);
        prop_assert!((d.eigenvalues[1] - m[1].weight).abs() < 1e-12);
        prop_assert!(reassemble(&m).sub(rho.matrix()).unwrap().max_abs() < 1e-14);
    }
}

#[test]
fn purity_identity_on_fine_sweep() {
    for i in 0..=100 {
        let f = i as f64 / 100.0;
        let d = density_matrix_checks(polarization_density_matrix(C64::new(f, 0.0)).unwrap().matrix()).unwrap();
        assert!((d.purity - 0.5 * (1.0 + f * f)).abs() < 1e-12, "F = {f}");
    }
}

#[test]
fn real_input_gives_real_coherence() {
    let mut r = rng(3);
    for _ in 0..50 {
        let a: Dense = random_dense(&mut r, 5, 5).into_iter().map(|row| row.into_iter().map(|z| C64::new(z.re, 0.0)).collect()).collect();
        assert_eq!(coherence(&amplitude(&a)).unwrap().im, 0.0);
    }
}
