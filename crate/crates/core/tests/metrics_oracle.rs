use cryolink::linalg::Matrix;
use cryolink::metrics::{self, MetricReport};
use cryolink::GaussianState64;
use nalgebra::{Matrix4, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn omega() -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m[(0, 1)] = 1.0;
    m[(1, 0)] = -1.0;
    m[(2, 3)] = 1.0;
    m[(3, 2)] = -1.0;
    m
}

fn rotation(mode: usize, a: f64) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    let (s, c) = a.sin_cos();
    let k = 2 * mode;
    m[(k, k)] = c;
    m[(k, k + 1)] = -s;
    m[(k + 1, k)] = s;
    m[(k + 1, k + 1)] = c;
    m
}

fn squeeze(mode: usize, r: f64) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m[(2 * mode, 2 * mode)] = (-r).exp();
    m[(2 * mode + 1, 2 * mode + 1)] = r.exp();
    m
}

fn mixing(a: f64) -> Matrix4<f64> {
    let (s, c) = a.sin_cos();
    let mut m = Matrix4::zeros();
    for q in 0..2 {
        m[(q, q)] = c;
        m[(q, q + 2)] = s;
        m[(q + 2, q)] = -s;
        m[(q + 2, q + 2)] = c;
    }
    m
}

/// `S diag(ν₁,ν₁,ν₂,ν₂) Sᵀ` with `S` a random product of symplectic generators.
fn random_covariance(rng: &mut ChaCha8Rng) -> Matrix4<f64> {
    let nu1 = 0.25 * (1.0 + rng.random_range(0.0..3.0f64));
    let nu2 = 0.25 * (1.0 + rng.random_range(0.0..3.0f64));
    let mut s = Matrix4::identity();
    for _ in 0..4 {
        let g = match rng.random_range(0..3) {
            0 => rotation(rng.random_range(0..2), rng.random_range(-3.2..3.2)),
            1 => squeeze(rng.random_range(0..2), rng.random_range(-1.2..1.2)),
            _ => mixing(rng.random_range(-3.2..3.2)),
        };
        s = g * s;
    }
    let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(nu1, nu1, nu2, nu2));
    let v = s * d * s.transpose();
    (v + v.transpose()) * 0.5
}

/// Symplectic eigenvalues as square roots of the spectrum of
/// `V^{1/2} Ωᵀ V Ω V^{1/2}`, sorted descending.
fn oracle_symplectic(v: &Matrix4<f64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(*v);
    let root = eig.eigenvectors * Matrix4::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * eig.eigenvectors.transpose();
    let m = root * omega().transpose() * v * omega() * root;
    let mut vals: Vec<f64> = SymmetricEigen::new((m + m.transpose()) * 0.5)
        .eigenvalues
        .iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (vals[0], vals[3])
}

fn partial_transpose(v: &Matrix4<f64>) -> Matrix4<f64> {
    let p = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0));
    p * v * p
}

fn to_state(v: &Matrix4<f64>) -> GaussianState64 {
    let rows: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| v[(i, j)]).collect()).collect();
    GaussianState64::from_covariance(Matrix::from_rows(&rows).unwrap()).unwrap()
}

#[test]
fn symplectic_spectra_match_generic_eigensolver() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..1000 {
        let v = random_covariance(&mut rng);
        let state = to_state(&v);
        let (plus, minus) = metrics::symplectic_eigenvalues(&state).unwrap();
        let (op, om) = oracle_symplectic(&v);
        let scale = op.max(1.0);
        assert!((plus - op).abs() < 1e-9 * scale, "trial {trial}: ν₊ {plus} vs {op}");
        assert!((minus - om).abs() < 1e-9 * scale, "trial {trial}: ν₋ {minus} vs {om}");

        let (pt, _) = metrics::pt_symplectic_min(&state).unwrap();
        let (opt_plus, opt) = oracle_symplectic(&partial_transpose(&v));
        assert!((pt - opt).abs() < 1e-9 * opt_plus.max(1.0), "trial {trial}: ν̃₋ {pt} vs {opt}");
    }
}

#[test]
fn negativity_positive_iff_pt_eigenvalue_below_vacuum() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let state = to_state(&random_covariance(&mut rng));
        let (nu, _) = metrics::pt_symplectic_min(&state).unwrap();
        let n = metrics::negativity(&state).unwrap();
        assert_eq!(n > 0.0, nu < 0.25 - 1e-12, "ν̃₋ = {nu}, N = {n}");
    }
}

proptest! {
    #[test]
    fn lossless_split_negativity_follows_amplitude_squeezing(r in 0.0..2.0f64) {
        let squeezed = GaussianState64::vacuum(2).apply_squeeze(0, r, 0.0, 0.0).unwrap();
        let s_in = metrics::squeezing_level(&squeezed, 0).unwrap();
        let split = squeezed.apply_beam_splitter(0, 1, 0.5).unwrap();
        let n = metrics::negativity(&split).unwrap();
        // ν̃₋ = e^{−r}/4, so N = (e^r − 1)/2 = (10^{S/20} − 1)/2
        prop_assert!((n - (10f64.powf(s_in / 20.0) - 1.0) / 2.0).abs() < 1e-9);
        prop_assert!((n - (r.exp() - 1.0) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn negativity_invariant_under_local_rotations(seed in any::<u64>(), a in -3.2..3.2f64, b in -3.2..3.2f64) {
        let v = random_covariance(&mut ChaCha8Rng::seed_from_u64(seed));
        let state = to_state(&v);
        let n0 = metrics::negativity(&state).unwrap();
        let rotated = state.apply_rotation(0, a).unwrap().apply_rotation(1, b).unwrap();
        prop_assert!((metrics::negativity(&rotated).unwrap() - n0).abs() < 1e-9 * n0.max(1.0));
    }

    #[test]
    fn negativity_non_increasing_under_loss(seed in any::<u64>(), mode in 0usize..2, eps in 0.0..=1.0f64, n_env in 0.0..3.0f64) {
        let state = to_state(&random_covariance(&mut ChaCha8Rng::seed_from_u64(seed)));
        let before = metrics::negativity(&state).unwrap();
        let after = metrics::negativity(&state.apply_loss(mode, eps, n_env).unwrap()).unwrap();
        prop_assert!(after <= before + 1e-9 * before.max(1.0), "{after} > {before}");
    }

    #[test]
    fn local_rotation_keeps_purity_and_squeezing(seed in any::<u64>(), a in -3.2..3.2f64) {
        let state = to_state(&random_covariance(&mut ChaCha8Rng::seed_from_u64(seed)));
        let r0 = MetricReport::compute(&state).unwrap();
        let rotated = state.apply_rotation(1, a).unwrap();
        let r1 = MetricReport::compute(&rotated).unwrap();
        prop_assert!((r0.purity - r1.purity).abs() < 1e-9);
        prop_assert!((r0.squeezing_db[1] - r1.squeezing_db[1]).abs() < 1e-9);
        prop_assert!(r0.purity <= 1.0 + 1e-9);
    }
}

#[test]
fn two_mode_vacuum_has_no_negativity() {
    let r = MetricReport::compute(&GaussianState64::vacuum(2)).unwrap();
    assert_eq!(r.negativity, 0.0);
    assert!((r.purity - 1.0).abs() < 1e-15);
}
