use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qtomo::covariance::{exact_covariance, sampled_covariance, Budget};
use qtomo::gaussian::{random_symplectic, symplectic_eigenvalues, GaussianState};
use qtomo::operator::c;
use qtomo::reconstruction::{
    reconstruct_channel, solve_gram_general, solve_gram_qubit, AffineDynamics, GramMatrix, Mode,
};
use qtomo::{gell_mann_basis, structure_tensors, DensityState, KrausChannel, Operator};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_hermitian(dim: usize, r: &mut ChaCha8Rng) -> Operator {
    let m = qtomo::CMatrix::from_fn(dim, dim, |_, _| {
        c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
    });
    Operator::hermitian((&m + m.adjoint()) * c(0.5, 0.0)).unwrap()
}

#[test]
fn heisenberg_duality_over_many_triples() {
    let mut r = rng(1);
    for k in 0..200 {
        let dim = 2 + k % 2;
        let ch = KrausChannel::random(dim, &mut r);
        let rho = DensityState::random_full_rank(dim, 0.0, &mut r);
        let x = random_hermitian(dim, &mut r);
        let lhs = (ch.apply_matrix(rho.matrix()).unwrap() * x.matrix()).trace();
        let rhs = (rho.matrix() * ch.heisenberg_matrix(x.matrix()).unwrap()).trace();
        assert!((lhs - rhs).norm() < 1e-12, "triple {k}: {lhs} vs {rhs}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn channels_contract_trace_distance(seed in any::<u64>(), dim in 2usize..4) {
        let mut r = rng(seed);
        let ch = KrausChannel::random(dim, &mut r);
        let a = DensityState::random_full_rank(dim, 0.0, &mut r);
        let b = DensityState::random_full_rank(dim, 0.0, &mut r);
        let fa = DensityState::from_matrix(ch.apply_matrix(a.matrix()).unwrap()).unwrap();
        let fb = DensityState::from_matrix(ch.apply_matrix(b.matrix()).unwrap()).unwrap();
        prop_assert!(fa.trace_distance(&fb) <= a.trace_distance(&b) + 1e-12);
    }

    #[test]
    fn structure_tensors_reconstruct_products(dim in 2usize..5) {
        let basis = gell_mann_basis(dim).unwrap();
        prop_assert!(structure_tensors(&basis).reconstruction_error(&basis) < 1e-12);
    }

    #[test]
    fn qubit_round_trip_is_exact(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ch = KrausChannel::random(2, &mut r);
        let rho = DensityState::random_full_rank(2, 0.02, &mut r);
        let rec = reconstruct_channel(&rho, &ch, &gell_mann_basis(2).unwrap(), Mode::Exact).unwrap();
        prop_assert!(rec.diagnostics.action_error.unwrap() < 1e-8);
        prop_assert!(rec.diagnostics.completeness_defect < 1e-8);
        prop_assert!(rec.diagnostics.delta_m.unwrap() < 1e-8);
    }

    #[test]
    fn gram_solvers_agree_with_direct_gram(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ch = KrausChannel::random(2, &mut r);
        let basis = gell_mann_basis(2).unwrap();
        let dynamics = AffineDynamics::from_channel(&ch, &basis).unwrap();
        let direct = GramMatrix::from_channel(&ch, &basis).unwrap();
        let closed = solve_gram_qubit(&dynamics).unwrap();
        let general = solve_gram_general(&dynamics, &structure_tensors(&basis)).unwrap();
        prop_assert!((&closed.u - &direct.u).iter().all(|z| z.norm() < 1e-10));
        prop_assert!((&general.u - &direct.u).iter().all(|z| z.norm() < 1e-10));
        prop_assert!(direct.min_eigenvalue() > -1e-10);
    }

    #[test]
    fn symplectic_spectrum_is_invariant(seed in any::<u64>(), n in 1usize..4) {
        let mut r = rng(seed);
        let st = GaussianState::random(n, 1.0, &mut r);
        let s = random_symplectic(n, 0.5, &mut r);
        let moved = &s * &st.cov * s.transpose();
        let moved = (&moved + moved.transpose()) * 0.5;
        let a = symplectic_eigenvalues(&st.cov).unwrap();
        let b = symplectic_eigenvalues(&moved).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            prop_assert!((x - y).abs() < 1e-9 * x.max(1.0));
        }
    }

    #[test]
    fn sampling_is_seed_deterministic(seed in any::<u64>()) {
        let rho = DensityState::maximally_mixed(2);
        let ch = KrausChannel::phase_damping(0.5).unwrap();
        let budget = Budget::from_eps2(4.0 / 9.0, 200).unwrap();
        let basis = gell_mann_basis(2).unwrap();
        let a = sampled_covariance(&rho, &ch, &basis, &budget, seed).unwrap();
        let b = sampled_covariance(&rho, &ch, &basis, &budget, seed).unwrap();
        prop_assert_eq!(a.sigma, b.sigma);
    }
}

#[test]
fn qutrit_round_trips() {
    let mut r = rng(3);
    let basis = gell_mann_basis(3).unwrap();
    for _ in 0..10 {
        let ch = KrausChannel::random(3, &mut r);
        let rho = DensityState::random_full_rank(3, 0.02, &mut r);
        let rec = reconstruct_channel(&rho, &ch, &basis, Mode::Exact).unwrap();
        assert!(rec.diagnostics.action_error.unwrap() < 1e-8);
    }
}

#[test]
fn covariance_evolves_by_m() {
    // σ(t,t₀) = M σ(t₀,t₀) for any state
    let mut r = rng(5);
    let basis = gell_mann_basis(2).unwrap();
    for _ in 0..20 {
        let ch = KrausChannel::random(2, &mut r);
        let rho = DensityState::random_full_rank(2, 0.0, &mut r);
        let m = AffineDynamics::from_channel(&ch, &basis).unwrap().m;
        let st = exact_covariance(&rho, &ch, &basis).unwrap().sigma;
        let s0 = exact_covariance(&rho, &KrausChannel::identity(2), &basis)
            .unwrap()
            .sigma;
        let diff: DMatrix<f64> = st - &m * s0;
        assert!(diff.amax() < 1e-12);
    }
}
