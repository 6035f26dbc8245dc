use super::two_pointer::ProtocolRun;

/// Signed coefficient of `ε⁴` in the two-pointer product expectation.
///
/// With `A = B_i` and `C = B_j` (Schrödinger operators) and `Λ†` the channel
/// in the Heisenberg picture,
///
/// `f = −[ (1/48) Tr ρ{A³, Λ†C} + (1/12) Tr ρ{A, Λ†(C³)} + (1/16) Tr ρ A{A, Λ†C}A ]`.
///
/// For unitary dynamics `Λ†(C³) = (Λ†C)³`.
pub fn systematic_f(run: &ProtocolRun) -> f64 {
    let a = &run.obs_early;
    let heis = |m: &crate::operator::CMatrix| {
        crate::operator::Operator::from_matrix_unchecked(
            run.channel
                .heisenberg_matrix(m)
                .expect("dimensions validated at construction"),
        )
    };
    let c1 = heis(run.obs_late.matrix());
    let c3 = heis(run.obs_late.powi(3).matrix());
    let a3 = a.powi(3);
    let rho = &run.state;
    let t1 = rho.expectation(&a3.anticommutator(&c1));
    let t2 = rho.expectation(&a.anticommutator(&c3));
    let sandwich = &(a * &a.anticommutator(&c1)) * a;
    let t3 = rho.expectation(&sandwich);
    -(t1 / 48.0 + t2 / 12.0 + t3 / 16.0)
}

/// `(1/3)‖B‖⁴`, the magnitude bound on `f` for a basis of common norm `‖B‖`.
pub fn systematic_bound(norm: f64) -> f64 {
    norm.powi(4) / 3.0
}


#[cfg(test)]
mod ladder {
    use super::*;
    use crate::basis::pauli_basis;
    use crate::channel::KrausChannel;
    use crate::state::DensityState;
    use crate::weak::pointer::PointerConfig;
    use crate::weak::two_pointer::{product_expectation, run_two_pointer};
    use rand::{Rng, SeedableRng};

    #[test]
    fn residual_is_sixth_order_for_random_channels() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let b = pauli_basis();
        for _ in 0..20 {
            let run = ProtocolRun::new(
                KrausChannel::random(2, &mut rng),
                b.element(rng.gen_range(1..4)).clone(),
                b.element(rng.gen_range(1..4)).clone(),
                DensityState::random_full_rank(2, 0.05, &mut rng),
                PointerConfig::new(0.1).unwrap(),
            )
            .unwrap();
            let f = systematic_f(&run);
            let anti = run.anticommutator();
            let resid = |e: f64| {
                let r = run.with_config(PointerConfig::new(e).unwrap());
                (product_expectation(&run_two_pointer(&r).unwrap())
                    - e * e / 2.0 * anti
                    - e.powi(4) * f)
                    .abs()
            };
            let slope = (resid(0.3) / resid(0.15)).log2();
            assert!((slope - 6.0).abs() < 0.5, "slope {slope}");
        }
    }
}
