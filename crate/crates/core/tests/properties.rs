use num_complex::Complex64;
use proptest::prelude::*;
use tcladder::eigenanalysis::{eps, rabi_splitting, sc_boundary, sc_criterion, splitting_roots};
use tcladder::hamiltonian::manifold_block;
use tcladder::linalg::{eigenvalues, match_multisets, max_abs, CMatrix};
use tcladder::liouvillian::{trajectory_defects, vec_row_major, DensityMatrix};
use tcladder::spectrum::{direct_correlation, two_time_correlation, EmissionOperator};
use tcladder::{System, SystemParams};

fn params() -> impl Strategy<Value = SystemParams> {
    (0.5f64..8.0, prop_oneof![Just(0.0), -0.5f64..0.5], 0.2f64..2.0, 0.0f64..4.0, 0.0f64..4.0).prop_map(
        |(omega0, delta, g, gamma_a, gamma_sigma)| SystemParams {
            omega0,
            delta,
            g,
            gamma_a,
            gamma_sigma,
        },
    )
}

/// Random state supported on manifolds up to `top`.
fn state(sys: &System, top: usize, seed: &[f64]) -> DensityMatrix {
    let d = sys.dim();
    let exc = sys.basis().excitations();
    let a = CMatrix::from_fn(d, d, |r, c| {
        if exc[r] <= top {
            let k = (r * d + c) % seed.len();
            Complex64::new(seed[k], seed[(k + 7) % seed.len()] * (c as f64 + 1.0).sin())
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    let rho = rho / tr;
    DensityMatrix::new((&rho + rho.adjoint()) * Complex64::new(0.5, 0.0), 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closed_forms_match_effective_hamiltonian(p in params()) {
        let sys = System::new(p, 4).unwrap();
        for n in 1..=4 {
            let h = manifold_block(sys.effective_hamiltonian(), sys.basis(), n).unwrap();
            let analytic: Vec<Complex64> = eps(n, &p).unwrap().iter().map(|e| e.value).collect();
            let (dev, _) = match_multisets(&eigenvalues(&h), &analytic);
            prop_assert!(dev < 1e-8 * p.g.max(1.0), "n={} dev={}", n, dev);
        }
    }

    #[test]
    fn trajectories_stay_physical(p in params(), seed in proptest::collection::vec(-1.0f64..1.0, 11)) {
        let sys = System::new(p, 2).unwrap();
        let rho0 = state(&sys, 2, &seed);
        let grid: Vec<f64> = (0..=20).map(|k| 0.15 * k as f64).collect();
        let traj = sys.evolve(&rho0, &grid).unwrap();
        let (trace, herm, min_eig) = trajectory_defects(&traj);
        prop_assert!(trace < 1e-10);
        prop_assert!(herm < 1e-12);
        prop_assert!(min_eig > -1e-8);
        for w in traj.windows(2) {
            let n0 = tcladder::liouvillian::expectation(&w[0].matrix, &sys.operators().number).unwrap().re;
            let n1 = tcladder::liouvillian::expectation(&w[1].matrix, &sys.operators().number).unwrap().re;
            prop_assert!(n1 <= n0 + 1e-12);
        }
    }

    #[test]
    fn generator_is_linear(p in params(), a in -2.0f64..2.0, seed in proptest::collection::vec(-1.0f64..1.0, 9)) {
        let sys = System::new(p, 1).unwrap();
        let x = state(&sys, 1, &seed).matrix;
        let y = state(&sys, 1, &seed[1..]).matrix;
        let s = Complex64::from(a);
        let lhs = sys.apply(&(&x * s + &y));
        let rhs = sys.apply(&x) * s + sys.apply(&y);
        prop_assert!(max_abs(&(lhs - rhs)) < 1e-11);
        // the Kronecker generator agrees with the direct right-hand side
        let g = sys.generator();
        let diff = &g * vec_row_major(&x) - vec_row_major(&sys.apply(&x));
        prop_assert!(diff.iter().all(|z| z.norm() < 1e-11));
    }

    #[test]
    fn regression_theorem_matches_direct(p in params(), seed in proptest::collection::vec(-1.0f64..1.0, 7)) {
        let sys = System::new(p, 2).unwrap();
        let rho0 = state(&sys, 2, &seed);
        let ts = [0.0, 0.5];
        let taus = [0.0, 0.5, 1.0];
        for op in [EmissionOperator::Cavity, EmissionOperator::Emitter1] {
            let a = two_time_correlation(&sys, op, &rho0, &ts, &taus).unwrap();
            let b = direct_correlation(&sys, op, &rho0, &ts, &taus).unwrap();
            prop_assert!(max_abs(&(&a.values - &b.values)) < 1e-7);
            for i in 0..ts.len() {
                prop_assert!(a.values[(i, 0)].im.abs() < 1e-10);
                prop_assert!(a.values[(i, 0)].re > -1e-10);
            }
        }
    }

    #[test]
    fn strong_coupling_iff_split(n in 1usize..6, y in 0.0f64..6.0) {
        prop_assume!((y - sc_boundary(n)).abs() > 1e-6);
        let p = SystemParams::resonant(2.0, 1.0, 4.0 * y, 0.0).unwrap();
        let strong = sc_criterion(n, &p).unwrap().strong;
        let split = rabi_splitting(n, &p).unwrap();
        prop_assert_eq!(strong, split > 1e-9, "y={} split={}", y, split);
    }

    #[test]
    fn splitting_roots_sum_to_zero(n in 2usize..8, p in params()) {
        let roots = splitting_roots(n, &p).unwrap();
        let sum: Complex64 = roots.iter().sum();
        prop_assert!(sum.norm() < 1e-9 * p.g);
    }
}
