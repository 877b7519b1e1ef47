mod common;

use common::{random_contraction, random_effect, random_isometry, rng, unit_vector};
use proptest::prelude::*;
use qeffect::effects::{
    below, below_matrix, factor_contraction, projection_join, projection_meet, weak_atom_bound,
};
use qeffect::incompat::{
    max_joint_lower_bound, noise_add, noise_flip, qubit_compat, qubit_effect, LowerBoundOptions,
};
use qeffect::numerics::eig_hermitian;
use qeffect::{Contraction, Effect, HermitianMatrix, Projection, TolerancePolicy};

fn pol() -> TolerancePolicy {
    TolerancePolicy::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weak_atom_bound_is_attained(seed in any::<u64>(), n in 2usize..6, kernel in 0usize..2) {
        let mut r = rng(seed);
        let (e, _) = random_effect(n, kernel, 0.05, &mut r);
        let phi = unit_vector(n, &mut r);
        let b = weak_atom_bound(&e, &phi).unwrap();
        prop_assert!(b >= 0.0);
        prop_assert!(b <= e.matrix().expectation(&phi) + 1e-12);
        let atom = HermitianMatrix::outer(&phi).scale(b);
        prop_assert!(below_matrix(&atom, e.matrix(), &pol()).unwrap());
    }

    #[test]
    fn factorisation_reconstructs(seed in any::<u64>(), n in 2usize..5, rows in 1usize..5) {
        let mut r = rng(seed);
        let k = random_contraction(rows.max(n), n, n, 0.3, 1.0, &mut r);
        let c0 = random_contraction(rows, rows.max(n), rows.min(n), 0.0, 1.0, &mut r);
        let m = &c0 * &k;
        let c = factor_contraction(
            &Contraction::new(m.clone()).unwrap(),
            &Contraction::new(k.clone()).unwrap(),
            &pol(),
        )
        .unwrap();
        prop_assert!((c.matrix() * &k - &m).norm() < 1e-8);
        prop_assert!(c.operator_norm() <= 1.0 + 1e-9);
    }

    #[test]
    fn joint_lower_bound_is_bracketed(seed in any::<u64>(), n in 2usize..4) {
        let mut r = rng(seed);
        let (e, _) = random_effect(n, 0, 0.1, &mut r);
        let (f, _) = random_effect(n, 0, 0.1, &mut r);
        let b = max_joint_lower_bound(&e, &f, &pol(), &LowerBoundOptions::default()).unwrap();
        prop_assert!(b.parallel_sum_trace <= b.value + 1e-12);
        prop_assert!(b.value <= b.upper + 1e-12);
        prop_assert!((b.witness.trace() - b.value).abs() < 1e-9);
        prop_assert!(below_matrix(&b.witness, e.matrix(), &pol()).unwrap());
        prop_assert!(below_matrix(&b.witness, f.matrix(), &pol()).unwrap());
        prop_assert!(eig_hermitian(&b.witness).min() >= -1e-12);
    }

    #[test]
    fn qubit_criterion_symmetries(
        e0 in 0.2f64..1.8, f0 in 0.2f64..1.8,
        ev in prop::array::uniform3(-1.0f64..1.0),
        fv in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let clip = |c: f64, v: [f64; 3]| {
            let cap = c.min(2.0 - c);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            let s = (cap / norm).min(1.0) * 0.999;
            [v[0] * s, v[1] * s, v[2] * s]
        };
        let e = qubit_effect(e0, clip(e0, ev)).unwrap();
        let f = qubit_effect(f0, clip(f0, fv)).unwrap();
        let base = qubit_compat(&e, &f).unwrap().slack;
        let swapped = qubit_compat(&f, &e).unwrap().slack;
        let flipped = qubit_compat(&e.complement(), &f).unwrap().slack;
        prop_assert!((base - swapped).abs() < 1e-12);
        prop_assert!((base - flipped).abs() < 1e-12);
    }

    #[test]
    fn noise_stays_in_band(seed in any::<u64>(), lambda in 0.01f64..0.99, p in 0.01f64..0.99) {
        let mut r = rng(seed);
        let (e, _) = random_effect(3, 1, 0.0, &mut r);
        let spec = eig_hermitian(noise_add(&e, lambda, p).unwrap().matrix());
        let m = lambda * p.min(1.0 - p);
        prop_assert!(spec.min() >= m - 1e-12 && spec.max() <= 1.0 - m + 1e-12);
        let g = noise_flip(&e, p).unwrap();
        let mixed = Effect::trivial(3, p).unwrap();
        prop_assert!(below(&Effect::zero(3), &g, &pol()).unwrap());
        prop_assert!((g.trace() - ((1.0 - 2.0 * p) * e.trace() + mixed.trace())).abs() < 1e-12);
    }

    #[test]
    fn meet_and_join_bracket_projections(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let a = Projection::from_basis(&random_isometry(n, 1 + seed as usize % (n - 1), &mut r));
        let b = Projection::from_basis(&random_isometry(n, n - 1, &mut r));
        let meet = projection_meet(&a, &b, &pol()).unwrap();
        let join = projection_join(&[a.clone(), b.clone()], &pol()).unwrap();
        for p in [&a, &b] {
            prop_assert!(below_matrix(meet.matrix(), p.matrix(), &pol()).unwrap());
            prop_assert!(below_matrix(p.matrix(), join.matrix(), &pol()).unwrap());
        }
        prop_assert!(meet.rank() + join.rank() == a.rank() + b.rank());
    }
}
