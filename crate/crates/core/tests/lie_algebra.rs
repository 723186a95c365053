use braidwork_core::lie::{
    bracket, coordinates_of, element_from_coordinates, lie_face, lie_recognize, lyndon_basis, moore_boundary_matrix,
    nondegenerate_basis, random_lie_element, tensor_expand, LieElement,
};
use braidwork_core::magnus::{face_series, Series};
use braidwork_core::{Integer, F2, F3};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn element(seed: u64, vars: usize, weight: usize) -> LieElement<Integer> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_lie_element::<Integer, _>(&mut rng, vars, weight, 4)
}

fn commutator(a: &Series<Integer>, b: &Series<Integer>) -> Series<Integer> {
    a.mul(b).unwrap().sub(&b.mul(a).unwrap()).unwrap()
}

fn lift(s: &Series<Integer>, trunc: usize) -> Series<Integer> {
    Series::from_terms(s.n_vars(), trunc, s.terms().iter().map(|(m, c)| (m.clone(), c.clone()))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn antisymmetry_and_jacobi(seed in any::<u64>(), vars in 2usize..4) {
        let a = element(seed, vars, 2);
        let b = element(seed ^ 11, vars, 2);
        let c = element(seed ^ 29, vars, 2);
        prop_assert_eq!(bracket(&a, &b).unwrap(), bracket(&b, &a).unwrap().neg());
        let j = bracket(&a, &bracket(&b, &c).unwrap()).unwrap()
            .add(&bracket(&b, &bracket(&c, &a).unwrap()).unwrap()).unwrap()
            .add(&bracket(&c, &bracket(&a, &b).unwrap()).unwrap()).unwrap();
        prop_assert!(j.is_zero(), "Jacobiator {}", j);
    }

    #[test]
    fn bracket_expands_to_commutator(seed in any::<u64>(), vars in 1usize..4) {
        let a = element(seed, vars, 3);
        let b = element(seed ^ 5, vars, 3);
        let ab = bracket(&a, &b).unwrap();
        let trunc = 6;
        let lhs = lift(&tensor_expand(&ab), trunc);
        let rhs = commutator(&lift(&tensor_expand(&a), trunc), &lift(&tensor_expand(&b), trunc));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn recognition_inverts_expansion(seed in any::<u64>(), vars in 1usize..4) {
        let a = element(seed, vars, 5);
        prop_assert_eq!(lie_recognize(&tensor_expand(&a)).unwrap(), a);
    }

    #[test]
    fn faces_linearize_series_faces(seed in any::<u64>(), q in 2usize..7, t in 2usize..7) {
        prop_assume!(q.pow(t as u32) <= 50_000);
        let a = element(seed, q, t).homogeneous_part(t);
        for j in 0..=q {
            let lie = tensor_expand(&lie_face(j, &a, q).unwrap());
            let series = face_series(j, &tensor_expand(&a)).unwrap().homogeneous_part(t);
            prop_assert_eq!(lie.terms(), series.terms());
        }
    }

    #[test]
    fn coordinates_round_trip(t in 2usize..6, q in 1usize..5, seed in any::<u64>()) {
        let basis = nondegenerate_basis::<Integer>(t, q).unwrap();
        prop_assume!(!basis.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let coords: Vec<Integer> = (0..basis.len()).map(|_| Integer::from(rng.gen_range(-3..=3))).collect();
        let z = element_from_coordinates(t, q, &coords).unwrap();
        prop_assert_eq!(coordinates_of(&z, t).unwrap(), coords);
    }
}

#[test]
fn lyndon_counts_follow_the_necklace_formula() {
    let expected = [(2, 1, 2), (2, 2, 1), (2, 3, 2), (2, 4, 3), (2, 5, 6), (2, 6, 9), (3, 3, 8), (3, 4, 18)];
    for (n, w, count) in expected {
        assert_eq!(lyndon_basis(n, w).unwrap().len(), count, "n={n} weight={w}");
    }
}

/// The Moore boundary squares to zero on every computed pair.
#[test]
fn boundaries_square_to_zero() {
    for t in 1..=6 {
        for q in 2..=6.min(t + 1) {
            let outer = moore_boundary_matrix::<Integer>(t, q - 1).unwrap();
            let inner = moore_boundary_matrix::<Integer>(t, q).unwrap();
            assert!(outer.mul(&inner).unwrap().is_zero(), "t={t} q={q}");
        }
    }
    for t in 1..=5 {
        for q in 2..=5.min(t + 1) {
            let outer = moore_boundary_matrix::<F2>(t, q - 1).unwrap();
            let inner = moore_boundary_matrix::<F2>(t, q).unwrap();
            assert!(outer.mul(&inner).unwrap().is_zero(), "mod 2, t={t} q={q}");
            let outer = moore_boundary_matrix::<F3>(t, q - 1).unwrap();
            let inner = moore_boundary_matrix::<F3>(t, q).unwrap();
            assert!(outer.mul(&inner).unwrap().is_zero(), "mod 3, t={t} q={q}");
        }
    }
}

#[test]
fn first_boundary_matrix() {
    let m = moore_boundary_matrix::<Integer>(3, 3).unwrap();
    let expected: Vec<Vec<Integer>> = vec![vec![(-1).into(), 1.into()], vec![1.into(), 0.into()]];
    assert_eq!(m.to_dense(), expected);
}
