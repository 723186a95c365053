use braidwork_core::braid::{act, random_cycle, random_moore, random_word, BraidLetter, BraidWord};
use braidwork_core::magnus::{face_series, magnus_embed, Series};
use braidwork_core::milnor::{degeneracy, face, is_cycle, is_moore, moore_normalize, SimplicialElement};
use braidwork_core::words::Word;
use braidwork_core::Integer;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn word(seed: u64, gens: usize, len: usize) -> Word {
    random_word(&mut ChaCha8Rng::seed_from_u64(seed), gens, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_laws(seed in any::<u64>(), gens in 1usize..5) {
        let a = word(seed, gens, 10);
        let b = word(seed ^ 1, gens, 10);
        let c = word(seed ^ 2, gens, 10);
        prop_assert_eq!(a.multiply(&b).unwrap().multiply(&c).unwrap(), a.multiply(&b.multiply(&c).unwrap()).unwrap());
        prop_assert!(a.multiply(&a.inverse()).unwrap().is_identity());
        let ab = a.commutator(&b).unwrap();
        prop_assert_eq!(ab.inverse(), b.commutator(&a).unwrap());
        prop_assert_eq!(a.pow(3).multiply(&a.pow(-2)).unwrap(), a.clone());
    }

    #[test]
    fn reduced_words_reparse(seed in any::<u64>(), gens in 1usize..5) {
        let a = word(seed, gens, 12);
        prop_assert_eq!(Word::parse(gens, &a.to_string()).unwrap(), a);
    }

    #[test]
    fn faces_are_homomorphisms(seed in any::<u64>(), q in 1usize..6) {
        let a = SimplicialElement::new(q, word(seed, q, 8)).unwrap();
        let b = SimplicialElement::new(q, word(seed ^ 7, q, 8)).unwrap();
        for j in 0..=q {
            let lhs = face(j, &a.multiply(&b).unwrap()).unwrap();
            let rhs = face(j, &a).unwrap().multiply(&face(j, &b).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(face(j, &degeneracy(j, &a).unwrap()).unwrap(), a.clone());
        }
    }

    #[test]
    fn magnus_is_a_homomorphism(seed in any::<u64>(), gens in 1usize..4) {
        let a = word(seed, gens, 6);
        let b = word(seed ^ 3, gens, 6);
        let ea: Series<Integer> = magnus_embed(&a, 5);
        let eb: Series<Integer> = magnus_embed(&b, 5);
        prop_assert_eq!(magnus_embed::<Integer>(&a.multiply(&b).unwrap(), 5), ea.mul(&eb).unwrap());
        prop_assert!(magnus_embed::<Integer>(&a.inverse(), 5).mul(&ea).unwrap() == Series::one(gens, 5));
    }

    #[test]
    fn magnus_intertwines_faces(seed in any::<u64>(), q in 1usize..5) {
        let a = SimplicialElement::new(q, word(seed, q, 6)).unwrap();
        for j in 0..=q {
            let lhs: Series<Integer> = magnus_embed(face(j, &a).unwrap().word(), 4);
            let rhs = face_series(j, &magnus_embed::<Integer>(a.word(), 4)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn normalization_lands_in_moore(seed in any::<u64>(), q in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = random_cycle(&mut rng, q);
        prop_assert!(is_cycle(&z));
        let n = moore_normalize(&z).unwrap();
        prop_assert!(is_moore(&n.normalized));
        prop_assert!(is_moore(&random_moore(&mut rng, q)));
    }

    #[test]
    fn braids_preserve_cycles(seed in any::<u64>(), q in 2usize..5, k in -1i32..3) {
        prop_assume!(k <= q as i32 - 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = random_cycle(&mut rng, q);
        let b = BraidWord::new(q - 1, vec![BraidLetter::sigma(k), BraidLetter::sigma_inv(-1)]).unwrap();
        prop_assert!(is_cycle(&act(&b, &z).unwrap()));
    }
}

#[test]
fn moore_boundary_of_a_commutator() {
    let c = SimplicialElement::parse(2, "y0^-1 y1^-1 y0 y1").unwrap();
    assert!(is_cycle(&c));
    let two = SimplicialElement::parse(3, "y0^-1 y1^-1 y0 y1").unwrap();
    assert!(!is_moore(&two));
}
