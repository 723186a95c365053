use braidwork_core::exactla::{
    elementary_divisors, homology_at, modp_rank, rank, smith_normal_form, solve_integer, solve_integer_dense,
    AbelianGroup, IntMatrix, Matrix,
};
use braidwork_core::{Integer, F3};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn dense_mul(a: &[Vec<Integer>], b: &[Vec<Integer>]) -> Vec<Vec<Integer>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| (0..cols).map(|j| (0..inner).map(|k| &row[k] * &b[k][j]).sum()).collect())
        .collect()
}

fn matrix_strategy(max_rows: usize, max_cols: usize) -> impl Strategy<Value = IntMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        proptest::collection::vec(prop_oneof![3 => Just(0i64), 2 => -4i64..=4], r * c).prop_map(move |v| {
            let rows: Vec<Vec<Integer>> = v.chunks(c).map(|ch| ch.iter().map(|&x| Integer::from(x)).collect()).collect();
            Matrix::from_dense(r, c, &rows).unwrap()
        })
    })
}

fn z(v: i64) -> Integer {
    Integer::from(v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn smith_transforms_diagonalize(m in matrix_strategy(6, 6)) {
        let s = smith_normal_form(&m, true);
        let t = s.transforms.as_ref().unwrap();
        let d = dense_mul(&dense_mul(&t.u, &m.to_dense()), &t.v);
        for (i, row) in d.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let want = if i == j && i < s.diagonal.len() { s.diagonal[i].clone() } else { Integer::zero() };
                prop_assert_eq!(x, &want);
            }
        }
        let nonzero: Vec<&Integer> = s.diagonal.iter().filter(|x| !x.is_zero()).collect();
        prop_assert_eq!(nonzero.len(), s.rank);
        for w in nonzero.windows(2) {
            prop_assert!(w[0].is_positive() && (w[1] % w[0]).is_zero());
        }
        let id = dense_mul(&t.u, &t.u_inv);
        for (i, row) in id.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                prop_assert_eq!(x, &z((i == j) as i64));
            }
        }
    }

    #[test]
    fn sparse_divisors_match_dense(m in matrix_strategy(8, 8)) {
        let dense: Vec<Integer> = smith_normal_form(&m, false).diagonal.into_iter().filter(|x| !x.is_zero()).collect();
        prop_assert_eq!(elementary_divisors(&m).unwrap(), dense);
    }

    #[test]
    fn mod_p_rank_counts_divisors(m in matrix_strategy(7, 7), p in prop::sample::select(vec![2u64, 3, 5, 7])) {
        let divisors = elementary_divisors(&m).unwrap();
        let expected = divisors.iter().filter(|d| !(*d % Integer::from(p)).is_zero()).count();
        prop_assert_eq!(modp_rank(&m, p).unwrap(), expected);
        prop_assert_eq!(rank(&m).unwrap(), divisors.len());
    }

    #[test]
    fn solutions_solve(m in matrix_strategy(6, 6), xs in proptest::collection::vec(-3i64..=3, 6)) {
        let x: Vec<Integer> = xs.iter().take(m.cols()).map(|&v| z(v)).chain(std::iter::repeat(z(0))).take(m.cols()).collect();
        let b = m.apply(&x).unwrap();
        let sol = solve_integer(&m, &b).unwrap().expect("b is in the image");
        prop_assert_eq!(m.apply(&sol).unwrap(), b.clone());
        prop_assert!(solve_integer_dense(&m, &b).unwrap().is_some());
    }
}

fn group(free: usize, torsion: &[i64]) -> AbelianGroup {
    AbelianGroup::from_orders(free, &torsion.iter().map(|&t| z(t)).collect::<Vec<_>>())
}

/// Homology of cellular chain complexes with known answers.
#[test]
fn cellular_homology_oracles() {
    // RP²: C2 --2--> C1 --0--> C0
    let d2 = IntMatrix::from_i64_rows(&[&[2]]);
    let d1 = IntMatrix::from_i64_rows(&[&[0]]);
    assert_eq!(homology_at(&d2, &d1).unwrap(), group(0, &[2]));
    assert_eq!(homology_at(&IntMatrix::zeros(1, 0), &d2).unwrap(), AbelianGroup::trivial());
    // torus: one 2-cell, two 1-cells, one 0-cell, all boundaries zero
    let t2 = IntMatrix::zeros(2, 1);
    let t1 = IntMatrix::zeros(1, 2);
    assert_eq!(homology_at(&t2, &t1).unwrap(), AbelianGroup::free(2));
    // Klein bottle: ∂e = 2b in the basis (a, b)
    let k2 = IntMatrix::from_i64_rows(&[&[0], &[2]]);
    assert_eq!(homology_at(&k2, &t1).unwrap(), group(1, &[2]));
    // lens space L(3,1) in degree 1
    let l2 = IntMatrix::from_i64_rows(&[&[3]]);
    assert_eq!(homology_at(&l2, &d1).unwrap(), group(0, &[3]));
    // over F3 the same complex has H1 = F3 and H2 = F3
    let l2p = l2.map(|x| F3::new(i64::try_from(x).unwrap()));
    let d1p = d1.map(|x| F3::new(i64::try_from(x).unwrap()));
    assert_eq!(homology_at(&l2p, &d1p).unwrap(), group(0, &[3]));
}

#[test]
fn groups_are_canonical() {
    assert_eq!(group(0, &[4, 6]), group(0, &[2, 12]));
    assert_eq!(group(1, &[2, 3]).to_string(), "Z + Z/6");
    assert_eq!(group(0, &[1, 1]), AbelianGroup::trivial());
    assert_eq!(group(0, &[2, 2]).exponent(), Some(z(2)));
}

#[test]
fn non_composable_pairs_are_rejected() {
    let a = IntMatrix::from_i64_rows(&[&[1], &[0]]);
    let b = IntMatrix::from_i64_rows(&[&[1, 0]]);
    assert!(homology_at(&a, &b).is_err());
}
