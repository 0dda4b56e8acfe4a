use std::sync::Arc;

use preproj::catalog::{make_e, random_filtered_module, shuffled_word};
use preproj::convolution::{flag_count_fq, ConvBudget, ThetaMonomial};
use preproj::matrix::Matrix;
use preproj::{Algebra, CartanDatum, Field, FieldKind, Fp, Rational, Rep, RepQ};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const Q: FieldKind = FieldKind::Rational;

fn random_module(alg: &Arc<Algebra>, seed: u64, max_height: usize) -> RepQ {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = alg.n();
    let h = rng.gen_range(1..=max_height);
    let word: Vec<usize> = (0..h).map(|_| rng.gen_range(0..n)).collect();
    random_filtered_module(alg, Q, &word, &mut rng)
}

fn hom_ext_pair(alg: &Arc<Algebra>, a: u64, b: u64, max_height: usize) -> std::result::Result<(), TestCaseError> {
    let m = random_module(alg, a, max_height);
    let n = random_module(alg, b, max_height);
    prop_assert!(m.check_relations().is_empty());
    prop_assert!(m.is_locally_free() && n.is_locally_free());
    let mn = m.ext1_dim_direct(&n);
    let nm = n.ext1_dim_direct(&m);
    prop_assert_eq!(mn as i64, m.ext1_dim_lf(&n).unwrap());
    prop_assert_eq!(mn, nm);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hom_ext_formula_b2(a in any::<u64>(), b in any::<u64>()) {
        hom_ext_pair(&Algebra::new(CartanDatum::b2()), a, b, 4)?;
    }

    #[test]
    fn hom_ext_formula_g2(a in any::<u64>(), b in any::<u64>()) {
        hom_ext_pair(&Algebra::new(CartanDatum::g2()), a, b, 3)?;
    }

    #[test]
    fn hom_ext_formula_a2d2(a in any::<u64>(), b in any::<u64>()) {
        hom_ext_pair(&Algebra::new(CartanDatum::a2(2)), a, b, 4)?;
    }
}

/// Kostant partitions by direct recursion over the positive roots.
fn partitions(roots: &[Vec<i64>], target: &[i64]) -> u64 {
    if target.iter().all(|&x| x == 0) {
        return 1;
    }
    let Some((first, rest)) = roots.split_first() else { return 0 };
    let mut total = 0;
    let mut t = target.to_vec();
    loop {
        total += partitions(rest, &t);
        for (x, r) in t.iter_mut().zip(first) {
            *x -= r;
        }
        if t.iter().any(|&x| x < 0) {
            return total;
        }
    }
}

proptest! {
    #[test]
    fn kostant_count_matches_recursion(a in 0i64..6, b in 0i64..6) {
        let b2_roots = vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![1, 2]];
        let g2_roots = vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![1, 2], vec![1, 3], vec![2, 3]];
        prop_assert_eq!(CartanDatum::b2().kostant_count(&[a, b]).unwrap(), partitions(&b2_roots, &[a, b]));
        prop_assert_eq!(CartanDatum::g2().kostant_count(&[a, b]).unwrap(), partitions(&g2_roots, &[a, b]));
    }
}

fn random_invertible(n: usize, rng: &mut ChaCha8Rng, kind: FieldKind) -> Matrix<Fp> {
    loop {
        let data: Vec<Fp> = (0..n * n).map(|_| Fp::from_int(rng.gen_range(-4..=4), kind)).collect();
        let g = Matrix::from_vec(n, n, data);
        if g.rank() == n {
            return g;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flag_count_invariant_under_base_change(seed in any::<u64>()) {
        let alg = Algebra::new(CartanDatum::b2());
        let kind = FieldKind::Prime { p: 7 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let word = shuffled_word(&[2, 1], &mut rng);
        let m: Rep<Fp> = random_filtered_module(&alg, kind, &word, &mut rng);
        let g: Vec<Matrix<Fp>> = m.dims().iter().map(|&d| random_invertible(d, &mut rng, kind)).collect();
        let twisted = m.change_basis(&g);
        let budget = ConvBudget::default();
        for w in [vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]] {
            let t = ThetaMonomial::word(&w);
            prop_assert_eq!(flag_count_fq(&m, &t, &budget).unwrap(), flag_count_fq(&twisted, &t, &budget).unwrap());
        }
    }
}

#[test]
fn ext_against_simples_is_defect() {
    let alg = Algebra::new(CartanDatum::b2());
    for seed in 0..40 {
        let m = random_module(&alg, seed, 4);
        let r = m.rank_vector().unwrap();
        for i in 0..2 {
            let e = make_e::<Rational>(&alg, Q, i);
            let defect = m.phi(i) as i64 + m.phi_star(i) as i64 - alg.datum.pair_alpha(&r, i);
            assert_eq!(m.ext1_dim_direct(&e) as i64, defect * alg.datum.ci(i) as i64, "seed {seed}");
        }
    }
}
