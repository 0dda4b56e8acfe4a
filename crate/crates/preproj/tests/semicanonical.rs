use num_traits::{One, Zero};
use preproj::convolution::{ConvBudget, ConvExpr, ThetaMonomial};
use preproj::crystal::{generate_binfty, CrystalGraph};
use preproj::generic_ops::GenericityPolicy;
use preproj::semicanonical::{semicanonical_construct, RhoEvaluator};
use preproj::{Algebra, CartanDatum, Fp, Rational};

fn b2_graph(h: i64) -> CrystalGraph<Fp> {
    let pol = GenericityPolicy::default();
    generate_binfty(&Algebra::new(CartanDatum::b2()), pol.field(), h, &pol).unwrap()
}

#[test]
fn serre_halves_separate_components() {
    let g = b2_graph(3);
    let rho = RhoEvaluator::new(&g, &GenericityPolicy::default(), &ConvBudget::default());
    let half = Rational::one() / Rational::from_integer(2.into());
    let left = ConvExpr::monomial(ThetaMonomial::word(&[1, 0, 0]), half.clone());
    let right = ConvExpr::monomial(ThetaMonomial::word(&[0, 0, 1]), half);
    let nodes: Vec<usize> = (0..g.len()).filter(|&z| g.nodes[z].wt == vec![2, 1]).collect();
    assert_eq!(nodes.len(), 2);
    let mut seen = Vec::new();
    for z in nodes {
        let pair = (rho.rho(z, &left).unwrap(), rho.rho(z, &right).unwrap());
        assert!(pair.0.is_zero() != pair.1.is_zero());
        assert!((pair.0.clone() + pair.1.clone()).is_one());
        seen.push(pair.0.is_one());
    }
    assert!(seen.contains(&true) && seen.contains(&false));
}

#[test]
fn dual_functions_up_to_height_three() {
    let g = b2_graph(3);
    let pol = GenericityPolicy::default();
    let b = ConvBudget::default();
    for a in 0..=3i64 {
        for c in 0..=(3 - a) {
            let res = semicanonical_construct(&g, &[a, c], &pol, &b).unwrap();
            assert!(res.is_dual(), "{:?}", res.weight);
            assert_eq!(res.functions.len(), res.nodes.len());
        }
    }
}
