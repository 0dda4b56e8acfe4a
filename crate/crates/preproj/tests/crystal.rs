use preproj::crystal::{
    compare_kostant, emit_dot, emit_json, generate_binfty, lr_decompose, star_involution, verify_axioms,
    weight_multiplicities, CrystalGraph, DotOptions, OpKind,
};
use preproj::generic_ops::GenericityPolicy;
use preproj::{Algebra, CartanDatum, Error, Fp};

fn graph(d: CartanDatum, h: i64) -> CrystalGraph<Fp> {
    let pol = GenericityPolicy::default();
    generate_binfty(&Algebra::new(d), pol.field(), h, &pol).unwrap()
}

/// Weyl dimension for C = [[2,−1],[−2,2]] in fundamental-weight coordinates.
fn b2_dim(a: i64, b: i64) -> i64 {
    (a + 1) * (b + 1) * (a + b + 2) * (2 * a + b + 3) / 6
}

#[test]
fn low_layers() {
    for d in [CartanDatum::b2(), CartanDatum::g2()] {
        assert_eq!(graph(d, 3).layer_sizes(), vec![1, 2, 4, 7]);
    }
    let a2 = graph(CartanDatum::a2(2), 4);
    assert_eq!(a2.layer_sizes(), vec![1, 2, 4, 6, 9]);
}

#[test]
fn multiplicities_and_axioms() {
    let pol = GenericityPolicy::default();
    for d in [CartanDatum::b2(), CartanDatum::g2(), CartanDatum::a2(2)] {
        let g = graph(d, 4);
        for row in compare_kostant(&g).unwrap() {
            assert_eq!(row.nodes as u64, row.kostant, "{:?}", row.weight);
        }
        let rep = verify_axioms(&g, &pol).unwrap();
        assert!(rep.is_ok(), "{:?}", rep.violations.first());
        assert!(rep.checks.keys().any(|k| k.starts_with("cr")));
    }
    let g = graph(CartanDatum::b2(), 3);
    assert_eq!(weight_multiplicities(&g)[&vec![2, 1]], 2);
}

#[test]
fn edges_are_inverse() {
    let g = graph(CartanDatum::g2(), 4);
    for kind in [OpKind::Plain, OpKind::Star] {
        for b in 0..g.len() {
            for i in 0..2 {
                if let Some(up) = g.e(kind, b, i) {
                    assert!(g.f(kind, up, i).contains(&b));
                }
            }
        }
    }
    let star = star_involution(&g, &GenericityPolicy::default()).unwrap();
    for b in 0..g.len() {
        assert_eq!(star[star[b]], b);
        assert_eq!(g.nodes[star[b]].wt, g.nodes[b].wt);
    }
}

#[test]
fn tensor_product_b2() {
    let g = graph(CartanDatum::b2(), 5);
    let lr = lr_decompose(&g, &[1, 1], &[0, 2]).unwrap();
    let expected = vec![(vec![0, 1], 1), (vec![0, 3], 1), (vec![1, 1], 2), (vec![1, 3], 1), (vec![2, 1], 1)];
    let got: Vec<(Vec<i64>, u64)> = lr.entries.iter().map(|(nu, m)| (nu.clone(), *m as u64)).collect();
    assert_eq!(got, expected);
    let total: i64 = expected.iter().map(|(nu, m)| b2_dim(nu[0], nu[1]) * *m as i64).sum();
    assert_eq!(total, b2_dim(1, 1) * b2_dim(0, 2));

    let short = graph(CartanDatum::b2(), 1);
    assert!(matches!(lr_decompose(&short, &[1, 1], &[0, 2]), Err(Error::HeightInsufficient(_))));
}

#[test]
fn exports() {
    let g = graph(CartanDatum::b2(), 2);
    let dot = emit_dot(&g, &DotOptions::all());
    assert!(dot.starts_with("digraph"));
    assert!(dot.matches("label=").count() >= g.len());
    let v: serde_json::Value = serde_json::from_str(&emit_json(&g)).unwrap();
    assert_eq!(v["nodes"].as_array().unwrap().len(), 7);
    assert_eq!(emit_json(&g), emit_json(&graph(CartanDatum::b2(), 2)));
}
