//! Named example modules and the labeled-basis builder.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;
use serde_json::Value;

use crate::cartan::{CartanConfig, CartanDatum};
use crate::error::{Error, Result};
use crate::field::{parse_rational, Field, FieldKind};
use crate::matrix::Matrix;
use crate::modrep::Rep;
use crate::presentation::Algebra;

/// A module given by basis vectors tagged with vertices (numbered from 1)
/// and an action table `[arrow, from, to, scalar]` on basis indices
/// (numbered from 0). The scalar is an integer, a rational string or the
/// symbol `"lambda"`.
#[derive(Clone, Debug, Deserialize)]
pub struct LabeledBasisSpec {
    pub basis: Vec<usize>,
    pub actions: Vec<(String, usize, usize, Value)>,
}

impl LabeledBasisSpec {
    pub fn new(basis: Vec<usize>) -> Self {
        LabeledBasisSpec { basis, actions: Vec::new() }
    }

    pub fn act(&mut self, arrow: &str, from: usize, to: usize, scalar: i64) {
        self.actions.push((arrow.to_string(), from, to, Value::from(scalar)));
    }
}

fn scalar_of<F: Field>(v: &Value, kind: FieldKind, lambda: &F) -> Result<F> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(|x| F::from_int(x, kind))
            .ok_or_else(|| Error::Parse(format!("scalar {n} is not an integer"))),
        Value::String(s) if s.trim() == "lambda" => Ok(lambda.clone()),
        Value::String(s) if s.trim() == "-lambda" => Ok(-lambda.clone()),
        Value::String(s) => parse_rational(s)
            .and_then(|q| F::from_rational(&q, kind))
            .ok_or_else(|| Error::Parse(format!("bad scalar {s:?}"))),
        other => Err(Error::Parse(format!("bad scalar {other}"))),
    }
}

/// Build and relation-check the module described by `spec`.
pub fn from_labeled_basis<F: Field>(
    alg: &Arc<Algebra>,
    kind: FieldKind,
    spec: &LabeledBasisSpec,
    lambda: &F,
) -> Result<Rep<F>> {
    let n = alg.n();
    let mut dims = vec![0; n];
    let mut local = Vec::with_capacity(spec.basis.len());
    for &v in &spec.basis {
        if v == 0 || v > n {
            return Err(Error::Input(format!("vertex {v} out of range 1..={n}")));
        }
        local.push(dims[v - 1]);
        dims[v - 1] += 1;
    }
    let q = &alg.quiver;
    let mut mats: Vec<Matrix<F>> =
        q.arrows.iter().map(|a| Matrix::zeros(dims[a.target], dims[a.source])).collect();
    for (name, from, to, x) in &spec.actions {
        let a = q.arrow_index(name).ok_or_else(|| Error::Parse(format!("unknown arrow {name}")))?;
        let arrow = &q.arrows[a];
        let (Some(&vf), Some(&vt)) = (spec.basis.get(*from), spec.basis.get(*to)) else {
            return Err(Error::Input(format!("basis index out of range in action of {name}")));
        };
        if vf - 1 != arrow.source || vt - 1 != arrow.target {
            return Err(Error::Input(format!("{name} cannot send a vector at {vf} to one at {vt}")));
        }
        let s = scalar_of(x, kind, lambda)?;
        let cell = &mut mats[a][(local[*to], local[*from])];
        *cell = cell.clone() + s;
    }
    Rep::checked(alg.clone(), kind, dims, mats)
}

/// E_i: one Jordan block of size c_i at vertex i.
pub fn make_e<F: Field>(alg: &Arc<Algebra>, kind: FieldKind, i: usize) -> Rep<F> {
    let c = alg.datum.ci(i);
    let mut spec = LabeledBasisSpec::new(vec![i + 1; c]);
    let eps = format!("eps_{}", i + 1);
    for k in 0..c.saturating_sub(1) {
        spec.act(&eps, k, k + 1, 1);
    }
    from_labeled_basis(alg, kind, &spec, &F::zero()).expect("E_i is a module")
}

/// E_i^p.
pub fn make_e_power<F: Field>(alg: &Arc<Algebra>, kind: FieldKind, i: usize, p: usize) -> Rep<F> {
    let e = make_e(alg, kind, i);
    Rep::direct_sum_all(alg.clone(), kind, &vec![e; p])
}

/// The one-dimensional simple module at i.
pub fn make_s<F: Field>(alg: &Arc<Algebra>, kind: FieldKind, i: usize) -> Rep<F> {
    let spec = LabeledBasisSpec::new(vec![i + 1]);
    from_labeled_basis(alg, kind, &spec, &F::zero()).expect("S_i is a module")
}

/// The tree module X(i,j) of rank (1−c_ij)α_i + α_j.
pub fn make_serre_witness<F: Field>(alg: &Arc<Algebra>, kind: FieldKind, i: usize, j: usize) -> Result<Rep<F>> {
    let datum = &alg.datum;
    if i == j || i >= datum.n() || j >= datum.n() || datum.c(i, j) >= 0 || datum.ci(i) < 2 {
        return Err(Error::PreconditionViolated(format!(
            "X({},{}) needs c_ij < 0 and c_i ≥ 2",
            i + 1,
            j + 1
        )));
    }
    let (ci, cj) = (datum.ci(i), datum.ci(j));
    let (gij, fij) = (datum.g(i, j), datum.f(i, j));
    let eps_i = format!("eps_{}", i + 1);
    let eps_j = format!("eps_{}", j + 1);
    let mut spec = LabeledBasisSpec::new(Vec::new());
    // chain(k) holds the basis indices b_1..b_c with ε b_k = b_{k−1}.
    let chain = |spec: &mut LabeledBasisSpec, v: usize, c: usize, eps: &str| {
        let start = spec.basis.len();
        spec.basis.extend(std::iter::repeat(v + 1).take(c));
        for k in 1..c {
            spec.act(eps, start + k, start + k - 1, 1);
        }
        start
    };
    let mut copies = BTreeMap::new();
    for g in 1..=gij {
        for f in 1..=fij {
            copies.insert((g, f), chain(&mut spec, i, ci, &eps_i));
        }
    }
    let b = chain(&mut spec, i, ci, &eps_i);
    let a = chain(&mut spec, j, cj, &eps_j);
    for g in 1..=gij {
        for f in 1..=fij {
            spec.act(&format!("a_{}_{}_{}", i + 1, j + 1, g), a + cj - f, copies[&(g, f)], 1);
        }
        spec.act(&format!("a_{}_{}_{}", j + 1, i + 1, g), b + ci - 1, a, 1);
    }
    from_labeled_basis(alg, kind, &spec, &F::zero())
}

/// A random iterated extension: `word[0]` gives the socle layer, each later
/// vertex adds a copy of E_i on top through a random cocycle with small
/// integer coordinates (zero with probability 1/5, giving split pieces).
pub fn random_filtered_module<F: Field, R: rand::Rng + ?Sized>(
    alg: &Arc<Algebra>,
    kind: FieldKind,
    word: &[usize],
    rng: &mut R,
) -> Rep<F> {
    let mut m = Rep::zero(alg.clone(), kind);
    for &i in word {
        let e = make_e::<F>(alg, kind, i);
        let space = Rep::extension_space(&e, &m);
        let split = rng.gen_ratio(1, 5);
        let coeffs: Vec<F> = (0..space.dim())
            .map(|_| if split { F::zero() } else { F::from_int(rng.gen_range(-3..=3), kind) })
            .collect();
        let z = space.basis.mul_vec(&coeffs);
        m = Rep::build_extension(&e, &m, &space.blocks(&z));
    }
    m
}

/// A random word with `r_i` letters `i`.
pub fn shuffled_word<R: rand::Rng + ?Sized>(r: &[i64], rng: &mut R) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut w: Vec<usize> = r.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat(i).take(k as usize)).collect();
    w.shuffle(rng);
    w
}

#[derive(Deserialize)]
struct FixtureFile {
    cartan: CartanConfig,
    modules: BTreeMap<String, LabeledBasisSpec>,
}

/// A named family of example modules over one Cartan datum.
pub struct FixtureSet {
    pub alg: Arc<Algebra>,
    pub specs: BTreeMap<String, LabeledBasisSpec>,
}

impl FixtureSet {
    pub fn parse(text: &str) -> Result<Self> {
        let file: FixtureFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let alg = Algebra::new(file.cartan.to_datum()?);
        Ok(FixtureSet { alg, specs: file.modules })
    }

    pub fn datum(&self) -> &CartanDatum {
        &self.alg.datum
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.specs.keys().map(|s| s.as_str())
    }

    /// The module `name` with the parameter λ (ignored by modules without
    /// one).
    pub fn module_with<F: Field>(&self, name: &str, kind: FieldKind, lambda: &F) -> Result<Rep<F>> {
        let spec = self.specs.get(name).ok_or_else(|| Error::Input(format!("no fixture named {name}")))?;
        from_labeled_basis(&self.alg, kind, spec, lambda)
    }

    /// The module `name` with λ = 1.
    pub fn module<F: Field>(&self, name: &str, kind: FieldKind) -> Result<Rep<F>> {
        self.module_with(name, kind, &F::from_int(1, kind))
    }

    /// Direct sum of named fixtures.
    pub fn sum<F: Field>(&self, names: &[&str], kind: FieldKind) -> Result<Rep<F>> {
        let parts = names.iter().map(|n| self.module(n, kind)).collect::<Result<Vec<_>>>()?;
        Ok(Rep::direct_sum_all(self.alg.clone(), kind, &parts))
    }
}

pub fn b2_fixtures() -> FixtureSet {
    FixtureSet::parse(include_str!("../fixtures/b2.json")).expect("bundled B2 fixtures")
}

pub fn g2_fixtures() -> FixtureSet {
    FixtureSet::parse(include_str!("../fixtures/g2.json")).expect("bundled G2 fixtures")
}

pub fn a2d2_fixtures() -> FixtureSet {
    FixtureSet::parse(include_str!("../fixtures/a2d2.json")).expect("bundled A2 fixtures")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rational;

    const Q: FieldKind = FieldKind::Rational;

    #[test]
    fn e_and_s() {
        let alg = Algebra::new(CartanDatum::b2());
        let e1 = make_e::<Rational>(&alg, Q, 0);
        assert_eq!(e1.dims(), &[2, 0]);
        assert_eq!(e1.jordan_type(0), vec![2]);
        let s2 = make_s::<Rational>(&alg, Q, 1);
        let e2 = make_e::<Rational>(&alg, Q, 1);
        assert_eq!(s2.dims(), e2.dims());
        let sum = Rep::direct_sum_all(alg.clone(), Q, &[e1.clone(), e1, e2]);
        assert_eq!(sum.dims(), &[4, 1]);
    }

    #[test]
    fn all_fixtures_satisfy_relations() {
        for set in [b2_fixtures(), g2_fixtures(), a2d2_fixtures()] {
            for name in set.names() {
                let m = set.module::<Rational>(name, Q).unwrap();
                assert!(m.check_relations().is_empty(), "{name}");
            }
        }
    }

    #[test]
    fn dimension_vectors() {
        let b2 = b2_fixtures();
        let dims = |n: &str| b2.module::<Rational>(n, Q).unwrap().dims().to_vec();
        assert_eq!(dims("P_1"), vec![4, 2]);
        assert_eq!(dims("X"), vec![4, 1]);
        let g2 = g2_fixtures();
        let q = g2.module::<Rational>("Q", Q).unwrap();
        assert_eq!(q.rank_vector(), Some(vec![1, 2]));
    }

    #[test]
    fn wrong_sign_breaks_mesh_relation() {
        let b2 = b2_fixtures();
        let mut spec = b2.specs["P_1"].clone();
        spec.actions[5].3 = Value::from(1);
        let err = from_labeled_basis::<Rational>(&b2.alg, Q, &spec, &Rational::from_integer(1.into())).unwrap_err();
        assert!(err.to_string().contains("P3[1]"));
    }

    #[test]
    fn serre_witness_shapes() {
        let big = Algebra::new(
            CartanDatum::new(vec![vec![2, -6], vec![-2, 2]], vec![2, 6], [(0, 1)].into_iter().collect()).unwrap(),
        );
        let x = make_serre_witness::<Rational>(&big, Q, 0, 1).unwrap();
        assert_eq!(x.dims(), &[14, 6]);
        assert_eq!(x.rank_vector(), Some(vec![7, 1]));
        let g2 = Algebra::new(CartanDatum::g2());
        assert_eq!(make_serre_witness::<Rational>(&g2, Q, 0, 1).unwrap().dims(), &[6, 1]);
        assert!(make_serre_witness::<Rational>(&g2, Q, 1, 0).is_err());
    }
}
