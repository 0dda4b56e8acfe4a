//! The doubled quiver and the defining relations of Π(C,D,Ω) and H(C,D,Ω).

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cartan::CartanDatum;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArrowKind {
    /// The loop ε_i.
    Loop { i: usize },
    /// α_ij^(g): j → i, with `g` counted from 1.
    Alpha { i: usize, j: usize, g: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub name: String,
    pub source: usize,
    pub target: usize,
    pub kind: ArrowKind,
}

#[derive(Clone, Debug)]
pub struct DoubledQuiver {
    pub n: usize,
    pub arrows: Vec<Arrow>,
    by_name: HashMap<String, usize>,
    loops: Vec<usize>,
    alphas: HashMap<(usize, usize, usize), usize>,
}

impl DoubledQuiver {
    pub fn build(datum: &CartanDatum) -> Self {
        let n = datum.n();
        let mut arrows = Vec::new();
        let mut loops = Vec::new();
        let mut alphas = HashMap::new();
        for i in 0..n {
            loops.push(arrows.len());
            arrows.push(Arrow {
                name: format!("eps_{}", i + 1),
                source: i,
                target: i,
                kind: ArrowKind::Loop { i },
            });
        }
        for i in 0..n {
            for j in datum.neighbors(i) {
                for g in 1..=datum.g(i, j) {
                    alphas.insert((i, j, g), arrows.len());
                    arrows.push(Arrow {
                        name: format!("a_{}_{}_{}", i + 1, j + 1, g),
                        source: j,
                        target: i,
                        kind: ArrowKind::Alpha { i, j, g },
                    });
                }
            }
        }
        let by_name = arrows.iter().enumerate().map(|(k, a)| (a.name.clone(), k)).collect();
        DoubledQuiver { n, arrows, by_name, loops, alphas }
    }

    pub fn eps(&self, i: usize) -> usize {
        self.loops[i]
    }

    pub fn alpha(&self, i: usize, j: usize, g: usize) -> usize {
        self.alphas[&(i, j, g)]
    }

    pub fn arrow_index(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }
}

/// Integer linear combination of paths. A path lists arrows in written
/// order, so `[a, b]` is the composite `a ∘ b` (apply `b` first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathExpr {
    pub label: String,
    pub source: usize,
    pub target: usize,
    pub terms: Vec<(i64, Vec<usize>)>,
}

#[derive(Serialize, Deserialize)]
struct PathTermJson {
    coeff: i64,
    path: Vec<String>,
}

impl PathExpr {
    pub fn to_json(&self, q: &DoubledQuiver) -> serde_json::Value {
        let terms: Vec<PathTermJson> = self
            .terms
            .iter()
            .map(|(c, p)| PathTermJson { coeff: *c, path: p.iter().map(|&a| q.arrows[a].name.clone()).collect() })
            .collect();
        serde_json::to_value(terms).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value, q: &DoubledQuiver, label: &str) -> Result<Self> {
        let terms: Vec<PathTermJson> =
            serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let mut out = Vec::new();
        for t in terms {
            let mut path = Vec::new();
            for name in &t.path {
                path.push(q.arrow_index(name).ok_or_else(|| Error::Parse(format!("unknown arrow {name}")))?);
            }
            out.push((t.coeff, path));
        }
        let (source, target) = endpoints(q, &out)?;
        Ok(PathExpr { label: label.to_string(), source, target, terms: out })
    }

    /// Render with arrow names, e.g. `a_1_2_1 a_2_1_1 eps_1 + eps_1 a_1_2_1 a_2_1_1`.
    pub fn render(&self, q: &DoubledQuiver) -> String {
        let mut s = String::new();
        for (k, (c, p)) in self.terms.iter().enumerate() {
            let word: Vec<&str> = p.iter().map(|&a| q.arrows[a].name.as_str()).collect();
            s.push_str(match (k, *c < 0) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            });
            if c.abs() != 1 {
                s.push_str(&format!("{} ", c.abs()));
            }
            s.push_str(&word.join(" "));
        }
        s
    }

    fn checked(label: String, q: &DoubledQuiver, terms: Vec<(i64, Vec<usize>)>) -> Self {
        let (source, target) = endpoints(q, &terms).expect("relation paths are composable");
        PathExpr { label, source, target, terms }
    }
}

fn endpoints(q: &DoubledQuiver, terms: &[(i64, Vec<usize>)]) -> Result<(usize, usize)> {
    let mut ends = None;
    for (_, p) in terms {
        if p.is_empty() {
            return Err(Error::Parse("empty path".into()));
        }
        for w in p.windows(2) {
            if q.arrows[w[0]].source != q.arrows[w[1]].target {
                return Err(Error::Parse("path is not composable".into()));
            }
        }
        let e = (q.arrows[*p.last().unwrap()].source, q.arrows[p[0]].target);
        if ends.is_some_and(|x| x != e) {
            return Err(Error::Parse("paths with different endpoints".into()));
        }
        ends = Some(e);
    }
    ends.ok_or_else(|| Error::Parse("empty expression".into()))
}

fn eps_power(q: &DoubledQuiver, i: usize, k: usize) -> Vec<usize> {
    vec![q.eps(i); k]
}

fn nilpotency(datum: &CartanDatum, q: &DoubledQuiver, i: usize) -> PathExpr {
    PathExpr::checked(format!("P1[{}]", i + 1), q, vec![(1, eps_power(q, i, datum.ci(i)))])
}

fn commutativity(datum: &CartanDatum, q: &DoubledQuiver, i: usize, j: usize, g: usize) -> PathExpr {
    let a = q.alpha(i, j, g);
    let mut left = eps_power(q, i, datum.f(j, i));
    left.push(a);
    let mut right = vec![a];
    right.extend(eps_power(q, j, datum.f(i, j)));
    PathExpr::checked(format!("P2[{},{},{}]", i + 1, j + 1, g), q, vec![(1, left), (-1, right)])
}

fn mesh(datum: &CartanDatum, q: &DoubledQuiver, i: usize) -> Option<PathExpr> {
    let mut terms = Vec::new();
    for j in datum.neighbors(i) {
        let fji = datum.f(j, i);
        for g in 1..=datum.g(i, j) {
            for f in 0..fji {
                let mut p = eps_power(q, i, f);
                p.push(q.alpha(i, j, g));
                p.push(q.alpha(j, i, g));
                p.extend(eps_power(q, i, fji - 1 - f));
                terms.push((datum.sgn(i, j), p));
            }
        }
    }
    if terms.is_empty() {
        None
    } else {
        Some(PathExpr::checked(format!("P3[{}]", i + 1), q, terms))
    }
}

/// Relations (P1), (P2), (P3), grouped by vertex in that order.
pub fn preprojective_relations(datum: &CartanDatum, q: &DoubledQuiver) -> Vec<PathExpr> {
    let mut out = Vec::new();
    for i in 0..datum.n() {
        out.push(nilpotency(datum, q, i));
        for j in datum.neighbors(i) {
            for g in 1..=datum.g(i, j) {
                out.push(commutativity(datum, q, i, j, g));
            }
        }
        out.extend(mesh(datum, q, i));
    }
    out
}

/// Relations (H1), (H2) of the subalgebra on the arrows of Ω and the loops.
pub fn h_relations(datum: &CartanDatum, q: &DoubledQuiver) -> Vec<PathExpr> {
    let mut out = Vec::new();
    for i in 0..datum.n() {
        out.push(nilpotency(datum, q, i));
    }
    for &(i, j) in datum.omega() {
        for g in 1..=datum.g(i, j) {
            out.push(commutativity(datum, q, i, j, g));
        }
    }
    out
}

/// A Cartan datum with its quiver and relations, shared by all modules.
#[derive(Debug)]
pub struct Algebra {
    pub datum: CartanDatum,
    pub quiver: DoubledQuiver,
    pub relations: Vec<PathExpr>,
}

impl Algebra {
    pub fn new(datum: CartanDatum) -> Arc<Self> {
        let quiver = DoubledQuiver::build(&datum);
        let relations = preprojective_relations(&datum, &quiver);
        Arc::new(Algebra { datum, quiver, relations })
    }

    pub fn n(&self) -> usize {
        self.datum.n()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rendered(alg: &Algebra, prefix: &str) -> Vec<String> {
        alg.relations.iter().filter(|r| r.label.starts_with(prefix)).map(|r| r.render(&alg.quiver)).collect()
    }

    #[test]
    fn b2_relations() {
        let alg = Algebra::new(CartanDatum::b2());
        assert_eq!(alg.quiver.len(), 4);
        assert_eq!(
            rendered(&alg, "P3"),
            vec!["a_1_2_1 a_2_1_1 eps_1 + eps_1 a_1_2_1 a_2_1_1", "-a_2_1_1 a_1_2_1"]
        );
        assert!(rendered(&alg, "P1").contains(&"eps_1 eps_1".to_string()));
    }

    #[test]
    fn a2_d2_commutativity() {
        let alg = Algebra::new(CartanDatum::a2(2));
        assert!(rendered(&alg, "P2").contains(&"eps_1 a_1_2_1 - a_1_2_1 eps_2".to_string()));
    }

    #[test]
    fn g2_mesh() {
        let alg = Algebra::new(CartanDatum::g2());
        assert_eq!(
            rendered(&alg, "P3[1]"),
            vec!["a_1_2_1 a_2_1_1 eps_1 eps_1 + eps_1 a_1_2_1 a_2_1_1 eps_1 + eps_1 eps_1 a_1_2_1 a_2_1_1"]
        );
        let h = h_relations(&alg.datum, &alg.quiver);
        assert_eq!(h.len(), 3);
    }

    #[test]
    fn json_roundtrip() {
        let alg = Algebra::new(CartanDatum::b2());
        for r in &alg.relations {
            let back = PathExpr::from_json(&r.to_json(&alg.quiver), &alg.quiver, &r.label).unwrap();
            assert_eq!(&back, r);
        }
    }
}
