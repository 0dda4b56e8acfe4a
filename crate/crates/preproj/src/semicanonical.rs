//! Generic values ρ_Z of convolution expressions on crystal components and
//! the inductive construction of functions f̃_Z dual to the components.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Mutex;

use num_traits::{One, Zero};

use crate::convolution::{ConvBudget, ConvExpr, Evaluator, ThetaMonomial};
use crate::crystal::{reconstruct_from_key, CrystalGraph, OpKind, StringKey};
use crate::error::{Error, Result};
use crate::field::{Field, FieldKind, Rational};
use crate::generic_ops::{salt_of, GenericityPolicy};
use crate::modrep::Rep;

/// Generic values on the components of a crystal graph, measured on two
/// independent representatives over ℚ per component.
pub struct RhoEvaluator<'g, F> {
    pub graph: &'g CrystalGraph<F>,
    policy: GenericityPolicy,
    budget: ConvBudget,
    evaluators: Mutex<HashMap<usize, std::sync::Arc<[Evaluator; 2]>>>,
    cache: Mutex<HashMap<(usize, ThetaMonomial), Rational>>,
}

impl<'g, F: Field> RhoEvaluator<'g, F> {
    pub fn new(graph: &'g CrystalGraph<F>, policy: &GenericityPolicy, budget: &ConvBudget) -> Self {
        RhoEvaluator {
            graph,
            policy: policy.clone(),
            budget: budget.clone(),
            evaluators: Mutex::new(HashMap::new()),
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// A representative over ℚ of node `b`, rebuilt from its string key.
    pub fn representative(&self, b: usize, copy: u64) -> Result<Rep<Rational>> {
        let nd = &self.graph.nodes[b];
        let key_salt = salt_of(&nd.key.iter().map(|&a| a as u64).collect::<Vec<_>>());
        let rep: Rep<Rational> = reconstruct_from_key(
            &self.graph.alg,
            FieldKind::Rational,
            &nd.key,
            &self.policy,
            salt_of(&[key_salt, copy, 0x7240]),
        )?;
        if rep.profile() != nd.profile() {
            return Err(Error::GenericityExhausted(format!(
                "representative of {:?} over ℚ has invariants {:?}",
                nd.key,
                rep.profile()
            )));
        }
        Ok(rep)
    }

    fn evaluators(&self, b: usize) -> Result<std::sync::Arc<[Evaluator; 2]>> {
        if let Some(e) = self.evaluators.lock().unwrap().get(&b) {
            return Ok(e.clone());
        }
        let pair = std::sync::Arc::new([
            Evaluator::new(&self.representative(b, 1)?, &self.budget)?,
            Evaluator::new(&self.representative(b, 2)?, &self.budget)?,
        ]);
        self.evaluators.lock().unwrap().insert(b, pair.clone());
        Ok(pair)
    }

    /// ρ_Z of one monomial.
    pub fn rho_monomial(&self, b: usize, m: &ThetaMonomial) -> Result<Rational> {
        if let Some(v) = self.cache.lock().unwrap().get(&(b, m.clone())) {
            return Ok(v.clone());
        }
        let ev = self.evaluators(b)?;
        let x = ev[0].euler(m)?.value;
        let y = ev[1].euler(m)?.value;
        if x != y {
            return Err(Error::GenericityExhausted(format!(
                "[{m}] takes values {x} and {y} on two representatives of {:?}",
                self.graph.nodes[b].key
            )));
        }
        let v = Rational::from_integer(x);
        self.cache.lock().unwrap().insert((b, m.clone()), v.clone());
        Ok(v)
    }

    /// ρ_Z(expr).
    pub fn rho(&self, b: usize, expr: &ConvExpr) -> Result<Rational> {
        let mut out = Rational::zero();
        for (m, c) in &expr.terms {
            out += self.rho_monomial(b, m)? * c;
        }
        Ok(out)
    }
}

pub fn rho_eval<F: Field>(
    graph: &CrystalGraph<F>,
    node: usize,
    expr: &ConvExpr,
    policy: &GenericityPolicy,
    budget: &ConvBudget,
) -> Result<Rational> {
    RhoEvaluator::new(graph, policy, budget).rho(node, expr)
}

/// Functions f̃_Z for the components of one weight, with the matrix
/// ρ_{Z'}(f̃_Z) (rows Z, columns Z').
pub struct SemicanonicalResult {
    pub weight: Vec<i64>,
    pub nodes: Vec<StringKey>,
    pub functions: BTreeMap<StringKey, ConvExpr>,
    pub delta: Vec<Vec<Rational>>,
}

impl SemicanonicalResult {
    pub fn is_dual(&self) -> bool {
        self.delta.iter().enumerate().all(|(r, row)| {
            row.iter().enumerate().all(|(c, x)| if r == c { x.is_one() } else { x.is_zero() })
        })
    }
}

/// Inductive construction: with i the smallest vertex where φ*_i(Z) > 0 and
/// p = φ*_i(Z), start from f̃_{Z₁} * 1_{E_i^p} where Z₁ = (f̃*_i)^p Z, then
/// subtract ρ_{Z'}(·) f̃_{Z'} for the other components Z' of the weight.
pub struct Semicanonical<'a, 'g, F> {
    rho: &'a RhoEvaluator<'g, F>,
    done: HashMap<usize, ConvExpr>,
    active: HashSet<usize>,
}

impl<'a, 'g, F: Field> Semicanonical<'a, 'g, F> {
    pub fn new(rho: &'a RhoEvaluator<'g, F>) -> Self {
        Semicanonical { rho, done: HashMap::new(), active: HashSet::new() }
    }

    pub fn function(&mut self, z: usize) -> Result<ConvExpr> {
        if let Some(f) = self.done.get(&z) {
            return Ok(f.clone());
        }
        let g = self.rho.graph;
        let nd = &g.nodes[z];
        if nd.key.is_empty() {
            return Ok(ConvExpr::one());
        }
        if !self.active.insert(z) {
            return Err(Error::DualityCheckFailed(format!("construction of {:?} depends on itself", nd.key)));
        }
        let i = nd.phi_star.iter().position(|&a| a > 0).ok_or_else(|| {
            Error::PreconditionViolated(format!("{:?} has no E_i quotient", nd.key))
        })?;
        let p = nd.phi_star[i];
        let mut z1 = z;
        for _ in 0..p {
            let down = g.f(OpKind::Star, z1, i);
            z1 = *down.first().ok_or_else(|| {
                Error::HeightInsufficient(format!("f̃*_{} of {:?} is not in the graph", i + 1, g.nodes[z1].key))
            })?;
        }
        let base = self.function(z1)?.mul(&ConvExpr::divided(i, p));
        let mut f = base.clone();
        for other in same_weight(g, z) {
            if other == z {
                continue;
            }
            let c = self.rho.rho(other, &base)?;
            if !c.is_zero() {
                let fo = self.function(other)?;
                f = f.add(&fo.scale(&-c));
            }
        }
        self.active.remove(&z);
        self.done.insert(z, f.clone());
        Ok(f)
    }
}

fn same_weight<F>(g: &CrystalGraph<F>, z: usize) -> Vec<usize> {
    (0..g.nodes.len()).filter(|&b| g.nodes[b].wt == g.nodes[z].wt).collect()
}

/// Construct f̃_Z for every component of weight `r` and check duality.
pub fn semicanonical_construct<F: Field>(
    graph: &CrystalGraph<F>,
    r: &[i64],
    policy: &GenericityPolicy,
    budget: &ConvBudget,
) -> Result<SemicanonicalResult> {
    let h: i64 = r.iter().sum();
    if h > graph.height {
        return Err(Error::HeightInsufficient(format!("weight of height {h} beyond graph height {}", graph.height)));
    }
    let rho = RhoEvaluator::new(graph, policy, budget);
    let mut sc = Semicanonical::new(&rho);
    let nodes: Vec<usize> = (0..graph.nodes.len()).filter(|&b| graph.nodes[b].wt == r).collect();
    let mut functions = BTreeMap::new();
    let mut delta = Vec::new();
    for &z in &nodes {
        let f = sc.function(z)?;
        let row = nodes.iter().map(|&w| rho.rho(w, &f)).collect::<Result<Vec<_>>>()?;
        delta.push(row);
        functions.insert(graph.nodes[z].key.clone(), f);
    }
    let out = SemicanonicalResult {
        weight: r.to_vec(),
        nodes: nodes.iter().map(|&z| graph.nodes[z].key.clone()).collect(),
        functions,
        delta,
    };
    if !out.is_dual() {
        let shown: Vec<Vec<String>> =
            out.delta.iter().map(|row| row.iter().map(crate::convolution::rational_string).collect()).collect();
        return Err(Error::DualityCheckFailed(format!("weight {r:?}: ρ matrix {shown:?}")));
    }
    Ok(out)
}
