//! Evaluation of convolution products of characteristic functions of
//! E_i^p at concrete modules.
//!
//! A monomial 1_{E_{i_1}^{p_1}} * ··· * 1_{E_{i_t}^{p_t}} evaluated at M is
//! the Euler characteristic of the variety of chains
//! 0 = U_0 ⊆ ··· ⊆ U_t = M with U_k/U_{k−1} ≅ E_{i_k}^{p_k}; the leftmost
//! factor sits at the bottom. Euler characteristics come from point counts
//! over several prime fields, fitted by a polynomial and evaluated at q = 1.
//!
//! Counting runs on the fixed points of a torus: when the arrows of M are
//! homogeneous for some grading of the basis, only graded chains are
//! enumerated. Divided powers are expanded into single steps and divided
//! by p! at the end.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cartan::CartanDatum;
use crate::error::{Error, Result};
use crate::field::{is_probable_prime, Field, FieldKind, Fp, Rational};
use crate::generic_ops::mix;
use crate::matrix::{LinearSystem, Matrix};
use crate::modrep::Rep;
use crate::presentation::ArrowKind;

/// `((i_1,p_1), …, (i_t,p_t))` with 0-based vertices; leftmost is bottom.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ThetaMonomial(pub Vec<(usize, usize)>);

impl ThetaMonomial {
    pub fn one() -> Self {
        ThetaMonomial(Vec::new())
    }

    /// Single steps from a list of 0-based vertices.
    pub fn word(vertices: &[usize]) -> Self {
        ThetaMonomial(vertices.iter().map(|&i| (i, 1)).collect())
    }

    /// Concatenation, merging equal neighbours into one divided power is
    /// not done: `1_{E_i} * 1_{E_i} ≠ 1_{E_i^2}`.
    pub fn concat(&self, other: &ThetaMonomial) -> ThetaMonomial {
        ThetaMonomial(self.0.iter().chain(&other.0).copied().collect())
    }

    pub fn expanded(&self) -> Vec<usize> {
        self.0.iter().flat_map(|&(i, p)| std::iter::repeat(i).take(p)).collect()
    }

    /// Π p_k!.
    pub fn divided_factor(&self) -> BigInt {
        self.0.iter().map(|&(_, p)| factorial(p)).product()
    }

    pub fn rank(&self, n: usize) -> Vec<i64> {
        let mut r = vec![0; n];
        for &(i, p) in &self.0 {
            r[i] += p as i64;
        }
        r
    }

    /// Parse `"1,2,1"` or `"1^2,2"` (1-based vertices).
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (i, p) = match part.split_once('^') {
                Some((a, b)) => (a.trim(), b.trim()),
                None => (part, "1"),
            };
            let i: usize = i.parse().map_err(|_| Error::Parse(format!("bad vertex {i:?}")))?;
            let p: usize = p.parse().map_err(|_| Error::Parse(format!("bad power {p:?}")))?;
            if i == 0 || i > n || p == 0 {
                return Err(Error::Input(format!("bad factor {part:?}")));
            }
            out.push((i - 1, p));
        }
        Ok(ThetaMonomial(out))
    }
}

impl fmt::Display for ThetaMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|&(i, p)| if p == 1 { format!("{}", i + 1) } else { format!("{}^{}", i + 1, p) })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

fn binomial(n: usize, k: usize) -> BigInt {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Rational linear combination of monomials; no zero coefficients stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConvExpr {
    pub terms: BTreeMap<ThetaMonomial, Rational>,
}

impl ConvExpr {
    pub fn zero() -> Self {
        ConvExpr::default()
    }

    pub fn one() -> Self {
        Self::monomial(ThetaMonomial::one(), Rational::one())
    }

    pub fn monomial(m: ThetaMonomial, c: Rational) -> Self {
        let mut e = ConvExpr::zero();
        e.add_term(m, c);
        e
    }

    pub fn theta(i: usize) -> Self {
        Self::divided(i, 1)
    }

    /// 1_{E_i^p}.
    pub fn divided(i: usize, p: usize) -> Self {
        Self::monomial(ThetaMonomial(vec![(i, p)]), Rational::one())
    }

    pub fn add_term(&mut self, m: ThetaMonomial, c: Rational) {
        let v = self.terms.remove(&m).unwrap_or_else(Rational::zero) + c;
        if !v.is_zero() {
            self.terms.insert(m, v);
        }
    }

    pub fn add(&self, other: &ConvExpr) -> ConvExpr {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Rational) -> ConvExpr {
        let mut out = ConvExpr::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * s);
        }
        out
    }

    /// The convolution product: `self` on the bottom, `other` on top.
    pub fn mul(&self, other: &ConvExpr) -> ConvExpr {
        let mut out = ConvExpr::zero();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                out.add_term(a.concat(b), x * y);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl fmt::Display for ConvExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("{c} [{m}]")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// θ̃_ij = ad(θ̃_i)^N(θ̃_j), N = 1 − c_ij, as single-step words.
pub fn serre_element(datum: &CartanDatum, i: usize, j: usize) -> Result<ConvExpr> {
    if i == j || i >= datum.n() || j >= datum.n() {
        return Err(Error::Input(format!("need distinct vertices, got {} and {}", i + 1, j + 1)));
    }
    let n = (1 - datum.c(i, j)) as usize;
    let mut out = ConvExpr::zero();
    for k in 0..=n {
        let mut word = vec![i; k];
        word.push(j);
        word.extend(std::iter::repeat(i).take(n - k));
        let sign = if (n - k) % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        out.add_term(ThetaMonomial::word(&word), BigRational::from_integer(sign * binomial(n, k)));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvBudget {
    /// Largest admissible dimension of a hom space to enumerate.
    pub max_hom_dim: usize,
    /// Largest number of homomorphisms enumerated in one step.
    pub max_points: u64,
    /// Primes to use, in order; empty means consecutive primes from 5.
    pub primes: Vec<u64>,
    /// Count only fixed points of a torus acting through a grading.
    pub graded: bool,
    pub seed: u64,
    /// Random homomorphisms tried in an isomorphism test.
    pub iso_tries: usize,
}

impl Default for ConvBudget {
    fn default() -> Self {
        ConvBudget { max_hom_dim: 22, max_points: 1 << 24, primes: Vec::new(), graded: true, seed: 0, iso_tries: 40 }
    }
}

/// A grading with every arrow homogeneous: degrees of basis vectors and
/// the weight of each loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grading {
    pub deg: Vec<Vec<i64>>,
    pub eps_weight: Vec<i64>,
}

impl Grading {
    pub fn trivial(dims: &[usize]) -> Self {
        Grading { deg: dims.iter().map(|&d| vec![0; d]).collect(), eps_weight: vec![0; dims.len()] }
    }

    pub fn is_trivial(&self) -> bool {
        self.eps_weight.iter().all(|&w| w == 0) && self.deg.iter().flatten().all(|&d| d == 0)
    }
}

/// A random integral grading for which every arrow matrix of `m` is
/// homogeneous in the given bases.
pub fn find_grading<F: Field>(m: &Rep<F>, seed: u64) -> Grading {
    let q = &m.algebra().quiver;
    let dims = m.dims();
    let mut off = vec![0; dims.len()];
    for v in 1..dims.len() {
        off[v] = off[v - 1] + dims[v - 1];
    }
    let nb = dims.iter().sum::<usize>();
    let nvars = nb + q.arrows.len();
    let kind = FieldKind::Rational;
    let mut sys = LinearSystem::<Rational>::new(nvars, kind);
    let one = Rational::one();
    for (a, arrow) in q.arrows.iter().enumerate() {
        let mat = m.mat(a);
        for r in 0..mat.rows() {
            for c in 0..mat.cols() {
                if !mat[(r, c)].is_zero() {
                    sys.push(vec![
                        (off[arrow.target] + r, one.clone()),
                        (off[arrow.source] + c, -one.clone()),
                        (nb + a, -one.clone()),
                    ]);
                }
            }
        }
    }
    let basis = sys.solution_space();
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, 0x67ad));
    let mut sol = vec![BigInt::zero(); nvars];
    for k in 0..basis.cols() {
        let mut col = basis.column(k);
        Rational::normalize_vector(&mut col);
        let coef = BigInt::from(rng.gen_range(1..=10_000i64) * if rng.gen_bool(0.5) { 1 } else { -1 });
        for (s, x) in sol.iter_mut().zip(&col) {
            *s += x.to_integer() * &coef;
        }
    }
    let val = |k: usize| sol[k].to_i64().unwrap_or(0);
    let deg = (0..dims.len()).map(|v| (0..dims[v]).map(|t| val(off[v] + t)).collect()).collect();
    let eps_weight = (0..dims.len()).map(|i| val(nb + q.eps(i))).collect();
    Grading { deg, eps_weight }
}

#[derive(Clone)]
enum Step {
    E(usize),
    Iso(Rep<Fp>),
}

struct Node {
    rep: Rep<Fp>,
    deg: Vec<Vec<i64>>,
    embed: Vec<Matrix<Fp>>,
}

fn subspace_key(embed: &[Matrix<Fp>]) -> Vec<u64> {
    let mut key = Vec::new();
    for m in embed {
        let e = m.transpose().rref();
        key.push(u64::MAX);
        key.push(e.pivots.len() as u64);
        for r in 0..e.pivots.len() {
            key.extend(e.matrix.row(r).iter().map(|x| x.value()));
        }
    }
    key
}

/// q^{(c−1)k(k−1)/2} [k]_q!: complete flags of E_i^k with subquotients E_i.
fn free_flag_count(q: u128, c: usize, k: usize) -> u128 {
    let mut out = q.pow(((c - 1) * k * k.saturating_sub(1) / 2) as u32);
    for j in 1..=k {
        out *= (0..j).map(|t| q.pow(t as u32)).sum::<u128>();
    }
    out
}

struct Counter<'a> {
    p: u64,
    kind: FieldKind,
    steps: &'a [Step],
    eps_weight: &'a [i64],
    /// `prefix_dims[pos]`: dimension vector of any module filtered by
    /// `steps[..pos]`.
    prefix_dims: Vec<Vec<usize>>,
    budget: &'a ConvBudget,
    memo: HashMap<(Vec<u64>, usize), (u128, i64)>,
    rng: ChaCha8Rng,
}

impl<'a> Counter<'a> {
    fn new(p: u64, steps: &'a [Step], eps_weight: &'a [i64], n: usize, ci: &[usize], budget: &'a ConvBudget) -> Self {
        let mut prefix_dims = vec![vec![0; n]];
        for s in steps {
            let mut d = prefix_dims.last().unwrap().clone();
            match s {
                Step::E(i) => d[*i] += ci[*i],
                Step::Iso(r) => {
                    for (x, y) in d.iter_mut().zip(r.dims()) {
                        *x += y;
                    }
                }
            }
            prefix_dims.push(d);
        }
        Counter {
            p,
            kind: FieldKind::Prime { p },
            steps,
            eps_weight,
            prefix_dims,
            budget,
            memo: HashMap::new(),
            rng: ChaCha8Rng::seed_from_u64(mix(budget.seed, p)),
        }
    }

    /// (number of chains, bound on the degree of the count).
    fn count(&mut self, node: &Node, pos: usize) -> Result<(u128, i64)> {
        if node.rep.dims() != &self.prefix_dims[pos][..] {
            return Ok((0, -1));
        }
        if pos == 0 {
            return Ok((1, 0));
        }
        let key = (subspace_key(&node.embed), pos);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let out = match &self.steps[pos - 1] {
            Step::Iso(n) => {
                debug_assert_eq!(pos, 1);
                if self.isomorphic(&node.rep, n) {
                    (1, 0)
                } else {
                    (0, -1)
                }
            }
            Step::E(i) => self.count_e(node, pos, *i)?,
        };
        self.memo.insert(key, out);
        Ok(out)
    }

    fn isomorphic(&mut self, a: &Rep<Fp>, b: &Rep<Fp>) -> bool {
        if a.dims() != b.dims() {
            return false;
        }
        let hom = a.hom_space(b);
        if hom.dim() == 0 {
            return a.is_zero();
        }
        (0..self.budget.iso_tries).any(|_| {
            let f = hom.random(&mut self.rng, self.kind);
            f.iter().all(|m| m.rank() == m.rows())
        })
    }

    fn count_e(&mut self, node: &Node, pos: usize, i: usize) -> Result<(u128, i64)> {
        let alg = node.rep.algebra().clone();
        let c = alg.datum.ci(i);
        let w = self.eps_weight[i];
        let only_i = self.steps[..pos].iter().all(|s| matches!(s, Step::E(j) if *j == i));
        let flat = w == 0 && node.deg[i].iter().all(|&d| d == node.deg[i][0]);
        if only_i && flat && node.rep.support().iter().all(|&v| v == i) {
            // Free modules at one vertex: closed form.
            return Ok(match node.rep.is_free_at(i) {
                Some(k) if k == pos => {
                    let d = ((c - 1) * k * k.saturating_sub(1) / 2 + k * k.saturating_sub(1) / 2) as i64;
                    (free_flag_count(self.p as u128, c, k), d)
                }
                _ => (0, -1),
            });
        }
        let aut = if w == 0 { c } else { 1 } as i64;
        let mut shifts: Vec<i64> = node.deg[i].clone();
        shifts.sort_unstable();
        shifts.dedup();
        let mut total = 0u128;
        let mut degree = -1i64;
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        for s in shifts {
            let (basis, vars) = self.graded_hom(node, i, s);
            let h = basis.cols();
            if h == 0 {
                continue;
            }
            if h > self.budget.max_hom_dim {
                return Err(Error::BudgetExceeded(format!("hom space of dimension {h} exceeds {}", self.budget.max_hom_dim)));
            }
            let points = (self.p as f64).powi(h as i32 - 1);
            if points > self.budget.max_points as f64 {
                return Err(Error::BudgetExceeded(format!("{points:.0} homomorphisms over F_{}", self.p)));
            }
            let mut x = vec![0u64; h];
            for lead in 0..h {
                let tail = h - lead - 1;
                let reps = (self.p as u128).pow(tail as u32);
                for idx in 0..reps {
                    x.iter_mut().for_each(|v| *v = 0);
                    x[lead] = 1;
                    let mut r = idx;
                    for t in 0..tail {
                        x[lead + 1 + t] = (r % self.p as u128) as u64;
                        r /= self.p as u128;
                    }
                    let Some(child) = self.kernel_child(node, i, c, &basis, &vars, &x) else { continue };
                    if !seen.insert(subspace_key(&child.embed)) {
                        continue;
                    }
                    let (cnt, d) = self.count(&child, pos - 1)?;
                    if cnt > 0 {
                        total += cnt;
                        degree = degree.max(h as i64 - aut + d);
                    }
                }
            }
        }
        Ok((total, degree))
    }

    /// Degree-0 homomorphisms to E_i[s], as a basis of solution vectors over
    /// the admissible entries `vars` of the `c × d_i` matrix.
    fn graded_hom(&self, node: &Node, i: usize, s: i64) -> (Matrix<Fp>, Vec<(usize, usize)>) {
        let rep = &node.rep;
        let c = rep.algebra().datum.ci(i);
        let w = self.eps_weight[i];
        let d = rep.dim(i);
        let deg_e = |k: usize| s + (c - 1 - k) as i64 * w;
        let mut idx = vec![vec![None; d]; c];
        let mut vars = Vec::new();
        for k in 0..c {
            for m in 0..d {
                if node.deg[i][m] == deg_e(k) {
                    idx[k][m] = Some(vars.len());
                    vars.push((k, m));
                }
            }
        }
        let mut sys = LinearSystem::<Fp>::new(vars.len(), self.kind);
        let one = Fp::new(1, self.p);
        let eps = rep.eps(i);
        for k in 0..c {
            for m in 0..d {
                let mut row = Vec::new();
                for l in 0..d {
                    if let Some(v) = idx[k][l] {
                        if !eps[(l, m)].is_zero() {
                            row.push((v, eps[(l, m)]));
                        }
                    }
                }
                if k + 1 < c {
                    if let Some(v) = idx[k + 1][m] {
                        row.push((v, -one));
                    }
                }
                sys.push(row);
            }
        }
        let q = &rep.algebra().quiver;
        for (a, arrow) in q.arrows.iter().enumerate() {
            if arrow.target != i || matches!(arrow.kind, ArrowKind::Loop { .. }) {
                continue;
            }
            let mat = rep.mat(a);
            for k in 0..c {
                for m in 0..mat.cols() {
                    let mut row = Vec::new();
                    for l in 0..d {
                        if let Some(v) = idx[k][l] {
                            if !mat[(l, m)].is_zero() {
                                row.push((v, mat[(l, m)]));
                            }
                        }
                    }
                    sys.push(row);
                }
            }
        }
        (sys.solution_space(), vars)
    }

    fn kernel_child(
        &self,
        node: &Node,
        i: usize,
        c: usize,
        basis: &Matrix<Fp>,
        vars: &[(usize, usize)],
        x: &[u64],
    ) -> Option<Node> {
        let d = node.rep.dim(i);
        let xs: Vec<Fp> = x.iter().map(|&v| Fp::new(v as i64, self.p)).collect();
        let coords = basis.mul_vec(&xs);
        let mut f = Matrix::<Fp>::zeros(c, d);
        for (&(k, m), v) in vars.iter().zip(coords) {
            f[(k, m)] = v;
        }
        if f.rank() < c {
            return None;
        }
        // Kernel degree by degree keeps the basis homogeneous.
        let mut degs: Vec<i64> = node.deg[i].clone();
        degs.sort_unstable();
        degs.dedup();
        let mut cols: Vec<Vec<Fp>> = Vec::new();
        let mut new_deg = Vec::new();
        for dg in degs {
            let sel: Vec<usize> = (0..d).filter(|&m| node.deg[i][m] == dg).collect();
            let ker = f.select_cols(&sel).nullspace();
            for t in 0..ker.cols() {
                let mut v = vec![Fp::new(0, self.p); d];
                for (r, &m) in sel.iter().enumerate() {
                    v[m] = ker[(r, t)];
                }
                cols.push(v);
                new_deg.push(dg);
            }
        }
        let k = Matrix::from_columns(d, &cols);
        let mut sub_basis: Vec<Matrix<Fp>> = node.rep.dims().iter().map(|&dv| Matrix::identity(dv)).collect();
        sub_basis[i] = k.clone();
        let sq = node.rep.subquotient(sub_basis).ok()?;
        let mut deg = node.deg.clone();
        deg[i] = new_deg;
        let mut embed = node.embed.clone();
        embed[i] = node.embed[i].mul(&k);
        Some(Node { rep: sq.sub, deg, embed })
    }
}

fn count_chains(m: &Rep<Fp>, grading: &Grading, steps: &[Step], budget: &ConvBudget) -> Result<(u128, i64)> {
    let p = m.field().characteristic();
    let datum = &m.algebra().datum;
    let ci: Vec<usize> = (0..m.n()).map(|i| datum.ci(i)).collect();
    let mut counter = Counter::new(p, steps, &grading.eps_weight, m.n(), &ci, budget);
    let root = Node {
        rep: m.clone(),
        deg: grading.deg.clone(),
        embed: m.dims().iter().map(|&d| Matrix::identity(d)).collect(),
    };
    counter.count(&root, steps.len())
}

/// Number of chains with subquotients `E_{i_k}^{p_k}` (bottom first) in a
/// module over a prime field.
pub fn flag_count_fq(m: &Rep<Fp>, word: &ThetaMonomial, budget: &ConvBudget) -> Result<BigInt> {
    let q = m.field().characteristic();
    if q == 0 {
        return Err(Error::Input("flag_count_fq needs a prime field".into()));
    }
    m.ensure_relations()?;
    let steps: Vec<Step> = word.expanded().into_iter().map(Step::E).collect();
    let (cnt, _) = count_chains(m, &Grading::trivial(m.dims()), &steps, budget)?;
    let datum = &m.algebra().datum;
    let div: u128 = word.0.iter().map(|&(i, p)| free_flag_count(q as u128, datum.ci(i), p)).product();
    debug_assert_eq!(cnt % div, 0);
    Ok(BigInt::from(cnt / div))
}

/// An integer polynomial in q fitted to point counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointCountPoly {
    /// Coefficients from the constant term up.
    pub coeffs: Vec<BigInt>,
    pub degree_bound: i64,
    pub primes: Vec<u64>,
    pub counts: Vec<u128>,
    /// Primes skipped for bad reduction.
    pub skipped: Vec<u64>,
}

impl PointCountPoly {
    pub fn eval(&self, q: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * q + c)
    }

    pub fn at_one(&self) -> BigInt {
        self.coeffs.iter().sum()
    }
}

impl fmt::Display for PointCountPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            parts.push(match k {
                0 => format!("{c}"),
                1 => format!("{c}q"),
                _ => format!("{c}q^{k}"),
            });
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Newton interpolation through `points`, expanded to monomial
/// coefficients.
fn interpolate(points: &[(u64, u128)]) -> Vec<Rational> {
    let n = points.len();
    let xs: Vec<Rational> = points.iter().map(|&(x, _)| Rational::from_integer(x.into())).collect();
    let mut dd: Vec<Rational> = points.iter().map(|&(_, y)| Rational::from_integer(y.into())).collect();
    for level in 1..n {
        for k in (level..n).rev() {
            dd[k] = (&dd[k] - &dd[k - 1]) / (&xs[k] - &xs[k - level]);
        }
    }
    let mut coeffs = vec![Rational::zero(); n.max(1)];
    for k in (0..n).rev() {
        // coeffs = coeffs·(q − x_k) + dd[k]
        let mut next = vec![Rational::zero(); n.max(1)];
        for t in 0..n {
            if t + 1 < n {
                next[t + 1] += &coeffs[t];
            }
            next[t] -= &coeffs[t] * &xs[k];
        }
        next[0] += &dd[k];
        coeffs = next;
    }
    while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
    coeffs
}

fn prime_stream(budget: &ConvBudget) -> Box<dyn Iterator<Item = u64> + Send> {
    if budget.primes.is_empty() {
        Box::new((5u64..).filter(|&p| is_probable_prime(p)))
    } else {
        Box::new(budget.primes.clone().into_iter())
    }
}

/// Invariants compared between a module over ℚ and its reductions.
#[derive(Clone, Debug, PartialEq, Eq)]
struct ReductionProfile {
    end_dim: usize,
    sub_dims: Vec<Vec<usize>>,
    fac_dims: Vec<Vec<usize>>,
}

fn reduction_profile<F: Field>(m: &Rep<F>) -> ReductionProfile {
    ReductionProfile {
        end_dim: m.end_dim(),
        sub_dims: (0..m.n()).map(|i| m.sub_i(i).sub.dims().to_vec()).collect(),
        fac_dims: (0..m.n()).map(|i| m.fac_i(i).dims().to_vec()).collect(),
    }
}

/// χ of a chain variety with its fitted point-count polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EulerValue {
    pub value: BigInt,
    pub poly: PointCountPoly,
}

/// Evaluates monomials at one module over ℚ, caching its reductions.
pub struct Evaluator {
    m: Rep<Rational>,
    grading: Grading,
    profile: ReductionProfile,
    budget: ConvBudget,
}

impl Evaluator {
    pub fn new(m: &Rep<Rational>, budget: &ConvBudget) -> Result<Self> {
        m.ensure_relations()?;
        let grading = if budget.graded { find_grading(m, budget.seed) } else { Grading::trivial(m.dims()) };
        Ok(Evaluator { m: m.clone(), grading, profile: reduction_profile(m), budget: budget.clone() })
    }

    pub fn grading(&self) -> &Grading {
        &self.grading
    }

    fn reduce(&self, p: u64) -> Option<Rep<Fp>> {
        let r = self.m.reduce_mod(p).ok()?;
        if !r.check_relations().is_empty() || reduction_profile(&r) != self.profile {
            return None;
        }
        Some(r)
    }

    /// χ at the module of the monomial `word`.
    pub fn euler(&self, word: &ThetaMonomial) -> Result<EulerValue> {
        self.euler_steps(word, None)
    }

    /// χ of chains whose bottom piece is isomorphic to `bottom`, followed
    /// by the subquotients of `word`. The grading is not used here.
    pub fn euler_with_bottom(&self, bottom: &Rep<Rational>, word: &ThetaMonomial) -> Result<EulerValue> {
        self.euler_steps(word, Some(bottom))
    }

    fn euler_steps(&self, word: &ThetaMonomial, bottom: Option<&Rep<Rational>>) -> Result<EulerValue> {
        let n = self.m.n();
        let mut rank = word.rank(n);
        if let Some(b) = bottom {
            let rb = b.rank_vector().ok_or(Error::NotLocallyFree)?;
            rank.iter_mut().zip(rb).for_each(|(x, y)| *x += y);
        }
        if self.m.rank_vector() != Some(rank) {
            return Ok(EulerValue {
                value: BigInt::zero(),
                poly: PointCountPoly { coeffs: vec![BigInt::zero()], degree_bound: -1, primes: vec![], counts: vec![], skipped: vec![] },
            });
        }
        let grading = if bottom.is_some() { Grading::trivial(self.m.dims()) } else { self.grading.clone() };
        let bottom_profile = bottom.map(reduction_profile);
        let mut primes = prime_stream(&self.budget);
        let mut pts: Vec<(u64, u128)> = Vec::new();
        let mut skipped = Vec::new();
        let mut bound = 0i64;
        loop {
            let need = (bound.max(0) + 3) as usize;
            if pts.len() >= need {
                break;
            }
            let batch: Vec<u64> = primes.by_ref().take(need - pts.len()).collect();
            if batch.is_empty() {
                return Err(Error::NonPolynomialCount("ran out of primes".into()));
            }
            let results: Vec<Result<Option<(u64, u128, i64)>>> = batch
                .par_iter()
                .map(|&p| {
                    let Some(r) = self.reduce(p) else { return Ok(None) };
                    let mut steps = Vec::new();
                    if let Some(b) = bottom {
                        let Ok(br) = b.reduce_mod(p) else { return Ok(None) };
                        if Some(reduction_profile(&br)) != bottom_profile {
                            return Ok(None);
                        }
                        steps.push(Step::Iso(br));
                    }
                    steps.extend(word.expanded().into_iter().map(Step::E));
                    let (cnt, d) = count_chains(&r, &grading, &steps, &self.budget)?;
                    Ok(Some((p, cnt, d)))
                })
                .collect();
            for (p, r) in batch.iter().zip(results) {
                match r? {
                    Some((p, cnt, d)) => {
                        pts.push((p, cnt));
                        bound = bound.max(d);
                    }
                    None => skipped.push(*p),
                }
            }
        }
        let k = bound.max(0) as usize;
        let fit = interpolate(&pts[..k + 1]);
        if fit.iter().any(|c| !c.is_integer()) {
            return Err(Error::NonPolynomialCount(format!("non-integral fit through {:?}", &pts[..k + 1])));
        }
        let coeffs: Vec<BigInt> = fit.iter().map(|c| c.to_integer()).collect();
        let poly = PointCountPoly {
            coeffs,
            degree_bound: bound,
            primes: pts.iter().map(|x| x.0).collect(),
            counts: pts.iter().map(|x| x.1).collect(),
            skipped,
        };
        for &(p, cnt) in &pts[k + 1..] {
            if poly.eval(&BigInt::from(p)) != BigInt::from(cnt) {
                return Err(Error::NonPolynomialCount(format!("count {cnt} at q = {p} is off the fit {poly}")));
            }
        }
        let total = poly.at_one();
        let div = word.divided_factor();
        if !total.is_multiple_of(&div) {
            return Err(Error::NonPolynomialCount(format!("χ = {total} is not divisible by {div}")));
        }
        Ok(EulerValue { value: total / div, poly })
    }

    /// Σ coeff · χ(word).
    pub fn eval_expr(&self, expr: &ConvExpr) -> Result<Rational> {
        let terms: Vec<(&ThetaMonomial, &Rational)> = expr.terms.iter().collect();
        let vals: Vec<Result<Rational>> =
            terms.par_iter().map(|(m, c)| Ok(Rational::from_integer(self.euler(m)?.value) * *c)).collect();
        let mut out = Rational::zero();
        for v in vals {
            out += v?;
        }
        Ok(out)
    }
}

pub fn euler_eval(m: &Rep<Rational>, word: &ThetaMonomial, budget: &ConvBudget) -> Result<EulerValue> {
    Evaluator::new(m, budget)?.euler(word)
}

pub fn eval_expr(m: &Rep<Rational>, expr: &ConvExpr, budget: &ConvBudget) -> Result<Rational> {
    Evaluator::new(m, budget)?.eval_expr(expr)
}

/// Render a rational as `a` or `a/b`.
pub fn rational_string(q: &Rational) -> String {
    if q.is_integer() {
        q.to_integer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{make_e, make_e_power};
    use crate::presentation::Algebra;
    use num_traits::Signed;

    fn fp(p: u64) -> FieldKind {
        FieldKind::Prime { p }
    }

    #[test]
    fn serre_shapes() {
        let b2 = serre_element(&CartanDatum::b2(), 0, 1).unwrap();
        let coeffs: Vec<String> = b2.terms.values().map(rational_string).collect();
        assert_eq!(b2.terms.len(), 3);
        assert_eq!(coeffs, vec!["1", "-2", "1"]);
        let a1a1 = CartanDatum::with_defaults(vec![vec![2, 0], vec![0, 2]]).unwrap();
        let comm = serre_element(&a1a1, 0, 1).unwrap();
        assert_eq!(comm.terms.len(), 2);
        let big = CartanDatum::new(vec![vec![2, -6], vec![-2, 2]], vec![2, 6], [(0, 1)].into_iter().collect()).unwrap();
        let e = serre_element(&big, 0, 1).unwrap();
        assert_eq!(e.terms.len(), 8);
        let abs: BigInt = e.terms.values().map(|c| c.to_integer().abs()).sum();
        assert_eq!(abs, BigInt::from(128));
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let pts: Vec<(u64, u128)> = [5u64, 7, 11].iter().map(|&q| (q, (q * q + q) as u128)).collect();
        let c = interpolate(&pts);
        assert_eq!(c, vec![Rational::zero(), Rational::one(), Rational::one()]);
    }

    #[test]
    fn flag_counts_of_free_modules() {
        let b = ConvBudget::default();
        let a2 = Algebra::new(CartanDatum::a2(1));
        let b2 = Algebra::new(CartanDatum::b2());
        for q in [2u64, 3, 5] {
            let m = make_e_power::<Fp>(&a2, fp(q), 0, 2);
            let w = ThetaMonomial::word(&[0, 0]);
            assert_eq!(flag_count_fq(&m, &w, &b).unwrap(), BigInt::from(q + 1));
            let m = make_e_power::<Fp>(&b2, fp(q), 0, 2);
            assert_eq!(flag_count_fq(&m, &w, &b).unwrap(), BigInt::from(q * q + q));
            assert_eq!(flag_count_fq(&m, &ThetaMonomial(vec![(0, 2)]), &b).unwrap(), BigInt::one());
            let e = make_e::<Fp>(&b2, fp(q), 0);
            assert_eq!(flag_count_fq(&e, &ThetaMonomial::word(&[0]), &b).unwrap(), BigInt::one());
            assert_eq!(flag_count_fq(&e, &ThetaMonomial::word(&[1]), &b).unwrap(), BigInt::zero());
        }
    }

    #[test]
    fn euler_of_projective_line() {
        let a2 = Algebra::new(CartanDatum::a2(1));
        let m = make_e_power::<Rational>(&a2, FieldKind::Rational, 0, 2);
        let ev = euler_eval(&m, &ThetaMonomial::word(&[0, 0]), &ConvBudget::default()).unwrap();
        assert_eq!(ev.value, BigInt::from(2));
        let ev = euler_eval(&m, &ThetaMonomial(vec![(0, 2)]), &ConvBudget::default()).unwrap();
        assert_eq!(ev.value, BigInt::one());
    }
}
