//! Module representations of Π(C,D,Ω) over an exact field.

mod homext;
mod structure;

pub use homext::{ExtensionSpace, HomSpace};
pub use structure::{CrystalTrace, EFiltration, InvariantProfile};

use std::sync::Arc;

use num_rational::BigRational;

use crate::field::{Field, FieldKind, Fp};
use crate::matrix::{bind, Matrix};
use crate::presentation::{Algebra, PathExpr};
use crate::error::{Error, Result};

/// A representation of the doubled quiver: one matrix per arrow, the matrix
/// of `a: j → i` having shape `d_i × d_j` and acting on column vectors.
#[derive(Clone)]
pub struct Rep<F> {
    alg: Arc<Algebra>,
    field: FieldKind,
    dims: Vec<usize>,
    mats: Vec<Matrix<F>>,
}

impl<F: Field> std::fmt::Debug for Rep<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Rep over {} with dims {:?}", self.field, self.dims)?;
        for (a, m) in self.alg.quiver.arrows.iter().zip(&self.mats) {
            if !m.is_zero() {
                write!(f, "{}: {:?}", a.name, m)?;
            }
        }
        Ok(())
    }
}

/// A relation that fails, with one nonzero entry as witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub relation: String,
    pub row: usize,
    pub col: usize,
    pub value: String,
}

/// Invariant subspaces of a module together with the induced sub- and
/// quotient modules.
#[derive(Clone)]
pub struct Subquotient<F> {
    pub basis: Vec<Matrix<F>>,
    pub sub: Rep<F>,
    pub quot: Rep<F>,
}

impl<F: Field> Rep<F> {
    /// Build from matrices, checking shapes but not relations.
    pub fn new(alg: Arc<Algebra>, field: FieldKind, dims: Vec<usize>, mats: Vec<Matrix<F>>) -> Result<Self> {
        if dims.len() != alg.n() || mats.len() != alg.quiver.len() {
            return Err(Error::ShapeMismatch("wrong number of vertices or arrows".into()));
        }
        for (a, m) in alg.quiver.arrows.iter().zip(&mats) {
            if m.rows() != dims[a.target] || m.cols() != dims[a.source] {
                return Err(Error::ShapeMismatch(format!(
                    "{} must be {}×{}, got {}×{}",
                    a.name,
                    dims[a.target],
                    dims[a.source],
                    m.rows(),
                    m.cols()
                )));
            }
        }
        let mats = mats.into_iter().map(|m| m.map(|x| bind(x.clone(), field))).collect();
        Ok(Rep { alg, field, dims, mats })
    }

    /// Build and insist that every relation holds.
    pub fn checked(alg: Arc<Algebra>, field: FieldKind, dims: Vec<usize>, mats: Vec<Matrix<F>>) -> Result<Self> {
        let m = Self::new(alg, field, dims, mats)?;
        m.ensure_relations()?;
        Ok(m)
    }

    pub fn ensure_relations(&self) -> Result<()> {
        match self.check_relations().into_iter().next() {
            None => Ok(()),
            Some(v) => Err(Error::RelationFailure(format!(
                "{} (entry ({},{}) = {})",
                v.relation, v.row, v.col, v.value
            ))),
        }
    }

    pub fn zero(alg: Arc<Algebra>, field: FieldKind) -> Self {
        let n = alg.n();
        let mats = alg.quiver.arrows.iter().map(|_| Matrix::zeros(0, 0)).collect();
        Rep { alg, field, dims: vec![0; n], mats }
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.alg
    }

    pub fn field(&self) -> FieldKind {
        self.field
    }

    pub fn n(&self) -> usize {
        self.alg.n()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, v: usize) -> usize {
        self.dims[v]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_dim() == 0
    }

    pub fn mats(&self) -> &[Matrix<F>] {
        &self.mats
    }

    pub fn mat(&self, a: usize) -> &Matrix<F> {
        &self.mats[a]
    }

    pub fn eps(&self, i: usize) -> &Matrix<F> {
        &self.mats[self.alg.quiver.eps(i)]
    }

    pub fn alpha(&self, i: usize, j: usize, g: usize) -> &Matrix<F> {
        &self.mats[self.alg.quiver.alpha(i, j, g)]
    }

    pub fn scalar(&self, x: i64) -> F {
        F::from_int(x, self.field)
    }

    /// Composite of a written-order path.
    pub fn eval_path(&self, path: &[usize]) -> Matrix<F> {
        let q = &self.alg.quiver;
        let last = *path.last().expect("nonempty path");
        let mut acc = Matrix::identity(self.dims[q.arrows[last].source]);
        for &a in path.iter().rev() {
            acc = self.mats[a].mul(&acc);
        }
        acc
    }

    pub fn eval_expr(&self, e: &PathExpr) -> Matrix<F> {
        let mut acc = Matrix::zeros(self.dims[e.target], self.dims[e.source]);
        for (c, p) in &e.terms {
            acc = acc.add(&self.eval_path(p).scale(&self.scalar(*c)));
        }
        acc
    }

    pub fn check_relations(&self) -> Vec<Violation> {
        self.check_relation_list(&self.alg.relations)
    }

    pub fn check_relation_list(&self, rels: &[PathExpr]) -> Vec<Violation> {
        let mut out = Vec::new();
        for r in rels {
            let m = self.eval_expr(r);
            'find: for row in 0..m.rows() {
                for col in 0..m.cols() {
                    if !m[(row, col)].is_zero() {
                        out.push(Violation {
                            relation: format!("{} = {}", r.label, r.render(&self.alg.quiver)),
                            row,
                            col,
                            value: m[(row, col)].to_string(),
                        });
                        break 'find;
                    }
                }
            }
        }
        out
    }

    pub fn direct_sum(&self, other: &Rep<F>) -> Rep<F> {
        assert!(Arc::ptr_eq(&self.alg, &other.alg) || self.alg.datum == other.alg.datum);
        let dims = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        let mats = self.mats.iter().zip(&other.mats).map(|(a, b)| Matrix::block_diag(a, b)).collect();
        Rep { alg: self.alg.clone(), field: self.field, dims, mats }
    }

    pub fn direct_sum_all(alg: Arc<Algebra>, field: FieldKind, parts: &[Rep<F>]) -> Rep<F> {
        parts.iter().fold(Rep::zero(alg, field), |acc, m| acc.direct_sum(m))
    }

    /// Jordan type of ε_i on e_iM, as a weakly decreasing partition.
    pub fn jordan_type(&self, i: usize) -> Vec<usize> {
        jordan_type_of(self.eps(i))
    }

    pub fn is_locally_free(&self) -> bool {
        (0..self.n()).all(|i| {
            let c = self.alg.datum.ci(i);
            self.jordan_type(i).iter().all(|&p| p == c)
        })
    }

    /// Rank vector, if the module is locally free.
    pub fn rank_vector(&self) -> Option<Vec<i64>> {
        if !self.is_locally_free() {
            return None;
        }
        Some((0..self.n()).map(|i| (self.dims[i] / self.alg.datum.ci(i)) as i64).collect())
    }

    /// Module with the same operators expressed in new bases `g_v`
    /// (new matrices `g_t M(a) g_s^{-1}`).
    pub fn change_basis(&self, g: &[Matrix<F>]) -> Rep<F> {
        let inv: Vec<Matrix<F>> = g.iter().map(|m| m.inverse().expect("invertible base change")).collect();
        let q = &self.alg.quiver;
        let mats = q
            .arrows
            .iter()
            .zip(&self.mats)
            .map(|(a, m)| g[a.target].mul(m).mul(&inv[a.source]))
            .collect();
        Rep { alg: self.alg.clone(), field: self.field, dims: self.dims.clone(), mats }
    }

    /// Submodule and quotient for invariant subspaces with independent
    /// column bases `basis[v]`. Invariance is checked.
    pub fn subquotient(&self, basis: Vec<Matrix<F>>) -> Result<Subquotient<F>> {
        let q = &self.alg.quiver;
        let n = self.n();
        let sub_dims: Vec<usize> = basis.iter().map(|b| b.cols()).collect();
        let mut comp = Vec::with_capacity(n);
        let mut full_inv = Vec::with_capacity(n);
        for v in 0..n {
            let c = basis[v].complement_units();
            let t = basis[v].hstack(&c);
            full_inv.push(t.inverse().ok_or_else(|| Error::Input("dependent subspace basis".into()))?);
            comp.push(c);
        }
        let mut sub_mats = Vec::new();
        let mut quot_mats = Vec::new();
        for (a, m) in q.arrows.iter().zip(&self.mats) {
            let (s, t) = (a.source, a.target);
            let img = m.mul(&basis[s]);
            let coords = full_inv[t].mul(&img);
            let k = sub_dims[t];
            for r in k..coords.rows() {
                for c in 0..coords.cols() {
                    if !coords[(r, c)].is_zero() {
                        return Err(Error::Input(format!("subspace is not invariant under {}", a.name)));
                    }
                }
            }
            sub_mats.push(coords.block(0, 0, k, coords.cols()));
            let qc = full_inv[t].mul(&m.mul(&comp[s]));
            quot_mats.push(qc.block(k, 0, self.dims[t] - k, comp[s].cols()));
        }
        let quot_dims = (0..n).map(|v| self.dims[v] - sub_dims[v]).collect();
        Ok(Subquotient {
            sub: Rep { alg: self.alg.clone(), field: self.field, dims: sub_dims, mats: sub_mats },
            quot: Rep { alg: self.alg.clone(), field: self.field, dims: quot_dims, mats: quot_mats },
            basis,
        })
    }

    /// Kernel of a homomorphism given by vertex maps `f_v: M_v → N_v`.
    pub fn kernel_of(&self, f: &[Matrix<F>]) -> Result<Subquotient<F>> {
        let basis = f.iter().map(|m| m.nullspace().map(|x| bind(x.clone(), self.field))).collect();
        self.subquotient(basis)
    }

    /// Image of a homomorphism `f: N → M` (given on vertices) as a
    /// subquotient of `M`.
    pub fn image_of(&self, f: &[Matrix<F>]) -> Result<Subquotient<F>> {
        let basis = f.iter().map(|m| m.column_basis()).collect();
        self.subquotient(basis)
    }

    /// Support vertices.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.dims[v] > 0).collect()
    }

    /// Whether the module is isomorphic to `E_i^p` for some `p ≥ 0`
    /// (supported at `i` with ε_i of Jordan type `(c_i, …, c_i)`).
    pub fn is_free_at(&self, i: usize) -> Option<usize> {
        if self.support().iter().any(|&v| v != i) {
            return None;
        }
        let c = self.alg.datum.ci(i);
        if self.jordan_type(i).iter().all(|&p| p == c) {
            Some(self.dims[i] / c)
        } else {
            None
        }
    }

    /// Same module viewed over another field (entrywise conversion).
    pub fn convert<G: Field>(&self, field: FieldKind, f: impl Fn(&F) -> Option<G>) -> Option<Rep<G>> {
        let mut mats = Vec::with_capacity(self.mats.len());
        for m in &self.mats {
            let mut data = Vec::with_capacity(m.rows() * m.cols());
            for x in m.data() {
                data.push(bind(f(x)?, field));
            }
            mats.push(Matrix::from_vec(m.rows(), m.cols(), data));
        }
        Some(Rep { alg: self.alg.clone(), field, dims: self.dims.clone(), mats })
    }
}

impl Rep<BigRational> {
    /// Reduction modulo a prime; fails if a denominator vanishes.
    pub fn reduce_mod(&self, p: u64) -> Result<Rep<Fp>> {
        let kind = FieldKind::Prime { p };
        self.convert(kind, |x| Fp::from_rational(x, kind)).ok_or(Error::BadReduction(p))
    }
}

/// Jordan type of a nilpotent square matrix.
pub fn jordan_type_of<F: Field>(n: &Matrix<F>) -> Vec<usize> {
    let ranks = n.nilpotent_ranks();
    let mut ge = Vec::new();
    for k in 1..ranks.len() {
        ge.push(ranks[k - 1] - ranks[k]);
    }
    let mut parts = Vec::new();
    for k in (1..=ge.len()).rev() {
        let exact = ge[k - 1] - ge.get(k).copied().unwrap_or(0);
        parts.extend(std::iter::repeat(k).take(exact));
    }
    parts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::cartan::CartanDatum;
    use crate::presentation::Algebra;

    #[test]
    fn jordan_types() {
        let q = |x: i64| BigRational::from_integer(x.into());
        let mut m = Matrix::zeros(3, 3);
        m[(1, 0)] = q(1);
        assert_eq!(jordan_type_of(&m), vec![2, 1]);
        assert_eq!(jordan_type_of(&Matrix::<BigRational>::zeros(2, 2)), vec![1, 1]);
    }

    #[test]
    fn corrupted_e1_violates_nilpotency() {
        let alg = Algebra::new(CartanDatum::b2());
        let e1 = catalog::make_e::<BigRational>(&alg, FieldKind::Rational, 0);
        assert!(e1.check_relations().is_empty());
        let mut mats = e1.mats().to_vec();
        mats[alg.quiver.eps(0)] = Matrix::identity(2);
        let bad = Rep::new(alg.clone(), FieldKind::Rational, e1.dims().to_vec(), mats).unwrap();
        let v = bad.check_relations();
        assert!(v[0].relation.starts_with("P1[1]"));
    }
}
