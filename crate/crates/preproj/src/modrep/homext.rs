//! Hom spaces, Ext¹ three ways, and the maps M_{i,in}, M_{i,out}.

use rand::Rng;

use super::Rep;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::{bind, LinearSystem, Matrix};

/// Solution space of the intertwiner equations `f_t M(a) = N(a) f_s`.
pub struct HomSpace<F> {
    pub source_dims: Vec<usize>,
    pub target_dims: Vec<usize>,
    offsets: Vec<usize>,
    /// Basis vectors as columns, in the concatenated row-major layout of the
    /// vertex blocks.
    pub basis: Matrix<F>,
}

impl<F: Field> HomSpace<F> {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    /// Vertex maps of the hom with coordinates `coeffs` in the basis.
    pub fn element(&self, coeffs: &[F]) -> Vec<Matrix<F>> {
        let v = self.basis.mul_vec(coeffs);
        self.unpack(&v)
    }

    pub fn basis_element(&self, k: usize) -> Vec<Matrix<F>> {
        self.unpack(&self.basis.column(k))
    }

    fn unpack(&self, v: &[F]) -> Vec<Matrix<F>> {
        (0..self.source_dims.len())
            .map(|x| {
                let (r, c) = (self.target_dims[x], self.source_dims[x]);
                Matrix::from_vec(r, c, v[self.offsets[x]..self.offsets[x] + r * c].to_vec())
            })
            .collect()
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R, kind: crate::field::FieldKind) -> Vec<Matrix<F>> {
        let coeffs: Vec<F> = (0..self.dim()).map(|_| F::sample(rng, kind)).collect();
        self.element(&coeffs)
    }
}

/// Off-diagonal cocycles of block upper-triangular extensions
/// `[[sub(a), Z_a], [0, top(a)]]`.
pub struct ExtensionSpace<F> {
    offsets: Vec<usize>,
    shapes: Vec<(usize, usize)>,
    pub basis: Matrix<F>,
}

impl<F: Field> ExtensionSpace<F> {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn blocks(&self, z: &[F]) -> Vec<Matrix<F>> {
        self.shapes
            .iter()
            .zip(&self.offsets)
            .map(|(&(r, c), &o)| Matrix::from_vec(r, c, z[o..o + r * c].to_vec()))
            .collect()
    }
}

impl<F: Field> Rep<F> {
    pub fn hom_space(&self, other: &Rep<F>) -> HomSpace<F> {
        let n = self.n();
        let mut offsets = Vec::with_capacity(n);
        let mut total = 0;
        for v in 0..n {
            offsets.push(total);
            total += self.dims[v] * other.dims[v];
        }
        let var = |v: usize, r: usize, c: usize| offsets[v] + r * self.dims[v] + c;
        let mut sys = LinearSystem::new(total, self.field);
        for (a, (ma, na)) in self.alg.quiver.arrows.iter().zip(self.mats.iter().zip(&other.mats)) {
            let (s, t) = (a.source, a.target);
            for r in 0..other.dims[t] {
                for c in 0..self.dims[s] {
                    let mut row = Vec::new();
                    for k in 0..self.dims[t] {
                        let x = &ma[(k, c)];
                        if !x.is_zero() {
                            row.push((var(t, r, k), x.clone()));
                        }
                    }
                    for k in 0..other.dims[s] {
                        let x = &na[(r, k)];
                        if !x.is_zero() {
                            row.push((var(s, k, c), -x.clone()));
                        }
                    }
                    sys.push(row);
                }
            }
        }
        HomSpace {
            source_dims: self.dims.clone(),
            target_dims: other.dims.clone(),
            offsets,
            basis: sys.solution_space(),
        }
    }

    pub fn hom_dim(&self, other: &Rep<F>) -> usize {
        if self.is_zero() || other.is_zero() {
            return 0;
        }
        self.hom_space(other).dim()
    }

    pub fn end_dim(&self) -> usize {
        self.hom_dim(self)
    }

    /// Cocycles for extensions with `sub` as submodule and `top` as
    /// quotient; the relations are linear in the off-diagonal blocks.
    pub fn extension_space(top: &Rep<F>, sub: &Rep<F>) -> ExtensionSpace<F> {
        let alg = &top.alg;
        let q = &alg.quiver;
        let mut offsets = Vec::new();
        let mut shapes = Vec::new();
        let mut total = 0;
        for a in &q.arrows {
            offsets.push(total);
            let sh = (sub.dims[a.target], top.dims[a.source]);
            total += sh.0 * sh.1;
            shapes.push(sh);
        }
        let mut sys = LinearSystem::new(total, top.field);
        for rel in &alg.relations {
            let (rs, rt) = (rel.source, rel.target);
            let (rows, cols) = (sub.dims[rt], top.dims[rs]);
            if rows == 0 || cols == 0 {
                continue;
            }
            let mut eqs: Vec<Vec<(usize, F)>> = vec![Vec::new(); rows * cols];
            for (coef, path) in &rel.terms {
                let coef = top.scalar(*coef);
                let k = path.len();
                // path[m] is applied after path[m+1..]; left factor uses sub, right uses top.
                for m in 0..k {
                    let a = path[m];
                    let left = if m == 0 {
                        Matrix::identity(sub.dims[rt])
                    } else {
                        sub.eval_path(&path[..m])
                    };
                    let right = if m + 1 == k {
                        Matrix::identity(top.dims[rs])
                    } else {
                        top.eval_path(&path[m + 1..])
                    };
                    let (zr, zc) = shapes[a];
                    for r in 0..rows {
                        for u in 0..zr {
                            let l = &left[(r, u)];
                            if l.is_zero() {
                                continue;
                            }
                            for v in 0..zc {
                                for c in 0..cols {
                                    let rr = &right[(v, c)];
                                    if rr.is_zero() {
                                        continue;
                                    }
                                    eqs[r * cols + c]
                                        .push((offsets[a] + u * zc + v, coef.clone() * l.clone() * rr.clone()));
                                }
                            }
                        }
                    }
                }
            }
            for e in eqs {
                sys.push(merge_terms(e));
            }
        }
        ExtensionSpace { offsets, shapes, basis: sys.solution_space() }
    }

    /// The extension module with the given off-diagonal blocks. At every
    /// vertex the basis of `sub` comes first.
    pub fn build_extension(top: &Rep<F>, sub: &Rep<F>, blocks: &[Matrix<F>]) -> Rep<F> {
        let q = &top.alg.quiver;
        let dims: Vec<usize> = (0..top.n()).map(|v| sub.dims[v] + top.dims[v]).collect();
        let mut mats = Vec::new();
        for (k, a) in q.arrows.iter().enumerate() {
            let mut m = Matrix::zeros(dims[a.target], dims[a.source]);
            m.set_block(0, 0, &sub.mats[k]);
            m.set_block(0, sub.dims[a.source], &blocks[k]);
            m.set_block(sub.dims[a.target], sub.dims[a.source], &top.mats[k]);
            mats.push(m.map(|x| bind(x.clone(), top.field)));
        }
        Rep { alg: top.alg.clone(), field: top.field, dims, mats }
    }

    /// dim Ext¹(self, other) from cocycles modulo coboundaries.
    pub fn ext1_dim_direct(&self, other: &Rep<F>) -> usize {
        if self.is_zero() || other.is_zero() {
            return 0;
        }
        let z = Rep::extension_space(self, other).dim();
        let pairs: usize = (0..self.n()).map(|v| self.dims[v] * other.dims[v]).sum();
        let b = pairs - self.hom_dim(other);
        z - b
    }

    /// dim Hom(M,N) + dim Hom(N,M) − (rank M, rank N) for locally free modules.
    pub fn ext1_dim_lf(&self, other: &Rep<F>) -> Result<i64> {
        let r1 = self.rank_vector().ok_or(Error::NotLocallyFree)?;
        let r2 = other.rank_vector().ok_or(Error::NotLocallyFree)?;
        Ok(self.hom_dim(other) as i64 + other.hom_dim(self) as i64 - self.alg.datum.bil_sym(&r1, &r2))
    }

    /// Blocks `(j, g, f)` indexing the summands of M̃_i.
    fn tilde_blocks(&self, i: usize) -> Vec<(usize, usize, usize)> {
        let datum = &self.alg.datum;
        let mut out = Vec::new();
        for j in datum.neighbors(i) {
            for g in 1..=datum.g(i, j) {
                for f in 0..datum.f(j, i) {
                    out.push((j, g, f));
                }
            }
        }
        out
    }

    /// M_{i,in}: ⊕ M_j → M_i, `x ↦ Σ sgn(i,j) ε_i^f α_ij^(g) x`.
    pub fn map_in(&self, i: usize) -> Matrix<F> {
        let datum = &self.alg.datum;
        let mut m = Matrix::zeros(self.dims[i], 0);
        for (j, g, f) in self.tilde_blocks(i) {
            let b = self.eps(i).pow(f).mul(self.alpha(i, j, g)).scale(&self.scalar(datum.sgn(i, j)));
            m = m.hstack(&b);
        }
        m
    }

    /// M_{i,out}: M_i → ⊕ M_j, `v ↦ (α_ji^(g) ε_i^{f_ji−1−f} v)`.
    pub fn map_out(&self, i: usize) -> Matrix<F> {
        let datum = &self.alg.datum;
        let mut m = Matrix::zeros(0, self.dims[i]);
        for (j, g, f) in self.tilde_blocks(i) {
            let b = self.alpha(j, i, g).mul(&self.eps(i).pow(datum.f(j, i) - 1 - f));
            m = m.vstack(&b);
        }
        m
    }

    /// dim Ker(M_{i,in}) / Im(M_{i,out}), which equals dim Ext¹(M, E_i) for
    /// locally free M.
    pub fn ext1_to_e(&self, i: usize) -> Result<usize> {
        if !self.is_locally_free() {
            return Err(Error::NotLocallyFree);
        }
        let min = self.map_in(i);
        let mout = self.map_out(i);
        let ker = min.cols() - min.rank();
        Ok(ker - mout.rank())
    }
}

fn merge_terms<F: Field>(mut e: Vec<(usize, F)>) -> Vec<(usize, F)> {
    e.sort_by_key(|(k, _)| *k);
    let mut out: Vec<(usize, F)> = Vec::with_capacity(e.len());
    for (k, x) in e {
        match out.last_mut() {
            Some((lk, lx)) if *lk == k => *lx = lx.clone() + x,
            _ => out.push((k, x)),
        }
    }
    out
}
