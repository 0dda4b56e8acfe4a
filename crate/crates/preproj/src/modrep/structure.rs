//! sub_i, fac_i, K_i, C_i, φ, φ*, the dual S, E-filtrations and crystal
//! modules.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{jordan_type_of, Rep, Subquotient};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::{bind, span, Matrix};

/// Numerical invariants used to compare generic representatives.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct InvariantProfile {
    pub dims: Vec<usize>,
    pub phi: Vec<usize>,
    pub phi_star: Vec<usize>,
    pub end_dim: usize,
}

/// A chain `0 = U_0 ⊂ … ⊂ U_k = M` with `U_t / U_{t−1} ≅ E_{vertices[t−1]}`;
/// `chain[t]` holds the vertex bases of `U_t` in the coordinates of `M`.
#[derive(Clone)]
pub struct EFiltration<F> {
    pub vertices: Vec<usize>,
    pub chain: Vec<Vec<Matrix<F>>>,
}

/// Outcome of the recursive crystal-module test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrystalTrace {
    pub is_crystal: bool,
    /// Operator path (`K_i` or `C_i`) to the first failing module, with the
    /// reason.
    pub failure: Option<(Vec<String>, String)>,
}

impl<F: Field> Rep<F> {
    /// Largest submodule supported at `i` killed by all outgoing arrows.
    pub fn sub_i(&self, i: usize) -> Subquotient<F> {
        let datum = &self.alg.datum;
        let d = self.dims[i];
        let mut stack = Matrix::zeros(0, d);
        let mut p = Matrix::identity(d);
        for _ in 0..datum.ci(i).max(1) {
            for j in datum.neighbors(i) {
                for g in 1..=datum.g(j, i) {
                    stack = stack.vstack(&self.alpha(j, i, g).mul(&p));
                }
            }
            p = self.eps(i).mul(&p);
        }
        let ker = if stack.rows() == 0 { Matrix::identity(d) } else { stack.nullspace() };
        let mut basis: Vec<Matrix<F>> = self.dims.iter().map(|&dv| Matrix::zeros(dv, 0)).collect();
        basis[i] = ker.map(|x| bind(x.clone(), self.field));
        self.subquotient(basis).expect("sub_i is a submodule")
    }

    /// The ε-closed image of all arrows into `i`.
    fn incoming_image(&self, i: usize) -> Matrix<F> {
        let datum = &self.alg.datum;
        let mut parts = Vec::new();
        for j in datum.neighbors(i) {
            for g in 1..=datum.g(i, j) {
                parts.push(self.alpha(i, j, g).clone());
            }
        }
        let mut v = span(self.dims[i], &parts);
        loop {
            let w = span(self.dims[i], &[v.clone(), self.eps(i).mul(&v)]);
            if w.cols() == v.cols() {
                return v;
            }
            v = w;
        }
    }

    /// `K_i(M) ⊆ M` with `M / K_i(M) = fac_i(M)`.
    pub fn k_i(&self, i: usize) -> Subquotient<F> {
        let mut basis: Vec<Matrix<F>> = self.dims.iter().map(|&dv| Matrix::identity(dv)).collect();
        basis[i] = self.incoming_image(i);
        let basis = basis.into_iter().map(|b| b.map(|x| bind(x.clone(), self.field))).collect();
        self.subquotient(basis).expect("K_i is a submodule")
    }

    pub fn fac_i(&self, i: usize) -> Rep<F> {
        self.k_i(i).quot
    }

    pub fn c_i(&self, i: usize) -> Rep<F> {
        self.sub_i(i).quot
    }

    fn free_parts(&self, part: &Rep<F>, i: usize) -> usize {
        let c = self.alg.datum.ci(i);
        jordan_type_of(part.eps(i)).iter().filter(|&&p| p == c).count()
    }

    /// φ_i: number of parts `c_i` in the Jordan type of sub_i(M).
    pub fn phi(&self, i: usize) -> usize {
        self.free_parts(&self.sub_i(i).sub, i)
    }

    /// φ*_i: number of parts `c_i` in the Jordan type of fac_i(M).
    pub fn phi_star(&self, i: usize) -> usize {
        self.free_parts(&self.fac_i(i), i)
    }

    pub fn phis(&self) -> Vec<usize> {
        (0..self.n()).map(|i| self.phi(i)).collect()
    }

    pub fn phi_stars(&self) -> Vec<usize> {
        (0..self.n()).map(|i| self.phi_star(i)).collect()
    }

    pub fn profile(&self) -> InvariantProfile {
        InvariantProfile {
            dims: self.dims.clone(),
            phi: self.phis(),
            phi_star: self.phi_stars(),
            end_dim: self.end_dim(),
        }
    }

    /// The dual S(M): transposes with α_ij and α_ji exchanged.
    pub fn transpose_dual(&self) -> Rep<F> {
        let q = &self.alg.quiver;
        let mats = q
            .arrows
            .iter()
            .map(|a| match a.kind {
                crate::presentation::ArrowKind::Loop { i } => self.eps(i).transpose(),
                crate::presentation::ArrowKind::Alpha { i, j, g } => self.alpha(j, i, g).transpose(),
            })
            .collect();
        Rep { alg: self.alg.clone(), field: self.field, dims: self.dims.clone(), mats }
    }

    /// dim G(d) − dim End(M).
    pub fn orbit_dim(&self) -> i64 {
        let g: usize = self.dims.iter().map(|d| d * d).sum();
        g as i64 - self.end_dim() as i64
    }

    /// Whether End(M) is local: generic endomorphisms are scalar plus
    /// nilpotent exactly when the endomorphism ring is local.
    pub fn is_indecomposable(&self) -> Result<bool> {
        let total = self.total_dim();
        if total == 0 {
            return Ok(false);
        }
        let ch = self.field.characteristic();
        if ch != 0 && (ch < 1000 || total as u64 % ch == 0) {
            return Err(Error::FieldTooSmall);
        }
        let end = self.hom_space(self);
        if end.dim() == 1 {
            return Ok(true);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1dec);
        let n_f = self.scalar(total as i64);
        for _ in 0..3 {
            let x = end.random(&mut rng, self.field);
            let mut block = Matrix::zeros(total, total);
            let mut off = 0;
            for (v, m) in x.iter().enumerate() {
                block.set_block(off, off, m);
                off += self.dims[v];
            }
            let lambda = block.trace() / n_f.clone();
            let shifted = block.sub(&Matrix::identity(total).scale(&lambda));
            if !shifted.pow(total).is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// A uniformly random element of Hom(M, E_i), if surjective.
    pub fn random_surjection_to_e<R: rand::Rng + ?Sized>(
        &self,
        e_i: &Rep<F>,
        i: usize,
        rng: &mut R,
    ) -> Option<Vec<Matrix<F>>> {
        let hom = self.hom_space(e_i);
        if hom.dim() == 0 {
            return None;
        }
        let f = hom.random(rng, self.field);
        if f[i].rank() == e_i.dims[i] {
            Some(f)
        } else {
            None
        }
    }

    /// Randomized search for an E-filtration, trying up to `tries` random
    /// surjections per step.
    pub fn is_e_filtered(&self, tries: usize, seed: u64) -> Option<EFiltration<F>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ident: Vec<Matrix<F>> = self.dims.iter().map(|&d| Matrix::identity(d)).collect();
        let (vertices, chain) = self.filtration_rec(&ident, tries, &mut rng)?;
        Some(EFiltration { vertices, chain })
    }

    #[allow(clippy::type_complexity)]
    fn filtration_rec(
        &self,
        embed: &[Matrix<F>],
        tries: usize,
        rng: &mut ChaCha8Rng,
    ) -> Option<(Vec<usize>, Vec<Vec<Matrix<F>>>)> {
        if self.is_zero() {
            let empty = embed.iter().map(|m| Matrix::zeros(m.rows(), 0)).collect();
            return Some((Vec::new(), vec![empty]));
        }
        for i in 0..self.n() {
            if self.phi_star(i) == 0 {
                continue;
            }
            let e = crate::catalog::make_e::<F>(&self.alg, self.field, i);
            for _ in 0..tries {
                let Some(f) = self.random_surjection_to_e(&e, i, rng) else { continue };
                let kernel = self.kernel_of(&f).ok()?;
                let sub_embed: Vec<Matrix<F>> =
                    embed.iter().zip(&kernel.basis).map(|(a, b)| a.mul(b)).collect();
                if let Some((mut vs, mut chain)) = kernel.sub.filtration_rec(&sub_embed, tries, rng) {
                    vs.push(i);
                    chain.push(embed.to_vec());
                    return Some((vs, chain));
                }
            }
        }
        None
    }

    /// Recursive crystal-module test.
    pub fn crystal_trace(&self) -> CrystalTrace {
        match self.crystal_rec(&mut Vec::new()) {
            None => CrystalTrace { is_crystal: true, failure: None },
            Some(f) => CrystalTrace { is_crystal: false, failure: Some(f) },
        }
    }

    pub fn is_crystal(&self) -> bool {
        self.crystal_trace().is_crystal
    }

    fn crystal_rec(&self, path: &mut Vec<String>) -> Option<(Vec<String>, String)> {
        if self.is_zero() {
            return None;
        }
        let datum = &self.alg.datum;
        let mut any_top = false;
        let mut children = Vec::new();
        for i in 0..self.n() {
            let c = datum.ci(i);
            let sub = self.sub_i(i);
            let k = self.k_i(i);
            let fac = &k.quot;
            if jordan_type_of(sub.sub.eps(i)).iter().any(|&p| p != c) {
                return Some((path.clone(), format!("sub_{} is not free", i + 1)));
            }
            if jordan_type_of(fac.eps(i)).iter().any(|&p| p != c) {
                return Some((path.clone(), format!("fac_{} is not free", i + 1)));
            }
            if !fac.is_zero() {
                any_top = true;
                children.push((format!("K_{}", i + 1), k.sub));
            }
            if !sub.sub.is_zero() {
                children.push((format!("C_{}", i + 1), sub.quot));
            }
        }
        if !any_top {
            return Some((path.clone(), "no E_i quotient, so not E-filtered".into()));
        }
        for (label, child) in children {
            path.push(label);
            if let Some(f) = child.crystal_rec(path) {
                return Some(f);
            }
            path.pop();
        }
        None
    }
}
