//! Cartan data, bilinear forms and finite-type root combinatorics.
//!
//! Vertices are 0-based internally; names and file formats use 1-based labels.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};

/// Default cap on root heights when testing for finite type.
pub const FINITE_TYPE_HEIGHT_CAP: i64 = 60;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CartanDatum {
    n: usize,
    c: Vec<Vec<i64>>,
    d: Vec<i64>,
    omega: BTreeSet<(usize, usize)>,
    g: Vec<Vec<usize>>,
    f: Vec<Vec<usize>>,
}

pub type RankVector = Vec<i64>;
pub type WeightCoords = Vec<i64>;

impl CartanDatum {
    /// Validate a Cartan matrix with symmetrizer and orientation.
    pub fn new(c: Vec<Vec<i64>>, d: Vec<i64>, omega: BTreeSet<(usize, usize)>) -> Result<Self> {
        let n = c.len();
        if n == 0 || c.iter().any(|row| row.len() != n) || d.len() != n {
            return Err(Error::Input("Cartan matrix and symmetrizer must be n×n and length n".into()));
        }
        for i in 0..n {
            if c[i][i] != 2 {
                return Err(Error::BadDiagonal(i + 1));
            }
            for j in 0..n {
                if i != j && (c[i][j] > 0 || (c[i][j] == 0) != (c[j][i] == 0)) {
                    return Err(Error::Input(format!(
                        "entries c_{}{} = {} and c_{}{} = {} violate the sign conditions",
                        i + 1,
                        j + 1,
                        c[i][j],
                        j + 1,
                        i + 1,
                        c[j][i]
                    )));
                }
            }
        }
        if d.iter().any(|&x| x <= 0) {
            return Err(Error::NonSymmetrizable("symmetrizer entries must be positive".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if d[i] * c[i][j] != d[j] * c[j][i] {
                    return Err(Error::NonSymmetrizable(format!(
                        "c_{i1}·c_{i1}{j1} ≠ c_{j1}·c_{j1}{i1}",
                        i1 = i + 1,
                        j1 = j + 1
                    )));
                }
            }
        }
        for &(i, j) in &omega {
            if i >= n || j >= n || i == j || c[i][j] == 0 {
                return Err(Error::BadOrientation(format!("pair ({},{}) is not an edge", i + 1, j + 1)));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if c[i][j] < 0 && omega.contains(&(i, j)) == omega.contains(&(j, i)) {
                    return Err(Error::BadOrientation(format!(
                        "exactly one of ({a},{b}), ({b},{a}) must be oriented",
                        a = i + 1,
                        b = j + 1
                    )));
                }
            }
        }
        let mut g = vec![vec![0usize; n]; n];
        let mut f = vec![vec![0usize; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j && c[i][j] != 0 {
                    let gij = c[i][j].abs().gcd(&c[j][i].abs()) as usize;
                    g[i][j] = gij;
                    f[i][j] = c[i][j].unsigned_abs() as usize / gij;
                }
            }
        }
        Ok(CartanDatum { n, c, d, omega, g, f })
    }

    /// Datum with the minimal symmetrizer and the default orientation
    /// `{(i,j) : i<j, c_ij<0}`.
    pub fn with_defaults(c: Vec<Vec<i64>>) -> Result<Self> {
        let d = minimal_symmetrizer(&c)?;
        let omega = default_orientation(&c);
        Self::new(c, d, omega)
    }

    pub fn b2() -> Self {
        Self::with_defaults(vec![vec![2, -1], vec![-2, 2]]).unwrap()
    }

    pub fn g2() -> Self {
        Self::with_defaults(vec![vec![2, -1], vec![-3, 2]]).unwrap()
    }

    /// Type A2 with symmetrizer `k·I`.
    pub fn a2(k: i64) -> Self {
        let c = vec![vec![2, -1], vec![-1, 2]];
        let omega = default_orientation(&c);
        Self::new(c, vec![k, k], omega).unwrap()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self, i: usize, j: usize) -> i64 {
        self.c[i][j]
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.c
    }

    /// Symmetrizer entry c_i.
    pub fn ci(&self, i: usize) -> usize {
        self.d[i] as usize
    }

    pub fn symmetrizer(&self) -> &[i64] {
        &self.d
    }

    pub fn omega(&self) -> &BTreeSet<(usize, usize)> {
        &self.omega
    }

    pub fn g(&self, i: usize, j: usize) -> usize {
        self.g[i][j]
    }

    pub fn f(&self, i: usize, j: usize) -> usize {
        self.f[i][j]
    }

    pub fn sgn(&self, i: usize, j: usize) -> i64 {
        if self.omega.contains(&(i, j)) {
            1
        } else {
            -1
        }
    }

    /// Neighbours `j` with `c_ij < 0`, ascending.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| j != i && self.c[i][j] < 0).collect()
    }

    /// Symmetric form `(x,y) = Σ x_i y_j c_i c_ij`.
    pub fn bil_sym(&self, x: &[i64], y: &[i64]) -> i64 {
        let mut s = 0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += x[i] * y[j] * self.d[i] * self.c[i][j];
            }
        }
        s
    }

    /// Euler form `⟨x,y⟩ = Σ x_i y_j c_ji`.
    pub fn bil_euler(&self, x: &[i64], y: &[i64]) -> i64 {
        let mut s = 0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += x[i] * y[j] * self.c[j][i];
            }
        }
        s
    }

    /// `⟨r, α_i⟩ = Σ_j r_j c_ij`.
    pub fn pair_alpha(&self, r: &[i64], i: usize) -> i64 {
        (0..self.n).map(|j| r[j] * self.c[i][j]).sum()
    }

    pub fn q_dc(&self, x: &[i64]) -> i64 {
        self.bil_sym(x, x) / 2
    }

    pub fn simple_root(&self, i: usize) -> RankVector {
        let mut v = vec![0; self.n];
        v[i] = 1;
        v
    }

    /// `Σ d_i² − q_DC(d/D)` for a locally free dimension vector.
    pub fn expected_dim(&self, dims: &[usize]) -> Result<i64> {
        let mut r = vec![0; self.n];
        for i in 0..self.n {
            if dims[i] % self.ci(i) != 0 {
                return Err(Error::NotLocallyFreeShape(format!(
                    "c_{} = {} does not divide d_{} = {}",
                    i + 1,
                    self.d[i],
                    i + 1,
                    dims[i]
                )));
            }
            r[i] = (dims[i] / self.ci(i)) as i64;
        }
        let g: i64 = dims.iter().map(|&x| (x * x) as i64).sum();
        Ok(g - self.q_dc(&r))
    }

    /// Simple reflection `s_i(x) = x − ⟨x,α_i⟩ α_i`.
    pub fn reflect(&self, x: &[i64], i: usize) -> RankVector {
        let mut y = x.to_vec();
        y[i] -= self.pair_alpha(x, i);
        y
    }

    pub fn positive_roots(&self) -> Result<Vec<RankVector>> {
        self.positive_roots_capped(FINITE_TYPE_HEIGHT_CAP)
    }

    /// Positive roots by closing the simple roots under simple reflections.
    pub fn positive_roots_capped(&self, cap: i64) -> Result<Vec<RankVector>> {
        let mut seen: HashSet<RankVector> = HashSet::new();
        let mut queue = VecDeque::new();
        for i in 0..self.n {
            let a = self.simple_root(i);
            seen.insert(a.clone());
            queue.push_back(a);
        }
        while let Some(x) = queue.pop_front() {
            for i in 0..self.n {
                let y = self.reflect(&x, i);
                if y.iter().all(|&v| v >= 0) && y.iter().any(|&v| v > 0) && !seen.contains(&y) {
                    if y.iter().sum::<i64>() > cap {
                        return Err(Error::NotFiniteType);
                    }
                    seen.insert(y.clone());
                    queue.push_back(y);
                }
            }
        }
        let mut roots: Vec<RankVector> = seen.into_iter().collect();
        roots.sort_by_key(|r| (r.iter().sum::<i64>(), r.clone()));
        Ok(roots)
    }

    /// Number of Kostant partitions of `r`.
    pub fn kostant_count(&self, r: &[i64]) -> Result<u64> {
        let roots = self.positive_roots()?;
        let mut memo = HashMap::new();
        Ok(kostant_rec(&roots, 0, r.to_vec(), &mut memo))
    }

    /// Weyl dimension formula with `ρ = Σ ϖ_i`.
    pub fn weyl_dim(&self, lambda: &[i64]) -> Result<BigInt> {
        if lambda.iter().any(|&a| a < 0) {
            return Err(Error::NotDominant);
        }
        let roots = self.positive_roots()?;
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for a in &roots {
            let top: i64 = (0..self.n).map(|j| a[j] * self.d[j] * (lambda[j] + 1)).sum();
            let bot: i64 = (0..self.n).map(|j| a[j] * self.d[j]).sum();
            num *= BigInt::from(top);
            den *= BigInt::from(bot);
        }
        let q = BigRational::new(num, den);
        debug_assert!(q.is_integer());
        Ok(q.to_integer())
    }

    /// `ν = λ + μ − wt` in fundamental-weight coordinates.
    pub fn nu_from_weight(&self, lambda: &[i64], mu: &[i64], r: &[i64]) -> WeightCoords {
        (0..self.n)
            .map(|j| lambda[j] + mu[j] - (0..self.n).map(|i| r[i] * self.c[j][i]).sum::<i64>())
            .collect()
    }

    /// Fundamental-weight coordinates of a root-lattice element.
    pub fn root_to_weight(&self, r: &[i64]) -> WeightCoords {
        (0..self.n).map(|j| (0..self.n).map(|i| r[i] * self.c[j][i]).sum()).collect()
    }
}

fn kostant_rec(
    roots: &[RankVector],
    start: usize,
    r: RankVector,
    memo: &mut HashMap<(usize, RankVector), u64>,
) -> u64 {
    if r.iter().all(|&x| x == 0) {
        return 1;
    }
    if start == roots.len() {
        return 0;
    }
    if let Some(&v) = memo.get(&(start, r.clone())) {
        return v;
    }
    let mut total = 0;
    let mut rest = r.clone();
    loop {
        total += kostant_rec(roots, start + 1, rest.clone(), memo);
        let next: RankVector = rest.iter().zip(&roots[start]).map(|(a, b)| a - b).collect();
        if next.iter().any(|&x| x < 0) {
            break;
        }
        rest = next;
    }
    memo.insert((start, r), total);
    total
}

/// Minimal symmetrizer, normalized per connected component.
pub fn minimal_symmetrizer(c: &[Vec<i64>]) -> Result<Vec<i64>> {
    let n = c.len();
    let mut val: Vec<Option<BigRational>> = vec![None; n];
    let mut out = vec![0i64; n];
    for root in 0..n {
        if val[root].is_some() {
            continue;
        }
        let mut comp = vec![root];
        val[root] = Some(BigRational::one());
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if j == i || c[i][j] == 0 {
                    continue;
                }
                if c[j][i] == 0 {
                    return Err(Error::NonSymmetrizable("asymmetric zero pattern".into()));
                }
                let cj = val[i].clone().unwrap() * BigRational::new(c[i][j].into(), c[j][i].into());
                match &val[j] {
                    None => {
                        val[j] = Some(cj);
                        comp.push(j);
                        queue.push_back(j);
                    }
                    Some(v) if *v != cj => {
                        return Err(Error::NonSymmetrizable(format!(
                            "inconsistent ratio at vertex {}",
                            j + 1
                        )));
                    }
                    _ => {}
                }
            }
        }
        let mut den = BigInt::one();
        for &v in &comp {
            den = den.lcm(val[v].as_ref().unwrap().denom());
        }
        let ints: Vec<BigInt> = comp
            .iter()
            .map(|&v| {
                let q = val[v].as_ref().unwrap();
                q.numer() * (&den / q.denom())
            })
            .collect();
        let mut g = BigInt::zero();
        for x in &ints {
            g = g.gcd(x);
        }
        for (&v, x) in comp.iter().zip(&ints) {
            let y: BigInt = (x / &g).abs();
            out[v] = y.try_into().map_err(|_| Error::NonSymmetrizable("symmetrizer overflow".into()))?;
        }
    }
    Ok(out)
}

pub fn default_orientation(c: &[Vec<i64>]) -> BTreeSet<(usize, usize)> {
    let n = c.len();
    let mut o = BTreeSet::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if c[i][j] < 0 {
                o.insert((i, j));
            }
        }
    }
    o
}

/// The `[cartan]` block of a run configuration.
#[derive(Clone, Debug, Deserialize)]
pub struct CartanConfig {
    #[serde(rename = "C")]
    pub c: Vec<Vec<i64>>,
    #[serde(rename = "D", default)]
    pub d: Option<SymmetrizerSpec>,
    #[serde(rename = "Omega", default)]
    pub omega: Option<OrientationSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum SymmetrizerSpec {
    Explicit(Vec<i64>),
    Named(String),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum OrientationSpec {
    Explicit(Vec<(usize, usize)>),
    Named(String),
}

impl CartanConfig {
    pub fn to_datum(&self) -> Result<CartanDatum> {
        let d = match &self.d {
            None => minimal_symmetrizer(&self.c)?,
            Some(SymmetrizerSpec::Named(s)) if s == "minimal" => minimal_symmetrizer(&self.c)?,
            Some(SymmetrizerSpec::Named(s)) => {
                return Err(Error::Input(format!("unknown symmetrizer keyword {s:?}")))
            }
            Some(SymmetrizerSpec::Explicit(v)) => v.clone(),
        };
        let omega = match &self.omega {
            None => default_orientation(&self.c),
            Some(OrientationSpec::Named(s)) if s == "default" => default_orientation(&self.c),
            Some(OrientationSpec::Named(s)) => {
                return Err(Error::Input(format!("unknown orientation keyword {s:?}")))
            }
            Some(OrientationSpec::Explicit(pairs)) => {
                let mut o = BTreeSet::new();
                for &(i, j) in pairs {
                    if i == 0 || j == 0 {
                        return Err(Error::BadOrientation("vertices are numbered from 1".into()));
                    }
                    o.insert((i - 1, j - 1));
                }
                o
            }
        };
        CartanDatum::new(self.c.clone(), d, omega)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b2_datum() {
        let b2 = CartanDatum::b2();
        assert_eq!(b2.symmetrizer(), &[2, 1]);
        assert_eq!((b2.g(0, 1), b2.f(0, 1), b2.f(1, 0)), (1, 1, 2));
        assert_eq!(b2.pair_alpha(&[2, 1], 0), 3);
        assert_eq!(b2.pair_alpha(&[2, 1], 1), -2);
        assert_eq!(b2.expected_dim(&[4, 1]).unwrap(), 12);
    }

    #[test]
    fn g2_datum() {
        let g2 = CartanDatum::g2();
        assert_eq!(g2.symmetrizer(), &[3, 1]);
        assert_eq!((g2.g(0, 1), g2.f(0, 1), g2.f(1, 0)), (1, 1, 3));
        assert_eq!(g2.positive_roots().unwrap().len(), 6);
    }

    #[test]
    fn rank_one() {
        let a1 = CartanDatum::new(vec![vec![2]], vec![1], BTreeSet::new()).unwrap();
        assert_eq!(a1.positive_roots().unwrap(), vec![vec![1]]);
        assert_eq!(a1.weyl_dim(&[4]).unwrap(), BigInt::from(5));
    }

    #[test]
    fn rejects_bad_data() {
        let c = vec![vec![2, -1], vec![-2, 2]];
        assert!(matches!(
            CartanDatum::new(c.clone(), vec![1, 1], default_orientation(&c)),
            Err(Error::NonSymmetrizable(_))
        ));
        assert!(matches!(
            CartanDatum::new(c.clone(), vec![2, 1], BTreeSet::new()),
            Err(Error::BadOrientation(_))
        ));
        assert!(matches!(
            CartanDatum::new(vec![vec![1, -1], vec![-1, 2]], vec![1, 1], BTreeSet::from([(0, 1)])),
            Err(Error::BadDiagonal(1))
        ));
    }

    #[test]
    fn affine_type_is_not_finite() {
        let d = CartanDatum::with_defaults(vec![vec![2, -2], vec![-2, 2]]).unwrap();
        assert!(matches!(d.positive_roots(), Err(Error::NotFiniteType)));
    }

    #[test]
    fn config_block_parses() {
        let cfg: CartanConfig = toml::from_str("C = [[2,-1],[-3,2]]\nD = \"minimal\"\nOmega = [[2,1]]").unwrap();
        let d = cfg.to_datum().unwrap();
        assert_eq!(d.symmetrizer(), &[3, 1]);
        assert_eq!(d.sgn(1, 0), 1);
    }
}
