//! The crystal operators ẽ_i, f̃_i, ẽ*_i, f̃*_i on generic representatives.
//!
//! A component is represented by one module; the operators produce random
//! extensions or kernels and keep a draw only if its invariants are those of
//! a generic point and an independent draw agrees with it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::make_e;
use crate::error::{Error, Result};
use crate::field::{Field, FieldKind};
use crate::matrix::Matrix;
use crate::modrep::{InvariantProfile, Rep};

pub const DEFAULT_PRIME: u64 = 2147483647;

/// How the plain operators ẽ_i, f̃_i are realized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PlainPath {
    /// Conjugate the star operators by the dual S.
    #[default]
    Dual,
    /// Extend below by E_i, or divide out a copy of E_i in the socle.
    Direct,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenericityPolicy {
    pub seed: u64,
    pub samples: usize,
    pub retries: usize,
    pub prime: u64,
    pub plain: PlainPath,
}

impl Default for GenericityPolicy {
    fn default() -> Self {
        GenericityPolicy { seed: 0, samples: 2, retries: 8, prime: DEFAULT_PRIME, plain: PlainPath::Dual }
    }
}

impl GenericityPolicy {
    pub fn with_seed(seed: u64) -> Self {
        GenericityPolicy { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(Error::Input("samples must be at least 2".into()));
        }
        if self.retries == 0 {
            return Err(Error::Input("retries must be positive".into()));
        }
        if !crate::field::is_probable_prime(self.prime) {
            return Err(Error::Input(format!("{} is not prime", self.prime)));
        }
        Ok(())
    }

    pub fn field(&self) -> FieldKind {
        FieldKind::Prime { p: self.prime }
    }

    /// The generator for call `salt`; independent calls use distinct salts.
    pub fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(mix(self.seed, salt))
    }
}

/// SplitMix64-style combination used to derive per-call seeds.
pub fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(17);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Salt for a string label, e.g. an operator name combined with a node key.
pub fn salt_of(parts: &[u64]) -> u64 {
    parts.iter().fold(0x51_7cc1_b727_220a, |acc, &p| mix(acc, p))
}

/// Expected invariants of an operator output.
struct Expect {
    rank: Vec<i64>,
    vertex: usize,
    phi: Option<usize>,
    phi_star: Option<usize>,
}

/// ε_i = φ_i − ⟨wt, α_i⟩.
pub fn eps_val<F: Field>(m: &Rep<F>, i: usize) -> Result<i64> {
    let r = m.rank_vector().ok_or(Error::NotLocallyFree)?;
    Ok(m.phi(i) as i64 - m.algebra().datum.pair_alpha(&r, i))
}

/// ε*_i = φ*_i − ⟨wt, α_i⟩.
pub fn eps_star_val<F: Field>(m: &Rep<F>, i: usize) -> Result<i64> {
    let r = m.rank_vector().ok_or(Error::NotLocallyFree)?;
    Ok(m.phi_star(i) as i64 - m.algebra().datum.pair_alpha(&r, i))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtRow {
    pub vertex: usize,
    pub ext: i64,
    pub formula: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtReport {
    pub rows: Vec<ExtRow>,
}

impl ExtReport {
    pub fn is_consistent(&self) -> bool {
        self.rows.iter().all(|r| r.ext == r.formula)
    }

    pub fn mismatches(&self) -> Vec<usize> {
        self.rows.iter().filter(|r| r.ext != r.formula).map(|r| r.vertex).collect()
    }
}

/// Compare dim Ext¹(M, E_i) with c_i(φ_i + φ*_i − ⟨wt, α_i⟩) at every vertex.
pub fn ext_formula_check<F: Field>(m: &Rep<F>) -> Result<ExtReport> {
    let r = m.rank_vector().ok_or(Error::NotLocallyFree)?;
    let datum = &m.algebra().datum;
    let mut rows = Vec::new();
    for i in 0..m.n() {
        let defect = m.phi(i) as i64 + m.phi_star(i) as i64 - datum.pair_alpha(&r, i);
        rows.push(ExtRow { vertex: i, ext: m.ext1_to_e(i)? as i64, formula: datum.ci(i) as i64 * defect });
    }
    Ok(ExtReport { rows })
}

fn passes<F: Field>(m: &Rep<F>, e: &Expect) -> bool {
    if m.rank_vector().as_ref() != Some(&e.rank) {
        return false;
    }
    if e.phi.is_some_and(|p| m.phi(e.vertex) != p) || e.phi_star.is_some_and(|p| m.phi_star(e.vertex) != p) {
        return false;
    }
    ext_formula_check(m).map(|r| r.is_consistent()).unwrap_or(false)
}

/// Draw `policy.samples` candidates per attempt and accept the first when
/// every draw passes verification and all profiles agree.
fn generic_draw<F: Field>(
    policy: &GenericityPolicy,
    salt: u64,
    what: &str,
    expect: &Expect,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> Option<Rep<F>>,
) -> Result<Rep<F>> {
    for attempt in 0..policy.retries {
        let mut rng = policy.rng(mix(salt, attempt as u64));
        let mut first: Option<(Rep<F>, InvariantProfile)> = None;
        let mut ok = true;
        for _ in 0..policy.samples {
            let Some(m) = draw(&mut rng) else {
                ok = false;
                break;
            };
            if !passes(&m, expect) {
                ok = false;
                break;
            }
            let prof = m.profile();
            match &first {
                None => first = Some((m, prof)),
                Some((_, p0)) if *p0 == prof => {}
                Some(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(first.expect("at least two samples").0);
        }
    }
    Err(Error::GenericityExhausted(format!("{what} after {} attempts", policy.retries)))
}

fn shifted(m_rank: &[i64], i: usize, by: i64) -> Vec<i64> {
    let mut r = m_rank.to_vec();
    r[i] += by;
    r
}

/// A random point of the extension space, rescaled to a canonical form.
fn random_cocycle<F: Field>(
    space: &crate::modrep::ExtensionSpace<F>,
    rng: &mut ChaCha8Rng,
    kind: FieldKind,
) -> Vec<Matrix<F>> {
    let coeffs: Vec<F> = (0..space.dim()).map(|_| F::sample(rng, kind)).collect();
    let mut z = space.basis.mul_vec(&coeffs);
    F::normalize_vector(&mut z);
    space.blocks(&z)
}

/// ẽ*_i: a generic extension 0 → M → M' → E_i → 0.
pub fn e_star<F: Field>(m: &Rep<F>, i: usize, policy: &GenericityPolicy, salt: u64) -> Result<Rep<F>> {
    let rank = m.rank_vector().ok_or(Error::NotLocallyFree)?;
    let e = make_e::<F>(m.algebra(), m.field(), i);
    let space = Rep::extension_space(&e, m);
    let expect =
        Expect { rank: shifted(&rank, i, 1), vertex: i, phi: None, phi_star: Some(m.phi_star(i) + 1) };
    generic_draw(policy, salt, "e_star", &expect, |rng| {
        let blocks = random_cocycle(&space, rng, m.field());
        Some(Rep::build_extension(&e, m, &blocks))
    })
}

/// f̃*_i: the kernel of a random surjection M → E_i, or `None` if φ*_i(M) = 0.
pub fn f_star<F: Field>(m: &Rep<F>, i: usize, policy: &GenericityPolicy, salt: u64) -> Result<Option<Rep<F>>> {
    let rank = m.rank_vector().ok_or(Error::NotLocallyFree)?;
    let p = m.phi_star(i);
    if p == 0 {
        return Ok(None);
    }
    let e = make_e::<F>(m.algebra(), m.field(), i);
    let expect = Expect { rank: shifted(&rank, i, -1), vertex: i, phi: None, phi_star: Some(p - 1) };
    generic_draw(policy, salt, "f_star", &expect, |rng| {
        let f = m.random_surjection_to_e(&e, i, rng)?;
        Some(m.kernel_of(&f).ok()?.sub)
    })
    .map(Some)
}

/// ẽ_i.
pub fn e_plain<F: Field>(m: &Rep<F>, i: usize, policy: &GenericityPolicy, salt: u64) -> Result<Rep<F>> {
    match policy.plain {
        PlainPath::Dual => Ok(e_star(&m.transpose_dual(), i, policy, salt)?.transpose_dual()),
        PlainPath::Direct => e_plain_direct(m, i, policy, salt),
    }
}

/// f̃_i.
pub fn f_plain<F: Field>(m: &Rep<F>, i: usize, policy: &GenericityPolicy, salt: u64) -> Result<Option<Rep<F>>> {
    match policy.plain {
        PlainPath::Dual => Ok(f_star(&m.transpose_dual(), i, policy, salt)?.map(|u| u.transpose_dual())),
        PlainPath::Direct => f_plain_direct(m, i, policy, salt),
    }
}

/// ẽ_i as a generic extension 0 → E_i → M' → M → 0.
pub fn e_plain_direct<F: Field>(m: &Rep<F>, i: usize, policy: &GenericityPolicy, salt: u64) -> Result<Rep<F>> {
    let rank = m.rank_vector().ok_or(Error::NotLocallyFree)?;
    let e = make_e::<F>(m.algebra(), m.field(), i);
    let space = Rep::extension_space(m, &e);
    let expect = Expect { rank: shifted(&rank, i, 1), vertex: i, phi: Some(m.phi(i) + 1), phi_star: None };
    generic_draw(policy, salt, "e_plain", &expect, |rng| {
        let blocks = random_cocycle(&space, rng, m.field());
        Some(Rep::build_extension(m, &e, &blocks))
    })
}

/// f̃_i as the cokernel of a random embedding E_i → M.
pub fn f_plain_direct<F: Field>(
    m: &Rep<F>,
    i: usize,
    policy: &GenericityPolicy,
    salt: u64,
) -> Result<Option<Rep<F>>> {
    let rank = m.rank_vector().ok_or(Error::NotLocallyFree)?;
    let p = m.phi(i);
    if p == 0 {
        return Ok(None);
    }
    let e = make_e::<F>(m.algebra(), m.field(), i);
    let hom = e.hom_space(m);
    let c = m.algebra().datum.ci(i);
    let expect = Expect { rank: shifted(&rank, i, -1), vertex: i, phi: Some(p - 1), phi_star: None };
    generic_draw(policy, salt, "f_plain", &expect, |rng| {
        let f = hom.random(rng, m.field());
        if f[i].rank() != c {
            return None;
        }
        Some(m.image_of(&f).ok()?.quot)
    })
    .map(Some)
}

/// `k`-fold application of ẽ*_i.
pub fn e_star_pow<F: Field>(
    m: &Rep<F>,
    i: usize,
    k: usize,
    policy: &GenericityPolicy,
    salt: u64,
) -> Result<Rep<F>> {
    let mut cur = m.clone();
    for t in 0..k {
        cur = e_star(&cur, i, policy, mix(salt, t as u64))?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::b2_fixtures;
    use crate::field::{Fp, Rational};
    use crate::presentation::Algebra;
    use crate::cartan::CartanDatum;

    #[test]
    fn e_star_from_zero_is_e() {
        let alg = Algebra::new(CartanDatum::b2());
        let pol = GenericityPolicy::default();
        let zero = Rep::<Fp>::zero(alg.clone(), pol.field());
        for i in 0..2 {
            let e = e_star(&zero, i, &pol, 7).unwrap();
            assert_eq!(e.profile(), make_e::<Fp>(&alg, pol.field(), i).profile());
            let p = e_plain(&zero, i, &pol, 8).unwrap();
            assert_eq!(p.profile(), e.profile());
        }
    }

    #[test]
    fn eps_values() {
        let m = b2_fixtures().sum::<Rational>(&["E_1", "T_1"], FieldKind::Rational).unwrap();
        assert_eq!(eps_val(&m, 1).unwrap(), 3);
        let r = ext_formula_check(&m).unwrap();
        assert!(r.is_consistent());
        assert_eq!(r.rows[1].ext, 3);
    }

    #[test]
    fn worked_example_edges() {
        let set = b2_fixtures();
        let kind = FieldKind::Rational;
        let pol = GenericityPolicy::default();
        let m = set.sum::<Rational>(&["E_1", "T_1"], kind).unwrap();
        let up2 = e_star(&m, 1, &pol, 1).unwrap();
        assert_eq!(up2.profile(), set.sum::<Rational>(&["E_1", "P_2"], kind).unwrap().profile());
        let t1 = set.module::<Rational>("T_1", kind).unwrap();
        let back = e_star(&t1, 0, &pol, 2).unwrap();
        assert_eq!(back.profile(), m.profile());
        let down = f_star(&m, 0, &pol, 3).unwrap().unwrap();
        assert_eq!(down.profile(), t1.profile());
        let plain = e_plain(&m, 1, &pol, 4).unwrap();
        assert_eq!(plain.profile(), set.sum::<Rational>(&["T_1", "T_1"], kind).unwrap().profile());
        let direct = e_plain_direct(&m, 1, &pol, 4).unwrap();
        assert_eq!(plain.profile(), direct.profile());
    }

    #[test]
    fn no_removal_without_top() {
        let set = b2_fixtures();
        let m = set.module::<Rational>("T_1", FieldKind::Rational).unwrap();
        assert!(f_star(&m, 1, &GenericityPolicy::default(), 0).unwrap().is_none());
    }
}
