//! Module files in JSON.
//!
//! The matrix form is
//! `{"field": {"kind": "Q"} | {"kind": "Fp", "p": 101}, "dims": [..],
//!   "arrows": {"eps_1": [[..], ..], "a_1_2_1": [[..]], ..}}`
//! with row-major entries given as strings or integers; absent arrows are
//! zero. The labeled-basis form `{"basis": [..], "actions": [..]}` is
//! accepted as well and is read over ℚ. Either form may carry a `"cartan"`
//! block naming its datum.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cartan::CartanConfig;
use crate::catalog::{from_labeled_basis, LabeledBasisSpec};
use crate::error::{Error, Result};
use crate::field::{Field, FieldKind, Fp, Rational};
use crate::matrix::Matrix;
use crate::modrep::Rep;
use crate::presentation::Algebra;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FieldSpec {
    Q,
    Fp { p: u64 },
}

impl FieldSpec {
    pub fn kind(self) -> FieldKind {
        match self {
            FieldSpec::Q => FieldKind::Rational,
            FieldSpec::Fp { p } => FieldKind::Prime { p },
        }
    }

    pub fn of(kind: FieldKind) -> Self {
        match kind {
            FieldKind::Rational => FieldSpec::Q,
            FieldKind::Prime { p } => FieldSpec::Fp { p },
        }
    }
}

#[derive(Debug, Deserialize)]
struct MatrixFile {
    field: FieldSpec,
    dims: Vec<usize>,
    #[serde(default)]
    arrows: BTreeMap<String, Vec<Vec<Value>>>,
}

/// A module over whichever field its file names.
#[derive(Clone, Debug)]
pub enum AnyRep {
    Q(Rep<Rational>),
    Fp(Rep<Fp>),
}

impl AnyRep {
    pub fn dims(&self) -> &[usize] {
        match self {
            AnyRep::Q(m) => m.dims(),
            AnyRep::Fp(m) => m.dims(),
        }
    }

    pub fn field(&self) -> FieldKind {
        match self {
            AnyRep::Q(m) => m.field(),
            AnyRep::Fp(m) => m.field(),
        }
    }

    pub fn into_q(self) -> Result<Rep<Rational>> {
        match self {
            AnyRep::Q(m) => Ok(m),
            AnyRep::Fp(_) => Err(Error::Input("this operation needs a module over ℚ".into())),
        }
    }
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
}

/// The `"cartan"` block of a module file, if present.
pub fn embedded_cartan(text: &str) -> Result<Option<CartanConfig>> {
    let v = parse_json(text)?;
    match v.get("cartan") {
        None => Ok(None),
        Some(c) => serde_json::from_value(c.clone()).map(Some).map_err(|e| Error::Parse(format!("cartan block: {e}"))),
    }
}

fn entry<F: Field>(v: &Value, kind: FieldKind, at: &str) -> Result<F> {
    let s = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => return Err(Error::Parse(format!("{at}: entry {other} is not a number"))),
    };
    F::parse(&s, kind).ok_or_else(|| Error::Parse(format!("{at}: cannot read {s:?} in {kind}")))
}

fn read_matrices<F: Field>(alg: &Arc<Algebra>, file: &MatrixFile) -> Result<Rep<F>> {
    let kind = file.field.kind();
    let q = &alg.quiver;
    if file.dims.len() != alg.n() {
        return Err(Error::ShapeMismatch(format!("{} dims for {} vertices", file.dims.len(), alg.n())));
    }
    for name in file.arrows.keys() {
        if q.arrow_index(name).is_none() {
            return Err(Error::Parse(format!("unknown arrow {name}")));
        }
    }
    let mut mats = Vec::with_capacity(q.arrows.len());
    for a in &q.arrows {
        let (r, c) = (file.dims[a.target], file.dims[a.source]);
        let Some(rows) = file.arrows.get(&a.name) else {
            mats.push(Matrix::zeros(r, c));
            continue;
        };
        let shape_ok = rows.len() == r && rows.iter().all(|row| row.len() == c);
        // An empty list stands for any matrix with a zero dimension.
        if !shape_ok && !(rows.is_empty() && r * c == 0) {
            return Err(Error::ShapeMismatch(format!("{} must be {r}×{c}", a.name)));
        }
        let mut data = Vec::with_capacity(r * c);
        for (t, row) in rows.iter().enumerate() {
            for (s, x) in row.iter().enumerate() {
                data.push(entry::<F>(x, kind, &format!("{}[{t}][{s}]", a.name))?);
            }
        }
        mats.push(Matrix::from_vec(r, c, data));
    }
    Rep::new(alg.clone(), kind, file.dims.clone(), mats)
}

/// Parse a module file in either form. Relations are not checked here.
pub fn read_module(alg: &Arc<Algebra>, text: &str) -> Result<AnyRep> {
    let v = parse_json(text)?;
    if v.get("basis").is_some() {
        let spec: LabeledBasisSpec = serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))?;
        let lambda = Rational::from_integer(1.into());
        return from_labeled_basis(alg, FieldKind::Rational, &spec, &lambda).map(AnyRep::Q);
    }
    let file: MatrixFile = serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))?;
    match file.field {
        FieldSpec::Q => read_matrices::<Rational>(alg, &file).map(AnyRep::Q),
        FieldSpec::Fp { p } => {
            if !crate::field::is_probable_prime(p) || p >= 1 << 32 {
                return Err(Error::Input(format!("{p} is not a prime below 2^32")));
            }
            read_matrices::<Fp>(alg, &file).map(AnyRep::Fp)
        }
    }
}

/// Matrix-form JSON with entries as strings and arrows in quiver order.
pub fn write_module<F: Field>(m: &Rep<F>) -> String {
    let q = &m.algebra().quiver;
    let mut arrows = serde_json::Map::new();
    for (a, arrow) in q.arrows.iter().enumerate() {
        let mat = m.mat(a);
        if mat.is_zero() {
            continue;
        }
        let rows: Vec<Value> = (0..mat.rows())
            .map(|r| Value::Array(mat.row(r).iter().map(|x| Value::String(x.to_string())).collect()))
            .collect();
        arrows.insert(arrow.name.clone(), Value::Array(rows));
    }
    let v = serde_json::json!({
        "field": FieldSpec::of(m.field()),
        "dims": m.dims(),
        "arrows": Value::Object(arrows),
    });
    serde_json::to_string_pretty(&v).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::b2_fixtures;
    use crate::CartanDatum;

    #[test]
    fn round_trip() {
        let set = b2_fixtures();
        for name in set.names() {
            let m = set.module::<Rational>(name, FieldKind::Rational).unwrap();
            let text = write_module(&m);
            let back = read_module(&set.alg, &text).unwrap().into_q().unwrap();
            assert_eq!(back.mats(), m.mats(), "{name}");
        }
        let fp = set.module::<Fp>("P_1", FieldKind::Prime { p: 7 }).unwrap();
        match read_module(&set.alg, &write_module(&fp)).unwrap() {
            AnyRep::Fp(b) => assert_eq!(b.mats(), fp.mats()),
            AnyRep::Q(_) => panic!("field lost"),
        }
    }

    #[test]
    fn spec_form_and_errors() {
        let alg = Algebra::new(CartanDatum::b2());
        let m = read_module(&alg, r#"{"basis":[1,1],"actions":[["eps_1",0,1,1]]}"#).unwrap();
        assert_eq!(m.dims(), &[2, 0]);
        let err = read_module(&alg, "{\"field\": {\"kind\":\"Q\"},\n \"dims\": [1,").unwrap_err();
        assert!(matches!(err, Error::Parse(ref s) if s.contains("line 2")));
        let bad = r#"{"field":{"kind":"Q"},"dims":[2,0],"arrows":{"eps_1":[["1"]]}}"#;
        assert!(matches!(read_module(&alg, bad), Err(Error::ShapeMismatch(_))));
        let half = r#"{"field":{"kind":"Q"},"dims":[2,0],"arrows":{"eps_1":[["0","0"],["3/2","0"]]}}"#;
        assert!(read_module(&alg, half).is_ok());
        let text = r#"{"cartan":{"C":[[2,-1],[-2,2]]},"basis":[2],"actions":[]}"#;
        assert!(embedded_cartan(text).unwrap().is_some());
    }
}
