//! Session files: a JSON document naming complexes, chain maps, homotopies
//! and roofs over one field.
//!
//! ```json
//! {
//!   "field": "F5",
//!   "objects": {"A": {"dims": {"0": 1, "1": 1}, "diff": {"0": [[1]]}}},
//!   "maps": {"f": {"from": "A", "to": "A", "components": {"0": [[1]], "1": [[1]]}}},
//!   "homotopies": {},
//!   "roofs": {"r": {"denom": "f", "numer": "f"}}
//! }
//! ```
//!
//! Everything is validated eagerly when a session is parsed. Emission is
//! canonical (declaration order for names, ascending degree, zero matrices
//! omitted), so `emit(parse(emit(s))) == emit(s)`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::marker::PhantomData;
use std::sync::Arc;

use conecalc::exactlin::{format_rational, parse_rational};
use conecalc::roof::Roof;
use conecalc::{ChainMap, CochainComplex, FieldSpec, Homotopy, Matrix, Scalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::Deserialize;
use serde_json::Value;

use crate::error::CliError;

/// A name table that keeps declaration order and rejects duplicate names.
#[derive(Debug)]
struct Table<T>(Vec<(String, T)>);

impl<T> Default for Table<T> {
    fn default() -> Self {
        Table(Vec::new())
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Table<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct TableVisitor<T>(PhantomData<T>);

        impl<'de, T: Deserialize<'de>> Visitor<'de> for TableVisitor<T> {
            type Value = Table<T>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object keyed by name")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Table<T>, A::Error> {
                let mut entries: Vec<(String, T)> = Vec::new();
                while let Some(key) = map.next_key::<String>()? {
                    if entries.iter().any(|(k, _)| *k == key) {
                        return Err(de::Error::custom(format!("duplicate name {key:?}")));
                    }
                    let value = map.next_value()?;
                    entries.push((key, value));
                }
                Ok(Table(entries))
            }
        }

        deserializer.deserialize_map(TableVisitor(PhantomData))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSession {
    field: String,
    #[serde(default)]
    objects: Table<RawComplex>,
    #[serde(default)]
    maps: Table<RawMap>,
    #[serde(default)]
    homotopies: Table<RawMap>,
    #[serde(default)]
    roofs: Table<RawRoof>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComplex {
    #[serde(default)]
    dims: Table<usize>,
    #[serde(default)]
    diff: Table<Vec<Vec<Value>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    from: String,
    to: String,
    #[serde(default)]
    components: Table<Vec<Vec<Value>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRoof {
    denom: String,
    numer: String,
}

/// A chain map together with the names of its endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedMap {
    pub from: String,
    pub to: String,
    pub map: ChainMap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedHomotopy {
    pub from: String,
    pub to: String,
    pub homotopy: Homotopy,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedRoof {
    pub denom: String,
    pub numer: String,
    pub roof: Roof,
}

/// A parsed and fully validated session.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Session {
    pub field: FieldSpec,
    pub objects: Vec<(String, Arc<CochainComplex>)>,
    pub maps: Vec<(String, NamedMap)>,
    pub homotopies: Vec<(String, NamedHomotopy)>,
    pub roofs: Vec<(String, NamedRoof)>,
}

fn lookup<'a, T>(table: &'a [(String, T)], name: &str) -> Option<&'a T> {
    table.iter().find(|(n, _)| n == name).map(|(_, v)| v)
}

impl Session {
    pub fn new(field: FieldSpec) -> Self {
        Session {
            field,
            objects: Vec::new(),
            maps: Vec::new(),
            homotopies: Vec::new(),
            roofs: Vec::new(),
        }
    }

    pub fn object(&self, name: &str) -> Option<&Arc<CochainComplex>> {
        lookup(&self.objects, name)
    }

    pub fn map(&self, name: &str) -> Option<&NamedMap> {
        lookup(&self.maps, name)
    }

    pub fn homotopy(&self, name: &str) -> Option<&NamedHomotopy> {
        lookup(&self.homotopies, name)
    }

    pub fn roof(&self, name: &str) -> Option<&NamedRoof> {
        lookup(&self.roofs, name)
    }
}

fn scalar(value: &Value, field: FieldSpec, name: &str) -> Result<BigRational, CliError> {
    let invalid = |why: String| CliError::InvalidValue {
        name: name.to_string(),
        message: why,
    };
    let q = match value {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                BigRational::from_integer(BigInt::from(i))
            } else if let Some(u) = n.as_u64() {
                BigRational::from_integer(BigInt::from(u))
            } else {
                return Err(invalid(format!("{n} is not an integer")));
            }
        }
        Value::String(s) if field.is_rational() || !s.contains('/') => {
            parse_rational(s).ok_or_else(|| invalid(format!("{s:?} is not a rational literal")))?
        }
        Value::String(s) => {
            // fractions over F_p need an invertible denominator
            parse_rational(s).ok_or_else(|| invalid(format!("{s:?} is not a rational literal")))?
        }
        other => return Err(invalid(format!("{other} is not a scalar"))),
    };
    field
        .scalar_from_rational(&q)
        .map_err(|e| invalid(e.to_string()))?;
    Ok(q)
}

fn matrix(
    rows: &[Vec<Value>],
    shape: (usize, usize),
    field: FieldSpec,
    name: &str,
    degree: i64,
) -> Result<Matrix, CliError> {
    let (r, c) = shape;
    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
        let got_cols = rows.first().map_or(0, |row| row.len());
        return Err(CliError::Shape {
            name: name.to_string(),
            message: format!(
                "degree {degree}: expected {r}x{c} matrix, got {}x{got_cols}",
                rows.len()
            ),
        });
    }
    let entries = rows
        .iter()
        .flatten()
        .map(|v| scalar(v, field, name))
        .collect::<Result<Vec<_>, _>>()?;
    Matrix::from_rationals(field, r, c, &entries).map_err(|e| CliError::InvalidValue {
        name: name.to_string(),
        message: e.to_string(),
    })
}

fn degree(key: &str, name: &str) -> Result<i64, CliError> {
    key.trim().parse().map_err(|_| CliError::InvalidValue {
        name: name.to_string(),
        message: format!("degree key {key:?} is not an integer"),
    })
}

fn degree_table<T>(table: Table<T>, name: &str) -> Result<BTreeMap<i64, T>, CliError> {
    let mut out = BTreeMap::new();
    for (k, v) in table.0 {
        let i = degree(&k, name)?;
        if out.insert(i, v).is_some() {
            return Err(CliError::InvalidValue {
                name: name.to_string(),
                message: format!("degree {i} given twice"),
            });
        }
    }
    Ok(out)
}

fn core_error(name: &str, e: conecalc::Error) -> CliError {
    use conecalc::Error as E;
    match e {
        E::NotAComplex { degree } => CliError::NotAComplex {
            name: name.to_string(),
            degree,
        },
        E::NotAChainMap { degree } => CliError::NonCommuting {
            name: name.to_string(),
            degree,
        },
        E::DegreeShape { .. } | E::ShapeMismatch { .. } | E::ComplexMismatch(_) => CliError::Shape {
            name: name.to_string(),
            message: e.to_string(),
        },
        other => CliError::InvalidValue {
            name: name.to_string(),
            message: other.to_string(),
        },
    }
}

/// Source, target and components of a map or homotopy entry.
type MapParts = (Arc<CochainComplex>, Arc<CochainComplex>, BTreeMap<i64, Matrix>);

fn parse_map_like(
    session: &Session,
    name: &str,
    raw: RawMap,
    degree_offset: i64,
) -> Result<MapParts, CliError> {
    let unknown = |what: &str| CliError::UnknownReference {
        name: what.to_string(),
        context: name.to_string(),
    };
    let source = session.object(&raw.from).ok_or_else(|| unknown(&raw.from))?.clone();
    let target = session.object(&raw.to).ok_or_else(|| unknown(&raw.to))?.clone();
    let mut components = BTreeMap::new();
    for (i, rows) in degree_table(raw.components, name)? {
        let shape = (target.dim(i - degree_offset), source.dim(i));
        components.insert(i, matrix(&rows, shape, session.field, name, i)?);
    }
    Ok((source, target, components))
}

/// Parses and validates a session document.
pub fn parse_session(text: &str) -> Result<Session, CliError> {
    let raw: RawSession = serde_json::from_str(text).map_err(|e| CliError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let field: FieldSpec = raw.field.parse().map_err(|e: conecalc::Error| CliError::InvalidValue {
        name: "field".to_string(),
        message: e.to_string(),
    })?;
    let mut session = Session::new(field);

    for (name, obj) in raw.objects.0 {
        let dims = degree_table(obj.dims, &name)?;
        let mut diffs = BTreeMap::new();
        for (i, rows) in degree_table(obj.diff, &name)? {
            let shape = (
                dims.get(&(i + 1)).copied().unwrap_or(0),
                dims.get(&i).copied().unwrap_or(0),
            );
            diffs.insert(i, matrix(&rows, shape, field, &name, i)?);
        }
        let c = CochainComplex::new(field, &dims, diffs).map_err(|e| core_error(&name, e))?;
        if let Err(defect) = c.validate() {
            return Err(CliError::NotAComplex {
                name,
                degree: defect.degree,
            });
        }
        session.objects.push((name, Arc::new(c)));
    }

    for (name, raw_map) in raw.maps.0 {
        let (from, to) = (raw_map.from.clone(), raw_map.to.clone());
        let (s, t, comps) = parse_map_like(&session, &name, raw_map, 0)?;
        let map = ChainMap::new(s, t, comps).map_err(|e| core_error(&name, e))?;
        if let Err(defect) = map.validate() {
            return Err(CliError::NonCommuting {
                name,
                degree: defect.degree,
            });
        }
        session.maps.push((name, NamedMap { from, to, map }));
    }

    for (name, raw_h) in raw.homotopies.0 {
        let (from, to) = (raw_h.from.clone(), raw_h.to.clone());
        let (s, t, comps) = parse_map_like(&session, &name, raw_h, 1)?;
        let homotopy = Homotopy::new(s, t, comps).map_err(|e| core_error(&name, e))?;
        session
            .homotopies
            .push((name, NamedHomotopy { from, to, homotopy }));
    }

    for (name, raw_roof) in raw.roofs.0 {
        let unknown = |what: &str| CliError::UnknownReference {
            name: what.to_string(),
            context: name.clone(),
        };
        let denom = session.map(&raw_roof.denom).ok_or_else(|| unknown(&raw_roof.denom))?;
        let numer = session.map(&raw_roof.numer).ok_or_else(|| unknown(&raw_roof.numer))?;
        let roof = Roof::new(denom.map.clone(), numer.map.clone()).map_err(|e| core_error(&name, e))?;
        session.roofs.push((
            name,
            NamedRoof {
                denom: raw_roof.denom,
                numer: raw_roof.numer,
                roof,
            },
        ));
    }

    Ok(session)
}

/// Accumulates a session fragment, reusing names for complexes already added
/// and making fresh names unique.
pub struct SessionBuilder {
    session: Session,
}

impl SessionBuilder {
    pub fn new(field: FieldSpec) -> Self {
        SessionBuilder {
            session: Session::new(field),
        }
    }

    fn fresh(&self, preferred: &str) -> String {
        let taken = |n: &str| {
            self.session.objects.iter().any(|(k, _)| k == n)
                || self.session.maps.iter().any(|(k, _)| k == n)
                || self.session.homotopies.iter().any(|(k, _)| k == n)
                || self.session.roofs.iter().any(|(k, _)| k == n)
        };
        let mut name = preferred.to_string();
        while taken(&name) {
            name.push('\'');
        }
        name
    }

    /// Adds `c` under `preferred` (or a primed variant), unless an equal
    /// complex is already present, in which case its name is returned.
    pub fn object(&mut self, preferred: &str, c: &Arc<CochainComplex>) -> String {
        if let Some((n, _)) = self.session.objects.iter().find(|(_, o)| **o == **c) {
            return n.clone();
        }
        let name = self.fresh(preferred);
        self.session.objects.push((name.clone(), c.clone()));
        name
    }

    pub fn map(&mut self, preferred: &str, from: &str, to: &str, m: &ChainMap) -> String {
        let from = self.object(from, m.source());
        let to = self.object(to, m.target());
        let name = self.fresh(preferred);
        self.session.maps.push((
            name.clone(),
            NamedMap {
                from,
                to,
                map: m.clone(),
            },
        ));
        name
    }

    pub fn homotopy(&mut self, preferred: &str, from: &str, to: &str, h: &Homotopy) -> String {
        let from = self.object(from, h.source());
        let to = self.object(to, h.target());
        let name = self.fresh(preferred);
        self.session.homotopies.push((
            name.clone(),
            NamedHomotopy {
                from,
                to,
                homotopy: h.clone(),
            },
        ));
        name
    }

    pub fn roof(&mut self, preferred: &str, denom: &str, numer: &str, r: &Roof) -> String {
        let name = self.fresh(preferred);
        self.session.roofs.push((
            name.clone(),
            NamedRoof {
                denom: denom.to_string(),
                numer: numer.to_string(),
                roof: r.clone(),
            },
        ));
        name
    }

    pub fn finish(self) -> Session {
        self.session
    }
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

fn emit_scalar(s: &Scalar) -> String {
    match s {
        Scalar::Residue(v) => v.to_string(),
        Scalar::Rational(q) if q.is_integer() => q.numer().to_string(),
        Scalar::Rational(q) => quote(&format_rational(q)),
    }
}

pub fn emit_matrix(m: &Matrix) -> String {
    let rows: Vec<String> = m
        .to_rows()
        .iter()
        .map(|row| {
            let cells: Vec<String> = row.iter().map(emit_scalar).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

fn emit_degree_map<'a>(entries: impl Iterator<Item = (i64, String)> + 'a) -> String {
    let parts: Vec<String> = entries.map(|(i, v)| format!("\"{i}\": {v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

fn emit_complex(c: &CochainComplex) -> String {
    let dims = emit_degree_map(c.dims().into_iter().map(|(i, n)| (i, n.to_string())));
    let diff = emit_degree_map(c.nonzero_diffs().map(|(i, m)| (i, emit_matrix(m))));
    format!("{{\"dims\": {dims}, \"diff\": {diff}}}")
}

fn emit_map_like<'a>(from: &str, to: &str, comps: impl Iterator<Item = (i64, &'a Matrix)>) -> String {
    let comps = emit_degree_map(comps.map(|(i, m)| (i, emit_matrix(m))));
    format!(
        "{{\"from\": {}, \"to\": {}, \"components\": {comps}}}",
        quote(from),
        quote(to)
    )
}

fn emit_table<T>(out: &mut String, key: &str, table: &[(String, T)], last: bool, f: impl Fn(&T) -> String) {
    if table.is_empty() {
        let _ = write!(out, "  \"{key}\": {{}}");
    } else {
        let _ = writeln!(out, "  \"{key}\": {{");
        for (idx, (name, value)) in table.iter().enumerate() {
            let sep = if idx + 1 == table.len() { "" } else { "," };
            let _ = writeln!(out, "    {}: {}{sep}", quote(name), f(value));
        }
        out.push_str("  }");
    }
    out.push_str(if last { "\n" } else { ",\n" });
}

/// Canonical text of a session.
pub fn emit_session(s: &Session) -> String {
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"field\": {},", quote(&s.field.to_string()));
    emit_table(&mut out, "objects", &s.objects, false, |c| emit_complex(c));
    emit_table(&mut out, "maps", &s.maps, false, |m| {
        emit_map_like(&m.from, &m.to, m.map.nonzero_components())
    });
    emit_table(&mut out, "homotopies", &s.homotopies, false, |h| {
        emit_map_like(&h.from, &h.to, h.homotopy.nonzero_components())
    });
    emit_table(&mut out, "roofs", &s.roofs, true, |r| {
        format!(
            "{{\"denom\": {}, \"numer\": {}}}",
            quote(&r.denom),
            quote(&r.numer)
        )
    });
    out.push_str("}\n");
    out
}
