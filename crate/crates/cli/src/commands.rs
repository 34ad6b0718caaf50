//! One command per invocation. Verdicts are printed as small JSON reports;
//! constructed objects are printed as session fragments that parse back.

use std::sync::Arc;

use clap::Subcommand;
use conecalc::chainmap::find_homotopy;
use conecalc::cone::{check_les_exact, cone_triangle, mapping_cone, rotate_triangle};
use conecalc::roof::{
    compose_roofs, flip_cospan, lift_map_to_roof, verify_roof_equivalence, Cospan,
    RoofEquivalenceWitness,
};
use conecalc::CochainComplex;

use crate::error::CliError;
use crate::session::{emit_matrix, emit_session, NamedMap, NamedRoof, Session, SessionBuilder};

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// Parse and validate the session; report table sizes.
    Validate,
    /// Cohomology dimensions and representative cocycles of an object.
    Cohomology { object: String },
    /// The shifted complex `X[n]` as a session fragment.
    Shift {
        object: String,
        #[arg(allow_hyphen_values = true)]
        n: i64,
    },
    /// The mapping cone of a map with its inclusion and projection.
    Cone { map: String },
    /// Exactness of the long exact sequence of the cone triangle and its rotation.
    Les { map: String },
    /// Search for a homotopy `k` with `g - f = dk + kd`.
    Homotopic { f: String, g: String },
    /// Whether a map is a quasi-isomorphism.
    Qis { map: String },
    /// Complete the cospan `L -alpha-> K' <-beta- M` to a homotopy-commutative square.
    Flip { alpha: String, beta: String },
    /// Compose two roofs (`second ∘ first`).
    Compose { first: String, second: String },
    /// Verify that two roofs are equivalent via a witness.
    RoofEquiv {
        first: String,
        second: String,
        /// apex3 denom3 numer3 up down
        #[arg(long, num_args = 5, value_names = ["APEX3", "DENOM3", "NUMER3", "UP", "DOWN"], required = true)]
        witness: Vec<String>,
    },
    /// The roof `(id, f)` representing a map.
    Lift { map: String },
}

/// Text for standard output and the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn verdict(stdout: String, ok: bool) -> Self {
        Outcome {
            stdout,
            code: if ok { 0 } else { 1 },
        }
    }

    fn success(stdout: String) -> Self {
        Outcome { stdout, code: 0 }
    }
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

/// A flat JSON object with keys in insertion order.
struct Report(Vec<(String, String)>);

impl Report {
    fn new(command: &str) -> Self {
        Report(vec![("command".into(), quote(command))])
    }

    fn str(mut self, key: &str, v: &str) -> Self {
        self.0.push((key.into(), quote(v)));
        self
    }

    fn raw(mut self, key: &str, v: impl ToString) -> Self {
        self.0.push((key.into(), v.to_string()));
        self
    }

    fn finish(self) -> String {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{}: {v}", quote(k))).collect();
        format!("{{{}}}\n", parts.join(", "))
    }
}

fn object<'a>(s: &'a Session, name: &str) -> Result<&'a Arc<CochainComplex>, CliError> {
    s.object(name).ok_or_else(|| CliError::UnknownName {
        kind: "object",
        name: name.to_string(),
    })
}

fn map<'a>(s: &'a Session, name: &str) -> Result<&'a NamedMap, CliError> {
    s.map(name).ok_or_else(|| CliError::UnknownName {
        kind: "map",
        name: name.to_string(),
    })
}

fn roof<'a>(s: &'a Session, name: &str) -> Result<&'a NamedRoof, CliError> {
    s.roof(name).ok_or_else(|| CliError::UnknownName {
        kind: "roof",
        name: name.to_string(),
    })
}

fn add_named_map(b: &mut SessionBuilder, name: &str, m: &NamedMap) -> String {
    b.map(name, &m.from, &m.to, &m.map)
}

pub fn run_command(s: &Session, command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Validate => Ok(Outcome::success(
            Report::new("validate")
                .raw("valid", true)
                .str("field", &s.field.to_string())
                .raw("objects", s.objects.len())
                .raw("maps", s.maps.len())
                .raw("homotopies", s.homotopies.len())
                .raw("roofs", s.roofs.len())
                .finish(),
        )),

        Command::Cohomology { object: name } => {
            let c = object(s, name)?;
            let mut degrees = Vec::new();
            for i in c.lo()..=c.hi() {
                let h = c.cohomology(i)?;
                degrees.push(format!(
                    "\"{i}\": {{\"dim\": {}, \"representatives\": {}}}",
                    h.dim,
                    emit_matrix(&h.representatives())
                ));
            }
            let betti = format!("{{{}}}", degrees.join(", "));
            Ok(Outcome::success(
                Report::new("cohomology")
                    .str("object", name)
                    .raw("euler_characteristic", c.euler_characteristic())
                    .raw("cohomology", betti)
                    .finish(),
            ))
        }

        Command::Shift { object: name, n } => {
            let c = object(s, name)?;
            let mut b = SessionBuilder::new(s.field);
            b.object(&format!("{name}[{n}]"), &Arc::new(c.shift(*n)));
            Ok(Outcome::success(emit_session(&b.finish())))
        }

        Command::Cone { map: name } => {
            let f = map(s, name)?;
            let cone = mapping_cone(&f.map)?;
            let mut b = SessionBuilder::new(s.field);
            add_named_map(&mut b, name, f);
            let mc = format!("MC({name})");
            b.map("incl", &f.to, &mc, &cone.incl);
            b.map("proj", &mc, &format!("{}[1]", f.from), &cone.proj);
            Ok(Outcome::success(emit_session(&b.finish())))
        }

        Command::Les { map: name } => {
            let f = map(s, name)?;
            let t = cone_triangle(&f.map)?;
            let exact = check_les_exact(&t)?;
            let rotated = check_les_exact(&rotate_triangle(&t)?)?;
            Ok(Outcome::verdict(
                Report::new("les")
                    .str("map", name)
                    .raw("exact", exact)
                    .raw("rotated_exact", rotated)
                    .finish(),
                exact && rotated,
            ))
        }

        Command::Homotopic { f, g } => {
            let (nf, ng) = (map(s, f)?, map(s, g)?);
            match find_homotopy(&nf.map, &ng.map)? {
                Some(k) => {
                    let mut b = SessionBuilder::new(s.field);
                    b.homotopy("k", &nf.from, &nf.to, &k);
                    Ok(Outcome::success(emit_session(&b.finish())))
                }
                None => Ok(Outcome::verdict("none\n".to_string(), false)),
            }
        }

        Command::Qis { map: name } => {
            let f = map(s, name)?;
            let q = f.map.is_quasi_iso()?;
            Ok(Outcome::verdict(
                Report::new("qis").str("map", name).raw("quasi_iso", q).finish(),
                q,
            ))
        }

        Command::Flip { alpha, beta } => {
            let (a, bt) = (map(s, alpha)?, map(s, beta)?);
            let flip = flip_cospan(&Cospan::new(a.map.clone(), bt.map.clone())?)?;
            let mut b = SessionBuilder::new(s.field);
            add_named_map(&mut b, alpha, a);
            if beta != alpha {
                add_named_map(&mut b, beta, bt);
            }
            b.object("K", &flip.k_complex);
            b.map("gamma2", "K", &a.from, &flip.gamma2);
            b.map("gamma1", "K", &bt.from, &flip.gamma1);
            b.homotopy("h", "K", &bt.to, &flip.witness);
            Ok(Outcome::success(emit_session(&b.finish())))
        }

        Command::Compose { first, second } => {
            let (r1, r2) = (roof(s, first)?, roof(s, second)?);
            let r = compose_roofs(&r1.roof, &r2.roof)?;
            let mut b = SessionBuilder::new(s.field);
            let source = object_name(s, r.source());
            let target = object_name(s, r.target());
            let denom = b.map("composite_denom", "apex", &source, r.denom());
            let numer = b.map("composite_numer", "apex", &target, r.numer());
            b.roof("composite", &denom, &numer, &r);
            Ok(Outcome::success(emit_session(&b.finish())))
        }

        Command::RoofEquiv {
            first,
            second,
            witness,
        } => {
            let (r1, r2) = (roof(s, first)?, roof(s, second)?);
            let [apex3, denom3, numer3, up, down] = <[String; 5]>::try_from(witness.clone())
                .map_err(|_| CliError::Usage("--witness takes exactly five names".into()))?;
            let w = RoofEquivalenceWitness {
                apex3: object(s, &apex3)?.clone(),
                denom3: map(s, &denom3)?.map.clone(),
                numer3: map(s, &numer3)?.map.clone(),
                up: map(s, &up)?.map.clone(),
                down: map(s, &down)?.map.clone(),
            };
            let ok = verify_roof_equivalence(&r1.roof, &r2.roof, &w)?;
            Ok(Outcome::verdict(
                Report::new("roof-equiv")
                    .str("first", first)
                    .str("second", second)
                    .raw("equivalent", ok)
                    .finish(),
                ok,
            ))
        }

        Command::Lift { map: name } => {
            let f = map(s, name)?;
            let r = lift_map_to_roof(&f.map)?;
            let mut b = SessionBuilder::new(s.field);
            let id = b.map("id", &f.from, &f.from, r.denom());
            let numer = add_named_map(&mut b, name, f);
            b.roof("lift", &id, &numer, &r);
            Ok(Outcome::success(emit_session(&b.finish())))
        }
    }
}

/// The declared name of `c` in `s`, or a placeholder for complexes built on the fly.
fn object_name(s: &Session, c: &Arc<CochainComplex>) -> String {
    s.objects
        .iter()
        .find(|(_, o)| Arc::ptr_eq(o, c) || **o == **c)
        .map(|(n, _)| n.clone())
        .unwrap_or_else(|| "X".to_string())
}
