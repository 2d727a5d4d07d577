//! Command-line front end. One verb per library capability; JSON documents
//! in, JSON or DOT out. Exit codes: 0 success, 1 violated precondition
//! (named on stderr), 2 malformed input or usage.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::amalgamation::{amalgamate, check_amalgamation_base, classify_points};
use crate::coinitial::{refine, resolving_refinement, spiral_cover};
use crate::error::{Error, Result};
use crate::io;
use crate::limit::{nondensity_check, Family, FamilySpec, Session, Thread};
use crate::morphism::{enumerate_morphisms, Morphism, MorphismClass, MorphismQuery};
use crate::spiral::{
    spiral_amalgamate, spiral_jpp_realized, spiral_map, Spiral, SpiralMapSpec, SpiralRealization,
};
use crate::structure::{product, pullback, Direction, ElementId, FinStructure};

const USAGE: &str = "usage: fraisse <verb> [args]
verbs:
  validate S.json                         surjectivity report
  epi B.json A.json [--mode M] [--cap K]  enumerate maps B -> A
  iso B.json A.json [--cap K]             enumerate isomorphisms
  product S.json T.json                   product with projections
  pullback A.json B.json C.json phi1.json phi2.json
  classify A.json                         outgoing/incoming roles
  base-check A.json                       amalgamation hypotheses
  amalgamate A.json B.json C.json phi1.json phi2.json
  refine A.json                           4m-copy refinement
  cover A.json                            spiral cover (single relation)
  resolve A.json --relation I --target E  resolving refinement
  spiral map --n N,X,Y --m N,X,Y (--anchor A,B | --left C | --right D)
  spiral jpp K.json L.json                joint projection of spiral lists
  spiral ap L.json M.json K.json f1.json f2.json
  spiral as-structure S.json [--name NAME]
  limit build --family F [--m M] --cap N [--tasks K] [--seed FILE]
  limit orbit --session FILE --thread JSON --relation I [--direction D]
  limit profile --session FILE
  limit nondense --max-size N
  export S.json [--format dot|json]
common: --out FILE writes atomically instead of printing";

struct Parsed {
    positional: Vec<String>,
    flags: BTreeMap<String, String>,
}

fn parse_flags(args: &[String]) -> Result<Parsed> {
    let mut positional = Vec::new();
    let mut flags = BTreeMap::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if let Some(name) = a.strip_prefix("--") {
            let value = it
                .next()
                .ok_or_else(|| Error::structural(format!("flag --{name} needs a value")))?;
            flags.insert(name.to_string(), value.clone());
        } else {
            positional.push(a.clone());
        }
    }
    Ok(Parsed { positional, flags })
}

impl Parsed {
    fn positional(&self, n: usize, what: &str) -> Result<&str> {
        self.positional
            .get(n)
            .map(|s| s.as_str())
            .ok_or_else(|| Error::structural(format!("missing argument: {what}")))
    }

    fn flag(&self, name: &str) -> Option<&str> {
        self.flags.get(name).map(|s| s.as_str())
    }

    fn required(&self, name: &str) -> Result<&str> {
        self.flag(name)
            .ok_or_else(|| Error::structural(format!("missing required flag --{name}")))
    }

    fn usize_flag(&self, name: &str, default: usize) -> Result<usize> {
        match self.flag(name) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::structural(format!("flag --{name}: '{v}' is not a number"))),
        }
    }
}

fn load_structure(path: &str) -> Result<Arc<FinStructure>> {
    let text = io::read_to_string(Path::new(path))?;
    let doc: io::StructureDoc = io::from_json_str(&text)?;
    Ok(Arc::new(io::doc_to_structure(&doc)?))
}

fn load_morphism(
    path: &str,
    source: &Arc<FinStructure>,
    target: &Arc<FinStructure>,
) -> Result<Morphism> {
    let text = io::read_to_string(Path::new(path))?;
    let doc: io::MorphismDoc = io::from_json_str(&text)?;
    io::doc_to_morphism(&doc, source, target)
}

fn load_spirals(path: &str, name: &str) -> Result<SpiralRealization> {
    let text = io::read_to_string(Path::new(path))?;
    let docs: Vec<io::SpiralDoc> = io::from_json_str(&text)?;
    let spirals = io::docs_to_spiral_structure(&docs)?;
    Ok(SpiralRealization::from_spirals(name, &spirals))
}

fn parse_triple(s: &str, what: &str) -> Result<Spiral> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::structural(format!("{what}: expected n,x,y but got '{s}'")));
    }
    let nums: Vec<usize> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::structural(format!("{what}: '{p}' is not a number")))
        })
        .collect::<Result<_>>()?;
    Spiral::new(nums[0], nums[1], nums[2])
}

fn parse_pair(s: &str, what: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::structural(format!("{what}: expected a,b but got '{s}'")));
    }
    let a = parts[0].trim().parse().map_err(|_| Error::structural(format!("{what}: bad number")))?;
    let b = parts[1].trim().parse().map_err(|_| Error::structural(format!("{what}: bad number")))?;
    Ok((a, b))
}

/// Print to stdout, treating a closed pipe downstream as success.
fn print_out(content: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().write_all(content.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn emit(parsed: &Parsed, content: String) -> Result<()> {
    match parsed.flag("out") {
        Some(path) => io::write_atomic(&PathBuf::from(path), &content),
        None => print_out(&content),
    }
}

/// Parse a verb and run it. Returns the process exit code.
pub fn run(args: &[String]) -> i32 {
    match dispatch(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fraisse: {e}");
            match e {
                Error::Precondition(_) => 1,
                _ => 2,
            }
        }
    }
}

fn dispatch(args: &[String]) -> Result<()> {
    let Some(verb) = args.first().map(|s| s.as_str()) else {
        return Err(Error::structural(format!("no verb given\n{USAGE}")));
    };
    // Unknown verbs are rejected before any file is read.
    match verb {
        "validate" | "epi" | "iso" | "product" | "pullback" | "classify" | "base-check"
        | "amalgamate" | "refine" | "cover" | "resolve" | "spiral" | "limit" | "export"
        | "help" | "--help" => {}
        other => return Err(Error::structural(format!("unknown verb '{other}'\n{USAGE}"))),
    }
    let rest = &args[1..];
    match verb {
        "help" | "--help" => print_out(&format!("{USAGE}\n")),
        "validate" => {
            let p = parse_flags(rest)?;
            let s = load_structure(p.positional(0, "structure file")?)?;
            emit(&p, io::to_json_string(&io::validation_to_doc(&s.validate()))?)
        }
        "epi" | "iso" => {
            let p = parse_flags(rest)?;
            let b = load_structure(p.positional(0, "source structure file")?)?;
            let a = load_structure(p.positional(1, "target structure file")?)?;
            let mode = if verb == "iso" {
                MorphismClass::Isomorphism
            } else {
                match p.flag("mode").unwrap_or("epimorphism") {
                    "preserving" => MorphismClass::Preserving,
                    "epimorphism" => MorphismClass::Epimorphism,
                    "isomorphism" => MorphismClass::Isomorphism,
                    other => {
                        return Err(Error::structural(format!("unknown mode '{other}'")))
                    }
                }
            };
            let cap = p.usize_flag("cap", 0)?;
            let found = enumerate_morphisms(&b, &a, MorphismQuery { mode, cap })?;
            emit(&p, io::to_json_string(&io::enumeration_to_doc(&found))?)
        }
        "product" => {
            let p = parse_flags(rest)?;
            let s = load_structure(p.positional(0, "first factor file")?)?;
            let t = load_structure(p.positional(1, "second factor file")?)?;
            let (prod, pi1, pi2) = product(&s, &t)?;
            let doc = serde_json::json!({
                "structure": io::structure_to_doc(&prod),
                "to_first": io::morphism_to_doc(&pi1),
                "to_second": io::morphism_to_doc(&pi2),
            });
            emit(&p, format!("{}\n", serde_json::to_string_pretty(&doc)?))
        }
        "pullback" => {
            let p = parse_flags(rest)?;
            let a = load_structure(p.positional(0, "target structure file")?)?;
            let b = load_structure(p.positional(1, "first source file")?)?;
            let c = load_structure(p.positional(2, "second source file")?)?;
            let phi1 = load_morphism(p.positional(3, "first morphism file")?, &b, &a)?;
            let phi2 = load_morphism(p.positional(4, "second morphism file")?, &c, &a)?;
            let (d0, pi1, pi2) = pullback(&phi1, &phi2)?;
            let doc = serde_json::json!({
                "structure": io::structure_to_doc(&d0),
                "to_first": io::morphism_to_doc(&pi1),
                "to_second": io::morphism_to_doc(&pi2),
            });
            emit(&p, format!("{}\n", serde_json::to_string_pretty(&doc)?))
        }
        "classify" => {
            let p = parse_flags(rest)?;
            let a = load_structure(p.positional(0, "structure file")?)?;
            let roles = classify_points(&a)?;
            emit(&p, io::to_json_string(&io::roles_to_doc(&roles))?)
        }
        "base-check" => {
            let p = parse_flags(rest)?;
            let a = load_structure(p.positional(0, "structure file")?)?;
            let report = check_amalgamation_base(&a)?;
            emit(&p, io::to_json_string(&io::base_check_to_doc(&report))?)
        }
        "amalgamate" => {
            let p = parse_flags(rest)?;
            let a = load_structure(p.positional(0, "base structure file")?)?;
            let b = load_structure(p.positional(1, "first source file")?)?;
            let c = load_structure(p.positional(2, "second source file")?)?;
            let phi1 = load_morphism(p.positional(3, "first morphism file")?, &b, &a)?;
            let phi2 = load_morphism(p.positional(4, "second morphism file")?, &c, &a)?;
            let result = amalgamate(&phi1, &phi2)?;
            emit(&p, io::to_json_string(&io::amalgam_to_doc(&result))?)
        }
        "refine" => {
            let p = parse_flags(rest)?;
            let a = load_structure(p.positional(0, "structure file")?)?;
            let result = refine(&a)?;
            emit(&p, io::to_json_string(&io::refine_to_doc(&result))?)
        }
        "cover" => {
            let p = parse_flags(rest)?;
            let a = load_structure(p.positional(0, "structure file")?)?;
            let cover = spiral_cover(&a)?;
            emit(&p, io::to_json_string(&io::cover_to_doc(&cover))?)
        }
        "resolve" => {
            let p = parse_flags(rest)?;
            let a = load_structure(p.positional(0, "structure file")?)?;
            let relation = p.usize_flag("relation", 1)?;
            let target = ElementId::new(p.required("target")?)?;
            let resolution = resolving_refinement(&a, relation, &target)?;
            emit(&p, io::to_json_string(&io::resolution_to_doc(&resolution))?)
        }
        "spiral" => spiral_verb(rest),
        "limit" => limit_verb(rest),
        "export" => {
            let p = parse_flags(rest)?;
            let s = load_structure(p.positional(0, "structure file")?)?;
            match p.flag("format").unwrap_or("dot") {
                "json" => emit(&p, io::to_json_string(&io::structure_to_doc(&s))?),
                "dot" => {
                    // Spiral structures get their nodes marked.
                    let marks = SpiralRealization::from_structure(&s)
                        .map(|r| {
                            let mut marks = Vec::new();
                            for (k, c) in r.spirals().components().iter().enumerate() {
                                let x = r.element(k, c.x()) as usize;
                                let y = r.element(k, c.y()) as usize;
                                marks.push((s.element(x).to_string(), "x".to_string()));
                                marks.push((s.element(y).to_string(), "y".to_string()));
                            }
                            marks
                        })
                        .unwrap_or_default();
                    emit(&p, io::structure_to_dot(&s, &marks))
                }
                other => Err(Error::structural(format!("unknown format '{other}'"))),
            }
        }
        _ => unreachable!("verb list checked above"),
    }
}

fn spiral_verb(args: &[String]) -> Result<()> {
    let Some(sub) = args.first().map(|s| s.as_str()) else {
        return Err(Error::structural("spiral: expected map|jpp|ap|as-structure".to_string()));
    };
    let rest = &args[1..];
    match sub {
        "map" => {
            let p = parse_flags(rest)?;
            let n = parse_triple(p.required("n")?, "--n")?;
            let m = parse_triple(p.required("m")?, "--m")?;
            let spec = match (p.flag("anchor"), p.flag("left"), p.flag("right")) {
                (Some(a), None, None) => {
                    let (a, b) = parse_pair(a, "--anchor")?;
                    SpiralMapSpec::OntoFull { a, b }
                }
                (None, Some(c), None) => SpiralMapSpec::OntoLeft {
                    c: c.parse().map_err(|_| Error::structural("--left: bad number"))?,
                },
                (None, None, Some(d)) => SpiralMapSpec::OntoRight {
                    d: d.parse().map_err(|_| Error::structural("--right: bad number"))?,
                },
                _ => {
                    return Err(Error::structural(
                        "spiral map: give exactly one of --anchor a,b | --left c | --right d"
                            .to_string(),
                    ))
                }
            };
            let morphism = spiral_map(&n, &m, &spec)?;
            emit(&p, io::to_json_string(&io::morphism_to_doc(&morphism))?)
        }
        "jpp" => {
            let p = parse_flags(rest)?;
            let k = load_spirals(p.positional(0, "first spiral list file")?, "K")?;
            let l = load_spirals(p.positional(1, "second spiral list file")?, "L")?;
            let jpp = spiral_jpp_realized(&k, &l)?;
            let doc = serde_json::json!({
                "n": io::spiral_structure_to_docs(jpp.n.spirals()),
                "structure": io::structure_to_doc(jpp.n.structure()),
                "to_first": io::morphism_to_doc(&jpp.to_first),
                "to_second": io::morphism_to_doc(&jpp.to_second),
            });
            emit(&p, format!("{}\n", serde_json::to_string_pretty(&doc)?))
        }
        "ap" => {
            let p = parse_flags(rest)?;
            let l = load_spirals(p.positional(0, "L spiral list file")?, "L")?;
            let m = load_spirals(p.positional(1, "M spiral list file")?, "M")?;
            let k = load_spirals(p.positional(2, "K spiral list file")?, "K")?;
            let f1 = load_morphism(p.positional(3, "f1 file")?, l.structure(), k.structure())?;
            let f2 = load_morphism(p.positional(4, "f2 file")?, m.structure(), k.structure())?;
            let ap = spiral_amalgamate(&f1, &f2)?;
            let doc = serde_json::json!({
                "n": io::spiral_structure_to_docs(ap.n.spirals()),
                "structure": io::structure_to_doc(ap.n.structure()),
                "f3": io::morphism_to_doc(&ap.f3),
                "f4": io::morphism_to_doc(&ap.f4),
            });
            emit(&p, format!("{}\n", serde_json::to_string_pretty(&doc)?))
        }
        "as-structure" => {
            let p = parse_flags(rest)?;
            let name = p.flag("name").unwrap_or("spirals").to_string();
            let r = load_spirals(p.positional(0, "spiral list file")?, &name)?;
            emit(&p, io::to_json_string(&io::structure_to_doc(r.structure()))?)
        }
        other => Err(Error::structural(format!("spiral: unknown subcommand '{other}'"))),
    }
}

fn default_seed(family: Family) -> Result<Arc<FinStructure>> {
    match family {
        Family::Spirals => {
            let s = crate::spiral::SpiralStructure::single(Spiral::new(4, 2, 3)?);
            Ok(Arc::new(s.to_structure("seed")))
        }
        Family::Bijections => Ok(Arc::new(FinStructure::from_names(
            "seed",
            &["p0"],
            &[&[("p0", "p0")]],
        )?)),
        Family::SurjectiveTuples { m } => {
            let carrier = vec![ElementId::new("a")?];
            let relations = vec![vec![(0u32, 0u32)]; m];
            let pt = Arc::new(FinStructure::from_parts("pt", carrier, relations)?);
            Ok(refine(&pt)?.b)
        }
    }
}

fn limit_verb(args: &[String]) -> Result<()> {
    let Some(sub) = args.first().map(|s| s.as_str()) else {
        return Err(Error::structural("limit: expected build|orbit|profile|nondense".to_string()));
    };
    let rest = &args[1..];
    match sub {
        "build" => {
            let p = parse_flags(rest)?;
            let family = match p.required("family")? {
                "spirals" => Family::Spirals,
                "bijections" => Family::Bijections,
                "tuples" | "surjective_m_tuples" => {
                    Family::SurjectiveTuples { m: p.usize_flag("m", 1)? }
                }
                other => return Err(Error::structural(format!("unknown family '{other}'"))),
            };
            let size_cap = p.usize_flag("cap", 4096)?;
            let seed = match p.flag("seed") {
                Some(path) => load_structure(path)?,
                None => default_seed(family)?,
            };
            let mut session = Session::new(FamilySpec { family, size_cap }, seed)?;
            let tasks = p.usize_flag("tasks", 0)?;
            session.advance_generated(tasks)?;
            emit(&p, io::to_json_string(&io::session_to_doc(&session))?)
        }
        "orbit" => {
            let p = parse_flags(rest)?;
            let session = load_session(p.required("session")?)?;
            let entries: Vec<String> = io::from_json_str(p.required("thread")?)?;
            let thread = Thread {
                entries: entries
                    .into_iter()
                    .map(ElementId::new)
                    .collect::<Result<Vec<_>>>()?,
            };
            let relation = p.usize_flag("relation", 1)?;
            let direction = match p.flag("direction").unwrap_or("forward") {
                "forward" => Direction::Forward,
                "inverse" | "backward" => Direction::Inverse,
                other => return Err(Error::structural(format!("unknown direction '{other}'"))),
            };
            let threads = session.simulate_step(&thread, relation, direction)?;
            emit(&p, io::to_json_string(&io::threads_to_doc(&threads))?)
        }
        "profile" => {
            let p = parse_flags(rest)?;
            let session = load_session(p.required("session")?)?;
            emit(&p, io::to_json_string(&io::profile_to_doc(&session.ambiguity_profile()))?)
        }
        "nondense" => {
            let p = parse_flags(rest)?;
            let max_size = p.usize_flag("max-size", 7)?;
            let report = nondensity_check(max_size)?;
            emit(&p, io::to_json_string(&io::nondense_to_doc(&report))?)
        }
        other => Err(Error::structural(format!("limit: unknown subcommand '{other}'"))),
    }
}

fn load_session(path: &str) -> Result<Session> {
    let text = io::read_to_string(Path::new(path))?;
    let doc: io::SessionDoc = io::from_json_str(&text)?;
    io::doc_to_session(&doc)
}
