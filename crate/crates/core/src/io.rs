//! JSON documents for every value the CLI reads or writes, DOT export,
//! and atomic file output. Document fields are kept in sorted or
//! declaration order so identical values serialize byte-identically.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::amalgamation::{AmalgamResult, BaseCheckReport, PointRole, Role};
use crate::coinitial::{RefinementResult, Resolution, SpiralCover};
use crate::error::{Error, Result};
use crate::limit::{
    AmbiguityProfile, Family, FamilySpec, NondensityReport, Session, Stage, Task, TaskKind,
    TaskStatus, Thread, Witness,
};
use crate::morphism::{Enumeration, Morphism};
use crate::spiral::{Spiral, SpiralStructure};
use crate::structure::{ElementId, FinStructure, ValidationReport};

// ---------------------------------------------------------------- structures

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructureDoc {
    pub name: String,
    pub arity: usize,
    pub carrier: Vec<String>,
    pub relations: Vec<Vec<(String, String)>>,
}

pub fn structure_to_doc(s: &FinStructure) -> StructureDoc {
    StructureDoc {
        name: s.name().to_string(),
        arity: s.arity(),
        carrier: s.carrier().iter().map(|e| e.to_string()).collect(),
        relations: s
            .relations()
            .iter()
            .map(|rel| {
                rel.edges()
                    .iter()
                    .map(|&(u, v)| {
                        (s.element(u as usize).to_string(), s.element(v as usize).to_string())
                    })
                    .collect()
            })
            .collect(),
    }
}

pub fn doc_to_structure(doc: &StructureDoc) -> Result<FinStructure> {
    if doc.arity != doc.relations.len() {
        return Err(Error::structural(format!(
            "structure '{}': arity {} but {} relation lists",
            doc.name,
            doc.arity,
            doc.relations.len()
        )));
    }
    let carrier = doc
        .carrier
        .iter()
        .map(|n| ElementId::new(n.clone()))
        .collect::<Result<Vec<_>>>()?;
    let find = |name: &str| -> Result<u32> {
        doc.carrier
            .iter()
            .position(|c| c == name)
            .map(|i| i as u32)
            .ok_or_else(|| {
                Error::structural(format!("structure '{}': unknown element '{name}'", doc.name))
            })
    };
    let relations = doc
        .relations
        .iter()
        .map(|edges| {
            edges
                .iter()
                .map(|(u, v)| Ok((find(u)?, find(v)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    FinStructure::from_parts(doc.name.clone(), carrier, relations)
}

// ----------------------------------------------------------------- morphisms

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MorphismDoc {
    pub source: String,
    pub target: String,
    pub map: BTreeMap<String, String>,
}

pub fn morphism_to_doc(m: &Morphism) -> MorphismDoc {
    MorphismDoc {
        source: m.source().name().to_string(),
        target: m.target().name().to_string(),
        map: m
            .named_pairs()
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
    }
}

/// Bind a morphism document against its two structures, checking that the
/// document names them.
pub fn doc_to_morphism(
    doc: &MorphismDoc,
    source: &Arc<FinStructure>,
    target: &Arc<FinStructure>,
) -> Result<Morphism> {
    if doc.source != source.name() {
        return Err(Error::structural(format!(
            "morphism names source '{}' but was given '{}'",
            doc.source,
            source.name()
        )));
    }
    if doc.target != target.name() {
        return Err(Error::structural(format!(
            "morphism names target '{}' but was given '{}'",
            doc.target,
            target.name()
        )));
    }
    let pairs: Vec<(String, String)> =
        doc.map.iter().map(|(a, b)| (a.clone(), b.clone())).collect();
    Morphism::from_named_pairs(Arc::clone(source), Arc::clone(target), &pairs)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlagsDoc {
    pub preserving: bool,
    pub epimorphism: bool,
    pub isomorphism: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnumerationDoc {
    pub total: u64,
    pub returned: usize,
    pub morphisms: Vec<MorphismDoc>,
}

pub fn enumeration_to_doc(e: &Enumeration) -> EnumerationDoc {
    EnumerationDoc {
        total: e.total,
        returned: e.morphisms.len(),
        morphisms: e.morphisms.iter().map(morphism_to_doc).collect(),
    }
}

// ------------------------------------------------------------------- spirals

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpiralDoc {
    pub n: usize,
    pub x: usize,
    pub y: usize,
}

pub fn doc_to_spiral(doc: &SpiralDoc) -> Result<Spiral> {
    Spiral::new(doc.n, doc.x, doc.y)
}

pub fn spiral_to_doc(s: &Spiral) -> SpiralDoc {
    SpiralDoc { n: s.n(), x: s.x(), y: s.y() }
}

pub fn docs_to_spiral_structure(docs: &[SpiralDoc]) -> Result<SpiralStructure> {
    SpiralStructure::new(docs.iter().map(doc_to_spiral).collect::<Result<Vec<_>>>()?)
}

pub fn spiral_structure_to_docs(s: &SpiralStructure) -> Vec<SpiralDoc> {
    s.components().iter().map(spiral_to_doc).collect()
}

// ------------------------------------------------------------------- reports

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelationCheckDoc {
    pub relation: usize,
    pub no_successor: Vec<String>,
    pub no_predecessor: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationDoc {
    pub verdict: String,
    pub relations: Vec<RelationCheckDoc>,
}

pub fn validation_to_doc(r: &ValidationReport) -> ValidationDoc {
    ValidationDoc {
        verdict: if r.is_surjective() { "surjective" } else { "not_surjective" }.to_string(),
        relations: r
            .per_relation
            .iter()
            .enumerate()
            .map(|(i, c)| RelationCheckDoc {
                relation: i + 1,
                no_successor: c.no_successor.iter().map(|e| e.to_string()).collect(),
                no_predecessor: c.no_predecessor.iter().map(|e| e.to_string()).collect(),
            })
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TagRoleDoc {
    pub relation: usize,
    pub direction: String,
    pub role: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointRoleDoc {
    pub element: String,
    pub tags: Vec<TagRoleDoc>,
}

pub fn roles_to_doc(roles: &[PointRole]) -> Vec<PointRoleDoc> {
    roles
        .iter()
        .map(|pr| PointRoleDoc {
            element: pr.element.to_string(),
            tags: pr
                .roles
                .iter()
                .map(|(tag, role)| TagRoleDoc {
                    relation: tag.index,
                    direction: match tag.direction {
                        crate::structure::Direction::Forward => "forward".to_string(),
                        crate::structure::Direction::Inverse => "inverse".to_string(),
                    },
                    role: match role {
                        Role::Outgoing => "outgoing",
                        Role::Incoming => "incoming",
                        Role::Neither => "neither",
                    }
                    .to_string(),
                })
                .collect(),
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BaseCheckDoc {
    pub passes: bool,
    /// Points outgoing for a count of tags different from one.
    pub condition1: Vec<(String, usize)>,
    /// Edges lacking an outgoing tail and incoming head: (relation, tail, head).
    pub condition2: Vec<(usize, String, String)>,
}

pub fn base_check_to_doc(r: &BaseCheckReport) -> BaseCheckDoc {
    BaseCheckDoc {
        passes: r.passes(),
        condition1: r.condition1.iter().map(|(e, c)| (e.to_string(), *c)).collect(),
        condition2: r
            .condition2
            .iter()
            .map(|(r, u, v)| (*r, u.to_string(), v.to_string()))
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceDoc {
    pub d0: StructureDoc,
    pub d_sizes: Vec<usize>,
    pub e_sizes: Vec<usize>,
    pub d_carriers: Vec<Vec<String>>,
    pub e_carriers: Vec<Vec<String>>,
    pub fixpoint_index: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmalgamDoc {
    pub d: StructureDoc,
    pub phi3: MorphismDoc,
    pub phi4: MorphismDoc,
    pub trace: TraceDoc,
}

pub fn amalgam_to_doc(r: &AmalgamResult) -> AmalgamDoc {
    let names = |carriers: &[Vec<ElementId>]| -> Vec<Vec<String>> {
        carriers
            .iter()
            .map(|c| c.iter().map(|e| e.to_string()).collect())
            .collect()
    };
    AmalgamDoc {
        d: structure_to_doc(&r.d),
        phi3: morphism_to_doc(&r.phi3),
        phi4: morphism_to_doc(&r.phi4),
        trace: TraceDoc {
            d0: structure_to_doc(&r.trace.d0),
            d_sizes: r.trace.d_sizes(),
            e_sizes: r.trace.e_sizes(),
            d_carriers: names(&r.trace.d_carriers),
            e_carriers: names(&r.trace.e_carriers),
            fixpoint_index: r.trace.fixpoint_index,
        },
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RefineDoc {
    pub b: StructureDoc,
    pub projection: MorphismDoc,
}

pub fn refine_to_doc(r: &RefinementResult) -> RefineDoc {
    RefineDoc { b: structure_to_doc(&r.b), projection: morphism_to_doc(&r.projection) }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverComponentDoc {
    pub spiral: SpiralDoc,
    pub designated: (usize, usize),
    pub base_edge: (String, String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverDoc {
    pub cover: StructureDoc,
    pub map: MorphismDoc,
    pub components: Vec<CoverComponentDoc>,
}

pub fn cover_to_doc(c: &SpiralCover) -> CoverDoc {
    let b = c.structure();
    let mut components = Vec::new();
    let mut offset = 0usize;
    for comp in &c.components {
        let (p, q) = comp.designated;
        components.push(CoverComponentDoc {
            spiral: spiral_to_doc(&comp.spiral),
            designated: (p, q),
            base_edge: (
                c.map.target().element(c.map.apply(offset + p - 1)).to_string(),
                c.map.target().element(c.map.apply(offset + q - 1)).to_string(),
            ),
        });
        offset += comp.spiral.n();
    }
    CoverDoc { cover: structure_to_doc(b), map: morphism_to_doc(&c.map), components }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResolveDoc {
    pub b: StructureDoc,
    pub projection: MorphismDoc,
    pub resolved: Vec<String>,
    pub residual: Vec<String>,
}

pub fn resolution_to_doc(r: &Resolution) -> ResolveDoc {
    ResolveDoc {
        b: structure_to_doc(&r.b),
        projection: morphism_to_doc(&r.projection),
        resolved: r.resolved.iter().map(|e| e.to_string()).collect(),
        residual: r.residual.iter().map(|e| e.to_string()).collect(),
    }
}

// ------------------------------------------------------------------ sessions

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyDoc {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

pub fn family_to_doc(f: Family) -> FamilyDoc {
    match f {
        Family::SurjectiveTuples { m } => {
            FamilyDoc { kind: "surjective_m_tuples".to_string(), m: Some(m) }
        }
        Family::Spirals => FamilyDoc { kind: "spirals".to_string(), m: None },
        Family::Bijections => FamilyDoc { kind: "bijections".to_string(), m: None },
    }
}

pub fn doc_to_family(doc: &FamilyDoc) -> Result<Family> {
    match doc.kind.as_str() {
        "spirals" => Ok(Family::Spirals),
        "bijections" => Ok(Family::Bijections),
        "surjective_m_tuples" => {
            let m = doc.m.ok_or_else(|| {
                Error::structural("surjective_m_tuples family needs the field m")
            })?;
            if m == 0 {
                return Err(Error::structural("family arity m must be positive"));
            }
            Ok(Family::SurjectiveTuples { m })
        }
        other => Err(Error::structural(format!("unknown family '{other}'"))),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageDoc {
    pub index: usize,
    pub structure: StructureDoc,
    /// Bond from the next stage onto this one; absent on the last stage.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bond: Option<MorphismDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskKindDoc {
    Universality {
        target: StructureDoc,
    },
    Extension {
        phi1_source: StructureDoc,
        target: StructureDoc,
        phi1: BTreeMap<String, String>,
        stage_index: usize,
        stage_epi: BTreeMap<String, String>,
    },
    Resolution {
        stage_index: usize,
        relation: usize,
        element: String,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum TaskStatusDoc {
    Pending,
    Discharged {
        stage_index: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        map: Option<BTreeMap<String, String>>,
        resolved: Vec<String>,
        residual: Vec<String>,
    },
    Parked {
        reason: String,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TaskDoc {
    pub id: usize,
    pub task: TaskKindDoc,
    pub status: TaskStatusDoc,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SessionDoc {
    pub family: FamilyDoc,
    pub size_cap: usize,
    pub stages: Vec<StageDoc>,
    pub tasks: Vec<TaskDoc>,
    pub generator_next_member: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator_pending_extension: Option<usize>,
}

fn map_doc(m: &Morphism) -> BTreeMap<String, String> {
    crate::morphism::morphism_named_map(m)
}

pub fn session_to_doc(s: &Session) -> SessionDoc {
    let stages = s
        .stages()
        .iter()
        .enumerate()
        .map(|(i, stage)| StageDoc {
            index: stage.index,
            structure: structure_to_doc(&stage.structure),
            bond: s.stages().get(i + 1).map(|next| {
                morphism_to_doc(next.bond.as_ref().expect("non-first stages have bonds"))
            }),
        })
        .collect();
    let tasks = s
        .tasks()
        .iter()
        .map(|t| TaskDoc {
            id: t.id,
            task: match &t.kind {
                TaskKind::Universality { target } => {
                    TaskKindDoc::Universality { target: structure_to_doc(target) }
                }
                TaskKind::Extension { phi1, stage_index, stage_epi } => TaskKindDoc::Extension {
                    phi1_source: structure_to_doc(phi1.source()),
                    target: structure_to_doc(phi1.target()),
                    phi1: map_doc(phi1),
                    stage_index: *stage_index,
                    stage_epi: map_doc(stage_epi),
                },
                TaskKind::Resolution { stage_index, relation, element } => {
                    TaskKindDoc::Resolution {
                        stage_index: *stage_index,
                        relation: *relation,
                        element: element.to_string(),
                    }
                }
            },
            status: match &t.status {
                TaskStatus::Pending => TaskStatusDoc::Pending,
                TaskStatus::Discharged(w) => TaskStatusDoc::Discharged {
                    stage_index: w.stage_index,
                    map: w.map.as_ref().map(map_doc),
                    resolved: w.resolved.iter().map(|e| e.to_string()).collect(),
                    residual: w.residual.iter().map(|e| e.to_string()).collect(),
                },
                TaskStatus::Parked { reason } => TaskStatusDoc::Parked { reason: reason.clone() },
            },
        })
        .collect();
    let (generator_next_member, generator_pending_extension) = s.generator_state();
    SessionDoc {
        family: family_to_doc(s.spec().family),
        size_cap: s.spec().size_cap,
        stages,
        tasks,
        generator_next_member,
        generator_pending_extension,
    }
}

fn bind_map(
    map: &BTreeMap<String, String>,
    source: &Arc<FinStructure>,
    target: &Arc<FinStructure>,
) -> Result<Morphism> {
    let pairs: Vec<(String, String)> = map.iter().map(|(a, b)| (a.clone(), b.clone())).collect();
    Morphism::from_named_pairs(Arc::clone(source), Arc::clone(target), &pairs)
}

pub fn doc_to_session(doc: &SessionDoc) -> Result<Session> {
    let family = doc_to_family(&doc.family)?;
    let spec = FamilySpec { family, size_cap: doc.size_cap };

    let structures: Vec<Arc<FinStructure>> = doc
        .stages
        .iter()
        .map(|s| doc_to_structure(&s.structure).map(Arc::new))
        .collect::<Result<_>>()?;
    let mut stages = Vec::with_capacity(doc.stages.len());
    for (i, (stage_doc, structure)) in doc.stages.iter().zip(&structures).enumerate() {
        let bond = if i == 0 {
            None
        } else {
            let prev = &doc.stages[i - 1];
            let bond_doc = prev.bond.as_ref().ok_or_else(|| {
                Error::structural(format!("stage {} is missing its bond", i))
            })?;
            Some(doc_to_morphism(bond_doc, structure, &structures[i - 1])?)
        };
        stages.push(Stage { index: stage_doc.index, structure: Arc::clone(structure), bond });
    }

    let mut tasks = Vec::with_capacity(doc.tasks.len());
    for t in &doc.tasks {
        let kind = match &t.task {
            TaskKindDoc::Universality { target } => {
                TaskKind::Universality { target: Arc::new(doc_to_structure(target)?) }
            }
            TaskKindDoc::Extension { phi1_source, target, phi1, stage_index, stage_epi } => {
                let b = Arc::new(doc_to_structure(phi1_source)?);
                let a = Arc::new(doc_to_structure(target)?);
                let stage = structures.get(*stage_index - 1).ok_or_else(|| {
                    Error::structural(format!("extension names missing stage {stage_index}"))
                })?;
                TaskKind::Extension {
                    phi1: bind_map(phi1, &b, &a)?,
                    stage_index: *stage_index,
                    stage_epi: bind_map(stage_epi, stage, &a)?,
                }
            }
            TaskKindDoc::Resolution { stage_index, relation, element } => TaskKind::Resolution {
                stage_index: *stage_index,
                relation: *relation,
                element: ElementId::new(element.clone())?,
            },
        };
        let status = match &t.status {
            TaskStatusDoc::Pending => TaskStatus::Pending,
            TaskStatusDoc::Discharged { stage_index, map, resolved, residual } => {
                let witness_map = match (map, &kind) {
                    (Some(m), TaskKind::Universality { target }) => {
                        let stage = structures.get(*stage_index - 1).ok_or_else(|| {
                            Error::structural("witness names a missing stage".to_string())
                        })?;
                        Some(bind_map(m, stage, target)?)
                    }
                    (Some(m), TaskKind::Extension { phi1, .. }) => {
                        let stage = structures.get(*stage_index - 1).ok_or_else(|| {
                            Error::structural("witness names a missing stage".to_string())
                        })?;
                        Some(bind_map(m, stage, phi1.source_arc())?)
                    }
                    (Some(_), TaskKind::Resolution { .. }) => {
                        return Err(Error::structural(
                            "resolution witnesses carry no map".to_string(),
                        ))
                    }
                    (None, _) => None,
                };
                TaskStatus::Discharged(Witness {
                    stage_index: *stage_index,
                    map: witness_map,
                    resolved: resolved
                        .iter()
                        .map(|e| ElementId::new(e.clone()))
                        .collect::<Result<_>>()?,
                    residual: residual
                        .iter()
                        .map(|e| ElementId::new(e.clone()))
                        .collect::<Result<_>>()?,
                })
            }
            TaskStatusDoc::Parked { reason } => TaskStatus::Parked { reason: reason.clone() },
        };
        tasks.push(Task { id: t.id, kind, status });
    }

    Session::from_raw(
        spec,
        stages,
        tasks,
        (doc.generator_next_member, doc.generator_pending_extension),
    )
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileDoc {
    pub stages: Vec<(usize, Vec<usize>)>,
    pub fibers: Vec<FiberDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiberDoc {
    pub task_id: usize,
    pub stage_index: usize,
    pub relation: usize,
    pub elements: Vec<String>,
    pub successor_counts: Vec<usize>,
}

pub fn profile_to_doc(p: &AmbiguityProfile) -> ProfileDoc {
    ProfileDoc {
        stages: p
            .stages
            .iter()
            .map(|s| (s.stage_index, s.max_out_degree.clone()))
            .collect(),
        fibers: p
            .fibers
            .iter()
            .map(|f| FiberDoc {
                task_id: f.task_id,
                stage_index: f.stage_index,
                relation: f.relation,
                elements: f.elements.iter().map(|e| e.to_string()).collect(),
                successor_counts: f.successor_counts.clone(),
            })
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThreadsDoc {
    pub threads: Vec<Vec<String>>,
}

pub fn threads_to_doc(threads: &[Thread]) -> ThreadsDoc {
    ThreadsDoc {
        threads: threads
            .iter()
            .map(|t| t.entries.iter().map(|e| e.to_string()).collect())
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NondenseDoc {
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(Vec<u32>, Vec<u32>)>,
    /// Per size: (size, permutations, two-block partitions per permutation).
    pub log: Vec<(usize, u64, u64)>,
}

pub fn nondense_to_doc(r: &NondensityReport) -> NondenseDoc {
    NondenseDoc {
        verdict: if r.unrealizable { "unrealizable" } else { "realized" }.to_string(),
        witness: r.witness.clone(),
        log: r.log.clone(),
    }
}

// ----------------------------------------------------------------------- dot

const PALETTE: [&str; 8] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
];

/// Render a structure as one DOT digraph: edges labeled `s1..sm` in
/// distinct colors. Nodes named in `marks` are drawn with a double circle
/// (spiral left and right nodes).
pub fn structure_to_dot(s: &FinStructure, marks: &[(String, String)]) -> String {
    let mut out = String::new();
    out.push_str(&format!("digraph \"{}\" {{\n", escape(s.name())));
    out.push_str("  rankdir=LR;\n");
    for e in s.carrier() {
        let mark = marks.iter().find(|(name, _)| name == e.as_str());
        match mark {
            Some((_, label)) => out.push_str(&format!(
                "  \"{}\" [shape=doublecircle, xlabel=\"{}\"];\n",
                escape(e.as_str()),
                escape(label)
            )),
            None => out.push_str(&format!("  \"{}\";\n", escape(e.as_str()))),
        }
    }
    for (r, rel) in s.relations().iter().enumerate() {
        let color = PALETTE[r % PALETTE.len()];
        for &(u, v) in rel.edges() {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"s{}\", color=\"{}\"];\n",
                escape(s.element(u as usize).as_str()),
                escape(s.element(v as usize).as_str()),
                r + 1,
                color
            ));
        }
    }
    out.push_str("}\n");
    out
}

/// DOT for a spiral structure realization with its nodes marked.
pub fn spiral_structure_to_dot(s: &SpiralStructure, name: &str) -> String {
    let structure = s.to_structure(name);
    let mut marks = Vec::new();
    for (k, c) in s.components().iter().enumerate() {
        marks.push((format!("{}:{}", k + 1, c.x()), "x".to_string()));
        marks.push((format!("{}:{}", k + 1, c.y()), "y".to_string()));
    }
    structure_to_dot(&structure, &marks)
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

// -------------------------------------------------------------------- output

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json_str<'a, T: Deserialize<'a>>(s: &'a str) -> Result<T> {
    Ok(serde_json::from_str(s)?)
}

/// Write through a temporary file and rename, so readers never observe a
/// partial document.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}tmp",
        path.extension().map(|e| format!("{}.", e.to_string_lossy())).unwrap_or_default()
    ));
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_to_string(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}
