//! Finite approximations of a projective Fraisse limit: a session holds an
//! inverse sequence `D_1 <- D_2 <- ...` of family members with epimorphic
//! bonds, and discharges universality, extension, and resolution tasks by
//! appending stages. Threads through the sequence are finite-precision
//! points of the limit; stepping them through a relation simulates the
//! limit dynamics.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::amalgamation::{amalgamate, check_amalgamation_base, compose_chain};
use crate::coinitial::{refine, resolving_refinement_over};
use crate::error::{Error, Result};
use crate::morphism::{compose, Morphism};
use crate::spiral::{spiral_amalgamate, spiral_jpp_realized, SpiralRealization};
use crate::structure::{product, Direction, ElementId, FinStructure};

/// Which projective Fraisse family a session approximates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Surjective `m`-tuples refined into the amalgamable subfamily.
    SurjectiveTuples { m: usize },
    /// Disjoint unions of spirals.
    Spirals,
    /// Graphs of bijections.
    Bijections,
}

impl Family {
    pub fn name(&self) -> String {
        match self {
            Family::SurjectiveTuples { m } => format!("surjective_{m}_tuples"),
            Family::Spirals => "spirals".to_string(),
            Family::Bijections => "bijections".to_string(),
        }
    }
}

/// Family plus the stage-size budget: discharges whose stage would exceed
/// the cap are parked, never silently dropped.
#[derive(Clone, Copy, Debug)]
pub struct FamilySpec {
    pub family: Family,
    pub size_cap: usize,
}

/// One stage of the inverse sequence. The bond maps this stage onto the
/// previous one and is absent on the first stage.
#[derive(Clone, Debug)]
pub struct Stage {
    pub index: usize,
    pub structure: Arc<FinStructure>,
    pub bond: Option<Morphism>,
}

/// What a session is asked to do.
#[derive(Clone, Debug)]
pub enum TaskKind {
    /// Produce a stage mapping onto the target.
    Universality { target: Arc<FinStructure> },
    /// Factor the stored stage epimorphism through `phi1`.
    Extension { phi1: Morphism, stage_index: usize, stage_epi: Morphism },
    /// Append a stage where every element over the given one has a unique
    /// successor in the given relation (1-based).
    Resolution { stage_index: usize, relation: usize, element: ElementId },
}

/// Proof data attached to a discharged task.
#[derive(Clone, Debug)]
pub struct Witness {
    /// Index of the stage appended by the discharge.
    pub stage_index: usize,
    /// Universality: the epimorphism onto the target. Extension: the map
    /// through which the stage epimorphism factors.
    pub map: Option<Morphism>,
    /// Resolution only: fiber elements with a unique successor.
    pub resolved: Vec<ElementId>,
    /// Resolution only: fiber elements that kept two successors.
    pub residual: Vec<ElementId>,
}

#[derive(Clone, Debug)]
pub enum TaskStatus {
    Pending,
    Discharged(Witness),
    Parked { reason: String },
}

#[derive(Clone, Debug)]
pub struct Task {
    pub id: usize,
    pub kind: TaskKind,
    pub status: TaskStatus,
}

/// Generator state: family members are enumerated in size-lexicographic
/// order and every discharged universality is followed by one extension
/// task against its double cover.
#[derive(Clone, Debug, Default)]
struct Generator {
    next_member: usize,
    pending_extension_of: Option<usize>,
}

/// A finite approximation session: stages, task ledger, FIFO queue.
#[derive(Clone, Debug)]
pub struct Session {
    spec: FamilySpec,
    stages: Vec<Stage>,
    tasks: Vec<Task>,
    queue: VecDeque<usize>,
    generator: Generator,
}

/// A bond-coherent prefix of a limit point: one element per stage.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Thread {
    pub entries: Vec<ElementId>,
}

impl Session {
    /// Start a session from a seed stage, which must lie in the family.
    pub fn new(spec: FamilySpec, seed: Arc<FinStructure>) -> Result<Session> {
        validate_member(spec.family, &seed)?;
        if seed.size() > spec.size_cap {
            return Err(Error::precondition(format!(
                "seed has {} elements, above the size cap {}",
                seed.size(),
                spec.size_cap
            )));
        }
        Ok(Session {
            spec,
            stages: vec![Stage { index: 1, structure: seed, bond: None }],
            tasks: Vec::new(),
            queue: VecDeque::new(),
            generator: Generator::default(),
        })
    }

    /// Rebuild a session from serialized parts. Bonds and witnesses are
    /// revalidated; pending tasks are queued in id order, which is the
    /// original FIFO order.
    pub fn from_raw(
        spec: FamilySpec,
        stages: Vec<Stage>,
        tasks: Vec<Task>,
        generator_state: (usize, Option<usize>),
    ) -> Result<Session> {
        if stages.is_empty() {
            return Err(Error::structural("session needs at least one stage"));
        }
        for (i, stage) in stages.iter().enumerate() {
            if stage.index != i + 1 {
                return Err(Error::structural(format!(
                    "stage {} carries index {}",
                    i + 1,
                    stage.index
                )));
            }
            match (&stage.bond, i) {
                (None, 0) => {}
                (Some(bond), i) if i > 0 => {
                    if !Morphism::same_structure(bond.source(), &stage.structure)
                        || !Morphism::same_structure(bond.target(), &stages[i - 1].structure)
                    {
                        return Err(Error::structural(format!(
                            "bond of stage {} does not connect it to stage {}",
                            i + 1,
                            i
                        )));
                    }
                    if !bond.is_epimorphism() {
                        return Err(Error::structural(format!(
                            "bond of stage {} is not an epimorphism",
                            i + 1
                        )));
                    }
                }
                _ => {
                    return Err(Error::structural(
                        "exactly the first stage has no bond".to_string(),
                    ))
                }
            }
        }
        let queue = tasks
            .iter()
            .filter(|t| matches!(t.status, TaskStatus::Pending))
            .map(|t| t.id)
            .collect();
        Ok(Session {
            spec,
            stages,
            tasks,
            queue,
            generator: Generator {
                next_member: generator_state.0,
                pending_extension_of: generator_state.1,
            },
        })
    }

    pub fn generator_state(&self) -> (usize, Option<usize>) {
        (self.generator.next_member, self.generator.pending_extension_of)
    }

    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn last_stage(&self) -> &Stage {
        self.stages.last().expect("sessions have at least one stage")
    }

    pub fn pending_count(&self) -> usize {
        self.queue.len()
    }

    fn push_task(&mut self, kind: TaskKind) -> usize {
        let id = self.tasks.len();
        self.tasks.push(Task { id, kind, status: TaskStatus::Pending });
        self.queue.push_back(id);
        id
    }

    pub fn enqueue_universality(&mut self, target: Arc<FinStructure>) -> Result<usize> {
        validate_member(self.spec.family, &target)?;
        Ok(self.push_task(TaskKind::Universality { target }))
    }

    pub fn enqueue_extension(
        &mut self,
        phi1: Morphism,
        stage_index: usize,
        stage_epi: Morphism,
    ) -> Result<usize> {
        let stage = self
            .stages
            .get(stage_index - 1)
            .ok_or_else(|| Error::precondition(format!("no stage {stage_index}")))?;
        if !Morphism::same_structure(stage_epi.source(), &stage.structure) {
            return Err(Error::precondition(
                "extension: stage map does not start at the named stage".to_string(),
            ));
        }
        if !Morphism::same_structure(phi1.target(), stage_epi.target()) {
            return Err(Error::precondition(
                "extension: the two maps have different targets".to_string(),
            ));
        }
        if !phi1.is_epimorphism() || !stage_epi.is_epimorphism() {
            return Err(Error::precondition(
                "extension: both maps must be epimorphisms".to_string(),
            ));
        }
        Ok(self.push_task(TaskKind::Extension { phi1, stage_index, stage_epi }))
    }

    pub fn enqueue_resolution(
        &mut self,
        stage_index: usize,
        relation: usize,
        element: ElementId,
    ) -> Result<usize> {
        if matches!(self.spec.family, Family::Bijections) {
            return Err(Error::precondition(
                "resolution: bijection stages already have unique successors".to_string(),
            ));
        }
        let stage = self
            .stages
            .get(stage_index - 1)
            .ok_or_else(|| Error::precondition(format!("no stage {stage_index}")))?;
        stage.structure.relation(relation)?;
        if stage.structure.index_of(element.as_str()).is_none() {
            return Err(Error::structural(format!(
                "resolution: stage {stage_index} has no element '{element}'"
            )));
        }
        Ok(self.push_task(TaskKind::Resolution { stage_index, relation, element }))
    }

    /// Process up to `budget` pending tasks in FIFO order. Discharges that
    /// fail verification abort with an error; discharges whose stage would
    /// exceed the size cap park the task and continue.
    pub fn advance(&mut self, budget: usize) -> Result<usize> {
        let mut done = 0;
        while done < budget {
            let Some(id) = self.queue.pop_front() else { break };
            let outcome = self.discharge(id)?;
            self.tasks[id].status = outcome;
            done += 1;
        }
        Ok(done)
    }

    /// Generate-and-run `budget` tasks from the built-in generator:
    /// universality of family members in size order, interleaved with one
    /// double-cover extension per discharged universality witness.
    pub fn advance_generated(&mut self, budget: usize) -> Result<usize> {
        let mut done = 0;
        for _ in 0..budget {
            if self.queue.is_empty() && !self.generate_next()? {
                break;
            }
            done += self.advance(1)?;
        }
        Ok(done)
    }

    fn generate_next(&mut self) -> Result<bool> {
        if let Some(tid) = self.generator.pending_extension_of.take() {
            if let TaskStatus::Discharged(w) = &self.tasks[tid].status {
                if let Some(stage_epi) = &w.map {
                    let target = Arc::clone(stage_epi.target_arc());
                    let stage_index = w.stage_index;
                    let stage_epi = stage_epi.clone();
                    let phi1 = double_cover(&target)?;
                    self.enqueue_extension(phi1, stage_index, stage_epi)?;
                    return Ok(true);
                }
            }
            // Parked universality: fall through and generate the next member.
        }
        match family_member(self.spec.family, self.generator.next_member, self.spec.size_cap)? {
            Some(target) => {
                self.generator.next_member += 1;
                let tid = self.enqueue_universality(target)?;
                self.generator.pending_extension_of = Some(tid);
                Ok(true)
            }
            None => Ok(false),
        }
    }

    fn discharge(&mut self, id: usize) -> Result<TaskStatus> {
        let kind = self.tasks[id].kind.clone();
        match kind {
            TaskKind::Universality { target } => self.discharge_universality(&target),
            TaskKind::Extension { phi1, stage_index, stage_epi } => {
                self.discharge_extension(&phi1, stage_index, &stage_epi)
            }
            TaskKind::Resolution { stage_index, relation, element } => {
                self.discharge_resolution(stage_index, relation, &element)
            }
        }
    }

    /// Joint projection of the last stage with the target, appended as the
    /// next stage: the first projection is the bond, the second the witness.
    fn discharge_universality(&mut self, target: &Arc<FinStructure>) -> Result<TaskStatus> {
        let last = Arc::clone(&self.last_stage().structure);
        let (bond, witness) = match self.spec.family {
            Family::Bijections => {
                let (_, pi1, pi2) = product(&last, target)?;
                (pi1, pi2)
            }
            Family::SurjectiveTuples { .. } => {
                // Joint projection inside the family: product, then refine.
                let (_, pi1, pi2) = product(&last, target)?;
                let refined = refine(pi1.source_arc())?;
                (compose(&refined.projection, &pi1)?, compose(&refined.projection, &pi2)?)
            }
            Family::Spirals => {
                let lastr = SpiralRealization::from_structure(&last)?;
                let tgtr = SpiralRealization::from_structure(target)?;
                let jpp = spiral_jpp_realized(&lastr, &tgtr)?;
                (jpp.to_first, jpp.to_second)
            }
        };
        if bond.source().size() > self.spec.size_cap {
            return Ok(TaskStatus::Parked {
                reason: format!(
                    "stage of {} elements exceeds the size cap {}",
                    bond.source().size(),
                    self.spec.size_cap
                ),
            });
        }
        self.append_stage(bond.clone())?;
        if !witness.is_epimorphism() {
            return Err(Error::precondition(
                "universality discharge: witness is not an epimorphism".to_string(),
            ));
        }
        Ok(TaskStatus::Discharged(Witness {
            stage_index: self.stages.len(),
            map: Some(witness),
            resolved: Vec::new(),
            residual: Vec::new(),
        }))
    }

    /// Amalgamate `phi1` against the stored stage epimorphism carried down
    /// to the last stage; the projection to the last stage is the bond and
    /// the projection through `phi1` the witness.
    fn discharge_extension(
        &mut self,
        phi1: &Morphism,
        stage_index: usize,
        stage_epi: &Morphism,
    ) -> Result<TaskStatus> {
        let f2 = self.carry_to_last(stage_index, stage_epi)?;
        let (psi, bond) = match self.spec.family {
            Family::Bijections => {
                let (_, pi1, pi2) = crate::structure::pullback(phi1, &f2)?;
                (pi1, pi2)
            }
            Family::SurjectiveTuples { .. } => {
                let result = amalgamate(phi1, &f2)?;
                (result.phi3, result.phi4)
            }
            Family::Spirals => {
                let am = spiral_amalgamate(phi1, &f2)?;
                (am.f3, am.f4)
            }
        };
        if bond.source().size() > self.spec.size_cap {
            return Ok(TaskStatus::Parked {
                reason: format!(
                    "stage of {} elements exceeds the size cap {}",
                    bond.source().size(),
                    self.spec.size_cap
                ),
            });
        }
        if !psi.is_epimorphism() {
            return Err(Error::precondition(
                "extension discharge: factored map is not an epimorphism".to_string(),
            ));
        }
        for i in 0..psi.source().size() {
            if phi1.apply(psi.apply(i)) != f2.apply(bond.apply(i)) {
                return Err(Error::precondition(
                    "extension discharge: square does not commute".to_string(),
                ));
            }
        }
        self.append_stage(bond)?;
        Ok(TaskStatus::Discharged(Witness {
            stage_index: self.stages.len(),
            map: Some(psi),
            resolved: Vec::new(),
            residual: Vec::new(),
        }))
    }

    /// Resolve the whole fiber over the named element at the last stage.
    fn discharge_resolution(
        &mut self,
        stage_index: usize,
        relation: usize,
        element: &ElementId,
    ) -> Result<TaskStatus> {
        let last = Arc::clone(&self.last_stage().structure);
        let target = self.stages[stage_index - 1]
            .structure
            .index_of(element.as_str())
            .ok_or_else(|| Error::structural(format!("no element '{element}'")))?;
        let fiber: Vec<u32> = if stage_index == self.stages.len() {
            vec![target as u32]
        } else {
            let down = self.chain_down(stage_index)?;
            down.fiber(target).into_iter().map(|u| u as u32).collect()
        };
        let resolution = resolving_refinement_over(&last, relation, &fiber)?;
        if resolution.b.size() > self.spec.size_cap {
            return Ok(TaskStatus::Parked {
                reason: format!(
                    "stage of {} elements exceeds the size cap {}",
                    resolution.b.size(),
                    self.spec.size_cap
                ),
            });
        }
        self.append_stage(resolution.projection)?;
        Ok(TaskStatus::Discharged(Witness {
            stage_index: self.stages.len(),
            map: None,
            resolved: resolution.resolved,
            residual: resolution.residual,
        }))
    }

    /// Composite bond from the last stage down to `stage_index`.
    fn chain_down(&self, stage_index: usize) -> Result<Morphism> {
        let bonds: Vec<&Morphism> = (stage_index + 1..=self.stages.len())
            .rev()
            .map(|j| self.stages[j - 1].bond.as_ref().expect("non-first stages have bonds"))
            .collect();
        compose_chain(&bonds)
    }

    /// Carry a map off some stage down the sequence so it starts at the
    /// last stage.
    fn carry_to_last(&self, stage_index: usize, map: &Morphism) -> Result<Morphism> {
        if stage_index == self.stages.len() {
            return Ok(map.clone());
        }
        compose(&self.chain_down(stage_index)?, map)
    }

    fn append_stage(&mut self, bond: Morphism) -> Result<()> {
        if !bond.is_epimorphism() {
            return Err(Error::precondition(
                "appended stage bond is not an epimorphism".to_string(),
            ));
        }
        if !Morphism::same_structure(bond.target(), &self.last_stage().structure) {
            return Err(Error::precondition(
                "appended stage bond does not target the last stage".to_string(),
            ));
        }
        self.stages.push(Stage {
            index: self.stages.len() + 1,
            structure: Arc::clone(bond.source_arc()),
            bond: Some(bond),
        });
        Ok(())
    }

    /// Per-stage, per-relation maximum out-degrees, plus the exact
    /// successor counts on every fiber touched by a discharged resolution.
    pub fn ambiguity_profile(&self) -> AmbiguityProfile {
        let stages = self
            .stages
            .iter()
            .map(|stage| {
                let max_out_degree = stage
                    .structure
                    .relations()
                    .iter()
                    .map(|rel| {
                        (0..stage.structure.size() as u32)
                            .map(|u| rel.out_degree(u))
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                StageAmbiguity { stage_index: stage.index, max_out_degree }
            })
            .collect();
        let mut fibers = Vec::new();
        for task in &self.tasks {
            let TaskKind::Resolution { relation, .. } = &task.kind else { continue };
            let TaskStatus::Discharged(w) = &task.status else { continue };
            let stage = &self.stages[w.stage_index - 1];
            let rel = &stage.structure.relations()[*relation - 1];
            let elements: Vec<ElementId> =
                w.resolved.iter().chain(&w.residual).cloned().collect();
            let successor_counts = elements
                .iter()
                .map(|e| {
                    let i = stage.structure.index_of(e.as_str()).expect("witness element");
                    rel.out_degree(i as u32)
                })
                .collect();
            fibers.push(FiberReport {
                task_id: task.id,
                stage_index: w.stage_index,
                relation: *relation,
                elements,
                successor_counts,
            });
        }
        AmbiguityProfile { stages, fibers }
    }

    /// All bond-coherent successor (or predecessor) threads of a thread
    /// under relation `rel_index`, in canonical order.
    pub fn simulate_step(
        &self,
        thread: &Thread,
        rel_index: usize,
        direction: Direction,
    ) -> Result<Vec<Thread>> {
        if thread.entries.is_empty() || thread.entries.len() > self.stages.len() {
            return Err(Error::precondition(format!(
                "thread length {} not in 1..={}",
                thread.entries.len(),
                self.stages.len()
            )));
        }
        let indices: Vec<usize> = thread
            .entries
            .iter()
            .zip(&self.stages)
            .map(|(e, stage)| {
                stage.structure.index_of(e.as_str()).ok_or_else(|| {
                    Error::structural(format!(
                        "thread element '{e}' is not in stage {}",
                        stage.index
                    ))
                })
            })
            .collect::<Result<_>>()?;
        for (i, w) in indices.windows(2).enumerate() {
            let bond = self.stages[i + 1].bond.as_ref().expect("bond present");
            if bond.apply(w[1]) != w[0] {
                return Err(Error::precondition(format!(
                    "thread is not bond-coherent at stage {}",
                    i + 2
                )));
            }
        }

        let mut partial: Vec<Vec<usize>> = vec![Vec::new()];
        for (i, &e) in indices.iter().enumerate() {
            let stage = &self.stages[i];
            let rel = stage.structure.relation(rel_index)?;
            let mut next: Vec<Vec<usize>> = Vec::new();
            for p in &partial {
                for cand in rel.neighbors(direction, e as u32) {
                    if let Some(&prev) = p.last() {
                        let bond = stage.bond.as_ref().expect("bond present");
                        if bond.apply(cand as usize) != prev {
                            continue;
                        }
                    }
                    let mut q = p.clone();
                    q.push(cand as usize);
                    next.push(q);
                }
            }
            partial = next;
            if partial.is_empty() {
                break;
            }
        }
        let mut out: Vec<Thread> = partial
            .into_iter()
            .map(|p| Thread {
                entries: p
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| self.stages[i].structure.element(e).clone())
                    .collect(),
            })
            .collect();
        out.sort();
        out.dedup();
        Ok(out)
    }
}

/// Maximum out-degrees per stage and relation.
#[derive(Clone, Debug)]
pub struct StageAmbiguity {
    pub stage_index: usize,
    pub max_out_degree: Vec<usize>,
}

/// Successor counts over a resolved fiber.
#[derive(Clone, Debug)]
pub struct FiberReport {
    pub task_id: usize,
    pub stage_index: usize,
    pub relation: usize,
    pub elements: Vec<ElementId>,
    pub successor_counts: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct AmbiguityProfile {
    pub stages: Vec<StageAmbiguity>,
    pub fibers: Vec<FiberReport>,
}

/// Family membership checks for seeds and universality targets.
pub fn validate_member(family: Family, s: &Arc<FinStructure>) -> Result<()> {
    match family {
        Family::SurjectiveTuples { m } => {
            if s.arity() != m {
                return Err(Error::precondition(format!(
                    "'{}' has {} relations, family needs {m}",
                    s.name(),
                    s.arity()
                )));
            }
            s.require_surjective("family membership")?;
            let report = check_amalgamation_base(s)?;
            if !report.passes() {
                return Err(Error::precondition(format!(
                    "'{}' fails the amalgamation base check; refine it first",
                    s.name()
                )));
            }
            Ok(())
        }
        Family::Spirals => SpiralRealization::from_structure(s).map(|_| ()),
        Family::Bijections => {
            s.require_surjective("family membership")?;
            for (r, rel) in s.relations().iter().enumerate() {
                for u in 0..s.size() as u32 {
                    if rel.out_degree(u) != 1 || rel.in_degree(u) != 1 {
                        return Err(Error::precondition(format!(
                            "'{}': relation s{} is not the graph of a bijection",
                            s.name(),
                            r + 1
                        )));
                    }
                }
            }
            Ok(())
        }
    }
}

/// Two disjoint copies folded back onto the base: the canonical map with
/// nontrivial fibers used by generated extension tasks.
pub fn double_cover(a: &Arc<FinStructure>) -> Result<Morphism> {
    let mut carrier = Vec::with_capacity(2 * a.size());
    for copy in 1..=2 {
        for e in a.carrier() {
            carrier.push(ElementId::new(format!("{copy}:{e}"))?);
        }
    }
    let n = a.size() as u32;
    let relations = a
        .relations()
        .iter()
        .map(|rel| {
            let mut edges = Vec::with_capacity(2 * rel.len());
            for &(u, v) in rel.edges() {
                edges.push((u, v));
                edges.push((u + n, v + n));
            }
            edges
        })
        .collect();
    let b = Arc::new(FinStructure::from_parts(
        format!("2x{}", a.name()),
        carrier,
        relations,
    )?);
    let map = (0..2 * n).map(|i| i % n).collect();
    Morphism::new(b, Arc::clone(a), map)
}

/// Deterministic size-lexicographic family member enumeration, used by the
/// built-in task generator.
fn family_member(family: Family, index: usize, size_cap: usize) -> Result<Option<Arc<FinStructure>>> {
    match family {
        Family::Spirals => {
            let mut seen = 0;
            for n in 4..=size_cap {
                for x in 2..n {
                    for y in x + 1..n {
                        if seen == index {
                            let s = crate::spiral::Spiral::new(n, x, y)?;
                            return Ok(Some(Arc::new(
                                s.to_structure(format!("spiral({n},{x},{y})")),
                            )));
                        }
                        seen += 1;
                    }
                }
            }
            Ok(None)
        }
        Family::Bijections => {
            let mut seen = 0;
            for n in 1..=size_cap.min(6) {
                let mut perm: Vec<u32> = (0..n as u32).collect();
                loop {
                    if seen == index {
                        return Ok(Some(Arc::new(permutation_structure(&perm)?)));
                    }
                    seen += 1;
                    if !next_permutation(&mut perm) {
                        break;
                    }
                }
            }
            Ok(None)
        }
        Family::SurjectiveTuples { m } => {
            // Enumerate surjective m-tuples of relations in mask order and
            // refine each into the family; enumeration stays desk-scale.
            let max_n = match m {
                1 => 3usize,
                2 => 2,
                _ => 1,
            };
            let mut seen = 0;
            for n in 1..=max_n {
                let cells = n * n;
                let total: u64 = 1 << (cells * m);
                for code in 0..total {
                    let mut relations = Vec::with_capacity(m);
                    for r in 0..m {
                        let mask = (code >> (r * cells)) & ((1 << cells) - 1);
                        let mut edges = Vec::new();
                        for u in 0..n {
                            for v in 0..n {
                                if mask >> (u * n + v) & 1 == 1 {
                                    edges.push((u as u32, v as u32));
                                }
                            }
                        }
                        relations.push(edges);
                    }
                    let carrier = (0..n)
                        .map(|i| ElementId::new(format!("e{i}")))
                        .collect::<Result<Vec<_>>>()?;
                    let Ok(s) = FinStructure::from_parts(format!("f0_{n}_{code}"), carrier, relations)
                    else {
                        continue;
                    };
                    if !s.is_surjective() {
                        continue;
                    }
                    if 4 * m * n > size_cap {
                        continue;
                    }
                    if seen == index {
                        let refined = refine(&Arc::new(s))?;
                        return Ok(Some(refined.b));
                    }
                    seen += 1;
                }
            }
            Ok(None)
        }
    }
}

fn permutation_structure(perm: &[u32]) -> Result<FinStructure> {
    let n = perm.len();
    let carrier = (0..n)
        .map(|i| ElementId::new(format!("p{i}")))
        .collect::<Result<Vec<_>>>()?;
    let edges = (0..n).map(|i| (i as u32, perm[i])).collect();
    FinStructure::from_parts(
        format!("perm{}", perm.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("")),
        carrier,
        vec![edges],
    )
}

fn next_permutation(perm: &mut [u32]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Realizability scan for the two-block obstruction pattern: over every
/// bijection on at most `max_size` points and every two-block partition
/// `{p, q}`, test whether the induced block relation can have `p -> p`,
/// `q -> p`, and `q -> q` present while `p -> q` is absent.
#[derive(Clone, Debug)]
pub struct NondensityReport {
    pub unrealizable: bool,
    /// A realizing `(permutation, p-block)` pair, if one exists.
    pub witness: Option<(Vec<u32>, Vec<u32>)>,
    /// Per size: permutations checked, partitions per permutation.
    pub log: Vec<(usize, u64, u64)>,
}

pub fn nondensity_check(max_size: usize) -> Result<NondensityReport> {
    if max_size < 2 {
        return Err(Error::precondition("nondensity check needs max_size >= 2".to_string()));
    }
    let mut log = Vec::new();
    let mut witness = None;
    for n in 2..=max_size {
        let mut perms = 0u64;
        let mut partitions = 0u64;
        let mut perm: Vec<u32> = (0..n as u32).collect();
        loop {
            perms += 1;
            // Two-block partitions {p, q}, deduplicated by keeping 0 in p.
            for rest in 0u32..(1 << (n - 1)) {
                let p = (rest << 1) | 1;
                if p == (1 << n) - 1 {
                    continue;
                }
                partitions += 1;
                let mut p_to_p = false;
                let mut q_to_p = false;
                let mut q_to_q = false;
                let mut p_to_q = false;
                for i in 0..n {
                    let from_p = p >> i & 1 == 1;
                    let to_p = p >> perm[i] & 1 == 1;
                    match (from_p, to_p) {
                        (true, true) => p_to_p = true,
                        (true, false) => p_to_q = true,
                        (false, true) => q_to_p = true,
                        (false, false) => q_to_q = true,
                    }
                }
                if p_to_p && q_to_p && q_to_q && !p_to_q {
                    witness.get_or_insert_with(|| {
                        let block: Vec<u32> =
                            (0..n as u32).filter(|&i| p >> i & 1 == 1).collect();
                        (perm.clone(), block)
                    });
                }
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        log.push((n, perms, partitions / perms.max(1)));
    }
    Ok(NondensityReport { unrealizable: witness.is_none(), witness, log })
}
