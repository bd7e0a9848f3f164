//! Hardness-construction instance generators, the universal plan verifier and
//! a brute-force joint-state oracle.
//!
//! The generators materialize textbook reductions (3SAT, set cover, number
//! partition) as concrete environments with symbolic vertex names, so that
//! witness plans can be constructed from certificates and checked by
//! `verify_plan`, and small instances can be settled exactly by the oracle.

use std::collections::HashMap;

use thiserror::Error;

use crate::cmpstt::{PartitionId, PartitionTree};
use crate::env::{Configuration, GraphEnv, GraphKind, Plan, VertexId};
use crate::metrics::IdlenessTrace;

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("clause {0} has {1} literals, expected exactly 3")]
    ClauseArity(usize, usize),
    #[error("literal {0} references variable out of range 1..={1}")]
    LiteralRange(i32, u32),
    #[error("zero literal inside clause {0}")]
    ZeroLiteral(usize),
    #[error("set cover: element {0} outside universe of size {1}")]
    ElementRange(u32, u32),
    #[error("set cover budget k={k} >= family size {beta}: trivial instance")]
    TrivialCover { k: u32, beta: u32 },
    #[error("number partition: element sum {0} is odd, no equal split exists")]
    OddSum(u64),
    #[error("assignment length {0} does not match variable count {1}")]
    AssignmentLength(usize, u32),
    #[error("cnf parse error at line {line}: {msg}")]
    CnfParse { line: usize, msg: String },
}

/// A 3-CNF formula: clauses of exactly three signed variable indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: u32,
    pub clauses: Vec<[i32; 3]>,
}

impl CnfFormula {
    pub fn new(num_vars: u32, clauses: Vec<[i32; 3]>) -> Result<Self, ReductionError> {
        for (idx, clause) in clauses.iter().enumerate() {
            for &lit in clause {
                if lit == 0 {
                    return Err(ReductionError::ZeroLiteral(idx));
                }
                if lit.unsigned_abs() > num_vars {
                    return Err(ReductionError::LiteralRange(lit, num_vars));
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_clauses(&self) -> u32 {
        self.clauses.len() as u32
    }

    /// True iff the assignment (indexed by variable, `true` meaning positive)
    /// satisfies every clause.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&lit| {
                let var = (lit.unsigned_abs() - 1) as usize;
                if lit > 0 {
                    assignment[var]
                } else {
                    !assignment[var]
                }
            })
        })
    }

    /// Exhaustive satisfiability check; intended for small test formulas.
    pub fn find_satisfying_assignment(&self) -> Option<Vec<bool>> {
        let n = self.num_vars as usize;
        for bits in 0u64..(1u64 << n) {
            let assignment: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            if self.satisfied_by(&assignment) {
                return Some(assignment);
            }
        }
        None
    }

    /// DIMACS CNF parser, restricted to exactly-three-literal clauses.
    pub fn parse_dimacs(text: &str) -> Result<Self, ReductionError> {
        let mut num_vars = None;
        let mut clauses = Vec::new();
        let mut current: Vec<i32> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let fields: Vec<&str> = rest.split_whitespace().collect();
                if fields.len() != 3 || fields[0] != "cnf" {
                    return Err(ReductionError::CnfParse {
                        line: lineno + 1,
                        msg: format!("bad problem line: {line}"),
                    });
                }
                num_vars = Some(fields[1].parse::<u32>().map_err(|e| ReductionError::CnfParse {
                    line: lineno + 1,
                    msg: e.to_string(),
                })?);
                continue;
            }
            for tok in line.split_whitespace() {
                let lit: i32 = tok.parse().map_err(|e: std::num::ParseIntError| {
                    ReductionError::CnfParse { line: lineno + 1, msg: e.to_string() }
                })?;
                if lit == 0 {
                    let clause: [i32; 3] = current.clone().try_into().map_err(|_| {
                        ReductionError::ClauseArity(clauses.len(), current.len())
                    })?;
                    clauses.push(clause);
                    current.clear();
                } else {
                    current.push(lit);
                }
            }
        }
        if !current.is_empty() {
            return Err(ReductionError::ClauseArity(clauses.len(), current.len()));
        }
        let num_vars = num_vars.ok_or(ReductionError::CnfParse {
            line: 0,
            msg: "missing problem line".into(),
        })?;
        CnfFormula::new(num_vars, clauses)
    }
}

/// Set cover instance over universe {1..universe}.
#[derive(Clone, Debug)]
pub struct SetCoverInstance {
    pub universe: u32,
    pub family: Vec<Vec<u32>>,
    pub budget: u32,
}

impl SetCoverInstance {
    pub fn new(universe: u32, family: Vec<Vec<u32>>, budget: u32) -> Result<Self, ReductionError> {
        for subset in &family {
            for &e in subset {
                if e < 1 || e > universe {
                    return Err(ReductionError::ElementRange(e, universe));
                }
            }
        }
        Ok(SetCoverInstance { universe, family, budget })
    }

    pub fn covers(&self, chosen: &[usize]) -> bool {
        let mut seen = vec![false; self.universe as usize];
        for &i in chosen {
            for &e in &self.family[i] {
                seen[(e - 1) as usize] = true;
            }
        }
        seen.iter().all(|&s| s)
    }
}

// ---------------------------------------------------------------------------
// Persistent-surveillance instance from 3SAT
// ---------------------------------------------------------------------------

/// Generated surveillance instance: one commuting robot must service a clause
/// chain while the others hold a satisfying literal selection.
pub struct CmpsInstance {
    pub env: GraphEnv,
    pub start: Configuration,
    pub time_bound: u32,
    pub robots: u32,
    names: HashMap<String, VertexId>,
}

impl CmpsInstance {
    pub fn vertex(&self, name: &str) -> VertexId {
        self.names[name]
    }
}

/// Environment layout per-variable: literal vertices `x_i`/`!x_i`, a parking
/// vertex `x'_i` and a guard vertex `x''_i`; plus a clause chain and a pivot
/// vertex `v` next to base. Sensing set is {v, c_1}.
pub fn gen_cmps_from_3sat(formula: &CnfFormula) -> CmpsInstance {
    let alpha = formula.num_vars as usize;
    let beta = formula.clauses.len();
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, VertexId> = HashMap::new();
    let mut add = |names: &mut Vec<String>, index: &mut HashMap<String, VertexId>, name: String| {
        let id = names.len();
        index.insert(name.clone(), id);
        names.push(name);
        id
    };
    let pos: Vec<VertexId> =
        (1..=alpha).map(|i| add(&mut names, &mut index, format!("x{i}"))).collect();
    let neg: Vec<VertexId> =
        (1..=alpha).map(|i| add(&mut names, &mut index, format!("!x{i}"))).collect();
    let park: Vec<VertexId> =
        (1..=alpha).map(|i| add(&mut names, &mut index, format!("x'{i}"))).collect();
    let guard: Vec<VertexId> =
        (1..=alpha).map(|i| add(&mut names, &mut index, format!("x''{i}"))).collect();
    let clause: Vec<VertexId> =
        (1..=beta).map(|j| add(&mut names, &mut index, format!("c{j}"))).collect();
    let base = add(&mut names, &mut index, "b".to_string());
    let pivot = add(&mut names, &mut index, "v".to_string());
    debug_assert_eq!(names.len(), 4 * alpha + beta + 2);

    let mut em: Vec<(VertexId, VertexId)> = Vec::new();
    let mut ec: Vec<(VertexId, VertexId)> = Vec::new();
    for i in 0..alpha {
        em.push((base, guard[i]));
        em.push((guard[i], park[i]));
        em.push((park[i], pos[i]));
        em.push((park[i], neg[i]));
    }
    em.push((base, pivot));
    if beta > 0 {
        em.push((pivot, clause[beta - 1]));
        for j in 1..beta {
            em.push((clause[j - 1], clause[j]));
        }
    }

    ec.push((base, guard[0]));
    for i in 1..alpha {
        ec.push((guard[i - 1], guard[i]));
    }
    ec.push((pivot, park[alpha - 1]));
    for i in 1..alpha {
        ec.push((park[i - 1], park[i]));
    }
    // The pivot parking column must reach base while robots wait on it; the
    // published edge list omits this link, leaving the start configuration
    // disconnected, so the base-pivot link is added.
    ec.push((base, pivot));
    ec.push((base, pos[0]));
    ec.push((base, neg[0]));
    for i in 1..alpha {
        for &a in &[pos[i - 1], neg[i - 1]] {
            for &b in &[pos[i], neg[i]] {
                ec.push((a, b));
            }
        }
    }
    for (j, lits) in formula.clauses.iter().enumerate() {
        for &lit in lits {
            let var = (lit.unsigned_abs() - 1) as usize;
            let z = if lit > 0 { pos[var] } else { neg[var] };
            ec.push((clause[j], z));
        }
    }

    let sensing = vec![pivot, clause[0]];
    let env = GraphEnv::from_parts(names.len(), &em, &ec, base, &sensing, Some(names))
        .expect("generated instance is well-formed");
    let mut start = vec![pivot];
    start.extend(park.iter().copied());
    CmpsInstance {
        env,
        start: Configuration::new(start),
        time_bound: 2 * beta as u32,
        robots: (alpha + 1) as u32,
        names: index,
    }
}

/// Encodes the periodic witness induced by a variable assignment: parking
/// robots descend to their literals, the commuter walks the clause chain to
/// c_1 and back, then everyone returns. The plan is valid iff the assignment
/// satisfies the formula.
pub fn encode_cmps_witness(
    formula: &CnfFormula,
    instance: &CmpsInstance,
    assignment: &[bool],
) -> Result<Plan, ReductionError> {
    if assignment.len() != formula.num_vars as usize {
        return Err(ReductionError::AssignmentLength(assignment.len(), formula.num_vars));
    }
    let alpha = formula.num_vars as usize;
    let beta = formula.clauses.len();
    let pivot = instance.vertex("v");
    let lit = |i: usize| -> VertexId {
        if assignment[i] {
            instance.vertex(&format!("x{}", i + 1))
        } else {
            instance.vertex(&format!("!x{}", i + 1))
        }
    };
    let park = |i: usize| instance.vertex(&format!("x'{}", i + 1));
    let clause = |j: usize| instance.vertex(&format!("c{}", j + 1));

    let mut steps = Vec::with_capacity(2 * beta + 1);
    steps.push(instance.start.clone());
    // Outbound: commuter v -> c_beta -> ... -> c_1, parkers drop to literals.
    for step in 1..=beta {
        let commuter = clause(beta - step);
        let mut positions = vec![commuter];
        for i in 0..alpha {
            positions.push(lit(i));
        }
        steps.push(Configuration::new(positions));
    }
    // Return: c_1 -> ... -> c_beta -> v, parkers climb back on the last step.
    for step in 1..=beta {
        let (commuter, parked_home) = if step == beta {
            (pivot, true)
        } else {
            (clause(step), false)
        };
        let mut positions = vec![commuter];
        for i in 0..alpha {
            positions.push(if parked_home { park(i) } else { lit(i) });
        }
        steps.push(Configuration::new(positions));
    }
    Ok(Plan::new(&instance.env, steps))
}

// ---------------------------------------------------------------------------
// Reachability instance from set cover
// ---------------------------------------------------------------------------

pub struct CmrInstance {
    pub env: GraphEnv,
    pub goal: VertexId,
    pub robots: u32,
    pub time_bound: u32,
    pub chain_len: u32,
    names: HashMap<String, VertexId>,
}

impl CmrInstance {
    pub fn vertex(&self, name: &str) -> VertexId {
        self.names[name]
    }
}

/// Reachability instance: per subset a corridor of M+1 hand-over vertices ends
/// at a subset vertex `f_i`; covered elements `s_j` bridge the element chain,
/// whose twins `s'_j` form the goal chain ending at the goal `s'_M`.
pub fn gen_cmr_from_sc(inst: &SetCoverInstance) -> Result<CmrInstance, ReductionError> {
    let alpha = inst.universe;
    let beta = inst.family.len() as u32;
    if inst.budget >= beta {
        return Err(ReductionError::TrivialCover { k: inst.budget, beta });
    }
    let m = alpha.max(beta);
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, VertexId> = HashMap::new();
    let mut add = |names: &mut Vec<String>, index: &mut HashMap<String, VertexId>, name: String| {
        let id = names.len();
        index.insert(name.clone(), id);
        names.push(name);
        id
    };
    let base = add(&mut names, &mut index, "b".to_string());
    let mut corridors: Vec<Vec<VertexId>> = Vec::new();
    for i in 1..=beta {
        corridors.push(
            (1..=m + 1)
                .map(|j| add(&mut names, &mut index, format!("u{i}_{j}")))
                .collect(),
        );
    }
    let subsets: Vec<VertexId> =
        (1..=beta).map(|i| add(&mut names, &mut index, format!("f{i}"))).collect();
    let elements: Vec<VertexId> =
        (1..=m).map(|j| add(&mut names, &mut index, format!("s{j}"))).collect();
    let twins: Vec<VertexId> =
        (1..=m).map(|j| add(&mut names, &mut index, format!("s'{j}"))).collect();
    debug_assert_eq!(names.len() as u32, 1 + (m + 2) * beta + 2 * m);

    let mut em: Vec<(VertexId, VertexId)> = Vec::new();
    let mut ec: Vec<(VertexId, VertexId)> = Vec::new();
    for (i, corridor) in corridors.iter().enumerate() {
        em.push((base, corridor[0]));
        ec.push((base, corridor[0]));
        for j in 0..m as usize {
            em.push((corridor[j], corridor[j + 1]));
            ec.push((corridor[j], corridor[j + 1]));
        }
        em.push((corridor[m as usize], subsets[i]));
        ec.push((base, subsets[i]));
    }
    em.push((base, elements[0]));
    for j in 1..m as usize {
        em.push((elements[j - 1], elements[j]));
    }
    for j in 0..m as usize {
        em.push((elements[j], twins[j]));
    }
    ec.push((base, twins[0]));
    for j in 1..m as usize {
        ec.push((twins[j - 1], twins[j]));
    }
    ec.push((base, elements[m as usize - 1]));
    for (i, subset) in inst.family.iter().enumerate() {
        for &e in subset {
            ec.push((subsets[i], elements[(e - 1) as usize]));
        }
    }

    let goal = twins[m as usize - 1];
    let env = GraphEnv::from_parts(names.len(), &em, &ec, base, &[goal], Some(names))
        .expect("generated instance is well-formed");
    Ok(CmrInstance {
        env,
        goal,
        robots: m + inst.budget,
        time_bound: 2 * beta * (m + 1) + m + 1,
        chain_len: m,
        names: index,
    })
}

/// Builds the witness plan for a concrete cover: for each chosen subset a
/// corridor crew walks out, spreading one robot per hand-over slot, the
/// traveler steps onto the subset vertex and the crew retreats; finally the
/// crew walks the element chain and hops onto the twins simultaneously.
pub fn encode_cmr_witness(
    inst: &SetCoverInstance,
    generated: &CmrInstance,
    chosen: &[usize],
) -> Plan {
    debug_assert!(inst.covers(chosen));
    let m = generated.chain_len as usize;
    let robots = generated.robots as usize;
    let base = generated.env.base();
    // Robot roles: 0..m are the crew, m.. are placed on subsets, one per
    // chosen subset in order.
    let mut positions = vec![base; robots];
    let mut steps = vec![Configuration::new(positions.clone())];

    for (placed, &subset_idx) in chosen.iter().enumerate() {
        let corridor: Vec<VertexId> =
            (1..=m + 1).map(|j| generated.vertex(&format!("u{}_{}", subset_idx + 1, j))).collect();
        let traveler = m + placed;
        // Advance: after step k, crew robot j < k holds corridor slot j while
        // the rest of the line stands on slot k.
        for k in 0..=m {
            for j in k..m {
                positions[j] = corridor[k];
            }
            positions[traveler] = corridor[k];
            steps.push(Configuration::new(positions.clone()));
        }
        // The traveler reaches the subset vertex, which links to base directly.
        positions[traveler] = generated.vertex(&format!("f{}", subset_idx + 1));
        steps.push(Configuration::new(positions.clone()));
        // Retreat: the tail collapses back one slot per step.
        for k in (0..m).rev() {
            for j in k..m {
                positions[j] = if k == 0 { base } else { corridor[k - 1] };
            }
            steps.push(Configuration::new(positions.clone()));
        }
    }

    // Element chain walk: crew robot j ends at chain slot j+1, deepest target
    // entering first; every element is linked to an occupied subset vertex.
    let element: Vec<VertexId> = (1..=m).map(|j| generated.vertex(&format!("s{j}"))).collect();
    let twin: Vec<VertexId> = (1..=m).map(|j| generated.vertex(&format!("s'{j}"))).collect();
    for step in 1..=m {
        for j in 0..m {
            let start_delay = m - 1 - j;
            if step > start_delay {
                let advanced = (step - start_delay).min(j + 1);
                positions[j] = element[advanced - 1];
            }
        }
        steps.push(Configuration::new(positions.clone()));
    }
    // Simultaneous hop onto the twin chain, reaching the goal.
    for j in 0..m {
        positions[j] = twin[j];
    }
    steps.push(Configuration::new(positions.clone()));
    Plan::new(&generated.env, steps)
}

// ---------------------------------------------------------------------------
// Relay-dropping instance from 3SAT
// ---------------------------------------------------------------------------

pub struct CmrdInstance {
    pub path: Vec<VertexId>,
    pub robots: u32,
    names: Vec<String>,
    links: std::collections::BTreeSet<(VertexId, VertexId)>,
}

impl CmrdInstance {
    pub fn vertex(&self, name: &str) -> VertexId {
        self.names.iter().position(|n| n == name).expect("known vertex")
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.names[v]
    }

    pub fn has_link(&self, a: VertexId, b: VertexId) -> bool {
        let key = (a.min(b), a.max(b));
        self.links.contains(&key)
    }

    pub fn base(&self) -> VertexId {
        self.path[0]
    }
}

/// Relay-dropping instance: the movement path runs through both literals of
/// every variable, then the parking column, then the clause chain; link edges
/// let exactly the satisfying relay placements keep the walker connected.
pub fn gen_cmrd_from_3sat(formula: &CnfFormula) -> CmrdInstance {
    let alpha = formula.num_vars as usize;
    let beta = formula.clauses.len();
    let mut names = Vec::new();
    let mut path = Vec::new();
    let mut add = |names: &mut Vec<String>, name: String| -> VertexId {
        names.push(name);
        names.len() - 1
    };
    let base = add(&mut names, "b".to_string());
    path.push(base);
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for i in 1..=alpha {
        let p = add(&mut names, format!("x{i}"));
        let n = add(&mut names, format!("!x{i}"));
        pos.push(p);
        neg.push(n);
        path.push(p);
        path.push(n);
    }
    let park: Vec<VertexId> = (1..=alpha).map(|i| add(&mut names, format!("x'{i}"))).collect();
    path.extend(park.iter().copied());
    let clause: Vec<VertexId> = (1..=beta).map(|j| add(&mut names, format!("c{j}"))).collect();
    path.extend(clause.iter().copied());
    debug_assert_eq!(names.len(), 3 * alpha + beta + 1);

    let mut links = std::collections::BTreeSet::new();
    let mut link = |links: &mut std::collections::BTreeSet<(VertexId, VertexId)>,
                    a: VertexId,
                    b: VertexId| {
        links.insert((a.min(b), a.max(b)));
    };
    link(&mut links, neg[alpha - 1], park[0]);
    for i in 1..alpha {
        link(&mut links, park[i - 1], park[i]);
    }
    if beta > 0 {
        link(&mut links, park[alpha - 1], clause[0]);
        for j in 1..beta {
            link(&mut links, clause[j - 1], clause[j]);
        }
    }
    link(&mut links, base, pos[0]);
    for i in 1..alpha {
        link(&mut links, neg[i - 1], pos[i]);
    }
    for i in 0..alpha {
        link(&mut links, pos[i], neg[i]);
    }
    for i in 1..alpha {
        for &a in &[pos[i - 1], neg[i - 1]] {
            for &b in &[pos[i], neg[i]] {
                link(&mut links, a, b);
            }
        }
    }
    for i in 0..alpha {
        link(&mut links, pos[i], park[i]);
        link(&mut links, neg[i], park[i]);
    }
    for (j, lits) in formula.clauses.iter().enumerate() {
        for &lit in lits {
            let var = (lit.unsigned_abs() - 1) as usize;
            let z = if lit > 0 { pos[var] } else { neg[var] };
            link(&mut links, clause[j], z);
        }
    }

    CmrdInstance { path, robots: (alpha + 1) as u32, names, links }
}

/// Relay placement induced by a variable assignment: one relay per variable at
/// the chosen literal vertex.
pub fn cmrd_placement_for_assignment(
    instance: &CmrdInstance,
    assignment: &[bool],
) -> Vec<VertexId> {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &val)| {
            if val {
                instance.vertex(&format!("x{}", i + 1))
            } else {
                instance.vertex(&format!("!x{}", i + 1))
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Partition-tree instance from number partition
// ---------------------------------------------------------------------------

pub struct CmpsttInstance {
    pub tree: PartitionTree,
    pub robots: u32,
    pub time_bound: u32,
    pub leaf_ids: Vec<PartitionId>,
}

/// Star instance: one leaf partition per element, each demanding its element
/// value in robots, unit travel and unit cover time; an equal split of the
/// elements is exactly a two-phase visit schedule with worst idleness 6.
pub fn gen_cmpstt_from_partition(elements: &[u32]) -> Result<CmpsttInstance, ReductionError> {
    let sum: u64 = elements.iter().map(|&s| s as u64).sum();
    if sum % 2 != 0 {
        return Err(ReductionError::OddSum(sum));
    }
    let mut tree = PartitionTree::new("b".to_string(), 0, false);
    let mut leaf_ids = Vec::new();
    for (i, &s) in elements.iter().enumerate() {
        let leaf = tree.add_partition(format!("v{}", i + 1), s, true);
        tree.connect(tree.base(), leaf, 0, 1);
        tree.set_cover_time_fn(leaf, move |_k| 1);
        leaf_ids.push(leaf);
    }
    tree.set_cover_time_fn(tree.base(), |_k| 0);
    Ok(CmpsttInstance {
        tree,
        robots: (sum / 2) as u32,
        time_bound: 6,
        leaf_ids,
    })
}

// ---------------------------------------------------------------------------
// Universal plan verifier
// ---------------------------------------------------------------------------

/// Optional claims checked after feasibility.
#[derive(Clone, Debug, Default)]
pub struct Claims {
    /// Vertices that must each be visited at least once.
    pub visits: Option<Vec<VertexId>>,
    /// The final configuration must equal the first.
    pub periodic: bool,
    /// Max instantaneous worst idleness over the plan must not exceed this.
    pub wi_bound: Option<u32>,
    /// Some robot must reach this vertex at some step.
    pub goal: Option<VertexId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyPlan,
    WrongEnvironment,
    Movement { step: u32, robot: usize },
    Disconnected { step: u32 },
    MissedVisit { vertex: VertexId },
    NotPeriodic,
    WiBoundExceeded { observed: u32, bound: u32 },
    GoalNotReached { goal: VertexId },
}

pub type Verdict = Result<(), Violation>;

/// Checks movement legality and per-step connectivity, then the claims.
/// Violations are ordinary values carrying the first offending step.
pub fn verify_plan(env: &GraphEnv, plan: &Plan, claims: &Claims) -> Verdict {
    if plan.steps.is_empty() {
        return Err(Violation::EmptyPlan);
    }
    if plan.env_hash != env.hash() {
        return Err(Violation::WrongEnvironment);
    }
    for (t, window) in plan.steps.windows(2).enumerate() {
        let (cur, next) = (&window[0], &window[1]);
        for (robot, (&from, &to)) in
            cur.positions.iter().zip(next.positions.iter()).enumerate()
        {
            if from != to && !env.has_edge(GraphKind::Movement, from, to) {
                return Err(Violation::Movement { step: t as u32 + 1, robot });
            }
        }
    }
    for (t, config) in plan.steps.iter().enumerate() {
        if !env.is_connected_config(config) {
            return Err(Violation::Disconnected { step: t as u32 });
        }
    }
    let trace = IdlenessTrace::from_plan(env, plan);
    if let Some(visits) = &claims.visits {
        for &v in visits {
            let seen = plan.steps.iter().any(|c| c.positions.contains(&v));
            if !seen {
                return Err(Violation::MissedVisit { vertex: v });
            }
        }
    }
    if claims.periodic && plan.steps.first() != plan.steps.last() {
        return Err(Violation::NotPeriodic);
    }
    if let Some(bound) = claims.wi_bound {
        let observed = trace.max_instantaneous_wi();
        if observed > bound {
            return Err(Violation::WiBoundExceeded { observed, bound });
        }
    }
    if let Some(goal) = claims.goal {
        let reached = plan.steps.iter().any(|c| c.positions.contains(&goal));
        if !reached {
            return Err(Violation::GoalNotReached { goal });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Brute-force joint-state oracle
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct OracleLimits {
    pub max_states: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_states: 10_000_000 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleRefusal {
    #[error("state space too large: {0} states exceed the configured limit")]
    StateSpaceTooLarge(usize),
}

/// Exact BFS over joint configurations restricted to connectivity-feasible
/// states. Configurations are canonicalized by sorting positions since robots
/// are interchangeable.
pub struct JointStateOracle<'a> {
    env: &'a GraphEnv,
    robots: usize,
    limits: OracleLimits,
}

impl<'a> JointStateOracle<'a> {
    pub fn new(env: &'a GraphEnv, robots: usize, limits: OracleLimits) -> Self {
        JointStateOracle { env, robots, limits }
    }

    fn capacity_guard(&self) -> Result<(), OracleRefusal> {
        let n = self.env.vertex_count();
        let mut states = 1usize;
        for _ in 0..self.robots {
            states = match states.checked_mul(n) {
                Some(s) if s <= self.limits.max_states => s,
                _ => return Err(OracleRefusal::StateSpaceTooLarge(usize::MAX)),
            };
        }
        Ok(())
    }

    fn successors(&self, state: &[VertexId]) -> Vec<Vec<VertexId>> {
        let mut options: Vec<Vec<VertexId>> = Vec::with_capacity(state.len());
        for &p in state {
            options.push(self.env.movement_neighbors(p).expect("valid vertex"));
        }
        let mut out = Vec::new();
        let mut cursor = vec![0usize; state.len()];
        'outer: loop {
            let mut cand: Vec<VertexId> =
                cursor.iter().enumerate().map(|(i, &c)| options[i][c]).collect();
            cand.sort_unstable();
            if self.env.is_connected_set_with_base(&cand) {
                out.push(cand);
            }
            for i in 0..cursor.len() {
                cursor[i] += 1;
                if cursor[i] < options[i].len() {
                    continue 'outer;
                }
                cursor[i] = 0;
            }
            break;
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// All vertices occupied in any reachable state when starting from the
    /// whole team at base.
    pub fn reachable_vertices(&self) -> Result<Vec<bool>, OracleRefusal> {
        self.capacity_guard()?;
        let start = vec![self.env.base(); self.robots];
        if !self.env.is_connected_set_with_base(&start) {
            return Ok(vec![false; self.env.vertex_count()]);
        }
        let mut reachable = vec![false; self.env.vertex_count()];
        let mut seen = std::collections::HashSet::new();
        let mut queue = std::collections::VecDeque::new();
        seen.insert(start.clone());
        queue.push_back(start.clone());
        reachable[self.env.base()] = true;
        let mut explored = 0usize;
        while let Some(state) = queue.pop_front() {
            explored += 1;
            if explored > self.limits.max_states {
                return Err(OracleRefusal::StateSpaceTooLarge(explored));
            }
            for &v in &state {
                reachable[v] = true;
            }
            for next in self.successors(&state) {
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        Ok(reachable)
    }

    pub fn reachable(&self, goal: VertexId) -> Result<bool, OracleRefusal> {
        Ok(self.reachable_vertices()?[goal])
    }

    /// Minimum cycle length that starts and ends with every robot at base's
    /// start configuration and visits the whole sensing set, if one exists
    /// within the state budget.
    pub fn min_period(&self) -> Result<Option<u32>, OracleRefusal> {
        self.capacity_guard()?;
        let sensing = self.env.sensing();
        let sensing_index: HashMap<VertexId, usize> =
            sensing.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let full: u32 = if sensing.len() >= 32 {
            return Err(OracleRefusal::StateSpaceTooLarge(usize::MAX));
        } else {
            (1u32 << sensing.len()) - 1
        };
        let start = vec![self.env.base(); self.robots];
        if !self.env.is_connected_set_with_base(&start) {
            return Ok(None);
        }
        let mask_of = |state: &[VertexId]| -> u32 {
            let mut m = 0;
            for &v in state {
                if let Some(&i) = sensing_index.get(&v) {
                    m |= 1 << i;
                }
            }
            m
        };
        let start_mask = mask_of(&start);
        let mut seen = std::collections::HashSet::new();
        let mut queue = std::collections::VecDeque::new();
        seen.insert((start.clone(), start_mask));
        queue.push_back((start.clone(), start_mask, 0u32));
        let mut explored = 0usize;
        while let Some((state, mask, t)) = queue.pop_front() {
            explored += 1;
            if explored > self.limits.max_states {
                return Err(OracleRefusal::StateSpaceTooLarge(explored));
            }
            for next in self.successors(&state) {
                let nmask = mask | mask_of(&next);
                if nmask == full && next == start {
                    return Ok(Some(t + 1));
                }
                if seen.insert((next.clone(), nmask)) {
                    queue.push_back((next, nmask, t + 1));
                }
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{GridSpec, SensingSpec};

    fn example_formula() -> CnfFormula {
        CnfFormula::new(
            4,
            vec![[1, 2, 3], [-1, -2, 4], [2, -3, -4]],
        )
        .unwrap()
    }

    #[test]
    fn cmps_instance_counts() {
        let f = example_formula();
        let inst = gen_cmps_from_3sat(&f);
        assert_eq!(inst.env.vertex_count(), 4 * 4 + 3 + 2);
        assert_eq!(inst.robots, 5);
        assert_eq!(inst.time_bound, 6);
        assert!(inst.robots < inst.env.vertex_count() as u32);
        let tiny = CnfFormula::new(1, vec![[1, 1, 1]]).unwrap();
        let tiny_inst = gen_cmps_from_3sat(&tiny);
        assert_eq!(tiny_inst.env.vertex_count(), 7);
        assert_eq!(tiny_inst.robots, 2);
        assert_eq!(tiny_inst.time_bound, 2);
    }

    #[test]
    fn witness_accepted_for_satisfying_assignment() {
        let f = example_formula();
        let inst = gen_cmps_from_3sat(&f);
        let assignment = vec![true, true, true, true];
        assert!(f.satisfied_by(&assignment));
        let plan = encode_cmps_witness(&f, &inst, &assignment).unwrap();
        let claims = Claims {
            visits: Some(vec![inst.vertex("v"), inst.vertex("c1")]),
            periodic: true,
            wi_bound: Some(2 * f.num_clauses() - 1),
            ..Claims::default()
        };
        verify_plan(&inst.env, &plan, &claims).expect("witness must be valid");
        let trace = IdlenessTrace::from_plan(&inst.env, &plan);
        assert_eq!(trace.max_instantaneous_wi(), 2 * f.num_clauses() - 1);
    }

    #[test]
    fn witness_rejected_for_falsifying_assignment() {
        let f = example_formula();
        let inst = gen_cmps_from_3sat(&f);
        // falsifies clause 1 = {x1, x2, x3}
        let assignment = vec![false, false, false, true];
        assert!(!f.satisfied_by(&assignment));
        let plan = encode_cmps_witness(&f, &inst, &assignment).unwrap();
        let verdict = verify_plan(&inst.env, &plan, &Claims::default());
        assert!(matches!(verdict, Err(Violation::Disconnected { .. })), "{verdict:?}");
    }

    fn example_cover() -> SetCoverInstance {
        SetCoverInstance::new(
            5,
            vec![vec![1, 2], vec![2], vec![2, 3], vec![3, 4], vec![4, 5], vec![5]],
            3,
        )
        .unwrap()
    }

    #[test]
    fn cmr_instance_counts() {
        let inst = example_cover();
        let gen = gen_cmr_from_sc(&inst).unwrap();
        assert_eq!(gen.env.vertex_count(), 61);
        assert_eq!(gen.time_bound, 91);
        assert_eq!(gen.robots, 9);
    }

    #[test]
    fn cmr_witness_reaches_goal_in_time() {
        let inst = example_cover();
        let gen = gen_cmr_from_sc(&inst).unwrap();
        let chosen = [0usize, 2, 4];
        assert!(inst.covers(&chosen));
        let plan = encode_cmr_witness(&inst, &gen, &chosen);
        assert!(plan.horizon() as u32 <= gen.time_bound, "{} > {}", plan.horizon(), gen.time_bound);
        let claims = Claims { goal: Some(gen.goal), ..Claims::default() };
        verify_plan(&gen.env, &plan, &claims).expect("cover witness valid");
    }

    #[test]
    fn trivial_cover_instances_rejected() {
        let inst = SetCoverInstance::new(2, vec![vec![1], vec![2]], 2).unwrap();
        assert!(matches!(
            gen_cmr_from_sc(&inst),
            Err(ReductionError::TrivialCover { .. })
        ));
    }

    #[test]
    fn cmrd_placement_roundtrip() {
        let f = example_formula();
        let inst = gen_cmrd_from_3sat(&f);
        assert_eq!(inst.path.len(), 3 * 4 + 3 + 1);
        assert_eq!(inst.robots, 5);
        let assignment = vec![true, true, true, true];
        let placement = cmrd_placement_for_assignment(&inst, &assignment);
        let ok = crate::reachability::verify_relay_placement(
            &inst.path,
            |a, b| inst.has_link(a, b),
            inst.base(),
            &placement,
        )
        .unwrap();
        assert!(ok);
        // removing one required relay breaks the chain
        let partial: Vec<_> = placement[1..].to_vec();
        let broken = crate::reachability::verify_relay_placement(
            &inst.path,
            |a, b| inst.has_link(a, b),
            inst.base(),
            &partial,
        )
        .unwrap();
        assert!(!broken);
    }

    #[test]
    fn oracle_matches_small_examples() {
        let env = crate::reachability::tests::two_robot_chain();
        let w = 3;
        let one = JointStateOracle::new(&env, 1, OracleLimits::default());
        assert!(!one.reachable(w).unwrap());
        let two = JointStateOracle::new(&env, 2, OracleLimits::default());
        assert!(two.reachable(w).unwrap());

        let blocked = crate::reachability::tests::blocked_diamond();
        for r in 1..=3 {
            let oracle = JointStateOracle::new(&blocked, r, OracleLimits::default());
            assert!(!oracle.reachable(2).unwrap(), "r = {r}");
        }
    }

    #[test]
    fn oracle_min_period_on_two_by_two() {
        let env = GraphEnv::grid(&GridSpec {
            width: 2,
            height: 2,
            base_cell: (1, 1),
            sensing_cells: SensingSpec::All,
            r_com: 2.0,
        })
        .unwrap();
        let oracle = JointStateOracle::new(&env, 1, OracleLimits::default());
        assert_eq!(oracle.min_period().unwrap(), Some(4));
    }

    #[test]
    fn dimacs_parse_roundtrip() {
        let text = "c comment\np cnf 4 3\n1 2 3 0\n-1 -2 4 0\n2 -3 -4 0\n";
        let parsed = CnfFormula::parse_dimacs(text).unwrap();
        assert_eq!(parsed, example_formula());
        let bad = CnfFormula::parse_dimacs("p cnf 2 1\n1 2 0\n");
        assert!(matches!(bad, Err(ReductionError::ClauseArity(0, 2))));
    }

    #[test]
    fn verify_plan_rejects_teleport() {
        let env = GraphEnv::grid(&GridSpec {
            width: 5,
            height: 1,
            base_cell: (1, 1),
            sensing_cells: SensingSpec::All,
            r_com: 5.0,
        })
        .unwrap();
        let plan = Plan::new(
            &env,
            vec![
                Configuration::new(vec![0]),
                Configuration::new(vec![2]),
            ],
        );
        let verdict = verify_plan(&env, &plan, &Claims::default());
        assert_eq!(verdict, Err(Violation::Movement { step: 1, robot: 0 }));
    }
}
