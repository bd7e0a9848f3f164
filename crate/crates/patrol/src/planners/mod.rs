//! Planners for convex grid areas: the short-horizon greedy (SH), its
//! cooperative extension built on formation matching (SHC), and the
//! full-horizon tour follower (FH).

mod assignment;
mod fh;
mod hungarian;
mod labels;
mod sh;
mod shc;
mod steiner;

pub use assignment::{assignment_matrix, AssignmentMatrix};
pub use fh::{build_fh_tour, plan_fh, Tour};
pub use hungarian::min_cost_assignment;
pub use labels::{Label, LabeledTree};
pub use sh::plan_sh;
pub use shc::{match_formation, plan_shc, FormationMatch, ShcConfig};
pub use steiner::{steiner_tree_min_nonterminals, SteinerError, SteinerTree};

use thiserror::Error;

use crate::env::{Configuration, GraphEnv, GraphKind, MoveFeasibility, Plan, VertexId};
use crate::metrics::IdlenessTrace;

/// Distance and inter-robot weights of the goal-value function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightParams {
    pub w0: f64,
    pub w1: f64,
}

impl WeightParams {
    pub const ZERO: WeightParams = WeightParams { w0: 0.0, w1: 0.0 };

    pub fn new(w0: f64, w1: f64) -> Self {
        WeightParams { w0, w1 }
    }
}

/// Shared run controls for all planners.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub horizon: u32,
    /// Abort the run as soon as every sensing location has been visited once.
    pub stop_on_coverage: bool,
}

impl RunOptions {
    pub fn horizon(horizon: u32) -> Self {
        RunOptions { horizon, stop_on_coverage: false }
    }

    pub fn until_coverage(horizon: u32) -> Self {
        RunOptions { horizon, stop_on_coverage: true }
    }
}

/// A finished run: the executable plan plus its idleness bookkeeping.
#[derive(Clone, Debug)]
pub struct PlanRun {
    pub plan: Plan,
    pub trace: IdlenessTrace,
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("at least one robot is required")]
    NoRobots,
    #[error("planner requires a grid environment")]
    NotAGrid,
    #[error("sensing set is empty")]
    NoSensing,
    #[error("sensing vertex {0} unreachable in the movement graph")]
    UnreachableSensing(VertexId),
    #[error("infeasible with {robots} robots: {detail} (needs at least {required})")]
    Infeasible { robots: usize, required: usize, detail: String },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Planner families selectable by name across the library and CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlannerId {
    Sh,
    Shc,
    Fh,
}

impl std::str::FromStr for PlannerId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sh" => Ok(PlannerId::Sh),
            "shc" => Ok(PlannerId::Shc),
            "fh" => Ok(PlannerId::Fh),
            other => Err(format!("unknown planner '{other}'")),
        }
    }
}

/// One connectivity-constrained greedy move: among the neighbor options of
/// `from` (including staying), the one closest to `target` that keeps the
/// network connected, ties broken by lowest vertex id. `fixed` holds the other
/// robots' positions, already updated for lower-indexed robots this step.
pub(crate) fn constrained_step_toward(
    env: &GraphEnv,
    fixed: &[VertexId],
    from: VertexId,
    target: VertexId,
) -> VertexId {
    let check = MoveFeasibility::new(env, fixed);
    let row = env.dist_row(GraphKind::Movement, target);
    let mut best = from;
    let mut best_d = u32::MAX;
    for &cand in env.movement_neighbors(from).expect("valid vertex").iter() {
        if row[cand] < best_d && check.feasible(cand) {
            best = cand;
            best_d = row[cand];
        }
    }
    // Staying is always feasible because the previous configuration was.
    debug_assert!(best_d < u32::MAX || check.feasible(from));
    best
}

/// Per-step simulation scaffold shared by the planners: positions, idleness
/// trace and the plan under construction.
pub(crate) struct Simulation<'a> {
    pub env: &'a GraphEnv,
    pub positions: Vec<VertexId>,
    pub steps: Vec<Configuration>,
    pub trace: IdlenessTrace,
    pub t: u32,
}

impl<'a> Simulation<'a> {
    pub fn at_base(env: &'a GraphEnv, robots: usize) -> Self {
        let config = Configuration::uniform(env.base(), robots);
        let mut trace = IdlenessTrace::new(env);
        trace.record_step(&config, 0).expect("first step");
        Simulation {
            env,
            positions: config.positions.clone(),
            steps: vec![config],
            trace,
            t: 0,
        }
    }

    /// Commits the current positions as the configuration of step t+1.
    pub fn commit(&mut self) {
        self.t += 1;
        let config = Configuration::new(self.positions.clone());
        self.trace.record_step(&config, self.t).expect("sequential steps");
        self.steps.push(config);
    }

    pub fn covered(&self) -> bool {
        self.trace.covered_at().is_some()
    }

    pub fn finish(self) -> PlanRun {
        PlanRun { plan: Plan::new(self.env, self.steps), trace: self.trace }
    }

    /// Other robots' positions with robot `i` excluded.
    pub fn fixed_except(&self, i: usize) -> Vec<VertexId> {
        let mut fixed = Vec::with_capacity(self.positions.len() - 1);
        for (j, &p) in self.positions.iter().enumerate() {
            if j != i {
                fixed.push(p);
            }
        }
        fixed
    }
}
