//! Short-horizon greedy planner: every step, every robot re-targets the
//! sensing location with the highest goal value and takes the neighbor step
//! closest to it that keeps the network connected.

use crate::env::GraphEnv;
use crate::planners::{
    assignment_matrix, constrained_step_toward, PlanError, PlanRun, RunOptions, Simulation,
    WeightParams,
};

/// Robots start at the base station and are processed in ascending id within
/// a step, each seeing the already-updated positions of lower ids.
pub fn plan_sh(
    env: &GraphEnv,
    robots: usize,
    opts: RunOptions,
    params: &WeightParams,
) -> Result<PlanRun, PlanError> {
    if robots == 0 {
        return Err(PlanError::NoRobots);
    }
    if env.sensing().is_empty() {
        return Err(PlanError::NoSensing);
    }
    let mut sim = Simulation::at_base(env, robots);
    let sensing = env.sensing();
    while sim.t < opts.horizon {
        if opts.stop_on_coverage && sim.covered() {
            break;
        }
        let idleness: Vec<f64> = sensing
            .iter()
            .map(|&v| sim.trace.idleness_at(v, sim.t) as f64)
            .collect();
        let matrix = assignment_matrix(env, &sim.positions, &idleness, params);
        for i in 0..robots {
            let (goal, _) = matrix.best_goal(sensing, i);
            let fixed = sim.fixed_except(i);
            sim.positions[i] = constrained_step_toward(env, &fixed, sim.positions[i], goal);
        }
        sim.commit();
    }
    Ok(sim.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{GraphEnv, GridSpec, SensingSpec};
    use crate::reductions::{verify_plan, Claims};

    #[test]
    fn zero_horizon_yields_single_config() {
        let env = GraphEnv::grid(&GridSpec {
            width: 5,
            height: 5,
            base_cell: (1, 1),
            sensing_cells: SensingSpec::All,
            r_com: 8.0,
        })
        .unwrap();
        let run = plan_sh(&env, 2, RunOptions::horizon(0), &WeightParams::ZERO).unwrap();
        assert_eq!(run.plan.steps.len(), 1);
        assert_eq!(run.plan.steps[0].positions, vec![env.base(); 2]);
    }

    #[test]
    fn plans_are_deterministic_and_feasible() {
        let env = GraphEnv::grid(&GridSpec {
            width: 8,
            height: 8,
            base_cell: (1, 1),
            sensing_cells: SensingSpec::All,
            r_com: 4.0,
        })
        .unwrap();
        let params = WeightParams::new(-1.0, 0.5);
        let a = plan_sh(&env, 3, RunOptions::horizon(60), &params).unwrap();
        let b = plan_sh(&env, 3, RunOptions::horizon(60), &params).unwrap();
        assert_eq!(a.plan, b.plan);
        verify_plan(&env, &a.plan, &Claims::default()).expect("feasible");
    }

    #[test]
    fn covers_small_grid_and_aborts_early() {
        let env = GraphEnv::grid(&GridSpec {
            width: 6,
            height: 6,
            base_cell: (1, 1),
            sensing_cells: SensingSpec::All,
            r_com: 9.0,
        })
        .unwrap();
        let run = plan_sh(&env, 3, RunOptions::until_coverage(300), &WeightParams::new(-1.0, 1.0))
            .unwrap();
        let ct = run.trace.coverage_time(300);
        assert!(ct < 300, "expected coverage, got CT = {ct}");
        assert_eq!(run.plan.horizon() as u32, ct);
    }
}
