//! Idleness bookkeeping and the scalar criteria derived from it: the
//! instantaneous worst idleness series, the windowed worst-idleness estimate
//! and the coverage time.
//!
//! The windowed estimate is the reported quantity for finite runs: the largest
//! gap between consecutive visits of a sensing location, taken strictly inside
//! the window between its first and last visit. The limit-superior of the
//! instantaneous series over an infinite horizon is the idealized criterion;
//! finite runs expose `max_instantaneous_wi` instead.

use thiserror::Error;

use crate::env::{Configuration, GraphEnv, VertexId};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("steps must be recorded in order: got t = {got} after t = {prev}")]
    NonMonotoneStep { got: u32, prev: u32 },
}

/// Windowed worst idleness, or the reason it is undefined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowedWi {
    Value(u32),
    /// Some sensing vertex has fewer than two visits; carries the offender.
    InsufficientVisits(VertexId),
}

impl WindowedWi {
    pub fn value(self) -> Option<u32> {
        match self {
            WindowedWi::Value(v) => Some(v),
            WindowedWi::InsufficientVisits(_) => None,
        }
    }
}

/// Per-sensing-location visit history for one run.
#[derive(Clone, Debug)]
pub struct IdlenessTrace {
    sensing: Vec<VertexId>,
    index_of: Vec<Option<usize>>,
    visit_times: Vec<Vec<u32>>,
    last_visit: Vec<Option<u32>>,
    instantaneous: Vec<u32>,
    horizon: Option<u32>,
    covered_at: Option<u32>,
}

impl IdlenessTrace {
    pub fn new(env: &GraphEnv) -> Self {
        let sensing = env.sensing().to_vec();
        let mut index_of = vec![None; env.vertex_count()];
        for (i, &v) in sensing.iter().enumerate() {
            index_of[v] = Some(i);
        }
        IdlenessTrace {
            visit_times: vec![Vec::new(); sensing.len()],
            last_visit: vec![None; sensing.len()],
            sensing,
            index_of,
            instantaneous: Vec::new(),
            horizon: None,
            covered_at: None,
        }
    }

    pub fn sensing(&self) -> &[VertexId] {
        &self.sensing
    }

    /// Records the configuration at step `t`: every occupied sensing vertex is
    /// visited at `t`, then the instantaneous worst idleness is appended.
    pub fn record_step(&mut self, config: &Configuration, t: u32) -> Result<(), MetricsError> {
        match self.horizon {
            None if t != 0 => return Err(MetricsError::NonMonotoneStep { got: t, prev: 0 }),
            Some(prev) if t != prev + 1 => {
                return Err(MetricsError::NonMonotoneStep { got: t, prev });
            }
            _ => {}
        }
        for &p in &config.positions {
            if let Some(i) = self.index_of[p] {
                if self.last_visit[i] != Some(t) {
                    self.visit_times[i].push(t);
                    self.last_visit[i] = Some(t);
                }
            }
        }
        if self.covered_at.is_none() && self.last_visit.iter().all(Option::is_some) {
            self.covered_at = Some(t);
        }
        let wi_t = self
            .sensing
            .iter()
            .enumerate()
            // By convention idleness starts at zero, so an unvisited vertex has
            // idleness t.
            .map(|(i, _)| t - self.last_visit[i].unwrap_or(0))
            .max()
            .unwrap_or(0);
        self.instantaneous.push(wi_t);
        self.horizon = Some(t);
        Ok(())
    }

    /// Replays a full plan into a fresh trace.
    pub fn from_plan(env: &GraphEnv, plan: &crate::env::Plan) -> Self {
        let mut trace = Self::new(env);
        for (t, config) in plan.steps.iter().enumerate() {
            trace.record_step(config, t as u32).expect("sequential replay");
        }
        trace
    }

    pub fn horizon(&self) -> Option<u32> {
        self.horizon
    }

    pub fn visits(&self, v: VertexId) -> &[u32] {
        match self.index_of[v] {
            Some(i) => &self.visit_times[i],
            None => &[],
        }
    }

    /// Idleness of a sensing vertex at time t per the recorded history.
    pub fn idleness_at(&self, v: VertexId, t: u32) -> u32 {
        let visits = self.visits(v);
        match visits.iter().rev().find(|&&vt| vt <= t) {
            Some(&vt) => t - vt,
            None => t,
        }
    }

    /// The per-step worst idleness series WI_t.
    pub fn instantaneous(&self) -> &[u32] {
        &self.instantaneous
    }

    /// Maximum of the instantaneous series over the run.
    pub fn max_instantaneous_wi(&self) -> u32 {
        self.instantaneous.iter().copied().max().unwrap_or(0)
    }

    /// Largest gap between consecutive visits of any sensing vertex, gaps
    /// taken strictly inside each vertex's first-to-last visit window.
    pub fn worst_idleness_windowed(&self) -> WindowedWi {
        let mut worst = 0u32;
        for (i, times) in self.visit_times.iter().enumerate() {
            if times.len() < 2 {
                return WindowedWi::InsufficientVisits(self.sensing[i]);
            }
            for pair in times.windows(2) {
                worst = worst.max(pair[1] - pair[0]);
            }
        }
        WindowedWi::Value(worst)
    }

    /// First step at which every sensing vertex has been visited, or the
    /// horizon cap `t_o` if coverage was never reached.
    pub fn coverage_time(&self, t_o: u32) -> u32 {
        match self.covered_at {
            Some(t) => t.min(t_o),
            None => t_o,
        }
    }

    pub fn covered_at(&self) -> Option<u32> {
        self.covered_at
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{GraphEnv, GridSpec, SensingSpec};

    fn single_sensing_env() -> GraphEnv {
        GraphEnv::grid(&GridSpec {
            width: 3,
            height: 1,
            base_cell: (1, 1),
            sensing_cells: SensingSpec::Cells(vec![(2, 1)]),
            r_com: 2.0,
        })
        .unwrap()
    }

    #[test]
    fn sitting_on_the_vertex_keeps_wi_zero() {
        let env = single_sensing_env();
        let v = env.vertex_at(2, 1).unwrap();
        let mut trace = IdlenessTrace::new(&env);
        for t in 0..10 {
            trace.record_step(&Configuration::new(vec![v]), t).unwrap();
        }
        assert!(trace.instantaneous().iter().all(|&wi| wi == 0));
    }

    #[test]
    fn idleness_between_visits() {
        let env = single_sensing_env();
        let v = env.vertex_at(2, 1).unwrap();
        let b = env.base();
        let mut trace = IdlenessTrace::new(&env);
        for t in 0..=10 {
            let pos = if t % 5 == 0 { v } else { b };
            trace.record_step(&Configuration::new(vec![pos]), t).unwrap();
        }
        assert_eq!(trace.visits(v), &[0, 5, 10]);
        assert_eq!(trace.idleness_at(v, 7), 2);
        assert_eq!(trace.max_instantaneous_wi(), 4);
        assert_eq!(trace.worst_idleness_windowed(), WindowedWi::Value(5));
    }

    #[test]
    fn windowed_wi_takes_max_of_maxima() {
        let env = GraphEnv::grid(&GridSpec {
            width: 4,
            height: 1,
            base_cell: (1, 1),
            sensing_cells: SensingSpec::Cells(vec![(2, 1), (3, 1)]),
            r_com: 4.0,
        })
        .unwrap();
        let a = env.vertex_at(2, 1).unwrap();
        let c = env.vertex_at(3, 1).unwrap();
        let b = env.base();
        let mut trace = IdlenessTrace::new(&env);
        // a visited at 0,3,7 (gaps 3,4); c visited at 0,7,9 (gaps 7,2)
        let schedule_a = [0u32, 3, 7];
        let schedule_c = [0u32, 7, 9];
        for t in 0..=9 {
            let pa = if schedule_a.contains(&t) { a } else { b };
            let pc = if schedule_c.contains(&t) { c } else { b };
            trace.record_step(&Configuration::new(vec![pa, pc]), t).unwrap();
        }
        assert_eq!(trace.worst_idleness_windowed(), WindowedWi::Value(7));
    }

    #[test]
    fn insufficient_visits_carries_vertex() {
        let env = single_sensing_env();
        let v = env.vertex_at(2, 1).unwrap();
        let mut trace = IdlenessTrace::new(&env);
        trace.record_step(&Configuration::new(vec![env.base()]), 0).unwrap();
        assert_eq!(trace.worst_idleness_windowed(), WindowedWi::InsufficientVisits(v));
    }

    #[test]
    fn coverage_time_caps_at_horizon() {
        let env = single_sensing_env();
        let b = env.base();
        let v = env.vertex_at(2, 1).unwrap();
        let mut trace = IdlenessTrace::new(&env);
        for t in 0..5 {
            trace.record_step(&Configuration::new(vec![b]), t).unwrap();
        }
        assert_eq!(trace.coverage_time(1800), 1800);
        trace.record_step(&Configuration::new(vec![v]), 5).unwrap();
        assert_eq!(trace.coverage_time(1800), 5);
        // occupied from the start means zero coverage time
        let mut t2 = IdlenessTrace::new(&env);
        t2.record_step(&Configuration::new(vec![v]), 0).unwrap();
        assert_eq!(t2.coverage_time(1800), 0);
    }

    #[test]
    fn out_of_order_steps_rejected() {
        let env = single_sensing_env();
        let mut trace = IdlenessTrace::new(&env);
        trace.record_step(&Configuration::new(vec![env.base()]), 0).unwrap();
        let err = trace.record_step(&Configuration::new(vec![env.base()]), 2);
        assert!(matches!(err, Err(MetricsError::NonMonotoneStep { got: 2, prev: 0 })));
    }
}
