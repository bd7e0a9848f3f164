//! Goal-value matrix: instantaneous idleness weighted against the robot's own
//! distance and the closest other robot's distance to each sensing location.

use crate::env::{GraphEnv, GraphKind, VertexId};
use crate::planners::WeightParams;

/// Dense |V_S| x r matrix of goal values.
#[derive(Clone, Debug)]
pub struct AssignmentMatrix {
    values: Vec<f64>,
    robots: usize,
}

impl AssignmentMatrix {
    pub fn value(&self, sensing_index: usize, robot: usize) -> f64 {
        self.values[sensing_index * self.robots + robot]
    }

    pub fn robots(&self) -> usize {
        self.robots
    }

    pub fn sensing_count(&self) -> usize {
        if self.robots == 0 {
            0
        } else {
            self.values.len() / self.robots
        }
    }

    /// Best goal for a robot: highest value, ties to the lowest vertex id
    /// (sensing vertices are scanned in ascending id order).
    pub fn best_goal(&self, sensing: &[VertexId], robot: usize) -> (VertexId, f64) {
        let mut best = (sensing[0], f64::NEG_INFINITY);
        for (idx, &v) in sensing.iter().enumerate() {
            let val = self.value(idx, robot);
            if val > best.1 {
                best = (v, val);
            }
        }
        best
    }
}

/// A(v, i) = I(v) + w0 * dist(p_i, v) + w1 * min_{j != i} dist(p_j, v).
/// With a single robot the inter-robot term is zero, recovering the
/// single-robot policy. Unreachable distances are capped at the vertex count.
pub fn assignment_matrix(
    env: &GraphEnv,
    positions: &[VertexId],
    idleness: &[f64],
    params: &WeightParams,
) -> AssignmentMatrix {
    let sensing = env.sensing();
    assert_eq!(idleness.len(), sensing.len(), "idleness per sensing vertex");
    let robots = positions.len();
    let cap = env.vertex_count() as u32;
    let dist_rows: Vec<&[u32]> = positions
        .iter()
        .map(|&p| env.dist_row(GraphKind::Movement, p))
        .collect();
    let mut values = Vec::with_capacity(sensing.len() * robots);
    for (idx, &v) in sensing.iter().enumerate() {
        // Min and runner-up over robots, so min over j != i is O(1) per robot.
        let mut min1 = u32::MAX;
        let mut min1_robot = usize::MAX;
        let mut min2 = u32::MAX;
        for (i, row) in dist_rows.iter().enumerate() {
            let d = row[v].min(cap);
            if d < min1 {
                min2 = min1;
                min1 = d;
                min1_robot = i;
            } else if d < min2 {
                min2 = d;
            }
        }
        for (i, row) in dist_rows.iter().enumerate() {
            let own = row[v].min(cap) as f64;
            let other = if robots <= 1 {
                0.0
            } else if i == min1_robot {
                min2.min(cap) as f64
            } else {
                min1 as f64
            };
            values.push(idleness[idx] + params.w0 * own + params.w1 * other);
        }
    }
    AssignmentMatrix { values, robots }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{GridSpec, SensingSpec};

    fn line_env() -> GraphEnv {
        GraphEnv::grid(&GridSpec {
            width: 3,
            height: 1,
            base_cell: (1, 1),
            sensing_cells: SensingSpec::Cells(vec![(2, 1)]),
            r_com: 3.0,
        })
        .unwrap()
    }

    #[test]
    fn zero_weights_reduce_to_idleness() {
        let env = line_env();
        let m = assignment_matrix(&env, &[0, 2], &[5.0], &WeightParams::ZERO);
        assert_eq!(m.value(0, 0), 5.0);
        assert_eq!(m.value(0, 1), 5.0);
    }

    #[test]
    fn hand_evaluated_entry() {
        let env = line_env();
        // robots at cells 1 and 3, sensing cell 2, idleness 5, w0 = -1, w1 = 1
        let m = assignment_matrix(&env, &[0, 2], &[5.0], &WeightParams::new(-1.0, 1.0));
        assert_eq!(m.value(0, 0), 5.0 - 1.0 + 1.0);
        assert_eq!(m.value(0, 1), 5.0 - 1.0 + 1.0);
    }

    #[test]
    fn single_robot_ignores_other_term() {
        let env = line_env();
        let a = assignment_matrix(&env, &[0], &[2.0], &WeightParams::new(0.0, 7.0));
        let b = assignment_matrix(&env, &[0], &[2.0], &WeightParams::new(0.0, 0.0));
        assert_eq!(a.value(0, 0), b.value(0, 0));
    }
}
