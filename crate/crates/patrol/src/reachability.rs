//! Reachability under the connectivity constraint: the marking fixpoint that
//! decides traversability with n-1 robots, a witness plan constructor for it,
//! greedy relay dropping along a fixed path, and minimum chain sizes.

use thiserror::Error;

use crate::env::{Configuration, GraphEnv, GraphKind, Plan, VertexId};

#[derive(Debug, Error)]
pub enum ReachError {
    #[error("robot count must be at least 1")]
    NoRobots,
    #[error("placement vertex {0} is not on the path")]
    PlacementOffPath(VertexId),
    #[error("path must start at the base station")]
    PathNotAtBase,
}

/// Outcome of the marking fixpoint.
#[derive(Clone, Debug)]
pub struct TraverseResult {
    pub traverse: bool,
    pub parent: Vec<Option<VertexId>>,
    pub marked: Vec<bool>,
    pub mark_order: Vec<VertexId>,
}

impl TraverseResult {
    pub fn marked_count(&self) -> usize {
        self.marked.iter().filter(|&&m| m).count()
    }
}

/// Fixpoint marking: a vertex becomes marked once it has a marked movement
/// neighbor (the parent) and a marked connectivity neighbor. Vertices are
/// scanned in ascending id order, which fixes `mark_order`; the fixpoint
/// itself is order-independent.
pub fn traverse(env: &GraphEnv) -> TraverseResult {
    let n = env.vertex_count();
    let mut marked = vec![false; n];
    let mut parent: Vec<Option<VertexId>> = vec![None; n];
    let mut mark_order = Vec::new();
    marked[env.base()] = true;
    let mut added = true;
    while added {
        added = false;
        for v in 0..n {
            if marked[v] {
                continue;
            }
            let p = env
                .neighbors(GraphKind::Movement, v)
                .iter()
                .copied()
                .find(|&w| marked[w]);
            let connected = env
                .neighbors(GraphKind::Connectivity, v)
                .iter()
                .any(|&u| marked[u]);
            if let (Some(p), true) = (p, connected) {
                marked[v] = true;
                parent[v] = Some(p);
                mark_order.push(v);
                added = true;
            }
        }
    }
    let traverse = env.sensing().iter().all(|&v| marked[v]);
    TraverseResult { traverse, parent, marked, mark_order }
}

/// Builds an executable plan with n-1 robots that visits every marked vertex,
/// walking groups down the parent tree in mark order. Every marked vertex
/// keeps one robot, so the occupied set always equals the marked prefix and
/// stays connected.
pub fn traversal_witness_plan(env: &GraphEnv, result: &TraverseResult) -> Plan {
    let n = env.vertex_count();
    let robots = n - 1;
    // Subtree sizes over the parent tree, counting only marked vertices.
    let mut subtree = vec![0usize; n];
    for &v in result.mark_order.iter().rev() {
        subtree[v] += 1;
        let p = result.parent[v].expect("marked vertices have parents");
        subtree[p] += subtree[v];
    }

    // Assign each robot a destination so that robots destined for a subtree
    // are exactly the ones that must pass through its root.
    let mut dest = vec![env.base(); robots];
    let mut next_free = vec![0usize; n];
    // Children grouped per parent in mark order.
    let mut children: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    for &v in &result.mark_order {
        children[result.parent[v].unwrap()].push(v);
    }
    // Robot interval [cursor, cursor + subtree[v]) rides toward v's subtree.
    fn assign(
        v: VertexId,
        start: usize,
        children: &[Vec<VertexId>],
        subtree: &[usize],
        dest: &mut [VertexId],
        base: VertexId,
    ) {
        let mut cursor = start;
        if v != base {
            dest[cursor] = v;
            cursor += 1;
        }
        for &c in &children[v] {
            assign(c, cursor, children, subtree, dest, base);
            cursor += subtree[c];
        }
    }
    assign(env.base(), 0, &children, &subtree, &mut dest, env.base());
    let _ = &mut next_free;

    // Path from base to each destination through the parent tree.
    let mut path_to = vec![Vec::new(); n];
    for &v in &result.mark_order {
        let p = result.parent[v].unwrap();
        let mut path = path_to[p].clone();
        path.push(v);
        path_to[v] = path;
    }

    // A robot's position after k marks is the deepest marked ancestor of its
    // destination; marks happen parent-before-child, so each step moves the
    // robots bound for the fresh vertex along one movement edge.
    let mut marked_step = vec![usize::MAX; n];
    for (i, &v) in result.mark_order.iter().enumerate() {
        marked_step[v] = i;
    }
    let mut steps = Vec::with_capacity(result.mark_order.len() + 1);
    for k in 0..=result.mark_order.len() {
        let mut positions = Vec::with_capacity(robots);
        for robot_dest in dest.iter().take(robots) {
            let mut pos = env.base();
            for &a in &path_to[*robot_dest] {
                if marked_step[a] < k {
                    pos = a;
                } else {
                    break;
                }
            }
            positions.push(pos);
        }
        steps.push(Configuration::new(positions));
    }
    Plan::new(env, steps)
}

/// Result of the greedy relay walk along a path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelayDrop {
    /// Relays are path indices where a robot stays behind.
    Success { relays: Vec<usize> },
    /// The head could not advance past `reached` with the robots available.
    Failure { reached: usize, relays: Vec<usize> },
}

impl RelayDrop {
    pub fn succeeded(&self) -> bool {
        matches!(self, RelayDrop::Success { .. })
    }

    pub fn relay_count(&self) -> usize {
        match self {
            RelayDrop::Success { relays } | RelayDrop::Failure { relays, .. } => relays.len(),
        }
    }
}

/// Greedy relay dropping: the group advances along the path until the next
/// step would disconnect the head from the chain of base plus placed relays,
/// then leaves one robot at the current vertex. Succeeds iff the head reaches
/// the end with at most r-1 relays placed. Robots behind the head travel
/// co-located with it, so the chain test is adjacency of the head to the
/// anchor set.
pub fn drop_relays_on_path<F>(
    path: &[VertexId],
    has_link: F,
    base: VertexId,
    robots: usize,
) -> Result<RelayDrop, ReachError>
where
    F: Fn(VertexId, VertexId) -> bool,
{
    if robots < 1 {
        return Err(ReachError::NoRobots);
    }
    if path.first() != Some(&base) {
        return Err(ReachError::PathNotAtBase);
    }
    let linked = |v: VertexId, anchors: &[VertexId]| -> bool {
        anchors.iter().any(|&a| a == v || has_link(a, v))
    };
    let mut anchors = vec![base];
    let mut relays = Vec::new();
    for i in 1..path.len() {
        if linked(path[i], &anchors) {
            continue;
        }
        // Next step would break the chain: park a relay where the group stands.
        if relays.len() + 1 >= robots {
            return Ok(RelayDrop::Failure { reached: i - 1, relays });
        }
        relays.push(i - 1);
        anchors.push(path[i - 1]);
        if !linked(path[i], &anchors) {
            return Ok(RelayDrop::Failure { reached: i - 1, relays });
        }
    }
    Ok(RelayDrop::Success { relays })
}

/// Convenience wrapper over an environment's connectivity edges.
pub fn drop_relays_on_env_path(
    env: &GraphEnv,
    path: &[VertexId],
    robots: usize,
) -> Result<RelayDrop, ReachError> {
    drop_relays_on_path(
        path,
        |a, b| env.has_edge(GraphKind::Connectivity, a, b),
        env.base(),
        robots,
    )
}

/// Checks a given relay placement: walking the path and freezing relays at the
/// placement vertices, the head must stay linked to the anchor chain at every
/// step.
pub fn verify_relay_placement<F>(
    path: &[VertexId],
    has_link: F,
    base: VertexId,
    placement: &[VertexId],
) -> Result<bool, ReachError>
where
    F: Fn(VertexId, VertexId) -> bool,
{
    if path.first() != Some(&base) {
        return Err(ReachError::PathNotAtBase);
    }
    for &p in placement {
        if !path.contains(&p) {
            return Err(ReachError::PlacementOffPath(p));
        }
    }
    let mut anchors = vec![base];
    for (i, &v) in path.iter().enumerate().skip(1) {
        let linked = anchors.iter().any(|&a| a == v || has_link(a, v));
        if !linked {
            return Ok(false);
        }
        // Freeze on first pass over a placement vertex.
        if placement.contains(&v) && !anchors.contains(&v) {
            anchors.push(v);
        }
        let _ = i;
    }
    Ok(true)
}

/// Interior vertex count of the shortest connectivity path, i.e. how many
/// relays a chain between the two vertices needs.
pub fn min_relays_between(env: &GraphEnv, s: VertexId, d: VertexId) -> Option<u32> {
    env.dist(GraphKind::Connectivity, s, d)
        .hops()
        .map(|h| h.saturating_sub(1))
}
