//! World model: a shared vertex set with separate movement and connectivity
//! edge sets, a base station and a set of sensing locations.
//!
//! Grids encode cells as dense vertex ids via a bijective (x, y) codec so
//! adjacency and distance lookups stay O(1). General graphs are loaded from
//! explicit edge lists. Environments are immutable after construction; the
//! all-pairs BFS distance tables are built lazily per edge set and cached,
//! which keeps first access idempotent under concurrent use.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub type VertexId = usize;

/// Which of the two edge sets a query runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GraphKind {
    Movement,
    Connectivity,
}

/// Hop count between two vertices, with disconnection as an explicit variant
/// rather than a sentinel integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distance {
    Hops(u32),
    Unreachable,
}

impl Distance {
    pub fn hops(self) -> Option<u32> {
        match self {
            Distance::Hops(h) => Some(h),
            Distance::Unreachable => None,
        }
    }

    pub fn is_reachable(self) -> bool {
        matches!(self, Distance::Hops(_))
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Distance {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Distance::Hops(a), Distance::Hops(b)) => a.cmp(b),
            (Distance::Hops(_), Distance::Unreachable) => std::cmp::Ordering::Less,
            (Distance::Unreachable, Distance::Hops(_)) => std::cmp::Ordering::Greater,
            (Distance::Unreachable, Distance::Unreachable) => std::cmp::Ordering::Equal,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Hops(h) => write!(f, "{h}"),
            Distance::Unreachable => write!(f, "unreachable"),
        }
    }
}

const UNREACHED: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("cell ({0}, {1}) outside grid {2}x{3}")]
    CellOutOfBounds(u32, u32, u32, u32),
    #[error("communication range must be positive, got {0}")]
    NonPositiveRange(f64),
    #[error("vertex {0} out of range (n = {1})")]
    VertexOutOfRange(VertexId, usize),
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("environment must contain at least one vertex")]
    Empty,
}

/// Grid description: cells are unit squares, 1-indexed by (x, y).
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub width: u32,
    pub height: u32,
    pub base_cell: (u32, u32),
    pub sensing_cells: SensingSpec,
    pub r_com: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SensingSpec {
    All,
    Cells(Vec<(u32, u32)>),
}

/// Positions of all robots at one time step; index is the robot id. Multiple
/// robots may share a vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub positions: Vec<VertexId>,
}

impl Configuration {
    pub fn new(positions: Vec<VertexId>) -> Self {
        Configuration { positions }
    }

    pub fn uniform(v: VertexId, robots: usize) -> Self {
        Configuration { positions: vec![v; robots] }
    }

    pub fn robots(&self) -> usize {
        self.positions.len()
    }
}

/// A sequence of configurations bound to a specific environment by hash.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub steps: Vec<Configuration>,
    pub env_hash: String,
}

impl Plan {
    pub fn new(env: &GraphEnv, steps: Vec<Configuration>) -> Self {
        Plan { steps, env_hash: env.hash().to_string() }
    }

    pub fn robots(&self) -> usize {
        self.steps.first().map_or(0, Configuration::robots)
    }

    /// Number of moves, i.e. steps.len() - 1 for a non-empty plan.
    pub fn horizon(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }
}

/// Dual-graph environment: movement edges, connectivity edges, base station
/// and sensing set over one vertex set.
pub struct GraphEnv {
    n: usize,
    movement: Vec<Vec<VertexId>>,
    connectivity: Vec<Vec<VertexId>>,
    base: VertexId,
    sensing: Vec<VertexId>,
    sensing_mask: Vec<bool>,
    grid: Option<GridShape>,
    names: Option<Vec<String>>,
    hash: String,
    dist_movement: OnceLock<Vec<Vec<u32>>>,
    dist_connectivity: OnceLock<Vec<Vec<u32>>>,
}

#[derive(Clone, Copy, Debug)]
struct GridShape {
    width: u32,
    height: u32,
    r_com: f64,
}

impl fmt::Debug for GraphEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GraphEnv")
            .field("n", &self.n)
            .field("base", &self.base)
            .field("sensing", &self.sensing.len())
            .field("hash", &self.hash)
            .finish()
    }
}

fn normalize_edges(
    n: usize,
    edges: &[(VertexId, VertexId)],
) -> Result<BTreeSet<(VertexId, VertexId)>, EnvError> {
    let mut set = BTreeSet::new();
    for &(a, b) in edges {
        if a >= n {
            return Err(EnvError::VertexOutOfRange(a, n));
        }
        if b >= n {
            return Err(EnvError::VertexOutOfRange(b, n));
        }
        if a == b {
            return Err(EnvError::SelfLoop(a));
        }
        set.insert((a.min(b), a.max(b)));
    }
    Ok(set)
}

fn adjacency(n: usize, edges: &BTreeSet<(VertexId, VertexId)>) -> Vec<Vec<VertexId>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    adj
}

impl GraphEnv {
    pub fn from_parts(
        n: usize,
        movement_edges: &[(VertexId, VertexId)],
        connectivity_edges: &[(VertexId, VertexId)],
        base: VertexId,
        sensing: &[VertexId],
        names: Option<Vec<String>>,
    ) -> Result<Self, EnvError> {
        if n == 0 {
            return Err(EnvError::Empty);
        }
        if base >= n {
            return Err(EnvError::VertexOutOfRange(base, n));
        }
        for &v in sensing {
            if v >= n {
                return Err(EnvError::VertexOutOfRange(v, n));
            }
        }
        let em = normalize_edges(n, movement_edges)?;
        let ec = normalize_edges(n, connectivity_edges)?;
        let mut sensing: Vec<VertexId> = sensing.to_vec();
        sensing.sort_unstable();
        sensing.dedup();
        let mut mask = vec![false; n];
        for &v in &sensing {
            mask[v] = true;
        }
        let hash = Self::compute_hash(n, &em, &ec, base, &sensing);
        Ok(GraphEnv {
            n,
            movement: adjacency(n, &em),
            connectivity: adjacency(n, &ec),
            base,
            sensing,
            sensing_mask: mask,
            grid: None,
            names,
            hash,
            dist_movement: OnceLock::new(),
            dist_connectivity: OnceLock::new(),
        })
    }

    /// Builds a grid world: movement edges join the eight neighbors of a cell,
    /// connectivity edges join cell pairs whose center distance is at most
    /// `r_com`.
    pub fn grid(spec: &GridSpec) -> Result<Self, EnvError> {
        let (w, h) = (spec.width, spec.height);
        if w == 0 || h == 0 {
            return Err(EnvError::Empty);
        }
        if spec.r_com <= 0.0 {
            return Err(EnvError::NonPositiveRange(spec.r_com));
        }
        let check = |(x, y): (u32, u32)| -> Result<(), EnvError> {
            if x < 1 || x > w || y < 1 || y > h {
                Err(EnvError::CellOutOfBounds(x, y, w, h))
            } else {
                Ok(())
            }
        };
        check(spec.base_cell)?;
        let n = (w * h) as usize;
        let id = |x: u32, y: u32| -> VertexId { ((y - 1) * w + (x - 1)) as usize };

        let mut em = Vec::new();
        for y in 1..=h {
            for x in 1..=w {
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let nx = x as i64 + dx;
                        let ny = y as i64 + dy;
                        if nx >= 1 && nx <= w as i64 && ny >= 1 && ny <= h as i64 {
                            em.push((id(x, y), id(nx as u32, ny as u32)));
                        }
                    }
                }
            }
        }

        // Squared comparison keeps the range test exact for representable r_com.
        let r2 = spec.r_com * spec.r_com;
        let mut ec = Vec::new();
        for a in 0..n {
            let (ax, ay) = ((a as u32 % w) as i64, (a as u32 / w) as i64);
            for b in (a + 1)..n {
                let (bx, by) = ((b as u32 % w) as i64, (b as u32 / w) as i64);
                let d2 = ((ax - bx) * (ax - bx) + (ay - by) * (ay - by)) as f64;
                if d2 <= r2 {
                    ec.push((a, b));
                }
            }
        }

        let sensing: Vec<VertexId> = match &spec.sensing_cells {
            SensingSpec::All => (0..n).collect(),
            SensingSpec::Cells(cells) => {
                let mut out = Vec::with_capacity(cells.len());
                for &c in cells {
                    check(c)?;
                    out.push(id(c.0, c.1));
                }
                out
            }
        };

        let mut env = Self::from_parts(n, &em, &ec, id(spec.base_cell.0, spec.base_cell.1), &sensing, None)?;
        env.grid = Some(GridShape { width: w, height: h, r_com: spec.r_com });
        Ok(env)
    }

    fn compute_hash(
        n: usize,
        em: &BTreeSet<(VertexId, VertexId)>,
        ec: &BTreeSet<(VertexId, VertexId)>,
        base: VertexId,
        sensing: &[VertexId],
    ) -> String {
        let mut hasher = Sha256::new();
        hasher.update(n.to_le_bytes());
        hasher.update(base.to_le_bytes());
        hasher.update([0xEu8]);
        for &(a, b) in em {
            hasher.update(a.to_le_bytes());
            hasher.update(b.to_le_bytes());
        }
        hasher.update([0xCu8]);
        for &(a, b) in ec {
            hasher.update(a.to_le_bytes());
            hasher.update(b.to_le_bytes());
        }
        hasher.update([0x5u8]);
        for &v in sensing {
            hasher.update(v.to_le_bytes());
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> VertexId {
        self.base
    }

    pub fn sensing(&self) -> &[VertexId] {
        &self.sensing
    }

    pub fn is_sensing(&self, v: VertexId) -> bool {
        self.sensing_mask[v]
    }

    /// Stable identity of the environment; plans carry it to prevent replay
    /// against the wrong world.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn is_grid(&self) -> bool {
        self.grid.is_some()
    }

    pub fn grid_size(&self) -> Option<(u32, u32)> {
        self.grid.map(|g| (g.width, g.height))
    }

    pub fn r_com(&self) -> Option<f64> {
        self.grid.map(|g| g.r_com)
    }

    /// Grid cell of a vertex, 1-indexed. Only valid for grid environments.
    pub fn cell_of(&self, v: VertexId) -> Option<(u32, u32)> {
        self.grid.map(|g| ((v as u32 % g.width) + 1, (v as u32 / g.width) + 1))
    }

    /// Vertex of a grid cell, 1-indexed.
    pub fn vertex_at(&self, x: u32, y: u32) -> Option<VertexId> {
        let g = self.grid?;
        if x < 1 || x > g.width || y < 1 || y > g.height {
            return None;
        }
        Some(((y - 1) * g.width + (x - 1)) as usize)
    }

    /// Symbolic vertex name when present (reduction instances), else the id.
    pub fn vertex_name(&self, v: VertexId) -> String {
        match &self.names {
            Some(names) => names[v].clone(),
            None => match self.cell_of(v) {
                Some((x, y)) => format!("({x},{y})"),
                None => v.to_string(),
            },
        }
    }

    pub fn neighbors(&self, kind: GraphKind, v: VertexId) -> &[VertexId] {
        match kind {
            GraphKind::Movement => &self.movement[v],
            GraphKind::Connectivity => &self.connectivity[v],
        }
    }

    /// Movement options from `v`: the adjacent cells plus staying put.
    pub fn movement_neighbors(&self, v: VertexId) -> Result<Vec<VertexId>, EnvError> {
        if v >= self.n {
            return Err(EnvError::VertexOutOfRange(v, self.n));
        }
        let mut out = Vec::with_capacity(self.movement[v].len() + 1);
        let mut inserted = false;
        for &w in &self.movement[v] {
            if !inserted && v < w {
                out.push(v);
                inserted = true;
            }
            out.push(w);
        }
        if !inserted {
            out.push(v);
        }
        Ok(out)
    }

    pub fn has_edge(&self, kind: GraphKind, a: VertexId, b: VertexId) -> bool {
        if a == b {
            return false;
        }
        self.neighbors(kind, a).binary_search(&b).is_ok()
    }

    fn table(&self, kind: GraphKind) -> &Vec<Vec<u32>> {
        let slot = match kind {
            GraphKind::Movement => &self.dist_movement,
            GraphKind::Connectivity => &self.dist_connectivity,
        };
        slot.get_or_init(|| {
            (0..self.n)
                .map(|src| self.bfs_from(kind, src))
                .collect()
        })
    }

    fn bfs_from(&self, kind: GraphKind, src: VertexId) -> Vec<u32> {
        let mut dist = vec![UNREACHED; self.n];
        let mut queue = std::collections::VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(v) = queue.pop_front() {
            let d = dist[v] + 1;
            for &w in self.neighbors(kind, v) {
                if dist[w] == UNREACHED {
                    dist[w] = d;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// BFS hop count between two vertices in the selected edge set.
    pub fn dist(&self, kind: GraphKind, s: VertexId, d: VertexId) -> Distance {
        let row = &self.table(kind)[s];
        match row[d] {
            UNREACHED => Distance::Unreachable,
            h => Distance::Hops(h),
        }
    }

    /// Full distance row from a source; `u32::MAX` marks unreachable entries.
    pub(crate) fn dist_row(&self, kind: GraphKind, s: VertexId) -> &[u32] {
        &self.table(kind)[s]
    }

    /// True iff the connectivity subgraph induced by the robot positions plus
    /// the base station is connected. Co-located robots count as one vertex.
    pub fn is_connected_config(&self, config: &Configuration) -> bool {
        self.is_connected_set_with_base(&config.positions)
    }

    pub(crate) fn is_connected_set_with_base(&self, positions: &[VertexId]) -> bool {
        let mut verts: Vec<VertexId> = Vec::with_capacity(positions.len() + 1);
        verts.extend_from_slice(positions);
        verts.push(self.base);
        verts.sort_unstable();
        verts.dedup();
        self.is_connected_vertex_set(&verts)
    }

    /// Connectivity of an induced subgraph over a deduplicated vertex set.
    pub(crate) fn is_connected_vertex_set(&self, verts: &[VertexId]) -> bool {
        let k = verts.len();
        if k <= 1 {
            return true;
        }
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            let mut root = i;
            while parent[root] != root {
                root = parent[root];
            }
            let mut cur = i;
            while parent[cur] != root {
                let next = parent[cur];
                parent[cur] = root;
                cur = next;
            }
            root
        }
        let mut components = k;
        for i in 0..k {
            // Scan whichever side is smaller: the adjacency list or the set.
            let adj = &self.connectivity[verts[i]];
            if adj.len() < k {
                for &w in adj {
                    if let Ok(j) = verts.binary_search(&w) {
                        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                        if ri != rj {
                            parent[ri] = rj;
                            components -= 1;
                        }
                    }
                }
            } else {
                for j in (i + 1)..k {
                    if self.has_edge(GraphKind::Connectivity, verts[i], verts[j]) {
                        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                        if ri != rj {
                            parent[ri] = rj;
                            components -= 1;
                        }
                    }
                }
            }
            if components == 1 {
                return true;
            }
        }
        components == 1
    }
}

/// Incremental connectivity test for single-robot moves: with all other
/// positions fixed, a candidate position keeps the network connected iff every
/// component of the fixed set (plus base) touches the candidate or already
/// spans the whole fixed set.
pub struct MoveFeasibility<'a> {
    env: &'a GraphEnv,
    component_members: Vec<Vec<VertexId>>,
}

impl<'a> MoveFeasibility<'a> {
    /// `fixed` are the positions of all robots except the one about to move.
    pub fn new(env: &'a GraphEnv, fixed: &[VertexId]) -> Self {
        let mut verts: Vec<VertexId> = Vec::with_capacity(fixed.len() + 1);
        verts.extend_from_slice(fixed);
        verts.push(env.base);
        verts.sort_unstable();
        verts.dedup();
        let k = verts.len();
        let mut comp = vec![usize::MAX; k];
        let mut component_members: Vec<Vec<VertexId>> = Vec::new();
        for i in 0..k {
            if comp[i] != usize::MAX {
                continue;
            }
            let c = component_members.len();
            let mut stack = vec![i];
            comp[i] = c;
            let mut members = Vec::new();
            while let Some(j) = stack.pop() {
                members.push(verts[j]);
                let adj = env.neighbors(GraphKind::Connectivity, verts[j]);
                if adj.len() < k {
                    for &w in adj {
                        if let Ok(m) = verts.binary_search(&w) {
                            if comp[m] == usize::MAX {
                                comp[m] = c;
                                stack.push(m);
                            }
                        }
                    }
                } else {
                    for (m, &w) in verts.iter().enumerate() {
                        if comp[m] == usize::MAX && env.has_edge(GraphKind::Connectivity, verts[j], w)
                        {
                            comp[m] = c;
                            stack.push(m);
                        }
                    }
                }
            }
            component_members.push(members);
        }
        MoveFeasibility { env, component_members }
    }

    pub fn feasible(&self, candidate: VertexId) -> bool {
        (0..self.component_members.len()).all(|c| self.touches(c, candidate))
    }

    fn touches(&self, component: usize, candidate: VertexId) -> bool {
        self.component_members[component]
            .iter()
            .any(|&m| m == candidate || self.env.has_edge(GraphKind::Connectivity, m, candidate))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(w: u32, h: u32, r_com: f64) -> GraphEnv {
        GraphEnv::grid(&GridSpec {
            width: w,
            height: h,
            base_cell: (1, 1),
            sensing_cells: SensingSpec::All,
            r_com,
        })
        .unwrap()
    }

    #[test]
    fn grid_connectivity_range_is_inclusive() {
        let env = grid(30, 30, 3.0);
        let a = env.vertex_at(1, 1).unwrap();
        let b = env.vertex_at(4, 1).unwrap();
        assert!(env.has_edge(GraphKind::Connectivity, a, b), "distance 3 is within range 3");
        let c = env.vertex_at(3, 3).unwrap();
        assert!(env.has_edge(GraphKind::Connectivity, a, c), "sqrt(8) < 3");
        let d = env.vertex_at(1, 5).unwrap();
        assert!(!env.has_edge(GraphKind::Connectivity, a, d), "distance 4 > 3");
    }

    #[test]
    fn single_cell_grid_has_no_edges() {
        let env = grid(1, 1, 2.0);
        assert_eq!(env.vertex_count(), 1);
        assert!(env.neighbors(GraphKind::Movement, 0).is_empty());
        assert!(env.neighbors(GraphKind::Connectivity, 0).is_empty());
    }

    #[test]
    fn movement_neighbors_include_stay() {
        let env = grid(30, 30, 3.0);
        let interior = env.vertex_at(15, 15).unwrap();
        assert_eq!(env.movement_neighbors(interior).unwrap().len(), 9);
        let corner = env.vertex_at(1, 1).unwrap();
        assert_eq!(env.movement_neighbors(corner).unwrap().len(), 4);
        let edge = env.vertex_at(1, 15).unwrap();
        assert_eq!(env.movement_neighbors(edge).unwrap().len(), 6);
    }

    #[test]
    fn movement_neighbors_sorted_with_self() {
        let env = grid(5, 5, 2.0);
        for v in 0..env.vertex_count() {
            let nb = env.movement_neighbors(v).unwrap();
            let mut sorted = nb.clone();
            sorted.sort_unstable();
            assert_eq!(nb, sorted);
            assert!(nb.contains(&v));
        }
    }

    #[test]
    fn chebyshev_distance_on_full_grid() {
        let env = grid(30, 30, 3.0);
        let a = env.vertex_at(1, 1).unwrap();
        let b = env.vertex_at(30, 30).unwrap();
        assert_eq!(env.dist(GraphKind::Movement, a, b), Distance::Hops(29));
        assert_eq!(env.dist(GraphKind::Movement, a, a), Distance::Hops(0));
    }

    #[test]
    fn connectivity_hops_down_a_column() {
        let env = grid(30, 30, 3.0);
        let a = env.vertex_at(1, 1).unwrap();
        let b = env.vertex_at(1, 10).unwrap();
        assert_eq!(env.dist(GraphKind::Connectivity, a, b), Distance::Hops(3));
    }

    #[test]
    fn connected_config_examples() {
        let env = grid(4, 4, 1.5);
        let b = env.base();
        assert!(env.is_connected_config(&Configuration::uniform(b, 3)));
        let far = env.vertex_at(4, 4).unwrap();
        assert!(!env.is_connected_config(&Configuration::new(vec![far])));
        let mid = env.vertex_at(2, 2).unwrap();
        let mid2 = env.vertex_at(3, 3).unwrap();
        assert!(env.is_connected_config(&Configuration::new(vec![mid, mid2, far])));
    }

    #[test]
    fn move_feasibility_matches_full_check() {
        let env = grid(6, 6, 2.0);
        // random-ish deterministic probe over configurations of 3 robots
        let n = env.vertex_count();
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed as usize
        };
        for _ in 0..1000 {
            let fixed = [next() % n, next() % n];
            let cand = next() % n;
            let chk = MoveFeasibility::new(&env, &fixed);
            let mut full = fixed.to_vec();
            full.push(cand);
            assert_eq!(
                chk.feasible(cand),
                env.is_connected_set_with_base(&full),
                "fixed {fixed:?} cand {cand}"
            );
        }
    }

    #[test]
    fn unreachable_is_a_value() {
        let env = GraphEnv::from_parts(3, &[(0, 1)], &[(0, 1)], 0, &[2], None).unwrap();
        assert_eq!(env.dist(GraphKind::Movement, 0, 2), Distance::Unreachable);
        assert!(Distance::Hops(999) < Distance::Unreachable);
    }

    #[test]
    fn grid_rejects_bad_cells() {
        let err = GraphEnv::grid(&GridSpec {
            width: 5,
            height: 5,
            base_cell: (6, 1),
            sensing_cells: SensingSpec::All,
            r_com: 2.0,
        });
        assert!(matches!(err, Err(EnvError::CellOutOfBounds(6, 1, 5, 5))));
    }
}
