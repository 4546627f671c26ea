//! The configuration-space graph: nodes, edges, validity labels with
//! per-element blocker lists, PRM and lattice construction, shortest-path
//! search, query attachment and serialization.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, BinaryHeap, HashSet};
use std::path::Path;

use crate::error::Error;
use crate::geom::Aabb;
use crate::robot::{
    check_config, check_edge, config_distance, interpolate, interpolation_steps, sample_config,
    Configuration, DofKind, Environment, ObstacleFilter, ObstacleId, RobotModel,
};
use crate::Result;

const FILE_VERSION: u32 = 1;

/// A roadmap element: node or edge, by index.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum ElementId {
    Node(u32),
    Edge(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Valid,
    Invalid,
}

/// Validity of one element: the label plus the set of obstacles currently
/// blocking it. The label is `Valid` exactly when the element passes its
/// static checks and the blocker set is empty; all mutation goes through
/// [`Roadmap`] methods that keep the two in sync.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityState {
    label: Label,
    blockers: BTreeSet<ObstacleId>,
}

impl ValidityState {
    fn new(static_ok: bool, blockers: BTreeSet<ObstacleId>) -> Self {
        let mut s = ValidityState { label: Label::Invalid, blockers };
        s.sync(static_ok);
        s
    }

    /// Fresh state with no blockers; valid when `static_ok` holds.
    pub fn clean(static_ok: bool) -> Self {
        Self::new(static_ok, BTreeSet::new())
    }

    fn sync(&mut self, static_ok: bool) {
        self.label = if static_ok && self.blockers.is_empty() {
            Label::Valid
        } else {
            Label::Invalid
        };
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn is_valid(&self) -> bool {
        self.label == Label::Valid
    }

    pub fn blockers(&self) -> &BTreeSet<ObstacleId> {
        &self.blockers
    }

    fn coherent(&self, static_ok: bool) -> bool {
        self.label
            == if static_ok && self.blockers.is_empty() { Label::Valid } else { Label::Invalid }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub config: Configuration,
    pub static_ok: bool,
    pub state: ValidityState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    /// Endpoint node indices, `a < b`.
    pub a: u32,
    pub b: u32,
    /// Metric length between the endpoint configurations.
    pub length: f64,
    /// Interpolation step count `N`; the edge is checked at `N + 1` samples.
    pub steps: u32,
    pub static_ok: bool,
    pub state: ValidityState,
}

/// Label flips produced by an update or revalidation, sorted by element id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChangeReport {
    pub newly_invalid: Vec<ElementId>,
    pub newly_valid: Vec<ElementId>,
}

impl ChangeReport {
    pub fn is_empty(&self) -> bool {
        self.newly_invalid.is_empty() && self.newly_valid.is_empty()
    }

    pub(crate) fn finish(mut self) -> Self {
        self.newly_invalid.sort_unstable();
        self.newly_valid.sort_unstable();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Roadmap {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    /// Interpolation resolution the edge step counts were computed with.
    pub resolution: f64,
}

impl Roadmap {
    pub fn empty(resolution: f64) -> Self {
        Roadmap { nodes: Vec::new(), edges: Vec::new(), resolution }
    }

    pub fn element_ids(&self) -> impl Iterator<Item = ElementId> + '_ {
        (0..self.nodes.len() as u32)
            .map(ElementId::Node)
            .chain((0..self.edges.len() as u32).map(ElementId::Edge))
    }

    pub fn state(&self, e: ElementId) -> Result<&ValidityState> {
        match e {
            ElementId::Node(i) => {
                self.nodes.get(i as usize).map(|n| &n.state).ok_or(Error::UnknownElement(e))
            }
            ElementId::Edge(i) => {
                self.edges.get(i as usize).map(|n| &n.state).ok_or(Error::UnknownElement(e))
            }
        }
    }

    fn parts_mut(&mut self, e: ElementId) -> (&mut ValidityState, bool) {
        match e {
            ElementId::Node(i) => {
                let n = &mut self.nodes[i as usize];
                (&mut n.state, n.static_ok)
            }
            ElementId::Edge(i) => {
                let ed = &mut self.edges[i as usize];
                (&mut ed.state, ed.static_ok)
            }
        }
    }

    /// Adds `o` to the element's blocker set. Returns true when the label
    /// flipped from valid to invalid.
    pub fn add_blocker(&mut self, e: ElementId, o: ObstacleId) -> bool {
        let (state, static_ok) = self.parts_mut(e);
        let was_valid = state.is_valid();
        state.blockers.insert(o);
        state.sync(static_ok);
        was_valid && !state.is_valid()
    }

    /// Removes `o` from the element's blocker set. Returns true when the
    /// label flipped from invalid to valid.
    pub fn remove_blocker(&mut self, e: ElementId, o: ObstacleId) -> bool {
        let (state, static_ok) = self.parts_mut(e);
        let was_valid = state.is_valid();
        state.blockers.remove(&o);
        state.sync(static_ok);
        !was_valid && state.is_valid()
    }

    /// Replaces the filter-admitted part of the element's blocker set with
    /// `found`, leaving blockers outside the filter alone. Returns the
    /// label transition (old, new).
    fn reset_filtered_blockers(
        &mut self,
        e: ElementId,
        filter: ObstacleFilter,
        found: BTreeSet<ObstacleId>,
    ) -> (bool, bool) {
        let (state, static_ok) = self.parts_mut(e);
        let was_valid = state.is_valid();
        state.blockers.retain(|&o| !filter.admits(o));
        state.blockers.extend(found);
        state.sync(static_ok);
        (was_valid, state.is_valid())
    }

    pub fn edge_configs(&self, i: u32) -> (&Configuration, &Configuration) {
        let e = &self.edges[i as usize];
        (&self.nodes[e.a as usize].config, &self.nodes[e.b as usize].config)
    }

    /// Neighbor lists: for each node, the incident `(edge index, other
    /// node)` pairs. Rebuilt on demand; edges are undirected.
    pub fn adjacency(&self) -> Vec<Vec<(u32, u32)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.a as usize].push((i as u32, e.b));
            adj[e.b as usize].push((i as u32, e.a));
        }
        adj
    }

    /// Structural and coherence checks; used after deserialization.
    fn validate(&self) -> Result<()> {
        let n = self.nodes.len() as u32;
        let mut seen = HashSet::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.a >= n || e.b >= n {
                return Err(Error::Invalid(format!(
                    "edge {i} references node out of range ({}-{}, have {n})",
                    e.a, e.b
                )));
            }
            if e.a >= e.b {
                return Err(Error::Invalid(format!("edge {i} endpoints not ordered")));
            }
            if !seen.insert((e.a, e.b)) {
                return Err(Error::Invalid(format!("duplicate edge {}-{}", e.a, e.b)));
            }
            if !e.state.coherent(e.static_ok) {
                return Err(Error::Invalid(format!("edge {i} label/blockers incoherent")));
            }
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if !node.state.coherent(node.static_ok) {
                return Err(Error::Invalid(format!("node {i} label/blockers incoherent")));
            }
        }
        Ok(())
    }
}

/// Uniform-sampling PRM: `n_nodes` configurations drawn inside the DOF
/// ranges, each connected to its `k` metric-nearest neighbors (undirected,
/// deduplicated), every element labeled by exact collision checks against
/// all obstacles. Unconnectable samples stay as isolated nodes.
/// Deterministic for a given seed.
pub fn prm_build(
    r: &RobotModel,
    env: &Environment,
    n_nodes: usize,
    k: usize,
    resolution: f64,
    seed: u64,
) -> Result<Roadmap> {
    use rand::SeedableRng;
    assert!(n_nodes >= 1 && k >= 1);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let configs: Vec<Configuration> =
        (0..n_nodes).map(|_| sample_config(r, &mut rng)).collect();

    let mut pairs: BTreeSet<(u32, u32)> = BTreeSet::new();
    for i in 0..n_nodes {
        let mut dists: Vec<(f64, usize)> = (0..n_nodes)
            .filter(|&j| j != i)
            .map(|j| (config_distance(r, &configs[i], &configs[j]).unwrap(), j))
            .collect();
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        for &(_, j) in dists.iter().take(k) {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            pairs.insert((a as u32, b as u32));
        }
    }

    build_labeled(r, env, configs, pairs.into_iter().collect(), resolution)
}

/// Axis-aligned lattice roadmap over `region` for a 3-DOF translational
/// robot: nodes at `spacing` apart, 6-connected edges, all elements labeled
/// against the environment. A spacing larger than the region yields the
/// single corner node.
pub fn lattice_build(
    r: &RobotModel,
    env: &Environment,
    region: &Aabb,
    spacing: f64,
    resolution: f64,
) -> Result<Roadmap> {
    assert!(spacing > 0.0);
    assert!(
        r.dof_count() == 3 && r.dofs.iter().all(|d| d.kind == DofKind::Translational),
        "lattice roadmaps need a 3-DOF translational robot"
    );
    let counts: Vec<usize> = (0..3)
        .map(|axis| {
            let span = region.extent().axis(axis);
            (span / spacing + 1e-9).floor() as usize + 1
        })
        .collect();
    let (nx, ny, nz) = (counts[0], counts[1], counts[2]);
    let idx = |i: usize, j: usize, kk: usize| (i * ny + j) * nz + kk;

    let mut configs = Vec::with_capacity(nx * ny * nz);
    for i in 0..nx {
        for j in 0..ny {
            for kk in 0..nz {
                configs.push(Configuration::new(vec![
                    region.min.x + i as f64 * spacing,
                    region.min.y + j as f64 * spacing,
                    region.min.z + kk as f64 * spacing,
                ]));
            }
        }
    }
    let mut pairs = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            for kk in 0..nz {
                let here = idx(i, j, kk) as u32;
                if i + 1 < nx {
                    pairs.push((here, idx(i + 1, j, kk) as u32));
                }
                if j + 1 < ny {
                    pairs.push((here, idx(i, j + 1, kk) as u32));
                }
                if kk + 1 < nz {
                    pairs.push((here, idx(i, j, kk + 1) as u32));
                }
            }
        }
    }
    build_labeled(r, env, configs, pairs, resolution)
}

fn build_labeled(
    r: &RobotModel,
    env: &Environment,
    configs: Vec<Configuration>,
    pairs: Vec<(u32, u32)>,
    resolution: f64,
) -> Result<Roadmap> {
    let mut nodes = Vec::with_capacity(configs.len());
    for config in configs {
        let (_, blockers) = check_config(r, env, &config, ObstacleFilter::All)?;
        nodes.push(Node { config, static_ok: true, state: ValidityState::new(true, blockers) });
    }
    let mut edges = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let (pa, pb) = (&nodes[a as usize].config, &nodes[b as usize].config);
        let length = config_distance(r, pa, pb)?;
        let steps = interpolation_steps(r, pa, pb, resolution)? as u32;
        let (_, blockers) = check_edge(r, env, pa, pb, resolution, ObstacleFilter::All)?;
        edges.push(Edge {
            a,
            b,
            length,
            steps,
            static_ok: true,
            state: ValidityState::new(true, blockers),
        });
    }
    Ok(Roadmap { nodes, edges, resolution })
}

/// Recomputes every element's validity against the filtered obstacles from
/// scratch: each node and every interpolated edge sample is checked with no
/// early-out. Blockers outside the filter are retained. This is the ground
/// truth all update methods are measured against.
pub fn full_revalidate(
    rm: &mut Roadmap,
    r: &RobotModel,
    env: &Environment,
    filter: ObstacleFilter,
) -> Result<ChangeReport> {
    let mut report = ChangeReport::default();
    for i in 0..rm.nodes.len() {
        let (_, found) = check_config(r, env, &rm.nodes[i].config, filter)?;
        let e = ElementId::Node(i as u32);
        record_flip(rm.reset_filtered_blockers(e, filter, found), e, &mut report);
    }
    for i in 0..rm.edges.len() {
        let (pa, pb) = rm.edge_configs(i as u32);
        let mut found = BTreeSet::new();
        for c in interpolate(r, pa, pb, rm.resolution)? {
            let (_, hit) = check_config(r, env, &c, filter)?;
            found.extend(hit);
        }
        let e = ElementId::Edge(i as u32);
        record_flip(rm.reset_filtered_blockers(e, filter, found), e, &mut report);
    }
    Ok(report.finish())
}

fn record_flip((was, now): (bool, bool), e: ElementId, report: &mut ChangeReport) {
    match (was, now) {
        (true, false) => report.newly_invalid.push(e),
        (false, true) => report.newly_valid.push(e),
        _ => {}
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidityMode {
    RespectLabels,
    IgnoreLabels,
}

/// Dijkstra over the roadmap. `RespectLabels` traverses only valid nodes
/// and edges; `IgnoreLabels` uses the whole graph. Returns the node index
/// path, or `None` when `t_idx` is unreachable.
pub fn shortest_path(
    rm: &Roadmap,
    s_idx: usize,
    t_idx: usize,
    mode: ValidityMode,
) -> Option<Vec<usize>> {
    let usable_node = |i: usize| match mode {
        ValidityMode::IgnoreLabels => true,
        ValidityMode::RespectLabels => rm.nodes[i].state.is_valid(),
    };
    let usable_edge = |i: u32| match mode {
        ValidityMode::IgnoreLabels => true,
        ValidityMode::RespectLabels => rm.edges[i as usize].state.is_valid(),
    };
    if s_idx >= rm.nodes.len() || t_idx >= rm.nodes.len() {
        return None;
    }
    if !usable_node(s_idx) || !usable_node(t_idx) {
        return None;
    }
    if s_idx == t_idx {
        return Some(vec![s_idx]);
    }
    let adj = rm.adjacency();
    dijkstra(
        rm.nodes.len(),
        s_idx,
        t_idx,
        |node, mut visit: Box<dyn FnMut(usize, f64) + '_>| {
            for &(e, other) in &adj[node] {
                if usable_edge(e) && usable_node(other as usize) {
                    visit(other as usize, rm.edges[e as usize].length);
                }
            }
        },
    )
}

/// Generic Dijkstra with deterministic tie-breaking on node index.
pub(crate) fn dijkstra(
    n: usize,
    s: usize,
    t: usize,
    mut neighbors: impl FnMut(usize, Box<dyn FnMut(usize, f64) + '_>),
) -> Option<Vec<usize>> {
    #[derive(PartialEq)]
    struct Entry(f64, usize);
    impl Eq for Entry {}
    impl Ord for Entry {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            // Reversed for a min-heap; ties broken by node index.
            o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
        }
    }
    impl PartialOrd for Entry {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }

    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(Entry(0.0, s));
    while let Some(Entry(d, u)) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if u == t {
            break;
        }
        let du = d;
        let mut relax: Vec<(usize, f64)> = Vec::new();
        neighbors(u, Box::new(|v, w| relax.push((v, w))));
        for (v, w) in relax {
            let nd = du + w;
            if nd < dist[v] {
                dist[v] = nd;
                prev[v] = u;
                heap.push(Entry(nd, v));
            }
        }
    }
    if !dist[t].is_finite() {
        return None;
    }
    let mut path = vec![t];
    let mut cur = t;
    while cur != s {
        cur = prev[cur];
        path.push(cur);
    }
    path.reverse();
    Some(path)
}

/// One attachment link from a query endpoint to a roadmap node.
#[derive(Debug, Clone)]
pub struct AttachLink {
    pub node: u32,
    pub length: f64,
    /// `None` when built lazily (not yet checked), `Some(valid)` otherwise.
    pub valid: Option<bool>,
}

/// Temporary start/goal attachment. The roadmap itself is never modified;
/// dropping the attachment leaves no residue by construction.
#[derive(Debug, Clone)]
pub struct Attachment {
    pub start: Configuration,
    pub goal: Configuration,
    pub start_links: Vec<AttachLink>,
    pub goal_links: Vec<AttachLink>,
}

/// Connects `s` and `t` to their `k` nearest roadmap nodes. With
/// `validate`, each link edge is collision checked against all obstacles
/// and a link-less endpoint is an error; without it links are left
/// unchecked for lazy evaluation.
pub fn attach_query(
    rm: &Roadmap,
    r: &RobotModel,
    env: &Environment,
    s: &Configuration,
    t: &Configuration,
    k: usize,
    validate: bool,
) -> Result<Attachment> {
    let links = |c: &Configuration| -> Result<Vec<AttachLink>> {
        let mut dists: Vec<(f64, usize)> = rm
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| Ok((config_distance(r, c, &n.config)?, i)))
            .collect::<Result<_>>()?;
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let mut out = Vec::new();
        for &(length, node) in dists.iter().take(k) {
            let valid = if validate {
                let (ok, _) = check_edge(
                    r,
                    env,
                    c,
                    &rm.nodes[node].config,
                    rm.resolution,
                    ObstacleFilter::All,
                )?;
                Some(ok)
            } else {
                None
            };
            out.push(AttachLink { node: node as u32, length, valid });
        }
        Ok(out)
    };
    let start_links = links(s)?;
    let goal_links = links(t)?;
    let usable = |ls: &[AttachLink]| {
        ls.iter().any(|l| !validate || l.valid == Some(true))
    };
    if !usable(&start_links) || !usable(&goal_links) {
        return Err(Error::Unconnectable);
    }
    Ok(Attachment { start: s.clone(), goal: t.clone(), start_links, goal_links })
}

/// A vertex on an attached-query path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathVertex {
    Start,
    Node(usize),
    Goal,
}

/// Shortest path from the attached start to the attached goal. Virtual
/// endpoints use the attachment links; everything else follows
/// [`shortest_path`] semantics for `mode`. Links that failed validation
/// are unusable in `RespectLabels` mode, as is any excluded element.
pub fn shortest_path_attached(
    rm: &Roadmap,
    att: &Attachment,
    mode: ValidityMode,
    excluded_nodes: &HashSet<usize>,
    excluded_edges: &HashSet<u32>,
) -> Option<Vec<PathVertex>> {
    let n = rm.nodes.len();
    let (vs, vt) = (n, n + 1);
    let usable_node = |i: usize| {
        !excluded_nodes.contains(&i)
            && match mode {
                ValidityMode::IgnoreLabels => true,
                ValidityMode::RespectLabels => rm.nodes[i].state.is_valid(),
            }
    };
    let usable_edge = |i: u32| {
        !excluded_edges.contains(&i)
            && match mode {
                ValidityMode::IgnoreLabels => true,
                ValidityMode::RespectLabels => rm.edges[i as usize].state.is_valid(),
            }
    };
    let link_usable = |l: &AttachLink| match mode {
        ValidityMode::IgnoreLabels => l.valid != Some(false),
        ValidityMode::RespectLabels => l.valid == Some(true),
    };
    let adj = rm.adjacency();
    let path = dijkstra(n + 2, vs, vt, |node, mut visit: Box<dyn FnMut(usize, f64) + '_>| {
        if node == vs {
            for l in &att.start_links {
                if link_usable(l) && usable_node(l.node as usize) {
                    visit(l.node as usize, l.length);
                }
            }
            return;
        }
        for l in &att.goal_links {
            if l.node as usize == node && link_usable(l) {
                visit(vt, l.length);
            }
        }
        for &(e, other) in &adj[node] {
            if usable_edge(e) && usable_node(other as usize) {
                visit(other as usize, rm.edges[e as usize].length);
            }
        }
    })?;
    Some(
        path.into_iter()
            .map(|i| {
                if i == vs {
                    PathVertex::Start
                } else if i == vt {
                    PathVertex::Goal
                } else {
                    PathVertex::Node(i)
                }
            })
            .collect(),
    )
}

#[derive(Serialize, Deserialize)]
struct RoadmapFile {
    version: u32,
    resolution: f64,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

/// Writes the roadmap as versioned JSON.
pub fn save(rm: &Roadmap, path: &Path) -> Result<()> {
    let file = RoadmapFile {
        version: FILE_VERSION,
        resolution: rm.resolution,
        nodes: rm.nodes.clone(),
        edges: rm.edges.clone(),
    };
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

/// Reads a roadmap back; malformed files produce parse errors with line and
/// field diagnostics, structurally broken ones a description of the defect.
pub fn load(path: &Path) -> Result<Roadmap> {
    let text = std::fs::read_to_string(path)?;
    let file: RoadmapFile = serde_json::from_str(&text)?;
    if file.version != FILE_VERSION {
        return Err(Error::Version { expected: FILE_VERSION, got: file.version });
    }
    let rm = Roadmap { nodes: file.nodes, edges: file.edges, resolution: file.resolution };
    rm.validate()?;
    Ok(rm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{ConvexPolyhedron, RigidTransform, Vec3};
    use crate::robot::Obstacle;

    fn bounds() -> Aabb {
        Aabb::new(Vec3::new(-10.0, -10.0, -10.0), Vec3::new(10.0, 10.0, 10.0))
    }

    fn cube_robot() -> RobotModel {
        RobotModel::free_flyer(
            vec![ConvexPolyhedron::box_shape(Vec3::new(0.5, 0.5, 0.5))],
            &bounds(),
            0,
        )
    }

    fn env_with(obstacles: Vec<Obstacle>) -> Environment {
        Environment::new(bounds(), obstacles)
    }

    fn obstacle_cube(name: &str, center: Vec3, half: f64) -> Obstacle {
        Obstacle {
            name: name.to_string(),
            bodies: vec![ConvexPolyhedron::box_shape(Vec3::new(half, half, half))],
            pose: RigidTransform::from_translation(center),
        }
    }

    #[test]
    fn prm_build_shape_and_determinism() {
        let r = cube_robot();
        let env = env_with(vec![]);
        let rm = prm_build(&r, &env, 120, 6, 0.5, 42).unwrap();
        assert_eq!(rm.nodes.len(), 120);
        assert!(rm.edges.len() >= 120 && rm.edges.len() <= 6 * 120, "{} edges", rm.edges.len());
        // Every element valid in an empty environment.
        for e in rm.element_ids() {
            assert!(rm.state(e).unwrap().is_valid());
        }
        let rm2 = prm_build(&r, &env, 120, 6, 0.5, 42).unwrap();
        assert_eq!(rm, rm2, "same seed must reproduce the same roadmap");
        let rm3 = prm_build(&r, &env, 120, 6, 0.5, 43).unwrap();
        assert_ne!(rm, rm3);
    }

    #[test]
    fn prm_single_node_has_no_edges() {
        let r = cube_robot();
        let env = env_with(vec![]);
        let rm = prm_build(&r, &env, 1, 6, 0.5, 1).unwrap();
        assert_eq!(rm.nodes.len(), 1);
        assert!(rm.edges.is_empty());
    }

    #[test]
    fn lattice_counts() {
        let r = cube_robot();
        let env = env_with(vec![]);
        let region = Aabb::new(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0));
        let rm = lattice_build(&r, &env, &region, 0.25, 0.25).unwrap();
        assert_eq!(rm.nodes.len(), 125);
        // 6-connected lattice edge count: 3 * 4 * 5 * 5 oriented axes.
        assert_eq!(rm.edges.len(), 3 * 4 * 5 * 5);

        let single = lattice_build(&r, &env, &region, 5.0, 0.25).unwrap();
        assert_eq!(single.nodes.len(), 1);
    }

    #[test]
    fn full_revalidate_idempotent_and_clears_when_moved_away() {
        let r = cube_robot();
        let mut env = env_with(vec![obstacle_cube("o", Vec3::ZERO, 1.5)]);
        let mut rm = prm_build(&r, &env, 60, 4, 0.5, 7).unwrap();

        let again = full_revalidate(&mut rm, &r, &env, ObstacleFilter::All).unwrap();
        assert!(again.is_empty(), "second run must be a no-op: {again:?}");

        // Move the obstacle far outside; everything becomes valid.
        env.obstacles[0].pose = RigidTransform::from_translation(Vec3::new(500.0, 0.0, 0.0));
        let report = full_revalidate(&mut rm, &r, &env, ObstacleFilter::All).unwrap();
        assert!(report.newly_invalid.is_empty());
        for e in rm.element_ids() {
            assert!(rm.state(e).unwrap().is_valid());
        }
    }

    #[test]
    fn full_revalidate_respects_filter() {
        let r = cube_robot();
        let env = env_with(vec![
            obstacle_cube("a", Vec3::ZERO, 1.5),
            obstacle_cube("b", Vec3::new(4.0, 4.0, 4.0), 1.5),
        ]);
        let mut rm = prm_build(&r, &env, 40, 3, 0.5, 3).unwrap();
        // Wipe all blockers, then revalidate only obstacle 1: blocker sets
        // may only mention obstacle 1.
        for e in rm.element_ids().collect::<Vec<_>>() {
            let (state, _) = rm.parts_mut(e);
            state.blockers.clear();
            state.sync(true);
        }
        full_revalidate(&mut rm, &r, &env, ObstacleFilter::Single(ObstacleId(1))).unwrap();
        for e in rm.element_ids() {
            let blockers = rm.state(e).unwrap().blockers();
            assert!(blockers.iter().all(|&o| o == ObstacleId(1)));
        }
    }

    #[test]
    fn shortest_path_trivial_and_direct() {
        let r = cube_robot();
        let env = env_with(vec![]);
        let rm = prm_build(&r, &env, 30, 4, 0.5, 5).unwrap();
        assert_eq!(shortest_path(&rm, 3, 3, ValidityMode::RespectLabels), Some(vec![3]));

        let e = &rm.edges[0];
        let path = shortest_path(&rm, e.a as usize, e.b as usize, ValidityMode::RespectLabels)
            .expect("direct edge path");
        assert_eq!(path.first(), Some(&(e.a as usize)));
        assert_eq!(path.last(), Some(&(e.b as usize)));
    }

    #[test]
    fn invalid_bridge_blocks_respect_mode_only() {
        // Hand-built 4-node graph: 0-1-2-3 in a line, plus the labels.
        let r = cube_robot();
        let mk = |x: f64| Configuration::new(vec![x, 0.0, 0.0]);
        let mut rm = Roadmap::empty(0.5);
        for i in 0..4 {
            rm.nodes.push(Node {
                config: mk(i as f64),
                static_ok: true,
                state: ValidityState::new(true, BTreeSet::new()),
            });
        }
        for (a, b) in [(0u32, 1u32), (1, 2), (2, 3)] {
            let length =
                config_distance(&r, &rm.nodes[a as usize].config, &rm.nodes[b as usize].config)
                    .unwrap();
            rm.edges.push(Edge {
                a,
                b,
                length,
                steps: 2,
                static_ok: true,
                state: ValidityState::new(true, BTreeSet::new()),
            });
        }
        // Invalidate the only bridge edge 1-2.
        rm.add_blocker(ElementId::Edge(1), ObstacleId(0));
        assert_eq!(shortest_path(&rm, 0, 3, ValidityMode::RespectLabels), None);
        assert_eq!(
            shortest_path(&rm, 0, 3, ValidityMode::IgnoreLabels),
            Some(vec![0, 1, 2, 3])
        );
    }

    #[test]
    fn attach_query_coincident_and_residue_free() {
        let r = cube_robot();
        let env = env_with(vec![]);
        let rm = prm_build(&r, &env, 40, 4, 0.5, 9).unwrap();
        let before = rm.clone();

        let s = rm.nodes[0].config.clone();
        let t = rm.nodes[1].config.clone();
        let att = attach_query(&rm, &r, &env, &s, &t, 6, true).unwrap();
        // Coincident start: nearest link has zero length.
        assert!(att.start_links[0].length < 1e-12);
        assert_eq!(att.start_links[0].node, 0);

        let path = shortest_path_attached(
            &rm,
            &att,
            ValidityMode::RespectLabels,
            &HashSet::new(),
            &HashSet::new(),
        )
        .expect("path through attachment");
        assert_eq!(path.first(), Some(&PathVertex::Start));
        assert_eq!(path.last(), Some(&PathVertex::Goal));

        drop(att);
        assert_eq!(rm, before, "attachment must leave no residue");
    }

    #[test]
    fn attach_query_unconnectable_when_all_links_blocked() {
        let r = cube_robot();
        // A shell of obstacle fully enclosing the query point region so all
        // attachment edges collide.
        let env = env_with(vec![obstacle_cube("wall", Vec3::new(2.5, 0.0, 0.0), 2.0)]);
        let rm = prm_build(&r, &env, 20, 3, 0.5, 11).unwrap();
        // Start deep inside the obstacle: every link edge is blocked.
        let s = Configuration::new(vec![2.5, 0.0, 0.0]);
        let t = Configuration::new(vec![-8.0, 0.0, 0.0]);
        let res = attach_query(&rm, &r, &env, &s, &t, 2, true);
        assert!(matches!(res, Err(Error::Unconnectable)));
    }

    #[test]
    fn save_load_round_trip() {
        let r = cube_robot();
        let env = env_with(vec![obstacle_cube("o", Vec3::ZERO, 1.0)]);
        let rm = prm_build(&r, &env, 80, 5, 0.5, 13).unwrap();
        let dir = std::env::temp_dir().join("spite_rm_roundtrip");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("rm.json");
        save(&rm, &path).unwrap();
        let loaded = load(&path).unwrap();
        assert_eq!(rm, loaded);

        let empty = Roadmap::empty(0.25);
        save(&empty, &path).unwrap();
        assert_eq!(load(&path).unwrap(), empty);
    }

    #[test]
    fn load_rejects_malformed_files() {
        let dir = std::env::temp_dir().join("spite_rm_malformed");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.json");
        std::fs::write(&path, "{\"version\": 1, \"resolution\": 0.25, \"nodes\": [").unwrap();
        match load(&path) {
            Err(Error::Parse(e)) => {
                assert!(e.line() >= 1, "parse error should carry a line number");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        std::fs::write(&path, "{\"version\": 9, \"resolution\": 0.25, \"nodes\": [], \"edges\": []}")
            .unwrap();
        assert!(matches!(load(&path), Err(Error::Version { got: 9, .. })));
    }
}
