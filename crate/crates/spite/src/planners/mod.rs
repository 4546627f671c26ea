//! Query-time planners: label-respecting roadmap search (paired with an
//! updater), LazyPRM with hierarchical path validation, and a standard RRT.

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use crate::roadmap::{
    attach_query, shortest_path_attached, Attachment, PathVertex, Roadmap, ValidityMode,
};
use crate::robot::{
    check_config, config_distance, interpolate, sample_config, wrap_angle, Configuration,
    DofKind, Environment, ObstacleFilter, RobotModel,
};
use crate::stats;
use crate::Result;

/// LazyPRM validates path edges coarse-to-fine with these sample strides;
/// the last pass checks every sample.
const LAZY_STRIDES: [usize; 3] = [27, 16, 1];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryStatus {
    Success,
    NoPath,
    Timeout,
    InvalidQuery,
}

#[derive(Debug, Clone, Default)]
pub struct QueryStats {
    pub cd_calls: u64,
    pub wall: Duration,
    pub iterations: u64,
}

#[derive(Debug, Clone)]
pub struct QueryResult {
    pub status: QueryStatus,
    /// On success: the configuration path from `s` to `t` inclusive.
    pub path: Vec<Configuration>,
    pub stats: QueryStats,
}

impl QueryResult {
    fn finish(status: QueryStatus, path: Vec<Configuration>, start: Instant, cd0: u64, iterations: u64) -> Self {
        QueryResult {
            status,
            path,
            stats: QueryStats {
                cd_calls: stats::snapshot().config_checks - cd0,
                wall: start.elapsed(),
                iterations,
            },
        }
    }
}

/// RRT tuning knobs.
#[derive(Debug, Clone)]
pub struct RrtParams {
    pub min_extension: f64,
    pub max_extension: f64,
    pub goal_bias: f64,
    pub time_cap: Duration,
    pub seed: u64,
}

impl Default for RrtParams {
    fn default() -> Self {
        RrtParams {
            min_extension: 0.1,
            max_extension: 4.0,
            goal_bias: 0.05,
            time_cap: Duration::from_secs(60),
            seed: 0,
        }
    }
}

fn endpoint_free(
    r: &RobotModel,
    env: &Environment,
    c: &Configuration,
) -> Result<bool> {
    let (ok, _) = check_config(r, env, c, ObstacleFilter::All)?;
    Ok(ok)
}

/// Answers a query on an updater-maintained roadmap: attach `s` and `t` to
/// their `k` nearest nodes with exactly validated attachment edges, search
/// respecting the stored labels, detach. No stored element is re-checked;
/// collision detection happens only on the attachment edges.
pub fn roadmap_query(
    rm: &Roadmap,
    r: &RobotModel,
    env: &Environment,
    s: &Configuration,
    t: &Configuration,
    k: usize,
) -> Result<QueryResult> {
    let start = Instant::now();
    let cd0 = stats::snapshot().config_checks;
    if !endpoint_free(r, env, s)? || !endpoint_free(r, env, t)? {
        return Ok(QueryResult::finish(QueryStatus::InvalidQuery, vec![], start, cd0, 0));
    }
    if config_distance(r, s, t)? == 0.0 {
        return Ok(QueryResult::finish(
            QueryStatus::Success,
            vec![s.clone()],
            start,
            cd0,
            1,
        ));
    }
    let att = match attach_query(rm, r, env, s, t, k, true) {
        Ok(att) => att,
        Err(crate::Error::Unconnectable) => {
            return Ok(QueryResult::finish(QueryStatus::NoPath, vec![], start, cd0, 1));
        }
        Err(e) => return Err(e),
    };
    let path = shortest_path_attached(
        rm,
        &att,
        ValidityMode::RespectLabels,
        &HashSet::new(),
        &HashSet::new(),
    );
    match path {
        None => Ok(QueryResult::finish(QueryStatus::NoPath, vec![], start, cd0, 1)),
        Some(vertices) => {
            let configs = vertices_to_configs(rm, &att, &vertices);
            Ok(QueryResult::finish(QueryStatus::Success, configs, start, cd0, 1))
        }
    }
}

fn vertices_to_configs(
    rm: &Roadmap,
    att: &Attachment,
    vertices: &[PathVertex],
) -> Vec<Configuration> {
    vertices
        .iter()
        .map(|v| match v {
            PathVertex::Start => att.start.clone(),
            PathVertex::Goal => att.goal.clone(),
            PathVertex::Node(i) => rm.nodes[*i].config.clone(),
        })
        .collect()
}

/// One candidate-path edge: either a stored roadmap edge or an attachment
/// link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum PathEdge {
    Stored(u32),
    StartLink(u32),
    GoalLink(u32),
}

/// LazyPRM: stored labels are ignored, and each query starts from scratch.
/// The shortest candidate path (by length) is searched ignoring labels; its
/// vertices are validated first, then its edges coarse-to-fine (every 27th
/// interpolation sample, every 16th, then all). Any failing element is
/// dropped from this query's candidate graph and the search repeats.
pub fn lazy_prm_query(
    rm: &Roadmap,
    r: &RobotModel,
    env: &Environment,
    s: &Configuration,
    t: &Configuration,
    k: usize,
) -> Result<QueryResult> {
    let start = Instant::now();
    let cd0 = stats::snapshot().config_checks;
    if !endpoint_free(r, env, s)? || !endpoint_free(r, env, t)? {
        return Ok(QueryResult::finish(QueryStatus::InvalidQuery, vec![], start, cd0, 0));
    }
    if config_distance(r, s, t)? == 0.0 {
        return Ok(QueryResult::finish(QueryStatus::Success, vec![s.clone()], start, cd0, 1));
    }
    let mut att = match attach_query(rm, r, env, s, t, k, false) {
        Ok(att) => att,
        Err(crate::Error::Unconnectable) => {
            return Ok(QueryResult::finish(QueryStatus::NoPath, vec![], start, cd0, 1));
        }
        Err(e) => return Err(e),
    };

    let mut excluded_nodes: HashSet<usize> = HashSet::new();
    let mut excluded_edges: HashSet<u32> = HashSet::new();
    // Per-query caches: node validity, and the finest stride each edge has
    // already passed.
    let mut node_ok: HashMap<usize, bool> = HashMap::new();
    let mut edge_passed: HashMap<PathEdge, usize> = HashMap::new();
    let mut iterations = 0u64;

    'search: loop {
        iterations += 1;
        let Some(vertices) = shortest_path_attached(
            rm,
            &att,
            ValidityMode::IgnoreLabels,
            &excluded_nodes,
            &excluded_edges,
        ) else {
            return Ok(QueryResult::finish(QueryStatus::NoPath, vec![], start, cd0, iterations));
        };

        // Validate the path vertices; drop every failing one.
        let mut any_failed = false;
        for v in &vertices {
            if let PathVertex::Node(i) = v {
                let ok = match node_ok.get(i) {
                    Some(&ok) => ok,
                    None => {
                        let (ok, _) =
                            check_config(r, env, &rm.nodes[*i].config, ObstacleFilter::All)?;
                        node_ok.insert(*i, ok);
                        ok
                    }
                };
                if !ok {
                    excluded_nodes.insert(*i);
                    any_failed = true;
                }
            }
        }
        if any_failed {
            continue 'search;
        }

        // Hierarchical edge validation, whole path per pass.
        let edges = path_edges(rm, &att, &vertices);
        for stride in LAZY_STRIDES {
            for &(edge, ref p, ref q) in &edges {
                if edge_passed.get(&edge).is_some_and(|&done| done <= stride) {
                    continue;
                }
                if !validate_edge_stride(r, env, p, q, rm.resolution, stride)? {
                    exclude_edge(&mut att, &mut excluded_edges, edge);
                    continue 'search;
                }
                edge_passed.insert(edge, stride);
            }
        }

        let configs = vertices_to_configs(rm, &att, &vertices);
        return Ok(QueryResult::finish(QueryStatus::Success, configs, start, cd0, iterations));
    }
}

fn path_edges(
    rm: &Roadmap,
    att: &Attachment,
    vertices: &[PathVertex],
) -> Vec<(PathEdge, Configuration, Configuration)> {
    let edge_of: HashMap<(u32, u32), u32> = rm
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| ((e.a, e.b), i as u32))
        .collect();
    let mut out = Vec::new();
    for w in vertices.windows(2) {
        let (edge, p, q) = match (w[0], w[1]) {
            (PathVertex::Start, PathVertex::Node(i)) => (
                PathEdge::StartLink(i as u32),
                att.start.clone(),
                rm.nodes[i].config.clone(),
            ),
            (PathVertex::Node(i), PathVertex::Goal) => (
                PathEdge::GoalLink(i as u32),
                rm.nodes[i].config.clone(),
                att.goal.clone(),
            ),
            (PathVertex::Node(i), PathVertex::Node(j)) => {
                let key = (i.min(j) as u32, i.max(j) as u32);
                let idx = edge_of[&key];
                (
                    PathEdge::Stored(idx),
                    rm.nodes[i].config.clone(),
                    rm.nodes[j].config.clone(),
                )
            }
            _ => unreachable!("paths run start -> nodes -> goal"),
        };
        out.push((edge, p, q));
    }
    out
}

fn exclude_edge(att: &mut Attachment, excluded_edges: &mut HashSet<u32>, edge: PathEdge) {
    match edge {
        PathEdge::Stored(i) => {
            excluded_edges.insert(i);
        }
        PathEdge::StartLink(node) => {
            for l in &mut att.start_links {
                if l.node == node {
                    l.valid = Some(false);
                }
            }
        }
        PathEdge::GoalLink(node) => {
            for l in &mut att.goal_links {
                if l.node == node {
                    l.valid = Some(false);
                }
            }
        }
    }
}

/// Checks the edge at every `stride`-th interpolation sample, endpoints
/// always included. Stride 1 is full validation.
fn validate_edge_stride(
    r: &RobotModel,
    env: &Environment,
    p: &Configuration,
    q: &Configuration,
    resolution: f64,
    stride: usize,
) -> Result<bool> {
    let samples = interpolate(r, p, q, resolution)?;
    let last = samples.len() - 1;
    let mut i = 0;
    loop {
        let (ok, _) = check_config(r, env, &samples[i], ObstacleFilter::All)?;
        if !ok {
            return Ok(false);
        }
        if i == last {
            return Ok(true);
        }
        i = (i + stride).min(last);
    }
}

/// Standard RRT: uniform samples (goal with probability `goal_bias`),
/// extension from the metric-nearest tree node clamped into
/// `[min_extension, max_extension]`, full edge check per extension, success
/// when a new node reaches within `resolution` of the goal and the final
/// hop validates. Deterministic for a given seed; respects the time cap.
pub fn rrt_query(
    r: &RobotModel,
    env: &Environment,
    s: &Configuration,
    t: &Configuration,
    params: &RrtParams,
    resolution: f64,
) -> Result<QueryResult> {
    use rand::{Rng, SeedableRng};
    let start = Instant::now();
    let cd0 = stats::snapshot().config_checks;
    if !endpoint_free(r, env, s)? || !endpoint_free(r, env, t)? {
        return Ok(QueryResult::finish(QueryStatus::InvalidQuery, vec![], start, cd0, 0));
    }
    if config_distance(r, s, t)? == 0.0 {
        return Ok(QueryResult::finish(QueryStatus::Success, vec![s.clone()], start, cd0, 0));
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(params.seed);
    let mut tree: Vec<(Configuration, usize)> = vec![(s.clone(), usize::MAX)];
    let mut iterations = 0u64;

    let trace = |tree: &[(Configuration, usize)], mut i: usize| -> Vec<Configuration> {
        let mut path = Vec::new();
        while i != usize::MAX {
            path.push(tree[i].0.clone());
            i = tree[i].1;
        }
        path.reverse();
        path
    };

    // Immediate connection for queries shorter than the resolution.
    if config_distance(r, s, t)? <= resolution
        && crate::robot::is_edge_valid(r, env, s, t, resolution, ObstacleFilter::All)?
    {
        return Ok(QueryResult::finish(
            QueryStatus::Success,
            vec![s.clone(), t.clone()],
            start,
            cd0,
            0,
        ));
    }

    loop {
        if start.elapsed() >= params.time_cap {
            return Ok(QueryResult::finish(QueryStatus::Timeout, vec![], start, cd0, iterations));
        }
        iterations += 1;

        let target = if rng.random_range(0.0..1.0) < params.goal_bias {
            t.clone()
        } else {
            sample_config(r, &mut rng)
        };

        // Metric-nearest tree node, ties to the older node.
        let (mut best, mut best_d) = (0usize, f64::INFINITY);
        for (i, (c, _)) in tree.iter().enumerate() {
            let d = config_distance(r, c, &target)?;
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        if best_d < params.min_extension {
            continue;
        }
        let step = best_d.min(params.max_extension);
        let frac = step / best_d;
        let new = step_toward(r, &tree[best].0, &target, frac);
        if !crate::robot::is_edge_valid(r, env, &tree[best].0, &new, resolution, ObstacleFilter::All)? {
            continue;
        }
        tree.push((new.clone(), best));

        if config_distance(r, &new, t)? <= resolution {
            if crate::robot::is_edge_valid(r, env, &new, t, resolution, ObstacleFilter::All)? {
                let mut path = trace(&tree, tree.len() - 1);
                if config_distance(r, &new, t)? > 0.0 {
                    path.push(t.clone());
                }
                return Ok(QueryResult::finish(QueryStatus::Success, path, start, cd0, iterations));
            }
        }
    }
}

/// Linear step from `p` toward `q` at fraction `frac`, shortest-arc on
/// angular DOFs.
fn step_toward(r: &RobotModel, p: &Configuration, q: &Configuration, frac: f64) -> Configuration {
    let values = r
        .dofs
        .iter()
        .enumerate()
        .map(|(i, dof)| match dof.kind {
            DofKind::Translational => p.values[i] + (q.values[i] - p.values[i]) * frac,
            DofKind::Angular => wrap_angle(
                p.values[i] + crate::robot::angle_diff(p.values[i], q.values[i]) * frac,
            ),
        })
        .collect();
    Configuration::new(values)
}

#[cfg(test)]
mod tests;
