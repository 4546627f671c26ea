//! Swept-volume capsule index: one cigar per robot body per roadmap
//! element, a ternary AABB tree over the cigars, and the incidence-driven
//! update operation that relabels elements when an obstacle moves.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::{Duration, Instant};

use crate::geom::{
    approx_min_obb, enclosing_cigar_of_obb, intersect_cigar_aabb, Aabb, Bounded, Cigar,
    RigidTransform, Vec3,
};
use crate::roadmap::{ChangeReport, ElementId, Roadmap};
use crate::robot::{
    config_blocked_by, edge_blocked_by, forward_kinematics, interpolate, Configuration,
    Environment, ObstacleId, RobotModel,
};
use crate::stats;
use crate::Result;

/// Default approximation factor for the oriented-box fit.
pub const DEFAULT_EPSILON: f64 = 0.1;
/// Default tree leaf capacity.
pub const DEFAULT_LEAF_CAPACITY: usize = 8;

/// A bounding cigar for one body of one roadmap element.
#[derive(Debug, Clone, PartialEq)]
pub struct CigarEntry {
    pub cigar: Cigar,
    pub element: ElementId,
    pub body_index: usize,
}

/// One cigar per robot body covering the body's vertices at configuration
/// `c`: vertex cloud -> approximate minimum-volume oriented box -> smallest
/// enclosing cigar.
pub fn cigars_for_node(
    r: &RobotModel,
    c: &Configuration,
    element: ElementId,
    epsilon: f64,
) -> Result<Vec<CigarEntry>> {
    let posed = forward_kinematics(r, c)?;
    posed
        .iter()
        .enumerate()
        .map(|(body_index, body)| {
            let cloud = body.world_vertices();
            let obb = approx_min_obb(&cloud, epsilon)?;
            Ok(CigarEntry { cigar: enclosing_cigar_of_obb(&obb), element, body_index })
        })
        .collect()
}

/// One cigar per robot body covering that body's vertices over every
/// interpolated configuration of the edge.
pub fn cigars_for_edge(
    r: &RobotModel,
    p: &Configuration,
    q: &Configuration,
    resolution: f64,
    element: ElementId,
    epsilon: f64,
) -> Result<Vec<CigarEntry>> {
    let mut clouds: Vec<Vec<Vec3>> = vec![Vec::new(); r.bodies.len()];
    for c in interpolate(r, p, q, resolution)? {
        for (i, body) in forward_kinematics(r, &c)?.into_iter().enumerate() {
            clouds[i].extend(body.world_vertices());
        }
    }
    clouds
        .into_iter()
        .enumerate()
        .map(|(body_index, cloud)| {
            let obb = approx_min_obb(&cloud, epsilon)?;
            Ok(CigarEntry { cigar: enclosing_cigar_of_obb(&obb), element, body_index })
        })
        .collect()
}

/// Ternary AABB tree over cigars. Internal nodes split their box at the
/// midpoint of the longest axis; entries strictly on one side go to that
/// child, straddlers to the third child. Every entry is stored in exactly
/// one leaf.
#[derive(Debug, Clone)]
pub struct CigarTree {
    nodes: Vec<TreeNode>,
    /// Cigar AABBs, indexed like the entry list the tree was built from.
    entry_boxes: Vec<Aabb>,
    root: Option<u32>,
    pub leaf_capacity: usize,
}

#[derive(Debug, Clone)]
enum TreeNode {
    Internal { aabb: Aabb, children: [Option<u32>; 3] },
    Leaf { aabb: Aabb, entries: Vec<u32> },
}

impl TreeNode {
    fn aabb(&self) -> &Aabb {
        match self {
            TreeNode::Internal { aabb, .. } | TreeNode::Leaf { aabb, .. } => aabb,
        }
    }
}

const MAX_DEPTH: usize = 64;

/// Builds the tree over the given entries.
pub fn tree_build(entries: &[CigarEntry], leaf_capacity: usize) -> CigarTree {
    assert!(leaf_capacity >= 1);
    let entry_boxes: Vec<Aabb> = entries.iter().map(|e| e.cigar.aabb()).collect();
    let mut tree = CigarTree { nodes: Vec::new(), entry_boxes, root: None, leaf_capacity };
    if entries.is_empty() {
        return tree;
    }
    let all: Vec<u32> = (0..entries.len() as u32).collect();
    let root = build_node(&mut tree, all, 0);
    tree.root = Some(root);
    tree
}

fn boxes_union(tree: &CigarTree, idxs: &[u32]) -> Aabb {
    idxs.iter()
        .map(|&i| tree.entry_boxes[i as usize])
        .reduce(|a, b| a.union(b))
        .expect("non-empty entry list")
}

fn build_node(tree: &mut CigarTree, idxs: Vec<u32>, depth: usize) -> u32 {
    let aabb = boxes_union(tree, &idxs);
    if idxs.len() <= tree.leaf_capacity || depth >= MAX_DEPTH {
        let id = tree.nodes.len() as u32;
        tree.nodes.push(TreeNode::Leaf { aabb, entries: idxs });
        return id;
    }
    let axis = aabb.longest_axis();
    let split = aabb.center().axis(axis);
    let mut low = Vec::new();
    let mut high = Vec::new();
    let mut straddle = Vec::new();
    for i in idxs {
        let b = &tree.entry_boxes[i as usize];
        if b.max.axis(axis) <= split {
            low.push(i);
        } else if b.min.axis(axis) >= split {
            high.push(i);
        } else {
            straddle.push(i);
        }
    }
    // Guard: a split that separates nothing would recurse forever.
    let total = low.len() + high.len() + straddle.len();
    if low.len() == total || high.len() == total || straddle.len() == total {
        let entries = [low, high, straddle].into_iter().flatten().collect();
        let id = tree.nodes.len() as u32;
        tree.nodes.push(TreeNode::Leaf { aabb, entries });
        return id;
    }
    let mut children = [None, None, None];
    for (slot, part) in [low, high, straddle].into_iter().enumerate() {
        if !part.is_empty() {
            let child = build_node(tree, part, depth + 1);
            children[slot] = Some(child);
        }
    }
    let id = tree.nodes.len() as u32;
    tree.nodes.push(TreeNode::Internal { aabb, children });
    id
}

impl CigarTree {
    /// Entry indices whose cigar intersects `q` (exact capsule-box test at
    /// the leaves), sorted ascending.
    pub fn query(&self, entries: &[CigarEntry], q: &Aabb) -> Vec<u32> {
        let mut out = Vec::new();
        let Some(root) = self.root else {
            return out;
        };
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            if !node.aabb().intersects(q) {
                continue;
            }
            match node {
                TreeNode::Internal { children, .. } => {
                    for child in children.iter().flatten() {
                        stack.push(*child);
                    }
                }
                TreeNode::Leaf { entries: idxs, .. } => {
                    for &i in idxs {
                        if self.entry_boxes[i as usize].intersects(q)
                            && intersect_cigar_aabb(&entries[i as usize].cigar, q)
                        {
                            out.push(i);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Maximum node depth, for diagnostics.
    pub fn depth(&self) -> usize {
        fn walk(tree: &CigarTree, id: u32) -> usize {
            match &tree.nodes[id as usize] {
                TreeNode::Leaf { .. } => 1,
                TreeNode::Internal { children, .. } => {
                    1 + children.iter().flatten().map(|&c| walk(tree, c)).max().unwrap_or(0)
                }
            }
        }
        self.root.map(|r| walk(self, r)).unwrap_or(0)
    }

    /// All entry indices reachable through leaves, in storage order
    /// (each exactly once if the structure is sound).
    pub fn stored_entries(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for node in &self.nodes {
            if let TreeNode::Leaf { entries, .. } = node {
                out.extend_from_slice(entries);
            }
        }
        out
    }
}

/// The capsule index: all cigars, the tree over them, and the
/// obstacle-to-element incidence map mirroring the roadmap's blocker lists.
#[derive(Debug, Clone)]
pub struct SpiteIndex {
    pub entries: Vec<CigarEntry>,
    pub tree: CigarTree,
    pub obstacle_incidence: BTreeMap<ObstacleId, BTreeSet<ElementId>>,
    /// Element owners of each entry range, used to map tree hits back.
    pub epsilon: f64,
    /// Wall time spent in [`preprocess`].
    pub preprocess_time: Duration,
}

/// Builds the capsule index: cigars for every node and edge, the tree, and
/// initial validity for every element by exact collision checks against all
/// obstacles (recorded into both the roadmap labels and the incidence map).
pub fn preprocess(
    rm: &mut Roadmap,
    r: &RobotModel,
    env: &Environment,
    epsilon: f64,
    leaf_capacity: usize,
) -> Result<SpiteIndex> {
    let start = Instant::now();
    let mut entries = Vec::new();
    for i in 0..rm.nodes.len() {
        let element = ElementId::Node(i as u32);
        entries.extend(cigars_for_node(r, &rm.nodes[i].config, element, epsilon)?);
    }
    for i in 0..rm.edges.len() {
        let element = ElementId::Edge(i as u32);
        let (p, q) = rm.edge_configs(i as u32);
        entries.extend(cigars_for_edge(r, p, q, rm.resolution, element, epsilon)?);
    }
    let tree = tree_build(&entries, leaf_capacity);

    crate::roadmap::full_revalidate(rm, r, env, crate::robot::ObstacleFilter::All)?;
    let obstacle_incidence = incidence_from_roadmap(rm, env);

    Ok(SpiteIndex {
        entries,
        tree,
        obstacle_incidence,
        epsilon,
        preprocess_time: start.elapsed(),
    })
}

/// Rebuilds the obstacle-to-element map from the roadmap's blocker lists.
pub fn incidence_from_roadmap(
    rm: &Roadmap,
    env: &Environment,
) -> BTreeMap<ObstacleId, BTreeSet<ElementId>> {
    let mut map: BTreeMap<ObstacleId, BTreeSet<ElementId>> =
        env.obstacle_ids().map(|id| (id, BTreeSet::new())).collect();
    for e in rm.element_ids() {
        for &o in rm.state(e).unwrap().blockers() {
            map.entry(o).or_default().insert(e);
        }
    }
    map
}

impl SpiteIndex {
    /// Distinct elements owning any cigar that intersects `q`.
    pub fn elements_hitting(&self, q: &Aabb) -> BTreeSet<ElementId> {
        self.tree
            .query(&self.entries, q)
            .into_iter()
            .map(|i| self.entries[i as usize].element)
            .collect()
    }
}

/// Exact re-check of one element against one obstacle. Counts one
/// element-level CD call.
fn element_blocked_by(
    rm: &Roadmap,
    r: &RobotModel,
    env: &Environment,
    e: ElementId,
    o: ObstacleId,
) -> Result<bool> {
    stats::count_element_check();
    match e {
        ElementId::Node(i) => config_blocked_by(r, env, &rm.nodes[i as usize].config, o),
        ElementId::Edge(i) => {
            let (p, q) = rm.edge_configs(i);
            edge_blocked_by(r, env, p, q, rm.resolution, o)
        }
    }
}

/// Moves obstacle `o` by the rigid transform `t` (new pose `t *` old pose)
/// and repairs every label:
///
/// 1. the obstacle pose is updated;
/// 2. the previously blocked elements (incidence snapshot) plus every
///    element whose cigar intersects the obstacle's new bounding box are
///    re-checked against this obstacle only;
/// 3. blocked elements gain the obstacle in their blocker list, freed
///    elements drop it and flip back to valid when the list empties;
/// 4. the incidence map is kept the exact inverse of the blocker lists.
///
/// Exact collision checks run only on the candidate union, never the whole
/// graph.
pub fn update(
    index: &mut SpiteIndex,
    rm: &mut Roadmap,
    r: &RobotModel,
    env: &mut Environment,
    o: ObstacleId,
    t: RigidTransform,
) -> Result<ChangeReport> {
    let obstacle = env.obstacle_mut(o)?;
    obstacle.pose = t.compose(obstacle.pose);
    let rev_candidates: Vec<ElementId> = index
        .obstacle_incidence
        .get(&o)
        .map(|s| s.iter().copied().collect())
        .unwrap_or_default();

    let query_box = env.obstacle(o)?.aabb();
    let inv_candidates = index.elements_hitting(&query_box);

    relabel_candidates(
        rm,
        r,
        env,
        o,
        &inv_candidates,
        rev_candidates,
        &mut index.obstacle_incidence,
    )
}

/// Shared tail of every retrieval-based update: re-checks the invalidation
/// candidates and the previously blocked elements against the moved
/// obstacle, applies label flips and keeps the incidence map coherent. An
/// element in both candidate sets is checked once.
pub(crate) fn relabel_candidates(
    rm: &mut Roadmap,
    r: &RobotModel,
    env: &Environment,
    o: ObstacleId,
    inv_candidates: &BTreeSet<ElementId>,
    rev_candidates: Vec<ElementId>,
    incidence: &mut BTreeMap<ObstacleId, BTreeSet<ElementId>>,
) -> Result<ChangeReport> {
    let mut report = ChangeReport::default();
    let mut checked: HashMap<ElementId, bool> = HashMap::new();

    for &e in inv_candidates {
        let blocked = element_blocked_by(rm, r, env, e, o)?;
        checked.insert(e, blocked);
        if blocked {
            if rm.add_blocker(e, o) {
                report.newly_invalid.push(e);
            }
            incidence.entry(o).or_default().insert(e);
        }
    }

    for e in rev_candidates {
        let blocked = match checked.get(&e) {
            Some(&b) => b,
            None => element_blocked_by(rm, r, env, e, o)?,
        };
        if !blocked {
            if rm.remove_blocker(e, o) {
                report.newly_valid.push(e);
            }
            incidence.entry(o).or_default().remove(&e);
        }
    }

    Ok(report.finish())
}
