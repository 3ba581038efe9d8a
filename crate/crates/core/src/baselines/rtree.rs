//! A static R-tree over trajectory bounding rectangles, bulk loaded by
//! sort-tile-recursive packing, and its keyword-augmented variant.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::grid::Rect;
use crate::model::{Query, TopK, TopKAnswer, TrajId, Trajectory, WordId};

use super::{covers, score, BaselineStats};

pub const DEFAULT_FANOUT: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum RtNode {
    /// Child node indices.
    Inner { rect: Rect, children: Vec<usize> },
    /// `(trajectory, bounding rectangle)` entries.
    Leaf { rect: Rect, entries: Vec<(TrajId, Rect)> },
}

impl RtNode {
    pub fn rect(&self) -> Rect {
        match self {
            RtNode::Inner { rect, .. } | RtNode::Leaf { rect, .. } => *rect,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RTree {
    nodes: Vec<RtNode>,
    root: Option<usize>,
    fanout: usize,
}

fn center(r: &Rect) -> (f64, f64) {
    ((r.min_x + r.max_x) / 2.0, (r.min_y + r.max_y) / 2.0)
}

fn cover<'a>(rects: impl Iterator<Item = &'a Rect>) -> Rect {
    rects
        .copied()
        .reduce(|a, b| a.union(&b))
        .expect("non-empty group")
}

/// Orders items into STR groups of at most `fanout`.
fn str_groups<T>(mut items: Vec<(Rect, T)>, fanout: usize) -> Vec<Vec<(Rect, T)>> {
    let n = items.len();
    let leaves = n.div_ceil(fanout);
    let slabs = (leaves as f64).sqrt().ceil() as usize;
    let per_slab = slabs * fanout;
    items.sort_by(|a, b| center(&a.0).0.total_cmp(&center(&b.0).0));
    let mut groups = Vec::with_capacity(leaves);
    let mut rest = items;
    while !rest.is_empty() {
        let tail = rest.split_off(per_slab.min(rest.len()));
        let mut slab = std::mem::replace(&mut rest, tail);
        slab.sort_by(|a, b| center(&a.0).1.total_cmp(&center(&b.0).1));
        while !slab.is_empty() {
            let tail = slab.split_off(fanout.min(slab.len()));
            groups.push(std::mem::replace(&mut slab, tail));
        }
    }
    groups
}

impl RTree {
    /// Bulk loads the rectangles. `fanout` is raised to at least 2.
    pub fn build(mbrs: &[(TrajId, Rect)], fanout: usize) -> RTree {
        let fanout = fanout.max(2);
        let mut nodes = Vec::new();
        if mbrs.is_empty() {
            return RTree { nodes, root: None, fanout };
        }
        let mut level: Vec<(Rect, usize)> = str_groups(mbrs.iter().map(|&(t, r)| (r, t)).collect(), fanout)
            .into_iter()
            .map(|g| {
                let rect = cover(g.iter().map(|(r, _)| r));
                nodes.push(RtNode::Leaf {
                    rect,
                    entries: g.into_iter().map(|(r, t)| (t, r)).collect(),
                });
                (rect, nodes.len() - 1)
            })
            .collect();
        while level.len() > 1 {
            level = str_groups(level, fanout)
                .into_iter()
                .map(|g| {
                    let rect = cover(g.iter().map(|(r, _)| r));
                    nodes.push(RtNode::Inner {
                        rect,
                        children: g.into_iter().map(|(_, c)| c).collect(),
                    });
                    (rect, nodes.len() - 1)
                })
                .collect();
        }
        let root = Some(level[0].1);
        RTree { nodes, root, fanout }
    }

    pub fn from_trajectories(trajectories: &[Trajectory], fanout: usize) -> RTree {
        let mbrs: Vec<(TrajId, Rect)> = trajectories
            .iter()
            .map(|t| (t.id(), Rect::of_points(t.points()).expect("non-empty trajectory")))
            .collect();
        RTree::build(&mbrs, fanout)
    }

    pub fn nodes(&self) -> &[RtNode] {
        &self.nodes
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn fanout(&self) -> usize {
        self.fanout
    }

    pub fn height(&self) -> usize {
        let mut h = 0;
        let mut cur = self.root;
        while let Some(n) = cur {
            h += 1;
            cur = match &self.nodes[n] {
                RtNode::Inner { children, .. } => children.first().copied(),
                RtNode::Leaf { .. } => None,
            };
        }
        h
    }

    /// Best-first scan by rectangle distance. Each trajectory reached is
    /// keyword-checked and scored; the scan stops once the closest unexplored
    /// rectangle lies beyond the k-th best distance.
    pub fn top_k(&self, q: &Query, trajectories: &[Trajectory]) -> (TopKAnswer, BaselineStats) {
        best_first(self, None, q, trajectories)
    }
}

/// R-tree whose nodes also carry the union of their subtree's keywords.
#[derive(Debug, Clone, PartialEq)]
pub struct IrTree {
    tree: RTree,
    /// Sorted word set per node.
    pseudo_docs: Vec<Vec<WordId>>,
}

impl IrTree {
    pub fn build(trajectories: &[Trajectory], fanout: usize) -> IrTree {
        let tree = RTree::from_trajectories(trajectories, fanout);
        let unions: Vec<Vec<WordId>> = trajectories.iter().map(|t| t.keyword_union()).collect();
        let mut pseudo_docs = vec![Vec::new(); tree.nodes.len()];
        // Children are always created before their parent.
        for (i, node) in tree.nodes.iter().enumerate() {
            let mut words: Vec<WordId> = match node {
                RtNode::Leaf { entries, .. } => entries
                    .iter()
                    .flat_map(|(t, _)| unions[*t as usize].iter().copied())
                    .collect(),
                RtNode::Inner { children, .. } => children
                    .iter()
                    .flat_map(|&c| pseudo_docs[c].iter().copied())
                    .collect(),
            };
            words.sort_unstable();
            words.dedup();
            pseudo_docs[i] = words;
        }
        IrTree { tree, pseudo_docs }
    }

    pub fn tree(&self) -> &RTree {
        &self.tree
    }

    pub fn pseudo_doc(&self, node: usize) -> &[WordId] {
        &self.pseudo_docs[node]
    }

    /// Best-first scan that skips subtrees whose word set misses a query word.
    pub fn top_k(&self, q: &Query, trajectories: &[Trajectory]) -> (TopKAnswer, BaselineStats) {
        best_first(&self.tree, Some(&self.pseudo_docs), q, trajectories)
    }
}

#[derive(Debug, Clone, Copy)]
enum Item {
    Node(usize),
    Traj(TrajId),
}

struct Queued {
    dist: f64,
    item: Item,
}

impl Queued {
    fn key(&self) -> (u8, u32) {
        match self.item {
            Item::Node(n) => (0, n as u32),
            Item::Traj(t) => (1, t),
        }
    }
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    // Reversed: BinaryHeap pops the nearest first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.key().cmp(&self.key()))
    }
}

fn best_first(
    tree: &RTree,
    pseudo: Option<&[Vec<WordId>]>,
    q: &Query,
    trajectories: &[Trajectory],
) -> (TopKAnswer, BaselineStats) {
    let mut stats = BaselineStats::default();
    let mut heap = TopK::new(q.k);
    let Some(root) = tree.root else {
        return (heap.into_answer(), stats);
    };
    let admits = |node: usize| pseudo.is_none_or(|docs| covers(q, &docs[node]));
    let mut queue = BinaryHeap::new();
    if admits(root) {
        queue.push(Queued {
            dist: tree.nodes[root].rect().min_dist(q.point),
            item: Item::Node(root),
        });
    }
    while let Some(Queued { dist, item }) = queue.pop() {
        // Strict: an equal lower bound can still win on the id tie-break.
        if dist > heap.threshold() {
            break;
        }
        match item {
            Item::Traj(t) => {
                let traj = &trajectories[t as usize];
                if pseudo.is_some() || covers(q, &traj.keyword_union()) {
                    let r = score(q, traj, heap.threshold(), &mut stats);
                    heap.offer(r);
                }
            }
            Item::Node(n) => {
                stats.nodes_visited += 1;
                match &tree.nodes[n] {
                    RtNode::Inner { children, .. } => {
                        for &c in children {
                            if admits(c) {
                                queue.push(Queued {
                                    dist: tree.nodes[c].rect().min_dist(q.point),
                                    item: Item::Node(c),
                                });
                            }
                        }
                    }
                    RtNode::Leaf { entries, .. } => {
                        for &(t, rect) in entries {
                            // Leaf entries carry their trajectory's own word set.
                            if pseudo.is_some() && !covers(q, &trajectories[t as usize].keyword_union()) {
                                continue;
                            }
                            queue.push(Queued {
                                dist: rect.min_dist(q.point),
                                item: Item::Traj(t),
                            });
                        }
                    }
                }
            }
        }
    }
    (heap.into_answer(), stats)
}
