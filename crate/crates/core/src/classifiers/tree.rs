//! Binary Gini trees grown to `min_leaf` granularity and pruned back to a
//! leaf budget by weakest-link (cost-complexity) pruning.
//!
//! Pruning removes one leaf per step so that every leaf count between the
//! grown size and 1 is reachable, and the trees for different budgets are
//! nested. Each step finds the internal node `t` with the smallest
//! `g(t) = (R(t) - R(T_t)) / (|T_t| - 1)`, where `R` counts training
//! errors, then walks down to the weakest-link twig (internal node whose
//! children are both leaves) inside `T_t` and collapses it. Ties pick the
//! node visited first in preorder.

use nalgebra::DVectorView;

use crate::data::Dataset;
use crate::error::{ensure, Result};

use super::{majority_score, ClassifierModel, FitConfig};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Leaf {
        score: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A fitted tree. Rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq)]
pub struct PrunedTree {
    pub(crate) nodes: Vec<Node>,
    pub(crate) dim: usize,
}

impl PrunedTree {
    pub fn leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn score_row(&self, x: DVectorView<'_, f64>) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { score } => return *score,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

struct Grown {
    feature: usize,
    threshold: f64,
    n0: usize,
    n1: usize,
    children: Option<(usize, usize)>,
}

/// `n * gini`, i.e. `2 n0 n1 / n`.
fn weighted_gini(n0: usize, n1: usize) -> f64 {
    let n = n0 + n1;
    if n == 0 {
        0.0
    } else {
        2.0 * n0 as f64 * n1 as f64 / n as f64
    }
}

struct Grower<'a> {
    data: &'a Dataset,
    min_leaf: usize,
    nodes: Vec<Grown>,
}

impl Grower<'_> {
    fn grow(&mut self, rows: Vec<usize>) -> usize {
        let labels = self.data.labels();
        let n1 = rows.iter().filter(|&&r| labels[r] == 1).count();
        let n0 = rows.len() - n1;
        let id = self.nodes.len();
        self.nodes.push(Grown {
            feature: 0,
            threshold: 0.0,
            n0,
            n1,
            children: None,
        });
        if n0 == 0 || n1 == 0 || rows.len() < 2 * self.min_leaf {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&rows, n0, n1) else {
            return id;
        };
        let x = self.data.features();
        let (left, right): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&r| x[(r, feature)] <= threshold);
        let l = self.grow(left);
        let r = self.grow(right);
        let node = &mut self.nodes[id];
        node.feature = feature;
        node.threshold = threshold;
        node.children = Some((l, r));
        id
    }

    fn best_split(&self, rows: &[usize], n0: usize, n1: usize) -> Option<(usize, f64)> {
        let x = self.data.features();
        let labels = self.data.labels();
        let parent = weighted_gini(n0, n1);
        let n = rows.len();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = rows.to_vec();
        for j in 0..self.data.p() {
            sorted.sort_by(|&a, &b| x[(a, j)].total_cmp(&x[(b, j)]).then(a.cmp(&b)));
            let (mut l0, mut l1) = (0usize, 0usize);
            for i in 0..n - 1 {
                if labels[sorted[i]] == 1 {
                    l1 += 1;
                } else {
                    l0 += 1;
                }
                let left_n = i + 1;
                if left_n < self.min_leaf || n - left_n < self.min_leaf {
                    continue;
                }
                let (v, next) = (x[(sorted[i], j)], x[(sorted[i + 1], j)]);
                if v == next {
                    continue;
                }
                let gain = parent - weighted_gini(l0, l1) - weighted_gini(n0 - l0, n1 - l1);
                // strict improvement keeps the lowest feature, then lowest threshold
                if best.is_none_or(|(g, _, _)| gain > g + 1e-12) {
                    best = Some((gain, j, v + (next - v) / 2.0));
                }
            }
        }
        best.filter(|(g, _, _)| *g > -1e-12).map(|(_, j, t)| (j, t))
    }
}

/// Pruning state over the grown tree.
struct Pruner<'a> {
    grown: &'a [Grown],
    collapsed: Vec<bool>,
}

impl Pruner<'_> {
    fn children(&self, id: usize) -> Option<(usize, usize)> {
        if self.collapsed[id] {
            None
        } else {
            self.grown[id].children
        }
    }

    fn node_errors(&self, id: usize) -> usize {
        self.grown[id].n0.min(self.grown[id].n1)
    }

    /// (subtree errors, subtree leaves) for every active node, indexed by id.
    fn subtree_stats(&self) -> Vec<(usize, usize)> {
        let mut stats = vec![(0, 0); self.grown.len()];
        // children always have larger ids than their parent
        for id in (0..self.grown.len()).rev() {
            stats[id] = match self.children(id) {
                None => (self.node_errors(id), 1),
                Some((l, r)) => (stats[l].0 + stats[r].0, stats[l].1 + stats[r].1),
            };
        }
        stats
    }

    fn leaves(&self) -> usize {
        self.subtree_stats()[0].1
    }

    /// Active internal nodes of the subtree rooted at `root`, in preorder.
    fn internal_nodes(&self, root: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if let Some((l, r)) = self.children(id) {
                out.push(id);
                stack.push(r);
                stack.push(l);
            }
        }
        out
    }

    fn weakest(&self, candidates: &[usize], stats: &[(usize, usize)]) -> Option<usize> {
        let g = |id: usize| {
            let (err, leaves) = stats[id];
            (self.node_errors(id) - err) as f64 / (leaves - 1) as f64
        };
        let mut best: Option<(f64, usize)> = None;
        for &id in candidates {
            let v = g(id);
            if best.is_none_or(|(b, _)| v < b) {
                best = Some((v, id));
            }
        }
        best.map(|(_, id)| id)
    }

    /// Collapse one twig, reducing the leaf count by one.
    fn step(&mut self) {
        let stats = self.subtree_stats();
        let mut at = self
            .weakest(&self.internal_nodes(0), &stats)
            .expect("tree has a split");
        loop {
            let inner: Vec<usize> = self.internal_nodes(at).into_iter().skip(1).collect();
            match self.weakest(&inner, &stats) {
                Some(next) => at = next,
                None => break,
            }
        }
        self.collapsed[at] = true;
    }

    fn snapshot(&self, dim: usize) -> PrunedTree {
        let mut nodes = Vec::new();
        self.emit(0, &mut nodes);
        PrunedTree { nodes, dim }
    }

    fn emit(&self, id: usize, out: &mut Vec<Node>) -> usize {
        let at = out.len();
        let g = &self.grown[id];
        match self.children(id) {
            None => out.push(Node::Leaf {
                score: majority_score(g.n0, g.n1),
            }),
            Some((l, r)) => {
                out.push(Node::Leaf { score: 0.0 });
                let left = self.emit(l, out);
                let right = self.emit(r, out);
                out[at] = Node::Split {
                    feature: g.feature,
                    threshold: g.threshold,
                    left,
                    right,
                };
            }
        }
        at
    }
}

fn grow(data: &Dataset, cfg: &FitConfig) -> Result<Vec<Grown>> {
    cfg.validate()?;
    data.require_both_classes("tree")?;
    let mut grower = Grower {
        data,
        min_leaf: cfg.min_leaf,
        nodes: Vec::new(),
    };
    grower.grow((0..data.n()).collect());
    Ok(grower.nodes)
}

/// Fit a tree with at most `cfg.max_leaves` leaves (exactly that many when
/// the grown tree is at least that large).
pub fn fit_tree(data: &Dataset, cfg: &FitConfig) -> Result<PrunedTree> {
    ensure!(cfg.max_leaves >= 1, Precondition, "max_leaves must be >= 1");
    let grown = grow(data, cfg)?;
    let mut pruner = Pruner {
        grown: &grown,
        collapsed: vec![false; grown.len()],
    };
    let mut leaves = pruner.leaves();
    while leaves > cfg.max_leaves {
        pruner.step();
        leaves -= 1;
    }
    Ok(pruner.snapshot(data.p()))
}

/// Fit once and return the pruned tree for every requested leaf budget, in
/// the order given. Equivalent to calling [`fit_tree`] per budget.
pub fn fit_tree_sequence(
    data: &Dataset,
    cfg: &FitConfig,
    budgets: &[usize],
) -> Result<Vec<ClassifierModel>> {
    ensure!(
        budgets.iter().all(|&b| b >= 1),
        Precondition,
        "leaf budgets must be >= 1"
    );
    let grown = grow(data, cfg)?;
    let mut pruner = Pruner {
        grown: &grown,
        collapsed: vec![false; grown.len()],
    };
    let mut leaves = pruner.leaves();
    let mut order: Vec<usize> = (0..budgets.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(budgets[i]));
    let mut out = vec![None; budgets.len()];
    for i in order {
        while leaves > budgets[i] {
            pruner.step();
            leaves -= 1;
        }
        out[i] = Some(ClassifierModel::Tree(pruner.snapshot(data.p())));
    }
    Ok(out.into_iter().map(Option::unwrap).collect())
}
