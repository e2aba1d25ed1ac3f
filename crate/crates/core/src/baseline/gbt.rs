use serde::{Deserialize, Serialize};

use super::{BaselineError, SparseMatrix, SparseVec};
use crate::corpus::Label;
use crate::head::sigmoid;

/// Candidate gains closer than this are treated as equal; the earlier
/// (feature, threshold) in scan order wins.
const GAIN_TIE: f64 = 1e-12;
/// Children whose hessian sum does not exceed this are not formed.
const MIN_HESS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtConfig {
    pub rounds: usize,
    pub max_depth: usize,
    pub shrinkage: f64,
    pub min_gain: f64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig { rounds: 200, max_depth: 4, shrinkage: 0.1, min_gain: 0.0 }
    }
}

impl GbtConfig {
    pub fn validate(&self) -> Result<(), BaselineError> {
        if self.max_depth == 0 {
            return Err(BaselineError::Config("max_depth must be at least 1".into()));
        }
        if !(self.shrinkage > 0.0 && self.shrinkage.is_finite()) {
            return Err(BaselineError::Config(format!("shrinkage must be positive, got {}", self.shrinkage)));
        }
        if !(self.min_gain >= 0.0 && self.min_gain.is_finite()) {
            return Err(BaselineError::Config(format!("min_gain must be non-negative, got {}", self.min_gain)));
        }
        Ok(())
    }
}

/// Rows with `x[feature] < threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: u32,
    pub threshold: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf(f64),
    Split { feature: u32, threshold: f64, left: u32, right: u32 },
}

/// Regression tree stored as a node arena; node 0 is the root and children
/// always come after their parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf_value(&self, row: &SparseVec) -> f64 {
        let mut at = 0usize;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf(v) => return v,
                TreeNode::Split { feature, threshold, left, right } => {
                    at = if row.get(feature) < threshold { left } else { right } as usize;
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match nodes[at] {
                TreeNode::Leaf(_) => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, left as usize).max(walk(nodes, right as usize)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub trees: Vec<Tree>,
    pub shrinkage: f64,
    pub base_score: f64,
}

impl GbtModel {
    pub fn margin(&self, row: &SparseVec) -> f64 {
        self.base_score + self.shrinkage * self.trees.iter().map(|t| t.leaf_value(row)).sum::<f64>()
    }

    pub fn predict_row(&self, row: &SparseVec) -> f64 {
        sigmoid(self.margin(row))
    }
}

pub fn gbt_predict(model: &GbtModel, x: &SparseMatrix) -> Vec<f64> {
    x.rows.iter().map(|r| model.predict_row(r)).collect()
}

/// Mean logistic loss of margins against labels.
pub fn logistic_loss(margins: &[f64], y: &[Label]) -> f64 {
    let total: f64 = margins
        .iter()
        .zip(y)
        .map(|(&m, l)| {
            // ln(1 + e^m) − y·m, in overflow-safe form
            let softplus = if m > 0.0 { m + (-m).exp().ln_1p() } else { m.exp().ln_1p() };
            softplus - l.target() * m
        })
        .sum();
    total / margins.len() as f64
}

/// Each column's nonzero entries, ordered by value then row.
struct ColumnIndex {
    cols: Vec<Vec<(u32, f64)>>,
}

impl ColumnIndex {
    fn new(x: &SparseMatrix) -> Self {
        let mut cols = vec![Vec::new(); x.n_cols];
        for (r, row) in x.rows.iter().enumerate() {
            for (c, v) in row.iter() {
                cols[c as usize].push((r as u32, v));
            }
        }
        for col in &mut cols {
            col.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        }
        ColumnIndex { cols }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Stats {
    g: f64,
    h: f64,
    n: usize,
}

fn score(g: f64, h: f64) -> f64 {
    g * g / h
}

/// Best split of one feature within one node. `entries` are the node's
/// nonzero `(value, g, h)` triples in ascending value order; all other rows
/// of the node hold an implicit zero.
fn scan_feature(feature: u32, entries: &[(f64, f64, f64)], total: Stats, best: &mut Option<Split>) {
    // Distinct-value groups: (value, g, h), zero group merged in order.
    let mut groups: Vec<(f64, f64, f64)> = Vec::with_capacity(entries.len() + 1);
    let (mut gz, mut hz) = (total.g, total.h);
    let zeros = total.n - entries.len();
    let mut zero_placed = zeros == 0;
    for &(v, g, h) in entries {
        gz -= g;
        hz -= h;
        if !zero_placed && v > 0.0 {
            groups.push((0.0, f64::NAN, f64::NAN));
            zero_placed = true;
        }
        match groups.last_mut() {
            Some(last) if last.0 == v => {
                last.1 += g;
                last.2 += h;
            }
            _ => groups.push((v, g, h)),
        }
    }
    if !zero_placed {
        groups.push((0.0, f64::NAN, f64::NAN));
    }
    if zeros > 0 {
        let z = groups.iter_mut().find(|x| x.1.is_nan()).unwrap();
        z.1 = gz;
        z.2 = hz;
    }
    if groups.len() < 2 {
        return;
    }

    let parent = score(total.g, total.h);
    let (mut gl, mut hl) = (0.0, 0.0);
    for w in groups.windows(2) {
        gl += w[0].1;
        hl += w[0].2;
        let (gr, hr) = (total.g - gl, total.h - hl);
        if hl <= MIN_HESS || hr <= MIN_HESS {
            continue;
        }
        let gain = 0.5 * (score(gl, hl) + score(gr, hr) - parent);
        let mut threshold = 0.5 * (w[0].0 + w[1].0);
        if threshold <= w[0].0 {
            threshold = w[1].0;
        }
        if best.map_or(true, |b| gain > b.gain + GAIN_TIE) {
            *best = Some(Split { feature, threshold, gain });
        }
    }
}

/// Best split for several nodes at once. `node_of[r]` is the slot of row
/// `r`, or `None` when the row belongs to no node being split.
fn best_splits(
    index: &ColumnIndex,
    node_of: &[Option<usize>],
    totals: &[Stats],
    grad: &[f64],
    hess: &[f64],
) -> Vec<Option<Split>> {
    let mut best = vec![None; totals.len()];
    let mut buckets: Vec<Vec<(f64, f64, f64)>> = vec![Vec::new(); totals.len()];
    for (feature, col) in index.cols.iter().enumerate() {
        for b in &mut buckets {
            b.clear();
        }
        for &(r, v) in col {
            if let Some(slot) = node_of[r as usize] {
                buckets[slot].push((v, grad[r as usize], hess[r as usize]));
            }
        }
        for (slot, entries) in buckets.iter().enumerate() {
            if !entries.is_empty() {
                scan_feature(feature as u32, entries, totals[slot], &mut best[slot]);
            }
        }
    }
    best
}

/// Exact greedy best split of `rows`, scanning features in ascending order
/// and thresholds (midpoints between consecutive distinct values) in
/// ascending order. Gain is `½ (G_L²/H_L + G_R²/H_R − G²/H)`.
pub fn find_best_split(x: &SparseMatrix, grad: &[f64], hess: &[f64], rows: &[usize]) -> Option<Split> {
    let index = ColumnIndex::new(x);
    let mut node_of = vec![None; x.n_rows()];
    let mut total = Stats::default();
    for &r in rows {
        node_of[r] = Some(0);
        total.g += grad[r];
        total.h += hess[r];
        total.n += 1;
    }
    best_splits(&index, &node_of, &[total], grad, hess).pop().flatten()
}

fn leaf_value(s: Stats) -> f64 {
    if s.h > MIN_HESS {
        -s.g / s.h
    } else {
        0.0
    }
}

/// Grows one tree level by level. Returns `None` when the root cannot be
/// split.
fn grow_tree(
    x: &SparseMatrix,
    index: &ColumnIndex,
    grad: &[f64],
    hess: &[f64],
    config: &GbtConfig,
) -> Option<Tree> {
    let n = x.n_rows();
    let mut nodes = vec![TreeNode::Leaf(0.0)];
    let mut stats = vec![Stats { g: grad.iter().sum(), h: hess.iter().sum(), n }];
    let mut row_node: Vec<u32> = vec![0; n];
    let mut frontier: Vec<u32> = vec![0];

    for _ in 0..config.max_depth {
        let active: Vec<u32> = frontier.iter().copied().filter(|&id| stats[id as usize].n >= 2).collect();
        if active.is_empty() {
            break;
        }
        let mut slot_of = vec![None; nodes.len()];
        for (slot, &id) in active.iter().enumerate() {
            slot_of[id as usize] = Some(slot);
        }
        let node_of: Vec<Option<usize>> = row_node.iter().map(|&id| slot_of[id as usize]).collect();
        let totals: Vec<Stats> = active.iter().map(|&id| stats[id as usize]).collect();
        let splits = best_splits(index, &node_of, &totals, grad, hess);

        let mut next = Vec::new();
        let mut children: Vec<Option<(u32, u32, Split)>> = vec![None; nodes.len()];
        for (&id, split) in active.iter().zip(splits) {
            let Some(split) = split.filter(|s| s.gain > config.min_gain) else { continue };
            let left = nodes.len() as u32;
            nodes.push(TreeNode::Leaf(0.0));
            nodes.push(TreeNode::Leaf(0.0));
            stats.push(Stats::default());
            stats.push(Stats::default());
            nodes[id as usize] = TreeNode::Split { feature: split.feature, threshold: split.threshold, left, right: left + 1 };
            children[id as usize] = Some((left, left + 1, split));
            next.extend([left, left + 1]);
        }
        if next.is_empty() {
            break;
        }
        for (r, node) in row_node.iter_mut().enumerate() {
            if let Some(&Some((left, right, split))) = children.get(*node as usize) {
                *node = if x.rows[r].get(split.feature) < split.threshold { left } else { right };
                let s = &mut stats[*node as usize];
                s.g += grad[r];
                s.h += hess[r];
                s.n += 1;
            }
        }
        frontier = next;
    }
    if nodes.len() == 1 {
        return None;
    }
    for (node, s) in nodes.iter_mut().zip(&stats) {
        if let TreeNode::Leaf(v) = node {
            *v = leaf_value(*s);
        }
    }
    Some(Tree { nodes })
}

fn check_inputs(x: &SparseMatrix, y: &[Label], config: &GbtConfig) -> Result<(), BaselineError> {
    config.validate()?;
    if x.n_rows() != y.len() {
        return Err(BaselineError::LengthMismatch { rows: x.n_rows(), labels: y.len() });
    }
    let Some(&first) = y.first() else {
        return Err(BaselineError::EmptyCorpus);
    };
    if y.iter().all(|&l| l == first) {
        return Err(BaselineError::SingleClass(first));
    }
    Ok(())
}

pub fn gbt_train(x: &SparseMatrix, y: &[Label], config: &GbtConfig) -> Result<GbtModel, BaselineError> {
    gbt_train_logged(x, y, config).map(|(m, _)| m)
}

/// Boosting on logistic loss with Newton leaf values `−G/H`. Also returns the
/// training loss before the first round and after each round. Boosting
/// stops early once the root of a new tree admits no split.
pub fn gbt_train_logged(x: &SparseMatrix, y: &[Label], config: &GbtConfig) -> Result<(GbtModel, Vec<f64>), BaselineError> {
    check_inputs(x, y, config)?;
    let positives = y.iter().filter(|l| l.is_positive()).count() as f64;
    let p = positives / y.len() as f64;
    let base_score = (p / (1.0 - p)).ln();
    let mut model = GbtModel { trees: Vec::new(), shrinkage: config.shrinkage, base_score };

    let index = ColumnIndex::new(x);
    let mut margins = vec![base_score; y.len()];
    let mut losses = vec![logistic_loss(&margins, y)];
    let mut grad = vec![0.0; y.len()];
    let mut hess = vec![0.0; y.len()];
    for round in 0..config.rounds {
        for (i, (&m, l)) in margins.iter().zip(y).enumerate() {
            let p = sigmoid(m);
            grad[i] = p - l.target();
            hess[i] = p * (1.0 - p);
        }
        let Some(tree) = grow_tree(x, &index, &grad, &hess, config) else {
            log::debug!("boosting stopped after {round} rounds: no split improves the loss");
            break;
        };
        for (m, row) in margins.iter_mut().zip(&x.rows) {
            *m += config.shrinkage * tree.leaf_value(row);
        }
        model.trees.push(tree);
        losses.push(logistic_loss(&margins, y));
    }
    Ok((model, losses))
}
