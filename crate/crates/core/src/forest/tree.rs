use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::split::{sweep, GAIN_EPS};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// SSE reduction, i.e. impurity decrease times node size.
        gain: f64,
        n_samples: usize,
    },
    Leaf {
        value: f64,
        n_samples: usize,
    },
}

/// Regression tree stored as a node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value, .. } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub(crate) fn predict_row(&self, x: &DMatrix<f64>, row: usize) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value, .. } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if x[(row, feature)] <= threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }
}

pub(crate) struct TreeSettings {
    pub mtry: usize,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
}

/// Grows one tree on `target` (already offset) using presorted feature orders.
/// Also returns how many times each row was drawn into the bootstrap sample.
///
/// Every node owns the same contiguous range in each per-feature order array;
/// after a split each array is stably partitioned, so children stay sorted
/// without re-sorting.
pub(crate) fn grow(
    x: &DMatrix<f64>,
    target: &[f64],
    global_order: &[Vec<u32>],
    settings: &TreeSettings,
    rng: &mut Rng,
) -> (Tree, Vec<u32>) {
    let n = target.len();
    let p = x.ncols();

    let mut counts = vec![0u32; n];
    if settings.bootstrap {
        for _ in 0..n {
            counts[rng.random_range(0..n)] += 1;
        }
    } else {
        counts.fill(1);
    }
    let mut slot_start = vec![0u32; n];
    let mut slot_row = Vec::with_capacity(n);
    for (r, &c) in counts.iter().enumerate() {
        slot_start[r] = slot_row.len() as u32;
        slot_row.extend(std::iter::repeat_n(r as u32, c as usize));
    }
    let m_total = slot_row.len();
    let z: Vec<f64> = slot_row.iter().map(|&r| target[r as usize]).collect();
    // feature-major copy of x indexed by slot
    let mut slot_x = Vec::with_capacity(m_total * p);
    for f in 0..p {
        let col = x.column(f);
        slot_x.extend(slot_row.iter().map(|&r| col[r as usize]));
    }
    let mut values = Vec::with_capacity(m_total);
    let mut targets = Vec::with_capacity(m_total);

    let mut orders: Vec<Vec<u32>> = global_order
        .iter()
        .map(|go| {
            let mut o = Vec::with_capacity(m_total);
            for &r in go {
                let start = slot_start[r as usize];
                o.extend(start..start + counts[r as usize]);
            }
            o
        })
        .collect();

    let mut goes_left = vec![false; m_total];
    let mut scratch: Vec<u32> = vec![0; m_total];
    let mut nodes: Vec<Node> = Vec::new();
    // (node id, lo, hi, depth)
    let mut stack = vec![(0usize, 0usize, m_total, 0usize)];
    nodes.push(Node::Leaf {
        value: 0.0,
        n_samples: m_total,
    });

    while let Some((id, lo, hi, depth)) = stack.pop() {
        let m = hi - lo;
        let in_node = &orders[0][lo..hi];
        let total: f64 = in_node.iter().map(|&s| z[s as usize]).sum();
        let leaf = Node::Leaf {
            value: total / m as f64,
            n_samples: m,
        };
        let msl = settings.min_samples_leaf;
        if m < 2 * msl || settings.max_depth.is_some_and(|d| depth >= d) {
            nodes[id] = leaf;
            continue;
        }
        let first = z[in_node[0] as usize];
        if in_node.iter().all(|&s| z[s as usize] == first) {
            nodes[id] = leaf;
            continue;
        }
        let mean = total / m as f64;
        let node_sse: f64 = in_node
            .iter()
            .map(|&s| (z[s as usize] - mean).powi(2))
            .sum();
        if node_sse <= 0.0 {
            nodes[id] = leaf;
            continue;
        }

        let mut features = sample(rng, p, settings.mtry).into_vec();
        features.sort_unstable();
        let mut best: Option<(usize, f64, f64, usize)> = None;
        for &f in &features {
            let xs = &slot_x[f * m_total..(f + 1) * m_total];
            let slots = &orders[f][lo..hi];
            values.clear();
            values.extend(slots.iter().map(|&s| xs[s as usize]));
            targets.clear();
            targets.extend(slots.iter().map(|&s| z[s as usize]));
            let found = sweep(&values, &targets, total, msl);
            if let Some((thr, gain, n_left)) = found {
                if gain > 0.0 && gain > GAIN_EPS * node_sse && best.is_none_or(|b| gain > b.2) {
                    best = Some((f, thr, gain, n_left));
                }
            }
        }
        let Some((feature, threshold, gain, n_left)) = best else {
            nodes[id] = leaf;
            continue;
        };

        let xs = &slot_x[feature * m_total..(feature + 1) * m_total];
        for &s in &orders[feature][lo..hi] {
            goes_left[s as usize] = xs[s as usize] <= threshold;
        }
        for order in orders.iter_mut() {
            // branch-free stable partition: every element is written to both
            // outputs and only the matching cursor advances
            let range = &mut order[lo..hi];
            let (mut w, mut r) = (0, 0);
            for i in 0..range.len() {
                let s = range[i];
                let left = usize::from(goes_left[s as usize]);
                range[w] = s;
                scratch[r] = s;
                w += left;
                r += 1 - left;
            }
            debug_assert_eq!(w, n_left);
            range[w..].copy_from_slice(&scratch[..r]);
        }

        let left = nodes.len();
        let right = left + 1;
        nodes.push(Node::Leaf {
            value: 0.0,
            n_samples: n_left,
        });
        nodes.push(Node::Leaf {
            value: 0.0,
            n_samples: m - n_left,
        });
        nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
            gain,
            n_samples: m,
        };
        stack.push((right, lo + n_left, hi, depth + 1));
        stack.push((left, lo, lo + n_left, depth + 1));
    }
    (Tree { nodes }, counts)
}
