//! Ranked assignment machinery.
//!
//! Two pieces live here:
//!
//! * [`k_best_assignments`] — best-first enumeration of the highest
//!   scoring partial assignments of items to exclusive columns, where
//!   every item also has private (non-exclusive) options. This is the
//!   ranked-truncation engine behind both the measurement update and
//!   the fusion-map expansion.
//! * [`hungarian`] — exact minimum-cost square assignment, used by the
//!   OSPA metric.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Options available to one item. Scores are log-domain; `-inf`
/// disables an option. Column ids are shared across items and each
/// column can be used by at most one item.
#[derive(Debug, Clone, Default)]
pub struct ItemOptions {
    pub private: Vec<f64>,
    pub columns: Vec<(usize, f64)>,
}

/// One choice per item in a complete assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    /// Index into the item's `private` list.
    Private(usize),
    /// Column id from the item's `columns` list.
    Column(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedAssignment {
    pub choices: Vec<Choice>,
    pub score: f64,
}

const MAX_COLUMNS: usize = 128;
const MAX_EXPANSIONS: usize = 400_000;

struct Node {
    parent: usize,
    choice: Choice,
    depth: usize,
    used: u128,
    score: f64,
}

struct HeapEntry {
    bound: f64,
    node: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.bound.total_cmp(&other.bound)
    }
}

/// Enumerates complete assignments in exactly descending score order.
///
/// Stops after `max_count` assignments or once a score drops below
/// `best + ln(relative_floor)` (pass 0.0 to disable the floor). Items
/// with no finite option make the problem infeasible.
pub fn k_best_assignments(
    items: &[ItemOptions],
    max_count: usize,
    relative_floor: f64,
) -> Result<Vec<RankedAssignment>> {
    if max_count == 0 {
        return Err(Error::InvalidParameter("assignment count must be >= 1"));
    }
    // Compact the column ids into bit positions.
    let mut col_ids: Vec<usize> = items
        .iter()
        .flat_map(|it| it.columns.iter().map(|(id, _)| *id))
        .collect();
    col_ids.sort_unstable();
    col_ids.dedup();
    if col_ids.len() > MAX_COLUMNS {
        return Err(Error::ProblemTooLarge("more than 128 assignment columns"));
    }
    let bit_of = |id: usize| col_ids.binary_search(&id).expect("known column");

    // Admissible bound: per item, the best score over every option,
    // ignoring column exclusivity; suffix-summed.
    let mut best_per_item = Vec::with_capacity(items.len());
    for it in items.iter() {
        let mut best = f64::NEG_INFINITY;
        for s in &it.private {
            best = best.max(*s);
        }
        for (_, s) in &it.columns {
            best = best.max(*s);
        }
        if best == f64::NEG_INFINITY {
            return Err(Error::DegenerateUpdate);
        }
        best_per_item.push(best);
    }
    let mut suffix = vec![0.0; items.len() + 1];
    for i in (0..items.len()).rev() {
        suffix[i] = suffix[i + 1] + best_per_item[i];
    }

    let mut arena: Vec<Node> = vec![Node {
        parent: usize::MAX,
        choice: Choice::Private(0),
        depth: 0,
        used: 0,
        score: 0.0,
    }];
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry { bound: suffix[0], node: 0 });

    let mut out: Vec<RankedAssignment> = Vec::new();
    let mut expansions = 0usize;
    while let Some(entry) = heap.pop() {
        let (depth, used, score) = {
            let n = &arena[entry.node];
            (n.depth, n.used, n.score)
        };
        if depth == items.len() {
            if let Some(first) = out.first() {
                if relative_floor > 0.0 && score < first.score + crate::math::ln(relative_floor) {
                    break;
                }
            }
            out.push(RankedAssignment {
                choices: reconstruct(&arena, entry.node, items.len()),
                score,
            });
            if out.len() >= max_count {
                break;
            }
            continue;
        }
        expansions += 1;
        if expansions > MAX_EXPANSIONS {
            // Best-effort cap; everything emitted so far is still in
            // exact descending order.
            break;
        }
        let item = &items[depth];
        for (k, s) in item.private.iter().enumerate() {
            if *s == f64::NEG_INFINITY {
                continue;
            }
            push_child(
                &mut arena,
                &mut heap,
                entry.node,
                Choice::Private(k),
                depth,
                used,
                score + s,
                suffix[depth + 1],
            );
        }
        for (id, s) in item.columns.iter() {
            if *s == f64::NEG_INFINITY {
                continue;
            }
            let bit = 1u128 << bit_of(*id);
            if used & bit != 0 {
                continue;
            }
            push_child(
                &mut arena,
                &mut heap,
                entry.node,
                Choice::Column(*id),
                depth,
                used | bit,
                score + s,
                suffix[depth + 1],
            );
        }
    }
    if out.is_empty() {
        return Err(Error::DegenerateUpdate);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn push_child(
    arena: &mut Vec<Node>,
    heap: &mut BinaryHeap<HeapEntry>,
    parent: usize,
    choice: Choice,
    depth: usize,
    used: u128,
    score: f64,
    remaining_bound: f64,
) {
    let idx = arena.len();
    arena.push(Node {
        parent,
        choice,
        depth: depth + 1,
        used,
        score,
    });
    heap.push(HeapEntry {
        bound: score + remaining_bound,
        node: idx,
    });
}

fn reconstruct(arena: &[Node], leaf: usize, len: usize) -> Vec<Choice> {
    let mut choices = vec![Choice::Private(0); len];
    let mut cur = leaf;
    while arena[cur].parent != usize::MAX {
        choices[arena[cur].depth - 1] = arena[cur].choice;
        cur = arena[cur].parent;
    }
    choices
}

/// Exact minimum-cost assignment on a square cost matrix (row-major),
/// returning the column matched to each row.
///
/// Costs must be finite. O(n^3) shortest-augmenting-path with
/// potentials.
pub fn hungarian(costs: &[f64], n: usize) -> Result<Vec<usize>> {
    if costs.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: costs.len(),
        });
    }
    if costs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter("assignment costs must be finite"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    // 1-based potentials formulation.
    let mut u = vec![0.0_f64; n + 1];
    let mut v = vec![0.0_f64; n + 1];
    let mut matched_row = vec![0usize; n + 1]; // column -> row
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        matched_row[0] = row;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = costs[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if matched_row[j] > 0 {
            row_to_col[matched_row[j] - 1] = j - 1;
        }
    }
    Ok(row_to_col)
}
