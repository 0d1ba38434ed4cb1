//! Order statistics of common-neighbor counts over all `k`-subsets.
//!
//! [`top_m_common_neighbors`] runs a depth-first search over vertices in
//! descending-degree order, carrying the running intersection of adjacency
//! rows. Because `|N(U)| <= |N(S)|` for `S ⊆ U`, a partial set whose
//! intersection is already below the current `m`-th best value can be cut.
//! [`brute_force_top_m`] enumerates every subset and is the oracle for it.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{and_into, Graph, VertexSet};

/// Largest `C(n, k)` that [`brute_force_top_m`] agrees to enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

/// The `m` largest common-neighbor counts over all `k`-subsets.
///
/// Values are taken over the multiset of `C(n, k)` counts, one per subset, so
/// tied subsets each occupy a slot. Among tied subsets the lexicographically
/// smallest vertex sets are reported first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopM {
    pub k: usize,
    pub m: usize,
    pub values: Vec<usize>,
    pub witnesses: Vec<VertexSet>,
    /// Set when `m > C(n, k)`; `values` then holds all `C(n, k)` counts.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceCount {
    pub k: usize,
    pub threshold: f64,
    /// Number of `k`-sets with strictly more than `threshold` common neighbors.
    pub count: u64,
}

/// `C(n, k)`, or `None` on `u128` overflow.
pub fn binomial_coefficient(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiply.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

fn check_subset_size(g: &Graph, k: usize) -> Result<()> {
    if k == 0 || k >= g.n() {
        Err(Error::InvalidSubsetSize { k, n: g.n() })
    } else {
        Ok(())
    }
}

/// Running list of the best `(value, set)` pairs, best first.
struct Leaderboard {
    capacity: usize,
    entries: Vec<(usize, Vec<usize>)>,
}

fn rank(a_val: usize, a_set: &[usize], b_val: usize, b_set: &[usize]) -> Ordering {
    b_val.cmp(&a_val).then_with(|| a_set.cmp(b_set))
}

impl Leaderboard {
    fn new(capacity: usize) -> Self {
        Leaderboard {
            capacity,
            entries: Vec::with_capacity(capacity + 1),
        }
    }

    /// Value of the last retained entry once the board is full.
    #[inline]
    fn floor(&self) -> Option<usize> {
        if self.entries.len() == self.capacity {
            self.entries.last().map(|e| e.0)
        } else {
            None
        }
    }

    #[inline]
    fn admits(&self, value: usize, set: &[usize]) -> bool {
        match self.entries.last() {
            Some((v, s)) if self.entries.len() == self.capacity => {
                rank(value, set, *v, s) == Ordering::Less
            }
            _ => true,
        }
    }

    fn offer(&mut self, value: usize, set: Vec<usize>) {
        if !self.admits(value, &set) {
            return;
        }
        let pos = self
            .entries
            .partition_point(|(v, s)| rank(*v, s, value, &set) == Ordering::Less);
        self.entries.insert(pos, (value, set));
        self.entries.truncate(self.capacity);
    }

    fn into_top_m(self, k: usize, m: usize, truncated: bool) -> TopM {
        let (values, witnesses) = self
            .entries
            .into_iter()
            .map(|(v, s)| (v, VertexSet::from_sorted_unchecked(s)))
            .unzip();
        TopM {
            k,
            m,
            values,
            witnesses,
            truncated,
        }
    }
}

/// Vertices sorted by degree, highest first, ties by index.
fn degree_order(g: &Graph) -> (Vec<usize>, Vec<usize>) {
    let degrees = g.degrees();
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by(|&a, &b| degrees[b].cmp(&degrees[a]).then(a.cmp(&b)));
    (order, degrees)
}

struct TopMSearch<'a> {
    g: &'a Graph,
    k: usize,
    order: Vec<usize>,
    degrees: Vec<usize>,
    /// `k` rows of scratch, row `d` holds the intersection after `d + 1` picks.
    scratch: Vec<u64>,
    chosen: Vec<usize>,
    board: Leaderboard,
}

impl TopMSearch<'_> {
    fn descend(&mut self, depth: usize, start: usize) {
        let n = self.g.n();
        let w = self.g.words();
        let last_start = n - (self.k - depth);
        for j in start..=last_start {
            let v = self.order[j];
            let floor = self.board.floor();
            // Every later candidate has degree <= deg(v), which bounds the count.
            if floor.is_some_and(|f| self.degrees[v] < f) {
                break;
            }
            let count = if depth == 0 {
                self.scratch[..w].copy_from_slice(self.g.row(v));
                self.degrees[v]
            } else {
                let (prev, cur) = self.scratch.split_at_mut(depth * w);
                and_into(&mut cur[..w], &prev[(depth - 1) * w..], self.g.row(v))
            };
            if floor.is_some_and(|f| count < f) {
                continue;
            }
            self.chosen.push(v);
            if depth + 1 == self.k {
                let mut set = self.chosen.clone();
                set.sort_unstable();
                self.board.offer(count, set);
            } else {
                self.descend(depth + 1, j + 1);
            }
            self.chosen.pop();
        }
    }
}

/// The `m` largest values of `|N(U)|` over all `k`-subsets `U`, with witnesses.
///
/// Requests with `m > C(n, k)` return every subset and set `truncated`.
pub fn top_m_common_neighbors(g: &Graph, k: usize, m: usize) -> Result<TopM> {
    check_subset_size(g, k)?;
    if m == 0 {
        return Err(Error::InvalidOrderCount);
    }
    let total = binomial_coefficient(g.n(), k);
    let truncated = total.is_some_and(|t| (m as u128) > t);
    let capacity = match total {
        Some(t) if (m as u128) > t => t as usize,
        _ => m,
    };
    let (order, degrees) = degree_order(g);
    let mut search = TopMSearch {
        g,
        k,
        order,
        degrees,
        scratch: vec![0; k * g.words()],
        chosen: Vec::with_capacity(k),
        board: Leaderboard::new(capacity),
    };
    search.descend(0, 0);
    Ok(search.board.into_top_m(k, m, truncated))
}

/// Advances `idx` to the next `k`-combination of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in (i + 1)..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Plain enumeration of every `k`-subset in lexicographic order.
pub fn brute_force_top_m(g: &Graph, k: usize, m: usize) -> Result<TopM> {
    check_subset_size(g, k)?;
    if m == 0 {
        return Err(Error::InvalidOrderCount);
    }
    let total = match binomial_coefficient(g.n(), k) {
        Some(t) if t <= BRUTE_FORCE_LIMIT => t,
        other => {
            return Err(Error::EnumerationTooLarge {
                count: other.unwrap_or(u128::MAX),
                limit: BRUTE_FORCE_LIMIT,
            })
        }
    };
    let capacity = (m as u128).min(total) as usize;
    let mut board = Leaderboard::new(capacity);
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let set = VertexSet::from_sorted_unchecked(idx.clone());
        let value = g.common_neighbor_count(&set)?;
        board.offer(value, idx.clone());
        if !next_combination(&mut idx, g.n()) {
            break;
        }
    }
    Ok(board.into_top_m(k, m, (m as u128) > total))
}

struct ExceedanceSearch<'a> {
    g: &'a Graph,
    k: usize,
    threshold: f64,
    order: Vec<usize>,
    degrees: Vec<usize>,
    scratch: Vec<u64>,
    count: u64,
}

impl ExceedanceSearch<'_> {
    fn descend(&mut self, depth: usize, start: usize) {
        let n = self.g.n();
        let w = self.g.words();
        for j in start..=(n - (self.k - depth)) {
            let v = self.order[j];
            if self.degrees[v] as f64 <= self.threshold {
                break;
            }
            let count = if depth == 0 {
                self.scratch[..w].copy_from_slice(self.g.row(v));
                self.degrees[v]
            } else {
                let (prev, cur) = self.scratch.split_at_mut(depth * w);
                and_into(&mut cur[..w], &prev[(depth - 1) * w..], self.g.row(v))
            };
            if count as f64 <= self.threshold {
                continue;
            }
            if depth + 1 == self.k {
                self.count += 1;
            } else {
                self.descend(depth + 1, j + 1);
            }
        }
    }
}

/// Number of `k`-sets with strictly more than `threshold` common neighbors.
///
/// The comparison is `count > threshold` on the real threshold, never rounded.
pub fn count_exceedances(g: &Graph, k: usize, threshold: f64) -> Result<ExceedanceCount> {
    check_subset_size(g, k)?;
    if threshold.is_nan() {
        return Err(Error::InvalidParameter("threshold is NaN".into()));
    }
    let (order, degrees) = degree_order(g);
    let mut search = ExceedanceSearch {
        g,
        k,
        threshold,
        order,
        degrees,
        scratch: vec![0; k * g.words()],
        count: 0,
    };
    search.descend(0, 0);
    Ok(ExceedanceCount {
        k,
        threshold,
        count: search.count,
    })
}

/// [`count_exceedances`] for `ℓ`-sets, typically with `gamma = Γ_ℓ`.
pub fn count_ell_exceedances(g: &Graph, ell: usize, gamma: f64) -> Result<ExceedanceCount> {
    count_exceedances(g, ell, gamma)
}
