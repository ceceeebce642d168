//! Ward agglomeration over a condensed dissimilarity store.
//!
//! Each active slot caches its nearest neighbour among the higher active
//! slots; a lazy heap over the cached minima yields the globally closest
//! pair. After a merge only slots whose cached neighbour was one of the two
//! merged slots need a rescan, so the common case is O(n) work per merge.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::{Dendrogram, Merge};
use crate::error::{Error, Result};
use crate::vectorspace::CorpusMatrix;

const NONE: usize = usize::MAX;

/// Upper-triangular pairwise store, row-major over `i < j`.
pub(crate) struct Condensed {
    n: usize,
    data: Vec<f64>,
}

impl Condensed {
    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.index(i, j)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.index(i, j);
        self.data[idx] = v;
    }

    /// Squared Euclidean distances between all row pairs, computed in parallel.
    pub(crate) fn squared_euclidean(matrix: &CorpusMatrix) -> Self {
        let n = matrix.len();
        let mut data = vec![0.0; n * n.saturating_sub(1) / 2];
        let mut slices = Vec::with_capacity(n);
        let mut rest: &mut [f64] = &mut data;
        for i in 0..n {
            let (head, tail) = rest.split_at_mut(n - i - 1);
            slices.push(head);
            rest = tail;
        }
        let rows = &matrix.rows;
        slices.into_par_iter().enumerate().for_each(|(i, out)| {
            for (k, v) in out.iter_mut().enumerate() {
                *v = rows[i].sq_distance(&rows[i + 1 + k]);
            }
        });
        Condensed { n, data }
    }
}

/// Total order on candidate pairs: dissimilarity, then the (smaller, larger)
/// node id pair.
#[derive(Clone, Copy, Debug)]
struct Key {
    d: f64,
    lo: usize,
    hi: usize,
}

impl Key {
    fn new(d: f64, a: usize, b: usize) -> Self {
        Key {
            d,
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    fn cmp(&self, other: &Key) -> Ordering {
        self.d
            .total_cmp(&other.d)
            .then(self.lo.cmp(&other.lo))
            .then(self.hi.cmp(&other.hi))
    }
}

struct HeapEntry {
    key: Key,
    slot: usize,
    version: u64,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.cmp(&self.key).then(other.slot.cmp(&self.slot))
    }
}

struct State {
    dist: Condensed,
    node: Vec<usize>,
    size: Vec<usize>,
    next: Vec<usize>,
    prev: Vec<usize>,
    head: usize,
    nn: Vec<usize>,
    nn_key: Vec<Key>,
    version: Vec<u64>,
    heap: BinaryHeap<HeapEntry>,
}

impl State {
    fn new(dist: Condensed) -> Self {
        let n = dist.n;
        let mut s = State {
            dist,
            node: (0..n).collect(),
            size: vec![1; n],
            next: (1..=n).map(|i| if i < n { i } else { NONE }).collect(),
            prev: (0..n).map(|i| if i == 0 { NONE } else { i - 1 }).collect(),
            head: 0,
            nn: vec![NONE; n],
            nn_key: vec![Key::new(f64::INFINITY, NONE, NONE); n],
            version: vec![0; n],
            heap: BinaryHeap::with_capacity(n),
        };
        for i in 0..n {
            s.rescan(i);
        }
        s
    }

    fn publish(&mut self, i: usize) {
        self.version[i] += 1;
        if self.nn[i] != NONE {
            self.heap.push(HeapEntry {
                key: self.nn_key[i],
                slot: i,
                version: self.version[i],
            });
        }
    }

    /// Recomputes the nearest higher active slot of `i`.
    fn rescan(&mut self, i: usize) {
        let mut best = NONE;
        let mut best_key = Key::new(f64::INFINITY, NONE, NONE);
        let mut j = self.next[i];
        while j != NONE {
            let key = Key::new(self.dist.get(i, j), self.node[i], self.node[j]);
            if best == NONE || key.cmp(&best_key) == Ordering::Less {
                best = j;
                best_key = key;
            }
            j = self.next[j];
        }
        self.nn[i] = best;
        self.nn_key[i] = best_key;
        self.publish(i);
    }

    fn pop_closest(&mut self) -> (usize, usize, f64) {
        loop {
            let e = self.heap.pop().expect("an active pair remains");
            if e.version == self.version[e.slot] && self.nn[e.slot] != NONE {
                return (e.slot, self.nn[e.slot], e.key.d);
            }
        }
    }

    fn deactivate(&mut self, a: usize) {
        let (p, nx) = (self.prev[a], self.next[a]);
        if p != NONE {
            self.next[p] = nx;
        } else {
            self.head = nx;
        }
        if nx != NONE {
            self.prev[nx] = p;
        }
        self.nn[a] = NONE;
        self.version[a] += 1;
    }
}

/// Lance–Williams update for Ward on squared Euclidean dissimilarities.
#[inline]
pub fn ward_update(d_ik: f64, d_jk: f64, d_ij: f64, n_i: usize, n_j: usize, n_k: usize) -> f64 {
    let (ni, nj, nk) = (n_i as f64, n_j as f64, n_k as f64);
    ((ni + nk) * d_ik + (nj + nk) * d_jk - nk * d_ij) / (ni + nj + nk)
}

pub(crate) fn linkage(dist: Condensed) -> Dendrogram {
    let n = dist.n;
    let mut st = State::new(dist);
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    for step in 0..n.saturating_sub(1) {
        let (a, b, d_ab) = st.pop_closest();
        debug_assert!(a < b);
        let (na, nb) = (st.size[a], st.size[b]);
        let (left, right) = (st.node[a].min(st.node[b]), st.node[a].max(st.node[b]));
        merges.push(Merge {
            left,
            right,
            height: d_ab.max(0.0).sqrt(),
            size: na + nb,
        });

        let mut k = st.head;
        while k != NONE {
            if k != a && k != b {
                let updated = ward_update(st.dist.get(a, k), st.dist.get(b, k), d_ab, na, nb, st.size[k]);
                // Ward is reducible: the exact value is never below d_ab.
                st.dist.set(b, k, updated.max(d_ab));
            }
            k = st.next[k];
        }

        st.deactivate(a);
        st.node[b] = n + step;
        st.size[b] = na + nb;

        let mut k = st.head;
        while k != NONE && k < b {
            if st.nn[k] == a || st.nn[k] == b {
                st.rescan(k);
            } else if st.nn[k] != NONE {
                let key = Key::new(st.dist.get(k, b), st.node[k], st.node[b]);
                if key.cmp(&st.nn_key[k]) == Ordering::Less {
                    st.nn[k] = b;
                    st.nn_key[k] = key;
                    st.publish(k);
                }
            } else {
                st.rescan(k);
            }
            k = st.next[k];
        }
        st.rescan(b);
    }

    Dendrogram { n_leaves: n, merges }
}

/// Ward's minimum-variance agglomeration of the matrix rows.
///
/// Initial dissimilarities are squared Euclidean distances; reported merge
/// heights are their square roots. Ties go to the smallest `(left, right)`
/// node id pair. Memory is one `f64` per row pair.
pub fn ward_cluster(matrix: &CorpusMatrix) -> Result<Dendrogram> {
    if matrix.len() < 2 {
        return Err(Error::TooFewRows(matrix.len()));
    }
    Ok(linkage(Condensed::squared_euclidean(matrix)))
}
