//! Sliding-window order statistics over a fixed series.
//!
//! Every element is ranked once by `(value, index)` under `f64::total_cmp`.
//! The window is then a set of ranks held in a Fenwick tree, which gives
//! `O(log n)` insertion, eviction and k-th smallest selection.

/// Order-statistics multiset restricted to elements of one series.
#[derive(Debug, Clone)]
pub struct RankedWindow<'a> {
    series: &'a [f64],
    /// `rank_of[i]` is the 0-based rank of `series[i]`.
    rank_of: Vec<usize>,
    /// `index_at[r]` is the series index holding rank `r`.
    index_at: Vec<usize>,
    tree: Vec<u32>,
    len: usize,
    top_bit: usize,
}

impl<'a> RankedWindow<'a> {
    pub fn new(series: &'a [f64]) -> Self {
        let n = series.len();
        let mut index_at: Vec<usize> = (0..n).collect();
        index_at.sort_by(|&a, &b| series[a].total_cmp(&series[b]).then(a.cmp(&b)));
        let mut rank_of = vec![0; n];
        for (r, &i) in index_at.iter().enumerate() {
            rank_of[i] = r;
        }
        let top_bit = if n == 0 { 0 } else { 1 << (usize::BITS - 1 - n.leading_zeros()) };
        Self { series, rank_of, index_at, tree: vec![0; n + 1], len: 0, top_bit }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn update(&mut self, rank: usize, delta: i32) {
        let mut i = rank + 1;
        while i < self.tree.len() {
            self.tree[i] = (self.tree[i] as i32 + delta) as u32;
            i += i & i.wrapping_neg();
        }
    }

    /// Adds `series[index]`. Each index may be present at most once.
    pub fn insert(&mut self, index: usize) {
        self.update(self.rank_of[index], 1);
        self.len += 1;
    }

    /// Removes `series[index]`, which must be present.
    pub fn remove(&mut self, index: usize) {
        debug_assert!(self.len > 0);
        self.update(self.rank_of[index], -1);
        self.len -= 1;
    }

    /// The `k`-th smallest value present (0-based).
    pub fn select(&self, k: usize) -> f64 {
        assert!(k < self.len, "select({k}) on a window of {}", self.len);
        let mut pos = 0;
        let mut remaining = k as u32;
        let mut step = self.top_bit;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= remaining {
                pos = next;
                remaining -= self.tree[next];
            }
            step >>= 1;
        }
        self.series[self.index_at[pos]]
    }
}
