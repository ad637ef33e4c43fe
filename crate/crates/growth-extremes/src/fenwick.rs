//! Fenwick (binary indexed) tree over nonnegative weights with prefix-sum
//! sampling.
//!
//! Supports O(log n) weight updates and O(log n) inverse-prefix lookup, which
//! is what the event-driven engines need: select a category with probability
//! proportional to its weight, then bump that weight. Incremental float
//! updates drift; `rebuild` recomputes the tree from the stored raw weights
//! and the engines call it periodically.

/// Weighted sampler backed by a 1-based Fenwick tree.
#[derive(Debug, Clone, Default)]
pub struct WeightedIndex {
    tree: Vec<f64>,
    raw: Vec<f64>,
}

impl WeightedIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_weights(weights: &[f64]) -> Self {
        let mut s = Self::new();
        for &w in weights {
            s.push(w);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.raw[i]
    }

    /// Append a new category with the given weight.
    pub fn push(&mut self, w: f64) {
        debug_assert!(w >= 0.0 && w.is_finite());
        self.raw.push(w);
        let n = self.raw.len(); // 1-based position of the new node
        let mut t = w;
        let mut j = 1;
        while j < lowbit(n) {
            t += self.tree[n - j - 1];
            j <<= 1;
        }
        self.tree.push(t);
    }

    /// Add `dw` (may be negative) to category `i`.
    pub fn add(&mut self, i: usize, dw: f64) {
        debug_assert!(i < self.raw.len());
        self.raw[i] += dw;
        debug_assert!(self.raw[i] >= -1e-12);
        let mut pos = i + 1;
        while pos <= self.tree.len() {
            self.tree[pos - 1] += dw;
            pos += lowbit(pos);
        }
    }

    /// Total weight (O(log n)).
    pub fn total(&self) -> f64 {
        let mut pos = self.tree.len();
        let mut s = 0.0;
        while pos > 0 {
            s += self.tree[pos - 1];
            pos -= lowbit(pos);
        }
        s
    }

    /// Index with cumulative weight bracketing `target` in [0, total).
    pub fn sample_mass(&self, target: f64) -> usize {
        let n = self.tree.len();
        debug_assert!(n > 0);
        let mut pos = 0usize; // 1-based prefix position
        let mut rem = target;
        let mut bit = n.next_power_of_two();
        if bit > n {
            bit >>= 1;
        }
        while bit > 0 {
            let next = pos + bit;
            // `<=` so a target sitting exactly on a cumulative boundary
            // resolves to the next category with positive weight.
            if next <= n && self.tree[next - 1] <= rem {
                pos = next;
                rem -= self.tree[next - 1];
            }
            bit >>= 1;
        }
        // Float slop can push past the end; clamp to the last category.
        pos.min(n - 1)
    }

    /// Sample an index with probability proportional to weight, given a
    /// uniform `u` in [0,1).
    pub fn sample(&self, u: f64) -> usize {
        self.sample_mass(u * self.total())
    }

    /// Recompute the tree exactly from the raw weights.
    pub fn rebuild(&mut self) {
        let n = self.raw.len();
        self.tree.clear();
        self.tree.resize(n, 0.0);
        for i in 0..n {
            self.tree[i] += self.raw[i];
            let parent = i + 1 + lowbit(i + 1);
            if parent <= n {
                let add = self.tree[i];
                self.tree[parent - 1] += add;
            }
        }
    }
}

#[inline]
fn lowbit(x: usize) -> usize {
    x & x.wrapping_neg()
}
