//! Fenwick tree over prefix maxima: point raise, prefix query, O(log n) each.

pub(crate) struct MaxFenwick {
    tree: Vec<u64>,
}

impl MaxFenwick {
    pub fn new(n: usize) -> Self {
        MaxFenwick {
            tree: vec![0; n + 1],
        }
    }

    /// Raise position `i` (0-based) to at least `v`.
    pub fn raise(&mut self, i: usize, v: u64) {
        let mut i = i + 1;
        while i < self.tree.len() {
            if self.tree[i] < v {
                self.tree[i] = v;
            }
            i += i & i.wrapping_neg();
        }
    }

    /// Maximum over positions `[0, i)`; 0 when the range is empty.
    pub fn prefix_max(&self, i: usize) -> u64 {
        let mut i = i.min(self.tree.len() - 1);
        let mut acc = 0;
        while i > 0 {
            acc = acc.max(self.tree[i]);
            i -= i & i.wrapping_neg();
        }
        acc
    }
}
