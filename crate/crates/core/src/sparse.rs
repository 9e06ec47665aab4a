//! Sparse non-negative feature vectors and the minmax (Ruzicka) similarity.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// Sorted `(index, weight)` pairs. Indices are strictly increasing and no
/// stored weight is zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from unordered pairs. Duplicate indices are summed,
    /// zeros dropped. Panics on negative or non-finite weights.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_unstable_by_key(|&(i, _)| i);
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        for (i, w) in pairs {
            assert!(w.is_finite() && w >= 0.0, "weight {w} at {i} must be finite and non-negative");
            if indices.last() == Some(&i) {
                *values.last_mut().unwrap() += w;
            } else {
                indices.push(i);
                values.push(w);
            }
        }
        let mut v = SparseVector { indices, values };
        v.drop_zeros();
        v
    }

    /// Dense-to-sparse conversion, mostly for tests.
    pub fn from_dense(dense: &[f64]) -> Self {
        Self::from_pairs(dense.iter().enumerate().map(|(i, &w)| (i as u32, w)).collect())
    }

    fn drop_zeros(&mut self) {
        if self.values.iter().any(|&w| w == 0.0) {
            let (indices, values) = self
                .indices
                .iter()
                .zip(&self.values)
                .filter(|(_, &w)| w != 0.0)
                .map(|(&i, &w)| (i, w))
                .unzip();
            self.indices = indices;
            self.values = values;
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, index: u32) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Scales to unit L2 norm. The zero vector is left as is.
    pub fn normalize(&mut self) {
        let norm = self.l2_norm();
        if norm > 0.0 {
            for w in &mut self.values {
                *w /= norm;
            }
        }
    }
}

/// Walks the union of both supports in index order, calling `f(index, x_i, y_i)`.
fn merge(x: &SparseVector, y: &SparseVector, mut f: impl FnMut(u32, f64, f64)) {
    let (mut i, mut j) = (0, 0);
    while i < x.indices.len() && j < y.indices.len() {
        match x.indices[i].cmp(&y.indices[j]) {
            Ordering::Less => {
                f(x.indices[i], x.values[i], 0.0);
                i += 1;
            }
            Ordering::Greater => {
                f(y.indices[j], 0.0, y.values[j]);
                j += 1;
            }
            Ordering::Equal => {
                f(x.indices[i], x.values[i], y.values[j]);
                i += 1;
                j += 1;
            }
        }
    }
    for k in i..x.indices.len() {
        f(x.indices[k], x.values[k], 0.0);
    }
    for k in j..y.indices.len() {
        f(y.indices[k], 0.0, y.values[k]);
    }
}

/// `Σ min(x_i, y_i) / Σ max(x_i, y_i)`, with 0 for two empty vectors.
pub fn minmax(x: &SparseVector, y: &SparseVector) -> f64 {
    minmax_where(x, y, |_| true)
}

/// Minmax restricted to the indices accepted by `keep`, in both numerator
/// and denominator.
pub fn minmax_where(x: &SparseVector, y: &SparseVector, keep: impl Fn(u32) -> bool) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    merge(x, y, |i, a, b| {
        if keep(i) {
            num += a.min(b);
            den += a.max(b);
        }
    });
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_example() {
        let x = SparseVector::from_dense(&[1.0, 2.0, 0.0]);
        let y = SparseVector::from_dense(&[2.0, 1.0, 1.0]);
        assert!((minmax(&x, &y) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn degenerate_cases() {
        let e = SparseVector::new();
        assert_eq!(minmax(&e, &e), 0.0);
        let x = SparseVector::from_dense(&[0.0, 3.0]);
        assert_eq!(x.len(), 1);
        assert_eq!(minmax(&x, &e), 0.0);
        let y = SparseVector::from_dense(&[5.0, 0.0]);
        assert_eq!(minmax(&x, &y), 0.0);
        assert_eq!(minmax(&x, &x), 1.0);
    }

    #[test]
    fn from_pairs_sums_duplicates() {
        let v = SparseVector::from_pairs(vec![(3, 1.0), (1, 2.0), (3, 0.5), (2, 0.0)]);
        assert_eq!(v.indices(), &[1, 3]);
        assert_eq!(v.values(), &[2.0, 1.5]);
    }

    fn vec_strategy() -> impl Strategy<Value = SparseVector> {
        proptest::collection::vec((0u32..64, 0.0f64..10.0), 0..24).prop_map(SparseVector::from_pairs)
    }

    proptest! {
        #[test]
        fn shared_support_growth_is_monotone(
            x in vec_strategy(),
            y in vec_strategy(),
            extra in 1.0f64..5.0,
        ) {
            // adding the same mass to a new coordinate of both never lowers the similarity
            let base = minmax(&x, &y);
            let mut xp: Vec<_> = x.iter().collect();
            let mut yp: Vec<_> = y.iter().collect();
            xp.push((1000, extra));
            yp.push((1000, extra));
            let grown = minmax(&SparseVector::from_pairs(xp), &SparseVector::from_pairs(yp));
            prop_assert!(grown + 1e-12 >= base);
        }

        #[test]
        fn restriction_to_everything_is_identity(x in vec_strategy(), y in vec_strategy()) {
            prop_assert_eq!(minmax_where(&x, &y, |_| true), minmax(&x, &y));
        }
    }
}
