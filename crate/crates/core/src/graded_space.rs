//! Excitation grading of the Hilbert space.
//!
//! The basis `|n, j>` is ordered by ascending excitation number `n` and then by
//! the in-block index `j`. Pair indices `(j, k)` of a `d_{n+l} x d_n` block are
//! flattened row by row into a single index `nu = d_n (j - 1) + k`. Both `j, k`
//! and `nu` are 1-based at this module's public surface; everything past it
//! works with 0-based storage offsets.

use crate::error::{Error, Result};

/// Maps a 1-based pair `(j, k)` of a block with `d_n` columns to its 1-based flat index.
pub fn flatten_pair(j: usize, k: usize, d_n: usize) -> Result<usize> {
    if j == 0 {
        return Err(Error::Index(format!("row index j={j} must be >= 1")));
    }
    if k == 0 || k > d_n {
        return Err(Error::Index(format!("column index k={k} outside 1..={d_n}")));
    }
    Ok(d_n * (j - 1) + k)
}

/// Inverse of [`flatten_pair`].
pub fn unflatten_pair(nu: usize, d_n: usize) -> Result<(usize, usize)> {
    if nu == 0 {
        return Err(Error::Index("flat index nu must be >= 1".into()));
    }
    if d_n == 0 {
        return Err(Error::Index("block width d_n must be >= 1".into()));
    }
    Ok(((nu - 1) / d_n + 1, (nu - 1) % d_n + 1))
}

/// Block dimensions `d_0, ..., d_N` of a graded Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedBasis {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    labels: Option<Vec<Vec<String>>>,
}

impl GradedBasis {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Config("graded basis needs at least one block".into()));
        }
        if let Some(n) = dims.iter().position(|&d| d == 0) {
            return Err(Error::Config(format!("block n={n} has zero dimension")));
        }
        let mut offsets = Vec::with_capacity(dims.len());
        let mut acc = 0;
        for &d in &dims {
            offsets.push(acc);
            acc += d;
        }
        Ok(Self {
            dims,
            offsets,
            labels: None,
        })
    }

    /// Attaches one human-readable label per basis state `(n, j)`.
    pub fn with_labels(mut self, labels: Vec<Vec<String>>) -> Result<Self> {
        if labels.len() != self.dims.len()
            || labels.iter().zip(&self.dims).any(|(l, &d)| l.len() != d)
        {
            return Err(Error::Shape("labels do not match block dimensions".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Largest excitation number `N`.
    pub fn max_excitation(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// `d_n`; panics when `n > N`.
    pub fn dim(&self, n: usize) -> usize {
        self.dims[n]
    }

    /// Row/column offset of block `n` in the concatenated basis.
    pub fn offset(&self, n: usize) -> usize {
        self.offsets[n]
    }

    /// Total Hilbert-space dimension.
    pub fn total_dimension(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Label of state `(n, j)` with 1-based `j`.
    pub fn label(&self, n: usize, j: usize) -> Option<&str> {
        self.labels
            .as_ref()
            .and_then(|l| l.get(n))
            .and_then(|row| row.get(j.checked_sub(1)?))
            .map(String::as_str)
    }

    /// Global 0-based index of `(n, j)` with 1-based `j`.
    pub fn global_index(&self, n: usize, j: usize) -> Result<usize> {
        if n > self.max_excitation() || j == 0 || j > self.dims[n] {
            return Err(Error::Index(format!("state (n={n}, j={j}) not in basis")));
        }
        Ok(self.offsets[n] + j - 1)
    }

    /// Excitation number of every global basis index.
    pub fn grading(&self) -> Vec<usize> {
        self.dims
            .iter()
            .enumerate()
            .flat_map(|(n, &d)| std::iter::repeat_n(n, d))
            .collect()
    }

    pub fn pair_shape(&self, l: usize, n: usize) -> Result<PairBlockShape> {
        if n + l > self.max_excitation() {
            return Err(Error::Index(format!(
                "pair block (l={l}, n={n}) exceeds N={}",
                self.max_excitation()
            )));
        }
        Ok(PairBlockShape {
            l,
            n,
            rows: self.dims[n + l],
            cols: self.dims[n],
        })
    }
}

/// Convenience form of [`GradedBasis::total_dimension`].
pub fn total_dimension(basis: &GradedBasis) -> usize {
    basis.total_dimension()
}

/// Shape of the `(n + l, n)` sector of operator space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairBlockShape {
    pub l: usize,
    pub n: usize,
    /// `d_{n+l}`
    pub rows: usize,
    /// `d_n`
    pub cols: usize,
}

impl PairBlockShape {
    /// Flattened sector size `D_{l,n} = d_{n+l} d_n`.
    pub fn size(&self) -> usize {
        self.rows * self.cols
    }

    pub fn flatten(&self, j: usize, k: usize) -> Result<usize> {
        if j > self.rows {
            return Err(Error::Index(format!("row index j={j} outside 1..={}", self.rows)));
        }
        flatten_pair(j, k, self.cols)
    }

    pub fn unflatten(&self, nu: usize) -> Result<(usize, usize)> {
        if nu > self.size() {
            return Err(Error::Index(format!("flat index nu={nu} outside 1..={}", self.size())));
        }
        unflatten_pair(nu, self.cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, vec_row_major, CMatrix};
    use proptest::prelude::*;

    #[test]
    fn flatten_examples() {
        assert_eq!(flatten_pair(1, 1, 2).unwrap(), 1);
        assert_eq!(flatten_pair(2, 1, 2).unwrap(), 3);
        assert_eq!(flatten_pair(3, 4, 4).unwrap(), 12);
    }

    #[test]
    fn flatten_rejects_out_of_range() {
        assert!(matches!(flatten_pair(0, 1, 2), Err(Error::Index(_))));
        assert!(matches!(flatten_pair(1, 0, 2), Err(Error::Index(_))));
        assert!(matches!(flatten_pair(1, 3, 2), Err(Error::Index(_))));
        assert!(matches!(unflatten_pair(0, 2), Err(Error::Index(_))));
    }

    fn brute_force_unflatten(nu: usize, d_n: usize) -> (usize, usize) {
        for j in 1..=nu {
            for k in 1..=d_n {
                if d_n * (j - 1) + k == nu {
                    return (j, k);
                }
            }
        }
        unreachable!()
    }

    #[test]
    fn unflatten_examples() {
        assert_eq!(unflatten_pair(1, 2).unwrap(), (1, 1));
        assert_eq!(brute_force_unflatten(3, 2), (2, 1));
        assert_eq!(unflatten_pair(3, 2).unwrap(), (2, 1));
        assert_eq!(brute_force_unflatten(4, 2), (2, 2));
        assert_eq!(unflatten_pair(4, 2).unwrap(), (2, 2));
    }

    #[test]
    fn total_dimension_examples() {
        assert_eq!(total_dimension(&GradedBasis::new(vec![1, 2, 2]).unwrap()), 5);
        assert_eq!(total_dimension(&GradedBasis::new(vec![1, 3, 4, 4]).unwrap()), 12);
        assert_eq!(total_dimension(&GradedBasis::new(vec![1]).unwrap()), 1);
    }

    #[test]
    fn rejects_bad_dims() {
        assert!(GradedBasis::new(vec![]).is_err());
        assert!(GradedBasis::new(vec![1, 0]).is_err());
    }

    #[test]
    fn offsets_and_grading() {
        let b = GradedBasis::new(vec![1, 3, 4]).unwrap();
        assert_eq!(b.offset(2), 4);
        assert_eq!(b.global_index(2, 1).unwrap(), 4);
        assert_eq!(b.grading(), vec![0, 1, 1, 1, 2, 2, 2, 2]);
        assert_eq!(b.pair_shape(1, 1).unwrap().size(), 12);
        assert!(b.pair_shape(2, 1).is_err());
    }

    #[test]
    fn row_major_matches_double_loop() {
        let m = CMatrix::from_fn(3, 4, |j, k| c(j as f64, 10.0 * k as f64));
        let v = vec_row_major(&m);
        for j in 1..=3 {
            for k in 1..=4 {
                let nu = flatten_pair(j, k, 4).unwrap();
                assert_eq!(v[nu - 1], m[(j - 1, k - 1)]);
            }
        }
    }

    proptest! {
        #[test]
        fn flatten_unflatten_identity(
            dims in prop::collection::vec(1usize..6, 1..6),
            l_seed in 0usize..10,
            n_seed in 0usize..10,
            nu_seed in 0usize..1000,
        ) {
            let basis = GradedBasis::new(dims).unwrap();
            let big_n = basis.max_excitation();
            let l = l_seed % (big_n + 1);
            let n = n_seed % (big_n - l + 1);
            let shape = basis.pair_shape(l, n).unwrap();
            let nu = nu_seed % shape.size() + 1;
            let (j, k) = shape.unflatten(nu).unwrap();
            prop_assert_eq!(shape.flatten(j, k).unwrap(), nu);
        }
    }
}
