//! Quantile binning of real-valued features.

use alloc::vec::Vec;

use crate::encode::FeatureMatrix;

/// Per-feature sorted bin edges. A value's bin is the number of edges
/// strictly below it, so bin `b` covers `(edges[b-1], edges[b]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinMapper {
    edges: Vec<Vec<f64>>,
}

impl BinMapper {
    /// Fits edges over the distinct values of each feature. With at most
    /// `max_bins` distinct values every value gets its own bin (edges at
    /// midpoints); otherwise edges sit at the `k / max_bins` quantiles of the
    /// distinct values, linearly interpolated.
    pub fn fit(matrix: &FeatureMatrix, max_bins: usize) -> Self {
        let max_bins = max_bins.clamp(2, 255);
        let edges = (0..matrix.feature_count())
            .map(|f| {
                let mut values = matrix.column(f);
                values.sort_by(f64::total_cmp);
                values.dedup();
                feature_edges(&values, max_bins)
            })
            .collect();
        Self { edges }
    }

    /// Reassembles a mapper; every edge list must be strictly increasing and
    /// hold fewer than 255 edges.
    pub fn from_edges(edges: Vec<Vec<f64>>) -> Option<Self> {
        let ok =
            edges.iter().all(|e| e.len() < 255 && e.windows(2).all(|w| w[0] < w[1]) && e.iter().all(|x| !x.is_nan()));
        ok.then_some(Self { edges })
    }

    pub fn edges(&self) -> &[Vec<f64>] {
        &self.edges
    }

    pub fn feature_count(&self) -> usize {
        self.edges.len()
    }

    pub fn bin_count(&self, feature: usize) -> usize {
        self.edges[feature].len() + 1
    }

    #[inline]
    pub fn bin(&self, feature: usize, value: f64) -> u8 {
        self.edges[feature].partition_point(|&e| e < value) as u8
    }

    pub fn bin_matrix(&self, matrix: &FeatureMatrix) -> BinnedMatrix {
        let rows = matrix.row_count();
        let columns =
            (0..self.edges.len()).map(|f| (0..rows).map(|r| self.bin(f, matrix.get(r, f))).collect()).collect();
        BinnedMatrix { columns, rows, bin_counts: (0..self.edges.len()).map(|f| self.bin_count(f)).collect() }
    }
}

fn feature_edges(distinct: &[f64], max_bins: usize) -> Vec<f64> {
    if distinct.len() <= 1 {
        return Vec::new();
    }
    if distinct.len() <= max_bins {
        return distinct.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0).collect();
    }
    let last = (distinct.len() - 1) as f64;
    let mut edges: Vec<f64> = (1..max_bins)
        .map(|k| {
            let pos = k as f64 / max_bins as f64 * last;
            let lo = crate::math::floor(pos) as usize;
            let hi = (lo + 1).min(distinct.len() - 1);
            distinct[lo] + (pos - lo as f64) * (distinct[hi] - distinct[lo])
        })
        .collect();
    edges.dedup();
    edges
}

/// Column-major bin ids.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedMatrix {
    columns: Vec<Vec<u8>>,
    rows: usize,
    bin_counts: Vec<usize>,
}

impl BinnedMatrix {
    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn feature_count(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, feature: usize) -> &[u8] {
        &self.columns[feature]
    }

    pub fn bin_count(&self, feature: usize) -> usize {
        self.bin_counts[feature]
    }

    #[inline]
    pub fn get(&self, row: usize, feature: usize) -> u8 {
        self.columns[feature][row]
    }
}
