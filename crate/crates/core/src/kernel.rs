//! Gram-matrix construction, double centering, and kernel bandwidth
//! selection shared by the kernel-based tests.
//!
//! The centering operator is H = I − (1/n)11ᵀ; `center_gram` computes
//! H K H without materializing H (subtract row and column means, add the
//! grand mean), which is O(n²) and avoids the extra matrix products.

use ndarray::{Array2, ArrayView1, Axis, Zip};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// An n×d data matrix, one observation per row.
///
/// Construction validates the shape (n ≥ 1, d ≥ 1) and rejects non-finite
/// entries, so everything downstream can assume clean data.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    data: Array2<f64>,
}

impl Sample {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let (n, d) = data.dim();
        if n == 0 || d == 0 {
            return Err(Error::InvalidParameter(format!(
                "sample must be non-empty, got shape {n}x{d}"
            )));
        }
        if let Some(((i, j), v)) = data.indexed_iter().find(|&(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite value {v} at row {i}, column {j}"
            )));
        }
        Ok(Self { data })
    }

    /// Builds a sample from row slices; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("sample must be non-empty".into()));
        }
        let d = rows[0].len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::Shape(format!(
                "row 0 has {d} columns but row {i} has {}",
                row.len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let data = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::Shape(e.to_string()))?;
        Self::new(data)
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn d(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(i)
    }
}

/// Kernel family; only the Gaussian kernel is implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Gaussian,
}

/// Bandwidth policy for a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Use the given σ > 0 as-is.
    Fixed(f64),
    /// Set σ to the median pairwise Euclidean distance of the sample.
    MedianHeuristic,
}

/// A kernel family together with its bandwidth policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub bandwidth: Bandwidth,
}

impl KernelSpec {
    /// Gaussian kernel with a fixed bandwidth.
    pub fn fixed(sigma: f64) -> Self {
        Self {
            family: KernelFamily::Gaussian,
            bandwidth: Bandwidth::Fixed(sigma),
        }
    }

    /// Gaussian kernel with the median-heuristic bandwidth.
    pub fn median_heuristic() -> Self {
        Self {
            family: KernelFamily::Gaussian,
            bandwidth: Bandwidth::MedianHeuristic,
        }
    }

    /// Resolves the policy to a concrete σ for the given sample.
    pub fn resolve_bandwidth(&self, sample: &Sample) -> Result<f64> {
        match self.bandwidth {
            Bandwidth::Fixed(sigma) if sigma > 0.0 => Ok(sigma),
            Bandwidth::Fixed(sigma) => Err(Error::InvalidParameter(format!(
                "kernel bandwidth must be positive, got {sigma}"
            ))),
            Bandwidth::MedianHeuristic => median_heuristic(sample),
        }
    }
}

fn squared_distance(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> f64 {
    x.iter()
        .zip(y.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Gaussian kernel k(x, y) = exp(−‖x−y‖² / (2σ²)).
pub fn gaussian_kernel(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kernel bandwidth must be positive, got {sigma}"
        )));
    }
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "kernel arguments have dimensions {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok((-squared_distance(x, y) / (2.0 * sigma * sigma)).exp())
}

/// Median of the n(n−1)/2 pairwise Euclidean distances.
///
/// For an even distance count the two central order statistics are
/// averaged. A zero median is a hard error: silently falling back to some
/// default bandwidth would mask degenerate inputs.
pub fn median_heuristic(sample: &Sample) -> Result<f64> {
    let n = sample.n();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "median heuristic needs at least 2 observations, got {n}"
        )));
    }
    let data = sample.data();
    let mut dists: Vec<f64> = (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let xi = data.row(i);
            ((i + 1)..n)
                .map(|j| squared_distance(xi, data.row(j)).sqrt())
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect();

    let m = dists.len();
    let (below, mid, _) = dists.select_nth_unstable_by(m / 2, |a, b| a.total_cmp(b));
    let median = if m % 2 == 1 {
        *mid
    } else {
        let lower = below.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + *mid)
    };
    if median > 0.0 {
        Ok(median)
    } else {
        Err(Error::DegenerateSample(
            "median pairwise distance is zero".into(),
        ))
    }
}

/// Gram matrix K with K[i, j] = k(x_i, x_j).
///
/// Rows are filled in parallel; every entry is computed independently from
/// the inputs, so the result is deterministic and exactly symmetric.
pub fn gram_matrix(sample: &Sample, spec: &KernelSpec) -> Result<Array2<f64>> {
    let sigma = spec.resolve_bandwidth(sample)?;
    let n = sample.n();
    let data = sample.data();
    let scale = 1.0 / (2.0 * sigma * sigma);
    let mut k = Array2::zeros((n, n));
    Zip::indexed(k.rows_mut()).par_for_each(|i, mut row| {
        let xi = data.row(i);
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = (-squared_distance(xi, data.row(j)) * scale).exp();
        }
    });
    Ok(k)
}

/// Double-centers a square matrix: returns H K H.
///
/// Row and column sums of the result vanish; re-centering is a no-op up
/// to rounding.
pub fn center_gram(k: &Array2<f64>) -> Result<Array2<f64>> {
    let (n, m) = k.dim();
    if n != m || n == 0 {
        return Err(Error::Shape(format!(
            "centering needs a non-empty square matrix, got {n}x{m}"
        )));
    }
    let row_means = k.mean_axis(Axis(1)).expect("n >= 1");
    let col_means = k.mean_axis(Axis(0)).expect("n >= 1");
    let grand = row_means.sum() / n as f64;
    let mut out = k.clone();
    Zip::indexed(&mut out).for_each(|(i, j), v| {
        *v = (*v - (row_means[i] + col_means[j])) + grand;
    });
    Ok(out)
}

/// A pair of equally sized square Gram matrices, optionally double-centered.
#[derive(Debug, Clone)]
pub struct GramPair {
    pub k: Array2<f64>,
    pub l: Array2<f64>,
    pub centered: bool,
}

impl GramPair {
    /// Wraps two uncentered Gram matrices of equal square shape.
    pub fn new(k: Array2<f64>, l: Array2<f64>) -> Result<Self> {
        if k.nrows() != k.ncols() || l.nrows() != l.ncols() || k.dim() != l.dim() {
            return Err(Error::Shape(format!(
                "Gram matrices must be square and equally sized, got {:?} and {:?}",
                k.dim(),
                l.dim()
            )));
        }
        Ok(Self {
            k,
            l,
            centered: false,
        })
    }

    /// Returns the double-centered pair.
    pub fn centered(&self) -> Result<GramPair> {
        if self.centered {
            return Ok(self.clone());
        }
        Ok(GramPair {
            k: center_gram(&self.k)?,
            l: center_gram(&self.l)?,
            centered: true,
        })
    }
}
