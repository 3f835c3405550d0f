//! kNN affinity graphs and graph Laplacians.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::matrix::{CsrMatrix, Mat};

/// Feature matrix plus optional ground-truth classes.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// `n × d` features, one instance per row.
    pub x: Mat,
    /// Class of each instance in `0..n_classes`, when known.
    pub labels: Option<Vec<usize>>,
    pub n_classes: usize,
}

impl Dataset {
    pub fn new(x: Mat, labels: Option<Vec<usize>>) -> Result<Self> {
        if x.rows() < 2 {
            return Err(Error::InvalidData(format!(
                "need at least 2 instances, found {}",
                x.rows()
            )));
        }
        if x.cols() < 1 {
            return Err(Error::InvalidData("need at least one feature".into()));
        }
        validate_features(&x)?;
        let n_classes = match &labels {
            Some(y) => {
                if y.len() != x.rows() {
                    return Err(Error::DimensionMismatch {
                        context: "Dataset labels",
                        expected: x.rows(),
                        found: y.len(),
                    });
                }
                y.iter().max().map_or(0, |m| m + 1)
            }
            None => 0,
        };
        Ok(Self {
            x,
            labels,
            n_classes,
        })
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }
}

/// Rejects NaN and infinite feature values.
pub fn validate_features(x: &Mat) -> Result<()> {
    for i in 0..x.rows() {
        if let Some(j) = x.row(i).iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite feature at row {i}, column {j}"
            )));
        }
    }
    Ok(())
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn by_distance_then_index(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}

/// The `k` nearest other rows of `x` to row `i` as `(index, squared distance)`,
/// nearest first, ties broken by lower index.
///
/// Features are assumed finite; see [`validate_features`].
pub fn knn_query_row(x: &Mat, i: usize, k: usize) -> Vec<(usize, f64)> {
    let xi = x.row(i);
    let mut cand: Vec<(usize, f64)> = (0..x.rows())
        .filter(|&j| j != i)
        .map(|j| (j, squared_distance(xi, x.row(j))))
        .collect();
    if k < cand.len() {
        cand.select_nth_unstable_by(k, by_distance_then_index);
        cand.truncate(k);
    }
    cand.sort_unstable_by(by_distance_then_index);
    cand
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "neighbor count {k} must be in 1..{n}"
        )));
    }
    Ok(())
}

/// Exact Euclidean kNN lists for every row.
pub fn knn_neighbors(x: &Mat, k: usize) -> Result<Vec<Vec<usize>>> {
    check_k(k, x.rows())?;
    validate_features(x)?;
    Ok((0..x.rows())
        .map(|i| knn_query_row(x, i, k).into_iter().map(|(j, _)| j).collect())
        .collect())
}

/// Sparse symmetric kNN affinity graph with Gaussian weights.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityGraph {
    pub w: CsrMatrix,
    pub degree: Vec<f64>,
    pub sigma: f64,
    pub k: usize,
}

impl AffinityGraph {
    pub fn n(&self) -> usize {
        self.w.rows()
    }

    /// Undirected edge count.
    pub fn edge_count(&self) -> usize {
        self.w.nnz() / 2
    }
}

/// Gaussian kernel `exp(−d² / (2σ²))` on a squared distance.
#[inline]
pub fn rbf_weight(sq_dist: f64, sigma: f64) -> f64 {
    libm::exp(-sq_dist / (2.0 * sigma * sigma))
}

/// Union-symmetrized kNN graph: `W_ij > 0` when `j` is a neighbor of `i` or
/// `i` is a neighbor of `j`.
pub fn build_affinity(x: &Mat, neighbors: &[Vec<usize>], sigma: f64) -> Result<AffinityGraph> {
    let n = x.rows();
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "kernel width must be positive and finite, got {sigma}"
        )));
    }
    if neighbors.len() != n {
        return Err(Error::DimensionMismatch {
            context: "build_affinity neighbor lists",
            expected: n,
            found: neighbors.len(),
        });
    }
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, list) in neighbors.iter().enumerate() {
        for &j in list {
            if j >= n {
                return Err(Error::IndexOutOfRange { index: j, len: n });
            }
            if j == i {
                continue;
            }
            let w = rbf_weight(squared_distance(x.row(i), x.row(j)), sigma);
            rows[i].push((j, w));
            rows[j].push((i, w));
        }
    }
    for row in rows.iter_mut() {
        row.sort_by_key(|&(j, _)| j);
        row.dedup_by_key(|&mut (j, _)| j);
    }
    let w = CsrMatrix::from_row_entries(n, rows)?;
    let degree = w.row_sums();
    if let Some(vertex) = degree.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::IsolatedVertex { vertex });
    }
    let k = neighbors.iter().map(Vec::len).max().unwrap_or(0);
    Ok(AffinityGraph {
        w,
        degree,
        sigma,
        k,
    })
}

/// One third of the mean Euclidean distance to each point's `m`-th nearest
/// neighbor.
pub fn heuristic_sigma(x: &Mat, m: usize) -> Result<f64> {
    check_k(m, x.rows())?;
    validate_features(x)?;
    let total: f64 = (0..x.rows())
        .map(|i| libm::sqrt(knn_query_row(x, i, m)[m - 1].1))
        .sum();
    Ok(total / x.rows() as f64 / 3.0)
}

/// Combinatorial and normalized Laplacians with the normalized similarity.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianPair {
    /// `L_c = D − W`.
    pub combinatorial: CsrMatrix,
    /// `L_n = I − S`.
    pub normalized: CsrMatrix,
    /// `S = D^{-1/2} W D^{-1/2}`.
    pub similarity: CsrMatrix,
}

pub fn laplacians(graph: &AffinityGraph) -> Result<LaplacianPair> {
    let n = graph.n();
    let w = &graph.w;
    if let Some(vertex) = graph.degree.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::IsolatedVertex { vertex });
    }
    let inv_sqrt: Vec<f64> = graph.degree.iter().map(|&d| 1.0 / libm::sqrt(d)).collect();
    let similarity = w.map_values(|i, j, v| v * (inv_sqrt[i] * inv_sqrt[j]));

    let mut lc_rows = Vec::with_capacity(n);
    let mut ln_rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut lc: Vec<(usize, f64)> = w.row(i).map(|(j, v)| (j, -v)).collect();
        lc.push((i, graph.degree[i]));
        lc_rows.push(lc);
        let mut ln: Vec<(usize, f64)> = similarity.row(i).map(|(j, v)| (j, -v)).collect();
        ln.push((i, 1.0));
        ln_rows.push(ln);
    }
    Ok(LaplacianPair {
        combinatorial: CsrMatrix::from_row_entries(n, lc_rows)?,
        normalized: CsrMatrix::from_row_entries(n, ln_rows)?,
        similarity,
    })
}

/// Graph smoothness `½ tr(Fᵀ L F)`.
pub fn smoothness(l: &CsrMatrix, f: &Mat) -> Result<f64> {
    if l.rows() != f.rows() || l.cols() != f.rows() {
        return Err(Error::DimensionMismatch {
            context: "smoothness",
            expected: l.rows(),
            found: f.rows(),
        });
    }
    let lf = l.mul_dense(f)?;
    let tr: f64 = f
        .as_slice()
        .iter()
        .zip(lf.as_slice())
        .map(|(a, b)| a * b)
        .sum();
    Ok(0.5 * tr)
}

/// Number of connected components of the graph with adjacency `w`.
pub fn connected_components(w: &CsrMatrix) -> usize {
    let n = w.rows();
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    let mut count = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for (u, _) in w.row(v) {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
    }
    count
}
