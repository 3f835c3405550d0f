//! Multi-threaded versions of the expensive core operations. Work is split
//! over independent rows, columns or grid points and results are placed by
//! index, so output is identical to the serial functions.

use gssl_core::autod::{validate_grid, AlphaCurve, SpectralLoo};
use gssl_core::graph::{knn_query_row, validate_features};
use gssl_core::lgc::{
    assemble_submatrix, lgc_iterate, propagation_column, validate_labeled, DiffusionParams,
    PropagationSubmatrix,
};
use gssl_core::spectral::LabeledBasis;
use gssl_core::{CsrMatrix, Error, Mat, Result};
use rayon::prelude::*;

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "neighbor count {k} must be in 1..{n}"
        )));
    }
    Ok(())
}

pub fn knn_neighbors(x: &Mat, k: usize) -> Result<Vec<Vec<usize>>> {
    check_k(k, x.rows())?;
    validate_features(x)?;
    Ok((0..x.rows())
        .into_par_iter()
        .map(|i| knn_query_row(x, i, k).into_iter().map(|(j, _)| j).collect())
        .collect())
}

pub fn heuristic_sigma(x: &Mat, m: usize) -> Result<f64> {
    check_k(m, x.rows())?;
    validate_features(x)?;
    let dists: Vec<f64> = (0..x.rows())
        .into_par_iter()
        .map(|i| knn_query_row(x, i, m)[m - 1].1.sqrt())
        .collect();
    // Summed serially in index order so the result does not depend on the
    // thread count.
    Ok(dists.iter().sum::<f64>() / x.rows() as f64 / 3.0)
}

pub fn propagation_submatrix(
    s: &CsrMatrix,
    labeled: &[usize],
    params: &DiffusionParams,
) -> Result<PropagationSubmatrix> {
    DiffusionParams::new(params.alpha, params.t_max)?;
    validate_labeled(labeled, s.rows())?;
    let columns = (0..labeled.len())
        .into_par_iter()
        .map(|b| propagation_column(s, labeled, b, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_submatrix(columns, params))
}

/// Grid sweep evaluated concurrently over `xs`.
pub fn sweep(
    basis: &LabeledBasis,
    y_l: &Mat,
    xs: &[f64],
    remove_diag: bool,
    epsilon: f64,
) -> Result<AlphaCurve> {
    validate_grid(xs)?;
    let loo = SpectralLoo::new(basis, y_l, remove_diag, epsilon)?;
    let points = xs
        .par_iter()
        .map(|&x| loo.evaluate_point(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(AlphaCurve {
        points,
        remove_diag,
    })
}

/// Full diffusion at every rate in `alphas`.
pub fn diffuse_each(s: &CsrMatrix, y: &Mat, alphas: &[f64], t_max: usize) -> Result<Vec<Mat>> {
    alphas
        .par_iter()
        .map(|&a| lgc_iterate(s, y, &DiffusionParams::new(a, t_max)?))
        .collect()
}
