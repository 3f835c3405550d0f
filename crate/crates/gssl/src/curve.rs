//! CSV export of rate sweeps.

use std::io::Write;

use gssl_core::autod::AlphaCurve;

pub const HEADER: [&str; 6] = ["x", "alpha", "mse", "xent", "mae", "labeled_acc"];

/// Writes `x,alpha,mse,xent,mae,labeled_acc[,unlabeled_acc]`, one row per
/// grid point. The last column appears only when every point has it.
pub fn write_curve<W: Write>(curve: &AlphaCurve, out: W) -> csv::Result<()> {
    let with_unlabeled = !curve.points.is_empty()
        && curve.points.iter().all(|p| p.unlabeled_acc.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = HEADER.to_vec();
    if with_unlabeled {
        header.push("unlabeled_acc");
    }
    w.write_record(&header)?;
    for p in &curve.points {
        let mut row = vec![
            p.x.to_string(),
            p.alpha.to_string(),
            p.mse.to_string(),
            p.xent.to_string(),
            p.mae.to_string(),
            p.labeled_acc.to_string(),
        ];
        if let (true, Some(u)) = (with_unlabeled, p.unlabeled_acc) {
            row.push(u.to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
