//! Dataset ingestion from CSV and IDX files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use gssl_core::graph::Dataset;
use gssl_core::Mat;

use crate::error::{GsslError, Result};

/// Where the class column of a CSV file is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelColumn {
    /// A header column named `label`, if there is a header.
    #[default]
    Auto,
    /// The last column, with or without a header.
    Last,
    /// Every column is a feature.
    None,
}

/// A loaded dataset plus the original spelling of each class.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub dataset: Dataset,
    /// `class_names[c]` is the raw label mapped to class `c`.
    pub class_names: Vec<String>,
}

/// Maps raw labels onto `0..c`, ordering numerically when every label is a
/// number and lexicographically otherwise.
pub fn index_labels(raw: &[String]) -> (Vec<usize>, Vec<String>) {
    let numeric = raw.iter().all(|s| s.parse::<f64>().is_ok());
    let mut names: Vec<String> = raw.to_vec();
    if numeric {
        names.sort_by(|a, b| {
            a.parse::<f64>()
                .unwrap()
                .total_cmp(&b.parse::<f64>().unwrap())
                .then_with(|| a.cmp(b))
        });
    } else {
        names.sort();
    }
    names.dedup();
    let lookup: BTreeMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let idx = raw.iter().map(|s| lookup[s.as_str()]).collect();
    (idx, names)
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn load_csv(path: &Path, label: LabelColumn) -> Result<Loaded> {
    let text = fs::read(path).map_err(|e| GsslError::io(path, e))?;
    parse_csv(path, &text, label)
}

/// Parses CSV bytes; `path` is only used in diagnostics.
pub fn parse_csv(path: &Path, bytes: &[u8], label: LabelColumn) -> Result<Loaded> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| GsslError::data(path, format!("malformed CSV: {e}")))?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line());
        records.push((line, rec));
    }
    let Some((_, first)) = records.first() else {
        return Err(GsslError::data(path, "file contains no rows"));
    };
    let has_header = first.iter().any(|c| parse_cell(c).is_none());
    let header: Option<Vec<String>> = has_header.then(|| first.iter().map(str::to_string).collect());
    let width = first.len();
    let label_col = match (label, &header) {
        (LabelColumn::None, _) => None,
        (LabelColumn::Last, _) => Some(width - 1),
        (LabelColumn::Auto, Some(h)) => h.iter().position(|c| c.eq_ignore_ascii_case("label")),
        (LabelColumn::Auto, None) => None,
    };
    if label_col.is_some() && width < 2 {
        return Err(GsslError::data(path, "a label column needs at least one feature column beside it"));
    }
    let body = &records[usize::from(has_header)..];
    if body.is_empty() {
        return Err(GsslError::data(path, "file has a header but no data rows"));
    }
    let d = width - usize::from(label_col.is_some());
    let mut features = Vec::with_capacity(body.len() * d);
    let mut raw_labels = Vec::new();
    for (line, rec) in body {
        if rec.len() != width {
            return Err(GsslError::data(
                path,
                format!("line {line}: expected {width} fields, found {}", rec.len()),
            ));
        }
        for (j, cell) in rec.iter().enumerate() {
            if Some(j) == label_col {
                if cell.is_empty() {
                    return Err(GsslError::data(path, format!("line {line}: empty label")));
                }
                raw_labels.push(cell.to_string());
            } else {
                let v = parse_cell(cell).ok_or_else(|| {
                    GsslError::data(
                        path,
                        format!("line {line}, column {}: '{cell}' is not a finite number", j + 1),
                    )
                })?;
                features.push(v);
            }
        }
    }
    let x = Mat::from_vec(body.len(), d, features)?;
    let (labels, class_names) = if label_col.is_some() {
        let (idx, names) = index_labels(&raw_labels);
        (Some(idx), names)
    } else {
        (None, Vec::new())
    };
    let dataset = Dataset::new(x, labels).map_err(|e| GsslError::data(path, e.to_string()))?;
    Ok(Loaded {
        dataset,
        class_names,
    })
}

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Decoded IDX array of unsigned bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxArray {
    pub dims: Vec<usize>,
    pub data: Vec<u8>,
}

fn read_be_u32(path: &Path, bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| {
            GsslError::data(
                path,
                format!("truncated header: need 4 bytes at offset {offset}, file has {}", bytes.len()),
            )
        })
}

/// Parses an unsigned-byte IDX file whose magic must equal `expected_magic`.
pub fn parse_idx(path: &Path, bytes: &[u8], expected_magic: u32) -> Result<IdxArray> {
    let magic = read_be_u32(path, bytes, 0)?;
    if magic != expected_magic {
        return Err(GsslError::data(
            path,
            format!("bad magic number 0x{magic:08x} at offset 0, expected 0x{expected_magic:08x}"),
        ));
    }
    let ndim = (magic & 0xff) as usize;
    let mut dims = Vec::with_capacity(ndim);
    for k in 0..ndim {
        dims.push(read_be_u32(path, bytes, 4 + 4 * k)? as usize);
    }
    let start = 4 + 4 * ndim;
    let len = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| GsslError::data(path, "dimension product overflows"))?;
    let payload = &bytes[start.min(bytes.len())..];
    if payload.len() != len {
        return Err(GsslError::data(
            path,
            format!(
                "payload at offset {start} has {} bytes, dimensions {dims:?} need {len}",
                payload.len()
            ),
        ));
    }
    Ok(IdxArray {
        dims,
        data: payload.to_vec(),
    })
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| GsslError::io(path, e))
}

/// Loads one or more image/label IDX pairs and stacks them in order.
pub fn load_idx(pairs: &[(PathBuf, PathBuf)]) -> Result<Loaded> {
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut d = None;
    for (img_path, lbl_path) in pairs {
        let images = parse_idx(img_path, &read_file(img_path)?, IDX_IMAGES_MAGIC)?;
        let lbls = parse_idx(lbl_path, &read_file(lbl_path)?, IDX_LABELS_MAGIC)?;
        let count = images.dims[0];
        if lbls.dims[0] != count {
            return Err(GsslError::data(
                lbl_path,
                format!("{} labels for {count} images in {}", lbls.dims[0], img_path.display()),
            ));
        }
        let item = images.dims[1..].iter().product::<usize>();
        if *d.get_or_insert(item) != item {
            return Err(GsslError::data(
                img_path,
                format!("images have {item} pixels, earlier files had {}", d.unwrap()),
            ));
        }
        features.extend(images.data.iter().map(|&b| f64::from(b)));
        labels.extend(lbls.data.iter().map(|b| b.to_string()));
    }
    let Some(d) = d else {
        return Err(GsslError::Config("no IDX files given".into()));
    };
    let n = labels.len();
    let x = Mat::from_vec(n, d, features)?;
    let (idx, class_names) = index_labels(&labels);
    let first = &pairs[0].0;
    let dataset = Dataset::new(x, Some(idx)).map_err(|e| GsslError::data(first, e.to_string()))?;
    Ok(Loaded {
        dataset,
        class_names,
    })
}

/// Reads a whitespace- or comma-separated list of indices.
pub fn load_indices(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(|e| GsslError::io(path, e))?;
    let mut out = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let v = tok.parse::<usize>().map_err(|_| {
                GsslError::data(path, format!("line {}: '{tok}' is not an index", line_no + 1))
            })?;
            out.push(v);
        }
    }
    Ok(out)
}

/// Reads a headerless or headed numeric CSV as a dense matrix.
pub fn load_matrix_csv(path: &Path) -> Result<Mat> {
    let loaded = load_csv(path, LabelColumn::None)?;
    Ok(loaded.dataset.x)
}
