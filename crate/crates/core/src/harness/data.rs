use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::FeatureSet;

/// Features with one ±1 label per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: FeatureSet,
    pub labels: Vec<i8>,
}

impl Dataset {
    pub fn new(features: FeatureSet, labels: Vec<i8>) -> Result<Self> {
        if labels.len() != features.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                got: labels.len(),
            });
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1 && y != -1) {
            return Err(Error::InvalidParameter(format!("labels must be ±1, found {bad}")));
        }
        Ok(Self { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input)
}

/// Numeric rows; a non-numeric first row is taken as a header and skipped.
fn numeric_rows<R: Read>(input: R) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rows = Vec::new();
    for (k, rec) in reader(input).records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(k + 1, |p| p.line() as usize);
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => rows.push((line, v)),
            Err(_) if k == 0 => continue,
            Err(_) => {
                return Err(Error::Parse {
                    line,
                    message: format!("non-numeric field in `{}`", rec.iter().collect::<Vec<_>>().join(",")),
                })
            }
        }
    }
    Ok(rows)
}

/// CSV with Q feature columns followed by a label column in {-1, 1}.
/// Labels in {0, 1} are mapped to {-1, +1} with a warning.
pub fn read_dataset<R: Read>(input: R) -> Result<Dataset> {
    let rows = numeric_rows(input)?;
    let Some((_, first)) = rows.first() else {
        return Err(Error::Parse {
            line: 1,
            message: "no data rows".into(),
        });
    };
    let width = first.len();
    if width < 2 {
        return Err(Error::Parse {
            line: rows[0].0,
            message: "need at least one feature column and a label column".into(),
        });
    }
    let mut data = Vec::with_capacity(rows.len() * (width - 1));
    let mut raw = Vec::with_capacity(rows.len());
    for (line, row) in &rows {
        if row.len() != width {
            return Err(Error::Parse {
                line: *line,
                message: format!("expected {width} fields, found {}", row.len()),
            });
        }
        data.extend_from_slice(&row[..width - 1]);
        raw.push((*line, row[width - 1]));
    }
    let zero_one = raw.iter().all(|(_, y)| *y == 0.0 || *y == 1.0) && raw.iter().any(|(_, y)| *y == 0.0);
    if zero_one {
        log::warn!("labels are in {{0, 1}}; mapping 0 to -1");
    }
    let mut labels = Vec::with_capacity(raw.len());
    for (line, y) in raw {
        let v = if zero_one && y == 0.0 { -1.0 } else { y };
        if v != 1.0 && v != -1.0 {
            return Err(Error::Parse {
                line,
                message: format!("label must be -1 or 1, found {y}"),
            });
        }
        labels.push(v as i8);
    }
    let q = width - 1;
    let features = FeatureSet::from_flat(labels.len(), q, data, vec![1.0; q], 1.0)?;
    Dataset::new(features, labels)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    read_dataset(File::open(path)?)
}

/// Feature-only CSV, one row per sample.
pub fn read_features<R: Read>(input: R, weights: Option<Vec<f64>>, bandwidth: f64) -> Result<FeatureSet> {
    let rows = numeric_rows(input)?;
    let q = rows.first().map_or(0, |r| r.1.len());
    for (line, r) in &rows {
        if r.len() != q {
            return Err(Error::Parse {
                line: *line,
                message: format!("expected {q} fields, found {}", r.len()),
            });
        }
    }
    let n = rows.len();
    let data = rows.into_iter().flat_map(|r| r.1).collect();
    FeatureSet::from_flat(n, q, data, weights.unwrap_or_else(|| vec![1.0; q]), bandwidth)
}

/// `index,label` CSV with labels in {-1, 1}.
pub fn read_labels<R: Read>(input: R) -> Result<Vec<(usize, i8)>> {
    let mut out = Vec::new();
    for (line, row) in numeric_rows(input)? {
        if row.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected `index,label`, found {} fields", row.len()),
            });
        }
        let (i, y) = (row[0], row[1]);
        if i < 0.0 || i.fract() != 0.0 {
            return Err(Error::Parse {
                line,
                message: format!("invalid index {i}"),
            });
        }
        if y != 1.0 && y != -1.0 {
            return Err(Error::Parse {
                line,
                message: format!("label must be -1 or 1, found {y}"),
            });
        }
        out.push((i as usize, y as i8));
    }
    Ok(out)
}

pub fn write_dataset<W: Write>(out: W, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let q = data.features.dim();
    let mut header: Vec<String> = (0..q).map(|k| format!("x{k}")).collect();
    header.push("label".into());
    w.write_record(&header)?;
    for (i, y) in data.labels.iter().enumerate() {
        let mut rec: Vec<String> = data.features.row(i).iter().map(f64::to_string).collect();
        rec.push(y.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
