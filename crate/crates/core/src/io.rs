//! File formats: labelled datasets, explanation sets and model weights.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{domain, Error, Result};
use crate::model::{ExplanationSet, LinearModel};
use crate::scalar::{vector, Scalar};

/// Feature rows with `±1` labels and an optional protected-group column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub features: Vec<String>,
    pub points: Vec<Vec<T>>,
    pub labels: Vec<i8>,
    pub groups: Option<Vec<String>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }

    /// Scales every row onto the unit sphere.
    pub fn normalize_rows(&mut self) -> Result<()> {
        for (i, p) in self.points.iter_mut().enumerate() {
            match vector::normalized(p) {
                Some(q) => *p = q,
                None => return domain(format!("row {i} has zero norm and cannot be normalised")),
            }
        }
        Ok(())
    }
}

fn parse_num<T: Scalar>(s: &str, row: usize, col: &str) -> Result<T> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(T::lit)
        .ok_or_else(|| {
            Error::Parse(format!(
                "row {row}, column {col}: {s:?} is not a finite number"
            ))
        })
}

/// Reads a headed CSV with numeric feature columns, a `label` column in
/// `{−1, +1}` or `{0, 1}` (0 maps to −1) and an optional `group` column.
pub fn read_dataset_from<T: Scalar, R: Read>(reader: R) -> Result<Dataset<T>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    let label_col = header
        .iter()
        .position(|h| h.trim() == "label")
        .ok_or_else(|| Error::Parse("dataset has no `label` column".into()))?;
    let group_col = header.iter().position(|h| h.trim() == "group");
    let feature_cols: Vec<usize> = (0..header.len())
        .filter(|&c| c != label_col && Some(c) != group_col)
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::Parse("dataset has no feature columns".into()));
    }
    let features = feature_cols
        .iter()
        .map(|&c| header[c].trim().to_string())
        .collect();

    let mut points = Vec::new();
    let mut raw_labels = Vec::new();
    let mut groups = group_col.map(|_| Vec::new());
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let p = feature_cols
            .iter()
            .map(|&c| parse_num(&rec[c], row, &header[c]))
            .collect::<Result<Vec<T>>>()?;
        points.push(p);
        let y: f64 = parse_num::<f64>(&rec[label_col], row, "label")?;
        raw_labels.push(y);
        if let (Some(g), Some(c)) = (groups.as_mut(), group_col) {
            g.push(rec[c].trim().to_string());
        }
    }
    let has = |v: f64| raw_labels.contains(&v);
    if let Some(bad) = raw_labels.iter().find(|&&y| ![-1.0, 0.0, 1.0].contains(&y)) {
        return Err(Error::Parse(format!(
            "label {bad} is not in {{-1, 1}} or {{0, 1}}"
        )));
    }
    if has(0.0) && has(-1.0) {
        return Err(Error::Parse(
            "labels mix the {-1, 1} and {0, 1} encodings".into(),
        ));
    }
    let labels = raw_labels
        .iter()
        .map(|&y| if y > 0.0 { 1 } else { -1 })
        .collect();
    Ok(Dataset {
        features,
        points,
        labels,
        groups,
    })
}

pub fn read_dataset<T: Scalar>(path: impl AsRef<Path>) -> Result<Dataset<T>> {
    read_dataset_from(File::open(path)?)
}

/// Writes the dataset with `±1` labels.
pub fn write_dataset<T: Scalar, W: Write>(data: &Dataset<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = data.features.clone();
    header.push("label".into());
    if data.groups.is_some() {
        header.push("group".into());
    }
    w.write_record(&header)?;
    for (i, p) in data.points.iter().enumerate() {
        let mut row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        row.push(data.labels[i].to_string());
        if let Some(g) = &data.groups {
            row.push(g[i].clone());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `f1..fd,label,margin`.
pub fn write_explanations<T: Scalar, W: Write>(expl: &ExplanationSet<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let d = expl.dim().unwrap_or(0);
    let mut header: Vec<String> = (1..=d).map(|j| format!("f{j}")).collect();
    header.push("label".into());
    header.push("margin".into());
    w.write_record(&header)?;
    for ((p, y), m) in expl.points.iter().zip(&expl.labels).zip(&expl.margins) {
        let mut row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        row.push(y.to_string());
        row.push(m.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_explanations_from<T: Scalar, R: Read>(reader: R) -> Result<ExplanationSet<T>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    let n = header.len();
    if n < 2 || &header[n - 2] != "label" || &header[n - 1] != "margin" {
        return Err(Error::Parse(
            "explanation CSV must end with `label,margin` columns".into(),
        ));
    }
    let (mut points, mut labels, mut margins) = (Vec::new(), Vec::new(), Vec::new());
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let p = (0..n - 2)
            .map(|c| parse_num(&rec[c], row, &header[c]))
            .collect::<Result<Vec<T>>>()?;
        points.push(p);
        let y: f64 = parse_num::<f64>(&rec[n - 2], row, "label")?;
        labels.push(if y > 0.0 { 1 } else { -1 });
        margins.push(parse_num(&rec[n - 1], row, "margin")?);
    }
    ExplanationSet::new(points, labels, margins)
}

pub fn read_explanations<T: Scalar>(path: impl AsRef<Path>) -> Result<ExplanationSet<T>> {
    read_explanations_from(File::open(path)?)
}

/// `{"w": [...], "b": ...}`; a missing `b` reads as 0.
pub fn read_model<T: Scalar>(path: impl AsRef<Path>) -> Result<LinearModel<T>> {
    let m: LinearModel<T> = serde_json::from_reader(File::open(path)?)?;
    if m.w.is_empty() {
        return domain("model has no weights");
    }
    Ok(m)
}

pub fn write_model<T: Scalar, W: Write>(model: &LinearModel<T>, mut out: W) -> Result<()> {
    serde_json::to_writer(&mut out, model)?;
    out.write_all(b"\n")?;
    Ok(())
}
