use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Configuration samples with a per-point collision label.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledSampleSet {
    points: Vec<DVector<f64>>,
    labels: Vec<bool>,
    dim: usize,
}

impl LabeledSampleSet {
    pub fn new(dim: usize) -> Self {
        LabeledSampleSet {
            points: Vec::new(),
            labels: Vec::new(),
            dim,
        }
    }

    pub fn from_parts(points: Vec<DVector<f64>>, labels: Vec<bool>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::InvalidConfig("points and labels differ in length".into()));
        }
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        let mut set = Self::new(dim);
        for (p, l) in points.into_iter().zip(labels) {
            set.push(p, l)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, point: DVector<f64>, collision: bool) -> Result<()> {
        if self.dim == 0 {
            self.dim = point.len();
        }
        if point.len() != self.dim || self.dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: point.len(),
            });
        }
        if point.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSample(format!("sample {}", self.points.len())));
        }
        self.points.push(point);
        self.labels.push(collision);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn truncate(&mut self, n: usize) {
        self.points.truncate(n);
        self.labels.truncate(n);
    }

    /// Points carrying the given label, in sample order.
    pub fn class(&self, collision: bool) -> Vec<DVector<f64>> {
        self.points
            .iter()
            .zip(&self.labels)
            .filter(|(_, &l)| l == collision)
            .map(|(p, _)| p.clone())
            .collect()
    }

    pub fn collision_fraction(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.labels.iter().filter(|&&l| l).count() as f64 / self.len() as f64
    }

    /// CSV with columns `x0..x{n-1}` and a 0/1 `collision` column.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.dim).map(|i| format!("x{i}")).collect();
        header.push("collision".into());
        w.write_record(&header)?;
        for (p, &l) in self.points.iter().zip(&self.labels) {
            let mut row: Vec<String> = p.iter().map(|v| format!("{v:?}")).collect();
            row.push(if l { "1" } else { "0" }.into());
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        let label_col = headers
            .iter()
            .position(|h| h.trim() == "collision")
            .ok_or_else(|| Error::InvalidConfig("missing `collision` column".into()))?;
        let mut set = Self::new(headers.len() - 1);
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let mut coords = Vec::with_capacity(rec.len() - 1);
            let mut label = None;
            for (i, field) in rec.iter().enumerate() {
                let field = field.trim();
                if i == label_col {
                    label = Some(match field {
                        "1" | "true" => true,
                        "0" | "false" => false,
                        other => return Err(Error::InvalidSample(format!("row {row}: bad collision flag {other:?}"))),
                    });
                } else {
                    coords.push(
                        field
                            .parse::<f64>()
                            .map_err(|_| Error::InvalidSample(format!("row {row}: bad coordinate {field:?}")))?,
                    );
                }
            }
            set.push(DVector::from_vec(coords), label.unwrap_or(false))?;
        }
        Ok(set)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::read_csv(f)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        self.write_csv(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip() {
        let set = LabeledSampleSet::from_parts(
            vec![
                DVector::from_vec(vec![0.1, -2.0]),
                DVector::from_vec(vec![1.0 / 3.0, 7.25]),
            ],
            vec![true, false],
        )
        .unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x0,x1,collision\n"));
        assert_eq!(LabeledSampleSet::read_csv(&buf[..]).unwrap(), set);
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let r = LabeledSampleSet::from_parts(
            vec![DVector::from_vec(vec![0.0]), DVector::from_vec(vec![0.0, 1.0])],
            vec![true, true],
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }
}
