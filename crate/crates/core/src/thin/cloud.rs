use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::ThinError;

/// Finite list of points in `R^dim` with free-form provenance metadata.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    dim: usize,
    points: Vec<Vec<f64>>,
    #[serde(default)]
    pub meta: BTreeMap<String, serde_json::Value>,
}

impl PointCloud {
    pub fn new(dim: usize) -> Self {
        PointCloud { dim, points: Vec::new(), meta: BTreeMap::new() }
    }

    pub fn from_points(dim: usize, points: Vec<Vec<f64>>) -> Result<Self, ThinError> {
        let mut c = PointCloud::new(dim);
        for p in points {
            c.push(p)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, p: Vec<f64>) -> Result<(), ThinError> {
        if p.len() != self.dim {
            return Err(ThinError::DimensionMismatch { expected: self.dim, got: p.len() });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(ThinError::NonFinite { index: self.points.len() });
        }
        self.points.push(p);
        Ok(())
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points in `R^{dim+1}` with `t` appended to every coordinate list.
    pub fn lifted(&self, t: f64) -> Vec<Vec<f64>> {
        self.points
            .iter()
            .map(|p| {
                let mut q = p.clone();
                q.push(t);
                q
            })
            .collect()
    }

    /// Read a CSV with a header row; every column is a coordinate.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, ThinError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let dim = rdr.headers()?.len();
        let mut cloud = PointCloud::new(dim);
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let p = rec
                .iter()
                .map(|v| v.parse::<f64>().map_err(|_| ThinError::CsvValue { row: row + 1, value: v.to_string() }))
                .collect::<Result<Vec<_>, _>>()?;
            cloud.push(p)?;
        }
        Ok(cloud)
    }

    /// Write with header `x1..xd`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), ThinError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record((1..=self.dim).map(|i| format!("x{i}")))?;
        for p in &self.points {
            w.write_record(p.iter().map(|v| v.to_string()))?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}
