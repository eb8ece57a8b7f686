//! Empirical distribution exports used for the plot-ready CSV files.

use std::path::Path;

use crate::data::write_file;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfPoint {
    pub value: f64,
    pub cum_fraction: f64,
}

/// One point per distinct value; the last point is exactly 1.0.
pub fn empirical_cdf(values: &[f64]) -> Vec<CdfPoint> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut points: Vec<CdfPoint> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / n as f64;
        match points.last_mut() {
            Some(last) if last.value == v => last.cum_fraction = frac,
            _ => points.push(CdfPoint {
                value: v,
                cum_fraction: frac,
            }),
        }
    }
    points
}

/// A `series,value,cum_fraction` table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CdfTable {
    pub rows: Vec<(String, CdfPoint)>,
}

impl CdfTable {
    pub fn push_series(&mut self, name: &str, values: &[f64]) {
        self.rows.extend(
            empirical_cdf(values)
                .into_iter()
                .map(|p| (name.to_string(), p)),
        );
    }

    pub fn series(&self, name: &str) -> Vec<CdfPoint> {
        self.rows
            .iter()
            .filter(|(s, _)| s == name)
            .map(|(_, p)| *p)
            .collect()
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["series", "value", "cum_fraction"])?;
        for (series, p) in &self.rows {
            wtr.write_record([
                series.clone(),
                p.value.to_string(),
                p.cum_fraction.to_string(),
            ])?;
        }
        wtr.into_inner().map_err(|e| Error::Matrix(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), &self.to_csv_bytes()?)
    }
}
