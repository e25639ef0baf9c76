use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time step of the simulated increments: unit time, or 1/n with n the
/// number of rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Unit,
    #[serde(rename = "hf")]
    HighFrequency,
}

impl std::str::FromStr for StepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(StepKind::Unit),
            "hf" | "high-frequency" => Ok(StepKind::HighFrequency),
            other => Err(Error::validation("simulate", format!("unknown step kind '{other}'"))),
        }
    }
}

/// Provenance recorded next to an increment matrix.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IncrementMetadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_kind: Option<StepKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_hash: Option<String>,
}

/// n×d matrix of increments stored row-major; row t is the increment over
/// the t-th step.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementMatrix {
    n: usize,
    d: usize,
    data: Vec<f64>,
    names: Vec<String>,
    metadata: IncrementMetadata,
}

fn default_names(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("X{i}")).collect()
}

impl IncrementMatrix {
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * d {
            return Err(Error::validation(
                "simulate",
                format!("increment data has {} values, expected {n}×{d}", data.len()),
            ));
        }
        if let Some(p) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(
                "simulate",
                format!("non-finite increment at row {}, column {}", p / d + 1, p % d + 1),
            ));
        }
        Ok(Self {
            n,
            d,
            data,
            names: default_names(d),
            metadata: IncrementMetadata::default(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::validation("simulate", "rows have different lengths"));
        }
        Self::new(rows.len(), d, rows.concat())
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let d = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::validation("simulate", "columns have different lengths"));
        }
        let mut data = Vec::with_capacity(n * d);
        for t in 0..n {
            data.extend(columns.iter().map(|c| c[t]));
        }
        Self::new(n, d, data)
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.d {
            return Err(Error::validation("simulate", "one column name per coordinate is required"));
        }
        self.names = names;
        Ok(self)
    }

    pub fn with_metadata(mut self, metadata: IncrementMetadata) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn metadata(&self) -> &IncrementMetadata {
        &self.metadata
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, t: usize, j: usize) -> f64 {
        self.data[t * self.d + j]
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.d..(t + 1) * self.d]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|t| self.get(t, j)).collect()
    }

    /// First `n` rows.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n > self.n || n == 0 {
            return Err(Error::validation("simulate", format!("prefix length {n} outside 1..={}", self.n)));
        }
        let mut out = Self::new(n, self.d, self.data[..n * self.d].to_vec())?;
        out.names = self.names.clone();
        out.metadata = self.metadata.clone();
        Ok(out)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * self.d);
        for &t in rows {
            if t >= self.n {
                return Err(Error::validation("simulate", format!("row {t} out of range")));
            }
            data.extend_from_slice(self.row(t));
        }
        let mut out = Self::new(rows.len(), self.d, data)?;
        out.names = self.names.clone();
        Ok(out)
    }

    /// Applies `f(j, x)` to every entry, e.g. a marginal transform.
    pub fn map_columns(&self, f: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let d = self.d;
        let data = self.data.iter().enumerate().map(|(p, &v)| f(p % d, v)).collect();
        let mut out = Self::new(self.n, d, data)?;
        out.names = self.names.clone();
        out.metadata = self.metadata.clone();
        Ok(out)
    }

    /// Cumulative sums: the sampled path at the end of each step.
    pub fn cumulative(&self) -> Self {
        let mut data = self.data.clone();
        for t in 1..self.n {
            for j in 0..self.d {
                data[t * self.d + j] += data[(t - 1) * self.d + j];
            }
        }
        Self {
            n: self.n,
            d: self.d,
            data,
            names: self.names.clone(),
            metadata: self.metadata.clone(),
        }
    }

    /// CSV with header `t,<names>`; t counts steps from 1.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(self.d + 1);
        for t in 0..self.n {
            record.clear();
            record.push((t + 1).to_string());
            record.extend(self.row(t).iter().map(|v| format!("{v:e}")));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format written by [`write_csv`]. The first column is the
    /// step index and is not interpreted.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.len() < 2 || &headers[0] != "t" {
            return Err(Error::validation("simulate", "increment CSV must start with a `t` column"));
        }
        let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
        let d = names.len();
        let mut data = Vec::new();
        let mut n = 0;
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != d + 1 {
                return Err(Error::validation("simulate", format!("row {} has {} fields, expected {}", row + 1, rec.len(), d + 1)));
            }
            for (j, field) in rec.iter().skip(1).enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::validation("simulate", format!("row {}, column {}: not a number: {field:?}", row + 1, names[j]))
                })?;
                data.push(v);
            }
            n += 1;
        }
        Self::new(n, d, data)?.with_names(names)
    }
}
