//! File formats: price ingestion, χ̂ matrices, recovery tables and stability
//! frequencies.

use std::io::{Read, Write};

use chrono::NaiveDate;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::estimate::ChiEstimate;
use crate::learn::{RecoveryRow, StabilityResult};
use crate::simulate::IncrementMatrix;

/// Dated price columns with strictly increasing dates and positive prices.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    pub dates: Vec<NaiveDate>,
    pub tickers: Vec<String>,
    /// One vector per date.
    pub prices: Vec<Vec<f64>>,
}

impl PriceTable {
    /// Reads `date,TICKER1,...,TICKERd` with ISO dates.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.len() < 2 || &headers[0] != "date" {
            return Err(Error::validation("ingest", "header must be `date,TICKER1,...`"));
        }
        let tickers: Vec<String> = headers.iter().skip(1).map(|s| s.trim().to_string()).collect();
        let mut dates = Vec::new();
        let mut prices = Vec::new();
        for (idx, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = idx + 2;
            let date_text = rec.get(0).unwrap_or("").trim();
            let date = NaiveDate::parse_from_str(date_text, "%Y-%m-%d")
                .map_err(|_| Error::validation("ingest", format!("line {line}: unparseable date {date_text:?}")))?;
            if let Some(prev) = dates.last() {
                if date <= *prev {
                    return Err(Error::validation("ingest", format!("line {line}: dates must strictly increase")));
                }
            }
            let mut row = Vec::with_capacity(tickers.len());
            for (j, ticker) in tickers.iter().enumerate() {
                let cell = rec.get(j + 1).map(str::trim).unwrap_or("");
                if cell.is_empty() {
                    return Err(Error::validation("ingest", format!("line {line}, {ticker}: missing price")));
                }
                let v: f64 = cell
                    .parse()
                    .map_err(|_| Error::validation("ingest", format!("line {line}, {ticker}: not a number: {cell:?}")))?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::validation("ingest", format!("line {line}, {ticker}: price must be positive, got {v}")));
                }
                row.push(v);
            }
            if rec.len() != tickers.len() + 1 {
                return Err(Error::validation("ingest", format!("line {line}: expected {} fields", tickers.len() + 1)));
            }
            dates.push(date);
            prices.push(row);
        }
        if dates.len() < 2 {
            return Err(Error::validation("ingest", "need at least two dated rows"));
        }
        Ok(Self { dates, tickers, prices })
    }

    /// Row t is log(S(t)/S(t−1)).
    pub fn log_returns(&self) -> Result<IncrementMatrix> {
        let rows: Vec<Vec<f64>> = self
            .prices
            .windows(2)
            .map(|w| w[1].iter().zip(&w[0]).map(|(b, a)| (b / a).ln()).collect())
            .collect();
        IncrementMatrix::from_rows(&rows)?.with_names(self.tickers.clone())
    }
}

pub fn ingest_prices<R: Read>(reader: R) -> Result<IncrementMatrix> {
    PriceTable::read_csv(reader)?.log_returns()
}

/// Square matrix with a header of column names and the row name first.
pub fn write_matrix_csv<W: Write>(matrix: &DMatrix<f64>, names: &[String], writer: W) -> Result<()> {
    if matrix.nrows() != names.len() || matrix.ncols() != names.len() {
        return Err(Error::validation("io", "matrix size differs from the number of names"));
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![String::new()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for (i, name) in names.iter().enumerate() {
        let mut rec = vec![name.clone()];
        rec.extend((0..names.len()).map(|j| matrix[(i, j)].to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv<R: Read>(reader: R) -> Result<(DMatrix<f64>, Vec<String>)> {
    let mut r = csv::Reader::from_reader(reader);
    let names: Vec<String> = r.headers()?.iter().skip(1).map(str::to_string).collect();
    let d = names.len();
    let mut m = DMatrix::zeros(d, d);
    let mut rows = 0;
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if i >= d || rec.len() != d + 1 {
            return Err(Error::validation("io", "matrix CSV is not square"));
        }
        for j in 0..d {
            m[(i, j)] = rec[j + 1]
                .trim()
                .parse()
                .map_err(|_| Error::validation("io", format!("matrix entry ({}, {}) is not a number", i + 1, j + 1)))?;
        }
        rows += 1;
    }
    if rows != d {
        return Err(Error::validation("io", "matrix CSV is not square"));
    }
    Ok((m, names))
}

/// The five χ̂ matrices under their file suffixes.
pub fn chi_matrices(est: &ChiEstimate) -> [(&'static str, &DMatrix<f64>); 5] {
    [
        ("chi", &est.chi),
        ("chi_pp", &est.chi_pp),
        ("chi_pm", &est.chi_pm),
        ("chi_mp", &est.chi_mp),
        ("chi_mm", &est.chi_mm),
    ]
}

pub fn write_recovery_csv<W: Write>(rows: &[RecoveryRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["n", "q", "proportion"])?;
    for r in rows {
        w.write_record(&[r.n.to_string(), r.q.to_string(), r.proportion.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Edge-list CSV `i,j,frequency` over all pairs.
pub fn write_stability_csv<W: Write>(result: &StabilityResult, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["i", "j", "frequency"])?;
    for (e, f) in result.edge_frequencies() {
        w.write_record(&[(e.a + 1).to_string(), (e.b + 1).to_string(), f.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
