//! CSV rows for every emitted table, with lossless read-back.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back yields bit-identical values.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::charfn::{CharFnEstimate, Method};
use crate::error::Result;

pub use crate::applications::{CrwRow, DeltaRow};

/// Writes a header row followed by one row per item.
pub fn write_rows<T: Serialize>(rows: &[T], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes rows into a string.
pub fn rows_to_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Reads rows written by [`write_rows`].
pub fn read_rows<T: DeserializeOwned>(input: impl Read) -> Result<Vec<T>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Into::into))
        .collect()
}

/// `v,re,im,method,shots,stderr_re,stderr_im`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharFnRow {
    pub v: f64,
    pub re: f64,
    pub im: f64,
    pub method: Method,
    pub shots: Option<u64>,
    pub stderr_re: Option<f64>,
    pub stderr_im: Option<f64>,
}

impl From<&CharFnEstimate> for CharFnRow {
    fn from(e: &CharFnEstimate) -> Self {
        Self {
            v: e.v,
            re: e.value.re,
            im: e.value.im,
            method: e.method,
            shots: e.shots,
            stderr_re: e.stderr_re,
            stderr_im: e.stderr_im,
        }
    }
}

/// `l,re,im` coefficient dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffRow {
    pub l: i64,
    pub re: f64,
    pub im: f64,
}

/// `y,probability,a_hat` amplitude-estimation outcome dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PmfRow {
    pub y: u64,
    pub probability: f64,
    pub a_hat: f64,
}

/// `index,re,im` statevector dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRow {
    pub index: u64,
    pub re: f64,
    pub im: f64,
}
