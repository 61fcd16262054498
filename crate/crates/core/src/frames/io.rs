//! Frame files.
//!
//! JSON layout: `{"field": "real"|"complex", "m": .., "n": .., "data": [..]}`
//! with `data` in row-major order; complex entries are `[re, im]` pairs. An
//! optional `meta` object records how the frame was built. Numbers are written
//! in shortest round-trip form, so write → read is bit-exact.
//!
//! CSV input is real only: `m` lines of `n` comma-separated values.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Field, Frame};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameMeta {
    pub construction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub parameters: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Entries {
    Real(Vec<f64>),
    Complex(Vec<[f64; 2]>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameFile {
    field: Field,
    m: usize,
    n: usize,
    data: Entries,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<FrameMeta>,
}

impl FrameFile {
    pub fn new(frame: &Frame, meta: Option<FrameMeta>) -> Self {
        let (m, n) = (frame.m(), frame.n());
        let f = frame.matrix();
        let cells = (0..m).flat_map(|r| (0..n).map(move |c| (r, c)));
        let data = match frame.field() {
            Field::Real => Entries::Real(cells.map(|(r, c)| f[(r, c)].re).collect()),
            Field::Complex => {
                Entries::Complex(cells.map(|(r, c)| [f[(r, c)].re, f[(r, c)].im]).collect())
            }
        };
        Self {
            field: frame.field(),
            m,
            n,
            data,
            meta,
        }
    }

    pub fn meta(&self) -> Option<&FrameMeta> {
        self.meta.as_ref()
    }

    pub fn to_frame(&self) -> Result<Frame> {
        let (m, n) = (self.m, self.n);
        let values: Vec<Complex64> = match (&self.data, self.field) {
            (Entries::Real(v), _) => v.iter().map(|&re| Complex64::new(re, 0.0)).collect(),
            (Entries::Complex(v), Field::Complex) => {
                v.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
            }
            (Entries::Complex(_), Field::Real) => {
                return Err(Error::Format("real frame must store plain numbers".into()))
            }
        };
        if values.len() != m * n {
            return Err(Error::DataLength {
                expected: m * n,
                found: values.len(),
            });
        }
        Frame::new(self.field, DMatrix::from_row_slice(m, n, &values))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Parses a real frame from CSV (one matrix row per line, no header).
pub fn parse_csv<R: Read>(reader: R) -> Result<Frame> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut entries = Vec::new();
    let mut rows = 0;
    let mut cols = None;
    for record in rdr.records() {
        let record = record?;
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(Error::Format(format!(
                    "row {} has {} columns, expected {c}",
                    rows + 1,
                    record.len()
                )))
            }
            _ => {}
        }
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Format(format!("not a number: {field:?}")))?;
            entries.push(v);
        }
        rows += 1;
    }
    Frame::from_real_rows(rows, cols.unwrap_or(0), &entries)
}

impl Frame {
    pub fn to_json(&self, meta: Option<FrameMeta>) -> Result<String> {
        FrameFile::new(self, meta).to_json()
    }

    pub fn write_json<W: Write>(&self, meta: Option<FrameMeta>, mut out: W) -> Result<()> {
        out.write_all(self.to_json(meta)?.as_bytes())?;
        Ok(())
    }

    /// Loads a frame file; `.csv` paths are read as CSV, everything else as JSON.
    pub fn load(path: &Path) -> Result<(Frame, Option<FrameMeta>)> {
        let is_csv = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let file = std::fs::File::open(path)?;
        if is_csv {
            return Ok((parse_csv(file)?, None));
        }
        let mut text = String::new();
        std::io::BufReader::new(file).read_to_string(&mut text)?;
        let ff = FrameFile::from_json(&text)?;
        Ok((ff.to_frame()?, ff.meta))
    }
}
