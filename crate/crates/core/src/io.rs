//! CSV readers and writers for matrices, samples, partitions and dendrograms.
//!
//! Floats are written with the shortest representation that parses back to
//! the same value, so load followed by save reproduces the bytes.

use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::clustering::{Dendrogram, Merge};
use crate::error::{Error, Result};
use crate::model::{CorrelationMatrix, DistanceMatrix};
use crate::partition::Partition;
use crate::sampler::SampleMatrix;

fn parse_f64(field: &str, row: usize, col: usize) -> Result<f64> {
    field.trim().parse().map_err(|_| {
        Error::Parse(format!(
            "row {row}, column {col}: `{field}` is not a number"
        ))
    })
}

fn parse_usize(field: &str, row: usize, col: usize) -> Result<usize> {
    field.trim().parse().map_err(|_| {
        Error::Parse(format!(
            "row {row}, column {col}: `{field}` is not a non-negative integer"
        ))
    })
}

fn write_rows<W: Write>(
    w: W,
    header: Option<Vec<String>>,
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    if let Some(h) = header {
        out.write_record(h)?;
    }
    for r in rows {
        out.write_record(r)?;
    }
    out.flush()?;
    Ok(())
}

fn reader<R: Read>(r: R, headers: bool) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(headers)
        .trim(csv::Trim::All)
        .from_reader(r)
}

/// Square numeric matrix, one row per line, no header.
pub fn read_square<R: Read>(r: R) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in reader(r, false).records().enumerate() {
        let rec = rec?;
        rows.push(
            rec.iter()
                .enumerate()
                .map(|(j, f)| parse_f64(f, i, j))
                .collect::<Result<_>>()?,
        );
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::InvalidMatrix("empty matrix file".into()));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn write_square<W: Write>(w: W, m: &DMatrix<f64>) -> Result<()> {
    write_rows(
        w,
        None,
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].to_string()).collect()),
    )
}

pub fn read_correlation<R: Read>(r: R) -> Result<CorrelationMatrix> {
    CorrelationMatrix::new(read_square(r)?)
}

pub fn write_correlation<W: Write>(w: W, m: &CorrelationMatrix) -> Result<()> {
    write_square(w, m.as_matrix())
}

pub fn read_distance<R: Read>(r: R) -> Result<DistanceMatrix> {
    DistanceMatrix::new(read_square(r)?)
}

pub fn write_distance<W: Write>(w: W, m: &DistanceMatrix) -> Result<()> {
    write_square(w, m.as_matrix())
}

/// `T x N` observations under a header row naming the variables (`0..N-1`
/// on export; any names are accepted on import).
pub fn read_samples<R: Read>(r: R) -> Result<SampleMatrix> {
    let mut rd = reader(r, true);
    let n = rd.headers()?.len();
    let mut columns = vec![Vec::new(); n];
    for (t, rec) in rd.records().enumerate() {
        let rec = rec?;
        if rec.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rec.len(),
            });
        }
        for (j, f) in rec.iter().enumerate() {
            columns[j].push(parse_f64(f, t + 1, j)?);
        }
    }
    SampleMatrix::from_columns(&columns)
}

pub fn write_samples<W: Write>(w: W, s: &SampleMatrix) -> Result<()> {
    let n = s.n_vars();
    write_rows(
        w,
        Some((0..n).map(|i| i.to_string()).collect()),
        (0..s.len()).map(|t| (0..n).map(|i| s.get(t, i).to_string()).collect()),
    )
}

/// `index,label` rows under a header.
pub fn read_partition<R: Read>(r: R) -> Result<Partition> {
    let mut labels = Vec::new();
    for (row, rec) in reader(r, true).records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Parse(format!(
                "row {}: expected `index,label`",
                row + 1
            )));
        }
        let index = parse_usize(&rec[0], row + 1, 0)?;
        if index != row {
            return Err(Error::Parse(format!(
                "row {}: expected index {row}, found {index}",
                row + 1
            )));
        }
        labels.push(parse_usize(&rec[1], row + 1, 1)?);
    }
    Ok(Partition::from_labels(&labels))
}

pub fn write_partition<W: Write>(w: W, p: &Partition) -> Result<()> {
    write_rows(
        w,
        Some(vec!["index".into(), "label".into()]),
        p.labels()
            .iter()
            .enumerate()
            .map(|(i, l)| vec![i.to_string(), l.to_string()]),
    )
}

/// Merge records `left,right,height,size` under a header; the number of
/// leaves is one more than the number of merges.
pub fn read_dendrogram<R: Read>(r: R) -> Result<Dendrogram> {
    let mut merges = Vec::new();
    for (row, rec) in reader(r, true).records().enumerate() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(Error::Parse(format!(
                "row {}: expected `left,right,height,size`",
                row + 1
            )));
        }
        merges.push(Merge {
            left: parse_usize(&rec[0], row + 1, 0)?,
            right: parse_usize(&rec[1], row + 1, 1)?,
            height: parse_f64(&rec[2], row + 1, 2)?,
            size: parse_usize(&rec[3], row + 1, 3)?,
        });
    }
    Dendrogram::from_merges(merges.len() + 1, merges)
}

pub fn write_dendrogram<W: Write>(w: W, d: &Dendrogram) -> Result<()> {
    write_rows(
        w,
        Some(vec![
            "left".into(),
            "right".into(),
            "height".into(),
            "size".into(),
        ]),
        d.merges().iter().map(|m| {
            vec![
                m.left.to_string(),
                m.right.to_string(),
                m.height.to_string(),
                m.size.to_string(),
            ]
        }),
    )
}
