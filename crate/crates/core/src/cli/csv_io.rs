//! Curve interchange format: `bin,t_start,t_end,novel_cells,crossings`,
//! LF line endings, one row per bin.
//!
//! Single-run curves carry integer counts. Replicate means use the same
//! columns with decimal values; [`read_real_csv`] accepts either.

use std::str::FromStr;

use csv::{ReaderBuilder, StringRecord, Terminator, WriterBuilder};
use thiserror::Error;

use crate::curves::{ExplorationCurve, RealCurve};
use crate::engine::DEFAULT_BIN_WIDTH;

pub const HEADER: [&str; 5] = ["bin", "t_start", "t_end", "novel_cells", "crossings"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CsvError {
    #[error("bad header: expected `{}`", HEADER.join(","))]
    BadHeader,
    #[error("line {line}: {reason}")]
    BadRow { line: u64, reason: String },
    #[error("line {line}: bin width {found} differs from {expected}")]
    InconsistentBinWidth {
        line: u64,
        expected: u64,
        found: u64,
    },
}

fn write_rows<I>(rows: I) -> String
where
    I: IntoIterator<Item = [String; 5]>,
{
    let mut w = WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let emit = |w: &mut csv::Writer<Vec<u8>>, rec: &[String]| {
        w.write_record(rec).expect("writing to memory cannot fail")
    };
    emit(&mut w, &HEADER.map(String::from));
    for row in rows {
        emit(&mut w, &row);
    }
    let bytes = w.into_inner().expect("flushing to memory cannot fail");
    String::from_utf8(bytes).expect("csv output is ASCII")
}

fn time_columns(bin: usize, bin_width: u64) -> (String, String, String) {
    let start = bin as u64 * bin_width;
    (
        bin.to_string(),
        start.to_string(),
        (start + bin_width).to_string(),
    )
}

pub fn write_csv(curve: &ExplorationCurve) -> String {
    write_rows(
        curve
            .novel
            .iter()
            .zip(&curve.crossings)
            .enumerate()
            .map(|(i, (n, c))| {
                let (b, s, e) = time_columns(i, curve.bin_width);
                [b, s, e, n.to_string(), c.to_string()]
            }),
    )
}

/// Writes a real-valued curve; values use the shortest exact decimal form.
pub fn write_real_csv(curve: &RealCurve) -> String {
    write_rows(
        curve
            .novel
            .iter()
            .zip(&curve.crossings)
            .enumerate()
            .map(|(i, (n, c))| {
                let (b, s, e) = time_columns(i, curve.bin_width);
                [b, s, e, n.to_string(), c.to_string()]
            }),
    )
}

fn bad_row(line: u64, reason: impl Into<String>) -> CsvError {
    CsvError::BadRow {
        line,
        reason: reason.into(),
    }
}

/// Parses rows generically, checking the header, bin contiguity and bin
/// width. Header-only input yields the default bin width.
fn read_rows<T: FromStr + PartialOrd + Default + Copy>(
    text: &str,
    valid: impl Fn(T) -> bool,
) -> Result<(u64, Vec<T>, Vec<T>), CsvError> {
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = records
        .next()
        .ok_or(CsvError::BadHeader)?
        .map_err(|_| CsvError::BadHeader)?;
    if header.iter().ne(HEADER) {
        return Err(CsvError::BadHeader);
    }

    let mut bin_width = None;
    let mut novel = Vec::new();
    let mut crossings = Vec::new();
    for record in records {
        let record: StringRecord = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            bad_row(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let int = |i: usize, name: &str| -> Result<u64, CsvError> {
            record[i].parse::<u64>().map_err(|_| {
                bad_row(
                    line,
                    format!("{name} `{}` is not a non-negative integer", &record[i]),
                )
            })
        };
        let count = |i: usize, name: &str| -> Result<T, CsvError> {
            record[i]
                .parse::<T>()
                .ok()
                .filter(|&v| valid(v))
                .ok_or_else(|| {
                    bad_row(
                        line,
                        format!("{name} `{}` is not a valid count", &record[i]),
                    )
                })
        };

        let bin = int(0, "bin")?;
        if bin != novel.len() as u64 {
            return Err(bad_row(
                line,
                format!("expected bin {}, found {bin}", novel.len()),
            ));
        }
        let (start, end) = (int(1, "t_start")?, int(2, "t_end")?);
        if end <= start {
            return Err(bad_row(line, "t_end must exceed t_start"));
        }
        let width = *bin_width.get_or_insert(end - start);
        if end - start != width {
            return Err(CsvError::InconsistentBinWidth {
                line,
                expected: width,
                found: end - start,
            });
        }
        if start != bin * width {
            return Err(bad_row(
                line,
                format!("t_start {start} does not match bin {bin}"),
            ));
        }
        let (n, c) = (count(3, "novel_cells")?, count(4, "crossings")?);
        if n > c {
            return Err(bad_row(line, "novel_cells exceeds crossings"));
        }
        novel.push(n);
        crossings.push(c);
    }
    Ok((bin_width.unwrap_or(DEFAULT_BIN_WIDTH), novel, crossings))
}

/// Reads an integer-count curve written by [`write_csv`].
pub fn read_csv(text: &str) -> Result<ExplorationCurve, CsvError> {
    let (bin_width, novel, crossings) = read_rows::<u32>(text, |_| true)?;
    if let Some(i) = crossings.iter().position(|&c| u64::from(c) > bin_width) {
        return Err(bad_row(i as u64 + 2, "crossings exceed the bin width"));
    }
    Ok(ExplorationCurve {
        bin_width,
        novel,
        crossings,
    })
}

/// Reads a curve with integer or decimal values.
pub fn read_real_csv(text: &str) -> Result<RealCurve, CsvError> {
    let (bin_width, novel, crossings) = read_rows::<f64>(text, |v| v.is_finite() && v >= 0.0)?;
    Ok(RealCurve {
        bin_width,
        novel,
        crossings,
    })
}
