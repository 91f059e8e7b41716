//! Coordinate tables: one row per sample, an `(x, y)` column pair per assessor.
//!
//! ```text
//! # sheet: 60x40 cm
//! sample,alice_x,alice_y,bob_x,bob_y
//! wine1,12.5,30,40,8.25
//! wine2,14,28.5,3,35
//! ```
//!
//! The optional leading comment records the sheet size in centimetres.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Placement, Point2D, Sheet, Tablecloth};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dialect {
    pub delimiter: u8,
}

impl Default for Dialect {
    fn default() -> Self {
        Self { delimiter: b',' }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateTable {
    pub sample_names: Vec<String>,
    pub assessor_ids: Vec<String>,
    /// Sheet declared in the header comment, if any.
    pub sheet: Option<Sheet>,
    /// `S` rows of `2A` values: `x` then `y` for each assessor in order.
    pub values: Vec<Vec<f64>>,
}

impl CoordinateTable {
    pub fn sample_count(&self) -> usize {
        self.sample_names.len()
    }

    pub fn assessor_count(&self) -> usize {
        self.assessor_ids.len()
    }
}

const SHEET_PREFIX: &str = "# sheet:";

fn parse_sheet_comment(line: &str, row: usize) -> Result<Option<Sheet>> {
    let Some(rest) = line.trim().strip_prefix(SHEET_PREFIX) else {
        return Ok(None);
    };
    let dims = rest.trim().trim_end_matches("cm").trim();
    let (w, h) = dims
        .split_once('x')
        .ok_or_else(|| Error::parse(row, 1, format!("sheet comment `{}` is not WxH", line.trim())))?;
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::parse(row, 1, format!("sheet dimension `{}` is not a number", s.trim())))
    };
    Sheet::new(num(w)?, num(h)?).map(Some)
}

/// Parses and validates a coordinate table.
pub fn parse_table(bytes: &[u8], dialect: Dialect) -> Result<CoordinateTable> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::parse(1, 1, format!("input is not UTF-8: {e}")))?;

    let mut sheet = None;
    let mut body_start = 0;
    let mut comment_lines = 0;
    for line in text.split_inclusive('\n') {
        if !line.trim_start().starts_with('#') {
            break;
        }
        comment_lines += 1;
        if let Some(s) = parse_sheet_comment(line, comment_lines)? {
            sheet = Some(s);
        }
        body_start += line.len();
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(dialect.delimiter)
        .from_reader(&text.as_bytes()[body_start..]);
    let mut records = reader.records();

    let line_of = |r: &csv::StringRecord| r.position().map_or(0, |p| p.line() as usize) + comment_lines;
    let csv_err = |e: csv::Error| {
        let row = e.position().map_or(0, |p| p.line() as usize) + comment_lines;
        Error::parse(row, 1, e.to_string())
    };

    let header = records
        .next()
        .ok_or_else(|| Error::parse(comment_lines + 1, 1, "missing header row"))?
        .map_err(csv_err)?;
    let header_row = line_of(&header);
    let coord_cols = header.len().saturating_sub(1);
    if coord_cols % 2 != 0 {
        return Err(Error::parse(
            header_row,
            header.len(),
            format!("odd coordinate column count ({coord_cols})"),
        ));
    }
    let mut assessor_ids = Vec::with_capacity(coord_cols / 2);
    let mut seen_ids = HashSet::new();
    for a in 0..coord_cols / 2 {
        let (cx, cy) = (1 + 2 * a, 2 + 2 * a);
        let id_x = header[cx].trim().strip_suffix("_x");
        let id_y = header[cy].trim().strip_suffix("_y");
        let id = match (id_x, id_y) {
            (Some(x), Some(y)) if x == y && !x.is_empty() => x.to_string(),
            (None, _) | (Some(""), _) => {
                return Err(Error::parse(header_row, cx + 1, format!("expected `<assessor>_x`, found `{}`", &header[cx])))
            }
            _ => {
                return Err(Error::parse(
                    header_row,
                    cy + 1,
                    format!("expected `{}_y`, found `{}`", id_x.unwrap_or_default(), &header[cy]),
                ))
            }
        };
        if !seen_ids.insert(id.clone()) {
            return Err(Error::parse(header_row, cx + 1, format!("duplicate assessor id `{id}`")));
        }
        assessor_ids.push(id);
    }

    let mut sample_names = Vec::new();
    let mut seen_names = HashSet::new();
    let mut values = Vec::new();
    for record in records {
        let record = record.map_err(csv_err)?;
        let row = line_of(&record);
        if record.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        if record.len() != header.len() {
            return Err(Error::parse(
                row,
                record.len().min(header.len()) + 1,
                format!("expected {} cells, found {}", header.len(), record.len()),
            ));
        }
        let name = record[0].trim().to_string();
        if name.is_empty() {
            return Err(Error::parse(row, 1, "empty sample name"));
        }
        if !seen_names.insert(name.clone()) {
            return Err(Error::parse(row, 1, format!("duplicate sample name `{name}`")));
        }
        let mut row_values = Vec::with_capacity(coord_cols);
        for col in 1..record.len() {
            let cell = record[col].trim();
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::parse(row, col + 1, format!("`{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(Error::parse(row, col + 1, format!("`{cell}` is not finite")));
            }
            row_values.push(v);
        }
        sample_names.push(name);
        values.push(row_values);
    }

    if sample_names.len() < 2 {
        return Err(Error::Validation(format!(
            "at least 2 samples are required, found {}",
            sample_names.len()
        )));
    }
    if assessor_ids.is_empty() {
        return Err(Error::Validation("at least 1 assessor column pair is required".into()));
    }
    Ok(CoordinateTable {
        sample_names,
        assessor_ids,
        sheet,
        values,
    })
}

/// Writes a table in the format read by [`parse_table`]. Numbers use the
/// shortest representation that parses back to the same `f64`.
pub fn serialize_table(table: &CoordinateTable) -> String {
    let mut out = String::new();
    if let Some(s) = table.sheet {
        out.push_str(&format!("{SHEET_PREFIX} {}x{} cm\n", s.width, s.height));
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let header = std::iter::once("sample".to_string())
        .chain(table.assessor_ids.iter().flat_map(|a| [format!("{a}_x"), format!("{a}_y")]));
    w.write_record(header).expect("in-memory write");
    for (name, row) in table.sample_names.iter().zip(&table.values) {
        let cells = std::iter::once(name.clone()).chain(row.iter().map(|v| v.to_string()));
        w.write_record(cells).expect("in-memory write");
    }
    out.push_str(std::str::from_utf8(&w.into_inner().expect("in-memory flush")).expect("utf-8"));
    out
}

/// One tablecloth per assessor column pair, plus out-of-sheet warnings.
pub fn table_to_tablecloths(table: &CoordinateTable, sheet: Sheet) -> (Vec<Tablecloth>, Vec<String>) {
    let mut warnings = Vec::new();
    let cloths: Vec<Tablecloth> = table
        .assessor_ids
        .iter()
        .enumerate()
        .map(|(a, id)| {
            let t = Tablecloth {
                assessor_id: id.clone(),
                sheet,
                placements: table
                    .values
                    .iter()
                    .enumerate()
                    .map(|(sample, row)| Placement {
                        sample,
                        position: Point2D::new(row[2 * a], row[2 * a + 1]),
                    })
                    .collect(),
            };
            warnings.extend(t.warnings(&table.sample_names));
            t
        })
        .collect();
    (cloths, warnings)
}

/// Inverse of [`table_to_tablecloths`].
pub fn tablecloths_to_table(sample_names: &[String], tablecloths: &[Tablecloth], sheet: Sheet) -> Result<CoordinateTable> {
    let n = sample_names.len();
    let mut values = vec![Vec::with_capacity(2 * tablecloths.len()); n];
    for (index, t) in tablecloths.iter().enumerate() {
        if t.sample_count() != n {
            return Err(Error::SampleCountMismatch {
                index,
                expected: n,
                found: t.sample_count(),
            });
        }
        for (row, p) in values.iter_mut().zip(t.positions()?) {
            row.push(p.x);
            row.push(p.y);
        }
    }
    Ok(CoordinateTable {
        sample_names: sample_names.to_vec(),
        assessor_ids: tablecloths.iter().map(|t| t.assessor_id.clone()).collect(),
        sheet: Some(sheet),
        values,
    })
}
