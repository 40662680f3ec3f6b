//! Delimited-text datasets.
//!
//! One header row naming `id`, `application_date`, the schema attributes and
//! `label`, in any order. Empty cells are missing; the cell `#invalid` marks
//! a value that cleansing flagged as out of range. Binary cells and the
//! label are `1`/`0` (`1` = bad).

use std::fmt;
use std::io;

use scorecard_core::dataset::{Application, AttrKind, CleansingReport, Label, Schema};
use scorecard_core::date::Date;

/// Cell value of a flagged-invalid attribute.
pub const INVALID_MARKER: &str = "#invalid";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based line in the source.
    pub line: u64,
    pub column: Option<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.column {
            Some(c) => write!(f, "line {}, column `{}`: {}", self.line, c, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("input has no header row")]
    NoHeader,
    #[error("malformed header: missing [{}], unexpected [{}]", .missing.join(", "), .unexpected.join(", "))]
    Header { missing: Vec<String>, unexpected: Vec<String> },
    #[error("duplicate header column `{0}`")]
    DuplicateColumn(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedDataset {
    pub records: Vec<Application>,
    pub diagnostics: Vec<Diagnostic>,
}

/// The generator's schema plus the derived columns named in `header`
/// (`geography`, `income_adjusted`).
pub fn schema_for_header(header: &[String]) -> Schema {
    use scorecard_core::dataset::attr;
    let mut schema = Schema::credit_applications();
    if header.iter().any(|h| h == attr::INCOME_ADJUSTED) {
        schema.add_numeric(attr::INCOME_ADJUSTED);
    }
    if header.iter().any(|h| h == attr::GEOGRAPHY) {
        schema.add_nominal(attr::GEOGRAPHY);
    }
    schema
}

/// `schema` extended with every attribute present in `records`.
pub fn schema_for_records(schema: &Schema, records: &[Application]) -> Schema {
    let mut out = schema.clone();
    for r in records.iter().take(1) {
        for k in r.numeric.keys() {
            out.add_numeric(k);
        }
        for k in r.nominal.keys() {
            out.add_nominal(k);
        }
        for k in r.binary.keys() {
            if out.kind_of(k).is_none() {
                out.binary.push(k.clone());
            }
        }
    }
    out
}

fn check_header(header: &[String], schema: &Schema) -> Result<(), DatasetError> {
    let mut seen = std::collections::BTreeSet::new();
    for h in header {
        if !seen.insert(h.as_str()) {
            return Err(DatasetError::DuplicateColumn(h.clone()));
        }
    }
    let expected = schema.columns();
    let missing: Vec<String> = expected.iter().filter(|c| !seen.contains(c.as_str())).cloned().collect();
    let unexpected: Vec<String> = header.iter().filter(|h| !expected.contains(h)).cloned().collect();
    if missing.is_empty() && unexpected.is_empty() {
        Ok(())
    } else {
        Err(DatasetError::Header { missing, unexpected })
    }
}

fn reader<R: io::Read>(source: R, delimiter: u8) -> csv::Reader<R> {
    csv::ReaderBuilder::new().delimiter(delimiter).flexible(true).has_headers(true).from_reader(source)
}

/// Reads the header of `source` only.
pub fn read_header<R: io::Read>(source: R, delimiter: u8) -> Result<Vec<String>, DatasetError> {
    let mut rdr = reader(source, delimiter);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(DatasetError::NoHeader);
    }
    Ok(header)
}

fn parse_binary(cell: &str) -> Option<bool> {
    match cell.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "y" => Some(true),
        "0" | "false" | "no" | "n" => Some(false),
        _ => None,
    }
}

fn parse_label(cell: &str) -> Option<Label> {
    match cell.to_ascii_lowercase().as_str() {
        "1" | "bad" => Some(Label::Bad),
        "0" | "good" => Some(Label::Good),
        _ => None,
    }
}

/// Parses a dataset whose header must name exactly the columns of `schema`.
///
/// A row with the wrong number of fields, an empty id or an unparseable
/// date is skipped; any other unparseable cell is read as missing. Both
/// produce a line-numbered diagnostic.
pub fn parse_dataset<R: io::Read>(source: R, schema: &Schema, delimiter: u8) -> Result<ParsedDataset, DatasetError> {
    let mut rdr = reader(source, delimiter);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(DatasetError::NoHeader);
    }
    check_header(&header, schema)?;
    let kinds: Vec<Option<AttrKind>> = header.iter().map(|h| schema.kind_of(h)).collect();

    let mut out = ParsedDataset::default();
    let mut row = csv::StringRecord::new();
    loop {
        let line = rdr.position().line() + 1;
        match rdr.read_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                // invalid UTF-8 and the like: report and move on
                out.diagnostics.push(Diagnostic { line, column: None, message: e.to_string() });
                if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                    return Err(e.into());
                }
                continue;
            }
        }
        let line = row.position().map(|p| p.line()).unwrap_or(line);
        let diag =
            |column: Option<&str>, message: String| Diagnostic { line, column: column.map(str::to_string), message };
        if row.len() != header.len() {
            out.diagnostics
                .push(diag(None, format!("expected {} fields, found {}; row skipped", header.len(), row.len())));
            continue;
        }
        let mut id = None;
        let mut date = None;
        let mut label = None;
        let mut bad_row = false;
        let mut cells = Vec::with_capacity(header.len());
        for (j, raw) in row.iter().enumerate() {
            let cell = raw.trim();
            match header[j].as_str() {
                Schema::ID => {
                    if cell.is_empty() {
                        out.diagnostics.push(diag(Some(Schema::ID), "empty id; row skipped".into()));
                        bad_row = true;
                    }
                    id = Some(cell.to_string());
                }
                Schema::DATE => match cell.parse::<Date>() {
                    Ok(d) => date = Some(d),
                    Err(e) => {
                        out.diagnostics.push(diag(Some(Schema::DATE), format!("{e}; row skipped")));
                        bad_row = true;
                    }
                },
                Schema::LABEL => {
                    if !cell.is_empty() {
                        label = parse_label(cell);
                        if label.is_none() {
                            out.diagnostics.push(diag(
                                Some(Schema::LABEL),
                                format!("unreadable label `{cell}`; treated as missing"),
                            ));
                        }
                    }
                }
                _ => cells.push((j, raw)),
            }
        }
        if bad_row {
            continue;
        }
        let (Some(id), Some(date)) = (id, date) else { unreachable!("header checked") };
        let mut app = Application::new(id, date);
        app.label = label;
        for (j, raw) in cells {
            let name = header[j].clone();
            let cell = raw.trim();
            let flagged = cell == INVALID_MARKER;
            if flagged {
                app.flagged.insert(name.clone());
            }
            let present = !cell.is_empty() && !flagged;
            match kinds[j].expect("header checked") {
                AttrKind::Numeric => {
                    let v = if present {
                        match cell.parse::<f64>() {
                            Ok(v) if v.is_finite() => Some(v),
                            _ => {
                                out.diagnostics
                                    .push(diag(Some(&name), format!("unreadable number `{cell}`; treated as missing")));
                                None
                            }
                        }
                    } else {
                        None
                    };
                    app.numeric.insert(name, v);
                }
                AttrKind::Nominal => {
                    // raw text is kept for cleansing to normalise
                    app.nominal.insert(name, present.then(|| raw.to_string()));
                }
                AttrKind::Binary => {
                    let v = if present {
                        let b = parse_binary(cell);
                        if b.is_none() {
                            out.diagnostics
                                .push(diag(Some(&name), format!("unreadable flag `{cell}`; treated as missing")));
                        }
                        b
                    } else {
                        None
                    };
                    app.binary.insert(name, v);
                }
            }
        }
        out.records.push(app);
    }
    Ok(out)
}

/// Writes `records` with the column order of `schema`.
pub fn write_dataset<W: io::Write>(
    sink: W,
    records: &[Application],
    schema: &Schema,
    delimiter: u8,
) -> Result<(), DatasetError> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(sink);
    let cols = schema.columns();
    w.write_record(&cols)?;
    let mut row: Vec<String> = Vec::with_capacity(cols.len());
    for r in records {
        row.clear();
        for c in &cols {
            let cell = match c.as_str() {
                Schema::ID => r.id.clone(),
                Schema::DATE => r.date.to_string(),
                Schema::LABEL => match r.label {
                    Some(Label::Bad) => "1".into(),
                    Some(Label::Good) => "0".into(),
                    None => String::new(),
                },
                name if r.is_flagged(name) => INVALID_MARKER.into(),
                name => match schema.kind_of(name) {
                    Some(AttrKind::Numeric) => r.numeric(name).map(|v| v.to_string()).unwrap_or_default(),
                    Some(AttrKind::Nominal) => r.nominal(name).unwrap_or_default().to_string(),
                    Some(AttrKind::Binary) => {
                        r.binary(name).map(|b| if b { "1" } else { "0" }.to_string()).unwrap_or_default()
                    }
                    None => String::new(),
                },
            };
            row.push(cell);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn dataset_to_string(records: &[Application], schema: &Schema, delimiter: u8) -> Result<String, DatasetError> {
    let mut buf = Vec::new();
    write_dataset(&mut buf, records, schema, delimiter)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// `variable,disposition,count`, led by a `*,records,<n>` row.
pub fn cleansing_report_to_string(report: &CleansingReport) -> String {
    let mut s = String::from("variable,disposition,count\n");
    s.push_str(&format!("*,records,{}\n", report.records));
    for (var, disp, n) in report.rows() {
        s.push_str(&format!("{var},{disp},{n}\n"));
    }
    s
}
