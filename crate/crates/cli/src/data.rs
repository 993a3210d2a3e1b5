//! CSV ingestion and atomic output.
//!
//! Inputs are comma-separated UTF-8 with a header row. Lines starting with
//! `#` are comments, except `# labels: a,b,...`, which fixes the label set of
//! a classification file (needed when some labels have no rows).

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{CliError, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn parse_number(field: &str, line: u64) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| CliError::BadInput(format!("line {line}: '{field}' is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::BadInput(format!("line {line}: '{field}' is not finite")));
    }
    Ok(v)
}

/// Header and `(line, fields)` rows.
type Records = (Vec<String>, Vec<(u64, Vec<String>)>);

fn records(text: &str) -> Result<Records> {
    let mut rdr = reader(text);
    let header: Vec<String> = rdr
        .headers()
        .map_err(CliError::input)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(CliError::input)?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok((header, rows))
}

/// Rows of an `x,y` file; at least one is required.
pub fn parse_regression(text: &str) -> Result<Vec<(f64, f64)>> {
    let (header, rows) = records(text)?;
    if header != ["x", "y"] {
        return Err(CliError::BadInput(format!("expected header x,y, found {}", header.join(","))));
    }
    if rows.is_empty() {
        return Err(CliError::BadInput("no data rows".into()));
    }
    rows.iter()
        .map(|(line, r)| Ok((parse_number(&r[0], *line)?, parse_number(&r[1], *line)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub y: Vec<usize>,
    pub label_names: Vec<String>,
}

fn label_directive(text: &str) -> Option<Vec<String>> {
    text.lines().find_map(|l| {
        let rest = l.trim_start().strip_prefix('#')?.trim_start().strip_prefix("labels:")?;
        Some(rest.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
    })
}

/// Feature columns then a label column. Labels are indexed in order of
/// first appearance, after any declared in a `# labels:` line.
pub fn parse_classification(text: &str) -> Result<Classification> {
    let (header, rows) = records(text)?;
    if header.len() < 2 {
        return Err(CliError::BadInput("expected feature columns followed by a label column".into()));
    }
    if rows.is_empty() {
        return Err(CliError::BadInput("no data rows".into()));
    }
    let k = header.len() - 1;
    let mut label_names = label_directive(text).unwrap_or_default();
    let declared = !label_names.is_empty();
    let mut out_rows = Vec::with_capacity(rows.len());
    let mut y = Vec::with_capacity(rows.len());
    for (line, r) in &rows {
        let features = r[..k]
            .iter()
            .map(|f| parse_number(f, *line))
            .collect::<Result<Vec<f64>>>()?;
        let label = &r[k];
        let idx = match label_names.iter().position(|l| l == label) {
            Some(i) => i,
            None if declared => {
                return Err(CliError::BadInput(format!("line {line}: label '{label}' is not declared")))
            }
            None => {
                label_names.push(label.clone());
                label_names.len() - 1
            }
        };
        out_rows.push(features);
        y.push(idx);
    }
    if label_names.len() < 2 {
        return Err(CliError::BadInput(
            "need at least two labels; declare them with a '# labels: a,b' line".into(),
        ));
    }
    Ok(Classification {
        feature_names: header[..k].to_vec(),
        rows: out_rows,
        y,
        label_names,
    })
}

/// A square numeric matrix under a header row of names.
pub fn parse_matrix(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let (header, rows) = records(text)?;
    if rows.len() != header.len() {
        return Err(CliError::BadInput(format!(
            "matrix has {} names but {} rows",
            header.len(),
            rows.len()
        )));
    }
    let m = rows
        .iter()
        .map(|(line, r)| r.iter().map(|f| parse_number(f, *line)).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok((header, m))
}

/// Writes through a sibling temporary file and a rename, or to standard output.
pub fn write_output(path: Option<&Path>, contents: &[u8]) -> Result<()> {
    let Some(path) = path else {
        let mut stdout = std::io::stdout().lock();
        return stdout
            .write_all(contents)
            .and_then(|_| stdout.flush())
            .map_err(|e| CliError::Io(e.to_string()));
    };
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Io(format!("{}: not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}

pub fn csv_bytes(header: &[String], rows: &[Vec<String>], comments: &[String]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    for c in comments {
        buf.extend_from_slice(format!("# {c}\n").as_bytes());
    }
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}
