//! CSV tables with a `#` comment header echoing the run configuration.
//!
//! Every table starts with `# dwfree-csv v1`, then any number of
//! `# key = value` lines, then an ordinary CSV header row and data rows.
//! Floats are written in shortest round-trip form, so re-reading a table
//! gives back the exact values; infinity is written `inf` and a missing
//! value is an empty field.

use std::io::{self, Read, Write};

use num_complex::Complex64;

use crate::domains::SpherePoint;

pub const CSV_SCHEMA: &str = "dwfree-csv v1";

pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:?}")
    }
}

/// `(re, im)` fields of an optional sphere point.
pub fn point_fields(p: Option<SpherePoint>) -> [String; 2] {
    match p {
        Some(SpherePoint::Finite(z)) => [fmt_f64(z.re), fmt_f64(z.im)],
        Some(SpherePoint::Infinity) => ["inf".into(), "inf".into()],
        None => [String::new(), String::new()],
    }
}

/// Inverse of [`point_fields`].
pub fn parse_point(re: &str, im: &str) -> Result<Option<SpherePoint>, String> {
    if re.is_empty() && im.is_empty() {
        return Ok(None);
    }
    if re == "inf" && im == "inf" {
        return Ok(Some(SpherePoint::Infinity));
    }
    let p = |s: &str| s.parse::<f64>().map_err(|e| format!("'{s}': {e}"));
    Ok(Some(SpherePoint::Finite(Complex64::new(p(re)?, p(im)?))))
}

pub fn write_table<W: Write>(
    mut out: W,
    comments: &[(String, String)],
    headers: &[&str],
    rows: &[Vec<String>],
) -> io::Result<()> {
    writeln!(out, "# {CSV_SCHEMA}")?;
    for (k, v) in comments {
        writeln!(out, "# {k} = {v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(headers)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()
}

/// A parsed table: echoed configuration, header and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub comments: Vec<(String, String)>,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn read_table<R: Read>(mut input: R) -> Result<Table, String> {
    let mut text = String::new();
    input.read_to_string(&mut text).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(&format!("# {CSV_SCHEMA}")[..]) {
        return Err(format!("missing '# {CSV_SCHEMA}' header"));
    }
    let comments = text
        .lines()
        .skip(1)
        .take_while(|l| l.starts_with('#'))
        .filter_map(|l| {
            let (k, v) = l.trim_start_matches('#').split_once('=')?;
            Some((k.trim().to_string(), v.trim().to_string()))
        })
        .collect();
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = r
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<Result<Vec<Vec<String>>, _>>()
        .map_err(|e| e.to_string())?;
    Ok(Table {
        comments,
        headers,
        rows,
    })
}
