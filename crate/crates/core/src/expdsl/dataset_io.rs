//! Dataset files: CSV with `# key: value` metadata lines, or JSON.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::units::parse_number;
use crate::acquisition::{DataAxis, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }

    pub fn from_name(name: &str) -> Option<OutputFormat> {
        match name {
            "csv" => Some(OutputFormat::Csv),
            "json" => Some(OutputFormat::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("json: {0}")]
    Json(String),
    #[error("invalid dataset: {0}")]
    Invalid(String),
}

/// `x` with 9 significant digits in C `%#.9g` style: trailing zeros kept,
/// exponent form outside 1e-4 <= |x| < 1e9.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.00000000".into() } else { "0.00000000".into() };
    }
    let e = format!("{x:.8e}");
    let (mantissa, exp) = e.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let fixed = format!("{:.*}", (8 - exp) as usize, x);
        if exp == 8 {
            fixed + "."
        } else {
            fixed
        }
    } else {
        format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn escape(s: &str, key: bool) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            ':' if key => out.push_str("\\:"),
            c => out.push(c),
        }
    }
    out
}

/// Split a metadata line body at the first unescaped `: ` and unescape both halves.
fn split_meta(body: &str) -> Option<(String, String)> {
    let mut key = String::new();
    let mut chars = body.char_indices();
    while let Some((i, c)) = chars.next() {
        match c {
            '\\' => match chars.next()?.1 {
                '\\' => key.push('\\'),
                'n' => key.push('\n'),
                'r' => key.push('\r'),
                ':' => key.push(':'),
                _ => return None,
            },
            ':' => {
                let rest = body[i + 1..].strip_prefix(' ')?;
                return Some((key, unescape(rest)?));
            }
            c => key.push(c),
        }
    }
    None
}

fn unescape(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            out.push(match chars.next()? {
                '\\' => '\\',
                'n' => '\n',
                'r' => '\r',
                _ => return None,
            });
        } else {
            out.push(c);
        }
    }
    Some(out)
}

fn emit_csv(ds: &Dataset) -> String {
    let mut s = String::new();
    for (k, v) in &ds.metadata {
        let _ = writeln!(s, "# {}: {}", escape(k, true), escape(v, false));
    }
    let header: Vec<String> = ds.axes.iter().map(|a| format!("{} [{}]", a.name, a.unit)).collect();
    let _ = writeln!(s, "{},value", header.join(","));
    let shape = ds.shape();
    let mut index = vec![0usize; shape.len()];
    for v in &ds.values {
        for (a, &i) in ds.axes.iter().zip(&index) {
            s.push_str(&format_sig9(a.values[i]));
            s.push(',');
        }
        s.push_str(&format_sig9(*v));
        s.push('\n');
        for d in (0..shape.len()).rev() {
            index[d] += 1;
            if index[d] < shape[d] {
                break;
            }
            index[d] = 0;
        }
    }
    s
}

/// Serialize a dataset. CSV rows run over the grid with the first axis outermost.
pub fn emit_dataset(ds: &Dataset, format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Csv => emit_csv(ds).into_bytes(),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(ds).expect("datasets serialize");
            s.push('\n');
            s.into_bytes()
        }
    }
}

fn header_cell(cell: &str) -> Option<(String, String)> {
    let (name, rest) = cell.split_once(" [")?;
    let unit = rest.strip_suffix(']')?;
    Some((name.to_string(), unit.to_string()))
}

/// Infer per-axis grids from rows ordered with the last axis fastest.
fn infer_axes(rows: &[Vec<f64>], k: usize) -> Option<Vec<Vec<f64>>> {
    let mut grids = vec![Vec::new(); k];
    let mut stride = 1usize;
    for j in (0..k).rev() {
        let mut i = 0;
        while i < rows.len() {
            let v = rows[i][j];
            if grids[j].last().is_some_and(|last| v <= *last) {
                break;
            }
            grids[j].push(v);
            i = i.checked_add(stride)?;
        }
        stride = stride.checked_mul(grids[j].len())?;
    }
    if stride != rows.len() {
        return None;
    }
    let mut strides = vec![1usize; k];
    for j in (0..k.saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * grids[j + 1].len();
    }
    for (r, row) in rows.iter().enumerate() {
        for j in 0..k {
            if row[j] != grids[j][(r / strides[j]) % grids[j].len()] {
                return None;
            }
        }
    }
    Some(grids)
}

pub fn parse_dataset_csv(text: &str) -> Result<Dataset, DatasetError> {
    let err = |line: usize, message: String| DatasetError::Csv { line, message };
    let mut metadata = BTreeMap::new();
    let mut offset = 0;
    let mut meta_lines = 0;
    for line in text.split_inclusive('\n') {
        if !line.starts_with('#') {
            break;
        }
        meta_lines += 1;
        let body = line.trim_end_matches('\n').trim_end_matches('\r');
        let body = body.strip_prefix("# ").ok_or_else(|| err(meta_lines, "metadata lines start with `# `".into()))?;
        let (k, v) = split_meta(body).ok_or_else(|| err(meta_lines, "expected `# key: value`".into()))?;
        if metadata.insert(k, v).is_some() {
            return Err(err(meta_lines, "duplicate metadata key".into()));
        }
        offset += line.len();
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(&text.as_bytes()[offset..]);
    let header = reader.headers().map_err(|e| err(meta_lines + 1, e.to_string()))?.clone();
    let k = header.len().saturating_sub(1);
    if header.len() < 2 || &header[k] != "value" {
        return Err(err(meta_lines + 1, "header must name the axes followed by `value`".into()));
    }
    let mut names = Vec::with_capacity(k);
    for cell in header.iter().take(k) {
        names.push(
            header_cell(cell)
                .ok_or_else(|| err(meta_lines + 1, format!("axis header `{cell}` is not `name [unit]`")))?,
        );
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = meta_lines + 2 + i;
        let record = record.map_err(|e| err(line, e.to_string()))?;
        let row = record
            .iter()
            .map(|c| parse_number(c).ok_or_else(|| err(line, format!("`{c}` is not a number"))))
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(err(meta_lines + 2, "no data rows".into()));
    }
    let grids = infer_axes(&rows, k).ok_or_else(|| DatasetError::Invalid("rows do not form a product grid".into()))?;
    let axes = names.into_iter().zip(grids).map(|((n, u), g)| DataAxis { name: n, unit: u, values: g }).collect();
    let values = rows.iter().map(|r| r[k]).collect();
    Dataset::new(axes, values, metadata).map_err(|e| DatasetError::Invalid(e.to_string()))
}

pub fn parse_dataset_json(text: &str) -> Result<Dataset, DatasetError> {
    let ds: Dataset = serde_json::from_str(text).map_err(|e| DatasetError::Json(e.to_string()))?;
    ds.validate().map_err(|e| DatasetError::Invalid(e.to_string()))?;
    Ok(ds)
}

pub fn parse_dataset(text: &str, format: OutputFormat) -> Result<Dataset, DatasetError> {
    match format {
        OutputFormat::Csv => parse_dataset_csv(text),
        OutputFormat::Json => parse_dataset_json(text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ds(axes: Vec<DataAxis>, values: Vec<f64>) -> Dataset {
        let mut meta = BTreeMap::new();
        meta.insert("note".to_string(), "multi\nline: with \\ chars".to_string());
        meta.insert("weird:key".to_string(), String::new());
        Dataset::new(axes, values, meta).unwrap()
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(5.0), "5.00000000");
        assert_eq!(format_sig9(-0.00123456789), "-0.00123456789");
        assert_eq!(format_sig9(12.0001), "12.0001000");
        assert_eq!(format_sig9(1e9), "1.00000000e+09");
        assert_eq!(format_sig9(2.67e-5), "2.67000000e-05");
        assert_eq!(format_sig9(9.9999999996), "10.0000000");
        assert_eq!(format_sig9(123456789.4), "123456789.");
    }

    #[test]
    fn single_value_csv() {
        let d = ds(vec![DataAxis::new("field", "T", vec![8.5])], vec![5.0]);
        let csv = String::from_utf8(emit_dataset(&d, OutputFormat::Csv)).unwrap();
        let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows, vec!["field [T],value", "8.50000000,5.00000000"]);
        assert_eq!(parse_dataset_csv(&csv).unwrap(), d);
    }

    #[test]
    fn two_axis_order() {
        let d = ds(
            vec![DataAxis::new("field", "T", vec![1.0, 2.0, 3.0]), DataAxis::new("tau", "s", vec![1e-7, 2e-7])],
            vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
        );
        let csv = String::from_utf8(emit_dataset(&d, OutputFormat::Csv)).unwrap();
        let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
        assert_eq!(rows.len(), 6);
        assert!(rows[1].starts_with("1.00000000,2.00000000e-07,"));
        assert!(rows[2].starts_with("2.00000000,1.00000000e-07,"));
        assert_eq!(parse_dataset_csv(&csv).unwrap(), d);
        let json = emit_dataset(&d, OutputFormat::Json);
        assert_eq!(parse_dataset_json(std::str::from_utf8(&json).unwrap()).unwrap(), d);
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_dataset_csv("").is_err());
        assert!(parse_dataset_csv("#bad\nx [],value\n1,2\n").is_err());
        assert!(parse_dataset_csv("x [],value\n1,2\n1,3\n").is_err());
        assert!(parse_dataset_csv("x [],value\n1,nan\n").is_err());
        assert!(parse_dataset_csv("x,value\n1,2\n").is_err());
        assert!(parse_dataset_csv("a [],b [],value\n1,1,0\n1,2,0\n2,1,0\n").is_err());
        assert!(parse_dataset_json("{\"metadata\":{},\"axes\":[],\"values\":[]}").is_err());
        assert!(parse_dataset_json(
            "{\"metadata\":{},\"axes\":[{\"name\":\"x\",\"unit\":\"\",\"values\":[1]}],\"values\":[1,2]}"
        )
        .is_err());
    }

    fn arb_dataset() -> impl Strategy<Value = Dataset> {
        let axis = |name: &'static str| {
            prop::collection::btree_set(-1_000_000i64..1_000_000, 1..5)
                .prop_map(move |set| DataAxis::new(name, "u", set.into_iter().map(|v| v as f64 * 1e-3).collect()))
        };
        (axis("a"), prop::option::of(axis("b")), prop::collection::vec(-1e12f64..1e12, 16), "[ -~]{0,12}").prop_map(
            |(a, b, pool, note)| {
                let axes: Vec<DataAxis> = std::iter::once(a).chain(b).collect();
                let n: usize = axes.iter().map(|x| x.values.len()).product();
                let values = (0..n).map(|i| pool[i % pool.len()]).collect();
                let mut meta = BTreeMap::new();
                meta.insert("note".to_string(), note);
                Dataset::new(axes, values, meta).unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn csv_emit_parse_emit_fixpoint(d in arb_dataset()) {
            let first = emit_dataset(&d, OutputFormat::Csv);
            let parsed = parse_dataset_csv(std::str::from_utf8(&first).unwrap()).unwrap();
            prop_assert_eq!(&parsed.metadata, &d.metadata);
            for (x, y) in parsed.values.iter().zip(&d.values) {
                prop_assert_eq!(format_sig9(*x), format_sig9(*y));
            }
            prop_assert_eq!(emit_dataset(&parsed, OutputFormat::Csv), first);
        }

        #[test]
        fn json_round_trip_bit_exact(d in arb_dataset()) {
            let first = emit_dataset(&d, OutputFormat::Json);
            let parsed = parse_dataset_json(std::str::from_utf8(&first).unwrap()).unwrap();
            prop_assert!(parsed.values.iter().zip(&d.values).all(|(a, b)| a.to_bits() == b.to_bits()));
            prop_assert_eq!(emit_dataset(&parsed, OutputFormat::Json), first);
        }

        #[test]
        fn csv_parser_never_panics(s in "\\PC{0,80}") {
            let _ = parse_dataset_csv(&s);
        }
    }
}
