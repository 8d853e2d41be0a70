//! Text formats: the `x,y,response` dataset CSV, plain value lists, and
//! run configs.

use std::io::Write;

use crate::error::{Error, Result};
use crate::estimators::RegressionDataset;
use crate::experiments::ExperimentConfig;
use crate::geometry::Point2;

pub const DATASET_HEADER: [&str; 3] = ["x", "y", "response"];

/// Writes `x,y,response` rows with shortest round-trip float formatting.
pub fn write_dataset_csv<W: Write>(points: &[Point2], y: &[f64], out: W) -> Result<()> {
    crate::error::check_len(points.len(), y.len())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DATASET_HEADER)?;
    for (p, v) in points.iter().zip(y) {
        w.write_record([p.x.to_string(), p.y.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn dataset_csv_string(points: &[Point2], y: &[f64]) -> Result<String> {
    let mut buf = Vec::new();
    write_dataset_csv(points, y, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}

/// Parses the dataset CSV. Only the syntax is checked here; see
/// [`read_dataset`] for domain validation.
pub fn parse_dataset_csv(text: &str) -> Result<(Vec<Point2>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_error)?;
    if header.iter().ne(DATASET_HEADER) {
        return Err(Error::Parse {
            line: 1,
            msg: format!(
                "header must be \"x,y,response\", got {:?}",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let (mut points, mut y) = (Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |k: usize| -> Result<f64> {
            let raw = record.get(k).unwrap_or("");
            raw.parse::<f64>().map_err(|_| Error::Parse {
                line,
                msg: format!("column {:?}: {raw:?} is not a number", DATASET_HEADER[k]),
            })
        };
        let (a, b, v) = (field(0)?, field(1)?, field(2)?);
        points.push(Point2::new(a, b));
        y.push(v);
    }
    Ok((points, y))
}

/// Parses and validates a dataset: points in the unit square, distinct,
/// finite responses.
pub fn read_dataset(text: &str) -> Result<RegressionDataset> {
    let (points, y) = parse_dataset_csv(text)?;
    RegressionDataset::new(points, y)
}

/// Numbers separated by whitespace or commas; `#` starts a comment.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        for tok in body
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
        {
            out.push(tok.parse().map_err(|_| Error::Parse {
                line: k + 1,
                msg: format!("{tok:?} is not a number"),
            })?);
        }
    }
    Ok(out)
}

/// Parses a run config: either a bare [`ExperimentConfig`] object or a run
/// manifest, whose `config` member is used. Validated before returning.
pub fn parse_run_config(text: &str) -> Result<ExperimentConfig> {
    let json_error = |e: serde_json::Error| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    };
    let mut value: serde_json::Value = serde_json::from_str(text).map_err(json_error)?;
    if value.get("tool").is_some() {
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
        }
    }
    let cfg: ExperimentConfig = serde_json::from_value(value).map_err(json_error)?;
    cfg.validate()?;
    Ok(cfg)
}
