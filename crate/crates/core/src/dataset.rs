//! Two-rater CSV ingestion, target construction and prediction evaluation.
//!
//! Row numbers in diagnostics count data rows from 1 (the header is not a row).

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::agreement::{moments_of, qwk_of_ints, Kappa, UNDEFINED_KAPPA};
use crate::error::{Error, Result};
use crate::reliability::{ceiling_report, CeilingReport};
use crate::scale::{RaterMatrix, ScoreScale, ScoreVector};
use crate::simulation::{build_target, TargetRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    Reject,
    DropRow,
}

impl FromStr for MissingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "reject" => Ok(Self::Reject),
            "drop_row" | "drop" => Ok(Self::DropRow),
            other => Err(Error::Config(format!(
                "unknown missing policy `{other}` (expected reject or drop_row)"
            ))),
        }
    }
}

impl fmt::Display for MissingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MissingPolicy::Reject => "reject",
            MissingPolicy::DropRow => "drop_row",
        })
    }
}

/// Where a two-rater file lives and how to read it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub column_r1: String,
    pub column_r2: String,
    pub column_prediction: Option<String>,
    /// Optional precomputed target column; it must equal the rule's output.
    pub column_target: Option<String>,
    pub scale: ScoreScale,
    pub target_rule: TargetRule,
    pub missing_policy: MissingPolicy,
    #[serde(serialize_with = "ser_delimiter")]
    pub delimiter: u8,
}

fn ser_delimiter<S: serde::Serializer>(d: &u8, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(match d {
        b'\t' => "tab",
        b',' => "comma",
        _ => std::str::from_utf8(std::slice::from_ref(d)).unwrap_or("?"),
    })
}

/// Parse a delimiter name (`comma`, `tab`, or a single ASCII character).
pub fn parse_delimiter(s: &str) -> Result<u8> {
    match s.trim() {
        "comma" | "," => Ok(b','),
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        "semicolon" | ";" => Ok(b';'),
        other if other.len() == 1 && other.is_ascii() => Ok(other.as_bytes()[0]),
        other => Err(Error::Config(format!("unsupported delimiter `{other}`"))),
    }
}

impl DatasetSpec {
    pub fn new(
        path: impl Into<PathBuf>,
        column_r1: &str,
        column_r2: &str,
        scale: ScoreScale,
    ) -> Self {
        Self {
            path: path.into(),
            column_r1: column_r1.to_string(),
            column_r2: column_r2.to_string(),
            column_prediction: None,
            column_target: None,
            scale,
            target_rule: TargetRule::Mean,
            missing_policy: MissingPolicy::Reject,
            delimiter: b',',
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = vec![&self.column_r1, &self.column_r2];
        names.extend(self.column_prediction.iter());
        names.extend(self.column_target.iter());
        for (i, a) in names.iter().enumerate() {
            if a.is_empty() {
                return Err(Error::Config("column names must be non-empty".into()));
            }
            if names[..i].contains(a) {
                return Err(Error::Config(format!("column `{a}` is named twice")));
            }
        }
        ScoreScale::new(self.scale.min_score, self.scale.max_score)?;
        Ok(())
    }

    /// Parse a `key = value` spec file body.
    ///
    /// Blank lines and lines starting with `#` are ignored. Recognized keys:
    /// `path`, `column_r1`, `column_r2`, `column_prediction`, `column_target`,
    /// `scale_min`, `scale_max`, `target_rule`, `missing_policy`, `delimiter`.
    /// A relative `path` is resolved against `base_dir`.
    pub fn from_config_str(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut path = None;
        let (mut r1, mut r2) = (None, None);
        let (mut pred, mut target) = (None, None);
        let (mut lo, mut hi) = (None, None);
        let mut rule = TargetRule::Mean;
        let mut policy = MissingPolicy::Reject;
        let mut delimiter = b',';

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let value = value.trim().trim_matches('"').to_string();
            let int = |v: &str| {
                v.parse::<i64>().map_err(|_| {
                    Error::Config(format!("line {}: `{v}` is not an integer", lineno + 1))
                })
            };
            match key.trim() {
                "path" => path = Some(PathBuf::from(value)),
                "column_r1" => r1 = Some(value),
                "column_r2" => r2 = Some(value),
                "column_prediction" => pred = Some(value),
                "column_target" => target = Some(value),
                "scale_min" => lo = Some(int(&value)?),
                "scale_max" => hi = Some(int(&value)?),
                "target_rule" => rule = value.parse()?,
                "missing_policy" => policy = value.parse()?,
                "delimiter" => delimiter = parse_delimiter(&value)?,
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }

        let mut path: PathBuf = need(path, "path")?;
        if let (true, Some(dir)) = (path.is_relative(), base_dir) {
            path = dir.join(path);
        }
        let spec = Self {
            path,
            column_r1: need(r1, "column_r1")?,
            column_r2: need(r2, "column_r2")?,
            column_prediction: pred,
            column_target: target,
            scale: ScoreScale::new(need(lo, "scale_min")?, need(hi, "scale_max")?)?,
            target_rule: rule,
            missing_policy: policy,
            delimiter,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_config_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        Self::from_config_str(&text, path.parent())
    }
}

fn need<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing key `{key}`")))
}

fn io_error(path: &Path, e: impl fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadedDataset {
    #[serde(skip)]
    pub raters: RaterMatrix,
    #[serde(skip)]
    pub target: ScoreVector,
    pub target_scale: ScoreScale,
    #[serde(skip)]
    pub predictions: Option<ScoreVector>,
    pub n_rows: usize,
    pub n_dropped: usize,
    pub spec: DatasetSpec,
}

impl LoadedDataset {
    /// Rows read from the source file, dropped or not.
    pub fn source_rows(&self) -> usize {
        self.n_rows + self.n_dropped
    }

    /// Write the retained rows back out with the spec's column names.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .delimiter(self.spec.delimiter)
            .from_path(path)
            .map_err(|e| io_error(path, e))?;
        let mut header = vec![self.spec.column_r1.clone(), self.spec.column_r2.clone()];
        header.extend(self.spec.column_prediction.clone());
        w.write_record(&header).map_err(|e| io_error(path, e))?;
        for (i, row) in self.raters.rows().iter().enumerate() {
            let mut rec = vec![row[0].to_string(), row[1].to_string()];
            if let Some(p) = &self.predictions {
                rec.push(p.values()[i].to_string());
            }
            w.write_record(&rec).map_err(|e| io_error(path, e))?;
        }
        w.flush().map_err(|e| io_error(path, e))
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(
        cell.to_ascii_lowercase().as_str(),
        "" | "na" | "nan" | "null"
    )
}

enum Cell {
    Missing,
    Bad(String),
    Value(f64),
}

fn read_cell(cell: &str) -> Cell {
    let cell = cell.trim();
    if is_missing(cell) {
        return Cell::Missing;
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Cell::Value(v),
        _ => Cell::Bad(format!("`{cell}` is not a number")),
    }
}

pub fn load_csv(spec: &DatasetSpec) -> Result<LoadedDataset> {
    spec.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(&spec.path)
        .map_err(|e| io_error(&spec.path, e))?;
    let headers = reader
        .headers()
        .map_err(|e| io_error(&spec.path, e))?
        .clone();
    let index_of = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Schema(format!(
                "column `{name}` not found in {} (columns: {})",
                spec.path.display(),
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })
    };
    let i1 = index_of(&spec.column_r1)?;
    let i2 = index_of(&spec.column_r2)?;
    let ip = spec
        .column_prediction
        .as_deref()
        .map(index_of)
        .transpose()?;
    let it = spec.column_target.as_deref().map(index_of).transpose()?;

    let mut rows = Vec::new();
    let mut preds = Vec::new();
    let mut given_targets = Vec::new();
    let mut n_dropped = 0;

    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: "*".into(),
            message: e.to_string(),
        })?;
        let mut cols = vec![(i1, &spec.column_r1), (i2, &spec.column_r2)];
        cols.extend(ip.zip(spec.column_prediction.as_ref()));
        cols.extend(it.zip(spec.column_target.as_ref()));

        let mut values = Vec::with_capacity(cols.len());
        let mut drop = false;
        for (i, name) in cols {
            match read_cell(record.get(i).unwrap_or("")) {
                Cell::Value(v) => values.push(v),
                Cell::Missing | Cell::Bad(_) if spec.missing_policy == MissingPolicy::DropRow => {
                    drop = true;
                    break;
                }
                Cell::Missing => {
                    return Err(Error::Parse {
                        row,
                        column: name.clone(),
                        message: "missing value".into(),
                    })
                }
                Cell::Bad(message) => {
                    return Err(Error::Parse {
                        row,
                        column: name.clone(),
                        message,
                    })
                }
            }
        }
        if drop {
            n_dropped += 1;
            continue;
        }
        let x1 = spec.scale.check(values[0], Some(row))?;
        let x2 = spec.scale.check(values[1], Some(row))?;
        rows.push([x1, x2]);
        let mut rest = values[2..].iter();
        if ip.is_some() {
            preds.push(*rest.next().expect("prediction value"));
        }
        if it.is_some() {
            given_targets.push((row, *rest.next().expect("target value")));
        }
    }

    let raters = RaterMatrix::new(rows, spec.scale)?;
    let target = build_target(&raters.column(0), &raters.column(1), spec.target_rule)?;
    for ((row, given), &built) in given_targets.iter().zip(&target) {
        if (given - built).abs() > 1e-9 {
            return Err(Error::Schema(format!(
                "row {row}: target {given} in column `{}` is not the {} of the two raters ({built}); \
                 only mean, sum and rounded_mean targets are supported",
                spec.column_target.as_deref().unwrap_or(""),
                spec.target_rule
            )));
        }
    }
    let n_rows = raters.len();
    Ok(LoadedDataset {
        raters,
        target: ScoreVector::new(target)?,
        target_scale: spec.target_rule.target_scale(spec.scale),
        predictions: ip.map(|_| ScoreVector::new(preds)).transpose()?,
        n_rows,
        n_dropped,
        spec: spec.clone(),
    })
}

/// Model predictions scored against the target and the dataset's ceilings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub qwk: Kappa,
    pub correlation: Option<f64>,
    pub attainment_max: Option<f64>,
    pub attainment_hl: Option<f64>,
    pub rounded: bool,
    pub ceilings: CeilingReport,
    pub warnings: Vec<String>,
}

/// QWK and correlation of predictions against the target, plus attainment
/// ratios `qwk / kappa_max` and `qwk / kappa_hl`.
///
/// With `round_predictions`, both predictions and target are rounded and
/// clipped to the target scale before QWK; otherwise both must already be
/// in-scale integers. Correlation always uses the raw values.
pub fn evaluate_predictions(ds: &LoadedDataset, round_predictions: bool) -> Result<Evaluation> {
    let predictions = ds
        .predictions
        .as_ref()
        .ok_or_else(|| Error::Config("no prediction column declared".into()))?;
    let scale = ds.target_scale;
    let ceilings = ceiling_report(&ds.raters)?;
    let mut warnings = ceilings.warnings.clone();

    let (pred_ints, target_ints) = if round_predictions {
        let q = |v: &ScoreVector| {
            v.values()
                .iter()
                .map(|&x| scale.quantize(x))
                .collect::<Vec<_>>()
        };
        (q(predictions), q(&ds.target))
    } else {
        (
            predictions.to_scale_ints(&scale)?,
            ds.target.to_scale_ints(&scale)?,
        )
    };
    let qwk = qwk_of_ints(&pred_ints, &target_ints, &scale);
    if qwk.is_undefined() {
        warnings.push(format!("model QWK {UNDEFINED_KAPPA}"));
    }

    let correlation = match moments_of(predictions.values(), ds.target.values())?.correlation() {
        Ok(r) => Some(r),
        Err(e) => {
            warnings.push(format!("model correlation: {e}"));
            None
        }
    };
    let ratio = |ceiling: f64| qwk.value().filter(|_| ceiling > 0.0).map(|q| q / ceiling);
    Ok(Evaluation {
        qwk,
        correlation,
        attainment_max: ratio(ceilings.kappa_max),
        attainment_hl: ratio(ceilings.kappa_hl),
        rounded: round_predictions,
        ceilings,
        warnings,
    })
}
