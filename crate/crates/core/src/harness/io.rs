use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::evalmetrics::EvalRecord;
use crate::synthdata::Stream;

pub const RESULT_COLUMNS: [&str; 5] = ["index", "metric", "value", "ci_half_width", "label"];

/// Result rows plus `key: value` metadata written as `#` comments.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub metadata: Vec<(String, String)>,
    pub records: Vec<EvalRecord>,
}

impl ResultTable {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Records with the given metric and label, in table order.
    pub fn series<'a>(
        &'a self,
        metric: &'a str,
        label: &'a str,
    ) -> impl Iterator<Item = &'a EvalRecord> + 'a {
        self.records
            .iter()
            .filter(move |r| r.metric == metric && r.label == label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    /// Metadata comments, then the CSV.
    #[default]
    Csv,
    /// The CSV alone.
    BareCsv,
}

pub(crate) fn num(v: f64) -> String {
    crate::classifiers::fmt_f64(v)
}

/// Render a table. Floats use 17 significant digits, which reproduces every
/// `f64` exactly on reading.
pub fn render_results(table: &ResultTable, format: OutputFormat) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    if format == OutputFormat::Csv {
        for (k, v) in &table.metadata {
            writeln!(out, "# {k}: {v}")?;
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULT_COLUMNS)?;
    for r in &table.records {
        w.write_record([
            r.index.to_string(),
            r.metric.clone(),
            num(r.value),
            num(r.ci_half_width),
            r.label.clone(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn write_results(table: &ResultTable, path: &Path, format: OutputFormat) -> Result<()> {
    let bytes = render_results(table, format)?;
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(&bytes)?;
    f.flush()?;
    Ok(())
}

fn bad_result(path: &Path, row: usize, column: &str, message: impl Into<String>) -> Error {
    Error::Ingestion {
        path: path.to_path_buf(),
        row,
        column: column.into(),
        message: message.into(),
    }
}

/// Read a file written by [`write_results`] in either format.
pub fn read_results(path: &Path) -> Result<ResultTable> {
    let text = std::fs::read_to_string(path)?;
    let mut metadata = Vec::new();
    let mut body_start = 0;
    for line in text.split_inclusive('\n') {
        let Some(comment) = line.strip_prefix('#') else {
            break;
        };
        if let Some((k, v)) = comment.trim().split_once(": ") {
            metadata.push((k.to_string(), v.to_string()));
        }
        body_start += line.len();
    }
    let header_line = metadata.len() + 1;
    let mut rdr = csv::ReaderBuilder::new().from_reader(&text.as_bytes()[body_start..]);
    let header = rdr.headers()?.clone();
    if header.iter().ne(RESULT_COLUMNS) {
        return Err(bad_result(
            path,
            header_line,
            "header",
            "expected index,metric,value,ci_half_width,label",
        ));
    }
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = header_line + i + 1;
        let field = |j: usize| row.get(j).unwrap_or("");
        let float = |j: usize| {
            field(j).parse::<f64>().map_err(|_| {
                bad_result(
                    path,
                    line,
                    RESULT_COLUMNS[j],
                    format!("`{}` is not a number", field(j)),
                )
            })
        };
        let index = field(0).parse::<i64>().map_err(|_| {
            bad_result(
                path,
                line,
                "index",
                format!("`{}` is not an integer", field(0)),
            )
        })?;
        records.push(EvalRecord {
            index,
            metric: field(1).to_string(),
            value: float(2)?,
            ci_half_width: float(3)?,
            label: field(4).to_string(),
        });
    }
    Ok(ResultTable { metadata, records })
}

/// How raw label strings were mapped to classes: the first value seen is
/// class 0, except that labels spelled `0` and `1` keep those codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMapping {
    pub column: String,
    pub class0: String,
    pub class1: String,
}

/// Read a dataset CSV: a header row, numeric feature columns and a label
/// column with exactly two distinct values. Optional `t` (integer time
/// index) and `latent` columns are picked up as such.
pub fn load_dataset_csv(path: &Path, label_column: &str) -> Result<(Dataset, LabelMapping)> {
    let file =
        File::open(path).map_err(|e| bad_result(path, 0, "", format!("cannot open: {e}")))?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(BufReader::new(file));
    let header = rdr
        .headers()
        .map_err(|e| bad_result(path, 1, "", e.to_string()))?
        .clone();
    let names: Vec<String> = header.iter().map(str::to_string).collect();
    let Some(label_ix) = names.iter().position(|n| n == label_column) else {
        return Err(bad_result(
            path,
            1,
            label_column,
            "label column not found in header",
        ));
    };
    let t_ix = names.iter().position(|n| n == "t");
    let latent_ix = names.iter().position(|n| n == "latent");
    let feature_ix: Vec<usize> = (0..names.len())
        .filter(|&j| j != label_ix && Some(j) != t_ix && Some(j) != latent_ix)
        .collect();
    if feature_ix.is_empty() {
        return Err(bad_result(path, 1, "", "no feature columns"));
    }
    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    let mut times = Vec::new();
    let mut latent = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| bad_result(path, line, "", e.to_string()))?;
        if row.len() != names.len() {
            return Err(bad_result(
                path,
                line,
                "",
                format!("{} fields, header has {}", row.len(), names.len()),
            ));
        }
        let cell = |j: usize| -> Result<&str> {
            let v = &row[j];
            if v.is_empty() {
                Err(bad_result(path, line, &names[j], "missing value"))
            } else {
                Ok(v)
            }
        };
        let number = |j: usize| -> Result<f64> {
            let v = cell(j)?;
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    bad_result(
                        path,
                        line,
                        &names[j],
                        format!("`{v}` is not a finite number"),
                    )
                })
        };
        for &j in &feature_ix {
            values.push(number(j)?);
        }
        raw_labels.push(cell(label_ix)?.to_string());
        if let Some(j) = t_ix {
            let v = cell(j)?;
            times
                .push(v.parse::<i64>().map_err(|_| {
                    bad_result(path, line, "t", format!("`{v}` is not an integer"))
                })?);
        }
        if let Some(j) = latent_ix {
            latent.push(number(j)?);
        }
    }
    if raw_labels.is_empty() {
        return Err(bad_result(path, 2, "", "no data rows"));
    }
    let mut classes: Vec<&str> = Vec::new();
    for l in &raw_labels {
        if !classes.contains(&l.as_str()) {
            classes.push(l);
        }
    }
    if classes.len() != 2 {
        return Err(Error::UnsupportedClasses {
            column: label_column.into(),
            count: classes.len(),
        });
    }
    // Labels already coded 0/1 keep their meaning.
    if classes == ["1", "0"] {
        classes.reverse();
    }
    let mapping = LabelMapping {
        column: label_column.into(),
        class0: classes[0].into(),
        class1: classes[1].into(),
    };
    let labels = raw_labels
        .iter()
        .map(|l| u8::from(*l == mapping.class1))
        .collect();
    let n = raw_labels.len();
    let feature_names = feature_ix.iter().map(|&j| names[j].clone()).collect();
    let mut data = Dataset::with_names(
        DMatrix::from_row_slice(n, feature_ix.len(), &values),
        labels,
        feature_names,
    )?;
    if t_ix.is_some() {
        data = data
            .with_time_index(times)
            .map_err(|e| bad_result(path, 2, "t", e.to_string()))?;
    }
    if latent_ix.is_some() {
        data = data.with_latent_score(latent)?;
    }
    Ok((data, mapping))
}

/// Write a dataset in the CSV layout [`load_dataset_csv`] reads, with the
/// label column named `class` (values `0` and `1`).
pub fn write_dataset_csv(data: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let mut header: Vec<String> = data.feature_names().to_vec();
    header.push("class".into());
    if data.time_index().is_some() {
        header.push("t".into());
    }
    if data.latent_score().is_some() {
        header.push("latent".into());
    }
    w.write_record(&header)?;
    for i in 0..data.n() {
        let mut row: Vec<String> = data.features().row(i).iter().map(|&v| num(v)).collect();
        row.push(data.labels()[i].to_string());
        if let Some(t) = data.time_index() {
            row.push(t[i].to_string());
        }
        if let Some(s) = data.latent_score() {
            row.push(num(s[i]));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// A stream as one dataset CSV with a `t` column.
pub fn write_stream_csv(stream: &Stream, path: &Path) -> Result<()> {
    write_dataset_csv(&stream.to_dataset()?, path)
}
