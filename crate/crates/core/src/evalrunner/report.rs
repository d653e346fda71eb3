use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{BandAggregate, EvalError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format {other:?} (expected csv or json)")),
        }
    }
}

/// On-disk row: scores ×100 with two decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Row {
    band: String,
    n: usize,
    precision: f64,
    recall: f64,
    f1: f64,
    scot: bool,
    prompt: String,
    model: String,
    failures: usize,
    range_of_interest: bool,
}

fn percent(v: f64) -> f64 {
    format!("{:.2}", v * 100.0).parse().expect("formatted float parses")
}

impl From<&BandAggregate> for Row {
    fn from(a: &BandAggregate) -> Self {
        Self {
            band: a.band_label.clone(),
            n: a.n,
            precision: percent(a.mean_precision),
            recall: percent(a.mean_recall),
            f1: percent(a.mean_f1),
            scot: a.scot,
            prompt: a.prompt.clone(),
            model: a.model_id.clone(),
            failures: a.failures,
            range_of_interest: a.range_of_interest,
        }
    }
}

impl From<Row> for BandAggregate {
    fn from(r: Row) -> Self {
        Self {
            band_label: r.band,
            n: r.n,
            mean_precision: r.precision / 100.0,
            mean_recall: r.recall / 100.0,
            mean_f1: r.f1 / 100.0,
            scot: r.scot,
            prompt: r.prompt,
            model_id: r.model,
            failures: r.failures,
            range_of_interest: r.range_of_interest,
        }
    }
}

impl BandAggregate {
    /// What survives a trip through a report file.
    pub fn rounded(&self) -> Self {
        Row::from(self).into()
    }
}

fn csv_err(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

/// Rows appear in the given order.
pub fn write_report<W: Write>(mut writer: W, aggregates: &[BandAggregate], format: ReportFormat) -> std::io::Result<()> {
    let rows: Vec<Row> = aggregates.iter().map(Row::from).collect();
    match format {
        ReportFormat::Csv => {
            let mut out = csv::Writer::from_writer(writer);
            for row in &rows {
                out.serialize(row).map_err(csv_err)?;
            }
            if rows.is_empty() {
                out.write_record(["band", "n", "precision", "recall", "f1", "scot", "prompt", "model", "failures", "range_of_interest"])
                    .map_err(csv_err)?;
            }
            out.flush()
        }
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut writer, &rows)?;
            writeln!(writer)?;
            writer.flush()
        }
    }
}

pub fn emit_report(aggregates: &[BandAggregate], path: impl AsRef<Path>, format: ReportFormat) -> Result<(), EvalError> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(EvalError::io(path))?;
    write_report(std::io::BufWriter::new(file), aggregates, format).map_err(EvalError::io(path))
}

pub fn parse_report(text: &str, format: ReportFormat) -> Result<Vec<BandAggregate>, EvalError> {
    let malformed = |line: usize, message: String| EvalError::Malformed {
        what: "report",
        line,
        message,
    };
    let rows: Vec<Row> = match format {
        ReportFormat::Csv => csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .enumerate()
            .map(|(i, r)| r.map_err(|e| malformed(i + 2, e.to_string())))
            .collect::<Result<_, _>>()?,
        ReportFormat::Json => {
            serde_json::from_str(text).map_err(|e| malformed(e.line(), e.to_string()))?
        }
    };
    Ok(rows.into_iter().map(BandAggregate::from).collect())
}

pub fn read_report(path: impl AsRef<Path>, format: ReportFormat) -> Result<Vec<BandAggregate>, EvalError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(EvalError::io(path))?;
    parse_report(&text, format)
}

/// One band of one model/prompt with and without SCoT side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct ScotPair {
    pub band_label: String,
    pub model_id: String,
    pub prompt: String,
    pub without_scot: Option<BandAggregate>,
    pub with_scot: Option<BandAggregate>,
}

/// Pairs rows that differ only in `scot`, in first-seen order.
pub fn scot_comparison(aggregates: &[BandAggregate]) -> Vec<ScotPair> {
    let mut pairs: Vec<ScotPair> = Vec::new();
    for a in aggregates {
        let slot = match pairs
            .iter_mut()
            .position(|p| p.band_label == a.band_label && p.model_id == a.model_id && p.prompt == a.prompt)
        {
            Some(i) => &mut pairs[i],
            None => {
                pairs.push(ScotPair {
                    band_label: a.band_label.clone(),
                    model_id: a.model_id.clone(),
                    prompt: a.prompt.clone(),
                    without_scot: None,
                    with_scot: None,
                });
                pairs.last_mut().expect("just pushed")
            }
        };
        let side = if a.scot { &mut slot.with_scot } else { &mut slot.without_scot };
        *side = Some(a.clone());
    }
    pairs
}

/// CSV with paired No-SCoT / With-SCoT score columns; a missing side is blank.
pub fn write_scot_comparison<W: Write>(writer: W, pairs: &[ScotPair]) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "band",
        "model",
        "prompt",
        "n_no_scot",
        "precision_no_scot",
        "recall_no_scot",
        "f1_no_scot",
        "n_scot",
        "precision_scot",
        "recall_scot",
        "f1_scot",
    ])
    .map_err(csv_err)?;
    let side = |a: &Option<BandAggregate>| -> [String; 4] {
        match a {
            Some(a) => [
                a.n.to_string(),
                format!("{:.2}", a.mean_precision * 100.0),
                format!("{:.2}", a.mean_recall * 100.0),
                format!("{:.2}", a.mean_f1 * 100.0),
            ],
            None => Default::default(),
        }
    };
    for p in pairs {
        let mut fields = vec![p.band_label.clone(), p.model_id.clone(), p.prompt.clone()];
        fields.extend(side(&p.without_scot));
        fields.extend(side(&p.with_scot));
        out.write_record(&fields).map_err(csv_err)?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agg(band: &str, scot: bool, f1: f64) -> BandAggregate {
        BandAggregate {
            band_label: band.into(),
            n: 3,
            mean_precision: 0.81234,
            mean_recall: 0.7,
            mean_f1: f1,
            scot,
            prompt: "few-shot".into(),
            model_id: "llama-3.1-8b".into(),
            failures: 1,
            range_of_interest: band == "101-200",
        }
    }

    #[test]
    fn csv_schema_and_round_trip() {
        let aggs = vec![agg("1-100", false, 0.75)];
        let mut buf = Vec::new();
        write_report(&mut buf, &aggs, ReportFormat::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "band,n,precision,recall,f1,scot,prompt,model,failures,range_of_interest");
        assert_eq!(lines[1], "1-100,3,81.23,70.0,75.0,false,few-shot,llama-3.1-8b,1,false");
        let back = parse_report(&text, ReportFormat::Csv).unwrap();
        assert_eq!(back, vec![aggs[0].rounded()]);
    }

    #[test]
    fn json_round_trip() {
        let aggs = vec![agg("1-100", false, 0.75), agg("101-200", true, 0.5)];
        let mut buf = Vec::new();
        write_report(&mut buf, &aggs, ReportFormat::Json).unwrap();
        let back = parse_report(std::str::from_utf8(&buf).unwrap(), ReportFormat::Json).unwrap();
        assert_eq!(back, aggs.iter().map(BandAggregate::rounded).collect::<Vec<_>>());
    }

    #[test]
    fn scot_pairs_line_up() {
        let aggs = vec![agg("1-100", false, 0.75), agg("101-200", false, 0.6), agg("1-100", true, 0.8)];
        let pairs = scot_comparison(&aggs);
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].with_scot.as_ref().unwrap().mean_f1, 0.8);
        assert!(pairs[1].with_scot.is_none());
        let mut buf = Vec::new();
        write_scot_comparison(&mut buf, &pairs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "1-100,llama-3.1-8b,few-shot,3,81.23,70.00,75.00,3,81.23,70.00,80.00");
        assert!(text.lines().nth(2).unwrap().ends_with(",,,,"));
    }
}
