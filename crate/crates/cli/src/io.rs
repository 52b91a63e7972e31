use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use noisy_metrology::sweep::{SweepMethod, SweepRecord, SweepSpec};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "jsonl" | "json" => Some(Format::Jsonl),
            _ => None,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    n: usize,
    method: SweepMethod,
    t: Option<f64>,
    qfi_per_time: Option<f64>,
    precision: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

impl From<&SweepRecord> for Row {
    fn from(r: &SweepRecord) -> Self {
        Row { n: r.n, method: r.method, t: r.t, qfi_per_time: r.qfi_per_time, precision: r.precision, error: r.error.clone() }
    }
}

impl From<Row> for SweepRecord {
    fn from(r: Row) -> Self {
        SweepRecord {
            n: r.n,
            method: r.method,
            t: r.t,
            qfi_per_time: r.qfi_per_time,
            precision: r.precision,
            wall_time: 0.0,
            error: r.error,
        }
    }
}

fn units_comment(spec: &SweepSpec) -> String {
    let [ax, ay, az] = spec.alphas;
    format!(
        "# omega-relative units: omega={} gamma={} alphas={ax},{ay},{az}; t in 1/omega, qfi_per_time in 1/omega, precision in omega^(1/2)",
        spec.omega, spec.gamma
    )
}

/// Writes CSV (`n,method,t,qfi_per_time,precision` after a units comment) or JSON lines.
pub fn write_records(records: &[SweepRecord], spec: &SweepSpec, format: Format, out: Option<&Path>) -> io::Result<()> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    match format {
        Format::Csv => {
            writeln!(sink, "{}", units_comment(spec))?;
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(["n", "method", "t", "qfi_per_time", "precision"])?;
            for r in records {
                let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                w.write_record([r.n.to_string(), r.method.to_string(), cell(r.t), cell(r.qfi_per_time), cell(r.precision)])?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            for r in records {
                serde_json::to_writer(&mut sink, &Row::from(r))?;
                writeln!(sink)?;
            }
            sink.flush()?;
        }
    }
    Ok(())
}

pub fn read_records(path: &Path, format: Format) -> io::Result<Vec<SweepRecord>> {
    let file = File::open(path)?;
    let invalid = |e: String| io::Error::new(io::ErrorKind::InvalidData, e);
    match format {
        Format::Csv => {
            let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
            reader
                .deserialize::<Row>()
                .map(|row| row.map(SweepRecord::from).map_err(|e| invalid(e.to_string())))
                .collect()
        }
        Format::Jsonl => BufReader::new(file)
            .lines()
            .filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
            .map(|line| {
                let row: Row = serde_json::from_str(&line?).map_err(|e| invalid(e.to_string()))?;
                Ok(row.into())
            })
            .collect(),
    }
}
