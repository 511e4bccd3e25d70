//! JSON and CSV reports, and per-session transcripts as JSON lines.

use super::{run_trial_session, ExperimentReport, ExperimentSpec, HarnessError};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub const CSV_HEADER: [&str; 10] = [
    "trial",
    "escaped",
    "detection_rate",
    "bits_learned",
    "err_case1",
    "err_case2",
    "err_case3",
    "err_case4",
    "secret_len",
    "agree",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_err(path: &Path, e: impl ToString) -> HarnessError {
    HarnessError::Write {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Serializes a report as pretty JSON.
pub fn report_json(report: &ExperimentReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report is serializable");
    s.push('\n');
    s
}

/// Serializes the per-trial rows as CSV.
pub fn report_csv(report: &ExperimentReport) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in &report.trials {
        let mut fields = vec![
            r.trial.to_string(),
            r.escaped.to_string(),
            r.detection_rate.to_string(),
            r.bits_learned.to_string(),
        ];
        fields.extend(r.err_case.iter().map(f64::to_string));
        fields.push(r.secret_len.to_string());
        fields.push(r.agree.to_string());
        w.write_record(&fields).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn emit_report(
    report: &ExperimentReport,
    format: ReportFormat,
    path: &Path,
) -> Result<(), HarnessError> {
    let bytes = match format {
        ReportFormat::Json => report_json(report).into_bytes(),
        ReportFormat::Csv => report_csv(report),
    };
    std::fs::write(path, bytes).map_err(io_err(path))
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum TranscriptLine<'a> {
    Public {
        event: &'a crate::protocol::PublicEvent,
    },
    Round {
        record: &'a crate::protocol::RoundRecord,
    },
}

/// Reruns one trial and writes its public events followed by its round
/// records, one JSON object per line.
pub fn write_transcript(
    spec: &ExperimentSpec,
    trial: usize,
    path: &Path,
) -> Result<(), HarnessError> {
    let result = run_trial_session(spec, trial)?;
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let lines = result
        .transcript
        .iter()
        .map(|event| TranscriptLine::Public { event })
        .chain(
            result
                .records
                .iter()
                .map(|record| TranscriptLine::Round { record }),
        );
    for line in lines {
        serde_json::to_writer(&mut w, &line).map_err(|e| write_err(path, e))?;
        w.write_all(b"\n").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}
