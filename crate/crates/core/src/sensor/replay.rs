//! Recording and replay of score samples, one JSON record per line:
//! `{"step": 12, "scores": [0.21, 0.24]}`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{ScoreSample, ScoreSource, ViewRequest};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    pub scores: Vec<f64>,
}

/// Appends samples to a trace.
pub struct TraceWriter<W> {
    out: W,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn record(&mut self, step: u64, sample: &ScoreSample) -> Result<()> {
        let rec = TraceRecord {
            step,
            scores: sample.scores.clone(),
        };
        let line = serde_json::to_string(&rec).map_err(|e| Error::Config(e.to_string()))?;
        writeln!(self.out, "{line}")?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Parses a whole trace. Blank lines are skipped; line numbers are 1-based.
pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<TraceRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TraceRecord = serde_json::from_str(&line).map_err(|e| Error::TraceParse {
            line: i + 1,
            message: e.to_string(),
        })?;
        ScoreSample::new(rec.scores.clone()).map_err(|e| Error::TraceParse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Replays recorded samples in order, ignoring the view.
#[derive(Debug, Clone)]
pub struct ReplaySource {
    records: Vec<TraceRecord>,
    cursor: usize,
}

impl ReplaySource {
    pub fn new(records: Vec<TraceRecord>) -> Self {
        Self { records, cursor: 0 }
    }

    pub fn from_reader<R: BufRead>(input: R) -> Result<Self> {
        read_trace(input).map(Self::new)
    }

    pub fn remaining(&self) -> usize {
        self.records.len() - self.cursor
    }

    pub fn next_sample(&mut self) -> Result<ScoreSample> {
        let rec = self
            .records
            .get(self.cursor)
            .ok_or(Error::TraceExhausted(self.records.len()))?;
        self.cursor += 1;
        Ok(ScoreSample {
            scores: rec.scores.clone(),
        })
    }
}

impl ScoreSource for ReplaySource {
    fn sample(&mut self, _view: &ViewRequest<'_>) -> Result<ScoreSample> {
        self.next_sample()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_records_then_exhaustion() {
        let text = "{\"step\":0,\"scores\":[0.1,0.2]}\n{\"step\":1,\"scores\":[0.3,0.4]}\n\n{\"step\":2,\"scores\":[0.5,0.6]}\n";
        let mut src = ReplaySource::from_reader(text.as_bytes()).unwrap();
        assert_eq!(src.remaining(), 3);
        assert_eq!(src.next_sample().unwrap().scores, vec![0.1, 0.2]);
        src.next_sample().unwrap();
        assert_eq!(src.next_sample().unwrap().scores, vec![0.5, 0.6]);
        assert!(matches!(src.next_sample(), Err(Error::TraceExhausted(3))));
    }

    #[test]
    fn record_then_replay_is_identity() {
        let samples = [
            ScoreSample::new(vec![0.123456789012345, -0.5]).unwrap(),
            ScoreSample::new(vec![1.0 / 3.0, 2.0 / 3.0, -1.0]).unwrap(),
        ];
        let mut w = TraceWriter::new(Vec::new());
        for (i, s) in samples.iter().enumerate() {
            w.record(i as u64, s).unwrap();
        }
        let bytes = w.into_inner();
        let mut src = ReplaySource::from_reader(bytes.as_slice()).unwrap();
        for s in &samples {
            assert_eq!(&src.next_sample().unwrap(), s);
        }
    }

    #[test]
    fn corrupted_line_is_named() {
        let text = "{\"step\":0,\"scores\":[0.1]}\n{\"step\":1,\"scores\":[0.3,\n{\"step\":2,\"scores\":[0.5]}\n";
        match ReplaySource::from_reader(text.as_bytes()) {
            Err(Error::TraceParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        let out_of_range = "{\"step\":0,\"scores\":[1.2]}\n";
        assert!(matches!(
            read_trace(out_of_range.as_bytes()),
            Err(Error::TraceParse { line: 1, .. })
        ));
    }
}
