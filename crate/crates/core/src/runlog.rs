//! JSON-Lines run log.
//!
//! The first line is a header record, every following line one candidate in
//! seq order. Floating point numbers are written with 17 significant digits
//! so that reading a log back reproduces every value bit for bit.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::search::{PipelineCandidate, RunSnapshot, RunStatus, SearchConfig};
use crate::search_space::{
    space_from_json, space_hash, space_to_json, validate_space, HyperparameterKind, SearchSpace,
    Value,
};

/// JSON formatter writing every `f64` as `d.dddddddddddddddde±x`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SigDigitsFormatter;

impl serde_json::ser::Formatter for SigDigitsFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Compact single-line JSON with 17-significant-digit floats.
pub fn to_json_line<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigitsFormatter);
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub run_id: String,
    pub seed: u64,
    pub space_hash: String,
    pub config: SearchConfig,
    /// Full space document so a log is self-describing.
    pub space: Json,
}

impl RunHeader {
    pub fn new(run_id: &str, space: &SearchSpace, config: &SearchConfig) -> Self {
        Self {
            run_id: run_id.to_string(),
            seed: config.seed,
            space_hash: space_hash(space),
            config: *config,
            space: space_to_json(space),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LogError {
    #[error("run log is empty")]
    Empty,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("header space_hash {declared} does not match embedded space ({actual})")]
    SpaceMismatch { declared: String, actual: String },
    #[error("line {line}: expected seq {expected}, found {found}")]
    Sequence {
        line: usize,
        expected: u64,
        found: u64,
    },
}

/// Appends records to a log. One writer per run.
pub struct RunLogWriter<W: Write> {
    out: W,
    written: u64,
}

impl<W: Write> RunLogWriter<W> {
    pub fn new(mut out: W, header: &RunHeader) -> io::Result<Self> {
        writeln!(out, "{}", to_json_line(header))?;
        out.flush()?;
        Ok(Self { out, written: 0 })
    }

    /// Continues a log that already holds `written` complete records.
    pub fn resume(out: W, written: u64) -> Self {
        Self { out, written }
    }

    pub fn append(&mut self, candidate: &PipelineCandidate) -> io::Result<()> {
        writeln!(self.out, "{}", to_json_line(candidate))?;
        self.out.flush()?;
        self.written += 1;
        Ok(())
    }

    pub fn written(&self) -> u64 {
        self.written
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Full log text of a snapshot.
pub fn write_run_log(snapshot: &RunSnapshot) -> String {
    let header = RunHeader::new(&snapshot.run_id, &snapshot.space, &snapshot.config);
    let mut out = to_json_line(&header);
    out.push('\n');
    for c in &snapshot.candidates {
        out.push_str(&to_json_line(c));
        out.push('\n');
    }
    out
}

/// Parses a log back into a snapshot.
///
/// A final line without a terminating newline that fails to parse is treated
/// as a torn write and ignored. The status is `Completed` once the log holds
/// `n_structure + n_refine` candidates.
pub fn read_run_log(text: &str) -> Result<RunSnapshot, LogError> {
    let torn_tail = !text.is_empty() && !text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    let Some(first) = lines.first().filter(|l| !l.trim().is_empty()) else {
        return Err(LogError::Empty);
    };
    let header: RunHeader = serde_json::from_str(first).map_err(|e| LogError::Malformed {
        line: 1,
        message: format!("bad header: {e}"),
    })?;
    let space = space_from_json(&header.space).map_err(|e| LogError::Malformed {
        line: 1,
        message: e.to_string(),
    })?;
    if let Some(v) = validate_space(&space).first() {
        return Err(LogError::Malformed {
            line: 1,
            message: format!("invalid space: {v}"),
        });
    }
    let actual = space_hash(&space);
    if actual != header.space_hash {
        return Err(LogError::SpaceMismatch {
            declared: header.space_hash,
            actual,
        });
    }
    if header.config.validate().is_err() {
        return Err(LogError::Malformed {
            line: 1,
            message: "invalid search config".into(),
        });
    }

    let mut candidates = Vec::with_capacity(lines.len().saturating_sub(1));
    for (i, line) in lines.iter().enumerate().skip(1) {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = parse_candidate(line, &space, lineno);
        let candidate = match parsed {
            Ok(c) => c,
            Err(_) if torn_tail && i + 1 == lines.len() => break,
            Err(e) => return Err(e),
        };
        let expected = candidates.len() as u64 + 1;
        if candidate.seq != expected {
            return Err(LogError::Sequence {
                line: lineno,
                expected,
                found: candidate.seq,
            });
        }
        candidates.push(candidate);
    }
    let status = if candidates.len() >= header.config.total() {
        RunStatus::Completed
    } else {
        RunStatus::Running
    };
    Ok(RunSnapshot {
        run_id: header.run_id,
        space,
        config: header.config,
        candidates,
        status,
    })
}

pub fn read_run_log_file(path: &Path) -> io::Result<Result<RunSnapshot, LogError>> {
    Ok(read_run_log(&std::fs::read_to_string(path)?))
}

fn parse_candidate(
    line: &str,
    space: &SearchSpace,
    lineno: usize,
) -> Result<PipelineCandidate, LogError> {
    let malformed = |message: String| LogError::Malformed {
        line: lineno,
        message,
    };
    let mut candidate: PipelineCandidate =
        serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
    if candidate.id != PipelineCandidate::id_for(candidate.seq) {
        return Err(malformed(format!(
            "id {} does not match seq {}",
            candidate.id, candidate.seq
        )));
    }
    // Whole-number reals are read back as integers; restore the declared kind.
    for (slot, values) in candidate.assignment.iter_mut() {
        let component = space
            .slot(slot)
            .zip(candidate.structure.get(slot))
            .and_then(|(s, c)| s.component(c));
        let Some(component) = component else { continue };
        for (name, value) in values.iter_mut() {
            if let (Some(hp), Value::Int(i)) = (component.hyperparameter(name), &*value) {
                if matches!(hp.kind, HyperparameterKind::Real { .. }) {
                    *value = Value::Real(*i as f64);
                }
            }
        }
    }
    space
        .resolve(&candidate.configuration())
        .map_err(|e| malformed(e.to_string()))?;
    if !candidate.metrics.within_bounds() {
        return Err(malformed("metrics out of bounds".into()));
    }
    Ok(candidate)
}
