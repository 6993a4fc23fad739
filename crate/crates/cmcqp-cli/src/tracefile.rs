//! CSV persistence for iteration traces.
//!
//! Schema (bit-exact header, one row per iteration):
//! `iter,objective,step_size,step_source,grad_norm,elapsed_ns`.
//! Floats are printed in shortest round-trip form, so a write/read cycle
//! reproduces the numeric columns exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use cmcqp::{IterationTrace, TraceRow, TraceStep};

pub const TRACE_HEADER: &str = "iter,objective,step_size,step_source,grad_norm,elapsed_ns";

pub fn write_trace_csv<W: Write>(out: &mut W, trace: &IterationTrace) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in &trace.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.iter,
            r.objective,
            r.step_size,
            r.step_source.as_str(),
            r.grad_norm,
            r.elapsed_ns
        )?;
    }
    Ok(())
}

pub fn save_trace_csv<P: AsRef<Path>>(path: P, trace: &IterationTrace) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_trace_csv(&mut w, trace)
}

fn bad(line: usize, msg: &str) -> std::io::Error {
    std::io::Error::new(
        std::io::ErrorKind::InvalidData,
        format!("trace csv line {line}: {msg}"),
    )
}

pub fn read_trace_csv<R: BufRead>(input: R) -> std::io::Result<Vec<TraceRow>> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    if header? != TRACE_HEADER {
        return Err(bad(1, "unexpected header"));
    }
    let mut rows = Vec::new();
    for (k, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(bad(k + 1, "expected 6 fields"));
        }
        let parse_f = |s: &str| s.parse::<f64>().map_err(|_| bad(k + 1, "bad float"));
        rows.push(TraceRow {
            iter: fields[0].parse().map_err(|_| bad(k + 1, "bad iter"))?,
            objective: parse_f(fields[1])?,
            step_size: parse_f(fields[2])?,
            step_source: TraceStep::parse(fields[3]).ok_or_else(|| bad(k + 1, "bad source"))?,
            grad_norm: parse_f(fields[4])?,
            elapsed_ns: fields[5].parse().map_err(|_| bad(k + 1, "bad ns"))?,
        });
    }
    Ok(rows)
}

pub fn load_trace_csv<P: AsRef<Path>>(path: P) -> std::io::Result<Vec<TraceRow>> {
    read_trace_csv(BufReader::new(File::open(path)?))
}
