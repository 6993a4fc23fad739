//! Trial summaries: time, iteration, and objective statistics, reported raw
//! and in dB (optionally normalized by the objective at initialization).

use std::io::Write;

use cmcqp::{IterationTrace, TraceRow};

pub const SUMMARY_HEADER: &str = "solver,n,trials,mean_time_s,mean_iters,min_db,max_db,mean_db";

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub solver: String,
    pub n: usize,
    pub trials: usize,
    pub mean_time_s: f64,
    pub mean_iters: f64,
    pub min_obj: f64,
    pub max_obj: f64,
    pub mean_obj: f64,
    pub min_db: f64,
    pub max_db: f64,
    pub mean_db: f64,
    /// dB values are of `final / initial` instead of the raw final value.
    pub normalized: bool,
}

fn db_of(v: f64) -> f64 {
    10.0 * v.max(f64::MIN_POSITIVE).log10()
}

impl TrialSummary {
    pub fn from_traces(
        solver: &str,
        n: usize,
        traces: &[IterationTrace],
        normalized: bool,
    ) -> Self {
        let finals: Vec<(f64, f64, usize, u64)> = traces
            .iter()
            .map(|t| {
                (
                    t.final_objective(),
                    t.initial_objective(),
                    t.iterations(),
                    t.elapsed_ns(),
                )
            })
            .collect();
        Self::from_finals(solver, n, &finals, normalized)
    }

    /// Same aggregation over persisted rows (header row included).
    pub fn from_trace_rows(
        solver: &str,
        n: usize,
        rows_per_trial: &[Vec<TraceRow>],
        normalized: bool,
    ) -> Self {
        let finals: Vec<(f64, f64, usize, u64)> = rows_per_trial
            .iter()
            .map(|rows| {
                let first = rows.first().expect("trace has at least the initial row");
                let last = rows.last().unwrap();
                (
                    last.objective,
                    first.objective,
                    rows.len() - 1,
                    last.elapsed_ns,
                )
            })
            .collect();
        Self::from_finals(solver, n, &finals, normalized)
    }

    fn from_finals(
        solver: &str,
        n: usize,
        finals: &[(f64, f64, usize, u64)],
        normalized: bool,
    ) -> Self {
        assert!(!finals.is_empty());
        let count = finals.len() as f64;
        let value = |(f, f0, _, _): &(f64, f64, usize, u64)| -> f64 {
            if normalized {
                f / f0.abs().max(f64::MIN_POSITIVE)
            } else {
                *f
            }
        };
        let mut min_obj = f64::INFINITY;
        let mut max_obj = f64::NEG_INFINITY;
        let mut sum_obj = 0.0;
        let mut sum_iters = 0.0;
        let mut sum_ns = 0.0;
        for rec in finals {
            let v = value(rec);
            min_obj = min_obj.min(v);
            max_obj = max_obj.max(v);
            sum_obj += v;
            sum_iters += rec.2 as f64;
            sum_ns += rec.3 as f64;
        }
        let mean_obj = sum_obj / count;
        TrialSummary {
            solver: solver.to_string(),
            n,
            trials: finals.len(),
            mean_time_s: sum_ns / count / 1e9,
            mean_iters: sum_iters / count,
            min_obj,
            max_obj,
            mean_obj,
            min_db: db_of(min_obj),
            max_db: db_of(max_obj),
            mean_db: db_of(mean_obj),
            normalized,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.solver,
            self.n,
            self.trials,
            self.mean_time_s,
            self.mean_iters,
            self.min_db,
            self.max_db,
            self.mean_db
        )
    }
}

/// Aligned text table over a batch of summaries.
pub fn format_table(rows: &[TrialSummary]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<10} {:>6} {:>7} {:>12} {:>11} {:>10} {:>10} {:>10}\n",
        "solver", "n", "trials", "mean_time_s", "mean_iters", "min_db", "max_db", "mean_db"
    ));
    for s in rows {
        out.push_str(&format!(
            "{:<10} {:>6} {:>7} {:>12.6} {:>11.1} {:>10.4} {:>10.4} {:>10.4}\n",
            s.solver, s.n, s.trials, s.mean_time_s, s.mean_iters, s.min_db, s.max_db, s.mean_db
        ));
    }
    out
}

pub fn write_summary_csv<W: Write>(out: &mut W, rows: &[TrialSummary]) -> std::io::Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for s in rows {
        writeln!(out, "{}", s.csv_row())?;
    }
    Ok(())
}
