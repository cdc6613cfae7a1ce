//! Rendering of synthesis results.

use serde::Serialize;
use sketchql_core::engine::{RepairStep, SynthesisResult};

#[derive(Debug, Serialize)]
struct TraceRecord<'a> {
    iteration: usize,
    fault_path: String,
    tactic: &'static str,
    sketch_before: &'a str,
    sketch_after: &'a str,
    best_score_before: f64,
}

#[derive(Debug, Serialize)]
struct ResultLine<'a> {
    rank: usize,
    sql: &'a str,
    score: f64,
    sketch: &'a str,
    repairs: Vec<TraceRecord<'a>>,
}

fn trace(step: &RepairStep) -> TraceRecord<'_> {
    TraceRecord {
        iteration: step.iteration,
        fault_path: step.fault_path.to_string(),
        tactic: step.tactic.name(),
        sketch_before: &step.sketch_before,
        sketch_after: &step.sketch_after,
        best_score_before: step.best_score_before,
    }
}

/// One JSON object per ranked query, newline-terminated.
pub fn json_lines(result: &SynthesisResult) -> String {
    let mut out = String::new();
    for (i, q) in result.queries.iter().enumerate() {
        let line = ResultLine {
            rank: i + 1,
            sql: &q.sql,
            score: q.score,
            sketch: &q.sketch,
            repairs: q.repairs.iter().map(trace).collect(),
        };
        out.push_str(&serde_json::to_string(&line).expect("result lines serialize"));
        out.push('\n');
    }
    out
}

/// A plain table: rank, score, repair count and SQL.
pub fn table(result: &SynthesisResult) -> String {
    let mut out = String::from("rank  score   repairs  sql\n");
    for (i, q) in result.queries.iter().enumerate() {
        out.push_str(&format!(
            "{:<5} {:.4}  {:<7}  {}\n",
            i + 1,
            q.score,
            q.repairs.len(),
            q.sql
        ));
    }
    out
}
