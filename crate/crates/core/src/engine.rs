//! The synthesis loop: complete each candidate sketch, repairing it while
//! no completion is plausible, then rank the accepted queries globally.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::algebra::{emit_sql, QueryTerm};
use crate::catalog::Catalog;
use crate::completion::{Completer, ScoredCandidate};
use crate::config::Config;
use crate::nlparser::{fallback_sketch, parse, ParserModel, Utterance};
use crate::repair::{apply_repair, fault_localize, Lineage, Tactic};
use crate::similarity::SimilarityProvider;
use crate::sketch::{print_sketch, SketchPath, SketchRel};

/// One applied rewrite.
#[derive(Debug, Clone, PartialEq)]
pub struct RepairStep {
    pub iteration: usize,
    pub fault_path: SketchPath,
    pub tactic: Tactic,
    pub sketch_before: String,
    pub sketch_after: String,
    pub best_score_before: f64,
}

/// One pass of complete-then-check over a sketch.
#[derive(Debug, Clone, PartialEq)]
pub struct Iteration {
    pub index: usize,
    pub sketch: String,
    /// Best completion score; `None` when nothing reached the pruning
    /// threshold.
    pub best_score: Option<f64>,
    pub candidates: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Some completion scored above the acceptance threshold.
    Accepted,
    /// Nothing plausible and no repairable fault.
    NoFault,
    /// The rewrite budget ran out.
    RepairLimit,
    /// Repairs are disabled.
    RepairDisabled,
}

/// Everything that happened to one input sketch.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchRun {
    pub input: SketchRel,
    pub final_sketch: SketchRel,
    pub iterations: Vec<Iteration>,
    pub repairs: Vec<RepairStep>,
    pub accepted: Vec<ScoredCandidate>,
    pub outcome: Outcome,
    pub notes: Vec<String>,
}

/// A ranked output query.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedQuery {
    pub sql: String,
    pub score: f64,
    pub query: QueryTerm,
    pub factors: Vec<f64>,
    /// The sketch (after repairs) this query completes.
    pub sketch: String,
    pub repairs: Vec<RepairStep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub queries: Vec<RankedQuery>,
    pub runs: Vec<SketchRun>,
    pub accept_threshold: f64,
    pub prune_threshold: f64,
}

/// What to synthesize from.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Utterance(String),
    Sketches(Vec<SketchRel>),
}

/// The sketches an input stands for: parsed from an utterance (falling
/// back to a single table hole hinted by the whole utterance), or given.
pub fn input_sketches(input: &Input, model: &ParserModel, cfg: &Config) -> Vec<SketchRel> {
    match input {
        Input::Sketches(s) => s.clone(),
        Input::Utterance(text) => {
            let parsed = parse(&Utterance::new(text), model, cfg.top_sketches);
            if parsed.is_empty() {
                log::info!("no derivation for utterance; using the fallback sketch");
                alloc::vec![fallback_sketch(text)]
            } else {
                parsed.into_iter().map(|(s, _)| s).collect()
            }
        }
    }
}

/// Runs the repair loop on one sketch: at most `max_repairs` rewrites and
/// one more completion than that.
pub fn run_sketch(sketch: &SketchRel, catalog: &Catalog, sim: &SimilarityProvider, cfg: &Config) -> SketchRun {
    let completer = Completer::new(catalog, sim, cfg);
    let mut current = sketch.clone();
    let mut lineage = Lineage::new();
    let mut run = SketchRun {
        input: sketch.clone(),
        final_sketch: sketch.clone(),
        iterations: Vec::new(),
        repairs: Vec::new(),
        accepted: Vec::new(),
        outcome: Outcome::NoFault,
        notes: Vec::new(),
    };
    for index in 1..=cfg.max_repairs + 1 {
        let candidates = completer.instantiate_rel(&current);
        let best = candidates.first().map(|c| c.score);
        let text = print_sketch(&current);
        log::debug!("iteration {}: {} best {:?}", index, text, best);
        run.iterations.push(Iteration {
            index,
            sketch: text.clone(),
            best_score: best,
            candidates: candidates.len(),
        });
        if best.is_some_and(|b| b > cfg.accept_threshold) {
            run.accepted = candidates
                .into_iter()
                .filter(|c| c.score > cfg.accept_threshold)
                .collect();
            run.outcome = Outcome::Accepted;
            break;
        }
        if cfg.no_repair {
            run.outcome = Outcome::RepairDisabled;
            break;
        }
        if index > cfg.max_repairs {
            run.outcome = Outcome::RepairLimit;
            break;
        }
        let Some(fault) = fault_localize(&current, &completer, &lineage) else {
            run.outcome = Outcome::NoFault;
            break;
        };
        let repaired = match apply_repair(&current, &fault.path, &mut lineage, sim, cfg) {
            Ok(r) => r,
            Err(e) => {
                run.notes.push(format!("repair at {} failed: {}", fault.path, e));
                run.outcome = Outcome::NoFault;
                break;
            }
        };
        run.repairs.push(RepairStep {
            iteration: index,
            fault_path: fault.path.clone(),
            tactic: repaired.tactic,
            sketch_before: text,
            sketch_after: print_sketch(&repaired.sketch),
            best_score_before: best.unwrap_or(0.0),
        });
        current = repaired.sketch;
    }
    run.final_sketch = current;
    run.notes.extend(completer.notes());
    run
}

/// Merges accepted candidates from every run: identical SQL keeps its best
/// score, then everything is ranked and cut to `results`.
pub fn assemble(runs: Vec<SketchRun>, cfg: &Config) -> SynthesisResult {
    let mut best: BTreeMap<String, RankedQuery> = BTreeMap::new();
    for run in &runs {
        let sketch = print_sketch(&run.final_sketch);
        for c in &run.accepted {
            let Some(q) = c.query() else {
                continue;
            };
            let sql = emit_sql(q);
            let replace = best.get(&sql).is_none_or(|prev| c.score > prev.score);
            if replace {
                best.insert(
                    sql.clone(),
                    RankedQuery {
                        sql,
                        score: c.score,
                        query: q.clone(),
                        factors: c.factors.clone(),
                        sketch: sketch.clone(),
                        repairs: run.repairs.clone(),
                    },
                );
            }
        }
    }
    let mut queries: Vec<RankedQuery> = best.into_values().collect();
    queries.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.sql.len().cmp(&b.sql.len()))
            .then_with(|| a.sql.cmp(&b.sql))
    });
    queries.truncate(cfg.results);
    SynthesisResult {
        queries,
        runs,
        accept_threshold: cfg.accept_threshold,
        prune_threshold: cfg.prune_threshold,
    }
}

/// Parses (if needed), runs every sketch in order and ranks the results.
pub fn synthesize(
    input: &Input,
    catalog: &Catalog,
    sim: &SimilarityProvider,
    model: &ParserModel,
    cfg: &Config,
) -> SynthesisResult {
    let runs = input_sketches(input, model, cfg)
        .iter()
        .map(|s| run_sketch(s, catalog, sim, cfg))
        .collect();
    assemble(runs, cfg)
}

fn score_text(score: Option<f64>, floor: f64) -> String {
    match score {
        Some(s) => format!("{:.4}", s),
        None => format!("below {}", floor),
    }
}

/// Human-readable account of each sketch's iterations, repairs and the
/// final ranking with score factors.
pub fn explain(result: &SynthesisResult) -> String {
    let mut out = String::new();
    for (i, run) in result.runs.iter().enumerate() {
        let _ = writeln!(out, "sketch {}: {}", i + 1, print_sketch(&run.input));
        for it in &run.iterations {
            let _ = writeln!(
                out,
                "  iteration {}: best {} over {} completions",
                it.index,
                score_text(it.best_score, result.prune_threshold),
                it.candidates
            );
            let _ = writeln!(out, "    {}", it.sketch);
            if let Some(step) = run.repairs.iter().find(|r| r.iteration == it.index) {
                let _ = writeln!(out, "    fault at {}, applied {}", step.fault_path, step.tactic);
            }
        }
        let outcome = match run.outcome {
            Outcome::Accepted => format!(
                "accepted {} completions above {}",
                run.accepted.len(),
                result.accept_threshold
            ),
            Outcome::NoFault => "stopped: no repairable fault".to_string(),
            Outcome::RepairLimit => "stopped: repair limit reached".to_string(),
            Outcome::RepairDisabled => "stopped: repairs disabled".to_string(),
        };
        let _ = writeln!(out, "  {}", outcome);
        for note in &run.notes {
            let _ = writeln!(out, "  note: {}", note);
        }
    }
    if result.queries.is_empty() {
        let _ = writeln!(out, "no candidate exceeded {}", result.accept_threshold);
        return out;
    }
    let _ = writeln!(out, "results:");
    for (rank, q) in result.queries.iter().enumerate() {
        let _ = writeln!(out, "  {}. {:.4}  {}", rank + 1, q.score, q.sql);
        let factors: Vec<String> = q.factors.iter().map(|f| format!("{:.4}", f)).collect();
        let _ = writeln!(out, "     factors: [{}]", factors.join(", "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::test_support::{grades_catalog, mas_catalog};
    use crate::sketch::parse_sketch;

    #[test]
    fn immediate_acceptance_records_no_repairs() {
        let catalog = grades_catalog();
        let sim = SimilarityProvider::lexical();
        let cfg = Config::default();
        let sketch = parse_sketch("SELECT ?[name] FROM ??[Grades] WHERE ?[score] > 85").unwrap();
        let run = run_sketch(&sketch, &catalog, &sim, &cfg);
        assert_eq!(run.outcome, Outcome::Accepted);
        assert!(run.repairs.is_empty());
        assert_eq!(run.iterations.len(), 1);
        let result = assemble(alloc::vec![run], &cfg);
        assert!(!result.queries.is_empty());
        assert!(result.queries.iter().all(|q| q.score > cfg.accept_threshold));
        assert!(explain(&result).contains("iteration 1"));
    }

    #[test]
    fn empty_catalog_gives_empty_result() {
        let catalog = Catalog::builder().build().unwrap();
        let sim = SimilarityProvider::lexical();
        let cfg = Config::default();
        let result = synthesize(
            &Input::Sketches(alloc::vec![parse_sketch("SELECT ? FROM ??").unwrap()]),
            &catalog,
            &sim,
            &ParserModel::new(),
            &cfg,
        );
        assert!(result.queries.is_empty());
        assert!(explain(&result).contains("no candidate exceeded"));
    }

    #[test]
    fn motivating_sketch_repairs_twice() {
        let catalog = mas_catalog();
        let sim = SimilarityProvider::lexical();
        let cfg = Config::default();
        let sketch = parse_sketch(r#"SELECT count(?[papers]) FROM ??[papers] WHERE ? = "VLDB 2010""#).unwrap();
        let run = run_sketch(&sketch, &catalog, &sim, &cfg);
        let tactics: Vec<Tactic> = run.repairs.iter().map(|r| r.tactic).collect();
        assert_eq!(tactics, [Tactic::AddPred, Tactic::AddJoin1]);
        assert_eq!(run.outcome, Outcome::Accepted);
        assert_eq!(run.iterations.len(), 3);
    }

    #[test]
    fn no_repair_stops_after_first_completion() {
        let catalog = mas_catalog();
        let sim = SimilarityProvider::lexical();
        let cfg = Config {
            no_repair: true,
            ..Config::default()
        };
        let sketch = parse_sketch(r#"SELECT count(?[papers]) FROM ??[papers] WHERE ? = "VLDB 2010""#).unwrap();
        let run = run_sketch(&sketch, &catalog, &sim, &cfg);
        assert_eq!(run.outcome, Outcome::RepairDisabled);
        assert!(run.repairs.is_empty());
    }

    #[test]
    fn utterance_without_derivation_falls_back() {
        let cfg = Config::default();
        let sketches = input_sketches(&Input::Utterance("papers".into()), &ParserModel::new(), &cfg);
        assert_eq!(sketches.len(), 1);
        assert_eq!(print_sketch(&sketches[0]), "SELECT ? FROM ??[papers]");
    }
}
