//! Numeric knobs and ablation switches shared by completion, repair and the
//! synthesis loop.

use core::fmt;

/// How a join's key pair is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JoinScoring {
    /// High when a declared foreign key links the two columns.
    #[default]
    ForeignKey,
    /// Share of distinct values the two columns have in common.
    ContentOverlap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Sketches taken from the parser.
    pub top_sketches: usize,
    /// Rewrites allowed per sketch.
    pub max_repairs: usize,
    /// Queries returned.
    pub results: usize,
    /// A completion is accepted when its score exceeds this.
    pub accept_threshold: f64,
    /// A subterm is faulty when its best completion scores below this.
    pub fault_threshold: f64,
    /// Score of a predicate with no witness in the data is `pred_epsilon`.
    pub pred_epsilon: f64,
    /// Score of a join on columns not linked by a foreign key.
    pub join_epsilon: f64,
    /// Minimum similarity between a hint word and an aggregate keyword.
    pub func_threshold: f64,
    /// Similarity assigned to a hole without a hint.
    pub neutral_score: f64,
    /// Partial completions below this are abandoned.
    pub prune_threshold: f64,
    /// Maximum candidates kept per hole.
    pub candidate_cap: usize,
    /// Maximum candidates kept per composite subterm.
    pub subterm_cap: usize,
    /// Discount applied to the owning table's name when scoring a column.
    pub table_context: Option<f64>,
    pub join_scoring: JoinScoring,
    pub no_data: bool,
    pub no_type: bool,
    pub no_repair: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            top_sketches: 5,
            max_repairs: 5,
            results: 5,
            accept_threshold: 0.35,
            fault_threshold: 0.45,
            pred_epsilon: 1e-3,
            join_epsilon: 0.1,
            func_threshold: 0.6,
            neutral_score: 0.5,
            prune_threshold: 0.2,
            candidate_cap: 50,
            subterm_cap: 2000,
            table_context: Some(0.9),
            join_scoring: JoinScoring::ForeignKey,
            no_data: false,
            no_type: false,
            no_repair: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub &'static str);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

impl core::error::Error for ConfigError {}

fn open_unit(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

impl Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.top_sketches == 0 || self.max_repairs == 0 || self.results == 0 {
            return Err(ConfigError("top sketches, repairs and results must be at least 1"));
        }
        if !open_unit(self.accept_threshold) || !open_unit(self.fault_threshold) {
            return Err(ConfigError("thresholds must lie strictly between 0 and 1"));
        }
        if !(self.prune_threshold > 0.0 && self.prune_threshold < self.fault_threshold) {
            return Err(ConfigError(
                "prune threshold must be positive and below the fault threshold",
            ));
        }
        if !open_unit(self.pred_epsilon) || !open_unit(self.join_epsilon) {
            return Err(ConfigError("epsilons must lie strictly between 0 and 1"));
        }
        if !(0.0..=1.0).contains(&self.func_threshold) || !(0.0..=1.0).contains(&self.neutral_score) {
            return Err(ConfigError("similarity thresholds must lie in [0, 1]"));
        }
        if self.candidate_cap == 0 || self.subterm_cap == 0 {
            return Err(ConfigError("candidate caps must be at least 1"));
        }
        Ok(())
    }
}
