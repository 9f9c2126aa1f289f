//! Accuracy, pairwise efficiency, invalid rate and pattern analysis over sets
//! of transcripts.

mod annotate;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::IteratorRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::{PatternCounts, Transcript};
use crate::task::{Category, Difficulty};
use crate::tasks::rng_for;

pub use annotate::{Annotator, AnnotatorFailure, HeuristicAnnotator, RecordedAnnotator};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no transcripts in {0}")]
    EmptyGroup(String),
    #[error("no instance is solved by both {0} and {1}")]
    NoCommonSolves(String, String),
    #[error("run {model_id} has two transcripts for {instance_id}")]
    DuplicateInstance { model_id: String, instance_id: String },
    #[error(transparent)]
    Annotator(#[from] AnnotatorFailure),
}

/// One player's transcripts, at most one per instance.
#[derive(Debug, Clone, Default)]
pub struct RunResults {
    pub model_id: String,
    transcripts: BTreeMap<String, Transcript>,
}

impl RunResults {
    pub fn new(model_id: impl Into<String>) -> Self {
        Self { model_id: model_id.into(), transcripts: BTreeMap::new() }
    }

    pub fn from_transcripts(
        model_id: impl Into<String>,
        transcripts: impl IntoIterator<Item = Transcript>,
    ) -> Result<Self, MetricsError> {
        let mut run = Self::new(model_id);
        for t in transcripts {
            run.insert(t)?;
        }
        Ok(run)
    }

    pub fn insert(&mut self, transcript: Transcript) -> Result<(), MetricsError> {
        if self.transcripts.contains_key(&transcript.instance_id) {
            return Err(MetricsError::DuplicateInstance {
                model_id: self.model_id.clone(),
                instance_id: transcript.instance_id,
            });
        }
        self.transcripts.insert(transcript.instance_id.clone(), transcript);
        Ok(())
    }

    pub fn get(&self, instance_id: &str) -> Option<&Transcript> {
        self.transcripts.get(instance_id)
    }

    /// Transcripts in instance-id order.
    pub fn iter(&self) -> impl Iterator<Item = &Transcript> {
        self.transcripts.values()
    }

    pub fn len(&self) -> usize {
        self.transcripts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transcripts.is_empty()
    }
}

/// Accuracy per task and difficulty.
pub type AccuracyTable = BTreeMap<String, BTreeMap<Difficulty, f64>>;

fn ratio(num: usize, den: usize) -> f64 {
    num as f64 / den as f64
}

/// Solved fraction of one group of transcripts.
pub fn accuracy_of<'a>(group: impl IntoIterator<Item = &'a Transcript>, label: &str) -> Result<f64, MetricsError> {
    let (mut solved, mut total) = (0, 0);
    for t in group {
        total += 1;
        solved += usize::from(t.is_solved());
    }
    if total == 0 {
        return Err(MetricsError::EmptyGroup(label.to_string()));
    }
    Ok(ratio(solved, total))
}

pub fn accuracy(results: &RunResults) -> Result<AccuracyTable, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::EmptyGroup(results.model_id.clone()));
    }
    let mut counts: BTreeMap<(&str, Difficulty), (usize, usize)> = BTreeMap::new();
    for t in results.iter() {
        let c = counts.entry((&t.task, t.difficulty)).or_default();
        c.0 += usize::from(t.is_solved());
        c.1 += 1;
    }
    let mut table = AccuracyTable::new();
    for ((task, difficulty), (solved, total)) in counts {
        table.entry(task.to_string()).or_default().insert(difficulty, ratio(solved, total));
    }
    Ok(table)
}

/// Turn counts of instances solved in both runs, in instance-id order.
fn common_solves(a: &RunResults, b: &RunResults) -> Vec<(u32, u32)> {
    a.iter()
        .filter_map(|ta| {
            let tb = b.get(&ta.instance_id)?;
            Some((ta.solved_turn?, tb.solved_turn?))
        })
        .collect()
}

fn faster_fraction(pairs: &[(u32, u32)], a: &RunResults, b: &RunResults) -> Result<f64, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::NoCommonSolves(a.model_id.clone(), b.model_id.clone()));
    }
    Ok(ratio(pairs.iter().filter(|(ta, tb)| ta < tb).count(), pairs.len()))
}

/// Fraction of commonly solved instances that `a` finished in strictly
/// fewer turns than `b`.
pub fn efficiency(a: &RunResults, b: &RunResults) -> Result<f64, MetricsError> {
    faster_fraction(&common_solves(a, b), a, b)
}

/// [`efficiency`] over a seeded random sample of at most `sample` common solves.
pub fn efficiency_sampled(a: &RunResults, b: &RunResults, sample: usize, seed: u64) -> Result<f64, MetricsError> {
    let pairs = common_solves(a, b);
    let picked: Vec<(u32, u32)> = pairs.into_iter().choose_multiple(&mut rng_for(seed), sample);
    faster_fraction(&picked, a, b)
}

/// Fraction of conversations containing at least one invalid turn.
pub fn invalid_rate(results: &RunResults) -> Result<f64, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::EmptyGroup(results.model_id.clone()));
    }
    let flagged = results.iter().filter(|t| t.invalid_count() > 0).count();
    Ok(ratio(flagged, results.len()))
}

/// Mean per-turn occurrence count of each reasoning pattern.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "PascalCase")]
pub struct PatternScores {
    pub associate: f64,
    pub verify: f64,
    pub plan: f64,
    pub feedback: f64,
}

pub fn pattern_analysis(results: &RunResults, annotator: &dyn Annotator) -> Result<PatternScores, MetricsError> {
    let mut sum = [0u64; 4];
    let mut turns = 0u64;
    for t in results.iter() {
        for i in 0..t.turns.len() {
            let PatternCounts { associate, verify, plan, feedback } = annotator.annotate(t, i)?;
            for (s, v) in sum.iter_mut().zip([associate, verify, plan, feedback]) {
                *s += u64::from(v);
            }
            turns += 1;
        }
    }
    if turns == 0 {
        return Ok(PatternScores::default());
    }
    let mean = |s: u64| s as f64 / turns as f64;
    Ok(PatternScores {
        associate: mean(sum[0]),
        verify: mean(sum[1]),
        plan: mean(sum[2]),
        feedback: mean(sum[3]),
    })
}

/// Serialized evaluation output. Field order is the JSON key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model_id: String,
    pub accuracy: AccuracyTable,
    /// Keyed `"A,B"`; `null` when the pair has no common solves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub efficiency: Option<BTreeMap<String, Option<f64>>>,
    pub invalid_rate: f64,
    pub pattern_analysis: PatternScores,
}

/// Builds the report for `results`, adding efficiency in both directions
/// when a baseline run is given.
pub fn report(
    results: &RunResults,
    baseline: Option<&RunResults>,
    annotator: &dyn Annotator,
) -> Result<MetricsReport, MetricsError> {
    let efficiency = match baseline {
        None => None,
        Some(b) => {
            let mut pairs = BTreeMap::new();
            for (x, y) in [(results, b), (b, results)] {
                let value = match efficiency(x, y) {
                    Ok(v) => Some(v),
                    Err(MetricsError::NoCommonSolves(..)) => None,
                    Err(e) => return Err(e),
                };
                pairs.insert(format!("{},{}", x.model_id, y.model_id), value);
            }
            Some(pairs)
        }
    };
    Ok(MetricsReport {
        model_id: results.model_id.clone(),
        accuracy: accuracy(results)?,
        efficiency,
        invalid_rate: invalid_rate(results)?,
        pattern_analysis: pattern_analysis(results, annotator)?,
    })
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn cell(value: Option<f64>) -> String {
    value.map_or_else(|| "-".to_string(), |v| format!("{:.2}", v * 100.0))
}

/// Accuracy table with one row per report and `IP DA SO SG AVG` column
/// groups split into E/M/H, in percent. Category cells average their tasks;
/// AVG averages every task at that level.
pub fn render_table(reports: &[MetricsReport], category_of: impl Fn(&str) -> Option<Category>) -> String {
    let width = reports.iter().map(|r| r.model_id.len()).max().unwrap_or(0).max(5);
    let mut out = String::new();
    let groups: Vec<String> = Category::ALL.iter().map(|c| c.to_string()).chain(["AVG".to_string()]).collect();
    let _ = write!(out, "{:width$}", "Model");
    for g in &groups {
        let _ = write!(out, " | {:^20}", g);
    }
    out.push('\n');
    let _ = write!(out, "{:width$}", "");
    for _ in &groups {
        out.push_str(" |");
        for d in Difficulty::ALL {
            let _ = write!(out, " {:>6}", d.short());
        }
    }
    out.push('\n');
    for r in reports {
        let _ = write!(out, "{:width$}", r.model_id);
        let mut columns: Vec<Option<Category>> = Category::ALL.iter().copied().map(Some).collect();
        columns.push(None);
        for group in columns {
            out.push_str(" |");
            for d in Difficulty::ALL {
                let values: Vec<f64> = r
                    .accuracy
                    .iter()
                    .filter(|(task, _)| group.is_none_or(|g| category_of(task) == Some(g)))
                    .filter_map(|(_, by)| by.get(&d).copied())
                    .collect();
                let _ = write!(out, " {:>6}", cell(mean(&values)));
            }
        }
        out.push('\n');
    }
    for r in reports {
        let p = &r.pattern_analysis;
        let _ = writeln!(
            out,
            "{}: IR {:.2}%  PA Associate {:.2} Verify {:.2} Plan {:.2} Feedback {:.2}",
            r.model_id,
            r.invalid_rate * 100.0,
            p.associate,
            p.verify,
            p.plan,
            p.feedback
        );
        for (pair, eff) in r.efficiency.iter().flatten() {
            let _ = writeln!(out, "  Eff[{pair}] {}", cell(*eff));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{Status, Turn};

    fn transcript(id: &str, task: &str, solved_turn: Option<u32>, invalid: usize) -> Transcript {
        let turns = (0..solved_turn.unwrap_or(3) as usize)
            .map(|i| Turn {
                player_message: "x".into(),
                command: None,
                superseded: vec![],
                feedback: String::new(),
                valid: i >= invalid,
                patterns: None,
            })
            .collect();
        Transcript {
            instance_id: id.into(),
            task: task.into(),
            difficulty: Difficulty::Easy,
            seed: 0,
            turns,
            final_status: if solved_turn.is_some() { Status::Solved } else { Status::Failed },
            solved_turn,
            player: BTreeMap::new(),
            failure: None,
        }
    }

    #[test]
    fn spec_efficiency_example() {
        let a = RunResults::from_transcripts("a", [transcript("1", "t", Some(3), 0), transcript("2", "t", Some(5), 0)]).unwrap();
        let b = RunResults::from_transcripts("b", [transcript("1", "t", Some(4), 0), transcript("2", "t", Some(4), 0)]).unwrap();
        assert_eq!(efficiency(&a, &b).unwrap(), 0.5);
        assert_eq!(efficiency(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn duplicate_instance_rejected() {
        let err = RunResults::from_transcripts("a", [transcript("1", "t", None, 0), transcript("1", "t", None, 0)]);
        assert!(matches!(err, Err(MetricsError::DuplicateInstance { .. })));
    }

    #[test]
    fn empty_runs_error() {
        let empty = RunResults::new("e");
        assert!(matches!(accuracy(&empty), Err(MetricsError::EmptyGroup(_))));
        assert!(matches!(invalid_rate(&empty), Err(MetricsError::EmptyGroup(_))));
        assert!(matches!(efficiency(&empty, &empty), Err(MetricsError::NoCommonSolves(..))));
    }

    #[test]
    fn multi_invalid_conversation_counts_once() {
        let run = RunResults::from_transcripts(
            "a",
            [transcript("1", "t", None, 3), transcript("2", "t", None, 0), transcript("3", "t", None, 1), transcript("4", "t", None, 0)],
        )
        .unwrap();
        assert_eq!(invalid_rate(&run).unwrap(), 0.5);
    }

    #[test]
    fn recorded_annotator_reports_missing_turn() {
        let run = RunResults::from_transcripts("a", [transcript("x-1", "t", Some(2), 0)]).unwrap();
        match pattern_analysis(&run, &RecordedAnnotator) {
            Err(MetricsError::Annotator(f)) => {
                assert_eq!(f.instance_id, "x-1");
                assert_eq!(f.turn, 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn heuristic_annotator_counts_occurrences() {
        let mut t = transcript("1", "t", Some(2), 0);
        t.turns[0].feedback = "2 impostors".into();
        t.turns[1].player_message =
            "Given that the rules say so, let me verify. The previous feedback said 2 impostors. Next I will plan, then answer.".into();
        let c = HeuristicAnnotator::new().annotate(&t, 1).unwrap();
        assert_eq!(c.associate, 2);
        assert_eq!(c.verify, 1);
        assert_eq!(c.plan, 3);
        assert_eq!(c.feedback, 3);
    }

    #[test]
    fn report_key_order() {
        let a = RunResults::from_transcripts("a", [transcript("1", "t", Some(3), 0)]).unwrap();
        let b = RunResults::from_transcripts("b", [transcript("1", "t", None, 0)]).unwrap();
        let json = serde_json::to_string(&report(&a, Some(&b), &HeuristicAnnotator::new()).unwrap()).unwrap();
        let keys = ["\"accuracy\"", "\"efficiency\"", "\"invalid_rate\"", "\"pattern_analysis\"", "\"Associate\"", "\"Verify\"", "\"Plan\"", "\"Feedback\""];
        let positions: Vec<usize> = keys.iter().map(|k| json.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{json}");
        assert!(json.contains("\"a,b\":null"));
        let single = serde_json::to_string(&report(&a, None, &HeuristicAnnotator::new()).unwrap()).unwrap();
        assert!(!single.contains("efficiency"));
    }

    #[test]
    fn table_shape() {
        let a = RunResults::from_transcripts("model-a", [transcript("1", "impostors", Some(3), 0), transcript("2", "knight", None, 0)]).unwrap();
        let r = report(&a, None, &HeuristicAnnotator::new()).unwrap();
        let table = render_table(&[r], |t| match t {
            "impostors" => Some(Category::IP),
            "knight" => Some(Category::SG),
            _ => None,
        });
        let lines: Vec<&str> = table.lines().collect();
        for g in ["IP", "DA", "SO", "SG", "AVG"] {
            assert!(lines[0].contains(g));
        }
        assert_eq!(lines[1].matches(" E").count(), 5);
        assert!(lines[2].contains("100.00"));
        assert!(lines[2].contains("0.00"));
        assert!(lines[2].contains("50.00"));
    }
}
