//! Turn annotators for pattern analysis.

use regex::Regex;
use thiserror::Error;

use crate::protocol::{PatternCounts, Transcript};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("annotating {instance_id} turn {turn}: {reason}")]
pub struct AnnotatorFailure {
    pub instance_id: String,
    /// 1-based turn number.
    pub turn: usize,
    pub reason: String,
}

/// Counts reasoning-pattern occurrences in one player turn.
pub trait Annotator: Sync {
    /// `index` is 0-based into `transcript.turns`.
    fn annotate(&self, transcript: &Transcript, index: usize) -> Result<PatternCounts, AnnotatorFailure>;
}

/// Uses counts already stored on each turn, failing on turns without them.
pub struct RecordedAnnotator;

impl Annotator for RecordedAnnotator {
    fn annotate(&self, transcript: &Transcript, index: usize) -> Result<PatternCounts, AnnotatorFailure> {
        transcript.turns[index].patterns.ok_or_else(|| AnnotatorFailure {
            instance_id: transcript.instance_id.clone(),
            turn: index + 1,
            reason: "turn carries no recorded pattern counts".into(),
        })
    }
}

/// Deterministic keyword tagger.
///
/// - Associate: appeals to the stated rules or constraints.
/// - Verify: checking or confirming a hypothesis.
/// - Plan: laying out upcoming steps.
/// - Feedback: references to earlier monitor replies, including quoting one.
pub struct HeuristicAnnotator {
    associate: Regex,
    verify: Regex,
    plan: Regex,
    feedback: Regex,
}

impl HeuristicAnnotator {
    pub fn new() -> Self {
        let words = |alts: &str| Regex::new(&format!(r"(?i)\b(?:{alts})\b")).expect("static pattern");
        Self {
            associate: words(r"rules?|according to|constraints?|given that|recall|by definition|the problem says"),
            verify: words(r"verify|verified|double[- ]check|check(?:ing)?|confirm(?:s|ed|ing)?|make sure|consistent"),
            plan: words(r"plan|strategy|next|then|first|after that|step \d+|going to|will try"),
            feedback: words(r"feedback|response|responded|result|previous(?:ly)?|last (?:query|guess|move|answer)|you said|told me"),
        }
    }
}

impl Default for HeuristicAnnotator {
    fn default() -> Self {
        Self::new()
    }
}

impl Annotator for HeuristicAnnotator {
    fn annotate(&self, transcript: &Transcript, index: usize) -> Result<PatternCounts, AnnotatorFailure> {
        let turn = transcript.turns.get(index).ok_or_else(|| AnnotatorFailure {
            instance_id: transcript.instance_id.clone(),
            turn: index + 1,
            reason: "no such turn".into(),
        })?;
        let text = &turn.player_message;
        let count = |re: &Regex| re.find_iter(text).count() as u32;
        let quoted = transcript.turns[..index]
            .iter()
            .map(|t| t.feedback.trim())
            .filter(|f| f.len() >= 3 && text.contains(*f))
            .count() as u32;
        Ok(PatternCounts {
            associate: count(&self.associate),
            verify: count(&self.verify),
            plan: count(&self.plan),
            feedback: count(&self.feedback) + quoted,
        })
    }
}
