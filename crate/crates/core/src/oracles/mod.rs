//! Scripted reference players, instance certification and calibration.
//!
//! A strategy is written as straight-line code against an [`Io`] handle:
//! every [`Io::ask`] sends one message and yields the monitor's feedback.
//! [`ScriptedPlayer`] drives a strategy by re-running it from the start on
//! every turn and stopping at the first message that has no feedback yet, so
//! strategies must be deterministic functions of what they have seen.
//!
//! Black-box strategies are built from an [`InstanceRecord`] alone, the same
//! view a remote player gets. The only white-box strategy replays the
//! color-magic generation certificate and takes the hidden state explicitly.

mod color_magic;
mod grid_sum;
mod impostors;
mod knight_battle;
mod maze;
mod password;
mod words;
mod zero_finding;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{mix, InstanceCheck};
use crate::protocol::{play, ChatMessage, Player, PlayerError, Role, Transcript, DEFAULT_MAX_TURNS};
use crate::task::{
    Category, Difficulty, InstanceRecord, Registry, TaskDefinition, TaskError, TaskInstance,
};
use crate::tasks;

pub use color_magic::{certificate_strategy, search_strategy as color_magic_search};
pub use maze::plan_moves as maze_plan;
pub use password::choose_guess as password_guess;
pub use words::ConstraintSolver;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("no oracle registered for task `{0}`")]
    NoOracle(String),
    #[error("{instance_id}: cannot read {what} from the problem text")]
    Unreadable { instance_id: String, what: &'static str },
    #[error(transparent)]
    Task(#[from] TaskError),
}

/// Raised by [`Io::ask`] once a strategy reaches a message that has not been
/// answered yet. It carries that message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pending(pub String);

/// What a strategy run returns: `Err(Pending)` with the next message, or
/// `Ok(())` when it has nothing left to say.
pub type Flow = Result<(), Pending>;

/// Feedback seen so far, consumed in order by a strategy run.
pub struct Io<'a> {
    feedback: &'a [String],
    cursor: usize,
}

impl<'a> Io<'a> {
    pub fn new(feedback: &'a [String]) -> Self {
        Self { feedback, cursor: 0 }
    }

    /// Sends `message`; returns its feedback if already known.
    pub fn ask(&mut self, message: impl Into<String>) -> Result<&'a str, Pending> {
        match self.feedback.get(self.cursor) {
            Some(f) => {
                self.cursor += 1;
                Ok(f.as_str())
            }
            None => Err(Pending(message.into())),
        }
    }
}

pub type Strategy = Box<dyn Fn(&mut Io) -> Flow + Send + Sync>;

/// Adapts a [`Strategy`] to the [`Player`] interface.
pub struct ScriptedPlayer {
    name: &'static str,
    strategy: Strategy,
}

impl ScriptedPlayer {
    pub fn new(name: &'static str, strategy: Strategy) -> Self {
        Self { name, strategy }
    }

    /// Next message given the monitor feedback received so far.
    pub fn next_message(&self, feedback: &[String]) -> Option<String> {
        match (self.strategy)(&mut Io::new(feedback)) {
            Err(Pending(m)) => Some(m),
            Ok(()) => None,
        }
    }
}

impl Player for ScriptedPlayer {
    fn reply(&mut self, conversation: &[ChatMessage]) -> Result<String, PlayerError> {
        let feedback: Vec<String> = conversation
            .iter()
            .skip(1)
            .filter(|m| m.role == Role::User)
            .map(|m| m.content.clone())
            .collect();
        self.next_message(&feedback)
            .ok_or_else(|| PlayerError::Failed(format!("{} oracle has no further move", self.name)))
    }

    fn describe(&self) -> BTreeMap<String, serde_json::Value> {
        BTreeMap::from([
            ("kind".to_string(), "oracle".into()),
            ("strategy".to_string(), self.name.into()),
        ])
    }
}

/// Leading integers of a feedback line, e.g. `"3 4 (finish reached)"` → `[3, 4]`.
pub(crate) fn integers(text: &str) -> Vec<i64> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        let negative = c == '-' && chars.peek().is_some_and(|(_, d)| d.is_ascii_digit());
        if c.is_ascii_digit() || negative {
            let mut end = i + c.len_utf8();
            while let Some(&(j, d)) = chars.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                end = j + 1;
                chars.next();
            }
            if let Ok(v) = text[i..end].parse() {
                out.push(v);
            }
        }
    }
    out
}

fn param(record: &InstanceRecord, key: &'static str) -> Result<i64, OracleError> {
    record.params.get(key).copied().ok_or(OracleError::Unreadable {
        instance_id: record.instance_id.clone(),
        what: key,
    })
}

fn unreadable(record: &InstanceRecord, what: &'static str) -> OracleError {
    OracleError::Unreadable {
        instance_id: record.instance_id.clone(),
        what,
    }
}

/// Whether a bundled oracle exists for `task_id`.
pub fn has_oracle(task_id: &str) -> bool {
    crate::dataset::DEFAULT_TASKS.contains(&task_id)
}

/// Black-box oracle built from the public record only.
pub fn black_box(record: &InstanceRecord) -> Result<ScriptedPlayer, OracleError> {
    let (name, strategy): (&'static str, Strategy) = match record.task.as_str() {
        tasks::impostors::ID => ("triple-scan", impostors::strategy(record)?),
        tasks::words::ID => ("candidate-filter", words::strategy(record)?),
        tasks::password::ID => ("candidate-simulation", password::strategy(record)?),
        tasks::zero_finding::ID => ("prefix-bisection", zero_finding::strategy(record)?),
        tasks::maze::ID => ("swap-belief-planner", maze::strategy(record)?),
        tasks::color_magic::ID => ("bounded-search", color_magic::search_strategy(record)?),
        tasks::knight_battle::ID => ("knight-pursuit", knight_battle::strategy(record)?),
        tasks::grid_sum::ID => ("greedy-minimum", grid_sum::strategy(record)?),
        other => return Err(OracleError::NoOracle(other.to_string())),
    };
    Ok(ScriptedPlayer::new(name, strategy))
}

/// The oracle used for certification: the color-magic certificate replay,
/// black-box everywhere else.
pub fn oracle_player(instance: &TaskInstance) -> Result<ScriptedPlayer, OracleError> {
    if instance.task_id == tasks::color_magic::ID {
        let strategy = certificate_strategy(instance).ok_or_else(|| unreadable(&instance.record(), "certificate"))?;
        return Ok(ScriptedPlayer::new("certificate-replay", strategy));
    }
    black_box(&instance.record())
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub solved: bool,
    pub turns_used: u32,
    pub transcript: Transcript,
}

impl OracleResult {
    fn from_transcript(transcript: Transcript) -> Self {
        Self {
            solved: transcript.is_solved(),
            turns_used: transcript.turns.len() as u32,
            transcript,
        }
    }
}

/// Plays the certification oracle through the real session loop.
pub fn solve(task: &dyn TaskDefinition, instance: &TaskInstance) -> Result<OracleResult, OracleError> {
    solve_within(task, instance, DEFAULT_MAX_TURNS)
}

pub fn solve_within(
    task: &dyn TaskDefinition,
    instance: &TaskInstance,
    max_turns: u32,
) -> Result<OracleResult, OracleError> {
    let mut player = oracle_player(instance)?;
    Ok(OracleResult::from_transcript(play(task, instance, &mut player, max_turns)))
}

/// Per-instance certification outcome, one line of `certification.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub instance_id: String,
    pub task: String,
    pub difficulty: Difficulty,
    pub seed: u64,
    pub solved: bool,
    pub turns_used: u32,
    /// Monte-Carlo win rate against reseeded opponents (adversarial tasks).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub win_rate: Option<f64>,
    pub accepted: bool,
}

/// Acceptance rule of the standard dataset: deterministic tasks must be
/// oracle-solved inside the turn budget; adversarial Easy instances need a
/// Monte-Carlo win rate of at least `threshold`.
#[derive(Debug, Clone)]
pub struct Certifier {
    pub replays: u32,
    pub threshold: f64,
    pub max_turns: u32,
}

impl Default for Certifier {
    fn default() -> Self {
        Self {
            replays: 200,
            threshold: 0.5,
            max_turns: DEFAULT_MAX_TURNS,
        }
    }
}

impl Certifier {
    pub fn certify(
        &self,
        task: &dyn TaskDefinition,
        instance: &TaskInstance,
    ) -> Result<Certification, OracleError> {
        let result = solve_within(task, instance, self.max_turns)?;
        let adversarial = task.category() == Category::SG;
        let win_rate = adversarial.then(|| self.win_rate(task, instance)).transpose()?;
        let accepted = match win_rate {
            Some(rate) => instance.difficulty != Difficulty::Easy || rate >= self.threshold,
            None => result.solved,
        };
        Ok(Certification {
            instance_id: instance.instance_id.clone(),
            task: instance.task_id.clone(),
            difficulty: instance.difficulty,
            seed: instance.seed,
            solved: result.solved,
            turns_used: result.turns_used,
            win_rate,
            accepted,
        })
    }

    /// Share of games won over `replays` reseeded opponents.
    pub fn win_rate(&self, task: &dyn TaskDefinition, instance: &TaskInstance) -> Result<f64, OracleError> {
        if self.replays == 0 {
            return Ok(0.0);
        }
        let mut wins = 0u32;
        for r in 0..self.replays {
            let mut copy = instance.clone();
            task.reseed_opponent(&mut copy.hidden, mix(instance.seed, u64::from(r) + 1));
            if solve_within(task, &copy, self.max_turns)?.solved {
                wins += 1;
            }
        }
        Ok(f64::from(wins) / f64::from(self.replays))
    }
}

impl InstanceCheck for Certifier {
    fn accept(&self, task: &dyn TaskDefinition, instance: &TaskInstance) -> Result<(), String> {
        let c = self.certify(task, instance).map_err(|e| e.to_string())?;
        if c.accepted {
            return Ok(());
        }
        Err(match c.win_rate {
            Some(rate) => format!("oracle win rate {rate:.3} below {}", self.threshold),
            None => format!("oracle did not solve within {} turns", self.max_turns),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub task: String,
    pub n: u32,
    pub trials: u32,
    pub solved: u32,
    pub solve_rate: f64,
    /// Mean turns over solved trials.
    pub mean_turns: Option<f64>,
}

/// Solve rate and mean turns of the oracle for each candidate size, over
/// `trials` fresh instances per size. Rows are sorted by `n`.
pub fn calibrate(
    registry: &Registry,
    task_id: &str,
    sizes: &[u32],
    trials: u32,
) -> Result<Vec<CalibrationRow>, OracleError> {
    if !has_oracle(task_id) {
        return Err(OracleError::NoOracle(task_id.to_string()));
    }
    let task = registry.lookup(task_id)?;
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if trials == 0 {
        return Ok(Vec::new());
    }
    sizes
        .iter()
        .map(|&n| {
            let level = Difficulty::ALL
                .into_iter()
                .find(|&d| task.level_size(d) == n)
                .unwrap_or(Difficulty::Medium);
            let outcomes: Vec<(bool, u32)> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let instance = task.generate_sized(level, n, mix(u64::from(n), u64::from(t)))?;
                    let r = solve(task.as_ref(), &instance)?;
                    Ok((r.solved, r.turns_used))
                })
                .collect::<Result<_, OracleError>>()?;
            let solved_turns: Vec<u32> = outcomes.iter().filter(|o| o.0).map(|o| o.1).collect();
            let solved = solved_turns.len() as u32;
            Ok(CalibrationRow {
                task: task_id.to_string(),
                n,
                trials,
                solved,
                solve_rate: f64::from(solved) / f64::from(trials),
                mean_turns: (!solved_turns.is_empty())
                    .then(|| solved_turns.iter().map(|&t| f64::from(t)).sum::<f64>() / f64::from(solved)),
            })
        })
        .collect()
}

/// Plain-text calibration table.
pub fn render_calibration(rows: &[CalibrationRow]) -> String {
    let mut out = format!("{:<20} {:>4} {:>10} {:>10}\n", "task", "n", "solve_rate", "mean_turns");
    for r in rows {
        let mean = r.mean_turns.map_or_else(|| "-".to_string(), |m| format!("{m:.2}"));
        let _ = writeln!(out, "{:<20} {:>4} {:>10.2} {:>10}", r.task, r.n, r.solve_rate, mean);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_scan() {
        assert_eq!(integers("3 4 (finish reached)"), vec![3, 4]);
        assert_eq!(integers("-1 -1"), vec![-1, -1]);
        assert_eq!(integers("My Choice: 2 3\nGame over"), vec![2, 3]);
        assert_eq!(integers("a-b"), Vec::<i64>::new());
    }

    #[test]
    fn io_replays_then_pends() {
        let seen = vec!["0".to_string()];
        let strategy = |io: &mut Io| -> Flow {
            let a = io.ask("first")?;
            let b = io.ask(format!("second after {a}"))?;
            let _ = b;
            Ok(())
        };
        assert_eq!(strategy(&mut Io::new(&seen)), Err(Pending("second after 0".into())));
        assert_eq!(strategy(&mut Io::new(&[])), Err(Pending("first".into())));
    }

    #[test]
    fn unknown_task_has_no_oracle() {
        let registry = Registry::standard(&Default::default()).unwrap();
        assert!(matches!(calibrate(&registry, "nope", &[3], 2), Err(OracleError::NoOracle(_))));
    }

    #[test]
    fn zero_trials_is_empty() {
        let registry = Registry::standard(&Default::default()).unwrap();
        assert!(calibrate(&registry, "find_the_impostors", &[6, 9], 0).unwrap().is_empty());
    }
}
