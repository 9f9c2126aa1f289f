//! Task abstraction: instance data model, the generator/monitor contract each
//! game implements, and the registry mapping task ids to implementations.

use std::any::Any;
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::{CommandGrammar, ParsedCommand};

/// Task category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    /// Information probing: a fixed hidden answer discovered through queries.
    IP,
    /// Dynamic adaptation: the hidden answer mutates after interactions.
    DA,
    /// State operation: hidden mechanics the player must infer.
    SO,
    /// Strategic gaming: adversarial play against a random opponent.
    SG,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::IP, Category::DA, Category::SO, Category::SG];
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Category::IP => "IP",
            Category::DA => "DA",
            Category::SO => "SO",
            Category::SG => "SG",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }

    /// Column label used in rendered tables.
    pub fn short(self) -> &'static str {
        match self {
            Difficulty::Easy => "E",
            Difficulty::Medium => "M",
            Difficulty::Hard => "H",
        }
    }

    /// Picks the level-indexed entry of a `[easy, medium, hard]` table.
    pub fn pick<T: Copy>(self, table: [T; 3]) -> T {
        table[self as usize]
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Difficulty {
    type Err = TaskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "easy" | "e" => Ok(Difficulty::Easy),
            "medium" | "m" => Ok(Difficulty::Medium),
            "hard" | "h" => Ok(Difficulty::Hard),
            other => Err(TaskError::BadDifficulty(other.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("unknown difficulty `{0}`")]
    BadDifficulty(String),
    #[error("{task}: no valid instance after {attempts} attempts")]
    GenerationFailure { task: String, attempts: u32 },
    #[error("no bundled or configured wordlist for length {0}")]
    WordlistMissing(usize),
    #[error("reading wordlist {path}: {source}")]
    Wordlist {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("instance {instance_id} does not regenerate from its seed")]
    Regeneration { instance_id: String },
}

/// Upper bound on rejection-sampling rounds inside a generator.
pub const MAX_GENERATION_RETRIES: u32 = 1000;

pub type Params = BTreeMap<String, i64>;

/// Object-safe view of a task's hidden state.
pub trait HiddenState: Any + fmt::Debug + Send + Sync {
    fn clone_box(&self) -> Box<dyn HiddenState>;
    fn as_any(&self) -> &dyn Any;
    fn as_any_mut(&mut self) -> &mut dyn Any;
}

impl<T: Any + fmt::Debug + Clone + Send + Sync> HiddenState for T {
    fn clone_box(&self) -> Box<dyn HiddenState> {
        Box::new(self.clone())
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
    fn as_any_mut(&mut self) -> &mut dyn Any {
        self
    }
}

/// Task-specific monitor state. Never serialized.
pub struct Hidden(Box<dyn HiddenState>);

impl Hidden {
    pub fn new<T: HiddenState>(state: T) -> Self {
        Hidden(Box::new(state))
    }

    pub fn downcast_ref<T: 'static>(&self) -> Option<&T> {
        self.0.as_any().downcast_ref()
    }

    pub fn downcast_mut<T: 'static>(&mut self) -> Option<&mut T> {
        self.0.as_any_mut().downcast_mut()
    }
}

impl Clone for Hidden {
    fn clone(&self) -> Self {
        Hidden(self.0.clone_box())
    }
}

impl fmt::Debug for Hidden {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One generated problem.
#[derive(Debug, Clone)]
pub struct TaskInstance {
    pub instance_id: String,
    pub task_id: String,
    pub category: Category,
    pub difficulty: Difficulty,
    pub seed: u64,
    pub params: Params,
    pub hidden: Hidden,
    pub objective: String,
    pub problem_text: String,
}

impl TaskInstance {
    pub fn record(&self) -> InstanceRecord {
        InstanceRecord {
            instance_id: self.instance_id.clone(),
            task: self.task_id.clone(),
            category: self.category,
            difficulty: self.difficulty,
            seed: self.seed,
            params: self.params.clone(),
            objective: self.objective.clone(),
            problem_text: self.problem_text.clone(),
        }
    }

    /// Stable textual identity covering the hidden state, for equality checks.
    pub fn fingerprint(&self) -> String {
        format!(
            "{}|{}|{}|{}|{:?}|{:?}|{}|{}",
            self.instance_id,
            self.task_id,
            self.difficulty,
            self.seed,
            self.params,
            self.hidden,
            self.objective,
            self.problem_text
        )
    }
}

/// The serialized form of an instance. The hidden state is re-derived from
/// the seed on load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub instance_id: String,
    pub task: String,
    pub category: Category,
    pub difficulty: Difficulty,
    pub seed: u64,
    pub params: Params,
    pub objective: String,
    pub problem_text: String,
}

/// Generation-time knobs shared by every task, carried in the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaskOptions {
    /// Digit base of the password transform.
    pub password_base: u32,
    /// Lower bound of the password range.
    pub password_min: i64,
    /// Extra wordlist file, one uppercase word per line.
    pub wordlist: Option<PathBuf>,
    /// Fail instead of falling back to random letters when no list covers a length.
    pub require_words: bool,
}

impl Default for TaskOptions {
    fn default() -> Self {
        Self {
            password_base: 2,
            password_min: 1,
            wordlist: None,
            require_words: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Continue,
    Solved,
    /// Task-fatal move: the game ends as a loss.
    Fatal,
    /// Illegal operation; what happens next depends on the invalid policy.
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub feedback: String,
    pub verdict: Verdict,
}

impl Reply {
    pub fn new(feedback: impl Into<String>, verdict: Verdict) -> Self {
        Self {
            feedback: feedback.into(),
            verdict,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InvalidPolicy {
    RespondAndContinue,
    ImmediateLoss,
}

/// Inputs to one generator call.
#[derive(Debug, Clone, Copy)]
pub struct Setup {
    pub difficulty: Difficulty,
    /// Size parameter; the level default unless overridden for calibration.
    pub size: u32,
    pub seed: u64,
}

/// What a generator produces before it is wrapped into a [`TaskInstance`].
#[derive(Debug, Clone)]
pub struct Generated<S> {
    pub params: Params,
    pub state: S,
    pub objective: String,
    pub problem_text: String,
}

/// Typed task implementation. Every [`Game`] is a [`TaskDefinition`].
pub trait Game: Send + Sync + 'static {
    type State: Clone + fmt::Debug + Send + Sync + 'static;

    fn id(&self) -> &'static str;
    fn category(&self) -> Category;
    /// The size parameter `n` for each level.
    fn level_size(&self, difficulty: Difficulty) -> u32;
    fn grammar(&self) -> &CommandGrammar;
    fn invalid_policy(&self) -> InvalidPolicy {
        InvalidPolicy::RespondAndContinue
    }
    fn invalid_notice(&self) -> &'static str {
        "Invalid"
    }
    fn generate(&self, setup: &Setup) -> Result<Generated<Self::State>, TaskError>;
    /// Monitor transition. All randomness must come from inside `state`.
    fn respond(&self, state: &mut Self::State, command: &ParsedCommand) -> Reply;
    /// Well-formedness of a freshly generated state.
    fn check(&self, state: &Self::State) -> Result<(), String>;
    /// Replace the opponent's random stream (adversarial tasks only).
    fn reseed_opponent(&self, _state: &mut Self::State, _seed: u64) {}
}

/// Object-safe task interface used by the registry and the monitor.
pub trait TaskDefinition: Send + Sync {
    fn id(&self) -> &'static str;
    fn category(&self) -> Category;
    fn level_size(&self, difficulty: Difficulty) -> u32;
    fn grammar(&self) -> &CommandGrammar;
    fn invalid_policy(&self) -> InvalidPolicy;
    fn invalid_notice(&self) -> &'static str;
    fn generate_sized(
        &self,
        difficulty: Difficulty,
        size: u32,
        seed: u64,
    ) -> Result<TaskInstance, TaskError>;
    fn respond(&self, hidden: &mut Hidden, command: &ParsedCommand) -> Reply;
    fn check(&self, instance: &TaskInstance) -> Result<(), String>;
    fn reseed_opponent(&self, hidden: &mut Hidden, seed: u64);

    fn generate(&self, difficulty: Difficulty, seed: u64) -> Result<TaskInstance, TaskError> {
        self.generate_sized(difficulty, self.level_size(difficulty), seed)
    }
}

impl<G: Game> TaskDefinition for G {
    fn id(&self) -> &'static str {
        Game::id(self)
    }
    fn category(&self) -> Category {
        Game::category(self)
    }
    fn level_size(&self, difficulty: Difficulty) -> u32 {
        Game::level_size(self, difficulty)
    }
    fn grammar(&self) -> &CommandGrammar {
        Game::grammar(self)
    }
    fn invalid_policy(&self) -> InvalidPolicy {
        Game::invalid_policy(self)
    }
    fn invalid_notice(&self) -> &'static str {
        Game::invalid_notice(self)
    }

    fn generate_sized(
        &self,
        difficulty: Difficulty,
        size: u32,
        seed: u64,
    ) -> Result<TaskInstance, TaskError> {
        let setup = Setup {
            difficulty,
            size,
            seed,
        };
        let generated = Game::generate(self, &setup)?;
        Ok(TaskInstance {
            instance_id: format!("{}-{}-s{}", Game::id(self), difficulty, seed),
            task_id: Game::id(self).to_string(),
            category: Game::category(self),
            difficulty,
            seed,
            params: generated.params,
            hidden: Hidden::new(generated.state),
            objective: generated.objective,
            problem_text: generated.problem_text,
        })
    }

    fn respond(&self, hidden: &mut Hidden, command: &ParsedCommand) -> Reply {
        let state = hidden
            .downcast_mut::<G::State>()
            .expect("hidden state belongs to this task");
        Game::respond(self, state, command)
    }

    fn check(&self, instance: &TaskInstance) -> Result<(), String> {
        let state = instance
            .hidden
            .downcast_ref::<G::State>()
            .ok_or_else(|| "hidden state belongs to another task".to_string())?;
        if instance.problem_text.contains('{') || instance.problem_text.contains('}') {
            return Err("problem text has an unfilled placeholder".into());
        }
        Game::check(self, state)
    }

    fn reseed_opponent(&self, hidden: &mut Hidden, seed: u64) {
        if let Some(state) = hidden.downcast_mut::<G::State>() {
            Game::reseed_opponent(self, state, seed);
        }
    }
}

/// Task id → implementation.
#[derive(Clone)]
pub struct Registry {
    tasks: BTreeMap<&'static str, Arc<dyn TaskDefinition>>,
}

impl Registry {
    pub fn empty() -> Self {
        Self {
            tasks: BTreeMap::new(),
        }
    }

    /// All bundled tasks configured with `options`.
    pub fn standard(options: &TaskOptions) -> Result<Self, TaskError> {
        let mut registry = Self::empty();
        crate::tasks::register_all(&mut registry, options)?;
        Ok(registry)
    }

    pub fn register(&mut self, task: Arc<dyn TaskDefinition>) {
        self.tasks.insert(task.id(), task);
    }

    pub fn lookup(&self, task_id: &str) -> Result<Arc<dyn TaskDefinition>, TaskError> {
        self.tasks
            .get(task_id)
            .cloned()
            .ok_or_else(|| TaskError::UnknownTask(task_id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.tasks.keys().copied()
    }

    pub fn by_category(&self, category: Category) -> Vec<&'static str> {
        self.tasks
            .values()
            .filter(|t| t.category() == category)
            .map(|t| t.id())
            .collect()
    }

    /// Rebuilds the full instance (hidden state included) from its record and
    /// checks that the visible fields match.
    pub fn regenerate(&self, record: &InstanceRecord) -> Result<TaskInstance, TaskError> {
        let def = self.lookup(&record.task)?;
        let size = record
            .params
            .get("n")
            .map(|&n| n as u32)
            .unwrap_or_else(|| def.level_size(record.difficulty));
        let mut instance = def.generate_sized(record.difficulty, size, record.seed)?;
        instance.instance_id = record.instance_id.clone();
        if instance.record() != *record {
            return Err(TaskError::Regeneration {
                instance_id: record.instance_id.clone(),
            });
        }
        Ok(instance)
    }
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.tasks.keys()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_known_and_unknown() {
        let registry = Registry::standard(&TaskOptions::default()).unwrap();
        assert_eq!(registry.lookup("find_the_impostors").unwrap().id(), "find_the_impostors");
        assert_eq!(registry.lookup("knight_battle").unwrap().category(), Category::SG);
        assert!(matches!(
            registry.lookup("no_such_task"),
            Err(TaskError::UnknownTask(id)) if id == "no_such_task"
        ));
    }

    #[test]
    fn two_tasks_per_category() {
        let registry = Registry::standard(&TaskOptions::default()).unwrap();
        for c in Category::ALL {
            assert_eq!(registry.by_category(c).len(), 2, "{c}");
        }
    }

    #[test]
    fn difficulty_parsing() {
        assert_eq!("Hard".parse::<Difficulty>().unwrap(), Difficulty::Hard);
        assert_eq!("e".parse::<Difficulty>().unwrap(), Difficulty::Easy);
        assert!("extreme".parse::<Difficulty>().is_err());
    }

    #[test]
    fn regeneration_round_trip() {
        let registry = Registry::standard(&TaskOptions::default()).unwrap();
        for id in registry.ids().collect::<Vec<_>>() {
            let def = registry.lookup(id).unwrap();
            let inst = def.generate(Difficulty::Medium, 99).unwrap();
            let again = registry.regenerate(&inst.record()).unwrap();
            assert_eq!(inst.fingerprint(), again.fingerprint());
        }
    }
}
