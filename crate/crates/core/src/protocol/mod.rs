//! The monitor loop: session state, turn records, transcripts, and the
//! player interface.
//!
//! A session advances one turn per player message. Each turn extracts a
//! command with the task's grammar, hands it to the task, and updates the
//! termination status. Invalid turns still consume budget.

mod extract;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use extract::{
    extract_all, extract_command, CommandGrammar, CommandKind, ParsedCommand, PayloadShape, Span,
};

use crate::task::{Difficulty, Hidden, InvalidPolicy, TaskDefinition, TaskInstance, Verdict};

/// Turn budget applied to every session.
pub const DEFAULT_MAX_TURNS: u32 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Running,
    Solved,
    Failed,
    TurnLimitExceeded,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StepError {
    #[error("session already ended with status {0:?}")]
    StepAfterTermination(Status),
}

/// Monitor-side state of one conversation.
#[derive(Debug, Clone)]
pub struct SessionState {
    pub turn_index: u32,
    pub hidden: Hidden,
    pub status: Status,
    pub invalid_count: u32,
    pub max_turns: u32,
}

impl SessionState {
    pub fn new(instance: &TaskInstance, max_turns: u32) -> Self {
        Self {
            turn_index: 0,
            hidden: instance.hidden.clone(),
            status: Status::Running,
            invalid_count: 0,
            max_turns,
        }
    }
}

/// Per-turn counts of the four reasoning patterns.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "PascalCase")]
pub struct PatternCounts {
    pub associate: u32,
    pub verify: u32,
    pub plan: u32,
    pub feedback: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "TurnRecord", try_from = "TurnRecord")]
pub struct Turn {
    pub player_message: String,
    /// `None` marks an invalid-format turn.
    pub command: Option<ParsedCommand>,
    /// Earlier complete commands in the same message, kept for audit.
    pub superseded: Vec<ParsedCommand>,
    pub feedback: String,
    pub valid: bool,
    pub patterns: Option<PatternCounts>,
}

/// Wire layout of a turn inside a transcript line.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TurnRecord {
    message: String,
    command_kind: String,
    payload: Option<String>,
    feedback: String,
    valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    span: Option<Span>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    superseded: Vec<ParsedCommand>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    patterns: Option<PatternCounts>,
}

const INVALID_FORMAT: &str = "InvalidFormat";

impl From<Turn> for TurnRecord {
    fn from(turn: Turn) -> Self {
        let (command_kind, payload, span) = match turn.command {
            Some(c) => (c.kind.as_str().to_string(), Some(c.payload), Some(c.span)),
            None => (INVALID_FORMAT.to_string(), None, None),
        };
        TurnRecord {
            message: turn.player_message,
            command_kind,
            payload,
            feedback: turn.feedback,
            valid: turn.valid,
            span,
            superseded: turn.superseded,
            patterns: turn.patterns,
        }
    }
}

impl TryFrom<TurnRecord> for Turn {
    type Error = String;

    fn try_from(r: TurnRecord) -> Result<Self, Self::Error> {
        let command = if r.command_kind == INVALID_FORMAT {
            None
        } else {
            let kind = CommandKind::parse(&r.command_kind)
                .ok_or_else(|| format!("unknown command kind `{}`", r.command_kind))?;
            let payload = r.payload.ok_or("command without payload")?;
            let span = r.span.unwrap_or(Span {
                start: 0,
                end: payload.chars().count(),
            });
            Some(ParsedCommand {
                kind,
                payload,
                span,
            })
        };
        Ok(Turn {
            player_message: r.message,
            command,
            superseded: r.superseded,
            feedback: r.feedback,
            valid: r.valid,
            patterns: r.patterns,
        })
    }
}

/// Why a session ended without reaching a verdict from the monitor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub tag: String,
    pub detail: String,
}

/// A finished (or in-progress) conversation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub instance_id: String,
    pub task: String,
    pub difficulty: Difficulty,
    pub seed: u64,
    pub turns: Vec<Turn>,
    pub final_status: Status,
    pub solved_turn: Option<u32>,
    /// Player description and sampling parameters.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub player: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
}

impl Transcript {
    pub fn new(instance: &TaskInstance) -> Self {
        Self {
            instance_id: instance.instance_id.clone(),
            task: instance.task_id.clone(),
            difficulty: instance.difficulty,
            seed: instance.seed,
            turns: Vec::new(),
            final_status: Status::Running,
            solved_turn: None,
            player: BTreeMap::new(),
            failure: None,
        }
    }

    pub fn invalid_count(&self) -> usize {
        self.turns.iter().filter(|t| !t.valid).count()
    }

    pub fn is_solved(&self) -> bool {
        self.final_status == Status::Solved
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("transcript serializes")
    }
}

/// Advances `state` by one player message.
pub fn step(
    task: &dyn TaskDefinition,
    state: &mut SessionState,
    message: &str,
) -> Result<Turn, StepError> {
    if state.status != Status::Running {
        return Err(StepError::StepAfterTermination(state.status));
    }
    state.turn_index += 1;

    let mut all = extract_all(message, task.grammar());
    let command = all.pop();
    let (feedback, verdict) = match &command {
        Some(cmd) => {
            let reply = task.respond(&mut state.hidden, cmd);
            (reply.feedback, reply.verdict)
        }
        None => (task.invalid_notice().to_string(), Verdict::Invalid),
    };

    let valid = verdict != Verdict::Invalid;
    match verdict {
        Verdict::Solved => state.status = Status::Solved,
        Verdict::Fatal => state.status = Status::Failed,
        Verdict::Invalid => {
            state.invalid_count += 1;
            if task.invalid_policy() == InvalidPolicy::ImmediateLoss {
                state.status = Status::Failed;
            }
        }
        Verdict::Continue => {}
    }
    if state.status == Status::Running && state.turn_index >= state.max_turns {
        state.status = Status::TurnLimitExceeded;
    }

    Ok(Turn {
        player_message: message.to_string(),
        command,
        superseded: all,
        feedback,
        valid,
        patterns: None,
    })
}

/// A session bound to its instance, accumulating the transcript.
pub struct Session<'a> {
    task: &'a dyn TaskDefinition,
    state: SessionState,
    transcript: Transcript,
}

impl<'a> Session<'a> {
    pub fn new(task: &'a dyn TaskDefinition, instance: &TaskInstance) -> Self {
        Self::with_max_turns(task, instance, DEFAULT_MAX_TURNS)
    }

    pub fn with_max_turns(
        task: &'a dyn TaskDefinition,
        instance: &TaskInstance,
        max_turns: u32,
    ) -> Self {
        Self {
            task,
            state: SessionState::new(instance, max_turns),
            transcript: Transcript::new(instance),
        }
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn status(&self) -> Status {
        self.state.status
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn step(&mut self, message: &str) -> Result<&Turn, StepError> {
        let turn = step(self.task, &mut self.state, message)?;
        self.transcript.turns.push(turn);
        self.transcript.final_status = self.state.status;
        if self.state.status == Status::Solved {
            self.transcript.solved_turn = Some(self.state.turn_index);
        }
        Ok(self.transcript.turns.last().expect("just pushed"))
    }

    /// Ends the session on a player-side failure.
    pub fn abort(&mut self, tag: &str, detail: impl Into<String>) {
        self.state.status = Status::Failed;
        self.transcript.final_status = Status::Failed;
        self.transcript.failure = Some(Failure {
            tag: tag.to_string(),
            detail: detail.into(),
        });
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlayerError {
    #[error("player timed out: {0}")]
    Timeout(String),
    #[error("player failed: {0}")]
    Failed(String),
}

impl PlayerError {
    pub fn tag(&self) -> &'static str {
        match self {
            PlayerError::Timeout(_) => "player_timeout",
            PlayerError::Failed(_) => "player_error",
        }
    }
}

/// Anything that answers a conversation with its next message.
pub trait Player {
    /// `conversation` starts with the problem text and alternates
    /// user (monitor) and assistant (player) messages, ending with a user one.
    fn reply(&mut self, conversation: &[ChatMessage]) -> Result<String, PlayerError>;

    /// Header fields recorded in the transcript.
    fn describe(&self) -> BTreeMap<String, serde_json::Value> {
        BTreeMap::new()
    }
}

impl<P: Player + ?Sized> Player for Box<P> {
    fn reply(&mut self, conversation: &[ChatMessage]) -> Result<String, PlayerError> {
        (**self).reply(conversation)
    }
    fn describe(&self) -> BTreeMap<String, serde_json::Value> {
        (**self).describe()
    }
}

/// Runs a full session: problem text first, then monitor feedback, until the
/// session leaves `Running`.
pub fn play(
    task: &dyn TaskDefinition,
    instance: &TaskInstance,
    player: &mut dyn Player,
    max_turns: u32,
) -> Transcript {
    let mut session = Session::with_max_turns(task, instance, max_turns);
    session.transcript.player = player.describe();
    let mut conversation = vec![ChatMessage::user(instance.problem_text.clone())];
    while session.status() == Status::Running {
        let message = match player.reply(&conversation) {
            Ok(m) => m,
            Err(e) => {
                let detail = e.to_string();
                session.abort(e.tag(), detail);
                break;
            }
        };
        let feedback = session
            .step(&message)
            .expect("session is running")
            .feedback
            .clone();
        conversation.push(ChatMessage::assistant(message));
        conversation.push(ChatMessage::user(feedback));
    }
    session.into_transcript()
}

/// Replays fixed player messages against an instance.
pub fn replay<S: AsRef<str>>(
    task: &dyn TaskDefinition,
    instance: &TaskInstance,
    messages: &[S],
) -> Transcript {
    let mut session = Session::new(task, instance);
    for m in messages {
        if session.status() != Status::Running {
            break;
        }
        session.step(m.as_ref()).expect("session is running");
    }
    session.into_transcript()
}
