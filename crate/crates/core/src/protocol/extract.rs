//! Command extraction from free-form player messages.
//!
//! Players usually reason in prose before committing to an action, so the
//! extractor scans the whole message for `My <Keyword>: <payload>` forms and
//! keeps the last complete one. Keywords are case-insensitive and may be
//! wrapped in markdown emphasis or quotes.

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Every command keyword family the monitor understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CommandKind {
    Query,
    Answer,
    FinalAnswer,
    Move,
    Choice,
    Guess,
    Operation,
    BreakInto,
    ChooseBreak,
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Query => "Query",
            CommandKind::Answer => "Answer",
            CommandKind::FinalAnswer => "FinalAnswer",
            CommandKind::Move => "Move",
            CommandKind::Choice => "Choice",
            CommandKind::Guess => "Guess",
            CommandKind::Operation => "Operation",
            CommandKind::BreakInto => "BreakInto",
            CommandKind::ChooseBreak => "ChooseBreak",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "Query" => CommandKind::Query,
            "Answer" => CommandKind::Answer,
            "FinalAnswer" => CommandKind::FinalAnswer,
            "Move" => CommandKind::Move,
            "Choice" => CommandKind::Choice,
            "Guess" => CommandKind::Guess,
            "Operation" => CommandKind::Operation,
            "BreakInto" => CommandKind::BreakInto,
            "ChooseBreak" => CommandKind::ChooseBreak,
            _ => return None,
        })
    }
}

/// Character offsets `[start, end)` into the source message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedCommand {
    pub kind: CommandKind,
    pub payload: String,
    pub span: Span,
}

impl ParsedCommand {
    /// Builds a command without a source message, for direct monitor calls.
    pub fn new(kind: CommandKind, payload: impl Into<String>) -> Self {
        let payload = payload.into();
        let end = payload.chars().count();
        Self {
            kind,
            payload,
            span: Span { start: 0, end },
        }
    }

    /// Payload split on commas and whitespace, parsed as integers.
    pub fn integers(&self) -> Option<Vec<i64>> {
        self.payload
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().ok())
            .collect()
    }
}

/// Lexical shape a payload must have for a command to count as complete.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayloadShape {
    /// Non-negative integers separated by commas or spaces.
    Integers,
    /// One alphanumeric token.
    Token,
    /// One of U, D, L, R.
    Direction,
}

impl PayloadShape {
    fn pattern(self) -> &'static str {
        match self {
            PayloadShape::Integers => r"\d+(?:[ \t]*,[ \t]*\d+|[ \t]+\d+)*",
            PayloadShape::Token => r"[A-Za-z0-9]+",
            PayloadShape::Direction => r"[UDLR]\b",
        }
    }
}

#[derive(Debug, Clone)]
struct Rule {
    kind: CommandKind,
    regex: Regex,
}

/// The set of command keywords legal for one task.
#[derive(Debug, Clone)]
pub struct CommandGrammar {
    rules: Vec<Rule>,
}

impl CommandGrammar {
    /// `entries` pairs a keyword phrase such as `"My Query"` with the kind it
    /// produces and the payload shape it requires.
    pub fn new(entries: &[(&str, CommandKind, PayloadShape)]) -> Self {
        let rules = entries
            .iter()
            .map(|&(phrase, kind, shape)| {
                let words: Vec<String> = phrase.split_whitespace().map(regex::escape).collect();
                let pattern = format!(
                    r#"(?i)(?:^|[^\p{{L}}\p{{N}}])(?P<command>{kw}[*_]*[ \t]*:[ \t]*[*_"'`“”‘’\[(<]*[ \t]*(?P<payload>{payload}))"#,
                    kw = words.join(r"\s+"),
                    payload = shape.pattern(),
                );
                Rule {
                    kind,
                    regex: Regex::new(&pattern).expect("command pattern compiles"),
                }
            })
            .collect();
        Self { rules }
    }

    pub fn kinds(&self) -> impl Iterator<Item = CommandKind> + '_ {
        self.rules.iter().map(|r| r.kind)
    }
}

/// All complete commands in `message`, ordered by start offset.
pub fn extract_all(message: &str, grammar: &CommandGrammar) -> Vec<ParsedCommand> {
    let mut found: Vec<(usize, usize, ParsedCommand)> = Vec::new();
    for rule in &grammar.rules {
        for caps in rule.regex.captures_iter(message) {
            let whole = caps.name("command").expect("command group");
            let payload = caps.name("payload").expect("payload group").as_str().trim();
            if payload.is_empty() {
                continue;
            }
            let span = Span {
                start: char_offset(message, whole.start()),
                end: char_offset(message, whole.end()),
            };
            found.push((
                whole.start(),
                whole.end(),
                ParsedCommand {
                    kind: rule.kind,
                    payload: payload.to_string(),
                    span,
                },
            ));
        }
    }
    found.sort_by_key(|(start, end, _)| (*start, *end));
    found.into_iter().map(|(_, _, c)| c).collect()
}

/// The last complete command in `message`, or `None` when the message holds
/// no legal keyword-plus-payload form (an invalid-format turn).
pub fn extract_command(message: &str, grammar: &CommandGrammar) -> Option<ParsedCommand> {
    extract_all(message, grammar).pop()
}

fn char_offset(s: &str, byte: usize) -> usize {
    s[..byte].chars().count()
}
