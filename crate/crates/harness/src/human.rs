//! Terminal player: shows each monitor message and reads one line back.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde_json::Value;
use turnbench_core::protocol::{ChatMessage, Player, PlayerError};

pub struct HumanPlayer<R, W> {
    input: R,
    output: W,
    prompt: String,
}

impl<R: BufRead, W: Write> HumanPlayer<R, W> {
    pub fn new(input: R, output: W) -> Self {
        Self {
            input,
            output,
            prompt: "> ".to_string(),
        }
    }

    pub fn with_prompt(mut self, prompt: impl Into<String>) -> Self {
        self.prompt = prompt.into();
        self
    }
}

impl<R: BufRead, W: Write> Player for HumanPlayer<R, W> {
    fn reply(&mut self, conversation: &[ChatMessage]) -> Result<String, PlayerError> {
        let io = |e: std::io::Error| PlayerError::Failed(format!("terminal: {e}"));
        if let Some(last) = conversation.last() {
            writeln!(self.output, "{}", last.content).map_err(io)?;
        }
        write!(self.output, "{}", self.prompt).map_err(io)?;
        self.output.flush().map_err(io)?;
        let mut line = String::new();
        if self.input.read_line(&mut line).map_err(io)? == 0 {
            return Err(PlayerError::Failed("input closed".into()));
        }
        let trimmed = line.strip_suffix('\n').unwrap_or(&line);
        Ok(trimmed.strip_suffix('\r').unwrap_or(trimmed).to_string())
    }

    fn describe(&self) -> BTreeMap<String, Value> {
        BTreeMap::from([("kind".to_string(), Value::from("human"))])
    }
}
