//! Line-delimited JSON interface over stdin/stdout.
//!
//! Requests are `{"id": n, "op": "generate"|"step"|"close", "args": {...}}`;
//! each gets exactly one reply `{"id": n, "ok": true, "value": ...}` or
//! `{"id": n, "ok": false, "error": {"kind": ..., "message": ...}}`. The
//! server opens with an unsolicited frame of id 0 carrying the protocol
//! version.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Write};
use std::sync::Arc;

use serde::Deserialize;
use serde_json::{json, Value};
use turnbench_core::{Difficulty, Registry, Session, Status, TaskDefinition, DEFAULT_MAX_TURNS};

pub const PROTOCOL_VERSION: &str = "1";

#[derive(Debug, Deserialize)]
struct Request {
    id: Option<u64>,
    op: String,
    #[serde(default)]
    args: Value,
}

#[derive(Debug, Deserialize)]
struct GenerateArgs {
    task: String,
    difficulty: Difficulty,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    size: Option<u32>,
    #[serde(default)]
    max_turns: Option<u32>,
}

#[derive(Debug, Deserialize)]
struct StepArgs {
    session: u64,
    message: String,
}

#[derive(Debug, Deserialize)]
struct CloseArgs {
    session: u64,
}

struct Fault {
    kind: &'static str,
    message: String,
}

impl Fault {
    fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Self { kind, message: message.into() }
    }
}

fn args<T: for<'de> Deserialize<'de>>(value: Value) -> Result<T, Fault> {
    serde_json::from_value(value).map_err(|e| Fault::new("BadRequest", format!("arguments: {e}")))
}

pub fn banner() -> Value {
    json!({
        "id": 0,
        "ok": true,
        "value": {"protocol": PROTOCOL_VERSION, "engine": "turnbench", "version": env!("CARGO_PKG_VERSION")},
    })
}

struct Server<'r> {
    tasks: &'r BTreeMap<String, Arc<dyn TaskDefinition>>,
    sessions: HashMap<u64, Session<'r>>,
    next_session: u64,
}

impl<'r> Server<'r> {
    fn generate(&mut self, a: GenerateArgs) -> Result<Value, Fault> {
        let task = self.tasks.get(&a.task).ok_or_else(|| Fault::new("UnknownTask", format!("unknown task `{}`", a.task)))?;
        let size = a.size.unwrap_or_else(|| task.level_size(a.difficulty));
        let mut instance = task
            .generate_sized(a.difficulty, size, a.seed)
            .map_err(|e| Fault::new("GenerationFailure", e.to_string()))?;
        if a.size.is_none() {
            instance.instance_id = format!("{}-{}-s{}", a.task, a.difficulty, a.seed);
        }
        let session = Session::with_max_turns(task.as_ref(), &instance, a.max_turns.unwrap_or(DEFAULT_MAX_TURNS));
        self.next_session += 1;
        let id = self.next_session;
        self.sessions.insert(id, session);
        Ok(json!({
            "session": id,
            "instance_id": instance.instance_id,
            "task": instance.task_id,
            "difficulty": instance.difficulty,
            "seed": instance.seed,
            "problem_text": instance.problem_text,
        }))
    }

    fn step(&mut self, a: StepArgs) -> Result<Value, Fault> {
        let session = self
            .sessions
            .get_mut(&a.session)
            .ok_or_else(|| Fault::new("SessionNotFound", format!("no session {}", a.session)))?;
        if session.status() != Status::Running {
            return Err(Fault::new("SessionNotFound", format!("session {} has ended ({:?})", a.session, session.status())));
        }
        let turn = session.step(&a.message).map_err(|e| Fault::new("SessionNotFound", e.to_string()))?.clone();
        Ok(json!({
            "feedback": turn.feedback,
            "valid": turn.valid,
            "status": session.status(),
            "turn_index": session.state().turn_index,
        }))
    }

    fn close(&mut self, a: CloseArgs) -> Result<Value, Fault> {
        let session = self
            .sessions
            .remove(&a.session)
            .ok_or_else(|| Fault::new("SessionNotFound", format!("no session {}", a.session)))?;
        Ok(json!({ "transcript": session.into_transcript() }))
    }

    fn handle(&mut self, line: &str) -> Value {
        let request: Request = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => return json!({"id": null, "ok": false, "error": {"kind": "BadRequest", "message": e.to_string()}}),
        };
        let result = match request.op.as_str() {
            "generate" => args(request.args).and_then(|a| self.generate(a)),
            "step" => args(request.args).and_then(|a| self.step(a)),
            "close" => args(request.args).and_then(|a| self.close(a)),
            other => Err(Fault::new("UnknownOp", format!("unknown op `{other}`"))),
        };
        match result {
            Ok(value) => json!({"id": request.id, "ok": true, "value": value}),
            Err(f) => json!({"id": request.id, "ok": false, "error": {"kind": f.kind, "message": f.message}}),
        }
    }
}

/// Serves requests from `input` until end of input.
pub fn serve(registry: &Registry, input: impl BufRead, mut output: impl Write) -> io::Result<()> {
    let tasks: BTreeMap<String, Arc<dyn TaskDefinition>> = registry
        .ids()
        .map(|id| (id.to_string(), registry.lookup(id).expect("listed task")))
        .collect();
    let mut server = Server { tasks: &tasks, sessions: HashMap::new(), next_session: 0 };
    writeln!(output, "{}", banner())?;
    output.flush()?;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        writeln!(output, "{}", server.handle(&line))?;
        output.flush()?;
    }
    Ok(())
}
