//! Shared fixtures: an in-process chat-completions server.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::process::{Command, Stdio};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use turnbench_core::oracles::black_box;
use turnbench::store;
use turnbench_core::InstanceRecord;

#[derive(Debug, Clone)]
pub struct Recorded {
    pub headers: Vec<(String, String)>,
    pub body: String,
}

impl Recorded {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers.iter().find(|(k, _)| k.eq_ignore_ascii_case(name)).map(|(_, v)| v.as_str())
    }

    pub fn json(&self) -> Value {
        serde_json::from_str(&self.body).expect("request body is JSON")
    }

    /// Contents of every message sent, in order.
    pub fn contents(&self) -> Vec<(String, String)> {
        self.json()["messages"]
            .as_array()
            .expect("messages array")
            .iter()
            .map(|m| (m["role"].as_str().unwrap().to_string(), m["content"].as_str().unwrap().to_string()))
            .collect()
    }
}

pub enum Reply {
    Content(String),
    Status(u16, String),
    /// Sleep, then send the inner reply.
    Delay(Duration, Box<Reply>),
}

pub type Handler = Arc<dyn Fn(&Value, usize) -> Reply + Send + Sync>;

pub struct MockServer {
    pub url: String,
    pub requests: Arc<Mutex<Vec<Recorded>>>,
}

impl MockServer {
    pub fn start(handler: Handler) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1", listener.local_addr().unwrap());
        let requests: Arc<Mutex<Vec<Recorded>>> = Arc::default();
        let log = requests.clone();
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let handler = handler.clone();
                let log = log.clone();
                thread::spawn(move || serve_connection(stream, &handler, &log));
            }
        });
        Self { url, requests }
    }

    pub fn recorded(&self) -> Vec<Recorded> {
        self.requests.lock().unwrap().clone()
    }
}

fn serve_connection(stream: TcpStream, handler: &Handler, log: &Mutex<Vec<Recorded>>) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut stream = stream;
    let _ = stream.set_nodelay(true);
    loop {
        let mut request_line = String::new();
        if reader.read_line(&mut request_line).unwrap_or(0) == 0 {
            return;
        }
        let mut headers = Vec::new();
        loop {
            let mut line = String::new();
            if reader.read_line(&mut line).unwrap_or(0) == 0 {
                return;
            }
            let line = line.trim_end();
            if line.is_empty() {
                break;
            }
            if let Some((k, v)) = line.split_once(':') {
                headers.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
        let len: usize = headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case("content-length"))
            .and_then(|(_, v)| v.parse().ok())
            .unwrap_or(0);
        let mut body = vec![0u8; len];
        if reader.read_exact(&mut body).is_err() {
            return;
        }
        let body = String::from_utf8(body).unwrap();
        let index = {
            let mut log = log.lock().unwrap();
            log.push(Recorded { headers, body: body.clone() });
            log.len() - 1
        };
        let value: Value = serde_json::from_str(&body).unwrap_or(Value::Null);
        let mut reply = handler(&value, index);
        while let Reply::Delay(d, inner) = reply {
            thread::sleep(d);
            reply = *inner;
        }
        let (status, payload) = match reply {
            Reply::Content(c) => (200, json!({"choices": [{"index": 0, "message": {"role": "assistant", "content": c}}]}).to_string()),
            Reply::Status(s, b) => (s, b),
            Reply::Delay(..) => unreachable!(),
        };
        let response = format!(
            "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{payload}",
            payload.len()
        );
        if stream.write_all(response.as_bytes()).is_err() {
            return;
        }
        let _ = stream.flush();
    }
}

/// Handler answering as the black-box oracle of whichever instance the
/// conversation's first message belongs to.
pub fn oracle_handler(records: &[InstanceRecord]) -> Handler {
    let by_problem: HashMap<String, InstanceRecord> = records.iter().map(|r| (r.problem_text.clone(), r.clone())).collect();
    Arc::new(move |body: &Value, _| {
        let messages = body["messages"].as_array().cloned().unwrap_or_default();
        let problem = messages.first().and_then(|m| m["content"].as_str()).unwrap_or_default();
        let Some(record) = by_problem.get(problem) else {
            return Reply::Content("I do not recognise this problem.".into());
        };
        let feedback: Vec<String> = messages
            .iter()
            .skip(1)
            .filter(|m| m["role"] == "user")
            .map(|m| m["content"].as_str().unwrap_or_default().to_string())
            .collect();
        let player = black_box(record).expect("oracle exists");
        Reply::Content(player.next_message(&feedback).unwrap_or_else(|| "No further move.".into()))
    })
}

/// Kills a remote run part-way, resumes it, and checks the result. Returns a
/// short description of what happened.
pub fn kill_and_resume() -> String {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let run = tmp.path().join("run");
    let gen = Command::new(env!("CARGO_BIN_EXE_turnbench"))
        .args(["gen", "--out", data.to_str().unwrap(), "--per-level", "2", "--skip-certify"])
        .output()
        .unwrap();
    assert!(gen.status.success());
    let records = store::read_instances(&data).unwrap();

    let oracle = oracle_handler(&records);
    let server = MockServer::start(Arc::new(move |body, i| Reply::Delay(Duration::from_millis(15), Box::new(oracle(body, i)))));
    let endpoint = tmp.path().join("endpoint.json");
    fs::write(
        &endpoint,
        serde_json::json!({"base_url": server.url, "model": "mock", "retry_backoff_ms": 10, "timeout_secs": 10}).to_string(),
    )
    .unwrap();
    let args = |resume: bool| {
        let mut a = vec![
            "run".to_string(),
            "--dataset".into(),
            data.display().to_string(),
            "--player".into(),
            "remote".into(),
            "--endpoint".into(),
            endpoint.display().to_string(),
            "--parallel".into(),
            "4".into(),
            "--out".into(),
            run.display().to_string(),
        ];
        if resume {
            a.push("--resume".into());
        }
        a
    };

    let mut child = Command::new(env!("CARGO_BIN_EXE_turnbench"))
        .args(args(false))
        .env("TURNBENCH_API_KEY", "sk-kill-test-secret")
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let start = Instant::now();
    while store::transcript_files(&run).unwrap().len() < 6 {
        assert!(start.elapsed() < Duration::from_secs(120), "run made no progress");
        std::thread::sleep(Duration::from_millis(20));
    }
    child.kill().unwrap();
    child.wait().unwrap();

    let partial = store::transcript_files(&run).unwrap();
    assert!(partial.len() < records.len(), "run finished before it was killed");
    for f in &partial {
        store::read_transcript(f).expect("only whole transcripts are visible");
    }

    let resumed = Command::new(env!("CARGO_BIN_EXE_turnbench"))
        .args(args(true))
        .env("TURNBENCH_API_KEY", "sk-kill-test-secret")
        .output()
        .unwrap();
    assert!(resumed.status.success(), "{}", String::from_utf8_lossy(&resumed.stderr));

    let files = store::transcript_files(&run).unwrap();
    assert_eq!(files.len(), records.len());
    let ids: HashSet<String> = files.iter().map(|f| store::read_transcript(f).unwrap().instance_id).collect();
    assert_eq!(ids, records.iter().map(|r| r.instance_id.clone()).collect());
    let leftovers: Vec<_> = fs::read_dir(store::transcript_dir(&run))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
    for t in store::read_transcripts(&run).unwrap() {
        assert!(t.turns.len() <= 15);
    }

    // The key reached the endpoint but no file on disk.
    assert!(server.recorded().iter().all(|r| r.header("authorization") == Some("Bearer sk-kill-test-secret")));
    for entry in walk(&run) {
        assert!(!fs::read_to_string(&entry).unwrap().contains("sk-kill-test-secret"), "{}", entry.display());
    }
    format!("killed at {} of {} transcripts, resumed to {} unique", partial.len(), records.len(), ids.len())
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}
