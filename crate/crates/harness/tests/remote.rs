//! Remote player against a local mock endpoint.

mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use common::{oracle_handler, MockServer, Reply};
use turnbench::endpoint::{ApiKey, EndpointConfig, RemotePlayer};
use turnbench::runner::run_session;
use turnbench_core::protocol::{play, ChatMessage, Player, PlayerError, Role};
use turnbench_core::{Difficulty, Registry, Status, TaskInstance, TaskOptions, DEFAULT_MAX_TURNS};

fn registry() -> Registry {
    Registry::standard(&TaskOptions::default()).unwrap()
}

fn config(server: &MockServer) -> EndpointConfig {
    let mut c = EndpointConfig::new(&server.url, "mock-model");
    c.retry_backoff_ms = 5;
    c.timeout_secs = 5;
    c
}

fn instance(reg: &Registry, task: &str) -> TaskInstance {
    reg.lookup(task).unwrap().generate(Difficulty::Easy, 4).unwrap()
}

#[test]
fn first_message_is_the_problem_and_history_is_resent() {
    let reg = registry();
    let inst = instance(&reg, "find_the_impostors");
    let server = MockServer::start(oracle_handler(&[inst.record()]));
    let mut player = RemotePlayer::new(config(&server), Some(ApiKey::new("sk-unit")));
    let task = reg.lookup("find_the_impostors").unwrap();
    let t = play(task.as_ref(), &inst, &mut player, DEFAULT_MAX_TURNS);
    assert_eq!(t.final_status, Status::Solved);
    let requests = server.recorded();
    assert_eq!(requests.len(), t.turns.len());
    for (i, r) in requests.iter().enumerate() {
        let messages = r.contents();
        assert_eq!(messages.len(), 2 * i + 1);
        assert_eq!(messages[0], ("user".to_string(), inst.problem_text.clone()));
        for (j, turn) in t.turns[..i].iter().enumerate() {
            assert_eq!(messages[2 * j + 1], ("assistant".to_string(), turn.player_message.clone()));
            assert_eq!(messages[2 * j + 2], ("user".to_string(), turn.feedback.clone()));
        }
        assert_eq!(r.header("authorization"), Some("Bearer sk-unit"));
        assert_eq!(r.json()["model"], "mock-model");
        assert!(r.json().get("temperature").is_none());
    }
    let written = serde_json::to_string(&t).unwrap();
    assert!(!written.contains("sk-unit"));
    assert_eq!(t.player["kind"], "remote");
    assert_eq!(t.player["model"], "mock-model");
}

#[test]
fn transport_errors_are_retried() {
    let calls = Arc::new(AtomicUsize::new(0));
    let seen = calls.clone();
    let server = MockServer::start(Arc::new(move |_, _| {
        if seen.fetch_add(1, Ordering::SeqCst) < 2 {
            Reply::Status(503, "{}".into())
        } else {
            Reply::Content("My Guess: 1".into())
        }
    }));
    let mut player = RemotePlayer::new(config(&server), None);
    assert_eq!(player.reply(&[ChatMessage::user("p")]).unwrap(), "My Guess: 1");
    assert_eq!(calls.load(Ordering::SeqCst), 3);
    assert!(server.recorded()[0].header("authorization").is_none());
}

#[test]
fn client_errors_are_not_retried() {
    let server = MockServer::start(Arc::new(|_, _| Reply::Status(400, r#"{"error":"bad"}"#.into())));
    let mut player = RemotePlayer::new(config(&server), None);
    let err = player.reply(&[ChatMessage::user("p")]).unwrap_err();
    assert!(matches!(err, PlayerError::Failed(_)), "{err:?}");
    assert_eq!(server.recorded().len(), 1);
}

#[test]
fn retries_are_bounded() {
    let server = MockServer::start(Arc::new(|_, _| Reply::Status(500, "{}".into())));
    let mut c = config(&server);
    c.max_retries = 2;
    let mut player = RemotePlayer::new(c, None);
    assert!(player.reply(&[ChatMessage::user("p")]).is_err());
    assert_eq!(server.recorded().len(), 3);
}

#[test]
fn malformed_model_text_is_data_not_an_error() {
    let reg = registry();
    let inst = instance(&reg, "zero_finding");
    let server = MockServer::start(Arc::new(|_, _| Reply::Content("hello".into())));
    let mut player = RemotePlayer::new(config(&server), None);
    let task = reg.lookup("zero_finding").unwrap();
    let t = play(task.as_ref(), &inst, &mut player, DEFAULT_MAX_TURNS);
    assert_eq!(t.final_status, Status::TurnLimitExceeded);
    assert_eq!(t.turns.len(), 15);
    assert_eq!(t.invalid_count(), 15);
    assert!(t.turns.iter().all(|turn| turn.player_message == "hello"));
    assert_eq!(server.recorded().len(), 15);
}

#[test]
fn timeouts_end_the_session_with_a_tag() {
    let reg = registry();
    let inst = instance(&reg, "password_breaking");
    let server = MockServer::start(Arc::new(|_, _| Reply::Delay(Duration::from_secs(3), Box::new(Reply::Content("late".into())))));
    let mut c = config(&server);
    c.timeout_secs = 1;
    c.max_retries = 0;
    let factory = move |_: &TaskInstance| -> Result<Box<dyn Player>, PlayerError> { Ok(Box::new(RemotePlayer::new(c.clone(), None))) };
    let t = run_session(&reg, &inst, &factory, DEFAULT_MAX_TURNS);
    assert_eq!(t.final_status, Status::Failed);
    assert!(t.turns.is_empty());
    assert_eq!(t.failure.as_ref().unwrap().tag, "player_timeout");
}

#[test]
fn null_content_becomes_an_empty_turn() {
    let server = MockServer::start(Arc::new(|_, _| {
        Reply::Status(200, r#"{"choices":[{"message":{"role":"assistant","content":null}}]}"#.into())
    }));
    let mut player = RemotePlayer::new(config(&server), None);
    assert_eq!(player.reply(&[ChatMessage::user("p")]).unwrap(), "");
    let messages = [ChatMessage { role: Role::User, content: "x".into() }];
    assert!(player.reply(&messages).is_ok());
}
