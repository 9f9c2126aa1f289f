//! Template examples reproduced end to end.

use turnbench_core::protocol::replay;
use turnbench_core::task::Hidden;
use turnbench_core::tasks::password::{password_transform, PasswordState};
use turnbench_core::tasks::words::feedback;
use turnbench_core::tasks::zero_finding::{ZeroFindState, FLIP_FEEDBACK};
use turnbench_core::{Difficulty, Registry, Status, TaskInstance, TaskOptions};

fn instance_with(registry: &Registry, task: &str, hidden: Hidden) -> TaskInstance {
    let mut instance = registry.lookup(task).unwrap().generate(Difficulty::Easy, 1).unwrap();
    instance.hidden = hidden;
    instance
}

#[test]
fn password_digit_example() {
    assert_eq!(password_transform(6, 5, 2, 0, 10), 3);
}

#[test]
fn word_feedback_example() {
    assert_eq!(feedback(b"ABCDUVWZGHIJ", b"ACEFOPQMKLLM"), "RGWWWWWWWWWW");
}

#[test]
fn zero_finding_walkthrough() {
    let registry = Registry::standard(&TaskOptions::default()).unwrap();
    let task = registry.lookup("zero_finding").unwrap();
    let instance = instance_with(&registry, "zero_finding", Hidden::new(ZeroFindState::from_bits("0100011111", 2)));
    let transcript = replay(
        task.as_ref(),
        &instance,
        &[
            "The 2nd zero is somewhere in the array; checking positions 4 through 6 first.\nMy Query: 4 6",
            "Only one 1 among three cells, so two zeros there. Position 5 looks like a zero.\nMy Answer: 5",
            "Position 3 must be the 2nd zero.\nMy Final Answer: 3",
        ],
    );
    let feedback: Vec<&str> = transcript.turns.iter().map(|t| t.feedback.as_str()).collect();
    assert_eq!(feedback, ["1", FLIP_FEEDBACK, "Correct! You found the 2nd zero!"]);
    assert_eq!(transcript.final_status, Status::Solved);
    assert_eq!(transcript.solved_turn, Some(3));
}

/// Parameter triples `(k, m, n)` reproducing the template interaction:
/// password 5, guesses 3 and 5 wrong, guess 8 right.
fn walkthrough_parameters() -> Vec<(u32, i64, i64)> {
    let mut found = Vec::new();
    for k in 2..=4 {
        for m in 0..=5 {
            for n in 0..=15 {
                let range = m..=m + n;
                if ![3, 5, 8].iter().all(|v| range.contains(v)) {
                    continue;
                }
                let x1 = password_transform(5, 3, k, m, n);
                if x1 == 5 {
                    continue;
                }
                if password_transform(x1, 5, k, m, n) == 8 {
                    found.push((k, m, n));
                }
            }
        }
    }
    found
}

#[test]
fn password_walkthrough() {
    let params = walkthrough_parameters();
    assert!(params.contains(&(2, 2, 6)), "{params:?}");
    let registry = Registry::standard(&TaskOptions::default()).unwrap();
    let task = registry.lookup("password_breaking").unwrap();
    let instance = instance_with(
        &registry,
        "password_breaking",
        Hidden::new(PasswordState { m: 2, n: 6, k: 2, current: 5 }),
    );
    let transcript = replay(task.as_ref(), &instance, &["My Guess: 3", "My Guess: 5", "My Guess: 8"]);
    let feedback: Vec<&str> = transcript.turns.iter().map(|t| t.feedback.as_str()).collect();
    assert_eq!(feedback, ["Incorrect", "Incorrect", "Correct"]);
    let state = PasswordState { m: 2, n: 6, k: 2, current: 5 };
    assert_eq!(password_transform(state.current, 3, state.k, state.m, state.n), 8);
}
