//! Oracles through the real session loop: exhaustive small cases, turn
//! bounds, replay determinism and calibration sanity.

use turnbench_core::oracles::{calibrate, solve, OracleError};
use turnbench_core::protocol::replay;
use turnbench_core::task::Hidden;
use turnbench_core::tasks::impostors::{impostor_count_range, ImpostorState};
use turnbench_core::tasks::zero_finding::ZeroFindState;
use turnbench_core::{Difficulty, Registry, Status, TaskOptions, DEFAULT_MAX_TURNS};

fn registry() -> Registry {
    Registry::standard(&TaskOptions::default()).unwrap()
}

fn impostor_assignments(n: usize) -> Vec<String> {
    let (lo, hi) = impostor_count_range(n).unwrap();
    (0u32..1 << n)
        .filter(|m| (lo..=hi).contains(&(n - m.count_ones() as usize)))
        .map(|m| (0..n).map(|i| if m >> i & 1 == 1 { '1' } else { '0' }).collect())
        .collect()
}

#[test]
fn impostor_oracle_solves_every_assignment() {
    let reg = registry();
    let task = reg.lookup("find_the_impostors").unwrap();
    for (level, n) in [(Difficulty::Easy, 6), (Difficulty::Medium, 9)] {
        let template = task.generate(level, 3).unwrap();
        let assignments = impostor_assignments(n);
        assert!(!assignments.is_empty());
        for bits in assignments {
            let mut instance = template.clone();
            instance.hidden = Hidden::new(ImpostorState::from_bits(&bits));
            let result = solve(task.as_ref(), &instance).unwrap();
            assert!(result.solved, "{bits}: {:?}", result.transcript.turns);
            assert!(result.turns_used <= DEFAULT_MAX_TURNS);
        }
    }
}

#[test]
fn zero_finding_oracle_stays_within_bisection_bound() {
    let reg = registry();
    let task = reg.lookup("zero_finding").unwrap();
    for level in Difficulty::ALL {
        for seed in 0..30 {
            let instance = task.generate(level, seed).unwrap();
            let n = instance.params["n"] as u32;
            let result = solve(task.as_ref(), &instance).unwrap();
            assert!(result.solved, "{}", instance.instance_id);
            let bound = (n as f64).log2().ceil() as u32 + 1;
            assert!(result.turns_used <= bound, "{} used {}", instance.instance_id, result.turns_used);
        }
    }
}

#[test]
fn zero_finding_oracle_handles_fixed_arrays() {
    let reg = registry();
    let task = reg.lookup("zero_finding").unwrap();
    let template = task.generate(Difficulty::Easy, 0).unwrap();
    let k = template.params["k"] as usize;
    let n = template.params["n"] as usize;
    for zeros_at in [vec![1, 2, 3, 4, 5], vec![6, 7, 8, 9, 10], vec![1, 3, 5, 7, 9]] {
        let mut bits = vec![b'1'; n];
        for &z in &zeros_at {
            bits[z - 1] = b'0';
        }
        let mut instance = template.clone();
        instance.hidden = Hidden::new(ZeroFindState::from_bits(std::str::from_utf8(&bits).unwrap(), k));
        assert!(solve(task.as_ref(), &instance).unwrap().solved, "{zeros_at:?}");
    }
}

#[test]
fn replaying_oracle_messages_reproduces_transcripts() {
    let reg = registry();
    for id in reg.ids().collect::<Vec<_>>() {
        let task = reg.lookup(id).unwrap();
        for level in Difficulty::ALL {
            let instance = task.generate(level, 11).unwrap();
            let first = solve(task.as_ref(), &instance).unwrap().transcript;
            let messages: Vec<&str> = first.turns.iter().map(|t| t.player_message.as_str()).collect();
            let rebuilt = reg.regenerate(&instance.record()).unwrap();
            let second = replay(task.as_ref(), &rebuilt, &messages);
            assert_eq!(first.turns, second.turns, "{}", instance.instance_id);
            assert_eq!(first.final_status, second.final_status);
            assert_eq!(first.solved_turn, second.solved_turn);
        }
    }
}

#[test]
fn every_transcript_respects_the_turn_cap() {
    let reg = registry();
    for id in reg.ids().collect::<Vec<_>>() {
        let task = reg.lookup(id).unwrap();
        for seed in 0..5 {
            let instance = task.generate(Difficulty::Hard, seed).unwrap();
            let t = solve(task.as_ref(), &instance).unwrap().transcript;
            assert!(t.turns.len() <= DEFAULT_MAX_TURNS as usize);
            if t.turns.len() == DEFAULT_MAX_TURNS as usize && t.final_status != Status::Solved {
                assert!(matches!(t.final_status, Status::TurnLimitExceeded | Status::Failed));
            }
        }
    }
}

#[test]
fn calibration_rows_are_sorted_and_bounded() {
    let reg = registry();
    let rows = calibrate(&reg, "find_the_impostors", &[12, 6, 9], 5).unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), [6, 9, 12]);
    for r in &rows {
        assert!((0.0..=1.0).contains(&r.solve_rate));
        assert_eq!(r.trials, 5);
    }
    // More players never make the scripted solver faster on average.
    let turns: Vec<f64> = rows.iter().filter_map(|r| r.mean_turns).collect();
    assert!(turns.windows(2).all(|w| w[0] <= w[1]), "{turns:?}");
    assert!(calibrate(&reg, "find_the_impostors", &[6], 0).unwrap().is_empty());
    assert!(matches!(calibrate(&reg, "no_such_task", &[6], 3), Err(OracleError::NoOracle(_)) | Err(OracleError::Task(_))));
}
