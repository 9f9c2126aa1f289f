//! Find the Impostors: identify every impostor through majority queries on
//! groups of three players.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{join, rng_for};
use crate::protocol::{CommandGrammar, CommandKind, ParsedCommand, PayloadShape};
use crate::task::{
    Category, Difficulty, Game, Generated, Params, Reply, Setup, TaskError, Verdict,
};

pub const ID: &str = "find_the_impostors";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImpostorState {
    pub n: usize,
    /// One entry per player: 0 = impostor, 1 = crewmate.
    pub assignment: Vec<u8>,
    pub k: usize,
}

impl ImpostorState {
    pub fn from_bits(bits: &str) -> Self {
        let assignment: Vec<u8> = bits.bytes().map(|b| b - b'0').collect();
        let k = assignment.iter().filter(|&&b| b == 0).count();
        Self {
            n: assignment.len(),
            assignment,
            k,
        }
    }

    /// 1-based indices of the impostors.
    pub fn impostors(&self) -> Vec<usize> {
        (1..=self.n).filter(|&i| self.assignment[i - 1] == 0).collect()
    }

    pub fn bits(&self) -> String {
        self.assignment.iter().map(|b| char::from(b'0' + b)).collect()
    }
}

/// Open interval `(n/3, 2n/3)` of admissible impostor counts, as integers.
pub fn impostor_count_range(n: usize) -> Option<(usize, usize)> {
    let lo = n / 3 + 1;
    let hi = (2 * n).checked_sub(1)? / 3;
    (lo <= hi).then_some((lo, hi))
}

/// Monitor answer to a triple query: `"0"` for impostor majority, `"1"` otherwise.
pub fn majority_response(state: &ImpostorState, triple: [usize; 3]) -> Option<&'static str> {
    let distinct = triple[0] != triple[1] && triple[1] != triple[2] && triple[0] != triple[2];
    if !distinct || triple.iter().any(|&i| i < 1 || i > state.n) {
        return None;
    }
    let impostors = triple.iter().filter(|&&i| state.assignment[i - 1] == 0).count();
    Some(if impostors >= 2 { "0" } else { "1" })
}

pub struct FindTheImpostors {
    grammar: CommandGrammar,
}

impl FindTheImpostors {
    pub fn new() -> Self {
        Self {
            grammar: CommandGrammar::new(&[
                ("My Query", CommandKind::Query, PayloadShape::Integers),
                ("My Answer", CommandKind::Answer, PayloadShape::Integers),
            ]),
        }
    }
}

impl Default for FindTheImpostors {
    fn default() -> Self {
        Self::new()
    }
}

fn third(n: usize, num: usize) -> String {
    if (num * n).is_multiple_of(3) {
        (num * n / 3).to_string()
    } else {
        format!("{}/3", num * n)
    }
}

fn problem_text(n: usize) -> String {
    format!(
        "Let's play Find the Impostors! Your task is to identify all impostors among {n} players.

Rules:
1. There are {n} players
2. Some players are impostors (k) and others are crewmates ({n}-k)
3. The number of impostors k is strictly between {lo} and {hi}

Query Types:
1. Ask about three players:
   Format: \"My Query: a,b,c\" (three different player numbers)
   Response will be:
   - 0: if there are more impostors than crewmates among these three
   - 1: if there are more crewmates or equal numbers
   - -1: if query is invalid

2. Submit final answer:
   Format: \"My Answer: x1,x2,...,xk\"
   (the indices of all k impostors)
   Response will be:
   - Incorrect: if the set is wrong
   - Correct: if the set is exactly the impostors

Example interaction:
You: \"My Query: 1,2,3\"
Me: \"0\" (means more impostors in this group)
You: \"My Query: 3,4,5\"
Me: \"1\" (means more crewmates in this group)
You: \"My Answer: 1,2,3,4\"
Me: \"Correct\" (if correct)

Instructions:
1. You must explain your reasoning before each query
2. Format your responses exactly as shown above

Remember:
- Player numbers must be between 1 and {n}
- All three numbers in a query must be different

Ready to start? Make your first query!",
        lo = third(n, 1),
        hi = third(n, 2),
    )
}

impl Game for FindTheImpostors {
    type State = ImpostorState;

    fn id(&self) -> &'static str {
        ID
    }

    fn category(&self) -> Category {
        Category::IP
    }

    fn level_size(&self, difficulty: Difficulty) -> u32 {
        difficulty.pick([6, 9, 12])
    }

    fn grammar(&self) -> &CommandGrammar {
        &self.grammar
    }

    fn generate(&self, setup: &Setup) -> Result<Generated<ImpostorState>, TaskError> {
        let n = setup.size as usize;
        let (lo, hi) = impostor_count_range(n).ok_or(TaskError::GenerationFailure {
            task: ID.into(),
            attempts: 0,
        })?;
        let mut rng = rng_for(setup.seed);
        let k = rng.random_range(lo..=hi);
        let mut assignment: Vec<u8> = (0..n).map(|i| u8::from(i >= k)).collect();
        assignment.shuffle(&mut rng);
        let state = ImpostorState { n, assignment, k };
        let mut params = Params::new();
        params.insert("n".into(), n as i64);
        Ok(Generated {
            objective: format!(
                "impostor assignment {} (impostors {})",
                state.bits(),
                join(state.impostors(), ",")
            ),
            problem_text: problem_text(n),
            params,
            state,
        })
    }

    fn respond(&self, state: &mut ImpostorState, command: &ParsedCommand) -> Reply {
        let numbers = command.integers().unwrap_or_default();
        match command.kind {
            CommandKind::Query => {
                let triple = match numbers.as_slice() {
                    &[a, b, c] if a > 0 && b > 0 && c > 0 => [a as usize, b as usize, c as usize],
                    _ => return Reply::new("-1", Verdict::Invalid),
                };
                match majority_response(state, triple) {
                    Some(r) => Reply::new(r, Verdict::Continue),
                    None => Reply::new("-1", Verdict::Invalid),
                }
            }
            CommandKind::Answer => {
                let claimed: BTreeSet<i64> = numbers.iter().copied().collect();
                let actual: BTreeSet<i64> = state.impostors().into_iter().map(|i| i as i64).collect();
                if claimed.len() == numbers.len() && claimed == actual {
                    Reply::new("Correct", Verdict::Solved)
                } else {
                    Reply::new("Incorrect", Verdict::Continue)
                }
            }
            _ => Reply::new("-1", Verdict::Invalid),
        }
    }

    fn check(&self, state: &ImpostorState) -> Result<(), String> {
        let zeros = state.assignment.iter().filter(|&&b| b == 0).count();
        if state.assignment.len() != state.n || zeros != state.k {
            return Err("assignment does not match n/k".into());
        }
        if 3 * state.k <= state.n || 3 * state.k >= 2 * state.n {
            return Err(format!("k={} outside (n/3, 2n/3) for n={}", state.k, state.n));
        }
        Ok(())
    }
}
