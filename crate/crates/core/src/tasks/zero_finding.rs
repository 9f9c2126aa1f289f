//! Zero Finding: locate the k-th zero of a hidden bit array with range-sum
//! queries. Reported non-target zeros flip to one, shifting the ordinals.

use rand::seq::index::sample;
use rand::Rng;

use super::{ordinal, rng_for};
use crate::protocol::{CommandGrammar, CommandKind, ParsedCommand, PayloadShape};
use crate::task::{
    Category, Difficulty, Game, Generated, Params, Reply, Setup, TaskError, Verdict,
};

pub const ID: &str = "zero_finding";

pub const FLIP_FEEDBACK: &str = "Correct! Non-target zero found and turned to 1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroFindState {
    pub n: usize,
    pub array: Vec<u8>,
    pub k: usize,
    pub mutations: usize,
}

impl ZeroFindState {
    pub fn from_bits(bits: &str, k: usize) -> Self {
        let array: Vec<u8> = bits.bytes().map(|b| b - b'0').collect();
        Self {
            n: array.len(),
            array,
            k,
            mutations: 0,
        }
    }

    pub fn zeros(&self) -> usize {
        self.array.iter().filter(|&&b| b == 0).count()
    }

    /// 1-based position of the k-th zero of the current array.
    pub fn target(&self) -> Option<usize> {
        self.array
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 0)
            .nth(self.k.checked_sub(1)?)
            .map(|(i, _)| i + 1)
    }

    pub fn range_sum(&self, l: usize, r: usize) -> u32 {
        self.array[l - 1..r].iter().map(|&b| u32::from(b)).sum()
    }
}

pub struct ZeroFinding {
    grammar: CommandGrammar,
}

impl ZeroFinding {
    pub fn new() -> Self {
        Self {
            grammar: CommandGrammar::new(&[
                ("My Query", CommandKind::Query, PayloadShape::Integers),
                ("My Answer", CommandKind::Answer, PayloadShape::Integers),
                ("My Final Answer", CommandKind::FinalAnswer, PayloadShape::Integers),
            ]),
        }
    }
}

impl Default for ZeroFinding {
    fn default() -> Self {
        Self::new()
    }
}

fn problem_text(n: usize, k: usize) -> String {
    let kth = ordinal(k);
    format!(
        "Let's play Zero Finding Game! Your task is to find the {kth} zero in a hidden binary array through range sum queries.

Rules:
1. There is a hidden array of {n} elements (all 0s and 1s)
2. You need to find the {kth} zero
3. Each time you find a non-target zero (not the {kth}), it turns into 1
4. The game continues until you find the {kth} zero

Query Types:
1. To make a range sum query:
   Format: \"My Query: l r\"
   where:
   - l and r are positions (1-based indexing)
   - l <= r <= {n}
   Example: \"My Query: 4 6\"
   Response will be the sum of elements in positions l to r

2. To submit temporary answer:
   Format: \"My Answer: x\"
   where x is position of a zero that is not the {kth} zero
   Example: \"My Answer: 5\"

3. To submit final answer:
   Format: \"My Final Answer: x\"
   where x is position of the {kth} zero
   Example: \"My Final Answer: 3\"

Example Interaction:
Finding 2nd zero:
You: \"My Query: 4 6\"
Me: \"1\" (sum in range [4,6])
You: \"My Answer: 5\"
Me: \"Correct! Non-target zero found and turned to 1\"
You: \"My Final Answer: 3\"
Me: \"Correct! You found the 2nd zero!\"

Instructions:
1. Game Process:
   - Make queries to locate zeros
   - Use \"My Answer\" for zeros other than the {kth}
   - Use \"My Final Answer\" for the {kth} zero
   - Array updates when non-target zeros are found
2. Use exactly the formats shown above
3. Explain your reasoning before each action

Remember:
- Array only contains 0s and 1s
- Position indices start from 1
- Non-target zeros turn into 1 when found
- Each query shows sum in range
- Use different formats for target and non-target zeros

Ready to start? Make your first query!"
    )
}

impl Game for ZeroFinding {
    type State = ZeroFindState;

    fn id(&self) -> &'static str {
        ID
    }

    fn category(&self) -> Category {
        Category::DA
    }

    fn level_size(&self, difficulty: Difficulty) -> u32 {
        difficulty.pick([10, 50, 100])
    }

    fn grammar(&self) -> &CommandGrammar {
        &self.grammar
    }

    fn generate(&self, setup: &Setup) -> Result<Generated<ZeroFindState>, TaskError> {
        let n = setup.size as usize;
        let half = n / 2;
        if half < 3 {
            return Err(TaskError::GenerationFailure {
                task: ID.into(),
                attempts: 0,
            });
        }
        let mut rng = rng_for(setup.seed);
        let k = rng.random_range(1..=(half - 2).min(5));
        let zeros = rng.random_range(k + 2..=half);
        let mut array = vec![1u8; n];
        for i in sample(&mut rng, n, zeros) {
            array[i] = 0;
        }
        let state = ZeroFindState {
            n,
            array,
            k,
            mutations: 0,
        };
        let bits: String = state.array.iter().map(|b| char::from(b'0' + b)).collect();
        let mut params = Params::new();
        params.insert("n".into(), n as i64);
        params.insert("k".into(), k as i64);
        Ok(Generated {
            objective: format!(
                "{} zero of array {bits} (initially at position {})",
                ordinal(k),
                state.target().expect("k <= zeros")
            ),
            problem_text: problem_text(n, k),
            params,
            state,
        })
    }

    fn respond(&self, state: &mut ZeroFindState, command: &ParsedCommand) -> Reply {
        let numbers = command.integers().unwrap_or_default();
        let position = |v: i64| (v >= 1 && v as usize <= state.n).then_some(v as usize);
        match (command.kind, numbers.as_slice()) {
            (CommandKind::Query, &[l, r]) => match (position(l), position(r)) {
                (Some(l), Some(r)) if l <= r => {
                    Reply::new(state.range_sum(l, r).to_string(), Verdict::Continue)
                }
                _ => Reply::new("Invalid", Verdict::Invalid),
            },
            (CommandKind::Answer, &[x]) => match position(x) {
                Some(x) => {
                    let flippable = state.array[x - 1] == 0
                        && state.target() != Some(x)
                        && state.zeros() > state.k;
                    if flippable {
                        state.array[x - 1] = 1;
                        state.mutations += 1;
                        Reply::new(FLIP_FEEDBACK, Verdict::Continue)
                    } else {
                        Reply::new("Incorrect", Verdict::Continue)
                    }
                }
                None => Reply::new("Invalid", Verdict::Invalid),
            },
            (CommandKind::FinalAnswer, &[x]) => match position(x) {
                Some(x) if state.target() == Some(x) => Reply::new(
                    format!("Correct! You found the {} zero!", ordinal(state.k)),
                    Verdict::Solved,
                ),
                Some(_) => Reply::new("Incorrect", Verdict::Fatal),
                None => Reply::new("Invalid", Verdict::Invalid),
            },
            _ => Reply::new("Invalid", Verdict::Invalid),
        }
    }

    fn check(&self, state: &ZeroFindState) -> Result<(), String> {
        if state.k == 0 || state.zeros() < state.k + 2 || state.array.len() != state.n {
            return Err(format!("need at least k+2 zeros, have {}", state.zeros()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cmd(kind: CommandKind, p: &str) -> ParsedCommand {
        ParsedCommand::new(kind, p)
    }

    #[test]
    fn walkthrough() {
        let game = ZeroFinding::new();
        let mut s = ZeroFindState::from_bits("0100011111", 2);
        assert_eq!(s.target(), Some(3));
        assert_eq!(game.respond(&mut s, &cmd(CommandKind::Query, "4 6")).feedback, "1");
        assert_eq!(game.respond(&mut s, &cmd(CommandKind::Answer, "5")).feedback, FLIP_FEEDBACK);
        assert_eq!(s.array[4], 1);
        let r = game.respond(&mut s, &cmd(CommandKind::FinalAnswer, "3"));
        assert_eq!(r, Reply::new("Correct! You found the 2nd zero!", Verdict::Solved));
    }

    #[test]
    fn all_ones_segment_sums_to_length() {
        let game = ZeroFinding::new();
        let mut s = ZeroFindState::from_bits("0001111111", 1);
        assert_eq!(game.respond(&mut s, &cmd(CommandKind::Query, "4 10")).feedback, "7");
        assert_eq!(game.respond(&mut s, &cmd(CommandKind::Query, "6 6")).feedback, "1");
    }

    #[test]
    fn final_answer_enumeration() {
        let game = ZeroFinding::new();
        let base = ZeroFindState::from_bits("1001011011", 2);
        for x in 1..=10 {
            let mut s = base.clone();
            let r = game.respond(&mut s, &cmd(CommandKind::FinalAnswer, &x.to_string()));
            let expected = if x == 3 { Verdict::Solved } else { Verdict::Fatal };
            assert_eq!(r.verdict, expected, "position {x}");
        }
    }

    #[test]
    fn target_and_ones_do_not_flip() {
        let game = ZeroFinding::new();
        let mut s = ZeroFindState::from_bits("0100011111", 2);
        assert_eq!(game.respond(&mut s, &cmd(CommandKind::Answer, "3")).feedback, "Incorrect");
        assert_eq!(game.respond(&mut s, &cmd(CommandKind::Answer, "2")).feedback, "Incorrect");
        assert_eq!(s.mutations, 0);
    }

    #[test]
    fn flips_never_drop_below_k_zeros() {
        let game = ZeroFinding::new();
        let mut s = ZeroFindState::from_bits("0000111111", 3);
        for x in 1..=4 {
            game.respond(&mut s, &cmd(CommandKind::Answer, &x.to_string()));
            assert!(s.zeros() >= s.k);
            assert!(s.target().is_some());
        }
        assert_eq!(s.zeros(), 3);
    }

    #[test]
    fn bad_bounds_are_invalid() {
        let game = ZeroFinding::new();
        let mut s = ZeroFindState::from_bits("0100011111", 2);
        for p in ["6 4", "0 3", "3 11", "3"] {
            assert_eq!(game.respond(&mut s, &cmd(CommandKind::Query, p)).verdict, Verdict::Invalid, "{p}");
        }
    }

    #[test]
    fn generation_slack() {
        let game = ZeroFinding::new();
        for level in Difficulty::ALL {
            for seed in 0..100 {
                let g = game.generate(&Setup { difficulty: level, size: game.level_size(level), seed }).unwrap();
                game.check(&g.state).unwrap();
                assert!((1..=5).contains(&g.state.k));
                assert!(g.state.zeros() <= g.state.n / 2);
            }
        }
    }
}
