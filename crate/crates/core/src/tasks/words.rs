//! Word guessing with R/G/W positional feedback.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::Rng;

use super::rng_for;
use crate::protocol::{CommandGrammar, CommandKind, ParsedCommand, PayloadShape};
use crate::task::{
    Category, Difficulty, Game, Generated, Params, Reply, Setup, TaskError, TaskOptions, Verdict,
};

pub const ID: &str = "word_guessing";

/// Four-letter English words shipped with the crate.
pub const BUNDLED_WORDS4: &str = include_str!("../../data/words4.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordState {
    pub n: usize,
    /// Uppercase ASCII letters.
    pub target: Vec<u8>,
    pub from_dictionary: bool,
}

/// R/G/W feedback of `guess` against `target`, both uppercase and of equal
/// length. Exact matches first; then each remaining guess letter, left to
/// right, takes a G while unmatched target copies of it remain.
pub fn feedback(target: &[u8], guess: &[u8]) -> String {
    debug_assert_eq!(target.len(), guess.len());
    let mut out = vec![b'W'; guess.len()];
    let mut unmatched = [0u8; 26];
    for (i, (&t, &g)) in target.iter().zip(guess).enumerate() {
        if t == g {
            out[i] = b'R';
        } else {
            unmatched[(t - b'A') as usize] += 1;
        }
    }
    for (i, &g) in guess.iter().enumerate() {
        if out[i] == b'R' {
            continue;
        }
        let slot = &mut unmatched[(g - b'A') as usize];
        if *slot > 0 {
            *slot -= 1;
            out[i] = b'G';
        }
    }
    String::from_utf8(out).expect("ascii")
}

/// Words grouped by length, all uppercase and deduplicated.
pub fn parse_wordlist(text: &str) -> BTreeMap<usize, Vec<String>> {
    let mut lists: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for line in text.lines() {
        let w = line.trim().to_ascii_uppercase();
        if !w.is_empty() && w.bytes().all(|b| b.is_ascii_uppercase()) {
            lists.entry(w.len()).or_default().push(w);
        }
    }
    for words in lists.values_mut() {
        words.sort();
        words.dedup();
    }
    lists
}

pub struct WordGuessing {
    grammar: CommandGrammar,
    lists: BTreeMap<usize, Vec<String>>,
    require_words: bool,
}

impl WordGuessing {
    pub fn new() -> Self {
        Self {
            grammar: CommandGrammar::new(&[("My Guess", CommandKind::Guess, PayloadShape::Token)]),
            lists: parse_wordlist(BUNDLED_WORDS4),
            require_words: false,
        }
    }

    pub fn from_options(options: &TaskOptions) -> Result<Self, TaskError> {
        let mut game = Self::new();
        game.require_words = options.require_words;
        if let Some(path) = &options.wordlist {
            game.add_wordlist_file(path)?;
        }
        Ok(game)
    }

    pub fn add_wordlist_file(&mut self, path: &Path) -> Result<(), TaskError> {
        let text = std::fs::read_to_string(path).map_err(|source| TaskError::Wordlist {
            path: path.to_path_buf(),
            source,
        })?;
        for (len, words) in parse_wordlist(&text) {
            let list = self.lists.entry(len).or_default();
            list.extend(words);
            list.sort();
            list.dedup();
        }
        Ok(())
    }

    pub fn wordlist(&self, len: usize) -> Option<&[String]> {
        self.lists.get(&len).map(Vec::as_slice).filter(|l| !l.is_empty())
    }
}

impl Default for WordGuessing {
    fn default() -> Self {
        Self::new()
    }
}

fn problem_text(n: usize) -> String {
    format!(
        "Let's play Letters Finding! Your task is to guess a {n}-letter English word.

Rules:
1. You must provide exactly ONE {n}-letter English word as your guess
2. After each guess, you'll receive feedback using these symbols:
   - R: Correct letter in the correct position
   - G: Correct letter but in the wrong position
   - W: Wrong letter, not in the word

Example:
If the target word is ABCDUVWZGHIJ
- Guess ACEFOPQMKLLM would get: RGWWWWWWWWWW
  (A is correct position, C is correct but wrong position, rest are wrong)

Query Type:
1. Make a guess:
   Format: \"My Guess: [YOUR {n}-LETTER WORD]\"
   Response will be:
   - A {n}-character string using R, G, and W
   - R: right letter, right position
   - G: right letter, wrong position
   - W: wrong letter

Instructions:
1. Make your guess based on previous feedback (if any)
2. Guess only one word at a time
3. Give your reasoning process before each guess

Remember:
- Each guess must be exactly {n} letters long
- The same letter can appear multiple times
- Guesses need not be real English words
- Use feedback wisely to deduce the target word

Ready to start? Make your first query!"
    )
}

impl Game for WordGuessing {
    type State = WordState;

    fn id(&self) -> &'static str {
        ID
    }

    fn category(&self) -> Category {
        Category::IP
    }

    fn level_size(&self, difficulty: Difficulty) -> u32 {
        difficulty.pick([4, 8, 12])
    }

    fn grammar(&self) -> &CommandGrammar {
        &self.grammar
    }

    fn generate(&self, setup: &Setup) -> Result<Generated<WordState>, TaskError> {
        let n = setup.size as usize;
        let mut rng = rng_for(setup.seed);
        let (target, from_dictionary) = match self.wordlist(n) {
            Some(list) => (list.choose(&mut rng).expect("non-empty").as_bytes().to_vec(), true),
            None if self.require_words => return Err(TaskError::WordlistMissing(n)),
            None => ((0..n).map(|_| b'A' + rng.random_range(0..26u8)).collect(), false),
        };
        let state = WordState {
            n,
            target,
            from_dictionary,
        };
        let mut params = Params::new();
        params.insert("n".into(), n as i64);
        params.insert("dictionary".into(), i64::from(from_dictionary));
        Ok(Generated {
            objective: format!("target word {}", String::from_utf8_lossy(&state.target)),
            problem_text: problem_text(n),
            params,
            state,
        })
    }

    fn respond(&self, state: &mut WordState, command: &ParsedCommand) -> Reply {
        if command.kind != CommandKind::Guess {
            return Reply::new("Invalid", Verdict::Invalid);
        }
        let guess = command.payload.trim().to_ascii_uppercase();
        if guess.len() != state.n || !guess.bytes().all(|b| b.is_ascii_uppercase()) {
            return Reply::new("Invalid", Verdict::Invalid);
        }
        let fb = feedback(&state.target, guess.as_bytes());
        let verdict = if fb.bytes().all(|b| b == b'R') {
            Verdict::Solved
        } else {
            Verdict::Continue
        };
        Reply::new(fb, verdict)
    }

    fn check(&self, state: &WordState) -> Result<(), String> {
        if state.target.len() != state.n || !state.target.iter().all(u8::is_ascii_uppercase) {
            return Err("target must be n uppercase letters".into());
        }
        Ok(())
    }
}
