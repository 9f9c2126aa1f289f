//! Password Breaker: every wrong guess rewrites the password with a digit-wise
//! base-k sum of the old password and the guess.

use rand::Rng;

use super::rng_for;
use crate::protocol::{CommandGrammar, CommandKind, ParsedCommand, PayloadShape};
use crate::task::{
    Category, Difficulty, Game, Generated, Params, Reply, Setup, TaskError, TaskOptions, Verdict,
};

pub const ID: &str = "password_breaking";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PasswordState {
    /// Lower bound of the range.
    pub m: i64,
    /// Width: the password lies in `[m, m + n]`.
    pub n: i64,
    /// Digit base of the transform.
    pub k: u32,
    pub current: i64,
}

impl PasswordState {
    pub fn contains(&self, value: i64) -> bool {
        (self.m..=self.m + self.n).contains(&value)
    }
}

/// Digit-wise `(x_i + y_i) mod k` of `x` and `y` written in base `k`.
pub fn digitwise_sum(x: u64, y: u64, k: u32) -> u64 {
    let k = u64::from(k);
    let (mut x, mut y) = (x, y);
    let (mut z, mut place) = (0u64, 1u64);
    while x > 0 || y > 0 {
        z += ((x % k + y % k) % k) * place;
        x /= k;
        y /= k;
        place *= k;
    }
    z
}

/// New password after wrong guess `y` against current password `x`.
pub fn password_transform(x: i64, y: i64, k: u32, m: i64, n: i64) -> i64 {
    assert!(x >= 0 && y >= 0 && k >= 2 && n >= 0, "transform needs x, y >= 0, k >= 2");
    let z = digitwise_sum(x as u64, y as u64, k);
    (z % (n as u64 + 1)) as i64 + m
}

pub struct PasswordBreaking {
    grammar: CommandGrammar,
    base: u32,
    min_value: i64,
}

impl PasswordBreaking {
    pub fn new(base: u32, min_value: i64) -> Self {
        assert!(base >= 2, "digit base must be at least 2");
        assert!(min_value >= 0, "password range must be non-negative");
        Self {
            grammar: CommandGrammar::new(&[("My Guess", CommandKind::Guess, PayloadShape::Integers)]),
            base,
            min_value,
        }
    }

    pub fn from_options(options: &TaskOptions) -> Self {
        Self::new(options.password_base, options.password_min)
    }
}

impl Default for PasswordBreaking {
    fn default() -> Self {
        Self::from_options(&TaskOptions::default())
    }
}

fn problem_text(m: i64, n: i64, k: u32) -> String {
    let max = m + n;
    format!(
        "Let's play Password Breaker! Your task is to hack into the RPD database by guessing the correct password.

Rules:
1. The password is always between MIN_VALUE = {m} and MAX_VALUE = {max} (inclusive)
2. After each guess, you'll receive one of these responses:
   - Correct: Correct password, you've successfully broken in!
   - Incorrect: Wrong password, and the system has changed the password
   - Invalid: Invalid guess

Important Mechanics:
- The system uses base-{k} operations (k={k})
- When you guess wrong (y), if the current password was x:
  * First convert both x and y to base-{k} numbers
  * Perform digit-by-digit base-{k} XOR:
    For each digit position i: result[i] = (x[i] + y[i]) mod {k}
  * Convert result back to decimal to get z
  * Map z to range [0,{n}] by taking mod {n1}
  * Add {m} to get the new password between [{m},{max}]

Example:
With k=2, if x=6 (base-2: [1,1,0]) and y=5 (base-2: [1,0,1]):
1. XOR digits: [1,1,0] XOR [1,0,1] = [(1+1)mod2, (1+0)mod2, (0+1)mod2] = [0,1,1]
2. Convert [0,1,1] to decimal: z = 3
3. Map to range: z = (3 mod (n+1)) + m

Example Interaction:
- Original password = 5
- You: \"My Guess: 3\"
- Me: \"Incorrect\" (wrong, password changes by XOR mechanism)
- You: \"My Guess: 5\"
- Me: \"Incorrect\" (wrong, password changes by XOR mechanism)
- You: \"My Guess: 8\"
- Me: \"Correct\" (correct!)

Query Type:
1. Make a guess:
   Format: \"My Guess: X\"
   where X is a number between {m} and {max}

Instructions:
1. Make your guess based on previous responses
2. Format your response exactly as shown above
3. Give your reasoning before making each guess

Remember:
- Always guess within valid range [{m},{max}]
- Password changes after each incorrect guess
- Think carefully about the base-{k} XOR mechanism

Ready to start? Make your first query!",
        n1 = n + 1,
    )
}

impl Game for PasswordBreaking {
    type State = PasswordState;

    fn id(&self) -> &'static str {
        ID
    }

    fn category(&self) -> Category {
        Category::DA
    }

    fn level_size(&self, difficulty: Difficulty) -> u32 {
        difficulty.pick([10, 20, 30])
    }

    fn grammar(&self) -> &CommandGrammar {
        &self.grammar
    }

    fn generate(&self, setup: &Setup) -> Result<Generated<PasswordState>, TaskError> {
        let n = i64::from(setup.size);
        let m = self.min_value;
        let mut rng = rng_for(setup.seed);
        let current = rng.random_range(m..=m + n);
        let state = PasswordState {
            m,
            n,
            k: self.base,
            current,
        };
        let mut params = Params::new();
        params.insert("n".into(), n);
        params.insert("m".into(), m);
        params.insert("k".into(), i64::from(self.base));
        Ok(Generated {
            objective: format!("initial password {current}, changing after every wrong guess"),
            problem_text: problem_text(m, n, self.base),
            params,
            state,
        })
    }

    fn respond(&self, state: &mut PasswordState, command: &ParsedCommand) -> Reply {
        let guess = match (command.kind, command.integers().as_deref()) {
            (CommandKind::Guess, Some(&[g])) if state.contains(g) => g,
            _ => return Reply::new("Invalid", Verdict::Invalid),
        };
        if guess == state.current {
            return Reply::new("Correct", Verdict::Solved);
        }
        state.current = password_transform(state.current, guess, state.k, state.m, state.n);
        Reply::new("Incorrect", Verdict::Continue)
    }

    fn check(&self, state: &PasswordState) -> Result<(), String> {
        if !state.contains(state.current) || state.k < 2 {
            return Err("password outside its range".into());
        }
        Ok(())
    }
}
