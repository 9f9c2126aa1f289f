//! Word guessing. Dictionary targets: minimax over the remaining consistent
//! words. Random-letter targets: a constraint solver tracking allowed letters
//! per position and count bounds per letter.

use rand::seq::SliceRandom;

use super::{param, Flow, Io, OracleError, Strategy};
use crate::tasks::rng_for;
use crate::tasks::words::{feedback, parse_wordlist, BUNDLED_WORDS4};
use crate::task::InstanceRecord;

const LETTERS: usize = 26;

/// Knowledge about a hidden string of `n` uppercase letters.
#[derive(Debug, Clone)]
pub struct ConstraintSolver {
    n: usize,
    allowed: Vec<[bool; LETTERS]>,
    min: [usize; LETTERS],
    max: [usize; LETTERS],
    tested: [bool; LETTERS],
    /// Tie-break rank of each letter.
    rank: [usize; LETTERS],
}

impl ConstraintSolver {
    pub fn new(n: usize, seed: u64) -> Self {
        let mut order: Vec<usize> = (0..LETTERS).collect();
        order.shuffle(&mut rng_for(seed));
        let mut rank = [0; LETTERS];
        for (r, &l) in order.iter().enumerate() {
            rank[l] = r;
        }
        Self {
            n,
            allowed: vec![[true; LETTERS]; n],
            min: [0; LETTERS],
            max: [n; LETTERS],
            tested: [false; LETTERS],
            rank,
        }
    }

    /// Folds one guess and its R/G/W feedback into the constraints.
    pub fn update(&mut self, guess: &[u8], marks: &[u8]) {
        let mut counts = [[0usize; 3]; LETTERS];
        for (i, (&g, &f)) in guess.iter().zip(marks).enumerate() {
            let l = (g - b'A') as usize;
            if f == b'R' {
                self.allowed[i] = [false; LETTERS];
                self.allowed[i][l] = true;
            } else {
                self.allowed[i][l] = false;
            }
            let slot = match f {
                b'R' => 0,
                b'G' => 1,
                _ => 2,
            };
            counts[l][slot] += 1;
        }
        for (l, [r, g, w]) in counts.into_iter().enumerate() {
            if r + g + w == 0 {
                continue;
            }
            self.tested[l] = true;
            self.min[l] = self.min[l].max(r + g);
            if w > 0 {
                self.max[l] = self.max[l].min(r + g);
            }
        }
    }

    pub fn consistent(&self, word: &[u8]) -> bool {
        let mut used = [0usize; LETTERS];
        for (i, &c) in word.iter().enumerate() {
            let l = (c - b'A') as usize;
            if !self.allowed[i][l] {
                return false;
            }
            used[l] += 1;
        }
        (0..LETTERS).all(|l| (self.min[l]..=self.max[l]).contains(&used[l]))
    }

    /// A string satisfying every constraint, preferring untested letters.
    pub fn propose(&self) -> Option<Vec<u8>> {
        let mut positions: Vec<usize> = (0..self.n).collect();
        positions.sort_by_key(|&i| self.allowed[i].iter().filter(|&&a| a).count());
        let mut used = [0usize; LETTERS];
        let mut out = vec![0u8; self.n];
        self.fill(&positions, 0, &mut used, &mut out).then_some(out)
    }

    fn preference(&self, l: usize, used: &[usize; LETTERS]) -> (u8, usize, usize) {
        let class = if !self.tested[l] && used[l] == 0 {
            0
        } else if used[l] < self.min[l] {
            1
        } else if self.max[l] > self.min[l] && used[l] == self.min[l] {
            2
        } else {
            3
        };
        (class, used[l], self.rank[l])
    }

    fn fill(&self, positions: &[usize], depth: usize, used: &mut [usize; LETTERS], out: &mut [u8]) -> bool {
        if depth == positions.len() {
            return (0..LETTERS).all(|l| used[l] >= self.min[l]);
        }
        let i = positions[depth];
        let mut letters: Vec<usize> = (0..LETTERS).filter(|&l| self.allowed[i][l]).collect();
        letters.sort_by_key(|&l| self.preference(l, used));
        for l in letters {
            if used[l] + 1 > self.max[l] {
                continue;
            }
            used[l] += 1;
            let needed: usize = (0..LETTERS).map(|x| self.min[x].saturating_sub(used[x])).sum();
            if needed < positions.len() - depth {
                out[i] = b'A' + l as u8;
                if self.fill(positions, depth + 1, used, out) {
                    return true;
                }
            }
            used[l] -= 1;
        }
        false
    }
}

/// Guesses scored per turn; larger candidate sets are sampled by stride.
const MINIMAX_PROBES: usize = 64;

/// Consistent word whose worst-case feedback class is smallest.
fn minimax(candidates: &[Vec<u8>]) -> Vec<u8> {
    let stride = candidates.len().div_ceil(MINIMAX_PROBES).max(1);
    let mut best: Option<(usize, &Vec<u8>)> = None;
    for g in candidates.iter().step_by(stride) {
        let mut classes = std::collections::HashMap::new();
        for t in candidates {
            *classes.entry(feedback(t, g)).or_insert(0usize) += 1;
        }
        let worst = classes.values().copied().max().unwrap_or(0);
        if best.is_none_or(|(w, _)| worst < w) {
            best = Some((worst, g));
        }
    }
    best.expect("non-empty candidates").1.clone()
}

fn guess(io: &mut Io, word: &[u8]) -> Result<Vec<u8>, super::Pending> {
    let w = String::from_utf8_lossy(word).into_owned();
    let f = io.ask(format!("Consistent with all feedback so far.\nMy Guess: {w}"))?;
    Ok(f.trim().as_bytes().to_vec())
}

fn run(io: &mut Io, n: usize, dictionary: Option<Vec<Vec<u8>>>, seed: u64) -> Flow {
    let mut solver = ConstraintSolver::new(n, seed);
    let mut candidates = dictionary.unwrap_or_default();
    loop {
        let word = if candidates.is_empty() {
            match solver.propose() {
                Some(w) => w,
                None => return Ok(()),
            }
        } else {
            minimax(&candidates)
        };
        let marks = guess(io, &word)?;
        if marks.len() != n || marks.iter().all(|&m| m == b'R') {
            return Ok(());
        }
        solver.update(&word, &marks);
        candidates.retain(|t| feedback(t, &word).as_bytes() == marks.as_slice());
    }
}

pub(super) fn strategy(record: &InstanceRecord) -> Result<Strategy, OracleError> {
    let n = param(record, "n")? as usize;
    let dictionary = (param(record, "dictionary")? == 1).then(|| {
        parse_wordlist(BUNDLED_WORDS4)
            .remove(&n)
            .unwrap_or_default()
            .into_iter()
            .map(String::into_bytes)
            .collect::<Vec<_>>()
    });
    let seed = record.seed;
    Ok(Box::new(move |io: &mut Io| run(io, n, dictionary.clone(), seed)))
}
