//! The bundled games, two per category.

pub mod color_magic;
pub mod grid_sum;
pub mod impostors;
pub mod knight_battle;
pub mod maze;
pub mod password;
pub mod words;
pub mod zero_finding;

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::task::{Registry, TaskError, TaskOptions};

pub use color_magic::ColorMagic;
pub use grid_sum::GridSumGame;
pub use impostors::FindTheImpostors;
pub use knight_battle::KnightBattle;
pub use maze::MazeNavigation;
pub use password::PasswordBreaking;
pub use words::WordGuessing;
pub use zero_finding::ZeroFinding;

pub(crate) fn register_all(registry: &mut Registry, options: &TaskOptions) -> Result<(), TaskError> {
    registry.register(Arc::new(FindTheImpostors::new()));
    registry.register(Arc::new(WordGuessing::from_options(options)?));
    registry.register(Arc::new(PasswordBreaking::from_options(options)));
    registry.register(Arc::new(ZeroFinding::new()));
    registry.register(Arc::new(MazeNavigation::new()));
    registry.register(Arc::new(ColorMagic::new()));
    registry.register(Arc::new(KnightBattle::new()));
    registry.register(Arc::new(GridSumGame::new()));
    Ok(())
}

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn join<T: ToString>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

/// `1st`, `2nd`, `3rd`, `4th`, ...
pub(crate) fn ordinal(k: usize) -> String {
    let suffix = match (k % 10, k % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{k}{suffix}")
}

/// Edge-adjacent neighbours of a 1-based cell.
pub(crate) fn neighbours(row: usize, col: usize, rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(4);
    if row > 1 {
        out.push((row - 1, col));
    }
    if row < rows {
        out.push((row + 1, col));
    }
    if col > 1 {
        out.push((row, col - 1));
    }
    if col < cols {
        out.push((row, col + 1));
    }
    out
}
