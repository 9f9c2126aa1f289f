//! Password breaking by simulating the transform over every candidate.

use std::collections::BTreeSet;

use super::{param, Flow, Io, OracleError, Strategy};
use crate::task::InstanceRecord;
use crate::tasks::password::password_transform;

/// The guess whose miss leaves the fewest successor candidates; among
/// equals, a current candidate first, then the smallest value.
pub fn choose_guess(candidates: &BTreeSet<i64>, k: u32, m: i64, n: i64) -> i64 {
    (m..=m + n)
        .min_by_key(|&g| {
            let image: BTreeSet<i64> = candidates
                .iter()
                .filter(|&&x| x != g)
                .map(|&x| password_transform(x, g, k, m, n))
                .collect();
            (image.len(), !candidates.contains(&g), g)
        })
        .expect("non-empty range")
}

fn run(io: &mut Io, k: u32, m: i64, n: i64) -> Flow {
    let mut candidates: BTreeSet<i64> = (m..=m + n).collect();
    while !candidates.is_empty() {
        let g = choose_guess(&candidates, k, m, n);
        let f = io.ask(format!("{} candidates remain.\nMy Guess: {g}", candidates.len()))?;
        if f.trim() != "Incorrect" {
            return Ok(());
        }
        candidates = candidates
            .iter()
            .filter(|&&x| x != g)
            .map(|&x| password_transform(x, g, k, m, n))
            .collect();
    }
    Ok(())
}

pub(super) fn strategy(record: &InstanceRecord) -> Result<Strategy, OracleError> {
    let k = param(record, "k")? as u32;
    let m = param(record, "m")?;
    let n = param(record, "n")?;
    Ok(Box::new(move |io: &mut Io| run(io, k, m, n)))
}
