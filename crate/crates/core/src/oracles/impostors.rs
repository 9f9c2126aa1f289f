//! Disjoint-triple scan, then a sliding window between an impostor-majority
//! and a crewmate-majority triple to pin one known impostor and one known
//! crewmate, then two probes per triple.

use super::{param, Flow, Io, OracleError, Pending, Strategy};
use crate::task::InstanceRecord;

fn query(io: &mut Io, a: usize, b: usize, c: usize) -> Result<bool, Pending> {
    let feedback = io.ask(format!("Checking players {a}, {b} and {c}.\nMy Query: {a},{b},{c}"))?;
    Ok(feedback.trim() == "0")
}

fn run(io: &mut Io, n: usize) -> Flow {
    let groups = n / 3;
    let triples: Vec<[usize; 3]> = (0..groups).map(|j| [3 * j + 1, 3 * j + 2, 3 * j + 3]).collect();
    let mut majority = Vec::with_capacity(groups);
    for t in &triples {
        majority.push(query(io, t[0], t[1], t[2])?);
    }
    let mut impostor = vec![None; n + 1];

    let heavy = majority.iter().position(|&m| m);
    let light = majority.iter().position(|&m| !m);
    let (Some(h), Some(l)) = (heavy, light) else {
        return Ok(());
    };
    // Windows W0 = A, W1, W2, W3 = B over the sequence a1 a2 a3 b1 b2 b3.
    let seq = [triples[h][0], triples[h][1], triples[h][2], triples[l][0], triples[l][1], triples[l][2]];
    let mut window = vec![true];
    window.push(query(io, seq[1], seq[2], seq[3])?);
    window.push(query(io, seq[2], seq[3], seq[4])?);
    window.push(false);
    let i = (0..3).find(|&i| window[i] && !window[i + 1]).expect("majority flips somewhere");
    let (known_imp, known_crew) = (seq[i], seq[i + 3]);
    impostor[known_imp] = Some(true);
    impostor[known_crew] = Some(false);

    let single = |io: &mut Io, x: usize| -> Result<bool, Pending> {
        match x {
            _ if x == known_imp => Ok(true),
            _ if x == known_crew => Ok(false),
            _ => query(io, x, known_imp, known_crew),
        }
    };
    for (t, &heavy) in triples.iter().zip(&majority) {
        let [p, q, r] = *t;
        if heavy {
            if query(io, p, q, known_crew)? {
                impostor[p] = Some(true);
                impostor[q] = Some(true);
                impostor[r] = Some(single(io, r)?);
            } else {
                let pi = single(io, p)?;
                impostor[p] = Some(pi);
                impostor[q] = Some(!pi);
                impostor[r] = Some(true);
            }
        } else if !query(io, p, q, known_imp)? {
            impostor[p] = Some(false);
            impostor[q] = Some(false);
            impostor[r] = Some(single(io, r)?);
        } else {
            let pi = single(io, p)?;
            impostor[p] = Some(pi);
            impostor[q] = Some(!pi);
            impostor[r] = Some(false);
        }
    }
    for x in 3 * groups + 1..=n {
        impostor[x] = Some(single(io, x)?);
    }
    let answer: Vec<String> = (1..=n).filter(|&x| impostor[x] == Some(true)).map(|x| x.to_string()).collect();
    io.ask(format!("My Answer: {}", answer.join(",")))?;
    Ok(())
}

pub(super) fn strategy(record: &InstanceRecord) -> Result<Strategy, OracleError> {
    let n = param(record, "n")? as usize;
    Ok(Box::new(move |io: &mut Io| run(io, n)))
}
