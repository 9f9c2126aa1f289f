//! Monitor predicates checked exhaustively against independent enumeration.

use turnbench_core::protocol::CommandKind;
use turnbench_core::task::{Game, Verdict};
use turnbench_core::tasks::color_magic::{apply, Magic};
use turnbench_core::tasks::impostors::{majority_response, ImpostorState};
use turnbench_core::tasks::knight_battle::{attacks, knight_moves};
use turnbench_core::tasks::FindTheImpostors;
use turnbench_core::ParsedCommand;

#[test]
fn impostor_responses_match_majority_for_all_assignments_and_triples() {
    let n = 6;
    let game = FindTheImpostors::new();
    let mut checked = 0;
    for mask in 0u32..1 << n {
        let bits: String = (0..n).map(|i| if mask >> i & 1 == 1 { '1' } else { '0' }).collect();
        let mut state = ImpostorState::from_bits(&bits);
        for a in 1..=n {
            for b in 1..=n {
                for c in 1..=n {
                    let distinct = a != b && b != c && a != c;
                    let impostors = [a, b, c].iter().filter(|&&i| mask >> (i - 1) & 1 == 0).count();
                    let expected = if !distinct {
                        None
                    } else if impostors > 3 - impostors {
                        Some("0")
                    } else {
                        Some("1")
                    };
                    assert_eq!(majority_response(&state, [a, b, c]), expected, "{bits} {a},{b},{c}");
                    let reply = game.respond(&mut state, &ParsedCommand::new(CommandKind::Query, format!("{a},{b},{c}")));
                    match expected {
                        Some(r) => {
                            assert_eq!(reply.feedback, r);
                            assert_eq!(reply.verdict, Verdict::Continue);
                        }
                        None => {
                            assert_eq!(reply.feedback, "-1");
                            assert_eq!(reply.verdict, Verdict::Invalid);
                        }
                    }
                    checked += 1;
                }
            }
        }
    }
    assert_eq!(checked, 64 * 216);
}

#[test]
fn knight_attack_matches_move_enumeration_on_6x6() {
    let n = 6;
    for x in 1..=n {
        for y in 1..=n {
            let moves = knight_moves((x, y), n, n);
            for tx in 1..=n {
                for ty in 1..=n {
                    assert_eq!(attacks((x, y), (tx, ty)), moves.contains(&(tx, ty)), "({x},{y}) -> ({tx},{ty})");
                }
            }
        }
    }
}

#[test]
fn color_magic_triple_application_is_identity_on_3x3() {
    let n = 3;
    for grid_code in 0..3u32.pow(9) {
        let grid: Vec<u8> = (0..9).map(|i| (grid_code / 3u32.pow(i) % 3) as u8).collect();
        for magic in Magic::ALL {
            for pos in 1..=n * n {
                let mut g = grid.clone();
                for _ in 0..3 {
                    apply(&mut g, n, magic, pos);
                }
                assert_eq!(g, grid, "{magic:?} at {pos}");
            }
        }
    }
}
