//! Random valid automata for property tests and cross-checks.
//!
//! Labels are assigned per class of the digit-0 edge relation, so leading-zero
//! invariance holds by construction; unreachable states are pruned afterwards.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::automaton::{Automaton, OutputLabel, State};

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut x = x;
    while parent[x] != r {
        let next = parent[x];
        parent[x] = r;
        x = next;
    }
    r
}

/// Assigns outputs constant on digit-0 classes. `zero_classes` receive "0".
fn label_by_zero_classes<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    base: usize,
    delta: &[usize],
    forced_zero: &[usize],
    nonzero_prob: f64,
) -> Vec<OutputLabel> {
    let mut parent: Vec<usize> = (0..n).collect();
    for s in 0..n {
        let (a, b) = (find(&mut parent, s), find(&mut parent, delta[s * base]));
        parent[a] = b;
    }
    let mut class_label: Vec<Option<OutputLabel>> = vec![None; n];
    for &z in forced_zero {
        let r = find(&mut parent, z);
        class_label[r] = Some(OutputLabel::zero());
    }
    (0..n)
        .map(|s| {
            let r = find(&mut parent, s);
            class_label[r]
                .get_or_insert_with(|| {
                    if rng.gen_bool(nonzero_prob) {
                        OutputLabel::new(if rng.gen_bool(0.8) { "1" } else { "2" }).unwrap()
                    } else {
                        OutputLabel::zero()
                    }
                })
                .clone()
        })
        .collect()
}

fn assemble(base: usize, outputs: Vec<OutputLabel>, delta: Vec<usize>) -> Automaton {
    let states = outputs
        .into_iter()
        .enumerate()
        .map(|(i, output)| State {
            name: format!("q{i}"),
            output,
        })
        .collect();
    Automaton::new(base, states, 0, delta)
        .expect("generator produces well-formed parts")
        .accessible_part()
}

/// Uniformly random transitions over at most `max_states` states.
pub fn random_valid_automaton<R: Rng + ?Sized>(rng: &mut R, max_states: usize, base: usize) -> Automaton {
    let n = rng.gen_range(1..=max_states);
    let delta: Vec<usize> = (0..n * base).map(|_| rng.gen_range(0..n)).collect();
    let outputs = label_by_zero_classes(rng, n, base, &delta, &[], 0.5);
    assemble(base, outputs, delta)
}

/// A random automaton without tied states: states are split into consecutive
/// blocks that are single states or simple cycles, every other edge points
/// strictly forward, and the last state is an all-zero sink.
pub fn random_tied_free_automaton<R: Rng + ?Sized>(
    rng: &mut R,
    max_states: usize,
    base: usize,
) -> Automaton {
    let n = rng.gen_range(2..=max_states.max(2));
    let sink = n - 1;
    let mut delta = vec![usize::MAX; n * base];
    let mut i = 0;
    while i < sink {
        let len = if rng.gen_bool(0.5) {
            1
        } else {
            rng.gen_range(1..=(sink - i).min(3))
        };
        let block = i..i + len;
        let is_cycle = rng.gen_bool(0.6);
        for s in block.clone() {
            let mut digits: Vec<usize> = (0..base).collect();
            digits.shuffle(rng);
            let mut rest = &digits[..];
            if is_cycle {
                let next = if s + 1 == block.end { block.start } else { s + 1 };
                delta[s * base + digits[0]] = next;
                rest = &digits[1..];
            }
            for &d in rest {
                delta[s * base + d] = rng.gen_range(block.end..n);
            }
        }
        i = block.end;
    }
    for d in 0..base {
        delta[sink * base + d] = sink;
    }
    let outputs = label_by_zero_classes(rng, n, base, &delta, &[sink], 0.4);
    assemble(base, outputs, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::validate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_automata_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let base = rng.gen_range(2..=3);
            let a = random_valid_automaton(&mut rng, 8, base);
            assert!(validate(&a).ok, "{a}");
            let b = random_tied_free_automaton(&mut rng, 8, base);
            assert!(validate(&b).ok, "{b}");
        }
    }
}
