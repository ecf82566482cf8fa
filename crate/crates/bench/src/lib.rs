//! Deterministic fixture batches shared by the criterion benches.

use timedrel::samples::{random_automaton, random_pair, rng, SampleLimits};
use timedrel::{Instance, TimedAutomaton};

/// A reproducible batch of desk sized automata.
pub fn desk_batch(count: usize, seed: u64) -> Vec<TimedAutomaton> {
    let limits = SampleLimits::desk();
    let mut r = rng(seed);
    (0..count)
        .map(|_| random_automaton(&mut r, &limits))
        .collect()
}

/// Reproducible instance pairs at the shape the game solvers handle well.
pub fn game_pairs(count: usize, seed: u64) -> Vec<(Instance, Instance)> {
    let limits = SampleLimits::games();
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let (a, b, _) = random_pair(&mut r, &limits);
            (
                Instance::new(&a, &a.initial_state()).unwrap(),
                Instance::new(&b, &b.initial_state()).unwrap(),
            )
        })
        .collect()
}
