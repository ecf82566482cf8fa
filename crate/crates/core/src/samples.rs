//! Seeded generators of small timed automata, and of automaton pairs
//! derived by mutation, for batch differential tests. Everything is
//! deterministic in the seed so a failing batch index can be replayed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::{ClockConstraint, CmpOp, Edge, TimedAutomaton};

/// Size caps for generated automata. Guard constants are drawn from
/// `0..=max_constant`; location, clock, action and edge counts stay at or
/// under their caps.
#[derive(Clone, Copy, Debug)]
pub struct SampleLimits {
    pub clocks: usize,
    pub locations: usize,
    pub edges: usize,
    pub actions: usize,
    pub max_constant: i64,
}

impl Default for SampleLimits {
    fn default() -> SampleLimits {
        SampleLimits {
            clocks: 2,
            locations: 4,
            edges: 6,
            actions: 3,
            max_constant: 10,
        }
    }
}

impl SampleLimits {
    /// The largest shape the batch suites use: up to 6 locations, 2 clocks
    /// and constants up to 16.
    pub fn desk() -> SampleLimits {
        SampleLimits {
            clocks: 2,
            locations: 6,
            edges: 8,
            actions: 3,
            max_constant: 16,
        }
    }

    /// One clock and constants up to 4, the shape the half-step grid
    /// cross-check runs on.
    pub fn tiny_one_clock() -> SampleLimits {
        SampleLimits {
            clocks: 1,
            locations: 3,
            edges: 4,
            actions: 2,
            max_constant: 4,
        }
    }

    /// Small enough for exhaustive game solving. Corner state counts grow
    /// with the square of the largest constant on two-clock inputs, so the
    /// suites that solve games on random pairs draw from this shape.
    pub fn games() -> SampleLimits {
        SampleLimits {
            clocks: 2,
            locations: 3,
            edges: 5,
            actions: 2,
            max_constant: 5,
        }
    }
}

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

const CLOCK_NAMES: [&str; 4] = ["x", "y", "z", "w"];
const FRESH_CLOCK_NAMES: [&str; 4] = ["u", "v", "s", "t"];
const ACTION_NAMES: [&str; 5] = ["a", "b", "c", "d", "e"];

fn random_constraint(rng: &mut SampleRng, clock: usize, max_constant: i64) -> ClockConstraint {
    let ops = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ge, CmpOp::Gt];
    ClockConstraint {
        clock,
        op: ops[rng.gen_range(0..ops.len())],
        constant: rng.gen_range(0..=max_constant),
    }
}

/// Draws one automaton inside the caps. Guards mix single comparisons and
/// bounded intervals, and may be unsatisfiable; resets are sparse. The
/// initial location is always `l0` so generated automata pair up directly.
pub fn random_automaton(rng: &mut SampleRng, limits: &SampleLimits) -> TimedAutomaton {
    let n_loc = rng.gen_range(1..=limits.locations);
    let n_clk = rng.gen_range(0..=limits.clocks);
    let n_act = rng.gen_range(1..=limits.actions);
    let n_edges = rng.gen_range(0..=limits.edges);
    let mut edges = Vec::new();
    for _ in 0..n_edges {
        let mut guard = Vec::new();
        for clock in 0..n_clk {
            match rng.gen_range(0..4) {
                0 => guard.push(random_constraint(rng, clock, limits.max_constant)),
                1 => {
                    let lo = rng.gen_range(0..=limits.max_constant);
                    let hi = rng.gen_range(lo..=limits.max_constant);
                    guard.push(ClockConstraint {
                        clock,
                        op: if rng.gen() { CmpOp::Ge } else { CmpOp::Gt },
                        constant: lo,
                    });
                    guard.push(ClockConstraint {
                        clock,
                        op: if rng.gen() { CmpOp::Le } else { CmpOp::Lt },
                        constant: hi,
                    });
                }
                _ => {}
            }
        }
        let resets = (0..n_clk).filter(|_| rng.gen_range(0..4) == 0).collect();
        edges.push(Edge {
            from: rng.gen_range(0..n_loc),
            to: rng.gen_range(0..n_loc),
            action: rng.gen_range(0..n_act),
            guard,
            resets,
        });
    }
    TimedAutomaton {
        clocks: CLOCK_NAMES[..n_clk].iter().map(|s| s.to_string()).collect(),
        actions: ACTION_NAMES[..n_act].iter().map(|s| s.to_string()).collect(),
        locations: (0..n_loc).map(|i| format!("l{i}")).collect(),
        initial: 0,
        edges,
    }
}

/// The ways a partner automaton is derived from a base one. Identity and
/// clock renaming preserve every relation; the others may or may not break
/// them, which is exactly the spread batch tests want.
pub const MUTATIONS: [&str; 7] = [
    "identity",
    "rename-clocks",
    "tweak-constant",
    "tweak-op",
    "tweak-resets",
    "extra-edge",
    "drop-edge",
];

/// Applies the named mutation, falling back to "extra-edge" when the base
/// automaton lacks the material (no edge, no guard) the mutation needs.
pub fn mutate(
    rng: &mut SampleRng,
    base: &TimedAutomaton,
    limits: &SampleLimits,
    which: &str,
) -> TimedAutomaton {
    let mut out = base.clone();
    let picked_edge = |rng: &mut SampleRng, out: &TimedAutomaton| -> Option<usize> {
        if out.edges.is_empty() {
            None
        } else {
            Some(rng.gen_range(0..out.edges.len()))
        }
    };
    match which {
        "identity" => return out,
        "rename-clocks" => {
            out.clocks = FRESH_CLOCK_NAMES[..out.clocks.len()]
                .iter()
                .map(|s| s.to_string())
                .collect();
            return out;
        }
        "tweak-constant" => {
            let guarded: Vec<usize> = (0..out.edges.len())
                .filter(|&e| !out.edges[e].guard.is_empty())
                .collect();
            if !guarded.is_empty() {
                let e = guarded[rng.gen_range(0..guarded.len())];
                let g = rng.gen_range(0..out.edges[e].guard.len());
                let c = &mut out.edges[e].guard[g];
                c.constant = if c.constant == 0 || rng.gen() {
                    c.constant + 1
                } else {
                    c.constant - 1
                };
                return out;
            }
        }
        "tweak-op" => {
            let guarded: Vec<usize> = (0..out.edges.len())
                .filter(|&e| !out.edges[e].guard.is_empty())
                .collect();
            if !guarded.is_empty() {
                let e = guarded[rng.gen_range(0..guarded.len())];
                let g = rng.gen_range(0..out.edges[e].guard.len());
                let ops = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ge, CmpOp::Gt];
                out.edges[e].guard[g].op = ops[rng.gen_range(0..ops.len())];
                return out;
            }
        }
        "tweak-resets" => {
            if !out.clocks.is_empty() {
                if let Some(e) = picked_edge(rng, &out) {
                    let clock = rng.gen_range(0..out.clocks.len());
                    let resets = &mut out.edges[e].resets;
                    match resets.iter().position(|&c| c == clock) {
                        Some(i) => {
                            resets.remove(i);
                        }
                        None => {
                            resets.push(clock);
                            resets.sort_unstable();
                        }
                    }
                    return out;
                }
            }
        }
        "extra-edge" => {}
        "drop-edge" => {
            if let Some(e) = picked_edge(rng, &out) {
                out.edges.remove(e);
                return out;
            }
        }
        other => panic!("unknown mutation {other:?}"),
    }
    // Fallback and the "extra-edge" case proper.
    let n_clk = out.clocks.len();
    let mut guard = Vec::new();
    for clock in 0..n_clk {
        if rng.gen() {
            guard.push(random_constraint(rng, clock, limits.max_constant));
        }
    }
    let resets = (0..n_clk).filter(|_| rng.gen_range(0..4) == 0).collect();
    out.edges.push(Edge {
        from: rng.gen_range(0..out.locations.len()),
        to: rng.gen_range(0..out.locations.len()),
        action: rng.gen_range(0..out.actions.len()),
        guard,
        resets,
    });
    out
}

/// Draws a base automaton and a partner derived by a random mutation.
/// Returns both and the mutation name for reporting.
pub fn random_pair(
    rng: &mut SampleRng,
    limits: &SampleLimits,
) -> (TimedAutomaton, TimedAutomaton, &'static str) {
    let base = random_automaton(rng, limits);
    let which = MUTATIONS[rng.gen_range(0..MUTATIONS.len())];
    let other = mutate(rng, &base, limits, which);
    (base, other, which)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::{cp_bisim, Instance};

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        let limits = SampleLimits::default();
        let a = random_automaton(&mut rng(42), &limits);
        let b = random_automaton(&mut rng(42), &limits);
        assert_eq!(a, b);
        let c = random_automaton(&mut rng(43), &limits);
        assert_ne!(a, c, "different seeds should differ eventually");
    }

    #[test]
    fn caps_are_respected_over_many_draws() {
        let limits = SampleLimits::desk();
        let mut r = rng(7);
        for _ in 0..200 {
            let a = random_automaton(&mut r, &limits);
            assert!(a.locations.len() <= limits.locations && !a.locations.is_empty());
            assert!(a.clocks.len() <= limits.clocks);
            assert!(a.edges.len() <= limits.edges);
            assert!(!a.actions.is_empty() && a.actions.len() <= limits.actions);
            for e in &a.edges {
                assert!(e.from < a.locations.len() && e.to < a.locations.len());
                assert!(e.action < a.actions.len());
                for g in &e.guard {
                    assert!(g.clock < a.clocks.len());
                    assert!((0..=limits.max_constant).contains(&g.constant));
                }
                for &c in &e.resets {
                    assert!(c < a.clocks.len());
                }
            }
            assert_eq!(a.initial, 0);
        }
    }

    #[test]
    fn identity_and_renaming_mutations_stay_bisimilar() {
        let limits = SampleLimits::default();
        let mut r = rng(11);
        for _ in 0..25 {
            let base = random_automaton(&mut r, &limits);
            for which in ["identity", "rename-clocks"] {
                let other = mutate(&mut r, &base, &limits, which);
                let ia = Instance::new(&base, &base.initial_state()).unwrap();
                let ib = Instance::new(&other, &other.initial_state()).unwrap();
                assert!(
                    cp_bisim(&ia, &ib).related,
                    "{which} must preserve behaviour"
                );
            }
        }
    }

    #[test]
    fn mutated_pairs_cover_both_verdicts() {
        let limits = SampleLimits::games();
        let mut r = rng(5);
        let mut related = 0;
        let mut unrelated = 0;
        for _ in 0..60 {
            let (a, b, _) = random_pair(&mut r, &limits);
            let ia = Instance::new(&a, &a.initial_state()).unwrap();
            let ib = Instance::new(&b, &b.initial_state()).unwrap();
            if cp_bisim(&ia, &ib).related {
                related += 1;
            } else {
                unrelated += 1;
            }
        }
        assert!(related >= 10, "got {related} related pairs");
        assert!(unrelated >= 10, "got {unrelated} unrelated pairs");
    }

    #[test]
    fn every_mutation_produces_a_valid_automaton() {
        let limits = SampleLimits::default();
        let mut r = rng(23);
        for round in 0..40 {
            let base = random_automaton(&mut r, &limits);
            for which in MUTATIONS {
                let m = mutate(&mut r, &base, &limits, which);
                for e in &m.edges {
                    assert!(e.from < m.locations.len(), "round {round} {which}");
                    assert!(e.to < m.locations.len());
                    assert!(e.action < m.actions.len());
                    for g in &e.guard {
                        assert!(g.clock < m.clocks.len());
                    }
                    for &c in &e.resets {
                        assert!(c < m.clocks.len());
                    }
                }
                // The mutated automaton must round-trip through the text
                // form like any handwritten one.
                let text = m.render();
                let back = TimedAutomaton::parse(&text).unwrap();
                assert_eq!(m, back);
            }
        }
    }
}
