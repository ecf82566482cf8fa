//! Brute force baselines, independent of the zone graph machinery: a region
//! graph with partition refinement for the time-abstracted relations, and a
//! discretized bounded game for the timed ones. Test harness and debugging
//! aids only; the solvers in `relations` never call into this module.

use crate::automaton::{ClockConstraint, CmpOp, TimedAutomaton, TimedState};
use crate::Rat;
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// One clock's place in a region: beyond its maximum constant, or an
/// integer part with a fractional rank (0 for a zero fraction, otherwise the
/// 1-based position among the distinct positive fractions of the region).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClockClass {
    Above,
    At(i64, usize),
}

/// An equivalence class of valuations at a location: integer parts clamped
/// at the per-clock maximum constants plus the ordering pattern of the
/// fractional parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    pub location: usize,
    pub clocks: Vec<ClockClass>,
}

fn guard_holds(region: &Region, guard: &[ClockConstraint]) -> bool {
    guard.iter().all(|g| {
        match region.clocks[g.clock] {
            // Guard constants never exceed the maximum constant.
            ClockClass::Above => matches!(g.op, CmpOp::Ge | CmpOp::Gt),
            ClockClass::At(i, rank) => match g.op {
                CmpOp::Lt => i < g.constant,
                CmpOp::Le => i < g.constant || (i == g.constant && rank == 0),
                CmpOp::Eq => i == g.constant && rank == 0,
                CmpOp::Ge => i >= g.constant,
                CmpOp::Gt => i > g.constant || (i == g.constant && rank > 0),
            },
        }
    })
}

/// Re-packs positive ranks to be contiguous from 1 after removals.
fn renumber(clocks: &mut [ClockClass]) {
    let mut used: Vec<usize> = clocks
        .iter()
        .filter_map(|c| match c {
            ClockClass::At(_, r) if *r > 0 => Some(*r),
            _ => None,
        })
        .collect();
    used.sort_unstable();
    used.dedup();
    for c in clocks.iter_mut() {
        if let ClockClass::At(_, r) = c {
            if *r > 0 {
                *r = used.iter().position(|u| u == r).unwrap() + 1;
            }
        }
    }
}

/// The immediate time successor: zero-fraction clocks pick up a fraction
/// (or pass their maximum), otherwise the largest fraction class reaches the
/// next integer. A region with no clock below its maximum succeeds itself.
fn tick(region: &Region, maxima: &[i64]) -> Region {
    let mut out = region.clone();
    let zeros: Vec<usize> = region
        .clocks
        .iter()
        .enumerate()
        .filter_map(|(c, cc)| match cc {
            ClockClass::At(_, 0) => Some(c),
            _ => None,
        })
        .collect();
    if !zeros.is_empty() {
        let grows_fraction = zeros
            .iter()
            .any(|&c| matches!(region.clocks[c], ClockClass::At(i, _) if i < maxima[c]));
        if grows_fraction {
            for cc in out.clocks.iter_mut() {
                if let ClockClass::At(_, r) = cc {
                    if *r > 0 {
                        *r += 1;
                    }
                }
            }
        }
        for &c in &zeros {
            let ClockClass::At(i, _) = region.clocks[c] else {
                unreachable!()
            };
            out.clocks[c] = if i < maxima[c] {
                ClockClass::At(i, 1)
            } else {
                ClockClass::Above
            };
        }
        return out;
    }
    let top = region
        .clocks
        .iter()
        .filter_map(|cc| match cc {
            ClockClass::At(_, r) => Some(*r),
            _ => None,
        })
        .max();
    let Some(top) = top else {
        return out; // every clock is above its maximum
    };
    for cc in out.clocks.iter_mut() {
        if let ClockClass::At(i, r) = *cc {
            if r == top {
                *cc = ClockClass::At(i + 1, 0);
            }
        }
    }
    renumber(&mut out.clocks);
    out
}

fn apply_resets(region: &Region, to: usize, resets: &[usize]) -> Region {
    let mut out = Region {
        location: to,
        clocks: region.clocks.clone(),
    };
    for &c in resets {
        out.clocks[c] = ClockClass::At(0, 0);
    }
    renumber(&mut out.clocks);
    out
}

/// The finite region transition system of one automaton: every region of
/// every location, with action edges and the immediate time successor.
pub struct RegionGraph {
    pub regions: Vec<Region>,
    index: HashMap<Region, usize>,
    /// Per region: (action name, target region).
    pub action_edges: Vec<Vec<(String, usize)>>,
    pub tick_next: Vec<usize>,
    maxima: Vec<i64>,
}

fn all_regions_at(location: usize, maxima: &[i64]) -> Vec<Region> {
    // Per-clock base choices first, fractional ranks afterwards.
    let mut shapes: Vec<Vec<ClockClass>> = vec![Vec::new()];
    for &m in maxima {
        let mut next = Vec::new();
        for shape in &shapes {
            let mut with = |cc: ClockClass| {
                let mut s = shape.clone();
                s.push(cc);
                next.push(s);
            };
            with(ClockClass::Above);
            for i in 0..=m {
                with(ClockClass::At(i, 0));
            }
            for i in 0..m {
                // Rank placeholder, assigned below.
                with(ClockClass::At(i, usize::MAX));
            }
        }
        shapes = next;
    }
    let mut out = Vec::new();
    for shape in shapes {
        let frac: Vec<usize> = shape
            .iter()
            .enumerate()
            .filter_map(|(c, cc)| match cc {
                ClockClass::At(_, r) if *r == usize::MAX => Some(c),
                _ => None,
            })
            .collect();
        if frac.is_empty() {
            out.push(Region {
                location,
                clocks: shape,
            });
            continue;
        }
        // Every weak order on the fractional clocks: rank assignments whose
        // image is 1..=R for some R.
        let k = frac.len();
        let mut assignment = vec![1usize; k];
        loop {
            let top = *assignment.iter().max().unwrap();
            if (1..=top).all(|r| assignment.contains(&r)) {
                let mut clocks = shape.clone();
                for (pos, &c) in frac.iter().enumerate() {
                    if let ClockClass::At(i, _) = clocks[c] {
                        clocks[c] = ClockClass::At(i, assignment[pos]);
                    }
                }
                out.push(Region { location, clocks });
            }
            // Advance the mixed-radix counter over 1..=k.
            let mut pos = 0;
            loop {
                if pos == k {
                    break;
                }
                assignment[pos] += 1;
                if assignment[pos] <= k {
                    break;
                }
                assignment[pos] = 1;
                pos += 1;
            }
            if pos == k {
                break;
            }
        }
    }
    out
}

/// Builds the full region graph of an automaton over its per-clock maximum
/// constants.
pub fn region_graph(automaton: &TimedAutomaton) -> RegionGraph {
    let table = automaton.max_constants();
    let maxima: Vec<i64> = (0..automaton.clocks.len())
        .map(|c| table.per_clock_max(c))
        .collect();
    let mut regions = Vec::new();
    for location in 0..automaton.locations.len() {
        regions.extend(all_regions_at(location, &maxima));
    }
    let index: HashMap<Region, usize> = regions
        .iter()
        .enumerate()
        .map(|(i, r)| (r.clone(), i))
        .collect();
    let mut action_edges = Vec::with_capacity(regions.len());
    let mut tick_next = Vec::with_capacity(regions.len());
    for r in &regions {
        let mut edges = Vec::new();
        for e in &automaton.edges {
            if e.from == r.location && guard_holds(r, &e.guard) {
                let target = apply_resets(r, e.to, &e.resets);
                edges.push((automaton.actions[e.action].clone(), index[&target]));
            }
        }
        action_edges.push(edges);
        tick_next.push(index[&tick(r, &maxima)]);
    }
    RegionGraph {
        regions,
        index,
        action_edges,
        tick_next,
        maxima,
    }
}

impl RegionGraph {
    pub fn count_at(&self, location: usize) -> usize {
        self.regions
            .iter()
            .filter(|r| r.location == location)
            .count()
    }

    /// The region containing an exact rational state.
    pub fn region_of(&self, state: &TimedState) -> usize {
        let mut fracs: Vec<Rat> = Vec::new();
        for (c, &v) in state.valuation.iter().enumerate() {
            if v > Rat::from_integer(self.maxima[c]) {
                continue;
            }
            let f = v - v.floor();
            if f != Rat::from_integer(0) && !fracs.contains(&f) {
                fracs.push(f);
            }
        }
        fracs.sort();
        let clocks = state
            .valuation
            .iter()
            .enumerate()
            .map(|(c, &v)| {
                if v > Rat::from_integer(self.maxima[c]) {
                    ClockClass::Above
                } else {
                    let f = v - v.floor();
                    let rank = if f == Rat::from_integer(0) {
                        0
                    } else {
                        fracs.iter().position(|&x| x == f).unwrap() + 1
                    };
                    ClockClass::At(v.floor().to_integer(), rank)
                }
            })
            .collect();
        self.index[&Region {
            location: state.location,
            clocks,
        }]
    }

    /// Reflexive-transitive closure along tick edges.
    fn time_closure(&self, from: usize) -> Vec<usize> {
        let mut seen = vec![from];
        let mut cur = from;
        loop {
            cur = self.tick_next[cur];
            if seen.contains(&cur) {
                return seen;
            }
            seen.push(cur);
        }
    }
}

/// How the defender may answer an action in the region game; mirrors the
/// flavors of the time-abstracted relations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionFlavor {
    Strong,
    Delay,
    Observational,
}

/// Label ids: 0 is the time step, the rest index into a shared action list.
fn flavored_successors(
    graph: &RegionGraph,
    labels: &[String],
    flavor: RegionFlavor,
) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::with_capacity(graph.regions.len());
    for r in 0..graph.regions.len() {
        let mut succ: Vec<(usize, usize)> = Vec::new();
        for &t in &graph.time_closure(r) {
            succ.push((0, t));
        }
        let starts = match flavor {
            RegionFlavor::Strong => vec![r],
            _ => graph.time_closure(r),
        };
        for s in starts {
            for (name, target) in &graph.action_edges[s] {
                let label = labels.iter().position(|l| l == name).unwrap() + 1;
                match flavor {
                    RegionFlavor::Observational => {
                        for &t in &graph.time_closure(*target) {
                            succ.push((label, t));
                        }
                    }
                    _ => succ.push((label, *target)),
                }
            }
        }
        succ.sort_unstable();
        succ.dedup();
        out.push(succ);
    }
    out
}

/// Strong bisimilarity of two states through their region graphs, with the
/// action answers closed per flavor. Partition refinement on the disjoint
/// union of the two graphs.
pub fn region_bisim(
    a: &TimedAutomaton,
    p: &TimedState,
    b: &TimedAutomaton,
    q: &TimedState,
    flavor: RegionFlavor,
) -> bool {
    let ga = region_graph(a);
    let gb = region_graph(b);
    let mut labels: Vec<String> = a.actions.iter().chain(b.actions.iter()).cloned().collect();
    labels.sort();
    labels.dedup();
    let sa = flavored_successors(&ga, &labels, flavor);
    let sb = flavored_successors(&gb, &labels, flavor);
    let offset = ga.regions.len();
    let n = offset + gb.regions.len();
    let succ = |s: usize| -> &[(usize, usize)] {
        if s < offset {
            &sa[s]
        } else {
            &sb[s - offset]
        }
    };
    let shift = |s: usize, (l, t): (usize, usize)| if s < offset { (l, t) } else { (l, t + offset) };

    let mut block = vec![0usize; n];
    loop {
        let mut sig_of: BTreeMap<(usize, BTreeSet<(usize, usize)>), usize> = BTreeMap::new();
        let mut next = vec![0usize; n];
        for s in 0..n {
            let sig: BTreeSet<(usize, usize)> = succ(s)
                .iter()
                .map(|&e| {
                    let (l, t) = shift(s, e);
                    (l, block[t])
                })
                .collect();
            let key = (block[s], sig);
            let fresh = sig_of.len();
            next[s] = *sig_of.entry(key).or_insert(fresh);
        }
        if next == block {
            break;
        }
        block = next;
    }
    block[ga.region_of(p)] == block[offset + gb.region_of(q)]
}

/// Bounded discretized bisimulation game: delays are multiples of `step` up
/// to one past the largest constant, values clamp just above the per-clock
/// maxima, and the defender must replay delays exactly. A `false` answer
/// refutes timed bisimilarity; `true` is evidence bounded by `depth`.
pub fn grid_timed_bisim(
    a: &TimedAutomaton,
    p: &TimedState,
    b: &TimedAutomaton,
    q: &TimedState,
    step: Rat,
    depth: u32,
) -> bool {
    let ma: Vec<i64> = {
        let t = a.max_constants();
        (0..a.clocks.len()).map(|c| t.per_clock_max(c)).collect()
    };
    let mb: Vec<i64> = {
        let t = b.max_constants();
        (0..b.clocks.len()).map(|c| t.per_clock_max(c)).collect()
    };
    let horizon = ma
        .iter()
        .chain(mb.iter())
        .copied()
        .max()
        .unwrap_or(0)
        + 1;
    let mut delays = Vec::new();
    let mut k = 1i64;
    loop {
        let d = step * Rat::from_integer(k);
        if d > Rat::from_integer(horizon) {
            break;
        }
        delays.push(d);
        k += 1;
    }

    let clamp = |mut v: Vec<Rat>, maxima: &[i64]| -> Vec<Rat> {
        for (c, x) in v.iter_mut().enumerate() {
            let lid = Rat::from_integer(maxima[c] + 1);
            if *x > lid {
                *x = lid;
            }
        }
        v
    };

    type Key = (usize, Vec<Rat>, usize, Vec<Rat>, u32);
    struct Ctx<'x> {
        a: &'x TimedAutomaton,
        b: &'x TimedAutomaton,
        ma: Vec<i64>,
        mb: Vec<i64>,
        delays: Vec<Rat>,
        memo: HashMap<Key, bool>,
    }

    fn defender_survives(
        ctx: &mut Ctx,
        pl: usize,
        pv: Vec<Rat>,
        ql: usize,
        qv: Vec<Rat>,
        depth: u32,
    ) -> bool {
        if depth == 0 {
            return true;
        }
        let key = (pl, pv.clone(), ql, qv.clone(), depth);
        if let Some(&r) = ctx.memo.get(&key) {
            return r;
        }
        // Provisional so revisits inside this call do not recurse forever;
        // depth strictly decreases, so entries are exact when written last.
        let mut ok = true;
        'outer: for side in 0..2 {
            let (ca, cl, cv, da, dl, dv, cm, dm) = if side == 0 {
                (ctx.a, pl, &pv, ctx.b, ql, &qv, &ctx.ma, &ctx.mb)
            } else {
                (ctx.b, ql, &qv, ctx.a, pl, &pv, &ctx.mb, &ctx.ma)
            };
            let cm = cm.clone();
            let dm = dm.clone();
            // Action challenges.
            let ch_state = TimedState {
                location: cl,
                valuation: cv.clone(),
            };
            let df_state = TimedState {
                location: dl,
                valuation: dv.clone(),
            };
            for e in ch_state_enabled(ca, &ch_state) {
                let name = &ca.actions[ca.edges[e].action];
                let cnext = fire(ca, &ch_state, e);
                let mut answered = false;
                for e2 in ch_state_enabled(da, &df_state) {
                    if &da.actions[da.edges[e2].action] != name {
                        continue;
                    }
                    let dnext = fire(da, &df_state, e2);
                    let (np, nq) = orient(side, &cnext, &dnext);
                    if defender_survives(
                        ctx,
                        np.location,
                        np.valuation.clone(),
                        nq.location,
                        nq.valuation.clone(),
                        depth - 1,
                    ) {
                        answered = true;
                        break;
                    }
                }
                if !answered {
                    ok = false;
                    break 'outer;
                }
            }
            // Delay challenges, replayed exactly.
            for d in ctx.delays.clone() {
                let cnext = TimedState {
                    location: cl,
                    valuation: add_clamped(cv, d, &cm),
                };
                let dnext = TimedState {
                    location: dl,
                    valuation: add_clamped(dv, d, &dm),
                };
                let (np, nq) = orient(side, &cnext, &dnext);
                if !defender_survives(
                    ctx,
                    np.location,
                    np.valuation.clone(),
                    nq.location,
                    nq.valuation.clone(),
                    depth - 1,
                ) {
                    ok = false;
                    break 'outer;
                }
            }
        }
        ctx.memo.insert(key, ok);
        ok
    }

    fn ch_state_enabled(a: &TimedAutomaton, s: &TimedState) -> Vec<usize> {
        a.enabled(s)
    }

    fn fire(a: &TimedAutomaton, s: &TimedState, e: usize) -> TimedState {
        a.fire(s, e).expect("enabled edge fires")
    }

    fn add_clamped(v: &[Rat], d: Rat, maxima: &[i64]) -> Vec<Rat> {
        v.iter()
            .enumerate()
            .map(|(c, &x)| {
                let moved = x + d;
                let lid = Rat::from_integer(maxima[c] + 1);
                if moved > lid {
                    lid
                } else {
                    moved
                }
            })
            .collect()
    }

    fn orient(side: usize, ch: &TimedState, df: &TimedState) -> (TimedState, TimedState) {
        if side == 0 {
            (ch.clone(), df.clone())
        } else {
            (df.clone(), ch.clone())
        }
    }

    let mut ctx = Ctx {
        a,
        b,
        ma: ma.clone(),
        mb: mb.clone(),
        delays,
        memo: HashMap::new(),
    };
    defender_survives(
        &mut ctx,
        p.location,
        clamp(p.valuation.clone(), &ma),
        q.location,
        clamp(q.valuation.clone(), &mb),
        depth,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::{self, Instance, TaFlavor};

    fn automaton(text: &str) -> TimedAutomaton {
        TimedAutomaton::parse(text).unwrap()
    }

    fn one_edge(clock: &str, op: &str, constant: i64) -> TimedAutomaton {
        automaton(&format!(
            r#"{{
                "clocks": ["{clock}"],
                "actions": ["a"],
                "locations": ["l0", "l1"],
                "initial": "l0",
                "edges": [
                    {{"from": "l0", "to": "l1", "action": "a",
                     "guard": [{{"clock": "{clock}", "op": "{op}", "const": {constant}}}],
                     "resets": []}}
                ]
            }}"#
        ))
    }

    #[test]
    fn one_clock_with_max_two_has_six_regions_per_location() {
        let a = one_edge("x", "=", 2);
        let g = region_graph(&a);
        assert_eq!(g.count_at(0), 6);
        assert_eq!(g.count_at(1), 6);
    }

    #[test]
    fn one_clock_region_counts_follow_the_closed_form() {
        for c in 1..=5 {
            let a = one_edge("x", "=", c);
            let g = region_graph(&a);
            // {0},(0,1),…,{c},(c,∞): 2c+2 regions.
            assert_eq!(g.count_at(0), (2 * c + 2) as usize);
        }
    }

    #[test]
    fn zero_clocks_give_one_region_per_location() {
        let a = automaton(
            r#"{
                "clocks": [],
                "actions": ["a"],
                "locations": ["l0", "l1"],
                "initial": "l0",
                "edges": [
                    {"from": "l0", "to": "l1", "action": "a", "guard": [], "resets": []}
                ]
            }"#,
        );
        let g = region_graph(&a);
        assert_eq!(g.count_at(0), 1);
        assert_eq!(g.count_at(1), 1);
    }

    #[test]
    fn action_edges_come_only_from_the_guard_region() {
        let a = one_edge("x", "=", 2);
        let g = region_graph(&a);
        let sources: Vec<&Region> = g
            .regions
            .iter()
            .enumerate()
            .filter(|(i, _)| !g.action_edges[*i].is_empty())
            .map(|(_, r)| r)
            .collect();
        assert_eq!(sources.len(), 1);
        assert_eq!(sources[0].location, 0);
        assert_eq!(sources[0].clocks, vec![ClockClass::At(2, 0)]);
    }

    #[test]
    fn ticks_walk_the_line_and_saturate() {
        let a = one_edge("x", "=", 2);
        let g = region_graph(&a);
        let s = TimedState {
            location: 0,
            valuation: vec![Rat::from_integer(0)],
        };
        let mut cur = g.region_of(&s);
        let mut pattern = Vec::new();
        for _ in 0..8 {
            pattern.push(g.regions[cur].clocks[0]);
            cur = g.tick_next[cur];
        }
        assert_eq!(
            pattern,
            vec![
                ClockClass::At(0, 0),
                ClockClass::At(0, 1),
                ClockClass::At(1, 0),
                ClockClass::At(1, 1),
                ClockClass::At(2, 0),
                ClockClass::Above,
                ClockClass::Above,
                ClockClass::Above,
            ]
        );
    }

    #[test]
    fn region_bisim_matches_the_expected_flavor_verdicts() {
        let a = one_edge("x", "=", 2);
        let b = one_edge("y", "=", 5);
        let pa = a.initial_state();
        let pb = b.initial_state();
        assert!(region_bisim(&a, &pa, &b, &pb, RegionFlavor::Strong));
        assert!(region_bisim(&a, &pa, &a, &pa, RegionFlavor::Strong));

        let wait = one_edge("x", ">=", 1);
        let now = one_edge("y", ">=", 0);
        let pw = wait.initial_state();
        let pn = now.initial_state();
        assert!(!region_bisim(&wait, &pw, &now, &pn, RegionFlavor::Strong));
        assert!(region_bisim(&wait, &pw, &now, &pn, RegionFlavor::Delay));
        assert!(region_bisim(
            &wait,
            &pw,
            &now,
            &pn,
            RegionFlavor::Observational
        ));
    }

    #[test]
    fn region_bisim_agrees_with_the_node_solver_on_handmade_pairs() {
        let pairs = [
            (one_edge("x", "=", 2), one_edge("y", "=", 5)),
            (one_edge("x", "=", 2), one_edge("y", "=", 2)),
            (one_edge("x", ">=", 1), one_edge("y", ">=", 0)),
            (one_edge("x", "<", 3), one_edge("y", "<=", 3)),
        ];
        for (a, b) in pairs {
            let pa = a.initial_state();
            let pb = b.initial_state();
            let ia = Instance::new(&a, &pa).unwrap();
            let ib = Instance::new(&b, &pb).unwrap();
            for (rf, tf) in [
                (RegionFlavor::Strong, TaFlavor::Strong),
                (RegionFlavor::Delay, TaFlavor::Delay),
                (RegionFlavor::Observational, TaFlavor::Observational),
            ] {
                assert_eq!(
                    region_bisim(&a, &pa, &b, &pb, rf),
                    relations::ta_bisim(&ia, &ib, tf).related,
                    "flavor {rf:?}"
                );
            }
        }
    }

    #[test]
    fn grid_game_refutes_the_separated_pair_and_accepts_identity() {
        let a = one_edge("x", "=", 2);
        let b = one_edge("y", "=", 5);
        let pa = a.initial_state();
        let pb = b.initial_state();
        assert!(!grid_timed_bisim(&a, &pa, &b, &pb, Rat::new(1, 2), 12));
        assert!(grid_timed_bisim(&a, &pa, &a, &pa, Rat::new(1, 2), 12));
    }
}
