//! Corner point abstraction of clock values and delays.
//!
//! Dense time is folded onto values `q + k*d` where `q` is an exact rational
//! and `d` is one shared positive infinitesimal. Guards carry integer
//! constants, so at a tie only the sign of `k` matters: stored states keep
//! `k` in `{-1, 0, +1}` and clamp every clock that passed its maximum
//! constant to the inert representative just above it. Delay amounts,
//! however, may briefly need `|k| = 2`: the largest delay that keeps a
//! `q + d` state inside a strictly bounded zone subtracts the infinitesimal
//! twice, and collapsing it early would move the other side of a game onto
//! the wrong side of a guard.

use crate::automaton::{render_rational, ClockConstraint, CmpOp, MaxConstants, TimedAutomaton, TimedState};
use crate::zone::{Bound, Zone};
use crate::zone_graph::{NodeId, ZoneGraph};
use crate::Rat;
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::fmt;

/// A value `base + steps * d` for one shared infinitesimal `d > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DeltaValue {
    pub base: Rat,
    pub steps: i32,
}

impl DeltaValue {
    pub fn new(base: Rat, steps: i32) -> DeltaValue {
        DeltaValue { base, steps }
    }

    pub fn int(v: i64) -> DeltaValue {
        DeltaValue::new(Rat::from_integer(v), 0)
    }

    pub fn zero() -> DeltaValue {
        DeltaValue::int(0)
    }

    pub fn add(self, other: DeltaValue) -> DeltaValue {
        DeltaValue::new(self.base + other.base, self.steps + other.steps)
    }

    /// Collapses the infinitesimal coefficient to its sign.
    pub fn signed(self) -> DeltaValue {
        DeltaValue::new(self.base, self.steps.signum())
    }

    pub fn is_negative(self) -> bool {
        self < DeltaValue::zero()
    }

    /// Comparison against an integer guard constant.
    pub fn cmp_int(self, c: i64) -> Ordering {
        self.base
            .cmp(&Rat::from_integer(c))
            .then_with(|| self.steps.cmp(&0))
    }

    pub fn satisfies(self, op: CmpOp, c: i64) -> bool {
        let ord = self.cmp_int(c);
        match op {
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ge => ord != Ordering::Less,
            CmpOp::Gt => ord == Ordering::Greater,
        }
    }

    /// The fractional part of the rational base.
    pub fn frac(self) -> Rat {
        self.base - self.base.floor()
    }
}

impl PartialOrd for DeltaValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DeltaValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.base
            .cmp(&other.base)
            .then_with(|| self.steps.cmp(&other.steps))
    }
}

impl fmt::Display for DeltaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render_rational(self.base))?;
        match self.steps.signum() {
            1 => write!(f, "+d"),
            -1 => write!(f, "-d"),
            _ => Ok(()),
        }
    }
}

/// A location with corner point clock values, kept normalised: every clock
/// beyond its maximum constant is clamped to the representative just above
/// that constant, and the infinitesimal coefficients are renumbered to the
/// smallest magnitudes that keep their signs and their relative order. Signs
/// decide the plain guard comparisons, while the order across clocks decides
/// the diagonal bounds of the zones, so collapsing each coefficient to its
/// sign alone would merge states the zone graph tells apart.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CornerState {
    pub location: usize,
    pub values: Vec<DeltaValue>,
}

impl CornerState {
    /// Lifts an exact rational state, clamping against `max_constants`.
    pub fn from_state(state: &TimedState, max_constants: &MaxConstants) -> CornerState {
        let mut s = CornerState {
            location: state.location,
            values: state
                .valuation
                .iter()
                .map(|&v| DeltaValue::new(v, 0))
                .collect(),
        };
        s.normalize(max_constants);
        s
    }

    /// Applies clamping and coefficient renumbering in place.
    pub fn normalize(&mut self, max_constants: &MaxConstants) {
        for (clock, v) in self.values.iter_mut().enumerate() {
            let ceiling = max_constants.get(self.location, clock);
            if v.cmp_int(ceiling) == Ordering::Greater {
                *v = DeltaValue::new(Rat::from_integer(ceiling), 1);
            }
        }
        compress_steps(&mut self.values);
    }

    pub fn satisfies(&self, guard: &[ClockConstraint]) -> bool {
        guard
            .iter()
            .all(|c| self.values[c.clock].satisfies(c.op, c.constant))
    }

    /// Indices of the automaton edges enabled here.
    pub fn enabled(&self, automaton: &TimedAutomaton) -> Vec<usize> {
        automaton
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.from == self.location && self.satisfies(&e.guard))
            .map(|(i, _)| i)
            .collect()
    }

    /// Advances every clock by `d` and renormalises.
    pub fn apply_delay(&self, d: DeltaValue, max_constants: &MaxConstants) -> CornerState {
        debug_assert!(!d.is_negative(), "delays are non-negative");
        let mut s = CornerState {
            location: self.location,
            values: self.values.iter().map(|v| v.add(d)).collect(),
        };
        s.normalize(max_constants);
        s
    }

    /// Fires an enabled edge; `None` when the guard fails.
    pub fn apply_edge(
        &self,
        automaton: &TimedAutomaton,
        edge: usize,
        max_constants: &MaxConstants,
    ) -> Option<CornerState> {
        let e = &automaton.edges[edge];
        if e.from != self.location || !self.satisfies(&e.guard) {
            return None;
        }
        let mut values = self.values.clone();
        for &r in &e.resets {
            values[r] = DeltaValue::zero();
        }
        let mut s = CornerState {
            location: e.to,
            values,
        };
        s.normalize(max_constants);
        Some(s)
    }

    pub fn render(&self, automaton: &TimedAutomaton) -> String {
        if self.values.is_empty() {
            return automaton.locations[self.location].clone();
        }
        let parts: Vec<String> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{}={}", automaton.clocks[i], v))
            .collect();
        format!("{}:{}", automaton.locations[self.location], parts.join(","))
    }
}

/// Membership of a corner valuation in a zone; the infinitesimal decides
/// ties against the scaled integer bounds.
/// Renumbers infinitesimal coefficients to the smallest magnitudes that keep
/// their signs and their order across clocks: distinct positive step counts
/// become 1, 2, ... by rank, distinct negative ones -1, -2, ... towards the
/// more negative. Plain bounds read only the sign of a coefficient and
/// diagonal bounds only the sign of a pairwise difference, so this quotient
/// is exact for every comparison the zones and guards can make while keeping
/// the set of reachable corner states finite.
fn compress_steps(values: &mut [DeltaValue]) {
    let mut pos: Vec<i32> = values.iter().map(|v| v.steps).filter(|&s| s > 0).collect();
    pos.sort_unstable();
    pos.dedup();
    let mut neg: Vec<i32> = values.iter().map(|v| v.steps).filter(|&s| s < 0).collect();
    neg.sort_unstable();
    neg.dedup();
    for v in values.iter_mut() {
        if v.steps > 0 {
            let rank = pos.iter().position(|&s| s == v.steps).unwrap() + 1;
            v.steps = rank as i32;
        } else if v.steps < 0 {
            let rank = neg.len() - neg.iter().position(|&s| s == v.steps).unwrap();
            v.steps = -(rank as i32);
        }
    }
}

pub fn zone_admits(zone: &Zone, values: &[DeltaValue]) -> bool {
    if zone.is_empty() {
        return false;
    }
    let scale = Rat::from_integer(zone.scale());
    let val = |i: usize| -> DeltaValue {
        if i == 0 {
            DeltaValue::zero()
        } else {
            DeltaValue::new(values[i - 1].base * scale, values[i - 1].steps)
        }
    };
    for i in 0..=values.len() {
        for j in 0..=values.len() {
            let diff = val(i).add(DeltaValue::new(-val(j).base, -val(j).steps));
            let ok = match zone.at(i, j) {
                Bound::Inf => true,
                Bound::Le(v) => diff.cmp_int(v) != Ordering::Greater,
                Bound::Lt(v) => diff.cmp_int(v) == Ordering::Less,
            };
            if !ok {
                return false;
            }
        }
    }
    true
}

/// Membership up to clamping. A clock sitting at its clamp representative
/// (just above the maximum constant) stands for every real value beyond the
/// constant, so the test asks whether the zone meets the set of valuations
/// this state abbreviates. Against a canonical zone the entrywise check below
/// is exact: a clamped clock contributes only a lower bound, so any
/// inconsistency closes through a single zone entry.
pub fn zone_admits_clamped(zone: &Zone, values: &[DeltaValue], clamped: &[bool]) -> bool {
    if zone.is_empty() {
        return false;
    }
    let scale = Rat::from_integer(zone.scale());
    let val = |i: usize| -> DeltaValue {
        if i == 0 {
            DeltaValue::zero()
        } else {
            DeltaValue::new(values[i - 1].base * scale, values[i - 1].steps)
        }
    };
    let is_clamped = |i: usize| i > 0 && clamped[i - 1];
    for i in 0..=values.len() {
        for j in 0..=values.len() {
            if i == j || is_clamped(j) {
                continue;
            }
            let bound = zone.at(i, j);
            let ok = if is_clamped(i) {
                // The clamped clock ranges over an open tail whose infimum
                // sits at its base; the entry must admit something past it.
                let inf = DeltaValue::new(val(i).base - val(j).base, -val(j).steps);
                match bound {
                    Bound::Inf => true,
                    Bound::Le(v) | Bound::Lt(v) => inf.cmp_int(v) == Ordering::Less,
                }
            } else {
                let diff = val(i).add(DeltaValue::new(-val(j).base, -val(j).steps));
                match bound {
                    Bound::Inf => true,
                    Bound::Le(v) => diff.cmp_int(v) != Ordering::Greater,
                    Bound::Lt(v) => diff.cmp_int(v) == Ordering::Less,
                }
            };
            if !ok {
                return false;
            }
        }
    }
    true
}

/// Flags the clocks currently held at their clamp representative.
fn clamp_flags(state: &CornerState, max_constants: &MaxConstants) -> Vec<bool> {
    state
        .values
        .iter()
        .enumerate()
        .map(|(clock, v)| {
            *v == DeltaValue::new(
                Rat::from_integer(max_constants.get(state.location, clock)),
                1,
            )
        })
        .collect()
}

/// The graph node containing a corner state, if any. Clamped clocks match
/// any node consistent with them lying beyond their maximum constants; such
/// nodes differ only in directions no reachable guard observes.
pub fn containing_node(graph: &ZoneGraph, state: &CornerState) -> Option<NodeId> {
    let clamped = clamp_flags(state, graph.max_constants());
    graph
        .nodes()
        .find(|(_, n)| {
            n.location == state.location && zone_admits_clamped(&n.zone, &state.values, &clamped)
        })
        .map(|(id, _)| id)
}

/// Why a delay is interesting from a given corner state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DelayKind {
    /// Largest delay that stays inside the current node.
    MaxInNode,
    /// Smallest delay that enters the given delay successor node.
    EnterNode(NodeId),
    /// Delay aligning a fractional clock with the next integer.
    Fractional,
    /// Inert representative for a time-unbounded node: far enough that every
    /// clock has passed its maximum constant.
    Saturation,
}

/// One relevant delay: its amount and the state it lands in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CpDelay {
    pub amount: DeltaValue,
    pub landing: CornerState,
    pub kind: DelayKind,
}

/// Delay reaching exactly the upper frontier given by `bound` for a clock at
/// `v` (just below it when the frontier is strict).
fn delay_to_upper(bound: Bound, scale: i64, v: DeltaValue) -> Option<DeltaValue> {
    match bound {
        Bound::Inf => None,
        Bound::Le(b) => Some(DeltaValue::new(Rat::new(b, scale) - v.base, -v.steps)),
        Bound::Lt(b) => Some(DeltaValue::new(Rat::new(b, scale) - v.base, -v.steps - 1)),
    }
}

/// Delay reaching exactly the lower frontier given by `bound` (entry bound
/// `0 - x <= w`, so the frontier is `-w`); just above it when strict.
fn delay_to_lower(bound: Bound, scale: i64, v: DeltaValue) -> Option<DeltaValue> {
    match bound {
        Bound::Inf => None,
        Bound::Le(w) => Some(DeltaValue::new(Rat::new(-w, scale) - v.base, -v.steps)),
        Bound::Lt(w) => Some(DeltaValue::new(Rat::new(-w, scale) - v.base, -v.steps + 1)),
    }
}

/// Saturation amount: one more than the largest remaining climb to any
/// clock's maximum constant.
fn saturation_amount(graph: &ZoneGraph, state: &CornerState) -> DeltaValue {
    let m = graph.max_constants();
    let mut climb = Rat::zero();
    for (clock, v) in state.values.iter().enumerate() {
        let gap = Rat::from_integer(m.get(state.location, clock)) - v.base;
        if gap > climb {
            climb = gap;
        }
    }
    DeltaValue::new(climb + Rat::one(), 0)
}

/// Largest delay keeping `state` inside `zone`, or `None` when the zone is
/// time-unbounded from here.
fn max_delay_within(zone: &Zone, state: &CornerState) -> Option<DeltaValue> {
    let mut best: Option<DeltaValue> = None;
    for clock in 0..state.values.len() {
        if let Some(d) = delay_to_upper(zone.upper(clock), zone.scale(), state.values[clock]) {
            best = Some(match best {
                Some(b) if b <= d => b,
                _ => d,
            });
        }
    }
    best
}

/// Smallest delay moving `state` onto (or just past) the lower frontier of
/// `zone`.
fn min_delay_into(zone: &Zone, state: &CornerState) -> DeltaValue {
    let mut need = DeltaValue::zero();
    for clock in 0..state.values.len() {
        if let Some(d) = delay_to_lower(zone.lower(clock), zone.scale(), state.values[clock]) {
            if d > need {
                need = d;
            }
        }
    }
    need
}

/// The relevant delays from a corner state, sorted by amount:
///
/// * the largest delay staying in the current node (or the saturation
///   representative when the node is time-unbounded),
/// * for every node in the delay chain, the smallest delay entering it,
/// * for every clock with a fractional base, the delays `f-d`, `f`, `f+d`
///   with `f` the distance to the next integer, kept when they land in a
///   covered node.
pub fn cp_delays(graph: &ZoneGraph, state: &CornerState) -> Vec<CpDelay> {
    let node = containing_node(graph, state)
        .unwrap_or_else(|| panic!("corner state lies outside the zone graph cover: {state:?}"));
    let m = graph.max_constants();
    let mut out: Vec<CpDelay> = Vec::new();
    let mut push = |amount: DeltaValue, kind: DelayKind| {
        debug_assert!(!amount.is_negative(), "candidate delay is negative");
        let landing = state.apply_delay(amount, m);
        out.push(CpDelay {
            amount,
            landing,
            kind,
        });
    };

    match max_delay_within(&graph.node(node).zone, state) {
        Some(d) => push(d, DelayKind::MaxInNode),
        None => push(saturation_amount(graph, state), DelayKind::Saturation),
    }
    for &succ in graph.delay_successor_nodes(node).iter().skip(1) {
        let d = min_delay_into(&graph.node(succ).zone, state);
        push(d, DelayKind::EnterNode(succ));
    }
    for v in &state.values {
        let f = v.frac();
        if f.is_zero() {
            continue;
        }
        let f = Rat::one() - f;
        for steps in [-1, 0, 1] {
            let d = DeltaValue::new(f, steps);
            if d.is_negative() {
                continue;
            }
            let landing = state.apply_delay(d, m);
            if containing_node(graph, &landing).is_some() {
                out.push(CpDelay {
                    amount: d,
                    landing,
                    kind: DelayKind::Fractional,
                });
            }
        }
    }

    out.sort_by(|a, b| a.amount.cmp(&b.amount));
    out.dedup_by(|a, b| a.amount == b.amount);
    out
}

/// Delays reaching the far end of every node in the delay chain: for each
/// chain node the largest delay still inside it, with the saturation
/// representative standing in for a time-unbounded final node.
pub fn end_of_zone_delays(graph: &ZoneGraph, state: &CornerState) -> Vec<CpDelay> {
    let node = containing_node(graph, state)
        .unwrap_or_else(|| panic!("corner state lies outside the zone graph cover: {state:?}"));
    let m = graph.max_constants();
    let mut out = Vec::new();
    for &chain_node in &graph.delay_successor_nodes(node) {
        let (amount, kind) = match max_delay_within(&graph.node(chain_node).zone, state) {
            Some(d) => (d, DelayKind::MaxInNode),
            None => (saturation_amount(graph, state), DelayKind::Saturation),
        };
        if amount.is_negative() {
            continue;
        }
        out.push(CpDelay {
            amount,
            landing: state.apply_delay(amount, m),
            kind,
        });
    }
    out.sort_by(|a, b| a.amount.cmp(&b.amount));
    out.dedup_by(|a, b| a.amount == b.amount);
    out
}
