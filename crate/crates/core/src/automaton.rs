//! Timed automata, their document format and concrete (dense time) semantics.
//!
//! An automaton is a set of locations over a finite action alphabet, with
//! edges carrying a guard (a conjunction of comparisons of single clocks
//! against natural constants), an action label and a set of clocks to reset.
//! Location invariants are not supported. States pair a location with an
//! exact rational valuation of the clocks.

use crate::Rat;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// Comparison operator allowed in guards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl CmpOp {
    /// Evaluates `lhs op rhs` for a rational left operand.
    pub fn eval(self, lhs: Rat, rhs: i64) -> bool {
        let rhs = Rat::from_integer(rhs);
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One conjunct of a guard: `clock op constant`, with a natural constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ClockConstraint {
    pub clock: usize,
    pub op: CmpOp,
    pub constant: i64,
}

impl ClockConstraint {
    pub fn holds(&self, valuation: &[Rat]) -> bool {
        self.op.eval(valuation[self.clock], self.constant)
    }
}

/// Edge of a timed automaton: source, guard, action, resets, target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub action: usize,
    pub guard: Vec<ClockConstraint>,
    pub resets: Vec<usize>,
}

/// A timed automaton over named clocks, actions and locations.
///
/// All cross references are by index; the names are kept for parsing and
/// rendering. The initial location starts with every clock at zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedAutomaton {
    pub clocks: Vec<String>,
    pub actions: Vec<String>,
    pub locations: Vec<String>,
    pub initial: usize,
    pub edges: Vec<Edge>,
}

/// State of the underlying timed transition system.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TimedState {
    pub location: usize,
    pub valuation: Vec<Rat>,
}

/// Per location and clock maximum constants, closed under non-resetting edges.
///
/// `get(l, x)` bounds every constant that clock `x` can still be compared
/// against from location `l` before being reset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxConstants {
    per_location: Vec<Vec<i64>>,
}

impl MaxConstants {
    pub fn get(&self, location: usize, clock: usize) -> i64 {
        self.per_location[location][clock]
    }

    /// Largest entry of the table, 0 when there are no clocks.
    pub fn global_max(&self) -> i64 {
        self.per_location
            .iter()
            .flat_map(|row| row.iter().copied())
            .max()
            .unwrap_or(0)
    }

    /// Per clock maximum over all locations.
    pub fn per_clock_max(&self, clock: usize) -> i64 {
        self.per_location
            .iter()
            .map(|row| row[clock])
            .max()
            .unwrap_or(0)
    }

    pub fn row(&self, location: usize) -> &[i64] {
        &self.per_location[location]
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AutomatonError {
    #[error("document is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate {kind} name `{name}`")]
    DuplicateName { kind: &'static str, name: String },
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("guard constant {0} is negative; constants must be natural numbers")]
    NegativeConstant(i64),
    #[error("valuation assigns {0} clocks, automaton has {1}")]
    ValuationArity(usize, usize),
    #[error("clock value `{0}` is negative")]
    NegativeClockValue(String),
    #[error("delay is negative")]
    NegativeDelay,
    #[error("edge guard is not satisfied in the given state")]
    GuardFails,
    #[error("edge index {0} out of range")]
    NoSuchEdge(usize),
    #[error("malformed state designator `{0}`: expected LOCATION[:clock=value,...]")]
    BadDesignator(String),
    #[error("malformed rational `{0}`: expected an integer, decimal or p/q fraction")]
    BadRational(String),
    #[error("automaton has no locations")]
    Empty,
}

mod doc {
    //! Serde mirror of the on-disk document format.

    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize)]
    pub struct Document {
        pub clocks: Vec<String>,
        pub actions: Vec<String>,
        pub locations: Vec<String>,
        pub initial: String,
        pub edges: Vec<EdgeDoc>,
    }

    #[derive(Serialize, Deserialize)]
    pub struct EdgeDoc {
        pub from: String,
        pub to: String,
        pub action: String,
        #[serde(default)]
        pub guard: Vec<GuardDoc>,
        #[serde(default)]
        pub resets: Vec<String>,
    }

    #[derive(Serialize, Deserialize)]
    pub struct GuardDoc {
        pub clock: String,
        pub op: super::CmpOp,
        #[serde(rename = "const")]
        pub constant: i64,
    }
}

fn index_of(kind: &'static str, names: &[String], name: &str) -> Result<usize, AutomatonError> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| AutomatonError::UnknownName {
            kind,
            name: name.to_string(),
        })
}

fn check_unique(kind: &'static str, names: &[String]) -> Result<(), AutomatonError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n.clone()) {
            return Err(AutomatonError::DuplicateName {
                kind,
                name: n.clone(),
            });
        }
    }
    Ok(())
}

impl TimedAutomaton {
    /// Parses the JSON document format.
    pub fn parse(text: &str) -> Result<Self, AutomatonError> {
        let doc: doc::Document = serde_json::from_str(text)?;
        check_unique("clock", &doc.clocks)?;
        check_unique("action", &doc.actions)?;
        check_unique("location", &doc.locations)?;
        if doc.locations.is_empty() {
            return Err(AutomatonError::Empty);
        }
        let initial = index_of("location", &doc.locations, &doc.initial)?;
        let mut edges = Vec::with_capacity(doc.edges.len());
        for e in &doc.edges {
            let mut guard = Vec::with_capacity(e.guard.len());
            for g in &e.guard {
                if g.constant < 0 {
                    return Err(AutomatonError::NegativeConstant(g.constant));
                }
                guard.push(ClockConstraint {
                    clock: index_of("clock", &doc.clocks, &g.clock)?,
                    op: g.op,
                    constant: g.constant,
                });
            }
            let mut resets = Vec::with_capacity(e.resets.len());
            for r in &e.resets {
                let idx = index_of("clock", &doc.clocks, r)?;
                if !resets.contains(&idx) {
                    resets.push(idx);
                }
            }
            resets.sort_unstable();
            edges.push(Edge {
                from: index_of("location", &doc.locations, &e.from)?,
                to: index_of("location", &doc.locations, &e.to)?,
                action: index_of("action", &doc.actions, &e.action)?,
                guard,
                resets,
            });
        }
        Ok(TimedAutomaton {
            clocks: doc.clocks,
            actions: doc.actions,
            locations: doc.locations,
            initial,
            edges,
        })
    }

    /// Renders the automaton back to the document format.
    pub fn render(&self) -> String {
        let doc = doc::Document {
            clocks: self.clocks.clone(),
            actions: self.actions.clone(),
            locations: self.locations.clone(),
            initial: self.locations[self.initial].clone(),
            edges: self
                .edges
                .iter()
                .map(|e| doc::EdgeDoc {
                    from: self.locations[e.from].clone(),
                    to: self.locations[e.to].clone(),
                    action: self.actions[e.action].clone(),
                    guard: e
                        .guard
                        .iter()
                        .map(|g| doc::GuardDoc {
                            clock: self.clocks[g.clock].clone(),
                            op: g.op,
                            constant: g.constant,
                        })
                        .collect(),
                    resets: e.resets.iter().map(|&r| self.clocks[r].clone()).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("document serialization cannot fail")
    }

    pub fn clock_count(&self) -> usize {
        self.clocks.len()
    }

    /// The initial state: the initial location with all clocks at zero.
    pub fn initial_state(&self) -> TimedState {
        TimedState {
            location: self.initial,
            valuation: vec![Rat::zero(); self.clocks.len()],
        }
    }

    /// Checks a rational valuation against a guard.
    pub fn satisfies(valuation: &[Rat], guard: &[ClockConstraint]) -> bool {
        guard.iter().all(|c| c.holds(valuation))
    }

    /// Indices of the edges enabled in `state`.
    pub fn enabled(&self, state: &TimedState) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.from == state.location && Self::satisfies(&state.valuation, &e.guard))
            .map(|(i, _)| i)
            .collect()
    }

    /// Delay transition: lets `d >= 0` time units elapse.
    pub fn delay(&self, state: &TimedState, d: Rat) -> Result<TimedState, AutomatonError> {
        if d.is_negative() {
            return Err(AutomatonError::NegativeDelay);
        }
        Ok(TimedState {
            location: state.location,
            valuation: state.valuation.iter().map(|&v| v + d).collect(),
        })
    }

    /// Discrete transition through edge `edge`, resetting its clocks to zero.
    pub fn fire(&self, state: &TimedState, edge: usize) -> Result<TimedState, AutomatonError> {
        let e = self
            .edges
            .get(edge)
            .ok_or(AutomatonError::NoSuchEdge(edge))?;
        if e.from != state.location || !Self::satisfies(&state.valuation, &e.guard) {
            return Err(AutomatonError::GuardFails);
        }
        let mut valuation = state.valuation.clone();
        for &r in &e.resets {
            valuation[r] = Rat::zero();
        }
        Ok(TimedState {
            location: e.to,
            valuation,
        })
    }

    /// Least table with `get(l, x)` at least every constant comparing `x` on
    /// an edge out of `l`, and at least `get(l', x)` for every non-resetting
    /// edge from `l` to `l'`.
    pub fn max_constants(&self) -> MaxConstants {
        let mut per_location = vec![vec![0i64; self.clocks.len()]; self.locations.len()];
        for e in &self.edges {
            for g in &e.guard {
                let slot = &mut per_location[e.from][g.clock];
                *slot = (*slot).max(g.constant);
            }
        }
        let mut changed = true;
        while changed {
            changed = false;
            for e in &self.edges {
                for x in 0..self.clocks.len() {
                    if e.resets.contains(&x) {
                        continue;
                    }
                    let target = per_location[e.to][x];
                    if per_location[e.from][x] < target {
                        per_location[e.from][x] = target;
                        changed = true;
                    }
                }
            }
        }
        MaxConstants { per_location }
    }

    /// Parses `LOCATION[:clock=value,...]`; omitted clocks default to zero.
    ///
    /// Values may be integers, decimals (`0.3`) or fractions (`3/10`).
    pub fn parse_state(&self, designator: &str) -> Result<TimedState, AutomatonError> {
        let (loc_name, rest) = match designator.split_once(':') {
            Some((l, r)) => (l, Some(r)),
            None => (designator, None),
        };
        let location = index_of("location", &self.locations, loc_name.trim())?;
        let mut valuation = vec![Rat::zero(); self.clocks.len()];
        if let Some(rest) = rest {
            for part in rest.split(',') {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                let (clock_name, value) = part
                    .split_once('=')
                    .ok_or_else(|| AutomatonError::BadDesignator(designator.to_string()))?;
                let clock = index_of("clock", &self.clocks, clock_name.trim())?;
                let value = parse_rational(value.trim())?;
                if value.is_negative() {
                    return Err(AutomatonError::NegativeClockValue(part.to_string()));
                }
                valuation[clock] = value;
            }
        }
        Ok(TimedState {
            location,
            valuation,
        })
    }

    /// Renders a state as a designator string.
    pub fn render_state(&self, state: &TimedState) -> String {
        if state.valuation.is_empty() {
            return self.locations[state.location].clone();
        }
        let parts: Vec<String> = state
            .valuation
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{}={}", self.clocks[i], render_rational(*v)))
            .collect();
        format!("{}:{}", self.locations[state.location], parts.join(","))
    }
}

/// Parses an exact rational from integer, decimal or `p/q` notation.
pub fn parse_rational(text: &str) -> Result<Rat, AutomatonError> {
    let bad = || AutomatonError::BadRational(text.to_string());
    if let Some((p, q)) = text.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rat::new(p, q));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        let whole_part: i64 = if whole.is_empty() {
            0
        } else {
            whole.trim().parse().map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: i64 = frac.parse().map_err(|_| bad())?;
        let denom = 10i64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
        let frac_part = Rat::new(digits, denom);
        let magnitude = Rat::from_integer(whole_part.abs()) + frac_part;
        return Ok(if text.trim_start().starts_with('-') {
            -magnitude
        } else {
            magnitude
        });
    }
    text.trim()
        .parse::<i64>()
        .map(Rat::from_integer)
        .map_err(|_| bad())
}

/// Renders a rational compactly: integers plain, otherwise `p/q`.
pub fn render_rational(r: Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_clock_doc() -> String {
        r#"{
            "clocks": ["x", "y"],
            "actions": ["a"],
            "locations": ["l", "lp"],
            "initial": "l",
            "edges": [
                {
                    "from": "l", "to": "lp", "action": "a",
                    "guard": [
                        {"clock": "x", "op": "<", "const": 1},
                        {"clock": "y", "op": ">", "const": 2}
                    ],
                    "resets": ["y"]
                }
            ]
        }"#
        .to_string()
    }

    #[test]
    fn parse_then_render_round_trips() {
        let a = TimedAutomaton::parse(&two_clock_doc()).unwrap();
        let b = TimedAutomaton::parse(&a.render()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn delay_then_fire_produces_expected_trace() {
        // (l,(0.3,1.6)) --0.5--> (l,(0.8,2.1)) --a--> (lp,(0.8,0))
        let a = TimedAutomaton::parse(&two_clock_doc()).unwrap();
        let s0 = a.parse_state("l:x=0.3,y=1.6").unwrap();
        let s1 = a.delay(&s0, Rat::new(1, 2)).unwrap();
        assert_eq!(s1.valuation, vec![Rat::new(4, 5), Rat::new(21, 10)]);
        assert_eq!(a.enabled(&s1), vec![0]);
        let s2 = a.fire(&s1, 0).unwrap();
        assert_eq!(s2.location, 1);
        assert_eq!(s2.valuation, vec![Rat::new(4, 5), Rat::zero()]);
    }

    #[test]
    fn fire_rejects_unsatisfied_guard() {
        let a = TimedAutomaton::parse(&two_clock_doc()).unwrap();
        let s0 = a.parse_state("l:x=0.3,y=1.6").unwrap();
        assert!(a.enabled(&s0).is_empty());
        assert!(matches!(a.fire(&s0, 0), Err(AutomatonError::GuardFails)));
    }

    #[test]
    fn max_constants_follow_non_resetting_edges() {
        // l0 -a, x<=3, reset x-> l1 -a, x<=7, y<=2-> l2, so from l0 the clock
        // y keeps its downstream ceiling while x does not.
        let text = r#"{
            "clocks": ["x", "y"],
            "actions": ["a"],
            "locations": ["l0", "l1", "l2"],
            "initial": "l0",
            "edges": [
                {"from": "l0", "to": "l1", "action": "a",
                 "guard": [{"clock": "x", "op": "<=", "const": 3}], "resets": ["x"]},
                {"from": "l1", "to": "l2", "action": "a",
                 "guard": [{"clock": "x", "op": "<=", "const": 7},
                           {"clock": "y", "op": "<=", "const": 2}], "resets": []}
            ]
        }"#;
        let a = TimedAutomaton::parse(text).unwrap();
        let m = a.max_constants();
        assert_eq!(m.get(0, 0), 3);
        assert_eq!(m.get(0, 1), 2);
        assert_eq!(m.get(1, 0), 7);
        assert_eq!(m.get(1, 1), 2);
        assert_eq!(m.get(2, 0), 0);
        assert_eq!(m.get(2, 1), 0);
        assert_eq!(m.global_max(), 7);
    }

    #[test]
    fn max_constants_reach_fixpoint_on_cycles() {
        let text = r#"{
            "clocks": ["x"],
            "actions": ["a"],
            "locations": ["l0", "l1"],
            "initial": "l0",
            "edges": [
                {"from": "l0", "to": "l1", "action": "a", "guard": [], "resets": []},
                {"from": "l1", "to": "l0", "action": "a",
                 "guard": [{"clock": "x", "op": ">", "const": 5}], "resets": []}
            ]
        }"#;
        let a = TimedAutomaton::parse(text).unwrap();
        let m = a.max_constants();
        assert_eq!(m.get(0, 0), 5);
        assert_eq!(m.get(1, 0), 5);
    }

    #[test]
    fn designator_parsing_accepts_fractions_and_defaults() {
        let a = TimedAutomaton::parse(&two_clock_doc()).unwrap();
        let s = a.parse_state("lp:x=3/10").unwrap();
        assert_eq!(s.location, 1);
        assert_eq!(s.valuation, vec![Rat::new(3, 10), Rat::zero()]);
        let bare = a.parse_state("l").unwrap();
        assert_eq!(bare, a.initial_state());
        assert!(a.parse_state("nowhere").is_err());
        assert!(a.parse_state("l:z=1").is_err());
        assert!(a.parse_state("l:x~1").is_err());
    }

    #[test]
    fn rational_parsing_is_exact() {
        assert_eq!(parse_rational("0.3").unwrap(), Rat::new(3, 10));
        assert_eq!(parse_rational("2").unwrap(), Rat::from_integer(2));
        assert_eq!(parse_rational("7/4").unwrap(), Rat::new(7, 4));
        assert_eq!(parse_rational(".5").unwrap(), Rat::new(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert_eq!(render_rational(Rat::new(3, 10)), "3/10");
        assert_eq!(render_rational(Rat::from_integer(4)), "4");
    }
}
