//! A modal logic with formula clocks: syntax, a parser and printer for the
//! concrete notation, an evaluator over corner point states, and the
//! construction of a distinguishing formula from a failed bisimulation
//! check.
//!
//! Concrete syntax by example: `tt`, `ff`, `x1 = 2 && <a> tt`,
//! `[b] x2 in (<c> EE(1 < x2 < 2 && <d> tt))`, `AA(x1 >= 3 || ff)`.
//! `EE` asks for some delay, `AA` for every delay, `x in (...)` starts a
//! formula clock at zero.

use crate::automaton::CmpOp;
use crate::corner::{containing_node, cp_delays, CornerState, DeltaValue};
use crate::relations::{self, CpMove, Instance};
use crate::zone_graph::ZoneGraph;
use crate::Rat;
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

/// One constraint on a formula clock: a comparison with a constant, or a
/// strict interval between consecutive integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClockAtom {
    Cmp {
        clock: String,
        op: CmpOp,
        constant: i64,
    },
    Between {
        low: i64,
        clock: String,
        high: i64,
    },
}

/// Formulas. Conjunction and disjunction are binary; the printer and parser
/// treat chains as nested to the right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MtFormula {
    True,
    False,
    And(Box<MtFormula>, Box<MtFormula>),
    Or(Box<MtFormula>, Box<MtFormula>),
    Diamond(String, Box<MtFormula>),
    BoxMod(String, Box<MtFormula>),
    SomeDelay(Box<MtFormula>),
    AllDelays(Box<MtFormula>),
    ClockIntro(String, Box<MtFormula>),
    Atom(ClockAtom),
}

#[derive(Debug, Error)]
pub enum FormulaError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("formula clock {clock} is unbound in {context}")]
    Unbound { clock: String, context: String },
    #[error("the start states are timed bisimilar, nothing distinguishes them")]
    Bisimilar,
    #[error("distinguishing formulas are built from the automaton start states only")]
    NotInitial,
}

/// A corner point state extended with the current formula clock values.
/// Later entries shadow earlier ones with the same name.
#[derive(Clone, Debug)]
pub struct ExtendedState {
    pub base: CornerState,
    pub assignment: Vec<(String, DeltaValue)>,
}

// ---------------------------------------------------------------- printing

fn write_or(f: &MtFormula, out: &mut String) {
    if let MtFormula::Or(l, r) = f {
        if matches!(**l, MtFormula::Or(..)) {
            out.push('(');
            write_or(l, out);
            out.push(')');
        } else {
            write_and(l, out);
        }
        out.push_str(" || ");
        write_or(r, out);
    } else {
        write_and(f, out);
    }
}

fn write_and(f: &MtFormula, out: &mut String) {
    if let MtFormula::And(l, r) = f {
        if matches!(**l, MtFormula::And(..) | MtFormula::Or(..)) {
            out.push('(');
            write_or(l, out);
            out.push(')');
        } else {
            write_unary(l, out);
        }
        out.push_str(" && ");
        write_and(r, out);
    } else {
        write_unary(f, out);
    }
}

fn write_unary(f: &MtFormula, out: &mut String) {
    match f {
        MtFormula::And(..) | MtFormula::Or(..) => {
            out.push('(');
            write_or(f, out);
            out.push(')');
        }
        MtFormula::Diamond(a, body) | MtFormula::BoxMod(a, body) => {
            let (open, close) = if matches!(f, MtFormula::Diamond(..)) {
                ('<', '>')
            } else {
                ('[', ']')
            };
            out.push(open);
            out.push_str(a);
            out.push(close);
            // Modality chains stay tight; anything else gets one space.
            if !matches!(**body, MtFormula::Diamond(..) | MtFormula::BoxMod(..)) {
                out.push(' ');
            }
            write_unary(body, out);
        }
        MtFormula::SomeDelay(body) => {
            out.push_str("EE(");
            write_or(body, out);
            out.push(')');
        }
        MtFormula::AllDelays(body) => {
            out.push_str("AA(");
            write_or(body, out);
            out.push(')');
        }
        MtFormula::ClockIntro(x, body) => {
            out.push_str(x);
            out.push_str(" in (");
            write_or(body, out);
            out.push(')');
        }
        MtFormula::True => out.push_str("tt"),
        MtFormula::False => out.push_str("ff"),
        MtFormula::Atom(ClockAtom::Cmp {
            clock,
            op,
            constant,
        }) => {
            out.push_str(clock);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            out.push_str(&constant.to_string());
        }
        MtFormula::Atom(ClockAtom::Between { low, clock, high }) => {
            out.push_str(&low.to_string());
            out.push_str(" < ");
            out.push_str(clock);
            out.push_str(" < ");
            out.push_str(&high.to_string());
        }
    }
}

pub fn render_formula(f: &MtFormula) -> String {
    let mut out = String::new();
    write_or(f, &mut out);
    out
}

impl fmt::Display for MtFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_formula(self))
    }
}

// ----------------------------------------------------------------- parsing

struct Parser<'t> {
    text: &'t [u8],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn error<T>(&self, message: impl Into<String>) -> Result<T, FormulaError> {
        Err(FormulaError::Syntax {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), FormulaError> {
        if self.eat(token) {
            Ok(())
        } else {
            self.error(format!("expected `{token}`"))
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        if !self
            .text
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_alphabetic() || *b == b'_')
        {
            return None;
        }
        while self
            .text
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
        {
            self.pos += 1;
        }
        Some(String::from_utf8_lossy(&self.text[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<i64, FormulaError> {
        self.skip_ws();
        let start = self.pos;
        while self.text.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.error("expected a number");
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| FormulaError::Syntax {
                offset: start,
                message: "number out of range".into(),
            })
    }

    /// Matches `in` as a whole word.
    fn eat_kw_in(&mut self) -> bool {
        self.skip_ws();
        let save = self.pos;
        match self.ident() {
            Some(w) if w == "in" => true,
            _ => {
                self.pos = save;
                false
            }
        }
    }

    fn cmp_op(&mut self) -> Result<CmpOp, FormulaError> {
        for (sym, op) in [
            ("<=", CmpOp::Le),
            ("<", CmpOp::Lt),
            ("=", CmpOp::Eq),
            (">=", CmpOp::Ge),
            (">", CmpOp::Gt),
        ] {
            if self.eat(sym) {
                return Ok(op);
            }
        }
        self.error("expected a comparison")
    }

    fn parse_or(&mut self) -> Result<MtFormula, FormulaError> {
        let first = self.parse_and()?;
        if self.eat("||") {
            let rest = self.parse_or()?;
            Ok(MtFormula::Or(Box::new(first), Box::new(rest)))
        } else {
            Ok(first)
        }
    }

    fn parse_and(&mut self) -> Result<MtFormula, FormulaError> {
        let first = self.parse_unary()?;
        if self.eat("&&") {
            let rest = self.parse_and()?;
            Ok(MtFormula::And(Box::new(first), Box::new(rest)))
        } else {
            Ok(first)
        }
    }

    fn parse_unary(&mut self) -> Result<MtFormula, FormulaError> {
        match self.peek() {
            Some(b'<') => {
                self.expect("<")?;
                let a = self.ident().ok_or(FormulaError::Syntax {
                    offset: self.pos,
                    message: "expected an action name".into(),
                })?;
                self.expect(">")?;
                Ok(MtFormula::Diamond(a, Box::new(self.parse_unary()?)))
            }
            Some(b'[') => {
                self.expect("[")?;
                let a = self.ident().ok_or(FormulaError::Syntax {
                    offset: self.pos,
                    message: "expected an action name".into(),
                })?;
                self.expect("]")?;
                Ok(MtFormula::BoxMod(a, Box::new(self.parse_unary()?)))
            }
            Some(b'(') => {
                self.expect("(")?;
                let inner = self.parse_or()?;
                self.expect(")")?;
                Ok(inner)
            }
            Some(b) if b.is_ascii_digit() => {
                let low = self.number()?;
                self.expect("<")?;
                let clock = self.ident().ok_or(FormulaError::Syntax {
                    offset: self.pos,
                    message: "expected a clock name".into(),
                })?;
                self.expect("<")?;
                let high = self.number()?;
                Ok(MtFormula::Atom(ClockAtom::Between { low, clock, high }))
            }
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => {
                let word = self.ident().unwrap();
                match word.as_str() {
                    "tt" => Ok(MtFormula::True),
                    "ff" => Ok(MtFormula::False),
                    "EE" | "AA" => {
                        self.expect("(")?;
                        let body = Box::new(self.parse_or()?);
                        self.expect(")")?;
                        Ok(if word == "EE" {
                            MtFormula::SomeDelay(body)
                        } else {
                            MtFormula::AllDelays(body)
                        })
                    }
                    _ if self.eat_kw_in() => {
                        self.expect("(")?;
                        let body = Box::new(self.parse_or()?);
                        self.expect(")")?;
                        Ok(MtFormula::ClockIntro(word, body))
                    }
                    _ => {
                        let op = self.cmp_op()?;
                        let constant = self.number()?;
                        Ok(MtFormula::Atom(ClockAtom::Cmp {
                            clock: word,
                            op,
                            constant,
                        }))
                    }
                }
            }
            _ => self.error("expected a formula"),
        }
    }
}

pub fn parse_formula(text: &str) -> Result<MtFormula, FormulaError> {
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
    };
    let f = p.parse_or()?;
    p.skip_ws();
    if p.pos != p.text.len() {
        return p.error("trailing input");
    }
    Ok(f)
}

// -------------------------------------------------------------- closedness

fn check_scope(f: &MtFormula, scope: &mut Vec<String>) -> Result<(), FormulaError> {
    let unbound = |clock: &str| FormulaError::Unbound {
        clock: clock.to_string(),
        context: render_formula(f),
    };
    match f {
        MtFormula::True | MtFormula::False => Ok(()),
        MtFormula::And(l, r) | MtFormula::Or(l, r) => {
            check_scope(l, scope)?;
            check_scope(r, scope)
        }
        MtFormula::Diamond(_, body)
        | MtFormula::BoxMod(_, body)
        | MtFormula::SomeDelay(body)
        | MtFormula::AllDelays(body) => check_scope(body, scope),
        MtFormula::ClockIntro(x, body) => {
            scope.push(x.clone());
            let r = check_scope(body, scope);
            scope.pop();
            r
        }
        MtFormula::Atom(ClockAtom::Cmp { clock, .. })
        | MtFormula::Atom(ClockAtom::Between { clock, .. }) => {
            if scope.iter().any(|s| s == clock) {
                Ok(())
            } else {
                Err(unbound(clock))
            }
        }
    }
}

/// True when every formula clock occurrence sits under its introduction.
pub fn is_closed(f: &MtFormula) -> bool {
    check_scope(f, &mut Vec::new()).is_ok()
}

// -------------------------------------------------------------- evaluation

fn clock_value(s: &ExtendedState, name: &str) -> DeltaValue {
    s.assignment
        .iter()
        .rev()
        .find(|(n, _)| n == name)
        .map(|&(_, v)| v)
        .expect("formula was checked closed")
}

fn atom_holds(atom: &ClockAtom, s: &ExtendedState) -> bool {
    match atom {
        ClockAtom::Cmp {
            clock,
            op,
            constant,
        } => clock_value(s, clock).satisfies(*op, *constant),
        ClockAtom::Between { low, clock, high } => {
            let v = clock_value(s, clock);
            v.cmp_int(*low) == Ordering::Greater && v.cmp_int(*high) == Ordering::Less
        }
    }
}

/// The delays a quantifier ranges over: the corner delays of the base state
/// plus the alignment delays of fractional formula clocks, each kept only
/// when the base still lands inside the explored graph.
fn delay_menu(graph: &ZoneGraph, s: &ExtendedState) -> Vec<DeltaValue> {
    let mut amounts: Vec<DeltaValue> = cp_delays(graph, &s.base)
        .into_iter()
        .map(|d| d.amount)
        .collect();
    for &(_, u) in &s.assignment {
        let f = u.frac();
        if f == Rat::from_integer(0) {
            continue;
        }
        let to_grid = Rat::from_integer(1) - f;
        for steps in [-1, 0, 1] {
            let d = DeltaValue::new(to_grid, steps);
            if d.is_negative() {
                continue;
            }
            let landing = s.base.apply_delay(d, graph.max_constants());
            if containing_node(graph, &landing).is_some() {
                amounts.push(d);
            }
        }
    }
    amounts.sort();
    amounts.dedup();
    amounts
}

fn delayed(s: &ExtendedState, graph: &ZoneGraph, d: DeltaValue) -> ExtendedState {
    ExtendedState {
        base: s.base.apply_delay(d, graph.max_constants()),
        assignment: s
            .assignment
            .iter()
            .map(|(n, v)| (n.clone(), v.add(d).signed()))
            .collect(),
    }
}

fn eval(f: &MtFormula, graph: &ZoneGraph, s: &ExtendedState) -> bool {
    let automaton = graph.automaton();
    match f {
        MtFormula::True => true,
        MtFormula::False => false,
        MtFormula::And(l, r) => eval(l, graph, s) && eval(r, graph, s),
        MtFormula::Or(l, r) => eval(l, graph, s) || eval(r, graph, s),
        MtFormula::Diamond(a, body) | MtFormula::BoxMod(a, body) => {
            let mut successors = s.base.enabled(automaton).into_iter().filter_map(|e| {
                if automaton.actions[automaton.edges[e].action] != *a {
                    return None;
                }
                let base = s
                    .base
                    .apply_edge(automaton, e, graph.max_constants())
                    .expect("enabled edge fires");
                Some(ExtendedState {
                    base,
                    assignment: s.assignment.clone(),
                })
            });
            if matches!(f, MtFormula::Diamond(..)) {
                successors.any(|s2| eval(body, graph, &s2))
            } else {
                successors.all(|s2| eval(body, graph, &s2))
            }
        }
        MtFormula::SomeDelay(body) => delay_menu(graph, s)
            .into_iter()
            .any(|d| eval(body, graph, &delayed(s, graph, d))),
        MtFormula::AllDelays(body) => delay_menu(graph, s)
            .into_iter()
            .all(|d| eval(body, graph, &delayed(s, graph, d))),
        MtFormula::ClockIntro(x, body) => {
            let mut s2 = s.clone();
            s2.assignment.push((x.clone(), DeltaValue::zero()));
            eval(body, graph, &s2)
        }
        MtFormula::Atom(atom) => atom_holds(atom, s),
    }
}

/// Evaluates a closed formula at a corner point state of `graph`. Delay
/// quantifiers range over the corner delays, which is exact for formulas
/// whose atoms mirror corner values (everything this crate synthesizes);
/// for arbitrary hand-written formulas the menu is a finite approximation
/// of the real line.
pub fn evaluate(
    formula: &MtFormula,
    graph: &ZoneGraph,
    state: &CornerState,
) -> Result<bool, FormulaError> {
    check_scope(formula, &mut Vec::new())?;
    let s = ExtendedState {
        base: state.clone(),
        assignment: Vec::new(),
    };
    Ok(eval(formula, graph, &s))
}

// --------------------------------------------------------------- synthesis

/// What the builder carries down one branch of the strategy tree: which
/// formula clock tracks each automaton clock, and the exact unclamped value
/// of every automaton clock.
#[derive(Clone)]
struct SynthScope {
    eta: [Vec<String>; 2],
    shadow: [Vec<DeltaValue>; 2],
}

struct SynthCtx<'a> {
    arena: &'a relations::CpArena,
    instances: [&'a Instance; 2],
    counter: usize,
}

fn and_chain(mut parts: Vec<MtFormula>) -> MtFormula {
    let last = parts.pop().expect("chain never empty");
    parts
        .into_iter()
        .rev()
        .fold(last, |acc, p| MtFormula::And(Box::new(p), Box::new(acc)))
}

fn or_chain(mut parts: Vec<MtFormula>) -> MtFormula {
    let last = parts.pop().expect("chain never empty");
    parts
        .into_iter()
        .rev()
        .fold(last, |acc, p| MtFormula::Or(Box::new(p), Box::new(acc)))
}

/// The atom pinning one exact corner value: `x = n` on the grid, otherwise
/// the open unit interval around the value.
fn atom_for(clock: String, v: DeltaValue) -> ClockAtom {
    debug_assert!(v.base.is_integer(), "start states keep values on the grid");
    let n = v.base.to_integer();
    match v.steps.cmp(&0) {
        Ordering::Equal => ClockAtom::Cmp {
            clock,
            op: CmpOp::Eq,
            constant: n,
        },
        Ordering::Greater => ClockAtom::Between {
            low: n,
            clock,
            high: n + 1,
        },
        Ordering::Less => ClockAtom::Between {
            low: n - 1,
            clock,
            high: n,
        },
    }
}

/// The complement of a pinning atom as a disjunction of plain comparisons.
fn complement(atom: &ClockAtom) -> Vec<ClockAtom> {
    match atom {
        ClockAtom::Cmp { clock, constant, .. } => vec![
            ClockAtom::Cmp {
                clock: clock.clone(),
                op: CmpOp::Lt,
                constant: *constant,
            },
            ClockAtom::Cmp {
                clock: clock.clone(),
                op: CmpOp::Gt,
                constant: *constant,
            },
        ],
        ClockAtom::Between { low, clock, high } => vec![
            ClockAtom::Cmp {
                clock: clock.clone(),
                op: CmpOp::Le,
                constant: *low,
            },
            ClockAtom::Cmp {
                clock: clock.clone(),
                op: CmpOp::Ge,
                constant: *high,
            },
        ],
    }
}

impl<'a> SynthCtx<'a> {
    fn fresh(&mut self) -> String {
        self.counter += 1;
        format!("x{}", self.counter)
    }

    /// Replays the challenger's winning strategy from a ranked position.
    /// Action rounds spread over every defender answer, conjunctively when
    /// the challenger moved on the left and disjunctively when on the right;
    /// delay rounds pin the challenger's landing with atoms. Ranks strictly
    /// decrease along responses, so the recursion ends.
    fn build(&mut self, position: usize, scope: SynthScope) -> MtFormula {
        let c = self
            .arena
            .principal(position)
            .expect("a ranked position has a winning challenge");
        let side = c.side;
        match c.mv {
            CpMove::Action(e) => {
                let ca = self.instances[side].graph.automaton();
                let da = self.instances[1 - side].graph.automaton();
                let name = ca.actions[ca.edges[e].action].clone();
                if c.responses.is_empty() {
                    return if side == 0 {
                        MtFormula::Diamond(name, Box::new(MtFormula::True))
                    } else {
                        MtFormula::BoxMod(name, Box::new(MtFormula::False))
                    };
                }
                let mut branches = Vec::new();
                for (answer, next) in &c.responses {
                    let CpMove::Action(e2) = answer else {
                        unreachable!("actions are answered by actions")
                    };
                    let mut sub = scope.clone();
                    let ch_resets = &ca.edges[e].resets;
                    let df_resets = &da.edges[*e2].resets;
                    for &y in ch_resets {
                        sub.shadow[side][y] = DeltaValue::zero();
                    }
                    for &y in df_resets {
                        sub.shadow[1 - side][y] = DeltaValue::zero();
                    }
                    let child = if ch_resets.is_empty() && df_resets.is_empty() {
                        self.build(*next, sub)
                    } else {
                        let x = self.fresh();
                        for &y in ch_resets {
                            sub.eta[side][y] = x.clone();
                        }
                        for &y in df_resets {
                            sub.eta[1 - side][y] = x.clone();
                        }
                        MtFormula::ClockIntro(x, Box::new(self.build(*next, sub)))
                    };
                    branches.push(child);
                }
                if side == 0 {
                    MtFormula::Diamond(name, Box::new(and_chain(branches)))
                } else {
                    MtFormula::BoxMod(name, Box::new(or_chain(branches)))
                }
            }
            CpMove::Delay(d) => {
                let (_, next) = c.responses.first().expect("delays are always answered");
                let mut sub = scope.clone();
                for sh in sub.shadow.iter_mut() {
                    for v in sh.iter_mut() {
                        *v = v.add(d).signed();
                    }
                }
                let atoms: Vec<ClockAtom> = sub.shadow[side]
                    .iter()
                    .enumerate()
                    .map(|(y, &v)| atom_for(sub.eta[side][y].clone(), v))
                    .collect();
                let chi = self.build(*next, sub);
                if side == 0 {
                    let mut parts: Vec<MtFormula> =
                        atoms.into_iter().map(MtFormula::Atom).collect();
                    parts.push(chi);
                    MtFormula::SomeDelay(Box::new(and_chain(parts)))
                } else {
                    let mut parts: Vec<MtFormula> = atoms
                        .iter()
                        .flat_map(complement)
                        .map(MtFormula::Atom)
                        .collect();
                    parts.push(chi);
                    MtFormula::AllDelays(Box::new(or_chain(parts)))
                }
            }
        }
    }
}

/// Builds a closed formula true at the left start state and false at the
/// right one, by replaying the challenger's winning strategy of the timed
/// bisimulation game. Both instances must be rooted at their automaton's
/// initial state (all clocks zero), which keeps every corner value on the
/// integer grid; fails when the states are bisimilar.
pub fn synthesize_distinguishing(
    left: &Instance,
    right: &Instance,
) -> Result<MtFormula, FormulaError> {
    for inst in [left, right] {
        let a = inst.graph.automaton();
        let s = inst.graph.start_state();
        if s.location != a.initial || s.valuation.iter().any(|&v| v != Rat::from_integer(0)) {
            return Err(FormulaError::NotInitial);
        }
    }
    let arena = relations::cp_bisim_arena(left, right);
    if arena.rank[0].is_none() {
        return Err(FormulaError::Bisimilar);
    }
    let scope = SynthScope {
        eta: [
            vec!["x1".to_string(); left.graph.automaton().clocks.len()],
            vec!["x1".to_string(); right.graph.automaton().clocks.len()],
        ],
        shadow: [
            vec![DeltaValue::zero(); left.graph.automaton().clocks.len()],
            vec![DeltaValue::zero(); right.graph.automaton().clocks.len()],
        ],
    };
    let mut ctx = SynthCtx {
        arena: &arena,
        instances: [left, right],
        counter: 1,
    };
    let body = ctx.build(0, scope);
    Ok(MtFormula::ClockIntro("x1".to_string(), Box::new(body)))
}

/// The synthesis self check: the formula holds at the left start state and
/// fails at the right one.
pub fn verify_distinguishing(
    formula: &MtFormula,
    left: &Instance,
    right: &Instance,
) -> Result<bool, FormulaError> {
    Ok(evaluate(formula, &left.graph, &left.start)?
        && !evaluate(formula, &right.graph, &right.start)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{TimedAutomaton, TimedState};

    fn automaton(text: &str) -> TimedAutomaton {
        TimedAutomaton::parse(text).unwrap()
    }

    fn instance(a: &TimedAutomaton) -> Instance {
        Instance::new(a, &a.initial_state()).unwrap()
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
    fn concrete_syntax_round_trips_byte_for_byte() {
        let samples = [
            "tt",
            "ff",
            "x1 in (EE(x1 = 2 && <a> tt))",
            "x1 in (<a>[b] x2 in (<c> EE(1 < x2 < 2 && <d> tt)))",
            "x1 in (AA(x1 < 3 || x1 > 3 || <a> tt))",
            "[a] ff && <b> tt",
            "x1 in (EE((x1 = 1 || x1 = 2) && [a] ff))",
            "x1 in (x1 >= 0)",
        ];
        for s in samples {
            let parsed = parse_formula(s).unwrap();
            assert_eq!(render_formula(&parsed), s);
        }
    }

    #[test]
    fn parser_reports_offsets_and_trailing_garbage() {
        match parse_formula("x1 in (") {
            Err(FormulaError::Syntax { .. }) => {}
            other => panic!("expected a syntax error, got {other:?}"),
        }
        match parse_formula("tt tt") {
            Err(FormulaError::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("expected trailing input error, got {other:?}"),
        }
    }

    #[test]
    fn closedness_tracks_clock_scopes() {
        assert!(is_closed(&parse_formula("x1 in (x1 = 2)").unwrap()));
        assert!(!is_closed(&parse_formula("x1 = 2").unwrap()));
        assert!(is_closed(
            &parse_formula("x1 in (<a>[b] x2 in (<c> EE(1 < x2 < 2 && <d> tt)))").unwrap()
        ));
        // Sibling scopes do not leak into each other.
        assert!(!is_closed(
            &parse_formula("x1 in (tt) && x1 = 2").unwrap()
        ));
    }

    #[test]
    fn evaluating_an_open_formula_is_an_error() {
        let a = one_edge("x", "=", 2);
        let ia = instance(&a);
        let f = parse_formula("EE(x1 = 2)").unwrap();
        match evaluate(&f, &ia.graph, &ia.start) {
            Err(FormulaError::Unbound { clock, .. }) => assert_eq!(clock, "x1"),
            other => panic!("expected an unbound clock error, got {other:?}"),
        }
    }

    #[test]
    fn trivial_formulas_evaluate_trivially() {
        let a = one_edge("x", "=", 2);
        let ia = instance(&a);
        assert!(evaluate(&MtFormula::True, &ia.graph, &ia.start).unwrap());
        assert!(!evaluate(&MtFormula::False, &ia.graph, &ia.start).unwrap());
        let vacuous = parse_formula("x1 in (AA(x1 >= 0))").unwrap();
        assert!(evaluate(&vacuous, &ia.graph, &ia.start).unwrap());
    }

    #[test]
    fn the_two_versus_five_formula_separates_the_pair() {
        let a = one_edge("x", "=", 2);
        let b = one_edge("y", "=", 5);
        let ia = instance(&a);
        let ib = instance(&b);
        let f = parse_formula("x1 in (EE(x1 = 2 && <a> tt))").unwrap();
        assert!(evaluate(&f, &ia.graph, &ia.start).unwrap());
        assert!(!evaluate(&f, &ib.graph, &ib.start).unwrap());
    }

    #[test]
    fn evaluation_is_stable_under_clock_renaming() {
        let a = one_edge("x", "=", 2);
        let ia = instance(&a);
        let f = parse_formula("x1 in (EE(x1 = 2 && <a> tt))").unwrap();
        let g = parse_formula("z in (EE(z = 2 && <a> tt))").unwrap();
        assert_eq!(
            evaluate(&f, &ia.graph, &ia.start).unwrap(),
            evaluate(&g, &ia.graph, &ia.start).unwrap()
        );
    }

    #[test]
    fn synthesis_reproduces_the_two_versus_five_formula() {
        let a = one_edge("x", "=", 2);
        let b = one_edge("y", "=", 5);
        let ia = instance(&a);
        let ib = instance(&b);
        let f = synthesize_distinguishing(&ia, &ib).unwrap();
        assert_eq!(render_formula(&f), "x1 in (EE(x1 = 2 && <a> tt))");
        assert!(verify_distinguishing(&f, &ia, &ib).unwrap());
    }

    #[test]
    fn synthesis_rejects_bisimilar_and_non_initial_inputs() {
        let a = one_edge("x", "=", 2);
        let ia = instance(&a);
        let ib = instance(&a);
        match synthesize_distinguishing(&ia, &ib) {
            Err(FormulaError::Bisimilar) => {}
            other => panic!("expected the bisimilar error, got {other:?}"),
        }

        let b = one_edge("y", "=", 5);
        let off = TimedState {
            location: 0,
            valuation: vec![Rat::from_integer(1)],
        };
        let shifted = Instance::new(&a, &off).unwrap();
        match synthesize_distinguishing(&shifted, &instance(&b)) {
            Err(FormulaError::NotInitial) => {}
            other => panic!("expected the initial state error, got {other:?}"),
        }
    }

    #[test]
    fn synthesized_formulas_separate_varied_pairs() {
        let pairs = [
            (one_edge("x", "=", 2), one_edge("y", "=", 5)),
            (one_edge("x", "=", 2), one_edge("y", ">=", 0)),
            (one_edge("x", ">=", 1), one_edge("y", ">=", 0)),
            (one_edge("x", "<", 3), one_edge("y", "<=", 3)),
        ];
        for (a, b) in pairs {
            let ia = instance(&a);
            let ib = instance(&b);
            let f = synthesize_distinguishing(&ia, &ib).unwrap();
            assert!(
                verify_distinguishing(&f, &ia, &ib).unwrap(),
                "formula {} fails on its own pair",
                render_formula(&f)
            );
        }
    }

    #[test]
    fn synthesis_handles_resets_with_fresh_clocks() {
        // After a the clock restarts; one machine then wants b at 1, the
        // other at 2. The formula needs a second clock for the reset.
        let reset_then = |c: i64, clock: &str| {
            automaton(&format!(
                r#"{{
                    "clocks": ["{clock}"],
                    "actions": ["a", "b"],
                    "locations": ["l0", "l1", "l2"],
                    "initial": "l0",
                    "edges": [
                        {{"from": "l0", "to": "l1", "action": "a", "guard": [],
                         "resets": ["{clock}"]}},
                        {{"from": "l1", "to": "l2", "action": "b",
                         "guard": [{{"clock": "{clock}", "op": "=", "const": {c}}}],
                         "resets": []}}
                    ]
                }}"#
            ))
        };
        let a = reset_then(1, "x");
        let b = reset_then(2, "y");
        let ia = instance(&a);
        let ib = instance(&b);
        let f = synthesize_distinguishing(&ia, &ib).unwrap();
        let text = render_formula(&f);
        assert!(text.contains("x2"), "expected a fresh clock in {text}");
        assert!(verify_distinguishing(&f, &ia, &ib).unwrap(), "{text}");
    }

    #[test]
    fn discrete_fragment_matches_a_direct_location_checker() {
        // Zero clock automata: evaluation of modal formulas must agree with
        // a plain graph walk over locations.
        fn naive(f: &MtFormula, a: &TimedAutomaton, loc: usize) -> bool {
            match f {
                MtFormula::True => true,
                MtFormula::False => false,
                MtFormula::And(l, r) => naive(l, a, loc) && naive(r, a, loc),
                MtFormula::Or(l, r) => naive(l, a, loc) || naive(r, a, loc),
                MtFormula::Diamond(name, body) => a
                    .edges
                    .iter()
                    .any(|e| e.from == loc && a.actions[e.action] == *name && naive(body, a, e.to)),
                MtFormula::BoxMod(name, body) => a
                    .edges
                    .iter()
                    .filter(|e| e.from == loc && a.actions[e.action] == *name)
                    .all(|e| naive(body, a, e.to)),
                _ => unreachable!("discrete fragment only"),
            }
        }
        let a = automaton(
            r#"{
                "clocks": [],
                "actions": ["a", "b", "c"],
                "locations": ["s0", "s1", "s2", "s3"],
                "initial": "s0",
                "edges": [
                    {"from": "s0", "to": "s1", "action": "a", "guard": [], "resets": []},
                    {"from": "s1", "to": "s2", "action": "b", "guard": [], "resets": []},
                    {"from": "s1", "to": "s3", "action": "c", "guard": [], "resets": []}
                ]
            }"#,
        );
        let ia = instance(&a);
        let formulas = [
            "<a> tt",
            "<a>(<b> tt && <c> tt)",
            "[a]<b> tt",
            "<a>[b][c] ff || ff",
            "[b] ff",
            "<a><b><c> tt",
        ];
        for text in formulas {
            let f = parse_formula(text).unwrap();
            assert_eq!(
                evaluate(&f, &ia.graph, &ia.start).unwrap(),
                naive(&f, &a, a.initial),
                "disagreement on {text}"
            );
        }
    }
}
