//! Convex clock zones as difference bound matrices.
//!
//! A zone over clocks `x1..xn` is a conjunction of constraints
//! `xi - xj < c` or `xi - xj <= c` (with a virtual reference clock `x0 = 0`),
//! kept in canonical all-pairs-tightest form. Guard constants are naturals,
//! but zones may carry integer diagonal constants and, when a designated
//! start valuation has fractional clock values, all constants are kept as
//! exact integers scaled by a common denominator (`scale`).

use crate::automaton::{ClockConstraint, CmpOp};
use crate::Rat;
use num_traits::Zero;
use std::cmp::Ordering;
use std::fmt;

/// Upper bound on a clock difference: strict, weak, or absent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bound {
    Lt(i64),
    Le(i64),
    Inf,
}

impl Bound {
    fn value(self) -> Option<(i64, bool)> {
        match self {
            Bound::Lt(v) => Some((v, true)),
            Bound::Le(v) => Some((v, false)),
            Bound::Inf => None,
        }
    }

    /// Min-plus addition of bounds; strictness propagates.
    pub fn add(self, other: Bound) -> Bound {
        match (self.value(), other.value()) {
            (Some((a, sa)), Some((b, sb))) => {
                if sa || sb {
                    Bound::Lt(a + b)
                } else {
                    Bound::Le(a + b)
                }
            }
            _ => Bound::Inf,
        }
    }

    /// Negation used for zone subtraction: `x - y <= c` becomes `y - x < -c`.
    pub fn negate(self) -> Bound {
        match self {
            Bound::Le(v) => Bound::Lt(-v),
            Bound::Lt(v) => Bound::Le(-v),
            Bound::Inf => panic!("cannot negate an absent bound"),
        }
    }

    /// Does the exact difference `d` satisfy this bound?
    pub fn admits(self, d: Rat) -> bool {
        match self {
            Bound::Lt(v) => d < Rat::from_integer(v),
            Bound::Le(v) => d <= Rat::from_integer(v),
            Bound::Inf => true,
        }
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.value(), other.value()) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Greater,
            (Some(_), None) => Ordering::Less,
            (Some((a, sa)), Some((b, sb))) => a.cmp(&b).then_with(|| {
                // At equal value a strict bound is tighter.
                match (sa, sb) {
                    (true, false) => Ordering::Less,
                    (false, true) => Ordering::Greater,
                    _ => Ordering::Equal,
                }
            }),
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Lt(v) => write!(f, "<{v}"),
            Bound::Le(v) => write!(f, "<={v}"),
            Bound::Inf => write!(f, "<inf"),
        }
    }
}

/// A canonical difference bound matrix over `clocks` clocks.
///
/// The matrix entry `(i, j)` bounds `xi - xj`, with row and column 0 standing
/// for the constant zero. An empty zone is normalised so that equal zones
/// compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Zone {
    clocks: usize,
    scale: i64,
    m: Vec<Bound>,
}

impl Zone {
    fn dim(&self) -> usize {
        self.clocks + 1
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Bound {
        self.m[i * self.dim() + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, b: Bound) {
        let d = self.dim();
        self.m[i * d + j] = b;
    }

    pub fn clock_count(&self) -> usize {
        self.clocks
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    /// The non-negative orthant: every clock at least zero, nothing else.
    pub fn full(clocks: usize, scale: i64) -> Zone {
        assert!(scale >= 1);
        let dim = clocks + 1;
        let mut z = Zone {
            clocks,
            scale,
            m: vec![Bound::Inf; dim * dim],
        };
        for i in 0..dim {
            z.set(i, i, Bound::Le(0));
            z.set(0, i, Bound::Le(0));
        }
        z
    }

    /// The single point `valuation`; every value times `scale` must be an
    /// exact integer.
    pub fn point(valuation: &[Rat], scale: i64) -> Zone {
        let mut z = Zone::full(valuation.len(), scale);
        let scaled: Vec<i64> = valuation
            .iter()
            .map(|v| {
                let s = v * Rat::from_integer(scale);
                debug_assert!(s.is_integer(), "valuation is not exact at this scale");
                s.to_integer()
            })
            .collect();
        for (i, &vi) in scaled.iter().enumerate() {
            z.set(i + 1, 0, Bound::Le(vi));
            z.set(0, i + 1, Bound::Le(-vi));
            for (j, &vj) in scaled.iter().enumerate() {
                if i != j {
                    z.set(i + 1, j + 1, Bound::Le(vi - vj));
                }
            }
        }
        z
    }

    fn make_empty(&mut self) {
        for b in self.m.iter_mut() {
            *b = Bound::Lt(0);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.at(0, 0) < Bound::Le(0)
    }

    /// All-pairs tightening; an inconsistent matrix collapses to the
    /// canonical empty zone. Idempotent.
    pub fn canonicalize(&mut self) {
        let d = self.dim();
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let via = self.at(i, k).add(self.at(k, j));
                    if via < self.at(i, j) {
                        self.set(i, j, via);
                    }
                }
            }
        }
        for i in 0..d {
            if self.at(i, i) < Bound::Le(0) {
                self.make_empty();
                return;
            }
        }
    }

    fn constrained(&self, i: usize, j: usize, b: Bound) -> Zone {
        let mut z = self.clone();
        if b < z.at(i, j) {
            z.set(i, j, b);
            z.canonicalize();
        }
        z
    }

    /// Intersection of two zones over the same clocks and scale.
    pub fn intersect(&self, other: &Zone) -> Zone {
        assert_eq!(self.clocks, other.clocks);
        assert_eq!(self.scale, other.scale);
        let mut z = self.clone();
        for (a, &b) in z.m.iter_mut().zip(other.m.iter()) {
            if b < *a {
                *a = b;
            }
        }
        z.canonicalize();
        z
    }

    /// Do the two zones share a point? Far cheaper than building the
    /// intersection: the matrices stay untouched and no tightening runs.
    ///
    /// On canonical matrices the combined system is inconsistent exactly
    /// when some cycle alternating between the two matrices is negative,
    /// and consecutive hops through the same matrix collapse by
    /// canonicality, so on up to two clocks (three matrix rows) a scan of
    /// opposing bound pairs decides the question outright. With more
    /// clocks longer alternating cycles exist, and an undecided scan falls
    /// back to building the intersection.
    pub fn intersects(&self, other: &Zone) -> bool {
        assert_eq!(self.clocks, other.clocks);
        assert_eq!(self.scale, other.scale);
        if self.is_empty() || other.is_empty() {
            return false;
        }
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                if self.at(i, j).add(other.at(j, i)) < Bound::Le(0) {
                    return false;
                }
            }
        }
        if self.clocks <= 2 {
            return true;
        }
        !self.intersect(other).is_empty()
    }

    /// Does `self` contain every point of `other`?
    pub fn includes(&self, other: &Zone) -> bool {
        if other.is_empty() {
            return true;
        }
        if self.is_empty() {
            return false;
        }
        self.m
            .iter()
            .zip(other.m.iter())
            .all(|(a, b)| b <= a)
    }

    /// Exact membership of a rational valuation.
    pub fn contains(&self, valuation: &[Rat]) -> bool {
        assert_eq!(valuation.len(), self.clocks);
        if self.is_empty() {
            return false;
        }
        let scale = Rat::from_integer(self.scale);
        let val = |i: usize| {
            if i == 0 {
                Rat::zero()
            } else {
                valuation[i - 1] * scale
            }
        };
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if !self.at(i, j).admits(val(i) - val(j)) {
                    return false;
                }
            }
        }
        true
    }

    /// Future: lets arbitrary time elapse (`up`). Removes upper bounds.
    pub fn up(&self) -> Zone {
        if self.is_empty() {
            return self.clone();
        }
        let mut z = self.clone();
        for i in 1..z.dim() {
            z.set(i, 0, Bound::Inf);
        }
        z
    }

    /// Past restricted to the orthant: all valuations that can delay into
    /// `self`. Canonical form is preserved.
    pub fn delay_preds(&self) -> Zone {
        if self.is_empty() {
            return self.clone();
        }
        let mut z = self.clone();
        for i in 1..z.dim() {
            let mut lo = Bound::Le(0);
            for j in 1..z.dim() {
                if z.at(j, i) < lo {
                    lo = z.at(j, i);
                }
            }
            z.set(0, i, lo);
        }
        z
    }

    /// Resets the given clocks to zero.
    pub fn reset(&self, clocks: &[usize]) -> Zone {
        if self.is_empty() {
            return self.clone();
        }
        let mut z = self.clone();
        for &x in clocks {
            let x = x + 1;
            for j in 0..z.dim() {
                z.set(x, j, z.at(0, j));
                z.set(j, x, z.at(j, 0));
            }
            z.set(x, x, Bound::Le(0));
        }
        z
    }

    /// Removes every constraint on the given clock except non-negativity.
    fn free(&self, clock: usize) -> Zone {
        if self.is_empty() {
            return self.clone();
        }
        let mut z = self.clone();
        let x = clock + 1;
        for j in 0..z.dim() {
            if j != x {
                z.set(x, j, Bound::Inf);
                z.set(j, x, z.at(j, 0));
            }
        }
        z
    }

    /// Predecessors through an edge: valuations satisfying the guard whose
    /// reset image lies in `self`.
    pub fn edge_preds(&self, guard: &[ClockConstraint], resets: &[usize]) -> Zone {
        // The reset image fixes reset clocks at zero, so they must be
        // admissible at zero in the target; afterwards their pre-reset value
        // is unconstrained.
        let mut z = self.clone();
        for &x in resets {
            z = z.constrained(x + 1, 0, Bound::Le(0));
        }
        if z.is_empty() {
            return z;
        }
        for &x in resets {
            z = z.free(x);
        }
        for c in guard {
            z = z.apply_constraint(c);
        }
        z
    }

    /// Intersection with a single guard conjunct.
    pub fn constrain_by(&self, c: &ClockConstraint) -> Zone {
        self.apply_constraint(c)
    }

    /// Image through an edge: the guarded part of `self` with the edge's
    /// clocks reset.
    pub fn edge_image(&self, guard: &[ClockConstraint], resets: &[usize]) -> Zone {
        let mut z = self.clone();
        for c in guard {
            z = z.apply_constraint(c);
        }
        z.reset(resets)
    }

    fn apply_constraint(&self, c: &ClockConstraint) -> Zone {
        let v = c.constant * self.scale;
        let x = c.clock + 1;
        match c.op {
            CmpOp::Lt => self.constrained(x, 0, Bound::Lt(v)),
            CmpOp::Le => self.constrained(x, 0, Bound::Le(v)),
            CmpOp::Eq => self
                .constrained(x, 0, Bound::Le(v))
                .constrained(0, x, Bound::Le(-v)),
            CmpOp::Ge => self.constrained(0, x, Bound::Le(-v)),
            CmpOp::Gt => self.constrained(0, x, Bound::Lt(-v)),
        }
    }

    fn apply_negation(&self, c: &ClockConstraint) -> Vec<Zone> {
        let v = c.constant * self.scale;
        let x = c.clock + 1;
        let parts = match c.op {
            CmpOp::Lt => vec![self.constrained(0, x, Bound::Le(-v))],
            CmpOp::Le => vec![self.constrained(0, x, Bound::Lt(-v))],
            CmpOp::Eq => vec![
                self.constrained(x, 0, Bound::Lt(v)),
                self.constrained(0, x, Bound::Lt(-v)),
            ],
            CmpOp::Ge => vec![self.constrained(x, 0, Bound::Lt(v))],
            CmpOp::Gt => vec![self.constrained(x, 0, Bound::Le(v))],
        };
        parts.into_iter().filter(|z| !z.is_empty()).collect()
    }

    /// Canonical decomposition: partitions `self` into convex cells that
    /// each satisfy or violate every conjunct of `guard` uniformly.
    ///
    /// Equality conjuncts split a cell three ways (below, at, above).
    pub fn split_by_guard(&self, guard: &[ClockConstraint]) -> Vec<Zone> {
        let mut cells = vec![self.clone()];
        cells.retain(|z| !z.is_empty());
        for c in guard {
            let mut next = Vec::with_capacity(cells.len() * 2);
            for cell in &cells {
                let inside = cell.apply_constraint(c);
                if !inside.is_empty() {
                    next.push(inside);
                }
                next.extend(cell.apply_negation(c));
            }
            cells = next;
        }
        cells
    }

    /// Relative complement `self \ other` as disjoint convex pieces.
    pub fn subtract(&self, other: &Zone) -> Vec<Zone> {
        assert_eq!(self.clocks, other.clocks);
        assert_eq!(self.scale, other.scale);
        if self.is_empty() {
            return Vec::new();
        }
        if !self.intersects(other) {
            return vec![self.clone()];
        }
        let mut pieces = Vec::new();
        let mut rest = self.clone();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if i == j {
                    continue;
                }
                let b = other.at(i, j);
                if b == Bound::Inf {
                    continue;
                }
                // Piece outside this constraint of `other`, inside all the
                // previously handled ones.
                let piece = rest.constrained(j, i, b.negate());
                if !piece.is_empty() {
                    pieces.push(piece);
                    rest = rest.constrained(i, j, b);
                    if rest.is_empty() {
                        return pieces;
                    }
                }
            }
        }
        pieces
    }

    /// Union of two zones when the union is itself convex: returns the DBM
    /// hull if it equals the union exactly, otherwise `None`.
    pub fn convex_merge(&self, other: &Zone) -> Option<Zone> {
        if self.is_empty() {
            return Some(other.clone());
        }
        if other.is_empty() {
            return Some(self.clone());
        }
        assert_eq!(self.clocks, other.clocks);
        assert_eq!(self.scale, other.scale);
        let mut hull = self.clone();
        for (a, &b) in hull.m.iter_mut().zip(other.m.iter()) {
            if b > *a {
                *a = b;
            }
        }
        // Pointwise max of canonical matrices is canonical.
        for piece in hull.subtract(self) {
            if piece.subtract(other).into_iter().any(|z| !z.is_empty()) {
                return None;
            }
        }
        Some(hull)
    }

    /// Splits `self` against a predecessor set: the part inside `preds` and
    /// the convex pieces of the remainder. The flag reports a remainder that
    /// was not convex (more than one piece).
    pub fn split_prestable(&self, preds: &Zone) -> (Vec<Zone>, bool) {
        let mut parts = Vec::new();
        let inside = self.intersect(preds);
        if !inside.is_empty() {
            parts.push(inside);
        }
        let outside = self.subtract(preds);
        let nonconvex = outside.len() > 1;
        parts.extend(outside);
        (parts, nonconvex)
    }

    /// Location dependent maximum constant abstraction.
    ///
    /// `maxima[x]` is the ceiling for clock `x` (unscaled). Bounds whose
    /// constant exceeds the ceiling are widened to infinity, lower bounds
    /// beyond it relax to a strict bound at the ceiling. Satisfaction of any
    /// guard whose constants respect the ceilings is unchanged, and the
    /// operation is idempotent on canonical zones.
    pub fn extrapolate(&self, maxima: &[i64]) -> Zone {
        assert_eq!(maxima.len(), self.clocks);
        if self.is_empty() {
            return self.clone();
        }
        let scaled: Vec<i64> = maxima.iter().map(|&m| m * self.scale).collect();
        let mut z = self.clone();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if i == j {
                    continue;
                }
                let b = self.at(i, j);
                if i > 0 {
                    if let Some((v, _)) = b.value() {
                        if v > scaled[i - 1] {
                            z.set(i, j, Bound::Inf);
                            continue;
                        }
                    }
                }
                if j > 0 {
                    if let Some((v, _)) = b.value() {
                        if -v > scaled[j - 1] {
                            z.set(i, j, Bound::Lt(-scaled[j - 1]));
                        }
                    }
                }
            }
        }
        z.canonicalize();
        z
    }

    /// Scaled upper bound entry for a clock (`x - 0`).
    pub fn upper(&self, clock: usize) -> Bound {
        self.at(clock + 1, 0)
    }

    /// Scaled lower bound entry for a clock (`0 - x`).
    pub fn lower(&self, clock: usize) -> Bound {
        self.at(0, clock + 1)
    }

    /// Human readable conjunction, eliding implied constraints.
    pub fn render(&self, clock_names: &[String]) -> String {
        assert_eq!(clock_names.len(), self.clocks);
        if self.is_empty() {
            return "false".to_string();
        }
        if self.clocks == 0 {
            return "true".to_string();
        }
        let frac = |v: i64| {
            if self.scale == 1 {
                format!("{v}")
            } else {
                let r = Rat::new(v, self.scale);
                if r.is_integer() {
                    format!("{}", r.numer())
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
        };
        let mut parts = Vec::new();
        for x in 0..self.clocks {
            let name = &clock_names[x];
            let lo = self.lower(x);
            let hi = self.upper(x);
            match (lo, hi) {
                (Bound::Le(l), Bound::Le(h)) if -l == h => {
                    parts.push(format!("{name}={}", frac(h)));
                }
                (_, Bound::Inf) => {
                    // One sided from below.
                    parts.push(match lo {
                        Bound::Le(l) if l == 0 => format!("{name}>=0"),
                        Bound::Le(l) => format!("{name}>={}", frac(-l)),
                        Bound::Lt(l) => format!("{name}>{}", frac(-l)),
                        Bound::Inf => unreachable!("lower bounds are never absent"),
                    });
                }
                _ => {
                    let mut s = String::new();
                    match lo {
                        Bound::Le(l) if l == 0 => {}
                        Bound::Le(l) => s.push_str(&format!("{}<=", frac(-l))),
                        Bound::Lt(l) => s.push_str(&format!("{}<", frac(-l))),
                        Bound::Inf => unreachable!("lower bounds are never absent"),
                    }
                    s.push_str(name);
                    match hi {
                        Bound::Le(h) => s.push_str(&format!("<={}", frac(h))),
                        Bound::Lt(h) => s.push_str(&format!("<{}", frac(h))),
                        Bound::Inf => unreachable!("handled above"),
                    }
                    parts.push(s);
                }
            }
        }
        for i in 1..self.dim() {
            for j in 1..self.dim() {
                if i == j {
                    continue;
                }
                let b = self.at(i, j);
                let implied = self.at(i, 0).add(self.at(0, j));
                if b < implied {
                    let (v, strict) = b.value().expect("tighter than a finite bound");
                    let op = if strict { "<" } else { "<=" };
                    parts.push(format!(
                        "{}-{}{op}{}",
                        clock_names[i - 1],
                        clock_names[j - 1],
                        frac(v)
                    ));
                }
            }
        }
        parts.join(" & ")
    }
}
