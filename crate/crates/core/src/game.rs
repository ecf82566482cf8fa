//! A configurable challenger/defender game over two timed automata.
//!
//! One template covers the whole relation family. A challenger roams the
//! two graphs under a budget of rounds and of graph switches, the defender
//! answers each move in the opposite graph, and the move shape decides
//! which relation the game characterizes: exact delays give the timed
//! games, skewed delays the performance games, node moves the
//! time-abstracted ones. Solving is exact rather than play-by-play: the
//! reachable pair arena, extended with the remaining switch budget, is
//! ranked once, and the winner falls out of the root rank compared against
//! the round budget.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::relations::{
    build_arena, challenge_rank, BuiltArena, Challenge, HalfMove, Instance, RelationKind,
    TaFlavor, TaGame, TimedGame, TimedMove, TimedPair,
};

/// A round or switch allowance. `Finite(0)` means none at all.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Budget {
    Finite(u32),
    Unbounded,
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Budget::Finite(n) => write!(f, "{n}"),
            Budget::Unbounded => write!(f, "unbounded"),
        }
    }
}

impl FromStr for Budget {
    type Err = String;

    fn from_str(s: &str) -> Result<Budget, String> {
        if s == "unbounded" || s == "inf" {
            return Ok(Budget::Unbounded);
        }
        s.parse::<u32>()
            .map(Budget::Finite)
            .map_err(|_| format!("expected a number, \"unbounded\" or \"inf\", got {s:?}"))
    }
}

/// The move-shape parameter: what the challenger may play and what counts
/// as an answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alpha {
    /// Corner-state game. Actions answer actions of the same name, a delay
    /// is answered by exactly the same amount.
    ExactDelay,
    /// Corner-state game with skewed delay answers: the side named by
    /// `Beta` must not outwait the other. Without a `Beta` the left side
    /// is the constrained one.
    FreeDelay,
    /// Zone-graph node game; an action answers an action directly.
    Strong,
    /// Node game; an action may be answered after leading eps moves.
    DelayAbstract,
    /// Node game; an action may be answered with eps moves on both sides.
    ObsAbstract,
}

impl Alpha {
    pub const ALL: [Alpha; 5] = [
        Alpha::ExactDelay,
        Alpha::FreeDelay,
        Alpha::Strong,
        Alpha::DelayAbstract,
        Alpha::ObsAbstract,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Alpha::ExactDelay => "exact-delay",
            Alpha::FreeDelay => "free-delay",
            Alpha::Strong => "strong",
            Alpha::DelayAbstract => "delay",
            Alpha::ObsAbstract => "obs",
        }
    }

    pub fn from_name(name: &str) -> Option<Alpha> {
        Alpha::ALL.iter().copied().find(|a| a.name() == name)
    }
}

/// Which graph is the constrained (fast) one in a free-delay game: its
/// cumulative waiting must not exceed the other side's.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Beta {
    LeftNoMore,
    RightNoMore,
}

impl Beta {
    pub fn name(self) -> &'static str {
        match self {
            Beta::LeftNoMore => "left",
            Beta::RightNoMore => "right",
        }
    }

    pub fn from_name(name: &str) -> Option<Beta> {
        match name {
            "left" => Some(Beta::LeftNoMore),
            "right" => Some(Beta::RightNoMore),
            _ => None,
        }
    }
}

/// A full game description. All fields are public so configurations can be
/// written as literals; `validate` checks the cross-field constraints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GameConfig {
    /// How many times the challenger may switch graphs. The opening round
    /// never counts as a switch.
    pub alternations: Budget,
    /// How many rounds are played before the defender wins by survival.
    pub rounds: Budget,
    pub alpha: Alpha,
    /// Delay-skew side for `Alpha::FreeDelay`; ignored by other shapes.
    pub beta: Option<Beta>,
    /// Forces the challenger's opening move into one graph (0 left,
    /// 1 right). Combined with zero alternations this confines the whole
    /// play, which turns an equivalence game into a preorder game.
    pub start_graph: Option<usize>,
    /// Optional second game played if the defender loses this one; the
    /// defender wins the pair when it wins either member.
    pub disjunct: Option<Box<GameConfig>>,
}

impl GameConfig {
    /// No budgets, no skew, no confinement: the plain infinite game for a
    /// move shape.
    pub fn unbounded(alpha: Alpha) -> GameConfig {
        GameConfig {
            alternations: Budget::Unbounded,
            rounds: Budget::Unbounded,
            alpha,
            beta: None,
            start_graph: None,
            disjunct: None,
        }
    }

    pub fn with_alternations(mut self, n: Budget) -> GameConfig {
        self.alternations = n;
        self
    }

    pub fn with_rounds(mut self, k: Budget) -> GameConfig {
        self.rounds = k;
        self
    }

    pub fn with_beta(mut self, beta: Beta) -> GameConfig {
        self.beta = Some(beta);
        self
    }

    pub fn validate(&self) -> Result<(), GameError> {
        if let (Budget::Finite(n), Budget::Finite(k)) = (self.alternations, self.rounds) {
            // A switch needs a round before and after it, so at most k - 1
            // switches fit into k rounds.
            if n >= k {
                return Err(GameError::AlternationsExceedRounds {
                    alternations: n,
                    rounds: k,
                });
            }
        }
        if let Some(g) = self.start_graph {
            if g > 1 {
                return Err(GameError::BadGraphIndex { index: g });
            }
        }
        if let Some(d) = &self.disjunct {
            d.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum GameError {
    #[error("{alternations} alternations cannot happen in {rounds} rounds; at most rounds - 1 fit")]
    AlternationsExceedRounds { alternations: u32, rounds: u32 },
    #[error("start graph must be 0 (left) or 1 (right), got {index}")]
    BadGraphIndex { index: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    Challenger,
    Defender,
}

/// One played round: who challenged with what, and the answer, `None` when
/// the defender had none and lost on the spot.
#[derive(Clone, Debug, Serialize)]
pub struct GameRound {
    pub round: u32,
    /// "A" or "B": the graph the challenger moved in.
    pub side: String,
    pub challenge: HalfMove,
    pub response: Option<HalfMove>,
}

/// The solved game. When the challenger wins, the trace is an optimal
/// winning play (fewest rounds, strongest defender resistance). When the
/// defender wins, the trace is a sample of survivable play, cut off at a
/// revisit or a fixed length, purely as a human-readable certificate.
#[derive(Clone, Debug, Serialize)]
pub struct GameOutcome {
    pub winner: Winner,
    pub trace: Vec<GameRound>,
    /// Graph switches in the recorded trace; the opening round counts zero.
    pub alternation_count: u32,
    /// For disjunctive configurations: which member the defender won,
    /// `None` when the challenger won both (or the config had no disjunct).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winning_disjunct: Option<usize>,
}

/// Renders a trace the way refutations are spoken: challenge, answer,
/// challenge, answer, with `FAIL` closing a lost game.
pub fn render_trace(trace: &[GameRound]) -> String {
    let mut parts = Vec::new();
    for r in trace {
        let what = match r.challenge.kind.as_str() {
            "eps" => format!("eps on {}", r.side),
            kind => format!("{kind} {} on {}", r.challenge.label, r.side),
        };
        parts.push(what);
        parts.push(match &r.response {
            None => "FAIL".to_string(),
            Some(hm) if hm.kind == "eps" => "defender replies eps".to_string(),
            Some(hm) => format!("defender replies {} {}", hm.kind, hm.label),
        });
    }
    format!("[{}]", parts.join("; "))
}

/// A pair position extended with what the budget state of the play is:
/// which graph the challenger used last and how many switches remain.
#[derive(Clone, PartialEq, Eq, Hash)]
struct Ext<P> {
    pair: P,
    last: Option<usize>,
    switches: Option<u32>,
}

/// Plays one (non-disjunctive) configuration to the end.
fn run_game<P, M, G, H>(cfg: &GameConfig, root: P, gen: G, half: H) -> GameOutcome
where
    P: Clone + Eq + Hash,
    G: Fn(&P, usize) -> Vec<Challenge<P, M>>,
    H: Fn(&M) -> HalfMove,
{
    let root = Ext {
        pair: root,
        last: None,
        switches: match cfg.alternations {
            Budget::Finite(n) => Some(n),
            Budget::Unbounded => None,
        },
    };
    let arena = build_arena(root, |pos: &Ext<P>| {
        let mut out = Vec::new();
        for side in 0..2usize {
            let switches = match pos.last {
                None => {
                    if cfg.start_graph.is_some_and(|g| g != side) {
                        continue;
                    }
                    pos.switches
                }
                Some(prev) if prev == side => pos.switches,
                Some(_) => match pos.switches {
                    Some(0) => continue,
                    Some(n) => Some(n - 1),
                    None => None,
                },
            };
            for c in gen(&pos.pair, side) {
                out.push(Challenge {
                    mv: c.mv,
                    responses: c
                        .responses
                        .into_iter()
                        .map(|(m, p)| {
                            (
                                m,
                                Ext {
                                    pair: p,
                                    last: Some(side),
                                    switches,
                                },
                            )
                        })
                        .collect(),
                });
            }
        }
        out
    });
    let challenger_wins = match (arena.rank[0], cfg.rounds) {
        (Some(r), Budget::Finite(k)) => r <= k,
        (Some(_), Budget::Unbounded) => true,
        (None, _) => false,
    };
    let trace = if challenger_wins {
        winning_trace(&arena, &half)
    } else {
        survival_sample(&arena, cfg.rounds, &half)
    };
    GameOutcome {
        winner: if challenger_wins {
            Winner::Challenger
        } else {
            Winner::Defender
        },
        alternation_count: count_switches(&trace),
        trace,
        winning_disjunct: None,
    }
}

fn count_switches(trace: &[GameRound]) -> u32 {
    trace
        .windows(2)
        .filter(|w| w[0].side != w[1].side)
        .count() as u32
}

/// The challenger's optimal play: fastest winning challenge each round,
/// answered by the defender's longest-surviving response. Ranks strictly
/// decrease, so this ends at an unanswerable challenge within the round
/// budget whenever the root rank fits it.
fn winning_trace<P, M, H>(arena: &BuiltArena<Ext<P>, M>, half: &H) -> Vec<GameRound>
where
    H: Fn(&M) -> HalfMove,
{
    let mut trace = Vec::new();
    let mut cur = 0usize;
    let mut round = 1u32;
    loop {
        let c = arena.table[cur]
            .iter()
            .filter(|c| challenge_rank(&arena.rank, c).is_some())
            .min_by_key(|c| challenge_rank(&arena.rank, c).unwrap())
            .expect("a ranked position has a winning challenge");
        let challenge = half(&c.mv);
        let side = challenge.side.clone();
        if c.responses.is_empty() {
            trace.push(GameRound {
                round,
                side,
                challenge,
                response: None,
            });
            return trace;
        }
        let mut pick = 0;
        for (ri, &(_, j)) in c.responses.iter().enumerate() {
            if arena.rank[j].unwrap() > arena.rank[c.responses[pick].1].unwrap() {
                pick = ri;
            }
        }
        trace.push(GameRound {
            round,
            side,
            challenge,
            response: Some(half(&c.responses[pick].0)),
        });
        cur = c.responses[pick].1;
        round += 1;
    }
}

/// Sampled rounds of the maximal defender: first challenge in enumeration
/// order, first surviving answer. Stops at a revisited position, a
/// deadlock, an exhausted round budget or the length cap.
fn survival_sample<P, M, H>(
    arena: &BuiltArena<Ext<P>, M>,
    rounds: Budget,
    half: &H,
) -> Vec<GameRound>
where
    H: Fn(&M) -> HalfMove,
{
    const CAP: usize = 12;
    let mut trace = Vec::new();
    let mut visited = HashSet::new();
    let mut cur = 0usize;
    let mut remaining = match rounds {
        Budget::Finite(k) => Some(k),
        Budget::Unbounded => None,
    };
    let mut round = 1u32;
    while trace.len() < CAP && remaining != Some(0) && visited.insert(cur) {
        let Some(c) = arena.table[cur].first() else {
            break;
        };
        let next_budget = remaining.map(|r| r - 1);
        let survives = |j: usize| match next_budget {
            None => arena.rank[j].is_none(),
            Some(r) => arena.rank[j].is_none_or(|x| x > r),
        };
        let (m, j) = c
            .responses
            .iter()
            .find(|&&(_, j)| survives(j))
            .expect("a surviving position answers every challenge");
        let challenge = half(&c.mv);
        trace.push(GameRound {
            round,
            side: challenge.side.clone(),
            challenge,
            response: Some(half(m)),
        });
        cur = *j;
        remaining = next_budget;
        round += 1;
    }
    trace
}

fn flip_half(hm: &mut HalfMove) {
    hm.side = if hm.side == "A" { "B" } else { "A" }.into();
}

/// Rewrites a challenge generated on swapped instances back into the
/// caller's left/right orientation.
fn unmirror(mut c: Challenge<TimedPair, TimedMove>) -> Challenge<TimedPair, TimedMove> {
    flip_half(&mut c.mv.hm);
    for (m, p) in c.responses.iter_mut() {
        flip_half(&mut m.hm);
        std::mem::swap(&mut p.0, &mut p.1);
    }
    c
}

fn play_single(cfg: &GameConfig, left: &Instance, right: &Instance) -> GameOutcome {
    match cfg.alpha {
        Alpha::ExactDelay => {
            let game = TimedGame { left, right };
            run_game(
                cfg,
                (left.start.clone(), right.start.clone()),
                |pos, side| {
                    let mut cs = game.action_challenges(pos, side);
                    cs.extend(game.exact_delay_challenges(pos, side));
                    cs
                },
                |m: &TimedMove| m.hm.clone(),
            )
        }
        Alpha::FreeDelay => match cfg.beta.unwrap_or(Beta::LeftNoMore) {
            Beta::LeftNoMore => {
                let game = TimedGame { left, right };
                run_game(
                    cfg,
                    (left.start.clone(), right.start.clone()),
                    |pos, side| {
                        let mut cs = game.action_challenges(pos, side);
                        cs.extend(game.prebisim_delay_challenges(pos, side));
                        cs
                    },
                    |m: &TimedMove| m.hm.clone(),
                )
            }
            Beta::RightNoMore => {
                // The same game with the roles swapped: generate moves on
                // the mirrored position and swap the results back.
                let game = TimedGame {
                    left: right,
                    right: left,
                };
                run_game(
                    cfg,
                    (left.start.clone(), right.start.clone()),
                    |pos, side| {
                        let mirrored = (pos.1.clone(), pos.0.clone());
                        let mut cs = game.action_challenges(&mirrored, 1 - side);
                        cs.extend(game.prebisim_delay_challenges(&mirrored, 1 - side));
                        cs.into_iter().map(unmirror).collect()
                    },
                    |m: &TimedMove| m.hm.clone(),
                )
            }
        },
        Alpha::Strong | Alpha::DelayAbstract | Alpha::ObsAbstract => {
            let flavor = match cfg.alpha {
                Alpha::Strong => TaFlavor::Strong,
                Alpha::DelayAbstract => TaFlavor::Delay,
                _ => TaFlavor::Observational,
            };
            let game = TaGame {
                left,
                right,
                flavor,
            };
            run_game(
                cfg,
                (left.graph.initial_node(), right.graph.initial_node()),
                |pos, side| game.challenges(pos, side),
                HalfMove::clone,
            )
        }
    }
}

/// Solves the configured game between the start states of two instances.
/// For disjunctive configurations the members are played left to right and
/// the defender wins the whole game by winning any member; the reported
/// trace and `winning_disjunct` come from the decisive member.
pub fn play(cfg: &GameConfig, left: &Instance, right: &Instance) -> Result<GameOutcome, GameError> {
    cfg.validate()?;
    let mut first = play_single(cfg, left, right);
    let Some(second_cfg) = &cfg.disjunct else {
        return Ok(first);
    };
    if first.winner == Winner::Defender {
        first.winning_disjunct = Some(0);
        return Ok(first);
    }
    let mut second = play_single(second_cfg, left, right);
    if second.winner == Winner::Defender {
        second.winning_disjunct = Some(1);
        return Ok(second);
    }
    Ok(first)
}

/// The game configuration that decides each relation: the winner of
/// `play(correspondence(kind), ..)` matches the verdict of the relation
/// checker. Bisimulations are the unrestricted games for their move shape;
/// simulation equivalences forbid switching, so the challenger commits to
/// one graph in the opening round; the directional timed simulation
/// additionally pins that opening choice. The performance preorder is the
/// disjunction of the two skewed-delay games, the left-fast member first,
/// so a defender win on member 0 is exactly "left at least as fast".
pub fn correspondence(kind: RelationKind) -> GameConfig {
    let none = Budget::Finite(0);
    match kind {
        RelationKind::TimedBisim => GameConfig::unbounded(Alpha::ExactDelay),
        RelationKind::TimedSim => GameConfig {
            start_graph: Some(0),
            ..GameConfig::unbounded(Alpha::ExactDelay).with_alternations(none)
        },
        RelationKind::TimedSimEquiv => GameConfig::unbounded(Alpha::ExactDelay).with_alternations(none),
        RelationKind::Prebisim => GameConfig {
            disjunct: Some(Box::new(
                GameConfig::unbounded(Alpha::FreeDelay).with_beta(Beta::RightNoMore),
            )),
            ..GameConfig::unbounded(Alpha::FreeDelay).with_beta(Beta::LeftNoMore)
        },
        RelationKind::TaBisim => GameConfig::unbounded(Alpha::Strong),
        RelationKind::TaDelayBisim => GameConfig::unbounded(Alpha::DelayAbstract),
        RelationKind::TaObsBisim => GameConfig::unbounded(Alpha::ObsAbstract),
        RelationKind::TaSimEquiv => GameConfig::unbounded(Alpha::Strong).with_alternations(none),
        RelationKind::TaDelaySimEquiv => {
            GameConfig::unbounded(Alpha::DelayAbstract).with_alternations(none)
        }
        RelationKind::TaObsSimEquiv => {
            GameConfig::unbounded(Alpha::ObsAbstract).with_alternations(none)
        }
    }
}

/// Whether `play(correspondence(kind), ..)` means "related". For the
/// performance preorder the defender must win the left-fast member
/// specifically; everywhere else a defender win is the relation.
pub fn outcome_matches_relation(kind: RelationKind, outcome: &GameOutcome) -> bool {
    if kind == RelationKind::Prebisim {
        outcome.winner == Winner::Defender && outcome.winning_disjunct == Some(0)
    } else {
        outcome.winner == Winner::Defender
    }
}

/// One verified implication between two configurations: a defender win on
/// the stronger game must carry over to the weaker one.
#[derive(Clone, Debug, Serialize)]
pub struct AuditArrow {
    pub name: String,
    /// Pairs on which the implication was checked.
    pub checked: usize,
    /// Pair indices where only the weaker game was won, witnessing that
    /// the arrow does not reverse.
    pub strict_on: Vec<usize>,
}

/// Result of auditing the budget and move-shape hierarchy over a set of
/// instance pairs. `violations` must stay empty; strictness witnesses are
/// informative only.
#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub arrows: Vec<AuditArrow>,
    pub violations: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The audited implications: more switch budget beats less, more rounds
/// beat fewer, exact delay answers beat skewed ones and their disjunction,
/// and exact answers beat every looser answer shape down the eps chain.
fn audit_arrows() -> Vec<(String, GameConfig, GameConfig)> {
    let exact = GameConfig::unbounded(Alpha::ExactDelay);
    let mut out = Vec::new();

    let alt_chain = [
        Budget::Unbounded,
        Budget::Finite(2),
        Budget::Finite(1),
        Budget::Finite(0),
    ];
    for w in alt_chain.windows(2) {
        out.push((
            format!("alternation budget {} to {}", w[0], w[1]),
            exact.clone().with_alternations(w[0]),
            exact.clone().with_alternations(w[1]),
        ));
    }

    let round_chain = [
        Budget::Unbounded,
        Budget::Finite(3),
        Budget::Finite(2),
        Budget::Finite(1),
    ];
    for w in round_chain.windows(2) {
        out.push((
            format!("round budget {} to {}", w[0], w[1]),
            exact
                .clone()
                .with_alternations(Budget::Finite(0))
                .with_rounds(w[0]),
            exact
                .clone()
                .with_alternations(Budget::Finite(0))
                .with_rounds(w[1]),
        ));
    }

    let fast_left = GameConfig::unbounded(Alpha::FreeDelay).with_beta(Beta::LeftNoMore);
    let fast_right = GameConfig::unbounded(Alpha::FreeDelay).with_beta(Beta::RightNoMore);
    out.push((
        "exact delays to left-fast skew".into(),
        exact.clone(),
        fast_left.clone(),
    ));
    out.push((
        "exact delays to right-fast skew".into(),
        exact.clone(),
        fast_right.clone(),
    ));
    out.push((
        "exact delays to the skew disjunction".into(),
        exact.clone(),
        GameConfig {
            disjunct: Some(Box::new(fast_right)),
            ..fast_left
        },
    ));

    out.push((
        "exact delays to node actions".into(),
        exact,
        GameConfig::unbounded(Alpha::Strong),
    ));
    out.push((
        "node actions to eps-led answers".into(),
        GameConfig::unbounded(Alpha::Strong),
        GameConfig::unbounded(Alpha::DelayAbstract),
    ));
    out.push((
        "eps-led answers to eps-wrapped answers".into(),
        GameConfig::unbounded(Alpha::DelayAbstract),
        GameConfig::unbounded(Alpha::ObsAbstract),
    ));
    out
}

fn defender_wins(
    memo: &mut HashMap<GameConfig, bool>,
    cfg: &GameConfig,
    left: &Instance,
    right: &Instance,
) -> bool {
    if let Some(&w) = memo.get(cfg) {
        return w;
    }
    let w = play(cfg, left, right)
        .expect("audit configurations are valid")
        .winner
        == Winner::Defender;
    memo.insert(cfg.clone(), w);
    w
}

/// Checks every hierarchy arrow on every pair: winning the stronger game
/// must imply winning the weaker one. Any violation is an implementation
/// bug, reported with the pair index and the arrow that broke.
pub fn hierarchy_audit(pairs: &[(Instance, Instance)]) -> AuditReport {
    let specs = audit_arrows();
    let mut arrows: Vec<AuditArrow> = specs
        .iter()
        .map(|(name, _, _)| AuditArrow {
            name: name.clone(),
            checked: 0,
            strict_on: Vec::new(),
        })
        .collect();
    let mut violations = Vec::new();
    for (pi, (left, right)) in pairs.iter().enumerate() {
        let mut memo = HashMap::new();
        for (ai, (name, strong, weak)) in specs.iter().enumerate() {
            let ws = defender_wins(&mut memo, strong, left, right);
            let ww = defender_wins(&mut memo, weak, left, right);
            arrows[ai].checked += 1;
            if ws && !ww {
                violations.push(format!("pair {pi}: defender wins only the stronger side of \"{name}\""));
            }
            if ww && !ws {
                arrows[ai].strict_on.push(pi);
            }
        }
    }
    AuditReport { arrows, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::TimedAutomaton;
    use crate::relations::check;

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

    /// a then (b or c) versus a·b plus a second a-branch with b and c: not
    /// bisimilar, but each simulates the other.
    fn branching_pair() -> (TimedAutomaton, TimedAutomaton) {
        let a = automaton(
            r#"{
                "clocks": [],
                "actions": ["a", "b", "c"],
                "locations": ["p0", "p1", "p2"],
                "initial": "p0",
                "edges": [
                    {"from": "p0", "to": "p1", "action": "a", "guard": [], "resets": []},
                    {"from": "p1", "to": "p2", "action": "b", "guard": [], "resets": []},
                    {"from": "p1", "to": "p2", "action": "c", "guard": [], "resets": []}
                ]
            }"#,
        );
        let b = automaton(
            r#"{
                "clocks": [],
                "actions": ["a", "b", "c"],
                "locations": ["q0", "q1", "q2", "q3"],
                "initial": "q0",
                "edges": [
                    {"from": "q0", "to": "q1", "action": "a", "guard": [], "resets": []},
                    {"from": "q1", "to": "q3", "action": "b", "guard": [], "resets": []},
                    {"from": "q1", "to": "q3", "action": "c", "guard": [], "resets": []},
                    {"from": "q0", "to": "q2", "action": "a", "guard": [], "resets": []},
                    {"from": "q2", "to": "q3", "action": "b", "guard": [], "resets": []}
                ]
            }"#,
        );
        (a, b)
    }

    #[test]
    fn copycat_defends_identical_automata_forever() {
        let a = one_edge("x", "=", 2);
        let ia = instance(&a);
        let ib = instance(&a);
        let out = play(&GameConfig::unbounded(Alpha::ExactDelay), &ia, &ib).unwrap();
        assert_eq!(out.winner, Winner::Defender);
        assert!(out.winning_disjunct.is_none());
    }

    #[test]
    fn the_two_versus_five_game_ends_in_two_rounds() {
        let ia = instance(&one_edge("x", "=", 2));
        let ib = instance(&one_edge("y", "=", 5));
        let out = play(&GameConfig::unbounded(Alpha::ExactDelay), &ia, &ib).unwrap();
        assert_eq!(out.winner, Winner::Challenger);
        assert_eq!(
            render_trace(&out.trace),
            "[delay 2 on A; defender replies delay 2; action a on A; FAIL]"
        );
        assert_eq!(out.alternation_count, 0);
        assert_eq!(out.trace.len(), 2);
        assert_eq!(out.trace[0].round, 1);
        assert_eq!(out.trace[1].round, 2);
    }

    #[test]
    fn the_skew_disjunction_reports_the_fast_side() {
        let ia = instance(&one_edge("x", "=", 2));
        let ib = instance(&one_edge("y", "=", 5));
        let cfg = correspondence(RelationKind::Prebisim);
        let out = play(&cfg, &ia, &ib).unwrap();
        assert_eq!(out.winner, Winner::Defender);
        assert_eq!(out.winning_disjunct, Some(0), "the left side is the fast one");
        let rev = play(&cfg, &ib, &ia).unwrap();
        assert_eq!(rev.winner, Winner::Defender);
        assert_eq!(rev.winning_disjunct, Some(1));
    }

    #[test]
    fn round_budgets_cut_the_challenger_off() {
        // The winning play needs two rounds: delay 2, then the action.
        let ia = instance(&one_edge("x", "=", 2));
        let ib = instance(&one_edge("y", "=", 5));
        let base = GameConfig::unbounded(Alpha::ExactDelay).with_alternations(Budget::Finite(0));
        let short = play(&base.clone().with_rounds(Budget::Finite(1)), &ia, &ib).unwrap();
        assert_eq!(short.winner, Winner::Defender);
        let enough = play(&base.with_rounds(Budget::Finite(2)), &ia, &ib).unwrap();
        assert_eq!(enough.winner, Winner::Challenger);
        assert_eq!(enough.trace.len(), 2);
    }

    #[test]
    fn switch_budgets_separate_bisimulation_from_simulation_equivalence() {
        let (a, b) = branching_pair();
        let ia = instance(&a);
        let ib = instance(&b);
        // With free switching the challenger exploits the branching.
        let full = play(&GameConfig::unbounded(Alpha::ExactDelay), &ia, &ib).unwrap();
        assert_eq!(full.winner, Winner::Challenger);
        assert!(full.alternation_count >= 1, "the win needs a switch");
        // Committed to one graph the challenger has nothing.
        let locked = play(
            &GameConfig::unbounded(Alpha::ExactDelay).with_alternations(Budget::Finite(0)),
            &ia,
            &ib,
        )
        .unwrap();
        assert_eq!(locked.winner, Winner::Defender);
    }

    #[test]
    fn every_relation_agrees_with_its_game() {
        let pairs = [
            (one_edge("x", "=", 2), one_edge("y", "=", 5)),
            (one_edge("x", "=", 2), one_edge("y", "=", 2)),
            (one_edge("x", "=", 2), one_edge("y", ">=", 0)),
            (one_edge("x", ">=", 1), one_edge("y", ">=", 0)),
            (one_edge("x", "<", 3), one_edge("y", "<=", 3)),
            branching_pair(),
        ];
        for (a, b) in &pairs {
            let ia = instance(a);
            let ib = instance(b);
            for kind in RelationKind::ALL {
                let verdict = check(kind, &ia, &ib);
                let out = play(&correspondence(kind), &ia, &ib).unwrap();
                assert_eq!(
                    outcome_matches_relation(kind, &out),
                    verdict.related,
                    "game and checker disagree on {}",
                    kind.name()
                );
            }
        }
    }

    #[test]
    fn too_many_alternations_for_the_rounds_is_rejected() {
        let cfg = GameConfig::unbounded(Alpha::ExactDelay)
            .with_alternations(Budget::Finite(3))
            .with_rounds(Budget::Finite(2));
        assert!(matches!(
            play(&cfg, &instance(&one_edge("x", "=", 2)), &instance(&one_edge("y", "=", 2))),
            Err(GameError::AlternationsExceedRounds { .. })
        ));
        // Equal budgets are still one alternation too many.
        let tight = GameConfig::unbounded(Alpha::ExactDelay)
            .with_alternations(Budget::Finite(2))
            .with_rounds(Budget::Finite(2));
        assert!(tight.validate().is_err());
        let fits = GameConfig::unbounded(Alpha::ExactDelay)
            .with_alternations(Budget::Finite(1))
            .with_rounds(Budget::Finite(2));
        assert!(fits.validate().is_ok());
    }

    #[test]
    fn defender_wins_come_with_a_survivable_sample() {
        let a = one_edge("x", "=", 2);
        let ia = instance(&a);
        let ib = instance(&a);
        let out = play(&GameConfig::unbounded(Alpha::ExactDelay), &ia, &ib).unwrap();
        assert_eq!(out.winner, Winner::Defender);
        for r in &out.trace {
            assert!(r.response.is_some(), "a sample never ends in FAIL");
        }
    }

    #[test]
    fn the_audit_finds_no_violations_and_some_strict_arrows() {
        let pairs = vec![
            (
                instance(&one_edge("x", "=", 2)),
                instance(&one_edge("y", "=", 5)),
            ),
            (
                instance(&one_edge("x", "=", 2)),
                instance(&one_edge("y", "=", 2)),
            ),
            (
                instance(&one_edge("x", ">=", 1)),
                instance(&one_edge("y", ">=", 0)),
            ),
            {
                let (a, b) = branching_pair();
                (instance(&a), instance(&b))
            },
        ];
        let report = hierarchy_audit(&pairs);
        assert!(report.passed(), "{:?}", report.violations);
        assert!(
            report.arrows.iter().any(|a| !a.strict_on.is_empty()),
            "at least one arrow should be strict somewhere on these pairs"
        );
        for arrow in &report.arrows {
            assert_eq!(arrow.checked, pairs.len());
        }
    }

    #[test]
    fn budgets_parse_and_render() {
        assert_eq!("unbounded".parse::<Budget>().unwrap(), Budget::Unbounded);
        assert_eq!("inf".parse::<Budget>().unwrap(), Budget::Unbounded);
        assert_eq!("7".parse::<Budget>().unwrap(), Budget::Finite(7));
        assert!("seven".parse::<Budget>().is_err());
        assert_eq!(Budget::Finite(3).to_string(), "3");
        assert_eq!(Budget::Unbounded.to_string(), "unbounded");
    }
}
