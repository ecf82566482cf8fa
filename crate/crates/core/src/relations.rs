//! Decision procedures for the behavioural relations between two timed
//! automata: timed (bi)simulation, performance prebisimulation, and the
//! time-abstracted family.
//!
//! Every relation is decided as a safety game: the challenger picks a move
//! in one transition system, the defender must answer in the other, and the
//! relation holds exactly when the defender can keep answering forever. The
//! timed relations play over pairs of corner point states, the
//! time-abstracted ones over pairs of zone graph nodes; both carriers are
//! finite, so a greatest fixpoint over the reachable pair arena settles the
//! verdict. Positions the challenger can force to a dead end get a rank
//! (their distance to the win); unranked positions form the relation.

use crate::automaton::{TimedAutomaton, TimedState};
use crate::corner::{cp_delays, end_of_zone_delays, CornerState, CpDelay, DelayKind, DeltaValue};
use crate::zone_graph::{NodeId, ZoneGraph, ZoneGraphError};
use serde::Serialize;
use std::collections::HashMap;
use std::hash::Hash;

/// The relations this crate decides. `TimedSim` and `Prebisim` are
/// directional and read left to right: "left is simulated by right",
/// "left is at least as fast as right".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationKind {
    TimedBisim,
    TimedSim,
    TimedSimEquiv,
    Prebisim,
    TaBisim,
    TaDelayBisim,
    TaObsBisim,
    TaSimEquiv,
    TaDelaySimEquiv,
    TaObsSimEquiv,
}

/// How the defender may answer an action in the time-abstracted games:
/// with the bare action, with delays before it, or with delays around it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaFlavor {
    Strong,
    Delay,
    Observational,
}

impl RelationKind {
    pub const ALL: [RelationKind; 10] = [
        RelationKind::TimedBisim,
        RelationKind::TimedSim,
        RelationKind::TimedSimEquiv,
        RelationKind::Prebisim,
        RelationKind::TaBisim,
        RelationKind::TaDelayBisim,
        RelationKind::TaObsBisim,
        RelationKind::TaSimEquiv,
        RelationKind::TaDelaySimEquiv,
        RelationKind::TaObsSimEquiv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationKind::TimedBisim => "timed-bisim",
            RelationKind::TimedSim => "timed-sim",
            RelationKind::TimedSimEquiv => "timed-sim-equiv",
            RelationKind::Prebisim => "prebisim",
            RelationKind::TaBisim => "ta-bisim",
            RelationKind::TaDelayBisim => "ta-delay-bisim",
            RelationKind::TaObsBisim => "ta-obs-bisim",
            RelationKind::TaSimEquiv => "ta-sim-equiv",
            RelationKind::TaDelaySimEquiv => "ta-delay-sim-equiv",
            RelationKind::TaObsSimEquiv => "ta-obs-sim-equiv",
        }
    }

    pub fn from_name(name: &str) -> Option<RelationKind> {
        RelationKind::ALL.iter().copied().find(|k| k.name() == name)
    }

    /// The flavor of a time-abstracted kind, `None` for the timed kinds.
    pub fn flavor(self) -> Option<TaFlavor> {
        match self {
            RelationKind::TaBisim | RelationKind::TaSimEquiv => Some(TaFlavor::Strong),
            RelationKind::TaDelayBisim | RelationKind::TaDelaySimEquiv => Some(TaFlavor::Delay),
            RelationKind::TaObsBisim | RelationKind::TaObsSimEquiv => Some(TaFlavor::Observational),
            _ => None,
        }
    }
}

/// One move by one player, rendered for traces.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalfMove {
    /// Which automaton the move happens in: "A" (left) or "B" (right).
    pub side: String,
    /// "action", "delay" or "eps".
    pub kind: String,
    /// Action name or delay amount.
    pub label: String,
    pub from: String,
    pub to: String,
}

/// One game round of a refutation: the challenge and the strongest defender
/// answer; `None` when no answer exists, which ends the trace.
#[derive(Clone, Debug, Serialize)]
pub struct RefutationStep {
    pub challenge: HalfMove,
    pub response: Option<HalfMove>,
}

/// Outcome of a relation check. Exactly one of `witness` (the computed
/// relation as rendered pairs) and `refutation` (a winning challenger play)
/// is present.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub relation: String,
    pub related: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<(String, String)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refutation: Option<Vec<RefutationStep>>,
}

/// One side of a comparison: a zone graph rooted at a designated state, with
/// that state's corner form.
pub struct Instance {
    pub graph: ZoneGraph,
    pub start: CornerState,
}

impl Instance {
    pub fn new(automaton: &TimedAutomaton, state: &TimedState) -> Result<Instance, ZoneGraphError> {
        let graph = ZoneGraph::build(automaton, state)?;
        let start = CornerState::from_state(state, graph.max_constants());
        Ok(Instance { graph, start })
    }

    fn automaton(&self) -> &TimedAutomaton {
        self.graph.automaton()
    }
}

/// A challenger move together with every defender answer and the position
/// each answer leads to. No answers means the challenger wins on the spot.
/// `M` is whatever a game needs to describe a move.
pub(crate) struct Challenge<P, M> {
    pub(crate) mv: M,
    pub(crate) responses: Vec<(M, P)>,
}

struct Solved {
    related: bool,
    witness: Option<Vec<(String, String)>>,
    refutation: Option<Vec<RefutationStep>>,
}

/// The explored pair arena with positions indexed in discovery order and the
/// challenger's rank for each (None when the defender survives forever).
pub(crate) struct BuiltArena<P, M> {
    pub(crate) order: Vec<P>,
    pub(crate) table: Vec<Vec<Challenge<usize, M>>>,
    pub(crate) rank: Vec<Option<u32>>,
}

pub(crate) fn challenge_rank<M>(rank: &[Option<u32>], c: &Challenge<usize, M>) -> Option<u32> {
    let mut worst = 0;
    for &(_, j) in &c.responses {
        worst = worst.max(rank[j]?);
    }
    Some(worst + 1)
}

/// Explores the pair arena from `root` and computes the defender's winning
/// region as a greatest fixpoint. A position is ranked when some challenge
/// there has all its answers already ranked (rank = 1 + the worst answer;
/// an unanswerable challenge ranks 1). Unranked positions are exactly those
/// the defender survives forever.
pub(crate) fn build_arena<P, M, F>(root: P, challenges_of: F) -> BuiltArena<P, M>
where
    P: Clone + Eq + Hash,
    F: Fn(&P) -> Vec<Challenge<P, M>>,
{
    let mut index: HashMap<P, usize> = HashMap::new();
    let mut order: Vec<P> = vec![root.clone()];
    index.insert(root, 0);
    let mut table: Vec<Vec<Challenge<usize, M>>> = Vec::new();
    let mut next = 0;
    while next < order.len() {
        let pos = order[next].clone();
        let mut row = Vec::new();
        for c in challenges_of(&pos) {
            let mut responses = Vec::new();
            for (mv, succ) in c.responses {
                let idx = match index.get(&succ) {
                    Some(&i) => i,
                    None => {
                        order.push(succ.clone());
                        index.insert(succ, order.len() - 1);
                        order.len() - 1
                    }
                };
                responses.push((mv, idx));
            }
            row.push(Challenge {
                mv: c.mv,
                responses,
            });
        }
        table.push(row);
        next += 1;
    }

    let rank = compute_ranks(&table);
    BuiltArena { order, table, rank }
}

/// Backward induction over the explored arena, linear in the number of
/// stored responses. Positions are settled in increasing rank order: a
/// challenge becomes decisive once its last response is ranked, and offers
/// its position a rank one above its worst response. The first offer a
/// position receives is its smallest, because offers triggered by rank `r`
/// responses always exceed `r` and buckets are drained in order.
fn compute_ranks<M>(table: &[Vec<Challenge<usize, M>>]) -> Vec<Option<u32>> {
    let n = table.len();
    let mut rank: Vec<Option<u32>> = vec![None; n];
    // Per challenge: unranked responses left, and the worst rank seen.
    let mut remaining: Vec<Vec<usize>> = table
        .iter()
        .map(|row| row.iter().map(|c| c.responses.len()).collect())
        .collect();
    let mut worst: Vec<Vec<u32>> = table.iter().map(|row| vec![0; row.len()]).collect();
    // Which challenges each position answers, as (position, challenge).
    let mut rev: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
    for (i, row) in table.iter().enumerate() {
        for (ci, c) in row.iter().enumerate() {
            for &(_, j) in &c.responses {
                rev[j].push((i as u32, ci as u32));
            }
        }
    }
    let mut buckets: Vec<Vec<u32>> = Vec::new();
    let mut offer = |buckets: &mut Vec<Vec<u32>>, r: u32, i: u32| {
        let slot = r as usize;
        if buckets.len() <= slot {
            buckets.resize(slot + 1, Vec::new());
        }
        buckets[slot].push(i);
    };
    for (i, row) in table.iter().enumerate() {
        if row.iter().any(|c| c.responses.is_empty()) {
            offer(&mut buckets, 1, i as u32);
        }
    }
    let mut r = 1usize;
    while r < buckets.len() {
        let bucket = std::mem::take(&mut buckets[r]);
        for i in bucket {
            if rank[i as usize].is_some() {
                continue;
            }
            rank[i as usize] = Some(r as u32);
            for &(p, ci) in &rev[i as usize] {
                if rank[p as usize].is_some() {
                    continue;
                }
                let rem = &mut remaining[p as usize][ci as usize];
                *rem -= 1;
                let w = &mut worst[p as usize][ci as usize];
                *w = (*w).max(r as u32);
                if *rem == 0 {
                    let candidate = *w + 1;
                    offer(&mut buckets, candidate, p);
                }
            }
        }
        r += 1;
    }
    rank
}

/// Solves the game and packages the verdict: the computed relation as a
/// witness when the root is unranked, otherwise a principal refutation.
///
/// Moves are stored raw; `half` renders one against the position it is
/// played from, and only the refutation path is ever rendered. A mover's
/// own component of the position is untouched by the other side's half of
/// the round, so the same call shape serves challenges and responses.
fn solve_game<P, M, F, R, H>(root: P, challenges_of: F, render: R, half: H) -> Solved
where
    P: Clone + Eq + Hash,
    M: Clone,
    F: Fn(&P) -> Vec<Challenge<P, M>>,
    R: Fn(&P) -> (String, String),
    H: Fn(&P, &M) -> HalfMove,
{
    let arena = build_arena(root, challenges_of);
    let BuiltArena { order, table, rank } = arena;
    if rank[0].is_none() {
        let witness = order
            .iter()
            .enumerate()
            .filter(|(i, _)| rank[*i].is_none())
            .map(|(_, p)| render(p))
            .collect();
        return Solved {
            related: true,
            witness: Some(witness),
            refutation: None,
        };
    }

    // Principal refutation: challenger takes the fastest winning challenge,
    // defender the longest-surviving answer; ranks strictly decrease, so the
    // play ends at an unanswerable challenge.
    let mut steps = Vec::new();
    let mut cur = 0usize;
    loop {
        let pos = &order[cur];
        let c = table[cur]
            .iter()
            .filter(|c| challenge_rank(&rank, c).is_some())
            .min_by_key(|c| challenge_rank(&rank, c).unwrap())
            .expect("a ranked position has a winning challenge");
        if c.responses.is_empty() {
            steps.push(RefutationStep {
                challenge: half(pos, &c.mv),
                response: None,
            });
            break;
        }
        let mut pick = 0;
        for (ri, &(_, j)) in c.responses.iter().enumerate() {
            if rank[j].unwrap() > rank[c.responses[pick].1].unwrap() {
                pick = ri;
            }
        }
        steps.push(RefutationStep {
            challenge: half(pos, &c.mv),
            response: Some(half(pos, &c.responses[pick].0)),
        });
        cur = c.responses[pick].1;
    }
    Solved {
        related: false,
        witness: None,
        refutation: Some(steps),
    }
}

fn side_name(side: usize) -> &'static str {
    ["A", "B"][side]
}

/// Positions of the timed games: a corner state in each automaton, always
/// stored as (left, right).
pub(crate) type TimedPair = (CornerState, CornerState);

/// A raw move in the timed games: an edge index in the moving automaton, or
/// a delay amount. Kept alongside the rendered form so a winning strategy
/// can be replayed structurally.
#[derive(Clone, Debug)]
pub enum CpMove {
    Action(usize),
    Delay(DeltaValue),
}

#[derive(Clone)]
pub(crate) struct TimedMove {
    pub(crate) hm: HalfMove,
    pub(crate) raw: CpMove,
}

pub(crate) struct TimedGame<'a> {
    pub(crate) left: &'a Instance,
    pub(crate) right: &'a Instance,
}

impl<'a> TimedGame<'a> {
    pub(crate) fn instances(&self, side: usize) -> (&Instance, &Instance) {
        if side == 0 {
            (self.left, self.right)
        } else {
            (self.right, self.left)
        }
    }

    fn split<'p>(&self, pos: &'p TimedPair, side: usize) -> (&'p CornerState, &'p CornerState) {
        if side == 0 {
            (&pos.0, &pos.1)
        } else {
            (&pos.1, &pos.0)
        }
    }

    fn join(&self, side: usize, ch: CornerState, df: CornerState) -> TimedPair {
        if side == 0 {
            (ch, df)
        } else {
            (df, ch)
        }
    }

    fn render(&self, pos: &TimedPair) -> (String, String) {
        (
            pos.0.render(self.left.automaton()),
            pos.1.render(self.right.automaton()),
        )
    }

    /// Action challenges on `side`, answered by equally named actions on the
    /// other side.
    pub(crate) fn action_challenges(
        &self,
        pos: &TimedPair,
        side: usize,
    ) -> Vec<Challenge<TimedPair, TimedMove>> {
        let (ci, di) = self.instances(side);
        let (ch, df) = self.split(pos, side);
        let ca = ci.automaton();
        let da = di.automaton();
        let mut out = Vec::new();
        for e in ch.enabled(ca) {
            let label = ca.actions[ca.edges[e].action].clone();
            let ch2 = ch
                .apply_edge(ca, e, ci.graph.max_constants())
                .expect("enabled edge fires");
            let mv = TimedMove {
                hm: HalfMove {
                    side: side_name(side).into(),
                    kind: "action".into(),
                    label: label.clone(),
                    from: ch.render(ca),
                    to: ch2.render(ca),
                },
                raw: CpMove::Action(e),
            };
            let mut responses = Vec::new();
            for e2 in df.enabled(da) {
                if da.actions[da.edges[e2].action] != label {
                    continue;
                }
                let df2 = df
                    .apply_edge(da, e2, di.graph.max_constants())
                    .expect("enabled edge fires");
                let hm = HalfMove {
                    side: side_name(1 - side).into(),
                    kind: "action".into(),
                    label: label.clone(),
                    from: df.render(da),
                    to: df2.render(da),
                };
                let answer = TimedMove {
                    hm,
                    raw: CpMove::Action(e2),
                };
                responses.push((answer, self.join(side, ch2.clone(), df2)));
            }
            out.push(Challenge { mv, responses });
        }
        out
    }

    fn delay_move(
        &self,
        side: usize,
        from: &CornerState,
        d: &CpDelay,
        automaton: &TimedAutomaton,
    ) -> TimedMove {
        TimedMove {
            hm: HalfMove {
                side: side_name(side).into(),
                kind: "delay".into(),
                label: d.amount.to_string(),
                from: from.render(automaton),
                to: d.landing.render(automaton),
            },
            raw: CpMove::Delay(d.amount),
        }
    }

    /// Delay challenges on `side` where the defender must replay the exact
    /// same amount (the bisimulation and simulation delay rule).
    pub(crate) fn exact_delay_challenges(
        &self,
        pos: &TimedPair,
        side: usize,
    ) -> Vec<Challenge<TimedPair, TimedMove>> {
        let (ci, di) = self.instances(side);
        let (ch, df) = self.split(pos, side);
        let mut out = Vec::new();
        for d in cp_delays(&ci.graph, ch) {
            let df2 = df.apply_delay(d.amount, di.graph.max_constants());
            let answer = TimedMove {
                hm: HalfMove {
                    side: side_name(1 - side).into(),
                    kind: "delay".into(),
                    label: d.amount.to_string(),
                    from: df.render(di.automaton()),
                    to: df2.render(di.automaton()),
                },
                raw: CpMove::Delay(d.amount),
            };
            let mv = self.delay_move(side, ch, &d, ci.automaton());
            out.push(Challenge {
                mv,
                responses: vec![(answer, self.join(side, d.landing.clone(), df2))],
            });
        }
        out
    }

    /// Delay challenges and answers for the performance game. The left side
    /// must be at least as fast, so when the challenger delays on the left
    /// the defender may answer with the same amount or any longer entry
    /// delay, and when the challenger delays on the right the defender may
    /// answer with the same amount or shorter delays reaching zone
    /// boundaries. The exact amount always answers, so only actions can end
    /// the game.
    pub(crate) fn prebisim_delay_challenges(
        &self,
        pos: &TimedPair,
        side: usize,
    ) -> Vec<Challenge<TimedPair, TimedMove>> {
        let (ci, di) = self.instances(side);
        let (ch, df) = self.split(pos, side);
        let mut out = Vec::new();
        for d in cp_delays(&ci.graph, ch) {
            if d.kind == DelayKind::Fractional {
                continue;
            }
            let entering = matches!(d.kind, DelayKind::EnterNode(_));
            let mut options: Vec<CpDelay> = Vec::new();
            options.push(CpDelay {
                amount: d.amount,
                landing: df.apply_delay(d.amount, di.graph.max_constants()),
                kind: d.kind,
            });
            if side == 0 {
                // Defender on the right may take longer entry delays.
                if entering {
                    options.extend(
                        cp_delays(&di.graph, df)
                            .into_iter()
                            .filter(|o| {
                                matches!(o.kind, DelayKind::EnterNode(_)) && o.amount >= d.amount
                            }),
                    );
                }
            } else {
                // Defender on the left may take shorter delays: to zone ends
                // always, and to zone beginnings when the challenge entered
                // a new zone.
                options.extend(
                    end_of_zone_delays(&di.graph, df)
                        .into_iter()
                        .filter(|o| o.amount <= d.amount),
                );
                if entering {
                    options.extend(
                        cp_delays(&di.graph, df)
                            .into_iter()
                            .filter(|o| {
                                matches!(o.kind, DelayKind::EnterNode(_)) && o.amount <= d.amount
                            }),
                    );
                }
            }
            options.sort_by(|a, b| a.amount.cmp(&b.amount));
            options.dedup_by(|a, b| a.amount == b.amount);
            let responses = options
                .into_iter()
                .map(|o| {
                    let hm = self.delay_move(1 - side, df, &o, di.automaton());
                    (hm, self.join(side, d.landing.clone(), o.landing))
                })
                .collect();
            let mv = self.delay_move(side, ch, &d, ci.automaton());
            out.push(Challenge { mv, responses });
        }
        out
    }
}

/// Positions of the time-abstracted games: a node in each zone graph.
pub(crate) type NodePair = (NodeId, NodeId);

pub(crate) struct TaGame<'a> {
    pub(crate) left: &'a Instance,
    pub(crate) right: &'a Instance,
    pub(crate) flavor: TaFlavor,
}

fn render_node(instance: &Instance, id: NodeId) -> String {
    let a = instance.automaton();
    let node = instance.graph.node(id);
    if a.clocks.is_empty() {
        return a.locations[node.location].clone();
    }
    format!(
        "{} [{}]",
        a.locations[node.location],
        node.zone.render(&a.clocks)
    )
}

impl<'a> TaGame<'a> {
    fn instances(&self, side: usize) -> (&Instance, &Instance) {
        if side == 0 {
            (self.left, self.right)
        } else {
            (self.right, self.left)
        }
    }

    fn split(&self, pos: &NodePair, side: usize) -> (NodeId, NodeId) {
        if side == 0 {
            (pos.0, pos.1)
        } else {
            (pos.1, pos.0)
        }
    }

    fn join(&self, side: usize, ch: NodeId, df: NodeId) -> NodePair {
        if side == 0 {
            (ch, df)
        } else {
            (df, ch)
        }
    }

    fn render(&self, pos: &NodePair) -> (String, String) {
        (
            render_node(self.left, pos.0),
            render_node(self.right, pos.1),
        )
    }

    /// All nodes the defender can reach answering action `label`, following
    /// the flavor: the action alone, delays then the action, or delays on
    /// both sides of it.
    fn action_answers(&self, instance: &Instance, from: NodeId, label: &str) -> Vec<NodeId> {
        let a = instance.automaton();
        let starts = match self.flavor {
            TaFlavor::Strong => vec![from],
            _ => instance.graph.delay_successor_nodes(from),
        };
        let mut found = Vec::new();
        for s in starts {
            for &(e, target) in instance.graph.action_successors(s) {
                if a.actions[a.edges[e].action] != label {
                    continue;
                }
                match self.flavor {
                    TaFlavor::Observational => {
                        for t in instance.graph.delay_successor_nodes(target) {
                            if !found.contains(&t) {
                                found.push(t);
                            }
                        }
                    }
                    _ => {
                        if !found.contains(&target) {
                            found.push(target);
                        }
                    }
                }
            }
        }
        found
    }

    pub(crate) fn challenges(
        &self,
        pos: &NodePair,
        side: usize,
    ) -> Vec<Challenge<NodePair, HalfMove>> {
        let (ci, di) = self.instances(side);
        let (ch, df) = self.split(pos, side);
        let ca = ci.automaton();
        let mut out = Vec::new();
        // Action challenges.
        for &(e, target) in ci.graph.action_successors(ch) {
            let label = ca.actions[ca.edges[e].action].clone();
            let mv = HalfMove {
                side: side_name(side).into(),
                kind: "action".into(),
                label: label.clone(),
                from: render_node(ci, ch),
                to: render_node(ci, target),
            };
            let responses = self
                .action_answers(di, df, &label)
                .into_iter()
                .map(|t| {
                    let hm = HalfMove {
                        side: side_name(1 - side).into(),
                        kind: "action".into(),
                        label: label.clone(),
                        from: render_node(di, df),
                        to: render_node(di, t),
                    };
                    (hm, self.join(side, target, t))
                })
                .collect();
            out.push(Challenge { mv, responses });
        }
        // Delay challenges: move to any later node of the chain; the answer
        // is any point of the other chain, staying put included.
        for target in ci.graph.delay_successor_nodes(ch).into_iter().skip(1) {
            let mv = HalfMove {
                side: side_name(side).into(),
                kind: "eps".into(),
                label: "eps".into(),
                from: render_node(ci, ch),
                to: render_node(ci, target),
            };
            let responses = di
                .graph
                .delay_successor_nodes(df)
                .into_iter()
                .map(|t| {
                    let hm = HalfMove {
                        side: side_name(1 - side).into(),
                        kind: "eps".into(),
                        label: "eps".into(),
                        from: render_node(di, df),
                        to: render_node(di, t),
                    };
                    (hm, self.join(side, target, t))
                })
                .collect();
            out.push(Challenge { mv, responses });
        }
        out
    }
}

fn verdict(kind: &str, solved: Solved) -> Verdict {
    Verdict {
        relation: kind.to_string(),
        related: solved.related,
        witness: solved.witness,
        refutation: solved.refutation,
    }
}

/// Timed bisimulation: every action and every relevant delay of either side
/// must be answered on the other, delays by the identical amount.
pub fn cp_bisim(left: &Instance, right: &Instance) -> Verdict {
    let game = TimedGame { left, right };
    let solved = solve_game(
        (left.start.clone(), right.start.clone()),
        |pos| {
            let mut cs = game.action_challenges(pos, 0);
            cs.extend(game.action_challenges(pos, 1));
            cs.extend(game.exact_delay_challenges(pos, 0));
            cs.extend(game.exact_delay_challenges(pos, 1));
            cs
        },
        |pos| game.render(pos),
        |m: &TimedMove| m.hm.clone(),
    );
    verdict(RelationKind::TimedBisim.name(), solved)
}

/// One challenger option of the solved bisimulation game in raw form: the
/// side that moves, the move, and every defender answer with the arena
/// position it leads to.
pub struct CpChallenge {
    pub side: usize,
    pub mv: CpMove,
    pub responses: Vec<(CpMove, usize)>,
}

/// The fully explored and ranked timed bisimulation arena. Position 0 is the
/// pair of start states; `rank[i]` is `None` exactly when the defender can
/// survive forever from position `i`.
pub struct CpArena {
    pub positions: Vec<(CornerState, CornerState)>,
    pub rank: Vec<Option<u32>>,
    pub challenges: Vec<Vec<CpChallenge>>,
}

impl CpArena {
    fn challenge_rank(&self, c: &CpChallenge) -> Option<u32> {
        let mut worst = 0;
        for &(_, j) in &c.responses {
            worst = worst.max(self.rank[j]?);
        }
        Some(worst + 1)
    }

    /// The challenge a winning challenger plays at a ranked position: the
    /// first one with the least rank, matching the principal refutation.
    pub fn principal(&self, position: usize) -> Option<&CpChallenge> {
        self.challenges[position]
            .iter()
            .filter(|c| self.challenge_rank(c).is_some())
            .min_by_key(|c| self.challenge_rank(c).unwrap())
    }
}

/// Builds and ranks the timed bisimulation arena without rendering it, for
/// callers that replay the winning strategy rather than print it.
pub fn cp_bisim_arena(left: &Instance, right: &Instance) -> CpArena {
    let game = TimedGame { left, right };
    let built = build_arena((left.start.clone(), right.start.clone()), |pos| {
        let mut cs = game.action_challenges(pos, 0);
        cs.extend(game.action_challenges(pos, 1));
        cs.extend(game.exact_delay_challenges(pos, 0));
        cs.extend(game.exact_delay_challenges(pos, 1));
        cs
    });
    let challenges = built
        .table
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|c| CpChallenge {
                    side: if c.mv.hm.side == "A" { 0 } else { 1 },
                    mv: c.mv.raw,
                    responses: c
                        .responses
                        .into_iter()
                        .map(|(m, j)| (m.raw, j))
                        .collect(),
                })
                .collect()
        })
        .collect();
    CpArena {
        positions: built.order,
        rank: built.rank,
        challenges,
    }
}

/// Timed simulation: is the left state simulated by the right one? Only the
/// left side is challenged.
pub fn cp_sim(left: &Instance, right: &Instance) -> Verdict {
    let game = TimedGame { left, right };
    let solved = solve_game(
        (left.start.clone(), right.start.clone()),
        |pos| {
            let mut cs = game.action_challenges(pos, 0);
            cs.extend(game.exact_delay_challenges(pos, 0));
            cs
        },
        |pos| game.render(pos),
        |m: &TimedMove| m.hm.clone(),
    );
    verdict(RelationKind::TimedSim.name(), solved)
}

fn flip_sides(mut v: Verdict) -> Verdict {
    let flip = |hm: &mut HalfMove| {
        hm.side = if hm.side == "A" { "B".into() } else { "A".into() };
    };
    if let Some(steps) = v.refutation.as_mut() {
        for s in steps {
            flip(&mut s.challenge);
            if let Some(r) = s.response.as_mut() {
                flip(r);
            }
        }
    }
    if let Some(w) = v.witness.as_mut() {
        for pair in w.iter_mut() {
            std::mem::swap(&mut pair.0, &mut pair.1);
        }
    }
    v
}

fn sim_equiv(kind: &str, forward: Verdict, backward: Verdict) -> Verdict {
    let backward = flip_sides(backward);
    if forward.related && backward.related {
        let back: std::collections::HashSet<(String, String)> =
            backward.witness.unwrap_or_default().into_iter().collect();
        let witness = forward
            .witness
            .unwrap_or_default()
            .into_iter()
            .filter(|p| back.contains(p))
            .collect();
        Verdict {
            relation: kind.to_string(),
            related: true,
            witness: Some(witness),
            refutation: None,
        }
    } else {
        let refutation = if !forward.related {
            forward.refutation
        } else {
            backward.refutation
        };
        Verdict {
            relation: kind.to_string(),
            related: false,
            witness: None,
            refutation,
        }
    }
}

/// Timed simulation equivalence: simulation in both directions, decided by
/// two independent games.
pub fn cp_sim_equiv(left: &Instance, right: &Instance) -> Verdict {
    sim_equiv(
        RelationKind::TimedSimEquiv.name(),
        cp_sim(left, right),
        cp_sim(right, left),
    )
}

/// Timed performance prebisimulation: is the left state at least as fast as
/// the right one? Actions are matched exactly; delay obligations are skewed
/// so the right side may answer with longer delays and the left side with
/// shorter ones.
pub fn cp_prebisim(left: &Instance, right: &Instance) -> Verdict {
    let game = TimedGame { left, right };
    let solved = solve_game(
        (left.start.clone(), right.start.clone()),
        |pos| {
            let mut cs = game.action_challenges(pos, 0);
            cs.extend(game.action_challenges(pos, 1));
            cs.extend(game.prebisim_delay_challenges(pos, 0));
            cs.extend(game.prebisim_delay_challenges(pos, 1));
            cs
        },
        |pos| game.render(pos),
        |m: &TimedMove| m.hm.clone(),
    );
    verdict(RelationKind::Prebisim.name(), solved)
}

fn ta_root(left: &Instance, right: &Instance) -> NodePair {
    (left.graph.initial_node(), right.graph.initial_node())
}

fn ta_kind_name(flavor: TaFlavor, bisim: bool) -> &'static str {
    match (flavor, bisim) {
        (TaFlavor::Strong, true) => RelationKind::TaBisim.name(),
        (TaFlavor::Delay, true) => RelationKind::TaDelayBisim.name(),
        (TaFlavor::Observational, true) => RelationKind::TaObsBisim.name(),
        (TaFlavor::Strong, false) => "ta-sim",
        (TaFlavor::Delay, false) => "ta-delay-sim",
        (TaFlavor::Observational, false) => "ta-obs-sim",
    }
}

/// Time-abstracted bisimulation over zone graph nodes. Action challenges are
/// answered per flavor; delay challenges move along the chain and are
/// answered anywhere on the other chain, staying put included.
pub fn ta_bisim(left: &Instance, right: &Instance, flavor: TaFlavor) -> Verdict {
    let game = TaGame {
        left,
        right,
        flavor,
    };
    let solved = solve_game(
        ta_root(left, right),
        |pos| {
            let mut cs = game.challenges(pos, 0);
            cs.extend(game.challenges(pos, 1));
            cs
        },
        |pos| game.render(pos),
        HalfMove::clone,
    );
    verdict(ta_kind_name(flavor, true), solved)
}

/// Directional time-abstracted simulation: the left node is challenged, the
/// right one answers per flavor.
pub fn ta_sim(left: &Instance, right: &Instance, flavor: TaFlavor) -> Verdict {
    let game = TaGame {
        left,
        right,
        flavor,
    };
    let solved = solve_game(
        ta_root(left, right),
        |pos| game.challenges(pos, 0),
        |pos| game.render(pos),
        HalfMove::clone,
    );
    verdict(ta_kind_name(flavor, false), solved)
}

/// Time-abstracted simulation equivalence per flavor: both directions.
pub fn ta_sim_equiv(left: &Instance, right: &Instance, flavor: TaFlavor) -> Verdict {
    let kind = match flavor {
        TaFlavor::Strong => RelationKind::TaSimEquiv,
        TaFlavor::Delay => RelationKind::TaDelaySimEquiv,
        TaFlavor::Observational => RelationKind::TaObsSimEquiv,
    };
    sim_equiv(
        kind.name(),
        ta_sim(left, right, flavor),
        ta_sim(right, left, flavor),
    )
}

/// Dispatch by kind. Directional kinds read left to right.
pub fn check(kind: RelationKind, left: &Instance, right: &Instance) -> Verdict {
    match kind {
        RelationKind::TimedBisim => cp_bisim(left, right),
        RelationKind::TimedSim => cp_sim(left, right),
        RelationKind::TimedSimEquiv => cp_sim_equiv(left, right),
        RelationKind::Prebisim => cp_prebisim(left, right),
        RelationKind::TaBisim => ta_bisim(left, right, TaFlavor::Strong),
        RelationKind::TaDelayBisim => ta_bisim(left, right, TaFlavor::Delay),
        RelationKind::TaObsBisim => ta_bisim(left, right, TaFlavor::Observational),
        RelationKind::TaSimEquiv => ta_sim_equiv(left, right, TaFlavor::Strong),
        RelationKind::TaDelaySimEquiv => ta_sim_equiv(left, right, TaFlavor::Delay),
        RelationKind::TaObsSimEquiv => ta_sim_equiv(left, right, TaFlavor::Observational),
    }
}

/// Verdicts for every kind, ordered along the coarsening chain, with the
/// containments between them checked. A violation means a bug in a solver,
/// never bad input.
#[derive(Clone, Debug, Serialize)]
pub struct HierarchyReport {
    pub verdicts: Vec<(String, bool)>,
    pub violations: Vec<String>,
}

impl HierarchyReport {
    pub fn related(&self, kind: RelationKind) -> bool {
        self.verdicts
            .iter()
            .find(|(name, _)| name == kind.name())
            .map(|&(_, r)| r)
            .expect("report covers every kind")
    }
}

/// Runs every relation on the pair and checks that each positive verdict
/// propagates along the known containments (finer relations imply coarser
/// ones).
pub fn check_hierarchy(left: &Instance, right: &Instance) -> HierarchyReport {
    let order = [
        RelationKind::TimedBisim,
        RelationKind::Prebisim,
        RelationKind::TaBisim,
        RelationKind::TaDelayBisim,
        RelationKind::TaObsBisim,
        RelationKind::TimedSim,
        RelationKind::TimedSimEquiv,
        RelationKind::TaSimEquiv,
        RelationKind::TaDelaySimEquiv,
        RelationKind::TaObsSimEquiv,
    ];
    let mut results: HashMap<RelationKind, bool> = HashMap::new();
    for kind in order {
        results.insert(kind, check(kind, left, right).related);
    }
    let arrows = [
        (RelationKind::TimedBisim, RelationKind::Prebisim),
        (RelationKind::Prebisim, RelationKind::TaBisim),
        (RelationKind::TaBisim, RelationKind::TaDelayBisim),
        (RelationKind::TaDelayBisim, RelationKind::TaObsBisim),
        (RelationKind::TimedBisim, RelationKind::TimedSim),
        (RelationKind::TimedBisim, RelationKind::TimedSimEquiv),
        (RelationKind::TimedSimEquiv, RelationKind::TimedSim),
        (RelationKind::TimedSimEquiv, RelationKind::TaSimEquiv),
        (RelationKind::TaSimEquiv, RelationKind::TaDelaySimEquiv),
        (RelationKind::TaDelaySimEquiv, RelationKind::TaObsSimEquiv),
        (RelationKind::TaBisim, RelationKind::TaSimEquiv),
        (RelationKind::TaDelayBisim, RelationKind::TaDelaySimEquiv),
        (RelationKind::TaObsBisim, RelationKind::TaObsSimEquiv),
    ];
    let mut violations = Vec::new();
    for (fine, coarse) in arrows {
        if results[&fine] && !results[&coarse] {
            violations.push(format!(
                "{} holds but {} does not",
                fine.name(),
                coarse.name()
            ));
        }
    }
    HierarchyReport {
        verdicts: order
            .iter()
            .map(|k| (k.name().to_string(), results[k]))
            .collect(),
        violations,
    }
}
