//! Pre-stable zone graphs of timed automata.
//!
//! The graph of an automaton relative to a designated start state partitions
//! each reachable location's valuations into convex zones such that every
//! zone reacts uniformly to every guard and to every successor zone: a zone
//! either lies entirely inside the predecessor set of a successor or misses
//! it entirely (pre-stability). Nodes of one location are pairwise disjoint,
//! delay successors of a node form a single chain, and edges carry either an
//! action label or the silent delay step.

use crate::automaton::{MaxConstants, TimedAutomaton, TimedState};
use crate::zone::Zone;
use num_integer::Integer;
use std::collections::VecDeque;

/// Index of a node in its zone graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

/// A location paired with one cell of its zone partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub location: usize,
    pub zone: Zone,
}

/// Zone graph of one automaton from one designated start state.
#[derive(Clone, Debug)]
pub struct ZoneGraph {
    automaton: TimedAutomaton,
    max_constants: MaxConstants,
    scale: i64,
    start: TimedState,
    nodes: Vec<Node>,
    initial: NodeId,
    /// Per node: target of each automaton edge that the node satisfies,
    /// as `(edge index, target node)`.
    action_edges: Vec<Vec<(usize, NodeId)>>,
    /// Per node: the next node in its delay chain, if any.
    delay_next: Vec<Option<NodeId>>,
}

#[derive(Debug, thiserror::Error)]
pub enum ZoneGraphError {
    #[error("valuation has {0} clocks, automaton has {1}")]
    Arity(usize, usize),
    #[error("start location index {0} out of range")]
    BadLocation(usize),
    #[error("state lies outside every node of the graph")]
    NoContainingNode,
}

impl ZoneGraph {
    /// Builds the pre-stable zone graph covering every state reachable from
    /// `start`.
    pub fn build(automaton: &TimedAutomaton, start: &TimedState) -> Result<ZoneGraph, ZoneGraphError> {
        if start.valuation.len() != automaton.clock_count() {
            return Err(ZoneGraphError::Arity(
                start.valuation.len(),
                automaton.clock_count(),
            ));
        }
        if start.location >= automaton.locations.len() {
            return Err(ZoneGraphError::BadLocation(start.location));
        }
        let max_constants = automaton.max_constants();
        let scale = start
            .valuation
            .iter()
            .fold(1i64, |acc, v| acc.lcm(v.denom()));
        let mut builder = Builder {
            automaton,
            max_constants: &max_constants,
            scale,
            covers: vec![Vec::new(); automaton.locations.len()],
        };
        builder.forward_analysis(start);
        builder.stabilise();
        let (nodes, initial, action_edges, delay_next) = builder.finish(start);
        Ok(ZoneGraph {
            automaton: automaton.clone(),
            max_constants,
            scale,
            start: start.clone(),
            nodes,
            initial,
            action_edges,
            delay_next,
        })
    }

    pub fn automaton(&self) -> &TimedAutomaton {
        &self.automaton
    }

    pub fn max_constants(&self) -> &MaxConstants {
        &self.max_constants
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn start_state(&self) -> &TimedState {
        &self.start
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Node)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId(i), n))
    }

    /// Node of the designated start state.
    pub fn initial_node(&self) -> NodeId {
        self.initial
    }

    /// The unique node containing `state`, if the graph covers it.
    pub fn node_of(&self, state: &TimedState) -> Result<NodeId, ZoneGraphError> {
        if state.valuation.len() != self.automaton.clock_count() {
            return Err(ZoneGraphError::Arity(
                state.valuation.len(),
                self.automaton.clock_count(),
            ));
        }
        self.nodes
            .iter()
            .position(|n| n.location == state.location && n.zone.contains(&state.valuation))
            .map(NodeId)
            .ok_or(ZoneGraphError::NoContainingNode)
    }

    /// Action successors of a node: `(edge index, target node)` pairs.
    pub fn action_successors(&self, node: NodeId) -> &[(usize, NodeId)] {
        &self.action_edges[node.0]
    }

    /// Immediate delay successor, when the node is not last in its chain.
    pub fn delay_next(&self, node: NodeId) -> Option<NodeId> {
        self.delay_next[node.0]
    }

    /// The delay chain starting at `node` (the node itself first, then in
    /// increasing time order).
    pub fn delay_successor_nodes(&self, node: NodeId) -> Vec<NodeId> {
        let mut chain = vec![node];
        let mut cur = node;
        while let Some(next) = self.delay_next[cur.0] {
            chain.push(next);
            cur = next;
        }
        chain
    }
}

struct Builder<'a> {
    automaton: &'a TimedAutomaton,
    max_constants: &'a MaxConstants,
    scale: i64,
    covers: Vec<Vec<Zone>>,
}

impl<'a> Builder<'a> {
    fn maxima(&self, location: usize) -> Vec<i64> {
        self.max_constants.row(location).to_vec()
    }

    /// Adds the part of `zone` not already covered at `location`; returns
    /// whether anything changed. Keeps per-location zones disjoint by
    /// subtracting the existing cover, and coalesces cells whose union stays
    /// convex and uniform with respect to the location's outgoing guards.
    fn add_cover(&mut self, location: usize, zone: Zone) -> bool {
        if zone.is_empty() {
            return false;
        }
        let mut fresh = vec![zone];
        for existing in &self.covers[location] {
            let mut next = Vec::new();
            for piece in fresh {
                next.extend(piece.subtract(existing));
            }
            fresh = next;
            if fresh.is_empty() {
                return false;
            }
        }
        self.covers[location].extend(fresh);
        true
    }

    /// Splits every zone of `location` by the canonical decomposition of the
    /// guards on its outgoing edges; returns whether anything split.
    fn decompose(&mut self, location: usize) -> bool {
        let mut atoms = Vec::new();
        for e in &self.automaton.edges {
            if e.from == location {
                atoms.extend(e.guard.iter().copied());
            }
        }
        let mut changed = false;
        let mut next = Vec::new();
        for zone in std::mem::take(&mut self.covers[location]) {
            let cells = zone.split_by_guard(&atoms);
            if cells.len() != 1 {
                changed = true;
            }
            next.extend(cells);
        }
        self.covers[location] = next;
        changed
    }

    /// Merges same-location cells whose union is convex and which agree on
    /// every outgoing guard atom, so later decomposition cannot re-split the
    /// merged cell.
    fn coalesce(&mut self, location: usize) {
        let mut atoms = Vec::new();
        for e in &self.automaton.edges {
            if e.from == location {
                atoms.extend(e.guard.iter().copied());
            }
        }
        // Satisfied / violated flag per atom; `None` when the cell straddles
        // the atom, in which case it must not be merged.
        let signature = |z: &Zone| -> Option<Vec<bool>> {
            atoms
                .iter()
                .map(|a| {
                    let inside = z.constrain_by(a);
                    if inside == *z {
                        Some(true)
                    } else if inside.is_empty() {
                        Some(false)
                    } else {
                        None
                    }
                })
                .collect()
        };
        // Merging two cells with the same signature yields a cell with that
        // signature again, so the cache stays valid across merges.
        let cover = &mut self.covers[location];
        let mut sigs: Vec<Option<Vec<bool>>> = cover.iter().map(signature).collect();
        let mut merged = true;
        while merged {
            merged = false;
            let mut i = 0;
            while i < cover.len() {
                if sigs[i].is_none() {
                    i += 1;
                    continue;
                }
                let mut j = i + 1;
                while j < cover.len() {
                    if sigs[j] == sigs[i] {
                        if let Some(union) = cover[i].convex_merge(&cover[j]) {
                            cover[i] = union;
                            cover.swap_remove(j);
                            sigs.swap_remove(j);
                            merged = true;
                            continue;
                        }
                    }
                    j += 1;
                }
                i += 1;
            }
        }
    }

    /// Forward analysis: seeds the start location with the future of the
    /// designated valuation and propagates through delays and edges, keeping
    /// each location decomposed by its outgoing guards and abstracted by its
    /// maximum constants.
    fn forward_analysis(&mut self, start: &TimedState) {
        let seed = Zone::point(&start.valuation, self.scale)
            .up()
            .extrapolate(&self.maxima(start.location));
        self.add_cover(start.location, seed);
        let mut queue: VecDeque<usize> = VecDeque::new();
        queue.push_back(start.location);
        let mut guard_rounds = 0usize;
        while let Some(location) = queue.pop_front() {
            guard_rounds += 1;
            assert!(
                guard_rounds < 100_000,
                "zone graph forward analysis failed to converge"
            );
            self.decompose(location);
            // Close the location's cover under future: the future of each
            // cell, decomposed and abstracted, may add new cells.
            let mut future_changed = true;
            while future_changed {
                future_changed = false;
                let cells = self.covers[location].clone();
                for cell in cells {
                    let maxima = self.maxima(location);
                    let up = cell.up().extrapolate(&maxima);
                    for piece in up.split_by_guard(&self.location_atoms(location)) {
                        let piece = piece.extrapolate(&maxima);
                        if self.add_cover(location, piece) {
                            future_changed = true;
                        }
                    }
                }
                if future_changed {
                    self.decompose(location);
                }
            }
            self.coalesce(location);
            // Propagate along outgoing edges.
            for (idx, e) in self.automaton.edges.iter().enumerate() {
                if e.from != location {
                    continue;
                }
                let _ = idx;
                let mut target_changed = false;
                let cells = self.covers[location].clone();
                for cell in cells {
                    let image = cell
                        .up()
                        .edge_image(&e.guard, &e.resets)
                        .extrapolate(&self.maxima(e.to));
                    if self.add_cover(e.to, image) {
                        target_changed = true;
                    }
                }
                if target_changed && !queue.contains(&e.to) {
                    queue.push_back(e.to);
                }
            }
        }
    }

    fn location_atoms(&self, location: usize) -> Vec<crate::automaton::ClockConstraint> {
        self.automaton
            .edges
            .iter()
            .filter(|e| e.from == location)
            .flat_map(|e| e.guard.iter().copied())
            .collect()
    }

    /// Pre-stability fixpoint: splits any zone that partially overlaps the
    /// predecessor set of a zone it can reach by a delay or an edge.
    ///
    /// Runs a worklist of zones whose predecessor sets still have to sweep
    /// the cover. Splitting a cell aligns it with the sweeping predecessor
    /// set for good: later splits only refine the cell further, so each
    /// zone has to be swept exactly once, and the parts it leaves behind
    /// queue their own sweeps. Entries whose zone has since been split are
    /// skipped; the parts carry the obligation.
    fn stabilise(&mut self) {
        let automaton = self.automaton;
        let mut queue: VecDeque<(usize, Zone)> = VecDeque::new();
        for (location, cover) in self.covers.iter().enumerate() {
            for zone in cover {
                queue.push_back((location, zone.clone()));
            }
        }
        let mut processed = 0usize;
        while let Some((location, zone)) = queue.pop_front() {
            processed += 1;
            assert!(
                processed < 1_000_000,
                "pre-stability fixpoint failed to converge"
            );
            if !self.covers[location].contains(&zone) {
                continue;
            }
            let preds = zone.delay_preds();
            self.split_overlapping(location, &preds, &mut queue);
            for e in automaton.edges.iter().filter(|e| e.to == location) {
                let preds = zone.edge_preds(&e.guard, &e.resets);
                if !preds.is_empty() {
                    self.split_overlapping(e.from, &preds, &mut queue);
                }
            }
        }
    }

    /// Splits every cell of `location` that lies partially inside `preds`.
    /// Pieces land at the end of the cover and are re-examined in place, but
    /// never split twice against the same predecessor set: one piece lies
    /// inside it and the rest are disjoint from it. New pieces are queued
    /// for their own predecessor sweeps.
    fn split_overlapping(
        &mut self,
        location: usize,
        preds: &Zone,
        queue: &mut VecDeque<(usize, Zone)>,
    ) {
        let mut i = 0;
        while i < self.covers[location].len() {
            let z = &self.covers[location][i];
            if !z.intersects(preds) || preds.includes(z) {
                i += 1;
                continue;
            }
            let (parts, _) = z.split_prestable(preds);
            self.covers[location].swap_remove(i);
            for part in parts {
                queue.push_back((location, part.clone()));
                self.covers[location].push(part);
            }
        }
    }

    /// Orders nodes deterministically, derives action edges and delay
    /// chains, and locates the start node.
    fn finish(self, start: &TimedState) -> (Vec<Node>, NodeId, Vec<Vec<(usize, NodeId)>>, Vec<Option<NodeId>>) {
        let mut nodes: Vec<Node> = self
            .covers
            .iter()
            .enumerate()
            .flat_map(|(location, zones)| {
                zones.iter().map(move |z| Node {
                    location,
                    zone: z.clone(),
                })
            })
            .collect();
        nodes.sort_by(|a, b| {
            a.location
                .cmp(&b.location)
                .then_with(|| a.zone.cmp(&b.zone))
        });
        let initial = nodes
            .iter()
            .position(|n| n.location == start.location && n.zone.contains(&start.valuation))
            .map(NodeId)
            .expect("the start state is covered by construction");

        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); self.automaton.locations.len()];
        for (i, n) in nodes.iter().enumerate() {
            buckets[n.location].push(i);
        }
        let preds: Vec<Zone> = nodes.iter().map(|n| n.zone.delay_preds()).collect();

        let mut action_edges = vec![Vec::new(); nodes.len()];
        for (i, node) in nodes.iter().enumerate() {
            for (idx, e) in self.automaton.edges.iter().enumerate() {
                if e.from != node.location {
                    continue;
                }
                // Uniform satisfaction: after decomposition the zone either
                // satisfies the guard entirely or misses it entirely.
                let inside = e
                    .guard
                    .iter()
                    .fold(node.zone.clone(), |z, c| z.constrain_by(c));
                if inside != node.zone {
                    continue;
                }
                let image = node.zone.reset(&e.resets);
                let target = buckets[e.to]
                    .iter()
                    .copied()
                    .find(|&j| nodes[j].zone.includes(&image))
                    .expect("pre-stability confines each edge image to one node");
                action_edges[i].push((idx, NodeId(target)));
            }
        }

        let mut delay_next: Vec<Option<NodeId>> = vec![None; nodes.len()];
        for (i, node) in nodes.iter().enumerate() {
            // Delay-reachable sibling zones, ordered by entry: pre-stability
            // makes reachability an all-or-nothing inclusion in the past of
            // the sibling.
            let mut reach: Vec<usize> = buckets[node.location]
                .iter()
                .copied()
                .filter(|&j| j != i && preds[j].includes(&node.zone))
                .collect();
            reach.sort_by(|&a, &b| {
                let a_before_b = preds[b].includes(&nodes[a].zone);
                let b_before_a = preds[a].includes(&nodes[b].zone);
                match (a_before_b, b_before_a) {
                    (true, false) => std::cmp::Ordering::Less,
                    (false, true) => std::cmp::Ordering::Greater,
                    _ => panic!("delay successors do not form a chain"),
                }
            });
            delay_next[i] = reach.first().map(|&j| NodeId(j));
        }

        (nodes, initial, action_edges, delay_next)
    }
}

impl ZoneGraph {
    /// Checks every structural invariant of the graph; returns the first
    /// violation found.
    ///
    /// Invariants: per-location zones are non-empty and pairwise disjoint;
    /// every zone reacts uniformly to every outgoing guard; the cover is
    /// closed under delays and edges; zones are pre-stable against delay and
    /// edge predecessors; recorded action edges match a recomputation from
    /// the zone algebra; delay successors form a single chain.
    pub fn audit(&self) -> Result<(), String> {
        // Node indices grouped by location, ascending.
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); self.automaton.locations.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            buckets[n.location].push(i);
        }
        // Delay predecessor sets, hoisted: several checks sweep each of them
        // over a whole location.
        let delay_preds: Vec<Zone> = self.nodes.iter().map(|n| n.zone.delay_preds()).collect();
        for (i, a) in self.nodes.iter().enumerate() {
            if a.zone.is_empty() {
                return Err(format!("node {i} has an empty zone"));
            }
        }
        for bucket in &buckets {
            for (k, &i) in bucket.iter().enumerate() {
                for &j in &bucket[k + 1..] {
                    if self.nodes[i].zone.intersects(&self.nodes[j].zone) {
                        return Err(format!("nodes {i} and {j} overlap"));
                    }
                }
            }
        }
        for (i, node) in self.nodes.iter().enumerate() {
            for e in self.automaton.edges.iter().filter(|e| e.from == node.location) {
                for atom in &e.guard {
                    let inside = node.zone.constrain_by(atom);
                    if !(inside == node.zone || inside.is_empty()) {
                        return Err(format!("node {i} straddles a guard conjunct"));
                    }
                }
            }
        }
        // Cover closure under delay. Siblings on the recorded delay chain are
        // subtracted first: that peels the future front to back and keeps the
        // remainder from fragmenting. The order is speed only; any order
        // decides emptiness the same way, so a wrong chain cannot mask an
        // escape.
        for (i, node) in self.nodes.iter().enumerate() {
            let mut order: Vec<usize> = vec![i];
            let mut cur = NodeId(i);
            while let Some(next) = self.delay_next[cur.0] {
                if order.len() > self.nodes.len() {
                    break;
                }
                order.push(next.0);
                cur = next;
            }
            for &j in &buckets[node.location] {
                if !order.contains(&j) {
                    order.push(j);
                }
            }
            let mut rest = vec![node.zone.up()];
            for &j in &order {
                if rest.is_empty() {
                    break;
                }
                let mut next = Vec::new();
                for piece in rest {
                    next.extend(piece.subtract(&self.nodes[j].zone));
                }
                rest = next;
            }
            if !rest.is_empty() {
                return Err(format!("future of node {i} escapes the cover"));
            }
        }
        // Pre-stability.
        for bucket in &buckets {
            for &i in bucket {
                for &j in bucket {
                    if i == j {
                        continue;
                    }
                    let preds = &delay_preds[j];
                    let a = &self.nodes[i].zone;
                    if a.intersects(preds) && !preds.includes(a) {
                        return Err(format!("node {i} is delay-unstable against node {j}"));
                    }
                }
            }
        }
        for e in &self.automaton.edges {
            for &j in &buckets[e.to] {
                let preds = self.nodes[j].zone.edge_preds(&e.guard, &e.resets);
                if preds.is_empty() {
                    continue;
                }
                for &i in &buckets[e.from] {
                    let source = &self.nodes[i].zone;
                    if source.intersects(&preds) && !preds.includes(source) {
                        return Err(format!(
                            "node {i} is edge-unstable against node {j}"
                        ));
                    }
                }
            }
        }
        // Action edges match a recomputation.
        for (i, node) in self.nodes.iter().enumerate() {
            let mut expect = Vec::new();
            for (idx, e) in self.automaton.edges.iter().enumerate() {
                if e.from != node.location {
                    continue;
                }
                let inside = e
                    .guard
                    .iter()
                    .fold(node.zone.clone(), |z, c| z.constrain_by(c));
                if inside != node.zone {
                    continue;
                }
                let image = node.zone.reset(&e.resets);
                let targets: Vec<usize> = buckets[e.to]
                    .iter()
                    .copied()
                    .filter(|&j| self.nodes[j].zone.includes(&image))
                    .collect();
                if targets.len() != 1 {
                    return Err(format!(
                        "edge image of node {i} lies in {} nodes",
                        targets.len()
                    ));
                }
                expect.push((idx, NodeId(targets[0])));
            }
            if expect != self.action_edges[i] {
                return Err(format!("recorded action edges of node {i} are stale"));
            }
        }
        // Delay chains are linear and complete.
        for (i, node) in self.nodes.iter().enumerate() {
            let mut tail: Vec<NodeId> = Vec::new();
            let mut cur = NodeId(i);
            while let Some(next) = self.delay_next[cur.0] {
                if tail.len() > self.nodes.len() {
                    return Err(format!("delay chain of node {i} does not terminate"));
                }
                tail.push(next);
                cur = next;
            }
            let mut reach: Vec<NodeId> = buckets[node.location]
                .iter()
                .copied()
                .filter(|&j| j != i && delay_preds[j].includes(&node.zone))
                .map(NodeId)
                .collect();
            reach.sort();
            tail.sort();
            if reach != tail {
                return Err(format!("delay chain of node {i} misses a successor"));
            }
        }
        Ok(())
    }
}
