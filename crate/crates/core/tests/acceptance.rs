//! The acceptance gate. Each test is one criterion and prints exactly one
//! pass/fail line through the harness; together they exercise the worked
//! examples, the randomised invariant suites, the oracle cross-checks and
//! the game/relation agreement on the full kind list.

use std::time::Instant;

use timedrel::game::{correspondence, hierarchy_audit, outcome_matches_relation, play};
use timedrel::formula::{
    evaluate, parse_formula, render_formula, synthesize_distinguishing, verify_distinguishing,
};
use timedrel::oracle::{grid_timed_bisim, region_bisim, RegionFlavor};
use timedrel::relations::{check, check_hierarchy, cp_bisim, cp_prebisim, ta_bisim};
use timedrel::samples::{random_automaton, random_pair, rng, SampleLimits};
use timedrel::zone::Zone;
use timedrel::{
    ClockConstraint, CmpOp, Instance, Rat, RelationKind, TaFlavor, TimedAutomaton, TimedState,
    ZoneGraph,
};

fn automaton(text: &str) -> TimedAutomaton {
    TimedAutomaton::parse(text).unwrap()
}

fn instance(a: &TimedAutomaton) -> Instance {
    Instance::new(a, &a.initial_state()).unwrap()
}

/// One location, one self-contained edge guarded by `clock = constant`.
fn one_edge(clock: &str, constant: i64) -> TimedAutomaton {
    automaton(&format!(
        r#"{{
            "clocks": ["{clock}"],
            "actions": ["a"],
            "locations": ["l0", "l1"],
            "initial": "l0",
            "edges": [
                {{"from": "l0", "to": "l1", "action": "a",
                 "guard": [{{"clock": "{clock}", "op": "=", "const": {constant}}}],
                 "resets": []}}
            ]
        }}"#
    ))
}

#[test]
fn criterion_01_the_two_versus_five_pair_gets_every_verdict_right() {
    let started = Instant::now();
    let a = one_edge("x", 2);
    let b = one_edge("y", 5);
    let ia = instance(&a);
    let ib = instance(&b);

    assert!(
        cp_prebisim(&ia, &ib).related,
        "the x=2 automaton is at least as fast"
    );
    assert!(!cp_bisim(&ia, &ib).related, "not timed bisimilar");
    assert!(
        ta_bisim(&ia, &ib, TaFlavor::Strong).related,
        "strongly time-abstracted bisimilar"
    );
    let report = check_hierarchy(&ia, &ib);
    assert!(
        report.violations.is_empty(),
        "hierarchy must be monotone: {:?}",
        report.violations
    );
    assert!(
        started.elapsed().as_secs_f64() < 1.0,
        "the battery must finish within a second"
    );
}

#[test]
fn criterion_02_guard_splitting_reproduces_the_four_cell_example() {
    // z = (x >= 0 && y >= 0), g = (x <= 2 && y > 1).
    let z = Zone::full(2, 1);
    let g = [
        ClockConstraint {
            clock: 0,
            op: CmpOp::Le,
            constant: 2,
        },
        ClockConstraint {
            clock: 1,
            op: CmpOp::Gt,
            constant: 1,
        },
    ];
    let cells = z.split_by_guard(&g);
    let atom = |clock, op, constant| ClockConstraint {
        clock,
        op,
        constant,
    };
    let expected = [
        // x <= 2 && y <= 1
        z.constrain_by(&atom(0, CmpOp::Le, 2))
            .constrain_by(&atom(1, CmpOp::Le, 1)),
        // x > 2 && y <= 1
        z.constrain_by(&atom(0, CmpOp::Gt, 2))
            .constrain_by(&atom(1, CmpOp::Le, 1)),
        // x <= 2 && y > 1
        z.constrain_by(&atom(0, CmpOp::Le, 2))
            .constrain_by(&atom(1, CmpOp::Gt, 1)),
        // x > 2 && y > 1
        z.constrain_by(&atom(0, CmpOp::Gt, 2))
            .constrain_by(&atom(1, CmpOp::Gt, 1)),
    ];
    assert_eq!(cells.len(), 4, "exactly four cells");
    for want in &expected {
        assert_eq!(
            cells.iter().filter(|c| *c == want).count(),
            1,
            "expected cell missing from the decomposition: {}",
            want.render(&["x".into(), "y".into()])
        );
    }
}

#[test]
fn criterion_03_the_worked_tlts_trace_is_reproduced_exactly() {
    let a = automaton(
        r#"{
            "clocks": ["x", "y"],
            "actions": ["a"],
            "locations": ["l", "lp"],
            "initial": "l",
            "edges": [
                {"from": "l", "to": "lp", "action": "a",
                 "guard": [{"clock": "x", "op": "<", "const": 1},
                           {"clock": "y", "op": ">", "const": 2}],
                 "resets": ["y"]}
            ]
        }"#,
    );
    let start = TimedState {
        location: 0,
        valuation: vec![Rat::new(3, 10), Rat::new(8, 5)],
    };
    let mid = a.delay(&start, Rat::new(1, 2)).unwrap();
    assert_eq!(mid.location, 0);
    assert_eq!(mid.valuation, vec![Rat::new(4, 5), Rat::new(21, 10)]);
    let end = a.fire(&mid, 0).unwrap();
    assert_eq!(end.location, 1);
    assert_eq!(end.valuation, vec![Rat::new(4, 5), Rat::from_integer(0)]);
}

#[test]
fn criterion_04_zone_graph_invariants_hold_on_200_random_instances() {
    let limits = SampleLimits::desk();
    let mut r = rng(104);
    for i in 0..200 {
        let a = random_automaton(&mut r, &limits);
        let g = ZoneGraph::build(&a, &a.initial_state()).unwrap();
        if let Err(why) = g.audit() {
            panic!("instance {i} violates a zone graph invariant: {why}\n{}", a.render());
        }
    }
}

#[test]
fn criterion_05_strong_abstracted_bisim_matches_the_region_oracle() {
    let limits = SampleLimits::default();
    let mut r = rng(105);
    let mut agree_related = 0;
    for i in 0..100 {
        let (a, b, how) = random_pair(&mut r, &limits);
        let ia = instance(&a);
        let ib = instance(&b);
        let ours = ta_bisim(&ia, &ib, TaFlavor::Strong).related;
        let oracle = region_bisim(
            &a,
            &a.initial_state(),
            &b,
            &b.initial_state(),
            RegionFlavor::Strong,
        );
        assert_eq!(
            ours, oracle,
            "pair {i} ({how}) disagrees with the region construction:\n{}\n--\n{}",
            a.render(),
            b.render()
        );
        if ours {
            agree_related += 1;
        }
    }
    assert!(
        agree_related > 0 && agree_related < 100,
        "the sample must exercise both verdicts, got {agree_related} related"
    );
}

#[test]
fn criterion_06_timed_bisim_agrees_with_the_half_step_grid() {
    // One clock, constants at most 4: the half step grid out to depth 12 is
    // fine enough to agree exactly.
    let limits = SampleLimits::tiny_one_clock();
    let mut r = rng(106);
    for i in 0..100 {
        let (a, b, how) = random_pair(&mut r, &limits);
        let ours = cp_bisim(&instance(&a), &instance(&b)).related;
        let grid = grid_timed_bisim(
            &a,
            &a.initial_state(),
            &b,
            &b.initial_state(),
            Rat::new(1, 2),
            12,
        );
        assert_eq!(
            ours, grid,
            "pair {i} ({how}) disagrees with the grid:\n{}\n--\n{}",
            a.render(),
            b.render()
        );
    }
    // Two clocks: the grid is only refutation sound, so every grid
    // refutation must still be a refutation for us.
    let limits = SampleLimits::games();
    for i in 0..60 {
        let (a, b, how) = random_pair(&mut r, &limits);
        let grid = grid_timed_bisim(
            &a,
            &a.initial_state(),
            &b,
            &b.initial_state(),
            Rat::new(1, 2),
            12,
        );
        if !grid {
            let ours = cp_bisim(&instance(&a), &instance(&b)).related;
            assert!(
                !ours,
                "pair {i} ({how}): grid refutes but we relate:\n{}\n--\n{}",
                a.render(),
                b.render()
            );
        }
    }
}

#[test]
fn criterion_07_verdicts_are_monotone_across_100_random_pairs() {
    let limits = SampleLimits::games();
    let mut r = rng(107);
    for i in 0..100 {
        let (a, b, how) = random_pair(&mut r, &limits);
        let report = check_hierarchy(&instance(&a), &instance(&b));
        assert!(
            report.violations.is_empty(),
            "pair {i} ({how}) breaks the containment chain: {:?}\n{}\n--\n{}",
            report.violations,
            a.render(),
            b.render()
        );
    }
}

#[test]
fn criterion_08_games_and_relation_checks_agree_on_every_kind() {
    let limits = SampleLimits::games();
    let mut r = rng(108);
    let mut pairs = Vec::new();
    for _ in 0..30 {
        let (a, b, _) = random_pair(&mut r, &limits);
        pairs.push((instance(&a), instance(&b)));
    }
    for (i, (ia, ib)) in pairs.iter().enumerate() {
        for kind in RelationKind::ALL {
            let outcome = play(&correspondence(kind), ia, ib).unwrap();
            let related = check(kind, ia, ib).related;
            assert_eq!(
                outcome_matches_relation(kind, &outcome),
                related,
                "pair {i}, {}: game and fixpoint disagree",
                kind.name()
            );
        }
    }
    let audit = hierarchy_audit(&pairs);
    assert!(audit.passed(), "game hierarchy audit failed: {audit:?}");
}

#[test]
fn criterion_09_synthesized_formulas_distinguish_and_match_the_pinned_one() {
    let limits = SampleLimits::games();
    let mut r = rng(109);
    let mut distinguished = 0;
    let mut draws = 0;
    while distinguished < 50 {
        draws += 1;
        assert!(draws < 500, "not enough non-bisimilar pairs in the sample");
        let (a, b, how) = random_pair(&mut r, &limits);
        let ia = instance(&a);
        let ib = instance(&b);
        if cp_bisim(&ia, &ib).related {
            continue;
        }
        let formula = synthesize_distinguishing(&ia, &ib).unwrap();
        assert!(
            verify_distinguishing(&formula, &ia, &ib).unwrap(),
            "draw {draws} ({how}): formula fails to distinguish:\n{}\n{}\n--\n{}",
            render_formula(&formula),
            a.render(),
            b.render()
        );
        distinguished += 1;
    }

    let a = one_edge("x", 2);
    let b = one_edge("y", 5);
    let ia = instance(&a);
    let ib = instance(&b);
    let formula = synthesize_distinguishing(&ia, &ib).unwrap();
    assert_eq!(
        render_formula(&formula),
        "x1 in (EE(x1 = 2 && <a> tt))",
        "the canonical pair must synthesize the pinned formula"
    );
    assert!(evaluate(&formula, &ia.graph, &ia.start).unwrap());
    assert!(!evaluate(&formula, &ib.graph, &ib.start).unwrap());
}

#[test]
fn criterion_10_the_nested_formula_round_trips_byte_identically() {
    let text = "x1 in (<a>[b] x2 in (<c> EE(1 < x2 < 2 && <d> tt)))";
    let parsed = parse_formula(text).unwrap();
    assert_eq!(render_formula(&parsed), text);
}
