//! Randomised laws of the zone algebra. Zones are assembled from random
//! constraint batches at scale 2, so the half-integer grid below can
//! arbitrate every set identity by plain membership.

use proptest::collection::vec;
use proptest::prelude::*;
use timedrel::zone::Zone;
use timedrel::{ClockConstraint, CmpOp, Rat};

const CLOCKS: usize = 2;
const SCALE: i64 = 2;

fn arb_op() -> impl Strategy<Value = CmpOp> {
    prop_oneof![
        Just(CmpOp::Lt),
        Just(CmpOp::Le),
        Just(CmpOp::Eq),
        Just(CmpOp::Ge),
        Just(CmpOp::Gt),
    ]
}

fn arb_constraint() -> impl Strategy<Value = ClockConstraint> {
    (0..CLOCKS, arb_op(), 0..=6i64).prop_map(|(clock, op, constant)| ClockConstraint {
        clock,
        op,
        constant,
    })
}

prop_compose! {
    fn arb_zone()(cs in vec(arb_constraint(), 0..5), shape in 0..3u8) -> Zone {
        let mut z = Zone::full(CLOCKS, SCALE);
        for c in &cs {
            z = z.constrain_by(c);
        }
        // Vary the shape beyond pure constraint intersections.
        match shape {
            1 => z.up(),
            2 => z.reset(&[0]),
            _ => z,
        }
    }
}

fn arb_point() -> impl Strategy<Value = Vec<Rat>> {
    vec(0..=16i64, CLOCKS).prop_map(|ns| ns.into_iter().map(|n| Rat::new(n, SCALE)).collect())
}

proptest! {
    #[test]
    fn intersection_is_pointwise_conjunction(
        z1 in arb_zone(),
        z2 in arb_zone(),
        ps in vec(arb_point(), 12),
    ) {
        let both = z1.intersect(&z2);
        for p in &ps {
            prop_assert_eq!(both.contains(p), z1.contains(p) && z2.contains(p));
        }
    }

    #[test]
    fn delay_closure_is_extensive_idempotent_and_upward(
        z in arb_zone(),
        ps in vec(arb_point(), 8),
        d in 0..=8i64,
    ) {
        let u = z.up();
        prop_assert!(u.includes(&z));
        prop_assert!(u.up().includes(&u) && u.includes(&u.up()));
        let d = Rat::new(d, SCALE);
        for p in &ps {
            if z.contains(p) {
                let later: Vec<Rat> = p.iter().map(|&v| v + d).collect();
                prop_assert!(u.contains(&later));
            }
        }
    }

    #[test]
    fn subtraction_partitions_the_difference(
        z1 in arb_zone(),
        z2 in arb_zone(),
        ps in vec(arb_point(), 12),
    ) {
        let parts = z1.subtract(&z2);
        for (i, a) in parts.iter().enumerate() {
            prop_assert!(z1.includes(a));
            prop_assert!(a.intersect(&z2).is_empty());
            for b in &parts[i + 1..] {
                prop_assert!(a.intersect(b).is_empty());
            }
        }
        for p in &ps {
            let hits = parts.iter().filter(|a| a.contains(p)).count();
            let expect = z1.contains(p) && !z2.contains(p);
            prop_assert_eq!(hits, usize::from(expect));
        }
    }

    #[test]
    fn reset_maps_members_onto_the_zero_plane(
        z in arb_zone(),
        ps in vec(arb_point(), 8),
    ) {
        let r = z.reset(&[1]);
        for p in &ps {
            if z.contains(p) {
                let mut q = p.clone();
                q[1] = Rat::from_integer(0);
                prop_assert!(r.contains(&q));
            }
            if r.contains(p) {
                prop_assert_eq!(p[1], Rat::from_integer(0));
            }
        }
    }

    #[test]
    fn guard_splitting_partitions_and_decides_every_atom(
        z in arb_zone(),
        g in vec(arb_constraint(), 1..3),
        ps in vec(arb_point(), 12),
    ) {
        let cells = z.split_by_guard(&g);
        for (i, a) in cells.iter().enumerate() {
            for b in &cells[i + 1..] {
                prop_assert!(a.intersect(b).is_empty());
            }
            for c in &g {
                let inside = a.constrain_by(c);
                prop_assert!(
                    inside.is_empty() || inside.includes(a),
                    "a cell left an atom undecided",
                );
            }
        }
        for p in &ps {
            let hits = cells.iter().filter(|a| a.contains(p)).count();
            prop_assert_eq!(hits, usize::from(z.contains(p)));
        }
    }

    #[test]
    fn inclusion_agrees_with_membership(
        z1 in arb_zone(),
        z2 in arb_zone(),
        ps in vec(arb_point(), 12),
    ) {
        prop_assert!(z1.includes(&z1.intersect(&z2)));
        if z1.includes(&z2) {
            for p in &ps {
                if z2.contains(p) {
                    prop_assert!(z1.contains(p));
                }
            }
        }
    }

    #[test]
    fn convex_merge_is_exactly_the_union(
        z1 in arb_zone(),
        z2 in arb_zone(),
        ps in vec(arb_point(), 12),
    ) {
        if let Some(m) = z1.convex_merge(&z2) {
            prop_assert!(m.includes(&z1) && m.includes(&z2));
            for p in &ps {
                prop_assert_eq!(m.contains(p), z1.contains(p) || z2.contains(p));
            }
        }
    }
}
