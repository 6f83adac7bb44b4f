mod common;

use common::*;
use evac_core::domain::{ExitDoor, Point, Side};
use evac_core::routing::{choose_exit, euclid, nearest_exit};
use proptest::prelude::*;
use rand::Rng;

/// Linear scan with floating-point distances, ties to the lowest id.
fn brute_force_nearest(pos: Point, exits: &[ExitDoor]) -> u32 {
    let mut best: Option<(f64, u32)> = None;
    for e in exits {
        let (dx, dy) = ((e.x - pos.x) as f64, (e.y - pos.y) as f64);
        let d = (dx * dx + dy * dy).sqrt();
        best = match best {
            Some((bd, bid)) if bd < d || (bd == d && bid < e.id) => Some((bd, bid)),
            _ => Some((d, e.id)),
        };
    }
    best.expect("non-empty").1
}

#[test]
fn nearest_exit_matches_linear_scan() {
    let mut rng = seeded(21);
    for _ in 0..10_000 {
        let area = room(rng.random_range(4..80), rng.random_range(4..80));
        let n = rng.random_range(1..=6);
        let mut exits = random_exits(&area, n, &mut rng);
        // Shuffle ids so id order differs from list order.
        let mut ids: Vec<u32> = (1..=n as u32).collect();
        rand::seq::SliceRandom::shuffle(&mut ids[..], &mut rng);
        for (e, id) in exits.iter_mut().zip(ids) {
            e.id = id;
        }
        let pos = Point::new(rng.random_range(1..area.width), rng.random_range(1..area.height));
        assert_eq!(nearest_exit(pos, &exits).unwrap(), brute_force_nearest(pos, &exits));
    }
}

fn lone_familiar_ticks(width: i32, height: i32, exits: &[ExitDoor], start: Point) -> u32 {
    let mut area = room(width, height);
    area.exits = exits.to_vec();
    let target = nearest_exit(start, exits).unwrap();
    lone_agent_ticks(&area, start, target, 1.0)
}

#[test]
fn extra_exit_on_the_same_wall_never_slows_a_familiar_agent() {
    let mut rng = seeded(22);
    for _ in 0..1_000 {
        let (w, h) = (rng.random_range(4..40), rng.random_range(4..40));
        let area = room(w, h);
        let side = SIDES[rng.random_range(0..4)];
        let (lo, hi) = area.wall_range(side);
        let mut spots: Vec<i32> = (lo..=hi).collect();
        rand::seq::SliceRandom::shuffle(&mut spots[..], &mut rng);
        let k = rng.random_range(1..spots.len());
        let exits: Vec<ExitDoor> = spots[..k]
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let p = area.wall_point(side, a);
                ExitDoor::new(i as u32 + 1, p.x, p.y)
            })
            .collect();
        let p = area.wall_point(side, spots[k]);
        let mut more = exits.clone();
        more.push(ExitDoor::new(k as u32 + 1, p.x, p.y));
        let start = Point::new(rng.random_range(1..w), rng.random_range(1..h));
        assert!(
            lone_familiar_ticks(w, h, &more, start) <= lone_familiar_ticks(w, h, &exits, start),
            "{side:?} exits {exits:?} + {p} from {start}"
        );
    }
}

#[test]
fn extra_exit_on_another_wall_can_slow_a_familiar_agent() {
    // The new exit is nearer in straight-line distance (11 < 12.2) but a
    // greedy 8-neighbour walk needs max(|dx|, |dy|) steps: 11 instead of 10.
    let start = Point::new(10, 9);
    let right = ExitDoor::new(1, 20, 16);
    let bottom = ExitDoor::new(2, 10, 20);
    assert!(euclid(start, bottom.center()) < euclid(start, right.center()));
    let before = lone_familiar_ticks(20, 20, &[right.clone()], start);
    let after = lone_familiar_ticks(20, 20, &[right, bottom], start);
    assert_eq!((before, after), (10, 11));
}

#[test]
fn unfamiliar_choice_only_depends_on_the_draw() {
    let area = room(30, 30);
    let exits = random_exits(&area, 4, &mut seeded(1));
    for seed in 0..200 {
        let a = choose_exit(false, Point::new(5, 5), &exits, &mut seeded(seed)).unwrap();
        let b = choose_exit(false, Point::new(20, 7), &exits, &mut seeded(seed)).unwrap();
        assert_eq!(a, b);
    }
    let single = [ExitDoor::new(9, 30, 3)];
    assert_eq!(choose_exit(false, Point::new(5, 5), &single, &mut seeded(3)), Ok(9));
}

proptest! {
    #[test]
    fn euclid_is_a_metric(ax in -50i32..50, ay in -50i32..50, bx in -50i32..50, by in -50i32..50, cx in -50i32..50, cy in -50i32..50) {
        let (a, b, c) = (Point::new(ax, ay), Point::new(bx, by), Point::new(cx, cy));
        prop_assert_eq!(euclid(a, b), euclid(b, a));
        prop_assert!(euclid(a, c) <= euclid(a, b) + euclid(b, c) + 1e-9);
        prop_assert_eq!(euclid(a, a), 0.0);
    }
}

#[test]
fn sides_round_trip_through_text() {
    for side in SIDES {
        assert_eq!(side.to_string().parse::<Side>(), Ok(side));
    }
}
