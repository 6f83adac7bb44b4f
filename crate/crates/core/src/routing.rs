//! Exit choice: familiar agents take the nearest door, unfamiliar agents
//! commit to a uniformly random door of their part.

use rand::Rng;
use thiserror::Error;

use crate::domain::{ExitDoor, Point};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoutingError {
    #[error("no exits to choose from")]
    NoExits,
}

pub fn euclid(p: Point, q: Point) -> f64 {
    (p.dist2(q) as f64).sqrt()
}

/// Id of the exit whose door centre is nearest to `pos`; ties go to the
/// lowest id.
pub fn nearest_exit(pos: Point, exits: &[ExitDoor]) -> Result<u32, RoutingError> {
    exits
        .iter()
        .min_by_key(|e| (pos.dist2(e.center()), e.id))
        .map(|e| e.id)
        .ok_or(RoutingError::NoExits)
}

pub fn choose_exit(
    familiar: bool,
    pos: Point,
    exits: &[ExitDoor],
    rng: &mut impl Rng,
) -> Result<u32, RoutingError> {
    if exits.is_empty() {
        return Err(RoutingError::NoExits);
    }
    if familiar {
        nearest_exit(pos, exits)
    } else {
        Ok(exits[rng.random_range(0..exits.len())].id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn exits(at: &[(u32, i32, i32)]) -> Vec<ExitDoor> {
        at.iter().map(|&(id, x, y)| ExitDoor::new(id, x, y)).collect()
    }

    #[test]
    fn euclid_examples() {
        assert_eq!(euclid(Point::new(0, 0), Point::new(3, 4)), 5.0);
        assert_eq!(euclid(Point::new(70, 47), Point::new(70, 47)), 0.0);
        assert_eq!(euclid(Point::new(10, 47), Point::new(70, 47)), 60.0);
    }

    #[test]
    fn nearest_examples() {
        let e = exits(&[(1, 70, 47), (2, 70, 57), (3, 70, 83)]);
        assert_eq!(nearest_exit(Point::new(60, 50), &e).unwrap(), 1);
        assert_eq!(nearest_exit(Point::new(0, 0), &e[2..]).unwrap(), 3);
        let tie = exits(&[(5, 10, 0), (2, 0, 10)]);
        assert_eq!(nearest_exit(Point::new(5, 5), &tie).unwrap(), 2);
        assert_eq!(nearest_exit(Point::new(5, 5), &[]), Err(RoutingError::NoExits));
    }

    #[test]
    fn choose_exit_examples() {
        let e = exits(&[(1, 70, 47), (2, 70, 57), (3, 70, 83)]);
        let mut r = rng::stream(1, rng::EXIT_CHOICE, 0);
        assert_eq!(choose_exit(true, Point::new(60, 50), &e, &mut r).unwrap(), 1);
        for seed in 0..50 {
            let mut r = rng::stream(seed, rng::EXIT_CHOICE, 0);
            assert_eq!(choose_exit(false, Point::new(1, 1), &e[1..2], &mut r).unwrap(), 2);
        }
        assert_eq!(
            choose_exit(false, Point::new(1, 1), &[], &mut r),
            Err(RoutingError::NoExits)
        );
    }

    #[test]
    fn same_seed_same_choice() {
        let e = exits(&[(1, 70, 47), (2, 70, 57), (3, 70, 83), (4, 0, 40)]);
        for seed in 0..100 {
            let a = choose_exit(false, Point::new(1, 1), &e, &mut rng::stream(seed, rng::EXIT_CHOICE, 3));
            let b = choose_exit(false, Point::new(1, 1), &e, &mut rng::stream(seed, rng::EXIT_CHOICE, 3));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn unfamiliar_choice_is_uniform() {
        let e = exits(&[(1, 70, 47), (2, 70, 57), (3, 70, 83), (4, 0, 40)]);
        let draws = 20_000;
        let mut counts = [0usize; 4];
        for seed in 0..draws {
            let mut r = rng::stream(seed, rng::EXIT_CHOICE, 0);
            let id = choose_exit(false, Point::new(1, 1), &e, &mut r).unwrap();
            counts[(id - 1) as usize] += 1;
        }
        let expected = draws as f64 / 4.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 3 degrees of freedom, p = 0.001
        assert!(chi2 < 16.27, "chi2 = {chi2}, counts = {counts:?}");
    }
}
