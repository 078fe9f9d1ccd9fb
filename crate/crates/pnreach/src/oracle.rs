//! Explicit-state reference checker.
//!
//! A plain breadth-first search over markings, firing one transition at a
//! time. Interleaved exploration reaches exactly the markings the step
//! semantics reaches: every member of a mutually independent step is
//! individually enabled and the members touch disjoint places, so a step can
//! always be serialised. This is the ground truth the compositional pipeline
//! is tested against.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::net::{Marking, NetWithBoundaries, PlaceTarget};

/// Exact-search cap; markings are explored exhaustively with no hashing
/// tricks, so the state space must stay enumerable.
pub const MAX_ORACLE_PLACES: usize = 24;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("net has {places} places; the explicit checker refuses more than {MAX_ORACLE_PLACES}")]
    TooManyPlaces { places: usize },
    #[error("net must be closed (0 -> 0), got {left} -> {right}")]
    NotClosed { left: usize, right: usize },
}

#[derive(Debug, Clone)]
pub struct ReachabilityResult {
    pub reachable: bool,
    /// Firing sequence to the first matching marking, as a list of fired
    /// transition sets (singletons under interleaved search).
    pub witness: Option<Vec<Vec<String>>>,
    /// Number of distinct markings visited.
    pub explored: usize,
    /// BFS depth of the first matching marking.
    pub shortest_length: Option<usize>,
}

/// Whether a marking satisfies the per-place targets.
pub fn marking_matches(targets: &[PlaceTarget], marking: &Marking) -> bool {
    targets.iter().enumerate().all(|(p, t)| match t {
        PlaceTarget::Yes => marking.get(p),
        PlaceTarget::No => !marking.get(p),
        PlaceTarget::DontCare => true,
    })
}

/// Breadth-first reachability over explicit markings. Deterministic: the
/// queue is processed in insertion order and transitions fire in index order,
/// so the witness is stable across runs.
pub fn oracle_reach(
    net: &NetWithBoundaries,
    initial: &[Marking],
    targets: &[PlaceTarget],
) -> Result<ReachabilityResult, OracleError> {
    if net.left_width() != 0 || net.right_width() != 0 {
        return Err(OracleError::NotClosed {
            left: net.left_width(),
            right: net.right_width(),
        });
    }
    if net.num_places() > MAX_ORACLE_PLACES {
        return Err(OracleError::TooManyPlaces {
            places: net.num_places(),
        });
    }
    assert_eq!(targets.len(), net.num_places(), "one target label per place");

    let mut parent: HashMap<Marking, Option<(Marking, usize)>> = HashMap::new();
    let mut depth: HashMap<Marking, usize> = HashMap::new();
    let mut queue: VecDeque<Marking> = VecDeque::new();
    for m in initial {
        if !parent.contains_key(m) {
            parent.insert(m.clone(), None);
            depth.insert(m.clone(), 0);
            queue.push_back(m.clone());
        }
    }
    let mut hit: Option<Marking> = None;
    'search: while let Some(m) = queue.pop_front() {
        if marking_matches(targets, &m) {
            hit = Some(m);
            break 'search;
        }
        let d = depth[&m];
        for (i, t) in net.transitions().iter().enumerate() {
            if t.pre.is_subset_of(&m) && t.post.is_disjoint(&m) {
                let succ = m.difference(&t.pre).union(&t.post);
                if !parent.contains_key(&succ) {
                    parent.insert(succ.clone(), Some((m.clone(), i)));
                    depth.insert(succ.clone(), d + 1);
                    queue.push_back(succ);
                }
            }
        }
    }
    match hit {
        Some(m) => {
            let shortest = depth[&m];
            let mut witness = Vec::new();
            let mut cur = m;
            while let Some(Some((prev, t))) = parent.get(&cur).cloned() {
                witness.push(vec![net.transitions()[t].id.clone()]);
                cur = prev;
            }
            witness.reverse();
            Ok(ReachabilityResult {
                reachable: true,
                witness: Some(witness),
                explored: parent.len(),
                shortest_length: Some(shortest),
            })
        }
        None => Ok(ReachabilityResult {
            reachable: false,
            witness: None,
            explored: parent.len(),
            shortest_length: None,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;
    use crate::net::StepLabel;

    #[test]
    fn depth_zero_when_initial_matches() {
        let mut n = NetWithBoundaries::new(0, 0);
        n.add_place("p");
        let r = oracle_reach(&n, &[n.marking_of(&["p"])], &[PlaceTarget::Yes]).unwrap();
        assert!(r.reachable);
        assert_eq!(r.shortest_length, Some(0));
        assert_eq!(r.witness.as_deref(), Some(&[] as &[Vec<String>]));
    }

    #[test]
    fn place_cap_enforced() {
        let mut n = NetWithBoundaries::new(0, 0);
        for i in 0..25 {
            n.add_place(format!("p{i}"));
        }
        let init = n.empty_marking();
        let targets = vec![PlaceTarget::DontCare; 25];
        assert!(matches!(
            oracle_reach(&n, &[init], &targets),
            Err(OracleError::TooManyPlaces { places: 25 })
        ));
    }

    #[test]
    fn witness_replays_under_step_semantics() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let net = crate::testutil::random_net(&mut rng, 6, 6, 0, 0);
            let init = crate::testutil::random_marking(&mut rng, net.num_places());
            let targets: Vec<PlaceTarget> = (0..net.num_places())
                .map(|_| match rng.gen_range(0..3) {
                    0 => PlaceTarget::Yes,
                    1 => PlaceTarget::No,
                    _ => PlaceTarget::DontCare,
                })
                .collect();
            let r = oracle_reach(&net, &[init.clone()], &targets).unwrap();
            if let Some(w) = &r.witness {
                let mut m = init;
                for step in w {
                    assert_eq!(step.len(), 1);
                    let ti = net
                        .transitions()
                        .iter()
                        .position(|t| t.id == step[0])
                        .unwrap();
                    let t = &net.transitions()[ti];
                    // the fired singleton must be one of the enabled steps
                    let label = StepLabel { left: t.source, right: t.target };
                    let succ = m.difference(&t.pre).union(&t.post);
                    assert!(net.step_successors(&m).contains(&(label, succ.clone())));
                    m = succ;
                }
                assert!(marking_matches(&targets, &m));
            }
        }
    }

    #[test]
    fn singleton_and_step_exploration_reach_the_same_markings() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22);
        for _ in 0..30 {
            let net = crate::testutil::random_net(&mut rng, 8, 8, 0, 0);
            let init = crate::testutil::random_marking(&mut rng, net.num_places());
            let mut singles: std::collections::BTreeSet<Bits> = std::collections::BTreeSet::new();
            let mut stack = vec![init.clone()];
            singles.insert(init.clone());
            while let Some(m) = stack.pop() {
                for t in net.transitions() {
                    if t.pre.is_subset_of(&m) && t.post.is_disjoint(&m) {
                        let succ = m.difference(&t.pre).union(&t.post);
                        if singles.insert(succ.clone()) {
                            stack.push(succ);
                        }
                    }
                }
            }
            let mut steps: std::collections::BTreeSet<Bits> = std::collections::BTreeSet::new();
            let mut stack = vec![init.clone()];
            steps.insert(init);
            while let Some(m) = stack.pop() {
                for (_, succ) in net.step_successors(&m) {
                    if steps.insert(succ.clone()) {
                        stack.push(succ);
                    }
                }
            }
            assert_eq!(singles, steps);
        }
    }
}
