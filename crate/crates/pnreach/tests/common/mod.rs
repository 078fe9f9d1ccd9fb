//! Shared randomised-input helpers for the integration suites.

use rand::Rng;

use pnreach::bits::Bits;
use pnreach::net::{Marking, NetWithBoundaries};
use pnreach::wiring::{Assignments, WiringExpr};

pub fn random_net(
    rng: &mut impl Rng,
    max_places: usize,
    max_transitions: usize,
    left_width: usize,
    right_width: usize,
) -> NetWithBoundaries {
    let num_places = rng.gen_range(0..=max_places);
    let num_transitions = rng.gen_range(0..=max_transitions);
    let mut net = NetWithBoundaries::new(left_width, right_width);
    for p in 0..num_places {
        net.add_place(format!("p{p}"));
    }
    let mut specs: Vec<(Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>)> = (0..num_transitions)
        .map(|_| {
            let mut pre = Vec::new();
            let mut post = Vec::new();
            for p in 0..num_places {
                if rng.gen_bool(0.3) {
                    pre.push(p);
                }
                if rng.gen_bool(0.3) && (rng.gen_bool(0.05) || !pre.contains(&p)) {
                    post.push(p);
                }
            }
            (pre, post, Vec::new(), Vec::new())
        })
        .collect();
    if !specs.is_empty() {
        for port in 0..left_width {
            if rng.gen_bool(0.7) {
                let t = rng.gen_range(0..specs.len());
                specs[t].2.push(port);
            }
        }
        for port in 0..right_width {
            if rng.gen_bool(0.7) {
                let t = rng.gen_range(0..specs.len());
                specs[t].3.push(port);
            }
        }
    }
    for (i, (pre, post, source, target)) in specs.iter().enumerate() {
        net.add_transition(format!("t{i}"), pre, post, source, target);
    }
    net
}

pub fn random_marking(rng: &mut impl Rng, num_places: usize) -> Marking {
    Bits::from_indices(num_places, (0..num_places).filter(|_| rng.gen_bool(0.5)))
}

pub fn random_wiring(
    rng: &mut impl Rng,
    left: usize,
    right: usize,
    depth: usize,
    max_leaf_places: usize,
    counter: &mut usize,
    asg: &mut Assignments,
) -> WiringExpr {
    if depth == 0 || rng.gen_bool(0.35) {
        let net = random_net(rng, max_leaf_places, 3, left, right);
        let var = format!("x{}", *counter);
        *counter += 1;
        let mut initial = vec![random_marking(rng, net.num_places())];
        if rng.gen_bool(0.3) {
            initial.push(random_marking(rng, net.num_places()));
        }
        let finals = (0..rng.gen_range(0..=2))
            .map(|_| random_marking(rng, net.num_places()))
            .collect();
        asg.assign(&var, net, initial, finals);
        return WiringExpr::var(var);
    }
    if rng.gen_bool(0.5) {
        let mid = rng.gen_range(0..=2);
        let a = random_wiring(rng, left, mid, depth - 1, max_leaf_places, counter, asg);
        let b = random_wiring(rng, mid, right, depth - 1, max_leaf_places, counter, asg);
        WiringExpr::seq(a, b)
    } else {
        let la = rng.gen_range(0..=left);
        let ra = rng.gen_range(0..=right);
        let a = random_wiring(rng, la, ra, depth - 1, max_leaf_places, counter, asg);
        let b = random_wiring(rng, left - la, right - ra, depth - 1, max_leaf_places, counter, asg);
        WiringExpr::tensor(a, b)
    }
}
