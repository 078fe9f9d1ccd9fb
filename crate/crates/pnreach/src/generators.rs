//! Deterministic constructors for the benchmark families: buffer chains,
//! token trees, dining-philosopher rings and cliques. Each family comes as a
//! flat closed net (for the explicit checker and as CLI input) and, except
//! for cliques, as a hand decomposition; the two are isomorphic and the tests
//! hold them together.

use crate::bits::Bits;
use crate::net::{MarkedNet, NetWithBoundaries, PlaceTarget};
use crate::wiring::{Assignments, WiringExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BufferShape {
    Flat,
    Left,
    Right,
    Balanced,
}

/// A wiring decomposition together with its leaf assignments.
#[derive(Debug, Clone)]
pub struct Decomposed {
    pub expr: WiringExpr,
    pub assign: Assignments,
}

// --- buffer ------------------------------------------------------------

/// The producer end: no places, one transition feeding the right boundary.
pub fn top_net() -> NetWithBoundaries {
    let mut n = NetWithBoundaries::new(0, 1);
    n.add_transition("t", &[], &[], &[], &[0]);
    n
}

/// The consumer end: no places, one transition on the left boundary.
pub fn bottom_net() -> NetWithBoundaries {
    let mut n = NetWithBoundaries::new(1, 0);
    n.add_transition("t", &[], &[], &[0], &[]);
    n
}

/// One buffer cell `b1 : 1 -> 1`: two places holding a single token between
/// them; the right-boundary transition moves the token from the start place
/// to the complement place, the left-boundary transition moves it back.
pub fn cell_net() -> NetWithBoundaries {
    let mut n = NetWithBoundaries::new(1, 1);
    let top = n.add_place("top");
    let bot = n.add_place("bot");
    n.add_transition("r", &[top], &[bot], &[], &[0]);
    n.add_transition("l", &[bot], &[top], &[0], &[]);
    n
}

/// The chain of `n` cells `b1 ; ... ; b1 : 1 -> 1` as a composed net.
pub fn cell_chain(n: usize) -> NetWithBoundaries {
    assert!(n >= 1);
    let mut net = cell_net();
    for _ in 1..n {
        net = net.compose_seq(&cell_net()).expect("matching widths");
    }
    net
}

/// The flat buffer of `n` cells, closed at both ends. Initially every cell
/// holds its token in the start position; the target is the opposite
/// marking, every cell complemented.
pub fn buffer_flat(n: usize) -> MarkedNet {
    assert!(n >= 1);
    let mut net = NetWithBoundaries::new(0, 0);
    let mut tops = Vec::new();
    let mut bots = Vec::new();
    for i in 1..=n {
        tops.push(net.add_place(format!("c{i:04}.top")));
        bots.push(net.add_place(format!("c{i:04}.bot")));
    }
    net.add_transition("t0000", &[bots[0]], &[tops[0]], &[], &[]);
    for i in 1..n {
        net.add_transition(
            format!("t{i:04}"),
            &[tops[i - 1], bots[i]],
            &[bots[i - 1], tops[i]],
            &[],
            &[],
        );
    }
    net.add_transition(format!("t{n:04}"), &[tops[n - 1]], &[bots[n - 1]], &[], &[]);
    let initial = Bits::from_indices(net.num_places(), tops.iter().copied());
    let targets = (0..net.num_places())
        .map(|p| {
            if tops.contains(&p) {
                PlaceTarget::No
            } else {
                PlaceTarget::Yes
            }
        })
        .collect();
    MarkedNet { net, initial, targets }
}

fn buffer_assignments() -> Assignments {
    let mut asg = Assignments::default();
    let top = top_net();
    let bot = bottom_net();
    let cell = cell_net();
    let empty = top.empty_marking();
    asg.assign("top", top, vec![empty.clone()], vec![empty.clone()]);
    asg.assign("bot", bot, vec![empty.clone()], vec![empty]);
    let init = cell.marking_of(&["top"]);
    let fin = cell.marking_of(&["bot"]);
    asg.assign("cell", cell, vec![init], vec![fin]);
    asg
}

/// The buffer as a wiring decomposition of the requested association shape.
pub fn buffer_decomposition(n: usize, shape: BufferShape) -> Decomposed {
    assert!(n >= 1);
    let leaves: Vec<WiringExpr> = std::iter::once(WiringExpr::var("top"))
        .chain((0..n).map(|_| WiringExpr::var("cell")))
        .chain(std::iter::once(WiringExpr::var("bot")))
        .collect();
    let expr = match shape {
        BufferShape::Flat => panic!("flat shape has no decomposition; use buffer_flat"),
        BufferShape::Right => leaves
            .into_iter()
            .rev()
            .reduce(|acc, leaf| WiringExpr::seq(leaf, acc))
            .unwrap(),
        BufferShape::Left => leaves.into_iter().reduce(WiringExpr::seq).unwrap(),
        BufferShape::Balanced => balanced_seq(&leaves),
    };
    Decomposed {
        expr,
        assign: buffer_assignments(),
    }
}

fn balanced_seq(leaves: &[WiringExpr]) -> WiringExpr {
    match leaves {
        [one] => one.clone(),
        _ => {
            let mid = leaves.len() / 2;
            WiringExpr::seq(balanced_seq(&leaves[..mid]), balanced_seq(&leaves[mid..]))
        }
    }
}

// --- tree --------------------------------------------------------------

fn tree_node_ids(depth: usize) -> Vec<String> {
    // breadth-first paths: "n", "nL", "nR", "nLL", ...
    let mut ids = vec!["n".to_string()];
    let mut level = vec!["n".to_string()];
    for _ in 1..depth {
        let mut next = Vec::new();
        for id in &level {
            next.push(format!("{id}L"));
            next.push(format!("{id}R"));
        }
        ids.extend(next.iter().cloned());
        level = next;
    }
    ids
}

/// The token tree of the given depth: a feed transition puts tokens on the
/// root (re-armed whenever the root empties, so the net is not safe in the
/// unbounded sense), and each tree edge can move a token down or back up.
/// The question asked of it is whether every place can be marked at once.
pub fn tree_flat(depth: usize) -> MarkedNet {
    assert!(depth >= 1);
    let mut net = NetWithBoundaries::new(0, 0);
    for id in tree_node_ids(depth) {
        net.add_place(id);
    }
    let root = net.place_index("n").unwrap();
    net.add_transition("feed", &[], &[root], &[], &[]);
    let ids = tree_node_ids(depth);
    for id in &ids {
        for side in ["L", "R"] {
            let child = format!("{id}{side}");
            if let Some(c) = net.place_index(&child) {
                let v = net.place_index(id).unwrap();
                net.add_transition(format!("d.{child}"), &[v], &[c], &[], &[]);
                net.add_transition(format!("u.{child}"), &[c], &[v], &[], &[]);
            }
        }
    }
    let initial = net.empty_marking();
    let targets = vec![PlaceTarget::Yes; net.num_places()];
    MarkedNet { net, initial, targets }
}

/// Hand decomposition of the tree: each internal node becomes a carrier
/// holding its place (cut from its children), composed with the tensor of the
/// two subtrees — a `;` node over a `⊗` node at every level.
pub fn tree_decomposition(depth: usize) -> Decomposed {
    assert!(depth >= 1);
    let mut asg = Assignments::default();
    let expr = tree_decomp_rec("n", depth, 1, true, &mut asg);
    Decomposed { expr, assign: asg }
}

/// `ported` nodes other than the root carry the two severed edge stubs from
/// the parent cut on their left boundary: port 0 receives the downward move,
/// port 1 emits the upward move.
fn tree_decomp_rec(
    id: &str,
    depth: usize,
    level: usize,
    is_root: bool,
    asg: &mut Assignments,
) -> WiringExpr {
    let left_width = if is_root { 0 } else { 2 };
    if level == depth {
        // leaf node: just the place and its parent-edge stubs
        let mut net = NetWithBoundaries::new(left_width, 0);
        let p = net.add_place(id);
        if !is_root {
            net.add_transition(format!("d.{id}"), &[], &[p], &[0], &[]);
            net.add_transition(format!("u.{id}"), &[p], &[], &[1], &[]);
        } else {
            net.add_transition("feed", &[], &[p], &[], &[]);
        }
        let var = format!("leaf.{id}");
        let init = net.empty_marking();
        let fin = net.marking_of(&[id]);
        asg.assign(&var, net, vec![init], vec![fin]);
        return WiringExpr::var(var);
    }
    // carrier: the node's place, its parent stubs (or the feed at the root),
    // and cut stubs for the four severed child-edge arcs
    let mut net = NetWithBoundaries::new(left_width, 4);
    let p = net.add_place(id);
    if is_root {
        net.add_transition("feed", &[], &[p], &[], &[]);
    } else {
        net.add_transition(format!("d.{id}"), &[], &[p], &[0], &[]);
        net.add_transition(format!("u.{id}"), &[p], &[], &[1], &[]);
    }
    net.add_transition(format!("cut.d.{id}L"), &[p], &[], &[], &[0]);
    net.add_transition(format!("cut.u.{id}L"), &[], &[p], &[], &[1]);
    net.add_transition(format!("cut.d.{id}R"), &[p], &[], &[], &[2]);
    net.add_transition(format!("cut.u.{id}R"), &[], &[p], &[], &[3]);
    let var = format!("carrier.{id}");
    let init = net.empty_marking();
    let fin = net.marking_of(&[id]);
    asg.assign(&var, net, vec![init], vec![fin]);
    let left = tree_decomp_rec(&format!("{id}L"), depth, level + 1, false, asg);
    let right = tree_decomp_rec(&format!("{id}R"), depth, level + 1, false, asg);
    WiringExpr::seq(WiringExpr::var(var), WiringExpr::tensor(left, right))
}

// --- dining philosophers -------------------------------------------------

/// One philosopher `ph : 3 -> 3`. Both boundaries carry the same protocol
/// towards the adjacent fork: port 0 grabs it as the first fork picked up,
/// port 1 as the second, port 2 puts it back. Forks may be taken in either
/// order; the release returns both at once.
pub fn philosopher_net() -> NetWithBoundaries {
    let mut n = NetWithBoundaries::new(3, 3);
    let th = n.add_place("th");
    let hl = n.add_place("hL");
    let hr = n.add_place("hR");
    let ea = n.add_place("ea");
    n.add_transition("takeL1", &[th], &[hl], &[0], &[]);
    n.add_transition("takeL2", &[hr], &[ea], &[1], &[]);
    n.add_transition("takeR1", &[th], &[hr], &[], &[0]);
    n.add_transition("takeR2", &[hl], &[ea], &[], &[1]);
    n.add_transition("release", &[ea], &[th], &[2], &[2]);
    n
}

/// One fork `fk : 3 -> 3`: a single free-slot place consumed by either
/// neighbour's take actions and refilled by their releases. Separate
/// transitions per port keep the one-transition-per-port rule.
pub fn fork_net() -> NetWithBoundaries {
    let mut n = NetWithBoundaries::new(3, 3);
    let free = n.add_place("free");
    n.add_transition("takenR1", &[free], &[], &[0], &[]);
    n.add_transition("takenR2", &[free], &[], &[1], &[]);
    n.add_transition("backR", &[], &[free], &[2], &[]);
    n.add_transition("takenL1", &[free], &[], &[], &[0]);
    n.add_transition("takenL2", &[free], &[], &[], &[1]);
    n.add_transition("backL", &[], &[free], &[], &[2]);
    n
}

/// Identity wiring on a width-3 boundary.
pub fn identity3_net() -> NetWithBoundaries {
    let mut n = NetWithBoundaries::new(3, 3);
    for j in 0..3 {
        n.add_transition(format!("w{j}"), &[], &[], &[j], &[j]);
    }
    n
}

/// Ring opener `d3 : 0 -> 6`: each transition drives one wire of the
/// feedback bundle and the matching wire of the row bundle together.
pub fn diag3_net() -> NetWithBoundaries {
    let mut n = NetWithBoundaries::new(0, 6);
    for j in 0..3 {
        n.add_transition(format!("d{j}"), &[], &[], &[], &[j, 3 + j]);
    }
    n
}

/// Ring closer `e3 : 6 -> 0`, the mirror of [`diag3_net`].
pub fn codiag3_net() -> NetWithBoundaries {
    let mut n = NetWithBoundaries::new(6, 0);
    for j in 0..3 {
        n.add_transition(format!("e{j}"), &[], &[], &[j, 3 + j], &[]);
    }
    n
}

fn phrow_expr(n: usize) -> WiringExpr {
    assert!(n >= 1);
    let mut expr = WiringExpr::seq(WiringExpr::var("ph"), WiringExpr::var("fk"));
    for _ in 1..n {
        expr = WiringExpr::seq(
            WiringExpr::var("ph"),
            WiringExpr::seq(WiringExpr::var("fk"), expr),
        );
    }
    expr
}

fn philosopher_assignments() -> Assignments {
    let mut asg = Assignments::default();
    let ph = philosopher_net();
    let fk = fork_net();
    let ph_init = ph.marking_of(&["th"]);
    let ph_fin = ph.marking_of(&["hL"]);
    let fk_init = fk.marking_of(&["free"]);
    let fk_fin = fk.empty_marking();
    asg.assign("ph", ph, vec![ph_init], vec![ph_fin]);
    asg.assign("fk", fk, vec![fk_init], vec![fk_fin]);
    for (var, net) in [("i3", identity3_net()), ("d3", diag3_net()), ("e3", codiag3_net())] {
        let e = net.empty_marking();
        asg.assign(var, net, vec![e.clone()], vec![e]);
    }
    asg
}

/// The row of `n` philosopher/fork pairs, open at both ends.
pub fn phrow_decomposition(n: usize) -> Decomposed {
    Decomposed {
        expr: phrow_expr(n),
        assign: philosopher_assignments(),
    }
}

/// The full ring of `n` philosophers: the row, with its two boundaries tied
/// together through an identity bundle. The target encodes the circular-wait
/// deadlock: every philosopher holds exactly the first fork he picked up
/// (the left one) and every fork is taken.
pub fn philosophers_decomposition(n: usize) -> Decomposed {
    assert!(n >= 1);
    let expr = WiringExpr::seq(
        WiringExpr::var("d3"),
        WiringExpr::seq(
            WiringExpr::tensor(WiringExpr::var("i3"), phrow_expr(n)),
            WiringExpr::var("e3"),
        ),
    );
    Decomposed {
        expr,
        assign: philosopher_assignments(),
    }
}

/// The flat philosopher ring. Philosopher `i` sits between fork `i-1` (his
/// left, wrapping around) and fork `i` (his right).
///
/// With a single philosopher both release arcs would return the same fork,
/// which the step semantics forbids (the two return actions are not
/// independent), so the degenerate `n = 1` ring has no release — matching
/// the composed ring, where the release synchronisation dies for the same
/// reason.
pub fn philosophers_flat(n: usize) -> MarkedNet {
    assert!(n >= 1);
    let mut net = NetWithBoundaries::new(0, 0);
    let mut th = Vec::new();
    let mut hl = Vec::new();
    let mut hr = Vec::new();
    let mut ea = Vec::new();
    let mut free = Vec::new();
    for i in 1..=n {
        th.push(net.add_place(format!("p{i:04}.th")));
        hl.push(net.add_place(format!("p{i:04}.hL")));
        hr.push(net.add_place(format!("p{i:04}.hR")));
        ea.push(net.add_place(format!("p{i:04}.ea")));
        free.push(net.add_place(format!("p{i:04}f.free")));
    }
    for i in 0..n {
        let left_fork = free[(i + n - 1) % n];
        let right_fork = free[i];
        net.add_transition(format!("takeL1.{i}"), &[th[i], left_fork], &[hl[i]], &[], &[]);
        net.add_transition(format!("takeL2.{i}"), &[hr[i], left_fork], &[ea[i]], &[], &[]);
        net.add_transition(format!("takeR1.{i}"), &[th[i], right_fork], &[hr[i]], &[], &[]);
        net.add_transition(format!("takeR2.{i}"), &[hl[i], right_fork], &[ea[i]], &[], &[]);
        if left_fork != right_fork {
            net.add_transition(
                format!("release.{i}"),
                &[ea[i]],
                &[th[i], left_fork, right_fork],
                &[],
                &[],
            );
        }
    }
    let initial = Bits::from_indices(
        net.num_places(),
        th.iter().chain(&free).copied(),
    );
    let targets = (0..net.num_places())
        .map(|p| {
            if hl.contains(&p) {
                PlaceTarget::Yes
            } else {
                PlaceTarget::No
            }
        })
        .collect();
    MarkedNet { net, initial, targets }
}

// --- clique ------------------------------------------------------------

/// The complete net on `n` places: one transition per ordered place pair.
/// Densely connected, so every decomposition needs wide boundaries; this is
/// the stress case the width guard exists for.
pub fn clique(n: usize) -> MarkedNet {
    assert!(n >= 2);
    let mut net = NetWithBoundaries::new(0, 0);
    let places: Vec<usize> = (1..=n).map(|i| net.add_place(format!("p{i:04}"))).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                net.add_transition(
                    format!("t{:04}_{:04}", i + 1, j + 1),
                    &[places[i]],
                    &[places[j]],
                    &[],
                    &[],
                );
            }
        }
    }
    let initial = Bits::from_indices(net.num_places(), [places[0]]);
    let targets = (0..net.num_places())
        .map(|p| {
            if p == places[n - 1] {
                PlaceTarget::Yes
            } else if p == places[0] {
                PlaceTarget::No
            } else {
                PlaceTarget::DontCare
            }
        })
        .collect();
    MarkedNet { net, initial, targets }
}
