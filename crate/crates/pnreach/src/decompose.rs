//! Automatic construction of a wiring decomposition from a flat closed net.
//!
//! The decomposer recursively splits the net. It first looks for a
//! transition whose removal leaves exactly two connected components
//! (preferring the most balanced split); failing that, a place whose removal
//! does; failing both, it removes the place that costs the smallest middle
//! boundary. Cut arcs are re-established through fresh boundary ports, with
//! placeless relay transitions carrying signals across sub-nets where a
//! port's owner ends up on the far side of a cut. Recursion stops once a
//! component's place count is within the leaf budget.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::bits::Bits;
use crate::net::{Marking, NetWithBoundaries, PlaceTarget};
use crate::wiring::{Assignments, WiringExpr};

#[derive(Debug, Error)]
pub enum DecomposeError {
    #[error("leaf budget must be at least 1")]
    BadBudget,
    #[error("input net must be closed (0 -> 0), got {left} -> {right}")]
    NotClosed { left: usize, right: usize },
    #[error("leaf '{var}' has {dontcare} don't-care places; the final-marking expansion would be too large")]
    TargetExplosion { var: String, dontcare: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CutKind {
    TransitionCut { id: String },
    PlaceCut { id: String },
    ForcedRemoval { id: String },
    /// The piece was already disconnected; no cut was needed.
    DisjointSplit,
    Leaf { var: String },
}

#[derive(Debug, Clone)]
pub struct StepReport {
    pub path: String,
    pub kind: CutKind,
    /// Place-count difference of the two components, for genuine cuts.
    pub balance: Option<usize>,
    /// Ports of the boundary the cut introduced.
    pub middle_width: usize,
    pub piece_places: usize,
    /// Connectivity probes performed by the searches at this step.
    pub candidates_probed: usize,
}

#[derive(Debug, Clone, Default)]
pub struct DecompositionReport {
    pub steps: Vec<StepReport>,
    pub max_middle_width: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug)]
pub struct DecompositionResult {
    pub expr: WiringExpr,
    pub assign: Assignments,
    pub report: DecompositionReport,
}

/// Middle boundaries beyond this many ports get a warning in the report;
/// densely connected nets are out of this technique's reach.
const WIDTH_WARN: usize = 16;

pub fn decompose(
    net: &NetWithBoundaries,
    initial: &Marking,
    targets: &[PlaceTarget],
    leaf_budget: usize,
) -> Result<DecompositionResult, DecomposeError> {
    if leaf_budget == 0 {
        return Err(DecomposeError::BadBudget);
    }
    if net.left_width() != 0 || net.right_width() != 0 {
        return Err(DecomposeError::NotClosed {
            left: net.left_width(),
            right: net.right_width(),
        });
    }
    assert_eq!(targets.len(), net.num_places());
    assert_eq!(initial.width(), net.num_places());
    let piece = Piece {
        net: net.clone(),
        initial: initial.clone(),
        targets: targets.to_vec(),
    };
    let mut ctx = Ctx {
        assign: Assignments::default(),
        report: DecompositionReport::default(),
        next_var: 0,
        budget: leaf_budget,
    };
    let expr = split(piece, "root", &mut ctx)?;
    Ok(DecompositionResult {
        expr,
        assign: ctx.assign,
        report: ctx.report,
    })
}

/// Outcome of one of the two cut searches, with its probe count for the
/// complexity accounting.
#[derive(Debug)]
pub struct SearchOutcome {
    /// Identifier of the best cut candidate and its balance.
    pub found: Option<(String, usize)>,
    pub candidates_probed: usize,
}

/// The transition whose removal splits the net into exactly two components,
/// most balanced by place count, ties broken by identifier order.
pub fn separating_transition(net: &NetWithBoundaries) -> SearchOutcome {
    let mut best: Option<(usize, String, usize)> = None;
    let mut probed = 0;
    for (ti, t) in net.transitions().iter().enumerate() {
        probed += 1;
        if let Some(comps) = two_components(net, Some(ti), None) {
            let balance = comps.balance();
            let candidate = (balance, t.id.clone(), ti);
            let better = match &best {
                None => true,
                Some((b, id, _)) => candidate.0 < *b || (candidate.0 == *b && candidate.1 < *id),
            };
            if better {
                best = Some(candidate);
            }
        }
    }
    SearchOutcome {
        found: best.map(|(b, id, _)| (id, b)),
        candidates_probed: probed,
    }
}

/// The place whose removal (with its fully incident transitions set aside)
/// splits the net into exactly two components; same tie-breaking as the
/// transition search.
pub fn separating_place(net: &NetWithBoundaries) -> SearchOutcome {
    let mut best: Option<(usize, String)> = None;
    let mut probed = 0;
    for pi in 0..net.num_places() {
        probed += 1;
        if let Some(comps) = two_components(net, None, Some(pi)) {
            let balance = comps.balance();
            let id = net.places()[pi].clone();
            let better = match &best {
                None => true,
                Some((b, bid)) => balance < *b || (balance == *b && id < *bid),
            };
            if better {
                best = Some((balance, id));
            }
        }
    }
    SearchOutcome {
        found: best.map(|(b, id)| (id, b)),
        candidates_probed: probed,
    }
}

struct Ctx {
    assign: Assignments,
    report: DecompositionReport,
    next_var: usize,
    budget: usize,
}

impl Ctx {
    fn fresh_var(&mut self) -> String {
        let v = format!("v{}", self.next_var);
        self.next_var += 1;
        v
    }

    fn record(&mut self, step: StepReport) {
        self.report.max_middle_width = self.report.max_middle_width.max(step.middle_width);
        if step.middle_width > WIDTH_WARN {
            self.report.warnings.push(format!(
                "cut at {} needs a {}-port boundary; expect the evaluation width guard to trip",
                step.path, step.middle_width
            ));
        }
        self.report.steps.push(step);
    }
}

/// A sub-net under decomposition, carrying its share of the input marking
/// and targets. Place identifiers are the original ones throughout.
#[derive(Debug, Clone)]
struct Piece {
    net: NetWithBoundaries,
    initial: Marking,
    targets: Vec<PlaceTarget>,
}

/// An explicit transition listing used while rewiring pieces.
#[derive(Debug, Clone)]
struct TSpec {
    id: String,
    pre: Vec<String>,
    post: Vec<String>,
    source: Vec<usize>,
    target: Vec<usize>,
}

impl TSpec {
    fn of(net: &NetWithBoundaries, ti: usize) -> TSpec {
        let t = &net.transitions()[ti];
        TSpec {
            id: t.id.clone(),
            pre: t.pre.ones().map(|p| net.places()[p].clone()).collect(),
            post: t.post.ones().map(|p| net.places()[p].clone()).collect(),
            source: (0..net.left_width()).filter(|p| t.source >> p & 1 == 1).collect(),
            target: (0..net.right_width()).filter(|p| t.target >> p & 1 == 1).collect(),
        }
    }
}

fn build_piece(
    left: usize,
    right: usize,
    places: Vec<String>,
    transitions: Vec<TSpec>,
    parent: &Piece,
) -> Piece {
    let mut net = NetWithBoundaries::new(left, right);
    let mut initial = Bits::new(places.len());
    let mut targets = Vec::with_capacity(places.len());
    for (i, id) in places.iter().enumerate() {
        net.add_place(id.clone());
        let old = parent.net.place_index(id).expect("place from parent piece");
        if parent.initial.get(old) {
            initial.set(i);
        }
        targets.push(parent.targets[old]);
    }
    for t in transitions {
        let pre: Vec<usize> = t.pre.iter().map(|id| net.place_index(id).unwrap()).collect();
        let post: Vec<usize> = t.post.iter().map(|id| net.place_index(id).unwrap()).collect();
        net.add_transition(t.id, &pre, &post, &t.source, &t.target);
    }
    Piece { net, initial, targets }
}

/// Place partition after optionally removing one transition or one place.
/// Transitions whose places all lie on the removed place do not connect
/// anything. Returns the component id per place and the component count.
struct Components {
    comp_of_place: Vec<Option<usize>>,
    sizes: Vec<usize>,
}

impl Components {
    fn balance(&self) -> usize {
        self.sizes[0].abs_diff(self.sizes[1])
    }
}

fn components(net: &NetWithBoundaries, drop_transition: Option<usize>, drop_place: Option<usize>) -> Components {
    let np = net.num_places();
    let mut parent: Vec<usize> = (0..np).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    for (ti, t) in net.transitions().iter().enumerate() {
        if Some(ti) == drop_transition {
            continue;
        }
        let touching: Vec<usize> = t
            .pre
            .ones()
            .chain(t.post.ones())
            .filter(|&p| Some(p) != drop_place)
            .collect();
        for w in touching.windows(2) {
            let a = find(&mut parent, w[0]);
            let b = find(&mut parent, w[1]);
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut comp_ids: BTreeMap<usize, usize> = BTreeMap::new();
    let mut comp_of_place: Vec<Option<usize>> = vec![None; np];
    let mut sizes = Vec::new();
    for p in 0..np {
        if Some(p) == drop_place {
            continue;
        }
        let root = find(&mut parent, p);
        let id = *comp_ids.entry(root).or_insert_with(|| {
            sizes.push(0);
            sizes.len() - 1
        });
        comp_of_place[p] = Some(id);
        sizes[id] += 1;
    }
    Components { comp_of_place, sizes }
}

fn two_components(
    net: &NetWithBoundaries,
    drop_transition: Option<usize>,
    drop_place: Option<usize>,
) -> Option<Components> {
    let comps = components(net, drop_transition, drop_place);
    (comps.sizes.len() == 2).some_if(comps)
}

trait SomeIf: Sized {
    fn some_if<T>(self, v: T) -> Option<T>;
}

impl SomeIf for bool {
    fn some_if<T>(self, v: T) -> Option<T> {
        if self {
            Some(v)
        } else {
            None
        }
    }
}

fn split(piece: Piece, path: &str, ctx: &mut Ctx) -> Result<WiringExpr, DecomposeError> {
    if piece.net.num_places() <= ctx.budget {
        return make_leaf(piece, path, ctx);
    }
    // already disconnected: peel off the first component
    let whole = components(&piece.net, None, None);
    if whole.sizes.len() >= 2 {
        return disjoint_split(piece, whole, path, ctx);
    }
    let mut probes = 0;
    let t_search = separating_transition(&piece.net);
    probes += t_search.candidates_probed;
    if let Some((id, balance)) = t_search.found {
        let ti = piece.net.transitions().iter().position(|t| t.id == id).unwrap();
        return transition_cut(piece, ti, balance, probes, path, ctx);
    }
    let p_search = separating_place(&piece.net);
    probes += p_search.candidates_probed;
    if let Some((id, balance)) = p_search.found {
        let pi = piece.net.place_index(&id).unwrap();
        return place_cut(piece, pi, Some(balance), false, probes, path, ctx);
    }
    // forced removal: the place with the cheapest resulting middle boundary
    let mut best: Option<(usize, String, usize)> = None;
    for pi in 0..piece.net.num_places() {
        probes += 1;
        let width = place_cut_width(&piece.net, pi);
        let id = piece.net.places()[pi].clone();
        let better = match &best {
            None => true,
            Some((w, bid, _)) => width < *w || (width == *w && id < *bid),
        };
        if better {
            best = Some((width, id, pi));
        }
    }
    let (_, _, pi) = best.expect("nets above the leaf budget have places");
    place_cut(piece, pi, None, true, probes, path, ctx)
}

fn make_leaf(piece: Piece, path: &str, ctx: &mut Ctx) -> Result<WiringExpr, DecomposeError> {
    let var = ctx.fresh_var();
    let dontcare = piece
        .targets
        .iter()
        .filter(|t| matches!(t, PlaceTarget::DontCare))
        .count();
    if dontcare > 16 {
        return Err(DecomposeError::TargetExplosion { var, dontcare });
    }
    let finals = expand_targets(&piece.targets);
    ctx.record(StepReport {
        path: path.to_string(),
        kind: CutKind::Leaf { var: var.clone() },
        balance: None,
        middle_width: 0,
        piece_places: piece.net.num_places(),
        candidates_probed: 0,
    });
    ctx.assign
        .assign(&var, piece.net, vec![piece.initial], finals);
    Ok(WiringExpr::var(var))
}

/// All markings consistent with the per-place targets.
pub fn expand_targets(targets: &[PlaceTarget]) -> Vec<Marking> {
    let free: Vec<usize> = targets
        .iter()
        .enumerate()
        .filter_map(|(p, t)| matches!(t, PlaceTarget::DontCare).then_some(p))
        .collect();
    let base = Bits::from_indices(
        targets.len(),
        targets
            .iter()
            .enumerate()
            .filter_map(|(p, t)| matches!(t, PlaceTarget::Yes).then_some(p)),
    );
    (0..1usize << free.len())
        .map(|mask| {
            let mut m = base.clone();
            for (bit, &p) in free.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    m.set(p);
                }
            }
            m
        })
        .collect()
}

fn disjoint_split(
    piece: Piece,
    comps: Components,
    path: &str,
    ctx: &mut Ctx,
) -> Result<WiringExpr, DecomposeError> {
    // first component on the left of the tensor, everything else on the right
    let mut first_places = Vec::new();
    let mut rest_places = Vec::new();
    for (p, id) in piece.net.places().iter().enumerate() {
        if comps.comp_of_place[p] == Some(0) {
            first_places.push(id.clone());
        } else {
            rest_places.push(id.clone());
        }
    }
    let mut first_ts = Vec::new();
    let mut rest_ts = Vec::new();
    for ti in 0..piece.net.transitions().len() {
        let spec = TSpec::of(&piece.net, ti);
        debug_assert!(spec.source.is_empty() && spec.target.is_empty());
        let in_first = match spec.pre.first().or(spec.post.first()) {
            Some(id) => first_places.contains(id),
            None => true, // placeless transitions ride along with the first component
        };
        if in_first {
            first_ts.push(spec);
        } else {
            rest_ts.push(spec);
        }
    }
    ctx.record(StepReport {
        path: path.to_string(),
        kind: CutKind::DisjointSplit,
        balance: None,
        middle_width: 0,
        piece_places: piece.net.num_places(),
        candidates_probed: 0,
    });
    let first = build_piece(0, 0, first_places, first_ts, &piece);
    let rest = build_piece(0, 0, rest_places, rest_ts, &piece);
    let left = split(first, &format!("{path}.L"), ctx)?;
    let right = split(rest, &format!("{path}.R"), ctx)?;
    Ok(WiringExpr::tensor(left, right))
}

fn transition_cut(
    piece: Piece,
    ti: usize,
    balance: usize,
    probes: usize,
    path: &str,
    ctx: &mut Ctx,
) -> Result<WiringExpr, DecomposeError> {
    let comps = two_components(&piece.net, Some(ti), None).expect("search found a separating transition");
    let k = piece.net.left_width();
    let l = piece.net.right_width();
    let cut = TSpec::of(&piece.net, ti);

    // which component index each transition (other than the cut) lives in;
    // placeless transitions ride with the left child
    let side_of = |spec: &TSpec, left_comp: usize| -> bool {
        match spec.pre.first().or(spec.post.first()) {
            Some(id) => {
                let p = piece.net.place_index(id).unwrap();
                comps.comp_of_place[p] == Some(left_comp)
            }
            None => true,
        }
    };

    // middle width per orientation: the cut port, plus a relay per stranded
    // boundary port
    let width_for = |left_comp: usize| -> usize {
        let mut stranded = 0;
        for tj in 0..piece.net.transitions().len() {
            if tj == ti {
                continue;
            }
            let spec = TSpec::of(&piece.net, tj);
            if side_of(&spec, left_comp) {
                stranded += spec.target.len(); // right ports reached through the right child
            } else {
                stranded += spec.source.len(); // left ports reached through the left child
            }
        }
        1 + stranded
    };
    let smallest_place_comp = comps.comp_of_place.iter().flatten().next().copied().unwrap();
    let left_comp = match (width_for(0), width_for(1)) {
        (a, b) if a < b => 0,
        (a, b) if b < a => 1,
        _ => smallest_place_comp,
    };

    let mut left_places = Vec::new();
    let mut right_places = Vec::new();
    for (p, id) in piece.net.places().iter().enumerate() {
        if comps.comp_of_place[p] == Some(left_comp) {
            left_places.push(id.clone());
        } else {
            right_places.push(id.clone());
        }
    }

    // middle port layout: 0 = the cut transition, then relays for the left
    // ports of right-child transitions, then relays for the right ports of
    // left-child transitions
    let mut stranded_left: Vec<usize> = Vec::new(); // piece-left ports owned on the right side
    let mut stranded_right: Vec<usize> = Vec::new(); // piece-right ports owned on the left side
    for tj in 0..piece.net.transitions().len() {
        if tj == ti {
            continue;
        }
        let spec = TSpec::of(&piece.net, tj);
        if side_of(&spec, left_comp) {
            stranded_right.extend(&spec.target);
        } else {
            stranded_left.extend(&spec.source);
        }
    }
    stranded_left.sort_unstable();
    stranded_right.sort_unstable();
    let mid_of_left_port = |x: usize| 1 + stranded_left.binary_search(&x).unwrap();
    let mid_of_right_port =
        |y: usize| 1 + stranded_left.len() + stranded_right.binary_search(&y).unwrap();
    let m = 1 + stranded_left.len() + stranded_right.len();

    let mut left_ts: Vec<TSpec> = Vec::new();
    let mut right_ts: Vec<TSpec> = Vec::new();
    for tj in 0..piece.net.transitions().len() {
        if tj == ti {
            continue;
        }
        let mut spec = TSpec::of(&piece.net, tj);
        if side_of(&spec, left_comp) {
            spec.target = spec.target.iter().map(|&y| mid_of_right_port(y)).collect();
            left_ts.push(spec);
        } else {
            spec.source = spec.source.iter().map(|&x| mid_of_left_port(x)).collect();
            right_ts.push(spec);
        }
    }
    // the cut transition itself, split at the boundary
    let (cut_pre_l, cut_pre_r): (Vec<String>, Vec<String>) =
        cut.pre.iter().cloned().partition(|id| left_places.contains(id));
    let (cut_post_l, cut_post_r): (Vec<String>, Vec<String>) =
        cut.post.iter().cloned().partition(|id| left_places.contains(id));
    left_ts.push(TSpec {
        id: format!("{}:L", cut.id),
        pre: cut_pre_l,
        post: cut_post_l,
        source: cut.source.clone(),
        target: vec![0],
    });
    right_ts.push(TSpec {
        id: format!("{}:R", cut.id),
        pre: cut_pre_r,
        post: cut_post_r,
        source: vec![0],
        target: cut.target.clone(),
    });
    for &x in &stranded_left {
        left_ts.push(TSpec {
            id: format!("relay.l{x}"),
            pre: vec![],
            post: vec![],
            source: vec![x],
            target: vec![mid_of_left_port(x)],
        });
    }
    for &y in &stranded_right {
        right_ts.push(TSpec {
            id: format!("relay.r{y}"),
            pre: vec![],
            post: vec![],
            source: vec![mid_of_right_port(y)],
            target: vec![y],
        });
    }

    ctx.record(StepReport {
        path: path.to_string(),
        kind: CutKind::TransitionCut { id: cut.id.clone() },
        balance: Some(balance),
        middle_width: m,
        piece_places: piece.net.num_places(),
        candidates_probed: probes,
    });
    let left_piece = build_piece(k, m, left_places, left_ts, &piece);
    let right_piece = build_piece(m, l, right_places, right_ts, &piece);
    let left = split(left_piece, &format!("{path}.L"), ctx)?;
    let right = split(right_piece, &format!("{path}.R"), ctx)?;
    Ok(WiringExpr::seq(left, right))
}

/// Middle width a place-cut at `pi` would need: one port per severed
/// transition, one relay per boundary port stranded on the wrong side.
fn place_cut_width(net: &NetWithBoundaries, pi: usize) -> usize {
    let mut width = 0;
    for t in net.transitions() {
        let spec_places = t.pre.ones().chain(t.post.ones()).collect::<Vec<_>>();
        let touches = t.pre.get(pi) || t.post.get(pi);
        let only_pi = spec_places.iter().all(|&p| p == pi);
        if only_pi {
            // absorbed into the carrier; its right ports need relays
            width += t.target.count_ones() as usize;
        } else {
            if touches {
                width += 1;
            }
            // surviving transitions keep right ports but their left ports
            // must cross the carrier
            width += t.source.count_ones() as usize;
        }
    }
    width
}

fn place_cut(
    piece: Piece,
    pi: usize,
    balance: Option<usize>,
    forced: bool,
    probes: usize,
    path: &str,
    ctx: &mut Ctx,
) -> Result<WiringExpr, DecomposeError> {
    let comps = components(&piece.net, None, Some(pi));
    let k = piece.net.left_width();
    let l = piece.net.right_width();
    let place_id = piece.net.places()[pi].clone();
    let num_comps = comps.sizes.len();

    // classify transitions
    let mut absorbed: Vec<TSpec> = Vec::new(); // every place arc on the cut place
    let mut severed: Vec<(usize, TSpec)> = Vec::new(); // (component, spec minus the cut place arcs)
    let mut interior: Vec<(usize, TSpec)> = Vec::new();
    for ti in 0..piece.net.transitions().len() {
        let spec = TSpec::of(&piece.net, ti);
        let others: Vec<&String> = spec
            .pre
            .iter()
            .chain(&spec.post)
            .filter(|id| **id != place_id)
            .collect();
        if others.is_empty() {
            absorbed.push(spec);
        } else {
            let comp = comps.comp_of_place[piece.net.place_index(others[0]).unwrap()].unwrap();
            if spec.pre.contains(&place_id) || spec.post.contains(&place_id) {
                severed.push((comp, spec));
            } else {
                interior.push((comp, spec));
            }
        }
    }

    // middle port layout, grouped by component so the tensor's left boundary
    // concatenates cleanly: per component, one port per severed transition
    // then one per crossing left port; relays for the right ports of
    // absorbed transitions ride with component 0
    let mut mid = 0usize;
    let mut stub_port: BTreeMap<String, usize> = BTreeMap::new();
    let mut left_relay: BTreeMap<usize, usize> = BTreeMap::new();
    let mut absorbed_relay: BTreeMap<usize, usize> = BTreeMap::new();
    let mut comp_mid_base: Vec<usize> = Vec::new();
    for c in 0..num_comps {
        comp_mid_base.push(mid);
        for (cc, spec) in &severed {
            if *cc == c {
                stub_port.insert(spec.id.clone(), mid);
                mid += 1;
            }
        }
        for (cc, spec) in severed.iter().chain(interior.iter()) {
            if *cc == c {
                for &x in &spec.source {
                    left_relay.insert(x, mid);
                    mid += 1;
                }
            }
        }
        if c == 0 {
            for spec in &absorbed {
                for &y in &spec.target {
                    absorbed_relay.insert(y, mid);
                    mid += 1;
                }
            }
        }
    }
    let m = mid;

    // carrier: the cut place, the absorbed transitions, stubs for severed
    // arcs and relays for crossing left ports
    let mut carrier_ts: Vec<TSpec> = Vec::new();
    for spec in &absorbed {
        carrier_ts.push(TSpec {
            id: spec.id.clone(),
            pre: spec.pre.clone(),
            post: spec.post.clone(),
            source: spec.source.clone(),
            target: spec.target.iter().map(|y| absorbed_relay[y]).collect(),
        });
    }
    for (_, spec) in &severed {
        carrier_ts.push(TSpec {
            id: format!("cut.{}", spec.id),
            pre: spec.pre.iter().filter(|id| **id == place_id).cloned().collect(),
            post: spec.post.iter().filter(|id| **id == place_id).cloned().collect(),
            source: vec![],
            target: vec![stub_port[&spec.id]],
        });
    }
    for (&x, &port) in &left_relay {
        carrier_ts.push(TSpec {
            id: format!("relay.l{x}"),
            pre: vec![],
            post: vec![],
            source: vec![x],
            target: vec![port],
        });
    }
    let carrier = build_piece(k, m, vec![place_id.clone()], carrier_ts, &piece);

    // children: one per component, left boundary = its block of the middle
    let mut child_pieces: Vec<Piece> = Vec::new();
    let mut produced_right: Vec<usize> = Vec::new();
    for c in 0..num_comps {
        let places: Vec<String> = piece
            .net
            .places()
            .iter()
            .enumerate()
            .filter_map(|(p, id)| (comps.comp_of_place[p] == Some(c)).then(|| id.clone()))
            .collect();
        let base = comp_mid_base[c];
        let next_base = if c + 1 < num_comps { comp_mid_base[c + 1] } else { m };
        let block = next_base - base;
        let mut ts: Vec<TSpec> = Vec::new();
        let mut right_ports: Vec<usize> = Vec::new();
        for (cc, spec) in severed.iter().chain(interior.iter()) {
            if *cc != c {
                continue;
            }
            let mut local = TSpec {
                id: spec.id.clone(),
                pre: spec.pre.iter().filter(|id| **id != place_id).cloned().collect(),
                post: spec.post.iter().filter(|id| **id != place_id).cloned().collect(),
                source: spec.source.iter().map(|x| left_relay[x] - base).collect(),
                target: vec![],
            };
            if let Some(&stub) = stub_port.get(&spec.id) {
                local.source.push(stub - base);
            }
            right_ports.extend(&spec.target);
            local.target = spec.target.clone(); // rewritten below once the block's right ports are known
            ts.push(local);
        }
        if c == 0 {
            for spec in &absorbed {
                for &y in &spec.target {
                    ts.push(TSpec {
                        id: format!("relay.r{y}"),
                        pre: vec![],
                        post: vec![],
                        source: vec![absorbed_relay[&y] - base],
                        target: vec![y],
                    });
                    right_ports.push(y);
                }
            }
        }
        right_ports.sort_unstable();
        right_ports.dedup();
        for t in &mut ts {
            t.target = t
                .target
                .iter()
                .map(|y| right_ports.binary_search(y).unwrap())
                .collect();
        }
        produced_right.extend(&right_ports);
        child_pieces.push(build_piece(block, right_ports.len(), places, ts, &piece));
    }

    ctx.record(StepReport {
        path: path.to_string(),
        kind: if forced {
            CutKind::ForcedRemoval { id: place_id.clone() }
        } else {
            CutKind::PlaceCut { id: place_id.clone() }
        },
        balance,
        middle_width: m,
        piece_places: piece.net.num_places(),
        candidates_probed: probes,
    });

    let carrier_expr = make_leaf(carrier, &format!("{path}.carrier"), ctx)?;
    let mut exprs: Vec<WiringExpr> = Vec::new();
    for (i, child) in child_pieces.into_iter().enumerate() {
        exprs.push(split(child, &format!("{path}.c{i}"), ctx)?);
    }
    let combined = match exprs.len() {
        0 => {
            // no components at all: the piece was a single place
            return Ok(carrier_expr);
        }
        _ => exprs
            .into_iter()
            .rev()
            .reduce(|acc, e| WiringExpr::tensor(e, acc))
            .unwrap(),
    };
    // permutation adapter if the concatenated right boundary is out of order
    let adapted = if produced_right.windows(2).all(|w| w[0] < w[1]) {
        combined
    } else {
        let mut sigma = NetWithBoundaries::new(produced_right.len(), l);
        for (i, &y) in produced_right.iter().enumerate() {
            sigma.add_transition(format!("perm.{i}"), &[], &[], &[i], &[y]);
        }
        let sigma_piece = Piece {
            net: sigma,
            initial: Bits::new(0),
            targets: vec![],
        };
        let sigma_expr = make_leaf(sigma_piece, &format!("{path}.perm"), ctx)?;
        WiringExpr::seq(combined, sigma_expr)
    };
    Ok(WiringExpr::seq(carrier_expr, adapted))
}
