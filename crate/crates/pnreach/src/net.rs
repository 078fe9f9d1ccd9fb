//! Nets with boundaries and their 1-bounded step semantics.
//!
//! A net `N : k -> l` has `k` left and `l` right boundary ports besides its
//! places and transitions. Transitions may attach to boundary ports; at most
//! one transition can be attached to any given port, which keeps sequential
//! composition simple. A step fires a mutually independent set of transitions
//! at once, and the boundary ports touched by the fired set form the label of
//! the step. Ordinary Petri nets are the special case `k = l = 0`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::bits::Bits;

/// Hard cap on a single boundary side, so labels fit in a machine word.
pub const MAX_BOUNDARY_WIDTH: usize = 63;

/// A marking is the set of marked places (at most one token per place).
pub type Marking = Bits;

/// Per-place requirement on the target marking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaceTarget {
    Yes,
    No,
    DontCare,
}

/// A closed net together with its initial marking and per-place targets:
/// the input of the end-to-end pipeline.
#[derive(Debug, Clone)]
pub struct MarkedNet {
    pub net: NetWithBoundaries,
    pub initial: Marking,
    pub targets: Vec<PlaceTarget>,
}

/// A step label: the left- and right-boundary ports touched by the fired set,
/// as bit masks of width `k` and `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StepLabel {
    pub left: u64,
    pub right: u64,
}

impl StepLabel {
    pub fn silent() -> Self {
        StepLabel { left: 0, right: 0 }
    }

    pub fn is_silent(&self) -> bool {
        self.left == 0 && self.right == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub id: String,
    /// Pre-set, as place indices of the owning net.
    pub pre: Bits,
    /// Post-set, as place indices of the owning net.
    pub post: Bits,
    /// Left-boundary ports, as a mask over `0..k`.
    pub source: u64,
    /// Right-boundary ports, as a mask over `0..l`.
    pub target: u64,
}

impl Transition {
    /// Places read or written by this transition.
    pub fn footprint(&self) -> Bits {
        self.pre.union(&self.post)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetWithBoundaries {
    left_width: usize,
    right_width: usize,
    places: Vec<String>,
    transitions: Vec<Transition>,
}

/// A pair of mutually independent transition sets across a shared boundary,
/// with the right ports of the first matching the left ports of the second.
/// Sets are sorted transition indices into the respective nets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Synchronisation {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum ComposeError {
    #[error("boundary width mismatch: left operand is ..->{left_right}, right operand is {right_left}->..")]
    WidthMismatch { left_right: usize, right_left: usize },
}

/// One invariant violation found by [`NetWithBoundaries::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicatePlaceId(String),
    DuplicateTransitionId(String),
    PortShared {
        side: BoundarySide,
        port: usize,
        first: String,
        second: String,
    },
    WidthTooLarge { side: BoundarySide, width: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundarySide {
    Left,
    Right,
}

impl fmt::Display for BoundarySide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundarySide::Left => write!(f, "left"),
            BoundarySide::Right => write!(f, "right"),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicatePlaceId(id) => write!(f, "duplicate place id '{id}'"),
            Violation::DuplicateTransitionId(id) => write!(f, "duplicate transition id '{id}'"),
            Violation::PortShared { side, port, first, second } => write!(
                f,
                "{side} port {port} multiply connected: transitions '{first}' and '{second}'"
            ),
            Violation::WidthTooLarge { side, width } => write!(
                f,
                "{side} boundary width {width} exceeds the supported maximum {MAX_BOUNDARY_WIDTH}"
            ),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl NetWithBoundaries {
    pub fn new(left_width: usize, right_width: usize) -> Self {
        NetWithBoundaries {
            left_width,
            right_width,
            places: Vec::new(),
            transitions: Vec::new(),
        }
    }

    pub fn left_width(&self) -> usize {
        self.left_width
    }

    pub fn right_width(&self) -> usize {
        self.right_width
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn num_places(&self) -> usize {
        self.places.len()
    }

    pub fn place_index(&self, id: &str) -> Option<usize> {
        self.places.iter().position(|p| p == id)
    }

    pub fn add_place(&mut self, id: impl Into<String>) -> usize {
        self.places.push(id.into());
        // widen existing pre/post sets
        let w = self.places.len();
        for t in &mut self.transitions {
            t.pre = Bits::from_indices(w, t.pre.ones());
            t.post = Bits::from_indices(w, t.post.ones());
        }
        w - 1
    }

    pub fn add_transition(
        &mut self,
        id: impl Into<String>,
        pre: &[usize],
        post: &[usize],
        source_ports: &[usize],
        target_ports: &[usize],
    ) -> usize {
        let w = self.places.len();
        for &p in pre.iter().chain(post) {
            assert!(p < w, "place index {p} out of range");
        }
        let mut source = 0u64;
        for &p in source_ports {
            assert!(p < self.left_width, "left port {p} out of range");
            source |= 1 << p;
        }
        let mut target = 0u64;
        for &p in target_ports {
            assert!(p < self.right_width, "right port {p} out of range");
            target |= 1 << p;
        }
        self.transitions.push(Transition {
            id: id.into(),
            pre: Bits::from_indices(w, pre.iter().copied()),
            post: Bits::from_indices(w, post.iter().copied()),
            source,
            target,
        });
        self.transitions.len() - 1
    }

    /// Marking with exactly the given place ids set. Panics on unknown ids;
    /// meant for generators and tests.
    pub fn marking_of(&self, ids: &[&str]) -> Marking {
        Bits::from_indices(
            self.places.len(),
            ids.iter().map(|id| {
                self.place_index(id)
                    .unwrap_or_else(|| panic!("unknown place '{id}'"))
            }),
        )
    }

    pub fn empty_marking(&self) -> Marking {
        Bits::new(self.places.len())
    }

    /// Checks every structural invariant and reports all violations found.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut seen = BTreeSet::new();
        for p in &self.places {
            if !seen.insert(p.clone()) {
                violations.push(Violation::DuplicatePlaceId(p.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for t in &self.transitions {
            if !seen.insert(t.id.clone()) {
                violations.push(Violation::DuplicateTransitionId(t.id.clone()));
            }
        }
        for (side, width) in [
            (BoundarySide::Left, self.left_width),
            (BoundarySide::Right, self.right_width),
        ] {
            if width > MAX_BOUNDARY_WIDTH {
                violations.push(Violation::WidthTooLarge { side, width });
            }
        }
        // at most one transition per boundary port
        for (side, sel) in [
            (BoundarySide::Left, &(|t: &Transition| t.source) as &dyn Fn(&Transition) -> u64),
            (BoundarySide::Right, &(|t: &Transition| t.target)),
        ] {
            let width = match side {
                BoundarySide::Left => self.left_width,
                BoundarySide::Right => self.right_width,
            };
            for port in 0..width.min(64) {
                let mut owner: Option<&Transition> = None;
                for t in &self.transitions {
                    if sel(t) >> port & 1 == 1 {
                        if let Some(first) = owner {
                            violations.push(Violation::PortShared {
                                side,
                                port,
                                first: first.id.clone(),
                                second: t.id.clone(),
                            });
                        } else {
                            owner = Some(t);
                        }
                    }
                }
            }
        }
        ValidationReport { violations }
    }

    /// The transition attached to the given right-boundary port, if any.
    fn right_port_owner(&self, port: usize) -> Option<usize> {
        self.transitions
            .iter()
            .position(|t| t.target >> port & 1 == 1)
    }

    /// The transition attached to the given left-boundary port, if any.
    fn left_port_owner(&self, port: usize) -> Option<usize> {
        self.transitions
            .iter()
            .position(|t| t.source >> port & 1 == 1)
    }

    /// All steps enabled at `marking`: every mutually independent set of
    /// individually enabled transitions yields one `(label, successor)` pair.
    /// The empty set always fires, so the silent self-loop is always present.
    /// Duplicate `(label, successor)` pairs arising from distinct firing sets
    /// are collapsed.
    pub fn step_successors(&self, marking: &Marking) -> Vec<(StepLabel, Marking)> {
        debug_assert_eq!(marking.width(), self.places.len());
        let enabled: Vec<&Transition> = self
            .transitions
            .iter()
            .filter(|t| t.pre.is_subset_of(marking) && t.post.is_disjoint(marking))
            .collect();
        let mut out: BTreeSet<(u64, u64, Marking)> = BTreeSet::new();
        let width = self.places.len();
        // Backtracking over the enabled transitions; a candidate conflicts
        // with the chosen set iff its footprint overlaps the accumulated one.
        fn go(
            enabled: &[&Transition],
            i: usize,
            footprint: &Bits,
            pre: &Bits,
            post: &Bits,
            left: u64,
            right: u64,
            marking: &Marking,
            out: &mut BTreeSet<(u64, u64, Marking)>,
        ) {
            if i == enabled.len() {
                let succ = marking.difference(pre).union(post);
                out.insert((left, right, succ));
                return;
            }
            go(enabled, i + 1, footprint, pre, post, left, right, marking, out);
            let t = enabled[i];
            let fp = t.footprint();
            if fp.is_disjoint(footprint) {
                go(
                    enabled,
                    i + 1,
                    &footprint.union(&fp),
                    &pre.union(&t.pre),
                    &post.union(&t.post),
                    left | t.source,
                    right | t.target,
                    marking,
                    out,
                );
            }
        }
        go(
            &enabled,
            0,
            &Bits::new(width),
            &Bits::new(width),
            &Bits::new(width),
            0,
            0,
            marking,
            &mut out,
        );
        out.into_iter()
            .map(|(left, right, succ)| (StepLabel { left, right }, succ))
            .collect()
    }

    /// The minimal non-trivial synchronisations between `self : k -> l` and
    /// `other : l -> m`.
    ///
    /// Each synchronisation is the forced closure of one of its members:
    /// boundary ports demanded on one side pull in the unique transition
    /// attached on the other side (ports are attached to at most one
    /// transition) until the port sets match. Closures that demand an
    /// unattached port, or whose sides are not mutually independent, yield
    /// no synchronisation.
    pub fn minimal_synchronisations(
        &self,
        other: &NetWithBoundaries,
    ) -> Result<Vec<Synchronisation>, ComposeError> {
        if self.right_width != other.left_width {
            return Err(ComposeError::WidthMismatch {
                left_right: self.right_width,
                right_left: other.left_width,
            });
        }
        let mut found: BTreeSet<Synchronisation> = BTreeSet::new();
        let seeds = (0..self.transitions.len())
            .map(|i| (true, i))
            .chain((0..other.transitions.len()).map(|i| (false, i)));
        'seed: for (in_left, seed) in seeds {
            let mut left: BTreeSet<usize> = BTreeSet::new();
            let mut right: BTreeSet<usize> = BTreeSet::new();
            if in_left {
                left.insert(seed);
            } else {
                right.insert(seed);
            }
            loop {
                let need: u64 = left.iter().map(|&t| self.transitions[t].target).fold(0, |a, b| a | b);
                let have: u64 = right.iter().map(|&t| other.transitions[t].source).fold(0, |a, b| a | b);
                if need == have {
                    break;
                }
                let mut grown = false;
                for port in 0..self.right_width {
                    let bit = 1u64 << port;
                    if need & bit != 0 && have & bit == 0 {
                        match other.left_port_owner(port) {
                            Some(t) => {
                                grown |= right.insert(t);
                            }
                            None => continue 'seed,
                        }
                    } else if have & bit != 0 && need & bit == 0 {
                        match self.right_port_owner(port) {
                            Some(t) => {
                                grown |= left.insert(t);
                            }
                            None => continue 'seed,
                        }
                    }
                }
                if !grown {
                    // port demanded but attachment already present: impossible
                    continue 'seed;
                }
            }
            if !mutually_independent(self, &left) || !mutually_independent(other, &right) {
                continue;
            }
            found.insert(Synchronisation {
                left: left.into_iter().collect(),
                right: right.into_iter().collect(),
            });
        }
        Ok(found.into_iter().collect())
    }

    /// Sequential composition along the shared boundary. The places are the
    /// tagged disjoint union (`L.`/`R.` prefixes) and the transitions are the
    /// minimal synchronisations, in the order returned by
    /// [`minimal_synchronisations`].
    pub fn compose_seq(&self, other: &NetWithBoundaries) -> Result<NetWithBoundaries, ComposeError> {
        let syncs = self.minimal_synchronisations(other)?;
        let mut net = NetWithBoundaries::new(self.left_width, other.right_width);
        for p in &self.places {
            net.add_place(format!("L.{p}"));
        }
        for p in &other.places {
            net.add_place(format!("R.{p}"));
        }
        let off = self.places.len();
        for sync in &syncs {
            let id = sync_id(self, other, sync);
            let mut pre = Vec::new();
            let mut post = Vec::new();
            let mut source = Vec::new();
            let mut target = Vec::new();
            for &t in &sync.left {
                let t = &self.transitions[t];
                pre.extend(t.pre.ones());
                post.extend(t.post.ones());
                source.extend((0..self.left_width).filter(|p| t.source >> p & 1 == 1));
            }
            for &t in &sync.right {
                let t = &other.transitions[t];
                pre.extend(t.pre.ones().map(|p| p + off));
                post.extend(t.post.ones().map(|p| p + off));
                target.extend((0..other.right_width).filter(|p| t.target >> p & 1 == 1));
            }
            net.add_transition(id, &pre, &post, &source, &target);
        }
        Ok(net)
    }

    /// Parallel composition: disjoint union with `other`'s boundary ports
    /// shifted past `self`'s.
    pub fn compose_tensor(&self, other: &NetWithBoundaries) -> NetWithBoundaries {
        let mut net = NetWithBoundaries::new(
            self.left_width + other.left_width,
            self.right_width + other.right_width,
        );
        for p in &self.places {
            net.add_place(format!("L.{p}"));
        }
        for p in &other.places {
            net.add_place(format!("R.{p}"));
        }
        let off = self.places.len();
        for t in &self.transitions {
            let pre: Vec<_> = t.pre.ones().collect();
            let post: Vec<_> = t.post.ones().collect();
            let source: Vec<_> = (0..self.left_width).filter(|p| t.source >> p & 1 == 1).collect();
            let target: Vec<_> = (0..self.right_width).filter(|p| t.target >> p & 1 == 1).collect();
            net.add_transition(format!("L.{}", t.id), &pre, &post, &source, &target);
        }
        for t in &other.transitions {
            let pre: Vec<_> = t.pre.ones().map(|p| p + off).collect();
            let post: Vec<_> = t.post.ones().map(|p| p + off).collect();
            let source: Vec<_> = (0..other.left_width)
                .filter(|p| t.source >> p & 1 == 1)
                .map(|p| p + self.left_width)
                .collect();
            let target: Vec<_> = (0..other.right_width)
                .filter(|p| t.target >> p & 1 == 1)
                .map(|p| p + self.right_width)
                .collect();
            net.add_transition(format!("R.{}", t.id), &pre, &post, &source, &target);
        }
        net
    }

    /// Lifts a marking of `self` and one of `other` to a marking of the
    /// composite (either composition: the place order is `self`'s places
    /// then `other`'s).
    pub fn join_markings(&self, mine: &Marking, other: &NetWithBoundaries, theirs: &Marking) -> Marking {
        let total = self.places.len() + other.places.len();
        let mut m = Bits::new(total);
        for i in mine.ones() {
            m.set(i);
        }
        for i in theirs.ones() {
            m.set(i + self.places.len());
        }
        m
    }
}

fn mutually_independent(net: &NetWithBoundaries, set: &BTreeSet<usize>) -> bool {
    let mut footprint = Bits::new(net.num_places());
    for &t in set {
        let fp = net.transitions[t].footprint();
        if !fp.is_disjoint(&footprint) {
            return false;
        }
        footprint.union_with(&fp);
    }
    true
}

fn sync_id(left: &NetWithBoundaries, right: &NetWithBoundaries, sync: &Synchronisation) -> String {
    let l: Vec<&str> = sync.left.iter().map(|&t| left.transitions[t].id.as_str()).collect();
    let r: Vec<&str> = sync.right.iter().map(|&t| right.transitions[t].id.as_str()).collect();
    format!("({}|{})", l.join("+"), r.join("+"))
}

/// Strips the `L.`/`R.` origin tags added by the composition operations,
/// recovering the identifier the place had in the leaf net it came from.
pub fn strip_origin_tags(id: &str) -> &str {
    let mut s = id;
    loop {
        if let Some(rest) = s.strip_prefix("L.").or_else(|| s.strip_prefix("R.")) {
            s = rest;
        } else {
            return s;
        }
    }
}

/// Structure of a net with places renumbered by sorted identifier and
/// transitions sorted; two nets get equal canonical forms iff the sorted-id
/// renumbering is an isomorphism between them. Generators emit identifiers
/// chosen to make this comparison sound.
#[derive(Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub left_width: usize,
    pub right_width: usize,
    pub num_places: usize,
    pub transitions: Vec<(Vec<usize>, Vec<usize>, u64, u64)>,
}

pub fn canonical_form(net: &NetWithBoundaries) -> CanonicalForm {
    let mut order: Vec<usize> = (0..net.num_places()).collect();
    order.sort_by(|&a, &b| net.places()[a].cmp(&net.places()[b]));
    let mut rank = vec![0usize; net.num_places()];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    let mut transitions: Vec<(Vec<usize>, Vec<usize>, u64, u64)> = net
        .transitions()
        .iter()
        .map(|t| {
            let mut pre: Vec<usize> = t.pre.ones().map(|p| rank[p]).collect();
            let mut post: Vec<usize> = t.post.ones().map(|p| rank[p]).collect();
            pre.sort_unstable();
            post.sort_unstable();
            (pre, post, t.source, t.target)
        })
        .collect();
    transitions.sort();
    CanonicalForm {
        left_width: net.left_width(),
        right_width: net.right_width(),
        num_places: net.num_places(),
        transitions,
    }
}
