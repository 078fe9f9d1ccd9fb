//! Boundary-labelled automata: translation from nets, the two product
//! constructions, and weak closure.
//!
//! An automaton `A : k -> l` reads labels from `{0,1}^k x {0,1}^l`. Labels are
//! encoded as assignments to `k + l` decision-diagram variables, left-boundary
//! bits first. The all-zero label is the silent label: it witnesses purely
//! internal activity, including firing nothing at all.

mod dot;
mod minimise;

pub use dot::{dfa_to_dot, nfa_to_dot, DotOptions};
pub use minimise::{epsmin, is_accepting_verdict, minimise, MinimalDfa, Signature, WidthError};

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::dd::{DdRef, DdStore};
use crate::net::{ComposeError, Marking, NetWithBoundaries};

/// A nondeterministic automaton with boundaries. State transition functions
/// are per-state decision diagrams over the label bits; all diagrams live in
/// the automaton's own store.
#[derive(Debug, Clone)]
pub struct BoundedNfa {
    left_width: usize,
    right_width: usize,
    store: DdStore,
    delta: Vec<DdRef>,
    initial: Vec<u32>,
    finals: Vec<u32>,
    /// Human-readable state annotations (marking descriptions) for rendering.
    state_names: Option<Vec<String>>,
}

impl BoundedNfa {
    pub fn new(left_width: usize, right_width: usize) -> Self {
        assert!(left_width + right_width <= 63, "label width too large");
        BoundedNfa {
            left_width,
            right_width,
            store: DdStore::new(),
            delta: Vec::new(),
            initial: Vec::new(),
            finals: Vec::new(),
            state_names: None,
        }
    }

    pub fn left_width(&self) -> usize {
        self.left_width
    }

    pub fn right_width(&self) -> usize {
        self.right_width
    }

    pub fn label_width(&self) -> u16 {
        (self.left_width + self.right_width) as u16
    }

    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    pub fn initial(&self) -> &[u32] {
        &self.initial
    }

    pub fn finals(&self) -> &[u32] {
        &self.finals
    }

    pub fn store(&self) -> &DdStore {
        &self.store
    }

    pub fn delta(&self, state: u32) -> DdRef {
        self.delta[state as usize]
    }

    pub(crate) fn deltas(&self) -> &[DdRef] {
        &self.delta
    }

    pub fn state_names(&self) -> Option<&[String]> {
        self.state_names.as_deref()
    }

    /// Successor states on one explicit label assignment.
    pub fn step(&self, state: u32, assignment: u64) -> &[u32] {
        self.store.lookup(self.delta[state as usize], assignment)
    }

    /// Subset simulation; a test and debugging aid, not a performance path.
    pub fn accepts(&self, word: &[u64]) -> bool {
        let mut current: BTreeSet<u32> = self.initial.iter().copied().collect();
        for &letter in word {
            current = current
                .iter()
                .flat_map(|&s| self.step(s, letter).iter().copied())
                .collect();
            if current.is_empty() {
                return false;
            }
        }
        current.iter().any(|s| self.finals.binary_search(s).is_ok())
    }

    /// Builds an automaton directly from parts; states are `0..delta.len()`.
    pub fn from_parts(
        left_width: usize,
        right_width: usize,
        store: DdStore,
        delta: Vec<DdRef>,
        mut initial: Vec<u32>,
        mut finals: Vec<u32>,
    ) -> Self {
        assert!(left_width + right_width <= 63, "label width too large");
        initial.sort_unstable();
        initial.dedup();
        finals.sort_unstable();
        finals.dedup();
        BoundedNfa {
            left_width,
            right_width,
            store,
            delta,
            initial,
            finals,
            state_names: None,
        }
    }
}

/// Translates a net with boundaries into its automaton: states are the
/// markings reachable from the initial markings under the step semantics,
/// transitions are the step edges, and the final states are the reachable
/// final markings (possibly none, in which case the language is empty).
pub fn net_to_nfa(
    net: &NetWithBoundaries,
    initial_markings: &[Marking],
    final_markings: &[Marking],
) -> BoundedNfa {
    assert!(!initial_markings.is_empty(), "at least one initial marking required");
    let k = net.left_width();
    let width = (k + net.right_width()) as u16;
    let mut nfa = BoundedNfa::new(net.left_width(), net.right_width());
    let final_set: BTreeSet<&Marking> = final_markings.iter().collect();

    let init: BTreeSet<Marking> = initial_markings.iter().cloned().collect();
    let mut index: HashMap<Marking, u32> = HashMap::new();
    let mut order: Vec<Marking> = Vec::new();
    let mut queue: VecDeque<u32> = VecDeque::new();
    for m in init {
        let i = order.len() as u32;
        index.insert(m.clone(), i);
        order.push(m);
        queue.push_back(i);
        nfa.initial.push(i);
    }
    while let Some(s) = queue.pop_front() {
        let marking = order[s as usize].clone();
        let mut root = nfa.store.empty();
        for (label, succ) in net.step_successors(&marking) {
            let t = match index.get(&succ) {
                Some(&t) => t,
                None => {
                    let t = order.len() as u32;
                    index.insert(succ.clone(), t);
                    order.push(succ);
                    queue.push_back(t);
                    t
                }
            };
            let assignment = label.left | label.right << k;
            let leaf = nfa.store.leaf(vec![t]);
            let path = nfa.store.single(assignment, width, leaf);
            root = nfa.store.union(root, path);
        }
        debug_assert_eq!(nfa.delta.len(), s as usize);
        nfa.delta.push(root);
    }
    for (m, &i) in &index {
        if final_set.contains(m) {
            nfa.finals.push(i);
        }
    }
    nfa.finals.sort_unstable();
    nfa.state_names = Some(order.iter().map(|m| format_marking(net, m)).collect());
    nfa
}

fn format_marking(net: &NetWithBoundaries, m: &Marking) -> String {
    let names: Vec<&str> = m.ones().map(|p| net.places()[p].as_str()).collect();
    format!("{{{}}}", names.join(","))
}

/// Shared machinery of the two product constructions: a breadth-first
/// exploration of reachable state pairs, where `join` builds the combined
/// transition diagram of a pair in the output store.
struct PairProduct {
    index: HashMap<(u32, u32), u32>,
    pairs: Vec<(u32, u32)>,
    queue: VecDeque<u32>,
}

impl PairProduct {
    fn new() -> Self {
        PairProduct {
            index: HashMap::new(),
            pairs: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    fn intern(&mut self, pair: (u32, u32)) -> u32 {
        match self.index.get(&pair) {
            Some(&i) => i,
            None => {
                let i = self.pairs.len() as u32;
                self.index.insert(pair, i);
                self.pairs.push(pair);
                self.queue.push_back(i);
                i
            }
        }
    }
}

/// Sequential product: a step of the composite synchronises the right
/// boundary of `a` with the left boundary of `b` on a shared middle label,
/// which is projected away. Only pairs reachable from the initial pairs are
/// built.
pub fn nfa_seq(a: &BoundedNfa, b: &BoundedNfa) -> Result<BoundedNfa, ComposeError> {
    if a.right_width != b.left_width {
        return Err(ComposeError::WidthMismatch {
            left_right: a.right_width,
            right_left: b.left_width,
        });
    }
    let k = a.left_width as u16;
    let l = a.right_width as u16;
    let m = b.right_width as u16;
    let mut out = BoundedNfa::new(a.left_width, b.right_width);
    let mut product = PairProduct::new();
    for &ia in &a.initial {
        for &ib in &b.initial {
            let i = product.intern((ia, ib));
            out.initial.push(i);
        }
    }
    // cached imports into the output store: a keeps its variables, b's are
    // shifted so its left boundary lines up with a's right
    let mut a_cache: Vec<Option<DdRef>> = vec![None; a.delta.len()];
    let mut b_cache: Vec<Option<DdRef>> = vec![None; b.delta.len()];
    while let Some(s) = product.queue.pop_front() {
        let (x, y) = product.pairs[s as usize];
        let da = *a_cache[x as usize].get_or_insert_with(|| {
            out.store
                .import(&a.store, a.delta[x as usize], &|v| v, &mut |set| set.to_vec())
        });
        let db = *b_cache[y as usize].get_or_insert_with(|| {
            out.store
                .import(&b.store, b.delta[y as usize], &|v| v + k, &mut |set| set.to_vec())
        });
        let joined = out.store.apply(da, db, &mut |sa, sb| {
            let mut set = Vec::with_capacity(sa.len() * sb.len());
            for &xa in sa {
                for &yb in sb {
                    set.push(product.intern((xa, yb)));
                }
            }
            set
        });
        let projected = out.store.exists_range(joined, k, k + l);
        let renamed = out
            .store
            .rename_vars(projected, &|v| if v >= k + l { v - l } else { v });
        debug_assert!(out.delta.len() == s as usize);
        out.delta.push(renamed);
        let _ = m;
    }
    for (i, &(x, y)) in product.pairs.iter().enumerate() {
        if a.finals.binary_search(&x).is_ok() && b.finals.binary_search(&y).is_ok() {
            out.finals.push(i as u32);
        }
    }
    out.initial.sort_unstable();
    out.initial.dedup();
    Ok(out)
}

/// Parallel product: labels are concatenated (first operand's bits first on
/// both boundaries) and the operands step independently.
pub fn nfa_tensor(a: &BoundedNfa, b: &BoundedNfa) -> BoundedNfa {
    let k = a.left_width as u16;
    let l = a.right_width as u16;
    let p = b.left_width as u16;
    let mut out = BoundedNfa::new(a.left_width + b.left_width, a.right_width + b.right_width);
    let mut product = PairProduct::new();
    for &ia in &a.initial {
        for &ib in &b.initial {
            let i = product.intern((ia, ib));
            out.initial.push(i);
        }
    }
    let a_map = move |v: u16| if v < k { v } else { v + p };
    let b_map = move |v: u16| if v < p { v + k } else { v + k + l };
    let mut a_cache: Vec<Option<DdRef>> = vec![None; a.delta.len()];
    let mut b_cache: Vec<Option<DdRef>> = vec![None; b.delta.len()];
    while let Some(s) = product.queue.pop_front() {
        let (x, y) = product.pairs[s as usize];
        let da = *a_cache[x as usize].get_or_insert_with(|| {
            out.store
                .import(&a.store, a.delta[x as usize], &a_map, &mut |set| set.to_vec())
        });
        let db = *b_cache[y as usize].get_or_insert_with(|| {
            out.store
                .import(&b.store, b.delta[y as usize], &b_map, &mut |set| set.to_vec())
        });
        let joined = out.store.apply(da, db, &mut |sa, sb| {
            let mut set = Vec::with_capacity(sa.len() * sb.len());
            for &xa in sa {
                for &yb in sb {
                    set.push(product.intern((xa, yb)));
                }
            }
            set
        });
        debug_assert!(out.delta.len() == s as usize);
        out.delta.push(joined);
    }
    for (i, &(x, y)) in product.pairs.iter().enumerate() {
        if a.finals.binary_search(&x).is_ok() && b.finals.binary_search(&y).is_ok() {
            out.finals.push(i as u32);
        }
    }
    out.initial.sort_unstable();
    out.initial.dedup();
    out
}

/// Weak closure: collapses silent activity. States of the result are
/// silent-closed sets of input states; the successor of a set under a label
/// is the silent closure of its one-step image, and a set is accepting iff it
/// contains an accepting input state (the closure absorbs trailing silent
/// moves, and the closed initial set absorbs leading ones). Every state of
/// the result keeps a silent self-loop, so the language is closed under
/// inserting and erasing silent labels.
pub fn epsilon_close(a: &BoundedNfa) -> BoundedNfa {
    let mut scratch = a.store.clone();
    let closure = |set: &[u32], scratch: &DdStore| -> Vec<u32> {
        let mut seen: BTreeSet<u32> = set.iter().copied().collect();
        let mut stack: Vec<u32> = set.to_vec();
        while let Some(x) = stack.pop() {
            for &y in scratch.lookup(a.delta[x as usize], 0) {
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen.into_iter().collect()
    };

    let mut out = BoundedNfa::new(a.left_width, a.right_width);
    let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut subsets: Vec<Vec<u32>> = Vec::new();
    let mut queue: VecDeque<u32> = VecDeque::new();
    let s0 = closure(&a.initial, &scratch);
    index.insert(s0.clone(), 0);
    subsets.push(s0);
    queue.push_back(0);
    out.initial.push(0);

    let mut closure_cache: HashMap<DdRef, Option<u32>> = HashMap::new();
    while let Some(s) = queue.pop_front() {
        let members = subsets[s as usize].clone();
        let mut union = scratch.empty();
        for &x in &members {
            union = scratch.union(union, a.delta[x as usize]);
        }
        // replace each image set by the state for its closure; empty images
        // stay empty rather than becoming a dead state
        let leaves: Vec<(DdRef, Vec<u32>)> = {
            let mut seen = Vec::new();
            for (_, leaf) in scratch.cubes(union, a.label_width()) {
                if !closure_cache.contains_key(&leaf) && !seen.iter().any(|(r, _)| *r == leaf) {
                    let image = scratch.leaf_value(leaf).to_vec();
                    seen.push((leaf, image));
                }
            }
            seen
        };
        for (leaf, image) in leaves {
            let entry = if image.is_empty() {
                None
            } else {
                let closed = closure(&image, &scratch);
                let idx = match index.get(&closed) {
                    Some(&i) => i,
                    None => {
                        let i = subsets.len() as u32;
                        index.insert(closed.clone(), i);
                        subsets.push(closed.clone());
                        queue.push_back(i);
                        i
                    }
                };
                Some(idx)
            };
            closure_cache.insert(leaf, entry);
        }
        let root = import_with_leaf_cache(&scratch, union, &mut out.store, &closure_cache);
        debug_assert_eq!(out.delta.len(), s as usize);
        out.delta.push(root);
    }
    for (i, subset) in subsets.iter().enumerate() {
        if subset.iter().any(|x| a.finals.binary_search(x).is_ok()) {
            out.finals.push(i as u32);
        }
    }
    out
}

/// Imports a diagram leaf-by-reference: each terminal of `from` is replaced
/// by the (optional) successor state recorded for it.
fn import_with_leaf_cache(
    from: &DdStore,
    f: DdRef,
    into: &mut DdStore,
    cache: &HashMap<DdRef, Option<u32>>,
) -> DdRef {
    fn rec(
        from: &DdStore,
        f: DdRef,
        into: &mut DdStore,
        cache: &HashMap<DdRef, Option<u32>>,
        memo: &mut HashMap<DdRef, DdRef>,
    ) -> DdRef {
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let r = if f.is_leaf() {
            match cache.get(&f).copied().flatten() {
                Some(state) => into.leaf(vec![state]),
                None => into.empty(),
            }
        } else {
            let (var, lo, hi) = from.node_fields(f);
            let lo = rec(from, lo, into, cache, memo);
            let hi = rec(from, hi, into, cache, memo);
            into.node(var, lo, hi)
        };
        memo.insert(f, r);
        r
    }
    let mut memo = HashMap::new();
    rec(from, f, into, cache, &mut memo)
}

#[cfg(test)]
mod tests;
