//! Brzozowski minimisation and the canonical deterministic automaton.
//!
//! Minimisation is reverse / determinise / reverse / determinise, with the
//! subset constructions working directly on the decision diagrams: the
//! distinct terminals of the union diagram of a subset are exactly its
//! distinct successor subsets, so large alphabets never get enumerated.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dd::{DdRef, DdStore};

use super::{epsilon_close, BoundedNfa};

/// A complete, minimal deterministic automaton with canonical state
/// numbering: state 0 is the initial state and the remaining states are
/// numbered breadth-first over the label regions in canonical order. Two
/// language-equal inputs minimise to structurally identical values, which is
/// what makes memoisation by signature sound.
#[derive(Debug, Clone)]
pub struct MinimalDfa {
    left_width: usize,
    right_width: usize,
    store: DdStore,
    /// Per-state diagrams with singleton terminals; total by construction.
    delta: Vec<DdRef>,
    initial: u32,
    finals: Vec<u32>,
    /// The unique non-accepting all-self-loop state, if the automaton has
    /// one. Every label outside the represented behaviour leads here.
    sink: Option<u32>,
}

#[derive(Debug, Error)]
#[error("operation requires a closed (0 -> 0) automaton, got {left} -> {right}")]
pub struct WidthError {
    pub left: usize,
    pub right: usize,
}

/// Collision-resistant digest of the canonical transition table.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature([u8; 32]);

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature(")?;
        for b in &self.0[..8] {
            write!(f, "{b:02x}")?;
        }
        write!(f, "..)")
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl MinimalDfa {
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

    pub fn initial(&self) -> u32 {
        self.initial
    }

    pub fn finals(&self) -> &[u32] {
        &self.finals
    }

    pub fn sink(&self) -> Option<u32> {
        self.sink
    }

    pub fn store(&self) -> &DdStore {
        &self.store
    }

    pub fn delta(&self, state: u32) -> DdRef {
        self.delta[state as usize]
    }

    pub fn is_final(&self, state: u32) -> bool {
        self.finals.binary_search(&state).is_ok()
    }

    /// The unique successor on one explicit label assignment.
    pub fn step(&self, state: u32, assignment: u64) -> u32 {
        let set = self.store.lookup(self.delta[state as usize], assignment);
        debug_assert_eq!(set.len(), 1);
        set[0]
    }

    pub fn accepts(&self, word: &[u64]) -> bool {
        let mut s = self.initial;
        for &letter in word {
            s = self.step(s, letter);
        }
        self.is_final(s)
    }

    /// A nondeterministic view sharing the same behaviour, for feeding the
    /// result back into the product constructions.
    pub fn to_nfa(&self) -> BoundedNfa {
        BoundedNfa::from_parts(
            self.left_width,
            self.right_width,
            self.store.clone(),
            self.delta.clone(),
            vec![self.initial],
            self.finals.clone(),
        )
    }

    /// Canonical byte serialisation of the whole automaton. Structural
    /// equality of minimal automata is byte equality of this form.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&(self.left_width as u32).to_le_bytes());
        bytes.extend_from_slice(&(self.right_width as u32).to_le_bytes());
        bytes.extend_from_slice(&(self.delta.len() as u32).to_le_bytes());
        bytes.extend_from_slice(&(self.finals.len() as u32).to_le_bytes());
        for &f in &self.finals {
            bytes.extend_from_slice(&f.to_le_bytes());
        }
        for &d in &self.delta {
            let cubes = self.store.cubes(d, self.label_width());
            bytes.extend_from_slice(&(cubes.len() as u32).to_le_bytes());
            for (cube, leaf) in cubes {
                for v in cube {
                    bytes.push(match v {
                        None => 2,
                        Some(false) => 0,
                        Some(true) => 1,
                    });
                }
                let succ = self.store.leaf_value(leaf);
                debug_assert_eq!(succ.len(), 1);
                bytes.extend_from_slice(&succ[0].to_le_bytes());
            }
        }
        bytes
    }

    pub fn signature(&self) -> Signature {
        let mut h = Sha256::new();
        h.update(self.canonical_bytes());
        Signature(h.finalize().into())
    }
}

impl PartialEq for MinimalDfa {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_bytes() == other.canonical_bytes()
    }
}

impl Eq for MinimalDfa {}

/// Verdict of a closed automaton: whether its single meaningful behaviour
/// accepts. The alphabet of a `0 -> 0` automaton is the silent label alone,
/// so this follows silent moves from the initial state and reports whether an
/// accepting state is met.
pub fn is_accepting_verdict(d: &MinimalDfa) -> Result<bool, WidthError> {
    if d.left_width != 0 || d.right_width != 0 {
        return Err(WidthError {
            left: d.left_width,
            right: d.right_width,
        });
    }
    let mut seen = vec![false; d.num_states()];
    let mut s = d.initial;
    loop {
        if d.is_final(s) {
            return Ok(true);
        }
        if seen[s as usize] {
            return Ok(false);
        }
        seen[s as usize] = true;
        s = d.step(s, 0);
    }
}

/// Intermediate deterministic automaton produced by the subset construction.
struct Det {
    store: DdStore,
    delta: Vec<DdRef>,
    initial: u32,
    finals: Vec<bool>,
}

/// Subset construction. Every terminal of the per-subset union diagram is a
/// successor subset; the empty subset is a genuine state, so the result is
/// complete.
fn determinise(
    store: &mut DdStore,
    deltas: &[DdRef],
    initial: &[u32],
    finals: &[u32],
    width: u16,
) -> Det {
    let mut out_store = DdStore::new();
    let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut subsets: Vec<Vec<u32>> = Vec::new();
    let mut queue: VecDeque<u32> = VecDeque::new();
    let mut out_delta: Vec<DdRef> = Vec::new();

    let mut s0: Vec<u32> = initial.to_vec();
    s0.sort_unstable();
    s0.dedup();
    index.insert(s0.clone(), 0);
    subsets.push(s0);
    queue.push_back(0);

    let mut leaf_cache: HashMap<DdRef, u32> = HashMap::new();
    while let Some(s) = queue.pop_front() {
        let members = subsets[s as usize].clone();
        let mut union = store.empty();
        for &x in &members {
            union = store.union(union, deltas[x as usize]);
        }
        let mut new_leaves: Vec<(DdRef, u32)> = Vec::new();
        for (_, leaf) in store.cubes(union, width) {
            if leaf_cache.contains_key(&leaf) || new_leaves.iter().any(|(r, _)| *r == leaf) {
                continue;
            }
            let target: Vec<u32> = store.leaf_value(leaf).to_vec();
            let idx = match index.get(&target) {
                Some(&i) => i,
                None => {
                    let i = subsets.len() as u32;
                    index.insert(target.clone(), i);
                    subsets.push(target);
                    queue.push_back(i);
                    i
                }
            };
            new_leaves.push((leaf, idx));
        }
        leaf_cache.extend(new_leaves);
        let root = {
            let mut memo = HashMap::new();
            import_singleton(store, union, &mut out_store, &leaf_cache, &mut memo)
        };
        debug_assert_eq!(out_delta.len(), s as usize);
        out_delta.push(root);
    }
    let out_finals = subsets
        .iter()
        .map(|s| s.iter().any(|x| finals.binary_search(x).is_ok()))
        .collect();
    Det {
        store: out_store,
        delta: out_delta,
        initial: 0,
        finals: out_finals,
    }
}

fn import_singleton(
    from: &DdStore,
    f: DdRef,
    into: &mut DdStore,
    leaf_cache: &HashMap<DdRef, u32>,
    memo: &mut HashMap<DdRef, DdRef>,
) -> DdRef {
    if let Some(&r) = memo.get(&f) {
        return r;
    }
    let r = if f.is_leaf() {
        let state = leaf_cache[&f];
        into.leaf(vec![state])
    } else {
        let (var, lo, hi) = from.node_fields(f);
        let lo = import_singleton(from, lo, into, leaf_cache, memo);
        let hi = import_singleton(from, hi, into, leaf_cache, memo);
        into.node(var, lo, hi)
    };
    memo.insert(f, r);
    r
}

/// Reversed transition diagrams: state `y` maps a label to every `x` that
/// could reach `y` on it.
fn reverse(store: &DdStore, deltas: &[DdRef], width: u16) -> (DdStore, Vec<DdRef>) {
    let mut out = DdStore::new();
    let mut roots = vec![out.empty(); deltas.len()];
    for (x, &d) in deltas.iter().enumerate() {
        for (cube, leaf) in store.nonempty_cubes(d, width) {
            let src = out.leaf(vec![x as u32]);
            let cube_dd = out.cube_dd(&cube, src);
            for &y in store.leaf_value(leaf) {
                roots[y as usize] = out.union(roots[y as usize], cube_dd);
            }
        }
    }
    (out, roots)
}

/// Brzozowski minimisation of a silent-closed automaton. The caller is
/// expected to have applied [`epsilon_close`] first; [`epsmin`] packages the
/// two. The result is the canonical minimal complete automaton for the input
/// language.
pub fn minimise(a: &BoundedNfa) -> MinimalDfa {
    let width = a.label_width();
    let (mut rev1_store, rev1) = reverse(a.store(), a.deltas(), width);
    let finals1: Vec<u32> = a.initial().to_vec();
    let det1 = determinise(&mut rev1_store, &rev1, a.finals(), &finals1, width);

    let (mut rev2_store, rev2) = reverse(&det1.store, &det1.delta, width);
    let init2: Vec<u32> = det1
        .finals
        .iter()
        .enumerate()
        .filter_map(|(i, &f)| f.then_some(i as u32))
        .collect();
    let det2 = determinise(&mut rev2_store, &rev2, &init2, &[det1.initial], width);

    canonicalise(det2, a.left_width(), a.right_width())
}

/// Renumbers the automaton breadth-first from the initial state, visiting the
/// label regions of each state in canonical cube order, and rebuilds the
/// diagrams in a fresh store.
fn canonicalise(det: Det, left_width: usize, right_width: usize) -> MinimalDfa {
    let width = (left_width + right_width) as u16;
    let n = det.delta.len();
    let mut renum: Vec<Option<u32>> = vec![None; n];
    let mut order: Vec<u32> = Vec::new();
    let mut queue: VecDeque<u32> = VecDeque::new();
    renum[det.initial as usize] = Some(0);
    order.push(det.initial);
    queue.push_back(det.initial);
    while let Some(s) = queue.pop_front() {
        for (_, leaf) in det.store.cubes(det.delta[s as usize], width) {
            let succ = det.store.leaf_value(leaf);
            debug_assert_eq!(succ.len(), 1);
            let t = succ[0];
            if renum[t as usize].is_none() {
                renum[t as usize] = Some(order.len() as u32);
                order.push(t);
                queue.push_back(t);
            }
        }
    }
    let mut store = DdStore::new();
    let mut delta = Vec::with_capacity(order.len());
    for &old in &order {
        let root = store.import(&det.store, det.delta[old as usize], &|v| v, &mut |set| {
            set.iter().map(|&t| renum[t as usize].unwrap()).collect()
        });
        delta.push(root);
    }
    let mut finals: Vec<u32> = order
        .iter()
        .enumerate()
        .filter_map(|(new, &old)| det.finals[old as usize].then_some(new as u32))
        .collect();
    finals.sort_unstable();
    let mut dfa = MinimalDfa {
        left_width,
        right_width,
        store,
        delta,
        initial: 0,
        finals,
        sink: None,
    };
    dfa.sink = (0..dfa.num_states() as u32).find(|&s| {
        !dfa.is_final(s) && {
            let d = dfa.delta[s as usize];
            d.is_leaf() && dfa.store.leaf_value(d) == [s]
        }
    });
    dfa
}

/// Weak closure followed by minimisation: the canonical deterministic
/// automaton of a component's boundary protocol.
pub fn epsmin(a: &BoundedNfa) -> MinimalDfa {
    minimise(&epsilon_close(a))
}
