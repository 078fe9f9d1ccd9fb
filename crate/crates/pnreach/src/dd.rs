//! Reduced ordered decision diagrams with set-valued leaves.
//!
//! The transition function of a state maps a label bit-assignment (left
//! boundary bits first, then right boundary bits) to a set of successor
//! states. Instead of a dense table over the `2^(k+l)` assignments we store a
//! reduced ordered decision diagram whose terminals are interned state sets;
//! the usual boolean-terminal algebra generalises pointwise to the algebra of
//! subsets. Each automaton owns its node store, so automata can be built and
//! queried independently.

use std::collections::HashMap;

/// Reference to a node or a terminal within one [`DdStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DdRef(u32);

const LEAF_TAG: u32 = 1 << 31;

impl DdRef {
    fn leaf(i: u32) -> Self {
        DdRef(i | LEAF_TAG)
    }

    fn node(i: u32) -> Self {
        debug_assert!(i & LEAF_TAG == 0);
        DdRef(i)
    }

    pub fn is_leaf(self) -> bool {
        self.0 & LEAF_TAG != 0
    }

    fn index(self) -> usize {
        (self.0 & !LEAF_TAG) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct DdNode {
    var: u16,
    lo: DdRef,
    hi: DdRef,
}

/// A label region: one entry per variable, `None` meaning either value.
pub type Cube = Vec<Option<bool>>;

#[derive(Debug, Clone, Default)]
pub struct DdStore {
    nodes: Vec<DdNode>,
    node_dedup: HashMap<DdNode, u32>,
    leaves: Vec<Vec<u32>>,
    leaf_dedup: HashMap<Vec<u32>, u32>,
    union_memo: HashMap<(DdRef, DdRef), DdRef>,
}

impl DdStore {
    pub fn new() -> Self {
        let mut s = DdStore::default();
        s.leaf_dedup.insert(Vec::new(), 0);
        s.leaves.push(Vec::new());
        s
    }

    /// The terminal for the empty successor set.
    pub fn empty(&self) -> DdRef {
        DdRef::leaf(0)
    }

    /// Interns a successor set (sorted, deduplicated) as a terminal.
    pub fn leaf(&mut self, mut set: Vec<u32>) -> DdRef {
        set.sort_unstable();
        set.dedup();
        if let Some(&i) = self.leaf_dedup.get(&set) {
            return DdRef::leaf(i);
        }
        let i = self.leaves.len() as u32;
        self.leaves.push(set.clone());
        self.leaf_dedup.insert(set, i);
        DdRef::leaf(i)
    }

    pub fn leaf_value(&self, r: DdRef) -> &[u32] {
        debug_assert!(r.is_leaf());
        &self.leaves[r.index()]
    }

    /// Decomposes an inner node into `(var, lo, hi)`.
    pub fn node_fields(&self, r: DdRef) -> (u16, DdRef, DdRef) {
        debug_assert!(!r.is_leaf());
        let n = &self.nodes[r.index()];
        (n.var, n.lo, n.hi)
    }

    /// Variable at the root, or `u16::MAX` for terminals.
    fn var(&self, r: DdRef) -> u16 {
        if r.is_leaf() {
            u16::MAX
        } else {
            self.nodes[r.index()].var
        }
    }

    pub fn node(&mut self, var: u16, lo: DdRef, hi: DdRef) -> DdRef {
        if lo == hi {
            return lo;
        }
        debug_assert!(var < self.var(lo) && var < self.var(hi), "variable order violated");
        let n = DdNode { var, lo, hi };
        if let Some(&i) = self.node_dedup.get(&n) {
            return DdRef::node(i);
        }
        let i = self.nodes.len() as u32;
        self.nodes.push(n);
        self.node_dedup.insert(n, i);
        DdRef::node(i)
    }

    /// Cofactor w.r.t. `var`, assuming `var` is not below the root variable.
    pub fn cofactor(&self, f: DdRef, var: u16, value: bool) -> DdRef {
        if f.is_leaf() {
            return f;
        }
        let n = &self.nodes[f.index()];
        if n.var == var {
            if value {
                n.hi
            } else {
                n.lo
            }
        } else {
            debug_assert!(n.var > var);
            f
        }
    }

    /// The successor set at one explicit assignment (bit `i` of `assignment`
    /// is the value of variable `i`).
    pub fn lookup(&self, f: DdRef, assignment: u64) -> &[u32] {
        let mut cur = f;
        while !cur.is_leaf() {
            let n = &self.nodes[cur.index()];
            cur = if assignment >> n.var & 1 == 1 { n.hi } else { n.lo };
        }
        self.leaf_value(cur)
    }

    /// A diagram mapping exactly `assignment` (over `width` variables) to the
    /// given terminal and everything else to the empty set.
    pub fn single(&mut self, assignment: u64, width: u16, leaf: DdRef) -> DdRef {
        let mut cur = leaf;
        for var in (0..width).rev() {
            let empty = self.empty();
            cur = if assignment >> var & 1 == 1 {
                self.node(var, empty, cur)
            } else {
                self.node(var, cur, empty)
            };
        }
        cur
    }

    /// A diagram mapping every assignment inside `cube` to `leaf`.
    pub fn cube_dd(&mut self, cube: &Cube, leaf: DdRef) -> DdRef {
        let mut cur = leaf;
        for var in (0..cube.len() as u16).rev() {
            let empty = self.empty();
            cur = match cube[var as usize] {
                Some(true) => self.node(var, empty, cur),
                Some(false) => self.node(var, cur, empty),
                None => cur,
            };
        }
        cur
    }

    /// Pointwise set union of two diagrams.
    pub fn union(&mut self, a: DdRef, b: DdRef) -> DdRef {
        if a == b {
            return a;
        }
        if a == self.empty() {
            return b;
        }
        if b == self.empty() {
            return a;
        }
        let key = if a <= b { (a, b) } else { (b, a) };
        if let Some(&r) = self.union_memo.get(&key) {
            return r;
        }
        let r = if a.is_leaf() && b.is_leaf() {
            let mut set = self.leaves[a.index()].clone();
            set.extend_from_slice(&self.leaves[b.index()]);
            self.leaf(set)
        } else {
            let var = self.var(a).min(self.var(b));
            let (alo, ahi) = (self.cofactor(a, var, false), self.cofactor(a, var, true));
            let (blo, bhi) = (self.cofactor(b, var, false), self.cofactor(b, var, true));
            let lo = self.union(alo, blo);
            let hi = self.union(ahi, bhi);
            self.node(var, lo, hi)
        };
        self.union_memo.insert(key, r);
        r
    }

    /// Copies a diagram from another store, renumbering variables through
    /// `var_map` (which must be strictly monotone) and rewriting each terminal
    /// set through `leaf_map`.
    pub fn import(
        &mut self,
        from: &DdStore,
        f: DdRef,
        var_map: &dyn Fn(u16) -> u16,
        leaf_map: &mut dyn FnMut(&[u32]) -> Vec<u32>,
    ) -> DdRef {
        let mut memo: HashMap<DdRef, DdRef> = HashMap::new();
        self.import_rec(from, f, var_map, leaf_map, &mut memo)
    }

    fn import_rec(
        &mut self,
        from: &DdStore,
        f: DdRef,
        var_map: &dyn Fn(u16) -> u16,
        leaf_map: &mut dyn FnMut(&[u32]) -> Vec<u32>,
        memo: &mut HashMap<DdRef, DdRef>,
    ) -> DdRef {
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let r = if f.is_leaf() {
            let set = leaf_map(from.leaf_value(f));
            self.leaf(set)
        } else {
            let n = from.nodes[f.index()];
            let lo = self.import_rec(from, n.lo, var_map, leaf_map, memo);
            let hi = self.import_rec(from, n.hi, var_map, leaf_map, memo);
            self.node(var_map(n.var), lo, hi)
        };
        memo.insert(f, r);
        r
    }

    /// Rewrites terminals in place (same store, same variables).
    pub fn map_leaves(&mut self, f: DdRef, leaf_map: &mut dyn FnMut(&[u32]) -> Vec<u32>) -> DdRef {
        let mut memo: HashMap<DdRef, DdRef> = HashMap::new();
        self.map_leaves_rec(f, leaf_map, &mut memo)
    }

    fn map_leaves_rec(
        &mut self,
        f: DdRef,
        leaf_map: &mut dyn FnMut(&[u32]) -> Vec<u32>,
        memo: &mut HashMap<DdRef, DdRef>,
    ) -> DdRef {
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let r = if f.is_leaf() {
            let set = leaf_map(self.leaves[f.index()].clone().as_slice());
            self.leaf(set)
        } else {
            let n = self.nodes[f.index()];
            let lo = self.map_leaves_rec(n.lo, leaf_map, memo);
            let hi = self.map_leaves_rec(n.hi, leaf_map, memo);
            self.node(n.var, lo, hi)
        };
        memo.insert(f, r);
        r
    }

    /// Combines two diagrams pointwise: the result maps each assignment to
    /// `combine` of the two terminal sets. Both inputs must live in this
    /// store.
    pub fn apply(
        &mut self,
        a: DdRef,
        b: DdRef,
        combine: &mut dyn FnMut(&[u32], &[u32]) -> Vec<u32>,
    ) -> DdRef {
        let mut memo: HashMap<(DdRef, DdRef), DdRef> = HashMap::new();
        self.apply_rec(a, b, combine, &mut memo)
    }

    fn apply_rec(
        &mut self,
        a: DdRef,
        b: DdRef,
        combine: &mut dyn FnMut(&[u32], &[u32]) -> Vec<u32>,
        memo: &mut HashMap<(DdRef, DdRef), DdRef>,
    ) -> DdRef {
        if let Some(&r) = memo.get(&(a, b)) {
            return r;
        }
        let r = if a.is_leaf() && b.is_leaf() {
            let set = combine(
                self.leaves[a.index()].clone().as_slice(),
                self.leaves[b.index()].clone().as_slice(),
            );
            self.leaf(set)
        } else {
            let var = self.var(a).min(self.var(b));
            let (alo, ahi) = (self.cofactor(a, var, false), self.cofactor(a, var, true));
            let (blo, bhi) = (self.cofactor(b, var, false), self.cofactor(b, var, true));
            let lo = self.apply_rec(alo, blo, combine, memo);
            let hi = self.apply_rec(ahi, bhi, combine, memo);
            self.node(var, lo, hi)
        };
        memo.insert((a, b), r);
        r
    }

    /// Renumbers variables through a strictly monotone map, within this
    /// store.
    pub fn rename_vars(&mut self, f: DdRef, var_map: &dyn Fn(u16) -> u16) -> DdRef {
        let mut memo: HashMap<DdRef, DdRef> = HashMap::new();
        self.rename_rec(f, var_map, &mut memo)
    }

    fn rename_rec(
        &mut self,
        f: DdRef,
        var_map: &dyn Fn(u16) -> u16,
        memo: &mut HashMap<DdRef, DdRef>,
    ) -> DdRef {
        if f.is_leaf() {
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let n = self.nodes[f.index()];
        let lo = self.rename_rec(n.lo, var_map, memo);
        let hi = self.rename_rec(n.hi, var_map, memo);
        let r = self.node(var_map(n.var), lo, hi);
        memo.insert(f, r);
        r
    }

    /// Existentially quantifies all variables in `lo_var..hi_var`, unioning
    /// the two cofactors of each quantified variable.
    pub fn exists_range(&mut self, f: DdRef, lo_var: u16, hi_var: u16) -> DdRef {
        let mut memo: HashMap<DdRef, DdRef> = HashMap::new();
        self.exists_rec(f, lo_var, hi_var, &mut memo)
    }

    fn exists_rec(
        &mut self,
        f: DdRef,
        lo_var: u16,
        hi_var: u16,
        memo: &mut HashMap<DdRef, DdRef>,
    ) -> DdRef {
        let var = self.var(f);
        if var >= hi_var {
            // ordered diagram: no quantified variable can appear below
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let n = self.nodes[f.index()];
        let r = if n.var >= lo_var {
            let lo = self.exists_rec(n.lo, lo_var, hi_var, memo);
            let hi = self.exists_rec(n.hi, lo_var, hi_var, memo);
            self.union(lo, hi)
        } else {
            let lo = self.exists_rec(n.lo, lo_var, hi_var, memo);
            let hi = self.exists_rec(n.hi, lo_var, hi_var, memo);
            self.node(n.var, lo, hi)
        };
        memo.insert(f, r);
        r
    }

    /// All label regions of the diagram with their terminals, in canonical
    /// order: depth-first with the 0-branch before the 1-branch, which lists
    /// disjoint cubes by ascending smallest contained assignment.
    pub fn cubes(&self, f: DdRef, width: u16) -> Vec<(Cube, DdRef)> {
        let mut out = Vec::new();
        let mut cube: Cube = vec![None; width as usize];
        self.cubes_rec(f, &mut cube, &mut out);
        out
    }

    fn cubes_rec(&self, f: DdRef, cube: &mut Cube, out: &mut Vec<(Cube, DdRef)>) {
        if f.is_leaf() {
            out.push((cube.clone(), f));
            return;
        }
        let n = self.nodes[f.index()];
        cube[n.var as usize] = Some(false);
        self.cubes_rec(n.lo, cube, out);
        cube[n.var as usize] = Some(true);
        self.cubes_rec(n.hi, cube, out);
        cube[n.var as usize] = None;
    }

    /// Like [`cubes`](Self::cubes) but dropping regions mapped to the empty
    /// set.
    pub fn nonempty_cubes(&self, f: DdRef, width: u16) -> Vec<(Cube, DdRef)> {
        self.cubes(f, width)
            .into_iter()
            .filter(|(_, leaf)| !self.leaf_value(*leaf).is_empty())
            .collect()
    }
}
