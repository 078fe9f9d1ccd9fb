//! Wiring expressions and their memoised evaluation.
//!
//! A wiring expression is a syntax tree over sequential and parallel
//! composition with net-valued variables at the leaves. Evaluation translates
//! each leaf to an automaton, closes and minimises it, and recombines the
//! minimised automata bottom-up, closing and minimising after every product.
//! Every minimisation result is cached: leaves under a canonical form of
//! `(net, initial markings, final markings)`, inner nodes under the operator
//! and the signatures of the two operand automata — so structurally different
//! subtrees that minimise to the same behaviour still hit the cache.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::automata::{epsmin, is_accepting_verdict, net_to_nfa, nfa_seq, nfa_tensor, MinimalDfa, Signature};
use crate::bits::Bits;
use crate::net::{Marking, NetWithBoundaries};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WiringExpr {
    Var(String),
    Seq(Box<WiringExpr>, Box<WiringExpr>),
    Tensor(Box<WiringExpr>, Box<WiringExpr>),
}

impl WiringExpr {
    pub fn var(name: impl Into<String>) -> Self {
        WiringExpr::Var(name.into())
    }

    pub fn seq(left: WiringExpr, right: WiringExpr) -> Self {
        WiringExpr::Seq(Box::new(left), Box::new(right))
    }

    pub fn tensor(left: WiringExpr, right: WiringExpr) -> Self {
        WiringExpr::Tensor(Box::new(left), Box::new(right))
    }

    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            WiringExpr::Var(x) => out.push(x),
            WiringExpr::Seq(a, b) | WiringExpr::Tensor(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn num_nodes(&self) -> usize {
        match self {
            WiringExpr::Var(_) => 1,
            WiringExpr::Seq(a, b) | WiringExpr::Tensor(a, b) => 1 + a.num_nodes() + b.num_nodes(),
        }
    }
}

/// Leaf assignments: the net, the initial-marking set and the final-marking
/// set of each variable.
#[derive(Debug, Clone, Default)]
pub struct Assignments {
    pub nets: BTreeMap<String, NetWithBoundaries>,
    pub initial: BTreeMap<String, Vec<Marking>>,
    pub finals: BTreeMap<String, Vec<Marking>>,
}

impl Assignments {
    pub fn assign(
        &mut self,
        var: impl Into<String>,
        net: NetWithBoundaries,
        initial: Vec<Marking>,
        finals: Vec<Marking>,
    ) {
        let var = var.into();
        self.nets.insert(var.clone(), net);
        self.initial.insert(var.clone(), initial);
        self.finals.insert(var, finals);
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("variable '{0}' is not assigned a net")]
    UnassignedVariable(String),
    #[error("variable '{0}' needs a non-empty set of initial markings")]
    NoInitialMarkings(String),
    #[error("marking width mismatch for variable '{0}'")]
    MarkingWidth(String),
    #[error("width mismatch at {at}: left operand is ..->{left_right}, right operand is {right_left}->..")]
    WidthMismatch {
        at: String,
        left_right: usize,
        right_left: usize,
    },
    #[error("width guard tripped at {at}: {width} boundary bits exceed the maximum {max} (alphabet would have 2^{width} labels)")]
    WidthGuard { at: String, width: usize, max: usize },
    #[error("reachability needs a closed (0 -> 0) net, the expression has widths {left} -> {right}")]
    NotClosed { left: usize, right: usize },
}

/// Widths of the expression under an assignment, checking `;`-compatibility
/// at every node before anything is evaluated.
pub fn expr_widths(expr: &WiringExpr, asg: &Assignments) -> Result<(usize, usize), EvalError> {
    expr_widths_at(expr, asg, "root")
}

fn expr_widths_at(expr: &WiringExpr, asg: &Assignments, path: &str) -> Result<(usize, usize), EvalError> {
    match expr {
        WiringExpr::Var(x) => {
            let net = asg
                .nets
                .get(x)
                .ok_or_else(|| EvalError::UnassignedVariable(x.clone()))?;
            Ok((net.left_width(), net.right_width()))
        }
        WiringExpr::Seq(a, b) => {
            let (k, l) = expr_widths_at(a, asg, &format!("{path}.L"))?;
            let (l2, m) = expr_widths_at(b, asg, &format!("{path}.R"))?;
            if l != l2 {
                return Err(EvalError::WidthMismatch {
                    at: path.to_string(),
                    left_right: l,
                    right_left: l2,
                });
            }
            Ok((k, m))
        }
        WiringExpr::Tensor(a, b) => {
            let (k, l) = expr_widths_at(a, asg, &format!("{path}.L"))?;
            let (p, q) = expr_widths_at(b, asg, &format!("{path}.R"))?;
            Ok((k + p, l + q))
        }
    }
}

/// The net denoted by the expression: leaves are looked up, inner nodes
/// composed.
pub fn net_semantics(expr: &WiringExpr, asg: &Assignments) -> Result<NetWithBoundaries, EvalError> {
    expr_widths(expr, asg)?;
    net_semantics_rec(expr, asg)
}

fn net_semantics_rec(expr: &WiringExpr, asg: &Assignments) -> Result<NetWithBoundaries, EvalError> {
    match expr {
        WiringExpr::Var(x) => asg
            .nets
            .get(x)
            .cloned()
            .ok_or_else(|| EvalError::UnassignedVariable(x.clone())),
        WiringExpr::Seq(a, b) => {
            let left = net_semantics_rec(a, asg)?;
            let right = net_semantics_rec(b, asg)?;
            left.compose_seq(&right).map_err(|e| EvalError::WidthMismatch {
                at: "seq".to_string(),
                left_right: match e {
                    crate::net::ComposeError::WidthMismatch { left_right, .. } => left_right,
                },
                right_left: right.left_width(),
            })
        }
        WiringExpr::Tensor(a, b) => {
            let left = net_semantics_rec(a, asg)?;
            let right = net_semantics_rec(b, asg)?;
            Ok(left.compose_tensor(&right))
        }
    }
}

/// Combines per-leaf marking sets into marking sets of the composite net.
/// The composite's places are the left operand's followed by the right
/// operand's at every node, matching the composition operations, so a
/// combined marking is built positionally. The result has one marking per
/// element of the product of the leaf sets.
pub fn combined_markings(
    expr: &WiringExpr,
    asg: &Assignments,
    sets: &BTreeMap<String, Vec<Marking>>,
) -> Result<Vec<Marking>, EvalError> {
    Ok(combine_rec(expr, asg, sets)?.0)
}

fn combine_rec(
    expr: &WiringExpr,
    asg: &Assignments,
    sets: &BTreeMap<String, Vec<Marking>>,
) -> Result<(Vec<Marking>, usize), EvalError> {
    match expr {
        WiringExpr::Var(x) => {
            let net = asg
                .nets
                .get(x)
                .ok_or_else(|| EvalError::UnassignedVariable(x.clone()))?;
            let ms = sets.get(x).cloned().unwrap_or_default();
            for m in &ms {
                if m.width() != net.num_places() {
                    return Err(EvalError::MarkingWidth(x.clone()));
                }
            }
            Ok((ms, net.num_places()))
        }
        WiringExpr::Seq(a, b) | WiringExpr::Tensor(a, b) => {
            let (ls, ln) = combine_rec(a, asg, sets)?;
            let (rs, rn) = combine_rec(b, asg, sets)?;
            let mut out = Vec::with_capacity(ls.len() * rs.len());
            for l in &ls {
                for r in &rs {
                    let mut m = Bits::new(ln + rn);
                    for i in l.ones() {
                        m.set(i);
                    }
                    for i in r.ones() {
                        m.set(i + ln);
                    }
                    out.push(m);
                }
            }
            Ok((out, ln + rn))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum MemoKey {
    Leaf(Vec<u8>),
    Seq(Signature, Signature),
    Tensor(Signature, Signature),
}

/// Cache from canonical operand keys to minimised automata. Sound because
/// equal keys imply language-equal (hence structurally identical) results.
#[derive(Default)]
pub struct MemoTable {
    entries: HashMap<MemoKey, Arc<MinimalDfa>>,
}

impl MemoTable {
    pub fn new() -> Self {
        MemoTable::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn lookup(&self, key: &MemoKey) -> Option<Arc<MinimalDfa>> {
        self.entries.get(key).cloned()
    }

    fn insert(&mut self, key: MemoKey, dfa: Arc<MinimalDfa>) {
        if let Some(existing) = self.entries.get(&key) {
            debug_assert_eq!(
                existing.canonical_bytes(),
                dfa.canonical_bytes(),
                "memo key collision with structurally different automata"
            );
        }
        self.entries.insert(key, dfa);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeOp {
    Leaf,
    Seq,
    Tensor,
}

/// Per-node evaluation record; the raw material for run-time tables.
#[derive(Debug, Clone, Serialize)]
pub struct NodeStats {
    pub path: String,
    pub op: NodeOp,
    pub left_width: usize,
    pub right_width: usize,
    pub memo_hit: bool,
    /// States of the automaton handed to closure+minimisation (leaf
    /// translation or product); 0 on a memo hit.
    pub nfa_states: usize,
    /// States of the resulting minimal automaton.
    pub dfa_states: usize,
    pub micros: u128,
    #[serde(serialize_with = "ser_opt_sig")]
    pub left_operand: Option<Signature>,
    #[serde(serialize_with = "ser_opt_sig")]
    pub right_operand: Option<Signature>,
}

fn ser_opt_sig<S: serde::Serializer>(v: &Option<Signature>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(sig) => s.serialize_some(&sig.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct EvalStats {
    pub nodes: Vec<NodeStats>,
    pub memo_hits: usize,
    pub memo_misses: usize,
    pub total_micros: u128,
}

impl EvalStats {
    /// Memo misses at sequential-composition nodes.
    pub fn seq_misses(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.op == NodeOp::Seq && !n.memo_hit)
            .count()
    }

    /// Memo misses at sequential nodes whose left operand has the given
    /// signature; isolates how often one repeated composition shape was
    /// actually computed.
    pub fn seq_misses_with_left(&self, sig: Signature) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.op == NodeOp::Seq && !n.memo_hit && n.left_operand == Some(sig))
            .count()
    }
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Maximum total boundary bits (left + right) of any automaton built.
    pub max_width: usize,
    pub use_memo: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            max_width: 16,
            use_memo: true,
        }
    }
}

/// Evaluates the expression to the minimal automaton of the composite
/// behaviour, strict post-order, consulting the memo table before every
/// closure+minimisation and populating it after.
pub fn evaluate(
    expr: &WiringExpr,
    asg: &Assignments,
    memo: &mut MemoTable,
    opts: &EvalOptions,
) -> Result<(Arc<MinimalDfa>, EvalStats), EvalError> {
    evaluate_with_observer(expr, asg, memo, opts, &mut |_, _| {})
}

/// Like [`evaluate`], additionally reporting every node's resulting
/// automaton (by expression path) as it completes; used for rendering.
pub fn evaluate_with_observer(
    expr: &WiringExpr,
    asg: &Assignments,
    memo: &mut MemoTable,
    opts: &EvalOptions,
    observer: &mut dyn FnMut(&str, &MinimalDfa),
) -> Result<(Arc<MinimalDfa>, EvalStats), EvalError> {
    expr_widths(expr, asg)?;
    let mut stats = EvalStats::default();
    let start = Instant::now();
    let dfa = eval_rec(expr, asg, memo, opts, &mut stats, "root", observer)?;
    stats.total_micros = start.elapsed().as_micros();
    Ok((dfa, stats))
}

fn guard_width(path: &str, k: usize, l: usize, opts: &EvalOptions) -> Result<(), EvalError> {
    if k + l > opts.max_width {
        Err(EvalError::WidthGuard {
            at: path.to_string(),
            width: k + l,
            max: opts.max_width,
        })
    } else {
        Ok(())
    }
}

fn eval_rec(
    expr: &WiringExpr,
    asg: &Assignments,
    memo: &mut MemoTable,
    opts: &EvalOptions,
    stats: &mut EvalStats,
    path: &str,
    observer: &mut dyn FnMut(&str, &MinimalDfa),
) -> Result<Arc<MinimalDfa>, EvalError> {
    match expr {
        WiringExpr::Var(x) => {
            let started = Instant::now();
            let net = asg
                .nets
                .get(x)
                .ok_or_else(|| EvalError::UnassignedVariable(x.clone()))?;
            let init = asg
                .initial
                .get(x)
                .filter(|i| !i.is_empty())
                .ok_or_else(|| EvalError::NoInitialMarkings(x.clone()))?;
            let finals = asg.finals.get(x).cloned().unwrap_or_default();
            for m in init.iter().chain(&finals) {
                if m.width() != net.num_places() {
                    return Err(EvalError::MarkingWidth(x.clone()));
                }
            }
            guard_width(path, net.left_width(), net.right_width(), opts)?;
            let key = MemoKey::Leaf(canonical_leaf_key(net, init, &finals));
            if opts.use_memo {
                if let Some(dfa) = memo.lookup(&key) {
                    stats.memo_hits += 1;
                    stats.nodes.push(NodeStats {
                        path: path.to_string(),
                        op: NodeOp::Leaf,
                        left_width: dfa.left_width(),
                        right_width: dfa.right_width(),
                        memo_hit: true,
                        nfa_states: 0,
                        dfa_states: dfa.num_states(),
                        micros: started.elapsed().as_micros(),
                        left_operand: None,
                        right_operand: None,
                    });
                    observer(path, &dfa);
                    return Ok(dfa);
                }
            }
            let nfa = net_to_nfa(net, init, &finals);
            let nfa_states = nfa.num_states();
            let dfa = Arc::new(epsmin(&nfa));
            memo.insert(key, dfa.clone());
            stats.memo_misses += 1;
            stats.nodes.push(NodeStats {
                path: path.to_string(),
                op: NodeOp::Leaf,
                left_width: dfa.left_width(),
                right_width: dfa.right_width(),
                memo_hit: false,
                nfa_states,
                dfa_states: dfa.num_states(),
                micros: started.elapsed().as_micros(),
                left_operand: None,
                right_operand: None,
            });
            observer(path, &dfa);
            Ok(dfa)
        }
        WiringExpr::Seq(a, b) | WiringExpr::Tensor(a, b) => {
            let is_seq = matches!(expr, WiringExpr::Seq(..));
            let da = eval_rec(a, asg, memo, opts, stats, &format!("{path}.L"), observer)?;
            let db = eval_rec(b, asg, memo, opts, stats, &format!("{path}.R"), observer)?;
            let started = Instant::now();
            let (op, key, out_widths) = if is_seq {
                if da.right_width() != db.left_width() {
                    return Err(EvalError::WidthMismatch {
                        at: path.to_string(),
                        left_right: da.right_width(),
                        right_left: db.left_width(),
                    });
                }
                (
                    NodeOp::Seq,
                    MemoKey::Seq(da.signature(), db.signature()),
                    (da.left_width(), db.right_width()),
                )
            } else {
                (
                    NodeOp::Tensor,
                    MemoKey::Tensor(da.signature(), db.signature()),
                    (
                        da.left_width() + db.left_width(),
                        da.right_width() + db.right_width(),
                    ),
                )
            };
            guard_width(path, out_widths.0, out_widths.1, opts)?;
            let (sa, sb) = match &key {
                MemoKey::Seq(x, y) | MemoKey::Tensor(x, y) => (*x, *y),
                MemoKey::Leaf(_) => unreachable!(),
            };
            if opts.use_memo {
                if let Some(dfa) = memo.lookup(&key) {
                    stats.memo_hits += 1;
                    stats.nodes.push(NodeStats {
                        path: path.to_string(),
                        op,
                        left_width: out_widths.0,
                        right_width: out_widths.1,
                        memo_hit: true,
                        nfa_states: 0,
                        dfa_states: dfa.num_states(),
                        micros: started.elapsed().as_micros(),
                        left_operand: Some(sa),
                        right_operand: Some(sb),
                    });
                    observer(path, &dfa);
                    return Ok(dfa);
                }
            }
            let product = if is_seq {
                nfa_seq(&da.to_nfa(), &db.to_nfa()).expect("widths checked above")
            } else {
                nfa_tensor(&da.to_nfa(), &db.to_nfa())
            };
            let nfa_states = product.num_states();
            let dfa = Arc::new(epsmin(&product));
            memo.insert(key, dfa.clone());
            stats.memo_misses += 1;
            stats.nodes.push(NodeStats {
                path: path.to_string(),
                op,
                left_width: out_widths.0,
                right_width: out_widths.1,
                memo_hit: false,
                nfa_states,
                dfa_states: dfa.num_states(),
                micros: started.elapsed().as_micros(),
                left_operand: Some(sa),
                right_operand: Some(sb),
            });
            observer(path, &dfa);
            Ok(dfa)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReachReport {
    pub reachable: bool,
    #[serde(flatten)]
    pub stats: EvalStats,
}

/// End-to-end check: evaluates the expression (which must denote a closed
/// net) with a fresh memo table and reads the verdict off the resulting
/// one-state-per-behaviour automaton.
pub fn check_reachability(
    expr: &WiringExpr,
    asg: &Assignments,
    opts: &EvalOptions,
) -> Result<ReachReport, EvalError> {
    let (k, l) = expr_widths(expr, asg)?;
    if k != 0 || l != 0 {
        return Err(EvalError::NotClosed { left: k, right: l });
    }
    let mut memo = MemoTable::new();
    let (dfa, stats) = evaluate(expr, asg, &mut memo, opts)?;
    let reachable = is_accepting_verdict(&dfa).expect("widths checked to be closed");
    Ok(ReachReport { reachable, stats })
}

// --- canonical leaf keys ---------------------------------------------------

/// Canonical byte form of a leaf `(net, initial, final)` triple, invariant
/// under place renaming wherever colour refinement plus a bounded
/// permutation search can decide it. Places are first partitioned by an
/// iterated structural colouring (marking membership counts and incident
/// transition shapes); the serialisation then minimises over the residual
/// within-class orderings, capped to keep leaf hashing cheap. Beyond the cap
/// the original-identifier order breaks ties, which can only miss cache hits,
/// never corrupt them.
fn canonical_leaf_key(net: &NetWithBoundaries, init: &[Marking], finals: &[Marking]) -> Vec<u8> {
    const PERM_CAP: usize = 720;
    let np = net.num_places();
    let nt = net.transitions().len();

    let mut pcolor: Vec<u64> = (0..np)
        .map(|p| {
            let in_init = init.iter().filter(|m| m.get(p)).count() as u64;
            let in_fin = finals.iter().filter(|m| m.get(p)).count() as u64;
            fnv(&[0xA1, in_init as u8, in_fin as u8]).wrapping_add(in_init * 31 + in_fin)
        })
        .collect();
    let mut tcolor: Vec<u64> = net
        .transitions()
        .iter()
        .map(|t| fnv_u64s(&[0xB2, t.source, t.target, t.pre.count() as u64, t.post.count() as u64]))
        .collect();
    for _ in 0..np + nt + 1 {
        let new_t: Vec<u64> = net
            .transitions()
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let mut pres: Vec<u64> = t.pre.ones().map(|p| pcolor[p]).collect();
                let mut posts: Vec<u64> = t.post.ones().map(|p| pcolor[p]).collect();
                pres.sort_unstable();
                posts.sort_unstable();
                let mut data = vec![0xC3, tcolor[i], t.source, t.target, 0xFE];
                data.extend(&pres);
                data.push(0xFF);
                data.extend(&posts);
                fnv_u64s(&data)
            })
            .collect();
        let new_p: Vec<u64> = (0..np)
            .map(|p| {
                let mut incident: Vec<u64> = Vec::new();
                for (i, t) in net.transitions().iter().enumerate() {
                    if t.pre.get(p) {
                        incident.push(new_t[i].wrapping_mul(3));
                    }
                    if t.post.get(p) {
                        incident.push(new_t[i].wrapping_mul(5));
                    }
                }
                incident.sort_unstable();
                let mut data = vec![0xD4, pcolor[p]];
                data.extend(&incident);
                fnv_u64s(&data)
            })
            .collect();
        if new_p == pcolor && new_t == tcolor {
            break;
        }
        pcolor = new_p;
        tcolor = new_t;
    }

    // order places by colour; enumerate residual within-class orders
    let mut by_color: Vec<usize> = (0..np).collect();
    by_color.sort_by_key(|&p| (pcolor[p], net.places()[p].clone()));
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &p in &by_color {
        match classes.last_mut() {
            Some(c) if pcolor[c[0]] == pcolor[p] => c.push(p),
            _ => classes.push(vec![p]),
        }
    }
    let perms: usize = classes.iter().map(|c| factorial_capped(c.len())).product();
    if perms == 1 || perms > PERM_CAP {
        serialise_leaf(net, init, finals, &by_color)
    } else {
        let mut best: Option<Vec<u8>> = None;
        let mut orders = vec![Vec::new()];
        for class in &classes {
            let class_perms = permutations(class);
            orders = orders
                .into_iter()
                .flat_map(|prefix: Vec<usize>| {
                    class_perms.iter().map(move |p| {
                        let mut o = prefix.clone();
                        o.extend(p);
                        o
                    })
                })
                .collect();
        }
        for order in orders {
            let bytes = serialise_leaf(net, init, finals, &order);
            if best.as_ref().is_none_or(|b| bytes < *b) {
                best = Some(bytes);
            }
        }
        best.unwrap()
    }
}

fn factorial_capped(n: usize) -> usize {
    (1..=n).product::<usize>().min(100_000)
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let rest: Vec<usize> = items
            .iter()
            .enumerate()
            .filter_map(|(j, &y)| (j != i).then_some(y))
            .collect();
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

fn serialise_leaf(
    net: &NetWithBoundaries,
    init: &[Marking],
    finals: &[Marking],
    order: &[usize],
) -> Vec<u8> {
    let np = net.num_places();
    let mut rank = vec![0usize; np];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    let mut bytes = Vec::new();
    bytes.extend_from_slice(&(net.left_width() as u32).to_le_bytes());
    bytes.extend_from_slice(&(net.right_width() as u32).to_le_bytes());
    bytes.extend_from_slice(&(np as u32).to_le_bytes());
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
    bytes.extend_from_slice(&(transitions.len() as u32).to_le_bytes());
    for (pre, post, source, target) in transitions {
        for list in [pre, post] {
            bytes.extend_from_slice(&(list.len() as u32).to_le_bytes());
            for p in list {
                bytes.extend_from_slice(&(p as u32).to_le_bytes());
            }
        }
        bytes.extend_from_slice(&source.to_le_bytes());
        bytes.extend_from_slice(&target.to_le_bytes());
    }
    for set in [init, finals] {
        let mut markings: Vec<Vec<u32>> = set
            .iter()
            .map(|m| {
                let mut v: Vec<u32> = m.ones().map(|p| rank[p] as u32).collect();
                v.sort_unstable();
                v
            })
            .collect();
        markings.sort();
        markings.dedup();
        bytes.extend_from_slice(&(markings.len() as u32).to_le_bytes());
        for m in markings {
            bytes.extend_from_slice(&(m.len() as u32).to_le_bytes());
            for p in m {
                bytes.extend_from_slice(&p.to_le_bytes());
            }
        }
    }
    bytes
}

fn fnv(data: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in data {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn fnv_u64s(data: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &v in data {
        for b in v.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}
