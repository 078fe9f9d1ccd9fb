//! File formats: nets, decompositions and run statistics are JSON documents;
//! automata render to GraphViz via [`crate::automata`].

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::Bits;
use crate::decompose::expand_targets;
use crate::net::{Marking, NetWithBoundaries, PlaceTarget};
use crate::wiring::{Assignments, EvalStats, WiringExpr};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid net file: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetField {
    Yes,
    No,
    DontCare,
}

impl From<TargetField> for PlaceTarget {
    fn from(t: TargetField) -> PlaceTarget {
        match t {
            TargetField::Yes => PlaceTarget::Yes,
            TargetField::No => PlaceTarget::No,
            TargetField::DontCare => PlaceTarget::DontCare,
        }
    }
}

impl From<PlaceTarget> for TargetField {
    fn from(t: PlaceTarget) -> TargetField {
        match t {
            PlaceTarget::Yes => TargetField::Yes,
            PlaceTarget::No => TargetField::No,
            PlaceTarget::DontCare => TargetField::DontCare,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlaceEntry {
    pub id: String,
    #[serde(default)]
    pub initial: bool,
    #[serde(default = "default_target")]
    pub target: TargetField,
}

fn default_target() -> TargetField {
    TargetField::DontCare
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionEntry {
    pub id: String,
    #[serde(default)]
    pub pre: Vec<String>,
    #[serde(default)]
    pub post: Vec<String>,
    #[serde(default)]
    pub source: Vec<usize>,
    #[serde(default)]
    pub target_ports: Vec<usize>,
}

/// A marked net with boundaries and per-place target labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetFile {
    #[serde(default)]
    pub left: usize,
    #[serde(default)]
    pub right: usize,
    pub places: Vec<PlaceEntry>,
    pub transitions: Vec<TransitionEntry>,
}

impl NetFile {
    pub fn to_net(&self) -> Result<(NetWithBoundaries, Marking, Vec<PlaceTarget>), IoError> {
        let mut net = NetWithBoundaries::new(self.left, self.right);
        for p in &self.places {
            if net.place_index(&p.id).is_some() {
                return Err(IoError::Invalid(format!("duplicate place id '{}'", p.id)));
            }
            net.add_place(p.id.clone());
        }
        for t in &self.transitions {
            let resolve = |ids: &[String]| -> Result<Vec<usize>, IoError> {
                ids.iter()
                    .map(|id| {
                        net.place_index(id).ok_or_else(|| {
                            IoError::Invalid(format!(
                                "transition '{}' references unknown place '{}'",
                                t.id, id
                            ))
                        })
                    })
                    .collect()
            };
            let pre = resolve(&t.pre)?;
            let post = resolve(&t.post)?;
            for &p in &t.source {
                if p >= self.left {
                    return Err(IoError::Invalid(format!(
                        "transition '{}' uses left port {p} but the left boundary has width {}",
                        t.id, self.left
                    )));
                }
            }
            for &p in &t.target_ports {
                if p >= self.right {
                    return Err(IoError::Invalid(format!(
                        "transition '{}' uses right port {p} but the right boundary has width {}",
                        t.id, self.right
                    )));
                }
            }
            net.add_transition(t.id.clone(), &pre, &post, &t.source, &t.target_ports);
        }
        let report = net.validate();
        if !report.is_valid() {
            let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            return Err(IoError::Invalid(msgs.join("; ")));
        }
        let initial = Bits::from_indices(
            net.num_places(),
            self.places
                .iter()
                .enumerate()
                .filter_map(|(i, p)| p.initial.then_some(i)),
        );
        let targets = self.places.iter().map(|p| p.target.into()).collect();
        Ok((net, initial, targets))
    }

    pub fn from_net(net: &NetWithBoundaries, initial: &Marking, targets: &[PlaceTarget]) -> NetFile {
        NetFile {
            left: net.left_width(),
            right: net.right_width(),
            places: net
                .places()
                .iter()
                .enumerate()
                .map(|(i, id)| PlaceEntry {
                    id: id.clone(),
                    initial: initial.get(i),
                    target: targets[i].into(),
                })
                .collect(),
            transitions: net
                .transitions()
                .iter()
                .map(|t| TransitionEntry {
                    id: t.id.clone(),
                    pre: t.pre.ones().map(|p| net.places()[p].clone()).collect(),
                    post: t.post.ones().map(|p| net.places()[p].clone()).collect(),
                    source: (0..net.left_width()).filter(|p| t.source >> p & 1 == 1).collect(),
                    target_ports: (0..net.right_width())
                        .filter(|p| t.target >> p & 1 == 1)
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum ExprNode {
    Var { name: String },
    Seq { left: Box<ExprNode>, right: Box<ExprNode> },
    Tensor { left: Box<ExprNode>, right: Box<ExprNode> },
}

impl From<&WiringExpr> for ExprNode {
    fn from(e: &WiringExpr) -> ExprNode {
        match e {
            WiringExpr::Var(x) => ExprNode::Var { name: x.clone() },
            WiringExpr::Seq(a, b) => ExprNode::Seq {
                left: Box::new(ExprNode::from(a.as_ref())),
                right: Box::new(ExprNode::from(b.as_ref())),
            },
            WiringExpr::Tensor(a, b) => ExprNode::Tensor {
                left: Box::new(ExprNode::from(a.as_ref())),
                right: Box::new(ExprNode::from(b.as_ref())),
            },
        }
    }
}

impl From<&ExprNode> for WiringExpr {
    fn from(e: &ExprNode) -> WiringExpr {
        match e {
            ExprNode::Var { name } => WiringExpr::var(name.clone()),
            ExprNode::Seq { left, right } => {
                WiringExpr::seq(WiringExpr::from(left.as_ref()), WiringExpr::from(right.as_ref()))
            }
            ExprNode::Tensor { left, right } => WiringExpr::tensor(
                WiringExpr::from(left.as_ref()),
                WiringExpr::from(right.as_ref()),
            ),
        }
    }
}

/// A wiring decomposition: the expression and one marked net per leaf
/// variable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub expr: ExprNode,
    pub leaves: BTreeMap<String, NetFile>,
}

impl DecompositionFile {
    pub fn to_wiring(&self) -> Result<(WiringExpr, Assignments), IoError> {
        let expr = WiringExpr::from(&self.expr);
        let mut asg = Assignments::default();
        for (var, nf) in &self.leaves {
            let (net, initial, targets) = nf.to_net()?;
            let finals = expand_targets(&targets);
            asg.assign(var, net, vec![initial], finals);
        }
        for var in expr.variables() {
            if !asg.nets.contains_key(var) {
                return Err(IoError::Invalid(format!(
                    "expression references leaf '{var}' but no such leaf is defined"
                )));
            }
        }
        Ok((expr, asg))
    }

    /// Inverse of [`to_wiring`](Self::to_wiring); requires each leaf to have
    /// exactly one initial marking and a final-marking set expressible as
    /// independent per-place labels.
    pub fn from_wiring(expr: &WiringExpr, asg: &Assignments) -> Result<DecompositionFile, IoError> {
        let mut leaves = BTreeMap::new();
        for (var, net) in &asg.nets {
            let init = asg
                .initial
                .get(var)
                .filter(|i| i.len() == 1)
                .ok_or_else(|| {
                    IoError::Invalid(format!(
                        "leaf '{var}' needs exactly one initial marking for file emission"
                    ))
                })?;
            let finals = asg.finals.get(var).cloned().unwrap_or_default();
            let targets = targets_from_markings(net.num_places(), &finals).ok_or_else(|| {
                IoError::Invalid(format!(
                    "final markings of leaf '{var}' are not a per-place product"
                ))
            })?;
            leaves.insert(var.clone(), NetFile::from_net(net, &init[0], &targets));
        }
        Ok(DecompositionFile {
            expr: ExprNode::from(expr),
            leaves,
        })
    }
}

/// Recovers per-place labels from a set of markings, if the set is exactly
/// the product of independent per-place choices.
fn targets_from_markings(num_places: usize, finals: &[Marking]) -> Option<Vec<PlaceTarget>> {
    if finals.is_empty() {
        return None;
    }
    let targets: Vec<PlaceTarget> = (0..num_places)
        .map(|p| {
            let count = finals.iter().filter(|m| m.get(p)).count();
            if count == 0 {
                PlaceTarget::No
            } else if count == finals.len() {
                PlaceTarget::Yes
            } else {
                PlaceTarget::DontCare
            }
        })
        .collect();
    let mut expanded = expand_targets(&targets);
    expanded.sort();
    let mut given: Vec<Marking> = finals.to_vec();
    given.sort();
    given.dedup();
    (expanded == given).then_some(targets)
}

/// Statistics document written by `check --stats`.
#[derive(Debug, Serialize)]
pub struct StatsFile<'a> {
    pub verdict: &'a str,
    pub memo_hits: usize,
    pub memo_misses: usize,
    pub total_micros: u128,
    pub nodes: &'a [crate::wiring::NodeStats],
}

impl<'a> StatsFile<'a> {
    pub fn new(verdict: &'a str, stats: &'a EvalStats) -> Self {
        StatsFile {
            verdict,
            memo_hits: stats.memo_hits,
            memo_misses: stats.memo_misses,
            total_micros: stats.total_micros,
            nodes: &stats.nodes,
        }
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn net_file_round_trip_on_generator_output() {
        for flat in [
            generators::buffer_flat(3),
            generators::tree_flat(3),
            generators::philosophers_flat(2),
            generators::clique(3),
        ] {
            let nf = NetFile::from_net(&flat.net, &flat.initial, &flat.targets);
            let text = serde_json::to_string(&nf).unwrap();
            let back: NetFile = serde_json::from_str(&text).unwrap();
            let (net, initial, targets) = back.to_net().unwrap();
            assert_eq!(net, flat.net);
            assert_eq!(initial, flat.initial);
            assert_eq!(targets, flat.targets);
        }
    }

    #[test]
    fn decomposition_file_round_trip() {
        let d = generators::buffer_decomposition(3, generators::BufferShape::Balanced);
        let file = DecompositionFile::from_wiring(&d.expr, &d.assign).unwrap();
        let text = serde_json::to_string(&file).unwrap();
        let back: DecompositionFile = serde_json::from_str(&text).unwrap();
        let (expr, asg) = back.to_wiring().unwrap();
        assert_eq!(expr, d.expr);
        assert_eq!(asg.nets, d.assign.nets);
        assert_eq!(asg.initial, d.assign.initial);
        // final markings agree as sets
        for (var, fin) in &d.assign.finals {
            let mut a = fin.clone();
            let mut b = asg.finals[var].clone();
            a.sort();
            b.sort();
            a.dedup();
            b.dedup();
            assert_eq!(a, b, "finals of {var}");
        }
    }

    #[test]
    fn rejects_unknown_place_and_bad_port() {
        let nf = NetFile {
            left: 0,
            right: 1,
            places: vec![PlaceEntry {
                id: "a".into(),
                initial: true,
                target: TargetField::Yes,
            }],
            transitions: vec![TransitionEntry {
                id: "t".into(),
                pre: vec!["missing".into()],
                post: vec![],
                source: vec![],
                target_ports: vec![0],
            }],
        };
        assert!(matches!(nf.to_net(), Err(IoError::Invalid(_))));
        let nf2 = NetFile {
            left: 0,
            right: 1,
            places: vec![],
            transitions: vec![TransitionEntry {
                id: "t".into(),
                pre: vec![],
                post: vec![],
                source: vec![],
                target_ports: vec![1],
            }],
        };
        assert!(matches!(nf2.to_net(), Err(IoError::Invalid(_))));
    }
}
