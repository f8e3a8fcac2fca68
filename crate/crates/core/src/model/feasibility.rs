//! Direct graph-search feasibility oracle.
//!
//! This is deliberately independent of the constraint model in `repair`: it
//! walks the assembly graph with a breadth-first search instead of reasoning
//! over variable domains.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::spec::{DegreeRule, ProblemSpec, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    Disconnected,
    UnderConnectedJoint,
    TypeRuleBroken,
    InactiveJointWithComponents,
}

/// One broken constraint, with the flat indices of the variables involved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub variables: Vec<usize>,
}

impl Violation {
    fn new(kind: ViolationKind, variables: Vec<usize>) -> Self {
        Self { kind, variables }
    }
}

/// Lists every violated configuration constraint; empty iff `s` is feasible.
///
/// `s` must be well-formed for `spec` (see [`ProblemSpec::check_solution`]).
pub fn is_feasible(spec: &ProblemSpec, s: &Solution) -> Vec<Violation> {
    let mut out = Vec::new();
    let index = spec.index();
    let x = s.values();

    for joint in 0..spec.n_joints() {
        let live: Vec<usize> = index.incident(joint).iter().copied().filter(|&f| x[f] != 0).collect();
        if x[joint] == 0 && !live.is_empty() {
            let mut vars = vec![joint];
            vars.extend(&live);
            out.push(Violation::new(ViolationKind::InactiveJointWithComponents, vars));
        }
        if spec.envo_of(joint).is_none() && x[joint] != 0 {
            let degree = match spec.degree_rule() {
                DegreeRule::CountComponents => live.len(),
                DegreeRule::SumCodes => live.iter().map(|&f| x[f] as usize).sum(),
            };
            if degree < 2 {
                out.push(Violation::new(ViolationKind::UnderConnectedJoint, vec![joint]));
            }
        }
        for rule in spec.type_rules() {
            let has_component = live.iter().any(|&f| x[f] == rule.component_type);
            if (x[joint] == rule.joint_type) != has_component {
                let mut vars = vec![joint];
                vars.extend(live.iter().copied().filter(|&f| x[f] == rule.component_type));
                out.push(Violation::new(ViolationKind::TypeRuleBroken, vars));
            }
        }
    }

    let unreached = unreached_joints(spec, s);
    if !unreached.is_empty() {
        out.push(Violation::new(ViolationKind::Disconnected, unreached));
    }
    out
}

/// True iff the active structure forms a single connected piece.
pub fn connectivity_holds(spec: &ProblemSpec, s: &Solution) -> bool {
    unreached_joints(spec, s).is_empty()
}

/// Joint indices (one representative per vertex) not reachable from the first
/// present vertex. Vertices are the environment objects (always present) and
/// the free joints that are active or carry components.
fn unreached_joints(spec: &ProblemSpec, s: &Solution) -> Vec<usize> {
    let n = spec.n_joints();
    let m = spec.envos().len();
    let x = s.values();
    let vertex_of = |joint: usize| spec.envo_of(joint).unwrap_or(m + joint);
    let n_vertices = m + n;

    let mut present = vec![false; n_vertices];
    let mut representative = vec![usize::MAX; n_vertices];
    for (e, envo) in spec.envos().iter().enumerate() {
        present[e] = true;
        representative[e] = envo.members[0];
    }
    let mut adjacency = vec![Vec::new(); n_vertices];
    for (flat, i, j) in spec.index().components() {
        if x[flat] == 0 {
            continue;
        }
        let (a, b) = (vertex_of(i), vertex_of(j));
        adjacency[a].push(b);
        adjacency[b].push(a);
        present[a] = true;
        present[b] = true;
    }
    for joint in 0..n {
        if spec.envo_of(joint).is_none() {
            representative[m + joint] = joint;
            if x[joint] != 0 {
                present[m + joint] = true;
            }
        }
    }

    let Some(start) = present.iter().position(|&p| p) else {
        return Vec::new();
    };
    let mut seen = vec![false; n_vertices];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(v) = queue.pop_front() {
        for &w in &adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    (0..n_vertices).filter(|&v| present[v] && !seen[v]).map(|v| representative[v]).collect()
}
