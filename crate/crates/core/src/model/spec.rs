use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::SpecError;

/// Domain code of a single design variable. `0` always means "absent".
pub type Code = u8;

/// Largest joint or component type code accepted by [`build_spec`].
pub const MAX_TYPE_CODE: usize = 63;

/// A named external body (chassis, wheel, ...) that anchors a fixed set of joints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvObject {
    pub name: String,
    /// Zero-based joint indices.
    pub members: Vec<usize>,
}

/// `[y_i = joint_type] <=> [some incident component has component_type]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeRule {
    pub joint_type: Code,
    pub component_type: Code,
}

/// How the "at least two components at a free joint" rule counts incident components.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeRule {
    /// Number of non-zero incident components must exceed one.
    #[default]
    CountComponents,
    /// Literal sum of incident component codes must exceed one.
    SumCodes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Joint {
        joint: usize,
    },
    /// Component between joints `i < j`.
    Component {
        i: usize,
        j: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub kind: VarKind,
    pub flat_index: usize,
}

/// Flattened layout of the design vector: joints first, then the allowed
/// component pairs in lexicographic `(i, j)` order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableIndex {
    vars: Vec<Variable>,
    n_joints: usize,
    pair_lookup: Vec<Option<usize>>,
    incident: Vec<Vec<usize>>,
}

impl VariableIndex {
    fn build(n_joints: usize, envo_of: &[Option<usize>]) -> Self {
        let mut vars: Vec<Variable> =
            (0..n_joints).map(|joint| Variable { kind: VarKind::Joint { joint }, flat_index: joint }).collect();
        let mut pair_lookup = vec![None; n_joints * n_joints];
        let mut incident = vec![Vec::new(); n_joints];
        for i in 0..n_joints {
            for j in (i + 1)..n_joints {
                if matches!((envo_of[i], envo_of[j]), (Some(a), Some(b)) if a == b) {
                    continue;
                }
                let flat = vars.len();
                vars.push(Variable { kind: VarKind::Component { i, j }, flat_index: flat });
                pair_lookup[i * n_joints + j] = Some(flat);
                pair_lookup[j * n_joints + i] = Some(flat);
                incident[i].push(flat);
                incident[j].push(flat);
            }
        }
        Self { vars, n_joints, pair_lookup, incident }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn n_joints(&self) -> usize {
        self.n_joints
    }

    pub fn n_components(&self) -> usize {
        self.vars.len() - self.n_joints
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn get(&self, flat: usize) -> Option<&Variable> {
        self.vars.get(flat)
    }

    /// Flat index of the component between `i` and `j` (either order), if that pair is allowed.
    pub fn component(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n_joints || j >= self.n_joints {
            return None;
        }
        self.pair_lookup[i * self.n_joints + j]
    }

    /// Flat indices of all component variables touching joint `i`.
    pub fn incident(&self, joint: usize) -> &[usize] {
        &self.incident[joint]
    }

    /// Component variables as `(flat, i, j)` triples.
    pub fn components(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.vars[self.n_joints..].iter().map(|v| match v.kind {
            VarKind::Component { i, j } => (v.flat_index, i, j),
            VarKind::Joint { .. } => unreachable!("joints precede components"),
        })
    }
}

/// Structural definition of a configuration-design problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    n_joints: usize,
    n_joint_types: usize,
    n_component_types: usize,
    envos: Vec<EnvObject>,
    type_rules: Vec<TypeRule>,
    degree_rule: DegreeRule,
    envo_of: Vec<Option<usize>>,
    index: VariableIndex,
    domain_sizes: Vec<usize>,
}

/// Problem description as it appears in a problem file. Joint indices are one-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawSpec {
    pub n_joints: usize,
    pub joint_types: usize,
    pub component_types: usize,
    #[serde(default)]
    pub envos: IndexMap<String, Vec<usize>>,
    #[serde(default)]
    pub type_rules: Vec<[usize; 2]>,
    #[serde(default)]
    pub degree_rule: DegreeRule,
}

/// Validates a raw description and builds the variable index.
pub fn build_spec(raw: &RawSpec) -> Result<ProblemSpec, SpecError> {
    if raw.n_joints == 0 {
        return Err(SpecError::EmptyJointSet);
    }
    for (what, n) in [("joint", raw.joint_types), ("component", raw.component_types)] {
        if n == 0 || n > MAX_TYPE_CODE {
            return Err(SpecError::TypeCountOutOfRange { what, count: n });
        }
    }
    let mut envo_of: Vec<Option<usize>> = vec![None; raw.n_joints];
    let mut envos: Vec<EnvObject> = Vec::with_capacity(raw.envos.len());
    for (m, (name, members)) in raw.envos.iter().enumerate() {
        let mut zero_based = Vec::with_capacity(members.len());
        for &joint in members {
            if joint == 0 || joint > raw.n_joints {
                return Err(SpecError::JointOutOfRange { envo: name.clone(), joint });
            }
            let slot = &mut envo_of[joint - 1];
            if let Some(prev) = *slot {
                let first = if prev == m { name.clone() } else { envos[prev].name.clone() };
                return Err(SpecError::OverlappingEnvos { joint, first, second: name.clone() });
            }
            *slot = Some(m);
            zero_based.push(joint - 1);
        }
        if zero_based.is_empty() {
            return Err(SpecError::EmptyEnvo(name.clone()));
        }
        envos.push(EnvObject { name: name.clone(), members: zero_based });
    }
    let mut type_rules = Vec::with_capacity(raw.type_rules.len());
    for &[g, h] in &raw.type_rules {
        if g == 0 || g > raw.joint_types || h == 0 || h > raw.component_types {
            return Err(SpecError::TypeCodeOutOfRange { joint_type: g, component_type: h });
        }
        type_rules.push(TypeRule { joint_type: g as Code, component_type: h as Code });
    }
    let index = VariableIndex::build(raw.n_joints, &envo_of);
    let domain_sizes = index
        .variables()
        .iter()
        .map(|v| match v.kind {
            VarKind::Joint { .. } => raw.joint_types + 1,
            VarKind::Component { .. } => raw.component_types + 1,
        })
        .collect();
    Ok(ProblemSpec {
        n_joints: raw.n_joints,
        n_joint_types: raw.joint_types,
        n_component_types: raw.component_types,
        envos,
        type_rules,
        degree_rule: raw.degree_rule,
        envo_of,
        index,
        domain_sizes,
    })
}

impl ProblemSpec {
    pub fn n_joints(&self) -> usize {
        self.n_joints
    }

    pub fn n_joint_types(&self) -> usize {
        self.n_joint_types
    }

    pub fn n_component_types(&self) -> usize {
        self.n_component_types
    }

    pub fn envos(&self) -> &[EnvObject] {
        &self.envos
    }

    pub fn type_rules(&self) -> &[TypeRule] {
        &self.type_rules
    }

    pub fn degree_rule(&self) -> DegreeRule {
        self.degree_rule
    }

    pub fn set_degree_rule(&mut self, rule: DegreeRule) {
        self.degree_rule = rule;
    }

    /// Environment object owning joint `i`, if any.
    pub fn envo_of(&self, joint: usize) -> Option<usize> {
        self.envo_of[joint]
    }

    pub fn index(&self) -> &VariableIndex {
        &self.index
    }

    pub fn n_variables(&self) -> usize {
        self.index.len()
    }

    /// Domain size (`V + 1` or `W + 1`) of every flat variable.
    pub fn domain_sizes(&self) -> &[usize] {
        &self.domain_sizes
    }

    /// Checks length and per-variable ranges.
    pub fn check_solution(&self, s: &Solution) -> Result<(), SpecError> {
        if s.len() != self.n_variables() {
            return Err(SpecError::SolutionLength { expected: self.n_variables(), got: s.len() });
        }
        for (flat, (&code, &size)) in s.values().iter().zip(&self.domain_sizes).enumerate() {
            if code as usize >= size {
                return Err(SpecError::CodeOutOfDomain { variable: flat, code });
            }
        }
        Ok(())
    }

    /// An empty (all-zero) solution.
    pub fn zero_solution(&self) -> Solution {
        Solution::new(vec![0; self.n_variables()])
    }

    /// Builds a solution from sparse joint codes and component codes, using
    /// zero-based joint indices. Panics on pairs excluded from the index.
    pub fn solution_from(&self, joints: &[(usize, Code)], components: &[(usize, usize, Code)]) -> Solution {
        let mut s = self.zero_solution();
        for &(i, code) in joints {
            s.values_mut()[i] = code;
        }
        for &(i, j, code) in components {
            let flat =
                self.index.component(i, j).unwrap_or_else(|| panic!("pair ({i}, {j}) is not a component variable"));
            s.values_mut()[flat] = code;
        }
        s
    }
}

/// One assignment of every design variable, aligned with [`VariableIndex`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Solution(Vec<Code>);

impl Solution {
    pub fn new(values: Vec<Code>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[Code] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [Code] {
        &mut self.0
    }

    pub fn into_values(self) -> Vec<Code> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, flat: usize) -> Code {
        self.0[flat]
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("]")
    }
}

/// Number of non-zero component variables.
pub fn active_component_count(spec: &ProblemSpec, s: &Solution) -> usize {
    s.values()[spec.n_joints()..].iter().filter(|&&c| c != 0).count()
}

/// Number of non-zero joint variables.
pub fn active_joint_count(spec: &ProblemSpec, s: &Solution) -> usize {
    s.values()[..spec.n_joints()].iter().filter(|&&c| c != 0).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn raw(n: usize, envos: &[(&str, &[usize])], rules: &[[usize; 2]]) -> RawSpec {
        RawSpec {
            n_joints: n,
            joint_types: 2,
            component_types: 2,
            envos: envos.iter().map(|(k, v)| (k.to_string(), v.to_vec())).collect(),
            type_rules: rules.to_vec(),
            degree_rule: DegreeRule::CountComponents,
        }
    }

    #[test]
    fn suspension_layout_has_29_variables() {
        let spec = build_spec(&raw(8, &[("chassis", &[1, 2, 3, 4]), ("wheel", &[5, 6])], &[[2, 2]])).unwrap();
        assert_eq!(spec.index().n_joints(), 8);
        assert_eq!(spec.index().n_components(), 21);
        assert_eq!(spec.n_variables(), 29);
    }

    #[test]
    fn single_pair_without_envos() {
        let spec = build_spec(&raw(2, &[], &[])).unwrap();
        assert_eq!(spec.n_variables(), 3);
        assert_eq!(spec.index().component(1, 0), Some(2));
    }

    #[test]
    fn one_envo_excludes_every_pair() {
        let spec = build_spec(&raw(3, &[("body", &[1, 2, 3])], &[])).unwrap();
        assert_eq!(spec.n_variables(), 3);
        assert_eq!(spec.index().n_components(), 0);
    }

    #[test]
    fn components_are_lexicographic_after_joints() {
        let spec = build_spec(&raw(4, &[("a", &[1, 2])], &[])).unwrap();
        let pairs: Vec<_> = spec.index().components().collect();
        assert_eq!(pairs, vec![(4, 0, 2), (5, 0, 3), (6, 1, 2), (7, 1, 3), (8, 2, 3)]);
    }

    #[test]
    fn rejects_bad_descriptions() {
        assert!(matches!(build_spec(&raw(0, &[], &[])), Err(SpecError::EmptyJointSet)));
        assert!(matches!(
            build_spec(&raw(4, &[("a", &[1, 2]), ("b", &[2, 3])], &[])),
            Err(SpecError::OverlappingEnvos { joint: 2, .. })
        ));
        assert!(matches!(build_spec(&raw(4, &[("a", &[5])], &[])), Err(SpecError::JointOutOfRange { .. })));
        assert!(matches!(build_spec(&raw(4, &[], &[[3, 1]])), Err(SpecError::TypeCodeOutOfRange { .. })));
        assert!(matches!(build_spec(&raw(4, &[], &[[1, 0]])), Err(SpecError::TypeCodeOutOfRange { .. })));
    }

    #[test]
    fn counts_active_components() {
        let spec = build_spec(&raw(4, &[], &[])).unwrap();
        assert_eq!(active_component_count(&spec, &spec.zero_solution()), 0);
        let s = spec.solution_from(&[], &[(0, 1, 1), (1, 2, 2), (0, 2, 1), (2, 3, 2)]);
        assert_eq!(active_component_count(&spec, &s), 4);
    }
}
