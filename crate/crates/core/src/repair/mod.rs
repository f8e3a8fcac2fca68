//! Constraint model of an assembly and the remove/add/retype repair sequence.

mod literal;

pub use literal::{verify_encodings_agree, Disagreement, EncodingReport, LiteralModel};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cp::{
    ConnectivitySpec, CpConstraint, CpProblem, Domain, SearchStrategy, SolveOptions, SolveStatus, SumMode, VarId,
};
use crate::error::RepairError;
use crate::model::{Code, DegreeRule, ProblemSpec, Solution};

/// Default node budget per CP stage. Generous for the sizes this crate targets.
pub const DEFAULT_NODE_BUDGET: u64 = 200_000;

/// Constraint counts of an [`AssemblyModel`], by kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ModelSummary {
    pub connectivity: usize,
    pub degree: usize,
    pub activity: usize,
    pub type_rules: usize,
    pub fixed: usize,
}

/// CP model of an assembly. Component variables are declared before joint
/// variables so that search decides the structure first.
#[derive(Debug, Clone)]
pub struct AssemblyModel {
    pub problem: CpProblem,
    pub joints: Vec<VarId>,
    pub components: Vec<VarId>,
    pub summary: ModelSummary,
}

impl AssemblyModel {
    /// CP variable of flat design variable `flat`.
    pub fn var(&self, flat: usize) -> VarId {
        if flat < self.joints.len() {
            self.joints[flat]
        } else {
            self.components[flat - self.joints.len()]
        }
    }

    pub fn n_decision_variables(&self) -> usize {
        self.joints.len() + self.components.len()
    }

    /// Reads a flat solution out of a CP assignment.
    pub fn solution(&self, values: &[u32]) -> Solution {
        Solution::new((0..self.n_decision_variables()).map(|f| values[self.var(f).index()] as Code).collect())
    }
}

pub fn build_assembly_model(spec: &ProblemSpec) -> AssemblyModel {
    let mut problem = CpProblem::new();
    let n = spec.n_joints();
    let index = spec.index();
    let w = spec.n_component_types() as u32;
    let v = spec.n_joint_types() as u32;
    let components: Vec<VarId> =
        index.components().map(|_| problem.add_variable(Domain::range(0, w)).expect("non-empty domain")).collect();
    let joints: Vec<VarId> =
        (0..n).map(|_| problem.add_variable(Domain::range(0, v)).expect("non-empty domain")).collect();
    let comp_var = |flat: usize| components[flat - n];
    let mut summary = ModelSummary::default();

    let edges = index.components().map(|(f, i, j)| (i, j, comp_var(f))).collect();
    problem
        .add_constraint(CpConstraint::PathMatrixConnectivity(ConnectivitySpec {
            joints: joints.clone(),
            envo_of: (0..n).map(|i| spec.envo_of(i)).collect(),
            n_envos: spec.envos().len(),
            edges,
        }))
        .expect("well-formed connectivity");
    summary.connectivity += 1;

    let mode = match spec.degree_rule() {
        DegreeRule::CountComponents => SumMode::CountNonZero,
        DegreeRule::SumCodes => SumMode::Values,
    };
    for joint in 0..n {
        let incident: Vec<VarId> = index.incident(joint).iter().map(|&f| comp_var(f)).collect();
        let free = spec.envo_of(joint).is_none();
        if incident.is_empty() {
            if free {
                problem.add_constraint(CpConstraint::FixValue { var: joints[joint], value: 0 }).expect("0 in domain");
                summary.fixed += 1;
            }
        } else {
            if free {
                problem
                    .add_constraint(CpConstraint::SumGreaterThan {
                        scope: incident.clone(),
                        bound: 1,
                        mode,
                        guards: vec![joints[joint]],
                    })
                    .expect("non-empty scope");
                summary.degree += 1;
            }
            problem
                .add_constraint(CpConstraint::ConditionalEquivalence {
                    indicator: joints[joint],
                    scope: incident.clone(),
                    one_way: !free,
                })
                .expect("non-empty scope");
            summary.activity += 1;
        }
        for rule in spec.type_rules() {
            problem
                .add_constraint(CpConstraint::CountEquivalence {
                    indicator: joints[joint],
                    indicator_value: rule.joint_type as u32,
                    scope: incident.clone(),
                    scope_value: rule.component_type as u32,
                })
                .expect("codes in range");
            summary.type_rules += 1;
        }
    }
    AssemblyModel { problem, joints, components, summary }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairStage {
    /// No CP stage ran (unconstrained search space).
    None,
    RemoveComponents,
    AddComponents,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairOutcome {
    pub repaired: Solution,
    pub stage_used: RepairStage,
    /// Flat indices of joints whose code changed.
    pub joints_retyped: Vec<usize>,
    pub cp_nodes_explored: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepairOptions {
    /// Code given to an active joint that no type rule forces.
    pub default_joint_code: Code,
    pub node_budget: u64,
}

impl Default for RepairOptions {
    fn default() -> Self {
        Self { default_joint_code: 1, node_budget: DEFAULT_NODE_BUDGET }
    }
}

/// Reusable repair operator; holds the CP model of one spec.
#[derive(Debug, Clone)]
pub struct Repairer {
    spec: ProblemSpec,
    model: AssemblyModel,
    options: RepairOptions,
}

impl Repairer {
    pub fn new(spec: &ProblemSpec) -> Self {
        Self::with_options(spec, RepairOptions::default())
    }

    pub fn with_options(spec: &ProblemSpec, options: RepairOptions) -> Self {
        Self { spec: spec.clone(), model: build_assembly_model(spec), options }
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn repair(&self, s: &Solution, seed: u64) -> Result<RepairOutcome, RepairError> {
        self.spec.check_solution(s)?;
        let n = self.spec.n_joints();
        let x = s.values();
        let w = self.spec.n_component_types() as u32;
        let opts = SolveOptions { node_budget: Some(self.options.node_budget), trace: false };
        let mut nodes = 0;

        let mut stage1 = self.model.problem.clone();
        for (k, &var) in self.model.components.iter().enumerate() {
            let cur = x[n + k] as u32;
            stage1.restrict(var, Domain::from_values([0, cur]).expect("code in range")).expect("domain keeps 0");
        }
        let out = stage1.solve_with(SearchStrategy::max_value(), opts);
        nodes += out.nodes;
        let (stage, assignment) = match out.status {
            SolveStatus::Solved(a) => (RepairStage::RemoveComponents, a),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut stage2 = self.model.problem.clone();
                for (k, &var) in self.model.components.iter().enumerate() {
                    let cur = x[n + k] as u32;
                    let allowed = if cur == 0 { [0, rng.gen_range(1..=w)] } else { [cur, cur] };
                    stage2
                        .restrict(var, Domain::from_values(allowed).expect("code in range"))
                        .expect("domain keeps the current code");
                }
                let out = stage2.solve_with(SearchStrategy::min_value(), opts);
                nodes += out.nodes;
                match out.status {
                    SolveStatus::Solved(a) => (RepairStage::AddComponents, a),
                    _ => return Err(RepairError::RepairFailed),
                }
            }
        };

        let mut repaired = self.model.solution(assignment.values());
        repaired.values_mut()[..n].copy_from_slice(&x[..n]);
        let mut joints_retyped = Vec::new();
        for joint in 0..n {
            let code = self.joint_code(&repaired, joint, x[joint]);
            if code != x[joint] {
                joints_retyped.push(joint);
            }
            repaired.values_mut()[joint] = code;
        }
        Ok(RepairOutcome { repaired, stage_used: stage, joints_retyped, cp_nodes_explored: nodes })
    }

    /// Keeps `current` when it is valid for the joint's incident components,
    /// otherwise picks a forced, default, or smallest valid code.
    fn joint_code(&self, s: &Solution, joint: usize, current: Code) -> Code {
        let incident = self.spec.index().incident(joint);
        let active = incident.iter().any(|&f| s.get(f) != 0);
        let free = self.spec.envo_of(joint).is_none();
        if free && !active {
            return 0;
        }
        let valid = |code: Code| -> bool {
            if active && code == 0 {
                return false;
            }
            self.spec.type_rules().iter().all(|r| {
                let has = incident.iter().any(|&f| s.get(f) == r.component_type);
                (code == r.joint_type) == has
            })
        };
        if valid(current) {
            return current;
        }
        if !active {
            return 0;
        }
        if let Some(r) = self.spec.type_rules().iter().find(|r| incident.iter().any(|&f| s.get(f) == r.component_type))
        {
            if valid(r.joint_type) {
                return r.joint_type;
            }
        }
        let default = self.options.default_joint_code;
        if valid(default) {
            return default;
        }
        (1..=self.spec.n_joint_types() as Code).find(|&c| valid(c)).unwrap_or(default)
    }
}

/// Repairs `s` into a feasible assembly.
pub fn repair(spec: &ProblemSpec, s: &Solution, seed: u64) -> Result<RepairOutcome, RepairError> {
    Repairer::new(spec).repair(s, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_spec, is_feasible, RawSpec};

    fn spec(n: usize, envos: &[(&str, &[usize])], rules: &[[usize; 2]]) -> ProblemSpec {
        build_spec(&RawSpec {
            n_joints: n,
            joint_types: 2,
            component_types: 2,
            envos: envos.iter().map(|(k, v)| (k.to_string(), v.to_vec())).collect(),
            type_rules: rules.to_vec(),
            degree_rule: DegreeRule::CountComponents,
        })
        .unwrap()
    }

    fn suspension() -> ProblemSpec {
        spec(8, &[("chassis", &[1, 2, 3, 4]), ("wheel", &[5, 6])], &[[2, 2]])
    }

    #[test]
    fn suspension_model_shape() {
        let m = build_assembly_model(&suspension());
        assert_eq!(m.n_decision_variables(), 29);
        assert_eq!(m.problem.n_variables(), 29);
        assert_eq!(m.summary.type_rules, 8);
        assert_eq!(m.summary.connectivity, 1);
        assert_eq!(m.summary.degree, 2);
    }

    #[test]
    fn no_type_rules_means_no_count_equivalences() {
        let m = build_assembly_model(&spec(4, &[("a", &[1, 2])], &[]));
        assert_eq!(m.summary.type_rules, 0);
    }

    #[test]
    fn lone_free_pair_only_admits_the_empty_assembly() {
        let s = spec(2, &[], &[]);
        let m = build_assembly_model(&s);
        let mut feasible = 0;
        for y1 in 0..3u8 {
            for y2 in 0..3u8 {
                for z in 0..3u8 {
                    let sol = Solution::new(vec![y1, y2, z]);
                    if is_feasible(&s, &sol).is_empty() {
                        feasible += 1;
                        assert_eq!(sol.values(), &[0, 0, 0]);
                    }
                }
            }
        }
        assert_eq!(feasible, 1);
        assert_eq!(m.problem.count_solutions(u64::MAX), 1);
    }

    #[test]
    fn dangling_component_is_removed() {
        // chassis 0, wheel 1, free joints 2 and 3; triangle 0-1-2 plus 0-3 dangling
        let s = spec(4, &[("chassis", &[1]), ("wheel", &[2])], &[]);
        let input = s.solution_from(&[(0, 1), (1, 1), (2, 1), (3, 1)], &[(0, 1, 1), (0, 2, 1), (1, 2, 1), (0, 3, 1)]);
        assert!(!is_feasible(&s, &input).is_empty());
        let out = repair(&s, &input, 0).unwrap();
        assert_eq!(out.stage_used, RepairStage::RemoveComponents);
        let expected = s.solution_from(&[(0, 1), (1, 1), (2, 1)], &[(0, 1, 1), (0, 2, 1), (1, 2, 1)]);
        assert_eq!(out.repaired, expected);
        assert_eq!(out.joints_retyped, vec![3]);
    }

    #[test]
    fn disconnected_clusters_are_bridged() {
        // envo a = {0}, envo b = {1}; a triangle of free joints hangs off a, b is isolated
        let s = spec(4, &[("a", &[1]), ("b", &[2])], &[]);
        let input = s.solution_from(&[(0, 1), (2, 1), (3, 1)], &[(0, 2, 1), (0, 3, 1), (2, 3, 1)]);
        let out = repair(&s, &input, 3).unwrap();
        assert_eq!(out.stage_used, RepairStage::AddComponents);
        assert!(is_feasible(&s, &out.repaired).is_empty());
        for f in s.n_joints()..s.n_variables() {
            if input.get(f) != 0 {
                assert_eq!(out.repaired.get(f), input.get(f));
            }
        }
        let added: Vec<usize> =
            (s.n_joints()..s.n_variables()).filter(|&f| input.get(f) == 0 && out.repaired.get(f) != 0).collect();
        assert!(!added.is_empty());
        assert!(added.iter().all(|&f| s.index().incident(1).contains(&f)));
    }

    #[test]
    fn feasible_input_is_unchanged() {
        let s = suspension();
        let input = s.solution_from(
            &[(0, 1), (1, 1), (2, 1), (3, 1), (4, 1), (5, 1)],
            &[(0, 4, 1), (1, 5, 1), (2, 4, 1), (3, 5, 1)],
        );
        assert!(is_feasible(&s, &input).is_empty());
        let out = repair(&s, &input, 9).unwrap();
        assert_eq!(out.repaired, input);
        assert_eq!(out.stage_used, RepairStage::RemoveComponents);
        assert!(out.joints_retyped.is_empty());
    }

    #[test]
    fn shock_forces_spherical_joints() {
        let s = suspension();
        let input = s.solution_from(&[], &[(0, 4, 2), (1, 5, 1)]);
        let out = repair(&s, &input, 1).unwrap();
        assert!(is_feasible(&s, &out.repaired).is_empty());
        assert_eq!(out.repaired.get(0), 2);
        assert_eq!(out.repaired.get(4), 2);
        assert_eq!(out.repaired.get(1), 1);
    }

    #[test]
    fn globally_unsatisfiable_spec_reports_failure() {
        // two envos need a component, but any component would force its joint to two codes
        let s = build_spec(&RawSpec {
            n_joints: 2,
            joint_types: 2,
            component_types: 1,
            envos: [("a".to_string(), vec![1]), ("b".to_string(), vec![2])].into_iter().collect(),
            type_rules: vec![[1, 1], [2, 1]],
            degree_rule: DegreeRule::CountComponents,
        })
        .unwrap();
        assert_eq!(repair(&s, &s.zero_solution(), 0), Err(RepairError::RepairFailed));
    }
}
